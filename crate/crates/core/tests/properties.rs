use doca::analysis::{check_certificate, is_regular, Regularity};
use doca::equivalence::{eqlevel, independence_level, min_attained_twice, Level};
use doca::generators::{gen_random, RandomSpec};
use doca::model::{decode_doca, encode_doca, validate_doca, Doca};
use doca::oracle::oracle_traces;
use doca::paths::{replay_positive, shortest_positive_path};
use doca::semantics::{mod_of, normalize, run, step, ExtState, StepKind};
use proptest::prelude::*;

fn spec() -> impl Strategy<Value = RandomSpec> {
    (1usize..=6, 1usize..=3, 0.4f64..1.0, 0.0f64..0.5, any::<u64>()).prop_map(|(k, a, d, r, seed)| RandomSpec {
        k,
        alphabet_size: a,
        rule_density: d,
        reset_fraction: r,
        seed,
    })
}

fn doca_and_word() -> impl Strategy<Value = (Doca, Vec<usize>, u64, u64, usize, usize)> {
    (spec(), proptest::collection::vec(0usize..3, 0..8), 0u64..12, 0u64..12, any::<usize>(), any::<usize>())
        .prop_map(|(s, w, m, n, i, j)| {
            let d = gen_random(&s);
            let sigma = d.alphabet().len();
            let w = w.into_iter().map(|a| a % sigma).collect();
            let ns = d.stable_states().len();
            (d, w, m, n, i % ns, j % ns)
        })
}

fn residues(d: &Doca, seed: &[u32]) -> Vec<u32> {
    d.reset_states()
        .iter()
        .enumerate()
        .map(|(i, r)| seed.get(i).copied().unwrap_or(0) % r.period)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 96, ..ProptestConfig::default() })]

    #[test]
    fn generated_docas_validate_and_round_trip(s in spec()) {
        let d = gen_random(&s);
        prop_assert!(validate_doca(&d).ok);
        let text = encode_doca(&d);
        prop_assert_eq!(encode_doca(&decode_doca(&text).unwrap()), text);
    }

    #[test]
    fn eqlevel_is_symmetric_with_valid_witness((d, _w, m, n, p, q) in doca_and_word()) {
        let s = ExtState::plain(p, m);
        let t = ExtState::plain(q, n);
        let a = eqlevel(&d, &s, &t, 60).unwrap();
        let b = eqlevel(&d, &t, &s, 60).unwrap();
        prop_assert_eq!(a.level, b.level);
        if let Some(w) = &a.witness {
            prop_assert_eq!(Some(w.len() as u64), a.level.finite().map(|e| e + 1));
            let l = run(&d, &s, w).unwrap().is_some();
            let r = run(&d, &t, w).unwrap().is_some();
            prop_assert!(l != r);
            for j in 0..w.len() {
                let s2 = run(&d, &s, &w[..j]).unwrap().unwrap();
                let t2 = run(&d, &t, &w[..j]).unwrap().unwrap();
                let e = eqlevel(&d, &s2, &t2, 60).unwrap().level;
                prop_assert_eq!(e, Level::Finite(a.level.value() - j as u64));
            }
        }
    }

    #[test]
    fn raising_the_bound_is_monotone((d, _w, m, n, p, q) in doca_and_word()) {
        let s = ExtState::plain(p, m);
        let t = ExtState::plain(q, n);
        let small = eqlevel(&d, &s, &t, 10).unwrap().level;
        let large = eqlevel(&d, &s, &t, 80).unwrap().level;
        match small {
            Level::Finite(v) => prop_assert_eq!(large, Level::Finite(v)),
            Level::AtLeast(b) => prop_assert!(large.value() >= b),
        }
    }

    #[test]
    fn eqlevel_drops_at_most_word_length((d, w, m, n, p, q) in doca_and_word()) {
        let s = ExtState::plain(p, m);
        let t = ExtState::plain(q, n);
        let (Some(s2), Some(t2)) = (run(&d, &s, &w).unwrap(), run(&d, &t, &w).unwrap()) else {
            return Ok(());
        };
        let e = eqlevel(&d, &s, &t, 60).unwrap().level;
        let e2 = eqlevel(&d, &s2, &t2, 60).unwrap().level;
        if let (Level::Finite(a), Level::Finite(b)) = (e, e2) {
            prop_assert!(b + w.len() as u64 >= a);
        }
    }

    #[test]
    fn min_attained_twice_on_triangles((d, _w, m, n, p, q) in doca_and_word(), r in any::<usize>(), o in 0u64..12) {
        let u = ExtState::plain(r % d.stable_states().len(), o);
        let s = ExtState::plain(p, m);
        let t = ExtState::plain(q, n);
        let levels = [
            eqlevel(&d, &s, &t, 60).unwrap().level,
            eqlevel(&d, &t, &u, 60).unwrap().level,
            eqlevel(&d, &s, &u, 60).unwrap().level,
        ];
        prop_assert!(min_attained_twice(&levels));
    }

    #[test]
    fn trace_sets_are_prefix_closed((d, _w, m, _n, p, _q) in doca_and_word()) {
        let ts = oracle_traces(&d, &ExtState::plain(p, m), 5).unwrap();
        prop_assert!(ts.is_prefix_closed());
    }

    #[test]
    fn reset_configuration_matches_its_mod_state((d, _w, m, _n, _p, _q) in doca_and_word(), s in any::<usize>()) {
        prop_assume!(!d.reset_states().is_empty());
        let s = s % d.reset_states().len();
        let cfg = ExtState::ResetCfg { state: s, counter: m };
        let a = oracle_traces(&d, &normalize(&d, &cfg).unwrap(), 6).unwrap();
        let b = oracle_traces(&d, &normalize(&d, &mod_of(&d, &cfg).unwrap()).unwrap(), 6).unwrap();
        prop_assert_eq!(a.words, b.words);
    }

    #[test]
    fn residues_commute_along_simple_moves(
        (d, w, _m, _n, p, _q) in doca_and_word(),
        c in proptest::collection::vec(0u32..8, 0..8),
        e in proptest::collection::vec(0u32..8, 0..8),
    ) {
        let mut x = ExtState::Mod { state: p, residues: residues(&d, &c) };
        let mut y = ExtState::Mod { state: p, residues: residues(&d, &e) };
        for &a in &w {
            let Some(sx) = step(&d, &x, a).unwrap() else { break };
            if sx.kind != StepKind::Simple {
                break;
            }
            let sy = step(&d, &y, a).unwrap();
            prop_assert!(sy.as_ref().map(|o| o.kind) == Some(StepKind::Simple));
            x = sx.target;
            y = sy.unwrap().target;
            let (ExtState::Mod { state: qx, residues: cx }, ExtState::Mod { state: qy, residues: cy }) = (&x, &y) else {
                prop_assert!(false, "simple moves keep Mod states");
                unreachable!()
            };
            prop_assert_eq!(qx, qy);
            for (i, r) in d.reset_states().iter().enumerate() {
                let before = (residues(&d, &e)[i] + r.period - residues(&d, &c)[i]) % r.period;
                let after = (cy[i] + r.period - cx[i]) % r.period;
                prop_assert_eq!(before, after);
            }
        }
    }

    #[test]
    fn positive_paths_replay_and_lift((d, _w, m, n, p, q) in doca_and_word()) {
        let (m, n) = (m + 1, n + 1);
        if let Some(path) = shortest_positive_path(&d, p, m, q, n) {
            let w = path.word();
            prop_assert_eq!(w.len() as u64, path.length);
            prop_assert_eq!(replay_positive(&d, p, m, &w), Some((q, n)));
            let lifted = run(&d, &mod_of(&d, &ExtState::plain(p, m)).unwrap(), &w).unwrap();
            prop_assert_eq!(lifted, Some(mod_of(&d, &ExtState::plain(q, n)).unwrap()));
        }
    }

    #[test]
    fn independence_level_of_mod_pairs((d, _w, m, _n, p, _q) in doca_and_word()) {
        let il = independence_level(&d, p, m, 60).unwrap();
        let direct = eqlevel(&d, &ExtState::plain(p, m), &mod_of(&d, &ExtState::plain(p, m)).unwrap(), 60).unwrap();
        prop_assert_eq!(il.level, direct.level);
    }

    #[test]
    fn regularity_certificates_replay((d, _w, m, _n, p, _q) in doca_and_word()) {
        let m = m % 4;
        let v = is_regular(&d, p, m, 40, Some(m + 20)).unwrap();
        if let Some(c) = &v.certificate {
            prop_assert_eq!(v.verdict, Regularity::NonRegular);
            prop_assert!(check_certificate(&d, p, m, c, 40).unwrap());
            let wider = is_regular(&d, p, m, 40, Some(m + 40)).unwrap();
            prop_assert_eq!(wider.verdict, Regularity::NonRegular);
        }
    }

    #[test]
    fn zero_effect_docas_are_regular(s in spec(), m in 0u64..5) {
        let d = gen_random(&s);
        let mut b = doca::model::DocaBuilder::new().letters(d.alphabet().to_vec()).stable(d.stable_states().to_vec());
        for r in d.reset_specs() {
            b.push_reset(r);
        }
        for mut r in d.rule_specs() {
            r.effect = 0;
            b.push_rule(r);
        }
        let flat = b.build().unwrap();
        let v = is_regular(&flat, 0, m, 40, None).unwrap();
        prop_assert_eq!(v.verdict, Regularity::RegularUpToCaps);
    }
}
