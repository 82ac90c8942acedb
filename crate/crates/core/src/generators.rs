//! The prime-language family and seeded random automata.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{ClassicalDoca, Doca, DocaBuilder, ResetSpec, RuleSpec, EPS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    /// Total number of control states (stable + reset), at least 1.
    pub k: usize,
    pub alphabet_size: usize,
    /// Probability that a given `(p, a, c)` gets a rule, in `(0, 1]`.
    pub rule_density: f64,
    /// Fraction of control states that are reset states, in `[0, 1)`.
    pub reset_fraction: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GenSpec {
    Primes(usize),
    Random(RandomSpec),
}

/// The first `n` primes.
pub fn primes(n: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(n);
    let mut c = 2u32;
    while out.len() < n {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| c % p != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// Doca whose traces `a^m b_i t` are enabled from `count(0)` iff
/// `m ≡ 0 (mod p_i)`. Returns the doca and its start state.
pub fn gen_prime_family(n: usize) -> (Doca, String) {
    let ps = primes(n);
    let largest = *ps.last().unwrap_or(&1) as usize;
    let mut b = DocaBuilder::new()
        .letters(["a", "t"])
        .stable(["count", "acc", "dead"]);
    // Isolated padding keeps every period within |Q_St|.
    for i in 3..largest {
        b.push_stable(format!("pad{i}"));
    }
    b = b
        .rule("count", "a", 0, "count", 1)
        .rule("count", "a", 1, "count", 1)
        .rule("acc", "t", 0, "dead", 0)
        .rule("acc", "t", 1, "dead", 0);
    for (i, &p) in ps.iter().enumerate() {
        let letter = format!("b{}", i + 1);
        let reset = format!("r{}", i + 1);
        b = b.letters([letter.clone()]);
        b.push_reset(ResetSpec {
            name: reset.clone(),
            period: p,
            goto: (0..p)
                .map(|c| (c, if c == 0 { "acc" } else { "dead" }.to_string()))
                .collect(),
        });
        for positive in [false, true] {
            b.push_rule(RuleSpec {
                from: "count".into(),
                letter: letter.clone(),
                positive,
                to: reset.clone(),
                effect: 0,
            });
        }
    }
    (b.build().expect("prime family is well formed"), "count".into())
}

/// Classical doca accepting `{a^m b_i | m ≡ 0 (mod moduli[i])}` by counting
/// down through a popping ε-cycle of length `moduli[i]`.
pub fn prime_family_classical(moduli: &[u32]) -> ClassicalDoca {
    let mut states = vec!["acc".to_string(), "count".to_string(), "dead".to_string()];
    let mut alphabet = vec!["a".to_string()];
    let rule = |from: &str, letter: &str, positive: bool, to: &str, effect: i8| RuleSpec {
        from: from.into(),
        letter: letter.into(),
        positive,
        to: to.into(),
        effect,
    };
    let mut rules = vec![
        rule("count", "a", false, "count", 1),
        rule("count", "a", true, "count", 1),
    ];
    for (i, &p) in moduli.iter().enumerate() {
        let letter = format!("b{}", i + 1);
        alphabet.push(letter.clone());
        let cyc = |j: u32| format!("m{}_{}", i + 1, j);
        for j in 0..p {
            states.push(cyc(j));
            rules.push(rule(&cyc(j), EPS, true, &cyc((j + 1) % p), -1));
            rules.push(rule(&cyc(j), EPS, false, if j == 0 { "acc" } else { "dead" }, 0));
        }
        rules.push(rule("count", &letter, false, &cyc(0), 0));
        rules.push(rule("count", &letter, true, &cyc(0), 0));
    }
    ClassicalDoca::from_names(states, alphabet, rules, "count", &["acc".to_string()])
        .expect("classical prime family is well formed")
}

fn letter_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            if i < 26 {
                ((b'a' + i as u8) as char).to_string()
            } else {
                format!("l{i}")
            }
        })
        .collect()
}

/// Seeded random doca; always passes validation.
pub fn gen_random(spec: &RandomSpec) -> Doca {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let k = spec.k.max(1);
    let n_reset = ((k as f64 * spec.reset_fraction).floor() as usize).min(k - 1);
    let n_stable = k - n_reset;
    let stable: Vec<String> = (0..n_stable).map(|i| format!("q{i}")).collect();
    let resets: Vec<String> = (0..n_reset).map(|i| format!("s{i}")).collect();
    let alphabet = letter_names(spec.alphabet_size.max(1));

    let mut b = DocaBuilder::new()
        .letters(alphabet.clone())
        .stable(stable.clone());
    for s in &resets {
        let period = rng.gen_range(1..=n_stable as u32);
        b.push_reset(ResetSpec {
            name: s.clone(),
            period,
            goto: (0..period)
                .map(|c| (c, stable[rng.gen_range(0..n_stable)].clone()))
                .collect(),
        });
    }
    for p in &stable {
        for a in &alphabet {
            for positive in [false, true] {
                if !rng.gen_bool(spec.rule_density.clamp(0.0, 1.0)) {
                    continue;
                }
                let t = rng.gen_range(0..k);
                let to = if t < n_stable {
                    stable[t].clone()
                } else {
                    resets[t - n_stable].clone()
                };
                let effect = if positive {
                    rng.gen_range(-1..=1)
                } else {
                    rng.gen_range(0..=1)
                };
                b.push_rule(RuleSpec {
                    from: p.clone(),
                    letter: a.clone(),
                    positive,
                    to,
                    effect,
                });
            }
        }
    }
    b.build().expect("random doca is well formed")
}

pub fn generate(spec: &GenSpec) -> (Doca, String) {
    match spec {
        GenSpec::Primes(n) => gen_prime_family(*n),
        GenSpec::Random(r) => {
            let d = gen_random(r);
            let start = d.stable_name(0).to_string();
            (d, start)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSpec {
    pub states: usize,
    pub alphabet_size: usize,
    pub rule_density: f64,
    /// Probability that a `(p, c)` pair gets an ε-rule instead of letter rules.
    pub eps_fraction: f64,
    pub accept_fraction: f64,
    pub seed: u64,
}

/// Seeded random classical doca (state `c0` is initial); always valid.
pub fn gen_random_classical(spec: &ClassicalSpec) -> ClassicalDoca {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.states.max(1);
    let states: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
    let alphabet = letter_names(spec.alphabet_size.max(1));
    let mut rules = Vec::new();
    for p in &states {
        for positive in [false, true] {
            let pick_effect = |rng: &mut ChaCha8Rng| -> i8 {
                if positive {
                    rng.gen_range(-1..=1)
                } else {
                    rng.gen_range(0..=1)
                }
            };
            if rng.gen_bool(spec.eps_fraction.clamp(0.0, 1.0)) {
                let to = states[rng.gen_range(0..n)].clone();
                let effect = pick_effect(&mut rng);
                rules.push(RuleSpec {
                    from: p.clone(),
                    letter: EPS.into(),
                    positive,
                    to,
                    effect,
                });
                continue;
            }
            for a in &alphabet {
                if rng.gen_bool(spec.rule_density.clamp(0.0, 1.0)) {
                    let to = states[rng.gen_range(0..n)].clone();
                    let effect = pick_effect(&mut rng);
                    rules.push(RuleSpec {
                        from: p.clone(),
                        letter: a.clone(),
                        positive,
                        to,
                        effect,
                    });
                }
            }
        }
    }
    let accepting: Vec<String> = states
        .iter()
        .filter(|_| rng.gen_bool(spec.accept_fraction.clamp(0.0, 1.0)))
        .cloned()
        .collect();
    ClassicalDoca::from_names(states, alphabet, rules, "c0", &accepting)
        .expect("random classical doca is well formed")
}
