//! Regularity of the trace set of a configuration.
//!
//! `p(m)` is non-regular iff `p(m) →u q1(n) →v q2(n+k) →w q'(0)` where
//! `q1(n) →vw q'(0)` is a positive path and `IL(q'(0))` is finite. The
//! search below is exhaustive up to a counter cap only, so a negative
//! answer is reported as regular up to the caps used.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::equivalence::{independence_level, DEFAULT_STATE_CAP};
use crate::error::{Error, Result};
use crate::model::{Control, Doca};
use crate::paths::{replay_positive, shortest_positive_path};
use crate::semantics::{run, step, ExtState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regularity {
    RegularUpToCaps,
    NonRegular,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub u: Vec<usize>,
    pub q1: usize,
    pub n: u64,
    pub v: Vec<usize>,
    pub w: Vec<usize>,
    pub q_prime: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Largest counter value explored.
    pub counter: u64,
    /// Engine bound used for independence levels.
    pub bound: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularityVerdict {
    pub verdict: Regularity,
    pub certificate: Option<Certificate>,
    pub caps: Caps,
}

pub fn default_cap(doca: &Doca, m: u64) -> u64 {
    let k = doca.k() as u64;
    m + 4 * k * k + k
}

type Cfg = (usize, u64);

/// Configurations from which a positive path reaches some `(q', 0)` in
/// `targets`, with the next letter and configuration of a shortest one.
fn positive_reach(doca: &Doca, targets: &BTreeSet<usize>, hi: u64) -> HashMap<Cfg, Option<(usize, Cfg)>> {
    let mut rev: Vec<Vec<(usize, usize, i64)>> = vec![Vec::new(); doca.stable_states().len()];
    for r in doca.rules() {
        if let (true, Control::Stable(q)) = (r.positive, r.to) {
            rev[q].push((r.letter, r.from, r.effect as i64));
        }
    }
    let mut seen: HashMap<Cfg, Option<(usize, Cfg)>> = HashMap::new();
    let mut queue = VecDeque::new();
    for &q in targets {
        seen.insert((q, 0), None);
        queue.push_back((q, 0));
    }
    while let Some(cur) = queue.pop_front() {
        for &(a, x, j) in &rev[cur.0] {
            let c = cur.1 as i64 - j;
            if c < 1 || c as u64 > hi {
                continue;
            }
            let prev = (x, c as u64);
            if !seen.contains_key(&prev) {
                seen.insert(prev, Some((a, cur)));
                queue.push_back(prev);
            }
        }
    }
    seen
}

pub fn is_regular(doca: &Doca, p: usize, m: u64, bound: u64, cap: Option<u64>) -> Result<RegularityVerdict> {
    let k = doca.k() as u64;
    let cap = cap.unwrap_or_else(|| default_cap(doca, m)).max(m);
    let caps = Caps { counter: cap, bound };

    let mut z = BTreeSet::new();
    for q in 0..doca.stable_states().len() {
        if independence_level(doca, q, 0, bound)?.level.is_finite() {
            z.insert(q);
        }
    }
    let reach = positive_reach(doca, &z, cap + k);

    // Configurations reachable from p(m), resets allowed, in BFS order.
    let start = (p, m);
    let mut parent: HashMap<Cfg, Option<(Cfg, usize)>> = HashMap::from([(start, None)]);
    let mut order = vec![start];
    let mut i = 0;
    while i < order.len() {
        let cur = order[i];
        i += 1;
        for a in 0..doca.alphabet().len() {
            let Some(o) = step(doca, &ExtState::plain(cur.0, cur.1), a)? else {
                continue;
            };
            let ExtState::Plain { state, counter } = o.target else {
                unreachable!("steps from configurations end in configurations");
            };
            if counter > cap || parent.contains_key(&(state, counter)) {
                continue;
            }
            parent.insert((state, counter), Some((cur, a)));
            order.push((state, counter));
            if order.len() > DEFAULT_STATE_CAP {
                return Err(Error::BoundExceededMemory {
                    cap: DEFAULT_STATE_CAP,
                });
            }
        }
    }

    let n_stable = doca.stable_states().len();
    for &(q1, n) in &order {
        if n == 0 {
            continue;
        }
        for q2 in 0..n_stable {
            if !reach.contains_key(&(q2, n + k)) {
                continue;
            }
            let Some(v) = shortest_positive_path(doca, q1, n, q2, n + k) else {
                continue;
            };
            let mut u = Vec::new();
            let mut at = (q1, n);
            while let Some((prev, a)) = parent[&at] {
                u.push(a);
                at = prev;
            }
            u.reverse();
            let mut w = Vec::new();
            let mut at = (q2, n + k);
            while let Some((a, next)) = reach[&at] {
                w.push(a);
                at = next;
            }
            return Ok(RegularityVerdict {
                verdict: Regularity::NonRegular,
                certificate: Some(Certificate {
                    u,
                    q1,
                    n,
                    v: v.word(),
                    w,
                    q_prime: at.0,
                }),
                caps,
            });
        }
    }
    Ok(RegularityVerdict {
        verdict: Regularity::RegularUpToCaps,
        certificate: None,
        caps,
    })
}

/// Re-simulates a certificate: `u` leads from `p(m)` to `q1(n)`, `v` is a
/// positive path gaining `k`, `w` continues it positively to `q'(0)`, and
/// `IL(q'(0))` is finite under `bound`.
pub fn check_certificate(doca: &Doca, p: usize, m: u64, cert: &Certificate, bound: u64) -> Result<bool> {
    let k = doca.k() as u64;
    let end = run(doca, &ExtState::plain(p, m), &cert.u)?;
    if end != Some(ExtState::plain(cert.q1, cert.n)) || cert.n == 0 {
        return Ok(false);
    }
    let Some((q2, c)) = replay_positive(doca, cert.q1, cert.n, &cert.v) else {
        return Ok(false);
    };
    if c != cert.n + k {
        return Ok(false);
    }
    if replay_positive(doca, q2, c, &cert.w) != Some((cert.q_prime, 0)) {
        return Ok(false);
    }
    Ok(independence_level(doca, cert.q_prime, 0, bound)?.level.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::generators::gen_prime_family;

    #[test]
    fn d1_is_non_regular() {
        let d = fixtures::d1();
        let p = d.stable_index("p").unwrap();
        let v = is_regular(&d, p, 0, 64, None).unwrap();
        assert_eq!(v.verdict, Regularity::NonRegular);
        let c = v.certificate.unwrap();
        assert_eq!(c.q1, p);
        assert_eq!(d.word_to_string(&c.v), "aa");
        assert_eq!(c.q_prime, d.stable_index("q").unwrap());
        assert!(check_certificate(&d, p, 0, &c, 64).unwrap());
    }

    #[test]
    fn constant_counter_is_regular() {
        let d = fixtures::d2();
        for p in 0..3 {
            assert_eq!(
                is_regular(&d, p, 0, 64, None).unwrap().verdict,
                Regularity::RegularUpToCaps
            );
        }
    }

    #[test]
    fn prime_family_is_regular() {
        for n in 1..=3 {
            let (d, start) = gen_prime_family(n);
            let p = d.stable_index(&start).unwrap();
            let v = is_regular(&d, p, 0, 64, None).unwrap();
            assert_eq!(v.verdict, Regularity::RegularUpToCaps);
            assert!(v.caps.counter >= 4 * (d.k() * d.k()) as u64);
        }
    }

    #[test]
    fn tampered_certificate_is_rejected() {
        let d = fixtures::d1();
        let p = d.stable_index("p").unwrap();
        let mut c = is_regular(&d, p, 0, 64, None).unwrap().certificate.unwrap();
        c.w.pop();
        assert!(!check_certificate(&d, p, 0, &c, 64).unwrap());
    }
}
