//! Brute-force ground truth by word enumeration.
//!
//! Nothing here is shared with the product search in `equivalence`: words
//! are enumerated level by level and simulated letter by letter, with no
//! deduplication of the states they reach.

use std::collections::BTreeSet;

use crate::equivalence::Level;
use crate::error::{Error, Result};
use crate::model::Doca;
use crate::semantics::{step, ExtState};

pub const MAX_DEPTH: usize = 14;

/// All words of length at most `depth` enabled in some state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceSet {
    pub depth: usize,
    pub words: BTreeSet<Vec<usize>>,
}

impl TraceSet {
    pub fn contains(&self, word: &[usize]) -> bool {
        self.words.contains(word)
    }

    pub fn is_prefix_closed(&self) -> bool {
        self.words
            .iter()
            .all(|w| w.is_empty() || self.words.contains(&w[..w.len() - 1]))
    }
}

fn guard(depth: usize) -> Result<()> {
    if depth > MAX_DEPTH {
        Err(Error::DepthTooLarge {
            depth,
            max: MAX_DEPTH,
        })
    } else {
        Ok(())
    }
}

fn require_stable(s: &ExtState) -> Result<()> {
    if s.is_stable() {
        Ok(())
    } else {
        Err(Error::InvalidState(format!("oracle needs a stable state, got {s:?}")))
    }
}

pub fn oracle_traces(doca: &Doca, s: &ExtState, depth: usize) -> Result<TraceSet> {
    guard(depth)?;
    require_stable(s)?;
    let mut words = BTreeSet::new();
    let mut layer: Vec<(Vec<usize>, ExtState)> = vec![(Vec::new(), s.clone())];
    words.insert(Vec::new());
    for _ in 0..depth {
        let mut next = Vec::new();
        for (w, st) in &layer {
            for a in 0..doca.alphabet().len() {
                if let Some(o) = step(doca, st, a)? {
                    let mut w2 = w.clone();
                    w2.push(a);
                    words.insert(w2.clone());
                    next.push((w2, o.target));
                }
            }
        }
        layer = next;
    }
    Ok(TraceSet { depth, words })
}

/// Length of the shortest word in the symmetric difference of the two
/// truncated trace sets, minus one; `AtLeast(depth)` when they agree.
pub fn oracle_eqlevel(doca: &Doca, s: &ExtState, t: &ExtState, depth: usize) -> Result<Level> {
    guard(depth)?;
    require_stable(s)?;
    require_stable(t)?;
    // Each entry stands for one word enabled on both sides.
    let mut layer: Vec<(ExtState, ExtState)> = vec![(s.clone(), t.clone())];
    for len in 1..=depth {
        let mut next = Vec::new();
        for (x, y) in &layer {
            for a in 0..doca.alphabet().len() {
                match (step(doca, x, a)?, step(doca, y, a)?) {
                    (Some(ox), Some(oy)) => next.push((ox.target, oy.target)),
                    (None, None) => {}
                    _ => return Ok(Level::Finite(len as u64 - 1)),
                }
            }
        }
        if next.is_empty() {
            break;
        }
        layer = next;
    }
    Ok(Level::AtLeast(depth as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::semantics::mod_of;

    fn w(d: &Doca, s: &str) -> Vec<usize> {
        d.parse_word(s).unwrap()
    }

    #[test]
    fn d1_traces() {
        let d = fixtures::d1();
        let p = ExtState::plain(d.stable_index("p").unwrap(), 0);
        let ts = oracle_traces(&d, &p, 3).unwrap();
        assert!(ts.contains(&w(&d, "aab")));
        assert!(!ts.contains(&w(&d, "abb")));
        assert!(ts.is_prefix_closed());
    }

    #[test]
    fn ruleless_state_has_only_empty_word() {
        let d = fixtures::d2();
        let r = ExtState::plain(d.stable_index("r").unwrap(), 0);
        let ts = oracle_traces(&d, &r, 5).unwrap();
        assert_eq!(ts.words.len(), 1);
        assert!(ts.contains(&[]));
    }

    #[test]
    fn mod_state_excludes_zero_rules() {
        let d = fixtures::d4();
        let m = mod_of(&d, &ExtState::plain(0, 0)).unwrap();
        let ts = oracle_traces(&d, &m, 2).unwrap();
        let expected: BTreeSet<Vec<usize>> =
            [vec![], w(&d, "a"), w(&d, "aa")].into_iter().collect();
        assert_eq!(ts.words, expected);
    }

    #[test]
    fn oracle_levels() {
        let d2 = fixtures::d2();
        let p = ExtState::plain(d2.stable_index("p").unwrap(), 0);
        let q = ExtState::plain(d2.stable_index("q").unwrap(), 0);
        assert_eq!(oracle_eqlevel(&d2, &p, &q, 4).unwrap(), Level::Finite(1));
        assert_eq!(oracle_eqlevel(&d2, &p, &p, 4).unwrap(), Level::AtLeast(4));

        let d3 = fixtures::d3();
        let p = ExtState::plain(d3.stable_index("p").unwrap(), 0);
        let q = ExtState::plain(d3.stable_index("q").unwrap(), 0);
        assert_eq!(oracle_eqlevel(&d3, &p, &q, 2).unwrap(), Level::Finite(0));
    }

    #[test]
    fn depth_guard() {
        let d = fixtures::d4();
        let p = ExtState::plain(0, 0);
        assert!(matches!(
            oracle_traces(&d, &p, 15),
            Err(Error::DepthTooLarge { .. })
        ));
        assert!(matches!(
            oracle_eqlevel(&d, &p, &p, 15),
            Err(Error::DepthTooLarge { .. })
        ));
    }
}
