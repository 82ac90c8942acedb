//! Bounded eqlevel computation by breadth-first search over the product of
//! the extended system with itself.
//!
//! Layers are expanded in the order of their lexicographically least word
//! and letters in alphabet order, so the first distinguishing pair found is
//! reached by the lexicographically least shortest witness.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Doca;
use crate::semantics::{mod_of, normalize, run, step_unchecked, ExtState};

pub const DEFAULT_STATE_CAP: usize = 10_000_000;

/// An eqlevel, or a lower bound when no witness fits within the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Finite(u64),
    AtLeast(u64),
}

impl Level {
    pub fn is_finite(&self) -> bool {
        matches!(self, Level::Finite(_))
    }

    pub fn finite(&self) -> Option<u64> {
        match self {
            Level::Finite(v) => Some(*v),
            Level::AtLeast(_) => None,
        }
    }

    /// The known value or lower bound.
    pub fn value(&self) -> u64 {
        match self {
            Level::Finite(v) | Level::AtLeast(v) => *v,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Finite(v) => write!(f, "{v}"),
            Level::AtLeast(b) => write!(f, ">={b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EqResult {
    pub level: Level,
    /// A shortest witness, present iff `level` is finite.
    pub witness: Option<Vec<usize>>,
    pub bound: u64,
    /// The reachable product was exhausted without finding a witness, so
    /// the states are equivalent regardless of the bound.
    pub exhausted: bool,
    /// Number of product states visited.
    pub explored: usize,
}

pub fn default_bound(k: usize) -> u64 {
    let k = k as u64;
    (4 * k * k * k).max(64)
}

fn require_stable(doca: &Doca, s: &ExtState) -> Result<ExtState> {
    let n = normalize(doca, s)?;
    debug_assert!(n.is_stable());
    Ok(n)
}

struct Node {
    pair: (ExtState, ExtState),
    parent: usize,
    letter: usize,
}

fn word_to(nodes: &[Node], mut i: usize) -> Vec<usize> {
    let mut w = Vec::new();
    while i != 0 {
        w.push(nodes[i].letter);
        i = nodes[i].parent;
    }
    w.reverse();
    w
}

pub fn eqlevel(doca: &Doca, s: &ExtState, t: &ExtState, bound: u64) -> Result<EqResult> {
    eqlevel_with_cap(doca, s, t, bound, DEFAULT_STATE_CAP)
}

pub fn eqlevel_with_cap(
    doca: &Doca,
    s: &ExtState,
    t: &ExtState,
    bound: u64,
    cap: usize,
) -> Result<EqResult> {
    if bound == 0 {
        return Err(Error::Invalid("bound must be at least 1".into()));
    }
    let s = require_stable(doca, s)?;
    let t = require_stable(doca, t)?;
    let n_letters = doca.alphabet().len();

    let mut seen: HashSet<(ExtState, ExtState)> = HashSet::new();
    let mut nodes = vec![Node {
        pair: (s.clone(), t.clone()),
        parent: 0,
        letter: 0,
    }];
    seen.insert((s.clone(), t.clone()));
    let mut frontier: Vec<usize> = if s == t { Vec::new() } else { vec![0] };

    for depth in 1..=bound {
        if frontier.is_empty() {
            return Ok(EqResult {
                level: Level::AtLeast(bound),
                witness: None,
                bound,
                exhausted: true,
                explored: nodes.len(),
            });
        }
        let mut next = Vec::new();
        for &i in &frontier {
            for a in 0..n_letters {
                let (x, y) = &nodes[i].pair;
                let ox = step_unchecked(doca, x, a)?;
                let oy = step_unchecked(doca, y, a)?;
                match (ox, oy) {
                    (None, None) => {}
                    (Some(ox), Some(oy)) => {
                        let pair = (ox.target, oy.target);
                        // Identical components can never be told apart.
                        if pair.0 == pair.1 || seen.contains(&pair) {
                            continue;
                        }
                        seen.insert(pair.clone());
                        nodes.push(Node {
                            pair,
                            parent: i,
                            letter: a,
                        });
                        next.push(nodes.len() - 1);
                        if nodes.len() > cap {
                            return Err(Error::BoundExceededMemory { cap });
                        }
                    }
                    _ => {
                        let mut w = word_to(&nodes, i);
                        w.push(a);
                        return Ok(EqResult {
                            level: Level::Finite(depth - 1),
                            witness: Some(w),
                            bound,
                            exhausted: false,
                            explored: nodes.len(),
                        });
                    }
                }
            }
        }
        frontier = next;
    }
    Ok(EqResult {
        level: Level::AtLeast(bound),
        witness: None,
        bound,
        exhausted: frontier.is_empty(),
        explored: nodes.len(),
    })
}

/// True iff `word` is enabled in exactly one of the two states.
pub fn verify_witness(doca: &Doca, s: &ExtState, t: &ExtState, word: &[usize]) -> Result<bool> {
    let s = require_stable(doca, s)?;
    let t = require_stable(doca, t)?;
    Ok(run(doca, &s, word)?.is_some() != run(doca, &t, word)?.is_some())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Inequivalent(EqResult),
    EquivalentUpTo { bound: u64, exhausted: bool },
}

/// Compares the zero configurations `p(0)` and `q(0)`; the bound defaults
/// to [`default_bound`].
pub fn check_equivalence(doca: &Doca, p: usize, q: usize, bound: Option<u64>) -> Result<Verdict> {
    let bound = bound.unwrap_or_else(|| default_bound(doca.k()));
    let r = eqlevel(doca, &ExtState::plain(p, 0), &ExtState::plain(q, 0), bound)?;
    Ok(if r.level.is_finite() {
        Verdict::Inequivalent(r)
    } else {
        Verdict::EquivalentUpTo {
            bound,
            exhausted: r.exhausted,
        }
    })
}

/// `IL(p(m))`: the eqlevel of `p(m)` and its Mod state.
pub fn independence_level(doca: &Doca, p: usize, m: u64, bound: u64) -> Result<EqResult> {
    let s = ExtState::plain(p, m);
    let t = mod_of(doca, &s)?;
    eqlevel(doca, &s, &t, bound)
}

/// The six eqlevels around a pair of states and their Mod states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EqlevelTuple {
    pub b: Level,
    pub l: Level,
    pub r: Level,
    pub o: Level,
    pub dl: Level,
    pub dr: Level,
}

/// False iff the least finite value occurs exactly once. An `AtLeast(B)`
/// entry exceeds every finite value found under the same bound.
pub fn min_attained_twice(values: &[Level]) -> bool {
    match values.iter().filter_map(Level::finite).min() {
        None => true,
        Some(v) => values.iter().filter(|x| **x == Level::Finite(v)).count() >= 2,
    }
}

impl EqlevelTuple {
    /// The four triangles and the rectangle of the square `s, t, Mod(t), Mod(s)`.
    pub fn cycles(&self) -> [Vec<Level>; 5] {
        [
            vec![self.b, self.l, self.dr],
            vec![self.dr, self.r, self.o],
            vec![self.b, self.dl, self.r],
            vec![self.l, self.dl, self.o],
            vec![self.b, self.l, self.r, self.o],
        ]
    }

    pub fn min_twice_holds(&self) -> bool {
        self.cycles().iter().all(|c| min_attained_twice(c))
    }
}

/// Eqlevel tuple of `s = p(m)` and `t`, which is either a configuration
/// `q(n)` or a Mod state `C`.
pub fn eqlevel_tuple(doca: &Doca, s: &ExtState, t: &ExtState, bound: u64) -> Result<EqlevelTuple> {
    if !matches!(s, ExtState::Plain { .. }) {
        return Err(Error::InvalidState(format!("left side must be a configuration, got {s:?}")));
    }
    let eq = |x: &ExtState, y: &ExtState| eqlevel(doca, x, y, bound).map(|r| r.level);
    let ms = mod_of(doca, s)?;
    match t {
        ExtState::Plain { .. } => {
            let mt = mod_of(doca, t)?;
            Ok(EqlevelTuple {
                b: eq(s, t)?,
                l: eq(s, &ms)?,
                r: eq(t, &mt)?,
                o: eq(&ms, &mt)?,
                dl: eq(s, &mt)?,
                dr: eq(t, &ms)?,
            })
        }
        ExtState::Mod { .. } => {
            let b = eq(s, t)?;
            let o = eq(&ms, t)?;
            Ok(EqlevelTuple {
                b,
                l: eq(s, &ms)?,
                r: Level::AtLeast(bound),
                o,
                dl: b,
                dr: o,
            })
        }
        other => Err(Error::InvalidState(format!(
            "right side must be a configuration or Mod state, got {other:?}"
        ))),
    }
}

/// Finite eqlevels of all pairs `p(0), q(0)` with `p < q` by name.
pub fn zero_eqlevels(doca: &Doca, bound: u64) -> Result<BTreeMap<(String, String), u64>> {
    let n = doca.stable_states().len();
    let mut out = BTreeMap::new();
    for p in 0..n {
        for q in p + 1..n {
            let r = eqlevel(doca, &ExtState::plain(p, 0), &ExtState::plain(q, 0), bound)?;
            if let Level::Finite(v) = r.level {
                out.insert(
                    (doca.stable_name(p).to_string(), doca.stable_name(q).to_string()),
                    v,
                );
            }
        }
    }
    Ok(out)
}
