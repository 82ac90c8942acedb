//! The det-LTS of a doca and its extension with Mod states.
//!
//! Mod states (`ExtState::Mod`) keep only the residues of the counter
//! modulo each reset period. They are built on demand; the full set of Mod
//! states is never enumerated.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Control, Doca};

/// A state of the extended transition system.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtState {
    /// Stable configuration `p(m)`.
    Plain { state: usize, counter: u64 },
    /// Reset configuration `s(m)` (unstable).
    ResetCfg { state: usize, counter: u64 },
    /// Special-mode state `(p, (c_s)_s)`, residues indexed by reset state.
    Mod { state: usize, residues: Vec<u32> },
    /// Fixed-residue reset state `s[c]` (unstable).
    FixRes { state: usize, residue: u32 },
}

impl ExtState {
    pub fn plain(state: usize, counter: u64) -> Self {
        ExtState::Plain { state, counter }
    }

    pub fn is_stable(&self) -> bool {
        matches!(self, ExtState::Plain { .. } | ExtState::Mod { .. })
    }

    pub fn counter(&self) -> Option<u64> {
        match self {
            ExtState::Plain { counter, .. } | ExtState::ResetCfg { counter, .. } => Some(*counter),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepKind {
    Simple,
    /// A letter move into an unstable state followed by its ε-move.
    Combined,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StepOutcome {
    pub target: ExtState,
    pub kind: StepKind,
}

fn reduce(value: i64, period: u32) -> u32 {
    value.rem_euclid(period as i64) as u32
}

fn goto(doca: &Doca, s: usize, residue: u32) -> Result<usize> {
    let r = &doca.reset_states()[s];
    r.target(residue).ok_or_else(|| {
        Error::InvalidState(format!("reset `{}` has no goto entry for residue {}", r.name, residue))
    })
}

fn check(doca: &Doca, s: &ExtState) -> Result<()> {
    let ok = match s {
        ExtState::Plain { state, .. } => *state < doca.stable_states().len(),
        ExtState::ResetCfg { state, .. } => *state < doca.reset_states().len(),
        ExtState::Mod { state, residues } => {
            *state < doca.stable_states().len()
                && residues.len() == doca.reset_states().len()
                && residues
                    .iter()
                    .zip(doca.reset_states())
                    .all(|(&c, r)| c < r.period)
        }
        ExtState::FixRes { state, residue } => doca
            .reset_states()
            .get(*state)
            .is_some_and(|r| *residue < r.period),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidState(format!("{s:?}")))
    }
}

/// Applies the ε-move of an unstable state; stable states are returned as is.
pub fn normalize(doca: &Doca, s: &ExtState) -> Result<ExtState> {
    check(doca, s)?;
    Ok(match s {
        ExtState::ResetCfg { state, counter } => {
            let per = doca.reset_states()[*state].period as u64;
            ExtState::plain(goto(doca, *state, (counter % per) as u32)?, 0)
        }
        ExtState::FixRes { state, residue } => ExtState::plain(goto(doca, *state, *residue)?, 0),
        stable => stable.clone(),
    })
}

/// One letter step from a stable state, with the ε-move of an unstable
/// target applied.
pub fn step(doca: &Doca, s: &ExtState, a: usize) -> Result<Option<StepOutcome>> {
    check(doca, s)?;
    if a >= doca.alphabet().len() {
        return Err(Error::InvalidState(format!("letter index {a}")));
    }
    step_unchecked(doca, s, a)
}

pub(crate) fn step_unchecked(doca: &Doca, s: &ExtState, a: usize) -> Result<Option<StepOutcome>> {
    match s {
        ExtState::Plain { state, counter } => {
            let Some(rule) = doca.rule(*state, a, *counter > 0) else {
                return Ok(None);
            };
            let next = if rule.effect >= 0 {
                counter
                    .checked_add(rule.effect as u64)
                    .ok_or(Error::CounterOverflow)?
            } else {
                counter - 1
            };
            Ok(Some(match rule.to {
                Control::Stable(q) => StepOutcome {
                    target: ExtState::plain(q, next),
                    kind: StepKind::Simple,
                },
                Control::Reset(r) => {
                    let per = doca.reset_states()[r].period as u64;
                    StepOutcome {
                        target: ExtState::plain(goto(doca, r, (next % per) as u32)?, 0),
                        kind: StepKind::Combined,
                    }
                }
            }))
        }
        ExtState::Mod { state, residues } => {
            let Some(rule) = doca.rule(*state, a, true) else {
                return Ok(None);
            };
            let j = rule.effect as i64;
            Ok(Some(match rule.to {
                Control::Stable(q) => StepOutcome {
                    target: ExtState::Mod {
                        state: q,
                        residues: residues
                            .iter()
                            .zip(doca.reset_states())
                            .map(|(&c, r)| reduce(c as i64 + j, r.period))
                            .collect(),
                    },
                    kind: StepKind::Simple,
                },
                Control::Reset(r) => {
                    let c = reduce(residues[r] as i64 + j, doca.reset_states()[r].period);
                    StepOutcome {
                        target: ExtState::plain(goto(doca, r, c)?, 0),
                        kind: StepKind::Combined,
                    }
                }
            }))
        }
        unstable => Err(Error::InvalidState(format!(
            "letter step from unstable state {unstable:?}"
        ))),
    }
}

/// Runs a word from a stable state; `None` as soon as a letter is disabled.
pub fn run(doca: &Doca, s: &ExtState, word: &[usize]) -> Result<Option<ExtState>> {
    check(doca, s)?;
    let mut cur = s.clone();
    for &a in word {
        match step(doca, &cur, a)? {
            Some(o) => cur = o.target,
            None => return Ok(None),
        }
    }
    Ok(Some(cur))
}

/// Letters enabled in a stable state, in alphabet order.
pub fn enabled(doca: &Doca, s: &ExtState) -> Result<Vec<usize>> {
    check(doca, s)?;
    let mut out = Vec::new();
    for a in 0..doca.alphabet().len() {
        if step_unchecked(doca, s, a)?.is_some() {
            out.push(a);
        }
    }
    Ok(out)
}

/// The Mod mapping: `p(m) ↦ (p, (m mod per_s)_s)`, `s(m) ↦ s[m mod per_s]`.
pub fn mod_of(doca: &Doca, cfg: &ExtState) -> Result<ExtState> {
    check(doca, cfg)?;
    match cfg {
        ExtState::Plain { state, counter } => Ok(ExtState::Mod {
            state: *state,
            residues: doca
                .reset_states()
                .iter()
                .map(|r| (counter % r.period as u64) as u32)
                .collect(),
        }),
        ExtState::ResetCfg { state, counter } => Ok(ExtState::FixRes {
            state: *state,
            residue: (counter % doca.reset_states()[*state].period as u64) as u32,
        }),
        other => Err(Error::InvalidState(format!(
            "Mod is defined on configurations only, got {other:?}"
        ))),
    }
}

/// Least common multiple of all reset periods; 1 without reset states.
pub fn delta_lcm(doca: &Doca) -> u64 {
    lcm_of(doca.reset_states().iter().map(|r| r.period as u64))
}

pub fn lcm_of(values: impl IntoIterator<Item = u64>) -> u64 {
    values
        .into_iter()
        .filter(|&v| v > 0)
        .fold(1, num_integer::lcm)
}

/// Displays a state with the doca's names: `p(3)`, `s(5)`, `Mod(p;1,0)`, `s[1]`.
pub struct Show<'a>(pub &'a Doca, pub &'a ExtState);

impl fmt::Display for Show<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.0;
        match self.1 {
            ExtState::Plain { state, counter } => write!(f, "{}({})", d.stable_name(*state), counter),
            ExtState::ResetCfg { state, counter } => write!(f, "{}({})", d.reset_name(*state), counter),
            ExtState::Mod { state, residues } => {
                write!(f, "Mod({}", d.stable_name(*state))?;
                for (i, c) in residues.iter().enumerate() {
                    write!(f, "{}{}", if i == 0 { ";" } else { "," }, c)?;
                }
                write!(f, ")")
            }
            ExtState::FixRes { state, residue } => write!(f, "{}[{}]", d.reset_name(*state), residue),
        }
    }
}

/// Parses `p`, `p(3)`, `s(5)`, `Mod(p(3))`, `Mod(p;1,0)` or `s[1]`.
pub fn parse_state(doca: &Doca, text: &str) -> Result<ExtState> {
    let t = text.trim();
    let bad = || Error::InvalidState(format!("cannot parse state `{text}`"));
    if let Some(inner) = t.strip_prefix("Mod(").and_then(|r| r.strip_suffix(')')) {
        if let Some((p, res)) = inner.split_once(';') {
            let state = doca.stable_index(p.trim()).ok_or_else(bad)?;
            let residues = res
                .split(',')
                .filter(|x| !x.trim().is_empty())
                .map(|x| x.trim().parse::<u32>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            let s = ExtState::Mod { state, residues };
            check(doca, &s)?;
            return Ok(s);
        }
        let cfg = parse_state(doca, inner)?;
        return mod_of(doca, &cfg);
    }
    if let Some(inner) = t.strip_suffix(']') {
        let (s, c) = inner.split_once('[').ok_or_else(bad)?;
        let state = doca.reset_index(s.trim()).ok_or_else(bad)?;
        let residue = c.trim().parse().map_err(|_| bad())?;
        let s = ExtState::FixRes { state, residue };
        check(doca, &s)?;
        return Ok(s);
    }
    let (name, counter) = match t.strip_suffix(')') {
        Some(inner) => {
            let (n, c) = inner.split_once('(').ok_or_else(bad)?;
            (n.trim(), c.trim().parse::<u64>().map_err(|_| bad())?)
        }
        None => (t, 0),
    };
    if let Some(state) = doca.stable_index(name) {
        Ok(ExtState::plain(state, counter))
    } else if let Some(state) = doca.reset_index(name) {
        Ok(ExtState::ResetCfg { state, counter })
    } else {
        Err(Error::UnknownName {
            kind: "state",
            name: name.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn plain_steps() {
        let d1 = fixtures::d1();
        let p = d1.stable_index("p").unwrap();
        let a = d1.letter_index("a").unwrap();
        let out = step(&d1, &ExtState::plain(p, 0), a).unwrap().unwrap();
        assert_eq!(out.target, ExtState::plain(p, 1));
        assert_eq!(out.kind, StepKind::Simple);
    }

    #[test]
    fn reset_step_uses_goto_of_residue() {
        let d3 = fixtures::d3();
        let p = d3.stable_index("p").unwrap();
        let q = d3.stable_index("q").unwrap();
        let b = d3.letter_index("b").unwrap();
        let out = step(&d3, &ExtState::plain(p, 5), b).unwrap().unwrap();
        assert_eq!(out.target, ExtState::plain(q, 0));
        assert_eq!(out.kind, StepKind::Combined);
        let out = step(&d3, &ExtState::plain(p, 4), b).unwrap().unwrap();
        assert_eq!(out.target, ExtState::plain(p, 0));
    }

    #[test]
    fn mod_states_never_use_zero_rules() {
        let d4 = fixtures::d4();
        let p = d4.stable_index("p").unwrap();
        let b = d4.letter_index("b").unwrap();
        let m = ExtState::Mod {
            state: p,
            residues: vec![],
        };
        assert_eq!(step(&d4, &m, b).unwrap(), None);
        assert_eq!(enabled(&d4, &m).unwrap(), vec![d4.letter_index("a").unwrap()]);
        assert_eq!(
            enabled(&d4, &ExtState::plain(p, 3)).unwrap(),
            vec![d4.letter_index("a").unwrap()]
        );
    }

    #[test]
    fn runs() {
        let d1 = fixtures::d1();
        let p = d1.stable_index("p").unwrap();
        let q = d1.stable_index("q").unwrap();
        let s = ExtState::plain(p, 0);
        let w = d1.parse_word("aab").unwrap();
        assert_eq!(run(&d1, &s, &w).unwrap(), Some(ExtState::plain(q, 1)));
        assert_eq!(run(&d1, &s, &d1.parse_word("b").unwrap()).unwrap(), None);
        assert_eq!(run(&d1, &s, &[]).unwrap(), Some(s));
    }

    #[test]
    fn rule_less_state_enables_nothing() {
        let d2 = fixtures::d2();
        let r = d2.stable_index("r").unwrap();
        assert!(enabled(&d2, &ExtState::plain(r, 0)).unwrap().is_empty());
    }

    #[test]
    fn mod_mapping() {
        let d4 = fixtures::d4();
        let p = d4.stable_index("p").unwrap();
        assert_eq!(
            mod_of(&d4, &ExtState::plain(p, 17)).unwrap(),
            ExtState::Mod {
                state: p,
                residues: vec![]
            }
        );
        let d3 = fixtures::d3();
        let s = d3.reset_index("s").unwrap();
        assert_eq!(
            mod_of(&d3, &ExtState::ResetCfg { state: s, counter: 5 }).unwrap(),
            ExtState::FixRes { state: s, residue: 1 }
        );
    }

    #[test]
    fn mod_mapping_with_four_periods() {
        let d = fixtures::four_periods();
        let p = d.stable_index("p").unwrap();
        let ExtState::Mod { residues, .. } = mod_of(&d, &ExtState::plain(p, 10)).unwrap() else {
            panic!()
        };
        assert_eq!(residues, vec![3, 2, 4, 2]);
        assert_eq!(delta_lcm(&d), 168);
    }

    #[test]
    fn lcm_edge_cases() {
        assert_eq!(delta_lcm(&fixtures::d4()), 1);
        let d = crate::model::DocaBuilder::new()
            .letters(["a"])
            .stable(["p", "q", "r", "u", "v"])
            .reset("s", 5, &[(0, "p"), (1, "p"), (2, "p"), (3, "p"), (4, "p")])
            .build()
            .unwrap();
        assert_eq!(delta_lcm(&d), 5);
    }

    #[test]
    fn invalid_states_are_rejected() {
        let d1 = fixtures::d1();
        assert!(step(&d1, &ExtState::plain(9, 0), 0).is_err());
        assert!(step(&d1, &ExtState::FixRes { state: 0, residue: 0 }, 0).is_err());
    }

    #[test]
    fn state_syntax() {
        let d3 = fixtures::d3();
        let p = d3.stable_index("p").unwrap();
        assert_eq!(parse_state(&d3, "p(4)").unwrap(), ExtState::plain(p, 4));
        assert_eq!(parse_state(&d3, "p").unwrap(), ExtState::plain(p, 0));
        let m = parse_state(&d3, "Mod(p(5))").unwrap();
        assert_eq!(m, ExtState::Mod { state: p, residues: vec![1] });
        assert_eq!(parse_state(&d3, &Show(&d3, &m).to_string()).unwrap(), m);
        assert_eq!(
            parse_state(&d3, "s[1]").unwrap(),
            ExtState::FixRes { state: 0, residue: 1 }
        );
        assert!(parse_state(&d3, "zz").is_err());
    }
}
