//! Automaton models: the reset-form doca and the classical ε-form doca.
//!
//! Both models keep their state and letter names sorted, so indices are
//! canonical: the encoder needs no extra normalization and "alphabet order"
//! (used for witness tie-breaking) is plain name order.

mod codec;
mod validate;

pub use codec::{decode, decode_classical, decode_doca, encode, encode_classical, encode_doca};
pub use validate::{validate, validate_classical, validate_doca, ValidationReport, Violation};

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Letter token reserved for ε in classical files.
pub const EPS: &str = "eps";

/// A control state of a reset-form doca.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Control {
    Stable(usize),
    Reset(usize),
}

/// A transition rule `(from, letter, sign, to, effect)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub from: usize,
    pub letter: usize,
    /// `false` for a zero rule, `true` for a positive rule.
    pub positive: bool,
    pub to: Control,
    pub effect: i8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResetState {
    pub name: String,
    pub period: u32,
    /// Raw `(residue, stable index)` entries as declared, sorted by residue.
    pub goto: Vec<(u32, usize)>,
    dense: Vec<Option<usize>>,
}

impl ResetState {
    /// Stable target for a residue, if declared.
    pub fn target(&self, residue: u32) -> Option<usize> {
        self.dense.get(residue as usize).copied().flatten()
    }
}

/// Name-level description of a reset state, used when building a [`Doca`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResetSpec {
    pub name: String,
    pub period: u32,
    pub goto: Vec<(u32, String)>,
}

/// Name-level description of a rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSpec {
    pub from: String,
    /// Letter name; `eps` denotes ε in classical automata.
    pub letter: String,
    pub positive: bool,
    pub to: String,
    pub effect: i8,
}

/// Reset-form deterministic one-counter automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Doca {
    stable: Vec<String>,
    reset: Vec<ResetState>,
    alphabet: Vec<String>,
    rules: Vec<Rule>,
    table: Vec<Option<u32>>,
}

fn sorted(mut v: Vec<String>) -> Vec<String> {
    v.sort();
    v
}

fn index_of(names: &[String]) -> HashMap<&str, usize> {
    let mut map = HashMap::new();
    for (i, n) in names.iter().enumerate() {
        map.entry(n.as_str()).or_insert(i);
    }
    map
}

fn check_effect(effect: i8, rule: &RuleSpec) -> Result<()> {
    if (-1..=1).contains(&effect) {
        Ok(())
    } else {
        Err(Error::UnshrunkInput(format!(
            "{} {} -> {} {}",
            rule.from, rule.letter, rule.to, effect
        )))
    }
}

impl Doca {
    /// Builds a doca from names. Fails only on references to undeclared
    /// names or effects outside {-1,0,+1}; all other model constraints are
    /// reported by [`validate`].
    pub fn from_names(
        stable: Vec<String>,
        resets: Vec<ResetSpec>,
        alphabet: Vec<String>,
        rules: Vec<RuleSpec>,
    ) -> Result<Doca> {
        let stable = sorted(stable);
        let alphabet = sorted(alphabet);
        let mut resets = resets;
        resets.sort_by(|a, b| a.name.cmp(&b.name));

        let st_idx = index_of(&stable);
        let letter_idx = index_of(&alphabet);
        let reset_names: Vec<String> = resets.iter().map(|r| r.name.clone()).collect();
        let res_idx = index_of(&reset_names);

        let lookup_stable = |name: &str| {
            st_idx.get(name).copied().ok_or_else(|| Error::UnknownName {
                kind: "stable state",
                name: name.to_string(),
            })
        };

        let mut reset = Vec::with_capacity(resets.len());
        for r in resets {
            let mut goto = Vec::with_capacity(r.goto.len());
            for (res, target) in &r.goto {
                goto.push((*res, lookup_stable(target)?));
            }
            goto.sort();
            let mut dense = vec![None; r.period as usize];
            for &(res, target) in &goto {
                if let Some(slot) = dense.get_mut(res as usize) {
                    if slot.is_none() {
                        *slot = Some(target);
                    }
                }
            }
            reset.push(ResetState {
                name: r.name,
                period: r.period,
                goto,
                dense,
            });
        }

        let mut out = Vec::with_capacity(rules.len());
        for r in &rules {
            check_effect(r.effect, r)?;
            let from = lookup_stable(&r.from)?;
            let letter = letter_idx
                .get(r.letter.as_str())
                .copied()
                .ok_or_else(|| Error::UnknownName {
                    kind: "letter",
                    name: r.letter.clone(),
                })?;
            let to = if let Some(&i) = st_idx.get(r.to.as_str()) {
                Control::Stable(i)
            } else if let Some(&i) = res_idx.get(r.to.as_str()) {
                Control::Reset(i)
            } else {
                return Err(Error::UnknownName {
                    kind: "state",
                    name: r.to.clone(),
                });
            };
            out.push(Rule {
                from,
                letter,
                positive: r.positive,
                to,
                effect: r.effect,
            });
        }
        out.sort();

        let width = alphabet.len() * 2;
        let mut table = vec![None; stable.len() * width];
        for (i, r) in out.iter().enumerate() {
            let slot = &mut table[r.from * width + r.letter * 2 + r.positive as usize];
            if slot.is_none() {
                *slot = Some(i as u32);
            }
        }

        Ok(Doca {
            stable,
            reset,
            alphabet,
            rules: out,
            table,
        })
    }

    pub fn stable_states(&self) -> &[String] {
        &self.stable
    }

    pub fn reset_states(&self) -> &[ResetState] {
        &self.reset
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Number of control states, `|Q_St| + |Q_Res|`.
    pub fn k(&self) -> usize {
        self.stable.len() + self.reset.len()
    }

    pub fn stable_index(&self, name: &str) -> Option<usize> {
        self.stable.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    pub fn reset_index(&self, name: &str) -> Option<usize> {
        self.reset.binary_search_by(|r| r.name.as_str().cmp(name)).ok()
    }

    pub fn letter_index(&self, name: &str) -> Option<usize> {
        self.alphabet.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    pub fn stable_name(&self, i: usize) -> &str {
        &self.stable[i]
    }

    pub fn reset_name(&self, i: usize) -> &str {
        &self.reset[i].name
    }

    pub fn control_name(&self, c: Control) -> &str {
        match c {
            Control::Stable(i) => self.stable_name(i),
            Control::Reset(i) => self.reset_name(i),
        }
    }

    pub fn letter_name(&self, a: usize) -> &str {
        &self.alphabet[a]
    }

    /// The rule for `(p, a, c)`, if any. With duplicate keys (an invalid
    /// doca) the first rule in canonical order wins.
    pub fn rule(&self, p: usize, a: usize, positive: bool) -> Option<&Rule> {
        let width = self.alphabet.len() * 2;
        self.table
            .get(p * width + a * 2 + positive as usize)
            .copied()
            .flatten()
            .map(|i| &self.rules[i as usize])
    }

    /// Renders a word with this doca's letter names.
    pub fn word_to_string(&self, word: &[usize]) -> String {
        let names: Vec<&str> = word.iter().map(|&a| self.letter_name(a)).collect();
        join_word(&names, self.alphabet.iter().all(|l| l.chars().count() == 1))
    }

    /// Parses a word: whitespace-, dot- or comma-separated letter names, or a
    /// plain string of characters when every letter is a single character.
    pub fn parse_word(&self, text: &str) -> Result<Vec<usize>> {
        parse_word_with(text, &self.alphabet, |n| self.letter_index(n))
    }

    /// Name-level rule list, in canonical order.
    pub fn rule_specs(&self) -> Vec<RuleSpec> {
        self.rules
            .iter()
            .map(|r| RuleSpec {
                from: self.stable[r.from].clone(),
                letter: self.alphabet[r.letter].clone(),
                positive: r.positive,
                to: self.control_name(r.to).to_string(),
                effect: r.effect,
            })
            .collect()
    }

    pub fn reset_specs(&self) -> Vec<ResetSpec> {
        self.reset
            .iter()
            .map(|r| ResetSpec {
                name: r.name.clone(),
                period: r.period,
                goto: r
                    .goto
                    .iter()
                    .map(|&(c, q)| (c, self.stable[q].clone()))
                    .collect(),
            })
            .collect()
    }
}

pub(crate) fn join_word(names: &[&str], single_chars: bool) -> String {
    if single_chars {
        names.concat()
    } else {
        names.join(" ")
    }
}

pub(crate) fn parse_word_with(
    text: &str,
    alphabet: &[String],
    lookup: impl Fn(&str) -> Option<usize>,
) -> Result<Vec<usize>> {
    let text = text.trim();
    if text.is_empty() || text == EPS {
        return Ok(Vec::new());
    }
    let tokens: Vec<&str> = text
        .split(|c: char| c.is_whitespace() || c == '.' || c == ',')
        .filter(|t| !t.is_empty())
        .collect();
    let single = alphabet.iter().all(|l| l.chars().count() == 1);
    let mut word = Vec::new();
    for tok in tokens {
        if let Some(a) = lookup(tok) {
            word.push(a);
        } else if single {
            for ch in tok.chars() {
                let s = ch.to_string();
                word.push(lookup(&s).ok_or(Error::UnknownName {
                    kind: "letter",
                    name: s,
                })?);
            }
        } else {
            return Err(Error::UnknownName {
                kind: "letter",
                name: tok.to_string(),
            });
        }
    }
    Ok(word)
}

/// Convenience builder for [`Doca`] used by generators, transforms and tests.
#[derive(Debug, Clone, Default)]
pub struct DocaBuilder {
    stable: Vec<String>,
    resets: Vec<ResetSpec>,
    alphabet: Vec<String>,
    rules: Vec<RuleSpec>,
}

impl DocaBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn letters<I, S>(mut self, letters: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.alphabet.extend(letters.into_iter().map(Into::into));
        self
    }

    pub fn stable<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.stable.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn reset<S: Into<String>>(mut self, name: S, period: u32, goto: &[(u32, &str)]) -> Self {
        self.resets.push(ResetSpec {
            name: name.into(),
            period,
            goto: goto.iter().map(|&(c, q)| (c, q.to_string())).collect(),
        });
        self
    }

    /// Adds `(from, letter, sign, to, effect)`; `sign` is 0 or 1.
    pub fn rule(mut self, from: &str, letter: &str, sign: u8, to: &str, effect: i8) -> Self {
        self.rules.push(RuleSpec {
            from: from.to_string(),
            letter: letter.to_string(),
            positive: sign != 0,
            to: to.to_string(),
            effect,
        });
        self
    }

    pub fn push_rule(&mut self, rule: RuleSpec) {
        self.rules.push(rule);
    }

    pub fn push_reset(&mut self, reset: ResetSpec) {
        self.resets.push(reset);
    }

    pub fn push_stable(&mut self, name: impl Into<String>) {
        self.stable.push(name.into());
    }

    pub fn build(self) -> Result<Doca> {
        Doca::from_names(self.stable, self.resets, self.alphabet, self.rules)
    }
}

/// A classical rule; `letter == None` is an ε-rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassicalRule {
    pub from: usize,
    pub letter: Option<usize>,
    pub positive: bool,
    pub to: usize,
    pub effect: i8,
}

/// Classical doca `(Q, Σ, δ, q0, F)` with ε-rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalDoca {
    states: Vec<String>,
    alphabet: Vec<String>,
    rules: Vec<ClassicalRule>,
    initial: usize,
    accepting: Vec<bool>,
    letter_table: Vec<Option<u32>>,
    eps_table: Vec<Option<u32>>,
}

impl ClassicalDoca {
    pub fn from_names(
        states: Vec<String>,
        alphabet: Vec<String>,
        rules: Vec<RuleSpec>,
        initial: &str,
        accepting: &[String],
    ) -> Result<ClassicalDoca> {
        let states = sorted(states);
        let alphabet = sorted(alphabet);
        let st_idx = index_of(&states);
        let letter_idx = index_of(&alphabet);
        let state = |name: &str| {
            st_idx.get(name).copied().ok_or_else(|| Error::UnknownName {
                kind: "state",
                name: name.to_string(),
            })
        };
        let mut out = Vec::with_capacity(rules.len());
        for r in &rules {
            check_effect(r.effect, r)?;
            let letter = if r.letter == EPS {
                None
            } else {
                Some(
                    letter_idx
                        .get(r.letter.as_str())
                        .copied()
                        .ok_or_else(|| Error::UnknownName {
                            kind: "letter",
                            name: r.letter.clone(),
                        })?,
                )
            };
            out.push(ClassicalRule {
                from: state(&r.from)?,
                letter,
                positive: r.positive,
                to: state(&r.to)?,
                effect: r.effect,
            });
        }
        out.sort();
        let initial = state(initial)?;
        let mut acc = vec![false; states.len()];
        for a in accepting {
            acc[state(a)?] = true;
        }

        let width = alphabet.len() * 2;
        let mut letter_table = vec![None; states.len() * width];
        let mut eps_table = vec![None; states.len() * 2];
        for (i, r) in out.iter().enumerate() {
            let slot = match r.letter {
                Some(a) => &mut letter_table[r.from * width + a * 2 + r.positive as usize],
                None => &mut eps_table[r.from * 2 + r.positive as usize],
            };
            if slot.is_none() {
                *slot = Some(i as u32);
            }
        }
        Ok(ClassicalDoca {
            states,
            alphabet,
            rules: out,
            initial,
            accepting: acc,
            letter_table,
            eps_table,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn rules(&self) -> &[ClassicalRule] {
        &self.rules
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn accepting_names(&self) -> Vec<String> {
        (0..self.states.len())
            .filter(|&q| self.accepting[q])
            .map(|q| self.states[q].clone())
            .collect()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    pub fn letter_index(&self, name: &str) -> Option<usize> {
        self.alphabet.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    pub fn letter_rule(&self, p: usize, a: usize, positive: bool) -> Option<&ClassicalRule> {
        let width = self.alphabet.len() * 2;
        self.letter_table[p * width + a * 2 + positive as usize].map(|i| &self.rules[i as usize])
    }

    pub fn eps_rule(&self, p: usize, positive: bool) -> Option<&ClassicalRule> {
        self.eps_table[p * 2 + positive as usize].map(|i| &self.rules[i as usize])
    }

    pub fn has_eps_rules(&self) -> bool {
        self.rules.iter().any(|r| r.letter.is_none())
    }

    pub fn rule_specs(&self) -> Vec<RuleSpec> {
        self.rules
            .iter()
            .map(|r| RuleSpec {
                from: self.states[r.from].clone(),
                letter: r
                    .letter
                    .map_or_else(|| EPS.to_string(), |a| self.alphabet[a].clone()),
                positive: r.positive,
                to: self.states[r.to].clone(),
                effect: r.effect,
            })
            .collect()
    }

    pub fn word_to_string(&self, word: &[usize]) -> String {
        let names: Vec<&str> = word.iter().map(|&a| self.alphabet[a].as_str()).collect();
        join_word(&names, self.alphabet.iter().all(|l| l.chars().count() == 1))
    }

    pub fn parse_word(&self, text: &str) -> Result<Vec<usize>> {
        parse_word_with(text, &self.alphabet, |n| self.letter_index(n))
    }
}

/// Either automaton model, as produced by [`decode`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Automaton {
    Doca(Doca),
    Classical(ClassicalDoca),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_sorts_names_and_counts_states() {
        let d = DocaBuilder::new()
            .letters(["b", "a"])
            .stable(["q", "p"])
            .reset("s", 2, &[(0, "p"), (1, "q")])
            .rule("q", "b", 1, "q", -1)
            .rule("p", "a", 0, "s", 1)
            .build()
            .unwrap();
        assert_eq!(d.stable_states(), ["p", "q"]);
        assert_eq!(d.alphabet(), ["a", "b"]);
        assert_eq!(d.k(), 3);
        let r = d.rule(0, 0, false).unwrap();
        assert_eq!(r.to, Control::Reset(0));
        assert_eq!(d.reset_states()[0].target(1), Some(1));
        assert!(d.rule(0, 0, true).is_none());
    }

    #[test]
    fn undeclared_names_are_rejected() {
        let err = DocaBuilder::new()
            .letters(["a"])
            .stable(["p"])
            .rule("p", "a", 0, "z", 0)
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::UnknownName { .. }));
    }

    #[test]
    fn word_rendering_and_parsing() {
        let d = DocaBuilder::new()
            .letters(["a", "b1", "t"])
            .stable(["p"])
            .build()
            .unwrap();
        assert_eq!(d.word_to_string(&[0, 1, 2]), "a b1 t");
        assert_eq!(d.parse_word("a b1 t").unwrap(), vec![0, 1, 2]);
        assert_eq!(d.parse_word("a.b1.t").unwrap(), vec![0, 1, 2]);
        assert!(d.parse_word("ab1t").is_err());

        let d = DocaBuilder::new().letters(["a", "b"]).stable(["p"]).build().unwrap();
        assert_eq!(d.parse_word("aab").unwrap(), vec![0, 0, 1]);
        assert_eq!(d.word_to_string(&[0, 0, 1]), "aab");
        assert_eq!(d.parse_word("").unwrap(), Vec::<usize>::new());
    }
}
