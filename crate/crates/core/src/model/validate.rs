use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Automaton, ClassicalDoca, Control, Doca, EPS};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: String,
    pub location: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport {
            ok: violations.is_empty(),
            violations,
        }
    }

    pub fn has(&self, code: &str) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }
}

fn push(out: &mut Vec<Violation>, code: &str, location: String) {
    out.push(Violation {
        code: code.to_string(),
        location,
    });
}

fn valid_token(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn check_names<'a>(
    out: &mut Vec<Violation>,
    kind: &str,
    names: impl Iterator<Item = &'a String>,
) -> BTreeSet<&'a str> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !valid_token(n) {
            push(out, "invalid-name", format!("{kind} `{n}`"));
        }
        if !seen.insert(n.as_str()) {
            push(out, &format!("duplicate-{kind}"), format!("`{n}`"));
        }
    }
    seen
}

pub fn validate(automaton: &Automaton) -> ValidationReport {
    match automaton {
        Automaton::Doca(d) => validate_doca(d),
        Automaton::Classical(c) => validate_classical(c),
    }
}

pub fn validate_doca(d: &Doca) -> ValidationReport {
    let mut out = Vec::new();
    let stable = check_names(&mut out, "state", d.stable_states().iter());
    let reset_names: Vec<String> = d.reset_states().iter().map(|r| r.name.clone()).collect();
    let resets = check_names(&mut out, "state", reset_names.iter());
    for name in stable.intersection(&resets) {
        push(&mut out, "state-overlap", format!("`{name}` is both stable and reset"));
    }
    let letters = check_names(&mut out, "letter", d.alphabet().iter());
    if letters.contains(EPS) {
        push(&mut out, "reserved-token", format!("letter `{EPS}`"));
    }
    if d.stable_states().is_empty() {
        push(&mut out, "no-stable-states", "doca".to_string());
    }

    let mut keys: BTreeMap<(usize, usize, bool), usize> = BTreeMap::new();
    for r in d.rules() {
        let loc = || {
            format!(
                "rule {} {} {} -> {} {}",
                d.stable_name(r.from),
                d.letter_name(r.letter),
                r.positive as u8,
                d.control_name(r.to),
                r.effect
            )
        };
        *keys.entry((r.from, r.letter, r.positive)).or_default() += 1;
        if !r.positive && r.effect == -1 {
            push(&mut out, "zero-decrement", loc());
        }
        if !(-1..=1).contains(&r.effect) {
            push(&mut out, "effect-out-of-range", loc());
        }
        if let Control::Reset(i) = r.to {
            if i >= d.reset_states().len() {
                push(&mut out, "unknown-state", loc());
            }
        }
    }
    for ((p, a, c), n) in keys {
        if n > 1 {
            push(
                &mut out,
                "nondeterministic-rule",
                format!("{} rules for ({}, {}, {})", n, d.stable_name(p), d.letter_name(a), c as u8),
            );
        }
    }

    let n_stable = d.stable_states().len() as u32;
    for r in d.reset_states() {
        if r.period < 1 || r.period > n_stable {
            push(
                &mut out,
                "period-out-of-range",
                format!("reset `{}` has period {} (allowed 1..={})", r.name, r.period, n_stable),
            );
        }
        let mut seen = BTreeSet::new();
        for &(c, _) in &r.goto {
            if c >= r.period {
                push(
                    &mut out,
                    "goto-residue-out-of-range",
                    format!("reset `{}` residue {}", r.name, c),
                );
            }
            if !seen.insert(c) {
                push(
                    &mut out,
                    "goto-duplicate",
                    format!("reset `{}` residue {}", r.name, c),
                );
            }
        }
        for c in 0..r.period {
            if r.target(c).is_none() {
                push(
                    &mut out,
                    "goto-not-total",
                    format!("reset `{}` residue {}", r.name, c),
                );
            }
        }
    }
    ValidationReport::from_violations(out)
}

pub fn validate_classical(a: &ClassicalDoca) -> ValidationReport {
    let mut out = Vec::new();
    check_names(&mut out, "state", a.states().iter());
    let letters = check_names(&mut out, "letter", a.alphabet().iter());
    if letters.contains(EPS) {
        push(&mut out, "reserved-token", format!("letter `{EPS}`"));
    }

    let mut keys: BTreeMap<(usize, Option<usize>, bool), usize> = BTreeMap::new();
    let mut letter_keys: BTreeSet<(usize, bool)> = BTreeSet::new();
    for r in a.rules() {
        *keys.entry((r.from, r.letter, r.positive)).or_default() += 1;
        if r.letter.is_some() {
            letter_keys.insert((r.from, r.positive));
        }
        if !r.positive && r.effect == -1 {
            push(
                &mut out,
                "zero-decrement",
                format!(
                    "rule {} {} 0 -> {} -1",
                    a.states()[r.from],
                    r.letter.map_or(EPS, |l| a.alphabet()[l].as_str()),
                    a.states()[r.to]
                ),
            );
        }
    }
    for ((p, l, c), n) in &keys {
        let letter = l.map_or(EPS, |l| a.alphabet()[l].as_str());
        if *n > 1 {
            push(
                &mut out,
                "nondeterministic-rule",
                format!("{} rules for ({}, {}, {})", n, a.states()[*p], letter, *c as u8),
            );
        }
        if l.is_none() && letter_keys.contains(&(*p, *c)) {
            push(
                &mut out,
                "eps-conflict",
                format!("state `{}` has both ε- and letter rules for sign {}", a.states()[*p], *c as u8),
            );
        }
    }
    ValidationReport::from_violations(out)
}
