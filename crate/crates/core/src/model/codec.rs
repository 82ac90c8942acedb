//! Line-oriented text format.
//!
//! ```text
//! doca
//! alphabet a b
//! stable p q
//! reset s per 2 goto 0 p 1 q
//! rule p a 0 -> p 1
//! ```
//!
//! Classical files start with `classical`, declare `states`, `initial` and
//! `accepting`, and may use the letter `eps` in rules.

use std::collections::{HashMap, HashSet};
use std::fmt::Write;

use super::{Automaton, ClassicalDoca, Doca, ResetSpec, RuleSpec, EPS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Tok<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn tokenize(line: &str, line_no: usize) -> Vec<Tok<'_>> {
    let content = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut toks = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in content.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                toks.push(Tok {
                    text: &content[s..i],
                    line: line_no,
                    column: content[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        toks.push(Tok {
            text: &content[s..],
            line: line_no,
            column: content[..s].chars().count() + 1,
        });
    }
    toks
}

fn err(tok: &Tok, message: impl Into<String>) -> Error {
    Error::Parse {
        line: tok.line,
        column: tok.column,
        message: message.into(),
    }
}

fn name<'a>(tok: &Tok<'a>) -> Result<&'a str> {
    if !tok.text.is_empty()
        && tok
            .text
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
    {
        Ok(tok.text)
    } else {
        Err(err(tok, format!("invalid name `{}`", tok.text)))
    }
}

fn number(tok: &Tok) -> Result<u32> {
    tok.text
        .parse()
        .map_err(|_| err(tok, format!("expected a nonnegative integer, found `{}`", tok.text)))
}

fn sign(tok: &Tok) -> Result<bool> {
    match tok.text {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(err(tok, format!("counter sign must be 0 or 1, found `{other}`"))),
    }
}

fn effect(tok: &Tok) -> Result<i8> {
    match tok.text {
        "-1" => Ok(-1),
        "0" => Ok(0),
        "1" | "+1" => Ok(1),
        other => Err(err(tok, format!("effect must be -1, 0 or +1, found `{other}`"))),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Doca,
    Classical,
}

struct RawRule<'a> {
    from: Tok<'a>,
    letter: Tok<'a>,
    positive: bool,
    to: Tok<'a>,
    effect: i8,
}

struct RawReset<'a> {
    name: Tok<'a>,
    period: u32,
    goto: Vec<(u32, Tok<'a>)>,
}

#[derive(Default)]
struct Raw<'a> {
    alphabet: Vec<Tok<'a>>,
    states: Vec<Tok<'a>>,
    resets: Vec<RawReset<'a>>,
    rules: Vec<RawRule<'a>>,
    initial: Option<Tok<'a>>,
    accepting: Vec<Tok<'a>>,
}

fn parse_raw(text: &str) -> Result<(Kind, Raw<'_>)> {
    let mut kind = None;
    let mut raw = Raw::default();
    for (i, line) in text.lines().enumerate() {
        let toks = tokenize(line, i + 1);
        let Some(head) = toks.first() else { continue };
        let rest = &toks[1..];
        let Some(k) = kind else {
            kind = Some(match head.text {
                "doca" => Kind::Doca,
                "classical" => Kind::Classical,
                other => {
                    return Err(err(head, format!("expected `doca` or `classical` header, found `{other}`")))
                }
            });
            if let Some(extra) = rest.first() {
                return Err(err(extra, "unexpected token after header"));
            }
            continue;
        };
        match (head.text, k) {
            ("alphabet", _) => {
                for t in rest {
                    name(t)?;
                    if t.text == EPS {
                        return Err(Error::ReservedToken(EPS.to_string()));
                    }
                    raw.alphabet.push(*t);
                }
            }
            ("stable", Kind::Doca) | ("states", Kind::Classical) => {
                for t in rest {
                    name(t)?;
                    raw.states.push(*t);
                }
            }
            ("reset", Kind::Doca) => {
                if rest.len() < 3 || rest[1].text != "per" {
                    return Err(err(head, "expected `reset NAME per N goto R Q ...`"));
                }
                name(&rest[0])?;
                let period = number(&rest[2])?;
                let mut goto = Vec::new();
                let tail = &rest[3..];
                if !tail.is_empty() {
                    if tail[0].text != "goto" {
                        return Err(err(&tail[0], "expected `goto`"));
                    }
                    let pairs = &tail[1..];
                    if pairs.len() % 2 != 0 {
                        return Err(err(pairs.last().unwrap(), "goto entries come in `residue state` pairs"));
                    }
                    for pair in pairs.chunks(2) {
                        name(&pair[1])?;
                        goto.push((number(&pair[0])?, pair[1]));
                    }
                }
                raw.resets.push(RawReset {
                    name: rest[0],
                    period,
                    goto,
                });
            }
            ("rule", _) => {
                if rest.len() != 6 || rest[3].text != "->" {
                    return Err(err(head, "expected `rule P LETTER SIGN -> Q EFFECT`"));
                }
                name(&rest[0])?;
                name(&rest[1])?;
                name(&rest[4])?;
                raw.rules.push(RawRule {
                    from: rest[0],
                    letter: rest[1],
                    positive: sign(&rest[2])?,
                    to: rest[4],
                    effect: effect(&rest[5])?,
                });
            }
            ("initial", Kind::Classical) => {
                if rest.len() != 1 {
                    return Err(err(head, "expected `initial STATE`"));
                }
                if raw.initial.is_some() {
                    return Err(err(head, "duplicate `initial` line"));
                }
                name(&rest[0])?;
                raw.initial = Some(rest[0]);
            }
            ("accepting", Kind::Classical) => {
                for t in rest {
                    name(t)?;
                    raw.accepting.push(*t);
                }
            }
            (other, _) => return Err(err(head, format!("unknown directive `{other}`"))),
        }
    }
    match kind {
        Some(k) => Ok((k, raw)),
        None => Err(Error::Parse {
            line: 1,
            column: 1,
            message: "empty input".into(),
        }),
    }
}

fn check_declared(
    tok: &Tok,
    declared: &HashSet<&str>,
    what: &str,
) -> Result<()> {
    if declared.contains(tok.text) {
        Ok(())
    } else {
        Err(err(tok, format!("undeclared {what} `{}`", tok.text)))
    }
}

fn build_doca(raw: Raw) -> Result<Doca> {
    let stable: HashSet<&str> = raw.states.iter().map(|t| t.text).collect();
    let resets: HashSet<&str> = raw.resets.iter().map(|r| r.name.text).collect();
    let letters: HashSet<&str> = raw.alphabet.iter().map(|t| t.text).collect();
    let all: HashSet<&str> = stable.union(&resets).copied().collect();
    for r in &raw.resets {
        for (_, q) in &r.goto {
            check_declared(q, &stable, "stable state")?;
        }
    }
    for r in &raw.rules {
        check_declared(&r.from, &stable, "stable state")?;
        check_declared(&r.letter, &letters, "letter")?;
        check_declared(&r.to, &all, "state")?;
    }
    Doca::from_names(
        raw.states.iter().map(|t| t.text.to_string()).collect(),
        raw.resets
            .iter()
            .map(|r| ResetSpec {
                name: r.name.text.to_string(),
                period: r.period,
                goto: r.goto.iter().map(|(c, q)| (*c, q.text.to_string())).collect(),
            })
            .collect(),
        raw.alphabet.iter().map(|t| t.text.to_string()).collect(),
        raw.rules.iter().map(rule_spec).collect(),
    )
}

fn rule_spec(r: &RawRule) -> RuleSpec {
    RuleSpec {
        from: r.from.text.to_string(),
        letter: r.letter.text.to_string(),
        positive: r.positive,
        to: r.to.text.to_string(),
        effect: r.effect,
    }
}

fn build_classical(raw: Raw) -> Result<ClassicalDoca> {
    let states: HashSet<&str> = raw.states.iter().map(|t| t.text).collect();
    let mut letters: HashSet<&str> = raw.alphabet.iter().map(|t| t.text).collect();
    letters.insert(EPS);
    for r in &raw.rules {
        check_declared(&r.from, &states, "state")?;
        check_declared(&r.letter, &letters, "letter")?;
        check_declared(&r.to, &states, "state")?;
    }
    for t in &raw.accepting {
        check_declared(t, &states, "state")?;
    }
    let initial = raw.initial.ok_or(Error::Parse {
        line: 1,
        column: 1,
        message: "missing `initial` line".into(),
    })?;
    check_declared(&initial, &states, "state")?;
    ClassicalDoca::from_names(
        raw.states.iter().map(|t| t.text.to_string()).collect(),
        raw.alphabet.iter().map(|t| t.text.to_string()).collect(),
        raw.rules.iter().map(rule_spec).collect(),
        initial.text,
        &raw.accepting.iter().map(|t| t.text.to_string()).collect::<Vec<_>>(),
    )
}

pub fn decode(text: &str) -> Result<Automaton> {
    let (kind, raw) = parse_raw(text)?;
    match kind {
        Kind::Doca => build_doca(raw).map(Automaton::Doca),
        Kind::Classical => build_classical(raw).map(Automaton::Classical),
    }
}

pub fn decode_doca(text: &str) -> Result<Doca> {
    match decode(text)? {
        Automaton::Doca(d) => Ok(d),
        Automaton::Classical(_) => Err(Error::Parse {
            line: 1,
            column: 1,
            message: "expected a `doca` file, found `classical`".into(),
        }),
    }
}

pub fn decode_classical(text: &str) -> Result<ClassicalDoca> {
    match decode(text)? {
        Automaton::Classical(c) => Ok(c),
        Automaton::Doca(_) => Err(Error::Parse {
            line: 1,
            column: 1,
            message: "expected a `classical` file, found `doca`".into(),
        }),
    }
}

fn fmt_effect(j: i8) -> &'static str {
    match j {
        -1 => "-1",
        0 => "0",
        _ => "1",
    }
}

fn line_of(head: &str, items: &[String]) -> String {
    let mut s = head.to_string();
    for i in items {
        s.push(' ');
        s.push_str(i);
    }
    s.push('\n');
    s
}

pub fn encode_doca(d: &Doca) -> String {
    let mut out = String::from("doca\n");
    out.push_str(&line_of("alphabet", d.alphabet()));
    out.push_str(&line_of("stable", d.stable_states()));
    for r in d.reset_specs() {
        let _ = write!(out, "reset {} per {}", r.name, r.period);
        if !r.goto.is_empty() {
            out.push_str(" goto");
            for (c, q) in &r.goto {
                let _ = write!(out, " {c} {q}");
            }
        }
        out.push('\n');
    }
    for r in d.rule_specs() {
        let _ = writeln!(
            out,
            "rule {} {} {} -> {} {}",
            r.from,
            r.letter,
            r.positive as u8,
            r.to,
            fmt_effect(r.effect)
        );
    }
    out
}

pub fn encode_classical(a: &ClassicalDoca) -> String {
    let mut out = String::from("classical\n");
    out.push_str(&line_of("alphabet", a.alphabet()));
    out.push_str(&line_of("states", a.states()));
    let _ = writeln!(out, "initial {}", a.states()[a.initial()]);
    out.push_str(&line_of("accepting", &a.accepting_names()));
    // ε-rules sort first; keep letter rules in name order after them.
    let mut rules = a.rule_specs();
    let order: HashMap<&str, usize> = a
        .states()
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    rules.sort_by(|x, y| {
        (order[x.from.as_str()], x.letter != EPS, &x.letter, x.positive)
            .cmp(&(order[y.from.as_str()], y.letter != EPS, &y.letter, y.positive))
    });
    for r in rules {
        let _ = writeln!(
            out,
            "rule {} {} {} -> {} {}",
            r.from,
            r.letter,
            r.positive as u8,
            r.to,
            fmt_effect(r.effect)
        );
    }
    out
}

pub fn encode(a: &Automaton) -> String {
    match a {
        Automaton::Doca(d) => encode_doca(d),
        Automaton::Classical(c) => encode_classical(c),
    }
}
