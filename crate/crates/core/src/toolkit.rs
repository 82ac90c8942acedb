//! Command-line surface and report format.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{check_certificate, default_cap, is_regular, Regularity};
use crate::equivalence::{
    default_bound, eqlevel_tuple, eqlevel_with_cap, independence_level, verify_witness, zero_eqlevels,
    Level, DEFAULT_STATE_CAP,
};
use crate::error::{Error, Result};
use crate::generators::{generate, GenSpec, RandomSpec};
use crate::model::{
    decode, encode_doca, validate, validate_classical, validate_doca, Automaton, ClassicalDoca, Doca,
};
use crate::oracle::{oracle_eqlevel, oracle_traces};
use crate::paths::shortest_positive_path;
use crate::semantics::{enabled, parse_state, run, ExtState, Show};
use crate::transform::{build_instance, eliminate_epsilon, language_to_trace, shrink_counter};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 10;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

/// One report per invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub verdict: String,
    pub eqlevel: Option<u64>,
    pub witness: Option<String>,
    pub bound: Option<u64>,
    pub caps: BTreeMap<String, u64>,
    pub timing_ms: u64,
    pub decisions: Vec<String>,
    #[serde(default)]
    pub details: Value,
}

impl Report {
    fn new(command: &str, verdict: &str) -> Self {
        Report {
            command: command.to_string(),
            verdict: verdict.to_string(),
            eqlevel: None,
            witness: None,
            bound: None,
            caps: BTreeMap::new(),
            timing_ms: 0,
            decisions: Vec::new(),
            details: Value::Null,
        }
    }

    /// Plain-text rendering with the same fields as the JSON form.
    pub fn human(&self) -> String {
        let mut s = format!("command: {}\nverdict: {}\n", self.command, self.verdict);
        if let Some(e) = self.eqlevel {
            s += &format!("eqlevel: {e}\n");
        }
        if let Some(w) = &self.witness {
            s += &format!("witness: {}\n", if w.is_empty() { "ε" } else { w });
        }
        if let Some(b) = self.bound {
            s += &format!("bound: {b}\n");
        }
        for (k, v) in &self.caps {
            s += &format!("cap {k}: {v}\n");
        }
        for d in &self.decisions {
            s += &format!("note: {d}\n");
        }
        if !self.details.is_null() {
            s += &format!(
                "details: {}\n",
                serde_json::to_string_pretty(&self.details).unwrap_or_default()
            );
        }
        s += &format!("time: {} ms\n", self.timing_ms);
        s
    }
}

#[derive(Debug, Parser)]
#[command(name = "doca", version, about = "Deterministic one-counter automata toolkit")]
pub struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the primary output (automaton text or report) to this file.
    #[arg(short = 'o', global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Pair {
    pub file: PathBuf,
    #[arg(long)]
    pub left: String,
    #[arg(long)]
    pub right: String,
    #[arg(long)]
    pub bound: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the model invariants of a doca or classical file.
    Validate { file: PathBuf },
    /// Run a word from a stable state.
    Run {
        file: PathBuf,
        #[arg(long)]
        state: String,
        #[arg(long)]
        counter: Option<u64>,
        #[arg(long)]
        word: String,
    },
    /// Letters enabled in a stable state.
    Enabled {
        file: PathBuf,
        #[arg(long)]
        state: String,
        #[arg(long)]
        counter: Option<u64>,
    },
    /// Bounded eqlevel of two states with a shortest witness.
    Eq {
        #[command(flatten)]
        pair: Pair,
        /// Product-state cap of the search.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Independence level of `state(counter)`.
    Il {
        file: PathBuf,
        #[arg(long)]
        state: String,
        #[arg(long)]
        counter: Option<u64>,
        #[arg(long)]
        bound: Option<u64>,
    },
    /// The six eqlevels around a pair and its Mod states.
    Tuple {
        #[command(flatten)]
        pair: Pair,
    },
    /// Finite eqlevels of all pairs of zero configurations.
    ZeroEqlevels {
        file: PathBuf,
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Shortest positive path between two configurations.
    Path {
        file: PathBuf,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Regularity of the trace set of `state(counter)`.
    Regular {
        file: PathBuf,
        #[arg(long)]
        state: String,
        #[arg(long)]
        counter: Option<u64>,
        #[arg(long)]
        bound: Option<u64>,
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Classical file to a reset-form doca whose traces encode its language.
    Convert { file: PathBuf },
    /// Language-equivalence instance of two classical files as one doca.
    Instance {
        left: PathBuf,
        right: PathBuf,
        /// Also decide the instance with this bound.
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Generate an automaton.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Eqlevel by exhaustive word enumeration.
    OracleEq {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, default_value_t = 10)]
        depth: usize,
    },
    /// All enabled words up to a depth.
    OracleTraces {
        file: PathBuf,
        #[arg(long)]
        state: String,
        #[arg(long)]
        counter: Option<u64>,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    /// Prime family with the first `n` primes.
    Primes {
        #[arg(long)]
        n: usize,
    },
    /// Seeded random doca.
    Random {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        alphabet: usize,
        #[arg(long, default_value_t = 0.7)]
        density: f64,
        #[arg(long, default_value_t = 0.25)]
        resets: f64,
        #[arg(long)]
        seed: u64,
    },
}

/// Outcome of a command: the report, its exit code, and optional
/// automaton text produced by the command.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub code: i32,
    pub artifact: Option<String>,
}

fn read(path: &Path) -> Result<Automaton> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
    decode(&text)
}

fn checked(v: crate::model::ValidationReport) -> Result<()> {
    if v.ok {
        Ok(())
    } else {
        let list: Vec<String> = v.violations.iter().map(|x| format!("{} ({})", x.code, x.location)).collect();
        Err(Error::Invalid(list.join("; ")))
    }
}

fn read_doca(path: &Path) -> Result<Doca> {
    match read(path)? {
        Automaton::Doca(d) => {
            checked(validate_doca(&d))?;
            Ok(d)
        }
        Automaton::Classical(_) => Err(Error::Invalid(format!(
            "{} is a classical automaton; convert it first",
            path.display()
        ))),
    }
}

fn read_classical(path: &Path) -> Result<ClassicalDoca> {
    match read(path)? {
        Automaton::Classical(a) => {
            checked(validate_classical(&a))?;
            Ok(a)
        }
        Automaton::Doca(_) => Err(Error::Invalid(format!(
            "{} is a reset-form doca, expected a classical automaton",
            path.display()
        ))),
    }
}

/// Parses a state, with `--counter` applying to a bare name.
fn state_arg(d: &Doca, text: &str, counter: Option<u64>) -> Result<ExtState> {
    let s = parse_state(d, text)?;
    match (s, counter) {
        (ExtState::Plain { state, .. }, Some(c)) if !text.contains('(') => Ok(ExtState::plain(state, c)),
        (ExtState::ResetCfg { state, .. }, Some(c)) if !text.contains('(') => {
            Ok(ExtState::ResetCfg { state, counter: c })
        }
        (s, _) => Ok(s),
    }
}

fn plain_arg(d: &Doca, text: &str, counter: Option<u64>) -> Result<(usize, u64)> {
    match state_arg(d, text, counter)? {
        ExtState::Plain { state, counter } => Ok((state, counter)),
        other => Err(Error::InvalidState(format!(
            "expected a stable configuration, got {}",
            Show(d, &other)
        ))),
    }
}

fn level_fields(report: &mut Report, level: Level) {
    if let Level::Finite(v) = level {
        report.eqlevel = Some(v);
    }
}

fn bound_note(b: u64) -> String {
    format!("equivalence relative to bound {b}")
}

fn exec(cli: &Cli) -> Result<Outcome> {
    let ok = |report: Report| Outcome {
        report,
        code: EXIT_OK,
        artifact: None,
    };
    match &cli.command {
        Command::Validate { file } => {
            let a = read(file)?;
            let v = validate(&a);
            let mut r = Report::new("validate", if v.ok { "ok" } else { "invalid" });
            r.details = serde_json::to_value(&v).unwrap_or(Value::Null);
            Ok(Outcome {
                code: if v.ok { EXIT_OK } else { EXIT_INPUT },
                report: r,
                artifact: None,
            })
        }
        Command::Run {
            file,
            state,
            counter,
            word,
        } => {
            let d = read_doca(file)?;
            let s = state_arg(&d, state, *counter)?;
            let w = d.parse_word(word)?;
            let end = run(&d, &s, &w)?;
            let mut r = Report::new("run", if end.is_some() { "enabled" } else { "disabled" });
            r.details = json!({
                "from": Show(&d, &s).to_string(),
                "word": d.word_to_string(&w),
                "to": end.as_ref().map(|e| Show(&d, e).to_string()),
            });
            Ok(Outcome {
                code: if end.is_some() { EXIT_OK } else { EXIT_NEGATIVE },
                report: r,
                artifact: None,
            })
        }
        Command::Enabled { file, state, counter } => {
            let d = read_doca(file)?;
            let s = state_arg(&d, state, *counter)?;
            let letters: Vec<&str> = enabled(&d, &s)?.iter().map(|&a| d.letter_name(a)).collect();
            let mut r = Report::new("enabled", "ok");
            r.details = json!({ "state": Show(&d, &s).to_string(), "letters": letters });
            Ok(ok(r))
        }
        Command::Eq { pair, cap } => {
            let d = read_doca(&pair.file)?;
            let s = state_arg(&d, &pair.left, None)?;
            let t = state_arg(&d, &pair.right, None)?;
            let bound = pair.bound.unwrap_or_else(|| default_bound(d.k()));
            let cap = cap.unwrap_or(DEFAULT_STATE_CAP);
            let res = eqlevel_with_cap(&d, &s, &t, bound, cap)?;
            let mut r = Report::new("eq", "");
            r.bound = Some(bound);
            r.caps.insert("states".into(), cap as u64);
            level_fields(&mut r, res.level);
            r.details = json!({
                "left": Show(&d, &s).to_string(),
                "right": Show(&d, &t).to_string(),
                "explored": res.explored,
                "exhausted": res.exhausted,
            });
            let code = if let Some(w) = &res.witness {
                debug_assert!(verify_witness(&d, &s, &t, w)?);
                r.verdict = "inequivalent".into();
                r.witness = Some(d.word_to_string(w));
                EXIT_NEGATIVE
            } else if res.exhausted {
                r.verdict = "equivalent".into();
                r.decisions.push("reachable product exhausted: equivalence holds for every bound".into());
                EXIT_OK
            } else {
                r.verdict = "equivalent-up-to-bound".into();
                r.decisions.push(bound_note(bound));
                EXIT_OK
            };
            Ok(Outcome {
                report: r,
                code,
                artifact: None,
            })
        }
        Command::Il {
            file,
            state,
            counter,
            bound,
        } => {
            let d = read_doca(file)?;
            let (p, m) = plain_arg(&d, state, *counter)?;
            let bound = bound.unwrap_or_else(|| default_bound(d.k()));
            let res = independence_level(&d, p, m, bound)?;
            let mut r = Report::new("il", if res.level.is_finite() { "finite" } else { "at-least-bound" });
            r.bound = Some(bound);
            level_fields(&mut r, res.level);
            r.witness = res.witness.as_ref().map(|w| d.word_to_string(w));
            if !res.level.is_finite() {
                r.decisions.push(bound_note(bound));
            }
            r.details = json!({ "state": Show(&d, &ExtState::plain(p, m)).to_string() });
            Ok(ok(r))
        }
        Command::Tuple { pair } => {
            let d = read_doca(&pair.file)?;
            let s = state_arg(&d, &pair.left, None)?;
            let t = state_arg(&d, &pair.right, None)?;
            let bound = pair.bound.unwrap_or_else(|| default_bound(d.k()));
            let tup = eqlevel_tuple(&d, &s, &t, bound)?;
            let mut r = Report::new("tuple", if tup.min_twice_holds() { "ok" } else { "min-twice-violated" });
            r.bound = Some(bound);
            level_fields(&mut r, tup.b);
            let show = |l: Level| l.to_string();
            r.details = json!({
                "b": show(tup.b), "l": show(tup.l), "r": show(tup.r),
                "o": show(tup.o), "dL": show(tup.dl), "dR": show(tup.dr),
            });
            Ok(ok(r))
        }
        Command::ZeroEqlevels { file, bound } => {
            let d = read_doca(file)?;
            let bound = bound.unwrap_or_else(|| default_bound(d.k()));
            let z = zero_eqlevels(&d, bound)?;
            let mut r = Report::new("zero-eqlevels", "ok");
            r.bound = Some(bound);
            r.decisions.push(format!("pairs missing from the map agree up to bound {bound}"));
            let map: BTreeMap<String, u64> = z.into_iter().map(|((p, q), v)| (format!("{p},{q}"), v)).collect();
            r.details = json!({ "eqlevels": map });
            Ok(ok(r))
        }
        Command::Path { file, left, right } => {
            let d = read_doca(file)?;
            let (p, m) = plain_arg(&d, left, None)?;
            let (q, n) = plain_arg(&d, right, None)?;
            let path = shortest_positive_path(&d, p, m, q, n);
            let mut r = Report::new("path", if path.is_some() { "path" } else { "no-path" });
            if let Some(pd) = &path {
                r.witness = Some(d.word_to_string(&pd.word()));
                r.details = json!({
                    "pre": d.word_to_string(&pd.pre),
                    "cycle": d.word_to_string(&pd.cycle),
                    "reps": pd.reps,
                    "post": d.word_to_string(&pd.post),
                    "length": pd.length,
                    "cycle_effect": pd.cycle_effect,
                });
            }
            Ok(Outcome {
                code: if path.is_some() { EXIT_OK } else { EXIT_NEGATIVE },
                report: r,
                artifact: None,
            })
        }
        Command::Regular {
            file,
            state,
            counter,
            bound,
            cap,
        } => {
            let d = read_doca(file)?;
            let (p, m) = plain_arg(&d, state, *counter)?;
            let bound = bound.unwrap_or_else(|| default_bound(d.k()));
            let cap = cap.unwrap_or_else(|| default_cap(&d, m));
            let v = is_regular(&d, p, m, bound, Some(cap))?;
            let mut r = Report::new(
                "regular",
                match v.verdict {
                    Regularity::NonRegular => "non-regular",
                    Regularity::RegularUpToCaps => "regular-up-to-caps",
                },
            );
            r.bound = Some(bound);
            r.caps.insert("counter".into(), v.caps.counter);
            let code = match &v.certificate {
                Some(c) => {
                    debug_assert!(check_certificate(&d, p, m, c, bound)?);
                    r.details = json!({
                        "u": d.word_to_string(&c.u),
                        "q1": d.stable_name(c.q1),
                        "n": c.n,
                        "v": d.word_to_string(&c.v),
                        "w": d.word_to_string(&c.w),
                        "q_prime": d.stable_name(c.q_prime),
                    });
                    EXIT_NEGATIVE
                }
                None => {
                    r.decisions.push(format!(
                        "regular only up to counter cap {} and engine bound {bound}",
                        v.caps.counter
                    ));
                    EXIT_OK
                }
            };
            Ok(Outcome {
                report: r,
                code,
                artifact: None,
            })
        }
        Command::Convert { file } => {
            let a = read_classical(file)?;
            let (shrunk, _) = shrink_counter(&a);
            let (ad, map) = eliminate_epsilon(&shrunk)?;
            let (d, gadgets) = language_to_trace(&ad)?;
            checked(validate_doca(&d))?;
            let mut r = Report::new("convert", "ok");
            r.decisions = eps_conventions();
            r.decisions.extend(gadgets.renamed.iter().map(|x| format!("letter-clash: renamed {x}")));
            let start = &map.start[&shrunk.states()[shrunk.initial()]];
            r.details = json!({
                "start": start,
                "acc_letter": gadgets.acc_letter,
                "sink": gadgets.sink,
                "stable_states": d.stable_states().len(),
                "reset_states": d.reset_states().len(),
            });
            Ok(Outcome {
                report: r,
                code: EXIT_OK,
                artifact: Some(encode_doca(&d)),
            })
        }
        Command::Instance { left, right, bound } => {
            let a1 = read_classical(left)?;
            let a2 = read_classical(right)?;
            let inst = build_instance(&a1, &a2)?;
            checked(validate_doca(&inst.doca))?;
            let mut r = Report::new("instance", "ok");
            r.decisions = eps_conventions();
            r.decisions
                .extend(inst.gadgets.renamed.iter().map(|x| format!("letter-clash: renamed {x}")));
            let mut code = EXIT_OK;
            if let Some(b) = bound {
                let s = ExtState::plain(inst.left_index(), 0);
                let t = ExtState::plain(inst.right_index(), 0);
                let res = eqlevel_with_cap(&inst.doca, &s, &t, *b, DEFAULT_STATE_CAP)?;
                r.bound = Some(*b);
                level_fields(&mut r, res.level);
                if let Some(w) = &res.witness {
                    r.verdict = "inequivalent".into();
                    r.witness = Some(inst.doca.word_to_string(w));
                    code = EXIT_NEGATIVE;
                } else {
                    r.verdict = if res.exhausted { "equivalent" } else { "equivalent-up-to-bound" }.into();
                    r.decisions.push(bound_note(*b));
                }
            }
            r.details = json!({
                "left": inst.left,
                "right": inst.right,
                "acc_letter": inst.gadgets.acc_letter,
                "stable_states": inst.doca.stable_states().len(),
                "reset_states": inst.doca.reset_states().len(),
            });
            Ok(Outcome {
                artifact: Some(encode_doca(&inst.doca)),
                report: r,
                code,
            })
        }
        Command::Gen { kind } => {
            let spec = match kind {
                GenKind::Primes { n } => GenSpec::Primes(*n),
                GenKind::Random {
                    k,
                    alphabet,
                    density,
                    resets,
                    seed,
                } => GenSpec::Random(RandomSpec {
                    k: *k,
                    alphabet_size: *alphabet,
                    rule_density: *density,
                    reset_fraction: *resets,
                    seed: *seed,
                }),
            };
            let (d, start) = generate(&spec);
            let mut r = Report::new("gen", "ok");
            r.details = json!({ "start": start, "k": d.k(), "spec": spec });
            Ok(Outcome {
                report: r,
                code: EXIT_OK,
                artifact: Some(encode_doca(&d)),
            })
        }
        Command::OracleEq { pair, depth } => {
            let d = read_doca(&pair.file)?;
            let s = state_arg(&d, &pair.left, None)?;
            let t = state_arg(&d, &pair.right, None)?;
            let level = oracle_eqlevel(&d, &s, &t, *depth)?;
            let mut r = Report::new(
                "oracle-eq",
                if level.is_finite() { "inequivalent" } else { "agree-to-depth" },
            );
            level_fields(&mut r, level);
            r.caps.insert("depth".into(), *depth as u64);
            Ok(Outcome {
                code: if level.is_finite() { EXIT_NEGATIVE } else { EXIT_OK },
                report: r,
                artifact: None,
            })
        }
        Command::OracleTraces {
            file,
            state,
            counter,
            depth,
        } => {
            let d = read_doca(file)?;
            let s = state_arg(&d, state, *counter)?;
            let ts = oracle_traces(&d, &s, *depth)?;
            let words: Vec<String> = ts.words.iter().map(|w| d.word_to_string(w)).collect();
            let mut r = Report::new("oracle-traces", "ok");
            r.caps.insert("depth".into(), *depth as u64);
            r.details = json!({ "count": words.len(), "words": words });
            Ok(ok(r))
        }
    }
}

fn eps_conventions() -> Vec<String> {
    vec![
        "a word is accepted if some state on the ε-run after its last letter is accepting".into(),
        "a non-terminating ε-run enables no further letters".into(),
    ]
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Run { .. } => "run",
        Command::Enabled { .. } => "enabled",
        Command::Eq { .. } => "eq",
        Command::Il { .. } => "il",
        Command::Tuple { .. } => "tuple",
        Command::ZeroEqlevels { .. } => "zero-eqlevels",
        Command::Path { .. } => "path",
        Command::Regular { .. } => "regular",
        Command::Convert { .. } => "convert",
        Command::Instance { .. } => "instance",
        Command::Gen { .. } => "gen",
        Command::OracleEq { .. } => "oracle-eq",
        Command::OracleTraces { .. } => "oracle-traces",
    }
}

/// Runs a parsed command; errors become reports with exit code 2, or 3
/// when a resource limit was hit.
pub fn execute(cli: &Cli) -> Outcome {
    let start = Instant::now();
    let mut out = exec(cli).unwrap_or_else(|e| {
        let (verdict, code) = match e {
            Error::BoundExceededMemory { .. } | Error::CounterOverflow => ("inconclusive", EXIT_INCONCLUSIVE),
            _ => ("error", EXIT_INPUT),
        };
        let mut r = Report::new(command_name(&cli.command), verdict);
        r.details = json!({ "error": e.to_string() });
        Outcome {
            report: r,
            code,
            artifact: None,
        }
    });
    out.report.timing_ms = start.elapsed().as_millis() as u64;
    out
}

/// Full dispatch: execute, print or write, and return the exit code.
pub fn cli_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let out = execute(&cli);
    let rendered = if cli.json {
        serde_json::to_string_pretty(&out.report).expect("report serializes") + "\n"
    } else {
        out.report.human()
    };
    match (&cli.output, &out.artifact) {
        (Some(path), Some(text)) => {
            if let Err(e) = fs::write(path, text) {
                eprintln!("cannot write {}: {e}", path.display());
                return EXIT_INPUT;
            }
            print!("{rendered}");
        }
        (Some(path), None) => {
            if let Err(e) = fs::write(path, &rendered) {
                eprintln!("cannot write {}: {e}", path.display());
                return EXIT_INPUT;
            }
        }
        (None, Some(text)) if out.code == EXIT_OK && !cli.json => print!("{text}"),
        _ => print!("{rendered}"),
    }
    out.code
}
