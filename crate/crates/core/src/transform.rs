//! From classical ε-form automata to reset-form docas, and from language
//! equivalence to trace equivalence.
//!
//! Generated names carry the reserved suffix `__t`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ClassicalDoca, Doca, ResetSpec, RuleSpec, EPS};
use crate::semantics::lcm_of;

/// Correspondence between the input and output states of a stage.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateMap {
    /// Input pattern (`p(i mod K)`, with `+acc` when the flag is set) to
    /// output state name.
    pub forward: BTreeMap<String, String>,
    /// Input start state to output start state.
    pub start: BTreeMap<String, String>,
}

/// A reset-form doca with accepting stable states and named start states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcceptingDoca {
    pub doca: Doca,
    pub accepting: BTreeSet<String>,
}

impl AcceptingDoca {
    pub fn is_accepting(&self, stable: usize) -> bool {
        self.accepting.contains(self.doca.stable_name(stable))
    }
}

/// Where the ε-moves from a configuration lead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Settle {
    /// A configuration with no applicable ε-rule.
    Reading { state: usize, counter: u64, accepting: bool },
    /// An infinite ε-run; `accepting` if it visits an accepting state.
    Diverge { accepting: bool },
}

impl Settle {
    pub fn accepting(&self) -> bool {
        match self {
            Settle::Reading { accepting, .. } | Settle::Diverge { accepting } => *accepting,
        }
    }
}

/// Follows ε-rules from `x(m)` until none applies or the run provably loops.
pub fn settle(a: &ClassicalDoca, mut x: usize, mut m: u64) -> Settle {
    let mut acc = a.is_accepting(x);
    let mut zero_seen = BTreeSet::new();
    let mut last: HashMap<usize, u64> = HashMap::new();
    loop {
        if m == 0 {
            if !zero_seen.insert(x) {
                return Settle::Diverge { accepting: acc };
            }
            last.clear();
        } else {
            // A return to x with no smaller counter repeats forever.
            if last.get(&x).is_some_and(|&prev| m >= prev) {
                return Settle::Diverge { accepting: acc };
            }
            last.insert(x, m);
        }
        match a.eps_rule(x, m > 0) {
            None => {
                return Settle::Reading {
                    state: x,
                    counter: m,
                    accepting: acc,
                }
            }
            Some(r) => {
                x = r.to;
                m = (m as i64 + r.effect as i64) as u64;
                acc |= a.is_accepting(x);
            }
        }
    }
}

/// Membership of `word` in the language of `a` from `start(0)`. A word is
/// accepted when some state on the ε-run after its last letter is accepting.
pub fn accepts_from(a: &ClassicalDoca, start: usize, word: &[usize]) -> bool {
    let mut s = settle(a, start, 0);
    for &l in word {
        let Settle::Reading { state, counter, .. } = s else {
            return false;
        };
        let Some(r) = a.letter_rule(state, l, counter > 0) else {
            return false;
        };
        s = settle(a, r.to, (counter as i64 + r.effect as i64) as u64);
    }
    s.accepting()
}

pub fn accepts(a: &ClassicalDoca, word: &[usize]) -> bool {
    accepts_from(a, a.initial(), word)
}

fn shrunk_name(p: &str, i: usize) -> String {
    format!("{p}__t{i}")
}

/// Replaces `p(m)` by `p_{m mod k}(m div k)` where `k` is the number of
/// states; effects stay within {-1, 0, +1}.
pub fn shrink_counter(a: &ClassicalDoca) -> (ClassicalDoca, StateMap) {
    let k = a.states().len();
    let mut states = Vec::with_capacity(k * k);
    let mut map = StateMap::default();
    for p in a.states() {
        for i in 0..k {
            states.push(shrunk_name(p, i));
            map.forward
                .insert(format!("{p}({i} mod {k})"), shrunk_name(p, i));
        }
    }
    let mut rules = Vec::new();
    for r in a.rules() {
        let letter = r
            .letter
            .map_or_else(|| EPS.to_string(), |l| a.alphabet()[l].clone());
        for i in 0..k {
            for positive in [false, true] {
                if (i > 0 || positive) != r.positive {
                    continue;
                }
                let t = i as i64 + r.effect as i64;
                let (i2, e) = if t == k as i64 {
                    (0, 1)
                } else if t < 0 {
                    (k - 1, -1)
                } else {
                    (t as usize, 0)
                };
                rules.push(RuleSpec {
                    from: shrunk_name(&a.states()[r.from], i),
                    letter: letter.clone(),
                    positive,
                    to: shrunk_name(&a.states()[r.to], i2),
                    effect: e,
                });
            }
        }
    }
    let accepting: Vec<String> = a
        .accepting_names()
        .iter()
        .flat_map(|p| (0..k).map(move |i| shrunk_name(p, i)))
        .collect();
    for p in a.states() {
        map.start.insert(p.clone(), shrunk_name(p, 0));
    }
    let initial = shrunk_name(&a.states()[a.initial()], 0);
    let out = ClassicalDoca::from_names(states, a.alphabet().to_vec(), rules, &initial, &accepting)
        .expect("shrinking preserves well-formedness");
    (out, map)
}

/// The positive ε-run from a state, as a path of states.
struct Walk {
    states: Vec<usize>,
    /// Counter change after each prefix; `effects[t]` belongs to `states[t]`.
    effects: Vec<i64>,
    /// Index where the run starts repeating, with the effect of one round.
    cycle: Option<(usize, i64)>,
}

fn walk(a: &ClassicalDoca, y: usize) -> Walk {
    let mut states = vec![y];
    let mut effects = vec![0i64];
    let mut pos: HashMap<usize, usize> = HashMap::from([(y, 0)]);
    loop {
        let x = *states.last().unwrap();
        let Some(r) = a.eps_rule(x, true) else {
            return Walk {
                states,
                effects,
                cycle: None,
            };
        };
        let e = effects.last().unwrap() + r.effect as i64;
        if let Some(&start) = pos.get(&r.to) {
            return Walk {
                cycle: Some((start, e - effects[start])),
                states,
                effects,
            };
        }
        pos.insert(r.to, states.len());
        states.push(r.to);
        effects.push(e);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Key {
    Cfg { state: usize, residue: u64, accepting: bool },
    Div { accepting: bool },
}

struct Eliminator<'a> {
    a: &'a ClassicalDoca,
    k: u64,
    walks: HashMap<usize, Walk>,
    names: BTreeMap<Key, String>,
    queue: VecDeque<Key>,
    rules: Vec<RuleSpec>,
    resets: BTreeMap<(usize, u64), ResetSpec>,
}

impl Eliminator<'_> {
    fn name(&mut self, key: Key) -> String {
        if let Some(n) = self.names.get(&key) {
            return n.clone();
        }
        let n = match key {
            Key::Cfg {
                state,
                residue,
                accepting,
            } => format!("{}__t{}_{}", self.a.states()[state], residue, accepting as u8),
            Key::Div { accepting } => format!("div__t{}", accepting as u8),
        };
        self.names.insert(key, n.clone());
        self.queue.push_back(key);
        n
    }

    /// Key and counter for a settled configuration whose counter is below 2K.
    fn place(&self, s: Settle) -> (Key, u64) {
        match s {
            Settle::Reading {
                state,
                counter,
                accepting,
            } => (
                Key::Cfg {
                    state,
                    residue: counter % self.k,
                    accepting,
                },
                counter / self.k,
            ),
            Settle::Diverge { accepting } => (Key::Div { accepting }, 0),
        }
    }

    fn walk(&mut self, y: usize) -> &Walk {
        let a = self.a;
        self.walks.entry(y).or_insert_with(|| walk(a, y))
    }

    fn push_rule(&mut self, from: &str, letter: usize, positive: bool, to: String, effect: i64) {
        debug_assert!((-1..=1).contains(&effect));
        self.rules.push(RuleSpec {
            from: from.to_string(),
            letter: self.a.alphabet()[letter].clone(),
            positive,
            to,
            effect: effect as i8,
        });
    }

    fn zero_row(&mut self, from: &str, x: usize, i: u64) {
        let a = self.a;
        if a.eps_rule(x, i > 0).is_some() {
            return;
        }
        for l in 0..a.alphabet().len() {
            let Some(r) = a.letter_rule(x, l, i > 0) else {
                continue;
            };
            let m = (i as i64 + r.effect as i64) as u64;
            let (key, e) = self.place(settle(a, r.to, m));
            let to = self.name(key);
            self.push_rule(from, l, false, to, e as i64);
        }
    }

    /// Rows for `x(nK + i)` with `n ≥ 1`, where every counter on the way
    /// exceeds twice the number of states.
    fn positive_row(&mut self, from: &str, x: usize, i: u64) {
        let a = self.a;
        if a.eps_rule(x, true).is_some() {
            return;
        }
        let n_states = a.states().len() as i64;
        let k = self.k as i64;
        for l in 0..a.alphabet().len() {
            let Some(r) = a.letter_rule(x, l, true) else {
                continue;
            };
            let off = i as i64 + r.effect as i64;
            let y = r.to;
            let w = self.walk(y);
            let acc_walk = w.states.iter().any(|&s| a.is_accepting(s));
            let (last, last_effect, cycle) =
                (*w.states.last().unwrap(), *w.effects.last().unwrap(), w.cycle);
            match cycle {
                None => {
                    let v = off + last_effect;
                    let key = Key::Cfg {
                        state: last,
                        residue: v.rem_euclid(k) as u64,
                        accepting: acc_walk,
                    };
                    let to = self.name(key);
                    self.push_rule(from, l, true, to, v.div_euclid(k));
                }
                Some((_, d)) if d >= 0 => {
                    let to = self.name(Key::Div {
                        accepting: acc_walk,
                    });
                    self.push_rule(from, l, true, to, 0);
                }
                Some((_, d)) => {
                    let per = (-d) as u64;
                    let o = off.rem_euclid(per as i64) as u64;
                    let name = self.reset(y, o, per, n_states);
                    self.push_rule(from, l, true, name, 0);
                }
            }
        }
    }

    /// Reset state for a popping ε-cycle entered at `y` with counter
    /// `≡ ρ + o (mod per)` when the reset residue is `ρ`; K ≡ 1 (mod per)
    /// makes the residue of the output counter the residue of the input one.
    fn reset(&mut self, y: usize, o: u64, per: u64, n_states: i64) -> String {
        if let Some(r) = self.resets.get(&(y, o)) {
            return r.name.clone();
        }
        let a = self.a;
        let base = 2 * n_states as u64 + 1;
        let mut goto = Vec::new();
        for rho in 0..per {
            let want = (rho + o) % per;
            let v = base + (want + per - base % per) % per;
            let (mut x, mut m, mut acc) = (y, v, a.is_accepting(y));
            while m > 0 {
                let r = a.eps_rule(x, true).expect("popping cycle");
                x = r.to;
                m = (m as i64 + r.effect as i64) as u64;
                acc |= a.is_accepting(x);
            }
            let s = settle(a, x, 0);
            let (key, n) = match self.place(s) {
                (Key::Cfg { state, residue, accepting }, n) => (
                    Key::Cfg {
                        state,
                        residue,
                        accepting: accepting || acc,
                    },
                    n,
                ),
                (Key::Div { accepting }, n) => (
                    Key::Div {
                        accepting: accepting || acc,
                    },
                    n,
                ),
            };
            debug_assert_eq!(n, 0);
            goto.push((rho as u32, self.name(key)));
        }
        let name = format!("{}__tr{}", a.states()[y], o);
        self.resets.insert(
            (y, o),
            ResetSpec {
                name: name.clone(),
                period: per as u32,
                goto,
            },
        );
        name
    }
}

/// The residue factor: 1 without ε-rules, otherwise the least
/// `K ≥ 2n + 2` with `K ≡ 1` modulo every popping ε-cycle effect.
fn residue_factor(a: &ClassicalDoca) -> u64 {
    if !a.has_eps_rules() {
        return 1;
    }
    let mut drops = Vec::new();
    for y in 0..a.states().len() {
        if let Some((_, d)) = walk(a, y).cycle {
            if d < 0 {
                drops.push((-d) as u64);
            }
        }
    }
    let l = lcm_of(drops);
    let mut k = 2 * a.states().len() as u64 + 2;
    while k % l != 1 % l {
        k += 1;
    }
    k
}

/// Builds an equivalent reset-form doca with an accepting annotation.
///
/// Output stable states `x__t{i}_{f}` stand for the input configuration
/// `x(nK + i)` reached after the ε-run of a letter (or of the start), with
/// `f` recording whether that run visited an accepting state. ε-runs that
/// never end become the rule-less states `div__t0` and `div__t1`; popping
/// ε-cycles become reset states whose period is the cycle's counter drop.
pub fn eliminate_epsilon(a: &ClassicalDoca) -> Result<(AcceptingDoca, StateMap)> {
    eliminate_epsilon_from(a, &[a.initial()])
}

pub fn eliminate_epsilon_from(
    a: &ClassicalDoca,
    starts: &[usize],
) -> Result<(AcceptingDoca, StateMap)> {
    if let Some(r) = a.rules().iter().find(|r| !(-1..=1).contains(&r.effect)) {
        return Err(Error::UnshrunkInput(format!(
            "rule from `{}` has effect {}",
            a.states()[r.from],
            r.effect
        )));
    }
    let k = residue_factor(a);
    let mut el = Eliminator {
        a,
        k,
        walks: HashMap::new(),
        names: BTreeMap::new(),
        queue: VecDeque::new(),
        rules: Vec::new(),
        resets: BTreeMap::new(),
    };
    let mut map = StateMap::default();
    for &s in starts {
        let (key, n) = el.place(settle(a, s, 0));
        debug_assert_eq!(n, 0);
        let name = el.name(key);
        map.start.insert(a.states()[s].clone(), name);
    }
    while let Some(key) = el.queue.pop_front() {
        let name = el.names[&key].clone();
        if let Key::Cfg { state, residue, .. } = key {
            el.zero_row(&name, state, residue);
            el.positive_row(&name, state, residue);
        }
    }

    let mut stable: Vec<String> = el.names.values().cloned().collect();
    let mut accepting = BTreeSet::new();
    for (key, name) in &el.names {
        match key {
            Key::Cfg {
                state,
                residue,
                accepting: f,
            } => {
                let mut pattern = format!("{}({} mod {})", a.states()[*state], residue, k);
                if *f {
                    pattern.push_str("+acc");
                    accepting.insert(name.clone());
                }
                map.forward.insert(pattern, name.clone());
            }
            Key::Div { accepting: f } => {
                if *f {
                    accepting.insert(name.clone());
                }
            }
        }
    }
    let resets: Vec<ResetSpec> = el.resets.into_values().collect();
    let max_per = resets.iter().map(|r| r.period as usize).max().unwrap_or(0);
    let mut pad = 0;
    while stable.len() < max_per {
        stable.push(format!("pad{pad}__t"));
        pad += 1;
    }
    let doca = Doca::from_names(stable, resets, a.alphabet().to_vec(), el.rules)?;
    Ok((AcceptingDoca { doca, accepting }, map))
}

/// Result of [`language_to_trace`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceGadgets {
    pub acc_letter: String,
    pub sink: String,
    /// Generated names that had to be changed to avoid a clash.
    pub renamed: Vec<String>,
}

fn fresh(base: &str, taken: &BTreeSet<String>, renamed: &mut Vec<String>) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    let mut i = 1;
    while taken.contains(&format!("{base}{i}")) {
        i += 1;
    }
    let name = format!("{base}{i}");
    renamed.push(format!("{base} -> {name}"));
    name
}

/// Completes every stable state with rules into a sink loop and adds an
/// `acc__t` loop on accepting states, so that trace equivalence of the
/// result coincides with language equivalence of the input.
pub fn language_to_trace(ad: &AcceptingDoca) -> Result<(Doca, TraceGadgets)> {
    let d = &ad.doca;
    let mut taken: BTreeSet<String> = d.stable_states().iter().cloned().collect();
    taken.extend(d.reset_states().iter().map(|r| r.name.clone()));
    taken.extend(d.alphabet().iter().cloned());
    let mut renamed = Vec::new();
    let sink = fresh("sink__t", &taken, &mut renamed);
    taken.insert(sink.clone());
    let acc_letter = fresh("acc__t", &taken, &mut renamed);

    let mut rules = d.rule_specs();
    let mut stable = d.stable_states().to_vec();
    stable.push(sink.clone());
    for p in &stable {
        let idx = d.stable_index(p);
        for (a, letter) in d.alphabet().iter().enumerate() {
            for positive in [false, true] {
                let missing = match idx {
                    Some(i) => d.rule(i, a, positive).is_none(),
                    None => true,
                };
                if missing {
                    rules.push(RuleSpec {
                        from: p.clone(),
                        letter: letter.clone(),
                        positive,
                        to: sink.clone(),
                        effect: 0,
                    });
                }
            }
        }
    }
    for q in &ad.accepting {
        for positive in [false, true] {
            rules.push(RuleSpec {
                from: q.clone(),
                letter: acc_letter.clone(),
                positive,
                to: q.clone(),
                effect: 0,
            });
        }
    }
    let mut alphabet = d.alphabet().to_vec();
    alphabet.push(acc_letter.clone());
    let out = Doca::from_names(stable, d.reset_specs(), alphabet, rules)?;
    Ok((
        out,
        TraceGadgets {
            acc_letter,
            sink,
            renamed,
        },
    ))
}

/// Disjoint union of two classical automata with prefixed state names; the
/// initial state is that of `a1`.
pub fn disjoint_union_classical(
    a1: &ClassicalDoca,
    a2: &ClassicalDoca,
    p1: &str,
    p2: &str,
) -> Result<ClassicalDoca> {
    let mut states = Vec::new();
    let mut rules = Vec::new();
    let mut accepting = Vec::new();
    let mut alphabet: BTreeSet<String> = BTreeSet::new();
    for (a, px) in [(a1, p1), (a2, p2)] {
        states.extend(a.states().iter().map(|s| format!("{px}{s}")));
        accepting.extend(a.accepting_names().iter().map(|s| format!("{px}{s}")));
        alphabet.extend(a.alphabet().iter().cloned());
        for mut r in a.rule_specs() {
            r.from = format!("{px}{}", r.from);
            r.to = format!("{px}{}", r.to);
            rules.push(r);
        }
    }
    let initial = format!("{p1}{}", a1.states()[a1.initial()]);
    ClassicalDoca::from_names(states, alphabet.into_iter().collect(), rules, &initial, &accepting)
}

/// Disjoint union of two reset-form docas with prefixed state names.
pub fn disjoint_union_doca(d1: &Doca, d2: &Doca, p1: &str, p2: &str) -> Result<Doca> {
    let mut stable = Vec::new();
    let mut resets = Vec::new();
    let mut rules = Vec::new();
    let mut alphabet: BTreeSet<String> = BTreeSet::new();
    for (d, px) in [(d1, p1), (d2, p2)] {
        stable.extend(d.stable_states().iter().map(|s| format!("{px}{s}")));
        alphabet.extend(d.alphabet().iter().cloned());
        for mut r in d.reset_specs() {
            r.name = format!("{px}{}", r.name);
            for g in &mut r.goto {
                g.1 = format!("{px}{}", g.1);
            }
            resets.push(r);
        }
        for mut r in d.rule_specs() {
            r.from = format!("{px}{}", r.from);
            r.to = format!("{px}{}", r.to);
            rules.push(r);
        }
    }
    Doca::from_names(stable, resets, alphabet.into_iter().collect(), rules)
}

/// A trace-equivalence instance equivalent to a language-equivalence one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub doca: Doca,
    pub left: String,
    pub right: String,
    pub gadgets: TraceGadgets,
    /// Outputs of the intermediate stages, in pipeline order.
    pub union: ClassicalDoca,
    pub shrunk: ClassicalDoca,
    pub eliminated: AcceptingDoca,
}

impl Instance {
    pub fn left_index(&self) -> usize {
        self.doca.stable_index(&self.left).expect("left start")
    }

    pub fn right_index(&self) -> usize {
        self.doca.stable_index(&self.right).expect("right start")
    }

    /// Drops the acceptance letter from a word over the instance alphabet
    /// and maps it back to the letter names of the union.
    pub fn strip_acc(&self, word: &[usize]) -> Vec<String> {
        word.iter()
            .map(|&a| self.doca.letter_name(a))
            .filter(|&n| n != self.gadgets.acc_letter)
            .map(str::to_string)
            .collect()
    }
}

/// Union, counter shrinking, ε-elimination and the trace gadgets in turn.
pub fn build_instance(a1: &ClassicalDoca, a2: &ClassicalDoca) -> Result<Instance> {
    let union = disjoint_union_classical(a1, a2, "l_", "r_")?;
    let l0 = format!("l_{}", a1.states()[a1.initial()]);
    let r0 = format!("r_{}", a2.states()[a2.initial()]);
    let (shrunk, smap) = shrink_counter(&union);
    let starts = [&smap.start[&l0], &smap.start[&r0]]
        .map(|n| shrunk.state_index(n).expect("shrunk start"));
    let (eliminated, emap) = eliminate_epsilon_from(&shrunk, &starts)?;
    let (doca, gadgets) = language_to_trace(&eliminated)?;
    let left = emap.start[&smap.start[&l0]].clone();
    let right = emap.start[&smap.start[&r0]].clone();
    Ok(Instance {
        doca,
        left,
        right,
        gadgets,
        union,
        shrunk,
        eliminated,
    })
}
