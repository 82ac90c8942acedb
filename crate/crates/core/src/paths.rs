//! Shortest positive paths, control-state cycles, and the affine form of
//! independence levels along a residue class.
//!
//! A positive path uses positive rules into stable states only; every
//! configuration on it except the last has a nonzero counter.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::equivalence::{independence_level, Level};
use crate::error::{Error, Result};
use crate::model::{Control, Doca};
use crate::semantics::lcm_of;

/// A positive path `pre · cycle^reps · post`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathDecomposition {
    pub pre: Vec<usize>,
    /// Empty when `reps == 0`.
    pub cycle: Vec<usize>,
    pub reps: u64,
    pub post: Vec<usize>,
    pub length: u64,
    pub cycle_effect: i64,
}

impl PathDecomposition {
    fn plain(word: Vec<usize>) -> Self {
        PathDecomposition {
            length: word.len() as u64,
            pre: word,
            cycle: Vec::new(),
            reps: 0,
            post: Vec::new(),
            cycle_effect: 0,
        }
    }

    pub fn word(&self) -> Vec<usize> {
        let mut w = self.pre.clone();
        for _ in 0..self.reps {
            w.extend_from_slice(&self.cycle);
        }
        w.extend_from_slice(&self.post);
        w
    }
}

/// Positive rules into stable states: `(letter, target, effect)` per source.
fn positive_edges(doca: &Doca) -> Vec<Vec<(usize, usize, i64)>> {
    let mut out = vec![Vec::new(); doca.stable_states().len()];
    for r in doca.rules() {
        if let (true, Control::Stable(q)) = (r.positive, r.to) {
            out[r.from].push((r.letter, q, r.effect as i64));
        }
    }
    for e in &mut out {
        e.sort();
    }
    out
}

/// Replays `word` from `p(m)` as a positive path; the endpoint on success.
pub fn replay_positive(doca: &Doca, p: usize, m: u64, word: &[usize]) -> Option<(usize, u64)> {
    let (mut x, mut c) = (p, m);
    for &a in word {
        if c == 0 {
            return None;
        }
        let r = doca.rule(x, a, true)?;
        let Control::Stable(q) = r.to else {
            return None;
        };
        x = q;
        c = (c as i64 + r.effect as i64) as u64;
    }
    Some((x, c))
}

type Cfg = (usize, u64);

/// Breadth-first search over configurations reachable by positive steps.
/// Returns distances with parent links.
fn forward_bfs(
    edges: &[Vec<(usize, usize, i64)>],
    start: Cfg,
    max_depth: u64,
    hi: u64,
    stop_at: Option<Cfg>,
) -> HashMap<Cfg, (u64, Option<(Cfg, usize)>)> {
    let mut dist: HashMap<Cfg, (u64, Option<(Cfg, usize)>)> = HashMap::new();
    dist.insert(start, (0, None));
    let mut queue = VecDeque::from([start]);
    while let Some(cur) = queue.pop_front() {
        if Some(cur) == stop_at {
            break;
        }
        let d = dist[&cur].0;
        if d == max_depth || cur.1 == 0 {
            continue;
        }
        for &(a, q, j) in &edges[cur.0] {
            let c = (cur.1 as i64 + j) as u64;
            if c > hi {
                continue;
            }
            let next = (q, c);
            if !dist.contains_key(&next) {
                dist.insert(next, (d + 1, Some((cur, a))));
                queue.push_back(next);
            }
        }
    }
    dist
}

fn forward_word(dist: &HashMap<Cfg, (u64, Option<(Cfg, usize)>)>, mut at: Cfg) -> Vec<usize> {
    let mut w = Vec::new();
    while let Some((prev, a)) = dist[&at].1 {
        w.push(a);
        at = prev;
    }
    w.reverse();
    w
}

/// Distances to `target` along positive paths, with successor links.
fn backward_bfs(
    edges: &[Vec<(usize, usize, i64)>],
    target: Cfg,
    max_depth: u64,
) -> HashMap<Cfg, (u64, Option<(Cfg, usize)>)> {
    let mut rev: Vec<Vec<(usize, usize, i64)>> = vec![Vec::new(); edges.len()];
    for (x, es) in edges.iter().enumerate() {
        for &(a, q, j) in es {
            rev[q].push((a, x, j));
        }
    }
    for e in &mut rev {
        e.sort();
    }
    let mut dist: HashMap<Cfg, (u64, Option<(Cfg, usize)>)> = HashMap::new();
    dist.insert(target, (0, None));
    let mut queue = VecDeque::from([target]);
    while let Some(cur) = queue.pop_front() {
        let d = dist[&cur].0;
        if d == max_depth {
            continue;
        }
        for &(a, x, j) in &rev[cur.0] {
            let c = cur.1 as i64 - j;
            if c < 1 {
                continue;
            }
            let prev = (x, c as u64);
            if !dist.contains_key(&prev) {
                dist.insert(prev, (d + 1, Some((cur, a))));
                queue.push_back(prev);
            }
        }
    }
    dist
}

fn backward_word(dist: &HashMap<Cfg, (u64, Option<(Cfg, usize)>)>, mut at: Cfg) -> Vec<usize> {
    let mut w = Vec::new();
    while let Some((next, a)) = dist[&at].1 {
        w.push(a);
        at = next;
    }
    w
}

#[derive(Debug, Clone)]
struct ClosedWalk {
    length: u64,
    effect: i64,
    /// Least prefix effect over the positions before the walk closes.
    min_prefix: i64,
    word: Vec<usize>,
}

/// For each `(length, effect)` with `effect ≠ 0`, a closed walk at `r` of
/// length at most `max_len` with the largest least prefix effect.
fn closed_walks(edges: &[Vec<(usize, usize, i64)>], r: usize, max_len: usize) -> Vec<ClosedWalk> {
    let mut best: BTreeMap<(u64, i64), ClosedWalk> = BTreeMap::new();
    let mut layer: BTreeMap<(usize, i64, i64), Vec<usize>> = BTreeMap::new();
    layer.insert((r, 0, i64::MAX), Vec::new());
    for len in 1..=max_len {
        let mut next: BTreeMap<(usize, i64, i64), Vec<usize>> = BTreeMap::new();
        for ((x, e, mp), w) in &layer {
            for &(a, q, j) in &edges[*x] {
                let key = (q, e + j, (*mp).min(*e));
                next.entry(key).or_insert_with(|| {
                    let mut w2 = w.clone();
                    w2.push(a);
                    w2
                });
            }
        }
        for ((x, e, mp), w) in &next {
            if *x == r && *e != 0 {
                let slot = best.entry((len as u64, *e)).or_insert_with(|| ClosedWalk {
                    length: len as u64,
                    effect: *e,
                    min_prefix: *mp,
                    word: w.clone(),
                });
                if *mp > slot.min_prefix {
                    slot.min_prefix = *mp;
                    slot.word = w.clone();
                }
            }
        }
        layer = next;
    }
    best.into_values().collect()
}

/// Shortest positive path from `p(m)` to `q(n)`, in the pre-phase / cycle /
/// post-phase shape. `None` if there is no positive path.
pub fn shortest_positive_path(
    doca: &Doca,
    p: usize,
    m: u64,
    q: usize,
    n: u64,
) -> Option<PathDecomposition> {
    if p == q && m == n {
        return Some(PathDecomposition::plain(Vec::new()));
    }
    if m == 0 {
        return None;
    }
    let k = doca.k() as u64;
    let k2 = k * k;
    let edges = positive_edges(doca);
    if m.abs_diff(n) < k2 {
        let hi = m.max(n) + 2 * k2 + 2 * k;
        let dist = forward_bfs(&edges, (p, m), u64::MAX, hi, Some((q, n)));
        return dist
            .contains_key(&(q, n))
            .then(|| PathDecomposition::plain(forward_word(&dist, (q, n))));
    }

    let fwd = forward_bfs(&edges, (p, m), k2, u64::MAX, None);
    let bwd = backward_bfs(&edges, (q, n), k2);
    let mut by_state_f: BTreeMap<usize, Vec<(u64, u64)>> = BTreeMap::new();
    for (&(r, c), &(d, _)) in &fwd {
        by_state_f.entry(r).or_default().push((c, d));
    }
    let mut by_state_b: BTreeMap<usize, Vec<(u64, u64)>> = BTreeMap::new();
    for (&(r, c), &(d, _)) in &bwd {
        by_state_b.entry(r).or_default().push((c, d));
    }

    // (total, phases, r, c1, c2, cycle index or none, reps)
    type Cand = (u64, u64, usize, u64, u64, Option<usize>, u64);
    let mut best: Option<Cand> = None;
    let mut walks_at: BTreeMap<usize, Vec<ClosedWalk>> = BTreeMap::new();
    for (&r, fs) in &by_state_f {
        let Some(bs) = by_state_b.get(&r) else {
            continue;
        };
        let mut fs = fs.clone();
        let mut bs = bs.clone();
        fs.sort();
        bs.sort();
        let walks = walks_at
            .entry(r)
            .or_insert_with(|| closed_walks(&edges, r, k as usize));
        let bmap: HashMap<u64, u64> = bs.iter().copied().collect();
        for &(c1, d1) in &fs {
            if let Some(&d2) = bmap.get(&c1) {
                let cand = (d1 + d2, d1 + d2, r, c1, c1, None, 0);
                if best.is_none_or(|b| (cand.0, cand.1) < (b.0, b.1)) {
                    best = Some(cand);
                }
            }
            if c1 == 0 {
                continue;
            }
            for (wi, w) in walks.iter().enumerate() {
                for &(c2, d2) in &bs {
                    let diff = c2 as i64 - c1 as i64;
                    if diff == 0 || diff.signum() != w.effect.signum() || diff % w.effect != 0 {
                        continue;
                    }
                    let reps = (diff / w.effect) as u64;
                    let low = if w.effect > 0 {
                        c1 as i64 + w.min_prefix
                    } else {
                        c1 as i64 + (reps as i64 - 1) * w.effect + w.min_prefix
                    };
                    if low < 1 {
                        continue;
                    }
                    let total = d1 + d2 + reps * w.length;
                    let cand = (total, d1 + d2, r, c1, c2, Some(wi), reps);
                    if best.is_none_or(|b| (cand.0, cand.1) < (b.0, b.1)) {
                        best = Some(cand);
                    }
                }
            }
        }
    }
    let (total, _, r, c1, c2, wi, reps) = best?;
    let pre = forward_word(&fwd, (r, c1));
    let post = backward_word(&bwd, (r, c2));
    let (cycle, cycle_effect) = match wi {
        Some(i) => {
            let w = &walks_at[&r][i];
            (w.word.clone(), w.effect)
        }
        None => (Vec::new(), 0),
    };
    Some(PathDecomposition {
        pre,
        cycle,
        reps,
        post,
        length: total,
        cycle_effect,
    })
}

/// A simple control-state cycle of the positive-rule graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cycle {
    pub states: Vec<usize>,
    pub word: Vec<usize>,
    pub effect: i64,
    pub length: u64,
    /// Largest `|effect| / length` among the cycles with this effect sign.
    pub best_for_sign: bool,
}

/// All simple cycles of length at most `k` in the positive-rule graph,
/// each listed once from its least state.
pub fn best_cycles(doca: &Doca) -> Vec<Cycle> {
    let edges = positive_edges(doca);
    let k = doca.k();
    let mut out = Vec::new();
    fn dfs(
        edges: &[Vec<(usize, usize, i64)>],
        start: usize,
        max_len: usize,
        states: &mut Vec<usize>,
        word: &mut Vec<usize>,
        effect: i64,
        out: &mut Vec<Cycle>,
    ) {
        let x = *states.last().unwrap();
        for &(a, q, j) in &edges[x] {
            if q == start {
                let mut w = word.clone();
                w.push(a);
                out.push(Cycle {
                    states: states.clone(),
                    length: w.len() as u64,
                    word: w,
                    effect: effect + j,
                    best_for_sign: false,
                });
            } else if q > start && !states.contains(&q) && states.len() < max_len {
                states.push(q);
                word.push(a);
                dfs(edges, start, max_len, states, word, effect + j, out);
                states.pop();
                word.pop();
            }
        }
    }
    for s in 0..edges.len() {
        dfs(&edges, s, k, &mut vec![s], &mut Vec::new(), 0, &mut out);
    }
    for sign in [-1, 1] {
        let ratio = |c: &Cycle| Ratio::new(c.effect.abs(), c.length as i64);
        if let Some(best) = out.iter().filter(|c| c.effect.signum() == sign).map(ratio).max() {
            for c in out.iter_mut() {
                if c.effect.signum() == sign && ratio(c) == best {
                    c.best_for_sign = true;
                }
            }
        }
    }
    out
}

/// `IL(p(m)) = rho·m + sigma + e` for `m ≥ valid_from` with
/// `m ≡ residue (mod modulus)`, through a positive path to `anchor(0)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineILForm {
    pub rho: Ratio<i64>,
    pub sigma: Ratio<i64>,
    pub anchor: usize,
    /// `IL(anchor(0))`.
    pub e: u64,
    pub valid_from: u64,
    pub modulus: u64,
    pub residue: u64,
}

impl AffineILForm {
    pub fn applies(&self, m: u64) -> bool {
        m >= self.valid_from && m % self.modulus == self.residue
    }

    pub fn value(&self, m: u64) -> Ratio<i64> {
        self.rho * Ratio::from_integer(m as i64) + self.sigma + Ratio::from_integer(self.e as i64)
    }
}

/// Least value of the applicable forms at `m`.
pub fn evaluate_forms(forms: &[AffineILForm], m: u64) -> Option<Ratio<i64>> {
    forms.iter().filter(|f| f.applies(m)).map(|f| f.value(m)).min()
}

/// Affine forms of `m ↦ |shortest positive path p(m) → q(0)| + IL(q(0))`
/// for each anchor `q` with finite `IL(q(0))` under `bound`. Each form is
/// fitted on one residue class and confirmed one and two periods later.
pub fn il_affine_form(doca: &Doca, p: usize, bound: u64) -> Result<Vec<AffineILForm>> {
    let k = doca.k() as u64;
    let threshold = k * k + k;
    let drops = best_cycles(doca)
        .into_iter()
        .filter(|c| c.effect < 0)
        .map(|c| c.effect.unsigned_abs());
    let modulus = lcm_of(drops);
    let len = |m: u64, q: usize| shortest_positive_path(doca, p, m, q, 0).map(|d| d.length);

    let mut forms = Vec::new();
    for q in 0..doca.stable_states().len() {
        let Level::Finite(e) = independence_level(doca, q, 0, bound)?.level else {
            continue;
        };
        for residue in 0..modulus {
            let mut m0 = threshold + (residue + modulus - threshold % modulus) % modulus;
            // Advance until the affine prediction holds on the next two points.
            for _ in 0..4 {
                let pts: Vec<Option<u64>> = (0..3).map(|t| len(m0 + t * modulus, q)).collect();
                if let [Some(a), Some(b), Some(c)] = pts[..] {
                    let step = b as i64 - a as i64;
                    if c as i64 - b as i64 == step {
                        let rho = Ratio::new(step, modulus as i64);
                        let sigma = Ratio::from_integer(a as i64) - rho * Ratio::from_integer(m0 as i64);
                        forms.push(AffineILForm {
                            rho,
                            sigma,
                            anchor: q,
                            e,
                            valid_from: m0,
                            modulus,
                            residue: m0 % modulus,
                        });
                        break;
                    }
                } else if pts.iter().all(Option::is_none) {
                    break;
                }
                m0 += modulus;
            }
        }
    }
    if forms.is_empty() {
        return Err(Error::NoAnchor {
            state: doca.stable_name(p).to_string(),
        });
    }
    Ok(forms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn d4_descent() {
        let d = fixtures::d4();
        let path = shortest_positive_path(&d, 0, 5, 0, 0).unwrap();
        assert_eq!(path.length, 5);
        assert_eq!(d.word_to_string(&path.word()), "aaaaa");
        assert_eq!(replay_positive(&d, 0, 5, &path.word()), Some((0, 0)));

        let far = shortest_positive_path(&d, 0, 30, 0, 0).unwrap();
        assert_eq!(far.length, 30);
        assert_eq!(far.cycle_effect, -1);
        assert!(far.reps > 0);
        assert_eq!(replay_positive(&d, 0, 30, &far.word()), Some((0, 0)));
    }

    #[test]
    fn long_descent_uses_cheapest_cycle() {
        let d = crate::model::DocaBuilder::new()
            .letters(["a", "b", "c"])
            .stable(["q0", "q1"])
            .rule("q0", "b", 1, "q1", -1)
            .rule("q1", "b", 1, "q1", -1)
            .rule("q1", "c", 1, "q0", 0)
            .build()
            .unwrap();
        let pd = shortest_positive_path(&d, 0, 46, 0, 28).unwrap();
        assert_eq!(pd.length, 19);
        assert_eq!(replay_positive(&d, 0, 46, &pd.word()), Some((0, 28)));
    }

    #[test]
    fn identity_and_unreachable() {
        let d = fixtures::d1();
        let p = d.stable_index("p").unwrap();
        let q = d.stable_index("q").unwrap();
        assert_eq!(shortest_positive_path(&d, p, 4, p, 4).unwrap().length, 0);
        assert!(shortest_positive_path(&d, q, 3, p, 3).is_none());
        assert!(shortest_positive_path(&d, p, 0, p, 1).is_none());
        // Ascend, then descend through q.
        let path = shortest_positive_path(&d, p, 1, q, 0).unwrap();
        assert_eq!(d.word_to_string(&path.word()), "b");
        let up = shortest_positive_path(&d, p, 1, q, 10).unwrap();
        assert_eq!(up.length, 11);
        assert_eq!(replay_positive(&d, p, 1, &up.word()), Some((q, 10)));
    }

    #[test]
    fn cycles_of_fixtures() {
        let d4 = fixtures::d4();
        let c = best_cycles(&d4);
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].effect, c[0].length, c[0].best_for_sign), (-1, 1, true));

        let d1 = fixtures::d1();
        let mut c: Vec<(String, i64)> = best_cycles(&d1)
            .iter()
            .map(|c| (d1.word_to_string(&c.word), c.effect))
            .collect();
        c.sort();
        assert_eq!(c, vec![("a".to_string(), 1), ("b".to_string(), -1)]);

        let zero_only = crate::model::DocaBuilder::new()
            .letters(["a"])
            .stable(["p", "q"])
            .rule("p", "a", 0, "q", 1)
            .rule("q", "a", 0, "p", 0)
            .build()
            .unwrap();
        assert!(best_cycles(&zero_only).is_empty());
    }

    #[test]
    fn d4_affine_form() {
        let d = fixtures::d4();
        let forms = il_affine_form(&d, 0, 200).unwrap();
        assert_eq!(forms.len(), 1);
        let f = &forms[0];
        assert_eq!(f.rho, Ratio::from_integer(1));
        assert_eq!(f.sigma, Ratio::from_integer(0));
        assert_eq!((f.anchor, f.e), (0, 0));
        for m in 1..=20 {
            let il = independence_level(&d, 0, m, 200).unwrap().level;
            assert_eq!(il, Level::Finite(m));
            if f.applies(m) {
                assert_eq!(f.value(m), Ratio::from_integer(m as i64));
            }
        }
    }

    #[test]
    fn d1_affine_form_from_q() {
        let d = fixtures::d1();
        let q = d.stable_index("q").unwrap();
        let forms = il_affine_form(&d, q, 200).unwrap();
        let via_q: Vec<&AffineILForm> = forms.iter().filter(|f| f.anchor == q).collect();
        assert_eq!(via_q.len(), 1);
        assert_eq!(via_q[0].rho, Ratio::from_integer(1));
        assert_eq!(via_q[0].sigma, Ratio::from_integer(0));
        for m in via_q[0].valid_from..via_q[0].valid_from + 10 {
            let il = independence_level(&d, q, m, 200).unwrap().level;
            assert_eq!(Some(Ratio::from_integer(il.value() as i64)), evaluate_forms(&forms, m));
        }
    }

    #[test]
    fn no_anchor() {
        let d = crate::model::DocaBuilder::new()
            .letters(["a"])
            .stable(["p"])
            .rule("p", "a", 1, "p", 1)
            .build()
            .unwrap();
        assert!(matches!(il_affine_form(&d, 0, 50), Err(Error::NoAnchor { .. })));
    }
}
