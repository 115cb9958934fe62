//! Search for renormalization orbits that stay in the box
//! `M^-1 < r < M`, `|t| < M`.

use serde::Serialize;

use crate::ifs::{CantorIfs, Similarity};
use crate::renorm::{renormalize, Configuration};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitStep {
    pub word: Vec<String>,
    pub word_prime: Vec<String>,
    pub configuration: Configuration,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OrbitStatus {
    BoundedToDepth,
    /// Every branch had left the box (or provably would) by this step.
    Escaped { step: usize },
    /// Node budget ran out before either outcome was established.
    BudgetExhausted { nodes: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitRecord {
    pub initial: Configuration,
    #[serde(rename = "M")]
    pub bound: f64,
    pub steps: Vec<OrbitStep>,
    #[serde(flatten)]
    pub status: OrbitStatus,
}

impl OrbitRecord {
    pub fn is_bounded(&self) -> bool {
        self.status == OrbitStatus::BoundedToDepth
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrbitOptions {
    pub node_budget: usize,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self {
            node_budget: 2_000_000,
        }
    }
}

/// All words of length `1..=max_len`, with their composed maps.
pub(crate) fn words_up_to(ifs: &CantorIfs, max_len: usize) -> Vec<(Vec<usize>, Similarity)> {
    let mut out = Vec::new();
    let mut level: Vec<(Vec<usize>, Similarity)> = vec![(Vec::new(), Similarity::IDENTITY)];
    for _ in 0..max_len.max(1) {
        let mut next = Vec::with_capacity(level.len() * ifs.len());
        for (w, m) in &level {
            for a in 0..ifs.len() {
                let mut w2 = w.clone();
                w2.push(a);
                next.push((w2, m.compose(ifs.map(a))));
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}

struct Ctx<'a> {
    k: &'a CantorIfs,
    kp: &'a CantorIfs,
    pairs: Vec<(usize, usize)>,
    words: Vec<(Vec<usize>, Similarity)>,
    words_p: Vec<(Vec<usize>, Similarity)>,
    hull: (f64, f64),
    hull_p: (f64, f64),
    m: f64,
    max_steps: usize,
    budget: usize,
    nodes: usize,
    deepest: usize,
}

impl Ctx<'_> {
    /// The line of `u` misses the hull rectangle, so its orbit is unbounded.
    fn misses_hull(&self, u: &Configuration) -> bool {
        let lo = u.r * self.hull_p.0 - self.hull.1;
        let hi = u.r * self.hull_p.1 - self.hull.0;
        u.t < lo || u.t > hi
    }

    fn box_distance(&self, u: &Configuration) -> f64 {
        (u.r.ln().abs() / self.m.ln()).max(u.t.abs() / self.m)
    }

    fn dfs(&mut self, u: Configuration, step: usize, path: &mut Vec<(usize, Configuration)>) -> Option<bool> {
        if step == self.max_steps {
            return Some(true);
        }
        let mut children: Vec<(f64, usize, Configuration)> = Vec::new();
        for (idx, &(i, j)) in self.pairs.iter().enumerate() {
            self.nodes += 1;
            let v = renormalize(u, &self.words[i].1, &self.words_p[j].1);
            if v.within_bounds(self.m) && !self.misses_hull(&v) {
                children.push((self.box_distance(&v), idx, v));
            }
        }
        if self.nodes > self.budget {
            return None;
        }
        children.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if !children.is_empty() {
            self.deepest = self.deepest.max(step + 1);
        }
        for (_, idx, v) in children {
            path.push((idx, v));
            match self.dfs(v, step + 1, path) {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {
                    path.pop();
                }
            }
        }
        Some(false)
    }
}

pub fn bounded_orbit_search(
    u: Configuration,
    k: &CantorIfs,
    k_prime: &CantorIfs,
    m: f64,
    max_steps: usize,
    word_len: usize,
) -> OrbitRecord {
    bounded_orbit_search_with(u, k, k_prime, m, max_steps, word_len, OrbitOptions::default())
}

/// Depth-first search with backtracking for `max_steps` renormalizations
/// by word pairs of length at most `word_len`, all staying in the box.
///
/// Children are tried closest to the box center first; pairs are
/// enumerated by ratio balance so `r` stays near its current value.
/// Children whose line misses the hull rectangle are dropped: their orbits
/// are unbounded, the distance to the rectangle growing at every step.
pub fn bounded_orbit_search_with(
    u: Configuration,
    k: &CantorIfs,
    k_prime: &CantorIfs,
    m: f64,
    max_steps: usize,
    word_len: usize,
    opts: OrbitOptions,
) -> OrbitRecord {
    let words = words_up_to(k, word_len);
    let words_p = words_up_to(k_prime, word_len);
    let mut pairs: Vec<(usize, usize)> = (0..words.len())
        .flat_map(|i| (0..words_p.len()).map(move |j| (i, j)))
        .collect();
    pairs.sort_by(|&(i, j), &(i2, j2)| {
        let b1 = (words_p[j].1.ratio / words[i].1.ratio).ln().abs();
        let b2 = (words_p[j2].1.ratio / words[i2].1.ratio).ln().abs();
        b1.total_cmp(&b2).then((i, j).cmp(&(i2, j2)))
    });
    let hull = k.hull();
    let hull_p = k_prime.hull();
    let mut record = OrbitRecord {
        initial: u,
        bound: m,
        steps: Vec::new(),
        status: OrbitStatus::Escaped { step: 0 },
    };
    if !u.within_bounds(m) {
        return record;
    }
    let mut ctx = Ctx {
        k,
        kp: k_prime,
        pairs,
        words,
        words_p,
        hull: (hull.lo, hull.hi),
        hull_p: (hull_p.lo, hull_p.hi),
        m,
        max_steps,
        budget: opts.node_budget,
        nodes: 0,
        deepest: 0,
    };
    let mut path = Vec::new();
    match ctx.dfs(u, 0, &mut path) {
        Some(true) => {
            record.status = OrbitStatus::BoundedToDepth;
            record.steps = path
                .into_iter()
                .map(|(idx, v)| {
                    let (i, j) = ctx.pairs[idx];
                    OrbitStep {
                        word: ctx.words[i].0.iter().map(|&a| ctx.k.labels()[a].clone()).collect(),
                        word_prime: ctx.words_p[j].0.iter().map(|&a| ctx.kp.labels()[a].clone()).collect(),
                        configuration: v,
                    }
                })
                .collect();
        }
        Some(false) => record.status = OrbitStatus::Escaped { step: ctx.deepest + 1 },
        None => record.status = OrbitStatus::BudgetExhausted { nodes: ctx.nodes },
    }
    record
}

/// Greedy path choosing the image with smallest `|t|` at every step
/// (ties by ratio balance). For a configuration whose line misses the
/// product set this is the slowest-escaping single path.
pub fn escape_trajectory(
    u: Configuration,
    k: &CantorIfs,
    k_prime: &CantorIfs,
    steps: usize,
    word_len: usize,
) -> Vec<Configuration> {
    let words = words_up_to(k, word_len);
    let words_p = words_up_to(k_prime, word_len);
    let mut out = vec![u];
    let mut cur = u;
    for _ in 0..steps {
        let mut best: Option<(f64, f64, Configuration)> = None;
        for (_, f) in &words {
            for (_, fp) in &words_p {
                let v = renormalize(cur, f, fp);
                let key = (v.t.abs(), v.r.ln().abs());
                if best.is_none_or(|b| key.0 < b.0 || (key.0 == b.0 && key.1 < b.1)) {
                    best = Some((key.0, key.1, v));
                }
            }
        }
        let Some((_, _, v)) = best else { break };
        cur = v;
        out.push(v);
    }
    out
}
