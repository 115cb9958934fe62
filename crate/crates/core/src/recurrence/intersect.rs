//! Finite-depth test whether the line of a configuration meets
//! `K × rK'`.

use serde::Serialize;

use crate::ifs::{CantorIfs, Similarity};
use crate::interval::Interval;
use crate::renorm::Configuration;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntersectOptions {
    /// A cylinder pair counts as hit only if `t` is this far inside its
    /// projected interval.
    pub margin: f64,
    /// Passing this close to a rectangle corner counts as an exact hit:
    /// corners of hull cylinders are points of the attractors.
    pub corner_tolerance: f64,
}

impl Default for IntersectOptions {
    fn default() -> Self {
        Self {
            margin: 1e-9,
            corner_tolerance: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
    Unresolved,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IntersectWitness {
    /// Chain of cylinder pairs hit with margin down to the requested depth.
    Cylinders { word: Vec<String>, word_prime: Vec<String> },
    /// The line passes through a corner `(x, y)` with `x ∈ K`, `y ∈ rK'`.
    Corner {
        x: f64,
        y: f64,
        word: Vec<String>,
        word_prime: Vec<String>,
    },
    /// The last surviving pairs were missed at level `depth`; `distance` is
    /// the smallest gap between `t` and a projected interval there.
    Separation { depth: usize, distance: f64 },
    /// Pairs surviving to full depth are only grazed within the margin.
    Grazing { word: Vec<String>, word_prime: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntersectResult {
    pub verdict: Verdict,
    pub witness: IntersectWitness,
}

struct Search<'a> {
    k: &'a CantorIfs,
    kp: &'a CantorIfs,
    hull: Interval,
    hull_p: Interval,
    u: Configuration,
    depth: usize,
    opts: IntersectOptions,
    graze: Option<(Vec<usize>, Vec<usize>)>,
    miss_depth: usize,
    miss_distance: f64,
}

enum Found {
    Chain(Vec<usize>, Vec<usize>),
    Corner(f64, f64, Vec<usize>, Vec<usize>),
}

impl Search<'_> {
    /// Projected interval `{y - x}` of the hull rectangle, plus the corners.
    fn project(&self, f: &Similarity, fp: &Similarity) -> (Interval, (f64, f64), (f64, f64)) {
        let x = Interval::new(f.apply(self.hull.lo), f.apply(self.hull.hi));
        let y = Interval::new(self.u.r * fp.apply(self.hull_p.lo), self.u.r * fp.apply(self.hull_p.hi));
        (
            Interval::new(y.lo - x.hi, y.hi - x.lo),
            (x.hi, y.lo),
            (x.lo, y.hi),
        )
    }

    fn visit(&mut self, level: usize, f: Similarity, fp: Similarity, w: &mut Vec<usize>, wp: &mut Vec<usize>, grazing: bool) -> Option<Found> {
        let t = self.u.t;
        let (j, c1, c2) = self.project(&f, &fp);
        if !grazing {
            for (x, y) in [c1, c2] {
                if (y - x - t).abs() <= self.opts.corner_tolerance {
                    return Some(Found::Corner(x, y, w.clone(), wp.clone()));
                }
            }
        }
        if t < j.lo - self.opts.margin || t > j.hi + self.opts.margin {
            let dist = j.distance(t);
            if level > self.miss_depth || (level == self.miss_depth && dist < self.miss_distance) {
                self.miss_depth = level;
                self.miss_distance = dist;
            }
            return None;
        }
        let strict = !grazing && t > j.lo + self.opts.margin && t < j.hi - self.opts.margin;
        if level == self.depth {
            if strict {
                return Some(Found::Chain(w.clone(), wp.clone()));
            }
            if self.graze.is_none() {
                self.graze = Some((w.clone(), wp.clone()));
            }
            return None;
        }
        for a in 0..self.k.len() {
            let fa = f.compose(self.k.map(a));
            w.push(a);
            for b in 0..self.kp.len() {
                let fb = fp.compose(self.kp.map(b));
                wp.push(b);
                let found = self.visit(level + 1, fa, fb, w, wp, !strict);
                wp.pop();
                if found.is_some() {
                    w.pop();
                    return found;
                }
            }
            w.pop();
        }
        None
    }
}

fn labels(ifs: &CantorIfs, w: &[usize]) -> Vec<String> {
    w.iter().map(|&a| ifs.labels()[a].clone()).collect()
}

/// Three-valued answer at depth `depth ≥ 1`.
///
/// `Yes` needs a chain of hull-cylinder pairs whose projections contain `t`
/// with margin at every level, or an exact corner contact. `No` means every
/// pair is missed by more than the margin at some level. Everything else is
/// `Unresolved`.
pub fn is_intersecting(u: Configuration, k: &CantorIfs, k_prime: &CantorIfs, depth: usize) -> IntersectResult {
    is_intersecting_with(u, k, k_prime, depth, IntersectOptions::default())
}

pub fn is_intersecting_with(
    u: Configuration,
    k: &CantorIfs,
    k_prime: &CantorIfs,
    depth: usize,
    opts: IntersectOptions,
) -> IntersectResult {
    let depth = depth.max(1);
    let mut s = Search {
        k,
        kp: k_prime,
        hull: k.hull(),
        hull_p: k_prime.hull(),
        u,
        depth,
        opts,
        graze: None,
        miss_depth: 0,
        miss_distance: f64::INFINITY,
    };
    let found = s.visit(0, Similarity::IDENTITY, Similarity::IDENTITY, &mut Vec::new(), &mut Vec::new(), false);
    match found {
        Some(Found::Chain(w, wp)) => IntersectResult {
            verdict: Verdict::Yes,
            witness: IntersectWitness::Cylinders {
                word: labels(k, &w),
                word_prime: labels(k_prime, &wp),
            },
        },
        Some(Found::Corner(x, y, w, wp)) => IntersectResult {
            verdict: Verdict::Yes,
            witness: IntersectWitness::Corner {
                x,
                y,
                word: labels(k, &w),
                word_prime: labels(k_prime, &wp),
            },
        },
        None => match s.graze {
            Some((w, wp)) => IntersectResult {
                verdict: Verdict::Unresolved,
                witness: IntersectWitness::Grazing {
                    word: labels(k, &w),
                    word_prime: labels(k_prime, &wp),
                },
            },
            None => IntersectResult {
                verdict: Verdict::No,
                witness: IntersectWitness::Separation {
                    depth: s.miss_depth,
                    distance: s.miss_distance,
                },
            },
        },
    }
}
