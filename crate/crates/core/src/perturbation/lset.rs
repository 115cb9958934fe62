//! The admissible translation sets `L(r)`.
//!
//! For a row `(a1, a1')` and a length change `γ`, the translations `t` with
//! some `(a2, a2')` whose renormalized ratio lies in `E` and whose
//! renormalized translation satisfies `|t̂| ≤ M` form a finite union of
//! intervals, because at `δ = 0` the condition `|t̂| ≤ M` reads
//! `t ∈ [r V' - V - M Λ, r V' - V + M Λ]`. Everything below is computed
//! exactly on those intervals; only `γ` is sampled.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ifs::{AlphabetSplit, CantorIfs, Similarity, Word};
use crate::interval::{coverage_at_least, Interval, IntervalSet};
use crate::projection::ESet;
use crate::renorm::{perturb_similarity, renormalize, Configuration, Omega, PerturbedLabel};
use crate::Mode;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LParams {
    pub rho: f64,
    pub epsilon: f64,
    #[serde(rename = "M")]
    pub m_bound: f64,
    pub c1: f64,
    pub c6: f64,
    pub c7: f64,
    /// Number of rows `N`.
    pub n_rows: usize,
    pub mode: Mode,
    /// Size of the `γ` grid standing in for the sets `Φ_i`.
    pub gamma_points: usize,
}

impl LParams {
    /// Cell centers of a uniform grid on `(-ε, ε)`.
    pub fn gamma_grid(&self) -> Vec<f64> {
        let g = self.gamma_points as f64;
        (0..self.gamma_points)
            .map(|k| -self.epsilon + (k as f64 + 0.5) * 2.0 * self.epsilon / g)
            .collect()
    }

    /// `2ε / G`, the measure carried by one grid value.
    pub fn gamma_cell(&self) -> f64 {
        2.0 * self.epsilon / self.gamma_points as f64
    }

    /// Fewest grid values whose measure exceeds `c7`.
    pub fn min_gamma_count(&self) -> usize {
        (self.c7 / self.gamma_cell()).floor() as usize + 1
    }
}

/// `t̂` of the renormalization into `I^{γ,δ}(w) × I'_r(w')`, the
/// perturbation acting on the leading letter of `w` only.
#[allow(clippy::too_many_arguments)]
pub fn pos_t(
    u: Configuration,
    k: &CantorIfs,
    k_prime: &CantorIfs,
    split: &AlphabetSplit,
    omega: Omega,
    epsilon: f64,
    c1: f64,
    rho: f64,
    w: &Word,
    w_prime: &Word,
) -> Result<f64> {
    Ok(pos(u, k, k_prime, split, omega, epsilon, c1, rho, w, w_prime)?.t)
}

/// `r̂ = |I'_r(w')| / |I^{γ,0}(w)|`; `δ` does not enter.
#[allow(clippy::too_many_arguments)]
pub fn pos_r(
    u: Configuration,
    k: &CantorIfs,
    k_prime: &CantorIfs,
    split: &AlphabetSplit,
    gamma: f64,
    epsilon: f64,
    w: &Word,
    w_prime: &Word,
) -> Result<f64> {
    let om = Omega { gamma, delta: 0.0 };
    Ok(pos(u, k, k_prime, split, om, epsilon, 1.0, 1.0, w, w_prime)?.r)
}

#[allow(clippy::too_many_arguments)]
fn pos(
    u: Configuration,
    k: &CantorIfs,
    k_prime: &CantorIfs,
    split: &AlphabetSplit,
    omega: Omega,
    epsilon: f64,
    c1: f64,
    rho: f64,
    w: &Word,
    w_prime: &Word,
) -> Result<Configuration> {
    if w.is_empty() || w_prime.is_empty() {
        return Err(Error::EmptyWord);
    }
    let lead = PerturbedLabel::new(k, split, w.first(), omega, epsilon)?;
    let mut f = perturb_similarity(k.map(lead.label), omega, c1, rho);
    for &a in &w.letters()[1..] {
        f = f.compose(k.map(a));
    }
    Ok(renormalize(u, &f, &k_prime.compose(w_prime)))
}

/// Letters allowed in the four positions of a row.
#[derive(Clone, Debug)]
pub(crate) struct RowAlphabets {
    pub a1: Vec<usize>,
    pub a1_prime: Vec<usize>,
    pub a2: Vec<usize>,
    pub a2_prime: Vec<usize>,
}

impl RowAlphabets {
    pub fn new(split: &AlphabetSplit, k_prime: &CantorIfs, mode: Mode) -> Self {
        let all_prime: Vec<usize> = (0..k_prime.len()).collect();
        let (a1_prime, a2_prime) = match mode {
            Mode::CrossSum => (all_prime.clone(), all_prime),
            Mode::SelfSum => (split.a2(), split.a2()),
        };
        Self {
            a1: split.a1(),
            a1_prime,
            a2: split.a2(),
            a2_prime,
        }
    }
}

/// Stored data for one row of an `L(r)` witness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRow {
    pub a1: String,
    pub a1_prime: String,
    /// `(γ, a2, a2')` for every sampled `γ` that has a valid pair.
    pub gammas: Vec<WitnessGamma>,
    pub phi_measure: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessGamma {
    pub gamma: f64,
    pub a2: String,
    pub a2_prime: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LWitness {
    pub r: f64,
    pub t: f64,
    pub rows: Vec<WitnessRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LSet {
    pub r: f64,
    pub set: IntervalSet,
    pub measure: f64,
}

/// Everything needed to evaluate `L(r)` for many `r`.
pub struct LBuilder<'a> {
    pub k: &'a CantorIfs,
    pub k_prime: &'a CantorIfs,
    pub split: &'a AlphabetSplit,
    pub params: &'a LParams,
    pub e: &'a ESet,
    alph: RowAlphabets,
    gammas: Vec<f64>,
    /// `f_{a1}^{γ,0} ∘ f_{a2}` indexed by `[a1 index][γ index][a2 index]`.
    left: Vec<Vec<Vec<Similarity>>>,
    /// `f'_{a1'} ∘ f'_{a2'}` indexed by `[a1' index][a2' index]`.
    right: Vec<Vec<Similarity>>,
}

impl<'a> LBuilder<'a> {
    pub fn new(
        k: &'a CantorIfs,
        k_prime: &'a CantorIfs,
        split: &'a AlphabetSplit,
        params: &'a LParams,
        e: &'a ESet,
    ) -> Result<Self> {
        let alph = RowAlphabets::new(split, k_prime, params.mode);
        if alph.a1.len() < params.n_rows {
            return Err(Error::RowsUnreachable {
                needed: params.n_rows,
                available: alph.a1.len(),
            });
        }
        if params.gamma_points == 0 {
            return Err(Error::InvalidArgument("gamma grid needs at least one point".into()));
        }
        let gammas = params.gamma_grid();
        let left = alph
            .a1
            .iter()
            .map(|&a1| {
                gammas
                    .iter()
                    .map(|&g| {
                        let f1 = perturb_similarity(k.map(a1), Omega { gamma: g, delta: 0.0 }, params.c1, params.rho);
                        alph.a2.iter().map(|&a2| f1.compose(k.map(a2))).collect()
                    })
                    .collect()
            })
            .collect();
        let right = alph
            .a1_prime
            .iter()
            .map(|&b1| alph.a2_prime.iter().map(|&b2| k_prime.map(b1).compose(k_prime.map(b2))).collect())
            .collect();
        Ok(Self {
            k,
            k_prime,
            split,
            params,
            e,
            alph,
            gammas,
            left,
            right,
        })
    }

    fn window(&self) -> Interval {
        Interval::new(-1.0, self.params.m_bound)
    }

    /// Translations served by row `(a1, a1')` at grid value `γ_g`.
    fn row_gamma_set(&self, r: f64, i: usize, j: usize, g: usize, out: &mut Vec<Interval>) {
        let m = self.params.m_bound;
        let start = out.len();
        for f in &self.left[i][g] {
            for fp in &self.right[j] {
                if !self.e.contains(r * fp.ratio / f.ratio) {
                    continue;
                }
                let c = r * fp.translation - f.translation;
                out.push(Interval::new(c - m * f.ratio, c + m * f.ratio));
            }
        }
        let merged = IntervalSet::from_intervals(out.drain(start..));
        out.extend_from_slice(merged.intervals());
    }

    /// Translations served by `a1` with some `a1'`.
    fn letter_set(&self, r: f64, i: usize) -> IntervalSet {
        let need = self.params.min_gamma_count();
        let mut per_prime = Vec::new();
        let mut buf = Vec::new();
        for j in 0..self.alph.a1_prime.len() {
            buf.clear();
            for g in 0..self.gammas.len() {
                self.row_gamma_set(r, i, j, g, &mut buf);
            }
            per_prime.extend_from_slice(coverage_at_least(&buf, need).intervals());
        }
        IntervalSet::from_intervals(per_prime)
    }

    pub fn build(&self, r: f64) -> LSet {
        let mut all = Vec::new();
        for i in 0..self.alph.a1.len() {
            all.extend_from_slice(self.letter_set(r, i).intervals());
        }
        let set = coverage_at_least(&all, self.params.n_rows).intersect_interval(&self.window());
        LSet {
            r,
            measure: set.measure(),
            set,
        }
    }

    /// Rows certifying `t ∈ L(r)`, or `None` if `t` is not admitted.
    pub fn witness(&self, r: f64, t: f64) -> Option<LWitness> {
        let m = self.params.m_bound;
        let w = self.window();
        if !(t > w.lo && t < w.hi) {
            return None;
        }
        let need = self.params.min_gamma_count();
        let mut rows = Vec::new();
        for (i, &a1) in self.alph.a1.iter().enumerate() {
            if rows.len() == self.params.n_rows {
                break;
            }
            for (j, &b1) in self.alph.a1_prime.iter().enumerate() {
                let mut gammas = Vec::new();
                for (g, &gamma) in self.gammas.iter().enumerate() {
                    let hit = self.left[i][g].iter().enumerate().find_map(|(p, f)| {
                        self.right[j].iter().enumerate().find_map(|(q, fp)| {
                            let v = renormalize(Configuration { r, t }, f, fp);
                            (self.e.contains(v.r) && v.t.abs() <= m).then_some((p, q))
                        })
                    });
                    if let Some((p, q)) = hit {
                        gammas.push(WitnessGamma {
                            gamma,
                            a2: self.k.labels()[self.alph.a2[p]].clone(),
                            a2_prime: self.k_prime.labels()[self.alph.a2_prime[q]].clone(),
                        });
                    }
                }
                if gammas.len() >= need {
                    rows.push(WitnessRow {
                        a1: self.k.labels()[a1].clone(),
                        a1_prime: self.k_prime.labels()[b1].clone(),
                        phi_measure: gammas.len() as f64 * self.params.gamma_cell(),
                        gammas,
                    });
                    break;
                }
            }
        }
        (rows.len() >= self.params.n_rows).then_some(LWitness { r, t, rows })
    }

    /// Re-check every stored `(γ, a2, a2')` of a witness from scratch.
    pub fn verify_witness(&self, w: &LWitness) -> Result<bool> {
        let p = self.params;
        let u = Configuration { r: w.r, t: w.t };
        let mut seen = std::collections::BTreeSet::new();
        for row in &w.rows {
            if !seen.insert(row.a1.clone()) || !(row.phi_measure > p.c7) {
                return Ok(false);
            }
            for g in &row.gammas {
                let word = Word::from_labels(self.k, &[&row.a1, &g.a2])?;
                let word_p = Word::from_labels(self.k_prime, &[&row.a1_prime, &g.a2_prime])?;
                if self.split.in_a1(word.letters()[1]) {
                    return Ok(false);
                }
                let om = Omega {
                    gamma: g.gamma,
                    delta: 0.0,
                };
                let t_hat = pos_t(u, self.k, self.k_prime, self.split, om, p.epsilon, p.c1, p.rho, &word, &word_p)?;
                let r_hat = pos_r(u, self.k, self.k_prime, self.split, g.gamma, p.epsilon, &word, &word_p)?;
                if !(self.e.contains(r_hat) && t_hat.abs() <= p.m_bound) {
                    return Ok(false);
                }
            }
        }
        Ok(seen.len() >= p.n_rows)
    }
}
