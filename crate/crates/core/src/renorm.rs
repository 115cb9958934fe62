//! Configurations `(r, t)` and renormalization operators.
//!
//! A configuration is normalized so that the horizontal embedding is the
//! identity and the vertical one is `y ↦ r y`; the line is `y = x + t`.
//! Zooming into the rectangle `f_w(I) × f'_{w'}(I)` and normalizing back
//! gives `r̂ = r Λ'/Λ` and `t̂ = (t + V - r V')/Λ` where `f_w(x) = Λx + V`
//! and `f'_{w'}(x) = Λ'x + V'`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ifs::{AlphabetSplit, CantorIfs, Similarity, Word};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub r: f64,
    pub t: f64,
}

impl Configuration {
    pub fn new(r: f64, t: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "configuration needs r > 0 and finite t, got ({r}, {t})"
            )));
        }
        Ok(Self { r, t })
    }

    /// Max-metric distance.
    pub fn distance(&self, other: &Configuration) -> f64 {
        (self.r - other.r).abs().max((self.t - other.t).abs())
    }

    pub fn within_bounds(&self, m: f64) -> bool {
        1.0 / m < self.r && self.r < m && self.t.abs() < m
    }
}

/// `(γ, δ)`: relative length change and center shift in units of `c1 ρ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Omega {
    pub gamma: f64,
    pub delta: f64,
}

impl Omega {
    pub const ZERO: Omega = Omega {
        gamma: 0.0,
        delta: 0.0,
    };
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerturbedLabel {
    pub label: usize,
    pub omega: Omega,
}

impl PerturbedLabel {
    pub fn new(ifs: &CantorIfs, split: &AlphabetSplit, label: usize, omega: Omega, epsilon: f64) -> Result<Self> {
        if label >= ifs.len() {
            return Err(Error::LabelOutOfRange {
                index: label,
                size: ifs.len(),
            });
        }
        if !split.in_a1(label) {
            return Err(Error::NotPerturbable(ifs.labels()[label].clone()));
        }
        check_omega(omega, epsilon)?;
        Ok(Self { label, omega })
    }
}

fn check_omega(omega: Omega, epsilon: f64) -> Result<()> {
    if !(omega.gamma.abs() < epsilon) {
        return Err(Error::PerturbationRange(format!(
            "gamma = {} outside (-{epsilon}, {epsilon})",
            omega.gamma
        )));
    }
    if !(omega.delta.abs() < 1.0) {
        return Err(Error::PerturbationRange(format!("delta = {} outside (-1, 1)", omega.delta)));
    }
    Ok(())
}

/// `f_a^ω`: length scaled by `1 + γ`, center moved by `δ c1 ρ`.
pub fn perturb_similarity(map: &Similarity, omega: Omega, c1: f64, rho: f64) -> Similarity {
    let ratio = (1.0 + omega.gamma) * map.ratio;
    let center = map.center() + omega.delta * c1 * rho;
    Similarity::new(ratio, center - 0.5 * ratio)
}

pub fn perturbed_map(ifs: &CantorIfs, p: &PerturbedLabel, c1: f64, rho: f64) -> Similarity {
    perturb_similarity(ifs.map(p.label), p.omega, c1, rho)
}

/// One `(γ, δ)` per perturbable letter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationVector {
    pub epsilon: f64,
    pub rho: f64,
    pub c1: f64,
    a1: Vec<usize>,
    /// Indexed by label; `None` for unperturbed letters.
    omegas: Vec<Option<Omega>>,
}

impl PerturbationVector {
    pub fn zero(alphabet_size: usize, a1: &[usize], epsilon: f64, rho: f64, c1: f64) -> Self {
        let mut omegas = vec![None; alphabet_size];
        for &a in a1 {
            omegas[a] = Some(Omega::ZERO);
        }
        let mut a1 = a1.to_vec();
        a1.sort_unstable();
        Self {
            epsilon,
            rho,
            c1,
            a1,
            omegas,
        }
    }

    pub fn set(&mut self, label: usize, omega: Omega) -> Result<()> {
        match self.omegas.get(label) {
            None => Err(Error::LabelOutOfRange {
                index: label,
                size: self.omegas.len(),
            }),
            Some(None) => Err(Error::NotPerturbable(label.to_string())),
            Some(Some(_)) => {
                check_omega(omega, self.epsilon)?;
                self.omegas[label] = Some(omega);
                Ok(())
            }
        }
    }

    pub fn get(&self, label: usize) -> Option<Omega> {
        self.omegas.get(label).copied().flatten()
    }

    pub fn a1(&self) -> &[usize] {
        &self.a1
    }

    pub fn alphabet_size(&self) -> usize {
        self.omegas.len()
    }

    /// The perturbed family, letter by letter.
    pub fn maps(&self, ifs: &CantorIfs) -> Vec<Similarity> {
        ifs.maps()
            .iter()
            .enumerate()
            .map(|(a, m)| match self.get(a) {
                Some(om) => perturb_similarity(m, om, self.c1, self.rho),
                None => *m,
            })
            .collect()
    }

    /// `K^ω` as an IFS; fails if a perturbed image leaves `[0,1]` or the
    /// images stop being disjoint.
    pub fn apply(&self, ifs: &CantorIfs) -> Result<CantorIfs> {
        let maps = self.maps(ifs);
        for (a, m) in maps.iter().enumerate() {
            if self.get(a).is_some() && !m.maps_unit_into_unit(0.0) {
                return Err(Error::PerturbedEscape {
                    label: ifs.labels()[a].clone(),
                    image_lo: m.translation,
                    image_hi: m.translation + m.ratio,
                });
            }
        }
        let out = ifs.with_maps(maps);
        let report = out.validate();
        if !report.is_ok() {
            return Err(Error::InvalidIfs(report.to_string()));
        }
        Ok(out)
    }
}

/// `f_{a_1} ∘ ... ∘ f_{a_n}` with perturbed letters substituted at every
/// occurrence.
pub fn compose_words(ifs: &CantorIfs, w: &Word, pert: Option<&PerturbationVector>) -> Similarity {
    match pert {
        None => ifs.compose(w),
        Some(p) => w.letters().iter().fold(Similarity::IDENTITY, |acc, &a| {
            let m = match p.get(a) {
                Some(om) => perturb_similarity(ifs.map(a), om, p.c1, p.rho),
                None => *ifs.map(a),
            };
            acc.compose(&m)
        }),
    }
}

/// Renormalize into the rectangle `f(I) × f'(I)`.
#[inline]
pub fn renormalize(u: Configuration, f: &Similarity, f_prime: &Similarity) -> Configuration {
    Configuration {
        r: u.r * f_prime.ratio / f.ratio,
        t: (u.t + f.translation - u.r * f_prime.translation) / f.ratio,
    }
}

pub fn apply_renorm(
    u: Configuration,
    k: &CantorIfs,
    k_prime: &CantorIfs,
    w: &Word,
    w_prime: &Word,
    pert: Option<&PerturbationVector>,
) -> Result<Configuration> {
    for (word, ifs) in [(w, k), (w_prime, k_prime)] {
        if let Some(&bad) = word.letters().iter().find(|&&a| a >= ifs.len()) {
            return Err(Error::LabelOutOfRange {
                index: bad,
                size: ifs.len(),
            });
        }
    }
    let f = compose_words(k, w, pert);
    let fp = k_prime.compose(w_prime);
    Ok(renormalize(u, &f, &fp))
}
