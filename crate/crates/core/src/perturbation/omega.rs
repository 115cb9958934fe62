//! Random perturbations `ω`, returns into `L⁰`, and the search for `ω₀`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::candidates::CandidateSets;
use crate::ifs::{CantorIfs, Similarity};
use crate::renorm::{renormalize, Configuration, Omega, PerturbationVector};
use crate::Mode;

/// Samples per parallel batch of the `ω₀` search.
const BATCH: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaSpace {
    pub alphabet_size: usize,
    pub a1: Vec<usize>,
    pub epsilon: f64,
    pub rho: f64,
    pub c1: f64,
}

/// A uniform draw from `(lo, hi)`, open at both ends.
fn open_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    loop {
        let x = lo + (hi - lo) * rng.gen::<f64>();
        if x > lo && x < hi {
            return x;
        }
    }
}

impl OmegaSpace {
    /// Sample `index` of the stream: `γ ~ U(-ε, ε)`, `δ ~ U(-1, 1)` per
    /// perturbable letter, in label order.
    pub fn sample(&self, seed: u64, index: u64) -> PerturbationVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let mut p = PerturbationVector::zero(self.alphabet_size, &self.a1, self.epsilon, self.rho, self.c1);
        for &a in p.a1().to_vec().iter() {
            let gamma = open_uniform(&mut rng, -self.epsilon, self.epsilon);
            let delta = open_uniform(&mut rng, -1.0, 1.0);
            p.set(a, Omega { gamma, delta })
                .expect("sampled values lie in the open box");
        }
        p
    }
}

/// All length-two composite maps of both families under one `ω`.
pub struct Returns {
    left: Vec<(usize, usize, Similarity)>,
    right: Vec<(usize, usize, Similarity)>,
}

impl Returns {
    pub fn new(k: &CantorIfs, k_prime: &CantorIfs, pert: &PerturbationVector, mode: Mode) -> Self {
        let maps = pert.maps(k);
        let maps_p = match mode {
            // The second factor is the perturbed set itself.
            Mode::SelfSum => maps.clone(),
            Mode::CrossSum => k_prime.maps().to_vec(),
        };
        let pairs = |m: &[Similarity]| {
            let mut out = Vec::with_capacity(m.len() * m.len());
            for (a, f) in m.iter().enumerate() {
                for (b, g) in m.iter().enumerate() {
                    out.push((a, b, f.compose(g)));
                }
            }
            out
        };
        Self {
            left: pairs(&maps),
            right: pairs(&maps_p),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub member: bool,
    pub word: Option<[String; 2]>,
    pub word_prime: Option<[String; 2]>,
    pub image: Option<Configuration>,
}

/// Is there `(b, b') ∈ A² × A'²` with `T^ω_b T'_b'(u) ∈ L⁰`?
pub fn omega_zero_membership(
    u: Configuration,
    pert: &PerturbationVector,
    sets: &CandidateSets,
    k: &CantorIfs,
    k_prime: &CantorIfs,
    mode: Mode,
) -> Membership {
    let ret = Returns::new(k, k_prime, pert, mode);
    match find_return(u, &ret, sets) {
        Some((i, j, v)) => {
            let (a1, a2, _) = ret.left[i];
            let (b1, b2, _) = ret.right[j];
            let kp = if mode == Mode::SelfSum { k } else { k_prime };
            Membership {
                member: true,
                word: Some([k.labels()[a1].clone(), k.labels()[a2].clone()]),
                word_prime: Some([kp.labels()[b1].clone(), kp.labels()[b2].clone()]),
                image: Some(v),
            }
        }
        None => Membership {
            member: false,
            word: None,
            word_prime: None,
            image: None,
        },
    }
}

fn find_return(u: Configuration, ret: &Returns, sets: &CandidateSets) -> Option<(usize, usize, Configuration)> {
    for (i, (_, _, f)) in ret.left.iter().enumerate() {
        for (j, (_, _, fp)) in ret.right.iter().enumerate() {
            let v = renormalize(u, f, fp);
            if sets.in_l0(&v) {
                return Some((i, j, v));
            }
        }
    }
    None
}

/// Composite maps of the first return of `u` into `L⁰` under `pert`.
pub fn find_return_words(
    u: Configuration,
    sets: &CandidateSets,
    k: &CantorIfs,
    k_prime: &CantorIfs,
    pert: &PerturbationVector,
    mode: Mode,
) -> Option<(Similarity, Similarity)> {
    let ret = Returns::new(k, k_prime, pert, mode);
    find_return(u, &ret, sets).map(|(i, j, _)| (ret.left[i].2, ret.right[j].2))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureEstimate {
    pub u: Configuration,
    pub samples: usize,
    pub failures: usize,
    pub estimate: f64,
    /// 95% Wilson score interval.
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// 95% Wilson score interval for `x` successes in `n` trials.
pub fn wilson_interval(x: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n_f = n as f64;
    let p = x as f64 / n_f;
    let denom = 1.0 + z * z / n_f;
    let center = (p + z * z / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z * z / (4.0 * n_f * n_f)).sqrt() / denom;
    // The bounds are exact at the extremes; rounding would leave crumbs.
    let lo = if x == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if x == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Fraction of sampled `ω` with no return of `u` into `L⁰`.
pub fn estimate_failure_probability(
    u: Configuration,
    sets: &CandidateSets,
    k: &CantorIfs,
    k_prime: &CantorIfs,
    space: &OmegaSpace,
    mode: Mode,
    n_samples: usize,
    seed: u64,
) -> FailureEstimate {
    let failures = (0..n_samples as u64)
        .into_par_iter()
        .filter(|&i| {
            let pert = space.sample(seed, i);
            let ret = Returns::new(k, k_prime, &pert, mode);
            find_return(u, &ret, sets).is_none()
        })
        .count();
    let (ci_lo, ci_hi) = wilson_interval(failures, n_samples);
    FailureEstimate {
        u,
        samples: n_samples,
        failures,
        estimate: if n_samples == 0 { 0.0 } else { failures as f64 / n_samples as f64 },
        ci_lo,
        ci_hi,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rejector {
    pub u: Configuration,
    pub rejections: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaSelection {
    pub omega: Option<PerturbationVector>,
    /// Index of the accepted sample plus one, or the budget.
    pub attempts: usize,
    /// Samples whose perturbed family is not a valid Cantor IFS.
    pub invalid: usize,
    /// Points of `Δ` that rejected the most samples, first failure per sample.
    pub hardest: Vec<Rejector>,
}

enum Outcome {
    Accepted,
    Invalid,
    Rejected(usize),
}

/// Seeded rejection sampling for an `ω` that returns every point of `Δ`
/// into `L⁰`. The accepted sample is the lowest-indexed success, so the
/// result does not depend on the number of worker threads.
pub fn select_omega(
    sets: &CandidateSets,
    k: &CantorIfs,
    k_prime: &CantorIfs,
    space: &OmegaSpace,
    mode: Mode,
    budget: usize,
    seed: u64,
) -> OmegaSelection {
    let evaluate = |i: u64| -> Outcome {
        let pert = space.sample(seed, i);
        if pert.apply(k).is_err() {
            return Outcome::Invalid;
        }
        let ret = Returns::new(k, k_prime, &pert, mode);
        match sets.delta.iter().position(|u| find_return(*u, &ret, sets).is_none()) {
            None => Outcome::Accepted,
            Some(idx) => Outcome::Rejected(idx),
        }
    };
    let mut counts = vec![0usize; sets.delta.len()];
    let mut invalid = 0;
    let mut start = 0usize;
    let mut accepted = None;
    while start < budget && accepted.is_none() {
        let end = (start + BATCH).min(budget);
        let outcomes: Vec<Outcome> = (start as u64..end as u64).into_par_iter().map(evaluate).collect();
        for (off, out) in outcomes.into_iter().enumerate() {
            match out {
                Outcome::Accepted => {
                    accepted = Some(start + off);
                    break;
                }
                Outcome::Invalid => invalid += 1,
                Outcome::Rejected(idx) => counts[idx] += 1,
            }
        }
        start = end;
    }
    let mut hardest: Vec<Rejector> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| Rejector {
            u: sets.delta[i],
            rejections: c,
        })
        .collect();
    hardest.sort_by(|a, b| b.rejections.cmp(&a.rejections));
    hardest.truncate(5);
    OmegaSelection {
        omega: accepted.map(|i| space.sample(seed, i as u64)),
        attempts: accepted.map_or(budget, |i| i + 1),
        invalid,
        hardest,
    }
}

/// Check that `pert` returns every point of `Δ` into `L⁰`, re-enumerating
/// all word pairs.
pub fn verify_omega(sets: &CandidateSets, k: &CantorIfs, k_prime: &CantorIfs, pert: &PerturbationVector, mode: Mode) -> bool {
    sets.delta
        .iter()
        .all(|u| omega_zero_membership(*u, pert, sets, k, k_prime, mode).member)
}
