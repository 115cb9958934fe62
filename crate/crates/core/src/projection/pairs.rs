//! Projected intervals `J(a, a')` of cylinder pairs and the good/bad
//! classification by crowding of their centers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ifs::CantorIfs;
use crate::interval::{Interval, IntervalSet};

/// `J(a, a') = {y - x : x ∈ I(a), y ∈ r I'(a')}`.
pub fn projected_interval(k: &CantorIfs, k_prime: &CantorIfs, r: f64, a: usize, a_prime: usize) -> Interval {
    let x = k.map(a).image();
    let y = k_prime.map(a_prime).image();
    Interval::new(r * y.lo - x.hi, r * y.hi - x.lo)
}

pub fn union_measure(k: &CantorIfs, k_prime: &CantorIfs, r: f64, pairs: &[(usize, usize)]) -> f64 {
    IntervalSet::from_intervals(pairs.iter().map(|&(a, b)| projected_interval(k, k_prime, r, a, b))).measure()
}

/// All of `A × A'`.
pub fn all_pairs(k: &CantorIfs, k_prime: &CantorIfs) -> Vec<(usize, usize)> {
    (0..k.len())
        .flat_map(|a| (0..k_prime.len()).map(move |b| (a, b)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodBadParams {
    pub rho: f64,
    pub c6: f64,
    pub c9: f64,
    pub d: f64,
    pub d_prime: f64,
    /// Used only for the reported bound on the number of bad pairs.
    pub c5: Option<f64>,
    /// Accept families with `|B| ≤ |A × A'| / 24`.
    pub lenient: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairClass {
    pub a: String,
    pub a_prime: String,
    pub center: f64,
    /// Centers of `J` within the crowding radius, this pair included.
    pub neighbors: usize,
    pub good: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodBadReport {
    pub r: f64,
    pub c6: f64,
    pub c9: f64,
    pub radius: f64,
    pub max_neighbors: f64,
    pub pairs: Vec<PairClass>,
    pub good: usize,
    pub bad: usize,
    /// `6 c5 c6 c9³ ρ^{-(d+d')/2}` when `c5` is known.
    pub bad_bound: Option<f64>,
    pub good_at_least_half: bool,
}

impl GoodBadReport {
    pub fn good_fraction(&self) -> f64 {
        self.good as f64 / (self.good + self.bad) as f64
    }

    pub fn good_pairs(&self) -> impl Iterator<Item = &PairClass> {
        self.pairs.iter().filter(|p| p.good)
    }
}

/// A pair is good when at most `c6^-1 ρ^{-(d+d'-1)/2}` of the intervals
/// `J(ã, ã')`, `(ã, ã') ∈ B`, have centers closer than `c9^-1 ρ^{1/2}` to
/// its own center.
pub fn classify_good_bad(
    k: &CantorIfs,
    k_prime: &CantorIfs,
    r: f64,
    pairs: &[(usize, usize)],
    params: &GoodBadParams,
) -> Result<GoodBadReport> {
    let full = k.len() * k_prime.len();
    if !params.lenient && 24 * pairs.len() <= full {
        return Err(Error::PairFamilyTooSmall {
            size: pairs.len(),
            bound: full as f64 / 24.0,
        });
    }
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("empty pair family".into()));
    }
    let radius = params.rho.sqrt() / params.c9;
    let max_neighbors = params.rho.powf(-(params.d + params.d_prime - 1.0) / 2.0) / params.c6;
    let centers: Vec<f64> = pairs
        .iter()
        .map(|&(a, b)| projected_interval(k, k_prime, r, a, b).center())
        .collect();
    let mut sorted = centers.clone();
    sorted.sort_by(f64::total_cmp);
    let classes: Vec<PairClass> = pairs
        .iter()
        .zip(&centers)
        .map(|(&(a, b), &c)| {
            // Strictly inside (c - radius, c + radius).
            let lo = sorted.partition_point(|&x| x <= c - radius);
            let hi = sorted.partition_point(|&x| x < c + radius);
            let neighbors = hi - lo;
            PairClass {
                a: k.labels()[a].clone(),
                a_prime: k_prime.labels()[b].clone(),
                center: c,
                neighbors,
                good: neighbors as f64 <= max_neighbors,
            }
        })
        .collect();
    let good = classes.iter().filter(|p| p.good).count();
    let bad = classes.len() - good;
    Ok(GoodBadReport {
        r,
        c6: params.c6,
        c9: params.c9,
        radius,
        max_neighbors,
        good,
        bad,
        bad_bound: params
            .c5
            .map(|c5| 6.0 * c5 * params.c6 * params.c9.powi(3) * params.rho.powf(-(params.d + params.d_prime) / 2.0)),
        good_at_least_half: 2 * good >= classes.len(),
        pairs: classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(lenient: bool) -> GoodBadParams {
        GoodBadParams {
            rho: 1e-4,
            c6: 0.1,
            c9: 10.0,
            d: 0.6,
            d_prime: 0.6,
            c5: Some(2.0),
            lenient,
        }
    }

    #[test]
    fn single_pair_needs_lenient_mode() {
        let k = CantorIfs::from_pairs(&(0..10).map(|i| (0.05, 0.1 * i as f64)).collect::<Vec<_>>());
        assert!(matches!(
            classify_good_bad(&k, &k, 1.0, &[(0, 0)], &params(false)),
            Err(Error::PairFamilyTooSmall { .. })
        ));
        let rep = classify_good_bad(&k, &k, 1.0, &[(0, 0)], &params(true)).unwrap();
        assert_eq!((rep.good, rep.bad), (1, 0));
    }

    #[test]
    fn stacked_centers_are_bad() {
        // Diagonal pairs all project to center 0.
        let pairs: Vec<(f64, f64)> = (0..40).map(|i| (0.01, 0.02 * i as f64)).collect();
        let k = CantorIfs::from_pairs(&pairs);
        let fam: Vec<(usize, usize)> = (0..40).map(|i| (i, i)).collect();
        let p = GoodBadParams {
            rho: 0.01,
            c6: 1.0,
            c9: 1.0,
            ..params(true)
        };
        let rep = classify_good_bad(&k, &k, 1.0, &fam, &p).unwrap();
        assert!(rep.max_neighbors < 40.0);
        assert_eq!(rep.bad, 40);
        assert_eq!(rep.good + rep.bad, fam.len());
    }

    #[test]
    fn union_measure_examples() {
        let k = CantorIfs::middle_thirds();
        // J(L, L) = [-1/3, 1/3], J(R, L) = [-1, -1/3].
        assert!((union_measure(&k, &k, 1.0, &[(0, 0), (1, 0)]) - 4.0 / 3.0).abs() < 1e-15);
        // J(L, L) and J(R, R) coincide.
        let nested = union_measure(&k, &k, 1.0, &[(0, 0), (1, 1)]);
        assert!((nested - 2.0 / 3.0).abs() < 1e-15);
    }
}
