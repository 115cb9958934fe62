//! Scales `r` at which the projected density has small L² norm.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::density::{density_profile_weighted, l2_norm_estimate};
use crate::error::{Error, Result};
use crate::ifs::{CantorIfs, MeasureWeights};
use crate::interval::{Interval, IntervalSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EParams {
    #[serde(rename = "M")]
    pub m_bound: f64,
    pub epsilon: f64,
    pub r_cells: usize,
    pub depth: usize,
    pub bin_width: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ECell {
    pub lo: f64,
    pub hi: f64,
    /// Sample point, the cell midpoint.
    pub r: f64,
    pub l2: f64,
    pub in_e: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ESet {
    #[serde(rename = "M")]
    pub m_bound: f64,
    pub epsilon: f64,
    pub depth: usize,
    pub bin_width: f64,
    pub cells: Vec<ECell>,
    /// Grid estimate of `∫ ‖χ_r‖² dr` over `(M^-1, M)`.
    pub c4: f64,
    pub c5: f64,
    pub excluded_measure: f64,
    /// `c4 / c5`, which bounds the excluded measure.
    pub markov_bound: f64,
}

impl ESet {
    pub fn intervals(&self) -> IntervalSet {
        IntervalSet::from_intervals(self.cells.iter().filter(|c| c.in_e).map(|c| Interval::new(c.lo, c.hi)))
    }

    pub fn contains(&self, r: f64) -> bool {
        self.cell_of(r).is_some_and(|c| c.in_e)
    }

    pub fn cell_of(&self, r: f64) -> Option<&ECell> {
        let i = self.cells.partition_point(|c| c.hi <= r);
        self.cells.get(i).filter(|c| c.lo <= r)
    }

    pub fn measure(&self) -> f64 {
        self.cells.iter().filter(|c| c.in_e).map(|c| c.hi - c.lo).sum()
    }

    /// Cells with `‖χ‖² < c5`, for a different threshold.
    pub fn with_threshold(&self, c5: f64) -> ESet {
        let mut out = self.clone();
        for c in &mut out.cells {
            c.in_e = c.l2 < c5;
        }
        out.c5 = c5;
        out.excluded_measure = out.cells.iter().filter(|c| !c.in_e).map(|c| c.hi - c.lo).sum();
        out.markov_bound = out.c4 / c5;
        out
    }
}

pub fn build_e(k: &CantorIfs, k_prime: &CantorIfs, params: &EParams) -> Result<ESet> {
    let w = MeasureWeights::natural(k)?;
    let wp = MeasureWeights::natural(k_prime)?;
    build_e_weighted(k, k_prime, &w, &wp, params)
}

/// Evaluate `‖χ_r‖²` at the midpoints of a uniform grid on `(M^-1, M)` and
/// keep the sub-level set of the smallest threshold `c5` that excludes
/// measure below `ε/2`.
pub fn build_e_weighted(
    k: &CantorIfs,
    k_prime: &CantorIfs,
    w: &MeasureWeights,
    wp: &MeasureWeights,
    params: &EParams,
) -> Result<ESet> {
    let m = params.m_bound;
    if !(m > 1.0 && m.is_finite()) {
        return Err(Error::InvalidArgument(format!("M must exceed 1, got {m}")));
    }
    if !(params.epsilon > 0.0) || params.r_cells == 0 {
        return Err(Error::InvalidArgument("epsilon and r_cells must be positive".into()));
    }
    let (lo, hi) = (1.0 / m, m);
    let width = (hi - lo) / params.r_cells as f64;
    let half_eps = 0.5 * params.epsilon;
    let total = hi - lo;
    if width >= half_eps && half_eps < total {
        return Err(Error::GridTooCoarse(format!(
            "r-cells of width {width} cannot resolve an excluded measure below {half_eps}"
        )));
    }
    let l2: Vec<f64> = (0..params.r_cells)
        .into_par_iter()
        .map(|i| {
            let r = lo + (i as f64 + 0.5) * width;
            density_profile_weighted(k, k_prime, w, wp, r, params.depth, params.bin_width).map(|p| l2_norm_estimate(&p))
        })
        .collect::<Result<_>>()?;
    let c4: f64 = l2.iter().sum::<f64>() * width;

    // Raise the threshold through the sorted values until the cells at or
    // above it weigh less than ε/2.
    let mut sorted = l2.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut c5 = sorted[n - 1].next_up();
    // When ε/2 exceeds the whole range nothing needs excluding.
    for (j, &v) in sorted.iter().enumerate() {
        let above = sorted[j + 1..].iter().filter(|&&x| x > v).count();
        if half_eps < total && (above as f64) * width < half_eps {
            c5 = v.next_up();
            break;
        }
    }
    let cells: Vec<ECell> = l2
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let clo = lo + i as f64 * width;
            ECell {
                lo: clo,
                hi: if i + 1 == params.r_cells { hi } else { clo + width },
                r: lo + (i as f64 + 0.5) * width,
                l2: v,
                in_e: v < c5,
            }
        })
        .collect();
    let excluded_measure = cells.iter().filter(|c| !c.in_e).map(|c| c.hi - c.lo).sum();
    Ok(ESet {
        m_bound: m,
        epsilon: params.epsilon,
        depth: params.depth,
        bin_width: params.bin_width,
        cells,
        c4,
        c5,
        excluded_measure,
        markov_bound: c4 / c5,
    })
}
