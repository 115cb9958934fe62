//! Histogram of the pushforward of `μ × μ'_r` under `(x, y) ↦ y - x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ifs::{CantorIfs, MeasureWeights};
use crate::interval::{Interval, IntervalSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub r: f64,
    pub depth: usize,
    pub bin_width: f64,
    /// Left edge of the first bin.
    pub origin: f64,
    pub bins: Vec<f64>,
    pub total_mass: f64,
    /// Projection of the hull rectangle.
    pub support: Interval,
}

impl DensityProfile {
    pub fn bin_center(&self, i: usize) -> f64 {
        self.origin + (i as f64 + 0.5) * self.bin_width
    }

    pub fn bin_edges(&self, i: usize) -> Interval {
        let lo = self.origin + i as f64 * self.bin_width;
        Interval::new(lo, lo + self.bin_width)
    }
}

/// Distribution function of `s - lo` for `s` the sum of independent uniform
/// variables on intervals of lengths `a` and `b` (a trapezoid).
#[inline]
fn trapezoid_cdf(z: f64, a: f64, b: f64) -> f64 {
    let (p, q) = if a <= b { (a, b) } else { (b, a) };
    if z <= 0.0 {
        0.0
    } else if z >= p + q {
        1.0
    } else if p == 0.0 {
        z / q
    } else if z <= p {
        z * z / (2.0 * p * q)
    } else if z <= q {
        (z - 0.5 * p) / q
    } else {
        let w = p + q - z;
        1.0 - w * w / (2.0 * p * q)
    }
}

/// Project the rectangles `I(w) × r I'(w')` at depth `depth` onto the
/// `t`-axis with the natural self-similar weights.
pub fn density_profile(k: &CantorIfs, k_prime: &CantorIfs, r: f64, depth: usize, bin_width: f64) -> Result<DensityProfile> {
    let w = MeasureWeights::natural(k)?;
    let wp = MeasureWeights::natural(k_prime)?;
    density_profile_weighted(k, k_prime, &w, &wp, r, depth, bin_width)
}

/// Same as [`density_profile`] with explicit weights.
///
/// Each rectangle's mass is spread over its projected interval with the
/// exact trapezoidal law of `y - x` for the uniform measure on the
/// rectangle, so bin masses are exact for that model.
pub fn density_profile_weighted(
    k: &CantorIfs,
    k_prime: &CantorIfs,
    weights: &MeasureWeights,
    weights_prime: &MeasureWeights,
    r: f64,
    depth: usize,
    bin_width: f64,
) -> Result<DensityProfile> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("r must be positive, got {r}")));
    }
    let hull = k.hull();
    let hull_p = k_prime.hull();
    let support = Interval::new(r * hull_p.lo - hull.hi, r * hull_p.hi - hull.lo);
    if !(bin_width > 0.0) || bin_width >= support.length() {
        return Err(Error::DegenerateHistogram {
            bin_width,
            support: support.length(),
        });
    }
    // Bins are centered on the support so that symmetric inputs give
    // symmetric histograms.
    let n = (support.length() / bin_width).ceil() as usize;
    let origin = support.center() - 0.5 * n as f64 * bin_width;
    let mut bins = vec![0.0; n];

    let xs = k.cylinder_maps(depth);
    let xw = weights.level_weights(depth);
    let ys = k_prime.cylinder_maps(depth);
    let yw = weights_prime.level_weights(depth);
    let x_len = hull.length();
    let y_len = hull_p.length();

    for (fx, &mx) in xs.iter().zip(&xw) {
        let a = fx.ratio * x_len;
        let x0 = fx.apply(hull.lo);
        for (fy, &my) in ys.iter().zip(&yw) {
            let b = r * fy.ratio * y_len;
            let lo = r * fy.apply(hull_p.lo) - x0 - a;
            let hi = lo + a + b;
            let mass = mx * my;
            let first = (((lo - origin) / bin_width).floor().max(0.0) as usize).min(n - 1);
            let last = (((hi - origin) / bin_width).floor().max(0.0) as usize).min(n - 1);
            if first == last {
                bins[first] += mass;
                continue;
            }
            let mut prev = 0.0;
            for (i, bin) in bins.iter_mut().enumerate().take(last).skip(first) {
                let edge = origin + (i + 1) as f64 * bin_width;
                let c = trapezoid_cdf(edge - lo, a, b);
                *bin += mass * (c - prev);
                prev = c;
            }
            bins[last] += mass * (1.0 - prev);
        }
    }
    let total_mass = bins.iter().sum();
    Ok(DensityProfile {
        r,
        depth,
        bin_width,
        origin,
        bins,
        total_mass,
        support,
    })
}

/// `Σ (m / h)² h`, the squared L² norm of the histogram density.
pub fn l2_norm_estimate(p: &DensityProfile) -> f64 {
    p.bins.iter().map(|m| m * m).sum::<f64>() / p.bin_width
}

/// Union of the projected intervals of all depth-`depth` rectangles.
pub fn projected_cover(k: &CantorIfs, k_prime: &CantorIfs, r: f64, depth: usize) -> IntervalSet {
    let xs = k.cylinder_maps(depth);
    let ys = k_prime.cylinder_maps(depth);
    let hull = k.hull();
    let hull_p = k_prime.hull();
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for fx in &xs {
        let (x0, x1) = (fx.apply(hull.lo), fx.apply(hull.hi));
        for fy in &ys {
            out.push(Interval::new(r * fy.apply(hull_p.lo) - x1, r * fy.apply(hull_p.hi) - x0));
        }
    }
    IntervalSet::from_intervals(out)
}
