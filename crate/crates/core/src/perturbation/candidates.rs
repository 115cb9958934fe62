//! `L⁰`, its neighborhoods `L¹` and `L`, and the net `Δ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lset::LBuilder;
use crate::error::{Error, Result};
use crate::interval::IntervalSet;
use crate::projection::ESet;
use crate::renorm::Configuration;

/// A rectangle of configuration space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub r_lo: f64,
    pub r_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl Window {
    pub fn contains(&self, u: &Configuration) -> bool {
        self.r_lo <= u.r && u.r <= self.r_hi && self.t_lo <= u.t && u.t <= self.t_hi
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CandidateSets {
    pub rho: f64,
    #[serde(rename = "M")]
    pub m_bound: f64,
    pub r_lo: f64,
    pub r_step: f64,
    /// `L(r_j)` by grid index, standing for the band `|r - r_j| ≤ step/2`;
    /// `None` where `r_j` is not in `E`.
    pub rows: Vec<Option<IntervalSet>>,
    pub e: ESet,
    pub delta: Vec<Configuration>,
    pub delta_spacing: f64,
    pub delta_window: Window,
    /// Grid indices of `delta`, sorted.
    #[serde(skip)]
    delta_keys: Vec<(i64, i64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateParams {
    pub r_step: f64,
    pub delta_spacing: f64,
    pub delta_window: Window,
    pub max_delta: usize,
}

/// Compute `L(r)` on the uniform `r`-grid of `(M^-1, M)`, rows outside
/// `E` left empty. The result has no `Δ` yet.
pub fn build_rows(builder: &LBuilder<'_>, r_step: f64) -> Result<CandidateSets> {
    let e = builder.e;
    let m = builder.params.m_bound;
    if !(r_step > 0.0) {
        return Err(Error::InvalidArgument("grid steps must be positive".into()));
    }
    let r_lo = 1.0 / m + 0.5 * r_step;
    let n = ((m - 1.0 / m) / r_step).floor() as usize;
    let rows: Vec<Option<IntervalSet>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let r = r_lo + j as f64 * r_step;
            e.contains(r).then(|| builder.build(r).set)
        })
        .collect();
    if rows.iter().all(|r| r.as_ref().is_none_or(|s| s.is_empty())) {
        return Err(Error::EmptyCandidates("L⁰ is empty on every grid row".into()));
    }
    Ok(CandidateSets {
        rho: builder.params.rho,
        m_bound: m,
        r_lo,
        r_step,
        rows,
        e: e.clone(),
        delta: Vec::new(),
        delta_spacing: 0.0,
        delta_window: Window {
            r_lo: 0.0,
            r_hi: 0.0,
            t_lo: 0.0,
            t_hi: 0.0,
        },
        delta_keys: Vec::new(),
    })
}

/// Rows of `L⁰` plus `Δ`: the points of a square grid in the window that
/// lie in `L¹`.
pub fn build_candidate_sets(builder: &LBuilder<'_>, params: &CandidateParams) -> Result<CandidateSets> {
    build_rows(builder, params.r_step)?.with_delta(params)
}

impl CandidateSets {
    pub fn with_delta(&self, params: &CandidateParams) -> Result<CandidateSets> {
        let s = params.delta_spacing;
        if !(s > 0.0) {
            return Err(Error::InvalidArgument("Δ spacing must be positive".into()));
        }
        let w = params.delta_window;
        let (i0, i1) = ((w.r_lo / s).ceil() as i64, (w.r_hi / s).floor() as i64);
        let (j0, j1) = ((w.t_lo / s).ceil() as i64, (w.t_hi / s).floor() as i64);
        let cells = (i1 - i0 + 1).max(0) as u128 * (j1 - j0 + 1).max(0) as u128;
        if cells > 64 * params.max_delta as u128 {
            return Err(Error::InvalidArgument(format!(
                "Δ window holds {cells} grid points at spacing {s}; widen the spacing or shrink the window"
            )));
        }
        let mut out = CandidateSets {
            delta: Vec::new(),
            delta_keys: Vec::new(),
            delta_spacing: s,
            delta_window: w,
            ..self.clone()
        };
        for i in i0..=i1 {
            for j in j0..=j1 {
                let u = Configuration {
                    r: i as f64 * s,
                    t: j as f64 * s,
                };
                if u.r > 0.0 && out.in_l1(&u) {
                    out.delta.push(u);
                    out.delta_keys.push((i, j));
                    if out.delta.len() > params.max_delta {
                        return Err(Error::InvalidArgument(format!(
                            "Δ exceeds {} points; widen the spacing or shrink the window",
                            params.max_delta
                        )));
                    }
                }
            }
        }
        if out.delta.is_empty() {
            return Err(Error::EmptyCandidates("no Δ point in the window lies in L¹".into()));
        }
        Ok(out)
    }

    pub fn row_r(&self, j: usize) -> f64 {
        self.r_lo + j as f64 * self.r_step
    }

    /// Rows whose band comes within `radius` of `r`.
    fn rows_near(&self, r: f64, radius: f64) -> impl Iterator<Item = (usize, &IntervalSet)> {
        let reach = radius + 0.5 * self.r_step;
        let lo = ((r - reach - self.r_lo) / self.r_step).ceil().max(0.0) as usize;
        let hi = ((r + reach - self.r_lo) / self.r_step).floor();
        let hi = if hi < 0.0 { 0 } else { (hi as usize + 1).min(self.rows.len()) };
        (lo..hi.max(lo)).filter_map(move |j| {
            let rj = self.row_r(j);
            let band_gap = ((r - rj).abs() - 0.5 * self.r_step).max(0.0);
            match &self.rows[j] {
                Some(set) if band_gap < radius => Some((j, set)),
                _ => None,
            }
        })
    }

    /// `r ∈ E` and `t ∈ L(r_j)` for the row `r_j` nearest to `r`.
    pub fn in_l0(&self, u: &Configuration) -> bool {
        if !self.e.contains(u.r) {
            return false;
        }
        let j = ((u.r - self.r_lo) / self.r_step).round();
        if j < 0.0 || j as usize >= self.rows.len() {
            return false;
        }
        match &self.rows[j as usize] {
            Some(set) => set.contains(u.t),
            None => false,
        }
    }

    /// Within `radius` of `L⁰` in the max metric.
    pub fn in_neighborhood(&self, u: &Configuration, radius: f64) -> bool {
        self.rows_near(u.r, radius).any(|(_, set)| set.distance(u.t) < radius)
    }

    pub fn in_l1(&self, u: &Configuration) -> bool {
        self.in_neighborhood(u, self.rho)
    }

    pub fn in_l(&self, u: &Configuration) -> bool {
        self.in_neighborhood(u, 0.5 * self.rho)
    }

    /// `L(r_j)` for the row nearest to `r`.
    pub fn l_at(&self, r: f64) -> Option<&IntervalSet> {
        let j = ((r - self.r_lo) / self.r_step).round();
        if j < 0.0 {
            return None;
        }
        self.rows.get(j as usize).and_then(|s| s.as_ref())
    }

    /// Closest point of `Δ`, searching nearby grid cells.
    pub fn nearest_delta(&self, u: &Configuration) -> Option<(Configuration, f64)> {
        if self.delta_keys.len() != self.delta.len() {
            return self.delta.iter().map(|d| (*d, d.distance(u))).min_by(|a, b| a.1.total_cmp(&b.1));
        }
        let s = self.delta_spacing;
        let (ci, cj) = ((u.r / s).round() as i64, (u.t / s).round() as i64);
        let mut best: Option<(Configuration, f64)> = None;
        for i in ci - 2..=ci + 2 {
            for j in cj - 2..=cj + 2 {
                if let Ok(idx) = self.delta_keys.binary_search(&(i, j)) {
                    let d = self.delta[idx].distance(u);
                    if best.is_none_or(|b| d < b.1) {
                        best = Some((self.delta[idx], d));
                    }
                }
            }
        }
        best
    }

    pub fn computed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.is_some()).count()
    }

    /// Smallest and mean `|L(r)|` over computed rows.
    pub fn l_measure_stats(&self) -> (f64, f64) {
        let ms: Vec<f64> = self.rows.iter().flatten().map(|s| s.measure()).collect();
        let min = ms.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = ms.iter().sum::<f64>() / ms.len().max(1) as f64;
        (min, mean)
    }

    /// Replace `L⁰` by the given rows; for experiments and tests.
    pub fn with_rows(&self, rows: Vec<Option<IntervalSet>>) -> CandidateSets {
        CandidateSets {
            rows,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::{retake_pair, CantorIfs};
    use crate::interval::Interval;
    use crate::perturbation::lset::LParams;
    use crate::projection::ECell;
    use crate::Mode;

    fn full_e(m: f64) -> ESet {
        ESet {
            m_bound: m,
            epsilon: 0.1,
            depth: 0,
            bin_width: 0.1,
            cells: vec![ECell {
                lo: 1.0 / m,
                hi: m,
                r: 1.0,
                l2: 1.0,
                in_e: true,
            }],
            c4: 1.0,
            c5: 2.0,
            excluded_measure: 0.0,
            markov_bound: 0.5,
        }
    }

    #[test]
    fn single_point_geometry() {
        let rho = 0.01;
        let mut rows = vec![None; 10];
        rows[5] = Some(IntervalSet::from_intervals([Interval::new(0.3, 0.3)]));
        let sets = CandidateSets {
            rho,
            m_bound: 4.0,
            r_lo: 0.95,
            r_step: 0.01,
            rows,
            e: full_e(4.0),
            delta: Vec::new(),
            delta_spacing: 0.001,
            delta_window: Window {
                r_lo: 0.9,
                r_hi: 1.1,
                t_lo: 0.2,
                t_hi: 0.4,
            },
            delta_keys: Vec::new(),
        };
        let c = Configuration { r: 1.0, t: 0.3 };
        assert!(sets.in_l0(&c));
        let inside = Configuration { r: 1.0 + 0.012, t: 0.3 + 0.009 };
        assert!(sets.in_l1(&inside));
        assert!(!sets.in_l(&inside));
        assert!(!sets.in_l1(&Configuration { r: 1.0, t: 0.311 }));
    }

    #[test]
    fn delta_is_dense_in_window() {
        let k = CantorIfs::middle_thirds();
        let rho = 3f64.powi(-6);
        let pair = retake_pair(&k, &k, rho, 10.0, Mode::CrossSum).unwrap();
        let p = LParams {
            rho,
            epsilon: 0.05,
            m_bound: 4.0,
            c1: 1.0,
            c6: 0.1,
            c7: 1e-5,
            n_rows: 1,
            mode: Mode::CrossSum,
            gamma_points: 4,
        };
        let e = full_e(4.0);
        let b = LBuilder::new(&pair.k, &pair.k_prime, &pair.split, &p, &e).unwrap();
        let window = Window {
            r_lo: 0.99,
            r_hi: 1.01,
            t_lo: -0.01,
            t_hi: 0.01,
        };
        let params = CandidateParams {
            r_step: 0.02,
            delta_spacing: 0.002,
            delta_window: window,
            max_delta: 10_000,
        };
        let sets = build_candidate_sets(&b, &params).unwrap();
        assert!(!sets.delta.is_empty());
        for d in &sets.delta {
            assert!(sets.in_l1(d) && window.contains(d));
        }
        // Probe the window on a finer grid.
        for i in 0..=40 {
            for j in 0..=40 {
                let u = Configuration {
                    r: 0.99 + 0.0005 * i as f64,
                    t: -0.01 + 0.0005 * j as f64,
                };
                if sets.in_l1(&u) && window.contains(&u) {
                    let (_, dist) = sets.nearest_delta(&u).unwrap();
                    assert!(dist <= params.delta_spacing);
                }
            }
        }
    }
}
