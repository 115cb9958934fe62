//! Finite recurrence certificates: configurations, one return step for
//! each, and the `t`-interval covered at a fixed `r`.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::orbit::words_up_to;
use crate::error::{Error, Result};
use crate::ifs::{CantorIfs, Similarity, Word};
use crate::interval::Interval;
use crate::renorm::{apply_renorm, renormalize, Configuration, PerturbationVector};

/// Relative agreement required between a stored and a recomputed image.
pub const IMAGE_MATCH: f64 = 1e-9;

/// Relative tolerance deciding whether a configuration lies on the fiber.
pub const FIBER_MATCH: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub configuration: Configuration,
    pub word: Vec<String>,
    pub word_prime: Vec<String>,
    pub image: Configuration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceCertificate {
    pub r: f64,
    pub covered_t_interval: Interval,
    /// Fiber points are at most this far apart.
    pub resolution: f64,
    #[serde(rename = "M")]
    pub m_bound: f64,
    /// Max-metric distance within which a return image must land.
    pub tolerance: f64,
    pub rho: f64,
    pub entries: Vec<CertificateEntry>,
}

/// Certificates together with the sets they refer to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateBundle {
    pub ifs_k: CantorIfs,
    pub ifs_k_prime: CantorIfs,
    pub certificates: Vec<RecurrenceCertificate>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FailureReason {
    OutOfBounds,
    ImageMismatch { recomputed: Configuration },
    NoLanding { distance: f64 },
    FiberGap { at: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CertificateCheck {
    Ok { entries: usize, fiber_points: usize },
    Failed {
        index: Option<usize>,
        configuration: Option<Configuration>,
        #[serde(flatten)]
        reason: FailureReason,
    },
}

impl CertificateCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, CertificateCheck::Ok { .. })
    }
}

/// Spatial hash with cells of side `cell` in the max metric.
struct PointIndex {
    cell: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
    points: Vec<Configuration>,
}

impl PointIndex {
    fn new(cell: f64) -> Self {
        Self {
            cell,
            cells: HashMap::new(),
            points: Vec::new(),
        }
    }

    fn key(&self, u: &Configuration) -> (i64, i64) {
        ((u.r / self.cell).floor() as i64, (u.t / self.cell).floor() as i64)
    }

    fn insert(&mut self, u: Configuration) -> usize {
        let idx = self.points.len();
        let key = self.key(&u);
        self.cells.entry(key).or_default().push(idx);
        self.points.push(u);
        idx
    }

    /// Drop a point from lookups; its index stays valid.
    fn remove(&mut self, idx: usize) {
        let key = self.key(&self.points[idx]);
        if let Some(ids) = self.cells.get_mut(&key) {
            ids.retain(|&i| i != idx);
        }
    }

    /// Nearest stored point within `radius` cells, max metric.
    fn nearest(&self, u: &Configuration, radius: i64) -> Option<(usize, f64)> {
        let (kr, kt) = self.key(u);
        let mut best: Option<(usize, f64)> = None;
        for dr in -radius..=radius {
            for dt in -radius..=radius {
                if let Some(ids) = self.cells.get(&(kr + dr, kt + dt)) {
                    for &i in ids {
                        let d = self.points[i].distance(u);
                        if best.is_none_or(|b| d < b.1) {
                            best = Some((i, d));
                        }
                    }
                }
            }
        }
        best
    }
}

fn close_rel(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn parse_word(ifs: &CantorIfs, labels: &[String], index: usize) -> Result<Word> {
    if labels.is_empty() {
        return Err(Error::MalformedCertificate(format!("entry {index} has an empty return word")));
    }
    Word::from_labels(ifs, labels)
        .map_err(|e| Error::MalformedCertificate(format!("entry {index}: {e}")))
}

fn check_shape(cert: &RecurrenceCertificate) -> Result<()> {
    if cert.entries.is_empty() {
        return Err(Error::MalformedCertificate("no configurations".into()));
    }
    let finite = [cert.r, cert.resolution, cert.m_bound, cert.tolerance, cert.rho]
        .iter()
        .all(|v| v.is_finite() && *v > 0.0);
    if !finite {
        return Err(Error::MalformedCertificate(
            "r, resolution, M, tolerance and rho must be positive and finite".into(),
        ));
    }
    let iv = cert.covered_t_interval;
    if !(iv.lo.is_finite() && iv.hi.is_finite() && iv.lo < iv.hi) {
        return Err(Error::MalformedCertificate("covered interval must be nonempty".into()));
    }
    Ok(())
}

/// First point of `iv` farther than `resolution / 2` from every fiber point.
fn fiber_gap(sorted: &[f64], iv: Interval, resolution: f64) -> Option<f64> {
    let half = 0.5 * resolution * (1.0 + 1e-9);
    let mut reach = iv.lo;
    for &t in sorted {
        if t - half > reach {
            return Some(reach);
        }
        reach = reach.max(t + half);
        if reach >= iv.hi {
            return None;
        }
    }
    Some(reach)
}

/// Re-check every return step and the fiber coverage.
///
/// With `pert` given, `ifs_k` is the unperturbed family and the perturbation
/// is applied during recomputation.
pub fn verify_certificate(
    cert: &RecurrenceCertificate,
    ifs_k: &CantorIfs,
    ifs_k_prime: &CantorIfs,
    pert: Option<&PerturbationVector>,
) -> Result<CertificateCheck> {
    check_shape(cert)?;
    let mut index = PointIndex::new(cert.tolerance);
    for e in &cert.entries {
        index.insert(e.configuration);
    }
    for (i, e) in cert.entries.iter().enumerate() {
        let u = e.configuration;
        let failed = |reason| CertificateCheck::Failed {
            index: Some(i),
            configuration: Some(u),
            reason,
        };
        if !(u.r.is_finite() && u.t.is_finite()) || !u.within_bounds(cert.m_bound) {
            return Ok(failed(FailureReason::OutOfBounds));
        }
        let w = parse_word(ifs_k, &e.word, i)?;
        let wp = parse_word(ifs_k_prime, &e.word_prime, i)?;
        let v = apply_renorm(u, ifs_k, ifs_k_prime, &w, &wp, pert)?;
        if !close_rel(v.r, e.image.r, IMAGE_MATCH) || !close_rel(v.t, e.image.t, IMAGE_MATCH) {
            return Ok(failed(FailureReason::ImageMismatch { recomputed: v }));
        }
        match index.nearest(&v, 1) {
            Some((_, d)) if d <= cert.tolerance => {}
            other => {
                return Ok(failed(FailureReason::NoLanding {
                    distance: other.map_or(f64::INFINITY, |b| b.1),
                }))
            }
        }
    }
    let mut fiber: Vec<f64> = cert
        .entries
        .iter()
        .filter(|e| close_rel(e.configuration.r, cert.r, FIBER_MATCH))
        .map(|e| e.configuration.t)
        .collect();
    fiber.sort_by(f64::total_cmp);
    if let Some(at) = fiber_gap(&fiber, cert.covered_t_interval, cert.resolution) {
        return Ok(CertificateCheck::Failed {
            index: None,
            configuration: None,
            reason: FailureReason::FiberGap { at },
        });
    }
    Ok(CertificateCheck::Ok {
        entries: cert.entries.len(),
        fiber_points: fiber.len(),
    })
}

pub fn verify_bundle(bundle: &CertificateBundle) -> Result<Vec<CertificateCheck>> {
    bundle
        .certificates
        .iter()
        .map(|c| verify_certificate(c, &bundle.ifs_k, &bundle.ifs_k_prime, None))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosureParams {
    pub r: f64,
    pub covered: Interval,
    pub resolution: f64,
    pub tolerance: f64,
    pub m_bound: f64,
    pub rho: f64,
    pub word_len: usize,
    pub max_points: usize,
}

/// Build a certificate around the fiber `{r} × covered`.
///
/// Each configuration gets the return whose image lands closest to an
/// existing configuration; if none lands within the tolerance, the
/// admissible in-box image nearest to the center of the fiber is added as a
/// new configuration (any in-box image if none is admissible), so the set
/// grows as one cluster until it closes up. A configuration with no in-box
/// return is discarded and the configurations that relied on it choose
/// again. Fails if a fiber point is discarded or once `max_points`
/// configurations would be needed.
pub fn close_certificate<F>(
    k: &CantorIfs,
    k_prime: &CantorIfs,
    params: &ClosureParams,
    admissible: F,
) -> Result<RecurrenceCertificate>
where
    F: Fn(&Configuration) -> bool,
{
    let iv = params.covered;
    if !(iv.hi > iv.lo) || !(params.resolution > 0.0) || !(params.tolerance > 0.0) {
        return Err(Error::InvalidArgument("closure needs a nonempty interval and positive spacings".into()));
    }
    let words: Vec<(Vec<usize>, Similarity)> = words_up_to(k, params.word_len)
        .into_iter()
        .filter(|(w, _)| w.len() == params.word_len)
        .collect();
    let words_p: Vec<(Vec<usize>, Similarity)> = words_up_to(k_prime, params.word_len)
        .into_iter()
        .filter(|(w, _)| w.len() == params.word_len)
        .collect();

    let mut index = PointIndex::new(params.tolerance);
    let n = ((iv.hi - iv.lo) / params.resolution).ceil() as usize;
    for i in 0..=n {
        let t = (iv.lo + i as f64 * params.resolution).min(iv.hi);
        index.insert(Configuration { r: params.r, t });
    }
    let seeds = index.points.len();
    // Chosen return of each point and the point its image relies on.
    let mut returns: Vec<Option<(usize, usize, Configuration)>> = vec![None; seeds];
    let mut target: Vec<Option<usize>> = vec![None; seeds];
    let mut alive = vec![true; seeds];
    let mut dead = PointIndex::new(params.tolerance);
    let mut queue: VecDeque<usize> = (0..seeds).collect();
    let center = Configuration {
        r: params.r,
        t: iv.center(),
    };

    while let Some(p) = queue.pop_front() {
        if !alive[p] {
            continue;
        }
        let u = index.points[p];
        let mut landing: Option<(f64, usize, usize, usize, Configuration)> = None;
        let mut fresh: Option<(f64, usize, usize, Configuration)> = None;
        let mut fallback: Option<(f64, usize, usize, Configuration)> = None;
        for (i, (_, f)) in words.iter().enumerate() {
            for (j, (_, fp)) in words_p.iter().enumerate() {
                let v = renormalize(u, f, fp);
                if !v.within_bounds(params.m_bound) {
                    continue;
                }
                if dead.nearest(&v, 1).is_some_and(|(_, d)| d <= params.tolerance) {
                    continue;
                }
                match index.nearest(&v, 1) {
                    Some((q, d)) if d <= params.tolerance => {
                        if landing.is_none_or(|b| d < b.0) {
                            landing = Some((d, q, i, j, v));
                        }
                    }
                    _ if landing.is_none() => {
                        let d = v.distance(&center);
                        if fresh.is_none_or(|b| d < b.0) && admissible(&v) {
                            fresh = Some((d, i, j, v));
                        }
                        if fallback.is_none_or(|b| d < b.0) {
                            fallback = Some((d, i, j, v));
                        }
                    }
                    _ => {}
                }
            }
        }
        if let Some((_, q, i, j, v)) = landing {
            returns[p] = Some((i, j, v));
            target[p] = Some(q);
            continue;
        }
        let Some((_, i, j, v)) = fresh.or(fallback) else {
            if p < seeds {
                return Err(Error::EmptyCandidates(format!(
                    "fiber configuration ({}, {}) has no return inside the box",
                    u.r, u.t
                )));
            }
            alive[p] = false;
            index.remove(p);
            dead.insert(u);
            for (o, t) in target.iter_mut().enumerate() {
                if *t == Some(p) {
                    *t = None;
                    returns[o] = None;
                    queue.push_back(o);
                }
            }
            continue;
        };
        if index.points.len() >= params.max_points {
            return Err(Error::EmptyCandidates(format!(
                "certificate closure exceeded {} configurations",
                params.max_points
            )));
        }
        let q = index.insert(v);
        returns.push(None);
        target.push(None);
        alive.push(true);
        returns[p] = Some((i, j, v));
        target[p] = Some(q);
        queue.push_back(q);
    }

    let entries = index
        .points
        .iter()
        .zip(&returns)
        .zip(&alive)
        .filter(|(_, &a)| a)
        .map(|((u, ret), _)| {
            let (i, j, v) = ret.expect("every configuration has a return");
            CertificateEntry {
                configuration: *u,
                word: Word::from_indices(words[i].0.clone()).to_labels(k),
                word_prime: Word::from_indices(words_p[j].0.clone()).to_labels(k_prime),
                image: v,
            }
        })
        .collect();
    Ok(RecurrenceCertificate {
        r: params.r,
        covered_t_interval: iv,
        resolution: params.resolution,
        m_bound: params.m_bound,
        tolerance: params.tolerance,
        rho: params.rho,
        entries,
    })
}
