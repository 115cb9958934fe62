//! Self-similar Cantor sets given by iterated function systems of
//! orientation-preserving contracting similarities of `[0, 1]`.

mod closeness;
mod refine;
mod split;

pub use closeness::{epsilon_close, ifs_epsilon_close, EpsilonClosenessReport, IntervalCloseness, LabelCloseness};
pub use refine::{refine_to_scale, refine_words, retake_pair, RetakenPair};
pub use split::{split_alphabet, split_alphabet_self, AlphabetSplit};

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::Mode;

/// Default tolerance for disjointness / containment checks.
pub const GAP_TOLERANCE: f64 = 1e-12;

/// Required accuracy of the Moran equation residual.
pub const MORAN_TOLERANCE: f64 = 1e-12;

/// `f(x) = ratio * x + translation`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    pub ratio: f64,
    pub translation: f64,
}

impl Similarity {
    pub const IDENTITY: Similarity = Similarity {
        ratio: 1.0,
        translation: 0.0,
    };

    pub fn new(ratio: f64, translation: f64) -> Self {
        Self { ratio, translation }
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        self.ratio * x + self.translation
    }

    /// `self ∘ inner`.
    #[inline]
    pub fn compose(&self, inner: &Similarity) -> Similarity {
        Similarity {
            ratio: self.ratio * inner.ratio,
            translation: self.ratio * inner.translation + self.translation,
        }
    }

    /// Image of `[0, 1]`.
    pub fn image(&self) -> Interval {
        Interval::new(self.translation, self.translation + self.ratio)
    }

    pub fn center(&self) -> f64 {
        self.translation + 0.5 * self.ratio
    }

    pub fn fixed_point(&self) -> f64 {
        self.translation / (1.0 - self.ratio)
    }

    pub fn maps_unit_into_unit(&self, tol: f64) -> bool {
        self.translation >= -tol && self.translation + self.ratio <= 1.0 + tol
    }
}

/// A finite alphabet with one contracting similarity per label.
///
/// Construction does not enforce the Cantor set invariants; call
/// [`CantorIfs::validate`] (or use [`CantorIfs::checked`]) to obtain a
/// report of violations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawIfs")]
pub struct CantorIfs {
    labels: Vec<String>,
    maps: Vec<Similarity>,
}

impl CantorIfs {
    pub fn from_parts(labels: Vec<String>, maps: Vec<Similarity>) -> Self {
        Self { labels, maps }
    }

    /// Build and validate.
    pub fn checked(labels: Vec<String>, maps: Vec<Similarity>) -> Result<Self> {
        let ifs = Self::from_parts(labels, maps);
        let report = ifs.validate();
        if report.is_ok() {
            Ok(ifs)
        } else {
            Err(Error::InvalidIfs(report.to_string()))
        }
    }

    /// Labels `"0"`, `"1"`, ... for the given `(ratio, translation)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        Self::from_parts(
            (0..pairs.len()).map(|i| i.to_string()).collect(),
            pairs.iter().map(|&(r, t)| Similarity::new(r, t)).collect(),
        )
    }

    /// Middle-thirds Cantor set with labels `L` and `R`.
    pub fn middle_thirds() -> Self {
        Self::from_parts(
            vec!["L".into(), "R".into()],
            vec![Similarity::new(1.0 / 3.0, 0.0), Similarity::new(1.0 / 3.0, 2.0 / 3.0)],
        )
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn maps(&self) -> &[Similarity] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn map(&self, label: usize) -> &Similarity {
        &self.maps[label]
    }

    pub fn ratio(&self, label: usize) -> f64 {
        self.maps[label].ratio
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn min_ratio(&self) -> f64 {
        self.maps.iter().map(|m| m.ratio).fold(f64::INFINITY, f64::min)
    }

    pub fn max_ratio(&self) -> f64 {
        self.maps.iter().map(|m| m.ratio).fold(0.0, f64::max)
    }

    /// Same maps with some labels replaced.
    pub fn with_maps(&self, maps: Vec<Similarity>) -> Self {
        assert_eq!(maps.len(), self.maps.len());
        Self {
            labels: self.labels.clone(),
            maps,
        }
    }

    /// Conjugate by `x ↦ 1 - x`; the attractor becomes `1 - K`.
    ///
    /// `K + rK'` contains an interval iff `K - r(1 - K')` does.
    pub fn reflected(&self) -> Self {
        Self {
            labels: self.labels.clone(),
            maps: self
                .maps
                .iter()
                .map(|m| Similarity::new(m.ratio, 1.0 - m.ratio - m.translation))
                .collect(),
        }
    }

    /// Convex hull of the attractor: fixed points of the outermost maps.
    pub fn hull(&self) -> Interval {
        let left = self
            .maps
            .iter()
            .min_by(|a, b| a.translation.total_cmp(&b.translation))
            .expect("nonempty IFS");
        let right = self
            .maps
            .iter()
            .max_by(|a, b| (a.translation + a.ratio).total_cmp(&(b.translation + b.ratio)))
            .expect("nonempty IFS");
        Interval::new(left.fixed_point(), right.fixed_point())
    }

    pub fn validate(&self) -> ValidationReport {
        self.validate_with(GAP_TOLERANCE)
    }

    pub fn validate_with(&self, gap_tol: f64) -> ValidationReport {
        let mut violations = Vec::new();
        if self.labels.len() != self.maps.len() {
            violations.push(Violation::LengthMismatch {
                labels: self.labels.len(),
                maps: self.maps.len(),
            });
            return ValidationReport { violations };
        }
        if self.maps.len() < 2 {
            violations.push(Violation::TooFewMaps {
                count: self.maps.len(),
            });
        }
        let mut seen = HashSet::new();
        for label in &self.labels {
            if !seen.insert(label.as_str()) {
                violations.push(Violation::DuplicateLabel {
                    label: label.clone(),
                });
            }
        }
        let mut usable = Vec::new();
        for (label, map) in self.labels.iter().zip(&self.maps) {
            if !map.ratio.is_finite() || !map.translation.is_finite() {
                violations.push(Violation::NonFinite {
                    label: label.clone(),
                });
                continue;
            }
            if !(map.ratio > 0.0 && map.ratio < 1.0) {
                violations.push(Violation::RatioOutOfRange {
                    label: label.clone(),
                    ratio: map.ratio,
                });
                continue;
            }
            if !map.maps_unit_into_unit(gap_tol) {
                let img = map.image();
                violations.push(Violation::ExceedsUnitInterval {
                    label: label.clone(),
                    lo: img.lo,
                    hi: img.hi,
                });
            }
            usable.push((label, map.image()));
        }
        usable.sort_by(|a, b| a.1.lo.total_cmp(&b.1.lo));
        for pair in usable.windows(2) {
            let (la, ia) = pair[0];
            let (lb, ib) = pair[1];
            let gap = ib.lo - ia.hi;
            if gap < -gap_tol {
                violations.push(Violation::Overlap {
                    first: la.clone(),
                    second: lb.clone(),
                });
            } else if gap <= gap_tol {
                violations.push(Violation::Touch {
                    first: la.clone(),
                    second: lb.clone(),
                    at: ia.hi,
                });
            }
        }
        ValidationReport { violations }
    }

    /// `f_{a_1} ∘ ... ∘ f_{a_n}` (last letter innermost).
    pub fn compose(&self, word: &Word) -> Similarity {
        word.0
            .iter()
            .fold(Similarity::IDENTITY, |acc, &a| acc.compose(&self.maps[a]))
    }

    /// All depth-`depth` composite maps in lexicographic word order.
    /// Depth 0 yields the identity.
    pub fn cylinder_maps(&self, depth: usize) -> Vec<Similarity> {
        let mut level = vec![Similarity::IDENTITY];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(level.len() * self.maps.len());
            for outer in &level {
                for m in &self.maps {
                    next.push(outer.compose(m));
                }
            }
            level = next;
        }
        level
    }

    /// Depth-`depth` cylinders `I(w)` with their words, lexicographic order.
    pub fn cover(&self, depth: usize) -> Result<Vec<(Word, Interval)>> {
        if depth == 0 {
            return Err(Error::EmptyWord);
        }
        let maps = self.cylinder_maps(depth);
        let n = self.maps.len();
        Ok(maps
            .into_iter()
            .enumerate()
            .map(|(mut idx, m)| {
                let mut letters = vec![0; depth];
                for slot in letters.iter_mut().rev() {
                    *slot = idx % n;
                    idx /= n;
                }
                (Word(letters), m.image())
            })
            .collect())
    }

    /// Parse the IFS definition file format, reporting positioned errors.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: RawIfs = serde_json::from_str(s).map_err(|e| Error::Parse {
            path: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        CantorIfs::try_from(raw)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("IFS serializes")
    }
}

#[derive(Deserialize)]
struct RawIfs {
    labels: Vec<String>,
    maps: Vec<RawMap>,
}

#[derive(Deserialize)]
struct RawMap {
    ratio: f64,
    translation: f64,
}

impl TryFrom<RawIfs> for CantorIfs {
    type Error = Error;

    fn try_from(raw: RawIfs) -> Result<Self> {
        if raw.labels.len() != raw.maps.len() {
            return Err(Error::Parse {
                path: "maps".into(),
                message: format!(
                    "{} labels but {} maps",
                    raw.labels.len(),
                    raw.maps.len()
                ),
            });
        }
        let mut maps = Vec::with_capacity(raw.maps.len());
        for (i, m) in raw.maps.iter().enumerate() {
            if !m.ratio.is_finite() {
                return Err(Error::Parse {
                    path: format!("maps[{i}].ratio"),
                    message: "must be finite".into(),
                });
            }
            if !(m.ratio > 0.0 && m.ratio < 1.0) {
                return Err(Error::Parse {
                    path: format!("maps[{i}].ratio"),
                    message: format!("must lie in (0, 1), got {}", m.ratio),
                });
            }
            if !m.translation.is_finite() {
                return Err(Error::Parse {
                    path: format!("maps[{i}].translation"),
                    message: "must be finite".into(),
                });
            }
            maps.push(Similarity::new(m.ratio, m.translation));
        }
        Ok(CantorIfs::from_parts(raw.labels, maps))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    LengthMismatch { labels: usize, maps: usize },
    TooFewMaps { count: usize },
    DuplicateLabel { label: String },
    NonFinite { label: String },
    RatioOutOfRange { label: String, ratio: f64 },
    ExceedsUnitInterval { label: String, lo: f64, hi: f64 },
    Overlap { first: String, second: String },
    Touch { first: String, second: String, at: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LengthMismatch { labels, maps } => {
                write!(f, "{labels} labels but {maps} maps")
            }
            Violation::TooFewMaps { count } => write!(f, "need at least 2 maps, got {count}"),
            Violation::DuplicateLabel { label } => write!(f, "duplicate label `{label}`"),
            Violation::NonFinite { label } => write!(f, "map `{label}` has a non-finite coefficient"),
            Violation::RatioOutOfRange { label, ratio } => {
                write!(f, "ratio of `{label}` must lie in (0,1), got {ratio}")
            }
            Violation::ExceedsUnitInterval { label, lo, hi } => {
                write!(f, "image of `{label}` exceeds [0,1]: [{lo}, {hi}]")
            }
            Violation::Overlap { first, second } => {
                write!(f, "images of `{first}` and `{second}` overlap")
            }
            Violation::Touch { first, second, at } => {
                write!(f, "images of `{first}` and `{second}` touch at {at}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Report-valued validation (`ok` or a list of violations).
pub fn validate_ifs(ifs: &CantorIfs) -> ValidationReport {
    ifs.validate()
}

/// Nonempty sequence of label indices into a designated alphabet.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(ifs: &CantorIfs, letters: Vec<usize>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::EmptyWord);
        }
        if let Some(&bad) = letters.iter().find(|&&a| a >= ifs.len()) {
            return Err(Error::LabelOutOfRange {
                index: bad,
                size: ifs.len(),
            });
        }
        Ok(Word(letters))
    }

    /// Word from label indices without an alphabet check.
    pub(crate) fn from_indices(letters: Vec<usize>) -> Self {
        debug_assert!(!letters.is_empty());
        Word(letters)
    }

    pub fn single(label: usize) -> Self {
        Word(vec![label])
    }

    pub fn from_labels<S: AsRef<str>>(ifs: &CantorIfs, labels: &[S]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyWord);
        }
        labels
            .iter()
            .map(|l| ifs.index_of(l.as_ref()))
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> usize {
        self.0[0]
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&self, label: usize) -> Word {
        let mut v = self.0.clone();
        v.push(label);
        Word(v)
    }

    pub fn to_labels(&self, ifs: &CantorIfs) -> Vec<String> {
        self.0.iter().map(|&a| ifs.labels[a].clone()).collect()
    }
}

/// `f_w([0, 1])`.
pub fn cylinder(ifs: &CantorIfs, word: &Word) -> Result<Interval> {
    if let Some(&bad) = word.0.iter().find(|&&a| a >= ifs.len()) {
        return Err(Error::LabelOutOfRange {
            index: bad,
            size: ifs.len(),
        });
    }
    Ok(ifs.compose(word).image())
}

/// Similarity dimension: the root of `Σ ratio^d = 1` on `[0, 1]`, by bisection.
pub fn moran_dimension(ifs: &CantorIfs) -> Result<f64> {
    let ratios: Vec<f64> = ifs.maps.iter().map(|m| m.ratio).collect();
    moran_dimension_of_ratios(&ratios)
}

pub fn moran_dimension_of_ratios(ratios: &[f64]) -> Result<f64> {
    const MAX_ITER: usize = 200;
    let pressure = |d: f64| ratios.iter().map(|r| r.powf(d)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    if pressure(lo) < 0.0 || pressure(hi) > MORAN_TOLERANCE {
        return Err(Error::MoranNonConvergence {
            iterations: 0,
            residual: pressure(hi),
        });
    }
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let p = pressure(mid);
        if p == 0.0 {
            return Ok(mid);
        }
        if p > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let d = 0.5 * (lo + hi);
    let residual = pressure(d);
    if residual.abs() <= MORAN_TOLERANCE {
        Ok(d)
    } else {
        Err(Error::MoranNonConvergence {
            iterations: MAX_ITER,
            residual,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// `weight(a) = ratio(a)^d`.
    #[default]
    Natural,
    /// `weight(a) = 1 / |A|`.
    Equal,
}

/// Self-similar probability weights, one per label.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureWeights {
    weights: Vec<f64>,
}

impl MeasureWeights {
    pub fn new(ifs: &CantorIfs, kind: WeightKind) -> Result<Self> {
        match kind {
            WeightKind::Natural => Self::natural(ifs),
            WeightKind::Equal => Ok(Self::equal(ifs)),
        }
    }

    pub fn natural(ifs: &CantorIfs) -> Result<Self> {
        let d = moran_dimension(ifs)?;
        let raw: Vec<f64> = ifs.maps.iter().map(|m| m.ratio.powf(d)).collect();
        let total: f64 = raw.iter().sum();
        Ok(Self {
            weights: raw.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn equal(ifs: &CantorIfs) -> Self {
        let n = ifs.len() as f64;
        Self {
            weights: vec![1.0 / n; ifs.len()],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, label: usize) -> f64 {
        self.weights[label]
    }

    pub fn word_weight(&self, word: &Word) -> f64 {
        word.0.iter().map(|&a| self.weights[a]).product()
    }

    /// Depth-`depth` cylinder weights, same order as [`CantorIfs::cylinder_maps`].
    pub fn level_weights(&self, depth: usize) -> Vec<f64> {
        let mut level = vec![1.0];
        for _ in 0..depth {
            level = level
                .iter()
                .flat_map(|w| self.weights.iter().map(move |x| w * x))
                .collect();
        }
        level
    }
}

/// Hypothesis of the main theorems on the dimensions.
pub fn dimension_hypothesis(d: f64, d_prime: f64, mode: Mode) -> Result<()> {
    match mode {
        Mode::CrossSum if d + d_prime > 1.0 => Ok(()),
        Mode::CrossSum => Err(Error::Hypothesis(format!(
            "sum of Hausdorff dimensions must exceed 1, got {d} + {d_prime} = {}",
            d + d_prime
        ))),
        Mode::SelfSum if d > 0.5 => Ok(()),
        Mode::SelfSum => Err(Error::Hypothesis(format!(
            "Hausdorff dimension must exceed 1/2, got {d}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(p: &[(f64, f64)]) -> CantorIfs {
        CantorIfs::from_pairs(p)
    }

    #[test]
    fn validate_examples() {
        assert!(CantorIfs::middle_thirds().validate().is_ok());

        let touching = pairs(&[(0.5, 0.0), (0.5, 0.5)]);
        let report = touching.validate();
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(report.violations[0], Violation::Touch { at, .. } if at == 0.5));
        assert!(report.to_string().contains("touch at 0.5"));

        let exceeding = pairs(&[(0.4, 0.0), (0.4, 0.7)]);
        let report = exceeding.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::ExceedsUnitInterval { label, .. } if label == "1")));
        assert!(report.to_string().contains("exceeds [0,1]"));
    }

    #[test]
    fn validate_structure() {
        let one = pairs(&[(0.3, 0.0)]);
        assert!(matches!(one.validate().violations[0], Violation::TooFewMaps { count: 1 }));

        let dup = CantorIfs::from_parts(
            vec!["a".into(), "a".into()],
            vec![Similarity::new(0.2, 0.0), Similarity::new(0.2, 0.5)],
        );
        assert!(matches!(dup.validate().violations[0], Violation::DuplicateLabel { .. }));

        let overlap = pairs(&[(0.5, 0.0), (0.5, 0.4)]);
        assert!(overlap
            .validate()
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Overlap { .. })));
    }

    #[test]
    fn moran_examples() {
        let d = moran_dimension(&CantorIfs::middle_thirds()).unwrap();
        assert!((d - 2f64.ln() / 3f64.ln()).abs() <= 1e-12, "{d}");
        let quarter = pairs(&[(0.25, 0.0), (0.25, 0.75)]);
        assert_eq!(moran_dimension(&quarter).unwrap(), 0.5);
        let d = moran_dimension(&pairs(&[(0.4, 0.0), (0.4, 0.6)])).unwrap();
        assert!((d - 2f64.ln() / 2.5f64.ln()).abs() <= 1e-12);
        assert!((d - 0.756471).abs() < 1e-6);
    }

    #[test]
    fn moran_rejects_overlapping_ratios() {
        assert!(matches!(
            moran_dimension_of_ratios(&[0.6, 0.6]),
            Err(Error::MoranNonConvergence { .. })
        ));
    }

    #[test]
    fn cylinder_examples() {
        let k = CantorIfs::middle_thirds();
        let l = cylinder(&k, &Word::from_labels(&k, &["L"]).unwrap()).unwrap();
        assert_eq!((l.lo, l.hi), (0.0, 1.0 / 3.0));
        let lr = cylinder(&k, &Word::from_labels(&k, &["L", "R"]).unwrap()).unwrap();
        assert!((lr.lo - 2.0 / 9.0).abs() < 1e-15 && (lr.hi - 1.0 / 3.0).abs() < 1e-15);

        let lam = 0.3;
        let ifs = pairs(&[(lam, 0.0), (0.2, 0.7)]);
        let w = Word::new(&ifs, vec![0; 5]).unwrap();
        let c = cylinder(&ifs, &w).unwrap();
        assert_eq!(c.lo, 0.0);
        assert!((c.length() - lam.powi(5)).abs() < 1e-18);
        assert!(matches!(
            Word::from_labels(&k, &["Q"]),
            Err(Error::UnknownLabel(_))
        ));
        assert!(matches!(Word::new(&k, vec![]), Err(Error::EmptyWord)));
    }

    #[test]
    fn cover_is_lexicographic() {
        let k = CantorIfs::middle_thirds();
        let cover = k.cover(2).unwrap();
        assert_eq!(cover.len(), 4);
        assert_eq!(cover[1].0.to_labels(&k), vec!["L", "R"]);
        assert!((cover[1].1.lo - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn hull_and_reflection() {
        let ifs = pairs(&[(0.3, 0.1), (0.2, 0.6)]);
        let h = ifs.hull();
        assert!((h.lo - 0.1 / 0.7).abs() < 1e-15);
        assert!((h.hi - 0.6 / 0.8).abs() < 1e-15);
        let refl = ifs.reflected();
        let hr = refl.hull();
        assert!((hr.lo - (1.0 - h.hi)).abs() < 1e-15 && (hr.hi - (1.0 - h.lo)).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip_and_errors() {
        let k = CantorIfs::middle_thirds();
        let back = CantorIfs::from_json_str(&k.to_json_pretty()).unwrap();
        assert_eq!(back, k);

        let err = CantorIfs::from_json_str(
            r#"{"labels":["a","b"],"maps":[{"ratio":0.3,"translation":0},{"ratio":1.5,"translation":0.6}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().starts_with("maps[1].ratio"), "{err}");

        let err = CantorIfs::from_json_str(r#"{"labels":["a"],"maps":[{"ratio":NaN,"translation":0}]}"#)
            .unwrap_err();
        assert!(err.to_string().contains("line 1 column"), "{err}");

        let err = CantorIfs::from_json_str(
            r#"{"labels":["a","b"],"maps":[{"ratio":0.3,"translation":1e999},{"ratio":0.3,"translation":0.6}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn natural_weights() {
        let ifs = pairs(&[(0.3, 0.0), (0.2, 0.5), (0.1, 0.9)]);
        let w = MeasureWeights::natural(&ifs).unwrap();
        assert!((w.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let d = moran_dimension(&ifs).unwrap();
        assert!((w.weight(0) - 0.3f64.powf(d)).abs() < 1e-12);
        let level: f64 = w.level_weights(3).iter().sum();
        assert!((level - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hypothesis_boundary() {
        let q = pairs(&[(0.25, 0.0), (0.25, 0.75)]);
        let d = moran_dimension(&q).unwrap();
        assert!(dimension_hypothesis(d, d, Mode::CrossSum).is_err());
        let m = moran_dimension(&CantorIfs::middle_thirds()).unwrap();
        assert!(dimension_hypothesis(m, m, Mode::CrossSum).is_ok());
        assert!(dimension_hypothesis(m, m, Mode::SelfSum).is_ok());
    }
}
