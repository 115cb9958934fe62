use serde::Serialize;

use super::CantorIfs;
use crate::interval::Interval;

/// Closeness of two intervals in the sense used for perturbed Cantor sets:
/// the length ratio lies in `(1 - ε, 1 + ε)` and the centers are less than
/// `ε / min(|I1|, |I2|)` apart.
///
/// The center bound is applied as written even though dividing by the
/// shorter length makes it looser for short intervals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntervalCloseness {
    pub length_ratio: f64,
    pub center_distance: f64,
    pub center_bound: f64,
    pub ratio_ok: bool,
    pub center_ok: bool,
}

impl IntervalCloseness {
    pub fn is_close(&self) -> bool {
        self.ratio_ok && self.center_ok
    }
}

pub fn epsilon_close(i1: &Interval, i2: &Interval, eps: f64) -> IntervalCloseness {
    let length_ratio = i1.length() / i2.length();
    let center_distance = (i1.center() - i2.center()).abs();
    let center_bound = eps / i1.length().min(i2.length());
    IntervalCloseness {
        length_ratio,
        center_distance,
        center_bound,
        ratio_ok: 1.0 - eps < length_ratio && length_ratio < 1.0 + eps,
        center_ok: center_distance < center_bound,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabelCloseness {
    pub label: String,
    #[serde(flatten)]
    pub closeness: IntervalCloseness,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonClosenessReport {
    pub epsilon: f64,
    pub same_alphabet: bool,
    pub labels: Vec<LabelCloseness>,
    pub ok: bool,
}

/// Compare first-level cylinders label by label, as "`K̃` is ε-close to
/// `K`": the perturbed interval comes first, so the length ratio is
/// `|Ĩ(a)| / |I(a)| = 1 + γ`.
pub fn ifs_epsilon_close(k: &CantorIfs, k_tilde: &CantorIfs, eps: f64) -> EpsilonClosenessReport {
    let same_alphabet = k.labels() == k_tilde.labels();
    let labels: Vec<LabelCloseness> = if same_alphabet {
        k.labels()
            .iter()
            .zip(k.maps().iter().zip(k_tilde.maps()))
            .map(|(label, (m, mt))| LabelCloseness {
                label: label.clone(),
                closeness: epsilon_close(&mt.image(), &m.image(), eps),
            })
            .collect()
    } else {
        Vec::new()
    };
    let ok = same_alphabet && labels.iter().all(|l| l.closeness.is_close());
    EpsilonClosenessReport {
        epsilon: eps,
        same_alphabet,
        labels,
        ok,
    }
}
