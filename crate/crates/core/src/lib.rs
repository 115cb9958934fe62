//! Perturbation of self-similar Cantor sets so that `K - rK'` contains an
//! interval for most scales `r`: cylinder covers, renormalization dynamics
//! on configuration space, projected densities and a seeded search for the
//! perturbation, with finite certificates of the resulting intervals.

pub mod constants;
pub mod error;
pub mod ifs;
pub mod interval;
pub mod perturbation;
pub mod projection;
pub mod recurrence;
pub mod renorm;

use serde::{Deserialize, Serialize};

pub use constants::{Constants, ConstantsLedger};
pub use error::{Error, Result};
pub use ifs::{cylinder, moran_dimension, AlphabetSplit, CantorIfs, MeasureWeights, Similarity, Word};
pub use interval::{Interval, IntervalSet};
pub use renorm::{apply_renorm, compose_words, Configuration, Omega, PerturbationVector};

/// Difference of two sets, or of a set with itself.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    CrossSum,
    SelfSum,
}
