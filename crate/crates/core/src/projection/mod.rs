//! Projected measures, the good-scale set `E` and good/bad cylinder pairs.

pub mod density;
pub mod eset;
pub mod pairs;

pub use density::{density_profile, density_profile_weighted, l2_norm_estimate, projected_cover, DensityProfile};
pub use eset::{build_e, build_e_weighted, ECell, EParams, ESet};
pub use pairs::{all_pairs, classify_good_bad, projected_interval, union_measure, GoodBadParams, GoodBadReport, PairClass};
