#![allow(dead_code)]

use proptest::prelude::*;
use sumset_core::CantorIfs;

/// A valid IFS with 2..=4 maps: ratios scaled so the images fill at most 90%
/// of the unit interval, gaps drawn at random, hull `[0, 1]`.
pub fn cantor_ifs() -> impl Strategy<Value = CantorIfs> {
    (2usize..=4)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0.05f64..0.4, n),
                prop::collection::vec(0.1f64..1.0, n - 1),
                0.3f64..0.9,
            )
        })
        .prop_map(|(ratios, gaps, fill)| build(&ratios, &gaps, fill))
}

pub fn build(ratios: &[f64], gaps: &[f64], fill: f64) -> CantorIfs {
    let total: f64 = ratios.iter().sum();
    let scale = fill / total;
    let gap_total: f64 = gaps.iter().sum();
    let mut pairs = Vec::with_capacity(ratios.len());
    let mut x = 0.0;
    for (i, &r) in ratios.iter().enumerate() {
        let len = r * scale;
        pairs.push((len, x));
        x += len;
        if i < gaps.len() {
            x += (1.0 - fill) * gaps[i] / gap_total;
        }
    }
    // Pin the last image to end at 1 against rounding.
    let last = pairs.len() - 1;
    pairs[last].1 = 1.0 - pairs[last].0;
    CantorIfs::from_pairs(&pairs)
}
