//! Fixtures shared by the benchmarks.

use sumset_core::perturbation::{prepare, PipelineConfig, Prepared};
use sumset_core::recurrence::ClosureParams;
use sumset_core::{CantorIfs, Interval};

pub fn middle_thirds() -> CantorIfs {
    CantorIfs::middle_thirds()
}

/// Desk-scale pipeline config on middle thirds at rho = 3^-5.
pub fn desk_config() -> PipelineConfig {
    PipelineConfig::from_json_str(
        r#"{
        "ifs_k": {"labels": ["L", "R"], "maps": [
            {"ratio": 0.3333333333333333, "translation": 0.0},
            {"ratio": 0.3333333333333333, "translation": 0.6666666666666666}]},
        "epsilon": 0.05, "M": 4, "rho": 0.004115226337448559, "seed": 1, "n_override": 1,
        "grids": {"e_r_cells": 200, "e_depth": 6, "l_r_step": 0.02, "delta_spacing": 0.0005}
    }"#,
    )
    .expect("fixture config parses")
}

pub fn prepared() -> Prepared {
    prepare(&desk_config()).expect("fixture prepares")
}

/// Overlapping intervals with a deterministic layout.
pub fn interval_soup(n: usize) -> Vec<Interval> {
    (0..n)
        .map(|i| {
            let x = (i as f64 * 0.618_033_988_75).fract();
            Interval::new(x, x + 0.01 + 0.02 * ((i * 7 % 13) as f64 / 13.0))
        })
        .collect()
}

pub fn closure_params() -> ClosureParams {
    ClosureParams {
        r: 1.0,
        covered: Interval::new(0.1, 0.2),
        resolution: 0.005,
        tolerance: 0.01,
        m_bound: 2.0,
        rho: 0.01,
        word_len: 2,
        max_points: 5000,
    }
}
