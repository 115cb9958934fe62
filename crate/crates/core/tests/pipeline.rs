use sumset_core::perturbation::{run_theorem1, PipelineConfig};
use sumset_core::recurrence::verify_bundle;
use sumset_core::Error;

fn config(rho_exp: i32, seed: u64) -> PipelineConfig {
    let rho = 3f64.powi(-rho_exp);
    PipelineConfig::from_json_str(&format!(
        r#"{{
            "ifs_k": {{"labels": ["L", "R"], "maps": [
                {{"ratio": 0.3333333333333333, "translation": 0.0}},
                {{"ratio": 0.3333333333333333, "translation": 0.6666666666666666}}]}},
            "epsilon": 0.05, "M": 4, "rho": {rho}, "seed": {seed}, "n_override": 1,
            "grids": {{"e_r_cells": 200, "e_depth": 6, "l_r_step": 0.02, "delta_spacing": {sp},
                       "certificates": 2}}
        }}"#,
        sp = rho / 8.0
    ))
    .unwrap()
}

#[test]
fn small_run_certifies_and_is_deterministic() {
    let cfg = config(5, 3);
    let a = run_theorem1(&cfg).unwrap();
    assert!(a.report.success, "{}", a.report.to_json_pretty());
    let bundle = a.bundle.as_ref().unwrap();
    assert!(verify_bundle(bundle).unwrap().iter().all(|c| c.is_ok()));
    for c in &a.report.certificates {
        assert!(c.covered_t_interval.length() >= cfg.rho * (1.0 - 1e-12));
    }

    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let b = pool.install(|| run_theorem1(&cfg)).unwrap();
    assert_eq!(a.report.hash(), b.report.hash());
}

#[test]
fn dimension_hypothesis_failure_names_the_stage() {
    let mut cfg = config(5, 0);
    cfg.ifs_k = sumset_core::CantorIfs::from_pairs(&[(0.25, 0.0), (0.25, 0.75)]);
    let err = run_theorem1(&cfg).err().unwrap();
    assert_eq!(err.stage(), Some("hypothesis"));
    assert!(matches!(err, Error::Stage { .. }));
}

#[test]
fn unknown_config_fields_are_rejected() {
    let err = PipelineConfig::from_json_str(r#"{"ifs_k": {"labels": [], "maps": []}, "epsilon": 0.1, "M": 4, "rho": 0.01, "bogus": 1}"#);
    assert!(err.is_err());
}
