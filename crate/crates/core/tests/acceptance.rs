//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p sumset-core --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sumset_core::constants::{Constants, ConstantsLedger};
use sumset_core::ifs::{moran_dimension, retake_pair};
use sumset_core::perturbation::{run_theorem1, PipelineConfig, RunOutput};
use sumset_core::projection::{
    all_pairs, build_e, classify_good_bad, density_profile, l2_norm_estimate, projected_cover, EParams, GoodBadParams,
};
use sumset_core::recurrence::{bounded_orbit_search, escape_trajectory, verify_bundle, verify_certificate};
use sumset_core::renorm::{perturb_similarity, renormalize};
use sumset_core::{CantorIfs, Configuration, Interval, Mode, Omega, Similarity};

const RHO_DEMO: f64 = 1.0 / 729.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn within(elapsed: Duration, limit: Duration, o: Outcome) -> Outcome {
    if elapsed > limit {
        outcome(false, format!("{} (over the {limit:?} limit)", o.detail))
    } else {
        o
    }
}

/// Random valid IFS with 2..=4 maps filling 30%..90% of `[0, 1]`.
fn random_ifs(rng: &mut ChaCha8Rng) -> CantorIfs {
    let n = rng.gen_range(2..=4);
    let ratios: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.4)).collect();
    let gaps: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.1..1.0)).collect();
    let fill = rng.gen_range(0.3..0.9);
    let scale = fill / ratios.iter().sum::<f64>();
    let gap_total: f64 = gaps.iter().sum();
    let mut pairs = Vec::new();
    let mut x = 0.0;
    for (i, r) in ratios.iter().enumerate() {
        pairs.push((r * scale, x));
        x += r * scale;
        if i + 1 < n {
            x += (1.0 - fill) * gaps[i] / gap_total;
        }
    }
    pairs[n - 1].1 = 1.0 - pairs[n - 1].0;
    CantorIfs::from_pairs(&pairs)
}

fn random_map(rng: &mut ChaCha8Rng, ifs: &CantorIfs, max_len: usize) -> Similarity {
    let len = rng.gen_range(1..=max_len);
    (0..len).fold(Similarity::IDENTITY, |acc, _| acc.compose(ifs.map(rng.gen_range(0..ifs.len()))))
}

fn demo_config(rho: f64, failure_samples: usize, certificates: usize) -> PipelineConfig {
    let mut cfg = PipelineConfig::from_json_str(&format!(
        r#"{{
            "ifs_k": {{"labels": ["L", "R"], "maps": [
                {{"ratio": 0.3333333333333333, "translation": 0.0}},
                {{"ratio": 0.3333333333333333, "translation": 0.6666666666666666}}]}},
            "epsilon": 0.05, "M": 4, "rho": {rho}, "seed": 1, "n_override": 1,
            "grids": {{"e_r_cells": 200, "e_depth": 8, "l_r_step": 0.01,
                       "failure_points": 8}}
        }}"#
    ))
    .expect("demo config parses");
    cfg.grids.delta_spacing = Some(rho / 16.0);
    cfg.grids.failure_samples = failure_samples;
    cfg.grids.certificates = certificates;
    cfg
}

fn ac1() -> Outcome {
    let d = moran_dimension(&CantorIfs::middle_thirds()).unwrap();
    let expect = 2f64.ln() / 3f64.ln();
    let q = moran_dimension(&CantorIfs::from_pairs(&[(0.25, 0.0), (0.25, 0.75)])).unwrap();
    outcome(
        (d - expect).abs() <= 1e-12 && (q - 0.5).abs() <= 1e-12,
        format!("middle thirds {d:.15}, quarters {q:.15}"),
    )
}

fn ac2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let k = random_ifs(&mut rng);
        let kp = random_ifs(&mut rng);
        let u = Configuration {
            r: rng.gen_range(0.25..4.0),
            t: rng.gen_range(-4.0..4.0),
        };
        let mut f = random_map(&mut rng, &k, 3);
        if i % 2 == 0 {
            let om = Omega {
                gamma: rng.gen_range(-0.05..0.05),
                delta: rng.gen_range(-1.0..1.0),
            };
            f = perturb_similarity(&f, om, 1.0, 1e-3);
        }
        let fp = random_map(&mut rng, &kp, 3);
        // Pull the line back through both zooms at two abscissae.
        let pull = |xn: f64| {
            let y = (f.apply(xn) + u.t) / u.r;
            (y - fp.translation) / fp.ratio
        };
        let (y0, y1) = (pull(0.0), pull(1.0));
        let r = 1.0 / (y1 - y0);
        let oracle = Configuration { r, t: r * y0 };
        let fast = renormalize(u, &f, &fp);
        worst = worst.max(rel(fast.r, oracle.r)).max(rel(fast.t, oracle.t));
    }
    let mut worst_cocycle: f64 = 0.0;
    for _ in 0..1000 {
        let k = random_ifs(&mut rng);
        let kp = random_ifs(&mut rng);
        let u = Configuration {
            r: rng.gen_range(0.25..4.0),
            t: rng.gen_range(-4.0..4.0),
        };
        let (f1, f2) = (random_map(&mut rng, &k, 2), random_map(&mut rng, &k, 2));
        let (g1, g2) = (random_map(&mut rng, &kp, 2), random_map(&mut rng, &kp, 2));
        let whole = renormalize(u, &f1.compose(&f2), &g1.compose(&g2));
        let steps = renormalize(renormalize(u, &f1, &g1), &f2, &g2);
        worst_cocycle = worst_cocycle.max(rel(whole.r, steps.r)).max(rel(whole.t, steps.t));
    }
    outcome(
        worst <= 1e-10 && worst_cocycle <= 1e-10,
        format!("oracle max rel err {worst:.2e}, cocycle max rel err {worst_cocycle:.2e}"),
    )
}

fn ac3() -> Outcome {
    let k = CantorIfs::middle_thirds();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let point = |rng: &mut ChaCha8Rng| {
        (1..=40).fold(0.0, |acc, i| acc + if rng.gen::<bool>() { 2.0 * 3f64.powi(-i) } else { 0.0 })
    };
    let mut bounded = 0;
    for _ in 0..50 {
        let (x, y) = (point(&mut rng), point(&mut rng));
        let rec = bounded_orbit_search(Configuration { r: 1.0, t: y - x }, &k, &k, 4.0, 20, 1);
        bounded += rec.is_bounded() as usize;
    }
    let mut escaped = 0;
    for i in 0..50 {
        let mag = rng.gen_range(1.02..2.0);
        let t = if i % 2 == 0 { mag } else { -mag };
        let u = Configuration { r: 1.0, t };
        let rec = bounded_orbit_search(u, &k, &k, 4.0, 20, 1);
        let path = escape_trajectory(u, &k, &k, 15, 1);
        if !rec.is_bounded() && path.iter().any(|v| v.t.abs() > 1e3) {
            escaped += 1;
        }
    }
    outcome(
        bounded == 50 && escaped == 50,
        format!("{bounded}/50 intersecting bounded for 20 steps, {escaped}/50 others past |t| = 1e3 within 15 steps"),
    )
}

fn ac4() -> Outcome {
    let k = CantorIfs::middle_thirds();
    let cover = projected_cover(&k, &k, 1.0, 10);
    let bin = 3f64.powi(-10);
    let gaps = cover.gaps_within(&Interval::new(-0.99, 0.99));
    let widest = gaps.iter().map(|g| g.length()).fold(0.0, f64::max);
    outcome(
        widest <= bin,
        format!("{} gaps in (-0.99, 0.99), widest {widest:.3e} (bin {bin:.3e})", gaps.len()),
    )
}

fn ac5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_mass: f64 = 0.0;
    let mut cs_ok = true;
    for _ in 0..20 {
        let k = random_ifs(&mut rng);
        let kp = random_ifs(&mut rng);
        let r = rng.gen_range(0.25..4.0);
        let p = density_profile(&k, &kp, r, 5, 0.005).unwrap();
        worst_mass = worst_mass.max((p.total_mass - 1.0).abs());
        cs_ok &= l2_norm_estimate(&p) >= 1.0 / p.support.length();
    }
    let mut worst_asym: f64 = 0.0;
    for _ in 0..20 {
        let a = rng.gen_range(0.1..0.4);
        let b = rng.gen_range(0.05..0.2);
        let k = CantorIfs::from_pairs(&[(a, 0.0), (b, 0.5 - 0.5 * b), (a, 1.0 - a)]);
        let a2 = rng.gen_range(0.1..0.45);
        let kp = CantorIfs::from_pairs(&[(a2, 0.0), (a2, 1.0 - a2)]);
        let p = density_profile(&k, &kp, rng.gen_range(0.25..4.0), 5, 0.007).unwrap();
        let n = p.bins.len();
        for i in 0..n {
            worst_asym = worst_asym.max((p.bins[i] - p.bins[n - 1 - i]).abs());
        }
    }
    outcome(
        worst_mass <= 1e-9 && cs_ok && worst_asym <= 1e-9,
        format!("max |mass - 1| {worst_mass:.2e}, Cauchy-Schwarz bound {}, max asymmetry {worst_asym:.2e}", if cs_ok { "holds" } else { "fails" }),
    )
}

fn ac6() -> Outcome {
    let k = CantorIfs::middle_thirds();
    let params = EParams {
        m_bound: 4.0,
        epsilon: 0.1,
        r_cells: 200,
        depth: 8,
        bin_width: 0.01,
    };
    let e = build_e(&k, &k, &params).unwrap();
    // Direct summation over the cells.
    let excluded: f64 = e.cells.iter().filter(|c| c.l2 >= e.c5).map(|c| c.hi - c.lo).sum();
    let c4: f64 = e.cells.iter().map(|c| c.l2 * (c.hi - c.lo)).sum();
    let markov = excluded * e.c5 <= c4 * (1.0 + 1e-12);
    // The next lower grid value as threshold would exclude at least ε/2.
    let below = e.cells.iter().map(|c| c.l2).filter(|&v| v < e.c5).fold(f64::NEG_INFINITY, f64::max);
    let tighter: f64 = e.cells.iter().filter(|c| c.l2 >= below).map(|c| c.hi - c.lo).sum();
    // Spot-check stored values against fresh profiles.
    let spot = e.cells.iter().step_by(20).all(|c| {
        let p = density_profile(&k, &k, c.r, 8, 0.01).unwrap();
        l2_norm_estimate(&p) == c.l2
    });
    outcome(
        excluded < 0.05 && markov && tighter >= 0.05 && spot,
        format!(
            "excluded {excluded:.4} < 0.05, c5 = {:.4}, c4 = {c4:.4}, Markov bound {:.4}, next threshold excludes {tighter:.4}",
            e.c5,
            c4 / e.c5
        ),
    )
}

fn ac7() -> Outcome {
    let k = CantorIfs::middle_thirds();
    let rho = 3f64.powi(-8);
    let m = 4.0;
    let d = moran_dimension(&k).unwrap();
    let ledger = ConstantsLedger::new(&Constants::default(), rho, 0.05, m, d, d).unwrap();
    let pair = retake_pair(&k, &k, rho, ledger.c0(), Mode::CrossSum).unwrap();
    let e = build_e(
        &k,
        &k,
        &EParams {
            m_bound: m,
            epsilon: 0.05,
            r_cells: 200,
            depth: 8,
            bin_width: 0.25 * rho.sqrt(),
        },
    )
    .unwrap();
    let in_e: Vec<f64> = e.cells.iter().filter(|c| c.in_e).map(|c| c.r).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pairs = all_pairs(&pair.k, &pair.k_prime);
    let params = GoodBadParams {
        rho,
        c6: ledger.c6(),
        c9: ledger.c9(),
        d,
        d_prime: d,
        c5: Some(e.c5),
        lenient: false,
    };
    let mut worst: f64 = 1.0;
    for _ in 0..10 {
        let r = in_e[rng.gen_range(0..in_e.len())];
        let rep = classify_good_bad(&pair.k, &pair.k_prime, r, &pairs, &params).unwrap();
        worst = worst.min(rep.good_fraction());
    }
    outcome(
        worst >= 0.5,
        format!("|A| = {}, |A'| = {}, worst good fraction {worst:.3} over 10 r in E", pair.k.len(), pair.k_prime.len()),
    )
}

fn ac8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let k = random_ifs(&mut rng);
        let kp = random_ifs(&mut rng);
        let r = rng.gen_range(0.25..4.0);
        let r_tilde = r * rng.gen_range(0.9..1.1);
        let gamma_tilde = rng.gen_range(-0.05..0.05);
        let gamma = (1.0 + gamma_tilde) * r / r_tilde - 1.0;
        let a = rng.gen_range(0..k.len());
        let tail = random_map(&mut rng, &k, 2);
        let wp = random_map(&mut rng, &kp, 3);
        let len = |g: f64| {
            perturb_similarity(k.map(a), Omega { gamma: g, delta: 0.0 }, 1.0, 1e-3)
                .compose(&tail)
                .ratio
        };
        let lhs = r_tilde * wp.ratio / len(gamma_tilde);
        let rhs = r * wp.ratio / len(gamma);
        worst = worst.max(rel(lhs, rhs));
    }
    outcome(worst <= 1e-12, format!("max rel err {worst:.2e} over 1000 instances"))
}

fn ac9() -> (Outcome, Option<RunOutput>) {
    let cfg = demo_config(RHO_DEMO, 400, 3);
    let first = run_theorem1(&cfg).unwrap();
    let second = run_theorem1(&cfg).unwrap();
    let rep = &first.report;
    let same_hash = rep.hash() == second.report.hash();
    let closeness = rep.closeness.as_ref().is_some_and(|c| c.ok);
    let e_ok = first.e.as_ref().is_some_and(|e| e.measure() > 0.0);
    let Some(bundle) = first.bundle.as_ref() else {
        return (outcome(false, format!("no perturbation found: {:?}", rep.failure)), Some(first));
    };
    let k_tilde = first.k_tilde.as_ref().unwrap();
    let independent = bundle
        .certificates
        .iter()
        .filter(|c| c.covered_t_interval.length() >= RHO_DEMO * (1.0 - 1e-12))
        .filter(|c| verify_certificate(c, k_tilde, &bundle.ifs_k_prime, None).is_ok_and(|v| v.is_ok()))
        .count();
    let bundle_ok = verify_bundle(bundle).is_ok_and(|v| v.iter().all(|c| c.is_ok()));
    let o = outcome(
        rep.success && same_hash && closeness && e_ok && independent >= 3 && bundle_ok,
        format!(
            "success {}, ε-close {closeness}, E measure {:.3}, {independent} certificates of length ≥ ρ verified, same hash {same_hash} ({})",
            rep.success,
            first.e.as_ref().map_or(0.0, |e| e.measure()),
            &rep.hash()[..12]
        ),
    );
    (o, Some(first))
}

fn pooled(out: &RunOutput) -> (usize, usize) {
    out.report
        .failure_estimates
        .iter()
        .fold((0, 0), |(f, n), e| (f + e.failures, n + e.samples))
}

fn ac10(small: Option<&RunOutput>) -> Outcome {
    let rho1 = 3f64.powi(-4);
    let coarse = run_theorem1(&demo_config(rho1, 400, 0)).unwrap();
    let Some(fine) = small else {
        return outcome(false, "no run at the smaller scale".into());
    };
    let (f1, n1) = pooled(&coarse);
    let (f2, n2) = pooled(fine);
    if n1 == 0 || n2 == 0 {
        return outcome(false, "no failure estimates recorded".into());
    }
    let (p1, p2) = (f1 as f64 / n1 as f64, f2 as f64 / n2 as f64);
    let (lo1, hi1) = sumset_core::perturbation::wilson_interval(f1, n1);
    let (lo2, hi2) = sumset_core::perturbation::wilson_interval(f2, n2);
    let overlap = lo1 <= hi2 && lo2 <= hi1;
    outcome(
        p2 <= p1,
        format!(
            "ρ = 3^-4: {f1}/{n1} = {p1:.4} [{lo1:.4}, {hi1:.4}]; ρ = 3^-6: {f2}/{n2} = {p2:.4} [{lo2:.4}, {hi2:.4}]; CIs overlap: {overlap}"
        ),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |name: &str, limit: Option<Duration>, run: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let mut o = run();
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            o = within(elapsed, limit, o);
        }
        let tag = if o.pass { "PASS" } else { "FAIL" };
        failed += !o.pass as usize;
        println!("[{tag}] {name}: {} ({:.2}s)", o.detail, elapsed.as_secs_f64());
    };
    let secs = |s| Some(Duration::from_secs(s));
    report("AC1 moran dimension", secs(1), &mut ac1);
    report("AC2 renormalization oracle and cocycle", secs(5), &mut ac2);
    report("AC3 bounded orbits iff intersecting", secs(60), &mut ac3);
    report("AC4 middle-thirds difference cover", secs(30), &mut ac4);
    report("AC5 density properties", None, &mut ac5);
    report("AC6 E-set excluded measure", secs(120), &mut ac6);
    report("AC7 good pairs at least half", secs(120), &mut ac7);
    report("AC8 gamma compensation", None, &mut ac8);
    let mut demo = None;
    report("AC9 end-to-end demo", secs(600), &mut || {
        let (o, out) = ac9();
        demo = out;
        o
    });
    report("AC10 failure probability trend", None, &mut || ac10(demo.as_ref()));
    if failed == 0 {
        println!("all acceptance criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria fail");
        ExitCode::FAILURE
    }
}
