use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sumset_core::constants::ConstantsLedger;
use sumset_core::ifs::retake_pair;
use sumset_core::perturbation::{prepare, run_theorem1, PipelineConfig};
use sumset_core::projection::{
    all_pairs, classify_good_bad, density_profile, l2_norm_estimate, projected_cover, ESet, GoodBadParams,
};
use sumset_core::recurrence::{bounded_orbit_search, verify_bundle, CertificateBundle, CertificateCheck};
use sumset_core::{moran_dimension, CantorIfs, Configuration, Error, Interval, Mode};

use crate::manifest::RunManifest;
use crate::{Overrides, Pair};

/// Exit code and message of a failed command.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn failed(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

/// Bad input is a usage error (2); anything the computation itself
/// reports is a failure (1).
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Stage { source, .. } => exit_code(source),
        Error::InvalidIfs(_)
        | Error::UnknownLabel(_)
        | Error::LabelOutOfRange { .. }
        | Error::EmptyWord
        | Error::Parse { .. }
        | Error::DegenerateHistogram { .. }
        | Error::GridTooCoarse(_)
        | Error::InvalidArgument(_)
        | Error::Json(_)
        | Error::Io(_) => 2,
        _ => 1,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn read_ifs(path: &Path) -> Result<CantorIfs, Failure> {
    let bytes = read(path)?;
    let text = String::from_utf8_lossy(&bytes);
    let ifs = CantorIfs::from_json_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let report = ifs.validate();
    if !report.is_ok() {
        return Err(Failure::usage(format!("{}: not a Cantor IFS: {report}", path.display())));
    }
    Ok(ifs)
}

fn read_pair(pair: &Pair) -> Result<(CantorIfs, CantorIfs), Failure> {
    let k = read_ifs(&pair.ifs_k)?;
    let kp = match &pair.ifs_k_prime {
        Some(p) => read_ifs(p)?,
        None => k.clone(),
    };
    Ok((k, kp))
}

fn emit(out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("value serializes") + "\n"
}

/// `x` with 12 significant digits, trailing zeros dropped.
fn significant12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return x.to_string();
    }
    let decimals = (11 - x.abs().log10().floor() as i32).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn dim(path: &Path) -> CmdResult {
    let ifs = read_ifs(path)?;
    let d = moran_dimension(&ifs)?;
    println!("{}", significant12(d));
    Ok(())
}

pub fn cover(pair: &Pair, r: f64, depth: usize, merge_tol: f64, out: Option<&Path>) -> CmdResult {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Failure::usage(format!("r must be positive, got {r}")));
    }
    let (k, kp) = read_pair(pair)?;
    let set = projected_cover(&k, &kp, r, depth);
    // Gaps below the merge tolerance are rounding, not structure.
    let mut merged: Vec<Interval> = Vec::new();
    for iv in set.intervals() {
        match merged.last_mut() {
            Some(last) if iv.lo - last.hi <= merge_tol => last.hi = last.hi.max(iv.hi),
            _ => merged.push(*iv),
        }
    }
    let mut csv = String::from("lo,hi\n");
    for iv in &merged {
        writeln!(csv, "{},{}", iv.lo, iv.hi).unwrap();
    }
    let measure: f64 = merged.iter().map(|iv| iv.length()).sum();
    writeln!(csv, "# components={} measure={measure}", merged.len()).unwrap();
    emit(out, &csv)
}

pub fn density(pair: &Pair, r: f64, depth: usize, bins: usize, out: Option<&Path>) -> CmdResult {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Failure::usage(format!("r must be positive, got {r}")));
    }
    if bins < 2 {
        return Err(Failure::usage("need at least 2 bins"));
    }
    let (k, kp) = read_pair(pair)?;
    let support = r * kp.hull().length() + k.hull().length();
    let p = density_profile(&k, &kp, r, depth, support / bins as f64)?;
    let mut csv = String::from("t_bin_center,mass\n");
    for (i, m) in p.bins.iter().enumerate() {
        writeln!(csv, "{},{}", p.bin_center(i), m).unwrap();
    }
    writeln!(csv, "# l2_estimate={} total_mass={}", l2_norm_estimate(&p), p.total_mass).unwrap();
    emit(out, &csv)
}

#[derive(Serialize)]
struct GoodPairsSummary {
    r: f64,
    rho: f64,
    k_size: usize,
    k_prime_size: usize,
    pairs: usize,
    good: usize,
    bad: usize,
    good_fraction: f64,
    radius: f64,
    max_neighbors: f64,
    good_at_least_half: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn good_pairs(
    pair: &Pair,
    r: f64,
    rho: f64,
    m_bound: f64,
    epsilon: f64,
    mode: Mode,
    lenient: bool,
    out: Option<&Path>,
) -> CmdResult {
    let (k, kp) = read_pair(pair)?;
    let d = moran_dimension(&k)?;
    let d_prime = moran_dimension(&kp)?;
    let ledger = ConstantsLedger::new(&Default::default(), rho, epsilon, m_bound, d, d_prime)?;
    let retaken = retake_pair(&k, &kp, rho, ledger.c0(), mode)?;
    let pairs = all_pairs(&retaken.k, &retaken.k_prime);
    let params = GoodBadParams {
        rho,
        c6: ledger.c6(),
        c9: ledger.c9(),
        d,
        d_prime,
        c5: None,
        lenient,
    };
    let report = classify_good_bad(&retaken.k, &retaken.k_prime, r, &pairs, &params)?;
    if let Some(path) = out {
        emit(Some(path), &to_json(&report))?;
    }
    print!(
        "{}",
        to_json(&GoodPairsSummary {
            r,
            rho,
            k_size: retaken.k.len(),
            k_prime_size: retaken.k_prime.len(),
            pairs: pairs.len(),
            good: report.good,
            bad: report.bad,
            good_fraction: report.good_fraction(),
            radius: report.radius,
            max_neighbors: report.max_neighbors,
            good_at_least_half: report.good_at_least_half,
        })
    );
    Ok(())
}

pub fn orbit(pair: &Pair, r: f64, t: f64, m_bound: f64, steps: usize, word_len: usize) -> CmdResult {
    let (k, kp) = read_pair(pair)?;
    let u = Configuration::new(r, t)?;
    if !(m_bound > 1.0) || word_len == 0 {
        return Err(Failure::usage("need M > 1 and word length at least 1"));
    }
    let rec = bounded_orbit_search(u, &k, &kp, m_bound, steps, word_len);
    print!("{}", to_json(&rec));
    Ok(())
}

fn load_config(path: &Path, overrides: &Overrides, seed: Option<u64>) -> Result<(Vec<u8>, PipelineConfig), Failure> {
    let bytes = read(path)?;
    let text = String::from_utf8_lossy(&bytes);
    let mut cfg = PipelineConfig::from_json_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    if let Some(v) = overrides.epsilon {
        cfg.epsilon = v;
    }
    if let Some(v) = overrides.m_bound {
        cfg.m_bound = v;
    }
    if let Some(v) = overrides.rho {
        cfg.rho = v;
    }
    if let Some(v) = overrides.budget {
        cfg.budget = v;
    }
    if let Some(v) = overrides.n_override {
        cfg.n_override = Some(v);
    }
    if let Some(v) = overrides.mode {
        cfg.mode = v;
    }
    if let Some(v) = seed {
        cfg.seed = v;
    }
    Ok((bytes, cfg))
}

fn e_csv(e: &ESet) -> String {
    let mut csv = String::from("r,l2_norm,in_E\n");
    for c in &e.cells {
        writeln!(csv, "{},{},{}", c.r, c.l2, c.in_e).unwrap();
    }
    csv
}

#[derive(Serialize)]
struct LRow {
    r: f64,
    in_e: bool,
    measure: f64,
    intervals: Vec<[f64; 2]>,
}

pub fn build_l(config: &Path, rs: &[f64], e_out: Option<&Path>, overrides: &Overrides, seed: Option<u64>) -> CmdResult {
    let (_, cfg) = load_config(config, overrides, seed)?;
    let prepared = prepare(&cfg)?;
    let builder = prepared.l_builder()?;
    let rows: Vec<LRow> = rs
        .iter()
        .map(|&r| {
            let l = builder.build(r);
            LRow {
                r,
                in_e: prepared.e.contains(r),
                measure: l.measure,
                intervals: l.set.intervals().iter().map(|iv| [iv.lo, iv.hi]).collect(),
            }
        })
        .collect();
    if let Some(path) = e_out {
        emit(Some(path), &e_csv(&prepared.e))?;
    }
    print!("{}", to_json(&rows));
    Ok(())
}

#[derive(Serialize)]
struct StageFailure<'a> {
    success: bool,
    stage: Option<&'a str>,
    failure: String,
}

pub fn certify(config: &Path, out_dir: &Path, overrides: &Overrides, seed: Option<u64>, threads: usize) -> CmdResult {
    let (bytes, cfg) = load_config(config, overrides, seed)?;
    fs::create_dir_all(out_dir).map_err(|e| Failure::usage(format!("{}: {e}", out_dir.display())))?;
    let mut manifest = RunManifest::new("certify", config, &bytes, cfg.seed, threads);
    manifest.parameters = serde_json::to_value(&cfg).expect("config serializes");
    let io = |e: std::io::Error| Failure::failed(format!("writing outputs: {e}"));

    let out = match run_theorem1(&cfg) {
        Ok(out) => out,
        Err(e) if exit_code(&e) == 2 => return Err(e.into()),
        Err(e) => {
            let report = StageFailure {
                success: false,
                stage: e.stage(),
                failure: e.to_string(),
            };
            manifest.write(out_dir, "report.json", to_json(&report).as_bytes()).map_err(io)?;
            manifest.save(out_dir).map_err(io)?;
            return Err(e.into());
        }
    };
    manifest.stage_timings = out.timings.clone();
    let report = &out.report;
    manifest
        .write(out_dir, "report.json", (report.to_json_pretty() + "\n").as_bytes())
        .map_err(io)?;
    if let Some(e) = &out.e {
        manifest.write(out_dir, "e.csv", e_csv(e).as_bytes()).map_err(io)?;
    }
    if let Some(k) = &out.k_tilde {
        manifest.write(out_dir, "k_tilde.json", (k.to_json_pretty() + "\n").as_bytes()).map_err(io)?;
    }
    if let Some(b) = &out.bundle {
        manifest.write(out_dir, "certificates.json", to_json(b).as_bytes()).map_err(io)?;
    }
    manifest.save(out_dir).map_err(io)?;

    let verified = report.certificates.iter().filter(|c| c.verified).count();
    println!(
        "{}: {verified} certificate(s) verified, report hash {}",
        if report.success { "success" } else { "failure" },
        report.hash()
    );
    if report.success {
        Ok(())
    } else {
        Err(Failure::failed(report.failure.clone().unwrap_or_else(|| "run did not succeed".into())))
    }
}

pub fn verify_only(path: &Path) -> CmdResult {
    let bytes = read(path)?;
    let bundle: CertificateBundle =
        serde_json::from_slice(&bytes).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let checks = verify_bundle(&bundle).map_err(|e| Failure::failed(e.to_string()))?;
    let mut failed = 0;
    for (i, check) in checks.iter().enumerate() {
        match check {
            CertificateCheck::Ok { entries, fiber_points } => {
                println!("certificate {i}: ok ({entries} entries, {fiber_points} fiber points)")
            }
            CertificateCheck::Failed {
                index,
                configuration,
                reason,
            } => {
                failed += 1;
                let at = match (index, configuration) {
                    (Some(j), Some(u)) => format!(" at entry {j}, configuration ({}, {})", u.r, u.t),
                    _ => String::new(),
                };
                println!("certificate {i}: FAILED{at}: {}", serde_json::to_string(reason).unwrap());
            }
        }
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::failed(format!("{failed} of {} certificate(s) failed", checks.len())))
    }
}
