//! End-to-end construction: refine, build `E` and `L(r)`, pick `ω₀`,
//! perturb, and certify intervals in `K̃ - r K'`.

use std::time::Instant;

use log::{info, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::candidates::{build_rows, CandidateParams, CandidateSets, Window};
use super::lset::{LBuilder, LParams};
use super::omega::{estimate_failure_probability, find_return_words, select_omega, FailureEstimate, OmegaSpace, Rejector};
use crate::constants::{Constants, ConstantsLedger, Source};
use crate::error::{Error, Result};
use crate::ifs::{
    dimension_hypothesis, ifs_epsilon_close, moran_dimension, retake_pair, CantorIfs, EpsilonClosenessReport, RetakenPair,
};
use crate::interval::Interval;
use crate::projection::{build_e, EParams, ESet};
use crate::recurrence::{close_certificate, verify_certificate, CertificateBundle, ClosureParams, RecurrenceCertificate};
use crate::renorm::{renormalize, Configuration, PerturbationVector};
use crate::Mode;

/// Grid resolutions. Unset entries follow the scale `ρ`: `E` histograms
/// at `√ρ/4`, `L`-rows and certificate fibers every `ρ/4`, `Δ` every
/// `ρ^{5/2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    pub e_r_cells: usize,
    pub e_depth: usize,
    pub bin_width: Option<f64>,
    pub l_r_step: Option<f64>,
    pub gamma_points: usize,
    pub delta_spacing: Option<f64>,
    pub delta_window: Option<Window>,
    pub max_delta: usize,
    pub certificates: usize,
    pub certificate_length: Option<f64>,
    pub certificate_resolution: Option<f64>,
    pub certificate_tolerance: Option<f64>,
    pub certificate_max_points: usize,
    pub failure_samples: usize,
    pub failure_points: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            e_r_cells: 200,
            e_depth: 8,
            bin_width: None,
            l_r_step: None,
            gamma_points: 64,
            delta_spacing: None,
            delta_window: None,
            max_delta: 20_000,
            certificates: 3,
            certificate_length: None,
            certificate_resolution: None,
            certificate_tolerance: None,
            certificate_max_points: 20_000,
            failure_samples: 0,
            failure_points: 4,
        }
    }
}

fn default_budget() -> usize {
    2000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub ifs_k: CantorIfs,
    #[serde(default)]
    pub ifs_k_prime: Option<CantorIfs>,
    #[serde(default)]
    pub mode: Mode,
    pub epsilon: f64,
    #[serde(rename = "M")]
    pub m_bound: f64,
    pub rho: f64,
    #[serde(default)]
    pub constants: Constants,
    #[serde(default)]
    pub seed: u64,
    /// Largest number of `ω` samples tried.
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub grids: Grids,
    /// Number of rows `N` in place of the formula value.
    #[serde(default)]
    pub n_override: Option<usize>,
}

impl PipelineConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn k_prime(&self) -> &CantorIfs {
        self.ifs_k_prime.as_ref().unwrap_or(&self.ifs_k)
    }
}

/// Grid values actually used.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedGrids {
    pub bin_width: f64,
    pub l_r_step: f64,
    pub delta_spacing: f64,
    pub delta_window: Window,
    pub certificate_length: f64,
    pub certificate_resolution: f64,
    pub certificate_tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinementSummary {
    pub k_size: usize,
    pub k_prime_size: usize,
    pub a1: Vec<String>,
    pub a2: Vec<String>,
    pub long: Vec<String>,
    pub short: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ESummary {
    pub cells: usize,
    pub measure: f64,
    pub excluded_measure: f64,
    pub c4: f64,
    pub c5: f64,
    pub markov_bound: f64,
    pub intervals: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LSummary {
    pub n_rows: usize,
    pub n_override: bool,
    pub computed_rows: usize,
    pub min_measure: f64,
    pub mean_measure: f64,
    pub c8: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelectionSummary {
    pub found: bool,
    pub attempts: usize,
    pub invalid: usize,
    pub hardest: Vec<Rejector>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilitySummary {
    pub probes: usize,
    pub offset: f64,
    pub max_displacement: f64,
    /// `max_displacement / ρ^{3/2}`.
    pub fitted_c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateSummary {
    pub r: f64,
    pub covered_t_interval: Interval,
    pub entries: usize,
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub success: bool,
    pub failure: Option<String>,
    pub mode: Mode,
    pub epsilon: f64,
    #[serde(rename = "M")]
    pub m_bound: f64,
    pub rho: f64,
    pub seed: u64,
    pub budget: usize,
    pub d: f64,
    pub d_prime: f64,
    pub grids: Option<ResolvedGrids>,
    pub constants: Option<ConstantsLedger>,
    pub refinement: Option<RefinementSummary>,
    pub e: Option<ESummary>,
    pub l: Option<LSummary>,
    pub delta_points: usize,
    pub selection: Option<SelectionSummary>,
    pub closeness: Option<EpsilonClosenessReport>,
    pub stability: Option<StabilitySummary>,
    pub certificates: Vec<CertificateSummary>,
    pub failure_estimates: Vec<FailureEstimate>,
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// SHA-256 of the pretty JSON form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json_pretty().as_bytes()))
    }
}

/// Wall-clock time of one stage. Kept out of the report so reports stay
/// reproducible.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: &'static str,
    pub seconds: f64,
}

struct Clock {
    last: Instant,
    laps: Vec<StageTiming>,
}

impl Clock {
    fn new() -> Self {
        Self {
            last: Instant::now(),
            laps: Vec::new(),
        }
    }

    fn lap(&mut self, stage: &'static str) {
        let now = Instant::now();
        self.laps.push(StageTiming {
            stage,
            seconds: (now - self.last).as_secs_f64(),
        });
        self.last = now;
    }
}

pub struct RunOutput {
    pub report: RunReport,
    pub timings: Vec<StageTiming>,
    pub k_tilde: Option<CantorIfs>,
    pub e: Option<ESet>,
    pub bundle: Option<CertificateBundle>,
    pub sets: Option<CandidateSets>,
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.at_stage(name))
}

/// Row of the candidate grid used for a certificate, and the fiber
/// interval of length `len` well inside `L(r)`, nearest the window center.
fn certificate_fibers(sets: &CandidateSets, window: &Window, len: f64, count: usize) -> Vec<(f64, Interval)> {
    let target = 0.5 * (window.r_lo + window.r_hi);
    let mut rows: Vec<usize> = (0..sets.rows.len()).filter(|&j| sets.rows[j].is_some()).collect();
    rows.sort_by(|&a, &b| {
        (sets.row_r(a) - target)
            .abs()
            .total_cmp(&(sets.row_r(b) - target).abs())
            .then(a.cmp(&b))
    });
    let t_mid = 0.5 * (window.t_lo + window.t_hi);
    let mut out = Vec::new();
    for j in rows {
        if out.len() == count {
            break;
        }
        let r = sets.row_r(j);
        let Some(set) = sets.rows[j].as_ref() else { continue };
        let best = set
            .intervals()
            .iter()
            .filter(|iv| iv.length() >= 2.0 * len)
            .map(|iv| {
                let c = t_mid.clamp(iv.lo + len, iv.hi - len);
                Interval::new(c - 0.5 * len, c + 0.5 * len)
            })
            .min_by(|a, b| (a.center() - t_mid).abs().total_cmp(&(b.center() - t_mid).abs()));
        if let Some(iv) = best {
            out.push((r, iv));
        }
    }
    out
}

/// Default `Δ` window: a `4ρ` square around the longest stretch of
/// `L(r)` nearest `t = 0`, on the computed row nearest `r = 1`.
fn default_window(sets: &CandidateSets) -> Option<Window> {
    let rho = sets.rho;
    let j = (0..sets.rows.len())
        .filter(|&j| sets.rows[j].as_ref().is_some_and(|s| !s.is_empty()))
        .min_by(|&a, &b| (sets.row_r(a) - 1.0).abs().total_cmp(&(sets.row_r(b) - 1.0).abs()))?;
    let set = sets.rows[j].as_ref()?;
    let iv = set
        .intervals()
        .iter()
        .min_by(|a, b| a.distance(0.0).total_cmp(&b.distance(0.0)).then(b.length().total_cmp(&a.length())))?;
    let t = 0.0f64.clamp(iv.lo, iv.hi);
    let r = sets.row_r(j);
    Some(Window {
        r_lo: r - 2.0 * rho,
        r_hi: r + 2.0 * rho,
        t_lo: t - 2.0 * rho,
        t_hi: t + 2.0 * rho,
    })
}

/// Everything up to the admissible sets: dimensions, constants, the
/// retaken pair, `E`, and the parameters of `L(r)`.
pub struct Prepared {
    pub d: f64,
    pub d_prime: f64,
    pub ledger: ConstantsLedger,
    pub pair: RetakenPair,
    pub e: ESet,
    pub bin_width: f64,
    pub l_params: LParams,
    pub notes: Vec<String>,
}

impl Prepared {
    pub fn l_builder(&self) -> Result<LBuilder<'_>> {
        LBuilder::new(&self.pair.k, &self.pair.k_prime, &self.pair.split, &self.l_params, &self.e)
    }
}

pub fn prepare(config: &PipelineConfig) -> Result<Prepared> {
    prepare_timed(config, &mut Clock::new())
}

fn prepare_timed(config: &PipelineConfig, clock: &mut Clock) -> Result<Prepared> {
    let rho = config.rho;
    let eps = config.epsilon;
    let m = config.m_bound;
    let mode = config.mode;
    let g = &config.grids;
    if mode == Mode::SelfSum && config.ifs_k_prime.as_ref().is_some_and(|kp| kp != &config.ifs_k) {
        return Err(Error::InvalidArgument("self-sum mode takes a single IFS".into()).at_stage("config"));
    }
    let k0 = &config.ifs_k;
    let kp0 = config.k_prime();
    let mut notes = Vec::new();

    info!("checking dimensions");
    let d = stage("hypothesis", moran_dimension(k0))?;
    let d_prime = stage("hypothesis", moran_dimension(kp0))?;
    stage("hypothesis", dimension_hypothesis(d, d_prime, mode))?;
    clock.lap("hypothesis");

    let mut ledger = stage("constants", ConstantsLedger::new(&config.constants, rho, eps, m, d, d_prime))?;
    if !ledger.consistent() {
        notes.push("constant consistency check fails at these values; run continues with the measured stand-ins".into());
    }

    info!("retaking the generating families at scale {rho}");
    let pair = stage("refine", retake_pair(k0, kp0, rho, ledger.c0(), mode))?;
    clock.lap("refine");

    info!("building E on {} cells at depth {}", g.e_r_cells, g.e_depth);
    let bin_width = g.bin_width.unwrap_or(0.25 * rho.sqrt());
    let e = stage(
        "build_e",
        build_e(
            k0,
            kp0,
            &EParams {
                m_bound: m,
                epsilon: eps,
                r_cells: g.e_r_cells,
                depth: g.e_depth,
                bin_width,
            },
        ),
    )?;
    clock.lap("build_e");
    ledger.set("c4", e.c4, Source::Measured);
    ledger.set("c5", e.c5, Source::Measured);

    let n_rows = match config.n_override {
        Some(n) => {
            warn!("using N = {n} rows in place of the formula value {}", ledger.n_rows());
            notes.push(format!("N overridden to {n}; formula value is {}", ledger.n_rows()));
            n
        }
        None => ledger.n_rows(),
    };
    let l_params = LParams {
        rho,
        epsilon: eps,
        m_bound: m,
        c1: ledger.c1(),
        c6: ledger.c6(),
        c7: ledger.c7(),
        n_rows,
        mode,
        gamma_points: g.gamma_points,
    };
    Ok(Prepared {
        d,
        d_prime,
        ledger,
        pair,
        e,
        bin_width,
        l_params,
        notes,
    })
}

/// Run the whole construction. Stage errors carry the stage name; an `ω`
/// search that exhausts its budget yields a report with `success = false`.
pub fn run_theorem1(config: &PipelineConfig) -> Result<RunOutput> {
    let rho = config.rho;
    let eps = config.epsilon;
    let m = config.m_bound;
    let mode = config.mode;
    let g = &config.grids;
    let mut clock = Clock::new();
    let Prepared {
        d,
        d_prime,
        mut ledger,
        pair,
        e,
        bin_width,
        l_params: lp,
        notes,
    } = prepare_timed(config, &mut clock)?;
    let (k, kp, split) = (&pair.k, &pair.k_prime, &pair.split);

    let mut report = RunReport {
        success: false,
        failure: None,
        mode,
        epsilon: eps,
        m_bound: m,
        rho,
        seed: config.seed,
        budget: config.budget,
        d,
        d_prime,
        grids: None,
        constants: None,
        refinement: Some(RefinementSummary {
            k_size: k.len(),
            k_prime_size: kp.len(),
            a1: split.labels(k, &split.a1()),
            a2: split.labels(k, &split.a2()),
            long: split.labels(k, &split.long()),
            short: split.labels(k, &split.short()),
        }),
        e: Some(ESummary {
            cells: e.cells.len(),
            measure: e.measure(),
            excluded_measure: e.excluded_measure,
            c4: e.c4,
            c5: e.c5,
            markov_bound: e.markov_bound,
            intervals: e.intervals().len(),
        }),
        l: None,
        delta_points: 0,
        selection: None,
        closeness: None,
        stability: None,
        certificates: Vec::new(),
        failure_estimates: Vec::new(),
        notes,
    };
    let n_rows = lp.n_rows;

    let l_r_step = g.l_r_step.unwrap_or(0.25 * rho);
    let delta_spacing = g.delta_spacing.unwrap_or(rho.powf(2.5));
    let builder = stage("build_l", LBuilder::new(k, kp, split, &lp, &e))?;

    info!("computing L(r) on r-steps of {l_r_step}");
    let rows = stage("candidate_sets", build_rows(&builder, l_r_step))?;
    let window = match g.delta_window {
        Some(w) => w,
        None => default_window(&rows)
            .ok_or_else(|| Error::EmptyCandidates("L⁰ is empty".into()).at_stage("candidate_sets"))?,
    };
    let sets = stage(
        "candidate_sets",
        rows.with_delta(&CandidateParams {
            r_step: l_r_step,
            delta_spacing,
            delta_window: window,
            max_delta: g.max_delta,
        }),
    )?;
    clock.lap("build_l");
    let (min_l, mean_l) = sets.l_measure_stats();
    ledger.set("c8_measured", min_l, Source::Measured);
    report.l = Some(LSummary {
        n_rows,
        n_override: config.n_override.is_some(),
        computed_rows: sets.computed_rows(),
        min_measure: min_l,
        mean_measure: mean_l,
        c8: ledger.c8(),
    });
    report.delta_points = sets.delta.len();
    let cert_len = g.certificate_length.unwrap_or(rho);
    let resolved = ResolvedGrids {
        bin_width,
        l_r_step,
        delta_spacing,
        delta_window: sets.delta_window,
        certificate_length: cert_len,
        certificate_resolution: g.certificate_resolution.unwrap_or(0.25 * rho),
        certificate_tolerance: g.certificate_tolerance.unwrap_or(0.5 * rho),
    };
    report.grids = Some(resolved.clone());

    info!("searching for ω₀ over {} points of Δ", sets.delta.len());
    let space = OmegaSpace {
        alphabet_size: k.len(),
        a1: split.a1(),
        epsilon: eps,
        rho,
        c1: ledger.c1(),
    };
    let selection = select_omega(&sets, k, kp, &space, mode, config.budget, config.seed);
    clock.lap("select_omega");
    report.selection = Some(SelectionSummary {
        found: selection.omega.is_some(),
        attempts: selection.attempts,
        invalid: selection.invalid,
        hardest: selection.hardest.clone(),
    });

    if g.failure_samples > 0 {
        let step = (sets.delta.len() / g.failure_points.max(1)).max(1);
        for u in sets.delta.iter().step_by(step).take(g.failure_points) {
            report.failure_estimates.push(estimate_failure_probability(
                *u,
                &sets,
                k,
                kp,
                &space,
                mode,
                g.failure_samples,
                config.seed ^ 0x5eed,
            ));
        }
    }

    if g.failure_samples > 0 {
        clock.lap("failure_estimates");
    }
    let Some(omega) = selection.omega else {
        report.failure = Some(format!(
            "select_omega: no sample out of {} returned all of Δ into L⁰",
            config.budget
        ));
        report.constants = Some(ledger);
        return Ok(RunOutput {
            report,
            timings: clock.laps,
            k_tilde: None,
            e: Some(e),
            bundle: None,
            sets: Some(sets),
        });
    };

    let k_tilde = stage("assemble", omega.apply(k))?;
    let kp_tilde = match mode {
        Mode::SelfSum => k_tilde.clone(),
        Mode::CrossSum => kp.clone(),
    };
    let closeness = ifs_epsilon_close(k, &k_tilde, eps);
    report.stability = Some(stability(&sets, k, kp, &omega, mode, rho));

    info!("closing {} certificates", g.certificates);
    let fibers = certificate_fibers(&sets, &sets.delta_window, cert_len, g.certificates);
    if fibers.len() < g.certificates {
        report.notes.push(format!(
            "only {} rows have a stretch of L(r) long enough for a certificate",
            fibers.len()
        ));
    }
    let mut certs: Vec<RecurrenceCertificate> = Vec::new();
    for (r, iv) in fibers {
        let params = ClosureParams {
            r,
            covered: iv,
            resolution: resolved.certificate_resolution,
            tolerance: resolved.certificate_tolerance,
            m_bound: m,
            rho,
            word_len: 2,
            max_points: g.certificate_max_points,
        };
        match close_certificate(&k_tilde, &kp_tilde, &params, |v| sets.in_l(v)) {
            Ok(cert) => {
                let verified = stage("certificates", verify_certificate(&cert, &k_tilde, &kp_tilde, None))?.is_ok();
                report.certificates.push(CertificateSummary {
                    r,
                    covered_t_interval: iv,
                    entries: cert.entries.len(),
                    verified,
                });
                certs.push(cert);
            }
            Err(err) => report.notes.push(format!("certificate at r = {r}: {err}")),
        }
    }

    clock.lap("certificates");
    let certified = report.certificates.iter().filter(|c| c.verified).count();
    report.success = closeness.ok && certified >= g.certificates;
    if !report.success {
        report.failure = Some(if !closeness.ok {
            "assemble: perturbed family is not ε-close".into()
        } else {
            format!("certificates: {certified} of {} verified", g.certificates)
        });
    }
    report.closeness = Some(closeness);
    report.constants = Some(ledger);
    Ok(RunOutput {
        report,
        timings: clock.laps,
        k_tilde: Some(k_tilde.clone()),
        e: Some(e),
        bundle: Some(CertificateBundle {
            ifs_k: k_tilde,
            ifs_k_prime: kp_tilde,
            certificates: certs,
        }),
        sets: Some(sets),
    })
}

/// Move each probed point of `Δ` by the net spacing and compare the images
/// under the return that works for the point itself.
fn stability(
    sets: &CandidateSets,
    k: &CantorIfs,
    kp: &CantorIfs,
    omega: &PerturbationVector,
    mode: Mode,
    rho: f64,
) -> StabilitySummary {
    let offset = sets.delta_spacing;
    let mut max_disp: f64 = 0.0;
    let mut probes = 0;
    let step = (sets.delta.len() / 200).max(1);
    for u in sets.delta.iter().step_by(step) {
        if let Some((f, fp)) = find_return_words(*u, sets, k, kp, omega, mode) {
            let v0 = renormalize(*u, &f, &fp);
            let moved = Configuration {
                r: u.r + offset,
                t: u.t + offset,
            };
            max_disp = max_disp.max(renormalize(moved, &f, &fp).distance(&v0));
            probes += 1;
        }
    }
    StabilitySummary {
        probes,
        offset,
        max_displacement: max_disp,
        fitted_c: max_disp / rho.powf(1.5),
    }
}
