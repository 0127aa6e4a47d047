//! Structured output documents: analysis, simulation, sweep metadata and
//! the analytic-versus-simulation validation report.
//!
//! Every document carries the tool version and the fully resolved config,
//! and serializes without timestamps or host details so that identical
//! inputs give identical bytes.

use serde::Serialize;

use crate::channel::{scenario_profile, SensingProfile, SystemParams};
use crate::config::Config;
use crate::effcap::{effective_capacity, spectral_oracle, EffCapResult, Variant};
use crate::error::Result;
use crate::harq::{build_chain, throughput_metrics, ChainOptions, HarqChain, HistoryWeighting, Throughput};
use crate::sim::{simulate, Estimate, SimConfig, SimReport};
use crate::sweep::SweepOutput;

pub const TOOL: &str = "crharq";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Number of standard errors an estimate may sit from its analytic value.
pub const Z_LIMIT: f64 = 4.0;
/// QoS exponents used by `validate` when the config lists none.
pub const VALIDATE_THETAS: [f64; 3] = [1e-4, 1e-3, 3e-3];

pub fn to_json<T: Serialize>(doc: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct Derived {
    pub sensing_samples: u64,
    pub data_symbols: f64,
    pub channel_uses_per_frame: f64,
    pub power_busy: f64,
    pub power_idle: f64,
}

impl Derived {
    fn of(params: &SystemParams) -> Self {
        Derived {
            sensing_samples: params.sensing_samples(),
            data_symbols: params.data_symbols(),
            channel_uses_per_frame: params.channel_uses_per_frame(),
            power_busy: params.power_busy,
            power_idle: params.power_idle,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EffCapPair {
    /// Variant requested on the command line or in the config.
    pub selected: Variant,
    /// `None` at θ = 0, where the rate is the average service rate.
    pub renewal: Option<EffCapResult>,
    pub paper: Option<EffCapResult>,
}

fn effcap_pair(p: &[f64], params: &SystemParams, theta: f64, selected: Variant) -> Result<EffCapPair> {
    let run = |v| {
        effective_capacity(p, params.packet_bits, params.frame_duration_s, params.bandwidth_hz, theta, v)
    };
    if theta == 0.0 {
        return Ok(EffCapPair {
            selected,
            renewal: None,
            paper: None,
        });
    }
    Ok(EffCapPair {
        selected,
        renewal: Some(run(Variant::RenewalComplete)?),
        paper: Some(run(Variant::PaperVerbatim)?),
    })
}

/// Analytic metrics for the configured operating point.
#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: Config,
    pub derived: Derived,
    pub sensing_profile: SensingProfile,
    pub weighting: HistoryWeighting,
    pub chain: HarqChain,
    /// p_m under the other history weighting, for comparison.
    pub alternate_weighting_p: Vec<f64>,
    pub throughput: Throughput,
    pub effective_capacity: EffCapPair,
}

fn other_weighting(w: HistoryWeighting) -> HistoryWeighting {
    match w {
        HistoryWeighting::Prior => HistoryWeighting::Posterior,
        HistoryWeighting::Posterior => HistoryWeighting::Prior,
    }
}

pub fn analyze(cfg: &Config) -> Result<AnalyzeReport> {
    cfg.validate()?;
    let params = cfg.params();
    let profile = scenario_profile(&params)?;
    let opts = cfg.chain_options();
    let chain = build_chain(&profile, params.fading_power, params.deadline_frames, &opts)?;
    let alt = ChainOptions {
        weighting: other_weighting(opts.weighting),
        ..opts
    };
    let alternate_weighting_p = build_chain(&profile, params.fading_power, params.deadline_frames, &alt)?.p;
    let throughput = throughput_metrics(&chain, &params);
    let effective_capacity = effcap_pair(&chain.p, &params, params.qos_exponent, cfg.model.variant)?;
    Ok(AnalyzeReport {
        tool: TOOL,
        version: VERSION,
        config: cfg.clone(),
        derived: Derived::of(&params),
        sensing_profile: profile,
        weighting: opts.weighting,
        chain,
        alternate_weighting_p,
        throughput,
        effective_capacity,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyticSummary {
    pub p: Vec<f64>,
    pub pi: Vec<f64>,
    pub p_lost: f64,
    pub throughput: Throughput,
    pub effective_capacity: Vec<EffCapPair>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: Config,
    pub simulation: SimConfig,
    pub analytic: AnalyticSummary,
    pub empirical: SimReport,
}

pub fn simulate_report(cfg: &Config) -> Result<SimulateReport> {
    cfg.validate()?;
    let params = cfg.params();
    let sim_cfg = cfg.sim_config();
    let profile = scenario_profile(&params)?;
    let chain = build_chain(&profile, params.fading_power, params.deadline_frames, &cfg.chain_options())?;
    let effective_capacity = sim_cfg
        .theta_grid
        .iter()
        .map(|&t| effcap_pair(&chain.p, &params, t, cfg.model.variant))
        .collect::<Result<_>>()?;
    let analytic = AnalyticSummary {
        throughput: throughput_metrics(&chain, &params),
        p: chain.p,
        pi: chain.pi,
        p_lost: chain.p_lost,
        effective_capacity,
    };
    let empirical = simulate(&params, &sim_cfg)?;
    Ok(SimulateReport {
        tool: TOOL,
        version: VERSION,
        config: cfg.clone(),
        simulation: sim_cfg,
        analytic,
        empirical,
    })
}

/// Sidecar document written next to a sweep CSV.
#[derive(Debug, Clone, Serialize)]
pub struct SweepMeta<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: &'a Config,
    pub weighting: HistoryWeighting,
    pub rows: usize,
    #[serde(flatten)]
    pub output: &'a SweepOutput,
}

pub fn sweep_meta<'a>(cfg: &'a Config, output: &'a SweepOutput) -> SweepMeta<'a> {
    SweepMeta {
        tool: TOOL,
        version: VERSION,
        config: cfg,
        weighting: cfg.model.weighting,
        rows: output.rows.len(),
        output,
    }
}

/// One pass/fail line of the validation report.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// The deviation that was compared against `tolerance`.
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, measured: f64, tolerance: f64, detail: String) -> Self {
        Check {
            name: name.into(),
            passed: measured <= tolerance,
            measured,
            tolerance,
            detail,
        }
    }
}

/// Prior-weighted p_m against the simulation, reported but not checked.
#[derive(Debug, Clone, Serialize)]
pub struct WeightingResidual {
    pub m: usize,
    pub prior: f64,
    pub posterior: f64,
    pub empirical: f64,
    pub prior_z: f64,
    pub posterior_z: f64,
}

/// How each closed-form variant compares with the simulated rate.
#[derive(Debug, Clone, Serialize)]
pub struct VariantComparison {
    pub theta: f64,
    pub renewal_bcu: f64,
    pub paper_bcu: f64,
    pub empirical_bcu: f64,
    pub ci_low_bcu: f64,
    pub ci_high_bcu: f64,
    pub renewal_inside_ci: bool,
    pub paper_inside_ci: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: Config,
    pub simulation: SimConfig,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub weighting_residuals: Vec<WeightingResidual>,
    pub variant_comparison: Vec<VariantComparison>,
}

/// Test hooks for negative controls.
#[derive(Debug, Clone, Default)]
pub struct ValidationHooks {
    /// Replaces the failure probabilities fed to the root finder only, so
    /// the polynomial and spectral answers should disagree.
    pub root_failure_probs: Option<Vec<f64>>,
}

/// Distance from `reference` in standard errors. A zero standard error
/// counts as exact agreement only when the values coincide to rounding.
fn sigmas(est: &Estimate, reference: f64) -> f64 {
    let gap = (est.value - reference).abs();
    if gap <= 1e-12 * reference.abs().max(1.0) {
        0.0
    } else if est.std_err > 0.0 {
        gap / est.std_err
    } else {
        f64::INFINITY
    }
}

fn worst(items: impl IntoIterator<Item = (String, f64)>) -> (f64, String) {
    let mut max = 0.0f64;
    let mut parts = Vec::new();
    for (label, v) in items {
        max = max.max(if v.is_nan() { f64::INFINITY } else { v });
        parts.push(format!("{label}: {v:.3}"));
    }
    (max, parts.join(", "))
}

fn inside(v: f64, lo: f64, hi: f64) -> bool {
    let slack = 1e-9 * v.abs().max(1e-300);
    lo - slack <= v && v <= hi + slack
}

/// Runs every analytic-versus-oracle check for the configured point.
pub fn validate(cfg: &Config, hooks: &ValidationHooks) -> Result<ValidationReport> {
    cfg.validate()?;
    let params = cfg.params();
    let profile = scenario_profile(&params)?;
    let opts = cfg.chain_options();
    let chain = build_chain(&profile, params.fading_power, params.deadline_frames, &opts)?;
    let prior = build_chain(
        &profile,
        params.fading_power,
        params.deadline_frames,
        &ChainOptions {
            weighting: HistoryWeighting::Prior,
            ..opts
        },
    )?;
    let mut sim_cfg = cfg.sim_config();
    if sim_cfg.theta_grid.is_empty() {
        sim_cfg.theta_grid = VALIDATE_THETAS.to_vec();
    }
    let n = params.packet_bits;
    let (t, b) = (params.frame_duration_s, params.bandwidth_hz);
    let mut checks = Vec::new();

    let eigen = chain.stationary_by_power_iteration()?;
    let gap = chain.pi.iter().zip(&eigen).map(|(a, e)| (a - e).abs()).fold(0.0, f64::max);
    checks.push(Check::new(
        "steady_state_closed_form_vs_eigenvector",
        gap,
        1e-10,
        format!("max |pi - eigvec| over {} states", chain.pi.len()),
    ));

    let root_p = hooks.root_failure_probs.as_deref().unwrap_or(&chain.p);
    let mut chi_gaps = Vec::new();
    for &theta in &sim_cfg.theta_grid {
        let chi = effective_capacity(root_p, n, t, b, theta, Variant::RenewalComplete)?.chi_star;
        let spectral = spectral_oracle(&chain.p, n, theta)?;
        chi_gaps.push((format!("theta={theta}"), (chi - spectral).abs()));
    }
    let (gap, detail) = worst(chi_gaps);
    checks.push(Check::new("root_vs_spectral_radius", gap, 1e-9, detail));

    let sim = simulate(&params, &sim_cfg)?;
    if let (Some(pf), Some(pd)) = (&sim.est_pf, &sim.est_pd) {
        let (z, detail) = worst([
            ("p_f".to_string(), sigmas(pf, profile.p_f)),
            ("p_d".to_string(), sigmas(pd, profile.p_d)),
        ]);
        checks.push(Check::new("sensing_probabilities", z, Z_LIMIT, detail));
    }

    let mut residuals = Vec::new();
    let mut p_z = Vec::new();
    for (m, est) in sim.est_p.iter().enumerate() {
        let Some(est) = est else { continue };
        p_z.push((format!("p_{m}"), sigmas(est, chain.p[m])));
        residuals.push(WeightingResidual {
            m,
            prior: prior.p[m],
            posterior: chain.p[m],
            empirical: est.value,
            prior_z: est.z_score(prior.p[m]),
            posterior_z: est.z_score(chain.p[m]),
        });
    }
    let (z, detail) = worst(p_z);
    checks.push(Check::new("failure_probabilities", z, Z_LIMIT, detail));

    let (z, detail) = worst(
        sim.est_pi
            .iter()
            .enumerate()
            .map(|(m, e)| (format!("pi_{m}"), sigmas(e, chain.pi[m]))),
    );
    checks.push(Check::new("steady_state", z, Z_LIMIT, detail));

    if let Some(est) = &sim.est_p_lost {
        let z = sigmas(est, chain.p_lost);
        checks.push(Check::new("packet_loss", z, Z_LIMIT, format!("p_lost: {z:.3}")));
    }

    let tp = throughput_metrics(&chain, &params);
    let (z, detail) = worst([
        ("service".to_string(), sigmas(&sim.est_service_bcu, tp.service_rate_bcu)),
        ("goodput".to_string(), sigmas(&sim.est_goodput_bcu, tp.goodput_bcu)),
    ]);
    checks.push(Check::new("throughput", z, Z_LIMIT, detail));

    let mut comparison = Vec::new();
    for est in &sim.est_effcap {
        let renewal = effective_capacity(&chain.p, n, t, b, est.theta, Variant::RenewalComplete)?.eff_cap_bcu;
        let paper = effective_capacity(&chain.p, n, t, b, est.theta, Variant::PaperVerbatim)?.eff_cap_bcu;
        let (lo, hi) = (est.ci_low_bps / b, est.ci_high_bps / b);
        comparison.push(VariantComparison {
            theta: est.theta,
            renewal_bcu: renewal,
            paper_bcu: paper,
            empirical_bcu: est.estimate_bcu,
            ci_low_bcu: lo,
            ci_high_bcu: hi,
            renewal_inside_ci: inside(renewal, lo, hi),
            paper_inside_ci: inside(paper, lo, hi),
        });
    }
    let misses = comparison.iter().filter(|c| !c.renewal_inside_ci).count();
    checks.push(Check::new(
        "effective_capacity_inside_simulated_ci",
        misses as f64,
        0.0,
        comparison
            .iter()
            .map(|c| format!("theta={}: {:.5} in [{:.5}, {:.5}]", c.theta, c.renewal_bcu, c.ci_low_bcu, c.ci_high_bcu))
            .collect::<Vec<_>>()
            .join(", "),
    ));

    Ok(ValidationReport {
        tool: TOOL,
        version: VERSION,
        config: cfg.clone(),
        simulation: sim_cfg,
        passed: checks.iter().all(|c| c.passed),
        checks,
        weighting_residuals: residuals,
        variant_comparison: comparison,
    })
}
