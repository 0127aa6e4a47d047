//! Frame-level Monte Carlo simulation of the sensing + HARQ-CC link.
//!
//! Every frame draws the primary activity, the sensing decision, and a
//! Rayleigh block-fading power `z ~ Exp(σ_h²)`. The head-of-line packet
//! accumulates `ζ_scenario · z` and is decoded once the sum reaches κ; after
//! M failed attempts it is dropped. The buffer is always backlogged.
//!
//! Frames are split into batches. Each batch starts from an empty HARQ state
//! and draws from its own ChaCha stream (`stream = batch index`), so results
//! do not depend on how batches are scheduled across threads.

mod estimator;

pub use estimator::{effcap_from_trace, EffCapEstimate, Estimate, ServiceTrace};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{scenario_profile, Scenario, SensingProfile, SystemParams};
use crate::error::{Error, Result};

/// Default number of frames per effective-capacity block.
pub const DEFAULT_BLOCK_FRAMES: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensingMode {
    /// Sensing outcome drawn from the analytic p_f / p_d.
    #[default]
    Statistical,
    /// N·B complex Gaussian samples per frame through the energy detector.
    Physical,
}

impl std::str::FromStr for SensingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "statistical" => Ok(SensingMode::Statistical),
            "physical" => Ok(SensingMode::Physical),
            other => Err(Error::Config(format!(
                "unknown sensing mode `{other}` (expected statistical|physical)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub frames: u64,
    pub seed: u64,
    pub sensing_mode: SensingMode,
    pub batches: u32,
    /// QoS exponents (1/bits) at which to estimate effective capacity.
    pub theta_grid: Vec<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            frames: 1_000_000,
            seed: 1,
            sensing_mode: SensingMode::Statistical,
            batches: 100,
            theta_grid: Vec::new(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batches < 2 {
            return Err(Error::invalid("batches", "need at least 2 batches for error bars"));
        }
        if self.frames < self.batches as u64 {
            return Err(Error::invalid(
                "frames",
                format!("{} frames cannot fill {} batches", self.frames, self.batches),
            ));
        }
        if self.theta_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::invalid("theta_grid", "QoS exponents must be positive and finite"));
        }
        Ok(())
    }

    fn batch_len(&self, batch: u32) -> u64 {
        let base = self.frames / self.batches as u64;
        let extra = (batch as u64) < self.frames % self.batches as u64;
        base + extra as u64
    }
}

/// Raw counts from one batch.
#[derive(Debug, Clone, Default)]
pub(crate) struct BatchCounts {
    frames: u64,
    idle_frames: u64,
    idle_sensed_busy: u64,
    busy_frames: u64,
    busy_sensed_busy: u64,
    scenario_frames: [u64; 4],
    /// Frames that began in state m.
    visits: Vec<u64>,
    /// Frames that began in state m and failed to decode.
    failures: Vec<u64>,
    /// Frames that ended in state m.
    occupancy: Vec<u64>,
    served: u64,
    lost: u64,
    trace: Option<ServiceTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub frames: u64,
    pub batches: u32,
    pub seed: u64,
    pub sensing_mode: SensingMode,
    pub est_pf: Option<Estimate>,
    pub est_pd: Option<Estimate>,
    /// Conditional failure frequency in each state; `None` if never visited.
    pub est_p: Vec<Option<Estimate>>,
    /// Fraction of frames ending in each state.
    pub est_pi: Vec<Estimate>,
    /// Fraction of served packets dropped at the deadline.
    pub est_p_lost: Option<Estimate>,
    pub est_service_bcu: Estimate,
    pub est_goodput_bcu: Estimate,
    pub scenario_frames: [u64; 4],
    pub packets_served: u64,
    pub packets_lost: u64,
    pub est_effcap: Vec<EffCapEstimate>,
}

struct FrameModel<'a> {
    params: &'a SystemParams,
    profile: SensingProfile,
    mode: SensingMode,
    samples: u64,
}

impl FrameModel<'_> {
    fn sense(&self, rng: &mut ChaCha8Rng, active: bool) -> bool {
        match self.mode {
            SensingMode::Statistical => {
                let prob = if active { self.profile.p_d } else { self.profile.p_f };
                rng.random::<f64>() < prob
            }
            SensingMode::Physical => {
                let var = self.params.noise_variance
                    + if active { self.params.primary_signal_variance } else { 0.0 };
                let half = var / 2.0;
                let mut energy = 0.0;
                for _ in 0..self.samples {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    energy += half * (re * re + im * im);
                }
                energy / self.samples as f64 > self.params.detection_threshold
            }
        }
    }

    fn run_batch(&self, seed: u64, batch: u32, frames: u64, keep_trace: bool) -> BatchCounts {
        let deadline = self.params.deadline_frames;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(batch as u64);
        let mut c = BatchCounts {
            frames,
            visits: vec![0; deadline],
            failures: vec![0; deadline],
            occupancy: vec![0; deadline],
            trace: keep_trace.then(|| ServiceTrace::with_len(frames)),
            ..Default::default()
        };
        let rho = self.params.primary_activity_prob;
        let kappa = self.profile.kappa;
        let mut state = 0usize;
        let mut accumulated = 0.0;
        for frame in 0..frames {
            let active = rng.random::<f64>() < rho;
            let sensed_busy = self.sense(&mut rng, active);
            if active {
                c.busy_frames += 1;
                c.busy_sensed_busy += sensed_busy as u64;
            } else {
                c.idle_frames += 1;
                c.idle_sensed_busy += sensed_busy as u64;
            }
            let scenario = Scenario::from_outcome(active, sensed_busy);
            c.scenario_frames[scenario.index()] += 1;
            let z: f64 = rng.sample::<f64, _>(Exp1) * self.params.fading_power;
            accumulated += self.profile.zeta[scenario.index()] * z;

            c.visits[state] += 1;
            let decoded = accumulated >= kappa;
            let removed = if decoded {
                true
            } else {
                c.failures[state] += 1;
                if state + 1 == deadline {
                    c.lost += 1;
                    true
                } else {
                    state += 1;
                    false
                }
            };
            if removed {
                c.served += 1;
                state = 0;
                accumulated = 0.0;
                if let Some(t) = c.trace.as_mut() {
                    t.mark(frame);
                }
            }
            c.occupancy[state] += 1;
        }
        c
    }
}

fn run(params: &SystemParams, cfg: &SimConfig, keep_trace: bool) -> Result<Vec<BatchCounts>> {
    params.validate()?;
    cfg.validate()?;
    let model = FrameModel {
        params,
        profile: scenario_profile(params)?,
        mode: cfg.sensing_mode,
        samples: params.sensing_samples(),
    };
    Ok((0..cfg.batches)
        .into_par_iter()
        .map(|b| model.run_batch(cfg.seed, b, cfg.batch_len(b), keep_trace))
        .collect())
}

/// Runs the simulation and summarizes it. Effective capacity is estimated
/// for every θ in `cfg.theta_grid`.
pub fn simulate(params: &SystemParams, cfg: &SimConfig) -> Result<SimReport> {
    let batches = run(params, cfg, !cfg.theta_grid.is_empty())?;
    summarize(params, cfg, &batches)
}

/// Effective capacity at a single θ from a fresh simulation run.
pub fn estimate_effective_capacity(params: &SystemParams, cfg: &SimConfig, theta: f64) -> Result<EffCapEstimate> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Domain(format!("θ must be positive and finite, got {theta}")));
    }
    let batches = run(params, cfg, true)?;
    let traces: Vec<&ServiceTrace> = batches.iter().filter_map(|b| b.trace.as_ref()).collect();
    let block = DEFAULT_BLOCK_FRAMES.min(cfg.frames / cfg.batches as u64);
    effcap_from_trace(&traces, params, theta, block, cfg.seed)
}

fn summarize(params: &SystemParams, cfg: &SimConfig, batches: &[BatchCounts]) -> Result<SimReport> {
    let col = |f: &dyn Fn(&BatchCounts) -> u64| -> Vec<f64> { batches.iter().map(|b| f(b) as f64).collect() };
    let frames = col(&|b| b.frames);
    let deadline = params.deadline_frames;
    let n = params.packet_bits as f64;
    let uses = params.channel_uses_per_frame();

    let est_pf = Estimate::ratio(&col(&|b| b.idle_sensed_busy), &col(&|b| b.idle_frames));
    let est_pd = Estimate::ratio(&col(&|b| b.busy_sensed_busy), &col(&|b| b.busy_frames));
    let est_p = (0..deadline)
        .map(|m| Estimate::ratio(&col(&|b| b.failures[m]), &col(&|b| b.visits[m])))
        .collect();
    let est_pi = (0..deadline)
        .map(|m| Estimate::ratio(&col(&|b| b.occupancy[m]), &frames).expect("frames > 0"))
        .collect();
    let served = col(&|b| b.served);
    let delivered: Vec<f64> = batches.iter().map(|b| (b.served - b.lost) as f64).collect();
    let est_p_lost = Estimate::ratio(&col(&|b| b.lost), &served);
    let est_service_bcu = Estimate::ratio(&served, &frames).expect("frames > 0").scaled(n / uses);
    let est_goodput_bcu = Estimate::ratio(&delivered, &frames).expect("frames > 0").scaled(n / uses);

    let mut scenario_frames = [0u64; 4];
    for b in batches {
        for (acc, v) in scenario_frames.iter_mut().zip(b.scenario_frames) {
            *acc += v;
        }
    }

    let est_effcap = if cfg.theta_grid.is_empty() {
        Vec::new()
    } else {
        let traces: Vec<&ServiceTrace> = batches.iter().filter_map(|b| b.trace.as_ref()).collect();
        let block = DEFAULT_BLOCK_FRAMES.min(cfg.frames / cfg.batches as u64);
        cfg.theta_grid
            .iter()
            .map(|&theta| effcap_from_trace(&traces, params, theta, block, cfg.seed))
            .collect::<Result<_>>()?
    };

    Ok(SimReport {
        frames: cfg.frames,
        batches: cfg.batches,
        seed: cfg.seed,
        sensing_mode: cfg.sensing_mode,
        est_pf,
        est_pd,
        est_p,
        est_pi,
        est_p_lost,
        est_service_bcu,
        est_goodput_bcu,
        scenario_frames,
        packets_served: batches.iter().map(|b| b.served).sum(),
        packets_lost: batches.iter().map(|b| b.lost).sum(),
        est_effcap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> SimConfig {
        SimConfig {
            frames: 20_000,
            seed: 7,
            batches: 10,
            ..Default::default()
        }
    }

    #[test]
    fn zero_threshold_never_fails() {
        let mut params = SystemParams::baseline();
        params.packet_bits = 0;
        let r = simulate(&params, &small_cfg()).unwrap();
        assert_eq!(r.est_p[0].unwrap().value, 0.0);
        assert!(r.est_p[1..].iter().all(|e| e.is_none()));
        assert_eq!(r.est_p_lost.unwrap().value, 0.0);
        assert_eq!(r.est_pi[0].value, 1.0);
        assert_eq!(r.packets_served, 20_000);
    }

    #[test]
    fn forced_false_alarm_scenario() {
        let mut params = SystemParams::baseline();
        params.primary_activity_prob = 0.0;
        params.detection_threshold = 0.0;
        for mode in [SensingMode::Statistical, SensingMode::Physical] {
            let cfg = SimConfig {
                sensing_mode: mode,
                ..small_cfg()
            };
            let r = simulate(&params, &cfg).unwrap();
            assert_eq!(r.scenario_frames, [0, 0, 20_000, 0]);
            assert_eq!(r.est_pf.unwrap().value, 1.0);
            assert!(r.est_pd.is_none());
        }
    }

    #[test]
    fn batch_lengths_cover_all_frames() {
        let cfg = SimConfig {
            frames: 1003,
            batches: 10,
            ..Default::default()
        };
        let total: u64 = (0..10).map(|b| cfg.batch_len(b)).sum();
        assert_eq!(total, 1003);
    }

    #[test]
    fn rejects_bad_config() {
        let params = SystemParams::baseline();
        let cfg = SimConfig {
            batches: 1,
            ..small_cfg()
        };
        assert!(simulate(&params, &cfg).is_err());
        let cfg = SimConfig {
            frames: 3,
            batches: 5,
            ..small_cfg()
        };
        assert!(simulate(&params, &cfg).is_err());
        let cfg = SimConfig {
            theta_grid: vec![-1.0],
            ..small_cfg()
        };
        assert!(simulate(&params, &cfg).is_err());
    }
}
