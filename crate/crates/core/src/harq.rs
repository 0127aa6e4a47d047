//! M-state Markov model of the HARQ chase-combining queue.
//!
//! A packet is decoded at attempt m iff the accumulated SNR
//! `Σ_{l≤m} ζ^{(l)} z_l` reaches κ. State m (0 ≤ m < M) means the head-of-line
//! packet has already failed m attempts. From state m the chain moves to m+1
//! with probability `p_m` and back to 0 otherwise; state M−1 always returns
//! to 0 because the packet is removed at the deadline.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{SensingProfile, SystemParams};
use crate::error::{Error, Result};
use crate::numerics::{exp_sum_cdf, perron_root, ExponentialMixture, Matrix, SeriesControl};

/// How the per-history failure ratios are averaged in `p_m`, m ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistoryWeighting {
    /// Failure ratio of each scenario history weighted by the history's
    /// prior probability, the expression printed alongside the chain model.
    Prior,
    /// Histories weighted by their probability given m failures, i.e. the
    /// exact conditional `Pr{fail m+1 | failed 1..m}` a simulation measures.
    #[default]
    Posterior,
}

/// Counts `(m_1, .., m_4)` of frames spent in each scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScenarioHistory {
    pub counts: [u32; 4],
}

impl ScenarioHistory {
    pub fn len(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All compositions of `m` into four parts, in lexicographic order.
    pub fn compositions(m: u32) -> Vec<ScenarioHistory> {
        let mut out = Vec::new();
        for a in 0..=m {
            for b in 0..=m - a {
                for c in 0..=m - a - b {
                    out.push(ScenarioHistory {
                        counts: [a, b, c, m - a - b - c],
                    });
                }
            }
        }
        out
    }

    pub fn incremented(&self, scenario: usize) -> ScenarioHistory {
        let mut counts = self.counts;
        counts[scenario] += 1;
        ScenarioHistory { counts }
    }

    /// Multinomial probability `m! Π q_i^{m_i} / Π m_i!`.
    pub fn weight(&self, q: &[f64; 4]) -> f64 {
        let mut log_w = ln_factorial(self.len());
        for (&c, &qi) in self.counts.iter().zip(q) {
            if c > 0 {
                if qi == 0.0 {
                    return 0.0;
                }
                log_w += c as f64 * qi.ln() - ln_factorial(c);
            }
        }
        log_w.exp()
    }

    /// `F(κ; history)`: probability that the accumulated SNR over these
    /// frames stays below κ.
    pub fn fail_prob(&self, profile: &SensingProfile, fading_power: f64, ctl: &SeriesControl) -> Result<f64> {
        if self.is_empty() {
            return Ok(1.0);
        }
        let scales = profile.zeta.map(|z| z * fading_power).to_vec();
        let mix = ExponentialMixture::new(scales, self.counts.to_vec())?;
        exp_sum_cdf(&mix, profile.kappa, ctl)
    }
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// First-attempt failure probability `1 − Σ q_i e^{−κ/(ζ_i σ_h²)}`.
pub fn p0(profile: &SensingProfile, fading_power: f64) -> f64 {
    let p: f64 = profile
        .q
        .iter()
        .zip(&profile.zeta)
        .map(|(&q, &z)| -q * (-profile.kappa / (z * fading_power)).exp_m1())
        .sum();
    p.clamp(0.0, 1.0)
}

/// Leading small-κ behaviour of the conditional failure ratio, used when the
/// history failure probabilities underflow.
fn small_kappa_ratio(m: u32, profile: &SensingProfile, fading_power: f64) -> f64 {
    let s: f64 = profile
        .q
        .iter()
        .zip(&profile.zeta)
        .map(|(&q, &z)| q / (z * fading_power))
        .sum();
    (profile.kappa * s / (m + 1) as f64).clamp(0.0, 1.0)
}

struct HistoryTerm {
    weight: f64,
    denominator: f64,
    numerator: f64,
}

/// Probability of failing attempt m+1 given the packet failed attempts 1..m.
pub fn pm(
    m: u32,
    profile: &SensingProfile,
    fading_power: f64,
    ctl: &SeriesControl,
    weighting: HistoryWeighting,
) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("pm needs m >= 1; use p0 for the first attempt".into()));
    }
    ctl.validate()?;
    if profile.kappa == 0.0 {
        return Ok(0.0);
    }
    let histories = ScenarioHistory::compositions(m);
    let terms: Vec<HistoryTerm> = histories
        .par_iter()
        .map(|h| -> Result<HistoryTerm> {
            let weight = h.weight(&profile.q);
            if weight == 0.0 {
                return Ok(HistoryTerm {
                    weight,
                    denominator: 0.0,
                    numerator: 0.0,
                });
            }
            let denominator = h.fail_prob(profile, fading_power, ctl)?;
            let mut numerator = 0.0;
            for (j, &qj) in profile.q.iter().enumerate() {
                if qj > 0.0 {
                    numerator += qj * h.incremented(j).fail_prob(profile, fading_power, ctl)?;
                }
            }
            if numerator > denominator * (1.0 + 1e-9) + ctl.abs_floor {
                return Err(Error::Numerics(format!(
                    "history {:?}: failure numerator {numerator} exceeds denominator {denominator}",
                    h.counts
                )));
            }
            Ok(HistoryTerm {
                weight,
                denominator,
                numerator,
            })
        })
        .collect::<Result<_>>()?;

    let limit = small_kappa_ratio(m, profile, fading_power);
    let value = match weighting {
        HistoryWeighting::Prior => terms
            .iter()
            .filter(|t| t.weight > 0.0)
            .map(|t| {
                let ratio = if t.denominator > ctl.abs_floor {
                    t.numerator / t.denominator
                } else {
                    limit
                };
                t.weight * ratio
            })
            .sum::<f64>(),
        HistoryWeighting::Posterior => {
            let num: f64 = terms.iter().map(|t| t.weight * t.numerator).sum();
            let den: f64 = terms.iter().map(|t| t.weight * t.denominator).sum();
            if den > ctl.abs_floor {
                num / den
            } else {
                limit
            }
        }
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Options for building a chain from a sensing profile.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ChainOptions {
    #[serde(skip)]
    pub series: SeriesControl,
    pub weighting: HistoryWeighting,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarqChain {
    /// Failure probabilities p_0..p_{M−1}.
    pub p: Vec<f64>,
    /// Column-stochastic transition matrix, `phi[to][from]`.
    pub phi: Matrix,
    /// Steady-state distribution π.
    pub pi: Vec<f64>,
    pub p_lost: f64,
}

impl HarqChain {
    /// Chain for an arbitrary failure-probability vector.
    pub fn from_failure_probs(p: Vec<f64>) -> Result<Self> {
        let m = p.len();
        if m == 0 {
            return Err(Error::invalid("deadline_frames", "must be at least 1"));
        }
        if let Some(bad) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("failure probability {bad} outside [0, 1]")));
        }
        let mut phi = vec![vec![0.0; m]; m];
        for from in 0..m {
            if from + 1 < m {
                phi[0][from] = 1.0 - p[from];
                phi[from + 1][from] = p[from];
            } else {
                phi[0][from] = 1.0;
            }
        }
        // π_m ∝ Π_{j<m} p_j
        let mut survive = Vec::with_capacity(m);
        let mut prod = 1.0;
        for &pj in &p {
            survive.push(prod);
            prod *= pj;
        }
        let pi0 = 1.0 / survive.iter().sum::<f64>();
        let pi = survive.iter().map(|s| pi0 * s).collect();
        let p_lost = p.iter().product();
        Ok(HarqChain { p, phi, pi, p_lost })
    }

    pub fn deadline(&self) -> usize {
        self.p.len()
    }

    pub fn pi0(&self) -> f64 {
        self.pi[0]
    }

    /// Stationary vector of Φ by power iteration, independent of the
    /// product-form solution.
    pub fn stationary_by_power_iteration(&self) -> Result<Vec<f64>> {
        let (_, v) = perron_root(&self.phi, 1e-14, 1_000_000)?;
        Ok(v)
    }
}

/// Failure probabilities p_0..p_{M−1} for a deadline of M frames.
pub fn failure_probs(
    profile: &SensingProfile,
    fading_power: f64,
    deadline: usize,
    opts: &ChainOptions,
) -> Result<Vec<f64>> {
    if deadline < 1 {
        return Err(Error::invalid("deadline_frames", "must be at least 1"));
    }
    let mut p = Vec::with_capacity(deadline);
    p.push(p0(profile, fading_power));
    for m in 1..deadline as u32 {
        p.push(pm(m, profile, fading_power, &opts.series, opts.weighting)?);
    }
    Ok(p)
}

pub fn build_chain(
    profile: &SensingProfile,
    fading_power: f64,
    deadline: usize,
    opts: &ChainOptions,
) -> Result<HarqChain> {
    HarqChain::from_failure_probs(failure_probs(profile, fading_power, deadline, opts)?)
}

/// Average service and delivery rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Throughput {
    /// π₀ n / (T B): packets removed from the buffer, bits per channel use.
    pub service_rate_bcu: f64,
    /// π₀ (1 − p_lost) n / (T B): packets that reach the receiver.
    pub goodput_bcu: f64,
    pub service_rate_bps: f64,
    pub goodput_bps: f64,
}

pub fn throughput_metrics(chain: &HarqChain, params: &SystemParams) -> Throughput {
    let n = params.packet_bits as f64;
    let service_rate_bcu = chain.pi0() * n / params.channel_uses_per_frame();
    let goodput_bcu = service_rate_bcu * (1.0 - chain.p_lost);
    Throughput {
        service_rate_bcu,
        goodput_bcu,
        service_rate_bps: service_rate_bcu * params.bandwidth_hz,
        goodput_bps: goodput_bcu * params.bandwidth_hz,
    }
}
