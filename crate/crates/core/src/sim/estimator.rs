//! Batch-means error bars and the block estimator of effective capacity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::SystemParams;
use crate::error::{Error, Result};

/// Largest θ·S for a single block before `e^{-θS}` is at risk of underflow.
const SAFE_EXPONENT: f64 = 700.0;
/// Target for `θ² Var(S_b)`. Beyond a few units the sample mean of
/// `e^{-θS_b}` is dominated by the luckiest blocks and the estimate drifts up.
const LOG_VARIANCE_TARGET: f64 = 1.0;
/// Blocks shorter than this many deadlines see the chain's start-up transient.
const MIN_BLOCK_DEADLINES: u64 = 25;
const BOOTSTRAP_RESAMPLES: usize = 1000;
/// Separates bootstrap streams from the simulation streams.
const BOOTSTRAP_SALT: u64 = 0xB007_5742_A11C_E5ED;

/// A point estimate with its batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

impl Estimate {
    /// Ratio estimator `Σa / Σc` over batches, with the delta-method
    /// standard error from the per-batch residuals `a_b − r c_b`.
    /// Returns `None` when the denominator is zero in every batch.
    pub fn ratio(num: &[f64], den: &[f64]) -> Option<Estimate> {
        assert_eq!(num.len(), den.len());
        let b = num.len() as f64;
        let total_den: f64 = den.iter().sum();
        if total_den == 0.0 {
            return None;
        }
        let r = num.iter().sum::<f64>() / total_den;
        let ss: f64 = num.iter().zip(den).map(|(a, c)| (a - r * c).powi(2)).sum();
        let std_err = if b > 1.0 {
            (ss / (b * (b - 1.0))).sqrt() / (total_den / b)
        } else {
            f64::NAN
        };
        Some(Estimate { value: r, std_err })
    }

    pub fn scaled(self, k: f64) -> Estimate {
        Estimate {
            value: self.value * k,
            std_err: self.std_err * k.abs(),
        }
    }

    /// `|value − reference|` in units of standard error.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.value - reference) / self.std_err
    }
}

/// One bit per frame: was a packet removed from the buffer in that frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceTrace {
    words: Vec<u64>,
    len: u64,
}

impl ServiceTrace {
    pub fn with_len(len: u64) -> Self {
        ServiceTrace {
            words: vec![0; len.div_ceil(64) as usize],
            len,
        }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn mark(&mut self, frame: u64) {
        assert!(frame < self.len);
        self.words[(frame / 64) as usize] |= 1 << (frame % 64);
    }

    pub fn get(&self, frame: u64) -> bool {
        frame < self.len && self.words[(frame / 64) as usize] >> (frame % 64) & 1 == 1
    }

    /// Number of marked frames in `[start, end)`.
    pub fn count(&self, start: u64, end: u64) -> u64 {
        assert!(start <= end && end <= self.len);
        let (mut total, mut f) = (0u64, start);
        while f < end {
            let (word, bit) = ((f / 64) as usize, f % 64);
            let take = (64 - bit).min(end - f);
            let mask = if take == 64 { u64::MAX } else { ((1u64 << take) - 1) << bit };
            total += (self.words[word] & mask).count_ones() as u64;
            f += take;
        }
        total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffCapEstimate {
    pub theta: f64,
    pub estimate_bps: f64,
    pub estimate_bcu: f64,
    /// 95% percentile-bootstrap interval over blocks, bits/s.
    pub ci_low_bps: f64,
    pub ci_high_bps: f64,
    /// Frames per block after the underflow and variance guards.
    pub block_frames: u64,
    pub blocks: u64,
    /// Sample variance of `θ S_b` across blocks. Values well above one mean
    /// the estimate is unreliable at this run length.
    pub log_variance: f64,
}

fn log_mean_exp(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = v.clone().fold(f64::NEG_INFINITY, f64::max);
    let (sum, count) = v.fold((0.0, 0usize), |(s, c), x| (s + (x - max).exp(), c + 1));
    max + sum.ln() - (count as f64).ln()
}

fn block_sums(traces: &[&ServiceTrace], len: u64, n: f64) -> Vec<f64> {
    let mut served = Vec::new();
    for t in traces {
        let mut start = 0;
        while start + len <= t.len() {
            served.push(n * t.count(start, start + len) as f64);
            start += len;
        }
    }
    served
}

fn sample_variance(v: &[f64]) -> f64 {
    let k = v.len() as f64;
    let mean = v.iter().sum::<f64>() / k;
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)
}

/// Effective capacity from the served-bit process, using
/// `Λ̂(−θ) = (1/L) ln mean_b e^{−θ S_b}` over non-overlapping blocks of `L`
/// frames, `S_b` the bits served in block `b`. The rate is `−Λ̂/(θT)`.
///
/// `L` starts at `block_frames` and is shrunk so that `θ n L <= 700` and so
/// that `θ² Var(S_L)`, extrapolated from the initial blocks, stays near one,
/// but never below 25 deadlines. Blocks never straddle two traces, and a
/// trailing partial block is dropped.
pub fn effcap_from_trace(
    traces: &[&ServiceTrace],
    params: &SystemParams,
    theta: f64,
    block_frames: u64,
    seed: u64,
) -> Result<EffCapEstimate> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Domain(format!("θ must be positive and finite, got {theta}")));
    }
    let n = params.packet_bits as f64;
    let block_frames = block_frames.max(1);
    let mut len = block_frames;
    if n > 0.0 {
        let guard = (SAFE_EXPONENT / (theta * n)).floor().max(1.0) as u64;
        len = len.min(guard);
        let initial = block_sums(traces, block_frames, n);
        if initial.len() >= 2 {
            let per_frame = sample_variance(&initial) / block_frames as f64;
            if per_frame > 0.0 {
                let floor = MIN_BLOCK_DEADLINES * params.deadline_frames as u64;
                let by_variance = (LOG_VARIANCE_TARGET / (theta * theta * per_frame)).floor() as u64;
                len = len.min(by_variance.max(floor.min(len)));
            }
        }
    }

    let served = block_sums(traces, len, n);
    if served.len() < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 blocks of {len} frames, found {}",
            served.len()
        )));
    }
    let log_variance = theta * theta * sample_variance(&served);

    let scale = -1.0 / (len as f64 * theta * params.frame_duration_s);
    let rate = |idx: &mut dyn Iterator<Item = usize>| -> f64 {
        let v: Vec<f64> = idx.map(|i| -theta * served[i]).collect();
        scale * log_mean_exp(v.iter().copied())
    };
    let estimate_bps = rate(&mut (0..served.len()));

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ BOOTSTRAP_SALT);
    rng.set_stream(theta.to_bits());
    let k = served.len();
    let mut boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let picks: Vec<usize> = (0..k).map(|_| rng.random_range(0..k)).collect();
            rate(&mut picks.into_iter())
        })
        .collect();
    boot.sort_by(f64::total_cmp);
    let at = |q: f64| boot[((q * (BOOTSTRAP_RESAMPLES - 1) as f64).round()) as usize];

    Ok(EffCapEstimate {
        theta,
        estimate_bps,
        estimate_bcu: estimate_bps / params.bandwidth_hz,
        ci_low_bps: at(0.025),
        ci_high_bps: at(0.975),
        block_frames: len,
        blocks: k as u64,
        log_variance,
    })
}
