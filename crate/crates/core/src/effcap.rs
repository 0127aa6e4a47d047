//! Effective capacity of the HARQ service process.
//!
//! The queue is served n bits whenever the chain returns to state 0. Writing
//! the characteristic polynomial as
//!
//! ```text
//! f(χ) = χ^M − Σ_{m=0}^{M−1} w_m χ^{M−1−m}
//! ```
//!
//! each `w_m` is `e^{−θn}` times the probability of a service cycle that lasts
//! m+1 frames. The effective capacity is `−ln(χ*) / (θT)` for the positive
//! root χ*. The root is located in the coordinate `u = −ln χ`, where
//! `Σ w_m e^{(m+1)u} = 1` is monotone and can be evaluated in the log domain
//! without underflow for any θ.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harq::HarqChain;
use crate::numerics::{bisect_root, perron_root};

/// Which constant term of the characteristic polynomial to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Constant term `e^{−θn} Π_{j=0}^{M−1} p_j`, exactly as the closed form
    /// is usually printed. The cycle weights then sum to less than one at
    /// θ = 0 and the capacity diverges as θ → 0.
    PaperVerbatim,
    /// Constant term `e^{−θn} Π_{j=0}^{M−2} p_j`: the deadline cycle is
    /// taken with probability one, so the cycle weights sum to one.
    #[default]
    RenewalComplete,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::RenewalComplete, Variant::PaperVerbatim];

    pub fn label(self) -> &'static str {
        match self {
            Variant::PaperVerbatim => "paper",
            Variant::RenewalComplete => "renewal",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" | "paper_verbatim" => Ok(Variant::PaperVerbatim),
            "renewal" | "renewal_complete" => Ok(Variant::RenewalComplete),
            other => Err(Error::Config(format!("unknown variant `{other}` (expected paper|renewal)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffCapResult {
    pub theta: f64,
    pub chi_star: f64,
    /// bits per second
    pub eff_cap_bps: f64,
    /// bits per channel use
    pub eff_cap_bcu: f64,
    pub variant: Variant,
}

fn check_p(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::invalid("deadline_frames", "failure-probability vector is empty"));
    }
    if let Some(bad) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Domain(format!("failure probability {bad} outside [0, 1]")));
    }
    Ok(())
}

/// θ-free cycle probabilities `b_m`, so that `w_m = e^{−θn} b_m`.
pub fn cycle_probs(p: &[f64], variant: Variant) -> Vec<f64> {
    let m = p.len();
    let mut b = vec![0.0; m];
    let mut survive = 1.0;
    match variant {
        Variant::RenewalComplete => {
            for j in 0..m {
                b[j] = if j + 1 < m { (1.0 - p[j]) * survive } else { survive };
                survive *= p[j];
            }
        }
        Variant::PaperVerbatim => {
            b[0] += 1.0 - p[0];
            for j in 1..m.saturating_sub(1) {
                survive *= p[j - 1];
                b[j] += (1.0 - p[j]) * survive;
            }
            b[m - 1] += p.iter().product::<f64>();
        }
    }
    b
}

/// `f(χ)` for the given variant.
pub fn char_poly(chi: f64, p: &[f64], n: u64, theta: f64, variant: Variant) -> f64 {
    let m = p.len() as i32;
    let e = (-theta * n as f64).exp();
    let b = cycle_probs(p, variant);
    let tail: f64 = b
        .iter()
        .enumerate()
        .map(|(j, bj)| bj * chi.powi(m - 1 - j as i32))
        .sum();
    chi.powi(m) - e * tail
}

/// `ln Σ_m b_m e^{(m+1)u − θn}`; zero exactly at the root u* = −ln χ*.
fn log_cycle_sum(u: f64, log_b: &[(usize, f64)], theta_n: f64) -> f64 {
    if u < 1.0 {
        // ln(1 + s) keeps precision when the root is close to u = 0.
        let s: f64 = log_b
            .iter()
            .map(|&(j, lb)| lb.exp() * ((j + 1) as f64 * u).exp_m1())
            .sum::<f64>()
            + (log_b.iter().map(|&(_, lb)| lb.exp()).sum::<f64>() - 1.0);
        s.ln_1p() - theta_n
    } else {
        let exps: Vec<f64> = log_b.iter().map(|&(j, lb)| lb + (j + 1) as f64 * u).collect();
        let max = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        max + exps.iter().map(|v| (v - max).exp()).sum::<f64>().ln() - theta_n
    }
}

/// Effective capacity for failure probabilities `p`, packet size `n` bits,
/// frame duration `frame_s`, bandwidth `bandwidth_hz` and QoS exponent θ > 0.
pub fn effective_capacity(
    p: &[f64],
    n: u64,
    frame_s: f64,
    bandwidth_hz: f64,
    theta: f64,
    variant: Variant,
) -> Result<EffCapResult> {
    check_p(p)?;
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Domain(format!(
            "effective capacity needs a finite θ > 0, got {theta}"
        )));
    }
    let theta_n = theta * n as f64;
    let log_b: Vec<(usize, f64)> = cycle_probs(p, variant)
        .into_iter()
        .enumerate()
        .filter(|(_, b)| *b > 0.0)
        .map(|(j, b)| (j, b.ln()))
        .collect();
    if log_b.is_empty() {
        return Err(Error::Numerics("all service-cycle probabilities vanish".into()));
    }
    let g = |u: f64| log_cycle_sum(u, &log_b, theta_n);
    // Any single term reaching 1 guarantees g ≥ 0.
    let u_hi = log_b
        .iter()
        .map(|&(j, lb)| (theta_n - lb) / (j + 1) as f64)
        .fold(f64::INFINITY, f64::min);
    let (u_star, eff_cap_bps) = if n == 0 || u_hi <= 0.0 || g(0.0) >= 0.0 {
        // No payload, or service never falls short of the target.
        (0.0, 0.0)
    } else if let [(j, lb)] = log_b[..] {
        // A single cycle length: the root is u_hi itself. The rate is formed
        // without dividing θ back out so that M = 1 gives n/T exactly.
        let cycle = (j + 1) as f64;
        (u_hi, (n as f64 - lb / theta) / (cycle * frame_s))
    } else {
        // g(u_hi) >= 0 in exact arithmetic; a rounded negative value means
        // the root sits at u_hi to working precision.
        let u = if g(u_hi) <= 0.0 { u_hi } else { bisect_root(g, 0.0, u_hi, 1e-16)? };
        (u, u / (theta * frame_s))
    };
    Ok(EffCapResult {
        theta,
        chi_star: (-u_star).exp(),
        eff_cap_bps,
        eff_cap_bcu: eff_cap_bps / bandwidth_hz,
        variant,
    })
}

/// Transition matrix with every return to state 0 weighted by `e^{−θn}`.
pub fn weighted_transition_matrix(p: &[f64], n: u64, theta: f64) -> Result<Vec<Vec<f64>>> {
    let mut phi = HarqChain::from_failure_probs(p.to_vec())?.phi;
    let e = (-theta * n as f64).exp();
    phi[0].iter_mut().for_each(|v| *v *= e);
    Ok(phi)
}

/// Spectral radius of the θ-weighted transition matrix by power iteration.
/// Independent of the polynomial; equals χ* under the renewal weighting.
pub fn spectral_oracle(p: &[f64], n: u64, theta: f64) -> Result<f64> {
    check_p(p)?;
    if !(theta > 0.0) {
        return Err(Error::Domain(format!("spectral oracle needs θ > 0, got {theta}")));
    }
    let a = weighted_transition_matrix(p, n, theta)?;
    let (rho, _) = perron_root(&a, 1e-13, 1_000_000)?;
    Ok(rho)
}

/// Effective capacity over a grid of QoS exponents.
pub fn effcap_vs_theta_curve(
    p: &[f64],
    n: u64,
    frame_s: f64,
    bandwidth_hz: f64,
    theta_grid: &[f64],
    variant: Variant,
) -> Result<Vec<EffCapResult>> {
    if theta_grid.is_empty() {
        return Err(Error::Domain("empty θ grid".into()));
    }
    if theta_grid.iter().any(|t| !(*t > 0.0)) || theta_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("θ grid must be positive and ascending".into()));
    }
    let curve: Vec<EffCapResult> = theta_grid
        .par_iter()
        .map(|&t| effective_capacity(p, n, frame_s, bandwidth_hz, t, variant))
        .collect::<Result<_>>()?;
    for w in curve.windows(2) {
        if w[1].eff_cap_bps > w[0].eff_cap_bps * (1.0 + 1e-9) + 1e-9 {
            return Err(Error::Numerics(format!(
                "effective capacity increased from {} at θ = {} to {} at θ = {}",
                w[0].eff_cap_bps, w[0].theta, w[1].eff_cap_bps, w[1].theta
            )));
        }
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deadline_one_is_deterministic_service() {
        for variant in Variant::ALL {
            for &theta in &[1e-6, 1e-3, 0.5] {
                let r = effective_capacity(&[0.4], 100, 1e-4, 1e6, theta, variant).unwrap();
                assert!((r.eff_cap_bps / 1e6 - 1.0).abs() < 1e-12, "{variant:?} {theta}");
                assert!((r.chi_star - (-theta * 100.0f64).exp()).abs() < 1e-12 * r.chi_star.max(1e-300));
                let f = char_poly(0.3, &[0.4], 100, theta, variant);
                assert!((f - (0.3 - (-theta * 100.0f64).exp())).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn renewal_polynomial_vanishes_at_one_when_theta_is_zero() {
        let p = [0.3, 0.5, 0.2, 0.9];
        assert!(char_poly(1.0, &p, 50, 0.0, Variant::RenewalComplete).abs() < 1e-15);
        // Verbatim: Π_{j≤M−2} p_j (1 − p_{M−1})
        let expected = 0.3 * 0.5 * 0.2 * (1.0 - 0.9);
        let got = char_poly(1.0, &p, 50, 0.0, Variant::PaperVerbatim);
        assert!((got - expected).abs() < 1e-15);
    }

    #[test]
    fn cycle_probs_sum_to_one_for_renewal() {
        let b = cycle_probs(&[0.3, 0.5, 0.2, 0.9], Variant::RenewalComplete);
        assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(cycle_probs(&[0.3], Variant::PaperVerbatim), vec![1.0]);
    }

    #[test]
    fn root_agrees_with_polynomial() {
        let p = [0.45, 0.33, 0.27, 0.23];
        for variant in Variant::ALL {
            let r = effective_capacity(&p, 200, 1e-4, 1e6, 1e-3, variant).unwrap();
            assert!(char_poly(r.chi_star, &p, 200, 1e-3, variant).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_packet_gives_zero_capacity() {
        let r = effective_capacity(&[0.0, 0.0], 0, 1e-4, 1e6, 1e-3, Variant::RenewalComplete).unwrap();
        assert_eq!(r.eff_cap_bps, 0.0);
        assert_eq!(r.chi_star, 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(effective_capacity(&[0.2], 10, 1e-4, 1e6, 0.0, Variant::RenewalComplete).is_err());
        assert!(effective_capacity(&[], 10, 1e-4, 1e6, 1.0, Variant::RenewalComplete).is_err());
        assert!(effective_capacity(&[1.5], 10, 1e-4, 1e6, 1.0, Variant::RenewalComplete).is_err());
        assert!(effcap_vs_theta_curve(&[0.2], 10, 1e-4, 1e6, &[1e-3, 1e-4], Variant::RenewalComplete).is_err());
        assert!(effcap_vs_theta_curve(&[0.2], 10, 1e-4, 1e6, &[], Variant::RenewalComplete).is_err());
    }

    #[test]
    fn spectral_oracle_trivial_cases() {
        let r = spectral_oracle(&[0.3], 10, 0.2).unwrap();
        assert!((r / (-2.0f64).exp() - 1.0).abs() < 1e-13);
        let r = spectral_oracle(&[0.3, 0.4, 0.5], 10, 1e-12).unwrap();
        assert!((r - 1.0).abs() < 1e-9);
    }
}
