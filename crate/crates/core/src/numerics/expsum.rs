//! CDF of a sum of independent exponential variables with distinct means.
//!
//! The sum of `r` exponentials, `m_i` of them with mean `β_i`, has the
//! single-gamma-series representation
//!
//! ```text
//! F(x) = C Σ_k δ_k p(x / β_min, r + k)
//! C    = Π_i (β_min / β_i)^{m_i}
//! γ_k  = Σ_i (m_i / k) (1 - β_min / β_i)^k
//! δ_0  = 1,  δ_{k+1} = 1/(k+1) Σ_{l=1}^{k+1} l γ_l δ_{k+1-l}
//! ```
//!
//! The weights `C δ_k` form a probability mass function on `k`, so the tail
//! after term `k` is bounded by `p(x/β_min, r+k) · (1 - Σ_{j≤k} C δ_j)`.

use super::gamma::reg_lower_gamma;
use crate::error::{Error, Result};

/// Truncation control for the series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub abs_floor: f64,
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            rel_tol: 1e-10,
            abs_floor: 1e-300,
            max_terms: 10_000,
        }
    }
}

impl SeriesControl {
    pub fn new(rel_tol: f64, abs_floor: f64, max_terms: usize) -> Result<Self> {
        let ctl = SeriesControl {
            rel_tol,
            abs_floor,
            max_terms,
        };
        ctl.validate()?;
        Ok(ctl)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::invalid("rel_tol", format!("must lie in (0, 1), got {}", self.rel_tol)));
        }
        if !(self.abs_floor >= 0.0) {
            return Err(Error::invalid("abs_floor", format!("must be >= 0, got {}", self.abs_floor)));
        }
        if self.max_terms == 0 {
            return Err(Error::invalid("max_terms", "must be at least 1"));
        }
        Ok(())
    }
}

/// A collection of exponential summands grouped by mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialMixture {
    scales: Vec<f64>,
    multiplicities: Vec<u32>,
}

impl ExponentialMixture {
    pub fn new(scales: Vec<f64>, multiplicities: Vec<u32>) -> Result<Self> {
        if scales.len() != multiplicities.len() {
            return Err(Error::Domain(format!(
                "{} scales but {} multiplicities",
                scales.len(),
                multiplicities.len()
            )));
        }
        if let Some(bad) = scales.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::Domain(format!("exponential scales must be positive and finite, got {bad}")));
        }
        Ok(ExponentialMixture {
            scales,
            multiplicities,
        })
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.multiplicities
    }

    /// Total number of summands `r = Σ m_i`.
    pub fn total(&self) -> u32 {
        self.multiplicities.iter().sum()
    }

    /// Pairs with a nonzero multiplicity.
    fn active(&self) -> impl Iterator<Item = (f64, u32)> + '_ {
        self.scales
            .iter()
            .zip(&self.multiplicities)
            .filter(|(_, &m)| m > 0)
            .map(|(&s, &m)| (s, m))
    }

    pub fn min_scale(&self) -> Option<f64> {
        self.active().map(|(s, _)| s).reduce(f64::min)
    }
}

/// `Pr{X_1 + ... + X_r <= x}` for the summands described by `mix`.
///
/// Equal-scale mixtures reduce to the Erlang CDF and skip the series.
pub fn exp_sum_cdf(mix: &ExponentialMixture, x: f64, ctl: &SeriesControl) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("CDF argument must be finite and >= 0, got {x}")));
    }
    let r = mix.total();
    if r == 0 {
        return Err(Error::Domain("empty exponential mixture".into()));
    }
    let beta_min = mix.min_scale().expect("r >= 1 implies an active scale");
    if mix.active().all(|(s, _)| s == beta_min) {
        return erlang_cdf(x / beta_min, r);
    }
    series_cdf(mix, x, ctl)
}

fn erlang_cdf(x: f64, r: u32) -> Result<f64> {
    if r == 1 {
        Ok(-(-x).exp_m1())
    } else {
        reg_lower_gamma(x, r as f64)
    }
}

/// The gamma series itself, with no closed-form shortcuts.
pub(crate) fn series_cdf(mix: &ExponentialMixture, x: f64, ctl: &SeriesControl) -> Result<f64> {
    ctl.validate()?;
    let r = mix.total();
    if r == 0 {
        return Err(Error::Domain("empty exponential mixture".into()));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let beta_min = mix.min_scale().expect("r >= 1");
    let comps: Vec<(f64, f64)> = mix
        .active()
        .map(|(s, m)| (1.0 - beta_min / s, m as f64))
        .collect();
    let ln_c: f64 = mix
        .active()
        .map(|(s, m)| m as f64 * (beta_min / s).ln())
        .sum();
    let c = ln_c.exp();
    if c == 0.0 {
        return Err(Error::Domain(format!(
            "scale spread too wide for the series (ln C = {ln_c})"
        )));
    }

    let z = x / beta_min;
    // s_l = l γ_l = Σ m_i c_i^l, kept alongside running powers c_i^l.
    let mut powers: Vec<f64> = comps.iter().map(|_| 1.0).collect();
    let mut s: Vec<f64> = vec![0.0];
    let mut w: Vec<f64> = vec![c];
    let mut mass = c;
    let mut sum = 0.0;
    let mut quiet = 0;

    for k in 0..ctl.max_terms {
        if k > 0 {
            for (p, &(ci, _)) in powers.iter_mut().zip(&comps) {
                *p *= ci;
            }
            s.push(powers.iter().zip(&comps).map(|(p, &(_, m))| m * p).sum());
            let acc: f64 = (1..=k).map(|l| s[l] * w[k - l]).sum();
            let wk = acc / k as f64;
            w.push(wk);
            mass += wk;
        }
        let g = reg_lower_gamma(z, (r as usize + k) as f64)?;
        let term = w[k] * g;
        sum += term;

        // Remaining weight, padded by accumulated rounding in `mass`.
        let remaining = (1.0 - mass).max(0.0) + (k + 1) as f64 * f64::EPSILON;
        let tail = g * remaining;
        let small = |v: f64| v <= ctl.rel_tol * sum || v <= ctl.abs_floor;
        if small(term) && small(tail) {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if quiet >= 3 && k >= r as usize {
            return Ok(sum.clamp(0.0, 1.0));
        }
    }
    Err(Error::Convergence {
        terms: ctl.max_terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mix(scales: &[f64], mult: &[u32]) -> ExponentialMixture {
        ExponentialMixture::new(scales.to_vec(), mult.to_vec()).unwrap()
    }

    #[test]
    fn single_summand_is_exponential() {
        let ctl = SeriesControl::default();
        for &x in &[0.0, 0.3, 2.0, 9.0] {
            let got = exp_sum_cdf(&mix(&[2.5], &[1]), x, &ctl).unwrap();
            assert!((got - (1.0 - (-x / 2.5f64).exp())).abs() < 1e-15);
        }
    }

    #[test]
    fn series_reduces_to_erlang_on_equal_scales() {
        let ctl = SeriesControl::default();
        let m = mix(&[1.5, 1.5, 1.5], &[1, 2, 1]);
        for &x in &[0.1, 1.0, 6.0, 20.0] {
            let series = series_cdf(&m, x, &ctl).unwrap();
            let erlang = reg_lower_gamma(x / 1.5, 4.0).unwrap();
            assert!((series - erlang).abs() < 1e-14);
        }
    }

    #[test]
    fn two_scale_closed_form() {
        // scales {1, 2}: F(x) = 1 - 2 e^{-x/2} + e^{-x}
        let ctl = SeriesControl::default();
        let m = mix(&[1.0, 2.0], &[1, 1]);
        let x: f64 = 1.0;
        let expected = 1.0 - 2.0 * (-x / 2.0).exp() + (-x).exp();
        let got = exp_sum_cdf(&m, x, &ctl).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn zero_multiplicity_entries_are_ignored() {
        let ctl = SeriesControl::default();
        let a = exp_sum_cdf(&mix(&[1.0, 7.0, 2.0], &[1, 0, 1]), 1.3, &ctl).unwrap();
        let b = exp_sum_cdf(&mix(&[1.0, 2.0], &[1, 1]), 1.3, &ctl).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn errors() {
        let ctl = SeriesControl::default();
        assert!(matches!(exp_sum_cdf(&mix(&[1.0], &[0]), 1.0, &ctl), Err(Error::Domain(_))));
        assert!(matches!(exp_sum_cdf(&mix(&[1.0], &[1]), -1.0, &ctl), Err(Error::Domain(_))));
        assert!(ExponentialMixture::new(vec![1.0, -2.0], vec![1, 1]).is_err());
        assert!(ExponentialMixture::new(vec![1.0], vec![1, 1]).is_err());
        let starved = SeriesControl::new(1e-14, 0.0, 5).unwrap();
        assert!(matches!(
            exp_sum_cdf(&mix(&[1.0, 50.0], &[2, 2]), 40.0, &starved),
            Err(Error::Convergence { .. })
        ));
        assert!(SeriesControl::new(0.0, 0.0, 10).is_err());
        assert!(SeriesControl::new(0.1, 0.0, 0).is_err());
    }
}
