//! System parameters and the sensing profile derived from them.
//!
//! Energy detection compares `Y = (1/NB) Σ |y(t)|²` against `λ`. Under either
//! hypothesis `NB·Y/σ²` is Gamma(NB, 1), so both error probabilities are
//! regularized incomplete gamma values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::reg_lower_gamma;

/// Joint outcome of the true primary activity and the sensing decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// Busy channel sensed busy.
    BusyDetected,
    /// Busy channel sensed idle (miss-detection).
    BusyMissed,
    /// Idle channel sensed busy (false alarm).
    IdleFalseAlarm,
    /// Idle channel sensed idle.
    IdleDetected,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::BusyDetected,
        Scenario::BusyMissed,
        Scenario::IdleFalseAlarm,
        Scenario::IdleDetected,
    ];

    pub fn from_outcome(active: bool, sensed_busy: bool) -> Self {
        match (active, sensed_busy) {
            (true, true) => Scenario::BusyDetected,
            (true, false) => Scenario::BusyMissed,
            (false, true) => Scenario::IdleFalseAlarm,
            (false, false) => Scenario::IdleDetected,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn primary_active(self) -> bool {
        matches!(self, Scenario::BusyDetected | Scenario::BusyMissed)
    }

    pub fn sensed_busy(self) -> bool {
        matches!(self, Scenario::BusyDetected | Scenario::IdleFalseAlarm)
    }
}

/// Full description of one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Frame duration T, seconds.
    pub frame_duration_s: f64,
    /// Sensing duration N at the start of every frame, seconds.
    pub sensing_duration_s: f64,
    pub bandwidth_hz: f64,
    /// Probability ρ that the primary user is active in a frame.
    pub primary_activity_prob: f64,
    /// σ_w²
    pub noise_variance: f64,
    /// σ_s², primary signal at the sensor
    pub primary_signal_variance: f64,
    /// σ_h² = E{|h|²}
    pub fading_power: f64,
    /// P_b, linear, used when the channel is sensed busy.
    pub power_busy: f64,
    /// P_i, linear, used when the channel is sensed idle.
    pub power_idle: f64,
    /// Energy-detection threshold λ.
    pub detection_threshold: f64,
    pub packet_bits: u64,
    /// Transmission deadline M in frames.
    pub deadline_frames: usize,
    /// QoS exponent θ, 1/bits.
    pub qos_exponent: f64,
}

/// Linear power for an SNR-style setting `10 log10(P / (B σ_w²))` in dB.
pub fn power_from_db(db: f64, bandwidth_hz: f64, noise_variance: f64) -> f64 {
    10f64.powf(db / 10.0) * bandwidth_hz * noise_variance
}

pub fn power_to_db(power: f64, bandwidth_hz: f64, noise_variance: f64) -> f64 {
    10.0 * (power / (bandwidth_hz * noise_variance)).log10()
}

impl SystemParams {
    /// The normalized numerical setting used throughout the figure
    /// reproductions: T = 1e-4 s, N = 2e-5 s, B = 1 MHz, unit variances,
    /// 0 dB / 10 dB powers, λ = 1.4. ρ = 0.1 is a choice of this crate.
    pub fn baseline() -> Self {
        let bandwidth_hz = 1e6;
        let noise_variance = 1.0;
        SystemParams {
            frame_duration_s: 1e-4,
            sensing_duration_s: 2e-5,
            bandwidth_hz,
            primary_activity_prob: 0.1,
            noise_variance,
            primary_signal_variance: 1.0,
            fading_power: 1.0,
            power_busy: power_from_db(0.0, bandwidth_hz, noise_variance),
            power_idle: power_from_db(10.0, bandwidth_hz, noise_variance),
            detection_threshold: 1.4,
            packet_bits: 150,
            deadline_frames: 4,
            qos_exponent: 1e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(field, format!("must be positive and finite, got {v}")))
            }
        };
        positive("frame_duration_s", self.frame_duration_s)?;
        positive("sensing_duration_s", self.sensing_duration_s)?;
        positive("bandwidth_hz", self.bandwidth_hz)?;
        positive("noise_variance", self.noise_variance)?;
        positive("primary_signal_variance", self.primary_signal_variance)?;
        positive("fading_power", self.fading_power)?;
        positive("power_busy", self.power_busy)?;
        positive("power_idle", self.power_idle)?;
        if self.sensing_duration_s >= self.frame_duration_s {
            return Err(Error::invalid(
                "sensing_duration_s",
                format!(
                    "sensing duration N = {} must be shorter than the frame duration T = {}",
                    self.sensing_duration_s, self.frame_duration_s
                ),
            ));
        }
        let nb = self.sensing_duration_s * self.bandwidth_hz;
        if (nb - nb.round()).abs() > 1e-9 * nb.max(1.0) || nb.round() < 1.0 {
            return Err(Error::invalid(
                "sensing_duration_s",
                format!("N·B = {nb} must be a positive integer number of samples"),
            ));
        }
        let rho = self.primary_activity_prob;
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::invalid("primary_activity_prob", format!("must lie in [0, 1], got {rho}")));
        }
        if self.power_busy > self.power_idle {
            return Err(Error::invalid(
                "power_busy",
                format!(
                    "busy power {} exceeds idle power {}; the access policy needs P_b <= P_i",
                    self.power_busy, self.power_idle
                ),
            ));
        }
        if !(self.detection_threshold.is_finite() && self.detection_threshold >= 0.0) {
            return Err(Error::invalid(
                "detection_threshold",
                format!("must be finite and >= 0, got {}", self.detection_threshold),
            ));
        }
        if self.deadline_frames < 1 {
            return Err(Error::invalid("deadline_frames", "must be at least 1"));
        }
        if !(self.qos_exponent.is_finite() && self.qos_exponent >= 0.0) {
            return Err(Error::invalid(
                "qos_exponent",
                format!("must be finite and >= 0, got {}", self.qos_exponent),
            ));
        }
        Ok(())
    }

    /// Number of sensing samples N·B.
    pub fn sensing_samples(&self) -> u64 {
        (self.sensing_duration_s * self.bandwidth_hz).round() as u64
    }

    /// Number of data symbols (T − N)·B carrying one packet.
    pub fn data_symbols(&self) -> f64 {
        (self.frame_duration_s - self.sensing_duration_s) * self.bandwidth_hz
    }

    /// Channel uses per frame, T·B.
    pub fn channel_uses_per_frame(&self) -> f64 {
        self.frame_duration_s * self.bandwidth_hz
    }

    /// Decode threshold κ = 2^{n/((T−N)B)} − 1 on the accumulated SNR.
    pub fn decode_threshold(&self) -> f64 {
        (self.packet_bits as f64 / self.data_symbols() * std::f64::consts::LN_2).exp_m1()
    }

    /// Per-symbol SNR in each scenario. The transmitter spreads P over B
    /// symbols per second, so the symbol SNR is P / (B σ²) with σ² the total
    /// noise-plus-interference variance seen in that scenario.
    pub fn scenario_snr(&self) -> [f64; 4] {
        let b = self.bandwidth_hz;
        let busy_noise = self.noise_variance + self.primary_signal_variance;
        let idle_noise = self.noise_variance;
        Scenario::ALL.map(|s| {
            let power = if s.sensed_busy() { self.power_busy } else { self.power_idle };
            let noise = if s.primary_active() { busy_noise } else { idle_noise };
            power / (b * noise)
        })
    }
}

/// Quantities derived from [`SystemParams`] that the chain needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensingProfile {
    pub p_f: f64,
    pub p_d: f64,
    /// Scenario probabilities, indexed by [`Scenario::index`].
    pub q: [f64; 4],
    /// Scenario SNRs ζ, same indexing.
    pub zeta: [f64; 4],
    pub kappa: f64,
}

fn exceed_prob(params: &SystemParams, variance: f64) -> Result<f64> {
    let nb = params.sensing_samples() as f64;
    let x = nb * params.detection_threshold / variance;
    Ok(1.0 - reg_lower_gamma(x, nb)?)
}

/// False-alarm probability `1 − p(NBλ/σ_w², NB)`.
pub fn false_alarm_prob(params: &SystemParams) -> Result<f64> {
    params.validate()?;
    exceed_prob(params, params.noise_variance)
}

/// Detection probability `1 − p(NBλ/(σ_w² + σ_s²), NB)`.
pub fn detection_prob(params: &SystemParams) -> Result<f64> {
    params.validate()?;
    exceed_prob(params, params.noise_variance + params.primary_signal_variance)
}

pub fn scenario_profile(params: &SystemParams) -> Result<SensingProfile> {
    let p_f = false_alarm_prob(params)?;
    let p_d = detection_prob(params)?;
    let rho = params.primary_activity_prob;
    let q = [
        rho * p_d,
        rho * (1.0 - p_d),
        (1.0 - rho) * p_f,
        (1.0 - rho) * (1.0 - p_f),
    ];
    Ok(SensingProfile {
        p_f,
        p_d,
        q,
        zeta: params.scenario_snr(),
        kappa: params.decode_threshold(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_matches_normalized_setting() {
        let p = SystemParams::baseline();
        p.validate().unwrap();
        assert_eq!(p.sensing_samples(), 20);
        assert!((p.data_symbols() - 80.0).abs() < 1e-9);
        let z = p.scenario_snr();
        let expected = [0.5, 5.0, 1.0, 10.0];
        for (a, b) in z.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((power_to_db(p.power_idle, p.bandwidth_hz, p.noise_variance) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn zero_threshold_always_declares_busy() {
        let mut p = SystemParams::baseline();
        p.detection_threshold = 0.0;
        assert_eq!(false_alarm_prob(&p).unwrap(), 1.0);
        assert_eq!(detection_prob(&p).unwrap(), 1.0);
    }

    #[test]
    fn huge_threshold_never_declares_busy() {
        let mut p = SystemParams::baseline();
        p.detection_threshold = 1e6 * p.noise_variance;
        assert!(false_alarm_prob(&p).unwrap() < 1e-12);
        assert!(detection_prob(&p).unwrap() < 1e-12);
    }

    #[test]
    fn vanishing_primary_signal_merges_hypotheses() {
        let mut p = SystemParams::baseline();
        p.primary_signal_variance = 1e-14;
        let pf = false_alarm_prob(&p).unwrap();
        let pd = detection_prob(&p).unwrap();
        assert!((pf - pd).abs() < 1e-12);
    }

    #[test]
    fn scenario_edge_cases() {
        let mut p = SystemParams::baseline();
        p.primary_activity_prob = 0.0;
        let prof = scenario_profile(&p).unwrap();
        assert_eq!(prof.q[0], 0.0);
        assert_eq!(prof.q[1], 0.0);
        assert_eq!(prof.q[2], prof.p_f);
        assert_eq!(prof.q[3], 1.0 - prof.p_f);

        p.primary_activity_prob = 1.0;
        p.detection_threshold = 0.0;
        let prof = scenario_profile(&p).unwrap();
        assert_eq!(prof.q, [1.0, 0.0, 0.0, 0.0]);

        p.packet_bits = 0;
        assert_eq!(scenario_profile(&p).unwrap().kappa, 0.0);
    }

    #[test]
    fn invalid_params_name_the_field() {
        let mut p = SystemParams::baseline();
        p.sensing_duration_s = p.frame_duration_s;
        match p.validate() {
            Err(Error::InvalidParam { field, .. }) => assert_eq!(field, "sensing_duration_s"),
            other => panic!("unexpected {other:?}"),
        }
        let mut p = SystemParams::baseline();
        p.sensing_duration_s = 2.05e-5;
        assert!(p.validate().is_err());
        let mut p = SystemParams::baseline();
        p.power_busy = 2.0 * p.power_idle;
        assert!(p.validate().is_err());
        let mut p = SystemParams::baseline();
        p.deadline_frames = 0;
        assert!(p.validate().is_err());
        let mut p = SystemParams::baseline();
        p.primary_activity_prob = 1.5;
        assert!(p.validate().is_err());
    }
}
