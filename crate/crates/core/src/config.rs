//! TOML configuration. Units live in the key names and unknown keys are
//! rejected, so a typo fails loudly instead of silently using a default.
//! Every section and key is optional; missing values take the baseline.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{power_from_db, SystemParams};
use crate::effcap::Variant;
use crate::error::{Error, Result};
use crate::harq::{ChainOptions, HistoryWeighting};
use crate::numerics::SeriesControl;
use crate::sim::{SensingMode, SimConfig};
use crate::sweep::SweepSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Timing {
    pub frame_duration_s: f64,
    pub sensing_duration_s: f64,
    pub bandwidth_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sensing {
    pub primary_activity_prob: f64,
    pub noise_variance: f64,
    pub primary_signal_variance: f64,
    pub detection_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Channel {
    pub fading_power: f64,
    /// `10 log10(P_b / (B σ_w²))`
    pub power_busy_db: f64,
    pub power_idle_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Link {
    pub packet_bits: u64,
    pub deadline_frames: usize,
    pub qos_exponent_per_bit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Model {
    pub weighting: HistoryWeighting,
    pub variant: Variant,
    pub series_rel_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Simulation {
    pub frames: u64,
    pub seed: u64,
    pub sensing_mode: SensingMode,
    pub batches: u32,
    pub theta_grid_per_bit: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub timing: Timing,
    pub sensing: Sensing,
    pub channel: Channel,
    pub link: Link,
    pub model: Model,
    pub simulation: Simulation,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepSpec>,
}

impl Default for Timing {
    fn default() -> Self {
        let p = SystemParams::baseline();
        Timing {
            frame_duration_s: p.frame_duration_s,
            sensing_duration_s: p.sensing_duration_s,
            bandwidth_hz: p.bandwidth_hz,
        }
    }
}

impl Default for Sensing {
    fn default() -> Self {
        let p = SystemParams::baseline();
        Sensing {
            primary_activity_prob: p.primary_activity_prob,
            noise_variance: p.noise_variance,
            primary_signal_variance: p.primary_signal_variance,
            detection_threshold: p.detection_threshold,
        }
    }
}

impl Default for Channel {
    fn default() -> Self {
        Channel {
            fading_power: 1.0,
            power_busy_db: 0.0,
            power_idle_db: 10.0,
        }
    }
}

impl Default for Link {
    fn default() -> Self {
        let p = SystemParams::baseline();
        Link {
            packet_bits: p.packet_bits,
            deadline_frames: p.deadline_frames,
            qos_exponent_per_bit: p.qos_exponent,
        }
    }
}

impl Default for Model {
    fn default() -> Self {
        Model {
            weighting: HistoryWeighting::default(),
            variant: Variant::default(),
            series_rel_tol: SeriesControl::default().rel_tol,
        }
    }
}

impl Default for Simulation {
    fn default() -> Self {
        let s = SimConfig::default();
        Simulation {
            frames: s.frames,
            seed: s.seed,
            sensing_mode: s.sensing_mode,
            batches: s.batches,
            theta_grid_per_bit: s.theta_grid,
        }
    }
}

/// A partial set of parameters, keyed like the config file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame_duration_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sensing_duration_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub primary_activity_prob: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub primary_signal_variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detection_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fading_power: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_busy_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_idle_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub packet_bits: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deadline_frames: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qos_exponent_per_bit: Option<f64>,
}

impl ParamOverrides {
    /// Returns a copy of `cfg` with every set field replaced.
    pub fn apply(&self, cfg: &Config) -> Config {
        let mut c = cfg.clone();
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field { $target = v; })*
            };
        }
        set! {
            frame_duration_s => c.timing.frame_duration_s,
            sensing_duration_s => c.timing.sensing_duration_s,
            bandwidth_hz => c.timing.bandwidth_hz,
            primary_activity_prob => c.sensing.primary_activity_prob,
            noise_variance => c.sensing.noise_variance,
            primary_signal_variance => c.sensing.primary_signal_variance,
            detection_threshold => c.sensing.detection_threshold,
            fading_power => c.channel.fading_power,
            power_busy_db => c.channel.power_busy_db,
            power_idle_db => c.channel.power_idle_db,
            packet_bits => c.link.packet_bits,
            deadline_frames => c.link.deadline_frames,
            qos_exponent_per_bit => c.link.qos_exponent_per_bit,
        }
        c
    }
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        self.sim_config().validate()?;
        self.series_control()?;
        for spec in &self.sweep {
            spec.validate()?;
        }
        Ok(())
    }

    pub fn params(&self) -> SystemParams {
        let b = self.timing.bandwidth_hz;
        let nv = self.sensing.noise_variance;
        SystemParams {
            frame_duration_s: self.timing.frame_duration_s,
            sensing_duration_s: self.timing.sensing_duration_s,
            bandwidth_hz: b,
            primary_activity_prob: self.sensing.primary_activity_prob,
            noise_variance: nv,
            primary_signal_variance: self.sensing.primary_signal_variance,
            fading_power: self.channel.fading_power,
            power_busy: power_from_db(self.channel.power_busy_db, b, nv),
            power_idle: power_from_db(self.channel.power_idle_db, b, nv),
            detection_threshold: self.sensing.detection_threshold,
            packet_bits: self.link.packet_bits,
            deadline_frames: self.link.deadline_frames,
            qos_exponent: self.link.qos_exponent_per_bit,
        }
    }

    pub fn series_control(&self) -> Result<SeriesControl> {
        let d = SeriesControl::default();
        SeriesControl::new(self.model.series_rel_tol, d.abs_floor, d.max_terms)
            .map_err(|_| Error::invalid("series_rel_tol", format!("must lie in (0, 1), got {}", self.model.series_rel_tol)))
    }

    pub fn chain_options(&self) -> ChainOptions {
        ChainOptions {
            series: self.series_control().unwrap_or_default(),
            weighting: self.model.weighting,
        }
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            frames: self.simulation.frames,
            seed: self.simulation.seed,
            sensing_mode: self.simulation.sensing_mode,
            batches: self.simulation.batches,
            theta_grid: self.simulation.theta_grid_per_bit.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_baseline() {
        let cfg = Config::from_toml_str("").unwrap();
        assert_eq!(cfg.params(), SystemParams::baseline());
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = Config::default();
        let back = Config::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = Config::from_toml_str("[link]\npacket_bit = 10\n").unwrap_err();
        assert!(err.to_string().contains("packet_bit"), "{err}");
        assert!(Config::from_toml_str("[links]\n").is_err());
    }

    #[test]
    fn invariant_violations_name_the_field() {
        let err = Config::from_toml_str("[timing]\nsensing_duration_s = 2e-4\n").unwrap_err();
        assert!(matches!(err, Error::InvalidParam { field: "sensing_duration_s", .. }), "{err}");
    }

    #[test]
    fn overrides_replace_only_set_fields() {
        let o = ParamOverrides {
            deadline_frames: Some(2),
            power_idle_db: Some(3.0),
            ..Default::default()
        };
        let c = o.apply(&Config::default());
        assert_eq!(c.link.deadline_frames, 2);
        assert_eq!(c.channel.power_idle_db, 3.0);
        assert_eq!(c.link.packet_bits, Config::default().link.packet_bits);
    }
}
