//! Parameter sweeps and the figure presets.
//!
//! Every sweep point is evaluated independently, so a sweep is a pure map
//! from values to rows. Rows are written with one fixed CSV schema whatever
//! the axis.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::scenario_profile;
use crate::config::{Config, ParamOverrides};
use crate::effcap::{effective_capacity, Variant};
use crate::error::{Error, Result};
use crate::harq::{build_chain, throughput_metrics};

/// Widest deadline a sweep row can hold; the p-columns are padded to it.
pub const MAX_SWEEP_DEADLINE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    PacketBits,
    Theta,
    Lambda,
    Deadline,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::PacketBits => "packet_bits",
            SweepAxis::Theta => "theta",
            SweepAxis::Lambda => "lambda",
            SweepAxis::Deadline => "deadline",
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, SweepAxis::PacketBits | SweepAxis::Deadline)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Name of the series in the CSV `series` column.
    #[serde(default)]
    pub label: String,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    #[serde(default)]
    pub overrides: ParamOverrides,
}

impl SweepSpec {
    pub fn new(label: impl Into<String>, axis: SweepAxis, values: Vec<f64>, overrides: ParamOverrides) -> Result<Self> {
        let spec = SweepSpec {
            label: label.into(),
            axis,
            values,
            overrides,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid("values", "sweep needs at least one value"));
        }
        let up = self.values.windows(2).all(|w| w[1] > w[0]);
        let down = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::invalid("values", "sweep values must be strictly monotone"));
        }
        for &v in &self.values {
            let ok = match self.axis {
                SweepAxis::PacketBits => v >= 1.0 && v.fract() == 0.0 && v.is_finite(),
                SweepAxis::Deadline => (1.0..=MAX_SWEEP_DEADLINE as f64).contains(&v) && v.fract() == 0.0,
                SweepAxis::Theta => v >= 0.0 && v.is_finite(),
                SweepAxis::Lambda => v > 0.0 && v.is_finite(),
            };
            if !ok {
                let what = if self.axis.is_integer() { "a positive integer" } else { "a positive real" };
                return Err(Error::invalid(
                    "values",
                    format!("{} sweep value {v} is not {what}", self.axis.label()),
                ));
            }
        }
        Ok(())
    }

    /// The configuration at one sweep value.
    pub fn point(&self, base: &Config, value: f64) -> Config {
        let mut c = self.overrides.apply(base);
        match self.axis {
            SweepAxis::PacketBits => c.link.packet_bits = value as u64,
            SweepAxis::Theta => c.link.qos_exponent_per_bit = value,
            SweepAxis::Lambda => c.sensing.detection_threshold = value,
            SweepAxis::Deadline => c.link.deadline_frames = value as usize,
        }
        c
    }
}

/// One evaluated operating point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub series: String,
    pub axis: SweepAxis,
    pub axis_value: f64,
    pub deadline: usize,
    pub packet_bits: u64,
    pub lambda: f64,
    pub theta: f64,
    pub p_f: f64,
    pub p_d: f64,
    pub q: [f64; 4],
    pub kappa: f64,
    pub p: Vec<f64>,
    pub pi_0: f64,
    pub p_lost: f64,
    pub service_rate_bcu: f64,
    pub goodput_bcu: f64,
    /// At θ = 0 this is the average service rate.
    pub effcap_bcu_renewal: f64,
    /// Undefined at θ = 0, where the verbatim form diverges.
    pub effcap_bcu_paper: Option<f64>,
}

/// Evaluates the analytic model at a single configuration.
pub fn evaluate_point(cfg: &Config, series: &str, axis: SweepAxis, axis_value: f64) -> Result<SweepRow> {
    let params = cfg.params();
    params.validate()?;
    if params.deadline_frames > MAX_SWEEP_DEADLINE {
        return Err(Error::invalid(
            "deadline_frames",
            format!("sweeps support deadlines up to {MAX_SWEEP_DEADLINE}"),
        ));
    }
    let profile = scenario_profile(&params)?;
    let chain = build_chain(&profile, params.fading_power, params.deadline_frames, &cfg.chain_options())?;
    let tp = throughput_metrics(&chain, &params);
    let theta = params.qos_exponent;
    let effcap = |variant| {
        effective_capacity(
            &chain.p,
            params.packet_bits,
            params.frame_duration_s,
            params.bandwidth_hz,
            theta,
            variant,
        )
        .map(|r| r.eff_cap_bcu)
    };
    let (renewal, paper) = if theta == 0.0 {
        (tp.service_rate_bcu, None)
    } else {
        (effcap(Variant::RenewalComplete)?, Some(effcap(Variant::PaperVerbatim)?))
    };
    Ok(SweepRow {
        series: series.to_string(),
        axis,
        axis_value,
        deadline: params.deadline_frames,
        packet_bits: params.packet_bits,
        lambda: params.detection_threshold,
        theta,
        p_f: profile.p_f,
        p_d: profile.p_d,
        q: profile.q,
        kappa: profile.kappa,
        pi_0: chain.pi0(),
        p_lost: chain.p_lost,
        p: chain.p,
        service_rate_bcu: tp.service_rate_bcu,
        goodput_bcu: tp.goodput_bcu,
        effcap_bcu_renewal: renewal,
        effcap_bcu_paper: paper,
    })
}

/// Evaluates every point of `spec`, in parallel, rows in value order.
pub fn run_sweep(base: &Config, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    spec.values
        .par_iter()
        .map(|&v| evaluate_point(&spec.point(base, v), &spec.label, spec.axis, v))
        .collect()
}

pub fn csv_header() -> Vec<String> {
    let mut h: Vec<String> = [
        "series", "axis", "axis_value", "M", "n", "lambda", "theta", "p_f", "p_d", "q1", "q2", "q3", "q4", "kappa",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend((0..MAX_SWEEP_DEADLINE).map(|m| format!("p_{m}")));
    h.extend(
        [
            "pi_0",
            "p_lost",
            "service_rate_bcu",
            "goodput_bcu",
            "effcap_bcu_renewal",
            "effcap_bcu_paper",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    h
}

fn csv_record(row: &SweepRow) -> Vec<String> {
    let f = |v: f64| v.to_string();
    let mut r = vec![
        row.series.clone(),
        row.axis.label().to_string(),
        f(row.axis_value),
        row.deadline.to_string(),
        row.packet_bits.to_string(),
        f(row.lambda),
        f(row.theta),
        f(row.p_f),
        f(row.p_d),
    ];
    r.extend(row.q.iter().map(|&v| f(v)));
    r.push(f(row.kappa));
    r.extend((0..MAX_SWEEP_DEADLINE).map(|m| row.p.get(m).map_or(String::new(), |&v| f(v))));
    r.extend([
        f(row.pi_0),
        f(row.p_lost),
        f(row.service_rate_bcu),
        f(row.goodput_bcu),
        f(row.effcap_bcu_renewal),
        row.effcap_bcu_paper.map_or(String::new(), f),
    ]);
    r
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header())?;
    for row in rows {
        w.write_record(csv_record(row))?;
    }
    w.flush()?;
    Ok(())
}

/// Goodput-maximizing packet size of one series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodputArgmax {
    pub series: String,
    pub deadline: usize,
    pub packet_bits: u64,
    pub goodput_bcu: f64,
}

/// Argmax-n of goodput for every packet-size series in `rows`. Ties go to
/// the smaller packet.
pub fn goodput_argmax(rows: &[SweepRow]) -> Vec<GoodputArgmax> {
    let mut out: Vec<GoodputArgmax> = Vec::new();
    for row in rows.iter().filter(|r| r.axis == SweepAxis::PacketBits) {
        let better = |best: &GoodputArgmax| {
            row.goodput_bcu > best.goodput_bcu || (row.goodput_bcu == best.goodput_bcu && row.packet_bits < best.packet_bits)
        };
        match out.iter_mut().find(|a| a.series == row.series) {
            Some(best) if better(best) => {
                best.packet_bits = row.packet_bits;
                best.goodput_bcu = row.goodput_bcu;
                best.deadline = row.deadline;
            }
            Some(_) => {}
            None => out.push(GoodputArgmax {
                series: row.series.clone(),
                deadline: row.deadline,
                packet_bits: row.packet_bits,
                goodput_bcu: row.goodput_bcu,
            }),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Service rate and goodput versus packet size for several deadlines.
    Fig1,
    /// Effective capacity versus θ at each deadline's best packet size.
    Fig2,
    /// Effective capacity versus θ for several detection thresholds.
    Fig3,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Preset::Fig1),
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            other => Err(Error::Config(format!("unknown preset `{other}` (expected fig1|fig2|fig3)"))),
        }
    }
}

pub const PRESET_DEADLINES: [usize; 4] = [1, 2, 3, 4];
pub const PRESET_LAMBDAS: [f64; 5] = [1.2, 1.3, 1.4, 1.5, 1.6];
pub const PRESET_THETAS: [f64; 11] = [1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1, 1.0];

/// Packet sizes 1..4, then 5..400 in steps of 5.
pub fn preset_packet_bits() -> Vec<f64> {
    (1..=4).chain((5..=400).step_by(5)).map(|n| n as f64).collect()
}

/// Labels for the settings a preset picks on its own.
pub fn preset_repo_choices(preset: Preset) -> Vec<String> {
    let mut v = vec!["primary_activity_prob = 0.1 (not given for the figures)".to_string()];
    match preset {
        Preset::Fig1 => {
            v.push(format!("deadlines {PRESET_DEADLINES:?}"));
            v.push("packet sizes 1..4 and 5..400 step 5".into());
        }
        Preset::Fig2 => {
            v.push(format!("deadlines {PRESET_DEADLINES:?}, each at its goodput-optimal packet size"));
            v.push(format!("theta grid {PRESET_THETAS:?}"));
        }
        Preset::Fig3 => {
            v.push(format!("detection thresholds {PRESET_LAMBDAS:?}"));
            v.push("deadline 4 at its goodput-optimal packet size for lambda = 1.4".into());
            v.push(format!("theta grid {PRESET_THETAS:?}"));
        }
    }
    v
}

/// Result of running a preset or a list of sweep specs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutput {
    pub specs: Vec<SweepSpec>,
    #[serde(skip)]
    pub rows: Vec<SweepRow>,
    pub goodput_argmax: Vec<GoodputArgmax>,
    pub repo_choices: Vec<String>,
}

pub fn run_specs(base: &Config, specs: Vec<SweepSpec>, repo_choices: Vec<String>) -> Result<SweepOutput> {
    let mut rows = Vec::new();
    for spec in &specs {
        rows.extend(run_sweep(base, spec)?);
    }
    let goodput_argmax = goodput_argmax(&rows);
    Ok(SweepOutput {
        specs,
        rows,
        goodput_argmax,
        repo_choices,
    })
}

fn deadline_label(m: usize) -> String {
    format!("M={m}")
}

fn fig1_specs(deadlines: &[usize]) -> Result<Vec<SweepSpec>> {
    deadlines
        .iter()
        .map(|&m| {
            let o = ParamOverrides {
                deadline_frames: Some(m),
                ..Default::default()
            };
            SweepSpec::new(deadline_label(m), SweepAxis::PacketBits, preset_packet_bits(), o)
        })
        .collect()
}

/// Goodput-optimal packet size for each deadline on the preset grid.
pub fn optimal_packet_bits(base: &Config, deadlines: &[usize]) -> Result<Vec<GoodputArgmax>> {
    Ok(run_specs(base, fig1_specs(deadlines)?, Vec::new())?.goodput_argmax)
}

/// Sweep specs of a preset, with the packet-size optima they were built on.
pub fn preset_specs(base: &Config, preset: Preset) -> Result<(Vec<SweepSpec>, Vec<GoodputArgmax>)> {
    let thetas = PRESET_THETAS.to_vec();
    match preset {
        Preset::Fig1 => Ok((fig1_specs(&PRESET_DEADLINES)?, Vec::new())),
        Preset::Fig2 => {
            let best = optimal_packet_bits(base, &PRESET_DEADLINES)?;
            let specs = best
                .iter()
                .map(|a| {
                    let o = ParamOverrides {
                        deadline_frames: Some(a.deadline),
                        packet_bits: Some(a.packet_bits),
                        ..Default::default()
                    };
                    SweepSpec::new(deadline_label(a.deadline), SweepAxis::Theta, thetas.clone(), o)
                })
                .collect::<Result<_>>()?;
            Ok((specs, best))
        }
        Preset::Fig3 => {
            let at_baseline_lambda = ParamOverrides {
                detection_threshold: Some(1.4),
                ..Default::default()
            }
            .apply(base);
            let best = optimal_packet_bits(&at_baseline_lambda, &[4])?;
            let n = best[0].packet_bits;
            let specs = PRESET_LAMBDAS
                .iter()
                .map(|&lambda| {
                    let o = ParamOverrides {
                        deadline_frames: Some(4),
                        packet_bits: Some(n),
                        detection_threshold: Some(lambda),
                        ..Default::default()
                    };
                    SweepSpec::new(format!("lambda={lambda}"), SweepAxis::Theta, thetas.clone(), o)
                })
                .collect::<Result<_>>()?;
            Ok((specs, best))
        }
    }
}

pub fn run_preset(base: &Config, preset: Preset) -> Result<SweepOutput> {
    let (specs, best) = preset_specs(base, preset)?;
    let mut out = run_specs(base, specs, preset_repo_choices(preset))?;
    if out.goodput_argmax.is_empty() {
        out.goodput_argmax = best;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(axis: SweepAxis, values: Vec<f64>) -> Result<SweepSpec> {
        SweepSpec::new("s", axis, values, ParamOverrides::default())
    }

    #[test]
    fn spec_validation() {
        assert!(spec(SweepAxis::PacketBits, vec![]).is_err());
        assert!(spec(SweepAxis::PacketBits, vec![1.0, 1.0]).is_err());
        assert!(spec(SweepAxis::PacketBits, vec![1.5]).is_err());
        assert!(spec(SweepAxis::PacketBits, vec![0.0]).is_err());
        assert!(spec(SweepAxis::Deadline, vec![17.0]).is_err());
        assert!(spec(SweepAxis::Lambda, vec![0.0]).is_err());
        assert!(spec(SweepAxis::Theta, vec![1e-3, 1e-4]).is_ok());
    }

    #[test]
    fn header_is_fixed() {
        let h = csv_header();
        assert_eq!(h.len(), 14 + MAX_SWEEP_DEADLINE + 6);
        assert_eq!(h[14], "p_0");
        assert_eq!(h.last().unwrap(), "effcap_bcu_paper");
    }

    #[test]
    fn short_deadlines_leave_empty_columns() {
        let cfg = Config::default();
        let s = spec(SweepAxis::Deadline, vec![1.0, 3.0]).unwrap();
        let rows = run_sweep(&cfg, &s).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        let first: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(first.len(), csv_header().len());
        assert!(!first[14].is_empty());
        assert!(first[15].is_empty());
    }

    #[test]
    fn zero_theta_uses_service_rate() {
        let mut cfg = Config::default();
        cfg.link.qos_exponent_per_bit = 0.0;
        let row = evaluate_point(&cfg, "", SweepAxis::Theta, 0.0).unwrap();
        assert_eq!(row.effcap_bcu_renewal, row.service_rate_bcu);
        assert!(row.effcap_bcu_paper.is_none());
    }

    #[test]
    fn argmax_prefers_smaller_packets_on_ties() {
        let cfg = Config::default();
        let s = spec(SweepAxis::PacketBits, vec![100.0, 150.0]).unwrap();
        let mut rows = run_sweep(&cfg, &s).unwrap();
        rows[1].goodput_bcu = rows[0].goodput_bcu;
        assert_eq!(goodput_argmax(&rows)[0].packet_bits, 100);
    }
}
