//! Effective capacity of the baseline link: both closed-form variants, the
//! spectral-radius oracle and, optionally, the Monte Carlo estimate.
//!
//! cargo run --release --example effective_capacity -- [frames]

use crharq::effcap::{effective_capacity, spectral_oracle};
use crharq::sim::estimate_effective_capacity;
use crharq::{build_chain, scenario_profile, ChainOptions, SimConfig, SystemParams, Variant};

fn main() -> crharq::Result<()> {
    let frames: u64 = std::env::args().nth(1).map_or(0, |s| s.parse().expect("frames"));
    let params = SystemParams::baseline();
    let profile = scenario_profile(&params)?;
    let chain = build_chain(&profile, params.fading_power, params.deadline_frames, &ChainOptions::default())?;
    let n = params.packet_bits;
    let (t, b) = (params.frame_duration_s, params.bandwidth_hz);

    println!("n = {n}, M = {}, p = {:?}", params.deadline_frames, chain.p);
    println!("{:>8} {:>10} {:>10} {:>10} {:>22}", "theta", "renewal", "paper", "spectral", "simulated [95% CI]");
    for theta in [1e-5, 1e-4, 1e-3, 3e-3, 1e-2, 1e-1] {
        let renewal = effective_capacity(&chain.p, n, t, b, theta, Variant::RenewalComplete)?;
        let paper = effective_capacity(&chain.p, n, t, b, theta, Variant::PaperVerbatim)?;
        let chi = spectral_oracle(&chain.p, n, theta)?;
        let spectral = -chi.ln() / (theta * t) / b;
        let sim = if frames > 0 {
            let cfg = SimConfig {
                frames,
                ..Default::default()
            };
            let e = estimate_effective_capacity(&params, &cfg, theta)?;
            format!("{:.4} [{:.4}, {:.4}]", e.estimate_bcu, e.ci_low_bps / b, e.ci_high_bps / b)
        } else {
            String::new()
        };
        println!(
            "{theta:>8.0e} {:>10.5} {:>10.5} {:>10.5} {sim:>22}",
            renewal.eff_cap_bcu, paper.eff_cap_bcu, spectral
        );
    }
    Ok(())
}
