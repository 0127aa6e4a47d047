//! Simulate the baseline link and compare every estimate with the chain.
//!
//! cargo run --release --example monte_carlo -- [frames] [seed]

use crharq::{build_chain, scenario_profile, simulate, ChainOptions, HistoryWeighting, SimConfig, SystemParams};

fn main() -> crharq::Result<()> {
    let mut args = std::env::args().skip(1);
    let frames = args.next().map_or(2_000_000, |s| s.parse().expect("frames"));
    let seed = args.next().map_or(1, |s| s.parse().expect("seed"));

    let params = SystemParams::baseline();
    let profile = scenario_profile(&params)?;
    let posterior = build_chain(&profile, params.fading_power, params.deadline_frames, &ChainOptions::default())?;
    let prior = build_chain(
        &profile,
        params.fading_power,
        params.deadline_frames,
        &ChainOptions {
            weighting: HistoryWeighting::Prior,
            ..Default::default()
        },
    )?;
    let cfg = SimConfig {
        frames,
        seed,
        ..Default::default()
    };
    let report = simulate(&params, &cfg)?;

    println!("{frames} frames, seed {seed}, n = {}, M = {}", params.packet_bits, params.deadline_frames);
    println!("{:>6} {:>12} {:>12} {:>12} {:>9}", "", "posterior", "prior", "simulated", "z");
    for (m, est) in report.est_p.iter().enumerate() {
        let Some(est) = est else { continue };
        println!(
            "{:>6} {:>12.6} {:>12.6} {:>12.6} {:>9.2}",
            format!("p_{m}"),
            posterior.p[m],
            prior.p[m],
            est.value,
            est.z_score(posterior.p[m])
        );
    }
    for (m, est) in report.est_pi.iter().enumerate() {
        println!(
            "{:>6} {:>12.6} {:>12} {:>12.6} {:>9.2}",
            format!("pi_{m}"),
            posterior.pi[m],
            "",
            est.value,
            est.z_score(posterior.pi[m])
        );
    }
    if let Some(est) = report.est_p_lost {
        println!(
            "{:>6} {:>12.3e} {:>12.3e} {:>12.3e} {:>9.2}",
            "p_lost",
            posterior.p_lost,
            prior.p_lost,
            est.value,
            est.z_score(posterior.p_lost)
        );
    }
    Ok(())
}
