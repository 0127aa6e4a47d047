//! Failure probabilities, steady state and throughput of the HARQ chain as
//! the deadline grows, under both history weightings.
//!
//! cargo run --release --example harq_chain -- [packet_bits]

use crharq::{build_chain, scenario_profile, throughput_metrics, ChainOptions, HistoryWeighting, SystemParams};

fn main() -> crharq::Result<()> {
    let mut params = SystemParams::baseline();
    if let Some(n) = std::env::args().nth(1) {
        params.packet_bits = n.parse().expect("packet_bits");
    }
    let profile = scenario_profile(&params)?;
    println!("n = {}, kappa = {:.6}", params.packet_bits, profile.kappa);
    for weighting in [HistoryWeighting::Posterior, HistoryWeighting::Prior] {
        println!("\n{weighting:?} weighting");
        println!("{:>3} {:>9} {:>10} {:>10} {:>10}  p", "M", "pi_0", "p_lost", "service", "goodput");
        for m in 1..=6 {
            params.deadline_frames = m;
            let opts = ChainOptions {
                weighting,
                ..Default::default()
            };
            let chain = build_chain(&profile, params.fading_power, m, &opts)?;
            let tp = throughput_metrics(&chain, &params);
            let p: Vec<String> = chain.p.iter().map(|v| format!("{v:.4}")).collect();
            println!(
                "{m:>3} {:>9.5} {:>10.3e} {:>10.5} {:>10.5}  [{}]",
                chain.pi0(),
                chain.p_lost,
                tp.service_rate_bcu,
                tp.goodput_bcu,
                p.join(", ")
            );
        }
    }
    Ok(())
}
