//! False-alarm and detection probabilities of the energy detector, and the
//! resulting scenario probabilities, across detection thresholds.
//!
//! cargo run --example sensing_profile

use crharq::{scenario_profile, Scenario, SystemParams};

fn main() -> crharq::Result<()> {
    let mut params = SystemParams::baseline();
    println!("N·B = {} samples, ζ = {:?}", params.sensing_samples(), params.scenario_snr());
    println!("{:>6} {:>10} {:>10} q (busy/det, busy/miss, idle/fa, idle/det)", "lambda", "p_f", "p_d");
    for lambda in [1.0, 1.2, 1.3, 1.4, 1.5, 1.6, 1.8, 2.0] {
        params.detection_threshold = lambda;
        let prof = scenario_profile(&params)?;
        let q: Vec<String> = Scenario::ALL.iter().map(|s| format!("{:.5}", prof.q[s.index()])).collect();
        println!("{lambda:>6.2} {:>10.6} {:>10.6} {}", prof.p_f, prof.p_d, q.join(" "));
    }
    Ok(())
}
