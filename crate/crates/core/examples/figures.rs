//! Runs a figure preset and writes its CSV and metadata.
//!
//! cargo run --release --example figures -- fig1|fig2|fig3 [out.csv]

use std::fs::File;

use crharq::report::{sweep_meta, to_json};
use crharq::sweep::{run_preset, write_csv, Preset};
use crharq::Config;

fn main() -> crharq::Result<()> {
    let mut args = std::env::args().skip(1);
    let preset: Preset = args.next().as_deref().unwrap_or("fig1").parse()?;
    let out = args.next().unwrap_or_else(|| format!("{preset:?}.csv").to_lowercase());

    let cfg = Config::default();
    let output = run_preset(&cfg, preset)?;
    write_csv(&output.rows, File::create(&out)?)?;
    std::fs::write(crharq::cli::meta_path(out.as_ref()), to_json(&sweep_meta(&cfg, &output))?)?;

    println!("{} rows -> {out}", output.rows.len());
    for a in &output.goodput_argmax {
        println!("{}: best n = {} (goodput {:.5} bits/channel use)", a.series, a.packet_bits, a.goodput_bcu);
    }
    if preset != Preset::Fig1 {
        println!("{:>8} effective capacity, bits/channel use", "theta");
        let series: Vec<&str> = output.specs.iter().map(|s| s.label.as_str()).collect();
        println!("{:>8} {}", "", series.join("  "));
        let per = output.specs[0].values.len();
        for i in 0..per {
            let vals: Vec<String> = (0..series.len())
                .map(|s| format!("{:.4}", output.rows[s * per + i].effcap_bcu_renewal))
                .collect();
            println!("{:>8.0e} {}", output.rows[i].theta, vals.join("  "));
        }
    }
    Ok(())
}
