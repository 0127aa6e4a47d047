//! Full analytic-versus-simulation validation at the baseline, plus the
//! negative control that feeds a corrupted p-vector to the root finder.
//!
//! cargo run --release --example validation -- [frames]

use crharq::report::{validate, ValidationHooks};
use crharq::Config;

fn main() -> crharq::Result<()> {
    let mut cfg = Config::default();
    if let Some(frames) = std::env::args().nth(1) {
        cfg.simulation.frames = frames.parse().expect("frames");
    }
    let report = validate(&cfg, &ValidationHooks::default())?;
    for c in &report.checks {
        println!("{} {:<42} {:.3e} (limit {:.1e})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.measured, c.tolerance);
    }
    println!("\nprior vs posterior weighting of scenario histories:");
    for r in &report.weighting_residuals {
        println!(
            "  p_{}: simulated {:.5}, posterior {:.5} (z {:+.2}), prior {:.5} (z {:+.2})",
            r.m, r.empirical, r.posterior, r.posterior_z, r.prior, r.prior_z
        );
    }
    println!("\nclosed-form variants vs simulated effective capacity:");
    for v in &report.variant_comparison {
        println!(
            "  theta {:.0e}: sim {:.5} [{:.5}, {:.5}], renewal {:.5} ({}), paper {:.5} ({})",
            v.theta,
            v.empirical_bcu,
            v.ci_low_bcu,
            v.ci_high_bcu,
            v.renewal_bcu,
            if v.renewal_inside_ci { "inside" } else { "outside" },
            v.paper_bcu,
            if v.paper_inside_ci { "inside" } else { "outside" },
        );
    }

    let hooks = ValidationHooks {
        root_failure_probs: Some(vec![0.5; cfg.link.deadline_frames]),
    };
    cfg.simulation.frames = 10_000;
    let control = validate(&cfg, &hooks)?;
    let root = control.checks.iter().find(|c| c.name == "root_vs_spectral_radius").expect("check present");
    println!("\nnegative control, corrupted p fed to the root finder: {}", if root.passed { "PASS (unexpected)" } else { "FAIL (expected)" });
    Ok(())
}
