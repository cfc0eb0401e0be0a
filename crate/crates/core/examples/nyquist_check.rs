//! Spatial sampling check for the default configuration and a few
//! hand-picked spacings.
//!
//! ```text
//! cargo run --example nyquist_check
//! ```

use bemnet::config::ExperimentConfig;
use bemnet::experiments::{cmd_nyquist, nyquist_check, NyquistOverrides};

fn main() -> bemnet::Result<()> {
    let report = cmd_nyquist(&ExperimentConfig::default(), NyquistOverrides::default(), None)?;
    print!("{}", report.to_csv());

    println!("\n{:>8} {:>8} {:>10} {:>12} {:>7}", "dr", "k_max", "pi/k_max", "2pi/dr", "verdict");
    for (dr, k) in [(0.1, 10.0), (0.1, 40.0), (0.25, 4.0), (0.25, 13.0), (1.0, 4.0)] {
        let (bound, ks, pass) = nyquist_check(dr, k);
        println!(
            "{dr:>8} {k:>8} {bound:>10.5} {ks:>12.5} {:>7}",
            if pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(())
}
