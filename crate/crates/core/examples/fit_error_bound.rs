//! Fits `ε(k) = c1·(kΔr) + c2·k·(kΔr)²` by non-negative least squares.
//!
//! ```text
//! cargo run --example fit_error_bound -- [sweep.csv]
//! ```
//!
//! Without a table, fits noisy manufactured data with c1 = 1, c2 = 2.

use std::path::Path;

use bemnet::experiments::{cmd_fit_bound, fit_error_bound, BoundSample};

fn main() -> bemnet::Result<()> {
    if let Some(table) = std::env::args().nth(1) {
        let fit = cmd_fit_bound(Path::new(&table), None, None, None)?;
        println!("c1 = {:.6e}, c2 = {:.6e}, residual {:.3e} ({} rows)", fit.c1, fit.c2, fit.residual, fit.samples);
        return Ok(());
    }
    let dr = 0.25;
    let samples: Vec<BoundSample> = (0..=10)
        .map(|i| {
            let k = i as f64;
            let wobble = 1.0 + 0.02 * (3.7 * k).sin();
            BoundSample {
                k,
                delta_r: dr,
                error: (k * dr + 2.0 * k * (k * dr).powi(2)) * wobble,
            }
        })
        .collect();
    let fit = fit_error_bound(&samples)?;
    println!("manufactured c1 = 1, c2 = 2 with 2% wobble");
    println!("fitted       c1 = {:.4}, c2 = {:.4}, residual {:.3e}", fit.c1, fit.c2, fit.residual);
    Ok(())
}
