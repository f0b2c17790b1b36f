//! How badly the published off-resonant solution misses the Schrödinger
//! equation as the detuning grows.
//!
//! cargo run --example residual_vs_detuning

use mazerlab::claimed::Region;
use mazerlab::make_params;
use mazerlab::verifier::{claimed_residual, loglog_slope, residual_sweep};

fn main() -> mazerlab::Result<()> {
    let base = make_params(1.0, 0.0, 0.0, 1.0)?;
    let k = 2.0;
    let deltas: Vec<f64> = (0..=12).map(|i| 10f64.powf(-4.0 + 0.375 * f64::from(i))).collect();
    let sweep = residual_sweep(k, 0, &deltas, &base)?;
    println!("k = {k}, n = 0");
    println!("    delta      max residual");
    for s in &sweep {
        println!("  {:9.3e}   {:9.3e}", s.delta, s.max_norm);
    }
    let pts: Vec<(f64, f64)> = sweep.iter().take(6).map(|s| (s.delta, s.max_norm)).collect();
    println!("small-detuning log-log slope: {:.4}", loglog_slope(&pts));

    let r = claimed_residual(k, 0, &base.with_delta(1.0)?)?;
    println!();
    println!("delta = 1 by region (energy {:.4}):", r.energy);
    for region in Region::ALL {
        println!("  {:<7} {:.4e}", region.label(), r.region_max(region));
    }
    Ok(())
}
