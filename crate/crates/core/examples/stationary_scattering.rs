//! Stationary two-channel scattering off a mesa cavity, with detuning.
//! Prints flux-normalized probabilities and unitarity.
//!
//! cargo run --example stationary_scattering

use mazerlab::coupled::{flux_probabilities, stationary_scatter};
use mazerlab::make_params;

fn main() -> mazerlab::Result<()> {
    let l = 2.0;
    for delta in [-0.5, 0.0, 0.5, 1.0] {
        let p = make_params(1.0, delta, 0.0, l)?;
        println!("delta = {delta}, L = {l}");
        println!("     k      R_e      R_g      T_e      T_g   emission  |1 - sum|");
        for i in 1..=8 {
            let k = 0.25 * f64::from(i);
            let sol = stationary_scatter(k, 0, &p)?;
            let f = flux_probabilities(&sol);
            let closed = if sol.exit_channel_closed { " (g closed)" } else { "" };
            println!(
                "  {k:4.2}  {:7.4}  {:7.4}  {:7.4}  {:7.4}  {:8.4}  {:8.1e}{closed}",
                f.r_e,
                f.r_g,
                f.t_e,
                f.t_g,
                f.emission(),
                (1.0 - f.total()).abs()
            );
        }
    }
    Ok(())
}
