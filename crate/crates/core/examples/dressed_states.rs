//! Dressed-state angles, Rabi splittings and the claimed vs true interior
//! wavenumbers for the first few photon sectors.
//!
//! cargo run --example dressed_states

use mazerlab::{claimed_wavenumbers, dressed_angle, make_params, true_wavenumbers, Channel};

fn main() -> mazerlab::Result<()> {
    let k = 1.7;
    for delta in [0.0, 0.5, 2.0] {
        let p = make_params(1.0, delta, 0.0, 1.0)?;
        println!("delta = {delta}");
        println!("  n   Omega_n    theta_n    k+ claimed          kappa+ true         k_g");
        for n in 0..4 {
            let rot = dressed_angle(n, &p);
            let c = claimed_wavenumbers(k, n, &p)?;
            let t = true_wavenumbers(k, n, &p)?;
            println!(
                "  {n}  {:9.6}  {:9.6}  {:>18}  {:>18}  {:.6}",
                p.big_omega(n),
                rot.theta,
                format!("{:.6}", c.k_channel(Channel::Plus)),
                format!("{:.6}", t.kappa(Channel::Plus)),
                t.k_g,
            );
        }
    }
    Ok(())
}
