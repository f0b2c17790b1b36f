//! The closed-form resonant solution: emission probability against cavity
//! length, and a cross-check of its coefficients against a direct
//! continuity solve.
//!
//! cargo run --example claimed_solution

use mazerlab::claimed::{claimed_coefficients, resonant_emission_probability};
use mazerlab::verifier::matching_oracle;
use mazerlab::{make_params, Channel};

fn main() -> mazerlab::Result<()> {
    let k = 0.3;
    println!("k = {k}, n = 0, delta = 0");
    println!("   L      R_e       R_g       T_e       T_g    emission");
    for i in 1..=12 {
        let l = 0.5 * f64::from(i);
        let p = make_params(1.0, 0.0, 0.0, l)?;
        let pr = resonant_emission_probability(k, 0, &p)?;
        println!(
            "{l:5.1}  {:8.5}  {:8.5}  {:8.5}  {:8.5}  {:8.5}",
            pr.r_e,
            pr.r_g,
            pr.t_e,
            pr.t_g,
            pr.emission()
        );
    }

    let p = make_params(1.0, 0.0, 0.0, 3.0)?;
    let c = claimed_coefficients(k, 0, &p)?;
    let oracle = matching_oracle(k, 0, &p)?;
    println!();
    println!("continuity solve vs closed form: max deviation {:.2e}", oracle.max_deviation);
    println!("phase defect of the printed transmitted amplitudes: {:.3}", oracle.printed_phase_defect);
    for ch in Channel::BOTH {
        let x = c.continuous(ch);
        println!("  {}: A = {:.5}  B = {:.5}", ch.label(), x.a, x.b);
    }
    Ok(())
}
