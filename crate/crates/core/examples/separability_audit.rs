//! Off-diagonal couplings of the bare and dressed 2×2 blocks inside and
//! outside the cavity. Only one of the two bases is diagonal in each region
//! once the detuning is nonzero.
//!
//! cargo run --example separability_audit

use mazerlab::make_params;
use mazerlab::verifier::separability_audit;

fn main() -> mazerlab::Result<()> {
    let p = make_params(1.0, 0.0, 0.0, 1.0)?;
    let deltas: Vec<f64> = (0..=10).map(|i| -5.0 + f64::from(i)).collect();
    for n in 0..2 {
        let audit = separability_audit(n, &p, &deltas)?;
        println!("n = {n} (identity defect {:.1e})", audit.max_identity_defect());
        println!("   delta  dressed_in  dressed_out  bare_in  bare_out");
        for r in &audit.rows {
            println!(
                "  {:6.2}  {:10.3e}  {:11.5}  {:7.4}  {:8.1e}",
                r.delta, r.dressed_inside, r.dressed_outside, r.bare_inside, r.bare_outside
            );
        }
    }
    Ok(())
}
