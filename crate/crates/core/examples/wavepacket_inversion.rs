//! A Gaussian packet through the cavity in two photon sectors, and the
//! atomic inversion of their weighted mixture.
//!
//! cargo run --release --example wavepacket_inversion

use mazerlab::coupled::{flux_probabilities, init_wavepacket, propagate, stationary_scatter, Grid, PropagationOptions, WavePacketSpec};
use mazerlab::observables::aggregate_inversion;
use mazerlab::{make_params, ModeFunction};

fn main() -> mazerlab::Result<()> {
    let p = make_params(1.0, 0.5, 0.0, 2.0)?;
    let mode = ModeFunction::mesa(2.0)?;
    let grid = Grid::for_cavity(2.0, 0.02, 50.0, 50.0)?;
    let mut opts = PropagationOptions::new(0.002, 12_000);
    opts.record_every = 1000;

    let mut runs = Vec::new();
    for n in [0, 1] {
        let spec = WavePacketSpec {
            k0: 1.2,
            sigma_k: 0.25,
            z0: -25.0,
            n,
        };
        let tr = propagate(init_wavepacket(&spec, &grid, &p)?, &p, &mode, &opts)?;
        let f = flux_probabilities(&stationary_scatter(spec.k0, n, &p)?);
        let last = tr.records.last().unwrap();
        println!(
            "n = {n}: final P_g = {:.4} (stationary emission at k0: {:.4}), norm {:.12}",
            last.p_g,
            f.emission(),
            last.norm
        );
        for w in &tr.warnings {
            println!("  warning: {w}");
        }
        runs.push(tr);
    }

    let series = aggregate_inversion(&[&runs[0].records, &runs[1].records], &[0.6, 0.4])?;
    println!();
    println!("     t      W(t), weights 0.6 / 0.4");
    for (t, w) in series.time.iter().zip(&series.inversion) {
        println!("  {t:6.1}   {w:8.5}");
    }
    Ok(())
}
