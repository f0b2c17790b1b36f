use mazerlab::coupled::{
    energy_expectation, hamiltonian_apply, init_wavepacket, propagate, Grid, PropagationOptions, TwoChannelField,
    WavePacketSpec,
};
use mazerlab::model::{dressed_angle, make_params, Basis, ModeFunction, ModelParams};
use num_complex::Complex64;

fn position_moments(field: &TwoChannelField) -> (f64, f64) {
    let dz = field.grid.dz();
    let mut m0 = 0.0;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for (j, z) in field.grid.nodes().enumerate() {
        let w = (field.first[j].norm_sqr() + field.second[j].norm_sqr()) * dz;
        m0 += w;
        m1 += w * z;
        m2 += w * z * z;
    }
    let mean = m1 / m0;
    (mean, (m2 / m0 - mean * mean).sqrt())
}

/// ⟨k⟩ from a direct Fourier sum over a window around `k0`.
fn mean_wavenumber(field: &TwoChannelField, k0: f64, width: f64) -> f64 {
    let dz = field.grid.dz();
    let (mut num, mut den) = (0.0, 0.0);
    let samples = 801;
    for s in 0..samples {
        let k = k0 - width + 2.0 * width * s as f64 / (samples - 1) as f64;
        let phi: Complex64 = field
            .grid
            .nodes()
            .zip(&field.first)
            .map(|(z, psi)| psi * Complex64::from_polar(dz, -k * z))
            .sum();
        num += k * phi.norm_sqr();
        den += phi.norm_sqr();
    }
    num / den
}

#[test]
fn packet_mean_wavenumber() {
    let p = make_params(1.0, 0.0, 0.0, 1.0).unwrap();
    let spec = WavePacketSpec {
        k0: 1.3,
        sigma_k: 0.2,
        z0: -35.0,
        n: 0,
    };
    let grid = Grid::for_cavity(1.0, 0.02, 70.0, 5.0).unwrap();
    let f = init_wavepacket(&spec, &grid, &p).unwrap();
    let k = mean_wavenumber(&f, spec.k0, 8.0 * spec.sigma_k);
    assert!((k - spec.k0).abs() < spec.sigma_k / 10.0, "{k}");
}

#[test]
fn free_packet_spreads_like_the_closed_form() {
    let p = make_params(1.0, 0.0, 0.0, 1.0).unwrap();
    let spec = WavePacketSpec {
        k0: 1.0,
        sigma_k: 0.5,
        z0: -12.0,
        n: 0,
    };
    let grid = Grid::for_cavity(1.0, 0.02, 40.0, 40.0).unwrap();
    let f = init_wavepacket(&spec, &grid, &p).unwrap();
    let (_, s0) = position_moments(&f);
    let mut o = PropagationOptions::new(0.002, 2500);
    o.snapshot_every = Some(500);
    let tr = propagate(f, &p, &ModeFunction::Uncoupled, &o).unwrap();
    for snap in &tr.snapshots[1..] {
        let t = snap.time;
        let (_, s) = position_moments(snap);
        let want = s0 * (1.0 + t * t / s0.powi(4)).sqrt();
        assert!((s / want - 1.0).abs() < 1e-3, "t = {t}: {s} vs {want}");
    }
}

#[test]
fn energy_is_conserved_in_free_flight() {
    let p = make_params(1.0, 1.0, 0.0, 1.0).unwrap();
    let spec = WavePacketSpec {
        k0: 1.5,
        sigma_k: 0.4,
        z0: -25.0,
        n: 0,
    };
    let grid = Grid::for_cavity(1.0, 0.02, 45.0, 10.0).unwrap();
    let mode = ModeFunction::mesa(1.0).unwrap();
    let f = init_wavepacket(&spec, &grid, &p).unwrap();
    let e0 = energy_expectation(&f, &p, &mode);
    let mut o = PropagationOptions::new(0.002, 2000);
    o.snapshot_every = Some(400);
    let tr = propagate(f, &p, &mode, &o).unwrap();
    for s in &tr.snapshots {
        let e = energy_expectation(s, &p, &mode);
        assert!(((e - e0) / e0).abs() < 1e-8, "{e} vs {e0}");
    }
}

fn coupled_packet(p: &ModelParams) -> TwoChannelField {
    let spec = WavePacketSpec {
        k0: 1.5,
        sigma_k: 0.4,
        z0: -15.0,
        n: 1,
    };
    let grid = Grid::for_cavity(1.0, 0.02, 30.0, 30.0).unwrap();
    init_wavepacket(&spec, &grid, p).unwrap()
}

#[test]
fn dressed_and_bare_hamiltonians_are_related_by_the_rotation() {
    let p = make_params(0.8, 0.6, 0.0, 1.0).unwrap();
    let mode = ModeFunction::mesa(1.0).unwrap();
    let mut bare = coupled_packet(&p);
    // give the ground channel something to couple
    for (j, z) in bare.grid.nodes().enumerate().collect::<Vec<_>>() {
        bare.second[j] = Complex64::from_polar((-(z - 0.5).powi(2)).exp(), 0.3 * z);
    }
    let dressed = bare.to_basis(Basis::Dressed, &p);
    let hb = hamiltonian_apply(&bare, &p, &mode).to_basis(Basis::Dressed, &p);
    let hd = hamiltonian_apply(&dressed, &p, &mode);
    assert!(hb.max_deviation(&hd) < 1e-12);
    assert_eq!(dressed_angle(1, &p).n, 1);
}

#[test]
fn long_run_norm_and_interaction() {
    let p = make_params(1.0, 1.0, 0.0, 1.0).unwrap();
    let mode = ModeFunction::mesa(1.0).unwrap();
    let f = coupled_packet(&p);
    let mut o = PropagationOptions::new(0.002, 10_000);
    o.record_every = 1000;
    let tr = propagate(f, &p, &mode, &o).unwrap();
    let last = tr.records.last().unwrap();
    assert!((last.norm - 1.0).abs() < 1e-9, "{}", last.norm);
    // the packet crossed the cavity, so some photon emission happened
    assert!(last.p_g > 1e-3);
    assert_eq!(tr.records[0].inversion, 1.0);
}
