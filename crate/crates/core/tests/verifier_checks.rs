use mazerlab::claimed::{assemble_claimed_state, Region};
use mazerlab::coupled::{Grid, WavePacketSpec};
use mazerlab::model::{make_params, mesa_block, Basis, CavityRegion, Channel};
use mazerlab::verifier::{
    basis_equivalence_check, claimed_residual, matching_oracle, residual_sweep, EXTERIOR_WINDOW,
};
use mazerlab::wave::eval_sum;
use num_complex::Complex64;
use proptest::prelude::*;

/// Largest |FD residual − algebraic residual| over interior nodes of the cavity.
fn fd_gap(k: f64, delta: f64, h: f64) -> f64 {
    let p = make_params(1.0, delta, 0.0, 1.0).unwrap();
    let state = assemble_claimed_state(k, 0, &p).unwrap();
    let report = claimed_residual(k, 0, &p).unwrap();
    let block = mesa_block(CavityRegion::Inside, 0, &p, Basis::Dressed);
    let e = report.energy;
    let mut gap: f64 = 0.0;
    let mut z = 0.1;
    while z < 0.9 {
        let (pm, mm) = state.eval_dressed(z - h);
        let (p0, m0) = state.eval_dressed(z);
        let (pp, mp) = state.eval_dressed(z + h);
        let lap = |a: Complex64, b: Complex64, c: Complex64| -(a - 2.0 * b + c) / (h * h);
        let rp = lap(pm, p0, pp) + (block.diag.0 - e) * p0 + block.off * m0;
        let rm = lap(mm, m0, mp) + (block.diag.1 - e) * m0 + block.off * p0;
        let ap = eval_sum(&report.entry(Region::Inside, Channel::Plus).unwrap().terms, z);
        let am = eval_sum(&report.entry(Region::Inside, Channel::Minus).unwrap().terms, z);
        gap = gap.max((rp - ap).norm()).max((rm - am).norm());
        z += 0.01;
    }
    gap
}

#[test]
fn algebraic_residual_matches_finite_differences() {
    let coarse = fd_gap(2.0, 1.0, 0.01);
    let fine = fd_gap(2.0, 1.0, 0.005);
    assert!(coarse < 1e-3, "{coarse}");
    let ratio = coarse / fine;
    assert!((ratio - 4.0).abs() < 0.3, "{ratio}");
}

#[test]
fn residual_examples() {
    let p = make_params(1.0, 0.0, 0.0, 1.0).unwrap();
    let r = claimed_residual(2.0, 0, &p).unwrap();
    assert!(r.entries.iter().all(|e| e.norm < 1e-10));

    let p = make_params(1.0, 1.0, 0.0, 1.0).unwrap();
    let r = claimed_residual(2.0, 0, &p).unwrap();
    assert!(r.max_norm > 1e-3);
    assert!(r.region_max(Region::Left) > 1e-3 && r.region_max(Region::Right) > 1e-3);
    assert_eq!(r.exterior_window, EXTERIOR_WINDOW);
    assert_eq!(r, claimed_residual(2.0, 0, &p).unwrap());
}

#[test]
fn sweep_decreases_toward_resonance() {
    let p = make_params(1.0, 0.0, 0.0, 1.0).unwrap();
    let s = residual_sweep(2.0, 0, &[0.4, 0.2, 0.1, 0.05, 0.0], &p).unwrap();
    for w in s.windows(2) {
        assert!(w[1].max_norm < w[0].max_norm, "{} !< {}", w[1].max_norm, w[0].max_norm);
    }
    assert!(s[4].max_norm < 1e-12);
}

#[test]
fn sweep_marks_thresholds() {
    // k = 1, Δ = 0 puts the published k₊ at zero
    let p = make_params(1.0, 0.0, 0.0, 1.0).unwrap();
    let s = residual_sweep(1.0, 0, &[0.0, 0.5], &p).unwrap();
    assert!(s[0].max_norm.is_nan() && s[0].report.is_none());
    assert!(s[1].max_norm > 0.0);
}

#[test]
fn matching_oracle_examples() {
    let p = make_params(1.0, 0.0, 0.0, 1.0).unwrap();
    assert!(matching_oracle(2.0, 0, &p).unwrap().max_deviation < 1e-12);
    assert!(matching_oracle(2.0, 3, &p).unwrap().max_deviation < 1e-12);
    let p = make_params(1.0, 0.0, 0.0, 10.0).unwrap();
    assert!(matching_oracle(0.5, 0, &p).unwrap().max_deviation < 1e-10);
}

#[test]
fn printed_phase_defect_is_reported() {
    let p = make_params(1.0, 0.0, 0.0, 1.0).unwrap();
    let r = matching_oracle(2.0, 0, &p).unwrap();
    assert!(r.printed_phase_defect > 0.1);
}

fn small_packet() -> (WavePacketSpec, Grid) {
    let spec = WavePacketSpec {
        k0: 2.0,
        sigma_k: 0.5,
        z0: -12.0,
        n: 0,
    };
    (spec, Grid::for_cavity(1.0, 0.02, 25.0, 10.0).unwrap())
}

#[test]
fn basis_equivalence_at_resonance_and_growth() {
    let (spec, grid) = small_packet();
    let p0 = make_params(1.0, 0.0, 0.0, 1.0).unwrap();
    assert!(basis_equivalence_check(&spec, &p0, &grid, 0.002, 200).unwrap() < 1e-10);

    let p1 = make_params(1.0, 1.0, 0.0, 1.0).unwrap();
    let d100 = basis_equivalence_check(&spec, &p1, &grid, 0.002, 100).unwrap();
    let d1000 = basis_equivalence_check(&spec, &p1, &grid, 0.002, 1000).unwrap();
    assert!(d1000 < 1e-8, "{d1000}");
    assert!(d1000 <= 10.0 * d100.max(1e-15) * 1.5, "{d100} -> {d1000}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn residual_vanishes_at_resonance(k in 0.1f64..5.0, n in 0u32..4, l in 0.5f64..10.0) {
        let p = make_params(1.0, 0.0, 0.0, l).unwrap();
        let omega = p.big_omega(n);
        prop_assume!((k * k - omega).abs() > 1e-3);
        let r = claimed_residual(k, n, &p).unwrap();
        prop_assert!(r.max_norm < 1e-10, "{}", r.max_norm);
    }

    #[test]
    fn residual_is_bounded_away_from_zero(k in 0.1f64..5.0, delta in 0.1f64..2.0, sign in any::<bool>()) {
        let d = if sign { delta } else { -delta };
        let p = make_params(1.0, d, 0.0, 1.0).unwrap();
        let omega = p.big_omega(0);
        prop_assume!((k * k - omega).abs() > 1e-3);
        let r = claimed_residual(k, 0, &p).unwrap();
        prop_assert!(r.max_norm > 1e-3, "{}", r.max_norm);
    }
}
