//! Strang-split propagation of one photon sector:
//! exact local 2×2 exponential for dt/2, Crank–Nicolson kinetic step for dt
//! in each channel, local exponential for dt/2.
//!
//! The box has hard walls just beyond the first and last node.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MazerError, Result};
use crate::model::{local_block, ModeFunction, ModelParams, SectorBlock};

use super::field::{Grid, TwoChannelField};

/// Norm drift (relative to the initial norm) that aborts a run.
pub const STABILITY_LIMIT: f64 = 1e-6;

/// Optional complex absorbing layer at both walls, `−iW(z)` with
/// `W = strength·((width − d)/width)²` within `width` of a wall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingLayer {
    pub width: f64,
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationOptions {
    pub dt: f64,
    pub n_steps: usize,
    /// Record observables every this many steps (and at the last step).
    pub record_every: usize,
    /// Keep full field snapshots every this many steps.
    pub snapshot_every: Option<usize>,
    pub absorbing: Option<AbsorbingLayer>,
}

impl PropagationOptions {
    pub fn new(dt: f64, n_steps: usize) -> Self {
        Self {
            dt,
            n_steps,
            record_every: 1,
            snapshot_every: None,
            absorbing: None,
        }
    }
}

/// Observables at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub time: f64,
    pub norm: f64,
    pub p_e: f64,
    pub p_g: f64,
    /// (P_e − P_g)/(P_e + P_g)
    pub inversion: f64,
}

impl TrajectoryRecord {
    pub fn of(field: &TwoChannelField, params: &ModelParams) -> Self {
        let (p_e, p_g) = field.populations(params);
        Self {
            time: field.time,
            norm: field.norm(),
            p_e,
            p_g,
            inversion: (p_e - p_g) / (p_e + p_g),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    pub snapshots: Vec<TwoChannelField>,
    pub final_field: TwoChannelField,
    pub warnings: Vec<String>,
}

/// Tridiagonal Crank–Nicolson solver for `(1 + i·dt/2·T)ψ' = (1 − i·dt/2·T)ψ`
/// with `T = −d²/dz²` on the 3-point stencil.
#[derive(Debug, Clone)]
struct KineticStep {
    diag_rhs: Complex64,
    off: Complex64,
    // forward-elimination factors of the left-hand matrix
    c_prime: Vec<Complex64>,
    inv_denom: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl KineticStep {
    fn new(n: usize, dz: f64, dt: f64) -> Self {
        let a = Complex64::new(0.0, 0.5 * dt / (dz * dz));
        // LHS: diag 1 + 2a, off −a; RHS: diag 1 − 2a, off +a
        let diag_l = 1.0 + 2.0 * a;
        let off_l = -a;
        let mut c_prime = vec![Complex64::new(0.0, 0.0); n];
        let mut inv_denom = vec![Complex64::new(0.0, 0.0); n];
        let mut prev = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let denom = diag_l - off_l * prev;
            inv_denom[j] = 1.0 / denom;
            c_prime[j] = off_l * inv_denom[j];
            prev = c_prime[j];
        }
        Self {
            diag_rhs: 1.0 - 2.0 * a,
            off: a,
            c_prime,
            inv_denom,
            scratch: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    fn apply(&mut self, psi: &mut [Complex64]) {
        let n = psi.len();
        let off_l = -self.off;
        // right-hand side, forward sweep fused
        let mut prev_d = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let left = if j > 0 { psi[j - 1] } else { Complex64::new(0.0, 0.0) };
            let right = if j + 1 < n { psi[j + 1] } else { Complex64::new(0.0, 0.0) };
            let rhs = self.diag_rhs * psi[j] + self.off * (left + right);
            let d = (rhs - off_l * prev_d) * self.inv_denom[j];
            self.scratch[j] = d;
            prev_d = d;
        }
        psi[n - 1] = self.scratch[n - 1];
        for j in (0..n - 1).rev() {
            psi[j] = self.scratch[j] - self.c_prime[j] * psi[j + 1];
        }
    }
}

/// Reusable stepper for fixed grid, parameters, basis and time step.
#[derive(Debug, Clone)]
pub struct Propagator {
    params: ModelParams,
    dt: f64,
    half_steps: Vec<[[Complex64; 2]; 2]>,
    damping: Option<Vec<f64>>,
    kinetic: KineticStep,
}

impl Propagator {
    pub fn new(
        field: &TwoChannelField,
        params: &ModelParams,
        mode: &ModeFunction,
        dt: f64,
        absorbing: Option<AbsorbingLayer>,
    ) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(crate::error::invalid("dt", "time step must be positive"));
        }
        let grid = &field.grid;
        let f = grid.sample_mode(mode);
        let half_steps = f
            .iter()
            .map(|&fz| local_block(fz, field.n, params, field.basis).propagator(0.5 * dt))
            .collect();
        let damping = absorbing.map(|layer| absorbing_factors(grid, layer, 0.5 * dt));
        Ok(Self {
            params: *params,
            dt,
            half_steps,
            damping,
            kinetic: KineticStep::new(grid.len(), grid.dz(), dt),
        })
    }

    fn potential_half_step(&self, field: &mut TwoChannelField) {
        for (j, u) in self.half_steps.iter().enumerate() {
            let (a, b) = (field.first[j], field.second[j]);
            field.first[j] = u[0][0] * a + u[0][1] * b;
            field.second[j] = u[1][0] * a + u[1][1] * b;
        }
        if let Some(d) = &self.damping {
            for (j, w) in d.iter().enumerate() {
                field.first[j] *= *w;
                field.second[j] *= *w;
            }
        }
    }

    pub fn step(&mut self, field: &mut TwoChannelField) {
        self.potential_half_step(field);
        self.kinetic.apply(&mut field.first);
        self.kinetic.apply(&mut field.second);
        self.potential_half_step(field);
        field.time += self.dt;
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }
}

fn absorbing_factors(grid: &Grid, layer: AbsorbingLayer, tau: f64) -> Vec<f64> {
    let (lo, hi) = (grid.z_min(), grid.z_max());
    grid.nodes()
        .map(|z| {
            let d = (z - lo).min(hi - z);
            if d < layer.width {
                let x = (layer.width - d) / layer.width;
                (-layer.strength * x * x * tau).exp()
            } else {
                1.0
            }
        })
        .collect()
}

/// Propagate `field` for `options.n_steps` steps of size `options.dt`.
pub fn propagate(
    field: TwoChannelField,
    params: &ModelParams,
    mode: &ModeFunction,
    options: &PropagationOptions,
) -> Result<Trajectory> {
    let mut warnings = Vec::new();
    let dz = field.grid.dz();
    if options.dt >= dz * dz {
        warnings.push(format!(
            "dt = {} exceeds dz² = {}; the scheme stays stable but phase errors grow",
            options.dt,
            dz * dz
        ));
    }
    let mut stepper = Propagator::new(&field, params, mode, options.dt, options.absorbing)?;
    let mut field = field;
    let norm0 = field.norm();
    let record_every = options.record_every.max(1);
    let mut records = vec![TrajectoryRecord::of(&field, params)];
    let mut snapshots = Vec::new();
    if options.snapshot_every.is_some() {
        snapshots.push(field.clone());
    }
    for step in 1..=options.n_steps {
        stepper.step(&mut field);
        let last = step == options.n_steps;
        let record = step % record_every == 0 || last;
        if options.absorbing.is_none() && (record || step % 64 == 0) {
            let norm = field.norm();
            if !norm.is_finite() {
                return Err(MazerError::NumericalDegeneracy {
                    what: format!("non-finite field at step {step}"),
                    condition: f64::INFINITY,
                });
            }
            let drift = (norm - norm0).abs() / norm0;
            if drift > STABILITY_LIMIT {
                return Err(MazerError::Stability { step, drift });
            }
        }
        if record {
            records.push(TrajectoryRecord::of(&field, params));
        }
        if let Some(every) = options.snapshot_every {
            if step % every.max(1) == 0 || last {
                snapshots.push(field.clone());
            }
        }
    }
    Ok(Trajectory {
        records,
        snapshots,
        final_field: field,
        warnings,
    })
}

/// `(−d²/dz² + local block)ψ` with the 3-point stencil and hard walls.
pub fn hamiltonian_apply(field: &TwoChannelField, params: &ModelParams, mode: &ModeFunction) -> TwoChannelField {
    let grid = &field.grid;
    let f = grid.sample_mode(mode);
    let inv = 1.0 / (grid.dz() * grid.dz());
    let n = grid.len();
    let zero = Complex64::new(0.0, 0.0);
    let lap = |v: &[Complex64], j: usize| {
        let l = if j > 0 { v[j - 1] } else { zero };
        let r = if j + 1 < n { v[j + 1] } else { zero };
        (2.0 * v[j] - l - r) * inv
    };
    let mut out = field.clone();
    for j in 0..n {
        let block: SectorBlock = local_block(f[j], field.n, params, field.basis);
        let (a, b) = block.apply(field.first[j], field.second[j]);
        out.first[j] = lap(&field.first, j) + a;
        out.second[j] = lap(&field.second, j) + b;
    }
    out
}

/// ⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩
pub fn energy_expectation(field: &TwoChannelField, params: &ModelParams, mode: &ModeFunction) -> f64 {
    let h = hamiltonian_apply(field, params, mode);
    let num: Complex64 = field
        .first
        .iter()
        .zip(&h.first)
        .chain(field.second.iter().zip(&h.second))
        .map(|(a, b)| a.conj() * b)
        .sum();
    num.re * field.grid.dz() / field.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupled::field::{init_wavepacket, WavePacketSpec};
    use crate::model::{make_params, Basis};

    fn packet(params: &ModelParams) -> TwoChannelField {
        let grid = Grid::for_cavity(params.cavity_length(), 0.02, 40.0, 40.0).unwrap();
        let spec = WavePacketSpec { k0: 1.5, sigma_k: 0.3, z0: -20.0, n: 0 };
        init_wavepacket(&spec, &grid, params).unwrap()
    }

    #[test]
    fn kinetic_step_solves_the_tridiagonal_system() {
        let n = 7;
        let mut k = KineticStep::new(n, 0.1, 0.03);
        let v: Vec<Complex64> = (0..n).map(|j| Complex64::new(j as f64, 1.0 - j as f64 * 0.3)).collect();
        let mut x = v.clone();
        k.apply(&mut x);
        // residual of the implicit system
        let a = Complex64::new(0.0, 0.5 * 0.03 / 0.01);
        for j in 0..n {
            let l = if j > 0 { x[j - 1] } else { 0.0.into() };
            let r = if j + 1 < n { x[j + 1] } else { 0.0.into() };
            let lhs = (1.0 + 2.0 * a) * x[j] - a * (l + r);
            let vl = if j > 0 { v[j - 1] } else { 0.0.into() };
            let vr = if j + 1 < n { v[j + 1] } else { 0.0.into() };
            let rhs = (1.0 - 2.0 * a) * v[j] + a * (vl + vr);
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn plane_wave_is_stencil_eigenfunction() {
        let p = make_params(1.0, 0.6, 0.0, 1.0).unwrap();
        let grid = Grid::for_cavity(1.0, 0.01, 10.0, 10.0).unwrap();
        let k = 1.3;
        let mut f = TwoChannelField::zeros(grid.clone(), Basis::Bare, 0);
        for (j, z) in grid.nodes().enumerate() {
            f.first[j] = Complex64::from_polar(1.0, k * z);
        }
        let h = hamiltonian_apply(&f, &p, &ModeFunction::Uncoupled);
        let e = k * k + 0.3;
        for j in 1..grid.len() - 1 {
            assert!((h.first[j] - e * f.first[j]).norm() < 2.0 * (k * grid.dz()).powi(2) * k * k / 12.0 + 1e-9);
        }
    }

    #[test]
    fn norm_is_conserved() {
        let p = make_params(1.0, 1.0, 0.0, 2.0).unwrap();
        let f = packet(&p);
        let mode = ModeFunction::mesa(2.0).unwrap();
        let opts = PropagationOptions { record_every: 50, ..PropagationOptions::new(0.01, 1000) };
        let t = propagate(f, &p, &mode, &opts).unwrap();
        for r in &t.records {
            assert!((r.norm - 1.0).abs() < 1e-11);
            assert!((r.p_e + r.p_g - r.norm).abs() < 1e-10);
        }
    }

    #[test]
    fn absorbing_layer_removes_probability() {
        let p = make_params(1.0, 0.0, 0.0, 1.0).unwrap();
        let grid = Grid::for_cavity(1.0, 0.02, 25.0, 25.0).unwrap();
        let spec = WavePacketSpec { k0: 3.0, sigma_k: 0.5, z0: -12.0, n: 0 };
        let f = init_wavepacket(&spec, &grid, &p).unwrap();
        let opts = PropagationOptions {
            absorbing: Some(AbsorbingLayer { width: 8.0, strength: 5.0 }),
            record_every: 100,
            ..PropagationOptions::new(0.01, 1500)
        };
        let t = propagate(f, &p, &ModeFunction::mesa(1.0).unwrap(), &opts).unwrap();
        assert!(t.final_field.norm() < 0.05);
    }

    #[test]
    fn large_dt_warns() {
        let p = make_params(1.0, 0.0, 0.0, 1.0).unwrap();
        let f = packet(&p);
        let t = propagate(f, &p, &ModeFunction::Uncoupled, &PropagationOptions::new(0.01, 2)).unwrap();
        assert_eq!(t.warnings.len(), 1);
    }
}
