//! Stationary scattering of the full sector Hamiltonian on the mesa mode.
//!
//! Outside the cavity the local block is diagonal in the bare basis, inside it
//! is diagonal in the dressed basis, so each region gets plane waves in its
//! own eigenbasis and the two are matched through the bare components at
//! z = 0 and z = L. Eight amplitudes, eight continuity conditions.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::claimed::{ChannelTerms, Region};
use crate::error::{invalid, MazerError, Result};
use crate::model::{branch_sqrt, dressed_angle, true_wavenumbers, Channel, DressedRotation, ModeFunction, ModelParams};
use crate::wave::{merge_terms, PlaneWave};

/// Above this `Im(κ)·L` the interior switches to decaying exponentials
/// referenced at opposite cavity edges.
const STANDING_DECAY_LIMIT: f64 = 10.0;

/// Matching systems with a larger condition number are rejected.
const MAX_CONDITION: f64 = 1e14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InteriorBasis {
    /// `c1·e^{iκz} + c2·e^{−iκ(z−L)}`
    Exponential,
    /// `c1·cos(κ(z−L/2)) + c2·sin(κ(z−L/2))/κ`, regular through κ = 0
    Standing,
}

/// One interior eigen-channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteriorChannel {
    pub kappa: Complex64,
    pub basis: InteriorBasis,
    pub c1: Complex64,
    pub c2: Complex64,
    length: f64,
}

fn sin_over(kappa: Complex64, x: f64) -> Complex64 {
    let kx = kappa * x;
    if kx.norm() < 1e-4 {
        x * (1.0 - kx * kx / 6.0)
    } else {
        kx.sin() / kappa
    }
}

impl InteriorChannel {
    fn unit(kappa: Complex64, basis: InteriorBasis, length: f64) -> Self {
        Self {
            kappa,
            basis,
            c1: 0.0.into(),
            c2: 0.0.into(),
            length,
        }
    }

    /// Values and derivatives of the two basis functions at `z`.
    fn basis_at(&self, z: f64) -> [(Complex64, Complex64); 2] {
        let i = Complex64::i();
        let q = self.kappa;
        match self.basis {
            InteriorBasis::Exponential => {
                let u1 = (i * q * z).exp();
                let u2 = (-i * q * (z - self.length)).exp();
                [(u1, i * q * u1), (u2, -i * q * u2)]
            }
            InteriorBasis::Standing => {
                let x = z - 0.5 * self.length;
                let c = (q * x).cos();
                [(c, -q * q * sin_over(q, x)), (sin_over(q, x), c)]
            }
        }
    }

    pub fn eval(&self, z: f64) -> Complex64 {
        let [u1, u2] = self.basis_at(z);
        self.c1 * u1.0 + self.c2 * u2.0
    }

    pub fn derivative(&self, z: f64) -> Complex64 {
        let [u1, u2] = self.basis_at(z);
        self.c1 * u1.1 + self.c2 * u2.1
    }

    /// `(a, b)` of `a·e^{iκz} + b·e^{−iκ(z−L)}`; `None` exactly at κ = 0.
    pub fn plane_wave_amplitudes(&self) -> Option<(Complex64, Complex64)> {
        match self.basis {
            InteriorBasis::Exponential => Some((self.c1, self.c2)),
            InteriorBasis::Standing => {
                let q = self.kappa;
                if q == Complex64::new(0.0, 0.0) {
                    return None;
                }
                let i = Complex64::i();
                let shift = (-i * q * 0.5 * self.length).exp();
                let s = self.c2 / (2.0 * i * q);
                Some((shift * (0.5 * self.c1 + s), shift * (0.5 * self.c1 - s)))
            }
        }
    }

    pub fn terms(&self) -> Option<Vec<PlaneWave>> {
        let (a, b) = self.plane_wave_amplitudes()?;
        Some(vec![
            PlaneWave::new(a, self.kappa, 0.0),
            PlaneWave::new(b, -self.kappa, self.length),
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationarySolution {
    pub k: f64,
    pub n: u32,
    #[serde(skip)]
    pub params: ModelParams,
    /// Outside wavenumber of the ground channel.
    pub k_g: Complex64,
    /// Amplitude of `e^{−ikz}` (z < 0, excited).
    pub r_e: Complex64,
    /// Amplitude of `e^{−ik_g z}` (z < 0, ground).
    pub r_g: Complex64,
    /// Amplitude of `e^{ik(z−L)}` (z > L, excited).
    pub t_e: Complex64,
    /// Amplitude of `e^{ik_g(z−L)}` (z > L, ground).
    pub t_g: Complex64,
    /// Interior eigen-channels, `(plus, minus)`.
    pub interior: [InteriorChannel; 2],
    /// Rotation diagonalizing the interior block.
    pub interior_rotation: DressedRotation,
    pub exit_channel_closed: bool,
    pub condition: f64,
}

pub fn stationary_scatter(k: f64, n: u32, params: &ModelParams) -> Result<StationarySolution> {
    stationary_scatter_with_mode(k, n, params, &ModeFunction::Mesa {
        length: params.cavity_length(),
    })
}

/// Stationary solution for a mesa mode or with the coupling switched off.
pub fn stationary_scatter_with_mode(
    k: f64,
    n: u32,
    params: &ModelParams,
    mode: &ModeFunction,
) -> Result<StationarySolution> {
    let length = params.cavity_length();
    let waves = true_wavenumbers(k, n, params)?;
    if waves.k_g == Complex64::new(0.0, 0.0) {
        return Err(MazerError::DegenerateThreshold { what: "ground-channel k_g", k });
    }
    let energy = params.incident_energy(k);
    // interior eigenbasis and eigenvalues
    let (rotation, eigen) = match mode {
        ModeFunction::Mesa { length: l } => {
            if (l - length).abs() > 1e-12 * length {
                return Err(invalid("mode_function", "mesa length must equal the cavity length"));
            }
            let big = params.big_omega(n);
            (dressed_angle(n, params), (big, -big))
        }
        ModeFunction::Uncoupled => (
            DressedRotation::at_angle(n, std::f64::consts::FRAC_PI_2),
            (0.5 * params.delta(), -0.5 * params.delta()),
        ),
        ModeFunction::Sampled { .. } => {
            return Err(invalid("mode_function", "the stationary solver handles mesa or uncoupled modes only"))
        }
    };
    let mut interior = [eigen.0, eigen.1].map(|eps| {
        let kappa = branch_sqrt(energy - eps);
        let basis = if kappa.im * length > STANDING_DECAY_LIMIT {
            InteriorBasis::Exponential
        } else {
            InteriorBasis::Standing
        };
        InteriorChannel::unit(kappa, basis, length)
    });

    let (s, c) = rotation.theta.sin_cos();
    let i = Complex64::i();
    let kc = Complex64::from(k);
    let kg = waves.k_g;
    let scale = 1.0 / k.max(kg.norm()).max(1.0);

    let mut m = SMatrix::<Complex64, 8, 8>::zeros();
    let mut rhs = SVector::<Complex64, 8>::zeros();
    // columns: r_e, r_g, t_e, t_g, c1+, c2+, c1-, c2-
    for (edge, z) in [(0usize, 0.0), (1usize, length)] {
        let row = 4 * edge;
        for (ch, chan) in interior.iter().enumerate() {
            // bare weights of this eigen-channel: ψ_e = sΨ⁺ + cΨ⁻, ψ_g = cΨ⁺ − sΨ⁻
            let (we, wg) = if ch == 0 { (s, c) } else { (c, -s) };
            for (j, (u, du)) in chan.basis_at(z).into_iter().enumerate() {
                let col = 4 + 2 * ch + j;
                m[(row, col)] = u * we;
                m[(row + 1, col)] = du * we * scale;
                m[(row + 2, col)] = u * wg;
                m[(row + 3, col)] = du * wg * scale;
            }
        }
        if edge == 0 {
            m[(0, 0)] = (-1.0).into();
            m[(1, 0)] = i * kc * scale;
            m[(2, 1)] = (-1.0).into();
            m[(3, 1)] = i * kg * scale;
            rhs[0] = 1.0.into();
            rhs[1] = i * kc * scale;
        } else {
            m[(4, 2)] = (-1.0).into();
            m[(5, 2)] = -i * kc * scale;
            m[(6, 3)] = (-1.0).into();
            m[(7, 3)] = -i * kg * scale;
        }
    }

    let sv = m.svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition < MAX_CONDITION) {
        return Err(MazerError::NumericalDegeneracy {
            what: format!("stationary matching matrix at k = {k}, n = {n}, Δ = {}", params.delta()),
            condition,
        });
    }
    let x = m.lu().solve(&rhs).ok_or_else(|| MazerError::NumericalDegeneracy {
        what: "stationary matching matrix is singular".into(),
        condition,
    })?;
    interior[0].c1 = x[4];
    interior[0].c2 = x[5];
    interior[1].c1 = x[6];
    interior[1].c2 = x[7];

    Ok(StationarySolution {
        k,
        n,
        params: *params,
        k_g: kg,
        r_e: x[0],
        r_g: x[1],
        t_e: x[2],
        t_g: x[3],
        interior,
        interior_rotation: rotation,
        exit_channel_closed: waves.exit_channel_closed,
        condition,
    })
}

impl StationarySolution {
    pub fn cavity_length(&self) -> f64 {
        self.params.cavity_length()
    }

    pub fn interior_channel(&self, ch: Channel) -> &InteriorChannel {
        match ch {
            Channel::Plus => &self.interior[0],
            Channel::Minus => &self.interior[1],
        }
    }

    /// Interior `(a, b)` of `a·e^{iκz} + b·e^{−iκ(z−L)}` per eigen-channel.
    pub fn interior_amplitudes(&self, ch: Channel) -> Option<(Complex64, Complex64)> {
        self.interior_channel(ch).plane_wave_amplitudes()
    }

    /// `(ψ_e, ψ_g)` and their z-derivatives.
    pub fn eval_bare_with_derivative(&self, z: f64) -> [(Complex64, Complex64); 2] {
        let i = Complex64::i();
        let k = Complex64::from(self.k);
        let l = self.cavity_length();
        if z < 0.0 {
            let inc = (i * k * z).exp();
            let re = self.r_e * (-i * k * z).exp();
            let rg = self.r_g * (-i * self.k_g * z).exp();
            [(inc + re, i * k * (inc - re)), (rg, -i * self.k_g * rg)]
        } else if z > l {
            let te = self.t_e * (i * k * (z - l)).exp();
            let tg = self.t_g * (i * self.k_g * (z - l)).exp();
            [(te, i * k * te), (tg, i * self.k_g * tg)]
        } else {
            let (p, m) = (&self.interior[0], &self.interior[1]);
            let (e, g) = self.interior_rotation.unrotate(p.eval(z), m.eval(z));
            let (de, dg) = self.interior_rotation.unrotate(p.derivative(z), m.derivative(z));
            [(e, de), (g, dg)]
        }
    }

    pub fn eval_bare(&self, z: f64) -> (Complex64, Complex64) {
        let [e, g] = self.eval_bare_with_derivative(z);
        (e.0, g.0)
    }

    /// Largest jump of `ψ_e`, `ψ_g` or their derivatives (divided by k) at the
    /// cavity edges, comparing the exterior and interior representations.
    pub fn continuity_defect(&self) -> f64 {
        let i = Complex64::i();
        let k = Complex64::from(self.k);
        let l = self.cavity_length();
        let outside = [
            [(1.0 + self.r_e, i * k * (1.0 - self.r_e)), (self.r_g, -i * self.k_g * self.r_g)],
            [(self.t_e, i * k * self.t_e), (self.t_g, i * self.k_g * self.t_g)],
        ];
        let mut worst: f64 = 0.0;
        for (idx, z) in [0.0, l].into_iter().enumerate() {
            let (p, m) = (&self.interior[0], &self.interior[1]);
            let (e, g) = self.interior_rotation.unrotate(p.eval(z), m.eval(z));
            let (de, dg) = self.interior_rotation.unrotate(p.derivative(z), m.derivative(z));
            let o = outside[idx];
            worst = worst
                .max((e - o[0].0).norm())
                .max((g - o[1].0).norm())
                .max((de - o[0].1).norm() / self.k)
                .max((dg - o[1].1).norm() / self.k);
        }
        worst
    }

    /// Plane-wave terms of `(ψ_e, ψ_g)` in a region; `None` inside when an
    /// interior wavenumber is exactly zero.
    pub fn bare_terms(&self, region: Region) -> Option<(Vec<PlaneWave>, Vec<PlaneWave>)> {
        let k = Complex64::from(self.k);
        let l = self.cavity_length();
        Some(match region {
            Region::Left => (
                vec![PlaneWave::new(1.0.into(), k, 0.0), PlaneWave::new(self.r_e, -k, 0.0)],
                vec![PlaneWave::new(self.r_g, -self.k_g, 0.0)],
            ),
            Region::Right => (
                vec![PlaneWave::new(self.t_e, k, l)],
                vec![PlaneWave::new(self.t_g, self.k_g, l)],
            ),
            Region::Inside => {
                let p = self.interior[0].terms()?;
                let m = self.interior[1].terms()?;
                let (s, c) = self.interior_rotation.theta.sin_cos();
                let mix = |wp: f64, wm: f64| {
                    merge_terms(
                        p.iter()
                            .map(|t| t.scaled(wp.into()))
                            .chain(m.iter().map(|t| t.scaled(wm.into()))),
                    )
                };
                (mix(s, c), mix(c, -s))
            }
        })
    }

    /// Plane-wave terms of `(Ψ⁺, Ψ⁻)` in the sector's dressed basis.
    pub fn dressed_terms(&self, region: Region) -> Option<ChannelTerms> {
        let (e, g) = self.bare_terms(region)?;
        let rot = dressed_angle(self.n, &self.params);
        let (s, c) = rot.theta.sin_cos();
        let mix = |we: f64, wg: f64| {
            merge_terms(
                e.iter()
                    .map(|t| t.scaled(we.into()))
                    .chain(g.iter().map(|t| t.scaled(wg.into()))),
            )
        };
        Some(ChannelTerms {
            plus: mix(s, c),
            minus: mix(c, -s),
        })
    }
}

/// Bare-channel probabilities of a stationary solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxProbabilities {
    pub r_e: f64,
    pub r_g: f64,
    pub t_e: f64,
    pub t_g: f64,
}

impl FluxProbabilities {
    pub fn emission(&self) -> f64 {
        self.r_g + self.t_g
    }

    pub fn total(&self) -> f64 {
        self.r_e + self.r_g + self.t_e + self.t_g
    }
}

/// `R_e = |r_e|²`, `R_g = (k_g/k)|r_g|²`, same for T; closed ground channel
/// carries no flux.
pub fn flux_probabilities(sol: &StationarySolution) -> FluxProbabilities {
    let ratio = if sol.exit_channel_closed { 0.0 } else { sol.k_g.re / sol.k };
    FluxProbabilities {
        r_e: sol.r_e.norm_sqr(),
        r_g: ratio * sol.r_g.norm_sqr(),
        t_e: sol.t_e.norm_sqr(),
        t_g: ratio * sol.t_g.norm_sqr(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_params;
    use proptest::prelude::*;

    #[test]
    fn uncoupled_is_free_propagation() {
        let p = make_params(1.0, 0.7, 0.0, 2.0).unwrap();
        let sol = stationary_scatter_with_mode(1.3, 0, &p, &ModeFunction::Uncoupled).unwrap();
        // transmitted wave is referenced at z = L
        let free = Complex64::from_polar(1.0, 1.3 * 2.0);
        assert!((sol.t_e - free).norm() < 1e-14);
        assert!(sol.r_e.norm() < 1e-14 && sol.r_g.norm() < 1e-14 && sol.t_g.norm() < 1e-14);
    }

    #[test]
    fn threshold_interior_is_regular() {
        // κ+ = 0 exactly at k = 1, Δ = 0
        let p = make_params(1.0, 0.0, 0.0, 2.0).unwrap();
        let sol = stationary_scatter(1.0, 0, &p).unwrap();
        assert_eq!(sol.interior[0].kappa, Complex64::new(0.0, 0.0));
        assert!(sol.interior_amplitudes(Channel::Plus).is_none());
        assert!((flux_probabilities(&sol).total() - 1.0).abs() < 1e-12);
        assert!(sol.continuity_defect() < 1e-12);
        // continuity with nearby energies
        let near = stationary_scatter(1.0 + 1e-7, 0, &p).unwrap();
        assert!((near.t_e - sol.t_e).norm() < 1e-5);
    }

    #[test]
    fn interior_bases_agree() {
        let mut a = InteriorChannel::unit(Complex64::new(0.0, 1.2), InteriorBasis::Standing, 3.0);
        a.c1 = Complex64::new(0.3, -0.2);
        a.c2 = Complex64::new(-0.5, 0.1);
        let (pa, pb) = a.plane_wave_amplitudes().unwrap();
        let mut b = InteriorChannel::unit(a.kappa, InteriorBasis::Exponential, 3.0);
        b.c1 = pa;
        b.c2 = pb;
        for z in [0.0, 0.4, 1.5, 3.0] {
            assert!((a.eval(z) - b.eval(z)).norm() < 1e-13);
            assert!((a.derivative(z) - b.derivative(z)).norm() < 1e-13);
        }
    }

    #[test]
    fn closed_exit_channel() {
        let p = make_params(1.0, -2.0, 0.0, 1.5).unwrap();
        let sol = stationary_scatter(1.0, 0, &p).unwrap();
        assert!(sol.exit_channel_closed);
        let f = flux_probabilities(&sol);
        assert_eq!(f.r_g, 0.0);
        assert!((f.total() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_sampled_modes() {
        let p = make_params(1.0, 0.0, 0.0, 1.0).unwrap();
        let mode = ModeFunction::sampled(0.0, 0.1, vec![1.0; 11]).unwrap();
        assert!(stationary_scatter_with_mode(2.0, 0, &p, &mode).is_err());
    }

    proptest! {
        #[test]
        fn flux_is_conserved(k in 0.05f64..5.0, delta in -2.0f64..2.0, n in 0u32..5, l in 0.3f64..20.0) {
            let p = make_params(1.0, delta, 0.0, l).unwrap();
            let sol = stationary_scatter(k, n, &p).unwrap();
            prop_assert!((flux_probabilities(&sol).total() - 1.0).abs() < 1e-10);
            prop_assert!(sol.continuity_defect() < 1e-10);
        }
    }
}
