//! Model parameters, mode functions and the per-photon-sector algebra.
//!
//! Units: ħ = 1 and 2M = 1, so the kinetic operator is `-d²/dz²` and a free
//! wave `e^{ikz}` carries kinetic energy `k²`. The coupling λ sets the energy
//! scale; γ² = λ exactly. The common sector energy ω(n + 1/2) is dropped
//! (interaction picture), so ω is kept only as metadata.
//!
//! For a fixed photon number `n` the rotating-wave Hamiltonian closes on the
//! pair `{|e,n⟩, |g,n+1⟩}`. Every amplitude pair in this crate is ordered
//! `(excited, ground)` in the bare basis and `(plus, minus)` in the dressed
//! basis.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, MazerError, Result};

/// Square root of a real radicand with the global branch convention:
/// negative radicands map to `+i·√|x|`.
pub fn branch_sqrt(x: f64) -> Complex64 {
    if x >= 0.0 {
        Complex64::new(x.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-x).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    lambda: f64,
    delta: f64,
    omega: f64,
    cavity_length: f64,
    gamma: f64,
    omega0: f64,
}

impl ModelParams {
    pub fn new(lambda: f64, delta: f64, omega: f64, cavity_length: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(invalid("lambda", format!("must be positive and finite, got {lambda}")));
        }
        if !cavity_length.is_finite() || cavity_length <= 0.0 {
            return Err(invalid(
                "cavity_length",
                format!("must be positive and finite, got {cavity_length}"),
            ));
        }
        if !delta.is_finite() {
            return Err(invalid("delta", "must be finite"));
        }
        if !omega.is_finite() {
            return Err(invalid("omega", "must be finite"));
        }
        Ok(Self {
            lambda,
            delta,
            omega,
            cavity_length,
            gamma: lambda.sqrt(),
            omega0: omega + delta,
        })
    }

    /// Same parameters with a different detuning.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.lambda, delta, self.omega, self.cavity_length)
    }

    pub fn with_cavity_length(&self, cavity_length: f64) -> Result<Self> {
        Self::new(self.lambda, self.delta, self.omega, cavity_length)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn cavity_length(&self) -> f64 {
        self.cavity_length
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// Rabi coupling λ√(n+1).
    pub fn rabi(&self, n: u32) -> f64 {
        self.lambda * (f64::from(n) + 1.0).sqrt()
    }

    /// Ω_n = √(Δ²/4 + λ²(n+1)).
    pub fn big_omega(&self, n: u32) -> f64 {
        (0.5 * self.delta).hypot(self.rabi(n))
    }

    /// Conserved interaction-picture energy of an atom incident in |e,n⟩.
    pub fn incident_energy(&self, k: f64) -> f64 {
        k * k + 0.5 * self.delta
    }
}

/// Convenience wrapper mirroring [`ModelParams::new`].
pub fn make_params(lambda: f64, delta: f64, omega: f64, cavity_length: f64) -> Result<ModelParams> {
    ModelParams::new(lambda, delta, omega, cavity_length)
}

/// Cavity mode profile f(z).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeFunction {
    /// f = 1 on (0, L), 0 outside. The two edge points take the mean value 1/2.
    Mesa { length: f64 },
    /// f ≡ 0 (coupling switched off).
    Uncoupled,
    /// Linearly interpolated samples starting at `z_start` with spacing `dz`;
    /// zero outside the sampled window.
    Sampled { z_start: f64, dz: f64, values: Vec<f64> },
}

impl ModeFunction {
    pub fn mesa(length: f64) -> Result<Self> {
        if !length.is_finite() || length <= 0.0 {
            return Err(invalid("cavity_length", "mesa length must be positive"));
        }
        Ok(Self::Mesa { length })
    }

    pub fn sampled(z_start: f64, dz: f64, values: Vec<f64>) -> Result<Self> {
        if !(dz > 0.0) || !dz.is_finite() {
            return Err(invalid("dz", "sample spacing must be positive"));
        }
        if let Some(bad) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(invalid("mode_function", format!("samples must be finite and non-negative, got {bad}")));
        }
        Ok(Self::Sampled { z_start, dz, values })
    }

    pub fn eval(&self, z: f64) -> f64 {
        match self {
            Self::Mesa { length } => {
                if z > 0.0 && z < *length {
                    1.0
                } else if z == 0.0 || z == *length {
                    0.5
                } else {
                    0.0
                }
            }
            Self::Uncoupled => 0.0,
            Self::Sampled { z_start, dz, values } => {
                let x = (z - z_start) / dz;
                if values.is_empty() || x < 0.0 || x > (values.len() - 1) as f64 {
                    return 0.0;
                }
                let i = x.floor() as usize;
                if i + 1 >= values.len() {
                    return values[values.len() - 1];
                }
                let w = x - i as f64;
                values[i] * (1.0 - w) + values[i + 1] * w
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonSector {
    pub n: u32,
    /// |D_n|²
    pub weight: f64,
}

/// Photon-number distribution of the initial field state Σ D_n |n⟩.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonDistribution {
    sectors: Vec<PhotonSector>,
}

impl PhotonDistribution {
    pub const WEIGHT_TOLERANCE: f64 = 1e-9;

    pub fn new(sectors: Vec<PhotonSector>) -> Result<Self> {
        if sectors.is_empty() {
            return Err(invalid("weights", "at least one photon sector is required"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for s in &sectors {
            if !(s.weight >= 0.0) || !s.weight.is_finite() {
                return Err(invalid("weights", format!("weight of sector {} must be non-negative", s.n)));
            }
            if !seen.insert(s.n) {
                return Err(invalid("weights", format!("sector {} listed twice", s.n)));
            }
        }
        let total: f64 = sectors.iter().map(|s| s.weight).sum();
        if (total - 1.0).abs() > Self::WEIGHT_TOLERANCE {
            return Err(invalid("weights", format!("weights must sum to 1, got {total}")));
        }
        Ok(Self { sectors })
    }

    /// Field in the number state |n⟩.
    pub fn number_state(n: u32) -> Self {
        Self {
            sectors: vec![PhotonSector { n, weight: 1.0 }],
        }
    }

    /// Build from complex amplitudes D_n, indexed by photon number.
    pub fn from_amplitudes(amplitudes: &[Complex64]) -> Result<Self> {
        let sectors = amplitudes
            .iter()
            .enumerate()
            .filter(|(_, d)| d.norm_sqr() > 0.0)
            .map(|(n, d)| PhotonSector {
                n: n as u32,
                weight: d.norm_sqr(),
            })
            .collect();
        Self::new(sectors)
    }

    pub fn sectors(&self) -> &[PhotonSector] {
        &self.sectors
    }
}

/// Dressed-state mixing angle θ_n of one photon sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DressedRotation {
    pub n: u32,
    pub theta: f64,
}

/// θ_n = atan(λ√(n+1) / (Ω_n − Δ/2)), taken in (0, π/2) ⊂ (0, π).
///
/// Evaluated as `½·atan2(λ√(n+1), −Δ/2)`, which is the same angle and keeps
/// cos 2θ_n = −Δ/(2Ω_n), sin 2θ_n = λ√(n+1)/Ω_n to rounding for either sign
/// of Δ.
pub fn dressed_angle(n: u32, params: &ModelParams) -> DressedRotation {
    let theta = 0.5 * params.rabi(n).atan2(-0.5 * params.delta());
    DressedRotation { n, theta }
}

impl DressedRotation {
    /// Rotation at an explicit angle, for tests and what-if views.
    pub fn at_angle(n: u32, theta: f64) -> Self {
        Self { n, theta }
    }

    pub fn cos_2theta(&self) -> f64 {
        (2.0 * self.theta).cos()
    }

    pub fn sin_2theta(&self) -> f64 {
        (2.0 * self.theta).sin()
    }

    /// `(e, g)` → `(Φ⁺, Φ⁻)` components.
    pub fn rotate<T>(&self, excited: T, ground: T) -> (T, T)
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + std::ops::Sub<Output = T>,
    {
        let (s, c) = self.theta.sin_cos();
        (ground * c + excited * s, excited * c - ground * s)
    }

    /// `(Φ⁺, Φ⁻)` → `(e, g)` components.
    pub fn unrotate<T>(&self, plus: T, minus: T) -> (T, T)
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + std::ops::Sub<Output = T>,
    {
        let (s, c) = self.theta.sin_cos();
        (plus * s + minus * c, plus * c - minus * s)
    }
}

/// Bare → dressed amplitude pair.
pub fn dressed_rotate(pair_bare: (Complex64, Complex64), rotation: &DressedRotation) -> (Complex64, Complex64) {
    rotation.rotate(pair_bare.0, pair_bare.1)
}

/// Dressed → bare amplitude pair.
pub fn dressed_unrotate(pair_dressed: (Complex64, Complex64), rotation: &DressedRotation) -> (Complex64, Complex64) {
    rotation.unrotate(pair_dressed.0, pair_dressed.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Plus,
    Minus,
}

impl Channel {
    pub const BOTH: [Channel; 2] = [Channel::Plus, Channel::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Channel::Plus => 1.0,
            Channel::Minus => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Channel::Plus => "plus",
            Channel::Minus => "minus",
        }
    }
}

/// Interior wavenumbers of the published closed form, k±² = k² ∓ Ω_n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClaimedWavenumbers {
    pub k: f64,
    pub n: u32,
    pub k_plus: Complex64,
    pub k_minus: Complex64,
    pub upsilon_plus: Complex64,
    pub upsilon_minus: Complex64,
    pub delta_plus: Complex64,
    pub delta_minus: Complex64,
}

impl ClaimedWavenumbers {
    pub fn k_channel(&self, ch: Channel) -> Complex64 {
        match ch {
            Channel::Plus => self.k_plus,
            Channel::Minus => self.k_minus,
        }
    }

    pub fn upsilon(&self, ch: Channel) -> Complex64 {
        match ch {
            Channel::Plus => self.upsilon_plus,
            Channel::Minus => self.upsilon_minus,
        }
    }

    pub fn delta(&self, ch: Channel) -> Complex64 {
        match ch {
            Channel::Plus => self.delta_plus,
            Channel::Minus => self.delta_minus,
        }
    }
}

fn check_k(k: f64) -> Result<()> {
    if !k.is_finite() || k <= 0.0 {
        return Err(invalid("k", format!("incident wavenumber must be positive, got {k}")));
    }
    Ok(())
}

pub fn claimed_wavenumbers(k: f64, n: u32, params: &ModelParams) -> Result<ClaimedWavenumbers> {
    check_k(k)?;
    let lam = params.lambda();
    let g2 = params.gamma() * params.gamma();
    let root = (params.delta() * params.delta() / (4.0 * lam * lam) + f64::from(n) + 1.0).sqrt();
    let k_plus = branch_sqrt(k * k - g2 * root);
    let k_minus = branch_sqrt(k * k + g2 * root);
    if k_plus == Complex64::new(0.0, 0.0) {
        return Err(MazerError::DegenerateThreshold { what: "claimed k+", k });
    }
    if k_minus == Complex64::new(0.0, 0.0) {
        return Err(MazerError::DegenerateThreshold { what: "claimed k-", k });
    }
    let ups = |q: Complex64| 0.5 * (q / k - k / q);
    let del = |q: Complex64| 0.5 * (q / k + k / q);
    Ok(ClaimedWavenumbers {
        k,
        n,
        k_plus,
        k_minus,
        upsilon_plus: ups(k_plus),
        upsilon_minus: ups(k_minus),
        delta_plus: del(k_plus),
        delta_minus: del(k_minus),
    })
}

/// Wavenumbers dictated by energy conservation under the full sector Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrueWavenumbers {
    pub k: f64,
    pub n: u32,
    /// Outside wavenumber of the |g,n+1⟩ channel, √(k² + Δ).
    pub k_g: Complex64,
    /// Interior dressed wavenumbers, κ±² = k² + Δ/2 ∓ Ω_n.
    pub kappa_plus: Complex64,
    pub kappa_minus: Complex64,
    /// `k_g` is imaginary: the ground-state exit channel is closed.
    pub exit_channel_closed: bool,
}

impl TrueWavenumbers {
    pub fn kappa(&self, ch: Channel) -> Complex64 {
        match ch {
            Channel::Plus => self.kappa_plus,
            Channel::Minus => self.kappa_minus,
        }
    }
}

pub fn true_wavenumbers(k: f64, n: u32, params: &ModelParams) -> Result<TrueWavenumbers> {
    check_k(k)?;
    let e = params.incident_energy(k);
    let big = params.big_omega(n);
    let kg2 = k * k + params.delta();
    Ok(TrueWavenumbers {
        k,
        n,
        k_g: branch_sqrt(kg2),
        kappa_plus: branch_sqrt(e - big),
        kappa_minus: branch_sqrt(e + big),
        exit_channel_closed: kg2 < 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Bare,
    Dressed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CavityRegion {
    Inside,
    Outside,
}

/// Real symmetric 2×2 local potential block `[[diag.0, off], [off, diag.1]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorBlock {
    pub diag: (f64, f64),
    pub off: f64,
}

impl SectorBlock {
    pub fn to_matrix(&self) -> Matrix2<Complex64> {
        Matrix2::new(
            Complex64::from(self.diag.0),
            Complex64::from(self.off),
            Complex64::from(self.off),
            Complex64::from(self.diag.1),
        )
    }

    pub fn apply(&self, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
        (a * self.diag.0 + b * self.off, a * self.off + b * self.diag.1)
    }

    /// exp(−i·block·τ), exact through the closed-form 2×2 exponential.
    pub fn propagator(&self, tau: f64) -> [[Complex64; 2]; 2] {
        let mean = 0.5 * (self.diag.0 + self.diag.1);
        let half = 0.5 * (self.diag.0 - self.diag.1);
        let w = half.hypot(self.off);
        let phase = Complex64::from_polar(1.0, -mean * tau);
        let (s, c) = (w * tau).sin_cos();
        // sin(wτ)/w, finite as w → 0
        let sinc = if w * tau.abs() < 1e-8 { tau } else { s / w };
        let i = Complex64::i();
        [
            [phase * (c - i * sinc * half), phase * (-i * sinc * self.off)],
            [phase * (-i * sinc * self.off), phase * (c + i * sinc * half)],
        ]
    }
}

/// Local potential block of one photon sector at mode value `f`.
///
/// Bare basis: `[[Δ/2, λf√(n+1)], [λf√(n+1), −Δ/2]]`. Dressed basis: the
/// coupled-equation coefficients, diagonal `∓cos2θ·Δ/2 ± λf√(n+1)·sin2θ` and
/// off-diagonal `λf√(n+1)·cos2θ + sin2θ·Δ/2`.
pub fn local_block(f: f64, n: u32, params: &ModelParams, basis: Basis) -> SectorBlock {
    let half_delta = 0.5 * params.delta();
    let coupling = params.rabi(n) * f;
    match basis {
        Basis::Bare => SectorBlock {
            diag: (half_delta, -half_delta),
            off: coupling,
        },
        Basis::Dressed => {
            // cos 2θ = −Δ/(2Ω), sin 2θ = λ√(n+1)/Ω substituted; the off-diagonal
            // collapses to λ√(n+1)·Δ/(2Ω)·(1 − f)
            let big = params.big_omega(n);
            let rabi = params.rabi(n);
            let diag = (half_delta * half_delta + f * rabi * rabi) / big;
            SectorBlock {
                diag: (diag, -diag),
                off: rabi * half_delta / big * (1.0 - f),
            }
        }
    }
}

/// Local 2×2 block for the mesa mode, inside (f = 1) or outside (f = 0).
pub fn sector_hamiltonian(region: CavityRegion, n: u32, params: &ModelParams, basis: Basis) -> Matrix2<Complex64> {
    mesa_block(region, n, params, basis).to_matrix()
}

pub fn mesa_block(region: CavityRegion, n: u32, params: &ModelParams, basis: Basis) -> SectorBlock {
    let f = match region {
        CavityRegion::Inside => 1.0,
        CavityRegion::Outside => 0.0,
    };
    let mut block = local_block(f, n, params, basis);
    if basis == Basis::Dressed && region == CavityRegion::Inside {
        // diagonal is ±Ω_n in closed form
        let big = params.big_omega(n);
        block.diag = (big, -big);
    }
    block
}
