//! The published closed-form solution for the mesa mode.
//!
//! The coefficients are evaluated exactly as printed, including where the
//! construction is no longer a solution of the full sector Hamiltonian
//! (Δ ≠ 0). Results produced off resonance carry
//! [`Validity::ClaimedNotPhysical`].
//!
//! Two conventions of the printed closed form are made explicit here:
//!
//! - Every dressed channel is driven by the same source amplitude `sin θ_n`
//!   (the factor appearing in all four coefficient formulas), while the
//!   projection of `|e,n⟩` onto `Φ⁻` is `cos θ_n`. Both are recorded in
//!   [`SourceConvention`].
//! - The printed `α±`, `β±` and `B±` carry a factor `e^{−ikL}` that is not
//!   compatible with value continuity for transmitted waves written as
//!   `e^{ik(z−L)}`. The printed values are stored as-is; the assembled state
//!   uses the phase-aligned set from [`ClaimedCoefficients::continuous`].

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{MazerError, Result};
use crate::model::{claimed_wavenumbers, dressed_angle, Channel, ClaimedWavenumbers, DressedRotation, ModelParams};
use crate::wave::{derivative_sum, eval_sum, merge_terms, PlaneWave};

/// Above this value of `Im(κ)·L` the coefficients are evaluated through the
/// rescaled denominator instead of complex `cos`/`sin`.
const LITERAL_DECAY_LIMIT: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Validity {
    /// Δ = 0: the closed form solves the true coupled equations.
    Resonant,
    /// Δ ≠ 0: evaluated for testing only.
    ClaimedNotPhysical,
}

impl Validity {
    pub fn for_params(params: &ModelParams) -> Self {
        if params.delta() == 0.0 {
            Self::Resonant
        } else {
            Self::ClaimedNotPhysical
        }
    }
}

impl fmt::Display for Validity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Validity::Resonant => f.write_str("resonant"),
            Validity::ClaimedNotPhysical => f.write_str("claimed, not physical"),
        }
    }
}

/// Normalization factors of the published state, kept out of the amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceConvention {
    /// Global prefactor, 1/√2.
    pub prefactor: f64,
    /// Incident amplitude of `e^{ikz}` in (Φ⁺, Φ⁻) encoded by the coefficients.
    pub dressed_source: (f64, f64),
    /// ⟨Φ±|e,n⟩ = (sin θ_n, cos θ_n).
    pub physical_source: (f64, f64),
    /// Incident term inside the bracket of the `|e,n⟩` line that makes the
    /// state continuous, `2 sin θ_n` (√2 at resonance).
    pub bracket_incident: f64,
    /// Incident term as printed.
    pub printed_bracket_incident: f64,
}

impl SourceConvention {
    fn new(rotation: &DressedRotation) -> Self {
        let (s, c) = rotation.theta.sin_cos();
        Self {
            prefactor: std::f64::consts::FRAC_1_SQRT_2,
            dressed_source: (s, s),
            physical_source: (s, c),
            bracket_incident: 2.0 * s,
            printed_bracket_incident: 1.0,
        }
    }

    pub fn dressed(&self, ch: Channel) -> f64 {
        match ch {
            Channel::Plus => self.dressed_source.0,
            Channel::Minus => self.dressed_source.1,
        }
    }
}

/// `A`, `B`, `α`, `β` of one dressed channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelCoefficients {
    pub a: Complex64,
    pub b: Complex64,
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl ChannelCoefficients {
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            self.a - other.a,
            self.b - other.b,
            self.alpha - other.alpha,
            self.beta - other.beta,
        ]
        .iter()
        .map(|d| d.norm())
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimedCoefficients {
    pub k: f64,
    pub n: u32,
    #[serde(skip)]
    pub params: ModelParams,
    #[serde(skip)]
    pub wavenumbers: ClaimedWavenumbers,
    pub rotation: DressedRotation,
    pub a_plus: Complex64,
    pub a_minus: Complex64,
    pub b_plus: Complex64,
    pub b_minus: Complex64,
    pub alpha_plus: Complex64,
    pub alpha_minus: Complex64,
    pub beta_plus: Complex64,
    pub beta_minus: Complex64,
    pub source: SourceConvention,
    pub validity: Validity,
    // bounded, region-referenced amplitudes for assembling the state
    referenced: [ChannelCoefficients; 2],
}

/// Per-channel pieces shared by the literal and rescaled evaluations.
struct ScaledDenominator {
    /// e^{iκL}, bounded by 1 under the branch convention
    e1: Complex64,
    /// cos(κL) − iδ sin(κL) divided by e^{−iκL}
    reduced: Complex64,
}

impl ScaledDenominator {
    fn new(kappa: Complex64, delta: Complex64, length: f64) -> Self {
        let e1 = (Complex64::i() * kappa * length).exp();
        let e2 = e1 * e1;
        Self {
            e1,
            reduced: 0.5 * (e2 + 1.0) - 0.5 * delta * (e2 - 1.0),
        }
    }
}

fn literal_channel(k: f64, kappa: Complex64, ups: Complex64, del: Complex64, s: f64, length: f64) -> ChannelCoefficients {
    let i = Complex64::i();
    let kl = kappa * length;
    let denom = kl.cos() - i * del * kl.sin();
    let phase = Complex64::from_polar(1.0, -k * length);
    ChannelCoefficients {
        a: i * ups * kl.sin() * s / denom,
        b: s * phase / denom,
        alpha: 0.5 * (1.0 + k / kappa) * (-i * kl).exp() * s * phase / denom,
        beta: 0.5 * (1.0 - k / kappa) * (i * kl).exp() * s * phase / denom,
    }
}

fn rescaled_channel(k: f64, kappa: Complex64, ups: Complex64, sd: &ScaledDenominator, s: f64, length: f64) -> ChannelCoefficients {
    let phase = Complex64::from_polar(1.0, -k * length);
    let e2 = sd.e1 * sd.e1;
    ChannelCoefficients {
        a: s * ups * (e2 - 1.0) / (2.0 * sd.reduced),
        b: s * phase * sd.e1 / sd.reduced,
        alpha: 0.5 * (1.0 + k / kappa) * s * phase / sd.reduced,
        beta: 0.5 * (1.0 - k / kappa) * s * phase * e2 / sd.reduced,
    }
}

/// Printed coefficients of the closed form at (k, n).
pub fn claimed_coefficients(k: f64, n: u32, params: &ModelParams) -> Result<ClaimedCoefficients> {
    let wavenumbers = claimed_wavenumbers(k, n, params)?;
    let rotation = dressed_angle(n, params);
    let source = SourceConvention::new(&rotation);
    let length = params.cavity_length();

    let mut printed = [None, None];
    let mut referenced = [None, None];
    for (slot, ch) in Channel::BOTH.into_iter().enumerate() {
        let kappa = wavenumbers.k_channel(ch);
        let ups = wavenumbers.upsilon(ch);
        let del = wavenumbers.delta(ch);
        let s = source.dressed(ch);
        let sd = ScaledDenominator::new(kappa, del, length);
        let scaled = rescaled_channel(k, kappa, ups, &sd, s, length);
        printed[slot] = Some(if kappa.im * length < LITERAL_DECAY_LIMIT {
            literal_channel(k, kappa, ups, del, s, length)
        } else {
            scaled
        });
        // phase-aligned: α, β, B without the e^{−ikL} factor; β referenced at z = L
        referenced[slot] = Some(ChannelCoefficients {
            a: scaled.a,
            b: s * sd.e1 / sd.reduced,
            alpha: 0.5 * (1.0 + k / kappa) * s / sd.reduced,
            beta: 0.5 * (1.0 - k / kappa) * s * sd.e1 / sd.reduced,
        });
    }
    let [Some(p), Some(m)] = printed else { unreachable!() };
    let [Some(rp), Some(rm)] = referenced else { unreachable!() };

    Ok(ClaimedCoefficients {
        k,
        n,
        params: *params,
        wavenumbers,
        rotation,
        a_plus: p.a,
        a_minus: m.a,
        b_plus: p.b,
        b_minus: m.b,
        alpha_plus: p.alpha,
        alpha_minus: m.alpha,
        beta_plus: p.beta,
        beta_minus: m.beta,
        source,
        validity: Validity::for_params(params),
        referenced: [rp, rm],
    })
}

impl ClaimedCoefficients {
    /// Coefficients as printed.
    pub fn printed(&self, ch: Channel) -> ChannelCoefficients {
        match ch {
            Channel::Plus => ChannelCoefficients {
                a: self.a_plus,
                b: self.b_plus,
                alpha: self.alpha_plus,
                beta: self.beta_plus,
            },
            Channel::Minus => ChannelCoefficients {
                a: self.a_minus,
                b: self.b_minus,
                alpha: self.alpha_minus,
                beta: self.beta_minus,
            },
        }
    }

    /// Coefficients with `α`, `β`, `B` multiplied by `e^{ikL}`: the set that is
    /// continuous with left waves `e^{±ikz}`, interior `e^{±ik±z}` and
    /// transmitted `e^{ik(z−L)}`.
    pub fn continuous(&self, ch: Channel) -> ChannelCoefficients {
        let r = self.referenced(ch);
        let kappa = self.wavenumbers.k_channel(ch);
        let l = self.params.cavity_length();
        ChannelCoefficients {
            beta: r.beta * (Complex64::i() * kappa * l).exp(),
            ..r
        }
    }

    /// Like [`continuous`](Self::continuous) but with `β` multiplying
    /// `e^{−ik±(z−L)}`, which stays bounded for evanescent channels.
    pub fn referenced(&self, ch: Channel) -> ChannelCoefficients {
        match ch {
            Channel::Plus => self.referenced[0],
            Channel::Minus => self.referenced[1],
        }
    }

    /// Printed coefficients divided by their dressed source amplitude:
    /// `(A/s, B/s)`, i.e. unit-incidence reflection and transmission.
    pub fn unit_channel(&self, ch: Channel) -> (Complex64, Complex64) {
        let s = self.source.dressed(ch);
        let c = self.printed(ch);
        (c.a / s, c.b / s)
    }
}

/// Plane-wave terms of each dressed channel in one region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelTerms {
    pub plus: Vec<PlaneWave>,
    pub minus: Vec<PlaneWave>,
}

impl ChannelTerms {
    pub fn channel(&self, ch: Channel) -> &[PlaneWave] {
        match ch {
            Channel::Plus => &self.plus,
            Channel::Minus => &self.minus,
        }
    }
}

/// Plane-wave terms of the two bare components in one region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BareTerms {
    pub excited: Vec<PlaneWave>,
    pub ground: Vec<PlaneWave>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Left,
    Inside,
    Right,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::Left, Region::Inside, Region::Right];

    pub fn label(self) -> &'static str {
        match self {
            Region::Left => "left",
            Region::Inside => "inside",
            Region::Right => "right",
        }
    }
}

/// Piecewise plane-wave form of the published stationary state at fixed (k, n).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimedStationaryState {
    pub k: f64,
    pub n: u32,
    pub cavity_length: f64,
    pub rotation: DressedRotation,
    pub source: SourceConvention,
    pub validity: Validity,
    pub left: ChannelTerms,
    pub inside: ChannelTerms,
    pub right: ChannelTerms,
    #[serde(skip)]
    pub coefficients: ClaimedCoefficients,
}

pub fn assemble_claimed_state(k: f64, n: u32, params: &ModelParams) -> Result<ClaimedStationaryState> {
    let coefficients = claimed_coefficients(k, n, params)?;
    let length = params.cavity_length();
    let kc = Complex64::from(k);
    let build = |ch: Channel| {
        let c = coefficients.referenced(ch);
        let q = coefficients.wavenumbers.k_channel(ch);
        let s = coefficients.source.dressed(ch);
        (
            vec![PlaneWave::new(s.into(), kc, 0.0), PlaneWave::new(c.a, -kc, 0.0)],
            vec![PlaneWave::new(c.alpha, q, 0.0), PlaneWave::new(c.beta, -q, length)],
            vec![PlaneWave::new(c.b, kc, length)],
        )
    };
    let (lp, ip, rp) = build(Channel::Plus);
    let (lm, im, rm) = build(Channel::Minus);
    Ok(ClaimedStationaryState {
        k,
        n,
        cavity_length: length,
        rotation: coefficients.rotation,
        source: coefficients.source,
        validity: coefficients.validity,
        left: ChannelTerms { plus: lp, minus: lm },
        inside: ChannelTerms { plus: ip, minus: im },
        right: ChannelTerms { plus: rp, minus: rm },
        coefficients,
    })
}

impl ClaimedStationaryState {
    pub fn region(&self, region: Region) -> &ChannelTerms {
        match region {
            Region::Left => &self.left,
            Region::Inside => &self.inside,
            Region::Right => &self.right,
        }
    }

    pub fn region_of(&self, z: f64) -> Region {
        if z < 0.0 {
            Region::Left
        } else if z <= self.cavity_length {
            Region::Inside
        } else {
            Region::Right
        }
    }

    /// `(Ψ⁺(z), Ψ⁻(z))`
    pub fn eval_dressed(&self, z: f64) -> (Complex64, Complex64) {
        let r = self.region(self.region_of(z));
        (eval_sum(&r.plus, z), eval_sum(&r.minus, z))
    }

    /// `(ψ_e(z), ψ_g(z))`, projected with the sector's θ_n.
    pub fn eval_bare(&self, z: f64) -> (Complex64, Complex64) {
        let (p, m) = self.eval_dressed(z);
        self.rotation.unrotate(p, m)
    }

    /// Bare components per region obtained with the sector's θ_n.
    pub fn bare_view(&self, region: Region) -> BareTerms {
        let (s, c) = self.rotation.theta.sin_cos();
        self.combine(region, (s, c), (c, -s))
    }

    /// The published `|e,n⟩` and `|g,n+1⟩` lines: `(Ψ⁺ ± Ψ⁻)/√2`. Coincides
    /// with [`bare_view`](Self::bare_view) at resonance only.
    pub fn equation_lines(&self, region: Region) -> BareTerms {
        let p = self.source.prefactor;
        self.combine(region, (p, p), (p, -p))
    }

    fn combine(&self, region: Region, excited: (f64, f64), ground: (f64, f64)) -> BareTerms {
        let r = self.region(region);
        let mix = |w: (f64, f64)| {
            merge_terms(
                r.plus
                    .iter()
                    .map(|t| t.scaled(w.0.into()))
                    .chain(r.minus.iter().map(|t| t.scaled(w.1.into()))),
            )
        };
        BareTerms {
            excited: mix(excited),
            ground: mix(ground),
        }
    }

    /// Largest jump of value or derivative (derivative divided by k) across
    /// z = 0 and z = L, over both dressed channels.
    pub fn continuity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (z, a, b) in [
            (0.0, &self.left, &self.inside),
            (self.cavity_length, &self.inside, &self.right),
        ] {
            for ch in Channel::BOTH {
                let (ta, tb) = (a.channel(ch), b.channel(ch));
                worst = worst.max((eval_sum(ta, z) - eval_sum(tb, z)).norm());
                worst = worst.max((derivative_sum(ta, z) - derivative_sum(tb, z)).norm() / self.k);
            }
        }
        worst
    }

    /// Largest plane-wave coefficient of `−Ψ'' + V±Ψ − k²Ψ` in the decoupled
    /// single-channel problem. With `literal_exterior = false` the potential
    /// is the mesa `±Ω_n` the coefficients encode; with `true` the exterior
    /// uses `V± = ±|Δ|/2`, the value of the decoupled potential at f = 0.
    pub fn decoupled_defect(&self, literal_exterior: bool) -> f64 {
        let params = &self.coefficients.params;
        let big = params.big_omega(self.n);
        let e = self.k * self.k;
        let mut worst: f64 = 0.0;
        for region in Region::ALL {
            for ch in Channel::BOTH {
                let v = match region {
                    Region::Inside => ch.sign() * big,
                    _ if literal_exterior => ch.sign() * 0.5 * params.delta().abs(),
                    _ => 0.0,
                };
                for t in self.region(region).channel(ch) {
                    worst = worst.max(((t.q * t.q + v - e) * t.amp).norm());
                }
            }
        }
        worst
    }
}

/// Unit-incidence scattering in one decoupled channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelScattering {
    /// Amplitude of `e^{−ikz}` for z < 0.
    pub r: Complex64,
    /// Amplitude of `e^{ik(z−L)}` for z > L.
    pub t: Complex64,
    pub channel: Channel,
    pub evanescent: bool,
}

impl ChannelScattering {
    pub fn unitarity_defect(&self) -> f64 {
        (self.r.norm_sqr() + self.t.norm_sqr() - 1.0).abs()
    }
}

/// Mesa barrier or well of interior wavenumber `kappa`:
/// `r = iΥ sin(κL)/D`, `t = 1/D`, `D = cos(κL) − iδ sin(κL)`.
pub fn per_channel_scattering(k: f64, kappa: Complex64, length: f64, channel: Channel) -> Result<ChannelScattering> {
    if kappa == Complex64::new(0.0, 0.0) {
        return Err(MazerError::DegenerateThreshold {
            what: "interior wavenumber",
            k,
        });
    }
    let ups = 0.5 * (kappa / k - k / kappa);
    let del = 0.5 * (kappa / k + k / kappa);
    let sd = ScaledDenominator::new(kappa, del, length);
    let e2 = sd.e1 * sd.e1;
    Ok(ChannelScattering {
        r: ups * (e2 - 1.0) / (2.0 * sd.reduced),
        t: sd.e1 / sd.reduced,
        channel,
        evanescent: kappa.im > 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InteriorBranch {
    /// k±² = k² ∓ Ω_n
    Claimed,
    /// κ±² = k² + Δ/2 ∓ Ω_n
    True,
}

pub fn channel_scattering(
    k: f64,
    branch: InteriorBranch,
    channel: Channel,
    n: u32,
    params: &ModelParams,
) -> Result<ChannelScattering> {
    let kappa = match branch {
        InteriorBranch::Claimed => claimed_wavenumbers(k, n, params)?.k_channel(channel),
        InteriorBranch::True => crate::model::true_wavenumbers(k, n, params)?.kappa(channel),
    };
    per_channel_scattering(k, kappa, params.cavity_length(), channel)
}

/// Bare-channel probabilities of the resonant mazer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonantProbabilities {
    pub r_e: f64,
    pub r_g: f64,
    pub t_e: f64,
    pub t_g: f64,
}

impl ResonantProbabilities {
    pub fn emission(&self) -> f64 {
        self.r_g + self.t_g
    }

    pub fn total(&self) -> f64 {
        self.r_e + self.r_g + self.t_e + self.t_g
    }
}

/// Probabilities from the `(A₊ ± A₋)/√2`, `(B₊ ± B₋)/√2` combinations.
/// Only defined at exact resonance.
pub fn resonant_emission_probability(k: f64, n: u32, params: &ModelParams) -> Result<ResonantProbabilities> {
    if params.delta() != 0.0 {
        return Err(MazerError::OutOfValidity(format!(
            "closed-form probabilities require Δ = 0, got Δ = {}",
            params.delta()
        )));
    }
    let c = claimed_coefficients(k, n, params)?;
    let p = c.continuous(Channel::Plus);
    let m = c.continuous(Channel::Minus);
    let half = |x: Complex64| 0.5 * x.norm_sqr();
    Ok(ResonantProbabilities {
        r_e: half(p.a + m.a),
        r_g: half(p.a - m.a),
        t_e: half(p.b + m.b),
        t_g: half(p.b - m.b),
    })
}
