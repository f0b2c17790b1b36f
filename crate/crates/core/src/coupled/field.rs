use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, MazerError, Result};
use crate::model::{dressed_angle, Basis, ModeFunction, ModelParams};

/// Uniform grid on which z = 0 and z = L are nodes.
///
/// Node `j` sits at `(j − origin)·dz`; the cavity spans nodes
/// `origin..=origin + cavity_nodes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dz: f64,
    n_points: usize,
    origin: usize,
    cavity_nodes: usize,
}

impl Grid {
    pub const DEFAULT_DZ: f64 = 0.02;
    pub const DEFAULT_MARGIN: f64 = 60.0;

    /// Grid covering `[−margin_left, L + margin_right]`. The spacing is
    /// reduced from `dz` until L is an integer number of steps.
    pub fn for_cavity(cavity_length: f64, dz: f64, margin_left: f64, margin_right: f64) -> Result<Self> {
        if !(dz > 0.0) || !dz.is_finite() {
            return Err(invalid("dz", "grid spacing must be positive"));
        }
        if !(cavity_length > 0.0) {
            return Err(invalid("cavity_length", "must be positive"));
        }
        if !(margin_left >= 0.0) || !(margin_right >= 0.0) {
            return Err(invalid("grid", "margins must be non-negative"));
        }
        let cavity_nodes = (cavity_length / dz).ceil().max(1.0) as usize;
        let dz = cavity_length / cavity_nodes as f64;
        let left = (margin_left / dz).ceil() as usize;
        let right = (margin_right / dz).ceil() as usize;
        Ok(Self {
            dz,
            n_points: left + cavity_nodes + right + 1,
            origin: left,
            cavity_nodes,
        })
    }

    /// Default box `[−60, L + 60]` with dz ≈ 0.02.
    pub fn default_for(params: &ModelParams) -> Result<Self> {
        Self::for_cavity(params.cavity_length(), Self::DEFAULT_DZ, Self::DEFAULT_MARGIN, Self::DEFAULT_MARGIN)
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn z(&self, j: usize) -> f64 {
        (j as f64 - self.origin as f64) * self.dz
    }

    pub fn z_min(&self) -> f64 {
        self.z(0)
    }

    pub fn z_max(&self) -> f64 {
        self.z(self.n_points - 1)
    }

    pub fn cavity_start(&self) -> usize {
        self.origin
    }

    pub fn cavity_end(&self) -> usize {
        self.origin + self.cavity_nodes
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|j| self.z(j))
    }

    /// Mode function sampled on the nodes. The mesa is sampled by index so the
    /// edges land exactly on the cavity nodes.
    pub fn sample_mode(&self, mode: &ModeFunction) -> Vec<f64> {
        match mode {
            ModeFunction::Mesa { .. } => (0..self.n_points)
                .map(|j| {
                    if j > self.cavity_start() && j < self.cavity_end() {
                        1.0
                    } else if j == self.cavity_start() || j == self.cavity_end() {
                        0.5
                    } else {
                        0.0
                    }
                })
                .collect(),
            other => self.nodes().map(|z| other.eval(z)).collect(),
        }
    }
}

/// Two complex amplitude functions of one photon sector on a grid.
///
/// In the bare basis the components are `(ψ_e, ψ_g)`, in the dressed basis
/// `(Ψ⁺, Ψ⁻)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoChannelField {
    pub grid: Grid,
    pub first: Vec<Complex64>,
    pub second: Vec<Complex64>,
    pub basis: Basis,
    pub n: u32,
    pub time: f64,
}

impl TwoChannelField {
    pub fn zeros(grid: Grid, basis: Basis, n: u32) -> Self {
        let len = grid.len();
        Self {
            grid,
            first: vec![Complex64::new(0.0, 0.0); len],
            second: vec![Complex64::new(0.0, 0.0); len],
            basis,
            n,
            time: 0.0,
        }
    }

    pub fn norm(&self) -> f64 {
        let s: f64 = self
            .first
            .iter()
            .zip(&self.second)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .sum();
        s * self.grid.dz()
    }

    /// Same state expressed in `target` basis.
    pub fn to_basis(&self, target: Basis, params: &ModelParams) -> Self {
        if target == self.basis {
            return self.clone();
        }
        let rot = dressed_angle(self.n, params);
        let mut out = self.clone();
        out.basis = target;
        for j in 0..self.grid.len() {
            let (a, b) = (self.first[j], self.second[j]);
            let (x, y) = match target {
                Basis::Dressed => rot.rotate(a, b),
                Basis::Bare => rot.unrotate(a, b),
            };
            out.first[j] = x;
            out.second[j] = y;
        }
        out
    }

    /// Bare populations `(P_e, P_g)`.
    pub fn populations(&self, params: &ModelParams) -> (f64, f64) {
        let (pe, pg) = match self.basis {
            Basis::Bare => (sum_sq(&self.first), sum_sq(&self.second)),
            Basis::Dressed => {
                let b = self.to_basis(Basis::Bare, params);
                (sum_sq(&b.first), sum_sq(&b.second))
            }
        };
        (pe * self.grid.dz(), pg * self.grid.dz())
    }

    /// Bare populations split at `split`: `[[e_left, e_right], [g_left, g_right]]`.
    pub fn split_populations(&self, params: &ModelParams, split: f64) -> [[f64; 2]; 2] {
        let bare = self.to_basis(Basis::Bare, params);
        let mut out = [[0.0; 2]; 2];
        for (j, z) in self.grid.nodes().enumerate() {
            let side = usize::from(z >= split);
            out[0][side] += bare.first[j].norm_sqr();
            out[1][side] += bare.second[j].norm_sqr();
        }
        for row in &mut out {
            for v in row.iter_mut() {
                *v *= self.grid.dz();
            }
        }
        out
    }

    pub fn max_deviation(&self, other: &Self) -> f64 {
        self.first
            .iter()
            .zip(&other.first)
            .chain(self.second.iter().zip(&other.second))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest density among the `width` outermost nodes on either side.
    pub fn edge_density(&self, width: usize) -> f64 {
        let len = self.grid.len();
        let w = width.min(len);
        (0..w)
            .chain(len - w..len)
            .map(|j| self.first[j].norm_sqr() + self.second[j].norm_sqr())
            .fold(0.0, f64::max)
    }
}

fn sum_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

/// Gaussian packet incident from the left in the excited channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePacketSpec {
    pub k0: f64,
    /// Standard deviation of |φ(k)|².
    pub sigma_k: f64,
    pub z0: f64,
    pub n: u32,
}

impl WavePacketSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.k0 > 0.0) || !self.k0.is_finite() {
            return Err(MazerError::InvalidSpec(format!("k0 must be positive, got {}", self.k0)));
        }
        if !(self.sigma_k > 0.0) || !self.sigma_k.is_finite() {
            return Err(MazerError::InvalidSpec(format!("sigma_k must be positive, got {}", self.sigma_k)));
        }
        if !(self.z0 + 5.0 / self.sigma_k < 0.0) {
            return Err(MazerError::InvalidSpec(format!(
                "packet overlaps the cavity: z0 + 5/sigma_k = {} must be negative",
                self.z0 + 5.0 / self.sigma_k
            )));
        }
        Ok(())
    }

    /// Position-space standard deviation of |ψ|², 1/(2σ_k).
    pub fn sigma_z(&self) -> f64 {
        0.5 / self.sigma_k
    }

    fn envelope(&self, z: f64) -> f64 {
        let x = (z - self.z0) * self.sigma_k;
        (-x * x).exp()
    }
}

/// Relative Gaussian envelope allowed at the box edges.
pub const PACKET_EDGE_TOLERANCE: f64 = 1e-8;

/// `ψ_e ∝ exp(−σ_k²(z−z₀)² + ik₀z)·θ(−z)`, `ψ_g = 0`, unit norm.
pub fn init_wavepacket(spec: &WavePacketSpec, grid: &Grid, _params: &ModelParams) -> Result<TwoChannelField> {
    spec.validate()?;
    let edge = spec.envelope(grid.z_min()).max(spec.envelope(grid.z_max()));
    if edge >= PACKET_EDGE_TOLERANCE {
        return Err(MazerError::InvalidSpec(format!(
            "grid [{}, {}] too narrow: envelope at the boundary is {edge:.2e} of peak",
            grid.z_min(),
            grid.z_max()
        )));
    }
    let mut field = TwoChannelField::zeros(grid.clone(), Basis::Bare, spec.n);
    for (j, z) in grid.nodes().enumerate() {
        if z < 0.0 {
            field.first[j] = Complex64::from_polar(spec.envelope(z), spec.k0 * z);
        }
    }
    let norm = field.norm().sqrt();
    for v in &mut field.first {
        *v /= norm;
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_params;

    #[test]
    fn grid_snaps_cavity_edges() {
        let g = Grid::for_cavity(1.03, 0.02, 5.0, 5.0).unwrap();
        assert_eq!(g.z(g.cavity_start()), 0.0);
        assert!((g.z(g.cavity_end()) - 1.03).abs() < 1e-12);
        assert!(g.dz() <= 0.02);
        let f = g.sample_mode(&ModeFunction::mesa(1.03).unwrap());
        assert_eq!(f[g.cavity_start()], 0.5);
        assert_eq!(f[g.cavity_start() + 1], 1.0);
        assert_eq!(f[g.cavity_end() + 1], 0.0);
    }

    #[test]
    fn packet_is_normalized_and_validated() {
        let p = make_params(1.0, 0.0, 0.0, 1.0).unwrap();
        let spec = WavePacketSpec { k0: 2.0, sigma_k: 0.2, z0: -30.0, n: 0 };
        let g = Grid::for_cavity(1.0, 0.02, 60.0, 60.0).unwrap();
        let f = init_wavepacket(&spec, &g, &p).unwrap();
        assert!((f.norm() - 1.0).abs() < 1e-12);
        assert!(f.second.iter().all(|x| x.norm() == 0.0));

        let bad = WavePacketSpec { z0: -1.0 / 0.2, ..spec };
        assert!(matches!(init_wavepacket(&bad, &g, &p), Err(MazerError::InvalidSpec(_))));
        let narrow = Grid::for_cavity(1.0, 0.02, 32.0, 5.0).unwrap();
        assert!(matches!(init_wavepacket(&spec, &narrow, &p), Err(MazerError::InvalidSpec(_))));
    }
}
