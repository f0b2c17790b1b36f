//! Plane-wave sums `Σ c_j e^{i q_j (z − z_j)}` and the few operations the
//! analytic and verification layers need on them.

use num_complex::Complex64;
use serde::Serialize;

/// `amp · e^{i q (z − z_ref)}`
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaneWave {
    pub amp: Complex64,
    pub q: Complex64,
    pub z_ref: f64,
}

impl PlaneWave {
    pub fn new(amp: Complex64, q: Complex64, z_ref: f64) -> Self {
        Self { amp, q, z_ref }
    }

    pub fn eval(&self, z: f64) -> Complex64 {
        self.amp * (Complex64::i() * self.q * (z - self.z_ref)).exp()
    }

    pub fn derivative(&self, z: f64) -> Complex64 {
        Complex64::i() * self.q * self.eval(z)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            amp: self.amp * factor,
            ..*self
        }
    }
}

pub fn eval_sum(terms: &[PlaneWave], z: f64) -> Complex64 {
    terms.iter().map(|t| t.eval(z)).sum()
}

pub fn derivative_sum(terms: &[PlaneWave], z: f64) -> Complex64 {
    terms.iter().map(|t| t.derivative(z)).sum()
}

/// Merge terms sharing wavenumber and reference point; drop exact zeros.
pub fn merge_terms(terms: impl IntoIterator<Item = PlaneWave>) -> Vec<PlaneWave> {
    let mut out: Vec<PlaneWave> = Vec::new();
    for t in terms {
        if let Some(m) = out.iter_mut().find(|m| m.q == t.q && m.z_ref == t.z_ref) {
            m.amp += t.amp;
        } else {
            out.push(t);
        }
    }
    out.retain(|t| t.amp != Complex64::new(0.0, 0.0));
    out
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let n = order;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// L2 norm of a plane-wave sum over `[a, b]`, by composite Gauss–Legendre
/// quadrature with panels resolving the fastest oscillation or decay.
pub fn l2_norm(terms: &[PlaneWave], a: f64, b: f64) -> f64 {
    if terms.is_empty() || b <= a {
        return 0.0;
    }
    let qmax = terms.iter().map(|t| t.q.re.abs() + t.q.im.abs()).fold(0.0, f64::max);
    let panels = (((b - a) * (qmax + 1.0)).ceil() as usize).clamp(1, 100_000);
    let rule = gauss_legendre(12);
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for &(x, w) in &rule {
            acc += w * 0.5 * h * eval_sum(terms, mid + 0.5 * h * x).norm_sqr();
        }
    }
    acc.sqrt()
}
