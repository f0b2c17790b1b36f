//! Finite-difference boundary-value solve of the bare two-channel equations,
//! independent of the plane-wave matching code.
//!
//! The exterior is free on the grid, so its discrete solutions are exactly
//! `e^{±iqjh}` with `2 − 2cos(qh) = h²(E − V)`; that gives exact discrete
//! incoming/outgoing conditions one node outside the cavity. Two spacings
//! are combined by Richardson extrapolation.

use mazerlab::coupled::{flux_probabilities, stationary_scatter};
use mazerlab::model::make_params;
use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

type C = Complex64;

#[derive(Debug, Clone, Copy)]
struct Amplitudes {
    r_e: C,
    r_g: C,
    t_e: C,
    t_g: C,
    /// Discrete flux ratio v_g/v_e.
    ratio: f64,
}

impl Amplitudes {
    fn probabilities(&self) -> [f64; 4] {
        [
            self.r_e.norm_sqr(),
            self.ratio * self.r_g.norm_sqr(),
            self.t_e.norm_sqr(),
            self.ratio * self.t_g.norm_sqr(),
        ]
    }

    fn extrapolate(coarse: &Self, fine: &Self) -> Self {
        let x = |a: C, b: C| (4.0 * b - a) / 3.0;
        Self {
            r_e: x(coarse.r_e, fine.r_e),
            r_g: x(coarse.r_g, fine.r_g),
            t_e: x(coarse.t_e, fine.t_e),
            t_g: x(coarse.t_g, fine.t_g),
            ratio: (4.0 * fine.ratio - coarse.ratio) / 3.0,
        }
    }
}

/// Discrete wavenumber with Im q ≥ 0.
fn discrete_q(h: f64, kinetic: f64) -> C {
    let c = C::from(1.0 - 0.5 * h * h * kinetic);
    let q = c.acos() / h;
    if q.im < 0.0 {
        -q
    } else {
        q
    }
}

/// Bare e/g equations on nodes z_j = j·h, j = −1..=M+1, L = M·h; f = ½ on the
/// edge nodes.
fn relax(k: f64, n: u32, lambda: f64, delta: f64, length: f64, m: usize) -> Amplitudes {
    let h = length / m as f64;
    let energy = k * k + 0.5 * delta;
    let rabi = lambda * f64::from(n + 1).sqrt();
    let q_e = discrete_q(h, k * k);
    let q_g = discrete_q(h, k * k + delta);
    let i = C::i();
    let ph_e = (i * q_e * h).exp();
    let ph_g = (i * q_g * h).exp();
    let nodes = m + 3;
    let f_at = |j: usize| -> f64 {
        // node index j ↔ z-index j − 1
        let zi = j as isize - 1;
        if zi <= 0 || zi >= m as isize {
            if zi == 0 || zi == m as isize {
                0.5
            } else {
                0.0
            }
        } else {
            1.0
        }
    };
    let inv_h2 = 1.0 / (h * h);
    let off = Matrix2::from_diagonal(&Vector2::new(C::from(-inv_h2), C::from(-inv_h2)));
    let mut diag: Vec<Matrix2<C>> = (0..nodes)
        .map(|j| {
            let c = rabi * f_at(j);
            Matrix2::new(
                C::from(2.0 * inv_h2 + 0.5 * delta - energy),
                C::from(c),
                C::from(c),
                C::from(2.0 * inv_h2 - 0.5 * delta - energy),
            )
        })
        .collect();
    let mut rhs = vec![Vector2::<C>::zeros(); nodes];
    // left: ψ_{−2} = e^{iqh}ψ_{−1} + A(e^{−2iqh} − e^{0}) for the incident e-wave
    diag[0][(0, 0)] -= inv_h2 * ph_e;
    diag[0][(1, 1)] -= inv_h2 * ph_g;
    let incident = (i * q_e * (-2.0 * h)).exp() - C::from(1.0);
    rhs[0][0] += inv_h2 * incident;
    // right: ψ_{M+2} = e^{iqh}ψ_{M+1}
    diag[nodes - 1][(0, 0)] -= inv_h2 * ph_e;
    diag[nodes - 1][(1, 1)] -= inv_h2 * ph_g;

    // block Thomas
    let mut c_prime = vec![Matrix2::<C>::zeros(); nodes];
    let mut d_prime = vec![Vector2::<C>::zeros(); nodes];
    for j in 0..nodes {
        let (b, d) = if j == 0 {
            (diag[0], rhs[0])
        } else {
            (diag[j] - off * c_prime[j - 1], rhs[j] - off * d_prime[j - 1])
        };
        let inv = b.try_inverse().expect("block pivot");
        c_prime[j] = inv * off;
        d_prime[j] = inv * d;
    }
    let mut psi = vec![Vector2::<C>::zeros(); nodes];
    psi[nodes - 1] = d_prime[nodes - 1];
    for j in (0..nodes - 1).rev() {
        psi[j] = d_prime[j] - c_prime[j] * psi[j + 1];
    }

    // node 0 is z = −h: ψ = e^{iqz} + R e^{−iqz}
    let left = psi[0];
    let right = psi[nodes - 1];
    Amplitudes {
        r_e: (left[0] - (-i * q_e * h).exp()) * (-i * q_e * h).exp(),
        r_g: left[1] * (-i * q_g * h).exp(),
        t_e: right[0] / ph_e,
        t_g: right[1] / ph_g,
        ratio: (q_g.re * h).sin() / (q_e.re * h).sin(),
    }
}

fn oracle(m: usize) -> Amplitudes {
    let coarse = relax(1.0, 0, 1.0, 1.0, 2.0, m);
    let fine = relax(1.0, 0, 1.0, 1.0, 2.0, 2 * m);
    Amplitudes::extrapolate(&coarse, &fine)
}

// Extrapolated probabilities (R_e, R_g, T_e, T_g) at k = 1, n = 0, Δ = 1, λ = 1, L = 2.
const FROZEN: [f64; 4] = [0.0926597399955, 0.0655220277879, 0.349197104924, 0.492621127293];

#[test]
fn relaxation_matches_matching_solver() {
    let o = oracle(4000);
    let p = make_params(1.0, 1.0, 0.0, 2.0).unwrap();
    let sol = stationary_scatter(1.0, 0, &p).unwrap();
    let fp = flux_probabilities(&sol);
    let got = [fp.r_e, fp.r_g, fp.t_e, fp.t_g];
    let want = o.probabilities();
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
    for (a, b) in [(sol.r_e, o.r_e), (sol.r_g, o.r_g), (sol.t_e, o.t_e), (sol.t_g, o.t_g)] {
        assert!((a - b).norm() < 1e-8, "{a} vs {b}");
    }
    assert!((got.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    for (a, b) in got.iter().zip(&FROZEN) {
        assert!((a - b).abs() < 1e-9, "{a} vs frozen {b}");
    }
}

#[test]
fn relaxation_is_second_order() {
    let e = |m| {
        let a = relax(1.0, 0, 1.0, 1.0, 2.0, m).probabilities();
        let b = oracle(4000).probabilities();
        a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    };
    let ratio = e(200) / e(400);
    assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
}
