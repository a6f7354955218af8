// SPDX-License-Identifier: MIT OR Apache-2.0

//! Reference computations that share no code with the library routines they
//! check: fixed-step quadrature, explicit products and explicit dense
//! matrices built entry by entry.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use qexp_core::{LatticeSpec, C64};

/// `f_o(z)` by the composite trapezoid rule in `u = ln a` on `[-50, 40]`
/// with step `2e-3`. The integrand is analytic in a strip around the real
/// axis, so the fixed-step rule converges geometrically.
pub fn fo_oracle(z: C64, n: usize) -> C64 {
    let step = 2e-3;
    let (lo, hi) = (-50.0_f64, 40.0_f64);
    let count = ((hi - lo) / step).round() as usize;
    let w = z.inv();
    let half_n = n as f64 / 2.0;
    let g = |u: f64| {
        let ea = u.exp();
        let l = (1.0 + (-half_n * u).exp()).ln();
        let l = if l.is_finite() { l } else { -half_n * u };
        l * ea / (ea + w)
    };
    let mut sum = 0.5 * (g(lo) + g(hi));
    for i in 1..count {
        sum += g(lo + i as f64 * step);
    }
    (sum * step / C64::new(0.0, PI)).exp()
}

/// `F_N(q^k r)` from the parity-branched product with every factor kept,
/// including the `q^{2s} = -1` factor, and `f_o` from [`fo_oracle`].
pub fn fn_oracle(k: usize, r: f64, n: usize) -> C64 {
    let q = |e: i64| C64::from_polar(1.0, 2.0 * PI * e as f64 / n as f64);
    let one = C64::new(1.0, 0.0);
    if k % 2 == 0 {
        let mut prod = one;
        for s in 1..=(k / 2) as i64 {
            prod *= (one + q(2 * s) * r) / (one + q(-2 * s) * r);
        }
        prod * fo_oracle(q(1) * r, n) / (1.0 + r)
    } else {
        let mut prod = one;
        for s in 0..=((k - 1) / 2) as i64 {
            prod *= (one + q(2 * s + 1) * r) / (one + q(-2 * s - 1) * r);
        }
        prod * fo_oracle(C64::new(r, 0.0), n)
    }
}

/// Discrete radial momentum of bin `b` on the period `L`.
fn momentum(spec: &LatticeSpec, b: usize) -> f64 {
    let m = spec.m as i64;
    let f = if (b as i64) < m / 2 { b as i64 } else { b as i64 - m };
    2.0 * PI * f as f64 / (spec.m as f64 * spec.h)
}

/// Kronecker product with the phase index outermost.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    DMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// `Σ_b |φ_b⟩ sym(p_b) ⟨φ_b|` with plane waves `φ_b(x_j) = e^{2πi jb/M}/√M`.
pub fn radial_momentum_matrix(spec: &LatticeSpec, sym: impl Fn(f64) -> C64) -> DMatrix<C64> {
    let m = spec.m;
    let s: Vec<C64> = (0..m).map(|b| sym(momentum(spec, b))).collect();
    DMatrix::from_fn(m, m, |j, jp| {
        let mut acc = C64::new(0.0, 0.0);
        for (b, sb) in s.iter().enumerate() {
            let ph = 2.0 * PI * ((j as i64 - jp as i64) * b as i64) as f64 / m as f64;
            acc += sb * C64::from_polar(1.0, ph);
        }
        acc / m as f64
    })
}

/// `R` entry by entry: `q^k e^{x_j}` on the diagonal.
pub fn dense_r(spec: &LatticeSpec) -> DMatrix<C64> {
    let (n, m) = (spec.n(), spec.m);
    DMatrix::from_fn(n * m, n * m, |i, j| {
        if i != j {
            return C64::new(0.0, 0.0);
        }
        let (k, jj) = (i / m, i % m);
        C64::from_polar((spec.x0 + jj as f64 * spec.h).exp(), 2.0 * PI * k as f64 / n as f64)
    })
}

/// The cyclic shift `e_k ↦ e_{k-1}` on the phase index.
pub fn cyclic_shift(n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |a, b| {
        if b == (a + 1) % n {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `S = (cyclic shift) ⊗ e^{-ℏP}` entry by entry.
pub fn dense_s(spec: &LatticeSpec) -> DMatrix<C64> {
    let hbar = 2.0 * PI / spec.n() as f64;
    kron(
        &cyclic_shift(spec.n()),
        &radial_momentum_matrix(spec, |p| C64::new((-hbar * p).exp(), 0.0)),
    )
}

/// `max_ij |a_ij|`.
pub fn max_abs(a: &DMatrix<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Dense matrix-vector product on raw lattice data.
pub fn mat_vec(a: &DMatrix<C64>, v: &[C64]) -> Vec<C64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * v[j]).sum())
        .collect()
}

pub fn l2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn l2_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}
