// SPDX-License-Identifier: MIT OR Apache-2.0

//! The `N`-dimensional phase algebra: `Phase R`, `Phase S`, `Phase T`, their
//! eigenbases `e_k`, `f_l`, `g_m` and the overlaps between them.

use nalgebra::{DMatrix, DVector};

use crate::domain::{GroupParams, C64};
use crate::error::Result;
use crate::gauss::phase_chirp_sum;
use crate::report::ResidualReport;

pub type PhaseMatrix = DMatrix<C64>;
pub type PhaseVector = DVector<C64>;

/// `diag(1, q, …, q^{N-1})`.
pub fn phase_r(p: &GroupParams) -> PhaseMatrix {
    let n = p.n();
    DMatrix::from_fn(n, n, |i, j| if i == j { p.q_pow(i as i64) } else { C64::new(0.0, 0.0) })
}

/// The cyclic shift with ones on the superdiagonal and in the lower-left
/// corner, so `(Phase S v)_k = v_{k+1 mod N}`.
pub fn phase_s(p: &GroupParams) -> PhaseMatrix {
    let n = p.n();
    DMatrix::from_fn(n, n, |i, j| {
        if j == (i + 1) % n {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `q^{-1/2} (Phase S)* (Phase R)` with `q^{1/2} = e^{iπ/N}`.
pub fn phase_t(p: &GroupParams) -> PhaseMatrix {
    (phase_s(p).adjoint() * phase_r(p)) * p.half_q_pow(-1)
}

/// `(f_l)_j = q^{jl} / √N`.
pub fn f_vector(l: usize, p: &GroupParams) -> PhaseVector {
    let n = p.n();
    let s = 1.0 / (n as f64).sqrt();
    DVector::from_fn(n, |j, _| p.q_pow((j * l) as i64) * s)
}

/// `(g_m)_j = q^{(j² - 2j(m+1))/2} / √N`.
pub fn g_vector(m: usize, p: &GroupParams) -> PhaseVector {
    let n = p.n();
    let s = 1.0 / (n as f64).sqrt();
    DVector::from_fn(n, |j, _| {
        let j = j as i64;
        p.half_q_pow(j * j - 2 * j * (m as i64 + 1)) * s
    })
}

pub fn e_vector(k: usize, p: &GroupParams) -> PhaseVector {
    let mut v = DVector::from_element(p.n(), C64::new(0.0, 0.0));
    v[k] = C64::new(1.0, 0.0);
    v
}

/// The three orthonormal families.
#[derive(Debug, Clone)]
pub struct Bases {
    pub e: Vec<PhaseVector>,
    pub f: Vec<PhaseVector>,
    pub g: Vec<PhaseVector>,
}

pub fn basis_vectors(p: &GroupParams) -> Bases {
    let n = p.n();
    Bases {
        e: (0..n).map(|k| e_vector(k, p)).collect(),
        f: (0..n).map(|l| f_vector(l, p)).collect(),
        g: (0..n).map(|m| g_vector(m, p)).collect(),
    }
}

/// Matrix whose columns are the given vectors.
pub fn columns(vs: &[PhaseVector]) -> PhaseMatrix {
    let n = vs.len();
    DMatrix::from_fn(vs[0].len(), n, |i, j| vs[j][i])
}

/// Largest entry of `|A - B|`.
pub fn max_abs_diff(a: &PhaseMatrix, b: &PhaseMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest modulus among the entries of `v`.
pub fn max_abs(v: &PhaseVector) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn gram_residual(vs: &[PhaseVector]) -> f64 {
    let w = columns(vs);
    let n = w.ncols();
    max_abs_diff(&(w.adjoint() * &w), &DMatrix::identity(n, n))
}

/// Entrywise overlap identities, Gram matrices, Weyl relation and
/// eigen-relations of the phase matrices.
pub fn overlap_identities_report(p: &GroupParams) -> Result<ResidualReport> {
    let n = p.n();
    let b = basis_vectors(p);
    let sqrt_n = (n as f64).sqrt();
    let mut report = ResidualReport::new("overlaps");
    report.meta.n = n;

    let mut ef: f64 = 0.0;
    let mut eg: f64 = 0.0;
    for k in 0..n {
        for l in 0..n {
            let got = b.e[k].dotc(&b.f[l]);
            ef = ef.max((got - p.q_pow((k * l) as i64) / sqrt_n).norm());
            let ki = k as i64;
            let want = p.half_q_pow(ki * ki - 2 * ki * (l as i64 + 1)) / sqrt_n;
            eg = eg.max((b.e[k].dotc(&b.g[l]) - want).norm());
        }
    }
    report.insert("ek_fl", ef);
    report.insert("ek_gm", eg);

    // ∑_p q^{p(m+n+1-p/2)} = √N e^{-iπ/4} e^{iπ(m+n+1)²/N}
    let mut chirp: f64 = 0.0;
    for m in 0..n {
        for l in 0..n {
            let alpha = (m + l + 1) as i64;
            let direct: C64 = (0..n as i64).map(|j| p.half_q_pow(2 * j * alpha - j * j)).sum();
            let (_, closed) = phase_chirp_sum(alpha, n)?;
            chirp = chirp.max((direct - closed).norm());
        }
    }
    report.insert("chirp_sum", chirp);
    // |⟨f_l|g_m⟩| is the same for every pair
    let mut fg_modulus: f64 = 0.0;
    for l in 0..n {
        for m in 0..n {
            fg_modulus = fg_modulus.max((b.f[l].dotc(&b.g[m]).norm() - 1.0 / sqrt_n).abs());
        }
    }
    report.insert("fg_modulus", fg_modulus);

    report.insert("gram_e", gram_residual(&b.e));
    report.insert("gram_f", gram_residual(&b.f));
    report.insert("gram_g", gram_residual(&b.g));

    let (r, s, t) = (phase_r(p), phase_s(p), phase_t(p));
    report.insert("weyl_relation", max_abs_diff(&(&s * &r), &(&r * &s * p.q())));
    let mut f_eigen: f64 = 0.0;
    let mut g_eigen: f64 = 0.0;
    for j in 0..n {
        let fl = &b.f[j];
        f_eigen = f_eigen.max(max_abs(&(&s * fl - fl * p.q_pow(j as i64))));
        let gm = &b.g[j];
        g_eigen = g_eigen.max(max_abs(&(&t * gm - gm * p.q_pow(j as i64))));
    }
    report.insert("s_eigen_f", f_eigen);
    report.insert("t_eigen_g", g_eigen);
    Ok(report)
}
