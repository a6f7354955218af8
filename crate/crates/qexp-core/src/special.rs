// SPDX-License-Identifier: MIT OR Apache-2.0

//! The building block `f_o` and the quantum exponential function `F_N`.
//!
//! `f_o(z) = exp{(1/πi) ∫₀^∞ log(1 + a^{-N/2}) da / (a + z^{-1})}` is evaluated
//! after the substitution `a = e^u`, which turns the integrand into
//! `log(1 + e^{-Nu/2}) · e^u / (e^u + z^{-1})`. It decays like `e^{-Nu/2}` on
//! the right and like `|u| e^u |z|` on the left, so the line can be truncated
//! with explicit tail bounds.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::domain::{classify_complex, GammaPoint, GroupParams, Region, C64, CLASSIFY_TOL};
use crate::error::{QexpError, Result};
use crate::quadrature::{integrate, QuadratureSpec};

/// Above this log-modulus `F_N` is evaluated through the reflection
/// `t ↦ 1/t` of [`conj_identity_rhs`]; the direct integral grows like `x²`
/// there and loses phase accuracy.
pub const REFLECT_ABOVE_X: f64 = 8.0;

/// Below this modulus `F_N(z) - 1` is under one ulp and `1` is returned.
const TINY_MODULUS: f64 = 1e-40;

fn require_group(p: &GroupParams) -> Result<()> {
    if p.n() < 6 || p.n() % 2 != 0 {
        return Err(QexpError::InvalidParameter(format!(
            "F_N needs even N >= 6, got {}",
            p.n()
        )));
    }
    Ok(())
}

/// `log(1 + e^{-s u})` without overflow for either sign of `u`.
fn log1p_exp_neg(s: f64, u: f64) -> f64 {
    let t = s * u;
    if t >= 0.0 {
        (-t).exp().ln_1p()
    } else {
        -t + t.exp().ln_1p()
    }
}

/// Lower bound of `|1 + c|` over `c` on the ray with argument `theta`.
fn ray_gap(theta: f64) -> f64 {
    if theta.cos() >= 0.0 {
        1.0
    } else {
        theta.sin().abs()
    }
}

/// Truncation window `[lo, hi]` for the `u`-integral with tails below `eps`.
fn window(n: f64, z: C64, eps: f64) -> (f64, f64) {
    let beta = ray_gap(z.arg());
    // right tail: ∫_U^∞ e^{-nu/2}/β du = 2 e^{-nU/2}/(nβ)
    let hi = ((2.0 / (n * beta * eps)).ln() * 2.0 / n).max(1.0);
    // left tail: |z|/β ∫_{-∞}^{-U} ((n/2)|u| + ln 2) e^u du
    //          = |z|/β · e^{-U} ((n/2)(U + 1) + ln 2)
    let scale = z.norm() / beta;
    let mut u = 1.0_f64;
    for _ in 0..8 {
        u = ((scale * (0.5 * n * (u.max(0.0) + 1.0) + LN_2)) / eps).ln();
    }
    let lo = (-u).min(hi - 1.0);
    (lo, hi)
}

/// `∫ log(1+a^{-N/2}) da/(a + z^{-1})` over `(0, ∞)`.
fn fo_exponent(z: C64, p: &GroupParams, quad: &QuadratureSpec) -> Result<C64> {
    let n = p.n() as f64;
    let w = z.inv();
    let (lo, hi) = window(n, z, 0.1 * quad.abs_tol);
    let s = 0.5 * n;
    let integrand = |u: f64| {
        let eu = u.exp();
        let v = log1p_exp_neg(s, u);
        v * eu / (eu + w)
    };
    Ok(integrate(integrand, lo, hi, quad)?.value)
}

/// `f_o(z)` on `ℂ ∖ (ℝ₋ ∪ {0})`.
pub fn f_o(z: C64, p: &GroupParams, quad: &QuadratureSpec) -> Result<C64> {
    quad.validate()?;
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(QexpError::Domain(format!("f_o argument {z} is not finite")));
    }
    if z.norm() == 0.0 || (z.im == 0.0 && z.re < 0.0) {
        return Err(QexpError::Domain(format!(
            "f_o argument {z} lies on the cut ℝ₋ ∪ {{0}}"
        )));
    }
    if z.norm() < TINY_MODULUS {
        return Ok(C64::new(1.0, 0.0));
    }
    let i = fo_exponent(z, p, quad)?;
    Ok((i / C64::new(0.0, PI)).exp())
}

/// Product part of `F_N(q^k r)`: the factors `(1+q^e r)/(1+q^{-e} r)` for
/// `e = 2s` (even `k`, `s = 1..k/2`) or `e = 2s+1` (odd `k`, `s = 0..(k-1)/2`).
/// A factor with `q^e = -1` is `(1-r)/(1-r)` and is dropped.
fn parity_product(k: usize, r: f64, p: &GroupParams) -> C64 {
    let n = p.n();
    let exps: Vec<usize> = if k % 2 == 0 {
        (1..=k / 2).map(|s| 2 * s).collect()
    } else {
        (0..=(k - 1) / 2).map(|s| 2 * s + 1).collect()
    };
    let mut prod = C64::new(1.0, 0.0);
    for e in exps {
        if e % n == n / 2 {
            continue;
        }
        let a = C64::new(1.0, 0.0) + p.q_pow(e as i64) * r;
        let b = C64::new(1.0, 0.0) + p.q_pow(-(e as i64)) * r;
        prod *= a / b;
    }
    prod
}

/// `F_N(q^k e^x)` from the product formula, without using the reflection.
pub fn fn_direct(z: GammaPoint, p: &GroupParams, quad: &QuadratureSpec) -> Result<C64> {
    require_group(p)?;
    let GammaPoint::Ray { k, x } = z else {
        return Ok(C64::new(1.0, 0.0));
    };
    if !x.is_finite() {
        return Err(QexpError::Domain(format!("log-modulus {x} is not finite")));
    }
    let r = x.exp();
    if r < TINY_MODULUS {
        return Ok(C64::new(1.0, 0.0));
    }
    let prod = parity_product(k, r, p);
    if k % 2 == 0 {
        let arg = p.q() * r;
        debug_assert!(!matches!(
            classify_complex(arg, p, CLASSIFY_TOL),
            Region::Ray(k) if k == p.n() / 2
        ));
        Ok(prod * f_o(arg, p, quad)? / (1.0 + r))
    } else {
        Ok(prod * f_o(C64::new(r, 0.0), p, quad)?)
    }
}

/// The phase `e^{iπ/6 (2/N + N/2)} e^{-iπ(m+1)²/N} e^{i log²t/(2ℏ)}` relating
/// `conj F_N(q^m t)` to `F_N(q^{-m-2} t^{-1})`.
pub fn conj_identity_phase(m: usize, log_t: f64, p: &GroupParams) -> C64 {
    let n = p.n() as f64;
    let c = PI / 6.0 * (2.0 / n + n / 2.0);
    let mm = ((m + 1) * (m + 1)) % (2 * p.n());
    let quad_phase = -PI * mm as f64 / n;
    let chirp = log_t * log_t / (2.0 * p.hbar());
    C64::from_polar(1.0, c + quad_phase) * C64::from_polar(1.0, chirp)
}

/// Right-hand side `phase · F_N(q^{-m-2} t^{-1})` evaluated directly.
pub fn conj_identity_rhs(m: usize, log_t: f64, p: &GroupParams, quad: &QuadratureSpec) -> Result<C64> {
    let reflected = p.point(-(m as i64) - 2, -log_t);
    Ok(conj_identity_phase(m, log_t, p) * fn_direct(reflected, p, quad)?)
}

/// `F_N(z)` for `z ∈ Γ̄`. Exactly `1` at zero.
pub fn fn_eval(z: GammaPoint, p: &GroupParams, quad: &QuadratureSpec) -> Result<C64> {
    require_group(p)?;
    match z {
        GammaPoint::Zero => Ok(C64::new(1.0, 0.0)),
        GammaPoint::Ray { k, x } if x > REFLECT_ABOVE_X => Ok(conj_identity_rhs(k, x, p, quad)?.conj()),
        _ => fn_direct(z, p, quad),
    }
}

/// `F_N(γ z)`; identically `1` when `γ = 0`.
pub fn fn_scaled(gamma: GammaPoint, z: GammaPoint, p: &GroupParams, quad: &QuadratureSpec) -> Result<C64> {
    fn_eval(p.gamma_mul(gamma, z), p, quad)
}

/// Closed form `F_N'(q^k r)|_{r=0} = (q^{k+1} + q^{-k-1}) / (2i sin ℏ)`, the
/// derivative in `r` along the ray `Γ_k`.
pub fn derivative_at_zero(k: usize, p: &GroupParams) -> C64 {
    let num = p.q_pow(k as i64 + 1) + p.q_pow(-(k as i64) - 1);
    num / C64::new(0.0, 2.0 * p.hbar().sin())
}

/// Central difference `(F_N(q^k ε) - F_N(-q^k ε)) / 2ε` through the opposite
/// ray `-q^k = q^{k+N/2}`.
pub fn derivative_fd(k: usize, eps: f64, p: &GroupParams, quad: &QuadratureSpec) -> Result<C64> {
    let plus = fn_eval(p.point(k as i64, eps.ln()), p, quad)?;
    let minus = fn_eval(p.point((k + p.n() / 2) as i64, eps.ln()), p, quad)?;
    Ok((plus - minus) / (2.0 * eps))
}

/// Relative error of [`derivative_fd`] against [`derivative_at_zero`]. The
/// closed form vanishes when `2(k+1) ≡ N/2 mod N`, so the scale is floored at
/// `1/(2 sin ℏ)`, the modulus of a single `q`-power term.
pub fn derivative_relative_error(k: usize, eps: f64, p: &GroupParams, quad: &QuadratureSpec) -> Result<f64> {
    let cf = derivative_at_zero(k, p);
    let fd = derivative_fd(k, eps, p, quad)?;
    let scale = cf.norm().max(0.5 / p.hbar().sin());
    Ok((fd - cf).norm() / scale)
}

/// The remainder `r(λt)` of the first-order expansion of `F_N` around zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRemainder {
    pub lambda: f64,
    pub t: GammaPoint,
    pub value: C64,
}

/// First-order term `(λ/(2i sin ℏ))(q t + q̄ t̄)`.
pub fn linear_term(lambda: f64, t: GammaPoint, p: &GroupParams) -> C64 {
    let tc = p.to_complex(t);
    let q = p.q();
    lambda * (q * tc + q.conj() * tc.conj()) / C64::new(0.0, 2.0 * p.hbar().sin())
}

/// `r(λt) = (F_N(λt) - 1 - linear_term) / (λ|t|)`.
pub fn expansion_remainder(
    lambda: f64,
    t: GammaPoint,
    p: &GroupParams,
    quad: &QuadratureSpec,
) -> Result<ExpansionRemainder> {
    if !(lambda > 0.0) {
        return Err(QexpError::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let GammaPoint::Ray { k, x } = t else {
        return Err(QexpError::Domain("t must be non-zero".into()));
    };
    let scaled = GammaPoint::Ray { k, x: x + lambda.ln() };
    let f = fn_eval(scaled, p, quad)?;
    let value = (f - 1.0 - linear_term(lambda, t, p)) / (lambda * x.exp());
    Ok(ExpansionRemainder { lambda, t, value })
}

/// The fixed λ-grid used to estimate the remainder bound: 37 points
/// log-spaced over `[1e-6, 1e3]`.
pub fn remainder_lambda_grid() -> Vec<f64> {
    (0..37).map(|i| 10f64.powf(-6.0 + 0.25 * i as f64)).collect()
}

/// Empirical remainder bound `M̂ = 1.5 · max |r(λt)|` over the λ-grid, for
/// the ray of `t`. Returns `(M̂, remainders)`.
pub fn remainder_bound(
    t: GammaPoint,
    p: &GroupParams,
    quad: &QuadratureSpec,
) -> Result<(f64, Vec<ExpansionRemainder>)> {
    let rs = remainder_lambda_grid()
        .into_iter()
        .map(|l| expansion_remainder(l, t, p, quad))
        .collect::<Result<Vec<_>>>()?;
    let max = rs.iter().map(|r| r.value.norm()).fold(0.0, f64::max);
    Ok((1.5 * max, rs))
}

/// `|conj F_N(q^m t) - phase · F_N(q^{-m-2} t^{-1})|` with both sides from
/// the direct product formula.
pub fn conj_identity_residual(m: usize, t: f64, p: &GroupParams, quad: &QuadratureSpec) -> Result<f64> {
    if m >= p.n() {
        return Err(QexpError::InvalidParameter(format!("m must be below N, got {m}")));
    }
    if !(t > 0.0) {
        return Err(QexpError::InvalidParameter(format!("t must be positive, got {t}")));
    }
    let lhs = fn_direct(p.point(m as i64, t.ln()), p, quad)?.conj();
    let rhs = conj_identity_rhs(m, t.ln(), p, quad)?;
    Ok((lhs - rhs).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p6() -> GroupParams {
        GroupParams::new(6).unwrap()
    }

    #[test]
    fn zero_maps_to_one() {
        let q = QuadratureSpec::default();
        assert_eq!(fn_eval(GammaPoint::Zero, &p6(), &q).unwrap(), C64::new(1.0, 0.0));
    }

    #[test]
    fn fo_cut_is_rejected() {
        let q = QuadratureSpec::default();
        assert!(matches!(f_o(C64::new(-2.0, 0.0), &p6(), &q), Err(QexpError::Domain(_))));
        assert!(matches!(f_o(C64::new(0.0, 0.0), &p6(), &q), Err(QexpError::Domain(_))));
    }

    #[test]
    fn derivative_closed_form_n6_k0() {
        let d = derivative_at_zero(0, &p6());
        assert!(d.re.abs() < 1e-15);
        assert!((d.im + 0.577_350_269_189_625_8).abs() < 1e-12);
    }

    #[test]
    fn derivative_is_imaginary() {
        for n in [6, 8, 10] {
            let p = GroupParams::new(n).unwrap();
            for k in 0..n {
                assert!(derivative_at_zero(k, &p).re.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn reflection_matches_direct_near_threshold() {
        let p = p6();
        let q = QuadratureSpec::default();
        for k in 0..6 {
            let z = p.point(k, REFLECT_ABOVE_X + 0.5);
            let a = fn_direct(z, &p, &q).unwrap();
            let b = conj_identity_rhs(k as usize, REFLECT_ABOVE_X + 0.5, &p, &q)
                .unwrap()
                .conj();
            assert!((a - b).norm() < 1e-7, "k={k} {a} {b}");
        }
    }

    #[test]
    fn expansion_rearrangement_is_exact() {
        let p = p6();
        let q = QuadratureSpec::default();
        let t = p.point(2, 0.4);
        for lambda in [1e-3, 0.5, 20.0] {
            let r = expansion_remainder(lambda, t, &p, &q).unwrap();
            let rebuilt = 1.0 + linear_term(lambda, t, &p) + r.value * lambda * 0.4f64.exp();
            let direct = fn_eval(p.point(2, 0.4 + lambda.ln()), &p, &q).unwrap();
            assert!((rebuilt - direct).norm() < 1e-12);
        }
    }
}
