// SPDX-License-Identifier: MIT OR Apache-2.0

//! Quadratic Gauss sums `S_N = ∑_p e^{iπp²/N}`, the chirp phase sums of the
//! finite Weyl algebra, the Fresnel integral and the rectangle contour used
//! to evaluate `S_N` with the residue theorem.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::domain::C64;
use crate::error::{QexpError, Result};
use crate::quadrature::{integrate, integrate_with_breaks, QuadratureSpec};

fn require_even(n: usize) -> Result<()> {
    if n < 2 || n % 2 != 0 {
        return Err(QexpError::InvalidParameter(format!(
            "Gauss sums need even N >= 2, got {n}"
        )));
    }
    Ok(())
}

/// `e^{iπ a / N}` with `a` reduced modulo `2N` first.
fn half_turn_phase(a: i128, n: usize) -> C64 {
    let two_n = 2 * n as i128;
    let r = a.rem_euclid(two_n);
    C64::from_polar(1.0, PI * r as f64 / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussSumResult {
    pub n: usize,
    pub direct: C64,
    pub closed: C64,
    pub residual: f64,
}

/// Direct summation of `∑_{p=0}^{N-1} e^{iπp²/N}` against `√N e^{iπ/4}`.
pub fn gauss_sum(n: usize) -> Result<GaussSumResult> {
    require_even(n)?;
    let direct: C64 = (0..n as i128).map(|p| half_turn_phase(p * p, n)).sum();
    let closed = C64::from_polar((n as f64).sqrt(), PI / 4.0);
    Ok(GaussSumResult {
        n,
        direct,
        closed,
        residual: (direct - closed).norm(),
    })
}

/// `∑_{p=0}^{N-1} e^{(2πi/N) p(α - p/2)}` and its closed form
/// `√N e^{iπα²/N} e^{-iπ/4}`, returned as `(direct, closed)`.
pub fn phase_chirp_sum(alpha: i64, n: usize) -> Result<(C64, C64)> {
    require_even(n)?;
    let a = alpha as i128;
    // (2πi/N) p(α - p/2) = (iπ/N)(2pα - p²)
    let direct: C64 = (0..n as i128).map(|p| half_turn_phase(2 * p * a - p * p, n)).sum();
    let closed = (n as f64).sqrt() * half_turn_phase(a * a, n) * C64::from_polar(1.0, -PI / 4.0);
    Ok((direct, closed))
}

/// Outcome of the Fresnel integral check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FresnelCheck {
    /// Extrapolated value of `∫_{-∞}^{∞} e^{-iy²} dy`.
    pub value: C64,
    /// The value `(√π / (2√2 i))(i + 1)` that the Gauss-sum derivation yields.
    pub stated_target: C64,
    /// `√π e^{-iπ/4}`, the classical value.
    pub classical: C64,
    /// `|value - stated_target|`.
    pub residual: f64,
    /// `|value - classical|`.
    pub residual_classical: f64,
    /// Damping parameters used for the extrapolation.
    pub nodes: Vec<f64>,
}

/// Damped integral `∫ e^{-(ε+i) y²} dy`, integrated panel by panel with one
/// oscillation per panel on `[0, Y]` and doubled by symmetry.
fn damped_fresnel(eps: f64, quad: &QuadratureSpec) -> Result<C64> {
    let y_max = (40.0 / eps).sqrt();
    let turns = (y_max * y_max / (2.0 * PI)).ceil() as usize;
    let mut breaks: Vec<f64> = (0..=turns).map(|j| (2.0 * PI * j as f64).sqrt()).collect();
    if let Some(last) = breaks.last_mut() {
        *last = y_max;
    }
    let a = C64::new(eps, 1.0);
    let r = integrate_with_breaks(|y| (-a * y * y).exp(), &breaks, quad)?;
    Ok(2.0 * r.value)
}

/// Neville extrapolation of the samples `(xs, ys)` to `x = 0`.
pub(crate) fn extrapolate_to_zero(xs: &[f64], ys: &[C64]) -> C64 {
    let n = xs.len();
    let mut p = ys.to_vec();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (p[i] * (-xs[i + m]) + p[i + 1] * xs[i]) / (xs[i] - xs[i + m]);
        }
    }
    p[0]
}

/// Geometric damping nodes on `[0.01, 0.25]`.
pub fn fresnel_nodes(count: usize) -> Vec<f64> {
    let (hi, lo) = (0.25_f64, 0.01_f64);
    (0..count)
        .map(|j| hi * (lo / hi).powf(j as f64 / (count - 1) as f64))
        .collect()
}

/// Evaluate `∫_{-∞}^{∞} e^{-iy²} dy` by Gaussian damping and polynomial
/// extrapolation in the damping parameter, with `count` nodes.
pub fn fresnel_check_with(quad: &QuadratureSpec, count: usize) -> Result<FresnelCheck> {
    if count < 2 {
        return Err(QexpError::InvalidParameter("need at least two damping nodes".into()));
    }
    let nodes = fresnel_nodes(count);
    let ys = nodes
        .iter()
        .map(|&e| damped_fresnel(e, quad))
        .collect::<Result<Vec<_>>>()?;
    let value = extrapolate_to_zero(&nodes, &ys);
    let sp = PI.sqrt();
    let stated_target = sp / (2.0 * 2f64.sqrt() * C64::new(0.0, 1.0)) * C64::new(1.0, 1.0);
    let classical = C64::from_polar(sp, -PI / 4.0);
    Ok(FresnelCheck {
        value,
        stated_target,
        classical,
        residual: (value - stated_target).norm(),
        residual_classical: (value - classical).norm(),
        nodes,
    })
}

/// [`fresnel_check_with`] with 8 damping nodes.
pub fn fresnel_check(quad: &QuadratureSpec) -> Result<FresnelCheck> {
    fresnel_check_with(quad, 8)
}

/// `f(z) = e^{iπz²/N} / (e^{2πiz} - 1)`, arranged so neither factor
/// overflows far from the real axis.
pub fn contour_integrand(z: C64, n: usize) -> C64 {
    let i = C64::new(0.0, 1.0);
    let num_log = i * PI * z * z / n as f64;
    if z.im >= 0.0 {
        num_log.exp() / ((2.0 * PI * i * z).exp() - 1.0)
    } else {
        // divide through by e^{2πiz}, which is large here
        (num_log - 2.0 * PI * i * z).exp() / (1.0 - (-2.0 * PI * i * z).exp())
    }
}

/// Horizontal contour sides and their bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSides {
    pub n: usize,
    pub r: f64,
    /// Bottom side `∫_{-1/2}^{N-1/2} f(x - iR) dx`.
    pub i2: C64,
    /// Top side `-∫_{-1/2}^{N-1/2} f(x + iR) dx`.
    pub i4: C64,
    /// The bound `N e^{-πR} / (2πR)` asserted for both sides.
    pub stated_bound: f64,
    pub i2_bound_ratio: f64,
    pub i4_bound_ratio: f64,
    /// Bound from `|e^{iπz²/N}| = e^{2πxR/N}` and `|e^{2πiz} - 1| >= e^{2πR} - 1` on the bottom side.
    pub i2_sharp_bound: f64,
    /// Bound from `|e^{iπz²/N}| = e^{-2πxR/N}` and `|e^{2πiz} - 1| >= 1 - e^{-2πR}` on the top side.
    pub i4_sharp_bound: f64,
}

/// Evaluate the horizontal sides of the rectangle with vertical sides at
/// `Re z = -1/2, N - 1/2` and horizontal sides at `Im z = ±R`.
pub fn contour_side_integrals(n: usize, r: f64, quad: &QuadratureSpec) -> Result<ContourSides> {
    require_even(n)?;
    if !(r > 0.0) {
        return Err(QexpError::InvalidParameter(format!("R must be positive, got {r}")));
    }
    let (a, b) = (-0.5, n as f64 - 0.5);
    let breaks: Vec<f64> = (0..=4 * n).map(|j| a + (b - a) * j as f64 / (4 * n) as f64).collect();
    let i2 = integrate_with_breaks(|x| contour_integrand(C64::new(x, -r), n), &breaks, quad)?.value;
    let i4 = -integrate_with_breaks(|x| contour_integrand(C64::new(x, r), n), &breaks, quad)?.value;
    let nf = n as f64;
    let stated_bound = nf * (-PI * r).exp() / (2.0 * PI * r);
    let c = 2.0 * PI * r / nf;
    let i2_sharp_bound =
        ((c * b - 2.0 * PI * r).exp() - (c * a - 2.0 * PI * r).exp()) / c / (1.0 - (-2.0 * PI * r).exp());
    let i4_sharp_bound = ((-c * a).exp() - (-c * b).exp()) / c / (1.0 - (-2.0 * PI * r).exp());
    Ok(ContourSides {
        n,
        r,
        i2,
        i4,
        stated_bound,
        i2_bound_ratio: i2.norm() / stated_bound,
        i4_bound_ratio: i4.norm() / stated_bound,
        i2_sharp_bound,
        i4_sharp_bound,
    })
}

/// Residue total against the sum of the four contour sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourIdentity {
    pub n: usize,
    pub r: f64,
    /// `2πi ∑ Res = ∑_{p=0}^{N-1} e^{iπp²/N}`: every integer in `(-1/2, N-1/2)` is a simple pole.
    pub residue_total: C64,
    /// `I₁ + I₃ = i ∫_{-R}^{R} e^{iπ(-1/2+iy)²/N} dy`, combined through `f(z+N) - f(z) = e^{iπz²/N}`.
    pub vertical: C64,
    pub i2: C64,
    pub i4: C64,
    pub residual: f64,
}

pub fn contour_identity(n: usize, r: f64, quad: &QuadratureSpec) -> Result<ContourIdentity> {
    let sides = contour_side_integrals(n, r, quad)?;
    let i = C64::new(0.0, 1.0);
    let nf = n as f64;
    let vertical = i * integrate(
        |y| {
            let z = C64::new(-0.5, y);
            (i * PI * z * z / nf).exp()
        },
        -r,
        r,
        quad,
    )?
    .value;
    let residue_total = gauss_sum(n)?.direct;
    let total = vertical + sides.i2 + sides.i4;
    Ok(ContourIdentity {
        n,
        r,
        residue_total,
        vertical,
        i2: sides.i2,
        i4: sides.i4,
        residual: (residue_total - total).norm(),
    })
}
