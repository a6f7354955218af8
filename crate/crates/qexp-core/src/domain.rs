// SPDX-License-Identifier: MIT OR Apache-2.0

//! Root-of-unity parameters and the multiplicative group of rays
//! `Γ = ⋃_k q^k ℝ₊`, together with its closure `Γ̄ = Γ ∪ {0}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QexpError, Result};

pub type C64 = Complex64;

/// Default angular tolerance of [`classify_complex`], in radians.
pub const CLASSIFY_TOL: f64 = 1e-12;

/// The data `(N, q, ℏ)` with `q = e^{2πi/N}` and `ℏ = 2π/N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupParams {
    n: usize,
    q: C64,
    hbar: f64,
}

impl GroupParams {
    /// Parameters for the group-theoretic modules: `N` even and `N >= 6`.
    pub fn new(n: usize) -> Result<Self> {
        if n % 2 != 0 || n < 6 {
            return Err(QexpError::InvalidParameter(format!(
                "N must be even and at least 6, got {n}"
            )));
        }
        Ok(Self::build(n))
    }

    /// Parameters for Gauss sums, where any even `N >= 2` is allowed.
    pub fn for_gauss(n: usize) -> Result<Self> {
        if n % 2 != 0 || n < 2 {
            return Err(QexpError::InvalidParameter(format!(
                "N must be even and at least 2, got {n}"
            )));
        }
        Ok(Self::build(n))
    }

    /// Bare root-of-unity data of any order `N >= 1`, for the finite phase
    /// matrices which make sense for every order.
    pub fn root_of_unity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(QexpError::InvalidParameter("N must be positive".into()));
        }
        Ok(Self::build(n))
    }

    fn build(n: usize) -> Self {
        let hbar = 2.0 * PI / n as f64;
        Self {
            n,
            q: C64::from_polar(1.0, hbar),
            hbar,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> C64 {
        self.q
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Reduce an integer exponent modulo `N` into `[0, N)`.
    pub fn reduce(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// `q^e`, computed from the reduced exponent so that `q^N = 1` exactly.
    pub fn q_pow(&self, e: i64) -> C64 {
        let r = self.reduce(e);
        C64::from_polar(1.0, 2.0 * PI * r as f64 / self.n as f64)
    }

    /// `e^{iπ e / N}`, i.e. a power of the principal square root `q^{1/2} = e^{iπ/N}`.
    /// The exponent is reduced modulo `2N`.
    pub fn half_q_pow(&self, e: i64) -> C64 {
        let two_n = 2 * self.n as i64;
        let r = e.rem_euclid(two_n);
        C64::from_polar(1.0, PI * r as f64 / self.n as f64)
    }

    /// A non-zero point `q^k e^x` with `k` reduced into `[0, N)`.
    pub fn point(&self, k: i64, x: f64) -> GammaPoint {
        GammaPoint::Ray { k: self.reduce(k), x }
    }

    /// Group product; zero absorbs.
    pub fn gamma_mul(&self, a: GammaPoint, b: GammaPoint) -> GammaPoint {
        match (a, b) {
            (GammaPoint::Ray { k: ka, x: xa }, GammaPoint::Ray { k: kb, x: xb }) => GammaPoint::Ray {
                k: (ka + kb) % self.n,
                x: xa + xb,
            },
            _ => GammaPoint::Zero,
        }
    }

    /// Group inverse. Zero has no inverse.
    pub fn gamma_inv(&self, a: GammaPoint) -> Result<GammaPoint> {
        match a {
            GammaPoint::Zero => Err(QexpError::Domain("0 is not invertible in Γ̄".into())),
            GammaPoint::Ray { k, x } => Ok(GammaPoint::Ray {
                k: (self.n - k) % self.n,
                x: -x,
            }),
        }
    }

    /// The complex number `q^k e^x` (or 0).
    pub fn to_complex(&self, a: GammaPoint) -> C64 {
        match a {
            GammaPoint::Zero => C64::new(0.0, 0.0),
            GammaPoint::Ray { k, x } => self.q_pow(k as i64) * x.exp(),
        }
    }
}

/// A point of `Γ̄`: either zero or `q^k e^x` with `0 <= k < N`.
///
/// Points are kept in `(k, x)` coordinates so phase arithmetic is exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GammaPoint {
    Zero,
    Ray { k: usize, x: f64 },
}

impl GammaPoint {
    /// The group identity `(k = 0, x = 0)`.
    pub const IDENTITY: GammaPoint = GammaPoint::Ray { k: 0, x: 0.0 };

    pub fn is_zero(&self) -> bool {
        matches!(self, GammaPoint::Zero)
    }

    /// Phase index, `None` for zero.
    pub fn k(&self) -> Option<usize> {
        match self {
            GammaPoint::Zero => None,
            GammaPoint::Ray { k, .. } => Some(*k),
        }
    }

    /// Log-modulus, `None` for zero.
    pub fn x(&self) -> Option<f64> {
        match self {
            GammaPoint::Zero => None,
            GammaPoint::Ray { x, .. } => Some(*x),
        }
    }
}

/// Where a complex number sits relative to the rays of `Γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// On the ray `Γ_k = q^k ℝ₊`.
    Ray(usize),
    /// Strictly inside the sector between `Γ_k` and `Γ_{k+1}`.
    Sector(usize),
    Zero,
    /// Not a finite complex number.
    Off,
}

/// Classify `z` as lying on a ray (within `tol` radians), inside a sector,
/// at zero, or nowhere (non-finite input).
pub fn classify_complex(z: C64, p: &GroupParams, tol: f64) -> Region {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Region::Off;
    }
    if z.re == 0.0 && z.im == 0.0 {
        return Region::Zero;
    }
    let mut theta = z.im.atan2(z.re);
    if theta < 0.0 {
        theta += 2.0 * PI;
    }
    let hbar = p.hbar();
    let nearest = (theta / hbar).round();
    if (theta - nearest * hbar).abs() <= tol {
        return Region::Ray((nearest as usize) % p.n());
    }
    Region::Sector(((theta / hbar).floor() as usize) % p.n())
}

/// Nearest point of `Γ` to a non-zero `z`, provided `z` lies within `tol`
/// radians of a ray.
pub fn nearest_gamma_point(z: C64, p: &GroupParams, tol: f64) -> Result<GammaPoint> {
    match classify_complex(z, p, tol) {
        Region::Ray(k) => Ok(GammaPoint::Ray { k, x: z.norm().ln() }),
        Region::Zero => Ok(GammaPoint::Zero),
        other => Err(QexpError::Domain(format!("{z} is not on Γ̄ ({other:?})"))),
    }
}
