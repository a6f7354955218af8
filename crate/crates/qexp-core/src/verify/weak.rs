// SPDX-License-Identifier: MIT OR Apache-2.0

//! The weak derivative of `F_N(λT)` at `λ = 0`:
//! `⟨u|(F_N(λT) − I)/λ|v⟩ → (2i sin ℏ)⁻¹ ⟨u|(qT + q̄T*)|v⟩`.

use crate::domain::{GammaPoint, C64};
use crate::error::{QexpError, Result};
use crate::gauss::extrapolate_to_zero;
use crate::lattice::{Frame, Lattice, StateVector};
use crate::quadrature::QuadratureSpec;
use crate::special::fn_eval;

/// The λ values of the bracket sequence.
pub const WEAK_LIMIT_LAMBDAS: [f64; 3] = [1e-2, 1e-3, 1e-4];

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WeakLimitResult {
    pub lambdas: Vec<f64>,
    pub brackets: Vec<C64>,
    /// `|bracket(λ) − rhs|` for each λ.
    pub distances: Vec<f64>,
    pub extrapolated: C64,
    pub rhs: C64,
    /// `|extrapolated − rhs|`, relative to `max(|rhs|, ‖u‖‖v‖)`.
    pub distance: f64,
}

impl WeakLimitResult {
    /// The raw bracket approaches the limit as λ decreases.
    pub fn decreasing(&self) -> bool {
        self.distances.windows(2).all(|w| w[1] < w[0])
    }
}

/// Evaluate the bracket in the eigenframe of `T`, on the central half of its
/// spectrum (the lattice domain of `T`).
pub fn weak_limit_check(
    lat: &Lattice,
    u: &StateVector,
    v: &StateVector,
    quad: &QuadratureSpec,
) -> Result<WeakLimitResult> {
    weak_limit_with(lat, u, v, &WEAK_LIMIT_LAMBDAS, quad)
}

pub fn weak_limit_with(
    lat: &Lattice,
    u: &StateVector,
    v: &StateVector,
    lambdas: &[f64],
    quad: &QuadratureSpec,
) -> Result<WeakLimitResult> {
    if lambdas.len() < 2 || lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(QexpError::InvalidParameter(
            "need at least two positive λ values".into(),
        ));
    }
    let spec = lat.spec();
    let p = *lat.params();
    let hbar = p.hbar();
    let uc = lat.to_frame(Frame::CHIRP, &u.data);
    let vc = lat.to_frame(Frame::CHIRP, &v.data);
    // (index, symbol, conj(u_i) v_i h)
    let mut terms = Vec::new();
    for (i, (a, b)) in uc.iter().zip(&vc).enumerate() {
        let bin = i % spec.m;
        if !spec.central_momentum(bin) {
            continue;
        }
        let t = GammaPoint::Ray {
            k: i / spec.m,
            x: hbar * spec.momentum(bin),
        };
        terms.push((t, a.conj() * b * spec.h));
    }

    let denom = C64::new(0.0, 2.0 * hbar.sin());
    let rhs: C64 = terms
        .iter()
        .map(|&(t, w)| {
            let z = p.to_complex(t);
            w * (p.q() * z + p.q().conj() * z.conj()) / denom
        })
        .sum();

    let mut brackets = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let scale = GammaPoint::Ray { k: 0, x: lambda.ln() };
        let mut sum = C64::new(0.0, 0.0);
        for &(t, w) in &terms {
            let f = fn_eval(p.gamma_mul(scale, t), &p, quad)?;
            sum += w * (f - 1.0) / lambda;
        }
        brackets.push(sum);
    }
    let extrapolated = extrapolate_to_zero(lambdas, &brackets);
    // both sides vanish identically when u or v is zero
    let scale = rhs.norm().max(u.norm() * v.norm()).max(f64::MIN_POSITIVE);
    let distances = brackets.iter().map(|b| (b - rhs).norm() / scale).collect();
    Ok(WeakLimitResult {
        lambdas: lambdas.to_vec(),
        brackets,
        distances,
        extrapolated,
        rhs,
        distance: (extrapolated - rhs).norm() / scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::GroupParams;
    use crate::lattice::{make_wavepacket, LatticeSpec};

    #[test]
    fn extrapolated_bracket_matches() {
        let p = GroupParams::new(6).unwrap();
        let spec = LatticeSpec::new(p, 256, 8).unwrap();
        let lat = Lattice::new(spec);
        let w: Vec<C64> = (0..6).map(|k| C64::from_polar(1.0, 0.4 * k as f64)).collect();
        let u = make_wavepacket(&spec, &w, 0.0, 8.0 * spec.h).unwrap();
        let v = make_wavepacket(&spec, &w, 0.3, 8.0 * spec.h).unwrap();
        let r = weak_limit_check(&lat, &u, &v, &QuadratureSpec::default()).unwrap();
        assert!(r.distance <= 1e-5, "{}", r.distance);
        assert!(r.decreasing());
    }

    #[test]
    fn needs_two_lambdas() {
        let p = GroupParams::new(6).unwrap();
        let spec = LatticeSpec::new(p, 64, 8).unwrap();
        let lat = Lattice::new(spec);
        let u = StateVector::zeros(&spec);
        assert!(weak_limit_with(&lat, &u, &u, &[1e-2], &QuadratureSpec::default()).is_err());
    }
}
