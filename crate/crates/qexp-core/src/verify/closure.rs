// SPDX-License-Identifier: MIT OR Apache-2.0

//! The closure `R +̇ S` as a unitary conjugation of `S` (or of `R`), and the
//! exponential equation `F_N(R) F_N(S) = F_N(R +̇ S)`.

use std::sync::Arc;

use crate::domain::GammaPoint;
use crate::error::Result;
use crate::lattice::{
    build_r, build_s, build_t, map_symbol, Lattice, LatticeSpec, OperatorFunction, QExp, SpectralFunction,
    SpectralMultiplier, StateVector, StructuredOperator, TForm, Truncation,
};
use crate::quadrature::QuadratureSpec;

/// Which operator is conjugated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosureForm {
    /// `F_N(T)* S F_N(T)` with `T = S⁻¹R`.
    SForm,
    /// `V R V*` with `V = F_N(q⁻² R⁻¹S)`.
    RForm,
}

/// Placements of the unitary around `R` in the second form, with
/// `W = F_N(R⁻¹S)`. Only [`RFormVariant::Consistent`] is a closure formula on
/// the lattice; the others are kept for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RFormVariant {
    /// `W R W` (no adjoint).
    Printed,
    /// `W* R W`.
    StarLeft,
    /// `W R W*`.
    StarRight,
    /// `V R V*` with `V = F_N(q⁻² R⁻¹S)`.
    Consistent,
}

impl RFormVariant {
    pub const ALL: [RFormVariant; 4] = [
        RFormVariant::Printed,
        RFormVariant::StarLeft,
        RFormVariant::StarRight,
        RFormVariant::Consistent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RFormVariant::Printed => "printed",
            RFormVariant::StarLeft => "star_left",
            RFormVariant::StarRight => "star_right",
            RFormVariant::Consistent => "consistent",
        }
    }
}

/// `F_N(γ T⁻¹)` as a multiplier in the chirp frame.
fn inverse_t_multiplier(lat: &Lattice, gamma: GammaPoint, quad: &QuadratureSpec) -> Result<SpectralMultiplier> {
    let p = *lat.params();
    let t_inv = map_symbol(&build_t(lat, TForm::Chirp), |z| Ok(p.gamma_mul(gamma, p.gamma_inv(z)?)))?;
    t_inv.multiplier(&QExp::new(p, *quad))
}

/// The closure as a conjugated descriptor.
pub fn closure_sum(lat: &Lattice, form: ClosureForm, quad: &QuadratureSpec) -> Result<StructuredOperator> {
    let p = *lat.params();
    Ok(match form {
        ClosureForm::SForm => {
            let u = build_t(lat, TForm::Chirp).multiplier(&QExp::new(p, *quad))?;
            StructuredOperator::Conjugated {
                by: Arc::new(u),
                inner: Box::new(build_s(lat)),
            }
        }
        ClosureForm::RForm => {
            let v = inverse_t_multiplier(lat, p.point(-2, 0.0), quad)?;
            StructuredOperator::Conjugated {
                by: Arc::new(v.adjoint()),
                inner: Box::new(build_r(lat)),
            }
        }
    })
}

/// Apply one placement of the second form to `psi` (with `R` applied inside
/// the truncation window).
pub fn apply_r_form(
    lat: &Lattice,
    variant: RFormVariant,
    psi: &StateVector,
    trunc: Truncation,
    quad: &QuadratureSpec,
) -> Result<StateVector> {
    let p = *lat.params();
    let r = build_r(lat);
    let gamma = match variant {
        RFormVariant::Consistent => p.point(-2, 0.0),
        _ => GammaPoint::IDENTITY,
    };
    let m = inverse_t_multiplier(lat, gamma, quad)?;
    let (left, right) = match variant {
        RFormVariant::Printed => (m.clone(), m),
        RFormVariant::StarLeft => (m.adjoint(), m),
        RFormVariant::StarRight | RFormVariant::Consistent => (m.clone(), m.adjoint()),
    };
    let v = right.apply(lat, psi);
    let v = r.apply(lat, &v, trunc)?;
    Ok(left.apply(lat, &v))
}

/// Relative distance of each closure placement from the direct sum
/// `Rψ + Sψ`, plus the first form.
#[derive(Debug, Clone)]
pub struct ClosureComparison {
    pub s_form: f64,
    pub r_forms: Vec<(RFormVariant, f64)>,
}

impl ClosureComparison {
    /// The placement closest to the direct sum.
    pub fn best_variant(&self) -> RFormVariant {
        self.r_forms
            .iter()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|v| v.0)
            .unwrap_or(RFormVariant::Consistent)
    }
}

pub fn compare_with_direct_sum(
    lat: &Lattice,
    psi: &StateVector,
    trunc: Truncation,
    quad: &QuadratureSpec,
) -> Result<ClosureComparison> {
    let direct = build_r(lat)
        .apply(lat, psi, trunc)?
        .add(&build_s(lat).apply(lat, psi, trunc)?);
    let scale = direct.norm();
    let s_form = closure_sum(lat, ClosureForm::SForm, quad)?.apply(lat, psi, trunc)?;
    let mut r_forms = Vec::new();
    for v in RFormVariant::ALL {
        let out = apply_r_form(lat, v, psi, trunc, quad)?;
        r_forms.push((v, out.distance(&direct) / scale));
    }
    Ok(ClosureComparison {
        s_form: s_form.distance(&direct) / scale,
        r_forms,
    })
}

/// `f(R +̇ S)` through the diagonal basis of the chosen closure form.
pub fn closure_function(
    lat: &Lattice,
    form: ClosureForm,
    f: &dyn SpectralFunction,
    quad: &QuadratureSpec,
) -> Result<OperatorFunction> {
    closure_sum(lat, form, quad)?.function(f)
}

/// `‖F_N(S-form)ψ − F_N(R-form)ψ‖ / ‖ψ‖`: the two forms compared through
/// the bounded function `F_N`.
pub fn form_agreement(lat: &Lattice, psi: &StateVector, quad: &QuadratureSpec) -> Result<f64> {
    let f = QExp::new(*lat.params(), *quad);
    let a = closure_function(lat, ClosureForm::SForm, &f, quad)?.apply(lat, psi);
    let b = closure_function(lat, ClosureForm::RForm, &f, quad)?.apply(lat, psi);
    Ok(a.distance(&b) / psi.norm())
}

/// `‖f(R) f(S) ψ − f(R +̇ S) ψ‖ / ‖ψ‖` for `f = F_N(γ ·)`.
pub fn scalar_solution_residual(
    lat: &Lattice,
    gamma: GammaPoint,
    psi: &StateVector,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if gamma.is_zero() {
        // f ≡ 1 on both sides
        return Ok(0.0);
    }
    let f = QExp::scaled(*lat.params(), *quad, gamma);
    residual_with(lat, &f, psi, quad)
}

/// `‖F_N(R) F_N(S) ψ − F_N(R +̇ S) ψ‖ / ‖ψ‖`.
pub fn exp_identity_residual(lat: &Lattice, psi: &StateVector, quad: &QuadratureSpec) -> Result<f64> {
    scalar_solution_residual(lat, GammaPoint::IDENTITY, psi, quad)
}

/// The exponential-equation residual with an arbitrary function `f` in place
/// of `F_N`, used for controls.
pub fn residual_with(lat: &Lattice, f: &dyn SpectralFunction, psi: &StateVector, quad: &QuadratureSpec) -> Result<f64> {
    let lhs = build_r(lat)
        .function(f)?
        .apply(lat, &build_s(lat).function(f)?.apply(lat, psi));
    let rhs = closure_function(lat, ClosureForm::SForm, f, quad)?.apply(lat, psi);
    Ok(lhs.distance(&rhs) / psi.norm())
}

/// One row of a refinement sweep.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SweepPoint {
    pub m: usize,
    pub h: f64,
    pub residual: f64,
}

/// Evaluate `residual` on `levels` grids, each refined from the last
/// (`h → h/2`, `M → 4M`), for a packet built once per grid from the same
/// analytic profile.
pub fn refinement_sweep(
    base: &LatticeSpec,
    levels: usize,
    packet: impl Fn(&LatticeSpec) -> Result<StateVector>,
    residual: impl Fn(&Lattice, &StateVector) -> Result<f64>,
) -> Result<Vec<SweepPoint>> {
    let mut spec = *base;
    let mut out = Vec::with_capacity(levels);
    for level in 0..levels {
        if level > 0 {
            spec = spec.refined()?;
        }
        let lat = Lattice::new(spec);
        let psi = packet(&spec)?;
        out.push(SweepPoint {
            m: spec.m,
            h: spec.h,
            residual: residual(&lat, &psi)?,
        });
    }
    Ok(out)
}

/// The refinement law: every halving of `h` reduces the residual by at least
/// `factor`, until it is below `floor`.
pub fn obeys_refinement_law(points: &[SweepPoint], factor: f64, floor: f64) -> bool {
    points
        .windows(2)
        .all(|w| w[0].residual <= floor || w[1].residual * factor <= w[0].residual)
}

/// Constant 1 in place of `F_N` on the right-hand side only: the identity
/// then reads `F_N(R) F_N(S) ψ = ψ`, which must fail visibly.
pub fn exp_identity_control(lat: &Lattice, psi: &StateVector, quad: &QuadratureSpec) -> Result<f64> {
    let f = QExp::new(*lat.params(), *quad);
    let lhs = build_r(lat)
        .function(&f)?
        .apply(lat, &build_s(lat).function(&f)?.apply(lat, psi));
    Ok(lhs.distance(psi) / psi.norm())
}
