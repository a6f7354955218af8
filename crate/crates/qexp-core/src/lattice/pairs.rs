// SPDX-License-Identifier: MIT OR Apache-2.0

//! The lattice Schrödinger pair `(R, S)`, the quotient `T = S⁻¹R`, and the
//! relation checks for the pair and its transforms.

use super::operator::{ModulusPower, StructuredOperator, Truncation};
use super::spec::{Frame, Lattice, LatticeSpec, PhaseBasis, RadialBasis};
use super::state::{make_wavepacket, StateVector};
use crate::domain::{GammaPoint, C64};
use crate::error::{QexpError, Result};
use crate::report::ResidualReport;
use crate::weyl::{max_abs_diff, phase_r, phase_s, PhaseMatrix};

/// `R`: multiplication by `z = q^k e^{x_j}`.
pub fn build_r(lat: &Lattice) -> StructuredOperator {
    let spec = lat.spec();
    let symbol = (0..spec.len())
        .map(|i| GammaPoint::Ray {
            k: i / spec.m,
            x: spec.x(i % spec.m),
        })
        .collect();
    StructuredOperator::PositionDiagonal { symbol }
}

/// `S = Phase S ⊗ |S|` with `|S| = e^{-ℏP}`: eigenvalue `q^l e^{-ℏ p}` on
/// `f_l ⊗ e^{ipx}`.
pub fn build_s(lat: &Lattice) -> StructuredOperator {
    let spec = lat.spec();
    let hbar = spec.params.hbar();
    let symbol = (0..spec.len())
        .map(|i| GammaPoint::Ray {
            k: i / spec.m,
            x: -hbar * spec.momentum(i % spec.m),
        })
        .collect();
    StructuredOperator::PhaseFourierMomentumDiagonal { symbol }
}

/// Which descriptor of `T = S⁻¹R` to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TForm {
    /// `S⁻¹ ∘ R` applied factor by factor.
    Composition,
    /// Diagonal in `g_m ⊗ (chirp · e^{ipx})` with eigenvalue `q^m e^{ℏp}`.
    Chirp,
}

pub fn build_t(lat: &Lattice, form: TForm) -> StructuredOperator {
    match form {
        TForm::Composition => StructuredOperator::Composition {
            factors: vec![(build_s(lat), -1), (build_r(lat), 1)],
        },
        TForm::Chirp => {
            let spec = lat.spec();
            let hbar = spec.params.hbar();
            let symbol = (0..spec.len())
                .map(|i| GammaPoint::Ray {
                    k: i / spec.m,
                    x: hbar * spec.momentum(i % spec.m),
                })
                .collect();
            StructuredOperator::ConjugatedDiagonal {
                frame: Frame::CHIRP,
                symbol,
            }
        }
    }
}

/// The same operator with the symbol replaced by `g(symbol)`.
pub fn map_symbol(op: &StructuredOperator, g: impl Fn(GammaPoint) -> Result<GammaPoint>) -> Result<StructuredOperator> {
    let map = |s: &[GammaPoint]| s.iter().map(|&z| g(z)).collect::<Result<Vec<_>>>();
    Ok(match op {
        StructuredOperator::PositionDiagonal { symbol } => {
            StructuredOperator::PositionDiagonal { symbol: map(symbol)? }
        }
        StructuredOperator::PhaseFourierMomentumDiagonal { symbol } => {
            StructuredOperator::PhaseFourierMomentumDiagonal { symbol: map(symbol)? }
        }
        StructuredOperator::ConjugatedDiagonal { frame, symbol } => StructuredOperator::ConjugatedDiagonal {
            frame: *frame,
            symbol: map(symbol)?,
        },
        _ => return Err(QexpError::Unsupported("symbol map needs a diagonal descriptor".into())),
    })
}

/// `γ · op` for a diagonal descriptor.
pub fn scale_operator(lat: &Lattice, op: &StructuredOperator, gamma: GammaPoint) -> Result<StructuredOperator> {
    let p = *lat.params();
    map_symbol(op, |z| Ok(p.gamma_mul(gamma, z)))
}

/// Adjoint of a diagonal descriptor (conjugate symbol).
pub fn adjoint_operator(lat: &Lattice, op: &StructuredOperator) -> Result<StructuredOperator> {
    let p = *lat.params();
    map_symbol(op, |z| {
        Ok(match z {
            GammaPoint::Zero => GammaPoint::Zero,
            GammaPoint::Ray { k, x } => p.point(-(k as i64), x),
        })
    })
}

/// Inverse of a diagonal descriptor.
pub fn inverse_operator(lat: &Lattice, op: &StructuredOperator) -> Result<StructuredOperator> {
    let p = *lat.params();
    map_symbol(op, |z| p.gamma_inv(z))
}

/// A positive modulus operator `e^{σ x}`, `e^{σ ℏ P}` or `e^{x + σ ℏ P}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulus {
    Position(i8),
    Momentum(i8),
    ChirpedMomentum(i8),
}

impl Modulus {
    pub fn build(self, lat: &Lattice) -> StructuredOperator {
        let spec = lat.spec();
        let hbar = spec.params.hbar();
        let n = spec.len();
        match self {
            Modulus::Position(s) => StructuredOperator::PositionDiagonal {
                symbol: (0..n)
                    .map(|i| GammaPoint::Ray {
                        k: 0,
                        x: s as f64 * spec.x(i % spec.m),
                    })
                    .collect(),
            },
            Modulus::Momentum(s) | Modulus::ChirpedMomentum(s) => {
                let radial = match self {
                    Modulus::Momentum(_) => RadialBasis::Momentum,
                    _ => RadialBasis::ChirpedMomentum(s),
                };
                StructuredOperator::ConjugatedDiagonal {
                    frame: Frame {
                        phase: PhaseBasis::Standard,
                        radial,
                    },
                    symbol: (0..n)
                        .map(|i| GammaPoint::Ray {
                            k: 0,
                            x: s as f64 * hbar * spec.momentum(i % spec.m),
                        })
                        .collect(),
                }
            }
        }
    }

    /// Smallest `t > 0` for which `|·|^{it}` is an exact lattice shift: a
    /// translation by `h` for momentum-type moduli, a momentum boost by one
    /// bin for position-type moduli.
    pub fn lattice_exact_t(self, spec: &LatticeSpec) -> f64 {
        match self {
            Modulus::Position(_) => 2.0 * std::f64::consts::PI / spec.length(),
            _ => spec.h / spec.params.hbar(),
        }
    }
}

/// A pair of normal operators in polar form.
#[derive(Debug, Clone)]
pub struct PolarPair {
    pub name: &'static str,
    pub phase_r: PhaseMatrix,
    pub modulus_r: Modulus,
    pub phase_s: PhaseMatrix,
    pub modulus_s: Modulus,
}

/// The pair `(R, S)`, its transforms `(R*, S*)`, `(S⁻¹, R)`, `(S, R⁻¹)`,
/// `(R, SR)`, and `(T, R)` with `T = S⁻¹R`.
pub fn transformed_pairs(lat: &Lattice) -> Vec<PolarPair> {
    let p = lat.params();
    let (pr, ps) = (phase_r(p), phase_s(p));
    vec![
        PolarPair {
            name: "R_S",
            phase_r: pr.clone(),
            modulus_r: Modulus::Position(1),
            phase_s: ps.clone(),
            modulus_s: Modulus::Momentum(-1),
        },
        PolarPair {
            name: "Rstar_Sstar",
            phase_r: pr.adjoint(),
            modulus_r: Modulus::Position(1),
            phase_s: ps.adjoint(),
            modulus_s: Modulus::Momentum(-1),
        },
        PolarPair {
            name: "Sinv_R",
            phase_r: ps.adjoint(),
            modulus_r: Modulus::Momentum(1),
            phase_s: pr.clone(),
            modulus_s: Modulus::Position(1),
        },
        PolarPair {
            name: "S_Rinv",
            phase_r: ps.clone(),
            modulus_r: Modulus::Momentum(-1),
            phase_s: pr.adjoint(),
            modulus_s: Modulus::Position(-1),
        },
        // SR = q^{1/2} (Phase S)(Phase R) e^{x - ℏP}
        PolarPair {
            name: "R_SR",
            phase_r: pr.clone(),
            modulus_r: Modulus::Position(1),
            phase_s: (&ps * &pr) * p.half_q_pow(1),
            modulus_s: Modulus::ChirpedMomentum(-1),
        },
        PolarPair {
            name: "T_R",
            phase_r: crate::weyl::phase_t(p),
            modulus_r: Modulus::ChirpedMomentum(1),
            phase_s: pr.clone(),
            modulus_s: Modulus::Position(1),
        },
    ]
}

/// Residuals of the pair relations for `(γ₁ R', γ₂ S')`:
/// `(Phase S')(Phase R') = q (Phase R')(Phase S')` on the phase matrices and
/// `|S'|^{it}|R'||S'|^{-it} ψ = e^{-ℏt}|R'| ψ` (relative) at lattice-exact `t`.
pub fn pair_residuals(
    lat: &Lattice,
    pair: &PolarPair,
    psi: &StateVector,
    gamma_r: GammaPoint,
    gamma_s: GammaPoint,
) -> Result<(f64, f64)> {
    let p = *lat.params();
    let (GammaPoint::Ray { k: k1, x: x1 }, GammaPoint::Ray { k: k2, x: x2 }) = (gamma_r, gamma_s) else {
        return Err(QexpError::Domain("scaling factors must be non-zero".into()));
    };
    let pr = &pair.phase_r * p.q_pow(k1 as i64);
    let ps = &pair.phase_s * p.q_pow(k2 as i64);
    let weyl = max_abs_diff(&(&ps * &pr), &(&pr * &ps * p.q()));

    let mod_r = scale_operator(lat, &pair.modulus_r.build(lat), GammaPoint::Ray { k: 0, x: x1 })?;
    let mod_s = scale_operator(lat, &pair.modulus_s.build(lat), GammaPoint::Ray { k: 0, x: x2 })?;
    let t = pair.modulus_s.lattice_exact_t(lat.spec());
    let forward = mod_s.function(&ModulusPower(t))?;
    let backward = mod_s.function(&ModulusPower(-t))?;

    let rhs = mod_r.apply(lat, psi, Truncation::CentralHalf)?;
    let mut lhs = backward.apply(lat, psi);
    lhs = mod_r.apply(lat, &lhs, Truncation::CentralHalf)?;
    lhs = forward.apply(lat, &lhs);
    let mut scaled = rhs.clone();
    scaled.scale(C64::new((-p.hbar() * t).exp(), 0.0));
    Ok((weyl, lhs.distance(&scaled) / rhs.norm()))
}

/// A fixed band-limited packet used by the lattice checks: width `8h`,
/// centred at `x = 0`, with unequal complex phase weights.
pub fn default_packet(spec: &LatticeSpec) -> Result<StateVector> {
    let w: Vec<C64> = (0..spec.n())
        .map(|k| C64::from_polar(1.0 + 0.25 * k as f64, 0.7 * k as f64))
        .collect();
    make_wavepacket(spec, &w, spec.x0 + spec.length() / 2.0, 8.0 * spec.h)
}

/// Pair relation residuals for every transformed pair, plus the scaled pair
/// `(γ₁R, γ₂S)` with `γ₁ = q e^{0.3}`, `γ₂ = q² e^{-0.2}`.
pub fn pair_transform_check(lat: &Lattice) -> Result<ResidualReport> {
    let spec = lat.spec();
    let psi = default_packet(spec)?;
    let mut report = ResidualReport::new("pair_transforms");
    report.meta.n = spec.n();
    report.meta.m = spec.m;
    report.meta.h = spec.h;
    report.meta.kappa = spec.kappa;
    let id = GammaPoint::IDENTITY;
    for pair in transformed_pairs(lat) {
        let (weyl, modulus) = pair_residuals(lat, &pair, &psi, id, id)?;
        report.insert(&format!("{}.weyl", pair.name), weyl);
        report.insert(&format!("{}.modulus", pair.name), modulus);
        report.tolerance(&format!("{}.weyl", pair.name), 1e-14);
        let tol = if pair.name == "T_R" { 1e-8 } else { 1e-10 };
        report.tolerance(&format!("{}.modulus", pair.name), tol);
    }
    let base = &transformed_pairs(lat)[0];
    let p = spec.params;
    let (weyl, modulus) = pair_residuals(lat, base, &psi, p.point(1, 0.3), p.point(2, -0.2))?;
    report.insert("scaled_R_S.weyl", weyl);
    report.insert("scaled_R_S.modulus", modulus);
    report.tolerance("scaled_R_S.weyl", 1e-14);
    report.tolerance("scaled_R_S.modulus", 1e-10);
    Ok(report)
}

/// Relative residuals of `SR = q²RS` and `SR* = R*S` on `psi`, with the
/// unbounded factors applied inside the truncation window.
pub fn derived_relations(lat: &Lattice, psi: &StateVector, tr: Truncation) -> Result<(f64, f64)> {
    let p = *lat.params();
    let r = build_r(lat);
    let s = build_s(lat);
    let r_star = adjoint_operator(lat, &r)?;

    let sr = s.apply(lat, &r.apply(lat, psi, tr)?, tr)?;
    let mut rs = r.apply(lat, &s.apply(lat, psi, tr)?, tr)?;
    rs.scale(p.q_pow(2));
    let first = sr.distance(&rs) / sr.norm();

    let srs = s.apply(lat, &r_star.apply(lat, psi, tr)?, tr)?;
    let rss = r_star.apply(lat, &s.apply(lat, psi, tr)?, tr)?;
    let second = srs.distance(&rss) / srs.norm();
    Ok((first, second))
}

/// Relative distance between the two descriptors of `T` on `psi`.
pub fn t_forms_distance(lat: &Lattice, psi: &StateVector, tr: Truncation) -> Result<f64> {
    let a = build_t(lat, TForm::Composition).apply(lat, psi, tr)?;
    let b = build_t(lat, TForm::Chirp).apply(lat, psi, tr)?;
    Ok(a.distance(&b) / b.norm())
}
