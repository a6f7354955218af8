// SPDX-License-Identifier: MIT OR Apache-2.0

//! Commutator defect of `Q = μS + RS` on band-limited states.

use serde::{Deserialize, Serialize};

use crate::domain::{classify_complex, GroupParams, Region, C64};
use crate::error::Result;
use crate::lattice::{
    adjoint_operator, build_r, build_s, make_wavepacket, Lattice, LatticeSpec, StateVector, Truncation,
};

/// Angular tolerance for calling `μ` a point of `Γ`.
pub const ON_GAMMA_TOL: f64 = 1e-9;
/// Required ratio between the smallest off-`Γ` and the largest on-`Γ` defect.
pub const SEPARATION_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityProbeResult {
    pub mu: C64,
    /// `max_ψ ‖(Q*Q − QQ*)ψ‖ / ‖ψ‖` over the test family.
    pub defect: f64,
    /// The same commutator relative to `‖Q*Qψ‖ + ‖QQ*ψ‖`.
    pub relative_defect: f64,
    pub on_gamma: bool,
}

/// The fixed test family: three width-`8h` packets with different phase
/// weights and centres inside the central half.
pub fn normality_test_family(spec: &LatticeSpec) -> Result<Vec<StateVector>> {
    let n = spec.n();
    let mid = spec.x0 + spec.length() / 2.0;
    let width = 8.0 * spec.h;
    let families: [(f64, f64, f64); 3] = [(0.7, 0.25, 0.0), (-1.1, 0.1, -1.0), (2.3, -0.05, 1.0)];
    families
        .iter()
        .map(|&(phase, slope, shift)| {
            let w: Vec<C64> = (0..n)
                .map(|k| C64::from_polar(1.0 + slope * k as f64, phase * k as f64))
                .collect();
            make_wavepacket(spec, &w, mid + shift, width)
        })
        .collect()
}

pub fn mu_on_gamma(mu: C64, p: &GroupParams) -> bool {
    matches!(classify_complex(mu, p, ON_GAMMA_TOL), Region::Ray(_) | Region::Zero)
}

pub fn normality_defect(mu: C64, lat: &Lattice) -> Result<NormalityProbeResult> {
    let family = normality_test_family(lat.spec())?;
    normality_defect_on(mu, lat, &family)
}

/// The truncation used by the probe. `Q*Q` contains `e^{2x}` and `e^{-2ℏP}`,
/// which amplify roundoff by `e^{2x_max + 2ℏp_max}` inside the window; the
/// caps `|x| < 8`, `ℏ|p| < 7` keep that below the packets' own tails.
pub fn probe_window(spec: &LatticeSpec) -> Truncation {
    let hbar = spec.params.hbar();
    Truncation::Window {
        x: (spec.length() / 4.0).min(8.0),
        p: (spec.p_max() / 2.0).min(7.0 / hbar),
    }
}

pub fn normality_defect_on(mu: C64, lat: &Lattice, family: &[StateVector]) -> Result<NormalityProbeResult> {
    normality_defect_with(mu, lat, family, probe_window(lat.spec()))
}

pub fn normality_defect_with(
    mu: C64,
    lat: &Lattice,
    family: &[StateVector],
    tr: Truncation,
) -> Result<NormalityProbeResult> {
    let r = build_r(lat);
    let s = build_s(lat);
    let r_star = adjoint_operator(lat, &r)?;
    let s_star = adjoint_operator(lat, &s)?;
    // Q = μS + RS, Q* = μ̄S* + S*R*
    let q = |v: &StateVector| -> Result<StateVector> {
        let sv = s.apply(lat, v, tr)?;
        let mut a = sv.clone();
        a.scale(mu);
        Ok(a.add(&r.apply(lat, &sv, tr)?))
    };
    let q_star = |v: &StateVector| -> Result<StateVector> {
        let mut a = s_star.apply(lat, v, tr)?;
        a.scale(mu.conj());
        Ok(a.add(&s_star.apply(lat, &r_star.apply(lat, v, tr)?, tr)?))
    };
    let mut defect: f64 = 0.0;
    let mut relative: f64 = 0.0;
    for psi in family {
        let a = q_star(&q(psi)?)?;
        let b = q(&q_star(psi)?)?;
        let d = a.distance(&b);
        defect = defect.max(d / psi.norm());
        relative = relative.max(d / (a.norm() + b.norm()));
    }
    Ok(NormalityProbeResult {
        mu,
        defect,
        relative_defect: relative,
        on_gamma: mu_on_gamma(mu, lat.params()),
    })
}

/// The `rays+midsector` probe grid: `ρ q^k` and `ρ e^{iπ(2k+1)/N}` for
/// every `k` and each modulus.
pub fn mu_grid(p: &GroupParams, moduli: &[f64]) -> Vec<C64> {
    let n = p.n();
    let mut out = Vec::new();
    for &rho in moduli {
        for k in 0..n as i64 {
            out.push(p.q_pow(k) * rho);
            out.push(p.half_q_pow(2 * k + 1) * rho);
        }
    }
    out
}

pub const DEFAULT_PROBE_MODULI: [f64; 3] = [0.5, 1.0, 2.0];

/// Defects over a `μ` grid, with the ordering check: every on-`Γ` defect is
/// below `1/SEPARATION_FACTOR` of every off-`Γ` defect of the same modulus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalityProbe {
    pub results: Vec<NormalityProbeResult>,
    /// Smallest `min off / max on` over the moduli.
    pub separation: f64,
    pub ordering_holds: bool,
}

pub fn normality_probe(lat: &Lattice, mus: &[C64]) -> Result<NormalityProbe> {
    use rayon::prelude::*;
    let family = normality_test_family(lat.spec())?;
    let results = mus
        .par_iter()
        .map(|&mu| normality_defect_on(mu, lat, &family))
        .collect::<Result<Vec<_>>>()?;
    let mut moduli: Vec<f64> = results.iter().map(|r| r.mu.norm()).collect();
    moduli.sort_by(f64::total_cmp);
    moduli.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    let mut separation = f64::INFINITY;
    for rho in moduli {
        let same = |r: &&NormalityProbeResult| (r.mu.norm() - rho).abs() <= 1e-12 * rho.max(1.0);
        let on = results
            .iter()
            .filter(same)
            .filter(|r| r.on_gamma)
            .map(|r| r.defect)
            .fold(f64::NAN, f64::max);
        let off = results
            .iter()
            .filter(same)
            .filter(|r| !r.on_gamma)
            .map(|r| r.defect)
            .fold(f64::NAN, f64::min);
        if on.is_finite() && off.is_finite() {
            separation = separation.min(off / on);
        }
    }
    let ordering_holds = separation.is_finite() && separation >= SEPARATION_FACTOR;
    Ok(NormalityProbe {
        results,
        separation,
        ordering_holds,
    })
}
