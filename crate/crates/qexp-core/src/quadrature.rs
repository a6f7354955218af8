// SPDX-License-Identifier: MIT OR Apache-2.0

//! Globally adaptive Gauss–Kronrod (7/15 point) quadrature for complex
//! valued integrands on finite intervals.

use serde::{Deserialize, Serialize};

use crate::domain::C64;
use crate::error::{QexpError, Result};

/// Tolerances for the adaptive integrator.
///
/// `max_levels` bounds the bisection depth of any single panel; a panel that
/// would need to be split beyond it makes the integration fail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_levels: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_levels: 20,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) || self.max_levels < 1 {
            return Err(QexpError::InvalidParameter(format!(
                "quadrature tolerances must be positive and max_levels >= 1, got {self:?}"
            )));
        }
        Ok(())
    }

    /// The same spec with both tolerances halved.
    pub fn halved(&self) -> Self {
        Self {
            rel_tol: 0.5 * self.rel_tol,
            abs_tol: 0.5 * self.abs_tol,
            max_levels: self.max_levels,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: C64,
    pub error: f64,
    pub evaluations: usize,
}

// Kronrod abscissae (positive half, descending) and weights; the Gauss
// points are the odd-indexed abscissae plus the centre.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    a: f64,
    b: f64,
    value: C64,
    error: f64,
    level: u32,
}

fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64, f64) {
    let c = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.norm() * WGK[7];
    for i in 0..7 {
        let dx = half * XGK[i];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        kron += (f1 + f2) * WGK[i];
        abs_sum += (f1.norm() + f2.norm()) * WGK[i];
        if i % 2 == 1 {
            gauss += (f1 + f2) * WG[i / 2];
        }
    }
    let value = kron * half;
    let err = ((kron - gauss) * half).norm();
    (value, err, abs_sum * half.abs())
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<QuadResult> {
    integrate_with_breaks(f, &[a, b], spec)
}

/// Integrate `f` over `[breaks[0], breaks[last]]`, starting from the panels
/// given by consecutive break points.
pub fn integrate_with_breaks<F: Fn(f64) -> C64>(f: F, breaks: &[f64], spec: &QuadratureSpec) -> Result<QuadResult> {
    spec.validate()?;
    if breaks.len() < 2 {
        return Err(QexpError::InvalidParameter("need at least two break points".into()));
    }
    let mut panels: Vec<Panel> = Vec::with_capacity(4 * breaks.len());
    let mut roundoff = 0.0;
    for w in breaks.windows(2) {
        let (v, e, abs) = gk15(&f, w[0], w[1]);
        roundoff += abs;
        panels.push(Panel {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
            level: 0,
        });
    }
    let mut evaluations = 15 * panels.len();
    // an error estimate below this many ulps of sum |f| cannot be improved
    let floor = 50.0 * f64::EPSILON * roundoff;

    loop {
        let total: C64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        let tol = spec.abs_tol.max(spec.rel_tol * total.norm()).max(floor);
        if err <= tol {
            return Ok(QuadResult {
                value: total,
                error: err,
                evaluations,
            });
        }
        // split the worst panel that may still be split
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.level < spec.max_levels)
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i);
        let Some(i) = worst else {
            return Err(QexpError::Convergence {
                estimate: err,
                tolerance: tol,
            });
        };
        let p = panels.swap_remove(i);
        let m = 0.5 * (p.a + p.b);
        for (a, b) in [(p.a, m), (m, p.b)] {
            let (v, e, _) = gk15(&f, a, b);
            panels.push(Panel {
                a,
                b,
                value: v,
                error: e,
                level: p.level + 1,
            });
        }
        evaluations += 30;
        if panels.iter().filter(|p| p.level < spec.max_levels).count() == 0 {
            let total: C64 = panels.iter().map(|p| p.value).sum();
            let err: f64 = panels.iter().map(|p| p.error).sum();
            let tol = spec.abs_tol.max(spec.rel_tol * total.norm()).max(floor);
            if err <= tol {
                return Ok(QuadResult {
                    value: total,
                    error: err,
                    evaluations,
                });
            }
            return Err(QexpError::Convergence {
                estimate: err,
                tolerance: tol,
            });
        }
    }
}
