// SPDX-License-Identifier: MIT OR Apache-2.0

//! Recover `γ` from samples of a unimodular `f` assumed to be `F_N(γ ·)`.
//!
//! The phase index comes first, from the slopes of `f` at the origin along
//! every ray: for `f = F_N(γ·)` with `γ = ρ q^k` the slope along `q^j` is
//! `2ρ cos((1+j+k)ℏ) / (2i sin ℏ)`, which is linear in `(ρ cos kℏ, ρ sin kℏ)`.
//! The log-modulus is then polished by Gauss-Newton on the whole sample set.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::domain::{GammaPoint, GroupParams, C64};
use crate::error::{QexpError, Result};
use crate::quadrature::QuadratureSpec;
use crate::special::fn_eval;

/// Radius at which slopes are taken.
pub const SLOPE_EPS: f64 = 1e-4;
/// Largest `||f| − 1|` accepted as unimodular.
pub const UNIMODULAR_TOL: f64 = 1e-6;
/// RMS residual separating members of the family from non-members.
pub const FIT_THRESHOLD: f64 = 1e-6;
/// Log-radii of the refinement samples on every ray.
pub const FIT_LOG_RADII: [f64; 9] = [-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitVerdict {
    /// `f = F_N(γ·)` within the threshold.
    Member,
    /// `f ≡ 1`, the member `γ = 0`.
    Degenerate,
    /// No `γ` reproduces the samples.
    NotInFamily,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub gamma: GammaPoint,
    /// RMS of `|f(z_i) − F_N(γ z_i)|` over the samples.
    pub residual: f64,
    pub verdict: FitVerdict,
    /// The seed from the slopes, before refinement.
    pub seed: GammaPoint,
}

/// Every point at which [`fit_gamma`] samples `f`: the slope pairs
/// `q^j ε` for all rays `j`, then `q^j e^{x}` for `x` in [`FIT_LOG_RADII`].
pub fn fit_design_points(p: &GroupParams) -> Vec<GammaPoint> {
    let n = p.n();
    let mut pts: Vec<GammaPoint> = (0..n)
        .map(|j| GammaPoint::Ray {
            k: j,
            x: SLOPE_EPS.ln(),
        })
        .collect();
    for j in 0..n {
        for &x in &FIT_LOG_RADII {
            pts.push(GammaPoint::Ray { k: j, x });
        }
    }
    pts
}

/// Fit `γ` to a function given on [`fit_design_points`].
pub fn fit_gamma(f: &dyn Fn(GammaPoint) -> Result<C64>, p: &GroupParams, quad: &QuadratureSpec) -> Result<FitResult> {
    let n = p.n();
    let hbar = p.hbar();
    let design = fit_design_points(p);
    let values = design.iter().map(|&z| f(z)).collect::<Result<Vec<_>>>()?;
    if let Some(bad) = values.iter().find(|v| (v.norm() - 1.0).abs() > UNIMODULAR_TOL) {
        return Err(QexpError::Domain(format!(
            "samples are not unimodular (|f| = {})",
            bad.norm()
        )));
    }
    let (slope_vals, grid_vals) = values.split_at(n);
    let grid: Vec<(GammaPoint, C64)> = design[n..].iter().copied().zip(grid_vals.iter().copied()).collect();

    // c_j = slope_j · 2i sin ℏ = A cos((1+j)ℏ) + B sin((1+j)ℏ), γ = (A − iB)/2
    let two_i_sin = C64::new(0.0, 2.0 * hbar.sin());
    let c: Vec<f64> = (0..n)
        .map(|j| {
            let fwd = slope_vals[j];
            let bwd = slope_vals[(j + n / 2) % n];
            ((fwd - bwd) / (2.0 * SLOPE_EPS) * two_i_sin).re
        })
        .collect();
    let (mut saa, mut sab, mut sbb, mut sca, mut scb) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (j, cj) in c.iter().enumerate() {
        let th = (1 + j) as f64 * hbar;
        let (a, b) = (th.cos(), th.sin());
        saa += a * a;
        sab += a * b;
        sbb += b * b;
        sca += cj * a;
        scb += cj * b;
    }
    let det = saa * sbb - sab * sab;
    let big_a = (sca * sbb - scb * sab) / det;
    let big_b = (scb * saa - sca * sab) / det;
    let seed_c = C64::new(big_a, -big_b) / 2.0;

    if seed_c.norm() < 1e-6 {
        let residual = rms(grid.iter().map(|(_, v)| (v - 1.0).norm()));
        let verdict = if residual <= FIT_THRESHOLD {
            FitVerdict::Degenerate
        } else {
            FitVerdict::NotInFamily
        };
        return Ok(FitResult {
            gamma: GammaPoint::Zero,
            residual,
            verdict,
            seed: GammaPoint::Zero,
        });
    }
    let k = p.reduce((seed_c.arg() / hbar).round() as i64);
    let seed = GammaPoint::Ray {
        k,
        x: seed_c.norm().ln(),
    };

    let model = |x: f64| -> Result<Vec<C64>> {
        grid.iter()
            .map(|&(z, v)| Ok(v - fn_eval(p.gamma_mul(GammaPoint::Ray { k, x }, z), p, quad)?))
            .collect()
    };
    let cost = |r: &[C64]| r.iter().map(|e| e.norm_sqr()).sum::<f64>();
    let mut x = seed_c.norm().ln();
    let mut r = model(x)?;
    for _ in 0..30 {
        let dx = 1e-6;
        let rp = model(x + dx)?;
        let rm = model(x - dx)?;
        // residual derivative with respect to x
        let jac: Vec<C64> = rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * dx)).collect();
        let jj: f64 = jac.iter().map(|d| d.norm_sqr()).sum();
        if jj == 0.0 {
            break;
        }
        let jr: f64 = jac.iter().zip(&r).map(|(d, e)| (d.conj() * e).re).sum();
        let mut step = -jr / jj;
        let before = cost(&r);
        let mut accepted = false;
        for _ in 0..20 {
            let trial = model(x + step)?;
            if cost(&trial) <= before {
                x += step;
                r = trial;
                accepted = true;
                break;
            }
            step /= 2.0;
        }
        if !accepted || step.abs() < 1e-13 {
            break;
        }
    }
    let residual = rms(r.iter().map(|e| e.norm()));
    let verdict = if residual <= FIT_THRESHOLD {
        FitVerdict::Member
    } else {
        FitVerdict::NotInFamily
    };
    Ok(FitResult {
        gamma: GammaPoint::Ray { k, x },
        residual,
        verdict,
        seed,
    })
}

fn rms(it: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = it.fold((0.0, 0usize), |(s, n), e| (s + e * e, n + 1));
    if n == 0 {
        0.0
    } else {
        (s / n as f64).sqrt()
    }
}

/// Sampled values of `f` keyed by lattice point, read from CSV rows
/// `k,x,re,im` (a header row is allowed).
#[derive(Debug, Clone, Default)]
pub struct SampleTable {
    values: BTreeMap<(usize, i64), C64>,
}

impl SampleTable {
    fn key(k: usize, x: f64) -> (usize, i64) {
        (k, (x * 1e9).round() as i64)
    }

    pub fn insert(&mut self, z: GammaPoint, v: C64) -> Result<()> {
        match z {
            GammaPoint::Ray { k, x } => {
                self.values.insert(Self::key(k, x), v);
                Ok(())
            }
            GammaPoint::Zero => Err(QexpError::InvalidParameter(
                "samples at zero carry no information".into(),
            )),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn lookup(&self, z: GammaPoint) -> Result<C64> {
        match z {
            GammaPoint::Zero => Ok(C64::new(1.0, 0.0)),
            GammaPoint::Ray { k, x } => self
                .values
                .get(&Self::key(k, x))
                .copied()
                .ok_or_else(|| QexpError::InvalidParameter(format!("no sample at k={k}, x={x}"))),
        }
    }

    pub fn read_csv<R: BufRead>(r: R, p: &GroupParams) -> Result<Self> {
        let mut t = Self::default();
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('k') {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 4 {
                return Err(QexpError::Parse(format!("expected k,x,re,im: {line}")));
            }
            let bad = || QexpError::Parse(format!("bad sample row: {line}"));
            let k: i64 = f[0].parse().map_err(|_| bad())?;
            let x: f64 = f[1].parse().map_err(|_| bad())?;
            let re: f64 = f[2].parse().map_err(|_| bad())?;
            let im: f64 = f[3].parse().map_err(|_| bad())?;
            t.insert(p.point(k, x), C64::new(re, im))?;
        }
        Ok(t)
    }

    /// CSV of `f` on the design points, in the format [`SampleTable::read_csv`] accepts.
    pub fn design_csv(f: &dyn Fn(GammaPoint) -> Result<C64>, p: &GroupParams) -> Result<String> {
        let mut out = String::from("k,x,re,im\n");
        for z in fit_design_points(p) {
            let v = f(z)?;
            if let GammaPoint::Ray { k, x } = z {
                out.push_str(&format!("{k},{x:?},{:?},{:?}\n", v.re, v.im));
            }
        }
        Ok(out)
    }
}
