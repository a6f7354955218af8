// SPDX-License-Identifier: MIT OR Apache-2.0

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::domain::{GroupParams, C64};
use crate::error::{QexpError, Result};
use crate::weyl::{columns, f_vector, g_vector, PhaseMatrix};

/// A periodic phase × log-radius grid: `N` phases, `M` radial points
/// `x_j = x0 + j h`, period `L = M h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub params: GroupParams,
    pub m: usize,
    pub h: f64,
    pub x0: f64,
    /// `ℏ / h` when it is an integer, otherwise 0.
    pub kappa: usize,
}

impl LatticeSpec {
    /// Commensurate grid `h = ℏ/κ`, centred at `x = 0`.
    pub fn new(params: GroupParams, m: usize, kappa: usize) -> Result<Self> {
        if kappa < 1 {
            return Err(QexpError::InvalidParameter("kappa must be at least 1".into()));
        }
        let h = params.hbar() / kappa as f64;
        let mut s = Self::with_grid(params, m, h, -(m as f64) * h / 2.0)?;
        s.kappa = kappa;
        Ok(s)
    }

    pub fn with_grid(params: GroupParams, m: usize, h: f64, x0: f64) -> Result<Self> {
        if params.n() < 6 || params.n() % 2 != 0 {
            return Err(QexpError::InvalidParameter(format!(
                "lattice needs even N >= 6, got {}",
                params.n()
            )));
        }
        if m < 4 || !m.is_power_of_two() {
            return Err(QexpError::InvalidParameter(format!(
                "M must be a power of two >= 4, got {m}"
            )));
        }
        if !(h > 0.0) || !x0.is_finite() {
            return Err(QexpError::InvalidParameter(format!("bad grid h={h}, x0={x0}")));
        }
        let ratio = params.hbar() / h;
        let kappa = if (ratio - ratio.round()).abs() < 1e-9 {
            ratio.round() as usize
        } else {
            0
        };
        Ok(Self {
            params,
            m,
            h,
            x0,
            kappa,
        })
    }

    pub fn n(&self) -> usize {
        self.params.n()
    }

    pub fn len(&self) -> usize {
        self.n() * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.h
    }

    /// Box length `L = M h`.
    pub fn length(&self) -> f64 {
        self.m as f64 * self.h
    }

    /// Signed frequency index of DFT bin `b` (FFT ordering).
    pub fn freq_index(&self, b: usize) -> i64 {
        if b < self.m / 2 {
            b as i64
        } else {
            b as i64 - self.m as i64
        }
    }

    /// Momentum `2π m̃ / L` of DFT bin `b`.
    pub fn momentum(&self, b: usize) -> f64 {
        2.0 * PI * self.freq_index(b) as f64 / self.length()
    }

    /// Largest momentum `π / h`.
    pub fn p_max(&self) -> f64 {
        PI / self.h
    }

    /// Bin `b` lies in the central half of the momentum grid.
    pub fn central_momentum(&self, b: usize) -> bool {
        (self.freq_index(b).unsigned_abs() as usize) < self.m / 4
    }

    /// Point `j` lies in the central half of the position grid.
    pub fn central_position(&self, j: usize) -> bool {
        let c = self.m as f64 / 2.0;
        (j as f64 - c).abs() < self.m as f64 / 4.0
    }

    /// One refinement step for convergence studies: `h → h/2` with the box
    /// doubled (`M → 4M`), so the relative momentum content of a fixed
    /// packet shrinks and its relative position support shrinks too.
    pub fn refined(&self) -> Result<Self> {
        let mut s = Self::with_grid(self.params, 4 * self.m, self.h / 2.0, 2.0 * self.x0)?;
        if self.kappa > 0 {
            s.kappa = 2 * self.kappa;
        }
        Ok(s)
    }

    /// `h → h/2` at fixed box length (`M → 2M`).
    pub fn halved_h(&self) -> Result<Self> {
        let mut s = Self::with_grid(self.params, 2 * self.m, self.h / 2.0, self.x0)?;
        if self.kappa > 0 {
            s.kappa = 2 * self.kappa;
        }
        Ok(s)
    }

    /// Same spacing, box doubled (`M → 2M`).
    pub fn doubled_box(&self) -> Result<Self> {
        let mut s = Self::with_grid(self.params, 2 * self.m, self.h, 2.0 * self.x0)?;
        s.kappa = self.kappa;
        Ok(s)
    }
}

/// The phase part of an eigenframe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseBasis {
    /// `e_k`: diagonalizes `Phase R`.
    Standard,
    /// `f_l`: diagonalizes `Phase S`.
    Fourier,
    /// `g_m`: diagonalizes `Phase T`.
    Chirp,
}

/// The radial part of an eigenframe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RadialBasis {
    /// Point evaluations at `x_j`.
    Position,
    /// Plane waves `e^{i p x}` (discrete Fourier basis).
    Momentum,
    /// `e^{-i s x²/(2ℏ)} e^{i p x}`, `s = ±1`: the frame in which
    /// `e^{x + s ℏ P}` is diagonal.
    ChirpedMomentum(i8),
}

/// An orthonormal eigenframe on the lattice: `phase ⊗ radial`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    pub phase: PhaseBasis,
    pub radial: RadialBasis,
}

impl Frame {
    pub const POSITION: Frame = Frame {
        phase: PhaseBasis::Standard,
        radial: RadialBasis::Position,
    };
    pub const PHASE_FOURIER: Frame = Frame {
        phase: PhaseBasis::Fourier,
        radial: RadialBasis::Momentum,
    };
    pub const CHIRP: Frame = Frame {
        phase: PhaseBasis::Chirp,
        radial: RadialBasis::ChirpedMomentum(1),
    };

    /// Radial index `b` is in the central half of this frame's radial grid.
    pub fn central(&self, spec: &LatticeSpec, b: usize) -> bool {
        match self.radial {
            RadialBasis::Position => spec.central_position(b),
            _ => spec.central_momentum(b),
        }
    }
}

/// A lattice together with its FFT plans, phase bases and chirps.
#[derive(Clone)]
pub struct Lattice {
    spec: LatticeSpec,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    f_basis: PhaseMatrix,
    g_basis: PhaseMatrix,
    chirp_plus: Vec<C64>,
}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lattice").field("spec", &self.spec).finish()
    }
}

impl Lattice {
    pub fn new(spec: LatticeSpec) -> Self {
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(spec.m);
        let ifft = planner.plan_fft_inverse(spec.m);
        let p = &spec.params;
        let n = p.n();
        let f_basis = columns(&(0..n).map(|l| f_vector(l, p)).collect::<Vec<_>>());
        let g_basis = columns(&(0..n).map(|m| g_vector(m, p)).collect::<Vec<_>>());
        let chirp_plus = (0..spec.m)
            .map(|j| {
                let x = spec.x(j);
                C64::from_polar(1.0, x * x / (2.0 * p.hbar()))
            })
            .collect();
        Self {
            spec,
            fft,
            ifft,
            f_basis,
            g_basis,
            chirp_plus,
        }
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn params(&self) -> &GroupParams {
        &self.spec.params
    }

    fn phase_matrix(&self, b: PhaseBasis) -> Option<&PhaseMatrix> {
        match b {
            PhaseBasis::Standard => None,
            PhaseBasis::Fourier => Some(&self.f_basis),
            PhaseBasis::Chirp => Some(&self.g_basis),
        }
    }

    /// Apply `B*` (`adjoint = true`) or `B` on the phase index of row-major
    /// `N × M` data.
    fn phase_transform(&self, b: PhaseBasis, data: &[C64], adjoint: bool) -> Vec<C64> {
        let Some(mat) = self.phase_matrix(b) else {
            return data.to_vec();
        };
        let (n, m) = (self.spec.n(), self.spec.m);
        let mut out = vec![C64::new(0.0, 0.0); n * m];
        for a in 0..n {
            let row = &mut out[a * m..(a + 1) * m];
            for k in 0..n {
                let c = if adjoint { mat[(k, a)].conj() } else { mat[(a, k)] };
                let src = &data[k * m..(k + 1) * m];
                for (o, s) in row.iter_mut().zip(src) {
                    *o += c * s;
                }
            }
        }
        out
    }

    fn radial_forward(&self, r: RadialBasis, row: &mut [C64]) {
        let scale = 1.0 / (self.spec.m as f64).sqrt();
        match r {
            RadialBasis::Position => {}
            RadialBasis::Momentum => {
                self.fft.process(row);
                row.iter_mut().for_each(|z| *z *= scale);
            }
            RadialBasis::ChirpedMomentum(s) => {
                for (z, c) in row.iter_mut().zip(&self.chirp_plus) {
                    *z *= if s > 0 { *c } else { c.conj() };
                }
                self.fft.process(row);
                row.iter_mut().for_each(|z| *z *= scale);
            }
        }
    }

    fn radial_inverse(&self, r: RadialBasis, row: &mut [C64]) {
        let scale = 1.0 / (self.spec.m as f64).sqrt();
        match r {
            RadialBasis::Position => {}
            RadialBasis::Momentum => {
                self.ifft.process(row);
                row.iter_mut().for_each(|z| *z *= scale);
            }
            RadialBasis::ChirpedMomentum(s) => {
                self.ifft.process(row);
                for (z, c) in row.iter_mut().zip(&self.chirp_plus) {
                    *z *= scale * if s > 0 { c.conj() } else { *c };
                }
            }
        }
    }

    /// Coefficients of `data` in `frame` (a unitary change of basis).
    pub fn to_frame(&self, frame: Frame, data: &[C64]) -> Vec<C64> {
        let mut c = self.phase_transform(frame.phase, data, true);
        for row in c.chunks_mut(self.spec.m) {
            self.radial_forward(frame.radial, row);
        }
        c
    }

    /// Inverse of [`Lattice::to_frame`].
    pub fn from_frame(&self, frame: Frame, coeffs: &[C64]) -> Vec<C64> {
        let mut c = coeffs.to_vec();
        for row in c.chunks_mut(self.spec.m) {
            self.radial_inverse(frame.radial, row);
        }
        self.phase_transform(frame.phase, &c, false)
    }
}
