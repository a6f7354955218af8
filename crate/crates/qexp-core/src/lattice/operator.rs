// SPDX-License-Identifier: MIT OR Apache-2.0

//! Normal operators on the lattice described by an eigenframe and a symbol,
//! so that functional calculus is a diagonal multiplication.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::spec::{Frame, Lattice, LatticeSpec, RadialBasis};
use super::state::StateVector;
use crate::domain::{nearest_gamma_point, GammaPoint, GroupParams, C64};
use crate::error::{QexpError, Result};
use crate::quadrature::QuadratureSpec;
use crate::special::fn_eval;

/// Largest dimension for which a dense eigendecomposition is allowed.
pub const DENSE_LIMIT: usize = 1024;

/// A scalar function on `Γ̄`, applied to operator symbols.
pub trait SpectralFunction: Send + Sync + fmt::Debug {
    fn eval(&self, z: GammaPoint) -> Result<C64>;
}

/// `z ↦ F_N(γ z)`.
#[derive(Debug, Clone, Copy)]
pub struct QExp {
    pub params: GroupParams,
    pub quad: QuadratureSpec,
    pub scale: GammaPoint,
}

impl QExp {
    pub fn new(params: GroupParams, quad: QuadratureSpec) -> Self {
        Self {
            params,
            quad,
            scale: GammaPoint::IDENTITY,
        }
    }

    pub fn scaled(params: GroupParams, quad: QuadratureSpec, scale: GammaPoint) -> Self {
        Self { params, quad, scale }
    }
}

impl SpectralFunction for QExp {
    fn eval(&self, z: GammaPoint) -> Result<C64> {
        fn_eval(self.params.gamma_mul(self.scale, z), &self.params, &self.quad)
    }
}

/// The constant function.
#[derive(Debug, Clone, Copy)]
pub struct Constant(pub C64);

impl SpectralFunction for Constant {
    fn eval(&self, _z: GammaPoint) -> Result<C64> {
        Ok(self.0)
    }
}

/// `z ↦ z` (unbounded).
#[derive(Debug, Clone, Copy)]
pub struct Coordinate(pub GroupParams);

impl SpectralFunction for Coordinate {
    fn eval(&self, z: GammaPoint) -> Result<C64> {
        Ok(self.0.to_complex(z))
    }
}

/// `z ↦ z̄` (unbounded).
#[derive(Debug, Clone, Copy)]
pub struct ConjCoordinate(pub GroupParams);

impl SpectralFunction for ConjCoordinate {
    fn eval(&self, z: GammaPoint) -> Result<C64> {
        Ok(self.0.to_complex(z).conj())
    }
}

/// `z ↦ |z|^{it} = e^{itx}`, zero at zero.
#[derive(Debug, Clone, Copy)]
pub struct ModulusPower(pub f64);

impl SpectralFunction for ModulusPower {
    fn eval(&self, z: GammaPoint) -> Result<C64> {
        Ok(match z {
            GammaPoint::Zero => C64::new(0.0, 0.0),
            GammaPoint::Ray { x, .. } => C64::from_polar(1.0, self.0 * x),
        })
    }
}

/// A named closure.
pub struct FnSpectral<F> {
    pub name: &'static str,
    pub f: F,
}

impl<F> fmt::Debug for FnSpectral<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnSpectral({})", self.name)
    }
}

impl<F: Fn(GammaPoint) -> Result<C64> + Send + Sync> SpectralFunction for FnSpectral<F> {
    fn eval(&self, z: GammaPoint) -> Result<C64> {
        (self.f)(z)
    }
}

/// A diagonal multiplication in some frame, `W diag(values) W*`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMultiplier {
    pub frame: Frame,
    pub values: Vec<C64>,
}

impl SpectralMultiplier {
    pub fn apply_raw(&self, lat: &Lattice, data: &[C64]) -> Vec<C64> {
        let mut c = lat.to_frame(self.frame, data);
        c.iter_mut().zip(&self.values).for_each(|(a, v)| *a *= v);
        lat.from_frame(self.frame, &c)
    }

    pub fn apply(&self, lat: &Lattice, psi: &StateVector) -> StateVector {
        psi.with_data(self.apply_raw(lat, &psi.data))
    }

    pub fn adjoint(&self) -> SpectralMultiplier {
        SpectralMultiplier {
            frame: self.frame,
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    /// Product with another multiplier in the same frame.
    pub fn compose(&self, other: &SpectralMultiplier) -> Result<SpectralMultiplier> {
        if self.frame != other.frame {
            return Err(QexpError::Unsupported("multipliers in different frames".into()));
        }
        Ok(SpectralMultiplier {
            frame: self.frame,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }
}

/// A dense normal matrix with its unitary eigendecomposition.
#[derive(Debug, Clone)]
pub struct DenseNormal {
    pub matrix: DMatrix<C64>,
    pub unitary: DMatrix<C64>,
    pub eigenvalues: Vec<C64>,
    pub symbol: Vec<GammaPoint>,
}

impl DenseNormal {
    /// Diagonalize a normal matrix whose spectrum lies on `Γ`.
    ///
    /// The complex Schur form of a normal matrix is diagonal; the
    /// off-diagonal remainder is checked against `tol · ‖A‖`.
    pub fn new(matrix: DMatrix<C64>, params: &GroupParams, tol: f64) -> Result<Self> {
        let n = matrix.nrows();
        if n != matrix.ncols() {
            return Err(QexpError::InvalidParameter("matrix must be square".into()));
        }
        if n > DENSE_LIMIT {
            return Err(QexpError::Unsupported(format!(
                "dense calculus is limited to dimension {DENSE_LIMIT}, got {n}"
            )));
        }
        let scale = matrix
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
            .max(f64::MIN_POSITIVE);
        let comm = matrix.adjoint() * &matrix - &matrix * matrix.adjoint();
        let defect = comm.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / (scale * scale);
        if defect > tol {
            return Err(QexpError::Domain(format!("matrix is not normal (defect {defect:.2e})")));
        }
        let (unitary, tri) = nalgebra::linalg::Schur::new(matrix.clone()).unpack();
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += tri[(i, j)].norm_sqr();
                }
            }
        }
        if off.sqrt() > tol.sqrt() * scale {
            return Err(QexpError::Domain(format!(
                "Schur form is not diagonal (off-diagonal {:.2e})",
                off.sqrt() / scale
            )));
        }
        let eigenvalues: Vec<C64> = (0..n).map(|i| tri[(i, i)]).collect();
        let symbol = eigenvalues
            .iter()
            .map(|&z| nearest_gamma_point(z, params, 1e-6))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            matrix,
            unitary,
            eigenvalues,
            symbol,
        })
    }

    fn apply_values(&self, values: &[C64], data: &[C64]) -> Vec<C64> {
        let v = DVector::from_column_slice(data);
        let mut c = self.unitary.adjoint() * v;
        c.iter_mut().zip(values).for_each(|(a, f)| *a *= f);
        (&self.unitary * c).as_slice().to_vec()
    }
}

/// Normal operator descriptors with exact functional calculus.
#[derive(Debug, Clone)]
pub enum StructuredOperator {
    /// Multiplication by a `Γ`-valued function of `(k, x_j)`.
    PositionDiagonal { symbol: Vec<GammaPoint> },
    /// Diagonal in `f_l ⊗ e^{ipx}`.
    PhaseFourierMomentumDiagonal { symbol: Vec<GammaPoint> },
    /// Diagonal in an arbitrary lattice frame.
    ConjugatedDiagonal { frame: Frame, symbol: Vec<GammaPoint> },
    /// `U* · inner · U` for a unitary multiplier `U`.
    Conjugated {
        by: Arc<SpectralMultiplier>,
        inner: Box<StructuredOperator>,
    },
    /// Product of powers `A_1^{e_1} ⋯ A_r^{e_r}` of diagonal operators, applied
    /// right to left. Not a diagonal descriptor: only direct application.
    Composition { factors: Vec<(StructuredOperator, i32)> },
    /// Small dense matrix with its eigendecomposition.
    DenseNormal(Box<DenseNormal>),
}

/// How an unbounded symbol is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Apply the symbol everywhere.
    None,
    /// Drop frame components outside the central half of the radial grid,
    /// i.e. apply the operator on the band-limited subspace.
    CentralHalf,
    /// Keep radial positions with `|x - x_mid| < x` and momenta with
    /// `|p| < p`, in absolute units. Used to hold the band fixed while a grid
    /// is refined.
    Window { x: f64, p: f64 },
}

impl Truncation {
    /// The central half of `spec` as an absolute window.
    pub fn window_of(spec: &LatticeSpec) -> Truncation {
        Truncation::Window {
            x: spec.length() / 4.0,
            p: spec.p_max() / 2.0,
        }
    }

    /// The window for a grid refined from `base`. The momentum band stays
    /// that of `base`; the position window may grow by at most a quarter.
    /// Products like `e^{x} e^{ℏP}` amplify roundoff by `e^{x_max + ℏ p_max}`,
    /// so a window that follows the growing box loses more to noise than it
    /// gains in truncation error.
    pub fn refinement(base: &LatticeSpec, spec: &LatticeSpec) -> Truncation {
        let x = (spec.length() / 4.0).min(1.25 * base.length() / 4.0);
        Truncation::Window {
            x,
            p: base.p_max() / 2.0,
        }
    }

    /// Whether radial index `b` of `frame` survives the truncation.
    pub fn keeps(&self, frame: Frame, spec: &LatticeSpec, b: usize) -> bool {
        match *self {
            Truncation::None => true,
            Truncation::CentralHalf => frame.central(spec, b),
            Truncation::Window { x, p } => match frame.radial {
                RadialBasis::Position => (spec.x(b) - (spec.x0 + spec.length() / 2.0)).abs() < x - 1e-9 * spec.h,
                _ => spec.momentum(b).abs() < p - 1e-9 / spec.length(),
            },
        }
    }
}

/// A bounded function of a structured operator, precomputed for repeated
/// application: `U_1* ⋯ U_r* core U_r ⋯ U_1`.
#[derive(Debug, Clone)]
pub struct OperatorFunction {
    pub conjugators: Vec<Arc<SpectralMultiplier>>,
    pub core: Core,
}

#[derive(Debug, Clone)]
pub enum Core {
    Diagonal(SpectralMultiplier),
    Dense { op: Box<DenseNormal>, values: Vec<C64> },
}

impl OperatorFunction {
    pub fn apply(&self, lat: &Lattice, psi: &StateVector) -> StateVector {
        let mut d = psi.data.clone();
        for u in &self.conjugators {
            d = u.apply_raw(lat, &d);
        }
        d = match &self.core {
            Core::Diagonal(m) => m.apply_raw(lat, &d),
            Core::Dense { op, values } => op.apply_values(values, &d),
        };
        for u in self.conjugators.iter().rev() {
            d = u.adjoint().apply_raw(lat, &d);
        }
        psi.with_data(d)
    }

    /// The adjoint function `f̄(A)`.
    pub fn adjoint(&self) -> OperatorFunction {
        let core = match &self.core {
            Core::Diagonal(m) => Core::Diagonal(m.adjoint()),
            Core::Dense { op, values } => Core::Dense {
                op: op.clone(),
                values: values.iter().map(|v| v.conj()).collect(),
            },
        };
        OperatorFunction {
            conjugators: self.conjugators.clone(),
            core,
        }
    }

    /// The core multiplier when there are no conjugators.
    pub fn as_multiplier(&self) -> Option<&SpectralMultiplier> {
        match (&self.core, self.conjugators.is_empty()) {
            (Core::Diagonal(m), true) => Some(m),
            _ => None,
        }
    }
}

fn eval_symbol(symbol: &[GammaPoint], f: &dyn SpectralFunction) -> Result<Vec<C64>> {
    symbol.par_iter().map(|&z| f.eval(z)).collect()
}

impl StructuredOperator {
    /// Frame and symbol of a diagonal descriptor.
    pub fn diagonal(&self) -> Option<(Frame, &[GammaPoint])> {
        match self {
            StructuredOperator::PositionDiagonal { symbol } => Some((Frame::POSITION, symbol)),
            StructuredOperator::PhaseFourierMomentumDiagonal { symbol } => Some((Frame::PHASE_FOURIER, symbol)),
            StructuredOperator::ConjugatedDiagonal { frame, symbol } => Some((*frame, symbol)),
            _ => None,
        }
    }

    /// Precompute `f(op)`.
    pub fn function(&self, f: &dyn SpectralFunction) -> Result<OperatorFunction> {
        match self {
            StructuredOperator::Conjugated { by, inner } => {
                let mut g = inner.function(f)?;
                g.conjugators.insert(0, by.clone());
                Ok(g)
            }
            StructuredOperator::Composition { .. } => Err(QexpError::Unsupported(
                "functional calculus of a composition; use a diagonal descriptor".into(),
            )),
            StructuredOperator::DenseNormal(d) => Ok(OperatorFunction {
                conjugators: vec![],
                core: Core::Dense {
                    op: d.clone(),
                    values: eval_symbol(&d.symbol, f)?,
                },
            }),
            _ => {
                let (frame, symbol) = self.diagonal().expect("diagonal descriptor");
                Ok(OperatorFunction {
                    conjugators: vec![],
                    core: Core::Diagonal(SpectralMultiplier {
                        frame,
                        values: eval_symbol(symbol, f)?,
                    }),
                })
            }
        }
    }

    /// The multiplier `f(op)` of a diagonal descriptor.
    pub fn multiplier(&self, f: &dyn SpectralFunction) -> Result<SpectralMultiplier> {
        let (frame, symbol) = self
            .diagonal()
            .ok_or_else(|| QexpError::Unsupported("not a diagonal descriptor".into()))?;
        Ok(SpectralMultiplier {
            frame,
            values: eval_symbol(symbol, f)?,
        })
    }

    /// Apply the operator itself (its coordinate function), optionally on the
    /// band-limited subspace only.
    pub fn apply(&self, lat: &Lattice, psi: &StateVector, trunc: Truncation) -> Result<StateVector> {
        self.apply_power(lat, psi, 1, trunc)
    }

    /// Apply `op^e` for an integer `e` (negative powers need a trivial kernel).
    pub fn apply_power(&self, lat: &Lattice, psi: &StateVector, e: i32, trunc: Truncation) -> Result<StateVector> {
        let p = *lat.params();
        match self {
            StructuredOperator::Conjugated { by, inner } => {
                let v = by.apply(lat, psi);
                let w = inner.apply_power(lat, &v, e, trunc)?;
                Ok(by.adjoint().apply(lat, &w))
            }
            StructuredOperator::Composition { factors } => {
                let mut v = psi.clone();
                for (op, pow) in factors.iter().rev() {
                    v = op.apply_power(lat, &v, pow * e, trunc)?;
                }
                Ok(v)
            }
            StructuredOperator::DenseNormal(d) => {
                let values: Vec<C64> = d.eigenvalues.iter().map(|z| z.powi(e)).collect();
                Ok(psi.with_data(d.apply_values(&values, &psi.data)))
            }
            _ => {
                let (frame, symbol) = self.diagonal().expect("diagonal descriptor");
                let spec = lat.spec();
                let mut values = Vec::with_capacity(symbol.len());
                for (i, z) in symbol.iter().enumerate() {
                    let keep = trunc.keeps(frame, spec, i % spec.m);
                    let v = match (*z, keep) {
                        (_, false) => C64::new(0.0, 0.0),
                        (GammaPoint::Zero, true) if e < 0 => {
                            return Err(QexpError::Domain("negative power of an operator with kernel".into()))
                        }
                        (z, true) => p.to_complex(z).powi(e),
                    };
                    values.push(v);
                }
                Ok(SpectralMultiplier { frame, values }.apply(lat, psi))
            }
        }
    }

    /// Dense matrix of the operator on a small lattice (columns are images of
    /// the unit vectors), for oracle comparisons.
    pub fn to_dense(&self, lat: &Lattice, trunc: Truncation) -> Result<DMatrix<C64>> {
        let spec = lat.spec();
        let dim = spec.len();
        if dim > DENSE_LIMIT {
            return Err(QexpError::Unsupported(format!("dimension {dim} above {DENSE_LIMIT}")));
        }
        let mut out = DMatrix::zeros(dim, dim);
        let mut e = StateVector::zeros(spec);
        for c in 0..dim {
            e.data.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            e.data[c] = C64::new(1.0, 0.0);
            let col = self.apply(lat, &e, trunc)?;
            for r in 0..dim {
                out[(r, c)] = col.data[r];
            }
        }
        Ok(out)
    }
}

/// `f(op) ψ`: transform to the operator's eigenframe, multiply by `f` of the
/// symbol, transform back.
pub fn apply_function(
    lat: &Lattice,
    op: &StructuredOperator,
    f: &dyn SpectralFunction,
    psi: &StateVector,
) -> Result<StateVector> {
    Ok(op.function(f)?.apply(lat, psi))
}
