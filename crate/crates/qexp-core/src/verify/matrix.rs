// SPDX-License-Identifier: MIT OR Apache-2.0

//! Matrix-valued solutions `f(z) = F_N(M z)` for a normal invertible `M`
//! with spectrum on `Γ`.

use nalgebra::DMatrix;

use crate::domain::{nearest_gamma_point, GammaPoint, GroupParams, C64};
use crate::error::{QexpError, Result};
use crate::lattice::{build_r, build_s, Lattice, QExp, StateVector};
use crate::quadrature::QuadratureSpec;
use crate::report::ResidualReport;
use crate::special::fn_eval;
use crate::verify::closure::{closure_function, ClosureForm};

/// Largest accepted `‖M*M − MM*‖_F / max(1, ‖M‖_F²)`.
pub const NORMALITY_TOL: f64 = 1e-12;
/// Angular tolerance for eigenvalues on a ray of `Γ`.
pub const SPECTRUM_TOL: f64 = 1e-9;

/// A normal matrix diagonalized as `M = U diag(λ) U*`.
#[derive(Debug, Clone)]
pub struct NormalMatrix {
    pub unitary: DMatrix<C64>,
    pub eigenvalues: Vec<GammaPoint>,
}

impl NormalMatrix {
    pub fn new(m: &DMatrix<C64>, p: &GroupParams) -> Result<Self> {
        let d = m.nrows();
        if d == 0 || d != m.ncols() {
            return Err(QexpError::InvalidParameter(
                "matrix must be square and non-empty".into(),
            ));
        }
        let frob = |a: &DMatrix<C64>| a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let scale = frob(m).powi(2).max(1.0);
        let defect = frob(&(m.adjoint() * m - m * m.adjoint())) / scale;
        if defect > NORMALITY_TOL {
            return Err(QexpError::Domain(format!("matrix is not normal (defect {defect:.2e})")));
        }
        let (unitary, tri) = nalgebra::linalg::Schur::new(m.clone()).unpack();
        let eigenvalues = (0..d)
            .map(|i| {
                let z = tri[(i, i)];
                match nearest_gamma_point(z, p, SPECTRUM_TOL)? {
                    GammaPoint::Zero => Err(QexpError::Domain("matrix is not invertible".into())),
                    g => Ok(g),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { unitary, eigenvalues })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `f(z) = F_N(M z) = U diag(F_N(λ_i z)) U*`.
    pub fn q_exp(&self, z: GammaPoint, p: &GroupParams, quad: &QuadratureSpec) -> Result<DMatrix<C64>> {
        let d = self.dim();
        let mut diag = DMatrix::zeros(d, d);
        for (i, &l) in self.eigenvalues.iter().enumerate() {
            diag[(i, i)] = fn_eval(p.gamma_mul(l, z), p, quad)?;
        }
        Ok(&self.unitary * diag * self.unitary.adjoint())
    }

    /// Change of basis on a tensor state `∑_a e_a ⊗ ψ_a`: `(U* ⊗ I)` when
    /// `adjoint`, else `(U ⊗ I)`.
    fn rotate(&self, psi: &[StateVector], adjoint: bool) -> Vec<StateVector> {
        let d = self.dim();
        (0..d)
            .map(|i| {
                let mut data = vec![C64::new(0.0, 0.0); psi[0].data.len()];
                for (a, comp) in psi.iter().enumerate() {
                    let c = if adjoint {
                        self.unitary[(a, i)].conj()
                    } else {
                        self.unitary[(i, a)]
                    };
                    for (o, v) in data.iter_mut().zip(&comp.data) {
                        *o += c * v;
                    }
                }
                psi[0].with_data(data)
            })
            .collect()
    }
}

fn tensor_norm(psi: &[StateVector]) -> f64 {
    psi.iter().map(|s| s.norm().powi(2)).sum::<f64>().sqrt()
}

fn tensor_distance(a: &[StateVector], b: &[StateVector]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.distance(y).powi(2)).sum::<f64>().sqrt()
}

/// `‖f(R′) f(S′) Ψ − f(R′ +̇ S′) Ψ‖ / ‖Ψ‖` with `R′ = M ⊗ R`, `S′ = M ⊗ S`,
/// on the tensor state `Ψ = ∑_a e_a ⊗ psi[a]`.
pub fn tensor_identity_residual(
    mat: &NormalMatrix,
    lat: &Lattice,
    psi: &[StateVector],
    quad: &QuadratureSpec,
) -> Result<f64> {
    if psi.len() != mat.dim() {
        return Err(QexpError::InvalidParameter(format!(
            "tensor state needs {} components, got {}",
            mat.dim(),
            psi.len()
        )));
    }
    let p = *lat.params();
    let (r, s) = (build_r(lat), build_s(lat));
    let rotated = mat.rotate(psi, true);
    let mut lhs = Vec::with_capacity(mat.dim());
    let mut rhs = Vec::with_capacity(mat.dim());
    for (phi, &l) in rotated.iter().zip(&mat.eigenvalues) {
        // M ⊗ X acts as λ_i X on the i-th eigencomponent
        let f = QExp::scaled(p, *quad, l);
        lhs.push(r.function(&f)?.apply(lat, &s.function(&f)?.apply(lat, phi)));
        rhs.push(closure_function(lat, ClosureForm::SForm, &f, quad)?.apply(lat, phi));
    }
    let lhs = mat.rotate(&lhs, false);
    let rhs = mat.rotate(&rhs, false);
    Ok(tensor_distance(&lhs, &rhs) / tensor_norm(psi))
}

/// Commutativity of `f(z) = F_N(M z)` over all pairs of `samples`, and,
/// when a lattice with a tensor state is supplied, the exponential identity
/// for `(M ⊗ R, M ⊗ S)`.
pub fn matrix_solution_check(
    m: &DMatrix<C64>,
    p: &GroupParams,
    quad: &QuadratureSpec,
    samples: &[GammaPoint],
    tensor: Option<(&Lattice, &[StateVector])>,
) -> Result<ResidualReport> {
    let mat = NormalMatrix::new(m, p)?;
    let mut report = ResidualReport::new("matrix_solution");
    report.meta.n = p.n();
    let values = samples
        .iter()
        .map(|&z| mat.q_exp(z, p, quad))
        .collect::<Result<Vec<_>>>()?;
    let mut comm: f64 = 0.0;
    let mut unitarity: f64 = 0.0;
    let id = DMatrix::<C64>::identity(mat.dim(), mat.dim());
    for (i, a) in values.iter().enumerate() {
        unitarity = unitarity.max((a.adjoint() * a - &id).iter().map(|z| z.norm()).fold(0.0, f64::max));
        for b in &values[i + 1..] {
            let c = a * b - b * a;
            comm = comm.max(c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
        }
    }
    report.insert("commutativity", comm);
    report.tolerance("commutativity", 1e-10);
    report.insert("unitarity", unitarity);
    report.tolerance("unitarity", 1e-10);
    if let Some((lat, psi)) = tensor {
        let spec = lat.spec();
        report.meta.m = spec.m;
        report.meta.h = spec.h;
        report.meta.kappa = spec.kappa;
        report.insert("tensor_identity", tensor_identity_residual(&mat, lat, psi, quad)?);
    }
    Ok(report)
}
