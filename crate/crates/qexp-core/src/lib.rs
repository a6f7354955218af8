// SPDX-License-Identifier: MIT OR Apache-2.0

//! The quantum exponential function `F_N` at the even root of unity
//! `q = e^{2πi/N}`, a lattice model of the Schrödinger pair `(R, S)` on
//! `L²(Γ)`, and residual checks for the operator identities built from them.

pub mod domain;
pub mod error;
pub mod gauss;
pub mod lattice;
pub mod quadrature;
pub mod report;
pub mod special;
pub mod verify;
pub mod weyl;

pub use domain::{GammaPoint, GroupParams, Region, C64};
pub use error::{QexpError, Result};
pub use lattice::{Lattice, LatticeSpec, StateVector, StructuredOperator, Truncation};
pub use quadrature::QuadratureSpec;
pub use report::{ResidualReport, RunMeta};
pub use special::{f_o, fn_eval};
