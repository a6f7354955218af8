// SPDX-License-Identifier: MIT OR Apache-2.0

//! Residual suites for the operator identities on the lattice.

mod closure;
mod fit;
mod matrix;
mod normality;
mod weak;

pub use closure::*;
pub use fit::*;
pub use matrix::*;
pub use normality::*;
pub use weak::*;
