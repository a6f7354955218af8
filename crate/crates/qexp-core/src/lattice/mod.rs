// SPDX-License-Identifier: MIT OR Apache-2.0

//! A finite model of `L²(Γ, dγ)`: `N` phases times a periodic grid in
//! `x = log r`, with the pair `(R, S)` and its functional calculus.

mod operator;
mod pairs;
mod spec;
mod state;

pub use operator::*;
pub use pairs::*;
pub use spec::*;
pub use state::*;
