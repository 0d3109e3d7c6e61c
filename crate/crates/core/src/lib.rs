//! Numerical laboratory for sparse bilinear forms on ℤ, random discrete
//! Hilbert transforms along sets of density `|n|^{-α}`, Muckenhoupt
//! characteristics on shifted dyadic grids and oscillatory singular
//! integrals with polynomial phases.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod fft;
pub mod grid;
pub mod hilbert;
pub mod interpolation;
pub mod io;
pub mod oscillatory;
pub mod random_set;
pub mod scale;
pub mod sparse;
pub mod stats;
pub mod weights;

pub use error::{LabError, Result};
pub use grid::{DyadicCube, GridWindow, Signal};
