//! Quaternionic slice calculus.
//!
//! Quaternion arithmetic, the slice form `q = t + r ι`, directional and
//! angular derivatives, S-derivatives with their secant estimates, slice power
//! series, and a harness that runs all of the checks over a grid.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diff;
pub mod error;
pub mod functions;
pub mod harness;
pub mod quaternion;
pub mod sampling;
pub mod sderiv;
pub mod series;
pub mod slice;

pub use diff::{Domain, PartialDerivatives, QFunction, ResidualVector};
pub use error::{Error, Result};
pub use quaternion::{Quaternion, Tolerance};
pub use sderiv::{Estimate, SDerivative};
pub use series::PowerSeries;
pub use slice::{SliceForm, UnitImaginary};
