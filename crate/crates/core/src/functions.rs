//! Stock quaternion functions used by the catalog and the tests.

use crate::diff::{partial_exact_pow, Axis, Domain, PartialDerivatives, QFunction};
use crate::quaternion::Quaternion;
use crate::slice::UnitImaginary;

pub fn constant(c: Quaternion) -> QFunction {
    QFunction::new(format!("const({c})"), Domain::Whole, move |_| c)
        .with_exact_partials(|_| PartialDerivatives::default())
        .slice_regular(true)
}

/// `q ↦ q^n`.
pub fn power(n: u32) -> QFunction {
    QFunction::new(format!("pow{n}"), Domain::Whole, move |q: Quaternion| q.powi(n))
        .with_exact_partials(move |q| PartialDerivatives::from_fn(|axis| partial_exact_pow(n, q, axis)))
        .slice_regular(true)
}

/// `q ↦ ι(q)`, the imaginary direction of `q`; defined off the real axis.
pub fn iota() -> QFunction {
    QFunction::new("iota", Domain::NonReal, |q: Quaternion| match UnitImaginary::new(q) {
        Ok(u) => u.axis(),
        Err(_) => Quaternion::ZERO,
    })
    .with_exact_partials(|q: Quaternion| {
        let r = q.vector_norm();
        let u = q.vector().scale(1.0 / r);
        // ∂ι/∂x_e = (e - (x_e / r) ι) / r
        PartialDerivatives::from_fn(|axis| match axis {
            Axis::T => Quaternion::ZERO,
            _ => (axis.unit() - u.scale(u.dot(axis.unit()))).scale(1.0 / r),
        })
    })
    .slice_regular(true)
}

/// `q ↦ q a + b`.
pub fn affine(a: Quaternion, b: Quaternion) -> QFunction {
    QFunction::new(format!("affine(a={a},b={b})"), Domain::Whole, move |q: Quaternion| q * a + b)
        .with_exact_partials(move |_| PartialDerivatives::from_fn(|axis| axis.unit() * a))
        .slice_regular(true)
}

/// `q ↦ conj(q)`; finite-difference partials only.
pub fn conjugate() -> QFunction {
    QFunction::new("conj", Domain::Whole, Quaternion::conj)
}

/// `q ↦ a q`; finite-difference partials only.
pub fn left_mul(a: Quaternion) -> QFunction {
    QFunction::new(format!("left_mul({a})"), Domain::Whole, move |q: Quaternion| a * q)
}
