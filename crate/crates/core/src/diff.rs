//! Partial derivatives of quaternion-valued functions on R^4, the left Fueter
//! operator, the slice-regularity residual and the characteristic equations
//! of continuous S-derivability.
//!
//! Coordinates are `q = t + x i + y j + z k`. Every residual below is the norm
//! of a quaternion that vanishes exactly for S-derivable functions; numerical
//! values come either from central differences or from exact partials when
//! the function supplies them.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quaternion::Quaternion;
use crate::slice::{self, slice_form, SliceForm, SphericalAngles, UnitImaginary, R_MIN};

/// Default central-difference step before scaling by `max(1, |q|)`.
pub const DEFAULT_STEP: f64 = 1e-5;

/// Residual tolerance for finite-difference checks.
pub const TOL_FD: f64 = 1e-6;

/// Residual tolerance when exact partials are available.
pub const TOL_EXACT: f64 = 1e-10;

/// `base * max(1, |q|)`.
pub fn scaled_step(base: f64, q: Quaternion) -> f64 {
    base * q.norm().max(1.0)
}

pub type Evaluator = Arc<dyn Fn(Quaternion) -> Quaternion + Send + Sync>;
pub type PartialsFn = Arc<dyn Fn(Quaternion) -> PartialDerivatives + Send + Sync>;

/// Where a function is defined.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Whole,
    /// Quaternions off the real axis.
    NonReal,
    /// Open ball `|q| < radius` around the origin.
    Ball {
        radius: f64,
    },
}

impl Domain {
    pub fn contains(self, q: Quaternion) -> bool {
        match self {
            Domain::Whole => q.is_finite(),
            Domain::NonReal => q.vector_norm() > R_MIN,
            Domain::Ball { radius } => q.norm() < radius,
        }
    }

    /// Whether the closed segment `[a, b]` lies in the domain.
    pub fn contains_segment(self, a: Quaternion, b: Quaternion) -> bool {
        match self {
            Domain::Whole | Domain::Ball { .. } => self.contains(a) && self.contains(b),
            Domain::NonReal => {
                let w = a.vector();
                let d = b.vector() - w;
                let dd = d.norm_sqr();
                let tau = if dd > 0.0 { (-w.dot(d) / dd).clamp(0.0, 1.0) } else { 0.0 };
                (w + d.scale(tau)).norm() > R_MIN
            }
        }
    }
}

/// A quaternion-valued function of a quaternion variable.
#[derive(Clone)]
pub struct QFunction {
    name: String,
    domain: Domain,
    eval: Evaluator,
    exact: Option<PartialsFn>,
    slice_regular: bool,
}

impl fmt::Debug for QFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QFunction")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("exact_partials", &self.exact.is_some())
            .field("slice_regular", &self.slice_regular)
            .finish()
    }
}

impl QFunction {
    pub fn new(
        name: impl Into<String>,
        domain: Domain,
        eval: impl Fn(Quaternion) -> Quaternion + Send + Sync + 'static,
    ) -> Self {
        QFunction { name: name.into(), domain, eval: Arc::new(eval), exact: None, slice_regular: false }
    }

    /// Attaches closed-form coordinate partials.
    pub fn with_exact_partials(
        mut self,
        partials: impl Fn(Quaternion) -> PartialDerivatives + Send + Sync + 'static,
    ) -> Self {
        self.exact = Some(Arc::new(partials));
        self
    }

    /// Marks the function as slice regular: `u(t, r) + ι v(t, r)` with `(u, v)`
    /// satisfying the Cauchy-Riemann system in `(t, r)`.
    pub fn slice_regular(mut self, yes: bool) -> Self {
        self.slice_regular = yes;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn has_exact_partials(&self) -> bool {
        self.exact.is_some()
    }

    pub fn is_slice_regular(&self) -> bool {
        self.slice_regular
    }

    /// Evaluates without a domain check.
    pub fn eval(&self, q: Quaternion) -> Quaternion {
        (self.eval)(q)
    }

    pub fn try_eval(&self, q: Quaternion) -> Result<Quaternion> {
        if !self.domain.contains(q) {
            return Err(self.domain_exit(q));
        }
        Ok(self.eval(q))
    }

    pub fn exact_partials(&self, q: Quaternion) -> Option<PartialDerivatives> {
        self.exact.as_ref().map(|p| p(q))
    }

    /// Exact partials when available, central differences with `step` otherwise.
    pub fn partials(&self, q: Quaternion, step: f64) -> Result<PartialDerivatives> {
        match self.exact_partials(q) {
            Some(p) => Ok(p),
            None => partials_fd(self, q, step),
        }
    }

    /// Derivative along the direction `dir`; exact when partials are exact.
    pub fn directional(&self, q: Quaternion, dir: Quaternion, step: f64) -> Result<Quaternion> {
        match self.exact_partials(q) {
            Some(p) => Ok(jacobian_apply(&p, dir)),
            None => directional_fd(self, q, dir, step),
        }
    }

    fn domain_exit(&self, point: Quaternion) -> Error {
        Error::DomainExit { function: self.name.clone(), point }
    }
}

/// Coordinate axis of R^4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    T,
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 4] = [Axis::T, Axis::X, Axis::Y, Axis::Z];
    pub const IMAGINARY: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// The unit `1`, `i`, `j` or `k`.
    pub fn unit(self) -> Quaternion {
        match self {
            Axis::T => Quaternion::ONE,
            Axis::X => Quaternion::I,
            Axis::Y => Quaternion::J,
            Axis::Z => Quaternion::K,
        }
    }
}

/// `∂f/∂t, ∂f/∂x, ∂f/∂y, ∂f/∂z` at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PartialDerivatives {
    pub d_t: Quaternion,
    pub d_x: Quaternion,
    pub d_y: Quaternion,
    pub d_z: Quaternion,
}

impl PartialDerivatives {
    pub fn get(&self, axis: Axis) -> Quaternion {
        match axis {
            Axis::T => self.d_t,
            Axis::X => self.d_x,
            Axis::Y => self.d_y,
            Axis::Z => self.d_z,
        }
    }

    pub fn from_fn(mut f: impl FnMut(Axis) -> Quaternion) -> Self {
        PartialDerivatives { d_t: f(Axis::T), d_x: f(Axis::X), d_y: f(Axis::Y), d_z: f(Axis::Z) }
    }

    /// Largest partial norm.
    pub fn max_norm(&self) -> f64 {
        Axis::ALL.iter().map(|&a| self.get(a).norm()).fold(0.0, f64::max)
    }
}

/// Central difference `(f(q + s e) - f(q - s e)) / 2s` along a coordinate axis.
pub fn partial_fd(f: &QFunction, q: Quaternion, axis: Axis, step: f64) -> Result<Quaternion> {
    directional_fd(f, q, axis.unit(), step)
}

/// Central difference along an arbitrary direction (not normalized).
pub fn directional_fd(f: &QFunction, q: Quaternion, dir: Quaternion, step: f64) -> Result<Quaternion> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    let plus = q + dir.scale(step);
    let minus = q - dir.scale(step);
    if !f.domain.contains_segment(minus, plus) {
        let bad = if f.domain.contains(plus) { minus } else { plus };
        return Err(f.domain_exit(bad));
    }
    Ok((f.eval(plus) - f.eval(minus)).scale(0.5 / step))
}

pub fn partials_fd(f: &QFunction, q: Quaternion, step: f64) -> Result<PartialDerivatives> {
    Ok(PartialDerivatives {
        d_t: partial_fd(f, q, Axis::T, step)?,
        d_x: partial_fd(f, q, Axis::X, step)?,
        d_y: partial_fd(f, q, Axis::Y, step)?,
        d_z: partial_fd(f, q, Axis::Z, step)?,
    })
}

/// `∂(q^n)/∂axis = Σ_{m<n} q^m e q^(n-1-m)`, the noncommutative product rule.
pub fn partial_exact_pow(n: u32, q: Quaternion, axis: Axis) -> Quaternion {
    if n == 0 {
        return Quaternion::ZERO;
    }
    let e = axis.unit();
    let powers: Vec<Quaternion> =
        std::iter::successors(Some(Quaternion::ONE), |p| Some(*p * q)).take(n as usize).collect();
    (0..n as usize).map(|m| powers[m] * e * powers[n as usize - 1 - m]).sum()
}

/// Left Fueter operator `D f = ∂t f + i ∂x f + j ∂y f + k ∂z f`.
pub fn fueter_apply(p: &PartialDerivatives) -> Quaternion {
    p.d_t + Quaternion::I * p.d_x + Quaternion::J * p.d_y + Quaternion::K * p.d_z
}

/// Real-linear Jacobian action `∂t f h0 + ∂x f h1 + ∂y f h2 + ∂z f h3`.
pub fn jacobian_apply(p: &PartialDerivatives, h: Quaternion) -> Quaternion {
    p.d_t.scale(h.t) + p.d_x.scale(h.x) + p.d_y.scale(h.y) + p.d_z.scale(h.z)
}

/// `|(∂/∂t + ι ∂/∂r) f|` at a non-real point, `∂/∂r` taken along `ι`.
pub fn cullen_residual(f: &QFunction, q: Quaternion, step: f64) -> Result<f64> {
    let s = slice_form(q)?;
    cullen_residual_at(f, q, &s, step)
}

fn cullen_residual_at(f: &QFunction, q: Quaternion, s: &SliceForm, step: f64) -> Result<f64> {
    let d_t = f.directional(q, Quaternion::ONE, step)?;
    let d_r = f.directional(q, s.iota.axis(), step)?;
    Ok((d_t + s.iota.axis() * d_r).norm())
}

/// `∂f/∂ι = (∂ι/∂α)^-1 ∂f/∂α + (∂ι/∂β)^-1 ∂f/∂β` at fixed `(t, r)`.
///
/// The angular partials are central differences with angular increment
/// `step`; the tangents `∂ι/∂α`, `∂ι/∂β` are analytic. Undefined on the real
/// axis and within `sin β < 1e-6` of the subplane `R + kR`.
pub fn partial_iota(f: &QFunction, q: Quaternion, step: f64) -> Result<Quaternion> {
    let s = slice_form(q)?;
    let angles = s.iota.angles();
    let sin_beta = angles.beta.sin().abs();
    if angles.near_pole() {
        return Err(Error::SingularSubplane { sin_beta });
    }
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    let at = |alpha: f64, beta: f64| -> Result<Quaternion> {
        let iota = slice::iota_from_angles(SphericalAngles::new(alpha, beta));
        f.try_eval(slice::slice_point(s.t, s.r, iota))
    };
    let (a, b) = (angles.alpha, angles.beta);
    let d_alpha = (at(a + step, b)? - at(a - step, b)?).scale(0.5 / step);
    let d_beta = (at(a, b + step)? - at(a, b - step)?).scale(0.5 / step);
    let inv_alpha = angles.tangent_alpha().inverse()?;
    let inv_beta = angles.tangent_beta().inverse()?;
    Ok(inv_alpha * d_alpha + inv_beta * d_beta)
}

/// Norms of the characteristic-equation residuals at one point.
///
/// Real points (`r <= r_band`) populate `real_x..real_z`; other points populate
/// `slice_x..slice_z`, `cullen` and, off the singular subplane, `fueter`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualVector {
    pub point: Quaternion,
    pub real_x: Option<f64>,
    pub real_y: Option<f64>,
    pub real_z: Option<f64>,
    pub slice_x: Option<f64>,
    pub slice_y: Option<f64>,
    pub slice_z: Option<f64>,
    pub cullen: Option<f64>,
    /// Residual of `D f = ∂t f + ι ∂r f - (1/r) ∂f/∂ι`.
    pub fueter: Option<f64>,
}

impl ResidualVector {
    fn empty(point: Quaternion) -> Self {
        ResidualVector {
            point,
            real_x: None,
            real_y: None,
            real_z: None,
            slice_x: None,
            slice_y: None,
            slice_z: None,
            cullen: None,
            fueter: None,
        }
    }

    pub fn equations(&self) -> [Option<f64>; 6] {
        [self.real_x, self.real_y, self.real_z, self.slice_x, self.slice_y, self.slice_z]
    }

    /// Largest of the characteristic equations and the Cullen residual.
    pub fn max_characteristic(&self) -> f64 {
        self.equations().into_iter().chain([self.cullen]).flatten().fold(0.0, f64::max)
    }

    pub fn is_real_point(&self) -> bool {
        self.real_x.is_some()
    }
}

/// `(e - ι e ι)/2` and `(e + ι e ι)/2` for a unit `e`.
fn unit_split(e: Quaternion, iota: UnitImaginary) -> (Quaternion, Quaternion) {
    let s = slice::split_increment(e, iota);
    (s.h_par, s.h_perp)
}

pub fn characteristic_residuals(f: &QFunction, q: Quaternion, step: f64) -> Result<ResidualVector> {
    characteristic_residuals_banded(f, q, step, slice::DEFAULT_R_BAND)
}

/// [`characteristic_residuals`] with an explicit real-axis band.
pub fn characteristic_residuals_banded(f: &QFunction, q: Quaternion, step: f64, r_band: f64) -> Result<ResidualVector> {
    let p = f.partials(q, step)?;
    let mut out = ResidualVector::empty(q);
    if q.vector_norm() <= r_band {
        let res = |axis: Axis| (p.get(axis) - axis.unit() * p.d_t).norm();
        out.real_x = Some(res(Axis::X));
        out.real_y = Some(res(Axis::Y));
        // the z-equation on the real axis constrains ∂f/∂z
        out.real_z = Some(res(Axis::Z));
        return Ok(out);
    }
    let s = slice_form(q)?;
    let df = fueter_apply(&p);
    let res = |axis: Axis| {
        let (par, perp) = unit_split(axis.unit(), s.iota);
        (p.get(axis) - par * p.d_t + perp.scale(0.5) * df).norm()
    };
    out.slice_x = Some(res(Axis::X));
    out.slice_y = Some(res(Axis::Y));
    out.slice_z = Some(res(Axis::Z));
    out.cullen = Some(cullen_residual_at(f, q, &s, step)?);
    out.fueter = match fueter_decomposition_residual(f, q, step) {
        Ok(v) => Some(v),
        Err(Error::SingularSubplane { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(out)
}

/// `|D f - (∂t f + ι ∂r f - (1/r) ∂f/∂ι)|`.
pub fn fueter_decomposition_residual(f: &QFunction, q: Quaternion, step: f64) -> Result<f64> {
    let s = slice_form(q)?;
    let p = f.partials(q, step)?;
    let df = fueter_apply(&p);
    let d_r = f.directional(q, s.iota.axis(), step)?;
    let d_iota = partial_iota(f, q, step)?;
    let rhs = p.d_t + s.iota.axis() * d_r - d_iota.scale(1.0 / s.r);
    Ok((df - rhs).norm())
}
