//! Unilateral quaternionic power series `Σ q^k a_k` with coefficients on the
//! right, their slice decomposition `f(t + r ι) = u(t, r) + ι v(t, r)` and the
//! checks that tie that decomposition to S-derivability.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diff::{fueter_apply, Domain, PartialDerivatives, QFunction};
use crate::error::{Error, Result};
use crate::quaternion::Quaternion;
use crate::sampling;
use crate::slice::{slice_point, UnitImaginary};

/// Default truncation order for transcendental series.
pub const DEFAULT_ORDER: usize = 64;

/// A truncated power series with a declared convergence radius.
///
/// `coeffs` may hold more terms than the evaluation order; the extra terms
/// only feed [`PowerSeries::tail_bound`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerSeries {
    coeffs: Vec<Quaternion>,
    order: usize,
    radius: f64,
}

impl PowerSeries {
    /// Series `a_0 + q a_1 + ... + q^N a_N` with `N = coeffs.len() - 1`.
    pub fn new(coeffs: Vec<Quaternion>, radius: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("a power series needs at least one coefficient".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
        }
        let order = coeffs.len() - 1;
        Ok(PowerSeries { coeffs, order, radius })
    }

    /// Evaluates only up to `q^order`; the remaining stored terms bound the tail.
    pub fn with_order(mut self, order: usize) -> Result<Self> {
        if order >= self.coeffs.len() {
            return Err(Error::InvalidArgument(format!(
                "order {order} exceeds the {} stored coefficients",
                self.coeffs.len()
            )));
        }
        self.order = order;
        Ok(self)
    }

    /// `Σ q^k / k!` truncated at `order`, with twice as many terms stored.
    pub fn exponential(order: usize, radius: f64) -> Result<Self> {
        let mut c = Vec::with_capacity(2 * order + 1);
        let mut a = 1.0;
        for k in 0..=2 * order {
            if k > 0 {
                a /= k as f64;
            }
            c.push(Quaternion::real(a));
        }
        PowerSeries::new(c, radius)?.with_order(order)
    }

    /// Coefficients used in evaluation, `a_0..=a_N`.
    pub fn coeffs(&self) -> &[Quaternion] {
        &self.coeffs[..=self.order]
    }

    pub fn stored_coeffs(&self) -> &[Quaternion] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn check_radius(&self, norm: f64) -> Result<()> {
        if norm < self.radius {
            Ok(())
        } else {
            Err(Error::OutsideRadius { norm, radius: self.radius })
        }
    }

    /// Horner evaluation `a_0 + q (a_1 + q (a_2 + ...))`.
    pub fn eval(&self, q: Quaternion) -> Result<Quaternion> {
        self.check_radius(q.norm())?;
        Ok(self.eval_unchecked(q))
    }

    pub fn eval_unchecked(&self, q: Quaternion) -> Quaternion {
        self.coeffs().iter().rev().fold(Quaternion::ZERO, |acc, &a| a + q * acc)
    }

    /// Exact coordinate partials by differentiating the Horner recurrence:
    /// `S_k = a_k + q S_{k+1}` gives `∂S_k = e S_{k+1} + q ∂S_{k+1}`.
    pub fn partials_unchecked(&self, q: Quaternion) -> PartialDerivatives {
        PartialDerivatives::from_fn(|axis| {
            let e = axis.unit();
            let mut s = Quaternion::ZERO;
            let mut ds = Quaternion::ZERO;
            for &a in self.coeffs().iter().rev() {
                ds = e * s + q * ds;
                s = a + q * s;
            }
            ds
        })
    }

    /// `(Σ u_n a_n, Σ v_n a_n)` with `(t + r ι)^n = u_n + ι v_n`.
    pub fn slice_decompose(&self, t: f64, r: f64) -> Result<(Quaternion, Quaternion)> {
        if r < 0.0 {
            return Err(Error::InvalidArgument(format!("r must be nonnegative, got {r}")));
        }
        self.check_radius(t.hypot(r))?;
        Ok(self.slice_decompose_unchecked(t, r))
    }

    fn slice_decompose_unchecked(&self, t: f64, r: f64) -> (Quaternion, Quaternion) {
        let (mut un, mut vn) = (1.0, 0.0);
        let mut u = Quaternion::ZERO;
        let mut v = Quaternion::ZERO;
        for &a in self.coeffs() {
            u += a.scale(un);
            v += a.scale(vn);
            (un, vn) = (t * un - r * vn, r * un + t * vn);
        }
        (u, v)
    }

    /// Coefficients `(k + 1) a_{k+1}`, same radius.
    pub fn termwise_derivative(&self) -> PowerSeries {
        let coeffs: Vec<Quaternion> = if self.coeffs.len() == 1 {
            vec![Quaternion::ZERO]
        } else {
            self.coeffs.iter().enumerate().skip(1).map(|(k, a)| a.scale(k as f64)).collect()
        };
        let order = self.order.saturating_sub(1).min(coeffs.len() - 1);
        PowerSeries { coeffs, order, radius: self.radius }
    }

    /// `(q - q̄)^-1 (f(q) - f(q̄))`.
    pub fn perp_quotient(&self, q: Quaternion) -> Result<Quaternion> {
        let fq = self.eval(q)?;
        let fc = self.eval(q.conj())?;
        perp_quotient_of(q, fq, fc)
    }

    /// `Σ_{N < k} ρ^k |a_k|` over the stored coefficients past the order.
    pub fn tail_bound(&self, rho: f64) -> f64 {
        self.coeffs.iter().enumerate().skip(self.order + 1).map(|(k, a)| rho.powi(k as i32) * a.norm()).sum()
    }

    /// Root-test estimate `1 / limsup |a_k|^(1/k)` over the last half of the
    /// stored terms. Diagnostic only.
    pub fn root_test_radius(&self) -> f64 {
        let n = self.coeffs.len();
        let sup = self
            .coeffs
            .iter()
            .enumerate()
            .skip((n / 2).max(1))
            .map(|(k, a)| a.norm().powf(1.0 / k as f64))
            .fold(0.0, f64::max);
        if sup == 0.0 {
            f64::INFINITY
        } else {
            1.0 / sup
        }
    }

    /// Wraps the series as a [`QFunction`] on its ball with exact partials.
    pub fn to_qfunction(&self, name: impl Into<String>) -> QFunction {
        let eval = Arc::new(self.clone());
        let partials = Arc::clone(&eval);
        QFunction::new(name, Domain::Ball { radius: self.radius }, move |q| eval.eval_unchecked(q))
            .with_exact_partials(move |q| partials.partials_unchecked(q))
            .slice_regular(true)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        std::fs::read_to_string(path.as_ref())?.parse()
    }

    /// Text form: header `R=<real> N=<int>`, then one `t x y z` line per stored coefficient.
    pub fn to_text(&self) -> String {
        let mut s = format!("R={} N={}\n", self.radius, self.order);
        for a in &self.coeffs {
            let _ = writeln!(s, "{} {} {} {}", a.t, a.x, a.y, a.z);
        }
        s
    }
}

impl FromStr for PowerSeries {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (_, header) = lines.next().ok_or_else(|| Error::Parse("empty series file".into()))?;
        let (mut radius, mut order) = (None, None);
        for tok in header.split_whitespace() {
            let bad = || Error::Parse(format!("bad header token {tok:?}"));
            match tok.split_once('=') {
                Some(("R", v)) => radius = Some(v.parse::<f64>().map_err(|_| bad())?),
                Some(("N", v)) => order = Some(v.parse::<usize>().map_err(|_| bad())?),
                _ => return Err(bad()),
            }
        }
        let radius = radius.ok_or_else(|| Error::Parse("header is missing R=<real>".into()))?;
        let order = order.ok_or_else(|| Error::Parse("header is missing N=<int>".into()))?;
        let mut coeffs = Vec::new();
        for (lineno, line) in lines {
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("line {lineno}: {e}")))?;
            let [t, x, y, z] = vals[..] else {
                return Err(Error::Parse(format!("line {lineno}: expected 4 reals, got {}", vals.len())));
            };
            coeffs.push(Quaternion::new(t, x, y, z));
        }
        if coeffs.len() < order + 1 {
            return Err(Error::Parse(format!(
                "N={order} needs {} coefficient lines, found {}",
                order + 1,
                coeffs.len()
            )));
        }
        PowerSeries::new(coeffs, radius)?.with_order(order)
    }
}

/// `(q - q̄)^-1 (fq - fc)` given `fq = f(q)` and `fc = f(q̄)`.
pub fn perp_quotient_of(q: Quaternion, fq: Quaternion, fc: Quaternion) -> Result<Quaternion> {
    let d = q - q.conj();
    if !(d.norm() > 2.0 * crate::slice::R_MIN) {
        return Err(Error::DegenerateSlice { r: q.vector_norm() });
    }
    Ok(d.inverse()? * (fq - fc))
}

/// Anything with slice components `f(t + r ι) = u(t, r) + ι v(t, r)`.
pub trait SliceDecomposition {
    fn components(&self, t: f64, r: f64) -> Result<(Quaternion, Quaternion)>;
}

impl SliceDecomposition for PowerSeries {
    fn components(&self, t: f64, r: f64) -> Result<(Quaternion, Quaternion)> {
        // FD probes may step to r < 0; the recurrence is polynomial in r
        self.check_radius(t.hypot(r))?;
        Ok(self.slice_decompose_unchecked(t, r))
    }
}

type ComponentFn = Arc<dyn Fn(f64, f64) -> Quaternion + Send + Sync>;

/// Slice components given directly as functions of `(t, r)`.
#[derive(Clone)]
pub struct SliceComponents {
    u: ComponentFn,
    v: ComponentFn,
}

impl SliceComponents {
    pub fn new(
        u: impl Fn(f64, f64) -> Quaternion + Send + Sync + 'static,
        v: impl Fn(f64, f64) -> Quaternion + Send + Sync + 'static,
    ) -> Self {
        SliceComponents { u: Arc::new(u), v: Arc::new(v) }
    }

    /// The function `t + r ι ↦ u(t, r) + ι v(t, r)` on the non-real quaternions.
    pub fn to_qfunction(&self, name: impl Into<String>) -> QFunction {
        let c = self.clone();
        QFunction::new(name, Domain::NonReal, move |q: Quaternion| {
            let (t, r) = (q.t, q.vector_norm());
            let iota = UnitImaginary::new(q).map(|u| u.axis()).unwrap_or(Quaternion::ZERO);
            (c.u)(t, r) + iota * (c.v)(t, r)
        })
    }
}

impl SliceDecomposition for SliceComponents {
    fn components(&self, t: f64, r: f64) -> Result<(Quaternion, Quaternion)> {
        Ok(((self.u)(t, r), (self.v)(t, r)))
    }
}

/// Largest of `|∂u/∂t - ∂v/∂r|` and `|∂u/∂r + ∂v/∂t|`, central differences.
pub fn cr_residual(s: &(impl SliceDecomposition + ?Sized), t: f64, r: f64, step: f64) -> Result<f64> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    let h = 0.5 / step;
    let (ut1, vt1) = s.components(t + step, r)?;
    let (ut0, vt0) = s.components(t - step, r)?;
    let (ur1, vr1) = s.components(t, r + step)?;
    let (ur0, vr0) = s.components(t, r - step)?;
    let (u_t, v_t) = ((ut1 - ut0).scale(h), (vt1 - vt0).scale(h));
    let (u_r, v_r) = ((ur1 - ur0).scale(h), (vr1 - vr0).scale(h));
    Ok((u_t - v_r).norm().max((u_r + v_t).norm()))
}

/// Settings for [`slice_criterion_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceCheckConfig {
    pub step: f64,
    /// Tolerance for the finite-difference based entries (scaled by `max(1, magnitude)`).
    pub tol: f64,
    /// Tolerance for the angle-independence gap (scaled by `max(1, |f|)`).
    pub angle_tol: f64,
    pub seed: u64,
    /// Number of random directions for the angle-independence test.
    pub directions: usize,
    /// Points with `r` at or below this are rejected.
    pub r_band: f64,
}

impl Default for SliceCheckConfig {
    fn default() -> Self {
        SliceCheckConfig {
            step: crate::diff::DEFAULT_STEP,
            tol: crate::diff::TOL_FD,
            angle_tol: 1e-10,
            seed: 0,
            directions: 4,
            r_band: crate::slice::DEFAULT_R_BAND,
        }
    }
}

/// One `(t, r)` point of a slice-criterion check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceCheckRow {
    pub t: f64,
    pub r: f64,
    /// Largest `|f(t + r ι) - (u + ι v)|` over the sampled `ι`.
    pub angle_gap: f64,
    pub cr_residual: f64,
    /// `v / r`.
    pub c_slice: Quaternion,
    /// `-D f / 2`.
    pub c_fueter: Quaternion,
    /// `(q - q̄)^-1 (f(q) - f(q̄))`.
    pub c_quotient: Quaternion,
    /// Largest pairwise distance between the three values of `C`.
    pub c_gap: f64,
    /// Largest of the three gaps divided by its allowed value; passes at `<= 1`.
    pub score: f64,
    pub pass: bool,
}

/// Per-point check of the slice criterion: angle independence of `(u, v)`,
/// the Cauchy-Riemann system in `(t, r)`, and agreement of `v / r`,
/// `-D f / 2` and the conjugate quotient.
///
/// `f` must agree with the decomposition; points inside the real band or
/// outside the domain become `Err` rows.
pub fn slice_criterion_check(
    f: &QFunction,
    comps: &(impl SliceDecomposition + ?Sized),
    grid: &[(f64, f64)],
    cfg: &SliceCheckConfig,
) -> Vec<Result<SliceCheckRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    grid.iter()
        .map(|&(t, r)| {
            let dirs: Vec<UnitImaginary> = (0..cfg.directions).map(|_| sampling::unit_imaginary(&mut rng)).collect();
            slice_check_point(f, comps, t, r, &dirs, cfg)
        })
        .collect()
}

fn slice_check_point(
    f: &QFunction,
    comps: &(impl SliceDecomposition + ?Sized),
    t: f64,
    r: f64,
    dirs: &[UnitImaginary],
    cfg: &SliceCheckConfig,
) -> Result<SliceCheckRow> {
    if !(r > cfg.r_band) {
        return Err(Error::DegenerateSlice { r });
    }
    let (u, v) = comps.components(t, r)?;
    let mut angle_gap: f64 = 0.0;
    let mut magnitude: f64 = 1.0;
    for &iota in dirs {
        let fq = f.try_eval(slice_point(t, r, iota))?;
        magnitude = magnitude.max(fq.norm());
        angle_gap = angle_gap.max(fq.dist(u + iota.axis() * v));
    }
    let cr = cr_residual(comps, t, r, cfg.step)?;

    let q = slice_point(t, r, dirs.first().copied().unwrap_or(UnitImaginary::I));
    let c_slice = v.scale(1.0 / r);
    let c_fueter = fueter_apply(&f.partials(q, cfg.step)?).scale(-0.5);
    let c_quotient = perp_quotient_of(q, f.try_eval(q)?, f.try_eval(q.conj())?)?;
    let c_gap = c_slice.dist(c_fueter).max(c_slice.dist(c_quotient)).max(c_fueter.dist(c_quotient));

    let c_scale = c_slice.norm().max(c_fueter.norm()).max(1.0);
    let uv_scale = u.norm().max(v.norm()).max(1.0);
    let score =
        (angle_gap / (cfg.angle_tol * magnitude)).max(cr / (cfg.tol * uv_scale)).max(c_gap / (cfg.tol * c_scale));
    let pass = score <= 1.0;
    Ok(SliceCheckRow { t, r, angle_gap, cr_residual: cr, c_slice, c_fueter, c_quotient, c_gap, score, pass })
}

impl PowerSeries {
    /// [`slice_criterion_check`] for this series.
    pub fn slice_criterion_check(&self, grid: &[(f64, f64)], cfg: &SliceCheckConfig) -> Vec<Result<SliceCheckRow>> {
        slice_criterion_check(&self.to_qfunction("series"), self, grid, cfg)
    }
}
