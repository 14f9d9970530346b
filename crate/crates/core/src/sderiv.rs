//! The S-derivative: a parallel coefficient (`A` on the real axis, `B` off it)
//! and a perpendicular coefficient `C`, such that
//!
//! ```text
//! h^-1 (f(q + h) - f(q) - h A)              -> 0   (q real)
//! h^-1 (f(q + h) - f(q) - h_par B - h_perp C) -> 0   (q not real)
//! ```
//!
//! [`estimate`] approximates the coefficients by secants along the real
//! direction and a direction orthogonal to `ι`, and records how the limit
//! residual shrinks over a step schedule. [`closed_form`] gives the values
//! `A = B = ∂f/∂t` and `C = -D f / 2`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diff::{self, characteristic_residuals_banded, fueter_apply, scaled_step, QFunction};
use crate::error::{Error, Result};
use crate::quaternion::{Quaternion, Tolerance};
use crate::sampling;
use crate::series::perp_quotient_of;
use crate::slice::{perp_direction, slice_form, split_increment};

/// Unscaled default step schedule.
pub const DEFAULT_STEPS: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

/// Number of generic probe directions.
pub const PROBE_COUNT: usize = 8;

/// Minimum empirical order for a trace to count as convergent.
pub const MIN_TRACE_ORDER: f64 = 0.9;

/// [`DEFAULT_STEPS`] scaled by `max(1, |q|)`.
pub fn default_schedule(q: Quaternion) -> Vec<f64> {
    DEFAULT_STEPS.iter().map(|&s| scaled_step(s, q)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    RealPoint,
    NonRealPoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SDerivative {
    RealPoint { point: Quaternion, a: Quaternion },
    NonRealPoint { point: Quaternion, b: Quaternion, c: Quaternion },
}

impl SDerivative {
    pub fn kind(&self) -> PointKind {
        match self {
            SDerivative::RealPoint { .. } => PointKind::RealPoint,
            SDerivative::NonRealPoint { .. } => PointKind::NonRealPoint,
        }
    }

    pub fn point(&self) -> Quaternion {
        match *self {
            SDerivative::RealPoint { point, .. } | SDerivative::NonRealPoint { point, .. } => point,
        }
    }

    /// `A` or `B`.
    pub fn parallel(&self) -> Quaternion {
        match *self {
            SDerivative::RealPoint { a, .. } => a,
            SDerivative::NonRealPoint { b, .. } => b,
        }
    }

    pub fn perpendicular(&self) -> Option<Quaternion> {
        match *self {
            SDerivative::RealPoint { .. } => None,
            SDerivative::NonRealPoint { c, .. } => Some(c),
        }
    }

    /// Largest coefficient distance to `other`; infinite when the kinds differ.
    pub fn gap(&self, other: &SDerivative) -> f64 {
        match (self, other) {
            (SDerivative::RealPoint { a: a1, .. }, SDerivative::RealPoint { a: a2, .. }) => a1.dist(*a2),
            (SDerivative::NonRealPoint { b: b1, c: c1, .. }, SDerivative::NonRealPoint { b: b2, c: c2, .. }) => {
                b1.dist(*b2).max(c1.dist(*c2))
            }
            _ => f64::INFINITY,
        }
    }
}

/// Fixed set of generic increment directions on the unit 3-sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSet {
    directions: Vec<Quaternion>,
}

impl ProbeSet {
    pub fn new(seed: u64, count: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ProbeSet { directions: (0..count).map(|_| sampling::unit_quaternion(&mut rng)).collect() }
    }

    pub fn directions(&self) -> &[Quaternion] {
        &self.directions
    }
}

impl Default for ProbeSet {
    fn default() -> Self {
        ProbeSet::new(0, PROBE_COUNT)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub step: f64,
    /// Largest limit residual over the probe directions.
    pub residual: f64,
}

/// Limit residuals over a decreasing step schedule.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub entries: Vec<TraceEntry>,
    /// Residuals at or below this are treated as roundoff.
    pub floor: f64,
}

impl ConvergenceTrace {
    /// Ratios `residual[k] / residual[k + 1]`.
    pub fn reduction_ratios(&self) -> Vec<f64> {
        self.entries.windows(2).map(|w| w[0].residual / w[1].residual).collect()
    }

    /// Each step either drops below the floor or shrinks the residual at
    /// least like `step^MIN_TRACE_ORDER`.
    pub fn converged(&self) -> bool {
        if self.entries.iter().any(|e| !e.residual.is_finite()) {
            return false;
        }
        self.entries.windows(2).all(|w| {
            let (a, b) = (w[0], w[1]);
            b.residual <= self.floor || a.residual / b.residual >= (a.step / b.step).powf(MIN_TRACE_ORDER)
        })
    }

    pub fn last_residual(&self) -> Option<f64> {
        self.entries.last().map(|e| e.residual)
    }
}

/// Result of [`estimate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    /// Coefficients from the smallest step.
    pub derivative: SDerivative,
    pub trace: ConvergenceTrace,
    /// False flags a non-convergent limit; not an error.
    pub converged: bool,
}

fn validate_steps(steps: &[f64]) -> Result<()> {
    if steps.is_empty() || steps.iter().any(|&s| !(s > 0.0)) || steps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(format!("steps must be positive and strictly decreasing: {steps:?}")));
    }
    Ok(())
}

/// Secant estimate of the S-derivative with its convergence trace.
///
/// `A`/`B` come from the symmetric secant along the real direction (a real
/// increment has no perpendicular part); `C` from the symmetric secant along
/// `η = perp_direction(ι)` (no parallel part). Each step's residual uses the
/// coefficients estimated at that same step.
pub fn estimate(f: &QFunction, q: Quaternion, steps: &[f64], probes: &ProbeSet) -> Result<Estimate> {
    estimate_banded(f, q, steps, probes, crate::slice::DEFAULT_R_BAND)
}

pub fn estimate_banded(
    f: &QFunction,
    q: Quaternion,
    steps: &[f64],
    probes: &ProbeSet,
    r_band: f64,
) -> Result<Estimate> {
    validate_steps(steps)?;
    let fq = f.try_eval(q)?;
    let real = q.vector_norm() <= r_band;
    let iota = if real { None } else { Some(slice_form(q)?.iota) };

    // a probe segment that leaves the domain (crosses the axis for `ι`) makes
    // the secant meaningless
    let probe = |h: Quaternion| -> Result<Quaternion> {
        if !f.domain().contains_segment(q, q + h) {
            return Err(Error::DomainExit { function: f.name().to_string(), point: q + h });
        }
        f.try_eval(q + h)
    };
    let mut entries = Vec::with_capacity(steps.len());
    let mut last = None;
    for &s in steps {
        let par = (probe(Quaternion::real(s))? - probe(Quaternion::real(-s))?).scale(0.5 / s);
        let coeffs = match iota {
            None => SDerivative::RealPoint { point: q, a: par },
            Some(iota) => {
                let eta = perp_direction(iota).axis();
                let diff = probe(eta.scale(s))? - probe(eta.scale(-s))?;
                let c = eta.scale(2.0 * s).inverse()? * diff;
                SDerivative::NonRealPoint { point: q, b: par, c }
            }
        };
        let mut worst: f64 = 0.0;
        for &d in probes.directions() {
            let h = d.scale(s);
            let delta = probe(h)? - fq;
            let linear = match (coeffs, iota) {
                (SDerivative::NonRealPoint { b, c, .. }, Some(iota)) => {
                    let sp = split_increment(h, iota);
                    sp.h_par * b + sp.h_perp * c
                }
                _ => h * coeffs.parallel(),
            };
            worst = worst.max((h.inverse()? * (delta - linear)).norm());
        }
        entries.push(TraceEntry { step: s, residual: worst });
        last = Some(coeffs);
    }
    let s_min = *steps.last().expect("validated non-empty");
    let trace = ConvergenceTrace { entries, floor: 1e3 * f64::EPSILON * fq.norm().max(1.0) / s_min };
    let converged = trace.converged();
    Ok(Estimate { derivative: last.expect("validated non-empty"), trace, converged })
}

/// Closed-form coefficients `A = B = ∂f/∂t`, `C = -D f / 2`.
///
/// For slice-regular functions the conjugate quotient `(q - q̄)^-1 (f(q) - f(q̄))`
/// is computed as a second route for `C`; disagreement beyond `tol` (against
/// `|C|`) is a [`Error::RouteMismatch`].
pub fn closed_form(f: &QFunction, q: Quaternion, step: f64, tol: Tolerance) -> Result<SDerivative> {
    closed_form_banded(f, q, step, tol, crate::slice::DEFAULT_R_BAND)
}

pub fn closed_form_banded(f: &QFunction, q: Quaternion, step: f64, tol: Tolerance, r_band: f64) -> Result<SDerivative> {
    if !f.domain().contains(q) {
        return Err(Error::DomainExit { function: f.name().to_string(), point: q });
    }
    let p = f.partials(q, step)?;
    if q.vector_norm() <= r_band {
        return Ok(SDerivative::RealPoint { point: q, a: p.d_t });
    }
    let c = fueter_apply(&p).scale(-0.5);
    if f.is_slice_regular() {
        let quotient = perp_quotient_of(q, f.try_eval(q)?, f.try_eval(q.conj())?)?;
        let gap = quotient.dist(c);
        let allowed = tol.allowed(c.norm());
        if !(gap <= allowed) {
            return Err(Error::RouteMismatch { gap, allowed });
        }
    }
    Ok(SDerivative::NonRealPoint { point: q, b: p.d_t, c })
}

/// Default tolerance for [`closed_form`]'s route agreement.
pub fn closed_form_tolerance(f: &QFunction) -> Tolerance {
    if f.has_exact_partials() {
        Tolerance::new(1e-9, 1e-9)
    } else {
        Tolerance::new(diff::TOL_FD, diff::TOL_FD)
    }
}

/// Allowed distance between an estimated and a closed-form coefficient.
pub fn estimate_tolerance(reference: Quaternion) -> f64 {
    (10.0 * diff::TOL_FD).max(1e-6 * reference.norm())
}

/// One point of [`verify_sufficiency`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SufficiencyRow {
    pub point: Quaternion,
    pub kind: Option<PointKind>,
    pub max_residual: f64,
    pub residual_tol: f64,
    pub estimate_gap: f64,
    pub estimate_tol: f64,
    pub converged: bool,
    pub pass: bool,
    /// Set when the point could not be checked.
    pub skipped: Option<String>,
}

/// Characteristic residuals small and estimated coefficients equal to the
/// closed forms, point by point.
///
/// `step` is the base finite-difference step, scaled by `max(1, |q|)` per point.
pub fn verify_sufficiency(f: &QFunction, grid: &[Quaternion], step: f64) -> Vec<SufficiencyRow> {
    let probes = ProbeSet::default();
    grid.iter().map(|&q| sufficiency_row(f, q, step, &probes)).collect()
}

fn sufficiency_row(f: &QFunction, q: Quaternion, step: f64, probes: &ProbeSet) -> SufficiencyRow {
    let run = || -> Result<SufficiencyRow> {
        let s = scaled_step(step, q);
        let res = characteristic_residuals_banded(f, q, s, crate::slice::DEFAULT_R_BAND)?;
        let p = f.partials(q, s)?;
        let base_tol = if f.has_exact_partials() { diff::TOL_EXACT } else { diff::TOL_FD };
        let residual_tol = base_tol * p.max_norm().max(1.0);
        let max_residual = res.max_characteristic();

        let cf = closed_form(f, q, s, closed_form_tolerance(f))?;
        let est = estimate(f, q, &default_schedule(q), probes)?;
        let estimate_gap = est.derivative.gap(&cf);
        let reference = cf.parallel().norm().max(cf.perpendicular().map_or(0.0, Quaternion::norm));
        let estimate_tol = estimate_tolerance(Quaternion::real(reference));
        let pass = max_residual <= residual_tol && estimate_gap <= estimate_tol && est.converged;
        Ok(SufficiencyRow {
            point: q,
            kind: Some(cf.kind()),
            max_residual,
            residual_tol,
            estimate_gap,
            estimate_tol,
            converged: est.converged,
            pass,
            skipped: None,
        })
    };
    match run() {
        Ok(row) => row,
        // a route mismatch is a failed check, not a skipped point
        Err(e) => SufficiencyRow {
            point: q,
            kind: None,
            max_residual: f64::NAN,
            residual_tol: f64::NAN,
            estimate_gap: f64::NAN,
            estimate_tol: f64::NAN,
            converged: false,
            pass: false,
            skipped: if matches!(e, Error::RouteMismatch { .. }) { None } else { Some(e.to_string()) },
        },
    }
}

/// Largest `|ΔX| / |Δq|` over pairs of same-kind coefficients. A discrete
/// continuity surrogate; `None` with fewer than two comparable points.
pub fn lipschitz_estimate(values: &[SDerivative]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for (n, a) in values.iter().enumerate() {
        for b in &values[n + 1..] {
            let dq = a.point().dist(b.point());
            let gap = a.gap(b);
            if dq > 0.0 && gap.is_finite() {
                let l = gap / dq;
                best = Some(best.map_or(l, |m: f64| m.max(l)));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions;

    const I: Quaternion = Quaternion::I;

    #[test]
    fn estimate_affine_at_real_point() {
        let a = Quaternion::new(0.3, -1.0, 0.5, 2.0);
        let b = Quaternion::new(-1.0, 0.2, 0.0, 0.7);
        let f = functions::affine(a, b);
        let q = Quaternion::real(0.8);
        let est = estimate(&f, q, &default_schedule(q), &ProbeSet::default()).unwrap();
        assert_eq!(est.derivative.kind(), PointKind::RealPoint);
        assert!(est.derivative.parallel().dist(a) < 1e-10);
        assert!(est.trace.last_residual().unwrap() < 1e-10);
        assert!(est.converged);
    }

    #[test]
    fn estimate_square_at_i() {
        let f = functions::power(2);
        let est = estimate(&f, I, &default_schedule(I), &ProbeSet::default()).unwrap();
        let SDerivative::NonRealPoint { b, c, .. } = est.derivative else { panic!("kind") };
        assert!(b.dist(I.scale(2.0)) < 1e-9);
        assert!(c.norm() < 1e-9);
        assert!(est.converged, "{:?}", est.trace);
    }

    #[test]
    fn estimate_iota() {
        let f = functions::iota();
        for (t, r) in [(0.0, 1.0), (1.5, 0.5), (-0.3, 2.0)] {
            let q = Quaternion::new(t, r, 0.0, 0.0);
            let est = estimate(&f, q, &default_schedule(q), &ProbeSet::default()).unwrap();
            let SDerivative::NonRealPoint { b, c, .. } = est.derivative else { panic!("kind") };
            assert!(b.norm() < 1e-12);
            assert!(c.dist(Quaternion::real(1.0 / r)) < 1e-8, "{c}");
            assert!(est.converged);
        }
    }

    #[test]
    fn conjugate_does_not_converge() {
        let f = functions::conjugate();
        let q = Quaternion::new(0.3, 0.4, -0.2, 0.6);
        let est = estimate(&f, q, &default_schedule(q), &ProbeSet::default()).unwrap();
        assert!(!est.converged);
        assert!(est.trace.last_residual().unwrap() > 1e-2);
    }

    #[test]
    fn bad_schedules_are_rejected() {
        let f = functions::power(2);
        for steps in [vec![], vec![1e-3, 1e-2], vec![1e-3, 0.0], vec![1e-3, 1e-3]] {
            assert!(estimate(&f, I, &steps, &ProbeSet::default()).is_err());
        }
    }

    #[test]
    fn closed_form_examples() {
        let tol = Tolerance::new(1e-12, 1e-12);
        let cf = closed_form(&functions::power(3), Quaternion::real(2.0), 1e-5, tol).unwrap();
        assert_eq!(cf, SDerivative::RealPoint { point: Quaternion::real(2.0), a: Quaternion::real(12.0) });

        let q = Quaternion::new(1.0, 0.0, 1.0, 0.0);
        let SDerivative::NonRealPoint { b, c, .. } = closed_form(&functions::power(2), q, 1e-5, tol).unwrap() else {
            panic!("kind")
        };
        assert!(b.dist(Quaternion::new(2.0, 0.0, 2.0, 0.0)) < 1e-15);
        assert!(c.dist(Quaternion::real(2.0)) < 1e-15);

        let k = functions::constant(Quaternion::new(1.0, 2.0, 3.0, 4.0));
        let cf = closed_form(&k, q, 1e-5, tol).unwrap();
        assert_eq!(cf.parallel(), Quaternion::ZERO);
        assert_eq!(cf.perpendicular(), Some(Quaternion::ZERO));
    }

    #[test]
    fn closed_form_route_mismatch_is_reported() {
        // slice-regular claim on a function that is not
        let bogus =
            crate::diff::QFunction::new("bogus", crate::diff::Domain::Whole, |q: Quaternion| I * q).slice_regular(true);
        // on the i-slice the quotient gives i while -D f / 2 gives -i
        let q = Quaternion::new(1.0, 1.0, 0.0, 0.0);
        assert!(matches!(closed_form(&bogus, q, 1e-5, Tolerance::default()), Err(Error::RouteMismatch { .. })));
    }

    #[test]
    fn sufficiency_examples() {
        let grid = [Quaternion::real(0.5), Quaternion::new(0.3, 0.9, -0.4, 0.2), Quaternion::new(-1.0, 0.1, 0.5, 1.1)];
        for n in 0..9 {
            for row in verify_sufficiency(&functions::power(n), &grid, 1e-5) {
                assert!(row.pass, "n = {n}: {row:?}");
            }
        }
        let rows = verify_sufficiency(&functions::conjugate(), &grid, 1e-5);
        assert!(rows.iter().all(|r| !r.pass));
        assert!((rows[0].max_residual - 2.0).abs() < 1e-9);

        let left_i = functions::left_mul(I);
        let on = verify_sufficiency(&left_i, &[Quaternion::new(0.4, 1.3, 0.0, 0.0)], 1e-5);
        assert!(on[0].pass, "{:?}", on[0]);
        let off = verify_sufficiency(&left_i, &[Quaternion::new(1.0, 0.0, 1.0, 0.0)], 1e-5);
        assert!(!off[0].pass);
        assert!((off[0].max_residual - 2.0).abs() < 1e-6);
    }

    #[test]
    fn lipschitz_of_linear_coefficients() {
        let f = functions::power(2);
        let pts = [Quaternion::new(0.0, 1.0, 0.0, 0.0), Quaternion::new(1.0, 1.0, 0.0, 0.0)];
        let vals: Vec<_> = pts.iter().map(|&q| closed_form(&f, q, 1e-5, Tolerance::default()).unwrap()).collect();
        // B = 2q moves by 2, C = 2t moves by 2
        assert!((lipschitz_estimate(&vals).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(lipschitz_estimate(&vals[..1]), None);
    }
}
