use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diff::{
    self, characteristic_residuals_banded, fueter_apply, fueter_decomposition_residual, partial_iota, scaled_step,
    QFunction,
};
use crate::error::{Error, Result};
use crate::quaternion::Quaternion;
use crate::sderiv::{
    closed_form_banded, closed_form_tolerance, default_schedule, estimate_banded, estimate_tolerance,
    lipschitz_estimate, ProbeSet, SDerivative, PROBE_COUNT,
};
use crate::series::{perp_quotient_of, slice_criterion_check, SliceCheckConfig};
use crate::slice::{slice_form, UnitImaginary};

use super::catalog::{CatalogEntry, Expectation};
use super::grid::{GridPoint, GridSpec};
use super::report::{Check, FunctionReport, FunctionSummary, Report, Row, Status, Summary};

/// Distance from the axis used for the reported real-axis gap.
pub const AXIS_GAP_R: f64 = 1e-4;

/// How many violations are spelled out per function.
pub const MAX_VIOLATION_EXAMPLES: usize = 20;

/// Points count as on a slice when `ι` is this close to `±axis`.
pub const ON_SLICE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Base finite-difference step, scaled by `max(1, |q|)`.
    pub step: f64,
    /// Tolerance for finite-difference residuals, scaled by `max(1, magnitude)`.
    pub tol: f64,
    /// Tolerance for residuals built from exact partials, scaled the same way.
    pub tol_exact: f64,
    /// Seed for probe directions and slice-criterion angles.
    pub seed: u64,
    /// Attach convergence traces to the convergence rows.
    pub traces: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { step: diff::DEFAULT_STEP, tol: diff::TOL_FD, tol_exact: diff::TOL_EXACT, seed: 0, traces: false }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.step) || !ok(self.tol) || !ok(self.tol_exact) {
            return Err(Error::InvalidArgument(format!(
                "step and tolerances must be positive and finite (step {}, tol {}, tol_exact {})",
                self.step, self.tol, self.tol_exact
            )));
        }
        Ok(())
    }
}

/// Runs every check of every entry over the grid.
pub fn run(catalog: &[CatalogEntry], grid: &GridSpec, config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let points = grid.points();
    let functions: Vec<FunctionReport> =
        catalog.par_iter().map(|entry| run_entry(entry, &points, grid.r_band, config)).collect();

    let mut summary = Summary { functions: functions.len(), ..Summary::default() };
    for f in &functions {
        summary.rows += f.summary.rows;
        summary.passed += f.summary.passed;
        summary.failed += f.summary.failed;
        summary.skipped += f.summary.skipped;
        summary.violations += f.summary.violations;
    }
    summary.pass = summary.violations == 0;
    Ok(Report {
        tool: "sderiv".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        grid: grid.to_string(),
        config: config.clone(),
        summary,
        functions,
    })
}

struct PointOutcome {
    rows: Vec<Row>,
    closed_form: Option<SDerivative>,
    nonconvergent: bool,
}

fn run_entry(entry: &CatalogEntry, points: &[GridPoint], r_band: f64, config: &RunConfig) -> FunctionReport {
    let probes = ProbeSet::new(config.seed, PROBE_COUNT);
    let outcomes: Vec<PointOutcome> =
        points.par_iter().map(|p| check_point(entry, p, r_band, config, &probes)).collect();

    let mut summary = FunctionSummary { points: points.len(), ..FunctionSummary::default() };
    let mut closed = Vec::new();
    let mut rows = Vec::with_capacity(points.len() * Check::ALL.len());
    for o in outcomes {
        summary.nonconvergent += o.nonconvergent as usize;
        closed.extend(o.closed_form);
        rows.extend(o.rows);
    }
    for r in &rows {
        match r.status {
            Status::Pass => summary.passed += 1,
            Status::Fail => summary.failed += 1,
            Status::Skipped => summary.skipped += 1,
        }
    }
    summary.rows = rows.len();

    let violations = violations(entry.expectation, &rows, points, r_band);
    summary.violations = violations.len();
    summary.expectation_met = violations.is_empty();
    summary.violation_examples = violations.into_iter().take(MAX_VIOLATION_EXAMPLES).collect();
    summary.lipschitz = lipschitz_estimate(&closed);
    summary.axis_gap = axis_gap(&entry.function, points, r_band, config);
    summary.tail_bound = entry.series.as_ref().and_then(|s| {
        let rho = points.iter().map(|p| p.point.norm()).filter(|&n| n < s.radius()).fold(0.0, f64::max);
        let b = s.tail_bound(rho);
        b.is_finite().then_some(b)
    });

    FunctionReport {
        name: entry.name.clone(),
        expectation: entry.expectation,
        notes: entry.notes.clone(),
        exact_partials: entry.function.has_exact_partials(),
        summary,
        rows,
    }
}

fn on_slice(q: Quaternion, axis: UnitImaginary, r_band: f64) -> bool {
    if q.vector_norm() <= r_band {
        return false;
    }
    slice_form(q).is_ok_and(|s| {
        let (i, a) = (s.iota.axis(), axis.axis());
        i.dist(a).min(i.dist(-a)) <= ON_SLICE_TOL
    })
}

fn describe(r: &Row) -> String {
    match (r.residual, r.tolerance) {
        (Some(res), Some(tol)) => {
            format!("{} failed at #{} ({}): {res:e} > {tol:e}", r.check.as_str(), r.point_index, r.point)
        }
        _ => format!(
            "{} failed at #{} ({}): {}",
            r.check.as_str(),
            r.point_index,
            r.point,
            r.reason.as_deref().unwrap_or("no reason")
        ),
    }
}

fn violations(expectation: Expectation, rows: &[Row], points: &[GridPoint], r_band: f64) -> Vec<String> {
    let failed = rows.iter().filter(|r| r.status == Status::Fail);
    match expectation {
        Expectation::SDerivable => failed.map(describe).collect(),
        Expectation::NotSDerivable => {
            if rows.iter().any(|r| r.status == Status::Fail) {
                Vec::new()
            } else {
                vec!["expected at least one failing row, found none".to_string()]
            }
        }
        Expectation::SliceOnly(axis) => {
            let slice = |r: &Row| on_slice(points[r.point_index].point, axis, r_band);
            let mut out: Vec<String> = failed.clone().filter(|r| slice(r)).map(describe).collect();
            if !failed.clone().any(|r| !slice(r)) {
                out.push(format!("expected a failing row off the slice R + {}R, found none", axis.axis()));
            }
            out
        }
    }
}

fn row(p: &GridPoint, check: Check, status: Status) -> Row {
    Row {
        point_index: p.index,
        point: p.point.to_string(),
        check,
        status,
        residual: None,
        tolerance: None,
        reason: None,
        trace: None,
    }
}

fn measured(p: &GridPoint, check: Check, residual: f64, tolerance: f64) -> Row {
    // NaN residuals fail
    let status = if residual <= tolerance { Status::Pass } else { Status::Fail };
    Row { residual: Some(residual), tolerance: Some(tolerance), ..row(p, check, status) }
}

fn skipped(p: &GridPoint, check: Check, reason: impl Into<String>) -> Row {
    Row { reason: Some(reason.into()), ..row(p, check, Status::Skipped) }
}

fn failed(p: &GridPoint, check: Check, reason: impl Into<String>) -> Row {
    Row { reason: Some(reason.into()), ..row(p, check, Status::Fail) }
}

/// Turns an error into a row: route mismatches fail, everything else skips.
fn from_error(p: &GridPoint, check: Check, e: &Error) -> Row {
    match e {
        Error::RouteMismatch { gap, allowed } => Row {
            residual: Some(*gap),
            tolerance: Some(*allowed),
            reason: Some(e.kind().to_string()),
            ..row(p, check, Status::Fail)
        },
        _ => skipped(p, check, e.kind()),
    }
}

fn check_point(
    entry: &CatalogEntry,
    p: &GridPoint,
    r_band: f64,
    config: &RunConfig,
    probes: &ProbeSet,
) -> PointOutcome {
    let f = &entry.function;
    let q = p.point;
    let skip_all = |reason: &str| PointOutcome {
        rows: Check::ALL.iter().map(|&c| skipped(p, c, reason)).collect(),
        closed_form: None,
        nonconvergent: false,
    };
    if !f.domain().contains(q) {
        return skip_all("outside_domain");
    }
    let s = scaled_step(config.step, q);
    let partials = match f.partials(q, s) {
        Ok(v) => v,
        Err(e) => return skip_all(e.kind()),
    };
    let real = q.vector_norm() <= r_band;
    let base_tol = if f.has_exact_partials() { config.tol_exact } else { config.tol };
    let scale = partials.max_norm().max(1.0);
    let df = fueter_apply(&partials);
    let mut rows = Vec::with_capacity(Check::ALL.len());

    let residuals = characteristic_residuals_banded(f, q, s, r_band);
    rows.push(match &residuals {
        Ok(res) => {
            let worst = res.equations().into_iter().flatten().fold(0.0, f64::max);
            measured(p, Check::Characteristic, worst, base_tol * scale)
        }
        Err(e) => from_error(p, Check::Characteristic, e),
    });

    rows.push(match (&residuals, real) {
        (_, true) => skipped(p, Check::Cullen, "real_point"),
        (Ok(res), false) => match res.cullen {
            Some(c) => measured(p, Check::Cullen, c, base_tol * scale),
            None => skipped(p, Check::Cullen, "unavailable"),
        },
        (Err(e), false) => from_error(p, Check::Cullen, e),
    });

    // the angular derivative is always a finite difference
    let fd_scale = scale.max(df.norm());
    rows.push(if real {
        skipped(p, Check::FueterDecomposition, "real_point")
    } else {
        match fueter_decomposition_residual(f, q, s) {
            Ok(v) => measured(p, Check::FueterDecomposition, v, config.tol * fd_scale),
            Err(e) => from_error(p, Check::FueterDecomposition, &e),
        }
    });

    rows.push(if real { skipped(p, Check::PerpRoutes, "real_point") } else { perp_routes(f, p, s, df, config) });

    let cf = closed_form_banded(f, q, s, closed_form_tolerance(f), r_band);
    let est = estimate_banded(f, q, &default_schedule(q), probes, r_band);
    rows.push(match (&cf, &est) {
        (Ok(cf), Ok(est)) => {
            let reference = cf.parallel().norm().max(cf.perpendicular().map_or(0.0, Quaternion::norm));
            measured(p, Check::SDerivative, est.derivative.gap(cf), estimate_tolerance(Quaternion::real(reference)))
        }
        (Err(e), _) | (_, Err(e)) => from_error(p, Check::SDerivative, e),
    });

    let mut nonconvergent = false;
    rows.push(match &est {
        Ok(est) => {
            nonconvergent = !est.converged;
            let last = est.trace.last_residual().unwrap_or(f64::NAN);
            let mut r = if est.converged {
                Row { residual: Some(last), ..row(p, Check::Convergence, Status::Pass) }
            } else {
                Row { residual: Some(last), ..failed(p, Check::Convergence, "non_convergent") }
            };
            if config.traces {
                r.trace = Some(est.trace.entries.clone());
            }
            r
        }
        Err(e) => from_error(p, Check::Convergence, e),
    });

    rows.push(match (&entry.components, real) {
        (None, _) => skipped(p, Check::SliceCriterion, "no_components"),
        (Some(_), true) => skipped(p, Check::SliceCriterion, "real_point"),
        (Some(comps), false) => {
            let cfg = SliceCheckConfig {
                step: s,
                tol: config.tol,
                seed: config.seed ^ (p.index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
                r_band,
                ..SliceCheckConfig::default()
            };
            let sf = slice_form(q).expect("non-real point");
            match slice_criterion_check(f, comps.as_ref(), &[(sf.t, sf.r)], &cfg).remove(0) {
                Ok(r) => measured(p, Check::SliceCriterion, r.score, 1.0),
                Err(e) => from_error(p, Check::SliceCriterion, &e),
            }
        }
    });

    PointOutcome { rows, closed_form: cf.ok(), nonconvergent }
}

/// `-D f / 2` against `∂f/∂ι / (2r)` and, for slice-regular functions, the
/// conjugate quotient.
fn perp_routes(f: &QFunction, p: &GridPoint, s: f64, df: Quaternion, config: &RunConfig) -> Row {
    let q = p.point;
    let run = || -> Result<Row> {
        let sf = slice_form(q)?;
        let c_fueter = df.scale(-0.5);
        let c_iota = partial_iota(f, q, s)?.scale(0.5 / sf.r);
        let mut gap = c_fueter.dist(c_iota);
        if f.is_slice_regular() {
            let c_quot = perp_quotient_of(q, f.try_eval(q)?, f.try_eval(q.conj())?)?;
            gap = gap.max(c_quot.dist(c_fueter)).max(c_quot.dist(c_iota));
        }
        let scale = c_fueter.norm().max(c_iota.norm()).max(1.0);
        Ok(measured(p, Check::PerpRoutes, gap, config.tol * scale))
    };
    run().unwrap_or_else(|e| from_error(p, Check::PerpRoutes, &e))
}

/// Largest coefficient jump between real grid points and their neighbours
/// at distance [`AXIS_GAP_R`] along `i`.
fn axis_gap(f: &QFunction, points: &[GridPoint], r_band: f64, config: &RunConfig) -> Option<f64> {
    let tol = closed_form_tolerance(f);
    let mut best: Option<f64> = None;
    for p in points.iter().filter(|p| p.point.vector_norm() <= r_band) {
        let q = p.point;
        let s = scaled_step(config.step, q);
        let near = q + Quaternion::I.scale(AXIS_GAP_R);
        let (Ok(on), Ok(off)) = (closed_form_banded(f, q, s, tol, r_band), closed_form_banded(f, near, s, tol, r_band))
        else {
            continue;
        };
        let a = on.parallel();
        let gap = off.parallel().dist(a).max(off.perpendicular().map_or(0.0, |c| c.dist(a)));
        best = Some(best.map_or(gap, |b: f64| b.max(gap)));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::catalog::builtin_catalog;

    fn small_grid() -> GridSpec {
        "box=-1,1,3;axis=-1,1,3;ball=1.5,10".parse().unwrap()
    }

    fn entry(name: &str) -> CatalogEntry {
        builtin_catalog().into_iter().find(|e| e.name == name).unwrap()
    }

    #[test]
    fn rows_cover_points_times_checks() {
        let grid = small_grid();
        let report = run(&[entry("pow2")], &grid, &RunConfig::default()).unwrap();
        let f = &report.functions[0];
        assert_eq!(f.rows.len(), grid.points().len() * Check::ALL.len());
        assert!(f.summary.expectation_met, "{:?}", f.summary.violation_examples);
        assert_eq!(f.summary.failed, 0);
    }

    #[test]
    fn expectations_on_small_grid() {
        let cat: Vec<_> = ["iota", "conj", "left_i", "left_a", "exp_series"].into_iter().map(entry).collect();
        let report = run(&cat, &small_grid(), &RunConfig::default()).unwrap();
        for f in &report.functions {
            assert!(f.summary.expectation_met, "{}: {:?}", f.name, f.summary.violation_examples);
        }
        // iota is undefined on the axis
        let iota = &report.functions[0];
        assert!(iota.rows.iter().any(|r| r.reason.as_deref() == Some("outside_domain")));
        assert!(report.functions[4].summary.tail_bound.is_some());
        assert_eq!(report.exit_code(), 0);
    }

    #[test]
    fn slice_only_counts_failures_on_slice() {
        // claim iq is regular on the j-slice: rows there fail
        let mut e = entry("left_i");
        e.expectation = Expectation::SliceOnly(UnitImaginary::J);
        let report = run(&[e], &small_grid(), &RunConfig::default()).unwrap();
        assert!(!report.summary.pass);
        assert_eq!(report.exit_code(), 2);
    }

    #[test]
    fn traces_are_optional() {
        let grid: GridSpec = "axis=0,1,2".parse().unwrap();
        let without = run(&[entry("pow1")], &grid, &RunConfig::default()).unwrap();
        let with = run(&[entry("pow1")], &grid, &RunConfig { traces: true, ..RunConfig::default() }).unwrap();
        assert!(without.functions[0].rows.iter().all(|r| r.trace.is_none()));
        assert!(with.functions[0].rows.iter().any(|r| r.trace.is_some()));
    }

    #[test]
    fn bad_config_is_rejected() {
        let cfg = RunConfig { step: 0.0, ..RunConfig::default() };
        assert!(run(&[entry("pow1")], &small_grid(), &cfg).is_err());
    }
}
