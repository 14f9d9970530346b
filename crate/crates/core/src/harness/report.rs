use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sderiv::TraceEntry;

use super::catalog::Expectation;
use super::run::RunConfig;

/// The checks run at every grid point, in row order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// Characteristic equations: the real-axis system or the slice system.
    Characteristic,
    /// `|(∂/∂t + ι ∂/∂r) f|`.
    Cullen,
    /// `D f` against its `(t, r, ι)` decomposition.
    FueterDecomposition,
    /// Agreement of the routes to the perpendicular derivative.
    PerpRoutes,
    /// Secant estimate against the closed form.
    SDerivative,
    /// Limit residual shrinking over the step schedule.
    Convergence,
    /// Angle independence, Cauchy-Riemann system and `C = v / r`.
    SliceCriterion,
}

impl Check {
    pub const ALL: [Check; 7] = [
        Check::Characteristic,
        Check::Cullen,
        Check::FueterDecomposition,
        Check::PerpRoutes,
        Check::SDerivative,
        Check::Convergence,
        Check::SliceCriterion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Check::Characteristic => "characteristic",
            Check::Cullen => "cullen",
            Check::FueterDecomposition => "fueter_decomposition",
            Check::PerpRoutes => "perp_routes",
            Check::SDerivative => "s_derivative",
            Check::Convergence => "convergence",
            Check::SliceCriterion => "slice_criterion",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

/// One `(function, point, check)` outcome.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub point_index: usize,
    /// Rendered as `a+bi+cj+dk`.
    pub point: String,
    pub check: Check,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceEntry>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FunctionSummary {
    pub points: usize,
    pub rows: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    /// Points whose limit trace did not converge.
    pub nonconvergent: usize,
    pub expectation_met: bool,
    pub violations: usize,
    /// First few violations, for humans.
    pub violation_examples: Vec<String>,
    /// Largest `|ΔX| / |Δq|` of the closed-form coefficients on the grid.
    pub lipschitz: Option<f64>,
    /// Largest `max(|B - A|, |C - A|)` between real points and their
    /// neighbours at `r = AXIS_GAP_R`. Reported, not enforced.
    pub axis_gap: Option<f64>,
    /// Truncation tail bound at the largest in-domain grid norm (series only).
    pub tail_bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionReport {
    pub name: String,
    pub expectation: Expectation,
    pub notes: String,
    pub exact_partials: bool,
    pub summary: FunctionSummary,
    pub rows: Vec<Row>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub functions: usize,
    pub rows: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub violations: usize,
    /// True iff no function violates its expectation.
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub grid: String,
    pub config: RunConfig,
    pub summary: Summary,
    pub functions: Vec<FunctionReport>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn write_json(&self, mut w: impl Write) -> Result<()> {
        serde_json::to_writer(&mut w, self).map_err(|e| Error::Io(e.to_string()))?;
        w.write_all(b"\n")?;
        Ok(())
    }

    /// Flat CSV: one line per row, `function,point_index,point,check,status,residual,tolerance,reason`.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let csv_err = |e: csv::Error| Error::Io(e.to_string());
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["function", "point_index", "point", "check", "status", "residual", "tolerance", "reason"])
            .map_err(csv_err)?;
        let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for f in &self.functions {
            for r in &f.rows {
                out.write_record([
                    f.name.as_str(),
                    &r.point_index.to_string(),
                    &r.point,
                    r.check.as_str(),
                    r.status.as_str(),
                    &num(r.residual),
                    &num(r.tolerance),
                    r.reason.as_deref().unwrap_or(""),
                ])
                .map_err(csv_err)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn exit_code(&self) -> i32 {
        if self.summary.violations == 0 {
            0
        } else {
            2
        }
    }
}
