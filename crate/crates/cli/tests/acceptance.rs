//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line each; exits non-zero if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sderiv_core::diff::{
    characteristic_residuals, cullen_residual, fueter_apply, partial_exact_pow, partial_fd, partial_iota, Axis,
};
use sderiv_core::functions;
use sderiv_core::harness::{builtin_catalog, run, Expectation, GridSpec, RunConfig, Status};
use sderiv_core::sampling;
use sderiv_core::sderiv::{closed_form, estimate, ProbeSet, DEFAULT_STEPS};
use sderiv_core::series::{perp_quotient_of, PowerSeries};
use sderiv_core::slice::{slice_form, split_increment};
use sderiv_core::{Quaternion, Tolerance};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const I: Quaternion = Quaternion::I;
const J: Quaternion = Quaternion::J;
const K: Quaternion = Quaternion::K;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn positive_entries() -> Vec<sderiv_core::harness::CatalogEntry> {
    builtin_catalog().into_iter().filter(|e| e.expectation == Expectation::SDerivable).collect()
}

/// Seeded points in `B(0, radius)` at distance at least `min_r` from the axis.
fn off_axis_points(seed: u64, count: usize, radius: f64, min_r: f64) -> Vec<Quaternion> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let q = sampling::in_ball(&mut rng, Quaternion::ZERO, radius);
        let off_pole = slice_form(q).is_ok_and(|s| !s.iota.angles().near_pole());
        if q.vector_norm() >= min_r && off_pole {
            out.push(q);
        }
    }
    out
}

fn algebraic_identities() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let iota_fn = functions::iota();
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < 1000 {
        let q = sampling::gaussian(&mut rng);
        let Ok(s) = slice_form(q) else { continue };
        n += 1;
        let iota = s.iota.axis();
        let minus: Quaternion = [I, J, K].iter().map(|&e| e * (e - iota * e * iota).scale(0.5)).sum();
        let plus: Quaternion = [I, J, K].iter().map(|&e| e * (e + iota * e * iota).scale(0.5)).sum();
        worst = worst.max(minus.dist(-Quaternion::ONE)).max(plus.dist(Quaternion::real(-2.0)));
        let partials = iota_fn.exact_partials(q).ok_or("iota lacks exact partials")?;
        for (axis, coord) in [(Axis::X, q.x), (Axis::Y, q.y), (Axis::Z, q.z)] {
            let e = axis.unit();
            let split = split_increment(e, s.iota);
            worst = worst.max(iota.scale(coord / s.r).dist(split.h_par));
            worst = worst.max(partials.get(axis).dist(split.h_perp.scale(1.0 / s.r)));
        }
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-12, || format!("max deviation {worst:e} > 1e-12"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("1000 points, max deviation {worst:.1e}, {elapsed:.2?}"))
}

fn characteristic_on_positives() -> Outcome {
    let start = Instant::now();
    let points = GridSpec::default().points();
    let mut report = Vec::new();
    for e in builtin_catalog() {
        let is_target = e.name.starts_with("pow") || e.name == "iota" || e.name == "exp_series";
        if !is_target {
            continue;
        }
        let f = &e.function;
        let tol = if f.has_exact_partials() { 1e-10 } else { 1e-6 };
        let mut worst: f64 = 0.0;
        for p in points.iter().filter(|p| f.domain().contains(p.point)) {
            let res = characteristic_residuals(f, p.point, 1e-5).map_err(|err| format!("{}: {err}", e.name))?;
            worst = worst.max(res.equations().into_iter().flatten().fold(0.0, f64::max));
        }
        ensure(worst <= tol, || format!("{} max residual {worst:e} > {tol:e}", e.name))?;
        report.push(worst);
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    let worst = report.iter().copied().fold(0.0, f64::max);
    Ok(format!("{} functions on the default grid, max residual {worst:.1e}, {elapsed:.2?}", report.len()))
}

fn negative_separation() -> Outcome {
    let conj = functions::conjugate();
    let mut worst: f64 = 0.0;
    for t in [-1.5, -0.5, 0.0, 0.25, 1.0, 1.5] {
        let res = characteristic_residuals(&conj, Quaternion::real(t), 1e-5).map_err(|e| e.to_string())?;
        let real_x = res.real_x.ok_or("real point lacks real_x")?;
        worst = worst.max((real_x - 2.0).abs());
    }
    ensure(worst <= 1e-9, || format!("conj real_x deviates from 2 by {worst:e}"))?;

    let left_i = functions::left_mul(I);
    let cullen = cullen_residual(&left_i, Quaternion::new(1.0, 0.0, 1.0, 0.0), 1e-5).map_err(|e| e.to_string())?;
    ensure((cullen - 2.0).abs() <= 1e-6, || format!("iq Cullen residual at 1+j is {cullen}"))?;

    let entry = builtin_catalog().into_iter().find(|e| e.name == "left_i").ok_or("left_i missing")?;
    let grid = GridSpec::default();
    let points = grid.points();
    let rep = run(std::slice::from_ref(&entry), &grid, &RunConfig::default()).map_err(|e| e.to_string())?;
    let on_slice = |idx: usize| {
        let q = points[idx].point;
        slice_form(q).is_ok_and(|s| s.iota.axis().dist(I).min(s.iota.axis().dist(-I)) <= 1e-9)
    };
    let rows: Vec<_> = rep.functions[0].rows.iter().filter(|r| on_slice(r.point_index)).collect();
    let checked = rows.iter().filter(|r| r.status == Status::Pass).count();
    let bad: Vec<_> = rows.iter().filter(|r| r.status == Status::Fail).collect();
    ensure(bad.is_empty(), || format!("iq fails on the i-slice: {:?}", bad[0]))?;
    ensure(checked > 0, || "no i-slice rows were checked".to_string())?;
    Ok(format!("conj real_x = 2 within {worst:.1e}; iq Cullen at 1+j = {cullen:.9}; {checked} i-slice rows pass"))
}

fn perpendicular_routes() -> Outcome {
    let points = off_axis_points(4, 100, 2.0, 1e-3);
    let mut worst: f64 = 0.0;
    let mut iota_worst: f64 = 0.0;
    for e in positive_entries() {
        let f = &e.function;
        for &q in &points {
            let s = slice_form(q).map_err(|e| e.to_string())?;
            let p = f.partials(q, 1e-5).map_err(|e| e.to_string())?;
            let c_fueter = fueter_apply(&p).scale(-0.5);
            let c_iota = partial_iota(f, q, 1e-5).map_err(|e| e.to_string())?.scale(0.5 / s.r);
            let c_quot = perp_quotient_of(q, f.eval(q), f.eval(q.conj())).map_err(|e| e.to_string())?;
            let gap = c_fueter.dist(c_iota).max(c_fueter.dist(c_quot)).max(c_iota.dist(c_quot));
            ensure(gap <= 1e-5, || format!("{} at {q}: routes differ by {gap:e}", e.name))?;
            worst = worst.max(gap);
            if e.name == "iota" {
                let exact = Quaternion::real(1.0 / s.r);
                let dev = exact.dist(c_fueter).max(exact.dist(c_iota)).max(exact.dist(c_quot));
                ensure(dev <= 1e-8, || format!("iota at {q}: C deviates from 1/r by {dev:e}"))?;
                iota_worst = iota_worst.max(dev);
            }
        }
    }
    Ok(format!("max pairwise gap {worst:.1e}; iota |C - 1/r| <= {iota_worst:.1e}"))
}

fn limit_convergence() -> Outcome {
    let points = off_axis_points(5, 50, 1.5, 0.1);
    let probes = ProbeSet::default();
    let mut min_ratio = f64::INFINITY;
    let mut floored = 0;
    for e in positive_entries() {
        for &q in &points {
            let est = estimate(&e.function, q, &DEFAULT_STEPS, &probes).map_err(|err| format!("{}: {err}", e.name))?;
            for w in est.trace.entries.windows(2) {
                if w[1].residual <= est.trace.floor {
                    floored += 1;
                    continue;
                }
                let ratio = w[0].residual / w[1].residual;
                ensure(ratio >= 8.0, || format!("{} at {q}: reduction {ratio:.2} at step {:e}", e.name, w[1].step))?;
                min_ratio = min_ratio.min(ratio);
            }
        }
    }
    Ok(format!("min reduction per decade {min_ratio:.2}; {floored} step pairs at roundoff floor"))
}

fn series_closed_forms() -> Outcome {
    let exact = Tolerance::new(1e-9, 0.0);
    let cube =
        PowerSeries::new(vec![Quaternion::ZERO, Quaternion::ZERO, Quaternion::ZERO, Quaternion::ONE], f64::INFINITY)
            .map_err(|e| e.to_string())?;
    let c_quot = cube.perp_quotient(I).map_err(|e| e.to_string())?;
    let (t, r) = (0.0, 1.0);
    let (_, v) = cube.slice_decompose(t, r).map_err(|e| e.to_string())?;
    let v3 = 3.0 * t * t * r - r * r * r;
    let c_slice = v.scale(1.0 / r);
    let minus_one = -Quaternion::ONE;
    ensure(c_quot.approx_eq(minus_one, exact), || format!("quotient C = {c_quot}"))?;
    ensure(c_slice.approx_eq(minus_one, exact), || format!("v / r = {c_slice}"))?;
    ensure((v.t - v3).abs() <= 1e-9, || format!("v_3 = {v}, expected {v3}"))?;

    let square = functions::power(2);
    let q = Quaternion::new(1.0, 0.0, 1.0, 0.0);
    let cf = closed_form(&square, q, 1e-5, exact).map_err(|e| e.to_string())?;
    let b = cf.parallel();
    let c = cf.perpendicular().ok_or("expected a non-real point")?;
    ensure(b.approx_eq(Quaternion::new(2.0, 0.0, 2.0, 0.0), exact), || format!("B = {b}"))?;
    ensure(c.approx_eq(Quaternion::real(2.0), exact), || format!("C = {c}"))?;
    Ok(format!("q^3 at i: C = {c_quot}; q^2 at 1+j: B = {b}, C = {c}"))
}

fn order_of_accuracy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for k in 0..20 {
        // q^2 has an exact central difference; start at the cube
        let n = 3 + (k % 6) as u32;
        let q = sampling::in_ball(&mut rng, Quaternion::ZERO, 1.5);
        let f = functions::power(n);
        let err = |s: f64| -> Result<f64, String> {
            let mut worst: f64 = 0.0;
            for axis in Axis::ALL {
                let fd = partial_fd(&f, q, axis, s).map_err(|e| e.to_string())?;
                worst = worst.max(fd.dist(partial_exact_pow(n, q, axis)));
            }
            Ok(worst)
        };
        let ratio = err(1e-2)? / err(5e-3)?;
        ensure((ratio - 4.0).abs() <= 0.5, || format!("q^{n} at {q}: error ratio {ratio:.3}"))?;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    Ok(format!("20 points, error ratio under halving in [{lo:.3}, {hi:.3}]"))
}

fn harness_gate() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_sderiv");
    let mut reports = Vec::new();
    for name in ["a.json", "b.json"] {
        let path = dir.path().join(name);
        let out = Command::new(bin)
            .args(["check", "--seed", "42", "--report"])
            .arg(&path)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.code() == Some(0), || {
            format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stdout))
        })?;
        reports.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    ensure(reports[0] == reports[1], || "seeded reports differ".to_string())?;
    let json: serde_json::Value = serde_json::from_slice(&reports[0]).map_err(|e| e.to_string())?;
    let violations = json["summary"]["violations"].as_u64().ok_or("summary lacks violations")?;
    ensure(violations == 0, || format!("{violations} expectation violations"))?;
    let functions = json["functions"].as_array().map_or(0, Vec::len);
    Ok(format!("exit 0, {functions} functions, 0 violations, {} identical bytes", reports[0].len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("algebraic identity suite", algebraic_identities),
        ("characteristic equations on positives", characteristic_on_positives),
        ("negative separation", negative_separation),
        ("perpendicular-derivative triple agreement", perpendicular_routes),
        ("limit-definition convergence", limit_convergence),
        ("power-series closed forms", series_closed_forms),
        ("order of accuracy", order_of_accuracy),
        ("harness gate", harness_gate),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", n + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", n + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
