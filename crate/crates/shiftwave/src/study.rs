//! Study drivers. Each study fans out over its times with rayon and returns
//! plain tables plus threshold checks; nothing touches the filesystem here.

use anyhow::Context;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};
use shiftwave_core::asymptotics::{
    nonincreasing, DecayReport, DecayTarget, Harness, ShockTrace, SqrtBoundReport,
};

use crate::config::{Experiment, StudyKind};

/// One threshold comparison.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable comparison, e.g. `<= -0.85`.
    pub limit: String,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, limit: impl Into<String>, pass: bool) -> Self {
        Check {
            name: name.into(),
            value,
            limit: limit.into(),
            pass,
        }
    }
}

/// A CSV table; the first column is always the independent variable.
#[derive(Debug, Clone)]
pub struct Table {
    pub file: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct StudyOutcome {
    pub name: String,
    pub tables: Vec<Table>,
    pub metrics: Map<String, Value>,
    pub checks: Vec<Check>,
}

impl StudyOutcome {
    pub fn new(name: &str) -> Self {
        StudyOutcome {
            name: name.to_string(),
            tables: vec![],
            metrics: Map::new(),
            checks: vec![],
        }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn harness(e: &Experiment) -> anyhow::Result<Harness> {
    Ok(Harness::new(e.flux, e.data.clone(), e.settings)?)
}

fn over_times<T, F>(times: &[f64], f: F) -> anyhow::Result<Vec<T>>
where
    T: Send,
    F: Fn(f64) -> shiftwave_core::Result<T> + Sync,
{
    times
        .par_iter()
        .map(|&t| f(t).with_context(|| format!("at t = {t}")))
        .collect()
}

fn report_json(r: &DecayReport) -> Value {
    json!({
        "fitted_slope": r.fitted_slope,
        "fitted_constant": r.fitted_constant,
        "r_squared": r.r_squared,
        "exact": r.exact,
        "fit_points": r.fit_points,
    })
}

/// Slope check; an exact report passes since there is nothing to decay.
fn slope_check(name: &str, r: &DecayReport, max: f64) -> Check {
    Check::new(name, r.fitted_slope, format!("<= {max}"), r.exact || r.fitted_slope <= max)
}

pub fn run_study(e: &Experiment, h: &Harness, kind: StudyKind) -> anyhow::Result<StudyOutcome> {
    let out = match kind {
        StudyKind::Shock => shock(e, h),
        StudyKind::Rarefaction | StudyKind::Constant => decay(e, h, kind),
        StudyKind::Periodic => periodic(e, h),
        StudyKind::Invariants => invariants(e, h),
        StudyKind::Envelope => envelope(e, h),
        StudyKind::Gluing => gluing(e, h),
        StudyKind::Merge => merge(e, h),
    };
    out.with_context(|| format!("{} study", kind.name()))
}

fn last(times: &[f64]) -> f64 {
    *times.last().expect("schedules are non-empty")
}

fn cutoff(e: &Experiment, h: &Harness) -> anyhow::Result<(f64, Option<f64>)> {
    let factor = e.config.study.transient_factor;
    if factor == 0.0 {
        return Ok((0.0, None));
    }
    let merge = h.merge_time_estimate(last(&e.times))?;
    Ok((merge.map_or(0.0, |m| factor * m), merge))
}

fn shock(e: &Experiment, h: &Harness) -> anyhow::Result<StudyOutcome> {
    let th = &e.config.thresholds;
    let k = e.config.study.k;
    let (cut, merge) = cutoff(e, h)?;
    let samples = over_times(&e.times, |t| h.shock_sample(t, k))?;
    let speed = e.flux.sigma(e.data.u_left, e.data.u_right)?;
    let x_inf = e.data.shift_x_infinity()?;
    let trace = ShockTrace::from_samples(&samples, speed, x_inf);
    let abs_res: Vec<f64> = trace.residuals.iter().map(|r| r.abs()).collect();
    let residual_fit = DecayReport::fit(&e.times, &abs_res, cut)?;
    let lefts: Vec<f64> = samples.iter().map(|s| s.left_sup).collect();
    let rights: Vec<f64> = samples.iter().map(|s| s.right_sup).collect();
    let left_fit = DecayReport::fit(&e.times, &lefts, cut)?;
    let right_fit = DecayReport::fit(&e.times, &rights, cut)?;

    let mut o = StudyOutcome::new("shock");
    o.metrics.insert("speed".into(), json!(speed));
    o.metrics.insert("x_infinity".into(), json!(x_inf));
    o.metrics.insert("merge_time".into(), json!(merge));
    o.metrics.insert("fit_cutoff".into(), json!(cut));
    o.metrics.insert("residual_fit".into(), report_json(&residual_fit));
    o.metrics.insert("left_sup_fit".into(), report_json(&left_fit));
    o.metrics.insert("right_sup_fit".into(), report_json(&right_fit));
    o.metrics.insert(
        "speed_consistent".into(),
        json!(trace.speed_consistent(e.flux.max_abs_speed())),
    );

    let final_res = *abs_res.last().expect("non-empty");
    if th.shock_monotone {
        o.checks.push(Check::new(
            "residual_monotone",
            f64::from(u8::from(nonincreasing(&abs_res))),
            "== 1",
            nonincreasing(&abs_res),
        ));
    }
    o.checks.push(slope_check("residual_slope", &residual_fit, th.shock_slope_max));
    o.checks.push(Check::new(
        "final_residual",
        final_res,
        format!("< {}", th.shock_final_residual),
        final_res < th.shock_final_residual,
    ));
    o.checks.push(slope_check("left_sup_slope", &left_fit, th.side_slope_max));
    o.checks.push(slope_check("right_sup_slope", &right_fit, th.side_slope_max));

    o.tables.push(Table {
        file: "shock.csv".into(),
        header: vec!["t", "position", "predicted", "residual", "transition"],
        rows: samples
            .iter()
            .map(|s| vec![s.t, s.position, s.predicted, s.residual(), s.transition])
            .collect(),
    });
    o.tables.push(Table {
        file: "shock_sides.csv".into(),
        header: vec!["t", "left_sup", "right_sup", "total_error"],
        rows: samples
            .iter()
            .map(|s| vec![s.t, s.left_sup, s.right_sup, s.total_error()])
            .collect(),
    });
    Ok(o)
}

fn decay(e: &Experiment, h: &Harness, kind: StudyKind) -> anyhow::Result<StudyOutcome> {
    let th = &e.config.thresholds;
    let samples = over_times(&e.times, |t| h.profile_sample(DecayTarget::Riemann, t))?;
    let errors: Vec<f64> = samples.iter().map(|s| s.sup_error).collect();
    let fit = DecayReport::fit(&e.times, &errors, 0.0)?;
    let mut o = StudyOutcome::new(kind.name());
    o.metrics.insert("fit".into(), report_json(&fit));
    o.checks.push(slope_check("sup_slope", &fit, th.decay_slope_max));
    if kind == StudyKind::Rarefaction && th.rarefaction_sqrt_envelope {
        let ok = fit.sqrt_dominated();
        o.checks.push(Check::new("sqrt_envelope", f64::from(u8::from(ok)), "== 1", ok));
    }
    o.tables.push(Table {
        file: format!("{}.csv", kind.name()),
        header: vec!["t", "sup_error", "oleinik"],
        rows: samples.iter().map(|s| vec![s.t, s.sup_error, s.oleinik]).collect(),
    });
    Ok(o)
}

fn periodic(e: &Experiment, h: &Harness) -> anyhow::Result<StudyOutcome> {
    let th = &e.config.thresholds;
    let samples = over_times(&e.times, |t| h.profile_sample(DecayTarget::Periodic, t))?;
    let errors: Vec<f64> = samples.iter().map(|s| s.sup_error).collect();
    let fit = DecayReport::fit(&e.times, &errors, 0.0)?;
    // sawtooth amplitude p / (2 f''(ū) t)
    let p = e.data.left.period();
    let curv = e.flux.fsecond(e.data.u_left);
    let predicted: Vec<f64> = e.times.iter().map(|t| p / (2.0 * curv * t)).collect();
    let worst_rel = errors
        .iter()
        .zip(&predicted)
        .map(|(s, q)| (s - q).abs() / q)
        .fold(0.0, f64::max);
    let worst_ole = samples.iter().map(|s| s.oleinik).fold(f64::NEG_INFINITY, f64::max);
    let [lo, hi] = th.periodic_slope;

    let mut o = StudyOutcome::new("periodic");
    o.metrics.insert("fit".into(), report_json(&fit));
    o.checks.push(Check::new(
        "sup_slope",
        fit.fitted_slope,
        format!("in [{lo}, {hi}]"),
        fit.fitted_slope >= lo && fit.fitted_slope <= hi,
    ));
    o.checks.push(Check::new(
        "amplitude_relative_error",
        worst_rel,
        format!("<= {}", th.periodic_amplitude_rel),
        worst_rel <= th.periodic_amplitude_rel,
    ));
    o.checks.push(Check::new(
        "oleinik_constant",
        worst_ole,
        format!("<= {}", th.oleinik_max),
        worst_ole <= th.oleinik_max,
    ));
    o.tables.push(Table {
        file: "periodic.csv".into(),
        header: vec!["t", "sup_error", "predicted", "oleinik"],
        rows: samples
            .iter()
            .zip(&predicted)
            .map(|(s, q)| vec![s.t, s.sup_error, *q, s.oleinik])
            .collect(),
    });
    Ok(o)
}

fn invariants(e: &Experiment, h: &Harness) -> anyhow::Result<StudyOutcome> {
    let th = &e.config.thresholds;
    let k = h.invariant_k(last(&e.times), e.config.study.k)?;
    let (p0, q0) = e.data.initial_invariants(k)?;
    let pq = over_times(&e.times, |t| h.invariant_sample(t, k))?;
    let tol = th.invariant_factor * h.dx() * e.data.sup_norm();
    let dp = pq.iter().map(|(p, _)| (p - p0).abs()).fold(0.0, f64::max);
    let dq = pq.iter().map(|(_, q)| (q - q0).abs()).fold(0.0, f64::max);

    let mut o = StudyOutcome::new("invariants");
    o.metrics.insert("k".into(), json!(k));
    o.metrics.insert("p0".into(), json!(p0));
    o.metrics.insert("q0".into(), json!(q0));
    o.metrics.insert("tolerance".into(), json!(tol));
    o.checks.push(Check::new("p_drift", dp, format!("<= {tol}"), dp <= tol));
    o.checks.push(Check::new("q_drift", dq, format!("<= {tol}"), dq <= tol));
    o.tables.push(Table {
        file: "invariants.csv".into(),
        header: vec!["t", "p", "q", "p0", "q0"],
        rows: e
            .times
            .iter()
            .zip(&pq)
            .map(|(t, (p, q))| vec![*t, *p, *q, p0, q0])
            .collect(),
    });
    Ok(o)
}

fn envelope(e: &Experiment, h: &Harness) -> anyhow::Result<StudyOutcome> {
    let samples = over_times(&e.times, |t| h.edge_sample(t))?;
    let r = SqrtBoundReport::from_samples(&samples);
    let mut o = StudyOutcome::new("envelope");
    for (name, ok) in [("left_ratio_bounded", r.left_bounded), ("right_ratio_bounded", r.right_bounded)] {
        o.checks.push(Check::new(name, f64::from(u8::from(ok)), "== 1", ok));
    }
    o.tables.push(Table {
        file: "envelope.csv".into(),
        header: vec!["t", "x1", "x2", "left_ratio", "right_ratio"],
        rows: samples
            .iter()
            .zip(r.left_ratio.iter().zip(&r.right_ratio))
            .map(|(s, (l, rr))| vec![s.t, s.x1, s.x2, *l, *rr])
            .collect(),
    });
    Ok(o)
}

fn gluing(e: &Experiment, h: &Harness) -> anyhow::Result<StudyOutcome> {
    let th = &e.config.thresholds;
    let rows = over_times(&e.times, |t| {
        let (a, b) = h.cone(t);
        let s = h.window_sample(a, b, t)?;
        let (dl, dr) = s.gluing_deviation();
        let xs = &s.field.xs;
        let x1 = s.first_left_deviation().map_or(f64::NAN, |i| xs[i]);
        let x2 = s.last_right_deviation().map_or(f64::NAN, |i| xs[i]);
        Ok(vec![t, dl, dr, x1, x2])
    })?;
    let worst = rows.iter().map(|r| r[1].max(r[2])).fold(0.0, f64::max);
    let mut o = StudyOutcome::new("gluing");
    o.checks.push(Check::new(
        "max_deviation",
        worst,
        format!("< {}", th.gluing_max),
        worst < th.gluing_max,
    ));
    o.tables.push(Table {
        file: "gluing.csv".into(),
        header: vec!["t", "left_deviation", "right_deviation", "x1", "x2"],
        rows,
    });
    Ok(o)
}

fn merge(e: &Experiment, h: &Harness) -> anyhow::Result<StudyOutcome> {
    let t_max = last(&e.times);
    let m = h.merge_time_estimate(t_max)?;
    let mut o = StudyOutcome::new("merge");
    o.metrics.insert("t_max".into(), json!(t_max));
    o.metrics.insert("merge_time".into(), json!(m));
    Ok(o)
}

/// Runs every configured study, concurrently, in a fixed order.
pub fn run_all(e: &Experiment) -> anyhow::Result<Vec<StudyOutcome>> {
    let h = harness(e)?;
    e.config
        .study
        .kinds
        .par_iter()
        .map(|k| run_study(e, &h, *k))
        .collect()
}
