//! End-to-end acceptance gate: one line per criterion, then a single assert.
//!
//! Reference values are recomputed here from closed forms or brute-force
//! quadrature rather than taken from the library.

use std::f64::consts::PI;
use std::path::PathBuf;

use shiftwave::study::{harness, run_study};
use shiftwave::{compare, Experiment, ExperimentConfig, StudyKind, StudyOutcome};

fn experiment(name: &str) -> Experiment {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name);
    ExperimentConfig::load(&path).unwrap().build().unwrap()
}

fn study(name: &str, kind: StudyKind) -> StudyOutcome {
    let e = experiment(name);
    let h = harness(&e).unwrap();
    run_study(&e, &h, kind).unwrap()
}

fn column(o: &StudyOutcome, file: &str, name: &str) -> Vec<f64> {
    let t = o.tables.iter().find(|t| t.file == file).unwrap();
    let j = t.header.iter().position(|h| *h == name).unwrap();
    t.rows.iter().map(|r| r[j]).collect()
}

/// Plain least-squares slope of `ln e` against `ln t`.
fn loglog_slope(t: &[f64], e: &[f64]) -> f64 {
    let n = t.len() as f64;
    let xs: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

#[derive(Default)]
struct Gate {
    lines: Vec<(usize, bool, String)>,
}

impl Gate {
    fn record(&mut self, id: usize, title: &str, pass: bool, detail: String) {
        let line = format!("criterion {id:>2} {title}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
        self.lines.push((id, pass, line));
    }

    fn report(mut self) -> Vec<usize> {
        self.lines.sort_by_key(|l| l.0);
        for (_, _, line) in &self.lines {
            println!("{line}");
        }
        self.lines.iter().filter(|l| !l.1).map(|l| l.0).collect()
    }
}

fn shock_criteria(gate: &mut Gate) {
    let o = study("shock_shift.toml", StudyKind::Shock);
    let t = column(&o, "shock.csv", "t");
    let x = column(&o, "shock.csv", "position");
    let x_inf = 0.3 / (4.0 * PI);
    let res: Vec<f64> = x.iter().map(|v| (v - x_inf).abs()).collect();
    let monotone = res.windows(2).all(|w| w[1] <= w[0]);
    let slope = loglog_slope(&t, &res);
    let last = *res.last().unwrap();
    gate.record(
        1,
        "shock shift",
        monotone && slope <= -0.85 && last < 5e-3,
        format!("monotone {monotone}, slope {slope:.4}, final |X - X_inf| {last:.3e}, X_inf {x_inf:.7}"),
    );

    let ls = loglog_slope(&t, &column(&o, "shock_sides.csv", "left_sup"));
    let rs = loglog_slope(&t, &column(&o, "shock_sides.csv", "right_sup"));
    gate.record(
        2,
        "shock-side sup-norm decay",
        ls <= -0.85 && rs <= -0.85,
        format!("left slope {ls:.4}, right slope {rs:.4}"),
    );
}

fn periodic_criteria(gate: &mut Gate) {
    let o = study("periodic_sine.toml", StudyKind::Periodic);
    let t = column(&o, "periodic.csv", "t");
    let sup = column(&o, "periodic.csv", "sup_error");
    let worst = t
        .iter()
        .zip(&sup)
        .map(|(t, s)| (s - PI / t).abs() / (PI / t))
        .fold(0.0, f64::max);
    let slope = loglog_slope(&t, &sup);
    gate.record(
        3,
        "periodic decay",
        worst <= 0.2 && (-1.15..=-0.85).contains(&slope),
        format!("max relative gap to pi/t {worst:.4}, slope {slope:.4}"),
    );

    let ole = column(&o, "periodic.csv", "oleinik");
    let e = t
        .iter()
        .zip(&ole)
        .filter(|(t, _)| **t >= 10.0)
        .map(|(_, e)| *e)
        .fold(f64::NEG_INFINITY, f64::max);
    gate.record(10, "entropy condition", e <= 1.05, format!("max E {e:.5}"));
}

fn rarefaction_criteria(gate: &mut Gate) {
    let o = study("rarefaction.toml", StudyKind::Rarefaction);
    let t = column(&o, "rarefaction.csv", "t");
    let err = column(&o, "rarefaction.csv", "sup_error");
    let slope = loglog_slope(&t, &err);
    let c = err[0] * t[0].sqrt();
    let dominated = t.iter().zip(&err).all(|(t, e)| *e <= c / t.sqrt() * (1.0 + 1e-9));
    gate.record(
        4,
        "rarefaction stability",
        slope <= -0.45 && dominated,
        format!("slope {slope:.4}, below C/sqrt(t) with C = {c:.4}: {dominated}"),
    );

    let o = study("constant.toml", StudyKind::Constant);
    let t = column(&o, "constant.csv", "t");
    let slope = loglog_slope(&t, &column(&o, "constant.csv", "sup_error"));
    gate.record(5, "constant case", slope <= -0.45, format!("slope {slope:.4}"));
}

/// Initial data of the invariant config, written out independently.
fn dip_data(x: f64) -> f64 {
    let dip = if x.abs() <= 1.0 { -0.1 * (1.0 + (PI * x).cos()) } else { 0.0 };
    if x < 0.0 {
        -1.0 + 0.3 * (2.0 * PI * x).cos() + dip
    } else {
        1.0 + 0.2 * (2.0 * PI * x / 1.5).sin() + dip
    }
}

fn invariant_criterion(gate: &mut Gate) {
    let e = experiment("invariants.toml");
    let h = harness(&e).unwrap();
    let o = run_study(&e, &h, StudyKind::Invariants).unwrap();
    let k = o.metrics["k"].as_i64().unwrap();
    // divides at t = 0: argmin of the cosine primitive is 3/4, of the sine one 0
    let a = 0.75 - k as f64;
    let b = 1.5 * k as f64;
    let n = ((b - a) / 1e-4).ceil() as usize;
    let hx = (b - a) / n as f64;
    let xs: Vec<f64> = (0..=n).map(|i| a + hx * i as f64).collect();
    let mut cum = vec![0.0; n + 1];
    for i in 1..=n {
        cum[i] = cum[i - 1] + 0.5 * hx * (dip_data(xs[i - 1]) + dip_data(xs[i]));
    }
    let total = cum[n];
    let p0 = (0..=n).map(|i| cum[i] + (xs[i] - a)).fold(0.0, f64::min);
    let q0 = (0..=n).map(|i| (total - cum[i]) - (b - xs[i])).fold(0.0, f64::max);

    let tol = 5.0 * h.dx() * 1.5;
    let p = column(&o, "invariants.csv", "p");
    let q = column(&o, "invariants.csv", "q");
    let dp = p.iter().map(|v| (v - p0).abs()).fold(0.0, f64::max);
    let dq = q.iter().map(|v| (v - q0).abs()).fold(0.0, f64::max);
    gate.record(
        6,
        "invariant conservation",
        dp <= tol && dq <= tol,
        format!("P0 {p0:.6}, Q0 {q0:.3e}, max drift P {dp:.3e}, Q {dq:.3e}, tolerance {tol:.4}"),
    );
}

fn envelope_criterion(gate: &mut Gate) {
    let o = study("envelope.toml", StudyKind::Envelope);
    let bounded = |r: &[f64]| {
        let half = r.len() / 2;
        (half..r.len()).all(|i| r[i] <= 1.1 * r[..i].iter().cloned().fold(0.0, f64::max) + 1e-12)
    };
    let l = column(&o, "envelope.csv", "left_ratio");
    let r = column(&o, "envelope.csv", "right_ratio");
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ");
    gate.record(
        7,
        "sqrt(t) envelope",
        bounded(&l) && bounded(&r),
        format!("left ratios [{}], right ratios [{}]", fmt(&l), fmt(&r)),
    );
}

fn gluing_criterion(gate: &mut Gate) {
    let o = study("gluing.toml", StudyKind::Gluing);
    let l = column(&o, "gluing.csv", "left_deviation")[0];
    let r = column(&o, "gluing.csv", "right_deviation")[0];
    gate.record(
        8,
        "gluing",
        l.max(r) < 1e-6,
        format!("t = 32, left {l:.3e}, right {r:.3e}"),
    );
}

fn oracle_criterion(gate: &mut Gate) {
    let e = experiment("oracle.toml");
    let o = compare::compare(&e).unwrap();
    let dx = column(&o, "compare.csv", "dx");
    let l1 = column(&o, "compare.csv", "l1_gap");
    let range = 2.2;
    let within = dx.iter().zip(&l1).all(|(d, g)| *g <= 3.0 * d * range);
    let ratio = l1[0] / l1[1];
    gate.record(
        9,
        "oracle equivalence",
        within && dx[0] == 2.0 * dx[1] && (1.5..=2.5).contains(&ratio),
        format!("L1 gaps {:.4e} at dx {}, {:.4e} at dx {}, ratio {ratio:.4}", l1[0], dx[0], l1[1], dx[1]),
    );
}

#[test]
fn acceptance_criteria() {
    let mut gate = Gate::default();
    shock_criteria(&mut gate);
    periodic_criteria(&mut gate);
    rarefaction_criteria(&mut gate);
    invariant_criterion(&mut gate);
    envelope_criterion(&mut gate);
    gluing_criterion(&mut gate);
    oracle_criterion(&mut gate);
    let failures = gate.report();
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
