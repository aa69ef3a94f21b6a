//! Variational solution against the Godunov oracle.

use anyhow::{bail, Context};
use rayon::prelude::*;
use serde_json::json;
use shiftwave_core::godunov::{Boundary, FvState};
use shiftwave_core::VariationalSolver;

use crate::config::{CompareSpec, Experiment};
use crate::study::{Check, StudyOutcome, Table};

/// Gaps between the exact cell averages and the Godunov cells on the window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    pub t: f64,
    pub dx: f64,
    pub l1: f64,
    pub linf: f64,
}

/// Godunov domain for one run: the window widened by the numerical domain
/// of dependence `max|f'| t / cfl` and grown to contain `[-N, N]`.
pub fn domain(e: &Experiment, c: &CompareSpec, t: f64, dx: f64) -> anyhow::Result<(f64, f64)> {
    let [a, b] = c.window;
    let smax = e.flux.fprime(e.data.total_range().0).abs().max(e.flux.fprime(e.data.total_range().1).abs());
    let pad = smax * t / c.cfl + 2.0 * dx;
    let n = e.data.half_width();
    let need = ((a - pad).min(-n), (b + pad).max(n));
    match c.domain {
        Some([da, db]) => {
            if da > need.0 || db < need.1 {
                bail!(
                    "domain [{da}, {db}] is too small for t = {t}: the frozen boundary data would reach \
                     the window; it must contain [{:.6}, {:.6}]",
                    need.0,
                    need.1
                );
            }
            Ok((a - ((a - da) / dx).floor() * dx, b + ((db - b) / dx).floor() * dx))
        }
        None => Ok((a - ((a - need.0) / dx).ceil() * dx, b + ((need.1 - b) / dx).ceil() * dx)),
    }
}

pub fn gap(e: &Experiment, solver: &VariationalSolver, t: f64, dx: f64) -> anyhow::Result<Gap> {
    let c = e.config.compare.as_ref().context("no [compare] section")?;
    let [a, b] = c.window;
    let (da, db) = domain(e, c, t, dx)?;
    let cells = ((db - da) / dx).round() as usize;
    let mut fv = FvState::from_data(&e.data, da, db, cells, c.cfl)?;
    let bc = Boundary::background(&e.data, da, db, dx)?;
    fv.run_until(&e.flux, bc, t)?;

    let i0 = ((a - da) / dx).round() as usize;
    let i1 = ((b - da) / dx).round() as usize;
    let xs: Vec<f64> = (i0..=i1).map(|i| da + dx * i as f64).collect();
    let (_, potential) = solver.sample_points(&xs, t, dx)?;
    let mut l1 = 0.0;
    let mut linf = 0.0f64;
    for j in 0..i1 - i0 {
        let exact = (potential[j + 1] - potential[j]) / (xs[j + 1] - xs[j]);
        let d = (exact - fv.cells[i0 + j]).abs();
        l1 += d * dx;
        linf = linf.max(d);
    }
    Ok(Gap { t, dx, l1, linf })
}

/// All `(t, dx)` gaps plus the threshold checks.
pub fn compare(e: &Experiment) -> anyhow::Result<StudyOutcome> {
    let c = e.config.compare.as_ref().context("the config has no [compare] section")?;
    let th = &e.config.thresholds;
    let times = e.compare_times();
    let mut dxs = c.dx.clone();
    dxs.sort_by(|x, y| y.total_cmp(x));
    dxs.dedup();
    // refuse before any work if a window is too small
    for &t in &times {
        for &dx in &dxs {
            domain(e, c, t, dx)?;
        }
    }
    let solver = VariationalSolver::new(e.flux, e.data.clone(), e.settings.solver)?;
    let jobs: Vec<(f64, f64)> = times.iter().flat_map(|&t| dxs.iter().map(move |&dx| (t, dx))).collect();
    let gaps: Vec<Gap> = jobs
        .par_iter()
        .map(|&(t, dx)| gap(e, &solver, t, dx).with_context(|| format!("t = {t}, dx = {dx}")))
        .collect::<anyhow::Result<_>>()?;

    let (lo, hi) = e.data.total_range();
    let range = hi - lo;
    let mut o = StudyOutcome::new("compare");
    o.metrics.insert("range".into(), json!(range));
    o.metrics.insert("window".into(), json!(c.window));
    let mut orders = vec![];
    // roundoff allowance so exactly representable data can pass
    let floor = 1e-12 * (c.window[1] - c.window[0]) * (1.0 + e.data.sup_norm());
    for g in &gaps {
        let bound = th.l1_factor * g.dx * range + floor;
        o.checks.push(Check::new(
            format!("l1_gap(t={}, dx={})", g.t, g.dx),
            g.l1,
            format!("<= {bound}"),
            g.l1 <= bound,
        ));
    }
    let [rlo, rhi] = th.gap_ratio;
    for w in gaps.windows(2) {
        let (g1, g2) = (w[0], w[1]);
        if g1.t != g2.t {
            continue;
        }
        let exact = g1.l1 < 1e-12 && g2.l1 < 1e-12;
        // normalised to a halving of dx
        let order = (g1.l1 / g2.l1).ln() / (g1.dx / g2.dx).ln();
        let ratio = 2f64.powf(order);
        orders.push(json!({"t": g1.t, "dx": [g1.dx, g2.dx], "order": order}));
        o.checks.push(Check::new(
            format!("gap_ratio(t={}, dx={}->{})", g1.t, g1.dx, g2.dx),
            ratio,
            format!("in [{rlo}, {rhi}]"),
            exact || (ratio >= rlo && ratio <= rhi),
        ));
    }
    o.metrics.insert("orders".into(), json!(orders));
    o.tables.push(Table {
        file: "compare.csv".into(),
        header: vec!["t", "dx", "l1_gap", "linf_gap"],
        rows: gaps.iter().map(|g| vec![g.t, g.dx, g.l1, g.linf]).collect(),
    });
    Ok(o)
}
