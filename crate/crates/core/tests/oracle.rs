//! The variational solution against the finite-volume scheme and the
//! closed-form Riemann solutions.

use shiftwave_core::godunov::{Boundary, FvState, DEFAULT_CFL};
use shiftwave_core::laxoleinik::SolverSettings;
use shiftwave_core::{
    CompositeInitialData, FluxKind, FluxModel, MiddlePart, PeriodicProfile, RiemannSolution, Side, VariationalSolver,
};

fn l1_gap(flux: FluxModel, data: &CompositeInitialData, window: (f64, f64), t: f64, dx: f64) -> f64 {
    let (a, b) = window;
    let pad = flux.max_abs_speed() * t / DEFAULT_CFL + 2.0 * dx;
    let da = a - ((pad.max(a + data.half_width())) / dx).ceil() * dx;
    let db = b + ((pad.max(data.half_width() - b)) / dx).ceil() * dx;
    let cells = ((db - da) / dx).round() as usize;
    let mut fv = FvState::from_data(data, da, db, cells, DEFAULT_CFL).unwrap();
    fv.run_until(&flux, Boundary::background(data, da, db, dx).unwrap(), t).unwrap();

    let solver = VariationalSolver::new(flux, data.clone(), SolverSettings::default()).unwrap();
    let i0 = ((a - da) / dx).round() as usize;
    let i1 = ((b - da) / dx).round() as usize;
    let mut gap = 0.0;
    for i in i0..i1 {
        let x = da + dx * i as f64;
        let avg = solver.integral(x, x + dx, t).unwrap() / dx;
        gap += (avg - fv.cells[i]).abs() * dx;
    }
    gap
}

#[test]
fn cosh_flux_with_bump_converges_at_first_order() {
    let flux = FluxModel::for_range(FluxKind::Cosh, -1.5, 1.5).unwrap();
    let data = CompositeInitialData::new(
        0.8,
        -0.6,
        PeriodicProfile::cosine(0.2, 1.0, 0.0).unwrap(),
        PeriodicProfile::sawtooth(0.15, 0.5, 0.0).unwrap(),
        1.0,
        MiddlePart::Bump { center: 0.2, half_width: 0.5, mass: 0.1 },
    )
    .unwrap();
    let (lo, hi) = data.total_range();
    let coarse = l1_gap(flux, &data, (-3.0, 3.0), 3.0, 1.0 / 128.0);
    let fine = l1_gap(flux, &data, (-3.0, 3.0), 3.0, 1.0 / 256.0);
    assert!(coarse <= 3.0 * (hi - lo) / 128.0, "coarse gap {coarse}");
    let ratio = coarse / fine;
    assert!((1.4..=2.6).contains(&ratio), "ratio {ratio}, gaps {coarse} {fine}");
}

#[test]
fn riemann_data_matches_closed_form() {
    let flux = FluxModel::for_range(FluxKind::Burgers, -2.0, 2.0).unwrap();
    for (ul, ur) in [(1.0, -0.5), (-1.0, 1.5), (0.3, 0.3)] {
        let data = CompositeInitialData::riemann(ul, ur).unwrap();
        let solver = VariationalSolver::new(flux, data, SolverSettings::default()).unwrap();
        let exact = RiemannSolution::new(flux, ul, ur).unwrap();
        let t = 2.0;
        let shock = 0.5 * (ul + ur) * t;
        for i in 0..=80 {
            let x = -4.0 + 0.1 * i as f64;
            if ul > ur && (x - shock).abs() < 1e-6 {
                continue;
            }
            let v = solver.evaluate(x, t, Side::Left).unwrap();
            let w = exact.evaluate(x, t);
            assert!((v - w).abs() < 1e-7, "({ul}, {ur}) at x = {x}: {v} vs {w}");
        }
    }
}
