//! Large-time measurements: shock location and shift, decay fits toward the
//! asymptotic profiles, the invariants `P` and `Q`, merge time, the `sqrt(t)`
//! envelope of the perturbed region and the gluing to the periodic references.
//!
//! Every per-time quantity is a pure function of `t`, so callers may fan the
//! sample methods out over times and assemble traces with the `from_samples`
//! constructors.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::SolutionField;
use crate::flux::FluxModel;
use crate::laxoleinik::{RiemannSolution, Side, SolverSettings, VariationalSolver};
use crate::math;
use crate::profiles::{CompositeInitialData, DivideSide};

/// Errors at or below this are treated as zero when fitting.
pub const FIT_FLOOR: f64 = 1e-13;
/// A report whose errors all lie below this is flagged exact.
pub const EXACT_LEVEL: f64 = 1e-10;
pub const MIN_FIT_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarnessSettings {
    pub solver: SolverSettings,
    /// Half-width `W` of the windows around the shock or the fan edges.
    /// `None` means `4 * max(p_l, p_r)`.
    pub window_margin: Option<f64>,
    /// Field nodes per shortest period.
    pub points_per_period: usize,
    /// Deviation threshold relative to the range of `u0`.
    pub deviation_threshold: f64,
    /// Fits ignore times below `transient_factor * merge time` when a merge
    /// time is supplied.
    pub transient_factor: f64,
    /// Sampled times used by [`Harness::merge_time_estimate`].
    pub merge_samples: usize,
}

impl Default for HarnessSettings {
    fn default() -> Self {
        HarnessSettings {
            solver: SolverSettings::default(),
            window_margin: None,
            points_per_period: 64,
            deviation_threshold: 1e-4,
            transient_factor: 4.0,
            merge_samples: 64,
        }
    }
}

/// The solver for `u0` together with the two periodic reference solutions
/// `u_l` (data `ū_l + w_l`) and `u_r` (data `ū_r + w_r`).
#[derive(Debug, Clone)]
pub struct Harness {
    flux: FluxModel,
    data: CompositeInitialData,
    settings: HarnessSettings,
    full: VariationalSolver,
    left: VariationalSolver,
    right: VariationalSolver,
}

/// The full solution and both references sampled on common nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSample {
    pub field: SolutionField,
    pub left_ref: Vec<f64>,
    pub right_ref: Vec<f64>,
    pub threshold: f64,
}

impl WindowSample {
    /// First node where `u` leaves `u_l`.
    pub fn first_left_deviation(&self) -> Option<usize> {
        let v = &self.field.values;
        (0..v.len()).find(|&i| (v[i] - self.left_ref[i]).abs() > self.threshold)
    }

    /// Last node where `u` differs from `u_r`.
    pub fn last_right_deviation(&self) -> Option<usize> {
        let v = &self.field.values;
        (0..v.len()).rev().find(|&i| (v[i] - self.right_ref[i]).abs() > self.threshold)
    }

    /// Largest `|u - u_l|` left of the first deviation and `|u - u_r|` right
    /// of the last one.
    pub fn gluing_deviation(&self) -> (f64, f64) {
        let v = &self.field.values;
        let n = v.len();
        let first = self.first_left_deviation().unwrap_or(n);
        let last = self.last_right_deviation().map_or(0, |i| i + 1);
        let dl = (0..first).map(|i| (v[i] - self.left_ref[i]).abs()).fold(0.0, f64::max);
        let dr = (last..n).map(|i| (v[i] - self.right_ref[i]).abs()).fold(0.0, f64::max);
        (dl, dr)
    }

    /// `(x_a, x_b)`: end of the leading run matching `u_l` and start of the
    /// trailing run matching `u_r`.
    pub fn transition_interval(&self) -> Result<(f64, f64)> {
        let xs = &self.field.xs;
        let first = self
            .first_left_deviation()
            .ok_or(Error::Precondition("no transition: u matches u_l across the window"))?;
        let last = self
            .last_right_deviation()
            .ok_or(Error::Precondition("no transition: u matches u_r across the window"))?;
        if first == 0 || last + 1 >= xs.len() {
            return Err(Error::Precondition("window too small to bracket the transition"));
        }
        let (a, b) = (xs[first - 1], xs[last + 1]);
        Ok((a.min(b), a.max(b)))
    }
}

/// One time of a shock study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockSample {
    pub t: f64,
    /// Mass-method position.
    pub position: f64,
    /// Transition-method position.
    pub transition: f64,
    /// `s t + X∞`.
    pub predicted: f64,
    /// `sup |u - ū_l|` on `[X - W, X)`.
    pub left_sup: f64,
    /// `sup |u - ū_r|` on `(X, X + W]`.
    pub right_sup: f64,
    /// Gluing deviations outside the transition zone.
    pub gluing_left: f64,
    pub gluing_right: f64,
}

impl ShockSample {
    pub fn residual(&self) -> f64 {
        self.position - self.predicted
    }

    /// `sup_{x<X} |u - ū_l| + sup_{x>X} |u - ū_r| + |X - s t - X∞|`.
    pub fn total_error(&self) -> f64 {
        self.left_sup + self.right_sup + self.residual().abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShockTrace {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub predicted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub transitions: Vec<f64>,
    pub speed: f64,
    pub x_infinity: f64,
}

impl ShockTrace {
    pub fn from_samples(samples: &[ShockSample], speed: f64, x_infinity: f64) -> Self {
        ShockTrace {
            times: samples.iter().map(|s| s.t).collect(),
            positions: samples.iter().map(|s| s.position).collect(),
            predicted: samples.iter().map(|s| s.predicted).collect(),
            residuals: samples.iter().map(|s| s.residual()).collect(),
            transitions: samples.iter().map(|s| s.transition).collect(),
            speed,
            x_infinity,
        }
    }

    /// `|ΔX / Δt| <= max_speed` between consecutive samples.
    pub fn speed_consistent(&self, max_speed: f64) -> bool {
        self.times.windows(2).zip(self.positions.windows(2)).all(|(t, x)| {
            (x[1] - x[0]).abs() <= max_speed * (t[1] - t[0]) * (1.0 + 1e-12) + 1e-12
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub times: Vec<f64>,
    pub errors: Vec<f64>,
    /// NaN when the report is exact.
    pub fitted_slope: f64,
    pub fitted_constant: f64,
    pub r_squared: f64,
    /// All errors below [`EXACT_LEVEL`]; no rate is meaningful.
    pub exact: bool,
    /// Number of points that entered the fit.
    pub fit_points: usize,
}

impl DecayReport {
    /// Least squares of `ln e` on `ln t` over points with `t >= cutoff` and
    /// `e > FIT_FLOOR`.
    pub fn fit(times: &[f64], errors: &[f64], cutoff: f64) -> Result<Self> {
        if times.len() != errors.len() {
            return Err(Error::InvalidInput("times and errors differ in length"));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) || times.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::InvalidInput("times must be positive and strictly increasing"));
        }
        if errors.iter().any(|e| !(*e >= 0.0)) {
            return Err(Error::InvalidInput("errors must be non-negative"));
        }
        let mut report = DecayReport {
            times: times.to_vec(),
            errors: errors.to_vec(),
            fitted_slope: f64::NAN,
            fitted_constant: f64::NAN,
            r_squared: f64::NAN,
            exact: false,
            fit_points: 0,
        };
        if !errors.is_empty() && errors.iter().all(|e| *e < EXACT_LEVEL) {
            report.exact = true;
            return Ok(report);
        }
        let pts: Vec<(f64, f64)> = times
            .iter()
            .zip(errors)
            .filter(|(t, e)| **t >= cutoff && **e > FIT_FLOOR)
            .map(|(t, e)| (math::ln(*t), math::ln(*e)))
            .collect();
        if pts.len() < MIN_FIT_POINTS {
            return Err(Error::InsufficientData {
                needed: MIN_FIT_POINTS,
                got: pts.len(),
            });
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let syy: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        report.fitted_slope = slope;
        report.fitted_constant = math::exp(intercept);
        report.r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
        report.fit_points = pts.len();
        Ok(report)
    }

    /// `e_i <= C / sqrt(t_i)` with `C = e_0 sqrt(t_0)`.
    pub fn sqrt_dominated(&self) -> bool {
        let Some((&t0, &e0)) = self.times.first().zip(self.errors.first()) else {
            return true;
        };
        let c = e0 * math::sqrt(t0);
        self.times
            .iter()
            .zip(&self.errors)
            .all(|(t, e)| *e <= c / math::sqrt(*t) * (1.0 + 1e-9))
    }
}

/// Whether `values` never increase after the first entry.
pub fn nonincreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantTrace {
    pub times: Vec<f64>,
    pub p_values: Vec<f64>,
    pub q_values: Vec<f64>,
    pub p0: f64,
    pub q0: f64,
    pub k: i64,
}

impl InvariantTrace {
    pub fn max_drift(&self) -> (f64, f64) {
        let dp = self.p_values.iter().map(|p| (p - self.p0).abs()).fold(0.0, f64::max);
        let dq = self.q_values.iter().map(|q| (q - self.q0).abs()).fold(0.0, f64::max);
        (dp, dq)
    }
}

/// Edge proxies of the perturbed region at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeSample {
    pub t: f64,
    /// First node deviating from `u_l`, or `f'(ū_l) t`.
    pub x1: f64,
    /// Last node deviating from `u_r`, or `f'(ū_r) t`.
    pub x2: f64,
    /// `|x1 - f'(ū_l) t|` and `|x2 - f'(ū_r) t|`.
    pub left_distance: f64,
    pub right_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqrtBoundReport {
    pub times: Vec<f64>,
    pub left_ratio: Vec<f64>,
    pub right_ratio: Vec<f64>,
    pub left_bounded: bool,
    pub right_bounded: bool,
}

impl SqrtBoundReport {
    pub fn from_samples(samples: &[EdgeSample]) -> Self {
        let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
        let left_ratio: Vec<f64> = samples.iter().map(|s| s.left_distance / math::sqrt(s.t)).collect();
        let right_ratio: Vec<f64> = samples.iter().map(|s| s.right_distance / math::sqrt(s.t)).collect();
        SqrtBoundReport {
            left_bounded: ratio_bounded(&left_ratio),
            right_bounded: ratio_bounded(&right_ratio),
            times,
            left_ratio,
            right_ratio,
        }
    }

    pub fn bounded(&self) -> bool {
        self.left_bounded && self.right_bounded
    }
}

/// Every ratio in the last half stays within `1.1x` of the running maximum
/// of the ratios before it.
pub fn ratio_bounded(ratios: &[f64]) -> bool {
    let n = ratios.len();
    let mut running = 0.0f64;
    for (i, r) in ratios.iter().enumerate() {
        if i >= n / 2 && i > 0 && *r > 1.1 * running + 1e-12 {
            return false;
        }
        running = running.max(*r);
    }
    true
}

/// What a decay study measures against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayTarget {
    /// The Riemann solution of `(ū_l, ū_r)`.
    Riemann,
    /// The left periodic reference alone, compared with `ū_l` over one period.
    Periodic,
}

/// One time of a rarefaction, constant or periodic study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub t: f64,
    pub sup_error: f64,
    pub edges: EdgeSample,
    /// `sup t (u(x + a) - u(x)) / a` over the sampled pairs.
    pub oleinik: f64,
}

impl Harness {
    pub fn new(flux: FluxModel, data: CompositeInitialData, settings: HarnessSettings) -> Result<Self> {
        if settings.points_per_period < 2 {
            return Err(Error::InvalidInput("need at least two points per period"));
        }
        if !(settings.deviation_threshold > 0.0) {
            return Err(Error::InvalidInput("deviation threshold must be positive"));
        }
        if let Some(w) = settings.window_margin {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidInput("window margin must be positive"));
            }
        }
        let full = VariationalSolver::new(flux, data.clone(), settings.solver)?;
        let left = VariationalSolver::periodic(flux, data.u_left, data.left.clone(), settings.solver)?;
        let right = VariationalSolver::periodic(flux, data.u_right, data.right.clone(), settings.solver)?;
        Ok(Harness {
            flux,
            data,
            settings,
            full,
            left,
            right,
        })
    }

    pub fn flux(&self) -> &FluxModel {
        &self.flux
    }

    pub fn data(&self) -> &CompositeInitialData {
        &self.data
    }

    pub fn settings(&self) -> &HarnessSettings {
        &self.settings
    }

    pub fn solver(&self) -> &VariationalSolver {
        &self.full
    }

    pub fn left_reference(&self) -> &VariationalSolver {
        &self.left
    }

    pub fn right_reference(&self) -> &VariationalSolver {
        &self.right
    }

    pub fn window_margin(&self) -> f64 {
        self.settings.window_margin.unwrap_or(4.0 * self.data.max_period())
    }

    /// Field spacing: shortest period over `points_per_period`.
    pub fn dx(&self) -> f64 {
        self.data.min_period() / self.settings.points_per_period as f64
    }

    pub fn threshold(&self) -> f64 {
        self.settings.deviation_threshold * (self.full.range().1 - self.full.range().0)
    }

    fn speeds(&self) -> (f64, f64) {
        let (lo, hi) = self.full.range();
        (self.flux.fprime(lo), self.flux.fprime(hi))
    }

    /// Window outside which `u` coincides with the references: the region
    /// reachable from `[-N, N]` by time `t`, padded by one period per side.
    pub fn cone(&self, t: f64) -> (f64, f64) {
        let n = self.data.half_width();
        let (slo, shi) = self.speeds();
        (-n + slo * t - self.data.left.period(), n + shi * t + self.data.right.period())
    }

    /// Smallest divide index with `Γ_l^K(s)` left of and `Γ_r^K(s)` right of
    /// the perturbed cone for every `s <= t`.
    pub fn required_k(&self, t: f64) -> i64 {
        let (slo, shi) = self.speeds();
        let pl = self.data.left.period();
        let pr = self.data.right.period();
        let el = math::ceil(((self.flux.fprime(self.data.u_left) - slo) * t / pl).max(0.0)) as i64;
        let er = math::ceil(((shi - self.flux.fprime(self.data.u_right)) * t / pr).max(0.0)) as i64;
        self.data.smallest_k() + el.max(er) + 1
    }

    fn resolve_k(&self, t: f64, k: Option<i64>) -> Result<i64> {
        let need = self.required_k(t);
        match k {
            None => Ok(need),
            Some(k) if k >= need => Ok(k),
            Some(_) => Err(Error::Precondition("K too small: the divides do not bracket the perturbed region")),
        }
    }

    fn check_time(t: f64) -> Result<()> {
        if t > 0.0 && t.is_finite() {
            Ok(())
        } else {
            Err(Error::Precondition("sample times must be positive"))
        }
    }

    /// Full solution and both references at common nodes of `[a, b]`.
    pub fn window_sample(&self, a: f64, b: f64, t: f64) -> Result<WindowSample> {
        let dx = self.dx();
        let nodes = (math::ceil((b - a) / dx) as usize).max(1) + 1;
        let field = self.full.sample_field(a, b, t, nodes)?;
        let h = field.dx();
        let (left_ref, _) = self.left.sample_points(&field.xs, t, h)?;
        let (right_ref, _) = self.right.sample_points(&field.xs, t, h)?;
        Ok(WindowSample {
            field,
            left_ref,
            right_ref,
            threshold: self.threshold(),
        })
    }

    /// `Π_l(X) = ∫_Γ^X (u_l - ū_l)` from the nearest left divide `Γ <= X` of `u_l`.
    fn left_correction(&self, x: f64, t: f64) -> Result<f64> {
        let p = self.data.left.period();
        let base = self.data.left.argmin_in_period() + self.flux.fprime(self.data.u_left) * t;
        let gamma = base - math::ceil((base - x) / p) * p;
        Ok(self.left.integral(gamma, x, t)? - self.data.u_left * (x - gamma))
    }

    /// `Π_r(X) = ∫_X^Γ (u_r - ū_r)` to the nearest right divide `Γ >= X` of `u_r`.
    fn right_correction(&self, x: f64, t: f64) -> Result<f64> {
        let p = self.data.right.period();
        let base = self.data.right.argmin_in_period() + self.flux.fprime(self.data.u_right) * t;
        let gamma = base + math::ceil((x - base) / p) * p;
        Ok(self.right.integral(x, gamma, t)? - self.data.u_right * (gamma - x))
    }

    /// Mass-method shock position.
    ///
    /// Conservation between the divides `Γ_l^K(t)` and `Γ_r^K(t)` gives
    /// `(ū_l - ū_r) X = ∫ u + ū_l Γ_l - ū_r Γ_r - Π_l(X) - Π_r(X)`
    /// once `u = u_l` left of `X` and `u = u_r` right of it. The left-hand
    /// minus right-hand side is increasing in `X`, so the root is bisected.
    pub fn mass_position(&self, t: f64, k: Option<i64>) -> Result<f64> {
        Self::check_time(t)?;
        let delta = self.data.u_left - self.data.u_right;
        if !(delta > 0.0) {
            return Err(Error::Precondition("shock location needs u_left > u_right"));
        }
        let k = self.resolve_k(t, k)?;
        let gl = self.data.gamma_curve(DivideSide::Left, k, t, &self.flux);
        let gr = self.data.gamma_curve(DivideSide::Right, k, t, &self.flux);
        let mass = self.full.integral(gl, gr, t)?;
        let raw = (mass + self.data.u_left * gl - self.data.u_right * gr) / delta;
        let h = |x: f64| -> Result<f64> {
            Ok(x - raw + (self.left_correction(x, t)? + self.right_correction(x, t)?) / delta)
        };
        let spread = (self.data.left.sup_norm() * self.data.left.period()
            + self.data.right.sup_norm() * self.data.right.period())
            / delta;
        if spread == 0.0 {
            return Ok(raw);
        }
        let mut lo = raw - spread - 1e-9;
        let mut hi = raw + spread + 1e-9;
        let (mut hlo, hhi) = (h(lo)?, h(hi)?);
        if !(hlo <= 0.0 && hhi >= 0.0) {
            return Err(Error::Precondition("mass balance has no root near the raw estimate"));
        }
        for _ in 0..100 {
            if hi - lo <= 1e-13 * (1.0 + raw.abs()) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let hm = h(mid)?;
            if (hm <= 0.0) == (hlo <= 0.0) {
                lo = mid;
                hlo = hm;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Both shock estimators and the side decay at time `t`.
    ///
    /// Errors when the mass and transition positions differ by more than
    /// `max(p_l, p_r)`.
    pub fn shock_sample(&self, t: f64, k: Option<i64>) -> Result<ShockSample> {
        let position = self.mass_position(t, k)?;
        let speed = self.flux.sigma(self.data.u_left, self.data.u_right)?;
        let predicted = speed * t + self.data.shift_x_infinity()?;

        let w = self.window_margin();
        let (ca, cb) = self.cone(t);
        let a = ca.min(position - w);
        let b = cb.max(position + w);
        let sample = self.window_sample(a, b, t)?;
        let (xa, xb) = sample.transition_interval()?;
        let transition = 0.5 * (xa + xb);
        let limit = self.data.max_period();
        if (transition - position).abs() > limit {
            return Err(Error::EstimatorDisagreement {
                mass: position,
                transition,
                limit,
            });
        }

        let guard = 1e-6 * (1.0 + position.abs());
        let f = &sample.field;
        let mut left_sup = 0.0f64;
        let mut right_sup = 0.0f64;
        for (x, u) in f.xs.iter().zip(&f.values) {
            if *x >= position - w && *x < position - guard {
                left_sup = left_sup.max((u - self.data.u_left).abs());
            } else if *x > position + guard && *x <= position + w {
                right_sup = right_sup.max((u - self.data.u_right).abs());
            }
        }
        let (gluing_left, gluing_right) = sample.gluing_deviation();
        Ok(ShockSample {
            t,
            position,
            transition,
            predicted,
            left_sup,
            right_sup,
            gluing_left,
            gluing_right,
        })
    }

    /// Sequential shock trace; see [`Harness::shock_sample`].
    pub fn shock_trace(&self, times: &[f64], k: Option<i64>) -> Result<(ShockTrace, Vec<ShockSample>)> {
        check_schedule(times)?;
        let samples = times
            .iter()
            .map(|&t| self.shock_sample(t, k))
            .collect::<Result<Vec<_>>>()?;
        let speed = self.flux.sigma(self.data.u_left, self.data.u_right)?;
        let trace = ShockTrace::from_samples(&samples, speed, self.data.shift_x_infinity()?);
        Ok((trace, samples))
    }

    fn edges(&self, sample: &WindowSample, t: f64) -> EdgeSample {
        let xs = &sample.field.xs;
        let cl = self.flux.fprime(self.data.u_left) * t;
        let cr = self.flux.fprime(self.data.u_right) * t;
        let x1 = sample.first_left_deviation().map_or(cl, |i| xs[i]);
        let x2 = sample.last_right_deviation().map_or(cr, |i| xs[i]);
        EdgeSample {
            t,
            x1,
            x2,
            left_distance: (x1 - cl).abs(),
            right_distance: (x2 - cr).abs(),
        }
    }

    /// Sup-norm distance to the target profile at time `t`.
    ///
    /// `Riemann`: over `[f'_min t - W, f'_max t + W]` against the Riemann
    /// solution of the far-field states. `Periodic`: over one period of the
    /// left reference against `ū_l`, including the one-sided limits at its
    /// shocks.
    pub fn profile_sample(&self, target: DecayTarget, t: f64) -> Result<ProfileSample> {
        Self::check_time(t)?;
        match target {
            DecayTarget::Riemann => {
                let riemann = RiemannSolution::new(self.flux, self.data.u_left, self.data.u_right)?;
                let w = self.window_margin();
                let (slo, shi) = self.speeds();
                let (ca, cb) = self.cone(t);
                let sample = self.window_sample(ca.min(slo * t - w), cb.max(shi * t + w), t)?;
                let f = &sample.field;
                let sup_error = f
                    .xs
                    .iter()
                    .zip(&f.values)
                    .filter(|(x, _)| **x >= slo * t - w && **x <= shi * t + w)
                    .map(|(x, u)| (u - riemann.evaluate(*x, t)).abs())
                    .fold(0.0, f64::max);
                Ok(ProfileSample {
                    t,
                    sup_error,
                    edges: self.edges(&sample, t),
                    oleinik: f.oleinik_constant(4),
                })
            }
            DecayTarget::Periodic => {
                let p = self.data.left.period();
                let nodes = self.settings.points_per_period.max(64) + 1;
                let mut field = self.left.sample_field(0.0, p, t, nodes)?;
                self.left.locate_jumps(&mut field)?;
                let ubar = self.data.u_left;
                let mut sup = field.values.iter().map(|u| (u - ubar).abs()).fold(0.0, f64::max);
                for j in field.jumps.iter().filter_map(|j| j.located) {
                    sup = sup.max((j.minus - ubar).abs()).max((j.plus - ubar).abs());
                }
                let x = self.flux.fprime(ubar) * t;
                Ok(ProfileSample {
                    t,
                    sup_error: sup,
                    edges: EdgeSample {
                        t,
                        x1: x,
                        x2: x,
                        left_distance: 0.0,
                        right_distance: 0.0,
                    },
                    oleinik: field.oleinik_constant(4),
                })
            }
        }
    }

    /// Sequential decay study. `merge_time`, when given, sets the transient
    /// cutoff `transient_factor * merge_time`.
    pub fn decay_study(&self, target: DecayTarget, times: &[f64], merge_time: Option<f64>) -> Result<DecayReport> {
        check_schedule(times)?;
        let errors = times
            .iter()
            .map(|&t| self.profile_sample(target, t).map(|s| s.sup_error))
            .collect::<Result<Vec<_>>>()?;
        let cutoff = merge_time.map_or(0.0, |m| self.settings.transient_factor * m);
        DecayReport::fit(times, &errors, cutoff)
    }

    /// `(P(t), Q(t))` with the divides `Γ^K`.
    pub fn invariant_sample(&self, t: f64, k: i64) -> Result<(f64, f64)> {
        Self::check_time(t)?;
        let gl = self.data.gamma_curve(DivideSide::Left, k, t, &self.flux);
        let gr = self.data.gamma_curve(DivideSide::Right, k, t, &self.flux);
        let dx = self.dx();
        let nodes = (math::ceil((gr - gl) / dx) as usize).max(1) + 1;
        let f = self.full.sample_field(gl, gr, t, nodes)?;
        let n = f.len() - 1;
        let mut p = 0.0f64;
        let mut q = 0.0f64;
        for i in 0..=n {
            p = p.min(f.integral(0, i) - self.data.u_left * (f.xs[i] - gl));
            q = q.max(f.integral(i, n) - self.data.u_right * (gr - f.xs[i]));
        }
        Ok((p, q))
    }

    /// Divide index for an invariant study up to `t_max`; errors if a
    /// requested `k` is too small.
    pub fn invariant_k(&self, t_max: f64, k: Option<i64>) -> Result<i64> {
        self.resolve_k(t_max, k)
    }

    /// Sequential invariant trace.
    pub fn track_invariants(&self, times: &[f64], k: Option<i64>) -> Result<InvariantTrace> {
        check_schedule(times)?;
        if self.data.u_left > self.data.u_right {
            return Err(Error::Precondition("invariants need u_left <= u_right"));
        }
        let k = self.invariant_k(*times.last().unwrap(), k)?;
        let (p0, q0) = self.data.initial_invariants(k)?;
        let mut p_values = Vec::with_capacity(times.len());
        let mut q_values = Vec::with_capacity(times.len());
        for &t in times {
            let (p, q) = self.invariant_sample(t, k)?;
            p_values.push(p);
            q_values.push(q);
        }
        Ok(InvariantTrace {
            times: times.to_vec(),
            p_values,
            q_values,
            p0,
            q0,
            k,
        })
    }

    /// Width `x_b - x_a` of the transition interval over the perturbed cone.
    pub fn transition_width(&self, t: f64) -> Result<f64> {
        Self::check_time(t)?;
        let (a, b) = self.cone(t);
        let (xa, xb) = self.window_sample(a, b, t)?.transition_interval()?;
        Ok(xb - xa)
    }

    /// First of the times `t_max i / merge_samples` at which the transition
    /// interval is no wider than `max(p_l, p_r)`.
    pub fn merge_time_estimate(&self, t_max: f64) -> Result<Option<f64>> {
        if !(self.data.u_left > self.data.u_right) {
            return Err(Error::Precondition("merge time needs u_left > u_right"));
        }
        Self::check_time(t_max)?;
        let m = self.settings.merge_samples.max(1);
        for i in 1..=m {
            let t = t_max * i as f64 / m as f64;
            if self.transition_width(t)? <= self.data.max_period() {
                return Ok(Some(t));
            }
        }
        Ok(None)
    }

    /// Edge proxies over the perturbed cone at time `t`.
    pub fn edge_sample(&self, t: f64) -> Result<EdgeSample> {
        Self::check_time(t)?;
        let (a, b) = self.cone(t);
        let sample = self.window_sample(a, b, t)?;
        Ok(self.edges(&sample, t))
    }

    /// Sequential `sqrt(t)` envelope check.
    pub fn sqrt_bound_check(&self, times: &[f64]) -> Result<SqrtBoundReport> {
        check_schedule(times)?;
        if self.data.u_left > self.data.u_right {
            return Err(Error::Precondition("the envelope check needs u_left <= u_right"));
        }
        let samples = times
            .iter()
            .map(|&t| self.edge_sample(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(SqrtBoundReport::from_samples(&samples))
    }

    /// `∫_{Γ_l^K(t)}^{Γ_r^K(t)} u` minus its prediction from the boundary
    /// fluxes `f(ū) - f'(ū) ū` carried along the two divides.
    pub fn conservation_residual(&self, t: f64, k: Option<i64>) -> Result<f64> {
        Self::check_time(t)?;
        let k = self.resolve_k(t, k)?;
        let gl0 = self.data.gamma_curve(DivideSide::Left, k, 0.0, &self.flux);
        let gr0 = self.data.gamma_curve(DivideSide::Right, k, 0.0, &self.flux);
        let gl = self.data.gamma_curve(DivideSide::Left, k, t, &self.flux);
        let gr = self.data.gamma_curve(DivideSide::Right, k, t, &self.flux);
        let boundary = |u: f64| self.flux.f(u) - self.flux.fprime(u) * u;
        let predicted =
            self.data.integral(gl0, gr0) + t * (boundary(self.data.u_left) - boundary(self.data.u_right));
        Ok(self.full.integral(gl, gr, t)? - predicted)
    }

    /// One-sided value of the full solution.
    pub fn evaluate(&self, x: f64, t: f64, side: Side) -> Result<f64> {
        self.full.evaluate(x, t, side)
    }
}

/// Times must be positive and strictly increasing.
pub fn check_schedule(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidInput("empty time schedule"));
    }
    if times.iter().any(|t| !(*t > 0.0 && t.is_finite())) || times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("times must be positive and strictly increasing"));
    }
    Ok(())
}

/// `t0 * ratio^i` for `i < count`.
pub fn geometric_times(t0: f64, ratio: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut t = t0;
    for _ in 0..count {
        out.push(t);
        t *= ratio;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::FluxKind;
    use crate::profiles::{MiddlePart, PeriodicProfile};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::vec;

    fn burgers() -> FluxModel {
        FluxModel::new(FluxKind::Burgers, -3.0, 3.0).unwrap()
    }

    fn perturbed(ul: f64, ur: f64, middle: MiddlePart) -> CompositeInitialData {
        CompositeInitialData::new(
            ul,
            ur,
            PeriodicProfile::cosine(0.3, 1.0, 0.0).unwrap(),
            PeriodicProfile::sine(0.2, 1.5, 0.0).unwrap(),
            2.0,
            middle,
        )
        .unwrap()
    }

    fn harness(data: CompositeInitialData) -> Harness {
        Harness::new(burgers(), data, HarnessSettings::default()).unwrap()
    }

    #[test]
    fn loglog_fit_recovers_power_law() {
        let times = geometric_times(1.0, 2.0, 6);
        let errors: Vec<f64> = times.iter().map(|t| 3.0 / (t * t)).collect();
        let r = DecayReport::fit(&times, &errors, 0.0).unwrap();
        assert_abs_diff_eq!(r.fitted_slope, -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.fitted_constant, 3.0, epsilon = 1e-11);
        assert_abs_diff_eq!(r.r_squared, 1.0, epsilon = 1e-12);
        assert!(!r.exact);
    }

    #[test]
    fn fit_flags_exact_and_counts_points() {
        let times = geometric_times(1.0, 2.0, 5);
        let r = DecayReport::fit(&times, &[1e-14, 0.0, 3e-12, 0.0, 1e-11], 0.0).unwrap();
        assert!(r.exact);
        assert!(r.fitted_slope.is_nan());
        let err = DecayReport::fit(&times, &[1.0, 0.5, 0.25, 0.1, 0.05], 3.0).unwrap_err();
        assert_eq!(err, Error::InsufficientData { needed: 5, got: 3 });
        assert!(DecayReport::fit(&[1.0, 1.0], &[1.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn ratio_test() {
        assert!(ratio_bounded(&[1.0, 0.9, 1.05, 1.0, 0.8]));
        assert!(!ratio_bounded(&[1.0, 0.9, 1.05, 1.3, 0.8]));
        assert!(ratio_bounded(&[0.0, 0.0, 0.0]));
    }

    #[test]
    fn sqrt_domination() {
        let times = [1.0, 4.0, 16.0];
        let r = DecayReport {
            times: times.to_vec(),
            errors: vec![1.0, 0.5, 0.2],
            fitted_slope: 0.0,
            fitted_constant: 0.0,
            r_squared: 0.0,
            exact: false,
            fit_points: 0,
        };
        assert!(r.sqrt_dominated());
        let r2 = DecayReport {
            errors: vec![1.0, 0.6, 0.2],
            ..r
        };
        assert!(!r2.sqrt_dominated());
    }

    #[test]
    fn pure_riemann_shock_is_located_exactly() {
        let data = CompositeInitialData::riemann(1.0, -0.5).unwrap();
        let h = harness(data);
        for t in [1.0, 3.0, 7.5] {
            let s = h.shock_sample(t, None).unwrap();
            assert_abs_diff_eq!(s.position, 0.25 * t, epsilon = 1e-10);
            assert!((s.transition - 0.25 * t).abs() <= h.dx());
            assert!(s.residual().abs() < 1e-10);
            assert!(s.left_sup < 1e-12 && s.right_sup < 1e-12);
        }
        assert_eq!(h.merge_time_estimate(10.0).unwrap(), Some(10.0 / 64.0));
    }

    #[test]
    fn bump_shifts_clean_shock() {
        let m = 0.3;
        let data = CompositeInitialData::new(
            1.0,
            -1.0,
            PeriodicProfile::zero(1.0).unwrap(),
            PeriodicProfile::zero(1.0).unwrap(),
            1.0,
            MiddlePart::Bump {
                center: 0.0,
                half_width: 1.0,
                mass: m,
            },
        )
        .unwrap();
        let h = harness(data);
        assert_abs_diff_eq!(h.data().shift_x_infinity().unwrap(), m / 2.0, epsilon = 1e-14);
        let s = h.shock_sample(20.0, None).unwrap();
        assert_abs_diff_eq!(s.position, m / 2.0, epsilon = 1e-9);
    }

    #[test]
    fn perturbed_shock_residual_shrinks() {
        let h = harness(perturbed(1.0, -1.0, MiddlePart::Zero));
        let x_inf = h.data().shift_x_infinity().unwrap();
        assert_abs_diff_eq!(x_inf, 0.3 / (4.0 * core::f64::consts::PI), epsilon = 1e-12);
        let r8 = h.shock_sample(8.0, None).unwrap().residual().abs();
        let r32 = h.shock_sample(32.0, None).unwrap().residual().abs();
        assert!(r32 < r8, "{r8} {r32}");
        assert!(r32 < 0.01);
    }

    #[test]
    fn shock_queries_reject_bad_input() {
        let h = harness(perturbed(-1.0, 1.0, MiddlePart::Zero));
        assert!(h.mass_position(4.0, None).is_err());
        let h = harness(perturbed(1.0, -1.0, MiddlePart::Zero));
        assert!(h.mass_position(0.0, None).is_err());
        assert!(h.mass_position(8.0, Some(1)).is_err());
        assert!(h.merge_time_estimate(-1.0).is_err());
    }

    #[test]
    fn divides_conserve_mass() {
        let h = harness(perturbed(1.0, -1.0, MiddlePart::Zero));
        for t in [0.5, 4.0, 16.0] {
            let r = h.conservation_residual(t, None).unwrap();
            assert!(r.abs() < 1e-9, "{t}: {r}");
        }
        let h = harness(perturbed(-1.0, 1.0, MiddlePart::Zero));
        assert!(h.conservation_residual(6.0, None).unwrap().abs() < 1e-9);
    }

    #[test]
    fn zero_perturbation_invariants_vanish() {
        let h = harness(CompositeInitialData::riemann(0.5, 0.5).unwrap());
        let tr = h.track_invariants(&[1.0, 4.0], None).unwrap();
        assert_eq!((tr.p0, tr.q0), (0.0, 0.0));
        assert!(tr.p_values.iter().chain(&tr.q_values).all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn dip_invariants_are_conserved() {
        let dip = MiddlePart::Bump {
            center: 0.0,
            half_width: 1.0,
            mass: -0.2,
        };
        let h = harness(perturbed(-1.0, 1.0, dip));
        let tr = h.track_invariants(&[1.0, 5.0], None).unwrap();
        let tol = 5.0 * h.dx() * h.data().sup_norm();
        let (dp, dq) = tr.max_drift();
        assert!(dp <= tol && dq <= tol, "{dp} {dq} {tol}");
        assert!(h.track_invariants(&[1.0, 50.0], Some(2)).is_err());
    }

    #[test]
    fn zero_perturbation_edges_sit_on_characteristics() {
        let h = harness(CompositeInitialData::riemann(0.0, 0.0).unwrap());
        let r = h.sqrt_bound_check(&[1.0, 2.0, 4.0, 8.0]).unwrap();
        assert!(r.bounded());
        assert!(r.left_ratio.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn constant_case_gluing_holds_outside_edges() {
        let h = harness(perturbed(0.0, 0.0, MiddlePart::Zero));
        let (a, b) = h.cone(6.0);
        let s = h.window_sample(a, b, 6.0).unwrap();
        let (dl, dr) = s.gluing_deviation();
        assert!(dl < 1e-8 && dr < 1e-8, "{dl} {dr}");
    }

    #[test]
    fn periodic_sup_tracks_sawtooth() {
        let data =
            CompositeInitialData::periodic(0.0, PeriodicProfile::sine(1.0, 2.0 * core::f64::consts::PI, 0.0).unwrap());
        let h = harness(data);
        let s = h.profile_sample(DecayTarget::Periodic, 20.0).unwrap();
        let target = core::f64::consts::PI / 20.0;
        assert!((s.sup_error - target).abs() < 0.2 * target);
        assert!(s.oleinik <= 1.0 + 1e-6);
    }

    #[test]
    fn schedule_checks() {
        assert!(check_schedule(&[]).is_err());
        assert!(check_schedule(&[1.0, 1.0]).is_err());
        assert!(check_schedule(&[0.0, 1.0]).is_err());
        assert_eq!(geometric_times(2.0, 3.0, 3), vec![2.0, 6.0, 18.0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn riemann_shock_mass_estimate_is_exact(ul in 0.2f64..1.5, gap in 0.1f64..1.5, t in 0.5f64..10.0) {
            let data = CompositeInitialData::riemann(ul, ul - gap).unwrap();
            let h = harness(data);
            let s = burgers().sigma(ul, ul - gap).unwrap();
            let x = h.mass_position(t, None).unwrap();
            prop_assert!((x - s * t).abs() < 1e-9 * (1.0 + t));
        }

        #[test]
        fn fit_is_invariant_to_scaling(c in 0.01f64..100.0, k in -2.0f64..-0.1) {
            let times = geometric_times(1.0, 2.0, 6);
            let errors: Vec<f64> = times.iter().map(|t| c * libm::pow(*t, k)).collect();
            let r = DecayReport::fit(&times, &errors, 0.0).unwrap();
            prop_assert!((r.fitted_slope - k).abs() < 1e-10);
            prop_assert!((r.fitted_constant / c - 1.0).abs() < 1e-9);
        }
    }
}
