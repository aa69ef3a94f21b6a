//! Entropy solutions through the Lax–Oleinik formula.
//!
//! For `t > 0` the solution is `u(x, t) = (f')^{-1}((x - y*) / t)` where `y*`
//! minimises
//!
//! ```text
//! G(y) = U0(y) + t f*((x - y) / t),      U0(y) = \int_0^y u0,
//! ```
//!
//! and the minimum value `V(x, t) = min_y G` is the Hopf–Lax value function,
//! a primitive of `u(., t)`. Differences of `V` give exact spatial integrals.
//!
//! Point queries scan `G` on a coarse grid and refine each candidate basin
//! with golden-section search. Sampled fields use the monotonicity of the
//! leftmost minimiser in `x` (the kernel `f*` is convex, so the cost matrix is
//! Monge) to find lattice minimisers by divide and conquer, then refine each
//! node locally.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{JumpCell, LocatedJump, SolutionField};
use crate::flux::FluxModel;
use crate::math;
use crate::minimize::golden_section;
use crate::profiles::{CompositeInitialData, PeriodicProfile};

/// Which one-sided limit a query should return at a discontinuity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `u(x-, t)`, from the leftmost minimiser.
    Left,
    /// `u(x+, t)`, from the rightmost minimiser.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Coarse scan points per unit length of the search interval.
    pub scan_resolution: f64,
    /// Final bracket width in `y`.
    pub refine_tolerance: f64,
    /// Lattice points per field cell used by [`VariationalSolver::sample_field`].
    pub lattice_refinement: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            scan_resolution: 256.0,
            refine_tolerance: 1e-12,
            lattice_refinement: 16,
        }
    }
}

/// Minimiser of `G` and the minimum value `V(x, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimizer {
    pub y: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationalSolver {
    flux: FluxModel,
    data: CompositeInitialData,
    settings: SolverSettings,
    range: (f64, f64),
    speed_lo: f64,
    speed_hi: f64,
}

impl VariationalSolver {
    pub fn new(flux: FluxModel, data: CompositeInitialData, settings: SolverSettings) -> Result<Self> {
        let range = data.total_range();
        if !flux.contains(range.0) || !flux.contains(range.1) {
            return Err(Error::Domain {
                what: "initial data value",
                value: if flux.contains(range.0) { range.1 } else { range.0 },
            });
        }
        if !(settings.scan_resolution > 0.0 && settings.refine_tolerance > 0.0 && settings.lattice_refinement > 0) {
            return Err(Error::InvalidInput("solver settings must be positive"));
        }
        Ok(VariationalSolver {
            speed_lo: flux.fprime(range.0),
            speed_hi: flux.fprime(range.1),
            flux,
            data,
            settings,
            range,
        })
    }

    /// Solver for the purely periodic data `ubar + w`.
    pub fn periodic(flux: FluxModel, ubar: f64, profile: PeriodicProfile, settings: SolverSettings) -> Result<Self> {
        Self::new(flux, CompositeInitialData::periodic(ubar, profile), settings)
    }

    pub fn flux(&self) -> &FluxModel {
        &self.flux
    }

    pub fn data(&self) -> &CompositeInitialData {
        &self.data
    }

    pub fn settings(&self) -> &SolverSettings {
        &self.settings
    }

    /// Range of `u0`; the solution stays inside it.
    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    #[inline]
    fn objective(&self, x: f64, t: f64, y: f64) -> f64 {
        self.data.primitive(y) + t * self.flux.conjugate((x - y) / t)
    }

    /// Minimisers lie in `[x - f'(max u0) t, x - f'(min u0) t]`.
    pub fn search_interval(&self, x: f64, t: f64) -> (f64, f64) {
        (x - self.speed_hi * t, x - self.speed_lo * t)
    }

    fn check_time(t: f64) -> Result<()> {
        if t.is_finite() && t >= 0.0 {
            Ok(())
        } else {
            Err(Error::Precondition("time must be finite and non-negative"))
        }
    }

    /// Global minimiser of `G` over the admissible interval.
    pub fn minimize(&self, x: f64, t: f64, side: Side) -> Result<Minimizer> {
        Self::check_time(t)?;
        if !x.is_finite() {
            return Err(Error::Precondition("x must be finite"));
        }
        if t == 0.0 {
            return Ok(Minimizer {
                y: x,
                value: self.data.primitive(x),
            });
        }
        let (lo, hi) = self.search_interval(x, t);
        Ok(self.minimize_in(x, t, lo, hi, side))
    }

    /// Coarse scan of `[lo, hi]` (padded by one scan step) plus golden-section
    /// refinement of every discrete local minimum that could hold the global one.
    fn minimize_in(&self, x: f64, t: f64, lo: f64, hi: f64, side: Side) -> Minimizer {
        let len = (hi - lo).max(0.0);
        let n = (math::ceil(self.settings.scan_resolution * len) as usize).max(64);
        let step = (len / n as f64).max(1.0 / self.settings.scan_resolution.max(1.0) / 64.0);
        let start = lo - step;
        let count = n + 2;
        let grid: Vec<f64> = (0..=count).map(|i| self.objective(x, t, start + step * i as f64)).collect();
        let coarse_min = grid.iter().copied().fold(f64::INFINITY, f64::min);
        // |G'| <= osc(u0), so the best grid point of the true basin is within
        // step * osc / 2 of the true minimum.
        let tol = 1e-8 + 0.5 * step * (self.range.1 - self.range.0);

        let mut cands: Vec<Minimizer> = vec![];
        for i in 0..=count {
            let g = grid[i];
            if g > coarse_min + tol {
                continue;
            }
            let left = if i > 0 { grid[i - 1] } else { f64::INFINITY };
            let right = if i < count { grid[i + 1] } else { f64::INFINITY };
            if g <= left && g <= right {
                let a = start + step * i.saturating_sub(1) as f64;
                let b = start + step * (i + 1).min(count) as f64;
                cands.push(self.refine(x, t, a, b));
            }
        }
        select(&cands, side)
    }

    /// Minimum of `G` on `[a, b]`. Golden section only pins the minimiser to
    /// about `sqrt(eps)`, since `G` is flat there; the stationarity condition
    /// `u0(y) = (f')^{-1}((x - y) / t)` is then bisected to full precision.
    fn refine(&self, x: f64, t: f64, a: f64, b: f64) -> Minimizer {
        let (y, v) = golden_section(|y| self.objective(x, t, y), a, b, self.settings.refine_tolerance);
        let slope = |y: f64| self.data.value(y) - self.flux.fprime_inv_unchecked((x - y) / t);
        let delta = 1e-6 * (1.0 + y.abs());
        let mut lo = (y - delta).max(a.min(b));
        let mut hi = (y + delta).min(a.max(b));
        if !(slope(lo) < 0.0 && slope(hi) > 0.0) {
            return Minimizer { y, value: v };
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if slope(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (lv, hv) = (self.objective(x, t, lo), self.objective(x, t, hi));
        let (yp, vp) = if lv <= hv { (lo, lv) } else { (hi, hv) };
        if vp <= v + 4.0 * f64::EPSILON * (1.0 + v.abs()) {
            Minimizer { y: yp, value: vp.min(v) }
        } else {
            Minimizer { y, value: v }
        }
    }

    /// `u(x-, t)` or `u(x+, t)`; the initial data at `t = 0`.
    pub fn evaluate(&self, x: f64, t: f64, side: Side) -> Result<f64> {
        Self::check_time(t)?;
        if t == 0.0 {
            return Ok(self.data.value(x));
        }
        let m = self.minimize(x, t, side)?;
        Ok(self.speed_to_state((x - m.y) / t))
    }

    #[inline]
    fn speed_to_state(&self, s: f64) -> f64 {
        self.flux.fprime_inv_unchecked(s).clamp(self.range.0, self.range.1)
    }

    /// Hopf–Lax value `V(x, t)`, with `V(x, 0) = \int_0^x u0`.
    pub fn value(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.minimize(x, t, Side::Left)?.value)
    }

    /// `\int_a^b u(x, t) dx`, exact up to the minimisation tolerance.
    pub fn integral(&self, a: f64, b: f64, t: f64) -> Result<f64> {
        Ok(self.value(b, t)? - self.value(a, t)?)
    }

    /// Samples `u(., t)` at `resolution` uniform nodes of `[a, b]` (both ends
    /// included) and flags cells across which `u` drops by more than
    /// `1e-4 * osc(u0)`.
    pub fn sample_field(&self, a: f64, b: f64, t: f64, resolution: usize) -> Result<SolutionField> {
        Self::check_time(t)?;
        if !(a < b) || resolution < 2 || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInput("field window needs a < b and at least two nodes"));
        }
        let n = resolution - 1;
        let xs: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
        let dx = (b - a) / n as f64;
        let (values, potential) = self.sample_points(&xs, t, dx)?;
        let threshold = self.jump_threshold();
        let jumps = if threshold > 0.0 {
            (0..n)
                .filter(|&i| values[i] - values[i + 1] > threshold)
                .map(|i| JumpCell {
                    index: i,
                    left: values[i],
                    right: values[i + 1],
                    located: None,
                })
                .collect()
        } else {
            vec![]
        };
        Ok(SolutionField {
            t,
            xs,
            values,
            potential,
            jumps,
        })
    }

    /// `1e-4 * (max u0 - min u0)`.
    pub fn jump_threshold(&self) -> f64 {
        1e-4 * (self.range.1 - self.range.0)
    }

    /// Values and potentials at sorted nodes `xs`. `dx` sets the lattice
    /// spacing `min(dx, 1/scan_resolution) / lattice_refinement`.
    pub fn sample_points(&self, xs: &[f64], t: f64, dx: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        Self::check_time(t)?;
        if xs.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidInput("sample points must be sorted"));
        }
        if t == 0.0 {
            return Ok((
                xs.iter().map(|&x| self.data.value(x)).collect(),
                xs.iter().map(|&x| self.data.primitive(x)).collect(),
            ));
        }
        if xs.is_empty() {
            return Ok((vec![], vec![]));
        }
        let h = dx.min(1.0 / self.settings.scan_resolution) / self.settings.lattice_refinement as f64;
        let mins = self.lattice_sweep(xs, t, h);
        let mut values = Vec::with_capacity(xs.len());
        let mut potential = Vec::with_capacity(xs.len());
        for (x, m) in xs.iter().zip(mins) {
            values.push(self.speed_to_state((x - m.y) / t));
            potential.push(m.value);
        }
        Ok((values, potential))
    }

    /// Leftmost lattice minimisers by monotone divide and conquer, refined by
    /// golden section on the two neighbouring lattice cells.
    fn lattice_sweep(&self, xs: &[f64], t: f64, h: f64) -> Vec<Minimizer> {
        let n = xs.len();
        let y_min = xs[0] - self.speed_hi * t - 2.0 * h;
        let y_max = xs[n - 1] - self.speed_lo * t + 2.0 * h;
        let j0 = math::floor(y_min / h) as i64;
        let j1 = math::ceil(y_max / h) as i64;
        let m = (j1 - j0) as usize + 1;
        // Nodes are j * h on a global lattice so different solvers sharing `h`
        // use identical trial points.
        let ys: Vec<f64> = (0..m).map(|k| (j0 + k as i64) as f64 * h).collect();
        let prim: Vec<f64> = ys.iter().map(|&y| self.data.primitive(y)).collect();

        let mut arg = vec![0usize; n];
        // explicit stack of (row range, column range)
        let mut stack = vec![(0usize, n - 1, 0usize, m - 1)];
        while let Some((ilo, ihi, klo, khi)) = stack.pop() {
            let mid = ilo + (ihi - ilo) / 2;
            let x = xs[mid];
            let (wlo, whi) = self.search_interval(x, t);
            let lo_idx = ((math::floor((wlo - h) / h) as i64 - j0).max(0) as usize).max(klo);
            let hi_idx = ((math::ceil((whi + h) / h) as i64 - j0).max(0) as usize).min(khi);
            let (lo_idx, hi_idx) = if lo_idx <= hi_idx { (lo_idx, hi_idx) } else { (klo, khi) };
            let mut best = f64::INFINITY;
            let mut bk = lo_idx;
            for k in lo_idx..=hi_idx {
                let g = prim[k] + t * self.flux.conjugate((x - ys[k]) / t);
                if g < best {
                    best = g;
                    bk = k;
                }
            }
            arg[mid] = bk;
            if mid > ilo {
                stack.push((ilo, mid - 1, klo, bk));
            }
            if mid < ihi {
                stack.push((mid + 1, ihi, bk, khi));
            }
        }

        xs.iter()
            .zip(arg)
            .map(|(&x, k)| {
                let a = ys[k.saturating_sub(1)];
                let b = ys[(k + 1).min(m - 1)];
                self.refine(x, t, a, b)
            })
            .collect()
    }

    /// Pins down the discontinuity inside a flagged cell by bisection on the
    /// minimiser, and records the one-sided limits there.
    pub fn locate_jump(&self, field: &SolutionField, cell: &JumpCell) -> Result<LocatedJump> {
        let t = field.t;
        if t == 0.0 {
            return Err(Error::Precondition("jumps are located for t > 0"));
        }
        let mut xa = field.xs[cell.index];
        let mut xb = field.xs[cell.index + 1];
        let ya = self.minimize(xa, t, Side::Right)?.y;
        let yb = self.minimize(xb, t, Side::Left)?.y;
        let pad = 2.0 / self.settings.scan_resolution;
        let (ylo, yhi) = (ya - pad, yb + pad);
        let mut y_left = ya;
        let mut y_right = yb;
        for _ in 0..200 {
            if xb - xa <= 1e-13 * (1.0 + xa.abs()) {
                break;
            }
            let xm = 0.5 * (xa + xb);
            let ym = self.minimize_in(xm, t, ylo, yhi, Side::Left).y;
            if (ym - y_left).abs() <= (ym - y_right).abs() {
                xa = xm;
                y_left = ym;
            } else {
                xb = xm;
                y_right = ym;
            }
        }
        let pos = 0.5 * (xa + xb);
        let minus = self.speed_to_state((pos - self.minimize_in(pos, t, ylo, yhi, Side::Left).y) / t);
        let plus = self.speed_to_state((pos - self.minimize_in(pos, t, ylo, yhi, Side::Right).y) / t);
        Ok(LocatedJump {
            position: pos,
            minus,
            plus,
        })
    }

    /// Locates every flagged jump of `field` in place.
    pub fn locate_jumps(&self, field: &mut SolutionField) -> Result<()> {
        let mut located = Vec::with_capacity(field.jumps.len());
        for cell in &field.jumps {
            located.push(self.locate_jump(field, cell)?);
        }
        for (cell, l) in field.jumps.iter_mut().zip(located) {
            cell.located = Some(l);
        }
        Ok(())
    }
}

fn select(cands: &[Minimizer], side: Side) -> Minimizer {
    let best = cands.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * (1.0 + best.abs());
    let tied = cands.iter().filter(|c| c.value <= best + tol);
    let pick = match side {
        Side::Left => tied.min_by(|a, b| a.y.total_cmp(&b.y)),
        Side::Right => tied.max_by(|a, b| a.y.total_cmp(&b.y)),
    };
    *pick.expect("the coarse scan always yields a candidate")
}

/// Wave type of a Riemann solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiemannKind {
    Shock,
    Rarefaction,
    Constant,
}

/// Closed-form entropy solution for two-constant data with a jump at `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannSolution {
    pub u_left: f64,
    pub u_right: f64,
    pub flux: FluxModel,
    pub kind: RiemannKind,
    /// Rankine–Hugoniot speed (shock case; `f'(u_left)` otherwise).
    pub speed: f64,
}

impl RiemannSolution {
    pub fn new(flux: FluxModel, u_left: f64, u_right: f64) -> Result<Self> {
        let speed = flux.sigma(u_left, u_right)?;
        let kind = if u_left > u_right {
            RiemannKind::Shock
        } else if u_left < u_right {
            RiemannKind::Rarefaction
        } else {
            RiemannKind::Constant
        };
        Ok(RiemannSolution {
            u_left,
            u_right,
            flux,
            kind,
            speed,
        })
    }

    /// `u^S`, `u^R` or the constant at `(x, t)`; the Riemann data for `t <= 0`.
    pub fn evaluate(&self, x: f64, t: f64) -> f64 {
        if t <= 0.0 {
            return if x < 0.0 { self.u_left } else { self.u_right };
        }
        match self.kind {
            RiemannKind::Constant => self.u_left,
            RiemannKind::Shock => {
                if x < self.speed * t {
                    self.u_left
                } else {
                    self.u_right
                }
            }
            RiemannKind::Rarefaction => {
                let s = x / t;
                if s <= self.flux.fprime(self.u_left) {
                    self.u_left
                } else if s > self.flux.fprime(self.u_right) {
                    self.u_right
                } else {
                    self.flux
                        .fprime_inv_unchecked(s)
                        .clamp(self.u_left, self.u_right)
                }
            }
        }
    }
}
