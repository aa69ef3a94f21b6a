//! First-order Godunov finite-volume scheme with the exact convex Riemann flux.
//!
//! Used as an independent oracle for the variational evaluator: it shares
//! nothing with it except the flux formula and the exact initial cell averages.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::flux::FluxModel;
use crate::profiles::CompositeInitialData;

pub const DEFAULT_CFL: f64 = 0.9;

/// Ghost-cell policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    /// Wrap around; the window must be a whole number of periods.
    Periodic,
    /// Frozen ghost cells holding the exact cell averages of the periodic
    /// background just outside the window. Valid while the numerical domain
    /// of dependence of the region of interest stays inside the window.
    Background { left: f64, right: f64 },
}

impl Boundary {
    /// Background ghosts for `[a, b]` with spacing `dx`; needs `a <= -N` and `b >= N`.
    pub fn background(data: &CompositeInitialData, a: f64, b: f64, dx: f64) -> Result<Self> {
        let n = data.half_width();
        if a > -n || b < n {
            return Err(Error::Precondition("background boundary needs the window to contain [-N, N]"));
        }
        let left = data.u_left + (data.left.primitive(a) - data.left.primitive(a - dx)) / dx;
        let right = data.u_right + (data.right.primitive(b + dx) - data.right.primitive(b)) / dx;
        Ok(Boundary::Background { left, right })
    }
}

/// Cell averages on a uniform grid of `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FvState {
    pub cells: Vec<f64>,
    pub dx: f64,
    pub window: (f64, f64),
    pub t: f64,
    pub cfl: f64,
    /// Fluxes through the left and right window edges during the last step.
    pub last_boundary_flux: (f64, f64),
}

impl FvState {
    /// Exact initial cell averages of `u0` on `n` cells of `[a, b]`.
    pub fn from_data(data: &CompositeInitialData, a: f64, b: f64, n: usize, cfl: f64) -> Result<Self> {
        if n == 0 || !(a < b) {
            return Err(Error::InvalidInput("finite-volume grid needs n > 0 cells and a < b"));
        }
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::InvalidInput("CFL number must lie in (0, 1]"));
        }
        let dx = (b - a) / n as f64;
        let mut prev = data.primitive(a);
        let mut cells = Vec::with_capacity(n);
        for i in 0..n {
            let next = data.primitive(a + dx * (i + 1) as f64);
            cells.push((next - prev) / dx);
            prev = next;
        }
        Ok(FvState {
            cells,
            dx,
            window: (a, b),
            t: 0.0,
            cfl,
            last_boundary_flux: (0.0, 0.0),
        })
    }

    pub fn mass(&self) -> f64 {
        self.cells.iter().sum::<f64>() * self.dx
    }

    /// Cell centres.
    pub fn centers(&self) -> Vec<f64> {
        (0..self.cells.len())
            .map(|i| self.window.0 + (i as f64 + 0.5) * self.dx)
            .collect()
    }

    fn ghosts(&self, boundary: Boundary) -> (f64, f64) {
        match boundary {
            Boundary::Periodic => (self.cells[self.cells.len() - 1], self.cells[0]),
            Boundary::Background { left, right } => (left, right),
        }
    }

    /// `cfl dx / max |f'|` over the cells and ghosts.
    pub fn stable_dt(&self, flux: &FluxModel, boundary: Boundary) -> f64 {
        let (gl, gr) = self.ghosts(boundary);
        let smax = self
            .cells
            .iter()
            .chain([gl, gr].iter())
            .map(|u| flux.fprime(*u).abs())
            .fold(0.0, f64::max);
        if smax > 0.0 {
            self.cfl * self.dx / smax
        } else {
            self.cfl * self.dx
        }
    }

    /// One conservative update with the stable step, capped at `max_dt`.
    /// Returns the step taken.
    pub fn step(&mut self, flux: &FluxModel, boundary: Boundary, max_dt: Option<f64>) -> Result<f64> {
        if self.cells.is_empty() {
            return Err(Error::InvalidInput("empty finite-volume state"));
        }
        let mut dt = self.stable_dt(flux, boundary);
        if let Some(cap) = max_dt {
            dt = dt.min(cap);
        }
        let (gl, gr) = self.ghosts(boundary);
        let n = self.cells.len();
        let lambda = dt / self.dx;
        let mut left_flux = flux.godunov_flux(gl, self.cells[0]);
        let first = left_flux;
        for i in 0..n {
            let ur = if i + 1 < n { self.cells[i + 1] } else { gr };
            let right_flux = flux.godunov_flux(self.cells[i], ur);
            self.cells[i] -= lambda * (right_flux - left_flux);
            left_flux = right_flux;
        }
        self.last_boundary_flux = (first, left_flux);
        self.t += dt;
        Ok(dt)
    }

    /// Steps until `t_final`, landing on it exactly.
    pub fn run_until(&mut self, flux: &FluxModel, boundary: Boundary, t_final: f64) -> Result<()> {
        if t_final < self.t {
            return Err(Error::Precondition("t_final precedes the current time"));
        }
        while self.t < t_final {
            let remaining = t_final - self.t;
            if remaining <= 1e-14 * t_final.max(1.0) {
                break;
            }
            self.step(flux, boundary, Some(remaining))?;
        }
        self.t = t_final;
        Ok(())
    }
}
