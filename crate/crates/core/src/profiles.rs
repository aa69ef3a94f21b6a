//! Initial data: two zero-average periodic tails glued to a compact middle part.
//!
//! ```text
//! u0(x) = u_left  + w_left(x)    for x < -N
//! u0(x) = u_right + w_right(x)   for x >  N
//! ```
//!
//! Inside `[-N, N]` the data is the glued background (`u_left + w_left` for
//! `x < 0`, `u_right + w_right` for `x > 0`) plus a compactly supported
//! deviation. All primitives are exact: analytic shapes integrate in closed
//! form and sampled shapes are piecewise linear, so their primitives are exact
//! piecewise quadratics.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::flux::FluxModel;
use crate::math::{self, TAU};
use crate::minimize::golden_section;

/// Default number of samples per period for sampled profiles.
pub const DEFAULT_SAMPLES_PER_PERIOD: usize = 1024;

/// Shape of a periodic perturbation over one period `p`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileShape {
    Zero,
    /// `a sin(2π x / p + phase)`
    Sine { amplitude: f64, phase: f64 },
    /// `a (2 frac(x / p + phase / 2π) - 1)`, a rising ramp with a drop at the
    /// period boundary.
    Sawtooth { amplitude: f64, phase: f64 },
    /// Values on the open grid `x_i = i p / n`, periodic piecewise-linear
    /// interpolation.
    Samples(Vec<f64>),
}

/// A zero-average periodic perturbation together with the minimiser of its
/// running primitive `W(x) = \int_0^x w`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicProfile {
    period: f64,
    shape: ProfileShape,
    /// Running primitive at the sample nodes (samples only, length n + 1).
    cumulative: Vec<f64>,
    primitive_min: f64,
    argmin: f64,
}

/// Result of [`PeriodicProfile::normalize_zero_average`].
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub profile: PeriodicProfile,
    /// The constant removed from the samples; fold it into the far-field state.
    pub removed_average: f64,
}

impl PeriodicProfile {
    pub fn zero(period: f64) -> Result<Self> {
        Self::analytic(period, ProfileShape::Zero)
    }

    pub fn sine(amplitude: f64, period: f64, phase: f64) -> Result<Self> {
        Self::analytic(period, ProfileShape::Sine { amplitude, phase })
    }

    /// `a cos(2π x / p + phase)`, stored as a phase-shifted sine.
    pub fn cosine(amplitude: f64, period: f64, phase: f64) -> Result<Self> {
        Self::sine(amplitude, period, phase + 0.25 * TAU)
    }

    pub fn sawtooth(amplitude: f64, period: f64, phase: f64) -> Result<Self> {
        Self::analytic(period, ProfileShape::Sawtooth { amplitude, phase })
    }

    fn analytic(period: f64, shape: ProfileShape) -> Result<Self> {
        check_period(period)?;
        match shape {
            ProfileShape::Sine { amplitude, phase } | ProfileShape::Sawtooth { amplitude, phase } => {
                if !(amplitude.is_finite() && phase.is_finite()) {
                    return Err(Error::InvalidInput("profile parameters must be finite"));
                }
            }
            ProfileShape::Zero => {}
            ProfileShape::Samples(_) => unreachable!("sampled profiles go through normalize_zero_average"),
        }
        let mut p = PeriodicProfile {
            period,
            shape,
            cumulative: Vec::new(),
            primitive_min: 0.0,
            argmin: 0.0,
        };
        let (z, m) = p.compute_argmin();
        p.argmin = z;
        p.primitive_min = m;
        Ok(p)
    }

    /// Subtracts the average of the periodic piecewise-linear interpolant (the
    /// periodic trapezoid rule, i.e. the sample mean) and records it.
    pub fn normalize_zero_average(samples: &[f64], period: f64) -> Result<Normalized> {
        check_period(period)?;
        if samples.is_empty() {
            return Err(Error::InvalidInput("periodic profile needs at least one sample"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("profile samples must be finite"));
        }
        let n = samples.len() as f64;
        // Neumaier-style two-pass mean keeps the residual average near 1e-17.
        let mean0 = samples.iter().sum::<f64>() / n;
        let corr = samples.iter().map(|v| v - mean0).sum::<f64>() / n;
        let mean = mean0 + corr;
        let values: Vec<f64> = samples.iter().map(|v| v - mean).collect();

        let h = period / n;
        let mut cumulative = Vec::with_capacity(values.len() + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for i in 0..values.len() {
            let next = values[(i + 1) % values.len()];
            acc += 0.5 * (values[i] + next) * h;
            cumulative.push(acc);
        }
        let mut profile = PeriodicProfile {
            period,
            shape: ProfileShape::Samples(values),
            cumulative,
            primitive_min: 0.0,
            argmin: 0.0,
        };
        let (z, m) = profile.compute_argmin();
        profile.argmin = z;
        profile.primitive_min = m;
        Ok(Normalized {
            profile,
            removed_average: mean,
        })
    }

    /// Samples `w` on `n` open-grid points and normalises.
    pub fn from_fn<F: Fn(f64) -> f64>(w: F, period: f64, n: usize) -> Result<Normalized> {
        check_period(period)?;
        let samples: Vec<f64> = (0..n).map(|i| w(period * i as f64 / n as f64)).collect();
        Self::normalize_zero_average(&samples, period)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn shape(&self) -> &ProfileShape {
        &self.shape
    }

    pub fn is_zero(&self) -> bool {
        match &self.shape {
            ProfileShape::Zero => true,
            ProfileShape::Sine { amplitude, .. } | ProfileShape::Sawtooth { amplitude, .. } => {
                *amplitude == 0.0
            }
            ProfileShape::Samples(v) => v.iter().all(|x| *x == 0.0),
        }
    }

    /// `min_x \int_0^x w`.
    pub fn primitive_min(&self) -> f64 {
        self.primitive_min
    }

    /// The point `z` in `[0, p)` where the running primitive attains its minimum.
    pub fn argmin_in_period(&self) -> f64 {
        self.argmin
    }

    /// `(z, min \int_0^x w)`, smallest `z` on ties.
    pub fn argmin_primitive(&self) -> (f64, f64) {
        (self.argmin, self.primitive_min)
    }

    /// `[min w, max w]`.
    pub fn bounds(&self) -> (f64, f64) {
        match &self.shape {
            ProfileShape::Zero => (0.0, 0.0),
            ProfileShape::Sine { amplitude, .. } | ProfileShape::Sawtooth { amplitude, .. } => {
                (-amplitude.abs(), amplitude.abs())
            }
            ProfileShape::Samples(v) => v
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x))),
        }
    }

    /// `max |w|`.
    pub fn sup_norm(&self) -> f64 {
        let (a, b) = self.bounds();
        a.abs().max(b.abs())
    }

    /// `w(x)`. Periodic by construction: the argument is reduced mod `p`.
    pub fn value(&self, x: f64) -> f64 {
        let p = self.period;
        match &self.shape {
            ProfileShape::Zero => 0.0,
            ProfileShape::Sine { amplitude, phase } => {
                amplitude * math::sin(TAU * math::rem_period(x, p) / p + phase)
            }
            ProfileShape::Sawtooth { amplitude, phase } => {
                amplitude * (2.0 * math::fract(x / p + phase / TAU) - 1.0)
            }
            ProfileShape::Samples(v) => {
                let n = v.len();
                let h = p / n as f64;
                let r = math::rem_period(x, p);
                let mut i = (r / h) as usize;
                if i >= n {
                    i = n - 1;
                }
                let s = (r - i as f64 * h) / h;
                let a = v[i];
                let b = v[(i + 1) % n];
                a + (b - a) * s
            }
        }
    }

    /// `W(x) = \int_0^x w(y) dy`, periodic because the average is zero.
    pub fn primitive(&self, x: f64) -> f64 {
        let p = self.period;
        match &self.shape {
            ProfileShape::Zero => 0.0,
            ProfileShape::Sine { amplitude, phase } => {
                let arg = TAU * math::rem_period(x, p) / p + phase;
                amplitude * p / TAU * (math::cos(*phase) - math::cos(arg))
            }
            ProfileShape::Sawtooth { amplitude, phase } => {
                let g = |th: f64| {
                    let fr = math::fract(th);
                    fr * fr - fr
                };
                let th0 = phase / TAU;
                amplitude * p * (g(x / p + th0) - g(th0))
            }
            ProfileShape::Samples(v) => {
                let n = v.len();
                let h = p / n as f64;
                let r = math::rem_period(x, p);
                let mut i = (r / h) as usize;
                if i >= n {
                    i = n - 1;
                }
                let s = r - i as f64 * h;
                let a = v[i];
                let b = v[(i + 1) % n];
                self.cumulative[i] + a * s + (b - a) * s * s / (2.0 * h)
            }
        }
    }

    /// `\int_z^x w`, non-negative for every `x` when `z` is the argmin.
    pub fn primitive_from(&self, z: f64, x: f64) -> f64 {
        self.primitive(x) - self.primitive(z)
    }

    fn compute_argmin(&self) -> (f64, f64) {
        let p = self.period;
        let wrap = |z: f64| {
            let z = math::rem_period(z, p);
            // values within an ulp-scale distance of p belong to 0
            if p - z < 1e-12 * p {
                0.0
            } else {
                z
            }
        };
        match &self.shape {
            ProfileShape::Zero => (0.0, 0.0),
            ProfileShape::Sine { amplitude, phase } => {
                if *amplitude == 0.0 {
                    return (0.0, 0.0);
                }
                // W = a p / 2π (cos φ - cos(2π x/p + φ)); minimum where the
                // cosine is +1 (a > 0) or -1 (a < 0).
                let target = if *amplitude > 0.0 { 0.0 } else { 0.5 * TAU };
                let z = wrap((target - phase) * p / TAU);
                let extreme = if *amplitude > 0.0 { 1.0 } else { -1.0 };
                let m = amplitude * p / TAU * (math::cos(*phase) - extreme);
                (z, m)
            }
            ProfileShape::Sawtooth { amplitude, phase } => {
                if *amplitude == 0.0 {
                    return (0.0, 0.0);
                }
                let th0 = phase / TAU;
                let g0 = {
                    let fr = math::fract(th0);
                    fr * fr - fr
                };
                // g(θ) = frac² - frac: min -1/4 at frac = 1/2, max 0 at frac = 0
                let (frac_target, g_star) = if *amplitude > 0.0 { (0.5, -0.25) } else { (0.0, 0.0) };
                let z = wrap((frac_target - th0) * p);
                (z, amplitude * p * (g_star - g0))
            }
            ProfileShape::Samples(v) => {
                let n = v.len();
                let h = p / n as f64;
                let mut best = (0.0, 0.0);
                let consider = |x: f64, val: f64, best: &mut (f64, f64)| {
                    if val < best.1 {
                        *best = (x, val);
                    }
                };
                for i in 0..n {
                    let a = v[i];
                    let b = v[(i + 1) % n];
                    let x0 = i as f64 * h;
                    consider(x0, self.cumulative[i], &mut best);
                    // interior critical point of the quadratic piece
                    if a < 0.0 && b > 0.0 {
                        let s = -a / (b - a) * h;
                        let val = self.cumulative[i] + a * s + (b - a) * s * s / (2.0 * h);
                        consider(x0 + s, val, &mut best);
                    }
                }
                (wrap(best.0), best.1)
            }
        }
    }
}

fn check_period(period: f64) -> Result<()> {
    if period > 0.0 && period.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput("period must be positive and finite"))
    }
}

/// Uniform samples on a closed interval, piecewise-linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSegment {
    lo: f64,
    hi: f64,
    values: Vec<f64>,
    /// `\int_lo^{x_i}` at the nodes.
    cumulative: Vec<f64>,
}

impl SampledSegment {
    pub fn new(lo: f64, hi: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidInput("sampled segment needs at least two samples"));
        }
        if !(lo < hi) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("sampled segment needs lo < hi and finite values"));
        }
        let h = (hi - lo) / (values.len() - 1) as f64;
        let mut cumulative = Vec::with_capacity(values.len());
        cumulative.push(0.0);
        let mut acc = 0.0;
        for w in values.windows(2) {
            acc += 0.5 * (w[0] + w[1]) * h;
            cumulative.push(acc);
        }
        Ok(SampledSegment {
            lo,
            hi,
            values,
            cumulative,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.values.len() - 1) as f64
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let h = self.step();
        let x = x.clamp(self.lo, self.hi);
        let mut i = ((x - self.lo) / h) as usize;
        if i >= self.values.len() - 1 {
            i = self.values.len() - 2;
        }
        (i, x - (self.lo + i as f64 * h))
    }

    pub fn value(&self, x: f64) -> f64 {
        let (i, s) = self.locate(x);
        let h = self.step();
        let (a, b) = (self.values[i], self.values[i + 1]);
        a + (b - a) * s / h
    }

    /// `\int_lo^x`, with `x` clamped to the segment.
    pub fn integral_from_lo(&self, x: f64) -> f64 {
        let (i, s) = self.locate(x);
        let h = self.step();
        let (a, b) = (self.values[i], self.values[i + 1]);
        self.cumulative[i] + a * s + (b - a) * s * s / (2.0 * h)
    }

    fn bounds(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)))
    }
}

/// The compact part of the initial data on `[-N, N]`.
#[derive(Debug, Clone, PartialEq)]
pub enum MiddlePart {
    /// `u0` equals the glued background.
    Zero,
    /// Raised-cosine deviation of total mass `mass` supported on
    /// `[center - half_width, center + half_width]`.
    Bump { center: f64, half_width: f64, mass: f64 },
    /// Deviation from the glued background, sampled on `[-N, N]`.
    Deviation(SampledSegment),
    /// The values of `u0` itself, sampled on `[-N, N]`.
    Absolute(SampledSegment),
}

impl MiddlePart {
    fn bump_primitive(center: f64, half_width: f64, mass: f64, x: f64) -> f64 {
        let s = (x - center).clamp(-half_width, half_width);
        let k = core::f64::consts::PI / half_width;
        0.5 * mass / half_width * ((s + half_width) + math::sin(k * s) / k)
    }

    fn bump_value(center: f64, half_width: f64, mass: f64, x: f64) -> f64 {
        let s = x - center;
        if s.abs() > half_width {
            0.0
        } else {
            0.5 * mass / half_width * (1.0 + math::cos(core::f64::consts::PI * s / half_width))
        }
    }
}

/// The full initial data `u0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeInitialData {
    pub u_left: f64,
    pub u_right: f64,
    pub left: PeriodicProfile,
    pub right: PeriodicProfile,
    half_width: f64,
    middle: MiddlePart,
    range: (f64, f64),
    /// `\int_0^N` and `\int_{-N}^0` of the deviation.
    dev_right_mass: f64,
    dev_left_mass: f64,
}

impl CompositeInitialData {
    pub fn new(
        u_left: f64,
        u_right: f64,
        left: PeriodicProfile,
        right: PeriodicProfile,
        half_width: f64,
        middle: MiddlePart,
    ) -> Result<Self> {
        if !(u_left.is_finite() && u_right.is_finite()) {
            return Err(Error::InvalidInput("far-field states must be finite"));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidInput("middle half-width N must be positive"));
        }
        match &middle {
            MiddlePart::Bump {
                center,
                half_width: hw,
                mass,
            } => {
                if !(*hw > 0.0 && mass.is_finite() && center.is_finite()) {
                    return Err(Error::InvalidInput("bump needs a positive half-width and finite mass"));
                }
                if center - hw < -half_width - 1e-12 || center + hw > half_width + 1e-12 {
                    return Err(Error::InvalidInput("bump support must lie inside [-N, N]"));
                }
            }
            MiddlePart::Deviation(seg) | MiddlePart::Absolute(seg) => {
                if (seg.lo + half_width).abs() > 1e-12 * half_width
                    || (seg.hi - half_width).abs() > 1e-12 * half_width
                {
                    return Err(Error::InvalidInput("middle samples must span exactly [-N, N]"));
                }
            }
            MiddlePart::Zero => {}
        }
        let mut data = CompositeInitialData {
            u_left,
            u_right,
            left,
            right,
            half_width,
            middle,
            range: (0.0, 0.0),
            dev_right_mass: 0.0,
            dev_left_mass: 0.0,
        };
        data.dev_right_mass = data.deviation_primitive(half_width);
        data.dev_left_mass = -data.deviation_primitive(-half_width);
        data.range = data.compute_range();
        Ok(data)
    }

    /// `ubar + w` everywhere: the data of a purely periodic solution.
    pub fn periodic(ubar: f64, profile: PeriodicProfile) -> Self {
        let n = profile.period();
        Self::new(ubar, ubar, profile.clone(), profile, n, MiddlePart::Zero)
            .expect("periodic data is always valid")
    }

    /// Two-constant Riemann data with a jump at the origin.
    pub fn riemann(u_left: f64, u_right: f64) -> Result<Self> {
        Self::new(
            u_left,
            u_right,
            PeriodicProfile::zero(1.0)?,
            PeriodicProfile::zero(1.0)?,
            1.0,
            MiddlePart::Zero,
        )
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn middle(&self) -> &MiddlePart {
        &self.middle
    }

    /// An interval containing every value of `u0`.
    pub fn total_range(&self) -> (f64, f64) {
        self.range
    }

    /// `max |u0|`.
    pub fn sup_norm(&self) -> f64 {
        self.range.0.abs().max(self.range.1.abs())
    }

    pub fn max_period(&self) -> f64 {
        self.left.period().max(self.right.period())
    }

    pub fn min_period(&self) -> f64 {
        self.left.period().min(self.right.period())
    }

    fn compute_range(&self) -> (f64, f64) {
        let (la, lb) = self.left.bounds();
        let (ra, rb) = self.right.bounds();
        let bg = (
            (self.u_left + la).min(self.u_right + ra),
            (self.u_left + lb).max(self.u_right + rb),
        );
        match &self.middle {
            MiddlePart::Zero => bg,
            MiddlePart::Bump {
                half_width, mass, ..
            } => {
                let peak = mass / half_width;
                (bg.0 + peak.min(0.0), bg.1 + peak.max(0.0))
            }
            MiddlePart::Deviation(seg) => {
                let (a, b) = seg.bounds();
                (bg.0 + a.min(0.0), bg.1 + b.max(0.0))
            }
            MiddlePart::Absolute(seg) => {
                let (a, b) = seg.bounds();
                (bg.0.min(a), bg.1.max(b))
            }
        }
    }

    /// Background value: `u_left + w_left` for `x < 0`, `u_right + w_right` otherwise.
    pub fn background(&self, x: f64) -> f64 {
        if x < 0.0 {
            self.u_left + self.left.value(x)
        } else {
            self.u_right + self.right.value(x)
        }
    }

    /// `\int_0^x` of the background.
    pub fn background_primitive(&self, x: f64) -> f64 {
        if x < 0.0 {
            self.u_left * x + self.left.primitive(x)
        } else {
            self.u_right * x + self.right.primitive(x)
        }
    }

    /// `u0(x) - background(x)`; zero outside `[-N, N]`.
    pub fn deviation(&self, x: f64) -> f64 {
        if x < -self.half_width || x > self.half_width {
            return 0.0;
        }
        match &self.middle {
            MiddlePart::Zero => 0.0,
            MiddlePart::Bump {
                center,
                half_width,
                mass,
            } => MiddlePart::bump_value(*center, *half_width, *mass, x),
            MiddlePart::Deviation(seg) => seg.value(x),
            MiddlePart::Absolute(seg) => seg.value(x) - self.background(x),
        }
    }

    /// `\int_0^x` of the deviation; constant outside `[-N, N]`.
    pub fn deviation_primitive(&self, x: f64) -> f64 {
        let n = self.half_width;
        let xc = x.clamp(-n, n);
        match &self.middle {
            MiddlePart::Zero => 0.0,
            MiddlePart::Bump {
                center,
                half_width,
                mass,
            } => {
                MiddlePart::bump_primitive(*center, *half_width, *mass, xc)
                    - MiddlePart::bump_primitive(*center, *half_width, *mass, 0.0)
            }
            MiddlePart::Deviation(seg) => seg.integral_from_lo(xc) - seg.integral_from_lo(0.0),
            MiddlePart::Absolute(seg) => {
                seg.integral_from_lo(xc) - seg.integral_from_lo(0.0) - self.background_primitive(xc)
            }
        }
    }

    /// `u0(x)`.
    pub fn value(&self, x: f64) -> f64 {
        if x < -self.half_width {
            self.u_left + self.left.value(x)
        } else if x > self.half_width {
            self.u_right + self.right.value(x)
        } else {
            match &self.middle {
                MiddlePart::Absolute(seg) => seg.value(x),
                _ => self.background(x) + self.deviation(x),
            }
        }
    }

    /// Exact `\int_0^x u0`.
    pub fn primitive(&self, x: f64) -> f64 {
        self.background_primitive(x) + self.deviation_primitive(x)
    }

    /// `\int_a^b u0`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.primitive(b) - self.primitive(a)
    }

    /// The asymptotic shift of the shock,
    /// `[∫_{-N}^0 dev + ∫_0^N dev - min W_left + min W_right] / (u_left - u_right)`.
    pub fn shift_x_infinity(&self) -> Result<f64> {
        if !(self.u_left > self.u_right) {
            return Err(Error::Precondition("shift needs u_left > u_right"));
        }
        let mass = self.dev_left_mass + self.dev_right_mass;
        Ok((mass - self.left.primitive_min() + self.right.primitive_min()) / (self.u_left - self.u_right))
    }

    /// Smallest `K >= 0` with `z_l - K p_l <= -N` and `z_r + K p_r >= N`.
    pub fn smallest_k(&self) -> i64 {
        let n = self.half_width;
        let kl = math::ceil((self.left.argmin_in_period() + n) / self.left.period());
        let kr = math::ceil((n - self.right.argmin_in_period()) / self.right.period());
        kl.max(kr).max(0.0) as i64
    }

    fn check_k(&self, k: i64) -> Result<()> {
        let n = self.half_width;
        let gl = self.left.argmin_in_period() - k as f64 * self.left.period();
        let gr = self.right.argmin_in_period() + k as f64 * self.right.period();
        if k < 0 || gl > -n || gr < n {
            Err(Error::Precondition("K too small: the divides must bracket [-N, N] at t = 0"))
        } else {
            Ok(())
        }
    }

    /// `(P0, Q0)`: `P0 = min_x ∫_{Γ_l^K(0)}^x (u0 - u_left)` and
    /// `Q0 = max_x ∫_x^{Γ_r^K(0)} (u0 - u_right)`, extrema taken over
    /// `[Γ_l^K(0), Γ_r^K(0)]`.
    pub fn initial_invariants(&self, k: i64) -> Result<(f64, f64)> {
        if self.u_left > self.u_right {
            return Err(Error::Precondition("invariants need u_left <= u_right"));
        }
        self.check_k(k)?;
        let a = self.left.argmin_in_period() - k as f64 * self.left.period();
        let b = self.right.argmin_in_period() + k as f64 * self.right.period();
        let fa = self.primitive(a);
        let fb = self.primitive(b);
        let p_fn = |x: f64| self.primitive(x) - fa - self.u_left * (x - a);
        let q_fn = |x: f64| -(fb - self.primitive(x) - self.u_right * (b - x));
        let h = self.min_period() / 1024.0;
        let p0 = grid_min_refined(p_fn, a, b, h).min(0.0);
        let q0 = -grid_min_refined(q_fn, a, b, h).min(0.0);
        Ok((p0, q0))
    }

    /// Left or right divide line `Γ^k(t)`.
    pub fn gamma_curve(&self, side: DivideSide, k: i64, t: f64, flux: &FluxModel) -> f64 {
        match side {
            DivideSide::Left => {
                self.left.argmin_in_period() - k as f64 * self.left.period() + flux.fprime(self.u_left) * t
            }
            DivideSide::Right => {
                self.right.argmin_in_period() + k as f64 * self.right.period() + flux.fprime(self.u_right) * t
            }
        }
    }

    /// Whether `x = x0 + f'(ubar) t` is a divide: `∫_{x0}^x (u0 - ubar) >= -tol`
    /// for all `x`.
    ///
    /// Scans `[min(x0, -N) - p_l, max(x0, N) + p_r]` at 1024 points per period.
    /// Beyond that window the running integral is a linear trend plus a
    /// periodic part, so the tails decide the answer through the far-field
    /// states: a left state above `ubar` (or a right state below it) drives the
    /// integral to `-∞`.
    pub fn is_divide(&self, ubar: f64, x0: f64) -> bool {
        let tol_scale = |p: &PeriodicProfile| p.sup_norm() * p.period();
        let tol = 1e-9 * (1.0 + tol_scale(&self.left).max(tol_scale(&self.right)));
        let scale = 1e-12 * (1.0 + ubar.abs());
        if self.u_left > ubar + scale || self.u_right < ubar - scale {
            return false;
        }
        let lo = x0.min(-self.half_width) - self.left.period();
        let hi = x0.max(self.half_width) + self.right.period();
        let h = self.min_period() / 1024.0;
        let f0 = self.primitive(x0);
        let g = |x: f64| self.primitive(x) - f0 - ubar * (x - x0);
        let n = math::ceil((hi - lo) / h) as usize;
        for i in 0..=n {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            if g(x) < -tol {
                return false;
            }
        }
        true
    }
}

/// Which family of divides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivideSide {
    Left,
    Right,
}

/// Minimum of `g` over `[a, b]`: dense scan at spacing `<= h`, then
/// golden-section refinement around each of the best few grid points.
pub(crate) fn grid_min_refined<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, h: f64) -> f64 {
    if !(b > a) {
        return g(a);
    }
    let n = (math::ceil((b - a) / h) as usize).max(2);
    let step = (b - a) / n as f64;
    let vals: Vec<f64> = (0..=n).map(|i| g(a + step * i as f64)).collect();
    let mut best = f64::INFINITY;
    for v in &vals {
        best = best.min(*v);
    }
    let mut refined = best;
    for i in 0..=n {
        let left = if i > 0 { vals[i - 1] } else { f64::INFINITY };
        let right = if i < n { vals[i + 1] } else { f64::INFINITY };
        if vals[i] <= left && vals[i] <= right && vals[i] <= best + 1e-9 * (1.0 + best.abs()) {
            let lo = a + step * (i.saturating_sub(1)) as f64;
            let hi = a + step * (i + 1).min(n) as f64;
            let (_, v) = golden_section(&g, lo, hi, 1e-13 * (1.0 + lo.abs().max(hi.abs())));
            refined = refined.min(v);
        }
    }
    refined
}
