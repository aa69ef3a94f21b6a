use alloc::vec::Vec;

/// A cell `[xs[index], xs[index + 1]]` across which the sampled solution drops
/// by more than the jump threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpCell {
    pub index: usize,
    /// Value at the left node.
    pub left: f64,
    /// Value at the right node.
    pub right: f64,
    /// Jump location and one-sided limits, once located.
    pub located: Option<LocatedJump>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocatedJump {
    pub position: f64,
    pub minus: f64,
    pub plus: f64,
}

/// `u(., t)` sampled on uniform nodes of a window.
///
/// `potential[i]` is the Hopf–Lax value function at `xs[i]`, an exact
/// primitive of `u(., t)` up to a time-dependent constant, so cell averages and
/// integrals between nodes are exact rather than quadrature approximations.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub t: f64,
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub potential: Vec<f64>,
    pub jumps: Vec<JumpCell>,
}

impl SolutionField {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn window(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn dx(&self) -> f64 {
        let (a, b) = self.window();
        (b - a) / (self.xs.len() - 1) as f64
    }

    /// Exact average of `u` over `[xs[i], xs[i + 1]]`.
    pub fn cell_average(&self, i: usize) -> f64 {
        (self.potential[i + 1] - self.potential[i]) / (self.xs[i + 1] - self.xs[i])
    }

    pub fn cell_averages(&self) -> Vec<f64> {
        (0..self.xs.len() - 1).map(|i| self.cell_average(i)).collect()
    }

    /// Exact `\int_{xs[i]}^{xs[j]} u`.
    pub fn integral(&self, i: usize, j: usize) -> f64 {
        self.potential[j] - self.potential[i]
    }

    /// Largest `t (u(x + a) - u(x)) / a` over node pairs `a = k dx`, `k = 1..=max_lag`.
    pub fn oleinik_constant(&self, max_lag: usize) -> f64 {
        let mut e = f64::NEG_INFINITY;
        for lag in 1..=max_lag.max(1) {
            for i in 0..self.xs.len().saturating_sub(lag) {
                let a = self.xs[i + lag] - self.xs[i];
                e = e.max(self.t * (self.values[i + lag] - self.values[i]) / a);
            }
        }
        e
    }

    /// `max |u - target(x)|` over the nodes selected by `keep`.
    pub fn sup_distance<T, K>(&self, target: T, keep: K) -> f64
    where
        T: Fn(f64) -> f64,
        K: Fn(f64) -> bool,
    {
        self.xs
            .iter()
            .zip(&self.values)
            .filter(|(x, _)| keep(**x))
            .map(|(x, u)| (u - target(*x)).abs())
            .fold(0.0, f64::max)
    }
}
