//! Entropy solutions of `u_t + f(u)_x = 0` for strictly convex `f`, with
//! Riemann data perturbed by two different periodic functions at the two
//! infinities.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. It provides
//!
//! - [`flux`]: convex flux models, their Legendre transforms and the averaged
//!   speed `sigma(u, v)`;
//! - [`profiles`]: the initial data (periodic tails, compact middle part), the
//!   minimising points of the periodic primitives, divides, the shock shift
//!   and the initial invariants;
//! - [`laxoleinik`]: pointwise and sampled evaluation of the entropy solution
//!   through the Lax–Oleinik / Hopf–Lax variational formula, plus closed-form
//!   Riemann solutions;
//! - [`godunov`]: an independent first-order finite-volume oracle;
//! - [`asymptotics`]: shock location, decay fits, invariant tracking and the
//!   other large-time measurements.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod asymptotics;
pub mod error;
pub mod field;
pub mod flux;
pub mod godunov;
pub mod laxoleinik;
mod math;
pub mod minimize;
pub mod profiles;

pub use error::{Error, Result};
pub use field::{JumpCell, SolutionField};
pub use flux::{FluxKind, FluxModel};
pub use laxoleinik::{RiemannKind, RiemannSolution, Side, VariationalSolver};
pub use asymptotics::{DecayReport, Harness, HarnessSettings, InvariantTrace, ShockTrace};
pub use profiles::{CompositeInitialData, MiddlePart, PeriodicProfile, ProfileShape};
