//! Steady-state output correlations of a double-cavity optomechanical system.
//!
//! Two cavities share one mechanical resonator: the `+` cavity is pumped on the
//! blue sideband (parametric amplification), the `-` cavity on the red sideband
//! (state exchange). The cavity outputs, passed through causal exponential
//! filters, form a two-mode Gaussian state whose squeezing, purity, Simon
//! separability and CHSH (Banaszek–Wódkiewicz) maximum are computed here.
//!
//! The crate is `no_std` (it needs `alloc`). Everything that touches files,
//! threads or the command line lives in the companion `ombell` crate.
//!
//! Conventions used throughout:
//! * frequencies and rates are in units of the mechanical frequency;
//! * quadratures are `X = (a + a†)/√2`, `Y = -i(a - a†)/√2`, so vacuum variance is ½;
//! * the Langevin state is ordered `[x_m, p_m, X+, Y+, X-, Y-]`;
//! * output quadratures are ordered `[X+, Y+, X-, Y-]`;
//! * all second moments are symmetrized (`½⟨{·,·}⟩`).
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod axis;
pub mod error;
pub mod gaussian;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod sde;
pub mod spectrum;
pub mod stability;
pub mod sweep;

pub use error::{Error, Result};
pub use gaussian::{GaussianMetrics, QuadratureWeights, StandardFormInvariants};
pub use model::{Frame, LinearModel, SystemParams};
pub use spectrum::{FilterSpec, FilteredCovariance, Port};
pub use stability::StabilityVerdict;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Complex scalar used by every frequency-domain routine.
pub type C64 = nalgebra::Complex<f64>;
