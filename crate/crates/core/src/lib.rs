//! Growth rates of pairs of weighted shift operators.
//!
//! A pair `(L_0, L_1)` acting on `ℓ²(ℤ)` by `L_a e_i = exp(φ(a,i)) e_{i+1}` is
//! encoded by its weight function `φ`. Every norm of a product reduces to a
//! supremum of windowed sums of `φ`, which this crate evaluates exactly where
//! it can and brackets where it cannot.

pub mod cocycle;
pub mod dbar;
pub mod error;
pub mod experiments;
pub mod jsr;
pub mod lp;
pub mod lyapunov;
pub mod measures;
mod par;
pub mod perturb;
pub mod scalar;
pub mod symbolic;
pub mod weights;

pub use cocycle::{log_norm, periodic_log_spectral_radius, window_sum, Bounds, Certainty};
pub use dbar::{dbar_lp_lower, dbar_periodic_exact, dbar_upper_product, matching_distance, MatchKind};
pub use error::{Error, Result};
pub use jsr::{jsr_lower, jsr_upper};
pub use lyapunov::{lyapunov_mc, lyapunov_periodic_exact, lyapunov_upper};
pub use measures::MeasureSpec;
pub use scalar::{Rational, Scalar};
pub use symbolic::{BiSequence, Rotation, SubshiftSpec, Word};
pub use weights::{build_plan, psi_ell, PerturbationPlan, WeightFunction};
