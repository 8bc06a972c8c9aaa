//! Numerical verification of singular transformation-optics cloaks.
//!
//! The crate builds the single and double coating constructions for balls and
//! cylinders, evaluates their degenerate media, and checks invisibility mode by
//! mode: Helmholtz Dirichlet-to-Neumann data, Maxwell admittances and radiating
//! multipoles, and cylindrical scattering under a soft-and-hard lining.

// `!(x > 0.0)` is used on purpose: it also rejects NaN. Mode loops index
// several tables by degree, and solver entry points take the full setting list.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::too_many_arguments,
    clippy::type_complexity
)]

pub mod cylinder;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod harness;
pub mod helmholtz;
pub mod maxwell;
pub mod media;
pub mod ode;
pub mod special;

pub use error::{Error, Result};
