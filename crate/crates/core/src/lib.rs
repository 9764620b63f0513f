//! Finsler curvature invariants, two independent ways.
//!
//! The generic pipeline differentiates any strongly convex metric F(x, y)
//! through order-4 jets: fundamental tensor, spray, Riemann/Ricci curvature,
//! Busemann–Hausdorff volume, S-curvature, distortion, and the projective /
//! weighted projective Ricci invariants. The `alphabeta` module computes the
//! same quantities for Randers and Kropina metrics from closed-form
//! (α, β)-tensor calculus, giving an end-to-end cross-check; `verify` wires
//! both into seeded scenarios behind the `finsler` CLI.

pub mod error;
pub mod expr;
pub mod fd;
pub mod geom;
pub mod jet;
mod linalg;
pub mod metric;
pub mod volume;

pub mod alphabeta;
pub mod verify;

pub use error::{Error, Result};
