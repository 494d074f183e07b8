//! Smooth, locally finitely dependent approximations of the `ℓ_p` norm.
//!
//! The crate builds, for finitely supported vectors, a norm that is
//! `C^∞`-smooth away from the origin, depends locally on only finitely many
//! coordinates, and is sandwiched between `‖·‖_p` and `(1+ε)‖·‖_p`.
//!
//! The pieces are layered bottom-up:
//!
//! * [`params`]: the accuracy budget and the two decreasing parameter
//!   sequences `δ_k`, `θ_k` the construction is tuned by.
//! * [`vectors`]: sparse vectors, their sorted magnitude profile, the
//!   auxiliary norm `ν` and the eventual-monotonicity machinery behind `k₀`.
//! * [`smoothcore`]: calibrated smooth norms on `k` coordinates and the
//!   convex bumps `ρ_n`.
//! * [`normlab`]: the bump series `Ψ`, its Minkowski functional (the final
//!   norm), active families and locality/smoothness verification.
//! * [`combinatorics`]: finite sunflower (Δ-system) extraction.
//! * [`suites`]: randomized verification suites shared by the CLI.

// `!(a < b)` comparisons are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod combinatorics;
pub mod error;
pub mod normlab;
pub mod params;
pub mod smoothcore;
pub mod suites;
pub mod vectors;

pub use error::{Error, Result};
pub use normlab::{LfcWitness, NormLab, NormReport};
pub use params::{Config, ParamSchedule};
pub use vectors::{SortedProfile, SparseVector};
