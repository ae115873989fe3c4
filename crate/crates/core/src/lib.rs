//! Decision-making under causal-structure uncertainty for the bivariate case.
//!
//! The crate covers the full pipeline for a pair of variables `(x, y)` that
//! are related either as `x -> y` or `y -> x`:
//!
//! - [`synth`] draws data from the two competing structural models and
//!   exposes the ground-truth marginal effect.
//! - [`numkit`] holds the regression toolkit (least squares, quadratic fits,
//!   a GCV-tuned cubic smoothing spline, finite differences).
//! - [`depstats`] computes the dependence statistics used to score causal
//!   directions.
//! - [`discovery`] scores both directions and turns bootstrap votes into a
//!   structure probability.
//! - [`decide`] implements the model-selection and model-averaging rules,
//!   their losses, and brute-force checks of their optimality.
//! - [`stats`] carries the Student-t machinery used by the reporting layer.
//!
//! Everything here is pure computation and builds without `std`; only
//! `alloc` is required.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod decide;
pub mod depstats;
pub mod discovery;
mod error;
mod math;
pub mod numkit;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
