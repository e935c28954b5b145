//! Energy-efficient transmit power for train-to-ground mmWave links.
//!
//! A track-side base station serves a cell of length `dl` at perpendicular
//! distance `d0`. The half cell is split into `N` segments, each served by a
//! beam of equal angular width, and the transmit power of every segment is
//! chosen to deliver a data requirement with as little energy as possible.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod antenna;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod limits;
pub mod link;
pub mod montecarlo;
pub mod quadrature;
pub mod schemes;
pub mod traffic;
pub mod units;

pub use error::{Error, Result};
