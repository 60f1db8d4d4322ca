//! Exact combinatorics of invariant laminations under the angle-multiplying
//! map σ_d on the circle.

// Errors carry the offending exact leaves and points; they are not on any hot path.
#![allow(clippy::result_large_err)]

pub mod circle;
pub mod error;
pub mod face;
pub mod fpp;
pub mod leaves;
pub mod pullback;
pub mod rotation;

pub use circle::{CirclePoint, Degree};
pub use error::{Error, Result};
pub use fpp::FixedPointPortrait;
pub use leaves::{Lamination, Leaf};
pub use pullback::{CriticalPortrait, PullbackState};
