//! Dyadic representation of weakly defined Calderón–Zygmund forms.
//!
//! Everything geometric (cube corners, rectangle endpoints, function
//! coefficients) is exact; floating point appears only when a kernel is
//! integrated over a pair of rectangles.
#![no_std]
#![allow(clippy::too_many_arguments, clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod dyadic;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod quad;
pub mod rect;
pub mod simplefn;
pub mod sum;
pub mod form;
pub mod bcr;
pub mod rep;

pub use dyadic::DyadicRational;
pub use error::{Error, Result};
pub use grid::{DyadicCube, ShiftSequence};
pub use rect::Rect;
pub use simplefn::SimpleFunction;
pub use form::WeakForm;
