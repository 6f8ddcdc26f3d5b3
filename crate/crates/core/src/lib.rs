// `!(x > 0.0)` and friends are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chebfun;
pub mod cli;
pub mod error;
pub mod nsbf;
pub mod spectral;
pub mod spps;
pub mod traces;

pub use chebfun::{ChebGrid, ChebyshevExpansion, Interval, C64};
pub use error::{Error, ErrorCategory, Result};
