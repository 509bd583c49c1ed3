//! Average upwind divergence operator for scalar conservation laws.
//!
//! The operator replaces `div F(u)` by an average of upwind Engquist–Osher
//! differences taken along a finite set of directions and a range of radii
//! weighted by a filter kernel. Evolving `∂t u = aud F(u)` gives a monotone,
//! conservative semi-discrete flow whose zero-filter limit is the entropy
//! solution of the local conservation law.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod error;
pub mod evolve;
pub mod filter;
pub mod flux;
pub mod geometry;
pub mod initial;
pub mod operator;
pub(crate) mod quad;
pub mod resolvent;

pub use error::{Error, Result};
