//! Performance analysis of a dual-hop mixed RF/FSO relaying link with
//! partial relay selection, outdated channel information, co-channel
//! interference at the relay and pointing errors on the optical hop.

pub mod channel;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod monte_carlo;
pub mod sinr;
pub mod quadrature;
pub mod specfun;

pub use error::{Error, Result};

/// Floating-point types accepted by the elementary, generic routines.
pub trait Scalar: num_traits::Float + num_traits::FromPrimitive + Send + Sync + std::fmt::Debug {}

impl<T> Scalar for T where T: num_traits::Float + num_traits::FromPrimitive + Send + Sync + std::fmt::Debug {}

/// Default real type.
pub type Real = f64;
