//! Symbolic engine for a coupled pair of BKP hierarchies linked by the formal
//! Schrödinger operator `∂1∂2 + u`.
//!
//! The crate provides exact scalars ([`scalar`]), the differential polynomial
//! algebra with its two derivations ([`diffalg`]), truncated pseudodifferential
//! operators ([`psido`]), the Lax operators, flows and reductions ([`hierarchy`]),
//! and an instance-wise verification suite ([`verify`]).

pub mod diffalg;
pub mod error;
pub mod hierarchy;
pub mod json;
pub mod parse;
pub mod psido;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
