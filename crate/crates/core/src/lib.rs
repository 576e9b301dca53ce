//! Laser cooling of a harmonic oscillator by a driven qudit beyond the
//! Lamb-Dicke regime.

// `!(x > 0.0)` guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod floquet;
pub mod fokker_planck;
pub mod harmonics;
pub mod interp;
pub mod linalg;
pub mod ode;
pub mod oracle;
pub mod qudit;
pub mod rates;
pub mod scenario;
pub mod special;

pub use error::{Error, Result};
