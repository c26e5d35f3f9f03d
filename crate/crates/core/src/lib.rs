//! Bounds on quantum reading of optical memories with thermal loss: Gaussian
//! machinery, classical and quantum error bounds, information gain, critical
//! signal numbers and a truncated-Fock oracle that cross-checks the closed forms.

// `!(x >= 0.0)` is how NaN gets rejected along with negatives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod channel;
pub mod error;
pub mod gaussian;
pub mod optimize;
pub mod analysis;
pub mod critical;
pub mod fock;
pub mod certify;

pub use channel::{Bit, MemoryModel, SignalProfile};
pub use error::{QreadError, Result};
