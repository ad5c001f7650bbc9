//! Computations with 2-primitive elements of finite fields of odd characteristic.

pub mod error;
pub mod exact;
pub mod ffield;
pub mod charsums;
pub mod criteria;
pub mod numtheory;
pub mod par;
pub mod pipeline;

pub use error::{Error, Result};
