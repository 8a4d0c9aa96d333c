//! Numerical toolkit for the sum-rate and capacity region of two-receiver
//! broadcast channels under Marton's inner bound.

pub mod channel;
pub mod cli;
pub mod error;
pub mod infoexpr;
mod lifted;
pub mod lpsolve;
pub mod mappings;
pub mod optimize;
pub mod probkit;
pub mod regions;
pub mod sumrate;

pub use channel::{BroadcastChannel, Side};
pub use error::{Error, Result};
