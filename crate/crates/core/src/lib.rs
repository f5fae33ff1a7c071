//! Stochastic scalable Peaceman-Rachford splitting for finite-sum composite
//! problems, together with baseline splitting methods, data generators and
//! a benchmark harness.

pub mod baselines;
pub mod bench;
pub mod datagen;
pub mod error;
pub mod numkit;
pub mod problem;
pub mod splitters;
pub mod trace;

pub use error::{Error, Result};
