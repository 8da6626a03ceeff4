//! Potential-based shaping advice for multi-agent actor-critic learning.
//!
//! The crate is `no_std` with `alloc`: networks and gradients, the particle
//! simulator, potentials and advice, the learner, the baselines, and the
//! exact small-game oracle. File formats and the command line live in the
//! `sam` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod advice;
pub mod baselines;
mod error;
pub mod numkit;
pub mod samac;
pub mod score;
pub mod world;

pub use error::{Error, Result};
