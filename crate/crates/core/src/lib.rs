//! Simulation and exact-moment toolkit for the elephant random walk with
//! stops.

pub mod cli;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod martingale;
pub mod moments;
pub mod params;
pub mod rng;
pub mod simulator;
pub mod specfun;
pub mod stats;
pub mod verify;

pub use error::{ErwsError, Result};
