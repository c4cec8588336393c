//! Renormalisation of unimodal and Hénon-like maps with stationary
//! combinatorics: fixed points, renormalisation towers, Cantor attractors,
//! average Jacobians and the asymptotics at the tip.

pub mod analytic;
pub mod asymptotics;
pub mod cantor;
pub mod cli;
pub mod config;
pub mod error;
pub mod fixedpoint;
pub mod henon;
pub mod unimodal;

pub use config::Config;
pub use error::{Error, Result};
