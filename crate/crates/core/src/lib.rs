//! Desk-scale pipeline for traffic-aware base-station sleep control: grid
//! traffic ingestion and synthesis, a two-branch spatio-temporal forecaster,
//! a deterministic dispatch/cost simulator, classical sleep policies, and a
//! deterministic-policy-gradient agent with benchmark transformation and an
//! explorer network.

pub mod agent;
pub mod baselines;
pub mod config;
pub mod error;
pub mod forecast;
pub mod report;
pub mod seed;
pub mod sim;
pub mod traffic;

pub use deepbsc_nn::Real;
pub use error::{Error, Result};
