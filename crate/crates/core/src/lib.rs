//! Downlink beamforming, power allocation and service-probability analysis
//! for an underlay cognitive-radio network whose secondary base station has
//! a large antenna array.
//!
//! The crate covers channel generation ([`channel`]), MEB and ZFB beams
//! ([`beamforming`]), feasibility-based and equal power allocation
//! ([`power`]), the closed-form SINR and interference models ([`analytics`])
//! and seeded Monte Carlo validation ([`montecarlo`], [`experiment`]).

// NaN inputs must fail the range checks, hence `!(x >= 0.0)` style guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod analytics;
pub mod beamforming;
pub mod channel;
pub mod config;
pub mod error;
pub mod experiment;
pub mod lp;
pub mod metrics;
pub mod montecarlo;
pub mod power;
pub mod special;
pub mod wishart;

pub use beamforming::Scheme;
pub use config::NetworkConfig;
pub use error::{Error, Result};
pub use montecarlo::Policy;
