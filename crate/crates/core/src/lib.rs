//! Passive thermochemical heating of small spherical sensor probes.
//!
//! The crate is organised bottom-up:
//!
//! * [`thermo_props`] – salt-hydrate enthalpies, storage densities and sorbent ranking.
//! * [`thermal_network`] – lumped-capacitance nodes and links, transient and steady solvers.
//! * [`tess_model`] – salt bed, water reservoir, heat-release kinetics and recharge.
//! * [`controller`] – sensor readouts and the heater / valve thermostat.
//! * [`environment`] – ambient boundary temperature profiles.
//! * [`simulation`] – the run loop tying the pieces together.
//! * [`scenario`] – configuration documents, budgets, summaries, comparisons and sweeps.
//!
//! Temperatures are Kelvin everywhere inside the library.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod controller;
pub mod environment;
mod error;
pub mod ode;
pub mod scenario;
pub mod simulation;
pub mod tess_model;
pub mod thermal_network;
pub mod thermo_props;

pub use error::{ConfigError, Error, Result};

/// 0 °C in Kelvin.
pub const ZERO_CELSIUS: f64 = 273.15;

/// Convert a Kelvin temperature to Celsius.
pub fn kelvin_to_celsius(kelvin: f64) -> f64 {
    kelvin - ZERO_CELSIUS
}

/// Convert a Celsius temperature to Kelvin.
pub fn celsius_to_kelvin(celsius: f64) -> f64 {
    celsius + ZERO_CELSIUS
}
