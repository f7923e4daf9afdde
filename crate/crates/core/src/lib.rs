//! Numerical workbench for photon oscillations into weakly coupled massive
//! particles: axion-like particles in light-shining-through-wall and
//! cavity-ellipticity setups, and paraphotons through kinetic mixing.
//!
//! * [`units`]: lab units to natural units.
//! * [`kernels`]: conversion, regeneration and ellipticity formulas.
//! * [`statistics`]: null-result counting bounds.
//! * [`limits`]: closed-form inversion into exclusion curves.
//! * [`campaign`]: seeded Monte Carlo of a pulsed campaign.
//! * [`config`], [`output`], [`cli`]: files and the command line.

pub mod campaign;
pub mod cli;
pub mod config;
pub mod error;
pub mod kernels;
pub mod limits;
pub mod output;
pub mod statistics;
pub mod units;

pub use error::{Error, Result};
