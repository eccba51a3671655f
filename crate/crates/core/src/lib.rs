//! Secrecy-rate power allocation for RIS-assisted wiretap channels.
//!
//! The crate has two halves:
//!
//! * A continuous AWGN model ([`channel_model`], [`secrecy_rate`],
//!   [`optimizer`], [`experiments`]) that maps a planar scenario to per-link
//!   SNR slopes and splits the transmit budget between the direct link and the
//!   RIS-assisted link with a minorize-maximization loop whose inner step is
//!   solved in closed form from the KKT conditions.
//! * A finite-alphabet wiretap toolkit ([`wiretap_sim`]) that computes total
//!   variation distances, information densities, Rényi divergences and
//!   joint-typicality decoding errors exactly on small random codebooks.
//!
//! [`cli`] wires both into the `ris-secrecy` command-line tool.

// Negated float comparisons are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel_model;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod optimizer;
pub mod secrecy_rate;
pub mod wiretap_sim;

pub use channel_model::{LinkGains, Point2D, Region, Scenario};
pub use error::{Error, Result};
pub use optimizer::{optimize, OptimizerConfig, OptimizerTrace};
pub use secrecy_rate::{PowerAllocation, SnrCoefficients};
