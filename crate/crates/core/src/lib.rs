//! Nowcasting of delay-censored surveillance counts.
//!
//! The crate bundles three ways of deciding whether case counts in a county
//! are increasing:
//!
//! * a 7-day rolling-average run rule ([`indicators::rolling_indicator`]),
//! * a cubic-spline run rule ([`indicators::spline_indicator`]),
//! * a Bayesian spatio-temporal model of onset counts and reporting delays
//!   ([`model`], fitted by the Metropolis-within-Gibbs engine in [`sampler`]
//!   and summarised by [`posterior`]).
//!
//! [`simulate`] draws synthetic line lists from the same generative model and
//! [`evaluation`] scores indicator decisions against fully reported counts.

pub mod cli;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod indicators;
pub mod model;
pub mod posterior;
pub mod sampler;
pub mod simulate;

pub use error::{Error, Result};
