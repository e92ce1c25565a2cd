//! Media memorability of startups and its relation to first venture funding.
//!
//! The pipeline runs from a dated news corpus and a startup registry to yearly
//! co-occurrence networks, brand scores, topic intensities, a startup-year panel
//! and survival/logit estimates.

pub mod config;
pub mod corpus;
pub mod error;
pub mod inference;
pub mod panel;
pub mod pipeline;
pub mod scoring;
pub mod semnet;
pub mod sentiment;
pub mod stats;
pub mod synth;
pub mod table;
pub mod topics;

pub use error::{Error, ErrorKind, Result};
