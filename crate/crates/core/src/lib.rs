//! Finding paid opinion-manipulation trolls in news-forum comment data.
//!
//! The pipeline runs in stages, each in its own module:
//!
//! - [`corpus`] loads and indexes publications, threaded comments and users;
//! - [`labeling`] turns troll accusations between users into training labels;
//! - [`textsim`] provides TF-IDF vectors and cosine similarity;
//! - [`features`] extracts per-user behavioral features, scaled and raw;
//! - [`svm`] trains and applies an RBF-kernel SVM (SMO solver);
//! - [`experiments`] runs the evaluation protocol, ablations, sweeps,
//!   group profiles, and generates synthetic corpora;
//! - [`cli`] wires everything into the `trollscope` executable.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod experiments;
pub mod features;
pub mod labeling;
pub mod svm;
pub mod textsim;

#[cfg(test)]
pub(crate) mod fixtures;

pub use error::{Error, Result};
