//! Brownian distance covariance representations and a few-shot adapter
//! classifier over precomputed feature banks.
//!
//! The crate turns feature maps into double-centered Euclidean distance
//! matrices — a training-free pooling layer whose entries capture nonlinear
//! dependence that plain covariance misses — and classifies by combining
//! cosine similarity to class prototype matrices with a single trainable
//! linear reasoning head initialized from class text features. Everything
//! runs from on-disk feature banks, so no encoder inference is involved
//! anywhere.
//!
//! Module map:
//!
//! - [`linalg`]: dense f64 matrices, vector helpers, the seeded RNG.
//! - [`bdc`]: distance matrices, double-centering, the trace-form
//!   dependence measure, and a brute-force oracle (`dcov`/`dcorr`).
//! - [`reduction`]: fixed linear projections (random-orthogonal, PCA).
//! - [`head`]: the linear reasoning head and its training loop.
//! - [`fewshot`]: prototypes, fusion, prediction, evaluation, grid search.
//! - [`data`]: feature banks, manifests, checkpoints, reports, and the
//!   synthetic dependence-structured benchmark generator.
//! - [`cli`]: the `bdc` command-line front end.
//!
//! Start with the runnable examples (`cargo run --example full_pipeline`)
//! or the `bdc` binary (`bdc gen`, `bdc train`, `bdc eval`, ...).

// Indexed loops mirror the row/column symmetry of the matrix kernels.
#![allow(clippy::needless_range_loop)]

pub mod bdc;
pub mod cli;
pub mod data;
pub mod error;
pub mod fewshot;
pub mod head;
pub mod linalg;
pub mod reduction;

pub use error::{Error, Result};
