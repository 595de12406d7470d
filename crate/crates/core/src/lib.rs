//! Deep autoencoders for sentence-level bag-of-words vectors.
//!
//! The crate covers the full pipeline:
//!
//! - [`corpus`]: stopword removal, Porter stemming, two-stage vocabulary
//!   filtering and sparse count vectors.
//! - [`rbm`]: binary and replicated-softmax RBMs trained with CD-1.
//! - [`autoencoder`]: greedy layer-wise pretraining of an RBM stack, unrolling
//!   into an encoder/decoder and fine-tuning by backpropagation.
//! - [`metrics`]: reconstruction error, the structure preservation index
//!   (SPI), the similarity accumulation index (SAI) and cosine histograms.
//! - [`bottleneck`]: sweeping the code width and locating the critical
//!   bottleneck dimensionality from the SPI curve.

pub mod autoencoder;
pub mod bottleneck;
pub mod corpus;
pub mod error;
pub mod metrics;
pub mod rbm;
pub mod rows;
pub mod util;

pub use error::{Error, ErrorCategory, Result};
