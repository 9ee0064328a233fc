//! Spectral analysis of contrastive learning for novel class discovery.
//!
//! A finite population of labeled and unlabeled natural samples defines
//! an augmentation graph; the crate builds that graph, factorizes it,
//! evaluates the contrastive objective whose minimizer is the spectral
//! embedding, and measures how well the embedding linearly separates the
//! novel classes, together with the bounds that explain when it does.
//!
//! Runnable tours live in `examples/`:
//!
//! - `cargo run --example augmentation_graph`
//! - `cargo run --example spectral_embedding`
//! - `cargo run --example nscl_equivalence`
//! - `cargo run --example linear_probe`
//! - `cargo run --example knowledge_bound`
//! - `cargo run --example coverage`
//! - `cargo run --example toy_model`
//! - `cargo run --example threshold_sweep`
//! - `cargo run --example cluster_accuracy`

pub mod bounds;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod nscl;
pub mod population;
pub mod probe;
pub mod spectral;
pub mod synth;
pub mod toy;

pub use error::{Error, Result};
