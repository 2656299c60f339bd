//! Network simplification toolkit.
//!
//! Reduces graphs with four sampling methods (RN, RD, RL, BF) and two merging
//! methods (CG, BP), measures eight structural properties on the original and
//! simplified graphs, compares them (Kolmogorov-Smirnov D for per-node
//! distributions, Spearman rho for global scalars) and scores the outcome with
//! the normalized rank-sum measure `A`.
//!
//! The statistics layers are generic over the floating point type through
//! [`Scalar`]; the aliases below fix the common instantiations.

pub mod assess;
pub mod error;
pub mod graph;
pub mod netprops;
pub mod pipeline;
pub mod scalar;
pub mod similarity;
pub mod simplify;

pub use error::{Error, Result};
pub use graph::{ComponentReport, Graph};
pub use scalar::Scalar;
pub use simplify::{Method, SimplifiedNetwork};

pub type PropertyReport64 = netprops::PropertyReport<f64>;
pub type PropertyReport32 = netprops::PropertyReport<f32>;
pub type SimilarityRecord64 = similarity::SimilarityRecord<f64>;
pub type SimilarityRecord32 = similarity::SimilarityRecord<f32>;
pub type GlobalCorrelation64 = similarity::GlobalCorrelation<f64>;
pub type AnovaResult64 = similarity::AnovaResult<f64>;
pub type RankTable64 = assess::RankTable<f64>;
pub type RankTable32 = assess::RankTable<f32>;
pub type Assessment64 = assess::Assessment<f64>;
pub type Assessment32 = assess::Assessment<f32>;
