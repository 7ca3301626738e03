//! Shape, amplitude and magnitude outlier indices for functional data.
//!
//! Each curve `y` is compared with a robust reference curve `μ` (the
//! pointwise median of the sample) through three scores computed on the
//! observation grid:
//!
//! ```text
//! shape     I_S = 1 − corr(y, μ)
//! amplitude I_A = ⟨ỹ, μ̃⟩ / ‖μ̃‖² − 1
//! magnitude I_M = mean(y) − (I_A + 1) · mean(μ)
//! ```
//!
//! where `ỹ`, `μ̃` are the curves minus their grid means. Boxplot fences on
//! each score column flag the outliers ([`cutoffs`]). The [`multivariate`]
//! module lifts this to curves with several coordinate functions,
//! [`simulation`] provides the trivariate test models and [`benchmark`]
//! measures detection rates over repeated simulations.

pub mod benchmark;
pub mod cutoffs;
pub mod data;
pub mod error;
pub mod indices;
pub mod multivariate;
pub mod rng;
pub mod simulation;

pub use cutoffs::{classify_outliers, CutoffRule, CutoffSpec, FlagSet};
pub use data::{FunctionalDataset, Grid, MultivariateFunctionalDataset};
pub use error::{Error, Result};
pub use indices::{
    compute_index_table, compute_indices, reference_from_sample, IndexTable, IndexTriple, IndexVariant, Location,
    ReferenceCurve,
};
