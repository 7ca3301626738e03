//! Outlier detection for curves with several coordinate functions.
//!
//! Three strategies reduce multivariate curves to univariate ones and reuse
//! the univariate indices:
//!
//! * [`detect_marginal`] flags a curve if any of its coordinate functions is
//!   flagged among its margin,
//! * [`detect_stringed`] concatenates the coordinate functions end to end,
//! * [`detect_projection`] projects onto random unit directions and lets the
//!   projections vote.

mod baselines;
mod marginal;
mod projection;
mod stringing;
mod thresholds;

use serde::{Deserialize, Serialize};

use crate::cutoffs::{CutoffSpec, FlagSet};

pub use baselines::estimate_baselines;
pub use marginal::detect_marginal;
pub use projection::{
    apply_thresholds, detect_projection, detect_projection_adaptive, generate_directions, project,
    projection_votes, DirectionSet, VoteMatrix,
};
pub use stringing::{detect_stringed, string_dimensions, Scale};
pub use thresholds::{
    select_thresholds, Baselines, SelectionParams, ThresholdSelection, ThresholdTriple, ANY_VOTE,
};

/// The three kinds of outlyingness, in the order used by every per-type array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutlierType {
    Shape,
    Amplitude,
    Magnitude,
}

impl OutlierType {
    pub const ALL: [OutlierType; 3] = [OutlierType::Shape, OutlierType::Amplitude, OutlierType::Magnitude];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            OutlierType::Shape => "shape",
            OutlierType::Amplitude => "amplitude",
            OutlierType::Magnitude => "magnitude",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionMethod {
    Marginal,
    Stringed,
    Projection,
}

/// Settings a report was produced with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub cutoff: CutoffSpec,
    pub scale: Option<Scale>,
    pub directions: Option<usize>,
    pub seed: Option<u64>,
}

/// Result of a multivariate detection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierReport {
    pub method: DetectionMethod,
    pub flags: FlagSet,
    /// Per-curve vote proportions `[shape, amplitude, magnitude]`
    /// (projection method only).
    pub proportions: Option<Vec<[f64; 3]>>,
    pub thresholds: Option<ThresholdTriple>,
    pub config: ReportConfig,
    /// Projections skipped because their reference curve was constant.
    pub degenerate_projections: usize,
}
