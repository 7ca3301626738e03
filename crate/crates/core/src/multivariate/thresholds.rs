//! Vote-proportion thresholds and their data-driven selection.
//!
//! Given null-model baselines `B_T` (per type) and `B_C` (any type), the
//! excess vote rates are
//!
//! ```text
//! Δ_T = mean_{i,l} O_{T,l}(i) − B_T        Δ_C = mean_{i,l} O_l(i) − B_C
//! ```
//!
//! and the threshold for type `T` is `γ_T − η_T · r` where `r = Δ_T / Δ_C`
//! is clamped to `[0, 1]`. When `r` is negative or undefined (`Δ_C ≤ 0`) the
//! threshold stays at `γ_T`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::projection::VoteMatrix;
use super::OutlierType;

/// Smallest admissible threshold: one vote out of any number of projections
/// clears it, no votes never do.
pub const ANY_VOTE: f64 = f64::EPSILON;

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} must lie in [0, 1], got {v}")))
    }
}

/// Expected false-positive vote rates under an outlier-free model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baselines {
    pub shape: f64,
    pub amplitude: f64,
    pub magnitude: f64,
    pub union: f64,
}

impl Baselines {
    pub fn validate(&self) -> Result<()> {
        check_unit("shape baseline", self.shape)?;
        check_unit("amplitude baseline", self.amplitude)?;
        check_unit("magnitude baseline", self.magnitude)?;
        check_unit("union baseline", self.union)
    }

    pub fn get(&self, t: OutlierType) -> f64 {
        match t {
            OutlierType::Shape => self.shape,
            OutlierType::Amplitude => self.amplitude,
            OutlierType::Magnitude => self.magnitude,
        }
    }
}

/// Upper bounds `γ_T` and ranges `η_T` of the selected thresholds, indexed
/// by [`OutlierType::index`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionParams {
    pub gamma: [f64; 3],
    pub eta: [f64; 3],
}

impl Default for SelectionParams {
    /// `τ_S ∈ [0.4, 0.7]`, `τ_A, τ_M ∈ [0.3, 0.7]`.
    fn default() -> Self {
        Self { gamma: [0.7, 0.7, 0.7], eta: [0.3, 0.4, 0.4] }
    }
}

impl SelectionParams {
    pub fn validate(&self) -> Result<()> {
        for t in OutlierType::ALL {
            let (g, e) = (self.gamma[t.index()], self.eta[t.index()]);
            check_unit("gamma", g)?;
            check_unit("eta", e)?;
            if g < e {
                return Err(Error::InvalidConfig(format!(
                    "{} gamma {g} is below eta {e}",
                    t.name()
                )));
            }
        }
        Ok(())
    }
}

/// Inputs that produced a selected [`ThresholdTriple`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSelection {
    pub params: SelectionParams,
    pub baselines: Baselines,
    /// Excess vote rate per type.
    pub delta_type: [f64; 3],
    /// Excess vote rate of any type.
    pub delta_union: f64,
}

impl ThresholdSelection {
    /// Threshold for `t` implied by the stored estimates.
    pub fn tau(&self, t: OutlierType) -> f64 {
        let i = t.index();
        let (gamma, eta) = (self.params.gamma[i], self.params.eta[i]);
        let tau = if self.delta_union > 0.0 {
            let ratio = self.delta_type[i] / self.delta_union;
            if ratio >= 0.0 {
                gamma - eta * ratio.min(1.0)
            } else {
                gamma
            }
        } else {
            gamma
        };
        tau.max(ANY_VOTE)
    }
}

/// Minimum vote proportions `(τ_S, τ_A, τ_M)` for declaring each type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTriple {
    pub shape: f64,
    pub amplitude: f64,
    pub magnitude: f64,
    pub selection: Option<ThresholdSelection>,
}

impl ThresholdTriple {
    /// Fixed thresholds in `[0, 1]`. Zero is raised to [`ANY_VOTE`].
    pub fn new(shape: f64, amplitude: f64, magnitude: f64) -> Result<Self> {
        check_unit("shape threshold", shape)?;
        check_unit("amplitude threshold", amplitude)?;
        check_unit("magnitude threshold", magnitude)?;
        Ok(Self {
            shape: shape.max(ANY_VOTE),
            amplitude: amplitude.max(ANY_VOTE),
            magnitude: magnitude.max(ANY_VOTE),
            selection: None,
        })
    }

    /// `(0.4, 0.3, 0.3)`, for data whose null model is unknown.
    pub fn recommended() -> Self {
        Self { shape: 0.4, amplitude: 0.3, magnitude: 0.3, selection: None }
    }

    /// Flags a type as soon as a single projection votes for it.
    pub fn any_vote() -> Self {
        Self { shape: ANY_VOTE, amplitude: ANY_VOTE, magnitude: ANY_VOTE, selection: None }
    }

    pub fn get(&self, t: OutlierType) -> f64 {
        match t {
            OutlierType::Shape => self.shape,
            OutlierType::Amplitude => self.amplitude,
            OutlierType::Magnitude => self.magnitude,
        }
    }
}

/// Chooses thresholds from the excess of observed votes over the baselines.
pub fn select_thresholds(
    votes: &VoteMatrix,
    baselines: &Baselines,
    params: &SelectionParams,
) -> Result<ThresholdTriple> {
    baselines.validate()?;
    params.validate()?;
    let rates = votes.mean_rates();
    let delta_type = [
        rates[0] - baselines.shape,
        rates[1] - baselines.amplitude,
        rates[2] - baselines.magnitude,
    ];
    let selection = ThresholdSelection {
        params: *params,
        baselines: *baselines,
        delta_type,
        delta_union: votes.mean_union_rate() - baselines.union,
    };
    Ok(ThresholdTriple {
        shape: selection.tau(OutlierType::Shape),
        amplitude: selection.tau(OutlierType::Amplitude),
        magnitude: selection.tau(OutlierType::Magnitude),
        selection: Some(selection),
    })
}
