//! Boxplot whisker cutoffs that turn index tables into outlier flags.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indices::{IndexTable, IndexVariant};

/// Which whiskers of the boxplot flag a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffRule {
    TwoSided,
    UpperOnly,
}

/// Boxplot settings for the three index types.
///
/// Quartiles always use linear interpolation between order statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub whisker_factor: f64,
    pub shape_rule: CutoffRule,
    pub amplitude_rule: CutoffRule,
    pub magnitude_rule: CutoffRule,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self {
            whisker_factor: 1.5,
            shape_rule: CutoffRule::UpperOnly,
            amplitude_rule: CutoffRule::TwoSided,
            magnitude_rule: CutoffRule::TwoSided,
        }
    }
}

impl CutoffSpec {
    pub fn with_whisker_factor(whisker_factor: f64) -> Result<Self> {
        let spec = Self { whisker_factor, ..Self::default() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.whisker_factor.is_finite() && self.whisker_factor > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "whisker factor must be positive, got {}",
                self.whisker_factor
            )));
        }
        Ok(())
    }
}

/// Linear-interpolation quantile of sorted data at probability `p`.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if lo + 1 < sorted.len() {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[lo]
    }
}

/// First and third quartiles by linear interpolation.
pub fn quartiles(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok((quantile_sorted(&sorted, 0.25), quantile_sorted(&sorted, 0.75)))
}

/// Lower and upper fences `Q1 − f·IQR`, `Q3 + f·IQR`.
pub fn fences(values: &[f64], factor: f64) -> Result<(f64, f64)> {
    let (q1, q3) = quartiles(values)?;
    let iqr = q3 - q1;
    Ok((q1 - factor * iqr, q3 + factor * iqr))
}

/// Indices of values strictly beyond the fence(s) selected by `rule`.
pub fn boxplot_cutoff(values: &[f64], rule: CutoffRule, factor: f64) -> Result<BTreeSet<usize>> {
    if values.len() < 4 {
        return Err(Error::InsufficientData { needed: 4, got: values.len() });
    }
    let (lower, upper) = fences(values, factor)?;
    Ok(values
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v > upper || (rule == CutoffRule::TwoSided && v < lower))
        .map(|(i, _)| i)
        .collect())
}

/// Flagged rows per outlier type.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagSet {
    pub shape: BTreeSet<usize>,
    pub amplitude: BTreeSet<usize>,
    pub magnitude: BTreeSet<usize>,
    pub union: BTreeSet<usize>,
}

impl FlagSet {
    pub fn new(shape: BTreeSet<usize>, amplitude: BTreeSet<usize>, magnitude: BTreeSet<usize>) -> Self {
        let union = shape.iter().chain(&amplitude).chain(&magnitude).copied().collect();
        Self { shape, amplitude, magnitude, union }
    }

    /// Adds every flag of `other` to `self`.
    pub fn merge(&mut self, other: &FlagSet) {
        self.shape.extend(&other.shape);
        self.amplitude.extend(&other.amplitude);
        self.magnitude.extend(&other.magnitude);
        self.union.extend(&other.union);
    }

    pub fn is_empty(&self) -> bool {
        self.union.is_empty()
    }
}

/// Applies the boxplot rules of `spec` to each index column.
///
/// For the absolute-value variant every index is right-skewed, so all three
/// columns use the upper whisker only.
pub fn classify_outliers(table: &IndexTable, spec: &CutoffSpec) -> Result<FlagSet> {
    spec.validate()?;
    if table.is_empty() {
        return Err(Error::InsufficientData { needed: 4, got: 0 });
    }
    let (amp_rule, mag_rule) = match table.variant {
        IndexVariant::Standard => (spec.amplitude_rule, spec.magnitude_rule),
        IndexVariant::OriginalAbsolute => (CutoffRule::UpperOnly, CutoffRule::UpperOnly),
    };
    let f = spec.whisker_factor;
    Ok(FlagSet::new(
        boxplot_cutoff(&table.shape(), spec.shape_rule, f)?,
        boxplot_cutoff(&table.amplitude(), amp_rule, f)?,
        boxplot_cutoff(&table.magnitude(), mag_rule, f)?,
    ))
}
