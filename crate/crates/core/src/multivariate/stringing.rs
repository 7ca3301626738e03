use serde::{Deserialize, Serialize};

use crate::cutoffs::{classify_outliers, CutoffSpec};
use crate::data::{FunctionalDataset, Grid, MultivariateFunctionalDataset};
use crate::error::{Error, Result};
use crate::indices::{compute_index_table, reference_from_sample, IndexVariant, Location};

use super::{DetectionMethod, OutlierReport, ReportConfig};

/// Per-dimension rescaling applied before stringing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// Map each dimension's pooled minimum to 0 and maximum to 1.
    #[default]
    MinMax,
    None,
}

/// Concatenates the `d` coordinate functions of each curve into one curve
/// of `k·d` points, dimension order as stored.
///
/// Min-max bounds are pooled over all curves and grid points of a dimension,
/// so relative vertical shifts between curves survive. A dimension with zero
/// range maps to the constant 0.
pub fn string_dimensions(data: &MultivariateFunctionalDataset, scale: Scale) -> Result<FunctionalDataset> {
    let (n, k, d) = (data.n(), data.k(), data.d());
    let affine: Vec<(f64, f64)> = (0..d)
        .map(|m| match scale {
            Scale::None => (0.0, 1.0),
            Scale::MinMax => {
                let (lo, hi) = data
                    .values()
                    .iter()
                    .skip(m)
                    .step_by(d)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
                let range = hi - lo;
                if range > 0.0 {
                    (lo, 1.0 / range)
                } else {
                    (lo, 0.0)
                }
            }
        })
        .collect();

    let mut values = Vec::with_capacity(n * k * d);
    for i in 0..n {
        for (m, &(shift, factor)) in affine.iter().enumerate() {
            values.extend((0..k).map(|j| (data.get(i, j, m) - shift) * factor));
        }
    }
    let grid = if d == 1 {
        data.grid().clone()
    } else {
        let start = data.grid().points()[0];
        let width = data.grid().points()[k - 1] - start;
        Grid::spanning(start, start + d as f64 * width, k * d)?
    };
    FunctionalDataset::from_flat(values, n, grid)
}

/// Univariate detection on the stringed curves.
pub fn detect_stringed(
    data: &MultivariateFunctionalDataset,
    scale: Scale,
    spec: &CutoffSpec,
) -> Result<OutlierReport> {
    if data.n() < 4 {
        return Err(Error::InsufficientData { needed: 4, got: data.n() });
    }
    let stringed = string_dimensions(data, scale)?;
    let reference = reference_from_sample(&stringed, Location::Median)?;
    let table = compute_index_table(&stringed, &reference, IndexVariant::Standard)?;
    Ok(OutlierReport {
        method: DetectionMethod::Stringed,
        flags: classify_outliers(&table, spec)?,
        proportions: None,
        thresholds: None,
        config: ReportConfig { cutoff: *spec, scale: Some(scale), directions: None, seed: None },
        degenerate_projections: 0,
    })
}
