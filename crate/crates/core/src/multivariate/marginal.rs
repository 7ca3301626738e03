use crate::cutoffs::{classify_outliers, CutoffSpec, FlagSet};
use crate::data::MultivariateFunctionalDataset;
use crate::error::{Error, Result};
use crate::indices::{compute_index_table, reference_from_sample, IndexVariant, Location};

use super::{DetectionMethod, OutlierReport, ReportConfig};

/// Univariate detection on every margin; flags are unions across margins.
pub fn detect_marginal(data: &MultivariateFunctionalDataset, spec: &CutoffSpec) -> Result<OutlierReport> {
    if data.n() < 4 {
        return Err(Error::InsufficientData { needed: 4, got: data.n() });
    }
    let mut flags = FlagSet::default();
    for m in 0..data.d() {
        let margin = data.margin(m);
        let reference = reference_from_sample(&margin, Location::Median)?;
        let table = compute_index_table(&margin, &reference, IndexVariant::Standard)?;
        flags.merge(&classify_outliers(&table, spec)?);
    }
    Ok(OutlierReport {
        method: DetectionMethod::Marginal,
        flags,
        proportions: None,
        thresholds: None,
        config: ReportConfig { cutoff: *spec, scale: None, directions: None, seed: None },
        degenerate_projections: 0,
    })
}
