use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cutoffs::{classify_outliers, CutoffSpec, FlagSet};
use crate::data::{FunctionalDataset, MultivariateFunctionalDataset};
use crate::error::{Error, Result};
use crate::indices::{compute_index_table, reference_from_sample, IndexVariant, Location};
use crate::rng::stream_rng;

use super::thresholds::{select_thresholds, Baselines, SelectionParams, ThresholdTriple};
use super::{DetectionMethod, OutlierReport, OutlierType, ReportConfig};

/// Pre-normalization norms below this are redrawn.
const MIN_RAW_NORM: f64 = 1e-8;

/// `L` unit vectors in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    vectors: Vec<f64>,
    d: usize,
    seed: u64,
}

impl DirectionSet {
    /// Wraps explicit directions; each row is normalized.
    pub fn from_vectors(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if d == 0 {
            return Err(Error::InvalidConfig("at least one non-empty direction is required".into()));
        }
        let mut vectors = Vec::with_capacity(rows.len() * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::InvalidDirection { expected: d, got: row.len() });
            }
            let norm = row.iter().map(|a| a * a).sum::<f64>().sqrt();
            if !(norm.is_finite() && norm >= MIN_RAW_NORM) {
                return Err(Error::InvalidConfig(format!("direction {row:?} cannot be normalized")));
            }
            vectors.extend(row.iter().map(|a| a / norm));
        }
        Ok(Self { vectors, d, seed: 0 })
    }

    pub fn len(&self) -> usize {
        self.vectors.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn direction(&self, l: usize) -> &[f64] {
        &self.vectors[l * self.d..(l + 1) * self.d]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.vectors.chunks_exact(self.d)
    }

    /// Directions with every vector negated.
    pub fn negated(&self) -> Self {
        Self { vectors: self.vectors.iter().map(|a| -a).collect(), d: self.d, seed: self.seed }
    }
}

/// `L` directions with components drawn from `U[-1, 1]` and normalized.
///
/// Direction `l` comes from its own stream of `seed`, so any prefix of a
/// larger set is reproduced exactly.
pub fn generate_directions(d: usize, count: usize, seed: u64) -> Result<DirectionSet> {
    if d == 0 || count == 0 {
        return Err(Error::InvalidConfig(format!(
            "need d ≥ 1 and at least one direction, got d = {d}, L = {count}"
        )));
    }
    let mut vectors = Vec::with_capacity(d * count);
    let mut raw = vec![0.0; d];
    for l in 0..count {
        let mut rng = stream_rng(seed, l as u64);
        let norm = loop {
            raw.iter_mut().for_each(|a| *a = rng.random_range(-1.0..=1.0));
            let norm = raw.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm >= MIN_RAW_NORM {
                break norm;
            }
        };
        vectors.extend(raw.iter().map(|a| a / norm));
    }
    Ok(DirectionSet { vectors, d, seed })
}

/// Univariate curves `Σ_m a_m Y^m_i(t)`.
pub fn project(data: &MultivariateFunctionalDataset, direction: &[f64]) -> Result<FunctionalDataset> {
    if direction.len() != data.d() {
        return Err(Error::InvalidDirection { expected: data.d(), got: direction.len() });
    }
    let values = data
        .values()
        .chunks_exact(data.d())
        .map(|p| p.iter().zip(direction).map(|(y, a)| y * a).sum())
        .collect();
    FunctionalDataset::from_flat(values, data.n(), data.grid().clone())
}

/// Per-projection outlier votes, `n × L × 3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteMatrix {
    n: usize,
    l: usize,
    votes: Vec<[bool; 3]>,
    degenerate: usize,
}

impl VoteMatrix {
    fn from_projection_flags(n: usize, per_projection: &[Option<FlagSet>]) -> Self {
        let l = per_projection.len();
        let mut votes = vec![[false; 3]; n * l];
        let mut degenerate = 0;
        for (p, flags) in per_projection.iter().enumerate() {
            let Some(flags) = flags else {
                degenerate += 1;
                continue;
            };
            for (t, set) in [&flags.shape, &flags.amplitude, &flags.magnitude].into_iter().enumerate() {
                for &i in set {
                    votes[i * l + p][t] = true;
                }
            }
        }
        Self { n, l, votes, degenerate }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn projections(&self) -> usize {
        self.l
    }

    /// Number of projections whose reference curve was constant.
    pub fn degenerate_projections(&self) -> usize {
        self.degenerate
    }

    pub fn vote(&self, i: usize, l: usize, t: OutlierType) -> bool {
        self.votes[i * self.l + l][t.index()]
    }

    /// Per-type vote counts of curve `i`.
    pub fn counts(&self, i: usize) -> [usize; 3] {
        let mut c = [0; 3];
        for v in &self.votes[i * self.l..(i + 1) * self.l] {
            for t in 0..3 {
                c[t] += usize::from(v[t]);
            }
        }
        c
    }

    /// Fraction of projections in which curve `i` was an outlier of each type.
    pub fn proportions(&self) -> Vec<[f64; 3]> {
        let l = self.l as f64;
        (0..self.n)
            .map(|i| {
                let c = self.counts(i);
                [c[0] as f64 / l, c[1] as f64 / l, c[2] as f64 / l]
            })
            .collect()
    }

    /// Mean over curves and projections of each type's votes.
    pub fn mean_rates(&self) -> [f64; 3] {
        let mut c = [0usize; 3];
        for v in &self.votes {
            for t in 0..3 {
                c[t] += usize::from(v[t]);
            }
        }
        let total = (self.n * self.l) as f64;
        [c[0] as f64 / total, c[1] as f64 / total, c[2] as f64 / total]
    }

    /// Mean over curves and projections of votes of any type.
    pub fn mean_union_rate(&self) -> f64 {
        let any = self.votes.iter().filter(|v| v.iter().any(|&b| b)).count();
        any as f64 / (self.n * self.l) as f64
    }
}

/// Runs univariate detection on every projection.
///
/// A projection whose median curve is constant casts no votes and is
/// counted in [`VoteMatrix::degenerate_projections`].
pub fn projection_votes(
    data: &MultivariateFunctionalDataset,
    directions: &DirectionSet,
    spec: &CutoffSpec,
) -> Result<VoteMatrix> {
    if data.n() < 4 {
        return Err(Error::InsufficientData { needed: 4, got: data.n() });
    }
    if directions.is_empty() {
        return Err(Error::InvalidConfig("at least one direction is required".into()));
    }
    if directions.dimension() != data.d() {
        return Err(Error::InvalidDirection { expected: data.d(), got: directions.dimension() });
    }
    let per_projection = (0..directions.len())
        .into_par_iter()
        .map(|l| {
            let projected = project(data, directions.direction(l))?;
            let reference = reference_from_sample(&projected, Location::Median)?;
            match compute_index_table(&projected, &reference, IndexVariant::Standard) {
                Ok(table) => classify_outliers(&table, spec).map(Some),
                Err(Error::DegenerateReference) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VoteMatrix::from_projection_flags(data.n(), &per_projection))
}

/// Curves whose vote proportion reaches the threshold of each type.
pub fn apply_thresholds(votes: &VoteMatrix, thresholds: &ThresholdTriple) -> FlagSet {
    let proportions = votes.proportions();
    let select = |t: OutlierType| -> BTreeSet<usize> {
        let tau = thresholds.get(t);
        proportions
            .iter()
            .enumerate()
            .filter(|(_, p)| p[t.index()] >= tau)
            .map(|(i, _)| i)
            .collect()
    };
    FlagSet::new(
        select(OutlierType::Shape),
        select(OutlierType::Amplitude),
        select(OutlierType::Magnitude),
    )
}

fn report(
    votes: &VoteMatrix,
    directions: &DirectionSet,
    thresholds: ThresholdTriple,
    spec: &CutoffSpec,
) -> OutlierReport {
    OutlierReport {
        method: DetectionMethod::Projection,
        flags: apply_thresholds(votes, &thresholds),
        proportions: Some(votes.proportions()),
        thresholds: Some(thresholds),
        config: ReportConfig {
            cutoff: *spec,
            scale: None,
            directions: Some(directions.len()),
            seed: Some(directions.seed()),
        },
        degenerate_projections: votes.degenerate_projections(),
    }
}

/// Random-projection detection with fixed thresholds.
pub fn detect_projection(
    data: &MultivariateFunctionalDataset,
    directions: &DirectionSet,
    thresholds: &ThresholdTriple,
    spec: &CutoffSpec,
) -> Result<OutlierReport> {
    let votes = projection_votes(data, directions, spec)?;
    Ok(report(&votes, directions, *thresholds, spec))
}

/// Random-projection detection with thresholds selected from baselines.
pub fn detect_projection_adaptive(
    data: &MultivariateFunctionalDataset,
    directions: &DirectionSet,
    baselines: &Baselines,
    params: &SelectionParams,
    spec: &CutoffSpec,
) -> Result<OutlierReport> {
    let votes = projection_votes(data, directions, spec)?;
    let thresholds = select_thresholds(&votes, baselines, params)?;
    Ok(report(&votes, directions, thresholds, spec))
}
