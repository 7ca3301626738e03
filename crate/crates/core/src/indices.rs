//! Shape, amplitude and magnitude indices of curves against a reference.
//!
//! All indices use the grid form with uniform weights: integrals over the
//! domain become plain sums over the `k` grid points, and the centered
//! version of a curve is the curve minus its grid mean.
//!
//! For a candidate `y` and reference `μ`:
//!
//! * shape     `I_S = 1 − ρ(y, μ)` with `ρ` the Pearson correlation over grid points,
//! * amplitude `I_A = ⟨ỹ, μ̃⟩ / ‖μ̃‖² − 1`,
//! * magnitude `I_M = mean(y) − (I_A + 1) · mean(μ)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::FunctionalDataset;
use crate::error::{Error, Result};

/// A centered norm below this multiple of the raw norm is rounding noise.
const FLAT_RELATIVE: f64 = 64.0 * f64::EPSILON;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mean(y: &[f64]) -> f64 {
    y.iter().sum::<f64>() / y.len() as f64
}

fn is_flat(centered_sq: f64, raw_sq: f64) -> bool {
    centered_sq.sqrt() <= FLAT_RELATIVE * raw_sq.sqrt()
}

/// Removes the grid mean from a curve.
pub fn center_curve(y: &[f64]) -> Result<Vec<f64>> {
    if y.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: y.len() });
    }
    if let Some(position) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidCurve { position });
    }
    let m = mean(y);
    Ok(y.iter().map(|v| v - m).collect())
}

/// Pointwise location estimator used to build the reference curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    #[default]
    Median,
    Mean,
}

/// Central curve that candidates are compared against.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceCurve {
    values: Vec<f64>,
    centered: Vec<f64>,
    mean: f64,
    centered_sq_norm: f64,
    degenerate: bool,
}

impl ReferenceCurve {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let centered = center_curve(&values)?;
        let mean = mean(&values);
        let centered_sq_norm = dot(&centered, &centered);
        let degenerate = is_flat(centered_sq_norm, dot(&values, &values));
        Ok(Self { values, centered, mean, centered_sq_norm, degenerate })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn centered(&self) -> &[f64] {
        &self.centered
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when the reference is constant on the grid.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }
}

fn median_in_place(column: &mut [f64]) -> f64 {
    let n = column.len();
    let mid = n / 2;
    let (_, upper, _) = column.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower = column[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// Pointwise median (or mean) of the dataset's curves.
pub fn reference_from_sample(data: &FunctionalDataset, location: Location) -> Result<ReferenceCurve> {
    let n = data.n();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let k = data.k();
    let values = match location {
        Location::Mean => {
            let mut acc = vec![0.0; k];
            for row in data.rows() {
                acc.iter_mut().zip(row).for_each(|(a, v)| *a += v);
            }
            acc.into_iter().map(|s| s / n as f64).collect()
        }
        Location::Median => {
            let mut column = vec![0.0; n];
            (0..k)
                .map(|j| {
                    column.iter_mut().zip(data.rows()).for_each(|(c, r)| *c = r[j]);
                    median_in_place(&mut column)
                })
                .collect()
        }
    };
    ReferenceCurve::from_values(values)
}

/// Indices of one curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexTriple {
    pub shape: f64,
    pub amplitude: f64,
    pub magnitude: f64,
    /// Scale factor `amplitude + 1` applied to the reference mean in the
    /// magnitude index.
    pub beta: f64,
}

/// Indices of `y` against `reference`.
///
/// A constant `y` carries no shape information; its correlation is taken
/// as 0 (shape index 1) and amplitude/magnitude are computed as usual.
pub fn compute_indices(y: &[f64], reference: &ReferenceCurve) -> Result<IndexTriple> {
    if y.len() != reference.len() {
        return Err(Error::ShapeMismatch(format!(
            "curve has {} points, reference has {}",
            y.len(),
            reference.len()
        )));
    }
    if reference.is_degenerate() {
        return Err(Error::DegenerateReference);
    }
    let y_mean = {
        if let Some(position) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidCurve { position });
        }
        mean(y)
    };
    let (cross, y_sq) = y
        .iter()
        .zip(&reference.centered)
        .fold((0.0, 0.0), |(c, s), (v, mu)| {
            let yc = v - y_mean;
            (c + yc * mu, s + yc * yc)
        });

    let shape = if is_flat(y_sq, dot(y, y)) {
        1.0
    } else {
        let rho = cross / (y_sq.sqrt() * reference.centered_sq_norm.sqrt());
        1.0 - rho.clamp(-1.0, 1.0)
    };
    let amplitude = cross / reference.centered_sq_norm - 1.0;
    let beta = amplitude + 1.0;
    let magnitude = y_mean - beta * reference.mean;
    Ok(IndexTriple { shape, amplitude, magnitude, beta })
}

/// Which definition of the amplitude and magnitude indices to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexVariant {
    /// Signed amplitude and magnitude indices.
    #[default]
    Standard,
    /// Absolute values of the signed indices. `beta` keeps the signed
    /// scale factor.
    OriginalAbsolute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexTable {
    pub rows: Vec<IndexTriple>,
    pub variant: IndexVariant,
}

impl IndexTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn shape(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.shape).collect()
    }

    pub fn amplitude(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.amplitude).collect()
    }

    pub fn magnitude(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.magnitude).collect()
    }
}

/// Indices of every curve in `data`.
pub fn compute_index_table(
    data: &FunctionalDataset,
    reference: &ReferenceCurve,
    variant: IndexVariant,
) -> Result<IndexTable> {
    if data.k() != reference.len() {
        return Err(Error::ShapeMismatch(format!(
            "dataset has {} points, reference has {}",
            data.k(),
            reference.len()
        )));
    }
    if reference.is_degenerate() {
        return Err(Error::DegenerateReference);
    }
    let rows = data
        .rows()
        .map(|row| {
            compute_indices(row, reference).map(|mut t| {
                if variant == IndexVariant::OriginalAbsolute {
                    t.amplitude = t.amplitude.abs();
                    t.magnitude = t.magnitude.abs();
                }
                t
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IndexTable { rows, variant })
}

/// Parallel variant of [`compute_index_table`] for large `n`; identical output.
pub fn compute_index_table_par(
    data: &FunctionalDataset,
    reference: &ReferenceCurve,
    variant: IndexVariant,
) -> Result<IndexTable> {
    if data.k() != reference.len() {
        return Err(Error::ShapeMismatch("dataset and reference lengths differ".into()));
    }
    if reference.is_degenerate() {
        return Err(Error::DegenerateReference);
    }
    let rows = (0..data.n())
        .into_par_iter()
        .map(|i| {
            compute_indices(data.row(i), reference).map(|mut t| {
                if variant == IndexVariant::OriginalAbsolute {
                    t.amplitude = t.amplitude.abs();
                    t.magnitude = t.magnitude.abs();
                }
                t
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IndexTable { rows, variant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Grid;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn centering_examples() {
        assert_eq!(center_curve(&[0.0, 1.0, 2.0]).unwrap(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(center_curve(&[5.0, 5.0, 5.0]).unwrap(), vec![0.0, 0.0, 0.0]);
        assert_eq!(center_curve(&[0.0, 2.0, 4.0]).unwrap(), vec![-2.0, 0.0, 2.0]);
        assert_eq!(center_curve(&[1.0, f64::INFINITY]), Err(Error::InvalidCurve { position: 1 }));
    }

    #[test]
    fn reference_examples() {
        let g = Grid::unit(3).unwrap();
        let data = FunctionalDataset::from_rows(
            &[vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0], vec![10.0, 10.0, 10.0]],
            g.clone(),
        )
        .unwrap();
        let med = reference_from_sample(&data, Location::Median).unwrap();
        assert_eq!(med.values(), &[1.0, 1.0, 1.0]);
        assert!(med.is_degenerate());
        let mean = reference_from_sample(&data, Location::Mean).unwrap();
        for v in mean.values() {
            assert!(close(*v, 11.0 / 3.0));
        }

        let one = FunctionalDataset::from_rows(&[vec![1.0, 2.0, 3.0]], g).unwrap();
        assert_eq!(
            reference_from_sample(&one, Location::Median),
            Err(Error::InsufficientData { needed: 2, got: 1 })
        );
    }

    #[test]
    fn median_of_two_curves_is_midpoint() {
        let g = Grid::unit(4).unwrap();
        let a = vec![0.0, 3.0, -1.0, 8.0];
        let b = vec![2.0, 1.0, 5.0, 8.5];
        let data = FunctionalDataset::from_rows(&[a.clone(), b.clone()], g).unwrap();
        let r = reference_from_sample(&data, Location::Median).unwrap();
        // Brute force: sort each column and average the two middle entries.
        for j in 0..4 {
            let mut col = [a[j], b[j]];
            col.sort_by(f64::total_cmp);
            assert_eq!(r.values()[j], (col[0] + col[1]) / 2.0);
        }
    }

    #[test]
    fn median_matches_sorted_column() {
        let g = Grid::unit(2).unwrap();
        let rows: Vec<Vec<f64>> = [5.0, -1.0, 3.0, 9.0, 2.0, 2.5, 7.0]
            .iter()
            .map(|&v| vec![v, -v])
            .collect();
        let data = FunctionalDataset::from_rows(&rows, g).unwrap();
        let r = reference_from_sample(&data, Location::Median).unwrap();
        assert_eq!(r.values(), &[3.0, -3.0]);
        let even = data.permuted(&[0, 1, 2, 3, 4, 5]);
        let r = reference_from_sample(&even, Location::Median).unwrap();
        assert_eq!(r.values(), &[2.75, -2.75]);
    }

    #[test]
    fn candidate_equal_to_reference() {
        let r = ReferenceCurve::from_values(vec![0.3, 1.0, -2.0, 4.0]).unwrap();
        let t = compute_indices(r.values(), &r).unwrap();
        assert!(t.shape.abs() < 1e-15);
        assert!(t.amplitude.abs() < 1e-15);
        assert!(t.magnitude.abs() < 1e-15);
    }

    #[test]
    fn hand_computed_example() {
        let r = ReferenceCurve::from_values(vec![0.0, 1.0, 2.0]).unwrap();
        let t = compute_indices(&[0.0, 2.0, 4.0], &r).unwrap();
        assert!(close(t.shape, 0.0));
        assert!(close(t.amplitude, 1.0));
        assert!(close(t.magnitude, 0.0));
        assert_eq!(t.beta, t.amplitude + 1.0);
    }

    #[test]
    fn vertical_shift_moves_only_magnitude() {
        let r = ReferenceCurve::from_values(vec![0.0, 1.5, 0.5, 2.0]).unwrap();
        let y: Vec<f64> = r.values().iter().map(|v| v + 5.0).collect();
        let t = compute_indices(&y, &r).unwrap();
        assert!(close(t.shape, 0.0));
        assert!(close(t.amplitude, 0.0));
        assert!(close(t.magnitude, 5.0));
    }

    #[test]
    fn constant_candidate_has_neutral_shape() {
        let r = ReferenceCurve::from_values(vec![0.0, 1.0, 2.0]).unwrap();
        let t = compute_indices(&[4.0, 4.0, 4.0], &r).unwrap();
        assert_eq!(t.shape, 1.0);
        assert_eq!(t.amplitude, -1.0);
        assert_eq!(t.magnitude, 4.0);
    }

    #[test]
    fn constant_reference_is_an_error() {
        let r = ReferenceCurve::from_values(vec![2.0, 2.0, 2.0]).unwrap();
        assert!(r.is_degenerate());
        assert_eq!(compute_indices(&[1.0, 2.0, 3.0], &r), Err(Error::DegenerateReference));
        let data = FunctionalDataset::from_rows(&[vec![1.0, 2.0, 3.0]], Grid::unit(3).unwrap()).unwrap();
        assert_eq!(
            compute_index_table(&data, &r, IndexVariant::Standard),
            Err(Error::DegenerateReference)
        );
    }

    #[test]
    fn table_single_row_equal_to_reference() {
        let r = ReferenceCurve::from_values(vec![1.0, 3.0, 2.0]).unwrap();
        let data = FunctionalDataset::from_rows(&[r.values().to_vec()], Grid::unit(3).unwrap()).unwrap();
        let t = compute_index_table(&data, &r, IndexVariant::Standard).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.rows[0].shape.abs() < 1e-15 && t.rows[0].amplitude.abs() < 1e-15);
        assert!(t.rows[0].magnitude.abs() < 1e-15);
    }

    #[test]
    fn original_variant_takes_absolute_values() {
        let r = ReferenceCurve::from_values(vec![0.0, 1.0, 2.0]).unwrap();
        let y = [-5.0, -4.0, -3.0];
        let data = FunctionalDataset::from_rows(&[y.to_vec()], Grid::unit(3).unwrap()).unwrap();
        let std = compute_index_table(&data, &r, IndexVariant::Standard).unwrap();
        assert!(close(std.rows[0].magnitude, -5.0));
        let abs = compute_index_table(&data, &r, IndexVariant::OriginalAbsolute).unwrap();
        assert!(close(abs.rows[0].magnitude, 5.0));
        assert_eq!(abs.rows[0].beta, std.rows[0].beta);

        let flipped = [2.0, 1.0, 0.0];
        let data = FunctionalDataset::from_rows(&[flipped.to_vec()], Grid::unit(3).unwrap()).unwrap();
        let abs = compute_index_table(&data, &r, IndexVariant::OriginalAbsolute).unwrap();
        assert!(close(abs.rows[0].amplitude, 2.0));
    }

    #[test]
    fn table_matches_row_loop() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let k = 30;
        let rows: Vec<Vec<f64>> = (0..100)
            .map(|_| {
                let a: f64 = rng.random_range(0.5..2.0);
                let b: f64 = rng.random_range(-3.0..3.0);
                (0..k)
                    .map(|j| a * (j as f64 / 5.0).sin() + b + rng.random_range(-0.2..0.2))
                    .collect()
            })
            .collect();
        let data = FunctionalDataset::from_rows(&rows, Grid::unit(k).unwrap()).unwrap();
        let r = reference_from_sample(&data, Location::Median).unwrap();
        let table = compute_index_table(&data, &r, IndexVariant::Standard).unwrap();
        let par = compute_index_table_par(&data, &r, IndexVariant::Standard).unwrap();
        assert_eq!(table, par);
        for (row, t) in rows.iter().zip(&table.rows) {
            assert_eq!(*t, compute_indices(row, &r).unwrap());
            assert!((0.0..=2.0).contains(&t.shape));
            assert_eq!(t.beta, t.amplitude + 1.0);
        }
    }
}
