//! Containers for curves sampled on a shared equidistant grid.

use crate::error::{Error, Result};

/// Maximum deviation of a grid step from the nominal spacing.
pub const GRID_TOLERANCE: f64 = 1e-12;

/// Equidistant evaluation points shared by every curve of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    spacing: f64,
}

impl Grid {
    /// `k` equidistant points covering `[0, 1]`.
    pub fn unit(k: usize) -> Result<Self> {
        Self::spanning(0.0, 1.0, k)
    }

    /// `k` equidistant points from `start` to `end` inclusive.
    pub fn spanning(start: f64, end: f64, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {k}")));
        }
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(Error::InvalidGrid(format!("bad interval [{start}, {end}]")));
        }
        let spacing = (end - start) / (k - 1) as f64;
        let points = (0..k)
            .map(|j| if j == k - 1 { end } else { start + j as f64 * spacing })
            .collect();
        Ok(Self { points, spacing })
    }

    /// Validates that `points` are strictly increasing and equidistant.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(j) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite point at {j}")));
        }
        let k = points.len();
        let spacing = (points[k - 1] - points[0]) / (k - 1) as f64;
        if spacing <= 0.0 {
            return Err(Error::InvalidGrid("points must be increasing".into()));
        }
        for j in 1..k {
            let step = points[j] - points[j - 1];
            if step <= 0.0 || (step - spacing).abs() > GRID_TOLERANCE {
                return Err(Error::InvalidGrid(format!(
                    "step {j} is {step}, expected {spacing}"
                )));
            }
        }
        Ok(Self { points, spacing })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }
}

fn check_finite(values: &[f64], row_len: usize) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(p) => Err(Error::InvalidCurve { position: p % row_len.max(1) }),
        None => Ok(()),
    }
}

/// `n` univariate curves evaluated on a common grid, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalDataset {
    values: Vec<f64>,
    n: usize,
    grid: Grid,
}

impl FunctionalDataset {
    pub fn from_rows(rows: &[Vec<f64>], grid: Grid) -> Result<Self> {
        let k = grid.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != k) {
            return Err(Error::ShapeMismatch(format!(
                "row {i} has {} values, grid has {k}",
                r.len()
            )));
        }
        let values: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_flat(values, rows.len(), grid)
    }

    /// Row-major `n × k` buffer.
    pub fn from_flat(values: Vec<f64>, n: usize, grid: Grid) -> Result<Self> {
        let k = grid.len();
        if values.len() != n * k {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {n} curves of {k} points",
                values.len()
            )));
        }
        check_finite(&values, k)?;
        Ok(Self { values, n, grid })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.grid.len()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.k();
        &self.values[i * k..(i + 1) * k]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.k())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Copy of column `j` (all curves at grid point `j`).
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Dataset with rows taken in the given order.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let values = order.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        Self { values, n: order.len(), grid: self.grid.clone() }
    }
}

/// `n` curves with `d` coordinate functions on a common grid.
///
/// Storage is `values[(i * k + j) * d + m]` for curve `i`, grid point `j`,
/// dimension `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateFunctionalDataset {
    values: Vec<f64>,
    n: usize,
    d: usize,
    grid: Grid,
    dim_names: Option<Vec<String>>,
}

impl MultivariateFunctionalDataset {
    pub fn from_flat(values: Vec<f64>, n: usize, d: usize, grid: Grid) -> Result<Self> {
        if d == 0 {
            return Err(Error::ShapeMismatch("at least one dimension is required".into()));
        }
        let k = grid.len();
        if values.len() != n * k * d {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {n} curves × {k} points × {d} dimensions",
                values.len()
            )));
        }
        check_finite(&values, k * d)?;
        Ok(Self { values, n, d, grid, dim_names: None })
    }

    /// Assembles a dataset from one univariate dataset per dimension.
    pub fn from_margins(margins: &[FunctionalDataset]) -> Result<Self> {
        let first = margins
            .first()
            .ok_or_else(|| Error::ShapeMismatch("at least one dimension is required".into()))?;
        let (n, k, d) = (first.n(), first.k(), margins.len());
        if margins.iter().any(|m| m.n() != n || m.grid() != first.grid()) {
            return Err(Error::ShapeMismatch("margins disagree on size or grid".into()));
        }
        let mut values = vec![0.0; n * k * d];
        for (m, margin) in margins.iter().enumerate() {
            for i in 0..n {
                for (j, &v) in margin.row(i).iter().enumerate() {
                    values[(i * k + j) * d + m] = v;
                }
            }
        }
        Ok(Self { values, n, d, grid: first.grid().clone(), dim_names: None })
    }

    pub fn with_dim_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.d {
            return Err(Error::ShapeMismatch(format!(
                "{} names for {} dimensions",
                names.len(),
                self.d
            )));
        }
        self.dim_names = Some(names);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.grid.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim_names(&self) -> Option<&[String]> {
        self.dim_names.as_deref()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, m: usize) -> f64 {
        self.values[(i * self.k() + j) * self.d + m]
    }

    /// The `d` values of curve `i` at grid point `j`.
    #[inline]
    pub fn point(&self, i: usize, j: usize) -> &[f64] {
        let start = (i * self.k() + j) * self.d;
        &self.values[start..start + self.d]
    }

    /// Univariate dataset of dimension `m`.
    pub fn margin(&self, m: usize) -> FunctionalDataset {
        let k = self.k();
        let values = (0..self.n)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j, m))
            .collect();
        FunctionalDataset { values, n: self.n, grid: self.grid.clone() }
    }

    /// Dataset whose dimension `p` is input dimension `order[p]`.
    pub fn reorder_dimensions(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.d];
        if order.len() != self.d || order.iter().any(|&m| m >= self.d || std::mem::replace(&mut seen[m], true)) {
            return Err(Error::InvalidConfig(format!(
                "{order:?} is not a permutation of 0..{}",
                self.d
            )));
        }
        let values = self
            .values
            .chunks_exact(self.d)
            .flat_map(|p| order.iter().map(move |&m| p[m]))
            .collect();
        let dim_names = self
            .dim_names
            .as_ref()
            .map(|names| order.iter().map(|&m| names[m].clone()).collect());
        Ok(Self { values, n: self.n, d: self.d, grid: self.grid.clone(), dim_names })
    }
}
