//! Trivariate simulation models built on a truncated Karhunen–Loève expansion
//!
//! ```text
//! Y_i(t) = μ(t) + u_i(t) + Σ_m ρ_{i,m} ψ_m(t) + ε(t)
//! ```
//!
//! with scores `ρ_{i,m} ~ N(0, ν_m)`, `ν_m = (M + 1 − m) / M`, eigenfunctions
//! obtained by cutting a Fourier basis on `[0, d]` into `d` unit pieces, and
//! white noise whose per-dimension standard deviation `σ_j ~ U[0.1, 0.3]` is
//! drawn once per dataset.
//!
//! Randomness is split over fixed streams of the dataset seed (scores,
//! noise, contamination, per-curve shifts, noise levels), so two models
//! generated with the same seed share their stochastic part.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{Grid, MultivariateFunctionalDataset};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

const SCORE_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;
const CONTAMINATION_STREAM: u64 = 2;
const SHIFT_STREAM: u64 = 3;
const SIGMA_STREAM: u64 = 4;

/// Number of coordinate functions of every model.
pub const MODEL_DIMENSION: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelId {
    M0,
    M1,
    M2,
    M3,
    M4,
    M5,
    M6,
    M1_2,
    M2_2,
    M2_3,
    M3_2,
    M3_3,
    M5_2,
}

impl ModelId {
    pub const ALL: [ModelId; 13] = [
        ModelId::M0,
        ModelId::M1,
        ModelId::M2,
        ModelId::M3,
        ModelId::M4,
        ModelId::M5,
        ModelId::M6,
        ModelId::M1_2,
        ModelId::M2_2,
        ModelId::M2_3,
        ModelId::M3_2,
        ModelId::M3_3,
        ModelId::M5_2,
    ];

    /// Model whose formulas this one uses.
    pub fn base(self) -> ModelId {
        match self {
            ModelId::M1_2 => ModelId::M1,
            ModelId::M2_2 | ModelId::M2_3 => ModelId::M2,
            ModelId::M3_2 | ModelId::M3_3 => ModelId::M3,
            ModelId::M5_2 => ModelId::M5,
            m => m,
        }
    }

    /// Dimensions in which outliers deviate from the main model.
    ///
    /// The partial-contamination variants are specified only by example
    /// plots; the masks follow those plots.
    pub fn contaminated_dimensions(self) -> [bool; 3] {
        match self {
            ModelId::M1_2 | ModelId::M2_2 | ModelId::M3_3 | ModelId::M5_2 => [true, false, false],
            ModelId::M2_3 | ModelId::M3_2 => [true, true, false],
            _ => [true; 3],
        }
    }

    pub fn has_outliers(self) -> bool {
        self != ModelId::M0
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelId::M0 => "M0",
            ModelId::M1 => "M1",
            ModelId::M2 => "M2",
            ModelId::M3 => "M3",
            ModelId::M4 => "M4",
            ModelId::M5 => "M5",
            ModelId::M6 => "M6",
            ModelId::M1_2 => "M1_2",
            ModelId::M2_2 => "M2_2",
            ModelId::M2_3 => "M2_3",
            ModelId::M3_2 => "M3_2",
            ModelId::M3_3 => "M3_3",
            ModelId::M5_2 => "M5_2",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    /// Accepts `M1`, `m1`, `1`, `M1.2`, `M1_2`, `1.2`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let t = t.strip_prefix(['M', 'm']).unwrap_or(t).replace('.', "_");
        ModelId::ALL
            .into_iter()
            .find(|m| m.name()[1..] == t)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown model '{s}'")))
    }
}

/// Parameters of one generated dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub model: ModelId,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub basis_count: usize,
    pub contamination_rate: f64,
    pub seed: u64,
}

impl SimulationSpec {
    /// `n = 100`, `k = 50`, `d = 3`, `M = 9`, `α = 0.1`.
    pub fn standard(model: ModelId, seed: u64) -> Self {
        Self { model, n: 100, k: 50, d: MODEL_DIMENSION, basis_count: 9, contamination_rate: 0.1, seed }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d != MODEL_DIMENSION {
            return Err(Error::InvalidConfig(format!("models are trivariate, got d = {}", self.d)));
        }
        if self.n == 0 || self.k < 2 || self.basis_count == 0 {
            return Err(Error::InvalidConfig(format!(
                "need n ≥ 1, k ≥ 2, M ≥ 1; got n = {}, k = {}, M = {}",
                self.n, self.k, self.basis_count
            )));
        }
        if !(0.0..1.0).contains(&self.contamination_rate) {
            return Err(Error::InvalidConfig(format!(
                "contamination rate must lie in [0, 1), got {}",
                self.contamination_rate
            )));
        }
        Ok(())
    }

    /// `⌊α n⌋`, or zero for the outlier-free model.
    pub fn outlier_count(&self) -> usize {
        if !self.model.has_outliers() {
            return 0;
        }
        // Guard against α·n landing just below an integer.
        (self.contamination_rate * self.n as f64 + 1e-9).floor() as usize
    }
}

/// Random draws that defined one contaminated curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierParams {
    pub index: usize,
    /// Signs `W_j` of the shift (M1, M2 families).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signs: Option<[f64; 3]>,
    /// Start `T_q` of the shifted window (M2 family).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_start: Option<f64>,
    /// Scale excesses `R_j` (M5 family).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scales: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub data: MultivariateFunctionalDataset,
    pub outlier_indices: BTreeSet<usize>,
    pub outlier_params: Vec<OutlierParams>,
    /// Noise levels `σ_j` of this dataset.
    pub noise_levels: [f64; 3],
}

/// Fourier basis function `m` (zero-based) on `[0, period]`.
fn fourier(m: usize, period: f64, x: f64) -> f64 {
    let norm = period.sqrt().recip();
    if m == 0 {
        return norm;
    }
    let r = m.div_ceil(2) as f64;
    let arg = 2.0 * PI * r * x / period;
    let w = std::f64::consts::SQRT_2 * norm;
    if m % 2 == 1 {
        w * arg.sin()
    } else {
        w * arg.cos()
    }
}

/// `M` multivariate eigenfunctions on `grid`, indexed `[m][j * d + c]` for
/// grid point `j` and dimension `c`.
///
/// Dimension `c` of function `m` is the Fourier function on `[0, d]`
/// restricted to `[c, c + 1]`, shifted back to `[0, 1]`.
pub fn multivariate_eigenfunctions(count: usize, d: usize, grid: &Grid) -> Vec<Vec<f64>> {
    let period = d as f64;
    (0..count)
        .map(|m| {
            grid.points()
                .iter()
                .flat_map(|&t| (0..d).map(move |c| fourier(m, period, t + c as f64)))
                .collect()
        })
        .collect()
}

/// Score variances `ν_m = (M + 1 − m) / M`, `m = 1..M`.
pub fn kl_eigenvalues(count: usize) -> Vec<f64> {
    (1..=count).map(|m| (count + 1 - m) as f64 / count as f64).collect()
}

/// Draws `n` score vectors, `ρ_{i,m} ~ N(0, ν_m)`, row-major.
pub fn sample_scores<R: Rng>(rng: &mut R, n: usize, eigenvalues: &[f64]) -> Vec<f64> {
    let sds: Vec<f64> = eigenvalues.iter().map(|v| v.sqrt()).collect();
    let mut out = Vec::with_capacity(n * sds.len());
    for _ in 0..n {
        for &sd in &sds {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            out.push(sd * z);
        }
    }
    out
}

fn mean_linear(t: f64) -> [f64; 3] {
    [4.0 * t, 30.0 * t * (1.0 - t).powf(1.5), 5.0 * (t - 1.0).powi(2)]
}

fn mean_periodic(t: f64) -> [f64; 3] {
    [5.0 * (2.0 * PI * t).sin(), 5.0 * (2.0 * PI * t).cos(), 5.0 * (t - 1.0).powi(2)]
}

fn mean_phase_shifted(t: f64) -> [f64; 3] {
    [
        5.0 * (2.0 * PI * (t - 0.3)).sin(),
        5.0 * (2.0 * PI * (t - 0.2)).cos(),
        5.0 * (0.1 - t).powi(2),
    ]
}

fn drift_main(t: f64) -> [f64; 3] {
    [8.0 * t * (PI * t).sin(), t * (PI * t).cos(), 6.0 * (2.0 * PI * t).sin() - 3.0]
}

fn drift_outlying(t: f64) -> [f64; 3] {
    [10.0 * t * (PI * t).sin(), 11.0 * t * (PI * t).cos(), 10.0 * (2.0 * PI * t).sin() - 6.0]
}

fn oscillation(t: f64) -> [f64; 3] {
    [2.0 * (4.0 * PI * t).sin(), 2.0 * (4.0 * PI * t).cos(), 2.0 * (8.0 * PI * t).cos()]
}

/// Non-random part of a curve at `t`: mean plus any deterministic shift.
///
/// Random shifts (M1, M2, M4 main curves, M5) are not included.
pub fn deterministic_part(model: ModelId, outlier: bool, t: f64) -> [f64; 3] {
    let mask = model.contaminated_dimensions();
    let pick = |main: [f64; 3], alt: [f64; 3]| -> [f64; 3] {
        std::array::from_fn(|c| if outlier && mask[c] { alt[c] } else { main[c] })
    };
    match model.base() {
        ModelId::M0 | ModelId::M1 => mean_linear(t),
        ModelId::M2 | ModelId::M5 => mean_periodic(t),
        ModelId::M3 => pick(mean_periodic(t), mean_phase_shifted(t)),
        ModelId::M4 => {
            let mu = mean_periodic(t);
            let osc = oscillation(t);
            std::array::from_fn(|c| if outlier && mask[c] { mu[c] + osc[c] } else { mu[c] })
        }
        ModelId::M6 => {
            let mu = mean_periodic(t);
            let u = pick(drift_main(t), drift_outlying(t));
            std::array::from_fn(|c| mu[c] + u[c])
        }
        _ => unreachable!("base() returns a base model"),
    }
}

/// Generates one labeled dataset.
pub fn generate(spec: &SimulationSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let SimulationSpec { model, n, k, d, basis_count, seed, .. } = *spec;
    let grid = Grid::unit(k)?;
    let base = model.base();
    let mask = model.contaminated_dimensions();

    let psi = multivariate_eigenfunctions(basis_count, d, &grid);
    let scores = sample_scores(&mut stream_rng(seed, SCORE_STREAM), n, &kl_eigenvalues(basis_count));

    let mut sigma_rng = stream_rng(seed, SIGMA_STREAM);
    let noise_levels: [f64; 3] = std::array::from_fn(|_| sigma_rng.random_range(0.1..=0.3));
    // σ_j is the noise standard deviation.
    let noise: [Normal<f64>; 3] = std::array::from_fn(|c| Normal::new(0.0, noise_levels[c]).expect("finite sd"));

    // Positions, then per-outlier parameters in ascending position order.
    let mut contamination = stream_rng(seed, CONTAMINATION_STREAM);
    let mut positions: Vec<usize> = sample(&mut contamination, n, spec.outlier_count()).into_vec();
    positions.sort_unstable();
    let sign = |rng: &mut rand_chacha::ChaCha8Rng| if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let exp2 = Exp::new(2.0).expect("positive rate");
    let outlier_params: Vec<OutlierParams> = positions
        .iter()
        .map(|&index| {
            let mut p = OutlierParams { index, signs: None, window_start: None, scales: None };
            match base {
                ModelId::M1 => p.signs = Some(std::array::from_fn(|_| sign(&mut contamination))),
                ModelId::M2 => {
                    p.signs = Some(std::array::from_fn(|_| sign(&mut contamination)));
                    p.window_start = Some(contamination.random_range(0.0..=0.9));
                }
                ModelId::M5 => p.scales = Some(std::array::from_fn(|_| exp2.sample(&mut contamination))),
                _ => {}
            }
            p
        })
        .collect();
    let outlier_of: Vec<Option<&OutlierParams>> = {
        let mut v = vec![None; n];
        for p in &outlier_params {
            v[p.index] = Some(p);
        }
        v
    };

    // Level shifts ϱ_j of the M4 main curves, drawn for every curve.
    let mut shift_rng = stream_rng(seed, SHIFT_STREAM);
    let levels: Vec<[f64; 3]> = (0..n)
        .map(|_| std::array::from_fn(|_| shift_rng.random_range(-2.1..=2.1)))
        .collect();

    let mut noise_rng = stream_rng(seed, NOISE_STREAM);
    let mut values = Vec::with_capacity(n * k * d);
    for i in 0..n {
        let params = outlier_of[i];
        let is_outlier = params.is_some();
        let rho = &scores[i * basis_count..(i + 1) * basis_count];
        for (j, &t) in grid.points().iter().enumerate() {
            let fixed = deterministic_part(model, is_outlier, t);
            for c in 0..d {
                let kl: f64 = rho.iter().zip(&psi).map(|(r, f)| r * f[j * d + c]).sum();
                let mut y = fixed[c] + kl + noise[c].sample(&mut noise_rng);
                y += match (base, params) {
                    (ModelId::M1, Some(p)) if mask[c] => 8.0 * p.signs.unwrap()[c],
                    (ModelId::M2, Some(p)) if mask[c] => {
                        let start = p.window_start.unwrap();
                        if t >= start && t <= start + 0.1 {
                            8.0 * p.signs.unwrap()[c]
                        } else {
                            0.0
                        }
                    }
                    (ModelId::M4, None) => levels[i][c],
                    (ModelId::M5, Some(p)) if mask[c] => {
                        let mu = mean_periodic(t)[c];
                        let offset = if c == 2 { 6.0 } else { 0.0 };
                        (2.0 + p.scales.unwrap()[c]) * mu - offset
                    }
                    _ => 0.0,
                };
                values.push(y);
            }
        }
    }

    let data = MultivariateFunctionalDataset::from_flat(values, n, d, grid)?;
    Ok(LabeledDataset {
        data,
        outlier_indices: positions.into_iter().collect(),
        outlier_params,
        noise_levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Largest deviation from the identity of the Gram matrix under the
    /// summed inner product, with quadrature weights `weight(j, k)`.
    fn gram_deviation(k: usize, count: usize, weight: impl Fn(usize, usize) -> f64) -> f64 {
        let grid = Grid::unit(k).unwrap();
        let psi = multivariate_eigenfunctions(count, 3, &grid);
        let mut worst: f64 = 0.0;
        for a in 0..count {
            for b in 0..count {
                let mut s = 0.0;
                for j in 0..k {
                    for c in 0..3 {
                        s += weight(j, k) * psi[a][j * 3 + c] * psi[b][j * 3 + c];
                    }
                }
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }

    fn trapezoid(j: usize, k: usize) -> f64 {
        let h = 1.0 / (k - 1) as f64;
        if j == 0 || j == k - 1 {
            0.5 * h
        } else {
            h
        }
    }

    fn uniform(_: usize, k: usize) -> f64 {
        1.0 / k as f64
    }

    #[test]
    fn eigenfunctions_are_orthonormal() {
        // The pieces tile one period, where the trapezoid rule is exact for
        // low-order trigonometric polynomials.
        let e = gram_deviation(50, 9, trapezoid);
        assert!(e < 2e-2, "Gram deviation {e}");
        assert!(e < 1e-12);
    }

    #[test]
    fn cruder_quadrature_converges_with_k() {
        let e50 = gram_deviation(50, 9, uniform);
        let e100 = gram_deviation(100, 9, uniform);
        let e200 = gram_deviation(200, 9, uniform);
        assert!(e200 < e100 && e100 < e50, "{e50} {e100} {e200}");
    }

    #[test]
    fn constant_eigenfunction_splits_evenly() {
        let psi = multivariate_eigenfunctions(1, 3, &Grid::unit(5).unwrap());
        for v in &psi[0] {
            assert!((v - 3f64.sqrt().recip()).abs() < 1e-15);
        }
    }

    #[test]
    fn fourier_ordering_is_sine_first() {
        let x = 0.4;
        assert!((fourier(1, 3.0, x) - (2.0 / 3.0f64).sqrt() * (2.0 * PI * x / 3.0).sin()).abs() < 1e-15);
        assert!((fourier(2, 3.0, x) - (2.0 / 3.0f64).sqrt() * (2.0 * PI * x / 3.0).cos()).abs() < 1e-15);
        assert!((fourier(3, 3.0, x) - (2.0 / 3.0f64).sqrt() * (4.0 * PI * x / 3.0).sin()).abs() < 1e-15);
    }

    #[test]
    fn score_variances_match_eigenvalues() {
        let nu = kl_eigenvalues(9);
        assert_eq!(nu[0], 1.0);
        assert!((nu[8] - 1.0 / 9.0).abs() < 1e-15);
        let draws = 10_000;
        let s = sample_scores(&mut stream_rng(11, 0), draws, &nu);
        for m in 0..9 {
            let var = (0..draws).map(|i| s[i * 9 + m].powi(2)).sum::<f64>() / draws as f64;
            assert!((var / nu[m] - 1.0).abs() < 0.05, "m = {m}: {var} vs {}", nu[m]);
        }
    }

    #[test]
    fn model_names_parse() {
        for m in ModelId::ALL {
            assert_eq!(m.name().parse::<ModelId>().unwrap(), m);
        }
        assert_eq!("m1.2".parse::<ModelId>().unwrap(), ModelId::M1_2);
        assert_eq!("3".parse::<ModelId>().unwrap(), ModelId::M3);
        assert!(matches!("M7".parse::<ModelId>(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = SimulationSpec::standard(ModelId::M5, 21);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        assert_ne!(generate(&spec).unwrap().data, generate(&spec.with_seed(22)).unwrap().data);
    }

    #[test]
    fn contamination_count_is_floor() {
        for (alpha, want) in [(0.1, 10), (0.15, 15), (0.29, 29), (0.0, 0), (0.005, 0)] {
            let spec = SimulationSpec { contamination_rate: alpha, ..SimulationSpec::standard(ModelId::M1, 1) };
            let ds = generate(&spec).unwrap();
            assert_eq!(ds.outlier_indices.len(), want, "α = {alpha}");
            assert_eq!(ds.outlier_params.len(), want);
        }
    }

    #[test]
    fn null_model_has_no_outliers() {
        let ds = generate(&SimulationSpec::standard(ModelId::M0, 4)).unwrap();
        assert!(ds.outlier_indices.is_empty());
        assert!(ds.noise_levels.iter().all(|s| (0.1..=0.3).contains(s)));
    }

    #[test]
    fn persistent_shift_is_eight() {
        let clean = generate(&SimulationSpec::standard(ModelId::M0, 9)).unwrap();
        let shifted = generate(&SimulationSpec::standard(ModelId::M1, 9)).unwrap();
        let k = 50;
        for i in 0..100 {
            let param = shifted.outlier_params.iter().find(|p| p.index == i);
            for j in 0..k {
                for c in 0..3 {
                    let diff = shifted.data.get(i, j, c) - clean.data.get(i, j, c);
                    let want = param.map_or(0.0, |p| 8.0 * p.signs.unwrap()[c]);
                    assert!((diff - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn window_shift_vanishes_outside_window() {
        let spec = SimulationSpec::standard(ModelId::M2, 17);
        let shifted = generate(&spec).unwrap();
        // Same seed with no contamination: identical stochastic part.
        let clean = generate(&SimulationSpec { contamination_rate: 0.0, ..spec }).unwrap();
        let grid = Grid::unit(50).unwrap();
        for p in &shifted.outlier_params {
            let start = p.window_start.unwrap();
            for (j, &t) in grid.points().iter().enumerate() {
                for c in 0..3 {
                    let diff = shifted.data.get(p.index, j, c) - clean.data.get(p.index, j, c);
                    if t < start || t > start + 0.1 {
                        assert_eq!(diff, 0.0);
                    } else {
                        assert!((diff.abs() - 8.0).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_variants_leave_other_dimensions_alone() {
        let spec = SimulationSpec::standard(ModelId::M1_2, 3);
        let shifted = generate(&spec).unwrap();
        let clean = generate(&SimulationSpec { model: ModelId::M0, ..spec }).unwrap();
        for &i in &shifted.outlier_indices {
            assert!((shifted.data.get(i, 5, 0) - clean.data.get(i, 5, 0)).abs() > 7.9);
            assert_eq!(shifted.data.get(i, 5, 1), clean.data.get(i, 5, 1));
            assert_eq!(shifted.data.get(i, 5, 2), clean.data.get(i, 5, 2));
        }
    }

    #[test]
    fn null_mean_at_right_end() {
        let spec = SimulationSpec { n: 2000, ..SimulationSpec::standard(ModelId::M0, 8) };
        let ds = generate(&spec).unwrap();
        let want = [4.0, 0.0, 0.0];
        for c in 0..3 {
            let mean = (0..2000).map(|i| ds.data.get(i, 49, c)).sum::<f64>() / 2000.0;
            assert!((mean - want[c]).abs() < 0.15, "dim {c}: {mean}");
        }
    }

    #[test]
    fn closed_form_parts() {
        let t = 0.35;
        let mu = deterministic_part(ModelId::M0, false, t);
        assert!((mu[1] - 30.0 * t * (1.0 - t).powf(1.5)).abs() < 1e-12);
        let m3 = deterministic_part(ModelId::M3, true, t);
        assert!((m3[2] - 5.0 * (0.1 - t).powi(2)).abs() < 1e-12);
        let m33 = deterministic_part(ModelId::M3_3, true, t);
        assert_eq!(m33[1], mean_periodic(t)[1]);
        let m6 = deterministic_part(ModelId::M6, false, t);
        assert!((m6[0] - (5.0 * (2.0 * PI * t).sin() + 8.0 * t * (PI * t).sin())).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_specs() {
        let base = SimulationSpec::standard(ModelId::M1, 0);
        assert!(generate(&SimulationSpec { d: 2, ..base }).is_err());
        assert!(generate(&SimulationSpec { contamination_rate: 1.0, ..base }).is_err());
        assert!(generate(&SimulationSpec { k: 1, ..base }).is_err());
    }
}
