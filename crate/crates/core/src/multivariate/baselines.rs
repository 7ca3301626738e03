use rayon::prelude::*;

use crate::cutoffs::CutoffSpec;
use crate::error::{Error, Result};
use crate::rng::repetition_seeds;
use crate::simulation::{generate, SimulationSpec};

use super::projection::{generate_directions, projection_votes};
use super::thresholds::Baselines;

/// Mean per-type and any-type vote rates on outlier-free simulated data.
///
/// Repetition `r` uses the dataset and direction seeds derived from
/// `(seed, r)`; `null_spec.seed` is ignored.
pub fn estimate_baselines(
    null_spec: &SimulationSpec,
    reps: usize,
    directions: usize,
    seed: u64,
    cutoff: &CutoffSpec,
) -> Result<Baselines> {
    if reps < 1 {
        return Err(Error::InvalidConfig("baseline estimation needs at least one repetition".into()));
    }
    let per_rep = (0..reps)
        .into_par_iter()
        .map(|r| {
            let (data_seed, direction_seed) = repetition_seeds(seed, r as u64);
            let ds = generate(&null_spec.with_seed(data_seed))?;
            if !ds.outlier_indices.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "baseline model {} produced {} outliers",
                    null_spec.model,
                    ds.outlier_indices.len()
                )));
            }
            let dirs = generate_directions(ds.data.d(), directions, direction_seed)?;
            let votes = projection_votes(&ds.data, &dirs, cutoff)?;
            let [s, a, m] = votes.mean_rates();
            Ok([s, a, m, votes.mean_union_rate()])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = [0.0; 4];
    for row in &per_rep {
        for (t, v) in total.iter_mut().zip(row) {
            *t += v;
        }
    }
    let r = reps as f64;
    Ok(Baselines {
        shape: total[0] / r,
        amplitude: total[1] / r,
        magnitude: total[2] / r,
        union: total[3] / r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::ModelId;

    #[test]
    fn rejects_zero_reps_and_contaminated_models() {
        let spec = SimulationSpec::standard(ModelId::M0, 0);
        assert!(matches!(
            estimate_baselines(&spec, 0, 10, 1, &CutoffSpec::default()),
            Err(Error::InvalidConfig(_))
        ));
        let dirty = SimulationSpec::standard(ModelId::M1, 0);
        assert!(estimate_baselines(&dirty, 1, 5, 1, &CutoffSpec::default()).is_err());
        let clean = SimulationSpec { contamination_rate: 0.0, ..dirty };
        assert!(estimate_baselines(&clean, 1, 5, 1, &CutoffSpec::default()).is_ok());
    }

    #[test]
    fn baselines_are_deterministic_rates() {
        let spec = SimulationSpec { n: 40, k: 20, ..SimulationSpec::standard(ModelId::M0, 0) };
        let a = estimate_baselines(&spec, 3, 12, 5, &CutoffSpec::default()).unwrap();
        assert_eq!(a, estimate_baselines(&spec, 3, 12, 5, &CutoffSpec::default()).unwrap());
        assert!(a.validate().is_ok());
        assert!(a.union >= a.shape.max(a.amplitude).max(a.magnitude));
        assert!(a.union <= a.shape + a.amplitude + a.magnitude + 1e-12);
    }
}
