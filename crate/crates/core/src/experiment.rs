//! Storage sweeps and training-density sweeps.
//!
//! A storage sweep places contents greedily at every storage budget of a grid
//! (a percentage of the whole catalog's size, granted to each station) and
//! simulates the trace, once with the ground-truth popularity matrix and once
//! with the matrix estimated by collaborative filtering. A density sweep
//! measures how far the CF satisfaction curve lies from the ground-truth
//! curve as the fraction of observed ratings grows.
//!
//! Sweep points run in parallel on the current rayon pool; results are always
//! returned in grid order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::Trace;
use crate::io_util::fmt_f64;
use crate::placement::{greedy_place, GreedyMode, PlacementError, StorageBudget};
use crate::popularity::{
    factorize, ground_truth_matrix, predict, sample_ratings, FactorConfig, PopularityError, PopularityMatrix,
};
use crate::seed::{self, SeedSet, Stream};
use crate::simnet::{assign_requests, simulate, Assignment, NetworkConfig, SimError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid sweep: {0}")]
    Spec(String),
    #[error("popularity: {0}")]
    Popularity(#[from] PopularityError),
    #[error("placement: {0}")]
    Placement(#[from] PlacementError),
    #[error("simnet: {0}")]
    Sim(#[from] SimError),
}

type Result<T> = std::result::Result<T, ExperimentError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    GroundTruth,
    CollaborativeFiltering,
}

/// `0, 5, 10, …, 100`.
pub fn default_storage_grid() -> Vec<f64> {
    (0..=20).map(|i| (i * 5) as f64).collect()
}

/// Training densities, in percent, of the default density sweep.
pub fn default_density_grid() -> Vec<f64> {
    vec![5.0, 10.0, 20.0, 40.0, 60.0, 80.0, 100.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Storage budgets in percent of the total catalog size, increasing.
    pub storage_percents: Vec<f64>,
    /// Fraction of the nonzero ground-truth ratings CF trains on.
    pub cf_density: f64,
    pub factor: FactorConfig,
    pub greedy_mode: GreedyMode,
    pub seeds: SeedSet,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            storage_percents: default_storage_grid(),
            cf_density: 0.10,
            factor: FactorConfig::default(),
            greedy_mode: GreedyMode::default(),
            seeds: SeedSet::from_master(0),
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.storage_percents.is_empty() {
            return Err(ExperimentError::Spec("storage grid is empty".into()));
        }
        if let Some(p) = self.storage_percents.iter().find(|p| !(0.0..=100.0).contains(*p)) {
            return Err(ExperimentError::Spec(format!("storage percent {p} outside [0, 100]")));
        }
        if self.storage_percents.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ExperimentError::Spec("storage percents must be strictly increasing".into()));
        }
        if !(self.cf_density > 0.0 && self.cf_density <= 1.0) {
            return Err(ExperimentError::Spec(format!(
                "cf density must lie in (0, 1], got {}",
                self.cf_density
            )));
        }
        self.factor.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub storage_pct: f64,
    pub eta: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub ground: Vec<SweepPoint>,
    pub cf: Vec<SweepPoint>,
    pub spec: SweepSpec,
    pub config: NetworkConfig,
}

impl SweepResult {
    pub fn curve(&self, estimator: Estimator) -> &[SweepPoint] {
        match estimator {
            Estimator::GroundTruth => &self.ground,
            Estimator::CollaborativeFiltering => &self.cf,
        }
    }

    pub fn etas(&self, estimator: Estimator) -> Vec<f64> {
        self.curve(estimator).iter().map(|p| p.eta).collect()
    }

    pub fn rhos(&self, estimator: Estimator) -> Vec<f64> {
        self.curve(estimator).iter().map(|p| p.rho).collect()
    }

    /// `storage_pct,eta_ground,eta_cf`
    pub fn satisfaction_csv(&self) -> String {
        self.joined_csv("storage_pct,eta_ground,eta_cf", |p| p.eta)
    }

    /// `storage_pct,rho_ground,rho_cf`
    pub fn backhaul_csv(&self) -> String {
        self.joined_csv("storage_pct,rho_ground,rho_cf", |p| p.rho)
    }

    fn joined_csv(&self, header: &str, metric: impl Fn(&SweepPoint) -> f64) -> String {
        let mut out = format!("{header}\n");
        for (g, c) in self.ground.iter().zip(&self.cf) {
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(g.storage_pct),
                fmt_f64(metric(g)),
                fmt_f64(metric(c))
            ));
        }
        out
    }
}

/// CF estimate of `ground`: sample `density` of its nonzero entries, rescale
/// them so the largest observed rating is 1, factorize, predict.
pub fn cf_estimate(
    ground: &PopularityMatrix,
    density: f64,
    factor: &FactorConfig,
    sampling_seed: u64,
    factor_seed: u64,
) -> Result<PopularityMatrix> {
    let sample = sample_ratings(ground, density, sampling_seed)?;
    let peak = sample.max_value();
    let sample = if peak > 0.0 { sample.scaled(1.0 / peak) } else { sample };
    let model = factorize(&sample, factor, factor_seed)?;
    Ok(predict(&model))
}

/// Satisfaction and backhaul load at every storage percent for one popularity
/// estimate.
pub fn estimator_curve(
    trace: &Trace,
    assignment: &Assignment,
    popularity: &PopularityMatrix,
    config: &NetworkConfig,
    storage_percents: &[f64],
    mode: GreedyMode,
) -> Result<Vec<SweepPoint>> {
    let m = config.num_stations();
    storage_percents
        .par_iter()
        .map(|&pct| {
            let budget = StorageBudget::from_percent(pct, trace.catalog(), m)?;
            let placement = greedy_place(popularity, trace.catalog(), &budget, mode)?;
            let sim = simulate(trace, assignment, &placement, config)?;
            Ok(SweepPoint {
                storage_pct: pct,
                eta: sim.satisfaction_ratio,
                rho: sim.backhaul_load,
            })
        })
        .collect()
}

pub fn storage_sweep(trace: &Trace, config: &NetworkConfig, spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    config.validate()?;
    let m = config.num_stations();
    let assignment = assign_requests(trace, m, spec.seeds.assignment)?;
    let ground = ground_truth_matrix(trace, &assignment, m)?;
    let cf = cf_estimate(
        &ground,
        spec.cf_density,
        &spec.factor,
        spec.seeds.sampling,
        spec.seeds.factor_init,
    )?;
    let (ground_curve, cf_curve) = rayon::join(
        || estimator_curve(trace, &assignment, &ground, config, &spec.storage_percents, spec.greedy_mode),
        || estimator_curve(trace, &assignment, &cf, config, &spec.storage_percents, spec.greedy_mode),
    );
    Ok(SweepResult {
        ground: ground_curve?,
        cf: cf_curve?,
        spec: spec.clone(),
        config: config.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub density_pct: f64,
    /// Median over replicates.
    pub rmse: f64,
    pub per_replicate: Vec<f64>,
}

/// `train_density_pct,rmse`
pub fn density_csv(points: &[DensityPoint]) -> String {
    let mut out = String::from("train_density_pct,rmse\n");
    for p in points {
        out.push_str(&format!("{},{}\n", fmt_f64(p.density_pct), fmt_f64(p.rmse)));
    }
    out
}

/// For every training density (percent, in `(0, 100]`), the median over
/// `replicates` of `curve_rmse(η_GT, η_CF)` across the storage grid of
/// `spec`. Replicate `r` draws its assignment, rating sample and factor
/// initialization from seeds derived from `(spec.seeds.master, r)`.
pub fn density_sweep(
    trace: &Trace,
    config: &NetworkConfig,
    densities_pct: &[f64],
    spec: &SweepSpec,
    replicates: usize,
) -> Result<Vec<DensityPoint>> {
    spec.validate()?;
    config.validate()?;
    if replicates == 0 {
        return Err(ExperimentError::Spec("need at least one replicate".into()));
    }
    if let Some(d) = densities_pct.iter().find(|d| !(**d > 0.0 && **d <= 100.0)) {
        return Err(ExperimentError::Spec(format!("training density {d}% outside (0, 100]")));
    }
    let m = config.num_stations();
    let master = spec.seeds.master;

    let grounds: Vec<(Assignment, PopularityMatrix, Vec<f64>)> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let assignment = assign_requests(trace, m, seed::derive_indexed(master, Stream::Assignment, r))?;
            let ground = ground_truth_matrix(trace, &assignment, m)?;
            let curve = estimator_curve(trace, &assignment, &ground, config, &spec.storage_percents, spec.greedy_mode)?;
            Ok((assignment, ground, curve.iter().map(|p| p.eta).collect()))
        })
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize)> = (0..densities_pct.len())
        .flat_map(|d| (0..replicates).map(move |r| (d, r)))
        .collect();
    let errors: Vec<f64> = jobs
        .par_iter()
        .map(|&(d, r)| {
            let (assignment, ground, ground_eta) = &grounds[r];
            let r = r as u64;
            let cf = cf_estimate(
                ground,
                densities_pct[d] / 100.0,
                &spec.factor,
                seed::derive_indexed(master, Stream::RatingSampling, r),
                seed::derive_indexed(master, Stream::FactorInit, r),
            )?;
            let curve = estimator_curve(trace, assignment, &cf, config, &spec.storage_percents, spec.greedy_mode)?;
            let cf_eta: Vec<f64> = curve.iter().map(|p| p.eta).collect();
            curve_rmse(ground_eta, &cf_eta)
        })
        .collect::<Result<_>>()?;

    Ok(densities_pct
        .iter()
        .zip(errors.chunks(replicates))
        .map(|(&density_pct, per)| DensityPoint {
            density_pct,
            rmse: median(per),
            per_replicate: per.to_vec(),
        })
        .collect())
}

/// `sqrt(mean((a_i − b_i)²))`.
pub fn curve_rmse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(ExperimentError::Spec(format!("curve lengths differ: {} vs {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(ExperimentError::Spec("curves are empty".into()));
    }
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((sq / a.len() as f64).sqrt())
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => v[n / 2],
        _ => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::popularity::{synth_trace, zipf_pmf, SizeLaw};

    #[test]
    fn rmse_examples() {
        assert_eq!(curve_rmse(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(curve_rmse(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert!((curve_rmse(&[1.0, 0.0], &[0.0, 0.0]).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(curve_rmse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(curve_rmse(&[], &[]).is_err());
    }

    #[test]
    fn median_odd_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn spec_validation() {
        assert!(SweepSpec::default().validate().is_ok());
        let mut s = SweepSpec::default();
        s.storage_percents = vec![10.0, 5.0];
        assert!(s.validate().is_err());
        s.storage_percents = vec![0.0, 120.0];
        assert!(s.validate().is_err());
        s.storage_percents = vec![0.0, 50.0];
        s.cf_density = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn small_sweep_has_exact_limits() {
        let model = zipf_pmf(1.0, 60).unwrap();
        let trace = synth_trace(&model, 600, &SizeLaw::desk_default(), 4e6, 3600.0, 3).unwrap();
        let config = NetworkConfig::desk_default(4);
        let spec = SweepSpec {
            storage_percents: vec![0.0, 50.0, 100.0],
            factor: FactorConfig {
                epochs: 20,
                ..FactorConfig::default()
            },
            ..SweepSpec::default()
        };
        let r = storage_sweep(&trace, &config, &spec).unwrap();
        for est in [Estimator::GroundTruth, Estimator::CollaborativeFiltering] {
            let c = r.curve(est);
            assert_eq!(c.len(), 3);
            assert_eq!(c[0].rho, 1.0);
            assert_eq!(c[2].rho, 0.0);
        }
        assert!(r.satisfaction_csv().starts_with("storage_pct,eta_ground,eta_cf\n0,"));
        assert_eq!(r.backhaul_csv().lines().count(), 4);
    }
}
