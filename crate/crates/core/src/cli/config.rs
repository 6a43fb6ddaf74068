//! Flat key-value run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::catalog::{load_trace, Trace, TraceFormat};
use crate::experiment::{default_density_grid, default_storage_grid, SweepSpec};
use crate::placement::GreedyMode;
use crate::popularity::{synth_trace, zipf_pmf, FactorConfig, SizeLaw};
use crate::seed::SeedSet;
use crate::simnet::NetworkConfig;

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    TracesTable,
    Normalized,
}

/// Every tunable of a run. Missing keys take the desk-scale defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,

    /// Trace file; when absent a Zipf trace is synthesized.
    pub trace_path: Option<PathBuf>,
    pub trace_format: TraceKind,
    /// Catalog CSV accompanying a normalized trace.
    pub catalog_path: Option<PathBuf>,

    pub num_contents: usize,
    pub num_requests: usize,
    pub zipf_alpha: f64,
    pub duration_s: f64,
    pub size_median_bytes: f64,
    pub size_sigma: f64,
    pub size_min_bytes: u64,
    pub size_max_bytes: u64,
    pub bitrate_bytes_per_s: f64,

    pub num_stations: usize,
    pub total_backhaul_bytes_per_s: f64,
    pub total_wireless_bytes_per_s: f64,
    pub time_step_s: f64,
    pub min_satisfaction: Option<f64>,
    pub audit: bool,
    pub wall_clock_limit_s: Option<f64>,

    pub storage_percents: Vec<f64>,
    pub greedy_mode: GreedyMode,
    pub cf_density: f64,
    pub cf_rank: usize,
    pub cf_mu: f64,
    pub cf_learning_rate: f64,
    pub cf_epochs: usize,
    pub cf_init_scale: f64,
    pub train_densities_pct: Vec<f64>,
    pub density_replicates: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let factor = FactorConfig::default();
        RunConfig {
            seed: 0,
            out_dir: PathBuf::from("out"),
            trace_path: None,
            trace_format: TraceKind::TracesTable,
            catalog_path: None,
            num_contents: 2000,
            num_requests: 50_000,
            zipf_alpha: 1.36,
            duration_s: 24_420.0,
            size_median_bytes: 1e6,
            size_sigma: 1.5,
            size_min_bytes: 1,
            size_max_bytes: 6_024_000_000,
            bitrate_bytes_per_s: 4e6,
            num_stations: 16,
            total_backhaul_bytes_per_s: 3.8e6,
            total_wireless_bytes_per_s: 120e6,
            time_step_s: 0.1,
            min_satisfaction: None,
            audit: false,
            wall_clock_limit_s: None,
            storage_percents: default_storage_grid(),
            greedy_mode: GreedyMode::default(),
            cf_density: 0.10,
            cf_rank: factor.rank,
            cf_mu: factor.mu,
            cf_learning_rate: factor.learning_rate,
            cf_epochs: factor.epochs,
            cf_init_scale: factor.init_scale,
            train_densities_pct: default_density_grid(),
            density_replicates: 5,
        }
    }
}

impl RunConfig {
    /// Reads `path` (if any) and applies `key=value` overrides on top. Values
    /// are TOML literals; anything that does not parse as one is a string.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Runtime(format!("config: cannot read {}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::Validation(format!("config: {}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for item in overrides {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| CliError::Validation(format!("config: override `{item}` is not key=value")))?;
            let key = key.trim();
            let raw = raw.trim();
            let value = format!("v = {raw}")
                .parse::<toml::Table>()
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(raw.to_string()));
            table.insert(key.to_string(), value);
        }
        let config: RunConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Validation(format!("config: {}", e.message())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn seeds(&self) -> SeedSet {
        SeedSet::from_master(self.seed)
    }

    pub fn network(&self) -> NetworkConfig {
        let mut n = NetworkConfig::uniform(
            self.num_stations,
            self.total_backhaul_bytes_per_s,
            self.total_wireless_bytes_per_s,
            self.time_step_s,
        );
        n.min_satisfaction = self.min_satisfaction;
        n.audit = self.audit;
        n.wall_clock_limit_s = self.wall_clock_limit_s;
        n
    }

    pub fn factor(&self) -> FactorConfig {
        FactorConfig {
            rank: self.cf_rank,
            mu: self.cf_mu,
            learning_rate: self.cf_learning_rate,
            epochs: self.cf_epochs,
            init_scale: self.cf_init_scale,
        }
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        SweepSpec {
            storage_percents: self.storage_percents.clone(),
            cf_density: self.cf_density,
            factor: self.factor(),
            greedy_mode: self.greedy_mode,
            seeds: self.seeds(),
        }
    }

    pub fn size_law(&self) -> SizeLaw {
        SizeLaw::LogNormal {
            median_bytes: self.size_median_bytes,
            sigma: self.size_sigma,
            min_bytes: self.size_min_bytes,
            max_bytes: self.size_max_bytes,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Validation(m));
        if self.num_stations == 0 {
            return bad("simnet: num_stations must be >= 1".into());
        }
        if let Err(e) = self.network().validate() {
            return bad(format!("simnet: {e}"));
        }
        if let Err(e) = self.sweep_spec().validate() {
            return bad(format!("experiment: {e}"));
        }
        if let Some(d) = self.train_densities_pct.iter().find(|d| !(**d > 0.0 && **d <= 100.0)) {
            return bad(format!("experiment: training density {d}% outside (0, 100]"));
        }
        if self.density_replicates == 0 {
            return bad("experiment: density_replicates must be >= 1".into());
        }
        if self.trace_path.is_none() {
            if self.num_contents == 0 || self.num_requests == 0 {
                return bad("popularity: num_contents and num_requests must be >= 1".into());
            }
            if !(self.zipf_alpha.is_finite() && self.zipf_alpha >= 0.0) {
                return bad(format!("popularity: zipf_alpha must be >= 0, got {}", self.zipf_alpha));
            }
            if !(self.duration_s.is_finite() && self.duration_s >= 0.0) {
                return bad(format!("popularity: duration_s must be >= 0, got {}", self.duration_s));
            }
            if let Err(e) = self.size_law().validate() {
                return bad(format!("popularity: {e}"));
            }
        } else if self.trace_format == TraceKind::Normalized && self.catalog_path.is_none() {
            return bad("catalog: a normalized trace needs catalog_path".into());
        }
        if !(self.bitrate_bytes_per_s.is_finite() && self.bitrate_bytes_per_s > 0.0) {
            return bad(format!("catalog: bitrate must be positive, got {}", self.bitrate_bytes_per_s));
        }
        Ok(())
    }

    /// The configured trace file, or a synthetic trace from the
    /// trace-synthesis seed stream.
    pub fn trace(&self) -> Result<Trace, CliError> {
        match &self.trace_path {
            Some(path) => {
                let format = match self.trace_format {
                    TraceKind::TracesTable => TraceFormat::TracesTable {
                        default_bitrate: self.bitrate_bytes_per_s,
                    },
                    TraceKind::Normalized => TraceFormat::Normalized {
                        catalog: self.catalog_path.clone().expect("validated"),
                    },
                };
                Ok(load_trace(path, &format)?)
            }
            None => {
                let model = zipf_pmf(self.zipf_alpha, self.num_contents)?;
                Ok(synth_trace(
                    &model,
                    self.num_requests,
                    &self.size_law(),
                    self.bitrate_bytes_per_s,
                    self.duration_s,
                    self.seeds().trace,
                )?)
            }
        }
    }
}
