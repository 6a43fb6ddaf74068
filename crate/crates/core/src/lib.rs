//! Trace-driven simulation of proactive caching at backhaul-limited edge base
//! stations.
//!
//! The crate is organised as a pipeline:
//!
//! - [`catalog`]: content library, request traces, traces-table ingestion and
//!   traffic characterization (ranked popularity, cumulative size).
//! - [`popularity`]: Zipf popularity model and fitting, synthetic traces, the
//!   ground-truth station × content popularity matrix, and collaborative
//!   filtering by regularized matrix factorization.
//! - [`placement`]: greedy most-popular cache placement under a per-station
//!   storage budget.
//! - [`simnet`]: discrete-time delivery of a trace over shared backhaul and
//!   wireless links, producing the request satisfaction ratio and backhaul load.
//! - [`experiment`]: storage sweeps and training-density sweeps comparing the
//!   ground-truth and collaborative-filtering estimators.
//! - [`cli`]: the `edgecache` command-line front end.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod catalog;
pub mod cli;
pub mod experiment;
pub mod placement;
pub mod popularity;
pub mod seed;
pub mod simnet;

mod io_util;

pub use catalog::{Catalog, Content, ContentId, RequestRecord, Trace, TraceFormat};
pub use experiment::{Estimator, SweepResult, SweepSpec};
pub use placement::{CachePlacement, GreedyMode, StorageBudget};
pub use popularity::{FactorConfig, FactorModel, PopularityMatrix, RatingSample, ZipfModel};
pub use simnet::{Assignment, NetworkConfig, SimResult, StationId};

/// One megabyte as used throughout the crate's defaults (decimal, 10^6 bytes).
pub const MEGABYTE: f64 = 1e6;
