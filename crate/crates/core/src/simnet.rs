//! Discrete-time delivery of a request trace through cache-enabled stations.
//!
//! Every station owns a backhaul link of capacity `C_m` and a wireless link of
//! capacity `C'_m`, with `C_m < C'_m`. Time advances in steps of `Δt`. During
//! a step, the wireless capacity is split equally among every request active
//! at the station at any point of the step, and the backhaul capacity is split
//! equally among the uncached ones. A cached request is delivered at its
//! wireless share; an uncached one at `min(wireless share, backhaul share)`,
//! every byte of it crossing the backhaul.
//!
//! Service starts at the request's arrival instant, even mid-step, and the
//! completion instant is interpolated inside the completing step. Shares are
//! only re-divided at step boundaries: a request that finishes mid-step keeps
//! its share until the boundary, and one that arrives mid-step is counted for
//! the whole step. Both effects vanish as `Δt → 0`.
//!
//! Rates are piecewise constant between arrivals and completions, so the
//! engine jumps over runs of identical steps instead of visiting each one.
//! The result is identical (up to floating-point rounding) to stepping.
//!
//! A request `d` is satisfied when `L(f_d) / (τ'(f_d) − τ(f_d)) ≥ B(f_d)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::fs::File;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{RequestRecord, Trace};
use crate::io_util::{fmt_f64, write_atomic};
use crate::placement::CachePlacement;
use crate::seed;

/// Relative slack on the satisfaction test, absorbing rounding in `τ' − τ`.
const SATISFACTION_SLACK: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid network config: {0}")]
    Config(String),
    #[error("input mismatch: {0}")]
    Mismatch(String),
    #[error("livelock at station {station}: {active} active requests make no progress at t={time_s}s")]
    Livelock {
        station: StationId,
        active: usize,
        time_s: f64,
    },
    #[error("simulation exceeded the wall-clock limit of {0:?}")]
    WallClock(Duration),
    #[error("io error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

type Result<T> = std::result::Result<T, SimError>;

/// Base station identifier in `1..=M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StationId(pub u32);

impl StationId {
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(index: usize) -> Self {
        StationId(index as u32 + 1)
    }
}

impl fmt::Display for StationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Station serving each request of a trace, in trace order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    stations: Vec<StationId>,
    num_stations: usize,
}

impl Assignment {
    pub fn new(stations: Vec<StationId>, num_stations: usize) -> Result<Self> {
        if let Some(s) = stations.iter().find(|s| s.0 == 0 || s.index() >= num_stations) {
            return Err(SimError::Mismatch(format!("station {s} outside 1..={num_stations}")));
        }
        Ok(Assignment { stations, num_stations })
    }

    pub fn stations(&self) -> &[StationId] {
        &self.stations
    }

    pub fn num_stations(&self) -> usize {
        self.num_stations
    }

    pub fn len(&self) -> usize {
        self.stations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stations.is_empty()
    }

    /// Number of requests per station.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.num_stations];
        for s in &self.stations {
            c[s.index()] += 1;
        }
        c
    }
}

/// Maps each request to a station drawn uniformly at random.
pub fn assign_requests(trace: &Trace, num_stations: usize, seed: u64) -> Result<Assignment> {
    if num_stations == 0 {
        return Err(SimError::Config("need at least one station".into()));
    }
    let mut rng = seed::rng(seed);
    let stations = (0..trace.len())
        .map(|_| StationId::from_index(rng.random_range(0..num_stations)))
        .collect();
    Assignment::new(stations, num_stations)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Backhaul capacity `C_m` per station, bytes/s.
    pub backhaul_bytes_per_s: Vec<f64>,
    /// Wireless capacity `C'_m` per station, bytes/s.
    pub wireless_bytes_per_s: Vec<f64>,
    pub time_step_s: f64,
    pub min_satisfaction: Option<f64>,
    /// Verify the capacity constraints on every simulated step.
    #[serde(default)]
    pub audit: bool,
    #[serde(default)]
    pub wall_clock_limit_s: Option<f64>,
}

impl NetworkConfig {
    /// Identical stations sharing the given totals equally.
    pub fn uniform(num_stations: usize, total_backhaul: f64, total_wireless: f64, time_step_s: f64) -> Self {
        let m = num_stations.max(1) as f64;
        NetworkConfig {
            backhaul_bytes_per_s: vec![total_backhaul / m; num_stations],
            wireless_bytes_per_s: vec![total_wireless / m; num_stations],
            time_step_s,
            min_satisfaction: None,
            audit: false,
            wall_clock_limit_s: None,
        }
    }

    /// 3.8 MB/s of backhaul and 120 MB/s of wireless capacity in total,
    /// `Δt = 0.1 s`.
    pub fn desk_default(num_stations: usize) -> Self {
        NetworkConfig::uniform(num_stations, 3.8 * crate::MEGABYTE, 120.0 * crate::MEGABYTE, 0.1)
    }

    pub fn num_stations(&self) -> usize {
        self.backhaul_bytes_per_s.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.backhaul_bytes_per_s.len();
        if m == 0 {
            return Err(SimError::Config("need at least one station".into()));
        }
        if self.wireless_bytes_per_s.len() != m {
            return Err(SimError::Config(format!(
                "{} backhaul capacities but {} wireless capacities",
                m,
                self.wireless_bytes_per_s.len()
            )));
        }
        for (i, (&c, &w)) in self.backhaul_bytes_per_s.iter().zip(&self.wireless_bytes_per_s).enumerate() {
            if !(c.is_finite() && c >= 0.0 && w.is_finite()) {
                return Err(SimError::Config(format!("station {}: capacities must be finite and >= 0", i + 1)));
            }
            if c >= w {
                return Err(SimError::Config(format!(
                    "station {}: backhaul capacity C_m = {c} must be strictly below wireless capacity C'_m = {w}",
                    i + 1
                )));
            }
        }
        if !(self.time_step_s.is_finite() && self.time_step_s > 0.0) {
            return Err(SimError::Config(format!("time step must be positive, got {}", self.time_step_s)));
        }
        if let Some(eta) = self.min_satisfaction {
            check_eta(eta)?;
        }
        if let Some(limit) = self.wall_clock_limit_s {
            if !(limit.is_finite() && limit > 0.0) {
                return Err(SimError::Config(format!("wall-clock limit must be positive, got {limit}")));
            }
        }
        Ok(())
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(SimError::Config(format!("minimum satisfaction must lie in [0, 1], got {eta}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeliveryRecord {
    pub request_idx: usize,
    pub request: RequestRecord,
    pub station: StationId,
    pub cached: bool,
    /// `τ(f_d)`.
    pub start_s: f64,
    /// `τ'(f_d)`.
    pub end_s: f64,
    pub backhaul_bytes: f64,
    pub satisfied: bool,
}

/// Outcome of the per-step capacity check.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CapacityAudit {
    /// Steps with at least one active request.
    pub steps_checked: u64,
    pub violations: u64,
    pub peak_backhaul_utilization: f64,
    pub peak_wireless_utilization: f64,
}

impl CapacityAudit {
    fn merge(&mut self, other: &CapacityAudit) {
        self.steps_checked += other.steps_checked;
        self.violations += other.violations;
        self.peak_backhaul_utilization = self.peak_backhaul_utilization.max(other.peak_backhaul_utilization);
        self.peak_wireless_utilization = self.peak_wireless_utilization.max(other.peak_wireless_utilization);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// `η(D)`: fraction of satisfied requests.
    pub satisfaction_ratio: f64,
    /// `ρ(D)`: mean fraction of each requested file carried by the backhaul.
    pub backhaul_load: f64,
    /// One record per request, in trace order.
    pub records: Vec<DeliveryRecord>,
    pub meets_min_satisfaction: Option<bool>,
    pub audit: Option<CapacityAudit>,
}

impl SimResult {
    fn from_records(records: Vec<DeliveryRecord>, trace: &Trace, eta_min: Option<f64>) -> Self {
        let d = records.len() as f64;
        let satisfied = records.iter().filter(|r| r.satisfied).count() as f64;
        let carried: f64 = records
            .iter()
            .map(|r| r.backhaul_bytes / trace.catalog().contents()[r.request.content.index()].size_bytes as f64)
            .sum();
        let (eta, rho) = if records.is_empty() { (1.0, 0.0) } else { (satisfied / d, carried / d) };
        SimResult {
            satisfaction_ratio: eta,
            backhaul_load: rho,
            records,
            meets_min_satisfaction: eta_min.map(|m| m <= eta),
            audit: None,
        }
    }

    /// Per-request CSV `request_idx,station,start_s,end_s,backhaul_bytes,satisfied`.
    pub fn records_csv(&self) -> String {
        let mut out = String::from("request_idx,station,start_s,end_s,backhaul_bytes,satisfied\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.request_idx,
                r.station,
                fmt_f64(r.start_s),
                fmt_f64(r.end_s),
                fmt_f64(r.backhaul_bytes),
                r.satisfied
            ));
        }
        out
    }

    pub fn summary(&self, config: &NetworkConfig, seed: Option<u64>) -> SimSummary {
        SimSummary {
            eta: self.satisfaction_ratio,
            rho: self.backhaul_load,
            d: self.records.len(),
            meets_min_satisfaction: self.meets_min_satisfaction,
            config: config.clone(),
            seed,
            audit: self.audit,
        }
    }

    /// Writes `summary.json` and, if asked, `requests.csv` into `dir`.
    pub fn save(&self, dir: &Path, config: &NetworkConfig, seed: Option<u64>, with_records: bool) -> Result<()> {
        let io = |path: std::path::PathBuf| move |source| SimError::Io { path, source };
        let summary = dir.join("summary.json");
        let json = serde_json::to_string_pretty(&self.summary(config, seed)).expect("summary serializes");
        write_atomic(&summary, json.as_bytes()).map_err(io(summary.clone()))?;
        if with_records {
            let path = dir.join("requests.csv");
            write_atomic(&path, self.records_csv().as_bytes()).map_err(io(path.clone()))?;
        }
        Ok(())
    }
}

/// JSON summary of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub eta: f64,
    pub rho: f64,
    #[serde(rename = "D")]
    pub d: usize,
    pub meets_min_satisfaction: Option<bool>,
    pub config: NetworkConfig,
    pub seed: Option<u64>,
    pub audit: Option<CapacityAudit>,
}

impl SimSummary {
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|source| SimError::Io {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_reader(file).map_err(|e| SimError::Mismatch(format!("{}: {e}", path.display())))
    }
}

/// `η_min ≤ η(D)`.
pub fn check_min_satisfaction(result: &SimResult, eta_min: f64) -> Result<bool> {
    check_eta(eta_min)?;
    Ok(eta_min <= result.satisfaction_ratio)
}

pub fn simulate(
    trace: &Trace,
    assignment: &Assignment,
    placement: &CachePlacement,
    config: &NetworkConfig,
) -> Result<SimResult> {
    config.validate()?;
    let m = config.num_stations();
    if assignment.len() != trace.len() {
        return Err(SimError::Mismatch(format!(
            "assignment covers {} requests, trace has {}",
            assignment.len(),
            trace.len()
        )));
    }
    if assignment.num_stations() != m || placement.num_stations() != m {
        return Err(SimError::Mismatch(format!(
            "config has {m} stations, assignment {}, placement {}",
            assignment.num_stations(),
            placement.num_stations()
        )));
    }
    if placement.num_contents() != trace.catalog().len() {
        return Err(SimError::Mismatch(format!(
            "placement covers {} contents, catalog has {}",
            placement.num_contents(),
            trace.catalog().len()
        )));
    }

    let dt = config.time_step_s;
    let mut per_station: Vec<Vec<Job>> = vec![Vec::new(); m];
    for (idx, (r, s)) in trace.records().iter().zip(assignment.stations()).enumerate() {
        let content = &trace.catalog().contents()[r.content.index()];
        per_station[s.index()].push(Job {
            idx,
            arrival: r.arrival_time_s,
            step: (r.arrival_time_s / dt).floor() as u64,
            size: content.size_bytes as f64,
            bitrate: content.bitrate_bytes_per_s,
            cached: placement.is_cached(*s, r.content),
        });
    }

    let deadline = config.wall_clock_limit_s.map(|s| {
        let limit = Duration::from_secs_f64(s);
        (Instant::now() + limit, limit)
    });
    let outcomes: Vec<StationOutcome> = per_station
        .iter()
        .enumerate()
        .map(|(i, jobs)| {
            let link = Link {
                station: StationId::from_index(i),
                backhaul: config.backhaul_bytes_per_s[i],
                wireless: config.wireless_bytes_per_s[i],
                dt,
            };
            run_station(&link, jobs, config.audit, deadline)
        })
        .collect::<Result<_>>()?;

    let mut records: Vec<Option<DeliveryRecord>> = vec![None; trace.len()];
    let mut audit = CapacityAudit::default();
    for (i, outcome) in outcomes.into_iter().enumerate() {
        audit.merge(&outcome.audit);
        for (job, end) in per_station[i].iter().zip(outcome.end_times) {
            let elapsed = end - job.arrival;
            let satisfied = elapsed <= 0.0 || job.size / elapsed >= job.bitrate * (1.0 - SATISFACTION_SLACK);
            records[job.idx] = Some(DeliveryRecord {
                request_idx: job.idx,
                request: trace.records()[job.idx],
                station: StationId::from_index(i),
                cached: job.cached,
                start_s: job.arrival,
                end_s: end,
                backhaul_bytes: if job.cached { 0.0 } else { job.size },
                satisfied,
            });
        }
    }
    let records = records.into_iter().map(|r| r.expect("every request delivered")).collect();
    let mut result = SimResult::from_records(records, trace, config.min_satisfaction);
    if config.audit {
        result.audit = Some(audit);
    }
    Ok(result)
}

#[derive(Debug, Clone)]
struct Job {
    idx: usize,
    arrival: f64,
    step: u64,
    size: f64,
    bitrate: f64,
    cached: bool,
}

struct Link {
    station: StationId,
    backhaul: f64,
    wireless: f64,
    dt: f64,
}

struct StationOutcome {
    /// Completion instant of each job, in the station's job order.
    end_times: Vec<f64>,
    audit: CapacityAudit,
}

/// A job waiting for its class's virtual clock to reach `target`.
#[derive(Debug, Clone, Copy)]
struct Pending {
    target: f64,
    job: usize,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    // min-heap on target, then on job order
    fn cmp(&self, other: &Self) -> Ordering {
        other.target.total_cmp(&self.target).then(other.job.cmp(&self.job))
    }
}

/// Requests of one delivery class at a station. All of them progress at the
/// same rate, so a single virtual clock (bytes delivered per request since
/// the class last emptied) tracks them; a job completes once the clock
/// reaches its target.
#[derive(Default)]
struct Class {
    clock: f64,
    pending: BinaryHeap<Pending>,
}

impl Class {
    fn tolerance(target: f64) -> f64 {
        1e-9 + 1e-12 * target.abs()
    }

    /// Full steps that pass before the step in which the earliest job
    /// completes, at `per_step` bytes per step.
    fn steps_before_completion(&self, per_step: f64) -> u64 {
        let Some(top) = self.pending.peek() else {
            return u64::MAX;
        };
        let goal = top.target - Class::tolerance(top.target);
        let reaches = |j: u64| self.clock + (j + 1) as f64 * per_step >= goal;
        let mut j = (((goal - self.clock) / per_step).ceil() - 1.0).max(0.0) as u64;
        while j > 0 && reaches(j - 1) {
            j -= 1;
        }
        while !reaches(j) {
            j += 1;
        }
        j
    }
}

fn run_station(
    link: &Link,
    jobs: &[Job],
    audit_on: bool,
    deadline: Option<(Instant, Duration)>,
) -> Result<StationOutcome> {
    let dt = link.dt;
    let mut end_times = vec![f64::NAN; jobs.len()];
    let mut audit = CapacityAudit::default();
    // [cached, uncached]
    let mut classes = [Class::default(), Class::default()];
    let mut next = 0usize;
    let mut step: u64 = 0;
    let mut iterations: u64 = 0;

    loop {
        if classes.iter().all(|c| c.pending.is_empty()) {
            if next == jobs.len() {
                break;
            }
            step = step.max(jobs[next].step);
            classes.iter_mut().for_each(|c| c.clock = 0.0);
        }
        iterations += 1;
        if iterations.is_multiple_of(1024) {
            if let Some((at, limit)) = deadline {
                if Instant::now() > at {
                    return Err(SimError::WallClock(limit));
                }
            }
        }

        let first_new = next;
        while next < jobs.len() && jobs[next].step <= step {
            next += 1;
        }
        let newcomers = &jobs[first_new..next];
        let new_cached = newcomers.iter().filter(|j| j.cached).count();
        let n_cached = classes[0].pending.len() + new_cached;
        let n_uncached = classes[1].pending.len() + newcomers.len() - new_cached;
        let n = n_cached + n_uncached;

        let wireless_share = link.wireless / n as f64;
        let rates = [
            wireless_share,
            if n_uncached > 0 {
                wireless_share.min(link.backhaul / n_uncached as f64)
            } else {
                0.0
            },
        ];
        let counts = [n_cached, n_uncached];
        for k in 0..2 {
            if counts[k] > 0 && (rates[k].is_nan() || rates[k] <= 0.0) {
                return Err(SimError::Livelock {
                    station: link.station,
                    active: n,
                    time_s: step as f64 * dt,
                });
            }
        }

        let t0 = step as f64 * dt;
        for (offset, job) in newcomers.iter().enumerate() {
            let k = usize::from(!job.cached);
            let lead = (job.arrival - t0).clamp(0.0, dt);
            classes[k].pending.push(Pending {
                target: classes[k].clock + lead * rates[k] + job.size,
                job: first_new + offset,
            });
        }

        let until_arrival = if next < jobs.len() { jobs[next].step - step } else { u64::MAX };
        let until_completion = (0..2)
            .map(|k| classes[k].steps_before_completion(rates[k] * dt))
            .min()
            .unwrap_or(u64::MAX);

        let covered = if until_arrival <= until_completion {
            until_arrival
        } else {
            until_completion + 1
        };
        if audit_on {
            let backhaul = n_uncached as f64 * rates[1];
            let wireless = n_cached as f64 * rates[0] + backhaul;
            let ok = backhaul <= link.backhaul * (1.0 + 1e-12) && wireless <= link.wireless * (1.0 + 1e-12);
            audit.steps_checked += covered;
            if !ok {
                audit.violations += covered;
            }
            if link.backhaul > 0.0 {
                audit.peak_backhaul_utilization = audit.peak_backhaul_utilization.max(backhaul / link.backhaul);
            }
            audit.peak_wireless_utilization = audit.peak_wireless_utilization.max(wireless / link.wireless);
        }

        if until_arrival <= until_completion {
            for k in 0..2 {
                classes[k].clock += until_arrival as f64 * rates[k] * dt;
            }
            step += until_arrival;
            continue;
        }

        // Rates are constant from t0 through the completing step, so the
        // completion instant follows from the clock value at t0.
        let anchors = [classes[0].clock, classes[1].clock];
        let j = until_completion;
        let step_start = (step + j) as f64 * dt;
        for k in 0..2 {
            let class = &mut classes[k];
            class.clock = anchors[k] + j as f64 * rates[k] * dt;
            let horizon = class.clock + rates[k] * dt;
            while let Some(&top) = class.pending.peek() {
                if top.target > horizon + Class::tolerance(top.target) {
                    break;
                }
                class.pending.pop();
                let end = t0 + (top.target - anchors[k]) / rates[k];
                let job = &jobs[top.job];
                end_times[top.job] = end.clamp(step_start.max(job.arrival), step_start + dt);
            }
            class.clock = horizon;
            if class.pending.is_empty() {
                class.clock = 0.0;
            }
        }
        step += j + 1;
    }

    Ok(StationOutcome { end_times, audit })
}
