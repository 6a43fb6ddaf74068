//! The event-skipping engine against a plain step-by-step simulation.

use proptest::prelude::*;

use edgecache::catalog::{Catalog, ContentId, RequestRecord, Trace};
use edgecache::placement::{CachePlacement, StorageBudget};
use edgecache::simnet::{simulate, Assignment, NetworkConfig, StationId};

struct Job {
    arrival: f64,
    size: f64,
    cached: bool,
    left: f64,
    end: Option<f64>,
}

/// Visits every step of length `dt`. Shares are fixed per step over the
/// requests that are active at its start or arrive during it.
fn reference_station(jobs: &mut [Job], backhaul: f64, wireless: f64, dt: f64) {
    let step_of = |t: f64| (t / dt).floor() as u64;
    let Some(first) = jobs.iter().map(|j| step_of(j.arrival)).min() else {
        return;
    };
    let mut k = first;
    while jobs.iter().any(|j| j.end.is_none()) {
        let t0 = k as f64 * dt;
        let active: Vec<usize> = (0..jobs.len())
            .filter(|&i| jobs[i].end.is_none() && step_of(jobs[i].arrival) <= k)
            .collect();
        if active.is_empty() {
            k = jobs.iter().filter(|j| j.end.is_none()).map(|j| step_of(j.arrival)).min().unwrap();
            continue;
        }
        let n = active.len() as f64;
        let n_uncached = active.iter().filter(|&&i| !jobs[i].cached).count() as f64;
        let share = wireless / n;
        for &i in &active {
            let j = &mut jobs[i];
            let rate = if j.cached { share } else { share.min(backhaul / n_uncached) };
            let from = j.arrival.max(t0);
            let can = (t0 + dt - from) * rate;
            if j.left <= can * (1.0 + 1e-12) {
                j.end = Some(from + j.left / rate);
                j.left = 0.0;
            } else {
                j.left -= can;
            }
        }
        k += 1;
    }
}

#[derive(Debug, Clone)]
struct Case {
    sizes: Vec<u64>,
    requests: Vec<(f64, u32, u32)>,
    cached: Vec<bool>,
    stations: usize,
    backhaul: f64,
    wireless: f64,
    dt: f64,
}

fn case() -> impl Strategy<Value = Case> {
    (1usize..6, 1usize..4, 1usize..40)
        .prop_flat_map(|(f, m, d)| {
            (
                prop::collection::vec(1u64..60, f),
                prop::collection::vec((0.0f64..20.0, 1..=f as u32, 1..=m as u32), d),
                prop::collection::vec(any::<bool>(), f * m),
                Just(m),
                0.5f64..6.0,
                1.0f64..10.0,
                prop::sample::select(vec![0.05, 0.1, 0.25, 0.37, 1.0]),
            )
        })
        .prop_map(|(sizes, requests, cached, stations, backhaul, extra, dt)| Case {
            sizes,
            requests,
            cached,
            stations,
            backhaul,
            wireless: backhaul + extra,
            dt,
        })
}

fn build(c: &Case) -> (Trace, Assignment, CachePlacement, NetworkConfig) {
    let catalog = Catalog::from_sizes(&c.sizes, 3.0).unwrap();
    let mut reqs = c.requests.clone();
    reqs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let records = reqs
        .iter()
        .map(|&(t, f, _)| RequestRecord {
            arrival_time_s: t,
            content: ContentId(f),
            session_id: 0,
        })
        .collect();
    let trace = Trace::new(records, 20.0, catalog).unwrap();
    let assignment = Assignment::new(reqs.iter().map(|r| StationId(r.2)).collect(), c.stations).unwrap();
    let f = c.sizes.len();
    let pairs: Vec<(StationId, ContentId)> = (0..c.stations)
        .flat_map(|m| (0..f).map(move |j| (m, j)))
        .filter(|&(m, j)| c.cached[m * f + j])
        .map(|(m, j)| (StationId::from_index(m), ContentId::from_index(j)))
        .collect();
    let budget = StorageBudget::uniform(c.stations, trace.catalog().total_size_bytes());
    let placement = CachePlacement::from_pairs(c.stations, trace.catalog(), &budget, pairs).unwrap();
    let config = NetworkConfig {
        backhaul_bytes_per_s: vec![c.backhaul; c.stations],
        wireless_bytes_per_s: vec![c.wireless; c.stations],
        time_step_s: c.dt,
        min_satisfaction: None,
        audit: true,
        wall_clock_limit_s: None,
    };
    (trace, assignment, placement, config)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn engine_matches_stepping(c in case()) {
        let (trace, assignment, placement, config) = build(&c);
        let result = simulate(&trace, &assignment, &placement, &config).unwrap();
        prop_assert_eq!(result.audit.unwrap().violations, 0);

        for m in 0..c.stations {
            let station = StationId::from_index(m);
            let idx: Vec<usize> = (0..trace.len()).filter(|&i| assignment.stations()[i] == station).collect();
            let mut jobs: Vec<Job> = idx
                .iter()
                .map(|&i| {
                    let r = trace.records()[i];
                    let size = trace.catalog().contents()[r.content.index()].size_bytes as f64;
                    Job {
                        arrival: r.arrival_time_s,
                        size,
                        cached: placement.is_cached(station, r.content),
                        left: size,
                        end: None,
                    }
                })
                .collect();
            reference_station(&mut jobs, c.backhaul, c.wireless, c.dt);
            for (job, &i) in jobs.iter().zip(&idx) {
                let got = result.records[i].end_s;
                let want = job.end.unwrap();
                prop_assert!((got - want).abs() <= 1e-7 * want.max(1.0), "request {}: engine {} reference {}", i, got, want);
                prop_assert_eq!(result.records[i].cached, job.cached);
                prop_assert!(got > job.arrival || job.size == 0.0);
            }
        }
    }
}
