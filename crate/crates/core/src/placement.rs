//! Greedy most-popular cache placement under per-station storage budgets.
//!
//! Each station ranks contents by its row of the popularity matrix (ties go to
//! the lower content id) and caches them in that order while storage remains.

use std::fmt::Write as _;
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, ContentId};
use crate::io_util::write_atomic;
use crate::popularity::PopularityMatrix;
use crate::simnet::StationId;

#[derive(Debug, Error)]
pub enum PlacementError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid budget: {0}")]
    Budget(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
}

type Result<T> = std::result::Result<T, PlacementError>;

/// Per-station storage capacity `S_m` in bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StorageBudget {
    pub per_station_bytes: Vec<u64>,
}

impl StorageBudget {
    pub fn uniform(num_stations: usize, bytes: u64) -> Self {
        StorageBudget {
            per_station_bytes: vec![bytes; num_stations],
        }
    }

    /// `pct` percent of the whole catalog's size at every station.
    pub fn from_percent(pct: f64, catalog: &Catalog, num_stations: usize) -> Result<Self> {
        if !(0.0..=100.0).contains(&pct) {
            return Err(PlacementError::Budget(format!("percentage must lie in [0, 100], got {pct}")));
        }
        let total = catalog.total_size_bytes();
        let bytes = if pct >= 100.0 {
            total
        } else {
            ((pct / 100.0) * total as f64).floor() as u64
        };
        Ok(StorageBudget::uniform(num_stations, bytes.min(total)))
    }
}

/// What the greedy scan does with a content that does not fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreedyMode {
    /// Skip it and keep scanning for smaller contents further down. Uses
    /// more of the budget, but a larger budget can then cache a large content
    /// in place of smaller ones, so placements are not nested.
    Skip,
    /// Stop filling the station at the first misfit. Each placement is a
    /// popularity prefix, so placements grow with the budget.
    #[default]
    Stop,
}

/// Binary cache decision `X ∈ {0,1}^{M×F}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CachePlacement {
    stations: usize,
    contents: usize,
    cached: Vec<bool>,
    stored_bytes: Vec<u64>,
    budget: Vec<u64>,
}

impl CachePlacement {
    pub fn empty(stations: usize, catalog: &Catalog) -> Self {
        CachePlacement {
            stations,
            contents: catalog.len(),
            cached: vec![false; stations * catalog.len()],
            stored_bytes: vec![0; stations],
            budget: vec![0; stations],
        }
    }

    /// Every content at every station, with the budget set to the catalog size.
    pub fn full(stations: usize, catalog: &Catalog) -> Self {
        let total = catalog.total_size_bytes();
        CachePlacement {
            stations,
            contents: catalog.len(),
            cached: vec![true; stations * catalog.len()],
            stored_bytes: vec![total; stations],
            budget: vec![total; stations],
        }
    }

    pub fn num_stations(&self) -> usize {
        self.stations
    }

    pub fn num_contents(&self) -> usize {
        self.contents
    }

    pub fn is_cached(&self, station: StationId, content: ContentId) -> bool {
        self.cached[station.index() * self.contents + content.index()]
    }

    pub fn stored_bytes(&self) -> &[u64] {
        &self.stored_bytes
    }

    pub fn budget(&self) -> &[u64] {
        &self.budget
    }

    pub fn cached_count(&self) -> usize {
        self.cached.iter().filter(|x| **x).count()
    }

    /// Cached contents of one station in increasing id order.
    pub fn station_contents(&self, station: StationId) -> Vec<ContentId> {
        let row = &self.cached[station.index() * self.contents..(station.index() + 1) * self.contents];
        row.iter()
            .enumerate()
            .filter(|(_, c)| **c)
            .map(|(j, _)| ContentId::from_index(j))
            .collect()
    }

    /// Builds a placement from explicit `(station, content)` pairs, checking
    /// each station's budget.
    pub fn from_pairs(
        stations: usize,
        catalog: &Catalog,
        budget: &StorageBudget,
        pairs: impl IntoIterator<Item = (StationId, ContentId)>,
    ) -> Result<Self> {
        if budget.per_station_bytes.len() != stations {
            return Err(PlacementError::Dimension(format!(
                "budget has {} stations, expected {stations}",
                budget.per_station_bytes.len()
            )));
        }
        let mut p = CachePlacement::empty(stations, catalog);
        p.budget = budget.per_station_bytes.clone();
        for (s, c) in pairs {
            if s.0 == 0 || s.index() >= stations || catalog.get(c).is_none() {
                return Err(PlacementError::Dimension(format!("pair ({s}, {c}) out of range")));
            }
            let cell = &mut p.cached[s.index() * p.contents + c.index()];
            if !*cell {
                *cell = true;
                p.stored_bytes[s.index()] += catalog.contents()[c.index()].size_bytes;
            }
        }
        for m in 0..stations {
            if p.stored_bytes[m] > p.budget[m] {
                return Err(PlacementError::Budget(format!(
                    "station {} stores {} bytes over a budget of {}",
                    m + 1,
                    p.stored_bytes[m],
                    p.budget[m]
                )));
            }
        }
        Ok(p)
    }

    /// CSV of cached `(station, content_id)` pairs.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("station,content_id\n");
        for m in 0..self.stations {
            for c in self.station_contents(StationId::from_index(m)) {
                let _ = writeln!(out, "{},{}", m + 1, c);
            }
        }
        out
    }

    pub fn summary(&self) -> PlacementSummary {
        PlacementSummary {
            stations: (0..self.stations)
                .map(|m| StationSummary {
                    station: StationId::from_index(m),
                    budget_bytes: self.budget[m],
                    used_bytes: self.stored_bytes[m],
                    cached_contents: self.station_contents(StationId::from_index(m)).len(),
                })
                .collect(),
        }
    }

    /// Writes `placement.csv` and `placement.json` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let csv_path = dir.join("placement.csv");
        let json_path = dir.join("placement.json");
        let io = |path: &Path| {
            let path = path.to_owned();
            move |source| PlacementError::Io { path, source }
        };
        write_atomic(&csv_path, self.to_csv().as_bytes()).map_err(io(&csv_path))?;
        let json = serde_json::to_string_pretty(&self.summary()).expect("summary serializes");
        write_atomic(&json_path, json.as_bytes()).map_err(io(&json_path))?;
        Ok(())
    }

    pub fn load_csv(path: &Path, stations: usize, catalog: &Catalog, budget: &StorageBudget) -> Result<Self> {
        let file = File::open(path).map_err(|source| PlacementError::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut rdr = csv::Reader::from_reader(file);
        let mut pairs = Vec::new();
        for rec in rdr.deserialize::<(u32, u32)>() {
            let (s, c) = rec.map_err(|e| PlacementError::Parse(e.to_string()))?;
            pairs.push((StationId(s), ContentId(c)));
        }
        CachePlacement::from_pairs(stations, catalog, budget, pairs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementSummary {
    pub stations: Vec<StationSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationSummary {
    pub station: StationId,
    pub budget_bytes: u64,
    pub used_bytes: u64,
    pub cached_contents: usize,
}

pub fn greedy_place(
    popularity: &PopularityMatrix,
    catalog: &Catalog,
    budget: &StorageBudget,
    mode: GreedyMode,
) -> Result<CachePlacement> {
    let stations = popularity.rows();
    if popularity.cols() != catalog.len() {
        return Err(PlacementError::Dimension(format!(
            "popularity has {} columns, catalog has {} contents",
            popularity.cols(),
            catalog.len()
        )));
    }
    if budget.per_station_bytes.len() != stations {
        return Err(PlacementError::Dimension(format!(
            "budget has {} stations, popularity has {stations} rows",
            budget.per_station_bytes.len()
        )));
    }
    let f = catalog.len();
    let sizes: Vec<u64> = catalog.sizes().collect();
    let mut placement = CachePlacement::empty(stations, catalog);
    placement.budget = budget.per_station_bytes.clone();
    let mut order: Vec<usize> = (0..f).collect();
    for m in 0..stations {
        let row = popularity.row(m);
        order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        let mut left = budget.per_station_bytes[m];
        for &j in &order {
            if sizes[j] <= left {
                left -= sizes[j];
                placement.cached[m * f + j] = true;
            } else if mode == GreedyMode::Stop {
                break;
            }
        }
        placement.stored_bytes[m] = budget.per_station_bytes[m] - left;
    }
    Ok(placement)
}

/// Whether every cached entry of `small` is also cached in `large`.
pub fn placement_is_nested(small: &CachePlacement, large: &CachePlacement) -> Result<bool> {
    if small.stations != large.stations || small.contents != large.contents {
        return Err(PlacementError::Dimension(format!(
            "{}x{} vs {}x{}",
            small.stations, small.contents, large.stations, large.contents
        )));
    }
    Ok(small.cached.iter().zip(&large.cached).all(|(s, l)| !*s || *l))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_row(pop: &[f64]) -> PopularityMatrix {
        PopularityMatrix::from_dense(1, pop.len(), pop.to_vec()).unwrap()
    }

    /// Exhaustive reference: walk the ranking, keep whatever fits.
    fn reference(pop: &[f64], sizes: &[u64], budget: u64) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..pop.len()).collect();
        idx.sort_by(|&a, &b| pop[b].partial_cmp(&pop[a]).unwrap().then(a.cmp(&b)));
        let mut chosen = Vec::new();
        let mut used = 0;
        for j in idx {
            if used + sizes[j] <= budget {
                used += sizes[j];
                chosen.push(j);
            }
        }
        chosen.sort();
        chosen
    }

    #[test]
    fn skip_continues_past_large_content() {
        let catalog = Catalog::from_sizes(&[10, 4, 4], 1.0).unwrap();
        let p = greedy_place(&one_row(&[0.5, 0.3, 0.2]), &catalog, &StorageBudget::uniform(1, 8), GreedyMode::Skip)
            .unwrap();
        assert_eq!(p.station_contents(StationId(1)), vec![ContentId(2), ContentId(3)]);
        assert_eq!(p.stored_bytes(), &[8]);
        assert_eq!(reference(&[0.5, 0.3, 0.2], &[10, 4, 4], 8), vec![1, 2]);

        let stop = greedy_place(&one_row(&[0.5, 0.3, 0.2]), &catalog, &StorageBudget::uniform(1, 8), GreedyMode::Stop)
            .unwrap();
        assert_eq!(stop.cached_count(), 0);
    }

    #[test]
    fn full_and_zero_budgets() {
        let catalog = Catalog::from_sizes(&[3, 1, 4, 1, 5], 1.0).unwrap();
        let pop = PopularityMatrix::from_dense(2, 5, vec![0.1, 0.0, 0.3, 0.2, 0.0, 0.0, 0.1, 0.0, 0.2, 0.1]).unwrap();
        let full = StorageBudget::from_percent(100.0, &catalog, 2).unwrap();
        let p = greedy_place(&pop, &catalog, &full, GreedyMode::Skip).unwrap();
        assert_eq!(p.cached_count(), 10);
        assert_eq!(p, {
            let mut f = CachePlacement::full(2, &catalog);
            f.budget = vec![14, 14];
            f
        });
        let none = greedy_place(&pop, &catalog, &StorageBudget::uniform(2, 0), GreedyMode::Skip).unwrap();
        assert_eq!(none.cached_count(), 0);
    }

    #[test]
    fn dimension_mismatch() {
        let catalog = Catalog::from_sizes(&[1, 1], 1.0).unwrap();
        assert!(greedy_place(&one_row(&[1.0, 2.0, 3.0]), &catalog, &StorageBudget::uniform(1, 5), GreedyMode::Skip)
            .is_err());
        assert!(greedy_place(&one_row(&[1.0, 2.0]), &catalog, &StorageBudget::uniform(2, 5), GreedyMode::Skip)
            .is_err());
        let a = CachePlacement::empty(1, &catalog);
        let b = CachePlacement::empty(2, &catalog);
        assert!(placement_is_nested(&a, &b).is_err());
    }

    #[test]
    fn nesting_basics() {
        let catalog = Catalog::from_sizes(&[1, 2, 3], 1.0).unwrap();
        let zero = CachePlacement::empty(2, &catalog);
        let full = CachePlacement::full(2, &catalog);
        assert!(placement_is_nested(&zero, &full).unwrap());
        assert!(placement_is_nested(&full, &full).unwrap());
        assert!(!placement_is_nested(&full, &zero).unwrap());
    }

    #[test]
    fn skip_mode_is_not_nested_in_general() {
        let catalog = Catalog::from_sizes(&[5, 3], 1.0).unwrap();
        let pop = one_row(&[0.9, 0.1]);
        let small = greedy_place(&pop, &catalog, &StorageBudget::uniform(1, 4), GreedyMode::Skip).unwrap();
        let large = greedy_place(&pop, &catalog, &StorageBudget::uniform(1, 5), GreedyMode::Skip).unwrap();
        assert!(!placement_is_nested(&small, &large).unwrap());
    }

    #[test]
    fn percent_budget_conversion() {
        let catalog = Catalog::from_sizes(&[30, 70], 1.0).unwrap();
        assert_eq!(StorageBudget::from_percent(40.0, &catalog, 3).unwrap().per_station_bytes, vec![40; 3]);
        assert_eq!(StorageBudget::from_percent(0.0, &catalog, 1).unwrap().per_station_bytes, vec![0]);
        assert!(StorageBudget::from_percent(101.0, &catalog, 1).is_err());
        assert!(StorageBudget::from_percent(-1.0, &catalog, 1).is_err());
    }

    #[test]
    fn pairs_respect_budget() {
        let catalog = Catalog::from_sizes(&[4, 4], 1.0).unwrap();
        let budget = StorageBudget::uniform(1, 5);
        assert!(CachePlacement::from_pairs(1, &catalog, &budget, [(StationId(1), ContentId(1))]).is_ok());
        assert!(CachePlacement::from_pairs(
            1,
            &catalog,
            &budget,
            [(StationId(1), ContentId(1)), (StationId(1), ContentId(2))]
        )
        .is_err());
        assert!(CachePlacement::from_pairs(1, &catalog, &budget, [(StationId(2), ContentId(1))]).is_err());
    }
}
