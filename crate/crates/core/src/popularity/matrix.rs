use std::fs::File;
use std::path::Path;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::{compensated_sum, PopularityError, Result};
use crate::catalog::Trace;
use crate::io_util::{fmt_f64, write_atomic};
use crate::seed;
use crate::simnet::Assignment;

/// Dense station × content popularity matrix (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    normalized: bool,
}

impl PopularityMatrix {
    pub fn from_dense(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(PopularityError::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(PopularityError::Domain(format!("popularity entries must be finite and >= 0, got {bad}")));
        }
        Ok(PopularityMatrix {
            rows,
            cols,
            entries,
            normalized: false,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        PopularityMatrix {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
            normalized: false,
        }
    }

    pub fn uniform(rows: usize, cols: usize) -> Self {
        let n = (rows * cols).max(1) as f64;
        PopularityMatrix {
            rows,
            cols,
            entries: vec![1.0 / n; rows * cols],
            normalized: true,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Whether the entries were rescaled to sum to one.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn sum(&self) -> f64 {
        compensated_sum(self.entries.iter().copied())
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries.iter().filter(|v| **v > 0.0).count()
    }

    /// Fraction of nonzero entries (the rating density).
    pub fn density(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        self.nonzero_count() as f64 / self.entries.len() as f64
    }

    /// Nonzero entries as `(row, col, value)` in row-major order.
    pub fn nonzeros(&self) -> impl Iterator<Item = Rating> + '_ {
        self.entries.iter().enumerate().filter(|(_, v)| **v > 0.0).map(move |(i, &value)| Rating {
            row: i / self.cols,
            col: i % self.cols,
            value,
        })
    }

    /// Column sums: the station-independent popularity of each content.
    pub fn global_vector(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|c| compensated_sum((0..self.rows).map(|r| self.get(r, c))))
            .collect()
    }

    /// Rescales so all entries sum to one. A zero matrix becomes uniform.
    pub fn normalize(mut self) -> Self {
        let total = self.sum();
        if total > 0.0 {
            for v in &mut self.entries {
                *v /= total;
            }
            self.normalized = true;
            self
        } else {
            PopularityMatrix::uniform(self.rows, self.cols)
        }
    }
}

/// Empirical request probabilities per (station, content): the count of
/// requests for content `f` assigned to station `m`, divided by `D`.
pub fn ground_truth_matrix(trace: &Trace, assignment: &Assignment, num_stations: usize) -> Result<PopularityMatrix> {
    if assignment.len() != trace.len() {
        return Err(PopularityError::Shape(format!(
            "assignment covers {} requests, trace has {}",
            assignment.len(),
            trace.len()
        )));
    }
    if trace.is_empty() {
        return Err(PopularityError::Insufficient("trace is empty".into()));
    }
    let cols = trace.catalog().len();
    let mut counts = vec![0u64; num_stations * cols];
    for (r, station) in trace.records().iter().zip(assignment.stations()) {
        let m = station.index();
        if m >= num_stations {
            return Err(PopularityError::Domain(format!(
                "request assigned to unknown station {station} (have {num_stations})"
            )));
        }
        counts[m * cols + r.content.index()] += 1;
    }
    let d = trace.len() as f64;
    Ok(PopularityMatrix {
        rows: num_stations,
        cols,
        entries: counts.into_iter().map(|n| n as f64 / d).collect(),
        normalized: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rating {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Observed `(row, col, value)` triples of a `rows × cols` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingSample {
    pub rows: usize,
    pub cols: usize,
    pub triples: Vec<Rating>,
    pub density: f64,
    pub seed: u64,
}

impl RatingSample {
    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn max_value(&self) -> f64 {
        self.triples.iter().map(|t| t.value).fold(0.0, f64::max)
    }

    /// Multiplies every value by `factor`.
    pub fn scaled(&self, factor: f64) -> RatingSample {
        let mut out = self.clone();
        for t in &mut out.triples {
            t.value *= factor;
        }
        out
    }

    /// Every nonzero entry of `matrix`.
    pub fn full(matrix: &PopularityMatrix) -> RatingSample {
        RatingSample {
            rows: matrix.rows(),
            cols: matrix.cols(),
            triples: matrix.nonzeros().collect(),
            density: 1.0,
            seed: 0,
        }
    }

    /// CSV `row,col,value` with zero-based indices.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,value\n");
        for t in &self.triples {
            out.push_str(&format!("{},{},{}\n", t.row, t.col, fmt_f64(t.value)));
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes()).map_err(|source| PopularityError::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn load_csv(path: &Path, rows: usize, cols: usize) -> Result<RatingSample> {
        let file = File::open(path).map_err(|source| PopularityError::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut rdr = csv::Reader::from_reader(file);
        let mut triples = Vec::new();
        for rec in rdr.deserialize::<Rating>() {
            let t = rec.map_err(|e| PopularityError::Parse(e.to_string()))?;
            if t.row >= rows || t.col >= cols {
                return Err(PopularityError::Shape(format!(
                    "rating ({}, {}) outside {rows}x{cols}",
                    t.row, t.col
                )));
            }
            triples.push(t);
        }
        Ok(RatingSample {
            rows,
            cols,
            triples,
            density: 1.0,
            seed: 0,
        })
    }
}

fn check_density(density: f64) -> Result<()> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(PopularityError::Domain(format!("density must lie in (0, 1], got {density}")));
    }
    Ok(())
}

/// Uniform sample without replacement of `round(density × nnz)` nonzero
/// entries, kept in row-major order.
pub fn sample_ratings(matrix: &PopularityMatrix, density: f64, seed: u64) -> Result<RatingSample> {
    Ok(split_ratings(matrix, density, seed)?.0)
}

/// Splits the nonzero entries into a sample of `round(density × nnz)` triples
/// and the held-out remainder.
pub fn split_ratings(matrix: &PopularityMatrix, density: f64, seed: u64) -> Result<(RatingSample, RatingSample)> {
    check_density(density)?;
    let all: Vec<Rating> = matrix.nonzeros().collect();
    let take = ((density * all.len() as f64).round() as usize).min(all.len());
    let mut rng = seed::rng(seed);
    let mut chosen = vec![false; all.len()];
    for i in index::sample(&mut rng, all.len(), take) {
        chosen[i] = true;
    }
    let (mut train, mut held) = (Vec::with_capacity(take), Vec::with_capacity(all.len() - take));
    for (t, keep) in all.into_iter().zip(chosen) {
        if keep {
            train.push(t);
        } else {
            held.push(t);
        }
    }
    let wrap = |triples, density| RatingSample {
        rows: matrix.rows(),
        cols: matrix.cols(),
        triples,
        density,
        seed,
    };
    Ok((wrap(train, density), wrap(held, 1.0 - density)))
}
