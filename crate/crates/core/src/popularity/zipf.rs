use serde::{Deserialize, Serialize};

use super::{compensated_sum, PopularityError, Result};

/// Zipf-like popularity over ranks `1..=F`: `P(f) = Ω / f^α` with
/// `Ω = (Σ_{i=1..F} i^{-α})^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZipfModel {
    pub alpha: f64,
    pub num_contents: usize,
    pub omega: f64,
}

pub fn zipf_pmf(alpha: f64, num_contents: usize) -> Result<ZipfModel> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(PopularityError::Domain(format!("alpha must be finite and >= 0, got {alpha}")));
    }
    if num_contents == 0 {
        return Err(PopularityError::Domain("num_contents must be >= 1".into()));
    }
    // smallest terms first
    let norm = compensated_sum((1..=num_contents).rev().map(|i| (i as f64).powf(-alpha)));
    Ok(ZipfModel {
        alpha,
        num_contents,
        omega: 1.0 / norm,
    })
}

impl ZipfModel {
    /// Probability of the content at 1-based `rank`; zero outside `1..=F`.
    pub fn pmf(&self, rank: usize) -> f64 {
        if rank == 0 || rank > self.num_contents {
            return 0.0;
        }
        self.omega * (rank as f64).powf(-self.alpha)
    }

    /// The full pmf, index 0 holding rank 1.
    pub fn probabilities(&self) -> Vec<f64> {
        (1..=self.num_contents).map(|r| self.pmf(r)).collect()
    }
}

/// Least-squares Zipf exponent: `-slope` of the OLS line through
/// `(ln rank, ln count)` over every rank whose count is positive. `counts[0]`
/// is rank 1.
pub fn fit_zipf(counts: &[f64]) -> Result<f64> {
    let points: Vec<(f64, f64)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0.0 && c.is_finite())
        .map(|(i, &c)| (((i + 1) as f64).ln(), c.ln()))
        .collect();
    if points.len() < 2 {
        return Err(PopularityError::Insufficient(format!(
            "zipf fit needs at least 2 positive counts, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mean_x = compensated_sum(points.iter().map(|p| p.0)) / n;
    let mean_y = compensated_sum(points.iter().map(|p| p.1)) / n;
    let sxy = compensated_sum(points.iter().map(|&(x, y)| (x - mean_x) * (y - mean_y)));
    let sxx = compensated_sum(points.iter().map(|&(x, _)| (x - mean_x) * (x - mean_x)));
    Ok(-sxy / sxx)
}

/// [`fit_zipf`] over integer request counts.
pub fn fit_zipf_counts(counts: &[u64]) -> Result<f64> {
    let as_f64: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    fit_zipf(&as_f64)
}
