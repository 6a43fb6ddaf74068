//! Rank-`k` regularized matrix factorization `P ≈ NᵀF` trained by stochastic
//! gradient descent on the observed entries only:
//!
//! ```text
//! minimize  Σ_{(i,j) observed} (n_iᵀ f_j − P_ij)²  +  μ (‖N‖²_F + ‖F‖²_F)
//! ```
//!
//! Each observed triple takes one step on its squared error plus a share of
//! the regularizer. A factor vector observed `c` times receives `1/c` of its
//! `μ‖·‖²` term per visit, so one epoch sums to the full objective rather than
//! over-regularizing frequently observed rows. The shrinkage is applied in
//! closed (proximal) form, which stays stable for any `μ`. Factor vectors with
//! no observation only see the regularizer and decay towards zero.

use std::fs;
use std::path::Path;

use rand::distr::{Distribution, Uniform};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{compensated_sum, PopularityError, PopularityMatrix, RatingSample, Result};
use crate::io_util::{fmt_f64, write_atomic};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorConfig {
    pub rank: usize,
    pub mu: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Initial factor entries are uniform on `±init_scale / √rank`.
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
}

fn default_init_scale() -> f64 {
    0.1
}

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig {
            rank: 16,
            mu: 0.02,
            learning_rate: 0.05,
            epochs: 400,
            init_scale: default_init_scale(),
        }
    }
}

impl FactorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(PopularityError::Domain("rank must be >= 1".into()));
        }
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return Err(PopularityError::Domain(format!("mu must be finite and >= 0, got {}", self.mu)));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(PopularityError::Domain(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.init_scale.is_finite() && self.init_scale > 0.0) {
            return Err(PopularityError::Domain(format!(
                "init scale must be positive, got {}",
                self.init_scale
            )));
        }
        if self.epochs == 0 {
            return Err(PopularityError::Domain("epochs must be >= 1".into()));
        }
        Ok(())
    }
}

/// Trained factors. Row `i` of `user_factors` is `n_i`, row `j` of
/// `content_factors` is `f_j` (i.e. the transposes of `N` and `F`).
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    pub rank: usize,
    pub rows: usize,
    pub cols: usize,
    pub user_factors: Vec<f64>,
    pub content_factors: Vec<f64>,
    pub config: FactorConfig,
    pub seed: u64,
    /// Training objective after each epoch.
    pub objective_history: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    rank: usize,
    rows: usize,
    cols: usize,
    mu: f64,
    learning_rate: f64,
    epochs: usize,
    #[serde(default = "default_init_scale")]
    init_scale: f64,
    seed: u64,
}

impl FactorModel {
    pub fn user(&self, i: usize) -> &[f64] {
        &self.user_factors[i * self.rank..(i + 1) * self.rank]
    }

    pub fn content(&self, j: usize) -> &[f64] {
        &self.content_factors[j * self.rank..(j + 1) * self.rank]
    }

    /// Unclamped `n_iᵀ f_j`.
    pub fn predict_entry(&self, row: usize, col: usize) -> f64 {
        dot(self.user(row), self.content(col))
    }

    /// Eq.-style training objective on `sample`.
    pub fn objective(&self, sample: &RatingSample) -> f64 {
        objective(&self.user_factors, &self.content_factors, self.rank, self.config.mu, sample)
    }

    pub fn frobenius_norms(&self) -> (f64, f64) {
        let sq = |v: &[f64]| compensated_sum(v.iter().map(|x| x * x)).sqrt();
        (sq(&self.user_factors), sq(&self.content_factors))
    }

    /// A JSON header line followed by `user,i,...` and `content,j,...` CSV rows.
    pub fn to_text(&self) -> String {
        let header = Header {
            rank: self.rank,
            rows: self.rows,
            cols: self.cols,
            mu: self.config.mu,
            learning_rate: self.config.learning_rate,
            epochs: self.config.epochs,
            init_scale: self.config.init_scale,
            seed: self.seed,
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        let k = self.rank;
        let mut emit = |kind: &str, flat: &[f64]| {
            for (i, row) in flat.chunks(k).enumerate() {
                out.push_str(kind);
                out.push_str(&format!(",{i}"));
                for x in row {
                    out.push(',');
                    out.push_str(&fmt_f64(*x));
                }
                out.push('\n');
            }
        };
        emit("user", &self.user_factors);
        emit("content", &self.content_factors);
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_text().as_bytes()).map_err(|source| PopularityError::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<FactorModel> {
        let text = fs::read_to_string(path).map_err(|source| PopularityError::Io {
            path: path.to_owned(),
            source,
        })?;
        FactorModel::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<FactorModel> {
        let mut lines = text.lines();
        let header: Header = serde_json::from_str(lines.next().unwrap_or(""))
            .map_err(|e| PopularityError::Parse(format!("factor header: {e}")))?;
        let k = header.rank;
        let mut users = vec![f64::NAN; header.rows * k];
        let mut contents = vec![f64::NAN; header.cols * k];
        for (n, line) in lines.enumerate() {
            let mut parts = line.split(',');
            let kind = parts.next().unwrap_or("");
            let idx: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| PopularityError::Parse(format!("factor line {}: bad index", n + 2)))?;
            let values: Vec<f64> = parts
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| PopularityError::Parse(format!("factor line {}: {e}", n + 2)))?;
            let (target, limit) = match kind {
                "user" => (&mut users, header.rows),
                "content" => (&mut contents, header.cols),
                _ => return Err(PopularityError::Parse(format!("factor line {}: unknown kind `{kind}`", n + 2))),
            };
            if idx >= limit || values.len() != k {
                return Err(PopularityError::Parse(format!("factor line {}: shape mismatch", n + 2)));
            }
            target[idx * k..(idx + 1) * k].copy_from_slice(&values);
        }
        if users.iter().chain(&contents).any(|x| !x.is_finite()) {
            return Err(PopularityError::Parse("factor file is missing rows".into()));
        }
        Ok(FactorModel {
            rank: k,
            rows: header.rows,
            cols: header.cols,
            user_factors: users,
            content_factors: contents,
            config: FactorConfig {
                rank: k,
                mu: header.mu,
                learning_rate: header.learning_rate,
                epochs: header.epochs,
                init_scale: header.init_scale,
            },
            seed: header.seed,
            objective_history: Vec::new(),
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn objective(users: &[f64], contents: &[f64], k: usize, mu: f64, sample: &RatingSample) -> f64 {
    let fit = compensated_sum(sample.triples.iter().map(|t| {
        let e = dot(&users[t.row * k..(t.row + 1) * k], &contents[t.col * k..(t.col + 1) * k]) - t.value;
        e * e
    }));
    let reg = compensated_sum(users.iter().chain(contents).map(|x| x * x));
    fit + mu * reg
}

pub fn factorize(sample: &RatingSample, config: &FactorConfig, seed: u64) -> Result<FactorModel> {
    config.validate()?;
    if sample.is_empty() {
        return Err(PopularityError::Insufficient("rating sample is empty".into()));
    }
    if let Some(t) = sample
        .triples
        .iter()
        .find(|t| t.row >= sample.rows || t.col >= sample.cols || !t.value.is_finite())
    {
        return Err(PopularityError::Shape(format!(
            "rating ({}, {}, {}) invalid for a {}x{} matrix",
            t.row, t.col, t.value, sample.rows, sample.cols
        )));
    }
    let k = config.rank;
    let (lr, mu) = (config.learning_rate, config.mu);
    let mut rng = seed::rng(seed);
    let scale = config.init_scale / (k as f64).sqrt();
    let init = Uniform::new_inclusive(-scale, scale).expect("valid init range");
    let mut users: Vec<f64> = (0..sample.rows * k).map(|_| init.sample(&mut rng)).collect();
    let mut contents: Vec<f64> = (0..sample.cols * k).map(|_| init.sample(&mut rng)).collect();

    let mut row_obs = vec![0usize; sample.rows];
    let mut col_obs = vec![0usize; sample.cols];
    for t in &sample.triples {
        row_obs[t.row] += 1;
        col_obs[t.col] += 1;
    }
    let row_shrink: Vec<f64> = row_obs.iter().map(|&c| 1.0 / (1.0 + lr * mu / c.max(1) as f64)).collect();
    let col_shrink: Vec<f64> = col_obs.iter().map(|&c| 1.0 / (1.0 + lr * mu / c.max(1) as f64)).collect();

    let mut order: Vec<usize> = (0..sample.triples.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut nu = vec![0.0; k];
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for &idx in &order {
            let t = sample.triples[idx];
            let u = &mut users[t.row * k..(t.row + 1) * k];
            let f = &mut contents[t.col * k..(t.col + 1) * k];
            let err = t.value - dot(u, f);
            nu.copy_from_slice(u);
            for d in 0..k {
                u[d] = (u[d] + lr * err * f[d]) * row_shrink[t.row];
                f[d] = (f[d] + lr * err * nu[d]) * col_shrink[t.col];
            }
        }
        // unobserved factors only feel the regularizer
        for (i, &c) in row_obs.iter().enumerate() {
            if c == 0 {
                users[i * k..(i + 1) * k].iter_mut().for_each(|x| *x *= row_shrink[i]);
            }
        }
        for (j, &c) in col_obs.iter().enumerate() {
            if c == 0 {
                contents[j * k..(j + 1) * k].iter_mut().for_each(|x| *x *= col_shrink[j]);
            }
        }
        let obj = objective(&users, &contents, k, mu, sample);
        if !obj.is_finite() {
            return Err(PopularityError::Diverged {
                epoch,
                message: format!("objective became {obj}"),
            });
        }
        history.push(obj);
    }

    Ok(FactorModel {
        rank: k,
        rows: sample.rows,
        cols: sample.cols,
        user_factors: users,
        content_factors: contents,
        config: *config,
        seed,
        objective_history: history,
    })
}

/// Dense `NᵀF` with negative entries clamped to zero, renormalized to sum to
/// one (uniform if everything clamps to zero).
pub fn predict(model: &FactorModel) -> PopularityMatrix {
    let mut entries = Vec::with_capacity(model.rows * model.cols);
    for i in 0..model.rows {
        for j in 0..model.cols {
            let v = model.predict_entry(i, j);
            entries.push(if v > 0.0 { v } else { 0.0 });
        }
    }
    PopularityMatrix::from_dense(model.rows, model.cols, entries)
        .unwrap_or_else(|_| PopularityMatrix::zeros(model.rows, model.cols))
        .normalize()
}

/// Root-mean-square error of raw predictions over the held-out triples.
pub fn holdout_rmse(model: &FactorModel, heldout: &RatingSample) -> Result<f64> {
    if heldout.is_empty() {
        return Err(PopularityError::Insufficient("held-out sample is empty".into()));
    }
    if heldout.triples.iter().any(|t| t.row >= model.rows || t.col >= model.cols) {
        return Err(PopularityError::Shape("held-out rating outside the model's shape".into()));
    }
    let sse = compensated_sum(heldout.triples.iter().map(|t| {
        let e = model.predict_entry(t.row, t.col) - t.value;
        e * e
    }));
    Ok((sse / heldout.len() as f64).sqrt())
}
