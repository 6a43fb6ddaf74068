use rand::distr::weighted::WeightedIndex;
use rand::distr::{Distribution, Uniform};
use rand_distr::LogNormal;
use serde::{Deserialize, Serialize};

use super::{PopularityError, Result, ZipfModel};
use crate::catalog::{Catalog, ContentId, RequestRecord, Trace};
use crate::seed;

/// How content sizes are assigned in a synthetic catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SizeLaw {
    /// Every content has the same size.
    Constant { bytes: u64 },
    /// Log-normal with the given median and log-space deviation, rounded to
    /// whole bytes and clipped to `[min_bytes, max_bytes]`.
    LogNormal {
        median_bytes: f64,
        sigma: f64,
        min_bytes: u64,
        max_bytes: u64,
    },
    /// Explicit sizes, one per rank.
    Explicit { sizes: Vec<u64> },
}

impl SizeLaw {
    /// Heavy-tailed default: median 1 MB, `σ = 1.5`, clipped to `[1 B, 6.024 GB]`.
    pub fn desk_default() -> Self {
        SizeLaw::LogNormal {
            median_bytes: crate::MEGABYTE,
            sigma: 1.5,
            min_bytes: 1,
            max_bytes: 6_024_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SizeLaw::Constant { bytes: 0 } => Err(PopularityError::Domain("constant size must be positive".into())),
            SizeLaw::LogNormal {
                median_bytes,
                sigma,
                min_bytes,
                max_bytes,
            } if !(median_bytes.is_finite() && *median_bytes > 0.0)
                || !(sigma.is_finite() && *sigma >= 0.0)
                || *min_bytes == 0
                || min_bytes > max_bytes =>
            {
                Err(PopularityError::Domain(format!("invalid size law {self:?}")))
            }
            SizeLaw::Explicit { sizes } if sizes.contains(&0) => {
                Err(PopularityError::Domain("explicit sizes must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    fn sizes<R: rand::Rng>(&self, n: usize, rng: &mut R) -> Result<Vec<u64>> {
        self.validate()?;
        match self {
            SizeLaw::Constant { bytes } => Ok(vec![*bytes; n]),
            SizeLaw::LogNormal {
                median_bytes,
                sigma,
                min_bytes,
                max_bytes,
            } => {
                let dist = LogNormal::new(median_bytes.ln(), *sigma)
                    .map_err(|e| PopularityError::Domain(format!("log-normal: {e}")))?;
                Ok((0..n)
                    .map(|_| {
                        let x: f64 = dist.sample(rng);
                        (x.round() as u64).clamp(*min_bytes, *max_bytes)
                    })
                    .collect())
            }
            SizeLaw::Explicit { sizes } => {
                if sizes.len() != n {
                    return Err(PopularityError::Shape(format!(
                        "explicit sizes has {} entries for {n} contents",
                        sizes.len()
                    )));
                }
                Ok(sizes.clone())
            }
        }
    }
}

/// Draws `num_requests` i.i.d. requests from `model` (content id `r` is the
/// rank-`r` content) with arrival times uniform on `[0, duration_s]`.
pub fn synth_trace(
    model: &ZipfModel,
    num_requests: usize,
    size_law: &SizeLaw,
    bitrate_bytes_per_s: f64,
    duration_s: f64,
    seed: u64,
) -> Result<Trace> {
    if num_requests == 0 {
        return Err(PopularityError::Domain("num_requests must be >= 1".into()));
    }
    if !(duration_s.is_finite() && duration_s >= 0.0) {
        return Err(PopularityError::Domain(format!("invalid duration {duration_s}")));
    }
    let mut rng = seed::rng(seed);
    let sizes = size_law.sizes(model.num_contents, &mut rng)?;
    let catalog = Catalog::from_sizes(&sizes, bitrate_bytes_per_s)?;

    let pick = WeightedIndex::new(model.probabilities()).map_err(|e| PopularityError::Domain(e.to_string()))?;
    let contents: Vec<usize> = (0..num_requests).map(|_| pick.sample(&mut rng)).collect();
    let when = Uniform::new_inclusive(0.0, duration_s).map_err(|e| PopularityError::Domain(e.to_string()))?;
    let records = contents
        .into_iter()
        .enumerate()
        .map(|(i, c)| RequestRecord {
            arrival_time_s: when.sample(&mut rng),
            content: ContentId::from_index(c),
            session_id: i as u64,
        })
        .collect();
    Ok(Trace::new(records, duration_s, catalog)?)
}
