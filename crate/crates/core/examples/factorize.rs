//! Collaborative filtering on a station-by-content popularity matrix: train
//! on 30% of the ratings, score the rest against a global-mean baseline.

use edgecache::popularity::{
    factorize, ground_truth_matrix, holdout_rmse, split_ratings, synth_trace, zipf_pmf, FactorConfig, SizeLaw,
};
use edgecache::simnet::assign_requests;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trace = synth_trace(&zipf_pmf(1.36, 500)?, 50_000, &SizeLaw::desk_default(), 4e6, 24_420.0, 3)?;
    let assignment = assign_requests(&trace, 16, 3)?;
    let ground = ground_truth_matrix(&trace, &assignment, 16)?;
    println!("ground truth density {:.2}%", 100.0 * ground.density());

    let (train, held) = split_ratings(&ground, 0.3, 11)?;
    let peak = train.max_value();
    let (train, held) = (train.scaled(1.0 / peak), held.scaled(1.0 / peak));
    let model = factorize(&train, &FactorConfig::default(), 5)?;

    let mean = train.triples.iter().map(|t| t.value).sum::<f64>() / train.len() as f64;
    let baseline = (held.triples.iter().map(|t| (t.value - mean).powi(2)).sum::<f64>() / held.len() as f64).sqrt();
    println!("objective {:.4e} -> {:.4e}", model.objective_history[0], model.objective_history.last().unwrap());
    println!("held-out rmse {:.4} (global mean {:.4})", holdout_rmse(&model, &held)?, baseline);
    Ok(())
}
