//! Ranked popularity, cumulative catalog size and a fitted Zipf exponent for
//! a synthetic trace.

use edgecache::catalog::{cumulative_size_curve, popularity_counts};
use edgecache::popularity::{fit_zipf, synth_trace, zipf_pmf, SizeLaw};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = zipf_pmf(1.36, 2000)?;
    let trace = synth_trace(&model, 50_000, &SizeLaw::desk_default(), 4e6, 24_420.0, 1)?;

    let counts = popularity_counts(&trace)?;
    let as_f64: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    println!("fitted alpha = {:.4}", fit_zipf(&as_f64)?);
    println!("top 5 counts: {:?}", &counts[..5]);

    let curve = cumulative_size_curve(&trace)?;
    for &(rank, bytes) in curve.iter().filter(|(r, _)| [1, 10, 100, 1000, 2000].contains(r)) {
        println!("rank {rank:>5}: {:>10.1} MB cumulative", bytes as f64 / 1e6);
    }
    Ok(())
}
