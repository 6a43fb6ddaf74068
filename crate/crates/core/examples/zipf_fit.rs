//! Least-squares Zipf fits on exact and sampled request counts.

use edgecache::popularity::{fit_zipf, zipf_pmf};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for alpha in [0.6, 1.0, 1.36, 2.0] {
        let exact: Vec<f64> = zipf_pmf(alpha, 1000)?.probabilities().iter().map(|p| p * 1e6).collect();
        println!("alpha {alpha:.2} -> fitted {:.6}", fit_zipf(&exact)?);
    }
    Ok(())
}
