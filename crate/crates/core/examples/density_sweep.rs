//! RMSE between the ground-truth and CF satisfaction curves as the CF
//! training density grows.

use edgecache::experiment::{density_csv, density_sweep, SweepSpec};
use edgecache::popularity::{synth_trace, zipf_pmf, SizeLaw};
use edgecache::seed::SeedSet;
use edgecache::simnet::NetworkConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seeds = SeedSet::from_master(0);
    let trace = synth_trace(&zipf_pmf(1.36, 2000)?, 50_000, &SizeLaw::desk_default(), 4e6, 24_420.0, seeds.trace)?;
    let spec = SweepSpec {
        storage_percents: vec![0.0, 10.0, 20.0, 40.0, 60.0, 80.0, 100.0],
        seeds,
        ..SweepSpec::default()
    };
    let points = density_sweep(&trace, &NetworkConfig::desk_default(16), &[5.0, 20.0, 60.0, 100.0], &spec, 3)?;
    print!("{}", density_csv(&points));
    Ok(())
}
