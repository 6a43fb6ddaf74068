//! Satisfaction and backhaul load against storage size for ground-truth and
//! CF popularity, printed as CSV.

use edgecache::experiment::{storage_sweep, SweepSpec};
use edgecache::popularity::{synth_trace, zipf_pmf, SizeLaw};
use edgecache::seed::SeedSet;
use edgecache::simnet::NetworkConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seeds = SeedSet::from_master(0);
    let trace = synth_trace(&zipf_pmf(1.36, 2000)?, 50_000, &SizeLaw::desk_default(), 4e6, 24_420.0, seeds.trace)?;
    let spec = SweepSpec { seeds, ..SweepSpec::default() };
    let result = storage_sweep(&trace, &NetworkConfig::desk_default(16), &spec)?;
    print!("{}", result.satisfaction_csv());
    print!("{}", result.backhaul_csv());
    Ok(())
}
