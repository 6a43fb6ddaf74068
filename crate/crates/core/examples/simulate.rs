//! One simulation run at a fixed storage budget, with the capacity audit on.

use edgecache::placement::{greedy_place, GreedyMode, StorageBudget};
use edgecache::popularity::{ground_truth_matrix, synth_trace, zipf_pmf, SizeLaw};
use edgecache::simnet::{assign_requests, simulate, NetworkConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trace = synth_trace(&zipf_pmf(1.36, 2000)?, 50_000, &SizeLaw::desk_default(), 4e6, 24_420.0, 4)?;
    let mut config = NetworkConfig::desk_default(16);
    config.audit = true;
    let assignment = assign_requests(&trace, 16, 4)?;
    let pop = ground_truth_matrix(&trace, &assignment, 16)?;

    for pct in [0.0, 40.0, 100.0] {
        let budget = StorageBudget::from_percent(pct, trace.catalog(), 16)?;
        let placement = greedy_place(&pop, trace.catalog(), &budget, GreedyMode::Stop)?;
        let result = simulate(&trace, &assignment, &placement, &config)?;
        let audit = result.audit.as_ref().expect("audit enabled");
        println!(
            "{pct:>5}%  eta {:.4}  rho {:.4}  ({} steps audited, {} violations)",
            result.satisfaction_ratio, result.backhaul_load, audit.steps_checked, audit.violations
        );
    }
    Ok(())
}
