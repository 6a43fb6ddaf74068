//! Greedy cache placement from ground-truth popularity at a few storage
//! budgets, with the nesting check between consecutive budgets.

use edgecache::placement::{greedy_place, placement_is_nested, GreedyMode, StorageBudget};
use edgecache::popularity::{ground_truth_matrix, synth_trace, zipf_pmf, SizeLaw};
use edgecache::simnet::{assign_requests, StationId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trace = synth_trace(&zipf_pmf(1.36, 2000)?, 50_000, &SizeLaw::desk_default(), 4e6, 24_420.0, 2)?;
    let assignment = assign_requests(&trace, 16, 2)?;
    let pop = ground_truth_matrix(&trace, &assignment, 16)?;

    let mut previous = None;
    for pct in [5.0, 20.0, 40.0, 80.0] {
        let budget = StorageBudget::from_percent(pct, trace.catalog(), 16)?;
        let placement = greedy_place(&pop, trace.catalog(), &budget, GreedyMode::Stop)?;
        let station1 = placement.station_contents(StationId(1));
        print!("{pct:>3}%: {:>5} cached pairs, station 1 holds {}", placement.cached_count(), station1.len());
        if let Some(prev) = &previous {
            print!(", nested: {}", placement_is_nested(prev, &placement)?);
        }
        println!();
        previous = Some(placement);
    }
    Ok(())
}
