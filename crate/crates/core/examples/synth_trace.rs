//! Synthesize a desk-scale trace and write it in both on-disk formats.
//!
//! cargo run --example synth_trace -- out_dir

use std::path::PathBuf;

use edgecache::popularity::{synth_trace, zipf_pmf, SizeLaw};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "synth_out".into()));
    std::fs::create_dir_all(&dir)?;
    let trace = synth_trace(&zipf_pmf(1.36, 2000)?, 50_000, &SizeLaw::desk_default(), 4e6, 24_420.0, 7)?;
    let (trace_csv, catalog_csv) = trace.save_normalized(&dir)?;
    trace.save_traces_table(&dir.join("traces_table.csv"))?;
    let (lo, hi) = trace.catalog().size_bounds().unwrap_or((0, 0));
    println!("{} requests, {} contents, sizes {lo}..{hi} bytes", trace.len(), trace.catalog().len());
    println!("wrote {} and {}", trace_csv.display(), catalog_csv.display());
    Ok(())
}
