//! Parse a traces-table CSV and print the deduced catalog.
//!
//! cargo run --example ingest_traces -- path/to/traces.csv

use std::path::PathBuf;

use edgecache::catalog::{load_trace, TraceFormat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/traces_table.csv")));
    let trace = load_trace(&path, &TraceFormat::TracesTable { default_bitrate: 4e6 })?;
    println!("{} requests over {:.1} s", trace.len(), trace.duration_s());
    for c in trace.catalog().contents() {
        println!("content {:>4}  {:>12} bytes  {}", c.id.0, c.size_bytes, c.uri.as_deref().unwrap_or("-"));
    }
    Ok(())
}
