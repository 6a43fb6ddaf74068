//! Content library, request traces and traffic characterization.
//!
//! ## traces-table format
//! One request per line with a mandatory header:
//!
//! ```text
//! size_bytes,uri,frame_time_s,teid[,bitrate_bytes_per_s]
//! 5120,"http://example.com/a.mp4",0.25,17
//! ```
//!
//! Each distinct URI is one content. Rows whose `size_bytes` is empty, `0` or
//! `null` are dropped (the size probe returned nothing for them). Records are
//! stably re-sorted by time and content ids are assigned `1..F` in order of
//! first appearance.
//!
//! ## Normalized format
//! `ingest` emits a catalog CSV (`content_id,size_bytes,bitrate_bytes_per_s`)
//! and a trace CSV (`arrival_time_s,content_id,session_id`) that can be read
//! back without re-deducing the catalog.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufReader, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io_util::{fmt_f64, write_atomic};

/// Default content bitrate, 4 MByte/s.
pub const DEFAULT_BITRATE: f64 = 4.0 * crate::MEGABYTE;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("trace is empty")]
    EmptyTrace,
    #[error("invalid content {id}: {message}")]
    InvalidContent { id: u32, message: String },
    #[error("request {index}: {message}")]
    InvalidRecord { index: usize, message: String },
}

type Result<T> = std::result::Result<T, CatalogError>;

/// Dense content identifier in `1..=F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ContentId(pub u32);

impl ContentId {
    /// Zero-based position in the catalog.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(index: usize) -> Self {
        ContentId(index as u32 + 1)
    }
}

impl fmt::Display for ContentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Content {
    pub id: ContentId,
    pub size_bytes: u64,
    pub bitrate_bytes_per_s: f64,
    /// Request-URI the content was deduced from, if any.
    pub uri: Option<String>,
}

/// The content library. Ids are contiguous `1..=F`.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    contents: Vec<Content>,
    total_size_bytes: u64,
}

impl Catalog {
    pub fn new(contents: Vec<Content>) -> Result<Self> {
        let mut total: u64 = 0;
        for (i, c) in contents.iter().enumerate() {
            if c.id != ContentId::from_index(i) {
                return Err(CatalogError::InvalidContent {
                    id: c.id.0,
                    message: format!("expected id {} at position {i}", i + 1),
                });
            }
            if c.size_bytes == 0 {
                return Err(CatalogError::InvalidContent {
                    id: c.id.0,
                    message: "size must be positive".into(),
                });
            }
            if !(c.bitrate_bytes_per_s.is_finite() && c.bitrate_bytes_per_s > 0.0) {
                return Err(CatalogError::InvalidContent {
                    id: c.id.0,
                    message: format!("bitrate must be positive and finite, got {}", c.bitrate_bytes_per_s),
                });
            }
            total = total.checked_add(c.size_bytes).ok_or_else(|| CatalogError::InvalidContent {
                id: c.id.0,
                message: "total catalog size overflows u64".into(),
            })?;
        }
        Ok(Catalog {
            contents,
            total_size_bytes: total,
        })
    }

    /// Catalog with the given sizes and one shared bitrate.
    pub fn from_sizes(sizes: &[u64], bitrate_bytes_per_s: f64) -> Result<Self> {
        Catalog::new(
            sizes
                .iter()
                .enumerate()
                .map(|(i, &size_bytes)| Content {
                    id: ContentId::from_index(i),
                    size_bytes,
                    bitrate_bytes_per_s,
                    uri: None,
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.contents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contents.is_empty()
    }

    pub fn contents(&self) -> &[Content] {
        &self.contents
    }

    pub fn get(&self, id: ContentId) -> Option<&Content> {
        if id.0 == 0 {
            return None;
        }
        self.contents.get(id.index())
    }

    pub fn total_size_bytes(&self) -> u64 {
        self.total_size_bytes
    }

    pub fn sizes(&self) -> impl Iterator<Item = u64> + '_ {
        self.contents.iter().map(|c| c.size_bytes)
    }

    /// `(L_min, L_max)`, or `None` for an empty catalog.
    pub fn size_bounds(&self) -> Option<(u64, u64)> {
        let min = self.sizes().min()?;
        let max = self.sizes().max()?;
        Some((min, max))
    }

    /// `(B_min, B_max)`, or `None` for an empty catalog.
    pub fn bitrate_bounds(&self) -> Option<(f64, f64)> {
        let mut it = self.contents.iter().map(|c| c.bitrate_bytes_per_s);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), b| (lo.min(b), hi.max(b))))
    }

    /// Writes the companion catalog CSV `content_id,size_bytes,bitrate_bytes_per_s`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("content_id,size_bytes,bitrate_bytes_per_s\n");
        for c in &self.contents {
            out.push_str(&format!("{},{},{}\n", c.id, c.size_bytes, fmt_f64(c.bitrate_bytes_per_s)));
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes()).map_err(|source| CatalogError::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv_reader(path)?;
        expect_header(&mut rdr, &["content_id", "size_bytes", "bitrate_bytes_per_s"], &[])?;
        let mut contents = Vec::new();
        for row in rdr.records() {
            let row = row.map_err(csv_err)?;
            let line = line_of(&row);
            let id: u32 = parse_field(&row, 0, line, "content_id")?;
            let size_bytes: u64 = parse_field(&row, 1, line, "size_bytes")?;
            let bitrate_bytes_per_s: f64 = parse_field(&row, 2, line, "bitrate_bytes_per_s")?;
            contents.push(Content {
                id: ContentId(id),
                size_bytes,
                bitrate_bytes_per_s,
                uri: None,
            });
        }
        Catalog::new(contents)
    }
}

/// One request `d`: arrival time `τ(f_d)`, requested content `f_d` and the
/// opaque session (TEID) it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RequestRecord {
    pub arrival_time_s: f64,
    pub content: ContentId,
    pub session_id: u64,
}

/// Time-ordered requests over a catalog, spanning `[0, duration_s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    records: Vec<RequestRecord>,
    duration_s: f64,
    catalog: Catalog,
}

impl Trace {
    /// Builds a trace, stably sorting `records` by arrival time.
    pub fn new(mut records: Vec<RequestRecord>, duration_s: f64, catalog: Catalog) -> Result<Self> {
        if !(duration_s.is_finite() && duration_s >= 0.0) {
            return Err(CatalogError::InvalidRecord {
                index: 0,
                message: format!("duration must be finite and nonnegative, got {duration_s}"),
            });
        }
        for (index, r) in records.iter().enumerate() {
            if !(r.arrival_time_s.is_finite() && (0.0..=duration_s).contains(&r.arrival_time_s)) {
                return Err(CatalogError::InvalidRecord {
                    index,
                    message: format!("arrival time {} outside [0, {duration_s}]", r.arrival_time_s),
                });
            }
            if catalog.get(r.content).is_none() {
                return Err(CatalogError::InvalidRecord {
                    index,
                    message: format!("content {} not in catalog", r.content),
                });
            }
        }
        records.sort_by(|a, b| a.arrival_time_s.total_cmp(&b.arrival_time_s));
        Ok(Trace {
            records,
            duration_s,
            catalog,
        })
    }

    pub fn records(&self) -> &[RequestRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.duration_s
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn content_of(&self, request: usize) -> &Content {
        &self.catalog.contents[self.records[request].content.index()]
    }

    /// Writes the trace in traces-table form, including the bitrate column.
    pub fn to_traces_table(&self) -> String {
        let mut out = String::from("size_bytes,uri,frame_time_s,teid,bitrate_bytes_per_s\n");
        for r in &self.records {
            let c = &self.catalog.contents[r.content.index()];
            let uri = c.uri.clone().unwrap_or_else(|| format!("content://{}", c.id));
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                c.size_bytes,
                quote(&uri),
                fmt_f64(r.arrival_time_s),
                r.session_id,
                fmt_f64(c.bitrate_bytes_per_s)
            ));
        }
        out
    }

    pub fn save_traces_table(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_traces_table().as_bytes()).map_err(|source| CatalogError::Io {
            path: path.to_owned(),
            source,
        })
    }

    /// Normalized trace CSV `arrival_time_s,content_id,session_id`.
    pub fn to_normalized_csv(&self) -> String {
        let mut out = String::from("arrival_time_s,content_id,session_id\n");
        for r in &self.records {
            out.push_str(&format!("{},{},{}\n", fmt_f64(r.arrival_time_s), r.content, r.session_id));
        }
        out
    }

    /// Writes `trace.csv` and `catalog.csv` into `dir`.
    pub fn save_normalized(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        let trace_path = dir.join("trace.csv");
        let catalog_path = dir.join("catalog.csv");
        self.catalog.save_csv(&catalog_path)?;
        write_atomic(&trace_path, self.to_normalized_csv().as_bytes()).map_err(|source| CatalogError::Io {
            path: trace_path.clone(),
            source,
        })?;
        Ok((trace_path, catalog_path))
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// Input layout accepted by [`load_trace`].
#[derive(Debug, Clone, PartialEq)]
pub enum TraceFormat {
    /// `size_bytes,uri,frame_time_s,teid[,bitrate_bytes_per_s]`; rows without
    /// a bitrate column use `default_bitrate`.
    TracesTable { default_bitrate: f64 },
    /// `arrival_time_s,content_id,session_id` with a companion catalog CSV.
    Normalized { catalog: PathBuf },
}

impl Default for TraceFormat {
    fn default() -> Self {
        TraceFormat::TracesTable {
            default_bitrate: DEFAULT_BITRATE,
        }
    }
}

pub fn load_trace(path: &Path, format: &TraceFormat) -> Result<Trace> {
    match format {
        TraceFormat::TracesTable { default_bitrate } => {
            let file = File::open(path).map_err(|source| CatalogError::Io {
                path: path.to_owned(),
                source,
            })?;
            parse_traces_table(BufReader::new(file), *default_bitrate)
        }
        TraceFormat::Normalized { catalog } => {
            let catalog = Catalog::load_csv(catalog)?;
            load_normalized(path, catalog)
        }
    }
}

/// Parses traces-table CSV from any reader.
pub fn parse_traces_table<R: Read>(input: R, default_bitrate: f64) -> Result<Trace> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
    let has_bitrate = expect_header(
        &mut rdr,
        &["size_bytes", "uri", "frame_time_s", "teid"],
        &["bitrate_bytes_per_s"],
    )?;
    let width = if has_bitrate { 5 } else { 4 };

    struct Row {
        size: u64,
        uri: String,
        time: f64,
        teid: u64,
        bitrate: f64,
    }
    let mut rows = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_err)?;
        let line = line_of(&row);
        if row.len() == 1 && row[0].trim().is_empty() {
            continue;
        }
        if row.len() != width {
            return Err(CatalogError::Parse {
                line,
                message: format!("expected {width} fields, found {}", row.len()),
            });
        }
        let size_field = row[0].trim();
        if size_field.is_empty() || size_field == "0" || size_field.eq_ignore_ascii_case("null") {
            continue;
        }
        let size: u64 = parse_field(&row, 0, line, "size_bytes")?;
        if size == 0 {
            continue;
        }
        let time: f64 = parse_field(&row, 2, line, "frame_time_s")?;
        if !(time.is_finite() && time >= 0.0) {
            return Err(CatalogError::Parse {
                line,
                message: format!("frame_time_s must be finite and nonnegative, got {time}"),
            });
        }
        let teid: u64 = parse_field(&row, 3, line, "teid")?;
        let bitrate = if has_bitrate {
            let b: f64 = parse_field(&row, 4, line, "bitrate_bytes_per_s")?;
            if !(b.is_finite() && b > 0.0) {
                return Err(CatalogError::Parse {
                    line,
                    message: format!("bitrate_bytes_per_s must be positive, got {b}"),
                });
            }
            b
        } else {
            default_bitrate
        };
        rows.push(Row {
            size,
            uri: row[1].to_string(),
            time,
            teid,
            bitrate,
        });
    }
    if rows.is_empty() {
        return Err(CatalogError::EmptyTrace);
    }
    rows.sort_by(|a, b| a.time.total_cmp(&b.time));

    let mut ids: HashMap<String, ContentId> = HashMap::new();
    let mut contents = Vec::new();
    let mut records = Vec::with_capacity(rows.len());
    for row in rows {
        let next = ContentId::from_index(contents.len());
        let id = *ids.entry(row.uri.clone()).or_insert(next);
        if id == next {
            contents.push(Content {
                id,
                size_bytes: row.size,
                bitrate_bytes_per_s: row.bitrate,
                uri: Some(row.uri),
            });
        }
        records.push(RequestRecord {
            arrival_time_s: row.time,
            content: id,
            session_id: row.teid,
        });
    }
    let duration = records.last().map_or(0.0, |r| r.arrival_time_s);
    Trace::new(records, duration, Catalog::new(contents)?)
}

/// Reads a normalized trace CSV against an already loaded catalog.
pub fn load_normalized(path: &Path, catalog: Catalog) -> Result<Trace> {
    let mut rdr = csv_reader(path)?;
    expect_header(&mut rdr, &["arrival_time_s", "content_id", "session_id"], &[])?;
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_err)?;
        let line = line_of(&row);
        let arrival_time_s: f64 = parse_field(&row, 0, line, "arrival_time_s")?;
        let content: u32 = parse_field(&row, 1, line, "content_id")?;
        let session_id: u64 = parse_field(&row, 2, line, "session_id")?;
        if catalog.get(ContentId(content)).is_none() {
            return Err(CatalogError::Parse {
                line,
                message: format!("content_id {content} not in catalog"),
            });
        }
        if !(arrival_time_s.is_finite() && arrival_time_s >= 0.0) {
            return Err(CatalogError::Parse {
                line,
                message: format!("arrival_time_s must be finite and nonnegative, got {arrival_time_s}"),
            });
        }
        records.push(RequestRecord {
            arrival_time_s,
            content: ContentId(content),
            session_id,
        });
    }
    if records.is_empty() {
        return Err(CatalogError::EmptyTrace);
    }
    let duration = records.iter().map(|r| r.arrival_time_s).fold(0.0, f64::max);
    Trace::new(records, duration, catalog)
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|source| CatalogError::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(file))
}

/// Checks the header row; returns whether every optional column is present.
fn expect_header<R: Read>(rdr: &mut csv::Reader<R>, required: &[&str], optional: &[&str]) -> Result<bool> {
    let mut header = csv::StringRecord::new();
    let got = rdr.read_record(&mut header).map_err(csv_err)?;
    if !got {
        return Err(CatalogError::EmptyTrace);
    }
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    let full: Vec<&str> = required.iter().chain(optional).copied().collect();
    if names == required {
        Ok(optional.is_empty())
    } else if !optional.is_empty() && names == full {
        Ok(true)
    } else {
        Err(CatalogError::Parse {
            line: 1,
            message: format!("expected header `{}`, found `{}`", required.join(","), names.join(",")),
        })
    }
}

fn line_of(row: &csv::StringRecord) -> u64 {
    row.position().map_or(0, |p| p.line())
}

fn csv_err(e: csv::Error) -> CatalogError {
    let line = e.position().map_or(0, |p| p.line());
    CatalogError::Parse {
        line,
        message: e.to_string(),
    }
}

fn parse_field<T: std::str::FromStr>(row: &csv::StringRecord, i: usize, line: u64, name: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    let raw = row.get(i).ok_or_else(|| CatalogError::Parse {
        line,
        message: format!("missing field {name}"),
    })?;
    raw.trim().parse().map_err(|e| CatalogError::Parse {
        line,
        message: format!("invalid {name} `{raw}`: {e}"),
    })
}

/// Number of requests per content, indexed by content position.
pub fn request_counts(trace: &Trace) -> Vec<u64> {
    let mut counts = vec![0u64; trace.catalog.len()];
    for r in &trace.records {
        counts[r.content.index()] += 1;
    }
    counts
}

/// Contents ranked by decreasing request count, ties broken by lower id.
pub fn popularity_ranking(trace: &Trace) -> Result<Vec<(ContentId, u64)>> {
    if trace.is_empty() {
        return Err(CatalogError::EmptyTrace);
    }
    let mut ranked: Vec<(ContentId, u64)> = request_counts(trace)
        .into_iter()
        .enumerate()
        .map(|(i, n)| (ContentId::from_index(i), n))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(ranked)
}

/// Request counts of every catalog content in nonincreasing order. Contents
/// never requested contribute trailing zeros; the counts sum to `D`.
pub fn popularity_counts(trace: &Trace) -> Result<Vec<u64>> {
    Ok(popularity_ranking(trace)?.into_iter().map(|(_, n)| n).collect())
}

/// `(rank, cumulative_bytes)` over contents in popularity order, ending at
/// the catalog's total size.
pub fn cumulative_size_curve(trace: &Trace) -> Result<Vec<(usize, u64)>> {
    let ranked = popularity_ranking(trace)?;
    let mut acc = 0u64;
    Ok(ranked
        .into_iter()
        .enumerate()
        .map(|(i, (id, _))| {
            acc += trace.catalog.contents[id.index()].size_bytes;
            (i + 1, acc)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(body: &str) -> String {
        format!("size_bytes,uri,frame_time_s,teid\n{body}")
    }

    #[test]
    fn three_rows_two_uris() {
        let t = parse_traces_table(
            table("10,\"a\",0.0,1\n20,\"b\",1.0,1\n10,\"a\",2.0,2\n").as_bytes(),
            DEFAULT_BITRATE,
        )
        .unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.catalog().len(), 2);
        assert_eq!(t.catalog().total_size_bytes(), 30);
        assert_eq!(t.duration_s(), 2.0);
    }

    #[test]
    fn zero_and_null_sizes_dropped() {
        let t = parse_traces_table(
            table("0,\"a\",0.0,1\n,\"b\",0.5,1\nnull,\"c\",0.7,1\n5,\"d\",1.0,1\n").as_bytes(),
            DEFAULT_BITRATE,
        )
        .unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.catalog().contents()[0].uri.as_deref(), Some("d"));
    }

    #[test]
    fn malformed_row_names_line() {
        let err = parse_traces_table(
            table("1,\"a\",0,1\n2,\"b\",1,1\nx,\"c\",2,1\n").as_bytes(),
            DEFAULT_BITRATE,
        )
        .unwrap_err();
        match err {
            CatalogError::Parse { line, .. } => assert_eq!(line, 4),
            e => panic!("unexpected {e:?}"),
        }
        assert!(err.to_string().starts_with("line 4"));
    }

    #[test]
    fn empty_inputs() {
        assert!(matches!(parse_traces_table("".as_bytes(), 1.0), Err(CatalogError::EmptyTrace)));
        assert!(matches!(parse_traces_table(table("").as_bytes(), 1.0), Err(CatalogError::EmptyTrace)));
        assert!(matches!(
            parse_traces_table(table("0,\"a\",1,1\n").as_bytes(), 1.0),
            Err(CatalogError::EmptyTrace)
        ));
    }

    #[test]
    fn bad_header_rejected() {
        let err = parse_traces_table("size,uri,time,teid\n1,a,0,1\n".as_bytes(), 1.0).unwrap_err();
        assert!(matches!(err, CatalogError::Parse { line: 1, .. }));
    }

    #[test]
    fn extended_bitrate_column() {
        let t = parse_traces_table(
            "size_bytes,uri,frame_time_s,teid,bitrate_bytes_per_s\n8,\"a\",0,1,2.5\n".as_bytes(),
            DEFAULT_BITRATE,
        )
        .unwrap();
        assert_eq!(t.catalog().contents()[0].bitrate_bytes_per_s, 2.5);
    }

    #[test]
    fn ids_follow_first_appearance_in_time() {
        let t = parse_traces_table(table("1,\"late\",5,1\n1,\"early\",1,1\n").as_bytes(), 1.0).unwrap();
        assert_eq!(t.catalog().contents()[0].uri.as_deref(), Some("early"));
        assert_eq!(t.records()[0].content, ContentId(1));
    }

    #[test]
    fn counts_and_curves() {
        let t = parse_traces_table(table("10,\"a\",0,1\n20,\"b\",1,1\n10,\"a\",2,1\n").as_bytes(), 1.0).unwrap();
        assert_eq!(popularity_counts(&t).unwrap(), vec![2, 1]);
        assert_eq!(cumulative_size_curve(&t).unwrap(), vec![(1, 10), (2, 30)]);

        let single = parse_traces_table(table("7,\"a\",0,1\n7,\"a\",1,1\n7,\"a\",3,1\n").as_bytes(), 1.0).unwrap();
        assert_eq!(popularity_counts(&single).unwrap(), vec![3]);
    }

    #[test]
    fn equal_sizes_give_linear_curve() {
        let catalog = Catalog::from_sizes(&[5; 6], 1.0).unwrap();
        let records = (0..20)
            .map(|i| RequestRecord {
                arrival_time_s: i as f64,
                content: ContentId::from_index(i % 4),
                session_id: 0,
            })
            .collect();
        let t = Trace::new(records, 20.0, catalog).unwrap();
        let curve = cumulative_size_curve(&t).unwrap();
        assert_eq!(curve.len(), 6);
        for (r, bytes) in curve {
            assert_eq!(bytes, r as u64 * 5);
        }
    }

    #[test]
    fn ties_break_by_lower_id() {
        let catalog = Catalog::from_sizes(&[1, 2, 3], 1.0).unwrap();
        let records = [3, 1, 2, 3]
            .iter()
            .enumerate()
            .map(|(i, &c)| RequestRecord {
                arrival_time_s: i as f64,
                content: ContentId(c),
                session_id: 0,
            })
            .collect();
        let t = Trace::new(records, 4.0, catalog).unwrap();
        let ids: Vec<u32> = popularity_ranking(&t).unwrap().iter().map(|(id, _)| id.0).collect();
        assert_eq!(ids, vec![3, 1, 2]);
    }

    #[test]
    fn catalog_rejects_bad_contents() {
        assert!(Catalog::from_sizes(&[1, 0], 1.0).is_err());
        assert!(Catalog::from_sizes(&[1], 0.0).is_err());
        let c = Catalog::from_sizes(&[3, 9, 4], 2.0).unwrap();
        assert_eq!(c.size_bounds(), Some((3, 9)));
        assert_eq!(c.bitrate_bounds(), Some((2.0, 2.0)));
        assert!(c.get(ContentId(0)).is_none());
        assert!(c.get(ContentId(4)).is_none());
    }

    #[test]
    fn trace_rejects_out_of_range_records() {
        let catalog = Catalog::from_sizes(&[1], 1.0).unwrap();
        let late = RequestRecord {
            arrival_time_s: 11.0,
            content: ContentId(1),
            session_id: 0,
        };
        assert!(Trace::new(vec![late], 10.0, catalog.clone()).is_err());
        let unknown = RequestRecord {
            arrival_time_s: 1.0,
            content: ContentId(2),
            session_id: 0,
        };
        assert!(Trace::new(vec![unknown], 10.0, catalog).is_err());
    }
}
