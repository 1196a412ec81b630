//! Template repository on disk.
//!
//! Layout under the store directory:
//!
//! - `manifest.json`: record and consumer counts, seed, config digest, content hash,
//!   creation time, the effective generation config and its run statistics;
//! - `templates.ndjson`: one [`TemplateRecord`] per line, ordered by scheduled instant then id;
//! - `consumers.ndjson`: one [`Consumer`] per line, ordered by id (absent for hand-built sets).
//!
//! The store is write-once. [`TemplateStore::open`] builds an instant index so
//! [`TemplateStore::fetch_window`] is two binary searches.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::generator::{Consumer, GeneratedWorkload, GenerationConfig, GenerationStats, TemplateRecord};
use crate::geo::GeoPoint;
use crate::time::{SECONDS_PER_DAY, SECONDS_PER_WEEK};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TEMPLATES_FILE: &str = "templates.ndjson";
pub const CONSUMERS_FILE: &str = "consumers.ndjson";
pub const FORMAT_VERSION: u32 = 1;

/// CSV export header, byte for byte.
pub const CSV_HEADER: &str =
    "_id,location.lat,location.lng,address,day,hour,minute,second,distance,expected_time,price,rating,vin,query_id";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub record_count: u64,
    pub consumer_count: u64,
    pub seed: Option<u64>,
    /// SHA-256 of the canonical JSON of the generation config.
    pub config_digest: Option<String>,
    /// SHA-256 of `templates.ndjson`.
    pub templates_sha256: String,
    /// Taken from `SOURCE_DATE_EPOCH` when set, else the wall clock.
    pub created_unix_secs: u64,
    pub query_ids: Vec<String>,
    pub config: Option<GenerationConfig>,
    pub stats: Option<GenerationStats>,
}

#[derive(Debug, Clone)]
pub struct TemplateStore {
    root: Option<PathBuf>,
    manifest: Manifest,
    records: Vec<TemplateRecord>,
    instants: Vec<u32>,
    consumers: Vec<Consumer>,
}

fn created_now() -> u64 {
    if let Some(v) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.trim().parse().ok()) {
        return v;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn sort_key(t: &TemplateRecord) -> (u32, u64) {
    (t.instant(), t.id)
}

fn ndjson_bytes<T: Serialize>(items: &[T]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(items.len() * 256);
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.push(b'\n');
    }
    Ok(out)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Persist a generated workload.
pub fn persist(workload: &GeneratedWorkload, path: &Path) -> Result<TemplateStore> {
    write_store(
        path,
        workload.templates.clone(),
        workload.consumers.clone(),
        Some(&workload.config),
        Some(workload.stats.clone()),
    )
}

/// Persist a hand-built template set without consumers or config provenance.
pub fn persist_templates(templates: &[TemplateRecord], path: &Path) -> Result<TemplateStore> {
    write_store(path, templates.to_vec(), Vec::new(), None, None)
}

fn write_store(
    path: &Path,
    mut records: Vec<TemplateRecord>,
    mut consumers: Vec<Consumer>,
    config: Option<&GenerationConfig>,
    stats: Option<GenerationStats>,
) -> Result<TemplateStore> {
    let mut seen = BTreeSet::new();
    for r in &records {
        r.validate()?;
        if !seen.insert(r.id) {
            return Err(Error::invariant(format!("template {}", r.id), "_id", "duplicate id"));
        }
    }
    records.sort_by_key(sort_key);
    consumers.sort_by_key(|c| c.consumer_id);

    fs::create_dir_all(path)?;
    let template_bytes = ndjson_bytes(&records)?;
    fs::write(path.join(TEMPLATES_FILE), &template_bytes)?;
    let consumers_path = path.join(CONSUMERS_FILE);
    if consumers.is_empty() {
        if consumers_path.exists() {
            fs::remove_file(&consumers_path)?;
        }
    } else {
        fs::write(&consumers_path, ndjson_bytes(&consumers)?)?;
    }

    let query_ids: BTreeSet<&str> = records.iter().map(|r| r.query_id.as_str()).collect();
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        record_count: records.len() as u64,
        consumer_count: consumers.len() as u64,
        seed: config.map(|c| c.seed),
        config_digest: config.map(GenerationConfig::digest),
        templates_sha256: sha256_hex(&template_bytes),
        created_unix_secs: created_now(),
        query_ids: query_ids.into_iter().map(String::from).collect(),
        config: config.cloned(),
        stats,
    };
    let mut f = BufWriter::new(File::create(path.join(MANIFEST_FILE))?);
    serde_json::to_writer_pretty(&mut f, &manifest)?;
    f.write_all(b"\n")?;
    f.flush()?;

    let instants = records.iter().map(TemplateRecord::instant).collect();
    Ok(TemplateStore {
        root: Some(path.to_path_buf()),
        manifest,
        records,
        instants,
        consumers,
    })
}

fn read_ndjson<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<(Vec<T>, Vec<u8>)> {
    let mut bytes = Vec::new();
    File::open(path)
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => e.into(),
        })?
        .read_to_end(&mut bytes)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(bytes.as_slice()).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line)
            .map_err(|e| Error::CorruptStore(format!("{what} line {}: {e}", i + 1)))?;
        out.push(item);
    }
    Ok((out, bytes))
}

impl TemplateStore {
    /// Build an in-memory store (no files) from a record set.
    pub fn from_records(mut records: Vec<TemplateRecord>) -> Result<Self> {
        for r in &records {
            r.validate()?;
        }
        records.sort_by_key(sort_key);
        let bytes = ndjson_bytes(&records)?;
        let query_ids: BTreeSet<&str> = records.iter().map(|r| r.query_id.as_str()).collect();
        let manifest = Manifest {
            format_version: FORMAT_VERSION,
            record_count: records.len() as u64,
            consumer_count: 0,
            seed: None,
            config_digest: None,
            templates_sha256: sha256_hex(&bytes),
            created_unix_secs: 0,
            query_ids: query_ids.into_iter().map(String::from).collect(),
            config: None,
            stats: None,
        };
        let instants = records.iter().map(TemplateRecord::instant).collect();
        Ok(TemplateStore { root: None, manifest, records, instants, consumers: Vec::new() })
    }

    pub fn open(path: &Path) -> Result<Self> {
        let manifest_path = path.join(MANIFEST_FILE);
        let text = fs::read_to_string(&manifest_path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(manifest_path.clone()),
            _ => e.into(),
        })?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| Error::CorruptStore(format!("manifest: {e}")))?;
        if manifest.format_version != FORMAT_VERSION {
            return Err(Error::CorruptStore(format!(
                "unsupported format version {}",
                manifest.format_version
            )));
        }
        let (records, bytes): (Vec<TemplateRecord>, _) = read_ndjson(&path.join(TEMPLATES_FILE), "templates")?;
        if records.len() as u64 != manifest.record_count {
            return Err(Error::CorruptStore(format!(
                "manifest says {} records, found {}",
                manifest.record_count,
                records.len()
            )));
        }
        if sha256_hex(&bytes) != manifest.templates_sha256 {
            return Err(Error::CorruptStore("templates.ndjson does not match manifest hash".into()));
        }
        if let Some(i) = records.windows(2).position(|w| sort_key(&w[0]) >= sort_key(&w[1])) {
            return Err(Error::CorruptStore(format!(
                "records out of order at template {}",
                records[i + 1].id
            )));
        }
        let consumers_path = path.join(CONSUMERS_FILE);
        let consumers = if consumers_path.exists() {
            read_ndjson(&consumers_path, "consumers")?.0
        } else {
            Vec::new()
        };
        if consumers.len() as u64 != manifest.consumer_count {
            return Err(Error::CorruptStore(format!(
                "manifest says {} consumers, found {}",
                manifest.consumer_count,
                consumers.len()
            )));
        }
        let instants = records.iter().map(TemplateRecord::instant).collect();
        Ok(TemplateStore { root: Some(path.to_path_buf()), manifest, records, instants, consumers })
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn records(&self) -> &[TemplateRecord] {
        &self.records
    }

    pub fn consumers(&self) -> &[Consumer] {
        &self.consumers
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn query_ids(&self) -> BTreeSet<&str> {
        self.records.iter().map(|r| r.query_id.as_str()).collect()
    }

    /// Records scheduled in `[start, start + window)` of `day`, in schedule order.
    ///
    /// A window running past midnight continues into the next day; it stops at the end of
    /// the week.
    pub fn fetch_window(&self, day: u8, start_second_of_day: u32, window_seconds: u32) -> Result<&[TemplateRecord]> {
        if day > 6 {
            return Err(Error::domain("day", format!("{day} not in 0..=6")));
        }
        if start_second_of_day >= SECONDS_PER_DAY {
            return Err(Error::domain("start_second_of_day", format!("{start_second_of_day} not in [0, 86400)")));
        }
        if window_seconds == 0 {
            return Err(Error::domain("window_seconds", "must be > 0"));
        }
        let start = u32::from(day) * SECONDS_PER_DAY + start_second_of_day;
        Ok(self.fetch_range(start, start.saturating_add(window_seconds)))
    }

    /// Records with week instant in `[start, end)`.
    pub fn fetch_range(&self, start: u32, end: u32) -> &[TemplateRecord] {
        let end = end.min(SECONDS_PER_WEEK);
        if start >= end {
            return &[];
        }
        let lo = self.instants.partition_point(|&t| t < start);
        let hi = self.instants.partition_point(|&t| t < end);
        &self.records[lo..hi]
    }

    /// Write the CSV projection; returns the number of data rows.
    pub fn export_csv(&self, path: &Path) -> Result<u64> {
        if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
        w.write_record(CSV_HEADER.split(','))?;
        for r in &self.records {
            w.write_record(CsvRow::from(r).cells())?;
        }
        w.flush()?;
        Ok(self.records.len() as u64)
    }
}

/// One exported row: exactly the repository columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub id: u64,
    pub location: GeoPoint,
    pub address: String,
    pub day: u8,
    pub hour: u8,
    pub minute: u8,
    pub second: u8,
    pub distance: Option<f64>,
    pub expected_time: Option<f64>,
    pub price: Option<f64>,
    pub rating: Option<f64>,
    pub vin: String,
    pub query_id: String,
}

impl From<&TemplateRecord> for CsvRow {
    fn from(t: &TemplateRecord) -> Self {
        CsvRow {
            id: t.id,
            location: t.location,
            address: t.address.clone(),
            day: t.day,
            hour: t.hour,
            minute: t.minute,
            second: t.second,
            distance: t.distance,
            expected_time: t.expected_time,
            price: t.price,
            rating: t.rating,
            vin: t.vin.clone(),
            query_id: t.query_id.clone(),
        }
    }
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl CsvRow {
    fn cells(&self) -> [String; 14] {
        [
            self.id.to_string(),
            self.location.lat.to_string(),
            self.location.lng.to_string(),
            self.address.clone(),
            self.day.to_string(),
            self.hour.to_string(),
            self.minute.to_string(),
            self.second.to_string(),
            opt_cell(self.distance),
            opt_cell(self.expected_time),
            opt_cell(self.price),
            opt_cell(self.rating),
            self.vin.clone(),
            self.query_id.clone(),
        ]
    }
}

fn parse_cell<T: std::str::FromStr>(row: usize, field: &str, cell: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    cell.parse()
        .map_err(|e: T::Err| Error::schema(format!("csv row {row}"), field, format!("`{cell}`: {e}")))
}

fn parse_opt(row: usize, field: &str, cell: &str) -> Result<Option<f64>> {
    if cell.is_empty() {
        Ok(None)
    } else {
        parse_cell(row, field, cell).map(Some)
    }
}

/// Read an exported CSV back. The header must match [`CSV_HEADER`] byte for byte.
pub fn import_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => e.into(),
    })?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    if first.trim_end_matches(['\r', '\n']) != CSV_HEADER {
        return Err(Error::schema("csv header", "header", format!("expected `{CSV_HEADER}`")));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
    let cols: Vec<&str> = CSV_HEADER.split(',').collect();
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        if rec.len() != cols.len() {
            return Err(Error::schema(format!("csv row {row}"), "row", format!("{} cells, expected {}", rec.len(), cols.len())));
        }
        let c = |k: usize| &rec[k];
        out.push(CsvRow {
            id: parse_cell(row, cols[0], c(0))?,
            location: GeoPoint { lat: parse_cell(row, cols[1], c(1))?, lng: parse_cell(row, cols[2], c(2))? },
            address: c(3).to_string(),
            day: parse_cell(row, cols[4], c(4))?,
            hour: parse_cell(row, cols[5], c(5))?,
            minute: parse_cell(row, cols[6], c(6))?,
            second: parse_cell(row, cols[7], c(7))?,
            distance: parse_opt(row, cols[8], c(8))?,
            expected_time: parse_opt(row, cols[9], c(9))?,
            price: parse_opt(row, cols[10], c(10))?,
            rating: parse_opt(row, cols[11], c(11))?,
            vin: c(12).to_string(),
            query_id: c(13).to_string(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn rec(id: u64, day: u8, hour: u8, minute: u8, second: u8) -> TemplateRecord {
        TemplateRecord {
            id,
            location: GeoPoint { lat: -37.81, lng: 144.96 },
            address: "Federation Square".into(),
            day,
            hour,
            minute,
            second,
            distance: Some(137.5),
            expected_time: None,
            price: Some(16.0),
            rating: None,
            vin: "13UNVER82367G4".into(),
            query_id: "parking_pull".into(),
            consumer_id: 1,
            profile_no: 13,
            distance_group: None,
            price_category: None,
        }
    }

    #[test]
    fn window_boundary_at_ten() {
        let s = TemplateStore::from_records(vec![
            rec(1, 0, 9, 59, 59),
            rec(2, 0, 10, 0, 0),
            rec(3, 0, 10, 8, 20),
            rec(4, 0, 10, 9, 59),
            rec(5, 0, 10, 10, 0),
        ])
        .unwrap();
        let ids: Vec<u64> = s.fetch_window(0, 36_000, 600).unwrap().iter().map(|r| r.id).collect();
        assert_eq!(ids, vec![2, 3, 4]);
    }

    #[test]
    fn bad_window_arguments() {
        let s = TemplateStore::from_records(vec![]).unwrap();
        assert!(s.fetch_window(7, 0, 10).is_err());
        assert!(s.fetch_window(0, 86_400, 10).is_err());
        assert!(s.fetch_window(0, 0, 0).is_err());
    }

    #[test]
    fn null_price_is_empty_cell() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = rec(1, 2, 3, 4, 5);
        r.price = None;
        r.address = "Bourke St, \"Mall\"".into();
        let s = TemplateStore::from_records(vec![r]).unwrap();
        let p = dir.path().join("t.csv");
        assert_eq!(s.export_csv(&p).unwrap(), 1);
        let text = fs::read_to_string(&p).unwrap();
        let line = text.lines().nth(1).unwrap();
        assert!(line.contains(",137.5,,,,13UNVER82367G4,"), "{line}");
        let back = import_csv(&p).unwrap();
        assert_eq!(back[0], CsvRow::from(&s.records()[0]));
    }

    #[test]
    fn open_detects_tampering() {
        let dir = tempfile::tempdir().unwrap();
        persist_templates(&[rec(1, 0, 0, 0, 0), rec(2, 0, 0, 0, 1)], dir.path()).unwrap();
        let p = dir.path().join(TEMPLATES_FILE);
        let text = fs::read_to_string(&p).unwrap().replace("Federation", "Federatiom");
        fs::write(&p, text).unwrap();
        assert!(matches!(TemplateStore::open(dir.path()), Err(Error::CorruptStore(_))));
    }

    #[test]
    fn missing_store() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(TemplateStore::open(&dir.path().join("nope")), Err(Error::MissingFile(_))));
    }
}
