//! Source datasets: place popularity, car parks, vehicles and an optional traffic matrix.
//!
//! File formats:
//!
//! - places: JSON array of `{place_id, name, lat, lng, min_time, max_time, populartimes}`
//!   where `populartimes` maps `"Monday"`..`"Sunday"` to 24 integers in `[0, 100]`.
//! - car parks: CSV with header [`CARPARK_HEADER`]; each `opening_*` cell is
//!   `HH:MM-HH:MM[;HH:MM-HH:MM]` or `closed`.
//! - vehicles: CSV with header `vin,height,length,width`, meters with three decimals.
//! - traffic (optional): a JSON object shaped like `populartimes`.
//!
//! [`bootstrap_fixtures`] writes seeded synthetic files in exactly these formats.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{self, GeoPoint};
use crate::rng;
use crate::time::{format_clock, parse_clock, DAY_NAMES, SECONDS_PER_DAY};

pub type HourMatrix = [[u8; 24]; 7];

pub const CARPARK_HEADER: &str = "carpark_id,name,lat,lng,capacity,price_per_hour,rating,max_height,opening_mon,opening_tue,opening_wed,opening_thu,opening_fri,opening_sat,opening_sun";
pub const VEHICLE_HEADER: &str = "vin,height,length,width";

pub const PLACES_FILE: &str = "places.json";
pub const CARPARKS_FILE: &str = "carparks.csv";
pub const VEHICLES_FILE: &str = "vehicles.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopularityProfile {
    pub place_id: String,
    pub name: String,
    pub location: GeoPoint,
    /// Average minimum stay, minutes.
    pub min_time: f64,
    /// Average maximum stay, minutes.
    pub max_time: f64,
    /// Relative popularity indexed `[day][hour]`, Monday first.
    pub rp: HourMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpeningWindow {
    pub open_sec: u32,
    pub close_sec: u32,
}

impl OpeningWindow {
    pub fn contains(&self, second_of_day: u32) -> bool {
        (self.open_sec..self.close_sec).contains(&second_of_day)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarPark {
    pub carpark_id: String,
    pub name: String,
    pub location: GeoPoint,
    pub opening: [Vec<OpeningWindow>; 7],
    pub capacity: u32,
    pub price_per_hour: f64,
    pub rating: f64,
    pub max_height: f64,
}

impl CarPark {
    pub fn is_open(&self, day: u8, second_of_day: u32) -> bool {
        self.opening[day as usize % 7]
            .iter()
            .any(|w| w.contains(second_of_day))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleSpec {
    pub vin: String,
    pub height: f64,
    pub length: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetBundle {
    pub places: Vec<PopularityProfile>,
    pub carparks: Vec<CarPark>,
    pub vehicles: Vec<VehicleSpec>,
    pub center: GeoPoint,
    pub traffic: Option<HourMatrix>,
}

impl DatasetBundle {
    pub fn place(&self, place_id: &str) -> Option<&PopularityProfile> {
        self.places.iter().find(|p| p.place_id == place_id)
    }

    pub fn validate(&self) -> Result<()> {
        if self.places.is_empty() {
            return Err(Error::schema("places", "places", "no places"));
        }
        if self.carparks.is_empty() {
            return Err(Error::schema("carparks", "carparks", "no car parks"));
        }
        if self.vehicles.is_empty() {
            return Err(Error::schema("vehicles", "vehicles", "no vehicles"));
        }
        self.center.validate()?;
        let mut ids = HashSet::new();
        for p in &self.places {
            validate_place(p)?;
            if !ids.insert(p.place_id.as_str()) {
                return Err(Error::invariant(&p.place_id, "place_id", "duplicate place id"));
            }
        }
        for c in &self.carparks {
            validate_carpark(c)?;
        }
        let mut vins = HashSet::new();
        for v in &self.vehicles {
            validate_vehicle(v)?;
            if !vins.insert(v.vin.as_str()) {
                return Err(Error::invariant(&v.vin, "vin", "duplicate vin"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LoadConfig {
    pub center: GeoPoint,
    pub traffic_path: Option<PathBuf>,
}

impl Default for LoadConfig {
    fn default() -> Self {
        LoadConfig {
            center: geo::PRINCES_BRIDGE,
            traffic_path: None,
        }
    }
}

fn validate_place(p: &PopularityProfile) -> Result<()> {
    p.location
        .validate()
        .map_err(|e| Error::invariant(&p.place_id, "location", e.to_string()))?;
    if !(p.min_time > 0.0) {
        return Err(Error::invariant(&p.place_id, "min_time", "must be > 0"));
    }
    if !(p.max_time >= p.min_time) {
        return Err(Error::invariant(&p.place_id, "max_time", "must be >= min_time"));
    }
    for (d, row) in p.rp.iter().enumerate() {
        if let Some(h) = row.iter().position(|&v| v > 100) {
            return Err(Error::invariant(
                &p.place_id,
                format!("populartimes.{}[{h}]", DAY_NAMES[d]),
                format!("{} not in [0, 100]", row[h]),
            ));
        }
    }
    Ok(())
}

fn validate_carpark(c: &CarPark) -> Result<()> {
    let id = &c.carpark_id;
    c.location
        .validate()
        .map_err(|e| Error::invariant(id, "location", e.to_string()))?;
    if c.capacity == 0 {
        return Err(Error::invariant(id, "capacity", "must be > 0"));
    }
    if !(c.price_per_hour >= 0.0) {
        return Err(Error::invariant(id, "price_per_hour", "must be >= 0"));
    }
    if !(1.0..=5.0).contains(&c.rating) {
        return Err(Error::invariant(id, "rating", "not in [1, 5]"));
    }
    if !(c.max_height > 0.0) {
        return Err(Error::invariant(id, "max_height", "must be > 0"));
    }
    for (d, windows) in c.opening.iter().enumerate() {
        let field = format!("opening_{}", DAY_NAMES[d][..3].to_ascii_lowercase());
        let mut sorted = windows.clone();
        sorted.sort_by_key(|w| w.open_sec);
        for w in &sorted {
            if w.open_sec >= w.close_sec || w.close_sec > SECONDS_PER_DAY {
                return Err(Error::invariant(id, &field, "window must satisfy open < close <= 24:00"));
            }
        }
        if sorted.windows(2).any(|p| p[1].open_sec < p[0].close_sec) {
            return Err(Error::invariant(id, &field, "overlapping windows"));
        }
    }
    Ok(())
}

fn validate_vehicle(v: &VehicleSpec) -> Result<()> {
    if v.vin.trim().is_empty() {
        return Err(Error::schema(&v.vin, "vin", "empty"));
    }
    for (name, val) in [("height", v.height), ("length", v.length), ("width", v.width)] {
        if !(val > 0.0) {
            return Err(Error::invariant(&v.vin, name, "must be > 0"));
        }
    }
    Ok(())
}

// ---- file formats -------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeekTable {
    #[serde(rename = "Monday")]
    monday: Vec<i64>,
    #[serde(rename = "Tuesday")]
    tuesday: Vec<i64>,
    #[serde(rename = "Wednesday")]
    wednesday: Vec<i64>,
    #[serde(rename = "Thursday")]
    thursday: Vec<i64>,
    #[serde(rename = "Friday")]
    friday: Vec<i64>,
    #[serde(rename = "Saturday")]
    saturday: Vec<i64>,
    #[serde(rename = "Sunday")]
    sunday: Vec<i64>,
}

impl WeekTable {
    fn from_matrix(m: &HourMatrix) -> Self {
        let row = |d: usize| m[d].iter().map(|&v| i64::from(v)).collect();
        WeekTable {
            monday: row(0),
            tuesday: row(1),
            wednesday: row(2),
            thursday: row(3),
            friday: row(4),
            saturday: row(5),
            sunday: row(6),
        }
    }

    fn into_matrix(self, record: &str, prefix: &str) -> Result<HourMatrix> {
        let rows = [
            self.monday,
            self.tuesday,
            self.wednesday,
            self.thursday,
            self.friday,
            self.saturday,
            self.sunday,
        ];
        let mut m = [[0u8; 24]; 7];
        for (d, row) in rows.iter().enumerate() {
            let field = format!("{prefix}{}", DAY_NAMES[d]);
            if row.len() != 24 {
                return Err(Error::schema(record, field, format!("expected 24 values, found {}", row.len())));
            }
            for (h, &v) in row.iter().enumerate() {
                if !(0..=100).contains(&v) {
                    return Err(Error::invariant(record, format!("{field}[{h}]"), format!("{v} not in [0, 100]")));
                }
                m[d][h] = v as u8;
            }
        }
        Ok(m)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlace {
    place_id: String,
    name: String,
    lat: f64,
    lng: f64,
    min_time: f64,
    max_time: f64,
    populartimes: WeekTable,
}

fn read_file(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    Ok(fs::read_to_string(path)?)
}

pub fn load_places(path: &Path) -> Result<Vec<PopularityProfile>> {
    let text = read_file(path)?;
    let items: Vec<serde_json::Value> = serde_json::from_str(&text)
        .map_err(|e| Error::schema(path.display().to_string(), "<root>", format!("expected a JSON array: {e}")))?;
    if items.is_empty() {
        return Err(Error::schema(path.display().to_string(), "<root>", "no places"));
    }
    let mut out = Vec::with_capacity(items.len());
    for (i, item) in items.into_iter().enumerate() {
        let label = item
            .get("place_id")
            .and_then(|v| v.as_str())
            .map(|id| format!("place #{i} ({id})"))
            .unwrap_or_else(|| format!("place #{i}"));
        let raw: RawPlace = serde_path_to_error::deserialize(item).map_err(|e| {
            let field = e.path().to_string();
            Error::schema(&label, field, e.into_inner().to_string())
        })?;
        let rp = raw.populartimes.into_matrix(&label, "populartimes.")?;
        let place = PopularityProfile {
            place_id: raw.place_id,
            name: raw.name,
            location: GeoPoint { lat: raw.lat, lng: raw.lng },
            min_time: raw.min_time,
            max_time: raw.max_time,
            rp,
        };
        validate_place(&place)?;
        out.push(place);
    }
    Ok(out)
}

pub fn write_places(path: &Path, places: &[PopularityProfile]) -> Result<()> {
    let raw: Vec<RawPlace> = places
        .iter()
        .map(|p| RawPlace {
            place_id: p.place_id.clone(),
            name: p.name.clone(),
            lat: p.location.lat,
            lng: p.location.lng,
            min_time: p.min_time,
            max_time: p.max_time,
            populartimes: WeekTable::from_matrix(&p.rp),
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&raw)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_traffic(path: &Path) -> Result<HourMatrix> {
    let text = read_file(path)?;
    let label = path.display().to_string();
    let table: WeekTable = serde_json::from_str(&text)
        .map_err(|e| Error::schema(&label, "<root>", e.to_string()))?;
    table.into_matrix(&label, "")
}

pub fn write_traffic(path: &Path, traffic: &HourMatrix) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&WeekTable::from_matrix(traffic))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn parse_opening(cell: &str) -> Option<Vec<OpeningWindow>> {
    let cell = cell.trim();
    if cell.eq_ignore_ascii_case("closed") {
        return Some(Vec::new());
    }
    cell.split(';')
        .map(|w| {
            let (open, close) = w.split_once('-')?;
            Some(OpeningWindow {
                open_sec: parse_clock(open)?,
                close_sec: parse_clock(close)?,
            })
        })
        .collect()
}

fn format_opening(windows: &[OpeningWindow]) -> String {
    if windows.is_empty() {
        return "closed".to_string();
    }
    windows
        .iter()
        .map(|w| format!("{}-{}", format_clock(w.open_sec), format_clock(w.close_sec)))
        .collect::<Vec<_>>()
        .join(";")
}

fn check_header(path: &Path, rdr: &mut csv::Reader<fs::File>, expected: &str) -> Result<()> {
    let header = rdr.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != expected {
        return Err(Error::schema(
            path.display().to_string(),
            "header",
            format!("expected `{expected}`, found `{header}`"),
        ));
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(record: &str, field: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| Error::schema(record, field, format!("cannot parse `{raw}`")))
}

pub fn load_carparks(path: &Path) -> Result<Vec<CarPark>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut rdr = csv::Reader::from_path(path)?;
    check_header(path, &mut rdr, CARPARK_HEADER)?;
    let fields: Vec<&str> = CARPARK_HEADER.split(',').collect();
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::schema(format!("carpark row {}", i + 1), "<row>", e.to_string()))?;
        let label = format!("carpark row {} ({})", i + 1, row.get(0).unwrap_or(""));
        let get = |k: usize| row.get(k).unwrap_or("");
        let mut opening: [Vec<OpeningWindow>; 7] = Default::default();
        for (d, slot) in opening.iter_mut().enumerate() {
            *slot = parse_opening(get(8 + d)).ok_or_else(|| {
                Error::schema(&label, fields[8 + d], format!("bad opening `{}`", get(8 + d)))
            })?;
        }
        let cp = CarPark {
            carpark_id: get(0).to_string(),
            name: get(1).to_string(),
            location: GeoPoint {
                lat: parse_field(&label, "lat", get(2))?,
                lng: parse_field(&label, "lng", get(3))?,
            },
            capacity: parse_field(&label, "capacity", get(4))?,
            price_per_hour: parse_field(&label, "price_per_hour", get(5))?,
            rating: parse_field(&label, "rating", get(6))?,
            max_height: parse_field(&label, "max_height", get(7))?,
            opening,
        };
        validate_carpark(&cp).map_err(|e| relabel(e, &label))?;
        out.push(cp);
    }
    if out.is_empty() {
        return Err(Error::schema(path.display().to_string(), "<rows>", "no car parks"));
    }
    Ok(out)
}

fn relabel(e: Error, label: &str) -> Error {
    match e {
        Error::InvariantViolation { field, message, .. } => Error::invariant(label, field, message),
        other => other,
    }
}

pub fn write_carparks(path: &Path, carparks: &[CarPark]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CARPARK_HEADER.split(','))?;
    for c in carparks {
        let mut row = vec![
            c.carpark_id.clone(),
            c.name.clone(),
            c.location.lat.to_string(),
            c.location.lng.to_string(),
            c.capacity.to_string(),
            c.price_per_hour.to_string(),
            c.rating.to_string(),
            c.max_height.to_string(),
        ];
        row.extend(c.opening.iter().map(|w| format_opening(w)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_vehicles(path: &Path) -> Result<Vec<VehicleSpec>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut rdr = csv::Reader::from_path(path)?;
    if rdr.headers()?.is_empty() {
        return Err(Error::schema(path.display().to_string(), "header", "empty file"));
    }
    check_header(path, &mut rdr, VEHICLE_HEADER)?;
    let mut out = Vec::new();
    let mut vins = HashSet::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::schema(format!("vehicle row {}", i + 1), "<row>", e.to_string()))?;
        let label = format!("vehicle row {} ({})", i + 1, row.get(0).unwrap_or(""));
        let get = |k: usize| row.get(k).unwrap_or("");
        let v = VehicleSpec {
            vin: get(0).trim().to_string(),
            height: parse_field(&label, "height", get(1))?,
            length: parse_field(&label, "length", get(2))?,
            width: parse_field(&label, "width", get(3))?,
        };
        validate_vehicle(&v).map_err(|e| relabel(e, &label))?;
        if !vins.insert(v.vin.clone()) {
            return Err(Error::invariant(&label, "vin", "duplicate vin"));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::schema(path.display().to_string(), "<rows>", "no vehicles"));
    }
    Ok(out)
}

pub fn write_vehicles(path: &Path, vehicles: &[VehicleSpec]) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(f, "{VEHICLE_HEADER}")?;
    for v in vehicles {
        writeln!(f, "{},{:.3},{:.3},{:.3}", v.vin, v.height, v.length, v.width)?;
    }
    f.flush()?;
    Ok(())
}

/// Load and validate the datasets.
pub fn load_datasets(
    places_path: &Path,
    carparks_path: &Path,
    vehicles_path: &Path,
    config: &LoadConfig,
) -> Result<DatasetBundle> {
    let bundle = DatasetBundle {
        places: load_places(places_path)?,
        carparks: load_carparks(carparks_path)?,
        vehicles: load_vehicles(vehicles_path)?,
        center: config.center,
        traffic: config.traffic_path.as_deref().map(load_traffic).transpose()?,
    };
    bundle.validate()?;
    Ok(bundle)
}

/// Load `places.json`, `carparks.csv` and `vehicles.csv` from one directory.
pub fn load_dir(dir: &Path, config: &LoadConfig) -> Result<DatasetBundle> {
    load_datasets(
        &dir.join(PLACES_FILE),
        &dir.join(CARPARKS_FILE),
        &dir.join(VEHICLES_FILE),
        config,
    )
}

// ---- fixtures -----------------------------------------------------------------------

const LANDMARKS: &[&str] = &[
    "Flinders Street Station",
    "Melbourne Cricket Ground",
    "Royal Botanic Gardens Victoria",
    "Melbourne Museum",
    "Queen Victoria Market",
    "Federation Square",
    "State Library Victoria",
    "Southern Cross Station",
    "Eureka Skydeck",
    "National Gallery of Victoria",
    "Crown Casino",
    "Melbourne Central",
    "Docklands Stadium",
    "Shrine of Remembrance",
    "Chinatown Melbourne",
    "Melbourne Aquarium",
    "Arts Centre Melbourne",
    "Rod Laver Arena",
    "Old Melbourne Gaol",
    "Parliament House",
];

const OPERATORS: &[&str] = &["Wilson", "Secure", "City", "Care Park", "Premium"];

const VIN_ALPHABET: &[u8] = b"ABCDEFGHJKLMNPRSTUVWXYZ0123456789";

fn round_to(x: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    (x * f).round() / f
}

fn gaussian(x: f64, mu: f64, width: f64) -> f64 {
    (-(x - mu).powi(2) / (2.0 * width * width)).exp()
}

/// Day-shaped popularity curve: two Gaussian bumps over hour-of-day plus noise, scaled so
/// the weekly peak is 100.
fn fixture_popularity<R: Rng>(rng: &mut R) -> HourMatrix {
    let noise = Normal::new(0.0, 2.5).unwrap();
    let morning = rng.random_range(8.5..12.5);
    let evening = rng.random_range(15.5..18.5);
    let w_morning = rng.random_range(1.5..3.0);
    let w_evening = rng.random_range(1.8..3.5);
    let a_morning = rng.random_range(30.0..70.0);
    let a_evening = rng.random_range(50.0..90.0);
    let base = rng.random_range(3.0..7.0);
    let weekend_boost = rng.random_range(1.0..1.35);
    let mut raw = [[0.0f64; 24]; 7];
    for (d, row) in raw.iter_mut().enumerate() {
        let weekend = d >= 5;
        let day_scale = if weekend { weekend_boost } else { rng.random_range(0.85..1.05) };
        let shift = if weekend { 1.5 } else { 0.0 };
        for (h, cell) in row.iter_mut().enumerate() {
            let x = h as f64 + 0.5;
            let bumps = a_morning * gaussian(x, morning + shift, w_morning)
                + a_evening * gaussian(x, evening, w_evening);
            // quiet in the small hours, 02:00-05:00
            let night = if (2..5).contains(&h) { 0.5 } else { 1.0 };
            *cell = ((base + bumps) * day_scale * night + noise.sample(rng)).max(0.0);
        }
    }
    let peak = raw.iter().flatten().cloned().fold(f64::MIN, f64::max).max(1.0);
    let mut m = [[0u8; 24]; 7];
    for d in 0..7 {
        for h in 0..24 {
            m[d][h] = (raw[d][h] / peak * 100.0).round().clamp(0.0, 100.0) as u8;
        }
    }
    m
}

fn fixture_opening<R: Rng>(rng: &mut R) -> [Vec<OpeningWindow>; 7] {
    let w = |o: u32, c: u32| OpeningWindow { open_sec: o * 1800, close_sec: c * 1800 };
    let mut out: [Vec<OpeningWindow>; 7] = Default::default();
    let kind = rng.random_range(0..10);
    for (d, slot) in out.iter_mut().enumerate() {
        let weekend = d >= 5;
        *slot = match kind {
            0..=4 => vec![w(0, 48)],
            5..=6 => {
                if weekend {
                    vec![w(16, 40)]
                } else {
                    vec![w(12, 46)]
                }
            }
            7 => {
                if d == 6 {
                    Vec::new()
                } else {
                    vec![w(13, 38)]
                }
            }
            _ => vec![w(0, 4), w(12, 48)],
        };
    }
    out
}

/// Write seeded synthetic fixtures into `out_dir` and return the bundle they encode.
pub fn bootstrap_fixtures(
    seed: u64,
    n_places: usize,
    n_carparks: usize,
    n_vehicles: usize,
    center: GeoPoint,
    radius_m: f64,
    out_dir: &Path,
) -> Result<DatasetBundle> {
    let bundle = fixture_bundle(seed, n_places, n_carparks, n_vehicles, center, radius_m)?;
    fs::create_dir_all(out_dir)?;
    write_places(&out_dir.join(PLACES_FILE), &bundle.places)?;
    write_carparks(&out_dir.join(CARPARKS_FILE), &bundle.carparks)?;
    write_vehicles(&out_dir.join(VEHICLES_FILE), &bundle.vehicles)?;
    Ok(bundle)
}

/// The in-memory part of [`bootstrap_fixtures`], without touching the filesystem.
pub fn fixture_bundle(
    seed: u64,
    n_places: usize,
    n_carparks: usize,
    n_vehicles: usize,
    center: GeoPoint,
    radius_m: f64,
) -> Result<DatasetBundle> {
    for (name, n) in [("n_places", n_places), ("n_carparks", n_carparks), ("n_vehicles", n_vehicles)] {
        if n == 0 {
            return Err(Error::domain(name, "must be >= 1"));
        }
    }
    if !(radius_m > 0.0) {
        return Err(Error::domain("radius_m", "must be > 0"));
    }
    center.validate()?;

    let mut prng = rng::stream(seed, &[rng::tag("fixture.places")]);
    let places = (0..n_places)
        .map(|i| {
            let name = match LANDMARKS.get(i) {
                Some(n) => (*n).to_string(),
                None => format!("{} {}", LANDMARKS[i % LANDMARKS.len()], i / LANDMARKS.len() + 1),
            };
            let location = sample_rounded(center, radius_m, &mut prng);
            let a = prng.random_range(30..=240) as f64;
            let b = prng.random_range(30..=240) as f64;
            PopularityProfile {
                place_id: format!("P{:03}", i + 1),
                name,
                location,
                min_time: a.min(b),
                max_time: a.max(b),
                rp: fixture_popularity(&mut prng),
            }
        })
        .collect();

    let mut crng = rng::stream(seed, &[rng::tag("fixture.carparks")]);
    let carparks = (0..n_carparks)
        .map(|i| CarPark {
            carpark_id: format!("C{:03}", i + 1),
            name: format!("{} Car Park {}", OPERATORS.choose(&mut crng).unwrap(), i + 1),
            location: sample_rounded(center, radius_m, &mut crng),
            opening: fixture_opening(&mut crng),
            capacity: crng.random_range(50..=800),
            price_per_hour: round_to(crng.random_range(4.0..30.0), 2),
            rating: round_to(crng.random_range(1.0..5.0), 1),
            max_height: round_to(crng.random_range(1.8..2.5), 2),
        })
        .collect();

    let mut vrng = rng::stream(seed, &[rng::tag("fixture.vehicles")]);
    let mut vins = HashSet::new();
    let mut vehicles = Vec::with_capacity(n_vehicles);
    while vehicles.len() < n_vehicles {
        let vin: String = (0..17)
            .map(|_| *VIN_ALPHABET.choose(&mut vrng).unwrap() as char)
            .collect();
        if !vins.insert(vin.clone()) {
            continue;
        }
        vehicles.push(VehicleSpec {
            vin,
            height: round_to(vrng.random_range(1.35..2.1), 3),
            length: round_to(vrng.random_range(3.6..5.6), 3),
            width: round_to(vrng.random_range(1.6..2.0), 3),
        });
    }

    Ok(DatasetBundle {
        places,
        carparks,
        vehicles,
        center,
        traffic: None,
    })
}

/// Disk sample rounded to 6 decimals (~0.1 m), kept inside the radius.
fn sample_rounded<R: Rng>(center: GeoPoint, radius_m: f64, rng: &mut R) -> GeoPoint {
    loop {
        let p = geo::sample_in_disk(center, radius_m, rng);
        let p = GeoPoint { lat: round_to(p.lat, 6), lng: round_to(p.lng, 6) };
        if geo::haversine(center, p) <= radius_m {
            return p;
        }
    }
}
