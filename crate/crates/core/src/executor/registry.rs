//! Registered query texts and template rendering.
//!
//! A query text may reference any repository column as `{{field}}` (`_id`, `location.lat`,
//! `location.lng`, `address`, `day`, `hour`, `minute`, `second`, `distance`,
//! `expected_time`, `price`, `rating`, `vin`, `query_id`). A clause wrapped in `[[? ... ]]` is
//! dropped when any placeholder inside it is null. Any other `{` or `[` is literal text.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};
use crate::generator::TemplateRecord;
use crate::store::TemplateStore;

const BUILTIN: &str = include_str!("../../data/registry.json");

const OPEN_OPTIONAL: &str = "[[?";
const CLOSE_OPTIONAL: &str = "]]";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Id,
    Lat,
    Lng,
    Address,
    Day,
    Hour,
    Minute,
    Second,
    Distance,
    ExpectedTime,
    Price,
    Rating,
    Vin,
    QueryId,
}

impl Field {
    fn parse(name: &str) -> Option<Field> {
        Some(match name {
            "_id" | "id" => Field::Id,
            "location.lat" | "lat" => Field::Lat,
            "location.lng" | "lng" => Field::Lng,
            "address" => Field::Address,
            "day" => Field::Day,
            "hour" => Field::Hour,
            "minute" => Field::Minute,
            "second" => Field::Second,
            "distance" => Field::Distance,
            "expected_time" => Field::ExpectedTime,
            "price" => Field::Price,
            "rating" => Field::Rating,
            "vin" => Field::Vin,
            "query_id" => Field::QueryId,
            _ => return None,
        })
    }

    fn value(self, r: &TemplateRecord) -> Option<String> {
        let num = |v: Option<f64>| v.map(|x| x.to_string());
        match self {
            Field::Id => Some(r.id.to_string()),
            Field::Lat => Some(r.location.lat.to_string()),
            Field::Lng => Some(r.location.lng.to_string()),
            Field::Address => Some(r.address.clone()),
            Field::Day => Some(r.day.to_string()),
            Field::Hour => Some(r.hour.to_string()),
            Field::Minute => Some(r.minute.to_string()),
            Field::Second => Some(r.second.to_string()),
            Field::Distance => num(r.distance),
            Field::ExpectedTime => num(r.expected_time),
            Field::Price => num(r.price),
            Field::Rating => num(r.rating),
            Field::Vin => Some(r.vin.clone()),
            Field::QueryId => Some(r.query_id.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Segment {
    Text(String),
    Field { name: String, field: Option<Field> },
    Optional(Vec<Segment>),
}

fn is_placeholder_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

/// Split `text` into literal and placeholder segments (no optional clauses).
fn parse_flat(text: &str) -> Vec<Segment> {
    let mut out = Vec::new();
    let mut lit = String::new();
    let mut rest = text;
    while let Some(pos) = rest.find("{{") {
        let after = &rest[pos + 2..];
        let name_len = after.find(|c: char| !is_placeholder_char(c)).unwrap_or(after.len());
        let name = &after[..name_len];
        if !name.is_empty() && after[name_len..].starts_with("}}") {
            lit.push_str(&rest[..pos]);
            if !lit.is_empty() {
                out.push(Segment::Text(std::mem::take(&mut lit)));
            }
            out.push(Segment::Field { name: name.to_string(), field: Field::parse(name) });
            rest = &after[name_len + 2..];
        } else {
            lit.push_str(&rest[..pos + 1]);
            rest = &rest[pos + 1..];
        }
    }
    lit.push_str(rest);
    if !lit.is_empty() {
        out.push(Segment::Text(lit));
    }
    out
}

fn parse(query_id: &str, text: &str) -> Result<Vec<Segment>> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find(OPEN_OPTIONAL) {
        out.extend(parse_flat(&rest[..open]));
        let body_start = open + OPEN_OPTIONAL.len();
        let close = rest[body_start..].find(CLOSE_OPTIONAL).ok_or_else(|| {
            Error::domain(format!("registry.{query_id}"), "optional clause `[[?` is never closed")
        })?;
        let body = &rest[body_start..body_start + close];
        if body.contains(OPEN_OPTIONAL) {
            return Err(Error::domain(format!("registry.{query_id}"), "optional clauses cannot nest"));
        }
        out.push(Segment::Optional(parse_flat(body)));
        rest = &rest[body_start + close + CLOSE_OPTIONAL.len()..];
    }
    out.extend(parse_flat(rest));
    Ok(out)
}

fn unknown_field(query_id: &str, segments: &[Segment]) -> Option<String> {
    segments.iter().find_map(|s| match s {
        Segment::Field { name, field: None } => Some(name.clone()),
        Segment::Optional(inner) => unknown_field(query_id, inner),
        _ => None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryRegistry {
    texts: BTreeMap<String, String>,
    compiled: BTreeMap<String, Vec<Segment>>,
}

impl QueryRegistry {
    pub fn empty() -> Self {
        QueryRegistry { texts: BTreeMap::new(), compiled: BTreeMap::new() }
    }

    /// The shipped registry: `parking_pull` (the default pull query) and `parking_push`.
    pub fn builtin() -> Self {
        Self::from_json_str(BUILTIN).expect("built-in registry is valid")
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        let map: BTreeMap<String, String> = serde_json::from_str(json)?;
        let mut r = Self::empty();
        for (id, text) in map {
            r.insert(id, text)?;
        }
        Ok(r)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => e.into(),
        })?;
        Self::from_json_str(&text)
    }

    /// Register a query text. Placeholders must name repository columns.
    pub fn insert(&mut self, query_id: impl Into<String>, text: impl Into<String>) -> Result<()> {
        let (query_id, text) = (query_id.into(), text.into());
        let segments = parse(&query_id, &text)?;
        if let Some(name) = unknown_field(&query_id, &segments) {
            return Err(Error::UnresolvedPlaceholder { query_id, placeholder: name });
        }
        self.compiled.insert(query_id.clone(), segments);
        self.texts.insert(query_id, text);
        Ok(())
    }

    pub fn contains(&self, query_id: &str) -> bool {
        self.texts.contains_key(query_id)
    }

    pub fn text(&self, query_id: &str) -> Option<&str> {
        self.texts.get(query_id).map(String::as_str)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.texts.keys().map(String::as_str)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.texts).expect("string map serializes")
    }

    /// Fails with the query ids the store uses but the registry lacks.
    pub fn check_store(&self, store: &TemplateStore) -> Result<()> {
        let missing: BTreeSet<String> = store
            .query_ids()
            .into_iter()
            .filter(|id| !self.contains(id))
            .map(String::from)
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::StoreRegistryMismatch(missing.into_iter().collect()))
        }
    }

    pub fn render(&self, record: &TemplateRecord) -> Result<String> {
        let segments = self
            .compiled
            .get(&record.query_id)
            .ok_or_else(|| Error::UnknownQueryId(record.query_id.clone()))?;
        let mut out = String::with_capacity(self.texts[&record.query_id].len() + 64);
        for seg in segments {
            match seg {
                Segment::Text(t) => out.push_str(t),
                Segment::Field { name, field } => {
                    let v = field.and_then(|f| f.value(record)).ok_or_else(|| Error::UnresolvedPlaceholder {
                        query_id: record.query_id.clone(),
                        placeholder: name.clone(),
                    })?;
                    out.push_str(&v);
                }
                Segment::Optional(inner) => {
                    let mut clause = String::new();
                    let mut complete = true;
                    for s in inner {
                        match s {
                            Segment::Text(t) => clause.push_str(t),
                            Segment::Field { field, .. } => match field.and_then(|f| f.value(record)) {
                                Some(v) => clause.push_str(&v),
                                None => {
                                    complete = false;
                                    break;
                                }
                            },
                            Segment::Optional(_) => unreachable!("optional clauses do not nest"),
                        }
                    }
                    if complete {
                        out.push_str(&clause);
                    }
                }
            }
        }
        Ok(out)
    }
}

impl Default for QueryRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Merge `record` into its registered query text.
pub fn render(record: &TemplateRecord, registry: &QueryRegistry) -> Result<String> {
    registry.render(record)
}
