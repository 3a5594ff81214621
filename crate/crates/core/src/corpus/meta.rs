use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::embeddings::read_input;
use super::is_valid_language_code;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageMeta {
    pub iso: String,
    pub name: String,
    pub family: String,
    pub subfamily: Option<String>,
    pub latitude: f64,
    pub longitude: f64,
    pub in_lid_training: bool,
}

impl LanguageMeta {
    fn validate(&self) -> Result<()> {
        if !is_valid_language_code(&self.iso) {
            return Err(Error::InvalidLanguage(self.iso.clone()));
        }
        let lat_ok = (-90.0..=90.0).contains(&self.latitude);
        let lon_ok = self.longitude > -180.0 && self.longitude <= 180.0;
        if !(lat_ok && lon_ok) {
            return Err(Error::CoordinateRange {
                iso: self.iso.clone(),
                lat: self.latitude,
                lon: self.longitude,
            });
        }
        Ok(())
    }
}

/// Metadata keyed by ISO code.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LanguageTable {
    by_iso: BTreeMap<String, LanguageMeta>,
}

impl LanguageTable {
    pub fn new(rows: Vec<LanguageMeta>) -> Result<Self> {
        let mut by_iso = BTreeMap::new();
        for m in rows {
            m.validate()?;
            if by_iso.contains_key(&m.iso) {
                return Err(Error::DuplicateLanguage(m.iso));
            }
            by_iso.insert(m.iso.clone(), m);
        }
        Ok(LanguageTable { by_iso })
    }

    pub fn get(&self, iso: &str) -> Option<&LanguageMeta> {
        self.by_iso.get(iso)
    }

    pub fn require(&self, iso: &str) -> Result<&LanguageMeta> {
        self.get(iso).ok_or_else(|| Error::MissingMetadata(iso.to_string()))
    }

    /// Rows in ascending ISO order.
    pub fn iter(&self) -> impl Iterator<Item = &LanguageMeta> {
        self.by_iso.values()
    }

    pub fn len(&self) -> usize {
        self.by_iso.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_iso.is_empty()
    }

    /// Rows for the given codes, failing on the first one without metadata.
    pub fn subset(&self, isos: &[String]) -> Result<Vec<LanguageMeta>> {
        isos.iter().map(|i| self.require(i).cloned()).collect()
    }

    pub fn write_tsv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::WriterBuilder::new().delimiter(b'\t').from_writer(out);
        let err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(["iso", "name", "family", "subfamily", "lat", "lon", "in_lid_training"])
            .map_err(err)?;
        for m in self.iter() {
            w.write_record([
                m.iso.as_str(),
                m.name.as_str(),
                m.family.as_str(),
                m.subfamily.as_deref().unwrap_or(""),
                &m.latitude.to_string(),
                &m.longitude.to_string(),
                if m.in_lid_training { "1" } else { "0" },
            ])
            .map_err(err)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn load_language_meta(path: &Path) -> Result<LanguageTable> {
    parse_language_meta(&read_input(path)?)
}

pub fn parse_language_meta(bytes: &[u8]) -> Result<LanguageTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(true)
        .quoting(false)
        .from_reader(bytes);
    let header = rdr.headers().map_err(|e| Error::MalformedHeader(e.to_string()))?.clone();
    let expected = ["iso", "name", "family", "subfamily", "lat", "lon", "in_lid_training"];
    if header.iter().ne(expected) {
        return Err(Error::MalformedHeader(format!("metadata columns must be {}", expected.join(","))));
    }
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| Error::MalformedRecord { line, msg: e.to_string() })?;
        let bad = |msg: String| Error::MalformedRecord { line, msg };
        let num = |s: &str, what: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|_| bad(format!("{what} {s:?} is not a number")))
        };
        let in_lid_training = match rec[6].trim() {
            "1" => true,
            "0" => false,
            other => return Err(bad(format!("in_lid_training must be 0/1, got {other:?}"))),
        };
        rows.push(LanguageMeta {
            iso: rec[0].to_string(),
            name: rec[1].to_string(),
            family: rec[2].to_string(),
            subfamily: (!rec[3].is_empty()).then(|| rec[3].to_string()),
            latitude: num(&rec[4], "lat")?,
            longitude: num(&rec[5], "lon")?,
            in_lid_training,
        });
    }
    LanguageTable::new(rows)
}
