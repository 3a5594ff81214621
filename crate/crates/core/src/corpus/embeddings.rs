use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};

use super::{EmbeddingSet, Gender, UtteranceRecord};
use crate::container::{self, Container};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingFormat {
    #[default]
    Binary,
    Csv,
}

impl EmbeddingFormat {
    /// Guesses the format from a file extension; anything but `.csv` is binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => EmbeddingFormat::Csv,
            _ => EmbeddingFormat::Binary,
        }
    }
}

/// Reads a whole input file; a missing file is `MissingInput`.
pub fn read_input(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingInput(path.to_path_buf()),
        _ => Error::Io(e),
    })
}

pub fn load_embeddings(path: &Path, format: EmbeddingFormat) -> Result<EmbeddingSet> {
    let bytes = read_input(path)?;
    read_embeddings(&bytes, format)
}

pub fn read_embeddings(bytes: &[u8], format: EmbeddingFormat) -> Result<EmbeddingSet> {
    match format {
        EmbeddingFormat::Binary => read_binary(bytes),
        EmbeddingFormat::Csv => read_csv(bytes),
    }
}

pub fn write_embeddings(set: &EmbeddingSet, path: &Path, format: EmbeddingFormat) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    match format {
        EmbeddingFormat::Binary => write_binary(set, &mut out)?,
        EmbeddingFormat::Csv => write_csv(set, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct Header {
    version: u32,
    rows: usize,
    dim: usize,
    records: Vec<UtteranceRecord>,
    #[serde(default)]
    seed: Option<u64>,
}

fn read_binary(bytes: &[u8]) -> Result<EmbeddingSet> {
    let c = Container::parse(bytes)?;
    let header: Header =
        serde_json::from_value(c.header.clone()).map_err(|e| Error::MalformedHeader(e.to_string()))?;
    if header.version != 1 {
        return Err(Error::MalformedHeader(format!("unsupported version {}", header.version)));
    }
    if header.records.len() != header.rows {
        return Err(Error::DimensionMismatch(format!(
            "header declares {} rows but lists {} records",
            header.rows,
            header.records.len()
        )));
    }
    let data = c.values_f32(header.rows * header.dim)?;
    Ok(EmbeddingSet::new(header.records, header.dim, data)?.with_seed(header.seed))
}

fn write_binary(set: &EmbeddingSet, out: &mut impl Write) -> Result<()> {
    let mut header = json!({
        "version": 1,
        "rows": set.len(),
        "dim": set.dim(),
        "records": set.records(),
    });
    if let Some(seed) = set.seed() {
        header["seed"] = Value::from(seed);
    }
    container::write_f32(out, header, set.data())
}

const FIXED_COLUMNS: [&str; 5] = ["id", "lang", "speaker", "gender", "pred"];

fn opt(s: &str) -> Option<String> {
    (!s.is_empty()).then(|| s.to_string())
}

fn read_csv(bytes: &[u8]) -> Result<EmbeddingSet> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(bytes);
    let headers = rdr.headers().map_err(|e| Error::MalformedHeader(e.to_string()))?.clone();
    if headers.len() <= FIXED_COLUMNS.len()
        || headers.iter().take(5).ne(FIXED_COLUMNS.iter().copied())
    {
        return Err(Error::MalformedHeader(
            "expected id,lang,speaker,gender,pred,e0,...".into(),
        ));
    }
    for (k, h) in headers.iter().skip(5).enumerate() {
        if h != format!("e{k}") {
            return Err(Error::MalformedHeader(format!("column {} should be e{k}", k + 5)));
        }
    }
    let dim = headers.len() - FIXED_COLUMNS.len();
    let mut records = Vec::new();
    let mut data = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::MalformedRecord { line: row + 2, msg: e.to_string() })?;
        if rec.len() != headers.len() {
            return Err(Error::DimensionMismatch(format!(
                "row {row} has {} columns, header has {}",
                rec.len(),
                headers.len()
            )));
        }
        let gender = match &rec[3] {
            "" => None,
            g => Some(Gender::parse(g).ok_or_else(|| Error::MalformedRecord {
                line: row + 2,
                msg: format!("unknown gender {g:?}"),
            })?),
        };
        records.push(UtteranceRecord {
            id: rec[0].to_string(),
            language: rec[1].to_string(),
            speaker: opt(&rec[2]),
            gender,
            predicted: opt(&rec[4]),
        });
        for (col, cell) in rec.iter().skip(5).enumerate() {
            let v: f32 = cell.trim().parse().map_err(|_| Error::MalformedRecord {
                line: row + 2,
                msg: format!("column e{col}: {cell:?} is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { row, col });
            }
            data.push(v);
        }
    }
    EmbeddingSet::new(records, dim, data)
}

fn write_csv(set: &EmbeddingSet, out: &mut impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend((0..set.dim()).map(|k| format!("e{k}")));
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(&header).map_err(csv_err)?;
    for (i, r) in set.records().iter().enumerate() {
        let mut fields = vec![
            r.id.clone(),
            r.language.clone(),
            r.speaker.clone().unwrap_or_default(),
            r.gender.map(|g| g.as_str().to_string()).unwrap_or_default(),
            r.predicted.clone().unwrap_or_default(),
        ];
        // Display for f32 is the shortest string that round-trips.
        fields.extend(set.row(i).iter().map(|v| v.to_string()));
        w.write_record(&fields).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
