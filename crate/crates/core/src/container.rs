//! The "GLEM1" binary container shared by embeddings, projections and
//! condensed distance matrices.
//!
//! Layout: the six magic bytes `GLEM1\n`, an 8-byte little-endian header
//! length, a UTF-8 JSON header of that length, then a little-endian
//! IEEE-754 payload whose element type is named by the header's `dtype`.

use std::io::Write;

use serde_json::Value;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 6] = b"GLEM1\n";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    pub fn name(self) -> &'static str {
        match self {
            Dtype::F32 => "f32",
            Dtype::F64 => "f64",
        }
    }

    pub fn width(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "f32" => Ok(Dtype::F32),
            "f64" => Ok(Dtype::F64),
            other => Err(Error::MalformedHeader(format!("unsupported dtype {other:?}"))),
        }
    }
}

/// Writes a container. `header` must be a JSON object; its `dtype` field is
/// overwritten to match the payload.
pub fn write_f32(out: &mut impl Write, mut header: Value, payload: &[f32]) -> Result<()> {
    set_dtype(&mut header, Dtype::F32)?;
    write_header(out, &header)?;
    let mut buf = Vec::with_capacity(payload.len() * 4);
    for v in payload {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn write_f64(out: &mut impl Write, mut header: Value, payload: &[f64]) -> Result<()> {
    set_dtype(&mut header, Dtype::F64)?;
    write_header(out, &header)?;
    let mut buf = Vec::with_capacity(payload.len() * 8);
    for v in payload {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

fn set_dtype(header: &mut Value, dtype: Dtype) -> Result<()> {
    let obj = header
        .as_object_mut()
        .ok_or_else(|| Error::MalformedHeader("header must be a JSON object".into()))?;
    obj.insert("dtype".into(), Value::from(dtype.name()));
    Ok(())
}

fn write_header(out: &mut impl Write, header: &Value) -> Result<()> {
    let json = serde_json::to_vec(header).map_err(|e| Error::MalformedHeader(e.to_string()))?;
    out.write_all(MAGIC)?;
    out.write_all(&(json.len() as u64).to_le_bytes())?;
    out.write_all(&json)?;
    Ok(())
}

/// A parsed container: the JSON header and the raw payload bytes.
pub struct Container<'a> {
    pub header: Value,
    pub dtype: Dtype,
    payload: &'a [u8],
}

impl<'a> Container<'a> {
    pub fn parse(bytes: &'a [u8]) -> Result<Self> {
        if bytes.len() < 14 || &bytes[..6] != MAGIC {
            return Err(Error::MalformedHeader("missing GLEM1 magic".into()));
        }
        let len = u64::from_le_bytes(bytes[6..14].try_into().expect("8 bytes")) as usize;
        let end = 14usize
            .checked_add(len)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| Error::MalformedHeader("header length exceeds file size".into()))?;
        let header: Value = serde_json::from_slice(&bytes[14..end])
            .map_err(|e| Error::MalformedHeader(e.to_string()))?;
        if !header.is_object() {
            return Err(Error::MalformedHeader("header must be a JSON object".into()));
        }
        let dtype = Dtype::parse(
            header
                .get("dtype")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::MalformedHeader("missing dtype".into()))?,
        )?;
        Ok(Container { header, dtype, payload: &bytes[end..] })
    }

    pub fn usize_field(&self, key: &str) -> Result<usize> {
        self.header
            .get(key)
            .and_then(Value::as_u64)
            .map(|v| v as usize)
            .ok_or_else(|| Error::MalformedHeader(format!("missing or invalid {key:?}")))
    }

    pub fn str_field(&self, key: &str) -> Result<&str> {
        self.header
            .get(key)
            .and_then(Value::as_str)
            .ok_or_else(|| Error::MalformedHeader(format!("missing or invalid {key:?}")))
    }

    fn check_len(&self, count: usize) -> Result<()> {
        let expected = count * self.dtype.width();
        match self.payload.len() {
            n if n < expected => Err(Error::PayloadTruncated { expected, found: n }),
            n if n > expected => Err(Error::DimensionMismatch(format!(
                "payload holds {n} bytes but header declares {expected}"
            ))),
            _ => Ok(()),
        }
    }

    /// Decodes exactly `count` values as f32 (f64 payloads are narrowed).
    pub fn values_f32(&self, count: usize) -> Result<Vec<f32>> {
        self.check_len(count)?;
        Ok(match self.dtype {
            Dtype::F32 => self
                .payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                .collect(),
            Dtype::F64 => self.values_f64(count)?.into_iter().map(|v| v as f32).collect(),
        })
    }

    pub fn values_f64(&self, count: usize) -> Result<Vec<f64>> {
        self.check_len(count)?;
        Ok(match self.dtype {
            Dtype::F32 => self
                .payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
                .collect(),
            Dtype::F64 => self
                .payload
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect(),
        })
    }
}
