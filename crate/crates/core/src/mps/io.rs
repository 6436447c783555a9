//! Tensor and state-vector artifacts.
//!
//! Two encodings share one header: a JSON object carrying the header fields
//! plus `data` (interleaved re/im pairs), or a binary file whose first line is
//! the JSON header followed by raw little-endian `f64` pairs.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use faer::Mat;
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use super::UniformMPS;
use crate::error::{Error, Result};
use crate::qstate::PureState;

pub const MPS_LAYOUT: &str = "s,alpha,beta";
pub const STATE_LAYOUT: &str = "amplitudes";
const ENDIAN: &str = "little";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Encoding {
    Json,
    Binary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorHeader {
    pub d: usize,
    #[serde(rename = "D")]
    pub bond: usize,
    #[serde(rename = "N_sites")]
    pub n_sites: usize,
    pub layout: String,
    pub endianness: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateHeader {
    pub dims: Vec<usize>,
    pub layout: String,
    pub endianness: String,
}

#[derive(Serialize, Deserialize)]
struct WithData<H> {
    #[serde(flatten)]
    header: H,
    data: Vec<f64>,
}

fn flatten(values: &[c64]) -> Vec<f64> {
    values.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn unflatten(data: &[f64], expected: usize) -> Result<Vec<c64>> {
    if data.len() != 2 * expected {
        return Err(Error::Dimension(format!(
            "artifact holds {} reals, expected {}",
            data.len(),
            2 * expected
        )));
    }
    Ok(data.chunks_exact(2).map(|p| c64::new(p[0], p[1])).collect())
}

fn write_artifact<H: Serialize>(path: &Path, header: H, values: &[c64], enc: Encoding) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    match enc {
        Encoding::Json => {
            serde_json::to_writer(&mut f, &WithData { header, data: flatten(values) })?;
            f.write_all(b"\n")?;
        }
        Encoding::Binary => {
            serde_json::to_writer(&mut f, &header)?;
            f.write_all(b"\n")?;
            for z in values {
                f.write_f64::<LittleEndian>(z.re)?;
                f.write_f64::<LittleEndian>(z.im)?;
            }
        }
    }
    f.flush()?;
    Ok(())
}

/// Reads either encoding; the JSON form is recognised by its `data` field.
fn read_artifact<H, F>(path: &Path, count: F) -> Result<(H, Vec<c64>)>
where
    H: for<'de> Deserialize<'de> + Serialize,
    F: Fn(&H) -> Result<usize>,
{
    let mut r = BufReader::new(fs::File::open(path)?);
    let mut first = String::new();
    r.read_line(&mut first)?;
    let value: serde_json::Value = serde_json::from_str(first.trim_end())?;
    if value.get("data").is_some() {
        let art: WithData<H> = serde_json::from_value(value)?;
        let n = count(&art.header)?;
        let values = unflatten(&art.data, n)?;
        return Ok((art.header, values));
    }
    let header: H = serde_json::from_value(value)?;
    let n = count(&header)?;
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let re = r.read_f64::<LittleEndian>()?;
        let im = r.read_f64::<LittleEndian>()?;
        values.push(c64::new(re, im));
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Dimension(format!("{} trailing bytes after tensor data", rest.len())));
    }
    Ok((header, values))
}

fn check_endianness(e: &str) -> Result<()> {
    if e != ENDIAN {
        return Err(Error::Config(format!("unsupported endianness {e:?}")));
    }
    Ok(())
}

pub fn write_mps(path: &Path, mps: &UniformMPS, enc: Encoding) -> Result<()> {
    let (d, bond) = (mps.phys_dim(), mps.bond_dim());
    let header = TensorHeader {
        d,
        bond,
        n_sites: mps.n_sites(),
        layout: MPS_LAYOUT.into(),
        endianness: ENDIAN.into(),
    };
    let mut values = Vec::with_capacity(d * bond * bond);
    for m in mps.mats() {
        for a in 0..bond {
            for b in 0..bond {
                values.push(m[(a, b)]);
            }
        }
    }
    write_artifact(path, header, &values, enc)
}

pub fn read_mps(path: &Path) -> Result<UniformMPS> {
    let (h, values) = read_artifact::<TensorHeader, _>(path, |h| {
        if h.layout != MPS_LAYOUT {
            return Err(Error::Config(format!("unsupported tensor layout {:?}", h.layout)));
        }
        check_endianness(&h.endianness)?;
        Ok(h.d * h.bond * h.bond)
    })?;
    let mats = (0..h.d)
        .map(|s| Mat::from_fn(h.bond, h.bond, |a, b| values[(s * h.bond + a) * h.bond + b]))
        .collect();
    UniformMPS::new(mats, h.n_sites)
}

pub fn write_state(path: &Path, state: &PureState, enc: Encoding) -> Result<()> {
    let header = StateHeader {
        dims: state.dims().to_vec(),
        layout: STATE_LAYOUT.into(),
        endianness: ENDIAN.into(),
    };
    write_artifact(path, header, state.amplitudes(), enc)
}

pub fn read_state(path: &Path) -> Result<PureState> {
    let (h, values) = read_artifact::<StateHeader, _>(path, |h| {
        if h.layout != STATE_LAYOUT {
            return Err(Error::Config(format!("unsupported state layout {:?}", h.layout)));
        }
        check_endianness(&h.endianness)?;
        Ok(h.dims.iter().product())
    })?;
    PureState::normalized(values, h.dims)
}
