//! Solution documents (JSON) and sweep tables (CSV).
//!
//! Floats in JSON are written with 17 significant digits so that documents
//! read back bit-exactly and identical runs produce identical bytes.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::error::{Error, Result};
use crate::radial::RadialProfile;
use crate::solver::{GroundState, Method, SolverConfig};
use crate::study::SweepRecord;

pub const SCHEMA: &str = "sn-disc/1";

/// JSON formatter writing every `f64` as `d.dddddddddddddddde±x`.
#[derive(Debug, Default, Clone, Copy)]
pub struct ExactFloats;

impl Formatter for ExactFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, ExactFloats);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDoc {
    pub schema: String,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "R_star")]
    pub r_star: f64,
    pub lambda: f64,
    #[serde(rename = "c_R")]
    pub c_r: f64,
    pub method: Method,
    pub n: usize,
    pub r: Vec<f64>,
    pub phi: Vec<f64>,
    #[serde(rename = "residual_L2")]
    pub residual_l2: f64,
    pub config: SolverConfig,
}

impl SolutionDoc {
    pub fn new(state: &GroundState, config: &SolverConfig) -> Self {
        SolutionDoc {
            schema: SCHEMA.into(),
            radius: state.radius,
            r_star: state.r_star,
            lambda: state.lambda,
            c_r: state.c_r,
            method: state.method,
            n: state.profile.n(),
            r: state.profile.nodes().collect(),
            phi: state.profile.values().to_vec(),
            residual_l2: state.residual_l2,
            config: *config,
        }
    }

    pub fn profile(&self) -> Result<RadialProfile> {
        RadialProfile::new(self.radius, self.phi.clone())
    }

    /// Rebuilds the state; `iterations` is not stored and reads back as 0.
    pub fn to_state(&self) -> Result<GroundState> {
        Ok(GroundState {
            profile: self.profile()?,
            radius: self.radius,
            r_star: self.r_star,
            lambda: self.lambda,
            c_r: self.c_r,
            residual_l2: self.residual_l2,
            method: self.method,
            iterations: 0,
        })
    }

    fn check(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::InvalidInput(format!("unknown schema {:?}", self.schema)));
        }
        if self.phi.len() != self.n + 1 || self.r.len() != self.n + 1 {
            return Err(Error::InvalidInput(format!(
                "expected {} samples, found r: {}, phi: {}",
                self.n + 1,
                self.r.len(),
                self.phi.len()
            )));
        }
        Ok(())
    }
}

/// Both methods on the same disc, with their uniform distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionBundle {
    pub schema: String,
    pub solutions: Vec<SolutionDoc>,
    pub uniform_distance: f64,
    /// `uniform_distance` over the amplitude of the first solution.
    pub relative_distance: f64,
}

impl SolutionBundle {
    pub fn new(first: &GroundState, second: &GroundState, config: &SolverConfig) -> Result<Self> {
        let d = first.profile.uniform_distance(&second.profile)?;
        Ok(SolutionBundle {
            schema: SCHEMA.into(),
            solutions: vec![SolutionDoc::new(first, config), SolutionDoc::new(second, config)],
            uniform_distance: d,
            relative_distance: d / first.amplitude(),
        })
    }
}

/// Accepts either a single solution or a bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Document {
    Bundle(SolutionBundle),
    Single(SolutionDoc),
}

impl Document {
    pub fn solutions(&self) -> Vec<&SolutionDoc> {
        match self {
            Document::Single(d) => vec![d],
            Document::Bundle(b) => b.solutions.iter().collect(),
        }
    }
}

pub fn parse_document(bytes: &[u8]) -> Result<Document> {
    let doc: Document = serde_json::from_slice(bytes)?;
    let schema = match &doc {
        Document::Single(d) => &d.schema,
        Document::Bundle(b) => &b.schema,
    };
    if schema != SCHEMA {
        return Err(Error::InvalidInput(format!("unknown schema {schema:?}")));
    }
    for d in doc.solutions() {
        d.check()?;
    }
    Ok(doc)
}

pub fn read_document(path: &Path) -> Result<Document> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    parse_document(&bytes)
}

pub fn read_solution(path: &Path) -> Result<SolutionDoc> {
    match read_document(path)? {
        Document::Single(d) => Ok(d),
        Document::Bundle(_) => Err(Error::InvalidInput("file holds several solutions".into())),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let bytes = to_json_bytes(value)?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(writer: W, rows: &[SweepRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(reader: R) -> Result<Vec<SweepRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Parses `A:B:geometric:K` (K points from A to B with constant ratio) or a
/// comma separated list of radii.
pub fn parse_radii(arg: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::InvalidInput(format!("radii {arg:?}: {why}"));
    let number = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let text = arg.trim();
    if text.is_empty() {
        return Err(bad("empty list"));
    }
    let fields: Vec<&str> = text.split(':').collect();
    let radii = match fields.as_slice() {
        [a, b, kind, k] => {
            if kind.trim() != "geometric" {
                return Err(bad("only the geometric ladder is supported"));
            }
            let (a, b) = (number(a)?, number(b)?);
            let k: usize = k.trim().parse().map_err(|_| bad("count is not an integer"))?;
            if !(a > 0.0 && b > 0.0) || k == 0 {
                return Err(bad("need positive endpoints and count"));
            }
            if k == 1 {
                if a != b {
                    return Err(bad("a single point needs A = B"));
                }
                vec![a]
            } else {
                let ratio = (b / a).powf(1.0 / (k - 1) as f64);
                (0..k).map(|i| if i + 1 == k { b } else { a * ratio.powi(i as i32) }).collect()
            }
        }
        [_] => text.split(',').map(number).collect::<Result<Vec<f64>>>()?,
        _ => return Err(bad("expected A:B:geometric:K or a list")),
    };
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(bad("radii must be positive and finite"));
    }
    Ok(radii)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_ladder() {
        assert_eq!(parse_radii("4:64:geometric:5").unwrap(), vec![4.0, 8.0, 16.0, 32.0, 64.0]);
        assert_eq!(parse_radii("2:2:geometric:1").unwrap(), vec![2.0]);
        assert_eq!(parse_radii("1, 2.5,3").unwrap(), vec![1.0, 2.5, 3.0]);
        for bad in
            ["", " ", "4:64:linear:5", "4:64:geometric:0", "0:4:geometric:3", "1:2:geometric:1", "a", "1,-2", "1:2"]
        {
            assert!(matches!(parse_radii(bad), Err(Error::InvalidInput(_))), "{bad:?}");
        }
    }

    #[test]
    fn floats_use_seventeen_digits() {
        let bytes = to_json_bytes(&vec![0.1, -2.5e-300, 1.0 / 3.0]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(text, "[1.0000000000000001e-1,-2.5000000000000000e-300,3.3333333333333331e-1]\n");
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, vec![0.1, -2.5e-300, 1.0 / 3.0]);
    }

    #[test]
    fn non_finite_becomes_null() {
        let text = String::from_utf8(to_json_bytes(&vec![f64::NAN]).unwrap()).unwrap();
        assert_eq!(text.trim(), "[null]");
    }

    #[test]
    fn rejects_unknown_schema_and_short_arrays() {
        let bad = br#"{"schema":"other/9","R":1,"R_star":1,"lambda":1,"c_R":1,"method":"nehari","n":16,"r":[],"phi":[],"residual_L2":0,"config":{"n":16,"h0":0.001,"eps":1e-6,"root_tol":1e-10,"max_iter":1,"tau":1,"seed":0}}"#;
        assert!(matches!(parse_document(bad), Err(Error::InvalidInput(_))));
        let short = String::from_utf8(bad.to_vec()).unwrap().replace("other/9", SCHEMA);
        assert!(matches!(parse_document(short.as_bytes()), Err(Error::InvalidInput(_))));
    }
}
