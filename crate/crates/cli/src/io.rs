//! File formats and result records.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Number, Value};
use sha2::{Digest, Sha256};

use soliton_core::germ::{Facet, GermSpec};
use soliton_core::rational::{format_rational, parse_rational, Rational, RationalVector};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacetEntry {
    pub normal: Vec<i64>,
    pub discrepancy: String,
}

/// On-disk germ description. Rationals are `"p/q"` strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GermSpecFile {
    pub schema_version: u32,
    pub label: String,
    pub dim: usize,
    pub facets: Vec<FacetEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
}

impl GermSpecFile {
    pub fn from_spec(spec: &GermSpec, cutoff: Option<f64>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            label: spec.label().to_string(),
            dim: spec.dim(),
            facets: spec
                .facets()
                .iter()
                .map(|f| FacetEntry {
                    normal: f.normal.to_i64s().expect("facet normals are integral"),
                    discrepancy: fmt_q(&f.discrepancy),
                })
                .collect(),
            cutoff,
        }
    }

    pub fn to_spec(&self) -> Result<GermSpec, CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Spec(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let mut facets = Vec::with_capacity(self.facets.len());
        for (i, f) in self.facets.iter().enumerate() {
            if f.normal.len() != self.dim {
                return Err(CliError::Spec(format!(
                    "facet {i}: normal has {} entries, dim is {}",
                    f.normal.len(),
                    self.dim
                )));
            }
            let a = parse_rational(&f.discrepancy)
                .map_err(|e| CliError::Spec(format!("facet {i}: discrepancy: {e}")))?;
            facets.push(Facet::new(&f.normal, a));
        }
        Ok(GermSpec::new(self.label.clone(), facets)?)
    }
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Spec(format!("{}: {e}", path.display())))
}

pub fn parse_json<T: serde::de::DeserializeOwned>(bytes: &[u8], what: &str) -> Result<T, CliError> {
    serde_json::from_slice(bytes).map_err(|e| CliError::Spec(format!("{what}: {e}")))
}

pub fn load_germ(bytes: &[u8]) -> Result<(GermSpecFile, GermSpec), CliError> {
    let file: GermSpecFile = parse_json(bytes, "germ spec")?;
    let spec = file.to_spec()?;
    Ok((file, spec))
}

/// Comma-separated rationals such as `1/2,-1,3`.
pub fn parse_rational_list(s: &str) -> Result<RationalVector, CliError> {
    s.split(',')
        .map(|x| parse_rational(x.trim()).map_err(|e| CliError::Spec(format!("'{x}': {e}"))))
        .collect::<Result<Vec<_>, _>>()
        .map(RationalVector::new)
}

pub fn parse_float_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|x| {
            let x = x.trim();
            x.parse::<f64>()
                .or_else(|_| parse_rational(x).map(|q| soliton_core::rational::to_f64(&q)))
                .map_err(|_| CliError::Spec(format!("'{x}' is not a number")))
        })
        .collect()
}

pub fn check_dim(what: &str, got: usize, expected: usize) -> Result<(), CliError> {
    if got == expected {
        Ok(())
    } else {
        Err(CliError::Spec(format!(
            "{what} has {got} entries, the germ has dimension {expected}"
        )))
    }
}

/// Float with 17 significant digits.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&format!("{x:.16e}")).expect("formatted float parses"))
    } else {
        Value::String(x.to_string())
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

/// `"p/q"`, or just `"p"` for integers.
pub fn fmt_q(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format_rational(x)
    }
}

pub fn q(x: &Rational) -> Value {
    Value::String(fmt_q(x))
}

pub fn qs(xs: &[Rational]) -> Value {
    Value::Array(xs.iter().map(q).collect())
}

pub fn fmt_csv(x: f64) -> String {
    format!("{x:.16e}")
}

/// Hashes everything that determines a run: the command, its arguments and
/// the bytes of every input file.
#[derive(Default)]
pub struct InputDigest(Sha256);

impl InputDigest {
    pub fn new(command: &str) -> Self {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        Self(h)
    }

    pub fn arg(&mut self, name: &str, value: impl std::fmt::Debug) -> &mut Self {
        self.0.update(format!("\0{name}={value:?}").as_bytes());
        self
    }

    pub fn file(&mut self, bytes: &[u8]) -> &mut Self {
        self.0.update((bytes.len() as u64).to_le_bytes());
        self.0.update(bytes);
        self
    }

    pub fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}

pub struct Record {
    pub command: String,
    pub digest: String,
    pub outputs: Map<String, Value>,
    pub diagnostics: Map<String, Value>,
}

impl Record {
    pub fn new(command: &str, digest: InputDigest) -> Self {
        Self {
            command: command.to_string(),
            digest: digest.finish(),
            outputs: Map::new(),
            diagnostics: Map::new(),
        }
    }

    pub fn output(&mut self, key: &str, value: Value) -> &mut Self {
        self.outputs.insert(key.to_string(), value);
        self
    }

    pub fn diagnostic(&mut self, key: &str, value: Value) -> &mut Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "inputs_digest": self.digest,
            "outputs": Value::Object(self.outputs.clone()),
            "diagnostics": Value::Object(self.diagnostics.clone()),
        })
    }
}

pub fn error_record(command: &str, err: &CliError) -> Value {
    json!({
        "command": command,
        "error": {
            "kind": err.kind(),
            "exit_code": err.exit_code(),
            "message": err.to_string(),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use soliton_core::germ::fixtures;

    #[test]
    fn spec_file_round_trip() {
        for spec in [
            fixtures::p1(),
            fixtures::p2(),
            fixtures::f1(),
            fixtures::affine(3),
        ] {
            let file = GermSpecFile::from_spec(&spec, Some(4.0));
            let text = serde_json::to_string(&file).unwrap();
            let back: GermSpecFile = serde_json::from_str(&text).unwrap();
            assert_eq!(back, file);
            assert_eq!(back.to_spec().unwrap(), spec);
        }
    }

    #[test]
    fn floats_keep_seventeen_digits() {
        assert_eq!(num(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(num(0.1).as_f64(), Some(0.1));
        assert_eq!(num(-2.0).to_string(), "-2.0000000000000000e+0");
        assert_eq!(num(f64::INFINITY), Value::String("inf".into()));
    }

    #[test]
    fn lists() {
        let v = parse_rational_list("1/2, -3").unwrap();
        assert_eq!(format_rational(&v[0]), "1/2");
        assert_eq!(parse_float_list("0.5,1/4").unwrap(), vec![0.5, 0.25]);
        assert!(parse_float_list("x").is_err());
    }
}
