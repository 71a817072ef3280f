//! `filtration` subcommand: a named set of filtrations on one level and a
//! list of steps applied to them.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use clap::Args;
use num_traits::{One, Signed};
use serde::Deserialize;
use serde_json::{json, Value};

use soliton_core::filtrations::{
    dh_bivariate, dh_discrete, filtration_from_wt, geodesic, geodesic_dh_identity, level_from_germ,
    rescale, s_tilde_m, s_weighted_m, shift, successive_minima, twist, AtomicMeasure, Filtration,
    FiltrationKind, GradedLevel,
};
use soliton_core::rational::{parse_rational, Rational, RationalVector};

use crate::error::CliError;
use crate::io::{num, parse_json, q, read_file, GermSpecFile, InputDigest, Record};

#[derive(Args, Debug)]
pub struct FiltrationArgs {
    /// Pipeline JSON.
    pub ops: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PipelineFile {
    level: LevelEntry,
    #[serde(default)]
    filtrations: BTreeMap<String, FiltrationEntry>,
    #[serde(default)]
    steps: Vec<Step>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelEntry {
    germ: GermSpecFile,
    m: u64,
    #[serde(default)]
    cutoff: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum FiltrationEntry {
    /// Weight filtration `⟨β, ξ⟩ + m·A(ξ)`.
    Wt {
        xi: Vec<String>,
    },
    /// One value per basis point, in level order.
    Monomial {
        values: Vec<String>,
    },
    Flag {
        jumps: Vec<JumpEntry>,
    },
    Trivial,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JumpEntry {
    lambda: String,
    generators: Vec<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
enum Step {
    Table {
        of: String,
    },
    Minima {
        of: String,
    },
    Measure {
        of: String,
    },
    Bivariate {
        of: [String; 2],
    },
    STilde {
        of: String,
    },
    SWeighted {
        reference: String,
        of: String,
        mu0: String,
        t: String,
    },
    Shift {
        of: String,
        by: String,
        #[serde(rename = "as")]
        name: String,
    },
    Rescale {
        of: String,
        by: String,
        #[serde(rename = "as")]
        name: String,
    },
    Twist {
        of: String,
        xi: Vec<String>,
        #[serde(rename = "as")]
        name: String,
    },
    Geodesic {
        from: String,
        to: String,
        t: String,
        #[serde(rename = "as")]
        name: String,
    },
    GeodesicIdentity {
        from: String,
        to: String,
        t: String,
    },
}

fn rational(s: &str) -> Result<Rational, CliError> {
    parse_rational(s).map_err(|e| CliError::Pipeline(format!("'{s}': {e}")))
}

fn rationals(xs: &[String]) -> Result<Vec<Rational>, CliError> {
    xs.iter().map(|s| rational(s)).collect()
}

fn measure_json(m: &AtomicMeasure) -> Value {
    json!({
        "atoms": m.atoms.iter().map(|(x, w)| json!([q(x), q(w)])).collect::<Vec<_>>(),
        "total_mass": q(&m.total_mass()),
    })
}

fn table_json(f: &Filtration) -> Value {
    let kind = match f.kind() {
        FiltrationKind::Monomial(_) => "monomial",
        FiltrationKind::Flag(_) => "flag",
    };
    json!({
        "kind": kind,
        "jumps": f.jump_table().iter().map(|(l, d)| json!([q(l), d])).collect::<Vec<_>>(),
    })
}

struct Workspace {
    level: Arc<GradedLevel>,
    spec: soliton_core::germ::GermSpec,
    named: BTreeMap<String, Filtration>,
}

impl Workspace {
    fn get(&self, name: &str) -> Result<&Filtration, CliError> {
        self.named
            .get(name)
            .ok_or_else(|| CliError::Pipeline(format!("unknown filtration '{name}'")))
    }

    fn build(&self, entry: &FiltrationEntry) -> Result<Filtration, CliError> {
        let dim = self.level.dim();
        Ok(match entry {
            FiltrationEntry::Wt { xi } => {
                let xi = RationalVector::new(rationals(xi)?);
                filtration_from_wt(&self.spec, self.level.clone(), &xi)?
            }
            FiltrationEntry::Monomial { values } => {
                Filtration::monomial(self.level.clone(), rationals(values)?)?
            }
            FiltrationEntry::Flag { jumps } => {
                let mut parsed = Vec::with_capacity(jumps.len());
                for j in jumps {
                    let gens = j
                        .generators
                        .iter()
                        .map(|row| rationals(row))
                        .collect::<Result<Vec<_>, _>>()?;
                    if let Some(row) = gens.iter().find(|r| r.len() != dim) {
                        return Err(CliError::Pipeline(format!(
                            "generator has {} entries, level has dimension {dim}",
                            row.len()
                        )));
                    }
                    parsed.push((rational(&j.lambda)?, gens));
                }
                Filtration::flag(self.level.clone(), parsed)?
            }
            FiltrationEntry::Trivial => Filtration::trivial(self.level.clone()),
        })
    }

    fn run(&mut self, step: &Step) -> Result<Value, CliError> {
        Ok(match step {
            Step::Table { of } => {
                json!({"op": "table", "of": of, "table": table_json(self.get(of)?)})
            }
            Step::Minima { of } => json!({
                "op": "minima",
                "of": of,
                "minima": successive_minima(self.get(of)?)
                    .iter()
                    .map(|(l, k)| json!([q(l), k]))
                    .collect::<Vec<_>>(),
            }),
            Step::Measure { of } => {
                json!({"op": "measure", "of": of, "measure": measure_json(&dh_discrete(self.get(of)?))})
            }
            Step::Bivariate { of: [a, b] } => {
                let biv = dh_bivariate(self.get(a)?, self.get(b)?)?;
                json!({
                    "op": "bivariate",
                    "of": [a, b],
                    "atoms": biv.atoms.iter().map(|((x, y), w)| json!([q(x), q(y), q(w)])).collect::<Vec<_>>(),
                    "total_mass": q(&biv.total_mass()),
                })
            }
            Step::STilde { of } => {
                json!({"op": "s_tilde", "of": of, "value": num(s_tilde_m(self.get(of)?))})
            }
            Step::SWeighted {
                reference,
                of,
                mu0,
                t,
            } => {
                let v = s_weighted_m(
                    self.get(reference)?,
                    &rational(mu0)?,
                    self.get(of)?,
                    &rational(t)?,
                )?;
                json!({"op": "s_weighted", "reference": reference, "of": of, "value": num(v)})
            }
            Step::Shift { of, by, name } => {
                let f = shift(self.get(of)?, &rational(by)?);
                self.store("shift", name, f)
            }
            Step::Rescale { of, by, name } => {
                let a = rational(by)?;
                if !a.is_positive() {
                    return Err(CliError::Pipeline("rescale factor must be positive".into()));
                }
                let f = rescale(self.get(of)?, &a);
                self.store("rescale", name, f)
            }
            Step::Twist { of, xi, name } => {
                let f = twist(self.get(of)?, &RationalVector::new(rationals(xi)?))?;
                self.store("twist", name, f)
            }
            Step::Geodesic { from, to, t, name } => {
                let t = unit_interval(t)?;
                let f = geodesic(self.get(from)?, self.get(to)?, &t)?;
                self.store("geodesic", name, f)
            }
            Step::GeodesicIdentity { from, to, t } => {
                let t = unit_interval(t)?;
                let check = geodesic_dh_identity(self.get(from)?, self.get(to)?, &t)?;
                json!({
                    "op": "geodesic_identity",
                    "from": from,
                    "to": to,
                    "t": q(&t),
                    "holds": check.holds,
                    "deviation": q(&check.deviation),
                })
            }
        })
    }

    fn store(&mut self, op: &str, name: &str, f: Filtration) -> Value {
        let out = json!({"op": op, "as": name, "table": table_json(&f)});
        self.named.insert(name.to_string(), f);
        out
    }
}

fn unit_interval(t: &str) -> Result<Rational, CliError> {
    let t = rational(t)?;
    if t.is_negative() || t > Rational::one() {
        return Err(CliError::Pipeline(format!(
            "geodesic parameter {t} is outside [0, 1]"
        )));
    }
    Ok(t)
}

pub fn filtration(args: &FiltrationArgs) -> Result<Record, CliError> {
    let bytes = read_file(&args.ops)?;
    let raw: Value = parse_json(&bytes, "pipeline")?;
    let file: PipelineFile =
        serde_json::from_value(raw).map_err(|e| CliError::Pipeline(e.to_string()))?;
    let spec = file.level.germ.to_spec()?;
    let cutoff = file.level.cutoff.as_deref().map(rational).transpose()?;
    if file.level.m == 0 {
        return Err(CliError::Pipeline("level m must be positive".into()));
    }
    let level = Arc::new(level_from_germ(&spec, file.level.m, cutoff)?);
    let mut ws = Workspace {
        level: level.clone(),
        spec,
        named: BTreeMap::new(),
    };
    let mut inputs = serde_json::Map::new();
    for (name, entry) in &file.filtrations {
        let f = ws.build(entry)?;
        inputs.insert(name.clone(), table_json(&f));
        ws.named.insert(name.clone(), f);
    }
    let steps = file
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| ws.run(s).map_err(|e| e.context(&format!("step {i}"))))
        .collect::<Result<Vec<_>, _>>()?;

    let mut digest = InputDigest::new("filtration");
    digest.file(&bytes);
    let mut rec = Record::new("filtration", digest);
    rec.output(
        "level",
        json!({
            "m": level.m(),
            "dim": level.dim(),
            "points": level.points(),
        }),
    )
    .output("filtrations", Value::Object(inputs))
    .output("steps", Value::Array(steps))
    .diagnostic("tolerance", json!("exact"));
    Ok(rec)
}
