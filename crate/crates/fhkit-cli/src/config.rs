//! Scenario files: a TOML document with one `[[scenario]]` table per run.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::ops::{FeffParams, FhParams, NormParams, QcalcParams, SquareParams, SwParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operation {
    FhCheck,
    QcalcVerify,
    NormSweep,
    Fefferman,
    SwSweep,
    SquareSum,
}

impl Operation {
    fn needs_phase(self) -> bool {
        matches!(self, Operation::FhCheck | Operation::NormSweep | Operation::SquareSum)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub scenario: Vec<Scenario>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub operation: Operation,
    pub phase: Option<PathBuf>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: toml::Table,
    #[serde(default)]
    pub expect: Expect,
}

/// Assertions checked against a scenario's results.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    pub verdict: Option<String>,
    pub slope_min: Option<f64>,
    pub slope_max: Option<f64>,
    pub r2_min: Option<f64>,
    /// |slope| ≤ fraction · slope of another scenario in the same run.
    pub slope_fraction_of: Option<Relative>,
    /// |slope − predicted| ≤ tol · |predicted|.
    pub predicted_rel_tol: Option<f64>,
    pub max_le: Option<f64>,
    pub max_ge: Option<f64>,
    pub all_pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Relative {
    pub scenario: String,
    pub fraction: f64,
}

#[derive(Debug, Clone)]
pub enum OpParams {
    FhCheck(FhParams),
    QcalcVerify(QcalcParams),
    NormSweep(NormParams),
    Fefferman(FeffParams),
    SwSweep(SwParams),
    SquareSum(SquareParams),
}

impl OpParams {
    pub fn has_slope(&self) -> bool {
        matches!(self, OpParams::NormSweep(_) | OpParams::Fefferman(_) | OpParams::SquareSum(_))
    }
}

/// A scenario after schema checks, with resolved paths and seed.
#[derive(Debug, Clone)]
pub struct Planned {
    pub id: String,
    pub operation: Operation,
    pub phase: Option<PathBuf>,
    pub seed: Option<u64>,
    pub params: OpParams,
    pub expect: Expect,
}

pub fn parse_config(text: &str) -> Result<Config> {
    let de = toml::Deserializer::parse(text).map_err(|e| CliError::config("<document>", e.message().to_string()))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        CliError::config(field, e.inner().message().to_string())
    })
}

fn typed<T: DeserializeOwned>(field: &str, table: &toml::Table) -> Result<T> {
    serde_path_to_error::deserialize(toml::Value::Table(table.clone())).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { field.to_string() } else { format!("{field}.{path}") };
        CliError::config(field, e.inner().to_string().trim().to_string())
    })
}

/// Check the schema, resolve phase paths against `base`, and apply the fallback seed.
pub fn plan(config: Config, base: &Path, fallback_seed: Option<u64>) -> Result<Vec<Planned>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, s) in config.scenario.into_iter().enumerate() {
        let at = |f: &str| format!("scenario[{i}].{f}");
        if !seen.insert(s.id.clone()) {
            return Err(CliError::config(at("id"), format!("duplicate id {:?}", s.id)));
        }
        if s.operation.needs_phase() && s.phase.is_none() {
            return Err(CliError::config(at("phase"), format!("{:?} needs a phase file", s.operation)));
        }
        let field = at("params");
        let params = match s.operation {
            Operation::FhCheck => OpParams::FhCheck(typed(&field, &s.params)?),
            Operation::QcalcVerify => OpParams::QcalcVerify(typed(&field, &s.params)?),
            Operation::NormSweep => OpParams::NormSweep(typed(&field, &s.params)?),
            Operation::Fefferman => OpParams::Fefferman(typed(&field, &s.params)?),
            Operation::SwSweep => OpParams::SwSweep(typed(&field, &s.params)?),
            Operation::SquareSum => OpParams::SquareSum(typed(&field, &s.params)?),
        };
        let seed = s.seed.or(fallback_seed);
        let randomised = match &params {
            OpParams::SwSweep(_) => true,
            OpParams::QcalcVerify(q) => q.check.includes_identity(),
            _ => false,
        };
        if randomised && seed.is_none() {
            return Err(CliError::config(at("seed"), "randomised operation needs a seed"));
        }
        check_expect(&s.expect, &params, &at("expect"))?;
        out.push(Planned {
            id: s.id,
            operation: s.operation,
            phase: s.phase.map(|p| if p.is_absolute() { p } else { base.join(p) }),
            seed,
            params,
            expect: s.expect,
        });
    }
    for (i, p) in out.iter().enumerate() {
        if let Some(rel) = &p.expect.slope_fraction_of {
            let target = out.iter().find(|q| q.id == rel.scenario).ok_or_else(|| {
                CliError::config(format!("scenario[{i}].expect.slope_fraction_of.scenario"), format!("no scenario {:?}", rel.scenario))
            })?;
            if !target.params.has_slope() {
                return Err(CliError::config(
                    format!("scenario[{i}].expect.slope_fraction_of.scenario"),
                    format!("{:?} reports no slope", rel.scenario),
                ));
            }
        }
    }
    Ok(out)
}

fn check_expect(e: &Expect, params: &OpParams, field: &str) -> Result<()> {
    let bad = |name: &str| Err(CliError::config(format!("{field}.{name}"), "assertion does not apply to this operation"));
    if e.verdict.is_some() {
        if !matches!(params, OpParams::FhCheck(_)) {
            return bad("verdict");
        }
        let v = e.verdict.as_deref().unwrap();
        if v != "VIOLATED" && v != "NO_WITNESS_FOUND" {
            return Err(CliError::config(format!("{field}.verdict"), format!("unknown verdict {v:?}")));
        }
    }
    let slope_fields = [
        ("slope_min", e.slope_min.is_some()),
        ("slope_max", e.slope_max.is_some()),
        ("r2_min", e.r2_min.is_some()),
        ("slope_fraction_of", e.slope_fraction_of.is_some()),
    ];
    for (name, set) in slope_fields {
        if set && !params.has_slope() {
            return bad(name);
        }
    }
    if e.predicted_rel_tol.is_some() && !matches!(params, OpParams::SquareSum(_)) {
        return bad("predicted_rel_tol");
    }
    for (name, set) in [("max_le", e.max_le.is_some()), ("max_ge", e.max_ge.is_some())] {
        if set && !matches!(params, OpParams::SwSweep(_)) {
            return bad(name);
        }
    }
    if e.all_pass.is_some() && !matches!(params, OpParams::QcalcVerify(_)) {
        return bad("all_pass");
    }
    Ok(())
}
