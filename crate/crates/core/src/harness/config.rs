//! Run configuration: a TOML document with `[problem]`, `[regularizer]`,
//! `[method]` and `[output]` sections.
//!
//! ```toml
//! [problem]
//! solution = [0.0, 0.0, 1.0]
//!
//! [problem.domain]
//! kind = "simplex"        # interval | cube | orthant | box | simplex | polyhedron
//! dim = 3
//!
//! [problem.field]
//! kind = "shifted_identity"   # affine | shifted_identity | identity | unit_offset
//! u = [-0.4, 0.0, 1.0]
//!
//! [regularizer]
//! kernel = "entropy"      # euclidean | entropy | tsallis:q=<q> | hellinger
//!
//! [method]
//! preset = "md"           # or alpha_a / alpha_b
//! gamma = 0.1             # number, list of numbers, or "auto"
//! horizon = 100000
//!
//! [output]
//! dir = "out"
//! seed = 0
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::domains::Domain;
use crate::field::{AffineField, VectorField};
use crate::kernels::{BregmanKernel, Regularizer};
use crate::solver::{default_step, MethodConfig, Preset, Problem, StepSchedule};

pub const DEFAULT_HORIZON: usize = 100_000;
pub const DEFAULT_BURN_IN: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub problem: ProblemSection,
    pub regularizer: RegularizerSection,
    pub method: MethodSection,
    #[serde(default)]
    pub output: OutputSection,
    /// Directory that relative paths inside the config resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub domain: DomainSection,
    pub field: FieldSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strong: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    /// CSV file with one constraint per row, as an alternative to `a`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slater: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizerSection {
    pub kernel: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<toml::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<Vec<f64>>,
    /// Early-stop threshold on `D(x*, X_t)`; `0` disables it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub early_stop: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<f64>,
}

/// A validated configuration, ready to run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub problem: Problem,
    pub regularizer: Regularizer,
    pub method: MethodConfig,
    pub seed: u64,
    pub burn_in: f64,
    pub out_dir: Option<PathBuf>,
}

fn cfg_err(path: &str, msg: impl std::fmt::Display) -> HarnessError {
    HarnessError::Config(format!("{path}: {msg}"))
}

fn required<T: Clone>(v: &Option<T>, path: &str) -> Result<T, HarnessError> {
    v.clone().ok_or_else(|| cfg_err(path, "missing required field"))
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| cfg_err(&path.display().to_string(), e))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))
    }

    pub fn from_table(table: toml::Table) -> Result<Self, HarnessError> {
        let text = toml::to_string(&table).map_err(|e| HarnessError::Config(e.to_string()))?;
        toml::from_str(&text).map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))
    }

    pub fn to_table(&self) -> Result<toml::Table, HarnessError> {
        toml::Table::try_from(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String, HarnessError> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> Result<String, HarnessError> {
        let digest = Sha256::digest(self.to_toml()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn build(&self) -> Result<Experiment, HarnessError> {
        let domain = self.build_domain()?;
        let n = domain.dim();
        let (field, auto_l, auto_mu) = self.build_field(n)?;
        let lipschitz = match (self.problem.lipschitz, auto_l) {
            (Some(l), _) | (None, Some(l)) => l,
            (None, None) => return Err(cfg_err("problem.lipschitz", "missing required field")),
        };
        let strong = match (self.problem.strong, auto_mu) {
            (Some(m), _) => m,
            (None, Some(m)) if m > 0.0 => m,
            _ => return Err(cfg_err("problem.strong", "missing and the field is not strongly monotone")),
        };
        let mut problem = Problem::new(domain.clone(), field, lipschitz, strong)
            .map_err(|e| cfg_err("problem", e))?
            .with_radius(self.problem.radius.unwrap_or(f64::INFINITY));
        if let Some(xs) = &self.problem.solution {
            problem = problem.with_solution(xs.clone()).map_err(|e| cfg_err("problem.solution", e))?;
        }
        let kernel = BregmanKernel::parse(&self.regularizer.kernel).map_err(|e| cfg_err("regularizer.kernel", e))?;
        let regularizer = Regularizer::new(kernel, domain.clone()).map_err(|e| cfg_err("regularizer.kernel", e))?;
        let method = self.build_method(&domain, lipschitz, strong)?;
        let burn_in = self.output.burn_in.unwrap_or(DEFAULT_BURN_IN);
        if !(0.0..1.0).contains(&burn_in) {
            return Err(cfg_err("output.burn_in", "must lie in [0, 1)"));
        }
        Ok(Experiment {
            problem,
            regularizer,
            method,
            seed: self.output.seed.unwrap_or(0),
            burn_in,
            out_dir: self.output.dir.as_ref().map(PathBuf::from),
        })
    }

    fn build_domain(&self) -> Result<Domain, HarnessError> {
        let d = &self.problem.domain;
        let dim = |path| required(&d.dim, path);
        let res = match d.kind.as_str() {
            "interval" => {
                Domain::interval(required(&d.lo, "problem.domain.lo")?, required(&d.hi, "problem.domain.hi")?)
            }
            "cube" => Domain::cube(
                required(&d.lo, "problem.domain.lo")?,
                required(&d.hi, "problem.domain.hi")?,
                dim("problem.domain.dim")?,
            ),
            "orthant" => Ok(Domain::orthant(dim("problem.domain.dim")?)),
            "box" => Domain::orthant_box(required(&d.upper, "problem.domain.upper")?),
            "simplex" => Domain::simplex(dim("problem.domain.dim")?),
            "polyhedron" => {
                let a = match (&d.a, &d.a_csv) {
                    (Some(a), None) => a.clone(),
                    (None, Some(path)) => self.read_matrix(path)?,
                    (Some(_), Some(_)) => {
                        return Err(cfg_err("problem.domain.a", "give either `a` or `a_csv`, not both"))
                    }
                    (None, None) => return Err(cfg_err("problem.domain.a", "missing required field")),
                };
                let b = required(&d.b, "problem.domain.b")?;
                match &d.slater {
                    Some(s) => Domain::polyhedron_with_slater(a, b, s.clone()),
                    None => Domain::polyhedron(a, b),
                }
            }
            other => return Err(cfg_err("problem.domain.kind", format!("unknown domain kind `{other}`"))),
        };
        res.map_err(|e| cfg_err("problem.domain", e))
    }

    fn read_matrix(&self, path: &str) -> Result<Vec<Vec<f64>>, HarnessError> {
        let full = match &self.base_dir {
            Some(dir) => dir.join(path),
            None => PathBuf::from(path),
        };
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(&full)
            .map_err(|e| cfg_err("problem.domain.a_csv", e))?;
        let mut rows = Vec::new();
        for (k, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| cfg_err("problem.domain.a_csv", e))?;
            let row = rec
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| cfg_err("problem.domain.a_csv", format!("row {}: {e}", k + 1)))?;
            rows.push(row);
        }
        Ok(rows)
    }

    #[allow(clippy::type_complexity)]
    fn build_field(&self, n: usize) -> Result<(Arc<dyn VectorField>, Option<f64>, Option<f64>), HarnessError> {
        let f = &self.problem.field;
        let check = |path: &str, v: &[f64]| {
            if v.len() == n {
                Ok(())
            } else {
                Err(cfg_err(path, format!("expected {n} entries, got {}", v.len())))
            }
        };
        let affine = match f.kind.as_str() {
            "affine" => {
                let m = required(&f.matrix, "problem.field.matrix")?;
                let q = f.offset.clone().unwrap_or_else(|| vec![0.0; n]);
                check("problem.field.offset", &q)?;
                if m.len() != n || m.iter().any(|r| r.len() != n) {
                    return Err(cfg_err("problem.field.matrix", format!("expected a {n}x{n} matrix")));
                }
                AffineField::new(m, q).map_err(|e| cfg_err("problem.field", e))?
            }
            "shifted_identity" => {
                let u = required(&f.u, "problem.field.u")?;
                check("problem.field.u", &u)?;
                AffineField::shifted_identity(&u)
            }
            "identity" => AffineField::identity(n),
            "unit_offset" => AffineField::shifted(vec![1.0; n]),
            other => return Err(cfg_err("problem.field.kind", format!("unknown field `{other}`"))),
        };
        let (l, mu) = (affine.lipschitz(), affine.monotonicity());
        Ok((Arc::new(affine), Some(l), Some(mu)))
    }

    fn build_method(&self, domain: &Domain, lipschitz: f64, strong: f64) -> Result<MethodConfig, HarnessError> {
        let m = &self.method;
        let (a, b) = match (&m.preset, m.alpha_a, m.alpha_b) {
            (Some(p), None, None) => Preset::parse(p).map_err(|e| cfg_err("method.preset", e))?.coefficients(),
            (None, a, b) => (a.unwrap_or(0.0), b.unwrap_or(0.0)),
            (Some(_), _, _) => return Err(cfg_err("method.preset", "give either a preset or alpha_a/alpha_b")),
        };
        let gamma = m.gamma.as_ref().ok_or_else(|| cfg_err("method.gamma", "missing required field"))?;
        let schedule = match gamma {
            toml::Value::Float(g) => StepSchedule::Constant(*g),
            toml::Value::Integer(g) => StepSchedule::Constant(*g as f64),
            toml::Value::String(s) if s == "auto" => StepSchedule::Constant(default_step(a, b, lipschitz, strong)),
            toml::Value::Array(items) => StepSchedule::Sequence(
                items
                    .iter()
                    .map(|v| match v {
                        toml::Value::Float(g) => Ok(*g),
                        toml::Value::Integer(g) => Ok(*g as f64),
                        _ => Err(cfg_err("method.gamma", "sequence entries must be numbers")),
                    })
                    .collect::<Result<_, _>>()?,
            ),
            _ => return Err(cfg_err("method.gamma", "expected a number, a list of numbers, or \"auto\"")),
        };
        let init = m.init.clone().unwrap_or_else(|| domain.center());
        if init.len() != domain.dim() {
            return Err(cfg_err("method.init", format!("expected {} entries, got {}", domain.dim(), init.len())));
        }
        let horizon = m.horizon.unwrap_or(DEFAULT_HORIZON);
        let cfg = MethodConfig::new(a, b, schedule, horizon, init).map_err(|e| cfg_err("method", e))?;
        Ok(match m.early_stop {
            Some(t) if t > 0.0 => cfg.with_early_stop(Some(t)),
            Some(_) => cfg.with_early_stop(None),
            None => cfg,
        })
    }
}

/// Sets the value at a dotted `path` (e.g. `method.gamma`), creating tables as needed.
pub fn set_path(table: &mut toml::Table, path: &str, value: toml::Value) -> Result<(), HarnessError> {
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(HarnessError::Config(format!("invalid parameter path `{path}`")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| HarnessError::Config(format!("{path}: `{p}` is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Parses one sweep value as a TOML scalar or array, falling back to a string.
pub fn parse_value(text: &str) -> toml::Value {
    let doc = format!("v = {text}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(text.to_string())),
        Err(_) => toml::Value::String(text.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EUCLID: &str = r#"
[problem]
solution = [0.0]

[problem.domain]
kind = "orthant"
dim = 1

[problem.field]
kind = "identity"

[regularizer]
kernel = "euclidean"

[method]
preset = "md"
gamma = 0.1
horizon = 500
init = [0.5]
"#;

    #[test]
    fn parses_and_builds() {
        let cfg = Config::parse(EUCLID).unwrap();
        let exp = cfg.build().unwrap();
        assert_eq!(exp.method.horizon, 500);
        assert_eq!(exp.problem.lipschitz, 1.0);
        assert_eq!(exp.method.gamma(1), 0.1);
    }

    #[test]
    fn missing_gamma_names_the_field() {
        let text = EUCLID.replace("gamma = 0.1\n", "");
        let err = Config::parse(&text).unwrap().build().unwrap_err();
        assert!(err.to_string().contains("method.gamma"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = EUCLID.replace("horizon = 500", "horizon = 500\nstep = 3");
        let err = Config::parse(&text).unwrap_err();
        assert!(err.to_string().contains("step"), "{err}");
    }

    #[test]
    fn round_trip() {
        let cfg = Config::parse(EUCLID).unwrap();
        let again = Config::parse(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash().unwrap(), again.hash().unwrap());
    }

    #[test]
    fn auto_step_and_paths() {
        let mut t = Config::parse(EUCLID).unwrap().to_table().unwrap();
        set_path(&mut t, "method.gamma", parse_value("\"auto\"")).unwrap();
        set_path(&mut t, "method.preset", parse_value("mp")).unwrap();
        let exp = Config::from_table(t).unwrap().build().unwrap();
        assert!((exp.method.gamma(1) - 0.9 / (2.0 * crate::solver::GOLDEN_RATIO)).abs() < 1e-15);
        assert_eq!(parse_value("0.25"), toml::Value::Float(0.25));
        assert_eq!(parse_value("[1, 2]"), toml::Value::Array(vec![toml::Value::Integer(1), toml::Value::Integer(2)]));
    }
}
