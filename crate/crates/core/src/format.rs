//! Model file format (TOML).
//!
//! ```toml
//! period = 0.005
//! b = { mean = 1.1, harmonics = [[1, 0.02, 0.0]] }
//!
//! [[terms]]
//! lambda = 1.0
//! m = 0.95
//! n = 2.0
//! r = { mean = 0.04, harmonics = [[1, 0.002, 0.0]] }
//! tau = 0.001                      # a bare number is a constant function
//! mu = { samples = [0.001, 0.002, 0.0015] }
//! ```
//!
//! `tau` and `mu` default to zero. Set `allow_inactive_terms = true` at the
//! top level to accept `lambda = 0`.

use std::path::Path;

use serde::Serialize;
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::model::{Model, Term};
use crate::periodic::{Harmonic, PeriodicFn};

impl Model {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        parse_model(&table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        let file = ModelFile {
            period: self.period(),
            allow_inactive_terms: self.allows_inactive_terms().then_some(true),
            b: FnOut::from(self.b()),
            terms: self
                .terms()
                .iter()
                .map(|t| TermOut {
                    lambda: t.lambda,
                    m: t.m,
                    n: t.n,
                    r: FnOut::from(&t.r),
                    tau: FnOut::from(&t.tau),
                    mu: FnOut::from(&t.mu),
                })
                .collect(),
        };
        toml::to_string(&file).expect("model serializes to TOML")
    }
}

const TOP_KEYS: &[&str] = &["period", "b", "terms", "allow_inactive_terms"];
const TERM_KEYS: &[&str] = &["lambda", "m", "n", "r", "tau", "mu"];

fn parse_model(table: &Table) -> Result<Model> {
    reject_unknown(table, TOP_KEYS, "")?;
    let period = number(required(table, "period", "period")?, "period")?;
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::model("period", format!("must be positive, got {period}")));
    }
    let allow_inactive = match table.get("allow_inactive_terms") {
        None => false,
        Some(Value::Boolean(v)) => *v,
        Some(_) => return Err(Error::model("allow_inactive_terms", "expected a boolean")),
    };
    let b = periodic(required(table, "b", "b")?, period, "b")?;
    let terms_value = required(table, "terms", "terms")?;
    let Value::Array(items) = terms_value else {
        return Err(Error::model("terms", "expected an array of tables"));
    };
    let mut terms = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let path = format!("terms[{i}]");
        let Value::Table(t) = item else {
            return Err(Error::model(path, "expected a table"));
        };
        reject_unknown(t, TERM_KEYS, &format!("{path}."))?;
        let field = |name: &str| format!("{path}.{name}");
        let lambda = number(required(t, "lambda", &field("lambda"))?, &field("lambda"))?;
        let m = number(required(t, "m", &field("m"))?, &field("m"))?;
        let n = number(required(t, "n", &field("n"))?, &field("n"))?;
        let r = periodic(required(t, "r", &field("r"))?, period, &field("r"))?;
        let tau = match t.get("tau") {
            Some(v) => periodic(v, period, &field("tau"))?,
            None => PeriodicFn::constant(period, 0.0)?,
        };
        let mu = match t.get("mu") {
            Some(v) => periodic(v, period, &field("mu"))?,
            None => PeriodicFn::constant(period, 0.0)?,
        };
        terms.push(Term::new(lambda, m, n, r, tau, mu));
    }
    if allow_inactive {
        Model::new_allowing_inactive(period, b, terms)
    } else {
        Model::new(period, b, terms)
    }
}

fn reject_unknown(table: &Table, known: &[&str], prefix: &str) -> Result<()> {
    match table.keys().find(|k| !known.contains(&k.as_str())) {
        Some(k) => Err(Error::model(format!("{prefix}{k}"), "unknown field")),
        None => Ok(()),
    }
}

fn required<'a>(table: &'a Table, key: &str, path: &str) -> Result<&'a Value> {
    table.get(key).ok_or_else(|| Error::model(path, "missing field"))
}

fn number(value: &Value, path: &str) -> Result<f64> {
    match value {
        Value::Float(v) => Ok(*v),
        Value::Integer(v) => Ok(*v as f64),
        _ => Err(Error::model(path, "expected a number")),
    }
}

fn periodic(value: &Value, period: f64, path: &str) -> Result<PeriodicFn> {
    let table = match value {
        Value::Float(_) | Value::Integer(_) => {
            return PeriodicFn::constant(period, number(value, path)?).map_err(|e| rename(e, path));
        }
        Value::Table(t) => t,
        _ => return Err(Error::model(path, "expected a number or a table")),
    };
    if let Some(samples) = table.get("samples") {
        reject_unknown(table, &["samples"], &format!("{path}."))?;
        let Value::Array(items) = samples else {
            return Err(Error::model(format!("{path}.samples"), "expected an array"));
        };
        let values = items
            .iter()
            .enumerate()
            .map(|(i, v)| number(v, &format!("{path}.samples[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        return PeriodicFn::sampled(period, values).map_err(|e| rename(e, path));
    }
    reject_unknown(table, &["mean", "harmonics"], &format!("{path}."))?;
    let mean = number(required(table, "mean", &format!("{path}.mean"))?, &format!("{path}.mean"))?;
    let mut harmonics = Vec::new();
    if let Some(h) = table.get("harmonics") {
        let Value::Array(items) = h else {
            return Err(Error::model(format!("{path}.harmonics"), "expected an array"));
        };
        for (i, item) in items.iter().enumerate() {
            let hp = format!("{path}.harmonics[{i}]");
            let entry = match item {
                Value::Array(a) if a.len() == 3 => a,
                _ => return Err(Error::model(hp, "expected [multiple, cos, sin]")),
            };
            let multiple = match &entry[0] {
                Value::Integer(j) if *j >= 1 && *j <= u32::MAX as i64 => *j as u32,
                _ => return Err(Error::model(hp, "frequency multiple must be an integer >= 1")),
            };
            harmonics.push(Harmonic::new(
                multiple,
                number(&entry[1], &hp)?,
                number(&entry[2], &hp)?,
            ));
        }
    }
    PeriodicFn::trig(period, mean, harmonics).map_err(|e| rename(e, path))
}

/// Prefixes the field name of a `PeriodicFn` construction error with its path.
fn rename(err: Error, path: &str) -> Error {
    match err {
        Error::InvalidModel { field, reason } => Error::model(format!("{path}.{field}"), reason),
        other => other,
    }
}

#[derive(Serialize)]
struct ModelFile {
    period: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    allow_inactive_terms: Option<bool>,
    b: FnOut,
    terms: Vec<TermOut>,
}

#[derive(Serialize)]
struct TermOut {
    lambda: f64,
    m: f64,
    n: f64,
    r: FnOut,
    tau: FnOut,
    mu: FnOut,
}

#[derive(Serialize)]
#[serde(untagged)]
enum FnOut {
    Constant(f64),
    Trig { mean: f64, harmonics: Vec<(u32, f64, f64)> },
    Sampled { samples: Vec<f64> },
}

impl From<&PeriodicFn> for FnOut {
    fn from(f: &PeriodicFn) -> Self {
        if let Some(samples) = f.samples() {
            return FnOut::Sampled {
                samples: samples.to_vec(),
            };
        }
        if f.harmonics().is_empty() {
            return FnOut::Constant(f.mean());
        }
        FnOut::Trig {
            mean: f.mean(),
            harmonics: f.harmonics().iter().map(|h| (h.multiple, h.cos, h.sin)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
period = 0.005
b = { mean = 1.1, harmonics = [[1, 0.02, 0.0]] }

[[terms]]
lambda = 1
m = 0.95
n = 2
r = { mean = 0.04, harmonics = [[1, 0.002, 0.0]] }
tau = 0.001
mu = { samples = [0.001, 0.002, 0.0015, 0.001] }

[[terms]]
lambda = 1.0
m = 1.12
n = 0.11
r = 0.06
"#;

    #[test]
    fn parses_and_round_trips() {
        let model = Model::from_toml_str(SAMPLE).unwrap();
        assert_eq!(model.terms().len(), 2);
        assert_eq!(model.period(), 0.005);
        assert!((model.b().evaluate(0.0) - 1.12).abs() < 1e-15);
        assert_eq!(model.terms()[1].tau.evaluate(0.001), 0.0);
        let again = Model::from_toml_str(&model.to_toml_string()).unwrap();
        assert_eq!(again, model);
    }

    fn err_of(text: &str) -> String {
        Model::from_toml_str(text).unwrap_err().to_string()
    }

    #[test]
    fn missing_period_is_named() {
        let text = SAMPLE.replace("period = 0.005", "");
        assert!(err_of(&text).contains("`period`"));
    }

    #[test]
    fn zero_lambda_is_named() {
        let text = SAMPLE.replacen("lambda = 1.0", "lambda = 0.0", 1);
        assert!(err_of(&text).contains("terms[1].lambda"));
        let text = format!("allow_inactive_terms = true\n{text}");
        assert!(Model::from_toml_str(&text).is_ok());
    }

    #[test]
    fn bad_harmonic_and_unknown_keys() {
        let text = SAMPLE.replace("[[1, 0.002, 0.0]]", "[[0, 0.002, 0.0]]");
        assert!(err_of(&text).contains("terms[0].r.harmonics[0]"));
        let text = SAMPLE.replace("m = 1.12", "m = 1.12\nfoo = 3");
        assert!(err_of(&text).contains("terms[1].foo"));
        assert!(err_of("period = [").contains("parse"));
    }
}
