//! Scenario files: a JSON document holding one scenario or
//! `{"scenarios": [...]}`.
//!
//! Numbers may be JSON numbers or strings. JSON integers and strings such as
//! `"1/3"` or `"0.25"` are exact rationals; JSON floats are real.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_rational::Rational64;
use serde::Deserialize;
use thiserror::Error;
use tsirelson::sequence::SequenceError;
use tsirelson::torus::{MeasureError, PiecewiseDensity};
use tsirelson::{Anchor, Coord, MeanRule, MeasureSequence, TailRule, TorusMeasure, VarianceRule};

pub const DEFAULT_DEPTH: u64 = 30;
pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_PMAX: u32 = 64;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column} (field `{field}`): {message}")]
    Parse {
        line: usize,
        column: usize,
        field: String,
        message: String,
    },
    #[error("invalid scenario `{scenario}` at `{field}`: {message}")]
    Validation {
        scenario: String,
        field: String,
        message: String,
    },
    #[error("no scenario named `{0}`")]
    NotFound(String),
}

/// A number as written in a scenario file.
#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    Exact(Rational64),
    Real(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            Number::Real(x) => *x,
        }
    }

    pub fn to_coord(&self) -> Coord {
        match self {
            Number::Exact(r) => Coord::exact(*r),
            Number::Real(x) => Coord::real(*x),
        }
    }
}

impl FromStr for Number {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: i64 = num.trim().parse().map_err(|_| format!("bad numerator in `{s}`"))?;
            let den: i64 = den.trim().parse().map_err(|_| format!("bad denominator in `{s}`"))?;
            if den == 0 {
                return Err(format!("zero denominator in `{s}`"));
            }
            return Ok(Number::Exact(Rational64::new(num, den)));
        }
        parse_decimal(s)
            .map(Number::Exact)
            .or_else(|| s.parse::<f64>().ok().filter(|x| x.is_finite()).map(Number::Real))
            .ok_or_else(|| format!("`{s}` is not a number"))
    }
}

/// Plain decimal literals (`-0.125`, `3`) as exact rationals.
fn parse_decimal(s: &str) -> Option<Rational64> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) || frac.len() > 18 {
        return None;
    }
    let den = 10i64.checked_pow(frac.len() as u32)?;
    let int: i64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let frac: i64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    let num = int.checked_mul(den)?.checked_add(frac)?;
    Some(Rational64::new(if neg { -num } else { num }, den))
}

impl<'de> Deserialize<'de> for Number {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct Visitor;

        impl serde::de::Visitor<'_> for Visitor {
            type Value = Number;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or a numeric string such as \"1/3\"")
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<Number, E> {
                Ok(Number::Exact(Rational64::from_integer(v)))
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<Number, E> {
                i64::try_from(v)
                    .map(|v| Number::Exact(Rational64::from_integer(v)))
                    .map_err(|_| E::custom(format!("integer {v} is too large")))
            }

            fn visit_f64<E: serde::de::Error>(self, v: f64) -> Result<Number, E> {
                Ok(Number::Real(v))
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Number, E> {
                v.parse().map_err(E::custom)
            }
        }

        d.deserialize_any(Visitor)
    }
}

/// Field errors found after parsing: `(relative field path, message)`.
type FieldError = (String, String);

fn required<'a, T>(value: &'a Option<T>, field: &str, kind: &str) -> Result<&'a T, FieldError> {
    value
        .as_ref()
        .ok_or_else(|| (field.to_string(), format!("`{field}` is required for {kind}")))
}

fn reject_extra(present: &[(&str, bool)], kind: &str) -> Result<(), FieldError> {
    match present.iter().find(|(_, p)| *p) {
        Some((field, _)) => Err((field.to_string(), format!("`{field}` does not apply to {kind}"))),
        None => Ok(()),
    }
}

/// A measure literal, e.g. `{"type": "dirac", "x": "1/3"}`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureLiteral {
    #[serde(rename = "type")]
    pub kind: String,
    pub x: Option<Number>,
    pub points: Option<Vec<(Number, Number)>>,
    pub mean: Option<Number>,
    pub variance: Option<Number>,
    pub breaks: Option<Vec<Number>>,
    pub densities: Option<Vec<Number>>,
}

impl MeasureLiteral {
    pub fn build(&self) -> Result<TorusMeasure, FieldError> {
        let kind = self.kind.as_str();
        let present = |names: &[&str]| -> Vec<(&'static str, bool)> {
            [
                ("x", self.x.is_some()),
                ("points", self.points.is_some()),
                ("mean", self.mean.is_some()),
                ("variance", self.variance.is_some()),
                ("breaks", self.breaks.is_some()),
                ("densities", self.densities.is_some()),
            ]
            .into_iter()
            .filter(|(n, _)| !names.contains(n))
            .collect()
        };
        let invalid = |e: MeasureError| ("type".to_string(), e.to_string());
        match kind {
            "dirac" => {
                reject_extra(&present(&["x"]), kind)?;
                Ok(TorusMeasure::dirac(required(&self.x, "x", kind)?.to_coord()))
            }
            "atoms" => {
                reject_extra(&present(&["points"]), kind)?;
                let points = required(&self.points, "points", kind)?;
                TorusMeasure::atoms(points.iter().map(|(x, w)| (x.to_coord(), w.to_f64())).collect())
                    .map_err(|e| ("points".to_string(), e.to_string()))
            }
            "wrapped_gaussian" => {
                reject_extra(&present(&["mean", "variance"]), kind)?;
                TorusMeasure::wrapped_gaussian(
                    required(&self.mean, "mean", kind)?.to_f64(),
                    required(&self.variance, "variance", kind)?.to_f64(),
                )
                .map_err(|e| ("variance".to_string(), e.to_string()))
            }
            "uniform" => {
                reject_extra(&present(&[]), kind)?;
                Ok(TorusMeasure::Uniform)
            }
            "piecewise" => {
                reject_extra(&present(&["breaks", "densities"]), kind)?;
                TorusMeasure::piecewise(
                    to_f64s(required(&self.breaks, "breaks", kind)?),
                    to_f64s(required(&self.densities, "densities", kind)?),
                )
                .map_err(invalid)
            }
            other => Err((
                "type".into(),
                format!("unknown measure type `{other}` (dirac, atoms, wrapped_gaussian, uniform, piecewise)"),
            )),
        }
    }
}

fn to_f64s(v: &[Number]) -> Vec<f64> {
    v.iter().map(Number::to_f64).collect()
}

/// A mean or variance rule, e.g. `{"rule": "geometric", "c": 0.25, "r": 0.5}`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleLiteral {
    pub rule: String,
    pub value: Option<Number>,
    pub c: Option<Number>,
    pub r: Option<Number>,
    pub s: Option<Number>,
}

impl RuleLiteral {
    fn extra(&self, allowed: &[&str]) -> Result<(), FieldError> {
        let present = [
            ("value", self.value.is_some()),
            ("c", self.c.is_some()),
            ("r", self.r.is_some()),
            ("s", self.s.is_some()),
        ];
        let filtered: Vec<_> = present.into_iter().filter(|(n, _)| !allowed.contains(n)).collect();
        reject_extra(&filtered, &self.rule)
    }

    fn means(&self) -> Result<MeanRule, FieldError> {
        let kind = self.rule.as_str();
        match kind {
            "zero" => self.extra(&[]).map(|_| MeanRule::Zero),
            "constant" => {
                self.extra(&["value"])?;
                Ok(MeanRule::Constant(required(&self.value, "value", kind)?.to_f64()))
            }
            "alternating" => {
                self.extra(&["value"])?;
                Ok(MeanRule::Alternating(required(&self.value, "value", kind)?.to_f64()))
            }
            other => Err(("rule".into(), format!("unknown mean rule `{other}` (zero, constant, alternating)"))),
        }
    }

    fn variances(&self) -> Result<VarianceRule, FieldError> {
        let kind = self.rule.as_str();
        match kind {
            "geometric" => {
                self.extra(&["c", "r"])?;
                Ok(VarianceRule::Geometric {
                    c: required(&self.c, "c", kind)?.to_f64(),
                    r: required(&self.r, "r", kind)?.to_f64(),
                })
            }
            "power_law" => {
                self.extra(&["c", "s"])?;
                Ok(VarianceRule::PowerLaw {
                    c: required(&self.c, "c", kind)?.to_f64(),
                    s: required(&self.s, "s", kind)?.to_f64(),
                })
            }
            "constant" => {
                self.extra(&["value"])?;
                Ok(VarianceRule::Constant(required(&self.value, "value", kind)?.to_f64()))
            }
            other => Err((
                "rule".into(),
                format!("unknown variance rule `{other}` (geometric, power_law, constant)"),
            )),
        }
    }
}

/// The rule for `mu_k` beyond the prefix.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailLiteral {
    #[serde(rename = "type")]
    pub kind: String,
    pub law: Option<MeasureLiteral>,
    pub means: Option<RuleLiteral>,
    pub variances: Option<RuleLiteral>,
    pub breaks: Option<Vec<Number>>,
    pub densities: Option<Vec<Number>>,
}

impl TailLiteral {
    fn build(&self) -> Result<TailRule, FieldError> {
        let kind = self.kind.as_str();
        let nest = |prefix: &str, (f, m): FieldError| (format!("{prefix}.{f}"), m);
        let present = |allowed: &[&str]| -> Vec<(&'static str, bool)> {
            [
                ("law", self.law.is_some()),
                ("means", self.means.is_some()),
                ("variances", self.variances.is_some()),
                ("breaks", self.breaks.is_some()),
                ("densities", self.densities.is_some()),
            ]
            .into_iter()
            .filter(|(n, _)| !allowed.contains(n))
            .collect()
        };
        match kind {
            "iid" => {
                reject_extra(&present(&["law"]), kind)?;
                let law = required(&self.law, "law", kind)?;
                Ok(TailRule::Iid(law.build().map_err(|e| nest("law", e))?))
            }
            "wrapped_gaussian_tail" => {
                reject_extra(&present(&["means", "variances"]), kind)?;
                let means = match &self.means {
                    Some(m) => m.means().map_err(|e| nest("means", e))?,
                    None => MeanRule::Zero,
                };
                let variances = required(&self.variances, "variances", kind)?
                    .variances()
                    .map_err(|e| nest("variances", e))?;
                Ok(TailRule::WrappedGaussianTail { means, variances })
            }
            "scaled_density" => {
                reject_extra(&present(&["breaks", "densities"]), kind)?;
                PiecewiseDensity::new(
                    to_f64s(required(&self.breaks, "breaks", kind)?),
                    to_f64s(required(&self.densities, "densities", kind)?),
                )
                .map(TailRule::ScaledDensityTail)
                .map_err(|e| ("densities".to_string(), e.to_string()))
            }
            other => Err((
                "type".into(),
                format!("unknown tail type `{other}` (iid, wrapped_gaussian_tail, scaled_density)"),
            )),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefaultsLiteral {
    pub depth: Option<u64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub pmax: Option<u32>,
    pub anchor: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioLiteral {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub prefix: Vec<MeasureLiteral>,
    pub tail: TailLiteral,
    #[serde(default)]
    pub defaults: DefaultsLiteral,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioList {
    scenarios: Vec<ScenarioLiteral>,
}

/// How the chain is started at depth `N`.
#[derive(Clone, Debug, PartialEq)]
pub enum AnchorSpec {
    Deterministic(Coord),
    Uniform,
    Law(TorusMeasure),
}

impl AnchorSpec {
    pub fn to_anchor(&self) -> Anchor {
        match self {
            AnchorSpec::Deterministic(x) => Anchor::Deterministic(x.to_point()),
            AnchorSpec::Uniform => Anchor::Uniform,
            AnchorSpec::Law(mu) => Anchor::Law(mu.clone()),
        }
    }
}

impl FromStr for AnchorSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s == "uniform" {
            return Ok(AnchorSpec::Uniform);
        }
        if let Some(x) = s.strip_prefix("det:") {
            return Ok(AnchorSpec::Deterministic(x.parse::<Number>()?.to_coord()));
        }
        if let Some(json) = s.strip_prefix("law:") {
            let lit: MeasureLiteral = serde_json::from_str(json).map_err(|e| format!("anchor law: {e}"))?;
            return lit
                .build()
                .map(AnchorSpec::Law)
                .map_err(|(field, msg)| format!("anchor law `{field}`: {msg}"));
        }
        Err(format!("anchor `{s}` is not det:<x>, uniform or law:<measure>"))
    }
}

impl fmt::Display for AnchorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnchorSpec::Deterministic(Coord::Exact(r)) => write!(f, "det:{r}"),
            AnchorSpec::Deterministic(x) => write!(f, "det:{}", x.to_f64()),
            AnchorSpec::Uniform => f.write_str("uniform"),
            AnchorSpec::Law(mu) => write!(f, "law:{}", mu.describe()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Defaults {
    pub depth: u64,
    pub samples: usize,
    pub seed: u64,
    pub pmax: u32,
    pub anchor: AnchorSpec,
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults {
            depth: DEFAULT_DEPTH,
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            pmax: DEFAULT_PMAX,
            anchor: AnchorSpec::Deterministic(Coord::zero()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub sequence: MeasureSequence,
    pub defaults: Defaults,
}

impl Scenario {
    /// Validates a parsed literal. `index` locates it within its file.
    pub fn from_literal(lit: &ScenarioLiteral, index: Option<usize>) -> Result<Self, ScenarioError> {
        let root = index.map_or(String::new(), |i| format!("scenarios[{i}]."));
        let invalid = |field: String, message: String| ScenarioError::Validation {
            scenario: lit.name.clone(),
            field: format!("{root}{field}"),
            message,
        };
        if lit.name.trim().is_empty() {
            return Err(invalid("name".into(), "name must not be empty".into()));
        }
        let prefix = lit
            .prefix
            .iter()
            .enumerate()
            .map(|(i, m)| m.build().map_err(|(f, msg)| invalid(format!("prefix[{i}].{f}"), msg)))
            .collect::<Result<Vec<_>, _>>()?;
        let tail = lit.tail.build().map_err(|(f, msg)| invalid(format!("tail.{f}"), msg))?;
        let sequence =
            MeasureSequence::new(prefix, tail).map_err(|e: SequenceError| invalid("tail".into(), e.to_string()))?;

        let d = &lit.defaults;
        let base = Defaults::default();
        let positive = |field: &str, value: Option<u64>| match value {
            Some(0) => Err(invalid(format!("defaults.{field}"), "must be positive".into())),
            _ => Ok(()),
        };
        positive("depth", d.depth)?;
        positive("samples", d.samples.map(|s| s as u64))?;
        positive("seed", d.seed)?;
        positive("pmax", d.pmax.map(u64::from))?;
        let anchor = match &d.anchor {
            Some(a) => a.parse().map_err(|e| invalid("defaults.anchor".into(), e))?,
            None => base.anchor,
        };
        Ok(Scenario {
            name: lit.name.clone(),
            description: lit.description.clone(),
            sequence,
            defaults: Defaults {
                depth: d.depth.unwrap_or(base.depth),
                samples: d.samples.unwrap_or(base.samples),
                seed: d.seed.unwrap_or(base.seed),
                pmax: d.pmax.unwrap_or(base.pmax),
                anchor,
            },
        })
    }
}

/// Parses every scenario in a JSON document.
pub fn parse_scenarios(text: &str) -> Result<Vec<Scenario>, ScenarioError> {
    // the top-level shape decides which typed parse runs, so that errors keep
    // their line, column and field path
    let shape: serde_json::Value = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        field: String::new(),
        message: e.to_string(),
    })?;
    let many = shape.get("scenarios").is_some();
    let scenarios = if many {
        let list: ScenarioList = typed_parse(text)?;
        list.scenarios
            .iter()
            .enumerate()
            .map(|(i, lit)| Scenario::from_literal(lit, Some(i)))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        let lit: ScenarioLiteral = typed_parse(text)?;
        vec![Scenario::from_literal(&lit, None)?]
    };
    let mut seen = BTreeSet::new();
    for (i, s) in scenarios.iter().enumerate() {
        if !seen.insert(s.name.as_str()) {
            return Err(ScenarioError::Validation {
                scenario: s.name.clone(),
                field: format!("scenarios[{i}].name"),
                message: "duplicate scenario name".into(),
            });
        }
    }
    Ok(scenarios)
}

fn typed_parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        ScenarioError::Parse {
            line: inner.line(),
            column: inner.column(),
            field,
            message: inner.to_string(),
        }
    })
}

/// Loads a scenario file. With several scenarios, `name` picks one;
/// otherwise the file must hold exactly one.
pub fn load_scenario(path: &Path, name: Option<&str>) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut all = parse_scenarios(&text)?;
    match name {
        Some(n) => all
            .into_iter()
            .find(|s| s.name == n)
            .ok_or_else(|| ScenarioError::NotFound(n.to_string())),
        None if all.len() == 1 => Ok(all.remove(0)),
        None => Err(ScenarioError::Validation {
            scenario: path.display().to_string(),
            field: "scenarios".into(),
            message: format!("{} scenarios in file; pick one with --name", all.len()),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!("1/3".parse::<Number>().unwrap(), Number::Exact(Rational64::new(1, 3)));
        assert_eq!("-0.125".parse::<Number>().unwrap(), Number::Exact(Rational64::new(-1, 8)));
        assert_eq!("1e-3".parse::<Number>().unwrap(), Number::Real(1e-3));
        assert!("1/0".parse::<Number>().is_err());
        assert!("abc".parse::<Number>().is_err());
    }

    #[test]
    fn json_integers_exact_floats_real() {
        let n: Vec<Number> = serde_json::from_str(r#"[2, 0.5, "1/2"]"#).unwrap();
        assert_eq!(n[0], Number::Exact(Rational64::from_integer(2)));
        assert_eq!(n[1], Number::Real(0.5));
        assert_eq!(n[2], Number::Exact(Rational64::new(1, 2)));
    }

    #[test]
    fn single_scenario() {
        let s = parse_scenarios(
            r#"{"name": "half", "tail": {"type": "iid", "law":
                {"type": "atoms", "points": [[0, "1/2"], ["1/2", "1/2"]]}},
                "defaults": {"depth": 12, "anchor": "det:1/4"}}"#,
        )
        .unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].defaults.depth, 12);
        assert_eq!(s[0].defaults.samples, DEFAULT_SAMPLES);
        assert_eq!(s[0].defaults.anchor, AnchorSpec::Deterministic(Coord::ratio(1, 4)));
        match s[0].sequence.tail() {
            TailRule::Iid(TorusMeasure::Atoms(a)) => assert!(a.all_exact()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_error_has_position_and_path() {
        let err = parse_scenarios("{\"scenarios\": [{\"name\": \"x\",\n \"tail\": {\"type\": \"iid\", \"law\": {\"type\": \"dirac\", \"x\": true}}}]}")
            .unwrap_err();
        match err {
            ScenarioError::Parse { line, field, .. } => {
                assert_eq!(line, 2);
                assert_eq!(field, "scenarios[0].tail.law.x");
            }
            other => panic!("{other}"),
        }
        let err = parse_scenarios(r#"{"name": "x", "tail": {"type": "iid", "law": {"type": "dirac", "x": true}}}"#)
            .unwrap_err();
        assert!(matches!(err, ScenarioError::Parse { .. }), "{err}");
    }

    #[test]
    fn validation_errors() {
        let bad_weights =
            r#"{"name": "x", "tail": {"type": "iid", "law": {"type": "atoms", "points": [[0, 0.3], ["1/2", 0.3]]}}}"#;
        assert!(matches!(parse_scenarios(bad_weights), Err(ScenarioError::Validation { .. })));
        let dup = r#"{"scenarios": [
            {"name": "a", "tail": {"type": "iid", "law": {"type": "uniform"}}},
            {"name": "a", "tail": {"type": "iid", "law": {"type": "uniform"}}}]}"#;
        assert!(matches!(parse_scenarios(dup), Err(ScenarioError::Validation { .. })));
        let zero = r#"{"name": "a", "tail": {"type": "iid", "law": {"type": "uniform"}}, "defaults": {"samples": 0}}"#;
        assert!(matches!(parse_scenarios(zero), Err(ScenarioError::Validation { .. })));
    }

    #[test]
    fn anchors() {
        assert_eq!("uniform".parse::<AnchorSpec>().unwrap(), AnchorSpec::Uniform);
        assert_eq!(
            "det:0.5".parse::<AnchorSpec>().unwrap(),
            AnchorSpec::Deterministic(Coord::ratio(1, 2))
        );
        let law: AnchorSpec = r#"law:{"type":"wrapped_gaussian","mean":0,"variance":0.01}"#.parse().unwrap();
        assert!(matches!(law, AnchorSpec::Law(TorusMeasure::WrappedGaussian(_))));
        assert!("nope".parse::<AnchorSpec>().is_err());
    }
}
