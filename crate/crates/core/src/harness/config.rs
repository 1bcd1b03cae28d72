//! Scenario files: experiment name, parameters with units, sweep axes and output.

use std::collections::BTreeMap;

use serde::Deserialize;

use super::units::{Dimension, Quantity};
use super::Experiment;

/// Most axes a sweep may have.
pub const MAX_AXES: usize = 3;

/// Range check applied after unit conversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Any,
    Positive,
    NonNegative,
    /// `[0, 1]`
    Unit,
}

impl Bound {
    fn check(self, x: f64) -> Result<(), String> {
        let ok = x.is_finite()
            && match self {
                Bound::Any => true,
                Bound::Positive => x > 0.0,
                Bound::NonNegative => x >= 0.0,
                Bound::Unit => (0.0..=1.0).contains(&x),
            };
        if ok {
            return Ok(());
        }
        Err(match self {
            Bound::Any => format!("{x} is not finite"),
            Bound::Positive => format!("{x} must be positive"),
            Bound::NonNegative => format!("{x} must be non-negative"),
            Bound::Unit => format!("{x} must lie in [0, 1]"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Num(Dimension, Bound),
    Int { min: u64 },
    Choice(&'static [&'static str]),
    Flag,
}

/// `None` marks an optional parameter whose absence the experiment handles.
#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: Kind,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

impl ParamSpec {
    pub const fn num(
        name: &'static str,
        dim: Dimension,
        bound: Bound,
        default: &'static str,
        help: &'static str,
    ) -> Self {
        Self {
            name,
            kind: Kind::Num(dim, bound),
            default: Some(default),
            help,
        }
    }

    pub const fn optional(
        name: &'static str,
        dim: Dimension,
        bound: Bound,
        help: &'static str,
    ) -> Self {
        Self {
            name,
            kind: Kind::Num(dim, bound),
            default: None,
            help,
        }
    }

    pub const fn int(
        name: &'static str,
        min: u64,
        default: &'static str,
        help: &'static str,
    ) -> Self {
        Self {
            name,
            kind: Kind::Int { min },
            default: Some(default),
            help,
        }
    }

    pub const fn choice(
        name: &'static str,
        options: &'static [&'static str],
        default: &'static str,
        help: &'static str,
    ) -> Self {
        Self {
            name,
            kind: Kind::Choice(options),
            default: Some(default),
            help,
        }
    }

    pub const fn flag(name: &'static str, default: &'static str, help: &'static str) -> Self {
        Self {
            name,
            kind: Kind::Flag,
            default: Some(default),
            help,
        }
    }

    pub fn dimension(&self) -> Dimension {
        match self.kind {
            Kind::Num(d, _) => d,
            _ => Dimension::Dimensionless,
        }
    }
}

/// A parameter as written, before unit resolution.
#[derive(Debug, Clone, PartialEq)]
enum Raw {
    Num(Quantity),
    Int(u64),
    Text(String),
    Flag(bool),
}

/// A resolved parameter value, numbers in SI.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(u64),
    Text(String),
    Flag(bool),
}

/// One grid point with every parameter resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub index: usize,
    /// Values of the sweep axes, in SI, in axis order.
    pub axes: Vec<f64>,
    values: BTreeMap<&'static str, Value>,
}

impl Point {
    pub fn num(&self, name: &str) -> f64 {
        self.opt_num(name)
            .unwrap_or_else(|| panic!("numeric parameter `{name}` missing from schema"))
    }

    pub fn opt_num(&self, name: &str) -> Option<f64> {
        match self.values.get(name) {
            Some(Value::Num(x)) => Some(*x),
            Some(Value::Int(i)) => Some(*i as f64),
            _ => None,
        }
    }

    pub fn int(&self, name: &str) -> u64 {
        match self.values.get(name) {
            Some(Value::Int(i)) => *i,
            _ => panic!("integer parameter `{name}` missing from schema"),
        }
    }

    pub fn usize(&self, name: &str) -> usize {
        self.int(name) as usize
    }

    pub fn text(&self, name: &str) -> &str {
        match self.values.get(name) {
            Some(Value::Text(s)) => s,
            _ => panic!("choice parameter `{name}` missing from schema"),
        }
    }

    pub fn flag(&self, name: &str) -> bool {
        match self.values.get(name) {
            Some(Value::Flag(b)) => *b,
            _ => panic!("flag `{name}` missing from schema"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Lin,
    Log,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    name: String,
    start: toml::Value,
    stop: toml::Value,
    points: usize,
    #[serde(default)]
    scale: Scale,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// File stem relative to the output directory.
    pub path: Option<String>,
    #[serde(default = "csv_format")]
    pub format: String,
}

fn csv_format() -> String {
    "csv".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            path: None,
            format: csv_format(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: String,
    seed: Option<u64>,
    #[serde(default)]
    parameters: toml::Table,
    #[serde(default)]
    sweep: Vec<RawAxis>,
    #[serde(default)]
    output: OutputSpec,
}

/// A resolved sweep axis; values are in the units they were written in.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: &'static str,
    pub unit: String,
    pub values: Vec<f64>,
    pub integer: bool,
    pub dimension: Dimension,
}

impl Axis {
    pub fn column(&self) -> String {
        format!("{}{}", self.name, self.dimension.column_suffix())
    }
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub experiment: Experiment,
    pub seed: Option<u64>,
    pub axes: Vec<Axis>,
    pub output: OutputSpec,
    raw: BTreeMap<&'static str, Raw>,
}

/// Problems found while reading a scenario, each with its key path.
#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for Issue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn issue(path: impl Into<String>, message: impl Into<String>) -> Issue {
    Issue {
        path: path.into(),
        message: message.into(),
    }
}

fn parse_raw(spec: &ParamSpec, v: &toml::Value) -> Result<Raw, String> {
    match spec.kind {
        Kind::Num(..) => Quantity::from_toml(v).map(Raw::Num),
        Kind::Int { min } => {
            let i = match v {
                toml::Value::Integer(i) if *i >= 0 => *i as u64,
                toml::Value::String(s) => s
                    .trim()
                    .parse::<u64>()
                    .map_err(|_| format!("`{s}` is not a non-negative integer"))?,
                other => return Err(format!("expected a non-negative integer, got {other}")),
            };
            if i < min {
                return Err(format!("{i} is below the minimum {min}"));
            }
            Ok(Raw::Int(i))
        }
        Kind::Choice(options) => match v.as_str() {
            Some(s) if options.contains(&s) => Ok(Raw::Text(s.to_string())),
            Some(s) => Err(format!("`{s}` is not one of {}", options.join(", "))),
            None => Err(format!("expected one of {}", options.join(", "))),
        },
        Kind::Flag => v
            .as_bool()
            .map(Raw::Flag)
            .ok_or_else(|| "expected true or false".to_string()),
    }
}

fn parse_default(spec: &ParamSpec, text: &str) -> Raw {
    let v = match spec.kind {
        Kind::Flag => toml::Value::Boolean(text == "true"),
        _ => toml::Value::String(text.to_string()),
    };
    parse_raw(spec, &v).unwrap_or_else(|e| panic!("bad default for `{}`: {e}", spec.name))
}

fn axis_values(start: f64, stop: f64, points: usize, scale: Scale) -> Vec<f64> {
    if points == 1 {
        return vec![start];
    }
    let last = (points - 1) as f64;
    (0..points)
        .map(|i| {
            let f = i as f64 / last;
            match scale {
                Scale::Lin => start + (stop - start) * f,
                Scale::Log => (start.ln() + (stop.ln() - start.ln()) * f).exp(),
            }
        })
        .collect()
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, Vec<Issue>> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| vec![issue("config", e.message().to_string())])?;
        let experiment = Experiment::from_name(&raw.experiment).ok_or_else(|| {
            vec![issue(
                "experiment",
                format!(
                    "`{}` is not one of {}",
                    raw.experiment,
                    Experiment::ALL
                        .iter()
                        .map(|e| e.name())
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            )]
        })?;
        let schema = experiment.schema();
        let mut issues = Vec::new();

        for key in raw.parameters.keys() {
            if !schema.iter().any(|p| p.name == key) {
                issues.push(issue(
                    format!("parameters.{key}"),
                    format!("unknown parameter for {}", experiment.name()),
                ));
            }
        }
        let mut values = BTreeMap::new();
        for spec in schema {
            match raw.parameters.get(spec.name) {
                Some(v) => match parse_raw(spec, v) {
                    Ok(r) => {
                        values.insert(spec.name, r);
                    }
                    Err(e) => issues.push(issue(format!("parameters.{}", spec.name), e)),
                },
                None => {
                    if let Some(d) = spec.default {
                        values.insert(spec.name, parse_default(spec, d));
                    }
                }
            }
        }

        if raw.sweep.len() > MAX_AXES {
            issues.push(issue(
                "sweep",
                format!("{} axes given, at most {MAX_AXES} allowed", raw.sweep.len()),
            ));
        }
        let mut axes = Vec::new();
        for (i, a) in raw.sweep.iter().enumerate() {
            let path = format!("sweep[{i}]");
            let Some(spec) = schema.iter().find(|p| p.name == a.name) else {
                issues.push(issue(
                    format!("{path}.name"),
                    format!("`{}` is not a parameter of {}", a.name, experiment.name()),
                ));
                continue;
            };
            if axes.iter().any(|x: &Axis| x.name == spec.name) {
                issues.push(issue(
                    format!("{path}.name"),
                    format!("`{}` swept twice", a.name),
                ));
                continue;
            }
            if a.points == 0 {
                issues.push(issue(format!("{path}.points"), "must be at least 1"));
                continue;
            }
            let (start, stop) = match (Quantity::from_toml(&a.start), Quantity::from_toml(&a.stop))
            {
                (Ok(s), Ok(e)) => (s, e),
                (Err(e), _) => {
                    issues.push(issue(format!("{path}.start"), e));
                    continue;
                }
                (_, Err(e)) => {
                    issues.push(issue(format!("{path}.stop"), e));
                    continue;
                }
            };
            if start.unit != stop.unit {
                issues.push(issue(
                    path.clone(),
                    format!(
                        "start is in `{}` but stop is in `{}`",
                        start.unit, stop.unit
                    ),
                ));
                continue;
            }
            let integer = match spec.kind {
                Kind::Num(..) => false,
                Kind::Int { .. } => true,
                _ => {
                    issues.push(issue(
                        format!("{path}.name"),
                        format!("`{}` is not numeric", a.name),
                    ));
                    continue;
                }
            };
            if a.scale == Scale::Log && !(start.value > 0.0 && stop.value > 0.0) {
                issues.push(issue(
                    format!("{path}.scale"),
                    "log axes need positive start and stop",
                ));
                continue;
            }
            let mut vals = axis_values(start.value, stop.value, a.points, a.scale);
            if integer {
                vals.iter_mut().for_each(|v| *v = v.round());
            }
            axes.push(Axis {
                name: spec.name,
                unit: start.unit,
                values: vals,
                integer,
                dimension: spec.dimension(),
            });
        }
        if raw.output.format != "csv" {
            issues.push(issue(
                "output.format",
                format!("`{}` is not supported; only csv", raw.output.format),
            ));
        }
        if let Some(p) = &raw.output.path {
            if p.is_empty() || p.contains("..") || std::path::Path::new(p).is_absolute() {
                issues.push(issue(
                    "output.path",
                    "must be a relative file stem inside the output directory",
                ));
            }
        }

        let cfg = Self {
            experiment,
            seed: raw.seed,
            axes,
            output: raw.output,
            raw: values,
        };
        // resolve every point once so unit and range errors surface before running
        if let Err(e) = cfg.points() {
            for i in e {
                if !issues.contains(&i) {
                    issues.push(i);
                }
            }
        }
        if issues.is_empty() {
            Ok(cfg)
        } else {
            Err(issues)
        }
    }

    /// Number of grid points.
    pub fn cardinality(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    fn resolve(&self, index: usize, overrides: &[(usize, f64)]) -> Result<Point, Vec<Issue>> {
        let schema = self.experiment.schema();
        let mut raw = self.raw.clone();
        for &(ai, v) in overrides {
            let a = &self.axes[ai];
            let r = if a.integer {
                if v < 0.0 {
                    return Err(vec![issue(
                        format!("sweep[{ai}]"),
                        "integer axis went negative",
                    )]);
                }
                Raw::Int(v as u64)
            } else {
                Raw::Num(Quantity {
                    value: v,
                    unit: a.unit.clone(),
                })
            };
            raw.insert(a.name, r);
        }
        let mut issues = Vec::new();
        let gamma = match raw.get("gamma") {
            Some(Raw::Num(q)) => match q.to_si(Dimension::Rate, None) {
                Ok(g) => Some(g),
                Err(e) => {
                    issues.push(issue("parameters.gamma", e));
                    None
                }
            },
            _ => None,
        };
        let mut values = BTreeMap::new();
        for spec in schema {
            let path = match self.axes.iter().position(|a| a.name == spec.name) {
                Some(i) => format!("sweep[{i}]"),
                None => format!("parameters.{}", spec.name),
            };
            let Some(r) = raw.get(spec.name) else {
                continue;
            };
            let v = match (spec.kind, r) {
                (Kind::Num(dim, bound), Raw::Num(q)) => {
                    match q.to_si(dim, gamma).and_then(|x| bound.check(x).map(|_| x)) {
                        Ok(x) => Value::Num(x),
                        Err(e) => {
                            issues.push(issue(path, e));
                            continue;
                        }
                    }
                }
                (Kind::Int { min }, Raw::Int(i)) => {
                    if *i < min {
                        issues.push(issue(path, format!("{i} is below the minimum {min}")));
                        continue;
                    }
                    Value::Int(*i)
                }
                (_, Raw::Text(s)) => Value::Text(s.clone()),
                (_, Raw::Flag(b)) => Value::Flag(*b),
                _ => unreachable!("raw value kind follows the schema"),
            };
            values.insert(spec.name, v);
        }
        if !issues.is_empty() {
            return Err(issues);
        }
        let axes = overrides
            .iter()
            .map(|&(ai, _)| {
                let a = &self.axes[ai];
                match values.get(a.name) {
                    Some(Value::Num(x)) => *x,
                    Some(Value::Int(i)) => *i as f64,
                    _ => f64::NAN,
                }
            })
            .collect();
        Ok(Point {
            index,
            axes,
            values,
        })
    }

    /// All grid points, first axis slowest.
    pub fn points(&self) -> Result<Vec<Point>, Vec<Issue>> {
        let n = self.cardinality();
        let mut out = Vec::with_capacity(n);
        let mut issues = Vec::new();
        for index in 0..n {
            let mut rem = index;
            let mut overrides = vec![(0, 0.0); self.axes.len()];
            for (ai, a) in self.axes.iter().enumerate().rev() {
                overrides[ai] = (ai, a.values[rem % a.values.len()]);
                rem /= a.values.len();
            }
            match self.resolve(index, &overrides) {
                Ok(p) => out.push(p),
                Err(mut e) => {
                    for i in e.drain(..) {
                        if !issues.contains(&i) {
                            issues.push(i);
                        }
                    }
                }
            }
        }
        if issues.is_empty() {
            Ok(out)
        } else {
            Err(issues)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_order_and_units() {
        let cfg = ScenarioConfig::from_toml_str(
            r#"
            experiment = "bandwidth_scan"
            [parameters]
            gamma = "1 rad_s"
            [[sweep]]
            name = "c_in"
            start = 10
            stop = 1000
            points = 3
            scale = "log"
            [[sweep]]
            name = "sigma_t"
            start = "1 per_gamma"
            stop = "2 per_gamma"
            points = 2
            "#,
        )
        .unwrap();
        let pts = cfg.points().unwrap();
        assert_eq!(pts.len(), 6);
        assert!((pts[2].num("c_in") - 100.0).abs() < 1e-9);
        assert_eq!(pts[3].num("sigma_t"), 2.0);
        assert_eq!(pts[1].axes, vec![10.000000000000002, 2.0]);
    }

    #[test]
    fn errors_name_the_key() {
        let err = ScenarioConfig::from_toml_str("experiment = \"nope\"").unwrap_err();
        assert_eq!(err[0].path, "experiment");
        let err = ScenarioConfig::from_toml_str(
            "experiment = \"reflection_scan\"\n[parameters]\nkappa_in = \"-3 2pi_MHz\"\nfoo = 1\n",
        )
        .unwrap_err();
        let paths: Vec<_> = err.iter().map(|i| i.path.as_str()).collect();
        assert!(paths.contains(&"parameters.kappa_in"));
        assert!(paths.contains(&"parameters.foo"));
        let err = ScenarioConfig::from_toml_str(
            "experiment = \"source_characterize\"\n[parameters]\nlevel_scheme = \"five_level\"\n",
        )
        .unwrap_err();
        assert_eq!(err[0].path, "parameters.level_scheme");
    }

    #[test]
    fn too_many_axes() {
        let axis =
            |n: &str| format!("[[sweep]]\nname = \"{n}\"\nstart = 1\nstop = 2\npoints = 2\n");
        let text = format!(
            "experiment = \"longpulse_metrics\"\n{}{}{}{}",
            axis("c_in"),
            axis("sigma0_over_aeff"),
            axis("group_index"),
            axis("r_m")
        );
        let err = ScenarioConfig::from_toml_str(&text).unwrap_err();
        assert!(err.iter().any(|i| i.path == "sweep"));
    }
}
