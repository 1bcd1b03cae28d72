//! Unit-carrying quantities in scenario files.
//!
//! Dimensional values are written as `"<number> <unit>"`, for example
//! `"0.24 2pi_MHz"` or `"210 ns"`. Bare numbers are accepted only for
//! dimensionless parameters, so a rate can never be read in the wrong units.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Physical dimension of a parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Dimensionless,
    /// Angular rate, stored in rad/s.
    Rate,
    /// Time, stored in s.
    Time,
    /// Length, stored in m.
    Length,
    /// Event rate, stored in 1/s.
    Frequency,
}

impl Dimension {
    /// Suffix appended to column names so tables are self-describing.
    pub fn column_suffix(self) -> &'static str {
        match self {
            Dimension::Dimensionless => "",
            Dimension::Rate => "_rad_s",
            Dimension::Time => "_s",
            Dimension::Length => "_m",
            Dimension::Frequency => "_per_s",
        }
    }

    pub fn units(self) -> &'static [&'static str] {
        match self {
            Dimension::Dimensionless => &[],
            Dimension::Rate => &["rad_s", "2pi_Hz", "2pi_kHz", "2pi_MHz", "2pi_GHz", "gamma"],
            Dimension::Time => &["s", "ms", "us", "ns", "ps", "per_gamma"],
            Dimension::Length => &["m", "cm", "mm", "um"],
            Dimension::Frequency => &["per_s", "Hz", "kHz", "MHz"],
        }
    }
}

/// A number with the unit it was written in. `unit` is empty for bare numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub unit: String,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.unit.is_empty() {
            write!(f, "{}", self.value)
        } else {
            write!(f, "{} {}", self.value, self.unit)
        }
    }
}

impl Quantity {
    pub fn bare(value: f64) -> Self {
        Self {
            value,
            unit: String::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut parts = text.split_whitespace();
        let num = parts.next().ok_or_else(|| "empty quantity".to_string())?;
        let value: f64 = num
            .parse()
            .map_err(|_| format!("`{num}` is not a number"))?;
        let unit = parts.next().unwrap_or("").to_string();
        if parts.next().is_some() {
            return Err(format!("expected `<number> <unit>`, got `{text}`"));
        }
        Ok(Self { value, unit })
    }

    pub fn from_toml(v: &toml::Value) -> Result<Self, String> {
        match v {
            toml::Value::Integer(i) => Ok(Self::bare(*i as f64)),
            toml::Value::Float(x) => Ok(Self::bare(*x)),
            toml::Value::String(s) => Self::parse(s),
            other => Err(format!(
                "expected a number or a `<number> <unit>` string, got {}",
                other.type_str()
            )),
        }
    }

    /// Converts to SI (rates in rad/s). `gamma` resolves the `gamma` and
    /// `per_gamma` units and is ignored otherwise.
    pub fn to_si(&self, dim: Dimension, gamma: Option<f64>) -> Result<f64, String> {
        let need_gamma =
            || gamma.ok_or_else(|| format!("unit `{}` needs a `gamma` parameter", self.unit));
        let scale = match (dim, self.unit.as_str()) {
            (Dimension::Dimensionless, "") => 1.0,
            (Dimension::Dimensionless, u) => {
                return Err(format!("dimensionless value carries unit `{u}`"))
            }
            (_, "") => {
                return Err(format!(
                    "missing unit; write `\"{} <unit>\"` with one of {}",
                    self.value,
                    dim.units().join(", ")
                ))
            }
            (Dimension::Rate, "rad_s") => 1.0,
            (Dimension::Rate, "2pi_Hz") => 2.0 * PI,
            (Dimension::Rate, "2pi_kHz") => 2.0 * PI * 1e3,
            (Dimension::Rate, "2pi_MHz") => 2.0 * PI * 1e6,
            (Dimension::Rate, "2pi_GHz") => 2.0 * PI * 1e9,
            (Dimension::Rate, "gamma") => need_gamma()?,
            (Dimension::Time, "s") => 1.0,
            (Dimension::Time, "ms") => 1e-3,
            (Dimension::Time, "us") => 1e-6,
            (Dimension::Time, "ns") => 1e-9,
            (Dimension::Time, "ps") => 1e-12,
            (Dimension::Time, "per_gamma") => 1.0 / need_gamma()?,
            (Dimension::Length, "m") => 1.0,
            (Dimension::Length, "cm") => 1e-2,
            (Dimension::Length, "mm") => 1e-3,
            (Dimension::Length, "um") => 1e-6,
            (Dimension::Frequency, "per_s") | (Dimension::Frequency, "Hz") => 1.0,
            (Dimension::Frequency, "kHz") => 1e3,
            (Dimension::Frequency, "MHz") => 1e6,
            (d, u) => {
                return Err(format!(
                    "unit `{u}` is not a {d:?} unit; expected one of {}",
                    d.units().join(", ")
                ))
            }
        };
        Ok(self.value * scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        let q = Quantity::parse("0.24 2pi_MHz").unwrap();
        assert!((q.to_si(Dimension::Rate, None).unwrap() - 2.0 * PI * 0.24e6).abs() < 1e-6);
        let t = Quantity::parse("210 ns").unwrap();
        assert!((t.to_si(Dimension::Time, None).unwrap() - 210e-9).abs() < 1e-20);
        let t = Quantity::parse("2 per_gamma").unwrap();
        assert_eq!(t.to_si(Dimension::Time, Some(4.0)).unwrap(), 0.5);
        assert_eq!(
            Quantity::bare(3.0)
                .to_si(Dimension::Dimensionless, None)
                .unwrap(),
            3.0
        );
    }

    #[test]
    fn unit_mistakes_are_caught() {
        assert!(Quantity::bare(1.0).to_si(Dimension::Rate, None).is_err());
        assert!(Quantity::parse("1 ns")
            .unwrap()
            .to_si(Dimension::Rate, None)
            .is_err());
        assert!(Quantity::parse("1 gamma")
            .unwrap()
            .to_si(Dimension::Rate, None)
            .is_err());
        assert!(Quantity::parse("1 cm")
            .unwrap()
            .to_si(Dimension::Dimensionless, None)
            .is_err());
        assert!(Quantity::parse("fast").is_err());
    }
}
