//! Frequency units.
//!
//! Angular frequencies are stored in rad/ns. Configuration files must state the
//! unit explicitly (`"130 MHz"` or `"0.8168 rad_per_ns"`) so that factors of 2π
//! never get silently dropped.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Multiply a frequency in MHz by this to obtain an angular frequency in rad/ns.
pub const MHZ_TO_RAD_PER_NS: f64 = 2.0 * std::f64::consts::PI * 1e-3;

/// Angular frequency `2π × f` for `f` given in MHz, in rad/ns.
#[inline]
pub fn mhz(f: f64) -> f64 {
    f * MHZ_TO_RAD_PER_NS
}

/// Inverse of [`mhz`].
#[inline]
pub fn to_mhz(omega: f64) -> f64 {
    omega / MHZ_TO_RAD_PER_NS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequencyUnit {
    #[serde(rename = "MHz")]
    MHz,
    #[serde(rename = "rad_per_ns")]
    RadPerNs,
}

/// An angular frequency that remembers the unit it was written in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency {
    value: f64,
    unit: FrequencyUnit,
}

impl Frequency {
    pub fn from_mhz(value: f64) -> Self {
        Self { value, unit: FrequencyUnit::MHz }
    }

    pub fn from_rad_per_ns(value: f64) -> Self {
        Self { value, unit: FrequencyUnit::RadPerNs }
    }

    /// Angular frequency in rad/ns.
    pub fn rad_per_ns(&self) -> f64 {
        match self.unit {
            FrequencyUnit::MHz => mhz(self.value),
            FrequencyUnit::RadPerNs => self.value,
        }
    }

    pub fn unit(&self) -> FrequencyUnit {
        self.unit
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrequencyParseError {
    #[error("frequency `{0}` has no unit; write e.g. `130 MHz` or `0.8 rad_per_ns`")]
    MissingUnit(String),
    #[error("unknown frequency unit `{0}` (expected `MHz` or `rad_per_ns`)")]
    UnknownUnit(String),
    #[error("invalid frequency value `{0}`")]
    BadValue(String),
}

impl FromStr for Frequency {
    type Err = FrequencyParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let split = s
            .find(|c: char| c.is_whitespace() || c.is_ascii_alphabetic() && c != 'e' && c != 'E')
            .ok_or_else(|| FrequencyParseError::MissingUnit(s.to_string()))?;
        let (num, unit) = s.split_at(split);
        let unit = unit.trim();
        if unit.is_empty() {
            return Err(FrequencyParseError::MissingUnit(s.to_string()));
        }
        let value: f64 = num
            .trim()
            .parse()
            .map_err(|_| FrequencyParseError::BadValue(num.trim().to_string()))?;
        if !value.is_finite() {
            return Err(FrequencyParseError::BadValue(num.trim().to_string()));
        }
        match unit {
            "MHz" | "mhz" => Ok(Self::from_mhz(value)),
            "rad_per_ns" | "rad/ns" => Ok(Self::from_rad_per_ns(value)),
            other => Err(FrequencyParseError::UnknownUnit(other.to_string())),
        }
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.unit {
            FrequencyUnit::MHz => write!(f, "{} MHz", self.value),
            FrequencyUnit::RadPerNs => write!(f, "{} rad_per_ns", self.value),
        }
    }
}

impl Serialize for Frequency {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Frequency {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
