//! Discrete time values, stored as integer microseconds.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    Us,
    Ms,
    S,
}

impl TimeUnit {
    pub fn micros_per_unit(self) -> u64 {
        match self {
            TimeUnit::Us => 1,
            TimeUnit::Ms => 1_000,
            TimeUnit::S => 1_000_000,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TimeUnit::Us => "us",
            TimeUnit::Ms => "ms",
            TimeUnit::S => "s",
        }
    }
}

impl fmt::Display for TimeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimeError {
    #[error("unknown time unit `{0}` (expected us, ms or s)")]
    UnknownUnit(String),
    #[error("time value {magnitude}{unit} overflows 64-bit microseconds")]
    Overflow { magnitude: u64, unit: TimeUnit },
    #[error("malformed time value `{0}`")]
    Malformed(String),
}

impl FromStr for TimeUnit {
    type Err = TimeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "us" => Ok(TimeUnit::Us),
            "ms" => Ok(TimeUnit::Ms),
            "s" => Ok(TimeUnit::S),
            other => Err(TimeError::UnknownUnit(other.to_string())),
        }
    }
}

/// A non-negative duration or instant.
///
/// The unit the value was written in is kept for display so that a value
/// declared as `5ms` is printed back as `5ms`; comparisons and arithmetic
/// only look at the microsecond count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeValue {
    micros: u64,
    unit: TimeUnit,
}

impl TimeValue {
    pub const ZERO: TimeValue = TimeValue {
        micros: 0,
        unit: TimeUnit::Us,
    };

    pub fn new(magnitude: u64, unit: TimeUnit) -> Result<Self, TimeError> {
        magnitude
            .checked_mul(unit.micros_per_unit())
            .map(|micros| TimeValue { micros, unit })
            .ok_or(TimeError::Overflow { magnitude, unit })
    }

    pub const fn from_micros(micros: u64) -> Self {
        TimeValue {
            micros,
            unit: TimeUnit::Us,
        }
    }

    pub fn ms(magnitude: u64) -> Self {
        Self::new(magnitude, TimeUnit::Ms).expect("millisecond value in range")
    }

    pub fn us(magnitude: u64) -> Self {
        Self::from_micros(magnitude)
    }

    pub fn micros(self) -> u64 {
        self.micros
    }

    pub fn unit(self) -> TimeUnit {
        self.unit
    }

    /// Magnitude in the declared unit, if the conversion is exact.
    pub fn magnitude(self) -> Option<u64> {
        let per = self.unit.micros_per_unit();
        self.micros.is_multiple_of(per).then(|| self.micros / per)
    }

    /// Same instant, expressed in `unit` when that is exact.
    pub fn in_unit(self, unit: TimeUnit) -> Option<TimeValue> {
        self.micros
            .is_multiple_of(unit.micros_per_unit())
            .then_some(TimeValue {
                micros: self.micros,
                unit,
            })
    }

    pub fn is_zero(self) -> bool {
        self.micros == 0
    }
}

impl PartialOrd for TimeValue {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TimeValue {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.micros
            .cmp(&other.micros)
            .then(self.unit.cmp(&other.unit))
    }
}

impl fmt::Display for TimeValue {
    /// Prints in the declared unit; falls back to microseconds rather than
    /// rounding when the value is not a whole number of that unit.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.magnitude() {
            Some(m) => write!(f, "{m}{}", self.unit),
            None => write!(f, "{}us", self.micros),
        }
    }
}

impl FromStr for TimeValue {
    type Err = TimeError;

    /// Accepts `<digits><unit>` with optional whitespace in between.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let split = s
            .find(|c: char| !c.is_ascii_digit())
            .ok_or_else(|| TimeError::Malformed(s.to_string()))?;
        let (digits, unit) = s.split_at(split);
        let magnitude: u64 = digits
            .parse()
            .map_err(|_| TimeError::Malformed(s.to_string()))?;
        TimeValue::new(magnitude, unit.trim().parse()?)
    }
}
