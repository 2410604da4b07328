//! Number formatting shared by the file writers.
//!
//! Reported quantities are rounded to 12 significant digits; stored
//! matrices use 17 significant digits so that they read back bit-for-bit.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// 12-significant-digit text for CSV cells and console output.
pub fn fmt12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{:?}", round12(x))
}

/// 17-significant-digit scientific notation.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serializes as a JSON number with exactly 17 significant digits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Full(pub f64);

impl Serialize for Full {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom("non-finite matrix entry"));
        }
        let raw = RawValue::from_string(fmt17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

/// Serializes a float rounded to 12 significant digits.
pub fn ser_round12<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round12(*x))
}
