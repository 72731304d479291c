//! Shared serialization helpers for machine-readable reports.

use rug::Rational;
use serde::{Deserialize, Deserializer, Serializer};

pub const SCHEMA_VERSION: &str = "1";

/// Exact rationals as `"p/q"` (or `"p"`) strings.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        crate::weights::parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

pub mod rational_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&r.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|t| crate::weights::parse_rational(t).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Fixed 17-significant-digit rendering used in CSV output.
pub fn sci17(x: f64) -> String {
    format!("{x:.16e}")
}
