//! JSON conventions shared by every file format the toolkit emits.
//!
//! Floating-point values serialize as shortest-round-trip decimal strings so
//! equal runs produce byte-identical files and renderers control all
//! rounding; parsers accept plain JSON numbers too. Ingestion errors carry
//! the path into the offending document.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, DeserializeOwned, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Pretty JSON plus a trailing newline; field order is fixed by the type
/// definitions and all maps are ordered, so output is deterministic.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("toolkit types serialize");
    s.push('\n');
    s
}

pub fn from_json_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| Error::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

/// A finite f64 as its shortest round-trip decimal string.
fn render(v: f64) -> String {
    debug_assert!(v.is_finite(), "non-finite values never serialize");
    format!("{v}")
}

struct FlexibleF64;

impl<'de> Visitor<'de> for FlexibleF64 {
    type Value = f64;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or a decimal string")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<f64, E> {
        Ok(v)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<f64, E> {
        v.trim()
            .parse::<f64>()
            .map_err(|_| E::custom(format!("not a decimal number: {v:?}")))
    }
}

fn flexible_f64<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    d.deserialize_any(FlexibleF64)
}

#[derive(Clone, Copy)]
struct AsString(f64);

impl Serialize for AsString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&render(self.0))
    }
}

#[derive(Clone, Copy)]
struct FromFlexible(f64);

impl<'de> Deserialize<'de> for FromFlexible {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        flexible_f64(d).map(FromFlexible)
    }
}

pub mod fullprec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        AsString(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        flexible_f64(d)
    }
}

pub mod fullprec_opt {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        v.map(AsString).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<f64>, D::Error> {
        Ok(Option::<FromFlexible>::deserialize(d)?.map(|w| w.0))
    }
}

pub mod fullprec_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|&x| AsString(x)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
        Ok(Vec::<FromFlexible>::deserialize(d)?
            .into_iter()
            .map(|w| w.0)
            .collect())
    }
}

/// Ordered `(label, value)` pairs, serialized as `[[label, "v"], ...]`.
pub mod fullprec_pairs {
    use super::*;

    pub fn serialize<S: Serializer>(
        v: &[(String, f64)],
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|(l, x)| (l, AsString(*x))))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<(String, f64)>, D::Error> {
        Ok(Vec::<(String, FromFlexible)>::deserialize(d)?
            .into_iter()
            .map(|(l, w)| (l, w.0))
            .collect())
    }
}

pub mod fullprec_map {
    use super::*;

    pub fn serialize<S: Serializer>(
        v: &BTreeMap<String, f64>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        s.collect_map(v.iter().map(|(l, &x)| (l, AsString(x))))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BTreeMap<String, f64>, D::Error> {
        Ok(BTreeMap::<String, FromFlexible>::deserialize(d)?
            .into_iter()
            .map(|(l, w)| (l, w.0))
            .collect())
    }
}

/// Vector of per-label f64 vectors keyed by label (realization files).
pub mod fullprec_map_vec {
    use super::*;

    pub fn serialize<S: Serializer>(
        v: &BTreeMap<String, Vec<f64>>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        s.collect_map(
            v.iter()
                .map(|(l, xs)| (l, xs.iter().map(|&x| AsString(x)).collect::<Vec<_>>())),
        )
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BTreeMap<String, Vec<f64>>, D::Error> {
        Ok(BTreeMap::<String, Vec<FromFlexible>>::deserialize(d)?
            .into_iter()
            .map(|(l, ws)| (l, ws.into_iter().map(|w| w.0).collect()))
            .collect())
    }
}

/// Measurement labels serialize as JSON integers when numeric (1-based
/// measurement indices), otherwise as strings.
pub fn labels_to_json(labels: &[String]) -> Vec<serde_json::Value> {
    labels
        .iter()
        .map(|l| match l.parse::<u64>() {
            Ok(n) => serde_json::Value::from(n),
            Err(_) => serde_json::Value::from(l.as_str()),
        })
        .collect()
}

pub fn labels_from_json(values: &[serde_json::Value]) -> std::result::Result<Vec<String>, String> {
    values
        .iter()
        .map(|v| match v {
            serde_json::Value::Number(n) => Ok(n.to_string()),
            serde_json::Value::String(s) => Ok(s.clone()),
            other => Err(format!("label must be a number or string, found {other}")),
        })
        .collect()
}
