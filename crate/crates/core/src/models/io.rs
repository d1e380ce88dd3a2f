//! Self-describing JSON model files.
//!
//! Every file is an envelope `{"format": "ssta-model", "version": 1,
//! "kind": ..., "model": ...}`. Floats are written with shortest round-trip
//! formatting, so a load after a save reproduces every weight bit for bit.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT: &str = "ssta-model";
pub const VERSION: u32 = 1;

#[derive(Serialize)]
struct EnvelopeOut<'a, T> {
    format: &'a str,
    version: u32,
    kind: &'a str,
    model: &'a T,
}

#[derive(Deserialize)]
struct EnvelopeIn<T> {
    format: String,
    version: u32,
    kind: String,
    model: T,
}

pub fn to_json<T: Serialize>(kind: &str, model: &T) -> Result<String> {
    let envelope = EnvelopeOut {
        format: FORMAT,
        version: VERSION,
        kind,
        model,
    };
    let mut text = serde_json::to_string(&envelope).map_err(|e| Error::ModelFormat(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Reads the envelope kind without decoding the payload.
pub fn peek_kind(text: &str) -> Result<String> {
    let env: EnvelopeIn<serde::de::IgnoredAny> =
        serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    check_header(&env.format, env.version)?;
    Ok(env.kind)
}

pub fn from_json<T: DeserializeOwned>(text: &str, kind: &str) -> Result<T> {
    let env: EnvelopeIn<T> = serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    check_header(&env.format, env.version)?;
    if env.kind != kind {
        return Err(Error::ModelFormat(format!("expected a {kind} model, found {}", env.kind)));
    }
    Ok(env.model)
}

fn check_header(format: &str, version: u32) -> Result<()> {
    if format != FORMAT {
        return Err(Error::ModelFormat(format!("unknown format tag '{format}'")));
    }
    if version != VERSION {
        return Err(Error::ModelFormat(format!("unsupported version {version}")));
    }
    Ok(())
}

/// `Vec<f64>` with NaN written as JSON `null`.
pub mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let opts: Vec<Option<f64>> = values.iter().map(|v| (!v.is_nan()).then_some(*v)).collect();
        opts.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let opts = Vec::<Option<f64>>::deserialize(d)?;
        Ok(opts.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect())
    }
}
