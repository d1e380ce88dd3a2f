//! Flat `key=value` run configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::month::Month;

/// Every accepted key with a one-line description (shown by `--help`).
pub const KEYS: &[(&str, &str)] = &[
    ("ssta", "SSTA value CSV"),
    ("sst", "SST value CSV"),
    ("mslp", "MSLP value CSV"),
    ("t2m", "T2M value CSV"),
    ("coords", "coordinate CSV"),
    ("out", "output directory"),
    ("start_month", "month of the first CSV row, YYYY-MM"),
    ("seed", "random seed"),
    ("threads", "worker threads"),
    ("model", "composite | ud | persistence"),
    ("model_file", "fitted model (predict, forecast9, evaluate, report)"),
    ("offset", "forecast offset in months"),
    ("train_end", "last training month, YYYY-MM; later targets are scored"),
    ("anchor", "last observed month used for predict / forecast9"),
    ("chain_offset", "forecast9 horizon in months"),
    ("climatology_base", "base period FIRST..LAST (YYYY-MM..YYYY-MM)"),
    ("layout", "features layout: RG48 | UD50 | UD74 | BALTIC3"),
    ("short_years", "composite short training window"),
    ("long_years", "composite long training window"),
    ("correction_years", "trailing years of the local correction"),
    ("c_global", "global correction constant"),
    ("season_source", "calendar | classifier"),
    ("mlp_hidden", "classifier hidden units"),
    ("mlp_epochs", "classifier epochs"),
    ("mlp_learning_rate", "classifier learning rate"),
    ("ud_layout", "UD50 | UD74"),
    ("ud_stride", "block stride for UD training rows"),
    ("gbdt_trees", "boosting stages"),
    ("gbdt_depth", "tree depth"),
    ("gbdt_learning_rate", "shrinkage"),
    ("gbdt_min_leaf", "minimum rows per leaf"),
    ("ensemble_weights", "three comma-separated UD member weights"),
    ("horizon_max", "longest lag of the persistence curve"),
    ("synth_n_lat", "synthetic lattice rows"),
    ("synth_n_lon", "synthetic lattice columns"),
    ("synth_lat0", "first latitude"),
    ("synth_lon0", "first longitude"),
    ("synth_step", "lattice step in degrees"),
    ("synth_months", "synthetic series length"),
    ("synth_seasonal_amplitude", "seasonal amplitude"),
    ("synth_trend_per_decade", "trend per decade"),
    ("synth_oscillation_period", "oscillation period in months"),
    ("synth_oscillation_amplitude", "oscillation amplitude"),
    ("synth_noise_std", "noise standard deviation"),
    ("synth_land_fraction", "probability that a cell is land"),
];

/// Keys that do not change any artifact.
const UNHASHED: &[&str] = &["out", "threads"];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
            let k = k.trim();
            if cfg.values.contains_key(k) {
                return Err(Error::Config(format!("line {}: duplicate key '{k}'", i + 1)));
            }
            cfg.set(k, v.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Sets (or overrides) one key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// `KEY=VALUE` form used by `--set`.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected KEY=VALUE, got '{pair}'")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Config(format!("invalid value '{v}' for '{key}'")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
    }

    pub fn month(&self, key: &str) -> Result<Option<Month>> {
        self.raw(key).map(Month::from_str).transpose()
    }

    /// A path key, checked to exist.
    pub fn input_path(&self, key: &str) -> Result<Option<PathBuf>> {
        match self.raw(key) {
            None => Ok(None),
            Some(p) => {
                let path = PathBuf::from(p);
                if !path.is_file() {
                    return Err(Error::Config(format!("{key} file '{p}' does not exist")));
                }
                Ok(Some(path))
            }
        }
    }

    pub fn month_range(&self, key: &str) -> Result<Option<(Month, Month)>> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        let (a, b) = v
            .split_once("..")
            .ok_or_else(|| Error::Config(format!("'{key}' must look like YYYY-MM..YYYY-MM")))?;
        let (a, b): (Month, Month) = (a.parse()?, b.parse()?);
        if b < a {
            return Err(Error::Config(format!("'{key}' ends before it starts")));
        }
        Ok(Some((a, b)))
    }

    pub fn list_f64(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Config(format!("invalid number '{x}' in '{key}'")))
                    })
                    .collect()
            })
            .transpose()
    }

    /// SHA-256 over the sorted `key=value` lines, ignoring keys that do not
    /// affect artifacts.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.values {
            if !UNHASHED.contains(&k.as_str()) {
                h.update(k.as_bytes());
                h.update(b"=");
                h.update(v.as_bytes());
                h.update(b"\n");
            }
        }
        hex::encode(h.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_rejects_unknown_keys() {
        let c = RunConfig::parse("# run\nmodel = composite  # inline\n\nseed=7\n").unwrap();
        assert_eq!(c.raw("model"), Some("composite"));
        assert_eq!(c.get::<u64>("seed").unwrap(), Some(7));
        assert!(matches!(RunConfig::parse("colour=blue"), Err(Error::Config(_))));
        assert!(RunConfig::parse("seed=1\nseed=2").is_err());
        assert!(RunConfig::parse("just words").is_err());
        assert!(c.get::<u64>("model").is_err());
    }

    #[test]
    fn hash_ignores_out_and_threads() {
        let a = RunConfig::parse("seed=1\nout=a\nthreads=2").unwrap();
        let b = RunConfig::parse("out=b\nseed=1").unwrap();
        let c = RunConfig::parse("seed=2").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn ranges_and_lists() {
        let c = RunConfig::parse("climatology_base=1950-01..1979-12\nensemble_weights=0.5, 0.5,0.12").unwrap();
        assert_eq!(
            c.month_range("climatology_base").unwrap(),
            Some((Month::from_ym(1950, 1), Month::from_ym(1979, 12)))
        );
        assert_eq!(c.list_f64("ensemble_weights").unwrap(), Some(vec![0.5, 0.5, 0.12]));
    }
}
