//! Seeded synthetic SST, MSLP and T2M grids on a regular lattice.
//!
//! For cell `(lat, lon)` and month `t` (counted from `start`, calendar month
//! `c`):
//!
//! ```text
//! SST  = base(lat) + A·s(lat)·sin(2π(c − 3 − lag(lat))/12) + trend·t/120 + osc + σ·ε
//! base = 28 − 20·(lat/90)²        s = tanh(lat/15)        lag = 1.5 + 1.5·|lat|/90
//! osc  = B·sin(2πt/P)·exp(−(lat/20)²)·cos(lon)
//! MSLP = 1013 − 0.5·(SST − base) + 0.8·ε'
//! T2M  = 0.9·SST − 1 + 0.5·ε''
//! ```
//!
//! `s` flips the seasonal cycle between hemispheres and `lag` shifts its
//! peak with latitude. Land cells (Bernoulli draws) are absent from SST.
//! Noise streams are xoshiro256** substreams of the seed, one per
//! variable, so the output depends on nothing but the configuration.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::data::{CoordinateTable, Location, TimeGrid, Variable};
use crate::error::{Error, Result};
use crate::month::Month;
use crate::rng::Stream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_lat: usize,
    pub n_lon: usize,
    pub lat0: f64,
    pub lon0: f64,
    pub step: f64,
    pub months: usize,
    pub start: Month,
    pub seed: u64,
    pub seasonal_amplitude: f64,
    pub trend_per_decade: f64,
    pub oscillation_period: f64,
    pub oscillation_amplitude: f64,
    pub noise_std: f64,
    pub land_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_lat: 20,
            n_lon: 20,
            lat0: -47.5,
            lon0: 0.0,
            step: 5.0,
            months: 480,
            start: Month::CHALLENGE_START,
            seed: 0,
            seasonal_amplitude: 3.0,
            trend_per_decade: 0.2,
            oscillation_period: 42.0,
            oscillation_amplitude: 0.5,
            noise_std: 0.3,
            land_fraction: 0.0,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_lat == 0 || self.n_lon == 0 {
            return bad("lattice must have at least one row and column");
        }
        if !(self.step > 0.0) || !self.step.is_finite() {
            return bad("lattice step must be positive");
        }
        let lat_end = self.lat0 + self.step * (self.n_lat - 1) as f64;
        if self.lat0 < -90.0 || lat_end > 90.0 {
            return bad("lattice latitudes leave [-90, 90]");
        }
        if self.step * self.n_lon as f64 > 360.0 {
            return bad("lattice longitudes overlap");
        }
        if self.months < 24 {
            return bad("synthetic series needs at least 24 months");
        }
        let amplitudes = [
            self.seasonal_amplitude,
            self.oscillation_amplitude,
            self.noise_std,
        ];
        if amplitudes.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
            return bad("amplitudes must be finite and non-negative");
        }
        if !self.trend_per_decade.is_finite() {
            return bad("trend must be finite");
        }
        if !(self.oscillation_period > 0.0) {
            return bad("oscillation period must be positive");
        }
        if !(0.0..1.0).contains(&self.land_fraction) {
            return bad("land fraction must lie in [0, 1)");
        }
        Ok(())
    }

    /// `key=value` lines in the configuration file syntax.
    pub fn manifest(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n_lat={}", self.n_lat);
        let _ = writeln!(s, "n_lon={}", self.n_lon);
        let _ = writeln!(s, "lat0={}", self.lat0);
        let _ = writeln!(s, "lon0={}", self.lon0);
        let _ = writeln!(s, "step={}", self.step);
        let _ = writeln!(s, "months={}", self.months);
        let _ = writeln!(s, "start_month={}", self.start);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "seasonal_amplitude={}", self.seasonal_amplitude);
        let _ = writeln!(s, "trend_per_decade={}", self.trend_per_decade);
        let _ = writeln!(s, "oscillation_period={}", self.oscillation_period);
        let _ = writeln!(s, "oscillation_amplitude={}", self.oscillation_amplitude);
        let _ = writeln!(s, "noise_std={}", self.noise_std);
        let _ = writeln!(s, "land_fraction={}", self.land_fraction);
        s
    }
}

#[derive(Clone, Debug)]
pub struct SynthOutput {
    pub sst: TimeGrid,
    pub mslp: TimeGrid,
    pub t2m: TimeGrid,
    pub coords: CoordinateTable,
    /// `true` for land cells (absent from SST).
    pub land: Vec<bool>,
}

fn fold_longitude(lon: f64) -> f64 {
    let l = lon.rem_euclid(360.0);
    if l >= 180.0 {
        l - 360.0
    } else {
        l
    }
}

fn base(lat: f64) -> f64 {
    28.0 - 20.0 * (lat / 90.0).powi(2)
}

/// Noise-free SST of one cell.
fn signal(config: &SynthConfig, lat: f64, lon: f64, t: usize) -> f64 {
    let c = (config.start + t as i64).calendar() as f64;
    let lag = 1.5 + 1.5 * lat.abs() / 90.0;
    let seasonal = config.seasonal_amplitude * (lat / 15.0).tanh() * (2.0 * PI * (c - 3.0 - lag) / 12.0).sin();
    let trend = config.trend_per_decade * t as f64 / 120.0;
    let osc = config.oscillation_amplitude
        * (2.0 * PI * t as f64 / config.oscillation_period).sin()
        * (-(lat / 20.0).powi(2)).exp()
        * lon.to_radians().cos();
    base(lat) + seasonal + trend + osc
}

pub fn generate(config: &SynthConfig) -> Result<SynthOutput> {
    config.validate()?;
    let mut locations = Vec::with_capacity(config.n_lat * config.n_lon);
    for i in 0..config.n_lat {
        for j in 0..config.n_lon {
            locations.push(Location {
                id: format!("r{i:02}c{j:02}"),
                latitude: config.lat0 + config.step * i as f64,
                longitude: fold_longitude(config.lon0 + config.step * j as f64),
            });
        }
    }
    let ids: Vec<String> = locations.iter().map(|l| l.id.clone()).collect();
    let n = locations.len();

    let mut mask_rng = Stream::substream(config.seed, 0);
    let land: Vec<bool> = (0..n).map(|_| mask_rng.uniform() < config.land_fraction).collect();

    let mut sst_rng = Stream::substream(config.seed, 1);
    let mut mslp_rng = Stream::substream(config.seed, 2);
    let mut t2m_rng = Stream::substream(config.seed, 3);
    let mut sst = Vec::with_capacity(config.months * n);
    let mut mslp = Vec::with_capacity(config.months * n);
    let mut t2m = Vec::with_capacity(config.months * n);
    for t in 0..config.months {
        for (l, loc) in locations.iter().enumerate() {
            let lon = config.lon0 + config.step * (l % config.n_lon) as f64;
            let value = signal(config, loc.latitude, lon, t) + config.noise_std * sst_rng.normal();
            mslp.push(1013.0 - 0.5 * (value - base(loc.latitude)) + 0.8 * mslp_rng.normal());
            t2m.push(0.9 * value - 1.0 + 0.5 * t2m_rng.normal());
            sst.push(if land[l] { f64::NAN } else { value });
        }
    }
    Ok(SynthOutput {
        sst: TimeGrid::new(Variable::Sst, config.start, ids.clone(), sst)?,
        mslp: TimeGrid::new(Variable::Mslp, config.start, ids.clone(), mslp)?,
        t2m: TimeGrid::new(Variable::T2m, config.start, ids, t2m)?,
        coords: CoordinateTable::new(locations)?,
        land,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{parse_value_csv, serialize_value_csv};
    use crate::evaluation::annual_global_mean;

    fn quiet() -> SynthConfig {
        SynthConfig {
            n_lat: 6,
            n_lon: 4,
            lat0: -50.0,
            step: 20.0,
            months: 120,
            noise_std: 0.0,
            trend_per_decade: 0.0,
            oscillation_amplitude: 0.0,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn noise_free_is_twelve_periodic() {
        let out = generate(&quiet()).unwrap();
        for t in 0..108 {
            for (a, b) in out.sst.row(t).iter().zip(out.sst.row(t + 12)) {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn hemispheres_in_antiphase() {
        let out = generate(&quiet()).unwrap();
        let mean = |calendar: u8, north: bool| {
            let (mut s, mut n) = (0.0, 0);
            for t in (0..out.sst.n_months()).filter(|&t| out.sst.month_of(t).calendar() == calendar) {
                for l in 0..out.coords.len() {
                    if (out.coords.get(l).latitude > 0.0) == north {
                        s += out.sst.row(t)[l];
                        n += 1;
                    }
                }
            }
            s / n as f64
        };
        assert!(mean(6, true) > mean(0, true));
        assert!(mean(6, false) < mean(0, false));
    }

    #[test]
    fn trend_shows_in_annual_means() {
        let cfg = SynthConfig {
            trend_per_decade: 0.2,
            months: 132,
            ..quiet()
        };
        let out = generate(&cfg).unwrap();
        let s = annual_global_mean(&out.sst);
        let rise = s.last().unwrap().1 - s[0].1;
        assert!((rise - 0.2).abs() < 1e-9, "{rise}");
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let cfg = SynthConfig {
            n_lat: 5,
            n_lon: 5,
            months: 36,
            land_fraction: 0.3,
            seed: 42,
            ..SynthConfig::default()
        };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(serialize_value_csv(&a.sst), serialize_value_csv(&b.sst));
        assert_eq!(serialize_value_csv(&a.t2m), serialize_value_csv(&b.t2m));
        assert_eq!(a.land, b.land);
        let c = generate(&SynthConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(serialize_value_csv(&a.sst), serialize_value_csv(&c.sst));
    }

    #[test]
    fn files_round_trip() {
        let cfg = SynthConfig {
            n_lat: 4,
            n_lon: 3,
            months: 30,
            land_fraction: 0.4,
            seed: 9,
            ..SynthConfig::default()
        };
        let out = generate(&cfg).unwrap();
        for g in [&out.sst, &out.mslp, &out.t2m] {
            let text = serialize_value_csv(g);
            let back = parse_value_csv(&text, g.variable(), g.start()).unwrap();
            assert_eq!(back.present(), g.present());
            for (x, y) in back.values().iter().zip(g.values()) {
                assert!(x == y || (x.is_nan() && y.is_nan()));
            }
        }
    }

    #[test]
    fn degenerate_configs() {
        assert!(generate(&SynthConfig { n_lat: 0, ..quiet() }).is_err());
        assert!(generate(&SynthConfig { months: 23, ..quiet() }).is_err());
        assert!(generate(&SynthConfig { land_fraction: 1.0, ..quiet() }).is_err());
        assert!(generate(&SynthConfig { noise_std: -0.1, ..quiet() }).is_err());
    }
}
