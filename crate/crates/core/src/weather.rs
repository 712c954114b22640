//! Daily climatic inputs: a seedable synthetic generator, CSV ingestion and the
//! multiplicative noise used by the stochastic environment mode.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use thiserror::Error;

use crate::num::Scalar;
use crate::rng::{seeded, SimRng};

pub const WEATHER_CSV_HEADER: &str = "day,t_mean,precip,ref_et,solar,vapor";

/// Half-width of the uniform day-to-day temperature noise around the
/// seasonal sinusoid, in °C.
pub const TEMP_NOISE: f64 = 3.0;

/// One day of climatic forcing.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WeatherDay<T> {
    /// Mean air temperature, °C.
    pub t_mean: T,
    /// Precipitation, mm.
    pub precip: T,
    /// Reference evapotranspiration, mm.
    pub ref_et: T,
    /// Incident solar radiation, MJ/m².
    pub solar: T,
    /// Mean vapor pressure, hPa.
    pub vapor: T,
}

impl<T: Scalar> WeatherDay<T> {
    /// Checks the field bounds, returning the name and value of the first
    /// offending field.
    pub fn validate(&self) -> Result<(), (&'static str, f64)> {
        let t = self.t_mean;
        if !t.is_finite() || t < T::lit(-60.0) || t > T::lit(60.0) {
            return Err(("t_mean", t.as_f64()));
        }
        for (name, v) in [
            ("precip", self.precip),
            ("ref_et", self.ref_et),
            ("solar", self.solar),
            ("vapor", self.vapor),
        ] {
            if !v.is_finite() || v < T::zero() {
                return Err((name, v.as_f64()));
            }
        }
        Ok(())
    }
}

/// Parameters of the synthetic weather generator for one site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClimateProfile<T> {
    /// Mean annual air temperature, °C.
    pub mean_temp: T,
    /// Amplitude of the annual temperature sinusoid, °C.
    pub temp_amplitude: T,
    /// Probability that a given day is wet.
    pub wet_day_probability: T,
    /// Mean precipitation on wet days, mm.
    pub wet_day_precip: T,
    /// Clear-sky solar radiation at the summer peak, MJ/m².
    pub peak_solar: T,
    /// Baseline vapor pressure, hPa.
    pub base_vapor: T,
    /// Day of year on which the season (day index 0) starts.
    pub start_doy: u32,
}

impl<T: Scalar> Default for ClimateProfile<T> {
    fn default() -> Self {
        Self {
            mean_temp: T::lit(16.0),
            temp_amplitude: T::lit(14.0),
            wet_day_probability: T::lit(0.05),
            wet_day_precip: T::lit(8.0),
            peak_solar: T::lit(23.0),
            base_vapor: T::lit(14.0),
            start_doy: 100,
        }
    }
}

impl<T: Scalar> ClimateProfile<T> {
    pub fn validate(&self) -> Result<(), (&'static str, f64)> {
        let p = self.wet_day_probability;
        if !(p >= T::zero() && p <= T::one()) {
            return Err(("wet_day_probability", p.as_f64()));
        }
        if !(self.temp_amplitude >= T::zero()) {
            return Err(("temp_amplitude", self.temp_amplitude.as_f64()));
        }
        for (name, v) in [
            ("mean_temp", self.mean_temp),
            ("wet_day_precip", self.wet_day_precip),
            ("peak_solar", self.peak_solar),
            ("base_vapor", self.base_vapor),
        ] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err((name, v.as_f64()));
            }
        }
        Ok(())
    }

    fn phase(&self, day_index: usize) -> f64 {
        let doy = self.start_doy as f64 + day_index as f64;
        // sinusoid crosses the annual mean around the spring equinox
        2.0 * PI * (doy - 105.0) / 365.0
    }

    /// Noise-free temperature for a season day.
    pub fn seasonal_temperature(&self, day_index: usize) -> T {
        let s = self.phase(day_index).sin();
        T::lit(self.mean_temp.as_f64() + self.temp_amplitude.as_f64() * s)
    }

    /// Mean of [`Self::seasonal_temperature`] over the first `days` days.
    pub fn seasonal_mean(&self, days: usize) -> T {
        let sum: f64 = (0..days).map(|d| self.seasonal_temperature(d).as_f64()).sum();
        T::lit(sum / days.max(1) as f64)
    }
}

/// Draws the weather for one season day. Always consumes the same number of
/// variates from `rng`, so day `k` of a sequence depends only on the seed.
pub fn generate_weather<T: Scalar>(
    day_index: usize,
    profile: &ClimateProfile<T>,
    rng: &mut SimRng,
) -> WeatherDay<T> {
    let temp_noise: f64 = rng.random_range(-1.0..=1.0);
    let wet_draw: f64 = rng.random();
    let amount: f64 = Exp1.sample(rng);
    let solar_noise: f64 = rng.random_range(0.9..=1.1);
    let vapor_noise: f64 = rng.random_range(-1.0..=1.0);

    let mean_temp = profile.mean_temp.as_f64();
    let seasonal = profile.seasonal_temperature(day_index).as_f64();
    let t_mean = (seasonal + TEMP_NOISE * temp_noise).clamp(-60.0, 60.0);

    let wet = wet_draw < profile.wet_day_probability.as_f64();
    let precip = if wet {
        amount * profile.wet_day_precip.as_f64()
    } else {
        0.0
    };

    let sun = profile.phase(day_index).sin().max(0.0);
    let cloud = if wet { 0.55 } else { 1.0 };
    let solar = (profile.peak_solar.as_f64() * (0.6 + 0.4 * sun) * cloud * solar_noise).max(0.0);

    let wet_bump = if wet { 2.0 } else { 0.0 };
    let vapor = (profile.base_vapor.as_f64() + 0.5 * (t_mean - mean_temp) + wet_bump + vapor_noise)
        .max(0.0);

    WeatherDay {
        t_mean: T::lit(t_mean),
        precip: T::lit(precip),
        ref_et: T::lit(reference_et(t_mean, solar)),
        solar: T::lit(solar),
        vapor: T::lit(vapor),
    }
}

/// Hargreaves-type radiation formula, mm/day, floored at zero.
pub fn reference_et(t_mean: f64, solar: f64) -> f64 {
    (0.0135 * (t_mean + 17.8) * solar / 2.45).max(0.0)
}

/// Generates `days` consecutive days from a fresh stream seeded with `seed`.
pub fn generate_season<T: Scalar>(
    days: usize,
    profile: &ClimateProfile<T>,
    seed: u64,
) -> Vec<WeatherDay<T>> {
    let mut rng = seeded(seed);
    (0..days)
        .map(|d| generate_weather(d, profile, &mut rng))
        .collect()
}

/// Applies independent relative noise of half-width `scale` to each field.
/// Temperature moves additively by up to `scale * 10` °C. Non-negative
/// fields are clamped at zero. `scale` is clamped into `[0, 0.5]`.
pub fn perturb<T: Scalar>(w: &WeatherDay<T>, rng: &mut SimRng, scale: T) -> WeatherDay<T> {
    let s = scale.as_f64().clamp(0.0, 0.5);
    let mut factor = || -> f64 {
        let u: f64 = rng.random_range(-1.0..=1.0);
        u * s
    };
    let dt = factor() * 10.0;
    let fp = 1.0 + factor();
    let fe = 1.0 + factor();
    let fs = 1.0 + factor();
    let fv = 1.0 + factor();
    if s == 0.0 {
        return *w;
    }
    WeatherDay {
        t_mean: T::lit((w.t_mean.as_f64() + dt).clamp(-60.0, 60.0)),
        precip: T::lit((w.precip.as_f64() * fp).max(0.0)),
        ref_et: T::lit((w.ref_et.as_f64() * fe).max(0.0)),
        solar: T::lit((w.solar.as_f64() * fs).max(0.0)),
        vapor: T::lit((w.vapor.as_f64() * fv).max(0.0)),
    }
}

#[derive(Debug, Error)]
pub enum WeatherError {
    #[error("cannot access weather file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("weather file {path}: expected header `{WEATHER_CSV_HEADER}`, found `{found}`")]
    Header { path: PathBuf, found: String },
    #[error("weather file row {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error("weather file row {row}: field `{field}` = {value} is out of bounds")]
    Invalid {
        row: usize,
        field: &'static str,
        value: f64,
    },
}

/// Reads a weather CSV with header [`WEATHER_CSV_HEADER`]. Rows are numbered
/// from 1 (the first data row) in error messages.
pub fn load_weather_csv<T: Scalar>(path: &Path) -> Result<Vec<WeatherDay<T>>, WeatherError> {
    let io_err = |source| WeatherError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(io_err)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let header = reader
        .headers()
        .map_err(|e| WeatherError::Malformed {
            row: 0,
            message: e.to_string(),
        })?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != WEATHER_CSV_HEADER {
        return Err(WeatherError::Header {
            path: path.to_path_buf(),
            found: header,
        });
    }

    let mut days = Vec::new();
    let mut last_day: Option<i64> = None;
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| WeatherError::Malformed {
            row,
            message: e.to_string(),
        })?;
        if record.len() != 6 {
            return Err(WeatherError::Malformed {
                row,
                message: format!("expected 6 fields, found {}", record.len()),
            });
        }
        let day: i64 = record[0].parse().map_err(|_| WeatherError::Malformed {
            row,
            message: format!("day `{}` is not an integer", &record[0]),
        })?;
        if let Some(prev) = last_day {
            if day <= prev {
                return Err(WeatherError::Malformed {
                    row,
                    message: format!("day {day} does not follow day {prev}"),
                });
            }
        }
        last_day = Some(day);

        let mut values = [T::zero(); 5];
        let names = ["t_mean", "precip", "ref_et", "solar", "vapor"];
        for (k, slot) in values.iter_mut().enumerate() {
            let raw = &record[k + 1];
            *slot = raw.parse::<T>().map_err(|_| WeatherError::Malformed {
                row,
                message: format!("field `{}` = `{raw}` is not a number", names[k]),
            })?;
        }
        let w = WeatherDay {
            t_mean: values[0],
            precip: values[1],
            ref_et: values[2],
            solar: values[3],
            vapor: values[4],
        };
        w.validate()
            .map_err(|(field, value)| WeatherError::Invalid { row, field, value })?;
        days.push(w);
    }
    Ok(days)
}

pub fn save_weather_csv<T: Scalar>(path: &Path, days: &[WeatherDay<T>]) -> Result<(), WeatherError> {
    let io_err = |source| WeatherError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    writeln!(out, "{WEATHER_CSV_HEADER}").map_err(io_err)?;
    for (d, w) in days.iter().enumerate() {
        writeln!(
            out,
            "{d},{},{},{},{},{}",
            w.t_mean, w.precip, w.ref_et, w.solar, w.vapor
        )
        .map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}
