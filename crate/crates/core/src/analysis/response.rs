use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tf::CommensurateTf;

/// Strictly increasing positive frequencies in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    omega: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(omega: Vec<f64>) -> Result<Self> {
        if omega.len() < 2 {
            return Err(Error::InvalidGrid("need at least two frequencies".into()));
        }
        if omega.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidGrid("frequencies must be finite and positive".into()));
        }
        if omega.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::InvalidGrid("frequencies must be strictly increasing".into()));
        }
        Ok(Self { omega })
    }

    /// `n` log-spaced points from `omega_min` to `omega_max` inclusive.
    pub fn log_space(omega_min: f64, omega_max: f64, n: usize) -> Result<Self> {
        if !(omega_min > 0.0 && omega_max > omega_min && omega_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("bad band [{omega_min}, {omega_max}]")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid("need at least two frequencies".into()));
        }
        let (lo, hi) = (libm::log10(omega_min), libm::log10(omega_max));
        let step = (hi - lo) / (n - 1) as f64;
        let mut omega: Vec<f64> = (0..n).map(|k| libm::pow(10.0, lo + step * k as f64)).collect();
        omega[0] = omega_min;
        omega[n - 1] = omega_max;
        Self::new(omega)
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }
}

impl Default for FrequencyGrid {
    /// 1000 log-spaced points over `[1e-3, 1e3]` rad/s.
    fn default() -> Self {
        Self::log_space(1e-3, 1e3, 1000).expect("static grid")
    }
}

/// Sampled `L(j omega)` with derived magnitude (dB) and unwrapped phase (deg).
///
/// Samples that hit a pole are listed in `pole_hits`; their value and derived
/// quantities are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    pub omega: Vec<f64>,
    pub value: Vec<Complex64>,
    pub mag_db: Vec<f64>,
    pub phase_deg: Vec<f64>,
    pub pole_hits: Vec<usize>,
}

impl FrequencyResponse {
    /// Builds a response from raw complex samples, deriving dB and unwrapped phase.
    pub fn from_values(omega: Vec<f64>, value: Vec<Complex64>) -> Result<Self> {
        if omega.len() != value.len() {
            return Err(Error::InvalidGrid("omega and value lengths differ".into()));
        }
        FrequencyGrid::new(omega.clone())?;
        let pole_hits: Vec<usize> = value
            .iter()
            .enumerate()
            .filter(|(_, v)| !(v.re.is_finite() && v.im.is_finite()))
            .map(|(k, _)| k)
            .collect();
        let mag_db = value.iter().map(|v| 20.0 * libm::log10(v.norm())).collect();
        let phase_deg = unwrap_phase_deg(&value);
        Ok(Self { omega, value, mag_db, phase_deg, pole_hits })
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }
}

/// Principal phase of the first finite sample, then +-360 deg corrections
/// whenever adjacent samples jump by more than 180 deg.
fn unwrap_phase_deg(values: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut prev: Option<f64> = None;
    for v in values {
        if !(v.re.is_finite() && v.im.is_finite()) {
            out.push(f64::NAN);
            continue;
        }
        let mut p = libm::atan2(v.im, v.re).to_degrees();
        if let Some(q) = prev {
            let turns = libm::round((q - p) / 360.0);
            p += 360.0 * turns;
        }
        prev = Some(p);
        out.push(p);
    }
    out
}

/// Samples `tf(j omega)` on `grid`. Pole hits are flagged rather than fatal.
pub fn frequency_response(tf: &CommensurateTf, grid: &FrequencyGrid) -> FrequencyResponse {
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let value: Vec<Complex64> = grid
        .omega()
        .iter()
        .map(|w| tf.evaluate(Complex64::new(0.0, *w)).unwrap_or(nan))
        .collect();
    FrequencyResponse::from_values(grid.omega().to_vec(), value).expect("grid already validated")
}
