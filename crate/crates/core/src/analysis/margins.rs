use alloc::format;

use crate::analysis::FrequencyResponse;
use crate::error::{Error, Result};

/// Phase and gain margins of an open-loop response.
///
/// A margin without a corresponding crossing is `f64::INFINITY`. With several
/// crossings the smallest margin is reported together with its frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginReport {
    pub phase_margin_deg: f64,
    pub gain_margin_db: f64,
    pub gain_crossover_rad_s: Option<f64>,
    pub phase_crossover_rad_s: Option<f64>,
    pub gain_crossings: usize,
    pub phase_crossings: usize,
}

/// Largest phase change tolerated between the two samples bracketing a crossing.
const MAX_BRACKET_PHASE_STEP_DEG: f64 = 90.0;

/// Gain crossovers (0 dB) and phase crossovers (-180 deg modulo 360 deg),
/// located by linear interpolation in `log10(omega)`.
pub fn margins(resp: &FrequencyResponse) -> Result<MarginReport> {
    let mut report = MarginReport {
        phase_margin_deg: f64::INFINITY,
        gain_margin_db: f64::INFINITY,
        gain_crossover_rad_s: None,
        phase_crossover_rad_s: None,
        gain_crossings: 0,
        phase_crossings: 0,
    };
    let n = resp.len();
    for i in 0..n.saturating_sub(1) {
        let (m0, m1) = (resp.mag_db[i], resp.mag_db[i + 1]);
        let (p0, p1) = (resp.phase_deg[i], resp.phase_deg[i + 1]);
        if !(m0.is_finite() && m1.is_finite() && p0.is_finite() && p1.is_finite()) {
            continue;
        }
        let (x0, x1) = (libm::log10(resp.omega[i]), libm::log10(resp.omega[i + 1]));

        if (m0 > 0.0) != (m1 > 0.0) {
            check_bracket(resp.omega[i], p0, p1)?;
            let t = m0 / (m0 - m1);
            let omega_c = libm::pow(10.0, x0 + t * (x1 - x0));
            let pm = wrap_deg(180.0 + p0 + t * (p1 - p0));
            report.gain_crossings += 1;
            if pm < report.phase_margin_deg || report.gain_crossover_rad_s.is_none() {
                report.phase_margin_deg = pm;
                report.gain_crossover_rad_s = Some(omega_c);
            }
        }

        let k0 = libm::floor((p0 + 180.0) / 360.0);
        let k1 = libm::floor((p1 + 180.0) / 360.0);
        if k0 != k1 {
            check_bracket(resp.omega[i], p0, p1)?;
            let level = -180.0 + 360.0 * k0.max(k1);
            let t = (level - p0) / (p1 - p0);
            let omega_p = libm::pow(10.0, x0 + t * (x1 - x0));
            let gm = -(m0 + t * (m1 - m0));
            report.phase_crossings += 1;
            if gm < report.gain_margin_db || report.phase_crossover_rad_s.is_none() {
                report.gain_margin_db = gm;
                report.phase_crossover_rad_s = Some(omega_p);
            }
        }
    }
    Ok(report)
}

fn check_bracket(omega: f64, p0: f64, p1: f64) -> Result<()> {
    if libm::fabs(p1 - p0) > MAX_BRACKET_PHASE_STEP_DEG {
        return Err(Error::SparseGrid {
            omega,
            reason: format!("phase moves {:.1} deg across the bracketing samples", p1 - p0),
        });
    }
    Ok(())
}

/// Maps an angle into `(-180, 180]`.
fn wrap_deg(a: f64) -> f64 {
    let x = a + 180.0;
    let w = x - 360.0 * libm::floor(x / 360.0) - 180.0;
    if w == -180.0 {
        180.0
    } else {
        w
    }
}
