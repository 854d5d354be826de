//! Step responses of rational realizations and undershoot/settling metrics.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::approx::{fit_rational, fractional_response_of, FitConfig, FitReport, RationalTf};
use crate::error::{Error, Result};
use crate::linalg::expm;
use crate::tf::CommensurateTf;

/// Single-input single-output `x' = A x + B u`, `y = C x + D u`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
    d: f64,
}

impl StateSpace {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: DVector<f64>, d: f64) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.len() != n || c.len() != n {
            return Err(Error::InvalidSimulation(format!(
                "inconsistent dimensions A {}x{}, B {}, C {}",
                a.nrows(),
                a.ncols(),
                b.len(),
                c.len()
            )));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }
}

/// Controllable canonical form of a proper rational transfer function.
pub fn to_state_space(tf: &RationalTf) -> Result<StateSpace> {
    if !tf.is_proper() {
        return Err(Error::Improper { num: tf.num_degree(), den: tf.den_degree() });
    }
    let n = tf.den_degree();
    let lead = tf.den()[n];
    let den: Vec<f64> = tf.den().iter().map(|x| x / lead).collect();
    let mut num: Vec<f64> = tf.num().iter().map(|x| x / lead).collect();
    num.resize(n + 1, 0.0);
    let d = num[n];
    let rem: Vec<f64> = (0..n).map(|k| num[k] - d * den[k]).collect();

    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        a[(i, i + 1)] = 1.0;
    }
    if n > 0 {
        for j in 0..n {
            a[(n - 1, j)] = -den[j];
        }
    }
    let mut b = DVector::<f64>::zeros(n);
    if n > 0 {
        b[n - 1] = 1.0;
    }
    StateSpace::new(a, b, DVector::from_vec(rem), d)
}

/// Unit-step response on a uniform grid starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResponse {
    pub dt: f64,
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    /// The state left the floating-point range; the trace stops before it.
    pub diverged: bool,
}

/// Exact zero-order-hold simulation of a unit step from rest.
///
/// `[[A, B], [0, 0]] * dt` is exponentiated once; the step is then
/// propagated exactly on the grid `0, dt, ..., t_max`.
pub fn simulate_step(ss: &StateSpace, t_max: f64, dt: f64) -> Result<StepResponse> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidSimulation(format!("dt must be positive, got {dt}")));
    }
    if !(t_max >= 10.0 * dt && t_max.is_finite()) {
        return Err(Error::InvalidSimulation(format!("t_max {t_max} must be at least 10 dt")));
    }
    let n = ss.order();
    let mut aug = DMatrix::<f64>::zeros(n + 1, n + 1);
    aug.view_mut((0, 0), (n, n)).copy_from(&ss.a);
    aug.view_mut((0, n), (n, 1)).copy_from(&ss.b);
    let phi = expm(&(aug * dt));
    let ad = phi.view((0, 0), (n, n)).into_owned();
    let bd = phi.view((0, n), (n, 1)).column(0).into_owned();

    let steps = libm::round(t_max / dt) as usize;
    let mut t = Vec::with_capacity(steps + 1);
    let mut y = Vec::with_capacity(steps + 1);
    let mut x = DVector::<f64>::zeros(n);
    let mut next = DVector::<f64>::zeros(n);
    let mut diverged = false;
    for k in 0..=steps {
        let yk = ss.c.dot(&x) + ss.d;
        if !yk.is_finite() || x.iter().any(|v| !v.is_finite()) {
            diverged = true;
            break;
        }
        t.push(k as f64 * dt);
        y.push(yk);
        ad.mul_to(&x, &mut next);
        next += &bd;
        core::mem::swap(&mut x, &mut next);
    }
    Ok(StepResponse { dt, t, y, diverged })
}

/// Default settling band, as a fraction of `|y_bar|`.
pub const DEFAULT_SETTLING_BAND: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct StepMetrics {
    pub y_bar: f64,
    /// `max(0, -inf_t y/y_bar)`.
    pub r_us: f64,
    /// `-inf_t y/y_bar` without the clamp.
    pub r_us_unclamped: f64,
    pub r_os: f64,
    /// First grid time after which `|y - y_bar| <= band |y_bar|` for the rest
    /// of the trace; the horizon when not settled.
    pub settling_time_s: f64,
    pub settled: bool,
    /// `1/(e^(lambda T) - 1)` when a zero frequency is supplied.
    pub undershoot_lower_bound: Option<f64>,
}

/// Undershoot lower bound for a real zero at `lambda` and settling time `t`.
pub fn undershoot_lower_bound(lambda: f64, t: f64) -> f64 {
    1.0 / libm::expm1(lambda * t)
}

pub fn compute_metrics(resp: &StepResponse, y_bar: f64, lambda: Option<f64>) -> Result<StepMetrics> {
    compute_metrics_with_band(resp, y_bar, lambda, DEFAULT_SETTLING_BAND)
}

pub fn compute_metrics_with_band(
    resp: &StepResponse,
    y_bar: f64,
    lambda: Option<f64>,
    band: f64,
) -> Result<StepMetrics> {
    if y_bar == 0.0 || !y_bar.is_finite() {
        return Err(Error::ZeroSteadyState);
    }
    if resp.y.is_empty() {
        return Err(Error::InvalidSimulation("empty trace".into()));
    }
    if band.is_nan() || band <= 0.0 {
        return Err(Error::InvalidSimulation(format!("settling band must be positive, got {band}")));
    }
    if let Some(l) = lambda {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidCanceller(format!("lambda must be positive, got {l}")));
        }
    }
    let (lo, hi) = resp
        .y
        .iter()
        .map(|y| y / y_bar)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
    let tol = band * libm::fabs(y_bar);
    let last_out = resp.y.iter().rposition(|y| libm::fabs(y - y_bar) > tol);
    let horizon = *resp.t.last().unwrap();
    let (settling_time_s, settled) = match last_out {
        None => (0.0, !resp.diverged),
        Some(k) if k + 1 < resp.t.len() && !resp.diverged => (resp.t[k + 1], true),
        Some(_) => (horizon, false),
    };
    Ok(StepMetrics {
        y_bar,
        r_us: (-lo).max(0.0),
        r_us_unclamped: -lo,
        r_os: (hi - 1.0).max(0.0),
        settling_time_s,
        settled,
        undershoot_lower_bound: lambda.map(|l| undershoot_lower_bound(l, settling_time_s)),
    })
}

/// Simulation settings for [`step_of_fractional`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub t_max: f64,
    pub dt: f64,
    pub band: f64,
    /// Non-minimum phase zero used for the undershoot bound.
    pub lambda: Option<f64>,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self { t_max: 40.0, dt: 1e-3, band: DEFAULT_SETTLING_BAND, lambda: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalStep {
    pub realization: RationalTf,
    pub response: StepResponse,
    pub metrics: StepMetrics,
    pub fit: FitReport,
}

/// Fit, realize and simulate a fractional transfer function.
///
/// Integer-order inputs (`base_v = 1`) are realized exactly without fitting.
/// Metrics use the exact fractional DC gain as the steady state.
pub fn step_of_fractional(tf: &CommensurateTf, fit: &FitConfig, sim: &StepConfig) -> Result<FractionalStep> {
    let y_bar = tf.dc_gain()?;
    let report = if tf.base_v() == 1 {
        let model = RationalTf::from_commensurate(tf)?;
        let den_roots = model.poles()?;
        FitReport {
            model,
            max_mag_error_db: 0.0,
            max_phase_error_deg: 0.0,
            residuals: Vec::new(),
            selected_iteration: 0,
            improved_over_levi: true,
            den_roots,
        }
    } else {
        let target = fractional_response_of(tf, fit)?;
        let first = fit_rational(&target, fit)?;
        if first.model.is_proper() {
            first
        } else {
            let mut retry = fit.clone();
            retry.num_order = fit.num_order.saturating_sub(1);
            let second = fit_rational(&target, &retry)?;
            if !second.model.is_proper() {
                return Err(Error::Improper { num: second.model.num_degree(), den: second.model.den_degree() });
            }
            second
        }
    };
    let ss = to_state_space(&report.model)?;
    let response = simulate_step(&ss, sim.t_max, sim.dt)?;
    let metrics = compute_metrics_with_band(&response, y_bar, sim.lambda, sim.band)?;
    Ok(FractionalStep { realization: report.model.clone(), response, metrics, fit: report })
}
