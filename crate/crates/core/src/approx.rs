//! Integer-order rational approximation of fractional-order responses.
//!
//! The fit engine is Levi's linearized equation-error least squares,
//!
//! ```text
//! minimize  sum_i  w_i |N(j w_i) - H(j w_i) D(j w_i)|^2 ,   D monic,
//! ```
//!
//! refined by Sanathanan-Koerner iterations that divide the weights by
//! `|D_prev(j w_i)|^2`. An optional Lawson stage then multiplies per-point
//! weights by the current pointwise error, pushing the least-squares fit
//! towards a minimax (Chebyshev) fit in magnitude and phase.
//!
//! The frequency axis is normalized by the geometric centre of the band and
//! the design matrix is column-scaled before the SVD solve.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::analysis::{frequency_response, FrequencyGrid, FrequencyResponse};
use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::poly::{horner, poly_mul, real_poly_roots};
use crate::tf::CommensurateTf;

/// Integer-order transfer function, coefficients ascending in `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalTf {
    num: Vec<f64>,
    den: Vec<f64>,
}

impl RationalTf {
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        if num.iter().chain(&den).any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        let num = trimmed(num);
        let den = trimmed(den);
        if den.iter().all(|c| *c == 0.0) {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self { num, den })
    }

    /// Requires `base_v = 1`.
    pub fn from_commensurate(tf: &CommensurateTf) -> Result<Self> {
        if tf.base_v() != 1 {
            return Err(Error::InvalidPolynomial(format!(
                "base_v {} is not an integer-order transfer function",
                tf.base_v()
            )));
        }
        Self::new(tf.num().coeffs().to_vec(), tf.den().coeffs().to_vec())
    }

    pub fn to_commensurate(&self) -> CommensurateTf {
        CommensurateTf::from_rational(&self.num, &self.den).expect("validated coefficients")
    }

    pub fn num(&self) -> &[f64] {
        &self.num
    }

    pub fn den(&self) -> &[f64] {
        &self.den
    }

    pub fn num_degree(&self) -> usize {
        self.num.len() - 1
    }

    pub fn den_degree(&self) -> usize {
        self.den.len() - 1
    }

    pub fn is_proper(&self) -> bool {
        self.num_degree() <= self.den_degree()
    }

    pub fn evaluate(&self, s: Complex64) -> Result<Complex64> {
        let d = horner(&self.den, s);
        if d.norm_sqr() == 0.0 {
            return Err(Error::PoleHit { re: s.re, im: s.im });
        }
        Ok(horner(&self.num, s) / d)
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        real_poly_roots(&self.den)
    }
}

fn trimmed(mut c: Vec<f64>) -> Vec<f64> {
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    if c.is_empty() {
        c.push(0.0);
    }
    c
}

/// Error measured by the equation-error weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMeasure {
    /// `|N/D - H|`
    Absolute,
    /// `|N/D - H| / |H|`; base weights are divided by `|H|^2`.
    Relative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_points: usize,
    pub num_order: usize,
    pub den_order: usize,
    /// Per-point positive weights; empty means all ones.
    pub weights: Vec<f64>,
    pub sk_iterations: usize,
    pub error_measure: ErrorMeasure,
    /// Lawson reweighting passes after the SK stage; 0 disables it.
    pub minimax_iterations: usize,
    /// Degrees of phase error counted as equal to 1 dB of magnitude error
    /// in the minimax stage.
    pub phase_deg_per_db: f64,
}

impl FitConfig {
    pub fn new(omega_min: f64, omega_max: f64, num_order: usize, den_order: usize) -> Self {
        Self {
            omega_min,
            omega_max,
            n_points: 500,
            num_order,
            den_order,
            weights: Vec::new(),
            sk_iterations: 10,
            error_measure: ErrorMeasure::Relative,
            minimax_iterations: 0,
            phase_deg_per_db: 5.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_min > 0.0 && self.omega_max > self.omega_min && self.omega_max.is_finite()) {
            return Err(Error::InvalidFitConfig(format!(
                "band must satisfy 0 < omega_min < omega_max, got [{}, {}]",
                self.omega_min, self.omega_max
            )));
        }
        if self.den_order < 1 {
            return Err(Error::InvalidFitConfig("den_order must be at least 1".into()));
        }
        if self.n_points < self.num_order + self.den_order + 1 {
            return Err(Error::InvalidFitConfig(format!(
                "{} points cannot determine orders {}/{}",
                self.n_points, self.num_order, self.den_order
            )));
        }
        if !self.weights.is_empty() && self.weights.len() != self.n_points {
            return Err(Error::InvalidFitConfig(format!(
                "{} weights for {} points",
                self.weights.len(),
                self.n_points
            )));
        }
        if self.weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidFitConfig("weights must be positive".into()));
        }
        if !(self.phase_deg_per_db.is_finite() && self.phase_deg_per_db > 0.0) {
            return Err(Error::InvalidFitConfig("phase_deg_per_db must be positive".into()));
        }
        Ok(())
    }

    /// `n_points` log-spaced frequencies over the band.
    pub fn grid(&self) -> Result<FrequencyGrid> {
        self.validate()?;
        FrequencyGrid::log_space(self.omega_min, self.omega_max, self.n_points)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub model: RationalTf,
    pub max_mag_error_db: f64,
    pub max_phase_error_deg: f64,
    /// Weighted equation-error norm of every iterate, in that iterate's weighting.
    pub residuals: Vec<f64>,
    /// Returned iterate (0 is the plain Levi solution).
    pub selected_iteration: usize,
    /// Whether the returned iterate's weighted residual does not exceed the
    /// Levi solution's, both measured in the returned iterate's weighting.
    pub improved_over_levi: bool,
    pub den_roots: Vec<Complex64>,
}

struct Iterate {
    b: Vec<f64>,
    a: Vec<f64>,
    weights: Vec<f64>,
}

/// Fits `num_order`/`den_order` rational model to `target` (all of its samples).
pub fn fit_rational(target: &FrequencyResponse, cfg: &FitConfig) -> Result<FitReport> {
    let n = target.len();
    let (nb, na) = (cfg.num_order, cfg.den_order);
    if na < 1 {
        return Err(Error::InvalidFitConfig("den_order must be at least 1".into()));
    }
    if n < nb + na + 1 {
        return Err(Error::InvalidFitConfig(format!("{n} points cannot determine orders {nb}/{na}")));
    }
    if !cfg.weights.is_empty() && cfg.weights.len() != n {
        return Err(Error::InvalidFitConfig(format!("{} weights for {} points", cfg.weights.len(), n)));
    }
    if cfg.weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::InvalidFitConfig("weights must be positive".into()));
    }
    if let Some(k) = target.pole_hits.first() {
        return Err(Error::FlaggedSample { omega: target.omega[*k] });
    }
    let h = &target.value;
    if cfg.error_measure == ErrorMeasure::Relative {
        if let Some(k) = h.iter().position(|v| v.norm_sqr() == 0.0) {
            return Err(Error::FlaggedSample { omega: target.omega[k] });
        }
    }

    let w0 = libm::sqrt(target.omega[0] * target.omega[n - 1]);
    let s: Vec<Complex64> = target.omega.iter().map(|w| Complex64::new(0.0, w / w0)).collect();
    let base: Vec<f64> = (0..n)
        .map(|i| {
            let user = cfg.weights.get(i).copied().unwrap_or(1.0);
            match cfg.error_measure {
                ErrorMeasure::Absolute => user,
                ErrorMeasure::Relative => user / h[i].norm_sqr(),
            }
        })
        .collect();
    let labels: Vec<String> = (0..=nb)
        .map(|k| format!("b{k}"))
        .chain((0..na).map(|k| format!("a{k}")))
        .collect();

    let mut lawson = vec![1.0 / n as f64; n];
    let mut d_prev = vec![Complex64::new(1.0, 0.0); n];
    let mut residuals = Vec::new();
    let mut iterates: Vec<Iterate> = Vec::new();
    let mut scores: Vec<f64> = Vec::new();
    let total = cfg.sk_iterations + cfg.minimax_iterations;

    for it in 0..=total {
        let weights: Vec<f64> = (0..n).map(|i| base[i] * lawson[i] * n as f64 / d_prev[i].norm_sqr()).collect();
        let (b, a) = solve_levi(&s, h, &weights, nb, na, &labels)?;
        let d: Vec<Complex64> = s.iter().map(|x| horner(&a, *x)).collect();
        let nv: Vec<Complex64> = s.iter().map(|x| horner(&b, *x)).collect();
        residuals.push(equation_residual(&nv, &d, h, &weights));

        let combined: Vec<f64> = (0..n)
            .map(|i| {
                let (db, deg) = pointwise_error(nv[i] / d[i], h[i]);
                libm::sqrt(db * db + (deg / cfg.phase_deg_per_db) * (deg / cfg.phase_deg_per_db))
            })
            .collect();
        scores.push(combined.iter().fold(0.0, |m: f64, e| if e.is_nan() { f64::INFINITY } else { m.max(*e) }));

        if it >= cfg.sk_iterations && cfg.minimax_iterations > 0 {
            for (l, e) in lawson.iter_mut().zip(&combined) {
                *l *= if e.is_finite() { e.max(1e-300) } else { 1.0 };
            }
            let sum: f64 = lawson.iter().sum();
            lawson.iter_mut().for_each(|l| *l /= sum);
        }
        d_prev = d;
        iterates.push(Iterate { b, a, weights });
    }

    let selected = if cfg.minimax_iterations == 0 {
        total
    } else {
        (cfg.sk_iterations..=total)
            .min_by(|x, y| scores[*x].partial_cmp(&scores[*y]).unwrap_or(core::cmp::Ordering::Equal))
            .unwrap_or(total)
    };

    let chosen = &iterates[selected];
    let levi = &iterates[0];
    let eval = |b: &[f64], a: &[f64]| -> (Vec<Complex64>, Vec<Complex64>) {
        (s.iter().map(|x| horner(b, *x)).collect(), s.iter().map(|x| horner(a, *x)).collect())
    };
    let (nc, dc) = eval(&chosen.b, &chosen.a);
    let (nl, dl) = eval(&levi.b, &levi.a);
    let chosen_res = equation_residual(&nc, &dc, h, &chosen.weights);
    let levi_res = equation_residual(&nl, &dl, h, &chosen.weights);
    let improved_over_levi = chosen_res <= levi_res * (1.0 + 1e-12);

    let model = unscale(&chosen.b, &chosen.a, w0)?;
    let (max_mag_error_db, max_phase_error_deg) = band_errors(&model, target);
    let den_roots = model.poles()?;
    Ok(FitReport {
        model,
        max_mag_error_db,
        max_phase_error_deg,
        residuals,
        selected_iteration: selected,
        improved_over_levi,
        den_roots,
    })
}

/// One weighted Levi solve in the normalized variable; returns `(b, a)` with `a` monic.
fn solve_levi(
    s: &[Complex64],
    h: &[Complex64],
    weights: &[f64],
    nb: usize,
    na: usize,
    labels: &[String],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = s.len();
    let m = nb + 1 + na;
    let mut mat = DMatrix::<f64>::zeros(2 * n, m);
    let mut rhs = DVector::<f64>::zeros(2 * n);
    for i in 0..n {
        let sw = libm::sqrt(weights[i]);
        let mut p = Complex64::new(1.0, 0.0);
        for k in 0..=nb.max(na) {
            if k <= nb {
                mat[(i, k)] = sw * p.re;
                mat[(n + i, k)] = sw * p.im;
            }
            if k < na {
                let e = -h[i] * p * sw;
                mat[(i, nb + 1 + k)] = e.re;
                mat[(n + i, nb + 1 + k)] = e.im;
            }
            if k == na {
                let r = h[i] * p * sw;
                rhs[i] = r.re;
                rhs[n + i] = r.im;
            }
            p *= s[i];
        }
    }
    let x = least_squares(mat, &rhs, labels)?;
    let b = x.iter().take(nb + 1).copied().collect();
    let mut a: Vec<f64> = x.iter().skip(nb + 1).copied().collect();
    a.push(1.0);
    Ok((b, a))
}

fn equation_residual(nv: &[Complex64], d: &[Complex64], h: &[Complex64], weights: &[f64]) -> f64 {
    libm::sqrt(
        (0..h.len())
            .map(|i| weights[i] * (nv[i] - h[i] * d[i]).norm_sqr())
            .sum::<f64>(),
    )
}

/// Magnitude (dB) and phase (deg) of `fit / target`.
fn pointwise_error(fit: Complex64, target: Complex64) -> (f64, f64) {
    let r = fit / target;
    (20.0 * libm::log10(r.norm()), libm::atan2(r.im, r.re).to_degrees())
}

/// Maximum magnitude (dB) and phase (deg) deviation of `model` from `target`.
pub fn band_errors(model: &RationalTf, target: &FrequencyResponse) -> (f64, f64) {
    let mut mag: f64 = 0.0;
    let mut phase: f64 = 0.0;
    for (w, h) in target.omega.iter().zip(&target.value) {
        match model.evaluate(Complex64::new(0.0, *w)) {
            Ok(f) => {
                let (db, deg) = pointwise_error(f, *h);
                mag = if db.is_nan() { f64::INFINITY } else { mag.max(libm::fabs(db)) };
                phase = if deg.is_nan() { f64::INFINITY } else { phase.max(libm::fabs(deg)) };
            }
            Err(_) => {
                mag = f64::INFINITY;
                phase = f64::INFINITY;
            }
        }
    }
    (mag, phase)
}

/// Undo the `s / w0` normalization and make the denominator monic in `s`.
fn unscale(b: &[f64], a: &[f64], w0: f64) -> Result<RationalTf> {
    let na = a.len() - 1;
    // coefficient k picks up w0^(na - k) after dividing by the leading w0^(-na)
    let num = b.iter().enumerate().map(|(k, c)| c * libm::pow(w0, na as f64 - k as f64)).collect();
    let den = a.iter().enumerate().map(|(k, c)| c * libm::pow(w0, na as f64 - k as f64)).collect();
    RationalTf::new(num, den)
}

/// Exact response of `tf` on the fit grid of `cfg`.
pub fn fractional_response_of(tf: &CommensurateTf, cfg: &FitConfig) -> Result<FrequencyResponse> {
    Ok(frequency_response(tf, &cfg.grid()?))
}

/// Multiplies `base` by `prod (s - z)` over `extra_zeros` and divides it by
/// `s^extra_integrator_poles`.
pub fn augment(base: &RationalTf, extra_zeros: &[Complex64], extra_integrator_poles: usize) -> Result<RationalTf> {
    let factors = conjugate_factors(extra_zeros)?;
    let mut num = base.num.clone();
    for f in &factors {
        num = poly_mul(&num, f);
    }
    let mut den = vec![0.0; extra_integrator_poles];
    den.extend_from_slice(&base.den);
    let cap = crate::tf::DEFAULT_DEGREE_CAP;
    if num.len() > cap || den.len() > cap {
        return Err(Error::DegreeCap { degree: num.len().max(den.len()) - 1, cap });
    }
    RationalTf::new(num, den)
}

/// Real factors `s - r` and `s^2 - 2 Re(r) s + |r|^2` for a conjugate-closed root set.
fn conjugate_factors(zeros: &[Complex64]) -> Result<Vec<Vec<f64>>> {
    let mut used = vec![false; zeros.len()];
    let mut out = Vec::new();
    for i in 0..zeros.len() {
        if used[i] {
            continue;
        }
        let r = zeros[i];
        let tol = 1e-12 * r.norm().max(1.0);
        if libm::fabs(r.im) <= tol {
            used[i] = true;
            out.push(vec![-r.re, 1.0]);
            continue;
        }
        let partner = (0..zeros.len()).find(|j| !used[*j] && *j != i && (zeros[*j] - r.conj()).norm() <= tol);
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
                out.push(vec![r.norm_sqr(), -2.0 * r.re, 1.0]);
            }
            None => {
                return Err(Error::InvalidPolynomial(format!("zero {r} has no conjugate partner")));
            }
        }
    }
    Ok(out)
}
