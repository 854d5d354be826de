//! Polynomials in `w = s^(1/v)` and their roots.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Polynomial with real coefficients in `w = s^(1/base_v)`, ascending powers.
///
/// `coeffs[k]` multiplies `w^k`. The last coefficient is non-zero unless the
/// polynomial is the canonical zero `[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalPoly {
    base_v: u32,
    coeffs: Vec<f64>,
}

impl FractionalPoly {
    pub fn new(base_v: u32, mut coeffs: Vec<f64>) -> Result<Self> {
        if base_v == 0 {
            return Err(Error::InvalidPolynomial("base_v must be at least 1".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        trim(&mut coeffs);
        Ok(Self { base_v, coeffs })
    }

    pub fn zero(base_v: u32) -> Self {
        Self { base_v: base_v.max(1), coeffs: vec![0.0] }
    }

    pub fn constant(base_v: u32, c: f64) -> Self {
        Self { base_v: base_v.max(1), coeffs: vec![c] }
    }

    pub fn base_v(&self) -> u32 {
        self.base_v
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree in `w`; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn eval_w(&self, w: Complex64) -> Complex64 {
        horner(&self.coeffs, w)
    }

    /// Re-express the polynomial in `u = s^(1/(factor*base_v))`, i.e. `w = u^factor`.
    pub fn rebase(&self, factor: u32) -> Self {
        let factor = factor.max(1) as usize;
        if factor == 1 {
            return self.clone();
        }
        let mut coeffs = vec![0.0; self.degree() * factor + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[k * factor] = *c;
        }
        Self { base_v: self.base_v * factor as u32, coeffs }
    }

    pub(crate) fn from_raw(base_v: u32, mut coeffs: Vec<f64>) -> Self {
        trim(&mut coeffs);
        Self { base_v, coeffs }
    }

    /// Roots in the `w`-plane, with multiplicity.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        wplane_roots(self)
    }
}

fn trim(coeffs: &mut Vec<f64>) {
    while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
        coeffs.pop();
    }
    if coeffs.is_empty() {
        coeffs.push(0.0);
    }
}

pub(crate) fn horner(coeffs: &[f64], x: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
}

pub(crate) fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub(crate) fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

/// All complex roots of `p` in the `w`-plane.
///
/// A constant polynomial has no roots; the zero polynomial is rejected.
/// Exact zero low-order coefficients are deflated as exact roots at `w = 0`.
pub fn wplane_roots(p: &FractionalPoly) -> Result<Vec<Complex64>> {
    if p.is_zero() {
        return Err(Error::InvalidPolynomial("zero polynomial has no finite root set".into()));
    }
    real_poly_roots(p.coeffs())
}

const MAX_ABERTH_ITERATIONS: usize = 800;

pub(crate) fn real_poly_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let mut c = coeffs.to_vec();
    trim(&mut c);
    let zeros_at_origin = c.iter().take_while(|x| **x == 0.0).count();
    let c = &c[zeros_at_origin..];
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros_at_origin];
    let n = c.len() - 1;
    match n {
        0 => {}
        1 => roots.push(Complex64::new(-c[0] / c[1], 0.0)),
        2 => roots.extend(quadratic(c[0], c[1], c[2])),
        _ => roots.extend(aberth(c)?),
    }
    Ok(roots)
}

fn quadratic(c: f64, b: f64, a: f64) -> [Complex64; 2] {
    let disc = b * b - 4.0 * a * c;
    if disc >= 0.0 {
        let sq = libm::sqrt(disc);
        let q = -0.5 * (b + libm::copysign(sq, b));
        if q == 0.0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        [Complex64::new(q / a, 0.0), Complex64::new(c / q, 0.0)]
    } else {
        let re = -b / (2.0 * a);
        let im = libm::sqrt(-disc) / (2.0 * libm::fabs(a));
        [Complex64::new(re, im), Complex64::new(re, -im)]
    }
}

/// Newton correction `p(z)/p'(z)`, together with whether `|p(z)|` is already
/// below its rounding-error bound. Uses the reversed polynomial for `|z| > 1`.
fn newton_ratio(c: &[f64], z: Complex64) -> (Complex64, bool) {
    let n = c.len() - 1;
    let eps = f64::EPSILON;
    if z.norm() <= 1.0 {
        let mut p = Complex64::new(c[n], 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        let mut bound = libm::fabs(c[n]);
        let az = z.norm();
        for k in (0..n).rev() {
            dp = dp * z + p;
            p = p * z + c[k];
            bound = bound * az + libm::fabs(c[k]);
        }
        let converged = p.norm() <= 4.0 * (n as f64) * eps * bound;
        (p / dp, converged)
    } else {
        let y = z.inv();
        let ay = y.norm();
        // q(y) = sum c[n-k] y^k
        let mut q = Complex64::new(c[0], 0.0);
        let mut dq = Complex64::new(0.0, 0.0);
        let mut bound = libm::fabs(c[0]);
        for &ck in &c[1..=n] {
            dq = dq * y + q;
            q = q * y + ck;
            bound = bound * ay + libm::fabs(ck);
        }
        let converged = q.norm() <= 4.0 * (n as f64) * eps * bound;
        // p(z) = z^n q(1/z); p'(z)/p(z) = (n - y q'(y)/q(y)) / z
        let ratio = z / (Complex64::new(n as f64, 0.0) - y * dq / q);
        (ratio, converged)
    }
}

/// Initial approximations from the upper convex hull of `(k, ln|c_k|)`.
fn initial_guesses(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let pts: Vec<(usize, f64)> = c
        .iter()
        .enumerate()
        .filter(|(_, x)| **x != 0.0)
        .map(|(k, x)| (k, libm::log(libm::fabs(*x))))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (k1, y1) = hull[hull.len() - 2];
            let (k2, y2) = hull[hull.len() - 1];
            let cross = (k2 as f64 - k1 as f64) * (p.1 - y1) - (y2 - y1) * (p.0 as f64 - k1 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut guesses = Vec::with_capacity(n);
    let sigma = 0.7;
    for pair in hull.windows(2) {
        let (i, yi) = pair[0];
        let (j, yj) = pair[1];
        let m = j - i;
        let radius = libm::exp((yi - yj) / m as f64);
        for q in 0..m {
            let theta = 2.0 * PI * q as f64 / m as f64 + 2.0 * PI * i as f64 / n as f64 + sigma;
            guesses.push(Complex64::from_polar(radius, theta));
        }
    }
    guesses
}

fn aberth(c: &[f64]) -> Result<Vec<Complex64>> {
    let n = c.len() - 1;
    let mut z = initial_guesses(c);
    debug_assert_eq!(z.len(), n);
    let mut done = vec![false; n];
    for _ in 0..MAX_ABERTH_ITERATIONS {
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (ratio, converged) = newton_ratio(c, z[i]);
            if converged {
                done[i] = true;
                continue;
            }
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let d = z[i] - z[j];
                    if d.norm_sqr() > 0.0 {
                        sum += d.inv();
                    }
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if step.re.is_finite() && step.im.is_finite() {
                z[i] -= step;
                if step.norm() <= f64::EPSILON * z[i].norm() {
                    done[i] = true;
                }
            } else {
                done[i] = true;
            }
        }
        if done.iter().all(|d| *d) {
            return Ok(symmetrize(z));
        }
    }
    Err(Error::RootsNotConverged { iterations: MAX_ABERTH_ITERATIONS })
}

/// Snap numerically real roots of a real polynomial onto the real axis.
fn symmetrize(mut z: Vec<Complex64>) -> Vec<Complex64> {
    for r in z.iter_mut() {
        if libm::fabs(r.im) <= 64.0 * f64::EPSILON * r.norm() {
            r.im = 0.0;
        }
    }
    z
}
