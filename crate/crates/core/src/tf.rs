//! Commensurate fractional-order transfer functions and fractional
//! pole-zero cancellers.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::{poly_add, poly_mul, FractionalPoly};

/// Maximum number of `w`-coefficients a combined polynomial may carry.
pub const DEFAULT_DEGREE_CAP: usize = 4096;

/// `num(w) / den(w)` with `w = s^(1/base_v)` on the principal branch.
///
/// Both polynomials always share the same `base_v`. No common factors are
/// ever cancelled.
#[derive(Debug, Clone, PartialEq)]
pub struct CommensurateTf {
    num: FractionalPoly,
    den: FractionalPoly,
}

/// How [`combine`] joins two transfer functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combine {
    /// `a * b`
    Series,
    /// `a / b`
    Quotient,
    /// `a / (1 + a*b)`, formed as `Na*Db / (Da*Db + Na*Nb)`.
    UnityFeedbackClosure,
}

impl CommensurateTf {
    /// Builds a transfer function, rebasing both polynomials to a common base.
    pub fn new(num: FractionalPoly, den: FractionalPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let base = lcm(num.base_v(), den.base_v());
        Ok(Self {
            num: num.rebase(base / num.base_v()),
            den: den.rebase(base / den.base_v()),
        })
    }

    /// Coefficients ascending in powers of `w = s^(1/base_v)`.
    pub fn from_w_coeffs(base_v: u32, num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        Self::new(FractionalPoly::new(base_v, num)?, FractionalPoly::new(base_v, den)?)
    }

    /// Integer-order transfer function, coefficients ascending in `s`.
    pub fn from_rational(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::from_w_coeffs(1, num.to_vec(), den.to_vec())
    }

    pub fn identity() -> Self {
        Self { num: FractionalPoly::constant(1, 1.0), den: FractionalPoly::constant(1, 1.0) }
    }

    pub fn base_v(&self) -> u32 {
        self.num.base_v()
    }

    pub fn num(&self) -> &FractionalPoly {
        &self.num
    }

    pub fn den(&self) -> &FractionalPoly {
        &self.den
    }

    /// Same transfer function expressed over base `base_v` (a multiple of the current base).
    pub fn rebased(&self, base_v: u32) -> Result<Self> {
        if base_v == 0 || !base_v.is_multiple_of(self.base_v()) {
            return Err(Error::InvalidPolynomial(alloc::format!(
                "cannot rebase from {} to {}",
                self.base_v(),
                base_v
            )));
        }
        let f = base_v / self.base_v();
        Ok(Self { num: self.num.rebase(f), den: self.den.rebase(f) })
    }

    /// Evaluates at `s` with `w = |s|^(1/v) exp(j arg(s)/v)`, `arg(s)` in `(-pi, pi]`.
    ///
    /// The open negative real axis is the branch cut and is rejected.
    pub fn evaluate(&self, s: Complex64) -> Result<Complex64> {
        let w = principal_root(s, self.base_v())?;
        self.evaluate_w(w).map_err(|_| Error::PoleHit { re: s.re, im: s.im })
    }

    /// Evaluates directly at a point of the `w`-plane.
    pub fn evaluate_w(&self, w: Complex64) -> Result<Complex64> {
        let d = self.den.eval_w(w);
        if d.norm_sqr() == 0.0 {
            return Err(Error::PoleHit { re: w.re, im: w.im });
        }
        let v = self.num.eval_w(w) / d;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::PoleHit { re: w.re, im: w.im });
        }
        Ok(v)
    }

    /// Static gain `evaluate(0)`.
    pub fn dc_gain(&self) -> Result<f64> {
        self.evaluate(Complex64::new(0.0, 0.0)).map(|v| v.re)
    }

    pub fn series(&self, other: &Self) -> Result<Self> {
        combine(self, other, Combine::Series)
    }

    pub fn quotient(&self, other: &Self) -> Result<Self> {
        combine(self, other, Combine::Quotient)
    }

    /// `self / (1 + self * other)`.
    pub fn feedback(&self, other: &Self) -> Result<Self> {
        combine(self, other, Combine::UnityFeedbackClosure)
    }
}

/// Principal `v`-th root of `s`. Rejects the open negative real axis.
pub fn principal_root(s: Complex64, v: u32) -> Result<Complex64> {
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    if s.im == 0.0 && s.re < 0.0 {
        return Err(Error::BranchCut { re: s.re, im: s.im });
    }
    if s.re == 0.0 && s.im == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if v == 1 {
        return Ok(s);
    }
    let r = libm::pow(s.norm(), 1.0 / v as f64);
    let theta = libm::atan2(s.im, s.re) / v as f64;
    Ok(Complex64::from_polar(r, theta))
}

/// Joins two transfer functions over the common base `lcm(a.base_v, b.base_v)`.
pub fn combine(a: &CommensurateTf, b: &CommensurateTf, mode: Combine) -> Result<CommensurateTf> {
    combine_with_cap(a, b, mode, DEFAULT_DEGREE_CAP)
}

pub fn combine_with_cap(
    a: &CommensurateTf,
    b: &CommensurateTf,
    mode: Combine,
    cap: usize,
) -> Result<CommensurateTf> {
    let base = lcm(a.base_v(), b.base_v());
    let check = |len: usize| {
        if len > cap {
            Err(Error::DegreeCap { degree: len - 1, cap })
        } else {
            Ok(())
        }
    };
    check(a.num.degree().max(a.den.degree()) * (base / a.base_v()) as usize + 1)?;
    check(b.num.degree().max(b.den.degree()) * (base / b.base_v()) as usize + 1)?;
    let a = a.rebased(base)?;
    let b = b.rebased(base)?;
    let (na, da) = (a.num.coeffs(), a.den.coeffs());
    let (nb, db) = (b.num.coeffs(), b.den.coeffs());
    let (num, den) = match mode {
        Combine::Series => (poly_mul(na, nb), poly_mul(da, db)),
        Combine::Quotient => {
            if b.num.is_zero() {
                return Err(Error::DivisionByZero);
            }
            (poly_mul(na, db), poly_mul(da, nb))
        }
        Combine::UnityFeedbackClosure => {
            (poly_mul(na, db), poly_add(&poly_mul(da, db), &poly_mul(na, nb)))
        }
    };
    check(num.len())?;
    check(den.len())?;
    let den = FractionalPoly::from_raw(base, den);
    if den.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(CommensurateTf { num: FractionalPoly::from_raw(base, num), den })
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: u32, b: u32) -> u32 {
    a / gcd(a, b) * b
}

/// Location `lambda` (rad/s) of the real zero or pole being cancelled and the
/// expansion depth `v`, a power of two no smaller than 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CancellerSpec {
    pub lambda: f64,
    pub v: u32,
}

impl CancellerSpec {
    pub fn new(lambda: f64, v: u32) -> Result<Self> {
        let spec = Self { lambda, v };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidCanceller(alloc::format!(
                "lambda must be a positive real, got {}",
                self.lambda
            )));
        }
        if self.v < 2 || !self.v.is_power_of_two() {
            return Err(Error::InvalidCanceller(alloc::format!(
                "v must be a power of two >= 2, got {}",
                self.v
            )));
        }
        Ok(())
    }
}

/// `Q(s) = prod_{k=0}^{log2(v/2)} [1 + (s/lambda)^(2^k / v)]` over `w = s^(1/v)`.
///
/// `(1 - (s/lambda)^(1/v)) * Q(s) = 1 - s/lambda`, so dividing a plant by `Q`
/// leaves a weaker zero at `lambda`.
pub fn make_canceller(spec: CancellerSpec) -> Result<CommensurateTf> {
    spec.validate()?;
    let v = spec.v;
    let mut num = vec![1.0];
    let mut power = 1u32;
    while power < v {
        // 1 + lambda^(-power/v) w^power
        let mut factor = vec![0.0; power as usize + 1];
        factor[0] = 1.0;
        factor[power as usize] = libm::pow(spec.lambda, -(power as f64) / v as f64);
        num = poly_mul(&num, &factor);
        power *= 2;
    }
    Ok(CommensurateTf {
        num: FractionalPoly::from_raw(v, num),
        den: FractionalPoly::constant(v, 1.0),
    })
}

/// `Q_{p,v}(s) / Q_{z,v}(s)`: half cancellation of an unstable pole at `p`
/// and a non-minimum phase zero at `z`. Unit DC gain.
pub fn make_ratio_canceller(p: f64, z: f64, v: u32) -> Result<CommensurateTf> {
    let qp = make_canceller(CancellerSpec::new(p, v)?)?;
    let qz = make_canceller(CancellerSpec::new(z, v)?)?;
    combine(&qp, &qz, Combine::Quotient)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn canceller_coefficients() {
        let q = make_canceller(CancellerSpec::new(1.0, 2).unwrap()).unwrap();
        assert_eq!(q.base_v(), 2);
        assert_eq!(q.num().coeffs(), &[1.0, 1.0]);
        assert_eq!(q.den().coeffs(), &[1.0]);

        let q = make_canceller(CancellerSpec::new(1.0, 4).unwrap()).unwrap();
        assert_eq!(q.num().coeffs(), &[1.0, 1.0, 1.0, 1.0]);

        let q = make_canceller(CancellerSpec::new(16.0, 2).unwrap()).unwrap();
        assert_eq!(q.num().coeffs(), &[1.0, 0.25]);
    }

    #[test]
    fn canceller_shape() {
        for v in [2u32, 4, 8, 16] {
            for lambda in [0.3, 1.0, 7.0] {
                let q = make_canceller(CancellerSpec { lambda, v }).unwrap();
                assert_eq!(q.num().degree(), v as usize - 1);
                assert_eq!(q.num().coeffs()[0], 1.0);
                assert!(q.num().coeffs().iter().all(|x| *x >= 0.0));
                assert_eq!(q.evaluate(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
            }
        }
    }

    #[test]
    fn canceller_domain_errors() {
        assert!(CancellerSpec::new(1.0, 3).is_err());
        assert!(CancellerSpec::new(1.0, 1).is_err());
        assert!(CancellerSpec::new(0.0, 2).is_err());
        assert!(CancellerSpec::new(-2.0, 4).is_err());
        assert!(make_canceller(CancellerSpec { lambda: 1.0, v: 6 }).is_err());
        assert!(make_ratio_canceller(1.0, -1.0, 2).is_err());
    }

    #[test]
    fn ratio_canceller_matches_shifted_form() {
        let (p, z) = (19.6f64.sqrt(), 9.8f64.sqrt());
        let r = make_ratio_canceller(p, z, 2).unwrap();
        assert!((r.dc_gain().unwrap() - 1.0).abs() < 1e-15);
        let scale = (p / z).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..20 {
            let s = Complex64::from_polar(10f64.powf(rng.gen_range(-2.0..2.0)), rng.gen_range(-3.0..3.0));
            let w = s.sqrt();
            let direct = (w + p.sqrt()) / (w + z.sqrt());
            let got = r.evaluate(s).unwrap() * scale;
            assert!((got - direct).norm() <= 1e-12 * direct.norm());
        }
    }

    #[test]
    fn ratio_canceller_identity_when_equal() {
        for v in [2, 4, 8] {
            let r = make_ratio_canceller(3.0, 3.0, v).unwrap();
            assert_eq!(r.num(), r.den());
        }
    }

    #[test]
    fn from_rational_examples() {
        let p1 = CommensurateTf::from_rational(&[1.0, -1.0], &[1.0, 5.0 / 6.0, 1.0 / 6.0]).unwrap();
        let s = c(0.4, 1.3);
        let direct = (c(1.0, 0.0) - s) / ((c(1.0, 0.0) + s / 2.0) * (c(1.0, 0.0) + s / 3.0));
        assert!((p1.evaluate(s).unwrap() - direct).norm() < 1e-14);

        let p = CommensurateTf::from_rational(&[4.0, -4.0], &[0.4, 4.1, 1.0]).unwrap();
        assert!((p.dc_gain().unwrap() - 10.0).abs() < 1e-14);

        let id = CommensurateTf::from_rational(&[1.0], &[1.0]).unwrap();
        assert_eq!(id.evaluate(c(3.0, -2.0)).unwrap(), c(1.0, 0.0));

        assert_eq!(CommensurateTf::from_rational(&[1.0], &[0.0, 0.0]), Err(Error::ZeroDenominator));
    }

    #[test]
    fn feedback_closure_reproduces_worked_example() {
        let p = CommensurateTf::from_rational(&[-1.0, 1.0], &[2.0, 1.0]).unwrap();
        let ctrl = CommensurateTf::from_w_coeffs(2, vec![1.0], vec![1.0, 1.0]).unwrap();
        let u_r = ctrl.feedback(&p).unwrap();
        assert_eq!(u_r.base_v(), 2);
        // (s + 2) over (w + 1)(w^2 + w + 1)
        assert_eq!(u_r.num().coeffs(), &[2.0, 0.0, 1.0]);
        assert_eq!(u_r.den().coeffs(), &[1.0, 2.0, 2.0, 1.0]);
    }

    #[test]
    fn series_rebases_to_lcm() {
        let a = CommensurateTf::from_w_coeffs(2, vec![1.0, 0.5], vec![2.0, 1.0]).unwrap();
        let b = CommensurateTf::from_w_coeffs(4, vec![0.3, 0.0, 1.0], vec![1.0, 1.0, 0.0, 1.0]).unwrap();
        let ab = combine(&a, &b, Combine::Series).unwrap();
        assert_eq!(ab.base_v(), 4);
        let s = c(1.0, 0.0);
        let expect = a.evaluate(s).unwrap() * b.evaluate(s).unwrap();
        assert!((ab.evaluate(s).unwrap() - expect).norm() < 1e-14);
        let a3 = CommensurateTf::from_w_coeffs(3, vec![1.0, 1.0], vec![1.0]).unwrap();
        assert_eq!(combine(&a, &a3, Combine::Series).unwrap().base_v(), 6);
    }

    #[test]
    fn quotient_by_canceller() {
        let p = CommensurateTf::from_rational(&[4.0, -4.0], &[0.4, 4.1, 1.0]).unwrap();
        let q = make_canceller(CancellerSpec::new(1.0, 2).unwrap()).unwrap();
        let pf = p.quotient(&q).unwrap();
        // direct complex-arithmetic oracle
        let s = c(0.0, 0.5);
        let pd = 4.0 * (c(1.0, 0.0) - s) / ((s + 0.1) * (s + 4.0));
        let qd = c(1.0, 0.0) + s.sqrt();
        let got = pf.evaluate(s).unwrap();
        assert!((got - pd / qd).norm() <= 1e-13 * got.norm());
        let w = c(0.0, 0.3);
        let rel = (pf.evaluate(w).unwrap() * q.evaluate(w).unwrap() - p.evaluate(w).unwrap()).norm()
            / p.evaluate(w).unwrap().norm();
        assert!(rel < 1e-12);
        assert_eq!(pf.dc_gain().unwrap(), p.dc_gain().unwrap());
    }

    #[test]
    fn combine_errors() {
        let p = CommensurateTf::from_rational(&[1.0], &[1.0, 1.0]).unwrap();
        let zero = CommensurateTf::from_rational(&[0.0], &[1.0]).unwrap();
        assert_eq!(p.quotient(&zero), Err(Error::DivisionByZero));
        let big = CommensurateTf::from_w_coeffs(64, vec![1.0, 1.0], vec![1.0, 0.0, 1.0]).unwrap();
        let odd = CommensurateTf::from_w_coeffs(63, vec![1.0, 1.0], vec![1.0]).unwrap();
        assert!(matches!(combine_with_cap(&big, &odd, Combine::Series, 100), Err(Error::DegreeCap { .. })));
        // -P closed with unity: a/(1 + a*b) with a*b = -1 has a zero denominator
        let one = CommensurateTf::identity();
        let minus_one = CommensurateTf::from_rational(&[-1.0], &[1.0]).unwrap();
        assert_eq!(one.feedback(&minus_one), Err(Error::DivisionByZero));
    }

    #[test]
    fn principal_branch_evaluation() {
        let tf = CommensurateTf::from_w_coeffs(2, vec![1.0, -1.0], vec![1.0]).unwrap();
        let v = tf.evaluate(c(0.0, 1.0)).unwrap();
        assert!((v - c(0.292_893_218_813_452_5, -0.707_106_781_186_547_5)).norm() < 1e-15);
        assert!(matches!(tf.evaluate(c(-1.0, 0.0)), Err(Error::BranchCut { .. })));
        // just above the cut is fine
        assert!(tf.evaluate(c(-1.0, 1e-9)).is_ok());
        let pole = CommensurateTf::from_w_coeffs(2, vec![1.0], vec![-1.0, 1.0]).unwrap();
        assert!(matches!(pole.evaluate(c(1.0, 0.0)), Err(Error::PoleHit { .. })));
    }

    #[test]
    fn canceller_identity_on_principal_sheet() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let mag = 10f64.powf(rng.gen_range(-3.0..3.0));
            let arg = rng.gen_range(-core::f64::consts::PI + 0.01..=core::f64::consts::PI);
            let s = Complex64::from_polar(mag, arg);
            let lambda = rng.gen_range(0.1..50.0);
            let v = [2u32, 4, 8][rng.gen_range(0..3)];
            let q = make_canceller(CancellerSpec::new(lambda, v).unwrap()).unwrap();
            let root = principal_root(s / lambda, v).unwrap();
            let lhs = q.evaluate(s).unwrap() * (c(1.0, 0.0) - root);
            let rhs = c(1.0, 0.0) - s / lambda;
            assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm(), "s={s} lambda={lambda} v={v}");
        }
    }

    #[test]
    fn conjugate_symmetry_and_rebase() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let tf = CommensurateTf::from_w_coeffs(4, vec![0.5, -1.0, 2.0], vec![1.0, 1.5, 0.2, 0.7, 1.0]).unwrap();
        let tf3 = tf.rebased(12).unwrap();
        for _ in 0..100 {
            let s = Complex64::from_polar(10f64.powf(rng.gen_range(-2.0..2.0)), rng.gen_range(-3.1..3.1));
            let a = tf.evaluate(s).unwrap();
            let b = tf.evaluate(s.conj()).unwrap();
            assert!((a.conj() - b).norm() <= 1e-12 * a.norm());
            let r = tf3.evaluate(s).unwrap();
            assert!((r - a).norm() <= 1e-12 * a.norm());
        }
    }
}
