//! Dense linear-algebra helpers on top of nalgebra.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative singular-value threshold below which a least-squares system is
/// declared rank deficient.
pub(crate) const RANK_TOLERANCE: f64 = 1e-13;

/// Least-squares solution of `a x ~= b` by SVD of the column-scaled matrix.
///
/// `labels` names the unknowns for the rank-deficiency diagnostic.
pub(crate) fn least_squares(a: DMatrix<f64>, b: &DVector<f64>, labels: &[String]) -> Result<DVector<f64>> {
    let ncols = a.ncols();
    let mut a = a;
    let mut scale = Vec::with_capacity(ncols);
    for j in 0..ncols {
        let norm = a.column(j).norm();
        let s = if norm > 0.0 { 1.0 / norm } else { 1.0 };
        a.column_mut(j).scale_mut(s);
        scale.push(s);
    }
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let (mut imax, mut imin) = (0, 0);
    for k in 0..sv.len() {
        if sv[k] > sv[imax] {
            imax = k;
        }
        if sv[k] < sv[imin] {
            imin = k;
        }
    }
    let ratio = if sv[imax] > 0.0 { sv[imin] / sv[imax] } else { 0.0 };
    if ratio.is_nan() || ratio <= RANK_TOLERANCE || sv.len() < ncols {
        let v_t = svd.v_t.as_ref().expect("requested V^T");
        let mut dir: Vec<f64> = (0..ncols).map(|j| v_t[(imin, j)] * scale[j]).collect();
        let norm = libm::sqrt(dir.iter().map(|x| x * x).sum::<f64>());
        dir.iter_mut().for_each(|x| *x /= norm);
        let mut direction = String::new();
        for (j, x) in dir.iter().enumerate() {
            if libm::fabs(*x) > 1e-6 {
                if !direction.is_empty() {
                    direction.push_str(", ");
                }
                let _ = write!(direction, "{}: {:.4}", labels.get(j).map(String::as_str).unwrap_or("?"), x);
            }
        }
        return Err(Error::RankDeficient { ratio, direction });
    }
    let y = svd.solve(b, 0.0).map_err(|_| Error::RankDeficient { ratio, direction: String::new() })?;
    Ok(DVector::from_iterator(ncols, y.iter().zip(&scale).map(|(v, s)| v * s)))
}

/// Matrix exponential by [6/6] Pade approximation with scaling and squaring.
pub(crate) fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let norm1 = (0..n).map(|j| a.column(j).iter().map(|x| libm::fabs(*x)).sum::<f64>()).fold(0.0, f64::max);
    let mut squarings = 0i32;
    if norm1 > 0.5 {
        squarings = libm::ceil(libm::log2(norm1 / 0.5)) as i32;
    }
    let scaled = a * libm::pow(2.0, -squarings as f64);

    const Q: usize = 6;
    let mut c = [0.0f64; Q + 1];
    c[0] = 1.0;
    for k in 1..=Q {
        c[k] = c[k - 1] * (Q + 1 - k) as f64 / (k * (2 * Q + 1 - k)) as f64;
    }
    let ident = DMatrix::<f64>::identity(n, n);
    let mut power = ident.clone();
    let mut num = ident.clone();
    let mut den = ident;
    for (k, ck) in c.iter().enumerate().skip(1) {
        power = &power * &scaled;
        num += &power * *ck;
        if k % 2 == 0 {
            den += &power * *ck;
        } else {
            den -= &power * *ck;
        }
    }
    let mut e = den.lu().solve(&num).expect("Pade denominator is nonsingular for ||A|| <= 1/2");
    for _ in 0..squarings {
        e = &e * &e;
    }
    e
}
