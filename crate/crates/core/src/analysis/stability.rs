use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::FractionalPoly;
use crate::tf::{combine, Combine, CommensurateTf};

/// Width of the band around the sector boundary treated as marginal (rad).
pub const BOUNDARY_BAND_RAD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    Marginal,
    Unstable,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Marginal => "marginal",
            Verdict::Unstable => "unstable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootVerdict {
    pub root: Complex64,
    /// `arg(w)` in radians; 0 for a root at the origin.
    pub arg: f64,
    /// `|arg(w)| > pi/(2v)` by more than the boundary band.
    pub satisfies_sector: bool,
    pub on_boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub base_v: u32,
    pub sector_half_angle: f64,
    pub roots: Vec<RootVerdict>,
    pub verdict: Verdict,
}

/// Sector test on the `w`-plane roots of a characteristic polynomial:
/// stable iff every root has `|arg(w)| > pi/(2v)`.
pub fn matignon_poly(den: &FractionalPoly) -> Result<StabilityReport> {
    if den.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    let base_v = den.base_v();
    let half = PI / (2.0 * base_v as f64);
    let mut verdict = Verdict::Stable;
    let mut any_inside = false;
    let roots = den
        .roots()?
        .into_iter()
        .map(|root| {
            let at_origin = root.norm() == 0.0;
            let arg = if at_origin { 0.0 } else { libm::atan2(root.im, root.re) };
            let gap = libm::fabs(arg) - half;
            let on_boundary = at_origin || libm::fabs(gap) <= BOUNDARY_BAND_RAD;
            let satisfies_sector = !on_boundary && gap > 0.0;
            if !satisfies_sector {
                if on_boundary {
                    verdict = Verdict::Marginal;
                } else {
                    any_inside = true;
                }
            }
            RootVerdict { root, arg, satisfies_sector, on_boundary }
        })
        .collect();
    if any_inside {
        verdict = Verdict::Unstable;
    }
    Ok(StabilityReport { base_v, sector_half_angle: half, roots, verdict })
}

/// Matignon's test on the denominator of `tf`. With `base_v = 1` this is the
/// classical open-left-half-plane test.
pub fn matignon_stable(tf: &CommensurateTf) -> Result<StabilityReport> {
    matignon_poly(tf.den())
}

/// One of the four closed-loop maps of a unity-feedback loop.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopMap {
    pub name: &'static str,
    pub formula: &'static str,
    pub tf: CommensurateTf,
    pub report: StabilityReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InternalStabilityReport {
    /// `Dp*Dc + Np*Nc`, shared by all four maps.
    pub characteristic: FractionalPoly,
    pub maps: Vec<LoopMap>,
    pub verdict: Verdict,
}

impl InternalStabilityReport {
    pub fn map(&self, name: &str) -> Option<&LoopMap> {
        self.maps.iter().find(|m| m.name == name)
    }
}

/// Forms `1/(1+PC)`, `C/(1+PC)`, `P/(1+PC)` and `PC/(1+PC)` without
/// cancelling common factors and applies the sector test to each.
pub fn internal_stability(plant: &CommensurateTf, controller: &CommensurateTf) -> Result<InternalStabilityReport> {
    let one = CommensurateTf::identity();
    let loop_gain = combine(plant, controller, Combine::Series)?;
    // a/(1 + a*b) over the common base: Na*Db / (Da*Db + Na*Nb)
    let sensitivity = combine(&one, &loop_gain, Combine::UnityFeedbackClosure)?;
    let control = combine(controller, plant, Combine::UnityFeedbackClosure)?;
    let load = combine(plant, controller, Combine::UnityFeedbackClosure)?;
    let complementary = combine(&loop_gain, &one, Combine::UnityFeedbackClosure)?;
    let characteristic = control.den().clone();

    let mut maps = Vec::with_capacity(4);
    let mut verdict = Verdict::Stable;
    for (name, formula, tf) in [
        ("r_to_e", "1/(1+PC)", sensitivity),
        ("r_to_u", "C/(1+PC)", control),
        ("d_to_y", "P/(1+PC)", load),
        ("r_to_y", "PC/(1+PC)", complementary),
    ] {
        let report = matignon_stable(&tf)?;
        verdict = worse(verdict, report.verdict);
        maps.push(LoopMap { name, formula, tf, report });
    }
    Ok(InternalStabilityReport { characteristic, maps, verdict })
}

fn worse(a: Verdict, b: Verdict) -> Verdict {
    match (a, b) {
        (Verdict::Unstable, _) | (_, Verdict::Unstable) => Verdict::Unstable,
        (Verdict::Marginal, _) | (_, Verdict::Marginal) => Verdict::Marginal,
        _ => Verdict::Stable,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tf::{make_canceller, CancellerSpec};
    use alloc::vec;

    fn args_deg(r: &StabilityReport) -> Vec<f64> {
        let mut a: Vec<f64> = r.roots.iter().map(|x| x.arg.to_degrees()).collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        a
    }

    #[test]
    fn closed_loop_cubic_is_stable() {
        let tf = CommensurateTf::from_w_coeffs(2, vec![1.0], vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        let r = matignon_stable(&tf).unwrap();
        assert_eq!(r.verdict, Verdict::Stable);
        assert!((r.sector_half_angle - PI / 4.0).abs() < 1e-15);
        let a = args_deg(&r);
        assert!((a[0] + 120.0).abs() < 1e-9 && (a[1] - 120.0).abs() < 1e-9 && (a[2].abs() - 180.0).abs() < 1e-9);
    }

    #[test]
    fn positive_real_root_is_unstable() {
        let tf = CommensurateTf::from_w_coeffs(2, vec![1.0], vec![-1.0, 1.0]).unwrap();
        let r = matignon_stable(&tf).unwrap();
        assert_eq!(r.verdict, Verdict::Unstable);
        assert!(!r.roots[0].satisfies_sector);
    }

    #[test]
    fn inverse_canceller_is_stable() {
        let q = make_canceller(CancellerSpec::new(1.0, 4).unwrap()).unwrap();
        let inv = CommensurateTf::identity().quotient(&q).unwrap();
        let r = matignon_stable(&inv).unwrap();
        assert_eq!(r.verdict, Verdict::Stable);
        let a = args_deg(&r);
        assert!((a[0] + 90.0).abs() < 1e-9 && (a[1] - 90.0).abs() < 1e-9 && (a[2].abs() - 180.0).abs() < 1e-9);
        assert!((r.sector_half_angle.to_degrees() - 22.5).abs() < 1e-12);
    }

    #[test]
    fn boundary_and_origin_are_marginal() {
        // w^2 + 1 with v = 1: roots on the imaginary axis
        let tf = CommensurateTf::from_rational(&[1.0], &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(matignon_stable(&tf).unwrap().verdict, Verdict::Marginal);
        // fractional integrator 1/(w (w+1)), v = 2
        let tf = CommensurateTf::from_w_coeffs(2, vec![1.0], vec![0.0, 1.0, 1.0]).unwrap();
        let r = matignon_stable(&tf).unwrap();
        assert_eq!(r.verdict, Verdict::Marginal);
        assert!(r.roots.iter().any(|x| x.on_boundary && x.root.norm() == 0.0));
        // marginal + inside -> unstable
        let tf = CommensurateTf::from_rational(&[1.0], &[0.0, -1.0, 1.0]).unwrap();
        assert_eq!(matignon_stable(&tf).unwrap().verdict, Verdict::Unstable);
        // constant denominator has no roots
        let r = matignon_stable(&CommensurateTf::identity()).unwrap();
        assert!(r.roots.is_empty());
        assert_eq!(r.verdict, Verdict::Stable);
    }

    #[test]
    fn fractional_root_outside_principal_half_plane_is_stable() {
        // w = e^{j 3pi/8}: in the right half w-plane yet |arg| > pi/8 for v = 4
        let root = Complex64::from_polar(1.0, 3.0 * PI / 8.0);
        let den = vec![root.norm_sqr(), -2.0 * root.re, 1.0];
        let tf = CommensurateTf::from_w_coeffs(4, vec![1.0], den).unwrap();
        assert_eq!(matignon_stable(&tf).unwrap().verdict, Verdict::Stable);
        let tf = CommensurateTf::from_w_coeffs(1, vec![1.0], vec![root.norm_sqr(), -2.0 * root.re, 1.0]).unwrap();
        assert_eq!(matignon_stable(&tf).unwrap().verdict, Verdict::Unstable);
    }

    #[test]
    fn worked_internal_stability_examples() {
        let p = CommensurateTf::from_rational(&[-1.0, 1.0], &[2.0, 1.0]).unwrap();
        let c = CommensurateTf::from_w_coeffs(2, vec![1.0], vec![1.0, 1.0]).unwrap();
        let rep = internal_stability(&p, &c).unwrap();
        assert_eq!(rep.verdict, Verdict::Stable);
        assert_eq!(rep.characteristic.coeffs(), &[1.0, 2.0, 2.0, 1.0]);
        assert_eq!(rep.map("r_to_u").unwrap().tf.num().coeffs(), &[2.0, 0.0, 1.0]);

        let c_bad = CommensurateTf::from_rational(&[1.0], &[-1.0, 1.0]).unwrap();
        let rep = internal_stability(&p, &c_bad).unwrap();
        assert_eq!(rep.verdict, Verdict::Unstable);
        let ru = &rep.map("r_to_u").unwrap().report;
        assert_eq!(ru.verdict, Verdict::Unstable);
        assert!(ru.roots.iter().any(|r| (r.root - Complex64::new(1.0, 0.0)).norm() < 1e-9));

        let p = CommensurateTf::from_rational(&[1.0], &[1.0, 1.0]).unwrap();
        let rep = internal_stability(&p, &CommensurateTf::identity()).unwrap();
        assert_eq!(rep.verdict, Verdict::Stable);
        assert_eq!(rep.characteristic.coeffs(), &[2.0, 1.0]);
        assert_eq!(rep.maps.len(), 4);
    }
}
