use fotf_core::analysis::{frequency_response, margins, matignon_stable, FrequencyGrid, Verdict};
use fotf_core::approx::RationalTf;
use fotf_core::{make_canceller, CancellerSpec, Complex64, CommensurateTf};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[test]
fn canceller_grid_is_stable() {
    for lambda in [0.5, 1.0, 16.0] {
        for v in [2, 4, 8] {
            let q = make_canceller(CancellerSpec::new(lambda, v).unwrap()).unwrap();
            let inv = CommensurateTf::identity().quotient(&q).unwrap();
            let r = matignon_stable(&inv).unwrap();
            assert_eq!(r.verdict, Verdict::Stable, "lambda {lambda} v {v}");
            assert_eq!(r.roots.len(), v as usize - 1);
        }
    }
}

#[test]
fn integer_order_verdict_matches_real_parts() {
    let mut rng = ChaCha8Rng::seed_from_u64(90);
    let (mut stable, mut unstable) = (0, 0);
    for _ in 0..50 {
        // random real and complex-pair roots, some in the right half-plane
        let mut den = vec![1.0];
        let mut expect = true;
        let n = rng.gen_range(1..=5);
        let mut k = 0;
        while k < n {
            let re: f64 = rng.gen_range(-3.0..1.0);
            if re.abs() < 0.05 {
                continue;
            }
            expect &= re < 0.0;
            if k + 1 < n && rng.gen_bool(0.5) {
                let im: f64 = rng.gen_range(0.1..4.0);
                den = mul(&den, &[re * re + im * im, -2.0 * re, 1.0]);
                k += 2;
            } else {
                den = mul(&den, &[-re, 1.0]);
                k += 1;
            }
        }
        let tf = CommensurateTf::from_rational(&[1.0], &den).unwrap();
        let r = matignon_stable(&tf).unwrap();
        let lhp = RationalTf::new(vec![1.0], den.clone()).unwrap().poles().unwrap().iter().all(|p| p.re < 0.0);
        assert_eq!(lhp, expect);
        assert_eq!(r.verdict == Verdict::Stable, lhp, "{den:?}");
        if lhp {
            stable += 1;
        } else {
            unstable += 1;
        }
    }
    assert!(stable > 5 && unstable > 5);
}

#[test]
fn cancellation_improves_margins_of_example_plant() {
    let p = CommensurateTf::from_rational(&[4.0, -4.0], &[0.4, 4.1, 1.0]).unwrap();
    let grid = FrequencyGrid::default();
    let mut last = margins(&frequency_response(&p, &grid)).unwrap();
    for v in [2, 4] {
        let q = make_canceller(CancellerSpec::new(1.0, v).unwrap()).unwrap();
        let m = margins(&frequency_response(&p.quotient(&q).unwrap(), &grid)).unwrap();
        assert!(m.phase_margin_deg > last.phase_margin_deg);
        assert!(m.gain_margin_db > last.gain_margin_db);
        last = m;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn feedback_matches_pointwise_formula(
        a in prop::collection::vec(-3.0f64..3.0, 1..4),
        b in prop::collection::vec(0.5f64..3.0, 2..4),
        c in prop::collection::vec(-3.0f64..3.0, 1..3),
        mag in -1.0f64..1.0,
        ang in -1.5f64..1.5,
    ) {
        let p = CommensurateTf::from_w_coeffs(2, a, b).unwrap();
        let k = CommensurateTf::from_w_coeffs(3, c, vec![1.0, 1.0]).unwrap();
        let closed = p.feedback(&k).unwrap();
        prop_assert_eq!(closed.base_v(), 6);
        let s = Complex64::from_polar(10f64.powf(mag), ang);
        let (pv, kv) = (p.evaluate(s), k.evaluate(s));
        if let (Ok(pv), Ok(kv)) = (pv, kv) {
            let expect = pv / (1.0 + pv * kv);
            if expect.norm().is_finite() && (1.0 + pv * kv).norm() > 1e-6 {
                let got = closed.evaluate(s).unwrap();
                prop_assert!((got - expect).norm() <= 1e-9 * expect.norm().max(1.0));
            }
        }
    }

    #[test]
    fn canceller_shift_identity(lambda in 0.05f64..50.0, e in 1u32..5, mag in -2.0f64..2.0, ang in -3.1f64..3.1) {
        let v = 1 << e;
        let q = make_canceller(CancellerSpec::new(lambda, v).unwrap()).unwrap();
        let s = Complex64::from_polar(10f64.powf(mag), ang);
        let x = (s / lambda).powf(1.0 / v as f64);
        let lhs = (1.0 - x) * q.evaluate(s).unwrap();
        let rhs = 1.0 - s / lambda;
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + (s / lambda).norm()));
    }
}
