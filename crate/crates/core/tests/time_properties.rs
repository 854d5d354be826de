use fotf_core::approx::{augment, fit_rational, fractional_response_of, FitConfig, RationalTf};
use fotf_core::timedomain::{compute_metrics, simulate_step, step_of_fractional, to_state_space, StepConfig};
use fotf_core::{Complex64, CommensurateTf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn trapezoid(t: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    (1..t.len()).map(|k| 0.5 * (t[k] - t[k - 1]) * (f(k) + f(k - 1))).sum()
}

#[test]
fn zero_integral_at_the_zero() {
    // (1 - s) / ((1 + s/2)(1 + s/3)) has its zero at s = 1
    let tf = RationalTf::new(vec![1.0, -1.0], vec![1.0, 5.0 / 6.0, 1.0 / 6.0]).unwrap();
    let r = simulate_step(&to_state_space(&tf).unwrap(), 40.0, 1e-3).unwrap();
    let signed = trapezoid(&r.t, |k| r.y[k] * (-r.t[k]).exp());
    let total = trapezoid(&r.t, |k| r.y[k].abs() * (-r.t[k]).exp());
    assert!(signed.abs() < 1e-3 * total, "{signed} vs {total}");
}

#[test]
fn zoh_is_exact_under_refinement() {
    let systems = [
        RationalTf::new(vec![1.0, -1.0], vec![1.0, 2.0, 1.0]).unwrap(),
        RationalTf::new(vec![2.0, 0.5, 1.0], vec![6.0, 11.0, 6.0, 1.0]).unwrap(),
        RationalTf::new(vec![1.0], vec![4.0, 0.4, 1.0]).unwrap(),
    ];
    for tf in &systems {
        let ss = to_state_space(tf).unwrap();
        let coarse = simulate_step(&ss, 10.0, 0.02).unwrap();
        let fine = simulate_step(&ss, 10.0, 0.01).unwrap();
        for (k, y) in coarse.y.iter().enumerate() {
            assert!((y - fine.y[2 * k]).abs() < 1e-9, "{tf:?} at t={}", coarse.t[k]);
        }
    }
}

#[test]
fn integer_order_step_matches_direct_simulation() {
    let p1 = CommensurateTf::from_rational(&[1.0, -1.0], &[1.0, 5.0 / 6.0, 1.0 / 6.0]).unwrap();
    let sim = StepConfig { lambda: Some(1.0), ..StepConfig::default() };
    let out = step_of_fractional(&p1, &FitConfig::new(1e-3, 1e3, 8, 8), &sim).unwrap();
    let direct = simulate_step(&to_state_space(&RationalTf::from_commensurate(&p1).unwrap()).unwrap(), 40.0, 1e-3).unwrap();
    let m = compute_metrics(&direct, 1.0, Some(1.0)).unwrap();
    assert!((out.metrics.r_us - m.r_us).abs() < 1e-6);
    assert!(out.metrics.settled);
    assert!((out.response.y.last().unwrap() - 1.0).abs() < 0.02);
    assert!(out.metrics.r_us >= 0.5 * out.metrics.undershoot_lower_bound.unwrap());
}

fn pendulum_core() -> (CommensurateTf, f64, f64, f64) {
    let (p, z, m) = (19.6f64.sqrt(), 9.8f64.sqrt(), 0.1);
    // (w - z^(1/2)) / (M (w - p^(1/2)) (w^2 + p)), w = s^(1/2)
    let sp = p.sqrt();
    let den = vec![-m * sp * p, m * p, -m * sp, m];
    (CommensurateTf::from_w_coeffs(2, vec![-z.sqrt(), 1.0], den).unwrap(), p, z, m)
}

#[test]
fn pendulum_target_is_a_product_of_factors() {
    let (tf, p, z, m) = pendulum_core();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut points = vec![Complex64::new(0.0, 1.0)];
    points.extend((0..20).map(|_| Complex64::from_polar(10f64.powf(rng.gen_range(-2.0..2.0)), rng.gen_range(-3.0..3.0))));
    for s in points {
        let w = s.sqrt();
        let expect = (w - z.sqrt()) / (m * (w - p.sqrt()) * (s + p));
        let got = tf.evaluate(s).unwrap();
        assert!((got - expect).norm() <= 1e-12 * expect.norm());
    }
}

#[test]
fn pendulum_fit_and_augmentation() {
    let (tf, p, z, _) = pendulum_core();
    let cfg = FitConfig::new(1e-2, 1e2, 6, 6);
    let target = fractional_response_of(&tf, &cfg).unwrap();
    let rep = fit_rational(&target, &cfg).unwrap();
    assert!(rep.max_mag_error_db <= 2.0 && rep.max_phase_error_deg <= 10.0, "{rep:?}");
    // the fractional pole at w = p^(1/2) sits at s = p on the principal sheet
    assert!(rep.den_roots.iter().any(|r| (r - Complex64::new(p, 0.0)).norm() < 0.05 * p));

    let aug = augment(&rep.model, &[Complex64::new(-z, 0.0)], 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let s = Complex64::from_polar(10f64.powf(rng.gen_range(-2.0..2.0)), rng.gen_range(-3.0..3.0));
        let expect = rep.model.evaluate(s).unwrap() * (s + z) / (s * s);
        assert!((aug.evaluate(s).unwrap() - expect).norm() <= 1e-12 * expect.norm());
    }
}
