use approx::assert_relative_eq;
use dualgain::model::{classify_drift, DriftClass, DualModelParams, InterarrivalSpec, LatticeParams};
use dualgain::quadrature::{graded_panels, integrate_panels, GaussLegendre};
use dualgain::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn re(s: f64) -> Complex64 {
    Complex64::new(s, 0.0)
}

#[test]
fn lst_at_zero_is_one() {
    for law in [
        InterarrivalSpec::exponential(1.0).unwrap(),
        InterarrivalSpec::erlang(4, 2.0).unwrap(),
        InterarrivalSpec::deterministic(0.7).unwrap(),
        InterarrivalSpec::hyper_exponential(vec![0.3, 0.7], vec![0.5, 3.0]).unwrap(),
    ] {
        assert_relative_eq!(law.lst(re(0.0)).unwrap().re, 1.0, epsilon = 1e-15);
    }
}

#[test]
fn lst_closed_forms() {
    let d = InterarrivalSpec::deterministic(2.0).unwrap();
    assert_relative_eq!(d.lst(re(0.5)).unwrap().re, (-1.0f64).exp(), epsilon = 1e-15);
    let e = InterarrivalSpec::erlang(2, 3.0).unwrap();
    assert_relative_eq!(e.lst(re(3.0)).unwrap().re, 0.25, epsilon = 1e-15);
}

#[test]
fn lst_matches_density_quadrature() {
    let rule = GaussLegendre::new(48);
    let s = Complex64::new(0.8, 1.3);
    for law in [
        InterarrivalSpec::exponential(1.5).unwrap(),
        InterarrivalSpec::erlang(3, 2.0).unwrap(),
        InterarrivalSpec::hyper_exponential(vec![0.4, 0.6], vec![0.5, 2.0]).unwrap(),
    ] {
        let panels = graded_panels(0.0, 80.0, None, None);
        let re_part = integrate_panels(&|t| (-s.re * t).exp() * (s.im * t).cos() * law.density(t).unwrap(), &panels, &rule);
        let im_part = integrate_panels(&|t| -(-s.re * t).exp() * (s.im * t).sin() * law.density(t).unwrap(), &panels, &rule);
        let z = law.lst(s).unwrap();
        assert!((z - Complex64::new(re_part, im_part)).norm() < 1e-10, "{law:?}");
    }
}

#[test]
fn lst_left_of_abscissa_is_a_pole_error() {
    let law = InterarrivalSpec::exponential(2.0).unwrap();
    assert!(law.lst(re(-2.5)).is_err());
    assert!(law.lst_continued(re(-1.0)).is_ok());
}

#[test]
fn deterministic_law_has_no_density() {
    assert!(InterarrivalSpec::deterministic(1.0).unwrap().density(0.5).is_err());
}

#[test]
fn sample_moments_match() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let law = InterarrivalSpec::hyper_exponential(vec![0.25, 0.75], vec![0.5, 4.0]).unwrap();
    let n = 200_000;
    let xs: Vec<f64> = (0..n).map(|_| law.sample(&mut rng)).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (law.variance() / n as f64).sqrt();
    assert!((mean - law.mean()).abs() < 4.0 * se);
    assert!((var / law.variance() - 1.0).abs() < 0.05);
}

#[test]
fn survival_and_cdf_are_complementary() {
    let law = InterarrivalSpec::erlang(3, 1.2).unwrap();
    for t in [0.0, 0.3, 1.0, 4.0] {
        assert_relative_eq!(law.survival(t) + law.cdf(t), 1.0, epsilon = 1e-14);
    }
}

#[test]
fn invalid_laws_are_rejected() {
    assert!(InterarrivalSpec::exponential(0.0).is_err());
    assert!(InterarrivalSpec::erlang(0, 1.0).is_err());
    assert!(InterarrivalSpec::deterministic(-1.0).is_err());
    assert!(InterarrivalSpec::hyper_exponential(vec![0.5, 0.6], vec![1.0, 2.0]).is_err());
    assert!(InterarrivalSpec::hyper_exponential(vec![1.0], vec![1.0, 2.0]).is_err());
}

#[test]
fn drift_classification() {
    let exp = |r| InterarrivalSpec::exponential(r).unwrap();
    assert_eq!(classify_drift(&DualModelParams::new(0.5, 1.0, exp(1.0)).unwrap()), DriftClass::Transient);
    assert_eq!(classify_drift(&DualModelParams::new(0.0, 2.0, exp(1.0)).unwrap()), DriftClass::CertainRuin);
    assert_eq!(classify_drift(&DualModelParams::new(0.0, 1.0, exp(2.0)).unwrap()), DriftClass::Transient);
    assert_eq!(classify_drift(&DualModelParams::new(0.0, 1.0, exp(1.0)).unwrap()), DriftClass::Critical);
}

#[test]
fn mixture_needs_delta_iff_p_below_one() {
    let base = DualModelParams::new(0.5, 1.0, InterarrivalSpec::exponential(1.0).unwrap()).unwrap();
    assert!(base.clone().with_mixture(1.0, 3.0).unwrap().delta.is_none());
    assert_eq!(base.clone().with_mixture(0.4, 3.0).unwrap().delta, Some(3.0));
    assert!(base.clone().with_mixture(1.2, 3.0).is_err());
    assert!(base.with_mixture(0.5, -1.0).is_err());
}

#[test]
fn lattice_levels_and_intervals() {
    let p = LatticeParams::new(2.0, 6, 1.0, 0.05, 0.5).unwrap();
    assert_eq!(p.level(0), 2.0);
    assert_relative_eq!(p.level(3), 2.0 / 3.375, epsilon = 1e-15);
    assert_relative_eq!(p.width(2), p.level(1) - p.level(2), epsilon = 1e-15);
    assert_eq!(p.interval_of(2.0), Some(1));
    assert_eq!(p.interval_of(p.level(3)), Some(4));
    assert_eq!(p.interval_of(p.level(3) * (1.0 + 1e-12)), Some(3));
    assert_eq!(p.interval_of(p.level(3) * (1.0 - 1e-12)), Some(4));
    assert_eq!(p.interval_of(p.level(6)), None);
    assert_eq!(p.interval_of(2.1), None);
}

#[test]
fn lattice_requires_positive_a() {
    let err = LatticeParams::new(2.0, 6, 1.0, 0.05, 0.0).unwrap_err();
    assert!(err.to_string().contains("lattice requires a > 0"), "{err}");
    assert!(LatticeParams::new(2.0, 1, 1.0, 0.05, 0.5).is_err());
    assert!(LatticeParams::new(2.0, 6, 0.0, 0.05, 0.5).is_err());
}
