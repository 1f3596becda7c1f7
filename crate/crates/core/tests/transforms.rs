use approx::assert_relative_eq;
use dualgain::model::{DualModelParams, InterarrivalSpec};
use dualgain::transforms::{classical_decay_rate, rouche_root, RuinTransform, SeriesControl};
use dualgain::{Complex64, Error};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn exp_law(rate: f64) -> InterarrivalSpec {
    InterarrivalSpec::exponential(rate).unwrap()
}

fn standard() -> RuinTransform {
    RuinTransform::new(DualModelParams::new(0.5, 1.0, exp_law(1.0)).unwrap(), SeriesControl::default()).unwrap()
}

#[test]
fn j_at_zero_and_one() {
    let rt = standard();
    let (_, j0) = rt.hj(c(1e-300, 0.0), rt.rho_mu()).unwrap();
    assert_relative_eq!(j0.re, 1.0 / 1.5, epsilon = 1e-12);
    let (_, j1) = rt.hj(c(1.0, 0.0), rt.rho_mu()).unwrap();
    assert_relative_eq!(j1.re, 1.0, epsilon = 1e-14);
}

#[test]
fn hj_at_the_pole_is_an_error() {
    let rt = standard();
    assert!(matches!(rt.hj(c(1.5, 0.0), rt.rho_mu()), Err(Error::Pole(_))));
}

#[test]
fn rho_mu_is_bounded_and_self_consistent() {
    let rt = standard();
    let v = rt.rho_mu();
    assert!(v > 0.0 && v < 1.0, "rho(mu) = {v}");
    // rho(mu) is the transform evaluated at mu through the series
    assert!((rt.ruin_lt(c(1.0, 0.0)).unwrap().re - v).abs() < 1e-10);
}

#[test]
fn functional_residuals_at_spot_points() {
    let rt = standard();
    for s in [c(0.5, 0.0), c(1.0, 0.0), c(2.0, 3.0)] {
        assert!(rt.functional_residual(s).unwrap() < 1e-10);
        assert!(rt.time_functional_residual(s, 0.7).unwrap() < 1e-10);
    }
}

#[test]
fn removable_singularity_is_continuous() {
    let rt = standard();
    let s_star = 1.5;
    let at = |s: f64| rt.ruin_lt(c(s, 0.0)).unwrap().re;
    let mid = at(s_star);
    assert!(mid.is_finite());
    // one-sided limits by linear extrapolation from s* +- h and s* +- 2h
    let h = 3e-5 * s_star;
    let left = 2.0 * at(s_star - h) - at(s_star - 2.0 * h);
    let right = 2.0 * at(s_star + h) - at(s_star + 2.0 * h);
    assert!((mid - left).abs() < 1e-8, "left limit {left} vs {mid}");
    assert!((mid - right).abs() < 1e-8, "right limit {right} vs {mid}");
}

#[test]
fn classical_model_matches_exponential_closed_form() {
    let (lambda, mu) = (2.0, 1.0);
    let zeta = classical_decay_rate(lambda, mu).unwrap();
    assert_relative_eq!(zeta - lambda + lambda * mu / (mu + zeta), 0.0, epsilon = 1e-14);
    let rt = RuinTransform::new(DualModelParams::new(0.0, mu, exp_law(lambda)).unwrap(), SeriesControl::default()).unwrap();
    for s in [c(0.3, 0.0), c(1.0, 0.0), c(2.0, -1.5)] {
        let want = 1.0 / (s + zeta);
        assert!((rt.ruin_lt(s).unwrap() - want).norm() < 1e-10, "s = {s}");
    }
    assert!(classical_decay_rate(1.0, 2.0).is_err());
}

#[test]
fn tau_at_alpha_zero_is_rho() {
    let rt = standard();
    for s in [c(0.2, 0.0), c(1.7, 2.0), c(4.0, -6.0)] {
        assert!((rt.ruin_time_lt(s, 0.0).unwrap() - rt.ruin_lt(s).unwrap()).norm() < 1e-12);
    }
    assert_eq!(rt.tau_at_mu(0.0).unwrap(), rt.rho_mu());
}

#[test]
fn discounting_lowers_the_transform() {
    let rt = standard();
    let s = c(0.8, 0.0);
    let r0 = rt.ruin_time_lt(s, 0.0).unwrap().re;
    let r1 = rt.ruin_time_lt(s, 0.5).unwrap().re;
    let r2 = rt.ruin_time_lt(s, 2.0).unwrap().re;
    assert!(r0 > r1 && r1 > r2 && r2 > 0.0);
}

#[test]
fn rouche_root_examples() {
    let base = DualModelParams::new(0.5, 1.0, exp_law(1.0)).unwrap();
    let half = base.clone().with_mixture(0.5, 1.0).unwrap();
    assert_relative_eq!(rouche_root(&half).unwrap(), 0.5f64.sqrt(), epsilon = 1e-12);
    // p -> 1 the root tends to delta
    let near_one = base.with_mixture(1.0 - 1e-9, 2.0).unwrap();
    assert_relative_eq!(rouche_root(&near_one).unwrap(), 2.0, epsilon = 1e-6);
}

#[test]
fn mixture_with_p_one_reduces_to_the_pure_model() {
    let rt = RuinTransform::new(
        DualModelParams::new(0.5, 1.0, exp_law(1.0)).unwrap().with_mixture(1.0, 2.0).unwrap(),
        SeriesControl::default(),
    )
    .unwrap();
    for s in [c(0.5, 0.0), c(1.0, 0.0), c(2.0, 0.0)] {
        assert!((rt.generalized_ruin_lt(s).unwrap() - rt.ruin_lt(s).unwrap()).norm() < 1e-10);
    }
}

#[test]
fn mixture_bracket_vanishes_at_the_root() {
    let rt = RuinTransform::new(
        DualModelParams::new(0.5, 1.0, exp_law(1.0)).unwrap().with_mixture(0.5, 2.0).unwrap(),
        SeriesControl::default(),
    )
    .unwrap();
    assert!(rt.analyticity_residual().unwrap() < 1e-9);
    let m = rt.mixture_constants().unwrap();
    assert!(m.rho_mu > 0.0 && m.rho_delta > 0.0);
}

#[test]
fn left_half_plane_is_rejected() {
    assert!(matches!(standard().ruin_lt(c(-0.1, 0.0)), Err(Error::Domain(_))));
}

#[test]
fn series_reports_tail_bound() {
    let ev = standard().ruin_lt_eval(c(0.7, 0.4)).unwrap();
    assert!(ev.terms > 1 && ev.tail_bound < 1e-12);
}

fn law_strategy() -> impl Strategy<Value = InterarrivalSpec> {
    prop_oneof![
        (0.3f64..4.0).prop_map(|r| InterarrivalSpec::exponential(r).unwrap()),
        (1u32..5, 0.5f64..5.0).prop_map(|(k, r)| InterarrivalSpec::erlang(k, r).unwrap()),
        (0.05f64..0.95, 0.2f64..1.0, 1.0f64..5.0)
            .prop_map(|(w, r1, r2)| InterarrivalSpec::hyper_exponential(vec![w, 1.0 - w], vec![r1, r2]).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn functional_equation_holds(
        law in law_strategy(),
        a in 0.1f64..1.5,
        mu in 0.3f64..3.0,
        re in 0.05f64..6.0,
        im in -8.0f64..8.0,
    ) {
        let rt = RuinTransform::new(DualModelParams::new(a, mu, law).unwrap(), SeriesControl::default()).unwrap();
        let s = c(re, im);
        prop_assume!((s - mu * (1.0 + a)).norm() > 1e-3);
        prop_assert!(rt.functional_residual(s).unwrap() < 1e-10);
        prop_assert!(rt.time_functional_residual(s, 0.4).unwrap() < 1e-10);
    }

    #[test]
    fn real_transform_lies_between_zero_and_one_over_s(
        law in law_strategy(),
        a in 0.1f64..1.5,
        mu in 0.3f64..3.0,
        s in 0.05f64..6.0,
    ) {
        let rt = RuinTransform::new(DualModelParams::new(a, mu, law).unwrap(), SeriesControl::default()).unwrap();
        let v = rt.ruin_lt(c(s, 0.0)).unwrap().re;
        prop_assert!(v > 0.0 && v < 1.0 / s);
    }
}
