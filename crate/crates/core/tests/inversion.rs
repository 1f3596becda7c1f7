use dualgain::inversion::{euler, invert, ruin_probability, ruin_time_transform, talbot, InversionControl, InversionMethod};
use dualgain::mc::{simulate_ruin, MCConfig};
use dualgain::model::{DualModelParams, InterarrivalSpec};
use dualgain::quadrature::{integrate_panels, GaussLegendre};
use dualgain::transforms::{RuinTransform, SeriesControl};
use dualgain::{Complex64, Result};

fn talbot_ctl() -> InversionControl {
    InversionControl { method: InversionMethod::Talbot, ..InversionControl::default() }
}

type Transform<'a> = &'a dyn Fn(Complex64) -> Result<Complex64>;

#[test]
fn known_pairs_both_methods() {
    let pairs: [(Transform, f64, f64, f64); 3] = [
        (&|s| Ok(1.0 / (s + 1.0)), 1.0, (-1.0f64).exp(), 1e-7),
        (&|s| Ok(1.0 / s), 5.0, 1.0, 1e-7),
        (&|s| Ok(1.0 / (s * s)), 2.0, 2.0, 1e-6),
    ];
    let ctl = InversionControl::default();
    for (f, x, want, tol) in pairs {
        let (e, _) = euler(f, x, &ctl).unwrap();
        let (t, _) = talbot(f, x, &talbot_ctl()).unwrap();
        assert!((e - want).abs() < tol, "euler {e} vs {want}");
        assert!((t - want).abs() < tol, "talbot {t} vs {want}");
    }
}

#[test]
fn invert_reports_selected_method() {
    let f = |s: Complex64| Ok(1.0 / (s + 2.0));
    let inv = invert(&f, 0.5, &talbot_ctl()).unwrap();
    assert_eq!(inv.method, InversionMethod::Talbot);
    assert!((inv.value - (-1.0f64).exp()).abs() < 1e-7);
}

#[test]
fn even_or_tiny_term_counts_are_rejected() {
    assert!(InversionControl { terms: 50, ..InversionControl::default() }.validate().is_err());
    assert!(InversionControl { terms: 5, ..InversionControl::default() }.validate().is_err());
}

fn standard() -> RuinTransform {
    let p = DualModelParams::new(0.5, 1.0, InterarrivalSpec::exponential(1.0).unwrap()).unwrap();
    RuinTransform::new(p, SeriesControl::default()).unwrap()
}

#[test]
fn reference_ruin_probabilities() {
    let rt = standard();
    let ctl = InversionControl::default();
    for (x, want) in [(0.5, 0.82106), (1.0, 0.63056), (2.0, 0.31713)] {
        let inv = ruin_probability(x, &rt, &ctl).unwrap();
        assert!((inv.value - want).abs() < 1e-5, "R({x}) = {}", inv.value);
        assert!(inv.flags.is_empty(), "{:?}", inv.flags);
    }
}

#[test]
fn euler_and_talbot_agree_on_ruin_probability() {
    let rt = standard();
    for x in [0.3, 1.0, 3.0] {
        let e = ruin_probability(x, &rt, &InversionControl::default()).unwrap().value;
        let t = ruin_probability(x, &rt, &talbot_ctl()).unwrap().value;
        assert!((e - t).abs() < 1e-7, "x = {x}: {e} vs {t}");
    }
}

/// `R(x) = P(T > x) + E[ R((x - T)(1 + a) + C); T <= x ]` with `T ~ Exp(1)`, `C ~ Exp(mu)`.
#[test]
fn ruin_probability_solves_its_integral_equation() {
    let rt = standard();
    let ctl = InversionControl::default();
    let r = |x: f64| ruin_probability(x, &rt, &ctl).unwrap().value;
    let rule = GaussLegendre::new(16);
    for x in [0.5, 1.0, 2.0] {
        let inner = |t: f64| {
            let base = (x - t) * 1.5;
            integrate_panels(&|c| (-c).exp() * r(base + c), &[(0.0, 2.0), (2.0, 6.0), (6.0, 14.0), (14.0, 36.0)], &rule)
        };
        let integral = rule.integrate(&|t| (-t).exp() * inner(t), 0.0, x);
        let residual = r(x) - (-x).exp() - integral;
        assert!(residual.abs() < 1e-4, "x = {x}: residual {residual:e}");
    }
}

#[test]
fn critical_classical_case_has_certain_ruin() {
    let p = DualModelParams::new(0.0, 1.0, InterarrivalSpec::exponential(1.0).unwrap()).unwrap();
    let rt = RuinTransform::new(p, SeriesControl::default()).unwrap();
    for x in [0.5, 2.0, 5.0] {
        let v = ruin_probability(x, &rt, &InversionControl::default()).unwrap().value;
        assert!((v - 1.0).abs() < 1e-3, "R({x}) = {v}");
    }
}

#[test]
fn ruin_time_transform_is_below_ruin_probability() {
    let rt = standard();
    let ctl = InversionControl::default();
    for x in [0.5, 1.5] {
        let r = ruin_probability(x, &rt, &ctl).unwrap().value;
        let t = ruin_time_transform(x, 1.0, &rt, &ctl).unwrap().value;
        assert!(t > 0.0 && t < r);
    }
}

/// `int e^{-s x} E_x[e^{-alpha tau}] dx` at `s = alpha = 1` against an outer
/// quadrature of Monte-Carlo estimates.
#[test]
fn ruin_time_transform_matches_monte_carlo_quadrature() {
    let rt = standard();
    let params = rt.params().clone();
    let target = rt.ruin_time_lt(Complex64::new(1.0, 0.0), 1.0).unwrap().re;
    let rule = GaussLegendre::new(12);
    let panels = [(0.0, 2.0), (2.0, 6.0), (6.0, 16.0)];
    let mut mean = 0.0;
    let mut var = 0.0;
    for (k, &(a, b)) in panels.iter().enumerate() {
        let half = 0.5 * (b - a);
        for (i, (&node, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            let x = a + half * (node + 1.0);
            let cfg = MCConfig { paths: 20_000, seed: 1000 + (k * 100 + i) as u64, ..MCConfig::default() };
            let est = simulate_ruin(&params, x, 1.0, &cfg).unwrap();
            let weight = half * w * (-x).exp();
            mean += weight * est.mean;
            var += (weight * est.stderr).powi(2);
        }
    }
    // tail beyond x = 16 is below e^{-16}
    let se = var.sqrt();
    assert!((mean - target).abs() < 3.0 * se + 1.2e-7, "quadrature {mean} vs transform {target} (se {se:e})");
}
