use approx::assert_relative_eq;
use dualgain::inversion::{ruin_probability, InversionControl};
use dualgain::lattice::{self, delay_ode_residuals, ChainRoute, ExpConvolutionBasis};
use dualgain::model::{DualModelParams, InterarrivalSpec, LatticeParams};
use dualgain::quadrature::GaussLegendre;
use dualgain::transforms::{RuinTransform, SeriesControl};

fn standard() -> LatticeParams {
    LatticeParams::new(2.0, 6, 1.0, 0.05, 0.5).unwrap()
}

#[test]
fn gamma_boundary_values() {
    let b = ExpConvolutionBasis::new(1.0, 0.0, 0.5).unwrap();
    assert_eq!(b.gamma(0, 0.0), 1.0);
    for n in 1..6 {
        assert_eq!(b.gamma(n, 0.0), 0.0);
    }
}

/// `gamma_2 = Gbar_{c^2} * g_c * g_1` by nested Gauss-Legendre.
#[test]
fn gamma_two_matches_nested_quadrature() {
    let (lambda, q, a) = (1.0, 0.1, 0.5);
    let basis = ExpConvolutionBasis::new(lambda, q, a).unwrap();
    let (r, c) = (lambda + q, 1.0 + a);
    let g = |k: f64, t: f64| lambda * k * (-r * k * t).exp();
    let gbar = |k: f64, t: f64| (-r * k * t).exp();
    let rule = GaussLegendre::new(40);
    let x = 0.3;
    let inner = |y: f64| rule.integrate(&|s| gbar(c * c, y - s) * g(c, s), 0.0, y);
    let oracle = rule.integrate(&|t| inner(x - t) * g(1.0, t), 0.0, x);
    assert!((basis.gamma(2, x) - oracle).abs() < 1e-8);
}

#[test]
fn first_convolutions_closed_form() {
    let (lambda, q, a) = (1.0, 0.1, 0.5);
    let basis = ExpConvolutionBasis::new(lambda, q, a).unwrap();
    let r = lambda + q;
    for x in [0.2, 0.7, 1.4] {
        let (one, qc) = basis.q_and_one_convolutions(1, x);
        assert_relative_eq!(one, lambda / r * (1.0 - (-r * x).exp()), epsilon = 1e-14);
        let want = lambda / r * (x - (1.0 - (-r * x).exp()) / r);
        assert_relative_eq!(qc, want, epsilon = 1e-14);
    }
    assert_eq!(basis.q_and_one_convolutions(3, 0.0), (0.0, 0.0));
}

#[test]
fn second_convolutions_match_double_quadrature() {
    let (lambda, q, a) = (1.0, 0.1, 0.5);
    let basis = ExpConvolutionBasis::new(lambda, q, a).unwrap();
    let (r, c) = (lambda + q, 1.0 + a);
    let g = |k: f64, t: f64| lambda * k * (-r * k * t).exp();
    let rule = GaussLegendre::new(40);
    let x = 0.4;
    // (F * g_c * g_1)(x) = int_0^x int_0^{x-t} F(x - t - s) g_c(s) g_1(t) ds dt
    let conv = |f: &dyn Fn(f64) -> f64| {
        rule.integrate(&|t| rule.integrate(&|s| f(x - t - s) * g(c, s), 0.0, x - t) * g(1.0, t), 0.0, x)
    };
    let (one, qc) = basis.q_and_one_convolutions(2, x);
    assert!((one - conv(&|_| 1.0)).abs() < 1e-8);
    assert!((qc - conv(&|y| y)).abs() < 1e-8);
}

#[test]
fn grid_route_agrees_with_closed_forms() {
    let basis = ExpConvolutionBasis::new(1.0, 0.05, 0.5).unwrap();
    for n in [1, 3, 6] {
        for x in [0.1, 0.5, 1.0] {
            let (g, route) = basis.gamma_route(n, x);
            assert_eq!(route, ChainRoute::ClosedForm);
            let (gg, one, qc) = basis.grid_chain(n, x);
            let (one_c, q_c) = basis.q_and_one_convolutions(n, x);
            assert!((g - gg).abs() < 1e-8, "gamma_{n}({x}): {g} vs {gg}");
            assert!((one - one_c).abs() < 1e-8 && (qc - q_c).abs() < 1e-8);
        }
    }
}

#[test]
fn long_chains_fall_back_to_the_grid_or_vanish() {
    let basis = ExpConvolutionBasis::new(1.0, 0.05, 0.5).unwrap();
    let (v, route) = basis.gamma_route(40, 1e-12);
    assert_eq!((v, route), (0.0, ChainRoute::Negligible));
    let (v, route) = basis.gamma_route(20, 0.8);
    assert!(v >= 0.0 && route != ChainRoute::ClosedForm);
}

#[test]
fn boundary_values_and_residuals() {
    let sol = lattice::solve(&standard()).unwrap();
    let n = sol.params.n_levels;
    assert_eq!((sol.rho[0], sol.rho[n]), (0.0, 1.0));
    assert_eq!((sol.mu[0], sol.mu[n]), (1.0, 0.0));
    assert_eq!(sol.v[n], 0.0);
    assert!(sol.residual_rho < 1e-10 && sol.residual_mu < 1e-10 && sol.residual_v < 1e-10);
    assert!(sol.rho.windows(2).all(|w| w[0] <= w[1]));
    assert!(sol.v.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn reference_values() {
    let sol = lattice::solve(&standard()).unwrap();
    assert!((sol.rho[3] - 0.97232).abs() < 1e-5, "rho_3 = {}", sol.rho[3]);
    assert!((sol.v[0] - 0.66356).abs() < 1e-5, "v_0 = {}", sol.v[0]);
}

#[test]
fn complementarity_without_discounting() {
    for n_levels in [4, 16, 40] {
        let sol = lattice::solve_exit(&LatticeParams::new(2.0, n_levels, 1.0, 0.0, 0.5).unwrap()).unwrap();
        for n in 0..=n_levels {
            assert!((sol.rho[n] + sol.mu[n] - 1.0).abs() < 1e-8, "N={n_levels} n={n}");
        }
        for x in [0.5, 1.1, 1.9] {
            assert!((sol.rho_eval(x).unwrap() + sol.mu_eval(x).unwrap() - 1.0).abs() < 1e-8);
        }
    }
}

#[test]
fn evaluation_is_continuous_at_lattice_points() {
    let p = standard();
    let sol = lattice::solve(&p).unwrap();
    for n in 1..p.n_levels {
        let x = p.level(n) * (1.0 + 1e-12);
        assert!((sol.rho_eval(x).unwrap() - sol.rho[n]).abs() < 1e-9);
        assert!((sol.mu_eval(x).unwrap() - sol.mu[n]).abs() < 1e-9);
        assert!((sol.v_eval(x).unwrap() - sol.v[n]).abs() < 1e-9);
        // and from below, through the next interval
        let y = p.level(n) * (1.0 - 1e-12);
        assert!((sol.rho_eval(y).unwrap() - sol.rho[n]).abs() < 1e-9);
    }
    assert!(sol.rho_eval(p.level(p.n_levels) * 0.5).is_err());
}

#[test]
fn dividends_above_the_barrier_are_paid_at_once() {
    let sol = lattice::solve(&standard()).unwrap();
    assert_relative_eq!(sol.v_eval(3.0).unwrap(), sol.v[0] + 1.0, epsilon = 1e-15);
}

/// With `q = 0`, a high barrier and many levels, the lattice down-crossing
/// probability approaches the ruin probability of the pure proportional model.
#[test]
fn large_lattice_approaches_the_ruin_probability() {
    let x = 1.0;
    let p = LatticeParams::new(50.0 * x, 40, 1.0, 0.0, 0.5).unwrap();
    let sol = lattice::solve_exit(&p).unwrap();
    assert!(lattice::solve(&p).is_err(), "undiscounted dividends from a high barrier are numerically singular");
    let params = DualModelParams::without_additive_gain(0.5, InterarrivalSpec::exponential(1.0).unwrap()).unwrap();
    let rt = RuinTransform::new(params, SeriesControl::default()).unwrap();
    let r = ruin_probability(x, &rt, &InversionControl::default()).unwrap().value;
    let rho = sol.rho_eval(x).unwrap();
    assert!((rho - r).abs() < 1e-2, "rho_N(x) = {rho}, R(x) = {r}");
}

#[test]
fn delay_ode_residuals_shrink_with_more_levels() {
    let p = standard();
    let v_b = lattice::solve(&LatticeParams { n_levels: 256, ..p }).unwrap().v[0];
    let res: Vec<(f64, f64)> = [8, 16, 32]
        .iter()
        .map(|&n| delay_ode_residuals(&lattice::solve(&LatticeParams { n_levels: n, ..p }).unwrap(), v_b, 400))
        .collect();
    for w in res.windows(2) {
        assert!(w[1].0 <= w[0].0 && w[1].1 <= w[0].1, "{res:?}");
    }
    let coarse = delay_ode_residuals(&lattice::solve(&LatticeParams { n_levels: 4, ..p }).unwrap(), v_b, 400);
    assert!(coarse.0 > 1e3 * res[2].0, "{coarse:?} vs {:?}", res[2]);
}

#[test]
fn large_lattices_stay_well_conditioned() {
    let sol = lattice::solve(&LatticeParams::new(2.0, 128, 1.0, 0.05, 0.5).unwrap()).unwrap();
    assert!(sol.condition_rho < 1e6 && sol.condition_v < 1e6);
    assert!(sol.residual_v < 1e-10);
}
