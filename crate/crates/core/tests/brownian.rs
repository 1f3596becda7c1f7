use approx::assert_relative_eq;
use dualgain::brownian::oracle::{FamilyKind, NestedQuadrature};
use dualgain::brownian::{self, BrownianControl, BrownianParams, CoeffTable, ScaleFamily};
use dualgain::lattice;
use dualgain::mc::{simulate_reflected_exit, simulate_two_sided_exit, MCConfig};
use dualgain::model::LatticeParams;
use dualgain::quadrature::{graded_panels, integrate_panels, GaussLegendre};

fn standard() -> BrownianParams {
    BrownianParams::new(-1.0, 0.3, LatticeParams::new(2.0, 4, 1.0, 0.1, 0.5).unwrap()).unwrap()
}

#[test]
fn scale_functions_at_zero() {
    let f = ScaleFamily::new(1.1, -1.0, 0.3).unwrap();
    assert_eq!(f.w(0.0), 0.0);
    assert_eq!(f.z(0.0), 1.0);
    assert_eq!(f.wbar(0.0), 0.0);
}

/// Driftless unit-variance case: `W(x) = sum_k 2^{k+1} q^k x^{2k+1} / (2k+1)!`.
#[test]
fn driftless_scale_function_matches_its_power_series() {
    let q = 0.5;
    let f = ScaleFamily::new(q, 0.0, 1.0).unwrap();
    let x: f64 = 1.0;
    let mut term = 2.0 * x;
    let mut series = term;
    for k in 1..40 {
        term *= 2.0 * q * x * x / ((2 * k) as f64 * (2 * k + 1) as f64);
        series += term;
    }
    assert_relative_eq!(f.w(x), series, epsilon = 1e-12);
}

#[test]
fn laplace_transform_of_w() {
    let f = ScaleFamily::new(1.1, -1.0, 0.3).unwrap();
    let theta = f.phi() + 1.0;
    let rule = GaussLegendre::new(32);
    let lt = integrate_panels(&|x| (f.ln_w(x) - theta * x).exp(), &graded_panels(0.0, 60.0, Some(1.0 / f.kappa), None), &rule);
    assert_relative_eq!(lt, 1.0 / (f.psi(theta) - f.q), max_relative = 1e-6);
}

#[test]
fn derivative_identities() {
    let f = ScaleFamily::new(1.1, -1.0, 0.3).unwrap();
    for x in [0.05, 0.3, 0.8] {
        let h = 1e-6;
        let dz = (f.z(x + h) - f.z(x - h)) / (2.0 * h);
        assert_relative_eq!(dz, f.q * f.w(x), max_relative = 1e-6);
        let dwbar = (f.wbar(x + h) - f.wbar(x - h)) / (2.0 * h);
        assert_relative_eq!(dwbar, f.w(x), max_relative = 1e-6);
        let dw = (f.w(x + h) - f.w(x - h)) / (2.0 * h);
        assert_relative_eq!(dw, f.w_prime(x), max_relative = 1e-6);
    }
}

#[test]
fn resolvent_vanishes_at_the_edges() {
    let f = ScaleFamily::new(1.1, -1.0, 0.3).unwrap();
    let (alpha, beta) = (0.5, 1.2);
    assert!(f.resolvent_u(0.9, beta - 1e-12, alpha, beta).abs() < 1e-9);
    assert!(f.resolvent_u(alpha + 1e-12, 0.8, alpha, beta).abs() < 1e-9);
}

/// Killing, exit below and exit above exhaust the mass: `q int u + xi + Omega = 1`.
#[test]
fn resolvent_mass_balance() {
    for (q, eta, sigma) in [(1.1, -1.0, 0.3), (0.4, 0.5, 1.0), (2.0, -0.2, 0.05)] {
        let f = ScaleFamily::new(q, eta, sigma).unwrap();
        let (alpha, beta) = (0.5, 1.2);
        let rule = GaussLegendre::new(32);
        for x in [0.6, 0.85, 1.15] {
            let layer = Some(1.0 / f.kappa);
            let mut panels = graded_panels(alpha, x, layer, layer);
            panels.extend(graded_panels(x, beta, layer, layer));
            let mass = integrate_panels(&|y| f.resolvent_u(x, y, alpha, beta), &panels, &rule);
            let total = q * mass + f.xi(x - alpha, beta - alpha) + f.omega(x - alpha, beta - alpha);
            assert!((total - 1.0).abs() < 1e-6, "q={q} eta={eta} sigma={sigma} x={x}: {total}");
        }
    }
}

#[test]
fn two_sided_exit_boundary_values() {
    let f = ScaleFamily::new(1.1, -1.0, 0.3).unwrap();
    let w = 0.4;
    assert_relative_eq!(f.xi(0.0, w), 1.0, epsilon = 1e-15);
    assert_relative_eq!(f.omega(w, w), 1.0, epsilon = 1e-15);
    assert!(f.xi(w, w).abs() < 1e-15 && f.omega(0.0, w) == 0.0);
}

#[test]
fn up_exit_tends_to_gamblers_ruin_without_killing() {
    let (eta, sigma, w) = (-0.4, 0.8, 1.5);
    let f = ScaleFamily::new(1e-12, eta, sigma).unwrap();
    let k = 2.0 * eta / (sigma * sigma);
    for z in [0.3, 0.9] {
        let classical = (1.0 - (-k * z).exp()) / (1.0 - (-k * w).exp());
        assert_relative_eq!(f.omega(z, w), classical, max_relative = 1e-9);
    }
}

#[test]
fn dividend_ratio_is_w_over_w_prime() {
    let f = ScaleFamily::new(1.1, -1.0, 0.3).unwrap();
    let (b, alpha) = (2.0, 2.0 / 1.5);
    assert_relative_eq!(f.eta_dividend(b, alpha), f.w(b - alpha) / f.w_prime(b - alpha), max_relative = 1e-12);
}

#[test]
fn heavy_discounting_kills_the_reflected_exit_transform() {
    let f = ScaleFamily::new(1e4, -1.0, 0.3).unwrap();
    assert!(f.reflected_exit_lt(1.5, 1.0, 2.0) < 1e-12);
}

#[test]
fn reflected_exit_matches_monte_carlo() {
    let f = ScaleFamily::new(0.5, -0.5, 0.6).unwrap();
    let cfg = MCConfig { paths: 20_000, seed: 41, euler_dt: 1e-4, ..MCConfig::default() };
    let est = simulate_reflected_exit(f.eta, f.sigma, f.q, 1.3, 1.0, 1.5, &cfg).unwrap();
    let exact = f.reflected_exit_lt(1.3, 1.0, 1.5);
    assert!((est.mean - exact).abs() < 3.0 * est.stderr + 0.01 * exact + est.censoring_bound, "{est:?} vs {exact}");
}

#[test]
fn two_sided_exit_matches_monte_carlo() {
    let f = ScaleFamily::new(0.8, -1.0, 0.5).unwrap();
    let cfg = MCConfig { paths: 20_000, seed: 43, euler_dt: 1e-4, ..MCConfig::default() };
    let (z, w) = (0.35, 0.6);
    let (down, up) = simulate_two_sided_exit(f.eta, f.sigma, f.q, z, w, &cfg).unwrap();
    for (est, exact) in [(down, f.xi(z, w)), (up, f.omega(z, w))] {
        assert!((est.mean - exact).abs() < 3.0 * est.stderr + 0.01 * exact + est.censoring_bound, "{est:?} vs {exact}");
    }
}

#[test]
fn family_base_cases_are_closed_forms() {
    let bp = standard();
    let lat = bp.lattice().unwrap();
    let fam = bp.family().unwrap();
    let table = CoeffTable::build(&lat, &fam).unwrap();
    for n in 1..=lat.n_levels {
        let w = lat.width(n);
        for frac in [0.0, 0.3, 1.0] {
            let z = frac * w;
            assert!((table.r[n][0].eval(z) - fam.xi(z, w)).abs() < 1e-12);
            assert!((table.omega[n][1].eval(z) - fam.omega(z, w)).abs() < 1e-12);
        }
    }
}

#[test]
fn family_recursion_matches_nested_quadrature() {
    let bp = standard();
    let lat = bp.lattice().unwrap();
    let fam = bp.family().unwrap();
    let table = CoeffTable::build(&lat, &fam).unwrap();
    let oracle = NestedQuadrature::new(&fam, &lat, 32);
    for n in 1..=3 {
        for frac in [0.2, 0.7] {
            let z = frac * lat.width(n);
            for k in 0..n.min(3) {
                assert!((table.r[n][k].eval(z) - oracle.eval(FamilyKind::Down, n, k, z)).abs() < 1e-6);
            }
            if n >= 2 {
                assert!((table.omega[n][2].eval(z) - oracle.eval(FamilyKind::Up, n, 2, z)).abs() < 1e-6);
            }
            assert!((table.t[n].eval(z) - oracle.eval(FamilyKind::JumpOut, n, 0, z)).abs() < 1e-6);
            assert!((table.vj[n].eval(z) - oracle.eval(FamilyKind::Overflow, n, 0, z)).abs() < 1e-6);
        }
    }
}

#[test]
fn reference_solution() {
    let sol = brownian::solve(&standard(), &BrownianControl::default()).unwrap();
    let want = [0.0, 0.69569, 0.89720, 0.96887, 1.0];
    for (got, want) in sol.rho.iter().zip(want) {
        assert!((got - want).abs() < 1e-5, "{:?}", sol.rho);
    }
    assert!((sol.v[0] - 0.70309).abs() < 1e-5);
    assert_eq!(sol.v[4], 0.0);
    assert!(sol.residual_rho < 1e-8 && sol.residual_v < 1e-8);
}

#[test]
fn evaluation_is_continuous_at_levels() {
    let bp = standard();
    let sol = brownian::solve(&bp, &BrownianControl::default()).unwrap();
    let lat = bp.lattice().unwrap();
    for n in 1..lat.n_levels {
        let x = lat.level(n) * (1.0 + 1e-10);
        assert!((sol.rho_eval(x).unwrap() - sol.rho[n]).abs() < 1e-7);
        assert!((sol.v_eval(x).unwrap() - sol.v[n]).abs() < 1e-7);
    }
    assert_relative_eq!(sol.v_eval(2.5).unwrap(), sol.v[0] + 0.5, epsilon = 1e-14);
}

#[test]
fn small_sigma_approaches_the_drift_only_lattice() {
    let lp = LatticeParams::new(2.0, 6, 1.0, 0.05, 0.5).unwrap();
    let bsol = brownian::solve(&BrownianParams::new(-1.0, 0.01, lp).unwrap(), &BrownianControl::default()).unwrap();
    let lsol = lattice::solve(&lp).unwrap();
    for n in 1..6 {
        assert!((bsol.rho[n] / lsol.rho[n] - 1.0).abs() < 0.02);
    }
}

#[test]
fn convenience_solvers_agree_with_solve() {
    let bp = standard();
    let ctl = BrownianControl::default();
    let sol = brownian::solve(&bp, &ctl).unwrap();
    assert_eq!(brownian::solve_brownian_rho(&bp, &ctl).unwrap(), sol.rho);
    assert_eq!(brownian::solve_brownian_v(&bp, &ctl).unwrap(), sol.v);
}

#[test]
fn invalid_parameters_are_rejected() {
    let lp = LatticeParams::new(2.0, 4, 1.0, 0.1, 0.5).unwrap();
    assert!(BrownianParams::new(-1.0, 0.0, lp).is_err());
    assert!(BrownianParams::new(f64::NAN, 0.3, lp).is_err());
    assert!(ScaleFamily::new(0.0, 0.0, 1.0).is_err());
}
