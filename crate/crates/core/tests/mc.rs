use dualgain::inversion::{ruin_probability, InversionControl};
use dualgain::lattice;
use dualgain::mc::{pairwise_sum, simulate_lattice, simulate_ruin, MCConfig};
use dualgain::model::{DualModelParams, InterarrivalSpec, LatticeParams};
use dualgain::transforms::{RuinTransform, SeriesControl};

fn cfg(paths: usize, seed: u64) -> MCConfig {
    MCConfig { paths, seed, ..MCConfig::default() }
}

#[test]
fn ruin_before_the_first_gain_is_exact() {
    let p = DualModelParams::new(0.5, 1.0, InterarrivalSpec::deterministic(3.0).unwrap()).unwrap();
    let est = simulate_ruin(&p, 2.0, 0.7, &cfg(2000, 1)).unwrap();
    assert!((est.mean / (-0.7f64 * 2.0).exp() - 1.0).abs() < 1e-15);
    assert!(est.stderr < 1e-15);
    assert_eq!(est.n_censored, 0);
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let p = DualModelParams::new(0.5, 1.0, InterarrivalSpec::exponential(1.0).unwrap()).unwrap();
    let one = simulate_ruin(&p, 1.0, 0.0, &MCConfig { threads: 1, ..cfg(20_000, 7) }).unwrap();
    let many = simulate_ruin(&p, 1.0, 0.0, &MCConfig { threads: 8, ..cfg(20_000, 7) }).unwrap();
    assert_eq!(one, many);
}

#[test]
fn different_seeds_agree_statistically() {
    let p = DualModelParams::new(0.5, 1.0, InterarrivalSpec::exponential(1.0).unwrap()).unwrap();
    let a = simulate_ruin(&p, 1.0, 0.0, &cfg(20_000, 11)).unwrap();
    let b = simulate_ruin(&p, 1.0, 0.0, &cfg(20_000, 12)).unwrap();
    assert_ne!(a.mean, b.mean);
    let combined = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    assert!((a.mean - b.mean).abs() < 6.0 * combined);
}

#[test]
fn lattice_at_the_barrier_exits_upward_at_once() {
    let lp = LatticeParams::new(2.0, 6, 1.0, 0.05, 0.5).unwrap();
    let est = simulate_lattice(&lp, 2.0, &cfg(2000, 3)).unwrap();
    assert_eq!(est.mu.mean, 1.0);
    assert_eq!(est.rho.mean, 0.0);
}

#[test]
fn undiscounted_lattice_exits_are_complementary() {
    let lp = LatticeParams::new(2.0, 6, 1.0, 0.0, 0.5).unwrap();
    let est = simulate_lattice(&lp, 1.1, &cfg(20_000, 5)).unwrap();
    assert!((est.rho.mean + est.mu.mean - 1.0).abs() < 1e-12);
    let exact = lattice::solve_exit(&lp).unwrap().rho_eval(1.1).unwrap();
    assert!(est.rho.sigma_distance(exact) < 4.0, "{:?} vs {exact}", est.rho);
}

#[test]
fn ruin_is_certain_without_proportional_growth_under_negative_drift() {
    let p = DualModelParams::new(0.0, 2.0, InterarrivalSpec::exponential(1.0).unwrap()).unwrap();
    let est = simulate_ruin(&p, 1.0, 0.0, &cfg(5000, 9)).unwrap();
    assert_eq!(est.mean, 1.0);
    assert_eq!(est.n_censored, 0);
}

#[test]
fn mixture_ruin_probability_matches_inversion() {
    let p = DualModelParams::new(0.5, 1.0, InterarrivalSpec::exponential(1.0).unwrap())
        .unwrap()
        .with_mixture(0.5, 2.0)
        .unwrap();
    let rt = RuinTransform::new(p.clone(), SeriesControl::default()).unwrap();
    let exact = ruin_probability(1.0, &rt, &InversionControl::default()).unwrap().value;
    let est = simulate_ruin(&p, 1.0, 0.0, &cfg(100_000, 17)).unwrap();
    assert!(est.sigma_distance(exact) < 4.0, "{est:?} vs {exact}");
}

#[test]
fn pairwise_sum_is_exact_on_representable_sums() {
    let v: Vec<f64> = (1..=1000).map(f64::from).collect();
    assert_eq!(pairwise_sum(&v), 500_500.0);
    assert_eq!(pairwise_sum(&[]), 0.0);
    let small = vec![0.1; 1 << 20];
    assert!((pairwise_sum(&small) - 0.1 * (1 << 20) as f64).abs() < 1e-9);
}

#[test]
fn configuration_is_validated() {
    assert!(MCConfig { paths: 10, ..MCConfig::default() }.validate().is_err());
    assert!(MCConfig { euler_dt: 0.0, ..MCConfig::default() }.validate().is_err());
    assert!(MCConfig { escape_factor: 1.0, ..MCConfig::default() }.validate().is_err());
    assert!(MCConfig::default().validate().is_ok());
    let p = DualModelParams::new(0.5, 1.0, InterarrivalSpec::exponential(1.0).unwrap()).unwrap();
    assert!(simulate_ruin(&p, -1.0, 0.0, &cfg(2000, 1)).is_err());
    assert!(simulate_ruin(&p, 1.0, -0.1, &cfg(2000, 1)).is_err());
}
