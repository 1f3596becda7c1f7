//! `compare`: analytic results against Monte-Carlo estimates and against
//! independent numerical references.
//!
//! Every check appends rows `(value, reference, tolerance)`; a row passes when
//! `|value - reference| <= tolerance`. For Monte-Carlo rows the tolerance is
//! `3 stderr + censoring bound + allowance * |reference|`.

use crate::commands::{lattice_points, numerical, simulate_with, transform};
use crate::output::{Cell, Table};
use crate::scenario::{CheckSpec, InterarrivalJson, Scenario};
use crate::CliError;
use dualgain::brownian::oracle::{FamilyKind, NestedQuadrature};
use dualgain::brownian::{self, CoeffTable};
use dualgain::inversion::ruin_probability;
use dualgain::lattice;
use dualgain::mc::{simulate_brownian_lattice, simulate_lattice, simulate_ruin, BrownianEstimates, LatticeEstimates, MCEstimate};
use dualgain::quadrature::{graded_panels, integrate_panels, GaussLegendre};
use dualgain::transforms::{classical_decay_rate, rouche_root};
use dualgain::Complex64;
use std::collections::BTreeMap;

pub const COLUMNS: [&str; 11] = [
    "check",
    "quantity",
    "x",
    "value",
    "reference",
    "abs_diff",
    "stderr",
    "allowance",
    "sigma_distance",
    "tolerance",
    "pass",
];

pub struct Report {
    pub table: Table,
    pub failures: usize,
}

impl Report {
    fn new() -> Self {
        Self { table: Table::new(&COLUMNS), failures: 0 }
    }

    fn det(&mut self, check: &str, quantity: &str, x: Option<f64>, value: f64, reference: f64, tol: f64) {
        let diff = (value - reference).abs();
        let pass = diff <= tol;
        if !pass {
            self.failures += 1;
        }
        self.table.push(vec![
            check.into(),
            quantity.into(),
            x.map_or(Cell::Empty, Cell::from),
            value.into(),
            reference.into(),
            diff.into(),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            tol.into(),
            pass.into(),
        ]);
    }

    /// Pass iff `value <= bound` (used for ordering checks).
    fn at_most(&mut self, check: &str, quantity: &str, x: Option<f64>, value: f64, bound: f64) {
        let pass = value <= bound;
        if !pass {
            self.failures += 1;
        }
        self.table.push(vec![
            check.into(),
            quantity.into(),
            x.map_or(Cell::Empty, Cell::from),
            value.into(),
            bound.into(),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            pass.into(),
        ]);
    }

    fn mc(&mut self, check: &str, quantity: &str, x: f64, analytic: f64, est: &MCEstimate, rel_allow: f64) {
        let diff = (analytic - est.mean).abs();
        let allowance = est.censoring_bound + rel_allow * est.mean.abs();
        let tol = 3.0 * est.stderr + allowance;
        let sigma = if est.stderr > 0.0 { (diff - allowance).max(0.0) / est.stderr } else { f64::NAN };
        let pass = diff <= tol;
        if !pass {
            self.failures += 1;
        }
        self.table.push(vec![
            check.into(),
            quantity.into(),
            x.into(),
            analytic.into(),
            est.mean.into(),
            diff.into(),
            est.stderr.into(),
            allowance.into(),
            sigma.into(),
            tol.into(),
            pass.into(),
        ]);
    }
}

fn default_s_grid() -> Vec<[f64; 2]> {
    let mut g: Vec<[f64; 2]> = (1..=10).map(|k| [0.25 + 0.3 * k as f64, 0.0]).collect();
    g.extend((1..=10).map(|k| [0.2 + 0.25 * k as f64, 0.6 * k as f64 - 3.0]));
    g
}

fn s_grid(spec: &CheckSpec, scn: &Scenario) -> Vec<Complex64> {
    let raw = if !spec.s.is_empty() {
        spec.s.clone()
    } else if !scn.outputs.s.is_empty() {
        scn.outputs.s.clone()
    } else {
        default_s_grid()
    };
    raw.iter().map(|s| Complex64::new(s[0], s[1])).collect()
}

fn xs(spec: &CheckSpec, scn: &Scenario) -> Vec<f64> {
    if spec.x.is_empty() {
        scn.x_points()
    } else {
        spec.x.clone()
    }
}

fn tol(spec: &CheckSpec, default: f64) -> f64 {
    spec.tolerance.unwrap_or(default)
}

fn f64_key(x: f64) -> u64 {
    x.to_bits()
}

#[derive(Default)]
struct McCache {
    lattice: BTreeMap<u64, LatticeEstimates>,
    brownian: BTreeMap<u64, BrownianEstimates>,
}

pub fn compare(scn: &Scenario) -> Result<Report, CliError> {
    let mut rep = Report::new();
    let mut cache = McCache::default();
    if scn.outputs.checks.is_empty() {
        return Err(CliError::Schema("outputs.checks: compare needs at least one check".into()));
    }
    for spec in &scn.outputs.checks {
        run_check(scn, spec, &mut rep, &mut cache)?;
    }
    Ok(rep)
}

fn run_check(scn: &Scenario, spec: &CheckSpec, rep: &mut Report, cache: &mut McCache) -> Result<(), CliError> {
    let name = spec.check.as_str();
    let cfg = scn.mc()?;
    match name {
        "functional_residuals" => {
            let rt = transform(scn)?;
            let alpha = scn.outputs.alpha;
            for s in s_grid(spec, scn) {
                let r = rt.functional_residual(s).map_err(numerical)?;
                rep.det(name, &format!("rho s={s}"), None, r, 0.0, tol(spec, 1e-10));
                let r = rt.time_functional_residual(s, alpha).map_err(numerical)?;
                rep.det(name, &format!("tau alpha={alpha} s={s}"), None, r, 0.0, tol(spec, 1e-10));
            }
        }
        "removable_singularity" => {
            let rt = transform(scn)?;
            let p = scn.model()?;
            let mu = p.mu().ok_or_else(|| CliError::Schema("removable_singularity needs an additive gain".into()))?;
            let s_star = mu * (1.0 + p.a);
            let at = |s: f64| rt.ruin_lt(Complex64::new(s, 0.0)).map(|z| z.re).map_err(numerical);
            let (lo, hi, mid) = (at(s_star * (1.0 - 1e-4))?, at(s_star * (1.0 + 1e-4))?, at(s_star)?);
            rep.det(name, "guarded vs mean of rho(s*(1 +- 1e-4))", Some(s_star), mid, 0.5 * (lo + hi), tol(spec, 1e-6));
        }
        "tau_consistency" => {
            let rt = transform(scn)?;
            for s in s_grid(spec, scn) {
                let a = rt.ruin_time_lt(s, 0.0).map_err(numerical)?;
                let b = rt.ruin_lt(s).map_err(numerical)?;
                rep.det(name, &format!("s={s}"), None, (a - b).norm(), 0.0, tol(spec, 1e-12));
            }
        }
        "mixture_reduction" => {
            let rt = transform(scn)?;
            for s in s_grid(spec, scn) {
                let a = rt.generalized_ruin_lt(s).map_err(numerical)?;
                let b = rt.ruin_lt(s).map_err(numerical)?;
                rep.det(name, &format!("s={s}"), None, (a - b).norm(), 0.0, tol(spec, 1e-10));
            }
        }
        "rouche_residual" => {
            let p = scn.model()?;
            let s1 = rouche_root(&p).map_err(numerical)?;
            let delta = p.delta.unwrap_or(f64::NAN);
            let phi = p.interarrival.lst(Complex64::new(s1, 0.0)).map_err(numerical)?.re;
            let g = delta - s1 - (1.0 - p.mixture_p) * delta * phi;
            rep.det(name, "delta - s1 - (1-p) delta phi(s1)", Some(s1), g, 0.0, tol(spec, 1e-10));
        }
        "analyticity" => {
            let rt = transform(scn)?;
            let r = rt.analyticity_residual().map_err(numerical)?;
            let s1 = rt.mixture_constants().map_or(f64::NAN, |m| m.s1);
            rep.det(name, "bracket at s1", Some(s1), r, 0.0, tol(spec, 1e-9));
        }
        "ruin_prob_mc" | "ruin_time_mc" => {
            let rt = transform(scn)?;
            let params = scn.model()?;
            let ctl = scn.inversion()?;
            let alpha = if name == "ruin_prob_mc" { 0.0 } else { scn.outputs.alpha };
            for x in xs(spec, scn) {
                let analytic = if alpha == 0.0 {
                    ruin_probability(x, &rt, &ctl)
                } else {
                    dualgain::inversion::ruin_time_transform(x, alpha, &rt, &ctl)
                }
                .map_err(numerical)?
                .value;
                let est = simulate_ruin(&params, x, alpha, &cfg).map_err(numerical)?;
                rep.mc(name, if alpha == 0.0 { "R(x)" } else { "E[exp(-alpha tau)]" }, x, analytic, &est, spec.allowance.unwrap_or(0.0));
            }
        }
        "certain_ruin" => {
            let rt = transform(scn)?;
            let ctl = scn.inversion()?;
            for x in xs(spec, scn) {
                let r = ruin_probability(x, &rt, &ctl).map_err(numerical)?.value;
                rep.det(name, "R(x)", Some(x), r, 1.0, tol(spec, 1e-3));
            }
        }
        "classical_closed_form" | "classical_mc" => {
            let params = scn.model()?;
            let lambda = match scn.model.as_ref().map(|m| &m.interarrival) {
                Some(InterarrivalJson::Exponential { rate }) => *rate,
                _ => return Err(CliError::Schema("classical checks need exponential interarrivals".into())),
            };
            let mu = params.mu().ok_or_else(|| CliError::Schema("classical checks need an additive gain".into()))?;
            if params.a != 0.0 {
                return Err(CliError::Schema("classical checks need a = 0".into()));
            }
            let zeta = classical_decay_rate(lambda, mu).map_err(numerical)?;
            if name == "classical_closed_form" {
                let rt = transform(scn)?;
                let ctl = scn.inversion()?;
                for x in xs(spec, scn) {
                    let r = ruin_probability(x, &rt, &ctl).map_err(numerical)?.value;
                    rep.det(name, "R(x) vs exp(-zeta x)", Some(x), r, (-zeta * x).exp(), tol(spec, 1e-4));
                }
            } else {
                for x in xs(spec, scn) {
                    let est = simulate_ruin(&params, x, 0.0, &cfg).map_err(numerical)?;
                    rep.mc(name, "exp(-zeta x) vs MC", x, (-zeta * x).exp(), &est, spec.allowance.unwrap_or(0.0));
                }
            }
        }
        "lattice_complementarity" => {
            let lat = scn.lattice()?;
            if lat.q != 0.0 {
                return Err(CliError::Schema("lattice_complementarity needs lattice.q = 0".into()));
            }
            let sol = lattice::solve_exit(&lat).map_err(numerical)?;
            for n in 0..=lat.n_levels {
                rep.det(name, &format!("rho_{n} + mu_{n}"), Some(lat.level(n)), sol.rho[n] + sol.mu[n], 1.0, tol(spec, 1e-8));
            }
        }
        "lattice_mc" => {
            let lat = scn.lattice()?;
            let sol = lattice::solve(&lat).map_err(numerical)?;
            let quantity = spec.quantity.as_deref().unwrap_or("rho");
            for (n, x) in lattice_points(scn, &spec.levels, &spec.x)? {
                let est = match cache.lattice.get(&f64_key(x)) {
                    Some(e) => *e,
                    None => {
                        let e = simulate_lattice(&lat, x, &cfg).map_err(numerical)?;
                        cache.lattice.insert(f64_key(x), e);
                        e
                    }
                };
                let (analytic, e) = match quantity {
                    "rho" => (n.map_or_else(|| sol.rho_eval(x), |n| Ok(sol.rho[n])).map_err(numerical)?, est.rho),
                    "mu" => (n.map_or_else(|| sol.mu_eval(x), |n| Ok(sol.mu[n])).map_err(numerical)?, est.mu),
                    "v" => (n.map_or_else(|| sol.v_eval(x), |n| Ok(sol.v[n])).map_err(numerical)?, est.v),
                    other => return Err(CliError::Schema(format!("lattice_mc: unknown quantity `{other}`"))),
                };
                rep.mc(name, &label(quantity, n), x, analytic, &e, spec.allowance.unwrap_or(0.0));
            }
        }
        "dividend_boundary" => {
            let lat = scn.lattice()?;
            let sol = lattice::solve(&lat).map_err(numerical)?;
            rep.det(name, "v_N", Some(lat.level(lat.n_levels)), sol.v[lat.n_levels], 0.0, 0.0);
        }
        "dividend_residuals" => {
            let lat = scn.lattice()?;
            let sol = lattice::solve(&lat).map_err(numerical)?;
            rep.det(name, "max row residual of the v system", None, sol.residual_v, 0.0, tol(spec, 1e-10));
        }
        "dividend_monotone" => {
            let sweep = if spec.n_sweep.is_empty() { scn.outputs.n_sweep.clone() } else { spec.n_sweep.clone() };
            if sweep.len() < 2 {
                return Err(CliError::Schema("dividend_monotone: n_sweep needs at least two sizes".into()));
            }
            let sols = sweep
                .iter()
                .map(|&n| lattice::solve(&scn.lattice_with(n)?).map_err(numerical))
                .collect::<Result<Vec<_>, _>>()?;
            for x in xs(spec, scn) {
                let vals: Vec<f64> = sols.iter().map(|s| s.v_extended(x)).collect();
                for w in 1..vals.len() {
                    rep.at_most(name, &format!("v_{}(x) - v_{}(x)", sweep[w - 1], sweep[w]), Some(x), vals[w - 1] - vals[w], 0.0);
                }
                let last = vals[vals.len() - 1];
                let prev = vals[vals.len() - 2];
                let rel = if last > 0.0 { (last - prev) / last } else { 0.0 };
                rep.at_most(name, "final relative increment", Some(x), rel, tol(spec, 0.01));
            }
        }
        "delay_ode" => {
            let sweep = if spec.n_sweep.is_empty() { scn.outputs.n_sweep.clone() } else { spec.n_sweep.clone() };
            if sweep.len() < 2 {
                return Err(CliError::Schema("delay_ode: n_sweep needs at least two sizes".into()));
            }
            let v_b = lattice::solve(&scn.lattice_with(256)?).map_err(numerical)?.v[0];
            let mut prev: Option<(f64, f64)> = None;
            for &n in &sweep {
                let sol = lattice::solve(&scn.lattice_with(n)?).map_err(numerical)?;
                let (up, low) = lattice::delay_ode_residuals(&sol, v_b, 400);
                if let Some((pu, pl)) = prev {
                    rep.at_most(name, &format!("upper residual N={n} below previous"), None, up, pu);
                    rep.at_most(name, &format!("lower residual N={n} below previous"), None, low, pl);
                } else {
                    rep.at_most(name, &format!("upper residual N={n}"), None, up, f64::INFINITY);
                    rep.at_most(name, &format!("lower residual N={n}"), None, low, f64::INFINITY);
                }
                prev = Some((up, low));
            }
        }
        "scale_functions" => scale_checks(scn, spec, rep)?,
        "family_quadrature" => family_checks(scn, spec, rep)?,
        "brownian_mc" => {
            let bp = scn.brownian()?;
            let sol = brownian::solve(&bp, &scn.quadrature()).map_err(numerical)?;
            let quantity = spec.quantity.as_deref().unwrap_or("rho");
            for (n, x) in lattice_points(scn, &spec.levels, &spec.x)? {
                let est = match cache.brownian.get(&f64_key(x)) {
                    Some(e) => *e,
                    None => {
                        let e = simulate_brownian_lattice(&bp, x, &cfg).map_err(numerical)?;
                        cache.brownian.insert(f64_key(x), e);
                        e
                    }
                };
                let (analytic, e) = match quantity {
                    "rho" => (n.map_or_else(|| sol.rho_eval(x), |n| Ok(sol.rho[n])).map_err(numerical)?, est.rho),
                    "v" => (n.map_or_else(|| sol.v_eval(x), |n| Ok(sol.v[n])).map_err(numerical)?, est.v),
                    other => return Err(CliError::Schema(format!("brownian_mc: unknown quantity `{other}`"))),
                };
                rep.mc(name, &label(quantity, n), x, analytic, &e, spec.allowance.unwrap_or(0.0));
            }
        }
        "brownian_degeneracy" => {
            let bp = scn.brownian()?;
            let bsol = brownian::solve(&bp, &scn.quadrature()).map_err(numerical)?;
            let lsol = lattice::solve(&scn.lattice()?).map_err(numerical)?;
            let t = tol(spec, 0.02);
            for n in 1..bp.n_levels {
                let rel = (bsol.rho[n] - lsol.rho[n]).abs() / lsol.rho[n].abs();
                rep.at_most(name, &format!("relative gap rho_{n} (sigma={})", bp.sigma), None, rel, t);
            }
        }
        "reproducibility" => {
            let mut one = cfg;
            one.threads = 1;
            let mut eight = cfg;
            eight.threads = 8;
            let a = simulate_with(scn, &one)?.body();
            let b = simulate_with(scn, &eight)?.body();
            let differing = a.bytes().zip(b.bytes()).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len());
            rep.det(name, "differing bytes, 1 vs 8 threads", None, differing as f64, 0.0, 0.0);
        }
        other => return Err(CliError::Schema(format!("outputs.checks: unknown check `{other}`"))),
    }
    Ok(())
}

fn label(quantity: &str, n: Option<usize>) -> String {
    match n {
        Some(n) => format!("{quantity}_{n}"),
        None => format!("{quantity}(x)"),
    }
}

fn scale_checks(scn: &Scenario, spec: &CheckSpec, rep: &mut Report) -> Result<(), CliError> {
    let name = "scale_functions";
    let fam = scn.brownian()?.family().map_err(numerical)?;
    rep.det(name, "W(0)", Some(0.0), fam.w(0.0), 0.0, 0.0);
    rep.det(name, "Z(0)", Some(0.0), fam.z(0.0), 1.0, 0.0);
    let theta = fam.phi() + 1.0;
    let upper = 60.0 / (theta - fam.phi());
    let rule = GaussLegendre::new(32);
    let lt = integrate_panels(&|x| (fam.ln_w(x) - theta * x).exp(), &graded_panels(0.0, upper, Some(1.0 / fam.kappa), None), &rule);
    rep.det(name, "int e^{-theta x} W(x) dx vs 1/(psi(theta)-q)", None, lt, 1.0 / (fam.psi(theta) - fam.q), tol(spec, 1e-6));
    let xs = if spec.x.is_empty() { vec![0.05, 0.2, 0.5] } else { spec.x.clone() };
    for x in xs {
        let h = 1e-5 * x.max(1e-3);
        let dz = (fam.z(x + h) - fam.z(x - h)) / (2.0 * h);
        let target = fam.q * fam.w(x);
        let scale = target.abs().max(1.0);
        rep.det(name, "Z'(x) vs q W(x) (relative)", Some(x), dz / scale, target / scale, tol(spec, 1e-6));
        let dwb = (fam.wbar(x + h) - fam.wbar(x - h)) / (2.0 * h);
        let w = fam.w(x);
        let scale = w.abs().max(1.0);
        rep.det(name, "Wbar'(x) vs W(x) (relative)", Some(x), dwb / scale, w / scale, tol(spec, 1e-6));
    }
    Ok(())
}

fn family_checks(scn: &Scenario, spec: &CheckSpec, rep: &mut Report) -> Result<(), CliError> {
    let name = "family_quadrature";
    let bp = scn.brownian()?;
    let lat = bp.lattice().map_err(numerical)?;
    if lat.n_levels < 3 {
        return Err(CliError::Schema("family_quadrature needs lattice.n_levels >= 3".into()));
    }
    let fam = bp.family().map_err(numerical)?;
    let table = CoeffTable::build(&lat, &fam).map_err(numerical)?;
    let oracle = NestedQuadrature::new(&fam, &lat, 32);
    let cases = [
        (FamilyKind::Down, 2, 0),
        (FamilyKind::Down, 2, 1),
        (FamilyKind::Down, 3, 1),
        (FamilyKind::Down, 3, 2),
        (FamilyKind::Up, 2, 1),
        (FamilyKind::Up, 2, 2),
        (FamilyKind::Up, 3, 1),
        (FamilyKind::Up, 3, 2),
        (FamilyKind::JumpOut, 1, 0),
        (FamilyKind::JumpOut, 2, 0),
        (FamilyKind::Overflow, 1, 0),
        (FamilyKind::Overflow, 2, 0),
    ];
    for (kind, n, k) in cases {
        let label = match kind {
            FamilyKind::Down => format!("r[{n}][{k}]"),
            FamilyKind::Up => format!("omega[{n}][{k}]"),
            FamilyKind::JumpOut => format!("T[{n}]"),
            FamilyKind::Overflow => format!("vJ[{n}]"),
        };
        for frac in [0.1, 0.5, 0.9] {
            let z = frac * lat.width(n);
            let rec = match kind {
                FamilyKind::Down => table.r[n][k].eval(z),
                FamilyKind::Up => table.omega[n][k].eval(z),
                FamilyKind::JumpOut => table.t[n].eval(z),
                FamilyKind::Overflow => table.vj[n].eval(z),
            };
            let reference = oracle.eval(kind, n, k, z);
            rep.det(name, &label, Some(lat.level(n) + z), rec, reference, tol(spec, 1e-6));
        }
    }
    Ok(())
}
