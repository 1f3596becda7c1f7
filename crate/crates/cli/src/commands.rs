//! Analytic and Monte-Carlo subcommands.

use crate::output::{Cell, Table};
use crate::scenario::Scenario;
use crate::CliError;
use dualgain::inversion::{ruin_probability, ruin_time_transform, Inversion, InversionFlag};
use dualgain::mc::{simulate_brownian_lattice, simulate_lattice, simulate_ruin, MCConfig, MCEstimate};
use dualgain::transforms::RuinTransform;
use dualgain::{brownian, lattice, Complex64};

pub(crate) fn numerical(e: dualgain::Error) -> CliError {
    match e {
        dualgain::Error::InvalidParam(m) => CliError::Schema(m),
        other => CliError::Numerical(other.to_string()),
    }
}

pub fn transform(scn: &Scenario) -> Result<RuinTransform, CliError> {
    RuinTransform::new(scn.model()?, scn.series()?).map_err(numerical)
}

fn flags_text(inv: &Inversion) -> String {
    inv.flags
        .iter()
        .map(|f| match f {
            InversionFlag::MethodDisagreement { euler, talbot } => format!("disagreement(euler={euler:e};talbot={talbot:e})"),
            InversionFlag::CrossCheckUnavailable(_) => "no_cross_check".to_string(),
            InversionFlag::Clamped { raw } => format!("clamped({raw:e})"),
        })
        .collect::<Vec<_>>()
        .join("|")
}

/// Lattice points named in `outputs.levels` followed by the plain `x` points.
pub fn lattice_points(scn: &Scenario, levels: &[usize], xs: &[f64]) -> Result<Vec<(Option<usize>, f64)>, CliError> {
    let lat = scn.lattice()?;
    let mut pts = vec![];
    for &n in levels {
        if n > lat.n_levels {
            return Err(CliError::Schema(format!("levels: index {n} exceeds N = {}", lat.n_levels)));
        }
        pts.push((Some(n), lat.level(n)));
    }
    pts.extend(xs.iter().map(|&x| (None, x)));
    Ok(pts)
}

fn index_cell(n: Option<usize>) -> Cell {
    n.map_or(Cell::Empty, Cell::from)
}

pub fn ruin_lt(scn: &Scenario) -> Result<Table, CliError> {
    let rt = transform(scn)?;
    let mut t = Table::new(&["s_re", "s_im", "rho_re", "rho_im", "terms", "tail_bound"]);
    for s in &scn.outputs.s {
        let ev = rt.ruin_lt_eval(Complex64::new(s[0], s[1])).map_err(numerical)?;
        t.push(vec![s[0].into(), s[1].into(), ev.value.re.into(), ev.value.im.into(), ev.terms.into(), ev.tail_bound.into()]);
    }
    Ok(t)
}

pub fn ruin_prob(scn: &Scenario) -> Result<Table, CliError> {
    if scn.lattice.is_some() {
        scn.lattice()?;
    }
    let rt = transform(scn)?;
    let ctl = scn.inversion()?;
    let mut t = Table::new(&["x", "value", "error_estimate", "flags"]);
    for x in scn.x_points() {
        let inv = ruin_probability(x, &rt, &ctl).map_err(numerical)?;
        t.push(vec![x.into(), inv.value.into(), inv.error_estimate.into(), flags_text(&inv).into()]);
    }
    Ok(t)
}

pub fn ruin_time(scn: &Scenario) -> Result<Table, CliError> {
    let rt = transform(scn)?;
    let ctl = scn.inversion()?;
    let alpha = scn.outputs.alpha;
    let mut t = Table::new(&["x", "alpha", "value", "error_estimate", "flags"]);
    for x in scn.x_points() {
        let inv = ruin_time_transform(x, alpha, &rt, &ctl).map_err(numerical)?;
        t.push(vec![x.into(), alpha.into(), inv.value.into(), inv.error_estimate.into(), flags_text(&inv).into()]);
    }
    Ok(t)
}

const LONG: [&str; 4] = ["quantity", "index", "x", "value"];

pub fn exit(scn: &Scenario) -> Result<Table, CliError> {
    let lat = scn.lattice()?;
    let sol = lattice::solve_exit(&lat).map_err(numerical)?;
    let mut t = Table::new(&LONG);
    for n in 0..=lat.n_levels {
        t.push(vec!["rho_n".into(), n.into(), lat.level(n).into(), sol.rho[n].into()]);
    }
    for n in 0..=lat.n_levels {
        t.push(vec!["mu_n".into(), n.into(), lat.level(n).into(), sol.mu[n].into()]);
    }
    for x in scn.x_points() {
        t.push(vec!["rho_x".into(), Cell::Empty, x.into(), sol.rho_eval(x).map_err(numerical)?.into()]);
        t.push(vec!["mu_x".into(), Cell::Empty, x.into(), sol.mu_eval(x).map_err(numerical)?.into()]);
    }
    Ok(t)
}

pub fn dividends(scn: &Scenario) -> Result<Table, CliError> {
    let lat = scn.lattice()?;
    let sol = lattice::solve(&lat).map_err(numerical)?;
    let mut t = Table::new(&LONG);
    for n in 0..=lat.n_levels {
        t.push(vec!["v_n".into(), n.into(), lat.level(n).into(), sol.v[n].into()]);
    }
    for x in scn.x_points() {
        t.push(vec!["v_x".into(), Cell::Empty, x.into(), sol.v_extended(x).into()]);
    }
    for &n in &scn.outputs.n_sweep {
        let s = lattice::solve(&scn.lattice_with(n)?).map_err(numerical)?;
        for x in scn.x_points() {
            t.push(vec!["v_x_by_N".into(), n.into(), x.into(), s.v_extended(x).into()]);
        }
    }
    Ok(t)
}

pub fn brownian(scn: &Scenario) -> Result<Table, CliError> {
    let bp = scn.brownian()?;
    let sol = brownian::solve(&bp, &scn.quadrature()).map_err(numerical)?;
    let lat = scn.lattice()?;
    let mut t = Table::new(&LONG);
    for n in 0..=lat.n_levels {
        t.push(vec!["rho_n".into(), n.into(), lat.level(n).into(), sol.rho[n].into()]);
    }
    for n in 0..=lat.n_levels {
        t.push(vec!["v_n".into(), n.into(), lat.level(n).into(), sol.v[n].into()]);
    }
    for x in scn.x_points() {
        t.push(vec!["rho_x".into(), Cell::Empty, x.into(), sol.rho_eval(x).map_err(numerical)?.into()]);
        t.push(vec!["v_x".into(), Cell::Empty, x.into(), sol.v_eval(x).map_err(numerical)?.into()]);
    }
    Ok(t)
}

fn estimate_row(t: &mut Table, quantity: &str, index: Option<usize>, x: f64, e: &MCEstimate) {
    t.push(vec![
        quantity.into(),
        index_cell(index),
        x.into(),
        e.mean.into(),
        e.stderr.into(),
        e.n_paths.into(),
        e.n_censored.into(),
        e.censoring_bound.into(),
    ]);
}

pub const SIMULATE_COLUMNS: [&str; 8] =
    ["quantity", "index", "x", "mean", "stderr", "n_paths", "n_censored", "censoring_bound"];

pub fn simulate_with(scn: &Scenario, cfg: &MCConfig) -> Result<Table, CliError> {
    let mut t = Table::new(&SIMULATE_COLUMNS);
    for q in &scn.outputs.quantities {
        match q.as_str() {
            "ruin_prob" | "ruin_time" => {
                let params = scn.model()?;
                let alpha = if q == "ruin_prob" { 0.0 } else { scn.outputs.alpha };
                for x in scn.x_points() {
                    let e = simulate_ruin(&params, x, alpha, cfg).map_err(numerical)?;
                    estimate_row(&mut t, q, None, x, &e);
                }
            }
            "lattice" => {
                let lat = scn.lattice()?;
                for (n, x) in lattice_points(scn, &scn.outputs.levels, &scn.x_points())? {
                    let e = simulate_lattice(&lat, x, cfg).map_err(numerical)?;
                    estimate_row(&mut t, "lattice_rho", n, x, &e.rho);
                    estimate_row(&mut t, "lattice_mu", n, x, &e.mu);
                    estimate_row(&mut t, "lattice_v", n, x, &e.v);
                }
            }
            "brownian" => {
                let bp = scn.brownian()?;
                for (n, x) in lattice_points(scn, &scn.outputs.levels, &scn.x_points())? {
                    let e = simulate_brownian_lattice(&bp, x, cfg).map_err(numerical)?;
                    estimate_row(&mut t, "brownian_rho", n, x, &e.rho);
                    estimate_row(&mut t, "brownian_v", n, x, &e.v);
                }
            }
            other => {
                return Err(CliError::Schema(format!(
                    "outputs.quantities: unknown quantity `{other}` (expected ruin_prob, ruin_time, lattice, brownian)"
                )))
            }
        }
    }
    Ok(t)
}

pub fn simulate(scn: &Scenario) -> Result<Table, CliError> {
    simulate_with(scn, &scn.mc()?)
}
