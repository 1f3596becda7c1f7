//! Proportional-gain lattice problems when the capital between jumps follows a
//! linear Brownian motion `X(t) = eta t + sigma B(t)` instead of unit decrease.

pub mod expsum;
pub mod families;
pub mod oracle;
pub mod scale;

pub use families::CoeffTable;
pub use scale::ScaleFamily;

use crate::linalg::{residual, solve_dense};
use crate::model::LatticeParams;
use crate::quadrature::{graded_panels, integrate_checked};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrownianParams {
    pub eta: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub q: f64,
    pub b: f64,
    pub n_levels: usize,
    pub a: f64,
}

impl BrownianParams {
    pub fn new(eta: f64, sigma: f64, lattice: LatticeParams) -> Result<Self> {
        let p = Self {
            eta,
            sigma,
            lambda: lattice.lambda,
            q: lattice.q,
            b: lattice.b,
            n_levels: lattice.n_levels,
            a: lattice.a,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParam(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if !self.eta.is_finite() {
            return Err(Error::InvalidParam("eta must be finite".into()));
        }
        self.lattice().map(|_| ())
    }

    pub fn lattice(&self) -> Result<LatticeParams> {
        LatticeParams::new(self.b, self.n_levels, self.lambda, self.q, self.a)
    }

    /// Scale family at the effective rate `q + lambda`.
    pub fn family(&self) -> Result<ScaleFamily> {
        ScaleFamily::new(self.q + self.lambda, self.eta, self.sigma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrownianControl {
    /// Gauss–Legendre nodes per panel (doubled for the convergence check).
    pub nodes: usize,
    pub rel_tol: f64,
}

impl Default for BrownianControl {
    fn default() -> Self {
        Self { nodes: 64, rel_tol: 1e-7 }
    }
}

/// `xi_n(u)`: discounted probability of a continuous exit through `L_n` before
/// a jump or an exit through `L_{n-1}`.
pub fn xi_n(u: f64, n: usize, family: &ScaleFamily, lattice: &LatticeParams) -> f64 {
    family.xi(u, lattice.width(n))
}

/// `omega_{n,n-1}` at offset `u` of interval `n`.
pub fn omega_first(u: f64, n: usize, family: &ScaleFamily, lattice: &LatticeParams) -> f64 {
    family.omega(u, lattice.width(n))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrownianSolution {
    pub params: BrownianParams,
    pub family: ScaleFamily,
    pub table: CoeffTable,
    /// `rho[0] = 0`, `rho[N] = 1`.
    pub rho: Vec<f64>,
    /// `v[N] = 0`.
    pub v: Vec<f64>,
    pub residual_rho: f64,
    pub residual_v: f64,
    pub condition_rho: f64,
    pub condition_v: f64,
}

/// One linear equation `value[row] - sum coef[j] value[j] = constant`, with the
/// `T` weight collected separately (it multiplies `v_0`).
#[derive(Debug, Clone)]
struct Row {
    coef: Vec<f64>,
    t: f64,
    constant: f64,
}

impl Row {
    fn new(n: usize) -> Self {
        Self { coef: vec![0.0; n + 1], t: 0.0, constant: 0.0 }
    }
}

struct Assembler<'a> {
    params: &'a BrownianParams,
    lattice: LatticeParams,
    family: &'a ScaleFamily,
    table: &'a CoeffTable,
    control: &'a BrownianControl,
}

impl Assembler<'_> {
    fn integrate(&self, f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
        let layer = 1.0 / self.family.kappa;
        let panels = graded_panels(lo, hi, Some(layer), Some(layer));
        integrate_checked(f, &panels, self.control.nodes, self.control.rel_tol, 1e-12)
    }

    /// Adds `int_lo^hi kernel(y) V_m(c (y - shift)) dy` to `row`, where `V_m` is
    /// the value representation on interval `m` (interval `0` is above `b`).
    fn add_jump_terms(
        &self,
        row: &mut Row,
        m: usize,
        kernel: &dyn Fn(f64) -> f64,
        (lo, hi, shift): (f64, f64, f64),
        with_v: bool,
    ) -> Result<()> {
        let c = 1.0 + self.params.a;
        let arg = |y: f64| c * (y - shift);
        if m == 0 {
            if with_v {
                row.t += self.integrate(kernel, lo, hi)?;
                row.constant += self.integrate(&|y| kernel(y) * arg(y), lo, hi)?;
            }
            return Ok(());
        }
        for (k, f) in self.table.r[m].iter().enumerate() {
            row.coef[m - k] += self.integrate(&|y| kernel(y) * f.eval(arg(y)), lo, hi)?;
        }
        for (k, f) in self.table.omega[m].iter().enumerate().skip(1) {
            row.coef[m - k] += self.integrate(&|y| kernel(y) * f.eval(arg(y)), lo, hi)?;
        }
        if with_v {
            let t = &self.table.t[m];
            row.t += self.integrate(&|y| kernel(y) * t.eval(arg(y)), lo, hi)?;
            let vj = &self.table.vj[m];
            row.constant += self.integrate(&|y| kernel(y) * vj.eval(arg(y)), lo, hi)?;
        }
        Ok(())
    }

    /// Equation at the lattice point `L_n`, `1 <= n < N`, obtained from the
    /// process started at `L_n` on `(L_{n+1}, L_{n-1})`.
    fn lattice_row(&self, n: usize, with_v: bool) -> Result<Row> {
        let big_n = self.lattice.n_levels;
        let s0 = self.lattice.width(n + 1);
        let width = s0 + self.lattice.width(n);
        let fam = self.family;
        let lambda = self.params.lambda;
        let kernel = |y: f64| lambda * fam.resolvent_local(s0, y, width);
        let mut row = Row::new(big_n);
        row.coef[n + 1] += fam.xi(s0, width);
        row.coef[n - 1] += fam.omega(s0, width);
        self.add_jump_terms(&mut row, n, &kernel, (0.0, s0, 0.0), with_v)?;
        self.add_jump_terms(&mut row, n - 1, &kernel, (s0, width, s0), with_v)?;
        Ok(row)
    }

    /// Equation for `v_0`: reflected at `b` until the first jump or a
    /// continuous passage below `L_1`.
    fn v0_row(&self) -> Result<Row> {
        let big_n = self.lattice.n_levels;
        let b = self.params.b;
        let l1 = self.lattice.level(1);
        let d1 = b - l1;
        let c = 1.0 + self.params.a;
        let fam = self.family;
        let lambda = self.params.lambda;
        let kernel = |y: f64| lambda * fam.reflected_resolvent_mu(b, l1 + y, l1, b);
        let mut row = Row::new(big_n);
        row.t += self.integrate(&kernel, 0.0, d1)?;
        row.constant += fam.eta_dividend(b, l1) + self.integrate(&|y| kernel(y) * c * y, 0.0, d1)?;
        row.coef[1] += fam.reflected_exit_lt(b, l1, b);
        Ok(row)
    }
}

/// Solve `A x = rhs` over the unknown lattice indices, with `known` values
/// substituted into the right-hand side.
fn solve_rows(
    rows: &[(usize, Row)],
    unknowns: &[usize],
    known: &[(usize, f64)],
) -> Result<(Vec<f64>, f64, f64)> {
    let col = |j: usize| unknowns.iter().position(|&u| u == j);
    let dim = unknowns.len();
    let mut a = vec![vec![0.0; dim]; dim];
    let mut rhs = vec![0.0; dim];
    for (i, (n, row)) in rows.iter().enumerate() {
        a[i][col(*n).expect("row index is an unknown")] += 1.0;
        rhs[i] = row.constant;
        for (j, &cf) in row.coef.iter().enumerate() {
            if cf == 0.0 {
                continue;
            }
            match col(j) {
                Some(c) => a[i][c] -= cf,
                None => {
                    let kv = known.iter().find(|(k, _)| *k == j).map(|(_, v)| *v).unwrap_or(0.0);
                    rhs[i] += cf * kv;
                }
            }
        }
        if row.t != 0.0 {
            match col(0) {
                Some(c) => a[i][c] -= row.t,
                None => {
                    let kv = known.iter().find(|(k, _)| *k == 0).map(|(_, v)| *v).unwrap_or(0.0);
                    rhs[i] += row.t * kv;
                }
            }
        }
    }
    let sol = solve_dense(&a, &rhs)?;
    let res = residual(&a, &sol.x, &rhs);
    Ok((sol.x, res, sol.condition_number))
}

/// Build the families and solve both lattice systems.
pub fn solve(params: &BrownianParams, control: &BrownianControl) -> Result<BrownianSolution> {
    params.validate()?;
    if control.nodes < 2 || !(control.rel_tol > 0.0) {
        return Err(Error::InvalidParam("quadrature control needs nodes >= 2 and rel_tol > 0".into()));
    }
    let lattice = params.lattice()?;
    let family = params.family()?;
    let table = CoeffTable::build(&lattice, &family)?;
    let asm = Assembler { params, lattice, family: &family, table: &table, control };
    let big_n = lattice.n_levels;

    let rho_rows = (1..big_n).map(|n| Ok((n, asm.lattice_row(n, false)?))).collect::<Result<Vec<_>>>()?;
    let rho_unknowns: Vec<usize> = (1..big_n).collect();
    let (x, residual_rho, condition_rho) = solve_rows(&rho_rows, &rho_unknowns, &[(0, 0.0), (big_n, 1.0)])?;
    let mut rho = vec![0.0; big_n + 1];
    rho[big_n] = 1.0;
    rho[1..big_n].copy_from_slice(&x);

    let mut v_rows = vec![(0, asm.v0_row()?)];
    for n in 1..big_n {
        v_rows.push((n, asm.lattice_row(n, true)?));
    }
    let v_unknowns: Vec<usize> = (0..big_n).collect();
    let (x, residual_v, condition_v) = solve_rows(&v_rows, &v_unknowns, &[(big_n, 0.0)])?;
    let mut v = vec![0.0; big_n + 1];
    v[..big_n].copy_from_slice(&x);

    Ok(BrownianSolution {
        params: *params,
        family,
        table,
        rho,
        v,
        residual_rho,
        residual_v,
        condition_rho,
        condition_v,
    })
}

/// `rho_0..rho_N` alone.
pub fn solve_brownian_rho(params: &BrownianParams, control: &BrownianControl) -> Result<Vec<f64>> {
    Ok(solve(params, control)?.rho)
}

/// `v_0..v_N` alone.
pub fn solve_brownian_v(params: &BrownianParams, control: &BrownianControl) -> Result<Vec<f64>> {
    Ok(solve(params, control)?.v)
}

impl BrownianSolution {
    fn locate(&self, x: f64) -> Result<(usize, f64)> {
        let lat = self.params.lattice()?;
        let n = lat
            .interval_of(x)
            .ok_or_else(|| Error::Domain(format!("x = {x} is outside (L_N, b] = ({}, {}]", lat.level(lat.n_levels), lat.b)))?;
        Ok((n, x - lat.level(n)))
    }

    /// Discounted probability of reaching `L_N` before `b` (first passage by a
    /// jump or continuously) started from `x`.
    pub fn rho_eval(&self, x: f64) -> Result<f64> {
        let (n, z) = self.locate(x)?;
        let (w, _, _) = self.table.weights(n, z);
        Ok(w.iter().zip(&self.rho).map(|(a, b)| a * b).sum())
    }

    /// Discounted dividends under the barrier `b`, killed at `L_N`. Above `b`
    /// the excess is paid immediately.
    pub fn v_eval(&self, x: f64) -> Result<f64> {
        if x > self.params.b {
            return Ok(self.v[0] + x - self.params.b);
        }
        let (n, z) = self.locate(x)?;
        let (w, t, vj) = self.table.weights(n, z);
        Ok(w.iter().zip(&self.v).map(|(a, b)| a * b).sum::<f64>() + t * self.v[0] + vj)
    }
}
