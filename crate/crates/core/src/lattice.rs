//! Exit transforms and barrier dividends on the level lattice `L_n = b / (1 + a)^n`
//! for pure proportional gains (`C = 0`) at Poisson rate `lambda`.
//!
//! Between gains the capital decreases at unit rate, and a gain maps the
//! interval `(L_{n+1}, L_n)` onto `(L_n, L_{n-1})`. Writing `u = x - L_n` for
//! `x` in `(L_n, L_{n-1}]`, each quantity is a combination of the lattice values
//! with coefficients built from the exponential chain
//!
//! ```text
//! gamma_n = Gbar_{(1+a)^n} * g_{(1+a)^{n-1}} * ... * g_1,
//! g_c(t)  = lambda c exp(-(lambda + q) c t),   Gbar_c(t) = exp(-(lambda + q) c t).
//! ```
//!
//! Substituting `x = L_{n-1}` yields the linear systems for the lattice values.

use crate::linalg::{residual, solve_dense};
use crate::model::LatticeParams;
use crate::{Error, Result};

/// Closed forms are used up to this chain length; longer chains use the grid.
pub const DEFAULT_N_SWITCH: usize = 15;
const GRID_INTERVALS: usize = 512;

/// Chain coefficients for one `(lambda, q, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpConvolutionBasis {
    pub lambda: f64,
    pub q: f64,
    pub a: f64,
    /// `r_i = (lambda + q)(1 + a)^i`.
    pub rates: Vec<f64>,
    pub n_switch: usize,
}

/// Which evaluation route produced a chain value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainRoute {
    ClosedForm,
    Grid,
    /// Below `1e-300` by an a-priori bound.
    Negligible,
}

impl ExpConvolutionBasis {
    pub fn new(lambda: f64, q: f64, a: f64) -> Result<Self> {
        if !(lambda > 0.0 && q >= 0.0 && a > 0.0) {
            return Err(Error::InvalidParam("basis requires lambda > 0, q >= 0, a > 0".into()));
        }
        Ok(Self { lambda, q, a, rates: vec![lambda + q], n_switch: DEFAULT_N_SWITCH })
    }

    pub fn from_lattice(p: &LatticeParams) -> Result<Self> {
        Self::new(p.lambda, p.q, p.a)
    }

    fn r(&self) -> f64 {
        self.lambda + self.q
    }

    fn c(&self) -> f64 {
        1.0 + self.a
    }

    /// `r_i`, computed on demand (the cached vector holds `r_0`).
    pub fn rate(&self, i: usize) -> f64 {
        self.r() * self.c().powi(i as i32)
    }

    /// `ln` of the a-priori bound `lambda^n (1+a)^{n(n-1)/2} x^n / n!` on all three chains.
    fn log_bound(&self, n: usize, x: f64) -> f64 {
        let nf = n as f64;
        let log_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
        nf * (self.lambda * x).ln() + 0.5 * nf * (nf - 1.0) * self.c().ln() - log_fact + (1.0 + x).ln()
    }

    /// `gamma_n(x)`.
    pub fn gamma(&self, n: usize, x: f64) -> f64 {
        self.gamma_route(n, x).0
    }

    pub fn gamma_route(&self, n: usize, x: f64) -> (f64, ChainRoute) {
        let x = x.max(0.0);
        if n == 0 {
            return ((-self.r() * x).exp(), ChainRoute::ClosedForm);
        }
        if x == 0.0 {
            return (0.0, ChainRoute::ClosedForm);
        }
        if self.log_bound(n, x) < -690.0 {
            return (0.0, ChainRoute::Negligible);
        }
        if n <= self.n_switch {
            if let Some(v) = self.gamma_closed(n, x) {
                return (v, ChainRoute::ClosedForm);
            }
        }
        (self.grid_chain(n, x).0, ChainRoute::Grid)
    }

    /// Partial-fraction form; `None` when cancellation makes it unreliable.
    fn gamma_closed(&self, n: usize, x: f64) -> Option<f64> {
        let c = self.c();
        let r = self.r();
        let pref = (self.lambda / r).powi(n as i32) * c.powf(0.5 * (n * (n - 1)) as f64);
        let pw: Vec<f64> = (0..=n).map(|i| c.powi(i as i32)).collect();
        let mut sum = 0.0;
        let mut abs = 0.0;
        for i in 0..=n {
            let mut den = 1.0;
            for j in 0..=n {
                if j != i {
                    den *= pw[j] - pw[i];
                }
            }
            let t = (-r * pw[i] * x).exp() / den;
            sum += t;
            abs += t.abs();
        }
        let v = pref * sum;
        let err = pref * abs * 1e-15 * (n as f64 + 1.0);
        if v < -1e-12 || err > 1e-12 {
            None
        } else {
            Some(v.max(0.0))
        }
    }

    /// `(1 * g_{c^{n-1}} * ... * g_1)(x)` and `(Q * g_{c^{n-1}} * ... * g_1)(x)`, `Q(x) = x`.
    pub fn q_and_one_convolutions(&self, n: usize, x: f64) -> (f64, f64) {
        let x = x.max(0.0);
        if n == 0 || x == 0.0 {
            return if n == 0 { (1.0, x) } else { (0.0, 0.0) };
        }
        if self.log_bound(n, x) + x.max(1.0).ln() < -690.0 {
            return (0.0, 0.0);
        }
        if n <= self.n_switch {
            if let Some(v) = self.convolutions_closed(n, x) {
                return v;
            }
        }
        let (_, one, q) = self.grid_chain(n, x);
        (one, q)
    }

    fn convolutions_closed(&self, n: usize, x: f64) -> Option<(f64, f64)> {
        let pref = (self.lambda / self.r()).powi(n as i32);
        let rates: Vec<f64> = (0..n).map(|i| self.rate(i)).collect();
        let mut cdf_tail = 0.0;
        let mut int_tail = 0.0;
        let mut abs = 0.0;
        for i in 0..n {
            let mut ci = 1.0;
            for j in 0..n {
                if j != i {
                    ci *= rates[j] / (rates[j] - rates[i]);
                }
            }
            let e = (-rates[i] * x).exp();
            cdf_tail += ci * e;
            int_tail += ci * (-(-rates[i] * x).exp_m1()) / rates[i];
            abs += ci.abs();
        }
        let one = pref * (1.0 - cdf_tail);
        let q = pref * (x - int_tail);
        let err = pref * abs * 1e-15 * (n as f64 + 1.0) * x.max(1.0);
        if one < -1e-12 || q < -1e-12 || err > 1e-12 {
            None
        } else {
            Some((one.max(0.0), q.max(0.0)))
        }
    }

    /// Grid evaluation of `(gamma_n, one_conv, q_conv)` at `x`, Richardson-combined
    /// from `M` and `2M` intervals. Each convolution with an exponential density
    /// is integrated exactly against the piecewise-linear interpolant.
    pub fn grid_chain(&self, n: usize, x: f64) -> (f64, f64, f64) {
        let coarse = self.grid_chain_at(n, x, GRID_INTERVALS);
        let fine = self.grid_chain_at(n, x, 2 * GRID_INTERVALS);
        (
            ((4.0 * fine.0 - coarse.0) / 3.0).max(0.0),
            ((4.0 * fine.1 - coarse.1) / 3.0).max(0.0),
            ((4.0 * fine.2 - coarse.2) / 3.0).max(0.0),
        )
    }

    fn grid_chain_at(&self, n: usize, x: f64, m: usize) -> (f64, f64, f64) {
        let h = x / m as f64;
        let r = self.r();
        // P_1 = g_1
        let mut p: Vec<f64> = (0..=m).map(|i| self.lambda * (-r * h * i as f64).exp()).collect();
        for k in 1..n {
            let rho = self.rate(k);
            let mut qv = exp_conv(&p, rho, h);
            let f = self.lambda * self.c().powi(k as i32);
            qv.iter_mut().for_each(|v| *v *= f);
            p = qv;
        }
        let gamma = *exp_conv(&p, self.rate(n), h).last().unwrap_or(&0.0);
        let mut one = vec![0.0; m + 1];
        for i in 1..=m {
            one[i] = one[i - 1] + 0.5 * h * (p[i - 1] + p[i]);
        }
        let mut q = 0.0;
        for i in 1..=m {
            q += 0.5 * h * (one[i - 1] + one[i]);
        }
        (gamma, one[m], q)
    }
}

/// `Q(x_i) = int_0^{x_i} exp(-rho (x_i - y)) P(y) dy` for piecewise-linear `P`.
fn exp_conv(p: &[f64], rho: f64, h: f64) -> Vec<f64> {
    let z = rho * h;
    let e = (-z).exp();
    let (w0, w1) = if z < 1e-3 {
        (h * (1.0 - z / 2.0 + z * z / 6.0), h * (0.5 - z / 6.0 + z * z / 24.0))
    } else {
        let w0 = -(-z).exp_m1() / rho;
        (w0, (h - w0) / z)
    };
    // w0 = int_0^h e^{-rho(h-t)} dt, w1 = int_0^h e^{-rho(h-t)} t/h dt
    let mut out = vec![0.0; p.len()];
    for i in 1..p.len() {
        out[i] = e * out[i - 1] + p[i - 1] * (w0 - w1) + p[i] * w1;
    }
    out
}

/// Lattice values and their systems.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSolution {
    pub params: LatticeParams,
    pub basis: ExpConvolutionBasis,
    /// `rho_0..rho_N` with `rho_0 = 0` (up-crossed at `b`) and `rho_N = 1`.
    pub rho: Vec<f64>,
    /// `mu_0..mu_N` with `mu_0 = 1` and `mu_N = 0`.
    pub mu: Vec<f64>,
    /// `v_0..v_N` with `v_N = 0`.
    pub v: Vec<f64>,
    pub condition_rho: f64,
    pub condition_mu: f64,
    pub condition_v: f64,
    /// Max-norm residuals of the three systems.
    pub residual_rho: f64,
    pub residual_mu: f64,
    pub residual_v: f64,
}

/// Chain values needed by the systems: `gamma_j(L_n - L_{n+1})` for `j <= n`,
/// and the one/Q convolutions of order `m` at `L_{m-1} - L_m`.
struct Tables {
    gamma: Vec<Vec<f64>>,
    one: Vec<f64>,
    qconv: Vec<f64>,
}

fn tables(p: &LatticeParams, basis: &ExpConvolutionBasis) -> Tables {
    let n_lv = p.n_levels;
    let gamma = (0..n_lv)
        .map(|n| {
            let u = p.width(n + 1);
            (0..=n).map(|j| basis.gamma(j, u)).collect()
        })
        .collect();
    let mut one = vec![0.0; n_lv + 1];
    let mut qconv = vec![0.0; n_lv + 1];
    for m in 1..=n_lv {
        let (o, q) = basis.q_and_one_convolutions(m, p.width(m));
        one[m] = o;
        qconv[m] = q;
    }
    Tables { gamma, one, qconv }
}

/// Assemble `(I - Gamma)` rows over unknowns `x_1..x_{N-1}` (index `n - 1`),
/// moving the known `x_N` to the right-hand side.
fn exit_system(p: &LatticeParams, t: &Tables, x_n: f64, extra: &dyn Fn(usize) -> f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n_lv = p.n_levels;
    let k = n_lv - 1;
    let mut m = vec![vec![0.0; k]; k];
    let mut rhs = vec![0.0; k];
    for n in 1..n_lv {
        let row = n - 1;
        m[row][row] += 1.0;
        rhs[row] = extra(n);
        for j in 0..=n {
            let idx = n + 1 - j;
            let g = t.gamma[n][j];
            if idx == n_lv {
                rhs[row] += g * x_n;
            } else {
                m[row][idx - 1] -= g;
            }
        }
    }
    (m, rhs)
}

/// Solve the exit systems for `rho` and `mu` only. The dividend fields are
/// `NaN`; use this where the dividend system is out of reach (with `q = 0` and
/// a high barrier the undiscounted dividends grow like `e^{lambda b}` and the
/// `v` system becomes numerically singular).
pub fn solve_exit(params: &LatticeParams) -> Result<LatticeSolution> {
    params.validate()?;
    let basis = ExpConvolutionBasis::from_lattice(params)?;
    let t = tables(params, &basis);
    solve_exit_with(params, basis, &t)
}

fn solve_exit_with(params: &LatticeParams, basis: ExpConvolutionBasis, t: &Tables) -> Result<LatticeSolution> {
    let (mr, rr) = exit_system(params, t, 1.0, &|_| 0.0);
    let sr = solve_dense(&mr, &rr)?;
    let residual_rho = residual(&mr, &sr.x, &rr);
    let mut rho = vec![0.0];
    rho.extend_from_slice(&sr.x);
    rho.push(1.0);

    let (mm, rm) = exit_system(params, t, 0.0, &|n| t.one[n + 1]);
    let sm = solve_dense(&mm, &rm)?;
    let residual_mu = residual(&mm, &sm.x, &rm);
    let mut mu = vec![1.0];
    mu.extend_from_slice(&sm.x);
    mu.push(0.0);

    Ok(LatticeSolution {
        params: *params,
        basis,
        rho,
        mu,
        v: vec![f64::NAN; params.n_levels + 1],
        condition_rho: sr.condition_number,
        condition_mu: sm.condition_number,
        condition_v: f64::NAN,
        residual_rho,
        residual_mu,
        residual_v: f64::NAN,
    })
}

/// Solve the three lattice systems.
pub fn solve(params: &LatticeParams) -> Result<LatticeSolution> {
    params.validate()?;
    let basis = ExpConvolutionBasis::from_lattice(params)?;
    let t = tables(params, &basis);
    let n_lv = params.n_levels;
    let c = 1.0 + params.a;
    let mut sol = solve_exit_with(params, basis, &t)?;

    // unknowns v_0..v_{N-1}
    let mut mv = vec![vec![0.0; n_lv]; n_lv];
    let mut rv = vec![0.0; n_lv];
    for n in 0..n_lv {
        mv[n][n] += 1.0;
        mv[n][0] -= t.one[n + 1];
        rv[n] = c.powi(n as i32 + 1) * t.qconv[n + 1];
        for j in 0..=n {
            let idx = n + 1 - j;
            if idx < n_lv {
                mv[n][idx] -= t.gamma[n][j];
            }
        }
    }
    let sv = solve_dense(&mv, &rv)?;
    sol.residual_v = residual(&mv, &sv.x, &rv);
    sol.condition_v = sv.condition_number;
    sol.v = sv.x;
    sol.v.push(0.0);
    Ok(sol)
}

/// `rho_1..rho_N` (with `rho_N = 1`).
pub fn solve_rho(params: &LatticeParams) -> Result<Vec<f64>> {
    Ok(solve_exit(params)?.rho[1..].to_vec())
}

/// `mu_0..mu_{N-1}` (with `mu_0 = 1`).
pub fn solve_mu(params: &LatticeParams) -> Result<Vec<f64>> {
    let s = solve_exit(params)?;
    Ok(s.mu[..params.n_levels].to_vec())
}

/// `v_0..v_N` (with `v_N = 0`).
pub fn solve_v(params: &LatticeParams) -> Result<Vec<f64>> {
    Ok(solve(params)?.v)
}

impl LatticeSolution {
    fn locate(&self, x: f64) -> Result<(usize, f64)> {
        let n = self.params.interval_of(x).ok_or_else(|| {
            Error::Domain(format!(
                "x = {x} outside (L_N, b] = ({}, {}]",
                self.params.level(self.params.n_levels),
                self.params.b
            ))
        })?;
        Ok((n, x - self.params.level(n)))
    }

    /// `rho_N(x) = E_x[exp(-q d_N); d_N < u_0]` for `x` in `(L_N, b]`.
    pub fn rho_eval(&self, x: f64) -> Result<f64> {
        let (n, u) = self.locate(x)?;
        Ok((0..n).map(|j| self.basis.gamma(j, u) * self.rho[n - j]).sum())
    }

    /// `mu_N(x) = E_x[exp(-q u_0); u_0 < d_N]` for `x` in `(L_N, b]`.
    pub fn mu_eval(&self, x: f64) -> Result<f64> {
        let (n, u) = self.locate(x)?;
        let s: f64 = (0..n).map(|j| self.basis.gamma(j, u) * self.mu[n - j]).sum();
        Ok(s + self.basis.q_and_one_convolutions(n, u).0)
    }

    /// Discounted dividends until `d_N` under the barrier `b`, for `x > L_N`.
    pub fn v_eval(&self, x: f64) -> Result<f64> {
        if x > self.params.b {
            return Ok(self.v[0] + x - self.params.b);
        }
        let (n, u) = self.locate(x)?;
        let s: f64 = (0..n).map(|j| self.basis.gamma(j, u) * self.v[n - j]).sum();
        let (one, q) = self.basis.q_and_one_convolutions(n, u);
        Ok(s + one * self.v[0] + (1.0 + self.params.a).powi(n as i32) * q)
    }

    /// Value `v_N(x)` extended by `0` at and below `L_N` (killed capital).
    pub fn v_extended(&self, x: f64) -> f64 {
        if x <= self.params.level(self.params.n_levels) {
            0.0
        } else {
            self.v_eval(x).unwrap_or(0.0)
        }
    }
}

/// Max-norm residuals of the delay equation `v'(x) + (lambda + q) v(x) = lambda w(x)`
/// on a uniform grid, with `w(x) = v(x (1+a))` on `(0, b/(1+a)]` and
/// `w(x) = x (1+a) - b + v_b` on `(b/(1+a), b)`. `v` is extended by `0` below
/// `L_N`; derivatives are Richardson-combined central differences; points within
/// two steps of a lattice level are skipped.
pub fn delay_ode_residuals(sol: &LatticeSolution, v_b: f64, points: usize) -> (f64, f64) {
    let p = &sol.params;
    let c = 1.0 + p.a;
    let l1 = p.b / c;
    let h = 1e-3 * p.b;
    let levels = p.levels();
    let near_level = |x: f64| levels.iter().any(|&l| (x - l).abs() < 2.0 * h);
    let deriv = |x: f64| -> f64 {
        let d1 = (sol.v_extended(x + h) - sol.v_extended(x - h)) / (2.0 * h);
        let d2 = (sol.v_extended(x + 0.5 * h) - sol.v_extended(x - 0.5 * h)) / h;
        (4.0 * d2 - d1) / 3.0
    };
    let mut lower = 0.0f64;
    let mut upper = 0.0f64;
    for i in 1..points {
        let x = l1 * i as f64 / points as f64;
        if near_level(x) || near_level(x * c) {
            continue;
        }
        let r = deriv(x) + (p.lambda + p.q) * sol.v_extended(x) - p.lambda * sol.v_extended(x * c);
        lower = lower.max(r.abs());
    }
    for i in 1..points {
        let x = l1 + (p.b - l1) * i as f64 / points as f64;
        if near_level(x) {
            continue;
        }
        let r = deriv(x) + (p.lambda + p.q) * sol.v_extended(x) - p.lambda * (x * c - p.b + v_b);
        upper = upper.max(r.abs());
    }
    (upper, lower)
}
