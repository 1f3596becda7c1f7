//! Monte-Carlo estimators used as independent oracles.
//!
//! Every path owns a ChaCha8 stream selected by `(seed, path index)`, and the
//! per-path values are reduced in index order by pairwise summation, so an
//! estimate depends only on `(seed, paths)` and not on the worker count. Set
//! `DUALGAIN_THREADS` to bound the number of workers.

use crate::brownian::BrownianParams;
use crate::model::{AdditiveGain, DualModelParams, LatticeParams};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCConfig {
    pub paths: usize,
    pub seed: u64,
    /// Escape level as a multiple of `max(x, 1)`; a path above it is declared surviving.
    pub escape_factor: f64,
    pub time_cap: f64,
    /// Euler step near the boundaries (Brownian model only).
    pub euler_dt: f64,
    /// Worker threads; `0` defers to `DUALGAIN_THREADS`, then to the rayon default.
    pub threads: usize,
}

impl Default for MCConfig {
    fn default() -> Self {
        Self { paths: 1_000_000, seed: 0x5eed, escape_factor: 1e3, time_cap: 1e6, euler_dt: 1e-4, threads: 0 }
    }
}

impl MCConfig {
    pub fn validate(&self) -> Result<()> {
        if self.paths < 1000 {
            return Err(Error::InvalidParam(format!("paths must be >= 1000, got {}", self.paths)));
        }
        if !(self.euler_dt > 0.0) {
            return Err(Error::InvalidParam("euler_dt must be > 0".into()));
        }
        if !(self.escape_factor > 1.0 && self.time_cap > 0.0) {
            return Err(Error::InvalidParam("escape_factor must be > 1 and time_cap > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: usize,
    /// Paths stopped by the escape level or the time cap.
    pub n_censored: usize,
    /// Upper bound on the error contributed by censoring, already in units of the estimand.
    pub censoring_bound: f64,
}

impl MCEstimate {
    /// `|mean - target|` measured in standard errors, after removing the
    /// censoring allowance.
    pub fn sigma_distance(&self, target: f64) -> f64 {
        let gap = ((self.mean - target).abs() - self.censoring_bound).max(0.0);
        if self.stderr > 0.0 {
            gap / self.stderr
        } else if gap == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Sum in a fixed binary tree so the rounding does not depend on scheduling.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 16 {
        return x.iter().sum();
    }
    let mid = x.len() / 2;
    pairwise_sum(&x[..mid]) + pairwise_sum(&x[mid..])
}

fn estimate(values: &[f64], n_censored: usize, censoring_bound: f64) -> MCEstimate {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = if values.len() > 1 { pairwise_sum(&dev) / (n - 1.0) } else { 0.0 };
    MCEstimate { mean, stderr: (var / n).sqrt(), n_paths: values.len(), n_censored, censoring_bound }
}

fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

/// Worker count from `DUALGAIN_THREADS`, if set to a positive integer.
pub fn configured_threads() -> Option<usize> {
    std::env::var("DUALGAIN_THREADS").ok()?.trim().parse().ok().filter(|&n: &usize| n > 0)
}

/// Run `f(path)` for every path in parallel and collect in index order.
fn run_paths<T: Send>(cfg: &MCConfig, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    let work = || (0..cfg.paths).into_par_iter().map(&f).collect::<Vec<T>>();
    let threads = if cfg.threads > 0 { Some(cfg.threads) } else { configured_threads() };
    match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(work),
            Err(_) => work(),
        },
        None => work(),
    }
}

fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// Outcome of one renewal path.
#[derive(Debug, Clone, Copy, PartialEq)]
enum RuinOutcome {
    Ruined(f64),
    Escaped,
    TimeCapped,
}

fn ruin_path(params: &DualModelParams, x: f64, escape: f64, time_cap: f64, rng: &mut ChaCha8Rng) -> RuinOutcome {
    let mut u = x;
    let mut t = 0.0;
    loop {
        let gap = params.interarrival.sample(rng);
        if gap >= u {
            return RuinOutcome::Ruined(t + u);
        }
        t += gap;
        u -= gap;
        let proportional = params.mixture_p >= 1.0 || rng.random::<f64>() < params.mixture_p;
        if proportional {
            u *= 1.0 + params.a;
            if let AdditiveGain::Exponential { mu } = params.gain {
                u += exp1(rng) / mu;
            }
        } else {
            u += exp1(rng) / params.delta.unwrap_or(1.0);
        }
        if u > escape {
            return RuinOutcome::Escaped;
        }
        if t > time_cap {
            return RuinOutcome::TimeCapped;
        }
    }
}

/// Bound on the ruin probability of a path that has reached level `level`.
///
/// With `a > 0`, if every later gap is below `theta` times the current level the
/// level grows at least by the factor `1 + a/2`, so a union bound over the gaps
/// applies. With `a = 0` the Lundberg inequality for the level random walk
/// gives `exp(-R level)`.
pub fn escape_bound(params: &DualModelParams, level: f64) -> f64 {
    let ia = &params.interarrival;
    if params.a > 0.0 && params.mixture_p >= 1.0 {
        let theta = params.a / (2.0 * (1.0 + params.a));
        let growth = 1.0 + params.a / 2.0;
        let mut total = 0.0;
        let mut l = theta * level;
        for _ in 0..10_000 {
            let s = ia.survival(l);
            total += s;
            if s < 1e-18 * total.max(1e-300) || s == 0.0 {
                break;
            }
            l *= growth;
        }
        return total.min(1.0);
    }
    match lundberg_coefficient(params) {
        Some(r) => (-r * level).exp(),
        None => 1.0,
    }
}

/// Positive root of `E[e^{R T}] E[e^{-R C}] = 1` for the level random walk
/// without proportional growth.
fn lundberg_coefficient(params: &DualModelParams) -> Option<f64> {
    use crate::Complex64;
    let gain_lt = |r: f64| -> f64 {
        let c = params.mu().map_or(1.0, |m| m / (m + r));
        match params.delta {
            Some(d) => params.mixture_p * c + (1.0 - params.mixture_p) * d / (d + r),
            None => c,
        }
    };
    let f = |r: f64| -> Option<f64> {
        let l = params.interarrival.lst_continued(Complex64::new(-r, 0.0)).ok()?.re;
        Some(l * gain_lt(r) - 1.0)
    };
    let hi_bound = params.interarrival.min_rate().unwrap_or(50.0 / params.interarrival.mean());
    let mut lo = 1e-12 * hi_bound;
    let mut hi = hi_bound * (1.0 - 1e-9);
    if f(lo)? >= 0.0 {
        return None;
    }
    // f is convex with f(0) = 0 and f'(0) < 0; a root exists iff f turns positive
    if !f(hi).is_some_and(|v| v > 0.0) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(lo)
}

/// Estimate `E[e^{-alpha tau_x}; tau_x < inf]` (the ruin probability for `alpha = 0`).
pub fn simulate_ruin(params: &DualModelParams, x: f64, alpha: f64, cfg: &MCConfig) -> Result<MCEstimate> {
    params.validate()?;
    cfg.validate()?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidParam(format!("x must be > 0, got {x}")));
    }
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParam(format!("alpha must be >= 0, got {alpha}")));
    }
    let escape = cfg.escape_factor * x.max(1.0);
    let outcomes = run_paths(cfg, |i| {
        let mut rng = path_rng(cfg.seed, i);
        ruin_path(params, x, escape, cfg.time_cap, &mut rng)
    });
    let values: Vec<f64> = outcomes
        .iter()
        .map(|o| match o {
            RuinOutcome::Ruined(t) => (-alpha * t).exp(),
            _ => 0.0,
        })
        .collect();
    let escaped = outcomes.iter().filter(|o| matches!(o, RuinOutcome::Escaped)).count();
    let capped = outcomes.iter().filter(|o| matches!(o, RuinOutcome::TimeCapped)).count();
    let n = cfg.paths as f64;
    let mut bound = escaped as f64 / n * escape_bound(params, escape);
    bound += capped as f64 / n * if alpha > 0.0 { (-alpha * cfg.time_cap).exp() } else { 1.0 };
    Ok(estimate(&values, escaped + capped, bound))
}

/// Lattice estimands from one ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeEstimates {
    /// `E[e^{-q d_N}; d_N < u_0]`.
    pub rho: MCEstimate,
    /// `E[e^{-q u_0}; u_0 < d_N]`.
    pub mu: MCEstimate,
    /// Discounted dividends under the barrier `b` until `d_N`.
    pub v: MCEstimate,
}

/// Event-driven paths of the pure proportional model (unit decrease between
/// Poisson jumps) on the lattice below `b`.
pub fn simulate_lattice(params: &LatticeParams, x: f64, cfg: &MCConfig) -> Result<LatticeEstimates> {
    params.validate()?;
    cfg.validate()?;
    let b = params.b;
    let floor = params.level(params.n_levels);
    if !(x > floor && x <= b) {
        return Err(Error::Domain(format!("x = {x} is outside (L_N, b] = ({floor}, {b}]")));
    }
    let c = 1.0 + params.a;
    let q = params.q;
    let out = run_paths(cfg, |i| {
        let mut rng = path_rng(cfg.seed, i);
        let mut u = x;
        let mut t = 0.0;
        let mut rho = 0.0;
        let mut mu = 0.0;
        let mut resolved = false;
        let mut div = 0.0;
        if u >= b {
            mu = 1.0;
            resolved = true;
        }
        let mut capped = false;
        loop {
            let gap = exp1(&mut rng) / params.lambda;
            if u - gap <= floor {
                let td = t + (u - floor);
                if !resolved {
                    rho = (-q * td).exp();
                }
                break;
            }
            t += gap;
            u = c * (u - gap);
            if u >= b {
                let disc = (-q * t).exp();
                if !resolved {
                    mu = disc;
                    resolved = true;
                }
                div += disc * (u - b);
                u = b;
            }
            if t > cfg.time_cap {
                capped = true;
                break;
            }
        }
        (rho, mu, div, capped)
    });
    let capped = out.iter().filter(|o| o.3).count();
    let frac = capped as f64 / cfg.paths as f64;
    let tail = (-q * cfg.time_cap).exp();
    let pick = |k: usize| -> Vec<f64> {
        out.iter().map(|o| [o.0, o.1, o.2][k]).collect()
    };
    Ok(LatticeEstimates {
        rho: estimate(&pick(0), capped, frac * tail),
        mu: estimate(&pick(1), capped, frac * tail),
        v: estimate(&pick(2), capped, frac * tail * b),
    })
}

/// Brownian lattice estimands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrownianEstimates {
    pub rho: MCEstimate,
    pub v: MCEstimate,
}

/// Largest step after which a boundary at distance `dist` is out of reach
/// (further than eight standard deviations plus the drift).
fn safe_step(dist: f64, eta: f64, sigma: f64) -> f64 {
    let e = eta.abs();
    let s = if e > 0.0 {
        (-8.0 * sigma + (64.0 * sigma * sigma + 4.0 * e * dist).sqrt()) / (2.0 * e)
    } else {
        dist / (8.0 * sigma)
    };
    s * s
}

/// Paths of `U = x + eta t + sigma B(t)` with jumps `U -> (1 + a) U` at rate
/// `lambda`, reflected at `b` and absorbed at `L_N`.
///
/// Near either boundary the path is advanced by Euler steps of `euler_dt`, and
/// crossings are detected on the grid. Away from the boundaries it moves by
/// exact Gaussian increments over steps too short to reach a boundary with
/// probability above about `1e-15`. Paths are stopped once the discount factor
/// falls below `1e-13` (the remaining dividends are bounded and reported as
/// censoring) or at the time cap.
pub fn simulate_brownian_lattice(bp: &BrownianParams, x: f64, cfg: &MCConfig) -> Result<BrownianEstimates> {
    bp.validate()?;
    cfg.validate()?;
    let lat = bp.lattice()?;
    let b = bp.b;
    let floor = lat.level(lat.n_levels);
    if !(x > floor && x <= b) {
        return Err(Error::Domain(format!("x = {x} is outside (L_N, b] = ({floor}, {b}]")));
    }
    let (eta, sigma, q, c, dt) = (bp.eta, bp.sigma, bp.q, 1.0 + bp.a, cfg.euler_dt);
    let horizon = if q > 0.0 { (30.0 / q).min(cfg.time_cap) } else { cfg.time_cap };
    let out = run_paths(cfg, |i| {
        let mut rng = path_rng(cfg.seed, i);
        let mut u = x;
        let mut t = 0.0;
        let mut rho = 0.0;
        let mut resolved = x >= b;
        let mut div = 0.0;
        let mut next_jump = exp1(&mut rng) / bp.lambda;
        loop {
            if t >= horizon {
                return (rho, div, true);
            }
            if t >= next_jump {
                u *= c;
                next_jump = t + exp1(&mut rng) / bp.lambda;
                if u >= b {
                    resolved = true;
                    div += (-q * t).exp() * (u - b);
                    u = b;
                }
                continue;
            }
            let dist = (u - floor).min(b - u);
            let h = safe_step(dist, eta, sigma).max(dt).min(next_jump - t);
            let z: f64 = StandardNormal.sample(&mut rng);
            t += h;
            u += eta * h + sigma * h.sqrt() * z;
            if u <= floor {
                if !resolved {
                    rho = (-q * t).exp();
                }
                return (rho, div, false);
            }
            if u >= b {
                resolved = true;
                div += (-q * t).exp() * (u - b);
                u = b;
            }
        }
    });
    let censored = out.iter().filter(|o| o.2).count();
    let frac = censored as f64 / cfg.paths as f64;
    let tail = (-q * horizon).exp();
    // after the horizon the dividends are at most the discounted reflection plus jump overflow
    let div_tail = tail * (b * bp.a * bp.lambda + eta.max(0.0) + sigma) / q.max(1e-300) * 4.0;
    let rho_v: Vec<f64> = out.iter().map(|o| o.0).collect();
    let v_v: Vec<f64> = out.iter().map(|o| o.1).collect();
    Ok(BrownianEstimates {
        rho: estimate(&rho_v, censored, frac * tail),
        v: estimate(&v_v, censored, if q > 0.0 { frac * div_tail } else { frac * f64::INFINITY }),
    })
}

/// Discounted reflected-exit transform `E_x[e^{-q tau_alpha}]` of the process
/// reflected at `b`, with Euler steps near the boundaries.
pub fn simulate_reflected_exit(
    eta: f64,
    sigma: f64,
    q: f64,
    x: f64,
    alpha: f64,
    b: f64,
    cfg: &MCConfig,
) -> Result<MCEstimate> {
    cfg.validate()?;
    if !(alpha < x && x <= b && sigma > 0.0 && q > 0.0) {
        return Err(Error::InvalidParam("need alpha < x <= b, sigma > 0, q > 0".into()));
    }
    let horizon = (36.0 / q).min(cfg.time_cap);
    let out = run_paths(cfg, |i| {
        let mut rng = path_rng(cfg.seed, i);
        let mut u = x;
        let mut t = 0.0;
        while t < horizon {
            let dist = (u - alpha).min(b - u);
            let h = safe_step(dist, eta, sigma).max(cfg.euler_dt);
            let z: f64 = StandardNormal.sample(&mut rng);
            t += h;
            u += eta * h + sigma * h.sqrt() * z;
            if u <= alpha {
                return ((-q * t).exp(), false);
            }
            u = u.min(b);
        }
        (0.0, true)
    });
    let censored = out.iter().filter(|o| o.1).count();
    let values: Vec<f64> = out.iter().map(|o| o.0).collect();
    Ok(estimate(&values, censored, censored as f64 / cfg.paths as f64 * (-q * horizon).exp()))
}

/// Two-sided exit of `(0, width)` by a Brownian motion with killing at rate
/// `q`: returns estimates of the discounted down-exit and up-exit transforms.
pub fn simulate_two_sided_exit(
    eta: f64,
    sigma: f64,
    q: f64,
    z: f64,
    width: f64,
    cfg: &MCConfig,
) -> Result<(MCEstimate, MCEstimate)> {
    cfg.validate()?;
    if !(z > 0.0 && z < width && sigma > 0.0 && q >= 0.0) {
        return Err(Error::InvalidParam("need 0 < z < width, sigma > 0, q >= 0".into()));
    }
    let out = run_paths(cfg, |i| {
        let mut rng = path_rng(cfg.seed, i);
        let mut u = z;
        let mut t = 0.0;
        loop {
            if t > cfg.time_cap {
                return (0.0, 0.0, true);
            }
            let dist = u.min(width - u);
            let h = safe_step(dist, eta, sigma).max(cfg.euler_dt);
            let g: f64 = StandardNormal.sample(&mut rng);
            t += h;
            u += eta * h + sigma * h.sqrt() * g;
            if u <= 0.0 {
                return ((-q * t).exp(), 0.0, false);
            }
            if u >= width {
                return (0.0, (-q * t).exp(), false);
            }
        }
    });
    let censored = out.iter().filter(|o| o.2).count();
    let frac = censored as f64 / cfg.paths as f64;
    let down: Vec<f64> = out.iter().map(|o| o.0).collect();
    let up: Vec<f64> = out.iter().map(|o| o.1).collect();
    Ok((estimate(&down, censored, frac), estimate(&up, censored, frac)))
}
