//! Laplace transform of the ruin probability and double transform of the ruin time.
//!
//! Conditioning on the first gain epoch gives the functional equation
//!
//! ```text
//! rho(s) = J(s) rho(s / (1 + a)) + H(s),
//! J(s)   = phi(s) mu / (mu (1 + a) - s),
//! H(s)   = (1 - phi(s)) / s - J(s) rho(mu),
//! ```
//!
//! which is iterated into `rho(s) = sum_k prod_{j<k} J(s_j) H(s_k)` with
//! `s_k = s / (1 + a)^k`. The constant `rho(mu)` follows by substituting `s = mu`.
//! The ruin-time transform `tau(s, alpha)` has the same structure with `phi`
//! evaluated at `s + alpha`.
//!
//! With `a = 0` the iteration does not contract; that case is solved in closed
//! form from the same equation, the unknown constant being fixed by analyticity
//! at the non-negative root of `mu - s - mu phi(s + alpha)`.
//!
//! The mixture variant (gain `a u + C` with probability `p`, `D ~ Exp(delta)`
//! otherwise) carries two more unknowns, fixed by a 3x3 linear system.

use crate::linalg::{solve_dense, DenseSolution};
use crate::model::{classify_drift, AdditiveGain, DriftClass, DualModelParams};
use crate::{Complex64, Error, Result};

/// Truncation controls for the iterated series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub tail_tolerance: f64,
    pub max_terms: usize,
    /// Half-width of the guard region around removable singularities.
    /// `None` selects `1e-5 * mu (1 + a)`; closer to the singularity the
    /// cancellation error of the plain series exceeds `1e-10`.
    pub singularity_guard: Option<f64>,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self { tail_tolerance: 1e-12, max_terms: 10_000, singularity_guard: None }
    }
}

impl SeriesControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.tail_tolerance > 0.0) {
            return Err(Error::InvalidParam("tail_tolerance must be > 0".into()));
        }
        if self.max_terms < 20 {
            return Err(Error::InvalidParam("max_terms must be >= 20".into()));
        }
        if let Some(e) = self.singularity_guard {
            if !(e > 0.0) {
                return Err(Error::InvalidParam("singularity_guard must be > 0".into()));
            }
        }
        Ok(())
    }
}

/// A series evaluation with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEval {
    pub value: Complex64,
    /// Number of terms summed.
    pub terms: usize,
    /// Upper bound (or estimate, off the closed right half-plane) of the truncated tail.
    pub tail_bound: f64,
    /// True when the point was within the guard region of a removable singularity
    /// and the value is the average of two offset evaluations.
    pub guarded: bool,
    /// Largest ratio `|term_k / term_{k-1}|` over the second half of the summed terms.
    pub late_ratio: f64,
}

/// Constants of the mixture model, solved once per transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureConstants {
    pub rho_mu: f64,
    pub rho_delta: f64,
    /// Root `s1` of `delta - s - (1 - p) delta phi(s)`; `NaN` when `p = 1`.
    pub s1: f64,
    /// `rho(s1 / (1 + a))`; `NaN` when `p = 1`.
    pub rho_s1_scaled: f64,
    pub condition_number: f64,
}

/// The ruin-probability transform of one parameter set, with its constants cached.
#[derive(Debug, Clone)]
pub struct RuinTransform {
    params: DualModelParams,
    control: SeriesControl,
    eps_sing: f64,
    drift: DriftClass,
    rho_mu: f64,
    mixture: Option<MixtureConstants>,
}

#[derive(Clone, Copy)]
enum Domain {
    /// Closed right half-plane: rigorous tail bounds.
    Right,
    /// Meromorphic continuation: heuristic tail estimate.
    Continued,
}

/// Coefficients `(h0, h_mu, h_delta)` of `H` and the multiplier `J` at one point.
type Step = (Complex64, [Complex64; 3]);

impl RuinTransform {
    pub fn new(params: DualModelParams, control: SeriesControl) -> Result<Self> {
        params.validate()?;
        control.validate()?;
        let a = params.a;
        let drift = classify_drift(&params);
        let eps_sing = control
            .singularity_guard
            .unwrap_or_else(|| 1e-5 * params.mu().unwrap_or(1.0) * (1.0 + a));
        if params.mixture_p < 1.0 && a == 0.0 {
            return Err(Error::Unsupported("the mixture model requires a > 0".into()));
        }
        let mut rt = Self { params, control, eps_sing, drift, rho_mu: f64::NAN, mixture: None };
        match rt.params.gain {
            AdditiveGain::NoAdditiveGain => {}
            AdditiveGain::Exponential { mu } => {
                if a > 0.0 {
                    if rt.params.mixture_p == 1.0 {
                        rt.rho_mu = rt.tau_at_mu_series(0.0)?;
                    }
                    rt.mixture = Some(rt.solve_mixture_constants()?);
                    if rt.params.mixture_p < 1.0 {
                        rt.rho_mu = rt.mixture.as_ref().map(|m| m.rho_mu).unwrap_or(f64::NAN);
                    }
                } else {
                    rt.rho_mu = rt.tau_at_mu_a0(0.0)?;
                }
                if !(rt.rho_mu >= -1e-12 && rt.rho_mu <= 1.0 / mu + 1e-12) {
                    return Err(Error::Domain(format!(
                        "rho(mu) = {} violates 0 <= rho(mu) <= 1/mu",
                        rt.rho_mu
                    )));
                }
            }
        }
        Ok(rt)
    }

    pub fn params(&self) -> &DualModelParams {
        &self.params
    }

    pub fn control(&self) -> &SeriesControl {
        &self.control
    }

    pub fn drift(&self) -> DriftClass {
        self.drift
    }

    /// Cached `rho(mu)`; `NaN` for pure proportional gains, where it does not enter.
    pub fn rho_mu(&self) -> f64 {
        self.rho_mu
    }

    pub fn mixture_constants(&self) -> Option<&MixtureConstants> {
        self.mixture.as_ref()
    }

    pub fn singularity_guard(&self) -> f64 {
        self.eps_sing
    }

    fn check_right(s: Complex64) -> Result<()> {
        if s.re > 0.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("transform requires Re(s) > 0, got s = {s}")))
        }
    }

    fn phi(&self, s: Complex64, dom: Domain) -> Result<Complex64> {
        match dom {
            Domain::Right => self.params.interarrival.lst(s),
            Domain::Continued => self.params.interarrival.lst_continued(s),
        }
    }

    fn surv(&self, s: Complex64, dom: Domain) -> Result<Complex64> {
        match dom {
            Domain::Right => self.params.interarrival.one_minus_lst_over_s(s),
            Domain::Continued => self.params.interarrival.one_minus_lst_over_s_continued(s),
        }
    }

    /// The pair `(H(s), J(s))` of the pure model for a given `rho(mu)`.
    pub fn hj(&self, s: Complex64, rho_mu: f64) -> Result<(Complex64, Complex64)> {
        let (j, h) = self.step_pure(s, 0.0, Domain::Right)?;
        Ok((h[0] - h[1] * rho_mu, j))
    }

    /// `J_1` and the split `H_1 = h0 - rho(mu) h_mu` of the ruin-time equation.
    fn step_pure(&self, s: Complex64, alpha: f64, dom: Domain) -> Result<Step> {
        let a = self.params.a;
        let sa = s + alpha;
        let phi = self.phi(sa, dom)?;
        let h0 = self.surv(sa, dom)?;
        let zero = Complex64::new(0.0, 0.0);
        match self.params.gain {
            AdditiveGain::NoAdditiveGain => Ok((phi / (1.0 + a), [h0, zero, zero])),
            AdditiveGain::Exponential { mu } => {
                let den = mu * (1.0 + a) - s;
                if den.norm() == 0.0 {
                    return Err(Error::Pole(s));
                }
                let j = phi * mu / den;
                Ok((j, [h0, j, zero]))
            }
        }
    }

    /// `J_1`, `H_1` coefficients of the mixture model.
    fn step_mixture(&self, s: Complex64, dom: Domain) -> Result<Step> {
        let a = self.params.a;
        let p = self.params.mixture_p;
        let mu = self.params.mu().ok_or_else(|| Error::Unsupported("mixture requires an additive gain".into()))?;
        let phi = self.phi(s, dom)?;
        let h0 = self.surv(s, dom)?;
        let den_mu = mu * (1.0 + a) - s;
        if den_mu.norm() == 0.0 {
            return Err(Error::Pole(s));
        }
        let h_mu = p * phi * mu / den_mu;
        let (den, h_delta) = match self.params.delta {
            Some(delta) if p < 1.0 => {
                let dd = delta - s;
                // den = (delta - s - (1 - p) delta phi) / (delta - s)
                let num = dd - (1.0 - p) * delta * phi;
                if num.norm() == 0.0 || dd.norm() == 0.0 {
                    return Err(Error::Pole(s));
                }
                let hd = (1.0 - p) * delta * phi / dd;
                (num / dd, hd)
            }
            _ => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
        };
        Ok((h_mu / den, [h0 / den, h_mu / den, h_delta / den]))
    }

    /// Sum `sum_k prod_{j<k} J(s_j) [h0, h_mu, h_delta](s_k)` componentwise.
    fn iterate(
        &self,
        s: Complex64,
        step: &dyn Fn(Complex64) -> Result<Step>,
        bound: &dyn Fn(f64) -> Option<(f64, [f64; 3])>,
        weights: [f64; 3],
    ) -> Result<([Complex64; 3], SeriesEval)> {
        let c = 1.0 + self.params.a;
        let tol = self.control.tail_tolerance;
        let mut z = s;
        let mut prod = Complex64::new(1.0, 0.0);
        let mut acc = [Complex64::new(0.0, 0.0); 3];
        let mut mags: Vec<f64> = Vec::with_capacity(64);
        for k in 0..self.control.max_terms {
            let (j, h) = step(z)?;
            let mut mag = 0.0;
            for i in 0..3 {
                let t = prod * h[i];
                acc[i] += t;
                mag += weights[i].abs() * t.norm();
            }
            mags.push(mag);
            prod *= j;
            z /= c;
            let tail = match bound(z.norm()) {
                Some((jb, hb)) if jb < 1.0 => {
                    let hmax: f64 = (0..3).map(|i| weights[i].abs() * hb[i]).sum();
                    Some(prod.norm() * hmax / (1.0 - jb))
                }
                Some(_) => None,
                None => {
                    // continued domain: geometric estimate from the next multiplier
                    let (jn, hn) = step(z)?;
                    let r = jn.norm() * 1.05;
                    if k >= 8 && r < 1.0 {
                        let hmax: f64 = (0..3).map(|i| weights[i].abs() * hn[i].norm()).sum();
                        Some(2.0 * prod.norm() * hmax / (1.0 - r))
                    } else {
                        None
                    }
                }
            };
            if let Some(tb) = tail {
                if tb < tol {
                    let half = mags.len() / 2;
                    let late_ratio = mags[half.max(1)..]
                        .windows(2)
                        .filter(|w| w[0] > 0.0)
                        .map(|w| w[1] / w[0])
                        .fold(0.0, f64::max);
                    let value = (0..3).map(|i| acc[i] * weights[i]).sum();
                    return Ok((
                        acc,
                        SeriesEval { value, terms: k + 1, tail_bound: tb, guarded: false, late_ratio },
                    ));
                }
            }
        }
        Err(Error::NonConvergence(self.control.max_terms))
    }

    /// Points `x (1 + a)^j` near which `s` needs the guard.
    fn near_singular(&self, s: Complex64, bases: &[f64]) -> bool {
        let c = 1.0 + self.params.a;
        for &base in bases {
            if !(base > 0.0) || !base.is_finite() {
                continue;
            }
            let mut pt = base;
            while pt <= s.norm() + self.eps_sing {
                if (s - pt).norm() < self.eps_sing {
                    return true;
                }
                pt *= c;
                if c == 1.0 {
                    break;
                }
            }
        }
        false
    }

    fn guarded(&self, s: Complex64, eval: &dyn Fn(Complex64) -> Result<SeriesEval>) -> Result<SeriesEval> {
        let off = Complex64::new(0.0, 2.0 * self.eps_sing);
        let up = eval(s + off)?;
        let dn = eval(s - off)?;
        Ok(SeriesEval {
            value: 0.5 * (up.value + dn.value),
            terms: up.terms.max(dn.terms),
            tail_bound: up.tail_bound.max(dn.tail_bound),
            guarded: true,
            late_ratio: up.late_ratio.max(dn.late_ratio),
        })
    }

    /// Laplace transform `rho(s)` of the ruin probability, `Re(s) > 0`.
    pub fn ruin_lt(&self, s: Complex64) -> Result<Complex64> {
        Ok(self.ruin_lt_eval(s)?.value)
    }

    pub fn ruin_lt_eval(&self, s: Complex64) -> Result<SeriesEval> {
        Self::check_right(s)?;
        if self.params.mixture_p < 1.0 {
            return self.generalized_eval(s, Domain::Right);
        }
        self.tau_eval(s, 0.0, Domain::Right)
    }

    /// Meromorphic continuation of `rho` into `Re(s) <= 0`, used by contour inversion.
    pub fn ruin_lt_continued(&self, s: Complex64) -> Result<Complex64> {
        if matches!(self.params.interarrival, crate::model::InterarrivalSpec::Deterministic { .. }) {
            return Err(Error::Unsupported(
                "the continued transform grows exponentially for deterministic interarrivals".into(),
            ));
        }
        let dom = if s.re > 0.0 { Domain::Right } else { Domain::Continued };
        let ev = if self.params.mixture_p < 1.0 {
            self.generalized_eval(s, dom)?
        } else {
            self.tau_eval(s, 0.0, dom)?
        };
        Ok(ev.value)
    }

    /// Double transform `tau(s, alpha) = int e^{-s x} E[e^{-alpha tau_x}] dx`.
    pub fn ruin_time_lt(&self, s: Complex64, alpha: f64) -> Result<Complex64> {
        Ok(self.ruin_time_lt_eval(s, alpha)?.value)
    }

    pub fn ruin_time_lt_eval(&self, s: Complex64, alpha: f64) -> Result<SeriesEval> {
        Self::check_right(s)?;
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha must be finite and >= 0, got {alpha}")));
        }
        if self.params.mixture_p < 1.0 {
            return Err(Error::Unsupported("the ruin-time transform is implemented for the pure model".into()));
        }
        self.tau_eval(s, alpha, Domain::Right)
    }

    /// Ruin-time transform continued into `Re(s) <= 0`.
    pub fn ruin_time_lt_continued(&self, s: Complex64, alpha: f64) -> Result<Complex64> {
        let dom = if s.re > 0.0 { Domain::Right } else { Domain::Continued };
        Ok(self.tau_eval(s, alpha, dom)?.value)
    }

    fn tau_eval(&self, s: Complex64, alpha: f64, dom: Domain) -> Result<SeriesEval> {
        let a = self.params.a;
        if a == 0.0 {
            return self.tau_a0(s, alpha, dom);
        }
        let tau_mu = if alpha == 0.0 { self.rho_mu } else { self.tau_at_mu_series(alpha)? };
        let mu_opt = self.params.mu();
        let bases: Vec<f64> = mu_opt.map(|m| vec![m * (1.0 + a)]).unwrap_or_default();
        let eval = |x: Complex64| -> Result<SeriesEval> {
            let step = |z: Complex64| self.step_pure(z, alpha, dom);
            let mean = self.params.interarrival.mean();
            let bound = |r: f64| -> Option<(f64, [f64; 3])> {
                if matches!(dom, Domain::Continued) {
                    return None;
                }
                match mu_opt {
                    None => Some((1.0 / (1.0 + a), [mean, 0.0, 0.0])),
                    Some(mu) => {
                        let d = mu * (1.0 + a) - r;
                        if d <= mu {
                            return Some((f64::INFINITY, [0.0; 3]));
                        }
                        let jb = mu / d;
                        Some((jb, [mean, jb, 0.0]))
                    }
                }
            };
            let (_, ev) = self.iterate(x, &step, &bound, [1.0, -tau_mu.max(0.0), 0.0])?;
            Ok(ev)
        };
        if self.near_singular(s, &bases) {
            self.guarded(s, &eval)
        } else {
            eval(s)
        }
    }

    /// `tau(mu, alpha)` from the closed-form ratio obtained by substituting `s = mu`.
    fn tau_at_mu_series(&self, alpha: f64) -> Result<f64> {
        let a = self.params.a;
        let mu = self.params.mu().ok_or_else(|| Error::Unsupported("no additive gain".into()))?;
        let c = 1.0 + a;
        let law = &self.params.interarrival;
        let mean = law.mean();
        let mut num = 0.0;
        let mut den = 1.0;
        let mut prod = 1.0;
        let mut ck = 1.0; // (1+a)^k
        for _ in 0..self.control.max_terms {
            let mk = mu / ck;
            let x = Complex64::new(mk + alpha, 0.0);
            let phi = law.lst(x)?.re;
            let h = law.one_minus_lst_over_s(x)?.re;
            let j = phi * ck / (ck * c - 1.0);
            num += prod * h;
            prod *= j;
            den += prod;
            ck *= c;
            let jb = ck / (ck * c - 1.0);
            if jb < 1.0 && prod * (mean + 1.0) / (1.0 - jb) < 0.1 * self.control.tail_tolerance {
                return Ok(num / den);
            }
        }
        Err(Error::NonConvergence(self.control.max_terms))
    }

    /// Non-negative root `s0` of `mu - s - mu phi(s + alpha)` used when `a = 0`.
    fn a0_root(&self, alpha: f64) -> Result<f64> {
        let mu = self.params.mu().ok_or_else(|| Error::Unsupported("no additive gain".into()))?;
        let law = &self.params.interarrival;
        let g = |s: f64| -> Result<f64> { Ok(mu - s - mu * law.lst(Complex64::new(s + alpha, 0.0))?.re) };
        let mut lo = 0.0;
        if alpha == 0.0 {
            if mu * law.mean() <= 1.0 {
                return Ok(0.0);
            }
            let mut t = mu;
            let mut found = false;
            for _ in 0..200 {
                t *= 0.5;
                if g(t)? > 0.0 {
                    found = true;
                    break;
                }
            }
            if !found {
                return Ok(0.0);
            }
            lo = t;
        }
        let mut hi = mu;
        if g(hi)? >= 0.0 {
            return Err(Error::Root("no sign change for the a = 0 root".into()));
        }
        bisect(&g, &mut lo, &mut hi)?;
        Ok(0.5 * (lo + hi))
    }

    fn tau_at_mu_a0(&self, alpha: f64) -> Result<f64> {
        let s0 = self.a0_root(alpha)?;
        Ok(self.params.interarrival.one_minus_lst_over_s(Complex64::new(s0 + alpha, 0.0))?.re)
    }

    /// Closed form for `a = 0`.
    fn tau_a0(&self, s: Complex64, alpha: f64, dom: Domain) -> Result<SeriesEval> {
        let plain = |v: Complex64| SeriesEval { value: v, terms: 1, tail_bound: 0.0, guarded: false, late_ratio: 0.0 };
        let mu = match self.params.mu() {
            None => return Ok(plain((s + alpha).inv())),
            Some(mu) => mu,
        };
        let s0 = self.a0_root(alpha)?;
        let tau_mu = if alpha == 0.0 { self.rho_mu } else { self.tau_at_mu_a0(alpha)? };
        let eval = |x: Complex64| -> Result<SeriesEval> {
            let xa = x + alpha;
            let phi = self.phi(xa, dom)?;
            let h = self.surv(xa, dom)?;
            let den = mu - x - mu * phi;
            if den.norm() == 0.0 {
                return Err(Error::Pole(x));
            }
            Ok(plain((h * (mu - x) - phi * mu * tau_mu) / den))
        };
        if s0 > 0.0 && (s - s0).norm() < self.eps_sing {
            self.guarded(s, &eval)
        } else {
            eval(s)
        }
    }

    /// Residual `|rho(s) - J(s) rho(s/(1+a)) - H(s)|` of the functional equation.
    pub fn functional_residual(&self, s: Complex64) -> Result<f64> {
        let (h, j) = self.hj(s, self.rho_mu)?;
        let lhs = self.ruin_lt(s)?;
        let inner = self.ruin_lt(s / (1.0 + self.params.a))?;
        Ok((lhs - j * inner - h).norm())
    }

    /// Residual of the ruin-time functional equation at `(s, alpha)`.
    pub fn time_functional_residual(&self, s: Complex64, alpha: f64) -> Result<f64> {
        let tau_mu = if alpha == 0.0 {
            self.rho_mu
        } else if self.params.a == 0.0 {
            self.tau_at_mu_a0(alpha)?
        } else {
            self.tau_at_mu_series(alpha)?
        };
        let (j, h) = self.step_pure(s, alpha, Domain::Right)?;
        let h1 = h[0] - h[1] * tau_mu;
        let lhs = self.ruin_time_lt(s, alpha)?;
        let inner = self.ruin_time_lt(s / (1.0 + self.params.a), alpha)?;
        Ok((lhs - j * inner - h1).norm())
    }

    /// `tau(mu, alpha)`; equals `rho(mu)` at `alpha = 0`.
    pub fn tau_at_mu(&self, alpha: f64) -> Result<f64> {
        if alpha == 0.0 {
            return Ok(self.rho_mu);
        }
        if self.params.a == 0.0 {
            self.tau_at_mu_a0(alpha)
        } else {
            self.tau_at_mu_series(alpha)
        }
    }

    fn mixture_series(&self, s: Complex64, dom: Domain) -> Result<([Complex64; 3], SeriesEval)> {
        let step = |z: Complex64| self.step_mixture(z, dom);
        let bound = |_: f64| -> Option<(f64, [f64; 3])> { None };
        self.iterate(s, &step, &bound, [1.0, 1.0, 1.0])
    }

    fn solve_mixture_constants(&self) -> Result<MixtureConstants> {
        let mu = self.params.mu().ok_or_else(|| Error::Unsupported("no additive gain".into()))?;
        let p = self.params.mixture_p;
        let a = self.params.a;
        let (sm, _) = self.mixture_series(Complex64::new(mu, 0.0), Domain::Right)?;
        if p == 1.0 {
            let rho_mu = sm[0].re / (1.0 + sm[1].re);
            return Ok(MixtureConstants {
                rho_mu,
                rho_delta: 0.0,
                s1: f64::NAN,
                rho_s1_scaled: f64::NAN,
                condition_number: 1.0,
            });
        }
        let delta = self.params.delta.unwrap_or(f64::NAN);
        let s1 = rouche_root(&self.params)?;
        let law = &self.params.interarrival;
        let z1 = Complex64::new(s1, 0.0);
        let phi1 = law.lst(z1)?.re;
        let h0 = law.one_minus_lst_over_s(z1)?.re;
        let hmu = p * phi1 * mu / (mu * (1.0 + a) - s1);
        let hdel = (1.0 - p) * delta * phi1 / (delta - s1);
        let (ss, _) = self.mixture_series(Complex64::new(s1 / (1.0 + a), 0.0), Domain::Right)?;
        // unknowns (rho_mu, rho_delta, X = rho(s1/(1+a)))
        let m = vec![
            vec![1.0 + sm[1].re, sm[2].re, 0.0],
            vec![-hmu, -hdel, hmu],
            vec![ss[1].re, ss[2].re, 1.0],
        ];
        let rhs = vec![sm[0].re, -h0, ss[0].re];
        let DenseSolution { x, condition_number } = solve_dense(&m, &rhs)?;
        Ok(MixtureConstants { rho_mu: x[0], rho_delta: x[1], s1, rho_s1_scaled: x[2], condition_number })
    }

    fn generalized_eval(&self, s: Complex64, dom: Domain) -> Result<SeriesEval> {
        let mc = self
            .mixture
            .ok_or_else(|| Error::Unsupported("generalized transform requires a > 0 and an additive gain".into()))?;
        let a = self.params.a;
        let mu = self.params.mu().unwrap_or(f64::NAN);
        let mut bases = vec![mu * (1.0 + a)];
        if self.params.mixture_p < 1.0 {
            bases.push(mc.s1);
            bases.push(self.params.delta.unwrap_or(f64::NAN));
        }
        let eval = |x: Complex64| -> Result<SeriesEval> {
            let (acc, mut ev) = self.mixture_series(x, dom)?;
            ev.value = acc[0] - mc.rho_mu * acc[1] - mc.rho_delta * acc[2];
            Ok(ev)
        };
        if self.near_singular(s, &bases) {
            self.guarded(s, &eval)
        } else {
            eval(s)
        }
    }

    /// Transform of the mixture model evaluated through the 3-unknown iteration.
    /// With `p = 1` this is an independent route to [`RuinTransform::ruin_lt`].
    pub fn generalized_ruin_lt(&self, s: Complex64) -> Result<Complex64> {
        Self::check_right(s)?;
        Ok(self.generalized_eval(s, Domain::Right)?.value)
    }

    /// Bracket that must vanish at the Rouché root for `rho` to be analytic there,
    /// evaluated with `rho(s1/(1+a))` from the series rather than the solved constant.
    pub fn analyticity_residual(&self) -> Result<f64> {
        let mc = self.mixture.ok_or_else(|| Error::Unsupported("mixture constants unavailable".into()))?;
        if self.params.mixture_p == 1.0 {
            return Err(Error::Unsupported("no Rouché root when p = 1".into()));
        }
        let mu = self.params.mu().unwrap_or(f64::NAN);
        let p = self.params.mixture_p;
        let a = self.params.a;
        let delta = self.params.delta.unwrap_or(f64::NAN);
        let s1 = mc.s1;
        let law = &self.params.interarrival;
        let z1 = Complex64::new(s1, 0.0);
        let phi1 = law.lst(z1)?.re;
        let h0 = law.one_minus_lst_over_s(z1)?.re;
        let x = self.generalized_ruin_lt(Complex64::new(s1 / (1.0 + a), 0.0))?.re;
        let v = h0 + p * phi1 * mu / (mu * (1.0 + a) - s1) * (x - mc.rho_mu)
            - (1.0 - p) * delta * phi1 / (delta - s1) * mc.rho_delta;
        Ok(v.abs())
    }
}

fn bisect(g: &dyn Fn(f64) -> Result<f64>, lo: &mut f64, hi: &mut f64) -> Result<()> {
    let glo = g(*lo)?;
    let ghi = g(*hi)?;
    if glo.signum() == ghi.signum() && glo != 0.0 {
        return Err(Error::Root(format!("no sign change on [{lo}, {hi}]")));
    }
    for _ in 0..400 {
        let mid = 0.5 * (*lo + *hi);
        if mid <= *lo || mid >= *hi {
            break;
        }
        let gm = g(mid)?;
        if gm == 0.0 {
            *lo = mid;
            *hi = mid;
            break;
        }
        if gm.signum() == glo.signum() {
            *lo = mid;
        } else {
            *hi = mid;
        }
    }
    Ok(())
}

/// Unique positive root of `delta - s - (1 - p) delta phi(s)`, by bisection on
/// `[0, delta (2 - p) + 1]`.
pub fn rouche_root(params: &DualModelParams) -> Result<f64> {
    let p = params.mixture_p;
    let delta = params
        .delta
        .ok_or_else(|| Error::InvalidParam("the Rouché root needs delta (mixture_p < 1)".into()))?;
    let law = &params.interarrival;
    let g = |s: f64| -> Result<f64> { Ok(delta - s - (1.0 - p) * delta * law.lst(Complex64::new(s, 0.0))?.re) };
    let mut lo = 0.0;
    let mut hi = delta * (1.0 + (1.0 - p)) + 1.0;
    if !(g(lo)? > 0.0 && g(hi)? < 0.0) {
        return Err(Error::Root("no sign change located for the Rouché root".into()));
    }
    bisect(&g, &mut lo, &mut hi)?;
    Ok(0.5 * (lo + hi))
}

/// Positive root `zeta` of `zeta - lambda + lambda mu / (mu + zeta) = 0`, the decay
/// rate of `R(x) = e^{-zeta x}` for `a = 0` with `Exp(lambda)` interarrivals.
pub fn classical_decay_rate(lambda: f64, mu: f64) -> Result<f64> {
    // zeta (mu + zeta) - lambda (mu + zeta) + lambda mu = zeta^2 + (mu - lambda) zeta = 0
    let z = lambda - mu;
    if z > 0.0 {
        Ok(z)
    } else {
        Err(Error::Root("no positive root: ruin is certain".into()))
    }
}
