//! Model parameters, interarrival laws and drift classification.
//!
//! Between gain epochs the capital decreases at unit rate. At a gain epoch the
//! capital jumps from `u` to `(1 + a) u + C` with `C ~ Exp(mu)`; in the mixture
//! variant this happens with probability `p`, and otherwise the capital jumps to
//! `u + D` with `D ~ Exp(delta)`.

use crate::{Complex64, Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Exp1};

/// Poles closer than this (absolute) are treated as hits.
const POLE_EPS: f64 = 1e-300;

/// Renewal interarrival law. Every variant has a closed-form LST.
#[derive(Debug, Clone, PartialEq)]
pub enum InterarrivalSpec {
    Exponential { rate: f64 },
    Erlang { shape: u32, rate: f64 },
    Deterministic { d: f64 },
    HyperExponential { weights: Vec<f64>, rates: Vec<f64> },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!("{name} must be finite and > 0, got {v}")))
    }
}

impl InterarrivalSpec {
    pub fn exponential(rate: f64) -> Result<Self> {
        let s = Self::Exponential { rate };
        s.validate()?;
        Ok(s)
    }

    pub fn erlang(shape: u32, rate: f64) -> Result<Self> {
        let s = Self::Erlang { shape, rate };
        s.validate()?;
        Ok(s)
    }

    pub fn deterministic(d: f64) -> Result<Self> {
        let s = Self::Deterministic { d };
        s.validate()?;
        Ok(s)
    }

    pub fn hyper_exponential(weights: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        let s = Self::HyperExponential { weights, rates };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Exponential { rate } => positive("rate", *rate),
            Self::Erlang { shape, rate } => {
                if *shape == 0 {
                    return Err(Error::InvalidParam("Erlang shape must be >= 1".into()));
                }
                positive("rate", *rate)
            }
            Self::Deterministic { d } => positive("d", *d),
            Self::HyperExponential { weights, rates } => {
                if weights.is_empty() || weights.len() != rates.len() {
                    return Err(Error::InvalidParam(
                        "hyperexponential weights and rates must be non-empty and of equal length".into(),
                    ));
                }
                for (&w, &r) in weights.iter().zip(rates) {
                    positive("weight", w)?;
                    positive("rate", r)?;
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidParam(format!(
                        "hyperexponential weights must sum to 1 within 1e-12, got {total}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Smallest rate of the law, i.e. minus the abscissa of its first pole.
    /// `None` for the deterministic law, whose LST is entire.
    pub fn min_rate(&self) -> Option<f64> {
        match self {
            Self::Exponential { rate } | Self::Erlang { rate, .. } => Some(*rate),
            Self::Deterministic { .. } => None,
            Self::HyperExponential { rates, .. } => Some(rates.iter().cloned().fold(f64::INFINITY, f64::min)),
        }
    }

    fn check_domain(&self, s: Complex64) -> Result<()> {
        if let Some(r) = self.min_rate() {
            if s.re <= -r {
                return Err(Error::LstPole { re: s.re, bound: -r });
            }
        }
        Ok(())
    }

    /// LST `phi(s) = E[exp(-s T)]`, restricted to its half-plane of absolute convergence.
    pub fn lst(&self, s: Complex64) -> Result<Complex64> {
        self.check_domain(s)?;
        self.lst_continued(s)
    }

    /// Meromorphic continuation of the LST to the whole plane (errors only at poles).
    pub fn lst_continued(&self, s: Complex64) -> Result<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        match self {
            Self::Exponential { rate } => {
                let den = s + rate;
                nonzero(den, s)?;
                Ok(*rate / den)
            }
            Self::Erlang { shape, rate } => {
                let den = s + rate;
                nonzero(den, s)?;
                Ok((*rate / den).powu(*shape))
            }
            Self::Deterministic { d } => {
                if s == Complex64::new(0.0, 0.0) {
                    return Ok(one);
                }
                Ok((-s * d).exp())
            }
            Self::HyperExponential { weights, rates } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (&w, &r) in weights.iter().zip(rates) {
                    let den = s + r;
                    nonzero(den, s)?;
                    acc += w * r / den;
                }
                Ok(acc)
            }
        }
    }

    /// `(1 - phi(s)) / s`, the transform of the survival function, evaluated
    /// without cancellation near `s = 0` (value `mean()` there).
    pub fn one_minus_lst_over_s(&self, s: Complex64) -> Result<Complex64> {
        self.check_domain(s)?;
        self.one_minus_lst_over_s_continued(s)
    }

    pub fn one_minus_lst_over_s_continued(&self, s: Complex64) -> Result<Complex64> {
        match self {
            Self::Exponential { rate } => {
                let den = s + rate;
                nonzero(den, s)?;
                Ok(den.inv())
            }
            Self::Erlang { shape, rate } => {
                let den = s + rate;
                nonzero(den, s)?;
                let ratio = *rate / den;
                let mut term = den.inv();
                let mut acc = Complex64::new(0.0, 0.0);
                for _ in 0..*shape {
                    acc += term;
                    term *= ratio;
                }
                Ok(acc)
            }
            Self::Deterministic { d } => {
                let z = s * d;
                if z.norm() < 0.5 {
                    // d * sum_j (-z)^j / (j+1)!
                    let mut term = Complex64::new(1.0, 0.0);
                    let mut acc = term;
                    for j in 1..30 {
                        term *= -z / (j as f64 + 1.0);
                        acc += term;
                        if term.norm() < 1e-18 * acc.norm() {
                            break;
                        }
                    }
                    Ok(acc * d)
                } else {
                    Ok((1.0 - (-z).exp()) / s)
                }
            }
            Self::HyperExponential { weights, rates } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (&w, &r) in weights.iter().zip(rates) {
                    let den = s + r;
                    nonzero(den, s)?;
                    acc += w / den;
                }
                Ok(acc)
            }
        }
    }

    /// Density `f(t)`. The deterministic law has none.
    pub fn density(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Ok(0.0);
        }
        match self {
            Self::Exponential { rate } => Ok(rate * (-rate * t).exp()),
            Self::Erlang { shape, rate } => {
                if t == 0.0 {
                    return Ok(if *shape == 1 { *rate } else { 0.0 });
                }
                let k = *shape as f64;
                let log_fact: f64 = (1..*shape).map(|i| (i as f64).ln()).sum();
                Ok((k * rate.ln() + (k - 1.0) * t.ln() - rate * t - log_fact).exp())
            }
            Self::Deterministic { .. } => Err(Error::NoDensity("deterministic interarrival is a point mass".into())),
            Self::HyperExponential { weights, rates } => {
                Ok(weights.iter().zip(rates).map(|(w, r)| w * r * (-r * t).exp()).sum())
            }
        }
    }

    /// Survival function `1 - F(t)`, computed directly.
    pub fn survival(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 1.0;
        }
        match self {
            Self::Exponential { rate } => (-rate * t).exp(),
            Self::Erlang { shape, rate } => {
                let x = rate * t;
                let mut term = 1.0;
                let mut acc = 1.0;
                for i in 1..*shape {
                    term *= x / i as f64;
                    acc += term;
                }
                (acc.ln() - x).exp()
            }
            Self::Deterministic { d } => {
                if t < *d {
                    1.0
                } else {
                    0.0
                }
            }
            Self::HyperExponential { weights, rates } => {
                weights.iter().zip(rates).map(|(w, r)| w * (-r * t).exp()).sum()
            }
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        1.0 - self.survival(t)
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::Erlang { shape, rate } => *shape as f64 / rate,
            Self::Deterministic { d } => *d,
            Self::HyperExponential { weights, rates } => weights.iter().zip(rates).map(|(w, r)| w / r).sum(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Self::Exponential { rate } => 1.0 / (rate * rate),
            Self::Erlang { shape, rate } => *shape as f64 / (rate * rate),
            Self::Deterministic { .. } => 0.0,
            Self::HyperExponential { weights, rates } => {
                let m2: f64 = weights.iter().zip(rates).map(|(w, r)| 2.0 * w / (r * r)).sum();
                let m = self.mean();
                m2 - m * m
            }
        }
    }

    /// Draw one interarrival time.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Exponential { rate } => {
                let e: f64 = Exp1.sample(rng);
                e / rate
            }
            Self::Erlang { shape, rate } => {
                let mut acc = 0.0;
                for _ in 0..*shape {
                    let e: f64 = Exp1.sample(rng);
                    acc += e;
                }
                acc / rate
            }
            Self::Deterministic { d } => *d,
            Self::HyperExponential { weights, rates } => {
                let u: f64 = rng.random();
                let mut cum = 0.0;
                let mut idx = rates.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    cum += w;
                    if u < cum {
                        idx = i;
                        break;
                    }
                }
                let e: f64 = Exp1.sample(rng);
                e / rates[idx]
            }
        }
    }
}

fn nonzero(den: Complex64, s: Complex64) -> Result<()> {
    if den.norm() <= POLE_EPS {
        Err(Error::Pole(s))
    } else {
        Ok(())
    }
}

/// Size law of the additive part `C` of a proportional gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdditiveGain {
    /// `C ~ Exp(mu)`.
    Exponential { mu: f64 },
    /// `C = 0`: pure proportional gains.
    NoAdditiveGain,
}

/// Full parameterisation of the renewal model.
#[derive(Debug, Clone, PartialEq)]
pub struct DualModelParams {
    pub a: f64,
    pub gain: AdditiveGain,
    pub interarrival: InterarrivalSpec,
    /// Probability that a gain is proportional-plus-additive; `1` is the pure model.
    pub mixture_p: f64,
    /// Rate of the alternative additive jump `D ~ Exp(delta)`, used iff `mixture_p < 1`.
    pub delta: Option<f64>,
}

impl DualModelParams {
    pub fn new(a: f64, mu: f64, interarrival: InterarrivalSpec) -> Result<Self> {
        let p = Self { a, gain: AdditiveGain::Exponential { mu }, interarrival, mixture_p: 1.0, delta: None };
        p.validate()?;
        Ok(p)
    }

    pub fn without_additive_gain(a: f64, interarrival: InterarrivalSpec) -> Result<Self> {
        let p = Self { a, gain: AdditiveGain::NoAdditiveGain, interarrival, mixture_p: 1.0, delta: None };
        p.validate()?;
        Ok(p)
    }

    /// Mixture variant: with probability `p` the gain is `a u + C`, otherwise `D ~ Exp(delta)`.
    pub fn with_mixture(mut self, p: f64, delta: f64) -> Result<Self> {
        self.mixture_p = p;
        self.delta = if p < 1.0 { Some(delta) } else { None };
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a >= 0.0) {
            return Err(Error::InvalidParam(format!("a must be finite and >= 0, got {}", self.a)));
        }
        if let AdditiveGain::Exponential { mu } = self.gain {
            positive("mu", mu)?;
        }
        self.interarrival.validate()?;
        if !(0.0..=1.0).contains(&self.mixture_p) {
            return Err(Error::InvalidParam(format!("mixture_p must lie in [0, 1], got {}", self.mixture_p)));
        }
        match (self.mixture_p < 1.0, self.delta) {
            (true, Some(d)) => positive("delta", d),
            (true, None) => Err(Error::InvalidParam("delta is required when mixture_p < 1".into())),
            (false, Some(_)) => Err(Error::InvalidParam("delta must be absent when mixture_p = 1".into())),
            (false, None) => Ok(()),
        }
    }

    /// Rate of the additive gain, `None` for pure proportional gains.
    pub fn mu(&self) -> Option<f64> {
        match self.gain {
            AdditiveGain::Exponential { mu } => Some(mu),
            AdditiveGain::NoAdditiveGain => None,
        }
    }

    /// Expected additive part of a gain (proportional part excluded).
    pub fn mean_additive_jump(&self) -> f64 {
        let c = self.mu().map_or(0.0, |m| 1.0 / m);
        match self.delta {
            Some(d) => self.mixture_p * c + (1.0 - self.mixture_p) / d,
            None => c,
        }
    }
}

/// Long-run behaviour of the capital process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftClass {
    /// Ruin has probability strictly below one.
    Transient,
    /// Ruin is certain.
    CertainRuin,
    /// Zero drift: ruin is certain but the boundary case is reported separately.
    Critical,
}

/// Classify the drift. With `a > 0` the capital escapes to infinity with
/// positive probability. With `a = 0` ruin is certain iff the mean interarrival
/// time is at least the mean gain.
pub fn classify_drift(params: &DualModelParams) -> DriftClass {
    if params.a > 0.0 {
        return DriftClass::Transient;
    }
    let m = params.interarrival.mean();
    let g = params.mean_additive_jump();
    if (m - g).abs() <= 1e-12 * m.max(g) {
        DriftClass::Critical
    } else if m > g {
        DriftClass::CertainRuin
    } else {
        DriftClass::Transient
    }
}

/// Level lattice for pure proportional gains with Poisson arrivals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParams {
    pub b: f64,
    pub n_levels: usize,
    pub lambda: f64,
    pub q: f64,
    pub a: f64,
}

/// Largest supported lattice size.
pub const MAX_LEVELS: usize = 512;

impl LatticeParams {
    pub fn new(b: f64, n_levels: usize, lambda: f64, q: f64, a: f64) -> Result<Self> {
        let p = Self { b, n_levels, lambda, q, a };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("b", self.b)?;
        positive("lambda", self.lambda)?;
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::InvalidParam("lattice requires a > 0".into()));
        }
        if !(self.q.is_finite() && self.q >= 0.0) {
            return Err(Error::InvalidParam(format!("q must be finite and >= 0, got {}", self.q)));
        }
        if self.n_levels < 2 || self.n_levels > MAX_LEVELS {
            return Err(Error::InvalidParam(format!(
                "number of levels must lie in [2, {MAX_LEVELS}], got {}",
                self.n_levels
            )));
        }
        Ok(())
    }

    /// `L_n = b / (1 + a)^n`.
    pub fn level(&self, n: usize) -> f64 {
        self.b / (1.0 + self.a).powi(n as i32)
    }

    pub fn levels(&self) -> Vec<f64> {
        (0..=self.n_levels).map(|n| self.level(n)).collect()
    }

    /// Width of interval `n`, `L_{n-1} - L_n`, for `n >= 1`.
    pub fn width(&self, n: usize) -> f64 {
        self.level(n) * self.a
    }

    /// Interval index `n` with `L_n < x <= L_{n-1}`; `None` outside `(L_N, b]`.
    pub fn interval_of(&self, x: f64) -> Option<usize> {
        if !(x > self.level(self.n_levels) && x <= self.b) {
            return None;
        }
        let c = 1.0 + self.a;
        let mut n = ((self.b / x).ln() / c.ln()).ceil().max(1.0) as usize;
        // repair rounding at the lattice points
        while n > 1 && x > self.level(n - 1) {
            n -= 1;
        }
        while x <= self.level(n) {
            n += 1;
        }
        Some(n.min(self.n_levels))
    }
}
