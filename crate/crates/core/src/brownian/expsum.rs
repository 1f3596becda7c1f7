//! Exponential-polynomial sums on a bounded interval `[0, len]`.
//!
//! Each term is `coef * z^pow * exp(rate * (z - anchor))` with the anchor at the
//! end of the interval where the exponential is largest, so every stored
//! coefficient is of the size of the term itself. Integration against the
//! two-sided resolvent kernel is exact in this representation, which lets the
//! lattice families be built by recursion without sampling.

use super::scale::ScaleFamily;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub pow: u32,
    pub rate: f64,
    pub anchor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpSum {
    pub len: f64,
    pub terms: Vec<Term>,
}

const DROP: f64 = 1e-300;

impl ExpSum {
    pub fn zero(len: f64) -> Self {
        Self { len, terms: vec![] }
    }

    pub fn constant(len: f64, c: f64) -> Self {
        let mut s = Self::zero(len);
        s.push(c, 0, 0.0, 0.0);
        s
    }

    /// The identity `z`.
    pub fn identity(len: f64) -> Self {
        let mut s = Self::zero(len);
        s.push(1.0, 1, 0.0, 0.0);
        s
    }

    /// Add `mult * z^pow * exp(rate * z + log_c)`, re-anchored.
    pub fn push(&mut self, mult: f64, pow: u32, rate: f64, log_c: f64) {
        let anchor = if rate > 0.0 { self.len } else { 0.0 };
        let coef = mult * (log_c + rate * anchor).exp();
        if coef.abs() * self.len.max(1.0).powi(pow as i32) < DROP || coef == 0.0 {
            return;
        }
        self.terms.push(Term { coef, pow, rate, anchor });
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef * z.powi(t.pow as i32) * (t.rate * (z - t.anchor)).exp())
            .sum()
    }

    /// `sum |term|` at `z`, a bound on the rounding scale of [`eval`](Self::eval).
    pub fn magnitude(&self, z: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| (t.coef * z.powi(t.pow as i32) * (t.rate * (z - t.anchor)).exp()).abs())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.terms.iter().all(|t| t.coef.is_finite())
    }

    /// `G(w) = F(c w)` on `[0, len / c]`.
    pub fn scale_argument(&self, c: f64) -> Self {
        let len = self.len / c;
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coef: t.coef * c.powi(t.pow as i32),
                pow: t.pow,
                rate: c * t.rate,
                anchor: if t.rate > 0.0 { len } else { 0.0 },
            })
            .collect();
        Self { len, terms }
    }

    /// Merge terms with the same power and (relatively) equal rate.
    pub fn simplify(mut self) -> Self {
        self.terms.sort_by(|a, b| a.pow.cmp(&b.pow).then(a.rate.total_cmp(&b.rate)));
        let mut out: Vec<Term> = Vec::with_capacity(self.terms.len());
        for t in self.terms {
            if let Some(last) = out.last_mut() {
                if last.pow == t.pow && (last.rate - t.rate).abs() <= 1e-13 * last.rate.abs().max(t.rate.abs()) {
                    last.coef += t.coef * (t.rate * (last.anchor - t.anchor)).exp();
                    continue;
                }
            }
            out.push(t);
        }
        let len = self.len;
        out.retain(|t| t.coef.abs() * len.max(1.0).powi(t.pow as i32) >= DROP);
        Self { len, terms: out }
    }

    /// `lambda * int_0^len u(z, w) self(w) dw` with `u` the resolvent density of
    /// the family on `(0, len)`.
    pub fn apply_resolvent(&self, family: &ScaleFamily, lambda: f64) -> Result<Self> {
        let (p, m, k) = (family.p, family.m, family.kappa);
        let len = self.len;
        let dn = family.d * (-(-k * len).exp_m1());
        // (sign, alpha, beta, gamma, region): sign * exp(alpha z + beta w + gamma)
        let kernel = [
            (1.0, p, -p, -k * len, Region::Lower),
            (1.0, -m, m, 0.0, Region::Lower),
            (1.0, p, -p, 0.0, Region::Upper),
            (1.0, -m, m, -k * len, Region::Upper),
            (-1.0, p, m, -k * len, Region::Full),
            (-1.0, -m, -p, 0.0, Region::Full),
        ];
        let mut out = ExpSum::zero(len);
        for t in &self.terms {
            for &(sign, alpha, beta, gamma, region) in &kernel {
                let s = beta + t.rate;
                let l0 = gamma - t.rate * t.anchor;
                let mult = sign * lambda * t.coef / dn;
                let kk = t.pow;
                if s == 0.0 {
                    // int w^k = w^{k+1}/(k+1)
                    let c = mult / (kk + 1) as f64;
                    match region {
                        Region::Lower => out.push(c, kk + 1, alpha, l0),
                        Region::Upper => {
                            out.push(c * len.powi(kk as i32 + 1), 0, alpha, l0);
                            out.push(-c, kk + 1, alpha, l0);
                        }
                        Region::Full => out.push(c * len.powi(kk as i32 + 1), 0, alpha, l0),
                    }
                    continue;
                }
                // I_k(x) = e^{s x} sum_j a_j x^{k-j} + b0
                let mut a = Vec::with_capacity(kk as usize + 1);
                let mut fall = 1.0;
                let mut sp = s;
                for j in 0..=kk {
                    let sign_j = if j % 2 == 0 { 1.0 } else { -1.0 };
                    a.push(sign_j * fall / sp);
                    fall *= (kk - j) as f64;
                    sp *= s;
                }
                let sign_k = if kk % 2 == 0 { 1.0 } else { -1.0 };
                let b0 = -sign_k * a_fact(kk) / s.powi(kk as i32 + 1);
                let at_len: f64 = a.iter().enumerate().map(|(j, aj)| aj * len.powi((kk as usize - j) as i32)).sum();
                match region {
                    Region::Lower => {
                        for (j, aj) in a.iter().enumerate() {
                            out.push(mult * aj, kk - j as u32, alpha + s, l0);
                        }
                        out.push(mult * b0, 0, alpha, l0);
                    }
                    Region::Upper => {
                        out.push(mult * at_len, 0, alpha, l0 + s * len);
                        for (j, aj) in a.iter().enumerate() {
                            out.push(-mult * aj, kk - j as u32, alpha + s, l0);
                        }
                    }
                    Region::Full => {
                        out.push(mult * at_len, 0, alpha, l0 + s * len);
                        out.push(mult * b0, 0, alpha, l0);
                    }
                }
            }
        }
        if !out.is_finite() {
            return Err(Error::Domain("overflow while applying the resolvent to an exponential sum".into()));
        }
        Ok(out.simplify())
    }
}

fn a_fact(k: u32) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Region {
    /// `w < z`
    Lower,
    /// `w > z`
    Upper,
    Full,
}

impl std::ops::Add for ExpSum {
    type Output = ExpSum;
    fn add(mut self, rhs: ExpSum) -> ExpSum {
        self.terms.extend(rhs.terms);
        self.simplify()
    }
}
