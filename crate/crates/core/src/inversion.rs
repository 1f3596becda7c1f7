//! Numerical Laplace inversion: Euler summation along a Bromwich line and the
//! fixed Talbot contour, with a cross-check between the two.

use crate::transforms::RuinTransform;
use crate::{Complex64, Error, Result};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InversionMethod {
    EulerSummation,
    Talbot,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionControl {
    pub method: InversionMethod,
    /// Number of transform evaluations, `2M + 1`.
    pub terms: usize,
    /// Bromwich abscissa parameter `A` of the Euler method.
    pub contour_shift: f64,
    pub precision_target: f64,
}

impl Default for InversionControl {
    fn default() -> Self {
        Self { method: InversionMethod::EulerSummation, terms: 51, contour_shift: 18.4, precision_target: 1e-7 }
    }
}

impl InversionControl {
    pub fn validate(&self) -> Result<()> {
        if self.terms < 11 || self.terms % 2 == 0 {
            return Err(Error::InvalidParam(format!("terms must be odd and >= 11, got {}", self.terms)));
        }
        if !(self.contour_shift > 0.0) {
            return Err(Error::InvalidParam("contour_shift must be > 0".into()));
        }
        if !(self.precision_target > 0.0) {
            return Err(Error::InvalidParam("precision_target must be > 0".into()));
        }
        Ok(())
    }

    fn half(&self) -> usize {
        (self.terms - 1) / 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InversionFlag {
    /// The two methods differ by more than ten times the precision target.
    MethodDisagreement { euler: f64, talbot: f64 },
    /// The cross-check could not run (no continuation of the transform).
    CrossCheckUnavailable(String),
    /// A probability left `[-eps, 1 + eps]` before clamping.
    Clamped { raw: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inversion {
    pub value: f64,
    /// Heuristic error estimate of the selected method.
    pub error_estimate: f64,
    pub method: InversionMethod,
    pub flags: Vec<InversionFlag>,
}

pub type Transform<'a> = &'a dyn Fn(Complex64) -> Result<Complex64>;

fn binomial_average(partial: &[f64], start: usize, m: usize) -> f64 {
    let mut coef = 1.0;
    let mut acc = 0.0;
    let scale = 0.5f64.powi(m as i32);
    for j in 0..=m {
        acc += coef * partial[start + j];
        coef = coef * (m - j) as f64 / (j + 1) as f64;
    }
    acc * scale
}

/// Euler summation with binomial averaging of the last `M + 1` partial sums.
pub fn euler(f: Transform, t: f64, control: &InversionControl) -> Result<(f64, f64)> {
    check_time(t)?;
    let m = control.half();
    let n = m;
    let a = control.contour_shift;
    let scale = (a / 2.0).exp() / t;
    let mut partial = Vec::with_capacity(n + m + 1);
    let mut sum = 0.5 * f(Complex64::new(a / (2.0 * t), 0.0))?.re;
    partial.push(sum * scale);
    for k in 1..=(n + m) {
        let s = Complex64::new(a, 2.0 * k as f64 * PI) / (2.0 * t);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * f(s)?.re;
        partial.push(sum * scale);
    }
    let est = binomial_average(&partial, n, m);
    let prev = binomial_average(&partial, n - 1, m);
    let err = (est - prev).abs() + (-a).exp();
    Ok((est, err))
}

/// Fixed Talbot contour with `M` nodes. The transform must be continued into `Re(s) < 0`.
pub fn talbot(f: Transform, t: f64, control: &InversionControl) -> Result<(f64, f64)> {
    check_time(t)?;
    let m = control.half();
    let eval = |m: usize| -> Result<f64> {
        let r = 2.0 * m as f64 / (5.0 * t);
        let mut acc = 0.5 * f(Complex64::new(r, 0.0))?.re * (r * t).exp();
        for k in 1..m {
            let th = k as f64 * PI / m as f64;
            let cot = th.cos() / th.sin();
            let s = Complex64::new(r * th * cot, r * th);
            let sigma = th + (th * cot - 1.0) * cot;
            acc += ((s * t).exp() * f(s)? * Complex64::new(1.0, sigma)).re;
        }
        Ok(acc * r / m as f64)
    };
    let v = eval(m)?;
    let coarse = eval(m - 2)?;
    Ok((v, (v - coarse).abs()))
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("inversion point must be finite and > 0, got {t}")))
    }
}

/// Invert with the method selected in `control`.
pub fn invert(f: Transform, x: f64, control: &InversionControl) -> Result<Inversion> {
    control.validate()?;
    let (value, error_estimate) = match control.method {
        InversionMethod::EulerSummation => euler(f, x, control)?,
        InversionMethod::Talbot => talbot(f, x, control)?,
    };
    Ok(Inversion { value, error_estimate, method: control.method, flags: vec![] })
}

/// Invert with the selected method and cross-check against the other one.
/// `continued` must evaluate the transform on the whole Talbot contour; when it
/// is `None` the check is skipped and flagged.
pub fn invert_checked(
    right: Transform,
    continued: Option<Transform>,
    x: f64,
    control: &InversionControl,
) -> Result<Inversion> {
    control.validate()?;
    let (e, e_err) = euler(right, x, control)?;
    let talbot_res = match continued {
        Some(g) => talbot(g, x, control).map_err(|err| err.to_string()),
        None => Err("transform has no continuation to Re(s) <= 0".to_string()),
    };
    let mut flags = vec![];
    let (value, error_estimate) = match (&talbot_res, control.method) {
        (Ok((tv, terr)), InversionMethod::Talbot) => (*tv, *terr),
        (Err(msg), InversionMethod::Talbot) => return Err(Error::Unsupported(msg.clone())),
        _ => (e, e_err),
    };
    match talbot_res {
        Ok((tv, _)) => {
            if (tv - e).abs() > 10.0 * control.precision_target {
                flags.push(InversionFlag::MethodDisagreement { euler: e, talbot: tv });
            }
        }
        Err(msg) => flags.push(InversionFlag::CrossCheckUnavailable(msg)),
    }
    Ok(Inversion { value, error_estimate, method: control.method, flags })
}

fn clamp_probability(mut inv: Inversion, eps: f64) -> Inversion {
    let raw = inv.value;
    if !(raw >= -eps && raw <= 1.0 + eps) {
        inv.flags.push(InversionFlag::Clamped { raw });
    }
    inv.value = raw.clamp(0.0, 1.0);
    inv
}

/// Ruin probability `R(x)` by inverting the transform, clamped to `[0, 1]`.
pub fn ruin_probability(x: f64, rt: &RuinTransform, control: &InversionControl) -> Result<Inversion> {
    let right = |s: Complex64| rt.ruin_lt(s);
    let cont = |s: Complex64| rt.ruin_lt_continued(s);
    let has_cont = !matches!(rt.params().interarrival, crate::model::InterarrivalSpec::Deterministic { .. });
    let inv = invert_checked(&right, if has_cont { Some(&cont) } else { None }, x, control)?;
    Ok(clamp_probability(inv, control.precision_target))
}

/// `E[exp(-alpha tau_x); tau_x < inf]` by inverting `tau(., alpha)` in the initial capital.
pub fn ruin_time_transform(x: f64, alpha: f64, rt: &RuinTransform, control: &InversionControl) -> Result<Inversion> {
    let right = |s: Complex64| rt.ruin_time_lt(s, alpha);
    let cont = |s: Complex64| rt.ruin_time_lt_continued(s, alpha);
    let has_cont = !matches!(rt.params().interarrival, crate::model::InterarrivalSpec::Deterministic { .. });
    let inv = invert_checked(&right, if has_cont { Some(&cont) } else { None }, x, control)?;
    Ok(clamp_probability(inv, control.precision_target))
}
