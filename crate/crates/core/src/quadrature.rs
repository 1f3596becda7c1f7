//! Gauss–Legendre rules and composite quadrature on panels graded towards
//! boundary layers.

use crate::{Error, Result};
use std::f64::consts::PI;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let p = if n == 1 { x } else { p1 };
                let pm = if n == 1 { 1.0 } else { p0 };
                dp = nf * (x * p - pm) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
    }
}

/// Split `[a, b]` into panels whose widths grow geometrically (factor 2) away
/// from the ends flagged with a layer width, starting at a quarter of that width.
pub fn graded_panels(a: f64, b: f64, left_layer: Option<f64>, right_layer: Option<f64>) -> Vec<(f64, f64)> {
    let len = b - a;
    if !(len > 0.0) {
        return vec![];
    }
    let coarse = len / 4.0;
    let ramp = |layer: Option<f64>| -> Vec<f64> {
        let mut w = vec![];
        if let Some(l) = layer {
            let mut x = (0.25 * l).min(coarse);
            let mut used = 0.0;
            while x < coarse && used + x < 0.5 * len {
                w.push(x);
                used += x;
                x *= 2.0;
            }
        }
        w
    };
    let lw = ramp(left_layer);
    let rw = ramp(right_layer);
    let lsum: f64 = lw.iter().sum();
    let rsum: f64 = rw.iter().sum();
    let mut cuts = vec![a];
    let mut x = a;
    for w in &lw {
        x += w;
        cuts.push(x);
    }
    let mid_a = a + lsum;
    let mid_b = b - rsum;
    let nmid = (((mid_b - mid_a) / coarse).ceil() as usize).max(1);
    for k in 1..nmid {
        cuts.push(mid_a + (mid_b - mid_a) * k as f64 / nmid as f64);
    }
    let mut y = b;
    let mut rc = vec![];
    for w in &rw {
        rc.push(y);
        y -= w;
    }
    cuts.push(mid_b);
    rc.reverse();
    for c in rc {
        if c > *cuts.last().unwrap_or(&a) {
            cuts.push(c);
        }
    }
    if *cuts.last().unwrap_or(&a) < b {
        cuts.push(b);
    }
    cuts.dedup_by(|u, v| (*u - *v).abs() <= 0.0);
    cuts.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1])).collect()
}

/// Composite Gauss–Legendre over the given panels.
pub fn integrate_panels(f: &dyn Fn(f64) -> f64, panels: &[(f64, f64)], rule: &GaussLegendre) -> f64 {
    panels.iter().map(|&(a, b)| rule.integrate(f, a, b)).sum()
}

/// Integrate with `nodes` per panel and again with `2 nodes`; fail when the two
/// differ by more than `rel_tol` relative to `max(|value|, scale)`.
pub fn integrate_checked(
    f: &dyn Fn(f64) -> f64,
    panels: &[(f64, f64)],
    nodes: usize,
    rel_tol: f64,
    scale: f64,
) -> Result<f64> {
    let lo = integrate_panels(f, panels, &GaussLegendre::new(nodes));
    let hi = integrate_panels(f, panels, &GaussLegendre::new(2 * nodes));
    let diff = (hi - lo).abs();
    if diff > rel_tol * hi.abs().max(scale) {
        return Err(Error::Quadrature(format!(
            "node doubling changed the value by {diff:e} (value {hi:e})"
        )));
    }
    Ok(hi)
}
