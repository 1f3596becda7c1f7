//! Uniformly sampled functions on `[0, U]` with trapezoid convolution.

use crate::{Error, Result};

/// Samples of a function on the uniform grid `x_i = i h`, `i = 0..=m`, with
/// piecewise-linear interpolation between nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub upper: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn from_fn(upper: f64, intervals: usize, f: impl Fn(f64) -> f64) -> Self {
        assert!(upper > 0.0 && intervals >= 1);
        let step = upper / intervals as f64;
        let values = (0..=intervals).map(|i| f(i as f64 * step)).collect();
        Self { upper, step, values }
    }

    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    /// Linear interpolation; exact at nodes.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0 && x <= self.upper * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!("x = {x} outside [0, {}]", self.upper)));
        }
        let pos = x / self.step;
        let i = (pos.floor() as usize).min(self.intervals());
        if i == self.intervals() {
            return Ok(self.values[i]);
        }
        let t = pos - i as f64;
        Ok(self.values[i] * (1.0 - t) + self.values[i + 1] * t)
    }

    /// `x -> f(c x)`, resampled on the same grid; requires `c x` to stay in range
    /// wherever it is evaluated, values beyond the grid are taken as `outside`.
    pub fn scale_argument(&self, c: f64, outside: f64) -> Self {
        let values = (0..=self.intervals())
            .map(|i| self.eval(c * self.node(i)).unwrap_or(outside))
            .collect();
        Self { upper: self.upper, step: self.step, values }
    }

    /// Trapezoid convolution `(f * g)(x_i) = int_0^{x_i} f(y) g(x_i - y) dy`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.values.len() != other.values.len() || (self.step - other.step).abs() > 1e-15 * self.step {
            return Err(Error::InvalidParam("convolution needs identical grids".into()));
        }
        let n = self.values.len();
        let f = &self.values;
        let g = &other.values;
        let mut out = vec![0.0; n];
        for (i, o) in out.iter_mut().enumerate().skip(1) {
            let mut acc = 0.5 * (f[0] * g[i] + f[i] * g[0]);
            for j in 1..i {
                acc += f[j] * g[i - j];
            }
            *o = acc * self.step;
        }
        Ok(Self { upper: self.upper, step: self.step, values: out })
    }

    /// Running integral `int_0^{x_i} f` by the trapezoid rule.
    pub fn cumulative_integral(&self) -> Self {
        let mut out = vec![0.0; self.values.len()];
        for i in 1..self.values.len() {
            out[i] = out[i - 1] + 0.5 * self.step * (self.values[i - 1] + self.values[i]);
        }
        Self { upper: self.upper, step: self.step, values: out }
    }

    /// Combine two solutions on grids `h` and `h/2` (the latter with twice the
    /// intervals) into an `O(h^4)` Richardson estimate on the coarse grid.
    pub fn richardson(coarse: &Self, fine: &Self) -> Result<Self> {
        if fine.intervals() != 2 * coarse.intervals() {
            return Err(Error::InvalidParam("fine grid must have twice the intervals".into()));
        }
        let values = coarse
            .values
            .iter()
            .enumerate()
            .map(|(i, c)| (4.0 * fine.values[2 * i] - c) / 3.0)
            .collect();
        Ok(Self { upper: coarse.upper, step: coarse.step, values })
    }

    /// Largest absolute difference between two grids at the coarse nodes.
    pub fn max_difference(coarse: &Self, fine: &Self) -> f64 {
        coarse
            .values
            .iter()
            .enumerate()
            .map(|(i, c)| (fine.values[2 * i] - c).abs())
            .fold(0.0, f64::max)
    }
}
