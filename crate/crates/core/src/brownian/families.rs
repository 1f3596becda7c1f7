//! Recursive exit families on the level lattice.
//!
//! For `x` in interval `n` (between `L_n` and `L_{n-1}`), with `z = x - L_n`:
//!
//! * `r[n][k](z)`: discounted probability that the first lattice exit is a
//!   continuous down-crossing of `L_{n-k}`,
//! * `omega[n][k](z)`: the same for an up-crossing of `L_{n-k}` (`k >= 1`),
//! * `t[n](z)`: discounted probability of leaving through `L_0 = b` by a jump,
//! * `vj[n](z)`: the discounted overflow above `b` paid on that jump.
//!
//! The first jump moves `x` to `(1 + a) x`, which lands in interval `n - 1` at
//! offset `(1 + a) z`. Writing `K_n F(z) = lambda int_0^{D_n} u_n(z, w) F((1 + a) w) dw`
//! every family with `k >= 1` (or `k >= 2` for `omega`) is `K_n` applied to the
//! matching family of interval `n - 1`. The base cases are the two-sided exit
//! transforms of the Brownian part with killing rate `q + lambda`.

use super::expsum::ExpSum;
use super::scale::ScaleFamily;
use crate::model::LatticeParams;
use crate::Result;

/// Coefficient tables of every family as exact exponential sums.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    /// `widths[n] = L_{n-1} - L_n`; `widths[0] = a b` (overflow range reachable from interval 1).
    pub widths: Vec<f64>,
    pub r: Vec<Vec<ExpSum>>,
    /// `omega[n][k]` for `k = 1..=n`; `omega[n][0]` is identically zero.
    pub omega: Vec<Vec<ExpSum>>,
    pub t: Vec<ExpSum>,
    pub vj: Vec<ExpSum>,
}

/// `xi_n` as an exponential sum on `[0, width]`.
pub fn xi_expsum(family: &ScaleFamily, width: f64) -> ExpSum {
    let (p, m, k) = (family.p, family.m, family.kappa);
    let den = -(-k * width).exp_m1();
    let mut s = ExpSum::zero(width);
    s.push(1.0 / den, 0, -m, 0.0);
    s.push(-1.0 / den, 0, p, -p * width - m * width);
    s
}

/// `W(z) / W(width)` as an exponential sum on `[0, width]`.
pub fn omega_expsum(family: &ScaleFamily, width: f64) -> ExpSum {
    let (p, m, k) = (family.p, family.m, family.kappa);
    let den = -(-k * width).exp_m1();
    let mut s = ExpSum::zero(width);
    s.push(1.0 / den, 0, p, -p * width);
    s.push(-1.0 / den, 0, -m, -p * width);
    s
}

impl CoeffTable {
    /// Build every family for intervals `1..=N`.
    pub fn build(lattice: &LatticeParams, family: &ScaleFamily) -> Result<Self> {
        let n_levels = lattice.n_levels;
        let c = 1.0 + lattice.a;
        let lambda = lattice.lambda;
        let mut widths = vec![lattice.a * lattice.b];
        widths.extend((1..=n_levels).map(|n| lattice.width(n)));

        let mut r: Vec<Vec<ExpSum>> = vec![vec![]];
        let mut omega: Vec<Vec<ExpSum>> = vec![vec![ExpSum::zero(widths[0])]];
        let mut t = vec![ExpSum::constant(widths[0], 1.0)];
        let mut vj = vec![ExpSum::identity(widths[0])];

        for n in 1..=n_levels {
            let d = widths[n];
            let k_op = |f: &ExpSum| f.scale_argument(c).apply_resolvent(family, lambda);
            let mut rn = vec![xi_expsum(family, d)];
            for k in 1..n {
                rn.push(k_op(&r[n - 1][k - 1])?);
            }
            let mut wn = vec![ExpSum::zero(d), omega_expsum(family, d)];
            for k in 2..=n {
                wn.push(k_op(&omega[n - 1][k - 1])?);
            }
            t.push(k_op(&t[n - 1])?);
            vj.push(k_op(&vj[n - 1])?);
            r.push(rn);
            omega.push(wn);
        }
        Ok(Self { widths, r, omega, t, vj })
    }

    pub fn n_levels(&self) -> usize {
        self.widths.len() - 1
    }

    /// Coefficients of the lattice values for a point at offset `z` of interval
    /// `n`: `(weights[j] for value j, T weight, v^J)`.
    pub fn weights(&self, n: usize, z: f64) -> (Vec<f64>, f64, f64) {
        let mut w = vec![0.0; self.n_levels() + 1];
        if n == 0 {
            return (w, 1.0, z);
        }
        for (k, f) in self.r[n].iter().enumerate() {
            w[n - k] += f.eval(z);
        }
        for (k, f) in self.omega[n].iter().enumerate().skip(1) {
            w[n - k] += f.eval(z);
        }
        (w, self.t[n].eval(z), self.vj[n].eval(z))
    }
}
