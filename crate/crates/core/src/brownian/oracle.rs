//! Direct quadrature reference for the family recursions.
//!
//! Uses the resolvent written literally as `W(x) W(D - y) / W(D) - W(x - y)`
//! and applies the jump operator by nested Gauss–Legendre quadrature, with no
//! use of the exponential-sum algebra. Meant for small `k` only: the cost grows
//! geometrically with the nesting depth.

use super::scale::ScaleFamily;
use crate::model::LatticeParams;
use crate::quadrature::{graded_panels, integrate_panels, GaussLegendre};

/// Which family to reproduce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// `r_{n, n-k}`
    Down,
    /// `omega_{n, n-k}`, `k >= 1`
    Up,
    /// `T_{n,0}`
    JumpOut,
    /// `v^J_n`
    Overflow,
}

pub struct NestedQuadrature<'a> {
    pub family: &'a ScaleFamily,
    pub lattice: &'a LatticeParams,
    rule: GaussLegendre,
}

impl<'a> NestedQuadrature<'a> {
    pub fn new(family: &'a ScaleFamily, lattice: &'a LatticeParams, nodes: usize) -> Self {
        Self { family, lattice, rule: GaussLegendre::new(nodes) }
    }

    fn u(&self, x: f64, y: f64, d: f64) -> f64 {
        let f = self.family;
        if x <= 0.0 || x >= d || y <= 0.0 || y >= d {
            return 0.0;
        }
        f.w(x) * f.w(d - y) / f.w(d) - f.w(x - y)
    }

    /// `lambda int_0^D u(z, w) g(w) dw` on interval `n`.
    fn jump(&self, n: usize, z: f64, g: &dyn Fn(f64) -> f64) -> f64 {
        let d = self.lattice.width(n);
        let layer = Some(1.0 / self.family.kappa);
        let f = |w: f64| self.u(z, w, d) * g(w);
        let mut acc = 0.0;
        for (lo, hi) in [(0.0, z), (z, d)] {
            acc += integrate_panels(&f, &graded_panels(lo, hi, layer, layer), &self.rule);
        }
        self.lattice.lambda * acc
    }

    /// Value at offset `z` of interval `n` of the family member `k` steps down
    /// the recursion (`k = 0` is the base case).
    pub fn eval(&self, kind: FamilyKind, n: usize, k: usize, z: f64) -> f64 {
        let c = 1.0 + self.lattice.a;
        let f = self.family;
        match (kind, k) {
            (FamilyKind::Down, 0) => f.xi(z, self.lattice.width(n)),
            (FamilyKind::Up, 1) => f.w(z) / f.w(self.lattice.width(n)),
            (FamilyKind::Up, 0) => 0.0,
            (FamilyKind::JumpOut, _) if n == 0 => 1.0,
            (FamilyKind::Overflow, _) if n == 0 => z,
            (FamilyKind::Down | FamilyKind::Up, _) => {
                self.jump(n, z, &|w| self.eval(kind, n - 1, k - 1, c * w))
            }
            (FamilyKind::JumpOut | FamilyKind::Overflow, _) => {
                self.jump(n, z, &|w| self.eval(kind, n - 1, 0, c * w))
            }
        }
    }
}
