//! Scale functions of `X(t) = eta t + sigma B(t)` killed at rate `q`.
//!
//! With `D = sqrt(eta^2 + 2 q sigma^2)`, `p = (D - eta)/sigma^2 = Phi(q)` and
//! `m = (D + eta)/sigma^2`:
//!
//! ```text
//! W(x)  = (e^{p x} - e^{-m x}) / D
//! Z(x)  = 1 + q int_0^x W = q/(D p) e^{p x} + q/(D m) e^{-m x}
//! ```
//!
//! Every two-sided quantity below is written in a form whose exponentials are
//! bounded by one on the relevant domain, so the functions stay accurate when
//! `p` is large (small `sigma`).

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleFamily {
    /// Killing rate used by the scale functions.
    pub q: f64,
    pub eta: f64,
    pub sigma: f64,
    pub d: f64,
    /// `Phi(q)`, right inverse of the Laplace exponent.
    pub p: f64,
    pub m: f64,
    /// `p + m = 2 D / sigma^2`.
    pub kappa: f64,
}

impl ScaleFamily {
    pub fn new(q: f64, eta: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite() && eta.is_finite() && q >= 0.0 && q.is_finite()) {
            return Err(Error::InvalidParam("scale family needs sigma > 0, finite eta, q >= 0".into()));
        }
        if q == 0.0 && eta == 0.0 {
            return Err(Error::InvalidParam("q = 0 with eta = 0 has no exponential scale function".into()));
        }
        let s2 = sigma * sigma;
        let d = (eta * eta + 2.0 * q * s2).sqrt();
        // products p m = 2 q / sigma^2 avoid the cancelling difference
        let (p, m) = if eta <= 0.0 {
            let p = (d - eta) / s2;
            (p, 2.0 * q / (d - eta))
        } else {
            let m = (d + eta) / s2;
            (2.0 * q / (d + eta), m)
        };
        Ok(Self { q, eta, sigma, d, p, m, kappa: 2.0 * d / s2 })
    }

    /// Laplace exponent `psi(theta) = eta theta + sigma^2 theta^2 / 2`.
    pub fn psi(&self, theta: f64) -> f64 {
        self.eta * theta + 0.5 * self.sigma * self.sigma * theta * theta
    }

    /// `Phi(q)`.
    pub fn phi(&self) -> f64 {
        self.p
    }

    /// `W(x)` (zero for `x < 0`), in the factored form `e^{p x}(1 - e^{-kappa x})/D`.
    pub fn w(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        (self.p * x).exp() * (-(-self.kappa * x).exp_m1()) / self.d
    }

    /// `ln W(x)` for `x > 0`.
    pub fn ln_w(&self, x: f64) -> f64 {
        self.p * x + (-(-self.kappa * x).exp_m1()).ln() - self.d.ln()
    }

    pub fn w_prime(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        (self.p * (self.p * x).exp() + self.m * (-self.m * x).exp()) / self.d
    }

    /// `int_0^x W`.
    pub fn wbar(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let up = (self.p * x).exp_m1() / self.p;
        let down = if self.m > 0.0 { -(-self.m * x).exp_m1() / self.m } else { x };
        (up - down) / self.d
    }

    /// `Z(x) = 1 + q int_0^x W`, equal to `1` for `x <= 0`.
    pub fn z(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        1.0 + self.q * self.wbar(x)
    }

    /// `E_z[e^{-q tau}; exit below 0 before D]` for `z` in `[0, D]`.
    pub fn xi(&self, z: f64, width: f64) -> f64 {
        let den = -(-self.kappa * width).exp_m1();
        ((-self.m * z).exp() - (self.p * (z - width) - self.m * width).exp()) / den
    }

    /// `W(z) / W(D)`: `E_z[e^{-q tau}; exit above D before 0]`.
    pub fn omega(&self, z: f64, width: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        let den = -(-self.kappa * width).exp_m1();
        (self.p * (z - width)).exp() * (-(-self.kappa * z).exp_m1()) / den
    }

    /// Resolvent density of the process killed at rate `q` and on leaving `(0, D)`:
    /// `W(x) W(D - y) / W(D) - W(x - y)`.
    pub fn resolvent_local(&self, x: f64, y: f64, width: f64) -> f64 {
        if !(x > 0.0 && x < width && y > 0.0 && y < width) {
            return 0.0;
        }
        let (p, m, k) = (self.p, self.m, self.kappa);
        let den = self.d * (-(-k * width).exp_m1());
        let common = -(p * (x - width) - m * (width - y)).exp() - (-p * y - m * x).exp();
        let v = if x >= y {
            (p * (x - y - width) - m * width).exp() + (-m * (x - y)).exp() + common
        } else {
            (p * (x - y)).exp() + (-m * (x - y) - k * width).exp() + common
        };
        (v / den).max(0.0)
    }

    /// Resolvent density `u(x, y)` on `(alpha, beta)`.
    pub fn resolvent_u(&self, x: f64, y: f64, alpha: f64, beta: f64) -> f64 {
        self.resolvent_local(x - alpha, y - alpha, beta - alpha)
    }

    /// Resolvent density of the process reflected at `b`, killed at rate `q` and
    /// below `alpha`: `W(x-alpha) W'(b-y) / W'(b-alpha) - W(x-y)`.
    pub fn reflected_resolvent_mu(&self, x: f64, y: f64, alpha: f64, b: f64) -> f64 {
        if !(x > alpha && x <= b && y > alpha && y < b) {
            return 0.0;
        }
        let (p, m, k) = (self.p, self.m, self.kappa);
        let den = p + m * (-k * (b - alpha)).exp();
        if x >= y {
            let head = m * (p * (x - b) - m * (b - y)).exp()
                - p * (-p * (y - alpha) - m * (x - alpha)).exp()
                - m * (p * (x - y) - k * (x - alpha + b - y)).exp()
                - m * (p * (x - y - b + alpha) - m * (b - alpha)).exp();
            (head / (self.d * den) + (-m * (x - y)).exp() / self.d).max(0.0)
        } else {
            let lead = -(-k * (x - alpha)).exp_m1();
            (lead * (p * (x - y)).exp() * (p + m * (-k * (b - y)).exp()) / (den * self.d)).max(0.0)
        }
    }

    /// `W(x - alpha) / W'(b - alpha)`: discounted dividends of the reflected process
    /// started at `x` until it is killed or leaves `(alpha, b]` downwards.
    pub fn dividend_ratio(&self, x: f64, alpha: f64, b: f64) -> f64 {
        let u = x - alpha;
        let v = b - alpha;
        if u <= 0.0 {
            return 0.0;
        }
        (self.p * (u - v)).exp() * (-(-self.kappa * u).exp_m1()) / (self.p + self.m * (-self.kappa * v).exp())
    }

    /// `W(b - alpha) / W'(b - alpha)`.
    pub fn eta_dividend(&self, b: f64, alpha: f64) -> f64 {
        self.dividend_ratio(b, alpha, b)
    }

    /// `E_x[e^{-q tau_alpha}]` for the process reflected at `b`:
    /// `Z(x - alpha) - q W(b - alpha) W(x - alpha) / W'(b - alpha)`.
    pub fn reflected_exit_lt(&self, x: f64, alpha: f64, b: f64) -> f64 {
        let u = x - alpha;
        let v = b - alpha;
        if u <= 0.0 {
            return 1.0;
        }
        if self.q == 0.0 {
            return 1.0;
        }
        let (p, m, k) = (self.p, self.m, self.kappa);
        let a_coef = self.q / (self.d * p);
        let b_coef = self.q / (self.d * m);
        let den = p + m * (-k * v).exp();
        let bracket = m * (p * (u - v) - m * v).exp() + p * (-m * u).exp() + p * (p * (u - v) - m * v).exp()
            - p * (p * u - k * (u + v)).exp();
        (a_coef * bracket / den + b_coef * (-m * u).exp()).clamp(0.0, 1.0)
    }
}
