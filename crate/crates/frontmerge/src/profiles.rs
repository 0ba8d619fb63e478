//! Closed-form profiles: the tanh kink, the two-kink interaction profile Ω(z, η), the
//! double-well potential, the smooth switch B(τ), the cutoff e(r), polynomial bumps and a
//! mollified Heaviside step.

use crate::error::{Error, Result};

/// `1 − tanh x`, accurate for large positive `x`.
pub fn one_minus_tanh(x: f64) -> f64 {
    if x >= 0.0 {
        let e = (-2.0 * x).exp();
        2.0 * e / (1.0 + e)
    } else {
        2.0 / (1.0 + (2.0 * x).exp())
    }
}

/// `1 + tanh x`, accurate for large negative `x`.
pub fn one_plus_tanh(x: f64) -> f64 {
    one_minus_tanh(-x)
}

/// The kink ω₀(z) = tanh z.
pub fn omega0(z: f64) -> f64 {
    z.tanh()
}

/// ω̇₀(z) = sech² z.
pub fn omega0_dot(z: f64) -> f64 {
    let e = (-2.0 * z.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// Ω together with its partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaValue {
    pub value: f64,
    pub dz: f64,
    pub deta: f64,
}

/// Ω(z, η) = ½{1 + ω₀(z) + ω₀(−z−η) − ω₀(z)ω₀(−z−η)} and its analytic partials.
///
/// Evaluated as `1 − ½(1−ω₀(z))(1−ω₀(−z−η))` so that the `Ω → 1` regime keeps full
/// relative accuracy in `Ω − 1`.
pub fn omega_profile(z: f64, eta: f64) -> OmegaValue {
    let one_m_a = one_minus_tanh(z);
    let one_m_b = one_minus_tanh(-z - eta);
    let a_dot = omega0_dot(z);
    let b_dot = omega0_dot(z + eta);
    OmegaValue {
        value: 1.0 - 0.5 * one_m_a * one_m_b,
        dz: 0.5 * a_dot * one_m_b - 0.5 * b_dot * one_m_a,
        deta: -0.5 * b_dot * one_m_a,
    }
}

/// `Ω − 1`, kept separate because it is exponentially small for η → −∞.
pub fn omega_minus_one(z: f64, eta: f64) -> f64 {
    -0.5 * one_minus_tanh(z) * one_minus_tanh(-z - eta)
}

/// F(u) = u⁴/4 − u²/2 + 1/4 = (u² − 1)²/4.
pub fn double_well(u: f64) -> f64 {
    let w = u * u - 1.0;
    0.25 * w * w
}

/// F′(u) = u³ − u.
pub fn double_well_prime(u: f64) -> f64 {
    u * u * u - u
}

/// The smooth switch B(τ) = ½(1 + tanh(kτ)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Switch {
    pub steepness: f64,
}

impl Default for Switch {
    fn default() -> Self {
        Self { steepness: 1.0 }
    }
}

impl Switch {
    pub fn value(&self, tau: f64) -> f64 {
        0.5 * one_plus_tanh(self.steepness * tau)
    }

    pub fn deriv(&self, tau: f64) -> f64 {
        0.5 * self.steepness * omega0_dot(self.steepness * tau)
    }

    /// A(τ) = ∫_{−∞}^{τ} B, i.e. ln(1 + e^{2kτ}) / (2k).
    pub fn antideriv(&self, tau: f64) -> f64 {
        let x = 2.0 * self.steepness * tau;
        let v = if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
        v / (2.0 * self.steepness)
    }
}

/// Parameters of the switch and of the cutoff e(r).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileParams {
    pub switch_steepness: f64,
    /// e ≡ 1 on this interval.
    pub cutoff_inner: (f64, f64),
    /// Support of e.
    pub cutoff_outer: (f64, f64),
}

impl Default for ProfileParams {
    fn default() -> Self {
        Self { switch_steepness: 1.0, cutoff_inner: (1.25, 2.75), cutoff_outer: (1.05, 2.95) }
    }
}

impl ProfileParams {
    pub fn validate(&self, r_min: f64, r_max: f64) -> Result<()> {
        let (il, ir) = self.cutoff_inner;
        let (ol, or) = self.cutoff_outer;
        if !(self.switch_steepness > 0.0) {
            return Err(Error::Invalid("switch steepness must be positive".into()));
        }
        if !(ol < il && il < ir && ir < or) {
            return Err(Error::Invalid("cutoff inner interval must sit strictly inside the outer one".into()));
        }
        if !(r_min < ol && or < r_max) {
            return Err(Error::Invalid("cutoff support must sit strictly inside the domain".into()));
        }
        Ok(())
    }

    pub fn switch(&self) -> Switch {
        Switch { steepness: self.switch_steepness }
    }

    /// e(r) with its first two derivatives.
    pub fn cutoff(&self, r: f64) -> (f64, f64, f64) {
        let (il, ir) = self.cutoff_inner;
        let (ol, or) = self.cutoff_outer;
        let wl = il - ol;
        let wr = or - ir;
        let (a, da, dda) = smooth_step((r - ol) / wl);
        let (b, db, ddb) = smooth_step((or - r) / wr);
        let (da, dda) = (da / wl, dda / (wl * wl));
        let (db, ddb) = (-db / wr, ddb / (wr * wr));
        (a * b, da * b + a * db, dda * b + 2.0 * da * db + a * ddb)
    }
}

fn bump_phi(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let p = (-1.0 / x).exp();
    let x2 = x * x;
    (p, p / x2, p * (1.0 / (x2 * x2) - 2.0 / (x2 * x)))
}

/// C^∞ step from 0 (x ≤ 0) to 1 (x ≥ 1) with its first two derivatives.
pub fn smooth_step(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let (p, dp, ddp) = bump_phi(x);
    let (q0, dq0, ddq0) = bump_phi(1.0 - x);
    let (q, dq, ddq) = (q0, -dq0, ddq0);
    let s = p + q;
    let n = dp * q - p * dq;
    let dn = ddp * q - p * ddq;
    let d = s * s;
    let dd = 2.0 * s * (dp + dq);
    (p / s, n / d, (dn * d - n * dd) / (d * d))
}

/// Smooth step ½(1 + tanh((x − x₀)/ε)).
pub fn mollified_heaviside(x: f64, x0: f64, eps: f64) -> f64 {
    0.5 * one_plus_tanh((x - x0) / eps)
}

/// Polynomial bump `(1 − s²)⁴`, `s = (r − center)/half_width`, zero outside.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Bump {
    pub center: f64,
    pub half_width: f64,
}

impl Bump {
    pub fn new(center: f64, half_width: f64) -> Self {
        Self { center, half_width }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }

    /// Value and first two derivatives.
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        let w = self.half_width;
        let s = (r - self.center) / w;
        if s.abs() >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        let q = 1.0 - s * s;
        let q2 = q * q;
        let v = q2 * q2;
        let d = -8.0 * s * q2 * q / w;
        let dd = (-8.0 * q2 * q + 48.0 * s * s * q2) / (w * w);
        (v, d, dd)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    /// ∫ bump dr = (256/315)·half_width.
    pub fn integral(&self) -> f64 {
        256.0 / 315.0 * self.half_width
    }
}
