//! Mollified Heaviside calculus: the weak identities for smoothed steps and bumps checked by
//! halving ε against a polynomial-bump test function.

use crate::error::Result;
use crate::numerics::{fit_loglog_slope, integrate_interval_breaks, integrate_line, QuadratureSpec};
use crate::profiles::{mollified_heaviside, omega0_dot, Bump};

/// Defects of one identity over an ε sequence.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ExampleResult {
    pub name: &'static str,
    pub eps: Vec<f64>,
    pub defects: Vec<f64>,
    /// Least-squares slope of log defect against log ε.
    pub order: f64,
}

fn heaviside(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

/// Smooth step ½(1 + tanh(z − shift)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub shift: f64,
}

impl Step {
    pub fn value(&self, z: f64) -> f64 {
        mollified_heaviside(z, self.shift, 1.0)
    }

    pub fn deriv(&self, z: f64) -> f64 {
        0.5 * omega0_dot(z - self.shift)
    }

    /// ∫(ω − H) dz = −shift.
    pub fn excess(&self) -> f64 {
        -self.shift
    }
}

/// B₁(ρ) = ∫ω̇₁(z)ω₂(z + ρ)dz, the weight of H(x − x₁) in the product of two steps with
/// x₁ − x₂ = ρε.
pub fn product_weight(w1: Step, w2: Step, rho: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(integrate_line(|z| w1.deriv(z) * w2.value(z + rho), spec)?.value)
}

fn finish(name: &'static str, eps: &[f64], defects: Vec<f64>) -> Result<ExampleResult> {
    let pts: Vec<(f64, f64)> = eps.iter().zip(&defects).map(|(&e, &d)| (e, d.max(1e-300))).collect();
    let order = fit_loglog_slope(&pts)?.slope;
    Ok(ExampleResult { name, eps: eps.to_vec(), defects, order })
}

fn pairing(f: impl Fn(f64) -> f64, zeta: &Bump, breaks: &[f64], spec: &QuadratureSpec) -> Result<f64> {
    let (a, b) = zeta.support();
    Ok(integrate_interval_breaks(|x| f(x) * zeta.value(x), a, b, breaks, spec)?.value)
}

/// (1/ε)⟨ω((x − x₀)/ε), ζ⟩ − ζ(x₀)∫ω for the unit-mass bump ω(z) = ½sech²(z − ½).
pub fn example_delta(zeta: &Bump, x0: f64, eps: &[f64], spec: &QuadratureSpec) -> Result<ExampleResult> {
    let step = Step { shift: 0.5 };
    let defects = eps
        .iter()
        .map(|&e| Ok((pairing(|x| step.deriv((x - x0) / e) / e, zeta, &[x0], spec)? - zeta.value(x0)).abs()))
        .collect::<Result<Vec<_>>>()?;
    finish("delta", eps, defects)
}

/// ⟨ω((x − x₀)/ε) − H(x − x₀), ζ⟩.
pub fn example_step(zeta: &Bump, x0: f64, eps: &[f64], spec: &QuadratureSpec) -> Result<ExampleResult> {
    let step = Step { shift: 0.5 };
    let defects = eps
        .iter()
        .map(|&e| Ok(pairing(|x| step.value((x - x0) / e) - heaviside(x - x0), zeta, &[x0], spec)?.abs()))
        .collect::<Result<Vec<_>>>()?;
    finish("step", eps, defects)
}

/// ⟨ω₁((x−x₁)/ε)ω₂((x−x₂)/ε) − B₁H(x−x₁) − (1−B₁)H(x−x₂), ζ⟩ with x₁ − x₂ = ρε.
pub fn example_product(zeta: &Bump, x2: f64, rho: f64, eps: &[f64], spec: &QuadratureSpec) -> Result<ExampleResult> {
    let (w1, w2) = (Step { shift: 0.3 }, Step { shift: -0.2 });
    let b1 = product_weight(w1, w2, rho, spec)?;
    let defects = eps
        .iter()
        .map(|&e| {
            let x1 = x2 + rho * e;
            let f = |x: f64| {
                w1.value((x - x1) / e) * w2.value((x - x2) / e) - b1 * heaviside(x - x1) - (1.0 - b1) * heaviside(x - x2)
            };
            Ok(pairing(f, zeta, &[x1.min(x2), x1.max(x2)], spec)?.abs())
        })
        .collect::<Result<Vec<_>>>()?;
    finish("product", eps, defects)
}

/// ⟨H(x−x₁)H(x−x₂) − B H(x−x₁) − (1−B)H(x−x₂), ζ⟩ with x₁ − x₂ = ρε and B = B₁(ρ).
pub fn example_heaviside_product(
    zeta: &Bump,
    x2: f64,
    rho: f64,
    eps: &[f64],
    spec: &QuadratureSpec,
) -> Result<ExampleResult> {
    let b = product_weight(Step { shift: 0.0 }, Step { shift: 0.0 }, rho, spec)?;
    let defects = eps
        .iter()
        .map(|&e| {
            let x1 = x2 + rho * e;
            let f = |x: f64| heaviside(x - x1) * heaviside(x - x2) - b * heaviside(x - x1) - (1.0 - b) * heaviside(x - x2);
            Ok(pairing(f, zeta, &[x1.min(x2), x1.max(x2)], spec)?.abs())
        })
        .collect::<Result<Vec<_>>>()?;
    finish("heaviside-product", eps, defects)
}

/// ⟨d/dx[ω((x−x₀)/ε) − H(x−x₀)], ζ⟩ evaluated as −⟨ω − H, ζ′⟩; also returns the largest
/// mismatch against the direct form (1/ε)⟨ω̇, ζ⟩ − ζ(x₀).
pub fn example_derivative(zeta: &Bump, x0: f64, eps: &[f64], spec: &QuadratureSpec) -> Result<(ExampleResult, f64)> {
    let step = Step { shift: 0.5 };
    let (a, b) = zeta.support();
    let mut mismatch: f64 = 0.0;
    let defects = eps
        .iter()
        .map(|&e| {
            let moved = -integrate_interval_breaks(
                |x| (step.value((x - x0) / e) - heaviside(x - x0)) * zeta.eval(x).1,
                a,
                b,
                &[x0],
                spec,
            )?
            .value;
            let direct = pairing(|x| step.deriv((x - x0) / e) / e, zeta, &[x0], spec)? - zeta.value(x0);
            mismatch = mismatch.max((moved - direct).abs());
            Ok(moved.abs())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((finish("derivative", eps, defects)?, mismatch))
}

/// All five identities with the default test function, points and ε sequence.
pub fn example_suite(spec: &QuadratureSpec) -> Result<Vec<ExampleResult>> {
    let zeta = Bump::new(2.0, 2.0);
    let eps = [0.08, 0.04, 0.02, 0.01];
    Ok(vec![
        example_delta(&zeta, 1.6, &eps, spec)?,
        example_step(&zeta, 1.6, &eps, spec)?,
        example_product(&zeta, 1.6, 0.7, &eps, spec)?,
        example_heaviside_product(&zeta, 1.6, 0.7, &eps, spec)?,
        example_derivative(&zeta, 1.6, &eps, spec)?.0,
    ])
}
