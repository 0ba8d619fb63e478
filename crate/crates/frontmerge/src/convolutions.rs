//! Interaction integrals of the two-kink profile as functions of the phase gap η, the
//! derived constants Ĉ⁺ and κ₁ = κ₂, the map β(η), and the interpolated table.

use rayon::prelude::*;

use crate::error::{Error, NumericsError, Result};
use crate::numerics::{integrate_line_breaks, CubicSpline, QuadratureSpec};
use crate::profiles::{double_well, omega0, omega0_dot, omega_minus_one, omega_profile, one_minus_tanh, one_plus_tanh};

/// The five integrals entering the phase-field closure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionIntegrals {
    /// B_Ω = ∫Ω′_z(Ω′_z − Ω′_η)
    pub b_omega: f64,
    /// B^z_Ω = ∫[z(Ω′_z−Ω′_η) − (z+η)Ω′_η](Ω′_z−Ω′_η)
    pub bz_omega: f64,
    /// C_Ω = ∫(Ω′_z − Ω′_η)
    pub c_omega: f64,
    /// Ĉ = ½∫(Ω′_z)²
    pub c_hat: f64,
    /// D̂ = ½∫F(Ω), taken positive.
    pub d_hat: f64,
}

/// Both integrals scale like e^{4η} for η → −∞; the absolute tolerance follows so the
/// relative accuracy does not collapse.
fn scaled(spec: &QuadratureSpec, eta: f64, rate: f64) -> QuadratureSpec {
    let s = (rate * eta).exp().min(1.0).max(1e-290);
    QuadratureSpec { abs_tol: spec.abs_tol * s, ..*spec }
}

fn line(f: impl Fn(f64) -> f64, eta: f64, spec: &QuadratureSpec) -> std::result::Result<f64, NumericsError> {
    let breaks = [0.0, -eta, -0.5 * eta];
    integrate_line_breaks(f, &breaks, spec).map(|e| e.value)
}

/// F(Ω) written through Ω − 1 to keep precision when Ω ≈ 1.
fn double_well_of_omega(z: f64, eta: f64) -> f64 {
    let m = omega_minus_one(z, eta);
    if m.abs() < 0.25 {
        let p = m * (2.0 + m);
        0.25 * p * p
    } else {
        double_well(1.0 + m)
    }
}

pub fn interaction_integrals(eta: f64, spec: &QuadratureSpec) -> Result<InteractionIntegrals> {
    let s4 = scaled(spec, eta, 4.0);
    let s2 = scaled(spec, eta, 2.0);
    let wrap = |r: std::result::Result<f64, NumericsError>| r.map_err(|source| Error::Table { eta, source });
    let b_omega = wrap(line(
        |z| {
            let o = omega_profile(z, eta);
            o.dz * (o.dz - o.deta)
        },
        eta,
        &s4,
    ))?;
    let bz_omega = wrap(line(
        |z| {
            let o = omega_profile(z, eta);
            let g = o.dz - o.deta;
            (z * g - (z + eta) * o.deta) * g
        },
        eta,
        &s4,
    ))?;
    let c_omega = wrap(line(
        |z| {
            let o = omega_profile(z, eta);
            o.dz - o.deta
        },
        eta,
        &s2,
    ))?;
    let c_hat = wrap(line(
        |z| {
            let o = omega_profile(z, eta);
            0.5 * o.dz * o.dz
        },
        eta,
        &s4,
    ))?;
    let d_hat = wrap(line(|z| 0.5 * double_well_of_omega(z, eta), eta, &s4))?;
    Ok(InteractionIntegrals { b_omega, bz_omega, c_omega, c_hat, d_hat })
}

/// C_Ω through the reduced integrand ½ω̇₀(z)(1 − ω₀(−z−η)).
pub fn c_omega_reduced(eta: f64, spec: &QuadratureSpec) -> Result<f64> {
    let s2 = scaled(spec, eta, 2.0);
    line(|z| 0.5 * omega0_dot(z) * one_minus_tanh(-z - eta), eta, &s2).map_err(|source| Error::Table { eta, source })
}

/// B̃(η) = ∫(1 − ω₀(z+η)ω₀(z)) dz by quadrature.
pub fn btilde(eta: f64, spec: &QuadratureSpec) -> Result<f64> {
    let f = |z: f64| {
        let a = omega0(z);
        let b = omega0(z + eta);
        if a > 0.5 && b > 0.5 {
            one_minus_tanh(z) + a * one_minus_tanh(z + eta)
        } else if a < -0.5 && b < -0.5 {
            one_plus_tanh(z) - a * one_plus_tanh(z + eta)
        } else {
            1.0 - a * b
        }
    };
    let spec = QuadratureSpec { line_truncation_half_width: spec.line_truncation_half_width + eta.abs(), ..*spec };
    line(f, eta, &spec).map_err(|source| Error::Table { eta, source })
}

/// 2η·coth η, the closed form that the defining integral of B̃ matches (2 at η = 0).
pub fn btilde_coth(eta: f64) -> f64 {
    if eta.abs() < 1e-8 {
        2.0 + 2.0 * eta * eta / 3.0
    } else {
        2.0 * eta / eta.tanh()
    }
}

/// 2η·tanh η, the alternative closed form used by the η equation.
pub fn btilde_tanh(eta: f64) -> f64 {
    2.0 * eta * eta.tanh()
}

/// B_ȯ0 = ∫ω̇₀(z)ω₀(−η−z) and B^z_ȯ0 = ∫zω̇₀(z)ω₀(−η−z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinkConvolutions {
    pub b_dot0: f64,
    pub bz_dot0: f64,
}

pub fn kink_convolutions(eta: f64, spec: &QuadratureSpec) -> Result<KinkConvolutions> {
    let wrap = |r: std::result::Result<f64, NumericsError>| r.map_err(|source| Error::Table { eta, source });
    let b_dot0 = wrap(line(|z| omega0_dot(z) * omega0(-eta - z), eta, spec))?;
    let bz_dot0 = wrap(line(|z| z * omega0_dot(z) * omega0(-eta - z), eta, spec))?;
    Ok(KinkConvolutions { b_dot0, bz_dot0 })
}

/// Ĉ⁺ = ∫ω̇₀² dz (= 4/3).
pub fn c_plus(spec: &QuadratureSpec) -> Result<f64> {
    line(|z| omega0_dot(z).powi(2), 0.0, spec).map_err(Error::from)
}

/// Kinetic coefficients (κ₁, κ₂) = (Ĉ⁺, Ĉ⁺).
pub fn kinetic_coefficients(spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let c = c_plus(spec)?;
    Ok((c, c))
}

/// β(η) = √(D̂/Ĉ).
pub fn beta_of_eta(eta: f64, spec: &QuadratureSpec) -> Result<f64> {
    let i = interaction_integrals(eta, spec)?;
    Ok((i.d_hat / i.c_hat).sqrt())
}

/// One row of the interaction table.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TableRecord {
    pub eta: f64,
    pub b_omega: f64,
    pub bz_omega: f64,
    pub c_omega: f64,
    pub c_hat: f64,
    pub d_hat: f64,
    pub b_tilde: f64,
    pub b_dot0: f64,
    pub bz_dot0: f64,
    pub beta: f64,
}

impl TableRecord {
    pub const COLUMNS: [&'static str; 10] =
        ["eta", "B_Omega", "Bz_Omega", "C_Omega", "C_hat", "D_hat", "B_tilde", "B_dot0", "Bz_dot0", "beta"];

    pub fn compute(eta: f64, spec: &QuadratureSpec) -> Result<Self> {
        let i = interaction_integrals(eta, spec)?;
        let k = kink_convolutions(eta, spec)?;
        let b_tilde = btilde(eta, spec)?;
        Ok(Self {
            eta,
            b_omega: i.b_omega,
            bz_omega: i.bz_omega,
            c_omega: i.c_omega,
            c_hat: i.c_hat,
            d_hat: i.d_hat,
            b_tilde,
            b_dot0: k.b_dot0,
            bz_dot0: k.bz_dot0,
            beta: (i.d_hat / i.c_hat).sqrt(),
        })
    }

    pub fn as_array(&self) -> [f64; 10] {
        [
            self.eta,
            self.b_omega,
            self.bz_omega,
            self.c_omega,
            self.c_hat,
            self.d_hat,
            self.b_tilde,
            self.b_dot0,
            self.bz_dot0,
            self.beta,
        ]
    }

    fn from_array(a: [f64; 10]) -> Self {
        Self {
            eta: a[0],
            b_omega: a[1],
            bz_omega: a[2],
            c_omega: a[3],
            c_hat: a[4],
            d_hat: a[5],
            b_tilde: a[6],
            b_dot0: a[7],
            bz_dot0: a[8],
            beta: a[9],
        }
    }
}

/// Graded grid on `[eta_min, eta_max]` with `n` points, denser near 0.
pub fn graded_grid(eta_min: f64, eta_max: f64, n: usize) -> Vec<f64> {
    let span = eta_max - eta_min;
    let n_neg = (((-eta_min) / span) * (n - 1) as f64).round().max(2.0) as usize;
    let n_pos = (n - 1).saturating_sub(n_neg).max(2);
    let grade = 2.0;
    let map = |s: f64| (grade * s).sinh() / grade.sinh();
    let mut g: Vec<f64> = (0..n_neg).map(|i| eta_min * map(1.0 - i as f64 / n_neg as f64)).collect();
    g.extend((0..=n_pos).map(|i| eta_max * map(i as f64 / n_pos as f64)));
    g
}

/// η-sampled integrals with cubic interpolation. Immutable once built.
#[derive(Debug, Clone)]
pub struct InteractionTable {
    records: Vec<TableRecord>,
    splines: Vec<CubicSpline>,
}

impl InteractionTable {
    pub fn build(eta_min: f64, eta_max: f64, n_points: usize, spec: &QuadratureSpec) -> Result<Self> {
        if !(eta_min < 0.0 && eta_max > 0.0) {
            return Err(Error::Invalid("table range must straddle 0".into()));
        }
        if n_points < 64 {
            return Err(Error::Invalid("table needs at least 64 points".into()));
        }
        let grid = graded_grid(eta_min, eta_max, n_points);
        let records: Vec<TableRecord> =
            grid.par_iter().map(|&eta| TableRecord::compute(eta, spec)).collect::<Result<_>>()?;
        Self::from_records(records)
    }

    pub fn from_records(records: Vec<TableRecord>) -> Result<Self> {
        let x: Vec<f64> = records.iter().map(|r| r.eta).collect();
        let splines = (1..10)
            .map(|c| CubicSpline::new(x.clone(), records.iter().map(|r| r.as_array()[c]).collect()))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self { records, splines })
    }

    /// Copy with D̂ multiplied by `k` and β by √k.
    ///
    /// k = 2 puts a single kink at equipartition, (ε/2)ǔ_r² = F(ǔ)/ε.
    pub fn with_potential_scale(&self, k: f64) -> Result<Self> {
        if !(k > 0.0) {
            return Err(Error::Invalid("potential scale must be positive".into()));
        }
        let records = self
            .records
            .iter()
            .map(|r| TableRecord { d_hat: k * r.d_hat, beta: k.sqrt() * r.beta, ..*r })
            .collect();
        Self::from_records(records)
    }

    pub fn records(&self) -> &[TableRecord] {
        &self.records
    }

    pub fn eta_range(&self) -> (f64, f64) {
        (self.records[0].eta, self.records[self.records.len() - 1].eta)
    }

    fn clamp(&self, eta: f64) -> f64 {
        let (lo, hi) = self.eta_range();
        eta.clamp(lo, hi)
    }

    /// Interpolated record; η outside the table is clamped to the nearest end.
    pub fn eval(&self, eta: f64) -> TableRecord {
        let e = self.clamp(eta);
        let mut a = [0.0; 10];
        a[0] = eta;
        for (c, s) in self.splines.iter().enumerate() {
            a[c + 1] = s.eval(e);
        }
        TableRecord::from_array(a)
    }

    pub fn beta(&self, eta: f64) -> f64 {
        self.splines[8].eval(self.clamp(eta))
    }

    /// dβ/dη (zero beyond the table, where β is held constant).
    pub fn beta_prime(&self, eta: f64) -> f64 {
        let (lo, hi) = self.eta_range();
        if eta <= lo || eta >= hi {
            0.0
        } else {
            self.splines[8].deriv(eta)
        }
    }

    pub fn max_beta(&self) -> f64 {
        self.records.iter().map(|r| r.beta).fold(f64::MIN, f64::max)
    }

    /// Largest |interpolated − direct| over all columns at the probe points.
    pub fn interpolation_error(&self, probes: &[f64], spec: &QuadratureSpec) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &p in probes {
            let direct = TableRecord::compute(p, spec)?.as_array();
            let interp = self.eval(p).as_array();
            for c in 1..10 {
                worst = worst.max((direct[c] - interp[c]).abs());
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_grid_is_increasing_and_spans() {
        let g = graded_grid(-16.0, 16.0, 129);
        assert_eq!(g.len(), 129);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(g[0], -16.0);
        assert_eq!(*g.last().unwrap(), 16.0);
        assert!(g.contains(&0.0));
    }

    #[test]
    fn reduced_c_omega_matches_definition() {
        let s = QuadratureSpec::default();
        for eta in [-4.0, -1.0, 0.0, 1.0, 4.0] {
            let a = interaction_integrals(eta, &s).unwrap().c_omega;
            let b = c_omega_reduced(eta, &s).unwrap();
            assert!((a - b).abs() < 1e-8, "eta {eta}: {a} vs {b}");
        }
    }
}
