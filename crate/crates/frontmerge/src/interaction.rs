//! The closure system on the interaction variable τ = ψ₀/ε: the phase gap η(τ), the kink
//! steepness β(τ), ρ = η/β, the phase shifts, and the regularized front positions.

use rayon::prelude::*;

use crate::convolutions::InteractionTable;
use crate::error::{Error, Result};
use crate::numerics::{integrate_interval, solve_bracketed, Hermite, QuadratureSpec};
use crate::profiles::Switch;
use crate::stefan::FrontTrajectory;

/// Orientation of the switch multiplying r₁₀ₜ + r₂₀ₜ in the phase-shift sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SwitchOrientation {
    /// W(τ) = 1 − B(τ): off before contact, on after it.
    Reflected,
    /// W(τ) = B(τ).
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionParams {
    pub tau_min: f64,
    pub tau_max: f64,
    pub d_tau: f64,
    pub switch: Switch,
    pub orientation: SwitchOrientation,
    /// η below this counts as "η = 0" for the contact velocity diagnostic.
    pub eta_zero_tol: f64,
}

impl Default for InteractionParams {
    fn default() -> Self {
        Self {
            tau_min: -120.0,
            tau_max: 200.0,
            d_tau: 0.05,
            switch: Switch::default(),
            orientation: SwitchOrientation::Reflected,
            eta_zero_tol: 1e-12,
        }
    }
}

impl InteractionParams {
    /// Uniform grid of spacing `d_tau` placed so that τ = 0 falls mid-cell.
    pub fn grid(&self) -> Result<Vec<f64>> {
        if !(self.tau_min < 0.0 && self.tau_max > 0.0 && self.d_tau > 0.0) {
            return Err(Error::Invalid("tau grid must straddle 0 with positive spacing".into()));
        }
        let m = (-self.tau_min / self.d_tau - 0.5).ceil();
        let start = -(m + 0.5) * self.d_tau;
        let n = ((self.tau_max - start) / self.d_tau).ceil() as usize;
        Ok((0..=n).map(|k| start + k as f64 * self.d_tau).collect())
    }
}

/// G(η) = η(1 + tanh η).
pub fn g_eta(eta: f64) -> f64 {
    eta * (1.0 + eta.tanh())
}

fn g_eta_prime(eta: f64) -> f64 {
    let c = eta.cosh();
    1.0 + eta.tanh() + eta / (c * c)
}

/// Solves η(1 + tanh η) = 2β(η)A(τ) at one node: fixed point on β around a bracketed
/// solve for η. Returns (η, residual).
pub fn solve_eta_at(tau: f64, table: &InteractionTable, switch: &Switch) -> Result<(f64, f64)> {
    let a = switch.antideriv(tau);
    if a == 0.0 {
        return Ok((0.0, 0.0));
    }
    let mut beta = table.beta(0.0);
    let mut eta = 0.0;
    let mut damping = 1.0;
    let mut last_step = f64::INFINITY;
    for _ in 0..100 {
        let y = 2.0 * beta * a;
        eta = solve_bracketed(|e| g_eta(e) - y, 0.0, y, 1e-15 * y)?;
        let next = table.beta(eta);
        let step = (next - beta).abs();
        if step <= 1e-15 * beta {
            let res = g_eta(eta) - 2.0 * next * a;
            return Ok((eta, res));
        }
        if step > 0.9 * last_step {
            damping *= 0.5;
        }
        last_step = step;
        beta += damping * (next - beta);
    }
    Err(Error::NoContraction { tau, last: eta })
}

/// η on every node of `tau_grid`, nodes solved independently.
pub fn solve_eta(tau_grid: &[f64], table: &InteractionTable, switch: &Switch) -> Result<Vec<(f64, f64)>> {
    tau_grid.par_iter().map(|&t| solve_eta_at(t, table, switch)).collect()
}

/// dη/dτ from differentiating the η equation.
pub fn eta_tau(eta: f64, tau: f64, table: &InteractionTable, switch: &Switch) -> f64 {
    let beta = table.beta(eta);
    let denom = g_eta_prime(eta) - 2.0 * table.beta_prime(eta) * switch.antideriv(tau);
    2.0 * beta * switch.value(tau) / denom
}

/// The η-integrand of the phase-shift sum: 2β′/β² · B^z_Ω/(B_Ω + C_Ω).
pub fn phase_sum_density(eta: f64, table: &InteractionTable) -> Result<f64> {
    let rec = table.eval(eta);
    let denom = rec.b_omega + rec.c_omega;
    if !(denom.abs() > 1e-8) {
        return Err(Error::DenominatorFloor { eta, value: denom });
    }
    let beta = table.beta(eta);
    Ok(2.0 * table.beta_prime(eta) / (beta * beta) * rec.bz_omega / denom)
}

/// τ-sampled solution of the closure system.
#[derive(Debug, Clone)]
pub struct InteractionSolution {
    pub tau: Vec<f64>,
    pub eta: Vec<f64>,
    pub eta_tau: Vec<f64>,
    pub beta: Vec<f64>,
    pub rho: Vec<f64>,
    pub rho_tau: Vec<f64>,
    /// D = τ·d = ρ − τ − L.
    pub big_d: Vec<f64>,
    /// S = τ·(second part of s) = 2∫₀^τ (β′_τ/β²)·B^z_Ω/(B_Ω+C_Ω).
    pub big_s: Vec<f64>,
    pub s_tau: Vec<f64>,
    /// Largest |η(1+tanh η) − 2β(η)A(τ)| over the nodes.
    pub eta_residual: f64,
    /// L = lim (ρ − τ), τ → +∞.
    pub limit_l: f64,
    pub params: InteractionParams,
    table: InteractionTable,
    eta_h: Hermite,
    d_h: Hermite,
    s_h: Hermite,
}

/// Everything the ansatz needs at one (t, ε).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FrontPair {
    pub t: f64,
    pub tau: f64,
    pub r1: f64,
    pub r2: f64,
    pub r1t: f64,
    pub r2t: f64,
    pub eta: f64,
    pub beta: f64,
    /// dβ/dt.
    pub beta_t: f64,
    /// dβ/dτ.
    pub beta_tau: f64,
    /// ρ and dρ/dτ.
    pub rho: f64,
    pub rho_tau: f64,
    pub psi0: f64,
    pub psi0_t: f64,
}

/// One row of the interaction CSV.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct InteractionRow {
    pub tau: f64,
    pub eta: f64,
    pub beta: f64,
    pub rho: f64,
    pub s: f64,
    pub d: f64,
}

impl InteractionSolution {
    pub fn solve(table: &InteractionTable, params: InteractionParams, spec: &QuadratureSpec) -> Result<Self> {
        let tau = params.grid()?;
        let sw = params.switch;
        let solved = solve_eta(&tau, table, &sw)?;
        let eta: Vec<f64> = solved.iter().map(|p| p.0).collect();
        let eta_residual = solved.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
        let eta_tau: Vec<f64> = tau.iter().zip(&eta).map(|(&t, &e)| eta_tau(e, t, table, &sw)).collect();
        let beta: Vec<f64> = eta.iter().map(|&e| table.beta(e)).collect();
        let rho: Vec<f64> = eta.iter().zip(&beta).map(|(e, b)| e / b).collect();
        let rho_tau: Vec<f64> = eta
            .iter()
            .zip(&eta_tau)
            .zip(&beta)
            .map(|((&e, &et), &b)| et * (b - e * table.beta_prime(e)) / (b * b))
            .collect();

        let n = tau.len();
        let limit_l = rho[n - 1] - tau[n - 1];
        let k90 = tau.iter().position(|&t| t >= tau[n - 1] - 10.0).unwrap_or(n - 1);
        let drift = (rho[k90] - tau[k90] - limit_l).abs();
        if drift > 1e-6 {
            return Err(Error::LimitNotConverged { drift });
        }
        let big_d: Vec<f64> = rho.iter().zip(&tau).map(|(r, t)| r - t - limit_l).collect();

        // S is a function of η alone: integrate the density in η between consecutive nodes.
        let (eta0, _) = solve_eta_at(0.0, table, &sw)?;
        let dens = |e: f64| phase_sum_density(e, table).unwrap_or(f64::NAN);
        let mut cum = vec![0.0; n];
        for k in 1..n {
            let (a, b) = (eta[k - 1], eta[k]);
            let piece = if b > a { integrate_interval(dens, a, b, spec)?.value } else { 0.0 };
            cum[k] = cum[k - 1] + piece;
        }
        let k0 = tau.iter().position(|&t| t > 0.0).unwrap();
        let base = cum[k0 - 1] + integrate_interval(dens, eta[k0 - 1], eta0, spec)?.value;
        let big_s: Vec<f64> = cum.iter().map(|c| c - base).collect();
        let mut s_tau = Vec::with_capacity(n);
        for (&e, &et) in eta.iter().zip(&eta_tau) {
            s_tau.push(phase_sum_density(e, table)? * et);
        }
        if big_s.iter().any(|v| !v.is_finite()) {
            return Err(Error::Blowup { t: f64::NAN, what: "phase-shift sum".into() });
        }

        let d_tau: Vec<f64> = rho_tau.iter().map(|r| r - 1.0).collect();
        let eta_h = Hermite::new(tau.clone(), eta.clone(), eta_tau.clone())?;
        let d_h = Hermite::new(tau.clone(), big_d.clone(), d_tau)?;
        let s_h = Hermite::new(tau.clone(), big_s.clone(), s_tau.clone())?;
        Ok(Self {
            tau,
            eta,
            eta_tau,
            beta,
            rho,
            rho_tau,
            big_d,
            big_s,
            s_tau,
            eta_residual,
            limit_l,
            params,
            table: table.clone(),
            eta_h,
            d_h,
            s_h,
        })
    }

    pub fn table(&self) -> &InteractionTable {
        &self.table
    }

    pub fn tau_range(&self) -> (f64, f64) {
        (self.tau[0], self.tau[self.tau.len() - 1])
    }

    fn out_of_range(&self, tau: f64) -> Error {
        let (lo, hi) = self.tau_range();
        Error::TauOutOfRange { tau, lo, hi }
    }

    /// (η, η_τ) at τ.
    pub fn eta_at(&self, tau: f64) -> Result<(f64, f64)> {
        self.eta_h.eval(tau).ok_or_else(|| self.out_of_range(tau))
    }

    /// (D, D′) with D = τ·d.
    pub fn big_d_at(&self, tau: f64) -> Result<(f64, f64)> {
        self.d_h.eval(tau).ok_or_else(|| self.out_of_range(tau))
    }

    /// (S, S′).
    pub fn big_s_at(&self, tau: f64) -> Result<(f64, f64)> {
        self.s_h.eval(tau).ok_or_else(|| self.out_of_range(tau))
    }

    /// d(τ) = r₂₁ − r₁₁; undefined at τ = 0.
    pub fn d_at(&self, tau: f64) -> Result<f64> {
        if tau == 0.0 {
            return Err(Error::Invalid("d has a pole at tau = 0; use big_d_at".into()));
        }
        Ok(self.big_d_at(tau)?.0 / tau)
    }

    /// (W, W′).
    pub fn switch_w(&self, tau: f64) -> (f64, f64) {
        let sw = self.params.switch;
        match self.params.orientation {
            SwitchOrientation::Reflected => (1.0 - sw.value(tau), -sw.deriv(tau)),
            SwitchOrientation::Literal => (sw.value(tau), sw.deriv(tau)),
        }
    }

    /// Estimate of d(−∞): d at the most negative node.
    pub fn d_minus_infinity(&self) -> f64 {
        self.big_d[0] / self.tau[0]
    }

    /// Regularized fronts r_i = r_{i0} + ψ₀r_{i1}(τ) at (t, ε) with analytic velocities.
    pub fn front_positions(&self, t: f64, eps: f64, traj: &FrontTrajectory) -> Result<FrontPair> {
        let (r10, r10t, r10tt) = traj.r10(t);
        let (r20, r20t, r20tt) = traj.r20(t);
        let (psi0, dpsi, ddpsi) = traj.psi0(t);
        let tau = psi0 / eps;
        let (eta, eta_tau) = self.eta_at(tau)?;
        let (d, dd) = self.big_d_at(tau)?;
        let (s, ds) = self.big_s_at(tau)?;
        let (w, dw) = self.switch_w(tau);
        let sum = r10t + r20t;
        let c = -sum / dpsi;
        let dc = -((r10tt + r20tt) * dpsi - sum * ddpsi) / (dpsi * dpsi);
        let common = psi0 * c * w + eps * s;
        let common_t = dpsi * c * (w + tau * dw) + psi0 * dc * w + dpsi * ds;
        let beta = self.table.beta(eta);
        let beta_tau = self.table.beta_prime(eta) * eta_tau;
        let rho = eta / beta;
        let rho_tau = eta_tau * (beta - eta * self.table.beta_prime(eta)) / (beta * beta);
        Ok(FrontPair {
            t,
            tau,
            r1: r10 + 0.5 * (common - eps * d),
            r2: r20 + 0.5 * (common + eps * d),
            r1t: r10t + 0.5 * (common_t - dpsi * dd),
            r2t: r20t + 0.5 * (common_t + dpsi * dd),
            eta,
            beta,
            beta_t: beta_tau * dpsi / eps,
            beta_tau,
            rho,
            rho_tau,
            psi0,
            psi0_t: dpsi,
        })
    }

    /// Time at which τ = ψ₀(t)/ε takes the value `tau`, searched on the side of t* fixed by
    /// the sign of τ; `None` outside [0, t₁].
    pub fn time_of_tau(&self, tau: f64, eps: f64, traj: &FrontTrajectory) -> Option<f64> {
        let target = eps * tau;
        let (lo, hi) = if tau >= 0.0 { (0.0, traj.t_star) } else { (traj.t_star, traj.t_end) };
        let h = |t: f64| traj.psi0(t).0 - target;
        solve_bracketed(h, lo, hi, 1e-15).ok()
    }

    /// r₁ₜ + r₂ₜ at the node nearest contact where η has reached zero (η ≤ `eta_zero_tol`).
    pub fn velocity_sum_at_contact(&self, traj: &FrontTrajectory, eps: f64) -> Result<ContactVelocity> {
        let k = (0..self.tau.len())
            .rev()
            .find(|&k| self.tau[k] < 0.0 && self.eta[k] <= self.params.eta_zero_tol)
            .ok_or_else(|| Error::Invalid("eta never reaches the zero tolerance on the tau grid".into()))?;
        let t = self.time_of_tau(self.tau[k], eps, traj).ok_or_else(|| self.out_of_range(self.tau[k]))?;
        let f = self.front_positions(t, eps, traj)?;
        let scale = traj.r10(t).1.abs().max(traj.r20(t).1.abs());
        Ok(ContactVelocity { t, tau: f.tau, eta: f.eta, sum: f.r1t + f.r2t, velocity_scale: scale })
    }

    pub fn rows(&self) -> Vec<InteractionRow> {
        (0..self.tau.len())
            .map(|k| InteractionRow {
                tau: self.tau[k],
                eta: self.eta[k],
                beta: self.beta[k],
                rho: self.rho[k],
                s: self.big_s[k] / self.tau[k],
                d: self.big_d[k] / self.tau[k],
            })
            .collect()
    }

    /// Largest residual of ∂_τ D = ρ_τ − 1 and ∂_τ S = density·η_τ, differentiating back by
    /// central differences of fresh solves at τ ± δ on every `stride`-th interior node.
    pub fn ode_residual(&self, stride: usize, spec: &QuadratureSpec) -> Result<f64> {
        let delta = 1e-4;
        let sw = self.params.switch;
        let n = self.tau.len();
        let nodes: Vec<usize> = (1..n - 1).step_by(stride.max(1)).collect();
        let worst = nodes
            .par_iter()
            .map(|&k| -> Result<f64> {
                let t = self.tau[k];
                let (ep, _) = solve_eta_at(t + delta, &self.table, &sw)?;
                let (em, _) = solve_eta_at(t - delta, &self.table, &sw)?;
                let rho = |e: f64| e / self.table.beta(e);
                let dd = ((rho(ep) - (t + delta)) - (rho(em) - (t - delta))) / (2.0 * delta);
                let dens = |e: f64| phase_sum_density(e, &self.table).unwrap_or(f64::NAN);
                let ds = if ep > em { integrate_interval(dens, em, ep, spec)?.value / (2.0 * delta) } else { 0.0 };
                let r1 = (dd - (self.rho_tau[k] - 1.0)).abs();
                let r2 = (ds - self.s_tau[k]).abs();
                Ok(r1.max(r2))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(worst.into_iter().fold(0.0, f64::max))
    }
}

/// The contact velocity diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ContactVelocity {
    pub t: f64,
    pub tau: f64,
    pub eta: f64,
    pub sum: f64,
    /// max |r_{i0t}| at that time.
    pub velocity_scale: f64,
}
