//! Reference finite-difference solver for the radial phase-field system
//!
//! ```text
//! σ_t − σ_rr = −r u_t,
//! ε(u_t − r⁻²(r²u_r)_r) = (u − u³)/ε + σ/r,
//! ```
//!
//! with Dirichlet data for σ and zero flux for u, stepped IMEX: both diffusions implicit,
//! reaction and coupling explicit.

use crate::ansatz::AnsatzField;
use crate::error::{Error, Result};
use crate::numerics::{solve_tridiagonal, RadialGrid};
use crate::profiles::{double_well, double_well_prime};

#[derive(Debug, Clone, PartialEq)]
pub struct PDEState {
    pub grid: RadialGrid,
    pub u: Vec<f64>,
    pub sigma: Vec<f64>,
    pub t: f64,
    pub eps: f64,
}

/// Diagnostics of one step.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StepInfo {
    pub t: f64,
    pub dt: f64,
    /// Largest dt for which the explicit reaction keeps the energy decreasing.
    pub stability_bound: f64,
    /// Discrete heat balance: change of Σ w(σ + r u) minus boundary fluxes and forcing.
    pub conservation_defect: f64,
}

/// Which equations are advanced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coupling {
    Full,
    /// σ is held at its current values; u follows Allen–Cahn with the frozen σ.
    FrozenSigma,
}

/// Right-hand sides (f_u, f_σ) added to the u- and σ-equations at (r, t).
pub type Forcing<'a> = &'a dyn Fn(f64, f64) -> (f64, f64);

/// Reaction-limited step bound 2ε²/max F″ with max F″ = 2 on [−1, 1].
pub fn stability_bound(eps: f64) -> f64 {
    eps * eps
}

impl PDEState {
    pub fn new(grid: RadialGrid, u: Vec<f64>, sigma: Vec<f64>, t: f64, eps: f64) -> Result<Self> {
        if u.len() != grid.len() || sigma.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} nodes, u {}, sigma {}", grid.len(), u.len(), sigma.len())));
        }
        if !(eps > 0.0) {
            return Err(Error::Invalid("epsilon must be positive".into()));
        }
        if grid.h() > eps / 8.0 * (1.0 + 1e-12) {
            return Err(Error::Invalid(format!("grid spacing {} exceeds eps/8", grid.h())));
        }
        Ok(Self { grid, u, sigma, t, eps })
    }

    /// Initial state taken from an ansatz snapshot.
    pub fn from_ansatz(field: &AnsatzField) -> Result<Self> {
        Self::new(field.grid.clone(), field.u.clone(), field.sigma.clone(), field.t, field.eps)
    }

    /// Quadrature weights of the node-centred cells: h inside, h/2 at the ends.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.grid.h();
        let n = self.grid.len();
        (0..n).map(|j| if j == 0 || j == n - 1 { 0.5 * h } else { h }).collect()
    }

    /// E = Σ_faces ε/2 (Δu/h)² r_f² h + Σ_nodes F(u)/ε r² w.
    pub fn energy(&self) -> f64 {
        let h = self.grid.h();
        let w = self.weights();
        let grad: f64 = (0..self.grid.cells)
            .map(|j| {
                let rf = self.grid.node(j) + 0.5 * h;
                let d = (self.u[j + 1] - self.u[j]) / h;
                0.5 * self.eps * d * d * rf * rf * h
            })
            .sum();
        let pot: f64 = (0..self.grid.len())
            .map(|j| {
                let r = self.grid.node(j);
                double_well(self.u[j]) / self.eps * r * r * w[j]
            })
            .sum();
        grad + pot
    }

    /// Σ w(σ + r u).
    pub fn heat_content(&self) -> f64 {
        let w = self.weights();
        (0..self.grid.len()).map(|j| w[j] * (self.sigma[j] + self.grid.node(j) * self.u[j])).sum()
    }
}

/// One IMEX step to t + dt with σ boundary values `bc` at the new time.
pub fn step_phasefield(
    state: &PDEState,
    dt: f64,
    bc: (f64, f64),
    coupling: Coupling,
    forcing: Option<Forcing>,
) -> Result<(PDEState, StepInfo)> {
    if !(dt > 0.0) {
        return Err(Error::Invalid("time step must be positive".into()));
    }
    let g = &state.grid;
    let n = g.len();
    let h = g.h();
    let eps = state.eps;
    let t_new = state.t + dt;
    let force = |r: f64| forcing.map(|f| f(r, t_new)).unwrap_or((0.0, 0.0));

    // u: (I − dt Δ_h) u⁺ = u + dt[(u − u³)/ε² + σ/(εr) + f_u/ε]
    let mut sub = vec![0.0; n];
    let mut diag = vec![1.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for j in 0..n {
        let r = g.node(j);
        let mass = r * r * if j == 0 || j == n - 1 { 0.5 * h } else { h };
        let left = if j > 0 { (r - 0.5 * h).powi(2) / h } else { 0.0 };
        let right = if j + 1 < n { (r + 0.5 * h).powi(2) / h } else { 0.0 };
        sub[j] = -dt * left / mass;
        sup[j] = -dt * right / mass;
        diag[j] = 1.0 + dt * (left + right) / mass;
        let u = state.u[j];
        rhs[j] = u + dt * (-double_well_prime(u) / (eps * eps) + state.sigma[j] / (eps * r) + force(r).0 / eps);
    }
    let u_new = solve_tridiagonal(&sub, &diag, &sup, &rhs);

    let sigma_new = match coupling {
        Coupling::FrozenSigma => state.sigma.clone(),
        Coupling::Full => {
            let k = dt / (h * h);
            let mut sub = vec![-k; n];
            let mut sup = vec![-k; n];
            let mut diag = vec![1.0 + 2.0 * k; n];
            let mut rhs: Vec<f64> = (0..n)
                .map(|j| {
                    let r = g.node(j);
                    state.sigma[j] - r * (u_new[j] - state.u[j]) + dt * force(r).1
                })
                .collect();
            sub[0] = 0.0;
            sup[0] = 0.0;
            diag[0] = 1.0;
            rhs[0] = bc.0;
            sub[n - 1] = 0.0;
            sup[n - 1] = 0.0;
            diag[n - 1] = 1.0;
            rhs[n - 1] = bc.1;
            solve_tridiagonal(&sub, &diag, &sup, &rhs)
        }
    };

    if let Some(j) = u_new.iter().chain(&sigma_new).position(|v| !v.is_finite()) {
        let what = if j < n { format!("u at r = {}", g.node(j)) } else { format!("sigma at r = {}", g.node(j - n)) };
        return Err(Error::Blowup { t: t_new, what });
    }

    let conservation_defect = match coupling {
        Coupling::FrozenSigma => 0.0,
        Coupling::Full => {
            let change: f64 = (1..n - 1)
                .map(|j| {
                    let r = g.node(j);
                    h * ((sigma_new[j] + r * u_new[j]) - (state.sigma[j] + r * state.u[j])) / dt - h * force(r).1
                })
                .sum();
            let flux = ((sigma_new[n - 1] - sigma_new[n - 2]) - (sigma_new[1] - sigma_new[0])) / h;
            (change - flux).abs()
        }
    };

    let next = PDEState { grid: g.clone(), u: u_new, sigma: sigma_new, t: t_new, eps };
    Ok((next, StepInfo { t: t_new, dt, stability_bound: stability_bound(eps), conservation_defect }))
}

/// Steps from `init` and returns snapshots at each of `t_out` (increasing, ≥ init.t); steps
/// are shortened to land on the output times.
pub fn run_phasefield(
    init: PDEState,
    t_out: &[f64],
    dt_max: f64,
    bc: &dyn Fn(f64) -> (f64, f64),
    coupling: Coupling,
    forcing: Option<Forcing>,
) -> Result<(Vec<PDEState>, Vec<StepInfo>)> {
    if t_out.windows(2).any(|w| w[1] < w[0]) || t_out.first().is_some_and(|&t| t < init.t) {
        return Err(Error::Invalid("output times must be increasing and not before the start".into()));
    }
    let mut state = init;
    let mut snaps = Vec::with_capacity(t_out.len());
    let mut infos = Vec::new();
    for &target in t_out {
        while state.t < target - 1e-14 * target.abs().max(1.0) {
            let remaining = target - state.t;
            let steps = (remaining / dt_max).ceil().max(1.0);
            let dt = remaining / steps;
            let (next, info) = step_phasefield(&state, dt, bc(state.t + dt), coupling, forcing)?;
            state = next;
            infos.push(info);
        }
        state.t = target;
        snaps.push(state.clone());
    }
    Ok((snaps, infos))
}

/// Distances between the phase-field and ansatz histories.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FieldNorms {
    pub times: Vec<f64>,
    /// ‖u − ǔ‖ in L²(r²dr) at each time.
    pub u_l2: Vec<f64>,
    /// ‖σ − σ̌‖ in L²(r²dr) at each time.
    pub sigma_l2: Vec<f64>,
    /// sup over the window of `u_l2`.
    pub u_sup_l2: f64,
    /// Trapezoidal L² norm in space-time of σ − σ̌.
    pub sigma_l2_st: f64,
}

/// Norms of the difference between matching snapshots with `window.0 ≤ t ≤ window.1`.
pub fn compare_fields(pde: &[PDEState], ans: &[AnsatzField], window: (f64, f64)) -> Result<FieldNorms> {
    if pde.len() != ans.len() {
        return Err(Error::GridMismatch(format!("{} PDE snapshots vs {} ansatz snapshots", pde.len(), ans.len())));
    }
    let mut norms = FieldNorms { times: vec![], u_l2: vec![], sigma_l2: vec![], u_sup_l2: 0.0, sigma_l2_st: 0.0 };
    for (p, a) in pde.iter().zip(ans) {
        if p.grid != a.grid {
            return Err(Error::GridMismatch(format!("grids differ at t = {}", p.t)));
        }
        if (p.t - a.t).abs() > 1e-12 * p.t.abs().max(1.0) {
            return Err(Error::GridMismatch(format!("times differ: {} vs {}", p.t, a.t)));
        }
        if p.t < window.0 || p.t > window.1 {
            continue;
        }
        let w = p.weights();
        let l2 = |x: &[f64], y: &[f64]| -> f64 {
            (0..w.len())
                .map(|j| {
                    let r = p.grid.node(j);
                    w[j] * r * r * (x[j] - y[j]).powi(2)
                })
                .sum::<f64>()
                .sqrt()
        };
        norms.times.push(p.t);
        norms.u_l2.push(l2(&p.u, &a.u));
        norms.sigma_l2.push(l2(&p.sigma, &a.sigma));
    }
    norms.u_sup_l2 = norms.u_l2.iter().cloned().fold(0.0, f64::max);
    let st: f64 = norms
        .times
        .windows(2)
        .zip(norms.sigma_l2.windows(2))
        .map(|(t, s)| 0.5 * (t[1] - t[0]) * (s[0] * s[0] + s[1] * s[1]))
        .sum();
    norms.sigma_l2_st = st.sqrt();
    Ok(norms)
}

/// Width of the u-transition nearest `near`: distance between the points where u crosses
/// ±tanh 1, found by linear interpolation. A profile tanh(x/δ) has width 2δ.
pub fn kink_width(grid: &RadialGrid, u: &[f64], near: f64) -> Option<f64> {
    let level = 1f64.tanh();
    let crossings = |c: f64| -> Vec<f64> {
        (0..grid.cells)
            .filter_map(|j| {
                let (a, b) = (u[j] - c, u[j + 1] - c);
                if a == 0.0 {
                    Some(grid.node(j))
                } else if a * b < 0.0 {
                    Some(grid.node(j) + grid.h() * a / (a - b))
                } else {
                    None
                }
            })
            .collect()
    };
    let nearest = |v: Vec<f64>| v.into_iter().min_by(|x, y| (x - near).abs().total_cmp(&(y - near).abs()));
    let hi = nearest(crossings(level))?;
    let lo = nearest(crossings(-level))?;
    Some((hi - lo).abs())
}

/// One CSV row of a phase-field snapshot.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct PdeRow {
    pub r: f64,
    pub u: f64,
    pub sigma: f64,
}

impl PDEState {
    pub fn rows(&self) -> Vec<PdeRow> {
        (0..self.grid.len()).map(|j| PdeRow { r: self.grid.node(j), u: self.u[j], sigma: self.sigma[j] }).collect()
    }
}
