//! The global smooth approximation: order function ǔ, temperature model Ť, the heat-kernel
//! corrections and the assembled temperature σ̌ = eŤ + q̌ + q̂.
//!
//! The correction solve works with w = q + eI rather than q. The linear coefficient I has
//! slope (k₁+k₂)/ψ and is unbounded at contact, while w stays bounded.

use crate::error::{Error, Result};
use crate::interaction::{FrontPair, InteractionSolution};
use crate::numerics::{
    integrate_abel, integrate_interval_breaks, solve_tridiagonal, QuadratureSpec, RadialGrid,
};
use crate::profiles::{omega0_dot, one_minus_tanh, ProfileParams};
use crate::stefan::{Gammas, Kinetics, Scenario};

/// ǔ with its analytic partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderValue {
    pub u: f64,
    pub u_r: f64,
    pub u_t: f64,
}

/// ǔ = ½[1 + a + b − ab] with a = ω₀(β(r₁−r)/ε), b = ω₀(β(r−r₂)/ε).
pub fn order_function(r: f64, eps: f64, f: &FrontPair) -> OrderValue {
    let xa = f.beta * (f.r1 - r) / eps;
    let xb = f.beta * (r - f.r2) / eps;
    let ma = one_minus_tanh(xa);
    let mb = one_minus_tanh(xb);
    let da = omega0_dot(xa);
    let db = omega0_dot(xb);
    let a_r = -da * f.beta / eps;
    let b_r = db * f.beta / eps;
    let a_t = da * (f.beta_t * (f.r1 - r) + f.beta * f.r1t) / eps;
    let b_t = db * (f.beta_t * (r - f.r2) - f.beta * f.r2t) / eps;
    OrderValue {
        u: 1.0 - 0.5 * ma * mb,
        u_r: 0.5 * (a_r * mb + b_r * ma),
        u_t: 0.5 * (a_t * mb + b_t * ma),
    }
}

/// Which Heaviside factors of the temperature model are switched on at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub left: bool,
    pub right: bool,
    pub between: bool,
}

/// P with its first derivative and the second derivative of the part between the fronts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PValue {
    pub p: f64,
    pub p_r: f64,
    pub p_rr_between: f64,
}

/// Coefficients of Ť at one time.
///
/// γ⁻(r) is linear with γ⁻(r₁) = γ₁⁺, γ⁻(r₂) = γ₂⁻ and γ̂(r) is linear with
/// γ̂(r₁) = γ₁⁻, γ̂(r₂) = γ₂⁺. With these end values Ť_r jumps by B(γ_i⁺+γ_i⁻) at r_i and is
/// continuous once B = 0.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TemperatureModelCoeffs {
    pub r1: f64,
    pub r2: f64,
    pub psi: f64,
    pub r_mid: f64,
    pub k1: f64,
    pub k2: f64,
    pub gammas: Gammas,
    /// B(τ).
    pub b: f64,
}

impl TemperatureModelCoeffs {
    pub fn new(f: &FrontPair, gammas: Gammas, kin: Kinetics, b: f64) -> Self {
        Self {
            r1: f.r1,
            r2: f.r2,
            psi: f.r2 - f.r1,
            r_mid: 0.5 * (f.r1 + f.r2),
            k1: kin.kappa1 * f.r1 * f.r1t + kin.kappa2,
            k2: kin.kappa1 * f.r2 * f.r2t + kin.kappa2,
            gammas,
            b,
        }
    }

    fn linear(&self, at_r1: f64, at_r2: f64, r: f64) -> (f64, f64) {
        let slope = (at_r2 - at_r1) / self.psi;
        (at_r1 + slope * (r - self.r1), slope)
    }

    /// γ⁻(r) and its slope.
    pub fn gamma_minus(&self, r: f64) -> (f64, f64) {
        self.linear(self.gammas.g1p, self.gammas.g2m, r)
    }

    /// γ̂(r) and its slope.
    pub fn gamma_hat(&self, r: f64) -> (f64, f64) {
        self.linear(self.gammas.g1m, self.gammas.g2p, r)
    }

    /// I = (k₁−k₂)/2 − (r−r*)(k₁+k₂)/ψ and I_r, evaluated as k₁ − (r−r₁)(k₁+k₂)/ψ.
    pub fn i_value(&self, r: f64) -> (f64, f64) {
        let slope = -(self.k1 + self.k2) / self.psi;
        if self.psi == 0.0 {
            let lin = if r == self.r_mid { 0.0 } else { slope * (r - self.r_mid) };
            return (0.5 * (self.k1 - self.k2) + lin, slope);
        }
        let offset = r - self.r1;
        (self.k1 + if offset == 0.0 { 0.0 } else { slope * offset }, slope)
    }

    pub fn region(&self, r: f64) -> Region {
        let (lo, hi) = (self.r1.min(self.r2), self.r1.max(self.r2));
        Region { left: r < self.r1, right: r > self.r2, between: self.psi != 0.0 && r > lo && r < hi }
    }

    /// The part between the fronts, sgn(ψ)(B·γ⁻Π/ψ − (1−B)·γ̂Π/ψ) with Π = (r₁−r)(r−r₂),
    /// as a polynomial valid for every r.
    fn between(&self, r: f64, b: f64) -> (f64, f64, f64) {
        if self.psi == 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let pi = (self.r1 - r) * (r - self.r2);
        let pi_r = self.r1 + self.r2 - 2.0 * r;
        let pi_rr = -2.0;
        let (g, gr) = self.gamma_minus(r);
        let (h, hr) = self.gamma_hat(r);
        let m = (g * pi, gr * pi + g * pi_r, 2.0 * gr * pi_r + g * pi_rr);
        let n = (h * pi, hr * pi + h * pi_r, 2.0 * hr * pi_r + h * pi_rr);
        let s = self.psi.signum() / self.psi;
        (s * (b * m.0 - (1.0 - b) * n.0), s * (b * m.1 - (1.0 - b) * n.1), s * (b * m.2 - (1.0 - b) * n.2))
    }

    /// P = Ť − I evaluated with the Heaviside factors of `reg`.
    pub fn p_in(&self, r: f64, reg: Region) -> PValue {
        self.p_in_with(r, reg, self.b)
    }

    fn p_in_with(&self, r: f64, reg: Region, b: f64) -> PValue {
        let g = &self.gammas;
        let mut v = PValue { p: 0.0, p_r: 0.0, p_rr_between: 0.0 };
        if reg.left {
            v.p += g.g1m * (self.r1 - r);
            v.p_r -= g.g1m;
        }
        if reg.right {
            v.p += g.g2p * (r - self.r2);
            v.p_r += g.g2p;
        }
        if reg.between {
            let (a, ar, arr) = self.between(r, b);
            v.p += a;
            v.p_r += ar;
            v.p_rr_between = arr;
        }
        v
    }

    pub fn p(&self, r: f64) -> PValue {
        self.p_in(r, self.region(r))
    }

    /// Ť in the uniform B-blended form.
    pub fn value(&self, r: f64) -> f64 {
        self.i_value(r).0 + self.p(r).p
    }

    /// Ť in the definitional piecewise form: B replaced by 1 for ψ > 0 and by 0 for ψ < 0.
    pub fn piecewise_value(&self, r: f64) -> f64 {
        let b = if self.psi > 0.0 { 1.0 } else { 0.0 };
        self.i_value(r).0 + self.p_in_with(r, self.region(r), b).p
    }

    /// ∂P/∂r of the between-fronts part, usable as an antiderivative of its second derivative.
    pub fn between_slope(&self, r: f64) -> f64 {
        self.between(r, self.b).1
    }

    /// Jump of ∂Ť/∂r across front `i` computed from the two one-sided derivatives.
    pub fn gradient_jump(&self, i: usize) -> f64 {
        let r = if i == 1 { self.r1 } else { self.r2 };
        let d = 1e-9 * (1.0 + r.abs());
        let right = self.p_in(r, self.region(r + d)).p_r;
        let left = self.p_in(r, self.region(r - d)).p_r;
        right - left
    }
}

/// Everything needed to evaluate the ansatz at one ε.
#[derive(Clone, Copy)]
pub struct AnsatzContext<'a> {
    pub scenario: &'a Scenario,
    pub sol: &'a InteractionSolution,
    pub eps: f64,
    pub profile: ProfileParams,
}

impl std::fmt::Debug for AnsatzContext<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnsatzContext").field("scenario", self.scenario).field("eps", &self.eps).finish()
    }
}

impl<'a> AnsatzContext<'a> {
    pub fn new(scenario: &'a Scenario, sol: &'a InteractionSolution, eps: f64, profile: ProfileParams) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::Invalid("epsilon must be positive".into()));
        }
        profile.validate(scenario.r_min, scenario.r_max)?;
        Ok(Self { scenario, sol, eps, profile })
    }

    pub fn fronts(&self, t: f64) -> Result<FrontPair> {
        self.sol.front_positions(t, self.eps, &self.scenario.traj)
    }

    pub fn coeffs_of(&self, f: &FrontPair) -> TemperatureModelCoeffs {
        let b = self.sol.params.switch.value(f.tau);
        TemperatureModelCoeffs::new(f, self.scenario.traj.gammas(f.t), self.scenario.kinetics, b)
    }

    pub fn coeffs(&self, t: f64) -> Result<TemperatureModelCoeffs> {
        Ok(self.coeffs_of(&self.fronts(t)?))
    }

    pub fn order(&self, r: f64, t: f64) -> Result<OrderValue> {
        Ok(order_function(r, self.eps, &self.fronts(t)?))
    }

    /// Ť at (r, t).
    pub fn temperature_model(&self, r: f64, t: f64) -> Result<f64> {
        Ok(self.coeffs(t)?.value(r))
    }

    /// Coefficients at t ± δ for time differences with frozen Heaviside factors.
    fn coeffs_pm(&self, t: f64) -> Result<(TemperatureModelCoeffs, TemperatureModelCoeffs, f64)> {
        let delta = 1e-4 * self.eps;
        let t_end = self.scenario.traj.t_end;
        let lo = (t - delta).max(0.0);
        let hi = (t + delta).min(t_end);
        Ok((self.coeffs(lo)?, self.coeffs(hi)?, hi - lo))
    }
}

fn p_t(pm: &(TemperatureModelCoeffs, TemperatureModelCoeffs, f64), r: f64, reg: Region) -> f64 {
    (pm.1.p_in(r, reg).p - pm.0.p_in(r, reg).p) / pm.2
}

/// Resolution controls of the correction solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionParams {
    /// Grid spacing is ε / `grid_factor`.
    pub grid_factor: f64,
    /// Time step in units of the interaction variable: dt = dτ·ε / max|ψ₀′|.
    pub dtau: f64,
}

impl Default for CorrectionParams {
    fn default() -> Self {
        Self { grid_factor: 8.0, dtau: 0.05 }
    }
}

/// w = q + eI on the grid at every time level, with what is needed to assemble σ̌.
#[derive(Debug, Clone)]
pub struct CorrectionSolution {
    pub grid: RadialGrid,
    pub eps: f64,
    pub times: Vec<f64>,
    pub w: Vec<Vec<f64>>,
    pub fronts: Vec<FrontPair>,
    pub coeffs: Vec<TemperatureModelCoeffs>,
    /// Largest residual of the discrete scheme over all steps.
    pub scheme_residual: f64,
    pub profile: ProfileParams,
    coeffs_pm: Vec<(TemperatureModelCoeffs, TemperatureModelCoeffs, f64)>,
    w_t: Vec<Vec<f64>>,
}

/// Per-cell average of e·∂²P/∂r² over the part between the fronts.
fn bridge_average(c: &TemperatureModelCoeffs, e: f64, a: f64, b: f64) -> f64 {
    let lo = a.max(c.r1.min(c.r2));
    let hi = b.min(c.r1.max(c.r2));
    if !(hi > lo) || c.psi == 0.0 {
        return 0.0;
    }
    e * (c.between_slope(hi) - c.between_slope(lo)) / (b - a)
}

/// Right-hand side F + bridge at every interior node.
fn source(
    grid: &RadialGrid,
    profile: &ProfileParams,
    c: &TemperatureModelCoeffs,
    pm: &(TemperatureModelCoeffs, TemperatureModelCoeffs, f64),
) -> Vec<f64> {
    let h = grid.h();
    let mut f = vec![0.0; grid.len()];
    for (j, fj) in f.iter_mut().enumerate().take(grid.cells).skip(1) {
        let r = grid.node(j);
        let (e, e1, e2) = profile.cutoff(r);
        if e == 0.0 && e1 == 0.0 && e2 == 0.0 {
            continue;
        }
        let reg = c.region(r);
        let p = c.p_in(r, reg);
        let big_f = -e * p_t(pm, r, reg) + 2.0 * e1 * p.p_r + e2 * p.p;
        *fj = big_f + bridge_average(c, e, r - 0.5 * h, r + 0.5 * h);
    }
    f
}

/// Solves L̂w = F + e·∂²P/∂r²|_between on [R₁, R₂] × [0, t₁] with BDF2 in time.
///
/// w(·,0) = σ̄(·,0) − eP(·,0); w at R₁, R₂ carries the scenario's boundary data, so σ̌ meets
/// it exactly because e vanishes there.
pub fn solve_correction(ctx: &AnsatzContext, params: &CorrectionParams) -> Result<CorrectionSolution> {
    let sc = ctx.scenario;
    let grid = RadialGrid::with_max_spacing(sc.r_min, sc.r_max, ctx.eps / params.grid_factor)?;
    let t_end = sc.traj.t_end;
    let speed = (0..=200)
        .map(|k| sc.traj.psi0(t_end * k as f64 / 200.0).1.abs())
        .fold(0.0, f64::max)
        .max(1e-12);
    let dt_max = params.dtau * ctx.eps / speed;
    let steps = (t_end / dt_max).ceil() as usize;
    let dt = t_end / steps as f64;
    let h = grid.h();
    let n = grid.len();
    let nodes = grid.nodes();

    let times: Vec<f64> = (0..=steps).map(|k| if k == steps { t_end } else { dt * k as f64 }).collect();
    let mut fronts = Vec::with_capacity(steps + 1);
    let mut coeffs = Vec::with_capacity(steps + 1);
    let mut coeffs_pm = Vec::with_capacity(steps + 1);
    for &t in &times {
        let f = ctx.fronts(t)?;
        coeffs.push(ctx.coeffs_of(&f));
        fronts.push(f);
        coeffs_pm.push(ctx.coeffs_pm(t)?);
    }

    let mut w0 = Vec::with_capacity(n);
    for &r in &nodes {
        let s = sc.sigma_bar(r, 0.0).ok_or_else(|| Error::Invalid("initial temperature unavailable".into()))?;
        w0.push(s - ctx.profile.cutoff(r).0 * coeffs[0].p(r).p);
    }
    let (b0, b1) = sc.boundary_values(0.0);
    w0[0] = b0;
    w0[n - 1] = b1;

    let mut w = vec![w0];
    let mut w_t = Vec::with_capacity(steps + 1);
    let mut residual: f64 = 0.0;
    let inv_h2 = 1.0 / (h * h);
    let f_prev = source(&grid, &ctx.profile, &coeffs[0], &coeffs_pm[0]);
    let first_wt: Vec<f64> = (0..n)
        .map(|j| if j == 0 || j == n - 1 { 0.0 } else { (w[0][j - 1] - 2.0 * w[0][j] + w[0][j + 1]) * inv_h2 + f_prev[j] })
        .collect();
    w_t.push(first_wt);
    for k in 1..=steps {
        let f = source(&grid, &ctx.profile, &coeffs[k], &coeffs_pm[k]);
        let bdf2 = k >= 2;
        let alpha = if bdf2 { 1.5 } else { 1.0 };
        let hist: Vec<f64> = if bdf2 {
            (0..n).map(|j| (2.0 * w[k - 1][j] - 0.5 * w[k - 2][j]) / dt).collect()
        } else {
            (0..n).map(|j| w[k - 1][j] / dt).collect()
        };
        let mut sub = vec![-inv_h2; n];
        let mut sup = vec![-inv_h2; n];
        let mut diag = vec![alpha / dt + 2.0 * inv_h2; n];
        let mut rhs: Vec<f64> = (0..n).map(|j| hist[j] + f[j]).collect();
        let (bl, br) = sc.boundary_values(times[k]);
        sub[0] = 0.0;
        sup[0] = 0.0;
        diag[0] = 1.0;
        rhs[0] = bl;
        sub[n - 1] = 0.0;
        sup[n - 1] = 0.0;
        diag[n - 1] = 1.0;
        rhs[n - 1] = br;
        let next = solve_tridiagonal(&sub, &diag, &sup, &rhs);
        let mut wt = vec![0.0; n];
        for j in 1..n - 1 {
            let lap = (next[j - 1] - 2.0 * next[j] + next[j + 1]) * inv_h2;
            let res = alpha * next[j] / dt - hist[j] - lap - f[j];
            residual = residual.max(res.abs());
            wt[j] = lap + f[j];
        }
        wt[0] = (next[0] - w[k - 1][0]) / dt;
        wt[n - 1] = (next[n - 1] - w[k - 1][n - 1]) / dt;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Blowup { t: times[k], what: "correction solve".into() });
        }
        w.push(next);
        w_t.push(wt);
    }
    Ok(CorrectionSolution {
        grid,
        eps: ctx.eps,
        times,
        w,
        fronts,
        coeffs,
        scheme_residual: residual,
        profile: ctx.profile,
        coeffs_pm,
        w_t,
    })
}

/// One snapshot of the assembled ansatz.
#[derive(Debug, Clone)]
pub struct AnsatzField {
    pub grid: RadialGrid,
    pub t: f64,
    pub eps: f64,
    pub u: Vec<f64>,
    pub t_model: Vec<f64>,
    pub q_check: Vec<f64>,
    pub q_hat: Vec<f64>,
    pub sigma: Vec<f64>,
    pub theta: Vec<f64>,
}

/// One CSV row of a field snapshot.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct FieldRow {
    pub r: f64,
    pub u: f64,
    #[serde(rename = "T")]
    pub t_model: f64,
    pub q: f64,
    pub sigma: f64,
    pub theta: f64,
}

impl AnsatzField {
    pub fn rows(&self) -> Vec<FieldRow> {
        (0..self.grid.len())
            .map(|j| FieldRow {
                r: self.grid.node(j),
                u: self.u[j],
                t_model: self.t_model[j],
                q: self.q_check[j] + self.q_hat[j],
                sigma: self.sigma[j],
                theta: self.theta[j],
            })
            .collect()
    }

    /// Largest |σ̌ − (eŤ + q̌ + q̂)| relative to the size of the pieces.
    pub fn assembly_defect(&self, profile: &ProfileParams) -> f64 {
        (0..self.grid.len())
            .map(|j| {
                let e = profile.cutoff(self.grid.node(j)).0;
                let parts = [e * self.t_model[j], self.q_check[j], self.q_hat[j]];
                let scale = parts.iter().map(|v| v.abs()).fold(1.0, f64::max);
                (self.sigma[j] - parts.iter().sum::<f64>()).abs() / scale
            })
            .fold(0.0, f64::max)
    }
}

impl CorrectionSolution {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// Index of the time level nearest t.
    pub fn index_of(&self, t: f64) -> usize {
        let k = ((t - self.times[0]) / self.dt()).round();
        (k.max(0.0) as usize).min(self.times.len() - 1)
    }

    /// σ̌ and ∂σ̌/∂r at (r, level k).
    pub fn sigma(&self, k: usize, r: f64) -> (f64, f64) {
        let (e, e1, _) = self.profile.cutoff(r);
        let p = self.coeffs[k].p(r);
        let g = &self.grid;
        let x = ((r - g.a) / g.h()).clamp(0.0, g.cells as f64);
        let c = (x.floor() as usize).min(g.cells - 1);
        let w_r = (self.w[k][c + 1] - self.w[k][c]) / g.h();
        (e * p.p + g.interpolate(&self.w[k], r), e * p.p_r + e1 * p.p + w_r)
    }

    /// ∂w/∂t at the nodes of level k from a fourth-order stencil in time.
    pub fn w_t_stencil(&self, k: usize) -> Vec<f64> {
        let m = self.times.len();
        let dt = self.dt();
        let n = self.grid.len();
        let w = &self.w;
        (0..n)
            .map(|j| {
                let v = |i: usize| w[i][j];
                if m < 5 {
                    return self.w_t[k][j];
                }
                if k >= 2 && k + 2 < m {
                    (v(k - 2) - 8.0 * v(k - 1) + 8.0 * v(k + 1) - v(k + 2)) / (12.0 * dt)
                } else {
                    let (coef, base) = match k {
                        0 => ([-25.0, 48.0, -36.0, 16.0, -3.0], 0),
                        1 => ([-3.0, -10.0, 18.0, -6.0, 1.0], 0),
                        _ if k == m - 1 => ([3.0, -16.0, 36.0, -48.0, 25.0], m - 5),
                        _ => ([-1.0, 6.0, -18.0, 10.0, 3.0], m - 5),
                    };
                    (0..5).map(|i| coef[i] * v(base + i)).sum::<f64>() / (12.0 * dt)
                }
            })
            .collect()
    }

    /// ∂σ̌/∂t at r given the stencil values of ∂w/∂t at level k.
    pub fn sigma_t(&self, k: usize, r: f64, w_t: &[f64]) -> f64 {
        let e = self.profile.cutoff(r).0;
        let c = &self.coeffs[k];
        e * p_t(&self.coeffs_pm[k], r, c.region(r)) + self.grid.interpolate(w_t, r)
    }

    pub fn order(&self, k: usize, r: f64) -> OrderValue {
        order_function(r, self.eps, &self.fronts[k])
    }

    /// Snapshot at level k.
    ///
    /// q̌ = σ̄ − eŤ is taken while σ̄ exists and the fronts are at least 10ε apart; later it
    /// keeps the profile of the last such level.
    pub fn field(&self, k: usize, scenario: &Scenario) -> AnsatzField {
        let nodes = self.grid.nodes();
        let freeze = (0..=k)
            .rev()
            .find(|&i| {
                let t = self.times[i];
                t < scenario.traj.t_star && self.fronts[i].psi0 >= 10.0 * self.eps
            })
            .unwrap_or(0);
        let c = &self.coeffs[k];
        let cf = &self.coeffs[freeze];
        let mut f = AnsatzField {
            grid: self.grid.clone(),
            t: self.times[k],
            eps: self.eps,
            u: Vec::with_capacity(nodes.len()),
            t_model: Vec::with_capacity(nodes.len()),
            q_check: Vec::with_capacity(nodes.len()),
            q_hat: Vec::with_capacity(nodes.len()),
            sigma: Vec::with_capacity(nodes.len()),
            theta: Vec::with_capacity(nodes.len()),
        };
        for (j, &r) in nodes.iter().enumerate() {
            let e = self.profile.cutoff(r).0;
            let tm = c.value(r);
            let sigma = e * c.p(r).p + self.w[k][j];
            let qc = scenario.sigma_bar(r, self.times[freeze]).map(|s| s - e * cf.value(r)).unwrap_or(0.0);
            f.u.push(self.order(k, r).u);
            f.t_model.push(tm);
            f.q_check.push(qc);
            f.q_hat.push(sigma - e * tm - qc);
            f.sigma.push(sigma);
            f.theta.push(sigma / r);
        }
        f
    }
}

/// Normalization of the kernel formula for q̂₁.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelNormalization {
    /// −1/(2√(2π)) in front and exp(−(r−ξ)²/(t−α)), as printed.
    Printed,
    /// The unit-diffusivity heat kernel applied to the source −2(γ₁⁺+γ₂⁻)B/ψ.
    HeatKernel,
}

impl KernelNormalization {
    /// (c, κ) in −c ∫∫ g(α) exp(−(r−ξ)²/(κ(t−α))) / √(t−α) dξ dα.
    pub fn constants(self) -> (f64, f64) {
        match self {
            KernelNormalization::Printed => (1.0 / (2.0 * (2.0 * std::f64::consts::PI).sqrt()), 1.0),
            KernelNormalization::HeatKernel => (1.0 / std::f64::consts::PI.sqrt(), 4.0),
        }
    }

    /// (D, s) such that the kernel integral solves q_t − D q_rr = s·g·χ_{(r₁,r₂)}.
    pub fn equation(self) -> (f64, f64) {
        let (c, kappa) = self.constants();
        (kappa / 4.0, -c * (std::f64::consts::PI * kappa).sqrt())
    }
}

/// Which singular piece the kernel integral evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelPiece {
    /// Density (γ₁⁺+γ₂⁻)B/ψ on (r₁, r₂).
    Q1,
    /// Density (ξ−r*)(γ₁⁺−γ₂⁻)B/ψ² on (r₁, r₂), r* the current midpoint.
    QStar1,
}

fn piece_weight(ctx: &AnsatzContext, piece: KernelPiece, alpha: f64) -> Result<(f64, f64, f64, f64)> {
    let f = ctx.fronts(alpha)?;
    let b = ctx.sol.params.switch.value(f.tau);
    let g = ctx.scenario.traj.gammas(alpha);
    let psi = f.r2 - f.r1;
    let amp = match piece {
        KernelPiece::Q1 => g.g1p + g.g2m,
        KernelPiece::QStar1 => g.g1p - g.g2m,
    };
    Ok((amp * b, f.r1, f.r2, psi))
}

fn inner_integral(
    piece: KernelPiece,
    r: f64,
    lag: f64,
    kappa: f64,
    (r1, r2, psi): (f64, f64, f64),
    spec: &QuadratureSpec,
) -> Result<f64> {
    let (lo, hi) = (r1.min(r2), r1.max(r2));
    let mid = 0.5 * (r1 + r2);
    let width = (kappa * lag).sqrt();
    let kern = |xi: f64| {
        let z = (r - xi) / width;
        let e = (-z * z).exp();
        match piece {
            KernelPiece::Q1 => e / psi,
            KernelPiece::QStar1 => e * (xi - mid) / (psi * psi),
        }
    };
    Ok(integrate_interval_breaks(kern, lo, hi, &[r], spec)?.value)
}

/// q̂₁ (or q̂₁*) at (r, t) by an outer Abel-type quadrature in α over an inner quadrature in ξ.
pub fn correction_qhat_kernel(
    ctx: &AnsatzContext,
    piece: KernelPiece,
    r: f64,
    t: f64,
    norm: KernelNormalization,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    let (c, kappa) = norm.constants();
    let failure = std::cell::RefCell::new(None::<Error>);
    let density = |alpha: f64| -> f64 {
        let lag = t - alpha;
        if lag <= 0.0 {
            return 0.0;
        }
        let run = || -> Result<f64> {
            let (w, r1, r2, psi) = piece_weight(ctx, piece, alpha)?;
            if w.abs() < 1e-300 || psi == 0.0 {
                return Ok(0.0);
            }
            Ok(w * inner_integral(piece, r, lag, kappa, (r1, r2, psi), spec)?)
        };
        match run() {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };

    // The interaction zone around t* is narrow in α; split it off from the smooth part.
    let speed = ctx.scenario.traj.psi0(ctx.scenario.traj.t_star).1.abs().max(1e-12);
    let zone = 40.0 * ctx.eps / speed;
    let ts = ctx.scenario.traj.t_star;
    let near = (0.05 * t).min(zone).max(1e-12 * t);
    let split = t - near;
    let breaks = [ts - zone, ts - 4.0 * ctx.eps / speed, ts, ts + 4.0 * ctx.eps / speed, ts + zone];
    let regular = integrate_interval_breaks(|a| density(a) / (t - a).sqrt(), 0.0, split, &breaks, spec)?.value;
    let singular = integrate_abel(|s| density(split + s), near, spec)?.value;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(-c * (regular + singular))
}

/// Hölder quotients max(|q̂(r₀+g)−q̂(r₀)|, |q̂(r₀)−q̂(r₀−g)|)/g^μ for each gap g.
#[allow(clippy::too_many_arguments)]
pub fn holder_quotients(
    ctx: &AnsatzContext,
    piece: KernelPiece,
    r0: f64,
    t: f64,
    gaps: &[f64],
    mu: f64,
    norm: KernelNormalization,
    spec: &QuadratureSpec,
) -> Result<Vec<f64>> {
    let q0 = correction_qhat_kernel(ctx, piece, r0, t, norm, spec)?;
    gaps.iter()
        .map(|&g| {
            let up = correction_qhat_kernel(ctx, piece, r0 + g, t, norm, spec)?;
            let down = correction_qhat_kernel(ctx, piece, r0 - g, t, norm, spec)?;
            Ok((up - q0).abs().max((q0 - down).abs()) / g.powf(mu))
        })
        .collect()
}

/// The same singular piece by a BDF2 finite-difference solve on [a, b] with zero data.
pub fn solve_singular_piece_fd(
    ctx: &AnsatzContext,
    piece: KernelPiece,
    norm: KernelNormalization,
    domain: (f64, f64),
    h_max: f64,
    dt_max: f64,
    t_end: f64,
) -> Result<(RadialGrid, Vec<f64>, Vec<Vec<f64>>)> {
    let grid = RadialGrid::with_max_spacing(domain.0, domain.1, h_max)?;
    let (diff, s) = norm.equation();
    let n = grid.len();
    let h = grid.h();
    let steps = (t_end / dt_max).ceil() as usize;
    let dt = t_end / steps as f64;
    let cell_source = |t: f64| -> Result<Vec<f64>> {
        let (w, r1, r2, psi) = piece_weight(ctx, piece, t)?;
        let mut f = vec![0.0; n];
        if w.abs() < 1e-300 || psi == 0.0 {
            return Ok(f);
        }
        let (lo, hi) = (r1.min(r2), r1.max(r2));
        let mid = 0.5 * (r1 + r2);
        for (j, fj) in f.iter_mut().enumerate().take(n - 1).skip(1) {
            let a = (grid.node(j) - 0.5 * h).max(lo);
            let b = (grid.node(j) + 0.5 * h).min(hi);
            if b > a {
                let mass = match piece {
                    KernelPiece::Q1 => (b - a) / psi,
                    KernelPiece::QStar1 => 0.5 * ((b - mid).powi(2) - (a - mid).powi(2)) / (psi * psi),
                };
                *fj = s * w * mass / h;
            }
        }
        Ok(f)
    };
    let times: Vec<f64> = (0..=steps).map(|k| dt * k as f64).collect();
    let mut q = vec![vec![0.0; n]];
    let k2 = diff / (h * h);
    for k in 1..=steps {
        let f = cell_source(times[k])?;
        let bdf2 = k >= 2;
        let alpha = if bdf2 { 1.5 } else { 1.0 };
        let mut rhs: Vec<f64> = (0..n)
            .map(|j| {
                let hist = if bdf2 { 2.0 * q[k - 1][j] - 0.5 * q[k - 2][j] } else { q[k - 1][j] };
                hist / dt + f[j]
            })
            .collect();
        let mut sub = vec![-k2; n];
        let mut sup = vec![-k2; n];
        let mut diag = vec![alpha / dt + 2.0 * k2; n];
        sub[0] = 0.0;
        sup[0] = 0.0;
        diag[0] = 1.0;
        rhs[0] = 0.0;
        sub[n - 1] = 0.0;
        sup[n - 1] = 0.0;
        diag[n - 1] = 1.0;
        rhs[n - 1] = 0.0;
        q.push(solve_tridiagonal(&sub, &diag, &sup, &rhs));
    }
    Ok((grid, times, q))
}

/// Formula and pipeline values of the temperature jump at contact.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TemperatureJump {
    /// −(r₁₀(t*)/4)(v₁² + v₂²).
    pub formula: f64,
    /// Plateau difference of (eI)/r at the midpoint of the fronts, post minus pre.
    pub measured: f64,
    pub plateau_pre: f64,
    pub plateau_post: f64,
    /// The same difference with coefficient 1 in place of κ₁ on r_i r_{it}.
    pub measured_unit_coefficient: f64,
    pub eps: f64,
    pub tau_plateau: f64,
}

/// Evaluates the temperature jump at contact from the τ → ±∞ plateaus of (eI)/r at the
/// front midpoint, using a small ε so the plateaus sit at (r*, t*).
pub fn temperature_jump(
    scenario: &Scenario,
    sol: &InteractionSolution,
    profile: ProfileParams,
    eps: f64,
) -> Result<TemperatureJump> {
    let ctx = AnsatzContext::new(scenario, sol, eps, profile)?;
    let (lo, hi) = sol.tau_range();
    let tau_p = 40.0f64.min(0.5 * hi).min(-0.5 * lo);
    let plateau = |tau: f64| -> Result<f64> {
        let t = sol.time_of_tau(tau, eps, &scenario.traj).ok_or(Error::TauOutOfRange { tau, lo, hi })?;
        let c = ctx.coeffs(t)?;
        let r = c.r_mid;
        Ok(profile.cutoff(r).0 * c.i_value(r).0 / r)
    };
    let pre = plateau(tau_p)?;
    let post = plateau(-tau_p)?;
    let pre2 = plateau(0.75 * tau_p)?;
    let post2 = plateau(-0.75 * tau_p)?;
    let scale = pre.abs().max(post.abs()).max(1.0);
    if (pre - pre2).abs() > 1e-3 * scale || (post - post2).abs() > 1e-3 * scale {
        return Err(Error::PlateauNotConverged { spread: (pre - pre2).abs().max((post - post2).abs()) });
    }
    let (v1, v2) = scenario.traj.contact_velocities;
    let r10 = scenario.traj.r10(scenario.traj.t_star).0;
    let formula = -(r10 / 4.0) * (v1 * v1 + v2 * v2);
    let measured = post - pre;
    let k = scenario.kinetics;
    // (k₁−k₂)/2 is linear in κ₁ with the κ₂ parts cancelling.
    Ok(TemperatureJump {
        formula,
        measured,
        plateau_pre: pre,
        plateau_post: post,
        measured_unit_coefficient: measured / k.kappa1,
        eps,
        tau_plateau: tau_p,
    })
}
