//! Sharp-interface side of the construction: front trajectories up to contact, their
//! continuation past it, one-sided temperature gradients, manufactured scenarios and a
//! moving-mesh solver for the three-phase radial Stefan problem with kinetic undercooling.

use crate::error::{Error, Result};
use crate::numerics::{solve_tridiagonal, CubicSpline};

/// Kinetic coefficients of the Gibbs–Thomson condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinetics {
    pub kappa1: f64,
    pub kappa2: f64,
}

impl Kinetics {
    /// Front value (−1)^{i+1}(κ₁ r v + κ₂) of σ at front `i` (1 or 2).
    pub fn front_value(&self, i: usize, r: f64, v: f64) -> f64 {
        let k = self.kappa1 * r * v + self.kappa2;
        if i == 1 {
            k
        } else {
            -k
        }
    }
}

/// A front radius as a function of time.
#[derive(Debug, Clone)]
pub enum FrontCurve {
    /// r = r* + p1·s + p2·s², s = t* − t.
    Quadratic { t_star: f64, r_star: f64, p1: f64, p2: f64 },
    Sampled(CubicSpline),
}

impl FrontCurve {
    /// Value, first and second time derivative.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        match self {
            FrontCurve::Quadratic { t_star, r_star, p1, p2 } => {
                let s = t_star - t;
                (r_star + p1 * s + p2 * s * s, -p1 - 2.0 * p2 * s, 2.0 * p2)
            }
            FrontCurve::Sampled(s) => s.eval_all(t),
        }
    }
}

/// One-sided gradient magnitudes at both fronts: ∂σ̄/∂r at r_i ± 0 equals ±γ_i^±.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Gammas {
    pub g1m: f64,
    pub g1p: f64,
    pub g2m: f64,
    pub g2p: f64,
}

/// How γ_i^− is split off the flux sums S₁ = r₁₀³r₁₀′ and S₂ = −r₂₀³r₂₀′; γ_i^+ = S_i − γ_i^−.
#[derive(Debug, Clone)]
pub enum GammaModel {
    /// γ_i^− = λ_i S_i for all t.
    FixedSplit { lambda1: f64, lambda2: f64 },
    /// γ_i^± sampled up to `t_last`, then γ_i^− = λ_i S_i and γ_i^+ = μ_i S_i with λ_i frozen
    /// at `t_last` and μ_i = 1 − λ_i.
    Sampled {
        minus: [CubicSpline; 2],
        plus: [CubicSpline; 2],
        t_last: f64,
        lambda: [f64; 2],
        mu: [f64; 2],
    },
}

#[derive(Debug, Clone)]
pub struct FrontTrajectory {
    pub front1: FrontCurve,
    pub front2: FrontCurve,
    pub gammas: GammaModel,
    pub t_star: f64,
    pub r_star: f64,
    pub t_end: f64,
    /// One-sided velocity limits at t* from below.
    pub contact_velocities: (f64, f64),
    /// Set when a front fell back to a constant extension past t*.
    pub constant_extension: [bool; 2],
}

/// One row of the trajectory CSV.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub r1hat: Option<f64>,
    pub r2hat: Option<f64>,
    pub r10: f64,
    pub r20: f64,
    pub v1: f64,
    pub v2: f64,
    pub gamma1m: f64,
    pub gamma1p: f64,
    pub gamma2m: f64,
    pub gamma2p: f64,
}

impl FrontTrajectory {
    pub fn r10(&self, t: f64) -> (f64, f64, f64) {
        self.front1.eval(t)
    }

    pub fn r20(&self, t: f64) -> (f64, f64, f64) {
        self.front2.eval(t)
    }

    /// ψ₀ = r₂₀ − r₁₀ with two time derivatives.
    pub fn psi0(&self, t: f64) -> (f64, f64, f64) {
        let a = self.r10(t);
        let b = self.r20(t);
        (b.0 - a.0, b.1 - a.1, b.2 - a.2)
    }

    /// (S₁, S₂) = (r₁₀³r₁₀′, −r₂₀³r₂₀′).
    pub fn flux_sums(&self, t: f64) -> (f64, f64) {
        let (r1, v1, _) = self.r10(t);
        let (r2, v2, _) = self.r20(t);
        (r1.powi(3) * v1, -r2.powi(3) * v2)
    }

    pub fn gammas(&self, t: f64) -> Gammas {
        let (s1, s2) = self.flux_sums(t);
        match &self.gammas {
            GammaModel::FixedSplit { lambda1, lambda2 } => {
                let (g1m, g2m) = (lambda1 * s1, lambda2 * s2);
                Gammas { g1m, g1p: s1 - g1m, g2m, g2p: s2 - g2m }
            }
            GammaModel::Sampled { minus, plus, t_last, lambda, mu } => {
                if t <= *t_last {
                    Gammas { g1m: minus[0].eval(t), g1p: plus[0].eval(t), g2m: minus[1].eval(t), g2p: plus[1].eval(t) }
                } else {
                    Gammas { g1m: lambda[0] * s1, g1p: mu[0] * s1, g2m: lambda[1] * s2, g2p: mu[1] * s2 }
                }
            }
        }
    }

    pub fn rows(&self, n: usize) -> Vec<TrajectoryRow> {
        (0..=n)
            .map(|k| {
                let t = self.t_end * k as f64 / n as f64;
                let (r10, v1, _) = self.r10(t);
                let (r20, v2, _) = self.r20(t);
                let pre = t < self.t_star;
                let g = self.gammas(t);
                TrajectoryRow {
                    t,
                    r1hat: pre.then_some(r10),
                    r2hat: pre.then_some(r20),
                    r10,
                    r20,
                    v1,
                    v2,
                    gamma1m: g.g1m,
                    gamma1p: g.g1p,
                    gamma2m: g.g2m,
                    gamma2p: g.g2p,
                }
            })
            .collect()
    }
}

/// Which scenario drives the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    ManufacturedSymmetric,
    ManufacturedAsymmetric,
    Solved,
}

/// Closed-form fronts r₁₀ = r* − a₁s − c₁s², r₂₀ = r* + a₂s + c₂s² with s = t* − t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedParams {
    pub r_star: f64,
    pub t_star: f64,
    pub t_end: f64,
    pub a1: f64,
    pub a2: f64,
    pub c1: f64,
    pub c2: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl ManufacturedParams {
    pub fn symmetric(a: f64) -> Self {
        Self { r_star: 2.0, t_star: 0.5, t_end: 0.75, a1: a, a2: a, c1: 0.0, c2: 0.0, r_min: 1.0, r_max: 3.0 }
    }

    pub fn asymmetric() -> Self {
        Self { r_star: 2.0, t_star: 0.5, t_end: 0.75, a1: 1.2, a2: 0.8, c1: 0.4, c2: 0.3, r_min: 1.0, r_max: 3.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let s_lo = self.t_star - self.t_end;
        let s_hi = self.t_star;
        let v1_ok = [s_lo, s_hi].iter().all(|s| self.a1 + 2.0 * self.c1 * s > 0.0);
        let v2_ok = [s_lo, s_hi].iter().all(|s| self.a2 + 2.0 * self.c2 * s > 0.0);
        if !(v1_ok && v2_ok) {
            return Err(Error::Invalid("manufactured fronts must keep the sign of their velocities".into()));
        }
        if !(self.t_star > 0.0 && self.t_end > self.t_star) {
            return Err(Error::Invalid("need 0 < t* < t1".into()));
        }
        let m = ManufacturedScenario::from_params(*self, Kinetics { kappa1: 1.0, kappa2: 1.0 });
        for k in 0..=64 {
            let t = self.t_end * k as f64 / 64.0;
            let (a, b) = (m.traj.r10(t).0, m.traj.r20(t).0);
            if !(a.min(b) > self.r_min && a.max(b) < self.r_max) {
                return Err(Error::Invalid(format!("manufactured fronts leave the domain at t = {t}")));
            }
        }
        Ok(())
    }
}

/// Manufactured scenario: analytic fronts, σ̄ satisfying the front conditions exactly and
/// the heat equation up to a recorded defect.
#[derive(Debug, Clone)]
pub struct ManufacturedScenario {
    pub params: ManufacturedParams,
    pub kinetics: Kinetics,
    pub traj: FrontTrajectory,
}

impl ManufacturedScenario {
    pub fn from_params(params: ManufacturedParams, kinetics: Kinetics) -> Self {
        let p = params;
        let front1 = FrontCurve::Quadratic { t_star: p.t_star, r_star: p.r_star, p1: -p.a1, p2: -p.c1 };
        let front2 = FrontCurve::Quadratic { t_star: p.t_star, r_star: p.r_star, p1: p.a2, p2: p.c2 };
        let traj = FrontTrajectory {
            front1,
            front2,
            gammas: GammaModel::FixedSplit { lambda1: 0.5, lambda2: 0.5 },
            t_star: p.t_star,
            r_star: p.r_star,
            t_end: p.t_end,
            contact_velocities: (p.a1, -p.a2),
            constant_extension: [false; 2],
        };
        Self { params, kinetics, traj }
    }

    fn front_data(&self, t: f64) -> (f64, f64, f64, f64, Gammas) {
        let (r1, v1, _) = self.traj.r10(t);
        let (r2, v2, _) = self.traj.r20(t);
        let k1 = self.kinetics.front_value(1, r1, v1);
        let k2 = -self.kinetics.front_value(2, r2, v2);
        (r1, r2, k1, k2, self.traj.gammas(t))
    }

    /// σ̄ and ∂σ̄/∂r, ∂²σ̄/∂r² for t < t*; outside the fronts it is defined for all t.
    pub fn sigma_bar_all(&self, r: f64, t: f64) -> Option<(f64, f64, f64)> {
        let (r1, r2, k1, k2, g) = self.front_data(t);
        if r <= r1.min(r2) {
            let r1 = r1.min(r2);
            return Some((k1 - g.g1m * (r - r1), -g.g1m, 0.0));
        }
        if r >= r1.max(r2) {
            let r2 = r1.max(r2);
            return Some((-k2 + g.g2p * (r - r2), g.g2p, 0.0));
        }
        if t >= self.params.t_star {
            return None;
        }
        let h = r2 - r1;
        let s = (r - r1) / h;
        let (y0, y1, m0, m1) = (k1, -k2, g.g1p * h, -g.g2m * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1;
        let d = (6.0 * s2 - 6.0 * s) * y0 + (3.0 * s2 - 4.0 * s + 1.0) * m0 + (-6.0 * s2 + 6.0 * s) * y1 + (3.0 * s2 - 2.0 * s) * m1;
        let dd = (12.0 * s - 6.0) * y0 + (6.0 * s - 4.0) * m0 + (-12.0 * s + 6.0) * y1 + (6.0 * s - 2.0) * m1;
        Some((v, d / h, dd / (h * h)))
    }

    pub fn sigma_bar(&self, r: f64, t: f64) -> Option<f64> {
        self.sigma_bar_all(r, t).map(|x| x.0)
    }

    /// Dirichlet data at (R₁, R₂).
    pub fn boundary_values(&self, t: f64) -> (f64, f64) {
        (
            self.sigma_bar_all(self.params.r_min, t).expect("outer region").0,
            self.sigma_bar_all(self.params.r_max, t).expect("outer region").0,
        )
    }

    /// Heat-equation defect σ̄_t − σ̄_rr at a pre-contact point off the fronts.
    pub fn defect(&self, r: f64, t: f64) -> Option<f64> {
        let (r1, r2, ..) = self.front_data(t);
        let region = |r1: f64, r2: f64| (r > r1) as u8 + (r > r2) as u8;
        let dt = 1e-6;
        let reg = region(r1, r2);
        let rp = self.front_data(t + dt);
        let rm = self.front_data(t - dt);
        if region(rp.0, rp.1) != reg || region(rm.0, rm.1) != reg {
            return None;
        }
        let up = self.sigma_bar_all(r, t + dt)?.0;
        let um = self.sigma_bar_all(r, t - dt)?.0;
        let rr = self.sigma_bar_all(r, t)?.2;
        Some((up - um) / (2.0 * dt) - rr)
    }

    /// Supremum of |defect| over a space-time sweep of the pre-contact box.
    pub fn defect_sup(&self, nr: usize, nt: usize) -> f64 {
        let p = self.params;
        let mut worst: f64 = 0.0;
        for j in 0..nt {
            let t = 0.98 * p.t_star * j as f64 / (nt - 1) as f64;
            for i in 0..=nr {
                let r = p.r_min + (p.r_max - p.r_min) * i as f64 / nr as f64;
                if let Some(d) = self.defect(r, t) {
                    worst = worst.max(d.abs());
                }
            }
        }
        worst
    }
}

/// Solver controls for the sharp-interface problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpParams {
    /// Cells per subdomain.
    pub cells: usize,
    pub dt: f64,
    pub newton_tol: f64,
    pub max_halvings: usize,
}

impl Default for SharpParams {
    fn default() -> Self {
        Self { cells: 40, dt: 1e-3, newton_tol: 1e-10, max_halvings: 8 }
    }
}

/// Three-subdomain state: σ̄ on [R₁,r₁], [r₁,r₂], [r₂,R₂], each on `cells + 1` mapped nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SharpInterfaceState {
    pub t: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub r1: f64,
    pub r2: f64,
    pub v1: f64,
    pub v2: f64,
    pub sigma: [Vec<f64>; 3],
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StepReport {
    pub t: f64,
    pub r1: f64,
    pub r2: f64,
    pub v1: f64,
    pub v2: f64,
    pub flux_residual: f64,
    pub newton_iterations: usize,
    pub dt_used: f64,
    pub gammas: Gammas,
    /// ∫σ̄ dr over the whole domain.
    pub heat_content: f64,
    /// σ̄_r(R₂) − σ̄_r(R₁).
    pub boundary_flux: f64,
}

impl SharpInterfaceState {
    /// Piecewise-linear initial state through the boundary data and the front values at rest.
    pub fn piecewise_linear(r_min: f64, r_max: f64, r1: f64, r2: f64, bc: (f64, f64), kin: Kinetics, cells: usize) -> Self {
        let f1 = kin.front_value(1, r1, 0.0);
        let f2 = kin.front_value(2, r2, 0.0);
        let lin = |a: f64, b: f64| (0..=cells).map(|k| a + (b - a) * k as f64 / cells as f64).collect::<Vec<_>>();
        Self {
            t: 0.0,
            r_min,
            r_max,
            r1,
            r2,
            v1: 0.0,
            v2: 0.0,
            sigma: [lin(bc.0, f1), lin(f1, f2), lin(f2, bc.1)],
        }
    }

    /// The equilibrium with fronts at rest: one straight line through ±κ₂ at the fronts.
    pub fn stationary(r_min: f64, r_max: f64, r1: f64, r2: f64, kin: Kinetics, cells: usize) -> (Self, (f64, f64)) {
        let slope = -2.0 * kin.kappa2 / (r2 - r1);
        let bc = (kin.kappa2 + slope * (r_min - r1), kin.kappa2 + slope * (r_max - r1));
        (Self::piecewise_linear(r_min, r_max, r1, r2, bc, kin, cells), bc)
    }

    /// σ̄ at r by linear interpolation on the subdomain containing r.
    pub fn sigma_at(&self, r: f64) -> f64 {
        let j = if r <= self.r1 { 0 } else if r <= self.r2 { 1 } else { 2 };
        let (a, b) = self.bounds()[j];
        self.value_rel(j, (r - a) / (b - a))
    }

    /// Linear interpolation in subdomain `j` at relative position ξ ∈ [0, 1].
    pub fn value_rel(&self, j: usize, xi: f64) -> f64 {
        let n = self.cells();
        let x = (xi * n as f64).clamp(0.0, n as f64);
        let k = (x.floor() as usize).min(n - 1);
        let f = x - k as f64;
        let s = &self.sigma[j];
        s[k] * (1.0 - f) + s[k + 1] * f
    }

    pub fn cells(&self) -> usize {
        self.sigma[0].len() - 1
    }

    fn bounds(&self) -> [(f64, f64); 3] {
        [(self.r_min, self.r1), (self.r1, self.r2), (self.r2, self.r_max)]
    }

    /// Physical node positions of subdomain `j`.
    pub fn nodes(&self, j: usize) -> Vec<f64> {
        let (a, b) = self.bounds()[j];
        let n = self.cells();
        (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
    }

    /// One-sided second-order gradients at both sides of both fronts.
    pub fn gammas(&self) -> Gammas {
        let n = self.cells();
        let b = self.bounds();
        let h: Vec<f64> = b.iter().map(|(a, c)| (c - a) / n as f64).collect();
        let right_end = |s: &[f64], h: f64| (3.0 * s[n] - 4.0 * s[n - 1] + s[n - 2]) / (2.0 * h);
        let left_end = |s: &[f64], h: f64| (-3.0 * s[0] + 4.0 * s[1] - s[2]) / (2.0 * h);
        Gammas {
            g1m: -right_end(&self.sigma[0], h[0]),
            g1p: left_end(&self.sigma[1], h[1]),
            g2m: -right_end(&self.sigma[1], h[1]),
            g2p: left_end(&self.sigma[2], h[2]),
        }
    }

    /// Residuals of the flux-jump conditions [σ̄_r] = (−1)^{i+1} r_i³ r_i′.
    pub fn flux_residual(&self) -> (f64, f64) {
        let g = self.gammas();
        (g.g1p + g.g1m - self.r1.powi(3) * self.v1, g.g2p + g.g2m + self.r2.powi(3) * self.v2)
    }

    pub fn heat_content(&self) -> f64 {
        let n = self.cells();
        self.bounds()
            .iter()
            .zip(&self.sigma)
            .map(|((a, b), s)| {
                let h = (b - a) / n as f64;
                h * (s.iter().sum::<f64>() - 0.5 * (s[0] + s[n]))
            })
            .sum()
    }

    pub fn boundary_flux(&self) -> f64 {
        let n = self.cells();
        let b = self.bounds();
        let h0 = (b[0].1 - b[0].0) / n as f64;
        let h2 = (b[2].1 - b[2].0) / n as f64;
        let s0 = &self.sigma[0];
        let s2 = &self.sigma[2];
        let left = (-3.0 * s0[0] + 4.0 * s0[1] - s0[2]) / (2.0 * h0);
        let right = (3.0 * s2[n] - 4.0 * s2[n - 1] + s2[n - 2]) / (2.0 * h2);
        right - left
    }

    /// Trial step with prescribed velocities; `None` if the fronts would cross or leave.
    fn trial(&self, dt: f64, v1: f64, v2: f64, bc: (f64, f64), kin: Kinetics) -> Option<Self> {
        let r1 = self.r1 + dt * v1;
        let r2 = self.r2 + dt * v2;
        if !(self.r_min < r1 && r1 < r2 && r2 < self.r_max) {
            return None;
        }
        let n = self.cells();
        let old = self.bounds();
        let new = [(self.r_min, r1), (r1, r2), (r2, self.r_max)];
        let ends = [
            (bc.0, kin.front_value(1, r1, v1)),
            (kin.front_value(1, r1, v1), kin.front_value(2, r2, v2)),
            (kin.front_value(2, r2, v2), bc.1),
        ];
        let mut sigma: [Vec<f64>; 3] = Default::default();
        for j in 0..3 {
            let (a0, b0) = old[j];
            let (a1, b1) = new[j];
            let (da, db) = ((a1 - a0) / dt, (b1 - b0) / dt);
            let h = (b1 - a1) / n as f64;
            let m = n - 1;
            let mut sub = vec![0.0; m];
            let mut diag = vec![0.0; m];
            let mut sup = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for k in 1..n {
                let xi = k as f64 / n as f64;
                let w = da + xi * (db - da);
                let lo = -dt / (h * h) + dt * w / (2.0 * h);
                let hi = -dt / (h * h) - dt * w / (2.0 * h);
                let i = k - 1;
                sub[i] = lo;
                sup[i] = hi;
                diag[i] = 1.0 + 2.0 * dt / (h * h);
                rhs[i] = self.sigma[j][k];
                if k == 1 {
                    rhs[i] -= lo * ends[j].0;
                }
                if k == n - 1 {
                    rhs[i] -= hi * ends[j].1;
                }
            }
            let inner = solve_tridiagonal(&sub, &diag, &sup, &rhs);
            let mut s = Vec::with_capacity(n + 1);
            s.push(ends[j].0);
            s.extend(inner);
            s.push(ends[j].1);
            sigma[j] = s;
        }
        Some(Self { t: self.t + dt, r_min: self.r_min, r_max: self.r_max, r1, r2, v1, v2, sigma })
    }

    fn newton(&self, dt: f64, bc: (f64, f64), kin: Kinetics, tol: f64) -> Option<(Self, usize, f64)> {
        let mut v = [self.v1, self.v2];
        let eval = |v: [f64; 2]| -> Option<(Self, [f64; 2])> {
            let s = self.trial(dt, v[0], v[1], bc, kin)?;
            let (f1, f2) = s.flux_residual();
            Some((s, [f1, f2]))
        };
        let mut last = f64::INFINITY;
        for it in 0..40 {
            let (s, f) = eval(v)?;
            let norm = f[0].abs().max(f[1].abs());
            if !norm.is_finite() {
                return None;
            }
            if norm <= tol {
                return Some((s, it, norm));
            }
            let mut jac = [[0.0; 2]; 2];
            for c in 0..2 {
                let step = 1e-7 * v[c].abs().max(1.0);
                let mut vp = v;
                vp[c] += step;
                let (_, fp) = eval(vp)?;
                jac[0][c] = (fp[0] - f[0]) / step;
                jac[1][c] = (fp[1] - f[1]) / step;
            }
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if det == 0.0 || !det.is_finite() {
                return None;
            }
            let d0 = (f[0] * jac[1][1] - f[1] * jac[0][1]) / det;
            let d1 = (jac[0][0] * f[1] - jac[1][0] * f[0]) / det;
            v = [v[0] - d0, v[1] - d1];
            if it > 8 && norm > 0.5 * last {
                last = norm;
                continue;
            }
            last = norm;
        }
        None
    }

    /// One implicit step: mapped heat solve on each subdomain, velocities by Newton on the
    /// flux-jump conditions with the Gibbs–Thomson values as Dirichlet data.
    pub fn step(&self, dt: f64, bc: (f64, f64), kin: Kinetics, params: &SharpParams) -> Result<(Self, StepReport)> {
        let mut dt_try = dt;
        for halving in 0..=params.max_halvings {
            if let Some((s, iterations, res)) = self.newton(dt_try, bc, kin, params.newton_tol) {
                let report = StepReport {
                    t: s.t,
                    r1: s.r1,
                    r2: s.r2,
                    v1: s.v1,
                    v2: s.v2,
                    flux_residual: res,
                    newton_iterations: iterations,
                    dt_used: dt_try,
                    gammas: s.gammas(),
                    heat_content: s.heat_content(),
                    boundary_flux: s.boundary_flux(),
                };
                return Ok((s, report));
            }
            if halving == params.max_halvings {
                break;
            }
            dt_try *= 0.5;
        }
        let (f1, f2) = self.flux_residual();
        Err(Error::NewtonDiverged { retries: params.max_halvings, residual: f1.abs().max(f2.abs()) })
    }
}

/// History of a sharp-interface run up to the contact threshold.
#[derive(Debug, Clone)]
pub struct SharpRun {
    pub reports: Vec<StepReport>,
    /// State after every step, starting with the initial one.
    pub states: Vec<SharpInterfaceState>,
    pub final_state: SharpInterfaceState,
    pub reached_threshold: bool,
}

impl SharpRun {
    /// σ̄ at (r, t), interpolated linearly in time at fixed relative position inside the
    /// subdomain that contains r at time t.
    pub fn sigma_at(&self, r: f64, t: f64) -> f64 {
        let n = self.states.len();
        let k = (self.states.partition_point(|s| s.t <= t).max(1) - 1).min(n.saturating_sub(2));
        if n == 1 {
            return self.states[0].sigma_at(r);
        }
        let (a, b) = (&self.states[k], &self.states[k + 1]);
        let th = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
        let r1 = a.r1 + th * (b.r1 - a.r1);
        let r2 = a.r2 + th * (b.r2 - a.r2);
        let (j, lo, hi) = if r <= r1 {
            (0, a.r_min, r1)
        } else if r <= r2 {
            (1, r1, r2)
        } else {
            (2, r2, a.r_max)
        };
        let xi = (r - lo) / (hi - lo);
        (1.0 - th) * a.value_rel(j, xi) + th * b.value_rel(j, xi)
    }
}

/// Integrates until `t_end` or until the gap drops to `contact_threshold`.
pub fn run_sharp_interface(
    init: SharpInterfaceState,
    bc: (f64, f64),
    kin: Kinetics,
    params: &SharpParams,
    t_end: f64,
    contact_threshold: f64,
) -> Result<SharpRun> {
    let mut state = init;
    let mut states = vec![state.clone()];
    let mut reports = vec![StepReport {
        t: state.t,
        r1: state.r1,
        r2: state.r2,
        v1: state.v1,
        v2: state.v2,
        flux_residual: 0.0,
        newton_iterations: 0,
        dt_used: 0.0,
        gammas: state.gammas(),
        heat_content: state.heat_content(),
        boundary_flux: state.boundary_flux(),
    }];
    while state.t < t_end - 1e-14 {
        let gap = state.r2 - state.r1;
        if gap <= contact_threshold {
            return Ok(SharpRun { reports, states, final_state: state, reached_threshold: true });
        }
        let mut dt = params.dt.min(t_end - state.t);
        let closing = (state.v1 - state.v2).max(0.0);
        if closing * dt > 0.5 * (gap - 0.5 * contact_threshold).max(0.0) && closing > 0.0 {
            dt = dt.min(0.5 * gap / closing);
        }
        let (next, rep) = state.step(dt, bc, kin, params)?;
        if !next.sigma.iter().flatten().all(|v| v.is_finite()) {
            return Err(Error::Blowup { t: next.t, what: "sigma".into() });
        }
        reports.push(rep);
        states.push(next.clone());
        state = next;
    }
    let reached = state.r2 - state.r1 <= contact_threshold;
    Ok(SharpRun { reports, states, final_state: state, reached_threshold: reached })
}

/// Contact time and radius from sampled fronts: the first sample with gap ≤ `threshold`
/// is extrapolated linearly to zero gap from the last two samples.
pub fn detect_contact(t: &[f64], r1: &[f64], r2: &[f64], threshold: f64) -> Result<(f64, f64)> {
    let n = t.len();
    if n < 2 || r1.len() != n || r2.len() != n {
        return Err(Error::GridMismatch("contact detection needs matching samples".into()));
    }
    let k = (0..n).find(|&k| r2[k] - r1[k] <= threshold).ok_or(Error::NoContact)?;
    if k == 0 {
        return Err(Error::Invalid("fronts already in contact at the first sample".into()));
    }
    let g0 = r2[k - 1] - r1[k - 1];
    let g1 = r2[k] - r1[k];
    let dt = t[k] - t[k - 1];
    let rate = (g1 - g0) / dt;
    if !(rate < 0.0) {
        return Err(Error::NoContact);
    }
    let ts = t[k] - g1 / rate;
    let v1 = (r1[k] - r1[k - 1]) / dt;
    let rs = r1[k] + v1 * (ts - t[k]);
    Ok((ts, rs))
}

/// Continues sampled pre-contact fronts past t* linearly with the one-sided velocities,
/// returning the continued curves and whether each fell back to a constant extension.
pub fn continue_fronts(
    t: &[f64],
    r1: &[f64],
    r2: &[f64],
    t_star: f64,
    r_star: f64,
    v: (f64, f64),
    t_end: f64,
) -> Result<(FrontCurve, FrontCurve, [bool; 2])> {
    if !(t_star < t_end) {
        return Err(Error::Invalid("continuation needs t* < t1".into()));
    }
    let last = *t.last().ok_or(Error::Invalid("empty trajectory".into()))?;
    let spacing = (last - t[0]) / (t.len().max(2) - 1) as f64;
    let n_post = (((t_end - last) / spacing).ceil() as usize).max(4);
    let mut fallback = [false; 2];
    let mut curve = |r: &[f64], vel: f64, want_positive: bool, idx: usize| -> Result<FrontCurve> {
        let ok = if want_positive { vel > 0.0 } else { vel < 0.0 };
        let vel = if ok {
            vel
        } else {
            fallback[idx] = true;
            0.0
        };
        let rl = *r.last().unwrap();
        let mut x = t.to_vec();
        let mut y = r.to_vec();
        for k in 1..=n_post {
            let tk = last + (t_end - last) * k as f64 / n_post as f64;
            x.push(tk);
            y.push(if tk <= t_star { rl + (r_star - rl) * (tk - last) / (t_star - last) } else { r_star + vel * (tk - t_star) });
        }
        Ok(FrontCurve::Sampled(CubicSpline::new(x, y)?))
    };
    let c1 = curve(r1, v.0, true, 0)?;
    let c2 = curve(r2, v.1, false, 1)?;
    Ok((c1, c2, fallback))
}

/// Total variation over range; large values flag an oscillating gradient trace.
fn oscillation_ratio(v: &[f64]) -> f64 {
    let tv: f64 = v.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    tv / ((hi - lo) + 1e-9 * scale.max(1e-300))
}

/// Builds the γ model from sampled one-sided gradients, continued with a frozen split of
/// the flux sums.
pub fn extract_and_continue_gammas(
    t: &[f64],
    minus: [&[f64]; 2],
    plus: [&[f64]; 2],
    front1: &FrontCurve,
    front2: &FrontCurve,
) -> Result<GammaModel> {
    for g in minus.iter().chain(plus.iter()) {
        if oscillation_ratio(g) > 20.0 {
            return Err(Error::NoisyGradient { t: *t.last().unwrap_or(&0.0) });
        }
    }
    let t_last = *t.last().ok_or(Error::Invalid("empty gradient history".into()))?;
    let (r1, v1, _) = front1.eval(t_last);
    let (r2, v2, _) = front2.eval(t_last);
    let s = [r1.powi(3) * v1, -r2.powi(3) * v2];
    let spline = |g: &[f64]| CubicSpline::new(t.to_vec(), g.to_vec());
    let minus = [spline(minus[0])?, spline(minus[1])?];
    let plus = [spline(plus[0])?, spline(plus[1])?];
    let ratio = |g: f64, s: f64| if s.abs() > 1e-12 { g / s } else { 0.5 };
    let lambda = [ratio(minus[0].eval(t_last), s[0]), ratio(minus[1].eval(t_last), s[1])];
    let mu = [1.0 - lambda[0], 1.0 - lambda[1]];
    Ok(GammaModel::Sampled { minus, plus, t_last, lambda, mu })
}

/// Configuration of the solved scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolvedParams {
    pub r_min: f64,
    pub r_max: f64,
    pub r1_init: f64,
    pub r2_init: f64,
    pub boundary: (f64, f64),
    pub t_end: f64,
    pub sharp: SharpParams,
}

impl Default for SolvedParams {
    fn default() -> Self {
        Self {
            r_min: 1.0,
            r_max: 3.0,
            r1_init: 1.6,
            r2_init: 2.4,
            boundary: (8.0, 8.0),
            t_end: 0.75,
            sharp: SharpParams::default(),
        }
    }
}

/// Solves the sharp-interface problem, detects contact and continues fronts and gradients.
pub fn solved_trajectory(p: &SolvedParams, kin: Kinetics) -> Result<(FrontTrajectory, SharpRun)> {
    let init = SharpInterfaceState::piecewise_linear(p.r_min, p.r_max, p.r1_init, p.r2_init, p.boundary, kin, p.sharp.cells);
    let threshold = 3.0 * (p.r_max - p.r_min) / (3 * p.sharp.cells) as f64;
    let run = run_sharp_interface(init, p.boundary, kin, &p.sharp, p.t_end, threshold)?;
    if !run.reached_threshold {
        return Err(Error::NoContact);
    }
    // the first step starts from rest; the gradient trace is taken from step 1 on
    let reps = &run.reports[1..];
    let t: Vec<f64> = reps.iter().map(|r| r.t).collect();
    let r1: Vec<f64> = reps.iter().map(|r| r.r1).collect();
    let r2: Vec<f64> = reps.iter().map(|r| r.r2).collect();
    let (t_star, r_star) = detect_contact(&t, &r1, &r2, threshold)?;
    if t_star >= p.t_end {
        return Err(Error::NoContact);
    }
    let last = reps.last().unwrap();
    let v = (last.v1, last.v2);
    let (front1, front2, fallback) = continue_fronts(&t, &r1, &r2, t_star, r_star, v, p.t_end)?;
    let g1m: Vec<f64> = reps.iter().map(|r| r.gammas.g1m).collect();
    let g2m: Vec<f64> = reps.iter().map(|r| r.gammas.g2m).collect();
    let g1p: Vec<f64> = reps.iter().map(|r| r.gammas.g1p).collect();
    let g2p: Vec<f64> = reps.iter().map(|r| r.gammas.g2p).collect();
    let gammas = extract_and_continue_gammas(&t, [&g1m, &g2m], [&g1p, &g2p], &front1, &front2)?;
    let traj = FrontTrajectory {
        front1,
        front2,
        gammas,
        t_star,
        r_star,
        t_end: p.t_end,
        contact_velocities: v,
        constant_extension: fallback,
    };
    Ok((traj, run))
}

enum SigmaSource {
    Manufactured(ManufacturedScenario),
    Solved { run: SharpRun, boundary: (f64, f64) },
}

/// A scenario ready for the construction: continued fronts and gradients plus σ̄ data.
pub struct Scenario {
    pub kind: ScenarioKind,
    pub traj: FrontTrajectory,
    pub kinetics: Kinetics,
    pub r_min: f64,
    pub r_max: f64,
    source: SigmaSource,
}

impl std::fmt::Debug for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scenario")
            .field("kind", &self.kind)
            .field("t_star", &self.traj.t_star)
            .field("r_star", &self.traj.r_star)
            .finish()
    }
}

impl Scenario {
    pub fn manufactured(kind: ScenarioKind, params: ManufacturedParams, kinetics: Kinetics) -> Result<Self> {
        params.validate()?;
        let m = ManufacturedScenario::from_params(params, kinetics);
        Ok(Self {
            kind,
            traj: m.traj.clone(),
            kinetics,
            r_min: params.r_min,
            r_max: params.r_max,
            source: SigmaSource::Manufactured(m),
        })
    }

    pub fn solved(params: &SolvedParams, kinetics: Kinetics) -> Result<Self> {
        let (traj, run) = solved_trajectory(params, kinetics)?;
        Ok(Self {
            kind: ScenarioKind::Solved,
            traj,
            kinetics,
            r_min: params.r_min,
            r_max: params.r_max,
            source: SigmaSource::Solved { run, boundary: params.boundary },
        })
    }

    pub fn manufactured_data(&self) -> Option<&ManufacturedScenario> {
        match &self.source {
            SigmaSource::Manufactured(m) => Some(m),
            SigmaSource::Solved { .. } => None,
        }
    }

    pub fn sharp_run(&self) -> Option<&SharpRun> {
        match &self.source {
            SigmaSource::Solved { run, .. } => Some(run),
            SigmaSource::Manufactured(_) => None,
        }
    }

    /// Dirichlet data of σ̄ at (R₁, R₂).
    pub fn boundary_values(&self, t: f64) -> (f64, f64) {
        match &self.source {
            SigmaSource::Manufactured(m) => m.boundary_values(t),
            SigmaSource::Solved { boundary, .. } => *boundary,
        }
    }

    /// σ̄ for t < t*.
    pub fn sigma_bar(&self, r: f64, t: f64) -> Option<f64> {
        if t >= self.traj.t_star {
            return None;
        }
        match &self.source {
            SigmaSource::Manufactured(m) => m.sigma_bar(r, t),
            SigmaSource::Solved { run, .. } => Some(run.sigma_at(r, t)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_crossing_contact() {
        let t: Vec<f64> = (0..=100).map(|k| k as f64 * 0.01).collect();
        let r1: Vec<f64> = t.iter().map(|t| 1.5 + t).collect();
        let r2: Vec<f64> = t.iter().map(|t| 2.5 - t).collect();
        let (ts, rs) = detect_contact(&t, &r1, &r2, 0.03).unwrap();
        assert!((ts - 0.5).abs() < 1e-12);
        assert!((rs - 2.0).abs() < 1e-12);
    }

    #[test]
    fn no_contact_is_reported() {
        let t: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let r1 = vec![1.5; 10];
        let r2 = vec![2.5; 10];
        assert_eq!(detect_contact(&t, &r1, &r2, 0.03), Err(Error::NoContact));
    }

    #[test]
    fn symmetric_gap() {
        let m = ManufacturedScenario::from_params(ManufacturedParams::symmetric(1.0), Kinetics { kappa1: 4.0 / 3.0, kappa2: 4.0 / 3.0 });
        let t = m.params.t_star - 0.1;
        let gap = m.traj.r20(t).0 - m.traj.r10(t).0;
        assert!((gap - 0.2).abs() < 1e-14);
    }
}
