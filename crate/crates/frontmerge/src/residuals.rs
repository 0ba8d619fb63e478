//! Weak residuals of the heat and Allen–Cahn equations for the assembled ansatz, the
//! delta-coefficient conditions, and ε-sweeps with fitted convergence slopes.
//!
//! Integrals are composite four-point Gauss–Legendre over the pieces between grid nodes,
//! fronts and test-function support ends, so every integrand is smooth on each piece.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ansatz::{solve_correction, AnsatzContext, CorrectionParams, CorrectionSolution};
use crate::error::{Error, Result};
use crate::convolutions::{InteractionTable, TableRecord};
use crate::interaction::{FrontPair, InteractionSolution};
use crate::numerics::{fit_loglog_slope, LogLogFit};
use crate::profiles::{double_well, Bump, ProfileParams};
use crate::stefan::Scenario;

/// A smooth compactly supported test function.
pub trait TestFunction: Sync {
    /// Value and first derivative.
    fn sample(&self, r: f64) -> (f64, f64);
    fn support(&self) -> (f64, f64);
    /// Points where the function is not smooth.
    fn breaks(&self) -> Vec<f64> {
        let (a, b) = self.support();
        vec![a, b]
    }
}

impl TestFunction for Bump {
    fn sample(&self, r: f64) -> (f64, f64) {
        let (v, d, _) = self.eval(r);
        (v, d)
    }

    fn support(&self) -> (f64, f64) {
        Bump::support(self)
    }
}

/// c·ζ.
pub struct Scaled<T>(pub f64, pub T);

impl<T: TestFunction> TestFunction for Scaled<T> {
    fn sample(&self, r: f64) -> (f64, f64) {
        let (v, d) = self.1.sample(r);
        (self.0 * v, self.0 * d)
    }

    fn support(&self) -> (f64, f64) {
        self.1.support()
    }

    fn breaks(&self) -> Vec<f64> {
        self.1.breaks()
    }
}

/// ζ₁ + ζ₂.
pub struct Sum<A, B>(pub A, pub B);

impl<A: TestFunction, B: TestFunction> TestFunction for Sum<A, B> {
    fn sample(&self, r: f64) -> (f64, f64) {
        let (a, da) = self.0.sample(r);
        let (b, db) = self.1.sample(r);
        (a + b, da + db)
    }

    fn support(&self) -> (f64, f64) {
        let (a0, a1) = self.0.support();
        let (b0, b1) = self.1.support();
        (a0.min(b0), a1.max(b1))
    }

    fn breaks(&self) -> Vec<f64> {
        let mut v = self.0.breaks();
        v.extend(self.1.breaks());
        v
    }
}

/// Polynomial bumps with jittered centres and a spread of widths.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TestFunctionSet {
    pub members: Vec<Bump>,
}

impl TestFunctionSet {
    pub fn jittered(r_min: f64, r_max: f64, count: usize, seed: u64) -> Result<Self> {
        if count < 8 {
            return Err(Error::Invalid(format!("need at least 8 test functions, got {count}")));
        }
        if !(r_max > r_min) {
            return Err(Error::Invalid("test-function interval is empty".into()));
        }
        let len = r_max - r_min;
        let margin = 0.02 * len;
        let (lo, hi) = (r_min + 0.15 * len, r_max - 0.15 * len);
        let slot = (hi - lo) / count as f64;
        let widths = [0.12, 0.2, 0.3];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let members = (0..count)
            .map(|i| {
                let c = lo + slot * (i as f64 + 0.5) + rng.gen_range(-0.25..0.25) * slot;
                let hw = (widths[i % widths.len()] * len).min(c - r_min - margin).min(r_max - margin - c);
                Bump::new(c, hw)
            })
            .collect();
        Ok(Self { members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Fields and their first derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldSample {
    pub u: f64,
    pub u_r: f64,
    pub u_t: f64,
    pub sigma: f64,
    pub sigma_r: f64,
    pub sigma_t: f64,
}

/// A snapshot (ǔ, σ̌) at one time, evaluable anywhere in the domain.
pub trait FieldSource: Sync + Send {
    fn sample(&self, r: f64) -> FieldSample;
    /// Points in (a, b) where the fields are not smooth.
    fn breaks(&self, a: f64, b: f64) -> Vec<f64>;
    fn eps(&self) -> f64;
    fn t(&self) -> f64;
    /// (r_i, c_i): the heat residual is predicted to carry Σc_i·ζ(r_i) from the front
    /// delta balance.
    fn front_defects(&self) -> Vec<(f64, f64)> {
        Vec::new()
    }
}

/// A_i = (r_i³/2)[(−1)^{i+1}r_it(2 − B_ȯ0) + β_τψ₀′B^z_ȯ0/β²], the delta coefficient of
/// the latent term at each front.
pub fn latent_coefficients(f: &FrontPair, rec: &TableRecord) -> [f64; 2] {
    let drive = f.beta_tau * f.psi0_t * rec.bz_dot0 / (f.beta * f.beta);
    let a = |r: f64, sign: f64, rt: f64| 0.5 * r.powi(3) * (sign * rt * (2.0 - rec.b_dot0) + drive);
    [a(f.r1, 1.0, f.r1t), a(f.r2, -1.0, f.r2t)]
}

/// The assembled ansatz at one time level of a correction solve.
pub struct AnsatzSnapshot {
    sol: Arc<CorrectionSolution>,
    k: usize,
    w_t: Vec<f64>,
    defects: [(f64, f64); 2],
}

impl AnsatzSnapshot {
    pub fn new(sol: Arc<CorrectionSolution>, k: usize, table: &InteractionTable) -> Self {
        let w_t = sol.w_t_stencil(k);
        let f = &sol.fronts[k];
        let c = &sol.coeffs[k];
        let a = latent_coefficients(f, &table.eval(f.eta));
        let g = c.gammas;
        let defects = [
            (f.r1, a[0] - f.r1 * f.r1 * c.b * (g.g1p + g.g1m)),
            (f.r2, a[1] - f.r2 * f.r2 * c.b * (g.g2p + g.g2m)),
        ];
        Self { sol, k, w_t, defects }
    }

    pub fn level(&self) -> usize {
        self.k
    }
}

impl FieldSource for AnsatzSnapshot {
    fn sample(&self, r: f64) -> FieldSample {
        let o = self.sol.order(self.k, r);
        let (sigma, sigma_r) = self.sol.sigma(self.k, r);
        FieldSample { u: o.u, u_r: o.u_r, u_t: o.u_t, sigma, sigma_r, sigma_t: self.sol.sigma_t(self.k, r, &self.w_t) }
    }

    fn breaks(&self, a: f64, b: f64) -> Vec<f64> {
        let g = &self.sol.grid;
        let h = g.h();
        let lo = (((a - g.a) / h).floor().max(0.0)) as usize;
        let hi = ((((b - g.a) / h).ceil()) as usize).min(g.cells);
        let mut out: Vec<f64> = (lo..=hi).map(|j| g.node(j)).collect();
        let f = &self.sol.fronts[self.k];
        out.extend([f.r1, f.r2]);
        out
    }

    fn eps(&self) -> f64 {
        self.sol.eps
    }

    fn t(&self) -> f64 {
        self.sol.times[self.k]
    }

    fn front_defects(&self) -> Vec<(f64, f64)> {
        self.defects.to_vec()
    }
}

/// A field given by a closure, for exact solutions and planted oracles.
pub struct ClosureField<F> {
    pub f: F,
    pub breaks: Vec<f64>,
    pub eps: f64,
    pub t: f64,
}

impl<F: Fn(f64) -> FieldSample + Sync + Send> FieldSource for ClosureField<F> {
    fn sample(&self, r: f64) -> FieldSample {
        (self.f)(r)
    }

    fn breaks(&self, _a: f64, _b: f64) -> Vec<f64> {
        self.breaks.clone()
    }

    fn eps(&self) -> f64 {
        self.eps
    }

    fn t(&self) -> f64 {
        self.t
    }
}

const GAUSS8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

fn pieces(field: &dyn FieldSource, test: &dyn TestFunction) -> Vec<f64> {
    let (a, b) = test.support();
    let mut pts = vec![a, b];
    pts.extend(test.breaks().into_iter().filter(|&x| x > a && x < b));
    pts.extend(field.breaks(a, b).into_iter().filter(|&x| x > a && x < b));
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    pts
}

fn gauss<const N: usize>(pts: &[f64], f: impl Fn(f64) -> [f64; N]) -> [f64; N] {
    let mut acc = [0.0; N];
    for w in pts.windows(2) {
        let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        for &(x, wt) in &GAUSS8 {
            let v = f(c + h * x);
            for (a, v) in acc.iter_mut().zip(v) {
                *a += wt * h * v;
            }
        }
    }
    acc
}

/// Terms of ∫(rǔ_t + σ̌_t)r²ζ + ∫σ̌_r(r²ζ)_r.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct HeatTerms {
    /// ∫rǔ_t r²ζ.
    pub latent: f64,
    /// ∫σ̌_t r²ζ.
    pub storage: f64,
    /// ∫σ̌_r(r²ζ)_r.
    pub flux: f64,
    pub total: f64,
    /// Σ(A_i − r_i²B(γ_i⁺+γ_i⁻))ζ(r_i), the part of the total owed to the front balance.
    pub front_prediction: f64,
}

impl HeatTerms {
    pub fn dominant(&self) -> &'static str {
        let t = [("latent", self.latent), ("storage", self.storage), ("flux", self.flux)];
        t.iter().max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap()).unwrap().0
    }
}

pub fn weak_residual_heat(field: &dyn FieldSource, zeta: &dyn TestFunction) -> HeatTerms {
    let [latent, storage, flux] = gauss(&pieces(field, zeta), |r| {
        let s = field.sample(r);
        let (z, dz) = zeta.sample(r);
        let r2z = r * r * z;
        [r * s.u_t * r2z, s.sigma_t * r2z, s.sigma_r * (2.0 * r * z + r * r * dz)]
    });
    let front_prediction = field.front_defects().iter().map(|&(r, c)| c * zeta.sample(r).0).sum();
    HeatTerms { latent, storage, flux, total: latent + storage + flux, front_prediction }
}

/// The integrals making up the Allen–Cahn weak residual.
///
/// `total` multiplies the equation by r²ǔ_r before integrating by parts:
/// kinetic − curvature + gradient − potential + coupling. `total_printed` is the variant
/// kinetic_flat + curvature − gradient − potential + coupling.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct AcTerms {
    /// ε∫r²ǔ_rǔ_tξ.
    pub kinetic: f64,
    /// ε∫ǔ_rǔ_tξ.
    pub kinetic_flat: f64,
    /// 2ε∫rǔ_r²ξ.
    pub curvature: f64,
    /// (ε/2)∫ǔ_r²(r²ξ)_r.
    pub gradient: f64,
    /// (1/ε)∫F(ǔ)(r²ξ)_r.
    pub potential: f64,
    /// ∫ǔ(rσ̌ξ)_r.
    pub coupling: f64,
    pub total: f64,
    pub total_printed: f64,
}

impl AcTerms {
    pub fn dominant(&self) -> &'static str {
        let t = [
            ("kinetic", self.kinetic),
            ("curvature", -self.curvature),
            ("gradient", self.gradient),
            ("potential", -self.potential),
            ("coupling", self.coupling),
        ];
        t.iter().max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap()).unwrap().0
    }

    /// gradient − potential, the part that cancels only at equipartition of the kink.
    pub fn equipartition_defect(&self) -> f64 {
        self.gradient - self.potential
    }

    /// kinetic − curvature + coupling, the part balanced by the front condition.
    pub fn front_condition_defect(&self) -> f64 {
        self.kinetic - self.curvature + self.coupling
    }
}

pub fn weak_residual_ac(field: &dyn FieldSource, xi: &dyn TestFunction) -> AcTerms {
    let eps = field.eps();
    let [kinetic, kinetic_flat, curvature, gradient, potential, coupling] = gauss(&pieces(field, xi), |r| {
        let s = field.sample(r);
        let (x, dx) = xi.sample(r);
        let r2x_r = 2.0 * r * x + r * r * dx;
        let ur2 = s.u_r * s.u_r;
        [
            eps * r * r * s.u_r * s.u_t * x,
            eps * s.u_r * s.u_t * x,
            2.0 * eps * r * ur2 * x,
            0.5 * eps * ur2 * r2x_r,
            double_well(s.u) * r2x_r / eps,
            s.u * (s.sigma * x + r * s.sigma_r * x + r * s.sigma * dx),
        ]
    });
    AcTerms {
        kinetic,
        kinetic_flat,
        curvature,
        gradient,
        potential,
        coupling,
        total: kinetic - curvature + gradient - potential + coupling,
        total_printed: kinetic_flat + curvature - gradient - potential + coupling,
    }
}

/// Delta coefficients at one τ.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DeltaRow {
    pub tau: f64,
    pub t: f64,
    pub eta: f64,
    pub j1: f64,
    pub j2: f64,
    /// r_i²B(γ_i⁺+γ_i⁻) − A_i: the flux jump weighted like the latent term.
    pub j1_weighted: f64,
    pub j2_weighted: f64,
    /// (r₁ₜ+r₂ₜ)(B_Ω+C_Ω) − 2β_τψ₀′B^z_Ω/β².
    pub vsum_kinematic: f64,
    /// The kinematic part plus (q/r|r₁ − q/r|r₂)C_Ω + (1/r₁+1/r₂)(κ₂C_Ω − Ĉ).
    pub vsum_full: f64,
    pub a1: f64,
    pub a2: f64,
    /// a₁ζ(r₁) + a₂ζ(r₂).
    pub pairing: f64,
    /// (a₁ + a₂)ζ(r₁).
    pub merged: f64,
}

/// J₁, J₂, the V-sum and the paired delta coefficients along `taus`; τ values whose time
/// falls outside [0, t₁] are skipped. q is read from `correction` when given, else taken as 0.
pub fn delta_coefficient_check(
    ctx: &AnsatzContext,
    taus: &[f64],
    correction: Option<&CorrectionSolution>,
    zeta: &Bump,
) -> Result<Vec<DeltaRow>> {
    let traj = &ctx.scenario.traj;
    let kappa2 = ctx.scenario.kinetics.kappa2;
    let mut rows = Vec::with_capacity(taus.len());
    for &tau in taus {
        let Some(t) = ctx.sol.time_of_tau(tau, ctx.eps, traj) else { continue };
        let f = ctx.fronts(t)?;
        let c = ctx.coeffs_of(&f);
        let rec = ctx.sol.table().eval(f.eta);
        let g = c.gammas;
        let b2 = f.beta * f.beta;
        let drive = f.beta_tau * f.psi0_t;
        let big_a = latent_coefficients(&f, &rec);
        let (jump1, jump2) = (c.b * (g.g1p + g.g1m), c.b * (g.g2p + g.g2m));
        let bc = rec.b_omega + rec.c_omega;
        let vsum_kinematic = (f.r1t + f.r2t) * bc - 2.0 * drive * rec.bz_omega / b2;
        let q_over_r = |r: f64| match correction {
            Some(sol) => {
                let k = sol.index_of(t);
                let e = ctx.profile.cutoff(r).0;
                (sol.sigma(k, r).0 - e * sol.coeffs[k].value(r)) / r
            }
            None => 0.0,
        };
        let vsum_full = vsum_kinematic
            + (q_over_r(f.r1) - q_over_r(f.r2)) * rec.c_omega
            + (1.0 / f.r1 + 1.0 / f.r2) * (kappa2 * rec.c_omega - rec.c_hat);
        let a = |r: f64, rt: f64| r * r * (rt * bc - drive * rec.bz_omega / b2);
        let (a1, a2) = (a(f.r1, f.r1t), a(f.r2, f.r2t));
        rows.push(DeltaRow {
            tau,
            t,
            eta: f.eta,
            j1: jump1 - big_a[0],
            j2: jump2 - big_a[1],
            j1_weighted: f.r1 * f.r1 * jump1 - big_a[0],
            j2_weighted: f.r2 * f.r2 * jump2 - big_a[1],
            vsum_kinematic,
            vsum_full,
            a1,
            a2,
            pairing: a1 * zeta.value(f.r1) + a2 * zeta.value(f.r2),
            merged: (a1 + a2) * zeta.value(f.r1),
        });
    }
    Ok(rows)
}

/// Residuals for one (t, test function) cell.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ResidualCell {
    pub t: f64,
    pub test: usize,
    pub heat: HeatTerms,
    pub ac: AcTerms,
}

/// Everything computed at one ε.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EpsilonBlock {
    pub eps: f64,
    /// Set when the pipeline failed at this ε; the cells are then empty.
    pub failure: Option<String>,
    pub cells: Vec<ResidualCell>,
    pub max_heat: f64,
    pub max_ac: f64,
    pub max_ac_printed: f64,
    /// max |heat total − front prediction|.
    pub max_heat_remainder: f64,
    /// max |(1/ε)∫F(ǔ)(r²ξ)_r| over the cells.
    pub singular_bound: f64,
    pub worst_heat: Option<ResidualCell>,
    pub worst_ac: Option<ResidualCell>,
}

impl EpsilonBlock {
    fn failed(eps: f64, e: &Error) -> Self {
        Self {
            eps,
            failure: Some(e.to_string()),
            cells: Vec::new(),
            max_heat: f64::NAN,
            max_ac: f64::NAN,
            max_ac_printed: f64::NAN,
            max_heat_remainder: f64::NAN,
            singular_bound: f64::NAN,
            worst_heat: None,
            worst_ac: None,
        }
    }

    fn from_cells(eps: f64, cells: Vec<ResidualCell>) -> Self {
        let worst = |key: &dyn Fn(&ResidualCell) -> f64| {
            cells.iter().copied().max_by(|a, b| key(a).partial_cmp(&key(b)).unwrap())
        };
        let worst_heat = worst(&|c| c.heat.total.abs());
        let worst_ac = worst(&|c| c.ac.total.abs());
        let fold = |key: &dyn Fn(&ResidualCell) -> f64| cells.iter().map(key).fold(0.0, f64::max);
        Self {
            eps,
            failure: None,
            max_heat: fold(&|c| c.heat.total.abs()),
            max_ac: fold(&|c| c.ac.total.abs()),
            max_ac_printed: fold(&|c| c.ac.total_printed.abs()),
            max_heat_remainder: fold(&|c| (c.heat.total - c.heat.front_prediction).abs()),
            singular_bound: fold(&|c| c.ac.potential.abs()),
            worst_heat,
            worst_ac,
            cells,
        }
    }
}

/// An ε-sweep of both residuals with fitted slopes.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ResidualReport {
    pub label: String,
    pub eps: Vec<f64>,
    pub times: Vec<f64>,
    pub tests: Vec<Bump>,
    pub blocks: Vec<EpsilonBlock>,
    pub heat_fit: Option<LogLogFit>,
    pub ac_fit: Option<LogLogFit>,
    pub ac_printed_fit: Option<LogLogFit>,
    pub heat_remainder_fit: Option<LogLogFit>,
    pub mu_target: f64,
}

impl ResidualReport {
    /// Cells present for every (ε, t, test) or the ε block marked failed.
    pub fn is_complete(&self) -> bool {
        self.blocks.len() == self.eps.len()
            && self.blocks.iter().all(|b| b.failure.is_some() || b.cells.len() == self.times.len() * self.tests.len())
    }

    pub fn failed_cells(&self) -> usize {
        self.blocks.iter().filter(|b| b.failure.is_some()).count()
    }

    fn strictly_decreasing(&self, key: impl Fn(&EpsilonBlock) -> f64) -> bool {
        let v: Vec<f64> = self.blocks.iter().map(key).collect();
        v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[1] < w[0])
    }

    /// Maxima fall strictly as ε decreases (ε listed in decreasing order).
    pub fn heat_monotone(&self) -> bool {
        self.strictly_decreasing(|b| b.max_heat)
    }

    pub fn ac_monotone(&self) -> bool {
        self.strictly_decreasing(|b| b.max_ac)
    }
}

/// Slope targets for the heat and Allen–Cahn residual maxima.
pub const HEAT_SLOPE_TARGET: f64 = 0.8;
pub const AC_SLOPE_TARGET: f64 = 0.35;

/// Which term drives the residual at the finest ε, and which constant it traces back to.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Attribution {
    pub eps: f64,
    pub heat_dominant: &'static str,
    /// front prediction / total at the worst heat cell.
    pub heat_front_share: f64,
    pub ac_dominant: &'static str,
    /// (gradient − potential) / total at the worst AC cell.
    pub ac_equipartition_share: f64,
    /// (kinetic − curvature + coupling) / total at the worst AC cell.
    pub ac_front_condition_share: f64,
    /// `stefan_normalization` and/or `beta_limit`.
    pub flags: Vec<&'static str>,
}

impl ResidualReport {
    pub fn heat_target_met(&self) -> bool {
        self.heat_fit.is_some_and(|f| f.slope >= HEAT_SLOPE_TARGET)
    }

    pub fn ac_target_met(&self) -> bool {
        self.ac_fit.is_some_and(|f| f.slope >= AC_SLOPE_TARGET)
    }

    /// Per-term breakdown at the finest completed ε.
    pub fn attribution(&self) -> Option<Attribution> {
        let b = self.blocks.iter().rev().find(|b| b.failure.is_none())?;
        let (h, a) = (b.worst_heat?, b.worst_ac?);
        let share = |x: f64, total: f64| if total == 0.0 { 0.0 } else { x / total };
        let heat_front_share = share(h.heat.front_prediction, h.heat.total);
        let ac_equipartition_share = share(a.ac.equipartition_defect(), a.ac.total);
        let mut flags = Vec::new();
        if !self.heat_target_met() && heat_front_share.abs() > 0.5 {
            flags.push("stefan_normalization");
        }
        if !(self.ac_target_met() && self.ac_monotone()) && ac_equipartition_share.abs() > 0.1 {
            flags.push("beta_limit");
        }
        Some(Attribution {
            eps: b.eps,
            heat_dominant: h.heat.dominant(),
            heat_front_share,
            ac_dominant: a.ac.dominant(),
            ac_equipartition_share,
            ac_front_condition_share: share(a.ac.front_condition_defect(), a.ac.total),
            flags,
        })
    }
}

fn fit(blocks: &[EpsilonBlock], key: impl Fn(&EpsilonBlock) -> f64) -> Option<LogLogFit> {
    let pts: Vec<(f64, f64)> =
        blocks.iter().filter(|b| b.failure.is_none()).map(|b| (b.eps, key(b))).filter(|p| p.1 > 0.0).collect();
    fit_loglog_slope(&pts).ok()
}

fn check_eps_list(eps: &[f64]) -> Result<()> {
    if eps.len() < 3 {
        return Err(Error::Invalid(format!("need at least 3 epsilon values, got {}", eps.len())));
    }
    if eps.iter().any(|&e| !(e > 0.0)) || eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Invalid("epsilon list must be positive and strictly decreasing".into()));
    }
    let ratios: Vec<f64> = eps.windows(2).map(|w| w[1] / w[0]).collect();
    let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0_f64), |(l, h), &r| (l.min(r), h.max(r)));
    if hi / lo > 1.15 {
        return Err(Error::Invalid("epsilon list must be close to geometric".into()));
    }
    Ok(())
}

/// Evaluates both residuals on every field produced by `build` for each ε.
///
/// A failing `build` marks that ε block failed and leaves the others intact.
pub fn sweep_fields<F>(label: &str, eps: &[f64], times: &[f64], tests: &TestFunctionSet, build: F) -> Result<ResidualReport>
where
    F: Fn(f64) -> Result<Vec<Box<dyn FieldSource>>> + Sync,
{
    check_eps_list(eps)?;
    let blocks: Vec<EpsilonBlock> = eps
        .par_iter()
        .map(|&e| match build(e) {
            Err(err) => EpsilonBlock::failed(e, &err),
            Ok(fields) => {
                let cells: Vec<ResidualCell> = fields
                    .par_iter()
                    .flat_map_iter(|f| {
                        tests.members.iter().enumerate().map(move |(i, z)| ResidualCell {
                            t: f.t(),
                            test: i,
                            heat: weak_residual_heat(f.as_ref(), z),
                            ac: weak_residual_ac(f.as_ref(), z),
                        })
                    })
                    .collect();
                EpsilonBlock::from_cells(e, cells)
            }
        })
        .collect();
    Ok(ResidualReport {
        label: label.to_string(),
        eps: eps.to_vec(),
        times: times.to_vec(),
        tests: tests.members.clone(),
        heat_fit: fit(&blocks, |b| b.max_heat),
        ac_fit: fit(&blocks, |b| b.max_ac),
        ac_printed_fit: fit(&blocks, |b| b.max_ac_printed),
        heat_remainder_fit: fit(&blocks, |b| b.max_heat_remainder),
        blocks,
        mu_target: 0.4,
    })
}

/// Runs the correction solve per ε and evaluates the residuals at the levels nearest `times`.
#[allow(clippy::too_many_arguments)]
pub fn sweep_and_fit(
    label: &str,
    scenario: &Scenario,
    sol: &InteractionSolution,
    profile: ProfileParams,
    params: &CorrectionParams,
    eps: &[f64],
    times: &[f64],
    tests: &TestFunctionSet,
) -> Result<ResidualReport> {
    sweep_fields(label, eps, times, tests, |e| {
        let ctx = AnsatzContext::new(scenario, sol, e, profile)?;
        let corr = Arc::new(solve_correction(&ctx, params)?);
        Ok(times
            .iter()
            .map(|&t| Box::new(AnsatzSnapshot::new(corr.clone(), corr.index_of(t), sol.table())) as Box<dyn FieldSource>)
            .collect())
    })
}

fn uniform_breaks(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|j| a + (b - a) * j as f64 / n as f64).collect()
}

/// Synthetic fields whose heat residual is exactly 2ε∫r²ζ: ǔ ≡ 1 and
/// σ̌ = e^{−t}sin r + 2εt.
pub fn planted_heat_field(eps: f64, t: f64, r_min: f64, r_max: f64) -> Box<dyn FieldSource> {
    let decay = (-t).exp();
    Box::new(ClosureField {
        f: move |r: f64| FieldSample {
            u: 1.0,
            sigma: decay * r.sin() + 2.0 * eps * t,
            sigma_r: decay * r.cos(),
            sigma_t: -decay * r.sin() + 2.0 * eps,
            ..FieldSample::default()
        },
        breaks: uniform_breaks(r_min, r_max, 200),
        eps,
        t,
    })
}

/// Synthetic fields whose Allen–Cahn residual is exactly −2ε∫rξ: ǔ = r, ǔ_t = 0 and
/// σ̌ = rF′(r)/ε, so the potential and coupling terms cancel.
pub fn planted_ac_field(eps: f64, t: f64, r_min: f64, r_max: f64) -> Box<dyn FieldSource> {
    Box::new(ClosureField {
        f: move |r: f64| FieldSample {
            u: r,
            u_r: 1.0,
            sigma: (r.powi(4) - r * r) / eps,
            sigma_r: (4.0 * r.powi(3) - 2.0 * r) / eps,
            ..FieldSample::default()
        },
        breaks: uniform_breaks(r_min, r_max, 200),
        eps,
        t,
    })
}

/// Slopes of the planted heat and Allen–Cahn oracles over `eps`.
pub fn planted_slopes(eps: &[f64], tests: &TestFunctionSet, r_min: f64, r_max: f64) -> Result<(f64, f64)> {
    let times = [0.1, 0.5];
    let heat = sweep_fields("planted-heat", eps, &times, tests, |e| {
        Ok(times.iter().map(|&t| planted_heat_field(e, t, r_min, r_max)).collect())
    })?;
    let ac = sweep_fields("planted-ac", eps, &times, tests, |e| {
        Ok(times.iter().map(|&t| planted_ac_field(e, t, r_min, r_max)).collect())
    })?;
    let slope = |f: Option<LogLogFit>| f.map(|f| f.slope).ok_or_else(|| Error::Invalid("planted fit failed".into()));
    Ok((slope(heat.heat_fit)?, slope(ac.ac_fit)?))
}
