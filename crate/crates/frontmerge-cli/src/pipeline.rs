//! Stages, their declared inputs and outputs, and the `all` schedule.

use std::time::Instant;

use clap::ValueEnum;
use frontmerge::ansatz::{
    holder_quotients, solve_correction, temperature_jump, AnsatzContext, CorrectionParams, KernelNormalization, KernelPiece,
};
use frontmerge::convolutions::{btilde, btilde_coth, btilde_tanh, c_plus, interaction_integrals, kinetic_coefficients, kink_convolutions, InteractionTable};
use frontmerge::interaction::{InteractionParams, InteractionSolution};
use frontmerge::numerics::QuadratureSpec;
use frontmerge::phasefield::{compare_fields, run_phasefield, Coupling, PDEState};
use frontmerge::profiles::ProfileParams;
use frontmerge::residuals::{planted_slopes, sweep_and_fit, ResidualReport, TestFunctionSet, AC_SLOPE_TARGET, HEAT_SLOPE_TARGET};
use frontmerge::stefan::{Kinetics, ManufacturedParams, Scenario, ScenarioKind, SharpParams, SolvedParams};
use serde_json::{json, Map, Value};

use crate::artifacts::{fmt, record_timing, Manifest, OutDir, StageEntry, StageStatus, TABLE_CSV};
use crate::config::Config;
use crate::error::CliError;
use crate::report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Stage {
    Tables,
    Interaction,
    Stefan,
    Ansatz,
    Pde,
    Residuals,
    Report,
    All,
}

pub const ORDER: [Stage; 7] = [Stage::Tables, Stage::Interaction, Stage::Stefan, Stage::Ansatz, Stage::Pde, Stage::Residuals, Stage::Report];

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Tables => "tables",
            Stage::Interaction => "interaction",
            Stage::Stefan => "stefan",
            Stage::Ansatz => "ansatz",
            Stage::Pde => "pde",
            Stage::Residuals => "residuals",
            Stage::Report => "report",
            Stage::All => "all",
        }
    }

    pub fn summary_path(self) -> String {
        format!("stages/{}.json", self.name())
    }

    /// Artifacts read from the output directory.
    pub fn inputs(self) -> Vec<String> {
        match self {
            Stage::Tables | Stage::Stefan | Stage::All => vec![],
            Stage::Interaction | Stage::Ansatz | Stage::Pde | Stage::Residuals => vec![TABLE_CSV.into()],
            Stage::Report => {
                let mut v: Vec<String> = ORDER[..6].iter().map(|s| s.summary_path()).collect();
                v.push(report::RESIDUALS_JSON.into());
                v
            }
        }
    }
}

/// Exit status of a run: 0, 3 (numerical failure) or 4 (partial sweep).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOutcome {
    pub code: i32,
}

struct StageResult {
    outputs: Vec<String>,
    partial: bool,
}

pub struct Pipeline<'a> {
    pub cfg: &'a Config,
    pub out: OutDir,
    spec: QuadratureSpec,
}

fn num(stage: Stage) -> impl Fn(frontmerge::Error) -> CliError {
    move |source| CliError::Numerical { stage: stage.name(), source }
}

pub fn quadrature_spec(cfg: &Config) -> Result<QuadratureSpec, CliError> {
    let s = QuadratureSpec::default().with_abs_tol(cfg.quadrature.abs_tol).with_rel_tol(cfg.quadrature.rel_tol);
    s.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(s)
}

pub fn profile_params(cfg: &Config) -> ProfileParams {
    let len = cfg.r_max - cfg.r_min;
    let (a, b) = (cfg.profile.inner_margin * len, cfg.profile.outer_margin * len);
    ProfileParams {
        switch_steepness: cfg.profile.switch_steepness,
        cutoff_inner: (cfg.r_min + a, cfg.r_max - a),
        cutoff_outer: (cfg.r_min + b, cfg.r_max - b),
    }
}

fn interaction_params(cfg: &Config) -> InteractionParams {
    let i = &cfg.interaction;
    InteractionParams { tau_min: i.tau_min, tau_max: i.tau_max, d_tau: i.d_tau, ..InteractionParams::default() }
}

fn correction_params(cfg: &Config) -> CorrectionParams {
    CorrectionParams { grid_factor: cfg.ansatz.grid_factor, dtau: cfg.ansatz.dtau }
}

fn manufactured_params(cfg: &Config) -> ManufacturedParams {
    let m = &cfg.manufactured;
    let base = match cfg.kind {
        ScenarioKind::ManufacturedAsymmetric => ManufacturedParams::asymmetric(),
        _ => ManufacturedParams::symmetric(m.speed),
    };
    ManufacturedParams { r_star: m.r_star, t_star: m.t_star, t_end: cfg.t_end, r_min: cfg.r_min, r_max: cfg.r_max, ..base }
}

fn solved_params(cfg: &Config) -> SolvedParams {
    let s = &cfg.solved;
    SolvedParams {
        r_min: cfg.r_min,
        r_max: cfg.r_max,
        r1_init: s.r1_init,
        r2_init: s.r2_init,
        boundary: (s.boundary[0], s.boundary[1]),
        t_end: cfg.t_end,
        sharp: SharpParams { cells: s.cells, dt: s.dt, ..SharpParams::default() },
    }
}

fn kind_name(k: ScenarioKind) -> &'static str {
    match k {
        ScenarioKind::ManufacturedSymmetric => "manufactured-symmetric",
        ScenarioKind::ManufacturedAsymmetric => "manufactured-asymmetric",
        ScenarioKind::Solved => "solved",
    }
}

fn csv_row(v: impl IntoIterator<Item = f64>) -> Vec<String> {
    v.into_iter().map(fmt).collect()
}

fn error_value(e: impl std::fmt::Display) -> Value {
    json!({ "error": e.to_string() })
}

impl<'a> Pipeline<'a> {
    pub fn new(cfg: &'a Config, out: OutDir) -> Result<Self, CliError> {
        let spec = quadrature_spec(cfg)?;
        profile_params(cfg).validate(cfg.r_min, cfg.r_max).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.kind != ScenarioKind::Solved {
            manufactured_params(cfg).validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(Self { cfg, out, spec })
    }

    fn kinetics(&self, stage: Stage) -> Result<Kinetics, CliError> {
        let (kappa1, kappa2) = kinetic_coefficients(&self.spec).map_err(num(stage))?;
        Ok(Kinetics { kappa1, kappa2 })
    }

    fn scenario(&self, stage: Stage) -> Result<Scenario, CliError> {
        let kin = self.kinetics(stage)?;
        match self.cfg.kind {
            ScenarioKind::Solved => Scenario::solved(&solved_params(self.cfg), kin),
            k => Scenario::manufactured(k, manufactured_params(self.cfg), kin),
        }
        .map_err(num(stage))
    }

    fn solution(&self, stage: Stage) -> Result<InteractionSolution, CliError> {
        let table = self.out.read_table()?;
        InteractionSolution::solve(&table, interaction_params(self.cfg), &self.spec).map_err(num(stage))
    }

    fn summary(&self, stage: Stage, value: &Value) -> Result<String, CliError> {
        let p = stage.summary_path();
        self.out.write_json(&p, value)?;
        Ok(p)
    }

    fn tables(&self) -> Result<StageResult, CliError> {
        let st = Stage::Tables;
        let t = &self.cfg.table;
        let s = &self.spec;
        let table = InteractionTable::build(t.eta_min, t.eta_max, t.points, s).map_err(num(st))?;
        let rows = table.records().iter().map(|r| csv_row(r.as_array()));
        self.out.write_csv(TABLE_CSV, &frontmerge::convolutions::TableRecord::COLUMNS, rows)?;

        let cp = c_plus(s).map_err(num(st))?;
        let (k1, k2) = kinetic_coefficients(s).map_err(num(st))?;
        let at0 = interaction_integrals(0.0, s).map_err(num(st))?;
        let kink0 = kink_convolutions(0.0, s).map_err(num(st))?;
        let mut coth_err: f64 = 0.0;
        for k in 0..=31 {
            let eta = 0.25 + 0.25 * k as f64;
            let q = btilde(eta, s).map_err(num(st))?;
            coth_err = coth_err.max((q - btilde_coth(eta)).abs() / q);
        }
        let probe = 0.5;
        let bq = btilde(probe, s).map_err(num(st))?;
        let recs = table.records();
        let (lo, hi) = (recs[0], recs[recs.len() - 1]);
        let interp = table.interpolation_error(&[0.37, -2.63, 5.11], s).map_err(num(st))?;
        let summary = json!({
            "points": recs.len(),
            "eta_range": [lo.eta, hi.eta],
            "interpolation_error": interp,
            "c_plus": cp,
            "kinetic_coefficients": [k1, k2],
            "contact_values": {
                "Bz_Omega": at0.bz_omega,
                "B_Omega": at0.b_omega,
                "C_Omega": at0.c_omega,
                "B_dot0": kink0.b_dot0,
                "Bz_dot0": kink0.bz_dot0,
            },
            "discrepancies": {
                "btilde_closed_form": {
                    "computed": "2 eta coth eta",
                    "reference": "2 eta tanh eta",
                    "max_rel_error_vs_computed": coth_err,
                    "probe_eta": probe,
                    "probe_quadrature": bq,
                    "probe_reference": btilde_tanh(probe),
                    "flagged": (bq - btilde_tanh(probe)).abs() > 1e-6 * bq,
                },
                "beta_limit": {
                    "computed": hi.beta,
                    "reference": 1.0,
                    "equipartition": std::f64::consts::FRAC_1_SQRT_2,
                    "at_eta": hi.eta,
                    "negative_side_beta": lo.beta,
                    "negative_side_eta": lo.eta,
                    "flagged": (hi.beta - 1.0).abs() > 1e-3,
                },
                "C_Omega_limit": {
                    "computed": hi.c_omega,
                    "reference": 4.0,
                    "at_eta": hi.eta,
                    "flagged": (hi.c_omega - 4.0).abs() > 1e-3,
                },
                "B_Omega_limit": {
                    "computed": hi.b_omega,
                    "reference": 1.0,
                    "at_eta": hi.eta,
                    "flagged": (hi.b_omega - 1.0).abs() > 1e-3,
                },
                "Bz_Omega_contact": {
                    "computed": at0.bz_omega,
                    "reference": 0.0,
                    "flagged": at0.bz_omega.abs() > 1e-10,
                },
            },
        });
        let p = self.summary(st, &summary)?;
        Ok(StageResult { outputs: vec![TABLE_CSV.into(), p], partial: false })
    }

    fn interaction(&self) -> Result<StageResult, CliError> {
        let st = Stage::Interaction;
        let sol = self.solution(st)?;
        let rows = sol.rows().into_iter().map(|r| csv_row([r.tau, r.eta, r.beta, r.rho, r.s, r.d]));
        self.out.write_csv("interaction.csv", &["tau", "eta", "beta", "rho", "s", "d"], rows)?;
        let sc = self.scenario(st)?;
        let contact: Vec<Value> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&eps| match sol.velocity_sum_at_contact(&sc.traj, eps) {
                Ok(c) => json!({ "eps": eps, "result": c }),
                Err(e) => json!({ "eps": eps, "result": error_value(e) }),
            })
            .collect();
        let n = sol.tau.len() - 1;
        let summary = json!({
            "tau_range": [sol.tau[0], sol.tau[n]],
            "nodes": n + 1,
            "eta_residual": sol.eta_residual,
            "d_minus_infinity": sol.d_minus_infinity(),
            "L": sol.limit_l,
            "eta_over_tau": { "computed": sol.eta[n] / sol.tau[n], "reference": 1.0, "beta_at_tau_max": sol.beta[n] },
            "velocity_sum_at_contact": contact,
        });
        let p = self.summary(st, &summary)?;
        Ok(StageResult { outputs: vec!["interaction.csv".into(), p], partial: false })
    }

    fn stefan(&self) -> Result<StageResult, CliError> {
        let st = Stage::Stefan;
        let sc = self.scenario(st)?;
        let opt = |v: Option<f64>| v.map(fmt).unwrap_or_default();
        let rows = sc.traj.rows(self.cfg.solved.trajectory_rows).into_iter().map(|r| {
            let mut v = vec![fmt(r.t), opt(r.r1hat), opt(r.r2hat)];
            v.extend(csv_row([r.r10, r.r20, r.v1, r.v2, r.gamma1m, r.gamma1p, r.gamma2m, r.gamma2p]));
            v
        });
        let header = ["t", "r1hat", "r2hat", "r10", "r20", "v1", "v2", "gamma1m", "gamma1p", "gamma2m", "gamma2p"];
        self.out.write_csv("trajectory.csv", &header, rows)?;
        let sharp = sc.sharp_run().map(|run| {
            let flux = run.reports.iter().skip(1).map(|r| r.flux_residual).fold(0.0, f64::max);
            json!({ "steps": run.reports.len() - 1, "max_flux_residual": flux, "reached_threshold": run.reached_threshold })
        });
        let summary = json!({
            "kind": kind_name(sc.kind),
            "t_star": sc.traj.t_star,
            "r_star": sc.traj.r_star,
            "contact_velocities": [sc.traj.contact_velocities.0, sc.traj.contact_velocities.1],
            "constant_extension": sc.traj.constant_extension,
            "sharp_run": sharp,
        });
        let p = self.summary(st, &summary)?;
        Ok(StageResult { outputs: vec!["trajectory.csv".into(), p], partial: false })
    }

    fn ansatz(&self) -> Result<StageResult, CliError> {
        let st = Stage::Ansatz;
        let sol = self.solution(st)?;
        let sc = self.scenario(st)?;
        let profile = profile_params(self.cfg);
        let eps = self.cfg.ansatz.eps;
        let ctx = AnsatzContext::new(&sc, &sol, eps, profile).map_err(num(st))?;
        let corr = solve_correction(&ctx, &correction_params(self.cfg)).map_err(num(st))?;
        let mut outputs = Vec::new();
        let mut snaps = Vec::new();
        for &t in &self.cfg.ansatz.times {
            let k = corr.index_of(t);
            let f = corr.field(k, &sc);
            let rel = format!("ansatz/t_{t:.4}.csv");
            let rows = f.rows().into_iter().map(|r| csv_row([r.r, r.u, r.t_model, r.q, r.sigma, r.theta]));
            self.out.write_csv(&rel, &["r", "u", "T", "q", "sigma", "theta"], rows)?;
            snaps.push(json!({ "requested": t, "t": f.t, "file": rel, "assembly_defect": f.assembly_defect(&profile) }));
            outputs.push(rel);
        }
        let jump = match temperature_jump(&sc, &sol, profile, 1e-6) {
            Ok(j) => json!({
                "closed_form": j.formula,
                "measured": j.measured,
                "relative_error": (j.measured - j.formula).abs() / j.formula.abs(),
                "plateau_pre": j.plateau_pre,
                "plateau_post": j.plateau_post,
                "negative": j.measured < 0.0,
            }),
            Err(e) => error_value(e),
        };
        let t_h = sc.traj.t_star - 0.02;
        let holder = if t_h > 0.0 {
            let r0 = sc.traj.r10(t_h).0;
            let gaps: Vec<f64> = (0..6).map(|k| 0.1 / 2f64.powi(k)).collect();
            match holder_quotients(&ctx, KernelPiece::Q1, r0, t_h, &gaps, 0.45, KernelNormalization::HeatKernel, &self.spec) {
                Ok(q) => {
                    let n = q.len();
                    let ratio = q[n - 1].max(q[n - 2]) / q[n - 1].min(q[n - 2]);
                    json!({ "t": t_h, "r0": r0, "mu": 0.45, "gaps": gaps, "quotients": q, "finest_ratio": ratio })
                }
                Err(e) => error_value(e),
            }
        } else {
            error_value("contact too early for the Hoelder probe")
        };
        let summary = json!({
            "eps": eps,
            "levels": corr.len(),
            "scheme_residual": corr.scheme_residual,
            "snapshots": snaps,
            "temperature_jump": jump,
            "holder": holder,
        });
        outputs.push(self.summary(st, &summary)?);
        Ok(StageResult { outputs, partial: false })
    }

    fn pde(&self) -> Result<StageResult, CliError> {
        let st = Stage::Pde;
        let sol = self.solution(st)?;
        let sc = self.scenario(st)?;
        let eps = self.cfg.pde.eps;
        let ctx = AnsatzContext::new(&sc, &sol, eps, profile_params(self.cfg)).map_err(num(st))?;
        let corr = solve_correction(&ctx, &correction_params(self.cfg)).map_err(num(st))?;
        let mut levels = vec![0];
        for &t in &self.cfg.ansatz.times {
            let k = corr.index_of(t);
            if k > *levels.last().unwrap() {
                levels.push(k);
            }
        }
        let fields: Vec<_> = levels.iter().map(|&k| corr.field(k, &sc)).collect();
        let times: Vec<f64> = fields.iter().map(|f| f.t).collect();
        let init = PDEState::from_ansatz(&fields[0]).map_err(num(st))?;
        let dt = self.cfg.pde.dt_factor * eps * eps;
        let bc = |t: f64| sc.boundary_values(t);
        let (pde, _) = run_phasefield(init, &times, dt, &bc, Coupling::Full, None).map_err(num(st))?;
        let mut outputs = Vec::new();
        for s in &pde {
            let rel = format!("pde/t_{:.4}.csv", s.t);
            let nodes = s.grid.nodes();
            let rows = (0..nodes.len()).map(|j| csv_row([nodes[j], s.u[j], s.sigma[j]]));
            self.out.write_csv(&rel, &["r", "u", "sigma"], rows)?;
            outputs.push(rel);
        }
        let norms = compare_fields(&pde, &fields, (0.0, self.cfg.pde.window_end)).map_err(num(st))?;
        let energy: Vec<f64> = pde.iter().map(|s| s.energy()).collect();
        let summary = json!({ "eps": eps, "dt": dt, "times": times, "energy": energy, "norms": norms });
        outputs.push(self.summary(st, &summary)?);
        Ok(StageResult { outputs, partial: false })
    }

    fn residuals(&self) -> Result<StageResult, CliError> {
        let st = Stage::Residuals;
        let sol = self.solution(st)?;
        let sc = self.scenario(st)?;
        let cfg = self.cfg;
        let tests = TestFunctionSet::jittered(cfg.r_min, cfg.r_max, cfg.residuals.tests, cfg.seed).map_err(num(st))?;
        let label = kind_name(cfg.kind);
        let rep = sweep_and_fit(label, &sc, &sol, profile_params(cfg), &correction_params(cfg), &cfg.eps, &cfg.residuals.times, &tests)
            .map_err(num(st))?;
        let planted = planted_slopes(&cfg.eps, &tests, cfg.r_min, cfg.r_max).map_err(num(st))?;
        self.out.write_json(report::RESIDUALS_JSON, &nested(&rep))?;
        let fits = [
            ("heat", rep.heat_fit, HEAT_SLOPE_TARGET),
            ("ac", rep.ac_fit, AC_SLOPE_TARGET),
            ("ac_printed", rep.ac_printed_fit, AC_SLOPE_TARGET),
            ("heat_remainder", rep.heat_remainder_fit, HEAT_SLOPE_TARGET),
        ];
        let rows = fits.iter().map(|(name, f, target)| {
            let mut v = vec![name.to_string()];
            match f {
                Some(f) => v.extend(csv_row([f.slope, f.intercept, f.residual, *target])),
                None => v.extend(["".into(), "".into(), "".into(), fmt(*target)]),
            }
            v
        });
        self.out.write_csv("residual_slopes.csv", &["quantity", "slope", "intercept", "fit_residual", "target"], rows)?;
        let blocks: Vec<Value> = rep
            .blocks
            .iter()
            .map(|b| {
                json!({
                    "eps": b.eps,
                    "failure": b.failure,
                    "max_heat": b.max_heat,
                    "max_ac": b.max_ac,
                    "max_ac_printed": b.max_ac_printed,
                    "max_heat_remainder": b.max_heat_remainder,
                    "singular_bound": b.singular_bound,
                })
            })
            .collect();
        let summary = json!({
            "label": label,
            "eps": rep.eps,
            "times": rep.times,
            "tests": rep.tests,
            "blocks": blocks,
            "fits": { "heat": rep.heat_fit, "ac": rep.ac_fit, "ac_printed": rep.ac_printed_fit, "heat_remainder": rep.heat_remainder_fit },
            "targets": { "heat": HEAT_SLOPE_TARGET, "ac": AC_SLOPE_TARGET, "mu": rep.mu_target },
            "heat_monotone": rep.heat_monotone(),
            "ac_monotone": rep.ac_monotone(),
            "heat_target_met": rep.heat_target_met(),
            "ac_target_met": rep.ac_target_met(),
            "attribution": rep.attribution(),
            "planted_slopes": { "heat": planted.0, "ac": planted.1 },
            "failed_cells": rep.failed_cells(),
        });
        let p = self.summary(st, &summary)?;
        Ok(StageResult {
            outputs: vec![report::RESIDUALS_JSON.into(), "residual_slopes.csv".into(), p],
            partial: rep.failed_cells() > 0,
        })
    }

    fn report(&self) -> Result<StageResult, CliError> {
        let outputs = report::assemble(self.cfg, &self.out)?;
        Ok(StageResult { outputs, partial: false })
    }

    fn dispatch(&self, stage: Stage) -> Result<StageResult, CliError> {
        match stage {
            Stage::Tables => self.tables(),
            Stage::Interaction => self.interaction(),
            Stage::Stefan => self.stefan(),
            Stage::Ansatz => self.ansatz(),
            Stage::Pde => self.pde(),
            Stage::Residuals => self.residuals(),
            Stage::Report => self.report(),
            Stage::All => unreachable!(),
        }
    }

    fn run_one(&self, stage: Stage, manifest: &mut Manifest) -> Result<StageStatus, CliError> {
        let names: Vec<&str> = ORDER.iter().map(|s| s.name()).collect();
        let entry = StageEntry { status: StageStatus::Running, inputs: stage.inputs(), outputs: vec![], failure: None };
        manifest.stages.insert(stage.name().into(), entry);
        manifest.save(&self.out, &names)?;
        let start = Instant::now();
        let result = self.dispatch(stage);
        record_timing(&self.out, stage.name(), start.elapsed().as_secs_f64())?;
        let e = manifest.stages.get_mut(stage.name()).unwrap();
        let status = match &result {
            Ok(r) => {
                e.outputs = r.outputs.clone();
                if r.partial { StageStatus::Partial } else { StageStatus::Complete }
            }
            Err(err) => {
                e.failure = Some(err.to_string());
                StageStatus::Failed
            }
        };
        e.status = status.clone();
        manifest.save(&self.out, &names)?;
        result.map(|_| status)
    }

    /// Runs one stage, or every stage in order for [`Stage::All`].
    pub fn run(&self, stage: Stage) -> Result<RunOutcome, CliError> {
        let mut manifest = Manifest::load_or_new(&self.out);
        if stage != Stage::All {
            let status = self.run_one(stage, &mut manifest)?;
            return Ok(RunOutcome { code: if status == StageStatus::Partial { 4 } else { 0 } });
        }
        let mut code = 0;
        let mut table_ok = true;
        for s in ORDER {
            let needs_table = s.inputs().iter().any(|i| i == TABLE_CSV);
            if needs_table && !table_ok {
                let entry = StageEntry { status: StageStatus::Skipped, inputs: s.inputs(), outputs: vec![], failure: Some("table stage failed".into()) };
                manifest.stages.insert(s.name().into(), entry);
                continue;
            }
            match self.run_one(s, &mut manifest) {
                Ok(StageStatus::Partial) if code != 3 => code = 4,
                Ok(_) => {}
                Err(e @ CliError::Numerical { .. }) => {
                    eprintln!("{e}");
                    code = 3;
                    if s == Stage::Tables {
                        table_ok = false;
                    }
                }
                Err(e) => return Err(e),
            }
        }
        let names: Vec<&str> = ORDER.iter().map(|s| s.name()).collect();
        manifest.save(&self.out, &names)?;
        Ok(RunOutcome { code })
    }
}

fn key(x: f64) -> String {
    format!("{x}")
}

/// scenario → epsilon → time → test function → {heat, ac}.
pub fn nested(rep: &ResidualReport) -> Value {
    let mut by_eps = Map::new();
    for b in &rep.blocks {
        let mut by_t = Map::new();
        if let Some(f) = &b.failure {
            by_eps.insert(key(b.eps), json!({ "failure": f }));
            continue;
        }
        for c in &b.cells {
            let slot = by_t.entry(key(c.t)).or_insert_with(|| Value::Object(Map::new()));
            slot.as_object_mut().unwrap().insert(format!("{}", c.test), json!({ "heat": c.heat, "ac": c.ac }));
        }
        by_eps.insert(key(b.eps), Value::Object(by_t));
    }
    let mut root = Map::new();
    root.insert(rep.label.clone(), Value::Object(by_eps));
    Value::Object(root)
}
