#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::OnceLock;

use frontmerge::convolutions::{kinetic_coefficients, InteractionTable};
use frontmerge::interaction::{InteractionParams, InteractionSolution};
use frontmerge::numerics::{QuadratureSpec, RadialGrid};
use frontmerge::phasefield::{run_phasefield, Coupling, PDEState};
use frontmerge::stefan::{Kinetics, ManufacturedParams, Scenario, ScenarioKind, SolvedParams};

pub struct Setup {
    pub spec: QuadratureSpec,
    pub table: InteractionTable,
    pub sol: InteractionSolution,
    pub kin: Kinetics,
}

pub fn setup() -> &'static Setup {
    static CELL: OnceLock<Setup> = OnceLock::new();
    CELL.get_or_init(|| {
        let spec = QuadratureSpec::default();
        let table = InteractionTable::build(-16.0, 16.0, 257, &spec).unwrap();
        let sol = InteractionSolution::solve(&table, InteractionParams::default(), &spec).unwrap();
        let (kappa1, kappa2) = kinetic_coefficients(&spec).unwrap();
        Setup { spec, table, sol, kin: Kinetics { kappa1, kappa2 } }
    })
}

pub fn symmetric() -> &'static Scenario {
    static CELL: OnceLock<Scenario> = OnceLock::new();
    CELL.get_or_init(|| {
        Scenario::manufactured(ScenarioKind::ManufacturedSymmetric, ManufacturedParams::symmetric(1.0), setup().kin).unwrap()
    })
}

pub fn asymmetric() -> &'static Scenario {
    static CELL: OnceLock<Scenario> = OnceLock::new();
    CELL.get_or_init(|| {
        Scenario::manufactured(ScenarioKind::ManufacturedAsymmetric, ManufacturedParams::asymmetric(), setup().kin).unwrap()
    })
}

pub fn solved() -> &'static Scenario {
    static CELL: OnceLock<Scenario> = OnceLock::new();
    CELL.get_or_init(|| Scenario::solved(&SolvedParams::default(), setup().kin).unwrap())
}

/// Order of a ε-halving sequence from its first and last entries.
pub fn observed_order(eps: &[f64], err: &[f64]) -> f64 {
    let n = eps.len() - 1;
    (err[0] / err[n]).ln() / (eps[0] / eps[n]).ln()
}

fn exact(r: f64, t: f64) -> (f64, f64, f64, f64, f64, f64, f64) {
    // u, u_t, u_r, u_rr, σ, σ_t, σ_rr
    let k = PI / 2.0;
    let x = k * (r - 1.0);
    let e = (-t).exp();
    let u = 0.5 * x.cos() * e;
    let s = x.sin() * e + r;
    (u, -u, -0.5 * k * x.sin() * e, -k * k * u, s, -x.sin() * e, -k * k * x.sin() * e)
}

/// Max nodal error at t = 0.1 of the forced phase-field run with ε = 1.
pub fn manufactured_error(cells: usize) -> f64 {
    let eps = 1.0;
    let grid = RadialGrid::uniform(1.0, 3.0, cells).unwrap();
    let nodes = grid.nodes();
    let u0 = nodes.iter().map(|&r| exact(r, 0.0).0).collect();
    let s0 = nodes.iter().map(|&r| exact(r, 0.0).4).collect();
    let init = PDEState::new(grid, u0, s0, 0.0, eps).unwrap();
    let forcing = |r: f64, t: f64| {
        let (u, ut, ur, urr, s, st, srr) = exact(r, t);
        let lap = urr + 2.0 * ur / r;
        let fu = eps * (ut - lap) - (u - u * u * u) / eps - s / r;
        let fs = st - srr + r * ut;
        (fu, fs)
    };
    let h = 2.0 / cells as f64;
    let bc = |t: f64| (exact(1.0, t).4, exact(3.0, t).4);
    let (snaps, _) = run_phasefield(init, &[0.1], 0.5 * h * h, &bc, Coupling::Full, Some(&forcing)).unwrap();
    let s = &snaps[0];
    s.grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            let e = exact(r, 0.1);
            (s.u[j] - e.0).abs().max((s.sigma[j] - e.4).abs())
        })
        .fold(0.0, f64::max)
}
