mod common;

use common::{asymmetric, observed_order, setup, solved, symmetric};
use frontmerge::ansatz::*;
use frontmerge::interaction::FrontPair;
use frontmerge::numerics::{integrate_interval, QuadratureSpec};
use frontmerge::profiles::{Bump, ProfileParams};
use frontmerge::stefan::Scenario;
use frontmerge::Error;
use proptest::prelude::*;

fn ctx(sc: &'static Scenario, eps: f64) -> AnsatzContext<'static> {
    AnsatzContext::new(sc, &setup().sol, eps, ProfileParams::default()).unwrap()
}

fn pre_contact_window(c: &CorrectionSolution, sc: &Scenario) -> Vec<usize> {
    (0..c.len())
        .filter(|&k| {
            let t = c.times[k];
            t >= 0.05 && t < sc.traj.t_star && c.fronts[k].psi0 >= 10.0 * c.eps
        })
        .collect()
}

#[test]
fn order_function_saturates_away_from_fronts() {
    let eps = 0.005;
    let c = ctx(symmetric(), eps);
    let f = c.fronts(0.1).unwrap();
    assert!(f.psi0 > 80.0 * eps);
    let inside = c.order(f.r_mid(), 0.1).unwrap().u;
    assert!((inside + 1.0).abs() < 1e-15, "{inside}");
    for r in [f.r1 - 40.0 * eps, f.r2 + 40.0 * eps] {
        let u = c.order(r, 0.1).unwrap().u;
        assert!((u - 1.0).abs() < 1e-15, "{u}");
    }
}

trait Mid {
    fn r_mid(&self) -> f64;
}

impl Mid for FrontPair {
    fn r_mid(&self) -> f64 {
        0.5 * (self.r1 + self.r2)
    }
}

#[test]
fn order_function_is_weakly_one_at_contact() {
    let zeta = Bump::new(2.0, 0.5);
    let spec = QuadratureSpec::default();
    let eps = [0.08, 0.04, 0.02, 0.01];
    let moments: Vec<f64> = eps
        .iter()
        .map(|&e| {
            let mut f = setup().sol.front_positions(0.2, e, &symmetric().traj).unwrap();
            f.r1 = 2.0;
            f.r2 = 2.0;
            f.beta = 0.5;
            let g = |r: f64| (order_function(r, e, &f).u - 1.0) * zeta.value(r);
            integrate_interval(g, 1.5, 2.5, &spec).unwrap().value.abs()
        })
        .collect();
    assert!(observed_order(&eps[2..], &moments[2..]) >= 0.9, "{moments:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn order_derivatives_match_differences(xi in 0.0f64..1.0, t in 0.05f64..0.7) {
        let c = ctx(asymmetric(), 0.05);
        let f = c.fronts(t).unwrap();
        let r = f.r1.min(f.r2) - 0.2 + xi * ((f.r2 - f.r1).abs() + 0.4);
        let v = c.order(r, t).unwrap();
        let (hr, ht) = (1e-6, 1e-7);
        let ur = (c.order(r + hr, t).unwrap().u - c.order(r - hr, t).unwrap().u) / (2.0 * hr);
        let ut = (c.order(r, t + ht).unwrap().u - c.order(r, t - ht).unwrap().u) / (2.0 * ht);
        prop_assert!((v.u_r - ur).abs() <= 1e-6 * v.u_r.abs().max(1.0), "u_r {} vs {}", v.u_r, ur);
        prop_assert!((v.u_t - ut).abs() <= 1e-6 * v.u_t.abs().max(1.0), "u_t {} vs {}", v.u_t, ut);
    }

    #[test]
    fn temperature_model_hits_front_values(t in 0.0f64..0.75, eps in 0.01f64..0.1) {
        let c = ctx(asymmetric(), eps);
        let co = c.coeffs(t).unwrap();
        let f = c.fronts(t).unwrap();
        let kin = asymmetric().kinetics;
        let k1 = kin.front_value(1, f.r1, f.r1t);
        let k2 = kin.front_value(2, f.r2, f.r2t);
        // I is assembled from r − r_mid over ψ, so rounding in r is amplified by 1/ψ
        let cond = 8.0 * f64::EPSILON * f.r2 * (co.k1 + co.k2).abs() / co.psi.abs();
        prop_assert!((co.value(co.r1) - k1).abs() <= 1e-9 * k1.abs().max(1.0) + cond);
        prop_assert!((co.value(co.r2) - k2).abs() <= 1e-9 * k2.abs().max(1.0) + cond);
    }

    #[test]
    fn blended_and_piecewise_forms_agree(xi in -0.5f64..1.5, t in 0.0f64..0.45, eps in 0.005f64..0.04) {
        let c = ctx(symmetric(), eps);
        let co = c.coeffs(t).unwrap();
        prop_assume!(co.psi >= 10.0 * eps);
        let r = co.r1 + xi * co.psi;
        let (a, b) = (co.value(r), co.piecewise_value(r));
        prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn gradient_jump_matches_manufactured_sigma() {
    for sc in [symmetric(), asymmetric()] {
        let m = sc.manufactured_data().unwrap();
        for k in 0..20 {
            let t = 0.02 * k as f64;
            let c = ctx(sc, 0.0075);
            let co = c.coeffs(t).unwrap();
            assert!(co.b > 1.0 - 1e-15);
            let (r1, r2) = (sc.traj.r10(t).0, sc.traj.r20(t).0);
            let d = 1e-9;
            let jump = |r: f64| m.sigma_bar_all(r + d, t).unwrap().1 - m.sigma_bar_all(r - d, t).unwrap().1;
            assert!((co.gradient_jump(1) - jump(r1)).abs() < 1e-6, "t {t}");
            assert!((co.gradient_jump(2) - jump(r2)).abs() < 1e-6, "t {t}");
        }
    }
}

#[test]
fn gradient_jump_tracks_the_sharp_solver() {
    let sc = solved();
    let run = sc.sharp_run().unwrap();
    let c = ctx(sc, 0.005);
    let mut worst: f64 = 0.0;
    for st in run.states.iter().skip(20).step_by(10) {
        if st.t > sc.traj.t_star - 0.1 {
            break;
        }
        let g = st.gammas();
        let co = c.coeffs(st.t).unwrap();
        worst = worst.max((co.gradient_jump(1) - (g.g1p + g.g1m)).abs());
        worst = worst.max((co.gradient_jump(2) - (g.g2p + g.g2m)).abs());
    }
    assert!(worst < 1e-6, "{worst:e}");
}

#[test]
fn correction_solve_is_consistent() {
    for sc in [symmetric(), solved()] {
        let c = ctx(sc, 0.05);
        let sol = solve_correction(&c, &CorrectionParams::default()).unwrap();
        assert!(sol.scheme_residual <= 1e-8, "{}", sol.scheme_residual);
        assert!(sol.grid.h() <= 0.05 / 8.0 + 1e-15);
        let first = sol.field(0, sc);
        assert!(first.q_hat.iter().all(|q| q.abs() < 1e-12));
        for k in (0..sol.len()).step_by(7) {
            let f = sol.field(k, sc);
            assert!(f.assembly_defect(&c.profile) < 1e-12);
            assert!(f.theta.iter().all(|v| v.is_finite()));
            let (a, b) = sc.boundary_values(f.t);
            let n = f.sigma.len() - 1;
            assert!((f.sigma[0] - a).abs() <= 1e-12 * a.abs().max(1.0));
            assert!((f.sigma[n] - b).abs() <= 1e-12 * b.abs().max(1.0));
            let umax = 1.0 + 1e-12;
            assert!(f.u.iter().all(|&u| (-umax..=umax).contains(&u)));
        }
    }
}

#[test]
fn correction_vanishes_pre_contact_on_the_solved_scenario() {
    let sc = solved();
    let mut rows = Vec::new();
    for eps in [0.05, 0.025] {
        let c = ctx(sc, eps);
        let sol = solve_correction(&c, &CorrectionParams::default()).unwrap();
        let (mut qhat, mut dist, mut qfront) = (0.0f64, 0.0f64, 0.0f64);
        for k in pre_contact_window(&sol, sc) {
            let f = sol.field(k, sc);
            for (j, r) in f.grid.nodes().into_iter().enumerate() {
                qhat = qhat.max(f.q_hat[j].abs());
                dist = dist.max((f.sigma[j] - sc.sigma_bar(r, f.t).unwrap()).abs());
            }
            let co = &sol.coeffs[k];
            for r in [co.r1, co.r2] {
                let e = c.profile.cutoff(r).0;
                qfront = qfront.max((sc.sigma_bar(r, f.t).unwrap() - e * co.value(r)).abs());
            }
        }
        println!("eps {eps}: |q̂| {qhat:.3e}  |σ̌−σ̄| {dist:.3e}  |q̌(r_i)| {qfront:.3e}");
        rows.push((qhat, dist, qfront));
    }
    assert!(rows[1].0 < 0.7 * rows[0].0);
    assert!(rows[1].1 < 0.7 * rows[0].1);
    assert!(rows[1].2 < 0.7 * rows[0].2);
}

#[test]
fn kernel_path_is_zero_at_start_and_bounded() {
    let c = ctx(symmetric(), 0.1);
    let spec = QuadratureSpec::default();
    let norm = KernelNormalization::HeatKernel;
    assert_eq!(correction_qhat_kernel(&c, KernelPiece::Q1, 2.0, 0.0, norm, &spec).unwrap(), 0.0);
    let mut sup: f64 = 0.0;
    for t in [0.1, 0.3, 0.45, 0.5, 0.55, 0.7] {
        for r in [1.5, 1.9, 2.0, 2.1, 2.5] {
            let q = correction_qhat_kernel(&c, KernelPiece::Q1, r, t, norm, &spec).unwrap();
            assert!(q.is_finite());
            sup = sup.max(q.abs());
        }
    }
    assert!(sup < 10.0, "{sup}");
}

#[test]
fn kernel_and_difference_paths_agree() {
    let spec = QuadratureSpec::default();
    let norm = KernelNormalization::HeatKernel;
    for (eps, tol) in [(0.1, 1e-3), (0.05, 1e-3)] {
        let c = ctx(symmetric(), eps);
        for piece in [KernelPiece::Q1, KernelPiece::QStar1] {
            let t_end = 0.6;
            let (grid, times, q) = solve_singular_piece_fd(&c, piece, norm, (-4.0, 8.0), eps / 16.0, 2e-4, t_end).unwrap();
            let k = times.len() - 1;
            for r in [1.6, 1.95, 2.05, 2.4] {
                let a = correction_qhat_kernel(&c, piece, r, t_end, norm, &spec).unwrap();
                let b = grid.interpolate(&q[k], r);
                assert!((a - b).abs() < tol, "{piece:?} eps {eps} r {r}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn kernel_normalizations_differ_by_their_constants() {
    let c = ctx(symmetric(), 0.1);
    let spec = QuadratureSpec::default();
    for norm in [KernelNormalization::Printed, KernelNormalization::HeatKernel] {
        let (d, s) = norm.equation();
        let (cc, kappa) = norm.constants();
        assert!((d - kappa / 4.0).abs() < 1e-15);
        assert!(s < 0.0 && cc > 0.0);
        let q = correction_qhat_kernel(&c, KernelPiece::Q1, 2.0, 0.6, norm, &spec).unwrap();
        assert!(q.is_finite());
    }
}

#[test]
fn qhat_is_holder_near_contact() {
    let c = ctx(symmetric(), 0.1);
    let spec = QuadratureSpec::default();
    let r0 = symmetric().traj.r10(0.48).0;
    let gaps: Vec<f64> = (0..6).map(|k| 0.1 / 2f64.powi(k)).collect();
    let q = holder_quotients(&c, KernelPiece::Q1, r0, 0.48, &gaps, 0.45, KernelNormalization::HeatKernel, &spec).unwrap();
    println!("Hölder quotients {q:?}");
    assert!(q.iter().all(|v| v.is_finite()));
    let n = q.len();
    let ratio = q[n - 1].max(q[n - 2]) / q[n - 1].min(q[n - 2]);
    assert!(ratio < 2.0, "{q:?}");
}

#[test]
fn bump_averages_of_qhat_converge() {
    let c = ctx(symmetric(), 0.1);
    let spec = QuadratureSpec::default();
    let loose = QuadratureSpec::default().with_abs_tol(1e-10).with_rel_tol(1e-8);
    let norm = KernelNormalization::HeatKernel;
    let t = 0.48;
    let ri = symmetric().traj.r10(t).0;
    let zeta = Bump::new(2.0, 0.9);
    let q = |r: f64| correction_qhat_kernel(&c, KernelPiece::Q1, r, t, norm, &spec).unwrap();
    let qi = q(ri);
    let widths = [0.08, 0.04, 0.02, 0.01];
    let err: Vec<f64> = widths
        .iter()
        .map(|&w| {
            let b = Bump::new(ri, w);
            let avg = integrate_interval(|r| zeta.value(r) * b.value(r) * q(r), ri - w, ri + w, &loose).unwrap().value / w;
            (avg - zeta.value(ri) * qi * b.integral() / w).abs()
        })
        .collect();
    println!("bump-average defects {err:?}");
    assert!(observed_order(&widths, &err) >= 0.4, "{err:?}");
}

#[test]
fn qhat_shift_from_front_correction_is_holder_small() {
    let spec = QuadratureSpec::default();
    let norm = KernelNormalization::HeatKernel;
    let mut worst = Vec::new();
    for eps in [0.1, 0.05, 0.025] {
        let c = ctx(symmetric(), eps);
        let mut w: f64 = 0.0;
        for t in [0.3, 0.4, 0.45, 0.48] {
            let f = c.fronts(t).unwrap();
            let r10 = symmetric().traj.r10(t).0;
            let shift = (f.r1 - r10).abs();
            if shift < 1e-14 {
                continue;
            }
            let dq = (correction_qhat_kernel(&c, KernelPiece::Q1, f.r1, t, norm, &spec).unwrap()
                - correction_qhat_kernel(&c, KernelPiece::Q1, r10, t, norm, &spec).unwrap())
            .abs();
            w = w.max(dq / shift.powf(0.4));
        }
        worst.push(w);
    }
    println!("shift quotients {worst:?}");
    assert!(worst.iter().all(|v| v.is_finite()));
    assert!(worst[2] <= 1.5 * worst[0], "{worst:?}");
}

#[test]
fn midpoint_value_of_the_odd_piece_is_order_eps() {
    let spec = QuadratureSpec::default();
    let norm = KernelNormalization::HeatKernel;
    let vals: Vec<f64> = [0.1, 0.05]
        .iter()
        .map(|&eps| {
            let c = ctx(symmetric(), eps);
            correction_qhat_kernel(&c, KernelPiece::QStar1, symmetric().traj.r_star, 0.55, norm, &spec).unwrap().abs()
        })
        .collect();
    println!("q̂*(r_mid) {vals:?}");
    assert!(vals[1] < 0.7 * vals[0], "{vals:?}");
}

#[test]
fn temperature_jump_is_negative() {
    let s = setup();
    let p = ProfileParams::default();
    for sc in [symmetric(), asymmetric(), solved()] {
        let j = temperature_jump(sc, &s.sol, p, 1e-6).unwrap();
        assert!(j.measured < 0.0 && j.formula < 0.0, "{j:?}");
        assert!(j.plateau_post.abs() < 1e-12);
    }
    let j = temperature_jump(symmetric(), &s.sol, p, 1e-6).unwrap();
    assert!((j.formula + 1.0).abs() < 1e-12);
    let kin = symmetric().kinetics;
    let r = symmetric().traj.r_star;
    let k1 = kin.front_value(1, r, 1.0);
    let k2 = -kin.front_value(2, r, -1.0);
    assert!((j.plateau_pre - (k1 - k2) / (2.0 * r)).abs() < 1e-9, "{j:?}");
}

#[test]
fn temperature_jump_needs_room_for_plateaus() {
    let s = setup();
    let r = temperature_jump(symmetric(), &s.sol, ProfileParams::default(), 0.1);
    assert!(matches!(r, Err(Error::TauOutOfRange { .. })), "{r:?}");
}

#[test]
fn context_rejects_bad_input() {
    let s = setup();
    assert!(AnsatzContext::new(symmetric(), &s.sol, 0.0, ProfileParams::default()).is_err());
    let bad = ProfileParams { cutoff_outer: (0.5, 2.95), ..ProfileParams::default() };
    assert!(AnsatzContext::new(symmetric(), &s.sol, 0.1, bad).is_err());
}
