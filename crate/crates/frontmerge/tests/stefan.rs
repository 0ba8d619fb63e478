mod common;

use common::{asymmetric, setup, solved, symmetric};
use frontmerge::stefan::*;
use proptest::prelude::*;

fn kin() -> Kinetics {
    setup().kin
}

fn params(cells: usize, dt: f64) -> SharpParams {
    SharpParams { cells, dt, ..SharpParams::default() }
}

fn hot_run(cells: usize, dt: f64, t_end: f64) -> SharpRun {
    let init = SharpInterfaceState::piecewise_linear(1.0, 3.0, 1.6, 2.4, (8.0, 8.0), kin(), cells);
    run_sharp_interface(init, (8.0, 8.0), kin(), &params(cells, dt), t_end, 0.0).unwrap()
}

#[test]
fn stationary_equilibrium_does_not_drift() {
    let (init, bc) = SharpInterfaceState::stationary(1.0, 3.0, 1.6, 2.4, kin(), 40);
    let run = run_sharp_interface(init, bc, kin(), &params(40, 1e-2), 1.0, 0.0).unwrap();
    let last = &run.final_state;
    assert!((last.t - 1.0).abs() < 1e-12);
    let drift = (last.r1 - 1.6).abs().max((last.r2 - 2.4).abs());
    assert!(drift <= 1e-8, "{drift}");
}

#[test]
fn flux_jump_holds_after_every_step() {
    let run = solved().sharp_run().unwrap();
    let worst = run.reports[1..].iter().map(|r| r.flux_residual).fold(0.0, f64::max);
    assert!(worst <= 1e-8, "{worst}");
    for s in &run.states[1..] {
        let (a, b) = s.flux_residual();
        assert!(a.abs().max(b.abs()) <= 1e-8);
    }
}

#[test]
fn front_values_are_the_gibbs_thomson_values() {
    let run = solved().sharp_run().unwrap();
    for s in &run.states[1..] {
        let n = s.cells();
        assert_eq!(s.sigma[0][n], kin().front_value(1, s.r1, s.v1));
        assert_eq!(s.sigma[1][0], kin().front_value(1, s.r1, s.v1));
        assert_eq!(s.sigma[1][n], kin().front_value(2, s.r2, s.v2));
        assert_eq!(s.sigma[2][0], kin().front_value(2, s.r2, s.v2));
    }
}

#[test]
fn self_convergence_is_at_least_first_order() {
    let levels: Vec<(f64, f64)> = [(20, 4e-3), (40, 2e-3), (80, 1e-3), (160, 5e-4)]
        .iter()
        .map(|&(c, dt)| {
            let s = hot_run(c, dt, 0.3).final_state;
            (s.r1, s.r2)
        })
        .collect();
    let diff = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).abs().max((a.1 - b.1).abs());
    let d: Vec<f64> = levels.windows(2).map(|w| diff(w[0], w[1])).collect();
    let orders: Vec<f64> = d.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    assert!(orders.iter().all(|&p| p >= 1.0), "{d:?} {orders:?}");
}

#[test]
fn heat_content_balance() {
    let run = hot_run(160, 2.5e-4, 0.2);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for w in run.reports.windows(2).skip(5) {
        let (a, b) = (&w[0], &w[1]);
        let dt = b.t - a.t;
        let lhs = (b.heat_content - a.heat_content) / dt - b.boundary_flux;
        let rhs = b.r2.powi(3) * b.v2 - b.r1.powi(3) * b.v1;
        worst = worst.max((lhs - rhs).abs());
        scale = scale.max(rhs.abs());
    }
    assert!(worst <= 0.02 * scale, "{worst} vs {scale}");
}

#[test]
fn solved_scenario_contact() {
    let traj = &solved().traj;
    assert!((traj.t_star - 0.6155).abs() < 2e-3, "{}", traj.t_star);
    assert!((traj.r_star - 1.875).abs() < 5e-3, "{}", traj.r_star);
    assert_eq!(traj.constant_extension, [false, false]);
}

#[test]
fn contact_is_insensitive_to_the_threshold() {
    let p = SolvedParams::default();
    let h = (p.r_max - p.r_min) / (3 * p.sharp.cells) as f64;
    let init = SharpInterfaceState::piecewise_linear(1.0, 3.0, 1.6, 2.4, p.boundary, kin(), p.sharp.cells);
    let run = run_sharp_interface(init, p.boundary, kin(), &p.sharp, p.t_end, 1.5 * h).unwrap();
    let reps = &run.reports[1..];
    let t: Vec<f64> = reps.iter().map(|r| r.t).collect();
    let r1: Vec<f64> = reps.iter().map(|r| r.r1).collect();
    let r2: Vec<f64> = reps.iter().map(|r| r.r2).collect();
    let (a, _) = detect_contact(&t, &r1, &r2, 3.0 * h).unwrap();
    let (b, _) = detect_contact(&t, &r1, &r2, 1.5 * h).unwrap();
    assert!((a - b).abs() <= p.sharp.dt, "{a} {b}");
}

#[test]
fn contact_detection_examples() {
    let t: Vec<f64> = (0..=100).map(|k| k as f64 * 0.01).collect();
    let r1: Vec<f64> = t.iter().map(|t| 1.5 + t).collect();
    let r2: Vec<f64> = t.iter().map(|t| 2.5 - t).collect();
    let (ts, rs) = detect_contact(&t, &r1, &r2, 0.03).unwrap();
    assert!((ts - 0.5).abs() < 1e-12 && (rs - 2.0).abs() < 1e-12);
    let still = vec![2.5; t.len()];
    let e = detect_contact(&t, &r1[..].iter().map(|_| 1.5).collect::<Vec<_>>(), &still, 0.03).unwrap_err();
    assert_eq!(e.to_string(), "no contact in horizon");
}

#[test]
fn continuation_of_the_solved_fronts() {
    let sc = solved();
    let traj = &sc.traj;
    let run = sc.sharp_run().unwrap();
    for r in &run.reports[1..] {
        assert!((traj.r10(r.t).0 - r.r1).abs() < 1e-12);
        assert!((traj.r20(r.t).0 - r.r2).abs() < 1e-12);
    }
    let n = 2000;
    let mut psi_sign_changes = 0;
    let mut last = traj.psi0(0.0).0;
    for k in 1..=n {
        let t = traj.t_end * k as f64 / n as f64;
        assert!(traj.r10(t).1 > 0.0 && traj.r20(t).1 < 0.0, "t = {t}");
        let p = traj.psi0(t).0;
        if p.signum() != last.signum() {
            psi_sign_changes += 1;
        }
        last = p;
    }
    assert_eq!(psi_sign_changes, 1);
    assert!(traj.psi0(traj.t_star).0.abs() < 1e-3);
    // one-sided difference quotients across t*
    let h = 2e-3;
    let ts = traj.t_star;
    for f in [&traj.front1, &traj.front2] {
        let left = (f.eval(ts).0 - f.eval(ts - h).0) / h;
        let right = (f.eval(ts + h).0 - f.eval(ts).0) / h;
        assert!((left - right).abs() < 0.1 * left.abs(), "{left} {right}");
    }
}

#[test]
fn solved_gammas_keep_the_flux_sums() {
    let sc = solved();
    let traj = &sc.traj;
    let run = sc.sharp_run().unwrap();
    for r in &run.reports[1..] {
        let g = traj.gammas(r.t);
        assert!((g.g1m + g.g1p - r.r1.powi(3) * r.v1).abs() < 1e-8);
        assert!((g.g2m + g.g2p + r.r2.powi(3) * r.v2).abs() < 1e-8);
    }
    let t_last = run.reports.last().unwrap().t;
    for k in 1..=50 {
        let t = t_last + (traj.t_end - t_last) * k as f64 / 50.0;
        let g = traj.gammas(t);
        let (s1, s2) = traj.flux_sums(t);
        assert!((g.g1m + g.g1p - s1).abs() <= 1e-9 * s1.abs().max(1.0));
        assert!((g.g2m + g.g2p - s2).abs() <= 1e-9 * s2.abs().max(1.0));
    }
    let before = traj.gammas(t_last - 1e-9);
    let after = traj.gammas(t_last + 1e-9);
    assert!((before.g1m - after.g1m).abs() < 1e-6 && (before.g2m - after.g2m).abs() < 1e-6);
    // against the spline derivative of the sampled fronts the sums only hold to O(dt)
    let mut worst: f64 = 0.0;
    for r in run.reports.iter().filter(|r| r.t >= 0.05) {
        let g = traj.gammas(r.t);
        let (s1, s2) = traj.flux_sums(r.t);
        worst = worst.max((g.g1m + g.g1p - s1).abs() / s1.abs()).max((g.g2m + g.g2p - s2).abs() / s2.abs());
    }
    assert!(worst < 5e-3, "{worst}");
}

#[test]
fn gradients_of_the_manufactured_profile_are_recovered() {
    let m = symmetric().manufactured_data().unwrap();
    for t in [0.1, 0.3, 0.45] {
        let (r1, r2) = (m.traj.r10(t).0, m.traj.r20(t).0);
        let n = 4000;
        let mut s = SharpInterfaceState::piecewise_linear(1.0, 3.0, r1, r2, (0.0, 0.0), kin(), n);
        for j in 0..3 {
            s.sigma[j] = s.nodes(j).iter().map(|&r| m.sigma_bar(r, t).unwrap()).collect();
        }
        let (g, e) = (s.gammas(), m.traj.gammas(t));
        for (a, b) in [(g.g1m, e.g1m), (g.g1p, e.g1p), (g.g2m, e.g2m), (g.g2p, e.g2p)] {
            assert!((a - b).abs() < 1e-4, "t = {t}: {a} vs {b}");
        }
    }
}

#[test]
fn manufactured_examples() {
    for sc in [symmetric(), asymmetric()] {
        let m = sc.manufactured_data().unwrap();
        assert!(m.params.validate().is_ok());
        for k in 0..50 {
            let t = 0.49 * k as f64 / 49.0;
            let (r1, v1, _) = m.traj.r10(t);
            let (r2, v2, _) = m.traj.r20(t);
            assert_eq!(m.sigma_bar(r1, t).unwrap(), kin().front_value(1, r1, v1));
            let right = m.sigma_bar(r2, t).unwrap();
            assert!((right - kin().front_value(2, r2, v2)).abs() < 1e-14);
        }
        // the defect grows like gap⁻³ towards contact; bounded on a box that stops short of it
        let sup = |n: usize| {
            let mut w: f64 = 0.0;
            for j in 0..=n {
                for i in 0..=2 * n {
                    if let Some(d) = m.defect(1.0 + i as f64 / n as f64, 0.4 * j as f64 / n as f64) {
                        w = w.max(d.abs());
                    }
                }
            }
            w
        };
        let (d, fine) = (sup(40), sup(160));
        assert!(d.is_finite() && (fine / d - 1.0).abs() < 0.2, "{d} {fine}");
    }
    let m = symmetric().manufactured_data().unwrap();
    assert!((m.traj.psi0(0.4).0 - 0.2).abs() < 1e-14);
    let bad = ManufacturedParams { a1: -1.0, ..ManufacturedParams::symmetric(1.0) };
    assert!(bad.validate().is_err());
    let wide = ManufacturedParams { t_end: 3.0, ..ManufacturedParams::symmetric(1.0) };
    assert!(wide.validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn manufactured_flux_sums_are_exact(t in 0.0f64..0.75) {
        for sc in [symmetric(), asymmetric()] {
            let g = sc.traj.gammas(t);
            let (s1, s2) = sc.traj.flux_sums(t);
            prop_assert!((g.g1m + g.g1p - s1).abs() <= 1e-14 * (1.0 + s1.abs()));
            prop_assert!((g.g2m + g.g2p - s2).abs() <= 1e-14 * (1.0 + s2.abs()));
        }
    }

    #[test]
    fn manufactured_sigma_is_continuous_at_the_fronts(t in 0.0f64..0.49) {
        let m = asymmetric().manufactured_data().unwrap();
        for r in [m.traj.r10(t).0, m.traj.r20(t).0] {
            let a = m.sigma_bar(r - 1e-9, t).unwrap();
            let b = m.sigma_bar(r + 1e-9, t).unwrap();
            prop_assert!((a - b).abs() < 1e-6);
        }
    }
}
