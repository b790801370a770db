mod common;

use cdpr::control::{
    clamp_slider_step, compute_joint_angles, manipulability_kappa, mix_inputs, optimize_sliders, pd_step, Gains,
    SliderSearch, TrackingState,
};
use cdpr::model::{JointInput, RobotParams, WorkingMode};
use common::*;
use nalgebra::{DMatrix, Vector3, Vector4};
use proptest::prelude::*;

#[test]
fn tension_solver_balances_every_mode() {
    let (residual, short) = tension_residuals(140, 21);
    assert!(residual <= 1e-8, "residual {residual:e}");
    assert!(short <= 0.0, "tension below tau_min by {short:e}");
}

#[test]
fn sliders_match_exhaustive_grid() {
    let cases = slider_oracle_cases(50, 22);
    assert!(cases.iter().filter(|c| c.kappa_grid > 0.0).count() >= 40);
    for c in &cases {
        assert!(
            c.ok(),
            "mode {}: kappa {} vs grid {} ({} cells away)",
            c.mode.id(),
            c.kappa_opt,
            c.kappa_grid,
            c.cells
        );
    }
}

#[test]
fn healthy_sliders_match_coarse_four_rail_grid() {
    let p = RobotParams::default();
    let mut r = rng(23);
    for _ in 0..3 {
        let pose = random_pose(&mut r);
        let cur = random_sliders(&p, &mut r);
        let c = slider_grid_case_healthy(&p, &pose, &cur, 0.02);
        assert!(
            c.ok(),
            "kappa {} vs grid {} ({} cells away)",
            c.kappa_opt,
            c.kappa_grid,
            c.cells
        );
    }
}

#[test]
fn spools_reproduce_commanded_tension() {
    let l = Vector4::new(0.8, 0.9, 1.0, 1.1);
    let k = l.map(|v| 100.0 / v);
    let tau = Vector4::new(6.0, 7.0, 8.0, 0.0);
    let prev = Vector4::repeat(0.3);
    let th = compute_joint_angles(&l, &k, &tau, [true, true, true, false], &prev);
    for i in 0..3 {
        assert!((k[i] * (l[i] - th[i]) - tau[i]).abs() < 1e-12);
    }
    assert_eq!(th[3], 0.3);
}

#[test]
fn pd_converges_on_a_fixed_reference() {
    let gains = Gains {
        g_p: [0.5, 0.5, 0.0],
        g_d: [0.01, 0.01, 0.0],
    };
    let target = Vector3::new(1.2, 0.8, 0.0);
    let mut x = Vector3::new(1.0, 0.7, 0.0);
    let mut tr = TrackingState::new(x);
    for _ in 0..60 {
        x = pd_step(&target, &x, &mut tr, &gains, 0.1);
    }
    assert!((x - target).xy().norm() < 1e-9);
}

fn map_strategy() -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0..1.0f64, 12).prop_map(|v| DMatrix::from_row_slice(3, 4, &v))
}

proptest! {
    #[test]
    fn kappa_is_scale_invariant(p in map_strategy(), c in 0.01..100.0f64) {
        let a = manipulability_kappa(&p);
        let b = manipulability_kappa(&(&p * c));
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn mixed_input_is_convex(
        raw in prop::collection::vec(prop::array::uniform8(0.0..1.0f64), 7),
        w in prop::collection::vec(0.0..1.0f64, 7),
    ) {
        let p = RobotParams::default();
        let total: f64 = w.iter().sum::<f64>() + 1e-9;
        let w: Vec<f64> = w.iter().map(|v| (v + 1e-9 / 7.0) / total).collect();
        let qs: Vec<JointInput> = raw
            .iter()
            .map(|a| {
                let mut a = *a;
                a[1] += 1.0;
                a[3] += 1.0;
                JointInput::from_array(a)
            })
            .collect();
        let m = mix_inputs(&p, &qs, &w).to_array();
        for (k, &mk) in m.iter().enumerate() {
            let lo = qs.iter().map(|q| q.to_array()[k]).fold(f64::INFINITY, f64::min);
            let hi = qs.iter().map(|q| q.to_array()[k]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(mk >= lo - 1e-12 && mk <= hi + 1e-12);
        }
    }

    #[test]
    fn slider_steps_are_bounded(
        target in prop::array::uniform4(-1.0..3.0f64),
        current in prop::array::uniform4(0.0..2.0f64),
        v in 0.01..2.0f64,
        dt in 0.001..0.5f64,
    ) {
        let s = clamp_slider_step(&Vector4::from(target), &Vector4::from(current), v, dt);
        for i in 0..4 {
            prop_assert!((s[i] - current[i]).abs() <= v * dt + 1e-15);
        }
    }

    #[test]
    fn optimised_sliders_stay_on_rails_and_in_rate(
        x in 0.5..1.5f64,
        y in 0.4..1.1f64,
        cur in prop::array::uniform4(0.0..1.0f64),
        mode in 1u8..=7,
    ) {
        let p = RobotParams::default();
        let cur = Vector4::new(cur[0], cur[1] + 1.0, cur[2], cur[3] + 1.0);
        let mode = WorkingMode::new(mode).unwrap();
        let dt = 0.1;
        let s = optimize_sliders(&p, &Vector3::new(x, y, 0.0), &cur, mode, dt, &SliderSearch::default());
        prop_assume!(s.is_ok());
        let s = s.unwrap();
        for i in 0..4 {
            prop_assert!(p.rails[i].contains(s[i]));
            prop_assert!((s[i] - cur[i]).abs() <= p.v_slider_max * dt + 1e-12);
            if !mode.is_surviving(i) {
                prop_assert_eq!(s[i], cur[i]);
            }
        }
    }
}
