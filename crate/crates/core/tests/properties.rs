use hexleg::flexibility::{
    default_stance, directional_limit, displaced, pose_feasible, Axis, Direction,
};
use hexleg::manipulability::{jacobian, manipulability, planar_manipulability};
use hexleg::workspace::monte_carlo_cloud;
use hexleg::{
    body_pose_matrix, forward_kinematics, inverse_kinematics, stance_forward, stance_inverse,
    BodyPose, Interval, JointAngles, JointLimits, LegDimensions,
};
use nalgebra::Matrix3;
use proptest::prelude::*;

fn dims() -> impl Strategy<Value = LegDimensions> {
    (20.0..300.0f64, 200.0..600.0f64, 200.0..600.0f64)
        .prop_map(|(a, b, c)| LegDimensions::new(a, b, c).unwrap())
}

/// Joint angles away from the knee singularities and the root axis.
fn angles() -> impl Strategy<Value = JointAngles> {
    (-45.0..45.0f64, -60.0..60.0f64, -170.0..-2.0f64)
        .prop_map(|(a, b, c)| JointAngles::from_degrees(a, b, c))
}

fn radial(q: &JointAngles, d: &LegDimensions) -> f64 {
    d.coxa() + d.femur() * q.hip.cos() + d.tibia() * (q.hip + q.knee).cos()
}

proptest! {
    #[test]
    fn ik_inverts_fk(d in dims(), q in angles()) {
        prop_assume!(radial(&q, &d) > 10.0);
        let back = inverse_kinematics(&forward_kinematics(&q, &d), &d).unwrap();
        prop_assert!(q.max_abs_diff(&back) < 1e-9, "{q:?} -> {back:?}");
    }

    #[test]
    fn jacobian_matches_central_differences(d in dims(), q in angles()) {
        let h = 1e-6;
        let j = jacobian(&q, &d);
        let mut fd = Matrix3::zeros();
        for col in 0..3 {
            let mut plus = [q.root, q.hip, q.knee];
            let mut minus = plus;
            plus[col] += h;
            minus[col] -= h;
            let p = forward_kinematics(&JointAngles::new(plus[0], plus[1], plus[2]), &d).to_vector();
            let m = forward_kinematics(&JointAngles::new(minus[0], minus[1], minus[2]), &d).to_vector();
            fd.set_column(col, &((p - m) / (2.0 * h)));
        }
        prop_assert!((j - fd).amax() < 1e-3, "max deviation {}", (j - fd).amax());
    }

    #[test]
    fn factored_form_matches_determinant(d in dims(), q in angles()) {
        let det = jacobian(&q, &d).determinant().abs();
        let w = manipulability(&q, &d);
        let floor = 1e-12 * d.total().powi(3);
        prop_assert!((det - w).abs() <= 1e-6 * det + floor, "det {det} vs w {w}");
    }

    #[test]
    fn straight_knee_is_singular(d in dims(), root in -1.0..1.0f64, hip in -1.5..1.5f64) {
        prop_assert_eq!(manipulability(&JointAngles::new(root, hip, 0.0), &d), 0.0);
    }

    #[test]
    fn root_angle_does_not_change_w(d in dims(), q in angles(), root in -3.0..3.0f64) {
        let a = manipulability(&q, &d);
        let b = manipulability(&JointAngles::new(root, q.hip, q.knee), &d);
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        prop_assert_eq!(a, planar_manipulability(q.hip, q.knee, &d));
    }

    #[test]
    fn w_scales_cubically(d in dims(), q in angles(), k in 0.1..10.0f64) {
        let w = manipulability(&q, &d);
        let wk = manipulability(&q, &d.scaled(k).unwrap());
        prop_assert!((wk - k.powi(3) * w).abs() <= 1e-10 * wk.max(1.0));
    }

    #[test]
    fn body_rotation_is_proper(x in -500.0..500.0f64, y in -500.0..500.0f64, z in -500.0..500.0f64,
                               a in -3.2..3.2f64, b in -1.5..1.5f64, c in -3.2..3.2f64) {
        let t = body_pose_matrix(&BodyPose::new(x, y, z, a, b, c));
        let r = t.fixed_view::<3, 3>(0, 0).into_owned();
        prop_assert!((r.transpose() * r - Matrix3::identity()).amax() < 1e-12);
        prop_assert!((r.determinant() - 1.0).abs() < 1e-12);
        prop_assert_eq!((t[(3, 0)], t[(3, 1)], t[(3, 2)], t[(3, 3)]), (0.0, 0.0, 0.0, 1.0));
        prop_assert_eq!((t[(0, 3)], t[(1, 3)], t[(2, 3)]), (x, y, z));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stance_pose_roundtrip(x in -60.0..60.0f64, y in -60.0..60.0f64, dz in -40.0..40.0f64,
                             a in -0.1..0.1f64, b in -0.08..0.08f64, c in -0.08..0.08f64) {
        let d = LegDimensions::new(150.0, 425.0, 425.0).unwrap();
        let stance = default_stance(&d, 400.0).unwrap();
        let pose = BodyPose::new(x, y, stance.initial.z + dz, a, b, c);
        let q = stance_inverse(&pose, &stance.feet, &stance.geometry, &d).unwrap();
        let back = stance_forward(&q, &stance.feet, &stance.geometry, &d).unwrap();
        prop_assert!(pose.max_abs_diff(&back) < 1e-9, "{pose:?} vs {back:?}");
    }

    #[test]
    fn cloud_prefix_is_stable(n in 1usize..200_000, seed in any::<u64>()) {
        let d = LegDimensions::new(200.0, 400.0, 400.0).unwrap();
        let limits = JointLimits::table2();
        let short = monte_carlo_cloud(&d, &limits, n.min(70_000), seed).unwrap();
        let long = monte_carlo_cloud(&d, &limits, n.min(70_000) + 10, seed).unwrap();
        prop_assert_eq!(&short.angles[..], &long.angles[..short.len()]);
        prop_assert!(short.angles.iter().all(|q| limits.contains(q)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn poses_before_the_limit_are_feasible(dir in 0usize..12, r3 in 0.3..0.5f64) {
        let d = LegDimensions::from_ratios(1000.0, 0.1, r3).unwrap();
        let stance = default_stance(&d, 400.0).unwrap();
        let direction = Direction::all()[dir];
        let step = if direction.axis.is_rotation() { 0.01 } else { 0.1 };
        let e = directional_limit(&stance, direction, step).unwrap();
        for k in 0..=50 {
            let pose = displaced(&stance.initial, direction.axis, e * k as f64 / 50.0);
            prop_assert!(pose_feasible(&stance, &pose).is_feasible(), "{direction:?} at {k}/50 of {e}");
        }
    }

    #[test]
    fn tighter_limits_never_widen_the_range(dir in 0usize..12, shrink in 0.5..1.0f64) {
        let d = LegDimensions::new(100.0, 500.0, 400.0).unwrap();
        let stance = default_stance(&d, 400.0).unwrap();
        let mut tight = stance.limits;
        let scale = |i: Interval| Interval::new(i.min() * shrink, i.max() * shrink).unwrap();
        tight.root = scale(tight.root);
        tight.hip = scale(tight.hip);
        let tight = stance.with_limits(tight).unwrap();
        let direction = Direction::all()[dir];
        let step = if direction.axis.is_rotation() { 0.01 } else { 0.1 };
        let wide = directional_limit(&stance, direction, step).unwrap();
        let narrow = directional_limit(&tight, direction, step).unwrap();
        prop_assert!(narrow.abs() <= wide.abs() + step, "{direction:?}: {narrow} vs {wide}");
    }
}

#[test]
fn symmetric_axes_have_mirrored_limits() {
    let d = LegDimensions::new(100.0, 450.0, 450.0).unwrap();
    let stance = default_stance(&d, 400.0).unwrap();
    for axis in [Axis::X, Axis::Y, Axis::Roll, Axis::Pitch, Axis::Yaw] {
        let step = if axis.is_rotation() { 0.001 } else { 0.01 };
        let plus = directional_limit(&stance, Direction::plus(axis), step).unwrap();
        let minus = directional_limit(&stance, Direction::minus(axis), step).unwrap();
        assert!(
            (plus + minus).abs() <= 2.0 * step,
            "{axis:?}: {plus} vs {minus}"
        );
    }
}
