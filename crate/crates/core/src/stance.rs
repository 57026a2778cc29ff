//! Stance-phase kinematics: the legs on the ground, the body and the ground
//! form a parallel mechanism. Going from body pose to joint angles is one
//! swing-phase IK per leg; going back is a rigid registration of the
//! body-frame foot positions onto the world foot anchors.

use nalgebra::{Matrix3, Point3, Vector3};

use crate::error::{Error, Result};
use crate::leg::{
    forward_kinematics, inverse_kinematics, FootPoint, Frame, JointAngles, LegDimensions,
};
use crate::pose::{BodyGeometry, BodyPose, LEG_COUNT};

/// Registration residual above which [`stance_forward`] rejects the data.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-6;

/// A foot anchor in the world frame, tagged with the leg it belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StanceFoot {
    pub leg: usize,
    pub point: FootPoint,
}

fn check_feet(feet: &[StanceFoot]) -> Result<()> {
    if feet.len() != 3 && feet.len() != LEG_COUNT {
        return Err(Error::param(format!(
            "stance needs 3 or 6 feet, got {}",
            feet.len()
        )));
    }
    let mut seen = [false; LEG_COUNT];
    for f in feet {
        if f.leg >= LEG_COUNT || seen[f.leg] {
            return Err(Error::param(format!(
                "invalid or repeated leg index {}",
                f.leg
            )));
        }
        seen[f.leg] = true;
        f.point.expect_frame(Frame::World)?;
    }
    Ok(())
}

/// Expresses a world-frame foot anchor in the root frame of `leg`.
pub fn foot_in_leg_frame(
    pose: &BodyPose,
    geometry: &BodyGeometry,
    leg: usize,
    foot: &FootPoint,
) -> Result<FootPoint> {
    foot.expect_frame(Frame::World)?;
    let root = pose.isometry() * geometry.mount(leg)?;
    let local = root.inverse_transform_point(&Point3::from(foot.to_vector()));
    Ok(FootPoint::leg_root(local.x, local.y, local.z))
}

/// World-frame foot position of `leg` for the given joint angles and body pose.
pub fn foot_in_world(
    pose: &BodyPose,
    geometry: &BodyGeometry,
    leg: usize,
    angles: &JointAngles,
    dims: &LegDimensions,
) -> Result<FootPoint> {
    let local = forward_kinematics(angles, dims);
    let root = pose.isometry() * geometry.mount(leg)?;
    let p = root * Point3::from(local.to_vector());
    Ok(FootPoint::world(p.x, p.y, p.z))
}

/// Joint angles of every stance leg for a body pose, in the order of `feet`.
pub fn stance_inverse(
    pose: &BodyPose,
    feet: &[StanceFoot],
    geometry: &BodyGeometry,
    dims: &LegDimensions,
) -> Result<Vec<JointAngles>> {
    check_feet(feet)?;
    feet.iter()
        .map(|f| {
            let local = foot_in_leg_frame(pose, geometry, f.leg, &f.point)?;
            inverse_kinematics(&local, dims).map_err(|e| e.on_leg(f.leg))
        })
        .collect()
}

/// Body pose recovered by registration, with its RMS residual (mm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Registration {
    pub pose: BodyPose,
    pub rms: f64,
}

/// Least-squares rigid registration (Kabsch) of body-frame foot positions
/// onto the world anchors. Never rejects on residual.
pub fn register_stance(
    angles: &[JointAngles],
    feet: &[StanceFoot],
    geometry: &BodyGeometry,
    dims: &LegDimensions,
) -> Result<Registration> {
    check_feet(feet)?;
    if angles.len() != feet.len() {
        return Err(Error::param(format!(
            "{} joint-angle sets for {} feet",
            angles.len(),
            feet.len()
        )));
    }
    let body: Vec<Vector3<f64>> = feet
        .iter()
        .zip(angles)
        .map(|(f, q)| {
            let local = forward_kinematics(q, dims).to_vector();
            Ok((geometry.mount(f.leg)? * Point3::from(local)).coords)
        })
        .collect::<Result<_>>()?;
    let world: Vec<Vector3<f64>> = feet.iter().map(|f| f.point.to_vector()).collect();

    let n = body.len() as f64;
    let body_c = body.iter().sum::<Vector3<f64>>() / n;
    let world_c = world.iter().sum::<Vector3<f64>>() / n;
    let h: Matrix3<f64> = body
        .iter()
        .zip(&world)
        .map(|(u, p)| (u - body_c) * (p - world_c).transpose())
        .sum();

    let svd = h.svd(true, true);
    let sv = svd.singular_values;
    let scale = sv.max();
    let rank = sv
        .iter()
        .filter(|s| **s > 1e-9 * scale.max(f64::MIN_POSITIVE))
        .count();
    if scale == 0.0 || rank < 2 {
        return Err(Error::Rank {
            rank: if scale == 0.0 { 0 } else { rank },
        });
    }
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let v = v_t.transpose();
    let d = (v * u.transpose()).determinant().signum();
    let r = v * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d)) * u.transpose();
    let t = world_c - r * body_c;

    let sq: f64 = body
        .iter()
        .zip(&world)
        .map(|(u, p)| (r * u + t - p).norm_squared())
        .sum();
    let rotation = nalgebra::Rotation3::from_matrix_unchecked(r);
    Ok(Registration {
        pose: BodyPose::from_rotation_translation(&rotation, &t),
        rms: (sq / n).sqrt(),
    })
}

/// Body pose from joint angles and foot anchors. Fails with
/// [`Error::Consistency`] when the data do not describe one rigid pose.
pub fn stance_forward(
    angles: &[JointAngles],
    feet: &[StanceFoot],
    geometry: &BodyGeometry,
    dims: &LegDimensions,
) -> Result<BodyPose> {
    let reg = register_stance(angles, feet, geometry, dims)?;
    if reg.rms > CONSISTENCY_TOLERANCE {
        return Err(Error::Consistency { rms: reg.rms });
    }
    Ok(reg.pose)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (BodyGeometry, LegDimensions, Vec<StanceFoot>) {
        let g = BodyGeometry::hexagon(400.0, 50.0).unwrap();
        let d = LegDimensions::new(200.0, 400.0, 400.0).unwrap();
        let start = BodyPose::translation(0.0, 0.0, 400.0);
        let feet = (0..6)
            .map(|leg| StanceFoot {
                leg,
                point: foot_in_world(&start, &g, leg, &JointAngles::neutral(), &d).unwrap(),
            })
            .collect();
        (g, d, feet)
    }

    #[test]
    fn neutral_stance_gives_neutral_angles() {
        let (g, d, feet) = setup();
        let angles =
            stance_inverse(&BodyPose::translation(0.0, 0.0, 400.0), &feet, &g, &d).unwrap();
        for q in angles {
            assert!(q.max_abs_diff(&JointAngles::neutral()) < 1e-9, "{q:?}");
        }
    }

    #[test]
    fn raising_body_keeps_root_angles() {
        let (g, d, feet) = setup();
        let base = stance_inverse(&BodyPose::translation(0.0, 0.0, 400.0), &feet, &g, &d).unwrap();
        let up = stance_inverse(&BodyPose::translation(0.0, 0.0, 410.0), &feet, &g, &d).unwrap();
        for (a, b) in base.iter().zip(&up) {
            assert!((a.root - b.root).abs() < 1e-12);
            assert!((a.hip - b.hip).abs() > 1e-4);
            assert!((a.knee - b.knee).abs() > 1e-4);
            // brute-force: same as solving each leg in isolation
            assert!(b.root.abs() < 1e-12);
        }
    }

    #[test]
    fn unreachable_pose_names_leg() {
        let (g, d, feet) = setup();
        let err =
            stance_inverse(&BodyPose::translation(0.0, 0.0, 10_000.0), &feet, &g, &d).unwrap_err();
        assert!(matches!(err, Error::Leg { leg: 0, .. }), "{err}");
    }

    #[test]
    fn forward_roundtrip() {
        let (g, d, feet) = setup();
        let pose = BodyPose::new(12.0, -7.0, 395.0, 0.05, -0.03, 0.02);
        let angles = stance_inverse(&pose, &feet, &g, &d).unwrap();
        let back = stance_forward(&angles, &feet, &g, &d).unwrap();
        assert!(back.max_abs_diff(&pose) < 1e-9, "{back:?}");

        let tripod: Vec<StanceFoot> = feet.iter().copied().step_by(2).collect();
        let tri_angles = stance_inverse(&pose, &tripod, &g, &d).unwrap();
        let back = stance_forward(&tri_angles, &tripod, &g, &d).unwrap();
        assert!(back.max_abs_diff(&pose) < 1e-9);
    }

    #[test]
    fn collinear_feet_rejected() {
        let (g, d, _) = setup();
        let feet: Vec<StanceFoot> = (0..3)
            .map(|i| StanceFoot {
                leg: i,
                point: FootPoint::world(100.0 * i as f64, 0.0, 0.0),
            })
            .collect();
        let angles = vec![JointAngles::neutral(); 3];
        assert!(matches!(
            register_stance(&angles, &feet, &g, &d),
            Err(Error::Rank { rank: 1 })
        ));
    }

    #[test]
    fn noisy_feet_report_residual() {
        let (g, d, mut feet) = setup();
        let pose = BodyPose::translation(0.0, 0.0, 400.0);
        let angles = stance_inverse(&pose, &feet, &g, &d).unwrap();
        feet[2].point.x += 1.0;
        let reg = register_stance(&angles, &feet, &g, &d).unwrap();
        assert!(reg.rms > 0.1 && reg.rms < 1.0);
        assert!(matches!(
            stance_forward(&angles, &feet, &g, &d),
            Err(Error::Consistency { .. })
        ));
    }

    #[test]
    fn feet_validation() {
        let (g, d, feet) = setup();
        let pose = BodyPose::translation(0.0, 0.0, 400.0);
        assert!(stance_inverse(&pose, &feet[..4], &g, &d).is_err());
        let mut dup = feet.clone();
        dup[1].leg = 0;
        assert!(stance_inverse(&pose, &dup, &g, &d).is_err());
        let mut wrong = feet.clone();
        wrong[0].point.frame = Frame::Body;
        assert!(matches!(
            stance_inverse(&pose, &wrong, &g, &d),
            Err(Error::FrameMismatch { .. })
        ));
    }
}
