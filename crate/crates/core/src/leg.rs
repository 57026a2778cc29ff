//! Swing-phase model of a single 3-DOF leg: Denavit-Hartenberg links,
//! closed-form forward and inverse kinematics, and the mobility count of
//! the stance mechanism.
//!
//! Joint frames follow the standard DH convention. Link 1 (coxa) rotates
//! about the vertical root axis and carries a +90 degree twist so that the
//! hip and knee axes are horizontal; links 2 (femur) and 3 (tibia) are
//! planar. Lengths are millimetres, angles radians.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};

use nalgebra::{Matrix4, Vector3};

use crate::error::{Error, Result};

/// Slack allowed on inverse-trig arguments before a point counts as unreachable.
pub const REACH_TOLERANCE: f64 = 1e-12;

/// Slack used when testing whether an angle sits inside a joint interval.
pub const LIMIT_TOLERANCE: f64 = 1e-12;

/// Segment lengths of one leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegDimensions {
    coxa: f64,
    femur: f64,
    tibia: f64,
}

impl LegDimensions {
    pub fn new(coxa: f64, femur: f64, tibia: f64) -> Result<Self> {
        for (name, v) in [("coxa", coxa), ("femur", femur), ("tibia", tibia)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(format!(
                    "{name} length must be positive, got {v}"
                )));
            }
        }
        Ok(Self { coxa, femur, tibia })
    }

    /// Splits `total` by coxa ratio `r1` and tibia ratio `r3`; the femur takes the remainder.
    pub fn from_ratios(total: f64, r1: f64, r3: f64) -> Result<Self> {
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::param(format!(
                "total length must be positive, got {total}"
            )));
        }
        if !(r1 > 0.0 && r3 > 0.0 && r1 + r3 < 1.0) {
            return Err(Error::param(format!(
                "ratios need r1 > 0, r3 > 0 and r1 + r3 < 1, got r1={r1} r3={r3}"
            )));
        }
        let coxa = total * r1;
        let tibia = total * r3;
        Self::new(coxa, total - coxa - tibia, tibia)
    }

    pub fn coxa(&self) -> f64 {
        self.coxa
    }

    pub fn femur(&self) -> f64 {
        self.femur
    }

    pub fn tibia(&self) -> f64 {
        self.tibia
    }

    pub fn total(&self) -> f64 {
        self.coxa + self.femur + self.tibia
    }

    pub fn coxa_ratio(&self) -> f64 {
        self.coxa / self.total()
    }

    pub fn tibia_ratio(&self) -> f64 {
        self.tibia / self.total()
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(self.coxa * k, self.femur * k, self.tibia * k)
    }
}

/// Root, hip and knee joint angles.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JointAngles {
    pub root: f64,
    pub hip: f64,
    pub knee: f64,
}

impl JointAngles {
    pub const fn new(root: f64, hip: f64, knee: f64) -> Self {
        Self { root, hip, knee }
    }

    pub fn from_degrees(root: f64, hip: f64, knee: f64) -> Self {
        Self::new(root.to_radians(), hip.to_radians(), knee.to_radians())
    }

    /// Standing pose used for the default stance: coxa and femur horizontal,
    /// tibia pointing straight down.
    pub const fn neutral() -> Self {
        Self::new(0.0, 0.0, -FRAC_PI_2)
    }

    pub fn to_degrees(&self) -> [f64; 3] {
        [
            self.root.to_degrees(),
            self.hip.to_degrees(),
            self.knee.to_degrees(),
        ]
    }

    pub fn max_abs_diff(&self, other: &JointAngles) -> f64 {
        (self.root - other.root)
            .abs()
            .max((self.hip - other.hip).abs())
            .max((self.knee - other.knee).abs())
    }
}

/// Closed interval `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    min: f64,
    max: f64,
}

impl Interval {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || min > max {
            return Err(Error::param(format!(
                "empty or non-finite interval [{min}, {max}]"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn point(v: f64) -> Self {
        Self { min: v, max: v }
    }

    pub fn degrees(min: f64, max: f64) -> Result<Self> {
        Self::new(min.to_radians(), max.to_radians())
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min - LIMIT_TOLERANCE && v <= self.max + LIMIT_TOLERANCE
    }

    /// `count` equally spaced values including both endpoints.
    pub fn linspace(&self, count: usize) -> Vec<f64> {
        match count {
            0 => Vec::new(),
            1 => vec![self.min],
            _ => {
                let last = (count - 1) as f64;
                (0..count)
                    .map(|i| {
                        if i == count - 1 {
                            self.max
                        } else {
                            self.min + self.width() * i as f64 / last
                        }
                    })
                    .collect()
            }
        }
    }

    pub(crate) fn lerp(&self, t: f64) -> f64 {
        self.min + self.width() * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitMode {
    /// Each joint moves inside its own interval.
    Independent,
    /// The knee interval follows the hip: `[-hip - pi/2, 0]`, keeping the
    /// tibia at least 90 degrees from the horizontal.
    ImprovedCoupled,
}

/// Admissible joint ranges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointLimits {
    pub root: Interval,
    pub hip: Interval,
    /// Static knee interval. Ignored in favour of [`JointLimits::knee_range`]
    /// when the mode is coupled.
    pub knee: Interval,
    pub mode: LimitMode,
}

impl JointLimits {
    pub fn independent(root: Interval, hip: Interval, knee: Interval) -> Self {
        Self {
            root,
            hip,
            knee,
            mode: LimitMode::Independent,
        }
    }

    /// Nominal swing-phase ranges used for the Monte Carlo workspace.
    pub fn table2() -> Self {
        Self::independent(
            Interval {
                min: -FRAC_PI_4,
                max: FRAC_PI_4,
            },
            Interval {
                min: -FRAC_PI_3,
                max: FRAC_PI_3,
            },
            Interval {
                min: -3.0 * FRAC_PI_4,
                max: 0.0,
            },
        )
    }

    /// Hip range of [`JointLimits::table2`] with the knee coupled to the hip.
    pub fn improved() -> Self {
        Self {
            root: Interval {
                min: -FRAC_PI_4,
                max: FRAC_PI_4,
            },
            hip: Interval {
                min: -FRAC_PI_3,
                max: FRAC_PI_3,
            },
            knee: Interval {
                min: -5.0 * FRAC_PI_6,
                max: 0.0,
            },
            mode: LimitMode::ImprovedCoupled,
        }
    }

    /// Box used for manipulability: hip in [-60, 60] deg, knee in [-135, -15] deg.
    pub fn manipulability_box() -> Self {
        Self::independent(
            Interval {
                min: -FRAC_PI_4,
                max: FRAC_PI_4,
            },
            Interval {
                min: -FRAC_PI_3,
                max: FRAC_PI_3,
            },
            Interval {
                min: -3.0 * FRAC_PI_4,
                max: -PI / 12.0,
            },
        )
    }

    /// Stance-phase limits used for the body flexibility experiment.
    pub fn flexibility() -> Self {
        Self::independent(
            Interval {
                min: -FRAC_PI_4,
                max: FRAC_PI_4,
            },
            Interval {
                min: -FRAC_PI_6,
                max: FRAC_PI_6,
            },
            Interval {
                min: -3.0 * FRAC_PI_4,
                max: -PI / 12.0,
            },
        )
    }

    /// Limits collapsed onto a single configuration.
    pub fn fixed(angles: JointAngles) -> Self {
        Self::independent(
            Interval::point(angles.root),
            Interval::point(angles.hip),
            Interval::point(angles.knee),
        )
    }

    /// Knee interval in force for a given hip angle.
    pub fn knee_range(&self, hip: f64) -> Interval {
        match self.mode {
            LimitMode::Independent => self.knee,
            LimitMode::ImprovedCoupled => Interval {
                min: -hip - FRAC_PI_2,
                max: 0.0,
            },
        }
    }

    pub fn contains(&self, q: &JointAngles) -> bool {
        self.root.contains(q.root)
            && self.hip.contains(q.hip)
            && self.knee_range(q.hip).contains(q.knee)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    LegRoot,
    Body,
    World,
}

/// Cartesian foot-tip position tagged with the frame it is expressed in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FootPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub frame: Frame,
}

impl FootPoint {
    pub const fn new(x: f64, y: f64, z: f64, frame: Frame) -> Self {
        Self { x, y, z, frame }
    }

    pub const fn leg_root(x: f64, y: f64, z: f64) -> Self {
        Self::new(x, y, z, Frame::LegRoot)
    }

    pub const fn world(x: f64, y: f64, z: f64) -> Self {
        Self::new(x, y, z, Frame::World)
    }

    pub fn from_vector(v: &Vector3<f64>, frame: Frame) -> Self {
        Self::new(v.x, v.y, v.z, frame)
    }

    pub fn to_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn distance(&self, other: &FootPoint) -> f64 {
        (self.to_vector() - other.to_vector()).norm()
    }

    pub fn expect_frame(&self, expected: Frame) -> Result<()> {
        if self.frame == expected {
            Ok(())
        } else {
            Err(Error::FrameMismatch {
                expected,
                found: self.frame,
            })
        }
    }
}

fn dh_matrix(theta: f64, cos_twist: f64, sin_twist: f64, length: f64) -> Matrix4<f64> {
    let (s, c) = theta.sin_cos();
    #[rustfmt::skip]
    let m = Matrix4::new(
        c, -s * cos_twist,  s * sin_twist, length * c,
        s,  c * cos_twist, -c * sin_twist, length * s,
        0.0,     sin_twist,      cos_twist, 0.0,
        0.0,           0.0,            0.0, 1.0,
    );
    m
}

/// Homogeneous transform from frame `link - 1` to frame `link` (`link` in 1..=3).
pub fn dh_link_transform(
    link: usize,
    angles: &JointAngles,
    dims: &LegDimensions,
) -> Result<Matrix4<f64>> {
    // Twist cosines/sines are written exactly so link 1 has clean 0/1 entries.
    match link {
        1 => Ok(dh_matrix(angles.root, 0.0, 1.0, dims.coxa)),
        2 => Ok(dh_matrix(angles.hip, 1.0, 0.0, dims.femur)),
        3 => Ok(dh_matrix(angles.knee, 1.0, 0.0, dims.tibia)),
        _ => Err(Error::param(format!(
            "link index must be 1, 2 or 3, got {link}"
        ))),
    }
}

/// Foot frame pose in the leg-root frame, as the product of the three link transforms.
pub fn foot_transform(angles: &JointAngles, dims: &LegDimensions) -> Matrix4<f64> {
    (1..=3)
        .map(|i| dh_link_transform(i, angles, dims).expect("link index in range"))
        .fold(Matrix4::identity(), |acc, t| acc * t)
}

/// Horizontal distance from the root axis to the foot, signed along the coxa.
fn radial_reach(angles: &JointAngles, dims: &LegDimensions) -> f64 {
    dims.tibia * (angles.hip + angles.knee).cos() + dims.femur * angles.hip.cos() + dims.coxa
}

/// Closed-form foot position in the leg-root frame.
pub fn forward_kinematics(angles: &JointAngles, dims: &LegDimensions) -> FootPoint {
    let reach = radial_reach(angles, dims);
    let (s1, c1) = angles.root.sin_cos();
    let z = dims.tibia * (angles.hip + angles.knee).sin() + dims.femur * angles.hip.sin();
    FootPoint::leg_root(c1 * reach, s1 * reach, z)
}

fn unit_argument(bound: &'static str, value: f64) -> Result<f64> {
    if value.abs() <= 1.0 {
        Ok(value)
    } else if value.abs() <= 1.0 + REACH_TOLERANCE {
        Ok(value.signum())
    } else {
        Err(Error::Unreachable { bound, value })
    }
}

/// Knee-down inverse kinematics.
///
/// Returns the single branch with `root` in [-pi/2, pi/2] and `knee` in
/// [-pi, 0]. The hip elevation uses `atan2` on the hip-to-foot vector, which
/// equals the `arcsin` form whenever the foot is radially beyond the hip and
/// stays correct when it is tucked under it.
pub fn inverse_kinematics(p: &FootPoint, dims: &LegDimensions) -> Result<JointAngles> {
    p.expect_frame(Frame::LegRoot)?;
    let radial = p.x.hypot(p.y);
    if radial == 0.0 {
        return Err(Error::SingularAzimuth);
    }
    if p.x < 0.0 {
        return Err(Error::Unreachable {
            bound: "arctan",
            value: p.y.atan2(p.x),
        });
    }
    let root = p.y.atan2(p.x);

    let (l1, l2, l3) = (dims.coxa, dims.femur, dims.tibia);
    let tau = p.x * p.x + p.y * p.y + p.z * p.z - 2.0 * l1 * radial;
    let reach_sq = tau + l1 * l1;
    if reach_sq <= 0.0 {
        return Err(Error::Unreachable {
            bound: "arcsin",
            value: f64::INFINITY,
        });
    }
    let reach = reach_sq.sqrt();

    let knee_cos = unit_argument(
        "arccos(knee)",
        (reach_sq - l2 * l2 - l3 * l3) / (2.0 * l2 * l3),
    )?;
    let hip_cos = unit_argument(
        "arccos(hip)",
        (reach_sq + l2 * l2 - l3 * l3) / (2.0 * l2 * reach),
    )?;
    unit_argument("arcsin(hip)", p.z / reach)?;

    let elevation = p.z.atan2(radial - l1);
    Ok(JointAngles::new(
        root,
        elevation + hip_cos.acos(),
        -knee_cos.acos(),
    ))
}

/// Structural parameters of the stance mechanism's mobility count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MobilityParams {
    /// Number of legs on the ground.
    pub stance_legs: usize,
    /// Kinematic pairs: three revolute joints and one spherical foot contact per leg.
    pub pairs: usize,
    /// Sum of the pair freedoms.
    pub pair_freedoms: i64,
    /// Independent closed loops.
    pub loops: usize,
    /// Constraints per loop.
    pub loop_constraints: i64,
    pub redundant_freedoms: i64,
    pub passive_freedoms: i64,
    pub redundant_constraints: i64,
}

impl MobilityParams {
    pub fn for_stance_legs(stance_legs: usize) -> Self {
        let n = stance_legs as i64;
        Self {
            stance_legs,
            pairs: 4 * stance_legs,
            pair_freedoms: 3 * n + 3 * n,
            loops: stance_legs.saturating_sub(1),
            loop_constraints: 6,
            redundant_freedoms: 0,
            passive_freedoms: 0,
            redundant_constraints: 0,
        }
    }
}

/// Degrees of freedom of the body-legs-ground mechanism.
pub fn mobility_dof(params: &MobilityParams) -> Result<i64> {
    if params.stance_legs == 0 {
        return Err(Error::param("at least one stance leg is required"));
    }
    Ok(params.pair_freedoms
        - params.loops as i64 * params.loop_constraints
        - params.redundant_freedoms
        - params.passive_freedoms
        + params.redundant_constraints)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims() -> LegDimensions {
        LegDimensions::new(200.0, 400.0, 400.0).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn link1_at_zero() {
        let t = dh_link_transform(1, &JointAngles::default(), &dims()).unwrap();
        let expected = Matrix4::new(
            1.0, 0.0, 0.0, 200.0, 0.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0,
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn link2_quarter_turn() {
        let t = dh_link_transform(2, &JointAngles::new(0.0, FRAC_PI_2, 0.0), &dims()).unwrap();
        assert!(close(t[(0, 3)], 0.0, 1e-12));
        assert!(close(t[(1, 3)], 400.0, 1e-12));
        assert!(close(t[(0, 1)], -1.0, 1e-12));
        assert!(close(t[(1, 0)], 1.0, 1e-12));
        assert_eq!(t[(2, 2)], 1.0);
    }

    #[test]
    fn link3_folded() {
        let t = dh_link_transform(3, &JointAngles::new(0.0, 0.0, -FRAC_PI_2), &dims()).unwrap();
        assert!(close(t[(0, 3)], 0.0, 1e-12));
        assert!(close(t[(1, 3)], -400.0, 1e-12));
    }

    #[test]
    fn bad_link_index() {
        assert!(matches!(
            dh_link_transform(4, &JointAngles::default(), &dims()),
            Err(Error::Parameter(_))
        ));
        assert!(dh_link_transform(0, &JointAngles::default(), &dims()).is_err());
    }

    #[test]
    fn fk_examples() {
        let p = forward_kinematics(&JointAngles::default(), &dims());
        assert_eq!((p.x, p.y, p.z), (1000.0, 0.0, 0.0));

        let p = forward_kinematics(&JointAngles::neutral(), &dims());
        assert!(close(p.x, 600.0, 1e-9) && close(p.y, 0.0, 1e-12) && close(p.z, -400.0, 1e-9));

        let p = forward_kinematics(&JointAngles::new(FRAC_PI_4, 0.0, 0.0), &dims());
        assert!(close(p.x, 707.1068, 1e-4) && close(p.y, 707.1068, 1e-4) && p.z == 0.0);
    }

    #[test]
    fn fk_matches_product_form() {
        let q = JointAngles::new(0.3, -0.7, -1.9);
        let p = forward_kinematics(&q, &dims());
        let t = foot_transform(&q, &dims());
        assert!(close(p.x, t[(0, 3)], 1e-12));
        assert!(close(p.y, t[(1, 3)], 1e-12));
        assert!(close(p.z, t[(2, 3)], 1e-12));
    }

    #[test]
    fn ik_examples() {
        let q = inverse_kinematics(&FootPoint::leg_root(600.0, 0.0, -400.0), &dims()).unwrap();
        assert!(q.max_abs_diff(&JointAngles::neutral()) < 1e-12);

        let q = inverse_kinematics(&FootPoint::leg_root(1000.0, 0.0, 0.0), &dims()).unwrap();
        assert!(q.max_abs_diff(&JointAngles::default()) < 1e-9);
    }

    #[test]
    fn ik_beyond_reach() {
        let err = inverse_kinematics(&FootPoint::leg_root(2000.0, 0.0, 0.0), &dims()).unwrap_err();
        assert!(
            matches!(
                err,
                Error::Unreachable {
                    bound: "arccos(knee)",
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn ik_singular_azimuth() {
        assert_eq!(
            inverse_kinematics(&FootPoint::leg_root(0.0, 0.0, -500.0), &dims()),
            Err(Error::SingularAzimuth)
        );
    }

    #[test]
    fn ik_rejects_wrong_frame() {
        assert!(matches!(
            inverse_kinematics(&FootPoint::world(600.0, 0.0, -400.0), &dims()),
            Err(Error::FrameMismatch { .. })
        ));
    }

    #[test]
    fn ik_foot_tucked_under_hip() {
        // Radial distance below the coxa length: asin form would pick the wrong quadrant.
        let q = JointAngles::new(0.1, -0.5, -2.9);
        let p = forward_kinematics(&q, &dims());
        assert!(p.x.hypot(p.y) < 200.0);
        let back = inverse_kinematics(&p, &dims()).unwrap();
        assert!(back.max_abs_diff(&q) < 1e-9);
    }

    #[test]
    fn mobility_is_six() {
        for n in 1..=6 {
            assert_eq!(
                mobility_dof(&MobilityParams::for_stance_legs(n)).unwrap(),
                6
            );
        }
        assert!(mobility_dof(&MobilityParams::for_stance_legs(0)).is_err());
    }

    #[test]
    fn dimension_validation() {
        assert!(LegDimensions::new(0.0, 400.0, 400.0).is_err());
        assert!(LegDimensions::new(200.0, f64::NAN, 400.0).is_err());
        let d = LegDimensions::from_ratios(1000.0, 0.05, 0.475).unwrap();
        assert!(close(d.femur(), 475.0, 1e-9));
        assert!(LegDimensions::from_ratios(1000.0, 0.6, 0.4).is_err());
    }

    #[test]
    fn coupled_knee_range() {
        let lim = JointLimits::improved();
        let r = lim.knee_range(FRAC_PI_3);
        assert!(close(r.min(), -5.0 * PI / 6.0, 1e-15) && r.max() == 0.0);
        assert!(!lim.contains(&JointAngles::new(0.0, 0.0, -1.7)));
        assert!(lim.contains(&JointAngles::new(0.0, 0.0, -1.5)));
    }

    #[test]
    fn linspace_endpoints() {
        let v = Interval::degrees(-60.0, 60.0).unwrap().linspace(121);
        assert_eq!(v.len(), 121);
        assert!(close(v[0], -FRAC_PI_3, 1e-15));
        assert_eq!(v[120], 60f64.to_radians());
        assert!(close(v[60], 0.0, 1e-15));
    }
}
