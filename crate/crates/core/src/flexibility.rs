//! Body flexibility of a six-leg stance.
//!
//! With all six feet pinned to the ground, the body is pushed along one pose
//! axis at a time until a leg loses its IK solution, a joint leaves its
//! limits, or the body touches the ground. The twelve signed extremes give
//! six displacement intervals, which are folded into a dimensionless index.

use std::fmt;

use crate::error::{Error, Result};
use crate::leg::{inverse_kinematics, JointAngles, JointLimits, LegDimensions};
use crate::pose::{BodyGeometry, BodyPose, LEG_COUNT};
use crate::stance::{foot_in_leg_frame, foot_in_world, StanceFoot};

/// Default hexagon circumradius (mm). Not a measured value; configurable.
pub const DEFAULT_BODY_RADIUS: f64 = 400.0;

/// Default half thickness of the body (mm). Not a measured value; configurable.
pub const DEFAULT_HALF_HEIGHT: f64 = 50.0;

/// Initial bracketing steps of the limit search.
pub const MARCH_STEP_MM: f64 = 1.0;
pub const MARCH_STEP_DEG: f64 = 0.1;

/// Everything needed to test a body pose against the fixed footholds.
#[derive(Debug, Clone, PartialEq)]
pub struct StanceConfiguration {
    pub geometry: BodyGeometry,
    pub dims: LegDimensions,
    pub limits: JointLimits,
    pub feet: Vec<StanceFoot>,
    pub initial: BodyPose,
}

impl StanceConfiguration {
    /// Builds a configuration and checks that the initial pose is feasible.
    pub fn new(
        geometry: BodyGeometry,
        dims: LegDimensions,
        limits: JointLimits,
        feet: Vec<StanceFoot>,
        initial: BodyPose,
    ) -> Result<Self> {
        let config = Self {
            geometry,
            dims,
            limits,
            feet,
            initial,
        };
        let check = pose_feasible(&config, &initial);
        if !check.is_feasible() {
            return Err(Error::Configuration(format!(
                "initial pose infeasible: {check}"
            )));
        }
        Ok(config)
    }

    pub fn with_limits(&self, limits: JointLimits) -> Result<Self> {
        Self::new(
            self.geometry.clone(),
            self.dims,
            limits,
            self.feet.clone(),
            self.initial,
        )
    }
}

/// Six-leg stance on a regular hexagon, every leg at its neutral angles and
/// the body centre one tibia length above flat ground.
pub fn default_stance(dims: &LegDimensions, body_radius: f64) -> Result<StanceConfiguration> {
    default_stance_with(
        dims,
        body_radius,
        DEFAULT_HALF_HEIGHT,
        JointLimits::flexibility(),
    )
}

pub fn default_stance_with(
    dims: &LegDimensions,
    body_radius: f64,
    half_height: f64,
    limits: JointLimits,
) -> Result<StanceConfiguration> {
    let geometry = BodyGeometry::hexagon(body_radius, half_height)?;
    let neutral = JointAngles::neutral();
    if !limits.contains(&neutral) {
        return Err(Error::Configuration(
            "neutral leg angles fall outside the joint limits".into(),
        ));
    }
    let initial = BodyPose::translation(0.0, 0.0, dims.tibia());
    let feet = (0..LEG_COUNT)
        .map(|leg| {
            Ok(StanceFoot {
                leg,
                point: foot_in_world(&initial, &geometry, leg, &neutral, dims)?,
            })
        })
        .collect::<Result<_>>()?;
    StanceConfiguration::new(geometry, *dims, limits, feet, initial)
}

#[derive(Debug, Clone, PartialEq)]
pub enum LegStatus {
    Within(JointAngles),
    OutOfLimits(JointAngles),
    Unreachable(Error),
}

/// Outcome of [`pose_feasible`] with per-leg detail.
#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility {
    pub ground_collision: bool,
    pub legs: Vec<(usize, LegStatus)>,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        !self.ground_collision
            && self
                .legs
                .iter()
                .all(|(_, s)| matches!(s, LegStatus::Within(_)))
    }

    /// Legs that are unreachable or outside their joint limits.
    pub fn offending_legs(&self) -> Vec<usize> {
        self.legs
            .iter()
            .filter(|(_, s)| !matches!(s, LegStatus::Within(_)))
            .map(|(leg, _)| *leg)
            .collect()
    }
}

impl fmt::Display for Feasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_feasible() {
            return write!(f, "feasible");
        }
        let mut parts = Vec::new();
        if self.ground_collision {
            parts.push("body-ground collision".to_string());
        }
        for (leg, status) in &self.legs {
            match status {
                LegStatus::Within(_) => {}
                LegStatus::OutOfLimits(_) => parts.push(format!("leg {leg} joint limit")),
                LegStatus::Unreachable(_) => parts.push(format!("leg {leg} reach")),
            }
        }
        write!(f, "{}", parts.join(", "))
    }
}

/// Checks one body pose against leg reach, joint limits and ground clearance.
pub fn pose_feasible(config: &StanceConfiguration, pose: &BodyPose) -> Feasibility {
    let iso = pose.isometry();
    let ground_collision = config.geometry.hull().iter().any(|p| (iso * p).z <= 0.0);
    let legs = config
        .feet
        .iter()
        .map(|foot| {
            let status = match foot_in_leg_frame(pose, &config.geometry, foot.leg, &foot.point)
                .and_then(|local| inverse_kinematics(&local, &config.dims))
            {
                Ok(q) if config.limits.contains(&q) => LegStatus::Within(q),
                Ok(q) => LegStatus::OutOfLimits(q),
                Err(e) => LegStatus::Unreachable(e),
            };
            (foot.leg, status)
        })
        .collect();
    Feasibility {
        ground_collision,
        legs,
    }
}

fn feasible(config: &StanceConfiguration, pose: &BodyPose) -> bool {
    // Cheaper than building the full report: stop at the first failure.
    let iso = pose.isometry();
    if config.geometry.hull().iter().any(|p| (iso * p).z <= 0.0) {
        return false;
    }
    config.feet.iter().all(|foot| {
        foot_in_leg_frame(pose, &config.geometry, foot.leg, &foot.point)
            .and_then(|local| inverse_kinematics(&local, &config.dims))
            .is_ok_and(|q| config.limits.contains(&q))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
    Roll,
    Pitch,
    Yaw,
}

impl Axis {
    pub const ALL: [Axis; 6] = [
        Axis::X,
        Axis::Y,
        Axis::Z,
        Axis::Roll,
        Axis::Pitch,
        Axis::Yaw,
    ];

    pub fn is_rotation(self) -> bool {
        matches!(self, Axis::Roll | Axis::Pitch | Axis::Yaw)
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
            Axis::Roll => "Roll",
            Axis::Pitch => "Pitch",
            Axis::Yaw => "Yaw",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Direction {
    pub axis: Axis,
    pub positive: bool,
}

impl Direction {
    pub const fn plus(axis: Axis) -> Self {
        Self {
            axis,
            positive: true,
        }
    }

    pub const fn minus(axis: Axis) -> Self {
        Self {
            axis,
            positive: false,
        }
    }

    /// All twelve directions: `+X, -X, +Y, -Y, ..., +Yaw, -Yaw`.
    pub fn all() -> [Direction; 12] {
        std::array::from_fn(|i| Direction {
            axis: Axis::ALL[i / 2],
            positive: i % 2 == 0,
        })
    }

    fn sign(self) -> f64 {
        if self.positive {
            1.0
        } else {
            -1.0
        }
    }
}

/// Pose displaced from `base` along one axis. Translations in mm, rotations in degrees.
pub fn displaced(base: &BodyPose, axis: Axis, amount: f64) -> BodyPose {
    let mut p = *base;
    match axis {
        Axis::X => p.x += amount,
        Axis::Y => p.y += amount,
        Axis::Z => p.z += amount,
        Axis::Roll => p.gamma += amount.to_radians(),
        Axis::Pitch => p.beta += amount.to_radians(),
        Axis::Yaw => p.alpha += amount.to_radians(),
    }
    p
}

/// Bisection resolution of the limit search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    pub translation_mm: f64,
    pub rotation_deg: f64,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            translation_mm: 0.01,
            rotation_deg: 0.001,
        }
    }
}

impl Resolution {
    pub fn for_axis(&self, axis: Axis) -> f64 {
        if axis.is_rotation() {
            self.rotation_deg
        } else {
            self.translation_mm
        }
    }
}

/// Signed extreme displacement along `direction` (mm or degrees).
///
/// Marches outward from the initial pose in steps of 1 mm / 0.1 degree and
/// stops at the first infeasible sample, so a feasible pocket beyond a
/// violation is never reached. The last feasible and first infeasible
/// samples are then bisected down to the resolution; the returned extreme
/// is always feasible.
pub fn directional_limit(
    config: &StanceConfiguration,
    direction: Direction,
    resolution: f64,
) -> Result<f64> {
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(Error::param(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    if !feasible(config, &config.initial) {
        return Err(Error::Configuration("initial pose infeasible".into()));
    }
    let axis = direction.axis;
    let sign = direction.sign();
    let (step, cap) = if axis.is_rotation() {
        (MARCH_STEP_DEG, 180.0)
    } else {
        (MARCH_STEP_MM, 10.0 * config.dims.total())
    };
    let ok = |d: f64| feasible(config, &displaced(&config.initial, axis, sign * d));

    let mut lo = 0.0;
    let mut hi = None;
    let mut k = 1u32;
    while lo < cap {
        let next = (k as f64 * step).min(cap);
        if !ok(next) {
            hi = Some(next);
            break;
        }
        lo = next;
        k += 1;
    }
    let Some(mut hi) = hi else {
        return Ok(sign * lo);
    };
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(sign * lo)
}

/// The twelve signed extremes, translations in mm and rotations in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionalLimits {
    extremes: [f64; 12],
}

impl DirectionalLimits {
    /// Extremes ordered as [`Direction::all`]. Positive-direction entries
    /// must be non-negative and negative-direction entries non-positive.
    pub fn from_extremes(extremes: [f64; 12]) -> Self {
        Self { extremes }
    }

    pub fn extremes(&self) -> &[f64; 12] {
        &self.extremes
    }

    pub fn extreme(&self, direction: Direction) -> f64 {
        self.extremes[2 * direction.axis.index() + usize::from(!direction.positive)]
    }

    /// Width of the displacement interval along `axis` (max minus min).
    pub fn interval(&self, axis: Axis) -> f64 {
        self.extreme(Direction::plus(axis)) - self.extreme(Direction::minus(axis))
    }

    /// Builds limits directly from the six interval widths, split symmetrically.
    pub fn from_intervals(s: [f64; 3], phi: [f64; 3]) -> Self {
        let widths = [s[0], s[1], s[2], phi[0], phi[1], phi[2]];
        Self {
            extremes: std::array::from_fn(|i| {
                let half = widths[i / 2] / 2.0;
                if i % 2 == 0 {
                    half
                } else {
                    -half
                }
            }),
        }
    }
}

/// Runs all twelve directional searches.
pub fn directional_limits(
    config: &StanceConfiguration,
    resolution: &Resolution,
) -> Result<DirectionalLimits> {
    let mut extremes = [0.0; 12];
    for (slot, dir) in extremes.iter_mut().zip(Direction::all()) {
        *slot = directional_limit(config, dir, resolution.for_axis(dir.axis))?;
    }
    Ok(DirectionalLimits { extremes })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlexibilityIndex {
    pub value: f64,
    pub leg_length: f64,
}

/// `FB = ((Sx + Sy + Sz) / (2L) + (phi_x + phi_y + phi_z) / 180) / 6`,
/// translations in mm and rotations in degrees.
pub fn flexibility_index(limits: &DirectionalLimits, leg_length: f64) -> Result<FlexibilityIndex> {
    if !(leg_length.is_finite() && leg_length > 0.0) {
        return Err(Error::param(format!(
            "leg length must be positive, got {leg_length}"
        )));
    }
    let mut translation = 0.0;
    let mut rotation = 0.0;
    for axis in Axis::ALL {
        let width = limits.interval(axis);
        if width < 0.0 {
            return Err(Error::param(format!(
                "negative {} interval {width}",
                axis.name()
            )));
        }
        if axis.is_rotation() {
            rotation += width;
        } else {
            translation += width;
        }
    }
    Ok(FlexibilityIndex {
        value: (translation / (2.0 * leg_length) + rotation / 180.0) / 6.0,
        leg_length,
    })
}

/// One cell of the flexibility sweep; `outcome` carries the reason when the
/// cell could not be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct FlexCell {
    pub r1: f64,
    pub r3: f64,
    pub outcome: std::result::Result<(FlexibilityIndex, DirectionalLimits), String>,
}

/// Flexibility index over a grid of coxa/tibia ratios, femur taking the
/// remainder of `total`, on the default hexagon stance.
pub fn flexibility_sweep(
    total: f64,
    r1_values: &[f64],
    r3_values: &[f64],
    body_radius: f64,
    half_height: f64,
    limits: &JointLimits,
    resolution: &Resolution,
) -> Result<Vec<FlexCell>> {
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::param(format!(
            "total length must be positive, got {total}"
        )));
    }
    let mut cells = Vec::with_capacity(r1_values.len() * r3_values.len());
    for &r1 in r1_values {
        for &r3 in r3_values {
            let outcome = LegDimensions::from_ratios(total, r1, r3)
                .and_then(|dims| default_stance_with(&dims, body_radius, half_height, *limits))
                .and_then(|config| {
                    let limits = directional_limits(&config, resolution)?;
                    Ok((flexibility_index(&limits, total)?, limits))
                })
                .map_err(|e| e.to_string());
            cells.push(FlexCell { r1, r3, outcome });
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stance() -> StanceConfiguration {
        default_stance(&LegDimensions::new(200.0, 400.0, 400.0).unwrap(), 400.0).unwrap()
    }

    #[test]
    fn default_feet_layout() {
        let c = stance();
        assert_eq!(c.initial.z, 400.0);
        for f in &c.feet {
            let p = f.point;
            assert!((p.x.hypot(p.y) - 1000.0).abs() < 1e-9);
            assert!(p.z.abs() < 1e-9);
        }
        // six-fold symmetry: leg i is leg 0 rotated by 60 deg * i
        let first = c.feet[0].point;
        for (i, f) in c.feet.iter().enumerate() {
            let phi = i as f64 * std::f64::consts::PI / 3.0;
            let (s, co) = phi.sin_cos();
            assert!((f.point.x - (co * first.x - s * first.y)).abs() < 1e-9);
            assert!((f.point.y - (s * first.x + co * first.y)).abs() < 1e-9);
        }
    }

    #[test]
    fn neutral_outside_limits_is_rejected() {
        let d = LegDimensions::new(200.0, 400.0, 400.0).unwrap();
        let err = default_stance_with(&d, 400.0, 50.0, JointLimits::fixed(JointAngles::default()))
            .unwrap_err();
        assert!(matches!(err, Error::Configuration(_)));
        assert!(default_stance(&d, 0.0).is_err());
    }

    #[test]
    fn feasibility_reasons() {
        let c = stance();
        assert!(pose_feasible(&c, &c.initial).is_feasible());

        let low = pose_feasible(&c, &BodyPose::translation(0.0, 0.0, 40.0));
        assert!(low.ground_collision && !low.is_feasible());

        let far = pose_feasible(&c, &BodyPose::translation(2000.0, 0.0, 400.0));
        assert!(!far.ground_collision);
        let legs = far.offending_legs();
        assert!(!legs.is_empty());
        assert!(far
            .legs
            .iter()
            .any(|(_, s)| matches!(s, LegStatus::Unreachable(_))));
        assert!(far.to_string().contains("reach"));
    }

    #[test]
    fn z_limits_have_expected_signs() {
        let c = stance();
        let up = directional_limit(&c, Direction::plus(Axis::Z), 0.01).unwrap();
        let down = directional_limit(&c, Direction::minus(Axis::Z), 0.01).unwrap();
        assert!(up > 0.0 && down < 0.0);
    }

    #[test]
    fn mirror_symmetric_limits() {
        let c = stance();
        for axis in [Axis::X, Axis::Yaw] {
            let res = Resolution::default().for_axis(axis);
            let plus = directional_limit(&c, Direction::plus(axis), res).unwrap();
            let minus = directional_limit(&c, Direction::minus(axis), res).unwrap();
            assert!(
                (plus + minus).abs() <= 2.0 * res,
                "{axis:?}: {plus} {minus}"
            );
        }
    }

    #[test]
    fn flexibility_index_arithmetic() {
        let zero = DirectionalLimits::from_intervals([0.0; 3], [0.0; 3]);
        assert_eq!(flexibility_index(&zero, 1000.0).unwrap().value, 0.0);
        let full = DirectionalLimits::from_intervals([2000.0; 3], [180.0; 3]);
        assert!((flexibility_index(&full, 1000.0).unwrap().value - 1.0).abs() < 1e-15);
        let quarter = DirectionalLimits::from_intervals([1000.0; 3], [0.0; 3]);
        assert!((flexibility_index(&quarter, 1000.0).unwrap().value - 0.25).abs() < 1e-15);
    }

    #[test]
    fn flexibility_index_rejects_bad_input() {
        let mut e = [0.0; 12];
        e[0] = -1.0;
        e[1] = 1.0;
        assert!(flexibility_index(&DirectionalLimits::from_extremes(e), 1000.0).is_err());
        let zero = DirectionalLimits::from_intervals([0.0; 3], [0.0; 3]);
        assert!(flexibility_index(&zero, 0.0).is_err());
    }

    #[test]
    fn collapsed_limits_give_zero_flexibility() {
        let c = stance()
            .with_limits(JointLimits::fixed(JointAngles::neutral()))
            .unwrap();
        let lim = directional_limits(&c, &Resolution::default()).unwrap();
        let fb = flexibility_index(&lim, 1000.0).unwrap();
        assert!(fb.value < 1e-4, "{}", fb.value);
    }

    #[test]
    fn direction_order() {
        let all = Direction::all();
        assert_eq!(all[0], Direction::plus(Axis::X));
        assert_eq!(all[1], Direction::minus(Axis::X));
        assert_eq!(all[11], Direction::minus(Axis::Yaw));
        let lim = DirectionalLimits::from_extremes(std::array::from_fn(|i| i as f64));
        assert_eq!(lim.extreme(Direction::minus(Axis::Pitch)), 9.0);
    }

    #[test]
    fn sweep_flags_bad_cells() {
        let cells = flexibility_sweep(
            1000.0,
            &[0.5],
            &[0.6],
            400.0,
            50.0,
            &JointLimits::flexibility(),
            &Resolution::default(),
        )
        .unwrap();
        assert!(cells[0].outcome.is_err());
    }
}
