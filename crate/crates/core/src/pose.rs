//! Body pose and body-to-leg mounting geometry.

use std::f64::consts::PI;

use nalgebra::{Isometry3, Matrix4, Point3, Rotation3, Translation3, UnitQuaternion, Vector3};

use crate::error::{Error, Result};

/// Pose of the body centre in the world frame.
///
/// The rotation is `Rz(alpha) * Ry(beta) * Rx(gamma)`: `alpha` turns about
/// the vertical (yaw), `beta` about y (pitch), `gamma` about x (roll).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyPose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl BodyPose {
    pub const fn new(x: f64, y: f64, z: f64, alpha: f64, beta: f64, gamma: f64) -> Self {
        Self {
            x,
            y,
            z,
            alpha,
            beta,
            gamma,
        }
    }

    pub const fn translation(x: f64, y: f64, z: f64) -> Self {
        Self::new(x, y, z, 0.0, 0.0, 0.0)
    }

    pub fn rotation(&self) -> Rotation3<f64> {
        Rotation3::from_euler_angles(self.gamma, self.beta, self.alpha)
    }

    pub fn isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(
            Translation3::new(self.x, self.y, self.z),
            UnitQuaternion::from_rotation_matrix(&self.rotation()),
        )
    }

    /// Recovers the six parameters from a rigid transform.
    pub fn from_rotation_translation(r: &Rotation3<f64>, t: &Vector3<f64>) -> Self {
        let (gamma, beta, alpha) = r.euler_angles();
        Self::new(t.x, t.y, t.z, alpha, beta, gamma)
    }

    pub fn max_abs_diff(&self, other: &BodyPose) -> f64 {
        [
            self.x - other.x,
            self.y - other.y,
            self.z - other.z,
            self.alpha - other.alpha,
            self.beta - other.beta,
            self.gamma - other.gamma,
        ]
        .iter()
        .fold(0.0_f64, |m, d| m.max(d.abs()))
    }
}

/// 4x4 homogeneous transform of the body frame.
pub fn body_pose_matrix(pose: &BodyPose) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m.fixed_view_mut::<3, 3>(0, 0)
        .copy_from(pose.rotation().matrix());
    m[(0, 3)] = pose.x;
    m[(1, 3)] = pose.y;
    m[(2, 3)] = pose.z;
    m
}

pub const LEG_COUNT: usize = 6;

/// Where the six leg roots sit on the body.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyGeometry {
    /// Body-centre frame to leg-root frame, one per leg.
    pub mounts: [Isometry3<f64>; LEG_COUNT],
    /// Half of the body's vertical thickness, used for ground contact.
    pub half_height: f64,
}

impl BodyGeometry {
    /// Regular hexagon: leg `i` mounted at azimuth `60 deg * i`, root x-axis pointing outward.
    pub fn hexagon(radius: f64, half_height: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::param(format!(
                "body radius must be positive, got {radius}"
            )));
        }
        if !(half_height.is_finite() && half_height >= 0.0) {
            return Err(Error::param(format!(
                "half height must be non-negative, got {half_height}"
            )));
        }
        let mounts = std::array::from_fn(|i| {
            let phi = i as f64 * PI / 3.0;
            Isometry3::new(
                Vector3::new(radius * phi.cos(), radius * phi.sin(), 0.0),
                Vector3::z() * phi,
            )
        });
        Ok(Self {
            mounts,
            half_height,
        })
    }

    pub fn mount(&self, leg: usize) -> Result<&Isometry3<f64>> {
        self.mounts
            .get(leg)
            .ok_or_else(|| Error::param(format!("leg index {leg} out of range 0..{LEG_COUNT}")))
    }

    /// Corners of the body prism in the body frame: each mount origin shifted by the half height.
    pub fn hull(&self) -> Vec<Point3<f64>> {
        self.mounts
            .iter()
            .flat_map(|m| {
                let c = m.translation.vector;
                [
                    Point3::new(c.x, c.y, c.z - self.half_height),
                    Point3::new(c.x, c.y, c.z + self.half_height),
                ]
            })
            .collect()
    }
}
