//! Kinematic design metrics for a 3-DOF hexapod leg.
//!
//! The leg (coxa, femur, tibia on root, hip and knee joints) is modelled
//! with Denavit-Hartenberg frames. On top of the kinematics the crate
//! computes three performance measures and sweeps segment-length ratios for
//! each:
//!
//! * [`workspace`]: Monte Carlo foot cloud and the area of the improved
//!   planar workspace, in closed form and by rasterization.
//! * [`manipulability`]: Jacobian determinant, its constrained maximum and
//!   its grid average.
//! * [`flexibility`]: the body's limit displacements on six fixed footholds
//!   and the resulting flexibility index.
//!
//! [`harness`] turns these into reproducible CSV/SVG experiments; the
//! `hexleg` binary is a thin command-line front end over it.

pub mod error;
pub mod flexibility;
pub mod harness;
pub mod leg;
pub mod manipulability;
pub mod pose;
pub mod stance;
pub mod workspace;

pub use error::{Error, Result};
pub use leg::{
    dh_link_transform, forward_kinematics, inverse_kinematics, mobility_dof, FootPoint, Frame,
    Interval, JointAngles, JointLimits, LegDimensions, LimitMode, MobilityParams,
};
pub use pose::{body_pose_matrix, BodyGeometry, BodyPose};
pub use stance::{stance_forward, stance_inverse, StanceFoot};
