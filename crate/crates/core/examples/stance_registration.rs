//! Body pose to joint angles and back: stance inverse kinematics followed by
//! Kabsch registration of the feet.
//!
//! cargo run --example stance_registration

use hexleg::flexibility::default_stance;
use hexleg::{stance_forward, stance_inverse, BodyPose, LegDimensions};

fn main() -> hexleg::error::Result<()> {
    let dims = LegDimensions::new(150.0, 425.0, 425.0)?;
    let stance = default_stance(&dims, 400.0)?;

    let pose = BodyPose::new(30.0, -20.0, 440.0, 0.08, -0.05, 0.03);
    let angles = stance_inverse(&pose, &stance.feet, &stance.geometry, &dims)?;
    for (foot, q) in stance.feet.iter().zip(&angles) {
        let [a, b, c] = q.to_degrees();
        println!("leg {}: ({a:7.2}, {b:7.2}, {c:7.2}) deg", foot.leg);
    }

    let recovered = stance_forward(&angles, &stance.feet, &stance.geometry, &dims)?;
    println!("recovered pose {recovered:?}");
    println!("max deviation {:.2e}", pose.max_abs_diff(&recovered));

    // A tripod is enough to pin the body.
    let tripod: Vec<_> = stance.feet.iter().step_by(2).copied().collect();
    let tripod_angles: Vec<_> = angles.iter().step_by(2).copied().collect();
    let again = stance_forward(&tripod_angles, &tripod, &stance.geometry, &dims)?;
    println!("tripod deviation {:.2e}", pose.max_abs_diff(&again));
    Ok(())
}
