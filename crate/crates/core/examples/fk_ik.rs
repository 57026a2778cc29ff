//! Forward and inverse kinematics of a single leg, plus the DH chain behind them.
//!
//! cargo run --example fk_ik

use hexleg::{
    dh_link_transform, forward_kinematics, inverse_kinematics, mobility_dof, JointAngles,
    LegDimensions, MobilityParams,
};

fn main() -> hexleg::error::Result<()> {
    let dims = LegDimensions::new(200.0, 400.0, 400.0)?;

    let neutral = JointAngles::from_degrees(0.0, 0.0, -90.0);
    let foot = forward_kinematics(&neutral, &dims);
    println!(
        "neutral stance foot: ({:.3}, {:.3}, {:.3}) mm",
        foot.x, foot.y, foot.z
    );

    for link in 1..=3 {
        let t = dh_link_transform(link, &neutral, &dims)?;
        println!(
            "A{link} translation: ({:.1}, {:.1}, {:.1})",
            t[(0, 3)],
            t[(1, 3)],
            t[(2, 3)]
        );
    }

    let q = JointAngles::from_degrees(25.0, 15.0, -70.0);
    let p = forward_kinematics(&q, &dims);
    let back = inverse_kinematics(&p, &dims)?;
    let deg = |q: &JointAngles| q.to_degrees().map(|a| format!("{a:.3}")).join(", ");
    println!(
        "({}) deg -> ({:.2}, {:.2}, {:.2}) mm -> ({}) deg",
        deg(&q),
        p.x,
        p.y,
        p.z,
        deg(&back)
    );
    println!("roundtrip error {:.2e} rad", q.max_abs_diff(&back));

    let far = hexleg::FootPoint::leg_root(1200.0, 0.0, 0.0);
    match inverse_kinematics(&far, &dims) {
        Ok(q) => println!("unexpected solution {q:?}"),
        Err(e) => println!("(1200, 0, 0): {e}"),
    }

    for n in [3, 6] {
        println!(
            "mobility with {n} stance legs: {}",
            mobility_dof(&MobilityParams::for_stance_legs(n))?
        );
    }
    Ok(())
}
