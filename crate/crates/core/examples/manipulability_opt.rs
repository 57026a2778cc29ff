//! Maximum manipulability inside the joint box for the four equal-split legs.
//!
//! cargo run --release --example manipulability_opt

use hexleg::manipulability::{jacobian, manipulability, maximize_manipulability};
use hexleg::{JointAngles, JointLimits, LegDimensions};

fn main() -> hexleg::error::Result<()> {
    let bounds = JointLimits::manipulability_box();
    for l1 in [50.0, 100.0, 150.0, 200.0] {
        let l = (1000.0 - l1) / 2.0;
        let dims = LegDimensions::new(l1, l, l)?;
        let r = maximize_manipulability(&dims, &bounds)?;
        println!(
            "l = {l1}/{l}/{l}: theta2 {:8.4} deg, theta3 {:9.4} deg, w* {:.4e} mm3 ({} polish iterations)",
            r.hip.to_degrees(),
            r.knee.to_degrees(),
            r.w_star,
            r.iterations
        );
    }

    let dims = LegDimensions::new(200.0, 400.0, 400.0)?;
    let q = JointAngles::from_degrees(10.0, 37.0, -74.0);
    let j = jacobian(&q, &dims);
    println!("\nJ at {:?} deg:{j:.1}", q.to_degrees());
    println!(
        "|det J| = {:.4e}, w = {:.4e}",
        j.determinant().abs(),
        manipulability(&q, &dims)
    );
    Ok(())
}
