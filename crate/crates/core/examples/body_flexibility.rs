//! Directional limit poses of the body on a fixed hexagon stance, and the
//! resulting flexibility index.
//!
//! cargo run --release --example body_flexibility -- [l1 l2 l3]

use hexleg::flexibility::{
    default_stance, directional_limits, flexibility_index, Axis, Direction, Resolution,
};
use hexleg::LegDimensions;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let v: Vec<f64> = std::env::args()
        .skip(1)
        .map(|s| s.parse())
        .collect::<Result<_, _>>()?;
    let dims = match v.as_slice() {
        [a, b, c] => LegDimensions::new(*a, *b, *c)?,
        [] => LegDimensions::new(50.0, 550.0, 400.0)?,
        _ => return Err("expected three lengths".into()),
    };
    let stance = default_stance(&dims, 400.0)?;
    let limits = directional_limits(&stance, &Resolution::default())?;
    for axis in Axis::ALL {
        let unit = if axis.is_rotation() { "deg" } else { "mm" };
        println!(
            "{:>5}: {:9.3} .. {:8.3} {unit}",
            axis.name(),
            limits.extreme(Direction::minus(axis)),
            limits.extreme(Direction::plus(axis))
        );
    }
    let fb = flexibility_index(&limits, dims.total())?;
    println!("FB = {:.4}", fb.value);
    Ok(())
}
