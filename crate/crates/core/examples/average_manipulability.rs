//! Grid-averaged manipulability across coxa and tibia ratios.
//!
//! cargo run --release --example average_manipulability

use hexleg::manipulability::ratio_sweep_average;

fn main() -> hexleg::error::Result<()> {
    let r1s = [0.05, 0.10, 0.15, 0.20];
    let r3s: Vec<f64> = (0..=10).map(|k| 0.20 + 0.05 * k as f64).collect();
    let cells = ratio_sweep_average(1000.0, &r1s, &r3s)?;

    print!("{:>6}", "r3");
    for r1 in r1s {
        print!(" {:>12}", format!("r1={r1}"));
    }
    println!();
    for (j, r3) in r3s.iter().enumerate() {
        print!("{r3:>6.2}");
        for i in 0..r1s.len() {
            match cells[i * r3s.len() + j].value {
                Some(v) => print!(" {v:>12.4e}"),
                None => print!(" {:>12}", "-"),
            }
        }
        println!();
    }
    for (i, r1) in r1s.iter().enumerate() {
        let row = &cells[i * r3s.len()..(i + 1) * r3s.len()];
        let best = row
            .iter()
            .filter_map(|c| c.value.map(|v| (c.r3, v)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least one feasible cell");
        println!("r1 = {r1}: peak at r3 = {:.2}", best.0);
    }
    Ok(())
}
