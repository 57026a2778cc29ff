//! Improved planar workspace: closed-form area against the raster oracle,
//! and the coxa-ratio trend.
//!
//! cargo run --release --example improved_area

use hexleg::workspace::{
    coxa_ratio_area_sweep, improved_area, improved_area_report, optimal_femur_tibia_split,
};

fn main() -> hexleg::error::Result<()> {
    println!(
        "{:>5} {:>16} {:>12} {:>12} {:>8}",
        "r1", "l1/l2/l3 mm", "analytic", "raster 2mm", "gap %"
    );
    for row in coxa_ratio_area_sweep(1000.0, &[0.05, 0.10, 0.15, 0.20])? {
        let d = row.dims;
        let report = improved_area_report(&d, 2.0)?;
        println!(
            "{:>5.2} {:>16} {:>12.1} {:>12.1} {:>8.3}",
            row.coxa_ratio,
            format!("{}/{}/{}", d.coxa(), d.femur(), d.tibia()),
            report.analytic,
            report.numeric,
            100.0 * report.gap
        );
    }

    let combined = 900.0;
    let (l2, l3) = optimal_femur_tibia_split(combined)?;
    println!("\nbest split of {combined} mm: {l2} + {l3}");
    for l2 in [350.0, 400.0, 450.0, 500.0, 550.0] {
        println!(
            "  l2 = {l2:>5}: area {:.1} mm2",
            improved_area(l2, combined - l2)
        );
    }
    Ok(())
}
