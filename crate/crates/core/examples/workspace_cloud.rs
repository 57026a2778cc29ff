//! Monte Carlo foot workspace under the default joint limits, written as CSV and SVG.
//!
//! cargo run --release --example workspace_cloud -- [samples] [out_dir]

use hexleg::harness::{emit_svg, PlotKind, PlotSpec, Table};
use hexleg::workspace::monte_carlo_cloud;
use hexleg::{JointLimits, LegDimensions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args
        .next()
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(100_000);
    let out = std::path::PathBuf::from(args.next().unwrap_or_else(|| "out".into()));

    let dims = LegDimensions::new(200.0, 400.0, 400.0)?;
    let cloud = monte_carlo_cloud(&dims, &JointLimits::table2(), n, 7)?;

    let mut table = Table::new("cloud", &["x_mm", "y_mm", "z_mm"]);
    for p in &cloud.points {
        table.push(vec![p.x.into(), p.y.into(), p.z.into()]);
    }
    let reach = cloud
        .points
        .iter()
        .map(|p| p.x.hypot(p.y))
        .fold(0.0, f64::max);
    println!("{} points, max horizontal reach {reach:.1} mm", cloud.len());

    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("cloud.csv"), table.to_csv())?;
    let svg = emit_svg(
        &table,
        &PlotSpec::new(PlotKind::Scatter, "Workspace side view", "x_mm", "z_mm"),
    )?;
    std::fs::write(out.join("cloud_xz.svg"), svg)?;
    println!("wrote {}", out.display());
    Ok(())
}
