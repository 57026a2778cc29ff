//! Every experiment in one run through the harness, artifacts in `out/`
//! (or the directory given as the first argument).
//!
//! cargo run --release --example sweep_all -- [out_dir]

use hexleg::harness::{execute, Command, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = RunConfig::default();
    cfg.output.dir = std::env::args().nth(1).map(Into::into);
    let (report, paths) = execute(Command::SweepAll, &cfg)?;
    for line in &report.summary {
        println!("{line}");
    }
    for t in &report.tables {
        println!("\n{}:\n{}", t.name, t.preview(5));
    }
    println!(
        "{} files written in {:.2} s",
        paths.len(),
        report.duration.as_secs_f64()
    );
    Ok(())
}
