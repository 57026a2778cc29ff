//! Experiment orchestration behind the `hexleg` binary: resolves a
//! [`RunConfig`] into a concrete [`Plan`], runs it, and writes CSV/SVG
//! artifacts plus a plain-text report.

pub mod config;
pub mod svg;
pub mod table;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

pub use config::{Format, LimitSet, RunConfig};
pub use svg::{emit_svg, PlotKind, PlotSpec};
pub use table::{Table, Value};

use crate::error::Error;
use crate::flexibility::{
    default_stance_with, directional_limits, flexibility_index, Axis, Direction, DirectionalLimits,
    FlexibilityIndex, Resolution, DEFAULT_BODY_RADIUS, DEFAULT_HALF_HEIGHT,
};
use crate::leg::{
    forward_kinematics, inverse_kinematics, FootPoint, Interval, JointAngles, JointLimits,
    LegDimensions,
};
use crate::manipulability::{
    average_manipulability, manipulability_surface, maximize_manipulability,
};
use crate::workspace::{
    area_numeric_oracle, boundary_polyline, improved_area_analytic, monte_carlo_cloud,
};
use config::{
    expand_range, DEFAULT_CELL_MM, DEFAULT_COXA_RATIOS, DEFAULT_FLEX_TIBIA_RANGE,
    DEFAULT_MANIP_TIBIA_RANGE,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Harness failures, each tied to a process exit code.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("infeasible experiment: {0}")]
    Infeasible(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Infeasible(_) => 2,
            HarnessError::Numerical(_) | HarnessError::Io(_) => 3,
        }
    }
}

impl From<Error> for HarnessError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Parameter(_) | Error::Configuration(_) | Error::FrameMismatch { .. } => {
                HarnessError::Config(msg)
            }
            Error::Unreachable { .. } | Error::SingularAzimuth | Error::Leg { .. } => {
                HarnessError::Infeasible(msg)
            }
            Error::Rank { .. } | Error::Consistency { .. } | Error::Resolution { .. } => {
                HarnessError::Numerical(msg)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Fk,
    Ik,
    WorkspaceCloud,
    WorkspaceArea,
    ManipSurface,
    ManipOpt,
    ManipAverage,
    Flexibility,
    SweepAll,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Fk,
        Command::Ik,
        Command::WorkspaceCloud,
        Command::WorkspaceArea,
        Command::ManipSurface,
        Command::ManipOpt,
        Command::ManipAverage,
        Command::Flexibility,
        Command::SweepAll,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Fk => "fk",
            Command::Ik => "ik",
            Command::WorkspaceCloud => "workspace-cloud",
            Command::WorkspaceArea => "workspace-area",
            Command::ManipSurface => "manip-surface",
            Command::ManipOpt => "manip-opt",
            Command::ManipAverage => "manip-average",
            Command::Flexibility => "flexibility",
            Command::SweepAll => "sweep-all",
        }
    }

    /// Joint limits used when the configuration names none.
    fn default_limit_set(self) -> LimitSet {
        match self {
            Command::ManipSurface | Command::ManipOpt | Command::ManipAverage => {
                LimitSet::Manipulability
            }
            Command::Flexibility => LimitSet::Flexibility,
            _ => LimitSet::Table2,
        }
    }
}

/// Command-line overrides. Each set field replaces the matching config key.
#[derive(Debug, Clone, Default, PartialEq, clap::Args)]
pub struct Overrides {
    /// Segment lengths l1,l2,l3 in mm; omit to run the ratio sweep
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
    pub dims: Option<Vec<f64>>,
    /// Total leg length in mm for ratio sweeps
    #[arg(long)]
    pub total: Option<f64>,
    /// Joint angles theta1,theta2,theta3 in degrees
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "rad"
    )]
    pub deg: Option<Vec<f64>>,
    /// Joint angles theta1,theta2,theta3 in radians
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub rad: Option<Vec<f64>>,
    /// Foot point x,y,z in mm, leg-root frame
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub point: Option<Vec<f64>>,
    /// Shorthand for --limits improved
    #[arg(long, conflicts_with = "limits")]
    pub improved: bool,
    /// Joint-limit set
    #[arg(long, value_enum)]
    pub limits: Option<LimitSet>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo sample count
    #[arg(long)]
    pub samples: Option<usize>,
    /// Raster cell size in mm for the area oracle
    #[arg(long)]
    pub cell: Option<f64>,
    /// Manipulability grid m,n
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
    /// Body hexagon circumradius in mm
    #[arg(long)]
    pub body_radius: Option<f64>,
    /// Output directory (beats the environment variable and the config)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output formats
    #[arg(long, value_enum, value_delimiter = ',')]
    pub format: Option<Vec<Format>>,
}

fn triple(flag: &str, v: &[f64]) -> Result<[f64; 3], HarnessError> {
    <[f64; 3]>::try_from(v).map_err(|_| {
        HarnessError::Config(format!(
            "--{flag} needs 3 comma-separated values, got {}",
            v.len()
        ))
    })
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<(), HarnessError> {
        if let Some(v) = &self.dims {
            cfg.leg.dims_mm = Some(triple("dims", v)?);
        }
        if let Some(v) = self.total {
            cfg.leg.total_mm = Some(v);
        }
        if let Some(v) = &self.deg {
            cfg.leg.angles_deg = Some(triple("deg", v)?);
            cfg.leg.angles_rad = None;
        }
        if let Some(v) = &self.rad {
            cfg.leg.angles_rad = Some(triple("rad", v)?);
            cfg.leg.angles_deg = None;
        }
        if let Some(v) = &self.point {
            cfg.leg.point_mm = Some(triple("point", v)?);
        }
        if self.improved {
            cfg.limits.set = Some(LimitSet::Improved);
        }
        if let Some(v) = self.limits {
            cfg.limits.set = Some(v);
        }
        if let Some(v) = self.seed {
            cfg.seed = Some(v);
        }
        if let Some(v) = self.samples {
            cfg.workspace.samples = Some(v);
        }
        if let Some(v) = self.cell {
            cfg.workspace.cell_mm = Some(v);
        }
        if let Some(v) = &self.grid {
            let g = <[usize; 2]>::try_from(v.as_slice()).map_err(|_| {
                HarnessError::Config(format!("--grid needs 2 values, got {}", v.len()))
            })?;
            cfg.manipulability.grid = Some(g);
        }
        if let Some(v) = self.body_radius {
            cfg.flexibility.body_radius_mm = Some(v);
        }
        if let Some(v) = &self.out {
            cfg.output.dir = Some(v.clone());
        }
        if let Some(v) = &self.format {
            cfg.output.formats = Some(v.clone());
        }
        Ok(())
    }
}

/// A fully resolved experiment: every knob has a concrete value.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub command: Command,
    pub seed: u64,
    pub total: f64,
    /// Explicit single-leg dimensions; `None` selects the ratio sweep.
    pub dims: Option<LegDimensions>,
    pub angles: Option<JointAngles>,
    pub point: Option<FootPoint>,
    pub limit_set: LimitSet,
    pub limits: JointLimits,
    pub samples: usize,
    pub cell: f64,
    pub area_ratios: Vec<f64>,
    pub grid: (usize, usize),
    pub manip_r1: Vec<f64>,
    pub manip_r3: Vec<f64>,
    pub body_radius: f64,
    pub half_height: f64,
    pub flex_r1: Vec<f64>,
    pub flex_r3: Vec<f64>,
    pub resolution: Resolution,
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
}

fn positive(name: &str, v: f64) -> Result<f64, HarnessError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(HarnessError::Config(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

fn ratios(name: &str, v: Vec<f64>) -> Result<Vec<f64>, HarnessError> {
    if v.is_empty() {
        return Err(HarnessError::Config(format!("{name} is empty")));
    }
    if let Some(bad) = v.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(HarnessError::Config(format!(
            "{name} entry {bad} outside (0, 1)"
        )));
    }
    Ok(v)
}

fn degree_interval(name: &str, v: [f64; 2]) -> Result<Interval, HarnessError> {
    Interval::degrees(v[0], v[1]).map_err(|e| HarnessError::Config(format!("limits.{name}: {e}")))
}

impl Plan {
    pub fn resolve(command: Command, cfg: &RunConfig) -> Result<Self, HarnessError> {
        let total = positive(
            "leg.total_mm",
            cfg.leg.total_mm.unwrap_or(config::DEFAULT_TOTAL_MM),
        )?;
        let dims = cfg
            .leg
            .dims_mm
            .map(|[a, b, c]| LegDimensions::new(a, b, c))
            .transpose()
            .map_err(|e| HarnessError::Config(format!("leg.dims_mm: {e}")))?;
        let angles = match (cfg.leg.angles_deg, cfg.leg.angles_rad) {
            (Some(_), Some(_)) => {
                return Err(HarnessError::Config(
                    "set only one of leg.angles_deg and leg.angles_rad".into(),
                ))
            }
            (Some([a, b, c]), None) => Some(JointAngles::from_degrees(a, b, c)),
            (None, Some([a, b, c])) => Some(JointAngles::new(a, b, c)),
            (None, None) => None,
        };
        let point = cfg
            .leg
            .point_mm
            .map(|[x, y, z]| FootPoint::leg_root(x, y, z));

        let l = &cfg.limits;
        let has_custom = l.root_deg.is_some() || l.hip_deg.is_some() || l.knee_deg.is_some();
        let limit_set = match l.set {
            Some(LimitSet::Custom) | None if has_custom => LimitSet::Custom,
            Some(set) if has_custom => {
                return Err(HarnessError::Config(format!(
                    "limits.root_deg/hip_deg/knee_deg only apply to set = \"custom\", not {set:?}"
                )))
            }
            Some(LimitSet::Custom) => {
                return Err(HarnessError::Config(
                    "limits.set = \"custom\" needs root_deg, hip_deg or knee_deg".into(),
                ))
            }
            Some(set) => set,
            None => command.default_limit_set(),
        };
        if command == Command::SweepAll && l.set.is_some() {
            return Err(HarnessError::Config(
                "sweep-all runs every experiment with its own preset limits; remove the limits selection".into(),
            ));
        }
        let limits = match limit_set {
            LimitSet::Table2 => JointLimits::table2(),
            LimitSet::Improved => JointLimits::improved(),
            LimitSet::Manipulability => JointLimits::manipulability_box(),
            LimitSet::Flexibility => JointLimits::flexibility(),
            LimitSet::Custom => {
                let base = command.default_limit_set();
                let base = Plan::preset(base);
                JointLimits::independent(
                    l.root_deg
                        .map(|v| degree_interval("root_deg", v))
                        .transpose()?
                        .unwrap_or(base.root),
                    l.hip_deg
                        .map(|v| degree_interval("hip_deg", v))
                        .transpose()?
                        .unwrap_or(base.hip),
                    l.knee_deg
                        .map(|v| degree_interval("knee_deg", v))
                        .transpose()?
                        .unwrap_or(base.knee),
                )
            }
        };

        let samples = cfg.workspace.samples.unwrap_or(config::DEFAULT_SAMPLES);
        if samples == 0 {
            return Err(HarnessError::Config(
                "workspace.samples must be at least 1".into(),
            ));
        }
        let cell = positive(
            "workspace.cell_mm",
            cfg.workspace.cell_mm.unwrap_or(DEFAULT_CELL_MM),
        )?;
        let area_ratios = ratios(
            "workspace.coxa_ratios",
            cfg.workspace
                .coxa_ratios
                .clone()
                .unwrap_or(DEFAULT_COXA_RATIOS.to_vec()),
        )?;
        let [m, n] = cfg.manipulability.grid.unwrap_or([121, 121]);
        if m < 2 || n < 2 {
            return Err(HarnessError::Config(format!(
                "manipulability.grid needs at least 2x2, got {m}x{n}"
            )));
        }
        let manip_r1 = ratios(
            "manipulability.coxa_ratios",
            cfg.manipulability
                .coxa_ratios
                .clone()
                .unwrap_or(DEFAULT_COXA_RATIOS.to_vec()),
        )?;
        let manip_r3 = ratios(
            "manipulability.tibia_ratio_range",
            expand_range(
                cfg.manipulability
                    .tibia_ratio_range
                    .unwrap_or(DEFAULT_MANIP_TIBIA_RANGE),
            )?,
        )?;
        let f = &cfg.flexibility;
        let body_radius = positive(
            "flexibility.body_radius_mm",
            f.body_radius_mm.unwrap_or(DEFAULT_BODY_RADIUS),
        )?;
        let half_height = positive(
            "flexibility.half_height_mm",
            f.half_height_mm.unwrap_or(DEFAULT_HALF_HEIGHT),
        )?;
        let flex_r1 = ratios(
            "flexibility.coxa_ratios",
            f.coxa_ratios
                .clone()
                .unwrap_or(DEFAULT_COXA_RATIOS.to_vec()),
        )?;
        let flex_r3 = ratios(
            "flexibility.tibia_ratio_range",
            expand_range(f.tibia_ratio_range.unwrap_or(DEFAULT_FLEX_TIBIA_RANGE))?,
        )?;
        let default_res = Resolution::default();
        let resolution = Resolution {
            translation_mm: positive(
                "flexibility.translation_resolution_mm",
                f.translation_resolution_mm
                    .unwrap_or(default_res.translation_mm),
            )?,
            rotation_deg: positive(
                "flexibility.rotation_resolution_deg",
                f.rotation_resolution_deg
                    .unwrap_or(default_res.rotation_deg),
            )?,
        };
        let formats = cfg
            .output
            .formats
            .clone()
            .unwrap_or(vec![Format::Csv, Format::Svg]);

        let plan = Plan {
            command,
            seed: cfg.seed.unwrap_or(config::DEFAULT_SEED),
            total,
            dims,
            angles,
            point,
            limit_set,
            limits,
            samples,
            cell,
            area_ratios,
            grid: (m, n),
            manip_r1,
            manip_r3,
            body_radius,
            half_height,
            flex_r1,
            flex_r3,
            resolution,
            out_dir: cfg
                .output
                .dir
                .clone()
                .unwrap_or_else(|| PathBuf::from("out")),
            formats,
        };
        match command {
            Command::Fk if plan.angles.is_none() => Err(HarnessError::Config(
                "fk needs joint angles (--deg, --rad or leg.angles_deg)".into(),
            )),
            Command::Ik if plan.point.is_none() => Err(HarnessError::Config(
                "ik needs a foot point (--point or leg.point_mm)".into(),
            )),
            _ => Ok(plan),
        }
    }

    fn preset(set: LimitSet) -> JointLimits {
        match set {
            LimitSet::Improved => JointLimits::improved(),
            LimitSet::Manipulability => JointLimits::manipulability_box(),
            LimitSet::Flexibility => JointLimits::flexibility(),
            LimitSet::Table2 | LimitSet::Custom => JointLimits::table2(),
        }
    }

    /// Explicit dimensions, or the 20/40/40 split of the total length.
    fn single_dims(&self) -> Result<LegDimensions, HarnessError> {
        match self.dims {
            Some(d) => Ok(d),
            None => Ok(LegDimensions::from_ratios(self.total, 0.20, 0.40)?),
        }
    }

    fn echo(&self) -> Vec<(String, String)> {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let deg =
            |i: &Interval| format!("[{}, {}] deg", i.min().to_degrees(), i.max().to_degrees());
        let mut out = vec![
            ("command".to_string(), self.command.name().to_string()),
            ("seed".to_string(), self.seed.to_string()),
            ("total_mm".to_string(), self.total.to_string()),
        ];
        match self.dims {
            Some(d) => out.push((
                "dims_mm".into(),
                format!("{},{},{}", d.coxa(), d.femur(), d.tibia()),
            )),
            None => out.push(("dims_mm".into(), "ratio sweep".into())),
        }
        if let Some(a) = self.angles {
            out.push(("angles_deg".into(), list(&a.to_degrees())));
        }
        if let Some(p) = self.point {
            out.push(("point_mm".into(), list(&[p.x, p.y, p.z])));
        }
        out.push((
            "limits".into(),
            format!("{:?}", self.limit_set).to_lowercase(),
        ));
        out.push(("limits.root".into(), deg(&self.limits.root)));
        out.push(("limits.hip".into(), deg(&self.limits.hip)));
        out.push(("limits.knee".into(), deg(&self.limits.knee)));
        out.push(("limits.mode".into(), format!("{:?}", self.limits.mode)));
        out.push(("workspace.samples".into(), self.samples.to_string()));
        out.push(("workspace.cell_mm".into(), self.cell.to_string()));
        out.push(("workspace.coxa_ratios".into(), list(&self.area_ratios)));
        out.push((
            "manipulability.grid".into(),
            format!("{}x{}", self.grid.0, self.grid.1),
        ));
        out.push(("manipulability.coxa_ratios".into(), list(&self.manip_r1)));
        out.push(("manipulability.tibia_ratios".into(), list(&self.manip_r3)));
        out.push((
            "flexibility.body_radius_mm".into(),
            self.body_radius.to_string(),
        ));
        out.push((
            "flexibility.half_height_mm".into(),
            self.half_height.to_string(),
        ));
        out.push(("flexibility.coxa_ratios".into(), list(&self.flex_r1)));
        out.push(("flexibility.tibia_ratios".into(), list(&self.flex_r3)));
        out.push((
            "flexibility.resolution".into(),
            format!(
                "{} mm, {} deg",
                self.resolution.translation_mm, self.resolution.rotation_deg
            ),
        ));
        out
    }
}

/// A plot to render from one of the report's tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub file_stem: String,
    pub table: String,
    pub spec: PlotSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub id: String,
    pub inputs: Vec<(String, String)>,
    /// Human-readable result lines, also printed by the binary.
    pub summary: Vec<String>,
    pub tables: Vec<Table>,
    pub plots: Vec<Plot>,
    /// Sweep cells that could not be evaluated, with the reason.
    pub flagged: Vec<String>,
    pub duration: Duration,
    pub version: String,
    pub seed: u64,
}

impl ExperimentReport {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment = {}", self.id);
        let _ = writeln!(s, "version = {}", self.version);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "duration_s = {:.3}", self.duration.as_secs_f64());
        let _ = writeln!(s, "\n[inputs]");
        for (k, v) in &self.inputs {
            let _ = writeln!(s, "{k} = {v}");
        }
        let _ = writeln!(s, "\n[summary]");
        for line in &self.summary {
            let _ = writeln!(s, "{line}");
        }
        if !self.flagged.is_empty() {
            let _ = writeln!(s, "\n[flagged]");
            for line in &self.flagged {
                let _ = writeln!(s, "{line}");
            }
        }
        let _ = writeln!(s, "\n[tables]");
        for t in &self.tables {
            let _ = writeln!(s, "{} ({} rows)", t.name, t.rows.len());
        }
        s
    }

    /// Writes `<table>.csv`, `<plot>.svg` and `<id>_report.txt` into `dir`,
    /// returning the paths in write order.
    pub fn write_artifacts(
        &self,
        dir: &Path,
        formats: &[Format],
    ) -> Result<Vec<PathBuf>, HarnessError> {
        let io = |p: &Path, e: std::io::Error| HarnessError::Io(format!("{}: {e}", p.display()));
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let mut written = Vec::new();
        let mut put = |name: String, body: &str| -> Result<(), HarnessError> {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| io(&path, e))?;
            written.push(path);
            Ok(())
        };
        if formats.contains(&Format::Csv) {
            for t in &self.tables {
                put(format!("{}.csv", t.name), &t.to_csv())?;
            }
        }
        if formats.contains(&Format::Svg) {
            for p in &self.plots {
                let table = self.table(&p.table).ok_or_else(|| {
                    HarnessError::Numerical(format!(
                        "plot {} refers to missing table {}",
                        p.file_stem, p.table
                    ))
                })?;
                if table.rows.is_empty() {
                    continue;
                }
                let svg =
                    emit_svg(table, &p.spec).map_err(|e| HarnessError::Numerical(e.to_string()))?;
                put(format!("{}.svg", p.file_stem), &svg)?;
            }
        }
        put(
            format!("{}_report.txt", self.id.replace('-', "_")),
            &self.to_text(),
        )?;
        Ok(written)
    }
}

/// Accumulates the pieces of a report while experiments run.
#[derive(Default)]
struct Output {
    summary: Vec<String>,
    tables: Vec<Table>,
    plots: Vec<Plot>,
    flagged: Vec<String>,
}

impl Output {
    fn plot(&mut self, file_stem: &str, table: &str, spec: PlotSpec) {
        self.plots.push(Plot {
            file_stem: file_stem.to_string(),
            table: table.to_string(),
            spec,
        });
    }
}

fn fmt(v: f64) -> String {
    table::format_sig(v)
}

fn coord(v: f64) -> String {
    let s = format!("{:.6}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn run_fk(plan: &Plan, out: &mut Output) -> Result<(), HarnessError> {
    let dims = plan.single_dims()?;
    let q = plan.angles.expect("checked in resolve");
    let p = forward_kinematics(&q, &dims);
    let [a, b, c] = q.to_degrees();
    let mut t = Table::new(
        "fk",
        &[
            "theta1_deg",
            "theta2_deg",
            "theta3_deg",
            "x_mm",
            "y_mm",
            "z_mm",
        ],
    );
    t.push(vec![
        a.into(),
        b.into(),
        c.into(),
        p.x.into(),
        p.y.into(),
        p.z.into(),
    ]);
    out.summary
        .push(format!("({}, {}, {})", coord(p.x), coord(p.y), coord(p.z)));
    out.tables.push(t);
    Ok(())
}

fn run_ik(plan: &Plan, out: &mut Output) -> Result<(), HarnessError> {
    let dims = plan.single_dims()?;
    let p = plan.point.expect("checked in resolve");
    let q = inverse_kinematics(&p, &dims)?;
    let [a, b, c] = q.to_degrees();
    let mut t = Table::new(
        "ik",
        &[
            "x_mm",
            "y_mm",
            "z_mm",
            "theta1_deg",
            "theta2_deg",
            "theta3_deg",
            "within_limits",
        ],
    );
    let within = plan.limits.contains(&q);
    t.push(vec![
        p.x.into(),
        p.y.into(),
        p.z.into(),
        a.into(),
        b.into(),
        c.into(),
        within.into(),
    ]);
    out.summary
        .push(format!("({}, {}, {}) deg", coord(a), coord(b), coord(c)));
    if !within {
        out.summary
            .push(format!("outside {:?} joint limits", plan.limit_set).to_lowercase());
    }
    out.tables.push(t);
    Ok(())
}

fn run_cloud(plan: &Plan, out: &mut Output) -> Result<(), HarnessError> {
    let dims = plan.single_dims()?;
    let cloud = monte_carlo_cloud(&dims, &plan.limits, plan.samples, plan.seed)?;
    let mut t = Table::new("workspace_cloud", &["x_mm", "y_mm", "z_mm"]);
    t.rows = cloud
        .points
        .iter()
        .map(|p| vec![p.x.into(), p.y.into(), p.z.into()])
        .collect();
    let (lo, hi) = cloud
        .points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.z), hi.max(p.z))
        });
    out.summary.push(format!(
        "{} samples, seed {}, z in [{}, {}] mm",
        cloud.len(),
        plan.seed,
        fmt(lo),
        fmt(hi)
    ));
    out.tables.push(t);
    out.plot(
        "workspace_cloud_xz",
        "workspace_cloud",
        PlotSpec::new(
            PlotKind::Scatter,
            "Foot workspace, side view",
            "x_mm",
            "z_mm",
        ),
    );
    out.plot(
        "workspace_cloud_xy",
        "workspace_cloud",
        PlotSpec::new(
            PlotKind::Scatter,
            "Foot workspace, top view",
            "x_mm",
            "y_mm",
        ),
    );
    Ok(())
}

const AREA_COLUMNS: [&str; 7] = [
    "r1",
    "l1_mm",
    "l2_mm",
    "l3_mm",
    "area_analytic_mm2",
    "area_numeric_mm2",
    "gap",
];

fn area_row(
    dims: &LegDimensions,
    limits: &JointLimits,
    set: LimitSet,
    cell: f64,
) -> Result<Vec<Value>, HarnessError> {
    let numeric = area_numeric_oracle(dims, limits, cell)?;
    let analytic = (set == LimitSet::Improved).then(|| improved_area_analytic(dims));
    let gap = analytic.map(|a| (a - numeric).abs() / a);
    Ok(vec![
        dims.coxa_ratio().into(),
        dims.coxa().into(),
        dims.femur().into(),
        dims.tibia().into(),
        analytic.into(),
        numeric.into(),
        gap.into(),
    ])
}

fn run_area(plan: &Plan, out: &mut Output) -> Result<(), HarnessError> {
    let legs: Vec<LegDimensions> = match plan.dims {
        Some(d) => vec![d],
        None => plan
            .area_ratios
            .iter()
            .map(|&r1| LegDimensions::from_ratios(plan.total, r1, (1.0 - r1) / 2.0))
            .collect::<Result<_, _>>()?,
    };
    let rows = legs
        .par_iter()
        .map(|d| area_row(d, &plan.limits, plan.limit_set, plan.cell))
        .collect::<Result<Vec<_>, _>>()?;
    let name = if plan.dims.is_some() {
        "workspace_area"
    } else {
        "area_ratio_sweep"
    };
    let mut t = Table::new(name, &AREA_COLUMNS);
    for row in rows {
        let line = match (&row[4], &row[5], &row[6]) {
            (Value::Num(a), Value::Num(n), Value::Num(g)) => {
                format!(
                    "analytic {} mm2, numeric {} mm2, gap {:.3}%",
                    fmt(*a),
                    fmt(*n),
                    100.0 * g
                )
            }
            (_, Value::Num(n), _) => format!(
                "numeric {} mm2 (closed form needs improved limits)",
                fmt(*n)
            ),
            _ => String::new(),
        };
        let dims = format!(
            "{}/{}/{}",
            coord(row[1].as_f64().unwrap_or(0.0)),
            coord(row[2].as_f64().unwrap_or(0.0)),
            coord(row[3].as_f64().unwrap_or(0.0))
        );
        out.summary.push(format!("l = {dims} mm: {line}"));
        t.push(row);
    }

    let mut b = Table::new(&format!("{name}_boundary"), &["r1", "x_mm", "z_mm"]);
    for d in &legs {
        for (x, z) in boundary_polyline(d, &plan.limits, 200) {
            b.push(vec![d.coxa_ratio().into(), x.into(), z.into()]);
        }
    }
    out.plot(
        &b.name.clone(),
        &b.name.clone(),
        PlotSpec::new(PlotKind::Lines, "Planar workspace boundary", "x_mm", "z_mm").group("r1"),
    );
    if plan.dims.is_none() {
        let column = if plan.limit_set == LimitSet::Improved {
            "area_analytic_mm2"
        } else {
            "area_numeric_mm2"
        };
        out.plot(
            &format!("{name}_trend"),
            name,
            PlotSpec::new(
                PlotKind::Lines,
                "Workspace area against coxa ratio",
                "r1",
                column,
            ),
        );
    }
    out.tables.push(t);
    out.tables.push(b);
    Ok(())
}

fn run_surface(plan: &Plan, out: &mut Output) -> Result<(), HarnessError> {
    let dims = plan.single_dims()?;
    let (m, n) = plan.grid;
    let surface = manipulability_surface(&dims, &plan.limits, m, n)?;
    let mut t = Table::new("manip_surface", &["theta2_deg", "theta3_deg", "w_mm3"]);
    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    for p in &surface {
        t.push(vec![
            p.hip.to_degrees().into(),
            p.knee.to_degrees().into(),
            p.w.into(),
        ]);
        if p.w > best.2 {
            best = (p.hip, p.knee, p.w);
        }
    }
    out.summary.push(format!(
        "{m}x{n} grid, max w {} mm3 at theta2 {} deg, theta3 {} deg",
        fmt(best.2),
        coord(best.0.to_degrees()),
        coord(best.1.to_degrees())
    ));
    out.tables.push(t);
    out.plot(
        "manip_surface",
        "manip_surface",
        PlotSpec::new(
            PlotKind::Heatmap,
            "Manipulability surface",
            "theta2_deg",
            "theta3_deg",
        )
        .value("w_mm3"),
    );
    Ok(())
}

fn run_opt(plan: &Plan, out: &mut Output) -> Result<(), HarnessError> {
    let legs: Vec<LegDimensions> = match plan.dims {
        Some(d) => vec![d],
        None => plan
            .area_ratios
            .iter()
            .map(|&r1| LegDimensions::from_ratios(plan.total, r1, (1.0 - r1) / 2.0))
            .collect::<Result<_, _>>()?,
    };
    let results = legs
        .par_iter()
        .map(|d| maximize_manipulability(d, &plan.limits))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(
        "manip_opt",
        &[
            "l1_mm",
            "l2_mm",
            "l3_mm",
            "theta2_deg",
            "theta3_deg",
            "w_mm3",
            "iterations",
            "converged",
        ],
    );
    for r in results {
        let (h, k) = (r.hip.to_degrees(), r.knee.to_degrees());
        out.summary.push(format!(
            "l = {}/{}/{} mm: theta2 = {:.4} deg, theta3 = {:.4} deg, w* = {:.4e} mm3, iterations = {}, converged = {}",
            coord(r.dims.coxa()),
            coord(r.dims.femur()),
            coord(r.dims.tibia()),
            h,
            k,
            r.w_star,
            r.iterations,
            r.converged
        ));
        t.push(vec![
            r.dims.coxa().into(),
            r.dims.femur().into(),
            r.dims.tibia().into(),
            h.into(),
            k.into(),
            r.w_star.into(),
            r.iterations.into(),
            r.converged.into(),
        ]);
    }
    out.tables.push(t);
    Ok(())
}

/// Index of the largest value in each run of rows sharing the first key.
fn argmax_by_group(cells: &[(f64, f64, Option<f64>)]) -> Vec<(f64, f64, f64)> {
    let mut best: Vec<(f64, f64, f64)> = Vec::new();
    for &(g, x, v) in cells {
        let Some(v) = v else { continue };
        match best.iter_mut().find(|b| b.0 == g) {
            Some(b) if v > b.2 => *b = (g, x, v),
            Some(_) => {}
            None => best.push((g, x, v)),
        }
    }
    best
}

fn run_average(plan: &Plan, out: &mut Output) -> Result<(), HarnessError> {
    let (m, n) = plan.grid;
    if let Some(dims) = plan.dims {
        let avg = average_manipulability(&dims, &plan.limits, m, n)?;
        let mut t = Table::new("manip_average", &["l1_mm", "l2_mm", "l3_mm", "w_A_mm3"]);
        t.push(vec![
            dims.coxa().into(),
            dims.femur().into(),
            dims.tibia().into(),
            avg.value.into(),
        ]);
        out.summary
            .push(format!("{m}x{n} grid: w_A = {:.5e} mm3", avg.value));
        out.tables.push(t);
        return Ok(());
    }
    let pairs: Vec<(f64, f64)> = plan
        .manip_r1
        .iter()
        .flat_map(|&r1| plan.manip_r3.iter().map(move |&r3| (r1, r3)))
        .collect();
    let cells = pairs
        .par_iter()
        .map(
            |&(r1, r3)| match LegDimensions::from_ratios(plan.total, r1, r3) {
                Ok(d) => {
                    average_manipulability(&d, &plan.limits, m, n).map(|a| (r1, r3, Some(a.value)))
                }
                Err(_) => Ok((r1, r3, None)),
            },
        )
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new("manip_average_sweep", &["r1", "r3", "w_A_mm3"]);
    for &(r1, r3, v) in &cells {
        if v.is_none() {
            out.flagged.push(format!(
                "manip-average r1={r1} r3={r3}: no femur length left"
            ));
        }
        t.push(vec![r1.into(), r3.into(), v.into()]);
    }
    let mut a = Table::new("manip_average_argmax", &["r1", "r3_argmax", "w_A_max_mm3"]);
    for (r1, r3, v) in argmax_by_group(&cells) {
        out.summary
            .push(format!("r1 = {r1}: w_A peaks at r3 = {r3} ({:.5e} mm3)", v));
        a.push(vec![r1.into(), r3.into(), v.into()]);
    }
    out.tables.push(t);
    out.tables.push(a);
    out.plot(
        "manip_average_sweep",
        "manip_average_sweep",
        PlotSpec::new(PlotKind::Heatmap, "Average manipulability", "r1", "r3").value("w_A_mm3"),
    );
    out.plot(
        "manip_average_curves",
        "manip_average_sweep",
        PlotSpec::new(
            PlotKind::Lines,
            "Average manipulability against tibia ratio",
            "r3",
            "w_A_mm3",
        )
        .group("r1"),
    );
    Ok(())
}

fn flex_columns() -> Vec<String> {
    let mut cols: Vec<String> = [
        "r1", "r3", "FB", "Sx_mm", "Sy_mm", "Sz_mm", "phix_deg", "phiy_deg", "phiz_deg",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for d in Direction::all() {
        let unit = if d.axis.is_rotation() { "deg" } else { "mm" };
        cols.push(format!(
            "{}{}_{unit}",
            if d.positive { "plus" } else { "minus" },
            d.axis.name()
        ));
    }
    cols.push("status".into());
    cols
}

fn flex_row(
    r1: f64,
    r3: f64,
    outcome: &Result<(FlexibilityIndex, DirectionalLimits), String>,
) -> Vec<Value> {
    let mut row: Vec<Value> = vec![r1.into(), r3.into()];
    match outcome {
        Ok((fb, limits)) => {
            row.push(fb.value.into());
            row.extend(Axis::ALL.iter().map(|&a| Value::from(limits.interval(a))));
            row.extend(limits.extremes().iter().map(|&e| Value::from(e)));
            row.push("ok".into());
        }
        Err(reason) => {
            row.extend(std::iter::repeat_n(Value::Blank, 1 + 6 + 12));
            row.push(format!("infeasible: {reason}").into());
        }
    }
    row
}

fn flex_cell(
    plan: &Plan,
    dims: &LegDimensions,
) -> Result<(FlexibilityIndex, DirectionalLimits), Error> {
    let config = default_stance_with(dims, plan.body_radius, plan.half_height, plan.limits)?;
    let limits = directional_limits(&config, &plan.resolution)?;
    Ok((flexibility_index(&limits, plan.total)?, limits))
}

fn run_flex(plan: &Plan, out: &mut Output) -> Result<(), HarnessError> {
    let columns = flex_columns();
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    if let Some(dims) = plan.dims {
        let (fb, limits) = flex_cell(plan, &dims)?;
        let mut t = Table::new("flexibility", &cols);
        t.push(flex_row(
            dims.coxa_ratio(),
            dims.tibia_ratio(),
            &Ok((fb, limits)),
        ));
        out.summary.push(format!("FB = {:.6}", fb.value));
        for a in Axis::ALL {
            let unit = if a.is_rotation() { "deg" } else { "mm" };
            out.summary.push(format!(
                "{:>5}: [{}, {}] {unit}",
                a.name(),
                coord(limits.extreme(Direction::minus(a))),
                coord(limits.extreme(Direction::plus(a)))
            ));
        }
        out.tables.push(t);
        return Ok(());
    }
    let pairs: Vec<(f64, f64)> = plan
        .flex_r1
        .iter()
        .flat_map(|&r1| plan.flex_r3.iter().map(move |&r3| (r1, r3)))
        .collect();
    let outcomes: Vec<_> = pairs
        .par_iter()
        .map(|&(r1, r3)| {
            LegDimensions::from_ratios(plan.total, r1, r3)
                .and_then(|d| flex_cell(plan, &d))
                .map_err(|e| e.to_string())
        })
        .collect();
    let mut t = Table::new("flexibility_sweep", &cols);
    let mut cells = Vec::new();
    for (&(r1, r3), outcome) in pairs.iter().zip(&outcomes) {
        if let Err(reason) = outcome {
            out.flagged
                .push(format!("flexibility r1={r1} r3={r3}: {reason}"));
        }
        cells.push((r1, r3, outcome.as_ref().ok().map(|(fb, _)| fb.value)));
        t.push(flex_row(r1, r3, outcome));
    }
    let mut a = Table::new("flexibility_argmax", &["r1", "r3_argmax", "FB_max"]);
    for (r1, r3, v) in argmax_by_group(&cells) {
        out.summary
            .push(format!("r1 = {r1}: FB peaks at r3 = {r3} (FB = {:.6})", v));
        a.push(vec![r1.into(), r3.into(), v.into()]);
    }
    out.tables.push(t);
    out.tables.push(a);
    out.plot(
        "flexibility_sweep",
        "flexibility_sweep",
        PlotSpec::new(
            PlotKind::Lines,
            "Body flexibility against tibia ratio",
            "r3",
            "FB",
        )
        .group("r1"),
    );
    Ok(())
}

fn run_sweep_all(plan: &Plan, out: &mut Output) -> Result<(), HarnessError> {
    let sweep = |command: Command, limit_set: LimitSet, limits: JointLimits| Plan {
        command,
        dims: None,
        limit_set,
        limits,
        ..plan.clone()
    };
    type Step = fn(&Plan, &mut Output) -> Result<(), HarnessError>;
    let steps: [(&str, Plan, Step); 4] = [
        (
            "area",
            sweep(
                Command::WorkspaceArea,
                LimitSet::Improved,
                JointLimits::improved(),
            ),
            run_area,
        ),
        (
            "optimum",
            sweep(
                Command::ManipOpt,
                LimitSet::Manipulability,
                JointLimits::manipulability_box(),
            ),
            run_opt,
        ),
        (
            "average",
            sweep(
                Command::ManipAverage,
                LimitSet::Manipulability,
                JointLimits::manipulability_box(),
            ),
            run_average,
        ),
        (
            "flexibility",
            sweep(
                Command::Flexibility,
                LimitSet::Flexibility,
                JointLimits::flexibility(),
            ),
            run_flex,
        ),
    ];
    for (label, p, f) in steps {
        out.summary.push(format!("[{label}]"));
        f(&p, out)?;
    }
    // One surface for the reference leg.
    let surface = Plan {
        command: Command::ManipSurface,
        dims: Some(plan.single_dims()?),
        limit_set: LimitSet::Manipulability,
        limits: JointLimits::manipulability_box(),
        ..plan.clone()
    };
    out.summary.push("[surface]".into());
    run_surface(&surface, out)
}

/// Runs a resolved plan without touching the filesystem.
pub fn run_plan(plan: &Plan) -> Result<ExperimentReport, HarnessError> {
    let start = Instant::now();
    let mut out = Output::default();
    match plan.command {
        Command::Fk => run_fk(plan, &mut out)?,
        Command::Ik => run_ik(plan, &mut out)?,
        Command::WorkspaceCloud => run_cloud(plan, &mut out)?,
        Command::WorkspaceArea => run_area(plan, &mut out)?,
        Command::ManipSurface => run_surface(plan, &mut out)?,
        Command::ManipOpt => run_opt(plan, &mut out)?,
        Command::ManipAverage => run_average(plan, &mut out)?,
        Command::Flexibility => run_flex(plan, &mut out)?,
        Command::SweepAll => run_sweep_all(plan, &mut out)?,
    }
    Ok(ExperimentReport {
        id: plan.command.name().to_string(),
        inputs: plan.echo(),
        summary: out.summary,
        tables: out.tables,
        plots: out.plots,
        flagged: out.flagged,
        duration: start.elapsed(),
        version: VERSION.to_string(),
        seed: plan.seed,
    })
}

pub fn run(command: Command, config: &RunConfig) -> Result<ExperimentReport, HarnessError> {
    run_plan(&Plan::resolve(command, config)?)
}

/// Resolves, runs and writes artifacts; returns the report and the written paths.
pub fn execute(
    command: Command,
    config: &RunConfig,
) -> Result<(ExperimentReport, Vec<PathBuf>), HarnessError> {
    let plan = Plan::resolve(command, config)?;
    let report = run_plan(&plan)?;
    let paths = report.write_artifacts(&plan.out_dir, &plan.formats)?;
    Ok((report, paths))
}
