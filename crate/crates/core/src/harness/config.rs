//! Run configuration: a TOML file with one table per experiment family.
//! Every key is optional; unknown keys are rejected with their location.
//!
//! ```toml
//! seed = 7
//!
//! [leg]
//! dims_mm = [200.0, 400.0, 400.0]   # omit to run the ratio sweep
//! total_mm = 1000.0
//! angles_deg = [0.0, 0.0, -90.0]    # fk; or angles_rad
//! point_mm = [600.0, 0.0, -400.0]   # ik
//!
//! [limits]
//! set = "custom"                    # table2 | improved | manipulability | flexibility | custom
//! root_deg = [-90.0, 90.0]
//! hip_deg = [-60.0, 60.0]
//! knee_deg = [-135.0, -15.0]
//!
//! [workspace]
//! samples = 1000000
//! cell_mm = 2.0
//! coxa_ratios = [0.05, 0.10, 0.15, 0.20]
//!
//! [manipulability]
//! grid = [121, 121]
//! coxa_ratios = [0.05, 0.10, 0.15, 0.20]
//! tibia_ratio_range = [0.20, 0.70, 0.01]
//!
//! [flexibility]
//! body_radius_mm = 400.0
//! half_height_mm = 50.0
//! coxa_ratios = [0.05, 0.10, 0.15, 0.20]
//! tibia_ratio_range = [0.25, 0.65, 0.05]
//! translation_resolution_mm = 0.01
//! rotation_resolution_deg = 0.001
//!
//! [output]
//! dir = "out"
//! formats = ["csv", "svg"]
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::HarnessError;

pub const DEFAULT_SEED: u64 = 20240601;
pub const DEFAULT_TOTAL_MM: f64 = 1000.0;
pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const DEFAULT_CELL_MM: f64 = 2.0;
pub const DEFAULT_COXA_RATIOS: [f64; 4] = [0.05, 0.10, 0.15, 0.20];
pub const DEFAULT_MANIP_TIBIA_RANGE: [f64; 3] = [0.20, 0.70, 0.01];
pub const DEFAULT_FLEX_TIBIA_RANGE: [f64; 3] = [0.25, 0.65, 0.05];
pub const OUT_DIR_ENV: &str = "HEXLEG_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LimitSet {
    Table2,
    Improved,
    Manipulability,
    Flexibility,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LegSection {
    pub dims_mm: Option<[f64; 3]>,
    pub total_mm: Option<f64>,
    pub angles_deg: Option<[f64; 3]>,
    pub angles_rad: Option<[f64; 3]>,
    pub point_mm: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitsSection {
    pub set: Option<LimitSet>,
    pub root_deg: Option<[f64; 2]>,
    pub hip_deg: Option<[f64; 2]>,
    pub knee_deg: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkspaceSection {
    pub samples: Option<usize>,
    pub cell_mm: Option<f64>,
    pub coxa_ratios: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManipulabilitySection {
    pub grid: Option<[usize; 2]>,
    pub coxa_ratios: Option<Vec<f64>>,
    pub tibia_ratio_range: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlexibilitySection {
    pub body_radius_mm: Option<f64>,
    pub half_height_mm: Option<f64>,
    pub coxa_ratios: Option<Vec<f64>>,
    pub tibia_ratio_range: Option<[f64; 3]>,
    pub translation_resolution_mm: Option<f64>,
    pub rotation_resolution_deg: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
}

/// Everything a run can be told. Unset fields fall back to the defaults
/// when the plan is resolved.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub leg: LegSection,
    pub limits: LimitsSection,
    pub workspace: WorkspaceSection,
    pub manipulability: ManipulabilitySection,
    pub flexibility: FlexibilitySection,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Applies the output-directory environment override, if set.
    pub fn apply_env(&mut self) {
        self.apply_env_value(std::env::var_os(OUT_DIR_ENV).map(PathBuf::from));
    }

    pub fn apply_env_value(&mut self, dir: Option<PathBuf>) {
        if let Some(dir) = dir.filter(|d| !d.as_os_str().is_empty()) {
            self.output.dir = Some(dir);
        }
    }
}

/// Expands `[start, stop, step]` into an inclusive list, rounding to the
/// step's decimal places so that e.g. 0.45 comes out as exactly 0.45.
pub fn expand_range(range: [f64; 3]) -> Result<Vec<f64>, HarnessError> {
    let [start, stop, step] = range;
    if !(start.is_finite() && stop.is_finite() && step.is_finite() && step > 0.0 && stop >= start) {
        return Err(HarnessError::Config(format!(
            "range [{start}, {stop}, {step}] needs finite start <= stop and step > 0"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(HarnessError::Config(format!(
            "range [{start}, {stop}, {step}] has {count} values"
        )));
    }
    let scale = 1e9;
    Ok((0..count)
        .map(|k| ((start + k as f64 * step) * scale).round() / scale)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let doc = include_str!("config.rs")
            .lines()
            .filter_map(|l| l.strip_prefix("//! "))
            .skip_while(|l| !l.starts_with("seed"))
            .take_while(|l| !l.starts_with("```"))
            .collect::<Vec<_>>()
            .join("\n");
        let cfg = RunConfig::from_toml(&doc).unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.leg.dims_mm, Some([200.0, 400.0, 400.0]));
        assert_eq!(cfg.limits.set, Some(LimitSet::Custom));
        assert_eq!(cfg.output.formats, Some(vec![Format::Csv, Format::Svg]));
    }

    #[test]
    fn unknown_key_reports_location() {
        let err =
            RunConfig::from_toml("[leg]\ndims_mm = [1.0, 2.0, 3.0]\nfemur = 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("femur") && msg.contains("line 3"), "{msg}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn env_override_only_when_set() {
        let mut cfg = RunConfig::default();
        cfg.output.dir = Some("from_config".into());
        cfg.apply_env_value(None);
        assert_eq!(cfg.output.dir, Some(PathBuf::from("from_config")));
        cfg.apply_env_value(Some("from_env".into()));
        assert_eq!(cfg.output.dir, Some(PathBuf::from("from_env")));
    }

    #[test]
    fn ranges_are_inclusive_and_clean() {
        let r = expand_range([0.20, 0.70, 0.01]).unwrap();
        assert_eq!(r.len(), 51);
        assert_eq!(r[25], 0.45);
        assert_eq!(r[50], 0.70);
        assert_eq!(expand_range([0.25, 0.65, 0.05]).unwrap().len(), 9);
        assert!(expand_range([0.5, 0.4, 0.1]).is_err());
    }
}
