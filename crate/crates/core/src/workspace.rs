//! Foot workspace of the swing leg.
//!
//! Three views are provided: a Monte Carlo cloud of 3D foot points from
//! uniform joint-space samples, the planar locus at `root = 0`, and the
//! area of the improved (knee coupled to hip) planar region. The area has
//! a closed form `2*pi*l2*l3/3` and an independent raster estimate.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::leg::{
    forward_kinematics, FootPoint, Interval, JointAngles, JointLimits, LegDimensions,
};

/// Samples drawn from one PRNG stream; stream `k` covers samples `k*CHUNK..(k+1)*CHUNK`.
const CHUNK: usize = 1 << 16;

/// Monte Carlo foot cloud in the leg-root frame.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkspaceCloud {
    pub angles: Vec<JointAngles>,
    pub points: Vec<FootPoint>,
    pub seed: u64,
}

impl WorkspaceCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Draws `n` uniform joint samples inside `limits` and maps them through forward kinematics.
///
/// Sampling uses ChaCha8 seeded with `seed`, one stream per 65536-sample
/// chunk, so a given sample index always sees the same random numbers.
/// In coupled mode the knee is drawn uniformly from the range allowed by
/// the sampled hip angle.
pub fn monte_carlo_cloud(
    dims: &LegDimensions,
    limits: &JointLimits,
    n: usize,
    seed: u64,
) -> Result<WorkspaceCloud> {
    if n == 0 {
        return Err(Error::param("sample count must be at least 1"));
    }
    let mut angles = Vec::with_capacity(n);
    for chunk in 0..n.div_ceil(CHUNK) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk as u64);
        let count = CHUNK.min(n - chunk * CHUNK);
        for _ in 0..count {
            let root = limits.root.lerp(rng.gen::<f64>());
            let hip = limits.hip.lerp(rng.gen::<f64>());
            let knee = limits.knee_range(hip).lerp(rng.gen::<f64>());
            angles.push(JointAngles::new(root, hip, knee));
        }
    }
    let points = angles.iter().map(|q| forward_kinematics(q, dims)).collect();
    Ok(WorkspaceCloud {
        angles,
        points,
        seed,
    })
}

/// Foot position `(x, z)` in the leg plane with the root joint at zero.
pub fn foot_locus_2d(hip: f64, knee: f64, dims: &LegDimensions) -> (f64, f64) {
    let x = dims.tibia() * (hip + knee).cos() + dims.femur() * hip.cos() + dims.coxa();
    let z = dims.tibia() * (hip + knee).sin() + dims.femur() * hip.sin();
    (x, z)
}

/// Knee interval of the improved workspace for a hip angle in [-pi/3, pi/3].
pub fn improved_knee_range(hip: f64) -> Result<Interval> {
    if hip.is_nan() || hip.abs() > FRAC_PI_3 + 1e-12 {
        return Err(Error::param(format!(
            "hip angle {hip} outside [-pi/3, pi/3]"
        )));
    }
    Interval::new(-hip - FRAC_PI_2, 0.0)
}

/// Closed-form improved-workspace area for given femur and tibia lengths (mm^2).
pub fn improved_area(femur: f64, tibia: f64) -> f64 {
    2.0 * PI * femur * tibia / 3.0
}

/// Closed-form improved-workspace area; the coxa length does not enter.
pub fn improved_area_analytic(dims: &LegDimensions) -> f64 {
    improved_area(dims.femur(), dims.tibia())
}

/// Occupancy raster of the planar foot locus.
#[derive(Debug, Clone)]
pub struct PlanarRegion {
    pub cell: f64,
    /// World coordinates of the lower-left corner of cell (0, 0).
    pub origin: (f64, f64),
    pub nx: usize,
    pub nz: usize,
    occupied: Vec<bool>,
}

impl PlanarRegion {
    /// Marks every cell hit by a dense sweep of the locus over the hip/knee limits.
    ///
    /// Hip steps are at most `cell / (2 (l2 + l3))` and knee steps at most
    /// `cell / (2 l3)`, so consecutive samples move the foot by less than
    /// half a cell and the raster has no gaps.
    pub fn rasterize(dims: &LegDimensions, limits: &JointLimits, cell: f64) -> Result<Self> {
        if !(cell.is_finite() && cell > 0.0) {
            return Err(Error::param(format!(
                "cell size must be positive, got {cell}"
            )));
        }
        let reach = dims.femur() + dims.tibia();
        let origin = (dims.coxa() - reach - cell, -reach - cell);
        let span = 2.0 * (reach + cell);
        let nx = (span / cell).ceil() as usize + 1;
        let nz = nx;
        let mut occupied = vec![false; nx * nz];

        let hip_step = cell / (2.0 * reach);
        let knee_step = cell / (2.0 * dims.tibia());
        let hips = limits.hip.linspace(steps(limits.hip.width(), hip_step) + 1);
        for hip in hips {
            let knee_range = limits.knee_range(hip);
            for knee in knee_range.linspace(steps(knee_range.width(), knee_step) + 1) {
                let (x, z) = foot_locus_2d(hip, knee, dims);
                let i = ((x - origin.0) / cell).floor() as usize;
                let j = ((z - origin.1) / cell).floor() as usize;
                occupied[j * nx + i] = true;
            }
        }
        Ok(Self {
            cell,
            origin,
            nx,
            nz,
            occupied,
        })
    }

    pub fn is_occupied(&self, i: usize, j: usize) -> bool {
        i < self.nx && j < self.nz && self.occupied[j * self.nx + i]
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|o| **o).count()
    }

    /// Occupied cells whose eight neighbours are all occupied.
    pub fn interior_count(&self) -> usize {
        let mut count = 0;
        for j in 1..self.nz.saturating_sub(1) {
            for i in 1..self.nx.saturating_sub(1) {
                if !self.is_occupied(i, j) {
                    continue;
                }
                let full =
                    (j - 1..=j + 1).all(|jj| (i - 1..=i + 1).all(|ii| self.is_occupied(ii, jj)));
                if full {
                    count += 1;
                }
            }
        }
        count
    }

    /// Occupied-cell count times cell area. Overestimates by roughly perimeter * cell.
    pub fn raw_area(&self) -> f64 {
        self.occupied_count() as f64 * self.cell * self.cell
    }

    /// Interior cells count fully, boundary cells count half.
    pub fn area(&self) -> f64 {
        let interior = self.interior_count() as f64;
        let boundary = self.occupied_count() as f64 - interior;
        (interior + 0.5 * boundary) * self.cell * self.cell
    }

    /// Centres of the occupied cells, row by row.
    pub fn occupied_centers(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for j in 0..self.nz {
            for i in 0..self.nx {
                if self.is_occupied(i, j) {
                    out.push((
                        self.origin.0 + (i as f64 + 0.5) * self.cell,
                        self.origin.1 + (j as f64 + 0.5) * self.cell,
                    ));
                }
            }
        }
        out
    }
}

fn steps(width: f64, max_step: f64) -> usize {
    ((width / max_step).ceil() as usize).max(1)
}

/// Raster estimate of the planar workspace area (mm^2).
pub fn area_numeric_oracle(dims: &LegDimensions, limits: &JointLimits, cell: f64) -> Result<f64> {
    let region = PlanarRegion::rasterize(dims, limits, cell)?;
    let cells = region.occupied_count();
    if cells < 4 {
        return Err(Error::Resolution { cells });
    }
    Ok(region.area())
}

/// Closed boundary of the planar region: the image of the edges of the
/// hip/knee parameter domain, walked counter-clockwise in parameter space.
pub fn boundary_polyline(
    dims: &LegDimensions,
    limits: &JointLimits,
    per_edge: usize,
) -> Vec<(f64, f64)> {
    let per_edge = per_edge.max(2);
    let hip = limits.hip.linspace(per_edge);
    let mut out = Vec::with_capacity(4 * per_edge);
    for &h in &hip {
        out.push(foot_locus_2d(h, limits.knee_range(h).max(), dims));
    }
    let top = limits.knee_range(limits.hip.max());
    for &k in top.linspace(per_edge).iter().rev().skip(1) {
        out.push(foot_locus_2d(limits.hip.max(), k, dims));
    }
    for &h in hip.iter().rev().skip(1) {
        out.push(foot_locus_2d(h, limits.knee_range(h).min(), dims));
    }
    let bottom = limits.knee_range(limits.hip.min());
    for &k in bottom.linspace(per_edge).iter().skip(1) {
        out.push(foot_locus_2d(limits.hip.min(), k, dims));
    }
    out
}

/// Closed-form versus raster area for one leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaReport {
    pub analytic: f64,
    pub numeric: f64,
    pub gap: f64,
}

pub fn improved_area_report(dims: &LegDimensions, cell: f64) -> Result<AreaReport> {
    let analytic = improved_area_analytic(dims);
    let numeric = area_numeric_oracle(dims, &JointLimits::improved(), cell)?;
    Ok(AreaReport {
        analytic,
        numeric,
        gap: (analytic - numeric).abs() / analytic,
    })
}

/// One row of the coxa-ratio sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaRow {
    pub coxa_ratio: f64,
    pub dims: LegDimensions,
    pub area: f64,
}

/// Improved area as the coxa ratio varies, femur and tibia split evenly.
pub fn coxa_ratio_area_sweep(total: f64, coxa_ratios: &[f64]) -> Result<Vec<AreaRow>> {
    coxa_ratios
        .iter()
        .map(|&r1| {
            if !(r1 > 0.0 && r1 < 1.0) {
                return Err(Error::param(format!("coxa ratio {r1} outside (0, 1)")));
            }
            let dims = LegDimensions::from_ratios(total, r1, (1.0 - r1) / 2.0)?;
            Ok(AreaRow {
                coxa_ratio: r1,
                dims,
                area: improved_area_analytic(&dims),
            })
        })
        .collect()
}

/// Femur/tibia split of `combined` that maximises the improved area.
pub fn optimal_femur_tibia_split(combined: f64) -> Result<(f64, f64)> {
    if !(combined.is_finite() && combined > 0.0) {
        return Err(Error::param(format!(
            "combined length must be positive, got {combined}"
        )));
    }
    Ok((combined / 2.0, combined / 2.0))
}
