//! Foot-velocity Jacobian and manipulability of the swing leg.

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::leg::{Interval, JointAngles, JointLimits, LegDimensions, LimitMode};

/// Grid pitch of the global scan in [`maximize_manipulability`].
pub const SCAN_STEP_DEG: f64 = 0.25;

/// Simplex diameter (rad) at which the local polish stops.
pub const POLISH_TOLERANCE: f64 = 1e-10;

const POLISH_MAX_ITERATIONS: usize = 10_000;

/// 3x3 linear-velocity Jacobian, rows `(x, y, z)`, columns `(root, hip, knee)`, mm/rad.
pub fn jacobian(angles: &JointAngles, dims: &LegDimensions) -> Matrix3<f64> {
    let (l1, l2, l3) = (dims.coxa(), dims.femur(), dims.tibia());
    let (s1, c1) = angles.root.sin_cos();
    let (s2, c2) = angles.hip.sin_cos();
    let (s23, c23) = (angles.hip + angles.knee).sin_cos();
    let reach = l3 * c23 + l2 * c2 + l1;
    let lift = -l3 * s23 - l2 * s2;
    #[rustfmt::skip]
    let j = Matrix3::new(
        -s1 * reach, c1 * lift, c1 * (-l3 * s23),
         c1 * reach, s1 * lift, s1 * (-l3 * s23),
         0.0,        l3 * c23 + l2 * c2, l3 * c23,
    );
    j
}

/// Manipulability `|det J|` in mm^3, evaluated in factored form.
///
/// The root angle drops out; the value vanishes exactly when the knee is straight.
pub fn manipulability(angles: &JointAngles, dims: &LegDimensions) -> f64 {
    planar_manipulability(angles.hip, angles.knee, dims)
}

pub fn planar_manipulability(hip: f64, knee: f64, dims: &LegDimensions) -> f64 {
    let (l1, l2, l3) = (dims.coxa(), dims.femur(), dims.tibia());
    let (s2, c2) = hip.sin_cos();
    let (s3, c3) = knee.sin_cos();
    (-l2 * l3 * (l1 * s3 - l3 * s2 + l2 * c2 * s3 + l3 * c3 * c3 * s2 + l3 * c2 * c3 * s3)).abs()
}

/// Best configuration found by [`maximize_manipulability`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationResult {
    pub dims: LegDimensions,
    pub hip: f64,
    pub knee: f64,
    pub w_star: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximises manipulability over the hip/knee box of `bounds`.
///
/// A 0.25 degree grid scan locates the global basin; a bounded Nelder-Mead
/// polish then refines the best grid point until the simplex shrinks below
/// [`POLISH_TOLERANCE`]. The polish only accepts improvements, so the result
/// is never worse than any grid sample.
pub fn maximize_manipulability(
    dims: &LegDimensions,
    bounds: &JointLimits,
) -> Result<OptimizationResult> {
    if bounds.mode != LimitMode::Independent {
        return Err(Error::param("manipulability optimisation needs box bounds"));
    }
    let (hip_box, knee_box) = (bounds.hip, bounds.knee);
    let step = SCAN_STEP_DEG.to_radians();
    let hips = hip_box.linspace((hip_box.width() / step).ceil() as usize + 1);
    let knees = knee_box.linspace((knee_box.width() / step).ceil() as usize + 1);

    let mut best = (hips[0], knees[0], f64::NEG_INFINITY);
    for &h in &hips {
        for &k in &knees {
            let w = planar_manipulability(h, k, dims);
            if w > best.2 {
                best = (h, k, w);
            }
        }
    }

    let objective = |p: [f64; 2]| -planar_manipulability(p[0], p[1], dims);
    let polish = nelder_mead(objective, [best.0, best.1], step, [hip_box, knee_box]);
    let (hip, knee) = (polish.point[0], polish.point[1]);
    Ok(OptimizationResult {
        dims: *dims,
        hip,
        knee,
        w_star: planar_manipulability(hip, knee, dims),
        iterations: polish.iterations,
        converged: polish.converged,
    })
}

struct Polish {
    point: [f64; 2],
    iterations: usize,
    converged: bool,
}

fn clamp(p: [f64; 2], bounds: &[Interval; 2]) -> [f64; 2] {
    [
        p[0].clamp(bounds[0].min(), bounds[0].max()),
        p[1].clamp(bounds[1].min(), bounds[1].max()),
    ]
}

fn diameter(simplex: &[([f64; 2], f64); 3]) -> f64 {
    let mut d: f64 = 0.0;
    for a in simplex {
        for b in simplex {
            d = d.max((a.0[0] - b.0[0]).abs()).max((a.0[1] - b.0[1]).abs());
        }
    }
    d
}

/// Two-variable Nelder-Mead minimisation with trial points clamped to the box.
fn nelder_mead(
    f: impl Fn([f64; 2]) -> f64,
    start: [f64; 2],
    size: f64,
    bounds: [Interval; 2],
) -> Polish {
    let eval = |p: [f64; 2]| {
        let p = clamp(p, &bounds);
        (p, f(p))
    };
    let start = clamp(start, &bounds);
    // Step inward from the start so the initial simplex stays non-degenerate at box edges.
    let offset = |i: usize| {
        let mut p = start;
        p[i] = if p[i] + size <= bounds[i].max() {
            p[i] + size
        } else {
            p[i] - size
        };
        p
    };
    let mut s = [eval(start), eval(offset(0)), eval(offset(1))];

    let mut iterations = 0;
    while iterations < POLISH_MAX_ITERATIONS {
        s.sort_by(|a, b| a.1.total_cmp(&b.1));
        if diameter(&s) < POLISH_TOLERANCE {
            return Polish {
                point: s[0].0,
                iterations,
                converged: true,
            };
        }
        iterations += 1;
        let c = [(s[0].0[0] + s[1].0[0]) / 2.0, (s[0].0[1] + s[1].0[1]) / 2.0];
        let along = |t: f64| [c[0] + t * (s[2].0[0] - c[0]), c[1] + t * (s[2].0[1] - c[1])];

        let reflected = eval(along(-1.0));
        if reflected.1 < s[0].1 {
            let expanded = eval(along(-2.0));
            s[2] = if expanded.1 < reflected.1 {
                expanded
            } else {
                reflected
            };
        } else if reflected.1 < s[1].1 {
            s[2] = reflected;
        } else {
            let contracted = if reflected.1 < s[2].1 {
                eval(along(-0.5))
            } else {
                eval(along(0.5))
            };
            if contracted.1 < s[2].1.min(reflected.1) {
                s[2] = contracted;
            } else {
                let best = s[0].0;
                for v in s.iter_mut().skip(1) {
                    *v = eval([(v.0[0] + best[0]) / 2.0, (v.0[1] + best[1]) / 2.0]);
                }
            }
        }
    }
    s.sort_by(|a, b| a.1.total_cmp(&b.1));
    Polish {
        point: s[0].0,
        iterations,
        converged: false,
    }
}

/// Grid-averaged manipulability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageManipulability {
    pub value: f64,
    pub m: usize,
    pub n: usize,
    pub hip: Interval,
    pub knee: Interval,
}

fn check_grid(m: usize, n: usize) -> Result<()> {
    if m < 2 || n < 2 {
        return Err(Error::param(format!(
            "grid needs at least 2x2 samples, got {m}x{n}"
        )));
    }
    Ok(())
}

/// Mean manipulability over `m` hip values and `n` knee values, endpoints
/// included. In coupled mode the knee values span the range allowed at each hip.
pub fn average_manipulability(
    dims: &LegDimensions,
    ranges: &JointLimits,
    m: usize,
    n: usize,
) -> Result<AverageManipulability> {
    check_grid(m, n)?;
    let mut sum = 0.0;
    for hip in ranges.hip.linspace(m) {
        for knee in ranges.knee_range(hip).linspace(n) {
            sum += planar_manipulability(hip, knee, dims);
        }
    }
    Ok(AverageManipulability {
        value: sum / (m * n) as f64,
        m,
        n,
        hip: ranges.hip,
        knee: ranges.knee,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub hip: f64,
    pub knee: f64,
    pub w: f64,
}

/// Manipulability on the full `m x n` grid, hip-major.
pub fn manipulability_surface(
    dims: &LegDimensions,
    ranges: &JointLimits,
    m: usize,
    n: usize,
) -> Result<Vec<SurfacePoint>> {
    check_grid(m, n)?;
    let mut out = Vec::with_capacity(m * n);
    for hip in ranges.hip.linspace(m) {
        for knee in ranges.knee_range(hip).linspace(n) {
            out.push(SurfacePoint {
                hip,
                knee,
                w: planar_manipulability(hip, knee, dims),
            });
        }
    }
    Ok(out)
}

/// One cell of the coxa/tibia ratio sweep. `value` is `None` when the pair
/// leaves no femur (`r1 + r3 >= 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioCell {
    pub r1: f64,
    pub r3: f64,
    pub value: Option<f64>,
}

/// Average manipulability (default box, 121 x 121) over a grid of coxa and
/// tibia ratios with the femur taking the remainder of `total`.
pub fn ratio_sweep_average(
    total: f64,
    r1_values: &[f64],
    r3_values: &[f64],
) -> Result<Vec<RatioCell>> {
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::param(format!(
            "total length must be positive, got {total}"
        )));
    }
    let ranges = JointLimits::manipulability_box();
    let mut out = Vec::with_capacity(r1_values.len() * r3_values.len());
    for &r1 in r1_values {
        for &r3 in r3_values {
            let value = match LegDimensions::from_ratios(total, r1, r3) {
                Ok(dims) => Some(average_manipulability(&dims, &ranges, 121, 121)?.value),
                Err(_) => None,
            };
            out.push(RatioCell { r1, r3, value });
        }
    }
    Ok(out)
}
