//! Hierarchical diverging codebooks: virtual focal points, frustum and
//! conical-shell regions, distance rings, and refinement-point sampling.
//!
//! Level-`m` focal points sit behind the array on a `2^m x 2^m` grid. The
//! bright region of each diverging codeword is the projection of the
//! aperture through the focal point: an unbounded rectangular pyramidal
//! frustum for full-array codewords, a partial conical shell for
//! axis-restricted ones. Adjacent regions at one level overlap by an
//! aperture width, and each region is exactly the union of its four (or
//! two) children, which is what makes the descent sound.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ArrayConfig, DirectionTriplet, Point3};
use crate::seed;
use crate::wavefield::Axis;

use rand::Rng;

/// Index of one frustum region / focal point at a codebook level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrustumIndex {
    /// Codebook level, `>= 1`.
    pub level: u32,
    /// Column index in `1..=2^level`.
    pub x: u32,
    /// Row index in `1..=2^level`.
    pub z: u32,
}

impl FrustumIndex {
    pub fn new(level: u32, x: u32, z: u32) -> Result<Self> {
        let n = 1u32 << level;
        if level < 1 || x < 1 || x > n || z < 1 || z > n {
            return Err(Error::domain(format!(
                "frustum index ({x}, {z}) out of range for level {level}"
            )));
        }
        Ok(FrustumIndex { level, x, z })
    }
}

/// Index of one conical-shell region / axis focal point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShellIndex {
    pub level: u32,
    /// Index in `1..=2^level`.
    pub idx: u32,
    pub axis: Axis,
}

impl ShellIndex {
    pub fn new(level: u32, idx: u32, axis: Axis) -> Result<Self> {
        if level < 1 || idx < 1 || idx > (1u32 << level) {
            return Err(Error::domain(format!(
                "shell index {idx} out of range for level {level}"
            )));
        }
        Ok(ShellIndex { level, idx, axis })
    }
}

/// Virtual focal point of the level-`m` UPA diverging codebook entry.
pub fn virtual_focal_point(cfg: &ArrayConfig, fi: FrustumIndex) -> Point3 {
    let m = fi.level;
    let side = (1u64 << m) as f64;
    Point3::new(
        (2.0 * fi.x as f64 - side - 1.0) / 2.0 * cfg.aperture_x(),
        -((1u64 << (m - 1)) as f64) * cfg.min_aperture(),
        (2.0 * fi.z as f64 - side - 1.0) / 2.0 * cfg.aperture_z(),
    )
}

/// Virtual focal point of a central-ULA diverging codebook entry. The
/// horizontal points sit on the x-y plane, the vertical ones on the y-z
/// plane, at depth scaled by that axis' own aperture.
pub fn axis_focal_point(cfg: &ArrayConfig, si: ShellIndex) -> Point3 {
    let side = (1u64 << si.level) as f64;
    let depth_scale = (1u64 << (si.level - 1)) as f64;
    let off = (2.0 * si.idx as f64 - side - 1.0) / 2.0;
    match si.axis {
        Axis::Horizontal => Point3::new(
            off * cfg.aperture_x(),
            -depth_scale * cfg.aperture_x(),
            0.0,
        ),
        Axis::Vertical => Point3::new(
            0.0,
            -depth_scale * cfg.aperture_z(),
            off * cfg.aperture_z(),
        ),
    }
}

/// The four level-`m+1` children whose regions tile a frustum exactly.
pub fn child_indices(fi: FrustumIndex) -> [FrustumIndex; 4] {
    let m = fi.level + 1;
    let (x, z) = (fi.x, fi.z);
    [
        FrustumIndex { level: m, x: 2 * x - 1, z: 2 * z - 1 },
        FrustumIndex { level: m, x: 2 * x - 1, z: 2 * z },
        FrustumIndex { level: m, x: 2 * x, z: 2 * z - 1 },
        FrustumIndex { level: m, x: 2 * x, z: 2 * z },
    ]
}

/// Rectangle bounds of the diverging bright region at depth `y` for an
/// arbitrary virtual focal point `v` (the aperture projected through `v`).
pub fn region_bounds_at_depth(
    cfg: &ArrayConfig,
    v: Point3,
    y: f64,
) -> ((f64, f64), (f64, f64)) {
    let t = y / v.y; // negative
    let hx = cfg.aperture_x() / 2.0;
    let hz = cfg.aperture_z() / 2.0;
    (
        ((v.x + hx) * t - hx, (v.x - hx) * t + hx),
        ((v.z + hz) * t - hz, (v.z - hz) * t + hz),
    )
}

/// Bright-region membership for an arbitrary virtual focal point, with the
/// half-open tie rule (lower/left boundaries inclusive).
pub fn diverging_region_contains(cfg: &ArrayConfig, v: Point3, p: Point3) -> bool {
    if !(p.y > 0.0) {
        return false;
    }
    let ((xlo, xhi), (zlo, zhi)) = region_bounds_at_depth(cfg, v, p.y);
    p.x >= xlo && p.x < xhi && p.z >= zlo && p.z < zhi
}

/// Frustum-region membership for a codebook entry.
pub fn frustum_contains(cfg: &ArrayConfig, fi: FrustumIndex, p: Point3) -> bool {
    diverging_region_contains(cfg, virtual_focal_point(cfg, fi), p)
}

/// Conical-shell membership for an arbitrary axis focal point: the angle
/// conditions against the ULA endpoints, half-open like the frustum rule.
pub fn shell_region_contains(cfg: &ArrayConfig, axis: Axis, v: Point3, p: Point3) -> bool {
    if !(p.y > 0.0) {
        return false;
    }
    // cos of the angle against the negative axis direction, negated: the
    // conditions compare axis components normalized by vector length.
    let (half, coord): (f64, fn(Point3) -> f64) = match axis {
        Axis::Horizontal => (cfg.aperture_x() / 2.0, |q| q.x),
        Axis::Vertical => (cfg.aperture_z() / 2.0, |q| q.z),
    };
    let endpoint = |s: f64| -> Point3 {
        match axis {
            Axis::Horizontal => Point3::new(s * half, 0.0, 0.0),
            Axis::Vertical => Point3::new(0.0, 0.0, s * half),
        }
    };
    let e1 = endpoint(-1.0);
    let e2 = endpoint(1.0);
    let dir = |w: Point3| coord(w) / w.norm();
    // xi_1 >= xi_v1  <=>  dir(p - e1) >= dir(e1 - v)   (angles vs -axis)
    let lower = dir(p.sub(e1)) >= dir(e1.sub(v));
    let upper = dir(p.sub(e2)) < dir(e2.sub(v));
    lower && upper
}

/// Shell membership for a codebook entry.
pub fn shell_contains(cfg: &ArrayConfig, si: ShellIndex, p: Point3) -> bool {
    shell_region_contains(cfg, si.axis, axis_focal_point(cfg, si), p)
}

/// Slope bounds (in tangent units at half-aperture offset) of the level-`m`
/// frustum `t` along one axis: the region is
/// `{ uL*y - D/2 <= x < uR*y + D/2 }`.
pub fn frustum_slope_bounds(cfg: &ArrayConfig, m: u32, t: u32, axis: Axis) -> (f64, f64) {
    let d = match axis {
        Axis::Horizontal => cfg.aperture_x(),
        Axis::Vertical => cfg.aperture_z(),
    };
    let c = d / cfg.min_aperture();
    let half = (1u64 << (m - 1)) as f64;
    (
        c * (1.0 - t as f64 / half),
        c * (1.0 - (t as f64 - 1.0) / half),
    )
}

/// Slope bounds of the level-`m` shell `t`; shells always span slopes in
/// `[-1, 1]` regardless of aspect ratio, the coordinate being the offset
/// against the cone radius `sqrt(y^2 + other^2)`.
pub fn shell_slope_bounds(m: u32, t: u32) -> (f64, f64) {
    let half = (1u64 << (m - 1)) as f64;
    (1.0 - t as f64 / half, 1.0 - (t as f64 - 1.0) / half)
}

/// The level-`m` frustum whose tie-rule partition cell contains `p`; the
/// partition drops the half-aperture offsets so each point gets exactly one
/// cell, and the cell is always a subset of the frustum region.
pub fn frustum_assign(cfg: &ArrayConfig, m: u32, p: Point3) -> Result<FrustumIndex> {
    if !(p.y > 0.0) {
        return Err(Error::domain("partition is defined for y > 0"));
    }
    let assign = |tan: f64, axis: Axis| -> u32 {
        let d = match axis {
            Axis::Horizontal => cfg.aperture_x(),
            Axis::Vertical => cfg.aperture_z(),
        };
        let u = tan / (d / cfg.min_aperture());
        dyadic_cell(m, u)
    };
    Ok(FrustumIndex {
        level: m,
        x: assign(p.x / p.y, Axis::Horizontal),
        z: assign(p.z / p.y, Axis::Vertical),
    })
}

/// The level-`m` shell whose partition cell contains `p`, using the cone
/// coordinate `x / sqrt(y^2 + z^2)` (resp. `z / sqrt(y^2 + x^2)`).
pub fn shell_assign(cfg: &ArrayConfig, m: u32, axis: Axis, p: Point3) -> Result<ShellIndex> {
    let _ = cfg;
    if !(p.y > 0.0) {
        return Err(Error::domain("partition is defined for y > 0"));
    }
    let u = match axis {
        Axis::Horizontal => p.x / p.y.hypot(p.z),
        Axis::Vertical => p.z / p.y.hypot(p.x),
    };
    Ok(ShellIndex { level: m, idx: dyadic_cell(m, u), axis })
}

/// Index of the half-open dyadic cell `[1 - t/2^{m-1}, 1 - (t-1)/2^{m-1})`
/// containing `u`, clamped into range.
fn dyadic_cell(m: u32, u: f64) -> u32 {
    let half = (1u64 << (m - 1)) as f64;
    let t = ((1.0 - u) * half).ceil();
    (t.max(1.0) as u32).min(1u32 << m)
}

/// Distance ring `y_k = 2^{M-1} min(D_x, D_z) / (2k - 1)`; `k = 0` is the
/// unbounded outermost ring.
pub fn yk_distance(cfg: &ArrayConfig, m_levels: u32, k: u32) -> f64 {
    if k == 0 {
        return f64::INFINITY;
    }
    (1u64 << (m_levels - 1)) as f64 * cfg.min_aperture() / (2.0 * k as f64 - 1.0)
}

/// Tangent of the `i`-th angular grid ray (1-based) at level `m_levels`.
pub fn grid_tangent(m_levels: u32, i: u32) -> f64 {
    (2.0 * i as f64 - 1.0) / (1u64 << m_levels) as f64 - 1.0
}

/// Closed Lemma-1 index bounds `[max(1, floor(f_min)), min(2^M, ceil(f_max))]`
/// for the sampling range of one axis; the guarantee tested by the coverage
/// oracle.
pub fn lemma_angle_index_bounds(
    cfg: &ArrayConfig,
    m_levels: u32,
    t: u32,
    k: u32,
    axis: Axis,
) -> (u32, u32) {
    let d = match axis {
        Axis::Horizontal => cfg.aperture_x(),
        Axis::Vertical => cfg.aperture_z(),
    };
    let dmin = cfg.min_aperture();
    let grid = (1u64 << m_levels) as f64;
    let f_min = (dmin + d) * (grid + 1.0) / (2.0 * dmin) - d * (t + k) as f64 / dmin;
    let f_max = (dmin + d) * (grid + 1.0) / (2.0 * dmin) - d * (t as f64 - k as f64) / dmin;
    (
        (f_min.floor().max(1.0)) as u32,
        (f_max.ceil().min(grid)) as u32,
    )
}

/// Strictly-interior grid indices of an open tangent interval, clamped to
/// the grid; boundary coincidences (exact for square arrays) are excluded.
fn indices_strictly_inside(m_levels: u32, lo: f64, hi: f64) -> Option<(u32, u32)> {
    const TOL: f64 = 1e-12;
    let grid = (1u64 << m_levels) as f64;
    let to_coord = |g: f64| ((g + 1.0) * grid + 1.0) / 2.0;
    let mut i_min = to_coord(lo).floor() as i64 + 1;
    let mut i_max = to_coord(hi).ceil() as i64 - 1;
    while i_min <= grid as i64 && grid_tangent(m_levels, i_min.max(1) as u32) <= lo + TOL {
        i_min += 1;
    }
    while i_max >= 1 && grid_tangent(m_levels, i_max.min(grid as i64) as u32) >= hi - TOL {
        i_max -= 1;
    }
    let i_min = i_min.max(1) as u32;
    let i_max = i_max.min(grid as i64).max(0) as u32;
    (i_min <= i_max).then_some((i_min, i_max))
}

/// Whether a refinement plan came from the two-phase frustum flow or the
/// three-phase rod flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanSource {
    TwoPhaseFrustum,
    ThreePhaseRod,
}

/// One candidate focus point of a refinement plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementPoint {
    /// Ring index the point was sampled on.
    pub k: u32,
    pub focus: DirectionTriplet,
}

/// The focusing-codeword candidates swept during the refinement phase.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinementPlan {
    pub focus_points: Vec<RefinementPoint>,
    pub k_set: Vec<u32>,
    pub source: PlanSource,
}

impl RefinementPlan {
    pub fn len(&self) -> usize {
        self.focus_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.focus_points.is_empty()
    }

    /// Audit export: one `(k, y_m, phi_rad, theta_rad)` row per point.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "k,y_m,phi_rad,theta_rad")?;
        for p in &self.focus_points {
            writeln!(
                out,
                "{},{:.9},{:.9},{:.9}",
                p.k, p.focus.y_m, p.focus.phi_rad, p.focus.theta_rad
            )?;
        }
        Ok(())
    }
}

fn check_k_set(k_set: &[u32]) -> Result<()> {
    if k_set.is_empty() {
        return Err(Error::domain("refinement k_set must be non-empty"));
    }
    if k_set.windows(2).any(|w| w[0] >= w[1]) || k_set[0] == 0 {
        return Err(Error::domain("refinement k_set must be ascending and positive"));
    }
    Ok(())
}

/// Refinement plan for an identified frustum: for each ring `y_k`, every
/// angular grid point strictly inside the frustum cross-section at that
/// depth. The cross-section boundaries coincide with grid rays for square
/// arrays, so the interior holds `(2k-1)^2` points away from the grid edge.
pub fn refinement_plan_frustum(
    cfg: &ArrayConfig,
    m_levels: u32,
    fi: FrustumIndex,
    k_set: &[u32],
) -> Result<RefinementPlan> {
    check_k_set(k_set)?;
    if fi.level != m_levels {
        return Err(Error::domain("frustum index must be at the final level"));
    }
    let mut points = Vec::new();
    for &k in k_set {
        let y = yk_distance(cfg, m_levels, k);
        let range = |t: u32, axis: Axis| -> Option<(u32, u32)> {
            let d = match axis {
                Axis::Horizontal => cfg.aperture_x(),
                Axis::Vertical => cfg.aperture_z(),
            };
            let (ul, ur) = frustum_slope_bounds(cfg, m_levels, t, axis);
            indices_strictly_inside(m_levels, ul - d / (2.0 * y), ur + d / (2.0 * y))
        };
        let (Some(rx), Some(rz)) = (range(fi.x, Axis::Horizontal), range(fi.z, Axis::Vertical))
        else {
            continue;
        };
        for i in rx.0..=rx.1 {
            for j in rz.0..=rz.1 {
                points.push(RefinementPoint {
                    k,
                    focus: DirectionTriplet::new(
                        y,
                        grid_tangent(m_levels, i).atan(),
                        grid_tangent(m_levels, j).atan(),
                    ),
                });
            }
        }
    }
    Ok(RefinementPlan {
        focus_points: points,
        k_set: k_set.to_vec(),
        source: PlanSource::TwoPhaseFrustum,
    })
}

fn rod_cross_section_inside(
    cfg: &ArrayConfig,
    x_m: u32,
    z_m: u32,
    m_levels: u32,
    y: f64,
    gx: f64,
    gz: f64,
) -> bool {
    let _ = m_levels;
    let (ulh, urh) = shell_slope_bounds(m_levels, x_m);
    let (ulv, urv) = shell_slope_bounds(m_levels, z_m);
    let x = y * gx;
    let z = y * gz;
    let rho_z = y.hypot(z);
    let rho_x = y.hypot(x);
    let hx = cfg.aperture_x() / 2.0;
    let hz = cfg.aperture_z() / 2.0;
    x > ulh * rho_z - hx && x < urh * rho_z + hx && z > ulv * rho_x - hz && z < urv * rho_x + hz
}

/// Refinement plan for a rod-like region (intersection of an identified
/// horizontal and vertical shell): for each ring, every angular grid point
/// whose position at depth `y_k` lies strictly inside the intersection.
/// Rings with an empty cross-section contribute nothing; if every ring is
/// empty, the plan falls back to the rod's central direction on the
/// innermost sampled ring so a training run always has a candidate.
pub fn refinement_plan_rod(
    cfg: &ArrayConfig,
    m_levels: u32,
    x_m: u32,
    z_m: u32,
    k_set: &[u32],
) -> Result<RefinementPlan> {
    check_k_set(k_set)?;
    let grid = 1u32 << m_levels;
    if x_m < 1 || x_m > grid || z_m < 1 || z_m > grid {
        return Err(Error::domain("shell indices out of range"));
    }
    let mut points = Vec::new();
    for &k in k_set {
        let y = yk_distance(cfg, m_levels, k);
        let (ulh, urh) = shell_slope_bounds(m_levels, x_m);
        let (ulv, urv) = shell_slope_bounds(m_levels, z_m);
        // bounding tangent window: cone radius within the serving region is
        // at most sqrt(2) * y, and the aperture margin widens both sides
        let bound = |ul: f64, ur: f64, half: f64| -> (f64, f64) {
            let lo = if ul >= 0.0 { ul } else { ul * std::f64::consts::SQRT_2 };
            let hi = if ur >= 0.0 { ur * std::f64::consts::SQRT_2 } else { ur };
            (lo - half / y, hi + half / y)
        };
        let (xlo, xhi) = bound(ulh, urh, cfg.aperture_x() / 2.0);
        let (zlo, zhi) = bound(ulv, urv, cfg.aperture_z() / 2.0);
        let window = |lo: f64, hi: f64| -> (u32, u32) {
            let g = (1u64 << m_levels) as f64;
            let a = (((lo + 1.0) * g + 1.0) / 2.0).floor().max(1.0) as u32;
            let b = (((hi + 1.0) * g + 1.0) / 2.0).ceil().min(g) as u32;
            (a, b)
        };
        let (ax, bx) = window(xlo, xhi);
        let (az, bz) = window(zlo, zhi);
        for i in ax..=bx {
            let gx = grid_tangent(m_levels, i);
            for j in az..=bz {
                let gz = grid_tangent(m_levels, j);
                if rod_cross_section_inside(cfg, x_m, z_m, m_levels, y, gx, gz) {
                    points.push(RefinementPoint {
                        k,
                        focus: DirectionTriplet::new(y, gx.atan(), gz.atan()),
                    });
                }
            }
        }
    }
    if points.is_empty() {
        // central direction of the rod: fixpoint of the coupled cone centers
        let uch = {
            let (a, b) = shell_slope_bounds(m_levels, x_m);
            (a + b) / 2.0
        };
        let ucv = {
            let (a, b) = shell_slope_bounds(m_levels, z_m);
            (a + b) / 2.0
        };
        let (mut tx, mut tz) = (uch, ucv);
        for _ in 0..8 {
            tx = uch * (1.0 + tz * tz).sqrt();
            tz = ucv * (1.0 + tx * tx).sqrt();
        }
        let k = *k_set.last().unwrap();
        let y = yk_distance(cfg, m_levels, k);
        points.push(RefinementPoint {
            k,
            focus: DirectionTriplet::new(y, tx.clamp(-1.0, 1.0).atan(), tz.clamp(-1.0, 1.0).atan()),
        });
    }
    Ok(RefinementPlan {
        focus_points: points,
        k_set: k_set.to_vec(),
        source: PlanSource::ThreePhaseRod,
    })
}

/// Region families used by coverage checks and identification experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionKind {
    /// Full-array diverging rectangle (frustum cross-section).
    FrustumRect,
    /// Axis-restricted conical shell.
    Shell(Axis),
}

/// Membership of `p` in the bright region of focal point `v` under the
/// given region family.
pub fn region_contains(cfg: &ArrayConfig, kind: RegionKind, v: Point3, p: Point3) -> bool {
    match kind {
        RegionKind::FrustumRect => diverging_region_contains(cfg, v, p),
        RegionKind::Shell(axis) => shell_region_contains(cfg, axis, v, p),
    }
}

/// Checks that the union of the given focal points' regions covers the
/// sampled plane at `y_plane` (the coverage constraint for identification).
pub fn coverage_check_points(
    cfg: &ArrayConfig,
    focal_points: &[Point3],
    kind: RegionKind,
    y_plane: f64,
    samples: usize,
    seed: u64,
) -> Result<bool> {
    if samples < 1_000 {
        return Err(Error::domain("coverage check needs at least 1e3 samples"));
    }
    let mut rng = seed::stream_rng(seed, 0xC0FE);
    let half = y_plane;
    for _ in 0..samples {
        let p = Point3::new(
            rng.gen_range(-half..half),
            y_plane,
            rng.gen_range(-half..half),
        );
        if !focal_points.iter().any(|&v| region_contains(cfg, kind, v, p)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Coverage of the sampled plane by the complete level-`m` UPA codebook.
pub fn coverage_check(
    cfg: &ArrayConfig,
    level: u32,
    y_plane: f64,
    samples: usize,
    seed: u64,
) -> Result<bool> {
    let side = 1u32 << level;
    let mut points = Vec::with_capacity((side * side) as usize);
    for x in 1..=side {
        for z in 1..=side {
            points.push(virtual_focal_point(cfg, FrustumIndex { level, x, z }));
        }
    }
    coverage_check_points(cfg, &points, RegionKind::FrustumRect, y_plane, samples, seed)
}

/// Coverage of the sampled plane by the complete level-`m` axis codebook.
pub fn coverage_check_axis(
    cfg: &ArrayConfig,
    level: u32,
    axis: Axis,
    y_plane: f64,
    samples: usize,
    seed: u64,
) -> Result<bool> {
    let side = 1u32 << level;
    let points: Vec<Point3> = (1..=side)
        .map(|idx| axis_focal_point(cfg, ShellIndex { level, idx, axis }))
        .collect();
    coverage_check_points(cfg, &points, RegionKind::Shell(axis), y_plane, samples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg64() -> ArrayConfig {
        ArrayConfig::new(64, 64, 28e9).unwrap()
    }

    #[test]
    fn focal_point_level_one() {
        let cfg = cfg64();
        let v = virtual_focal_point(&cfg, FrustumIndex::new(1, 1, 1).unwrap());
        assert!((v.x + 0.168_75).abs() < 1e-9);
        assert!((v.y + 0.3375).abs() < 1e-9);
        assert!((v.z + 0.168_75).abs() < 1e-9);
        // mirror symmetry of the four level-1 points
        let v2 = virtual_focal_point(&cfg, FrustumIndex::new(1, 2, 2).unwrap());
        assert!((v.x + v2.x).abs() < 1e-12 && (v.z + v2.z).abs() < 1e-12);
        // depth doubles per level
        let v3 = virtual_focal_point(&cfg, FrustumIndex::new(2, 1, 1).unwrap());
        assert!((v3.y - 2.0 * v.y).abs() < 1e-12);
    }

    #[test]
    fn axis_focal_points() {
        let cfg = cfg64();
        let h = axis_focal_point(&cfg, ShellIndex::new(1, 1, Axis::Horizontal).unwrap());
        assert!((h.x + cfg.aperture_x() / 2.0).abs() < 1e-12);
        assert!((h.y + cfg.aperture_x()).abs() < 1e-12);
        assert_eq!(h.z, 0.0);
        let v = axis_focal_point(&cfg, ShellIndex::new(3, 2, Axis::Vertical).unwrap());
        assert_eq!(v.x, 0.0);
        assert!((v.y + 4.0 * cfg.aperture_z()).abs() < 1e-12);
    }

    #[test]
    fn children_tile_the_index_square() {
        let fi = FrustumIndex::new(1, 1, 1).unwrap();
        let kids = child_indices(fi);
        let expect = [(1, 1), (1, 2), (2, 1), (2, 2)];
        for (kid, (x, z)) in kids.iter().zip(expect) {
            assert_eq!((kid.level, kid.x, kid.z), (2, x, z));
        }
        let fi = FrustumIndex::new(2, 2, 1).unwrap();
        for kid in child_indices(fi) {
            assert_eq!(kid.level, 3);
            assert!([3, 4].contains(&kid.x) && [1, 2].contains(&kid.z));
        }
    }

    #[test]
    fn frustum_membership_examples() {
        // membership follows the aperture projection: a focal point on the
        // negative-x side throws its bright region toward positive x
        let cfg = cfg64();
        let fi = FrustumIndex::new(1, 1, 1).unwrap();
        assert!(frustum_contains(&cfg, fi, Point3::new(-0.1, 1.0, -0.1)));
        assert!(frustum_contains(&cfg, fi, Point3::new(0.3, 1.0, 0.3)));
        assert!(!frustum_contains(&cfg, fi, Point3::new(-0.3, 1.0, -0.3)));
        let mirror = FrustumIndex::new(1, 2, 2).unwrap();
        assert!(frustum_contains(&cfg, mirror, Point3::new(-0.3, 1.0, -0.3)));
    }

    #[test]
    fn parent_equals_union_of_children() {
        let cfg = cfg64();
        let mut rng = crate::seed::stream_rng(17, 0);
        for level in 1..=4u32 {
            let side = 1u32 << level;
            for _ in 0..400 {
                let fi = FrustumIndex::new(
                    level,
                    rng.gen_range(1..=side),
                    rng.gen_range(1..=side),
                )
                .unwrap();
                let y = rng.gen_range(0.5..40.0);
                let p = Point3::new(
                    rng.gen_range(-y..y),
                    y,
                    rng.gen_range(-y..y),
                );
                let in_parent = frustum_contains(&cfg, fi, p);
                let in_children = child_indices(fi)
                    .iter()
                    .any(|&c| frustum_contains(&cfg, c, p));
                assert_eq!(in_parent, in_children);
            }
        }
    }

    #[test]
    fn partition_is_exact_and_inside_region() {
        let cfg = cfg64();
        let mut rng = crate::seed::stream_rng(23, 1);
        for m in 1..=6u32 {
            for _ in 0..300 {
                let y = rng.gen_range(0.5..40.0);
                let eps = 1e-7;
                let p = Point3::new(
                    rng.gen_range(-y + eps..y - eps),
                    y,
                    rng.gen_range(-y + eps..y - eps),
                );
                let fi = frustum_assign(&cfg, m, p).unwrap();
                assert!(frustum_contains(&cfg, fi, p));
            }
        }
        // boresight-adjacent point sits in exactly one partition cell
        let p = Point3::new(1e-6, 5.0, 1e-6);
        let fi = frustum_assign(&cfg, 1, p).unwrap();
        assert_eq!((fi.x, fi.z), (1, 1));
    }

    #[test]
    fn shell_membership_and_rotation_invariance() {
        let cfg = cfg64();
        let si = ShellIndex::new(3, 2, Axis::Horizontal).unwrap();
        let v = axis_focal_point(&cfg, si);
        let mut rng = crate::seed::stream_rng(31, 2);
        for _ in 0..200 {
            let y = rng.gen_range(1.0..30.0);
            let p = Point3::new(rng.gen_range(-y..y), y, rng.gen_range(-y..y));
            let m = shell_region_contains(&cfg, Axis::Horizontal, v, p);
            // rotate p about the x-axis: membership must not change
            let ang = rng.gen_range(-0.5..0.5f64);
            let (s, c) = ang.sin_cos();
            let q = Point3::new(p.x, c * p.y - s * p.z, s * p.y + c * p.z);
            if q.y > 0.1 {
                assert_eq!(m, shell_region_contains(&cfg, Axis::Horizontal, v, q));
            }
        }
    }

    #[test]
    fn shell_assign_matches_membership() {
        let cfg = cfg64();
        let mut rng = crate::seed::stream_rng(37, 3);
        for m in 1..=6u32 {
            for _ in 0..200 {
                let y = rng.gen_range(1.0..30.0);
                let p = Point3::new(rng.gen_range(-y..y), y, rng.gen_range(-y..y));
                let si = shell_assign(&cfg, m, Axis::Horizontal, p).unwrap();
                assert!(shell_contains(&cfg, si, p));
                let sv = shell_assign(&cfg, m, Axis::Vertical, p).unwrap();
                assert!(shell_contains(&cfg, sv, p));
            }
        }
    }

    #[test]
    fn yk_ring_values() {
        let cfg = cfg64();
        let expect = [86.4, 28.8, 17.28, 12.342_857, 9.6, 7.854_545];
        for (k, e) in (1..=6).zip(expect) {
            assert!((yk_distance(&cfg, 9, k) - e).abs() < 1e-3);
        }
        assert!(yk_distance(&cfg, 9, 0).is_infinite());
        for k in 1..6 {
            assert!(yk_distance(&cfg, 9, k + 1) < yk_distance(&cfg, 9, k));
        }
        assert!((yk_distance(&cfg, 9, 1) - 256.0 * cfg.min_aperture()).abs() < 1e-9);
    }

    #[test]
    fn frustum_plan_interior_counts() {
        let cfg = cfg64();
        let fi = FrustumIndex::new(9, 256, 256).unwrap();
        let plan = refinement_plan_frustum(&cfg, 9, fi, &[2, 4, 6]).unwrap();
        assert_eq!(plan.len(), 9 + 49 + 121);
        let counts: Vec<usize> = [2u32, 4, 6]
            .iter()
            .map(|&k| plan.focus_points.iter().filter(|p| p.k == k).count())
            .collect();
        assert_eq!(counts, vec![9, 49, 121]);
        assert!(refinement_plan_frustum(&cfg, 9, fi, &[]).is_err());
        assert!(refinement_plan_frustum(&cfg, 9, fi, &[4, 2]).is_err());
    }

    #[test]
    fn frustum_plan_symmetric_about_frustum_center() {
        // the 2^M grid is even, so no frustum is centered at broadside;
        // the plan is symmetric about the frustum's own central ray
        let cfg = cfg64();
        let fi = FrustumIndex::new(9, 256, 256).unwrap();
        let plan = refinement_plan_frustum(&cfg, 9, fi, &[2]).unwrap();
        let (ul, ur) = frustum_slope_bounds(&cfg, 9, 256, Axis::Horizontal);
        let center = 0.5 * (ul + ur);
        let mut tans: Vec<f64> = plan.focus_points.iter().map(|p| p.focus.phi_rad.tan()).collect();
        tans.sort_by(f64::total_cmp);
        for (a, b) in tans.iter().zip(tans.iter().rev()) {
            assert!((a + b - 2.0 * center).abs() < 1e-12);
        }
    }

    #[test]
    fn rod_plan_counts_and_containment() {
        let cfg = cfg64();
        let plan = refinement_plan_rod(&cfg, 9, 256, 256, &[2, 4, 6]).unwrap();
        assert_eq!(plan.len(), 16 + 64 + 144);
        // every emitted point lies inside the rod region (zero dilation)
        for p in &plan.focus_points {
            let gx = p.focus.phi_rad.tan();
            let gz = p.focus.theta_rad.tan();
            assert!(rod_cross_section_inside(&cfg, 256, 256, 9, p.focus.y_m, gx, gz));
        }
    }

    #[test]
    fn rod_plan_fallback_never_empty() {
        let cfg = cfg64();
        for xm in [1u32, 64, 256, 512] {
            for zm in [1u32, 64, 256, 512] {
                let plan = refinement_plan_rod(&cfg, 9, xm, zm, &[2, 4, 6]).unwrap();
                assert!(!plan.is_empty());
            }
        }
    }

    #[test]
    fn plan_csv_round_trip() {
        let cfg = cfg64();
        let plan =
            refinement_plan_frustum(&cfg, 9, FrustumIndex::new(9, 10, 500).unwrap(), &[2]).unwrap();
        let mut buf = Vec::new();
        plan.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,y_m,phi_rad,theta_rad"));
        assert_eq!(text.lines().count(), plan.len() + 1);
    }

    #[test]
    fn coverage_at_several_levels() {
        let cfg = cfg64();
        for m in 1..=4u32 {
            for y in [2.0, 10.0, 40.0] {
                assert!(coverage_check(&cfg, m, y, 1_000, 4).unwrap());
            }
        }
        assert!(coverage_check_axis(&cfg, 3, Axis::Horizontal, 10.0, 1_000, 4).unwrap());
        assert!(coverage_check_axis(&cfg, 3, Axis::Vertical, 10.0, 1_000, 4).unwrap());
    }

    #[test]
    fn deleting_a_codeword_breaks_coverage() {
        let cfg = cfg64();
        let mut points = Vec::new();
        for x in 1..=2u32 {
            for z in 1..=2u32 {
                points.push(virtual_focal_point(&cfg, FrustumIndex::new(1, x, z).unwrap()));
            }
        }
        points.pop();
        assert!(!coverage_check_points(
            &cfg,
            &points,
            RegionKind::FrustumRect,
            10.0,
            5_000,
            4
        )
        .unwrap());
        assert!(coverage_check_points(&cfg, &points, RegionKind::FrustumRect, 10.0, 100, 4).is_err());
    }

    #[test]
    fn lemma_bounds_square_interior() {
        let cfg = cfg64();
        // square array: f_min/f_max are integers 513 - t -+ k
        let (lo, hi) = lemma_angle_index_bounds(&cfg, 9, 256, 2, Axis::Horizontal);
        assert_eq!((lo, hi), (255, 259));
        let (lo, hi) = lemma_angle_index_bounds(&cfg, 9, 1, 6, Axis::Horizontal);
        assert_eq!((lo, hi), (506, 512));
    }
}
