//! Beam trainers: the hierarchical two-phase and three-phase methods plus
//! four benchmark strategies, all driven through a pilot-response oracle.
//!
//! Trainers never read the UE position; the only information they receive
//! is the power of each transmitted pilot, matching the feedback model of
//! the training problem.

use num_complex::Complex64;
use serde::Serialize;

use crate::channel::{
    channel_vector, pilot_response, MultipathChannel, NoiseStream, PilotObservation,
};
use crate::codebook::{
    child_indices, refinement_plan_frustum, refinement_plan_rod, virtual_focal_point,
    axis_focal_point, frustum_slope_bounds, grid_tangent, yk_distance, FrustumIndex,
    RefinementPoint, ShellIndex,
};
use crate::error::{Error, Result};
use crate::geometry::{ArrayConfig, DirectionTriplet, Point3};
use crate::wavefield::{
    axis_restricted_diverging_codeword, axis_steering_codeword, diverging_codeword,
    flat_index, focusing_codeword, Axis, Codeword, CodewordLabel,
};

/// Anything that can transmit a codeword and report the received pilot.
pub trait PilotResponder {
    fn respond(&mut self, w: &Codeword) -> PilotObservation;
}

/// Oracle binding a channel realization to a deterministic noise stream.
pub struct PilotOracle {
    channel: MultipathChannel,
    h: Vec<Complex64>,
    stream: NoiseStream,
}

impl PilotOracle {
    pub fn channel(&self) -> &MultipathChannel {
        &self.channel
    }

    /// Convenience: received pilot power for a codeword.
    pub fn power(&mut self, w: &Codeword) -> f64 {
        self.respond(w).power()
    }
}

impl PilotResponder for PilotOracle {
    fn respond(&mut self, w: &Codeword) -> PilotObservation {
        pilot_response(&self.h, &self.channel, w, &mut self.stream)
    }
}

/// Builds the pilot oracle for one training run. `trial` separates noise
/// streams of concurrent runs sharing a seed.
pub fn oracle_from_channel(
    cfg: &ArrayConfig,
    ch: &MultipathChannel,
    seed: u64,
    trial: u64,
) -> Result<PilotOracle> {
    Ok(PilotOracle {
        h: channel_vector(cfg, ch)?,
        channel: ch.clone(),
        stream: NoiseStream::new(seed, trial),
    })
}

/// What a trainer localized before refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Identified {
    Frustum(FrustumIndex),
    Shells {
        horizontal: ShellIndex,
        vertical: ShellIndex,
    },
    /// Angular grid estimate from a DFT-style benchmark.
    Direction { phi_index: u32, theta_index: u32 },
    None,
}

/// One transmitted pilot and its received power.
#[derive(Debug, Clone, Serialize)]
pub struct TraceEntry {
    pub codeword_id: String,
    pub power: f64,
}

/// Result of one training run.
#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    /// The selected codeword (always one that was transmitted).
    pub chosen: Codeword,
    /// Focus triplet of the chosen codeword, when it is a focusing one.
    pub focus_point: Option<DirectionTriplet>,
    pub pilots_per_phase: Vec<usize>,
    pub identified: Identified,
    /// Every transmitted pilot in order.
    pub trace: Vec<TraceEntry>,
}

#[derive(Serialize)]
struct OutcomeSummary<'a> {
    chosen_codeword_id: &'a str,
    chosen_label: CodewordLabel,
    focus_point: Option<DirectionTriplet>,
    pilots_per_phase: &'a [usize],
    total_pilots: usize,
    identified: &'a Identified,
    trace: &'a [TraceEntry],
}

impl TrainingOutcome {
    pub fn total_pilots(&self) -> usize {
        self.pilots_per_phase.iter().sum()
    }

    /// JSON summary: phases, pilot counts, chosen focus triplet, trace.
    pub fn to_json(&self) -> Result<String> {
        let summary = OutcomeSummary {
            chosen_codeword_id: &self.chosen.id,
            chosen_label: self.chosen.label,
            focus_point: self.focus_point,
            pilots_per_phase: &self.pilots_per_phase,
            total_pilots: self.total_pilots(),
            identified: &self.identified,
            trace: &self.trace,
        };
        Ok(serde_json::to_string_pretty(&summary)?)
    }
}

/// Transmits the candidates in order and returns the index of the largest
/// received power; ties resolve to the earliest candidate.
fn argmax_power<R: PilotResponder>(
    oracle: &mut R,
    trace: &mut Vec<TraceEntry>,
    candidates: &[Codeword],
) -> usize {
    let mut best = 0usize;
    let mut best_power = f64::NEG_INFINITY;
    for (i, w) in candidates.iter().enumerate() {
        let obs = oracle.respond(w);
        let p = obs.power();
        trace.push(TraceEntry { codeword_id: obs.codeword_id, power: p });
        if p > best_power {
            best_power = p;
            best = i;
        }
    }
    best
}

/// Sweeps the focusing codewords of a refinement plan; returns the best
/// codeword with its focus triplet and the pilot count.
fn refinement_sweep<R: PilotResponder>(
    cfg: &ArrayConfig,
    oracle: &mut R,
    trace: &mut Vec<TraceEntry>,
    points: &[RefinementPoint],
) -> Result<(Codeword, DirectionTriplet, usize)> {
    let mut best: Option<(Codeword, DirectionTriplet)> = None;
    let mut best_power = f64::NEG_INFINITY;
    for rp in points {
        let w = focusing_codeword(cfg, rp.focus.to_point())?;
        let obs = oracle.respond(&w);
        let p = obs.power();
        trace.push(TraceEntry { codeword_id: obs.codeword_id, power: p });
        if p > best_power {
            best_power = p;
            best = Some((w, rp.focus));
        }
    }
    let (w, focus) = best.ok_or_else(|| Error::domain("refinement plan was empty"))?;
    Ok((w, focus, points.len()))
}

/// Central-direction fallback when an identified frustum's plan is empty
/// (possible only after misidentification far outside the serving region).
fn frustum_fallback_point(cfg: &ArrayConfig, m_levels: u32, fi: FrustumIndex, k: u32) -> RefinementPoint {
    let (ulx, urx) = frustum_slope_bounds(cfg, m_levels, fi.x, Axis::Horizontal);
    let (ulz, urz) = frustum_slope_bounds(cfg, m_levels, fi.z, Axis::Vertical);
    let y = yk_distance(cfg, m_levels, k);
    RefinementPoint {
        k,
        focus: DirectionTriplet::new(
            y,
            (0.5 * (ulx + urx)).clamp(-1.0, 1.0).atan(),
            (0.5 * (ulz + urz)).clamp(-1.0, 1.0).atan(),
        ),
    }
}

/// Two-phase trainer: hierarchical frustum descent (4 diverging pilots per
/// level for `M` levels), then a focusing sweep over the frustum's
/// refinement plan.
pub fn two_phase_train<R: PilotResponder>(
    cfg: &ArrayConfig,
    oracle: &mut R,
    m_levels: u32,
    k_set: &[u32],
) -> Result<TrainingOutcome> {
    if m_levels < 1 {
        return Err(Error::domain("need at least one descent level"));
    }
    let mut trace = Vec::new();
    let (mut x, mut z) = (1u32, 1u32);
    for m in 1..=m_levels {
        let kids = if m == 1 {
            [
                FrustumIndex { level: 1, x: 1, z: 1 },
                FrustumIndex { level: 1, x: 1, z: 2 },
                FrustumIndex { level: 1, x: 2, z: 1 },
                FrustumIndex { level: 1, x: 2, z: 2 },
            ]
        } else {
            child_indices(FrustumIndex { level: m - 1, x, z })
        };
        let codewords: Vec<Codeword> = kids
            .iter()
            .map(|&fi| diverging_codeword(cfg, virtual_focal_point(cfg, fi)))
            .collect::<Result<_>>()?;
        let best = argmax_power(oracle, &mut trace, &codewords);
        x = kids[best].x;
        z = kids[best].z;
    }
    let identified = FrustumIndex { level: m_levels, x, z };
    let mut plan = refinement_plan_frustum(cfg, m_levels, identified, k_set)?;
    if plan.is_empty() {
        plan.focus_points
            .push(frustum_fallback_point(cfg, m_levels, identified, *k_set.last().unwrap()));
    }
    let phase1 = trace.len();
    let (chosen, focus, refined) = refinement_sweep(cfg, oracle, &mut trace, &plan.focus_points)?;
    Ok(TrainingOutcome {
        chosen,
        focus_point: Some(focus),
        pilots_per_phase: vec![phase1, refined],
        identified: Identified::Frustum(identified),
        trace,
    })
}

/// One hierarchical binary descent over an axis codebook; 2 pilots per
/// level. Returns the identified index.
fn axis_descent<R: PilotResponder>(
    cfg: &ArrayConfig,
    oracle: &mut R,
    trace: &mut Vec<TraceEntry>,
    axis: Axis,
    m_levels: u32,
) -> Result<u32> {
    let mut idx = 1u32;
    for m in 1..=m_levels {
        let cands = [2 * idx - 1, 2 * idx];
        let codewords: Vec<Codeword> = cands
            .iter()
            .map(|&i| {
                let si = ShellIndex { level: m, idx: i, axis };
                axis_restricted_diverging_codeword(cfg, axis_focal_point(cfg, si), axis)
            })
            .collect::<Result<_>>()?;
        let best = argmax_power(oracle, trace, &codewords);
        idx = cands[best];
    }
    Ok(idx)
}

/// Three-phase trainer: horizontal then vertical shell descent (2 pilots
/// per level each), then a focusing sweep over the rod-region plan.
pub fn three_phase_train<R: PilotResponder>(
    cfg: &ArrayConfig,
    oracle: &mut R,
    m_levels: u32,
    k_set: &[u32],
) -> Result<TrainingOutcome> {
    if m_levels < 1 {
        return Err(Error::domain("need at least one descent level"));
    }
    let mut trace = Vec::new();
    let x_m = axis_descent(cfg, oracle, &mut trace, Axis::Horizontal, m_levels)?;
    let phase1 = trace.len();
    let z_m = axis_descent(cfg, oracle, &mut trace, Axis::Vertical, m_levels)?;
    let phase2 = trace.len() - phase1;
    let plan = refinement_plan_rod(cfg, m_levels, x_m, z_m, k_set)?;
    let (chosen, focus, refined) = refinement_sweep(cfg, oracle, &mut trace, &plan.focus_points)?;
    Ok(TrainingOutcome {
        chosen,
        focus_point: Some(focus),
        pilots_per_phase: vec![phase1, phase2, refined],
        identified: Identified::Shells {
            horizontal: ShellIndex { level: m_levels, idx: x_m, axis: Axis::Horizontal },
            vertical: ShellIndex { level: m_levels, idx: z_m, axis: Axis::Vertical },
        },
        trace,
    })
}

/// Benchmark strategy selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchmarkMethod {
    /// Multi-row wide-beam binary search per axis, then refinement.
    UpaPartitioning,
    /// Hierarchical DFT binary search on the central ULAs, then refinement.
    HierDft,
    /// Exhaustive DFT sweep over the angular grid per axis, then refinement.
    DftSweep,
    /// Exhaustive focusing sweep over a uniform spatial grid.
    GridMatching,
}

/// Parameters shared by the benchmark trainers.
#[derive(Debug, Clone)]
pub struct BenchmarkParams {
    pub m_levels: u32,
    /// Refinement rings; benchmarks default to the full six.
    pub k_set: Vec<u32>,
    /// Grid-matching spacing in meters.
    pub grid_spacing_m: Option<f64>,
}

impl BenchmarkParams {
    pub fn new(m_levels: u32) -> Self {
        BenchmarkParams { m_levels, k_set: (1..=6).collect(), grid_spacing_m: None }
    }
}

/// Angular window refinement used by the direction-estimating benchmarks:
/// for each ring, the half-open window of `2k` grid rays about the
/// estimated direction.
fn direction_refinement_points(
    cfg: &ArrayConfig,
    m_levels: u32,
    phi_index: u32,
    theta_index: u32,
    k_set: &[u32],
) -> Vec<RefinementPoint> {
    let grid = 1i64 << m_levels;
    let mut points = Vec::new();
    for &k in k_set {
        let y = yk_distance(cfg, m_levels, k);
        let window = |center: u32| -> (u32, u32) {
            let lo = (center as i64 - k as i64).max(1);
            let hi = (center as i64 + k as i64 - 1).min(grid);
            (lo as u32, hi as u32)
        };
        let (ax, bx) = window(phi_index);
        let (az, bz) = window(theta_index);
        for i in ax..=bx {
            for j in az..=bz {
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
    points
}

/// Wide-beam codeword for one binary-search round: central `2^m` elements
/// (capped at the axis length) steered at the candidate interval's center.
fn wide_beam(cfg: &ArrayConfig, axis: Axis, m: u32, center_tan: f64) -> Result<Codeword> {
    let n_axis = match axis {
        Axis::Horizontal => cfg.n_x(),
        Axis::Vertical => cfg.n_z(),
    };
    let active = (1usize << m.min(30)).min(n_axis);
    let sin_psi = center_tan.atan().sin();
    axis_steering_codeword(cfg, axis, sin_psi, Some(active))
}

/// Binary search over the tangent grid with per-round wide beams; returns
/// the final 1-based grid index.
fn binary_angle_search<R: PilotResponder>(
    cfg: &ArrayConfig,
    oracle: &mut R,
    trace: &mut Vec<TraceEntry>,
    axis: Axis,
    m_levels: u32,
    beam: impl Fn(&ArrayConfig, Axis, u32, f64) -> Result<Codeword>,
) -> Result<u32> {
    // index interval [lo, hi] over the 2^M grid
    let mut lo = 1u32;
    let mut hi = 1u32 << m_levels;
    for m in 1..=m_levels {
        let mid = lo + (hi - lo) / 2;
        let halves = [(lo, mid), (mid + 1, hi)];
        let codewords: Vec<Codeword> = halves
            .iter()
            .map(|&(a, b)| {
                let center =
                    (grid_tangent(m_levels, a) + grid_tangent(m_levels, b)) / 2.0;
                beam(cfg, axis, m, center)
            })
            .collect::<Result<_>>()?;
        let best = argmax_power(oracle, trace, &codewords);
        (lo, hi) = halves[best];
    }
    Ok(lo)
}

/// Multi-row activation codeword for the UPA-partitioning benchmark:
/// `rows` central rows all carrying the same horizontal steering phases.
fn multi_row_beam(cfg: &ArrayConfig, axis: Axis, m: u32, center_tan: f64) -> Result<Codeword> {
    let (n_axis, n_other) = match axis {
        Axis::Horizontal => (cfg.n_x(), cfg.n_z()),
        Axis::Vertical => (cfg.n_z(), cfg.n_x()),
    };
    let rows = (n_other >> m.min(30)).max(1);
    let active_axis = (1usize << m.min(30)).min(n_axis);
    let start_axis = (n_axis - active_axis) / 2 + 1;
    let start_other = (n_other - rows) / 2 + 1;
    let sin_psi = center_tan.atan().sin();
    let k0 = cfg.wavenumber();
    let total = rows * active_axis;
    let amp = (total as f64).sqrt().recip();
    let mut weights = vec![Complex64::new(0.0, 0.0); cfg.elements()];
    for r in start_other..start_other + rows {
        for i in start_axis..start_axis + active_axis {
            let (idx, coord) = match axis {
                Axis::Horizontal => (
                    flat_index(cfg, i, r),
                    crate::geometry::antenna_position(cfg, i, r)?.x,
                ),
                Axis::Vertical => (
                    flat_index(cfg, r, i),
                    crate::geometry::antenna_position(cfg, r, i)?.z,
                ),
            };
            weights[idx] = Complex64::from_polar(amp, -k0 * coord * sin_psi);
        }
    }
    Codeword::new(
        weights,
        CodewordLabel::Custom,
        format!("rows{}-{:?}(s={:.5},m={})", rows, axis, sin_psi, m),
    )
}

/// Spatial grid used by the grid-matching benchmark: uniform spacing over
/// the exact-form serving region between the Fresnel distance and the
/// Rayleigh hemisphere, filtered by exact near-field membership.
pub fn grid_matching_points(cfg: &ArrayConfig, spacing_m: f64) -> Result<Vec<Point3>> {
    if !(spacing_m > 0.0) {
        return Err(Error::domain("grid spacing must be positive"));
    }
    let radius = cfg.rayleigh_distance();
    let fresnel = cfg.fresnel_distance();
    let mut pts = Vec::new();
    let n_y = (radius / spacing_m).floor() as i64;
    for iy in 1..=n_y {
        let y = iy as f64 * spacing_m;
        if y < fresnel {
            continue;
        }
        let half_x = y + cfg.aperture_x() / 2.0;
        let half_z = y + cfg.aperture_z() / 2.0;
        let nx = (half_x / spacing_m).floor() as i64;
        let nz = (half_z / spacing_m).floor() as i64;
        for ix in -nx..=nx {
            for iz in -nz..=nz {
                let p = Point3::new(ix as f64 * spacing_m, y, iz as f64 * spacing_m);
                if p.norm() <= radius && crate::geometry::is_near_field(cfg, p) {
                    pts.push(p);
                }
            }
        }
    }
    Ok(pts)
}

/// Runs one benchmark trainer.
pub fn benchmark_train<R: PilotResponder>(
    cfg: &ArrayConfig,
    oracle: &mut R,
    method: BenchmarkMethod,
    params: &BenchmarkParams,
) -> Result<TrainingOutcome> {
    let m_levels = params.m_levels;
    let mut trace = Vec::new();
    match method {
        BenchmarkMethod::GridMatching => {
            let spacing = params
                .grid_spacing_m
                .ok_or_else(|| Error::domain("grid-matching requires a grid spacing"))?;
            let pts = grid_matching_points(cfg, spacing)?;
            if pts.is_empty() {
                return Err(Error::domain("grid spacing leaves no candidate points"));
            }
            let mut best: Option<(Codeword, Point3)> = None;
            let mut best_power = f64::NEG_INFINITY;
            for &p in &pts {
                let w = focusing_codeword(cfg, p)?;
                let obs = oracle.respond(&w);
                let pw = obs.power();
                trace.push(TraceEntry { codeword_id: obs.codeword_id, power: pw });
                if pw > best_power {
                    best_power = pw;
                    best = Some((w, p));
                }
            }
            let (chosen, p) = best.unwrap();
            Ok(TrainingOutcome {
                chosen,
                focus_point: Some(DirectionTriplet::from_point(p)?),
                pilots_per_phase: vec![pts.len()],
                identified: Identified::None,
                trace,
            })
        }
        BenchmarkMethod::DftSweep => {
            let grid = 1u32 << m_levels;
            let mut sweep_axis = |axis: Axis, trace: &mut Vec<TraceEntry>| -> Result<u32> {
                let codewords: Vec<Codeword> = (1..=grid)
                    .map(|i| {
                        let sin_psi = grid_tangent(m_levels, i).atan().sin();
                        axis_steering_codeword(cfg, axis, sin_psi, None)
                    })
                    .collect::<Result<_>>()?;
                Ok(argmax_power(oracle, trace, &codewords) as u32 + 1)
            };
            let phi_index = sweep_axis(Axis::Horizontal, &mut trace)?;
            let p1 = trace.len();
            let theta_index = sweep_axis(Axis::Vertical, &mut trace)?;
            let p2 = trace.len() - p1;
            let points =
                direction_refinement_points(cfg, m_levels, phi_index, theta_index, &params.k_set);
            let (chosen, focus, refined) = refinement_sweep(cfg, oracle, &mut trace, &points)?;
            Ok(TrainingOutcome {
                chosen,
                focus_point: Some(focus),
                pilots_per_phase: vec![p1, p2, refined],
                identified: Identified::Direction { phi_index, theta_index },
                trace,
            })
        }
        BenchmarkMethod::HierDft | BenchmarkMethod::UpaPartitioning => {
            let beam: fn(&ArrayConfig, Axis, u32, f64) -> Result<Codeword> =
                match method {
                    BenchmarkMethod::HierDft => wide_beam,
                    _ => multi_row_beam,
                };
            let phi_index =
                binary_angle_search(cfg, oracle, &mut trace, Axis::Horizontal, m_levels, beam)?;
            let p1 = trace.len();
            let theta_index =
                binary_angle_search(cfg, oracle, &mut trace, Axis::Vertical, m_levels, beam)?;
            let p2 = trace.len() - p1;
            let points =
                direction_refinement_points(cfg, m_levels, phi_index, theta_index, &params.k_set);
            let (chosen, focus, refined) = refinement_sweep(cfg, oracle, &mut trace, &points)?;
            Ok(TrainingOutcome {
                chosen,
                focus_point: Some(focus),
                pilots_per_phase: vec![p1, p2, refined],
                identified: Identified::Direction { phi_index, theta_index },
                trace,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_channel;
    use crate::codebook::frustum_contains;

    fn cfg16() -> ArrayConfig {
        ArrayConfig::new(16, 16, 28e9).unwrap()
    }

    fn noiseless_oracle(cfg: &ArrayConfig, ue: Point3, seed: u64) -> PilotOracle {
        let mut ch = sample_channel(cfg, ue, f64::INFINITY, 0, 10.0, seed).unwrap();
        ch.noise_power = 0.0;
        oracle_from_channel(cfg, &ch, seed, 0).unwrap()
    }

    #[test]
    fn two_phase_pilot_accounting() {
        let cfg = cfg16();
        let ue = Point3::new(-0.4, 2.0, 0.3);
        let mut oracle = noiseless_oracle(&cfg, ue, 3);
        let out = two_phase_train(&cfg, &mut oracle, 4, &[2, 4]).unwrap();
        assert_eq!(out.pilots_per_phase[0], 16);
        assert_eq!(out.total_pilots(), out.trace.len());
        assert!(out.trace.iter().any(|t| t.codeword_id == out.chosen.id));
        match out.identified {
            Identified::Frustum(fi) => assert!(frustum_contains(&cfg, fi, ue)),
            _ => panic!("expected frustum identification"),
        }
    }

    #[test]
    fn two_phase_level_one_identification() {
        // noiseless LOS UE in the positive-x positive-z wedge is identified
        // by the focal point on the opposite side
        let cfg = cfg16();
        let ue = Point3::new(-1.0, 4.0, -1.0);
        let mut oracle = noiseless_oracle(&cfg, ue, 5);
        let out = two_phase_train(&cfg, &mut oracle, 1, &[2]).unwrap();
        match out.identified {
            Identified::Frustum(fi) => {
                assert_eq!((fi.x, fi.z), (2, 2));
                assert!(frustum_contains(&cfg, fi, ue));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn two_phase_exact_grid_point_recovered() {
        // a UE sitting exactly on a refinement grid point is matched exactly
        let cfg = cfg16();
        let m = 4u32;
        let y = yk_distance(&cfg, m, 2);
        let ue = Point3::new(
            y * grid_tangent(m, 10),
            y,
            y * grid_tangent(m, 7),
        );
        let mut oracle = noiseless_oracle(&cfg, ue, 8);
        let out = two_phase_train(&cfg, &mut oracle, m, &[2, 4]).unwrap();
        let f = out.focus_point.unwrap();
        let fp = f.to_point();
        assert!(fp.distance(ue) < 1e-9, "focus {:?} vs ue {:?}", fp, ue);
    }

    #[test]
    fn three_phase_accounting_and_symmetry() {
        let cfg = cfg16();
        let ue = Point3::new(0.8, 2.0, 0.8);
        let mut oracle = noiseless_oracle(&cfg, ue, 11);
        let out = three_phase_train(&cfg, &mut oracle, 4, &[2, 4]).unwrap();
        assert_eq!(out.pilots_per_phase[0], 8);
        assert_eq!(out.pilots_per_phase[1], 8);
        assert_eq!(out.total_pilots(), out.trace.len());
        // symmetric diagonal UE on a square array: equal shell indices
        match out.identified {
            Identified::Shells { horizontal, vertical } => {
                assert_eq!(horizontal.idx, vertical.idx);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn chosen_codeword_dominates_plan() {
        // noiseless: the chosen focusing codeword achieves the maximum
        // received power among everything in the trace
        let cfg = cfg16();
        let ue = Point3::new(0.2, 1.5, -0.4);
        let mut oracle = noiseless_oracle(&cfg, ue, 13);
        let out = two_phase_train(&cfg, &mut oracle, 3, &[2, 3]).unwrap();
        let chosen_power = out
            .trace
            .iter()
            .find(|t| t.codeword_id == out.chosen.id)
            .unwrap()
            .power;
        let refinement = &out.trace[out.pilots_per_phase[0]..];
        for t in refinement {
            assert!(t.power <= chosen_power + 1e-12);
        }
    }

    #[test]
    fn oracle_reproducible() {
        let cfg = cfg16();
        let ue = Point3::new(0.1, 2.0, 0.1);
        let ch = sample_channel(&cfg, ue, 13.0, 4, 20.0, 21).unwrap();
        let mut a = oracle_from_channel(&cfg, &ch, 77, 0).unwrap();
        let mut b = oracle_from_channel(&cfg, &ch, 77, 0).unwrap();
        let o1 = two_phase_train(&cfg, &mut a, 3, &[2]).unwrap();
        let o2 = two_phase_train(&cfg, &mut b, 3, &[2]).unwrap();
        let t1: Vec<f64> = o1.trace.iter().map(|t| t.power).collect();
        let t2: Vec<f64> = o2.trace.iter().map(|t| t.power).collect();
        assert_eq!(t1, t2);
    }

    #[test]
    fn benchmark_pilot_counts() {
        let cfg = cfg16();
        let ue = Point3::new(0.3, 1.8, -0.2);
        let mut oracle = noiseless_oracle(&cfg, ue, 31);
        let params = BenchmarkParams { m_levels: 4, k_set: vec![1, 2], grid_spacing_m: None };
        let sweep = benchmark_train(&cfg, &mut oracle, BenchmarkMethod::DftSweep, &params).unwrap();
        assert_eq!(sweep.pilots_per_phase[0], 16);
        assert_eq!(sweep.pilots_per_phase[1], 16);
        let mut oracle = noiseless_oracle(&cfg, ue, 31);
        let hier = benchmark_train(&cfg, &mut oracle, BenchmarkMethod::HierDft, &params).unwrap();
        assert_eq!(hier.pilots_per_phase[0], 8);
        assert_eq!(hier.pilots_per_phase[1], 8);
        let mut oracle = noiseless_oracle(&cfg, ue, 31);
        let upa =
            benchmark_train(&cfg, &mut oracle, BenchmarkMethod::UpaPartitioning, &params).unwrap();
        assert_eq!(upa.pilots_per_phase[0], 8);
        assert_eq!(upa.pilots_per_phase[1], 8);
    }

    #[test]
    fn grid_matching_runs_and_counts() {
        let cfg = ArrayConfig::new(8, 8, 28e9).unwrap();
        let pts = grid_matching_points(&cfg, 0.12).unwrap();
        assert!(!pts.is_empty());
        let ue = pts[pts.len() / 2];
        let mut oracle = noiseless_oracle(&cfg, ue, 41);
        let params = BenchmarkParams {
            m_levels: 3,
            k_set: vec![1],
            grid_spacing_m: Some(0.12),
        };
        let out =
            benchmark_train(&cfg, &mut oracle, BenchmarkMethod::GridMatching, &params).unwrap();
        assert_eq!(out.pilots_per_phase, vec![pts.len()]);
        // the UE sits on a grid point, so the sweep finds it exactly
        assert!(out.focus_point.unwrap().to_point().distance(ue) < 1e-9);
        let mut oracle = noiseless_oracle(&cfg, ue, 41);
        let missing = BenchmarkParams { grid_spacing_m: None, ..params };
        assert!(benchmark_train(&cfg, &mut oracle, BenchmarkMethod::GridMatching, &missing).is_err());
    }

    #[test]
    fn multi_row_beam_is_phase_only() {
        let cfg = cfg16();
        let w = multi_row_beam(&cfg, Axis::Horizontal, 2, 0.4).unwrap();
        // 4 central elements on Nz/4 = 4 rows
        assert_eq!(w.active_count, 16);
        assert!((w.norm() - 1.0).abs() < 1e-12);
    }
}
