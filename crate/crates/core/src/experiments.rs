//! Monte Carlo harnesses: identification-accuracy tables, SNR-loss sweeps,
//! pilot-overhead reports, and heatmap export.
//!
//! Every harness is seeded and deterministic: trials are keyed by index
//! with counter-based noise streams, fan out across workers, and reduce
//! with compensated order-independent accumulation.

use std::fmt;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{sample_channel, MultipathChannel, NoiseStream};
use crate::codebook::{
    coverage_check_points, region_bounds_at_depth, region_contains, shell_slope_bounds,
    RegionKind,
};
use crate::error::{Error, Result};
use crate::geometry::{ArrayConfig, Point3};
use crate::seed;
use crate::training::{
    benchmark_train, grid_matching_points, oracle_from_channel, three_phase_train,
    two_phase_train, BenchmarkMethod, BenchmarkParams, TrainingOutcome,
};
use crate::wavefield::{
    axis_restricted_diverging_codeword, diverging_codeword, plane_field_sample, Axis, Codeword,
};

/// Every trainer the harnesses can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    TwoPhase,
    ThreePhase,
    UpaPartitioning,
    HierDft,
    DftSweep,
    GridMatching,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::TwoPhase,
        Method::ThreePhase,
        Method::UpaPartitioning,
        Method::HierDft,
        Method::DftSweep,
        Method::GridMatching,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::TwoPhase => "two-phase",
            Method::ThreePhase => "three-phase",
            Method::UpaPartitioning => "upa-partitioning",
            Method::HierDft => "hier-dft",
            Method::DftSweep => "dft-sweep",
            Method::GridMatching => "grid-matching",
        }
    }

    /// RF chains the method needs at the base station.
    pub fn rf_chains(&self, cfg: &ArrayConfig) -> u32 {
        match self {
            Method::TwoPhase | Method::GridMatching => 1,
            Method::ThreePhase | Method::DftSweep => 3,
            Method::UpaPartitioning | Method::HierDft => {
                (cfg.elements() as f64).log2().round() as u32
            }
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown method '{s}'")))
    }
}

/// How UE positions are drawn for an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum UeSampler {
    /// Uniform over the serving-region footprint of one plane.
    PlaneAtDepth { y_m: f64 },
    /// Volume-uniform between two depths within the standard region.
    Volume { depth_lo_m: f64, depth_hi_m: f64 },
    /// Volume-uniform with a widened angular extent (`|tan| < tan_max`).
    WidenedVolume { depth_lo_m: f64, depth_hi_m: f64, tan_max: f64 },
}

impl UeSampler {
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Point3 {
        let (y, half) = match *self {
            UeSampler::PlaneAtDepth { y_m } => (y_m, y_m),
            UeSampler::Volume { depth_lo_m, depth_hi_m } => {
                let y = rng.gen_range(depth_lo_m.powi(3)..depth_hi_m.powi(3)).cbrt();
                (y, y)
            }
            UeSampler::WidenedVolume { depth_lo_m, depth_hi_m, tan_max } => {
                let y = rng.gen_range(depth_lo_m.powi(3)..depth_hi_m.powi(3)).cbrt();
                (y, y * tan_max)
            }
        };
        Point3::new(rng.gen_range(-half..half), y, rng.gen_range(-half..half))
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            UeSampler::PlaneAtDepth { y_m } => y_m > 0.0,
            UeSampler::Volume { depth_lo_m, depth_hi_m } => {
                depth_lo_m > 0.0 && depth_lo_m < depth_hi_m
            }
            UeSampler::WidenedVolume { depth_lo_m, depth_hi_m, tan_max } => {
                depth_lo_m > 0.0 && depth_lo_m < depth_hi_m && tan_max > 0.0
            }
        };
        ok.then_some(())
            .ok_or_else(|| Error::domain("UE sampler depths must be positive and ordered"))
    }
}

/// Full description of one Monte Carlo experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub n_x: usize,
    pub n_z: usize,
    pub carrier_hz: f64,
    pub method: Method,
    pub ue_sampler: UeSampler,
    pub ref_snr_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub rician_db: f64,
    pub l_paths: usize,
    pub m_levels: u32,
    pub k_set: Vec<u32>,
    /// Grid-matching spacing; ignored by the other methods.
    pub grid_spacing_m: Option<f64>,
}

impl ExperimentSpec {
    pub fn config(&self) -> Result<ArrayConfig> {
        ArrayConfig::new(self.n_x, self.n_z, self.carrier_hz)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::domain("experiment needs at least one trial"));
        }
        self.ue_sampler.validate()?;
        self.config().map(|_| ())
    }

    /// Content hash binding a result table to the exact spec that made it.
    pub fn content_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        hex_string(&hasher.finalize())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// One aggregated metric row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub metric: String,
    pub value: f64,
    pub n: usize,
    pub stderr: f64,
}

/// Aggregated experiment output plus reproducibility metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    pub seed: u64,
    pub spec_hash: String,
    /// Full spec echo for the JSON sidecar.
    pub spec: serde_json::Value,
}

impl ResultTable {
    fn new(spec: &ExperimentSpec) -> Self {
        ResultTable {
            rows: Vec::new(),
            seed: spec.seed,
            spec_hash: spec.content_hash(),
            spec: serde_json::to_value(spec).expect("spec serializes"),
        }
    }

    fn push(&mut self, scenario: &str, metric: &str, value: f64, n: usize, stderr: f64) {
        self.rows.push(ResultRow {
            scenario: scenario.to_string(),
            metric: metric.to_string(),
            value,
            n,
            stderr,
        });
    }

    pub fn get(&self, scenario: &str, metric: &str) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.scenario == scenario && r.metric == metric)
    }

    /// Fixed-column CSV: `scenario,metric,value,n,stderr`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "scenario,metric,value,n,stderr")?;
        for r in &self.rows {
            writeln!(out, "{},{},{:.9},{},{:.9}", r.scenario, r.metric, r.value, r.n, r.stderr)?;
        }
        Ok(())
    }

    /// JSON metadata sidecar with the full spec echo.
    pub fn write_metadata_json<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        let meta = serde_json::json!({
            "seed": self.seed,
            "spec_hash": self.spec_hash,
            "spec": self.spec,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&meta)?)?;
        Ok(())
    }
}

/// Kahan-compensated sum; the reduction over trial-indexed values is
/// sequential, so results do not depend on worker count.
fn kahan_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = kahan_sum(values) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    (mean, (kahan_sum(&sq) / (n - 1.0)).sqrt())
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() as f64 - 1.0) * q).round() as usize;
    sorted[idx]
}

/// Point estimate of an identification-accuracy cell.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AccuracyEstimate {
    pub accuracy: f64,
    pub trials: usize,
    /// Binomial standard error.
    pub stderr: f64,
}

/// Estimates the probability that the highest-power codeword's bright
/// region contains the UE, for UEs uniform on the sampled plane and an
/// LOS-only channel at reference SNR `gamma`.
///
/// The focal points must satisfy the coverage constraint on that plane;
/// violating sets are rejected up front.
pub fn identification_accuracy(
    cfg: &ArrayConfig,
    focal_points: &[Point3],
    region_kind: RegionKind,
    y_plane: f64,
    gamma_db: f64,
    trials: usize,
    seed: u64,
) -> Result<AccuracyEstimate> {
    if trials < 1 {
        return Err(Error::domain("need at least one trial"));
    }
    if !coverage_check_points(cfg, focal_points, region_kind, y_plane, 2_000, seed)? {
        return Err(Error::Coverage(format!(
            "{} focal points do not cover the plane at y = {y_plane}",
            focal_points.len()
        )));
    }
    let codewords: Vec<Codeword> = focal_points
        .iter()
        .map(|&v| match region_kind {
            RegionKind::Shell(axis) if cfg.n_z() > 1 => {
                axis_restricted_diverging_codeword(cfg, v, axis)
            }
            _ => diverging_codeword(cfg, v),
        })
        .collect::<Result<_>>()?;
    let sigma2 = 10f64.powf(-gamma_db / 10.0);
    let hits: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = seed::stream_rng(seed, trial as u64 + 1);
            let half = y_plane;
            let ue = Point3::new(
                rng.gen_range(-half..half),
                y_plane,
                rng.gen_range(-half..half),
            );
            // LOS-only reception: b(ue)^T c(v_n) + noise, |g0| = 1
            let b = crate::wavefield::steering_vector(cfg, ue).expect("ue off the array");
            let mut noise = NoiseStream::new(seed, trial as u64);
            let mut best = 0usize;
            let mut best_power = f64::NEG_INFINITY;
            for (n, w) in codewords.iter().enumerate() {
                let signal: num_complex::Complex64 =
                    b.iter().zip(&w.weights).map(|(a, c)| a * c).sum();
                let y = signal + noise.next_noise(sigma2);
                let p = y.norm_sqr();
                if p > best_power {
                    best_power = p;
                    best = n;
                }
            }
            region_contains(cfg, region_kind, focal_points[best], ue)
        })
        .collect();
    let ok = hits.iter().filter(|&&h| h).count();
    let accuracy = ok as f64 / trials as f64;
    Ok(AccuracyEstimate {
        accuracy,
        trials,
        stderr: (accuracy * (1.0 - accuracy) / trials as f64).sqrt(),
    })
}

/// Runs one training trial of an experiment and returns the outcome plus
/// the achieved SNR-loss in dB.
fn run_trial(
    spec: &ExperimentSpec,
    cfg: &ArrayConfig,
    ref_snr_db: f64,
    trial: u64,
) -> Result<(TrainingOutcome, f64)> {
    let mut rng = seed::stream_rng(spec.seed, 0xDEA0 ^ trial);
    let ue = spec.ue_sampler.sample(&mut rng);
    let ch: MultipathChannel = sample_channel(
        cfg,
        ue,
        spec.rician_db,
        spec.l_paths,
        ref_snr_db,
        seed::mix2(spec.seed, trial),
    )?;
    let mut oracle = oracle_from_channel(cfg, &ch, spec.seed, trial)?;
    let outcome = match spec.method {
        Method::TwoPhase => two_phase_train(cfg, &mut oracle, spec.m_levels, &spec.k_set)?,
        Method::ThreePhase => three_phase_train(cfg, &mut oracle, spec.m_levels, &spec.k_set)?,
        Method::UpaPartitioning | Method::HierDft | Method::DftSweep | Method::GridMatching => {
            let bench = match spec.method {
                Method::UpaPartitioning => BenchmarkMethod::UpaPartitioning,
                Method::HierDft => BenchmarkMethod::HierDft,
                Method::DftSweep => BenchmarkMethod::DftSweep,
                _ => BenchmarkMethod::GridMatching,
            };
            let params = BenchmarkParams {
                m_levels: spec.m_levels,
                k_set: (1..=6).collect(),
                grid_spacing_m: spec.grid_spacing_m,
            };
            benchmark_train(cfg, &mut oracle, bench, &params)?
        }
    };
    let metrics = crate::channel::snr_metrics(cfg, &ch, &outcome.chosen)?;
    Ok((outcome, metrics.snr_loss_db))
}

/// SNR-loss sweep over the spec's reference-SNR list: per point, the mean,
/// median and P90 loss over the trial budget.
pub fn snr_loss_sweep(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let cfg = spec.config()?;
    let mut table = ResultTable::new(spec);
    for (snr_idx, &ref_snr) in spec.ref_snr_db.iter().enumerate() {
        let losses: Vec<f64> = (0..spec.trials)
            .into_par_iter()
            .map(|t| {
                let trial = (snr_idx * spec.trials + t) as u64;
                run_trial(spec, &cfg, ref_snr, trial)
                    .map(|(_, loss)| loss)
                    .expect("trial failed")
            })
            .collect();
        let (mean, sd) = mean_and_sd(&losses);
        let mut sorted = losses.clone();
        sorted.sort_by(f64::total_cmp);
        let scenario = format!("{}@{}dB", spec.method, ref_snr);
        let n = losses.len();
        table.push(&scenario, "mean_snr_loss_db", mean, n, sd / (n as f64).sqrt());
        table.push(&scenario, "median_snr_loss_db", percentile(&sorted, 0.5), n, 0.0);
        table.push(&scenario, "p90_snr_loss_db", percentile(&sorted, 0.9), n, 0.0);
    }
    Ok(table)
}

/// Pilot-overhead report: exact localization counts plus min/mean/max of
/// the refinement phase over trials, and the RF-chain requirement.
pub fn overhead_report(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let cfg = spec.config()?;
    let mut table = ResultTable::new(spec);
    let scenario = format!("{}x{}-{}", spec.n_x, spec.n_z, spec.method);
    if spec.method == Method::GridMatching {
        let spacing = spec
            .grid_spacing_m
            .ok_or_else(|| Error::domain("grid-matching overhead needs a spacing"))?;
        let count = grid_matching_points(&cfg, spacing)?.len();
        table.push(&scenario, "phase1_pilots", count as f64, 1, 0.0);
        table.push(&scenario, "total_mean", count as f64, 1, 0.0);
        table.push(&scenario, "rf_chains", spec.method.rf_chains(&cfg) as f64, 1, 0.0);
        return Ok(table);
    }
    let ref_snr = spec.ref_snr_db.first().copied().unwrap_or(35.0);
    let per_trial: Vec<Vec<usize>> = (0..spec.trials)
        .into_par_iter()
        .map(|t| {
            run_trial(spec, &cfg, ref_snr, t as u64)
                .map(|(o, _)| o.pilots_per_phase)
                .expect("trial failed")
        })
        .collect();
    let phases = per_trial[0].len();
    let mut totals: Vec<f64> = vec![0.0; per_trial.len()];
    for (i, counts) in per_trial.iter().enumerate() {
        totals[i] = counts.iter().sum::<usize>() as f64;
    }
    for phase in 0..phases {
        let vals: Vec<f64> = per_trial.iter().map(|c| c[phase] as f64).collect();
        let (mean, sd) = mean_and_sd(&vals);
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let label = format!("phase{}_pilots", phase + 1);
        let n = vals.len();
        table.push(&scenario, &format!("{label}_mean"), mean, n, sd / (n as f64).sqrt());
        table.push(&scenario, &format!("{label}_min"), min, n, 0.0);
        table.push(&scenario, &format!("{label}_max"), max, n, 0.0);
    }
    let (tmean, tsd) = mean_and_sd(&totals);
    table.push(&scenario, "total_mean", tmean, totals.len(), tsd / (totals.len() as f64).sqrt());
    table.push(&scenario, "rf_chains", spec.method.rf_chains(&cfg) as f64, 1, 0.0);
    Ok(table)
}

/// What field to render in a heatmap export.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HeatmapSource {
    Diverging { v: Point3 },
    AxisDiverging { v: Point3, axis: Axis },
    Focusing { u: Point3 },
}

/// Writes the amplitude grid of a codeword on the plane `y = y_plane` to
/// `<path>.csv` (header row of x coordinates, first column of z
/// coordinates) and the analytic bright-region boundary to
/// `<path>_boundary.csv`.
pub fn heatmap_export(
    cfg: &ArrayConfig,
    source: HeatmapSource,
    y_plane: f64,
    extent: Option<f64>,
    resolution: usize,
    path: &Path,
) -> Result<()> {
    let w = match source {
        HeatmapSource::Diverging { v } => diverging_codeword(cfg, v)?,
        HeatmapSource::AxisDiverging { v, axis } => {
            axis_restricted_diverging_codeword(cfg, v, axis)?
        }
        HeatmapSource::Focusing { u } => crate::wavefield::focusing_codeword(cfg, u)?,
    };
    let grid = plane_field_sample(cfg, &w, y_plane, extent, resolution)?;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path.with_extension("csv"))?);
    write!(out, "z\\x")?;
    for x in &grid.xs {
        write!(out, ",{x:.6}")?;
    }
    writeln!(out)?;
    for (j, z) in grid.zs.iter().enumerate() {
        write!(out, "{z:.6}")?;
        for i in 0..grid.xs.len() {
            write!(out, ",{:.9}", grid.at(i, j))?;
        }
        writeln!(out)?;
    }
    drop(out);

    let boundary_path = path.with_file_name(format!(
        "{}_boundary.csv",
        path.file_stem().and_then(|s| s.to_str()).unwrap_or("field")
    ));
    let mut out = std::io::BufWriter::new(std::fs::File::create(boundary_path)?);
    writeln!(out, "curve,x,z")?;
    match source {
        HeatmapSource::Diverging { v } => {
            let ((xlo, xhi), (zlo, zhi)) = region_bounds_at_depth(cfg, v, y_plane);
            for (x, z) in [(xlo, zlo), (xhi, zlo), (xhi, zhi), (xlo, zhi), (xlo, zlo)] {
                writeln!(out, "rect,{x:.6},{z:.6}")?;
            }
        }
        HeatmapSource::AxisDiverging { v, axis } => {
            // the shell boundary traces hyperbolas on the plane; sample the
            // two cone conditions over the transverse coordinate
            let half = extent.unwrap_or(y_plane);
            let (d, lo_label, hi_label) = match axis {
                Axis::Horizontal => (cfg.aperture_x(), "hyperbola_lo", "hyperbola_hi"),
                Axis::Vertical => (cfg.aperture_z(), "hyperbola_lo", "hyperbola_hi"),
            };
            // slopes of the two cones from the focal point
            let slope = |endpoint: f64| -> f64 {
                let along = match axis {
                    Axis::Horizontal => v.x,
                    Axis::Vertical => v.z,
                };
                (endpoint - along) / -v.y
            };
            let (ul, ur) = (slope(-d / 2.0), slope(d / 2.0));
            let n = 257;
            for i in 0..n {
                let t = -half + 2.0 * half * i as f64 / (n as f64 - 1.0);
                let rho = y_plane.hypot(t);
                let lo = ul * rho - d / 2.0;
                let hi = ur * rho + d / 2.0;
                match axis {
                    Axis::Horizontal => {
                        writeln!(out, "{lo_label},{lo:.6},{t:.6}")?;
                        writeln!(out, "{hi_label},{hi:.6},{t:.6}")?;
                    }
                    Axis::Vertical => {
                        writeln!(out, "{lo_label},{t:.6},{lo:.6}")?;
                        writeln!(out, "{hi_label},{t:.6},{hi:.6}")?;
                    }
                }
            }
        }
        HeatmapSource::Focusing { u } => {
            writeln!(out, "focus,{:.6},{:.6}", u.x, u.z)?;
        }
    }
    Ok(())
}

/// Named scenario presets mirroring the evaluation setups.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub n_x: usize,
    pub n_z: usize,
    pub carrier_hz: f64,
    pub m_levels: u32,
    pub k_set: Vec<u32>,
    pub rician_db: f64,
    pub l_paths: usize,
    pub ue_sampler: UeSampler,
    pub ref_snr_db: Vec<f64>,
    pub trials_accuracy: usize,
    pub trials_sweep: usize,
    pub grid_spacing_large_m: f64,
    pub grid_spacing_small_m: f64,
}

impl Preset {
    /// Looks up a preset by name: `fig5`, `fig8a`, `fig8b`, `fig9a`,
    /// `fig9b`, `table1`, `table2`, `table3`.
    pub fn lookup(name: &str) -> Result<Preset> {
        let snrs_sweep: Vec<f64> = (0..=8).map(|i| 5.0 * i as f64).collect();
        let base64 = Preset {
            name: name.to_string(),
            n_x: 64,
            n_z: 64,
            carrier_hz: 28e9,
            m_levels: 9,
            k_set: vec![2, 4, 6],
            rician_db: 13.0,
            l_paths: 8,
            ue_sampler: UeSampler::Volume { depth_lo_m: 7.5, depth_hi_m: 45.0 },
            ref_snr_db: snrs_sweep.clone(),
            trials_accuracy: 2_000,
            trials_sweep: 500,
            grid_spacing_large_m: 0.727_578,
            grid_spacing_small_m: 0.362_544,
        };
        let base32 = Preset {
            n_x: 32,
            n_z: 32,
            m_levels: 8,
            k_set: vec![2, 4],
            ue_sampler: UeSampler::Volume { depth_lo_m: 1.875, depth_hi_m: 11.25 },
            grid_spacing_large_m: 0.358_636,
            grid_spacing_small_m: 0.176_315,
            ..base64.clone()
        };
        Ok(match name {
            "fig5" => Preset {
                ref_snr_db: vec![15.0, 35.0],
                ..base64
            },
            "fig8b" | "table3" => base64,
            "fig8a" => base32,
            "fig9a" => Preset {
                ue_sampler: UeSampler::WidenedVolume {
                    depth_lo_m: 1.875,
                    depth_hi_m: 11.25,
                    tan_max: 3f64.sqrt(),
                },
                ..base32
            },
            "fig9b" => Preset {
                ue_sampler: UeSampler::WidenedVolume {
                    depth_lo_m: 7.5,
                    depth_hi_m: 45.0,
                    tan_max: 3f64.sqrt(),
                },
                ..base64
            },
            "table1" => base64,
            "table2" => Preset {
                n_z: 1,
                m_levels: 9,
                ..base64
            },
            other => {
                return Err(Error::domain(format!(
                    "unknown preset '{other}' (expected fig5, fig8a, fig8b, fig9a, fig9b, table1, table2, table3)"
                )))
            }
        })
    }

    pub fn config(&self) -> Result<ArrayConfig> {
        ArrayConfig::new(self.n_x, self.n_z, self.carrier_hz)
    }

    /// Experiment spec for this preset with a chosen method and seed.
    pub fn experiment(&self, method: Method, trials: usize, seed: u64) -> ExperimentSpec {
        ExperimentSpec {
            n_x: self.n_x,
            n_z: self.n_z,
            carrier_hz: self.carrier_hz,
            method,
            ue_sampler: self.ue_sampler,
            ref_snr_db: self.ref_snr_db.clone(),
            trials,
            seed,
            rician_db: self.rician_db,
            l_paths: self.l_paths,
            m_levels: self.m_levels,
            k_set: self.k_set.clone(),
            grid_spacing_m: Some(self.grid_spacing_large_m),
        }
    }

    /// The Table-1/Table-2 focal-point row `k_x = k_y = k_z = 1`: four grid
    /// points for the UPA, two for the ULA.
    pub fn level_one_focal_points(&self, cfg: &ArrayConfig) -> Vec<Point3> {
        if self.n_z == 1 {
            [-1.0, 1.0]
                .iter()
                .map(|&sx| Point3::new(sx * cfg.aperture_x() / 2.0, -cfg.aperture_x(), 0.0))
                .collect()
        } else {
            let mut v = Vec::new();
            for sx in [-1.0, 1.0] {
                for sz in [-1.0, 1.0] {
                    v.push(Point3::new(
                        sx * cfg.aperture_x() / 2.0,
                        -cfg.aperture_x(),
                        sz * cfg.aperture_z() / 2.0,
                    ));
                }
            }
            v
        }
    }

    /// Table-1/2 sampled plane depth for an interpolation factor `k_yhat`.
    pub fn accuracy_plane_depth(&self, cfg: &ArrayConfig, k_yhat: f64) -> f64 {
        (1.0 - k_yhat) * cfg.fresnel_distance() + k_yhat * cfg.rayleigh_distance()
    }
}

/// Shell slope bounds re-exported for boundary plotting in the CLI.
pub fn shell_bounds_for_plot(m: u32, idx: u32) -> (f64, f64) {
    shell_slope_bounds(m, idx)
}
