//! Array geometry, coordinate parameterizations, far-field phase error, and
//! the near-field region of a uniform planar array.
//!
//! The UPA sits in the `y = 0` plane, centered at the origin, with `n_x`
//! columns along the x-axis and `n_z` rows along the z-axis at
//! half-wavelength spacing. A location in front of the array is described
//! either by Cartesian coordinates or by the triplet `(y, phi, theta)` with
//! `x = y tan(phi)` and `z = y tan(theta)`.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Propagation speed in m/s. Fixed at 3e8 rather than the CODATA value so
/// that derived distances land on round figures (e.g. a 64x64 array at
/// 28 GHz has a Rayleigh distance of exactly 42.525 m).
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Phase-error threshold defining the near-field region boundary.
pub const NF_PHASE_THRESHOLD: f64 = PI / 8.0;

/// A point or displacement in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn dot(self, o: Point3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Distance to another point.
    pub fn distance(self, o: Point3) -> f64 {
        self.sub(o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// The `(y, phi, theta)` parameterization of a location in front of the
/// array: depth along y plus the two projection angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionTriplet {
    /// Depth in meters; strictly positive.
    pub y_m: f64,
    /// Azimuth: angle between the x-y projection of the position vector and
    /// the positive y-axis.
    pub phi_rad: f64,
    /// Elevation: same for the y-z projection.
    pub theta_rad: f64,
}

impl DirectionTriplet {
    pub fn new(y_m: f64, phi_rad: f64, theta_rad: f64) -> Self {
        DirectionTriplet { y_m, phi_rad, theta_rad }
    }

    /// Converts a Cartesian point with `y > 0` into the triplet form.
    pub fn from_point(p: Point3) -> Result<Self> {
        if !(p.y > 0.0) {
            return Err(Error::domain(format!(
                "direction triplet requires y > 0, got y = {}",
                p.y
            )));
        }
        Ok(DirectionTriplet {
            y_m: p.y,
            phi_rad: (p.x / p.y).atan(),
            theta_rad: (p.z / p.y).atan(),
        })
    }

    /// Inverse of [`DirectionTriplet::from_point`]: `x = y tan(phi)`,
    /// `z = y tan(theta)`.
    pub fn to_point(self) -> Point3 {
        Point3::new(
            self.y_m * self.phi_rad.tan(),
            self.y_m,
            self.theta_rad.tan() * self.y_m,
        )
    }
}

/// Array and carrier description with cached derived lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    n_x: usize,
    n_z: usize,
    carrier_hz: f64,
    wavelength_m: f64,
    spacing_m: f64,
    aperture_x_m: f64,
    aperture_z_m: f64,
    diagonal_m: f64,
}

impl ArrayConfig {
    /// Builds a config for an `n_x` by `n_z` array at the given carrier.
    /// Spacing is fixed to half a wavelength.
    pub fn new(n_x: usize, n_z: usize, carrier_hz: f64) -> Result<Self> {
        if n_x < 1 || n_z < 1 {
            return Err(Error::domain("antenna counts must be at least 1"));
        }
        if !(carrier_hz > 0.0) || !carrier_hz.is_finite() {
            return Err(Error::domain("carrier frequency must be positive"));
        }
        let wavelength_m = SPEED_OF_LIGHT / carrier_hz;
        let spacing_m = wavelength_m / 2.0;
        let aperture_x_m = (n_x as f64 - 1.0) * spacing_m;
        let aperture_z_m = (n_z as f64 - 1.0) * spacing_m;
        Ok(ArrayConfig {
            n_x,
            n_z,
            carrier_hz,
            wavelength_m,
            spacing_m,
            aperture_x_m,
            aperture_z_m,
            diagonal_m: aperture_x_m.hypot(aperture_z_m),
        })
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    /// Total element count `n_x * n_z`.
    pub fn elements(&self) -> usize {
        self.n_x * self.n_z
    }

    pub fn carrier_hz(&self) -> f64 {
        self.carrier_hz
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength_m
    }

    /// Wavenumber `2*pi / lambda`.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength_m
    }

    pub fn spacing(&self) -> f64 {
        self.spacing_m
    }

    pub fn aperture_x(&self) -> f64 {
        self.aperture_x_m
    }

    pub fn aperture_z(&self) -> f64 {
        self.aperture_z_m
    }

    pub fn diagonal(&self) -> f64 {
        self.diagonal_m
    }

    /// Smaller of the two aperture sides; drives focal depths and the
    /// refinement distance rings.
    pub fn min_aperture(&self) -> f64 {
        self.aperture_x_m.min(self.aperture_z_m)
    }

    /// Rayleigh distance `2 D^2 / lambda`.
    pub fn rayleigh_distance(&self) -> f64 {
        2.0 * self.diagonal_m * self.diagonal_m / self.wavelength_m
    }

    /// Fresnel distance `0.62 sqrt(D^3 / lambda)`; the reactive-field bound.
    pub fn fresnel_distance(&self) -> f64 {
        0.62 * (self.diagonal_m.powi(3) / self.wavelength_m).sqrt()
    }
}

/// Cartesian position of the `(x, z)`-th antenna, indices 1-based.
pub fn antenna_position(cfg: &ArrayConfig, x: usize, z: usize) -> Result<Point3> {
    if x < 1 || x > cfg.n_x || z < 1 || z > cfg.n_z {
        return Err(Error::domain(format!(
            "antenna index ({x}, {z}) out of range for {}x{} array",
            cfg.n_x, cfg.n_z
        )));
    }
    Ok(antenna_position_unchecked(cfg, x, z))
}

pub(crate) fn antenna_position_unchecked(cfg: &ArrayConfig, x: usize, z: usize) -> Point3 {
    let d = cfg.spacing_m;
    Point3::new(
        (2.0 * x as f64 - cfg.n_x as f64 - 1.0) / 2.0 * d,
        0.0,
        (2.0 * z as f64 - cfg.n_z as f64 - 1.0) / 2.0 * d,
    )
}

/// Phase error of the far-field (planar-wave) approximation for one
/// antenna-to-point link. Always non-negative.
pub fn ff_phase_error(cfg: &ArrayConfig, x: usize, z: usize, p: Point3) -> Result<f64> {
    let antenna = antenna_position(cfg, x, z)?;
    if p.norm() == 0.0 {
        return Err(Error::domain("phase error is undefined at the origin"));
    }
    Ok(ff_phase_error_at(cfg, antenna, p))
}

/// Phase error for an arbitrary source location on the array plane; the
/// aperture corners and interpolated positions use this directly.
pub fn ff_phase_error_at(cfg: &ArrayConfig, antenna: Point3, p: Point3) -> f64 {
    let v = p.sub(antenna);
    let r = v.norm();
    let p_norm = p.norm();
    let proj = v.dot(p) / p_norm;
    cfg.wavenumber() * (r - proj)
}

fn aperture_corners(cfg: &ArrayConfig) -> [Point3; 4] {
    let hx = cfg.aperture_x_m / 2.0;
    let hz = cfg.aperture_z_m / 2.0;
    [
        Point3::new(-hx, 0.0, -hz),
        Point3::new(hx, 0.0, -hz),
        Point3::new(-hx, 0.0, hz),
        Point3::new(hx, 0.0, hz),
    ]
}

/// Exact near-field membership: maximum corner phase error at least pi/8.
/// The corner maximum equals the maximum over all antennas because the
/// phase error is convex along the aperture.
pub fn is_near_field(cfg: &ArrayConfig, p: Point3) -> bool {
    if p.norm() == 0.0 {
        return true;
    }
    aperture_corners(cfg)
        .iter()
        .any(|&c| ff_phase_error_at(cfg, c, p) >= NF_PHASE_THRESHOLD)
}

/// Approximate near-field boundary distance along a direction: the larger of
/// the two diagonal-ULA boundaries
/// `(2 D^2/lambda) * (1 - (D_x * x/r +- D_z * z/r)^2 / D^2)`.
///
/// A point at distance `r` along `(phi, theta)` is (approximately) in the
/// near field iff `r` is at most the returned value. The exact membership
/// test is [`is_near_field`].
pub fn nf_boundary_distance(cfg: &ArrayConfig, phi_rad: f64, theta_rad: f64) -> f64 {
    let tf = phi_rad.tan();
    let tt = theta_rad.tan();
    let inv_r = (1.0 + tf * tf + tt * tt).sqrt().recip();
    let cx = tf * inv_r; // x / r
    let cz = tt * inv_r; // z / r
    let d2 = cfg.diagonal_m * cfg.diagonal_m;
    let mut best = f64::NEG_INFINITY;
    for s in [1.0, -1.0] {
        let a = cfg.aperture_x_m * cx + s * cfg.aperture_z_m * cz;
        best = best.max(2.0 / cfg.wavelength_m * (d2 - a * a));
    }
    best
}

/// Serving-region membership in the approximate form
/// `{ y > 0, |phi| < pi/4, |theta| < pi/4 }`.
pub fn serving_region_contains(p: Point3) -> bool {
    p.y > 0.0 && p.x.abs() < p.y && p.z.abs() < p.y
}

/// Serving-region membership in the exact aperture-offset form
/// `{ y > 0, |x| < y + D_x/2, |z| < y + D_z/2 }`.
pub fn serving_region_contains_exact(cfg: &ArrayConfig, p: Point3) -> bool {
    p.y > 0.0
        && p.x.abs() < p.y + cfg.aperture_x_m / 2.0
        && p.z.abs() < p.y + cfg.aperture_z_m / 2.0
}

/// Monte Carlo estimate of the near-field region's share of the Rayleigh
/// hemisphere volume, using exact corner-beta membership.
///
/// Deterministic for a given `(samples, seed)` pair: the budget is split
/// into fixed chunks with derived seeds, so the result does not depend on
/// worker count or scheduling.
pub fn nf_volume_fraction(cfg: &ArrayConfig, samples: usize, seed: u64) -> Result<f64> {
    if samples < 10_000 {
        return Err(Error::domain("volume estimate needs at least 1e4 samples"));
    }
    const CHUNKS: usize = 256;
    let base = samples / CHUNKS;
    let extra = samples % CHUNKS;
    let radius = cfg.rayleigh_distance();
    let hits: u64 = (0..CHUNKS)
        .into_par_iter()
        .map(|chunk| {
            let quota = base + usize::from(chunk < extra);
            let mut rng = seed::stream_rng(seed, chunk as u64);
            let mut hits = 0u64;
            let mut accepted = 0usize;
            while accepted < quota {
                let p = Point3::new(
                    rng.gen_range(-radius..radius),
                    rng.gen_range(0.0..radius),
                    rng.gen_range(-radius..radius),
                );
                if p.norm() > radius {
                    continue;
                }
                accepted += 1;
                if is_near_field(cfg, p) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    Ok(hits as f64 / samples as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn cfg64() -> ArrayConfig {
        ArrayConfig::new(64, 64, 28e9).unwrap()
    }

    #[test]
    fn derived_lengths() {
        let cfg = cfg64();
        assert!((cfg.spacing() - 0.005_357_142_857).abs() < 1e-12);
        assert!((cfg.aperture_x() - 0.3375).abs() < 1e-12);
        assert!((cfg.diagonal() - 0.477_297).abs() < 1e-6);
        assert!(cfg.diagonal() >= cfg.aperture_x().max(cfg.aperture_z()));
    }

    #[test]
    fn rayleigh_and_fresnel() {
        let cfg = cfg64();
        assert!((cfg.rayleigh_distance() - 42.525).abs() < 1e-9);
        assert!((cfg.fresnel_distance() - 1.975).abs() < 1e-3);
        let cfg32 = ArrayConfig::new(32, 32, 28e9).unwrap();
        assert!((cfg32.rayleigh_distance() - 10.296).abs() < 5e-4);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(ArrayConfig::new(0, 4, 28e9).is_err());
        assert!(ArrayConfig::new(4, 4, 0.0).is_err());
    }

    #[test]
    fn antenna_positions_small_array() {
        let cfg = ArrayConfig::new(2, 2, 28e9).unwrap();
        let p = antenna_position(&cfg, 1, 1).unwrap();
        let d = cfg.spacing();
        assert!((p.x + d / 2.0).abs() < 1e-15);
        assert!((p.z + d / 2.0).abs() < 1e-15);
        assert_eq!(p.y, 0.0);
        assert!(antenna_position(&cfg, 3, 1).is_err());
        assert!(antenna_position(&cfg, 1, 0).is_err());
    }

    #[test]
    fn antenna_positions_centered() {
        let cfg = cfg64();
        let mut sum = Point3::new(0.0, 0.0, 0.0);
        for x in 1..=cfg.n_x() {
            for z in 1..=cfg.n_z() {
                let p = antenna_position(&cfg, x, z).unwrap();
                sum = Point3::new(sum.x + p.x, sum.y + p.y, sum.z + p.z);
            }
        }
        assert!(sum.norm() / (cfg.elements() as f64) < 1e-12);
        let corner = antenna_position(&cfg, 64, 64).unwrap();
        assert!((corner.x - 0.168_750).abs() < 1e-9);
        assert!((corner.z - 0.168_750).abs() < 1e-9);
    }

    #[test]
    fn direction_round_trip() {
        let t = DirectionTriplet::new(3.0, 0.2, -0.1);
        let p = t.to_point();
        assert!((p.x - 3.0 * 0.2f64.tan()).abs() < 1e-12);
        assert!((p.z + 3.0 * 0.1f64.tan()).abs() < 1e-12);
        let back = DirectionTriplet::from_point(p).unwrap();
        assert!((back.y_m - t.y_m).abs() / t.y_m < 1e-9);
        assert!((back.phi_rad - t.phi_rad).abs() < 1e-9);
        assert!((back.theta_rad - t.theta_rad).abs() < 1e-9);
    }

    #[test]
    fn direction_boresight_and_diagonal() {
        let t = DirectionTriplet::from_point(Point3::new(0.0, 5.0, 0.0)).unwrap();
        assert_eq!(t.phi_rad, 0.0);
        assert_eq!(t.theta_rad, 0.0);
        let t = DirectionTriplet::from_point(Point3::new(5.0, 5.0, 5.0)).unwrap();
        assert!((t.phi_rad - PI / 4.0).abs() < 1e-12);
        assert!((t.theta_rad - PI / 4.0).abs() < 1e-12);
        assert!(DirectionTriplet::from_point(Point3::new(1.0, 0.0, 1.0)).is_err());
        assert!(DirectionTriplet::from_point(Point3::new(1.0, -2.0, 1.0)).is_err());
    }

    #[test]
    fn phase_error_on_axis_is_zero() {
        // odd array: the center antenna sits at the origin, and a point on
        // the array normal through it has projection equal to distance.
        let cfg = ArrayConfig::new(5, 5, 28e9).unwrap();
        let b = ff_phase_error(&cfg, 3, 3, Point3::new(0.0, 7.0, 0.0)).unwrap();
        assert!(b.abs() < 1e-12);
    }

    #[test]
    fn phase_error_corner_at_rayleigh() {
        // the Rayleigh distance is calibrated so the corner error is pi/8
        let cfg = cfg64();
        let b = ff_phase_error(&cfg, 1, 1, Point3::new(0.0, 42.525, 0.0)).unwrap();
        assert!((b - PI / 8.0).abs() / (PI / 8.0) < 0.15);
        assert!((b - PI / 8.0).abs() / (PI / 8.0) < 1e-4);
    }

    #[test]
    fn boundary_symmetry_and_bound() {
        let cfg = cfg64();
        // square array: phi sign does not matter thanks to the +- branches
        let a = nf_boundary_distance(&cfg, 0.3, 0.2);
        let b = nf_boundary_distance(&cfg, -0.3, 0.2);
        assert!((a - b).abs() < 1e-9);
        let mut rng = crate::seed::stream_rng(11, 0);
        for _ in 0..200 {
            let phi = rng.gen_range(-PI / 4.0..PI / 4.0);
            let theta = rng.gen_range(-PI / 4.0..PI / 4.0);
            assert!(nf_boundary_distance(&cfg, phi, theta) <= cfg.rayleigh_distance() + 1e-9);
        }
    }

    #[test]
    fn volume_fraction_deterministic() {
        let cfg = ArrayConfig::new(16, 16, 28e9).unwrap();
        let a = nf_volume_fraction(&cfg, 20_000, 9).unwrap();
        let b = nf_volume_fraction(&cfg, 20_000, 9).unwrap();
        assert_eq!(a, b);
        assert!(nf_volume_fraction(&cfg, 100, 9).is_err());
    }
}
