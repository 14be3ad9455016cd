//! Near-field steering vectors, diverging/focusing/axis-restricted/DFT
//! codewords, and received-amplitude evaluation.
//!
//! All codewords are phase-only over their active elements (single-RF-chain
//! property) and unit-norm overall. Weights are flattened in x-major order:
//! entry `(x-1)*n_z + z` for 1-based antenna indices `(x, z)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{antenna_position_unchecked, ArrayConfig, Point3};

/// Which central ULA of the UPA a codeword or region refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// The central row along the x-axis.
    Horizontal,
    /// The central column along the z-axis.
    Vertical,
}

/// Provenance tag carried by generated codewords.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodewordLabel {
    Diverging,
    Focusing,
    AxisDiverging,
    Dft,
    Custom,
}

/// Complex weight vector applied at the array, with an activation mask
/// implied by zero entries.
#[derive(Debug, Clone)]
pub struct Codeword {
    /// Flattened weights, entry `(x-1)*n_z + z`.
    pub weights: Vec<Complex64>,
    /// Number of nonzero entries.
    pub active_count: usize,
    pub label: CodewordLabel,
    /// Short human-readable identifier used in training traces.
    pub id: String,
}

impl Codeword {
    /// Wraps raw weights, checking the unit-norm and phase-only invariants.
    pub fn new(weights: Vec<Complex64>, label: CodewordLabel, id: String) -> Result<Self> {
        let active_count = weights.iter().filter(|w| w.norm_sqr() > 0.0).count();
        if active_count == 0 {
            return Err(Error::domain("codeword has no active elements"));
        }
        let expected = (active_count as f64).sqrt().recip();
        let mut norm_sq = 0.0;
        for w in &weights {
            let m = w.norm();
            if m > 0.0 && (m - expected).abs() > 1e-12 {
                return Err(Error::domain(
                    "active codeword entries must share magnitude 1/sqrt(active_count)",
                ));
            }
            norm_sq += m * m;
        }
        if (norm_sq.sqrt() - 1.0).abs() > 1e-12 {
            return Err(Error::domain("codeword must have unit norm"));
        }
        Ok(Codeword { weights, active_count, label, id })
    }

    fn from_phases(
        n: usize,
        active: impl Iterator<Item = (usize, f64)>,
        active_count: usize,
        label: CodewordLabel,
        id: String,
    ) -> Self {
        let amp = (active_count as f64).sqrt().recip();
        let mut weights = vec![Complex64::new(0.0, 0.0); n];
        for (idx, phase) in active {
            weights[idx] = Complex64::from_polar(amp, phase);
        }
        Codeword { weights, active_count, label, id }
    }

    pub fn norm(&self) -> f64 {
        self.weights.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Flattened weight index of the 1-based antenna `(x, z)`.
#[inline]
pub fn flat_index(cfg: &ArrayConfig, x: usize, z: usize) -> usize {
    (x - 1) * cfg.n_z() + (z - 1)
}

/// Near-field steering vector of a point source at `s`: per-antenna phases
/// `exp(-j 2pi/lambda * |antenna -> s|)`, all entries unit magnitude.
pub fn steering_vector(cfg: &ArrayConfig, s: Point3) -> Result<Vec<Complex64>> {
    let k0 = cfg.wavenumber();
    let mut out = Vec::with_capacity(cfg.elements());
    for x in 1..=cfg.n_x() {
        for z in 1..=cfg.n_z() {
            let a = antenna_position_unchecked(cfg, x, z);
            let r = a.distance(s);
            if r == 0.0 {
                return Err(Error::domain(
                    "steering point coincides with an antenna element",
                ));
            }
            out.push(Complex64::from_polar(1.0, -k0 * r));
        }
    }
    Ok(out)
}

/// Diverging codeword of a virtual focal point behind the array
/// (`v.y < 0`): the normalized steering vector of `v`.
pub fn diverging_codeword(cfg: &ArrayConfig, v: Point3) -> Result<Codeword> {
    if !(v.y < 0.0) {
        return Err(Error::domain(
            "virtual focal point must be behind the array (y < 0)",
        ));
    }
    let b = steering_vector(cfg, v)?;
    let amp = (cfg.elements() as f64).sqrt().recip();
    let weights = b.into_iter().map(|w| w * amp).collect();
    Ok(Codeword {
        weights,
        active_count: cfg.elements(),
        label: CodewordLabel::Diverging,
        id: format!("div({:.4},{:.4},{:.4})", v.x, v.y, v.z),
    })
}

/// Focusing codeword concentrating power at `u` in front of the array:
/// elementwise conjugate of the normalized steering vector.
pub fn focusing_codeword(cfg: &ArrayConfig, u: Point3) -> Result<Codeword> {
    if !(u.y > 0.0) {
        return Err(Error::domain("focus point must be in front of the array (y > 0)"));
    }
    let b = steering_vector(cfg, u)?;
    let amp = (cfg.elements() as f64).sqrt().recip();
    let weights = b.into_iter().map(|w| w.conj() * amp).collect();
    Ok(Codeword {
        weights,
        active_count: cfg.elements(),
        label: CodewordLabel::Focusing,
        id: format!("foc({:.4},{:.4},{:.4})", u.x, u.y, u.z),
    })
}

/// 1-based index of the active central row/column for axis-restricted
/// codewords: `ceil(n/2)`.
pub(crate) fn central_index(n: usize) -> usize {
    n.div_ceil(2)
}

/// Diverging codeword restricted to the central horizontal or vertical ULA;
/// inactive elements are zero-weighted.
pub fn axis_restricted_diverging_codeword(
    cfg: &ArrayConfig,
    v: Point3,
    axis: Axis,
) -> Result<Codeword> {
    if !(v.y < 0.0) {
        return Err(Error::domain(
            "virtual focal point must be behind the array (y < 0)",
        ));
    }
    let k0 = cfg.wavenumber();
    let n = cfg.elements();
    let (active_count, tag) = match axis {
        Axis::Horizontal => (cfg.n_x(), "h"),
        Axis::Vertical => (cfg.n_z(), "v"),
    };
    let indices: Vec<(usize, f64)> = match axis {
        Axis::Horizontal => {
            let zc = central_index(cfg.n_z());
            (1..=cfg.n_x())
                .map(|x| {
                    let a = antenna_position_unchecked(cfg, x, zc);
                    (flat_index(cfg, x, zc), -k0 * a.distance(v))
                })
                .collect()
        }
        Axis::Vertical => {
            let xc = central_index(cfg.n_x());
            (1..=cfg.n_z())
                .map(|z| {
                    let a = antenna_position_unchecked(cfg, xc, z);
                    (flat_index(cfg, xc, z), -k0 * a.distance(v))
                })
                .collect()
        }
    };
    Ok(Codeword::from_phases(
        n,
        indices.into_iter(),
        active_count,
        CodewordLabel::AxisDiverging,
        format!("adiv-{tag}({:.4},{:.4},{:.4})", v.x, v.y, v.z),
    ))
}

/// Far-field steering codeword on a central ULA at a given `sin(psi)`,
/// optionally restricted to the `active` central elements (wide beams).
pub fn axis_steering_codeword(
    cfg: &ArrayConfig,
    axis: Axis,
    sin_psi: f64,
    active: Option<usize>,
) -> Result<Codeword> {
    let n_axis = match axis {
        Axis::Horizontal => cfg.n_x(),
        Axis::Vertical => cfg.n_z(),
    };
    let active = active.unwrap_or(n_axis);
    if active == 0 || active > n_axis {
        return Err(Error::domain("active element count out of range"));
    }
    if !(-1.0..=1.0).contains(&sin_psi) {
        return Err(Error::domain("sin(psi) must lie in [-1, 1]"));
    }
    // central `active` elements of the axis
    let start = (n_axis - active) / 2 + 1;
    let k0 = cfg.wavenumber();
    let d = cfg.spacing();
    let indices: Vec<(usize, f64)> = (start..start + active)
        .map(|i| {
            let (idx, coord) = match axis {
                Axis::Horizontal => {
                    let zc = central_index(cfg.n_z());
                    (flat_index(cfg, i, zc), antenna_position_unchecked(cfg, i, zc).x)
                }
                Axis::Vertical => {
                    let xc = central_index(cfg.n_x());
                    (flat_index(cfg, xc, i), antenna_position_unchecked(cfg, xc, i).z)
                }
            };
            // exp(-j 2pi/lambda * coord * sin(psi)) = exp(-j pi n sin(psi))
            (idx, -k0 * d * (coord / d) * sin_psi)
        })
        .collect();
    let tag = match axis {
        Axis::Horizontal => "h",
        Axis::Vertical => "v",
    };
    Ok(Codeword::from_phases(
        cfg.elements(),
        indices.into_iter(),
        active,
        CodewordLabel::Dft,
        format!("dft-{tag}(s={sin_psi:.5},a={active})"),
    ))
}

/// DFT codeword on the central horizontal or vertical ULA.
///
/// Without a `level`, `beam_index` in `1..=n` selects the full-resolution
/// orthogonal beam steering at `sin(psi) = -1 + (2 i - 1)/n`. With
/// `level = m`, only the central `2^m` elements are activated and the beam
/// grid has `2^m` entries, realizing the standard hierarchical wide beams by
/// subarray deactivation.
pub fn dft_codeword(
    cfg: &ArrayConfig,
    axis: Axis,
    beam_index: usize,
    level: Option<u32>,
) -> Result<Codeword> {
    let n_axis = match axis {
        Axis::Horizontal => cfg.n_x(),
        Axis::Vertical => cfg.n_z(),
    };
    let (beams, active) = match level {
        None => (n_axis, n_axis),
        Some(m) => {
            let width = 1usize << m;
            if width > n_axis {
                return Err(Error::domain(format!(
                    "level {m} needs {width} elements, axis has {n_axis}"
                )));
            }
            (width, width)
        }
    };
    if beam_index < 1 || beam_index > beams {
        return Err(Error::domain(format!(
            "beam index {beam_index} out of range for {beams} beams"
        )));
    }
    let sin_psi = -1.0 + (2.0 * beam_index as f64 - 1.0) / beams as f64;
    axis_steering_codeword(cfg, axis, sin_psi, Some(active))
}

/// Amplitude of the received pilot `|c(p)^T w|` for a UE at `p`, where
/// `c(p)` is the normalized steering codeword at `p`. Lies in `[0, 1]` for
/// unit-norm phase-only `w` over the full array.
pub fn normalized_response(cfg: &ArrayConfig, w: &Codeword, p: Point3) -> Result<f64> {
    if !(p.y > 0.0) {
        return Err(Error::domain("response point must be in front of the array"));
    }
    let k0 = cfg.wavenumber();
    let amp = (cfg.elements() as f64).sqrt().recip();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut idx = 0;
    for x in 1..=cfg.n_x() {
        for z in 1..=cfg.n_z() {
            let wv = w.weights[idx];
            idx += 1;
            if wv.norm_sqr() == 0.0 {
                continue;
            }
            let a = antenna_position_unchecked(cfg, x, z);
            acc += Complex64::from_polar(amp, -k0 * a.distance(p)) * wv;
        }
    }
    Ok(acc.norm())
}

/// Sampled amplitude field on a plane `y = y_plane`.
#[derive(Debug, Clone)]
pub struct FieldGrid {
    /// Column coordinates (x) in meters.
    pub xs: Vec<f64>,
    /// Row coordinates (z) in meters.
    pub zs: Vec<f64>,
    /// Amplitudes, row-major over `(x, z)`: entry `i * zs.len() + j`.
    pub amp: Vec<f64>,
}

impl FieldGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.amp[i * self.zs.len() + j]
    }

    /// Location and value of the strongest cell.
    pub fn peak(&self) -> (usize, usize, f64) {
        let (mut bi, mut bj, mut bv) = (0, 0, f64::NEG_INFINITY);
        for i in 0..self.xs.len() {
            for j in 0..self.zs.len() {
                let v = self.at(i, j);
                if v > bv {
                    (bi, bj, bv) = (i, j, v);
                }
            }
        }
        (bi, bj, bv)
    }
}

/// Samples `normalized_response` on a regular grid over the plane
/// `y = y_plane`. `extent` is the half-width in meters; `None` uses the
/// serving-region footprint at that depth. Rows are computed in parallel.
pub fn plane_field_sample(
    cfg: &ArrayConfig,
    w: &Codeword,
    y_plane_m: f64,
    extent: Option<f64>,
    resolution: usize,
) -> Result<FieldGrid> {
    if !(y_plane_m > 0.0) {
        return Err(Error::domain("sampling plane must have y > 0"));
    }
    if resolution < 2 {
        return Err(Error::domain("grid resolution must be at least 2"));
    }
    let half = extent.unwrap_or(y_plane_m);
    let coords = |n: usize| -> Vec<f64> {
        (0..n)
            .map(|i| -half + 2.0 * half * i as f64 / (n as f64 - 1.0))
            .collect()
    };
    let xs = coords(resolution);
    let zs = coords(resolution);
    let amp: Vec<f64> = xs
        .par_iter()
        .flat_map_iter(|&x| {
            let zs = zs.clone();
            zs.into_iter().map(move |z| (x, z))
        })
        .map(|(x, z)| {
            normalized_response(cfg, w, Point3::new(x, y_plane_m, z)).unwrap_or(0.0)
        })
        .collect();
    Ok(FieldGrid { xs, zs, amp })
}
