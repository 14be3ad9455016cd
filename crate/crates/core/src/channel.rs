//! Rician multipath channel realization, pilot transmission with noise, and
//! SNR metrics.
//!
//! A channel is one LOS path plus `L` NLOS paths, each a (position, complex
//! gain) pair; the receive model is `y(t) = h^T w(t) + n(t)` with
//! `h = sum_l g_l b(s_l)`. Noise draws are counter-based per
//! `(trial, pilot index)` so concurrent trials never share a stream.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ArrayConfig, Point3};
use crate::seed;
use crate::wavefield::{steering_vector, Codeword};

/// One propagation path.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PathComponent {
    pub position: Point3,
    /// Complex gain as a `(re, im)` pair.
    pub gain: (f64, f64),
}

impl PathComponent {
    pub fn gain_c(&self) -> Complex64 {
        Complex64::new(self.gain.0, self.gain.1)
    }
}

/// LOS + NLOS path set with the noise power used for pilot reception.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultipathChannel {
    pub los: PathComponent,
    pub nlos: Vec<PathComponent>,
    /// Noise variance sigma^2 in linear scale.
    pub noise_power: f64,
}

impl MultipathChannel {
    /// Total path power `sum_l |g_l|^2`.
    pub fn total_power(&self) -> f64 {
        self.los.gain_c().norm_sqr()
            + self.nlos.iter().map(|p| p.gain_c().norm_sqr()).sum::<f64>()
    }

    /// LOS-only reference SNR `|g_0|^2 / sigma^2` (identification metric
    /// convention).
    pub fn los_reference_snr(&self) -> f64 {
        self.los.gain_c().norm_sqr() / self.noise_power
    }

    /// Total-power reference SNR `sum_l |g_l|^2 / sigma^2` (SNR-loss sweep
    /// convention).
    pub fn reference_snr(&self) -> f64 {
        self.total_power() / self.noise_power
    }

    /// Pure LOS channel with unit-magnitude gain and noise power set from
    /// the LOS-only reference SNR `gamma`.
    pub fn los_only(ue: Point3, gamma_db: f64, seed: u64) -> Result<Self> {
        if !(ue.y > 0.0) {
            return Err(Error::domain("UE must be in front of the array"));
        }
        let mut rng = seed::stream_rng(seed, 0x105);
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        Ok(MultipathChannel {
            los: PathComponent {
                position: ue,
                gain: (phase.cos(), phase.sin()),
            },
            nlos: Vec::new(),
            noise_power: 10f64.powf(-gamma_db / 10.0),
        })
    }

    /// Serializes the realization to a JSON record for replay.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Draws a Rician channel: unit-magnitude uniform-phase LOS gain, i.i.d.
/// circular complex normal NLOS gains rescaled so the Rician factor holds
/// exactly, scatterers uniform over the serving region between the Fresnel
/// and Rayleigh distances, and noise power set from the total-power
/// reference SNR.
pub fn sample_channel(
    cfg: &ArrayConfig,
    ue: Point3,
    rician_db: f64,
    l_paths: usize,
    ref_snr_db: f64,
    seed: u64,
) -> Result<MultipathChannel> {
    if !(ue.y > 0.0) {
        return Err(Error::domain("UE must be in front of the array"));
    }
    let mut rng = seed::stream_rng(seed, 0xC4A);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let g0 = Complex64::from_polar(1.0, phase);
    let mut nlos = Vec::with_capacity(l_paths);
    if l_paths > 0 && rician_db.is_finite() {
        let mut raw: Vec<Complex64> = (0..l_paths)
            .map(|_| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            })
            .collect();
        let target = g0.norm_sqr() * 10f64.powf(-rician_db / 10.0);
        let total: f64 = raw.iter().map(|g| g.norm_sqr()).sum();
        let scale = (target / total).sqrt();
        for g in &mut raw {
            *g *= scale;
        }
        let (y_lo, y_hi) = (cfg.fresnel_distance(), cfg.rayleigh_distance());
        for g in raw {
            // volume-uniform depth between the Fresnel and Rayleigh bounds
            let y = rng
                .gen_range(y_lo.powi(3)..y_hi.powi(3))
                .cbrt();
            let pos = Point3::new(rng.gen_range(-y..y), y, rng.gen_range(-y..y));
            nlos.push(PathComponent { position: pos, gain: (g.re, g.im) });
        }
    }
    let mut ch = MultipathChannel {
        los: PathComponent { position: ue, gain: (g0.re, g0.im) },
        nlos,
        noise_power: 0.0,
    };
    ch.noise_power = ch.total_power() / 10f64.powf(ref_snr_db / 10.0);
    Ok(ch)
}

/// Channel vector `h = sum_l g_l b(s_l)` over the array.
pub fn channel_vector(cfg: &ArrayConfig, ch: &MultipathChannel) -> Result<Vec<Complex64>> {
    let mut h = steering_vector(cfg, ch.los.position)?;
    let g0 = ch.los.gain_c();
    for v in &mut h {
        *v *= g0;
    }
    for path in &ch.nlos {
        let b = steering_vector(cfg, path.position)?;
        let g = path.gain_c();
        for (acc, s) in h.iter_mut().zip(b) {
            *acc += g * s;
        }
    }
    Ok(h)
}

/// One received pilot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PilotObservation {
    /// Received complex sample `h^T w + n`.
    pub value: (f64, f64),
    pub codeword_id: String,
}

impl PilotObservation {
    pub fn value_c(&self) -> Complex64 {
        Complex64::new(self.value.0, self.value.1)
    }

    /// Received pilot power `|y|^2`, the quantity trainers compare.
    pub fn power(&self) -> f64 {
        self.value_c().norm_sqr()
    }
}

/// Counter-based complex-Gaussian noise stream: the `t`-th draw of trial
/// `i` depends only on `(seed, i, t)`, never on evaluation order.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    seed: u64,
    trial: u64,
    counter: u64,
}

impl NoiseStream {
    pub fn new(seed: u64, trial: u64) -> Self {
        NoiseStream { seed, trial, counter: 0 }
    }

    /// Next complex noise sample with variance `sigma2`.
    pub fn next_noise(&mut self, sigma2: f64) -> Complex64 {
        let mut rng = seed::counter_rng(self.seed, self.trial, self.counter);
        self.counter += 1;
        let std = (sigma2 / 2.0).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(std * re, std * im)
    }

    pub fn position(&self) -> u64 {
        self.counter
    }
}

/// Inner product `h^T w` over the active codeword entries.
pub fn receive_amplitude(h: &[Complex64], w: &Codeword) -> Complex64 {
    h.iter()
        .zip(&w.weights)
        .map(|(a, b)| a * b)
        .sum()
}

/// Transmits one pilot through the channel: `h^T w + n`, drawing the noise
/// from the stream.
pub fn pilot_response(
    h: &[Complex64],
    ch: &MultipathChannel,
    w: &Codeword,
    stream: &mut NoiseStream,
) -> PilotObservation {
    let value = receive_amplitude(h, w) + stream.next_noise(ch.noise_power);
    PilotObservation {
        value: (value.re, value.im),
        codeword_id: w.id.clone(),
    }
}

/// SNR bookkeeping for a selected codeword.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SnrMetrics {
    /// `|h^T w|^2 / sigma^2`.
    pub achieved_snr: f64,
    /// Full-array-gain bound `N_x N_z sum_l |g_l|^2 / sigma^2`.
    pub upper_bound_snr: f64,
    /// `10 log10(upper / achieved)`; independent of sigma^2.
    pub snr_loss_db: f64,
    /// Total-power reference SNR.
    pub reference_snr: f64,
    /// LOS-only reference SNR.
    pub los_reference_snr: f64,
}

/// Evaluates the SNR metrics of a unit-norm codeword against a channel.
pub fn snr_metrics(cfg: &ArrayConfig, ch: &MultipathChannel, w: &Codeword) -> Result<SnrMetrics> {
    if (w.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::domain("snr_metrics requires a unit-norm codeword"));
    }
    let h = channel_vector(cfg, ch)?;
    let signal = receive_amplitude(&h, w).norm_sqr();
    let upper_power = cfg.elements() as f64 * ch.total_power();
    Ok(SnrMetrics {
        achieved_snr: signal / ch.noise_power,
        upper_bound_snr: upper_power / ch.noise_power,
        snr_loss_db: 10.0 * (upper_power / signal).log10(),
        reference_snr: ch.reference_snr(),
        los_reference_snr: ch.los_reference_snr(),
    })
}
