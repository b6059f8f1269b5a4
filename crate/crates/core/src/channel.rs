//! Seeded wideband MIMO channels from a simplified clustered-delay-line model.
//!
//! Each cluster has a fixed delay, power and mean arrival/departure angles.
//! Per realization, every ray gets Laplacian angle offsets around the
//! cluster means and a uniform random phase. Rays are placed on the sample
//! grid with a truncated sinc kernel, and the time-domain taps are taken to
//! the frequency domain with an `N_SC`-point DFT.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::tensor::Tensor3;

const DEFAULT_PROFILE_JSON: &str = include_str!("default_profile.json");

/// Uniform planar array; elements are vectorized row index fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub rows: usize,
    pub cols: usize,
    /// Element spacing in wavelengths.
    #[serde(default = "default_spacing")]
    pub spacing: f64,
}

fn default_spacing() -> f64 {
    0.5
}

impl ArrayGeometry {
    pub fn new(rows: usize, cols: usize) -> Self {
        ArrayGeometry {
            rows,
            cols,
            spacing: default_spacing(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Array response with unit-modulus entries
/// `exp(j2π·d·(c·sinθ·cosφ + r·sinθ·sinφ))` for element `(r, c)`, where `φ`
/// is the azimuth and `θ` the elevation off boresight.
pub fn steering_vector(geom: &ArrayGeometry, azimuth: f64, elevation: f64) -> CMatrix {
    let (sa, ca) = azimuth.sin_cos();
    let se = elevation.sin();
    let k = 2.0 * PI * geom.spacing;
    CMatrix::from_fn(geom.len(), 1, |idx, _| {
        let r = (idx % geom.rows) as f64;
        let c = (idx / geom.rows) as f64;
        C64::from_polar(1.0, k * (c * se * ca + r * se * sa))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub delay_s: f64,
    /// Linear power; normalized across clusters at generation time.
    pub power: f64,
    pub azimuth_arrival: f64,
    pub elevation_arrival: f64,
    pub azimuth_departure: f64,
    pub elevation_departure: f64,
    /// Standard deviation of the Laplacian per-ray angle offsets (radians).
    pub angle_spread: f64,
    pub rays: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    pub version: u32,
    pub name: String,
    pub sampling_rate_hz: f64,
    pub kernel_half_width: usize,
    pub bs_array: ArrayGeometry,
    pub ue_array: ArrayGeometry,
    pub clusters: Vec<ClusterParams>,
}

impl ChannelProfile {
    /// The embedded profile: 8 clusters of 20 rays, exponential power-delay
    /// profile with 100 ns delay spread, 5° ray spread, 8×8 BS and 2×2 UE
    /// arrays, 30.72 MS/s. BS-side cluster centres lie within a sector
    /// (20° azimuth, 5° elevation spread); UE-side centres are spread widely.
    /// `scripts/gen_default_profile.py` regenerates it.
    pub fn default_profile() -> Self {
        Self::from_json_str(DEFAULT_PROFILE_JSON).expect("embedded profile is valid")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let p: ChannelProfile = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.clusters.is_empty() {
            return Err(Error::EmptyProfile);
        }
        if self.bs_array.is_empty() || self.ue_array.is_empty() {
            return Err(Error::InvalidConfig("array with no elements".into()));
        }
        if !(self.sampling_rate_hz > 0.0) {
            return Err(Error::InvalidConfig("sampling rate must be positive".into()));
        }
        for (i, c) in self.clusters.iter().enumerate() {
            if !(c.power >= 0.0) || !(c.delay_s >= 0.0) || c.rays == 0 || !(c.angle_spread >= 0.0) {
                return Err(Error::InvalidConfig(format!("cluster {i} is malformed: {c:?}")));
            }
        }
        if self.clusters.iter().map(|c| c.power).sum::<f64>() <= 0.0 {
            return Err(Error::ZeroEnergy);
        }
        Ok(())
    }

    pub fn n_bs(&self) -> usize {
        self.bs_array.len()
    }

    pub fn n_ue(&self) -> usize {
        self.ue_array.len()
    }

    /// `ceil(max delay · f_s) + half_width + 1`.
    pub fn n_taps(&self) -> usize {
        let max_delay = self.clusters.iter().map(|c| c.delay_s).fold(0.0, f64::max);
        (max_delay * self.sampling_rate_hz).ceil() as usize + self.kernel_half_width + 1
    }

    fn delay_samples(&self, c: &ClusterParams) -> f64 {
        c.delay_s * self.sampling_rate_hz
    }

    /// Kernel weight of tap `t` for a ray at fractional sample delay `x`.
    fn kernel(&self, t: usize, x: f64) -> f64 {
        let d = t as f64 - x;
        if d.abs() > self.kernel_half_width as f64 {
            0.0
        } else if d == 0.0 {
            1.0
        } else {
            (PI * d).sin() / (PI * d)
        }
    }

    /// Scale that makes `E‖H‖_F² = N_BS·N_UE·N_SC`. Ray phases are i.i.d.
    /// uniform, so the expectation is the power-weighted sum of each
    /// cluster's kernel energy across subcarriers.
    fn normalization(&self, n_sc: usize) -> Result<f64> {
        let total: f64 = self.clusters.iter().map(|c| c.power).sum();
        let n_taps = self.n_taps();
        let mut energy = 0.0;
        for c in &self.clusters {
            let x = self.delay_samples(c);
            let weights: Vec<f64> = (0..n_taps).map(|t| self.kernel(t, x)).collect();
            let mut e = 0.0;
            for k in 0..n_sc {
                let mut acc = C64::new(0.0, 0.0);
                for (t, &w) in weights.iter().enumerate() {
                    acc += C64::from_polar(w, -2.0 * PI * (k * t) as f64 / n_sc as f64);
                }
                e += acc.norm_sqr();
            }
            energy += c.power / total * e;
        }
        if energy <= 0.0 {
            return Err(Error::ZeroEnergy);
        }
        Ok((n_sc as f64 / energy).sqrt())
    }

    pub fn generate(&self, n_sc: usize, seed: u64) -> Result<ChannelRealization> {
        generate_channel(self, n_sc, seed)
    }
}

impl Default for ChannelProfile {
    fn default() -> Self {
        Self::default_profile()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Time-domain taps, `N_BS × N_UE × N_taps`.
    pub taps: Tensor3,
    /// Per-subcarrier matrices `H_k`, `N_BS × N_UE`.
    pub slices: Vec<CMatrix>,
    /// `[H_1 … H_{N_SC}]`, `N_BS × N_UE·N_SC`.
    pub total: CMatrix,
}

fn laplacian<R: Rng + ?Sized>(rng: &mut R, std_dev: f64) -> f64 {
    if std_dev == 0.0 {
        return 0.0;
    }
    let b = std_dev / std::f64::consts::SQRT_2;
    let u: f64 = rng.random::<f64>() - 0.5;
    -b * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
}

pub fn generate_channel(profile: &ChannelProfile, n_sc: usize, seed: u64) -> Result<ChannelRealization> {
    profile.validate()?;
    if n_sc == 0 {
        return Err(Error::InvalidConfig("n_sc must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n_bs, n_ue, n_taps) = (profile.n_bs(), profile.n_ue(), profile.n_taps());
    let total_power: f64 = profile.clusters.iter().map(|c| c.power).sum();
    let scale = profile.normalization(n_sc)?;

    let mut taps = Tensor3::zeros([n_bs, n_ue, n_taps]);
    for c in &profile.clusters {
        let amp = (c.power / total_power / c.rays as f64).sqrt();
        let mut spatial = CMatrix::zeros(n_bs, n_ue);
        for _ in 0..c.rays {
            let az_a = c.azimuth_arrival + laplacian(&mut rng, c.angle_spread);
            let el_a = c.elevation_arrival + laplacian(&mut rng, c.angle_spread);
            let az_d = c.azimuth_departure + laplacian(&mut rng, c.angle_spread);
            let el_d = c.elevation_departure + laplacian(&mut rng, c.angle_spread);
            let phase = rng.random::<f64>() * 2.0 * PI;
            let a_bs = steering_vector(&profile.bs_array, az_a, el_a);
            let a_ue = steering_vector(&profile.ue_array, az_d, el_d);
            spatial += (a_bs * a_ue.adjoint()) * C64::from_polar(amp, phase);
        }
        let x = profile.delay_samples(c);
        for t in 0..n_taps {
            let w = profile.kernel(t, x) * scale;
            if w == 0.0 {
                continue;
            }
            for u in 0..n_ue {
                for b in 0..n_bs {
                    let v = taps.get(b, u, t) + spatial[(b, u)] * w;
                    taps.set(b, u, t, v);
                }
            }
        }
    }
    let slices = to_frequency(&taps, n_sc);
    let total = assemble_total(&slices)?;
    Ok(ChannelRealization { taps, slices, total })
}

/// `H_k(a, b) = Σ_t taps(a, b, t)·exp(−j2π·k·t/N_SC)` (zero-based `k`, `t`).
/// Taps beyond `n_sc` alias onto the same subcarrier grid.
pub fn to_frequency(taps: &Tensor3, n_sc: usize) -> Vec<CMatrix> {
    let [n_bs, n_ue, n_taps] = taps.dims();
    (0..n_sc)
        .map(|k| {
            let mut h = CMatrix::zeros(n_bs, n_ue);
            for t in 0..n_taps {
                let w = C64::from_polar(1.0, -2.0 * PI * ((k * t) % n_sc) as f64 / n_sc as f64);
                for u in 0..n_ue {
                    for b in 0..n_bs {
                        h[(b, u)] += taps.get(b, u, t) * w;
                    }
                }
            }
            h
        })
        .collect()
}

/// Horizontal concatenation `[H_1 … H_K]`.
pub fn assemble_total(slices: &[CMatrix]) -> Result<CMatrix> {
    let first = slices.first().ok_or_else(|| dim_err("no slices"))?;
    let (rows, cols) = first.shape();
    if let Some((k, s)) = slices.iter().enumerate().find(|(_, s)| s.shape() != (rows, cols)) {
        return Err(dim_err(format!(
            "slice {k} is {:?}, expected {:?}",
            s.shape(),
            (rows, cols)
        )));
    }
    let mut total = CMatrix::zeros(rows, cols * slices.len());
    for (k, s) in slices.iter().enumerate() {
        total.view_mut((0, k * cols), (rows, cols)).copy_from(s);
    }
    Ok(total)
}
