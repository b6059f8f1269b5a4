//! Uplink training measurements for a hybrid analog-digital receiver.
//!
//! For block `i` and subcarrier `k` the BS observes
//! `Ȳ_{k,i} = Ā_iᴴ·H_k·F_k + Ā_iᴴ·Z̄_{k,i}` and right-filters with `F_kᴴ`.
//! Stacking the filtered blocks over `i` and then over `k` gives
//! `Y = A·H + Z` with `A = [Ā_1 … Ā_T]ᴴ`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::error::{dim_err, Error, Result};
use crate::kron::FactorShape;
use crate::linalg::{self, CMatrix, C64};
use crate::tensor::{fold, Mode, Tensor3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_bs: usize,
    pub n_ue: usize,
    pub n_sc: usize,
    pub n_rf: usize,
    pub n_g: usize,
    pub t_bs: usize,
    pub t_ue: usize,
}

impl SystemConfig {
    /// 64 BS antennas, 4 UE antennas, 16 subcarriers, 4 RF chains in 2
    /// groups, `T_UE = N_UE`, and the given number of training blocks.
    pub fn reference(t_bs: usize) -> Self {
        SystemConfig {
            n_bs: 64,
            n_ue: 4,
            n_sc: 16,
            n_rf: 4,
            n_g: 2,
            t_bs,
            t_ue: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("n_bs", self.n_bs),
            ("n_ue", self.n_ue),
            ("n_sc", self.n_sc),
            ("n_rf", self.n_rf),
            ("n_g", self.n_g),
            ("t_bs", self.t_bs),
            ("t_ue", self.t_ue),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidConfig(format!("{name} must be positive")));
        }
        if self.n_bs % self.n_g != 0 || self.n_rf % self.n_g != 0 {
            return Err(Error::InvalidConfig(format!(
                "n_g = {} must divide n_bs = {} and n_rf = {}",
                self.n_g, self.n_bs, self.n_rf
            )));
        }
        if self.t_ue < self.n_ue {
            return Err(Error::InvalidConfig(format!(
                "t_ue = {} must be at least n_ue = {}",
                self.t_ue, self.n_ue
            )));
        }
        Ok(())
    }

    /// Antennas per group.
    pub fn n_bs_per_group(&self) -> usize {
        self.n_bs / self.n_g
    }

    /// RF chains per group.
    pub fn n_rf_per_group(&self) -> usize {
        self.n_rf / self.n_g
    }

    /// Number of combined measurements per column, `L = T_BS·N_RF`.
    pub fn l(&self) -> usize {
        self.t_bs * self.n_rf
    }

    /// `J = N_UE·N_SC`.
    pub fn j(&self) -> usize {
        self.n_ue * self.n_sc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalogCombiner {
    /// `Ā_i`, each `N_BS × N_RF` and block-diagonal.
    pub blocks: Vec<CMatrix>,
    /// `A = [Ā_1 … Ā_T]ᴴ`, `L × N_BS`.
    pub stacked: CMatrix,
}

impl AnalogCombiner {
    pub fn from_blocks(blocks: Vec<CMatrix>) -> Result<Self> {
        let first = blocks.first().ok_or_else(|| dim_err("no combiner blocks"))?;
        let (n_bs, n_rf) = first.shape();
        if blocks.iter().any(|b| b.shape() != (n_bs, n_rf)) {
            return Err(dim_err("combiner blocks differ in shape"));
        }
        let mut stacked = CMatrix::zeros(n_rf * blocks.len(), n_bs);
        for (i, b) in blocks.iter().enumerate() {
            stacked.view_mut((i * n_rf, 0), (n_rf, n_bs)).copy_from(&b.adjoint());
        }
        Ok(AnalogCombiner { blocks, stacked })
    }

    /// `Σ_i ‖Ā_i‖_F²`.
    pub fn energy(&self) -> f64 {
        self.blocks.iter().map(linalg::fro_sq).sum()
    }
}

/// Random block-diagonal phase-only combiners; every nonzero entry is
/// `exp(jφ)/√N̊_BS` with `φ` uniform on `[0, 2π)`.
pub fn generate_combiner(cfg: &SystemConfig, seed: u64) -> Result<AnalogCombiner> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nb, nr) = (cfg.n_bs_per_group(), cfg.n_rf_per_group());
    let amp = 1.0 / (nb as f64).sqrt();
    let blocks = (0..cfg.t_bs)
        .map(|_| {
            let mut a = CMatrix::zeros(cfg.n_bs, cfg.n_rf);
            for g in 0..cfg.n_g {
                for c in 0..nr {
                    for r in 0..nb {
                        let phi = rng.random::<f64>() * 2.0 * PI;
                        a[(g * nb + r, g * nr + c)] = C64::from_polar(amp, phi);
                    }
                }
            }
            a
        })
        .collect();
    AnalogCombiner::from_blocks(blocks)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    /// `F_k`, `N_UE × T_UE` with orthonormal rows (training symbols folded in).
    pub per_subcarrier: Vec<CMatrix>,
}

/// First `N_UE` rows of the unitary `T_UE`-point DFT matrix, used on every
/// subcarrier. The seed is accepted for interface stability and unused.
pub fn generate_precoders(cfg: &SystemConfig, _seed: u64) -> Result<PrecoderSet> {
    cfg.validate()?;
    let t = cfg.t_ue;
    let norm = 1.0 / (t as f64).sqrt();
    let f = CMatrix::from_fn(cfg.n_ue, t, |r, c| {
        C64::from_polar(norm, -2.0 * PI * ((r * c) % t) as f64 / t as f64)
    });
    Ok(PrecoderSet {
        per_subcarrier: vec![f; cfg.n_sc],
    })
}

/// Signal-to-noise ratio in dB; `+∞` disables the noise.
pub fn snr_linear(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

/// Per-entry antenna noise variance `σ_n²` such that
/// `‖A·H‖_F² / E‖Z‖_F² = 10^{snr/10}`, with
/// `E‖Z‖_F² = σ_n²·N_UE·N_SC·Σ_i‖Ā_i‖_F²`.
pub fn calibrate_noise(
    cfg: &SystemConfig,
    channel: &ChannelRealization,
    combiner: &AnalogCombiner,
    snr_db: f64,
) -> Result<f64> {
    let signal = linalg::fro_sq(&(&combiner.stacked * &channel.total));
    if signal <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    if snr_db == f64::INFINITY {
        return Ok(0.0);
    }
    let noise_unit = (cfg.n_ue * cfg.n_sc) as f64 * combiner.energy();
    Ok(signal / (snr_linear(snr_db) * noise_unit))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    /// `Y`, `L × N_UE·N_SC`.
    pub y_matrix: CMatrix,
    /// The noise part `Z` of `Y`.
    pub noise: CMatrix,
    pub noise_variance: f64,
    pub snr_db: f64,
}

impl MeasurementSet {
    /// The 3-way tensor form for a division of the columns.
    pub fn tensor(&self, shape: &FactorShape) -> Result<Tensor3> {
        fold_measurement(&self.y_matrix, shape)
    }
}

/// Column `c1 + c2·j1` of `y` becomes fiber `(:, c1, c2)` of an
/// `L × j1 × j2` tensor.
pub fn fold_measurement(y: &CMatrix, shape: &FactorShape) -> Result<Tensor3> {
    if y.ncols() != shape.cols() {
        return Err(dim_err(format!(
            "measurement has {} columns, shape {shape} needs {}",
            y.ncols(),
            shape.cols()
        )));
    }
    fold(y, Mode::One, [y.nrows(), shape.j1, shape.j2])
}

pub fn simulate(
    cfg: &SystemConfig,
    channel: &ChannelRealization,
    combiner: &AnalogCombiner,
    precoders: &PrecoderSet,
    snr_db: f64,
    seed: u64,
) -> Result<MeasurementSet> {
    cfg.validate()?;
    if channel.slices.len() != cfg.n_sc
        || channel.total.shape() != (cfg.n_bs, cfg.j())
        || combiner.blocks.len() != cfg.t_bs
        || combiner.stacked.shape() != (cfg.l(), cfg.n_bs)
        || precoders.per_subcarrier.len() != cfg.n_sc
        || precoders
            .per_subcarrier
            .iter()
            .any(|f| f.shape() != (cfg.n_ue, cfg.t_ue))
    {
        return Err(dim_err("channel, combiner or precoders do not match the configuration"));
    }
    let sigma2 = calibrate_noise(cfg, channel, combiner, snr_db)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n_rf, n_ue) = (cfg.n_rf, cfg.n_ue);
    let mut y = CMatrix::zeros(cfg.l(), cfg.j());
    let mut z = CMatrix::zeros(cfg.l(), cfg.j());
    for (k, (h, f)) in channel.slices.iter().zip(&precoders.per_subcarrier).enumerate() {
        let f_h = f.adjoint();
        for (i, a_i) in combiner.blocks.iter().enumerate() {
            let a_h = a_i.adjoint();
            let signal = (&a_h * h * f) * &f_h;
            let noise = if sigma2 > 0.0 {
                let z_bar = linalg::complex_gaussian(&mut rng, cfg.n_bs, cfg.t_ue, sigma2);
                &a_h * z_bar * &f_h
            } else {
                CMatrix::zeros(n_rf, n_ue)
            };
            y.view_mut((i * n_rf, k * n_ue), (n_rf, n_ue)).copy_from(&(signal + &noise));
            z.view_mut((i * n_rf, k * n_ue), (n_rf, n_ue)).copy_from(&noise);
        }
    }
    Ok(MeasurementSet {
        y_matrix: y,
        noise: z,
        noise_variance: sigma2,
        snr_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelProfile;
    use crate::linalg::{complex_gaussian, fro, kronecker, transpose};
    use crate::tensor::{core_tensor, mode_product};

    fn small_cfg(t_bs: usize) -> SystemConfig {
        SystemConfig {
            n_bs: 8,
            n_ue: 2,
            n_sc: 3,
            n_rf: 2,
            n_g: 2,
            t_bs,
            t_ue: 3,
        }
    }

    fn nonzeros<'a>(m: impl IntoIterator<Item = &'a C64>) -> usize {
        m.into_iter().filter(|z| z.norm() > 0.0).count()
    }

    #[test]
    fn config_validation() {
        assert!(SystemConfig::reference(12).validate().is_ok());
        let mut c = SystemConfig::reference(12);
        c.n_g = 3;
        assert!(c.validate().is_err());
        let mut c = SystemConfig::reference(12);
        c.t_ue = 2;
        assert!(c.validate().is_err());
    }

    #[test]
    fn partially_connected_structure() {
        let cfg = SystemConfig { n_g: 4, ..SystemConfig::reference(3) };
        let comb = generate_combiner(&cfg, 1).unwrap();
        for a in &comb.blocks {
            for c in 0..cfg.n_rf {
                assert_eq!(nonzeros(a.column(c).iter()), cfg.n_bs_per_group());
            }
        }
    }

    #[test]
    fn fully_connected_has_no_zeros() {
        let cfg = SystemConfig { n_g: 1, ..SystemConfig::reference(2) };
        let comb = generate_combiner(&cfg, 2).unwrap();
        assert!(comb.blocks.iter().all(|a| nonzeros(a) == a.len()));
    }

    #[test]
    fn reference_combiner_rows() {
        let cfg = SystemConfig::reference(16);
        let comb = generate_combiner(&cfg, 3).unwrap();
        assert_eq!(comb.stacked.shape(), (64, 64));
        let amp = 1.0 / 32f64.sqrt();
        for r in 0..64 {
            let row = comb.stacked.row(r);
            let nz: Vec<_> = row.iter().filter(|z| z.norm() > 0.0).collect();
            assert_eq!(nz.len(), 32);
            assert!(nz.iter().all(|z| (z.norm() - amp).abs() < 1e-14));
        }
        for a in &comb.blocks {
            assert_eq!(nonzeros(a), cfg.n_g * 32 * 2);
        }
    }

    #[test]
    fn precoders_have_orthonormal_rows() {
        let cfg = SystemConfig { t_ue: 8, ..SystemConfig::reference(1) };
        let p = generate_precoders(&cfg, 0).unwrap();
        for f in &p.per_subcarrier {
            assert!(fro(&(f * f.adjoint() - CMatrix::identity(4, 4))) < 1e-14);
        }
        let sq = generate_precoders(&SystemConfig::reference(1), 0).unwrap();
        let f = &sq.per_subcarrier[0];
        assert!(fro(&(f.adjoint() * f - CMatrix::identity(4, 4))) < 1e-14);
        let short = SystemConfig { t_ue: 3, ..SystemConfig::reference(1) };
        assert!(generate_precoders(&short, 0).is_err());
    }

    #[test]
    fn right_filter_removes_precoder() {
        let cfg = small_cfg(2);
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(4);
        let comb = generate_combiner(&cfg, 1).unwrap();
        let f = &generate_precoders(&cfg, 0).unwrap().per_subcarrier[0];
        let h = complex_gaussian(&mut rng, 8, 2, 1.0);
        let a_h = comb.blocks[0].adjoint();
        let filtered = (&a_h * &h * f) * f.adjoint();
        assert!(fro(&(filtered - &a_h * &h)) < 1e-12 * fro(&h));
    }

    #[test]
    fn noiseless_measurement_is_ah() {
        let profile = ChannelProfile::default_profile();
        let cfg = SystemConfig::reference(12);
        let ch = profile.generate(cfg.n_sc, 5).unwrap();
        let comb = generate_combiner(&cfg, 6).unwrap();
        let pre = generate_precoders(&cfg, 0).unwrap();
        let m = simulate(&cfg, &ch, &comb, &pre, f64::INFINITY, 7).unwrap();
        let ah = &comb.stacked * &ch.total;
        assert_eq!(m.noise_variance, 0.0);
        assert!(fro(&(&m.y_matrix - &ah)) < 1e-12 * fro(&ah));
    }

    #[test]
    fn calibration_scales_with_channel_energy() {
        let profile = ChannelProfile::default_profile();
        let cfg = SystemConfig::reference(12);
        let mut ch = profile.generate(cfg.n_sc, 5).unwrap();
        let comb = generate_combiner(&cfg, 6).unwrap();
        let s1 = calibrate_noise(&cfg, &ch, &comb, 10.0).unwrap();
        ch.total *= C64::new(2.0, 0.0);
        let s2 = calibrate_noise(&cfg, &ch, &comb, 10.0).unwrap();
        assert!((s2 / s1 - 4.0).abs() < 1e-12);
        assert!(calibrate_noise(&cfg, &ch, &comb, 300.0).unwrap() < 1e-25);
        ch.total.fill(C64::new(0.0, 0.0));
        assert!(matches!(calibrate_noise(&cfg, &ch, &comb, 0.0), Err(Error::ZeroEnergy)));
    }

    #[test]
    fn fold_measurement_layout() {
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(9);
        let y = complex_gaussian(&mut rng, 5, 12, 1.0);
        let s = FactorShape::new(1, 1, 4, 3).unwrap();
        let t = fold_measurement(&y, &s).unwrap();
        assert_eq!(crate::tensor::unfold(&t, Mode::One), y);
        for c2 in 0..3 {
            for c1 in 0..4 {
                for l in 0..5 {
                    assert_eq!(t.get(l, c1, c2), y[(l, c1 + c2 * 4)]);
                }
            }
        }
        let flat = fold_measurement(&y, &FactorShape::new(1, 1, 12, 1).unwrap()).unwrap();
        assert_eq!(flat.dims(), [5, 12, 1]);
        assert!(fold_measurement(&y, &FactorShape::new(1, 1, 5, 2).unwrap()).is_err());
    }

    #[test]
    fn kronecker_channel_folds_to_tucker() {
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(10);
        let s = FactorShape::new(2, 4, 3, 2).unwrap();
        let a = complex_gaussian(&mut rng, 6, 8, 1.0);
        let terms: Vec<(CMatrix, CMatrix)> = (0..2)
            .map(|_| (complex_gaussian(&mut rng, 2, 3, 1.0), complex_gaussian(&mut rng, 4, 2, 1.0)))
            .collect();
        let mut h = CMatrix::zeros(8, 6);
        let core = core_tensor(2, 4);
        let mut expected = Tensor3::zeros([6, 3, 2]);
        for (b, c) in &terms {
            h += kronecker(c, b);
            let t = mode_product(core.tensor(), &a, Mode::One).unwrap();
            let t = mode_product(&t, &transpose(b), Mode::Two).unwrap();
            let t = mode_product(&t, &transpose(c), Mode::Three).unwrap();
            expected.add_assign(&t).unwrap();
        }
        let folded = fold_measurement(&(&a * &h), &s).unwrap();
        let diff = folded.sub(&expected).unwrap();
        assert!(diff.fro_sq().sqrt() <= 1e-12 * expected.fro_sq().sqrt());
    }
}
