//! Deterministic invariant suite behind the `selftest` subcommand.
//!
//! Every check is seeded and single-threaded, so the printed report is
//! byte-identical across runs.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::ChannelProfile;
use crate::error::Result;
use crate::estimators::{als_fit_term, ls_estimate, nmse, SalsaConfig};
use crate::experiment::enumerate_divisions;
use crate::kron::{nearest_kronecker, residual_curve, sequential_factorize, FactorShape};
use crate::linalg::{complex_gaussian, fro, fro_sq, kronecker, CMatrix};
use crate::measurement::{fold_measurement, generate_combiner, generate_precoders, simulate, SystemConfig};
use crate::tensor::{core_tensor, fold, mode_product, unfold, Mode, Tensor3};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{}",
            self.name,
            if self.passed { "pass" } else { "fail" },
            self.detail
        )
    }
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn rel(a: &CMatrix, b: &CMatrix) -> f64 {
    fro(&(a - b)) / fro(b).max(f64::MIN_POSITIVE)
}

fn tucker_identities() -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for n in 0..20 {
        let (i1, i2, j1, j2, l) = (1 + n % 3, 1 + n % 4, 2 + n % 2, 1 + n % 3, 2 + n % 5);
        let core = core_tensor(i1, i2);
        let a = complex_gaussian(&mut rng, l, i1 * i2, 1.0);
        let b = complex_gaussian(&mut rng, i1, j1, 1.0);
        let c = complex_gaussian(&mut rng, i2, j2, 1.0);
        let y = mode_product(
            &mode_product(&mode_product(core.tensor(), &a, Mode::One)?, &b.transpose(), Mode::Two)?,
            &c.transpose(),
            Mode::Three,
        )?;
        let s = core.tensor();
        let y1 = &a * unfold(s, Mode::One) * kronecker(&c, &b);
        let y2 = b.transpose() * unfold(s, Mode::Two) * kronecker(&c, &a.transpose());
        let y3 = c.transpose() * unfold(s, Mode::Three) * kronecker(&b, &a.transpose());
        worst = worst
            .max(rel(&unfold(&y, Mode::One), &y1))
            .max(rel(&unfold(&y, Mode::Two), &y2))
            .max(rel(&unfold(&y, Mode::Three), &y3));
    }
    Ok(check("tucker_unfoldings", worst <= 1e-12, format!("max_rel_err={worst:.3e}")))
}

fn fold_round_trip() -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let dims = [3, 4, 5];
    let m = complex_gaussian(&mut rng, 3, 20, 1.0);
    let t = fold(&m, Mode::One, dims)?;
    let exact = Mode::ALL.iter().all(|&mode| {
        let u = unfold(&t, mode);
        fold(&u, mode, dims).map(|back| back == t).unwrap_or(false)
    });
    Ok(check("fold_round_trip", exact, format!("dims={}x{}x{}", dims[0], dims[1], dims[2])))
}

fn kronecker_oracle() -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst_exact: f64 = 0.0;
    let mut worst_full: f64 = 0.0;
    for n in 0..50 {
        let s = FactorShape::new(1 + n % 4, 1 + n % 3, 1 + (n / 4) % 3, 1 + n % 5)?;
        let c = complex_gaussian(&mut rng, s.i2, s.j2, 1.0);
        let b = complex_gaussian(&mut rng, s.i1, s.j1, 1.0);
        let x = kronecker(&c, &b);
        let term = nearest_kronecker(&x, s)?;
        worst_exact = worst_exact.max(rel(&term.to_matrix(), &x));
        let g = complex_gaussian(&mut rng, s.rows(), s.cols(), 1.0);
        let terms = sequential_factorize(&g, s, s.full_rank())?;
        let floor = residual_curve(&g, &terms, s)?.last().copied().unwrap_or(0.0);
        worst_full = worst_full.max(floor / fro_sq(&g));
    }
    let passed = worst_exact <= 1e-12 && worst_full <= 1e-10;
    Ok(check(
        "kronecker_oracle",
        passed,
        format!("exact_rel_err={worst_exact:.3e} full_rank_rel_residual={worst_full:.3e}"),
    ))
}

fn ls_noiseless() -> Result<Check> {
    let cfg = SystemConfig::reference(16);
    let profile = ChannelProfile::default_profile();
    let channel = profile.generate(cfg.n_sc, 104)?;
    let combiner = generate_combiner(&cfg, 105)?;
    let meas = simulate(&cfg, &channel, &combiner, &generate_precoders(&cfg, 0)?, f64::INFINITY, 106)?;
    let err = nmse(&channel.total, &ls_estimate(&meas.y_matrix, &combiner.stacked)?)?;
    Ok(check("ls_noiseless_full_training", err <= 1e-10, format!("nmse={err:.3e}")))
}

fn als_planted() -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let s = FactorShape::new(4, 2, 4, 2)?;
    let core = core_tensor(s.i1, s.i2);
    let mut worst: f64 = 0.0;
    let mut monotone = true;
    for n in 0..10 {
        let a = complex_gaussian(&mut rng, 8, s.rows(), 1.0);
        let h = kronecker(
            &complex_gaussian(&mut rng, s.i2, s.j2, 1.0),
            &complex_gaussian(&mut rng, s.i1, s.j1, 1.0),
        );
        let y = fold_measurement(&(&a * &h), &s)?;
        let cfg = SalsaConfig::new(s, 1).with_max_iters(20);
        let fit = als_fit_term(&y, &a, &core, &cfg, 1000 + n)?;
        worst = worst.max(nmse(&h, &fit.term.to_matrix())?);
        monotone &= fit
            .trajectory
            .windows(2)
            .all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-12);
    }
    Ok(check(
        "als_planted_recovery",
        worst <= 1e-6 && monotone,
        format!("max_nmse={worst:.3e} monotone={monotone}"),
    ))
}

fn snr_calibration() -> Result<Check> {
    let cfg = SystemConfig::reference(12);
    let profile = ChannelProfile::default_profile();
    let channel = profile.generate(cfg.n_sc, 108)?;
    let combiner = generate_combiner(&cfg, 109)?;
    let precoders = generate_precoders(&cfg, 0)?;
    let mut worst: f64 = 0.0;
    for (k, target) in [-10.0, 0.0, 20.0].into_iter().enumerate() {
        let (mut sig, mut noise) = (0.0, 0.0);
        for d in 0..100 {
            let m = simulate(&cfg, &channel, &combiner, &precoders, target, 110 + 1000 * k as u64 + d)?;
            sig += fro_sq(&(&m.y_matrix - &m.noise));
            noise += fro_sq(&m.noise);
        }
        let measured = 10.0 * (sig / noise).log10();
        worst = worst.max((measured - target).abs());
    }
    Ok(check("snr_calibration", worst <= 0.2, format!("max_abs_db_err={worst:.3e}")))
}

fn channel_energy() -> Result<Check> {
    let profile = ChannelProfile::default_profile();
    let n_sc = 16;
    let trials = 200;
    let mut total = 0.0;
    for seed in 0..trials {
        total += fro_sq(&profile.generate(n_sc, 2000 + seed)?.total);
    }
    let expected = (profile.n_bs() * profile.n_ue() * n_sc) as f64;
    let ratio = total / trials as f64 / expected;
    Ok(check("channel_energy", (ratio - 1.0).abs() <= 0.1, format!("mean_over_expected={ratio:.4}")))
}

fn scenario_count() -> Result<Check> {
    let all = enumerate_divisions(64, 64);
    let valid = all.iter().all(|s| s.rows() == 64 && s.cols() == 64);
    Ok(check("scenario_count", all.len() == 49 && valid, format!("count={}", all.len())))
}

fn tensor_zero_is_zero() -> Result<Check> {
    let t = Tensor3::zeros([2, 3, 4]);
    Ok(check("zero_tensor", t.fro_sq() == 0.0, "dims=2x3x4".into()))
}

/// Runs every check; a check that errors is reported as failed with the
/// error message.
pub fn run() -> Vec<Check> {
    let suite: [(&'static str, fn() -> Result<Check>); 10] = [
        ("tucker_unfoldings", tucker_identities),
        ("fold_round_trip", fold_round_trip),
        ("zero_tensor", tensor_zero_is_zero),
        ("kronecker_oracle", kronecker_oracle),
        ("scenario_count", scenario_count),
        ("channel_energy", channel_energy),
        ("snr_calibration", snr_calibration),
        ("ls_noiseless_full_training", ls_noiseless),
        ("als_planted_recovery", als_planted),
        ("identity_factorization", identity_factorization),
    ];
    suite
        .iter()
        .map(|(name, f)| f().unwrap_or_else(|e| check(name, false, format!("error={}", e.to_string().replace(',', ";")))))
        .collect()
}

/// Identity 16×16 with shape (4,4,4,4) factors exactly at the rank of its
/// rearrangement.
fn identity_factorization() -> Result<Check> {
    let s = FactorShape::new(4, 4, 4, 4)?;
    let x = CMatrix::identity(16, 16);
    let rank = crate::linalg::numerical_rank(&crate::kron::rearrange(&x, s)?)?;
    let terms = sequential_factorize(&x, s, rank)?;
    let floor = residual_curve(&x, &terms, s)?[rank - 1] / fro_sq(&x);
    Ok(check("identity_factorization", floor <= 1e-10, format!("rank={rank} rel_residual={floor:.3e}")))
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}
