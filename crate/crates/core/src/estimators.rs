//! Channel estimators: the least-squares baseline and the sequential
//! alternating-least-squares (SALSA) estimator.
//!
//! SALSA models the channel as `H ≈ Σ_r C_r ⊗ B_r`. Folding the measurement
//! `Y = A·H + Z` into an `L × J1 × J2` tensor turns each term into the Tucker
//! tensor `S ×1 A ×2 B_rᵀ ×3 C_rᵀ`, and the factors of one term are fitted by
//! alternating between
//!
//! * `B_rᵀ ← Y_r₍₂₎·Ψ2⁺` with `Ψ2 = S₍₂₎(C_r ⊗ Aᵀ)`, `I1 × L·J2`
//! * `C_rᵀ ← Y_r₍₃₎·Ψ3⁺` with `Ψ3 = S₍₃₎(B_r ⊗ Aᵀ)`, `I2 × L·J1`
//!
//! Terms are extracted one after another from the deflated tensor.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{dim_err, Error, Result};
use crate::kron::{reconstruct, FactorShape, KroneckerTerm};
use crate::linalg::{self, CMatrix};
use crate::measurement::{fold_measurement, AnalogCombiner, MeasurementSet};
use crate::tensor::{core_tensor, fold, mode_product, unfold, CoreTensor, Mode, Tensor3};

/// `Ĥ = A⁺·Y`, with the pseudo-inverse cut-off at `max(L, N_BS)·ε·σ_max`.
pub fn ls_estimate(y: &CMatrix, a: &CMatrix) -> Result<CMatrix> {
    if y.nrows() != a.nrows() {
        return Err(dim_err(format!(
            "Y has {} rows, A has {}",
            y.nrows(),
            a.nrows()
        )));
    }
    Ok(linalg::pinv(a)? * y)
}

/// `‖H − Ĥ‖_F² / ‖H‖_F²`.
pub fn nmse(h_true: &CMatrix, h_est: &CMatrix) -> Result<f64> {
    let (num, den) = nmse_parts(h_true, h_est)?;
    Ok(num / den)
}

/// Numerator and denominator of the NMSE, for ratio-of-sums averaging.
pub fn nmse_parts(h_true: &CMatrix, h_est: &CMatrix) -> Result<(f64, f64)> {
    if h_true.shape() != h_est.shape() {
        return Err(dim_err(format!(
            "{:?} vs {:?}",
            h_true.shape(),
            h_est.shape()
        )));
    }
    let den = linalg::fro_sq(h_true);
    if den == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    Ok((linalg::fro_sq(&(h_true - h_est)), den))
}

/// The two conditions under which the ALS pseudo-inverses admit unique
/// solutions: `C1: I1 ≤ L·J2` and `C2: I2 ≤ L·J1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Identifiability {
    pub c1: bool,
    pub c2: bool,
}

impl Identifiability {
    pub fn holds(&self) -> bool {
        self.c1 && self.c2
    }
}

pub fn check_identifiability(shape: &FactorShape, l: usize) -> Identifiability {
    Identifiability {
        c1: shape.i1 <= l * shape.j2,
        c2: shape.i2 <= l * shape.j1,
    }
}

/// Smallest number of training blocks for which both C1 and C2 hold.
pub fn min_training_blocks(shape: &FactorShape, n_rf: usize) -> usize {
    let need = |i: usize, j: usize| i.div_ceil(n_rf * j);
    need(shape.i1, shape.j2).max(need(shape.i2, shape.j1)).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SalsaConfig {
    pub shape: FactorShape,
    pub r_terms: usize,
    pub max_iters: usize,
    pub init_seed: u64,
    /// Stop once the change of the fit residual over one sweep, relative to
    /// the norm of the deflated data, falls below this; `0` runs all
    /// `max_iters` sweeps.
    pub early_stop_tol: f64,
}

impl SalsaConfig {
    pub const DEFAULT_MAX_ITERS: usize = 50;
    pub const DEFAULT_TOL: f64 = 1e-8;

    pub fn new(shape: FactorShape, r_terms: usize) -> Self {
        SalsaConfig {
            shape,
            r_terms,
            max_iters: Self::DEFAULT_MAX_ITERS,
            init_seed: 0,
            early_stop_tol: Self::DEFAULT_TOL,
        }
    }

    pub fn with_max_iters(mut self, n: usize) -> Self {
        self.max_iters = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.init_seed = seed;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.early_stop_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.r_terms == 0 {
            return Err(Error::InvalidConfig("R must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if !(self.early_stop_tol >= 0.0) {
            return Err(Error::InvalidConfig("early_stop_tol must be non-negative".into()));
        }
        Ok(())
    }
}

/// Result of fitting one Kronecker term.
#[derive(Debug, Clone, PartialEq)]
pub struct TermFit {
    pub term: KroneckerTerm,
    /// Tensor fit residual `‖Y_r − S ×1 A ×2 Bᵀ ×3 Cᵀ‖_F` after every half-sweep.
    pub trajectory: Vec<f64>,
    pub sweeps: usize,
    /// Set when Ψ2 or Ψ3 lost row rank at some half-sweep.
    pub rank_deficient: bool,
}

/// Precomputed `S ×1 A`, which is `A` folded to `L × I1 × I2`.
struct SalsaOperator {
    a_core: Tensor3,
    shape: FactorShape,
    l: usize,
}

impl SalsaOperator {
    fn new(a: &CMatrix, core: &CoreTensor, shape: FactorShape) -> Result<Self> {
        if core.factor_dims() != (shape.i1, shape.i2) {
            return Err(dim_err(format!(
                "core tensor {:?} does not match shape {shape}",
                core.factor_dims()
            )));
        }
        if a.ncols() != shape.rows() {
            return Err(dim_err(format!(
                "A has {} columns, shape {shape} needs {}",
                a.ncols(),
                shape.rows()
            )));
        }
        Ok(SalsaOperator {
            a_core: mode_product(core.tensor(), a, Mode::One)?,
            shape,
            l: a.nrows(),
        })
    }

    /// `Ψ2 = S₍₂₎(C ⊗ Aᵀ)`, formed as the mode-2 unfolding of `S ×1 A ×3 Cᵀ`.
    fn psi2(&self, c: &CMatrix) -> Result<CMatrix> {
        Ok(unfold(&mode_product(&self.a_core, &c.transpose(), Mode::Three)?, Mode::Two))
    }

    /// `Ψ3 = S₍₃₎(B ⊗ Aᵀ)`, formed as the mode-3 unfolding of `S ×1 A ×2 Bᵀ`.
    fn psi3(&self, b: &CMatrix) -> Result<CMatrix> {
        Ok(unfold(&mode_product(&self.a_core, &b.transpose(), Mode::Two)?, Mode::Three))
    }

    /// `S ×1 A ×2 Bᵀ ×3 Cᵀ`, whose 1-mode unfolding is `A·(C ⊗ B)`.
    fn tucker(&self, a: &CMatrix, term: &KroneckerTerm) -> Result<Tensor3> {
        fold(&(a * term.to_matrix()), Mode::One, [self.l, self.shape.j1, self.shape.j2])
    }
}

pub fn als_fit_term(
    y_r: &Tensor3,
    a: &CMatrix,
    core: &CoreTensor,
    cfg: &SalsaConfig,
    term_seed: u64,
) -> Result<TermFit> {
    cfg.validate()?;
    let op = SalsaOperator::new(a, core, cfg.shape)?;
    fit_term(&op, y_r, cfg, term_seed)
}

fn fit_term(op: &SalsaOperator, y_r: &Tensor3, cfg: &SalsaConfig, term_seed: u64) -> Result<TermFit> {
    let shape = cfg.shape;
    let ident = check_identifiability(&shape, op.l);
    if !ident.holds() {
        return Err(Error::NotIdentifiable {
            c1: ident.c1,
            c2: ident.c2,
        });
    }
    if y_r.dims() != [op.l, shape.j1, shape.j2] {
        return Err(dim_err(format!(
            "tensor {:?} does not match L = {} and shape {shape}",
            y_r.dims(),
            op.l
        )));
    }
    let y2 = unfold(y_r, Mode::Two);
    let y3 = unfold(y_r, Mode::Three);
    let y_norm = y_r.fro_sq().sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(term_seed);
    let mut c = linalg::complex_gaussian(&mut rng, shape.i2, shape.j2, 1.0);
    let mut b = CMatrix::zeros(shape.i1, shape.j1);
    let mut trajectory = Vec::with_capacity(2 * cfg.max_iters);
    let mut rank_deficient = false;
    let mut sweeps = 0;
    let mut previous: Option<f64> = None;

    for _ in 0..cfg.max_iters {
        sweeps += 1;

        let psi2 = op.psi2(&c)?;
        let solved = linalg::right_pinv_solve(&y2, &psi2)?;
        rank_deficient |= solved.rank < shape.i1;
        let b_t = solved.solution;
        trajectory.push(linalg::fro(&(&y2 - &b_t * &psi2)));
        b = b_t.transpose();

        let psi3 = op.psi3(&b)?;
        let solved = linalg::right_pinv_solve(&y3, &psi3)?;
        rank_deficient |= solved.rank < shape.i2;
        let c_t = solved.solution;
        let residual = linalg::fro(&(&y3 - &c_t * &psi3));
        trajectory.push(residual);
        c = c_t.transpose();

        if residual == 0.0 {
            break;
        }
        // Change over a full sweep, relative to the data norm so that fits
        // converging to zero residual also stop.
        if let Some(prev) = previous {
            if cfg.early_stop_tol > 0.0 && (prev - residual).abs() <= cfg.early_stop_tol * y_norm {
                break;
            }
        }
        previous = Some(residual);
    }

    Ok(TermFit {
        term: KroneckerTerm::new(c, b),
        trajectory,
        sweeps,
        rank_deficient,
    })
}

#[derive(Debug, Clone)]
pub struct EstimateReport {
    /// `Σ_r Ĉ_r ⊗ B̂_r`, `N_BS × N_UE·N_SC`.
    pub estimate: CMatrix,
    pub terms: Vec<KroneckerTerm>,
    pub trajectories: Vec<Vec<f64>>,
    pub sweeps: Vec<usize>,
    /// `‖Y − Σ_{r' ≤ r} Ŷ_{r'}‖_F` after each term.
    pub fit_residuals: Vec<f64>,
    pub identifiability: Identifiability,
    /// Indices of terms whose ALS operators lost row rank.
    pub rank_warnings: Vec<usize>,
    /// Time elapsed when each term finished, from the start of estimation.
    pub term_elapsed: Vec<Duration>,
    pub wall_time: Duration,
}

impl EstimateReport {
    /// Estimate using only the first `r` terms.
    pub fn estimate_with_terms(&self, r: usize) -> Result<CMatrix> {
        let r = r.min(self.terms.len());
        reconstruct(&self.terms[..r], self.terms[0].shape())
    }

    /// True when both reports carry identical numerical content; timing is
    /// ignored.
    pub fn same_numbers(&self, other: &EstimateReport) -> bool {
        self.estimate == other.estimate
            && self.terms == other.terms
            && self.trajectories == other.trajectories
            && self.sweeps == other.sweeps
            && self.fit_residuals == other.fit_residuals
            && self.identifiability == other.identifiability
            && self.rank_warnings == other.rank_warnings
    }
}

pub fn salsa_estimate(
    measurement: &MeasurementSet,
    combiner: &AnalogCombiner,
    cfg: &SalsaConfig,
) -> Result<EstimateReport> {
    salsa_estimate_matrix(&measurement.y_matrix, &combiner.stacked, cfg)
}

/// SALSA on a raw measurement matrix `Y` (`L × J`) and combiner `A`
/// (`L × I`).
pub fn salsa_estimate_matrix(y: &CMatrix, a: &CMatrix, cfg: &SalsaConfig) -> Result<EstimateReport> {
    let start = Instant::now();
    cfg.validate()?;
    let shape = cfg.shape;
    if y.nrows() != a.nrows() {
        return Err(dim_err(format!("Y has {} rows, A has {}", y.nrows(), a.nrows())));
    }
    let identifiability = check_identifiability(&shape, a.nrows());
    if !identifiability.holds() {
        return Err(Error::NotIdentifiable {
            c1: identifiability.c1,
            c2: identifiability.c2,
        });
    }
    let core = core_tensor(shape.i1, shape.i2);
    let op = SalsaOperator::new(a, &core, shape)?;
    let y_tensor = fold_measurement(y, &shape)?;

    let mut fitted = Tensor3::zeros(y_tensor.dims());
    let mut report = EstimateReport {
        estimate: CMatrix::zeros(shape.rows(), shape.cols()),
        terms: Vec::with_capacity(cfg.r_terms),
        trajectories: Vec::with_capacity(cfg.r_terms),
        sweeps: Vec::with_capacity(cfg.r_terms),
        fit_residuals: Vec::with_capacity(cfg.r_terms),
        identifiability,
        rank_warnings: Vec::new(),
        term_elapsed: Vec::with_capacity(cfg.r_terms),
        wall_time: Duration::ZERO,
    };

    for r in 0..cfg.r_terms {
        let step = || -> Result<(TermFit, Tensor3)> {
            let y_r = y_tensor.sub(&fitted)?;
            let fit = fit_term(&op, &y_r, cfg, cfg.init_seed.wrapping_add(r as u64 + 1))?;
            let y_hat = op.tucker(a, &fit.term)?;
            Ok((fit, y_hat))
        };
        let (fit, y_hat) = step().map_err(|e| Error::TermFailed {
            term: r,
            completed: report.terms.len(),
            partial: Box::new(report.estimate.clone()),
            source: Box::new(e),
        })?;
        fitted.add_assign(&y_hat)?;
        report.estimate += fit.term.to_matrix();
        if fit.rank_deficient {
            report.rank_warnings.push(r);
        }
        report.fit_residuals.push(y_tensor.sub(&fitted)?.fro_sq().sqrt());
        report.terms.push(fit.term);
        report.trajectories.push(fit.trajectory);
        report.sweeps.push(fit.sweeps);
        report.term_elapsed.push(start.elapsed());
    }
    report.wall_time = start.elapsed();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_gaussian, kronecker, C64};
    use rand::SeedableRng;

    fn shape(i1: usize, i2: usize, j1: usize, j2: usize) -> FactorShape {
        FactorShape::new(i1, i2, j1, j2).unwrap()
    }

    #[test]
    fn nmse_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = complex_gaussian(&mut rng, 4, 3, 1.0);
        assert_eq!(nmse(&h, &h).unwrap(), 0.0);
        assert!((nmse(&h, &CMatrix::zeros(4, 3)).unwrap() - 1.0).abs() < 1e-15);
        assert!((nmse(&h, &(&h * C64::new(2.0, 0.0))).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(nmse(&CMatrix::zeros(4, 3), &h), Err(Error::ZeroEnergy)));
        assert!(nmse(&h, &CMatrix::zeros(3, 4)).is_err());
    }

    #[test]
    fn ls_identity_combiner_returns_y() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let y = complex_gaussian(&mut rng, 6, 5, 1.0);
        let est = ls_estimate(&y, &CMatrix::identity(6, 6)).unwrap();
        assert!(linalg::fro(&(est - &y)) < 1e-14);
    }

    #[test]
    fn ls_exact_for_tall_combiner() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = complex_gaussian(&mut rng, 10, 8, 1.0);
        let h = complex_gaussian(&mut rng, 8, 6, 1.0);
        let est = ls_estimate(&(&a * &h), &a).unwrap();
        assert!(nmse(&h, &est).unwrap() <= 1e-10);
    }

    #[test]
    fn identifiability_examples() {
        let f = check_identifiability(&shape(8, 8, 64, 1), 48);
        assert!(f.c1 && f.c2);
        assert!(check_identifiability(&shape(64, 1, 1, 64), 1).holds());
        assert!(check_identifiability(&shape(1, 64, 64, 1), 1).holds());
        let f = check_identifiability(&shape(64, 1, 64, 1), 48);
        assert!(!f.c1 && f.c2);
        assert_eq!(min_training_blocks(&shape(8, 8, 64, 1), 4), 2);
        assert_eq!(min_training_blocks(&shape(64, 1, 64, 1), 4), 16);
    }

    #[test]
    fn zero_iterations_rejected() {
        let cfg = SalsaConfig::new(shape(2, 2, 2, 2), 1).with_max_iters(0);
        assert!(cfg.validate().is_err());
        assert!(SalsaConfig::new(shape(2, 2, 2, 2), 0).validate().is_err());
    }

    #[test]
    fn unidentifiable_shape_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = complex_gaussian(&mut rng, 2, 8, 1.0);
        let y = complex_gaussian(&mut rng, 2, 4, 1.0);
        let cfg = SalsaConfig::new(shape(8, 1, 4, 1), 1);
        assert!(matches!(
            salsa_estimate_matrix(&y, &a, &cfg),
            Err(Error::NotIdentifiable { c1: false, c2: true })
        ));
    }

    fn planted(seed: u64, s: FactorShape, l: usize) -> (CMatrix, CMatrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = complex_gaussian(&mut rng, l, s.rows(), 1.0);
        let c = complex_gaussian(&mut rng, s.i2, s.j2, 1.0);
        let b = complex_gaussian(&mut rng, s.i1, s.j1, 1.0);
        (a, kronecker(&c, &b))
    }

    #[test]
    fn planted_single_term_recovered() {
        let s = shape(3, 2, 4, 2);
        let (a, h) = planted(5, s, 4);
        let y = &a * &h;
        let core = core_tensor(3, 2);
        let y_t = fold_measurement(&y, &s).unwrap();
        let cfg = SalsaConfig::new(s, 1).with_max_iters(20);
        let fit = als_fit_term(&y_t, &a, &core, &cfg, 7).unwrap();
        assert!(nmse(&h, &fit.term.to_matrix()).unwrap() <= 1e-8);
        for w in fit.trajectory.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9) + 1e-12);
        }
        // One term through the full estimator is the same computation.
        let report = salsa_estimate_matrix(&y, &a, &cfg.with_seed(6)).unwrap();
        assert_eq!(report.terms[0], fit.term);
    }

    #[test]
    fn deflation_never_worsens_fit() {
        let s = shape(2, 3, 3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = complex_gaussian(&mut rng, 5, 6, 1.0);
        let h = complex_gaussian(&mut rng, 6, 6, 1.0);
        let y = &a * &h + complex_gaussian(&mut rng, 5, 6, 0.01);
        let report = salsa_estimate_matrix(&y, &a, &SalsaConfig::new(s, 4)).unwrap();
        for r in 1..4 {
            assert!(report.fit_residuals[r] <= report.fit_residuals[0] + 1e-9);
        }
    }

    #[test]
    fn degenerate_shape_matches_ls_exactness() {
        let s = shape(6, 1, 5, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = complex_gaussian(&mut rng, 8, 6, 1.0);
        let h = complex_gaussian(&mut rng, 6, 5, 1.0);
        let report = salsa_estimate_matrix(&(&a * &h), &a, &SalsaConfig::new(s, 1)).unwrap();
        assert!(nmse(&h, &report.estimate).unwrap() <= 1e-8);
    }

    #[test]
    fn seeded_runs_are_identical() {
        let s = shape(2, 2, 3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let a = complex_gaussian(&mut rng, 3, 4, 1.0);
        let y = complex_gaussian(&mut rng, 3, 6, 1.0);
        let cfg = SalsaConfig::new(s, 3).with_seed(99);
        let r1 = salsa_estimate_matrix(&y, &a, &cfg).unwrap();
        let r2 = salsa_estimate_matrix(&y, &a, &cfg).unwrap();
        assert!(r1.same_numbers(&r2));
        let prefix = salsa_estimate_matrix(&y, &a, &SalsaConfig { r_terms: 2, ..cfg }).unwrap();
        assert_eq!(prefix.terms[..], r1.terms[..2]);
        assert_eq!(r1.estimate_with_terms(2).unwrap(), prefix.estimate);
    }

    #[test]
    fn psi_matches_literal_kronecker_formula() {
        let s = shape(2, 3, 2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = complex_gaussian(&mut rng, 4, 6, 1.0);
        let b = complex_gaussian(&mut rng, 2, 2, 1.0);
        let c = complex_gaussian(&mut rng, 3, 2, 1.0);
        let core = core_tensor(2, 3);
        let op = SalsaOperator::new(&a, &core, s).unwrap();
        let at = a.transpose();
        let psi2 = unfold(core.tensor(), Mode::Two) * kronecker(&c, &at);
        let psi3 = unfold(core.tensor(), Mode::Three) * kronecker(&b, &at);
        assert!(linalg::fro(&(op.psi2(&c).unwrap() - &psi2)) < 1e-12 * linalg::fro(&psi2));
        assert!(linalg::fro(&(op.psi3(&b).unwrap() - &psi3)) < 1e-12 * linalg::fro(&psi3));
    }
}
