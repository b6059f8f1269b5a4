//! Seeded Monte-Carlo sweeps over SNR, training length, term count and
//! factor shape, plus the matrix-factorization residual study.
//!
//! Seeds: every random stream is derived from the master seed and a stream
//! tag by [`derive_seed`]. The channel depends only on the trial index, the
//! combiner on `(t_bs, trial)`, the noise on `(t_bs, snr, trial)` and the
//! ALS initialization on the trial index, so estimators, SNR points and
//! training lengths are compared on common random numbers.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelProfile;
use crate::error::{Error, Result};
use crate::estimators::{check_identifiability, ls_estimate, nmse_parts, salsa_estimate, SalsaConfig};
use crate::kron::{residual_curve, sequential_factorize, FactorShape};
use crate::linalg::{self, CMatrix, C64};
use crate::measurement::{generate_combiner, generate_precoders, simulate, SystemConfig};
use crate::parallel::{map_indexed, Execution};

pub const DEFAULT_MASTER_SEED: u64 = 0x5A15A;
/// Environment variable that replaces [`DEFAULT_MASTER_SEED`] when a
/// configuration does not set `master_seed`.
pub const SEED_ENV: &str = "SALSA_MASTER_SEED";

const STREAM_CHANNEL: u64 = 1;
const STREAM_COMBINER: u64 = 2;
const STREAM_NOISE: u64 = 3;
const STREAM_INIT: u64 = 4;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable seed derivation: the master seed XOR a splitmix64 hash chain over
/// the stream tag and the point coordinates.
pub fn derive_seed(master: u64, stream: u64, parts: &[u64]) -> u64 {
    let h = parts
        .iter()
        .fold(splitmix64(stream), |acc, &p| splitmix64(acc ^ p));
    master ^ h
}

/// Default master seed, honoring [`SEED_ENV`].
pub fn default_master_seed() -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_MASTER_SEED)
}

/// Every `(i1, i2, j1, j2)` with `i1·i2 = I` and `j1·j2 = J`, ordered by `i1`
/// descending, then `j1` descending.
pub fn enumerate_divisions(i: usize, j: usize) -> Vec<FactorShape> {
    let divisors = |n: usize| -> Vec<usize> { (1..=n).rev().filter(|d| n % d == 0).collect() };
    let mut out = Vec::new();
    for i1 in divisors(i) {
        for j1 in divisors(j) {
            out.push(FactorShape {
                i1,
                i2: i / i1,
                j1,
                j2: j / j1,
            });
        }
    }
    out
}

/// System parameters of a sweep; `t_bs` is a sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemParams {
    pub n_bs: usize,
    pub n_ue: usize,
    pub n_sc: usize,
    pub n_rf: usize,
    pub n_g: usize,
    pub t_ue: usize,
}

impl SystemParams {
    pub fn with_blocks(&self, t_bs: usize) -> SystemConfig {
        SystemConfig {
            n_bs: self.n_bs,
            n_ue: self.n_ue,
            n_sc: self.n_sc,
            n_rf: self.n_rf,
            n_g: self.n_g,
            t_bs,
            t_ue: self.t_ue,
        }
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            n_bs: 64,
            n_ue: 4,
            n_sc: 16,
            n_rf: 4,
            n_g: 2,
            t_ue: 4,
        }
    }
}

/// An SNR point in dB; `"inf"` in JSON means noiseless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SnrSpec {
    Db(f64),
    Label(InfLabel),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InfLabel {
    #[serde(rename = "inf", alias = "noiseless")]
    Inf,
}

impl SnrSpec {
    pub fn db(&self) -> f64 {
        match self {
            SnrSpec::Db(v) => *v,
            SnrSpec::Label(InfLabel::Inf) => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EstimatorSpec {
    Ls,
    Salsa {
        #[serde(default = "default_max_iters")]
        max_iters: usize,
        #[serde(default = "default_tol")]
        early_stop_tol: f64,
    },
}

fn default_max_iters() -> usize {
    SalsaConfig::DEFAULT_MAX_ITERS
}

fn default_tol() -> f64 {
    SalsaConfig::DEFAULT_TOL
}

impl EstimatorSpec {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorSpec::Ls => "ls",
            EstimatorSpec::Salsa { .. } => "salsa",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub system: SystemParams,
    /// Path to a channel-profile JSON; the embedded profile when absent.
    #[serde(default)]
    pub channel_profile: Option<String>,
    pub estimators: Vec<EstimatorSpec>,
    pub snr_db: Vec<SnrSpec>,
    pub t_bs: Vec<usize>,
    #[serde(default)]
    pub r_terms: Vec<usize>,
    #[serde(default)]
    pub shapes: Vec<[usize; 4]>,
    pub trials: usize,
    #[serde(default)]
    pub master_seed: Option<u64>,
    /// Record mean wall time per row. Off by default because timings make
    /// the CSV non-reproducible.
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.estimators.is_empty() || self.snr_db.is_empty() || self.t_bs.is_empty() {
            return Err(Error::InvalidConfig(
                "estimators, snr_db and t_bs must be non-empty".into(),
            ));
        }
        let has_salsa = self
            .estimators
            .iter()
            .any(|e| matches!(e, EstimatorSpec::Salsa { .. }));
        if has_salsa && (self.r_terms.is_empty() || self.shapes.is_empty()) {
            return Err(Error::InvalidConfig("salsa needs r_terms and shapes".into()));
        }
        if self.r_terms.contains(&0) {
            return Err(Error::InvalidConfig("r_terms must be positive".into()));
        }
        if self.snr_db.iter().any(|s| s.db().is_nan() || s.db() == f64::NEG_INFINITY) {
            return Err(Error::InvalidConfig("snr_db must be finite or \"inf\"".into()));
        }
        for &t in &self.t_bs {
            self.system.with_blocks(t).validate()?;
        }
        Ok(())
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed.unwrap_or_else(default_master_seed)
    }

    pub fn profile(&self) -> Result<ChannelProfile> {
        let p = match &self.channel_profile {
            Some(path) => ChannelProfile::from_path(path)?,
            None => ChannelProfile::default_profile(),
        };
        if p.n_bs() != self.system.n_bs || p.n_ue() != self.system.n_ue {
            return Err(Error::InvalidConfig(format!(
                "profile arrays give {}x{} antennas, system has {}x{}",
                p.n_bs(),
                p.n_ue(),
                self.system.n_bs,
                self.system.n_ue
            )));
        }
        Ok(p)
    }
}

/// Per-trial NMSE numerator/denominator and wall time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    pub num: f64,
    pub den: f64,
    pub wall_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub estimator: String,
    pub shape: Option<FactorShape>,
    pub t_bs: usize,
    pub r: Option<usize>,
    pub snr_db: f64,
    /// Ratio of summed numerators to summed denominators.
    pub nmse: f64,
    pub nmse_se: f64,
    pub trials: usize,
    pub mean_wall_s: Option<f64>,
    pub note: String,
    pub records: Vec<TrialRecord>,
}

impl ResultRow {
    fn aggregate(mut self, timing: bool) -> Self {
        let n = self.records.len();
        self.trials = n;
        if n == 0 {
            self.nmse = f64::NAN;
            self.nmse_se = f64::NAN;
            return self;
        }
        let (sn, sd) = self
            .records
            .iter()
            .fold((0.0, 0.0), |(a, b), r| (a + r.num, b + r.den));
        let ratio = sn / sd;
        self.nmse = ratio;
        self.nmse_se = if n > 1 {
            // Delta-method standard error of a ratio estimator.
            let mean_den = sd / n as f64;
            let ss: f64 = self
                .records
                .iter()
                .map(|r| (r.num - ratio * r.den).powi(2))
                .sum();
            (ss / (n as f64 * (n - 1) as f64)).sqrt() / mean_den
        } else {
            f64::NAN
        };
        if timing {
            self.mean_wall_s = Some(self.records.iter().map(|r| r.wall_s).sum::<f64>() / n as f64);
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

pub const CSV_HEADER: &str = "estimator,i1,i2,j1,j2,t_bs,r,snr_db,nmse,nmse_se,trials,mean_wall_s,note";

fn fmt_snr(db: f64) -> String {
    if db == f64::INFINITY {
        "inf".into()
    } else {
        format!("{db}")
    }
}

impl ResultTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let (i1, i2, j1, j2) = match row.shape {
                Some(s) => (s.i1.to_string(), s.i2.to_string(), s.j1.to_string(), s.j2.to_string()),
                None => Default::default(),
            };
            let r = row.r.map(|r| r.to_string()).unwrap_or_default();
            let wall = row.mean_wall_s.map(|w| format!("{w}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{i1},{i2},{j1},{j2},{},{r},{},{},{},{},{wall},{}",
                row.estimator,
                row.t_bs,
                fmt_snr(row.snr_db),
                row.nmse,
                row.nmse_se,
                row.trials,
                row.note.replace(',', ";"),
            );
        }
        out
    }

    pub fn find(&self, estimator: &str, shape: Option<FactorShape>, t_bs: usize, r: Option<usize>, snr_db: f64) -> Option<&ResultRow> {
        self.rows.iter().find(|row| {
            row.estimator == estimator
                && row.shape == shape
                && row.t_bs == t_bs
                && row.r == r
                && (row.snr_db == snr_db)
        })
    }
}

/// One output row of a sweep point, before trials run.
#[derive(Debug, Clone)]
enum Slot {
    Ls,
    Salsa {
        estimator: usize,
        shape: FactorShape,
        r: usize,
    },
    Invalid {
        estimator: usize,
        shape: FactorShape,
        r: usize,
        note: String,
    },
}

/// A SALSA run whose prefixes feed several `Slot::Salsa` rows.
#[derive(Debug, Clone)]
struct SalsaJob {
    estimator: usize,
    shape: FactorShape,
    r_max: usize,
}

fn plan(cfg: &ExperimentConfig, sys: &SystemConfig) -> (Vec<Slot>, Vec<SalsaJob>) {
    let mut slots = Vec::new();
    let mut jobs = Vec::new();
    for (e, spec) in cfg.estimators.iter().enumerate() {
        match spec {
            EstimatorSpec::Ls => slots.push(Slot::Ls),
            EstimatorSpec::Salsa { .. } => {
                for raw in &cfg.shapes {
                    let shape = FactorShape {
                        i1: raw[0],
                        i2: raw[1],
                        j1: raw[2],
                        j2: raw[3],
                    };
                    let problem = if raw.contains(&0) || shape.rows() != sys.n_bs || shape.cols() != sys.j() {
                        Some(format!(
                            "shape does not divide {}x{}",
                            sys.n_bs,
                            sys.j()
                        ))
                    } else {
                        let id = check_identifiability(&shape, sys.l());
                        (!id.holds()).then(|| format!("not identifiable at L={} (C1 {} C2 {})", sys.l(), id.c1, id.c2))
                    };
                    let mut rs = cfg.r_terms.clone();
                    rs.sort_unstable();
                    rs.dedup();
                    for &r in &rs {
                        slots.push(match &problem {
                            Some(note) => Slot::Invalid {
                                estimator: e,
                                shape,
                                r,
                                note: note.clone(),
                            },
                            None => Slot::Salsa { estimator: e, shape, r },
                        });
                    }
                    if problem.is_none() {
                        jobs.push(SalsaJob {
                            estimator: e,
                            shape,
                            r_max: *rs.last().expect("validated non-empty"),
                        });
                    }
                }
            }
        }
    }
    (slots, jobs)
}

/// Records for every slot (in slot order) from one trial.
fn run_trial(
    cfg: &ExperimentConfig,
    profile: &ChannelProfile,
    sys: &SystemConfig,
    snr_db: f64,
    master: u64,
    trial: usize,
    slots: &[Slot],
    jobs: &[SalsaJob],
) -> Result<Vec<Option<TrialRecord>>> {
    let t = trial as u64;
    let channel = profile.generate(sys.n_sc, derive_seed(master, STREAM_CHANNEL, &[t]))?;
    let combiner = generate_combiner(sys, derive_seed(master, STREAM_COMBINER, &[sys.t_bs as u64, t]))?;
    let precoders = generate_precoders(sys, 0)?;
    let noise_seed = derive_seed(master, STREAM_NOISE, &[sys.t_bs as u64, snr_db.to_bits(), t]);
    let meas = simulate(sys, &channel, &combiner, &precoders, snr_db, noise_seed)?;
    let init_seed = derive_seed(master, STREAM_INIT, &[t]);

    let mut salsa_runs = Vec::with_capacity(jobs.len());
    for job in jobs {
        let (max_iters, tol) = match cfg.estimators[job.estimator] {
            EstimatorSpec::Salsa {
                max_iters,
                early_stop_tol,
            } => (max_iters, early_stop_tol),
            EstimatorSpec::Ls => unreachable!("jobs are only planned for salsa"),
        };
        let scfg = SalsaConfig::new(job.shape, job.r_max)
            .with_max_iters(max_iters)
            .with_tol(tol)
            .with_seed(init_seed);
        salsa_runs.push(salsa_estimate(&meas, &combiner, &scfg)?);
    }

    slots
        .iter()
        .map(|slot| match slot {
            Slot::Ls => {
                let start = Instant::now();
                let est = ls_estimate(&meas.y_matrix, &combiner.stacked)?;
                let wall_s = start.elapsed().as_secs_f64();
                let (num, den) = nmse_parts(&channel.total, &est)?;
                Ok(Some(TrialRecord { num, den, wall_s }))
            }
            Slot::Salsa { estimator, shape, r } => {
                let idx = jobs
                    .iter()
                    .position(|j| j.estimator == *estimator && j.shape == *shape)
                    .expect("every valid slot has a job");
                let report = &salsa_runs[idx];
                let est = report.estimate_with_terms(*r)?;
                let wall_s = report.term_elapsed[r - 1].as_secs_f64();
                let (num, den) = nmse_parts(&channel.total, &est)?;
                Ok(Some(TrialRecord { num, den, wall_s }))
            }
            Slot::Invalid { .. } => Ok(None),
        })
        .collect()
}

/// Runs every sweep point. Trials within a point are mapped with `exec`;
/// records are gathered in trial order, so the table does not depend on
/// scheduling.
pub fn run_sweep(cfg: &ExperimentConfig, exec: Execution) -> Result<ResultTable> {
    cfg.validate()?;
    let profile = cfg.profile()?;
    let master = cfg.master_seed();
    let mut table = ResultTable::default();
    for &t_bs in &cfg.t_bs {
        let sys = cfg.system.with_blocks(t_bs);
        let (slots, jobs) = plan(cfg, &sys);
        for snr in &cfg.snr_db {
            let snr_db = snr.db();
            let per_trial = map_indexed(exec, cfg.trials, |trial| {
                run_trial(cfg, &profile, &sys, snr_db, master, trial, &slots, &jobs)
            });
            let per_trial: Vec<Vec<Option<TrialRecord>>> = per_trial.into_iter().collect::<Result<_>>()?;
            for (s, slot) in slots.iter().enumerate() {
                let (estimator, shape, r, note) = match slot {
                    Slot::Ls => ("ls".to_string(), None, None, String::new()),
                    Slot::Salsa { estimator, shape, r } => {
                        (cfg.estimators[*estimator].name().to_string(), Some(*shape), Some(*r), String::new())
                    }
                    Slot::Invalid {
                        estimator,
                        shape,
                        r,
                        note,
                    } => (cfg.estimators[*estimator].name().to_string(), Some(*shape), Some(*r), note.clone()),
                };
                let records: Vec<TrialRecord> = per_trial.iter().filter_map(|t| t[s]).collect();
                let row = ResultRow {
                    estimator,
                    shape,
                    t_bs,
                    r,
                    snr_db,
                    nmse: f64::NAN,
                    nmse_se: f64::NAN,
                    trials: 0,
                    mean_wall_s: None,
                    note,
                    records,
                };
                table.rows.push(row.aggregate(cfg.timing));
            }
        }
    }
    Ok(table)
}

/// Residual of the sequential factorization after each number of terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizeRow {
    pub r: usize,
    /// `‖X − Σ_{r' ≤ r} C_r' ⊗ B_r'‖_F²`.
    pub mse: f64,
    pub relative_mse: f64,
}

pub fn factorize_matrix(x: &CMatrix, shape: FactorShape, r_terms: usize) -> Result<Vec<FactorizeRow>> {
    let terms = sequential_factorize(x, shape, r_terms)?;
    let total = linalg::fro_sq(x);
    Ok(residual_curve(x, &terms, shape)?
        .into_iter()
        .enumerate()
        .map(|(i, mse)| FactorizeRow {
            r: i + 1,
            mse,
            relative_mse: if total > 0.0 { mse / total } else { 0.0 },
        })
        .collect())
}

pub fn factorize_csv(rows: &[FactorizeRow]) -> String {
    let mut out = String::from("r,mse,relative_mse\n");
    for row in rows {
        let _ = writeln!(out, "{},{},{}", row.r, row.mse, row.relative_mse);
    }
    out
}

/// Complex matrix as CSV: an optional `re,im` header, then one `re,im` line
/// per entry in column-major order.
pub fn matrix_to_csv(m: &CMatrix) -> String {
    let mut out = String::from("re,im\n");
    for z in m.iter() {
        let _ = writeln!(out, "{},{}", z.re, z.im);
    }
    out
}

pub fn matrix_from_csv(text: &str, rows: usize, cols: usize) -> Result<CMatrix> {
    let mut values = Vec::with_capacity(rows * cols);
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (n == 0 && line.eq_ignore_ascii_case("re,im")) {
            continue;
        }
        let mut parts = line.split(',');
        let parse = |p: Option<&str>| -> Result<f64> {
            p.ok_or_else(|| Error::Parse(format!("line {}: expected two columns", n + 1)))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", n + 1)))
        };
        let re = parse(parts.next())?;
        let im = parse(parts.next())?;
        if parts.next().is_some() {
            return Err(Error::Parse(format!("line {}: expected two columns", n + 1)));
        }
        values.push(C64::new(re, im));
    }
    if values.len() != rows * cols {
        return Err(Error::InvalidShape(format!(
            "file holds {} entries, shape needs {rows}x{cols}",
            values.len()
        )));
    }
    Ok(CMatrix::from_vec(rows, cols, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_divisions_of_64_by_64() {
        let all = enumerate_divisions(64, 64);
        assert_eq!(all.len(), 49);
        assert_eq!(all[0], FactorShape { i1: 64, i2: 1, j1: 64, j2: 1 });
        assert_eq!(all[6], FactorShape { i1: 64, i2: 1, j1: 1, j2: 64 });
        assert_eq!(all[42], FactorShape { i1: 1, i2: 64, j1: 64, j2: 1 });
        assert_eq!(all[48], FactorShape { i1: 1, i2: 64, j1: 1, j2: 64 });
        assert!(all.iter().all(|s| s.rows() == 64 && s.cols() == 64));
        assert_eq!(enumerate_divisions(1, 1), vec![FactorShape { i1: 1, i2: 1, j1: 1, j2: 1 }]);
    }

    #[test]
    fn divisor_pairs_of_twelve() {
        let pairs: Vec<(usize, usize)> = enumerate_divisions(12, 1).iter().map(|s| (s.i1, s.i2)).collect();
        // Brute-force oracle over all candidate pairs.
        let mut oracle: Vec<(usize, usize)> = (1..=12)
            .flat_map(|a| (1..=12).map(move |b| (a, b)))
            .filter(|(a, b)| a * b == 12)
            .collect();
        oracle.sort_by(|x, y| y.0.cmp(&x.0));
        assert_eq!(pairs, oracle);
        assert_eq!(pairs.len(), 6);
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        assert_eq!(derive_seed(1, 2, &[3, 4]), derive_seed(1, 2, &[3, 4]));
        assert_ne!(derive_seed(1, 2, &[3, 4]), derive_seed(1, 2, &[4, 3]));
        assert_ne!(derive_seed(1, 2, &[3]), derive_seed(1, 3, &[3]));
    }

    #[test]
    fn snr_parsing() {
        let v: Vec<SnrSpec> = serde_json::from_str(r#"[0, -10.5, "inf"]"#).unwrap();
        assert_eq!(v.iter().map(SnrSpec::db).collect::<Vec<_>>(), vec![0.0, -10.5, f64::INFINITY]);
        assert!(serde_json::from_str::<Vec<SnrSpec>>(r#"["loud"]"#).is_err());
    }

    #[test]
    fn config_validation() {
        let ok = r#"{"estimators":[{"kind":"ls"}],"snr_db":[10],"t_bs":[16],"trials":2}"#;
        assert!(ExperimentConfig::from_json_str(ok).is_ok());
        let no_trials = ok.replace("\"trials\":2", "\"trials\":0");
        assert!(ExperimentConfig::from_json_str(&no_trials).is_err());
        let salsa_without_shapes = r#"{"estimators":[{"kind":"salsa"}],"snr_db":[10],"t_bs":[16],"trials":2}"#;
        assert!(ExperimentConfig::from_json_str(salsa_without_shapes).is_err());
    }

    #[test]
    fn matrix_csv_round_trip() {
        let m = CMatrix::from_fn(3, 2, |r, c| C64::new(r as f64 + 0.25, -(c as f64) * 1e-17));
        assert_eq!(matrix_from_csv(&matrix_to_csv(&m), 3, 2).unwrap(), m);
        assert!(matrix_from_csv("1,2\n3", 2, 1).is_err());
        assert!(matrix_from_csv("1,2\n", 2, 1).is_err());
        assert!(matrix_from_csv("1,x\n", 1, 1).is_err());
    }

    #[test]
    fn aggregation_is_ratio_of_sums() {
        let row = ResultRow {
            estimator: "ls".into(),
            shape: None,
            t_bs: 1,
            r: None,
            snr_db: 0.0,
            nmse: 0.0,
            nmse_se: 0.0,
            trials: 0,
            mean_wall_s: None,
            note: String::new(),
            records: vec![
                TrialRecord { num: 1.0, den: 4.0, wall_s: 0.0 },
                TrialRecord { num: 3.0, den: 4.0, wall_s: 0.0 },
            ],
        }
        .aggregate(false);
        assert_eq!(row.nmse, 0.5);
        assert_eq!(row.trials, 2);
        // Residuals ∓1, mean denominator 4: sqrt(2 / 2) / 4.
        assert!((row.nmse_se - 0.25).abs() < 1e-15);
        assert_eq!(row.mean_wall_s, None);
    }
}
