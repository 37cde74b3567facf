//! Monte Carlo harness: seeded trials, logical-error statistics, threshold
//! and L* estimation, the hashing bound, percolation and the Cantor suite.

mod analysis;
mod cantor;
pub mod config;
mod percolation;

pub use analysis::{estimate_threshold, fit_log, hashing_bound, l_star, loglog_slope, LStar, LogFit, ThresholdEstimate};
pub use cantor::{cantor_suite, CantorCell};
pub use config::{DecoderKind, ExperimentConfig, Format, Measurement, Model};
pub use percolation::{percolation_experiment, percolation_trial, PercolationPoint};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::{compose, logical_class, syndrome_of, CodeParams, DefectSet, ErrorChain};
use crate::error::{Error, Result};
use crate::hdrg::{hdrg_run, DecodeOutput, Strategy};
use crate::mwm::{self, DecoderConfig};
use crate::noise::{sample_chain, sample_history, syndrome_changes, trial_rng, ChargeDistribution, NoiseParams};
use crate::nonabelian::{decode_phi_lambda, HiddenDefects, PhiLambdaConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub model: Model,
    pub decoder: DecoderKind,
    pub d: u32,
    #[serde(rename = "L")]
    pub l: usize,
    pub p: f64,
    pub rounds: usize,
    pub trials: u64,
    pub failures: u64,
    pub p_logical: f64,
    pub sigma: f64,
    pub mean_iterations: f64,
    pub seed: u64,
}

impl TrialStats {
    pub const CSV_HEADER: &'static str = "model,decoder,d,L,p,rounds,trials,failures,p_logical,sigma,mean_iterations,seed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.model.name(),
            self.decoder.name(),
            self.d,
            self.l,
            self.p,
            self.rounds,
            self.trials,
            self.failures,
            self.p_logical,
            self.sigma,
            self.mean_iterations,
            self.seed
        )
    }
}

/// `sqrt(p (1 - p) / n)`.
pub fn binomial_sigma(failures: u64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let p = failures as f64 / trials as f64;
    (p * (1.0 - p) / trials as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub failed: bool,
    pub iterations: usize,
}

fn decode_abelian(cfg: &ExperimentConfig, defects: &DefectSet, code: &CodeParams) -> Result<DecodeOutput> {
    match cfg.decoder {
        DecoderKind::Mwm => {
            let dc = DecoderConfig {
                lambda: cfg.lambda,
                include_dm1_factor: cfg.dm1_factor,
                use_shortcuts: cfg.shortcuts,
                ..DecoderConfig::default()
            };
            mwm::decode(defects, code, cfg.p, &dc)
        }
        DecoderKind::Bh => hdrg_run(Strategy::Bh, defects, code, cfg.shortcuts),
        DecoderKind::Abcb => hdrg_run(Strategy::Abcb, defects, code, cfg.shortcuts),
        DecoderKind::Ed => hdrg_run(Strategy::Ed, defects, code, cfg.shortcuts),
    }
}

/// Decodes `error` and reports whether the residual is a logical operator.
fn judge(error: &ErrorChain, recovery: &ErrorChain, code: &CodeParams) -> std::result::Result<bool, String> {
    let total = compose(recovery, error, code);
    let residual = syndrome_of(&total, code);
    if !residual.is_empty() {
        return Err(format!("residual syndrome with {} defects", residual.len()));
    }
    Ok(!logical_class(&total, code).map_err(|e| e.to_string())?.is_trivial())
}

/// One seeded trial: sample, decode, verify, classify.
pub fn run_trial(cfg: &ExperimentConfig, trial: u64) -> Result<TrialOutcome> {
    let code = CodeParams::new(cfg.d, cfg.l)?;
    let wrap = |msg: String| Error::Trial { trial, seed: cfg.seed, msg };
    let mut rng = trial_rng(cfg.seed, trial);
    match cfg.model {
        Model::Zd => {
            let np = NoiseParams::uniform(cfg.p, cfg.d)?;
            let (error, defects) = match cfg.measurement {
                Measurement::Perfect => {
                    let e = sample_chain(&np, &code, &mut rng)?;
                    let ds = DefectSet::from_syndrome(&syndrome_of(&e, &code));
                    (e, ds)
                }
                Measurement::Faulty => {
                    let h = sample_history(&np, &code, cfg.rounds(), &mut rng)?;
                    (h.total_error(&code), syndrome_changes(&h, cfg.d))
                }
            };
            if cfg.p == 0.0 {
                return Ok(TrialOutcome { failed: false, iterations: 0 });
            }
            let out = decode_abelian(cfg, &defects, &code).map_err(|e| wrap(e.to_string()))?;
            let failed = judge(&error, &out.recovery, &code).map_err(wrap)?;
            Ok(TrialOutcome { failed, iterations: out.iterations })
        }
        Model::PhiLambda => {
            if cfg.measurement != Measurement::Perfect {
                return Err(Error::Config("phi-lambda decoding supports perfect measurements only".into()));
            }
            if cfg.decoder != DecoderKind::Mwm {
                return Err(Error::Config("phi-lambda decoding uses the mwm decoder".into()));
            }
            let np = NoiseParams::new(cfg.p, cfg.d, ChargeDistribution::PhiLambda)?;
            let error = sample_chain(&np, &code, &mut rng)?;
            if cfg.p == 0.0 {
                return Ok(TrialOutcome { failed: false, iterations: 0 });
            }
            let h = HiddenDefects::from_syndrome(&syndrome_of(&error, &code));
            let pc = PhiLambdaConfig {
                stage1: DecoderConfig {
                    lambda: cfg.lambda,
                    include_dm1_factor: cfg.dm1_factor,
                    use_shortcuts: cfg.shortcuts,
                    ..DecoderConfig::default()
                },
                ..PhiLambdaConfig::default()
            };
            let out = decode_phi_lambda(&h, &code, cfg.p, &pc).map_err(|e| wrap(e.to_string()))?;
            let failed = judge(&error, &out.recovery, &code).map_err(wrap)?;
            Ok(TrialOutcome { failed, iterations: out.stage1_iterations })
        }
    }
}

/// Runs `cfg.trials` trials on the rayon pool. Results do not depend on the
/// number of threads.
pub fn run_batch(cfg: &ExperimentConfig) -> Result<TrialStats> {
    cfg.validate()?;
    let outcomes: Vec<TrialOutcome> =
        (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, t)).collect::<Result<Vec<_>>>()?;
    let failures = outcomes.iter().filter(|o| o.failed).count() as u64;
    let iters: u64 = outcomes.iter().map(|o| o.iterations as u64).sum();
    let n = cfg.trials;
    Ok(TrialStats {
        model: cfg.model,
        decoder: cfg.decoder,
        d: cfg.d,
        l: cfg.l,
        p: cfg.p,
        rounds: if cfg.measurement == Measurement::Faulty { cfg.rounds() } else { 0 },
        trials: n,
        failures,
        p_logical: if n == 0 { 0.0 } else { failures as f64 / n as f64 },
        sigma: binomial_sigma(failures, n),
        mean_iterations: if n == 0 { 0.0 } else { iters as f64 / n as f64 },
        seed: cfg.seed,
    })
}

/// One batch per `(L, p)`, in sweep order.
pub fn run_sweep(base: &ExperimentConfig, ls: &[usize], ps: &[f64]) -> Result<Vec<TrialStats>> {
    let mut out = Vec::with_capacity(ls.len() * ps.len());
    for &l in ls {
        for &p in ps {
            out.push(run_batch(&ExperimentConfig { l, p, ..base.clone() })?);
        }
    }
    Ok(out)
}

/// Groups sweep rows into `(L, [(p, p_L)])` curves.
pub fn curves(rows: &[TrialStats]) -> Vec<(usize, Vec<(f64, f64)>)> {
    let mut out: Vec<(usize, Vec<(f64, f64)>)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|c| c.0 == r.l) {
            Some(c) => c.1.push((r.p, r.p_logical)),
            None => out.push((r.l, vec![(r.p, r.p_logical)])),
        }
    }
    out
}

pub fn write_csv(rows: &[TrialStats]) -> String {
    let mut s = String::from(TrialStats::CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}
