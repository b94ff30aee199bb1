use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{AttackConfig, BerReport, Channel, ChannelProfile, Occlusion, Pipeline};
use crate::auth::{AuthConfig, SecretBundle, Verdict};
use crate::bits::random_bits;
use crate::error::{invalid_config, Result};
use crate::layout::{BarcodeSpec, DEFAULT_LAYOUT_SEED};

/// What the barcode passes through in a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ChannelModel {
    /// One pass through a legal or direct-copy profile.
    Single(ChannelProfile),
    /// Synthesized-copy attack.
    Attack { attack: AttackConfig, capture: ChannelProfile },
}

impl ChannelModel {
    pub fn prepare(&self) -> Result<Channel> {
        match self {
            ChannelModel::Single(p) => Channel::single(p),
            ChannelModel::Attack { attack, capture } => Channel::attack(attack, capture),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchConfig {
    pub spec: BarcodeSpec,
    pub auth: AuthConfig,
    pub channel: ChannelModel,
    pub occlusion: Option<Occlusion>,
    pub layout_seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl BatchConfig {
    pub fn new(spec: BarcodeSpec, auth: AuthConfig, channel: ChannelModel) -> Self {
        Self { spec, auth, channel, occlusion: None, layout_seed: DEFAULT_LAYOUT_SEED, threads: None }
    }
}

/// Means with standard errors, and event probabilities with binomial standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub trials: usize,
    pub mean_eps_c2: f64,
    pub se_eps_c2: f64,
    pub mean_eps_c1: f64,
    pub se_eps_c1: f64,
    pub mean_eps_a2: f64,
    pub se_eps_a2: f64,
    pub mean_eps_a1: f64,
    pub se_eps_a1: f64,
    pub p_eps_a1_zero: f64,
    pub se_p_eps_a1_zero: f64,
    pub p_eps_c1_zero: f64,
    pub se_p_eps_c1_zero: f64,
    pub p_illegal: f64,
    pub se_p_illegal: f64,
}

impl BatchSummary {
    /// `(name, value)` pairs in a fixed order.
    pub fn fields(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("trials", self.trials as f64),
            ("mean_eps_c2", self.mean_eps_c2),
            ("se_eps_c2", self.se_eps_c2),
            ("mean_eps_c1", self.mean_eps_c1),
            ("se_eps_c1", self.se_eps_c1),
            ("mean_eps_a2", self.mean_eps_a2),
            ("se_eps_a2", self.se_eps_a2),
            ("mean_eps_a1", self.mean_eps_a1),
            ("se_eps_a1", self.se_eps_a1),
            ("p_eps_a1_zero", self.p_eps_a1_zero),
            ("se_p_eps_a1_zero", self.se_p_eps_a1_zero),
            ("p_eps_c1_zero", self.p_eps_c1_zero),
            ("se_p_eps_c1_zero", self.se_p_eps_c1_zero),
            ("p_illegal", self.p_illegal),
            ("se_p_illegal", self.se_p_illegal),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    /// Reports in trial-index order.
    pub reports: Vec<BerReport>,
    pub summary: BatchSummary,
}

/// Seed of trial `index`, derived by hashing the master seed and index.
pub fn trial_seed(master_seed: u64, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(b"lcac-trial");
    h.update(master_seed.to_le_bytes());
    h.update(index.to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}

fn mean_se(v: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = v.clone().sum::<f64>() / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = v.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0);
    (mean, (var / nf).sqrt())
}

fn proportion(hits: usize, n: usize) -> (f64, f64) {
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// Summary statistics over reports, accumulated in slice order.
pub fn summarize(reports: &[BerReport]) -> BatchSummary {
    let n = reports.len();
    let (mean_eps_c2, se_eps_c2) = mean_se(reports.iter().map(|r| r.eps_c2), n);
    let (mean_eps_c1, se_eps_c1) = mean_se(reports.iter().map(|r| r.eps_c1), n);
    let (mean_eps_a2, se_eps_a2) = mean_se(reports.iter().map(|r| r.eps_a2), n);
    let (mean_eps_a1, se_eps_a1) = mean_se(reports.iter().map(|r| r.eps_a1), n);
    let (p_eps_a1_zero, se_p_eps_a1_zero) = proportion(reports.iter().filter(|r| r.eps_a1 == 0.0).count(), n);
    let (p_eps_c1_zero, se_p_eps_c1_zero) = proportion(reports.iter().filter(|r| r.eps_c1 == 0.0).count(), n);
    let (p_illegal, se_p_illegal) = proportion(reports.iter().filter(|r| r.verdict == Verdict::Illegal).count(), n);
    BatchSummary {
        trials: n,
        mean_eps_c2,
        se_eps_c2,
        mean_eps_c1,
        se_eps_c1,
        mean_eps_a2,
        se_eps_a2,
        mean_eps_a1,
        se_eps_a1,
        p_eps_a1_zero,
        se_p_eps_a1_zero,
        p_eps_c1_zero,
        se_p_eps_c1_zero,
        p_illegal,
        se_p_illegal,
    }
}

/// Run independent trials, each with its own source, key, authentication
/// message and channel draws, all derived from `trial_seed(master_seed, i)`.
/// Results do not depend on the thread count.
pub fn batch_trials(config: &BatchConfig, trial_count: usize, master_seed: u64) -> Result<BatchResult> {
    if trial_count == 0 {
        return Err(invalid_config("trial count must be at least 1"));
    }
    let pipeline = Pipeline::new(&config.spec, &config.auth, config.layout_seed)?;
    let channel = config.channel.prepare()?;
    let run = |i: usize| -> Result<BerReport> {
        let seed = trial_seed(master_seed, i as u64);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let source = random_bits(&mut rng, config.spec.source_bits());
        let bundle = SecretBundle::random(&mut rng, config.auth.k_a, &source);
        pipeline.run(&source, &bundle, &channel, config.occlusion.as_ref(), seed, &mut rng)
    };
    let reports = match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| invalid_config(format!("thread pool: {e}")))?
            .install(|| (0..trial_count).into_par_iter().map(run).collect::<Result<Vec<_>>>())?,
        None => (0..trial_count).into_par_iter().map(run).collect::<Result<Vec<_>>>()?,
    };
    let summary = summarize(&reports);
    Ok(BatchResult { reports, summary })
}

/// One row per trial, then `#summary,<name>,<value>` footer rows.
pub fn write_trials_csv<W: Write>(out: W, result: &BatchResult) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record(["trial", "seed", "eps_c2", "eps_c1", "eps_a2", "eps_a1", "verdict"])?;
    for (i, r) in result.reports.iter().enumerate() {
        w.write_record([
            i.to_string(),
            r.trial_seed.to_string(),
            r.eps_c2.to_string(),
            r.eps_c1.to_string(),
            r.eps_a2.to_string(),
            r.eps_a1.to_string(),
            r.verdict.to_string(),
        ])?;
    }
    for (name, value) in result.summary.fields() {
        w.write_record(["#summary", name, &value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
