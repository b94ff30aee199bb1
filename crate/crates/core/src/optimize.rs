//! Threshold calibration and authentication-code selection.

use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auth::{AuthConfig, Strategy};
use crate::bits::{hamming, random_bits};
use crate::channel::{trial_seed, BerReport, ChannelProfile, NoiseModel};
use crate::error::{invalid_config, Error, Result};
use crate::layout::{demodulate, modulate, BarcodeSpec, GridLayout, SourceCodec, DEFAULT_LAYOUT_SEED};
use crate::predict::{decoded_auth_ber_exact, prob_eps_a1_at_most, raw_auth_ber, DemodulationRule, PredictionModel};

/// When the attacker counts as successful at a given f.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum Framing {
    /// Predicted mean decoded error rate at or below delta.
    #[default]
    Expectation,
    /// P(decoded error rate <= delta) at least `p`.
    Probabilistic { p: f64 },
}

/// Largest decoded authentication error rate seen on legal captures.
pub fn calibrate_delta(legal_reports: &[BerReport]) -> Result<f64> {
    legal_reports
        .iter()
        .map(|r| r.eps_a1)
        .reduce(f64::max)
        .ok_or_else(|| Error::InsufficientData("no legal trials to calibrate from".into()))
}

/// Where the covertness probe writes its n_a bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Placement {
    /// Uniformly without replacement over the strategy's admissible bits, random values.
    Random(Strategy),
    /// Whole bytes, spread evenly over the blocks, every bit inverted.
    Adversarial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovertnessReport {
    pub pass: bool,
    pub n_a: usize,
    pub trials: usize,
    pub failures: usize,
    pub mean_eps_c1: f64,
    pub max_eps_c1: f64,
}

fn adversarial_positions(spec: &BarcodeSpec, n_a: usize) -> Vec<usize> {
    let bytes_per_block = spec.rs_codeword_bits / 8;
    let mut out = Vec::with_capacity(n_a);
    'outer: for byte in 0..bytes_per_block {
        for block in 0..spec.block_count {
            let start = block * spec.rs_codeword_bits + byte * 8;
            for bit in start..start + 8 {
                if out.len() == n_a {
                    break 'outer;
                }
                out.push(bit);
            }
        }
    }
    out
}

/// Embed `n_a` bits into legal barcodes and check the source still decodes
/// exactly in every trial.
pub fn check_covertness(
    n_a: usize,
    spec: &BarcodeSpec,
    legal: &ChannelProfile,
    trials: usize,
    seed: u64,
    placement: Placement,
) -> Result<CovertnessReport> {
    if trials == 0 {
        return Err(invalid_config("at least one covertness trial required"));
    }
    let range: Vec<usize> = match placement {
        Placement::Random(Strategy::Strategy1) => spec.parity_ranges().into_iter().flatten().collect(),
        Placement::Random(Strategy::Strategy2) | Placement::Adversarial => (0..spec.coded_bits()).collect(),
    };
    if n_a > range.len() {
        return Err(invalid_config(format!("n_a = {n_a} exceeds {} admissible bits", range.len())));
    }
    let codec = SourceCodec::new(spec)?;
    let layout = GridLayout::new(spec, DEFAULT_LAYOUT_SEED)?;
    let noise = NoiseModel::new(&legal.profile)?;
    let fixed = adversarial_positions(spec, n_a);

    let eps: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = ChaCha20Rng::seed_from_u64(trial_seed(seed, i as u64));
            let source = random_bits(&mut rng, spec.source_bits());
            let mut stream = codec.encode(&source)?;
            match placement {
                Placement::Random(_) => {
                    for j in sample(&mut rng, range.len(), n_a) {
                        stream[range[j]] = rand::Rng::random::<bool>(&mut rng) as u8;
                    }
                }
                Placement::Adversarial => {
                    for &p in &fixed {
                        stream[p] ^= 1;
                    }
                }
            }
            let grid = layout.assemble(&modulate(&stream, spec)?, spec)?;
            let captured = noise.apply(&grid, &mut rng)?;
            let (data, _) = layout.disassemble(&captured)?;
            let (decoded, _) = codec.decode(&demodulate(&data, spec)?.to_bits(spec))?;
            Ok(hamming(&decoded, &source) as f64 / source.len() as f64)
        })
        .collect::<Result<_>>()?;

    let failures = eps.iter().filter(|&&e| e > 0.0).count();
    Ok(CovertnessReport {
        pass: failures == 0,
        n_a,
        trials,
        failures,
        mean_eps_c1: eps.iter().sum::<f64>() / trials as f64,
        max_eps_c1: eps.iter().copied().fold(0.0, f64::max),
    })
}

/// Predicted authentication error rates of one code at one f.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeEvaluation {
    pub n_a: usize,
    pub k_a: usize,
    pub t_a: usize,
    pub f: f64,
    pub eps_a2: f64,
    pub eps_a1: f64,
    pub p_eps_a1_zero: f64,
    pub p_eps_a1_within_delta: f64,
}

pub fn evaluate_code(model: &PredictionModel, spec: &BarcodeSpec, cfg: &AuthConfig, f: f64) -> Result<CodeEvaluation> {
    let profile = model.predict_profile(f)?;
    profile.covers(&spec.constellation)?;
    let eps_a2 = raw_auth_ber(&profile, &DemodulationRule::from_spec(spec));
    let (eps_a1, p_zero) = decoded_auth_ber_exact(eps_a2, cfg.n_a, cfg.t_a)?;
    Ok(CodeEvaluation {
        n_a: cfg.n_a,
        k_a: cfg.k_a,
        t_a: cfg.t_a,
        f,
        eps_a2,
        eps_a1,
        p_eps_a1_zero: p_zero,
        p_eps_a1_within_delta: prob_eps_a1_at_most(eps_a2, cfg.n_a, cfg.t_a, cfg.delta)?,
    })
}

fn attack_succeeds(eval: &CodeEvaluation, delta: f64, framing: Framing) -> Result<bool> {
    Ok(match framing {
        Framing::Expectation => eval.eps_a1 <= delta,
        Framing::Probabilistic { p } => prob_eps_a1_at_most(eval.eps_a2, eval.n_a, eval.t_a, delta)? >= p,
    })
}

/// Smallest integer f in the model's range where the attack succeeds.
pub fn break_even(
    model: &PredictionModel,
    spec: &BarcodeSpec,
    delta: f64,
    cfg: &AuthConfig,
    framing: Framing,
) -> Result<Option<u32>> {
    let (lo, hi) = model.extrapolation_range;
    for f in lo.ceil() as u32..=hi.floor() as u32 {
        let eval = evaluate_code(model, spec, cfg, f as f64)?;
        if attack_succeeds(&eval, delta, framing)? {
            return Ok(Some(f));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeChoice {
    pub config: AuthConfig,
    pub warning: Option<String>,
}

/// The preset with the most correction that still detects an attack
/// averaging `target_f` captures; the weakest preset if none does.
pub fn choose_code(
    model: &PredictionModel,
    spec: &BarcodeSpec,
    delta: f64,
    target_f: f64,
    presets: &[AuthConfig],
    framing: Framing,
) -> Result<CodeChoice> {
    let mut sorted = presets.to_vec();
    if sorted.is_empty() {
        return Err(invalid_config("no candidate codes"));
    }
    sorted.sort_by_key(|c| std::cmp::Reverse(c.t_a));
    for cfg in &sorted {
        let eval = evaluate_code(model, spec, cfg, target_f)?;
        if !attack_succeeds(&eval, delta, framing)? {
            return Ok(CodeChoice { config: cfg.clone(), warning: None });
        }
    }
    let weakest = sorted.last().expect("non-empty").clone();
    Ok(CodeChoice {
        warning: Some(format!(
            "no candidate detects an attack at f = {target_f}; falling back to t_a = {}",
            weakest.t_a
        )),
        config: weakest,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub delta: f64,
    pub framing: Framing,
    pub before: AuthConfig,
    pub chosen: AuthConfig,
    pub break_even_before: Option<u32>,
    pub break_even_after: Option<u32>,
    /// Before at its break-even, after at the same f, after at its own break-even.
    pub rows: Vec<(String, CodeEvaluation)>,
    pub covertness: Option<CovertnessReport>,
    pub warning: Option<String>,
}

/// Compare `before` with the code chosen for `target_f` (or `after` when given).
#[allow(clippy::too_many_arguments)]
pub fn optimize(
    model: &PredictionModel,
    spec: &BarcodeSpec,
    delta: f64,
    before: &AuthConfig,
    after: Option<&AuthConfig>,
    target_f: f64,
    presets: &[AuthConfig],
    framing: Framing,
) -> Result<OptimizationResult> {
    let before = before.clone().with_delta(delta);
    let (chosen, warning) = match after {
        Some(a) => (a.clone(), None),
        None => {
            let c = choose_code(model, spec, delta, target_f, presets, framing)?;
            (c.config, c.warning)
        }
    };
    let chosen = chosen.with_delta(delta);
    let be_before = break_even(model, spec, delta, &before, framing)?;
    let be_after = break_even(model, spec, delta, &chosen, framing)?;
    let f_before = be_before.map_or(target_f, |f| f as f64);
    let f_after = be_after.map_or(model.extrapolation_range.1, |f| f as f64);
    let rows = vec![
        ("before".to_string(), evaluate_code(model, spec, &before, f_before)?),
        ("after".to_string(), evaluate_code(model, spec, &chosen, f_before)?),
        ("after".to_string(), evaluate_code(model, spec, &chosen, f_after)?),
    ];
    Ok(OptimizationResult {
        delta,
        framing,
        before,
        chosen,
        break_even_before: be_before,
        break_even_after: be_after,
        rows,
        covertness: None,
        warning,
    })
}

impl OptimizationResult {
    /// Plain-text table: one row per (code, f) with predicted error rates.
    pub fn report_table(&self) -> String {
        let mut s = String::new();
        let be = |v: Option<u32>| v.map_or("none".to_string(), |f| f.to_string());
        let _ = writeln!(s, "delta = {}", self.delta);
        let _ = writeln!(
            s,
            "break-even n_s: before (k_a={}, t_a={}) {}, after (k_a={}, t_a={}) {}",
            self.before.k_a,
            self.before.t_a,
            be(self.break_even_before),
            self.chosen.k_a,
            self.chosen.t_a,
            be(self.break_even_after)
        );
        let _ = writeln!(
            s,
            "{:<8} {:>5} {:>4} {:>5} {:>9} {:>9} {:>11}",
            "", "k_a", "t_a", "n_s", "eps_a2", "eps_a1", "P(eps_a1=0)"
        );
        for (label, e) in &self.rows {
            let _ = writeln!(
                s,
                "{:<8} {:>5} {:>4} {:>5} {:>9.4} {:>9.4} {:>10.2}%",
                label,
                e.k_a,
                e.t_a,
                e.f,
                e.eps_a2,
                e.eps_a1,
                100.0 * e.p_eps_a1_zero
            );
        }
        if let Some(c) = &self.covertness {
            let _ = writeln!(
                s,
                "covertness (n_a = {}): {} over {} trials, max eps_c1 {}",
                c.n_a,
                if c.pass { "pass" } else { "FAIL" },
                c.trials,
                c.max_eps_c1
            );
        }
        if let Some(w) = &self.warning {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}
