use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ChannelProfile, NoiseModel, Occlusion};
use crate::auth::{
    self, derive_locations_from_digest, source_digest, AuthConfig, EmbedLocations, SecretBundle, Verdict,
};
use crate::bits::{hamming, Bits};
use crate::coding::BchCode;
use crate::error::{invalid_config, invalid_input, Error, Result};
use crate::ggd::{ConstellationProfile, GgdParams};
use crate::layout::{demodulate, modulate, BarcodeSpec, GridLayout, ModuleGrid, SourceCodec, DEFAULT_LAYOUT_SEED};
use crate::predict::PredictionModel;

/// The four error rates of one trial and the resulting verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerReport {
    /// Demodulated source stream vs the pre-embedding codeword stream.
    pub eps_c2: f64,
    /// Decoded source vs original source.
    pub eps_c1: f64,
    /// Extracted authentication codeword vs embedded one.
    pub eps_a2: f64,
    /// Decoded authentication message vs issued one.
    pub eps_a1: f64,
    pub verdict: Verdict,
    pub trial_seed: u64,
    pub rs_block_failures: usize,
    pub bch_failure: bool,
}

/// Sender-side intermediate streams.
#[derive(Debug, Clone)]
pub struct Transmission {
    pub s_c1: Bits,
    /// RS coded stream before embedding.
    pub s_c2: Bits,
    pub s_a2: Bits,
    /// Stream actually modulated.
    pub s_e2: Bits,
    pub locations: EmbedLocations,
    pub grid: ModuleGrid,
}

#[derive(Debug, Clone)]
pub struct Reception {
    pub s_c2_hat: Bits,
    pub s_c1_hat: Bits,
    pub block_failures: Vec<bool>,
    pub s_a2_hat: Bits,
    pub s_a1_hat: Bits,
    pub bch_failure: bool,
    pub eps_a1: f64,
    pub verdict: Verdict,
}

/// Sender and receiver bound to one spec, auth configuration and layout.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub spec: BarcodeSpec,
    pub cfg: AuthConfig,
    pub layout_seed: u64,
    codec: SourceCodec,
    code: BchCode,
    layout: GridLayout,
}

impl Pipeline {
    pub fn new(spec: &BarcodeSpec, cfg: &AuthConfig, layout_seed: u64) -> Result<Self> {
        spec.validate()?;
        cfg.validate(spec)?;
        Ok(Self {
            spec: spec.clone(),
            cfg: cfg.clone(),
            layout_seed,
            codec: SourceCodec::new(spec)?,
            code: cfg.code()?,
            layout: GridLayout::new(spec, layout_seed)?,
        })
    }

    pub fn layout(&self) -> &GridLayout {
        &self.layout
    }

    pub fn send(&self, source: &[u8], bundle: &SecretBundle) -> Result<Transmission> {
        if source_digest(source) != bundle.source_digest {
            return Err(invalid_input("secret bundle was issued for a different source message"));
        }
        let s_c2 = self.codec.encode(source)?;
        let s_a2 = self.code.encode(&bundle.s_a1)?;
        let locations = derive_locations_from_digest(&bundle.source_digest, &bundle.key, &self.cfg, &self.spec)?;
        let s_e2 = auth::embed(&s_c2, &s_a2, &locations)?;
        let grid = self.layout.assemble(&modulate(&s_e2, &self.spec)?, &self.spec)?;
        Ok(Transmission { s_c1: source.to_vec(), s_c2, s_a2, s_e2, locations, grid })
    }

    pub fn receive(&self, grid: &ModuleGrid, bundle: &SecretBundle) -> Result<Reception> {
        let (data, _) = self.layout.disassemble(grid)?;
        let s_c2_hat = demodulate(&data, &self.spec)?.to_bits(&self.spec);
        let (s_c1_hat, block_failures) = self.codec.decode(&s_c2_hat)?;
        let loc = derive_locations_from_digest(&bundle.source_digest, &bundle.key, &self.cfg, &self.spec)?;
        let s_a2_hat = auth::extract(&s_c2_hat, &loc)?;
        let (s_a1_hat, bch_failure) = auth::decode_with(&self.code, &s_a2_hat)?;
        let (eps_a1, verdict) = auth::authenticate(&s_a1_hat, &bundle.s_a1, self.cfg.delta)?;
        Ok(Reception { s_c2_hat, s_c1_hat, block_failures, s_a2_hat, s_a1_hat, bch_failure, eps_a1, verdict })
    }

    pub fn report(&self, tx: &Transmission, rx: &Reception, trial_seed: u64) -> BerReport {
        let frac = |a: &[u8], b: &[u8]| hamming(a, b) as f64 / b.len() as f64;
        BerReport {
            eps_c2: frac(&rx.s_c2_hat, &tx.s_c2),
            eps_c1: frac(&rx.s_c1_hat, &tx.s_c1),
            eps_a2: frac(&rx.s_a2_hat, &tx.s_a2),
            eps_a1: rx.eps_a1,
            verdict: rx.verdict,
            trial_seed,
            rs_block_failures: rx.block_failures.iter().filter(|&&f| f).count(),
            bch_failure: rx.bch_failure,
        }
    }

    /// Full trial through `channel`, with optional occlusion after capture.
    pub fn run<R: Rng + ?Sized>(
        &self,
        source: &[u8],
        bundle: &SecretBundle,
        channel: &Channel,
        occlusion: Option<&Occlusion>,
        trial_seed: u64,
        rng: &mut R,
    ) -> Result<BerReport> {
        let tx = self.send(source, bundle)?;
        let mut captured = channel.transmit(&tx.grid, rng)?;
        if let Some(o) = occlusion {
            captured = o.apply(&captured)?;
        }
        let rx = self.receive(&captured, bundle)?;
        Ok(self.report(&tx, &rx, trial_seed))
    }
}

/// Source of per-n_s end-to-end copy profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScProfiles {
    /// Measured profiles keyed by n_s.
    Series(Vec<(usize, ConstellationProfile<f64>)>),
    /// Extrapolation from a fitted prediction model.
    Model(PredictionModel),
}

impl ScProfiles {
    pub fn profile(&self, n_s: usize) -> Result<ConstellationProfile<f64>> {
        match self {
            ScProfiles::Series(series) => series
                .iter()
                .find(|(n, _)| *n == n_s)
                .map(|(_, p)| p.clone())
                .ok_or_else(|| Error::MissingProfile(format!("no profile for n_s = {n_s}"))),
            ScProfiles::Model(model) => model.predict_profile(n_s as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttackMode {
    /// One pass through the end-to-end profile measured or predicted for n_s.
    Empirical(ScProfiles),
    /// n_s first-stage captures averaged, requantised, reprinted with
    /// centred second-stage noise and captured through the legal profile.
    Compositional {
        first_stage: ChannelProfile,
        /// Per-point reprint noise; `None` means a noiseless reprint.
        second_stage: Option<Vec<GgdParams<f64>>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub n_s: usize,
    pub mode: AttackMode,
}

impl AttackMode {
    /// Second-stage variance as the copy-minus-legal difference per point,
    /// keeping the copy profile's shape factor. Each law is centred on its
    /// nominal gray, so it adds spread but no shift.
    pub fn default_second_stage(
        dps: &ConstellationProfile<f64>,
        sps: &ConstellationProfile<f64>,
    ) -> Result<Vec<GgdParams<f64>>> {
        dps.rows
            .iter()
            .map(|r| {
                let legal =
                    sps.params_for(r.x).ok_or_else(|| Error::InvalidProfile(format!("no legal row for {}", r.x)))?;
                GgdParams::new(r.x, r.sigma2 - legal.sigma2, r.gamma)
            })
            .collect()
    }
}

/// Prepared channel used inside trials.
#[derive(Debug, Clone)]
pub enum Channel {
    Single(NoiseModel),
    Compositional { n_s: usize, first: NoiseModel, second: Option<NoiseModel>, capture: NoiseModel },
}

impl Channel {
    pub fn single(ch: &ChannelProfile) -> Result<Self> {
        Ok(Channel::Single(NoiseModel::new(&ch.profile)?))
    }

    pub fn attack(attack: &AttackConfig, capture: &ChannelProfile) -> Result<Self> {
        if attack.n_s < 1 {
            return Err(invalid_config("n_s must be at least 1"));
        }
        match &attack.mode {
            AttackMode::Empirical(profiles) => Ok(Channel::Single(NoiseModel::new(&profiles.profile(attack.n_s)?)?)),
            AttackMode::Compositional { first_stage, second_stage } => {
                let points = capture.profile.points();
                let second = match second_stage {
                    Some(p) if p.len() != points.len() => {
                        return Err(invalid_config("second-stage noise needs one law per constellation point"))
                    }
                    Some(p) => Some(NoiseModel::from_params(&points, p)?),
                    None => None,
                };
                Ok(Channel::Compositional {
                    n_s: attack.n_s,
                    first: NoiseModel::new(&first_stage.profile)?,
                    second,
                    capture: NoiseModel::new(&capture.profile)?,
                })
            }
        }
    }

    pub fn transmit<R: Rng + ?Sized>(&self, grid: &ModuleGrid, rng: &mut R) -> Result<ModuleGrid> {
        match self {
            Channel::Single(m) => m.apply(grid, rng),
            Channel::Compositional { n_s, first, second, capture } => {
                let mut acc = vec![0.0; grid.intensities.len()];
                for _ in 0..*n_s {
                    let c = first.apply(grid, rng)?;
                    for (a, v) in acc.iter_mut().zip(&c.intensities) {
                        *a += v;
                    }
                }
                let intensities = acc
                    .into_iter()
                    .map(|sum| {
                        let mut v = (sum / *n_s as f64).round().clamp(0.0, 255.0);
                        if let Some(s) = second {
                            v = s.perturb_nearest(v, rng);
                        }
                        capture.perturb_nearest(v, rng)
                    })
                    .collect();
                Ok(ModuleGrid { side: grid.side, intensities, roles: grid.roles.clone() })
            }
        }
    }
}

fn run_once<R: Rng + ?Sized>(
    source: &[u8],
    bundle: &SecretBundle,
    cfg: &AuthConfig,
    spec: &BarcodeSpec,
    channel: &Channel,
    rng: &mut R,
) -> Result<BerReport> {
    Pipeline::new(spec, cfg, DEFAULT_LAYOUT_SEED)?.run(source, bundle, channel, None, 0, rng)
}

/// One barcode through the legal single print-and-scan path.
pub fn run_legal_trial<R: Rng + ?Sized>(
    source: &[u8],
    bundle: &SecretBundle,
    cfg: &AuthConfig,
    spec: &BarcodeSpec,
    legal: &ChannelProfile,
    rng: &mut R,
) -> Result<BerReport> {
    run_once(source, bundle, cfg, spec, &Channel::single(legal)?, rng)
}

/// One barcode copied directly: a single pass through a copy profile.
pub fn run_dc_attack<R: Rng + ?Sized>(
    source: &[u8],
    bundle: &SecretBundle,
    cfg: &AuthConfig,
    spec: &BarcodeSpec,
    illegal: &ChannelProfile,
    rng: &mut R,
) -> Result<BerReport> {
    if illegal.kind != super::ChannelKind::IllegalDps {
        return Err(invalid_config("direct-copy attack needs a copy-channel profile"));
    }
    run_once(source, bundle, cfg, spec, &Channel::single(illegal)?, rng)
}

/// One barcode copied from `n_s` averaged captures. `capture` is the
/// receiver's legal capture profile, used by the compositional mode only.
pub fn run_sc_attack<R: Rng + ?Sized>(
    source: &[u8],
    bundle: &SecretBundle,
    cfg: &AuthConfig,
    spec: &BarcodeSpec,
    attack: &AttackConfig,
    capture: &ChannelProfile,
    rng: &mut R,
) -> Result<BerReport> {
    run_once(source, bundle, cfg, spec, &Channel::attack(attack, capture)?, rng)
}
