use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use lcac::auth::{read_key, write_key, AuthConfig, SecretBundle, Strategy, Verdict, DEFAULT_DELTA};
use lcac::bits;
use lcac::channel::{
    batch_trials, write_trials_csv, AttackConfig, AttackMode, BatchConfig, Channel, ChannelModel, ChannelProfile,
    Occlusion, ScProfiles,
};
use lcac::experiment::{resolve_model, resolve_profile, resolve_series, run_plan, spec_by_name, ExperimentPlan};
use lcac::ggd::{estimate_profile, SampleSet, ShapeSearch};
use lcac::layout::{demodulate, read_grid, rs_decode, write_grid, BarcodeSpec, GridLayout, DEFAULT_LAYOUT_SEED};
use lcac::optimize::{break_even, evaluate_code, optimize, Framing};
use lcac::predict::{PredictionModel, DEFAULT_EXTRAPOLATION};

const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(name = "lcac", version, about = "Anti-copy 2D barcodes: generate, authenticate, simulate, optimize")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::One => Strategy::Strategy1,
            StrategyArg::Two => Strategy::Strategy2,
        }
    }
}

#[derive(Args, Clone)]
struct AuthArgs {
    /// Embedding strategy.
    #[arg(long, value_enum, default_value = "1")]
    strategy: StrategyArg,
    /// Authentication threshold on the decoded authentication BER.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
}

impl AuthArgs {
    fn config(&self, k_a: usize) -> Result<AuthConfig> {
        Ok(AuthConfig::preset(k_a, self.strategy.into())?.with_delta(self.delta))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Issue a key and authentication message bound to a source file.
    Keygen {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Authentication message length (147, 179 or 247).
        #[arg(long, default_value_t = 147)]
        ka: usize,
        #[arg(long, default_value = "default")]
        spec: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Encode a source file and embed the authentication message into a PGM barcode.
    Generate {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "default")]
        spec: String,
        #[command(flatten)]
        auth: AuthArgs,
        #[arg(long, default_value_t = DEFAULT_LAYOUT_SEED)]
        layout_seed: u64,
    },
    /// Recover the source message from a barcode image.
    Decode {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Authenticate a barcode image; exits 1 when ruled illegal.
    Verify {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        key: PathBuf,
        #[command(flatten)]
        auth: AuthArgs,
    },
    /// Pass a barcode image once through a print-and-scan channel.
    Channel {
        #[arg(long)]
        image: PathBuf,
        #[arg(long, default_value = "bundled:sps_default")]
        profile: String,
        #[arg(long)]
        out: PathBuf,
        /// Occlude the top-left ROWSxCOLS modules after capture.
        #[arg(long, value_parser = parse_occlusion)]
        occlude: Option<(usize, usize)>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Copy a barcode image with a direct or synthesized-copy attack.
    Attack {
        #[arg(long)]
        image: PathBuf,
        #[command(flatten)]
        attack: AttackArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Monte Carlo batch of full trials, per-trial CSV plus printed summary.
    Batch {
        /// Channel: a legal capture (`legal`) or an attack (`dc`, `sc`, `compositional`).
        #[arg(long, value_enum, default_value = "legal")]
        mode: BatchMode,
        #[command(flatten)]
        attack: AttackArgs,
        #[arg(long, default_value_t = 147)]
        ka: usize,
        #[arg(long, default_value = "default")]
        spec: String,
        #[command(flatten)]
        auth: AuthArgs,
        #[arg(long, value_parser = parse_occlusion)]
        occlude: Option<(usize, usize)>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate a GGD profile from `constellation,value` samples.
    Estimate {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "estimated")]
        provenance: String,
        /// Exhaustive shape search with this step instead of bisection.
        #[arg(long)]
        exhaustive_step: Option<f64>,
    },
    /// Fit the power-law prediction model to a synthesized-copy series.
    Fit {
        #[arg(long, default_value = "bundled:table4")]
        series: String,
        #[arg(long)]
        out: PathBuf,
        /// Upper end of the range the model may be evaluated on.
        #[arg(long, default_value_t = DEFAULT_EXTRAPOLATION.1)]
        max_f: f64,
    },
    /// Predict the channel profile and authentication BERs at a given n_s.
    Predict {
        #[arg(long, default_value = "bundled:table4")]
        model: String,
        #[arg(long)]
        ns: f64,
        #[arg(long, default_value_t = 147)]
        ka: usize,
        #[arg(long, default_value = "default")]
        spec: String,
        #[command(flatten)]
        auth: AuthArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Choose a replacement authentication code length.
    Optimize {
        #[arg(long, default_value = "bundled:table4")]
        model: String,
        #[arg(long, default_value_t = 147)]
        before: usize,
        /// Fixed replacement; searched over the presets when absent.
        #[arg(long)]
        after: Option<usize>,
        /// Attack strength to withstand; defaults to the current break-even.
        #[arg(long)]
        target: Option<f64>,
        /// `expectation` or `probabilistic:P`.
        #[arg(long, default_value = "expectation", value_parser = parse_framing)]
        framing: Framing,
        #[arg(long, default_value = "default")]
        spec: String,
        #[command(flatten)]
        auth: AuthArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment plan (bundled name or TOML path).
    Experiment {
        plan: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BatchMode {
    Legal,
    Dc,
    Sc,
    Compositional,
}

#[derive(Args, Clone)]
struct AttackArgs {
    /// Channel profile: the legal capture (legal mode), the copy channel (dc),
    /// or the first-stage capture (compositional).
    #[arg(long)]
    profile: Option<String>,
    /// Number of averaged captures; 0 means a direct copy.
    #[arg(long, default_value_t = 0)]
    ns: usize,
    /// Synthesized-copy profiles: a prediction model reference.
    #[arg(long, default_value = "bundled:table4")]
    model: String,
    /// Use measured series profiles instead of the fitted model.
    #[arg(long)]
    series: Option<String>,
    /// Legal capture profile after a compositional copy.
    #[arg(long, default_value = "bundled:sps_default")]
    legal: String,
    /// Compositional attack instead of the empirical synthesized-copy profile.
    #[arg(long)]
    compositional: bool,
    /// Copy profile whose excess variance over the first stage becomes the
    /// compositional reprint noise; `none` disables that stage.
    #[arg(long, default_value = "bundled:table2_a")]
    second_stage: String,
}

impl AttackArgs {
    fn channel(&self) -> Result<ChannelModel> {
        let legal = ChannelProfile::legal(resolve_profile(&self.legal)?);
        if self.ns == 0 {
            let p = self.profile.as_deref().unwrap_or("bundled:table2_a");
            return Ok(ChannelModel::Single(ChannelProfile::illegal(resolve_profile(p)?)));
        }
        let mode = if self.compositional {
            let first = resolve_profile(self.profile.as_deref().unwrap_or("bundled:sps_default"))?;
            let second_stage = match self.second_stage.as_str() {
                "none" => None,
                r => Some(AttackMode::default_second_stage(&resolve_profile(r)?, &first)?),
            };
            AttackMode::Compositional { first_stage: ChannelProfile::legal(first), second_stage }
        } else if let Some(series) = &self.series {
            AttackMode::Empirical(ScProfiles::Series(resolve_series(series)?))
        } else {
            AttackMode::Empirical(ScProfiles::Model(resolve_model(&self.model)?))
        };
        Ok(ChannelModel::Attack { attack: AttackConfig { n_s: self.ns, mode }, capture: legal })
    }
}

fn parse_occlusion(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or("expected ROWSxCOLS")?;
    Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
}

fn parse_framing(s: &str) -> std::result::Result<Framing, String> {
    match s.split_once(':') {
        None if s == "expectation" => Ok(Framing::Expectation),
        Some(("probabilistic", p)) => {
            let p: f64 = p.parse().map_err(|e| format!("{e}"))?;
            if !(0.0..=1.0).contains(&p) {
                return Err("probability must lie in [0, 1]".into());
            }
            Ok(Framing::Probabilistic { p })
        }
        _ => Err("expected `expectation` or `probabilistic:P`".into()),
    }
}

/// Source file bytes to the barcode's source bit stream. Trailing padding bits
/// in the last byte must be zero.
fn read_source(path: &Path, spec: &BarcodeSpec) -> Result<Vec<u8>> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let need = spec.source_bits().div_ceil(8);
    if bytes.len() != need {
        bail!("source is {} bytes, this spec carries exactly {need}", bytes.len());
    }
    let mut b = bits::unpack(&bytes);
    if b[spec.source_bits()..].iter().any(|&x| x != 0) {
        bail!("source padding bits must be zero");
    }
    b.truncate(spec.source_bits());
    Ok(b)
}

fn seeded(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Keygen { source, out, ka, spec, seed } => {
            let spec = spec_by_name(&spec)?;
            AuthConfig::preset(ka, Strategy::Strategy1)?;
            let s_c1 = read_source(&source, &spec)?;
            let bundle = SecretBundle::random(&mut seeded(seed), ka, &s_c1);
            write_key(&bundle, &out)?;
            println!("key written to {}", out.display());
        }
        Command::Generate { source, key, out, spec, auth, layout_seed } => {
            let spec = spec_by_name(&spec)?;
            let bundle = read_key(&key).with_context(|| format!("reading key {}", key.display()))?;
            let s_c1 = read_source(&source, &spec)?;
            let cfg = auth.config(bundle.s_a1.len())?;
            let pipeline = lcac::channel::Pipeline::new(&spec, &cfg, layout_seed)?;
            let tx = pipeline.send(&s_c1, &bundle)?;
            write_grid(&tx.grid, &spec, layout_seed, &out)?;
            println!("{}x{} barcode written to {}", tx.grid.side, tx.grid.side, out.display());
        }
        Command::Decode { image, out } => {
            let (grid, meta) = read_grid(&image)?;
            let layout = GridLayout::from_roles(&meta.spec, meta.roles())?;
            let (data, _) = layout.disassemble(&grid)?;
            let stream = demodulate(&data, &meta.spec)?.to_bits(&meta.spec);
            let (s_c1, failures) = rs_decode(&stream, &meta.spec)?;
            let failed = failures.iter().filter(|&&f| f).count();
            fs::write(&out, bits::pack_padded(&s_c1))?;
            println!("decoded {} bits, {failed} of {} RS blocks uncorrectable", s_c1.len(), failures.len());
        }
        Command::Verify { image, key, auth } => {
            let bundle = read_key(&key).with_context(|| format!("reading key {}", key.display()))?;
            let (grid, meta) = read_grid(&image)?;
            let cfg = auth.config(bundle.s_a1.len())?;
            let pipeline = lcac::channel::Pipeline::new(&meta.spec, &cfg, meta.layout_seed)?;
            let rx = pipeline.receive(&grid, &bundle)?;
            println!("eps_a1={} delta={} verdict={}", rx.eps_a1, cfg.delta, rx.verdict);
            if rx.verdict == Verdict::Illegal {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Channel { image, profile, out, occlude, seed } => {
            let (grid, meta) = read_grid(&image)?;
            let ch = ChannelProfile::legal(resolve_profile(&profile)?);
            let mut captured = Channel::single(&ch)?.transmit(&grid, &mut seeded(seed))?;
            if let Some((a, b)) = occlude {
                captured = Occlusion::top_left(a, b).apply(&captured)?;
            }
            write_grid(&captured, &meta.spec, meta.layout_seed, &out)?;
            println!("capture written to {}", out.display());
        }
        Command::Attack { image, attack, out, seed } => {
            let (grid, meta) = read_grid(&image)?;
            let copied = attack.channel()?.prepare()?.transmit(&grid, &mut seeded(seed))?;
            write_grid(&copied, &meta.spec, meta.layout_seed, &out)?;
            println!("copy written to {}", out.display());
        }
        Command::Batch { mode, attack, ka, spec, auth, occlude, trials, seed, threads, out } => {
            let spec = spec_by_name(&spec)?;
            let channel = match mode {
                BatchMode::Legal => {
                    let p = attack.profile.as_deref().unwrap_or("bundled:sps_default");
                    ChannelModel::Single(ChannelProfile::legal(resolve_profile(p)?))
                }
                BatchMode::Dc => AttackArgs { ns: 0, ..attack }.channel()?,
                BatchMode::Sc | BatchMode::Compositional => {
                    if attack.ns == 0 {
                        bail!("--ns must be at least 1 for a synthesized copy");
                    }
                    AttackArgs { compositional: matches!(mode, BatchMode::Compositional), ..attack }.channel()?
                }
            };
            let mut config = BatchConfig::new(spec, auth.config(ka)?, channel);
            config.occlusion = occlude.map(|(a, b)| Occlusion::top_left(a, b));
            config.threads = threads;
            let result = batch_trials(&config, trials, seed)?;
            if let Some(out) = out {
                write_trials_csv(fs::File::create(&out)?, &result)?;
            }
            for (name, value) in result.summary.fields() {
                println!("{name}={value}");
            }
        }
        Command::Estimate { samples, out, provenance, exhaustive_step } => {
            let file = fs::File::open(&samples).with_context(|| format!("opening {}", samples.display()))?;
            let set = SampleSet::from_csv(file)?;
            let search = match exhaustive_step {
                Some(step) => ShapeSearch::Exhaustive { step },
                None => ShapeSearch::default(),
            };
            let profile = estimate_profile(&set, &provenance, search)?;
            profile.save(&out)?;
            for r in &profile.rows {
                println!("x={} mu={:.4} sigma2={:.4} gamma={:.4}", r.x, r.mu, r.sigma2, r.gamma);
            }
        }
        Command::Fit { series, out, max_f } => {
            let model = PredictionModel::fit(&resolve_series(&series)?, (DEFAULT_EXTRAPOLATION.0, max_f))?;
            model.save(&out)?;
            for c in &model.constellation {
                println!(
                    "x={} a_mu={:.4} b_mu={:.5} a_sigma={:.3} b_sigma={:.4} c_sigma={:.3} gamma_bar={:.4}",
                    c.x, c.a_mu, c.b_mu, c.a_sigma, c.b_sigma, c.c_sigma, c.gamma_bar
                );
            }
        }
        Command::Predict { model, ns, ka, spec, auth, out } => {
            let spec = spec_by_name(&spec)?;
            let model = resolve_model(&model)?;
            let profile = model.predict_profile(ns)?;
            let eval = evaluate_code(&model, &spec, &auth.config(ka)?, ns)?;
            for r in &profile.rows {
                println!("x={} mu={:.4} sigma2={:.4} gamma={:.4}", r.x, r.mu, r.sigma2, r.gamma);
            }
            println!("eps_a2={} eps_a1={} p_eps_a1_zero={}", eval.eps_a2, eval.eps_a1, eval.p_eps_a1_zero);
            if let Some(out) = out {
                profile.save(&out)?;
            }
        }
        Command::Optimize { model, before, after, target, framing, spec, auth, out } => {
            let spec = spec_by_name(&spec)?;
            let model = resolve_model(&model)?;
            let before = auth.config(before)?;
            let after = after.map(|k| auth.config(k)).transpose()?;
            let target = match target {
                Some(t) => t,
                None => break_even(&model, &spec, auth.delta, &before, framing)?
                    .map(f64::from)
                    .ok_or_else(|| anyhow!("current code has no break-even in range; pass --target"))?,
            };
            let presets = AuthConfig::presets(auth.strategy.into());
            let result = optimize(&model, &spec, auth.delta, &before, after.as_ref(), target, &presets, framing)?;
            print!("{}", result.report_table());
            if let Some(out) = out {
                fs::write(&out, serde_json::to_string_pretty(&result)? + "\n")?;
            }
        }
        Command::Experiment { plan, out, trials, seed, threads } => {
            let mut plan = if Path::new(&plan).is_file() {
                ExperimentPlan::load(Path::new(&plan))?
            } else {
                ExperimentPlan::bundled(&plan)?
            };
            if let Some(t) = trials {
                plan.trials = t;
            }
            if let Some(s) = seed {
                plan.seed = s;
            }
            let outcome = run_plan(&plan, &out, threads)?;
            print!("{}", outcome.notes);
            println!("{}", outcome.summary.header.join(","));
            for row in &outcome.summary.rows {
                println!("{}", row.join(","));
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
