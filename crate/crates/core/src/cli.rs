//! Command-line pipeline: data generation, training, evaluation,
//! explanation, fault benchmark, monitoring and reporting.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{attribution_correlations, fit_scaling, ft_monitor, hook_excess, HookSignatureSet, MonitorRow, MonitorSetup};
use crate::config::{hex, ExplainMethod, RunConfig};
use crate::dataset::{generate, Dataset, GenerationSpec};
use crate::decoder::Decoder;
use crate::dep::{dep_report, DepReport};
use crate::eval::{infidelity_curve, InfidelityCurve, LogicalRate};
use crate::neural::{NeuralDecoder, NeuralKind};
use crate::nn::{Checkpoint, Trainer};
use crate::noise::{NoiseModel, ShotStreams};
use crate::seqlut::SeqLut;
use crate::sim::Simulator;
use crate::steane::{Basis, CodeDefinition, StabilizerKind};
use crate::xai::{exact_shapley, feature_exclusion_game, lrp, write_records, AttributionRecord, BackgroundSet, DeepShap};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("missing artifact {0}")]
    Missing(PathBuf),
    #[error("config hash mismatch for {0}; regenerate it with the current config")]
    HashMismatch(PathBuf),
    #[error("check failed: {0}")]
    Check(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Runtime(_) => 1,
            CliError::Missing(_) | CliError::HashMismatch(_) => 2,
            CliError::Check(_) => 3,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "steane-xai", version, about = "Flag-qubit Steane-code memory experiments, decoders and attributions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample train, validation and test datasets.
    GenData(Common),
    /// Train the configured neural decoder, one checkpoint per epoch.
    Train(Common),
    /// Logical error rates with Wilson intervals over the noise sweep.
    Eval(Common),
    /// Attribute decoder outputs on test samples to input bits.
    Explain(Common),
    /// Single-fault benchmark; exits with 3 if any fault is miscorrected.
    Dep(Common),
    /// Per-epoch fault-tolerance tracks of a training run.
    Monitor(Common),
    /// Table comparing all evaluated decoders.
    Report(Common),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecoderChoice {
    Lut,
    SrnnX,
    SrnnZ,
    Drnn,
    Dnn2,
}

impl DecoderChoice {
    fn neural(self) -> Option<NeuralKind> {
        match self {
            DecoderChoice::Lut => None,
            DecoderChoice::SrnnX => Some(NeuralKind::SrnnX),
            DecoderChoice::SrnnZ => Some(NeuralKind::SrnnZ),
            DecoderChoice::Drnn => Some(NeuralKind::Drnn),
            DecoderChoice::Dnn2 => Some(NeuralKind::Dnn2),
        }
    }

    fn name(self) -> &'static str {
        match self {
            DecoderChoice::Lut => "lut",
            DecoderChoice::SrnnX => "srnn-x",
            DecoderChoice::SrnnZ => "srnn-z",
            DecoderChoice::Drnn => "drnn",
            DecoderChoice::Dnn2 => "dnn2",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Decoder to use; neural choices also select the trained network.
    #[arg(long, value_enum)]
    pub decoder: Option<DecoderChoice>,
    #[arg(long)]
    pub shots: Option<u64>,
    /// Comma-separated physical error rates.
    #[arg(long, value_delimiter = ',')]
    pub pph: Option<Vec<f64>>,
    #[arg(long)]
    pub rounds: Option<usize>,
}

/// Loads the config and applies command-line overrides. `--shots`,
/// `--pph` and `--rounds` act on evaluation; `--decoder` with a neural
/// choice sets the network.
pub fn resolve(common: &Common) -> Result<(RunConfig, DecoderChoice), CliError> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p).map_err(|e| CliError::Config(e.to_string()))?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.out_dir = o.clone();
    }
    if let Some(s) = common.shots {
        cfg.eval.shots = s;
    }
    if let Some(p) = &common.pph {
        cfg.eval.p_sweep = p.clone();
    }
    if let Some(r) = common.rounds {
        cfg.eval.rounds = r;
    }
    let decoder = common.decoder.unwrap_or(match cfg.network {
        NeuralKind::SrnnX => DecoderChoice::SrnnX,
        NeuralKind::SrnnZ => DecoderChoice::SrnnZ,
        NeuralKind::Drnn => DecoderChoice::Drnn,
        NeuralKind::Dnn2 => DecoderChoice::Dnn2,
    });
    if let Some(kind) = decoder.neural() {
        cfg.network = kind;
    }
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok((cfg, decoder))
}

type Handler = fn(&RunConfig, DecoderChoice) -> Result<String, CliError>;

pub fn run(cli: Cli) -> Result<String, CliError> {
    let (common, f): (&Common, Handler) = match &cli.command {
        Command::GenData(c) => (c, cmd_gen_data),
        Command::Train(c) => (c, cmd_train),
        Command::Eval(c) => (c, cmd_eval),
        Command::Explain(c) => (c, cmd_explain),
        Command::Dep(c) => (c, cmd_dep),
        Command::Monitor(c) => (c, cmd_monitor),
        Command::Report(c) => (c, cmd_report),
    };
    let (cfg, decoder) = resolve(common)?;
    f(&cfg, decoder)
}

const SPLITS: [&str; 3] = ["train", "validation", "test"];

fn simulator() -> Simulator {
    Simulator::new(CodeDefinition::steane())
}

fn dataset_path(cfg: &RunConfig, split: &str) -> PathBuf {
    cfg.out_dir.join("data").join(format!("{}-{split}.sxds", cfg.network_name()))
}

fn checkpoint_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out_dir.join("checkpoints").join(cfg.network_name())
}

impl RunConfig {
    fn network_name(&self) -> &'static str {
        match self.network {
            NeuralKind::SrnnX => "srnn-x",
            NeuralKind::SrnnZ => "srnn-z",
            NeuralKind::Drnn => "drnn",
            NeuralKind::Dnn2 => "dnn2",
        }
    }
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(runtime)?;
    }
    fs::write(path, bytes).map_err(runtime)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    write(path, serde_json::to_vec_pretty(value).map_err(runtime)?)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let bytes = fs::read(path).map_err(|_| CliError::Missing(path.into()))?;
    serde_json::from_slice(&bytes).map_err(runtime)
}

fn load_dataset(cfg: &RunConfig, split: &str) -> Result<Dataset, CliError> {
    let path = dataset_path(cfg, split);
    if !path.exists() {
        return Err(CliError::Missing(path));
    }
    let d = Dataset::load(&path).map_err(runtime)?;
    if d.header.config_hash != cfg.data_hash() {
        return Err(CliError::HashMismatch(path));
    }
    Ok(d)
}

pub fn cmd_gen_data(cfg: &RunConfig, _: DecoderChoice) -> Result<String, CliError> {
    let sim = simulator();
    let (min_rounds, max_rounds) = cfg.rounds();
    let shots = [cfg.data.train_shots, cfg.data.validation_shots, cfg.data.test_shots];
    let mut lines = Vec::new();
    for (i, split) in SPLITS.iter().enumerate() {
        let spec = GenerationSpec {
            p_ph: cfg.data.p_ph,
            min_rounds,
            max_rounds,
            basis: cfg.basis_mix(),
            shots: shots[i],
            seed: ShotStreams::new(cfg.seed).derive(i as u64).seed(),
        };
        let d = generate(&sim, &spec, cfg.data_hash()).map_err(runtime)?;
        let path = dataset_path(cfg, split);
        write(&path, d.to_bytes())?;
        let flips = d.samples.iter().filter(|s| s.label()).count();
        lines.push(format!("{split}: {} samples, {flips} logical flips -> {}", d.samples.len(), path.display()));
    }
    Ok(lines.join("\n"))
}

fn checkpoint_path(cfg: &RunConfig, epoch: u64) -> PathBuf {
    checkpoint_dir(cfg).join(format!("epoch-{epoch:04}.ckpt"))
}

pub fn cmd_train(cfg: &RunConfig, _: DecoderChoice) -> Result<String, CliError> {
    let train = load_dataset(cfg, "train")?;
    let validation = load_dataset(cfg, "validation")?;
    let kind = cfg.network;
    let mut trainer = Trainer::new(kind.default_spec(), &cfg.train_config(), cfg.train_hash()).map_err(runtime)?;
    let proto = NeuralDecoder::new(kind, trainer.network.clone()).map_err(runtime)?;
    let train_set: Vec<_> = train.samples.iter().map(|s| proto.train_sample(s)).collect();
    let val_set: Vec<_> = validation.samples.iter().map(|s| proto.train_sample(s)).collect();
    let dir = checkpoint_dir(cfg);
    if dir.exists() {
        fs::remove_dir_all(&dir).map_err(runtime)?;
    }
    fs::create_dir_all(&dir).map_err(runtime)?;
    let sim = simulator();
    let initial = crate::nn::train::evaluate_loss(&trainer.network, &train_set).map_err(runtime)?;
    trainer.checkpoint(initial).save(&checkpoint_path(cfg, 0)).map_err(runtime)?;
    let mut log = vec!["epoch\ttrain_loss\tvalidation_loss".to_string()];
    for _ in 0..cfg.train.epochs {
        let loss = trainer.run_epoch(&train_set).map_err(runtime)?;
        let ckpt = trainer.checkpoint(loss);
        let path = checkpoint_path(cfg, ckpt.epoch);
        ckpt.save(&path).map_err(runtime)?;
        let val = crate::nn::train::evaluate_loss(&trainer.network, &val_set).map_err(runtime)?;
        log.push(format!("{}\t{loss:.6}\t{val:.6}", ckpt.epoch));
        if cfg.train.stop_at_dep_pass {
            let dec = NeuralDecoder::new(kind, trainer.network.clone()).map_err(runtime)?;
            if kind.heads().iter().all(|&b| dep_report(&dec, &sim, b, 2).failures() == 0) {
                log.push(format!("single-fault benchmark passed at epoch {}", ckpt.epoch));
                break;
            }
        }
    }
    let text = log.join("\n") + "\n";
    write(&checkpoint_dir(cfg).join("train.tsv"), &text)?;
    Ok(text)
}

fn load_checkpoints(cfg: &RunConfig) -> Result<Vec<Checkpoint>, CliError> {
    let dir = checkpoint_dir(cfg);
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|_| CliError::Missing(dir.clone()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "ckpt"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Missing(dir));
    }
    paths
        .iter()
        .map(|p| {
            let c = Checkpoint::load(p).map_err(runtime)?;
            if c.config_hash != cfg.train_hash() {
                return Err(CliError::HashMismatch(p.clone()));
            }
            Ok(c)
        })
        .collect()
}

fn neural_decoder(cfg: &RunConfig) -> Result<NeuralDecoder, CliError> {
    let last = load_checkpoints(cfg)?.pop().expect("non-empty");
    NeuralDecoder::new(cfg.network, last.network).map_err(runtime)
}

fn decoder_for(cfg: &RunConfig, choice: DecoderChoice) -> Result<Box<dyn Decoder>, CliError> {
    Ok(match choice {
        DecoderChoice::Lut => Box::new(SeqLut::new(CodeDefinition::steane())),
        _ => Box::new(neural_decoder(cfg)?),
    })
}

/// Readout bases a decoder is scored in.
fn bases(cfg: &RunConfig, choice: DecoderChoice) -> Vec<Basis> {
    match choice.neural() {
        Some(kind) => {
            let heads = kind.heads();
            if heads.contains(&cfg.eval.basis) {
                vec![cfg.eval.basis]
            } else {
                heads
            }
        }
        None => vec![cfg.eval.basis],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub p_ph: f64,
    pub rate: Option<LogicalRate>,
    pub curve: InfidelityCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub decoder: String,
    pub basis: Basis,
    pub config_hash: String,
    pub rows: Vec<EvalRow>,
    pub exponent: Option<f64>,
    pub prefactor: Option<f64>,
}

pub fn cmd_eval(cfg: &RunConfig, choice: DecoderChoice) -> Result<String, CliError> {
    let decoder = decoder_for(cfg, choice)?;
    let sim = simulator();
    let basis = bases(cfg, choice)[0];
    let rounds = cfg.network.fixed_rounds().filter(|_| choice != DecoderChoice::Lut).unwrap_or(cfg.eval.rounds);
    let streams = ShotStreams::new(cfg.seed).derive(100);
    let mut rows = Vec::new();
    for (i, &p) in cfg.eval.p_sweep.iter().enumerate() {
        let noise = NoiseModel::new(p).map_err(|e| CliError::Config(e.to_string()))?;
        let first = if choice == DecoderChoice::Lut { 1 } else { cfg.network.fixed_rounds().unwrap_or(1) };
        let curve = infidelity_curve(decoder.as_ref(), &sim, noise, basis, first, rounds, cfg.eval.shots, streams.derive(i as u64));
        rows.push(EvalRow { p_ph: p, rate: curve.logical_rate(), curve });
    }
    let positive: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.rate.filter(|x| x.p_l > 0.0).map(|x| (r.p_ph, x.p_l))).collect();
    let fit = if positive.len() >= 2 { fit_scaling(&positive).ok() } else { None };
    let report = EvalReport {
        decoder: choice.name().into(),
        basis,
        config_hash: hex(&cfg.train_hash()),
        rows,
        exponent: fit.as_ref().map(|f| f.b()),
        prefactor: fit.as_ref().map(|f| f.a()),
    };
    let text = eval_table(&report);
    write(&cfg.out_dir.join("eval").join(format!("{}.tsv", choice.name())), &text)?;
    write_json(&cfg.out_dir.join("eval").join(format!("{}.json", choice.name())), &report)?;
    Ok(text)
}

fn eval_table(r: &EvalReport) -> String {
    let mut s = format!("# decoder {} basis {} exponent {}\np_ph\tp_L\tp_L_err\tt0\tt\tfailures\tshots\tinfidelity\tsigma\n", r.decoder, r.basis, fmt_opt(r.exponent));
    for row in &r.rows {
        let (p_l, err, t0) = rate_cells(row.rate);
        for p in &row.curve.points {
            s += &format!(
                "{:e}\t{p_l}\t{err}\t{t0}\t{}\t{}\t{}\t{:.6e}\t{:.2e}\n",
                row.p_ph, p.t, p.failures, p.shots, p.interval.p_hat, p.interval.sigma
            );
        }
    }
    s
}

fn rate_cells(rate: Option<LogicalRate>) -> (String, String, String) {
    match rate {
        Some(r) => (format!("{:.6e}", r.p_l), format!("{:.2e}", r.std_err), format!("{:.3}", r.t0)),
        None => ("-".into(), "-".into(), "-".into()),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |b| format!("{b:.3}"))
}

fn background(cfg: &RunConfig, decoder: &NeuralDecoder, size: usize, salt: u64) -> Result<BackgroundSet, CliError> {
    let train = load_dataset(cfg, "train")?;
    let mut rng = ChaCha8Rng::seed_from_u64(ShotStreams::new(cfg.seed).derive(salt).seed());
    let n = train.samples.len();
    if n == 0 {
        return Err(CliError::Check("empty training set".into()));
    }
    let mut idx = sample(&mut rng, n, size.min(n)).into_vec();
    idx.sort_unstable();
    BackgroundSet::new(idx.iter().map(|&i| decoder.input(&train.samples[i].volume)).collect()).map_err(runtime)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ExplainSummary {
    method: ExplainMethod,
    samples: usize,
    lag: isize,
    hook_mean: f64,
    baseline_mean: f64,
    channels: Vec<String>,
    matrix: Vec<Vec<f64>>,
    config_hash: String,
}

pub fn cmd_explain(cfg: &RunConfig, choice: DecoderChoice) -> Result<String, CliError> {
    if choice == DecoderChoice::Lut {
        return Err(CliError::Config("explanations need a neural decoder".into()));
    }
    let decoder = neural_decoder(cfg)?;
    let basis = bases(cfg, choice)[0];
    let head = decoder.head(basis).expect("basis chosen from heads");
    let test = load_dataset(cfg, "test")?;
    let chosen: Vec<(u64, &crate::sim::MemorySample)> =
        test.samples.iter().enumerate().filter(|(_, s)| s.basis == basis).take(cfg.explain.samples).map(|(i, s)| (i as u64, s)).collect();
    let bg = background(cfg, &decoder, cfg.explain.background, 200)?;
    let net = &decoder.network;
    let records: Vec<AttributionRecord> = match cfg.explain.method {
        ExplainMethod::Deepshap => {
            let mut by_len: std::collections::BTreeMap<usize, Vec<(u64, &crate::sim::MemorySample)>> = Default::default();
            for c in &chosen {
                by_len.entry(c.1.volume.num_rounds()).or_default().push(*c);
            }
            let mut out = Vec::new();
            for (t, items) in by_len {
                let ex = DeepShap::new(net, head, &bg, t).map_err(runtime)?;
                let part: Result<Vec<_>, _> = items
                    .par_iter()
                    .map(|(id, s)| {
                        let x = decoder.input(&s.volume);
                        ex.explain(&x).map(|a| AttributionRecord { id: *id, rounds: t, basis, base: a.base, output: a.output, phi: a.phi, input: x })
                    })
                    .collect();
                out.extend(part.map_err(runtime)?);
            }
            out.sort_by_key(|r| r.id);
            out
        }
        ExplainMethod::Exact => chosen
            .par_iter()
            .map(|(id, s)| {
                let x = decoder.input(&s.volume);
                let means = bg.means(x.len());
                let model = |v: &[Vec<f64>]| net.predict(v).map(|o| o[head]).unwrap_or(f64::NAN);
                let game = feature_exclusion_game(model, &x, &means).map_err(runtime)?;
                let phi = exact_shapley(&game);
                let w = x[0].len();
                Ok(AttributionRecord {
                    id: *id,
                    rounds: x.len(),
                    basis,
                    base: game.value(0),
                    output: game.value((1u32 << game.players()) - 1),
                    phi: phi.chunks(w).map(|c| c.to_vec()).collect(),
                    input: x,
                })
            })
            .collect::<Result<_, CliError>>()?,
        ExplainMethod::Lrp => chosen
            .par_iter()
            .map(|(id, s)| {
                let x = decoder.input(&s.volume);
                let a = lrp(net, head, &x, cfg.explain.lrp_rule, cfg.explain.lrp_input_rule).map_err(runtime)?;
                Ok(AttributionRecord { id: *id, rounds: x.len(), basis, base: a.base, output: a.output, phi: a.phi, input: x })
            })
            .collect::<Result<_, CliError>>()?,
    };
    let dir = cfg.out_dir.join("explain");
    let stem = format!("{}-{:?}", choice.name(), cfg.explain.method).to_lowercase();
    let path = dir.join(format!("{stem}.jsonl"));
    fs::create_dir_all(&dir).map_err(runtime)?;
    write_records(&records, BufWriter::new(fs::File::create(&path).map_err(runtime)?)).map_err(runtime)?;

    let set = HookSignatureSet::for_plaquettes(&simulator(), match basis {
        Basis::Z => StabilizerKind::X,
        Basis::X => StabilizerKind::Z,
    });
    let lag = set.hook.first().map_or(0, |p| p.lag);
    let grids: Vec<_> = records.iter().map(|r| r.phi.clone()).collect();
    let report = attribution_correlations(&grids, lag).map_err(|e| CliError::Check(e.to_string()))?;
    let (hook_mean, baseline_mean) = hook_excess(&report, &set, &decoder.channels).map_err(runtime)?;
    let summary = ExplainSummary {
        method: cfg.explain.method,
        samples: records.len(),
        lag,
        hook_mean,
        baseline_mean,
        channels: decoder.channels.iter().map(|c| c.to_string()).collect(),
        matrix: report.matrix,
        config_hash: hex(&cfg.train_hash()),
    };
    write_json(&dir.join(format!("{stem}-correlation.json")), &summary)?;
    Ok(format!("{} attributions -> {}\nhook mean {hook_mean:.4}, baseline mean {baseline_mean:.4} (lag {lag})", records.len(), path.display()))
}

pub fn cmd_dep(cfg: &RunConfig, choice: DecoderChoice) -> Result<String, CliError> {
    let decoder = decoder_for(cfg, choice)?;
    let sim = simulator();
    let bs = match choice {
        DecoderChoice::Lut => vec![Basis::Z, Basis::X],
        _ => cfg.network.heads(),
    };
    let reports: Vec<DepReport> = bs.iter().map(|&b| dep_report(decoder.as_ref(), &sim, b, 2)).collect();
    write_json(&cfg.out_dir.join("dep").join(format!("{}.json", choice.name())), &reports)?;
    let lines: Vec<String> =
        reports.iter().map(|r| format!("{} basis: {}/{} single faults miscorrected ({:.5})", r.basis, r.failures(), r.injections, r.fraction())).collect();
    let text = lines.join("\n");
    if reports.iter().any(|r| r.failures() > 0) {
        return Err(CliError::Check(text));
    }
    Ok(text)
}

pub fn cmd_monitor(cfg: &RunConfig, choice: DecoderChoice) -> Result<String, CliError> {
    if choice == DecoderChoice::Lut {
        return Err(CliError::Config("monitoring needs a neural decoder".into()));
    }
    let checkpoints = load_checkpoints(cfg)?;
    let proto = NeuralDecoder::new(cfg.network, checkpoints[0].network.clone()).map_err(runtime)?;
    let validation = load_dataset(cfg, "validation")?;
    let basis = cfg.network.heads()[0];
    let explained = validation.samples.iter().filter(|s| s.basis == basis).take(cfg.monitor.explained).map(|s| proto.input(&s.volume)).collect();
    let setup = MonitorSetup {
        kind: cfg.network,
        p_sweep: cfg.monitor.p_sweep.clone(),
        rounds: cfg.network.fixed_rounds().unwrap_or(cfg.monitor.rounds),
        shots: cfg.monitor.shots,
        seed: ShotStreams::new(cfg.seed).derive(300).seed(),
        explained,
        background: background(cfg, &proto, cfg.monitor.background, 301)?,
    };
    let rows: Vec<MonitorRow> = ft_monitor(&simulator(), &setup, &checkpoints).map_err(runtime)?;
    let mut text = String::from(MonitorRow::HEADER) + "\n";
    for r in &rows {
        text += &r.to_tsv();
        text.push('\n');
    }
    let dir = cfg.out_dir.join("monitor");
    write(&dir.join(format!("{}.tsv", cfg.network_name())), &text)?;
    write_json(&dir.join(format!("{}.json", cfg.network_name())), &rows)?;
    Ok(text)
}

pub fn cmd_report(cfg: &RunConfig, _: DecoderChoice) -> Result<String, CliError> {
    let dir = cfg.out_dir.join("eval");
    let mut reports = Vec::new();
    for choice in [DecoderChoice::Lut, DecoderChoice::SrnnX, DecoderChoice::SrnnZ, DecoderChoice::Drnn, DecoderChoice::Dnn2] {
        let path = dir.join(format!("{}.json", choice.name()));
        if path.exists() {
            reports.push(read_json::<EvalReport>(&path)?);
        }
    }
    if reports.is_empty() {
        return Err(CliError::Missing(dir));
    }
    let mut text = String::from("decoder\tbasis\tp_ph\tp_L\tp_L_err\texponent\n");
    for r in &reports {
        for row in &r.rows {
            let (p_l, err, _) = rate_cells(row.rate);
            text += &format!("{}\t{}\t{:e}\t{p_l}\t{err}\t{}\n", r.decoder, r.basis, row.p_ph, fmt_opt(r.exponent));
        }
    }
    write(&cfg.out_dir.join("report.tsv"), &text)?;
    write_json(&cfg.out_dir.join("report.json"), &reports)?;
    Ok(text)
}
