//! Command-line front end.
//!
//! [`run`] parses arguments, dispatches and returns the process exit code:
//! 0 on success, 1 for invalid arguments or input files, 2 when a run fails.
//! Every output file is written to a temporary sibling and renamed into
//! place, and every run leaves a manifest JSON next to its outputs.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::data::{load_csv, synth_generate, write_csv_to, Attribute, EmbeddingDataset, SynthConfig, Task};
use crate::error::{Error, Result};
use crate::eval::{fairness_report, latent_sweep_with, probe_report, ProbeReport};
use crate::plot::{LineChart, Series};
use crate::poison_bench::{group_name, run_poison_sweep, PoisonSweepConfig};
use crate::trainer::{
    load_checkpoint, train_with, transform_dataset, AdversarialObjective, AdversaryInput, OutputSpace, TrainConfig,
    TransformMode,
};
use crate::vae::KlReduction;

#[derive(Parser, Debug)]
#[command(name = "vae-debias", version, about = "Adversarial VAE debiasing of embedding datasets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic embedding dataset with planted demographic and task signal.
    Synth(SynthArgs),
    /// Train the debiasing VAE and write a checkpoint.
    Train(TrainArgs),
    /// Apply a checkpoint to a dataset.
    Transform(TransformArgs),
    /// Run demographic and task probes on one dataset.
    Probe(ProbeArgs),
    /// Compare probes and EOD on original vs debiased embeddings.
    Fairness(FairnessArgs),
    /// Label-flipping sweep against one sex group.
    Poison(PoisonArgs),
    /// Train and evaluate at several latent sizes.
    Sweep(SweepArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Synth(_) => "synth",
            Command::Train(_) => "train",
            Command::Transform(_) => "transform",
            Command::Probe(_) => "probe",
            Command::Fairness(_) => "fairness",
            Command::Poison(_) => "poison",
            Command::Sweep(_) => "sweep",
        }
    }
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = SynthConfig::default().n_train)]
    pub n_train: usize,
    #[arg(long, default_value_t = SynthConfig::default().n_test)]
    pub n_test: usize,
    #[arg(long, default_value_t = SynthConfig::default().dimension)]
    pub dim: usize,
    #[arg(long, default_value_t = SynthConfig::default().sex_strength)]
    pub sex_strength: f64,
    #[arg(long, default_value_t = SynthConfig::default().age_strength)]
    pub age_strength: f64,
    #[arg(long, default_value_t = SynthConfig::default().task_strength)]
    pub task_strength: f64,
    /// Multiplicative drop in cancer base rate for women and for younger patients.
    #[arg(long, default_value_t = SynthConfig::default().task_group_bias)]
    pub task_group_bias: f64,
    /// Task dims that share the sex block.
    #[arg(long, default_value_t = SynthConfig::default().overlap_dims)]
    pub overlap_dims: usize,
    #[arg(long, default_value_t = SynthConfig::default().sex_signal_dims)]
    pub sex_signal_dims: usize,
    #[arg(long, default_value_t = SynthConfig::default().age_signal_dims)]
    pub age_signal_dims: usize,
    #[arg(long, default_value_t = SynthConfig::default().task_signal_dims)]
    pub task_signal_dims: usize,
    #[arg(long, default_value_t = SynthConfig::default().noise_sigma)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = SynthConfig::default().nuisance_rank)]
    pub nuisance_rank: usize,
    #[arg(long, default_value_t = SynthConfig::default().residual_sigma)]
    pub residual_sigma: f64,
    #[arg(long, default_value_t = SynthConfig::default().age_min)]
    pub age_min: f64,
    #[arg(long, default_value_t = SynthConfig::default().age_max)]
    pub age_max: f64,
    #[arg(long, default_value_t = SynthConfig::default().male_fraction)]
    pub male_fraction: f64,
    #[arg(long, default_value_t = SynthConfig::default().risk_sharpness)]
    pub risk_sharpness: f64,
    #[arg(long = "threshold-1y", default_value_t = SynthConfig::default().threshold_1y)]
    pub threshold_1y: f64,
    #[arg(long = "threshold-2y", default_value_t = SynthConfig::default().threshold_2y)]
    pub threshold_2y: f64,
    #[arg(long, default_value_t = SynthConfig::default().seed)]
    pub seed: u64,
}

impl SynthArgs {
    pub fn config(&self) -> SynthConfig {
        SynthConfig {
            n_train: self.n_train,
            n_test: self.n_test,
            dimension: self.dim,
            sex_signal_dims: self.sex_signal_dims,
            age_signal_dims: self.age_signal_dims,
            task_signal_dims: self.task_signal_dims,
            overlap_dims: self.overlap_dims,
            sex_strength: self.sex_strength,
            age_strength: self.age_strength,
            task_strength: self.task_strength,
            task_group_bias: self.task_group_bias,
            noise_sigma: self.noise_sigma,
            nuisance_rank: self.nuisance_rank,
            residual_sigma: self.residual_sigma,
            age_min: self.age_min,
            age_max: self.age_max,
            male_fraction: self.male_fraction,
            risk_sharpness: self.risk_sharpness,
            threshold_1y: self.threshold_1y,
            threshold_2y: self.threshold_2y,
            seed: self.seed,
        }
    }
}

/// Training flags shared by `train` and `sweep`.
#[derive(Args, Debug)]
pub struct HyperArgs {
    #[arg(long, default_value_t = TrainConfig::default().epochs)]
    pub epochs: usize,
    #[arg(long, default_value_t = TrainConfig::default().batch_size)]
    pub batch_size: usize,
    #[arg(long, default_value_t = TrainConfig::default().lr_vae)]
    pub lr_vae: f64,
    #[arg(long, default_value_t = TrainConfig::default().lr_adv)]
    pub lr_adv: f64,
    #[arg(long, default_value_t = TrainConfig::default().beta_kl)]
    pub beta_kl: f64,
    #[arg(long, default_value_t = TrainConfig::default().lambda_adv)]
    pub lambda_adv: f64,
    /// Adversary updates per VAE update.
    #[arg(long, default_value_t = TrainConfig::default().adv_steps)]
    pub adv_steps: usize,
    #[arg(long, default_value_t = TrainConfig::default().seed)]
    pub seed: u64,
    /// Attributes with an adversary branch.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = TrainConfig::default().attributes)]
    pub attributes: Vec<Attribute>,
    /// Hidden layer widths of each adversary branch.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = TrainConfig::default().adversary_hidden)]
    pub adversary_hidden: Vec<usize>,
    /// confusion: push the adversary toward an uninformative output. reversal: maximize its loss.
    #[arg(long, default_value_t = TrainConfig::default().objective)]
    pub objective: AdversarialObjective,
    /// Feed the adversary the encoder mean or a reparameterized sample.
    #[arg(long, default_value_t = TrainConfig::default().adversary_input)]
    pub adversary_input: AdversaryInput,
    /// How the KL term is reduced over latent dims.
    #[arg(long, default_value_t = TrainConfig::default().kl_reduction)]
    pub kl_reduction: KlReduction,
}

impl HyperArgs {
    pub fn config(&self, latent_dim: usize) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            lr_vae: self.lr_vae,
            lr_adv: self.lr_adv,
            latent_dim,
            beta_kl: self.beta_kl,
            lambda_adv: self.lambda_adv,
            adv_steps: self.adv_steps,
            seed: self.seed,
            attributes: self.attributes.clone(),
            adversary_hidden: self.adversary_hidden.clone(),
            objective: self.objective,
            adversary_input: self.adversary_input,
            kl_reduction: self.kl_reduction,
        }
    }
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out_checkpoint: PathBuf,
    #[arg(long, default_value_t = TrainConfig::default().latent_dim)]
    pub latent_dim: usize,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

#[derive(Args, Debug)]
pub struct TransformArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = OutputSpace::Reconstruction)]
    pub space: OutputSpace,
    /// Sample the latent code instead of using the encoder mean.
    #[arg(long)]
    pub stochastic: bool,
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out_report: PathBuf,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = Attribute::ALL)]
    pub attributes: Vec<Attribute>,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = Task::ALL)]
    pub tasks: Vec<Task>,
}

#[derive(Args, Debug)]
pub struct FairnessArgs {
    #[arg(long)]
    pub original: PathBuf,
    #[arg(long)]
    pub debiased: PathBuf,
    #[arg(long)]
    pub out_report: PathBuf,
}

#[derive(Args, Debug)]
pub struct PoisonArgs {
    #[arg(long)]
    pub original: PathBuf,
    #[arg(long)]
    pub debiased: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = PoisonSweepConfig::default().fractions)]
    pub fractions: Vec<f64>,
    /// Sex groups to attack (0 female, 1 male).
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = PoisonSweepConfig::default().target_groups)]
    pub target_groups: Vec<u8>,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = PoisonSweepConfig::default().tasks)]
    pub tasks: Vec<Task>,
    #[arg(long, default_value_t = PoisonSweepConfig::default().seed)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [4usize, 8, 16, 32, 64])]
    pub dims: Vec<usize>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let name = cli.command.name();
    let mut argv: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    if let Some(program) = argv.first_mut() {
        *program = env!("CARGO_PKG_NAME").to_owned();
    }
    match dispatch(cli.command, &argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", describe(&e, name));
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

/// Error text with config field names rewritten to the flag that sets them.
fn describe(e: &Error, subcommand: &str) -> String {
    match e {
        Error::Config { field, message } => {
            let long = match *field {
                "dimension" => "dim".to_owned(),
                f => f.trim_start_matches('-').replace('_', "-"),
            };
            let cmd = Cli::command();
            let known = cmd
                .find_subcommand(subcommand)
                .is_some_and(|c| c.get_arguments().any(|a| a.get_long() == Some(long.as_str())));
            if known {
                format!("invalid --{long}: {message}")
            } else {
                e.to_string()
            }
        }
        _ => e.to_string(),
    }
}

fn dispatch(command: Command, argv: &[String]) -> Result<()> {
    match command {
        Command::Synth(a) => synth(&a, argv),
        Command::Train(a) => train_cmd(&a, argv),
        Command::Transform(a) => transform(&a, argv),
        Command::Probe(a) => probe(&a, argv),
        Command::Fairness(a) => fairness(&a, argv),
        Command::Poison(a) => poison(&a, argv),
        Command::Sweep(a) => sweep(&a, argv),
    }
}

#[derive(Serialize)]
struct InputFile {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    argv: &'a [String],
    config: C,
    inputs: Vec<InputFile>,
    outputs: Vec<String>,
}

fn write_manifest<C: Serialize>(
    path: &Path,
    argv: &[String],
    config: C,
    inputs: &[&Path],
    outputs: &[&Path],
) -> Result<()> {
    let inputs = inputs
        .iter()
        .map(|p| {
            let bytes = fs::read(p).map_err(|e| Error::io(*p, e))?;
            let digest = Sha256::digest(&bytes);
            Ok(InputFile {
                path: p.display().to_string(),
                sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let m = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: argv.get(1).map(String::as_str).unwrap_or(""),
        argv,
        config,
        inputs,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    write_atomic(path, &json_bytes(&m))
}

fn manifest_beside(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.manifest.json"))
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("report serializes");
    s.push(b'\n');
    s
}

/// Writes via a temporary file in the destination directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (fs::canonicalize(a), fs::canonicalize(b)) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

fn refuse_overwrite(out: &Path, flag: &'static str, inputs: &[&Path]) -> Result<()> {
    if inputs.iter().any(|i| same_file(out, i)) {
        return Err(Error::config(flag, format!("{} is also an input file", out.display())));
    }
    Ok(())
}

fn create_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn dataset_bytes(ds: &EmbeddingDataset) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv_to(ds, &mut buf).expect("writing to memory");
    buf
}

fn synth(a: &SynthArgs, argv: &[String]) -> Result<()> {
    let cfg = a.config();
    let ds = synth_generate(&cfg)?;
    write_atomic(&a.out, &dataset_bytes(&ds))?;
    write_manifest(&manifest_beside(&a.out), argv, &cfg, &[], &[&a.out])?;
    println!("wrote {} records ({}-dim) to {}", ds.len(), ds.dimension(), a.out.display());
    Ok(())
}

fn train_cmd(a: &TrainArgs, argv: &[String]) -> Result<()> {
    refuse_overwrite(&a.out_checkpoint, "out_checkpoint", &[&a.data])?;
    let cfg = a.hyper.config(a.latent_dim);
    cfg.validate()?;
    let ds = load_csv(&a.data)?;
    let total = cfg.epochs;
    let ck = train_with(&ds, &cfg, |e| {
        if e.epoch % 10 == 0 || e.epoch == total {
            eprintln!(
                "epoch {}/{total}: recon {:.4} kl {:.4} adv {:.4} total {:.4}",
                e.epoch, e.recon, e.kl, e.adv, e.total
            );
        }
    })?;
    write_atomic(&a.out_checkpoint, ck.to_json().as_bytes())?;
    write_manifest(
        &manifest_beside(&a.out_checkpoint),
        argv,
        &cfg,
        &[&a.data],
        &[&a.out_checkpoint],
    )?;
    println!("wrote checkpoint to {}", a.out_checkpoint.display());
    Ok(())
}

fn transform(a: &TransformArgs, argv: &[String]) -> Result<()> {
    refuse_overwrite(&a.out, "out", &[&a.data, &a.checkpoint])?;
    let ck = load_checkpoint(&a.checkpoint)?;
    let ds = load_csv(&a.data)?;
    let mode = TransformMode {
        output_space: a.space,
        deterministic: !a.stochastic,
    };
    let out = transform_dataset(&ck, &ds, mode)?;
    write_atomic(&a.out, &dataset_bytes(&out))?;
    write_manifest(&manifest_beside(&a.out), argv, mode, &[&a.checkpoint, &a.data], &[&a.out])?;
    println!("wrote {} {} embeddings to {}", out.len(), a.space, a.out.display());
    Ok(())
}

fn probe(a: &ProbeArgs, argv: &[String]) -> Result<()> {
    refuse_overwrite(&a.out_report, "out_report", &[&a.data])?;
    let ds = load_csv(&a.data)?;
    let label = a.data.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let report = ProbeReport::new(probe_report(&ds, &label, &a.attributes, &a.tasks)?);
    write_atomic(&a.out_report, &json_bytes(&report))?;
    let cfg = serde_json::json!({ "attributes": a.attributes, "tasks": a.tasks });
    write_manifest(&manifest_beside(&a.out_report), argv, cfg, &[&a.data], &[&a.out_report])?;
    let r = &report.dataset;
    if let Some(s) = &r.sex {
        println!("sex AUC {:.3}", s.auc);
    }
    if let Some(g) = &r.age {
        println!("age MAE {:.3} (train-mean baseline {:.3})", g.mae, g.mean_baseline_mae);
    }
    for t in &r.tasks {
        println!("{} AUC {:.3}", t.task, t.auc);
    }
    Ok(())
}

fn fairness(a: &FairnessArgs, argv: &[String]) -> Result<()> {
    refuse_overwrite(&a.out_report, "out_report", &[&a.original, &a.debiased])?;
    let orig = load_csv(&a.original)?;
    let deb = load_csv(&a.debiased)?;
    let report = fairness_report(&orig, &deb)?;
    write_atomic(&a.out_report, &json_bytes(&report))?;
    write_manifest(
        &manifest_beside(&a.out_report),
        argv,
        &report.settings,
        &[&a.original, &a.debiased],
        &[&a.out_report],
    )?;
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "n/a".into());
    let (o, d) = (&report.original, &report.debiased);
    if let (Some(x), Some(y)) = (&o.sex, &d.sex) {
        println!("sex AUC {:.3} -> {:.3}", x.auc, y.auc);
    }
    if let (Some(x), Some(y)) = (&o.age, &d.age) {
        println!("age MAE {:.3} -> {:.3}", x.mae, y.mae);
    }
    for (x, y) in o.tasks.iter().zip(&d.tasks) {
        println!(
            "{}: AUC {:.3} -> {:.3}, EOD sex {} -> {}, EOD age {} -> {}",
            x.task,
            x.auc,
            y.auc,
            fmt(x.eod_for(Attribute::Sex)),
            fmt(y.eod_for(Attribute::Sex)),
            fmt(x.eod_for(Attribute::Age)),
            fmt(y.eod_for(Attribute::Age)),
        );
    }
    Ok(())
}

fn poison(a: &PoisonArgs, argv: &[String]) -> Result<()> {
    let cfg = PoisonSweepConfig {
        fractions: a.fractions.clone(),
        target_groups: a.target_groups.clone(),
        tasks: a.tasks.clone(),
        seed: a.seed,
    };
    cfg.validate()?;
    create_out_dir(&a.out_dir)?;
    let csv_path = a.out_dir.join("poison.csv");
    let json_path = a.out_dir.join("poison.json");
    for p in [&csv_path, &json_path] {
        refuse_overwrite(p, "out_dir", &[&a.original, &a.debiased])?;
    }
    let orig = load_csv(&a.original)?;
    let deb = load_csv(&a.debiased)?;
    let curve = run_poison_sweep(&orig, &deb, &cfg)?;

    let mut buf = Vec::new();
    curve.write_csv(&mut buf).expect("writing to memory");
    write_atomic(&csv_path, &buf)?;
    write_atomic(&json_path, &json_bytes(&curve))?;
    let mut outputs = vec![csv_path, json_path];
    for (task, group, svg) in curve.charts() {
        let p = a.out_dir.join(format!("poison_{task}_{}.svg", group_name(group)));
        write_atomic(&p, svg.as_bytes())?;
        outputs.push(p);
    }
    let out_refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    write_manifest(
        &a.out_dir.join("manifest.json"),
        argv,
        &cfg,
        &[&a.original, &a.debiased],
        &out_refs,
    )?;
    println!("wrote {} grid cells to {}", curve.rows.len(), a.out_dir.display());
    Ok(())
}

fn sweep(a: &SweepArgs, argv: &[String]) -> Result<()> {
    let cfg = a.hyper.config(a.dims.first().copied().unwrap_or(1));
    cfg.validate()?;
    create_out_dir(&a.out_dir)?;
    let csv_path = a.out_dir.join("sweep.csv");
    let json_path = a.out_dir.join("sweep.json");
    let svg_path = a.out_dir.join("sweep.svg");
    for p in [&csv_path, &json_path, &svg_path] {
        refuse_overwrite(p, "out_dir", &[&a.data])?;
    }
    let ds = load_csv(&a.data)?;
    let result = latent_sweep_with(&ds, &a.dims, &cfg, |r| {
        eprintln!(
            "latent {}: sex AUC {:.3}, age MAE {:.3}, task AUC {:.3} / {:.3}",
            r.latent_dim, r.sex_auc, r.age_mae, r.task1_auc, r.task2_auc
        );
    })?;
    let mut buf = Vec::new();
    result.write_csv(&mut buf).expect("writing to memory");
    write_atomic(&csv_path, &buf)?;
    write_atomic(&json_path, &json_bytes(&result))?;
    let line = |name: &str, f: fn(&crate::eval::SweepRow) -> f64| Series {
        name: name.into(),
        points: result.rows.iter().map(|r| (r.latent_dim as f64, Some(f(r)))).collect(),
    };
    let chart = LineChart {
        title: "Debiased probe AUC by latent size".into(),
        x_label: "latent dimension".into(),
        y_label: "test AUC".into(),
        y_range: (0.5, 1.0),
        series: vec![
            line("sex", |r| r.sex_auc),
            line("cancer_1y", |r| r.task1_auc),
            line("cancer_2y", |r| r.task2_auc),
        ],
    };
    write_atomic(&svg_path, chart.to_svg().as_bytes())?;
    let manifest_cfg = serde_json::json!({ "dims": a.dims, "train": cfg });
    write_manifest(
        &a.out_dir.join("manifest.json"),
        argv,
        manifest_cfg,
        &[&a.data],
        &[&csv_path, &json_path, &svg_path],
    )?;
    println!("wrote {} sweep rows to {}", result.rows.len(), a.out_dir.display());
    Ok(())
}
