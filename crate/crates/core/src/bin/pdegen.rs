use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pdegen::dataio::{self, Precision};
use pdegen::inverse::{InitialGuess, InverseConfig, Optimizer};
use pdegen::metrics::{Band, FrequencyBands};
use pdegen::pipeline::{self, GenerateConfig, ParamValue, OUT_DIR_ENV};
use pdegen::{Error, Result};

#[derive(Parser)]
#[command(name = "pdegen", version, about = "Seeded PDE benchmark datasets, metrics and inverse estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a batch of samples and write one HDF5 file per parameter combination.
    Generate(GenerateArgs),
    /// Compare a prediction file with a ground-truth file.
    Evaluate(EvaluateArgs),
    /// Estimate initial conditions from the snapshot at the horizon.
    Inverse(InverseArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// YAML config; flags below override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    pde: Option<String>,
    /// `key=value` or `key=v1,v2,...` to sweep; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[arg(long)]
    ns: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_parser = ["f32", "f64"])]
    precision: Option<String>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// Report path stem; `.json` and `.txt` are written.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Forward bands as `lo-hi,lo-hi,lo-` (default `0-4,5-12,13-`).
    #[arg(long)]
    bands: Option<String>,
}

#[derive(Args)]
struct InverseArgs {
    #[arg(long)]
    truth: PathBuf,
    /// YAML inverse config; flags below override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long = "lr")]
    learning_rate: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    fd_epsilon: Option<f64>,
    /// Number of test samples.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_parser = ["adam", "sgd"])]
    optimizer: Option<String>,
    #[arg(long, value_parser = ["zeros", "observation"])]
    init: Option<String>,
    /// Report path stem; estimates go to `<stem>.h5`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

fn parse_band(s: &str) -> Result<Band> {
    let bad = || Error::Config(format!("band {s:?} is not lo-hi or lo-"));
    let (lo, hi) = s.split_once('-').ok_or_else(bad)?;
    let kmin = lo.trim().parse().map_err(|_| bad())?;
    let kmax = match hi.trim() {
        "" => None,
        h => Some(h.parse().map_err(|_| bad())?),
    };
    Ok(Band { kmin, kmax })
}

fn parse_bands(s: &str) -> Result<FrequencyBands> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!("expected three bands, got {s:?}")));
    }
    Ok(FrequencyBands {
        low: parse_band(parts[0])?,
        mid: parse_band(parts[1])?,
        high: parse_band(parts[2])?,
    })
}

fn generate(args: GenerateArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => GenerateConfig::from_yaml_file(p)?,
        None => GenerateConfig::default(),
    };
    if let Some(p) = args.pde {
        cfg.pde = p;
    }
    for kv in &args.params {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--param expects key=value, got {kv:?}")))?;
        cfg.params.insert(k.trim().to_string(), ParamValue::parse(v));
    }
    cfg.ns = args.ns.or(cfg.ns);
    cfg.nt = args.nt.or(cfg.nt);
    cfg.t_end = args.t_end.or(cfg.t_end);
    cfg.samples = args.samples.unwrap_or(cfg.samples);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.out = args.out.or(cfg.out);
    cfg.workers = args.workers.or(cfg.workers);
    if let Some(p) = args.precision {
        cfg.precision = Precision::parse(&p)?;
    }
    let summary = pipeline::generate(&cfg)?;
    for r in &summary.rejections {
        eprintln!("rejected sample {} (stream {}): {}", r.sample, r.stream_id, r.reason);
    }
    for f in &summary.files {
        println!("{}", f.display());
    }
    Ok(())
}

fn report_stem(out: Option<PathBuf>, default_name: &str) -> PathBuf {
    out.unwrap_or_else(|| pipeline::output_dir(None).join(default_name))
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let bands = match &args.bands {
        Some(s) => parse_bands(s)?,
        None => FrequencyBands::default(),
    };
    let report = pipeline::evaluate(&args.truth, &args.pred, &bands)?;
    let (json, _) = dataio::emit_report(&report, &report_stem(args.out, "report"))?;
    print!("{}", report.to_table());
    eprintln!("report written to {}", json.display());
    Ok(())
}

fn inverse(args: InverseArgs) -> Result<()> {
    let mut cfg: InverseConfig = match &args.config {
        Some(p) => serde_yaml::from_str(&std::fs::read_to_string(p)?)?,
        None => InverseConfig::default(),
    };
    cfg.horizon = args.horizon.unwrap_or(cfg.horizon);
    cfg.learning_rate = args.learning_rate.unwrap_or(cfg.learning_rate);
    cfg.n_iterations = args.iterations.unwrap_or(cfg.n_iterations);
    cfg.fd_epsilon = args.fd_epsilon.unwrap_or(cfg.fd_epsilon);
    cfg.n_test_samples = args.samples.unwrap_or(cfg.n_test_samples);
    match args.optimizer.as_deref() {
        Some("sgd") => cfg.optimizer = Optimizer::Sgd,
        Some("adam") => cfg.optimizer = Optimizer::Adam,
        _ => {}
    }
    match args.init.as_deref() {
        Some("zeros") => cfg.initial_guess = InitialGuess::Zeros,
        Some("observation") => cfg.initial_guess = InitialGuess::Observation,
        _ => {}
    }
    let outcome = pipeline::run_inverse(&args.truth, &cfg, args.workers)?;
    let stem = report_stem(args.out, "inverse");
    let (json, _) = dataio::emit_report(&outcome.report, &stem)?;
    let truth_meta = dataio::read_dataset(&args.truth)?.meta;
    let h5 = pipeline::write_estimates(&stem.with_extension("h5"), &truth_meta, &outcome)?;
    print!("{}", outcome.report.to_table());
    eprintln!("report written to {}, estimates to {}", json.display(), h5.display());
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        3
    } else if matches!(e, Error::Io(_) | Error::Hdf5(_)) {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Inverse(a) => inverse(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

