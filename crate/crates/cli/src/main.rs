use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use underlay_mimo::experiment::{self, ExperimentId, ExperimentSpec};
use underlay_mimo::montecarlo::SweepAxis;
use underlay_mimo::{wishart, Error, NetworkConfig, Policy, Scheme};

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "underlay",
    version,
    about = "Run beamforming and power-allocation experiments"
)]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert an experiment CSV into one .dat file per (scheme, policy).
    PlotData { csv: PathBuf },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Network config file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Experiment id.
    #[arg(long, default_value = "single_solve")]
    experiment: String,
    /// Override one config value; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Sweep axis as `key=v1,v2,...` or `key=lo:hi:step`.
    #[arg(long)]
    sweep: Option<String>,
    /// Comma-separated antenna counts.
    #[arg(long = "m-b", value_delimiter = ',')]
    m_b: Vec<usize>,
    /// Comma-separated schemes (MEB, ZFB).
    #[arg(long, value_delimiter = ',')]
    scheme: Vec<String>,
    /// Comma-separated policies (LF, EQUAL_POWER_OPT, EQUAL_POWER:<linear>).
    #[arg(long, value_delimiter = ',')]
    policy: Vec<String>,
    /// Use the 512/1024-antenna blocks.
    #[arg(long)]
    large: bool,
    /// Confidence of the max-SU search.
    #[arg(long)]
    confidence: Option<f64>,
    /// Write sorted raw samples of distribution checks.
    #[arg(long)]
    dump_samples: bool,
    /// Largest-eigenvalue cache file; read if present, written afterwards.
    #[arg(long)]
    wishart_cache: Option<PathBuf>,
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

fn parse_values(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("bad sweep value `{s}`"));
    if parts.len() == 3 {
        let (lo, hi, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if step.is_nan() || step <= 0.0 || hi < lo {
            return Err(format!("bad sweep range `{text}`"));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| lo + step * i as f64).collect());
    }
    text.split(',').map(num).collect()
}

fn build_spec(args: &RunArgs, base: Option<NetworkConfig>) -> Result<ExperimentSpec, String> {
    let id = ExperimentId::parse(&args.experiment).ok_or_else(|| {
        let known: Vec<&str> = ExperimentId::ALL.iter().map(|i| i.as_str()).collect();
        format!("unknown experiment `{}` (known: {})", args.experiment, known.join(", "))
    })?;
    let mut spec = ExperimentSpec::preset(id, args.large);
    if let Some(base) = base {
        spec.base = base;
    }
    let mut m_b_set = false;
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| format!("expected KEY=VALUE, got `{kv}`"))?;
        spec.base.set(k.trim(), v).map_err(|e| e.to_string())?;
        m_b_set |= k.trim() == "m_b";
    }
    spec.base.validate().map_err(|e| e.to_string())?;
    if !args.m_b.is_empty() {
        spec.m_b_values = args.m_b.clone();
    } else if m_b_set || args.config.is_some() || id == ExperimentId::SingleSolve {
        spec.m_b_values = vec![spec.base.m_b];
    }
    if let Some(s) = &args.sweep {
        let (key, values) = s
            .split_once('=')
            .ok_or_else(|| format!("expected KEY=VALUES, got `{s}`"))?;
        spec.sweep = Some(SweepAxis::new(key.trim(), parse_values(values)?));
    }
    if !args.scheme.is_empty() {
        spec.schemes = args
            .scheme
            .iter()
            .map(|s| Scheme::parse(s).ok_or_else(|| format!("unknown scheme `{s}`")))
            .collect::<Result<_, _>>()?;
    }
    if !args.policy.is_empty() {
        spec.policies = args
            .policy
            .iter()
            .map(|s| Policy::parse(s).ok_or_else(|| format!("unknown policy `{s}`")))
            .collect::<Result<_, _>>()?;
    }
    if let Some(n) = args.trials {
        spec.n_trials = n;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Some(c) = args.confidence {
        spec.confidence = c;
    }
    spec.dump_samples = args.dump_samples;
    spec.out_dir = args.out.clone();
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn run(args: &RunArgs) -> ExitCode {
    let base = match &args.config {
        Some(path) => match NetworkConfig::read_file(path) {
            Ok(c) => Some(c),
            Err(e) => return fail(exit_code(&e), format!("{}: {e}", path.display())),
        },
        None => None,
    };
    let spec = match build_spec(args, base) {
        Ok(s) => s,
        Err(msg) => return fail(EXIT_CONFIG, msg),
    };
    if let Some(path) = args.wishart_cache.as_ref().filter(|p| p.exists()) {
        if let Err(e) = wishart::load_cache(path) {
            return fail(exit_code(&e), format!("{}: {e}", path.display()));
        }
    }
    let mut stdout = std::io::stdout().lock();
    let report = match experiment::run(&spec, &mut stdout) {
        Ok(r) => r,
        Err(e) => return fail(exit_code(&e), e),
    };
    if let Some(path) = &args.wishart_cache {
        if let Err(e) = wishart::save_cache(path) {
            return fail(EXIT_IO, format!("{}: {e}", path.display()));
        }
    }
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Some(Command::PlotData { csv }) => match experiment::emit_plot_data(csv) {
            Ok(files) => {
                for f in files {
                    println!("wrote {}", f.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(EXIT_IO, format!("{}: {e}", csv.display())),
        },
        None => run(&cli.run),
    }
}
