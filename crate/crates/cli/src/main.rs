use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use lindblad_jc_cli::config::{ConfigFile, Method, OutputFormat, Overrides, RunConfig, SplitStep};
use lindblad_jc_cli::{emit_plotscript, run, study, CliError, CliResult};

const THREADS_VAR: &str = "LINDBLAD_JC_THREADS";

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Study {
    Convergence,
}

/// Damped Jaynes–Cummings master equation on a truncated Fock space.
#[derive(Debug, Parser)]
#[command(name = "lindblad-jc", version)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (.csv or .json).
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
    /// Comma-separated methods: oracle-expm, oracle-rk4, split2, split3,
    /// diagonal-only, closed-form-example.
    #[arg(long = "method", value_parser = parse_methods)]
    methods: Option<Methods>,
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Fock cutoff.
    #[arg(long)]
    dim: Option<usize>,
    /// Coherent amplitude, `re` or `re,im`.
    #[arg(long, value_parser = parse_alpha, allow_hyphen_values = true)]
    alpha: Option<[f64; 2]>,
    #[arg(long)]
    omega0: Option<f64>,
    /// Atom-field coupling.
    #[arg(long = "Omega")]
    coupling: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    /// vacuum-excited, coherent-diagonal or custom-file.
    #[arg(long)]
    initial: Option<String>,
    /// State file for `--initial custom-file`.
    #[arg(long)]
    initial_file: Option<PathBuf>,
    #[arg(long)]
    rk4_dt: Option<f64>,
    /// Split step: a number, `auto` or `one-shot`.
    #[arg(long, value_parser = parse_split_step)]
    split_step: Option<SplitStep>,
    #[arg(long, value_enum)]
    study: Option<Study>,
    /// Comma-separated geometric step sizes for `--study convergence`.
    #[arg(long)]
    h_list: Option<String>,
    /// Write a gnuplot script for the CSV output to this path.
    #[arg(long)]
    plot_script: Option<PathBuf>,
}

#[derive(Clone, Debug)]
struct Methods(Vec<Method>);

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    OutputFormat::parse(s).ok_or_else(|| format!("unknown format \"{s}\" (expected csv or json)"))
}

fn parse_methods(s: &str) -> Result<Methods, String> {
    s.split(',')
        .map(|m| Method::parse(m.trim()).ok_or_else(|| format!("unknown method \"{}\"", m.trim())))
        .collect::<Result<Vec<_>, _>>()
        .map(Methods)
}

fn parse_alpha(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |x: &str| x.parse::<f64>().map_err(|e| format!("bad amplitude \"{x}\": {e}"));
    match parts.as_slice() {
        [re] => Ok([num(re)?, 0.0]),
        [re, im] => Ok([num(re)?, num(im)?]),
        _ => Err("expected `re` or `re,im`".into()),
    }
}

fn parse_split_step(s: &str) -> Result<SplitStep, String> {
    SplitStep::parse(s).ok_or_else(|| format!("bad split step \"{s}\""))
}

fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{THREADS_VAR}: expected a non-negative integer, got \"{v}\"")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("{THREADS_VAR}: {e}")))
}

fn execute(args: Args) -> CliResult<()> {
    init_threads()?;
    let file = match &args.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let over = Overrides {
        output: args.out,
        format: args.format,
        methods: args.methods.map(|m| m.0),
        t_max: args.tmax,
        n_points: args.points,
        dim: args.dim,
        alpha: args.alpha,
        omega0: args.omega0,
        coupling: args.coupling,
        mu: args.mu,
        nu: args.nu,
        initial_kind: args.initial,
        initial_file: args.initial_file,
        rk4_dt: args.rk4_dt,
        split_step: args.split_step,
    };
    let cfg = RunConfig::resolve(file, over)?;

    if let Some(Study::Convergence) = args.study {
        let h_list = args
            .h_list
            .as_deref()
            .ok_or_else(|| CliError::Config("field `h_list`: --study convergence needs --h-list".into()))?;
        let table = study::convergence_study(&cfg, &study::parse_h_list(h_list)?)?;
        study::write_study(&cfg, &table)?;
        println!("{table}");
        return Ok(());
    }
    if args.h_list.is_some() {
        return Err(CliError::Config(
            "field `h_list`: only valid with --study convergence".into(),
        ));
    }

    let out = run(&cfg)?;
    log::info!("wrote {} rows to {}", out.rows.len(), cfg.output.display());
    if let Some(script) = args.plot_script {
        if cfg.format != OutputFormat::Csv {
            return Err(CliError::Config("field `plot_script`: needs csv output".into()));
        }
        emit_plotscript(&cfg.output, &script)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lindblad-jc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
