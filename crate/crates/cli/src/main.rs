use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cloee::config::{load_scenario, ConfigError};
use cloee::optimizer::cloee;
use cloee::output::{csv_string, opt_results_csv, write_svg_charts, Axis, OutputError};
use cloee::sim::{run_curves, run_sweep, Scenario, SweepRow};
use cloee::{ModelError, PhyMode};

#[derive(Parser)]
#[command(
    name = "cloee",
    version,
    about = "IR-UWB body-area link model and energy-efficiency optimizer"
)]
struct Cli {
    /// Scenario file (TOML). Built-in defaults are used when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for `sweep` and `curves`, and for `optimize` when given.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for the shadowing draws.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    shadowing: Option<Toggle>,
    /// `svg` also writes one chart per metric next to the CSV.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize frame size and PHY mode at one distance.
    Optimize {
        #[arg(long, allow_negative_numbers = true)]
        distance: f64,
    },
    /// Compare the optimizer, the exhaustive reference and static strategies over distance.
    Sweep,
    /// Efficiency and throughput against frame size for every mode at one distance.
    Curves {
        /// Overrides `curves.distance`.
        #[arg(long, allow_negative_numbers = true)]
        distance: Option<f64>,
    },
    /// Print the PHY mode table.
    DumpModes,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Svg,
}

#[derive(Debug)]
enum CliError {
    Config(ConfigError),
    Model(ModelError),
    Output(OutputError),
}

impl CliError {
    fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Model(_) => "model",
            CliError::Output(_) => "io",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 3,
            CliError::Model(_) => 4,
            CliError::Output(_) => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => e.fmt(f),
            CliError::Model(e) => e.fmt(f),
            CliError::Output(e) => e.fmt(f),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Model(e)
    }
}

impl From<OutputError> for CliError {
    fn from(e: OutputError) -> Self {
        CliError::Output(e)
    }
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| {
        CliError::Output(OutputError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn scenario(cli: &Cli) -> Result<Scenario, CliError> {
    let mut s = match &cli.config {
        Some(path) => load_scenario(path)?,
        None => Scenario::default(),
    };
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    if let Some(t) = cli.shadowing {
        s.shadowing = matches!(t, Toggle::On);
    }
    Ok(s)
}

fn emit(rows: &[SweepRow], cli: &Cli, stem: &str, x: Axis) -> Result<(), CliError> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let text = csv_string(rows)?;
    fs::create_dir_all(&dir).map_err(io_error(&dir))?;
    let path = dir.join(format!("{stem}.csv"));
    fs::write(&path, text).map_err(io_error(&path))?;
    eprintln!("wrote {} rows to {}", rows.len(), path.display());
    if cli.format == Format::Svg {
        for p in write_svg_charts(rows, x, &dir, stem)? {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Optimize { distance } => {
            let s = scenario(cli)?;
            s.validate()?;
            let r = cloee(&s.system, *distance, s.shadowing_at(0)?, &s.qos, &s.solver)?;
            let text = opt_results_csv(&[r])?;
            if let Some(dir) = &cli.out {
                fs::create_dir_all(dir).map_err(io_error(dir))?;
                let path = dir.join("optimize.csv");
                fs::write(&path, &text).map_err(io_error(&path))?;
            }
            let stdout = Path::new("<stdout>");
            io::stdout()
                .write_all(text.as_bytes())
                .map_err(io_error(stdout))?;
        }
        Command::Sweep => {
            let rows = run_sweep(&scenario(cli)?)?;
            emit(&rows, cli, "sweep", Axis::Distance)?;
        }
        Command::Curves { distance } => {
            let mut s = scenario(cli)?;
            if let Some(d) = distance {
                s.curve_distance = *d;
            }
            let rows = run_curves(&s)?;
            emit(&rows, cli, "curves", Axis::FrameSize)?;
        }
        Command::DumpModes => {
            let mut text =
                String::from("n_cpb,t_w_ns,t_sym_ns,rate_uncoded_mbps,rate_coded_mbps\n");
            for m in PhyMode::all() {
                text.push_str(&format!(
                    "{},{:.4},{:.1},{:.3},{:.3}\n",
                    m.n_cpb,
                    m.t_w * 1e9,
                    m.t_sym * 1e9,
                    m.rate_uncoded / 1e6,
                    m.rate_coded / 1e6
                ));
            }
            let stdout = Path::new("<stdout>");
            io::stdout()
                .write_all(text.as_bytes())
                .map_err(io_error(stdout))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code())
        }
    }
}
