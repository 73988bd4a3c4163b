use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use pdm_causal::inference::{classify, Thresholds};
use pdm_causal::pdm::{pdm_closed_form, pdm_from_measurements, pdm_iterative};
use pdm_causal_harness::io::{parse_channel, parse_keep, parse_layout, parse_state, read_pdm, write_csv, write_json};
use pdm_causal_harness::scenarios::{
    run_common_cause_mixture, run_haar_sweep, run_measure_prepare, run_swap_influence, ScenarioConfig, Sweep,
    VerdictCsvRow,
};
use pdm_causal_harness::{with_thread_pool, HarnessError, Result};

#[derive(Parser)]
#[command(name = "pdm-causal", version, about = "Pseudo-density matrices and causal inference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and manipulate pseudo-density matrices.
    #[command(subcommand)]
    Pdm(PdmCommand),
    /// Causal inference on two-slot PDMs.
    #[command(subcommand)]
    Infer(InferCommand),
    /// Rerun a worked example and check its expected outcome.
    Reproduce(ReproduceArgs),
    /// Monte-Carlo sweeps.
    #[command(subcommand)]
    Sweep(SweepCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Closed,
    Iterative,
    Oracle,
}

#[derive(Subcommand)]
enum PdmCommand {
    Build {
        /// State name (zero, plus, bell, mixed) or matrix JSON file.
        #[arg(long)]
        rho: String,
        /// Channel name or JSON file, once per time step.
        #[arg(long = "channel", required = true)]
        channels: Vec<String>,
        /// single:<n> or bipartite:<a>,<b>
        #[arg(long, default_value = "single:1")]
        layout: String,
        #[arg(long, value_enum, default_value = "closed")]
        method: Method,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Negativity {
        #[arg(long = "in")]
        input: PathBuf,
    },
    Reverse {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Reduce {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated slot:party pairs, e.g. t1:A,t2:B
        #[arg(long)]
        keep: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum InferCommand {
    Classify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        eps_neg: Option<f64>,
        #[arg(long)]
        eps_pos: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Scenario {
    MeasurePrepare,
    CommonCause,
    SwapInfluence,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct ReproduceArgs {
    #[arg(value_enum)]
    scenario: Scenario,
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    /// Angles in degrees.
    #[arg(long = "theta-deg", value_delimiter = ',')]
    theta_deg: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SweepCommand {
    Haar {
        #[arg(long, value_parser = ["fig3", "fig4"])]
        scenario: String,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// CSV of per-sample rows; the summary goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run_pdm(cmd: PdmCommand) -> Result<()> {
    match cmd {
        PdmCommand::Build { rho, channels, layout, method, out } => {
            let layout = parse_layout(&layout)?;
            let rho = parse_state(&rho, layout.dim())?;
            let channels = channels.iter().map(|c| parse_channel(c)).collect::<Result<Vec<_>>>()?;
            let r = match method {
                Method::Closed => match channels.as_slice() {
                    [ch] => pdm_closed_form(&rho, ch, &layout)?,
                    _ => {
                        return Err(HarnessError::Input(
                            "the closed form takes exactly one channel; use --method iterative".into(),
                        ))
                    }
                },
                Method::Iterative => pdm_iterative(&rho, &channels, &layout)?,
                Method::Oracle => pdm_from_measurements(&rho, &channels, &layout)?,
            };
            write_json(&r, out.as_deref())
        }
        PdmCommand::Negativity { input } => {
            let r = read_pdm(&input)?;
            write_json(&json!({ "f": r.negativity() }), None)
        }
        PdmCommand::Reverse { input, out } => write_json(&read_pdm(&input)?.time_reverse()?, out.as_deref()),
        PdmCommand::Reduce { input, keep, out } => {
            let keep = parse_keep(&keep)?;
            let pairs: Vec<(&str, &str)> = keep.iter().map(|(s, p)| (s.as_str(), p.as_str())).collect();
            write_json(&read_pdm(&input)?.reduce_labels(&pairs)?, out.as_deref())
        }
    }
}

fn run_infer(cmd: InferCommand) -> Result<()> {
    match cmd {
        InferCommand::Classify { input, eps_neg, eps_pos } => {
            let mut th = Thresholds::default();
            if let Some(e) = eps_neg {
                th.eps_neg = e;
            }
            if let Some(e) = eps_pos {
                th.eps_pos = e;
            }
            if !(th.eps_neg >= 0.0 && th.eps_pos >= 0.0) {
                return Err(HarnessError::Input("thresholds must be nonnegative".into()));
            }
            let v = classify(&read_pdm(&input)?, &th)?;
            write_json(&v, None)
        }
    }
}

fn run_reproduce(args: ReproduceArgs) -> Result<()> {
    let name = match args.scenario {
        Scenario::MeasurePrepare => "measure-prepare",
        Scenario::CommonCause => "common-cause",
        Scenario::SwapInfluence => "swap-influence",
    };
    let mut cfg = ScenarioConfig::new(name);
    if let Some(l) = args.lambda {
        cfg.lambdas = l;
    }
    match args.theta_deg {
        Some(t) => cfg.thetas = t.iter().map(|d| d.to_radians()).collect(),
        // the default grid ends at 90 degrees, which the common-cause example excludes
        None if matches!(args.scenario, Scenario::CommonCause) => {
            cfg.thetas.pop();
        }
        None => {}
    }
    let out = args.out.as_deref();
    let verdicts = match args.scenario {
        Scenario::MeasurePrepare => run_measure_prepare(&cfg)?,
        Scenario::CommonCause => run_common_cause_mixture(&cfg)?,
        Scenario::SwapInfluence => {
            let rows = run_swap_influence(&cfg)?;
            return match args.format {
                Format::Json => write_json(&rows, out),
                Format::Csv => write_csv(&rows, out),
            };
        }
    };
    match args.format {
        Format::Json => write_json(&verdicts, out),
        Format::Csv => write_csv(&verdicts.iter().map(VerdictCsvRow::from).collect::<Vec<_>>(), out),
    }
}

fn run_sweep(cmd: SweepCommand) -> Result<()> {
    let SweepCommand::Haar { scenario, n, seed, out } = cmd;
    let sweep: Sweep = scenario.parse()?;
    let mut cfg = ScenarioConfig::new(&scenario);
    cfg.samples = n;
    cfg.seed = seed;
    let (rows, summary) = with_thread_pool(|| run_haar_sweep(sweep, &cfg))??;
    if let Some(path) = out.as_deref() {
        write_csv(&rows, Some(path))?;
    }
    write_json(&summary, None)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Pdm(c) => run_pdm(c),
        Command::Infer(c) => run_infer(c),
        Command::Reproduce(a) => run_reproduce(a),
        Command::Sweep(c) => run_sweep(c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
