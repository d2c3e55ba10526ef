use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser};
use mis_lca::harness::{
    emit_report, run_experiment, ExperimentConfig, Format, GraphSource, Mode, Questions,
};
use mis_lca::par::Execution;

#[derive(Parser, Debug)]
#[command(
    name = "mis-lca",
    version,
    about = "Maximal independent set by local computation"
)]
#[command(group(ArgGroup::new("source").required(true).args(["gen", "graph"])))]
#[command(group(ArgGroup::new("which").args(["question", "all", "sample"])))]
struct Cli {
    /// lca, global, baseline-rg, baseline-ball, verify, bench or sweep
    #[arg(long)]
    mode: String,
    /// Generator spec such as `gnp:1000,0.005`, `dreg:20000,16`, or `small:6`
    #[arg(long)]
    gen: Option<String>,
    /// Edge-list file
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', required = true)]
    seed: Vec<u64>,
    #[arg(long)]
    ct: Option<u32>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    k_override: Option<u64>,
    #[arg(long)]
    question: Option<u32>,
    #[arg(long)]
    all: bool,
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "json")]
    format: String,
    /// Write per-seed trace CSVs next to the report (global mode)
    #[arg(long)]
    trace: bool,
    /// Degrees (bench) or C_T values (sweep)
    #[arg(long, value_delimiter = ',')]
    sweep: Vec<u32>,
    /// Include wall-clock times in the report
    #[arg(long)]
    timings: bool,
    #[arg(long)]
    sequential: bool,
}

fn config(cli: &Cli) -> mis_lca::Result<(ExperimentConfig, Format)> {
    let mode: Mode = cli.mode.parse()?;
    let source = match (&cli.gen, &cli.graph) {
        (Some(g), None) => g.parse::<GraphSource>()?,
        (None, Some(p)) => GraphSource::File(p.clone()),
        _ => unreachable!("clap enforces exactly one source"),
    };
    let mut c = ExperimentConfig::new(mode, source, cli.seed.clone());
    if let Some(ct) = cli.ct {
        c.t_multiplier = ct;
    }
    if let Some(d) = cli.delta {
        c.delta = d;
    }
    c.k_override = cli.k_override;
    c.questions = match (cli.question, cli.all, cli.sample) {
        (Some(v), _, _) => Questions::One(v),
        (_, true, _) => Questions::All,
        (_, _, Some(k)) => Questions::Sample(k),
        _ => Questions::Auto,
    };
    c.cap = cli.cap;
    c.sweep = cli.sweep.clone();
    c.timings = cli.timings;
    if cli.trace {
        let dir = cli.out.parent().filter(|p| !p.as_os_str().is_empty());
        c.trace_dir = Some(dir.map_or_else(|| PathBuf::from("."), PathBuf::from));
    }
    if cli.sequential {
        c.execution = Execution::Sequential;
    }
    c.validate()?;
    Ok((c, cli.format.parse()?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config(&cli).and_then(|(c, format)| {
        let report = run_experiment(&c)?;
        emit_report(&report, format, &cli.out)?;
        Ok(report)
    });
    match result {
        Ok(report) => {
            for f in report.failures() {
                eprintln!(
                    "FAIL {} seed={:?} point={:?}: {:?}",
                    f.check, f.seed, f.point, f.verdict
                );
            }
            if report.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}
