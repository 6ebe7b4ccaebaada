use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, ValueEnum};

use cvtsim::apps::QueueParams;
use cvtsim::exec::Strategy;
use cvtsim::replay::{read_trace, replay};
use cvtsim::report::{write_artifacts, Format, MetricsReport};
use cvtsim::scenario::{self, Scenario};
use cvtsim::sim::RunOptions;
use cvtsim::sweep::run_batch;
use cvtsim::SimConstants;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Csv,
    Both,
}

/// Run connected-vehicle testbed scenarios, or replay a recorded BSM trace.
#[derive(Debug, Parser)]
#[command(name = "cvtsim", version)]
struct Cli {
    /// Scenario file or bundled scenario name; repeat to run a batch
    #[arg(long, value_name = "FILE", required_unless_present_any = ["trace", "list"])]
    scenario: Vec<String>,
    /// Override the scenario seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the scenario end time, seconds
    #[arg(long = "t-end", value_name = "SECONDS")]
    t_end: Option<f64>,
    #[arg(long = "out-dir", value_name = "DIR", default_value = "out")]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    format: FormatArg,
    /// Replay an NDJSON BSM trace through the queue detector
    #[arg(long, value_name = "FILE", conflicts_with = "scenario")]
    trace: Option<PathBuf>,
    /// RSU id to stamp on replayed decisions
    #[arg(long, default_value = "replay", requires = "trace")]
    rsu: String,
    /// Also write the processed-event log (events.log)
    #[arg(long)]
    events: bool,
    /// Run batches on one thread
    #[arg(long)]
    sequential: bool,
    /// List bundled scenarios and exit
    #[arg(long)]
    list: bool,
}

enum Failure {
    Config(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn load(arg: &str, cli: &Cli) -> Result<Scenario, Failure> {
    let path = Path::new(arg);
    let (label, text) = if path.exists() {
        let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{arg}: {e}")))?;
        (arg.to_string(), text)
    } else if let Some(text) = scenario::bundled(arg) {
        (format!("<bundled {arg}>"), text.to_string())
    } else {
        return Err(Failure::Config(format!("{arg}: no such file or bundled scenario")));
    };
    let mut sc = scenario::parse(&text).map_err(|e| match e.line {
        Some(l) => Failure::Config(format!("{label}:{l}: {}", e.message)),
        None => Failure::Config(format!("{label}: {}", e.message)),
    })?;
    if let Some(seed) = cli.seed {
        sc.seed = seed;
    }
    if let Some(t) = cli.t_end {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Failure::Config(format!("--t-end must be a non-negative number of seconds, got {t}")));
        }
        sc.t_end = (t * 1000.0).round() as u64;
    }
    Ok(sc)
}

fn format(cli: &Cli) -> Format {
    match cli.format {
        FormatArg::Text => Format::Text,
        FormatArg::Csv => Format::Csv,
        FormatArg::Both => Format::Both,
    }
}

fn run_scenarios(cli: &Cli) -> Result<(), Failure> {
    let scenarios = cli.scenario.iter().map(|a| load(a, cli)).collect::<Result<Vec<_>, _>>()?;
    let strategy = if cli.sequential { Strategy::Sequential } else { Strategy::default() };
    let opts = RunOptions { keep_event_trace: cli.events };
    let outputs = run_batch(&scenarios, opts, strategy);
    let batch = scenarios.len() > 1;
    for (sc, out) in scenarios.iter().zip(outputs) {
        let out = out.with_context(|| format!("scenario `{}`", sc.name))?;
        let dir = if batch { cli.out_dir.join(&sc.name) } else { cli.out_dir.clone() };
        write_artifacts(&out, &dir, format(cli)).with_context(|| format!("writing {}", dir.display()))?;
        let report = MetricsReport::from_run(&out);
        let verdicts = out.avoidance.iter().map(|d| format!("{}={}", d.vehicle, d.verdict.as_str())).collect::<Vec<_>>();
        let accuracy = report
            .section("queue")
            .map(|s| s.rows.iter().filter_map(|(r, _)| s.get(r, "accuracy").map(|c| format!("{r}={}", c.render()))).collect::<Vec<_>>())
            .unwrap_or_default();
        println!(
            "{}: {} events, {} handoffs, decisions [{}], queue accuracy [{}] -> {}",
            sc.name,
            out.summary.events_processed,
            out.handoffs.len(),
            verdicts.join(" "),
            accuracy.join(" "),
            dir.display()
        );
    }
    Ok(())
}

fn run_replay(cli: &Cli, trace: &Path) -> Result<(), Failure> {
    let file = fs::File::open(trace).with_context(|| format!("opening {}", trace.display()))?;
    let records = read_trace(BufReader::new(file)).map_err(|e| Failure::Config(format!("{}: {e}", trace.display())))?;
    let out = replay(&cli.rsu, &records, &QueueParams::from_constants(&SimConstants::default()));
    fs::create_dir_all(&cli.out_dir).with_context(|| format!("creating {}", cli.out_dir.display()))?;
    let path = cli.out_dir.join("queue_decisions.csv");
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?));
    let write = |w: &mut csv::Writer<_>| -> anyhow::Result<()> {
        w.write_record(["t_ms", "rsu", "avg_speed_mph", "avg_gap_ft", "queued", "truth"])?;
        for (d, t) in out.decisions.iter().zip(&out.truth) {
            w.write_record([
                d.t.to_string(),
                d.rsu.clone(),
                d.avg_speed.map(|v| format!("{:.3}", cvtsim::units::mps_to_mph(v))).unwrap_or_default(),
                d.avg_gap.map(|g| format!("{:.3}", cvtsim::units::meters_to_feet(g))).unwrap_or_default(),
                d.queued.to_string(),
                t.map(|b| b.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    };
    write(&mut w)?;
    let acc = out.accuracy.map(|a| format!("{a:.4}"));
    let mut summary = format!("records {}\nevaluations {}\n", records.len(), out.decisions.len());
    if let Some(a) = &acc {
        summary.push_str(&format!("accuracy {a}\n"));
    }
    if matches!(format(cli), Format::Text | Format::Both) {
        fs::write(cli.out_dir.join("report.txt"), &summary).context("writing report.txt")?;
    }
    if matches!(format(cli), Format::Csv | Format::Both) {
        let mut f = BufWriter::new(fs::File::create(cli.out_dir.join("report.csv")).context("creating report.csv")?);
        writeln!(f, "section,row,column,value").context("writing report.csv")?;
        writeln!(f, "replay,{},records,{}", cli.rsu, records.len()).context("writing report.csv")?;
        writeln!(f, "replay,{},evaluations,{}", cli.rsu, out.decisions.len()).context("writing report.csv")?;
        if let Some(a) = &acc {
            writeln!(f, "replay,{},accuracy,{a}", cli.rsu).context("writing report.csv")?;
        }
    }
    print!("{summary}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list {
        for (name, _) in scenario::BUNDLED {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    let result = match &cli.trace {
        Some(trace) => run_replay(&cli, trace),
        None => run_scenarios(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
