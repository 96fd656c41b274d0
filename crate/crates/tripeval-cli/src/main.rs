//! tripeval command line: preprocess trip tables, split, run baseline
//! generators, evaluate synthetic data and render reports.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tripeval::baselines::{fit_generator, sample, GeneratorKind, GeneratorSpec};
use tripeval::data::{load_csv, preprocess_trips, save_csv, split, PreprocessSpec, SplitSpec, TableSchema};
use tripeval::graph::{build_graph, write_edge_list};
use tripeval::harness::{render_report, run_experiment, sweep_csv, ExperimentConfig, MetricReport, ReportFormat};
use tripeval::privacy::{dcr_profile, rdcr_sweep, write_sweep_csv, DcrProfile};
use tripeval::Error;

#[derive(Parser)]
#[command(name = "tripeval", version, about = "Evaluate synthetic trip tables against real data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Drop columns, expand datetimes and remove incomplete rows
    Preprocess(PreprocessArgs),
    /// Split a table into disjoint train and holdout CSVs
    Split(SplitArgs),
    /// Fit a baseline generator on a training table and sample from it
    Generate(GenerateArgs),
    /// Run the full experiment described by a JSON config
    Evaluate(EvaluateArgs),
    /// Render a saved report as markdown, csv or json
    Report(ReportArgs),
    /// Compute the four DCR distance profiles for a train/holdout/synth trio
    Profile(ProfileArgs),
    /// Evaluate the DCR ratio over a percentile grid from a saved profile
    Sweep(SweepArgs),
    /// Export an origin-destination edge list from a trip table
    Graph(GraphArgs),
}

#[derive(Args)]
struct PreprocessArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Columns to drop; repeatable
    #[arg(long = "drop")]
    drop_columns: Vec<String>,
    /// Datetime columns to expand into weekday/time; repeatable
    #[arg(long = "datetime")]
    datetime_columns: Vec<String>,
    /// Where to write the post-preprocessing schema (default: <out>.schema.json)
    #[arg(long)]
    schema_out: Option<PathBuf>,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    train_size: usize,
    #[arg(long)]
    holdout_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    train_out: PathBuf,
    #[arg(long)]
    holdout_out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    GaussianCopula,
    IndependentMarginals,
    NoisyMemorizer,
}

impl From<KindArg> for GeneratorKind {
    fn from(kind: KindArg) -> Self {
        match kind {
            KindArg::GaussianCopula => GeneratorKind::GaussianCopula,
            KindArg::IndependentMarginals => GeneratorKind::IndependentMarginals,
            KindArg::NoisyMemorizer => GeneratorKind::NoisyMemorizer,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Memorizer noise in encoded units
    #[arg(long, default_value_t = 0.01)]
    noise_sigma: f64,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Markdown,
    Csv,
}

impl From<FormatArg> for ReportFormat {
    fn from(fmt: FormatArg) -> Self {
        match fmt {
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Markdown => ReportFormat::Markdown,
            FormatArg::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Markdown)]
    format: FormatArg,
    /// Write to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-generator rdcr sweep CSVs into this directory
    #[arg(long)]
    sweep_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    holdout: PathBuf,
    #[arg(long)]
    synth: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// DCR profile JSON produced by `tripeval profile`
    #[arg(long)]
    profile: PathBuf,
    /// Comma-separated percentiles in (0, 100]
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 1.0, 2.0, 5.0, 10.0, 25.0, 50.0])]
    alphas: Vec<f64>,
    /// Write CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    pickup: String,
    #[arg(long)]
    dropoff: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = false)]
    drop_self_loops: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are success, not usage errors.
            use clap::error::ErrorKind;
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::Preprocess(args) => cmd_preprocess(args),
        Command::Split(args) => cmd_split(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Report(args) => cmd_report(args),
        Command::Profile(args) => cmd_profile(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Graph(args) => cmd_graph(args),
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn cmd_preprocess(args: PreprocessArgs) -> Result<(), Error> {
    let schema = TableSchema::from_json_file(&args.schema)?;
    let table = load_csv(&args.input, &schema)?;
    let spec = PreprocessSpec {
        drop_columns: args.drop_columns,
        datetime_columns: args.datetime_columns,
    };
    let (clean, report) = preprocess_trips(&table, &spec)?;
    save_csv(&clean, &args.out)?;
    let schema_out = args
        .schema_out
        .unwrap_or_else(|| args.out.with_extension("schema.json"));
    write_text(&schema_out, &clean.schema().to_json())?;
    eprintln!(
        "kept {} rows, dropped {} rows and {} column(s); schema written to {}",
        report.rows_kept,
        report.rows_dropped,
        report.columns_dropped.len(),
        schema_out.display()
    );
    Ok(())
}

fn cmd_split(args: SplitArgs) -> Result<(), Error> {
    let schema = TableSchema::from_json_file(&args.schema)?;
    let table = load_csv(&args.input, &schema)?;
    let spec = SplitSpec {
        train_size: args.train_size,
        holdout_size: args.holdout_size,
        seed: args.seed,
    };
    let (train, holdout) = split(&table, &spec)?;
    save_csv(&train, &args.train_out)?;
    save_csv(&holdout, &args.holdout_out)?;
    eprintln!(
        "wrote {} train rows and {} holdout rows",
        train.n_rows(),
        holdout.n_rows()
    );
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Error> {
    let schema = TableSchema::from_json_file(&args.schema)?;
    let train = load_csv(&args.train, &schema)?;
    if train.has_missing() {
        return Err(Error::Schema(
            "training table has missing cells; run `tripeval preprocess` first".into(),
        ));
    }
    let spec = GeneratorSpec {
        kind: args.kind.into(),
        noise_sigma: args.noise_sigma,
        seed: args.seed,
    };
    let generator = fit_generator(&train, &spec)?;
    let synth = sample(&generator, args.n, args.seed)?;
    save_csv(&synth, &args.out)?;
    eprintln!("wrote {} synthetic rows to {}", synth.n_rows(), args.out.display());
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), Error> {
    let cfg = ExperimentConfig::from_json_file(&args.config)?;
    let report = run_experiment(&cfg)?;
    write_text(&args.out, &render_report(&report, ReportFormat::Json)?)?;
    for generator in &report.generators {
        match &generator.error {
            Some(err) => eprintln!("{}: FAILED ({err})", generator.name),
            None => eprintln!(
                "{}: {} run(s), {} metric(s)",
                generator.name,
                generator.seeds.len(),
                generator.metrics.len()
            ),
        }
    }
    eprintln!("report written to {}", args.out.display());
    Ok(())
}

fn load_report(path: &Path) -> Result<MetricReport, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn cmd_report(args: ReportArgs) -> Result<(), Error> {
    let format: ReportFormat = args.format.into();
    let report = load_report(&args.input)?;
    let rendered = render_report(&report, format)?;
    match &args.out {
        Some(path) => write_text(path, &rendered)?,
        None => print!("{rendered}"),
    }
    if let Some(dir) = &args.sweep_dir {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.clone(),
            source,
        })?;
        for generator in &report.generators {
            if generator.sweep.is_empty() {
                continue;
            }
            let path = dir.join(format!("sweep_{}.csv", generator.name));
            write_text(&path, &sweep_csv(generator))?;
        }
    }
    Ok(())
}

fn cmd_profile(args: ProfileArgs) -> Result<(), Error> {
    let schema = TableSchema::from_json_file(&args.schema)?;
    let train = load_csv(&args.train, &schema)?;
    let holdout = load_csv(&args.holdout, &schema)?;
    let synth = load_csv(&args.synth, &schema)?;
    let encoder = tripeval::data::Encoder::fit(&train)?;
    let profile = dcr_profile(
        &encoder.encode(&train)?,
        &encoder.encode(&holdout)?,
        &encoder.encode(&synth)?,
    )?;
    write_text(&args.out, &profile.to_json())?;
    eprintln!("profile written to {}", args.out.display());
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.profile).map_err(|source| Error::Io {
        path: args.profile.clone(),
        source,
    })?;
    let profile = DcrProfile::from_json(&text)?;
    let results = rdcr_sweep(&profile, &args.alphas)?;
    let mut buf = Vec::new();
    write_sweep_csv(&results, &mut buf)?;
    let csv = String::from_utf8(buf).expect("csv is utf-8");
    match &args.out {
        Some(path) => write_text(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_graph(args: GraphArgs) -> Result<(), Error> {
    let schema = TableSchema::from_json_file(&args.schema)?;
    let table = load_csv(&args.input, &schema)?;
    let mut graph = build_graph(&table, &args.pickup, &args.dropoff)?;
    if args.drop_self_loops {
        graph = graph.without_self_loops()?;
    }
    let file = std::fs::File::create(&args.out).map_err(|source| Error::Io {
        path: args.out.clone(),
        source,
    })?;
    write_edge_list(&graph, file)?;
    eprintln!(
        "wrote {} edges over {} zones to {}",
        graph.edge_counts().len(),
        graph.zone_ids().len(),
        args.out.display()
    );
    Ok(())
}
