use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dshift::input::{self, Format};
use dshift::{parallel, render, svg};
use dshift_core::experiments::{
    export_fork_data, sample_poisson_binned, sample_poisson_distribution, TruncatedPoisson,
};
use dshift_core::feasible::{self, AuditOptions, FeasibleSetSpec, DEFAULT_CAP};
use dshift_core::measures::{compare_all_with, Measure, ZeroHandling};
use dshift_core::shift::{self, ShiftExponent};
use dshift_core::{rng, ExperimentConfig, FrequencyDistribution, Source, UndefinedPolicy};

/// Distributional shift, relative shift and comparison measures for binned
/// frequency distributions.
#[derive(Parser)]
#[command(name = "dshift", version)]
struct Cli {
    /// Worker threads for experiments and audits (0 = one per core).
    #[arg(long, global = true, env = parallel::THREADS_ENV)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distributional shift of one or more distributions.
    Ds(DsArgs),
    /// Relative shift DS(b) − DS(a).
    Rds(RdsArgs),
    /// Every comparison measure for a pair of distributions.
    Compare(CompareArgs),
    /// Exact size of the feasible set A(n, k).
    Card(SetArgs),
    /// List A(n, k) in dictionary order, one CSV row per member.
    Enum(EnumArgs),
    /// Seeded random draws of distributions.
    Sample(SampleArgs),
    /// Count distinct DS power sums over A(n, k).
    Uniq(UniqArgs),
    /// Monte Carlo correlation experiment over random pairs.
    Experiment(ExperimentArgs),
    /// Measure against signed RDS for each pair of an experiment.
    Fork(ForkArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    Csv,
    Json,
}

impl From<InputFormat> for Format {
    fn from(f: InputFormat) -> Self {
        match f {
            InputFormat::Csv => Format::Csv,
            InputFormat::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SourceKind {
    /// Uniform draws from the feasible set.
    Feasible,
    /// Poisson values restricted to 0..k, binned by value.
    Poisson,
    /// Poisson values in k equal-width bins over each sample's range.
    PoissonBinned,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyKind {
    Drop,
    Fail,
}

#[derive(Args)]
struct DsArgs {
    /// Comma-separated counts, e.g. 2,1,0.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "file", required_unless_present = "file")]
    inline: Option<String>,
    /// CSV or JSON file with one or more distributions.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Input format for --file (default: from extension or content).
    #[arg(long, value_enum)]
    input_format: Option<InputFormat>,
    /// Fixed exponent z > 0 instead of (k + 1) / k.
    #[arg(long, conflicts_with = "linear")]
    z: Option<f64>,
    /// Linear form, z = 1.
    #[arg(long)]
    linear: bool,
    /// Fail unless every distribution has this many observations.
    #[arg(long)]
    expect_n: Option<u64>,
    /// Fail unless every distribution has this many bins.
    #[arg(long)]
    expect_k: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Args)]
struct PairArgs {
    /// First distribution, comma-separated counts.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "a_file", required_unless_present = "a_file")]
    a: Option<String>,
    /// File holding the first distribution.
    #[arg(long)]
    a_file: Option<PathBuf>,
    /// Second distribution, comma-separated counts.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "b_file", required_unless_present = "b_file")]
    b: Option<String>,
    /// File holding the second distribution.
    #[arg(long)]
    b_file: Option<PathBuf>,
}

#[derive(Args)]
struct RdsArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// Compare distributions with different bin counts (result is marked
    /// unvalidated).
    #[arg(long)]
    allow_unequal_k: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// Chi-square skips bins empty in both instead of being undefined.
    #[arg(long)]
    lenient_chi_square: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Args)]
struct SetArgs {
    /// Observations.
    #[arg(short = 'n')]
    n: u64,
    /// Bins.
    #[arg(short = 'k')]
    k: usize,
}

#[derive(Args)]
struct EnumArgs {
    #[command(flatten)]
    set: SetArgs,
    /// Emit frequency counts instead of cumulative totals.
    #[arg(long)]
    raw: bool,
    /// Refuse sets larger than this.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u64,
}

#[derive(Args)]
struct SourceArgs {
    #[arg(long, value_enum, default_value = "feasible")]
    source: SourceKind,
    /// Poisson mean (poisson sources only).
    #[arg(long, required_if_eq_any([("source", "poisson"), ("source", "poisson-binned")]))]
    lambda: Option<f64>,
}

impl SourceArgs {
    fn source(&self) -> anyhow::Result<Source> {
        match (self.source, self.lambda) {
            (SourceKind::Feasible, None) => Ok(Source::FeasibleSet),
            (SourceKind::Feasible, Some(_)) => bail!("--lambda only applies to the poisson sources"),
            (SourceKind::Poisson, Some(lambda)) => Ok(Source::Poisson { lambda }),
            (SourceKind::PoissonBinned, Some(lambda)) => Ok(Source::PoissonBinned { lambda }),
            (_, None) => bail!("poisson sources need --lambda"),
        }
    }
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    set: SetArgs,
    #[command(flatten)]
    source: SourceArgs,
    /// RNG seed (required).
    #[arg(long)]
    seed: u64,
    /// Number of draws.
    #[arg(long, default_value_t = 1)]
    count: u64,
}

#[derive(Args)]
struct UniqArgs {
    #[command(flatten)]
    set: SetArgs,
    /// Exponent (default (k + 1) / k).
    #[arg(long)]
    z: Option<f64>,
    /// Refuse sets larger than this.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u64,
    /// Witness pairs to keep per kind.
    #[arg(long, default_value_t = 16)]
    witnesses: usize,
    /// Decide ties in f64 only, without exact re-comparison.
    #[arg(long)]
    float_ties: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Args)]
struct ExperimentSpec {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(short = 'n', default_value_t = 100)]
    n: u64,
    #[arg(short = 'k', default_value_t = 5)]
    k: usize,
    /// Number of random pairs.
    #[arg(long, default_value_t = 10_000)]
    pairs: usize,
    /// RNG seed (required).
    #[arg(long)]
    seed: u64,
    /// What to do with pairs where chi-square or KL is undefined.
    #[arg(long, value_enum, default_value = "drop")]
    undefined: PolicyKind,
}

impl ExperimentSpec {
    fn config(&self) -> anyhow::Result<ExperimentConfig> {
        let config = ExperimentConfig {
            source: self.source.source()?,
            n: self.n,
            k: self.k,
            num_pairs: self.pairs,
            seed: self.seed,
            undefined_policy: match self.undefined {
                PolicyKind::Drop => UndefinedPolicy::Drop,
                PolicyKind::Fail => UndefinedPolicy::Fail,
            },
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    spec: ExperimentSpec,
    /// Directory for r2.csv, r.csv and table.json (stdout gets the r² CSV
    /// otherwise).
    #[arg(long)]
    output: Option<PathBuf>,
    /// With --output, also write one fork scatter SVG per measure.
    #[arg(long, requires = "output")]
    svg: bool,
}

#[derive(Args)]
struct ForkArgs {
    #[command(flatten)]
    spec: ExperimentSpec,
    /// Series to plot against signed RDS.
    #[arg(long, default_value = "emd")]
    measure: String,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write a scatter plot.
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = run(cli, &mut out).and_then(|()| out.flush().map_err(Into::into));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
}

fn run(cli: Cli, out: &mut impl Write) -> anyhow::Result<()> {
    let threads = cli.threads;
    match cli.command {
        Command::Ds(a) => cmd_ds(a, out),
        Command::Rds(a) => cmd_rds(a, out),
        Command::Compare(a) => cmd_compare(a, out),
        Command::Card(a) => {
            writeln!(out, "{}", feasible::cardinality(a.n, a.k)?)?;
            Ok(())
        }
        Command::Enum(a) => cmd_enum(a, out),
        Command::Sample(a) => cmd_sample(a, out),
        Command::Uniq(a) => cmd_uniq(a, threads, out),
        Command::Experiment(a) => cmd_experiment(a, threads, out),
        Command::Fork(a) => cmd_fork(a, threads, out),
    }
}

fn read_file(path: &Path, format: Option<InputFormat>) -> anyhow::Result<Vec<FrequencyDistribution>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let format = format.map_or_else(|| Format::for_path(path, &text), Into::into);
    input::parse_distributions(&text, format).with_context(|| format!("in {}", path.display()))
}

fn read_one(inline: Option<&str>, file: Option<&Path>, label: &str) -> anyhow::Result<FrequencyDistribution> {
    match (inline, file) {
        (Some(text), _) => input::parse_distribution(text, Format::detect(text)).with_context(|| format!("--{label}")),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            input::parse_distribution(&text, Format::for_path(path, &text))
                .with_context(|| format!("in {}", path.display()))
        }
        (None, None) => bail!("missing --{label} or --{label}-file"),
    }
}

fn read_pair(p: &PairArgs) -> anyhow::Result<(FrequencyDistribution, FrequencyDistribution)> {
    Ok((read_one(p.a.as_deref(), p.a_file.as_deref(), "a")?, read_one(p.b.as_deref(), p.b_file.as_deref(), "b")?))
}

fn cmd_ds(a: DsArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let distributions = match (&a.inline, &a.file) {
        (Some(text), _) => vec![input::parse_distribution(text, Format::detect(text)).context("--inline")?],
        (None, Some(path)) => read_file(path, a.input_format)?,
        (None, None) => bail!("missing --inline or --file"),
    };
    let exponent = match (a.linear, a.z) {
        (true, _) => ShiftExponent::Linear,
        (false, Some(z)) => ShiftExponent::Fixed(z),
        (false, None) => ShiftExponent::BinDependent,
    };
    let mut values = Vec::with_capacity(distributions.len());
    for (i, f) in distributions.iter().enumerate() {
        if let Some(n) = a.expect_n {
            if f.n() != n {
                bail!("distribution {} has n = {}, expected {n}", i + 1, f.n());
            }
        }
        if let Some(k) = a.expect_k {
            if f.k() != k {
                bail!("distribution {} has k = {}, expected {k}", i + 1, f.k());
            }
        }
        values.push(shift::ds_with(&f.cumulate(), exponent)?);
    }
    match a.format {
        OutputFormat::Text => {
            for v in &values {
                writeln!(out, "{}", render::shift_value_text(v))?;
            }
        }
        OutputFormat::Csv => {
            writeln!(out, "{}", render::SHIFT_VALUE_CSV_HEADER)?;
            for v in &values {
                writeln!(out, "{}", render::shift_value_csv(v))?;
            }
        }
        OutputFormat::Json => {
            let docs: Vec<_> = values.iter().map(render::shift_value_json).collect();
            let doc = if docs.len() == 1 { docs.into_iter().next().unwrap() } else { docs.into() };
            out.write_all(render::json_document(&doc).as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_rds(a: RdsArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let (f1, f2) = read_pair(&a.pair)?;
    let r = shift::rds_with(&f1.cumulate(), &f2.cumulate(), a.allow_unequal_k)?;
    if !r.validated {
        eprintln!("warning: bin counts differ ({} vs {}); result is unvalidated", f1.k(), f2.k());
    }
    match a.format {
        OutputFormat::Text => writeln!(out, "rds {}", render::text(r.rds))?,
        OutputFormat::Csv => writeln!(out, "rds,validated\n{},{}", render::machine(r.rds), r.validated)?,
        OutputFormat::Json => {
            let doc = serde_json::json!({ "rds": render::json_number(r.rds), "validated": r.validated });
            out.write_all(render::json_document(&doc).as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_compare(a: CompareArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let (f1, f2) = read_pair(&a.pair)?;
    let zeros = if a.lenient_chi_square { ZeroHandling::Lenient } else { ZeroHandling::Strict };
    let report = compare_all_with(&f1, &f2, zeros)?;
    match a.format {
        OutputFormat::Text => out.write_all(render::measure_report_text(&report).as_bytes())?,
        OutputFormat::Csv => out.write_all(render::measure_report_csv(&report).as_bytes())?,
        OutputFormat::Json => out.write_all(render::json_document(&render::measure_report_json(&report)).as_bytes())?,
    }
    Ok(())
}

fn cmd_enum(a: EnumArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let members = feasible::enumerate_cumulative(a.set.n, a.set.k, a.cap)?;
    for c in members {
        let row = if a.raw { render::counts_csv(c.decumulate().counts()) } else { render::counts_csv(c.totals()) };
        writeln!(out, "{row}")?;
    }
    Ok(())
}

fn cmd_sample(a: SampleArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let source = a.source.source()?;
    let (n, k) = (a.set.n, a.set.k);
    match source {
        Source::FeasibleSet => {
            FeasibleSetSpec::new(n, k)?;
        }
        Source::Poisson { lambda } => {
            TruncatedPoisson::new(lambda, k)?;
        }
        Source::PoissonBinned { .. } => {
            ExperimentConfig { source, ..ExperimentConfig::feasible_set(n, k, 1, a.seed) }.validate()?;
        }
    }
    for i in 0..a.count {
        let mut r = rng::stream(a.seed, i);
        let f = match source {
            Source::FeasibleSet => feasible::sample_uniform(n, k, &mut r)?,
            Source::Poisson { lambda } => sample_poisson_distribution(lambda, n, k, &mut r)?,
            Source::PoissonBinned { lambda } => sample_poisson_binned(lambda, n, k, &mut r)?,
        };
        writeln!(out, "{}", render::counts_csv(f.counts()))?;
    }
    Ok(())
}

fn cmd_uniq(a: UniqArgs, threads: Option<usize>, out: &mut impl Write) -> anyhow::Result<()> {
    let z = a.z.unwrap_or_else(|| shift::bin_dependent_exponent(a.set.k));
    let options = AuditOptions { cap: a.cap, witness_cap: a.witnesses, ..Default::default() };
    let report = parallel::audit(a.set.n, a.set.k, z, options, !a.float_ties, &parallel::pool(threads))?;
    match a.format {
        OutputFormat::Text => out.write_all(render::uniqueness_text(&report).as_bytes())?,
        OutputFormat::Csv => writeln!(out, "{}\n{}", render::UNIQUENESS_CSV_HEADER, render::uniqueness_csv(&report))?,
        OutputFormat::Json => out.write_all(render::json_document(&render::uniqueness_json(&report)).as_bytes())?,
    }
    Ok(())
}

fn cmd_experiment(a: ExperimentArgs, threads: Option<usize>, out: &mut impl Write) -> anyhow::Result<()> {
    let config = a.spec.config()?;
    let table = parallel::run_experiment(&config, &parallel::pool(threads))?;
    let matrix = render::r_squared_csv(&table);
    let Some(dir) = a.output else {
        out.write_all(matrix.as_bytes())?;
        return Ok(());
    };
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    write_file(&dir.join("r2.csv"), &matrix)?;
    write_file(&dir.join("r.csv"), &render::correlation_csv(&table))?;
    write_file(&dir.join("table.json"), &render::json_document(&render::correlation_json(&config, &table)))?;
    if a.svg {
        for m in &table.measure_names {
            let fork = export_fork_data(&table, m.name())?;
            let points: Vec<_> = fork.rows.iter().filter_map(|&(v, rds)| Some((v?, rds))).collect();
            write_file(&dir.join(format!("fork_{}.svg", m.name())), &svg::scatter(&points, m.name(), "rds"))?;
        }
    }
    eprintln!("wrote results to {}", dir.display());
    Ok(())
}

fn cmd_fork(a: ForkArgs, threads: Option<usize>, out: &mut impl Write) -> anyhow::Result<()> {
    let config = a.spec.config()?;
    if Measure::from_name(&a.measure).is_none() {
        let valid: Vec<_> = Measure::ALL.iter().map(|m| m.name()).collect();
        bail!("unknown series '{}'; valid names are {}", a.measure, valid.join(", "));
    }
    let table = parallel::run_experiment(&config, &parallel::pool(threads))?;
    let fork = export_fork_data(&table, &a.measure)?;
    let csv = render::fork_csv(&fork);
    match &a.output {
        Some(path) => write_file(path, &csv)?,
        None => out.write_all(csv.as_bytes())?,
    }
    if let Some(path) = &a.svg {
        let points: Vec<_> = fork.rows.iter().filter_map(|&(v, rds)| Some((v?, rds))).collect();
        write_file(path, &svg::scatter(&points, fork.measure.name(), "rds"))?;
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}
