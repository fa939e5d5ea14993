//! The `physector` command line.
//!
//! Exit codes: 0 sector accepted, 2 usage/parse error, 3 field of view
//! exhausted, 4 field of view exceeds what the outcomes can resolve.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::campaign::{
    derive_seed, run_campaign, subset_sets, CampaignConfig, DataMode, Demo, StateSpec, SEED_SCHEME,
};
use crate::error::{Error, Result};
use crate::extraction::{run_psep, BasisOrder, ExtractionReport, ExtractionStatus, PsepConfig};
use crate::measurement::{random_measurement, CommutingMeasurement};
use crate::simulate::{sample_frequencies, FrequencyRecord};
use crate::states::SectorIndexSet;

pub const EXIT_ACCEPTED: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FOV_EXHAUSTED: i32 = 3;
pub const EXIT_FOV_RANK: i32 = 4;

pub const THREADS_ENV: &str = "PHYSECTOR_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "physector",
    version,
    about = "Extract the physical sector of a quantum state from commuting-measurement data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a preconfigured simulation campaign.
    Demo {
        #[arg(value_enum)]
        name: DemoName,
        #[command(flatten)]
        flags: CampaignFlags,
    },
    /// Run a simulation campaign described by a JSON config file.
    Campaign {
        #[command(flatten)]
        flags: CampaignFlags,
    },
    /// Run the extraction on measured counts.
    Extract(ExtractArgs),
    /// Sample counts for a state and a measurement.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DemoName {
    Cat,
    Mixture,
    HybridQubit,
    HybridQutrit,
    HybridQuquart,
}

impl From<DemoName> for Demo {
    fn from(d: DemoName) -> Self {
        match d {
            DemoName::Cat => Demo::Cat,
            DemoName::Mixture => Demo::Mixture,
            DemoName::HybridQubit => Demo::HybridQubit,
            DemoName::HybridQutrit => Demo::HybridQutrit,
            DemoName::HybridQuquart => Demo::HybridQuquart,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OrderArg {
    Hint,
    Default,
}

impl From<OrderArg> for BasisOrder {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::Hint => BasisOrder::Hint,
            OrderArg::Default => BasisOrder::Default,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DataModeArg {
    Fresh,
    SharedSubsets,
}

impl From<DataModeArg> for DataMode {
    fn from(d: DataModeArg) -> Self {
        match d {
            DataModeArg::Fresh => DataMode::Fresh,
            DataModeArg::SharedSubsets => DataMode::SharedSubsets,
        }
    }
}

/// Accepts plain integers and scientific notation such as `1e9`.
pub fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let v: f64 = s.parse().map_err(|_| format!("not a count: {s:?}"))?;
    if !v.is_finite() || v < 0.0 || v.fract() != 0.0 || v > 9_007_199_254_740_992.0 {
        return Err(format!("not a non-negative integer count: {s:?}"));
    }
    Ok(v as u64)
}

fn parse_usize(s: &str) -> std::result::Result<usize, String> {
    parse_count(s).and_then(|v| usize::try_from(v).map_err(|e| e.to_string()))
}

#[derive(Debug, Clone, Args)]
struct CampaignFlags {
    /// JSON campaign config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Significance level.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_parser = parse_count)]
    n_events: Option<u64>,
    #[arg(long, value_parser = parse_usize)]
    n_sets: Option<usize>,
    /// Outcomes per measurement set.
    #[arg(long, value_parser = parse_usize)]
    outcomes: Option<usize>,
    /// Number of modeled basis levels.
    #[arg(long, value_parser = parse_usize)]
    fov_dim: Option<usize>,
    #[arg(long, value_parser = parse_count)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    data_mode: Option<DataModeArg>,
    #[arg(long, value_enum)]
    order: Option<OrderArg>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl CampaignFlags {
    fn apply(&self, mut c: CampaignConfig) -> CampaignConfig {
        if let Some(v) = self.alpha {
            c.alpha = v;
        }
        if let Some(v) = self.n_events {
            c.n_events = v;
        }
        if let Some(v) = self.n_sets {
            c.n_sets = v;
        }
        if let Some(v) = self.outcomes {
            c.outcomes = v;
        }
        if let Some(v) = self.fov_dim {
            c.fov_dim = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.data_mode {
            c.data_mode = v.into();
        }
        if let Some(v) = self.order {
            c.order = v.into();
        }
        if let Some(v) = &self.out_dir {
            c.out_dir = Some(v.clone());
        }
        c
    }
}

#[derive(Debug, Args)]
struct ExtractArgs {
    /// Measurement matrix, JSON or CSV (one outcome per row).
    #[arg(long)]
    measurement: PathBuf,
    /// Counts file.
    #[arg(long)]
    counts: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Restrict the field of view to levels 0..fov_dim.
    #[arg(long, value_parser = parse_usize)]
    fov_dim: Option<usize>,
    /// Analyze this many random outcome subsets of the data.
    #[arg(long, value_parser = parse_usize, requires = "outcomes")]
    n_sets: Option<usize>,
    /// Outcomes per subset.
    #[arg(long, value_parser = parse_usize)]
    outcomes: Option<usize>,
    #[arg(long, value_parser = parse_count, default_value = "1")]
    seed: u64,
    #[arg(long, value_enum, default_value = "hint")]
    order: OrderArg,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// cat[:amplitude], mixture:l=w,..., hybrid:t1,t2,t3, hybrid-qubit|qutrit|ququart, or a state JSON file.
    #[arg(long)]
    state: String,
    /// identity, random:<outcomes>, or a measurement JSON/CSV file.
    #[arg(long, default_value = "identity")]
    measurement: String,
    /// Number of modeled basis levels.
    #[arg(long, value_parser = parse_usize)]
    fov_dim: Option<usize>,
    #[arg(long, value_parser = parse_count)]
    n_events: u64,
    #[arg(long, value_parser = parse_count, default_value = "1")]
    seed: u64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Serialize)]
struct RunRecord<'a> {
    command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<&'a CampaignConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inputs: Option<Inputs>,
    seed_scheme: &'static str,
    report: &'a ExtractionReport,
}

#[derive(Serialize)]
struct Inputs {
    measurement: PathBuf,
    counts: PathBuf,
    n_sets: usize,
    outcomes_per_set: usize,
    seed: u64,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e.root() {
        Error::FovRank { .. } | Error::OutsideFov { .. } | Error::Positivity { .. } => {
            EXIT_FOV_RANK
        }
        _ => EXIT_USAGE,
    }
}

fn configure_threads() {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return;
    };
    match v.trim().parse::<usize>() {
        Ok(0) => {}
        // already initialized when called twice in one process
        Ok(n) => {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
        Err(_) => eprintln!("warning: ignoring {THREADS_ENV}={v:?}"),
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Demo { name, flags } => {
            let demo = Demo::from(name);
            let base = match &flags.config {
                Some(path) => load_config(path)?,
                None => demo.config(),
            };
            campaign(format!("demo {}", demo.name()), flags.apply(base))
        }
        Command::Campaign { flags } => {
            let path = flags
                .config
                .clone()
                .ok_or_else(|| Error::InvalidArgument("campaign needs --config".into()))?;
            campaign("campaign".into(), flags.apply(load_config(&path)?))
        }
        Command::Extract(args) => extract(args),
        Command::Simulate(args) => simulate(args),
    }
}

fn load_config(path: &Path) -> Result<CampaignConfig> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn campaign(command: String, mut config: CampaignConfig) -> Result<i32> {
    let (data, report) = run_campaign(&config)?;
    let out_dir = config.out_dir.take().unwrap_or_else(|| PathBuf::from("."));
    let record = RunRecord {
        command,
        config: Some(&config),
        inputs: None,
        seed_scheme: SEED_SCHEME,
        report: &report,
    };
    finish(&record, &data.sets, &data.data, &out_dir)
}

fn extract(args: ExtractArgs) -> Result<i32> {
    let m = CommutingMeasurement::load(&args.measurement)?;
    let diagnostics = m.validate();
    if !diagnostics.is_empty() {
        let msgs: Vec<String> = diagnostics.iter().map(ToString::to_string).collect();
        return Err(Error::InvalidMeasurement(msgs.join("; ")));
    }
    let record = FrequencyRecord::load(&args.counts)?;
    if record.n_outcomes() != m.n_outcomes() {
        return Err(Error::Shape(format!(
            "counts have {} outcomes, measurement has {}",
            record.n_outcomes(),
            m.n_outcomes()
        )));
    }
    let (sets, data) = match args.outcomes {
        Some(j) => subset_sets(&m, &record, args.n_sets.unwrap_or(1), j, args.seed)?,
        None => (vec![m.clone()], vec![record]),
    };
    let mut cfg = PsepConfig::new(args.alpha);
    cfg.order = args.order.into();
    if let Some(d) = args.fov_dim {
        if d > m.n_levels() {
            return Err(Error::FovRank {
                requested: d,
                rank: m.n_levels(),
            });
        }
        cfg.fov = Some(SectorIndexSet::range(d));
    }
    let report = run_psep(&sets, &data, &cfg)?;
    let rec = RunRecord {
        command: "extract".into(),
        config: None,
        inputs: Some(Inputs {
            measurement: args.measurement.clone(),
            counts: args.counts.clone(),
            n_sets: sets.len(),
            outcomes_per_set: sets[0].n_outcomes(),
            seed: args.seed,
        }),
        seed_scheme: SEED_SCHEME,
        report: &report,
    };
    finish(&rec, &sets, &data, &args.out_dir)
}

/// Writes report.json, report.csv and the companion CSV for the other
/// basis ordering, then prints a summary.
fn finish(
    record: &RunRecord<'_>,
    sets: &[CommutingMeasurement],
    data: &[FrequencyRecord],
    out_dir: &Path,
) -> Result<i32> {
    let report = record.report;
    fs::create_dir_all(out_dir)?;
    let mut json = serde_json::to_string_pretty(record)?;
    json.push('\n');
    fs::write(out_dir.join("report.json"), json)?;
    fs::write(out_dir.join("report.csv"), report.to_csv()?)?;

    let (other, name) = match report.order {
        BasisOrder::Hint => (BasisOrder::Default, "report_default_order.csv"),
        BasisOrder::Default => (BasisOrder::Hint, "report_hint_order.csv"),
    };
    let mut cfg = PsepConfig::new(report.alpha);
    cfg.order = other;
    cfg.fov = Some(report.fov.clone());
    let alt = run_psep(sets, data, &cfg)?;
    fs::write(out_dir.join(name), alt.to_csv()?)?;

    print_summary(report);
    Ok(match report.status {
        ExtractionStatus::Accepted => EXIT_ACCEPTED,
        ExtractionStatus::FovExhausted => EXIT_FOV_EXHAUSTED,
    })
}

fn print_summary(report: &ExtractionReport) {
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "{:>3}  {:<24} {:>12} {:>12}",
        "k", "subspace", "mean B_sub", "std B_sub"
    );
    for s in &report.steps {
        println!(
            "{:>3}  {:<24} {:>12.4e} {:>12.4e}",
            s.k,
            s.subspace.to_string(),
            s.mean_b_sub,
            s.std_b_sub
        );
    }
    let status = match report.status {
        ExtractionStatus::Accepted => "accepted",
        ExtractionStatus::FovExhausted => "fov-exhausted",
    };
    println!(
        "extracted sector {} (d_phys = {}) at alpha = {}, status {status}",
        report.extracted_sector, report.d_phys, report.alpha
    );
}

fn simulate(args: SimulateArgs) -> Result<i32> {
    let spec: StateSpec = args.state.parse()?;
    let measurement = match args.measurement.as_str() {
        "identity" => None,
        s if s.starts_with("random:") => {
            let j = s["random:".len()..]
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("outcome count in {s:?}: {e}")))?;
            Some(MeasurementSource::Random(j))
        }
        path => Some(MeasurementSource::File(CommutingMeasurement::load(
            Path::new(path),
        )?)),
    };

    let levels = match (&measurement, spec.natural_levels(), args.fov_dim) {
        (Some(MeasurementSource::File(m)), _, _) => m.n_levels(),
        (_, Some(d), _) => d,
        (_, None, Some(d)) => d,
        (_, None, None) => {
            return Err(Error::InvalidArgument(
                "--fov-dim is required for this state".into(),
            ))
        }
    };
    let state = spec.build(levels)?;
    let m = match measurement {
        None => CommutingMeasurement::identity(levels)?,
        Some(MeasurementSource::Random(j)) => {
            random_measurement(levels, j, derive_seed(args.seed, 0, 0))?
        }
        Some(MeasurementSource::File(m)) => m,
    };
    let diagnostics = m.validate();
    if !diagnostics.is_empty() {
        let msgs: Vec<String> = diagnostics.iter().map(ToString::to_string).collect();
        return Err(Error::InvalidMeasurement(msgs.join("; ")));
    }
    let p = m.born_probabilities(&state)?;
    let record = sample_frequencies(&p, args.n_events, args.seed)?;

    fs::create_dir_all(&args.out_dir)?;
    let counts_path = args.out_dir.join("counts.json");
    fs::write(&counts_path, record.to_json()? + "\n")?;
    fs::write(args.out_dir.join("measurement.json"), m.to_json()? + "\n")?;
    println!(
        "wrote {} ({} events over {} outcomes)",
        counts_path.display(),
        record.n_events(),
        record.n_outcomes()
    );
    Ok(0)
}

enum MeasurementSource {
    Random(usize),
    File(CommutingMeasurement),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!(parse_count("1e9"), Ok(1_000_000_000));
        assert_eq!(parse_count("2.5e6"), Ok(2_500_000));
        assert_eq!(parse_count("42"), Ok(42));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
        assert!(parse_count("abc").is_err());
    }

    #[test]
    fn unknown_demo_is_usage_error() {
        assert_eq!(run(["physector", "demo", "squeezed"]), EXIT_USAGE);
        assert_eq!(run(["physector"]), EXIT_USAGE);
    }

    #[test]
    fn flags_override_config() {
        let flags = CampaignFlags {
            config: None,
            alpha: Some(0.1),
            n_events: Some(5),
            n_sets: None,
            outcomes: None,
            fov_dim: None,
            seed: Some(9),
            data_mode: Some(DataModeArg::SharedSubsets),
            order: None,
            out_dir: None,
        };
        let c = flags.apply(Demo::Cat.config());
        assert_eq!(c.alpha, 0.1);
        assert_eq!(c.n_events, 5);
        assert_eq!(c.seed, 9);
        assert_eq!(c.n_sets, 200);
        assert_eq!(c.data_mode, DataMode::SharedSubsets);
    }

    #[test]
    fn exit_codes_by_error_kind() {
        assert_eq!(exit_code_for(&Error::Parse("x".into())), EXIT_USAGE);
        let e = Error::InSet {
            set: 3,
            source: Box::new(Error::FovRank {
                requested: 5,
                rank: 4,
            }),
        };
        assert_eq!(exit_code_for(&e), EXIT_FOV_RANK);
    }
}
