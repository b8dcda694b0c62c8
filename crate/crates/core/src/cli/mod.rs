//! The `soctam` command line.
//!
//! Exit codes: 0 success, 1 validation failure, 2 unreadable or malformed
//! input, 3 unknown core selector, 4 instance too large for the exact oracle.

mod manifest;
pub mod render;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub use manifest::{InputDigest, RunManifest};

use crate::model::{ModelError, SocSpec};
use crate::oracle::{gap_report, random_gap_trials, validate_assignments, OracleError, ValidationReport};
use crate::parse::{parse, InputFormat};
use crate::scheduler::{build_rectangle_sets, schedule_tests, Assignment, TestSchedule};
use crate::wrapper::{
    wrapper_table, CombinationalTiming, IoPadding, Packing, TotalIo, WrapperBandTable, WrapperConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SELECTOR: i32 = 3;
pub const EXIT_ORACLE_GUARD: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "soctam", version, about = "Wrapper design and TAM test scheduling for SOC cores")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: GlobalOptions,
}

#[derive(Debug, Args)]
pub struct GlobalOptions {
    /// SOC description format.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Auto)]
    pub input_format: FormatArg,
    #[arg(long, global = true, value_enum)]
    pub packing: Option<Packing>,
    #[arg(long, global = true, value_enum)]
    pub io_padding: Option<IoPadding>,
    /// I/O cell count used in the packing bound.
    #[arg(long, global = true, value_enum)]
    pub total_io: Option<TotalIo>,
    #[arg(long, global = true, value_enum)]
    pub combinational: Option<CombinationalTiming>,
    /// Leave the manifest timestamp empty so reruns are byte-identical.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Auto,
    Canonical,
    Itc02,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleFormat {
    Text,
    Json,
    Svg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Wrapper bands of one core over TAM widths 1..=max-width.
    WrapperTable {
        soc: PathBuf,
        /// Core name or numeric id.
        #[arg(long)]
        core: String,
        #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u32).range(1..))]
        max_width: u32,
        #[arg(long)]
        json: bool,
    },
    /// Schedule every core of an SOC on a TAM of the given width.
    Schedule {
        soc: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        width: u32,
        #[arg(long, value_enum, default_value_t = ScheduleFormat::Text)]
        format: ScheduleFormat,
    },
    /// Makespan at each width, as CSV.
    Sweep {
        soc: PathBuf,
        #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u32).range(1..))]
        widths: Vec<u32>,
    },
    /// Check a JSON schedule against an SOC.
    Validate {
        schedule: PathBuf,
        soc: PathBuf,
        /// Overrides the schedule's own w_max.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        width: Option<u32>,
        #[arg(long)]
        json: bool,
    },
    /// Heuristic against exhaustive optimum, as CSV.
    Gap {
        #[arg(required_unless_present = "random", conflicts_with = "random")]
        soc: Option<PathBuf>,
        /// Use seeded random instances instead of a file.
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = 100, requires = "random")]
        trials: u64,
        #[arg(long, default_value_t = 1, requires = "random")]
        seed: u64,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        width: u32,
    },
}

/// Machine form of a schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDoc {
    pub soc: String,
    pub w_max: u32,
    pub t_min: u64,
    pub makespan: u64,
    pub assignments: Vec<Assignment>,
    #[serde(default)]
    pub manifest: Option<RunManifest>,
}

impl ScheduleDoc {
    pub fn new(s: &TestSchedule, manifest: RunManifest) -> Self {
        Self {
            soc: s.soc.clone(),
            w_max: s.w_max,
            t_min: s.t_min,
            makespan: s.makespan,
            assignments: s.assignments(),
            manifest: Some(manifest),
        }
    }
}

/// Machine form of a wrapper table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandTableDoc {
    pub name: String,
    #[serde(flatten)]
    pub table: WrapperBandTable,
    pub manifest: RunManifest,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
    /// Already formatted as diagnostics; printed without a prefix.
    verbatim: bool,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into(), verbatim: false }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Self::input(e.to_string())
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        let code = match e {
            OracleError::TooManyCores(_) | OracleError::TooManyCombinations(_) => EXIT_ORACLE_GUARD,
            OracleError::Invalid { .. } => EXIT_INVALID,
            OracleError::Model(_) => EXIT_INPUT,
        };
        Self { code, message: e.to_string(), verbatim: false }
    }
}

/// Parses `args` (program name first) and runs the command, writing
/// artifacts to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let code = e.exit_code();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut warnings = String::new();
    let result = execute(&cli, &mut warnings);
    let _ = err.write_all(warnings.as_bytes());
    match result {
        Ok((text, code)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(f) if f.verbatim => {
            let _ = writeln!(err, "{}", f.message);
            f.code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

struct Input {
    soc: SocSpec,
    digest: InputDigest,
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_soc(path: &Path, format: FormatArg, warnings: &mut String) -> Result<Input, Failure> {
    let text = read(path)?;
    let format = match format {
        FormatArg::Auto => InputFormat::Auto,
        FormatArg::Canonical => InputFormat::Canonical,
        FormatArg::Itc02 => InputFormat::Itc02,
    };
    let parsed = parse(&text, format).map_err(|e| {
        let lines: Vec<String> = e.errors().map(|d| format!("{}: {d}", path.display())).collect();
        Failure { verbatim: true, ..Failure::input(lines.join("\n")) }
    })?;
    for w in &parsed.warnings {
        let _ = writeln!(warnings, "{}: {w}", path.display());
    }
    Ok(Input { soc: parsed.soc, digest: InputDigest::of("soc", text.as_bytes()) })
}

impl GlobalOptions {
    fn config(&self, base: WrapperConfig) -> WrapperConfig {
        WrapperConfig {
            packing: self.packing.unwrap_or(base.packing),
            io_padding: self.io_padding.unwrap_or(base.io_padding),
            total_io: self.total_io.unwrap_or(base.total_io),
            combinational: self.combinational.unwrap_or(base.combinational),
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn execute(cli: &Cli, warnings: &mut String) -> Result<(String, i32), Failure> {
    let opts = &cli.options;
    let stamp = !opts.no_timestamp;
    let config = opts.config(WrapperConfig::default());
    match &cli.command {
        Command::WrapperTable { soc, core, max_width, json: as_json } => {
            let input = load_soc(soc, opts.input_format, warnings)?;
            let spec = input.soc.select(core).ok_or_else(|| Failure {
                code: EXIT_SELECTOR,
                message: format!("no core `{core}` in SOC `{}`", input.soc.name),
                verbatim: false,
            })?;
            let table = wrapper_table(spec, *max_width, &config)?;
            if *as_json {
                let manifest = RunManifest::new("wrapper-table", vec![input.digest], config, stamp);
                Ok((json(&BandTableDoc { name: spec.name.clone(), table, manifest }), EXIT_OK))
            } else {
                Ok((render::band_table_text(spec, &table), EXIT_OK))
            }
        }
        Command::Schedule { soc, width, format } => {
            let input = load_soc(soc, opts.input_format, warnings)?;
            let schedule = schedule_tests(&input.soc, *width, &config)?;
            let manifest = RunManifest::new("schedule", vec![input.digest], config, stamp);
            let text = match format {
                ScheduleFormat::Text => render::schedule_text(&schedule),
                ScheduleFormat::Json => json(&ScheduleDoc::new(&schedule, manifest)),
                ScheduleFormat::Svg => render::schedule_svg(&schedule, &manifest.to_json()),
            };
            Ok((text, EXIT_OK))
        }
        Command::Sweep { soc, widths } => {
            let input = load_soc(soc, opts.input_format, warnings)?;
            let manifest = RunManifest::new("sweep", vec![input.digest], config, stamp);
            let mut out = manifest.csv_comment();
            out.push_str("width,makespan\n");
            for &w in widths {
                let s = schedule_tests(&input.soc, w, &config)?;
                let _ = writeln!(out, "{w},{}", s.makespan);
            }
            Ok((out, EXIT_OK))
        }
        Command::Validate { schedule, soc, width, json: as_json } => {
            let doc: ScheduleDoc = serde_json::from_str(&read(schedule)?)
                .map_err(|e| Failure::input(format!("{}: {e}", schedule.display())))?;
            let input = load_soc(soc, opts.input_format, warnings)?;
            let w_max = match width {
                Some(w) if *w != doc.w_max => {
                    let _ = writeln!(
                        warnings,
                        "warning: --width {w} differs from the schedule's w_max {}; validating with {w}",
                        doc.w_max
                    );
                    *w
                }
                Some(w) => *w,
                None => doc.w_max,
            };
            if w_max == 0 {
                return Err(Failure::input("w_max must be at least 1"));
            }
            let base = doc.manifest.as_ref().map(|m| m.config).unwrap_or_default();
            let sets = build_rectangle_sets(&input.soc, w_max, &opts.config(base))?;
            let report = validate_assignments(&doc.assignments, &sets, w_max);
            let code = if report.ok { EXIT_OK } else { EXIT_INVALID };
            let text = if *as_json { json(&report) } else { report_text(&report) };
            Ok((text, code))
        }
        Command::Gap { soc, random, trials, seed, width } => {
            let mut out;
            if *random {
                let rows = random_gap_trials(*seed, *trials, *width, &config)?;
                out = RunManifest::new("gap", vec![], config, stamp).csv_comment();
                out.push_str("seed,cores,w_max,heuristic,oracle,ratio\n");
                for r in rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{:.6}",
                        r.seed, r.cores, r.w_max, r.heuristic, r.oracle, r.ratio
                    );
                }
            } else {
                let path = soc.as_ref().expect("clap requires a file without --random");
                let input = load_soc(path, opts.input_format, warnings)?;
                let row = gap_report(&input.soc, *width, &config)?;
                out = RunManifest::new("gap", vec![input.digest], config, stamp).csv_comment();
                out.push_str("seed,cores,w_max,heuristic,oracle,ratio\n");
                let _ = writeln!(
                    out,
                    ",{},{},{},{},{:.6}",
                    input.soc.cores.len(),
                    width,
                    row.heuristic,
                    row.oracle,
                    row.ratio
                );
            }
            Ok((out, EXIT_OK))
        }
    }
}

fn report_text(r: &ValidationReport) -> String {
    let mut out = String::new();
    if r.ok {
        let _ = writeln!(out, "ok  makespan {}  utilization {:.4}", r.makespan, r.utilization);
    } else {
        let _ = writeln!(out, "invalid: {} violation(s)", r.violations.len());
        for v in &r.violations {
            let _ = writeln!(out, "  {v}");
        }
    }
    out
}
