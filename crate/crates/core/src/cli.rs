//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::charmap::MapForm;
use crate::construct::{build, SolutionSpec};
use crate::error::{Error, Result};
use crate::geometry::{ProfileKind, ProfileSpec};
use crate::verify::{default_suite, run_case, run_suite, CaseSpec, SuiteConfig, SuiteEntry, SweepSpec};
use crate::wavefield::{extend_field, sample_grid, Window};

/// Configurations shipped with the binary, addressable by file name.
pub const BUNDLED_CONFIGS: [(&str, &str); 6] = [
    ("fig1.json", include_str!("../configs/fig1.json")),
    ("fig2.json", include_str!("../configs/fig2.json")),
    ("dai.json", include_str!("../configs/dai.json")),
    ("barcilon_m1k3_cos.json", include_str!("../configs/barcilon_m1k3_cos.json")),
    ("barcilon_m1k3_triangle.json", include_str!("../configs/barcilon_m1k3_triangle.json")),
    ("corner_flow.json", include_str!("../configs/corner_flow.json")),
];

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "funcwave", version, about = "Exact standing internal waves from functional equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the catalog of bottom profiles.
    ListProfiles {
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a construction, run its checks and print a summary.
    Solve(CommonArgs),
    /// Sample the stream function on a grid.
    Field(CommonArgs),
    /// Run a verification suite and print a JSON report.
    Verify {
        /// Suite name; only `default` is bundled.
        #[arg(long, conflicts_with = "config")]
        suite: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for random sweep placement and reflection samples.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    pub nx: usize,
    #[arg(long, default_value_t = 100)]
    pub nz: usize,
    /// `x0,x1,z0,z1`
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<Window>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// A single construction read from a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub profile: ProfileSpec,
    pub solution: SolutionSpec,
    #[serde(default)]
    pub window: Option<Window>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

impl RunConfig {
    pub fn to_case(&self, fallback_name: &str) -> CaseSpec {
        CaseSpec {
            name: self.name.clone().unwrap_or_else(|| fallback_name.to_string()),
            profile: self.profile.clone(),
            solution: self.solution.clone(),
            sweep: self.sweep,
            tolerance: self.tolerance,
        }
    }
}

/// Reads `path`, falling back to a bundled config of the same file name.
pub fn read_config_text(path: &Path) -> Result<String> {
    match fs::read_to_string(path) {
        Ok(text) => Ok(text),
        Err(e) => {
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            BUNDLED_CONFIGS
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, text)| text.to_string())
                .ok_or_else(|| Error::Config(format!("cannot read {}: {e}", path.display())))
        }
    }
}

pub fn load_run_config(path: &Path) -> Result<RunConfig> {
    let text = read_config_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn stem(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("case").to_string()
}

fn load_suite(path: &Path) -> Result<SuiteConfig> {
    let text = read_config_text(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let parsed = if value.get("cases").is_some() {
        serde_json::from_value(value)
    } else {
        serde_json::from_value::<RunConfig>(value).map(|c| SuiteConfig { cases: vec![c.to_case(&stem(path))] })
    };
    parsed.map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn reseed(cfg: &mut SuiteConfig, seed: Option<u64>) {
    if let Some(seed) = seed {
        for c in &mut cfg.cases {
            c.sweep = Some(SweepSpec { seed, ..c.sweep.unwrap_or_default() });
        }
    }
}

enum Outcome {
    Ok(String),
    Failed(String),
}

fn catalog(format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = String::from("kind,params,description\n");
            for k in ProfileKind::ALL {
                out.push_str(&format!("{},{},\"{}\"\n", k, k.param_names().join(";"), k.description()));
            }
            out
        }
        Format::Json => {
            let rows: Vec<_> = ProfileKind::ALL
                .iter()
                .map(|k| serde_json::json!({"kind": k, "params": k.param_names(), "description": k.description()}))
                .collect();
            serde_json::to_string_pretty(&rows).unwrap_or_default() + "\n"
        }
    }
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    name: &'a str,
    kind: &'a str,
    nu: f64,
    flux: f64,
    map_form: &'static str,
    map_window: (f64, f64),
    fixed_points: (Option<f64>, Option<f64>),
    all_passed: bool,
    checks: &'a [SuiteEntry],
    samples: Vec<[f64; 2]>,
}

fn solve(args: &CommonArgs) -> Result<Outcome> {
    let cfg = load_run_config(&args.config)?;
    let mut case = cfg.to_case(&stem(&args.config));
    if let Some(seed) = args.seed {
        case.sweep = Some(SweepSpec { seed, ..case.sweep.unwrap_or_default() });
    }
    let c = build(&case.profile, &case.solution)?;
    let checks = run_case(&case);
    let all_passed = checks.iter().all(|e| e.passed);
    let (lo, hi) = c.profile.window();
    let n = args.nx.max(2);
    let samples: Vec<[f64; 2]> = (0..n)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64)
        .filter_map(|x| c.f.eval(x).ok().map(|v| [x, v]))
        .collect();
    let text = match args.format {
        Format::Json => {
            let summary = SolveSummary {
                name: &case.name,
                kind: c.profile.kind().as_str(),
                nu: c.nu(),
                flux: c.f.flux(),
                map_form: match c.map.form() {
                    MapForm::ClosedForm => "closed_form",
                    MapForm::Numeric => "numeric",
                },
                map_window: c.map.window(),
                fixed_points: c.map.fixed_points(),
                all_passed,
                checks: &checks,
                samples,
            };
            serde_json::to_string_pretty(&summary).map_err(|e| Error::Config(e.to_string()))? + "\n"
        }
        Format::Csv => {
            let mut out = String::from("x,f\n");
            for [x, v] in samples {
                out.push_str(&format!("{x:.16e},{v:.16e}\n"));
            }
            out
        }
    };
    for e in checks.iter().filter(|e| !e.passed) {
        eprintln!("check failed: {} {}", e.name, e.error.as_deref().unwrap_or(""));
    }
    Ok(if all_passed { Outcome::Ok(text) } else { Outcome::Failed(text) })
}

fn field(args: &CommonArgs) -> Result<Outcome> {
    let cfg = load_run_config(&args.config)?;
    let c = build(&cfg.profile, &cfg.solution)?;
    let window = match args.window.or(cfg.window) {
        Some(w) => w,
        None => Window::for_profile(&c.profile)?,
    };
    let stream = extend_field(&c.f, c.nu())?;
    let grid = sample_grid(&stream, &c.profile, window, args.nx, args.nz)?;
    Ok(Outcome::Ok(match args.format {
        Format::Csv => grid.to_csv(),
        Format::Json => serde_json::to_string(&grid).map_err(|e| Error::Config(e.to_string()))? + "\n",
    }))
}

fn verify(suite: Option<&str>, config: Option<&Path>, seed: Option<u64>) -> Result<Outcome> {
    let mut cfg = match (suite, config) {
        (_, Some(path)) => load_suite(path)?,
        (None | Some("default"), None) => default_suite(),
        (Some(other), None) => return Err(Error::Config(format!("unknown suite `{other}`"))),
    };
    reseed(&mut cfg, seed);
    let report = run_suite(&cfg);
    for e in report.entries.iter().filter(|e| !e.passed) {
        eprintln!("check failed: {} {}", e.name, e.error.as_deref().unwrap_or(""));
    }
    let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Config(e.to_string()))? + "\n";
    Ok(if report.all_passed { Outcome::Ok(text) } else { Outcome::Failed(text) })
}

fn emit(text: &str, out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(path) => fs::write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

/// Parses `argv` (program name first), dispatches and returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (result, out) = match &cli.command {
        Command::ListProfiles { format, out } => (Ok(Outcome::Ok(catalog(*format))), out.as_deref()),
        Command::Solve(args) => (solve(args), args.out.as_deref()),
        Command::Field(args) => (field(args), args.out.as_deref()),
        Command::Verify { suite, config, out, seed } => {
            (verify(suite.as_deref(), config.as_deref(), *seed), out.as_deref())
        }
    };
    let (text, code) = match result {
        Ok(Outcome::Ok(text)) => (text, EXIT_OK),
        Ok(Outcome::Failed(text)) => (text, EXIT_VERIFY_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Err(e) = emit(&text, out) {
        eprintln!("error: cannot write output: {e}");
        return EXIT_USAGE;
    }
    code
}
