//! Command-line front end: `verify`, `characteristics`, `evolve`, `report`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input
//! error, 3 numerical instability.

mod report;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curvature::RuleTable;
use crate::derivations::{self, check_names, replay};
use crate::error::{Error, Result};
use crate::evolver::sim::{Lab, SimConfig, STABILITY_BOUND};
use crate::evolver::symbol::{speed_set, symmetrizer_residual};
use crate::evolver::{characteristic_speeds, find_symmetrizer, principal_symbol, Closure, InitMode, SpatialBasis, SymbolParams};

pub use report::{classify, summarize, Growth, SeriesReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNSTABLE: i32 = 3;

pub const TOOL: &str = "rarita";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "rarita", version, about = "Spin-3/2 field equations: symbolic checks and a 3+1 evolution lab")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run scripted derivation checks and write a JSON report.
    Verify(VerifyArgs),
    /// Characteristic speeds and symmetrizer of the evolution system.
    Characteristics(CharacteristicsArgs),
    /// Evolve on a periodic line and write the constraint time series.
    Evolve(EvolveArgs),
    /// Summarize a time series written by `evolve`.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Check to run (repeatable); all checks when absent.
    #[arg(long = "check", value_name = "NAME")]
    pub checks: Vec<String>,
    /// Convention table file; the built-in table when absent.
    #[arg(long, value_name = "PATH")]
    pub table: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long, short, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Also replay every trace and fail on any difference.
    #[arg(long)]
    pub replay: bool,
}

#[derive(Args, Debug)]
pub struct CharacteristicsArgs {
    /// Wave direction `x,y,z`.
    #[arg(long, value_parser = parse_vec3, default_value = "0,0,1", allow_hyphen_values = true)]
    pub direction: [f64; 3],
    /// Also sample this many random unit directions and report the spread.
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    /// Seed for the random directions.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, short, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ClosureArg {
    Static,
    Symmetric,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum InitArg {
    Random,
    Constrained,
}

#[derive(Args, Debug, Default)]
pub struct EvolveArgs {
    /// TOML file with `SimConfig` fields; flags override it.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub mass: Option<f64>,
    /// Grid points.
    #[arg(long)]
    pub n: Option<usize>,
    /// Domain length.
    #[arg(long)]
    pub length: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, conflicts_with = "t_end")]
    pub steps: Option<usize>,
    /// Final time; sets `steps = round(t_end / dt)`.
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long, value_enum)]
    pub closure: Option<ClosureArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub init: Option<InitArg>,
    /// Highest Fourier mode in random data.
    #[arg(long)]
    pub modes: Option<usize>,
    /// Amplitude of the static differences.
    #[arg(long)]
    pub background: Option<f64>,
    /// Direction of the grid line `x,y,z`.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    pub direction: Option<[f64; 3]>,
    /// Record every k-th step.
    #[arg(long)]
    pub output_every: Option<usize>,
    /// Skip the step-size stability check.
    #[arg(long)]
    pub unchecked_dt: bool,
    /// CSV path; stdout when absent.
    #[arg(long, short, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Metadata JSON path; defaults to `<output>.meta.json` when `--output`
    /// is given.
    #[arg(long, value_name = "PATH")]
    pub metadata: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Time-series CSV.
    pub input: PathBuf,
    #[arg(long, short, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Growth threshold on final/initial.
    #[arg(long, default_value_t = 100.0)]
    pub threshold: f64,
    /// Norms below this are never called growing.
    #[arg(long, default_value_t = 1e-8)]
    pub floor: f64,
}

fn parse_vec3(s: &str) -> std::result::Result<[f64; 3], String> {
    let v: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| e.to_string())).collect::<std::result::Result<_, _>>()?;
    match v[..] {
        [x, y, z] if v.iter().all(|c| c.is_finite()) => Ok([x, y, z]),
        _ => Err(format!("expected three finite numbers `x,y,z`, got `{s}`")),
    }
}

fn fmt_vec3(v: [f64; 3]) -> String {
    format!("{},{},{}", v[0], v[1], v[2])
}

pub fn init_logging() {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().filter_or("RARITA_LOG", "warn")).try_init();
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numerical(_) => EXIT_UNSTABLE,
        _ => EXIT_USAGE,
    }
}

/// Parse `args` (program name first) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let raw = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect::<Vec<_>>().join(" ");
    let result = match &cli.command {
        Command::Verify(a) => cmd_verify(a, &raw),
        Command::Characteristics(a) => cmd_characteristics(a, &raw),
        Command::Evolve(a) => cmd_evolve(a),
        Command::Report(a) => cmd_report(a, &raw),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable document");
    s.push('\n');
    s
}

pub fn cmd_verify(a: &VerifyArgs, raw: &str) -> Result<i32> {
    let names: Vec<String> = if a.checks.is_empty() { check_names().iter().map(|s| s.to_string()).collect() } else { a.checks.clone() };
    for n in &names {
        derivations::script_of(n)?;
    }
    let (table, table_name) = match &a.table {
        Some(p) => (RuleTable::load(p)?, p.display().to_string()),
        None => (RuleTable::default(), "default".to_string()),
    };
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let checks = derivations::run_checks(&refs, &table)?;
    let mut doc = derivations::document(checks, &table_name);
    doc.command = Some(format!("{TOOL} {VERSION} {raw}"));
    let mut replay_ok = true;
    if a.replay {
        for r in doc.checks.values() {
            if let Some(step) = replay(r, &table)? {
                warn!("replay of {} differs at {step}", r.check);
                replay_ok = false;
            }
        }
    }
    for r in doc.checks.values() {
        eprintln!("{} {}", if r.passed() { "pass" } else { "FAIL" }, r.check);
    }
    write_out(a.output.as_deref(), &to_json(&doc))?;
    Ok(if doc.all_passed && replay_ok { EXIT_OK } else { EXIT_FAILED })
}

#[derive(Serialize)]
struct SpeedClass {
    speed: f64,
    multiplicity: usize,
}

#[derive(Serialize)]
struct Isotropy {
    samples: usize,
    seed: u64,
    /// Largest deviation of any sampled speed list from the one above.
    max_deviation: f64,
}

#[derive(Serialize)]
struct CharacteristicsDoc {
    tool: &'static str,
    version: &'static str,
    command: String,
    direction: [f64; 3],
    speeds: Vec<f64>,
    speed_set: Vec<SpeedClass>,
    hyperbolic: bool,
    symmetrizer_candidate: String,
    symmetrizer_spectrum: Vec<f64>,
    symmetrizer_residual: f64,
    basis: SpatialBasis,
    #[serde(skip_serializing_if = "Option::is_none")]
    isotropy: Option<Isotropy>,
}

/// Uniform random unit vectors.
pub fn random_directions(count: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 1e-3 && r <= 1.0 {
            out.push(v.map(|x| x / r));
        }
    }
    out
}

pub fn cmd_characteristics(a: &CharacteristicsArgs, raw: &str) -> Result<i32> {
    let basis = SpatialBasis::default();
    let params = SymbolParams::default();
    let speeds = characteristic_speeds(&basis, a.direction, params)?;
    let r = a.direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    let unit = a.direction.map(|x| x / r);
    let sym = find_symmetrizer(&basis, params)?;
    let residual = symmetrizer_residual(&sym.h, &principal_symbol(&basis, unit, params));
    let isotropy = if a.samples > 0 {
        let mut dev: f64 = 0.0;
        for k in random_directions(a.samples, a.seed) {
            let s = characteristic_speeds(&basis, k, params)?;
            dev = s.iter().zip(&speeds).map(|(x, y)| (x - y).abs()).fold(dev, f64::max);
        }
        Some(Isotropy { samples: a.samples, seed: a.seed, max_deviation: dev })
    } else {
        None
    };
    let doc = CharacteristicsDoc {
        tool: TOOL,
        version: VERSION,
        command: format!("{TOOL} {VERSION} {raw}"),
        direction: unit,
        speed_set: speed_set(&speeds, 1e-9).into_iter().map(|(speed, multiplicity)| SpeedClass { speed, multiplicity }).collect(),
        speeds,
        hyperbolic: true,
        symmetrizer_candidate: sym.candidate,
        symmetrizer_spectrum: sym.spectrum,
        symmetrizer_residual: residual,
        basis,
        isotropy,
    };
    write_out(a.output.as_deref(), &to_json(&doc))?;
    Ok(EXIT_OK)
}

/// Merge a config file and explicit flags into a `SimConfig`.
pub fn resolve_config(a: &EvolveArgs) -> Result<SimConfig> {
    let mut cfg = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            toml::from_str::<SimConfig>(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => SimConfig::default(),
    };
    macro_rules! take {
        ($($f:ident),*) => { $( if let Some(v) = a.$f { cfg.$f = v; } )* };
    }
    take!(mass, n, length, dt, steps, seed, modes, background, direction, output_every);
    if let Some(c) = a.closure {
        cfg.closure = match c {
            ClosureArg::Static => Closure::StaticDifference,
            ClosureArg::Symmetric => Closure::Symmetric,
        };
    }
    if let Some(i) = a.init {
        cfg.init = match i {
            InitArg::Random => InitMode::RandomModes,
            InitArg::Constrained => InitMode::Constrained,
        };
    }
    if let Some(t) = a.t_end {
        if !(t >= 0.0) || !(cfg.dt > 0.0) {
            return Err(Error::Config("t_end must be non-negative".into()));
        }
        cfg.steps = (t / cfg.dt).round() as usize;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// The complete flag set reproducing `cfg`.
pub fn canonical_flags(cfg: &SimConfig, unchecked: bool) -> String {
    let closure = match cfg.closure {
        Closure::StaticDifference => "static",
        Closure::Symmetric => "symmetric",
    };
    let init = match cfg.init {
        InitMode::RandomModes => "random",
        InitMode::Constrained => "constrained",
    };
    let mut s = format!(
        "evolve --mass {} --n {} --length {} --dt {} --steps {} --closure {closure} --seed {} --init {init} --modes {} --background {} --direction {} --output-every {}",
        cfg.mass,
        cfg.n,
        cfg.length,
        cfg.dt,
        cfg.steps,
        cfg.seed,
        cfg.modes,
        cfg.background,
        fmt_vec3(cfg.direction),
        cfg.output_every
    );
    if unchecked {
        s.push_str(" --unchecked-dt");
    }
    s
}

#[derive(Serialize)]
pub struct RunMetadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: SimConfig,
    pub basis: SpatialBasis,
    /// `∂_{AB} = factor · Σ_i b_i ∂_i`; the frame normalization is absorbed
    /// into the basis, so this is 1.
    pub derivative_factor: f64,
    pub max_speed: f64,
    /// `dt · max_speed · N / L`
    pub courant: f64,
    pub stability_bound: f64,
    pub speeds: Vec<f64>,
    pub symmetrizer_candidate: String,
    pub symmetrizer_spectrum: Vec<f64>,
    pub rows: usize,
}

pub fn cmd_evolve(a: &EvolveArgs) -> Result<i32> {
    let cfg = resolve_config(a)?;
    if !a.unchecked_dt {
        cfg.check_stability()?;
    }
    let command = format!("{TOOL} {VERSION} {}", canonical_flags(&cfg, a.unchecked_dt));
    info!("{command}");
    let basis = SpatialBasis::default();
    let speeds = characteristic_speeds(&basis, cfg.direction, SymbolParams::default())?;
    let max_speed = speeds.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let sym = find_symmetrizer(&basis, SymbolParams::default())?;
    let lab = Lab::new(cfg.clone())?;
    let mut state = lab.initial_state()?;
    let series = lab.run(&mut state)?;
    info!("completed {} steps", cfg.steps);

    let mut w = csv::WriterBuilder::new().from_writer(vec![]);
    for r in &series.rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).expect("csv is utf-8");
    let csv_text = format!("# {command}\n{body}");
    write_out(a.output.as_deref(), &csv_text)?;

    let meta = RunMetadata {
        tool: TOOL,
        version: VERSION,
        command,
        courant: cfg.cfl() * max_speed,
        config: cfg,
        basis,
        derivative_factor: 1.0,
        max_speed,
        stability_bound: STABILITY_BOUND,
        speeds,
        symmetrizer_candidate: sym.candidate,
        symmetrizer_spectrum: sym.spectrum,
        rows: series.rows.len(),
    };
    let meta_path = a.metadata.clone().or_else(|| a.output.as_ref().map(|p| {
        let mut s = p.clone().into_os_string();
        s.push(".meta.json");
        PathBuf::from(s)
    }));
    if let Some(p) = meta_path {
        std::fs::write(p, to_json(&meta))?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_report(a: &ReportArgs, raw: &str) -> Result<i32> {
    let text = std::fs::read_to_string(&a.input)?;
    let mut rep = summarize(&text, a.threshold, a.floor)?;
    rep.command = format!("{TOOL} {VERSION} {raw}");
    write_out(a.output.as_deref(), &to_json(&rep))?;
    Ok(EXIT_OK)
}
