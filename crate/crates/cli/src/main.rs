mod config;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use geocensus_core::compare::compare;
use geocensus_core::hyperbolic::SurfaceStructure;
use geocensus_core::orbits::{enumerate_all_primitive, enumerate_simple, enumerate_type, Census};
use geocensus_core::phase::build_histogram;
use geocensus_core::stats::{counting_curve, fit_exponent, total_length_ratio, rows_to_csv, stats_rows, uniform_grid};
use geocensus_core::verify::{self, Profile};
use geocensus_core::words::{curve_length, self_intersection, CurveClass};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use config::{ConfigError, ExperimentConfig, Mode, SurfaceConfig};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "geocensus", version, about = "Censuses of closed geodesics on cusped hyperbolic tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Describe a surface: traces, basepoint, short lengths.
    Surface {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        surface: Option<SurfaceConfig>,
    },
    /// Enumerate the curves of one type up to a length cutoff.
    Census {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        census: CensusArgs,
    },
    /// Counting function, exponent fit and normalized constants.
    Stats {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        census: CensusArgs,
        #[arg(long)]
        grid_step: Option<f64>,
        /// Fit window as `lo,hi`.
        #[arg(long, value_delimiter = ',')]
        fit_window: Option<Vec<f64>>,
    },
    /// Phase-space histogram of a census.
    Histogram {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        census: CensusArgs,
        /// Arc-length sampling step.
        #[arg(long)]
        step: Option<f64>,
        /// Bins as `u,v,angle`.
        #[arg(long, value_delimiter = ',')]
        bins: Option<Vec<usize>>,
    },
    /// Marked length spectrum comparison against a target structure.
    Compare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        census: CensusArgs,
        #[arg(long)]
        target: Option<SurfaceConfig>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Run the acceptance suite.
    Verify {
        #[arg(long, default_value = "desk")]
        profile: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// JSON config file; flags given here take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: $GEOCENSUS_OUT_DIR, then ./geocensus-out).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct CensusArgs {
    /// `modular`, `x,y` or `label=x,y`.
    #[arg(long)]
    surface: Option<SurfaceConfig>,
    #[arg(long)]
    seed: Option<String>,
    /// Length cutoff.
    #[arg(long = "L", alias = "cutoff")]
    cutoff: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    margin: Option<f64>,
}

enum Failure {
    Config(String),
    Run(String),
    Verification,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

fn run_err(e: impl std::fmt::Display) -> Failure {
    Failure::Run(e.to_string())
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig, Failure> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(o) = &self.out {
            cfg.output_dir = Some(o.clone());
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        Ok(cfg)
    }
}

impl CensusArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(s) = &self.surface {
            cfg.surface = s.clone();
        }
        if let Some(s) = &self.seed {
            cfg.seed = s.clone();
        }
        if let Some(l) = self.cutoff {
            cfg.cutoff = l;
        }
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(m) = self.margin {
            cfg.margin = m;
        }
    }
}

/// Writes files into the output directory, each stamped with the version
/// and config hash.
struct Output {
    dir: PathBuf,
    hash: String,
}

impl Output {
    fn new(dir: PathBuf, hash: String) -> Result<Output, Failure> {
        fs::create_dir_all(&dir).map_err(|e| Failure::Run(format!("{}: {e}", dir.display())))?;
        Ok(Output { dir, hash })
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), Failure> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn csv(&self, name: &str, body: &str) -> Result<(), Failure> {
        self.write(name, &format!("# geocensus {VERSION} config={}\n{body}", self.hash))
    }

    fn json(&self, name: &str, data: Value) -> Result<(), Failure> {
        let doc = json!({ "geocensus_version": VERSION, "config_hash": self.hash, "data": data });
        self.write(name, &(serde_json::to_string_pretty(&doc).map_err(run_err)? + "\n"))
    }
}

fn file_label(text: &str) -> String {
    let s: String = text.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' }).collect();
    s.trim_end_matches('_').to_string()
}

/// Validates, sets up the worker pool and the output directory.
fn prepare(cfg: &ExperimentConfig) -> Result<Output, Failure> {
    cfg.validate()?;
    if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build_global().map_err(run_err)?;
    }
    let out = Output::new(cfg.output_dir(), cfg.hash())?;
    let mut resolved = serde_json::to_value(cfg).map_err(run_err)?;
    resolved["output_dir"] = Value::Null;
    resolved["workers"] = Value::Null;
    out.json(&format!("config_{}.json", &out.hash[..12]), resolved)?;
    Ok(out)
}

fn census(cfg: &ExperimentConfig, s: &SurfaceStructure) -> Result<Census, Failure> {
    let seed = cfg.seed_class()?;
    let simple = self_intersection(&seed) == 0;
    let result = match cfg.mode {
        Mode::Auto if simple => enumerate_simple(s, cfg.cutoff),
        Mode::Simple if !simple => {
            return Err(Failure::Config(format!("mode simple needs a simple seed, {seed} is not")));
        }
        Mode::Simple => enumerate_simple(s, cfg.cutoff),
        Mode::Auto | Mode::Orbit => enumerate_type(s, &seed, cfg.cutoff, cfg.margin),
        Mode::AllPrimitive => enumerate_all_primitive(s, cfg.cutoff),
    };
    result.map_err(run_err)
}

fn census_name(cfg: &ExperimentConfig, c: &Census) -> String {
    let kind = match c.mode {
        geocensus_core::orbits::CensusMode::AllPrimitive => "all_primitive".to_string(),
        _ => file_label(&cfg.seed),
    };
    format!("{}_{kind}_L{}", file_label(&cfg.surface.label), cfg.cutoff)
}

fn cmd_surface(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let out = prepare(cfg)?;
    let s = cfg.surface.build()?;
    let (x, y, z) = s.traces();
    let mut lengths = serde_json::Map::new();
    for w in ["a", "b", "aB", "ab"] {
        let c = CurveClass::parse(w).map_err(run_err)?;
        lengths.insert(w.into(), json!(curve_length(&s, &c).map_err(run_err)?));
    }
    let bp = s.basepoint();
    out.json(
        &format!("surface_{}.json", file_label(s.label())),
        json!({
            "label": s.label(),
            "traces": { "x": x, "y": y, "z": z },
            "complexity": s.complexity(),
            "commutator_trace": s.commutator_trace(),
            "basepoint": { "u": bp.u, "v": bp.v },
            "lengths": lengths,
        }),
    )
}

fn cmd_census(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let out = prepare(cfg)?;
    let s = cfg.surface.build()?;
    let c = census(cfg, &s)?;
    out.csv(&format!("census_{}.csv", census_name(cfg, &c)), &c.to_csv())?;
    println!("{} classes, total length {}", c.len(), c.total_length());
    Ok(())
}

fn cmd_stats(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let out = prepare(cfg)?;
    let s = cfg.surface.build()?;
    let c = census(cfg, &s)?;
    let grid = uniform_grid(cfg.grid_step, cfg.cutoff, cfg.grid_step);
    let cc = counting_curve(&c, &grid).map_err(run_err)?;
    let simple = counting_curve(&enumerate_simple(&s, cfg.cutoff).map_err(run_err)?, &grid).map_err(run_err)?;
    let rows = stats_rows(&cc, &simple, s.complexity()).map_err(run_err)?;
    let name = census_name(cfg, &c);
    out.csv(&format!("stats_{name}.csv"), &rows_to_csv(&rows))?;
    let fit = fit_exponent(&cc, cfg.fit_window()).map_err(run_err)?;
    let ratio = total_length_ratio(&cc, cfg.cutoff).map_err(run_err)?;
    println!("slope {:.4}, r2 {:.5}, total length ratio {ratio:.4}", fit.slope, fit.r_squared);
    out.json(
        &format!("fit_{name}.json"),
        json!({ "window": cfg.fit_window(), "fit": fit, "total_length_ratio": ratio }),
    )
}

fn cmd_histogram(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let out = prepare(cfg)?;
    let s = cfg.surface.build()?;
    let c = census(cfg, &s)?;
    let h = build_histogram(&s, &c, cfg.step, &cfg.binning_spec()?).map_err(run_err)?;
    let name = census_name(cfg, &c);
    out.csv(&format!("histogram_{name}.csv"), &h.to_csv())?;
    out.csv(&format!("histogram_{name}_angle.csv"), &h.angle_marginal_csv())?;
    out.csv(&format!("histogram_{name}_position.csv"), &h.position_marginal_csv())?;
    out.json(&format!("histogram_{name}.json"), serde_json::to_value(h.sidecar()).map_err(run_err)?)?;
    println!("{} of {} cells occupied", h.occupied_cells(), h.binning().cell_count());
    Ok(())
}

fn cmd_compare(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let out = prepare(cfg)?;
    let s = cfg.surface.build()?;
    let t = cfg.target.build()?;
    let c = census(cfg, &s)?;
    let report = compare(&s, &t, &c, cfg.tolerance).map_err(run_err)?;
    let name = format!("{}_vs_{}", census_name(cfg, &c), file_label(&cfg.target.label));
    out.csv(&format!("compare_{name}.csv"), &report.rows_to_csv())?;
    out.json(&format!("compare_{name}.json"), serde_json::to_value(&report).map_err(run_err)?)?;
    println!(
        "ratio in [{}, {}]: {}",
        report.ratio_inf,
        report.ratio_sup,
        serde_json::to_value(report.verdict).map_err(run_err)?.as_str().unwrap_or_default()
    );
    Ok(())
}

fn cmd_verify(profile: &str, out_dir: Option<PathBuf>) -> Result<(), Failure> {
    let profile = Profile::named(profile).map_err(|e| Failure::Config(e.to_string()))?;
    let cfg = ExperimentConfig { output_dir: out_dir, ..ExperimentConfig::default() };
    let hash = format!("{:x}", Sha256::digest(format!("{profile:?}").as_bytes()));
    let dir = cfg.output_dir().join(format!("verify-{}", profile.name));
    let out = Output::new(dir, hash)?;
    let report = verify::run(&profile).map_err(run_err)?;
    for a in &report.artifacts {
        if a.name.ends_with(".json") {
            out.json(&a.name, serde_json::from_str(&a.contents).map_err(run_err)?)?;
        } else {
            out.csv(&a.name, &a.contents)?;
        }
    }
    let text = report.to_string();
    out.write("report.txt", &format!("# geocensus {VERSION} config={}\n{text}\n", out.hash))?;
    println!("{text}");
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Surface { common, surface } => {
            let mut cfg = common.resolve()?;
            if let Some(s) = surface {
                cfg.surface = s;
            }
            cmd_surface(&cfg)
        }
        Command::Census { common, census } => {
            let mut cfg = common.resolve()?;
            census.apply(&mut cfg);
            cmd_census(&cfg)
        }
        Command::Stats { common, census, grid_step, fit_window } => {
            let mut cfg = common.resolve()?;
            census.apply(&mut cfg);
            if let Some(g) = grid_step {
                cfg.grid_step = g;
            }
            if let Some(w) = fit_window {
                match w[..] {
                    [lo, hi] => cfg.fit_window = Some((lo, hi)),
                    _ => return Err(Failure::Config("--fit-window takes lo,hi".into())),
                }
            }
            cmd_stats(&cfg)
        }
        Command::Histogram { common, census, step, bins } => {
            let mut cfg = common.resolve()?;
            census.apply(&mut cfg);
            if let Some(d) = step {
                cfg.step = d;
            }
            if let Some(b) = bins {
                match b[..] {
                    [u, v, a] => cfg.binning = (u, v, a),
                    _ => return Err(Failure::Config("--bins takes u,v,angle".into())),
                }
            }
            cmd_histogram(&cfg)
        }
        Command::Compare { common, census, target, tolerance } => {
            let mut cfg = common.resolve()?;
            census.apply(&mut cfg);
            if let Some(t) = target {
                cfg.target = t;
            }
            if let Some(t) = tolerance {
                cfg.tolerance = t;
            }
            cmd_compare(&cfg)
        }
        Command::Verify { profile, out } => cmd_verify(&profile, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Verification) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
    }
}
