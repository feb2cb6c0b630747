//! Command implementations behind the `ibalm` binary.
//!
//! Every command reads an optional JSON [`RunConfig`], overlays the flags
//! given on the command line and validates the result before touching any
//! file. Failures map onto exit codes through [`exit_code`].

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ibalm::grid::classical_edge;
use ibalm::io::{load_edge_map, load_image, save_edge_map, save_image, Raster};
use ibalm::retinex::{enhance, enhance_color};
use ibalm::solver::{descent_check, Schedule};
use ibalm::synthetic::{darken, Scene};
use ibalm::{ColorMode, ComposeMode, Image2D, IterateTrace, MetricReport, RetinexConfig, SolverParams};
use serde::{Deserialize, Serialize};

pub const EXIT_IO: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "ibalm", version, about = "Edge-guided Retinex enhancement with an inertial alternating solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enhance a low-light image.
    Enhance(RunArgs),
    /// Write the classical edge map of an image as an EGMP file.
    Edge(EdgeArgs),
    /// Compare the inertial solver with its zero-inertia baseline.
    Bench(BenchArgs),
    /// Print PSNR and SSIM of an image against a reference.
    Metrics(MetricsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeSource {
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorArg {
    /// Enhance the HSV value channel.
    Hsv,
    /// Enhance each RGB channel.
    Rgb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComposeArg {
    Reflectance,
    Gamma,
}

/// Everything a run needs. Field names double as the JSON keys of
/// `--config` files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub edge: EdgeSource,
    pub edge_file: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub color: ColorArg,
    pub compose: ComposeArg,
    pub gamma: f64,
    pub threshold: f64,
    pub gamma_margin: f64,
    pub admm_penalty: f64,
    pub admm_max_iters: usize,
    pub admm_tol: f64,
    pub log_clamp: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let r = RetinexConfig::default();
        let s = SolverParams::with_epsilon(0.1, r.beta);
        Self {
            input: None,
            output: None,
            edge: EdgeSource::Classical,
            edge_file: None,
            trace: None,
            alpha: r.alpha,
            beta: r.beta,
            epsilon: s.epsilon,
            a1: s.alpha_at(0, 0),
            a2: s.alpha_at(1, 0),
            b1: s.beta_at(0, 0),
            b2: s.beta_at(1, 0),
            max_iters: 200,
            tol: 1e-5,
            color: ColorArg::Hsv,
            compose: ComposeArg::Gamma,
            gamma: r.display_gamma,
            threshold: 0.01,
            gamma_margin: r.gamma_margin,
            admm_penalty: r.admm_penalty,
            admm_max_iters: r.admm_max_iters,
            admm_tol: r.admm_tol,
            log_clamp: r.log_clamp,
        }
    }
}

/// A configuration error detected before any work started.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ValidationError(pub String);

impl RunConfig {
    pub fn retinex(&self) -> RetinexConfig {
        RetinexConfig {
            alpha: self.alpha,
            beta: self.beta,
            gamma_margin: self.gamma_margin,
            admm_penalty: self.admm_penalty,
            admm_max_iters: self.admm_max_iters,
            admm_tol: self.admm_tol,
            log_clamp: self.log_clamp,
            compose_mode: match self.compose {
                ComposeArg::Reflectance => ComposeMode::Reflectance,
                ComposeArg::Gamma => ComposeMode::GammaIllumination,
            },
            display_gamma: self.gamma,
            color_mode: match self.color {
                ColorArg::Hsv => ColorMode::ValueChannel,
                ColorArg::Rgb => ColorMode::PerChannel,
            },
        }
    }

    pub fn solver(&self) -> SolverParams {
        let mut p = SolverParams::with_epsilon(self.epsilon, self.beta);
        p.alpha = [Schedule::Constant(self.a1), Schedule::Constant(self.a2)];
        p.beta = [Schedule::Constant(self.b1), Schedule::Constant(self.b2)];
        p.max_iters = self.max_iters;
        p.step_tol = self.tol;
        p
    }

    pub fn validate(&self) -> Result<()> {
        self.retinex().validate().map_err(|e| ValidationError(e.to_string()))?;
        self.solver().validate().map_err(|e| ValidationError(e.to_string()))?;
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(ValidationError(format!("invalid parameter `threshold`: must be positive, got {}", self.threshold)).into());
        }
        Ok(())
    }

    /// Reads a JSON configuration file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| ValidationError(format!("config {}: {e}", path.display())).into())
    }

    /// The effective configuration as single-line JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON file with defaults for every option below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Edge prior computed from the input.
    #[arg(long, value_enum, conflicts_with = "edge_file")]
    pub edge: Option<EdgeSource>,
    /// Edge prior read from an EGMP file.
    #[arg(long)]
    pub edge_file: Option<PathBuf>,
    /// Write the iteration trace as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: Option<f64>,
    /// Prox-center extrapolation of the illumination block.
    #[arg(long, allow_hyphen_values = true)]
    pub a1: Option<f64>,
    /// Prox-center extrapolation of the reflectance block.
    #[arg(long, allow_hyphen_values = true)]
    pub a2: Option<f64>,
    /// Gradient-point extrapolation of the illumination block.
    #[arg(long, allow_hyphen_values = true)]
    pub b1: Option<f64>,
    /// Gradient-point extrapolation of the reflectance block.
    #[arg(long, allow_hyphen_values = true)]
    pub b2: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Stop once the relative step norm falls below this value.
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub color: Option<ColorArg>,
    #[arg(long, value_enum)]
    pub compose: Option<ComposeArg>,
    /// Display gamma applied to the illumination.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Relative energy threshold for the bench comparison.
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
}

impl RunArgs {
    /// Loads `--config` (if any) and applies the flags on top.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        macro_rules! overlay {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { c.$f = v; } )* };
        }
        overlay!(alpha, beta, epsilon, a1, a2, b1, b2, max_iters, tol, color, compose, gamma, threshold, edge);
        if self.input.is_some() {
            c.input = self.input.clone();
        }
        if self.output.is_some() {
            c.output = self.output.clone();
        }
        if self.trace.is_some() {
            c.trace = self.trace.clone();
        }
        if self.edge_file.is_some() {
            c.edge_file = self.edge_file.clone();
        } else if self.edge.is_some() {
            c.edge_file = None;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Args)]
pub struct EdgeArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Destination EGMP file.
    #[arg(long)]
    pub output: PathBuf,
    /// Optional 8-bit rendering of the signed map, zero at mid-gray.
    #[arg(long)]
    pub preview: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Directory receiving the `<name>_ibalm.csv` and `<name>_ama.csv`
    /// traces.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Side length of the bundled scenes used when no input is given.
    #[arg(long, default_value_t = 64)]
    pub size: usize,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    /// Image under test.
    pub test: PathBuf,
    /// Reference image.
    pub reference: PathBuf,
}

/// Maps an error chain to the process exit code: 1 for I/O and file
/// format problems, 2 for invalid configuration or inputs, 3 for failures
/// of the numerical method.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<ValidationError>().is_some() {
            return EXIT_VALIDATION;
        }
        if let Some(e) = cause.downcast_ref::<ibalm::Error>() {
            return match e {
                ibalm::Error::Io { .. } | ibalm::Error::Format { .. } => EXIT_IO,
                ibalm::Error::Step { .. } => EXIT_SOLVER,
                e if e.is_numerical() => EXIT_SOLVER,
                _ => EXIT_VALIDATION,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_IO;
        }
    }
    EXIT_IO
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Enhance(a) => cmd_enhance(&a.resolve()?),
        Command::Edge(a) => cmd_edge(&a),
        Command::Bench(a) => cmd_bench(&a.run.resolve()?, &a.out_dir, a.size),
        Command::Metrics(a) => cmd_metrics(&a, &mut std::io::stdout().lock()),
    }
}

fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    match p {
        Some(p) => Ok(p),
        None => Err(ValidationError(format!("missing --{flag}")).into()),
    }
}

fn write_trace(trace: &IterateTrace, path: &Path, cfg: &RunConfig) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    trace
        .write_csv(&mut out, Some(&format!("config {}", cfg.to_json())), false)
        .and_then(|_| out.flush())
        .with_context(|| format!("writing {}", path.display()))
}

fn channel_trace_path(base: &Path, suffix: &str) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}_{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{suffix}"),
    };
    base.with_file_name(name)
}

pub fn cmd_enhance(cfg: &RunConfig) -> Result<()> {
    let input = required(&cfg.input, "input")?;
    let output = required(&cfg.output, "output")?;
    let raster = load_image(input)?;
    let prior = match &cfg.edge_file {
        Some(p) => Some(load_edge_map(p)?),
        None => None,
    };
    let retinex = cfg.retinex();
    let params = cfg.solver();
    let (result, traces) = match &raster {
        Raster::Gray(img) => {
            let e = enhance(img, prior.as_ref(), &retinex, &params)?;
            (Raster::Gray(e.output), vec![e.trace])
        }
        Raster::Rgb(rgb) => {
            let e = enhance_color(rgb, prior.as_ref(), &retinex, &params)?;
            (Raster::Rgb(e.output), e.traces)
        }
    };
    for t in &traces {
        log::info!("{} iterations, final energy {:.6e}, converged {}", t.len(), t.last().map_or(f64::NAN, |r| r.phi), t.converged);
    }
    save_image(&result, output)?;
    if let Some(path) = &cfg.trace {
        match traces.as_slice() {
            [single] => write_trace(single, path, cfg)?,
            many => {
                for (t, name) in many.iter().zip(["r", "g", "b"]) {
                    write_trace(t, &channel_trace_path(path, name), cfg)?;
                }
            }
        }
    }
    Ok(())
}

/// `round(127.5 + 127.5·v / max|v|)`, all mid-gray for a zero map.
pub fn edge_preview(map: &Image2D) -> Image2D {
    let peak = map.as_slice().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let scale = if peak > 0.0 { 1.0 / peak } else { 0.0 };
    map.map(|v| (127.5 + 127.5 * v * scale).round() / 255.0)
}

pub fn cmd_edge(args: &EdgeArgs) -> Result<()> {
    let gray = load_image(&args.input)?.to_gray();
    let map = classical_edge(&gray);
    save_edge_map(&map, &args.output)?;
    if let Some(p) = &args.preview {
        save_image(&Raster::Gray(edge_preview(&map)), p)?;
    }
    Ok(())
}

/// Outcome of one iBALM versus zero-inertia comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutcome {
    pub name: String,
    pub ibalm: Option<usize>,
    pub ama: Option<usize>,
    pub min_energy: f64,
    pub ibalm_descent_ok: bool,
    pub ama_descent_ok: bool,
}

impl BenchOutcome {
    pub fn summary(&self, threshold: f64) -> String {
        let fmt = |v: Option<usize>| v.map_or("never".to_string(), |k| k.to_string());
        format!(
            "{}: iterations to within {:.2}% of {:.6e}: ibalm {} ama {} (descent ibalm {} ama {})",
            self.name,
            100.0 * threshold,
            self.min_energy,
            fmt(self.ibalm),
            fmt(self.ama),
            if self.ibalm_descent_ok { "ok" } else { "violated" },
            if self.ama_descent_ok { "ok" } else { "violated" },
        )
    }
}

/// Runs both solvers on one gray image with the model parameters of `cfg`.
pub fn compare(name: &str, img: &Image2D, cfg: &RunConfig) -> Result<(BenchOutcome, IterateTrace, IterateTrace)> {
    let retinex = cfg.retinex();
    let params = cfg.solver();
    let ibalm = enhance(img, None, &retinex, &params)?.trace;
    let ama = enhance(img, None, &retinex, &params.without_inertia())?.trace;
    let min_energy = ibalm
        .objective_values()
        .into_iter()
        .chain(ama.objective_values())
        .fold(f64::INFINITY, f64::min);
    let check = |t: &IterateTrace| descent_check(t, t.delta, params.epsilon, params.descent_rel_tol).passed();
    let outcome = BenchOutcome {
        name: name.to_string(),
        ibalm: ibalm.iterations_to_reach(min_energy, cfg.threshold),
        ama: ama.iterations_to_reach(min_energy, cfg.threshold),
        min_energy,
        ibalm_descent_ok: check(&ibalm),
        ama_descent_ok: check(&ama),
    };
    Ok((outcome, ibalm, ama))
}

/// The three bundled darkened scenes at `size × size`.
pub fn bundled_scenes(size: usize) -> Vec<(String, Image2D)> {
    Scene::ALL
        .iter()
        .map(|s| (s.name().to_string(), darken(&s.render(size, size), 2.5)))
        .collect()
}

pub fn cmd_bench(cfg: &RunConfig, out_dir: &Path, size: usize) -> Result<()> {
    let inputs = match &cfg.input {
        Some(p) => {
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "input".into());
            vec![(name, load_image(p)?.to_gray())]
        }
        None => {
            if size == 0 {
                bail!(ValidationError("--size must be positive".into()));
            }
            bundled_scenes(size)
        }
    };
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    for (name, img) in inputs {
        let (outcome, ti, ta) = compare(&name, &img, cfg)?;
        write_trace(&ti, &out_dir.join(format!("{name}_ibalm.csv")), cfg)?;
        write_trace(&ta, &out_dir.join(format!("{name}_ama.csv")), cfg)?;
        println!("{}", outcome.summary(cfg.threshold));
    }
    Ok(())
}

fn fmt_metric(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.4}")
    }
}

pub fn cmd_metrics(args: &MetricsArgs, out: &mut impl Write) -> Result<()> {
    let test = load_image(&args.test)?;
    let reference = load_image(&args.reference)?;
    if test.shape() != reference.shape() {
        bail!(ValidationError(format!(
            "image sizes differ: {:?} vs {:?}",
            test.shape(),
            reference.shape()
        )));
    }
    let report = match (&test, &reference) {
        (Raster::Gray(a), Raster::Gray(b)) => MetricReport::gray(a, b)?,
        (Raster::Rgb(a), Raster::Rgb(b)) => MetricReport::channels(a, b)?,
        _ => MetricReport::gray(&test.to_gray(), &reference.to_gray())?,
    };
    writeln!(out, "PSNR: {} dB", fmt_metric(report.psnr_db))?;
    writeln!(out, "SSIM: {}", fmt_metric(report.ssim))?;
    Ok(())
}
