//! Command-line front end.
//!
//! Four subcommands share a global `--config <path>` key-value file and a
//! `--degrees` switch. Flags given on the command line win over file entries.
//! Every command is deterministic: the same inputs give the same bytes.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::entanglement::{
    analytic_entropy, concurrence, entropy_of_entanglement, negativity, MixedMeasure,
};
use crate::error::Error;
use crate::numerics::{c64, C64};
use crate::optimizer::{optimize, GainConfig, OptimizationResult};
use crate::postselection::{postselect_mixed, postselect_pure, Port};
use crate::scenario::{EnvOverlap, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "mzent",
    version,
    about = "Post-selected entanglement in a Mach-Zehnder interferometer"
)]
pub struct Cli {
    /// Key-value file (`key = value`, `#` comments); flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Read angles in degrees instead of radians.
    #[arg(long, global = true)]
    pub degrees: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report click probabilities, conditional states and their entanglement.
    Demo(DemoArgs),
    /// Entropy of the R-click state over a grid of couplings.
    Heatmap(HeatmapArgs),
    /// Mixed-state entanglement as the environment overlap goes from 0 to 1.
    Decohere(DecohereArgs),
    /// Maximize the net gain over the retain fraction and the local correction.
    Optimize(OptimizeArgs),
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long)]
    pub theta1: Option<f64>,
    #[arg(long)]
    pub theta2: Option<f64>,
    /// Environment overlap, `re` or `re,im`.
    #[arg(long, value_parser = parse_gamma)]
    pub gamma: Option<C64>,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecohereArgs {
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub gain: Option<f64>,
    #[arg(long)]
    pub loss: Option<f64>,
    #[arg(long = "w-grid")]
    pub w_grid: Option<usize>,
    #[arg(long = "u-grid")]
    pub u_grid: Option<usize>,
    #[arg(long)]
    pub refine: Option<usize>,
    /// formation, negativity or concurrence.
    #[arg(long)]
    pub measure: Option<MixedMeasure>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure of a CLI run, split by exit status.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::OutOfRange { .. } | Error::AsymmetricCoupling(..) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Formats a number for output: 12 significant digits, then the shortest
/// representation that reads back to the same value. Negative zero prints
/// as zero.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{rounded:?}")
}

fn fmt_complex(z: C64) -> String {
    if z.im == 0.0 {
        return fmt_num(z.re);
    }
    let im = fmt_num(z.im);
    if im.starts_with('-') {
        format!("{}{}i", fmt_num(z.re), im)
    } else {
        format!("{}+{}i", fmt_num(z.re), im)
    }
}

/// Parses `re` or `re,im`.
pub fn parse_gamma(s: &str) -> std::result::Result<C64, String> {
    let mut parts = s.split(',');
    let re = parts.next().unwrap_or("").trim();
    let im = parts.next().map(str::trim);
    if parts.next().is_some() {
        return Err(format!("expected `re` or `re,im`, got `{s}`"));
    }
    let num = |t: &str| {
        t.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("`{t}` is not a finite number"))
    };
    Ok(c64(num(re)?, im.map(num).transpose()?.unwrap_or(0.0)))
}

/// Entries of a `--config` file, keyed by flag name with `_` read as `-`.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

const CONFIG_KEYS: [&str; 14] = [
    "theta1", "theta2", "gamma", "theta", "grid", "out", "svg", "gain", "loss", "w-grid", "u-grid",
    "refine", "measure", "degrees",
];

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected `key = value`", n + 1))
            })?;
            let key = k.trim().replace('_', "-");
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!(
                    "config line {}: unknown key `{}`",
                    n + 1,
                    k.trim()
                )));
            }
            entries.insert(key, v.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Runtime(format!("reading {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn value<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{v}`")))
            })
            .transpose()
    }
}

fn merged<T: std::str::FromStr>(
    flag: Option<T>,
    cfg: &ConfigFile,
    key: &str,
) -> CliResult<Option<T>> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => cfg.value(key),
    }
}

fn required<T>(v: Option<T>, key: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Usage(format!("missing --{key}")))
}

fn grid_size(n: usize, key: &str) -> CliResult<usize> {
    if n < 2 {
        return Err(CliError::Usage(format!(
            "--{key} must be at least 2, got {n}"
        )));
    }
    Ok(n)
}

/// Angle settings after unit conversion.
#[derive(Debug, Clone, Copy)]
struct Units {
    degrees: bool,
}

impl Units {
    fn angle(self, x: f64) -> f64 {
        if self.degrees {
            x.to_radians()
        } else {
            x
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status. Reports go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let degrees = cli.degrees || cfg.value::<bool>("degrees")?.unwrap_or(false);
    let units = Units { degrees };
    let text = match &cli.command {
        Command::Demo(a) => {
            let t1 = units.angle(required(merged(a.theta1, &cfg, "theta1")?, "theta1")?);
            let t2 = units.angle(required(merged(a.theta2, &cfg, "theta2")?, "theta2")?);
            let gamma = match a.gamma {
                Some(g) => g,
                None => match cfg.get("gamma") {
                    Some(v) => parse_gamma(v)
                        .map_err(|m| CliError::Usage(format!("config key `gamma`: {m}")))?,
                    None => c64(1.0, 0.0),
                },
            };
            let s = Scenario::new(t1, t2)?.with_gamma(EnvOverlap::new(gamma)?);
            demo_report(&s)?
        }
        Command::Heatmap(a) => {
            let n = grid_size(required(merged(a.grid, &cfg, "grid")?, "grid")?, "grid")?;
            let csv_path = required(merged(a.out.clone(), &cfg, "out")?, "out")?;
            let svg_path = merged(a.svg.clone(), &cfg, "svg")?;
            let cells = heatmap_cells(n)?;
            write_file(&csv_path, &heatmap_csv(&cells))?;
            if let Some(p) = svg_path {
                write_file(&p, &heatmap_svg(n, &cells))?;
            }
            format!("wrote {} cells to {}\n", cells.len(), csv_path.display())
        }
        Command::Decohere(a) => {
            let theta = units.angle(required(merged(a.theta, &cfg, "theta")?, "theta")?);
            let n = grid_size(required(merged(a.grid, &cfg, "grid")?, "grid")?, "grid")?;
            let path = required(merged(a.out.clone(), &cfg, "out")?, "out")?;
            let rows = decohere_rows(theta, n)?;
            write_file(&path, &decohere_csv(&rows))?;
            format!("wrote {} rows to {}\n", rows.len(), path.display())
        }
        Command::Optimize(a) => {
            let theta = units.angle(required(merged(a.theta, &cfg, "theta")?, "theta")?);
            let defaults = GainConfig::default();
            let g = GainConfig {
                gain: required(merged(a.gain, &cfg, "gain")?, "gain")?,
                loss: required(merged(a.loss, &cfg, "loss")?, "loss")?,
                w_grid: merged(a.w_grid, &cfg, "w-grid")?.unwrap_or(defaults.w_grid),
                su2_grid: merged(a.u_grid, &cfg, "u-grid")?.unwrap_or(defaults.su2_grid),
                refine_iters: merged(a.refine, &cfg, "refine")?.unwrap_or(defaults.refine_iters),
                measure: merged(a.measure, &cfg, "measure")?.unwrap_or(defaults.measure),
            };
            g.validate()?;
            let path = required(merged(a.out.clone(), &cfg, "out")?, "out")?;
            let s = Scenario::symmetric(theta)?;
            let r = optimize(&s, &g)?;
            write_file(&path, &profile_csv(&r))?;
            optimize_summary(&r)
        }
    };
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Runtime(format!("writing report: {e}")))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if path.as_os_str().is_empty() {
        return Err(CliError::Usage("output path is empty".into()));
    }
    std::fs::write(path, contents)
        .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))
}

/// Text report for a single scenario.
pub fn demo_report(s: &Scenario) -> CliResult<String> {
    let mut r = String::new();
    let gamma = s.gamma.value();
    let _ = writeln!(r, "theta1 = {}", fmt_num(s.theta1.radians()));
    let _ = writeln!(r, "theta2 = {}", fmt_num(s.theta2.radians()));
    let _ = writeln!(r, "gamma = {}", fmt_complex(gamma));
    let states: Vec<_> = Port::ALL.iter().map(|&p| postselect_pure(s, p)).collect();
    for c in &states {
        let _ = writeln!(r, "P_{} = {}", c.port, fmt_num(c.probability()));
    }
    for c in &states {
        let amps: Vec<String> = c
            .amplitudes
            .amplitudes()
            .iter()
            .map(|&z| fmt_complex(z))
            .collect();
        let _ = writeln!(r, "{} amplitudes = [{}]", c.port, amps.join(", "));
        if c.is_dark() {
            let _ = writeln!(r, "{} entropy = dark port", c.port);
        } else {
            let e = entropy_of_entanglement(&c.normalized()?)?;
            let _ = writeln!(r, "{} entropy = {}", c.port, fmt_num(e.value));
        }
    }
    if gamma != c64(1.0, 0.0) {
        for port in Port::ALL {
            let rho = postselect_mixed(s, port);
            if rho.trace() <= crate::postselection::DARK_THRESHOLD {
                let _ = writeln!(r, "{port} mixed = dark port");
                continue;
            }
            let n = negativity(&rho)?;
            let c = concurrence(&rho)?;
            let _ = writeln!(r, "{port} negativity = {}", fmt_num(n.value));
            let _ = writeln!(r, "{port} concurrence = {}", fmt_num(c.value));
        }
    }
    Ok(r)
}

/// `(x1, x2, S)` in row-major order (`x1` outer) on the grid `x = k/n`,
/// `k = 1..=n`, so the dark corner `x1 = x2 = 0` is never sampled.
pub fn heatmap_cells(n: usize) -> CliResult<Vec<(f64, f64, f64)>> {
    let xs: Vec<f64> = (1..=n).map(|k| k as f64 / n as f64).collect();
    let cells: crate::Result<Vec<_>> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (x1, x2) = (xs[idx / n], xs[idx % n]);
            analytic_entropy(x1, x2).map(|e| (x1, x2, e.value))
        })
        .collect();
    Ok(cells?)
}

pub fn heatmap_csv(cells: &[(f64, f64, f64)]) -> String {
    let mut s = String::from("x1,x2,S\n");
    for &(x1, x2, e) in cells {
        let _ = writeln!(s, "{},{},{}", fmt_num(x1), fmt_num(x2), fmt_num(e));
    }
    s
}

/// Grayscale SVG of the heatmap cells, `x1` to the right and `x2` upward.
pub fn heatmap_svg(n: usize, cells: &[(f64, f64, f64)]) -> String {
    const MARGIN: f64 = 60.0;
    const PLOT: f64 = 480.0;
    let size = PLOT + 2.0 * MARGIN;
    let cell = PLOT / n as f64;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>"#
    );
    let _ = writeln!(s, r#"<g shape-rendering="crispEdges">"#);
    for (idx, &(_, _, e)) in cells.iter().enumerate() {
        let (i, j) = (idx / n, idx % n);
        let level = (e.clamp(0.0, 1.0) * 255.0).round() as u8;
        let x = MARGIN + i as f64 * cell;
        let y = MARGIN + PLOT - (j + 1) as f64 * cell;
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="rgb({level},{level},{level})"/>"#,
            fmt_num(x),
            fmt_num(y),
            fmt_num(cell),
            fmt_num(cell)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{PLOT}" height="{PLOT}" fill="none" stroke="black"/>"#
    );
    for (t, label) in [(0.0, "0"), (0.5, "0.5"), (1.0, "1")] {
        let px = MARGIN + t * PLOT;
        let py = MARGIN + PLOT - t * PLOT;
        let base = MARGIN + PLOT;
        let _ = writeln!(
            s,
            r#"<line x1="{px}" y1="{base}" x2="{px}" y2="{}" stroke="black"/>"#,
            base + 6.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{px}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">{label}</text>"#,
            base + 22.0
        );
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{py}" x2="{MARGIN}" y2="{py}" stroke="black"/>"#,
            MARGIN - 6.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="end">{label}</text>"#,
            MARGIN - 10.0,
            py + 5.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="16" text-anchor="middle">x1</text>"#,
        MARGIN + PLOT / 2.0,
        size - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" font-family="sans-serif" font-size="16" text-anchor="middle">x2</text>"#,
        MARGIN + PLOT / 2.0
    );
    let _ = writeln!(s, "</svg>");
    s
}

/// One row of a decoherence sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecohereRow {
    pub gamma: f64,
    pub port: Port,
    pub negativity: f64,
    pub concurrence: f64,
}

/// Sweeps real `γ_j = j/(n−1)` at equal couplings `θ ∈ (0, π/2]`, port R
/// before U at each `γ`.
pub fn decohere_rows(theta: f64, n: usize) -> CliResult<Vec<DecohereRow>> {
    if theta.is_nan() || theta <= 0.0 {
        return Err(CliError::Usage(format!(
            "--theta must lie in (0, pi/2], got {theta}"
        )));
    }
    let base = Scenario::symmetric(theta)?;
    let rows: crate::Result<Vec<DecohereRow>> = (0..2 * n)
        .into_par_iter()
        .map(|idx| {
            let gamma = (idx / 2) as f64 / (n - 1) as f64;
            let port = Port::ALL[idx % 2];
            let rho = postselect_mixed(&base.with_gamma(EnvOverlap::real(gamma)?), port);
            Ok(DecohereRow {
                gamma,
                port,
                negativity: negativity(&rho)?.value,
                concurrence: concurrence(&rho)?.value,
            })
        })
        .collect();
    Ok(rows?)
}

pub fn decohere_csv(rows: &[DecohereRow]) -> String {
    let mut s = String::from("gamma,port,negativity,concurrence\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt_num(r.gamma),
            r.port,
            fmt_num(r.negativity),
            fmt_num(r.concurrence)
        );
    }
    s
}

pub fn profile_csv(r: &OptimizationResult) -> String {
    let mut s = String::from("w,best_N_over_U\n");
    for &(w, n) in &r.w_profile {
        let _ = writeln!(s, "{},{}", fmt_num(w), fmt_num(n));
    }
    s
}

pub fn optimize_summary(r: &OptimizationResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "w* = {}", fmt_num(r.w_star));
    let _ = writeln!(s, "alpha = {}", fmt_num(r.angles.alpha));
    let _ = writeln!(s, "beta = {}", fmt_num(r.angles.beta));
    let _ = writeln!(s, "gamma = {}", fmt_num(r.angles.gamma));
    let _ = writeln!(s, "N* = {}", fmt_num(r.n_star));
    let _ = writeln!(
        s,
        "E1 ({}) = {}",
        r.e1_at_opt.measure,
        fmt_num(r.e1_at_opt.value)
    );
    let _ = writeln!(s, "probes = {}", r.probe_count);
    s
}
