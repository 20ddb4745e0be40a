//! Command-line front end.
//!
//! Exit codes: 0 success, 1 internal failure, 2 unreadable or unparsable
//! input, 3 incompatible inputs (size or dimension), 4 a cloud that is not
//! principally generic given to `--metric sm`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::bottleneck::bottleneck_match;
use crate::cloud::{center, covariance, PointCloud};
use crate::error::Error;
use crate::linalg::eigen_sym;
use crate::metrics::{emd_oriented_report, lac_oriented_report, Mirrored, Orientation, Witness};
use crate::pci::{is_principally_generic, pcm, pcm_of, SignString, DEFAULT_REL_TOL};
use crate::wmi::{wmi_of, WmiParams, DEFAULT_QUANTUM, DEFAULT_TAU_DEP};

pub const SCHEMA: u32 = 1;
pub const THREADS_ENV: &str = "ISOCLOUDS_THREADS";
/// Values at most this multiple of the larger radius count as isometric.
pub const ISOMETRIC_REL_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "isoclouds",
    version,
    about = "Isometry invariants and distances of point clouds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct Tolerances {
    /// Relative eigenvalue-gap threshold for principal genericity.
    #[arg(long, global = true, default_value_t = DEFAULT_REL_TOL)]
    pub rel_tol: f64,
    /// Quantum used to canonicalize WMI matrices.
    #[arg(long, global = true, default_value_t = DEFAULT_QUANTUM)]
    pub quantum: f64,
    /// Relative residual below which a point sequence counts as degenerate.
    #[arg(long, global = true, default_value_t = DEFAULT_TAU_DEP)]
    pub tau_dep: f64,
}

impl Tolerances {
    fn wmi(&self) -> WmiParams {
        WmiParams {
            quantum: self.quantum,
            tau_dep: self.tau_dep,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the genericity report and invariants of one cloud.
    Invariant {
        file: PathBuf,
        /// Print every WMI matrix, not just the weights.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        json: bool,
    },
    /// Distance between two clouds.
    Dist {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum)]
        metric: Metric,
        /// Isometry class for lac and emd; sm always quotients out all isometries.
        #[arg(long, value_enum, default_value_t = Orientation::Full)]
        orientation: Orientation,
        /// Print the optimal matching or flow.
        #[arg(long)]
        witness: bool,
        #[arg(long)]
        json: bool,
    },
    /// Pairwise distance matrix of every cloud file in a directory.
    Matrix {
        dir: PathBuf,
        #[arg(long, value_enum)]
        metric: Metric,
        #[arg(long, value_enum, default_value_t = Orientation::Full)]
        orientation: Orientation,
        #[arg(long, value_enum, default_value_t = MatrixFormat::Csv)]
        output: MatrixFormat,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Sm,
    Lac,
    Emd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatrixFormat {
    Csv,
    Json,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn parse(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn mismatch(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }

    fn from_lib(e: Error, context: &str) -> Self {
        let code = match e {
            Error::NotGeneric(_) => 4,
            Error::InvalidInput(_) => 3,
            _ => 1,
        };
        Self {
            code,
            message: format!("{context}: {e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses the process arguments, runs the command, and returns the exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            print!("{out}");
            0
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

/// Runs a parsed command and returns what it would print to stdout.
pub fn execute(cli: &Cli) -> CliResult<String> {
    let tol = cli.tolerances;
    match &cli.command {
        Command::Invariant { file, full, json } => cmd_invariant(file, tol, *full, *json),
        Command::Dist {
            a,
            b,
            metric,
            orientation,
            witness,
            json,
        } => cmd_dist(a, b, *metric, *orientation, tol, *witness, *json),
        Command::Matrix {
            dir,
            metric,
            orientation,
            output,
        } => cmd_matrix(dir, *metric, *orientation, tol, *output),
    }
}

// ---------------------------------------------------------------------------
// input

/// Reads a cloud from `.xyz` (chemistry format, element symbol ignored) or
/// comma-separated text (one point per line, `#` comments).
pub fn read_cloud(path: &Path) -> CliResult<PointCloud> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::parse(format!("{}: cannot read: {e}", path.display())))?;
    let is_xyz = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("xyz"));
    let points = if is_xyz {
        parse_xyz(&text)
    } else {
        parse_csv(&text)
    }
    .map_err(|msg| CliError::parse(format!("{}: {msg}", path.display())))?;
    PointCloud::new(points).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

fn parse_real(field: &str, line: usize) -> Result<f64, String> {
    let x: f64 = field
        .trim()
        .parse()
        .map_err(|_| format!("line {line}: cannot parse {:?} as a number", field.trim()))?;
    if !x.is_finite() {
        return Err(format!("line {line}: non-finite coordinate"));
    }
    Ok(x)
}

pub fn parse_csv(text: &str) -> Result<Vec<Vec<f64>>, String> {
    let mut points: Vec<Vec<f64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let p = body
            .split(',')
            .map(|f| parse_real(f, line))
            .collect::<Result<Vec<f64>, _>>()?;
        if let Some(first) = points.first() {
            if p.len() != first.len() {
                return Err(format!(
                    "line {line}: expected {} coordinates, found {}",
                    first.len(),
                    p.len()
                ));
            }
        }
        points.push(p);
    }
    if points.is_empty() {
        return Err("no points".into());
    }
    Ok(points)
}

pub fn parse_xyz(text: &str) -> Result<Vec<Vec<f64>>, String> {
    let mut lines = text.lines().enumerate();
    let count: usize = loop {
        match lines.next() {
            None => return Err("no points".into()),
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((i, l)) => {
                break l
                    .trim()
                    .parse()
                    .map_err(|_| format!("line {}: expected the atom count", i + 1))?
            }
        }
    };
    lines.next(); // comment line
    let mut points = Vec::with_capacity(count);
    for (idx, raw) in lines {
        let line = idx + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if points.len() == count {
            return Err(format!("line {line}: more atoms than the declared {count}"));
        }
        if fields.len() < 4 {
            return Err(format!(
                "line {line}: expected an element and three coordinates"
            ));
        }
        points.push(
            fields[1..4]
                .iter()
                .map(|f| parse_real(f, line))
                .collect::<Result<Vec<f64>, _>>()?,
        );
    }
    if points.len() != count {
        return Err(format!("declared {count} atoms, found {}", points.len()));
    }
    if points.is_empty() {
        return Err("no points".into());
    }
    Ok(points)
}

// ---------------------------------------------------------------------------
// invariant

#[derive(Serialize)]
struct InvariantReport {
    schema: u32,
    file: String,
    points: usize,
    dimension: usize,
    generic: bool,
    gap: f64,
    threshold: f64,
    eigenvalues: Vec<f64>,
    pcm: Option<Vec<Vec<f64>>>,
    wmi: WmiSummary,
}

#[derive(Serialize)]
struct WmiSummary {
    sequences: u64,
    entries: Vec<WmiEntry>,
}

#[derive(Serialize)]
struct WmiEntry {
    weight: String,
    matrix: Vec<Vec<f64>>,
}

fn cmd_invariant(file: &Path, tol: Tolerances, full: bool, json: bool) -> CliResult<String> {
    let cloud = read_cloud(file)?;
    let ctx = file.display().to_string();
    let lib = |e| CliError::from_lib(e, &ctx);
    let c = center(&cloud).map_err(lib)?;
    let s = eigen_sym(&covariance(&c)).map_err(lib)?;
    let report = is_principally_generic(&s, tol.rel_tol);
    let pcm_rows = if report.is_generic {
        Some(pcm(&c, &s, tol.rel_tol).map_err(lib)?.matrix().to_rows())
    } else {
        None
    };
    let w = wmi_of(&cloud, tol.wmi()).map_err(lib)?;
    let inv = InvariantReport {
        schema: SCHEMA,
        file: ctx.clone(),
        points: cloud.len(),
        dimension: cloud.dim(),
        generic: report.is_generic,
        gap: report.gap,
        threshold: report.threshold_used,
        eigenvalues: s.eigenvalues().to_vec(),
        pcm: pcm_rows,
        wmi: WmiSummary {
            sequences: w.sequences(),
            entries: w
                .entries()
                .iter()
                .map(|e| WmiEntry {
                    weight: e.weight().to_string(),
                    matrix: e.matrix().to_rows(),
                })
                .collect(),
        },
    };
    if json {
        return Ok(to_json(&inv));
    }
    let mut out = String::new();
    let _ = writeln!(out, "file: {}", inv.file);
    let _ = writeln!(out, "points: {}", inv.points);
    let _ = writeln!(out, "dimension: {}", inv.dimension);
    let _ = writeln!(out, "generic: {}", inv.generic);
    let _ = writeln!(out, "gap: {} (threshold {})", inv.gap, inv.threshold);
    let _ = writeln!(out, "eigenvalues: {}", join(&inv.eigenvalues));
    if let Some(rows) = &inv.pcm {
        let _ = writeln!(out, "pcm:");
        write_rows(&mut out, rows, "  ");
    }
    let _ = writeln!(out, "wmi sequences: {}", inv.wmi.sequences);
    let _ = writeln!(out, "wmi entries: {}", inv.wmi.entries.len());
    for (i, e) in inv.wmi.entries.iter().enumerate() {
        let _ = writeln!(out, "  [{i}] weight {}", e.weight);
        if full {
            write_rows(&mut out, &e.matrix, "      ");
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// dist

#[derive(Serialize)]
struct DistReport {
    schema: u32,
    a: String,
    b: String,
    metric: Metric,
    orientation: Option<Orientation>,
    value: f64,
    isometric: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<DistWitness>,
}

#[derive(Serialize)]
struct DistWitness {
    /// Row signs applied to the first PCM (sm only).
    #[serde(skip_serializing_if = "Option::is_none")]
    signs: Option<Vec<i8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mirrored: Option<Mirrored>,
    #[serde(flatten)]
    witness: Witness,
}

struct Loaded {
    label: String,
    cloud: PointCloud,
}

fn load(path: &Path) -> CliResult<Loaded> {
    Ok(Loaded {
        label: path.display().to_string(),
        cloud: read_cloud(path)?,
    })
}

/// Rejects input pairs the metric cannot compare.
fn check_pair(a: &Loaded, b: &Loaded, metric: Metric) -> CliResult<()> {
    if a.cloud.dim() != b.cloud.dim() {
        return Err(CliError::mismatch(format!(
            "dimension mismatch: {} is in R^{} but {} is in R^{}",
            a.label,
            a.cloud.dim(),
            b.label,
            b.cloud.dim()
        )));
    }
    if metric != Metric::Emd && a.cloud.len() != b.cloud.len() {
        return Err(CliError::mismatch(format!(
            "{} needs clouds of equal size: {} has {} points but {} has {}",
            metric_name(metric),
            a.label,
            a.cloud.len(),
            b.label,
            b.cloud.len()
        )));
    }
    Ok(())
}

fn metric_name(m: Metric) -> &'static str {
    match m {
        Metric::Sm => "sm",
        Metric::Lac => "lac",
        Metric::Emd => "emd",
    }
}

/// The distance and its witness; `orientation` is ignored by sm.
fn distance(
    a: &Loaded,
    b: &Loaded,
    metric: Metric,
    orientation: Orientation,
    tol: Tolerances,
) -> CliResult<(f64, DistWitness)> {
    check_pair(a, b, metric)?;
    match metric {
        Metric::Sm => {
            let pa = pcm_of(&a.cloud, tol.rel_tol).map_err(|e| CliError::from_lib(e, &a.label))?;
            let pb = pcm_of(&b.cloud, tol.rel_tol).map_err(|e| CliError::from_lib(e, &b.label))?;
            let ctx = format!("{} vs {}", a.label, b.label);
            let mut best: Option<(f64, SignString, Vec<usize>)> = None;
            for sigma in SignString::all(pa.matrix().rows()) {
                let flipped = sigma
                    .apply(pa.matrix())
                    .map_err(|e| CliError::from_lib(e, &ctx))?;
                let m = bottleneck_match(&flipped, pb.matrix())
                    .map_err(|e| CliError::from_lib(e, &ctx))?;
                if best.as_ref().is_none_or(|(v, _, _)| m.value < *v) {
                    best = Some((m.value, sigma, m.matching));
                }
            }
            let (value, sigma, matching) = best.expect("at least one sign string");
            Ok((
                value,
                DistWitness {
                    signs: Some(sigma.signs().to_vec()),
                    mirrored: None,
                    witness: Witness::Assignment(matching),
                },
            ))
        }
        Metric::Lac | Metric::Emd => {
            let wa = wmi_of(&a.cloud, tol.wmi()).map_err(|e| CliError::from_lib(e, &a.label))?;
            let wb = wmi_of(&b.cloud, tol.wmi()).map_err(|e| CliError::from_lib(e, &b.label))?;
            let ctx = format!("{} vs {}", a.label, b.label);
            let r = if metric == Metric::Lac {
                lac_oriented_report(&wa, &wb, orientation)
            } else {
                emd_oriented_report(&wa, &wb, orientation)
            }
            .map_err(|e| CliError::from_lib(e, &ctx))?;
            Ok((
                r.value,
                DistWitness {
                    signs: None,
                    mirrored: Some(r.mirrored),
                    witness: r.witness,
                },
            ))
        }
    }
}

fn is_isometric(value: f64, a: &PointCloud, b: &PointCloud) -> bool {
    let radius = |c: &PointCloud| center(c).map(|c| c.radius()).unwrap_or(0.0);
    value <= ISOMETRIC_REL_TOL * radius(a).max(radius(b))
}

fn cmd_dist(
    a: &Path,
    b: &Path,
    metric: Metric,
    orientation: Orientation,
    tol: Tolerances,
    witness: bool,
    json: bool,
) -> CliResult<String> {
    let (la, lb) = (load(a)?, load(b)?);
    let (value, w) = distance(&la, &lb, metric, orientation, tol)?;
    let report = DistReport {
        schema: SCHEMA,
        a: la.label.clone(),
        b: lb.label.clone(),
        metric,
        orientation: (metric != Metric::Sm).then_some(orientation),
        value,
        isometric: is_isometric(value, &la.cloud, &lb.cloud),
        witness: witness.then_some(w),
    };
    if json {
        return Ok(to_json(&report));
    }
    let mut out = String::new();
    let _ = writeln!(out, "metric: {}", metric_name(metric));
    if let Some(o) = report.orientation {
        let _ = writeln!(out, "orientation: {}", orientation_name(o));
    }
    let _ = writeln!(out, "value: {}", report.value);
    let _ = writeln!(out, "isometric: {}", report.isometric);
    if let Some(w) = &report.witness {
        if let Some(signs) = &w.signs {
            let s: Vec<String> = signs
                .iter()
                .map(|x| if *x > 0 { "+" } else { "-" }.to_string())
                .collect();
            let _ = writeln!(out, "signs: {}", s.join(""));
        }
        match w.mirrored {
            Some(Mirrored::First) => {
                let _ = writeln!(out, "mirrored: {}", report.a);
            }
            Some(Mirrored::Second) => {
                let _ = writeln!(out, "mirrored: {}", report.b);
            }
            _ => {}
        }
        match &w.witness {
            Witness::Assignment(perm) => {
                let pairs: Vec<String> = perm
                    .iter()
                    .enumerate()
                    .map(|(i, j)| format!("{i}->{j}"))
                    .collect();
                let _ = writeln!(out, "assignment: {}", pairs.join(" "));
            }
            Witness::Flow(f) => {
                let _ = writeln!(out, "flow (units of 1/{}):", f.denominator());
                for i in 0..f.rows() {
                    let row: Vec<String> = (0..f.cols())
                        .map(|j| (f.get(i, j) * f.denominator()).to_integer().to_string())
                        .collect();
                    let _ = writeln!(out, "  {}", row.join(" "));
                }
            }
        }
    }
    Ok(out)
}

fn orientation_name(o: Orientation) -> &'static str {
    match o {
        Orientation::Rigid => "rigid",
        Orientation::Full => "full",
    }
}

// ---------------------------------------------------------------------------
// matrix

#[derive(Serialize)]
struct MatrixReport {
    schema: u32,
    metric: Metric,
    orientation: Option<Orientation>,
    labels: Vec<String>,
    matrix: Vec<Vec<f64>>,
}

fn cloud_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let entries = fs::read_dir(dir)
        .map_err(|e| CliError::parse(format!("{}: cannot read directory: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension().and_then(|e| e.to_str()).is_some_and(|e| {
                    matches!(e.to_ascii_lowercase().as_str(), "csv" | "xyz" | "txt")
                })
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::parse(format!(
            "{}: no .csv, .txt or .xyz files",
            dir.display()
        )));
    }
    Ok(files)
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::parse(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))
        })?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError {
        code: 1,
        message: format!("cannot start worker threads: {e}"),
    })
}

fn cmd_matrix(
    dir: &Path,
    metric: Metric,
    orientation: Orientation,
    tol: Tolerances,
    output: MatrixFormat,
) -> CliResult<String> {
    let files = cloud_files(dir)?;
    let clouds = files
        .iter()
        .map(|p| load(p))
        .collect::<CliResult<Vec<_>>>()?;
    let labels: Vec<String> = files
        .iter()
        .map(|p| {
            p.file_name().map_or_else(
                || p.display().to_string(),
                |f| f.to_string_lossy().into_owned(),
            )
        })
        .collect();
    let dim = clouds[0].cloud.dim();
    if let Some(bad) = clouds.iter().find(|c| c.cloud.dim() != dim) {
        return Err(CliError::mismatch(format!(
            "{} is in R^{} but {} is in R^{dim}",
            bad.label,
            bad.cloud.dim(),
            clouds[0].label
        )));
    }
    let k = clouds.len();
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let values = thread_pool()?.install(|| {
        pairs
            .par_iter()
            .map(|&(i, j)| {
                distance(&clouds[i], &clouds[j], metric, orientation, tol).map(|(v, _)| v)
            })
            .collect::<CliResult<Vec<f64>>>()
    })?;
    let mut matrix = vec![vec![0.0; k]; k];
    for (&(i, j), &v) in pairs.iter().zip(&values) {
        matrix[i][j] = v;
        matrix[j][i] = v;
    }
    match output {
        MatrixFormat::Json => Ok(to_json(&MatrixReport {
            schema: SCHEMA,
            metric,
            orientation: (metric != Metric::Sm).then_some(orientation),
            labels,
            matrix,
        })),
        MatrixFormat::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, ",{}", labels.join(","));
            for (label, row) in labels.iter().zip(&matrix) {
                let _ = writeln!(out, "{label},{}", join_sep(row, ","));
            }
            Ok(out)
        }
    }
}

// ---------------------------------------------------------------------------
// formatting

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn join(xs: &[f64]) -> String {
    join_sep(xs, " ")
}

fn join_sep(xs: &[f64], sep: &str) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

fn write_rows(out: &mut String, rows: &[Vec<f64>], indent: &str) {
    for r in rows {
        let _ = writeln!(out, "{indent}{}", join(r));
    }
}
