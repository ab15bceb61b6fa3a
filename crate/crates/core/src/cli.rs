//! Command-line front end: `framekit <command> [flags]`.
//!
//! Exit codes: 0 success, 1 a verification suite failed, 2 usage error or
//! malformed input, 3 numerical degeneracy.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::constructions::{construct, ConstructedFrame, ConstructionSpec};
use crate::error::FrameError;
use crate::frame::{dual_frame, frame_coefficients, optimal_bounds, BoundsKind, FrameFamily, IndexSet};
use crate::linalg::TolerancePolicy;
use crate::projection::{diagnostics, permute, Permutation, CSV_HEADER};
use crate::subframe::{extract_riesz_basis, riesz_frame_bound, SubsetMode, EXHAUSTIVE_LIMIT};
use crate::verify::{run_suite, Suite, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const DEFAULT_SAMPLES: usize = 1000;

#[derive(Parser, Debug)]
#[command(name = "framekit", version, about = "Finite frames, Riesz frames and the projection method")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Eigenvalue tolerance (must not exceed --rank-tol)
    #[arg(long, global = true, value_name = "EIG_TOL")]
    tol: Option<f64>,
    /// Relative rank tolerance
    #[arg(long = "rank-tol", global = true, value_name = "REL")]
    rank_tol: Option<f64>,
    /// Seed for every random choice
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format; csv is available for `project` only
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimal frame bounds of every kind
    Bounds { frame: PathBuf },
    /// Canonical dual frame, written as a frame file
    Dual { frame: PathBuf },
    /// Frame coefficients of a vector
    Coeffs {
        frame: PathBuf,
        /// JSON array, or an object {"vector": [...]}
        #[arg(long, value_name = "FILE")]
        vector: PathBuf,
    },
    /// Worst frame-sequence bounds over subsets
    Subframe {
        frame: PathBuf,
        /// Enumerate every nonempty subset (families of at most 22 vectors)
        #[arg(long, conflicts_with = "samples")]
        exhaustive: bool,
        /// Random subsets on top of all singletons, pairs and the full set
        #[arg(long, value_name = "N")]
        samples: Option<usize>,
    },
    /// Greedy Riesz basis contained in the family
    ExtractBasis { frame: PathBuf },
    /// Build a family from a construction spec file
    Construct { spec: PathBuf },
    /// Projection-method diagnostics.
    ///
    /// CSV columns: level,l2_error,max_coord_error,max_dual_norm
    Project {
        frame: PathBuf,
        /// JSON array, or an object {"vector": [...]}
        #[arg(long, value_name = "FILE")]
        vector: PathBuf,
        /// Inclusive level range `a..b`, or a single level
        #[arg(long, value_name = "A..B")]
        levels: String,
        /// Reorder the family first: a seed, or a JSON file holding an index array
        #[arg(long, value_name = "SEED|FILE")]
        permute: Option<String>,
        /// Comma-separated indices to track (default: all indices below the first level)
        #[arg(long, value_name = "I,J,...")]
        track: Option<String>,
    },
    /// Run a property battery: prop23, thm24, cor26, thm32 or thm41
    Verify {
        suite: String,
        /// Number of random instances (default depends on the suite)
        #[arg(long)]
        trials: Option<usize>,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Numerical(String),
}

impl From<FrameError> for CliError {
    fn from(e: FrameError) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Runs the command line `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with_io<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Numerical(msg)) => {
            let _ = writeln!(err, "numerical error: {msg}");
            EXIT_NUMERICAL
        }
    }
}

fn tolerances(g: &GlobalOpts) -> CliResult<TolerancePolicy> {
    let mut tol = TolerancePolicy::default();
    if let Some(r) = g.rank_tol {
        tol.rank_tol_rel = r;
    }
    if let Some(e) = g.tol {
        tol.eig_tol = e;
    }
    tol.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(tol)
}

fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn parse_as<T: for<'de> Deserialize<'de>>(path: &Path, v: Value) -> CliResult<T> {
    serde_json::from_value(v).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Loads a frame file, or the family inside a constructed-frame file.
fn load_frame(path: &Path) -> CliResult<FrameFamily> {
    let v = read_json(path)?;
    if v.get("ground_truth").is_some() {
        Ok(parse_as::<ConstructedFrame>(path, v)?.family)
    } else {
        parse_as(path, v)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorFile {
    vector: Vec<f64>,
}

fn load_vector(path: &Path) -> CliResult<Vec<f64>> {
    let v = read_json(path)?;
    let vector: Vec<f64> = if v.is_array() {
        parse_as(path, v)?
    } else {
        parse_as::<VectorFile>(path, v)?.vector
    };
    if vector.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Usage(format!("{}: vector has a non-finite entry", path.display())));
    }
    Ok(vector)
}

fn parse_levels(s: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::Usage(format!("--levels: expected `a..b` or a single level, got '{s}'"));
    let num = |x: &str| x.trim().parse::<usize>().map_err(|_| bad());
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.trim_start_matches('='))?),
        None => {
            let n = num(s)?;
            (n, n)
        }
    };
    if a == 0 || a > b {
        return Err(CliError::Usage(format!("--levels: need 1 <= a <= b, got '{s}'")));
    }
    Ok((a..=b).collect())
}

fn parse_track(s: &str, len: usize) -> CliResult<IndexSet> {
    let idx = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("--track: '{t}' is not an index")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(IndexSet::from_unsorted(idx, len)?)
}

fn load_permutation(arg: &str, len: usize) -> CliResult<Permutation> {
    if let Ok(seed) = arg.parse::<u64>() {
        return Ok(Permutation::random(len, seed, 0));
    }
    let path = Path::new(arg);
    let v = read_json(path)?;
    let p: Permutation = parse_as(path, v)?;
    Ok(p)
}

/// Adds the tolerances and seed to an object report.
fn envelope<T: Serialize>(report: &T, tol: &TolerancePolicy, seed: u64) -> CliResult<Value> {
    let mut v = serde_json::to_value(report).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Value::Object(map) = &mut v {
        map.insert("tolerances".into(), serde_json::to_value(tol).expect("plain struct"));
        map.insert("seed".into(), json!(seed));
    }
    Ok(v)
}

fn emit(g: &GlobalOpts, text: &str, out: &mut dyn Write) -> CliResult<()> {
    match &g.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Usage(format!("stdout: {e}"))),
    }
}

fn emit_json(g: &GlobalOpts, v: &Value, out: &mut dyn Write) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(v).map_err(|e| CliError::Usage(e.to_string()))?;
    text.push('\n');
    emit(g, &text, out)
}

fn json_only(g: &GlobalOpts, command: &str) -> CliResult<()> {
    if g.format == Format::Csv {
        return Err(CliError::Usage(format!("--format csv is only available for `project`, not `{command}`")));
    }
    Ok(())
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let g = &cli.global;
    let tol = tolerances(g)?;
    match &cli.command {
        Command::Bounds { frame } => {
            json_only(g, "bounds")?;
            let f = load_frame(frame)?;
            let space = optimal_bounds(&f, BoundsKind::FrameForSpace, &tol)?;
            let seq = optimal_bounds(&f, BoundsKind::FrameSequence, &tol)?;
            let riesz = match optimal_bounds(&f, BoundsKind::RieszConstants, &tol) {
                Ok(b) => json!({"lower": b.lower, "upper": b.upper}),
                Err(FrameError::NotLinearlyIndependent { .. }) => Value::Null,
                Err(e) => return Err(e.into()),
            };
            let report = json!({
                "lower": space.lower,
                "upper": space.upper,
                "kind": space.kind,
                "frame_sequence": {"lower": seq.lower, "upper": seq.upper},
                "riesz_constants": riesz,
            });
            emit_json(g, &envelope(&report, &tol, g.seed)?, out)?;
        }
        Command::Dual { frame } => {
            json_only(g, "dual")?;
            let f = load_frame(frame)?;
            let d = dual_frame(&f, &tol)?;
            emit_json(g, &serde_json::to_value(&d).expect("frame serializes"), out)?;
        }
        Command::Coeffs { frame, vector } => {
            json_only(g, "coeffs")?;
            let f = load_frame(frame)?;
            let v = load_vector(vector)?;
            let c = frame_coefficients(&f, &v, &tol)?;
            emit_json(g, &envelope(&json!({"coefficients": c}), &tol, g.seed)?, out)?;
        }
        Command::Subframe {
            frame,
            exhaustive,
            samples,
        } => {
            json_only(g, "subframe")?;
            let f = load_frame(frame)?;
            let mode = if *exhaustive {
                SubsetMode::Exhaustive
            } else if let Some(n) = samples {
                SubsetMode::Sampled {
                    n_samples: *n,
                    seed: g.seed,
                }
            } else if f.len() <= EXHAUSTIVE_LIMIT {
                SubsetMode::Exhaustive
            } else {
                SubsetMode::Sampled {
                    n_samples: DEFAULT_SAMPLES,
                    seed: g.seed,
                }
            };
            let r = riesz_frame_bound(&f, mode, &tol)?;
            emit_json(g, &envelope(&r, &tol, g.seed)?, out)?;
        }
        Command::ExtractBasis { frame } => {
            json_only(g, "extract-basis")?;
            let f = load_frame(frame)?;
            let (idx, c) = extract_riesz_basis(&f, &tol)?;
            let report = json!({
                "indices": idx,
                "riesz_constants": {"lower": c.lower, "upper": c.upper},
                "basis": f.subfamily(&idx),
            });
            emit_json(g, &envelope(&report, &tol, g.seed)?, out)?;
        }
        Command::Construct { spec } => {
            json_only(g, "construct")?;
            let v = read_json(spec)?;
            let s: ConstructionSpec = parse_as(spec, v)?;
            let c = construct(&s)?;
            emit_json(g, &serde_json::to_value(&c).expect("construction serializes"), out)?;
        }
        Command::Project {
            frame,
            vector,
            levels,
            permute: perm,
            track,
        } => {
            let mut f = load_frame(frame)?;
            let v = load_vector(vector)?;
            let levels = parse_levels(levels)?;
            let permutation = match perm {
                Some(p) => {
                    let p = load_permutation(p, f.len())?;
                    f = permute(&f, &p)?;
                    Some(p)
                }
                None => None,
            };
            let tracked = match track {
                Some(t) => parse_track(t, f.len())?,
                None => IndexSet::range(0, levels[0].min(f.len())),
            };
            let d = diagnostics(&f, &v, &levels, &tracked, &tol)?;
            match g.format {
                Format::Csv => {
                    debug_assert!(d.to_csv().starts_with(CSV_HEADER));
                    emit(g, &d.to_csv(), out)?;
                }
                Format::Json => {
                    let mut report = envelope(&d, &tol, g.seed)?;
                    if let (Value::Object(map), Some(p)) = (&mut report, permutation) {
                        map.insert("permutation".into(), json!(p));
                    }
                    emit_json(g, &report, out)?;
                }
            }
        }
        Command::Verify { suite, trials } => {
            json_only(g, "verify")?;
            let suite: Suite = suite.parse()?;
            let cfg = VerifyConfig {
                trials: trials.unwrap_or(suite.default_trials()),
                seed: g.seed,
                tol,
            };
            let report = run_suite(suite, &cfg)?;
            let _ = err.write_all(report.summary().as_bytes());
            emit_json(g, &serde_json::to_value(&report).expect("report serializes"), out)?;
            if !report.passed {
                return Ok(EXIT_PROPERTY_FAILURE);
            }
        }
    }
    Ok(EXIT_OK)
}
