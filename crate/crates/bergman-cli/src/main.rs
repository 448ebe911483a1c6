//! Command line front end for the bergman library.
//!
//! Every subcommand reads JSON inputs, runs one library pipeline, and emits
//! either CSV (sequences, matrices) or JSON (verdicts, certificates, reports)
//! on stdout. With an output file flag the same bytes go to the file instead
//! and a `<file>.manifest.json` sibling records the command, the full config
//! echo, the library version, the effective tolerances, and wall time. Data
//! outputs are byte-identical across reruns; only the manifest carries time.
//!
//! Exit codes: 0 success, 2 config or schema error, 3 numerical refusal
//! (ambiguous zero band, indeterminate rank, budget exhaustion, and the
//! like). Diagnostics go to stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use bergman::error::Error;
use bergman::harness::{run_experiment, ExperimentConfig};
use bergman::muntz::{
    muntz_distance, muntz_distance_gram, reciprocal_sum_class, trent_density_verdict,
    IntegerSetDesc, PairSetDesc, SumClass, TrentVerdict,
};
use bergman::operators::TruncatedOperator;
use bergman::quadrature::{slicing_check, QuadOptions};
use bergman::reconstruction::{
    build_constraints, nullspace_certificate_with, SIGMA_NONTRIVIAL, SIGMA_ONLY_ZERO,
};
use bergman::spectra::omega_with;
use bergman::symbols::parse_symbol;
use bergman::{Result, SpaceParams, SymbolExpr};
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

const DEFAULT_EPS_ZERO: f64 = 1e-10;
const DEFAULT_QUAD_TOL: f64 = 1e-12;

#[derive(Parser)]
#[command(
    name = "bergman",
    version,
    about = "Toeplitz operators on Bergman spaces of the unit ball: eigenvalue sequences, truncated products, density tests, moment certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate the eigenvalue sequence omega(f, s) of a radial symbol as CSV.
    Omega {
        /// Symbol JSON file (must be radial: all terms with p = q = 0).
        #[arg(long)]
        symbol: PathBuf,
        /// Ball dimension n; must match the symbol file.
        #[arg(long)]
        n: usize,
        /// Weight exponent alpha (> -1) of the measure (1 - |z|^2)^alpha.
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        /// Largest degree s to tabulate (rows s = 0..=smax).
        #[arg(long)]
        smax: u32,
        /// Write the CSV here instead of stdout; a manifest file is written alongside.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Certified quadrature tolerance for non-closed-form profiles.
        #[arg(long, default_value_t = DEFAULT_QUAD_TOL)]
        quad_tol: f64,
    },
    /// Zero-degree set W of a radial symbol under the two-band rule, as JSON.
    Wset {
        /// Symbol JSON file (radial; dimension read from the file).
        #[arg(long)]
        symbol: PathBuf,
        /// Zero threshold: |omega| <= eps is a zero, >= 10 eps is retained,
        /// anything between refuses with exit 3.
        #[arg(long, default_value_t = DEFAULT_EPS_ZERO)]
        eps: f64,
        /// Largest degree scanned.
        #[arg(long)]
        smax: u32,
        /// Weight exponent alpha (> -1).
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        alpha: f64,
    },
    /// Truncated Toeplitz matrix of a symbol as CSV (basis labels quoted).
    Matrix {
        /// Symbol JSON file (dimension read from the file).
        #[arg(long)]
        symbol: PathBuf,
        /// Truncation cutoff D: all monomials of total degree <= D.
        #[arg(long)]
        degree: u32,
        /// Write the CSV here instead of stdout; a manifest file is written alongside.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Weight exponent alpha (> -1).
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        alpha: f64,
    },
    /// Compose a chain of truncated Toeplitz operators and dump the product.
    Product {
        /// Config JSON: { "space": {...}, "cutoff": D, "factors": [symbol, ...] }.
        #[arg(long)]
        config: PathBuf,
        /// Write the JSON here instead of stdout; a manifest file is written alongside.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify the reciprocal sum of a structured integer set.
    MuntzSum {
        /// Integer set description JSON file.
        #[arg(long)]
        set: PathBuf,
        /// Write the JSON here instead of stdout; a manifest file is written alongside.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distance from t^lambda to span{t^lambda_j} in L^2(0,1), both evaluation paths.
    MuntzDist {
        /// Target exponent lambda (> -1/2).
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        /// Comma-separated span exponents, each > -1/2 (empty for the zero subspace).
        #[arg(long, allow_hyphen_values = true)]
        exponents: String,
        /// Write the JSON here instead of stdout; a manifest file is written alongside.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Density verdict for span{z^s conj(z)^t : (s,t) in M} with per-diagonal detail.
    TrentCheck {
        /// Pair set description JSON file.
        #[arg(long)]
        pairs: PathBuf,
        /// Diagonal range to report, as LO..HI (inclusive), e.g. -3..3.
        #[arg(long, allow_hyphen_values = true)]
        jband: String,
        /// Write the JSON here instead of stdout; a manifest file is written alongside.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the polar slicing identity for a polynomial symbol integrand.
    SliceCheck {
        /// Symbol JSON file (polynomial profiles only).
        #[arg(long)]
        symbol: PathBuf,
        /// Ball dimension n >= 2; must match the symbol file.
        #[arg(long)]
        n: usize,
        /// Write the JSON here instead of stdout; a manifest file is written alongside.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the moment-constraint system for excluded degrees W and certify its nullspace.
    Reconstruct {
        /// Comma-separated excluded total degrees, e.g. 0,2 (empty for none).
        #[arg(long = "W", default_value = "")]
        w: String,
        /// Support degree A: unknowns are pairs with |a|, |b| <= A.
        #[arg(long)]
        support: u32,
        /// Constraint degree D_c: rows from pairs with |m|, |k| <= D_c.
        #[arg(long)]
        dc: u32,
        /// Ball dimension n.
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Weight exponent alpha (> -1).
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        alpha: f64,
        /// Smallest equilibrated singular value that still proves triviality.
        #[arg(long, default_value_t = SIGMA_ONLY_ZERO)]
        sigma_only_zero: f64,
        /// Singular values below this certify a nontrivial nullspace.
        #[arg(long, default_value_t = SIGMA_NONTRIVIAL)]
        sigma_nontrivial: f64,
        /// Write the JSON here instead of stdout; a manifest file is written alongside.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a full zero-product experiment from a config file.
    ZpExperiment {
        /// Experiment config JSON file.
        #[arg(long)]
        config: PathBuf,
        /// Write the report here instead of stdout; a manifest file is written alongside.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match run(&cli.command, argv, start) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_config_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

/// Manifest data for one run; rendered only when an output file is written.
struct RunInfo {
    command: &'static str,
    argv: Vec<String>,
    start: Instant,
    tolerances: Value,
    config: Value,
}

impl RunInfo {
    fn render_manifest(&self) -> String {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        pretty(&json!({
            "argv": self.argv,
            "command": self.command,
            "config": self.config,
            "timestamp_unix_ms": timestamp,
            "tolerances": self.tolerances,
            "version": env!("CARGO_PKG_VERSION"),
            "wall_ms": self.start.elapsed().as_millis() as u64,
        }))
    }
}

fn tolerance_echo(eps_zero: f64, quad_tol: f64, sigma_only_zero: f64, sigma_nontrivial: f64) -> Value {
    json!({
        "eps_zero": eps_zero,
        "quadrature_tol": quad_tol,
        "sigma_nontrivial": sigma_nontrivial,
        "sigma_only_zero": sigma_only_zero,
    })
}

fn default_tolerances() -> Value {
    tolerance_echo(DEFAULT_EPS_ZERO, DEFAULT_QUAD_TOL, SIGMA_ONLY_ZERO, SIGMA_NONTRIVIAL)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Schema {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn load_symbol(path: &Path) -> Result<SymbolExpr> {
    parse_symbol(&read_text(path)?)
}

fn load_json_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::Schema {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Relative output paths land in $BERGMAN_OUT_DIR when it is set.
fn resolve_out(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os("BERGMAN_OUT_DIR") {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
        }
    }
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

/// Sends the payload to stdout, or to the file plus a manifest sibling.
fn emit(payload: &str, out: Option<&Path>, info: &RunInfo) -> Result<()> {
    let Some(out) = out else {
        print!("{payload}");
        return Ok(());
    };
    let data_path = resolve_out(out);
    write_file(&data_path, payload)?;
    let mut name = data_path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".manifest.json");
    let manifest_path = data_path.with_file_name(name);
    write_file(&manifest_path, &info.render_manifest())?;
    eprintln!("wrote {}", data_path.display());
    eprintln!("wrote {}", manifest_path.display());
    Ok(())
}

fn require_dim(sym: &SymbolExpr, n: usize) -> Result<()> {
    if sym.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: sym.dim(),
        });
    }
    Ok(())
}

fn require_radial(sym: &SymbolExpr) -> Result<()> {
    if !sym.is_radial() {
        return Err(Error::UnsupportedProfile(
            "symbol must be radial here (every term with p = q = 0)".into(),
        ));
    }
    Ok(())
}

fn quad_options(tol: f64) -> Result<QuadOptions> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidParam(format!(
            "quadrature tolerance {tol} must be positive and finite"
        )));
    }
    Ok(QuadOptions {
        tol,
        ..QuadOptions::default()
    })
}

/// omega of a radial symbol with several terms: the coefficient-weighted sum
/// of the per-profile eigenvalues, complex in general.
fn symbol_omega(sym: &SymbolExpr, s: f64, space: &SpaceParams, opts: &QuadOptions) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for term in sym.canonicalized().terms() {
        let (v, _) = omega_with(&term.rho, s, space, opts)?;
        total += term.coeff * v;
    }
    Ok(total)
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|part| {
            part.trim().parse::<f64>().map_err(|_| {
                Error::InvalidParam(format!("{what}: cannot parse {part:?} as a number"))
            })
        })
        .collect()
}

fn parse_u32_list(text: &str, what: &str) -> Result<Vec<u32>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|part| {
            part.trim().parse::<u32>().map_err(|_| {
                Error::InvalidParam(format!(
                    "{what}: cannot parse {part:?} as a nonnegative integer"
                ))
            })
        })
        .collect()
}

/// Inclusive integer range written LO..HI.
fn parse_jband(text: &str) -> Result<(i64, i64)> {
    let bad = || {
        Error::InvalidParam(format!(
            "jband {text:?} must look like LO..HI with integer endpoints, e.g. -3..3"
        ))
    };
    let (lo, hi) = text.split_once("..").ok_or_else(bad)?;
    let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(Error::InvalidParam(format!(
            "jband {text:?} is empty: {lo} > {hi}"
        )));
    }
    Ok((lo, hi))
}

fn csv_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Complex CSV cell: bare real part when the value is real, otherwise re+imi.
fn csv_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        csv_f64(z.re)
    } else if z.im < 0.0 {
        format!("{:?}{:?}i", z.re, z.im)
    } else {
        format!("{:?}+{:?}i", z.re, z.im)
    }
}

fn json_complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Matrix CSV: header row of quoted basis labels (they contain commas), one
/// row per basis element k, entries <T e_m, e_k> in basis order.
fn matrix_csv(op: &TruncatedOperator) -> String {
    let basis = op.basis();
    let size = basis.size();
    let mut out = String::from("\"\"");
    for m in basis.indices() {
        out.push_str(",\"");
        out.push_str(&m.to_string());
        out.push('"');
    }
    out.push('\n');
    for (row, k) in basis.indices().iter().enumerate() {
        out.push('"');
        out.push_str(&k.to_string());
        out.push('"');
        for col in 0..size {
            out.push(',');
            out.push_str(&csv_complex(op.matrix()[(row, col)]));
        }
        out.push('\n');
    }
    out
}

fn sum_class_str(class: SumClass) -> &'static str {
    match class {
        SumClass::Converges => "converges",
        SumClass::Diverges => "diverges",
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct ProductConfig {
    space: SpaceParams,
    cutoff: u32,
    factors: Vec<SymbolExpr>,
}

fn run(cmd: &Cmd, argv: Vec<String>, start: Instant) -> Result<()> {
    match cmd {
        Cmd::Omega {
            symbol,
            n,
            alpha,
            smax,
            csv,
            quad_tol,
        } => {
            let sym = load_symbol(symbol)?;
            require_dim(&sym, *n)?;
            require_radial(&sym)?;
            let space = SpaceParams::new(*n, *alpha)?;
            let opts = quad_options(*quad_tol)?;
            let mut table = String::from("s,omega_re,omega_im\n");
            for s in 0..=*smax {
                let v = symbol_omega(&sym, s as f64, &space, &opts)?;
                table.push_str(&format!("{s},{},{}\n", csv_f64(v.re), csv_f64(v.im)));
            }
            let info = RunInfo {
                command: "omega",
                argv,
                start,
                tolerances: tolerance_echo(DEFAULT_EPS_ZERO, *quad_tol, SIGMA_ONLY_ZERO, SIGMA_NONTRIVIAL),
                config: json!({
                    "alpha": alpha,
                    "csv": csv.as_ref().map(|p| p.display().to_string()),
                    "n": n,
                    "quad_tol": quad_tol,
                    "smax": smax,
                    "symbol": serde_json::to_value(&sym).expect("symbols serialize"),
                }),
            };
            emit(&table, csv.as_deref(), &info)
        }
        Cmd::Wset {
            symbol,
            eps,
            smax,
            alpha,
        } => {
            let sym = load_symbol(symbol)?;
            require_radial(&sym)?;
            if !(*eps > 0.0) || !eps.is_finite() {
                return Err(Error::InvalidParam(format!("eps = {eps} must be positive")));
            }
            let space = SpaceParams::new(sym.dim(), *alpha)?;
            let opts = QuadOptions::default();
            let mut degrees: Vec<u32> = Vec::new();
            let mut margin = f64::INFINITY;
            for s in 0..=*smax {
                let mag = symbol_omega(&sym, s as f64, &space, &opts)?.norm();
                if mag <= *eps {
                    degrees.push(s);
                } else if mag < 10.0 * *eps {
                    return Err(Error::AmbiguousZero {
                        s,
                        value: mag,
                        eps: *eps,
                    });
                } else {
                    margin = margin.min(mag);
                }
            }
            let payload = pretty(&json!({
                "W": degrees,
                "eps_zero": eps,
                "margin": margin,
                "s_max": smax,
            }));
            let info = RunInfo {
                command: "wset",
                argv,
                start,
                tolerances: tolerance_echo(*eps, DEFAULT_QUAD_TOL, SIGMA_ONLY_ZERO, SIGMA_NONTRIVIAL),
                config: json!({
                    "alpha": alpha,
                    "eps": eps,
                    "smax": smax,
                    "symbol": serde_json::to_value(&sym).expect("symbols serialize"),
                }),
            };
            emit(&payload, None, &info)
        }
        Cmd::Matrix {
            symbol,
            degree,
            csv,
            alpha,
        } => {
            let sym = load_symbol(symbol)?;
            let space = SpaceParams::new(sym.dim(), *alpha)?;
            let op = TruncatedOperator::assemble(&sym, &space, *degree)?;
            let info = RunInfo {
                command: "matrix",
                argv,
                start,
                tolerances: default_tolerances(),
                config: json!({
                    "alpha": alpha,
                    "csv": csv.as_ref().map(|p| p.display().to_string()),
                    "degree": degree,
                    "symbol": serde_json::to_value(&sym).expect("symbols serialize"),
                }),
            };
            emit(&matrix_csv(&op), csv.as_deref(), &info)
        }
        Cmd::Product { config, out } => {
            let cfg: ProductConfig = load_json_config(config)?;
            let space = SpaceParams::new(cfg.space.dimension, cfg.space.weight_alpha)?;
            if cfg.factors.is_empty() {
                return Err(Error::InvalidParam(
                    "product needs at least one factor symbol".into(),
                ));
            }
            let mut factors = cfg.factors.iter();
            let first = factors.next().expect("nonempty checked above");
            let mut product = TruncatedOperator::assemble(first, &space, cfg.cutoff)?;
            for f in factors {
                let op = TruncatedOperator::assemble(f, &space, cfg.cutoff)?;
                product = product.compose(&op)?;
            }
            let matrix: Vec<Vec<Value>> = (0..product.basis().size())
                .map(|row| {
                    (0..product.basis().size())
                        .map(|col| json_complex(product.matrix()[(row, col)]))
                        .collect()
                })
                .collect();
            let payload = pretty(&json!({
                "basis_size": product.basis().size(),
                "cutoff": cfg.cutoff,
                "diagonal": product.is_diagonal(),
                "exact_entries": product.exact_entries(),
                "frobenius_norm": product.frobenius_norm(),
                "matrix": matrix,
                "max_abs_entry": product.max_abs_entry(),
                "space": serde_json::to_value(space).expect("space serializes"),
            }));
            let info = RunInfo {
                command: "product",
                argv,
                start,
                tolerances: default_tolerances(),
                config: serde_json::to_value(&cfg).expect("config echo serializes"),
            };
            emit(&payload, out.as_deref(), &info)
        }
        Cmd::MuntzSum { set, out } => {
            let desc: IntegerSetDesc = load_json_config(set)?;
            desc.validate()?;
            let class = reciprocal_sum_class(&desc)?;
            let payload = pretty(&json!({
                "class": sum_class_str(class),
                "set": serde_json::to_value(&desc).expect("set desc serializes"),
            }));
            let info = RunInfo {
                command: "muntz-sum",
                argv,
                start,
                tolerances: default_tolerances(),
                config: serde_json::to_value(&desc).expect("set desc serializes"),
            };
            emit(&payload, out.as_deref(), &info)
        }
        Cmd::MuntzDist {
            lambda,
            exponents,
            out,
        } => {
            let exps = parse_f64_list(exponents, "exponents")?;
            let closed = muntz_distance(*lambda, &exps)?;
            let gram = muntz_distance_gram(*lambda, &exps)?;
            let payload = pretty(&json!({
                "closed_form": closed,
                "difference": (closed - gram).abs(),
                "exponents": exps,
                "gram": gram,
                "lambda": lambda,
            }));
            let info = RunInfo {
                command: "muntz-dist",
                argv,
                start,
                tolerances: default_tolerances(),
                config: json!({ "exponents": exps, "lambda": lambda }),
            };
            emit(&payload, out.as_deref(), &info)
        }
        Cmd::TrentCheck { pairs, jband, out } => {
            let desc: PairSetDesc = load_json_config(pairs)?;
            desc.validate()?;
            let (lo, hi) = parse_jband(jband)?;
            let report = trent_density_verdict(&desc, lo, hi)?;
            let per_diagonal: Vec<Value> = report
                .per_diagonal
                .iter()
                .map(|(j, class)| json!({ "class": sum_class_str(*class), "j": j }))
                .collect();
            let mut doc = serde_json::Map::new();
            doc.insert("j_band".into(), json!([lo, hi]));
            doc.insert("per_diagonal".into(), Value::Array(per_diagonal));
            match report.verdict {
                TrentVerdict::Dense => {
                    doc.insert("verdict".into(), json!("dense"));
                }
                TrentVerdict::NotDense { witness_j } => {
                    doc.insert("verdict".into(), json!("not_dense"));
                    doc.insert("witness_j".into(), json!(witness_j));
                }
            }
            let payload = pretty(&Value::Object(doc));
            let info = RunInfo {
                command: "trent-check",
                argv,
                start,
                tolerances: default_tolerances(),
                config: json!({
                    "jband": jband,
                    "pairs": serde_json::to_value(&desc).expect("pair desc serializes"),
                }),
            };
            emit(&payload, out.as_deref(), &info)
        }
        Cmd::SliceCheck { symbol, n, out } => {
            let sym = load_symbol(symbol)?;
            require_dim(&sym, *n)?;
            let space = SpaceParams::new(*n, 0.0)?;
            let report = slicing_check(&sym, &space)?;
            let payload = pretty(&json!({
                "discrepancy": report.discrepancy,
                "lhs": json_complex(report.lhs),
                "rhs": json_complex(report.rhs),
            }));
            let info = RunInfo {
                command: "slice-check",
                argv,
                start,
                tolerances: default_tolerances(),
                config: json!({
                    "n": n,
                    "symbol": serde_json::to_value(&sym).expect("symbols serialize"),
                }),
            };
            emit(&payload, out.as_deref(), &info)
        }
        Cmd::Reconstruct {
            w,
            support,
            dc,
            n,
            alpha,
            sigma_only_zero,
            sigma_nontrivial,
            out,
        } => {
            let zero_degrees = parse_u32_list(w, "W")?;
            let space = SpaceParams::new(*n, *alpha)?;
            let system = build_constraints(*support, &zero_degrees, *dc, &space)?;
            let certificate = nullspace_certificate_with(&system, *sigma_only_zero, *sigma_nontrivial)?;
            let payload = pretty(&json!({
                "certificate": serde_json::to_value(&certificate).expect("certificate serializes"),
                "constraint_degree": dc,
                "space": serde_json::to_value(space).expect("space serializes"),
                "support_degree": support,
                "zero_degrees": system.zero_degrees(),
            }));
            let info = RunInfo {
                command: "reconstruct",
                argv,
                start,
                tolerances: tolerance_echo(DEFAULT_EPS_ZERO, DEFAULT_QUAD_TOL, *sigma_only_zero, *sigma_nontrivial),
                config: json!({
                    "W": zero_degrees,
                    "alpha": alpha,
                    "dc": dc,
                    "n": n,
                    "support": support,
                }),
            };
            emit(&payload, out.as_deref(), &info)
        }
        Cmd::ZpExperiment { config, out } => {
            let cfg: ExperimentConfig = load_json_config(config)?;
            cfg.validate()?;
            let report = run_experiment(&cfg)?;
            let payload = pretty(&serde_json::to_value(&report).expect("report serializes"));
            let info = RunInfo {
                command: "zp-experiment",
                argv,
                start,
                tolerances: tolerance_echo(cfg.eps_zero, DEFAULT_QUAD_TOL, SIGMA_ONLY_ZERO, SIGMA_NONTRIVIAL),
                config: serde_json::to_value(&cfg).expect("config echo serializes"),
            };
            emit(&payload, out.as_deref(), &info)
        }
    }
}
