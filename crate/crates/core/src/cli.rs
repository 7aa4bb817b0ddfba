//! Command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input, 3 missing capability or nonsmooth
//! point, 4 convergence failure, 1 internal error.

use std::io::{Read, Write};
use std::sync::Arc;

use clap::{Parser, ValueEnum};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::linalg::{commutator, eig_sym, svd, Matrix, SymMatrix};
use crate::singular::SingularFunction;
use crate::solver::ProblemConfig;
use crate::spectral::SpectralFunction;
use crate::symmetric::Catalog;
use crate::verify::{self, SlopeConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Eigendecomposition of a symmetric matrix
    Eig,
    /// Singular value decomposition
    Svd,
    /// F(X)
    Value,
    /// Gradient of F at X
    Grad,
    /// Hessian of F at X applied to --direction
    HessApply,
    /// Proximal point of alpha·F at X
    Prox,
    /// Moreau envelope of F at X with parameter alpha
    Envelope,
    /// Envelope-slope test of --direction as a subgradient of F at X
    VerifySubgrad,
    /// Eigenvalue trace inequality for --matrix and --matrix2
    VerifyTrace,
    /// Run a solver from a JSON --config
    Solve,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Eig => "eig",
            Command::Svd => "svd",
            Command::Value => "value",
            Command::Grad => "grad",
            Command::HessApply => "hess-apply",
            Command::Prox => "prox",
            Command::Envelope => "envelope",
            Command::VerifySubgrad => "verify-subgrad",
            Command::VerifyTrace => "verify-trace",
            Command::Solve => "solve",
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "speclift",
    version,
    about = "Spectral and singular-value lifts of symmetric functions"
)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Symmetric function, NAME[:PARAMS], e.g. l1:tau=1.5 or sum_k_largest:k=2
    #[arg(long = "fn", value_name = "NAME[:PARAMS]")]
    function: Option<String>,
    /// Prox / envelope parameter, positive
    #[arg(long)]
    alpha: Option<f64>,
    /// Slope tolerance (verify-subgrad) or stopping tolerance (solve)
    #[arg(long)]
    tol: Option<f64>,
    /// Matrix file (text or JSON), or - for stdin
    #[arg(long, value_name = "PATH")]
    matrix: Option<String>,
    /// Second matrix for verify-trace
    #[arg(long, value_name = "PATH")]
    matrix2: Option<String>,
    /// Direction B for hess-apply, candidate subgradient V for verify-subgrad
    #[arg(long, value_name = "PATH")]
    direction: Option<String>,
    /// Solver problem description (JSON)
    #[arg(long, value_name = "PATH")]
    config: Option<String>,
    /// Emit a JSON result envelope
    #[arg(long)]
    json: bool,
    /// Emit the solver trace as CSV
    #[arg(long)]
    csv: bool,
    /// Seed recorded in the output; every command is deterministic
    #[arg(long)]
    seed: Option<u64>,
    /// Compose with singular values instead of eigenvalues
    #[arg(long)]
    singular: bool,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Input(_) | Error::Dimension(_) => 2,
        Error::Capability(_) | Error::Nonsmooth(_) => 3,
        Error::Convergence { .. } | Error::Divergence(_) => 4,
        Error::Contract(_) => 1,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Input(_) => "input",
        Error::Dimension(_) => "dimension",
        Error::Capability(_) => "capability",
        Error::Nonsmooth(_) => "nonsmooth",
        Error::Convergence { .. } => "convergence",
        Error::Divergence(_) => "divergence",
        Error::Contract(_) => "contract",
    }
}

/// Runs the CLI against the process streams.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(args, &mut stdin.lock(), &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI with explicit streams; returns the exit code.
pub fn run_with_io<I, S>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut ctx = Ctx {
        cli: &cli,
        stdin: Some(stdin),
        inputs: Map::new(),
        diagnostics: Map::new(),
    };
    match ctx.execute() {
        Ok(out) => {
            let text = if cli.json {
                let envelope = json!({
                    "command": cli.command.name(),
                    "inputs": Value::Object(std::mem::take(&mut ctx.inputs)),
                    "result": out.json,
                    "diagnostics": Value::Object(std::mem::take(&mut ctx.diagnostics)),
                });
                format!("{}\n", serde_json::to_string_pretty(&envelope).expect("json"))
            } else {
                out.text
            };
            if stdout.write_all(text.as_bytes()).is_err() {
                return 1;
            }
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if cli.json {
                let envelope = json!({
                    "command": cli.command.name(),
                    "error": {"kind": error_kind(&e), "message": e.to_string()},
                });
                let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&envelope).expect("json"));
            }
            exit_code(&e)
        }
    }
}

struct Output {
    text: String,
    json: Value,
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or_else(|| Value::String(v.to_string()), Value::Number)
}

fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

fn mat_json(m: &Matrix) -> Value {
    json!({"rows": m.rows(), "cols": m.cols(), "data": nums(m.data())})
}

fn vec_text(v: &[f64]) -> String {
    v.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(" ")
}

fn mat_text(m: &Matrix) -> String {
    let mut s = String::new();
    for i in 0..m.rows() {
        let row: Vec<f64> = (0..m.cols()).map(|j| m.get(i, j)).collect();
        s.push_str(&vec_text(&row));
        s.push('\n');
    }
    s
}

/// Parses a matrix file: JSON `{"rows", "cols", "data"}` or whitespace text
/// whose first line is `n` (square) or `m n`, followed by the entries in
/// row-major order.
pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        return serde_json::from_str::<Matrix>(trimmed).map_err(|e| Error::input(format!("matrix JSON: {e}")));
    }
    let mut lines = trimmed.lines();
    let header = lines.next().ok_or_else(|| Error::input("matrix file is empty"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::input(format!("matrix header must be \"n\" or \"m n\", got {header:?}")))?;
    let (m, n) = match dims[..] {
        [n] => (n, n),
        [m, n] => (m, n),
        _ => {
            return Err(Error::input(format!(
                "matrix header must be \"n\" or \"m n\", got {header:?}"
            )))
        }
    };
    let data: Vec<f64> = lines
        .flat_map(str::split_whitespace)
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::input(format!("matrix entry {t:?} is not a number")))
        })
        .collect::<Result<_>>()?;
    Matrix::new(m, n, data)
}

struct Ctx<'a> {
    cli: &'a Cli,
    stdin: Option<&'a mut dyn Read>,
    inputs: Map<String, Value>,
    diagnostics: Map<String, Value>,
}

impl Ctx<'_> {
    fn read_source(&mut self, flag: &str, path: &str) -> Result<String> {
        if path == "-" {
            let stdin = self
                .stdin
                .take()
                .ok_or_else(|| Error::input(format!("--{flag}: standard input can only be read once")))?;
            let mut s = String::new();
            stdin
                .read_to_string(&mut s)
                .map_err(|e| Error::input(format!("--{flag}: reading stdin: {e}")))?;
            Ok(s)
        } else {
            std::fs::read_to_string(path).map_err(|e| Error::input(format!("--{flag} {path}: {e}")))
        }
    }

    fn matrix_flag(&mut self, flag: &str, path: Option<&String>) -> Result<Matrix> {
        let path = path.ok_or_else(|| Error::input(format!("{} requires --{flag}", self.cli.command.name())))?;
        let m = parse_matrix(&self.read_source(flag, path)?).map_err(|e| match e {
            Error::Input(msg) => Error::Input(format!("--{flag}: {msg}")),
            other => other,
        })?;
        self.inputs
            .insert(flag.to_string(), json!({"rows": m.rows(), "cols": m.cols()}));
        Ok(m)
    }

    fn matrix(&mut self) -> Result<Matrix> {
        let cli = self.cli;
        self.matrix_flag("matrix", cli.matrix.as_ref())
    }

    fn sym(&mut self, flag: &str) -> Result<SymMatrix> {
        let cli = self.cli;
        let path = match flag {
            "matrix" => cli.matrix.as_ref(),
            "matrix2" => cli.matrix2.as_ref(),
            _ => cli.direction.as_ref(),
        };
        let m = self.matrix_flag(flag, path)?;
        SymMatrix::from_matrix(m).map_err(|e| match e {
            Error::Input(msg) => Error::Input(format!("--{flag}: {msg}")),
            other => other,
        })
    }

    fn catalog(&mut self) -> Result<Catalog> {
        let spec = self
            .cli
            .function
            .as_ref()
            .ok_or_else(|| Error::input(format!("{} requires --fn", self.cli.command.name())))?;
        let mut f: Catalog = spec.parse()?;
        if self.cli.singular {
            f = f.on_magnitudes();
        }
        self.inputs.insert("fn".into(), Value::String(f.to_string()));
        self.inputs.insert("singular".into(), Value::Bool(self.cli.singular));
        Ok(f)
    }

    fn alpha(&mut self) -> Result<f64> {
        let a = self
            .cli
            .alpha
            .ok_or_else(|| Error::input(format!("{} requires --alpha", self.cli.command.name())))?;
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::input(format!("--alpha must be positive and finite, got {a}")));
        }
        self.inputs.insert("alpha".into(), num(a));
        Ok(a)
    }

    fn singular_fn(&mut self, x: &Matrix) -> Result<SingularFunction> {
        let f = self.catalog()?;
        SingularFunction::from_arc(Arc::new(f), x.rows(), x.cols())
    }

    fn execute(&mut self) -> Result<Output> {
        if let Some(seed) = self.cli.seed {
            self.inputs.insert("seed".into(), json!(seed));
        }
        match self.cli.command {
            Command::Eig => self.eig(),
            Command::Svd => self.svd(),
            Command::Value => self.value(),
            Command::Grad => self.grad(),
            Command::HessApply => self.hess_apply(),
            Command::Prox => self.prox(),
            Command::Envelope => self.envelope(),
            Command::VerifySubgrad => self.verify_subgrad(),
            Command::VerifyTrace => self.verify_trace(),
            Command::Solve => self.solve(),
        }
    }

    fn eig(&mut self) -> Result<Output> {
        let x = self.sym("matrix")?;
        let e = eig_sym(&x)?;
        self.diagnostics.insert(
            "reconstruction_residual".into(),
            num(e.reconstruct().sub(&x).frobenius_norm()),
        );
        self.diagnostics
            .insert("orthogonality_residual".into(), num(e.u.orthogonality_residual()));
        Ok(Output {
            text: format!("eigenvalues\n{}\neigenvectors\n{}", vec_text(&e.lambda), mat_text(&e.u)),
            json: json!({"eigenvalues": nums(&e.lambda), "eigenvectors": mat_json(&e.u)}),
        })
    }

    fn svd(&mut self) -> Result<Output> {
        let x = self.matrix()?;
        let d = svd(&x)?;
        self.diagnostics.insert(
            "reconstruction_residual".into(),
            num(d.reconstruct().sub(&x).frobenius_norm()),
        );
        Ok(Output {
            text: format!(
                "singular_values\n{}\nu\n{}v\n{}",
                vec_text(&d.sigma),
                mat_text(&d.u),
                mat_text(&d.v)
            ),
            json: json!({"singular_values": nums(&d.sigma), "u": mat_json(&d.u), "v": mat_json(&d.v)}),
        })
    }

    fn scalar(v: f64) -> Output {
        Output {
            text: format!("{}\n", fmt_num(v)),
            json: num(v),
        }
    }

    fn matrix_out(m: &Matrix) -> Output {
        Output {
            text: mat_text(m),
            json: mat_json(m),
        }
    }

    fn value(&mut self) -> Result<Output> {
        if self.cli.singular {
            let x = self.matrix()?;
            let g = self.singular_fn(&x)?;
            return Ok(Self::scalar(g.value(&x)?));
        }
        let f = SpectralFunction::new(self.catalog()?);
        let x = self.sym("matrix")?;
        Ok(Self::scalar(f.value(&x)?))
    }

    fn grad(&mut self) -> Result<Output> {
        if self.cli.singular {
            let x = self.matrix()?;
            let g = self.singular_fn(&x)?;
            return Ok(Self::matrix_out(&g.gradient(&x)?));
        }
        let f = SpectralFunction::new(self.catalog()?);
        let x = self.sym("matrix")?;
        Ok(Self::matrix_out(f.gradient(&x)?.as_matrix()))
    }

    fn hess_apply(&mut self) -> Result<Output> {
        if self.cli.singular {
            return Err(Error::capability("hess-apply is available for spectral functions only"));
        }
        let f = SpectralFunction::new(self.catalog()?);
        let x = self.sym("matrix")?;
        let b = self.sym("direction")?;
        Ok(Self::matrix_out(f.hessian_apply(&x, &b)?.as_matrix()))
    }

    fn prox(&mut self) -> Result<Output> {
        let alpha = self.alpha()?;
        if self.cli.singular {
            let x = self.matrix()?;
            let g = self.singular_fn(&x)?;
            let p = g.prox(&x, alpha)?;
            self.diagnostics.insert("envelope_value".into(), num(p.envelope_value));
            self.diagnostics.insert("singular_prox".into(), nums(&p.singular_prox));
            return Ok(Self::matrix_out(&p.point));
        }
        let f = SpectralFunction::new(self.catalog()?);
        let x = self.sym("matrix")?;
        let p = f.prox(&x, alpha)?;
        let comm = commutator(x.as_matrix(), p.point.as_matrix())?.frobenius_norm();
        self.diagnostics.insert("envelope_value".into(), num(p.envelope_value));
        self.diagnostics.insert("eigen_prox".into(), nums(&p.eigen_prox));
        self.diagnostics.insert("commutation_residual".into(), num(comm));
        Ok(Self::matrix_out(p.point.as_matrix()))
    }

    fn envelope(&mut self) -> Result<Output> {
        let alpha = self.alpha()?;
        if self.cli.singular {
            let x = self.matrix()?;
            let g = self.singular_fn(&x)?;
            return Ok(Self::scalar(g.envelope(&x, alpha)?));
        }
        let f = SpectralFunction::new(self.catalog()?);
        let x = self.sym("matrix")?;
        Ok(Self::scalar(f.envelope(&x, alpha)?))
    }

    fn verify_subgrad(&mut self) -> Result<Output> {
        if self.cli.singular {
            return Err(Error::capability(
                "verify-subgrad is available for spectral functions only",
            ));
        }
        let f = SpectralFunction::new(self.catalog()?);
        let x = self.sym("matrix")?;
        let v = self.sym("direction")?;
        let mut cfg = SlopeConfig::default();
        if let Some(tol) = self.cli.tol {
            if !(tol > 0.0) {
                return Err(Error::input(format!("--tol must be positive, got {tol}")));
            }
            cfg.slope_tol = tol;
            self.inputs.insert("tol".into(), num(tol));
        }
        let alpha0 = match self.cli.alpha {
            Some(_) => self.alpha()?,
            None => 1.0,
        };
        let grid: Vec<f64> = verify::default_alpha_grid().iter().map(|a| a * alpha0).collect();
        let r = verify::lifted_subgradient_test(&f, &x, &v, &grid, &cfg)?;
        let mut json = serde_json::to_value(&r).expect("report serializes");
        fix_nonfinite(&mut json, &r);
        Ok(Output {
            text: format!(
                "verdict {}\nlimit_estimate {}\ntarget_slope {}\nproximal_alpha {}\n",
                json["verdict"].as_str().unwrap_or("inconclusive"),
                fmt_num(r.limit_estimate),
                fmt_num(r.target_slope),
                r.proximal_alpha.map_or_else(|| "none".to_string(), fmt_num),
            ),
            json,
        })
    }

    fn verify_trace(&mut self) -> Result<Output> {
        let x = self.sym("matrix")?;
        let y = self.sym("matrix2")?;
        let r = verify::trace_inequality(&x, &y)?;
        let mut text = format!(
            "lhs {}\nrhs {}\ngap {}\nequality {}\n",
            fmt_num(r.lhs),
            fmt_num(r.rhs),
            fmt_num(r.gap),
            r.equality
        );
        if let Some(u) = &r.joint_diagonalizer {
            text.push_str("joint_diagonalizer\n");
            text.push_str(&mat_text(u));
        }
        Ok(Output {
            text,
            json: json!({
                "lhs": num(r.lhs),
                "rhs": num(r.rhs),
                "gap": num(r.gap),
                "equality": r.equality,
                "joint_diagonalizer": r.joint_diagonalizer.as_ref().map(mat_json),
            }),
        })
    }

    fn solve(&mut self) -> Result<Output> {
        let path = self
            .cli
            .config
            .clone()
            .ok_or_else(|| Error::input("solve requires --config"))?;
        let mut cfg = ProblemConfig::from_json(&self.read_source("config", &path)?)?;
        if let Some(tol) = self.cli.tol {
            cfg.tol = Some(tol);
            self.inputs.insert("tol".into(), num(tol));
        }
        let t = cfg.solve()?;
        self.inputs.insert(
            "shape".into(),
            json!({"rows": t.final_point.rows(), "cols": t.final_point.cols()}),
        );
        self.diagnostics.insert(
            "final_residual".into(),
            num(t.residuals.last().copied().unwrap_or(f64::NAN)),
        );
        let text = if self.cli.csv {
            t.to_csv()
        } else {
            format!(
                "iterations {}\nconverged {}\nobjective {}\nfinal_point\n{}",
                t.iterations,
                t.converged,
                fmt_num(t.final_objective()),
                mat_text(&t.final_point)
            )
        };
        Ok(Output {
            text,
            json: json!({
                "iterations": t.iterations,
                "converged": t.converged,
                "objectives": nums(&t.objectives),
                "residuals": nums(&t.residuals),
                "final_point": mat_json(&t.final_point),
            }),
        })
    }
}

/// serde_json maps non-finite floats to `null`; spell them out instead.
fn fix_nonfinite(json: &mut Value, r: &verify::SlopeReport) {
    let fields: [(&str, &[f64]); 4] = [
        ("phi_values", &r.phi_values),
        ("quotients", &r.quotients),
        ("extrapolated", &r.extrapolated),
        ("alpha_grid", &r.alpha_grid),
    ];
    for (k, v) in fields {
        json[k] = nums(v);
    }
    for (k, v) in [
        ("limit_estimate", r.limit_estimate),
        ("limit_uncertainty", r.limit_uncertainty),
        ("upper_bound_excess", r.upper_bound_excess),
        ("f_at_x", r.f_at_x),
        ("target_slope", r.target_slope),
    ] {
        json[k] = num(v);
    }
}
