//! Batch front end for the planar-tree bialgebra library.
//!
//! Every command is a pure function of its flags: the output is
//! assembled in memory with deterministic ordering and emitted in one
//! write, so repeated runs are byte-identical. Verification commands
//! exit with 0 when every check passes, 1 when a check fails (the
//! failing checks are reported as JSON), and 2 on usage errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use magmatic::algebra::{BasisSpace, FreeBialgebra};
use magmatic::series::{koszul_check, mag_dims, magroot_dims};
use magmatic::structure::{pbw_isomorphism, rigidity_check, CheckReport};
use magmatic::trees::{enumerate, enumerate_magroot, AritySpec};
use magmatic::unital::UnitalBialgebra;
use magmatic::Q;

/// Environment variable naming the directory that relative `--output`
/// paths are resolved against.
const OUT_DIR_VAR: &str = "MAGMATIC_OUT_DIR";

/// Degree bound past which infinite arity sets are refused without
/// `--force`; their dimensions grow faster than exponentially.
const INFINITE_SET_DEGREE_CAP: usize = 20;

#[derive(Parser)]
#[command(
    name = "magmatic",
    version,
    about = "Exact tables and verifications for algebras and coalgebras on planar reduced trees",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Graded dimensions of the tree algebras, optionally with the
    /// root-restricted subalgebra alongside.
    Dims(DimsArgs),
    /// List the trees themselves, degree by degree.
    Enumerate(EnumerateArgs),
    /// Bases of the primitive subspaces of the free bialgebra.
    Primitives(PrimitivesArgs),
    /// Run a verification suite and report pass or fail per check.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

/// Flags shared by every command.
#[derive(Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the output to this file instead of stdout. Relative paths
    /// are resolved against $MAGMATIC_OUT_DIR when it is set.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DimsArgs {
    /// Operation arity set: `2,3,5`, `all`, `3..all` or `odd3..all`.
    #[arg(long, default_value = "all")]
    s: String,
    /// Root arity set; when present, the root-restricted dimension
    /// column is printed as well. Must be a subset of `--s`.
    #[arg(long)]
    t: Option<String>,
    /// Largest degree to tabulate.
    #[arg(long, default_value_t = 12)]
    max_degree: usize,
    /// Allow degrees above 20 with an infinite arity set.
    #[arg(long)]
    force: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct EnumerateArgs {
    /// Operation arity set.
    #[arg(long, default_value = "all")]
    s: String,
    /// When present, list only trees whose root arity avoids this set.
    #[arg(long)]
    t: Option<String>,
    /// Largest degree to list.
    #[arg(long, default_value_t = 12)]
    max_degree: usize,
    /// Allow degrees above 20 with an infinite arity set.
    #[arg(long)]
    force: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct PrimitivesArgs {
    /// Operation arity set.
    #[arg(long)]
    s: String,
    /// Co-operation arity set; must be a subset of `--s`.
    #[arg(long)]
    t: String,
    /// Dimension of the label space.
    #[arg(long, default_value_t = 1)]
    dim_v: usize,
    /// Largest degree to compute.
    #[arg(long, default_value_t = 12)]
    max_degree: usize,
    /// Allow degrees above 20 with an infinite arity set.
    #[arg(long)]
    force: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(subcommand)]
    suite: Suite,
}

#[derive(Subcommand)]
enum Suite {
    /// Coproducts of products against the matching-arity identity.
    Compat(CompatArgs),
    /// Idempotent splitting and the free/cofree comparison maps.
    Rigidity(RigidityArgs),
    /// Series composition plus the composite-basis bijection.
    Pbw(PbwArgs),
    /// Signed compositional inverse of the bivariate tree series.
    Koszul(KoszulArgs),
    /// Unital counit law and the two coproduct descriptions.
    UnitalCompat(UnitalArgs),
    /// Unital primitive dimensions against root-indexed tree counts.
    UnitalPrimitives(UnitalArgs),
}

#[derive(Args)]
struct CompatArgs {
    /// Operation arity set.
    #[arg(long)]
    s: String,
    /// Co-operation arity set; must be a subset of `--s`.
    #[arg(long)]
    t: String,
    /// Dimension of the label space.
    #[arg(long, default_value_t = 1)]
    dim_v: usize,
    /// Largest total degree of the argument tuples.
    #[arg(long, default_value_t = 12)]
    max_degree: usize,
    /// Allow degrees above 20 with an infinite arity set.
    #[arg(long)]
    force: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct RigidityArgs {
    /// Operation arity set; the co-operations use the same set.
    #[arg(long)]
    s: String,
    /// Co-operation arity set; if given it must equal `--s`.
    #[arg(long)]
    t: Option<String>,
    /// Dimension of the label space.
    #[arg(long, default_value_t = 1)]
    dim_v: usize,
    /// Truncation degree for the graded maps.
    #[arg(long, default_value_t = 12)]
    max_degree: usize,
    /// Allow degrees above 20 with an infinite arity set.
    #[arg(long)]
    force: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct PbwArgs {
    /// Operation arity set.
    #[arg(long)]
    s: String,
    /// Root arity set; must be a subset of `--s`.
    #[arg(long)]
    t: String,
    /// Dimension of the label space for the bijection check.
    #[arg(long, default_value_t = 1)]
    dim_v: usize,
    /// Largest degree for both the series and the bijection.
    #[arg(long, default_value_t = 12)]
    max_degree: usize,
    /// Allow degrees above 20 with an infinite arity set.
    #[arg(long)]
    force: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct KoszulArgs {
    /// Operation arity set.
    #[arg(long)]
    s: String,
    /// Truncation degree for the bivariate series.
    #[arg(long, default_value_t = 12)]
    max_degree: usize,
    /// Allow degrees above 20 with an infinite arity set.
    #[arg(long)]
    force: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct UnitalArgs {
    /// Operation arity set; must be an interval `2,...,n`.
    #[arg(long)]
    s: String,
    /// Co-operation arity set; must be an interval `2,...,m` inside `--s`.
    #[arg(long)]
    t: String,
    /// Dimension of the label space.
    #[arg(long, default_value_t = 1)]
    dim_v: usize,
    /// Largest degree to check.
    #[arg(long, default_value_t = 12)]
    max_degree: usize,
    /// Allow degrees above 20 with an infinite arity set.
    #[arg(long)]
    force: bool,
    #[command(flatten)]
    out: OutputArgs,
}

/// How a command run ends, beyond successfully rendered output.
enum Failure {
    /// Bad flags or inconsistent arguments; exit code 2.
    Usage(String),
    /// IO trouble writing the output; exit code 2.
    Io(String),
}

struct Outcome {
    rendered: String,
    all_passed: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (outcome, out) = match &cli.command {
        Command::Dims(a) => (cmd_dims(a), &a.out),
        Command::Enumerate(a) => (cmd_enumerate(a), &a.out),
        Command::Primitives(a) => (cmd_primitives(a), &a.out),
        Command::Verify(v) => match &v.suite {
            Suite::Compat(a) => (cmd_verify_compat(a), &a.out),
            Suite::Rigidity(a) => (cmd_verify_rigidity(a), &a.out),
            Suite::Pbw(a) => (cmd_verify_pbw(a), &a.out),
            Suite::Koszul(a) => (cmd_verify_koszul(a), &a.out),
            Suite::UnitalCompat(a) => (cmd_verify_unital_compat(a), &a.out),
            Suite::UnitalPrimitives(a) => (cmd_verify_unital_primitives(a), &a.out),
        },
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(Failure::Usage(msg)) | Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Err(Failure::Io(msg)) | Err(Failure::Usage(msg)) = emit(out, &outcome.rendered) {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    if outcome.all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

/// Write the rendered output to the chosen sink.
fn emit(out: &OutputArgs, rendered: &str) -> Result<(), Failure> {
    match &out.output {
        None => {
            print!("{rendered}");
            Ok(())
        }
        Some(path) => {
            let resolved = resolve_output(path);
            std::fs::write(&resolved, rendered)
                .map_err(|e| Failure::Io(format!("cannot write {}: {e}", resolved.display())))
        }
    }
}

fn resolve_output(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(OUT_DIR_VAR) {
        Some(dir) => PathBuf::from(dir).join(path),
        None => path.to_path_buf(),
    }
}

fn parse_spec(text: &str, flag: &str) -> Result<AritySpec, Failure> {
    text.parse()
        .map_err(|e| Failure::Usage(format!("bad arity set for --{flag}: {e}")))
}

fn require_subset(t: &AritySpec, s: &AritySpec) -> Result<(), Failure> {
    if t.is_subset_of(s) {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "--t must be a subset of --s, but {t} is not contained in {s}"
        )))
    }
}

fn check_degree_guard(s: &AritySpec, max_degree: usize, force: bool) -> Result<(), Failure> {
    if max_degree < 1 {
        return Err(Failure::Usage("--max-degree must be at least 1".into()));
    }
    if !s.is_finite() && max_degree > INFINITE_SET_DEGREE_CAP && !force {
        return Err(Failure::Usage(format!(
            "refusing --max-degree {max_degree} with the infinite arity set {s}; \
             dimensions grow faster than exponentially, pass --force to proceed"
        )));
    }
    Ok(())
}

/// The upper end of an interval arity set `{2, ..., n}`, if it is one.
fn interval_bound(spec: &AritySpec, flag: &str) -> Result<u32, Failure> {
    if let AritySpec::Finite(set) = spec {
        if let Some(&max) = set.iter().next_back() {
            if set.len() as u32 == max - 1 {
                return Ok(max);
            }
        }
    }
    Err(Failure::Usage(format!(
        "--{flag} must be an interval 2,...,n for the unital suites, got {spec}"
    )))
}

/// Graded dimensions are integral; render them without a denominator.
fn dim_str(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        q.to_string()
    }
}

fn csv_field(text: &str) -> String {
    format!("\"{}\"", text.replace('"', "\"\""))
}

/// Left-align `rows` under `header` with two-space gutters.
fn text_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let render = |cells: &[String], out: &mut String| {
        let last = cells.len() - 1;
        for (i, (cell, &w)) in cells.iter().zip(&widths).enumerate() {
            if i == last {
                out.push_str(cell);
            } else {
                out.push_str(&format!("{cell:<w$}"));
                out.push_str("  ");
            }
        }
        out.push('\n');
    };
    let header_cells: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    render(&header_cells, &mut out);
    for row in rows {
        render(row, &mut out);
    }
    out
}

fn cmd_dims(a: &DimsArgs) -> Result<Outcome, Failure> {
    let s = parse_spec(&a.s, "s")?;
    check_degree_guard(&s, a.max_degree, a.force)?;
    let t = a.t.as_deref().map(|x| parse_spec(x, "t")).transpose()?;
    let mag = mag_dims(&s, a.max_degree);
    let root = match &t {
        None => None,
        Some(t) => {
            require_subset(t, &s)?;
            Some(magroot_dims(&s, t, a.max_degree).map_err(|e| Failure::Usage(e.to_string()))?)
        }
    };
    let rendered = match a.out.format {
        Format::Text => {
            let header: Vec<&str> = match root {
                None => vec!["n", "mag"],
                Some(_) => vec!["n", "mag", "magroot"],
            };
            let rows: Vec<Vec<String>> = (1..=a.max_degree)
                .map(|n| {
                    let mut row = vec![n.to_string(), dim_str(mag.coeff(n))];
                    if let Some(r) = &root {
                        row.push(dim_str(r.coeff(n)));
                    }
                    row
                })
                .collect();
            text_table(&header, &rows)
        }
        Format::Json => {
            let rows: Vec<Value> = (1..=a.max_degree)
                .map(|n| {
                    let mut obj = json!({"n": n, "mag": dim_str(mag.coeff(n))});
                    if let Some(r) = &root {
                        obj["magroot"] = json!(dim_str(r.coeff(n)));
                    }
                    obj
                })
                .collect();
            let mut doc = json!({
                "command": "dims",
                "s": s.to_string(),
                "max_degree": a.max_degree,
                "rows": rows,
            });
            if let Some(t) = &t {
                doc["t"] = json!(t.to_string());
            }
            format!("{doc:#}\n")
        }
        Format::Csv => {
            let mut out = String::from(if root.is_some() {
                "n,mag,magroot\n"
            } else {
                "n,mag\n"
            });
            for n in 1..=a.max_degree {
                out.push_str(&n.to_string());
                out.push(',');
                out.push_str(&dim_str(mag.coeff(n)));
                if let Some(r) = &root {
                    out.push(',');
                    out.push_str(&dim_str(r.coeff(n)));
                }
                out.push('\n');
            }
            out
        }
    };
    Ok(Outcome {
        rendered,
        all_passed: true,
    })
}

fn cmd_enumerate(a: &EnumerateArgs) -> Result<Outcome, Failure> {
    let s = parse_spec(&a.s, "s")?;
    check_degree_guard(&s, a.max_degree, a.force)?;
    let t = a.t.as_deref().map(|x| parse_spec(x, "t")).transpose()?;
    if let Some(t) = &t {
        require_subset(t, &s)?;
    }
    let mut per_degree = Vec::with_capacity(a.max_degree);
    for n in 1..=a.max_degree {
        let trees = match &t {
            None => enumerate(&s, n),
            Some(t) => enumerate_magroot(&s, t, n).map_err(|e| Failure::Usage(e.to_string()))?,
        };
        per_degree.push((n, trees));
    }
    let rendered = match a.out.format {
        Format::Text => {
            let mut out = String::new();
            for (n, trees) in &per_degree {
                let plural = if trees.len() == 1 { "tree" } else { "trees" };
                out.push_str(&format!("degree {n}: {} {plural}\n", trees.len()));
                for t in trees {
                    out.push_str(&format!("  {t}\n"));
                }
            }
            out
        }
        Format::Json => {
            let degrees: Vec<Value> = per_degree
                .iter()
                .map(|(n, trees)| {
                    json!({
                        "degree": n,
                        "count": trees.len(),
                        "trees": trees.iter().map(|t| t.to_json()).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let mut doc = json!({
                "command": "enumerate",
                "s": s.to_string(),
                "max_degree": a.max_degree,
                "degrees": degrees,
            });
            if let Some(t) = &t {
                doc["t"] = json!(t.to_string());
            }
            format!("{doc:#}\n")
        }
        Format::Csv => {
            let mut out = String::from("degree,tree\n");
            for (n, trees) in &per_degree {
                for t in trees {
                    out.push_str(&format!("{n},{}\n", csv_field(&t.to_string())));
                }
            }
            out
        }
    };
    Ok(Outcome {
        rendered,
        all_passed: true,
    })
}

fn cmd_primitives(a: &PrimitivesArgs) -> Result<Outcome, Failure> {
    let s = parse_spec(&a.s, "s")?;
    let t = parse_spec(&a.t, "t")?;
    check_degree_guard(&s, a.max_degree, a.force)?;
    require_subset(&t, &s)?;
    let basis =
        BasisSpace::standard(a.dim_v).map_err(|e| Failure::Usage(e.to_string()))?;
    let ctx = FreeBialgebra::new(s.clone(), t.clone(), basis, a.max_degree)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let mut per_degree = Vec::with_capacity(a.max_degree);
    for n in 1..=a.max_degree {
        per_degree.push((n, ctx.primitive_basis(n)));
    }
    let rendered = match a.out.format {
        Format::Text => {
            let mut out = String::new();
            for (n, elems) in &per_degree {
                out.push_str(&format!("degree {n}: dimension {}\n", elems.len()));
                for e in elems {
                    out.push_str(&format!("  {}\n", ctx.format_element(e)));
                }
            }
            out
        }
        Format::Json => {
            let degrees: Vec<Value> = per_degree
                .iter()
                .map(|(n, elems)| {
                    json!({
                        "degree": n,
                        "dimension": elems.len(),
                        "basis": elems
                            .iter()
                            .map(|e| e.to_json(ctx.label_space()))
                            .collect::<Vec<_>>(),
                    })
                })
                .collect();
            let doc = json!({
                "command": "primitives",
                "s": s.to_string(),
                "t": t.to_string(),
                "dim_v": a.dim_v,
                "max_degree": a.max_degree,
                "degrees": degrees,
            });
            format!("{doc:#}\n")
        }
        Format::Csv => {
            let mut out = String::from("degree,index,element\n");
            for (n, elems) in &per_degree {
                for (i, e) in elems.iter().enumerate() {
                    out.push_str(&format!("{n},{i},{}\n", csv_field(&ctx.format_element(e))));
                }
            }
            out
        }
    };
    Ok(Outcome {
        rendered,
        all_passed: true,
    })
}

/// Render a batch of check reports in the requested format. Failing
/// checks are always also present as JSON, the machine-readable witness.
fn render_reports(
    suite: &str,
    params: Value,
    reports: &[CheckReport],
    format: Format,
) -> Outcome {
    let all_passed = CheckReport::all_pass(reports);
    let rendered = match format {
        Format::Text => {
            let mut out = String::new();
            for r in reports {
                out.push_str(&format!("{r}\n"));
            }
            out.push_str(&format!(
                "verify {suite}: {}\n",
                if all_passed { "pass" } else { "fail" }
            ));
            if !all_passed {
                let failing: Vec<Value> =
                    reports.iter().filter(|r| !r.pass).map(CheckReport::to_json).collect();
                out.push_str(&format!("witness: {}\n", json!(failing)));
            }
            out
        }
        Format::Json => {
            let doc = json!({
                "command": "verify",
                "suite": suite,
                "params": params,
                "status": if all_passed { "pass" } else { "fail" },
                "checks": reports.iter().map(CheckReport::to_json).collect::<Vec<_>>(),
            });
            format!("{doc:#}\n")
        }
        Format::Csv => {
            let mut out = String::from("check,degree,status,witness\n");
            for r in reports {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    csv_field(&r.check),
                    r.degree,
                    if r.pass { "pass" } else { "fail" },
                    csv_field(r.witness.as_deref().unwrap_or("")),
                ));
            }
            out
        }
    };
    Outcome {
        rendered,
        all_passed,
    }
}

fn cmd_verify_compat(a: &CompatArgs) -> Result<Outcome, Failure> {
    let s = parse_spec(&a.s, "s")?;
    let t = parse_spec(&a.t, "t")?;
    check_degree_guard(&s, a.max_degree, a.force)?;
    require_subset(&t, &s)?;
    let basis = BasisSpace::standard(a.dim_v).map_err(|e| Failure::Usage(e.to_string()))?;
    let ctx = FreeBialgebra::new(s.clone(), t.clone(), basis, a.max_degree)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let report = match ctx.compat_witness(a.max_degree) {
        None => CheckReport::pass("compatibility", a.max_degree),
        Some(w) => CheckReport::fail("compatibility", a.max_degree, w.to_string()),
    };
    let params = json!({
        "s": s.to_string(),
        "t": t.to_string(),
        "dim_v": a.dim_v,
        "max_degree": a.max_degree,
    });
    Ok(render_reports("compat", params, &[report], a.out.format))
}

fn cmd_verify_rigidity(a: &RigidityArgs) -> Result<Outcome, Failure> {
    let s = parse_spec(&a.s, "s")?;
    check_degree_guard(&s, a.max_degree, a.force)?;
    if let Some(t_text) = &a.t {
        let t = parse_spec(t_text, "t")?;
        if t != s {
            return Err(Failure::Usage(format!(
                "rigidity needs matching arity sets, got --s {s} and --t {t}"
            )));
        }
    }
    let basis = BasisSpace::standard(a.dim_v).map_err(|e| Failure::Usage(e.to_string()))?;
    let ctx = FreeBialgebra::new(s.clone(), s.clone(), basis, a.max_degree)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let reports = rigidity_check(&ctx).map_err(|e| Failure::Usage(e.to_string()))?;
    let params = json!({
        "s": s.to_string(),
        "dim_v": a.dim_v,
        "max_degree": a.max_degree,
    });
    Ok(render_reports("rigidity", params, &reports, a.out.format))
}

fn cmd_verify_pbw(a: &PbwArgs) -> Result<Outcome, Failure> {
    let s = parse_spec(&a.s, "s")?;
    let t = parse_spec(&a.t, "t")?;
    check_degree_guard(&s, a.max_degree, a.force)?;
    require_subset(&t, &s)?;
    let mut reports = Vec::new();
    // Composing the outer-tree dimensions with the root-restricted ones
    // must reproduce the full dimensions.
    let full = mag_dims(&s, a.max_degree);
    let outer = mag_dims(&t, a.max_degree);
    let root = magroot_dims(&s, &t, a.max_degree).map_err(|e| Failure::Usage(e.to_string()))?;
    let composed = outer
        .compose(&root)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    reports.push(if composed == full {
        CheckReport::pass("series_composition", a.max_degree)
    } else {
        CheckReport::fail(
            "series_composition",
            a.max_degree,
            "composed dimension series differs from the full one".to_string(),
        )
    });
    for n in 1..=a.max_degree {
        reports.push(match pbw_isomorphism(&s, &t, a.dim_v, n) {
            Ok(_) => CheckReport::pass("basis_bijection", n),
            Err(e) => CheckReport::fail("basis_bijection", n, e.to_string()),
        });
    }
    let params = json!({
        "s": s.to_string(),
        "t": t.to_string(),
        "dim_v": a.dim_v,
        "max_degree": a.max_degree,
    });
    Ok(render_reports("pbw", params, &reports, a.out.format))
}

fn cmd_verify_koszul(a: &KoszulArgs) -> Result<Outcome, Failure> {
    let s = parse_spec(&a.s, "s")?;
    check_degree_guard(&s, a.max_degree, a.force)?;
    let report = if koszul_check(&s, a.max_degree) {
        CheckReport::pass("signed_inverse", a.max_degree)
    } else {
        CheckReport::fail(
            "signed_inverse",
            a.max_degree,
            "substituting the tree series into the nilpotent one missed the identity".to_string(),
        )
    };
    let params = json!({
        "s": s.to_string(),
        "max_degree": a.max_degree,
    });
    Ok(render_reports("koszul", params, &[report], a.out.format))
}

fn unital_context(a: &UnitalArgs) -> Result<(UnitalBialgebra, Value), Failure> {
    let s = parse_spec(&a.s, "s")?;
    let t = parse_spec(&a.t, "t")?;
    check_degree_guard(&s, a.max_degree, a.force)?;
    require_subset(&t, &s)?;
    let n = interval_bound(&s, "s")?;
    let m = interval_bound(&t, "t")?;
    let basis = BasisSpace::standard(a.dim_v).map_err(|e| Failure::Usage(e.to_string()))?;
    let ctx = UnitalBialgebra::new(m, n, basis, a.max_degree)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let params = json!({
        "s": s.to_string(),
        "t": t.to_string(),
        "dim_v": a.dim_v,
        "max_degree": a.max_degree,
    });
    Ok((ctx, params))
}

fn cmd_verify_unital_compat(a: &UnitalArgs) -> Result<Outcome, Failure> {
    let (ctx, params) = unital_context(a)?;
    let counit = match ctx.counit_witness(a.max_degree) {
        None => CheckReport::pass("counit_law", a.max_degree),
        Some(w) => CheckReport::fail("counit_law", a.max_degree, w),
    };
    let compat = match ctx.compat_witness(a.max_degree) {
        None => CheckReport::pass("coproduct_descriptions_agree", a.max_degree),
        Some(w) => CheckReport::fail("coproduct_descriptions_agree", a.max_degree, w),
    };
    Ok(render_reports(
        "unital-compat",
        params,
        &[counit, compat],
        a.out.format,
    ))
}

fn cmd_verify_unital_primitives(a: &UnitalArgs) -> Result<Outcome, Failure> {
    let (ctx, params) = unital_context(a)?;
    let s = parse_spec(&a.s, "s")?;
    let t = parse_spec(&a.t, "t")?;
    let mut reports = Vec::new();
    for d in 1..=a.max_degree {
        let got = ctx.primitive_basis(d).len();
        let trees = enumerate_magroot(&s, &t, d)
            .map_err(|e| Failure::Usage(e.to_string()))?
            .len();
        let expected = trees * a.dim_v.pow(d as u32);
        reports.push(if got == expected {
            CheckReport::pass("primitive_dimension", d)
        } else {
            CheckReport::fail(
                "primitive_dimension",
                d,
                format!("kernel dimension {got} but {expected} root-indexed trees"),
            )
        });
    }
    Ok(render_reports(
        "unital-primitives",
        params,
        &reports,
        a.out.format,
    ))
}
