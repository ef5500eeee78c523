mod report;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qsphere::*;
use report::Report;

const BUDGET_VAR: &str = "QSPHERE_BUDGET";

#[derive(Parser)]
#[command(name = "qsphere", version, about = "Exact and numeric checks for quantum Euclidean spheres")]
struct Cli {
    /// Reduce sequentially instead of in parallel.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SphereArgs {
    /// Ambient dimension N of the sphere S^{N-1}.
    #[arg(long, value_name = "N", required_unless_present = "presentation", conflicts_with = "presentation")]
    sphere: Option<usize>,
    /// Presentation file to load instead of the built-in family.
    #[arg(long, value_name = "PATH")]
    presentation: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ProjectorArgs {
    #[command(flatten)]
    sphere: SphereArgs,
    #[arg(long, value_enum, default_value_t = ProjectorKind::Twisted)]
    projector: ProjectorKind,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ProjectorKind {
    Twisted,
    Normal,
    Cotangent,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SignArg {
    Plus,
    Minus,
}

impl From<SignArg> for Sign {
    fn from(s: SignArg) -> Sign {
        match s {
            SignArg::Plus => Sign::Plus,
            SignArg::Minus => Sign::Minus,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check that a projector is idempotent and self-adjoint modulo the relations.
    Verify(ProjectorArgs),
    /// Rank of a projector via the classical-point character.
    Rank(ProjectorArgs),
    /// Monopole charge of the twisted projector on the 2-sphere.
    Charge(SphereArgs),
    /// Normal form of an expression.
    NormalForm {
        #[command(flatten)]
        sphere: SphereArgs,
        #[arg(long)]
        expr: String,
    },
    /// Check that the projector identities and the defining relations span each other.
    RelationsCheck(SphereArgs),
    /// Evaluate a projector at random classical points.
    Classical {
        #[command(flatten)]
        proj: ProjectorArgs,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Check relations and the dressed projector in the truncated representation of the 4-sphere.
    RepCheck {
        #[arg(long, default_value_t = 0.5)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 30)]
        cutoff: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = SignArg::Plus)]
        sign: SignArg,
    },
    /// Write the presentation of S^{N-1}_q in the text format.
    BuildPresentation {
        #[arg(long = "N", value_name = "N")]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Partial traces of |pi(x0)|^p against the top singular value of pi(x2).
    TraceClass {
        #[arg(long, default_value_t = 0.5)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 1)]
        power: u32,
        #[arg(long, default_value_t = 40)]
        max_cutoff: usize,
        #[arg(long, value_enum, default_value_t = SignArg::Plus)]
        sign: SignArg,
        /// Tolerance on the extrapolated tail relative to the partial trace.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Tolerance on the gap between the top singular value of pi(x2) and its limit.
        #[arg(long, default_value_t = 1e-8)]
        gap_tol: f64,
    },
}

enum Failure {
    /// Bad input: exit 2.
    Usage(String),
    /// A computation could not complete: exit 1.
    Runtime(String),
}

type CmdResult = Result<Vec<Report>, Failure>;

fn runtime<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Runtime(e.to_string())
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn budget() -> Result<Option<u64>, Failure> {
    match std::env::var(BUDGET_VAR) {
        Ok(v) => match v.trim().parse::<u64>() {
            Ok(b) if b > 0 => Ok(Some(b)),
            _ => Err(Failure::Usage(format!("{BUDGET_VAR} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

fn load(args: &SphereArgs) -> Result<SpherePresentation, Failure> {
    let mut pres = match (&args.presentation, args.sphere) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            parse_presentation(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        (None, Some(n)) => build_sphere(n).map_err(usage)?,
        (None, None) => return Err(Failure::Usage("one of --sphere or --presentation is required".into())),
    };
    if let Some(b) = budget()? {
        pres.set_budget(b);
    }
    Ok(pres)
}

fn sphere_params(report: Report, args: &SphereArgs) -> Report {
    match (&args.presentation, args.sphere) {
        (Some(p), _) => report.param("presentation", p.display().to_string()),
        (None, Some(n)) => report.param("N", n),
        _ => report,
    }
}

/// The presentation the projector lives over, and the projector itself.
fn projector(args: &ProjectorArgs) -> Result<(SpherePresentation, NCMatrix), Failure> {
    let pres = load(&args.sphere)?;
    match args.projector {
        ProjectorKind::Twisted => {
            let e = twisted_projector(&pres).map_err(runtime)?;
            Ok((pres, e))
        }
        kind => {
            let pres = pres.with_unit_scales().map_err(runtime)?;
            let e = match kind {
                ProjectorKind::Normal => normal_projector(&pres),
                _ => cotangent_projector(&pres),
            }
            .map_err(runtime)?;
            Ok((pres, e))
        }
    }
}

fn kind_name(k: ProjectorKind) -> &'static str {
    match k {
        ProjectorKind::Twisted => "twisted",
        ProjectorKind::Normal => "normal",
        ProjectorKind::Cotangent => "cotangent",
    }
}

fn scalar_value(c: &QScalar) -> Value {
    match c.as_integer() {
        Some(n) => json!(n),
        None => json!(c.to_string()),
    }
}

fn verify(args: &ProjectorArgs, exec: Execution) -> CmdResult {
    let mut report = sphere_params(Report::start("verify", ""), &args.sphere).param("projector", kind_name(args.projector));
    let (pres, e) = projector(args)?;
    report.sphere = pres.name().to_string();
    let r = verify_projection(&e, &pres, exec).map_err(runtime)?;
    report.residual_term_count = r.residual_term_count();
    for w in &r.witnesses {
        report.witness(format!("{}[{},{}]: {}", w.check, w.row, w.col, w.residual));
    }
    report.value = Some(json!({ "idempotent": r.idempotent, "self_adjoint": r.self_adjoint, "size": e.rows() }));
    Ok(vec![report.finish(r.pass())])
}

fn rank_cmd(args: &ProjectorArgs) -> CmdResult {
    let mut report = sphere_params(Report::start("rank", ""), &args.sphere).param("projector", kind_name(args.projector));
    let (pres, e) = projector(args)?;
    report.sphere = pres.name().to_string();
    let r = rank(&e, &pres).map_err(runtime)?;
    report.value = Some(json!(r));
    Ok(vec![report.finish(true)])
}

fn charge(args: &SphereArgs) -> CmdResult {
    let mut report = sphere_params(Report::start("charge", ""), args);
    let pres = load(args)?;
    report.sphere = pres.name().to_string();
    if pres.dim() != 3 {
        return Err(Failure::Usage(format!("charge is defined on the 2-sphere only (N = 3), got N = {}", pres.dim())));
    }
    let e = twisted_projector(&pres).map_err(runtime)?;
    let c = monopole_charge(&e, &pres).map_err(runtime)?;
    report.value = Some(scalar_value(&c));
    Ok(vec![report.finish(true)])
}

fn normal_form(args: &SphereArgs, expr: &str) -> CmdResult {
    let mut report = sphere_params(Report::start("normal-form", ""), args).param("expr", expr);
    let pres = load(args)?;
    report.sphere = pres.name().to_string();
    let p = parse_poly(expr, pres.alphabet()).map_err(|e| Failure::Usage(format!("--expr: {e}")))?;
    let nf = pres.normal_form(&p).map_err(runtime)?;
    report.value = Some(json!(nf.to_string()));
    Ok(vec![report.finish(true)])
}

fn relations_check(args: &SphereArgs) -> CmdResult {
    let mut report = sphere_params(Report::start("relations-check", ""), args);
    let pres = load(args)?;
    report.sphere = pres.name().to_string();
    let e = twisted_projector(&pres).map_err(runtime)?;
    let r = relations_from_projector(&e, &pres).map_err(runtime)?;
    report.residual_term_count = r.missing_relations.len() + r.stray_entries.len();
    for label in &r.missing_relations {
        report.witness(format!("relation outside projector span: {label}"));
    }
    for ((i, j), p) in &r.stray_entries {
        report.witness(format!("E^2-E[{i},{j}] outside relation span: {p}"));
    }
    report.value = Some(json!({
        "relations_in_entry_span": r.relations_in_entry_span,
        "entries_in_relation_span": r.entries_in_relation_span,
        "entry_span_dim": r.entry_span_dim,
        "relation_span_dim": r.relation_span_dim,
    }));
    Ok(vec![report.finish(r.pass())])
}

fn classical(args: &ProjectorArgs, samples: usize, seed: u64, tol: f64, exec: Execution) -> CmdResult {
    let mut report = sphere_params(Report::start("classical", ""), &args.sphere)
        .param("projector", kind_name(args.projector))
        .param("samples", samples)
        .param("seed", seed);
    let (pres, e) = projector(args)?;
    report.sphere = pres.name().to_string();
    let r = classical_sample_eval(&e, &pres, samples, seed, exec).map_err(runtime)?;
    report.numeric("idempotent", r.max_idempotent, tol);
    report.numeric("self_adjoint", r.max_adjoint, tol);
    report.numeric("trace_minus_rank", r.max_trace_defect, tol);
    report.value = Some(json!({ "rank": r.rank }));
    Ok(vec![report.finish(true)])
}

fn rep_check(q: f64, r: f64, cutoff: usize, tol: f64, sign: SignArg, exec: Execution) -> CmdResult {
    let pres = build_sphere(5).map_err(runtime)?;
    let rep = build_rep_s4(q, r, cutoff, sign.into()).map_err(usage)?;
    let e = twisted_projector(&pres).map_err(runtime)?;
    let mut report = Report::start("rep-check", pres.name())
        .param("q", q)
        .param("r", r)
        .param("cutoff", cutoff)
        .param("sign", format!("{sign:?}").to_lowercase());
    let rel = check_relations(&rep, &pres, tol, exec).map_err(usage)?;
    let proj = check_projector(&rep, &e, &pres, tol, exec).map_err(usage)?;
    for res in &rel.residuals {
        report.numeric(format!("relation {}", res.label), res.value, tol);
    }
    for res in &proj.residuals {
        report.numeric(format!("projector {}", res.label), res.value, tol);
    }
    Ok(vec![report.finish(rel.pass && proj.pass)])
}

fn build_presentation(dim: usize, out: Option<&PathBuf>) -> CmdResult {
    let mut report = Report::start("build-presentation", "").param("N", dim);
    let mut pres = build_sphere(dim).map_err(usage)?;
    if let Some(b) = budget()? {
        pres.set_budget(b);
    }
    report.sphere = pres.name().to_string();
    let text = pres.to_text();
    let reparsed = parse_presentation(&text).map_err(runtime)?;
    match out {
        Some(path) => {
            fs::write(path, &text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
            report = report.param("out", path.display().to_string());
            report.value = Some(json!({ "rules": pres.rules().rules().len() }));
        }
        None => report.value = Some(json!(text)),
    }
    Ok(vec![report.finish(reparsed == pres)])
}

#[allow(clippy::too_many_arguments)]
fn trace_class(q: f64, r: f64, power: u32, max_cutoff: usize, sign: SignArg, tol: f64, gap_tol: f64) -> CmdResult {
    let sphere = build_sphere(5).map_err(runtime)?;
    let mut report = Report::start("trace-class", sphere.name())
        .param("q", q)
        .param("r", r)
        .param("power", power)
        .param("max_cutoff", max_cutoff)
        .param("sign", format!("{sign:?}").to_lowercase());
    let t = trace_class_evidence(q, r, sign.into(), max_cutoff, power).map_err(usage)?;
    report.numeric("relative_tail", t.relative_tail, tol);
    report.numeric("x2_top_singular_gap", t.x2_gap(), gap_tol);
    report.value = Some(json!({
        "partial_trace": t.partial_traces.last(),
        "tail": t.tail,
        "last_increment_ratio": t.increment_ratios.last(),
        "x2_top_singular": t.x2_top_singular.last().map(|p| p.1),
        "x2_limit": t.x2_limit,
    }));
    Ok(vec![report.finish(true)])
}

fn dispatch(cli: &Cli) -> CmdResult {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    match &cli.command {
        Command::Verify(a) => verify(a, exec),
        Command::Rank(a) => rank_cmd(a),
        Command::Charge(a) => charge(a),
        Command::NormalForm { sphere, expr } => normal_form(sphere, expr),
        Command::RelationsCheck(a) => relations_check(a),
        Command::Classical { proj, samples, seed, tol } => classical(proj, *samples, *seed, *tol, exec),
        Command::RepCheck { q, r, cutoff, tol, sign } => rep_check(*q, *r, *cutoff, *tol, *sign, exec),
        Command::BuildPresentation { dim, out } => build_presentation(*dim, out.as_ref()),
        Command::TraceClass { q, r, power, max_cutoff, sign, tol, gap_tol } => {
            trace_class(*q, *r, *power, *max_cutoff, *sign, *tol, *gap_tol)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(reports) => {
            let mut out = std::io::stdout().lock();
            let mut all = true;
            for r in &reports {
                all &= r.pass;
                // A closed pipe downstream is not a verification failure.
                let _ = writeln!(out, "{}", serde_json::to_string(r).expect("reports serialize"));
            }
            if all {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
