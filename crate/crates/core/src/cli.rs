//! Command-line front end. `run` parses arguments, executes one command and
//! returns the process exit status.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::cmatching::{max_weight_c_matching, SolverError};
use crate::coop::{
    detect_bad_vertices, in_core, in_prekernel, mask_members, theorem1_harness, CoalitionValueTable, CoopError,
    GadgetReport, PowerMatrix,
};
use crate::io::{instance_to_doc, load_allocation, load_instance, load_solution, solution_to_doc, DocError};
use crate::model::{allocation_of, format_rational, Allocation, Instance, Rational, Solution};
use crate::pipeline::{solve, PipelineError, SolveStatus};
use crate::reduction::{build_auxiliary, ReductionError};
use crate::repro::{example1_verify, lemma1_verify, Transcript};
use crate::semantics::{is_balanced, outside_options, BalanceReport, StabilityViolation};
use crate::unit_solver::{Route, SolverConfig, SolverMode, UnitSolverError};

pub const EXIT_OK: i32 = 0;
/// `check`: valid but not balanced; `repro`: a certification failed; any
/// command: an internal self-check failed.
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_NONE_EXISTS: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_INPUT: i32 = 4;
pub const EXIT_GUARD: i32 = 5;

/// Environment variable read for the default `--tol`.
pub const TOLERANCE_ENV: &str = "BARGAIN_TOL";

#[derive(Debug, Parser)]
#[command(name = "bargain", version, about = "Balanced and stable solutions of network bargaining games with capacities")]
pub struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    #[value(alias = "structured")]
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Damped rebalancing, rational snapping, exact fallback.
    Numeric,
    /// Witness-pattern enumeration only.
    Exact,
}

#[derive(Debug, clap::Args)]
pub struct SolverFlags {
    #[arg(long, value_enum, default_value_t = Mode::Numeric)]
    pub mode: Mode,
    /// Residual bound for the numeric phase.
    #[arg(long, env = TOLERANCE_ENV, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iters: usize,
    /// Step fraction in (0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub damping: f64,
}

impl SolverFlags {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            mode: match self.mode {
                Mode::Numeric => SolverMode::NumericThenExact,
                Mode::Exact => SolverMode::ExactEnumeration,
            },
            tolerance: self.tol,
            max_iterations: self.max_iters,
            damping: self.damping,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fixture {
    Lemma1,
    Example1,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a balanced solution on a maximum c-matching, or certify that none exists.
    Solve {
        instance: PathBuf,
        /// Solution document destination (default: standard output).
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Where to write the no-solution certificate (default: standard output).
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Validate a solution and report stability and balance.
    Check { instance: PathBuf, solution: PathBuf },
    /// Build the unit-capacity auxiliary instance.
    Reduce {
        instance: PathBuf,
        /// Take the matching from this solution (default: a maximum c-matching).
        #[arg(long)]
        solution: Option<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Copy map and labelling destination (default: next to --output).
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Core, prekernel, powers and gadgets of the matching game.
    Coop {
        instance: PathBuf,
        #[arg(long)]
        allocation: Option<PathBuf>,
        #[arg(long)]
        solution: Option<PathBuf>,
        /// Also print nu(S) for every coalition.
        #[arg(long)]
        table: bool,
    },
    /// Re-certify a pinned fixture.
    Repro {
        #[arg(value_enum)]
        fixture: Fixture,
        /// Also write the transcript here.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Guard(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Guard(_) => EXIT_GUARD,
            Failure::Internal(_) => EXIT_FAILED,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Guard(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<DocError> for Failure {
    fn from(e: DocError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        Failure::Guard(format!("{e}; the exact search only handles small instances"))
    }
}

impl From<CoopError> for Failure {
    fn from(e: CoopError) -> Self {
        match e {
            CoopError::TooManyPlayers { .. } | CoopError::Solver(_) => Failure::Guard(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<ReductionError> for Failure {
    fn from(e: ReductionError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Solver(s) | PipelineError::Unit(UnitSolverError::TooLarge(s)) => s.into(),
            PipelineError::Unit(UnitSolverError::InvalidConfig(m)) => Failure::Input(m),
            PipelineError::Reduction(r) => r.into(),
            other => Failure::Internal(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

/// Writes through a temporary file in the same directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let fail = |e: std::io::Error| Failure::Input(format!("cannot write {}: {e}", path.display()));
    fs::write(&tmp, contents).map_err(fail)?;
    fs::rename(&tmp, path).map_err(fail)
}

fn emit(out: &mut dyn Write, path: Option<&Path>, contents: &str) -> Result<(), Failure> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => writeln!(out, "{contents}").map_err(|e| Failure::Internal(e.to_string())),
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values serialize")
}

fn r(v: &Rational) -> String {
    format_rational(v)
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if code == EXIT_OK { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve { instance, output, certificate, solver } => {
            cmd_solve(cli.format, instance, output.as_deref(), certificate.as_deref(), solver, out, err)
        }
        Command::Check { instance, solution } => cmd_check(cli.format, instance, solution, out),
        Command::Reduce { instance, solution, output, sidecar } => {
            cmd_reduce(instance, solution.as_deref(), output.as_deref(), sidecar.as_deref(), out)
        }
        Command::Coop { instance, allocation, solution, table } => {
            cmd_coop(cli.format, instance, allocation.as_deref(), solution.as_deref(), *table, out)
        }
        Command::Repro { fixture, output } => cmd_repro(cli.format, *fixture, output.as_deref(), out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn balance_json(inst: &Instance, report: &BalanceReport) -> Value {
    let id = |u: usize| inst.id(u).to_string();
    json!({
        "stable": report.stable,
        "balanced": report.balanced,
        "edges": report.edges.iter().map(|b| json!({
            "u": id(b.u), "v": id(b.v),
            "z_uv": r(&b.z_uv), "alpha_u": r(&b.alpha_u),
            "z_vu": r(&b.z_vu), "alpha_v": r(&b.alpha_v),
            "asymmetry": r(&b.asymmetry),
        })).collect::<Vec<_>>(),
        "stability_violations": report.stability_violations.iter().map(|s| match s {
            StabilityViolation::ShareBelowOutsideOption { vertex, partner, share, outside } => json!({
                "kind": "share-below-outside-option", "vertex": id(*vertex), "partner": id(*partner),
                "share": r(share), "outside_option": r(outside),
            }),
            StabilityViolation::UnsaturatedWithOutsideOption { vertex, outside } => json!({
                "kind": "unsaturated-with-outside-option", "vertex": id(*vertex), "outside_option": r(outside),
            }),
        }).collect::<Vec<_>>(),
        "balance_violations": report.balance_violations.iter().map(|b| json!({
            "u": id(b.u), "v": id(b.v), "asymmetry": r(&b.asymmetry),
        })).collect::<Vec<_>>(),
    })
}

fn balance_text(inst: &Instance, report: &BalanceReport) -> String {
    let id = |u: usize| inst.id(u);
    let yes = |b: bool| if b { "yes" } else { "no" };
    let mut s = format!("stable: {}\nbalanced: {}\n", yes(report.stable), yes(report.balanced));
    for b in &report.edges {
        s += &format!(
            "edge {u}-{v}: z_{u}{v} = {}, alpha_{u} = {}, z_{v}{u} = {}, alpha_{v} = {}, asymmetry = {}\n",
            r(&b.z_uv),
            r(&b.alpha_u),
            r(&b.z_vu),
            r(&b.alpha_v),
            r(&b.asymmetry),
            u = id(b.u),
            v = id(b.v),
        );
    }
    for v in &report.stability_violations {
        s += &match v {
            StabilityViolation::ShareBelowOutsideOption { vertex, partner, share, outside } => format!(
                "unstable: z_{a}{b} = {} is below alpha_{a} = {}\n",
                r(share),
                r(outside),
                a = id(*vertex),
                b = id(*partner)
            ),
            StabilityViolation::UnsaturatedWithOutsideOption { vertex, outside } => {
                format!("unstable: {} is unsaturated with alpha = {}\n", id(*vertex), r(outside))
            }
        };
    }
    for b in &report.balance_violations {
        s += &format!("unbalanced: edge {}-{} has asymmetry {}\n", id(b.u), id(b.v), r(&b.asymmetry));
    }
    s
}

fn cmd_solve(
    format: Format,
    instance: &Path,
    output: Option<&Path>,
    certificate: Option<&Path>,
    flags: &SolverFlags,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let inst = load_instance(&read(instance)?)?;
    let cfg = flags.config();
    cfg.validate().map_err(|e| Failure::Input(e.to_string()))?;
    let run = solve(&inst, &cfg)?;
    let aux = run.bundle.aux();
    let summary = |status: &str| {
        let mut v = json!({
            "status": status,
            "matching_weight": r(&run.optimum),
            "aux_vertices": aux.vertex_count(),
            "aux_edges": aux.edge_count(),
            "iterations": run.unit.iterations,
        });
        if let crate::unit_solver::Certificate::Verified { route, .. } = &run.unit.certificate {
            v["route"] = json!(match route {
                Route::Snapped { denominator_bound } => format!("snapped (denominator bound {denominator_bound})"),
                Route::ActivePattern => "active witness pattern".into(),
                Route::Enumeration => "witness-pattern enumeration".into(),
            });
        }
        v
    };
    let report_summary = |err: &mut dyn Write, v: &Value| {
        let _ = match format {
            Format::Json => writeln!(err, "{}", pretty(v)),
            Format::Text => {
                let mut s = String::new();
                for (k, val) in v.as_object().expect("object") {
                    s += &format!("{k}: {}\n", val.as_str().map(str::to_string).unwrap_or_else(|| val.to_string()));
                }
                write!(err, "{s}")
            }
        };
    };
    match &run.status {
        SolveStatus::Balanced { solution, .. } => {
            let doc = serde_json::to_string_pretty(&solution_to_doc(&inst, solution)).expect("doc serializes");
            // re-check the document exactly as written
            let reread = load_solution(&inst, &doc).map_err(|e| Failure::Internal(e.to_string()))?;
            if !is_balanced(&inst, &reread).balanced {
                return Err(Failure::Internal("written solution failed its own balance check".into()));
            }
            emit(out, output, &doc)?;
            let mut v = summary("balanced");
            let alpha = outside_options(&inst, &reread);
            v["outside_options"] = Value::Object(
                (0..inst.vertex_count()).map(|u| (inst.id(u).to_string(), json!(r(&alpha[u])))).collect(),
            );
            report_summary(err, &v);
            Ok(EXIT_OK)
        }
        SolveStatus::NoneExists(cert) => {
            let mut v = summary("none-exists");
            v["integral_optimum"] = json!(r(&cert.integral_optimum));
            v["fractional_optimum"] = json!(r(&cert.fractional_optimum));
            v["fractional_witness"] = json!(aux
                .edges()
                .iter()
                .zip(&cert.fractional_witness)
                .filter(|(_, x)| **x != Rational::from_integer(0))
                .map(|(e, x)| json!({ "u": aux.id(e.u), "v": aux.id(e.v), "value": r(x) }))
                .collect::<Vec<_>>());
            emit(out, certificate, &pretty(&v))?;
            let _ = writeln!(
                err,
                "no balanced solution: the matching relaxation of the auxiliary instance reaches {} > {}",
                r(&cert.fractional_optimum),
                r(&cert.integral_optimum)
            );
            Ok(EXIT_NONE_EXISTS)
        }
        SolveStatus::Inconclusive(reason) => {
            let _ = writeln!(err, "inconclusive: {reason}");
            Ok(EXIT_INCONCLUSIVE)
        }
    }
}

fn cmd_check(format: Format, instance: &Path, solution: &Path, out: &mut dyn Write) -> Result<i32, Failure> {
    let inst = load_instance(&read(instance)?)?;
    let sol = load_solution(&inst, &read(solution)?)?;
    let report = is_balanced(&inst, &sol);
    let text = match format {
        Format::Json => pretty(&balance_json(&inst, &report)),
        Format::Text => balance_text(&inst, &report),
    };
    let _ = write!(out, "{text}");
    if format == Format::Json {
        let _ = writeln!(out);
    }
    Ok(if report.balanced { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_reduce(
    instance: &Path,
    solution: Option<&Path>,
    output: Option<&Path>,
    sidecar: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let inst = load_instance(&read(instance)?)?;
    let m = match solution {
        Some(p) => load_solution(&inst, &read(p)?)?.matching().clone(),
        None => max_weight_c_matching(&inst)?.0,
    };
    let bundle = build_auxiliary(&inst, &m)?;
    bundle.check_invariants().map_err(Failure::Internal)?;
    let aux = bundle.aux();
    let side = json!({
        "copies": (0..inst.vertex_count()).map(|u| (
            inst.id(u).to_string(),
            json!(bundle.copies(u).iter().map(|&c| aux.id(c)).collect::<Vec<_>>()),
        )).collect::<serde_json::Map<_, _>>(),
        "sigma": (0..inst.vertex_count()).map(|u| (
            inst.id(u).to_string(),
            json!(bundle.labels(u).iter().enumerate().map(|(i, &v)| (inst.id(v).to_string(), json!(i + 1))).collect::<serde_json::Map<_, _>>()),
        )).collect::<serde_json::Map<_, _>>(),
        "matching": bundle.aux_matching().pairs(aux),
    });
    let doc = serde_json::to_value(instance_to_doc(aux)).expect("doc serializes");
    match output {
        None => emit(out, None, &pretty(&json!({ "instance": doc, "sidecar": side })))?,
        Some(p) => {
            write_atomic(p, &pretty(&doc))?;
            let default = p.with_file_name(format!(
                "{}.sidecar.json",
                p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
            ));
            write_atomic(sidecar.unwrap_or(&default), &pretty(&side))?;
        }
    }
    Ok(EXIT_OK)
}

fn coalition(inst: &Instance, mask: u64) -> String {
    let ids: Vec<&str> = mask_members(mask).into_iter().map(|u| inst.id(u)).collect();
    format!("{{{}}}", ids.join(","))
}

fn gadget_json(inst: &Instance, report: &GadgetReport) -> Value {
    let id = |u: usize| inst.id(u).to_string();
    let path = |p: &Option<Vec<usize>>| p.as_ref().map(|p| p.iter().map(|&u| id(u)).collect::<Vec<_>>());
    json!({
        "bad": report.bad.iter().map(|&u| id(u)).collect::<Vec<_>>(),
        "tie_sensitive": report.tie_sensitive.iter().map(|&u| id(u)).collect::<Vec<_>>(),
        "entries": report.entries.iter().map(|g| json!({
            "u": id(g.u), "v": id(g.v), "v_prime": id(g.v_prime),
            "u_prime": g.u_prime.map(id),
            "type1_path": path(&g.type1), "type2_path": path(&g.type2),
        })).collect::<Vec<_>>(),
    })
}

fn cmd_coop(
    format: Format,
    instance: &Path,
    allocation: Option<&Path>,
    solution: Option<&Path>,
    show_table: bool,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let inst = load_instance(&read(instance)?)?;
    let sol: Option<Solution> = match solution {
        Some(p) => Some(load_solution(&inst, &read(p)?)?),
        None => None,
    };
    let x: Option<Allocation> = match (allocation, &sol) {
        (Some(p), _) => Some(load_allocation(&inst, &read(p)?)?),
        (None, Some(s)) => Some(allocation_of(&inst, s)),
        (None, None) => None,
    };
    let table = CoalitionValueTable::build(&inst)?;
    let id = |u: usize| inst.id(u).to_string();
    let mut report = serde_json::Map::new();
    report.insert("grand_value".into(), json!(r(&table.grand())));
    if show_table || x.is_none() {
        report.insert(
            "coalition_values".into(),
            json!((0..1u64 << inst.vertex_count())
                .map(|m| json!({ "coalition": coalition(&inst, m), "value": r(&table.value(m)) }))
                .collect::<Vec<_>>()),
        );
    }
    if let Some(x) = &x {
        let core = in_core(&table, x);
        let powers = PowerMatrix::compute(&table, x);
        let pk = in_prekernel(&powers);
        report.insert(
            "core".into(),
            json!({
                "member": core.in_core,
                "total": r(&core.total),
                "violation": core.violation.map(|(m, e)| json!({ "coalition": coalition(&inst, m), "excess": r(&e) })),
            }),
        );
        report.insert(
            "prekernel".into(),
            json!({
                "member": pk.in_prekernel,
                "violation": pk.violation.map(|(u, v, a, b)| json!({ "u": id(u), "v": id(v), "s_uv": r(&a), "s_vu": r(&b) })),
            }),
        );
        let n = inst.vertex_count();
        report.insert(
            "powers".into(),
            json!((0..n)
                .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
                .map(|(u, v)| {
                    let p = powers.get(u, v);
                    json!({ "u": id(u), "v": id(v), "s": r(&p.value), "witness": coalition(&inst, p.witness) })
                })
                .collect::<Vec<_>>()),
        );
    }
    if let Some(s) = &sol {
        report.insert("gadgets".into(), gadget_json(&inst, &detect_bad_vertices(&inst, s)));
        if let Some(x) = &x {
            let verdict = match theorem1_harness(&inst, &table, x, s) {
                Ok(v) => json!({
                    "conditions_met": v.conditions_met(),
                    "acyclic": v.acyclic,
                    "bad_vertices": v.bad_vertices.iter().map(|&u| id(u)).collect::<Vec<_>>(),
                    "balanced": v.balanced,
                    "prekernel": v.prekernel.in_prekernel,
                    "sides_agree": v.sides_agree(),
                    "power_bounds_hold": v.power_bounds_hold(),
                    "power_bounds": v.power_bounds.iter().map(|c| json!({
                        "u": id(c.u), "v": id(c.v), "s_uv": r(&c.power), "bound": r(&c.bound), "holds": c.holds(),
                    })).collect::<Vec<_>>(),
                    "confirmed": v.confirmed(),
                }),
                Err(e) => json!({ "not_applicable": e.to_string() }),
            };
            report.insert("equivalence".into(), verdict);
        }
    }
    let report = Value::Object(report);
    let _ = match format {
        Format::Json => writeln!(out, "{}", pretty(&report)),
        Format::Text => write!(out, "{}", coop_text(&report)),
    };
    Ok(EXIT_OK)
}

fn coop_text(report: &Value) -> String {
    let s = |v: &Value| v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string());
    let mark = |b: &Value| if b.as_bool() == Some(true) { "yes" } else { "no" };
    let mut t = format!("nu(N) = {}\n", s(&report["grand_value"]));
    if let Some(rows) = report["coalition_values"].as_array() {
        for row in rows {
            t += &format!("nu({}) = {}\n", s(&row["coalition"]), s(&row["value"]));
        }
    }
    if report.get("core").is_some() {
        t += &format!("core: {}\n", mark(&report["core"]["member"]));
        if let Some(v) = report["core"]["violation"].as_object() {
            t += &format!("  coalition {} has excess {}\n", s(&v["coalition"]), s(&v["excess"]));
        }
        t += &format!("prekernel: {}\n", mark(&report["prekernel"]["member"]));
        if let Some(v) = report["prekernel"]["violation"].as_object() {
            t += &format!("  s_{0}{1} = {2} but s_{1}{0} = {3}\n", s(&v["u"]), s(&v["v"]), s(&v["s_uv"]), s(&v["s_vu"]));
        }
        for p in report["powers"].as_array().into_iter().flatten() {
            t += &format!("s_{}{} = {} via {}\n", s(&p["u"]), s(&p["v"]), s(&p["s"]), s(&p["witness"]));
        }
    }
    if let Some(g) = report.get("gadgets") {
        let list = |v: &Value| v.as_array().map(|a| a.iter().map(s).collect::<Vec<_>>().join(", ")).unwrap_or_default();
        t += &format!("bad vertices: {}\n", if list(&g["bad"]).is_empty() { "none".into() } else { list(&g["bad"]) });
        for e in g["entries"].as_array().into_iter().flatten() {
            let mut line = format!("  u = {}, v = {}, v' = {}", s(&e["u"]), s(&e["v"]), s(&e["v_prime"]));
            if !e["u_prime"].is_null() {
                line += &format!(", u' = {}", s(&e["u_prime"]));
            }
            if !e["type1_path"].is_null() {
                line += &format!(", type-1 path {}", list(&e["type1_path"]));
            }
            if !e["type2_path"].is_null() {
                line += &format!(", type-2 path {}", list(&e["type2_path"]));
            }
            t += &(line + "\n");
        }
        if !list(&g["tie_sensitive"]).is_empty() {
            t += &format!("warning: verdict depends on tie-breaking for {}\n", list(&g["tie_sensitive"]));
        }
    }
    if let Some(v) = report.get("equivalence") {
        if let Some(why) = v.get("not_applicable") {
            t += &format!("equivalence check not applicable: {}\n", s(why));
        } else {
            t += &format!(
                "equivalence conditions met: {} (acyclic: {}, bad vertices: {})\n",
                mark(&v["conditions_met"]),
                mark(&v["acyclic"]),
                v["bad_vertices"].as_array().map_or(0, Vec::len)
            );
            t += &format!(
                "balanced: {}, prekernel: {}, power bounds hold: {}\n",
                mark(&v["balanced"]),
                mark(&v["prekernel"]),
                mark(&v["power_bounds_hold"])
            );
            if v["conditions_met"].as_bool() == Some(true) {
                t += &format!("equivalence confirmed: {}\n", mark(&v["confirmed"]));
            }
        }
    }
    t
}

fn transcript_json(t: &Transcript) -> Value {
    json!({
        "fixture": t.title,
        "passed": t.passed(),
        "fixture_error": t.fixture_error,
        "items": t.items.iter().map(|i| json!({
            "label": i.label,
            "passed": i.passed(),
            "checks": i.checks.iter().map(|c| json!({
                "name": c.name, "expected": c.expected, "actual": c.actual, "passed": c.passed,
            })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

fn cmd_repro(format: Format, fixture: Fixture, output: Option<&Path>, out: &mut dyn Write) -> Result<i32, Failure> {
    let t = match fixture {
        Fixture::Lemma1 => lemma1_verify(),
        Fixture::Example1 => example1_verify(),
    };
    let text = match format {
        Format::Json => pretty(&transcript_json(&t)) + "\n",
        Format::Text => t.to_string(),
    };
    let _ = write!(out, "{text}");
    if let Some(p) = output {
        write_atomic(p, &text)?;
    }
    Ok(if t.passed() { EXIT_OK } else { EXIT_FAILED })
}
