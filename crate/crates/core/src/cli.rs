//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::equilibria::equilibria_of;
use crate::error::{Error, Result};
use crate::manifolds::{
    assemble_invariant_graph, find_connection, trace_1d_manifolds_with, ClosureRule, ManifoldTrace, TraceOptions,
    TraceStatus, DEFAULT_TRACE_TMAX,
};
use crate::polyfield::{parse_system_with, zoo, zoo_entry, PolyVectorField, SystemId};
use crate::report::{analyze, AnalyzeOptions, SystemDescriptor, SCHEMA_VERSION, TOOL_VERSION};
use crate::sphere_degree::{index_at_infinity_with, sphere_map_degree, DegreeMethod};
use crate::theorem_engine::check_hypotheses_from;

#[derive(Parser, Debug)]
#[command(name = "polyflow", version, about = "Equilibria, index at infinity and invariant manifolds of polynomial 3D flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Built-in systems.
    Zoo {
        #[command(subcommand)]
        action: ZooAction,
    },
    /// Full pipeline with a JSON report.
    Analyze {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        component: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_TRACE_TMAX)]
        t_max: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Degree of F/|F| on spheres; without radii, the index at infinity.
    Degree {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long = "radius")]
        radii: Vec<f64>,
        #[arg(long, default_value = "regular-value")]
        method: DegreeMethod,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Hypothesis report for one velocity component.
    CheckTheorem {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        component: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Traces the 1D manifolds of equilibria with a complex pair.
    Trace {
        #[command(flatten)]
        system: SystemArgs,
        /// Index into the equilibrium list; all when omitted.
        #[arg(long)]
        equilibrium: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_TRACE_TMAX)]
        t_max: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Shooting search for a symmetric heteroclinic connection.
    SweepConnection {
        #[command(flatten)]
        system: SystemArgs,
        /// Parameter varied by the sweep.
        #[arg(long, default_value = "c")]
        vary: String,
        #[arg(long, default_value_t = 0.2)]
        c_min: f64,
        #[arg(long, default_value_t = 2.0)]
        c_max: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Subcommand, Debug)]
enum ZooAction {
    List {
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct SystemArgs {
    /// Built-in system id.
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    system: Option<String>,
    /// System definition file.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Parameter override `name=value`; repeatable.
    #[arg(long = "param", value_parser = parse_kv)]
    params: Vec<(String, f64)>,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Write the JSON report here (`-` for stdout).
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Export trajectories as CSV into this directory.
    #[arg(long)]
    csv_dir: Option<PathBuf>,
}

fn parse_kv(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad value in `{s}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

struct Loaded {
    field: PolyVectorField,
    origin: String,
    default_component: usize,
}

impl SystemArgs {
    fn overrides(&self) -> BTreeMap<String, f64> {
        self.params.iter().cloned().collect()
    }

    fn load_with(&self, overrides: &BTreeMap<String, f64>) -> Result<Loaded> {
        if let Some(name) = &self.system {
            let id: SystemId = name.parse()?;
            let entry = zoo_entry(id).ok_or_else(|| Error::UnknownSystem(name.clone()))?;
            Ok(Loaded { field: zoo(id, overrides)?, origin: "zoo".into(), default_component: entry.default_component })
        } else {
            let path = self.file.as_ref().expect("clap enforces --system or --file");
            let text = fs::read_to_string(path)?;
            let mut field = parse_system_with(&text, overrides)?;
            field.name = path.file_stem().map_or_else(|| "custom".into(), |s| s.to_string_lossy().into_owned());
            Ok(Loaded { field, origin: path.display().to_string(), default_component: 1 })
        }
    }

    fn load(&self) -> Result<Loaded> {
        self.load_with(&self.overrides())
    }
}

fn exit_code_of(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::UnknownSystem(_)
        | Error::UnknownParameter { .. }
        | Error::ParameterOutOfRange { .. }
        | Error::InvalidArgument(_)
        | Error::Io(_) => 2,
        _ => 1,
    }
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_of(&e)
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Zoo { action: ZooAction::List { json } } => zoo_list(json.as_deref()),
        Command::Analyze { system, component, t_max, out } => cmd_analyze(&system, component, t_max, &out),
        Command::Degree { system, radii, method, out } => cmd_degree(&system, &radii, method, &out),
        Command::CheckTheorem { system, component, out } => cmd_check(&system, component, &out),
        Command::Trace { system, equilibrium, eps, t_max, out } => cmd_trace(&system, equilibrium, eps, t_max, &out),
        Command::SweepConnection { system, vary, c_min, c_max, step, tol, out } => {
            cmd_sweep(&system, &vary, (c_min, c_max), step, tol, &out)
        }
    }
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let Some(path) = path else { return Ok(()) };
    let text = serde_json::to_string_pretty(value)? + "\n";
    if path == Path::new("-") {
        print!("{text}");
    } else {
        fs::write(path, text)?;
    }
    Ok(())
}

/// Human-readable output goes to stdout unless the JSON does.
fn say(out: &OutputArgs, line: impl AsRef<str>) {
    if out.json.as_deref() != Some(Path::new("-")) {
        println!("{}", line.as_ref());
    }
}

fn component_of(loaded: &Loaded, component: Option<usize>) -> Result<usize> {
    let i = component.unwrap_or(loaded.default_component);
    if !(1..=3).contains(&i) {
        return Err(Error::InvalidArgument(format!("component must be 1, 2 or 3, got {i}")));
    }
    Ok(i)
}

fn export_traces(dir: &Path, field: &PolyVectorField, traces: &[(String, &ManifoldTrace)]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (name, t) in traces {
        let f = fs::File::create(dir.join(format!("{name}.csv")))?;
        t.polyline.write_csv(field, std::io::BufWriter::new(f))?;
    }
    Ok(())
}

fn trace_name(prefix: &str, t: &ManifoldTrace) -> String {
    format!(
        "{prefix}_{}_{}",
        match t.stability {
            crate::manifolds::Stability::Stable => "stable",
            crate::manifolds::Stability::Unstable => "unstable",
        },
        match t.branch {
            crate::manifolds::Branch::Plus => "plus",
            crate::manifolds::Branch::Minus => "minus",
        }
    )
}

fn zoo_list(json: Option<&Path>) -> Result<i32> {
    let entries: Vec<_> = SystemId::BUILTIN.iter().filter_map(|&id| zoo_entry(id)).collect();
    let to_stdout = json == Some(Path::new("-"));
    if !to_stdout {
        for e in &entries {
            let params: Vec<String> = e.params.iter().map(|p| format!("{}={}", p.name, p.default)).collect();
            println!("{:<18} component {}  {}", e.id.as_str(), e.default_component, params.join(" "));
        }
    }
    let doc: Vec<_> = entries
        .iter()
        .map(|e| json!({"id": e.id, "params": e.params, "default_component": e.default_component, "source": e.source()}))
        .collect();
    write_json(json, &json!({"schema_version": SCHEMA_VERSION, "systems": doc}))?;
    Ok(0)
}

fn cmd_analyze(sys: &SystemArgs, component: Option<usize>, t_max: f64, out: &OutputArgs) -> Result<i32> {
    let loaded = sys.load()?;
    let i = component_of(&loaded, component)?;
    let report = analyze(&loaded.field, &loaded.origin, &AnalyzeOptions { component: i, rng_seed: out.seed, t_max });
    say(out, format!("system {} ({})", loaded.field.name, loaded.origin));
    for e in &report.equilibria {
        say(out, format!("  equilibrium {:?} {:?} index {:?}", e.location.as_slice(), e.classification, e.local_index));
    }
    if let Some(idx) = &report.index_at_infinity {
        say(out, format!("  index at infinity {} (stable {})", idx.index, idx.stable));
    }
    if let Some(h) = &report.hypotheses {
        say(out, format!("  hypotheses (component {i}): {:?} {:?}", h.overall, h.failures()));
    }
    if let Some(v) = &report.verification {
        say(out, format!("  verified {} unknot {}", v.verified, v.unknot_certified));
        if let Some(dir) = &out.csv_dir {
            let named: Vec<(String, &ManifoldTrace)> = v
                .traces
                .iter()
                .enumerate()
                .map(|(k, t)| (trace_name(&format!("{}_trace{k}", loaded.field.name), t), t))
                .collect();
            export_traces(dir, &loaded.field, &named)?;
        }
    }
    for r in &report.outcome.reasons {
        eprintln!("reason: {r}");
    }
    write_json(out.json.as_deref(), &report)?;
    Ok(report.outcome.exit_code)
}

fn cmd_degree(sys: &SystemArgs, radii: &[f64], method: DegreeMethod, out: &OutputArgs) -> Result<i32> {
    let loaded = sys.load()?;
    let f = &loaded.field;
    let descriptor = SystemDescriptor::new(f, &loaded.origin);
    if radii.is_empty() {
        let eqs = equilibria_of(f)?;
        let idx = index_at_infinity_with(f, &eqs, out.seed)?;
        say(out, format!("index at infinity {} (degrees {:?} at radii {:?})", idx.index, idx.degrees, idx.radii));
        let code = if idx.stable { 0 } else { 1 };
        if !idx.stable {
            eprintln!("reason: degree unstable across radii");
        }
        write_json(out.json.as_deref(), &json!({"schema_version": SCHEMA_VERSION, "system": descriptor, "index_at_infinity": idx}))?;
        return Ok(code);
    }
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for &r in radii {
        match sphere_map_degree(f, r, method, out.seed) {
            Ok(rep) => {
                say(out, format!("radius {r}: degree {}", rep.degree));
                reports.push(json!({"radius": r, "report": rep}));
            }
            Err(e) if exit_code_of(&e) == 2 => return Err(e),
            Err(e) => {
                say(out, format!("radius {r}: {e}"));
                failures.push(format!("radius {r}: {e}"));
                reports.push(json!({"radius": r, "error": e.to_string()}));
            }
        }
    }
    for r in &failures {
        eprintln!("reason: {r}");
    }
    write_json(out.json.as_deref(), &json!({"schema_version": SCHEMA_VERSION, "system": descriptor, "degrees": reports, "reasons": failures}))?;
    Ok(if failures.is_empty() { 0 } else { 1 })
}

fn cmd_check(sys: &SystemArgs, component: Option<usize>, out: &OutputArgs) -> Result<i32> {
    let loaded = sys.load()?;
    let i = component_of(&loaded, component)?;
    let f = &loaded.field;
    let eqs = equilibria_of(f);
    let idx = match &eqs {
        Ok(e) => index_at_infinity_with(f, e, out.seed),
        Err(_) => Err(Error::Inconclusive("no equilibria to enclose".into())),
    };
    let rep = check_hypotheses_from(f, i, eqs, idx)?;
    say(out, format!("{} component {i}: {:?}", f.name, rep.overall));
    for e in &rep.entries {
        say(out, format!("  {:<4} {:?}  {}", e.id, e.status, e.details));
    }
    for d in &rep.diagnostics {
        say(out, format!("  note: {d}"));
    }
    let code = if rep.passed() { 0 } else { 1 };
    if code != 0 {
        eprintln!("reason: hypotheses fail: {:?}", rep.failures());
    }
    write_json(
        out.json.as_deref(),
        &json!({
            "schema_version": SCHEMA_VERSION,
            "tool_version": TOOL_VERSION,
            "system": SystemDescriptor::new(f, &loaded.origin),
            "component": i,
            "hypotheses": rep,
        }),
    )?;
    Ok(code)
}

fn cmd_trace(sys: &SystemArgs, which: Option<usize>, eps: Option<f64>, t_max: f64, out: &OutputArgs) -> Result<i32> {
    let loaded = sys.load()?;
    let f = &loaded.field;
    let eqs = equilibria_of(f)?;
    let chosen: Vec<usize> = match which {
        Some(k) if k < eqs.len() => vec![k],
        Some(k) => return Err(Error::InvalidArgument(format!("equilibrium {k} out of range (found {})", eqs.len()))),
        None => (0..eqs.len()).filter(|&k| eqs[k].classification.has_complex_pair()).collect(),
    };
    let targets: Vec<_> = eqs.iter().map(|e| e.location).collect();
    let opts = TraceOptions { eps, t_max, targets: Some(targets), ..TraceOptions::default() };
    let mut all = Vec::new();
    for k in chosen {
        for t in trace_1d_manifolds_with(f, &eqs[k], &opts)? {
            all.push((trace_name(&format!("{}_eq{k}", f.name), &t), t));
        }
    }
    let mut reasons = Vec::new();
    for (name, t) in &all {
        say(out, format!("{name}: {:?}, end {:?}", t.status, t.end_point().as_slice()));
        if matches!(t.status, TraceStatus::BoundedMaxtime | TraceStatus::Failed { .. }) {
            reasons.push(format!("{name}: {:?}", t.status));
        }
    }
    if let Some(dir) = &out.csv_dir {
        let named: Vec<(String, &ManifoldTrace)> = all.iter().map(|(n, t)| (n.clone(), t)).collect();
        export_traces(dir, f, &named)?;
    }
    for r in &reasons {
        eprintln!("reason: {r}");
    }
    let summaries: Vec<_> = all.iter().map(|(n, t)| json!({"name": n, "trace": t.summary()})).collect();
    write_json(
        out.json.as_deref(),
        &json!({"schema_version": SCHEMA_VERSION, "system": SystemDescriptor::new(f, &loaded.origin), "traces": summaries, "reasons": reasons}),
    )?;
    Ok(if reasons.is_empty() { 0 } else { 1 })
}

fn cmd_sweep(sys: &SystemArgs, vary: &str, interval: (f64, f64), step: f64, tol: f64, out: &OutputArgs) -> Result<i32> {
    let base = sys.overrides();
    // Validates the system and the varied parameter up front.
    let probe = sys.load_with(&base)?;
    if !probe.field.parameters.contains_key(vary) {
        return Err(Error::UnknownParameter { system: probe.field.name.clone(), param: vary.to_string() });
    }
    let family = |c: f64| {
        let mut o = base.clone();
        o.insert(vary.to_string(), c);
        sys.load_with(&o).map(|l| l.field)
    };
    let search = match find_connection(&family, interval, step, tol) {
        Ok(s) => s,
        Err(e) if exit_code_of(&e) == 2 => return Err(e),
        Err(e) => {
            say(out, format!("no connection: {e}"));
            eprintln!("reason: {e}");
            write_json(
                out.json.as_deref(),
                &json!({"schema_version": SCHEMA_VERSION, "system": SystemDescriptor::new(&probe.field, &probe.origin), "error": e.to_string()}),
            )?;
            return Ok(1);
        }
    };
    let field = family(search.c_star)?;
    let eqs = equilibria_of(&field)?;
    let mut traces = Vec::new();
    for eq in eqs.iter().filter(|e| e.real_eigenvalue().is_some()) {
        traces.extend(trace_1d_manifolds_with(&field, eq, &TraceOptions::default())?);
    }
    let graph = assemble_invariant_graph(&field, &traces, &ClosureRule::Connection(search.certificate.clone()))?;
    say(out, format!("{vary}* = {:.12} (bracket width {:.1e})", search.c_star, search.bracket_width));
    say(out, format!("connection distance {:.3e}, certified {}", search.certificate.distance, search.certificate.certified));
    say(out, format!("graph: {:?}", graph.classification));
    if let Some(dir) = &out.csv_dir {
        let named: Vec<(String, &ManifoldTrace)> = traces
            .iter()
            .enumerate()
            .map(|(k, t)| (trace_name(&format!("{}_cstar_trace{k}", field.name), t), t))
            .collect();
        export_traces(dir, &field, &named)?;
    }
    let certified = search.certificate.certified;
    if !certified {
        eprintln!("reason: connection not certified");
    }
    write_json(
        out.json.as_deref(),
        &json!({
            "schema_version": SCHEMA_VERSION,
            "system": SystemDescriptor::new(&field, &probe.origin),
            "vary": vary,
            "search": search,
            "graph": graph,
            "traces": traces.iter().map(ManifoldTrace::summary).collect::<Vec<_>>(),
        }),
    )?;
    Ok(if certified { 0 } else { 1 })
}
