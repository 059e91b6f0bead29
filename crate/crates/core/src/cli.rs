//! The `justcheck` command line.
//!
//! Exit status: 0 on success or when a property holds, 1 when it fails
//! (or the systems are not bisimilar, or validation finds violations),
//! 2 on usage and input errors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::catalog::{self, fig3_matrix, ExampleJson, Goals};
use crate::ccs::{explore, fmt_components, parse, Action, Blocking, DEFAULT_MAX_STATES};
use crate::clts::{Clts, CltsJson, StateId};
use crate::equivalence::strong_bisimilar;
use crate::liveness::{check_liveness, liveness_matrix, Criterion, MatrixEntry};
use crate::runs::{classify, Run, RunJson};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "justcheck", version, about = "Liveness under justness and fairness for component-labelled CCS")]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Parse a CCS file and print its definitions.
    Parse {
        /// CCS source file.
        file: PathBuf,
    },
    /// Print the transition system of a process or example.
    Lts(SystemArgs),
    /// Check the non-interference property.
    Validate(SystemArgs),
    /// Report which completeness criteria a run satisfies.
    Classify {
        #[command(flatten)]
        system: SystemArgs,
        /// Run as `s0 -t1-> s1 @ cycle: s1 -t2-> s1`, or a JSON file with `prefix`/`cycle`.
        #[arg(long)]
        run: String,
    },
    /// Check that every run counted by a criterion reaches the goal.
    Liveness {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        goal: GoalArgs,
        /// empty, progress, justness, j-fairness, weak-fairness, strong-fairness or full-fairness.
        #[arg(long)]
        criterion: Criterion,
    },
    /// Liveness under every criterion.
    Matrix {
        /// The counter-program table: goals y=7 and x=1 for programs P and Q.
        #[arg(long)]
        paper_fig3: bool,
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        goal: GoalArgs,
    },
    /// Strong bisimilarity of two states, ignoring components.
    Bisim {
        /// Catalog name, CLTS JSON file or CCS file (`.ccs`).
        left: String,
        right: String,
        #[arg(long, default_value_t = 0)]
        left_state: usize,
        #[arg(long, default_value_t = 0)]
        right_state: usize,
    },
    /// Graphviz rendering; goal states are shaded.
    Dot {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        goal: GoalArgs,
    },
    /// List examples, print one, or write all as JSON files.
    Catalog {
        name: Option<String>,
        /// Directory to write `<name>.json` files into.
        #[arg(long, conflicts_with = "name")]
        export: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct SystemArgs {
    /// Catalog example.
    #[arg(long, group = "input")]
    example: Option<String>,
    /// CCS source file.
    #[arg(long, group = "input")]
    ccs: Option<PathBuf>,
    /// CLTS JSON file.
    #[arg(long, group = "input")]
    clts: Option<PathBuf>,
    /// Blocking actions for CCS input, comma separated (default: all visible).
    #[arg(long, requires = "ccs")]
    blocking: Option<String>,
    #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
    max_states: usize,
}

#[derive(Debug, Args)]
struct GoalArgs {
    /// Named goal of the example or JSON file.
    #[arg(long, conflicts_with = "goal_states")]
    goal: Option<String>,
    /// Goal as comma-separated state ids (`1,3` or `s1,s3`).
    #[arg(long)]
    goal_states: Option<String>,
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn with(code: i32, stdout: String) -> Self {
        Outcome { code, stdout, stderr: String::new() }
    }

    fn usage(msg: impl Into<String>) -> Self {
        let mut stderr = msg.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        Outcome { code: EXIT_USAGE, stdout: String::new(), stderr }
    }
}

struct Loaded {
    name: String,
    clts: Clts,
    goals: Goals,
}

/// Runs the command line `argv` (program name first).
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Outcome::ok(text),
                _ => Outcome::usage(text),
            };
        }
    };
    match dispatch(cli) {
        Ok(out) => out,
        Err(msg) => Outcome::usage(format!("error: {msg}")),
    }
}

fn dispatch(cli: Cli) -> Result<Outcome, String> {
    let json = cli.json;
    match cli.verb {
        Verb::Parse { file } => cmd_parse(&file, json),
        Verb::Lts(system) => {
            let sys = load(&system)?;
            Ok(Outcome::ok(if json { sys.clts.to_json_string() + "\n" } else { lts_text(&sys.clts) }))
        }
        Verb::Validate(system) => cmd_validate(&load(&system)?, json),
        Verb::Classify { system, run } => cmd_classify(&load(&system)?, &run, json),
        Verb::Liveness { system, goal, criterion } => {
            let sys = load(&system)?;
            let (goal_name, goal) = resolve_goal(&sys, &goal)?;
            cmd_liveness(&sys, &goal_name, &goal, criterion, json)
        }
        Verb::Matrix { paper_fig3, system, goal } => {
            if paper_fig3 {
                let m = fig3_matrix();
                return Ok(Outcome::ok(if json {
                    pretty(&m.to_json())
                } else {
                    m.render_text("Liveness goal:", "Program")
                }));
            }
            let sys = load(&system)?;
            let (goal_name, goal) = resolve_goal(&sys, &goal)?;
            let entries = [MatrixEntry { group: goal_name, label: sys.name.clone(), clts: &sys.clts, goal }];
            let m = liveness_matrix(&entries, &Criterion::ALL);
            Ok(Outcome::ok(if json { pretty(&m.to_json()) } else { m.render_text("Liveness goal:", "System") }))
        }
        Verb::Bisim { left, right, left_state, right_state } => cmd_bisim(&left, &right, left_state, right_state, json),
        Verb::Dot { system, goal } => {
            let sys = load(&system)?;
            let goal = if goal.goal.is_some() || goal.goal_states.is_some() {
                resolve_goal(&sys, &goal)?.1
            } else {
                BTreeSet::new()
            };
            Ok(Outcome::ok(sys.clts.export_dot(&goal)))
        }
        Verb::Catalog { name, export } => cmd_catalog(name.as_deref(), export.as_deref(), json),
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON value") + "\n"
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn parse_blocking(text: &str) -> Result<Blocking, String> {
    let set = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Action>().map_err(|e| e.to_string()))
        .collect::<Result<BTreeSet<_>, _>>()?;
    Ok(Blocking::Only(set))
}

fn load_ccs(path: &Path, blocking: &Blocking, max_states: usize) -> Result<Clts, String> {
    let text = read(path)?;
    let (env, p) = parse(&text).map_err(|e| format!("{}:{e}", path.display()))?;
    explore(&p, &env, blocking, max_states).map_err(|e| e.to_string())
}

fn load_clts_file(path: &Path) -> Result<(Clts, Goals), String> {
    let text = read(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if value.get("goals").is_some() && value.get("name").is_some() {
        let ex: ExampleJson = serde_json::from_value(value).map_err(|e| format!("{}: {e}", path.display()))?;
        return ex.load().map_err(|e| format!("{}: {e}", path.display()));
    }
    let mut goals = Goals::new();
    if let Some(g) = value.get("goals") {
        let raw: BTreeMap<String, Vec<usize>> =
            serde_json::from_value(g.clone()).map_err(|e| format!("{}: goals: {e}", path.display()))?;
        goals = raw.into_iter().map(|(k, v)| (k, v.into_iter().map(StateId).collect())).collect();
    }
    let json: CltsJson = serde_json::from_value(value).map_err(|e| format!("{}: {e}", path.display()))?;
    let clts = Clts::from_json(json).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok((clts, goals))
}

fn load(args: &SystemArgs) -> Result<Loaded, String> {
    if let Some(name) = &args.example {
        let (clts, goals) = catalog::load_example(name).map_err(|e| e.to_string())?;
        return Ok(Loaded { name: name.clone(), clts, goals });
    }
    if let Some(path) = &args.ccs {
        let blocking = match &args.blocking {
            Some(b) => parse_blocking(b)?,
            None => Blocking::AllVisible,
        };
        let clts = load_ccs(path, &blocking, args.max_states)?;
        return Ok(Loaded { name: file_label(path), clts, goals: Goals::new() });
    }
    if let Some(path) = &args.clts {
        let (clts, goals) = load_clts_file(path)?;
        return Ok(Loaded { name: file_label(path), clts, goals });
    }
    Err("one of --example, --ccs or --clts is required".into())
}

fn file_label(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

fn resolve_goal(sys: &Loaded, args: &GoalArgs) -> Result<(String, BTreeSet<StateId>), String> {
    if let Some(name) = &args.goal {
        return match sys.goals.get(name) {
            Some(g) => Ok((name.clone(), g.clone())),
            None => Err(format!(
                "unknown goal `{name}` for {}; available: {}",
                sys.name,
                if sys.goals.is_empty() { "none".to_owned() } else { sys.goals.keys().cloned().collect::<Vec<_>>().join(", ") }
            )),
        };
    }
    if let Some(list) = &args.goal_states {
        let mut goal = BTreeSet::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let digits = item.strip_prefix('s').unwrap_or(item);
            let s = digits.parse().map(StateId).map_err(|_| format!("bad state id `{item}`"))?;
            if !sys.clts.contains_state(s) {
                return Err(format!("goal state {s} does not exist"));
            }
            goal.insert(s);
        }
        let label = goal.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",");
        return Ok((format!("{{{label}}}"), goal));
    }
    Err("a goal is required: --goal NAME or --goal-states IDS".into())
}

fn cmd_parse(file: &Path, json: bool) -> Result<Outcome, String> {
    let text = read(file)?;
    let (env, p) = parse(&text).map_err(|e| format!("{}:{e}", file.display()))?;
    if json {
        let defs: BTreeMap<&str, String> = env.iter().map(|(k, v)| (k, v.to_string())).collect();
        return Ok(Outcome::ok(pretty(&json!({ "definitions": defs, "main": p.to_string() }))));
    }
    let mut out = String::new();
    for (name, body) in env.iter() {
        let _ = writeln!(out, "{name} = {body}");
    }
    if env.is_empty() {
        let _ = writeln!(out, "{p}");
    } else if !env.contains("main") {
        let _ = writeln!(out, "main = {p}");
    }
    Ok(Outcome::ok(out))
}

fn lts_text(c: &Clts) -> String {
    let mut out = String::new();
    let blocking: Vec<String> = c.blocking().iter().map(|a| a.to_string()).collect();
    let _ = writeln!(
        out,
        "{} states, {} transitions, initial {}, blocking {{{}}}",
        c.num_states(),
        c.num_transitions(),
        c.initial(),
        blocking.join(", ")
    );
    for s in c.states() {
        let _ = writeln!(out, "{s} = {}", c.state_name(s));
    }
    for t in c.transitions() {
        let _ = writeln!(out, "{}: {} -{} {}-> {}", t.id, t.source, t.label, fmt_components(&t.comps), t.target);
    }
    out
}

fn cmd_validate(sys: &Loaded, json: bool) -> Result<Outcome, String> {
    let violations = sys.clts.validate().err().unwrap_or_default();
    let code = if violations.is_empty() { EXIT_OK } else { EXIT_FAILS };
    let out = if json {
        pretty(&json!({ "valid": violations.is_empty(), "violations": violations }))
    } else if violations.is_empty() {
        "OK\n".to_owned()
    } else {
        let mut out = format!("{} violation(s)\n", violations.len());
        for v in &violations {
            let _ = writeln!(out, "  {v}");
        }
        out
    };
    Ok(Outcome::with(code, out))
}

fn cmd_classify(sys: &Loaded, run_arg: &str, json: bool) -> Result<Outcome, String> {
    let c = &sys.clts;
    let run = if Path::new(run_arg).is_file() {
        let text = read(Path::new(run_arg))?;
        let rj: RunJson = serde_json::from_str(&text).map_err(|e| format!("{run_arg}: {e}"))?;
        let run = Run::from_json(&rj).map_err(|e| e.to_string())?;
        run.check(c).map_err(|e| e.to_string())?;
        run
    } else {
        Run::parse_in(run_arg, c).map_err(|e| e.to_string())?
    };
    let report = classify(c, &run).map_err(|e| e.to_string())?;
    if json {
        return Ok(Outcome::ok(pretty(&json!({ "run": run.to_json(c), "report": report }))));
    }
    let yes = |b: bool| if b { "yes" } else { "no" };
    let mut out = format!("run: {}\n", run.display(c));
    for (name, flag) in [
        ("progressing", report.progressing),
        ("just", report.just),
        ("J-fair", report.j_fair),
        ("weakly fair", report.weakly_fair),
        ("strongly fair", report.strongly_fair),
    ] {
        let _ = writeln!(out, "{name:<14}{}", yes(flag));
    }
    for w in &report.witnesses {
        let _ = writeln!(out, "  {w}");
    }
    Ok(Outcome::ok(out))
}

fn cmd_liveness(sys: &Loaded, goal_name: &str, goal: &BTreeSet<StateId>, k: Criterion, json: bool) -> Result<Outcome, String> {
    let v = check_liveness(&sys.clts, goal, k).map_err(|e| e.to_string())?;
    let code = if v.holds { EXIT_OK } else { EXIT_FAILS };
    if json {
        return Ok(Outcome::with(code, pretty(&serde_json::to_value(v.to_json(&sys.clts)).expect("verdict JSON"))));
    }
    let mut out = format!(
        "{}: {} liveness of {} in {}\n",
        if v.holds { "HOLDS" } else { "FAILS" },
        k.title(),
        goal_name,
        sys.name
    );
    if let Some(run) = &v.counterexample {
        let kind = if run.is_infinite() { "lasso" } else { "finite run" };
        let _ = writeln!(out, "counterexample ({kind}): {}", run.display(&sys.clts));
        let c = &sys.clts;
        for &t in run.prefix.iter().chain(&run.cycle) {
            let tr = c.tr(t);
            let _ = writeln!(out, "  {}: {} -{} {}-> {}", t, tr.source, tr.label, fmt_components(&tr.comps), tr.target);
        }
    }
    for n in &v.notes {
        let _ = writeln!(out, "note: {n}");
    }
    Ok(Outcome::with(code, out))
}

fn load_named(source: &str) -> Result<Clts, String> {
    let path = Path::new(source);
    if catalog::NAMES.contains(&source) {
        return catalog::load_example(source).map(|(c, _)| c).map_err(|e| e.to_string());
    }
    if path.extension().is_some_and(|e| e == "ccs") {
        return load_ccs(path, &Blocking::AllVisible, DEFAULT_MAX_STATES);
    }
    if path.is_file() {
        return load_clts_file(path).map(|(c, _)| c);
    }
    Err(catalog::load_example(source).unwrap_err().to_string())
}

fn cmd_bisim(left: &str, right: &str, ls: usize, rs: usize, json: bool) -> Result<Outcome, String> {
    let (c1, c2) = (load_named(left)?, load_named(right)?);
    let r = strong_bisimilar(&c1, StateId(ls), &c2, StateId(rs)).map_err(|e| e.to_string())?;
    let code = if r.bisimilar { EXIT_OK } else { EXIT_FAILS };
    if json {
        let formula = r.distinguishing.as_ref().map(|f| f.to_string());
        let trace = r.distinguishing.as_ref().map(|f| f.trace());
        return Ok(Outcome::with(
            code,
            pretty(&json!({ "bisimilar": r.bisimilar, "distinguishing_formula": formula, "trace": trace })),
        ));
    }
    let mut out = format!(
        "{left} s{ls} and {right} s{rs} are {}\n",
        if r.bisimilar { "strongly bisimilar" } else { "not strongly bisimilar" }
    );
    if let Some(f) = &r.distinguishing {
        let _ = writeln!(out, "distinguishing formula (true on the left): {f}");
        let _ = writeln!(out, "trace: {}", f.trace().join(" "));
    }
    Ok(Outcome::with(code, out))
}

fn cmd_catalog(name: Option<&str>, export: Option<&Path>, json: bool) -> Result<Outcome, String> {
    if let Some(dir) = export {
        std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
        let mut out = String::new();
        for n in catalog::NAMES {
            let e = catalog::example(n).map_err(|e| e.to_string())?;
            let path = dir.join(format!("{n}.json"));
            let text = serde_json::to_string_pretty(&e.to_json()).expect("example JSON") + "\n";
            std::fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            let _ = writeln!(out, "{}", path.display());
        }
        return Ok(Outcome::ok(out));
    }
    if let Some(n) = name {
        let e = catalog::example(n).map_err(|e| e.to_string())?;
        return Ok(Outcome::ok(serde_json::to_string_pretty(&e.to_json()).expect("example JSON") + "\n"));
    }
    if json {
        let list: Vec<serde_json::Value> = catalog::NAMES
            .iter()
            .map(|n| {
                let e = catalog::example(n).expect("listed");
                json!({ "name": n, "description": e.description, "goals": e.goals.keys().collect::<Vec<_>>() })
            })
            .collect();
        return Ok(Outcome::ok(pretty(&json!(list))));
    }
    let mut out = String::new();
    for n in catalog::NAMES {
        let e = catalog::example(n).expect("listed");
        let goals: Vec<&str> = e.goals.keys().map(String::as_str).collect();
        let _ = writeln!(out, "{n:<16} {:<58} goals: {}", e.description, if goals.is_empty() { "-".to_owned() } else { goals.join(", ") });
    }
    Ok(Outcome::ok(out))
}
