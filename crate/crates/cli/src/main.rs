use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use dynck_core::kernel::check_tree;
use dynck_core::script::{load_script, save_script, ProofScript, TheorySpec};
use dynck_core::semantics::{validate_judgment_trace, validate_theory, EventSemantics, Report};
use dynck_core::{parse_formula, Agent, EventSym, KripkeModel, MuddyProver, Scenario};

/// Proof checker for the dynamic logic of common knowledge.
#[derive(Parser)]
#[command(name = "dynck", version)]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct ScenarioArgs {
    /// Number of children.
    #[arg(long)]
    children: u32,
    /// Children 1 to this plus one are muddy.
    #[arg(long)]
    muddy: u32,
}

impl ScenarioArgs {
    fn scenario(&self) -> Result<Scenario, String> {
        if self.children == 0 {
            return Err("--children must be at least 1".into());
        }
        Scenario::new(self.children - 1, self.muddy).map_err(|e| e.to_string())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check every lemma of a proof script.
    Check {
        script: PathBuf,
        /// Check against this theory instead of the one in the script header.
        #[arg(long, value_parser = ["logic", "muddy"])]
        theory: Option<String>,
        #[arg(long, requires = "muddy")]
        children: Option<u32>,
        #[arg(long, requires = "children")]
        muddy: Option<u32>,
    },
    /// Build and check the proof that muddy children eventually know.
    ProveMuddy {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Only this child (default: every child).
        #[arg(long)]
        agent: Option<u32>,
        /// Write the proofs to this script file.
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Print the named steps of each proof.
        #[arg(long)]
        trace: bool,
    },
    /// Evaluate a formula in the muddy-children model.
    ModelCheck {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Events to apply first, e.g. ".,*,*".
        #[arg(long, default_value = "")]
        after: String,
        #[arg(long)]
        formula: String,
        /// Report every world, not just the actual one.
        #[arg(long)]
        all_worlds: bool,
    },
    /// Audit the theory and the generated proofs against the model.
    Validate {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
}

/// Logical failure (1) or bad input (2).
enum Failure {
    Logic,
    Usage(String),
}

type Outcome = Result<(), Failure>;

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn emit_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
}

#[derive(Serialize)]
struct LemmaOut {
    lemma: String,
    verdict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    formula: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    step: Option<Vec<usize>>,
}

fn check(json: bool, path: PathBuf, theory: Option<String>, scenario: Option<ScenarioArgs>) -> Outcome {
    let mut script = load_script(&path).map_err(usage)?;
    match (theory.as_deref(), scenario) {
        (Some("logic"), _) => script.theory = TheorySpec::Logic,
        (Some("muddy") | None, Some(s)) => script.theory = TheorySpec::Muddy(s.scenario().map_err(usage)?),
        (Some(_), _) => return Err(usage("--theory muddy needs --children and --muddy")),
        (None, None) => {}
    }
    let verdicts = script.check();
    let out: Vec<LemmaOut> = verdicts
        .into_iter()
        .map(|v| match v.result {
            Ok(f) => LemmaOut { lemma: v.name, verdict: true, formula: Some(f.to_string()), error: None, step: None },
            Err(e) => LemmaOut {
                lemma: v.name,
                verdict: false,
                formula: None,
                step: e.path().map(<[usize]>::to_vec),
                error: Some(e.to_string()),
            },
        })
        .collect();
    let ok = out.iter().all(|l| l.verdict);
    if json {
        emit_json(&out);
    } else {
        for l in &out {
            match &l.error {
                None => println!("ok   {} |- {}", l.lemma, l.formula.as_deref().unwrap_or("")),
                Some(e) => println!("FAIL {}: {e}", l.lemma),
            }
        }
        println!("{} of {} lemmas checked", out.iter().filter(|l| l.verdict).count(), out.len());
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Logic)
    }
}

#[derive(Serialize)]
struct ProofOut {
    agent: u32,
    formula: String,
    verdict: bool,
    size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<String>>,
}

fn prove_muddy(json: bool, args: ScenarioArgs, agent: Option<u32>, emit: Option<PathBuf>, trace: bool) -> Outcome {
    let s = args.scenario().map_err(usage)?;
    let prover = MuddyProver::new(s);
    let agents: Vec<Agent> = match agent {
        Some(i) if i == 0 || i > s.children() => return Err(usage(format!("--agent must be in 1..={}", s.children()))),
        Some(i) => vec![Agent(i)],
        None => s.agents().collect(),
    };
    let mut out = Vec::new();
    let mut script = ProofScript::new(TheorySpec::Muddy(s));
    for i in agents {
        let j = prover.prove_concl(i).map_err(usage)?;
        let verdict = check_tree(j.proof(), prover.theory()).is_ok_and(|k| k.formula() == j.formula());
        let steps = trace.then(|| {
            let mut t: Vec<String> = j.proof().trace().into_iter().map(str::to_string).collect();
            t.dedup();
            t
        });
        out.push(ProofOut { agent: i.0, formula: j.formula().to_string(), verdict, size: j.proof().size(), trace: steps });
        script.push(&format!("Concl_{}", i.0), j.proof().clone());
    }
    if let Some(path) = emit {
        save_script(&script, &path).map_err(usage)?;
    }
    if json {
        emit_json(&serde_json::json!({ "scenario": s, "proofs": out }));
    } else {
        for p in &out {
            let tag = if p.verdict { "ok  " } else { "FAIL" };
            println!("{tag} child {}: |- {}  ({} steps)", p.agent, p.formula, p.size);
            if let Some(t) = &p.trace {
                for step in t {
                    println!("       {step}");
                }
            }
        }
    }
    if out.iter().all(|p| p.verdict) {
        Ok(())
    } else {
        Err(Failure::Logic)
    }
}

fn parse_events(text: &str) -> Result<Vec<EventSym>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| match t {
            "." | "¤" | "point" => Ok(EventSym::point()),
            "*" | "star" => Ok(EventSym::star()),
            other => Err(usage(format!("unknown event `{other}`; use `.` or `*`"))),
        })
        .collect()
}

#[derive(Serialize)]
struct WorldOut {
    world: String,
    value: bool,
}

fn model_check(json: bool, args: ScenarioArgs, after: &str, formula: &str, all: bool) -> Outcome {
    let s = args.scenario().map_err(usage)?;
    let f = parse_formula(formula).map_err(usage)?;
    let sem = EventSemantics::muddy(&s.group());
    let mut model = KripkeModel::full(&s).map_err(usage)?;
    for ev in parse_events(after)? {
        model = model.update(&ev, &sem).map_err(usage)?;
    }
    let ext = model.extension(&f, &sem).map_err(usage)?;
    let worlds: Vec<WorldOut> = model
        .worlds()
        .map(|w| WorldOut { world: w.to_string(), value: ext[w.bits() as usize] })
        .collect();
    let actual = model.actual().map(|w| ext[w.bits() as usize]);
    let verdict = if all { worlds.iter().all(|w| w.value) } else { actual == Some(true) };
    if json {
        emit_json(&serde_json::json!({
            "scenario": s,
            "history": model.history(),
            "formula": f.to_string(),
            "actual": model.actual().map(|w| w.to_string()),
            "value": actual,
            "verdict": verdict,
            "worlds": if all { Some(&worlds) } else { None },
        }));
    } else {
        match (model.actual(), actual) {
            (Some(w), Some(v)) => println!("actual world {w}: {v}"),
            _ => println!("the actual world did not survive the events"),
        }
        if all {
            for w in &worlds {
                println!("  {}: {}", w.world, w.value);
            }
        }
    }
    if verdict {
        Ok(())
    } else {
        Err(Failure::Logic)
    }
}

fn print_report(title: &str, r: &Report) {
    let tag = if r.passed { "ok  " } else { "FAIL" };
    println!("{tag} {title}: {} checks, {} failures", r.checked, r.failures.len());
    for e in &r.failures {
        println!(
            "       {} step {} ({}) at {}: {} fails at {}",
            e.lemma,
            e.step,
            e.rule,
            e.stage,
            e.formula,
            e.countermodel.as_deref().unwrap_or("?")
        );
    }
    for x in &r.excluded {
        println!("       excluded: {x}");
    }
}

fn validate(json: bool, args: ScenarioArgs) -> Outcome {
    let s = args.scenario().map_err(usage)?;
    let theory = validate_theory(&s).map_err(usage)?.summary();
    let prover = MuddyProver::new(s);
    let mut traces = Vec::new();
    for i in s.agents() {
        let j = prover.prove_concl(i).map_err(usage)?;
        traces.push((i.0, validate_judgment_trace(&s, j.proof()).map_err(usage)?.summary()));
    }
    let ok = theory.passed && traces.iter().all(|(_, r)| r.passed);
    if json {
        let traces: Vec<_> = traces.iter().map(|(i, r)| serde_json::json!({ "agent": i, "report": r })).collect();
        emit_json(&serde_json::json!({ "scenario": s, "passed": ok, "theory": theory, "traces": traces }));
    } else {
        print_report("axioms", &theory);
        for (i, r) in &traces {
            print_report(&format!("proof for child {i}"), r);
        }
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Logic)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    let outcome = match cli.command {
        Command::Check { script, theory, children, muddy } => {
            let scenario = children.zip(muddy).map(|(children, muddy)| ScenarioArgs { children, muddy });
            check(json, script, theory, scenario)
        }
        Command::ProveMuddy { scenario, agent, emit, trace } => prove_muddy(json, scenario, agent, emit, trace),
        Command::ModelCheck { scenario, after, formula, all_worlds } => {
            model_check(json, scenario, &after, &formula, all_worlds)
        }
        Command::Validate { scenario } => validate(json, scenario),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Logic) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            if json {
                emit_json(&serde_json::json!({ "error": msg }));
            } else {
                eprintln!("error: {msg}");
            }
            ExitCode::from(2)
        }
    }
}
