//! Line-oriented proof scripts.
//!
//! ```text
//! dynck-script 1
//! theory muddy c 2 m 1
//! lemma GainConn
//! s1 = axiom MC2 nat:1 label "MC2" |- E {1,2,3} E {1,2,3} lambda 1 -> [*] E {1,2,3} ~eps 1
//! s2 = Gen_K agent:1 from s1 |- K 1 (...)
//! qed s2
//! ```
//!
//! A step names its rule, the rule's parameters as typed arguments
//! (`nat:`, `agent:`, `event:`, `group:`, `formula:"..."`), the ids of its
//! premises after `from`, any number of `label "..."`, and its conclusion
//! after `|-`. `Classical` takes no argument: its formula is the conclusion.
//! Premises must be defined earlier in the same lemma. `#` starts a comment
//! line.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::formula::{Agent, Formula, Group};
use crate::kernel::{check_tree, KernelError, Param, ProofTree, RuleKind, Theory};
use crate::muddy::{muddy_theory, Scenario};
use crate::syntax::{parse_event, parse_formula, parse_group, ParseError};

/// First line of every script.
pub const HEADER: &str = "dynck-script 1";

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Formula { line: usize, source: ParseError },
    #[error("line {line}: unknown rule `{rule}`")]
    UnknownRule { line: usize, rule: String },
    #[error("line {line}: step `{id}` is not defined earlier in the lemma")]
    Dangling { line: usize, id: String },
    #[error("line {line}: step `{id}` is defined twice")]
    DuplicateId { line: usize, id: String },
    #[error("cannot write {what}: it contains a double quote")]
    Unprintable { what: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

type Result<T> = std::result::Result<T, ScriptError>;

/// Which theory a script is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TheorySpec {
    Logic,
    Muddy(Scenario),
}

impl TheorySpec {
    pub fn build(&self) -> Theory {
        match self {
            TheorySpec::Logic => Theory::empty(),
            TheorySpec::Muddy(s) => muddy_theory(s),
        }
    }

    fn header(&self) -> String {
        match self {
            TheorySpec::Logic => "theory logic".into(),
            TheorySpec::Muddy(s) => format!("theory muddy c {} m {}", s.c(), s.m()),
        }
    }
}

/// A named proof.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScriptLemma {
    pub name: String,
    pub tree: Arc<ProofTree>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofScript {
    pub theory: TheorySpec,
    pub lemmas: Vec<ScriptLemma>,
}

/// Kernel verdict for one lemma of a script.
#[derive(Debug)]
pub struct LemmaVerdict {
    pub name: String,
    pub result: std::result::Result<Formula, KernelError>,
}

impl ProofScript {
    pub fn new(theory: TheorySpec) -> Self {
        ProofScript { theory, lemmas: Vec::new() }
    }

    pub fn push(&mut self, name: &str, tree: Arc<ProofTree>) {
        self.lemmas.push(ScriptLemma { name: name.to_string(), tree });
    }

    /// Checks every lemma against the script's theory, in order.
    pub fn check(&self) -> Vec<LemmaVerdict> {
        let theory = self.theory.build();
        self.lemmas
            .iter()
            .map(|l| LemmaVerdict {
                name: l.name.clone(),
                result: check_tree(&l.tree, &theory).map(|j| j.formula().clone()),
            })
            .collect()
    }
}

pub fn load_script(path: impl AsRef<Path>) -> Result<ProofScript> {
    parse_script(&std::fs::read_to_string(path)?)
}

pub fn save_script(script: &ProofScript, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, render_script(script)?)?;
    Ok(())
}

/// Writes a single proof as a one-lemma script.
pub fn save_proof(tree: &Arc<ProofTree>, name: &str, theory: TheorySpec, path: impl AsRef<Path>) -> Result<()> {
    let mut script = ProofScript::new(theory);
    script.push(name, tree.clone());
    save_script(&script, path)
}

fn quoted(what: &str, text: &str) -> Result<String> {
    if text.contains('"') {
        return Err(ScriptError::Unprintable { what: format!("{what} {text}") });
    }
    Ok(format!("\"{text}\""))
}

fn param_text(p: &Param) -> Result<String> {
    Ok(match p {
        Param::Nat(n) => format!("nat:{n}"),
        Param::Agent(a) => format!("agent:{a}"),
        Param::Event(e) => format!("event:{e}"),
        Param::Formula(f) => format!("formula:{}", quoted("formula", &f.to_string())?),
    })
}

fn rule_args(rule: &RuleKind) -> Vec<Param> {
    use RuleKind::*;
    let fm = |f: &Formula| Param::Formula(f.clone());
    match rule {
        Classical(_) | Mp => vec![],
        KK(i, a, b) => vec![Param::Agent(*i), fm(a), fm(b)],
        TK(i, a) => vec![Param::Agent(*i), fm(a)],
        GenK(i) => vec![Param::Agent(*i)],
        KBox(e, a, b) => vec![Param::Event(e.clone()), fm(a), fm(b)],
        TBox(e, a) => vec![Param::Event(e.clone()), fm(a)],
        GenBox(e) => vec![Param::Event(e.clone())],
        KT1(i, e, a) => vec![Param::Agent(*i), Param::Event(e.clone()), fm(a)],
        TheoryAxiom(_, ps) => ps.clone(),
        DefEFwd(..) | DefEBwd(..) | FixPointC(..) | GfpC(..) => vec![],
    }
}

fn rule_text(rule: &RuleKind) -> Result<String> {
    use RuleKind::*;
    let mut out = rule.to_string();
    let group_form = |g: &Group, fs: &[&Formula]| -> Result<String> {
        let mut s = format!(" group:{g}");
        for f in fs {
            s.push_str(&format!(" formula:{}", quoted("formula", &f.to_string())?));
        }
        Ok(s)
    };
    match rule {
        DefEFwd(g, a) | DefEBwd(g, a) | FixPointC(g, a) => out.push_str(&group_form(g, &[a])?),
        GfpC(g, a, b) => out.push_str(&group_form(g, &[a, b])?),
        other => {
            for p in rule_args(other) {
                out.push(' ');
                out.push_str(&param_text(&p)?);
            }
        }
    }
    Ok(out)
}

pub fn render_script(script: &ProofScript) -> Result<String> {
    let mut out = format!("{HEADER}\n{}\n", script.theory.header());
    for lemma in &script.lemmas {
        if lemma.name.is_empty() || lemma.name.contains(char::is_whitespace) {
            return Err(ScriptError::Unprintable { what: format!("lemma name `{}`", lemma.name) });
        }
        writeln!(out, "lemma {}", lemma.name).unwrap();
        let nodes = lemma.tree.post_order();
        let mut ids: HashMap<*const ProofTree, usize> = HashMap::new();
        for (k, node) in nodes.iter().enumerate() {
            ids.insert(*node as *const ProofTree, k + 1);
            let mut line = format!("s{} = {}", k + 1, rule_text(&node.rule)?);
            if !node.premises.is_empty() {
                line.push_str(" from");
                for p in &node.premises {
                    write!(line, " s{}", ids[&Arc::as_ptr(p)]).unwrap();
                }
            }
            for l in &node.labels {
                write!(line, " label {}", quoted("label", l)?).unwrap();
            }
            writeln!(out, "{line} |- {}", node.conclusion).unwrap();
        }
        writeln!(out, "qed s{}", nodes.len()).unwrap();
    }
    Ok(out)
}

/// Splits on whitespace, keeping `"..."` together (quotes included).
fn words(line: usize, text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut in_quote = false;
    for ch in text.chars() {
        match ch {
            '"' => {
                in_quote = !in_quote;
                cur.push(ch);
            }
            c if c.is_whitespace() && !in_quote => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if in_quote {
        return Err(ScriptError::Syntax { line, message: "unterminated quote".into() });
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    Ok(out)
}

/// Position of `|-` outside quotes.
fn turnstile(text: &str) -> Option<usize> {
    let mut in_quote = false;
    let bytes = text.as_bytes();
    for k in 0..bytes.len() {
        match bytes[k] {
            b'"' => in_quote = !in_quote,
            b'|' if !in_quote && bytes.get(k + 1) == Some(&b'-') => return Some(k),
            _ => {}
        }
    }
    None
}

fn unquote(line: usize, w: &str) -> Result<String> {
    w.strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .map(str::to_string)
        .ok_or_else(|| ScriptError::Syntax { line, message: format!("expected a quoted string, got `{w}`") })
}

fn syntax<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(ScriptError::Syntax { line, message: message.into() })
}

fn formula_at(line: usize, text: &str) -> Result<Formula> {
    parse_formula(text).map_err(|source| ScriptError::Formula { line, source })
}

enum Arg {
    Param(Param),
    Group(Group),
}

fn parse_arg(line: usize, w: &str) -> Result<Arg> {
    let (kind, val) = match w.split_once(':') {
        Some(kv) => kv,
        None => return syntax(line, format!("expected a typed argument, got `{w}`")),
    };
    let num = |v: &str| v.parse::<u32>().or_else(|_| syntax(line, format!("bad number `{v}`")));
    let at = |source| ScriptError::Formula { line, source };
    Ok(match kind {
        "nat" => Arg::Param(Param::Nat(num(val)?)),
        "agent" => Arg::Param(Param::Agent(Agent(num(val)?))),
        "event" => Arg::Param(Param::Event(parse_event(val).map_err(at)?)),
        "group" => Arg::Group(parse_group(val).map_err(at)?),
        "formula" => Arg::Param(Param::Formula(formula_at(line, &unquote(line, val)?)?)),
        _ => return syntax(line, format!("unknown argument type `{kind}`")),
    })
}

fn build_rule(line: usize, name: &str, axiom: Option<String>, args: Vec<Arg>, concl: &Formula) -> Result<RuleKind> {
    use RuleKind::*;
    if let Some(schema) = axiom {
        let params = args
            .into_iter()
            .map(|a| match a {
                Arg::Param(p) => Ok(p),
                Arg::Group(_) => syntax(line, "axiom parameters cannot be groups"),
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(TheoryAxiom(schema, params));
    }
    let bad = || syntax(line, format!("wrong arguments for {name}"));
    let rule = match (name, args.as_slice()) {
        ("Classical", []) => Classical(concl.clone()),
        ("MP", []) => Mp,
        ("K_K", [Arg::Param(Param::Agent(i)), Arg::Param(Param::Formula(a)), Arg::Param(Param::Formula(b))]) => {
            KK(*i, a.clone(), b.clone())
        }
        ("T_K", [Arg::Param(Param::Agent(i)), Arg::Param(Param::Formula(a))]) => TK(*i, a.clone()),
        ("Gen_K", [Arg::Param(Param::Agent(i))]) => GenK(*i),
        ("Def_E_fwd", [Arg::Group(g), Arg::Param(Param::Formula(a))]) => DefEFwd(g.clone(), a.clone()),
        ("Def_E_bwd", [Arg::Group(g), Arg::Param(Param::Formula(a))]) => DefEBwd(g.clone(), a.clone()),
        ("FixPoint_C", [Arg::Group(g), Arg::Param(Param::Formula(a))]) => FixPointC(g.clone(), a.clone()),
        ("GFP_C", [Arg::Group(g), Arg::Param(Param::Formula(a)), Arg::Param(Param::Formula(b))]) => {
            GfpC(g.clone(), a.clone(), b.clone())
        }
        ("K_Box", [Arg::Param(Param::Event(e)), Arg::Param(Param::Formula(a)), Arg::Param(Param::Formula(b))]) => {
            KBox(e.clone(), a.clone(), b.clone())
        }
        ("T_Box", [Arg::Param(Param::Event(e)), Arg::Param(Param::Formula(a))]) => TBox(e.clone(), a.clone()),
        ("Gen_Box", [Arg::Param(Param::Event(e))]) => GenBox(e.clone()),
        ("KT1", [Arg::Param(Param::Agent(i)), Arg::Param(Param::Event(e)), Arg::Param(Param::Formula(a))]) => {
            KT1(*i, e.clone(), a.clone())
        }
        (
            "Classical" | "MP" | "K_K" | "T_K" | "Gen_K" | "Def_E_fwd" | "Def_E_bwd" | "FixPoint_C" | "GFP_C"
            | "K_Box" | "T_Box" | "Gen_Box" | "KT1",
            _,
        ) => return bad(),
        _ => return Err(ScriptError::UnknownRule { line, rule: name.to_string() }),
    };
    Ok(rule)
}

struct OpenLemma {
    name: String,
    steps: HashMap<String, Arc<ProofTree>>,
}

fn parse_step(line: usize, text: &str, lemma: &mut OpenLemma) -> Result<()> {
    let cut = turnstile(text).map_or_else(|| syntax(line, "missing `|-`"), Ok)?;
    let concl = formula_at(line, &text[cut + 2..])?;
    let ws = words(line, &text[..cut])?;
    if ws.len() < 3 || ws[1] != "=" {
        return syntax(line, "expected `<id> = <rule> ...`");
    }
    let id = ws[0].clone();
    if lemma.steps.contains_key(&id) {
        return Err(ScriptError::DuplicateId { line, id });
    }
    let mut rest = ws[2..].iter().map(String::as_str).peekable();
    let name = rest.next().unwrap_or_default().to_string();
    let axiom = if name == "axiom" {
        Some(rest.next().map_or_else(|| syntax(line, "axiom needs a schema name"), |s| Ok(s.to_string()))?)
    } else {
        None
    };
    let mut args = Vec::new();
    let mut premises = Vec::new();
    let mut labels: Vec<Arc<str>> = Vec::new();
    while let Some(w) = rest.next() {
        match w {
            "from" => {
                while let Some(p) = rest.next_if(|w| *w != "label") {
                    let node = lemma
                        .steps
                        .get(p)
                        .ok_or_else(|| ScriptError::Dangling { line, id: p.to_string() })?;
                    premises.push(node.clone());
                }
            }
            "label" => {
                let l = rest.next().map_or_else(|| syntax(line, "label needs a string"), Ok)?;
                labels.push(unquote(line, l)?.into());
            }
            w if premises.is_empty() && labels.is_empty() => args.push(parse_arg(line, w)?),
            w => return syntax(line, format!("unexpected `{w}`")),
        }
    }
    let rule = build_rule(line, &name, axiom, args, &concl)?;
    let mut node = ProofTree::new(rule, premises, concl);
    node.labels = labels;
    lemma.steps.insert(id, Arc::new(node));
    Ok(())
}

pub fn parse_script(src: &str) -> Result<ProofScript> {
    let mut lines = src
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut script = ProofScript::new(TheorySpec::Logic);
    match lines.next() {
        None => return Ok(script),
        Some((_, HEADER)) => {}
        Some((line, _)) => return syntax(line, format!("expected `{HEADER}`")),
    }
    let mut theory_seen = false;
    let mut open: Option<OpenLemma> = None;
    for (line, text) in lines {
        let ws: Vec<&str> = text.split_whitespace().collect();
        match (ws[0], open.as_mut()) {
            ("theory", None) if !theory_seen && script.lemmas.is_empty() => {
                script.theory = match ws[1..] {
                    ["logic"] => TheorySpec::Logic,
                    ["muddy", "c", c, "m", m] => {
                        let (c, m) = match (c.parse(), m.parse()) {
                            (Ok(c), Ok(m)) => (c, m),
                            _ => return syntax(line, "bad scenario numbers"),
                        };
                        let s = Scenario::new(c, m).or_else(|e| syntax(line, e.to_string()))?;
                        TheorySpec::Muddy(s)
                    }
                    _ => return syntax(line, "expected `theory logic` or `theory muddy c <c> m <m>`"),
                };
                theory_seen = true;
            }
            ("lemma", None) if ws.len() == 2 => {
                open = Some(OpenLemma { name: ws[1].to_string(), steps: HashMap::new() });
            }
            ("qed", Some(lemma)) if ws.len() == 2 => {
                let root = lemma
                    .steps
                    .get(ws[1])
                    .cloned()
                    .ok_or_else(|| ScriptError::Dangling { line, id: ws[1].to_string() })?;
                let name = std::mem::take(&mut lemma.name);
                script.lemmas.push(ScriptLemma { name, tree: root });
                open = None;
            }
            (_, Some(lemma)) => parse_step(line, text, lemma)?,
            _ => return syntax(line, format!("unexpected `{text}`")),
        }
    }
    if open.is_some() {
        return syntax(src.lines().count(), "lemma without `qed`");
    }
    Ok(script)
}
