//! The trusted core.
//!
//! A [`Judgment`] can only be produced by the functions in this module; each
//! one implements a single rule or axiom schema of the logic and records the
//! rule application in the judgment's proof tree. Theory-specific axioms are
//! admitted through a [`Theory`], never hard-coded here.
//!
//! Everything outside this file is untrusted: a bug elsewhere can make a
//! proof fail to build, but cannot make a false formula provable.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::formula::{
    boolean_skeleton, def_e_expansion, Agent, EventKind, EventSym, Formula, Group, Skeleton,
};

/// Default number of distinct placeholders `classical` will enumerate.
pub const DEFAULT_CLASSICAL_BUDGET: usize = 24;

/// A parameter of a theory axiom schema.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Param {
    Nat(u32),
    Agent(Agent),
    Event(EventSym),
    Formula(Formula),
}

/// One rule or axiom schema, with the parameters that fix its instance.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RuleKind {
    /// A propositional tautology over modal placeholders.
    Classical(Formula),
    /// Premises `[phi -> psi, phi]`.
    Mp,
    /// `K_i phi -> K_i (phi -> psi) -> K_i psi`
    KK(Agent, Formula, Formula),
    /// `K_i phi -> phi`
    TK(Agent, Formula),
    GenK(Agent),
    /// `E_G phi -> /\_i K_i phi`
    DefEFwd(Group, Formula),
    /// `/\_i K_i phi -> E_G phi`
    DefEBwd(Group, Formula),
    /// `C_G phi -> phi & E_G C_G phi`
    FixPointC(Group, Formula),
    /// From `rho -> phi & E_G rho` infer `rho -> C_G phi`; parameters `(G, phi, rho)`.
    GfpC(Group, Formula, Formula),
    /// `[a] phi -> [a] (phi -> psi) -> [a] psi`
    KBox(EventSym, Formula, Formula),
    /// `[a] phi -> phi`
    TBox(EventSym, Formula),
    GenBox(EventSym),
    /// `K_i [a] phi -> [a] K_i phi`, for epistemic `a` only.
    KT1(Agent, EventSym, Formula),
    TheoryAxiom(String, Vec<Param>),
}

impl RuleKind {
    pub fn arity(&self) -> usize {
        match self {
            RuleKind::Mp => 2,
            RuleKind::GenK(_) | RuleKind::GenBox(_) | RuleKind::GfpC(..) => 1,
            _ => 0,
        }
    }

    /// Stable rule name, as used in proof scripts.
    pub fn name(&self) -> &str {
        match self {
            RuleKind::Classical(_) => "Classical",
            RuleKind::Mp => "MP",
            RuleKind::KK(..) => "K_K",
            RuleKind::TK(..) => "T_K",
            RuleKind::GenK(_) => "Gen_K",
            RuleKind::DefEFwd(..) => "Def_E_fwd",
            RuleKind::DefEBwd(..) => "Def_E_bwd",
            RuleKind::FixPointC(..) => "FixPoint_C",
            RuleKind::GfpC(..) => "GFP_C",
            RuleKind::KBox(..) => "K_Box",
            RuleKind::TBox(..) => "T_Box",
            RuleKind::GenBox(_) => "Gen_Box",
            RuleKind::KT1(..) => "KT1",
            RuleKind::TheoryAxiom(name, _) => name,
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleKind::TheoryAxiom(name, _) => write!(f, "axiom {name}"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("KT1 needs an epistemic event, `{event}` is {kind:?}")]
    EventKind { event: String, kind: EventKind },
    #[error("theory `{theory}` rejects {schema}: {reason}")]
    Admission { theory: String, schema: String, reason: String },
    #[error("theory `{theory}` has no axiom schema `{schema}`")]
    UnknownSchema { theory: String, schema: String },
    #[error("not a tautology: {0}")]
    NotTautology(Formula),
    #[error("{placeholders} placeholders exceed the classical budget of {budget}")]
    Budget { placeholders: usize, budget: usize },
    #[error("{rule}: {reason}")]
    RuleMismatch { rule: String, reason: String },
    #[error("{rule} takes {expected} premises, got {got}")]
    Arity { rule: String, expected: usize, got: usize },
    #[error("at node {path:?} ({rule}): stored conclusion {stored} but the rule yields {expected}")]
    ConclusionMismatch { path: Vec<usize>, rule: String, expected: Formula, stored: Formula },
    #[error("at node {path:?} ({rule}): {source}")]
    AtNode { path: Vec<usize>, rule: String, source: Box<KernelError> },
}

impl KernelError {
    /// Path from the root to the failing node, for errors raised by [`check_tree`].
    pub fn path(&self) -> Option<&[usize]> {
        match self {
            KernelError::ConclusionMismatch { path, .. } | KernelError::AtNode { path, .. } => {
                Some(path)
            }
            _ => None,
        }
    }
}

fn mismatch(rule: &str, reason: impl Into<String>) -> KernelError {
    KernelError::RuleMismatch { rule: rule.to_string(), reason: reason.into() }
}

/// A rule application tree. Trees are plain data; only [`check_tree`] turns
/// one into a [`Judgment`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofTree {
    pub rule: RuleKind,
    pub premises: Vec<Arc<ProofTree>>,
    pub conclusion: Formula,
    /// Free-form step names, innermost first. Ignored by the checker.
    pub labels: Vec<Arc<str>>,
}

impl ProofTree {
    pub fn new(rule: RuleKind, premises: Vec<Arc<ProofTree>>, conclusion: Formula) -> Self {
        ProofTree { rule, premises, conclusion, labels: Vec::new() }
    }

    /// Number of distinct nodes (shared subtrees counted once).
    pub fn size(&self) -> usize {
        self.post_order().len()
    }

    /// Distinct nodes in post-order (premises left to right, then the node).
    pub fn post_order(&self) -> Vec<&ProofTree> {
        fn go<'a>(
            t: &'a ProofTree,
            seen: &mut std::collections::HashSet<*const ProofTree>,
            out: &mut Vec<&'a ProofTree>,
        ) {
            if !seen.insert(t as *const _) {
                return;
            }
            for p in &t.premises {
                go(p, seen, out);
            }
            out.push(t);
        }
        let mut out = Vec::new();
        go(self, &mut Default::default(), &mut out);
        out
    }

    /// Step names in post-order.
    pub fn trace(&self) -> Vec<&str> {
        self.post_order()
            .into_iter()
            .flat_map(|t| t.labels.iter().map(|l| &**l))
            .collect()
    }
}

/// A formula certified by the kernel, together with its proof.
///
/// The field is private, so code outside this module cannot forge one:
///
/// ```compile_fail
/// use std::sync::Arc;
/// use dynck_core::{Formula, Judgment, ProofTree, RuleKind};
/// let tree = ProofTree::new(RuleKind::Mp, vec![], Formula::False);
/// let forged = Judgment(Arc::new(tree));
/// ```
///
/// Checking a tree is the way in:
///
/// ```
/// use std::sync::Arc;
/// use dynck_core::{check_tree, Formula, ProofTree, RuleKind, Theory};
/// let tree = ProofTree::new(RuleKind::Classical(Formula::True), vec![], Formula::True);
/// assert!(check_tree(&tree, &Theory::empty()).is_ok());
/// let bad = ProofTree::new(RuleKind::Classical(Formula::False), vec![], Formula::False);
/// assert!(check_tree(&bad, &Theory::empty()).is_err());
/// ```
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Judgment(Arc<ProofTree>);

impl Judgment {
    pub fn formula(&self) -> &Formula {
        &self.0.conclusion
    }

    pub fn proof(&self) -> &Arc<ProofTree> {
        &self.0
    }

    /// Same judgment, with one more name on its root step. Labels carry no
    /// logical content.
    pub fn labeled(&self, label: &str) -> Judgment {
        let mut node = (*self.0).clone();
        node.labels.push(label.into());
        Judgment(Arc::new(node))
    }
}

fn mint(rule: RuleKind, premises: &[&Judgment], conclusion: Formula) -> Judgment {
    Judgment(Arc::new(ProofTree::new(
        rule,
        premises.iter().map(|j| j.0.clone()).collect(),
        conclusion,
    )))
}

/// Instantiates a schema from its parameters, or explains why the instance is refused.
pub type SchemaFn = dyn Fn(&[Param]) -> Result<Formula, String> + Send + Sync;

/// An admitted schema instance.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct AxiomInstance {
    pub schema: String,
    pub params: Vec<Param>,
    pub formula: Formula,
}

/// A named family of axiom schemas over declared events.
pub struct Theory {
    name: String,
    events: Vec<EventSym>,
    schemas: BTreeMap<String, Arc<SchemaFn>>,
    admitted: Mutex<BTreeSet<AxiomInstance>>,
}

impl Theory {
    pub fn new(name: &str) -> Self {
        Theory {
            name: name.to_string(),
            events: Vec::new(),
            schemas: BTreeMap::new(),
            admitted: Mutex::new(BTreeSet::new()),
        }
    }

    /// The bare logic, with no schemas.
    pub fn empty() -> Self {
        Self::new("logic")
    }

    pub fn with_event(mut self, ev: EventSym) -> Self {
        self.events.push(ev);
        self
    }

    pub fn with_schema<F>(mut self, name: &str, f: F) -> Self
    where
        F: Fn(&[Param]) -> Result<Formula, String> + Send + Sync + 'static,
    {
        self.schemas.insert(name.to_string(), Arc::new(f));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn events(&self) -> &[EventSym] {
        &self.events
    }

    pub fn event(&self, name: &str) -> Option<&EventSym> {
        self.events.iter().find(|e| e.name() == name)
    }

    pub fn schema_names(&self) -> impl Iterator<Item = &str> {
        self.schemas.keys().map(String::as_str)
    }

    /// Every instance admitted so far, sorted.
    pub fn admitted(&self) -> Vec<AxiomInstance> {
        self.admitted.lock().unwrap().iter().cloned().collect()
    }

    fn instantiate(&self, schema: &str, params: &[Param]) -> Result<Formula, KernelError> {
        let f = self.schemas.get(schema).ok_or_else(|| KernelError::UnknownSchema {
            theory: self.name.clone(),
            schema: schema.to_string(),
        })?;
        let formula = f(params).map_err(|reason| KernelError::Admission {
            theory: self.name.clone(),
            schema: schema.to_string(),
            reason,
        })?;
        self.admitted.lock().unwrap().insert(AxiomInstance {
            schema: schema.to_string(),
            params: params.to_vec(),
            formula: formula.clone(),
        });
        Ok(formula)
    }
}

impl fmt::Debug for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Theory")
            .field("name", &self.name)
            .field("events", &self.events)
            .field("schemas", &self.schemas.keys().collect::<Vec<_>>())
            .finish()
    }
}

/// Whether a skeleton over `vars` placeholders holds under every valuation.
fn is_tautology(sk: &Skeleton, vars: usize) -> bool {
    const PATTERNS: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    let low = vars.min(6);
    let mask = if low == 6 { !0 } else { (1u64 << (1 << low)) - 1 };
    let mut words = vec![0u64; vars];
    words[..low].copy_from_slice(&PATTERNS[..low]);
    let blocks = 1u64 << vars.saturating_sub(6);
    (0..blocks).all(|b| {
        for (k, w) in words.iter_mut().enumerate().skip(6) {
            *w = if b >> (k - 6) & 1 == 1 { !0 } else { 0 };
        }
        sk.eval_words(&words) & mask == mask
    })
}

/// Classical rule: `|- phi` when the boolean skeleton of `phi` is a tautology.
pub fn classical(phi: &Formula) -> Result<Judgment, KernelError> {
    classical_with_budget(phi, DEFAULT_CLASSICAL_BUDGET)
}

pub fn classical_with_budget(phi: &Formula, budget: usize) -> Result<Judgment, KernelError> {
    let (sk, binding) = boolean_skeleton(phi);
    if binding.len() > budget {
        return Err(KernelError::Budget { placeholders: binding.len(), budget });
    }
    if !is_tautology(&sk, binding.len()) {
        return Err(KernelError::NotTautology(phi.clone()));
    }
    Ok(mint(RuleKind::Classical(phi.clone()), &[], phi.clone()))
}

/// Zero-premise rules and theory axioms.
pub fn axiom(kind: &RuleKind, theory: &Theory) -> Result<Judgment, KernelError> {
    axiom_with_budget(kind, theory, DEFAULT_CLASSICAL_BUDGET)
}

fn axiom_with_budget(kind: &RuleKind, theory: &Theory, budget: usize) -> Result<Judgment, KernelError> {
    let concl = match kind {
        RuleKind::Classical(phi) => return classical_with_budget(phi, budget),
        RuleKind::KK(i, phi, psi) => Formula::imp_chain(
            [Formula::k(*i, phi.clone()), Formula::k(*i, Formula::imp(phi.clone(), psi.clone()))],
            Formula::k(*i, psi.clone()),
        ),
        RuleKind::TK(i, phi) => Formula::imp(Formula::k(*i, phi.clone()), phi.clone()),
        RuleKind::DefEFwd(g, phi) => {
            Formula::imp(Formula::e(g.clone(), phi.clone()), def_e_expansion(g, phi))
        }
        RuleKind::DefEBwd(g, phi) => {
            Formula::imp(def_e_expansion(g, phi), Formula::e(g.clone(), phi.clone()))
        }
        RuleKind::FixPointC(g, phi) => {
            let c = Formula::c(g.clone(), phi.clone());
            Formula::imp(c.clone(), Formula::and(phi.clone(), Formula::e(g.clone(), c)))
        }
        RuleKind::KBox(a, phi, psi) => Formula::imp_chain(
            [
                Formula::boxed(a.clone(), phi.clone()),
                Formula::boxed(a.clone(), Formula::imp(phi.clone(), psi.clone())),
            ],
            Formula::boxed(a.clone(), psi.clone()),
        ),
        RuleKind::TBox(a, phi) => Formula::imp(Formula::boxed(a.clone(), phi.clone()), phi.clone()),
        RuleKind::KT1(i, a, phi) => {
            if a.kind() != EventKind::Epistemic {
                return Err(KernelError::EventKind { event: a.name().to_string(), kind: a.kind() });
            }
            Formula::imp(
                Formula::k(*i, Formula::boxed(a.clone(), phi.clone())),
                Formula::boxed(a.clone(), Formula::k(*i, phi.clone())),
            )
        }
        RuleKind::TheoryAxiom(name, params) => theory.instantiate(name, params)?,
        other => {
            return Err(KernelError::Arity {
                rule: other.to_string(),
                expected: other.arity(),
                got: 0,
            })
        }
    };
    Ok(mint(kind.clone(), &[], concl))
}

/// Modus ponens: from `|- phi -> psi` and `|- phi` infer `|- psi`.
pub fn mp(major: &Judgment, minor: &Judgment) -> Result<Judgment, KernelError> {
    let (ante, cons) = major
        .formula()
        .as_imp()
        .ok_or_else(|| mismatch("MP", "major premise is not an implication"))?;
    if ante != minor.formula() {
        return Err(mismatch("MP", "minor premise differs from the antecedent"));
    }
    Ok(mint(RuleKind::Mp, &[major, minor], cons.clone()))
}

/// Generalization, `Gen_K(i)` or `Gen_Box(a)`.
pub fn gen(kind: &RuleKind, premise: &Judgment) -> Result<Judgment, KernelError> {
    let concl = match kind {
        RuleKind::GenK(i) => Formula::k(*i, premise.formula().clone()),
        RuleKind::GenBox(a) => Formula::boxed(a.clone(), premise.formula().clone()),
        other => return Err(mismatch(other.name(), "not a generalization rule")),
    };
    Ok(mint(kind.clone(), &[premise], concl))
}

pub fn gen_k(i: Agent, premise: &Judgment) -> Result<Judgment, KernelError> {
    gen(&RuleKind::GenK(i), premise)
}

pub fn gen_box(a: &EventSym, premise: &Judgment) -> Result<Judgment, KernelError> {
    gen(&RuleKind::GenBox(a.clone()), premise)
}

/// Greatest fixpoint: from `|- rho -> phi & E_G rho` infer `|- rho -> C_G phi`.
pub fn gfp_c(g: &Group, phi: &Formula, rho: &Formula, premise: &Judgment) -> Result<Judgment, KernelError> {
    let expected = Formula::imp(
        rho.clone(),
        Formula::and(phi.clone(), Formula::e(g.clone(), rho.clone())),
    );
    if premise.formula() != &expected {
        return Err(mismatch("GFP_C", "premise is not rho -> phi & E_G rho"));
    }
    Ok(mint(
        RuleKind::GfpC(g.clone(), phi.clone(), rho.clone()),
        &[premise],
        Formula::imp(rho.clone(), Formula::c(g.clone(), phi.clone())),
    ))
}

/// Applies any rule to already certified premises.
pub fn apply(rule: &RuleKind, premises: &[Judgment], theory: &Theory) -> Result<Judgment, KernelError> {
    apply_with_budget(rule, premises, theory, DEFAULT_CLASSICAL_BUDGET)
}

fn apply_with_budget(
    rule: &RuleKind,
    premises: &[Judgment],
    theory: &Theory,
    budget: usize,
) -> Result<Judgment, KernelError> {
    if premises.len() != rule.arity() {
        return Err(KernelError::Arity {
            rule: rule.to_string(),
            expected: rule.arity(),
            got: premises.len(),
        });
    }
    match rule {
        RuleKind::Mp => mp(&premises[0], &premises[1]),
        RuleKind::GenK(_) | RuleKind::GenBox(_) => gen(rule, &premises[0]),
        RuleKind::GfpC(g, phi, rho) => gfp_c(g, phi, rho, &premises[0]),
        _ => axiom_with_budget(rule, theory, budget),
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    pub classical_budget: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { classical_budget: DEFAULT_CLASSICAL_BUDGET }
    }
}

/// Re-derives every node of `tree` bottom-up and returns the root judgment.
///
/// Premises are checked before their parent, left to right, so the reported
/// failure is the leftmost-innermost one. Shared subtrees are checked once.
pub fn check_tree(tree: &ProofTree, theory: &Theory) -> Result<Judgment, KernelError> {
    check_tree_with(tree, theory, &CheckOptions::default())
}

pub fn check_tree_with(
    tree: &ProofTree,
    theory: &Theory,
    opts: &CheckOptions,
) -> Result<Judgment, KernelError> {
    let mut memo: HashMap<*const ProofTree, Judgment> = HashMap::new();
    let mut path = Vec::new();
    check_node(tree, theory, opts, &mut memo, &mut path)
}

fn check_node(
    t: &ProofTree,
    theory: &Theory,
    opts: &CheckOptions,
    memo: &mut HashMap<*const ProofTree, Judgment>,
    path: &mut Vec<usize>,
) -> Result<Judgment, KernelError> {
    if let Some(j) = memo.get(&(t as *const _)) {
        return Ok(j.clone());
    }
    let mut prems = Vec::with_capacity(t.premises.len());
    for (k, p) in t.premises.iter().enumerate() {
        path.push(k);
        prems.push(check_node(p, theory, opts, memo, path)?);
        path.pop();
    }
    let j = apply_with_budget(&t.rule, &prems, theory, opts.classical_budget).map_err(|e| {
        KernelError::AtNode { path: path.clone(), rule: t.rule.to_string(), source: Box::new(e) }
    })?;
    if j.formula() != &t.conclusion {
        return Err(KernelError::ConclusionMismatch {
            path: path.clone(),
            rule: t.rule.to_string(),
            expected: j.formula().clone(),
            stored: t.conclusion.clone(),
        });
    }
    let j = if t.labels.is_empty() {
        j
    } else {
        let mut node = (*j.0).clone();
        node.labels = t.labels.clone();
        Judgment(Arc::new(node))
    };
    memo.insert(t as *const _, j.clone());
    Ok(j)
}
