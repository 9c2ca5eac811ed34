//! Object language: agents, groups, events and formulas.
//!
//! Formulas are immutable trees with shared subterms. Structural equality is
//! the only notion of formula equality used anywhere in the crate, so the
//! notations `[a]^k`, `E_G^n` and the `E_G` expansion are plain functions that
//! produce ordinary trees rather than dedicated constructors.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

/// An agent index, as in `K_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Agent(pub u32);

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("a group must have at least one member")]
    Empty,
    #[error("agent {0} occurs more than once in the group")]
    Duplicate(Agent),
}

/// A nonempty set of agents kept in strictly increasing order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Group(Arc<[Agent]>);

impl Group {
    /// Builds a group from members in any order. Duplicates are rejected.
    pub fn new(members: impl IntoIterator<Item = Agent>) -> Result<Self, GroupError> {
        let mut v: Vec<Agent> = members.into_iter().collect();
        if v.is_empty() {
            return Err(GroupError::Empty);
        }
        v.sort();
        for w in v.windows(2) {
            if w[0] == w[1] {
                return Err(GroupError::Duplicate(w[0]));
            }
        }
        Ok(Group(v.into()))
    }

    /// The group `{1, ..., n}`. Panics if `n == 0`.
    pub fn range(n: u32) -> Self {
        assert!(n > 0, "empty group");
        Group((1..=n).map(Agent).collect::<Vec<_>>().into())
    }

    pub fn members(&self) -> &[Agent] {
        &self.0
    }

    pub fn contains(&self, a: Agent) -> bool {
        self.0.binary_search(&a).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, a) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

/// What an event may change.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum EventKind {
    /// Changes only what agents know about the world.
    Epistemic,
    /// Changes the world itself. KT1 and PERSIST refuse such events.
    Ontic,
}

/// A named event of the dynamic modality `[a]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventSym {
    name: Arc<str>,
    kind: EventKind,
}

impl EventSym {
    pub const STAR: &'static str = "star";
    pub const POINT: &'static str = "point";

    pub fn new(name: &str, kind: EventKind) -> Self {
        EventSym { name: name.into(), kind }
    }

    pub fn epistemic(name: &str) -> Self {
        Self::new(name, EventKind::Epistemic)
    }

    /// Father's injunction, written `[*]`.
    pub fn star() -> Self {
        Self::epistemic(Self::STAR)
    }

    /// The initial statement, written `[.]` (or `[¤]`).
    pub fn point() -> Self {
        Self::epistemic(Self::POINT)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> EventKind {
        self.kind
    }
}

/// Atomic propositions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomKind {
    /// Child `i` has mud on their face.
    Mu(Agent),
    /// At least `j` children are muddy.
    Lambda(u32),
    /// Exactly `j` children are muddy.
    Eps(u32),
    Named { name: Arc<str>, physical: bool },
}

impl AtomKind {
    pub fn is_physical(&self) -> bool {
        match self {
            AtomKind::Mu(_) | AtomKind::Lambda(_) | AtomKind::Eps(_) => true,
            AtomKind::Named { physical, .. } => *physical,
        }
    }
}

/// A formula of the logic. Bi-implication is not a constructor; see [`Formula::iff`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Atom(AtomKind),
    Not(Arc<Formula>),
    And(Arc<Formula>, Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    Imp(Arc<Formula>, Arc<Formula>),
    K(Agent, Arc<Formula>),
    E(Group, Arc<Formula>),
    C(Group, Arc<Formula>),
    Box(EventSym, Arc<Formula>),
}

impl Formula {
    pub fn mu(i: u32) -> Self {
        Formula::Atom(AtomKind::Mu(Agent(i)))
    }

    pub fn lambda(j: u32) -> Self {
        Formula::Atom(AtomKind::Lambda(j))
    }

    pub fn eps(j: u32) -> Self {
        Formula::Atom(AtomKind::Eps(j))
    }

    pub fn named(name: &str, physical: bool) -> Self {
        Formula::Atom(AtomKind::Named { name: name.into(), physical })
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Self {
        Formula::Not(Arc::new(a))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Arc::new(a), Arc::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Arc::new(a), Arc::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Self {
        Formula::Imp(Arc::new(a), Arc::new(b))
    }

    /// `a <-> b`, expanded to `(a -> b) & (b -> a)`.
    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::and(Formula::imp(a.clone(), b.clone()), Formula::imp(b, a))
    }

    pub fn k(i: Agent, a: Formula) -> Self {
        Formula::K(i, Arc::new(a))
    }

    pub fn e(g: Group, a: Formula) -> Self {
        Formula::E(g, Arc::new(a))
    }

    pub fn c(g: Group, a: Formula) -> Self {
        Formula::C(g, Arc::new(a))
    }

    pub fn boxed(ev: EventSym, a: Formula) -> Self {
        Formula::Box(ev, Arc::new(a))
    }

    /// Right-nested implication chain `h1 -> h2 -> ... -> concl`.
    pub fn imp_chain<I>(hyps: I, concl: Formula) -> Self
    where
        I: IntoIterator<Item = Formula>,
        I::IntoIter: DoubleEndedIterator,
    {
        hyps.into_iter().rev().fold(concl, |acc, h| Formula::imp(h, acc))
    }

    /// Right-nested conjunction of a nonempty list. Panics on an empty list.
    pub fn conj(items: Vec<Formula>) -> Self {
        let mut it = items.into_iter().rev();
        let last = it.next().expect("empty conjunction");
        it.fold(last, |acc, x| Formula::and(x, acc))
    }

    pub fn as_imp(&self) -> Option<(&Formula, &Formula)> {
        match self {
            Formula::Imp(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn as_and(&self) -> Option<(&Formula, &Formula)> {
        match self {
            Formula::And(a, b) => Some((a, b)),
            _ => None,
        }
    }

    /// Immediate subformulas.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => vec![],
            Formula::Not(a)
            | Formula::K(_, a)
            | Formula::E(_, a)
            | Formula::C(_, a)
            | Formula::Box(_, a) => vec![a],
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => vec![a, b],
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children().into_iter().map(Formula::depth).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }

    /// True iff the formula contains a dynamic modality.
    pub fn mentions_event(&self) -> bool {
        match self {
            Formula::Box(..) => true,
            _ => self.children().into_iter().any(Formula::mentions_event),
        }
    }

    /// Collects every event occurring in the formula.
    pub fn events(&self, out: &mut Vec<EventSym>) {
        if let Formula::Box(ev, _) = self {
            if !out.contains(ev) {
                out.push(ev.clone());
            }
        }
        for c in self.children() {
            c.events(out);
        }
    }
}

/// `[event]^k body`.
pub fn iter_box(event: &EventSym, k: usize, body: Formula) -> Formula {
    (0..k).fold(body, |acc, _| Formula::boxed(event.clone(), acc))
}

/// `E_G^n body`.
pub fn iter_e(group: &Group, n: usize, body: Formula) -> Formula {
    (0..n).fold(body, |acc, _| Formula::e(group.clone(), acc))
}

/// The right-nested conjunction of `K_i body` over the group members, in
/// increasing agent order.
pub fn def_e_expansion(group: &Group, body: &Formula) -> Formula {
    Formula::conj(
        group
            .members()
            .iter()
            .map(|&i| Formula::k(i, body.clone()))
            .collect(),
    )
}

/// Built only from physical atoms, constants and boolean connectives.
pub fn is_physical(f: &Formula) -> bool {
    match f {
        Formula::True | Formula::False => true,
        Formula::Atom(a) => a.is_physical(),
        Formula::Not(a) => is_physical(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
            is_physical(a) && is_physical(b)
        }
        Formula::K(..) | Formula::E(..) | Formula::C(..) | Formula::Box(..) => false,
    }
}

/// Propositional formula over numbered placeholders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Skeleton {
    True,
    False,
    Var(usize),
    Not(Box<Skeleton>),
    And(Box<Skeleton>, Box<Skeleton>),
    Or(Box<Skeleton>, Box<Skeleton>),
    Imp(Box<Skeleton>, Box<Skeleton>),
}

impl Skeleton {
    /// Evaluates 64 valuations at once; `vars[k]` holds the bit pattern of placeholder `k`.
    pub fn eval_words(&self, vars: &[u64]) -> u64 {
        match self {
            Skeleton::True => !0,
            Skeleton::False => 0,
            Skeleton::Var(k) => vars[*k],
            Skeleton::Not(a) => !a.eval_words(vars),
            Skeleton::And(a, b) => a.eval_words(vars) & b.eval_words(vars),
            Skeleton::Or(a, b) => a.eval_words(vars) | b.eval_words(vars),
            Skeleton::Imp(a, b) => !a.eval_words(vars) | b.eval_words(vars),
        }
    }

    pub fn eval(&self, valuation: &[bool]) -> bool {
        let words: Vec<u64> = valuation.iter().map(|&b| if b { !0 } else { 0 }).collect();
        self.eval_words(&words) & 1 == 1
    }

    /// Rebuilds a formula by replacing each placeholder with its binding.
    pub fn substitute(&self, binding: &[Formula]) -> Formula {
        match self {
            Skeleton::True => Formula::True,
            Skeleton::False => Formula::False,
            Skeleton::Var(k) => binding[*k].clone(),
            Skeleton::Not(a) => Formula::not(a.substitute(binding)),
            Skeleton::And(a, b) => Formula::and(a.substitute(binding), b.substitute(binding)),
            Skeleton::Or(a, b) => Formula::or(a.substitute(binding), b.substitute(binding)),
            Skeleton::Imp(a, b) => Formula::imp(a.substitute(binding), b.substitute(binding)),
        }
    }
}

/// Abstracts every maximal atom-or-modality subformula to a placeholder.
/// Structurally equal subformulas share one placeholder; placeholders are
/// numbered in order of first occurrence (left to right).
pub fn boolean_skeleton(f: &Formula) -> (Skeleton, Vec<Formula>) {
    fn go<'a>(
        f: &'a Formula,
        index: &mut HashMap<&'a Formula, usize>,
        binding: &mut Vec<Formula>,
    ) -> Skeleton {
        let bin = |a: &'a Formula,
                   b: &'a Formula,
                   index: &mut HashMap<&'a Formula, usize>,
                   binding: &mut Vec<Formula>| {
            let x = go(a, index, binding);
            let y = go(b, index, binding);
            (Box::new(x), Box::new(y))
        };
        match f {
            Formula::True => Skeleton::True,
            Formula::False => Skeleton::False,
            Formula::Not(a) => Skeleton::Not(Box::new(go(a, index, binding))),
            Formula::And(a, b) => {
                let (x, y) = bin(a, b, index, binding);
                Skeleton::And(x, y)
            }
            Formula::Or(a, b) => {
                let (x, y) = bin(a, b, index, binding);
                Skeleton::Or(x, y)
            }
            Formula::Imp(a, b) => {
                let (x, y) = bin(a, b, index, binding);
                Skeleton::Imp(x, y)
            }
            _ => {
                let next = binding.len();
                let k = *index.entry(f).or_insert(next);
                if k == next {
                    binding.push(f.clone());
                }
                Skeleton::Var(k)
            }
        }
    }
    let mut index = HashMap::new();
    let mut binding = Vec::new();
    let sk = go(f, &mut index, &mut binding);
    (sk, binding)
}
