//! Kripke-model oracle for the muddy-children language.
//!
//! Worlds are muddiness bitvectors (bit `i-1` is child `i`); agent `i`
//! cannot tell apart two worlds that differ at most in bit `i-1`. Events are
//! public announcements: updating by `a` keeps the worlds where the
//! announcement of `a` holds. `[a]phi` is true at a world where the
//! announcement fails.
//!
//! Nothing here is trusted by the kernel.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::formula::{AtomKind, EventSym, Formula, Group};
use crate::muddy::Scenario;

/// Largest supported number of children.
pub const MAX_CHILDREN: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("world {0} is not in the model")]
    WorldNotInModel(World),
    #[error("agent {agent} is not one of the {children} children")]
    UnknownAgent { agent: u32, children: u32 },
    #[error("atom @{0} has no valuation")]
    UnvaluedAtom(String),
    #[error("event `{0}` has no semantics")]
    NoEventSemantics(String),
    #[error("{0} children exceed the model budget of {MAX_CHILDREN}")]
    TooLarge(u32),
    #[error("world has {got} bits but the model has {expected} children")]
    WorldWidth { got: usize, expected: u32 },
}

/// A muddiness assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct World {
    bits: u32,
    width: u32,
}

impl World {
    pub fn new(bits: u32, width: u32) -> Self {
        debug_assert!(width <= MAX_CHILDREN && bits >> width == 0);
        World { bits, width }
    }

    /// The world in which exactly the listed children are muddy.
    pub fn with_muddy(width: u32, muddy: impl IntoIterator<Item = u32>) -> Self {
        let bits = muddy.into_iter().fold(0, |acc, i| acc | 1 << (i - 1));
        World::new(bits, width)
    }

    /// Parses a string such as `"101"`, child 1 first.
    pub fn parse(s: &str) -> Option<Self> {
        let width = s.len() as u32;
        if width == 0 || width > MAX_CHILDREN {
            return None;
        }
        let mut bits = 0;
        for (k, ch) in s.chars().enumerate() {
            match ch {
                '1' => bits |= 1 << k,
                '0' => {}
                _ => return None,
            }
        }
        Some(World::new(bits, width))
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn is_muddy(&self, child: u32) -> bool {
        child >= 1 && child <= self.width && self.bits >> (child - 1) & 1 == 1
    }

    pub fn muddy_count(&self) -> u32 {
        self.bits.count_ones()
    }
}

impl fmt::Display for World {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.width {
            f.write_str(if self.bits >> k & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Announcement formula for each event.
#[derive(Clone, Debug)]
pub struct EventSemantics {
    announcements: BTreeMap<String, Formula>,
}

impl EventSemantics {
    pub fn new() -> Self {
        EventSemantics { announcements: BTreeMap::new() }
    }

    pub fn with(mut self, event: &str, announcement: Formula) -> Self {
        self.announcements.insert(event.to_string(), announcement);
        self
    }

    /// `point` announces `lambda 1`; `star` announces that no child knows
    /// they are muddy.
    pub fn muddy(group: &Group) -> Self {
        let nobody_knows = Formula::conj(
            group
                .members()
                .iter()
                .map(|&i| Formula::not(Formula::k(i, Formula::Atom(AtomKind::Mu(i)))))
                .collect(),
        );
        EventSemantics::new()
            .with(EventSym::POINT, Formula::lambda(1))
            .with(EventSym::STAR, nobody_knows)
    }

    pub fn announcement(&self, event: &EventSym) -> Result<&Formula, SemanticsError> {
        self.announcements
            .get(event.name())
            .ok_or_else(|| SemanticsError::NoEventSemantics(event.name().to_string()))
    }
}

impl Default for EventSemantics {
    fn default() -> Self {
        Self::new()
    }
}

/// A finite set of worlds over `n` children with the sight relations and
/// an optional actual world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeModel {
    children: u32,
    present: Vec<bool>,
    actual: Option<World>,
    history: Vec<String>,
}

impl KripkeModel {
    /// All `2^n` worlds; no actual world.
    pub fn full_space(children: u32) -> Result<Self, SemanticsError> {
        if children == 0 || children > MAX_CHILDREN {
            return Err(SemanticsError::TooLarge(children));
        }
        Ok(KripkeModel {
            children,
            present: vec![true; 1 << children],
            actual: None,
            history: Vec::new(),
        })
    }

    /// The initial model of a scenario: every world, with the first `m+1`
    /// children muddy in the actual world.
    pub fn full(s: &Scenario) -> Result<Self, SemanticsError> {
        let mut m = Self::full_space(s.children())?;
        m.actual = Some(World::with_muddy(s.children(), 1..=s.muddy_count()));
        Ok(m)
    }

    /// Keeps the listed worlds only.
    pub fn from_worlds(
        children: u32,
        worlds: impl IntoIterator<Item = u32>,
        actual: Option<World>,
    ) -> Result<Self, SemanticsError> {
        let mut m = Self::full_space(children)?;
        m.present.iter_mut().for_each(|p| *p = false);
        for w in worlds {
            m.present[w as usize] = true;
        }
        m.actual = actual.filter(|a| m.present[a.bits as usize]);
        Ok(m)
    }

    pub fn children(&self) -> u32 {
        self.children
    }

    pub fn actual(&self) -> Option<World> {
        self.actual
    }

    pub fn set_actual(&mut self, w: World) -> Result<(), SemanticsError> {
        self.check_world(w)?;
        self.actual = Some(w);
        Ok(())
    }

    /// Events applied so far, oldest first.
    pub fn history(&self) -> &[String] {
        &self.history
    }

    pub fn contains(&self, w: World) -> bool {
        w.width == self.children && self.present[w.bits as usize]
    }

    pub fn worlds(&self) -> impl Iterator<Item = World> + '_ {
        self.present
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(move |(b, _)| World::new(b as u32, self.children))
    }

    pub fn len(&self) -> usize {
        self.present.iter().filter(|&&p| p).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether agent `i` cannot distinguish `w` from `v`.
    pub fn related(&self, agent: u32, w: World, v: World) -> bool {
        agent >= 1
            && agent <= self.children
            && self.contains(w)
            && self.contains(v)
            && (w.bits ^ v.bits) & !(1 << (agent - 1)) == 0
    }

    fn check_world(&self, w: World) -> Result<(), SemanticsError> {
        if w.width != self.children {
            return Err(SemanticsError::WorldWidth { got: w.width as usize, expected: self.children });
        }
        if !self.present[w.bits as usize] {
            return Err(SemanticsError::WorldNotInModel(w));
        }
        Ok(())
    }

    fn check_agent(&self, agent: u32) -> Result<(), SemanticsError> {
        if agent == 0 || agent > self.children {
            return Err(SemanticsError::UnknownAgent { agent, children: self.children });
        }
        Ok(())
    }

    fn restrict(&self, keep: &[bool]) -> KripkeModel {
        let present: Vec<bool> = self.present.iter().zip(keep).map(|(&p, &k)| p && k).collect();
        let actual = self.actual.filter(|a| present[a.bits as usize]);
        KripkeModel { children: self.children, present, actual, history: self.history.clone() }
    }

    /// Truth value of `f` at every world index; entries for absent worlds are `false`.
    pub fn extension(&self, f: &Formula, sem: &EventSemantics) -> Result<Vec<bool>, SemanticsError> {
        let n = self.present.len();
        let ext = match f {
            Formula::True => self.present.clone(),
            Formula::False => vec![false; n],
            Formula::Atom(a) => {
                let pred: Box<dyn Fn(u32) -> bool> = match a {
                    AtomKind::Mu(i) => {
                        self.check_agent(i.0)?;
                        let bit = 1 << (i.0 - 1);
                        Box::new(move |w| w & bit != 0)
                    }
                    AtomKind::Lambda(j) => {
                        let j = *j;
                        Box::new(move |w: u32| w.count_ones() >= j)
                    }
                    AtomKind::Eps(j) => {
                        let j = *j;
                        Box::new(move |w: u32| w.count_ones() == j)
                    }
                    AtomKind::Named { name, .. } => {
                        return Err(SemanticsError::UnvaluedAtom(name.to_string()))
                    }
                };
                (0..n).map(|w| self.present[w] && pred(w as u32)).collect()
            }
            Formula::Not(a) => {
                let x = self.extension(a, sem)?;
                (0..n).map(|w| self.present[w] && !x[w]).collect()
            }
            Formula::And(a, b) => {
                let (x, y) = (self.extension(a, sem)?, self.extension(b, sem)?);
                (0..n).map(|w| x[w] && y[w]).collect()
            }
            Formula::Or(a, b) => {
                let (x, y) = (self.extension(a, sem)?, self.extension(b, sem)?);
                (0..n).map(|w| x[w] || y[w]).collect()
            }
            Formula::Imp(a, b) => {
                let (x, y) = (self.extension(a, sem)?, self.extension(b, sem)?);
                (0..n).map(|w| self.present[w] && (!x[w] || y[w])).collect()
            }
            Formula::K(i, a) => {
                self.check_agent(i.0)?;
                let x = self.extension(a, sem)?;
                self.knows(&[i.0], &x)
            }
            Formula::E(g, a) => {
                for i in g.members() {
                    self.check_agent(i.0)?;
                }
                let agents: Vec<u32> = g.members().iter().map(|a| a.0).collect();
                let x = self.extension(a, sem)?;
                self.knows(&agents, &x)
            }
            Formula::C(g, a) => {
                for i in g.members() {
                    self.check_agent(i.0)?;
                }
                let agents: Vec<u32> = g.members().iter().map(|a| a.0).collect();
                let x = self.extension(a, sem)?;
                self.common(&agents, &x)
            }
            Formula::Box(ev, a) => {
                let ann = self.extension(sem.announcement(ev)?, sem)?;
                let after = self.update_with(ev, &ann);
                let x = after.extension(a, sem)?;
                (0..n).map(|w| self.present[w] && (!ann[w] || x[w])).collect()
            }
        };
        Ok(ext)
    }

    /// `x` holds at every world one step away for some agent in `agents`.
    fn knows(&self, agents: &[u32], x: &[bool]) -> Vec<bool> {
        (0..self.present.len())
            .map(|w| {
                self.present[w]
                    && x[w]
                    && agents.iter().all(|&i| {
                        let v = w ^ (1 << (i - 1));
                        !self.present[v] || x[v]
                    })
            })
            .collect()
    }

    /// `x` holds on the whole connected component under the union relation.
    fn common(&self, agents: &[u32], x: &[bool]) -> Vec<bool> {
        let n = self.present.len();
        let mut comp = vec![usize::MAX; n];
        let mut out = vec![false; n];
        let mut queue = VecDeque::new();
        for start in 0..n {
            if !self.present[start] || comp[start] != usize::MAX {
                continue;
            }
            comp[start] = start;
            queue.push_back(start);
            let mut members = vec![];
            let mut all = true;
            while let Some(w) = queue.pop_front() {
                members.push(w);
                all &= x[w];
                for &i in agents {
                    let v = w ^ (1 << (i - 1));
                    if self.present[v] && comp[v] == usize::MAX {
                        comp[v] = start;
                        queue.push_back(v);
                    }
                }
            }
            for w in members {
                out[w] = all;
            }
        }
        out
    }

    fn update_with(&self, ev: &EventSym, ann: &[bool]) -> KripkeModel {
        let mut m = self.restrict(ann);
        m.history.push(ev.name().to_string());
        m
    }

    /// Public announcement of `event`: keeps the worlds where its
    /// announcement holds.
    pub fn update(&self, event: &EventSym, sem: &EventSemantics) -> Result<KripkeModel, SemanticsError> {
        let ann = self.extension(sem.announcement(event)?, sem)?;
        Ok(self.update_with(event, &ann))
    }

    /// Restricts the model to the worlds satisfying `f`, without recording an event.
    pub fn restrict_to(&self, f: &Formula, sem: &EventSemantics) -> Result<KripkeModel, SemanticsError> {
        let ext = self.extension(f, sem)?;
        Ok(self.restrict(&ext))
    }

    pub fn eval(&self, w: World, f: &Formula, sem: &EventSemantics) -> Result<bool, SemanticsError> {
        self.check_world(w)?;
        Ok(self.extension(f, sem)?[w.bits as usize])
    }

    /// The first world of the model at which `f` fails, if any.
    pub fn counterexample(&self, f: &Formula, sem: &EventSemantics) -> Result<Option<World>, SemanticsError> {
        let ext = self.extension(f, sem)?;
        Ok(self.worlds().find(|w| !ext[w.bits as usize]))
    }

    pub fn is_valid(&self, f: &Formula, sem: &EventSemantics) -> Result<bool, SemanticsError> {
        Ok(self.counterexample(f, sem)?.is_none())
    }
}

/// Truth at every world of the full `2^(c+1)`-world model of the scenario,
/// with the muddy event semantics.
pub fn valid(s: &Scenario, f: &Formula) -> Result<bool, SemanticsError> {
    let sem = EventSemantics::muddy(&s.group());
    KripkeModel::full(s)?.is_valid(f, &sem)
}

/// One line of a semantic report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportEntry {
    pub lemma: String,
    pub step: String,
    pub rule: String,
    pub formula: String,
    pub stage: String,
    pub verdict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub countermodel: Option<String>,
}

impl ReportEntry {
    fn new(lemma: &str, step: String, rule: &str, formula: &Formula, stage: &Stage, counter: Option<World>) -> Self {
        ReportEntry {
            lemma: lemma.to_string(),
            step,
            rule: rule.to_string(),
            formula: formula.to_string(),
            stage: stage.name.clone(),
            verdict: counter.is_none(),
            countermodel: counter.map(|w| w.to_string()),
        }
    }
}

/// The result of a semantic audit.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub scenario: Scenario,
    pub passed: bool,
    pub checked: usize,
    pub failures: Vec<ReportEntry>,
    /// Rules or nodes deliberately left unchecked, with the reason.
    pub excluded: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub entries: Vec<ReportEntry>,
}

impl Report {
    fn new(scenario: Scenario, entries: Vec<ReportEntry>, excluded: Vec<String>) -> Self {
        let failures: Vec<ReportEntry> = entries.iter().filter(|e| !e.verdict).cloned().collect();
        Report { scenario, passed: failures.is_empty(), checked: entries.len(), failures, excluded, entries }
    }

    /// Drops the passing entries, keeping the counts.
    pub fn summary(mut self) -> Self {
        self.entries.clear();
        self
    }
}

/// A named model in which formulas are checked.
#[derive(Clone, Debug)]
pub struct Stage {
    pub name: String,
    pub model: KripkeModel,
}

/// The models used by the audits of a scenario.
///
/// `full` is every world. `scenario` keeps the worlds where at least one
/// child is muddy and the muddy count is `m` or `m + 1`: the worlds that
/// are consistent with what a muddy child sees once the father has spoken.
/// Formulas that mention `[.]` are checked there, since the counting axiom
/// is only sound relative to that knowledge.
#[derive(Clone, Debug)]
pub struct Stages {
    pub sem: EventSemantics,
    pub full: Stage,
    pub scenario: Stage,
}

impl Stages {
    pub fn new(s: &Scenario) -> Result<Self, SemanticsError> {
        let sem = EventSemantics::muddy(&s.group());
        let full = KripkeModel::full(s)?;
        let seen = Formula::and(
            Formula::lambda(1),
            Formula::or(Formula::eps(s.m()), Formula::eps(s.m() + 1)),
        );
        let scenario = full.restrict_to(&seen, &sem)?;
        Ok(Stages {
            sem,
            full: Stage { name: "full".into(), model: full },
            scenario: Stage { name: "scenario".into(), model: scenario },
        })
    }

    /// Stages a proof line is checked in: the scenario model if it mentions
    /// `[.]`, the full model if it mentions no event, both otherwise.
    pub fn for_formula(&self, f: &Formula) -> Vec<&Stage> {
        let mut evs = Vec::new();
        f.events(&mut evs);
        if evs.iter().any(|e| e.name() == EventSym::POINT) {
            vec![&self.scenario]
        } else if evs.is_empty() {
            vec![&self.full]
        } else {
            vec![&self.full, &self.scenario]
        }
    }

    /// The model after applying `events` in order to `from`, named by the history.
    pub fn after(&self, from: &Stage, events: &[EventSym]) -> Result<Stage, SemanticsError> {
        let mut model = from.model.clone();
        let mut name = from.name.clone();
        for ev in events {
            model = model.update(ev, &self.sem)?;
            name.push_str(if ev.name() == EventSym::STAR { ",*" } else { ",." });
        }
        Ok(Stage { name, model })
    }

    pub fn check(&self, stage: &Stage, f: &Formula) -> Result<Option<World>, SemanticsError> {
        stage.model.counterexample(f, &self.sem)
    }
}

/// A random formula over the atoms and modalities of an `n`-child model, of
/// depth at most `depth`. Events are `point` and `star`.
pub fn random_formula<R: rand::Rng + ?Sized>(rng: &mut R, children: u32, depth: usize) -> Formula {
    let agent = |rng: &mut R| crate::formula::Agent(rng.gen_range(1..=children));
    let group = |rng: &mut R| {
        let bits: u32 = rng.gen_range(1..1u32 << children);
        Group::new((1..=children).filter(|i| bits >> (i - 1) & 1 == 1).map(crate::formula::Agent))
            .expect("nonempty")
    };
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..5) {
            0 => Formula::mu(rng.gen_range(1..=children)),
            1 => Formula::lambda(rng.gen_range(0..=children + 1)),
            2 => Formula::eps(rng.gen_range(0..=children + 1)),
            3 => Formula::True,
            _ => Formula::False,
        };
    }
    let sub = |rng: &mut R| random_formula(rng, children, depth - 1);
    match rng.gen_range(0..10) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::imp(sub(rng), sub(rng)),
        4 => Formula::k(agent(rng), sub(rng)),
        5 => Formula::e(group(rng), sub(rng)),
        6 => Formula::c(group(rng), sub(rng)),
        7 => Formula::boxed(EventSym::point(), sub(rng)),
        _ => Formula::boxed(EventSym::star(), sub(rng)),
    }
}

/// Number of random bodies tried for the KT1 instances on `star`.
pub const KT1_SAMPLES: usize = 200;

/// Checks every axiom instance used by the main theorem's proofs for the
/// scenario, plus KT1 on `star` for [`KT1_SAMPLES`] random bodies of depth
/// at most 3. T_Box is excluded: it is not sound for announcements.
pub fn validate_theory(s: &Scenario) -> Result<Report, SemanticsError> {
    use crate::kernel::{Param, RuleKind};
    use rand::{Rng, SeedableRng};

    let st = Stages::new(s)?;
    let prover = crate::muddy::MuddyProver::new(*s);
    let mut leaves: BTreeMap<String, (String, Formula)> = BTreeMap::new();
    for i in s.agents() {
        let j = prover
            .prove_concl(i)
            .expect("the main theorem is provable for every scenario");
        for node in j.proof().post_order() {
            if node.premises.is_empty() && !matches!(node.rule, RuleKind::Classical(_)) {
                let key = format!("{}|{}", node.rule, node.conclusion);
                leaves.entry(key).or_insert((node.rule.name().to_string(), node.conclusion.clone()));
            }
        }
    }
    let mut entries = Vec::new();
    let mut excluded = vec!["T_Box: not sound under announcement updates".to_string()];
    for (rule, f) in leaves.values() {
        if rule == "T_Box" {
            excluded.push(format!("T_Box instance {f}"));
            continue;
        }
        for stage in st.for_formula(f) {
            entries.push(ReportEntry::new(rule, "axiom".into(), rule, f, stage, st.check(stage, f)?));
        }
    }
    // MC2(j) also along the puzzle's own history: after the father speaks
    // and j - 1 rounds, and from the scenario model after j - 1 rounds.
    for inst in prover.theory().admitted() {
        if inst.schema != crate::muddy::schema::MC2 {
            continue;
        }
        let j = match inst.params.as_slice() {
            [Param::Nat(j)] => *j as usize,
            _ => continue,
        };
        let rounds = vec![EventSym::star(); j - 1];
        let mut chain = vec![EventSym::point()];
        chain.extend(rounds.iter().cloned());
        for stage in [st.after(&st.full, &chain)?, st.after(&st.scenario, &rounds)?] {
            let step = format!("MC2({j})");
            entries.push(ReportEntry::new("MC2", step, "MC2", &inst.formula, &stage, st.check(&stage, &inst.formula)?));
        }
    }
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed ^ u64::from(s.c()) << 8 ^ u64::from(s.m()));
    for k in 0..KT1_SAMPLES {
        let phi = random_formula(&mut rng, s.children(), 3);
        let i = crate::formula::Agent(rng.gen_range(1..=s.children()));
        let f = Formula::imp(
            Formula::k(i, Formula::boxed(EventSym::star(), phi.clone())),
            Formula::boxed(EventSym::star(), Formula::k(i, phi)),
        );
        for stage in [&st.full, &st.scenario] {
            entries.push(ReportEntry::new("KT1", format!("sample {k}"), "KT1", &f, stage, st.check(stage, &f)?));
        }
    }
    Ok(Report::new(*s, entries, excluded))
}

/// Checks the conclusion of every node of `tree` in the stages chosen by
/// [`Stages::for_formula`]. T_Box nodes are listed as excluded.
pub fn validate_judgment_trace(s: &Scenario, tree: &crate::kernel::ProofTree) -> Result<Report, SemanticsError> {
    use crate::kernel::RuleKind;

    let st = Stages::new(s)?;
    let mut entries = Vec::new();
    let mut excluded = Vec::new();
    let mut lemma = String::from("-");
    for (k, node) in tree.post_order().into_iter().enumerate() {
        if let Some(l) = node.labels.last() {
            lemma = l.to_string();
        }
        if matches!(node.rule, RuleKind::TBox(..)) {
            excluded.push(format!("node {k}: T_Box {}", node.conclusion));
            continue;
        }
        for stage in st.for_formula(&node.conclusion) {
            let counter = st.check(stage, &node.conclusion)?;
            entries.push(ReportEntry::new(&lemma, k.to_string(), node.rule.name(), &node.conclusion, stage, counter));
        }
    }
    Ok(Report::new(*s, entries, excluded))
}
