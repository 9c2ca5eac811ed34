//! The muddy-children theory and its proof generators.
//!
//! Each generator builds one lemma step by step and names the steps, so the
//! result can be audited with
//! [`ProofTree::trace`](crate::kernel::ProofTree::trace).

use thiserror::Error;

use crate::derived::{
    and_intro_imp, and_mono, by_tautology, c_unfold, cut, e_and_dist, e_kt1, e_mono, e_pers,
    e_to_k, box_and_dist, box_mono, identity, imp_mono_right, iter_box_and_dist, iter_box_mono,
    iter_persist, k_and_dist, k_mono, t_e, under_boxes,
};
use crate::formula::{is_physical, iter_box, iter_e, Agent, EventKind, EventSym, Formula, Group};
use crate::kernel::{self, classical, Judgment, KernelError, Param, RuleKind, Theory};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("scenario needs m <= c, got c = {c}, m = {m}")]
    TooManyMuddy { c: u32, m: u32 },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MuddyError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("agent {agent} is not one of the {children} children")]
    NoSuchAgent { agent: u32, children: u32 },
    #[error("{lemma}: {reason}")]
    Parameter { lemma: &'static str, reason: String },
}

type Result<T> = std::result::Result<T, MuddyError>;

/// `c + 1` children, `m + 1` of them muddy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub struct Scenario {
    c: u32,
    m: u32,
}

impl Scenario {
    pub fn new(c: u32, m: u32) -> std::result::Result<Self, ScenarioError> {
        if m > c {
            return Err(ScenarioError::TooManyMuddy { c, m });
        }
        Ok(Scenario { c, m })
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn children(&self) -> u32 {
        self.c + 1
    }

    pub fn muddy_count(&self) -> u32 {
        self.m + 1
    }

    /// `{1, ..., c+1}`.
    pub fn group(&self) -> Group {
        Group::range(self.children())
    }

    pub fn agents(&self) -> impl Iterator<Item = Agent> {
        (1..=self.children()).map(Agent)
    }
}

/// Schema names of the muddy theory.
pub mod schema {
    pub const EQ_LE: &str = "EQ_LE";
    pub const PERSIST: &str = "PERSIST";
    pub const MC1_1: &str = "MC1_1";
    pub const MC1_2: &str = "MC1_2";
    pub const PERS_MC1_2: &str = "PERS_MC1_2";
    pub const MC2: &str = "MC2";
    pub const MC3: &str = "MC3";
    pub const ALL: [&str; 7] = [EQ_LE, PERSIST, MC1_1, MC1_2, PERS_MC1_2, MC2, MC3];
}

/// `[.] TRUE`, the hypothesis of every point lemma.
pub fn father_spoke() -> Formula {
    Formula::boxed(EventSym::point(), Formula::True)
}

/// `mu_i -> K_i (eps_m | eps_{m+1})`
pub fn counting(m: u32, i: Agent) -> Formula {
    Formula::imp(
        Formula::mu(i.0),
        Formula::k(i, Formula::or(Formula::eps(m), Formula::eps(m + 1))),
    )
}

/// `[.] TRUE -> [*]^m (mu_i -> K_i mu_i)`
pub fn concl_statement(s: &Scenario, i: Agent) -> Formula {
    Formula::imp(
        father_spoke(),
        iter_box(&EventSym::star(), s.m as usize, Formula::imp(Formula::mu(i.0), Formula::k(i, Formula::mu(i.0)))),
    )
}

fn nat(lemma: &str, p: &[Param]) -> std::result::Result<u32, String> {
    match p {
        [Param::Nat(j)] => Ok(*j),
        _ => Err(format!("{lemma} takes one natural number")),
    }
}

fn member(g: &Group, i: Agent) -> std::result::Result<Agent, String> {
    if g.contains(i) {
        Ok(i)
    } else {
        Err(format!("agent {i} is not in {g}"))
    }
}

fn declared(events: &[EventSym], ev: &EventSym) -> std::result::Result<(), String> {
    if !events.contains(ev) {
        return Err(format!("event {ev} is not declared"));
    }
    if ev.kind() != EventKind::Epistemic {
        return Err(format!("event {ev} is not epistemic"));
    }
    Ok(())
}

/// The muddy theory for one scenario. It declares the events `point` and
/// `star` and the seven schemas of [`schema::ALL`].
pub fn muddy_theory(s: &Scenario) -> Theory {
    let g = s.group();
    let m = s.m;
    let events = vec![EventSym::point(), EventSym::star()];
    let (ev1, ev2) = (events.clone(), events.clone());
    let (g1, g2, g3, g4, g5) = (g.clone(), g.clone(), g.clone(), g.clone(), g);
    Theory::new("muddy")
        .with_event(EventSym::point())
        .with_event(EventSym::star())
        .with_schema(schema::EQ_LE, |p| {
            let j = nat(schema::EQ_LE, p)?;
            Ok(Formula::iff(
                Formula::eps(j),
                Formula::and(Formula::lambda(j), Formula::not(Formula::lambda(j + 1))),
            ))
        })
        .with_schema(schema::PERSIST, move |p| match p {
            [Param::Formula(phi), Param::Event(ev)] => {
                if !is_physical(phi) {
                    return Err(format!("{phi} is not physical"));
                }
                declared(&ev1, ev)?;
                Ok(Formula::imp(phi.clone(), Formula::boxed(ev.clone(), phi.clone())))
            }
            _ => Err("PERSIST takes a formula and an event".into()),
        })
        .with_schema(schema::MC1_1, move |p| {
            if !p.is_empty() {
                return Err("MC1_1 takes no parameters".into());
            }
            Ok(Formula::imp(father_spoke(), Formula::c(g1.clone(), Formula::lambda(1))))
        })
        .with_schema(schema::MC1_2, move |p| match p {
            [Param::Agent(i)] => {
                let i = member(&g2, *i)?;
                Ok(Formula::imp(father_spoke(), counting(m, i)))
            }
            _ => Err("MC1_2 takes one agent".into()),
        })
        .with_schema(schema::PERS_MC1_2, move |p| match p {
            [Param::Event(ev), Param::Agent(i)] => {
                declared(&ev2, ev)?;
                let i = member(&g3, *i)?;
                let f = counting(m, i);
                Ok(Formula::imp(f.clone(), Formula::boxed(ev.clone(), f)))
            }
            _ => Err("PERS_MC1_2 takes an event and an agent".into()),
        })
        .with_schema(schema::MC2, move |p| {
            let j = nat(schema::MC2, p)?;
            if j == 0 {
                return Err("MC2 needs j >= 1".into());
            }
            let e = |f| Formula::e(g4.clone(), f);
            Ok(Formula::imp(
                e(e(Formula::lambda(j))),
                Formula::boxed(EventSym::star(), e(Formula::not(Formula::eps(j)))),
            ))
        })
        .with_schema(schema::MC3, move |p| match p {
            [Param::Agent(i)] => {
                let i = member(&g5, *i)?;
                Ok(Formula::imp_chain(
                    [Formula::mu(i.0), Formula::k(i, Formula::eps(m + 1))],
                    Formula::k(i, Formula::mu(i.0)),
                ))
            }
            _ => Err("MC3 takes one agent".into()),
        })
}

/// Proof generators for one scenario, sharing one theory.
#[derive(Debug)]
pub struct MuddyProver {
    scenario: Scenario,
    theory: Theory,
}

impl MuddyProver {
    pub fn new(scenario: Scenario) -> Self {
        MuddyProver { scenario, theory: muddy_theory(&scenario) }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn theory(&self) -> &Theory {
        &self.theory
    }

    fn g(&self) -> Group {
        self.scenario.group()
    }

    fn ax(&self, name: &str, params: Vec<Param>) -> Result<Judgment> {
        let j = kernel::axiom(&RuleKind::TheoryAxiom(name.to_string(), params), &self.theory)?;
        Ok(j.labeled(name))
    }

    fn agent(&self, i: Agent) -> Result<Agent> {
        if self.scenario.group().contains(i) {
            Ok(i)
        } else {
            Err(MuddyError::NoSuchAgent { agent: i.0, children: self.scenario.children() })
        }
    }

    /// `|- eps_j <-> lambda_j & ~lambda_{j+1}`, expanded.
    pub fn eq_lambda_eps(&self, j: u32) -> Result<Judgment> {
        self.ax(schema::EQ_LE, vec![Param::Nat(j)])
    }

    /// `|- lambda_j & ~eps_j -> lambda_{j+1}`
    pub fn lem_imp_lambda_eps(&self, j: u32) -> Result<Judgment> {
        let eq = self.eq_lambda_eps(j)?;
        let goal = Formula::imp(
            Formula::and(Formula::lambda(j), Formula::not(Formula::eps(j))),
            Formula::lambda(j + 1),
        );
        Ok(by_tautology(&[&eq], goal)?.labeled("IMP_λε"))
    }

    /// `|- ~(lambda_{j+1} & eps_j)`
    pub fn lem_exclu_lambda_eps(&self, j: u32) -> Result<Judgment> {
        let eq = self.eq_lambda_eps(j)?;
        let goal = Formula::not(Formula::and(Formula::lambda(j + 1), Formula::eps(j)));
        Ok(by_tautology(&[&eq], goal)?.labeled("EXCLU_λε"))
    }

    /// `|- E_G E_G lambda_j -> [*] E_G lambda_{j+1}`, for `j >= 1`.
    pub fn gain_conn(&self, j: u32) -> Result<Judgment> {
        if j == 0 {
            return Err(MuddyError::Parameter { lemma: "GainConn", reason: "needs j >= 1".into() });
        }
        let g = self.g();
        let star = EventSym::star();
        let lj = Formula::lambda(j);
        let e = |f: Formula| Formula::e(g.clone(), f);
        let not_eps = Formula::not(Formula::eps(j));

        let mc2 = self.ax(schema::MC2, vec![Param::Nat(j)])?;
        let te = t_e(&g, &e(lj.clone()))?.labeled("T_E");
        let pers = self.ax(schema::PERSIST, vec![Param::Formula(lj.clone()), Param::Event(star.clone())])?;
        let ep = e_pers(&g, &star, &pers)?.labeled("EPers");
        let kept = cut(&te, &ep)?.labeled("Cut");
        let both = Formula::and(
            Formula::boxed(star.clone(), e(lj.clone())),
            Formula::boxed(star.clone(), e(not_eps.clone())),
        );
        let intro = by_tautology(&[&mc2, &kept], Formula::imp(e(e(lj.clone())), both))?.labeled("∧ Intro");
        let boxed = cut(&intro, &box_and_dist(&star, &e(lj.clone()), &e(not_eps.clone()))?)?.labeled("*/∧ Dist");
        let shared = cut(&boxed, &box_mono(&star, &e_and_dist(&g, &lj, &not_eps)?)?)?.labeled("E/∧ Dist");
        let gain = box_mono(&star, &e_mono(&g, &self.lem_imp_lambda_eps(j)?)?)?;
        Ok(cut(&shared, &gain)?.labeled("IMP_λε").labeled("GainConn"))
    }

    /// `|- E_G^{n+1} lambda_j -> [*] E_G^n lambda_{j+1}`, for `n, j >= 1`.
    pub fn mult_gain_conn(&self, n: usize, j: u32) -> Result<Judgment> {
        if n == 0 {
            return Err(MuddyError::Parameter { lemma: "MultGainConn", reason: "needs n >= 1".into() });
        }
        let g = self.g();
        let star = EventSym::star();
        let mut acc = self.gain_conn(j)?;
        for k in 1..n {
            let lifted = e_mono(&g, &acc)?.labeled("EDist");
            let body = iter_e(&g, k, Formula::lambda(j + 1));
            let commute = e_kt1(&g, &star, &body)?.labeled("KT1");
            acc = cut(&lifted, &commute)?.labeled("Cut");
        }
        Ok(acc.labeled("MultGainConn"))
    }

    /// `|- C_G p -> E_G^n p`
    pub fn com_imp_part_it(&self, n: usize, p: &Formula) -> Result<Judgment> {
        Ok(c_unfold(&self.g(), n, p)?.labeled("ComImpPartIt"))
    }

    /// `|- [.] TRUE -> E_G^n lambda_1`
    pub fn point_imp_part_it(&self, n: usize) -> Result<Judgment> {
        let mc11 = self.ax(schema::MC1_1, vec![])?;
        let unfold = self.com_imp_part_it(n, &Formula::lambda(1))?;
        Ok(cut(&mc11, &unfold)?.labeled("Cut").labeled("PointImpPartIt"))
    }

    /// `|- [.] TRUE -> [*]^{j-1} E_G^{n-j+1} lambda_j`, for `n >= j >= 1`.
    pub fn point_imp_progr(&self, n: usize, j: u32) -> Result<Judgment> {
        if j == 0 || j as usize > n {
            return Err(MuddyError::Parameter {
                lemma: "PointImpProgr",
                reason: format!("needs n >= j >= 1, got n = {n}, j = {j}"),
            });
        }
        let star = EventSym::star();
        let mut acc = self.point_imp_part_it(n)?;
        for k in 2..=j {
            // acc: [.]TRUE -> [*]^{k-2} E^{n-k+2} lambda_{k-1}, and
            // E^{n-k+2} is E E^{n-k+1} by notation alone.
            let step = self.mult_gain_conn(n - k as usize + 1, k - 1)?;
            let lifted = iter_box_mono(&star, k as usize - 2, &step)?.labeled("(j-1)*Dist");
            acc = cut(&acc, &lifted)?.labeled("Cut");
        }
        Ok(acc.labeled("PointImpProgr"))
    }

    /// `|- [.] TRUE -> [*]^m E_G^{n-m} lambda_{m+1}`, for `n >= m + 1`.
    pub fn res_inter_1(&self, n: usize) -> Result<Judgment> {
        Ok(self.point_imp_progr(n, self.scenario.m + 1)?.labeled("ResInter_1"))
    }

    /// `|- [.] TRUE -> [*]^m E_G lambda_{m+1}`
    pub fn res_inter(&self) -> Result<Judgment> {
        let m = self.scenario.m as usize;
        Ok(self.res_inter_1(m + 1)?.labeled("ResInter_2"))
    }

    /// `|- [.] TRUE -> [*]^m (mu_i -> K_i mu_i)`
    pub fn prove_concl(&self, i: Agent) -> Result<Judgment> {
        let i = self.agent(i)?;
        let g = self.g();
        let m = self.scenario.m;
        let k = m as usize;
        let star = EventSym::star();
        let lam = Formula::lambda(m + 1);
        let (em, em1) = (Formula::eps(m), Formula::eps(m + 1));
        let mu = Formula::mu(i.0);
        let count = counting(m, i);
        let ki = |f: Formula| Formula::k(i, f);
        let under = |acc: &Judgment, step: &Judgment, label: &str| -> Result<Judgment> {
            Ok(under_boxes(&star, k, acc, step)?.labeled(label))
        };
        // Lifts `|- a -> b` to `|- (mu -> K_i a) -> (mu -> K_i b)`.
        let in_knowledge = |step: &Judgment| -> Result<Judgment> {
            Ok(imp_mono_right(&mu, &k_mono(i, step)?)?)
        };

        let res = self.res_inter()?;
        let mc12 = self.ax(schema::MC1_2, vec![Param::Agent(i)])?;
        let s1 = and_intro_imp(&res, &mc12)?.labeled("ResInter_2 & MC1_2");

        let once = self.ax(schema::PERS_MC1_2, vec![Param::Event(star.clone()), Param::Agent(i)])?;
        let shared = iter_box(&star, k, Formula::e(g.clone(), lam.clone()));
        let keep = and_mono(&identity(&shared)?, &iter_persist(&star, k, &once)?)?;
        let s2 = cut(&s1, &keep)?.labeled("PERS_MC1_2");

        let dist = iter_box_and_dist(&star, k, &Formula::e(g.clone(), lam.clone()), &count)?;
        let s3 = cut(&s2, &dist)?.labeled("*/∧ Dist");

        let proj = and_mono(&e_to_k(&g, i, &lam)?, &identity(&count)?)?;
        let s4 = under(&s3, &proj, "(E_G p → K_i p)")?;

        let either = Formula::or(em.clone(), em1.clone());
        let regroup = classical(&Formula::imp(
            Formula::and(ki(lam.clone()), count.clone()),
            Formula::imp(mu.clone(), Formula::and(ki(lam.clone()), ki(either.clone()))),
        ))?;
        let s5 = under(&s4, &regroup, "(a∧(b→c)→(b→a∧c))")?;

        let kdist = imp_mono_right(&mu, &k_and_dist(i, &lam, &either)?)?;
        let s6 = under(&s5, &kdist, "K/∧ Dist")?;

        let low = Formula::and(lam.clone(), em.clone());
        let high = Formula::and(lam.clone(), em1.clone());
        let spread = classical(&Formula::imp(
            Formula::and(lam.clone(), either.clone()),
            Formula::or(low.clone(), high.clone()),
        ))?;
        let s7 = under(&s6, &in_knowledge(&spread)?, "∧/∨ Dist")?;

        let drop = classical(&Formula::imp(
            Formula::or(low.clone(), high),
            Formula::or(low.clone(), em1.clone()),
        ))?;
        let s8 = under(&s7, &in_knowledge(&drop)?, "(λ_m∧ε_m→ε_{m+1})")?;

        let exclu = self.lem_exclu_lambda_eps(m)?;
        let kill = by_tautology(
            &[&exclu],
            Formula::imp(Formula::or(low, em1.clone()), Formula::or(Formula::False, em1.clone())),
        )?;
        let s9 = under(&s8, &in_knowledge(&kill)?, "(EXCLU_λε)")?;

        let unit = classical(&Formula::imp(Formula::or(Formula::False, em1.clone()), em1.clone()))?;
        let s10 = under(&s9, &in_knowledge(&unit)?, "(⊥∨p→p)")?;

        let mc3 = self.ax(schema::MC3, vec![Param::Agent(i)])?;
        let fin = by_tautology(
            &[&mc3],
            Formula::imp(Formula::imp(mu.clone(), ki(em1)), Formula::imp(mu.clone(), ki(mu))),
        )?;
        let s11 = under(&s10, &fin, "MC3")?.labeled("Concl");
        debug_assert_eq!(s11.formula(), &concl_statement(&self.scenario, i));
        Ok(s11)
    }

    /// One instance of every lemma, named by lemma.
    pub fn lemma_suite(&self) -> Result<Vec<(String, Judgment)>> {
        let m = self.scenario.m;
        let n = self.scenario.children() as usize;
        let mut out = vec![
            ("IMP_λε".to_string(), self.lem_imp_lambda_eps(m)?),
            ("EXCLU_λε".to_string(), self.lem_exclu_lambda_eps(m)?),
            ("GainConn".to_string(), self.gain_conn(m + 1)?),
            ("MultGainConn".to_string(), self.mult_gain_conn(2, 1)?),
            ("ComImpPartIt".to_string(), self.com_imp_part_it(n, &Formula::lambda(1))?),
            ("PointImpPartIt".to_string(), self.point_imp_part_it(n)?),
            ("PointImpProgr".to_string(), self.point_imp_progr(n, m + 1)?),
            ("ResInter_2".to_string(), self.res_inter()?),
        ];
        for i in self.scenario.agents() {
            out.push((format!("Concl_{}", i.0), self.prove_concl(i)?));
        }
        Ok(out)
    }
}

/// Builds and returns the proof of the main theorem for agent `i`.
pub fn prove_concl(s: &Scenario, i: Agent) -> Result<Judgment> {
    MuddyProver::new(*s).prove_concl(i)
}
