//! Derived rules.
//!
//! Every function here builds its result by calling kernel rules, so this
//! module is outside the trusted base. Each named step of the muddy-children
//! proof trees has one combinator.

use crate::formula::{def_e_expansion, iter_box, iter_e, Agent, EventSym, Formula, Group};
use crate::kernel::{self, classical, gen_box, gen_k, mp, Judgment, KernelError, RuleKind, Theory};

type Result<T> = std::result::Result<T, KernelError>;

fn bad(rule: &str, reason: impl Into<String>) -> KernelError {
    KernelError::RuleMismatch { rule: rule.to_string(), reason: reason.into() }
}

fn split_imp<'a>(rule: &str, j: &'a Judgment) -> Result<(&'a Formula, &'a Formula)> {
    j.formula().as_imp().ok_or_else(|| bad(rule, "premise is not an implication"))
}

fn logic_axiom(kind: RuleKind) -> Result<Judgment> {
    kernel::axiom(&kind, &Theory::empty())
}

/// From `|- P1`, ..., `|- Pn` infer `|- goal`, provided
/// `P1 -> ... -> Pn -> goal` is a tautology.
pub fn by_tautology(premises: &[&Judgment], goal: Formula) -> Result<Judgment> {
    let chain = Formula::imp_chain(premises.iter().map(|j| j.formula().clone()), goal);
    premises.iter().try_fold(classical(&chain)?, |acc, p| mp(&acc, p))
}

/// `|- a -> a`
pub fn identity(a: &Formula) -> Result<Judgment> {
    classical(&Formula::imp(a.clone(), a.clone()))
}

pub fn cut(ab: &Judgment, bc: &Judgment) -> Result<Judgment> {
    let (a, b) = split_imp("Cut", ab)?;
    let (b2, c) = split_imp("Cut", bc)?;
    if b != b2 {
        return Err(bad("Cut", "middle formulas differ"));
    }
    by_tautology(&[ab, bc], Formula::imp(a.clone(), c.clone()))
}

pub fn and_intro_imp(ab: &Judgment, ac: &Judgment) -> Result<Judgment> {
    let (a, b) = split_imp("And-intro", ab)?;
    let (a2, c) = split_imp("And-intro", ac)?;
    if a != a2 {
        return Err(bad("And-intro", "antecedents differ"));
    }
    by_tautology(&[ab, ac], Formula::imp(a.clone(), Formula::and(b.clone(), c.clone())))
}

fn split_and_conclusion<'a>(rule: &str, j: &'a Judgment) -> Result<(&'a Formula, &'a Formula, &'a Formula)> {
    let (a, bc) = split_imp(rule, j)?;
    let (b, c) = bc.as_and().ok_or_else(|| bad(rule, "conclusion is not a conjunction"))?;
    Ok((a, b, c))
}

pub fn and_elim_left(abc: &Judgment) -> Result<Judgment> {
    let (a, b, _) = split_and_conclusion("And-elim", abc)?;
    by_tautology(&[abc], Formula::imp(a.clone(), b.clone()))
}

pub fn and_elim_right(abc: &Judgment) -> Result<Judgment> {
    let (a, _, c) = split_and_conclusion("And-elim", abc)?;
    by_tautology(&[abc], Formula::imp(a.clone(), c.clone()))
}

/// From `|- a -> b` and `|- c -> d` infer `|- a & c -> b & d`.
pub fn and_mono(ab: &Judgment, cd: &Judgment) -> Result<Judgment> {
    let (a, b) = split_imp("And-mono", ab)?;
    let (c, d) = split_imp("And-mono", cd)?;
    by_tautology(
        &[ab, cd],
        Formula::imp(Formula::and(a.clone(), c.clone()), Formula::and(b.clone(), d.clone())),
    )
}

/// From `|- a_k -> b_k` for each `k`, infer `|- /\a -> /\b` (right-nested).
pub fn conj_map(parts: &[Judgment]) -> Result<Judgment> {
    let (last, init) = parts.split_last().ok_or_else(|| bad("And-mono", "no conjuncts"))?;
    init.iter().rev().try_fold(last.clone(), |acc, p| and_mono(p, &acc))
}

/// `|- /\_k P_k -> [a] /\_k P_k`'s distributive half: `|- /\[a]P_k -> [a]/\P_k`.
pub fn box_conj_dist(ev: &EventSym, items: &[Formula]) -> Result<Judgment> {
    match items {
        [] => Err(bad("Box-dist", "no conjuncts")),
        [only] => identity(&Formula::boxed(ev.clone(), only.clone())),
        [first, rest @ ..] => {
            let inner = box_conj_dist(ev, rest)?;
            let head = identity(&Formula::boxed(ev.clone(), first.clone()))?;
            let step = and_mono(&head, &inner)?;
            let dist = box_and_dist(ev, first, &Formula::conj(rest.to_vec()))?;
            cut(&step, &dist)
        }
    }
}

/// From `|- phi -> psi` infer `|- K_i phi -> K_i psi`.
pub fn k_mono(i: Agent, prem: &Judgment) -> Result<Judgment> {
    let (phi, psi) = split_imp("K-mono", prem)?;
    let nec = gen_k(i, prem)?;
    let kk = logic_axiom(RuleKind::KK(i, phi.clone(), psi.clone()))?;
    by_tautology(&[&kk, &nec], Formula::imp(Formula::k(i, phi.clone()), Formula::k(i, psi.clone())))
}

/// From `|- phi -> psi` infer `|- [a] phi -> [a] psi`.
pub fn box_mono(ev: &EventSym, prem: &Judgment) -> Result<Judgment> {
    let (phi, psi) = split_imp("Box-mono", prem)?;
    let nec = gen_box(ev, prem)?;
    let kb = logic_axiom(RuleKind::KBox(ev.clone(), phi.clone(), psi.clone()))?;
    by_tautology(
        &[&kb, &nec],
        Formula::imp(Formula::boxed(ev.clone(), phi.clone()), Formula::boxed(ev.clone(), psi.clone())),
    )
}

/// From `|- phi -> psi` infer `|- [a]^k phi -> [a]^k psi`.
pub fn iter_box_mono(ev: &EventSym, k: usize, prem: &Judgment) -> Result<Judgment> {
    (0..k).try_fold(prem.clone(), |acc, _| box_mono(ev, &acc))
}

/// From `|- phi -> psi` infer `|- E_G phi -> E_G psi`.
pub fn e_mono(g: &Group, prem: &Judgment) -> Result<Judgment> {
    let (phi, psi) = split_imp("E-mono", prem)?;
    let fwd = logic_axiom(RuleKind::DefEFwd(g.clone(), phi.clone()))?;
    let parts = g
        .members()
        .iter()
        .map(|&i| k_mono(i, prem))
        .collect::<Result<Vec<_>>>()?;
    let mid = conj_map(&parts)?;
    let bwd = logic_axiom(RuleKind::DefEBwd(g.clone(), psi.clone()))?;
    cut(&cut(&fwd, &mid)?, &bwd)
}

/// Builds `|- M phi & M psi -> M (phi & psi)` for a normal modality `M`
/// given its necessitation and distribution axiom.
fn normal_and_dist(
    phi: &Formula,
    psi: &Formula,
    modal: impl Fn(Formula) -> Formula,
    nec: impl Fn(&Judgment) -> Result<Judgment>,
    dist: impl Fn(Formula, Formula) -> Result<Judgment>,
) -> Result<Judgment> {
    let both = Formula::and(phi.clone(), psi.clone());
    let pair = classical(&Formula::imp_chain([phi.clone(), psi.clone()], both.clone()))?;
    let boxed_pair = nec(&pair)?;
    let first = dist(phi.clone(), Formula::imp(psi.clone(), both.clone()))?;
    let second = dist(psi.clone(), both.clone())?;
    by_tautology(
        &[&boxed_pair, &first, &second],
        Formula::imp(Formula::and(modal(phi.clone()), modal(psi.clone())), modal(both)),
    )
}

/// `|- K_i phi & K_i psi -> K_i (phi & psi)`
pub fn k_and_dist(i: Agent, phi: &Formula, psi: &Formula) -> Result<Judgment> {
    normal_and_dist(
        phi,
        psi,
        |f| Formula::k(i, f),
        |j| gen_k(i, j),
        |a, b| logic_axiom(RuleKind::KK(i, a, b)),
    )
}

/// `|- [a] phi & [a] psi -> [a] (phi & psi)`
pub fn box_and_dist(ev: &EventSym, phi: &Formula, psi: &Formula) -> Result<Judgment> {
    normal_and_dist(
        phi,
        psi,
        |f| Formula::boxed(ev.clone(), f),
        |j| gen_box(ev, j),
        |a, b| logic_axiom(RuleKind::KBox(ev.clone(), a, b)),
    )
}

/// `|- [a]^k phi & [a]^k psi -> [a]^k (phi & psi)`
pub fn iter_box_and_dist(ev: &EventSym, k: usize, phi: &Formula, psi: &Formula) -> Result<Judgment> {
    if k == 0 {
        return identity(&Formula::and(phi.clone(), psi.clone()));
    }
    let boxed = |f: &Formula| Formula::boxed(ev.clone(), f.clone());
    let inner = iter_box_and_dist(ev, k - 1, &boxed(phi), &boxed(psi))?;
    let lift = iter_box_mono(ev, k - 1, &box_and_dist(ev, phi, psi)?)?;
    cut(&inner, &lift)
}

/// `|- E_G phi -> K_i phi` for `i` in `G`.
pub fn e_to_k(g: &Group, i: Agent, phi: &Formula) -> Result<Judgment> {
    if !g.contains(i) {
        return Err(bad("E-to-K", format!("agent {i} is not in {g}")));
    }
    let fwd = logic_axiom(RuleKind::DefEFwd(g.clone(), phi.clone()))?;
    by_tautology(&[&fwd], Formula::imp(Formula::e(g.clone(), phi.clone()), Formula::k(i, phi.clone())))
}

/// `|- E_G phi & E_G psi -> E_G (phi & psi)`
pub fn e_and_dist(g: &Group, phi: &Formula, psi: &Formula) -> Result<Judgment> {
    let both = Formula::and(phi.clone(), psi.clone());
    let lhs = Formula::and(Formula::e(g.clone(), phi.clone()), Formula::e(g.clone(), psi.clone()));
    let per_agent = g
        .members()
        .iter()
        .map(|&i| {
            let a = e_to_k(g, i, phi)?;
            let b = e_to_k(g, i, psi)?;
            let d = k_and_dist(i, phi, psi)?;
            by_tautology(&[&a, &b, &d], Formula::imp(lhs.clone(), Formula::k(i, both.clone())))
        })
        .collect::<Result<Vec<_>>>()?;
    let (last, init) = per_agent.split_last().expect("groups are nonempty");
    let conj = init.iter().rev().try_fold(last.clone(), |acc, p| and_intro_imp(p, &acc))?;
    let bwd = logic_axiom(RuleKind::DefEBwd(g.clone(), both))?;
    cut(&conj, &bwd)
}

/// `|- E_G phi -> phi`
pub fn t_e(g: &Group, phi: &Formula) -> Result<Judgment> {
    let first = g.members()[0];
    let proj = e_to_k(g, first, phi)?;
    let t = logic_axiom(RuleKind::TK(first, phi.clone()))?;
    cut(&proj, &t)
}

/// `|- E_G [a] phi -> [a] E_G phi`, from KT1 for each member.
pub fn e_kt1(g: &Group, ev: &EventSym, phi: &Formula) -> Result<Judgment> {
    let boxed_phi = Formula::boxed(ev.clone(), phi.clone());
    let fwd = logic_axiom(RuleKind::DefEFwd(g.clone(), boxed_phi))?;
    let commuted = g
        .members()
        .iter()
        .map(|&i| logic_axiom(RuleKind::KT1(i, ev.clone(), phi.clone())))
        .collect::<Result<Vec<_>>>()?;
    let mid = conj_map(&commuted)?;
    let ks: Vec<Formula> = g.members().iter().map(|&i| Formula::k(i, phi.clone())).collect();
    let gather = box_conj_dist(ev, &ks)?;
    let fold = box_mono(ev, &logic_axiom(RuleKind::DefEBwd(g.clone(), phi.clone()))?)?;
    debug_assert_eq!(Formula::conj(ks), def_e_expansion(g, phi));
    cut(&cut(&cut(&fwd, &mid)?, &gather)?, &fold)
}

/// From `|- phi -> [a] phi` infer `|- E_G phi -> [a] E_G phi`.
pub fn e_pers(g: &Group, ev: &EventSym, prem: &Judgment) -> Result<Judgment> {
    let (phi, _) = split_imp("EPers", prem)?;
    let lifted = e_mono(g, prem)?;
    cut(&lifted, &e_kt1(g, ev, phi)?)
}

/// `|- C_G p -> E_G^n p`, by induction on `n` with the usual step names.
pub fn c_unfold(g: &Group, n: usize, p: &Formula) -> Result<Judgment> {
    let fix = logic_axiom(RuleKind::FixPointC(g.clone(), p.clone()))?.labeled("FixPoint_C");
    let mut acc = and_elim_left(&fix)?.labeled("∧ Elim");
    for _ in 0..n {
        let step = and_elim_right(&fix)?.labeled("∧ Elim");
        let lifted = e_mono(g, &acc)?.labeled("E Dist");
        acc = cut(&step, &lifted)?.labeled("Cut");
    }
    debug_assert_eq!(
        acc.formula(),
        &Formula::imp(Formula::c(g.clone(), p.clone()), iter_e(g, n, p.clone()))
    );
    Ok(acc)
}

/// From `|- a -> b` infer `|- (h -> a) -> (h -> b)`.
pub fn imp_mono_right(h: &Formula, prem: &Judgment) -> Result<Judgment> {
    let (a, b) = split_imp("Imp-mono", prem)?;
    by_tautology(
        &[prem],
        Formula::imp(Formula::imp(h.clone(), a.clone()), Formula::imp(h.clone(), b.clone())),
    )
}

/// From `|- h -> [a]^k x` and `|- x -> y` infer `|- h -> [a]^k y`.
pub fn under_boxes(ev: &EventSym, k: usize, acc: &Judgment, step: &Judgment) -> Result<Judgment> {
    cut(acc, &iter_box_mono(ev, k, step)?)
}

/// `|- x -> [a]^k x` from `|- x -> [a] x`.
pub fn iter_persist(ev: &EventSym, k: usize, once: &Judgment) -> Result<Judgment> {
    let (x, _) = split_imp("Persist", once)?;
    let mut acc = identity(x)?;
    for step in 0..k {
        acc = cut(&acc, &iter_box_mono(ev, step, once)?)?;
    }
    debug_assert_eq!(acc.formula(), &Formula::imp(x.clone(), iter_box(ev, k, x.clone())));
    Ok(acc)
}
