//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

mod common;

use std::collections::HashMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{any_formula, placeholders, tautology_over};
use dynck_core::formula::def_e_expansion;
use dynck_core::kernel::{check_tree, classical, KernelError};
use dynck_core::muddy::{concl_statement, schema};
use dynck_core::script::render_script;
use dynck_core::semantics::{random_formula, EventSemantics};
use dynck_core::{
    iter_e, load_script, parse_formula, print_formula, save_script, validate_judgment_trace, validate_theory, Agent,
    EventSym, Formula, Group, KripkeModel, MuddyProver, Param, ProofScript, ProofTree, RuleKind, Scenario, TheorySpec,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn scenarios(max_children: u32) -> impl Iterator<Item = Scenario> {
    (0..max_children).flat_map(|c| (0..=c).map(move |m| Scenario::new(c, m).unwrap()))
}

fn theorem_sweep() -> Verdict {
    let start = Instant::now();
    let mut proofs = 0;
    for s in scenarios(7) {
        let p = MuddyProver::new(s);
        for i in s.agents() {
            let j = p.prove_concl(i).map_err(|e| format!("{s:?} agent {i}: {e}"))?;
            let checked = check_tree(j.proof(), p.theory()).map_err(|e| format!("{s:?} agent {i}: {e}"))?;
            ensure(checked.formula() == &concl_statement(&s, i), || format!("{s:?} agent {i}: wrong statement"))?;
            proofs += 1;
        }
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(60), || format!("{proofs} proofs took {took:.1?}"))?;
    Ok(format!("{proofs} proofs for 1 <= c+1 <= 7 in {took:.1?}"))
}

fn lemma_parity() -> Verdict {
    let p = MuddyProver::new(Scenario::new(5, 4).unwrap());
    let mut count = 0;
    let mut accept = |name: &str, j: Result<dynck_core::Judgment, dynck_core::muddy::MuddyError>| {
        let j = j.map_err(|e| format!("{name}: {e}"))?;
        let k = check_tree(j.proof(), p.theory()).map_err(|e| format!("{name}: {e}"))?;
        count += 1;
        ensure(k.formula() == j.formula(), || format!("{name}: statement changed"))
    };
    for j in 1..=5 {
        accept("GainConn", p.gain_conn(j))?;
    }
    for n in 1..=4 {
        for j in 1..=4 {
            accept("MultGainConn", p.mult_gain_conn(n, j))?;
        }
    }
    for n in 0..=5 {
        accept("ComImpPartIt", p.com_imp_part_it(n, &Formula::lambda(1)))?;
        accept("PointImpPartIt", p.point_imp_part_it(n))?;
        for j in 1..=n as u32 {
            accept("PointImpProgr", p.point_imp_progr(n, j))?;
        }
    }
    for s in scenarios(6) {
        let q = MuddyProver::new(s);
        let j = q.res_inter().map_err(|e| e.to_string())?;
        check_tree(j.proof(), q.theory()).map_err(|e| format!("ResInter_2 {s:?}: {e}"))?;
        count += 1;
    }
    Ok(format!("{count} lemma instances accepted"))
}

/// Rebuilds `root` with every occurrence of `target` (by address) replaced.
fn replace(root: &Arc<ProofTree>, target: *const ProofTree, with: &Arc<ProofTree>) -> Arc<ProofTree> {
    fn go(
        t: &Arc<ProofTree>,
        target: *const ProofTree,
        with: &Arc<ProofTree>,
        memo: &mut HashMap<*const ProofTree, Arc<ProofTree>>,
    ) -> Arc<ProofTree> {
        if Arc::as_ptr(t) == target {
            return with.clone();
        }
        if let Some(done) = memo.get(&Arc::as_ptr(t)) {
            return done.clone();
        }
        let premises: Vec<_> = t.premises.iter().map(|p| go(p, target, with, memo)).collect();
        let out = if premises.iter().zip(&t.premises).all(|(a, b)| Arc::ptr_eq(a, b)) {
            t.clone()
        } else {
            Arc::new(ProofTree { premises, ..(**t).clone() })
        };
        memo.insert(Arc::as_ptr(t), out.clone());
        out
    }
    go(root, target, with, &mut HashMap::new())
}

fn other_rule(rng: &mut StdRng, rule: &RuleKind, concl: &Formula) -> RuleKind {
    let f = concl.clone();
    let star = EventSym::star();
    let choices = [
        RuleKind::Classical(f.clone()),
        RuleKind::Mp,
        RuleKind::TK(Agent(1), f.clone()),
        RuleKind::TBox(star.clone(), f.clone()),
        RuleKind::KK(Agent(2), f.clone(), f.clone()),
        RuleKind::KBox(star.clone(), f.clone(), f.clone()),
        RuleKind::GenK(Agent(1)),
        RuleKind::GenBox(star.clone()),
        RuleKind::DefEFwd(Group::range(3), f.clone()),
        RuleKind::DefEBwd(Group::range(3), f.clone()),
        RuleKind::FixPointC(Group::range(3), f.clone()),
        RuleKind::KT1(Agent(1), star.clone(), f.clone()),
        RuleKind::TheoryAxiom(schema::ALL[rng.gen_range(0..schema::ALL.len())].into(), vec![Param::Nat(1)]),
    ];
    loop {
        let pick = choices.choose(rng).unwrap();
        if pick.name() != rule.name() {
            return pick.clone();
        }
    }
}

fn tweak_formula(rng: &mut StdRng, f: &Formula) -> Formula {
    match rng.gen_range(0..3) {
        0 => Formula::not(f.clone()),
        1 => Formula::and(f.clone(), Formula::mu(rng.gen_range(1..=3))),
        _ => random_formula(rng, 3, 2),
    }
}

fn tweak_params(rng: &mut StdRng, rule: &RuleKind) -> Option<RuleKind> {
    let agent = |a: Agent| Agent(a.0 % 3 + 1);
    Some(match rule.clone() {
        RuleKind::Classical(f) => RuleKind::Classical(tweak_formula(rng, &f)),
        RuleKind::KK(i, a, b) => match rng.gen_range(0..3) {
            0 => RuleKind::KK(agent(i), a, b),
            1 => RuleKind::KK(i, tweak_formula(rng, &a), b),
            _ => RuleKind::KK(i, a, tweak_formula(rng, &b)),
        },
        RuleKind::TK(i, a) => RuleKind::TK(agent(i), a),
        RuleKind::GenK(i) => RuleKind::GenK(agent(i)),
        RuleKind::DefEFwd(_, a) => RuleKind::DefEFwd(Group::range(rng.gen_range(1..=2)), a),
        RuleKind::DefEBwd(g, a) => RuleKind::DefEBwd(g, tweak_formula(rng, &a)),
        RuleKind::FixPointC(g, a) => RuleKind::FixPointC(g, tweak_formula(rng, &a)),
        RuleKind::GfpC(g, a, r) => RuleKind::GfpC(g, tweak_formula(rng, &a), r),
        RuleKind::KBox(e, a, b) => RuleKind::KBox(e, tweak_formula(rng, &a), b),
        RuleKind::TBox(e, a) => RuleKind::TBox(e, tweak_formula(rng, &a)),
        RuleKind::GenBox(_) => RuleKind::GenBox(EventSym::point()),
        RuleKind::KT1(i, e, a) => RuleKind::KT1(agent(i), e, a),
        RuleKind::TheoryAxiom(name, mut ps) => {
            if ps.is_empty() {
                ps.push(Param::Nat(rng.gen_range(0..4)));
            } else {
                let k = rng.gen_range(0..ps.len());
                ps[k] = match &ps[k] {
                    Param::Nat(j) => Param::Nat(j + 1),
                    Param::Agent(a) => Param::Agent(agent(*a)),
                    Param::Event(_) => Param::Event(EventSym::point()),
                    Param::Formula(f) => Param::Formula(tweak_formula(rng, f)),
                };
            }
            RuleKind::TheoryAxiom(name, ps)
        }
        RuleKind::Mp => return None,
    })
}

fn kernel_robustness() -> Verdict {
    let p = MuddyProver::new(Scenario::new(2, 1).unwrap());
    let j = p.prove_concl(Agent(1)).map_err(|e| e.to_string())?;
    let root = j.proof().clone();
    let mut nodes: Vec<Arc<ProofTree>> = Vec::new();
    {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![root.clone()];
        while let Some(t) = stack.pop() {
            if seen.insert(Arc::as_ptr(&t)) {
                stack.extend(t.premises.iter().cloned());
                nodes.push(t);
            }
        }
    }
    let mut rng = StdRng::seed_from_u64(3);
    let (mut total, mut changing, mut neutral) = (0, 0, 0);
    while total < 1000 {
        let node = nodes.choose(&mut rng).unwrap().clone();
        let mut mutated = (*node).clone();
        match rng.gen_range(0..3) {
            0 => mutated.rule = other_rule(&mut rng, &node.rule, &node.conclusion),
            1 => match tweak_params(&mut rng, &node.rule) {
                Some(r) => mutated.rule = r,
                None => continue,
            },
            _ => mutated.conclusion = tweak_formula(&mut rng, &node.conclusion),
        }
        if mutated == *node {
            continue;
        }
        total += 1;
        let mutated = Arc::new(mutated);
        let whole = check_tree(&replace(&root, Arc::as_ptr(&node), &mutated), p.theory());
        if check_tree(&mutated, p.theory()).is_err() {
            changing += 1;
            ensure(whole.is_err(), || format!("silent acceptance of {} at {}", mutated.rule, mutated.conclusion))?;
        } else {
            neutral += 1;
            let same = whole.map_err(|e| format!("locally valid mutation broke the tree: {e}"))?;
            ensure(same.formula() == j.formula(), || "root statement changed".into())?;
        }
    }
    Ok(format!("{total} mutations, {changing} rejected, {neutral} locally valid, 0 silent"))
}

fn semantic_endpoint() -> Verdict {
    let start = Instant::now();
    let mut runs = 0;
    for s in scenarios(5).filter(|s| s.children() >= 2) {
        let sem = EventSemantics::muddy(&s.group());
        let mut model = KripkeModel::full(&s)
            .and_then(|m| m.update(&EventSym::point(), &sem))
            .map_err(|e| e.to_string())?;
        let knows = |model: &KripkeModel, i: u32| {
            let w = model.actual().expect("actual world survives");
            model.eval(w, &Formula::k(Agent(i), Formula::mu(i)), &sem).unwrap()
        };
        for _ in 0..s.m() {
            model = model.update(&EventSym::star(), &sem).map_err(|e| e.to_string())?;
        }
        ensure((1..=s.muddy_count()).all(|i| knows(&model, i)), || format!("{s:?}: not known after m stars"))?;
        if s.m() >= 1 {
            let mut early = KripkeModel::full(&s).unwrap().update(&EventSym::point(), &sem).unwrap();
            for _ in 0..s.m() - 1 {
                early = early.update(&EventSym::star(), &sem).unwrap();
            }
            ensure((1..=s.muddy_count()).any(|i| !knows(&early, i)), || format!("{s:?}: known too early"))?;
        }
        runs += 1;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(1), || format!("took {took:.1?}"))?;
    Ok(format!("{runs} scenarios in {took:.1?}"))
}

fn line_by_line() -> Verdict {
    let mut nodes = 0;
    for (c, m) in [(1, 0), (2, 1), (3, 2)] {
        let s = Scenario::new(c, m).unwrap();
        for i in s.agents() {
            let j = MuddyProver::new(s).prove_concl(i).map_err(|e| e.to_string())?;
            ensure(j.proof().post_order().iter().all(|t| !matches!(t.rule, RuleKind::TBox(..))), || {
                format!("T_Box in proof for {s:?} agent {i}")
            })?;
            let r = validate_judgment_trace(&s, j.proof()).map_err(|e| e.to_string())?;
            ensure(r.passed, || format!("{s:?} agent {i}: {:?}", r.failures.first()))?;
            nodes += r.checked;
        }
    }
    Ok(format!("{nodes} stage checks, no T_Box"))
}

fn axiom_validation() -> Verdict {
    let mut checks = 0;
    for s in scenarios(5) {
        let r = validate_theory(&s).map_err(|e| e.to_string())?;
        ensure(r.passed, || format!("{s:?}: {:?}", r.failures.first()))?;
        checks += r.checked;
    }
    Ok(format!("{checks} checks over c+1 <= 5"))
}

fn agrees(f: &Formula, leaves: &[Formula]) -> bool {
    let expected = tautology_over(f, leaves);
    match classical(f) {
        Ok(j) => expected && j.formula() == f,
        Err(KernelError::NotTautology(_)) => !expected,
        Err(_) => false,
    }
}

/// Depth in boolean connectives, placeholders counting as leaves.
fn connective_depth(f: &Formula) -> usize {
    match f {
        Formula::Not(a) => 1 + connective_depth(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => 1 + connective_depth(a).max(connective_depth(b)),
        _ => 0,
    }
}

fn all_formulas(leaves: &[Formula], depth: usize) -> Vec<Formula> {
    let mut level = leaves.to_vec();
    for _ in 0..depth {
        let mut next = leaves.to_vec();
        next.extend(level.iter().map(|a| Formula::not(a.clone())));
        for a in &level {
            for b in &level {
                next.push(Formula::and(a.clone(), b.clone()));
                next.push(Formula::or(a.clone(), b.clone()));
                next.push(Formula::imp(a.clone(), b.clone()));
            }
        }
        level = next;
    }
    level
}

/// Representatives of every truth table over four placeholders that some
/// skeleton of depth at most `depth` computes.
fn table_classes(leaves: &[Formula], depth: usize) -> HashMap<u16, Formula> {
    let mut reps: HashMap<u16, Formula> = HashMap::new();
    for (k, l) in leaves.iter().enumerate() {
        let t = (0..16u16).filter(|v| v >> k & 1 == 1).fold(0u16, |t, v| t | 1 << v);
        reps.entry(t).or_insert_with(|| l.clone());
    }
    for _ in 0..depth {
        let level: Vec<(u16, Formula)> = reps.iter().map(|(t, f)| (*t, f.clone())).collect();
        for (t, f) in &level {
            reps.entry(!t).or_insert_with(|| Formula::not(f.clone()));
        }
        let mut seen: std::collections::HashSet<u16> = reps.keys().copied().collect();
        for (a, fa) in &level {
            for (b, fb) in &level {
                for (t, mk) in [
                    (a & b, Formula::and as fn(Formula, Formula) -> Formula),
                    (a | b, Formula::or),
                    (!a | b, Formula::imp),
                ] {
                    if seen.insert(t) {
                        reps.insert(t, mk(fa.clone(), fb.clone()));
                    }
                }
            }
        }
    }
    reps
}

fn classical_oracle() -> Verdict {
    let four = placeholders();
    let mut with_constants = four.clone();
    with_constants.extend([Formula::True, Formula::False]);
    let mut syntactic = 0;
    for f in all_formulas(&with_constants, 2) {
        ensure(agrees(&f, &four), || format!("disagree on {f}"))?;
        syntactic += 1;
    }
    for f in all_formulas(&four[..2], 3) {
        ensure(agrees(&f, &four[..2]), || format!("disagree on {f}"))?;
        syntactic += 1;
    }
    let classes = table_classes(&four, 4);
    for (t, f) in &classes {
        ensure(connective_depth(f) <= 4 && agrees(f, &four), || format!("disagree on class {t:#06x}: {f}"))?;
        // Pin the whole table, not just the verdict: each valuation cube.
        for v in 0..16u16 {
            let cube = Formula::conj(
                (0..4).map(|k| if v >> k & 1 == 1 { four[k].clone() } else { Formula::not(four[k].clone()) }).collect(),
            );
            let holds = classical(&Formula::imp(cube, f.clone())).is_ok();
            ensure(holds == (t >> v & 1 == 1), || format!("class {t:#06x} wrong at valuation {v}"))?;
        }
    }
    Ok(format!(
        "{syntactic} skeletons enumerated (depth <= 2 over 4 placeholders, depth <= 3 over 2); all {} truth tables \
         reachable at depth <= 4 pinned; literal depth-4 enumeration (~2e17) not run",
        classes.len()
    ))
}

fn independent_e(m: &KripkeModel, g: &Group, x: &[bool]) -> Vec<bool> {
    let present: Vec<bool> = (0..x.len() as u32).map(|w| m.worlds().any(|v| v.bits() == w)).collect();
    (0..x.len())
        .map(|w| {
            present[w]
                && (0..x.len()).filter(|&v| present[v]).all(|v| {
                    let sees = v == w || g.members().iter().any(|i| v == w ^ (1 << (i.0 - 1)));
                    !sees || x[v]
                })
        })
        .collect()
}

fn structural_oracles() -> Verdict {
    let mut rng = StdRng::seed_from_u64(8);
    for round in 0..100 {
        let n = rng.gen_range(1..=4);
        let worlds: Vec<u32> = (0..1u32 << n).filter(|_| rng.gen_bool(0.7)).collect();
        let model = KripkeModel::from_worlds(n, worlds, None).map_err(|e| e.to_string())?;
        let bits: u32 = rng.gen_range(1..1 << n);
        let g = Group::new((1..=n).filter(|i| bits >> (i - 1) & 1 == 1).map(Agent)).unwrap();
        let sem = EventSemantics::muddy(&Group::range(n));
        let phi = random_formula(&mut rng, n, 3);
        let ext = |f: &Formula| model.extension(f, &sem).map_err(|e| e.to_string());
        let x = ext(&phi)?;
        let e = ext(&Formula::e(g.clone(), phi.clone()))?;
        ensure(e == ext(&def_e_expansion(&g, &phi))?, || format!("round {round}: E differs from its definition"))?;
        ensure(e == independent_e(&model, &g, &x), || format!("round {round}: E differs from the relation"))?;
        let mut power = x.clone();
        let mut meet = vec![true; x.len()];
        for k in 1..=model.len().max(1) {
            power = independent_e(&model, &g, &power);
            meet.iter_mut().zip(&power).for_each(|(a, b)| *a &= b);
            ensure(power == ext(&iter_e(&g, k, phi.clone()))?, || format!("round {round}: E^{k} differs"))?;
        }
        let c = ext(&Formula::c(g.clone(), phi.clone()))?;
        let present: Vec<bool> = (0..x.len() as u32).map(|w| model.worlds().any(|v| v.bits() == w)).collect();
        meet.iter_mut().zip(&present).for_each(|(a, p)| *a &= p);
        ensure(c == meet, || format!("round {round}: C differs from the meet of E^n"))?;
    }
    Ok("100 models, up to 16 worlds, |G| <= 4".into())
}

fn round_trips() -> Verdict {
    let mut rng = StdRng::seed_from_u64(9);
    for _ in 0..10_000 {
        let depth = rng.gen_range(0..=6);
        let f = any_formula(&mut rng, depth);
        let text = print_formula(&f);
        ensure(parse_formula(&text).as_ref() == Ok(&f), || format!("round trip lost {text}"))?;
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut lemmas = 0;
    for s in scenarios(4) {
        let mut script = ProofScript::new(TheorySpec::Muddy(s));
        for (name, j) in MuddyProver::new(s).lemma_suite().map_err(|e| e.to_string())? {
            script.push(&name, j.proof().clone());
        }
        let path = dir.path().join("suite.proof");
        save_script(&script, &path).map_err(|e| e.to_string())?;
        let back = load_script(&path).map_err(|e| e.to_string())?;
        let before: Vec<_> = script.check().into_iter().map(|v| (v.name, v.result)).collect();
        let after: Vec<_> = back.check().into_iter().map(|v| (v.name, v.result)).collect();
        ensure(before == after, || format!("{s:?}: verdicts changed"))?;
        ensure(before.iter().all(|(_, r)| r.is_ok()), || format!("{s:?}: suite rejected"))?;
        ensure(render_script(&back).ok() == render_script(&script).ok(), || format!("{s:?}: text changed"))?;
        lemmas += before.len();
    }
    Ok(format!("10000 formulas, {lemmas} lemmas saved and reloaded"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("theorem reproduction", theorem_sweep),
        ("lemma suite parity", lemma_parity),
        ("kernel robustness", kernel_robustness),
        ("semantic endpoint", semantic_endpoint),
        ("line-by-line soundness", line_by_line),
        ("axiom validation", axiom_validation),
        ("classical vs truth tables", classical_oracle),
        ("structural oracles", structural_oracles),
        ("round trips", round_trips),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {} {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
