//! Semantic laws checked on one random instance per seed. Each returns a
//! description of the failure, if any.

use rand::Rng;

use cpd::relations::{partial_bisim, ActionFilter};
use cpd::sos::{xi_rename, Semantics};
use cpd::state_space::StateSpace;
use cpd::terms::{
    classify_plant, eval_bool, Action, ActionPattern, BoolExpr, ChannelId, DataExpr, Environment,
    Term, Update, VarId,
};

use super::*;

pub type PropResult = Result<(), String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> PropResult {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn bisimilar(l: &StateSpace, r: &StateSpace) -> bool {
    partial_bisim(l, r, &ActionFilter::All).holds && partial_bisim(r, l, &ActionFilter::All).holds
}

fn show(t: &TermRef, d: &Declarations) -> String {
    cpd::parser::show_term(t, d)
}

/// `¬(φ ∧ ψ) = ¬φ ∨ ¬ψ` and `¬(φ ∨ ψ) = ¬φ ∧ ¬ψ` under every valuation.
pub fn de_morgan(seed: u64) -> PropResult {
    let mut rng = rng(seed);
    let d = small_decls();
    let f = random_bool(&mut rng, &d, 3);
    let g = random_bool(&mut rng, &d, 3);
    for alpha in all_valuations(&d) {
        let e = |phi: &BoolExpr| eval_bool(&alpha, phi).unwrap();
        let (nf, ng) = (BoolExpr::not(f.clone()), BoolExpr::not(g.clone()));
        check(
            e(&BoolExpr::not(BoolExpr::and(f.clone(), g.clone()))) == e(&BoolExpr::or(nf.clone(), ng.clone())),
            || format!("conjunction law fails at {alpha:?}"),
        )?;
        check(
            e(&BoolExpr::not(BoolExpr::or(f.clone(), g.clone()))) == e(&BoolExpr::and(nf, ng)),
            || format!("disjunction law fails at {alpha:?}"),
        )?;
    }
    Ok(())
}

/// `true -> p` behaves as `p`, `false -> p` as `0`, and `φ -> p` has the
/// steps and termination of `p` exactly where `φ` holds.
pub fn guard_neutrality(seed: u64) -> PropResult {
    let mut rng = rng(seed);
    let d = small_decls();
    let (p, ps) = small_space(&mut rng, &d, 60, TermShape::default());
    let t = space(&d, &Term::guard(BoolExpr::True, p.clone()));
    check(bisimilar(&t, &ps), || format!("true -> p differs from p for {}", show(&p, &d)))?;
    let f = space(&d, &Term::guard(BoolExpr::False, p.clone()));
    check(f.len() == 1 && f.transitions.is_empty() && !f.marked[0], || "false -> p is not 0".into())?;

    let phi = random_bool(&mut rng, &d, 2);
    let g = Term::guard(phi.clone(), p.clone());
    let sem = Semantics::new(&d);
    for alpha in all_valuations(&d) {
        let env = Environment::new(alpha.clone(), vec![]);
        let on = eval_bool(&alpha, &phi).unwrap();
        let gs = sem.step(&g, &env).unwrap();
        let expect = if on { sem.step(&p, &env).unwrap() } else { vec![] };
        check(gs == expect, || format!("steps of guarded {} differ at {alpha:?}", show(&p, &d)))?;
        let term = sem.terminates(&g, &alpha).unwrap();
        check(term == (on && sem.terminates(&p, &alpha).unwrap()), || "termination of guard".into())?;
    }
    Ok(())
}

/// `∂_H(p)` has exactly the steps of `p` whose labels are outside H, and its
/// state space never shows a label of H.
pub fn encapsulation_exact(seed: u64) -> PropResult {
    let mut rng = rng(seed);
    let d = small_decls();
    let (p, _) = small_space(&mut rng, &d, 60, TermShape::default());
    let h = random_action_set(&mut rng, &d);
    let e = Term::encap(h.clone(), p.clone());
    let sem = Semantics::new(&d);
    for alpha in all_valuations(&d) {
        let env = Environment::new(alpha.clone(), vec![]);
        let mut got: Vec<(Action, TermRef, Vec<Value>)> =
            sem.step(&e, &env).unwrap().into_iter().map(|s| (s.action, s.term, s.env.alpha)).collect();
        let mut want: Vec<(Action, TermRef, Vec<Value>)> = sem
            .step(&p, &env)
            .unwrap()
            .into_iter()
            .filter(|s| !h.contains(&s.action))
            .map(|s| (s.action, Term::encap(h.clone(), s.term), s.env.alpha))
            .collect();
        got.sort();
        want.sort();
        check(got == want, || format!("encapsulated steps differ at {alpha:?} for {}", show(&p, &d)))?;
    }
    let ss = space(&d, &e);
    check(ss.transitions.iter().all(|t| !h.contains(&t.action)), || "blocked label reachable".into())
}

/// Two prefixes on one channel synchronize into the sum of their arities,
/// exactly when their updates agree on shared variables.
pub fn sync_arity(seed: u64) -> PropResult {
    let mut rng = rng(seed);
    let d = small_decls();
    let c = ChannelId(rng.gen_range(0..d.channels.len()) as u32);
    let c2 = if rng.gen_bool(0.8) { c } else { ChannelId(rng.gen_range(0..d.channels.len()) as u32) };
    let (m, n) = (rng.gen_range(0..3), rng.gen_range(0..3));
    let (k, l) = (rng.gen_range(0..3), rng.gen_range(0..3));
    let f = random_update(&mut rng, &d);
    let g = random_update(&mut rng, &d);
    let p = Term::prefix(Action::new(c, m, n), f.clone(), Term::skip());
    let q = Term::prefix(Action::new(c2, k, l), g.clone(), Term::skip());
    let steps = Semantics::new(&d).step(&Term::par(p, q), &Environment::initial(&d)).unwrap();
    let agree = f.assignments().iter().all(|(x, e)| {
        g.assignments().iter().all(|(y, e2)| x != y || e == e2)
    });
    let sync = Action::new(c, m + k, n + l);
    let expect_sync = c == c2 && agree;
    let syncs = steps.iter().filter(|s| matches!(&*s.term, Term::Par(a, b) if **a == Term::Skip && **b == Term::Skip)).count();
    check(syncs == usize::from(expect_sync), || format!("expected {} syncs, got {syncs}", usize::from(expect_sync)))?;
    if expect_sync {
        check(steps.iter().any(|s| s.action == sync), || format!("no step labelled {}", sync.show(&d)))?;
    }
    check(steps.len() == 2 + usize::from(expect_sync), || format!("{} steps", steps.len()))
}

/// `p || q` and `q || p` are bisimilar.
pub fn par_commutes(seed: u64) -> PropResult {
    let mut rng = rng(seed);
    let d = small_decls();
    let shape = TermShape { depth: 2, ..TermShape::default() };
    let (p, _) = small_space(&mut rng, &d, 12, shape);
    let (q, _) = small_space(&mut rng, &d, 12, shape);
    let a = space(&d, &Term::par(p.clone(), q.clone()));
    let b = space(&d, &Term::par(q.clone(), p.clone()));
    check(bisimilar(&a, &b), || format!("{} || {} not commutative", show(&p, &d), show(&q, &d)))
}

fn filters(d: &Declarations, extra: &[Action]) -> Vec<ActionFilter> {
    let _ = d;
    vec![
        ActionFilter::All,
        ActionFilter::Uncontrollable,
        ActionFilter::Controllable,
        ActionFilter::Nothing,
        ActionFilter::Only(extra.iter().copied().collect()),
    ]
}

pub fn reflexive(seed: u64) -> PropResult {
    let mut rng = rng(seed);
    let d = small_decls();
    let (p, ps) = small_space(&mut rng, &d, 40, TermShape::default());
    let extra: Vec<Action> = ps.transitions.iter().map(|t| t.action).take(2).collect();
    for b in filters(&d, &extra) {
        check(partial_bisim(&ps, &ps, &b).holds, || format!("{} not related to itself", show(&p, &d)))?;
    }
    Ok(())
}

/// A random term and a variant with one more non-terminating summand, which
/// it is often simulated by.
fn widen(rng: &mut ChaCha8Rng, d: &Declarations, p: &TermRef) -> TermRef {
    let shape = TermShape { depth: 1, ..TermShape::default() };
    Term::alt(p.clone(), Term::act(random_action(rng, d), random_term(rng, d, shape)))
}

/// `p ⪯ q` and `q ⪯ r` imply `p ⪯ r`. Returns whether the premise held.
pub fn transitive(seed: u64) -> Result<bool, String> {
    let mut rng = rng(seed);
    let d = small_decls();
    let shape = TermShape { depth: 2, ..TermShape::default() };
    let (p, ps) = small_space(&mut rng, &d, 20, shape);
    let q = widen(&mut rng, &d, &p);
    let r = if rng.gen_bool(0.5) { widen(&mut rng, &d, &q) } else { random_term(&mut rng, &d, shape) };
    let (Some(qs), Some(rs)) = (space_within(&d, &q, 200), space_within(&d, &r, 200)) else {
        return Ok(false);
    };
    let mut premise = false;
    for b in filters(&d, &[]) {
        if partial_bisim(&ps, &qs, &b).holds && partial_bisim(&qs, &rs, &b).holds {
            premise = true;
            check(partial_bisim(&ps, &rs, &b).holds, || {
                format!("not transitive: {} / {} / {}", show(&p, &d), show(&q, &d), show(&r, &d))
            })?;
        }
    }
    Ok(premise)
}

/// Shrinking B preserves the relation. Returns false when the second term
/// was too large to explore.
pub fn b_monotone(seed: u64) -> Result<bool, String> {
    let mut rng = rng(seed);
    let d = small_decls();
    let (p, ps) = small_space(&mut rng, &d, 30, TermShape::default());
    let q = if rng.gen_bool(0.5) { widen(&mut rng, &d, &p) } else { random_term(&mut rng, &d, TermShape::default()) };
    let Some(qs) = space_within(&d, &q, 200) else { return Ok(false) };
    let all: Vec<Action> = labels(&ps, &qs).into_iter().collect();
    let holds = |b: &ActionFilter| partial_bisim(&ps, &qs, b).holds;
    let subset: Vec<Action> = all.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    let smaller: Vec<Action> = subset.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    let chains = [
        (ActionFilter::All, ActionFilter::Uncontrollable),
        (ActionFilter::All, ActionFilter::Controllable),
        (ActionFilter::Uncontrollable, ActionFilter::Nothing),
        (ActionFilter::Controllable, ActionFilter::Nothing),
        (ActionFilter::All, ActionFilter::Only(subset.iter().copied().collect())),
        (ActionFilter::Only(subset.iter().copied().collect()), ActionFilter::Only(smaller.into_iter().collect())),
    ];
    for (big, small) in chains {
        check(!holds(&big) || holds(&small), || {
            format!("{big:?} holds but {small:?} fails for {} and {}", show(&p, &d), show(&q, &d))
        })?;
    }
    Ok(true)
}

/// A random plant term: controllable channels only receive, and
/// encapsulation never names a controllable channel by arity.
pub fn random_plant_term(rng: &mut ChaCha8Rng, d: &Arc<Declarations>, max: usize) -> (TermRef, StateSpace) {
    loop {
        let (t, ss) = small_space(rng, d, max, TermShape::default());
        let mut ok = classify_plant(&t, d);
        fn no_controllable_pattern(t: &Term, d: &Declarations) -> bool {
            match t {
                Term::Encap(h, p) => {
                    h.patterns().iter().all(|pat| match pat {
                        ActionPattern::Incomplete { channel, .. } => !d.is_controllable(*channel),
                        ActionPattern::Exact(a) => !d.is_controllable(a.channel) || a.senders == 0,
                    }) && no_controllable_pattern(p, d)
                }
                Term::Prefix(_, _, p) | Term::Guard(_, p) | Term::Star(p) => no_controllable_pattern(p, d),
                Term::Alt(p, q) | Term::Seq(p, q) | Term::Par(p, q) => {
                    no_controllable_pattern(p, d) && no_controllable_pattern(q, d)
                }
                Term::Deadlock | Term::Skip => true,
            }
        }
        ok &= no_controllable_pattern(&t, d);
        if ok {
            return (t, ss);
        }
    }
}

/// ξ(p) is bisimilar to p with every controllable `c?_n` label read as
/// `c!?_n`, whenever p never synchronizes two controllable receives.
/// Returns whether the instance qualified.
pub fn xi_agrees(seed: u64) -> Result<bool, String> {
    let mut rng = rng(seed);
    let d = small_decls();
    let (p, ps) = random_plant_term(&mut rng, &d, 40);
    let x = xi_rename(&p, &d).map_err(|e| e.to_string())?;
    let xs = space(&d, &x);
    let multi = |ss: &StateSpace, f: fn(&Action) -> bool| {
        ss.transitions.iter().any(|t| d.is_controllable(t.action.channel) && f(&t.action))
    };
    if multi(&ps, |a| a.receivers > 1) || multi(&xs, |a| a.senders > 1) {
        return Ok(false);
    }
    let relabelled = StateSpace::from_parts(
        d.clone(),
        ps.states.clone(),
        ps.marked.clone(),
        ps.transitions
            .iter()
            .map(|t| {
                let mut t = *t;
                if d.is_controllable(t.action.channel) && t.action.senders == 0 {
                    t.action = Action::new(t.action.channel, 1, t.action.receivers);
                }
                t
            })
            .collect(),
        0,
    );
    check(bisimilar(&relabelled, &xs), || format!("renaming disagrees on {}", show(&p, &d)))?;
    Ok(true)
}

/// A domain-safe counter update `x := x + 1` guarded by `x < hi`, used to
/// build spaces of a known size.
pub fn counter_loop(d: &Declarations, x: VarId, c: ChannelId) -> TermRef {
    let hi = *d.variable(x).domain.values().last().unwrap();
    let inc = Update::new([(x, DataExpr::Add(Box::new(DataExpr::var(x)), Box::new(DataExpr::lit(1))))]).unwrap();
    Term::star(Term::guard(BoolExpr::var_cmp(x, cpd::terms::CmpOp::Lt, hi), Term::prefix(Action::send(c), inc, Term::skip())))
}
