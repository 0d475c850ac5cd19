//! Random models and brute-force reference checkers shared by the test
//! targets.
#![allow(dead_code)]

pub mod props;

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use cpd::control::Requirement;
use cpd::synthesis::{check_extra_pair, Synthesis};
use cpd::state_space::{explore, Configuration, ExploreOptions, StateSpace};
use cpd::terms::{
    Action, ActionPattern, ActionSet, BoolExpr, ChannelClass, CmpOp, DataExpr, Declarations,
    Domain, Term, TermRef, Update, Value, VarId, VariableDecl,
};
use cpd::{parse, SystemSpec};

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Channels `a`, `b` (controllable) and `u`, `v` (uncontrollable); variables
/// `x : 0..2` and `y : 0..1`.
pub fn small_decls() -> Arc<Declarations> {
    let mut d = Declarations::new();
    for (name, class) in [
        ("a", ChannelClass::Controllable),
        ("b", ChannelClass::Controllable),
        ("u", ChannelClass::Uncontrollable),
        ("v", ChannelClass::Uncontrollable),
    ] {
        d.add_channel(name, class).unwrap();
    }
    for (name, hi) in [("x", 2), ("y", 1)] {
        d.add_variable(VariableDecl { name: name.into(), domain: Domain::Range { lo: 0, hi }, initial: 0 })
            .unwrap();
    }
    Arc::new(d)
}

pub fn all_valuations(d: &Declarations) -> Vec<Vec<Value>> {
    let mut out: Vec<Vec<Value>> = vec![vec![]];
    for v in &d.variables {
        out = out
            .into_iter()
            .flat_map(|p| {
                v.domain.values().into_iter().map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

fn random_var(rng: &mut ChaCha8Rng, d: &Declarations) -> (VarId, Vec<Value>) {
    let i = rng.gen_range(0..d.variables.len());
    (VarId(i as u32), d.variables[i].domain.values())
}

pub fn random_atom(rng: &mut ChaCha8Rng, d: &Declarations) -> BoolExpr {
    let (x, dom) = random_var(rng, d);
    let op = *[CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge].choose(rng).unwrap();
    let v = *dom.choose(rng).unwrap();
    if rng.gen_bool(0.2) {
        let (y, _) = random_var(rng, d);
        BoolExpr::cmp(op, DataExpr::Add(Box::new(DataExpr::var(x)), Box::new(DataExpr::lit(1))), DataExpr::var(y))
    } else {
        BoolExpr::var_cmp(x, op, v)
    }
}

pub fn random_bool(rng: &mut ChaCha8Rng, d: &Declarations, depth: u32) -> BoolExpr {
    if depth == 0 || rng.gen_bool(0.4) {
        return match rng.gen_range(0..10) {
            0 => BoolExpr::True,
            1 => BoolExpr::False,
            _ => random_atom(rng, d),
        };
    }
    let l = random_bool(rng, d, depth - 1);
    match rng.gen_range(0..4) {
        0 => BoolExpr::not(l),
        1 => BoolExpr::and(l, random_bool(rng, d, depth - 1)),
        2 => BoolExpr::or(l, random_bool(rng, d, depth - 1)),
        _ => BoolExpr::implies(l, random_bool(rng, d, depth - 1)),
    }
}

/// Assignments of in-domain literals to a random subset of the variables.
pub fn random_update(rng: &mut ChaCha8Rng, d: &Declarations) -> Update {
    let mut asg = Vec::new();
    for (i, v) in d.variables.iter().enumerate() {
        if rng.gen_bool(0.3) {
            asg.push((VarId(i as u32), DataExpr::lit(*v.domain.values().choose(rng).unwrap())));
        }
    }
    Update::new(asg).unwrap()
}

pub fn random_action(rng: &mut ChaCha8Rng, d: &Declarations) -> Action {
    let c = cpd::terms::ChannelId(rng.gen_range(0..d.channels.len()) as u32);
    let (m, n) = *[(1, 0), (0, 1), (1, 1), (1, 0)].choose(rng).unwrap();
    Action::new(c, m, n)
}

#[derive(Debug, Clone, Copy)]
pub struct TermShape {
    pub depth: u32,
    pub par: bool,
    pub encap: bool,
    pub data: bool,
}

impl Default for TermShape {
    fn default() -> Self {
        TermShape { depth: 3, par: true, encap: true, data: true }
    }
}

pub fn random_action_set(rng: &mut ChaCha8Rng, d: &Declarations) -> ActionSet {
    let n = rng.gen_range(1..=2);
    ActionSet::new((0..n).map(|_| {
        if rng.gen_bool(0.5) {
            ActionPattern::Exact(random_action(rng, d))
        } else {
            ActionPattern::Incomplete {
                channel: cpd::terms::ChannelId(rng.gen_range(0..d.channels.len()) as u32),
                parties: 2,
            }
        }
    }))
}

pub fn random_term(rng: &mut ChaCha8Rng, d: &Declarations, shape: TermShape) -> TermRef {
    if shape.depth == 0 {
        return match rng.gen_range(0..5) {
            0 => Term::deadlock(),
            1 | 2 => Term::skip(),
            _ => Term::act(random_action(rng, d), Term::skip()),
        };
    }
    let sub = TermShape { depth: shape.depth - 1, ..shape };
    let go = |rng: &mut ChaCha8Rng| random_term(rng, d, sub);
    match rng.gen_range(0..10) {
        0 | 1 => {
            let a = random_action(rng, d);
            let f = if shape.data { random_update(rng, d) } else { Update::empty() };
            Term::prefix(a, f, go(rng))
        }
        2 if shape.data => Term::guard(random_bool(rng, d, 1), go(rng)),
        2 | 3 => Term::alt(go(rng), go(rng)),
        4 => Term::seq(go(rng), go(rng)),
        5 => Term::star(go(rng)),
        6 if shape.par => Term::par(go(rng), go(rng)),
        7 if shape.encap => Term::encap(random_action_set(rng, d), go(rng)),
        _ => Term::alt(go(rng), Term::act(random_action(rng, d), go(rng))),
    }
}

/// Explores `t` from the initial environment, `None` above `max` states.
pub fn space_within(d: &Arc<Declarations>, t: &TermRef, max: usize) -> Option<StateSpace> {
    explore(d, Configuration::initial(t.clone(), d), ExploreOptions::with_budget(max)).ok()
}

pub fn space(d: &Arc<Declarations>, t: &TermRef) -> StateSpace {
    space_within(d, t, 100_000).expect("small model")
}

/// A random term whose state space has at most `max` states, and that space.
pub fn small_space(rng: &mut ChaCha8Rng, d: &Arc<Declarations>, max: usize, shape: TermShape) -> (TermRef, StateSpace) {
    loop {
        let t = random_term(rng, d, shape);
        if let Some(ss) = space_within(d, &t, max) {
            return (t, ss);
        }
    }
}

/// Every label occurring in either space.
pub fn labels(l: &StateSpace, r: &StateSpace) -> BTreeSet<Action> {
    l.transitions.iter().chain(&r.transitions).map(|t| t.action).collect()
}

/// Succeeding moves of `s` labelled `a`.
fn answers(ss: &StateSpace, s: usize, a: Action) -> Vec<usize> {
    ss.outgoing(s).filter(|t| t.action == a).map(|t| t.dst).collect()
}

/// Obligations of a related pair: for every required move, the pairs that
/// may answer it. `None` when the termination options differ.
fn obligations(l: &StateSpace, r: &StateSpace, (p, q): (usize, usize), in_b: &dyn Fn(&Action) -> bool) -> Option<Vec<Vec<(usize, usize)>>> {
    if l.marked[p] != r.marked[q] {
        return None;
    }
    let mut out = Vec::new();
    for t in l.outgoing(p) {
        out.push(answers(r, q, t.action).into_iter().map(|q2| (t.dst, q2)).collect());
    }
    for u in r.outgoing(q).filter(|u| in_b(&u.action)) {
        out.push(answers(l, p, u.action).into_iter().map(|p2| (p2, u.dst)).collect());
    }
    Some(out)
}

/// Searches exhaustively for a relation containing the initial pair that
/// meets the partial bisimulation conditions, by backtracking over the choice
/// of answer for each move.
pub fn search_relation(l: &StateSpace, r: &StateSpace, in_b: &dyn Fn(&Action) -> bool) -> bool {
    fn solve(
        l: &StateSpace,
        r: &StateSpace,
        in_b: &dyn Fn(&Action) -> bool,
        rel: &mut HashSet<(usize, usize)>,
        todo: &mut Vec<Vec<(usize, usize)>>,
        budget: &mut u64,
    ) -> bool {
        *budget = budget.checked_sub(1).expect("search exhausted its step budget");
        let Some(obl) = todo.pop() else { return true };
        if obl.iter().any(|p| rel.contains(p)) {
            let ok = solve(l, r, in_b, rel, todo, budget);
            todo.push(obl);
            return ok;
        }
        for &pair in &obl {
            let Some(more) = obligations(l, r, pair, in_b) else { continue };
            rel.insert(pair);
            let depth = todo.len();
            todo.extend(more);
            if solve(l, r, in_b, rel, todo, budget) {
                return true;
            }
            todo.truncate(depth);
            rel.remove(&pair);
        }
        todo.push(obl);
        false
    }
    let mut rel = HashSet::new();
    let mut todo = vec![vec![(0, 0)]];
    let mut budget = 50_000_000u64;
    solve(l, r, in_b, &mut rel, &mut todo, &mut budget)
}

/// The largest relation over all state pairs satisfying the conditions,
/// obtained by deleting offending pairs until none is left.
pub fn greatest_relation(l: &StateSpace, r: &StateSpace, in_b: &dyn Fn(&Action) -> bool) -> bool {
    let mut rel: HashSet<(usize, usize)> = HashSet::new();
    for p in 0..l.len() {
        for q in 0..r.len() {
            rel.insert((p, q));
        }
    }
    loop {
        let bad: Vec<(usize, usize)> = rel
            .iter()
            .copied()
            .filter(|&pair| match obligations(l, r, pair, in_b) {
                None => true,
                Some(obl) => obl.iter().any(|o| o.iter().all(|x| !rel.contains(x))),
            })
            .collect();
        if bad.is_empty() {
            return rel.contains(&(0, 0));
        }
        for b in bad {
            rel.remove(&b);
        }
    }
}

/// A generated plant together with the source it was parsed from.
pub struct PlantInstance {
    pub source: String,
    pub spec: SystemSpec,
}

const PLANT_VARS: [(&str, i64); 3] = [("x", 3), ("y", 2), ("z", 1)];
const PLANT_CHANNELS: [(&str, bool); 4] = [("c1", true), ("c2", true), ("u1", false), ("u2", false)];

fn literal_formula(rng: &mut ChaCha8Rng, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.5) {
        let (x, hi) = *PLANT_VARS.choose(rng).unwrap();
        let op = ["=", "!=", "<", ">="].choose(rng).unwrap();
        return format!("{x} {op} {}", rng.gen_range(0..=hi));
    }
    let l = literal_formula(rng, depth - 1);
    let r = literal_formula(rng, depth - 1);
    if rng.gen_bool(0.5) {
        format!("({l} && {r})")
    } else {
        format!("({l} || {r})")
    }
}

/// A random plant whose control state lives entirely in its variables: a
/// loop of guarded commands followed by a termination guard, with random
/// requirements.
pub fn random_plant(rng: &mut ChaCha8Rng) -> PlantInstance {
    let mut s = String::from("channel controllable c1, c2;\nchannel uncontrollable u1, u2;\n");
    for (x, hi) in PLANT_VARS {
        s += &format!("var {x} : 0..{hi} = 0;\n");
    }
    let n = rng.gen_range(3..=7);
    let mut cmds = Vec::new();
    for _ in 0..n {
        let (c, controllable) = *PLANT_CHANNELS.choose(rng).unwrap();
        let act = if controllable { format!("{c}?") } else { format!("{c}!") };
        let mut asg = Vec::new();
        for (x, hi) in PLANT_VARS {
            if rng.gen_bool(0.5) {
                asg.push(format!("{x} := {}", rng.gen_range(0..=hi)));
            }
        }
        if asg.is_empty() {
            let (x, hi) = *PLANT_VARS.choose(rng).unwrap();
            asg.push(format!("{x} := {}", rng.gen_range(0..=hi)));
        }
        let guard = if rng.gen_bool(0.7) { format!("{} -> ", literal_formula(rng, 1)) } else { String::new() };
        cmds.push(format!("{guard}{act}[{}].1", asg.join(", ")));
    }
    let marker = if rng.gen_bool(0.3) { "true".to_string() } else { literal_formula(rng, 1) };
    s += &format!("proc P = ({} + 1)* . ({marker} -> 1);\nplant P;\n", cmds.join(" + "));
    if rng.gen_bool(0.5) {
        s += &format!("requirement Inv: {};\n", literal_formula(rng, 1));
    }
    for k in 0..rng.gen_range(1..=3) {
        let (c, controllable) = *PLANT_CHANNELS.choose(rng).unwrap();
        let act = if controllable { format!("{c}!?") } else { format!("{c}!") };
        let phi = literal_formula(rng, 1);
        if rng.gen_bool(0.5) {
            s += &format!("requirement E{k}: {act} => {phi};\n");
        } else {
            s += &format!("requirement E{k}: {phi} => disabled {act};\n");
        }
    }
    let spec = parse(&s).unwrap_or_else(|e| panic!("generated plant does not parse: {e:?}\n{s}"));
    PlantInstance { source: s, spec }
}

/// Parses `text` as a formula over the declarations of `spec`.
pub fn formula(spec: &SystemSpec, text: &str) -> BoolExpr {
    let src = format!("{}\nrequirement Probe: {text};\n", cpd::print(spec));
    let parsed = parse(&src).unwrap_or_else(|e| panic!("{text}: {e:?}"));
    match &parsed.requirements.last().unwrap().requirement {
        Requirement::Invariant(phi) => phi.clone(),
        r => panic!("{text} is not a state formula: {r:?}"),
    }
}

/// Valuations of the ξ(p) states that stay reachable under supervision.
pub fn supervised_valuations(syn: &Synthesis) -> Vec<Vec<Value>> {
    let mut seen = BTreeSet::new();
    for (s, r) in syn.supervised_reachable.iter().enumerate() {
        if *r {
            seen.insert(syn.plant.alpha(s).to_vec());
        }
    }
    seen.into_iter().collect()
}

/// First valuation on which the two formulas differ.
pub fn disagreement(alphas: &[Vec<Value>], a: &BoolExpr, b: &BoolExpr) -> Option<Vec<Value>> {
    let eval = |alpha: &[Value], phi| cpd::terms::eval_bool(alpha, phi).expect("formula evaluates");
    alphas.iter().find(|alpha| eval(alpha, a) != eval(alpha, b)).cloned()
}

/// Every pair the supervisor disables must break one of the three checks
/// once enabled.
pub fn check_maximal(syn: &Synthesis, spec: &SystemSpec) -> Result<(), String> {
    for &(s, c) in &syn.disabled {
        if check_extra_pair(syn, spec, (s, c)) == (true, true, true) {
            return Err(format!(
                "enabling {} at state {s} [{}] breaks nothing",
                spec.decls.channel(c).name,
                spec.decls.show_valuation(syn.plant.alpha(s))
            ));
        }
    }
    Ok(())
}

/// Straightforward safe-and-nonblocking fixpoint over an explored ξ(p):
/// the states a maximally permissive supervisor can keep when it enables
/// controllable channels per state.
pub fn reference_good(ss: &StateSpace, spec: &SystemSpec) -> Vec<bool> {
    let d = &spec.decls;
    let eval = |s: usize, phi: &BoolExpr| cpd::terms::eval_bool(ss.alpha(s), phi).unwrap_or(false);
    // Event requirements that forbid `a` at `s`.
    let forbidden = |s: usize, a: &Action| {
        spec.requirements.iter().any(|r| match &r.requirement {
            Requirement::EventImplies { action, formula } => action == a && !eval(s, formula),
            Requirement::StateExcludesEvent { formula, action } => action == a && eval(s, formula),
            Requirement::Invariant(_) => false,
        })
    };
    let mut good: Vec<bool> = (0..ss.len())
        .map(|s| {
            spec.requirements.iter().all(|r| match &r.requirement {
                Requirement::Invariant(phi) => eval(s, phi),
                _ => true,
            })
        })
        .collect();
    loop {
        let mut changed = false;
        for s in 0..ss.len() {
            if good[s]
                && ss.outgoing(s).any(|t| {
                    !d.is_controllable(t.action.channel) && (!good[t.dst] || forbidden(s, &t.action))
                })
            {
                good[s] = false;
                changed = true;
            }
        }
        // A guard enables or disables all edges of a channel at once.
        let usable = |t: &cpd::state_space::Transition| {
            if !good[t.src] || !good[t.dst] {
                return false;
            }
            let c = t.action.channel;
            !d.is_controllable(c)
                || ss.outgoing(t.src).filter(|u| u.action.channel == c).all(|u| good[u.dst] && !forbidden(u.src, &u.action))
        };
        let mut reach: Vec<bool> = (0..ss.len()).map(|s| good[s] && ss.marked[s]).collect();
        let mut grew = true;
        while grew {
            grew = false;
            for t in &ss.transitions {
                if !reach[t.src] && reach[t.dst] && usable(t) {
                    reach[t.src] = true;
                    grew = true;
                }
            }
        }
        for s in 0..ss.len() {
            if good[s] && !reach[s] {
                good[s] = false;
                changed = true;
            }
        }
        if !changed {
            return good;
        }
    }
}
