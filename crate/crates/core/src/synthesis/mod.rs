//! Synthesis of guard-based supervisors `(Σ φ_c -> c!.1 + ψ -> 1)*`.
//!
//! The all-enabled plant ξ(p) is explored once. Bad states (requirement
//! violations, uncontrollable paths into them, and states that cannot reach
//! a marked state within the good region) are computed as a fixpoint; the
//! remaining controllable choices are turned into guards over the variable
//! valuation of each state.

mod guards;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write;

use serde_json::json;
use thiserror::Error;

pub use guards::{minimize, valuation_formula};

use crate::control::{
    check_controllability, check_nonblocking, explore_renamed, explore_supervised,
    satisfies_globally, CheckError, ControllabilityReport, NonblockingReport, Requirement,
    RequirementReport,
};
use crate::parser::{show_bool, SystemSpec};
use crate::relations::{partial_bisim, ActionFilter, RelationResult};
use crate::state_space::{ExploreOptions, StateSpace};
use crate::terms::{eval_bool, Action, BoolExpr, ChannelId, Declarations, Term, TermRef, Value};

/// Guards of the canonical supervisor: one per controllable channel plus the
/// termination guard ψ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupervisorSpec {
    pub guards: BTreeMap<ChannelId, BoolExpr>,
    pub termination_guard: BoolExpr,
}

impl SupervisorSpec {
    /// Every controllable channel guarded by `true`.
    pub fn permissive(decls: &Declarations) -> Self {
        SupervisorSpec {
            guards: decls.controllable_channels().map(|c| (c, BoolExpr::True)).collect(),
            termination_guard: BoolExpr::True,
        }
    }

    pub fn guard(&self, c: ChannelId) -> &BoolExpr {
        &self.guards[&c]
    }
}

/// Why a state of the plant was declared bad.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BadReason {
    Violates(String),
    Uncontrollable { action: Action, target: usize },
    Blocking,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthesisError {
    #[error("no supervisor exists: {explanation}")]
    NoSupervisor { explanation: String },
    #[error(
        "plant is not observer-complete for `{channel}`: states #{allowed} and #{forbidden} share \
         the valuation [{valuation}] but only the first may enable it"
    )]
    NotObserverComplete { channel: String, allowed: usize, forbidden: usize, valuation: String },
    #[error(transparent)]
    Check(#[from] CheckError),
}

/// Result of [`synthesize`], with the intermediate data that justifies it.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub supervisor: SupervisorSpec,
    /// Explored ξ(p).
    pub plant: StateSpace,
    pub bad: Vec<bool>,
    pub reasons: Vec<Option<BadReason>>,
    /// Controllable channels the supervisor enables, per good state.
    pub allowed: Vec<BTreeSet<ChannelId>>,
    /// States of ξ(p) reachable under supervision.
    pub supervised_reachable: Vec<bool>,
    /// Supervised-reachable states and plant-enabled controllable channels
    /// that the supervisor disables.
    pub disabled: Vec<(usize, ChannelId)>,
    pub iterations: usize,
}

impl Synthesis {
    pub fn bad_count(&self) -> usize {
        self.bad.iter().filter(|b| **b).count()
    }

    /// Whether the supervisor lets `c` happen at plant state `s`.
    pub fn is_allowed(&self, s: usize, c: ChannelId) -> bool {
        self.allowed[s].contains(&c)
    }

    /// The supervised behaviour as a sub-space of ξ(p), optionally with one
    /// more (state, channel) pair enabled. Returns the sub-space and the
    /// index in ξ(p) of each of its states.
    pub fn supervised_subspace(&self, extra: Option<(usize, ChannelId)>) -> (StateSpace, Vec<usize>) {
        let d = &self.plant.decls;
        self.plant.restrict_indexed(|t| {
            let c = t.action.channel;
            !d.is_controllable(c) || self.is_allowed(t.src, c) || extra == Some((t.src, c))
        })
    }
}

fn channels_enabled(ss: &StateSpace, s: usize) -> BTreeSet<ChannelId> {
    ss.outgoing(s).map(|t| t.action.channel).collect()
}

/// Computes the maximally permissive supervisor for the plant and
/// requirements of `spec`.
pub fn synthesize(spec: &SystemSpec, opts: ExploreOptions) -> Result<Synthesis, SynthesisError> {
    let e = explore_renamed(spec, opts)?;
    let d = &*spec.decls;
    let n = e.len();

    let mut reasons: Vec<Option<BadReason>> = vec![None; n];
    let mut forbidden: Vec<BTreeSet<ChannelId>> = vec![BTreeSet::new(); n];
    for s in 0..n {
        let alpha = e.alpha(s);
        let holds = |phi: &BoolExpr| eval_bool(alpha, phi).unwrap_or(false);
        for r in &spec.requirements {
            match &r.requirement {
                Requirement::Invariant(phi) => {
                    if !holds(phi) && reasons[s].is_none() {
                        reasons[s] = Some(BadReason::Violates(r.name.clone()));
                    }
                }
                req => {
                    let (phi, a) = req.as_exclusion().expect("event requirement");
                    if holds(&phi) && e.enables(s, &a) {
                        if d.is_controllable(a.channel) {
                            forbidden[s].insert(a.channel);
                        } else if reasons[s].is_none() {
                            reasons[s] = Some(BadReason::Violates(r.name.clone()));
                        }
                    }
                }
            }
        }
    }

    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, t) in e.transitions.iter().enumerate() {
        preds[t.dst].push(i);
    }

    let mut iterations = 0;
    let mut allowed: Vec<BTreeSet<ChannelId>>;
    loop {
        iterations += 1;
        // Uncontrollable backward closure.
        let mut work: Vec<usize> = (0..n).filter(|&s| reasons[s].is_some()).collect();
        while let Some(s) = work.pop() {
            for &ti in &preds[s] {
                let t = e.transitions[ti];
                if !d.is_controllable(t.action.channel) && reasons[t.src].is_none() {
                    reasons[t.src] = Some(BadReason::Uncontrollable { action: t.action, target: s });
                    work.push(t.src);
                }
            }
        }
        allowed = (0..n)
            .map(|s| {
                if reasons[s].is_some() {
                    return BTreeSet::new();
                }
                channels_enabled(&e, s)
                    .into_iter()
                    .filter(|c| d.is_controllable(*c) && !forbidden[s].contains(c))
                    .filter(|c| {
                        e.outgoing(s)
                            .filter(|t| t.action.channel == *c)
                            .all(|t| reasons[t.dst].is_none())
                    })
                    .collect()
            })
            .collect();
        // Coreachability inside the good region.
        let mut co: Vec<bool> = (0..n).map(|s| reasons[s].is_none() && e.marked[s]).collect();
        let mut work: Vec<usize> = (0..n).filter(|&s| co[s]).collect();
        while let Some(s) = work.pop() {
            for &ti in &preds[s] {
                let t = e.transitions[ti];
                let usable = !d.is_controllable(t.action.channel) || allowed[t.src].contains(&t.action.channel);
                if usable && !co[t.src] && reasons[t.src].is_none() {
                    co[t.src] = true;
                    work.push(t.src);
                }
            }
        }
        let mut changed = false;
        for s in 0..n {
            if reasons[s].is_none() && !co[s] {
                reasons[s] = Some(BadReason::Blocking);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let bad: Vec<bool> = reasons.iter().map(|r| r.is_some()).collect();
    if bad[0] {
        return Err(SynthesisError::NoSupervisor { explanation: explain_bad(&e, &reasons, 0) });
    }

    let mut reach = vec![false; n];
    reach[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        for t in e.outgoing(s) {
            let c = t.action.channel;
            if (!d.is_controllable(c) || allowed[s].contains(&c)) && !reach[t.dst] {
                reach[t.dst] = true;
                queue.push_back(t.dst);
            }
        }
    }

    let mut guards = BTreeMap::new();
    let mut disabled = Vec::new();
    for c in d.controllable_channels() {
        let mut yes: BTreeMap<Vec<Value>, usize> = BTreeMap::new();
        let mut no: BTreeMap<Vec<Value>, usize> = BTreeMap::new();
        for s in (0..n).filter(|&s| reach[s]) {
            if !e.outgoing(s).any(|t| t.action.channel == c) {
                continue;
            }
            if allowed[s].contains(&c) {
                yes.entry(e.alpha(s).to_vec()).or_insert(s);
            } else {
                no.entry(e.alpha(s).to_vec()).or_insert(s);
                disabled.push((s, c));
            }
        }
        if let Some((alpha, &f)) = no.iter().find(|(a, _)| yes.contains_key(*a)) {
            return Err(SynthesisError::NotObserverComplete {
                channel: d.channel(c).name.clone(),
                allowed: yes[alpha],
                forbidden: f,
                valuation: d.show_valuation(alpha),
            });
        }
        let yes: BTreeSet<Vec<Value>> = yes.into_keys().collect();
        let no: BTreeSet<Vec<Value>> = no.into_keys().collect();
        guards.insert(c, minimize(&yes, &no, d));
    }
    disabled.sort();

    Ok(Synthesis {
        supervisor: SupervisorSpec { guards, termination_guard: BoolExpr::True },
        plant: e,
        bad,
        reasons,
        allowed,
        supervised_reachable: reach,
        disabled,
        iterations,
    })
}

fn explain_bad(e: &StateSpace, reasons: &[Option<BadReason>], start: usize) -> String {
    let d = &e.decls;
    let mut path = Vec::new();
    let mut s = start;
    let mut seen = BTreeSet::new();
    loop {
        if !seen.insert(s) {
            break;
        }
        match &reasons[s] {
            Some(BadReason::Uncontrollable { action, target }) => {
                path.push(action.show(d));
                s = *target;
            }
            Some(BadReason::Violates(name)) => {
                let prefix = if path.is_empty() {
                    "the initial state".to_string()
                } else {
                    format!("uncontrollable sequence {}", path.join(" . "))
                };
                return format!("{prefix} leads to [{}], violating {name}", d.show_valuation(e.alpha(s)));
            }
            Some(BadReason::Blocking) | None => break,
        }
    }
    let prefix = if path.is_empty() {
        "the initial state".to_string()
    } else {
        format!("uncontrollable sequence {}", path.join(" . "))
    };
    format!(
        "{prefix} leads to [{}], from which no marked state can be reached safely",
        d.show_valuation(e.alpha(s))
    )
}

/// `(Σ_c φ_c -> c!.1 + ψ -> 1)*`, channels in declaration order.
pub fn emit_supervisor(sup: &SupervisorSpec) -> TermRef {
    let summands = sup
        .guards
        .iter()
        .map(|(c, phi)| Term::guard(phi.clone(), Term::act(Action::send(*c), Term::skip())))
        .chain([Term::guard(sup.termination_guard.clone(), Term::skip())]);
    Term::star(Term::alt_all(summands))
}

/// The plant with each controllable prefix `c?_n[f].P` replaced by
/// `φ_c -> c?_n[f].P`, so that the plant itself behaves as supervised.
pub fn restrict_plant(t: &TermRef, sup: &SupervisorSpec, decls: &Declarations) -> TermRef {
    let go = |p: &TermRef| restrict_plant(p, sup, decls);
    match &**t {
        Term::Deadlock | Term::Skip => t.clone(),
        Term::Prefix(a, f, p) => {
            let inner = Term::prefix(*a, f.clone(), go(p));
            match sup.guards.get(&a.channel) {
                Some(phi) if decls.is_controllable(a.channel) => Term::guard(phi.clone(), inner),
                _ => inner,
            }
        }
        Term::Guard(phi, p) => Term::guard(phi.clone(), go(p)),
        Term::Encap(h, p) => Term::encap(h.clone(), go(p)),
        Term::Alt(p, q) => Term::alt(go(p), go(q)),
        Term::Seq(p, q) => Term::seq(go(p), go(q)),
        Term::Par(p, q) => Term::par(go(p), go(q)),
        Term::Star(p) => Term::star(go(p)),
    }
}

#[derive(Debug, Clone)]
pub struct Verification {
    pub supervised: StateSpace,
    pub requirements: RequirementReport,
    pub controllability: ControllabilityReport,
    pub nonblocking: NonblockingReport,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.requirements.holds && self.controllability.holds() && self.nonblocking.holds
    }

    pub fn render(&self) -> String {
        format!(
            "{}{}{}",
            self.requirements.render(&self.supervised),
            self.controllability.render(),
            self.nonblocking.render(&self.supervised)
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "passed": self.passed(),
            "requirements": self.requirements.to_json(&self.supervised),
            "controllability": self.controllability.to_json(),
            "nonblocking": self.nonblocking.to_json(&self.supervised),
        })
    }
}

/// Requirements, controllability and nonblocking of `spec` with its declared
/// supervisor. `encapsulated` selects ∂_H(p || s) over p || s for the
/// requirement and nonblocking checks.
pub fn verify(spec: &SystemSpec, encapsulated: bool, opts: ExploreOptions) -> Result<Verification, CheckError> {
    let controllability = check_controllability(spec, opts)?;
    let supervised = if encapsulated {
        controllability.supervised.clone()
    } else {
        explore_supervised(spec, false, opts)?
    };
    let requirements = satisfies_globally(&supervised, &spec.requirements);
    let nonblocking = check_nonblocking(&supervised);
    Ok(Verification { supervised, requirements, controllability, nonblocking })
}

/// Runs [`verify`] with the canonical supervisor built from `sup`.
pub fn verify_synthesis(
    spec: &SystemSpec,
    sup: &SupervisorSpec,
    encapsulated: bool,
    opts: ExploreOptions,
) -> Result<Verification, CheckError> {
    verify(&spec.with_supervisor("Supervisor", emit_supervisor(sup)), encapsulated, opts)
}

/// The three checks on the supervised sub-space of ξ(p) with one extra
/// (state, channel) pair enabled: requirements, controllability against
/// ξ(p), nonblocking. Returns which of them still pass.
pub fn check_extra_pair(
    syn: &Synthesis,
    spec: &SystemSpec,
    pair: (usize, ChannelId),
) -> (bool, bool, bool) {
    let (sub, _) = syn.supervised_subspace(Some(pair));
    let req = satisfies_globally(&sub, &spec.requirements).holds;
    let ctrl: RelationResult = partial_bisim(&sub, &syn.plant, &ActionFilter::Uncontrollable);
    let nb = check_nonblocking(&sub).holds;
    (req, ctrl.holds, nb)
}

pub fn report_text(syn: &Synthesis, decls: &Declarations) -> String {
    let mut s = String::new();
    for (c, phi) in &syn.supervisor.guards {
        let _ = writeln!(s, "guard {}: {}", decls.channel(*c).name, show_bool(phi, decls));
    }
    let _ = writeln!(s, "termination guard: {}", show_bool(&syn.supervisor.termination_guard, decls));
    let _ = writeln!(
        s,
        "plant states: {}, bad: {}, supervised: {}, iterations: {}",
        syn.plant.len(),
        syn.bad_count(),
        syn.supervised_reachable.iter().filter(|r| **r).count(),
        syn.iterations
    );
    s
}

pub fn report_json(syn: &Synthesis, decls: &Declarations) -> serde_json::Value {
    let guards: serde_json::Map<String, serde_json::Value> = syn
        .supervisor
        .guards
        .iter()
        .map(|(c, phi)| (decls.channel(*c).name.clone(), show_bool(phi, decls).into()))
        .collect();
    json!({
        "guards": guards,
        "termination_guard": show_bool(&syn.supervisor.termination_guard, decls),
        "plant_states": syn.plant.len(),
        "bad_states": syn.bad_count(),
        "supervised_states": syn.supervised_reachable.iter().filter(|r| **r).count(),
        "iterations": syn.iterations,
    })
}
