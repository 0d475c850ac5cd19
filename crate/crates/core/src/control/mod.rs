//! Data-based requirements, the supervised plant, controllability and
//! nonblocking checks.

mod requirement;

use serde_json::json;
use thiserror::Error;

pub use requirement::{NamedRequirement, Requirement};

use crate::parser::{show_bool, SystemSpec};
use crate::relations::{partial_bisim, ActionFilter, RelationResult};
use crate::sos::{xi_rename, ModelError, Semantics, XiError};
use crate::state_space::{explore, Configuration, ExploreError, ExploreOptions, StateSpace, Transition};
use crate::terms::{eval_bool, Declarations, Term, TermRef};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("the specification declares no supervisor")]
    MissingSupervisor,
    #[error(transparent)]
    Explore(#[from] ExploreError),
    #[error(transparent)]
    Renaming(#[from] XiError),
}

impl From<ModelError> for CheckError {
    fn from(e: ModelError) -> Self {
        CheckError::Explore(ExploreError::Model(e))
    }
}

impl Requirement {
    pub fn show(&self, d: &Declarations) -> String {
        match self {
            Requirement::EventImplies { action, formula } => {
                format!("{} => {}", action.show(d), show_bool(formula, d))
            }
            Requirement::StateExcludesEvent { formula, action } => {
                format!("({}) => disabled {}", show_bool(formula, d), action.show(d))
            }
            Requirement::Invariant(phi) => show_bool(phi, d),
        }
    }
}

/// `⟨t, σ⟩ ⊨ r`, deciding enabledness with the operational rules.
pub fn satisfies(
    decls: &Declarations,
    c: &Configuration,
    r: &Requirement,
) -> Result<bool, ModelError> {
    match r {
        Requirement::Invariant(phi) => Ok(eval_bool(&c.env.alpha, phi)?),
        _ => {
            let (phi, a) = r.as_exclusion().expect("event requirement");
            if !eval_bool(&c.env.alpha, &phi)? {
                return Ok(true);
            }
            let steps = Semantics::new(decls).step(&c.term, &c.env)?;
            Ok(steps.iter().all(|s| s.action != a))
        }
    }
}

/// `r` at state `s` of an explored space, reading enabledness off its
/// transitions.
pub fn satisfies_at(ss: &StateSpace, s: usize, r: &Requirement) -> bool {
    let alpha = ss.alpha(s);
    let holds = |phi| eval_bool(alpha, phi).unwrap_or(false);
    match r {
        Requirement::Invariant(phi) => holds(phi),
        Requirement::EventImplies { action, formula } => holds(formula) || !ss.enables(s, action),
        Requirement::StateExcludesEvent { formula, action } => {
            !holds(formula) || !ss.enables(s, action)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequirementViolation {
    pub state: usize,
    pub requirement: String,
}

#[derive(Debug, Clone)]
pub struct RequirementReport {
    pub holds: bool,
    /// Every (state, requirement) violation, by state.
    pub violations: Vec<RequirementViolation>,
    /// Shortest path to the first violating state.
    pub trace: Option<Vec<Transition>>,
}

impl RequirementReport {
    pub fn render(&self, ss: &StateSpace) -> String {
        if self.holds {
            return "requirements: pass\n".to_string();
        }
        let mut s = format!("requirements: FAIL ({} violations)\n", self.violations.len());
        if let Some(first) = self.violations.first() {
            s.push_str(&format!(
                "  {} violated at {}\n  trace: {}\n",
                first.requirement,
                ss.show_state(first.state),
                ss.show_trace(self.trace.as_deref().unwrap_or(&[]))
            ));
        }
        s
    }

    pub fn to_json(&self, ss: &StateSpace) -> serde_json::Value {
        json!({
            "holds": self.holds,
            "violations": self.violations.iter().map(|v| json!({
                "state": v.state,
                "requirement": v.requirement,
                "alpha": ss.decls.show_valuation(ss.alpha(v.state)),
            })).collect::<Vec<_>>(),
            "trace": self.trace.as_ref().map(|t| ss.show_trace(t)),
        })
    }
}

/// `⊨*`: every reachable state satisfies every requirement.
pub fn satisfies_globally(ss: &StateSpace, rs: &[NamedRequirement]) -> RequirementReport {
    let mut violations = Vec::new();
    for s in 0..ss.len() {
        for r in rs {
            if !satisfies_at(ss, s, &r.requirement) {
                violations.push(RequirementViolation { state: s, requirement: r.name.clone() });
            }
        }
    }
    let trace = violations.first().map(|v| ss.path_to(v.state));
    RequirementReport { holds: violations.is_empty(), violations, trace }
}

/// `∂_H(p || s)` with H from the specification.
pub fn supervised_term(spec: &SystemSpec) -> Result<TermRef, CheckError> {
    Ok(Term::encap(spec.supervised_encapsulation(), unencapsulated_term(spec)?))
}

/// `p || s` without encapsulation.
pub fn unencapsulated_term(spec: &SystemSpec) -> Result<TermRef, CheckError> {
    let s = spec.supervisor_term().ok_or(CheckError::MissingSupervisor)?;
    Ok(Term::par(spec.plant_term().clone(), s.clone()))
}

/// Root configuration `⟨∂_H(p || s), σ0⟩` of the supervised plant.
pub fn supervised_plant(spec: &SystemSpec) -> Result<Configuration, CheckError> {
    Ok(Configuration::initial(supervised_term(spec)?, &spec.decls))
}

/// Root configuration `⟨ξ(p), σ0⟩`.
pub fn renamed_plant(spec: &SystemSpec) -> Result<Configuration, CheckError> {
    Ok(Configuration::initial(xi_rename(spec.plant_term(), &spec.decls)?, &spec.decls))
}

pub fn explore_supervised(
    spec: &SystemSpec,
    encapsulated: bool,
    opts: ExploreOptions,
) -> Result<StateSpace, CheckError> {
    let root = if encapsulated {
        supervised_plant(spec)?
    } else {
        Configuration::initial(unencapsulated_term(spec)?, &spec.decls)
    };
    Ok(explore(&spec.decls, root, opts)?)
}

pub fn explore_renamed(spec: &SystemSpec, opts: ExploreOptions) -> Result<StateSpace, CheckError> {
    Ok(explore(&spec.decls, renamed_plant(spec)?, opts)?)
}

#[derive(Debug, Clone)]
pub struct ControllabilityReport {
    pub result: RelationResult,
    pub supervised: StateSpace,
    pub renamed: StateSpace,
}

impl ControllabilityReport {
    pub fn holds(&self) -> bool {
        self.result.holds
    }

    pub fn render(&self) -> String {
        match &self.result.counterexample {
            None => "controllability: pass\n".to_string(),
            Some(cx) => {
                let trail: Vec<String> =
                    cx.trail().iter().map(|a| a.show(&self.supervised.decls)).collect();
                format!(
                    "controllability: FAIL\n  trail: {}\n{}",
                    if trail.is_empty() { "(initial state)".to_string() } else { trail.join(" . ") },
                    cx.render(&self.supervised, &self.renamed)
                )
            }
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "holds": self.result.holds,
            "supervised_states": self.supervised.len(),
            "renamed_states": self.renamed.len(),
            "counterexample": self.result.counterexample.as_ref().map(|c| c.to_json(&self.supervised)),
        })
    }
}

/// `∂_H(p || s) ⪯_U ξ(p)` with U the uncontrollable actions.
pub fn check_controllability(
    spec: &SystemSpec,
    opts: ExploreOptions,
) -> Result<ControllabilityReport, CheckError> {
    let supervised = explore_supervised(spec, true, opts)?;
    let renamed = explore_renamed(spec, opts)?;
    let result = partial_bisim(&supervised, &renamed, &ActionFilter::Uncontrollable);
    Ok(ControllabilityReport { result, supervised, renamed })
}

#[derive(Debug, Clone)]
pub struct NonblockingReport {
    pub holds: bool,
    /// Reachable states from which no marked state is reachable.
    pub blocking: Vec<usize>,
    /// Shortest path into the first blocking state.
    pub trace: Option<Vec<Transition>>,
}

impl NonblockingReport {
    pub fn render(&self, ss: &StateSpace) -> String {
        if self.holds {
            return "nonblocking: pass\n".to_string();
        }
        let first = self.blocking[0];
        format!(
            "nonblocking: FAIL ({} blocking states)\n  first: {}\n  trace: {}\n",
            self.blocking.len(),
            ss.show_state(first),
            ss.show_trace(self.trace.as_deref().unwrap_or(&[]))
        )
    }

    pub fn to_json(&self, ss: &StateSpace) -> serde_json::Value {
        json!({
            "holds": self.holds,
            "blocking": self.blocking,
            "trace": self.trace.as_ref().map(|t| ss.show_trace(t)),
        })
    }
}

/// Every reachable state can reach a marked state.
pub fn check_nonblocking(ss: &StateSpace) -> NonblockingReport {
    let co = ss.coreachable();
    let blocking: Vec<usize> = (0..ss.len()).filter(|&s| !co[s]).collect();
    let trace = blocking.first().map(|&s| ss.path_to(s));
    NonblockingReport { holds: blocking.is_empty(), blocking, trace }
}
