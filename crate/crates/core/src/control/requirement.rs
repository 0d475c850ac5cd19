use crate::terms::{Action, BoolExpr};

/// A data-based control requirement.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Requirement {
    /// `a => φ`: whenever `a` is enabled, `φ` holds.
    EventImplies { action: Action, formula: BoolExpr },
    /// `φ => disabled a`: `a` is not enabled where `φ` holds.
    StateExcludesEvent { formula: BoolExpr, action: Action },
    /// `φ` holds in every reachable state.
    Invariant(BoolExpr),
}

impl Requirement {
    /// The action constrained by the requirement, if any.
    pub fn action(&self) -> Option<&Action> {
        match self {
            Requirement::EventImplies { action, .. }
            | Requirement::StateExcludesEvent { action, .. } => Some(action),
            Requirement::Invariant(_) => None,
        }
    }

    /// Rewrites `a => φ` into the equivalent `¬φ => disabled a`.
    pub fn as_exclusion(&self) -> Option<(BoolExpr, Action)> {
        match self {
            Requirement::EventImplies { action, formula } => {
                Some((BoolExpr::not(formula.clone()), *action))
            }
            Requirement::StateExcludesEvent { formula, action } => Some((formula.clone(), *action)),
            Requirement::Invariant(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NamedRequirement {
    pub name: String,
    pub requirement: Requirement,
}
