//! Process terms, communication actions and encapsulation sets.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::decl::{ChannelId, Declarations};
use super::expr::{BoolExpr, DataExpr, VarId};

/// A generic communication action `c!_m?_n`: `senders` parties sending and
/// `receivers` parties receiving over `channel`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub channel: ChannelId,
    pub senders: u32,
    pub receivers: u32,
}

impl Action {
    pub fn new(channel: ChannelId, senders: u32, receivers: u32) -> Self {
        Action { channel, senders, receivers }
    }

    /// `c!`, i.e. `c!_1?_0`.
    pub fn send(channel: ChannelId) -> Self {
        Action::new(channel, 1, 0)
    }

    /// `c?`, i.e. `c!_0?_1`.
    pub fn recv(channel: ChannelId) -> Self {
        Action::new(channel, 0, 1)
    }

    /// `c!?`, a completed one-to-one communication.
    pub fn completed(channel: ChannelId) -> Self {
        Action::new(channel, 1, 1)
    }

    pub fn parties(&self) -> u32 {
        self.senders + self.receivers
    }

    /// Label text, `c!_m?_n` with the usual shorthands.
    pub fn show(&self, decls: &Declarations) -> String {
        let mut s = decls.channel(self.channel).name.clone();
        match self.senders {
            0 => {}
            1 => s.push('!'),
            k => s.push_str(&format!("!_{k}")),
        }
        match self.receivers {
            0 => {}
            1 => s.push('?'),
            k => s.push_str(&format!("?_{k}")),
        }
        if self.parties() == 0 {
            s.push_str("!_0?_0");
        }
        s
    }
}

/// One entry of an encapsulation set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionPattern {
    Exact(Action),
    /// Every action on `channel` whose party count is neither 0 nor `parties`.
    Incomplete { channel: ChannelId, parties: u32 },
}

impl ActionPattern {
    pub fn matches(&self, a: &Action) -> bool {
        match self {
            ActionPattern::Exact(b) => a == b,
            ActionPattern::Incomplete { channel, parties } => {
                a.channel == *channel && a.parties() != 0 && a.parties() != *parties
            }
        }
    }
}

/// The set H of an encapsulation. Kept sorted and duplicate free so that
/// equal sets compare equal.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionSet(Vec<ActionPattern>);

impl ActionSet {
    pub fn new(patterns: impl IntoIterator<Item = ActionPattern>) -> Self {
        let mut v: Vec<_> = patterns.into_iter().collect();
        v.sort();
        v.dedup();
        ActionSet(v)
    }

    pub fn contains(&self, a: &Action) -> bool {
        self.0.iter().any(|p| p.matches(a))
    }

    pub fn patterns(&self) -> &[ActionPattern] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn union(&self, other: &ActionSet) -> ActionSet {
        ActionSet::new(self.0.iter().chain(other.0.iter()).cloned())
    }
}

/// The partial update map `f` of a prefix `a[f].p`, sorted by variable.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Update(Vec<(VarId, DataExpr)>);

impl Update {
    pub fn empty() -> Self {
        Update(Vec::new())
    }

    /// Fails with the offending variable when it is assigned twice.
    pub fn new(assignments: impl IntoIterator<Item = (VarId, DataExpr)>) -> Result<Self, VarId> {
        let mut v: Vec<_> = assignments.into_iter().collect();
        v.sort_by_key(|(x, _)| *x);
        for w in v.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(w[0].0);
            }
        }
        Ok(Update(v))
    }

    pub fn assignments(&self) -> &[(VarId, DataExpr)] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn domain(&self) -> Vec<VarId> {
        self.0.iter().map(|(x, _)| *x).collect()
    }
}

pub type TermRef = Arc<Term>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    /// `0`
    Deadlock,
    /// `1`, the successful termination option.
    Skip,
    /// `a[f].p`
    Prefix(Action, Update, TermRef),
    /// `φ -> p`
    Guard(BoolExpr, TermRef),
    /// `∂_H(p)`
    Encap(ActionSet, TermRef),
    Alt(TermRef, TermRef),
    Seq(TermRef, TermRef),
    Star(TermRef),
    Par(TermRef, TermRef),
}

impl Term {
    pub fn deadlock() -> TermRef {
        Arc::new(Term::Deadlock)
    }

    pub fn skip() -> TermRef {
        Arc::new(Term::Skip)
    }

    pub fn prefix(a: Action, f: Update, p: TermRef) -> TermRef {
        Arc::new(Term::Prefix(a, f, p))
    }

    /// `a.p` with the empty update.
    pub fn act(a: Action, p: TermRef) -> TermRef {
        Term::prefix(a, Update::empty(), p)
    }

    pub fn guard(phi: BoolExpr, p: TermRef) -> TermRef {
        Arc::new(Term::Guard(phi, p))
    }

    pub fn encap(h: ActionSet, p: TermRef) -> TermRef {
        Arc::new(Term::Encap(h, p))
    }

    pub fn alt(p: TermRef, q: TermRef) -> TermRef {
        Arc::new(Term::Alt(p, q))
    }

    pub fn seq(p: TermRef, q: TermRef) -> TermRef {
        Arc::new(Term::Seq(p, q))
    }

    pub fn star(p: TermRef) -> TermRef {
        Arc::new(Term::Star(p))
    }

    pub fn par(p: TermRef, q: TermRef) -> TermRef {
        Arc::new(Term::Par(p, q))
    }

    /// Left-nested `p1 + ... + pn`; `0` when empty.
    pub fn alt_all(items: impl IntoIterator<Item = TermRef>) -> TermRef {
        items.into_iter().reduce(Term::alt).unwrap_or_else(Term::deadlock)
    }

    /// Left-nested `p1 || ... || pn`; `1` when empty.
    pub fn par_all(items: impl IntoIterator<Item = TermRef>) -> TermRef {
        items.into_iter().reduce(Term::par).unwrap_or_else(Term::skip)
    }

    /// Number of syntax nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Deadlock | Term::Skip => 1,
            Term::Prefix(_, _, p) | Term::Guard(_, p) | Term::Encap(_, p) | Term::Star(p) => {
                1 + p.size()
            }
            Term::Alt(p, q) | Term::Seq(p, q) | Term::Par(p, q) => 1 + p.size() + q.size(),
        }
    }

    /// Visits every action occurring in a prefix.
    pub fn for_each_prefix(&self, f: &mut impl FnMut(&Action, &Update)) {
        match self {
            Term::Deadlock | Term::Skip => {}
            Term::Prefix(a, u, p) => {
                f(a, u);
                p.for_each_prefix(f);
            }
            Term::Guard(_, p) | Term::Encap(_, p) | Term::Star(p) => p.for_each_prefix(f),
            Term::Alt(p, q) | Term::Seq(p, q) | Term::Par(p, q) => {
                p.for_each_prefix(f);
                q.for_each_prefix(f);
            }
        }
    }
}

/// Variables read by guards or written/read by updates.
pub fn free_variables(t: &Term) -> BTreeSet<VarId> {
    fn go(t: &Term, out: &mut BTreeSet<VarId>) {
        match t {
            Term::Deadlock | Term::Skip => {}
            Term::Prefix(_, u, p) => {
                for (x, e) in u.assignments() {
                    out.insert(*x);
                    e.collect_vars(out);
                }
                go(p, out);
            }
            Term::Guard(phi, p) => {
                phi.collect_vars(out);
                go(p, out);
            }
            Term::Encap(_, p) | Term::Star(p) => go(p, out),
            Term::Alt(p, q) | Term::Seq(p, q) | Term::Par(p, q) => {
                go(p, out);
                go(q, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    go(t, &mut out);
    out
}

/// Ways a term can fall outside the plant or supervisor syntax.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SyntaxViolation {
    /// A prefix whose action is not allowed in this role.
    Prefix { action: String, reason: &'static str },
    /// An operator not allowed in this role.
    Operator(&'static str),
}

impl std::fmt::Display for SyntaxViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SyntaxViolation::Prefix { action, reason } => write!(f, "prefix `{action}`: {reason}"),
            SyntaxViolation::Operator(op) => write!(f, "operator {op} is not allowed"),
        }
    }
}

/// Offending subterms with respect to the plant grammar
/// `P ::= 0 | 1 | c?_n[f].P | u!_m?_n[f].P | φ->P | ∂_H(P) | P+P | P·P | P* | P||P`.
pub fn plant_violations(t: &Term, decls: &Declarations) -> Vec<SyntaxViolation> {
    let mut out = Vec::new();
    t.for_each_prefix(&mut |a, _| {
        let reason = if decls.is_controllable(a.channel) {
            if a.senders != 0 {
                Some("the plant may only receive on a controllable channel")
            } else if a.receivers == 0 {
                Some("empty action")
            } else {
                None
            }
        } else if a.parties() == 0 {
            Some("empty action")
        } else {
            None
        };
        if let Some(reason) = reason {
            out.push(SyntaxViolation::Prefix { action: a.show(decls), reason });
        }
    });
    out
}

pub fn classify_plant(t: &Term, decls: &Declarations) -> bool {
    plant_violations(t, decls).is_empty()
}

/// Offending subterms with respect to `S ::= 1 | c![∅].S | S+S | φ->S | S*`.
pub fn supervisor_violations(t: &Term, decls: &Declarations) -> Vec<SyntaxViolation> {
    fn go(t: &Term, decls: &Declarations, out: &mut Vec<SyntaxViolation>) {
        match t {
            Term::Skip => {}
            Term::Deadlock => out.push(SyntaxViolation::Operator("0")),
            Term::Prefix(a, u, p) => {
                let reason = if !decls.is_controllable(a.channel) {
                    Some("the supervisor may only send on controllable channels")
                } else if a.senders != 1 || a.receivers != 0 {
                    Some("the supervisor must send as a single party")
                } else if !u.is_empty() {
                    Some("the supervisor must not update variables")
                } else {
                    None
                };
                if let Some(reason) = reason {
                    out.push(SyntaxViolation::Prefix { action: a.show(decls), reason });
                }
                go(p, decls, out);
            }
            Term::Guard(_, p) | Term::Star(p) => go(p, decls, out),
            Term::Alt(p, q) => {
                go(p, decls, out);
                go(q, decls, out);
            }
            Term::Encap(_, p) => {
                out.push(SyntaxViolation::Operator("encapsulation"));
                go(p, decls, out);
            }
            Term::Seq(p, q) => {
                out.push(SyntaxViolation::Operator("sequential composition"));
                go(p, decls, out);
                go(q, decls, out);
            }
            Term::Par(p, q) => {
                out.push(SyntaxViolation::Operator("parallel composition"));
                go(p, decls, out);
                go(q, decls, out);
            }
        }
    }
    let mut out = Vec::new();
    go(t, decls, &mut out);
    out
}

pub fn classify_supervisor(t: &Term, decls: &Declarations) -> bool {
    supervisor_violations(t, decls).is_empty()
}
