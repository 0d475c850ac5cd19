//! Termination predicate and transition relation of process terms over data
//! environments, and the renaming ξ used for controllability.

use thiserror::Error;

use crate::terms::{
    eval_bool, eval_data, plant_violations, Action, ActionPattern, ActionSet, Declarations,
    Environment, EvalError, SyntaxViolation, Term, TermRef, Value, VarId,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("`{action}` assigns {value} to `{variable}`, outside its domain")]
    DomainViolation { variable: String, value: Value, action: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// One derivable transition: label, target term and target environment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub action: Action,
    pub term: TermRef,
    pub env: Environment,
}

/// The operational rules over a fixed set of declarations.
///
/// In canonical mode, targets are built with the same normalization as
/// [`canonicalize`], so that starting from a canonical term every reachable
/// term is canonical too.
#[derive(Debug, Clone, Copy)]
pub struct Semantics<'a> {
    pub decls: &'a Declarations,
    pub canonical: bool,
}

impl<'a> Semantics<'a> {
    pub fn new(decls: &'a Declarations) -> Self {
        Semantics { decls, canonical: false }
    }

    pub fn canonical(decls: &'a Declarations) -> Self {
        Semantics { decls, canonical: true }
    }

    /// The termination predicate `⟨t, σ⟩↓`.
    pub fn terminates(&self, t: &Term, alpha: &[Value]) -> Result<bool, ModelError> {
        Ok(match t {
            Term::Skip | Term::Star(_) => true,
            Term::Deadlock | Term::Prefix(..) => false,
            Term::Alt(p, q) => self.terminates(p, alpha)? || self.terminates(q, alpha)?,
            Term::Seq(p, q) | Term::Par(p, q) => {
                self.terminates(p, alpha)? && self.terminates(q, alpha)?
            }
            Term::Guard(phi, p) => eval_bool(alpha, phi)? && self.terminates(p, alpha)?,
            Term::Encap(_, p) => self.terminates(p, alpha)?,
        })
    }

    /// All transitions of `⟨t, σ⟩`, sorted and without duplicates.
    pub fn step(&self, t: &TermRef, env: &Environment) -> Result<Vec<Step>, ModelError> {
        let mut out = Vec::new();
        self.derive(t, env, &mut out)?;
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn seq(&self, p: TermRef, q: TermRef) -> TermRef {
        if self.canonical {
            seq_canonical(p, q)
        } else {
            Term::seq(p, q)
        }
    }

    fn derive(&self, t: &TermRef, env: &Environment, out: &mut Vec<Step>) -> Result<(), ModelError> {
        match &**t {
            Term::Deadlock | Term::Skip => {}
            Term::Prefix(a, f, p) => {
                let mut alpha = env.alpha.clone();
                for (x, e) in f.assignments() {
                    let v = eval_data(&env.alpha, e)?;
                    let decl = self.decls.variable(*x);
                    if !decl.domain.contains(v) {
                        return Err(ModelError::DomainViolation {
                            variable: decl.name.clone(),
                            value: v,
                            action: a.show(self.decls),
                        });
                    }
                    alpha[x.index()] = v;
                }
                out.push(Step {
                    action: *a,
                    term: p.clone(),
                    env: Environment { alpha, rho: f.domain() },
                });
            }
            Term::Alt(p, q) => {
                self.derive(p, env, out)?;
                self.derive(q, env, out)?;
            }
            Term::Seq(p, q) => {
                let mut left = Vec::new();
                self.derive(p, env, &mut left)?;
                out.extend(left.into_iter().map(|s| Step { term: self.seq(s.term, q.clone()), ..s }));
                if self.terminates(p, &env.alpha)? {
                    self.derive(q, env, out)?;
                }
            }
            Term::Star(p) => {
                let mut body = Vec::new();
                self.derive(p, env, &mut body)?;
                out.extend(body.into_iter().map(|s| Step { term: self.seq(s.term, t.clone()), ..s }));
            }
            Term::Par(p, q) => {
                let (mut ls, mut rs) = (Vec::new(), Vec::new());
                self.derive(p, env, &mut ls)?;
                self.derive(q, env, &mut rs)?;
                for l in &ls {
                    for r in rs.iter().filter(|r| r.action.channel == l.action.channel) {
                        if let Some(env) = merge(&l.env, &r.env) {
                            out.push(Step {
                                action: Action::new(
                                    l.action.channel,
                                    l.action.senders + r.action.senders,
                                    l.action.receivers + r.action.receivers,
                                ),
                                term: Term::par(l.term.clone(), r.term.clone()),
                                env,
                            });
                        }
                    }
                }
                out.extend(ls.into_iter().map(|s| Step { term: Term::par(s.term, q.clone()), ..s }));
                out.extend(rs.into_iter().map(|s| Step { term: Term::par(p.clone(), s.term), ..s }));
            }
            Term::Guard(phi, p) => {
                if eval_bool(&env.alpha, phi)? {
                    self.derive(p, env, out)?;
                }
            }
            Term::Encap(h, p) => {
                let mut inner = Vec::new();
                self.derive(p, env, &mut inner)?;
                out.extend(
                    inner
                        .into_iter()
                        .filter(|s| !h.contains(&s.action))
                        .map(|s| Step { term: Term::encap(h.clone(), s.term), ..s }),
                );
            }
        }
        Ok(())
    }
}

/// Environment of a synchronization: defined iff both sides agree on the
/// variables they both wrote; the left valuation is overridden by the right
/// one on variables only the right side wrote.
pub fn merge(l: &Environment, r: &Environment) -> Option<Environment> {
    let shared_agrees = l
        .rho
        .iter()
        .filter(|x| r.rho.binary_search(x).is_ok())
        .all(|x| l.alpha[x.index()] == r.alpha[x.index()]);
    if !shared_agrees {
        return None;
    }
    let mut alpha = l.alpha.clone();
    for x in &r.rho {
        if l.rho.binary_search(x).is_err() {
            alpha[x.index()] = r.alpha[x.index()];
        }
    }
    let mut rho: Vec<VarId> = l.rho.iter().chain(&r.rho).copied().collect();
    rho.sort();
    rho.dedup();
    Some(Environment { alpha, rho })
}

fn seq_items(t: &TermRef, out: &mut Vec<TermRef>) {
    match &**t {
        Term::Seq(p, q) => {
            seq_items(p, out);
            seq_items(q, out);
        }
        Term::Skip => {}
        _ => out.push(t.clone()),
    }
}

fn seq_from(items: Vec<TermRef>) -> TermRef {
    items.into_iter().rev().reduce(|acc, p| Term::seq(p, acc)).unwrap_or_else(Term::skip)
}

/// Sequential composition of two canonical terms, kept canonical.
fn seq_canonical(p: TermRef, q: TermRef) -> TermRef {
    if matches!(*p, Term::Skip) {
        return q;
    }
    if matches!(*q, Term::Skip) {
        return p;
    }
    let mut items = Vec::new();
    seq_items(&p, &mut items);
    seq_items(&q, &mut items);
    seq_from(items)
}

fn alt_items(t: &TermRef, out: &mut Vec<TermRef>) {
    match &**t {
        Term::Alt(p, q) => {
            alt_items(p, out);
            alt_items(q, out);
        }
        _ => out.push(t.clone()),
    }
}

/// Normal form used for state identity: `+` flattened, its summands sorted
/// and deduplicated with redundant `0` summands dropped; `·` flattened to the
/// right with `1` units removed.
pub fn canonicalize(t: &TermRef) -> TermRef {
    match &**t {
        Term::Deadlock | Term::Skip => t.clone(),
        Term::Prefix(a, f, p) => Term::prefix(*a, f.clone(), canonicalize(p)),
        Term::Guard(phi, p) => Term::guard(phi.clone(), canonicalize(p)),
        Term::Encap(h, p) => Term::encap(h.clone(), canonicalize(p)),
        Term::Star(p) => Term::star(canonicalize(p)),
        Term::Par(p, q) => Term::par(canonicalize(p), canonicalize(q)),
        Term::Alt(..) => {
            let mut items = Vec::new();
            alt_items(t, &mut items);
            let mut flat = Vec::new();
            for i in items {
                alt_items(&canonicalize(&i), &mut flat);
            }
            flat.sort();
            flat.dedup();
            if flat.len() > 1 {
                flat.retain(|p| !matches!(**p, Term::Deadlock));
            }
            flat.into_iter().rev().reduce(|acc, p| Term::alt(p, acc)).unwrap_or_else(Term::deadlock)
        }
        Term::Seq(..) => {
            let mut items = Vec::new();
            seq_items(t, &mut items);
            let mut flat = Vec::new();
            for i in items {
                seq_items(&canonicalize(&i), &mut flat);
            }
            seq_from(flat)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum XiError {
    #[error("renaming applies to plant terms only: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    NotAPlant(Vec<SyntaxViolation>),
    #[error("cannot rename the encapsulation pattern `incomplete({0}, {1})` over a controllable channel")]
    ControllablePattern(String, u32),
}

/// ξ: every controllable receive `c?_n` becomes the completed `c!?_n`, in
/// prefixes and in encapsulation sets. Everything else is unchanged.
pub fn xi_rename(t: &TermRef, decls: &Declarations) -> Result<TermRef, XiError> {
    let violations = plant_violations(t, decls);
    if !violations.is_empty() {
        return Err(XiError::NotAPlant(violations));
    }
    xi(t, decls)
}

fn xi_action(a: &Action, decls: &Declarations) -> Action {
    if decls.is_controllable(a.channel) && a.senders == 0 {
        Action::new(a.channel, 1, a.receivers)
    } else {
        *a
    }
}

fn xi(t: &TermRef, decls: &Declarations) -> Result<TermRef, XiError> {
    Ok(match &**t {
        Term::Deadlock | Term::Skip => t.clone(),
        Term::Prefix(a, f, p) => Term::prefix(xi_action(a, decls), f.clone(), xi(p, decls)?),
        Term::Guard(phi, p) => Term::guard(phi.clone(), xi(p, decls)?),
        Term::Encap(h, p) => {
            let mut pats = Vec::new();
            for pat in h.patterns() {
                pats.push(match pat {
                    ActionPattern::Exact(a) => ActionPattern::Exact(xi_action(a, decls)),
                    ActionPattern::Incomplete { channel, parties } => {
                        if decls.is_controllable(*channel) {
                            return Err(XiError::ControllablePattern(
                                decls.channel(*channel).name.clone(),
                                *parties,
                            ));
                        }
                        pat.clone()
                    }
                });
            }
            Term::encap(ActionSet::new(pats), xi(p, decls)?)
        }
        Term::Alt(p, q) => Term::alt(xi(p, decls)?, xi(q, decls)?),
        Term::Seq(p, q) => Term::seq(xi(p, decls)?, xi(q, decls)?),
        Term::Par(p, q) => Term::par(xi(p, decls)?, xi(q, decls)?),
        Term::Star(p) => Term::star(xi(p, decls)?),
    })
}
