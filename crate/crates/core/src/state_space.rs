//! Explicit-state exploration of reachable configurations.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::parser::show_term;
use crate::sos::{canonicalize, ModelError, Semantics};
use crate::terms::{Action, Declarations, Environment, TermRef, Value};

pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub term: TermRef,
    pub env: Environment,
}

impl Configuration {
    pub fn new(term: TermRef, env: Environment) -> Self {
        Configuration { term, env }
    }

    /// `⟨t, σ0⟩`.
    pub fn initial(term: TermRef, decls: &Declarations) -> Self {
        Configuration { term, env: Environment::initial(decls) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExploreOptions {
    /// Maximum number of states; exceeding it is an error.
    pub budget: usize,
    /// Identify states up to the term normal form of [`canonicalize`].
    pub canonicalize: bool,
    /// Include ρ in state identity.
    pub rho_identity: bool,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions { budget: DEFAULT_BUDGET, canonicalize: true, rho_identity: false }
    }
}

impl ExploreOptions {
    pub fn with_budget(budget: usize) -> Self {
        ExploreOptions { budget, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("state budget of {budget} states exceeded")]
    BudgetExceeded { budget: usize },
    #[error("model error: {0}")]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub src: usize,
    pub action: Action,
    pub dst: usize,
}

/// A reachable transition graph. State 0 is the initial state; states are
/// numbered in breadth-first order with successors visited in label order.
#[derive(Debug, Clone)]
pub struct StateSpace {
    pub decls: Arc<Declarations>,
    pub states: Vec<Configuration>,
    pub marked: Vec<bool>,
    pub transitions: Vec<Transition>,
    /// Indices into `transitions`, per source state, in label order.
    out: Vec<Vec<usize>>,
    /// Transition through which each state was first reached.
    parent: Vec<Option<usize>>,
}

type StateKey = (TermRef, Vec<Value>, Option<Vec<crate::terms::VarId>>);

pub fn explore(
    decls: &Arc<Declarations>,
    root: Configuration,
    opts: ExploreOptions,
) -> Result<StateSpace, ExploreError> {
    assert!(opts.budget >= 1, "state budget must be positive");
    let sem = if opts.canonicalize {
        Semantics::canonical(decls)
    } else {
        Semantics::new(decls)
    };
    let root = if opts.canonicalize {
        Configuration { term: canonicalize(&root.term), env: root.env }
    } else {
        root
    };
    let key = |c: &Configuration| -> StateKey {
        (c.term.clone(), c.env.alpha.clone(), opts.rho_identity.then(|| c.env.rho.clone()))
    };

    let mut index: HashMap<StateKey, usize> = HashMap::new();
    let mut ss = StateSpace {
        decls: decls.clone(),
        states: Vec::new(),
        marked: Vec::new(),
        transitions: Vec::new(),
        out: Vec::new(),
        parent: Vec::new(),
    };
    index.insert(key(&root), 0);
    ss.push_state(root, None);
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let conf = ss.states[s].clone();
        ss.marked[s] = sem.terminates(&conf.term, &conf.env.alpha)?;
        for step in sem.step(&conf.term, &conf.env)? {
            let target = Configuration { term: step.term, env: step.env };
            let k = key(&target);
            let t_idx = ss.transitions.len();
            let dst = match index.get(&k) {
                Some(&d) => d,
                None => {
                    if ss.states.len() >= opts.budget {
                        return Err(ExploreError::BudgetExceeded { budget: opts.budget });
                    }
                    let d = ss.states.len();
                    index.insert(k, d);
                    ss.push_state(target, Some(t_idx));
                    queue.push_back(d);
                    d
                }
            };
            ss.transitions.push(Transition { src: s, action: step.action, dst });
            ss.out[s].push(t_idx);
        }
    }
    Ok(ss)
}

#[derive(Serialize)]
struct JsonState {
    id: usize,
    term: String,
    alpha: serde_json::Map<String, serde_json::Value>,
    marked: bool,
}

#[derive(Serialize)]
struct JsonTransition {
    src: usize,
    channel: String,
    m: u32,
    n: u32,
    dst: usize,
}

#[derive(Serialize)]
struct JsonSpace {
    states: Vec<JsonState>,
    transitions: Vec<JsonTransition>,
    initial: usize,
}

impl StateSpace {
    fn push_state(&mut self, c: Configuration, parent: Option<usize>) {
        self.states.push(c);
        self.marked.push(false);
        self.out.push(Vec::new());
        self.parent.push(parent);
    }

    /// Builds the reachable part of a transition graph given explicitly.
    /// States are renumbered breadth-first from `initial`.
    pub fn from_parts(
        decls: Arc<Declarations>,
        states: Vec<Configuration>,
        marked: Vec<bool>,
        transitions: Vec<Transition>,
        initial: usize,
    ) -> StateSpace {
        Self::from_parts_indexed(decls, states, marked, transitions, initial).0
    }

    /// Like [`StateSpace::from_parts`], also returning the original index of
    /// every new state.
    pub fn from_parts_indexed(
        decls: Arc<Declarations>,
        states: Vec<Configuration>,
        marked: Vec<bool>,
        transitions: Vec<Transition>,
        initial: usize,
    ) -> (StateSpace, Vec<usize>) {
        let mut by_src: Vec<Vec<Transition>> = vec![Vec::new(); states.len()];
        for t in transitions {
            by_src[t.src].push(t);
        }
        for v in &mut by_src {
            v.sort_by_key(|t| (t.action, t.dst));
            v.dedup();
        }
        let mut ss = StateSpace {
            decls,
            states: Vec::new(),
            marked: Vec::new(),
            transitions: Vec::new(),
            out: Vec::new(),
            parent: Vec::new(),
        };
        let mut renumber: HashMap<usize, usize> = HashMap::new();
        let mut origin = vec![initial];
        renumber.insert(initial, 0);
        ss.push_state(states[initial].clone(), None);
        ss.marked[0] = marked[initial];
        let mut queue = VecDeque::from([initial]);
        while let Some(old) = queue.pop_front() {
            let s = renumber[&old];
            for t in &by_src[old] {
                let t_idx = ss.transitions.len();
                let dst = match renumber.get(&t.dst) {
                    Some(&d) => d,
                    None => {
                        let d = ss.states.len();
                        renumber.insert(t.dst, d);
                        origin.push(t.dst);
                        ss.push_state(states[t.dst].clone(), Some(t_idx));
                        ss.marked[d] = marked[t.dst];
                        queue.push_back(t.dst);
                        d
                    }
                };
                ss.transitions.push(Transition { src: s, action: t.action, dst });
                ss.out[s].push(t_idx);
            }
        }
        (ss, origin)
    }

    /// The part reachable from the initial state using only the transitions
    /// accepted by `keep`.
    pub fn restrict(&self, keep: impl Fn(&Transition) -> bool) -> StateSpace {
        self.restrict_indexed(keep).0
    }

    /// [`StateSpace::restrict`] plus the original index of every kept state.
    pub fn restrict_indexed(&self, keep: impl Fn(&Transition) -> bool) -> (StateSpace, Vec<usize>) {
        StateSpace::from_parts_indexed(
            self.decls.clone(),
            self.states.clone(),
            self.marked.clone(),
            self.transitions.iter().filter(|t| keep(t)).copied().collect(),
            0,
        )
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn marked_count(&self) -> usize {
        self.marked.iter().filter(|m| **m).count()
    }

    pub fn alpha(&self, s: usize) -> &[Value] {
        &self.states[s].env.alpha
    }

    /// Outgoing transitions of `s`, in label order.
    pub fn outgoing(&self, s: usize) -> impl Iterator<Item = &Transition> + '_ {
        self.out[s].iter().map(move |&i| &self.transitions[i])
    }

    pub fn enables(&self, s: usize, a: &Action) -> bool {
        self.outgoing(s).any(|t| t.action == *a)
    }

    /// States from which a marked state is reachable.
    pub fn coreachable(&self) -> Vec<bool> {
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); self.len()];
        for t in &self.transitions {
            preds[t.dst].push(t.src);
        }
        let mut co = self.marked.clone();
        let mut stack: Vec<usize> = (0..self.len()).filter(|&s| co[s]).collect();
        while let Some(s) = stack.pop() {
            for &p in &preds[s] {
                if !co[p] {
                    co[p] = true;
                    stack.push(p);
                }
            }
        }
        co
    }

    /// A shortest transition sequence from the initial state to `s`.
    pub fn path_to(&self, s: usize) -> Vec<Transition> {
        let mut path = Vec::new();
        let mut cur = s;
        while let Some(t) = self.parent[cur] {
            path.push(self.transitions[t]);
            cur = self.transitions[t].src;
        }
        path.reverse();
        path
    }

    /// `a1 . a2 . ...` for a transition sequence.
    pub fn show_trace(&self, path: &[Transition]) -> String {
        if path.is_empty() {
            return "(initial state)".to_string();
        }
        path.iter().map(|t| t.action.show(&self.decls)).collect::<Vec<_>>().join(" . ")
    }

    pub fn show_state(&self, s: usize) -> String {
        format!("#{s} [{}]", self.decls.show_valuation(self.alpha(s)))
    }

    fn dot_label(&self, a: &Action) -> String {
        format!("{}!{}?{}", self.decls.channel(a.channel).name, a.senders, a.receivers)
    }

    /// Graphviz digraph; marked states are drawn with a double border and
    /// the initial state in bold. One edge per transition.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph statespace {\n  rankdir=LR;\n  node [shape=circle];\n");
        for (i, m) in self.marked.iter().enumerate() {
            let shape = if *m { "doublecircle" } else { "circle" };
            let bold = if i == self.initial() { ", style=bold" } else { "" };
            let label = self.decls.show_valuation(self.alpha(i)).replace('"', "\\\"");
            let _ = writeln!(s, "  s{i} [shape={shape}{bold}, label=\"{i}\\n{label}\"];");
        }
        for t in &self.transitions {
            let _ = writeln!(s, "  s{} -> s{} [label=\"{}\"];", t.src, t.dst, self.dot_label(&t.action));
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let d = &self.decls;
        let states = self
            .states
            .iter()
            .enumerate()
            .map(|(id, c)| JsonState {
                id,
                term: show_term(&c.term, d),
                alpha: d
                    .variables
                    .iter()
                    .zip(&c.env.alpha)
                    .map(|(v, x)| {
                        let value = if v.domain.is_enum() {
                            serde_json::Value::from(v.domain.show(*x))
                        } else {
                            serde_json::Value::from(*x)
                        };
                        (v.name.clone(), value)
                    })
                    .collect(),
                marked: self.marked[id],
            })
            .collect();
        let transitions = self
            .transitions
            .iter()
            .map(|t| JsonTransition {
                src: t.src,
                channel: d.channel(t.action.channel).name.clone(),
                m: t.action.senders,
                n: t.action.receivers,
                dst: t.dst,
            })
            .collect();
        serde_json::to_value(JsonSpace { states, transitions, initial: 0 })
            .expect("state space serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse;
    use crate::terms::Term;

    fn space(src: &str) -> StateSpace {
        let spec = parse(src).unwrap();
        let root = Configuration::initial(spec.plant_term().clone(), &spec.decls);
        explore(&spec.decls, root, ExploreOptions::default()).unwrap()
    }

    #[test]
    fn deadlock_has_one_unmarked_state() {
        let d = Arc::new(Declarations::new());
        let ss = explore(&d, Configuration::initial(Term::deadlock(), &d), Default::default()).unwrap();
        assert_eq!((ss.len(), ss.transitions.len(), ss.marked_count()), (1, 0, 0));
        assert!(ss.coreachable().iter().all(|c| !c));
    }

    #[test]
    fn star_loop_collapses_to_one_state_per_position() {
        let ss = space(
            "channel uncontrollable a, b;
             proc P = (a!.b!.1 + 1)*;
             plant P;",
        );
        assert_eq!(ss.len(), 2);
        assert_eq!(ss.transitions.len(), 2);
        assert_eq!(ss.marked, vec![true, false]);
        assert_eq!(ss.coreachable(), vec![true, true]);
        assert_eq!(ss.show_trace(&ss.path_to(1)), "a!");
    }

    #[test]
    fn rho_identity_can_split_states() {
        let src = "channel uncontrollable a, b;
                   var x : 0..1 = 0;
                   proc P = (a![x := 0].1 + b!.1)*;
                   plant P;";
        let spec = parse(src).unwrap();
        let root = Configuration::initial(spec.plant_term().clone(), &spec.decls);
        let plain = explore(&spec.decls, root.clone(), ExploreOptions::default()).unwrap();
        let with_rho = explore(
            &spec.decls,
            root,
            ExploreOptions { rho_identity: true, ..Default::default() },
        )
        .unwrap();
        assert_eq!(plain.len(), 1);
        assert_eq!(with_rho.len(), 2);
    }

    #[test]
    fn budget_is_an_error_not_a_truncation() {
        let spec = parse(
            "channel uncontrollable a;
             var x : 0..9 = 0;
             proc P = (x < 9 -> a![x := x + 1].1)*;
             plant P;",
        )
        .unwrap();
        let root = Configuration::initial(spec.plant_term().clone(), &spec.decls);
        let err = explore(&spec.decls, root.clone(), ExploreOptions::with_budget(5)).unwrap_err();
        assert_eq!(err, ExploreError::BudgetExceeded { budget: 5 });
        let ok = explore(&spec.decls, root, ExploreOptions::with_budget(10)).unwrap();
        assert_eq!(ok.len(), 10);
    }

    #[test]
    fn dot_edges_match_transitions_and_marking_style() {
        let ss = space(
            "channel uncontrollable a;
             proc P = a!.1 + a!.0;
             plant P;",
        );
        let dot = ss.to_dot();
        let edges = dot.lines().filter(|l| l.contains("->") && !l.contains("init")).count();
        assert_eq!(edges, ss.transitions.len());
        assert_eq!(dot.matches("doublecircle").count(), ss.marked_count());
    }

    #[test]
    fn json_schema_fields() {
        let ss = space(
            "channel uncontrollable a;
             var L : {A, B} = A;
             proc P = a![L := B].1;
             plant P;",
        );
        let j = ss.to_json();
        assert_eq!(j["initial"], 0);
        assert_eq!(j["states"][1]["alpha"]["L"], "B");
        assert_eq!(j["transitions"][0]["channel"], "a");
        assert_eq!(j["transitions"][0]["m"], 1);
        assert_eq!(j["transitions"][0]["n"], 0);
        assert_eq!(j["states"][1]["marked"], true);
    }

    #[test]
    fn restrict_keeps_only_reachable_part() {
        let ss = space(
            "channel uncontrollable a, b;
             proc P = a!.b!.1 + b!.1;
             plant P;",
        );
        let a = ss.transitions.iter().find(|t| ss.decls.channel(t.action.channel).name == "a").unwrap().action;
        let r = ss.restrict(|t| t.action != a);
        assert_eq!(r.len(), 2);
        assert_eq!(r.transitions.len(), 1);
    }
}
