//! Partial bisimulation between state spaces, with bisimulation and
//! simulation as the two extreme instances.

use std::collections::{BTreeSet, HashMap};

use serde_json::json;

use crate::state_space::StateSpace;
use crate::terms::{Action, Declarations};

/// The bisimulation action set B.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionFilter {
    All,
    Nothing,
    Uncontrollable,
    Controllable,
    Only(BTreeSet<Action>),
}

impl ActionFilter {
    pub fn includes(&self, a: &Action, decls: &Declarations) -> bool {
        match self {
            ActionFilter::All => true,
            ActionFilter::Nothing => false,
            ActionFilter::Uncontrollable => !decls.is_controllable(a.channel),
            ActionFilter::Controllable => decls.is_controllable(a.channel),
            ActionFilter::Only(set) => set.contains(a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Why a pair of states cannot be related.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    /// Exactly one side has the termination option; `left_marked` tells which.
    Termination { left_marked: bool },
    /// `side` can take `action` and the other side has no such move.
    Unmatched { side: Side, action: Action },
}

/// One move of a distinguishing play: `side` takes `action`, and the other
/// side answers with its most resilient response.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlayStep {
    pub from: (usize, usize),
    pub side: Side,
    pub action: Action,
    pub to: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub play: Vec<PlayStep>,
    pub end: (usize, usize),
    pub violation: Violation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationResult {
    pub holds: bool,
    /// The greatest partial bisimulation among pairs reachable by matching
    /// moves from the initial pair, when it relates the initial states.
    pub witness: Option<BTreeSet<(usize, usize)>>,
    pub counterexample: Option<Counterexample>,
}

impl Counterexample {
    pub fn trail(&self) -> Vec<Action> {
        self.play.iter().map(|s| s.action).collect()
    }

    pub fn render(&self, left: &StateSpace, right: &StateSpace) -> String {
        let d = &left.decls;
        let mut s = String::new();
        for step in &self.play {
            let who = match step.side {
                Side::Left => "left",
                Side::Right => "right",
            };
            s.push_str(&format!(
                "  {who} does {}: ({}, {}) -> ({}, {})\n",
                step.action.show(d),
                left.show_state(step.from.0),
                right.show_state(step.from.1),
                left.show_state(step.to.0),
                right.show_state(step.to.1),
            ));
        }
        let (l, r) = self.end;
        let why = match self.violation {
            Violation::Termination { left_marked: true } => {
                "left can terminate, right cannot".to_string()
            }
            Violation::Termination { left_marked: false } => {
                "right can terminate, left cannot".to_string()
            }
            Violation::Unmatched { side: Side::Left, action } => {
                format!("left can do {}, right cannot", action.show(d))
            }
            Violation::Unmatched { side: Side::Right, action } => {
                format!("right can do {}, left cannot", action.show(d))
            }
        };
        s.push_str(&format!(
            "  at ({}, {}): {why}\n",
            left.show_state(l),
            right.show_state(r)
        ));
        s
    }

    pub fn to_json(&self, left: &StateSpace) -> serde_json::Value {
        let d = &left.decls;
        let violation = match self.violation {
            Violation::Termination { left_marked } => {
                json!({"kind": "termination", "left_marked": left_marked})
            }
            Violation::Unmatched { side, action } => json!({
                "kind": "unmatched",
                "side": if side == Side::Left { "left" } else { "right" },
                "action": action.show(d),
            }),
        };
        json!({
            "trail": self.play.iter().map(|s| json!({
                "side": if s.side == Side::Left { "left" } else { "right" },
                "action": s.action.show(d),
                "from": [s.from.0, s.from.1],
                "to": [s.to.0, s.to.1],
            })).collect::<Vec<_>>(),
            "end": [self.end.0, self.end.1],
            "violation": violation,
        })
    }
}

/// Decides `left ⪯_B right` for the initial states: termination agrees, every
/// left move is matched by an equally labelled right move, and every right
/// move with a label in B is matched by the left.
pub fn partial_bisim(left: &StateSpace, right: &StateSpace, b: &ActionFilter) -> RelationResult {
    let decls = &left.decls;
    let in_b = |a: &Action| b.includes(a, decls);

    // Pairs reachable from the initial pair by equally labelled moves.
    let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut succ: Vec<Vec<(Side, Action, Vec<usize>)>> = Vec::new();
    ids.insert((0, 0), 0);
    pairs.push((0, 0));
    let mut next = 0;
    while next < pairs.len() {
        let (p, q) = pairs[next];
        let mut moves = Vec::new();
        let mut intern = |pair: (usize, usize), pairs: &mut Vec<(usize, usize)>| -> usize {
            *ids.entry(pair).or_insert_with(|| {
                pairs.push(pair);
                pairs.len() - 1
            })
        };
        let lt: Vec<_> = left.outgoing(p).copied().collect();
        let rt: Vec<_> = right.outgoing(q).copied().collect();
        for (i, t) in lt.iter().enumerate() {
            if i > 0 && lt[i - 1].action == t.action && lt[i - 1].dst == t.dst {
                continue;
            }
            let answers = rt
                .iter()
                .filter(|u| u.action == t.action)
                .map(|u| intern((t.dst, u.dst), &mut pairs))
                .collect();
            moves.push((Side::Left, t.action, answers));
        }
        for u in rt.iter().filter(|u| in_b(&u.action)) {
            let answers = lt
                .iter()
                .filter(|t| t.action == u.action)
                .map(|t| intern((t.dst, u.dst), &mut pairs))
                .collect();
            moves.push((Side::Right, u.action, answers));
        }
        succ.push(moves);
        next += 1;
    }

    // Round in which each pair was removed; round 0 is the termination check.
    let n = pairs.len();
    let mut removed: Vec<Option<(usize, Option<usize>)>> = vec![None; n];
    for (i, &(p, q)) in pairs.iter().enumerate() {
        if left.marked[p] != right.marked[q] {
            removed[i] = Some((0, None));
        }
    }
    let mut round = 0;
    loop {
        round += 1;
        let mut batch = Vec::new();
        for i in 0..n {
            if removed[i].is_some() {
                continue;
            }
            let failing = succ[i]
                .iter()
                .position(|(_, _, answers)| answers.iter().all(|&j| removed[j].is_some()));
            if let Some(m) = failing {
                batch.push((i, m));
            }
        }
        if batch.is_empty() {
            break;
        }
        for (i, m) in batch {
            removed[i] = Some((round, Some(m)));
        }
    }

    if removed[0].is_none() {
        let witness = (0..n).filter(|&i| removed[i].is_none()).map(|i| pairs[i]).collect();
        return RelationResult { holds: true, witness: Some(witness), counterexample: None };
    }

    let mut play = Vec::new();
    let mut cur = 0;
    let violation = loop {
        let (p, q) = pairs[cur];
        match removed[cur] {
            Some((_, None)) => break Violation::Termination { left_marked: left.marked[p] },
            Some((_, Some(m))) => {
                let (side, action, answers) = &succ[cur][m];
                // Follow the answer that survived longest.
                let best = answers.iter().copied().max_by_key(|&j| removed[j].map(|r| r.0));
                match best {
                    None => break Violation::Unmatched { side: *side, action: *action },
                    Some(j) => {
                        play.push(PlayStep { from: (p, q), side: *side, action: *action, to: pairs[j] });
                        cur = j;
                    }
                }
            }
            None => unreachable!("a surviving pair answers every move"),
        }
    };
    RelationResult {
        holds: false,
        witness: None,
        counterexample: Some(Counterexample { play, end: pairs[cur], violation }),
    }
}

/// Bisimilarity: `⪯_A` in both directions.
pub fn bisimilar(left: &StateSpace, right: &StateSpace) -> RelationResult {
    let forward = partial_bisim(left, right, &ActionFilter::All);
    if !forward.holds {
        return forward;
    }
    let backward = partial_bisim(right, left, &ActionFilter::All);
    if !backward.holds {
        return RelationResult {
            counterexample: backward.counterexample.map(swap_sides),
            ..backward
        };
    }
    forward
}

/// The simulation preorder, `⪯_∅`.
pub fn simulated_by(left: &StateSpace, right: &StateSpace) -> RelationResult {
    partial_bisim(left, right, &ActionFilter::Nothing)
}

fn swap_sides(c: Counterexample) -> Counterexample {
    let flip = |s: Side| if s == Side::Left { Side::Right } else { Side::Left };
    Counterexample {
        play: c
            .play
            .into_iter()
            .map(|s| PlayStep {
                from: (s.from.1, s.from.0),
                side: flip(s.side),
                action: s.action,
                to: (s.to.1, s.to.0),
            })
            .collect(),
        end: (c.end.1, c.end.0),
        violation: match c.violation {
            Violation::Termination { left_marked } => Violation::Termination { left_marked: !left_marked },
            Violation::Unmatched { side, action } => Violation::Unmatched { side: flip(side), action },
        },
    }
}
