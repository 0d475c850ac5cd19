use std::fmt::Write;
use std::sync::Arc;

use super::SystemSpec;
use crate::control::Requirement;
use crate::terms::{
    ActionPattern, ActionSet, BoolExpr, ChannelClass, DataExpr, Declarations, Domain, Term, TermRef,
    Update,
};

pub fn print_spec(spec: &SystemSpec) -> String {
    let d = &*spec.decls;
    let mut out = String::new();

    let mut i = 0;
    while i < d.channels.len() {
        let class = d.channels[i].class;
        let mut names = Vec::new();
        while i < d.channels.len() && d.channels[i].class == class {
            names.push(d.channels[i].name.as_str());
            i += 1;
        }
        let kw = match class {
            ChannelClass::Controllable => "controllable",
            ChannelClass::Uncontrollable => "uncontrollable",
        };
        let _ = writeln!(out, "channel {kw} {};", names.join(", "));
    }
    for v in &d.variables {
        let dom = match &v.domain {
            Domain::Range { lo, hi } => format!("{lo}..{hi}"),
            Domain::Enum(names) => format!("{{{}}}", names.join(", ")),
        };
        let _ = writeln!(out, "var {} : {} = {};", v.name, dom, v.domain.show(v.initial));
    }
    if !d.channels.is_empty() || !d.variables.is_empty() {
        out.push('\n');
    }

    let mut named: Vec<(&str, &TermRef)> = Vec::new();
    for (name, t) in &spec.processes {
        let mut body = String::new();
        TermPrinter { decls: d, named: &named }.term(&mut body, t);
        let _ = writeln!(out, "proc {name} = {body};");
        named.push((name, t));
    }
    out.push('\n');
    let _ = writeln!(out, "plant {};", spec.plant);
    if let Some(s) = &spec.supervisor {
        let _ = writeln!(out, "supervisor {s};");
    }
    if let Some(h) = &spec.supervised_encap {
        let _ = writeln!(out, "supervised encap {};", show_action_set(h, d));
    }
    if !spec.requirements.is_empty() {
        out.push('\n');
    }
    for r in &spec.requirements {
        let body = match &r.requirement {
            Requirement::EventImplies { action, formula } => {
                format!("{} => {}", action.show(d), show_bool(formula, d))
            }
            Requirement::StateExcludesEvent { formula, action } => {
                let mut s = String::new();
                bool_expr(&mut s, formula, d, 1);
                format!("{s} => disabled {}", action.show(d))
            }
            Requirement::Invariant(phi) => show_bool(phi, d),
        };
        let _ = writeln!(out, "requirement {}: {body};", r.name);
    }
    out
}

pub fn show_action_set(h: &ActionSet, d: &Declarations) -> String {
    let items: Vec<String> = h
        .patterns()
        .iter()
        .map(|p| match p {
            ActionPattern::Exact(a) => a.show(d),
            ActionPattern::Incomplete { channel, parties } => {
                format!("incomplete({}, {parties})", d.channel(*channel).name)
            }
        })
        .collect();
    format!("{{{}}}", items.join(", "))
}

/// Renders a process term in the `.cpd` syntax.
pub fn show_term(t: &Term, d: &Declarations) -> String {
    let mut s = String::new();
    TermPrinter { decls: d, named: &[] }.term(&mut s, t);
    s
}

/// Renders a formula; enumeration values compared against a variable are
/// written by name.
pub fn show_bool(phi: &BoolExpr, d: &Declarations) -> String {
    let mut s = String::new();
    bool_expr(&mut s, phi, d, 0);
    s
}

pub fn show_data(e: &DataExpr, d: &Declarations) -> String {
    let mut s = String::new();
    data_expr(&mut s, e, d, 0);
    s
}

struct TermPrinter<'a> {
    decls: &'a Declarations,
    /// Previously defined processes; shared subterms print as references.
    named: &'a [(&'a str, &'a TermRef)],
}

// Binding levels: 0 `||`, 1 `+`, 2 `.`, 3 prefix/guard, 4 `*`, 5 atom.
fn level(t: &Term) -> u8 {
    match t {
        Term::Par(..) => 0,
        Term::Alt(..) => 1,
        Term::Seq(..) => 2,
        Term::Prefix(..) | Term::Guard(..) => 3,
        Term::Star(_) => 4,
        Term::Deadlock | Term::Skip | Term::Encap(..) => 5,
    }
}

impl TermPrinter<'_> {
    fn reference(&self, t: &TermRef) -> Option<&str> {
        self.named
            .iter()
            .rev()
            .find(|(_, n)| Arc::ptr_eq(n, t) && !matches!(***n, Term::Skip | Term::Deadlock))
            .map(|(name, _)| *name)
    }

    fn child(&self, out: &mut String, t: &TermRef, min: u8) {
        if let Some(name) = self.reference(t) {
            out.push_str(name);
            return;
        }
        if level(t) < min {
            out.push('(');
            self.term(out, t);
            out.push(')');
        } else {
            self.term(out, t);
        }
    }

    fn term(&self, out: &mut String, t: &Term) {
        let d = self.decls;
        match t {
            Term::Deadlock => out.push('0'),
            Term::Skip => out.push('1'),
            Term::Prefix(a, f, p) => {
                out.push_str(&a.show(d));
                update(out, f, d);
                out.push('.');
                self.child(out, p, 3);
            }
            Term::Guard(phi, p) => {
                let mut g = String::new();
                bool_expr(&mut g, phi, d, 2);
                if g.starts_with(|c: char| c.is_ascii_digit()) {
                    g = format!("({g})");
                }
                out.push_str(&g);
                out.push_str(" -> ");
                self.child(out, p, 3);
            }
            Term::Encap(h, p) => {
                out.push_str("encap ");
                out.push_str(&show_action_set(h, d));
                out.push_str(" (");
                self.child(out, p, 0);
                out.push(')');
            }
            Term::Alt(p, q) => {
                self.child(out, p, 1);
                out.push_str(" + ");
                self.child(out, q, 2);
            }
            Term::Seq(p, q) => {
                self.child(out, p, 2);
                out.push('.');
                self.child(out, q, 3);
            }
            Term::Par(p, q) => {
                self.child(out, p, 0);
                out.push_str(" || ");
                self.child(out, q, 1);
            }
            Term::Star(p) => {
                self.child(out, p, 4);
                out.push('*');
            }
        }
    }
}

fn update(out: &mut String, f: &Update, d: &Declarations) {
    if f.is_empty() {
        return;
    }
    out.push('[');
    for (i, (v, e)) in f.assignments().iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let var = d.variable(*v);
        out.push_str(&var.name);
        out.push_str(" := ");
        match e {
            DataExpr::Lit(c) if var.domain.is_enum() && var.domain.contains(*c) => {
                out.push_str(&var.domain.show(*c))
            }
            _ => data_expr(out, e, d, 0),
        }
    }
    out.push(']');
}

// Formula levels: 0 `=>`, 1 `||`, 2 `&&`, 3 unary/atom.
fn bool_level(phi: &BoolExpr) -> u8 {
    match phi {
        BoolExpr::Implies(..) => 0,
        BoolExpr::Or(..) => 1,
        BoolExpr::And(..) => 2,
        _ => 3,
    }
}

fn bool_expr(out: &mut String, phi: &BoolExpr, d: &Declarations, min: u8) {
    if bool_level(phi) < min {
        out.push('(');
        bool_expr(out, phi, d, 0);
        out.push(')');
        return;
    }
    match phi {
        BoolExpr::True => out.push_str("true"),
        BoolExpr::False => out.push_str("false"),
        BoolExpr::Not(p) => {
            out.push_str("!(");
            bool_expr(out, p, d, 0);
            out.push(')');
        }
        BoolExpr::And(l, r) => {
            bool_expr(out, l, d, 2);
            out.push_str(" && ");
            bool_expr(out, r, d, 3);
        }
        BoolExpr::Or(l, r) => {
            bool_expr(out, l, d, 1);
            out.push_str(" || ");
            bool_expr(out, r, d, 2);
        }
        BoolExpr::Implies(l, r) => {
            bool_expr(out, l, d, 1);
            out.push_str(" => ");
            bool_expr(out, r, d, 0);
        }
        BoolExpr::Cmp(op, l, r) => {
            operand(out, l, r, d);
            let _ = write!(out, " {op} ");
            operand(out, r, l, d);
        }
    }
}

/// A comparison operand; a literal compared with an enumeration variable is
/// shown as its constant name.
fn operand(out: &mut String, e: &DataExpr, other: &DataExpr, d: &Declarations) {
    if let (DataExpr::Lit(c), DataExpr::Var(v)) = (e, other) {
        let dom = &d.variable(*v).domain;
        if dom.is_enum() && dom.contains(*c) {
            out.push_str(&dom.show(*c));
            return;
        }
    }
    data_expr(out, e, d, 0);
}

// Data levels: 0 `+ -`, 1 `*`, 2 atom.
fn data_expr(out: &mut String, e: &DataExpr, d: &Declarations, min: u8) {
    let lvl = match e {
        DataExpr::Add(..) | DataExpr::Sub(..) => 0,
        DataExpr::Mul(..) => 1,
        _ => 2,
    };
    if lvl < min {
        out.push('(');
        data_expr(out, e, d, 0);
        out.push(')');
        return;
    }
    match e {
        DataExpr::Lit(v) => {
            let _ = write!(out, "{v}");
        }
        DataExpr::Var(v) => out.push_str(&d.variable(*v).name),
        DataExpr::Add(l, r) => {
            data_expr(out, l, d, 0);
            out.push_str(" + ");
            data_expr(out, r, d, 1);
        }
        DataExpr::Sub(l, r) => {
            data_expr(out, l, d, 0);
            out.push_str(" - ");
            data_expr(out, r, d, 1);
        }
        DataExpr::Mul(l, r) => {
            data_expr(out, l, d, 1);
            out.push_str(" * ");
            data_expr(out, r, d, 2);
        }
    }
}
