//! The `.cpd` specification format.
//!
//! ```text
//! channel controllable gotoA, gotoB;
//! channel uncontrollable arrivedA, arrivedB;
//! var L : {A, B} = A;
//! proc Vehicle = (gotoA?.arrivedA!.1 + gotoB?.arrivedB!.1 + 1)*;
//! proc Observer = (arrivedA?[L := A].1 + arrivedB?[L := B].1 + 1)*;
//! proc AGV = encap {incomplete(arrivedA, 2), incomplete(arrivedB, 2)} (Vehicle || Observer);
//! plant AGV;
//! requirement AtA: L = A => disabled gotoA!?;
//! ```
//!
//! Process operators bind, from loosest to tightest: `||`, `+`, `.`
//! (sequential composition), prefix `a[f].T` and guard `phi -> T`, postfix
//! `*`. A bare name refers to a previously defined process and is inlined.

mod grammar;
mod lexer;
mod ppf;
mod printer;

use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;

use crate::control::NamedRequirement;
use crate::terms::{ActionPattern, ActionSet, Declarations, TermRef};

pub use ppf::{instantiate_ppf, ppf_source, PpfError};
pub use printer::{show_bool, show_data, show_term};

/// A parse or validation problem at a source position (1-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

/// A parsed specification: declarations, named processes, the plant and
/// optional supervisor, the encapsulation set of the supervised composition
/// and the data-based requirements.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub decls: Arc<Declarations>,
    /// Process definitions in source order, with references inlined.
    pub processes: IndexMap<String, TermRef>,
    pub plant: String,
    pub supervisor: Option<String>,
    /// `supervised encap {...};`, when declared.
    pub supervised_encap: Option<ActionSet>,
    pub requirements: Vec<NamedRequirement>,
}

impl SystemSpec {
    pub fn plant_term(&self) -> &TermRef {
        &self.processes[&self.plant]
    }

    pub fn supervisor_term(&self) -> Option<&TermRef> {
        self.supervisor.as_ref().map(|s| &self.processes[s])
    }

    /// The set H of the supervised composition ∂_H(p || s). Without a
    /// declaration every controllable channel must complete as one sender
    /// plus one receiver.
    pub fn supervised_encapsulation(&self) -> ActionSet {
        match &self.supervised_encap {
            Some(h) => h.clone(),
            None => ActionSet::new(
                self.decls
                    .controllable_channels()
                    .map(|channel| ActionPattern::Incomplete { channel, parties: 2 }),
            ),
        }
    }

    /// Copy of this spec with `term` registered as process `name` and used
    /// as the supervisor.
    pub fn with_supervisor(&self, name: &str, term: TermRef) -> SystemSpec {
        let mut spec = self.clone();
        spec.processes.insert(name.to_string(), term);
        spec.supervisor = Some(name.to_string());
        spec
    }
}

/// Parses a specification. On failure returns every diagnostic found;
/// parsing resumes after the next `;` following an error.
pub fn parse(src: &str) -> Result<SystemSpec, Vec<Diagnostic>> {
    grammar::parse_spec(src)
}

/// Renders a specification in the `.cpd` syntax; `parse(print(s)) == s`.
pub fn print(spec: &SystemSpec) -> String {
    printer::print_spec(spec)
}
