//! Channel and variable declarations, and the data environment (α, ρ).

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::expr::{Value, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChannelId(pub u32);

impl ChannelId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelClass {
    Controllable,
    Uncontrollable,
}

impl fmt::Display for ChannelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelClass::Controllable => "controllable",
            ChannelClass::Uncontrollable => "uncontrollable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Channel {
    pub name: String,
    pub class: ChannelClass,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Domain {
    /// Inclusive integer range.
    Range { lo: Value, hi: Value },
    /// Named constants, encoded as `0..n`.
    Enum(Vec<String>),
}

impl Domain {
    pub fn contains(&self, v: Value) -> bool {
        match self {
            Domain::Range { lo, hi } => *lo <= v && v <= *hi,
            Domain::Enum(names) => 0 <= v && (v as usize) < names.len(),
        }
    }

    pub fn values(&self) -> Vec<Value> {
        match self {
            Domain::Range { lo, hi } => (*lo..=*hi).collect(),
            Domain::Enum(names) => (0..names.len() as Value).collect(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Domain::Range { lo, hi } => (hi - lo + 1).max(0) as usize,
            Domain::Enum(names) => names.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_enum(&self) -> bool {
        matches!(self, Domain::Enum(_))
    }

    /// Position of `v` inside the domain, `None` when out of range.
    pub fn position(&self, v: Value) -> Option<usize> {
        match self {
            Domain::Range { lo, .. } if self.contains(v) => Some((v - lo) as usize),
            Domain::Enum(_) if self.contains(v) => Some(v as usize),
            _ => None,
        }
    }

    /// Renders a value: enumeration constants by name, integers as digits.
    pub fn show(&self, v: Value) -> String {
        match self {
            Domain::Enum(names) if self.contains(v) => names[v as usize].clone(),
            _ => v.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableDecl {
    pub name: String,
    pub domain: Domain,
    pub initial: Value,
}

/// Symbol tables shared by terms, state spaces and reports. Terms refer to
/// channels and variables by index into these tables.
#[derive(Debug, Clone, Default)]
pub struct Declarations {
    pub channels: Vec<Channel>,
    pub variables: Vec<VariableDecl>,
    channel_index: HashMap<String, ChannelId>,
    var_index: HashMap<String, VarId>,
    constants: HashMap<String, Value>,
}

impl PartialEq for Declarations {
    fn eq(&self, other: &Self) -> bool {
        self.channels == other.channels && self.variables == other.variables
    }
}

impl Eq for Declarations {}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeclError {
    #[error("channel `{0}` is declared both controllable and uncontrollable")]
    ControllabilityConflict(String),
    #[error("channel `{0}` declared twice")]
    DuplicateChannel(String),
    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),
    #[error("domain of `{0}` is empty")]
    EmptyDomain(String),
    #[error("initial value of `{0}` is outside its domain")]
    InitialOutOfDomain(String),
    #[error("enumeration constant `{0}` clashes with another declaration")]
    ConstantClash(String),
}

impl Declarations {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_channel(&mut self, name: &str, class: ChannelClass) -> Result<ChannelId, DeclError> {
        if let Some(id) = self.channel_index.get(name) {
            let existing = self.channels[id.index()].class;
            return Err(if existing != class {
                DeclError::ControllabilityConflict(name.to_string())
            } else {
                DeclError::DuplicateChannel(name.to_string())
            });
        }
        let id = ChannelId(self.channels.len() as u32);
        self.channels.push(Channel { name: name.to_string(), class });
        self.channel_index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn add_variable(&mut self, decl: VariableDecl) -> Result<VarId, DeclError> {
        if self.var_index.contains_key(&decl.name) || self.constants.contains_key(&decl.name) {
            return Err(DeclError::DuplicateVariable(decl.name));
        }
        if decl.domain.is_empty() {
            return Err(DeclError::EmptyDomain(decl.name));
        }
        if !decl.domain.contains(decl.initial) {
            return Err(DeclError::InitialOutOfDomain(decl.name));
        }
        if let Domain::Enum(names) = &decl.domain {
            for (i, n) in names.iter().enumerate() {
                match self.constants.get(n) {
                    Some(&v) if v != i as Value => return Err(DeclError::ConstantClash(n.clone())),
                    _ if self.var_index.contains_key(n) || *n == decl.name => {
                        return Err(DeclError::ConstantClash(n.clone()))
                    }
                    _ => {
                        self.constants.insert(n.clone(), i as Value);
                    }
                }
            }
        }
        let id = VarId(self.variables.len() as u32);
        self.var_index.insert(decl.name.clone(), id);
        self.variables.push(decl);
        Ok(id)
    }

    pub fn channel_id(&self, name: &str) -> Option<ChannelId> {
        self.channel_index.get(name).copied()
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.var_index.get(name).copied()
    }

    pub fn constant(&self, name: &str) -> Option<Value> {
        self.constants.get(name).copied()
    }

    pub fn channel(&self, id: ChannelId) -> &Channel {
        &self.channels[id.index()]
    }

    pub fn variable(&self, id: VarId) -> &VariableDecl {
        &self.variables[id.index()]
    }

    pub fn is_controllable(&self, id: ChannelId) -> bool {
        self.channel(id).class == ChannelClass::Controllable
    }

    pub fn controllable_channels(&self) -> impl Iterator<Item = ChannelId> + '_ {
        (0..self.channels.len() as u32)
            .map(ChannelId)
            .filter(|c| self.is_controllable(*c))
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.variables.len() as u32).map(VarId)
    }

    pub fn initial_valuation(&self) -> Vec<Value> {
        self.variables.iter().map(|v| v.initial).collect()
    }

    /// `name=value, ...` in declaration order.
    pub fn show_valuation(&self, alpha: &[Value]) -> String {
        self.variables
            .iter()
            .zip(alpha)
            .map(|(d, v)| format!("{}={}", d.name, d.domain.show(*v)))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// The environment σ = (α, ρ): a total valuation plus the variables written
/// by the transition that produced it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Environment {
    pub alpha: Vec<Value>,
    /// Sorted, duplicate free.
    pub rho: Vec<VarId>,
}

impl Environment {
    /// σ0 = (α0, dom(α0)).
    pub fn initial(decls: &Declarations) -> Self {
        Environment {
            alpha: decls.initial_valuation(),
            rho: decls.var_ids().collect(),
        }
    }

    pub fn new(alpha: Vec<Value>, rho: Vec<VarId>) -> Self {
        let mut rho = rho;
        rho.sort();
        rho.dedup();
        Environment { alpha, rho }
    }
}
