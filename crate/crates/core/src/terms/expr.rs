//! Data expressions and boolean guard formulas, with their evaluation over a
//! total valuation of the declared variables.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Data values. Enumeration constants are stored as their position in the
/// enumeration.
pub type Value = i64;

/// Index of a declared variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("variable #{0} is not bound in the valuation")]
    Unbound(u32),
    #[error("arithmetic overflow while evaluating a data expression")]
    Overflow,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DataExpr {
    Lit(Value),
    Var(VarId),
    Add(Box<DataExpr>, Box<DataExpr>),
    Sub(Box<DataExpr>, Box<DataExpr>),
    Mul(Box<DataExpr>, Box<DataExpr>),
}

impl DataExpr {
    pub fn var(v: VarId) -> Self {
        DataExpr::Var(v)
    }

    pub fn lit(v: Value) -> Self {
        DataExpr::Lit(v)
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<VarId>) {
        match self {
            DataExpr::Lit(_) => {}
            DataExpr::Var(v) => {
                out.insert(*v);
            }
            DataExpr::Add(a, b) | DataExpr::Sub(a, b) | DataExpr::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

/// Evaluates `e` under `alpha`. Pure; `alpha` is indexed by [`VarId`].
pub fn eval_data(alpha: &[Value], e: &DataExpr) -> Result<Value, EvalError> {
    match e {
        DataExpr::Lit(v) => Ok(*v),
        DataExpr::Var(v) => alpha.get(v.index()).copied().ok_or(EvalError::Unbound(v.0)),
        DataExpr::Add(a, b) => eval_data(alpha, a)?
            .checked_add(eval_data(alpha, b)?)
            .ok_or(EvalError::Overflow),
        DataExpr::Sub(a, b) => eval_data(alpha, a)?
            .checked_sub(eval_data(alpha, b)?)
            .ok_or(EvalError::Overflow),
        DataExpr::Mul(a, b) => eval_data(alpha, a)?
            .checked_mul(eval_data(alpha, b)?)
            .ok_or(EvalError::Overflow),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn apply(self, l: Value, r: Value) -> bool {
        match self {
            CmpOp::Lt => l < r,
            CmpOp::Le => l <= r,
            CmpOp::Eq => l == r,
            CmpOp::Ne => l != r,
            CmpOp::Ge => l >= r,
            CmpOp::Gt => l > r,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoolExpr {
    True,
    False,
    Cmp(CmpOp, DataExpr, DataExpr),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
    Implies(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn cmp(op: CmpOp, l: DataExpr, r: DataExpr) -> Self {
        BoolExpr::Cmp(op, l, r)
    }

    /// `var op value`, the shape produced by guard synthesis.
    pub fn var_cmp(v: VarId, op: CmpOp, value: Value) -> Self {
        BoolExpr::Cmp(op, DataExpr::Var(v), DataExpr::Lit(value))
    }

    pub fn not(e: BoolExpr) -> Self {
        BoolExpr::Not(Box::new(e))
    }

    pub fn and(l: BoolExpr, r: BoolExpr) -> Self {
        BoolExpr::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: BoolExpr, r: BoolExpr) -> Self {
        BoolExpr::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: BoolExpr, r: BoolExpr) -> Self {
        BoolExpr::Implies(Box::new(l), Box::new(r))
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn conjunction(items: impl IntoIterator<Item = BoolExpr>) -> Self {
        items
            .into_iter()
            .reduce(BoolExpr::and)
            .unwrap_or(BoolExpr::True)
    }

    /// Left-nested disjunction; `false` when empty.
    pub fn disjunction(items: impl IntoIterator<Item = BoolExpr>) -> Self {
        items
            .into_iter()
            .reduce(BoolExpr::or)
            .unwrap_or(BoolExpr::False)
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<VarId>) {
        match self {
            BoolExpr::True | BoolExpr::False => {}
            BoolExpr::Cmp(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            BoolExpr::Not(e) => e.collect_vars(out),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) | BoolExpr::Implies(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

/// Classical two-valued evaluation of `phi`; atoms are evaluated through
/// [`eval_data`].
pub fn eval_bool(alpha: &[Value], phi: &BoolExpr) -> Result<bool, EvalError> {
    Ok(match phi {
        BoolExpr::True => true,
        BoolExpr::False => false,
        BoolExpr::Cmp(op, a, b) => op.apply(eval_data(alpha, a)?, eval_data(alpha, b)?),
        BoolExpr::Not(e) => !eval_bool(alpha, e)?,
        BoolExpr::And(a, b) => eval_bool(alpha, a)? && eval_bool(alpha, b)?,
        BoolExpr::Or(a, b) => eval_bool(alpha, a)? || eval_bool(alpha, b)?,
        BoolExpr::Implies(a, b) => !eval_bool(alpha, a)? || eval_bool(alpha, b)?,
    })
}
