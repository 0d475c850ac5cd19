//! Abstract syntax: actions, data and guard expressions, process terms,
//! declarations and environments.

mod decl;
mod expr;
mod term;

pub use decl::{
    Channel, ChannelClass, ChannelId, DeclError, Declarations, Domain, Environment, VariableDecl,
};
pub use expr::{eval_bool, eval_data, BoolExpr, CmpOp, DataExpr, EvalError, Value, VarId};
pub use term::{
    classify_plant, classify_supervisor, free_variables, plant_violations, supervisor_violations,
    Action, ActionPattern, ActionSet, SyntaxViolation, Term, TermRef, Update,
};
