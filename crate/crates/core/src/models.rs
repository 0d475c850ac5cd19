//! Bundled example specifications.

/// Automated guided vehicle with location observer and supervisor.
pub const AGV: &str = include_str!("../models/agv.cpd");

/// Printing-process plant with one page counter and one maintenance
/// operation, its requirements and a hand-written supervisor.
pub const PPF_1_1: &str = include_str!("../models/ppf_1_1.cpd");

/// [`PPF_1_1`] with a supervisor that gets stuck after starting maintenance.
pub const PPF_1_1_TAMPERED: &str = include_str!("../models/ppf_1_1_tampered.cpd");

/// A plant that can fail uncontrollably from its initial state.
pub const DOOMED: &str = include_str!("../models/doomed.cpd");

/// Refers to an undeclared channel.
pub const UNDECLARED: &str = include_str!("../models/undeclared.cpd");

/// Bundled models by file name.
pub const ALL: &[(&str, &str)] = &[
    ("agv.cpd", AGV),
    ("ppf_1_1.cpd", PPF_1_1),
    ("ppf_1_1_tampered.cpd", PPF_1_1_TAMPERED),
    ("doomed.cpd", DOOMED),
    ("undeclared.cpd", UNDECLARED),
];
