//! Generator for the parameterized printing-process-function plant.

use std::fmt::Write;

use thiserror::Error;

use super::{parse, SystemSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PpfError {
    #[error("at least one page counter is required")]
    NoCounters,
    #[error("page counter {0} has no maintenance operations")]
    NoOperations(usize),
    #[error("{counters} page counters but {given} operation counts")]
    CountMismatch { counters: usize, given: usize },
}

/// `.cpd` source of the plant with `ops.len()` page counters, counter `i`
/// owning `ops[i - 1]` maintenance operations, plus its requirements.
pub fn ppf_source(ops: &[usize]) -> Result<String, PpfError> {
    if ops.is_empty() {
        return Err(PpfError::NoCounters);
    }
    if let Some(i) = ops.iter().position(|&j| j == 0) {
        return Err(PpfError::NoOperations(i + 1));
    }
    let counters: Vec<usize> = (1..=ops.len()).collect();
    let pairs: Vec<(usize, usize)> =
        counters.iter().flat_map(|&i| (1..=ops[i - 1]).map(move |j| (i, j))).collect();

    let mut s = String::new();
    let mut ctrl = vec!["Stb2Run".to_string(), "Run2Stb".to_string()];
    ctrl.extend(counters.iter().map(|i| format!("SchOper_{i}")));
    ctrl.extend(pairs.iter().map(|(i, j)| format!("OpStart_{i}_{j}")));
    let mut unctrl: Vec<String> =
        ["_InRun", "_InStb", "_NewJob", "_JobFin"].iter().map(|s| s.to_string()).collect();
    for i in &counters {
        for name in ["_SoftDln", "_HardDln", "_ExOper", "_OpFin"] {
            unctrl.push(format!("{name}_{i}"));
        }
    }
    let _ = writeln!(s, "channel controllable {};", ctrl.join(", "));
    let _ = writeln!(s, "channel uncontrollable {};", unctrl.join(", "));
    s.push('\n');
    s.push_str("var CPM : 1..4 = 1;\nvar TPM : 1..2 = 1;\n");
    for i in &counters {
        let _ = writeln!(s, "var MS_{i} : 1..3 = 1;");
        let _ = writeln!(s, "var PC_{i} : 1..3 = 1;");
    }
    for (i, j) in &pairs {
        let _ = writeln!(s, "var MO_{i}_{j} : 1..2 = 1;");
    }
    s.push('\n');

    s.push_str(
        "proc CurrentPowerMode = (Stb2Run?[CPM := 2]._InRun![CPM := 3].\
         Run2Stb?[CPM := 4]._InStb![CPM := 1].1 + 1)*;\n",
    );
    for (i, j) in &pairs {
        let _ = writeln!(
            s,
            "proc MaintenanceOperation_{i}_{j} = \
             (OpStart_{i}_{j}?[MO_{i}_{j} := 2]._OpFin_{i}![MO_{i}_{j} := 1].1 + 1)*;"
        );
    }
    for i in &counters {
        let _ = writeln!(
            s,
            "proc PageCounter_{i} = (_SoftDln_{i}![PC_{i} := 2].\
             (_HardDln_{i}![PC_{i} := 3]._OpFin_{i}?[PC_{i} := 1].1 + _OpFin_{i}?[PC_{i} := 1].1) \
             + _OpFin_{i}?.1 + 1)*;"
        );
        let _ = writeln!(
            s,
            "proc MaintenanceScheduling_{i} = (SchOper_{i}?[MS_{i} := 2].\
             _ExOper_{i}![MS_{i} := 3]._OpFin_{i}?[MS_{i} := 1].1 + 1)*;"
        );
    }
    s.push_str("proc TargetPowerMode = (_NewJob![TPM := 2]._JobFin![TPM := 1].1 + 1)*;\n");

    let blocked: Vec<String> = counters
        .iter()
        .flat_map(|i| [format!("_OpFin_{i}?"), format!("_OpFin_{i}?_2"), format!("_OpFin_{i}!?")])
        .collect();
    let mut components = vec!["CurrentPowerMode".to_string()];
    components.extend(counters.iter().map(|i| format!("MaintenanceScheduling_{i}")));
    components.extend(pairs.iter().map(|(i, j)| format!("MaintenanceOperation_{i}_{j}")));
    components.extend(counters.iter().map(|i| format!("PageCounter_{i}")));
    components.push("TargetPowerMode".to_string());
    let _ = writeln!(
        s,
        "proc PPF = encap {{{}}} ({});",
        blocked.join(", "),
        components.join(" || ")
    );
    s.push_str("\nplant PPF;\n");
    let incomplete: Vec<String> = ctrl.iter().map(|c| format!("incomplete({c}, 2)")).collect();
    let _ = writeln!(s, "supervised encap {{{}}};", incomplete.join(", "));
    s.push('\n');

    let busy: Vec<String> = pairs.iter().map(|(i, j)| format!("MO_{i}_{j} = 2")).collect();
    let _ = writeln!(
        s,
        "requirement MaintenanceInStandby: !(CPM != 1 && ({}));",
        busy.join(" || ")
    );
    for i in &counters {
        let _ = writeln!(
            s,
            "requirement Schedule_{i}: SchOper_{i}!? => (PC_{i} = 2 && TPM = 1) || PC_{i} = 3;"
        );
    }
    for (i, j) in &pairs {
        let _ = writeln!(s, "requirement Start_{i}_{j}: OpStart_{i}_{j}!? => MS_{i} = 3;");
    }
    let idle: Vec<String> = counters.iter().map(|i| format!("MS_{i} != 3")).collect();
    let _ = writeln!(s, "requirement ToRun: Stb2Run!? => TPM = 2 && {};", idle.join(" && "));
    let pending: Vec<String> = counters.iter().map(|i| format!("MS_{i} = 3")).collect();
    let _ = writeln!(s, "requirement ToStandby: Run2Stb!? => TPM = 1 || {};", pending.join(" || "));
    Ok(s)
}

/// Parsed plant for `counters` page counters with `ops[i]` maintenance
/// operations each.
pub fn instantiate_ppf(counters: usize, ops: &[usize]) -> Result<SystemSpec, PpfError> {
    if counters != ops.len() {
        return Err(PpfError::CountMismatch { counters, given: ops.len() });
    }
    let src = ppf_source(ops)?;
    Ok(parse(&src).expect("generated plant source parses"))
}
