use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use cpd::control::{
    check_controllability, check_nonblocking, explore_renamed, explore_supervised,
    satisfies_globally, CheckError,
};
use cpd::relations::{partial_bisim, ActionFilter};
use cpd::state_space::{explore, Configuration, ExploreError, ExploreOptions, StateSpace};
use cpd::synthesis::{emit_supervisor, report_json, report_text, synthesize, verify, SynthesisError};
use cpd::{parse, print, SystemSpec};

const EXIT_FAIL: u8 = 1;
const EXIT_RESOURCE: u8 = 2;
const EXIT_NO_SUPERVISOR: u8 = 3;

#[derive(Parser)]
#[command(name = "cpd", version, about = "Process models with data: exploration, checking, supervisor synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a specification and print it back in normal form.
    Parse {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Explore the reachable state space.
    Explore {
        file: PathBuf,
        /// Which system to explore.
        #[arg(long, value_enum, default_value_t = System::Auto)]
        system: System,
        /// Write the state space here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Check requirements, controllability, nonblocking or a partial bisimulation.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Which::All)]
        which: Which,
        /// Right-hand specification for `--which pbis` (defaults to FILE).
        #[arg(long)]
        against: Option<PathBuf>,
        /// Left-hand process for `--which pbis` (defaults to the plant).
        #[arg(long)]
        process: Option<String>,
        /// Right-hand process for `--which pbis` (defaults to the plant).
        #[arg(long)]
        target: Option<String>,
        #[arg(long, value_enum, default_value_t = BisimActions::Uncontrollable)]
        bisim_actions: BisimActions,
        #[command(flatten)]
        common: Common,
    },
    /// Synthesize a supervisor and verify it.
    Synth {
        file: PathBuf,
        /// Write the specification with the synthesized supervisor here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the JSON report here (defaults to OUT with `.json` appended).
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Generate the printing process function plant.
    Ppf {
        #[arg(long)]
        counters: usize,
        /// Maintenance operations per page counter, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        ops: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Maximum number of explored states.
    #[arg(long, env = "CPD_BUDGET", default_value_t = cpd::state_space::DEFAULT_BUDGET,
          value_parser = positive)]
    budget: usize,
    /// Check nonblocking and requirements on p || s instead of the encapsulated composition.
    #[arg(long)]
    no_encap_nonblocking: bool,
    /// Distinguish states by the set of last-updated variables.
    #[arg(long)]
    rho_identity: bool,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

impl Common {
    fn options(&self) -> ExploreOptions {
        ExploreOptions { rho_identity: self.rho_identity, ..ExploreOptions::with_budget(self.budget) }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum System {
    /// The supervised plant when a supervisor is declared, the plant otherwise.
    Auto,
    Plant,
    Renamed,
    Supervised,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    Requirements,
    Controllability,
    Nonblocking,
    Pbis,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BisimActions {
    All,
    None,
    Uncontrollable,
}

impl BisimActions {
    fn filter(self) -> ActionFilter {
        match self {
            BisimActions::All => ActionFilter::All,
            BisimActions::None => ActionFilter::Nothing,
            BisimActions::Uncontrollable => ActionFilter::Uncontrollable,
        }
    }
}

/// A failure that ends the run with a message on stderr.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<CheckError> for Failure {
    fn from(e: CheckError) -> Self {
        let code = match e {
            CheckError::Explore(ExploreError::BudgetExceeded { .. }) => EXIT_RESOURCE,
            _ => EXIT_FAIL,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<ExploreError> for Failure {
    fn from(e: ExploreError) -> Self {
        CheckError::from(e).into()
    }
}

fn read_spec(path: &Path) -> Result<SystemSpec, Failure> {
    let src = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_FAIL, format!("{}: {e}", path.display())))?;
    parse(&src).map_err(|diags| {
        let lines: Vec<String> =
            diags.iter().map(|d| format!("{}:{d}", path.display())).collect();
        Failure::new(EXIT_FAIL, lines.join("\n"))
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::new(EXIT_FAIL, format!("{}: {e}", path.display())))
}

fn emit(format: Format, text: String, value: serde_json::Value) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&value).unwrap()),
        _ => print!("{text}"),
    }
}

fn explore_process(spec: &SystemSpec, name: &str, opts: ExploreOptions) -> Result<StateSpace, Failure> {
    let term = spec
        .processes
        .get(name)
        .ok_or_else(|| Failure::new(EXIT_FAIL, format!("unknown process `{name}`")))?;
    Ok(explore(&spec.decls, Configuration::initial(term.clone(), &spec.decls), opts)?)
}

fn cmd_parse(file: &Path, format: Format) -> Result<bool, Failure> {
    let spec = read_spec(file)?;
    let text = print(&spec);
    emit(format, text.clone(), json!({ "spec": text }));
    Ok(true)
}

fn cmd_explore(file: &Path, system: System, out: Option<&Path>, c: &Common) -> Result<bool, Failure> {
    let spec = read_spec(file)?;
    let opts = c.options();
    let system = match system {
        System::Auto if spec.supervisor.is_some() => System::Supervised,
        System::Auto => System::Plant,
        s => s,
    };
    let ss = match system {
        System::Plant | System::Auto => explore_process(&spec, &spec.plant, opts)?,
        System::Renamed => explore_renamed(&spec, opts)?,
        System::Supervised => explore_supervised(&spec, true, opts)?,
    };
    let counts = format!(
        "states: {}\ntransitions: {}\nmarked: {}\n",
        ss.len(),
        ss.transitions.len(),
        ss.marked_count()
    );
    let artifact = match c.format {
        Format::Dot => Some(ss.to_dot()),
        Format::Json => Some(serde_json::to_string_pretty(&ss.to_json()).unwrap() + "\n"),
        Format::Text => None,
    };
    match (artifact, out) {
        (Some(a), Some(path)) => {
            write_file(path, &a)?;
            print!("{counts}");
        }
        (Some(a), None) => print!("{a}"),
        (None, Some(path)) => {
            write_file(path, &(serde_json::to_string_pretty(&ss.to_json()).unwrap() + "\n"))?;
            print!("{counts}");
        }
        (None, None) => print!("{counts}"),
    }
    Ok(true)
}

#[allow(clippy::too_many_arguments)]
fn cmd_check(
    file: &Path,
    which: Which,
    against: Option<&Path>,
    process: Option<&str>,
    target: Option<&str>,
    actions: BisimActions,
    c: &Common,
) -> Result<bool, Failure> {
    let spec = read_spec(file)?;
    let opts = c.options();
    if which == Which::Pbis {
        let right_spec = match against {
            Some(p) => read_spec(p)?,
            None => spec.clone(),
        };
        if *right_spec.decls != *spec.decls {
            return Err(Failure::new(EXIT_FAIL, "both sides must declare the same channels and variables"));
        }
        let left = explore_process(&spec, process.unwrap_or(&spec.plant), opts)?;
        let right = explore_process(&right_spec, target.unwrap_or(&right_spec.plant), opts)?;
        let r = partial_bisim(&left, &right, &actions.filter());
        let text = match &r.counterexample {
            None => "partial bisimulation: pass\n".to_string(),
            Some(cx) => format!("partial bisimulation: FAIL\n{}", cx.render(&left, &right)),
        };
        let cx = r.counterexample.as_ref().map(|cx| cx.to_json(&left));
        emit(c.format, text, json!({ "holds": r.holds, "counterexample": cx }));
        return Ok(r.holds);
    }

    let encapsulated = !c.no_encap_nonblocking;
    if spec.supervisor.is_none() {
        if matches!(which, Which::Controllability) {
            return Err(CheckError::MissingSupervisor.into());
        }
        // Without a supervisor the plant is checked with every controllable event enabled.
        let ss = explore_renamed(&spec, opts)?;
        let mut text = String::new();
        let mut value = serde_json::Map::new();
        let mut ok = true;
        if matches!(which, Which::Requirements | Which::All) {
            let r = satisfies_globally(&ss, &spec.requirements);
            ok &= r.holds;
            text += &r.render(&ss);
            value.insert("requirements".into(), r.to_json(&ss));
        }
        if matches!(which, Which::Nonblocking | Which::All) {
            let r = check_nonblocking(&ss);
            ok &= r.holds;
            text += &r.render(&ss);
            value.insert("nonblocking".into(), r.to_json(&ss));
        }
        emit(c.format, text, value.into());
        return Ok(ok);
    }

    match which {
        Which::All => {
            let v = verify(&spec, encapsulated, opts)?;
            emit(c.format, v.render(), v.to_json());
            Ok(v.passed())
        }
        Which::Controllability => {
            let r = check_controllability(&spec, opts)?;
            emit(c.format, r.render(), r.to_json());
            Ok(r.holds())
        }
        Which::Requirements => {
            let ss = explore_supervised(&spec, encapsulated, opts)?;
            let r = satisfies_globally(&ss, &spec.requirements);
            emit(c.format, r.render(&ss), r.to_json(&ss));
            Ok(r.holds)
        }
        Which::Nonblocking => {
            let ss = explore_supervised(&spec, encapsulated, opts)?;
            let r = check_nonblocking(&ss);
            emit(c.format, r.render(&ss), r.to_json(&ss));
            Ok(r.holds)
        }
        Which::Pbis => unreachable!(),
    }
}

fn cmd_synth(file: &Path, out: Option<&Path>, report: Option<&Path>, c: &Common) -> Result<bool, Failure> {
    let spec = read_spec(file)?;
    let opts = c.options();
    let syn = synthesize(&spec, opts).map_err(|e| match e {
        SynthesisError::NoSupervisor { .. } => Failure::new(EXIT_NO_SUPERVISOR, e.to_string()),
        SynthesisError::NotObserverComplete { .. } => Failure::new(EXIT_FAIL, e.to_string()),
        SynthesisError::Check(e) => e.into(),
    })?;
    let supervised = spec.with_supervisor("Supervisor", emit_supervisor(&syn.supervisor));
    let v = verify(&supervised, !c.no_encap_nonblocking, opts)?;
    let d = &spec.decls;
    let mut value = report_json(&syn, d);
    value["verification"] = v.to_json();

    if let Some(path) = out {
        write_file(path, &print(&supervised))?;
        let report = report.map(Path::to_path_buf).unwrap_or_else(|| {
            let mut p = path.as_os_str().to_owned();
            p.push(".json");
            PathBuf::from(p)
        });
        write_file(&report, &(serde_json::to_string_pretty(&value).unwrap() + "\n"))?;
    } else if let Some(path) = report {
        write_file(path, &(serde_json::to_string_pretty(&value).unwrap() + "\n"))?;
    }
    let text = format!(
        "{}supervisor: {}\n{}",
        report_text(&syn, d),
        cpd::parser::show_term(&emit_supervisor(&syn.supervisor), d),
        v.render()
    );
    emit(c.format, text, value);
    Ok(v.passed())
}

fn cmd_ppf(counters: usize, ops: &[usize], out: Option<&Path>) -> Result<bool, Failure> {
    if counters != ops.len() {
        let e = cpd::parser::PpfError::CountMismatch { counters, given: ops.len() };
        return Err(Failure::new(EXIT_FAIL, e.to_string()));
    }
    let src = cpd::parser::ppf_source(ops).map_err(|e| Failure::new(EXIT_FAIL, e.to_string()))?;
    match out {
        Some(path) => write_file(path, &src)?,
        None => print!("{src}"),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Parse { file, format } => cmd_parse(file, *format),
        Command::Explore { file, system, out, common } => cmd_explore(file, *system, out.as_deref(), common),
        Command::Check { file, which, against, process, target, bisim_actions, common } => cmd_check(
            file,
            *which,
            against.as_deref(),
            process.as_deref(),
            target.as_deref(),
            *bisim_actions,
            common,
        ),
        Command::Synth { file, out, report, common } => {
            cmd_synth(file, out.as_deref(), report.as_deref(), common)
        }
        Command::Ppf { counters, ops, out } => cmd_ppf(*counters, ops, out.as_deref()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
