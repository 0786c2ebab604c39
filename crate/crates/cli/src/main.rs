//! Batch command-line front end: parse models and formulas, run checks,
//! emit human-readable and machine-readable reports.
//!
//! Exit codes: 0 success (for `check`: satisfied; for `fuzz`: no
//! mismatches), 1 for an unsatisfied formula or found mismatches, 2 on any
//! parse, validation, or resource-cap error.

mod format;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use ctlsync::checker::{check, CheckError, Witness, WitnessKind};
use ctlsync::formula::{parse, Formula, ParseError};
use ctlsync::kripke::{n_stuttering, KripkeStructure};
use ctlsync::oracle::{default_templates, diff_fuzz, MAX_ORACLE_STATES};
use ctlsync::quotient::{bisim_partition, distinguish, quotient_structure};
use ctlsync::reductions::{
    cnf_to_favorall, cnf_to_ue, dnf_to_ue, indist_pair, parse_dimacs, parse_dimacs_dnf,
    ReductionError,
};

use format::{parse_kripke, write_kripke, FormatError};

#[derive(Parser)]
#[command(name = "ctlsync", version, about = "Model checker for CTL with synchronization operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a formula on a model and report per-state verdicts.
    Check {
        /// Model file in the Kripke text format.
        #[arg(long)]
        model: PathBuf,
        /// Formula text, e.g. "[p UA q]" or "AG (req -> AF ack)".
        #[arg(long)]
        formula: String,
        /// State to decide the exit code for; defaults to the model's init.
        #[arg(long)]
        state: Option<String>,
        /// Emit a JSON report instead of text.
        #[arg(long)]
        json: bool,
        /// Show synchronization witnesses in the text report.
        #[arg(long)]
        witness: bool,
        /// Repair successor-less states with self-loops instead of failing.
        #[arg(long)]
        complete_selfloops: bool,
    },
    /// Write the bisimulation quotient of a model and print the block map.
    Quotient {
        #[arg(long)]
        model: PathBuf,
        /// Output path for the quotient model.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Generate a model-checking instance from a DIMACS file.
    Reduce {
        /// Gadget to generate.
        #[arg(value_enum)]
        mode: ReduceMode,
        /// DIMACS CNF input (clauses are read conjunctively for dnf-ue).
        #[arg(long)]
        dimacs: PathBuf,
        /// Output path; `indist` also writes `<out>.fixed`.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Compare the checker against the brute-force oracle on random models.
    Fuzz {
        #[arg(long)]
        trials: usize,
        /// Maximum states per random model (at most 12).
        #[arg(long)]
        states: usize,
        #[arg(long)]
        seed: u64,
        /// Comma-separated formula list; defaults to the built-in templates.
        #[arg(long)]
        templates: Option<String>,
    },
    /// Search for a formula separating two states of a model.
    Distinguish {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        s1: String,
        #[arg(long)]
        s2: String,
        /// Maximum nesting depth to enumerate.
        #[arg(long)]
        depth: usize,
        /// Exclude the Next operators from the search.
        #[arg(long)]
        no_next: bool,
    },
    /// Replace every state by a chain of n copies.
    Stutter {
        #[arg(long)]
        model: PathBuf,
        #[arg(short, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ReduceMode {
    /// Satisfiability instance for `FA q`.
    CnfFavorall,
    /// Satisfiability instance for `[p UE q]`.
    CnfUe,
    /// Validity instance for `[p UE q]`.
    DnfUe,
    /// Pair of structures indistinguishable iff the input is satisfiable.
    Indist,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("in formula: {0}")]
    Formula(#[from] ParseError),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("{0}")]
    Usage(String),
}

#[derive(Serialize, Deserialize)]
struct Report {
    formula: String,
    states: Vec<StateReport>,
    time_ms: f64,
}

#[derive(Serialize, Deserialize)]
struct StateReport {
    name: String,
    holds: bool,
    witness: Option<String>,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load_model(path: &Path, complete_selfloops: bool) -> Result<(KripkeStructure, Option<String>), CliError> {
    Ok(parse_kripke(&read(path)?, complete_selfloops)?)
}

fn resolve_state(k: &KripkeStructure, name: &str) -> Result<usize, CliError> {
    k.state_index(name)
        .ok_or_else(|| CliError::Usage(format!("unknown state '{name}'")))
}

fn witness_string(w: &Witness) -> String {
    match &w.kind {
        WitnessKind::SyncPoint(k) => k.to_string(),
        WitnessKind::Lasso { position, period } => format!("{position},{period}"),
    }
}

fn run_check(
    model: &Path,
    formula_text: &str,
    state: Option<&str>,
    json: bool,
    show_witness: bool,
    complete_selfloops: bool,
) -> Result<i32, CliError> {
    let (k, init) = load_model(model, complete_selfloops)?;
    let phi = parse(formula_text)?;
    let started = Instant::now();
    let outcome = check(&k, &phi)?;
    let time_ms = started.elapsed().as_secs_f64() * 1000.0;

    let queried = match state {
        Some(name) => resolve_state(&k, name)?,
        None => match &init {
            Some(name) => resolve_state(&k, name)?,
            None => {
                return Err(CliError::Usage(
                    "no --state given and the model has no init line".to_string(),
                ))
            }
        },
    };

    let states: Vec<StateReport> = (0..k.len())
        .map(|t| StateReport {
            name: k.state_name(t).to_string(),
            holds: outcome.holds(t),
            witness: outcome.root_witness(t).map(witness_string),
        })
        .collect();
    let report = Report {
        formula: formula_text.to_string(),
        states,
        time_ms,
    };

    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        println!("formula: {}", report.formula);
        for s in &report.states {
            let verdict = if s.holds { "holds" } else { "fails" };
            match (&s.witness, show_witness) {
                (Some(w), true) => println!("{}: {verdict} (witness {w})", s.name),
                _ => println!("{}: {verdict}", s.name),
            }
        }
        println!("time: {:.3} ms", report.time_ms);
    }
    Ok(if outcome.holds(queried) { 0 } else { 1 })
}

fn run_quotient(model: &Path, out: &Path) -> Result<i32, CliError> {
    let (k, init) = load_model(model, false)?;
    let partition = bisim_partition(&k);
    let (q, block_of) = quotient_structure(&k, &partition);
    let init_block = init
        .as_deref()
        .and_then(|name| k.state_index(name))
        .map(|t| q.state_name(block_of[t]).to_string());
    write(out, &write_kripke(&q, init_block.as_deref()))?;
    for (t, &block) in block_of.iter().enumerate() {
        println!("{} {}", k.state_name(t), q.state_name(block));
    }
    eprintln!(
        "quotient: {} states from {}, written to {}",
        q.len(),
        k.len(),
        out.display()
    );
    Ok(0)
}

fn run_reduce(mode: ReduceMode, dimacs: &Path, out: &Path) -> Result<i32, CliError> {
    let text = read(dimacs)?;
    match mode {
        ReduceMode::CnfFavorall => {
            let (k, init) = cnf_to_favorall(&parse_dimacs(&text)?)?;
            write(out, &write_kripke(&k, Some(&init)))?;
            eprintln!("check with: FA q  (satisfiable iff it holds at {init})");
        }
        ReduceMode::CnfUe => {
            let (k, init) = cnf_to_ue(&parse_dimacs(&text)?)?;
            write(out, &write_kripke(&k, Some(&init)))?;
            eprintln!("check with: [p UE q]  (satisfiable iff it holds at {init})");
        }
        ReduceMode::DnfUe => {
            let (k, init) = dnf_to_ue(&parse_dimacs_dnf(&text)?)?;
            write(out, &write_kripke(&k, Some(&init)))?;
            eprintln!("check with: [p UE q]  (valid iff it holds at {init})");
        }
        ReduceMode::Indist => {
            let pair = indist_pair(&parse_dimacs(&text)?)?;
            write(out, &write_kripke(&pair.encoded, Some(&pair.encoded_init)))?;
            let mut fixed_path = out.as_os_str().to_owned();
            fixed_path.push(".fixed");
            let fixed_path = PathBuf::from(fixed_path);
            write(
                &fixed_path,
                &write_kripke(&pair.fixed, Some(&pair.fixed_init)),
            )?;
            eprintln!(
                "wrote encoded structure to {} and fixed structure to {}",
                out.display(),
                fixed_path.display()
            );
        }
    }
    Ok(0)
}

fn run_fuzz(
    trials: usize,
    states: usize,
    seed: u64,
    templates: Option<&str>,
) -> Result<i32, CliError> {
    if !(1..=MAX_ORACLE_STATES).contains(&states) {
        return Err(CliError::Usage(format!(
            "--states must be between 1 and {MAX_ORACLE_STATES}"
        )));
    }
    let templates: Vec<Formula> = match templates {
        Some(list) => list
            .split(',')
            .map(|s| parse(s.trim()))
            .collect::<Result<_, _>>()?,
        None => default_templates(),
    };
    let report = diff_fuzz(trials, states, &templates, seed);
    println!(
        "trials: {}, templates: {}, mismatches: {}",
        report.trials,
        templates.len(),
        report.mismatches.len()
    );
    for m in &report.mismatches {
        println!(
            "trial {} seed {} structure {:016x}: {} at {}: checker={} oracle={}",
            m.trial, m.seed, m.digest, m.formula, m.state, m.checker_verdict, m.oracle_verdict
        );
    }
    Ok(if report.is_clean() { 0 } else { 1 })
}

fn run_distinguish(
    model: &Path,
    s1: &str,
    s2: &str,
    depth: usize,
    no_next: bool,
) -> Result<i32, CliError> {
    let (k, _) = load_model(model, false)?;
    let a = resolve_state(&k, s1)?;
    let b = resolve_state(&k, s2)?;
    if a == b {
        return Err(CliError::Usage("--s1 and --s2 must differ".to_string()));
    }
    match distinguish(&k, a, b, depth, !no_next)? {
        Some(phi) => println!("{phi}"),
        None => println!("none up to depth {depth}"),
    }
    Ok(0)
}

fn run_stutter(model: &Path, n: u64, out: &Path) -> Result<i32, CliError> {
    let (k, init) = load_model(model, false)?;
    let st = n_stuttering(&k, n as usize);
    // The first copy of the original init becomes the new init.
    let init = init.map(|name| format!("{name}_1"));
    write(out, &write_kripke(&st, init.as_deref()))?;
    eprintln!("wrote {} states to {}", st.len(), out.display());
    Ok(0)
}

fn run() -> Result<i32, CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Check {
            model,
            formula,
            state,
            json,
            witness,
            complete_selfloops,
        } => run_check(
            &model,
            &formula,
            state.as_deref(),
            json,
            witness,
            complete_selfloops,
        ),
        Command::Quotient { model, out } => run_quotient(&model, &out),
        Command::Reduce { mode, dimacs, out } => run_reduce(mode, &dimacs, &out),
        Command::Fuzz {
            trials,
            states,
            seed,
            templates,
        } => run_fuzz(trials, states, seed, templates.as_deref()),
        Command::Distinguish {
            model,
            s1,
            s2,
            depth,
            no_next,
        } => run_distinguish(&model, &s1, &s2, depth, no_next),
        Command::Stutter { model, n, out } => run_stutter(&model, n, &out),
    }
}

fn main() {
    match run() {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
