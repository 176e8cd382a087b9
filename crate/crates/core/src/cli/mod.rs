//! Command-line front end: `check`, `gen`, `solve` and `convert`.
//!
//! Exit codes: 0 pass, 1 check failure (or no converged start), 2 usage,
//! 3 I/O, parse or validation error.

pub mod document;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::block::FSolution;
use crate::builders::{cocycle_cyclic, fibonacci_solution, pointed_solution, solve_fibonacci, trivial_solution, GroupTable};
use crate::error::Error;
use crate::normalized::{check_all_be, normalize, WeightSystem};
use crate::pentagon::{check_all, Form as PentagonForm};
use crate::report::ResidualReport;
use crate::solver::{solve_multiplicity_free, SolveOptions};
use crate::tensor::check_all_tensor;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "penta", version, about = "Check, build and solve pentagon-relation solutions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a solution document against the pentagon relation.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = CheckForm::Component)]
        form: CheckForm,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Document holding the weights for `--form be` (default: the checked file's own).
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        report: ReportFormat,
    },
    /// Write a known solution.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        /// Group order for `pointed`.
        #[arg(long)]
        n: Option<usize>,
        /// Cocycle parameter for `pointed`, in `0..n`.
        #[arg(long, default_value_t = 0)]
        k: usize,
        /// For `fibonacci`: run the solver instead of reading the cache.
        #[arg(long)]
        fresh: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for solutions on the rules of a document.
    Solve {
        rules: PathBuf,
        #[arg(long, default_value_t = 50)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        target: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rewrite a document canonically, optionally attaching weights.
    Convert {
        file: PathBuf,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CheckForm {
    Global,
    Component,
    Tensor,
    Be,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Trivial,
    Pointed,
    Fibonacci,
}

/// Machine-readable check report.
#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub overall: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub worst: Vec<WorstTuple>,
    pub vacuous_count: u64,
    pub tuples_checked: usize,
    pub wall_ms: u128,
}

#[derive(Debug, Serialize)]
pub struct WorstTuple {
    pub tuple: Vec<String>,
    pub residual: f64,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Unsupported(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

/// Runs one command, writing results to `out` and diagnostics to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Check {
            file,
            form,
            tol,
            weights,
            report,
        } => cmd_check(&file, form, tol, weights.as_deref(), report, out),
        Command::Gen { kind, n, k, fresh, out: path } => cmd_gen(kind, n, k, fresh, path.as_deref(), out),
        Command::Solve {
            rules,
            starts,
            seed,
            target,
            out: path,
        } => {
            let opts = SolveOptions {
                starts,
                seed,
                residual_target: target,
                ..Default::default()
            };
            cmd_solve(&rules, &opts, path.as_deref(), out, err)
        }
        Command::Convert { file, weights, out: path } => cmd_convert(&file, weights.as_deref(), path.as_deref(), out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_check(
    file: &Path,
    form: CheckForm,
    tol: f64,
    weights: Option<&Path>,
    format: ReportFormat,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    if !(tol >= 0.0) {
        return Err(usage("--tol must be a nonnegative number"));
    }
    let loaded = document::load(file)?;
    let sol = &loaded.solution;
    let w = match weights {
        Some(p) => Some(document::load_weights(p, sol.rules())?),
        None => loaded.weights.clone(),
    };
    let start = Instant::now();
    let report = match form {
        CheckForm::Global => check_all(sol, tol, PentagonForm::Global)?,
        CheckForm::Component => check_all(sol, tol, PentagonForm::Component)?,
        CheckForm::Tensor => check_all_tensor(sol, tol)?,
        CheckForm::Be => {
            let w = w.ok_or_else(|| usage("--form be needs weights: pass --weights or use a document that lists them"))?;
            check_all_be(&normalize(sol, &w)?, tol)?
        }
    };
    let wall_ms = start.elapsed().as_millis();
    let summary = summarize(sol, &report, wall_ms);
    match format {
        ReportFormat::Json => {
            let text = serde_json::to_string_pretty(&summary).map_err(|e| Failure {
                code: EXIT_DATA,
                message: e.to_string(),
            })?;
            writeln!(out, "{text}")?;
        }
        ReportFormat::Text => write_text_report(&summary, form, out)?,
    }
    Ok(if report.passed { EXIT_PASS } else { EXIT_FAIL })
}

/// Report with the ten worst tuples named by colour.
pub fn summarize(sol: &FSolution, report: &ResidualReport, wall_ms: u128) -> CheckReport {
    let rules = sol.rules();
    CheckReport {
        overall: report.overall,
        tolerance: report.tolerance,
        passed: report.passed,
        worst: report
            .worst(10)
            .into_iter()
            .map(|(t, residual)| WorstTuple {
                tuple: t.iter().map(|&l| rules.name(l).to_string()).collect(),
                residual,
            })
            .collect(),
        vacuous_count: report.vacuous_count,
        tuples_checked: report.tuples_checked(),
        wall_ms,
    }
}

fn write_text_report(r: &CheckReport, form: CheckForm, out: &mut dyn Write) -> std::io::Result<()> {
    let form = format!("{form:?}").to_lowercase();
    writeln!(out, "form: {form}")?;
    writeln!(out, "overall residual: {:e}", r.overall)?;
    writeln!(out, "tolerance: {:e}", r.tolerance)?;
    writeln!(out, "status: {}", if r.passed { "PASS" } else { "FAIL" })?;
    writeln!(out, "tuples checked: {} (vacuous: {})", r.tuples_checked, r.vacuous_count)?;
    writeln!(out, "wall time: {} ms", r.wall_ms)?;
    if !r.worst.is_empty() {
        writeln!(out, "worst tuples:")?;
        for t in &r.worst {
            writeln!(out, "  ({})  {:e}", t.tuple.join(", "), t.residual)?;
        }
    }
    Ok(())
}

fn cmd_gen(kind: GenKind, n: Option<usize>, k: usize, fresh: bool, path: Option<&Path>, out: &mut dyn Write) -> Result<i32, Failure> {
    let sol = match kind {
        GenKind::Trivial => trivial_solution(),
        GenKind::Pointed => {
            let n = n.ok_or_else(|| usage("gen pointed needs --n"))?;
            if n == 0 || k >= n {
                return Err(usage(format!("gen pointed needs n >= 1 and k in 0..n (got n = {n}, k = {k})")));
            }
            pointed_solution(&GroupTable::cyclic(n)?, &cocycle_cyclic(n, k)?)?
        }
        GenKind::Fibonacci if fresh => solve_fibonacci(&SolveOptions::default())?,
        GenKind::Fibonacci => fibonacci_solution()?,
    };
    emit(&document::to_string(&sol, None)?, path, out)?;
    Ok(EXIT_PASS)
}

fn cmd_solve(
    rules_path: &Path,
    opts: &SolveOptions,
    path: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let rules = document::load_rules(rules_path)?;
    opts.validate().map_err(|e| usage(e.to_string()))?;
    let report = solve_multiplicity_free(&rules, opts)?;
    let converged = report.attempts.iter().filter(|a| a.converged).count();
    writeln!(
        err,
        "{converged} of {} starts converged to {:e}; {} distinct solutions",
        report.attempts.len(),
        opts.residual_target,
        report.results.len()
    )?;
    for (i, r) in report.results.iter().enumerate() {
        writeln!(
            err,
            "  #{i}: start {}, residual {:e}, {} iterations, {}{} invertible mixing maps",
            r.start,
            r.residual,
            r.iterations,
            if r.degenerate { "degenerate, " } else { "" },
            r.invertible_mixing
        )?;
    }
    let Some(best) = report.results.first() else {
        let residual = report.best_attempt().map_or(f64::INFINITY, |a| a.residual);
        writeln!(err, "no start converged; best residual {residual:e}")?;
        return Ok(EXIT_FAIL);
    };
    emit(&document::to_string(&best.solution, None)?, path, out)?;
    Ok(EXIT_PASS)
}

fn cmd_convert(file: &Path, weights: Option<&Path>, path: Option<&Path>, out: &mut dyn Write) -> Result<i32, Failure> {
    let loaded = document::load(file)?;
    let w: Option<WeightSystem> = match weights {
        Some(p) => Some(document::load_weights(p, loaded.solution.rules())?),
        None => loaded.weights,
    };
    emit(&document::to_string(&loaded.solution, w.as_ref())?, path, out)?;
    Ok(EXIT_PASS)
}
