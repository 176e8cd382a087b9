//! The Fibonacci solution on `{1, tau}` with `tau (x) tau = 1 (+) tau`.
//!
//! The blocks are found by the solver ([`solve_fibonacci`]) and cached in
//! `data/fibonacci.json`; [`fibonacci_solution`] loads the cache and checks it.

use crate::block::FSolution;
use crate::cli::document;
use crate::error::{Error, Result};
use crate::pentagon::{check_all, Form};
use crate::rules::FusionRules;
use crate::solver::gauge::{canonical_gauge, is_unitary};
use crate::solver::{solve_multiplicity_free, SolveOptions};

/// Residual bound the cached solution must meet.
pub const FIBONACCI_TOL: f64 = 1e-9;

const CACHE: &str = include_str!("../../data/fibonacci.json");

/// The cached solver output, checked against the relation.
pub fn fibonacci_solution() -> Result<FSolution> {
    let sol = document::from_str(CACHE)?.solution;
    if sol.rules() != &FusionRules::fibonacci() {
        return Err(Error::Solver("cached Fibonacci file has different fusion rules".into()));
    }
    let report = check_all(&sol, FIBONACCI_TOL, Form::Component)?;
    if !report.passed {
        return Err(Error::Solver(format!("cached Fibonacci solution has residual {:e}", report.overall)));
    }
    Ok(sol)
}

/// Runs the solver and returns, in the canonical gauge, the first ranked
/// non-degenerate result that is unitary there.
pub fn solve_fibonacci(opts: &SolveOptions) -> Result<FSolution> {
    let report = solve_multiplicity_free(&FusionRules::fibonacci(), opts)?;
    for r in report.results.iter().filter(|r| r.converged && !r.degenerate) {
        let sol = canonical_gauge(&r.solution)?;
        if is_unitary(&sol, 1e-8) {
            return Ok(sol);
        }
    }
    let converged = report.attempts.iter().filter(|a| a.converged).count();
    let best = report.best_attempt().map_or(f64::INFINITY, |a| a.residual);
    Err(Error::Solver(format!(
        "no unitary non-degenerate solution among {} starts ({converged} converged, best residual {best:e})",
        report.attempts.len()
    )))
}
