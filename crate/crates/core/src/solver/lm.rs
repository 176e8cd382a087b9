//! Damped least squares for multiplicity-free fusion rules.
//!
//! Unknowns are the scalar blocks `F_abc^d|^x_y` whose four modules are all
//! one-dimensional. Each live nine-label tuple gives one complex residual
//! `sum_z F_bcd^p|^z_q F_azd^e|^y_p F_abc^y|^x_z - F_xcd^e|^y_q F_abq^e|^x_p`;
//! real and imaginary parts of unknowns and residuals are treated as separate
//! real quantities.
//!
//! Plain least squares on these residuals drifts into solutions with zero
//! blocks from almost every start. Each start is therefore first run on an
//! equivalent system for invertible solutions: every square map gets an
//! unknown `h` with `det(F_abc^d) h = 1`, residuals whose right-hand side is a
//! product of two one-by-one blocks `f_i f_j` are rewritten as
//! `(sum_z ...) h_i h_j - 1`, and a gauge-fixing set of one-by-one blocks is
//! pinned to 1. Starts that fail there are rerun on the plain residuals,
//! where degenerate solutions are found.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::block::{FBlock, FSolution};
use crate::error::{Error, Result};
use crate::pentagon::{all_boundaries, live_inner_tuples};
use crate::rules::{FusionRules, Label};
use crate::scalar::{Scalar, ZERO};
use crate::solver::gauge::{fingerprint, fingerprint_distance, invertible_mixing_count, is_degenerate};

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub max_iterations: usize,
    /// Largest accepted per-tuple residual.
    pub residual_target: f64,
    pub damping_initial: f64,
    pub damping_up: f64,
    pub damping_down: f64,
    pub starts: usize,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iterations: 400,
            residual_target: 1e-10,
            damping_initial: 1e-3,
            damping_up: 3.0,
            damping_down: 2.0,
            starts: 50,
            seed: 0,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = self.max_iterations > 0
            && self.starts > 0
            && self.damping_initial > 0.0
            && self.damping_up > 1.0
            && self.damping_down > 1.0;
        if !positive {
            return Err(Error::Validation("solver options must be positive, damping factors above 1".into()));
        }
        if !(self.residual_target > 0.0 && self.residual_target.is_finite()) {
            return Err(Error::Validation("residual target must be positive and finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub solution: FSolution,
    /// Largest per-tuple residual modulus.
    pub residual: f64,
    pub iterations: usize,
    pub start: usize,
    pub converged: bool,
    pub degenerate: bool,
    pub invertible_mixing: usize,
    pub fingerprint: Vec<f64>,
}

/// Converged results, deduplicated and ranked, plus every start's outcome.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub results: Vec<SolveResult>,
    /// One entry per start, in start order.
    pub attempts: Vec<SolveResult>,
}

impl SolveReport {
    /// The start with the smallest residual, converged or not.
    pub fn best_attempt(&self) -> Option<&SolveResult> {
        self.attempts
            .iter()
            .min_by(|a, b| a.residual.total_cmp(&b.residual).then(a.start.cmp(&b.start)))
    }
}

/// `sum_k coef_k * prod v[factors_k] + constant`.
#[derive(Clone, Debug)]
struct Polynomial {
    terms: Vec<(Scalar, Vec<usize>)>,
    constant: Scalar,
}

impl Polynomial {
    fn eval(&self, v: &[Scalar]) -> Scalar {
        self.terms
            .iter()
            .map(|(c, idx)| idx.iter().fold(*c, |acc, &i| acc * v[i]))
            .sum::<Scalar>()
            + self.constant
    }

    fn gradient(&self, v: &[Scalar], out: &mut Vec<(usize, Scalar)>) {
        out.clear();
        for (c, idx) in &self.terms {
            for (skip, &k) in idx.iter().enumerate() {
                let d = idx
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != skip)
                    .fold(*c, |acc, (_, &i)| acc * v[i]);
                out.push((k, d));
            }
        }
    }
}

/// The polynomial system of a multiplicity-free rule set.
///
#[derive(Clone, Debug)]
pub struct System {
    rules: FusionRules,
    unknowns: Vec<[Label; 6]>,
    equations: Vec<Polynomial>,
    /// Residuals of the invertible system; the determinant equations
    /// `det(F_abc^d) h - 1` come first.
    invertible: Vec<Polynomial>,
    maps: usize,
}

impl System {
    pub fn new(rules: &FusionRules) -> Result<Self> {
        if !rules.is_multiplicity_free() {
            return Err(Error::Unsupported("solver needs multiplicity-free rules".into()));
        }
        let n = rules.size();
        let mut unknowns = Vec::new();
        for k in 0..n.pow(6) {
            let mut l = [Label(0); 6];
            let mut r = k;
            for slot in l.iter_mut().rev() {
                *slot = Label(r % n);
                r /= n;
            }
            if crate::block::block_shape(rules, l).iter().all(|&d| d == 1) {
                unknowns.push(l);
            }
        }
        let index = index_of(&unknowns);
        let one = Scalar::new(1.0, 0.0);
        let mut equations = Vec::new();
        for bd in all_boundaries(n) {
            let [a, b, c, d, e] = bd;
            for [x, y, p, q] in live_inner_tuples(rules, bd) {
                let mut terms: Vec<(Scalar, Vec<usize>)> = rules
                    .labels()
                    .filter_map(|z| {
                        Some((
                            one,
                            vec![
                                *index.get(&[b, c, d, p, z, q])?,
                                *index.get(&[a, z, d, e, y, p])?,
                                *index.get(&[a, b, c, y, x, z])?,
                            ],
                        ))
                    })
                    .collect();
                if let (Some(&i), Some(&j)) = (index.get(&[x, c, d, e, y, q]), index.get(&[a, b, q, e, x, p])) {
                    terms.push((-one, vec![i, j]));
                }
                equations.push(Polynomial { terms, constant: ZERO });
            }
        }
        let (mut invertible, reciprocal) = determinant_equations(&unknowns, &index);
        let maps = invertible.len();
        invertible.extend(equations.iter().map(|p| cancel_common_factors(divide_right_side(p, &reciprocal))));
        invertible.extend(gauge_fixing_blocks(rules, &unknowns).into_iter().map(|k| Polynomial {
            terms: vec![(one, vec![k])],
            constant: -one,
        }));
        Ok(Self {
            rules: rules.clone(),
            unknowns,
            equations,
            invertible,
            maps,
        })
    }

    /// Number of block unknowns.
    pub fn unknown_count(&self) -> usize {
        self.unknowns.len()
    }

    /// Number of residuals (live nine-label tuples).
    pub fn equation_count(&self) -> usize {
        self.equations.len()
    }

    pub fn unknowns(&self) -> &[[Label; 6]] {
        &self.unknowns
    }

    /// Complex residuals at the block values `f`.
    pub fn residuals(&self, f: &[Scalar]) -> Vec<Scalar> {
        self.equations.iter().map(|p| p.eval(f)).collect()
    }

    /// Residuals and complex Jacobian rows, of the invertible system when
    /// `invertible` (then `v` also holds one `h` per square map).
    fn evaluate(&self, v: &[Scalar], invertible: bool, want_jacobian: bool) -> (Vec<Scalar>, Vec<Vec<(usize, Scalar)>>) {
        let eqs = if invertible { &self.invertible } else { &self.equations };
        let mut rows = Vec::new();
        if want_jacobian {
            let mut grad = Vec::new();
            for p in eqs {
                p.gradient(v, &mut grad);
                rows.push(grad.clone());
            }
        }
        (eqs.iter().map(|p| p.eval(v)).collect(), rows)
    }

    /// Block values followed by `1 / det` of every square map.
    fn extend(&self, f: &[Scalar]) -> Vec<Scalar> {
        let m = f.len();
        let mut v = f.to_vec();
        for p in &self.invertible[..self.maps] {
            let det: Scalar = p.terms.iter().map(|(c, idx)| idx.iter().filter(|&&i| i < m).fold(*c, |acc, &i| acc * f[i])).sum();
            v.push(if det.norm() > 1e-8 { det.inv() } else { Scalar::new(1e8, 0.0) });
        }
        v
    }

    /// Real pentagon residuals `[Re r; Im r]` at `x = [Re f; Im f]`.
    pub fn real_residuals(&self, x: &[f64]) -> DVector<f64> {
        stack(&self.residuals(&to_complex(x)))
    }

    /// Real Jacobian of [`Self::real_residuals`].
    pub fn real_jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let f = to_complex(x);
        real_jacobian(&self.evaluate(&f, false, true).1, f.len())
    }

    pub fn to_solution(&self, f: &[Scalar]) -> Result<FSolution> {
        let mut sol = FSolution::new(self.rules.clone());
        for (&l, &v) in self.unknowns.iter().zip(f) {
            sol.insert_block(FBlock::scalar(&self.rules, l, v)?)?;
        }
        Ok(sol)
    }
}

/// Leibniz expansion of each square map's determinant, times its own `h`,
/// and the `h` of every one-by-one block.
fn determinant_equations(
    unknowns: &[[Label; 6]],
    index: &HashMap<[Label; 6], usize>,
) -> (Vec<Polynomial>, HashMap<usize, usize>) {
    let mut maps: BTreeMap<[Label; 4], (Vec<Label>, Vec<Label>)> = BTreeMap::new();
    for &[a, b, c, d, x, y] in unknowns {
        let e = maps.entry([a, b, c, d]).or_default();
        if !e.0.contains(&x) {
            e.0.push(x);
        }
        if !e.1.contains(&y) {
            e.1.push(y);
        }
    }
    let m = unknowns.len();
    let mut out = Vec::new();
    let mut reciprocal = HashMap::new();
    for ([a, b, c, d], (xs, ys)) in maps {
        if xs.len() != ys.len() || xs.len() > MAX_DETERMINANT {
            continue;
        }
        let h = m + out.len();
        let mut terms = Vec::new();
        for (perm, sign) in permutations(xs.len()) {
            let factors: Option<Vec<usize>> = (0..xs.len()).map(|i| index.get(&[a, b, c, d, xs[perm[i]], ys[i]]).copied()).collect();
            if let Some(mut f) = factors {
                f.push(h);
                terms.push((Scalar::new(sign, 0.0), f));
            }
        }
        if terms.is_empty() {
            continue;
        }
        if xs.len() == 1 {
            reciprocal.insert(terms[0].1[0], h);
        }
        out.push(Polynomial { terms, constant: Scalar::new(-1.0, 0.0) });
    }
    (out, reciprocal)
}

/// Removes unknowns that divide every term of a polynomial without constant.
fn cancel_common_factors(mut p: Polynomial) -> Polynomial {
    if p.terms.len() < 2 || p.constant != ZERO {
        return p;
    }
    let mut common = p.terms[0].1.clone();
    for (_, idx) in &p.terms[1..] {
        let mut rest = idx.clone();
        common.retain(|k| match rest.iter().position(|r| r == k) {
            Some(i) => {
                rest.swap_remove(i);
                true
            }
            None => false,
        });
    }
    for (_, idx) in &mut p.terms {
        for k in &common {
            let i = idx.iter().position(|r| r == k).expect("common factor is present");
            idx.swap_remove(i);
        }
    }
    p
}

/// `L - f_i f_j` becomes `L h_i h_j - 1` when both blocks have reciprocals.
fn divide_right_side(p: &Polynomial, reciprocal: &HashMap<usize, usize>) -> Polynomial {
    let Some((last, lhs)) = p.terms.split_last() else {
        return p.clone();
    };
    let hs = match last.1.as_slice() {
        [i, j] => reciprocal.get(i).zip(reciprocal.get(j)),
        _ => None,
    };
    match hs {
        Some((&hi, &hj)) => Polynomial {
            terms: lhs
                .iter()
                .map(|(c, idx)| (*c, idx.iter().copied().chain([hi, hj]).collect()))
                .collect(),
            constant: last.0,
        },
        None => p.clone(),
    }
}

/// A maximal set of one-by-one blocks whose gauge weights are independent;
/// any solution with invertible maps is gauge equivalent to one where these
/// blocks are 1.
fn gauge_fixing_blocks(rules: &FusionRules, unknowns: &[[Label; 6]]) -> Vec<usize> {
    let mut vertices: BTreeMap<[Label; 3], usize> = BTreeMap::new();
    for (a, b, c, _) in rules.nonzero() {
        let k = vertices.len();
        vertices.insert([a, b, c], k);
    }
    let mut counts: BTreeMap<[Label; 4], usize> = BTreeMap::new();
    for &[a, b, c, d, ..] in unknowns {
        *counts.entry([a, b, c, d]).or_default() += 1;
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut chosen = Vec::new();
    for (k, &[a, b, c, d, x, y]) in unknowns.iter().enumerate() {
        if counts[&[a, b, c, d]] != 1 {
            continue;
        }
        let mut w = vec![0.0; vertices.len()];
        w[vertices[&[a, b, x]]] += 1.0;
        w[vertices[&[x, c, d]]] += 1.0;
        w[vertices[&[b, c, y]]] -= 1.0;
        w[vertices[&[a, y, d]]] -= 1.0;
        for row in &basis {
            let p = row.iter().position(|v| v.abs() > 1e-9).expect("basis rows are nonzero");
            let f = w[p] / row[p];
            w.iter_mut().zip(row).for_each(|(a, b)| *a -= f * b);
        }
        if w.iter().any(|v| v.abs() > 1e-9) {
            basis.push(w);
            chosen.push(k);
        }
    }
    chosen
}

/// Largest map whose determinant is expanded.
const MAX_DETERMINANT: usize = 5;

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    if n == 0 {
        return vec![(Vec::new(), 1.0)];
    }
    let mut out = Vec::new();
    for (p, s) in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            // inserting at `pos` passes `n - 1 - pos` larger-index swaps
            let sign = if (n - 1 - pos).is_multiple_of(2) { s } else { -s };
            out.push((q, sign));
        }
    }
    out
}

fn index_of(unknowns: &[[Label; 6]]) -> HashMap<[Label; 6], usize> {
    unknowns.iter().enumerate().map(|(i, &l)| (l, i)).collect()
}

fn real_jacobian(rows: &[Vec<(usize, Scalar)>], m: usize) -> DMatrix<f64> {
    let t = rows.len();
    let mut j = DMatrix::zeros(2 * t, 2 * m);
    for (row, entries) in rows.iter().enumerate() {
        for &(k, c) in entries {
            // Residuals are holomorphic: d/dRe = c, d/dIm = i c.
            j[(row, k)] += c.re;
            j[(row, m + k)] -= c.im;
            j[(t + row, k)] += c.im;
            j[(t + row, m + k)] += c.re;
        }
    }
    j
}

fn to_real(f: &[Scalar]) -> Vec<f64> {
    f.iter().map(|v| v.re).chain(f.iter().map(|v| v.im)).collect()
}

fn to_complex(x: &[f64]) -> Vec<Scalar> {
    let m = x.len() / 2;
    (0..m).map(|k| Scalar::new(x[k], x[m + k])).collect()
}

fn stack(r: &[Scalar]) -> DVector<f64> {
    let t = r.len();
    DVector::from_fn(2 * t, |i, _| if i < t { r[i].re } else { r[i - t].im })
}

fn max_modulus(r: &[Scalar]) -> f64 {
    r.iter().map(|v| if v.is_nan() { f64::INFINITY } else { v.norm() }).fold(0.0, f64::max)
}

/// Levenberg-Marquardt from `f`, on the invertible system when `invertible`. Stops once the plain residual is within the target; returns the
/// final unknowns and the iteration count.
fn levenberg_marquardt(
    sys: &System,
    invertible: bool,
    f: Vec<Scalar>,
    opts: &SolveOptions,
    budget: usize,
) -> (Vec<Scalar>, usize) {
    let m = f.len();
    let mut x = to_real(&f);
    let mut lambda = opts.damping_initial;
    let mut r = stack(&sys.evaluate(&f, invertible, false).0);
    let mut cost = r.norm_squared();
    let mut iterations = 0;
    while iterations < budget && max_modulus(&sys.residuals(&to_complex(&x))) > opts.residual_target {
        iterations += 1;
        let j = real_jacobian(&sys.evaluate(&to_complex(&x), invertible, true).1, m);
        let jt = j.transpose();
        let a = &jt * &j;
        let g = &jt * &r;
        let mut accepted = false;
        while lambda < 1e16 {
            let mut damped = a.clone();
            for i in 0..damped.nrows() {
                damped[(i, i)] += lambda;
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= opts.damping_up;
                continue;
            };
            let step = chol.solve(&(-&g));
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rt = stack(&sys.evaluate(&to_complex(&trial), invertible, false).0);
            let ct = rt.norm_squared();
            if ct < cost {
                x = trial;
                r = rt;
                cost = ct;
                lambda = (lambda / opts.damping_down).max(1e-15);
                accepted = true;
                break;
            }
            lambda *= opts.damping_up;
        }
        if !accepted {
            break;
        }
    }
    (to_complex(&x), iterations)
}

/// One start: the invertible system, then plain residuals from its result.
/// Only when the invertible system has no nearby root does the plain system
/// run from the start point.
fn run_start(sys: &System, f0: &[Scalar], opts: &SolveOptions) -> (Vec<Scalar>, f64, usize) {
    let (mut f, it) = levenberg_marquardt(sys, true, sys.extend(f0), opts, opts.max_iterations);
    let invertible = max_modulus(&sys.evaluate(&f, true, false).0);
    f.truncate(sys.unknown_count());
    let res = max_modulus(&sys.residuals(&f));
    if res <= opts.residual_target {
        return (f, res, it);
    }
    if invertible <= 1e-6 && f.iter().all(|v| crate::scalar::is_finite(*v)) {
        let (g, it2) = levenberg_marquardt(sys, false, f, opts, opts.max_iterations);
        let res = max_modulus(&sys.residuals(&g));
        return (g, res, it + it2);
    }
    let (g, it2) = levenberg_marquardt(sys, false, f0.to_vec(), opts, opts.max_iterations);
    let res = max_modulus(&sys.residuals(&g));
    (g, res, it + it2)
}

/// Start points drawn sequentially from the seed, entries in `[-1, 1]^2`.
pub fn start_points(sys: &System, opts: &SolveOptions) -> Vec<Vec<Scalar>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    (0..opts.starts)
        .map(|_| (0..sys.unknown_count()).map(|_| crate::random::scalar(&mut rng)).collect())
        .collect()
}

/// Multi-start search for solutions of the component-form relation.
pub fn solve_multiplicity_free(rules: &FusionRules, opts: &SolveOptions) -> Result<SolveReport> {
    opts.validate()?;
    let sys = System::new(rules)?;
    let starts = start_points(&sys, opts);
    let attempts = starts
        .into_par_iter()
        .enumerate()
        .map(|(start, f0)| {
            let (f, residual, iterations) = run_start(&sys, &f0, opts);
            let solution = sys.to_solution(&f)?;
            let converged = residual <= opts.residual_target;
            let degenerate = is_degenerate(&solution);
            let invertible_mixing = invertible_mixing_count(&solution);
            let fingerprint = if residual.is_finite() { fingerprint(&solution)? } else { Vec::new() };
            Ok(SolveResult {
                solution,
                residual,
                iterations,
                start,
                converged,
                degenerate,
                invertible_mixing,
                fingerprint,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut ranked: Vec<&SolveResult> = attempts.iter().filter(|r| r.converged).collect();
    ranked.sort_by(|a, b| {
        a.degenerate
            .cmp(&b.degenerate)
            .then(b.invertible_mixing.cmp(&a.invertible_mixing))
            .then(a.residual.total_cmp(&b.residual))
            .then(a.start.cmp(&b.start))
    });
    let mut results: Vec<SolveResult> = Vec::new();
    for r in ranked {
        let dup = results
            .iter()
            .any(|k| k.degenerate == r.degenerate && fingerprint_distance(&k.fingerprint, &r.fingerprint) <= 1e-6);
        if !dup {
            results.push(r.clone());
        }
    }
    Ok(SolveReport { results, attempts })
}

/// Max-abs deviation of the analytic real Jacobian from central differences
/// (step `1e-6`) at `point`.
pub fn jacobian_check(rules: &FusionRules, point: &[Scalar]) -> Result<f64> {
    let sys = System::new(rules)?;
    if point.len() != sys.unknown_count() {
        return Err(Error::Shape {
            expected: vec![sys.unknown_count()],
            found: vec![point.len()],
        });
    }
    let x = to_real(point);
    let j = sys.real_jacobian(&x);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for k in 0..x.len() {
        let (mut xp, mut xm) = (x.clone(), x.clone());
        xp[k] += h;
        xm[k] -= h;
        let d = (sys.real_residuals(&xp) - sys.real_residuals(&xm)) / (2.0 * h);
        for (i, v) in d.iter().enumerate() {
            worst = worst.max((v - j[(i, k)]).abs());
        }
    }
    Ok(worst)
}

/// A random point with entries in `[-1, 1] + i [-1, 1]`.
pub fn random_point(rules: &FusionRules, rng: &mut impl Rng) -> Result<Vec<Scalar>> {
    let sys = System::new(rules)?;
    Ok((0..sys.unknown_count()).map(|_| crate::random::scalar(rng)).collect())
}
