//! Gauge-invariant data of multiplicity-free solutions.
//!
//! Rescaling the basis vector of each one-dimensional `V_ab^c` by `u_ab^c`
//! sends `F_abc^d|^x_y` to `F * u_ab^x u_xc^d / (u_bc^y u_ay^d)`. Positive real
//! rescalings act on log-magnitudes by a fixed integer matrix `G`; the
//! balanced gauge picks the point of the orbit where the log-magnitudes of
//! non-mixing blocks (those whose map `F_abc^d` is `1 x 1`) are smallest in
//! least squares, and then those of mixing blocks among the remaining
//! freedom. Its magnitudes do not depend on the starting gauge.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::block::{assemble_matrix, FBlock, FMap, FSolution};
use crate::error::{Error, Result};
use crate::linalg::{condition_number, eye, max_abs_diff, singular_values};
use crate::rules::{FusionRules, Label};
use crate::scalar::Scalar;

/// Magnitudes below this count as exact zeros.
pub const ZERO_MAGNITUDE: f64 = 1e-10;

/// Condition number above which a map counts as singular.
pub const SINGULAR_CONDITION: f64 = 1e10;

/// Smallest singular value, relative to `max(1, largest)`, below which a map
/// counts as singular. Solver roots at a double zero only reach
/// `sqrt(residual)`, far above machine precision.
pub const SINGULAR_VALUE: f64 = 1e-4;

fn require_multiplicity_free(sol: &FSolution) -> Result<()> {
    if sol.rules().is_multiplicity_free() {
        Ok(())
    } else {
        Err(Error::Unsupported("gauge fixing needs multiplicity-free rules".into()))
    }
}

/// Assembled square maps `F_abc^d` with a nonempty source, keyed by `(a, b, c, d)`.
pub fn assembled_maps(sol: &FSolution) -> Vec<([Label; 4], ndarray::Array2<Scalar>)> {
    let rules = sol.rules();
    let n = rules.size();
    let mut out = Vec::new();
    for k in 0..n.pow(4) {
        let abcd = [k / (n * n * n), (k / (n * n)) % n, (k / n) % n, k % n].map(Label);
        let [a, b, c, d] = abcd;
        let m = sol.map_or_zero(a, b, c, d);
        if m.source_shape().total_dim(rules) == 0 && m.target_shape().total_dim(rules) == 0 {
            continue;
        }
        out.push((abcd, assemble_matrix(rules, &m)));
    }
    out
}

fn is_singular(m: &ndarray::Array2<Scalar>) -> bool {
    if m.nrows() != m.ncols() {
        return true;
    }
    let sv = singular_values(m);
    let (Some(&top), Some(&low)) = (sv.first(), sv.last()) else {
        return false;
    };
    !(low > SINGULAR_VALUE * top.max(1.0)) || !(condition_number(m) <= SINGULAR_CONDITION)
}

/// Whether some assembled map is singular (for example has a zero block
/// that forces rank loss).
pub fn is_degenerate(sol: &FSolution) -> bool {
    assembled_maps(sol).iter().any(|(_, m)| is_singular(m))
}

/// Number of invertible assembled maps of size `2 x 2` or larger.
pub fn invertible_mixing_count(sol: &FSolution) -> usize {
    assembled_maps(sol)
        .iter()
        .filter(|(_, m)| m.nrows() >= 2 && !is_singular(m))
        .count()
}

/// Whether every assembled map is unitary to `tol`.
pub fn is_unitary(sol: &FSolution, tol: f64) -> bool {
    assembled_maps(sol).iter().all(|(_, m)| {
        m.nrows() == m.ncols() && {
            let mh = m.t().mapv(|v| v.conj());
            max_abs_diff(&mh.dot(m), &eye(m.nrows())) <= tol
        }
    })
}

fn pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.is_empty() {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    m.clone().pseudo_inverse(1e-10).expect("nonnegative epsilon")
}

/// Orthonormal basis of `ker m` as columns.
fn kernel(m: &DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    if m.nrows() == 0 {
        return DMatrix::identity(dim, dim);
    }
    let eig = (m.transpose() * m).symmetric_eigen();
    let top = eig.eigenvalues.amax().max(1.0);
    let cols: Vec<DVector<f64>> = (0..dim)
        .filter(|&i| eig.eigenvalues[i] <= 1e-10 * top)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(dim, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

fn module_index(rules: &FusionRules) -> HashMap<[Label; 3], usize> {
    let mut modules = HashMap::new();
    for (a, b, c, _) in rules.nonzero() {
        let k = modules.len();
        modules.insert([a, b, c], k);
    }
    modules
}

/// Exponents of the vertex rescalings `u_ab^x u_xc^d / (u_bc^y u_ay^d)`.
fn gauge_row(modules: &HashMap<[Label; 3], usize>, [a, b, c, d, x, y]: [Label; 6]) -> Vec<f64> {
    let mut row = vec![0.0; modules.len()];
    row[modules[&[a, b, x]]] += 1.0;
    row[modules[&[x, c, d]]] += 1.0;
    row[modules[&[b, c, y]]] -= 1.0;
    row[modules[&[a, y, d]]] -= 1.0;
    row
}

/// The balanced gauge followed by a unimodular gauge making a maximal set of
/// blocks with independent gauge weights real and positive (one-by-one maps
/// first, then mixing entries, each in label order).
pub fn canonical_gauge(sol: &FSolution) -> Result<FSolution> {
    let bal = balanced_gauge(sol)?;
    let rules = bal.rules();
    let modules = module_index(rules);
    let mixing: std::collections::BTreeSet<[Label; 4]> = assembled_maps(&bal)
        .into_iter()
        .filter(|(_, m)| m.nrows() >= 2)
        .map(|(k, _)| k)
        .collect();
    let mut live: Vec<&FBlock> = bal
        .blocks()
        .filter(|b| b.coords().iter().next().is_some_and(|v| v.norm() > ZERO_MAGNITUDE))
        .collect();
    live.sort_by_key(|b| mixing.contains(&b.outer()));
    let mut reduced: Vec<Vec<f64>> = Vec::new();
    let mut rows = Vec::new();
    let mut phases = Vec::new();
    for blk in live {
        let row = gauge_row(&modules, blk.labels());
        let mut w = row.clone();
        for r in &reduced {
            let p = r.iter().position(|v| v.abs() > 1e-9).expect("reduced rows are nonzero");
            let f = w[p] / r[p];
            w.iter_mut().zip(r).for_each(|(a, b)| *a -= f * b);
        }
        if w.iter().any(|v| v.abs() > 1e-9) {
            reduced.push(w);
            rows.push(row);
            phases.push(blk.coords().iter().next().expect("scalar block").arg());
        }
    }
    if rows.is_empty() {
        return Ok(bal);
    }
    let g = DMatrix::from_fn(rows.len(), modules.len(), |r, c| rows[r][c]);
    let theta = -pinv(&g) * DVector::from_vec(phases);
    rescale(&bal, |labels| {
        let t: f64 = gauge_row(&modules, labels).iter().zip(theta.iter()).map(|(r, t)| r * t).sum();
        Scalar::from_polar(1.0, t)
    })
}

/// The solution transformed into the balanced positive gauge.
pub fn balanced_gauge(sol: &FSolution) -> Result<FSolution> {
    require_multiplicity_free(sol)?;
    let rules = sol.rules();
    let modules = module_index(rules);
    let mixing: std::collections::BTreeSet<[Label; 4]> = assembled_maps(sol)
        .into_iter()
        .filter(|(_, m)| m.nrows() >= 2)
        .map(|(k, _)| k)
        .collect();
    let blocks: Vec<&FBlock> = sol.blocks().collect();
    let row_of = |blk: &FBlock| gauge_row(&modules, blk.labels());
    let live: Vec<usize> = (0..blocks.len())
        .filter(|&i| blocks[i].coords().iter().next().is_some_and(|v| v.norm() > ZERO_MAGNITUDE))
        .collect();
    let (mix, non): (Vec<usize>, Vec<usize>) = live.iter().partition(|&&i| mixing.contains(&blocks[i].outer()));
    let stack = |idx: &[usize]| {
        let g = DMatrix::from_fn(idx.len(), modules.len(), |r, c| row_of(blocks[idx[r]])[c]);
        let l = DVector::from_fn(idx.len(), |r, _| blocks[idx[r]].coords().iter().next().unwrap().norm().ln());
        (g, l)
    };
    let (gn, ln) = stack(&non);
    let (gm, lm) = stack(&mix);
    let g1 = -pinv(&gn) * &ln;
    let k = kernel(&gn, modules.len());
    let g = if k.ncols() == 0 || mix.is_empty() {
        g1
    } else {
        let gmk = &gm * &k;
        let h = -pinv(&gmk) * (&lm + &gm * &g1);
        &g1 + &k * h
    };
    let mut out = FSolution::new(rules.clone());
    for blk in &blocks {
        let shift: f64 = row_of(blk).iter().zip(g.iter()).map(|(r, gi)| r * gi).sum();
        let scale = shift.exp();
        let coords = blk.coords().mapv(|v| v * scale);
        out.insert_block(FBlock::new(rules, blk.labels(), coords)?)?;
    }
    Ok(out)
}

/// Sorted entry magnitudes in the balanced gauge.
pub fn fingerprint(sol: &FSolution) -> Result<Vec<f64>> {
    let bal = balanced_gauge(sol)?;
    let mut m: Vec<f64> = bal
        .blocks()
        .flat_map(|b| b.coords().iter().map(|v| v.norm()).collect::<Vec<_>>())
        .collect();
    m.sort_by(f64::total_cmp);
    Ok(m)
}

/// Max-abs distance of two fingerprints, infinite when the lengths differ.
pub fn fingerprint_distance(p: &[f64], q: &[f64]) -> f64 {
    if p.len() != q.len() {
        return f64::INFINITY;
    }
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Assembled maps of size `2 x 2` or larger in the balanced gauge.
pub fn mixing_matrices(sol: &FSolution) -> Result<Vec<([Label; 4], ndarray::Array2<Scalar>)>> {
    Ok(assembled_maps(&balanced_gauge(sol)?)
        .into_iter()
        .filter(|(_, m)| m.nrows() >= 2)
        .collect())
}

/// `F` with every block of `F_abc^d` scaled by `s(a, b, c, d, x, y)`.
pub fn rescale(sol: &FSolution, s: impl Fn([Label; 6]) -> Scalar) -> Result<FSolution> {
    let rules = sol.rules();
    let mut out = FSolution::new(rules.clone());
    for m in sol.maps() {
        let mut fm = FMap::new(m.labels());
        for blk in m.blocks() {
            let q = s(blk.labels());
            fm.insert(FBlock::new(rules, blk.labels(), blk.coords().mapv(|v| v * q))?)?;
        }
        out.insert_map(fm)?;
    }
    Ok(out)
}

/// Applies the gauge transformation `u: (a, b, c) -> nonzero scalar`.
pub fn apply_gauge(sol: &FSolution, u: impl Fn(Label, Label, Label) -> Scalar) -> Result<FSolution> {
    rescale(sol, |[a, b, c, d, x, y]| u(a, b, x) * u(x, c, d) / (u(b, c, y) * u(a, y, d)))
}
