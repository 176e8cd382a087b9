//! Exact enumeration of 3-cocycles on `Z/n` in exponent form.
//!
//! An exponent table `e: (Z/n)^3 -> Z/n` gives `w = exp(2 pi i e / n)`; the
//! cocycle identity becomes the linear system
//! `e(b,c,d) + e(a,b+c,d) + e(a,b,c) - e(a+b,c,d) - e(a,b,c+d) = 0`.

use crate::builders::group::{root_of_unity, Cocycle3, GroupTable};
use crate::error::{Error, Result};
use crate::solver::zn::{Diagonal, ZnMatrix};

/// Largest supported group order.
pub const MAX_ORDER: usize = 12;

/// Exponent tables are indexed `(a * n + b) * n + c`.
pub type ExponentTable = Vec<u64>;

/// Cocycles of `Z/n` up to coboundaries.
#[derive(Clone, Debug)]
pub struct CocycleSolutionSet {
    pub n: usize,
    /// Generators of the cocycle module, each with its additive order.
    pub basis: Vec<(ExponentTable, u64)>,
    /// Number of cohomology classes.
    pub class_count: u64,
    /// One cocycle per class; entry `k` is cohomologous to `cocycle_cyclic(n, k)`.
    pub representatives: Vec<Cocycle3>,
    coboundaries: Diagonal,
}

impl CocycleSolutionSet {
    /// Whether `e` is a coboundary `df` for some `f: G^2 -> Z/n`.
    pub fn is_coboundary(&self, e: &[u64]) -> bool {
        self.coboundaries.in_image(e)
    }

    /// All elements of the cocycle module; only sensible for tiny `n`.
    pub fn span(&self) -> Vec<ExponentTable> {
        let n = self.n as u64;
        let len = self.n.pow(3);
        let mut acc = vec![vec![0u64; len]];
        for (g, ord) in &self.basis {
            let mut next = Vec::with_capacity(acc.len() * *ord as usize);
            for v in &acc {
                for m in 0..*ord {
                    next.push(v.iter().zip(g).map(|(&x, &y)| (x + m * y) % n).collect());
                }
            }
            next.sort();
            next.dedup();
            acc = next;
        }
        acc
    }
}

fn idx(n: usize, a: usize, b: usize, c: usize) -> usize {
    (a * n + b) * n + c
}

/// The linearized cocycle condition: one row per `(a, b, c, d)`.
pub fn cocycle_matrix(n: usize) -> ZnMatrix {
    let g = |a: usize, b: usize| (a + b) % n;
    let mut rows = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut row = vec![0i64; n * n * n];
                    row[idx(n, b, c, d)] += 1;
                    row[idx(n, a, g(b, c), d)] += 1;
                    row[idx(n, a, b, c)] += 1;
                    row[idx(n, g(a, b), c, d)] -= 1;
                    row[idx(n, a, b, g(c, d))] -= 1;
                    if row.iter().any(|&v| v.rem_euclid(n as i64) != 0) {
                        rows.push(row.iter().map(|&v| v.rem_euclid(n as i64) as u64).collect());
                    }
                }
            }
        }
    }
    rows.sort();
    rows.dedup();
    ZnMatrix::from_rows(n as u64, n * n * n, rows)
}

/// The coboundary map `f -> df`, `df(a,b,c) = f(b,c) - f(a+b,c) + f(a,b+c) - f(a,b)`.
pub fn coboundary_matrix(n: usize) -> ZnMatrix {
    let mut m = ZnMatrix::zeros(n as u64, n * n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let r = idx(n, a, b, c);
                m.add(r, b * n + c, 1);
                m.add(r, ((a + b) % n) * n + c, -1);
                m.add(r, a * n + (b + c) % n, 1);
                m.add(r, a * n + b, -1);
            }
        }
    }
    m
}

/// Exponent table of `cocycle_cyclic(n, k)`.
pub fn cyclic_exponents(n: usize, k: usize) -> ExponentTable {
    (0..n * n * n)
        .map(|i| {
            let (a, b, c) = (i / (n * n), (i / n) % n, i % n);
            ((k % n) * a * ((b + c) / n) % n) as u64
        })
        .collect()
}

pub fn cocycle_from_exponents(n: usize, e: &[u64]) -> Result<Cocycle3> {
    let g = GroupTable::cyclic(n)?;
    Cocycle3::new(g, e.iter().map(|&x| root_of_unity(x as usize, n)).collect())
}

/// Solves the cocycle system over `Z/n` and picks one representative per class.
pub fn enumerate_cocycles(n: usize) -> Result<CocycleSolutionSet> {
    if n == 0 || n > MAX_ORDER {
        return Err(Error::OrderOutOfRange(n));
    }
    let cm = cocycle_matrix(n);
    let cocycles = cm.clone().diagonalize(true);
    let basis = cocycles.kernel();
    let coboundaries = coboundary_matrix(n).diagonalize(false);
    let class_count = cocycles
        .kernel_order()
        .div(&coboundaries.image_order())
        .value()
        .ok_or_else(|| Error::Solver("cohomology order is not an integer".into()))?;

    let mut representatives = Vec::new();
    let mut tables: Vec<ExponentTable> = Vec::new();
    for k in 0..n {
        let e = cyclic_exponents(n, k);
        if cm.apply(&e).iter().any(|&v| v != 0) {
            return Err(Error::Solver(format!("cyclic exponents for k = {k} fail the linear system")));
        }
        for prev in &tables {
            let diff: Vec<u64> = e.iter().zip(prev).map(|(&x, &y)| (x + n as u64 - y) % n as u64).collect();
            if coboundaries.in_image(&diff) {
                return Err(Error::Solver(format!("cyclic family k = {k} repeats a class")));
            }
        }
        representatives.push(cocycle_from_exponents(n, &e)?);
        tables.push(e);
    }
    if representatives.len() as u64 != class_count {
        return Err(Error::Solver(format!(
            "{class_count} classes, but the cyclic family gives {}",
            representatives.len()
        )));
    }
    Ok(CocycleSolutionSet {
        n,
        basis,
        class_count,
        representatives,
        coboundaries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::cocycle_cyclic;

    #[test]
    fn class_counts() {
        for n in 1..=6 {
            let s = enumerate_cocycles(n).unwrap();
            assert_eq!(s.class_count, n as u64);
            assert_eq!(s.representatives.len(), n);
        }
    }

    #[test]
    fn representatives_match_cyclic_family() {
        let s = enumerate_cocycles(3).unwrap();
        for (k, rep) in s.representatives.iter().enumerate() {
            assert_eq!(rep, &cocycle_cyclic(3, k).unwrap());
        }
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(enumerate_cocycles(0), Err(Error::OrderOutOfRange(0))));
        assert!(matches!(enumerate_cocycles(13), Err(Error::OrderOutOfRange(13))));
    }

    #[test]
    fn coboundaries_are_cocycles() {
        let n = 4;
        let cm = cocycle_matrix(n);
        let d = coboundary_matrix(n);
        for j in 0..n * n {
            let mut f = vec![0; n * n];
            f[j] = 1;
            assert!(cm.apply(&d.apply(&f)).iter().all(|&v| v == 0));
        }
    }
}
