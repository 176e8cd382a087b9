//! Solutions built from skeletal associator data as `F = A ; alpha^-1 ; B^-1`.
//!
//! Modules are `V_ab^c = Hom(c -> b (x) a)`. For colours `a, b, c, d`:
//!
//! * the right-nested space `Hom(d -> c (x) (b (x) a))` has basis
//!   `f_i ; (id_c (x) g_j)` with `f_i` in `V_xc^d`, `g_j` in `V_ab^x`, ordered
//!   lexicographically by `(x, i, j)`;
//! * the left-nested space `Hom(d -> (c (x) b) (x) a)` has basis
//!   `f_r ; (g_s (x) id_a)` with `f_r` in `V_ay^d`, `g_s` in `V_bc^y`, ordered by
//!   `(y, r, s)`.
//!
//! `A` sends the summand basis `e_i (x) f_j` of `(+)_x V_xc^d (x) V_ab^x` to
//! the right-nested basis element with the same `(x, i, j)`, `B` likewise for
//! the left-nested side. The associator `alpha_{c,b,a}` acts on
//! `Hom(d -> (c (x) b) (x) a)` by post-composition and is stored as the matrix
//! from the left-nested basis (columns) to the right-nested one (rows).

use std::collections::{BTreeMap, HashMap};

use ndarray::Array2;

use crate::block::{FMap, FSolution};
use crate::builders::group::Cocycle3;
use crate::error::{Error, Result};
use crate::linalg::{condition_number, eye, inverse};
use crate::rules::{FusionRules, Label};
use crate::scalar::{Scalar, ZERO};

/// `(summand label, i, j)` basis of a two-step nested Hom space.
pub type NestedIndex = (Label, usize, usize);

/// Basis of `(+)_x V_{x, outer}^top (x) V_{inner}^x`, i.e. nested Hom spaces with
/// `first(x) = dim` of the outer factor and `second(x)` of the inner one.
fn nested_basis(rules: &FusionRules, dims: impl Fn(Label) -> (usize, usize)) -> Vec<NestedIndex> {
    let mut out = Vec::new();
    for x in rules.labels() {
        let (n, m) = dims(x);
        for i in 0..n {
            for j in 0..m {
                out.push((x, i, j));
            }
        }
    }
    out
}

/// Right-nested basis of `Hom(d -> c (x) (b (x) a))`.
pub fn right_basis(rules: &FusionRules, [a, b, c, d]: [Label; 4]) -> Vec<NestedIndex> {
    nested_basis(rules, |x| (rules.dim(x, c, d), rules.dim(a, b, x)))
}

/// Left-nested basis of `Hom(d -> (c (x) b) (x) a)`.
pub fn left_basis(rules: &FusionRules, [a, b, c, d]: [Label; 4]) -> Vec<NestedIndex> {
    nested_basis(rules, |y| (rules.dim(a, y, d), rules.dim(b, c, y)))
}

/// Associator blocks `alpha_{c,b,a}` restricted to `Hom(d -> .)`, keyed by
/// `(c, b, a, d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SkeletalAssociator {
    rules: FusionRules,
    alpha: BTreeMap<[Label; 4], Array2<Scalar>>,
}

impl SkeletalAssociator {
    pub fn new(rules: FusionRules) -> Self {
        Self {
            rules,
            alpha: BTreeMap::new(),
        }
    }

    pub fn rules(&self) -> &FusionRules {
        &self.rules
    }

    /// Sets `alpha_{c,b,a}` on `Hom(d -> .)`.
    pub fn insert(&mut self, cbad: [Label; 4], m: Array2<Scalar>) -> Result<()> {
        let [c, b, a, d] = cbad;
        let rows = right_basis(&self.rules, [a, b, c, d]).len();
        let cols = left_basis(&self.rules, [a, b, c, d]).len();
        if m.dim() != (rows, cols) {
            return Err(Error::Shape {
                expected: vec![rows, cols],
                found: vec![m.nrows(), m.ncols()],
            });
        }
        self.alpha.insert(cbad, m);
        Ok(())
    }

    pub fn get(&self, cbad: [Label; 4]) -> Option<&Array2<Scalar>> {
        self.alpha.get(&cbad)
    }

    /// The block, or the unique empty map / zero map when absent.
    fn block_or_zero(&self, cbad: [Label; 4]) -> Array2<Scalar> {
        self.alpha.get(&cbad).cloned().unwrap_or_else(|| {
            let [c, b, a, d] = cbad;
            let rows = right_basis(&self.rules, [a, b, c, d]).len();
            let cols = left_basis(&self.rules, [a, b, c, d]).len();
            Array2::from_elem((rows, cols), ZERO)
        })
    }

    /// Condition number of every stored block.
    pub fn condition_numbers(&self) -> BTreeMap<[Label; 4], f64> {
        self.alpha
            .iter()
            .map(|(k, m)| (*k, if m.nrows() == m.ncols() { condition_number(m) } else { f64::INFINITY }))
            .collect()
    }

    /// Identity associators: every `alpha` block is the identity matrix.
    pub fn identity(rules: FusionRules) -> Result<Self> {
        let mut out = Self::new(rules);
        for cbad in quadruples(out.rules.size()) {
            let [c, b, a, d] = cbad;
            let n = right_basis(&out.rules, [a, b, c, d]).len();
            if n > 0 {
                out.insert(cbad, eye(n))?;
            }
        }
        Ok(out)
    }

    /// Associators of the pointed category of `omega`'s group:
    /// `alpha_{c,b,a} = omega(c, b, a)`.
    pub fn pointed(omega: &Cocycle3) -> Result<Self> {
        let g = omega.group();
        let mut out = Self::new(super::pointed_rules(g));
        for c in 0..g.order() {
            for b in 0..g.order() {
                for a in 0..g.order() {
                    let d = g.mul(c, g.mul(b, a));
                    let m = Array2::from_elem((1, 1), omega.value(c, b, a));
                    out.insert([c, b, a, d].map(Label), m)?;
                }
            }
        }
        Ok(out)
    }

    /// The associator for which [`from_skeletal`] returns `sol`:
    /// `alpha_{c,b,a} = (A^-1 ; F ; B)^-1`.
    pub fn from_solution(sol: &FSolution) -> Result<Self> {
        let rules = sol.rules().clone();
        let mut out = Self::new(rules.clone());
        for [a, b, c, d] in quadruples(rules.size()) {
            let right = right_basis(&rules, [a, b, c, d]);
            let left = left_basis(&rules, [a, b, c, d]);
            if right.is_empty() && left.is_empty() {
                continue;
            }
            let f = crate::block::assemble_matrix(&rules, &sol.map_or_zero(a, b, c, d));
            let am = summand_to_nested(&rules, &right, |x| (rules.dim(x, c, d), rules.dim(a, b, x)));
            let bm = summand_to_nested(&rules, &left, |y| (rules.dim(a, y, d), rules.dim(b, c, y)));
            // F = B^-1 alpha^-1 A  =>  alpha = A F^-1 B^-1
            let finv = inverse(&f).ok_or(Error::SingularAssociator { at: [c, b, a, d] })?;
            let binv = inverse(&bm).expect("permutation");
            out.insert([c, b, a, d], am.dot(&finv).dot(&binv))?;
        }
        Ok(out)
    }
}

/// All `(l0, l1, l2, l3)` in lexicographic order.
fn quadruples(n: usize) -> Vec<[Label; 4]> {
    (0..n.pow(4))
        .map(|k| [k / (n * n * n), (k / (n * n)) % n, (k / n) % n, k % n].map(Label))
        .collect()
}

/// Matrix of the index bijection from the flattened direct sum (summands in
/// label order, row-major inside) to the given nested Hom basis.
fn summand_to_nested(
    rules: &FusionRules,
    nested: &[NestedIndex],
    dims: impl Fn(Label) -> (usize, usize),
) -> Array2<Scalar> {
    let pos: HashMap<NestedIndex, usize> = nested.iter().enumerate().map(|(k, &t)| (t, k)).collect();
    let n = nested.len();
    let mut out = Array2::from_elem((n, n), ZERO);
    let mut col = 0;
    for x in rules.labels() {
        let (p, q) = dims(x);
        if p == 0 || q == 0 {
            continue;
        }
        for i in 0..p {
            for j in 0..q {
                out[[pos[&(x, i, j)], col]] = Scalar::new(1.0, 0.0);
                col += 1;
            }
        }
    }
    out
}

/// Builds `F_abc^d = A ; alpha_{c,b,a}^-1 ; B^-1` for every `(a, b, c, d)`
/// (composition left to right).
pub fn from_skeletal(assoc: &SkeletalAssociator) -> Result<FSolution> {
    let rules = assoc.rules().clone();
    let mut sol = FSolution::new(rules.clone());
    for [a, b, c, d] in quadruples(rules.size()) {
        let right = right_basis(&rules, [a, b, c, d]);
        let left = left_basis(&rules, [a, b, c, d]);
        if right.is_empty() && left.is_empty() {
            continue;
        }
        let alpha = assoc.block_or_zero([c, b, a, d]);
        if right.len() != left.len() {
            return Err(Error::Shape {
                expected: vec![right.len(), right.len()],
                found: vec![right.len(), left.len()],
            });
        }
        let alpha_inv = inverse(&alpha).ok_or(Error::SingularAssociator { at: [c, b, a, d] })?;
        let am = summand_to_nested(&rules, &right, |x| (rules.dim(x, c, d), rules.dim(a, b, x)));
        let bm = summand_to_nested(&rules, &left, |y| (rules.dim(a, y, d), rules.dim(b, c, y)));
        let bm_inv = inverse(&bm).expect("permutation");
        // Left-to-right A ; alpha^-1 ; B^-1 is the matrix product B^-1 alpha^-1 A.
        let f = bm_inv.dot(&alpha_inv).dot(&am);
        let m = FMap::from_matrix(&rules, [a, b, c, d], f.view())?;
        sol.insert_map(m)?;
    }
    Ok(sol)
}

/// Basis of `Hom(e -> T)` for a bracketing `T` of four simple objects:
/// two intermediate colours and one index per elementary Hom factor.
type TreeIndex = (Label, Label, usize, usize, usize);

struct TreeBasis {
    index: HashMap<TreeIndex, usize>,
    len: usize,
}

impl TreeBasis {
    fn new(rules: &FusionRules, dims: impl Fn(Label, Label) -> [usize; 3]) -> Self {
        let mut index = HashMap::new();
        let mut len = 0;
        for u in rules.labels() {
            for v in rules.labels() {
                let [p, q, r] = dims(u, v);
                for i in 0..p {
                    for j in 0..q {
                        for k in 0..r {
                            index.insert((u, v, i, j, k), len);
                            len += 1;
                        }
                    }
                }
            }
        }
        Self { index, len }
    }
}

/// Rows/columns of a stored `alpha_{X,Y,Z}` block at target `t`.
struct AlphaView<'a> {
    m: Array2<Scalar>,
    rows: HashMap<NestedIndex, usize>,
    cols: HashMap<NestedIndex, usize>,
    _assoc: &'a SkeletalAssociator,
}

impl<'a> AlphaView<'a> {
    fn new(assoc: &'a SkeletalAssociator, [x, y, z, t]: [Label; 4]) -> Self {
        let rules = assoc.rules();
        let abcd = [z, y, x, t];
        let rows = right_basis(rules, abcd).into_iter().enumerate().map(|(k, v)| (v, k)).collect();
        let cols = left_basis(rules, abcd).into_iter().enumerate().map(|(k, v)| (v, k)).collect();
        Self {
            m: assoc.block_or_zero([x, y, z, t]),
            rows,
            cols,
            _assoc: assoc,
        }
    }

    /// Coefficient of right-nested `(x, i, j)` in the image of left-nested `(y, r, s)`.
    fn coef(&self, right: NestedIndex, left: NestedIndex) -> Scalar {
        match (self.rows.get(&right), self.cols.get(&left)) {
            (Some(&r), Some(&c)) => self.m[[r, c]],
            _ => ZERO,
        }
    }

    fn right(&self) -> impl Iterator<Item = NestedIndex> + '_ {
        self.rows.keys().copied()
    }
}

/// Largest deviation of the associator pentagon
/// `alpha_{AB,C,D} ; alpha_{A,B,CD} = (alpha_{A,B,C} (x) id) ; alpha_{A,BC,D} ; (id (x) alpha_{B,C,D})`
/// acting on `Hom(e -> ((A (x) B) (x) C) (x) D)`, over all simple `A, B, C, D, e`.
pub fn associator_coherence(assoc: &SkeletalAssociator) -> f64 {
    let rules = assoc.rules();
    let n = rules.size();
    let mut worst: f64 = 0.0;
    for quad in quadruples(n) {
        let [oa, ob, oc, od] = quad;
        for e in rules.labels() {
            worst = worst.max(coherence_at(assoc, [oa, ob, oc, od], e));
        }
    }
    worst
}

fn coherence_at(assoc: &SkeletalAssociator, [oa, ob, oc, od]: [Label; 4], e: Label) -> f64 {
    let r = assoc.rules();
    // ((A B) C) D: m = AB, n = mC;  f in V_{D n}^e, g in V_{C m}^n, h in V_{B A}^m
    let t1 = TreeBasis::new(r, |m, nn| [r.dim(od, nn, e), r.dim(oc, m, nn), r.dim(ob, oa, m)]);
    // (A B)(C D): m = AB, k = CD;  f in V_{k m}^e, h in V_{B A}^m, g in V_{D C}^k
    let t2 = TreeBasis::new(r, |m, k| [r.dim(k, m, e), r.dim(ob, oa, m), r.dim(od, oc, k)]);
    // A (B (C D)): l = Bk, k = CD;  f in V_{l A}^e, g in V_{k B}^l, h in V_{D C}^k
    let t3 = TreeBasis::new(r, |l, k| [r.dim(l, oa, e), r.dim(k, ob, l), r.dim(od, oc, k)]);
    // (A (B C)) D: j = BC, n = Aj;  f in V_{D n}^e, g in V_{j A}^n, h in V_{C B}^j
    let t4 = TreeBasis::new(r, |j, nn| [r.dim(od, nn, e), r.dim(j, oa, nn), r.dim(oc, ob, j)]);
    // A ((B C) D): j = BC, l = jD;  f in V_{l A}^e, g in V_{D j}^l, h in V_{C B}^j
    let t5 = TreeBasis::new(r, |j, l| [r.dim(l, oa, e), r.dim(od, j, l), r.dim(oc, ob, j)]);
    if t1.len == 0 && t3.len == 0 {
        return 0.0;
    }
    let mut m12 = Array2::from_elem((t2.len, t1.len), ZERO);
    let mut m23 = Array2::from_elem((t3.len, t2.len), ZERO);
    let mut m14 = Array2::from_elem((t4.len, t1.len), ZERO);
    let mut m45 = Array2::from_elem((t5.len, t4.len), ZERO);
    let mut m53 = Array2::from_elem((t3.len, t5.len), ZERO);

    for (&(m, nn, f, g, h), &col) in &t1.index {
        // alpha_{m,C,D} at e: (n, f, g) -> (k, f', g'); h rides along.
        let al = AlphaView::new(assoc, [m, oc, od, e]);
        for (k, f2, g2) in al.right() {
            let v = al.coef((k, f2, g2), (nn, f, g));
            if v != ZERO {
                m12[[t2.index[&(m, k, f2, h, g2)], col]] += v;
            }
        }
        // alpha_{A,B,C} at n: (m, g, h) -> (j, g', h'); f rides along.
        let al = AlphaView::new(assoc, [oa, ob, oc, nn]);
        for (j, g2, h2) in al.right() {
            let v = al.coef((j, g2, h2), (m, g, h));
            if v != ZERO {
                m14[[t4.index[&(j, nn, f, g2, h2)], col]] += v;
            }
        }
    }
    for (&(m, k, f, h, g), &col) in &t2.index {
        // alpha_{A,B,k} at e: (m, f, h) -> (l, f', g'); g in V_{DC}^k rides along.
        let al = AlphaView::new(assoc, [oa, ob, k, e]);
        for (l, f2, g2) in al.right() {
            let v = al.coef((l, f2, g2), (m, f, h));
            if v != ZERO {
                m23[[t3.index[&(l, k, f2, g2, g)], col]] += v;
            }
        }
    }
    for (&(j, nn, f, g, h), &col) in &t4.index {
        // alpha_{A,j,D} at e: (n, f, g) -> (l, f', g'); h rides along.
        let al = AlphaView::new(assoc, [oa, j, od, e]);
        for (l, f2, g2) in al.right() {
            let v = al.coef((l, f2, g2), (nn, f, g));
            if v != ZERO {
                m45[[t5.index[&(j, l, f2, g2, h)], col]] += v;
            }
        }
    }
    for (&(j, l, f, g, h), &col) in &t5.index {
        // alpha_{B,C,D} at l: (j, g, h) -> (k, g', h'); f rides along.
        let al = AlphaView::new(assoc, [ob, oc, od, l]);
        for (k, g2, h2) in al.right() {
            let v = al.coef((k, g2, h2), (j, g, h));
            if v != ZERO {
                m53[[t3.index[&(l, k, f, g2, h2)], col]] += v;
            }
        }
    }
    let lhs = m23.dot(&m12);
    let rhs = m53.dot(&m45.dot(&m14));
    if lhs.is_empty() {
        return 0.0;
    }
    crate::linalg::max_abs_diff(&lhs, &rhs)
}
