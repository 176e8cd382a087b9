//! The pentagon relation in its global form (maps between direct sums) and
//! its component form (one equation per `(x, y, p, q)`).
//!
//! For boundary colours `(a, b, c, d, e)` both sides map
//! `(+)_{x,y} V_yd^e (x) V_xc^y (x) V_ab^x` to
//! `(+)_{p,q} V_ap^e (x) V_bq^p (x) V_cd^q`. Maps compose left to right:
//!
//! ```text
//! L = ((+)_y id_yd^e (x) F_abc^y) ; ((+)_z F_azd^e (x) id_bc^z) ; ((+)_p id_ap^e (x) F_bcd^p)
//! R = ((+)_x F_xcd^e (x) id_ab^x) ; P23 ; ((+)_q F_abq^e (x) id_cd^q)
//! ```

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayD};
use rayon::prelude::*;

use crate::block::{FBlock, FSolution};
use crate::error::{Error, Result};
use crate::linalg::{eye, kron, max_abs_diff, swap_23};
use crate::report::ResidualReport;
use crate::rules::{FusionRules, Label};
use crate::scalar::{Scalar, ZERO};
use crate::sumvec::{Factor, Sel, SumShape, SumVector};

/// Boundary colours `(a, b, c, d, e)` and, for the component form, the inner
/// colours `(x, y, p, q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PentagonTuple {
    pub boundary: [Label; 5],
    pub inner: Option<[Label; 4]>,
}

impl PentagonTuple {
    pub fn boundary(boundary: [Label; 5]) -> Self {
        Self {
            boundary,
            inner: None,
        }
    }

    pub fn component(boundary: [Label; 5], inner: [Label; 4]) -> Self {
        Self {
            boundary,
            inner: Some(inner),
        }
    }

    pub fn validate(&self, rules: &FusionRules) -> Result<()> {
        for l in self.boundary.iter().chain(self.inner.iter().flatten()) {
            rules.check_label(*l)?;
        }
        Ok(())
    }

    /// All nine labels `(a, b, c, d, e, x, y, p, q)`.
    pub fn labels(&self) -> Vec<Label> {
        let mut v = self.boundary.to_vec();
        v.extend(self.inner.iter().flatten());
        v
    }

    fn inner_or_err(&self) -> Result<[Label; 4]> {
        self.inner
            .ok_or_else(|| Error::Unsupported("component form needs (x, y, p, q)".into()))
    }
}

/// Which formulation a sweep evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    Global,
    Component,
}

use Sel::{Fixed, Key};

/// `(+)_{x,y} V_yd^e (x) V_xc^y (x) V_ab^x`, keyed by `(x, y)`.
pub fn source_shape(boundary: [Label; 5]) -> SumShape {
    let [a, b, c, d, e] = boundary.map(Fixed);
    SumShape::new(
        2,
        vec![
            Factor::new(Key(1), d, e),
            Factor::new(Key(0), c, Key(1)),
            Factor::new(a, b, Key(0)),
        ],
    )
}

/// `(+)_{p,q} V_ap^e (x) V_bq^p (x) V_cd^q`, keyed by `(p, q)`.
pub fn target_shape(boundary: [Label; 5]) -> SumShape {
    let [a, b, c, d, e] = boundary.map(Fixed);
    SumShape::new(
        2,
        vec![
            Factor::new(a, Key(0), e),
            Factor::new(b, Key(1), Key(0)),
            Factor::new(c, d, Key(1)),
        ],
    )
}

// (+)_{y,z} V_yd^e (x) V_az^y (x) V_bc^z
fn beta_shape(boundary: [Label; 5]) -> SumShape {
    let [a, b, c, d, e] = boundary.map(Fixed);
    SumShape::new(
        2,
        vec![
            Factor::new(Key(0), d, e),
            Factor::new(a, Key(1), Key(0)),
            Factor::new(b, c, Key(1)),
        ],
    )
}

// (+)_{z,p} V_ap^e (x) V_zd^p (x) V_bc^z
fn gamma_shape(boundary: [Label; 5]) -> SumShape {
    let [a, b, c, d, e] = boundary.map(Fixed);
    SumShape::new(
        2,
        vec![
            Factor::new(a, Key(1), e),
            Factor::new(Key(0), d, Key(1)),
            Factor::new(b, c, Key(0)),
        ],
    )
}

// (+)_{x,q} V_xq^e (x) V_cd^q (x) V_ab^x
fn right_mid_shape(boundary: [Label; 5]) -> SumShape {
    let [a, b, c, d, e] = boundary.map(Fixed);
    SumShape::new(
        2,
        vec![
            Factor::new(Key(0), Key(1), e),
            Factor::new(c, d, Key(1)),
            Factor::new(a, b, Key(0)),
        ],
    )
}

#[derive(Clone, Copy)]
enum Pair {
    /// The map acts on factors 0 and 1.
    Front,
    /// The map acts on factors 1 and 2.
    Back,
}

/// Applies `(+) F (x) id` or `(+) id (x) F` to a three-factor direct sum;
/// `route` names the component carrying input key to output key.
fn lift(
    sol: &FSolution,
    input: &SumVector,
    out_shape: SumShape,
    pair: Pair,
    route: impl Fn(&[Label], &[Label]) -> Option<[Label; 6]>,
) -> Result<SumVector> {
    let rules = sol.rules();
    let mut out = SumVector::zeros(rules, out_shape);
    let out_keys: Vec<Vec<Label>> = out.entries().map(|(k, _)| k.clone()).collect();
    for (ik, src) in input.entries() {
        for ok in &out_keys {
            let Some([a, b, c, d, x, y]) = route(ik, ok) else {
                continue;
            };
            let Some(blk) = sol.block(a, b, c, d, x, y) else {
                continue;
            };
            let dst = out.get_mut(ok).expect("key listed");
            apply_on_pair(blk, src, dst, pair)?;
        }
    }
    Ok(out)
}

fn apply_on_pair(blk: &FBlock, src: &ArrayD<Scalar>, dst: &mut ArrayD<Scalar>, pair: Pair) -> Result<()> {
    let [n, m, k, l] = blk.shape();
    let (sd, dd) = (src.shape(), dst.shape().to_vec());
    let ok = match pair {
        Pair::Front => sd[..2] == [n, m] && dd[..2] == [k, l] && sd[2] == dd[2],
        Pair::Back => sd[1..] == [n, m] && dd[1..] == [k, l] && sd[0] == dd[0],
    };
    if !ok {
        return Err(Error::Shape {
            expected: sd.to_vec(),
            found: dd,
        });
    }
    let r = blk.coords();
    match pair {
        Pair::Front => {
            for ((i, j, rr, ss), &coef) in r.indexed_iter() {
                if coef == ZERO {
                    continue;
                }
                for t in 0..sd[2] {
                    dst[[rr, ss, t]] += coef * src[[i, j, t]];
                }
            }
        }
        Pair::Back => {
            for ((i, j, rr, ss), &coef) in r.indexed_iter() {
                if coef == ZERO {
                    continue;
                }
                for u in 0..sd[0] {
                    dst[[u, rr, ss]] += coef * src[[u, i, j]];
                }
            }
        }
    }
    Ok(())
}

fn check_source(sol: &FSolution, boundary: [Label; 5], alpha: &SumVector) -> Result<()> {
    for l in boundary {
        sol.rules().check_label(l)?;
    }
    let expected = source_shape(boundary);
    if alpha.shape() != &expected {
        return Err(Error::Shape {
            expected: vec![expected.total_dim(sol.rules())],
            found: vec![alpha.len()],
        });
    }
    Ok(())
}

/// Left side `L(alpha)` of the global relation.
pub fn lhs_global(sol: &FSolution, boundary: [Label; 5], alpha: &SumVector) -> Result<SumVector> {
    check_source(sol, boundary, alpha)?;
    let [a, b, c, d, e] = boundary;
    // (x, y) -> (y, z) by id_yd^e (x) F_abc^y|^x_z
    let beta = lift(sol, alpha, beta_shape(boundary), Pair::Back, |ik, ok| {
        (ik[1] == ok[0]).then(|| [a, b, c, ik[1], ik[0], ok[1]])
    })?;
    // (y, z) -> (z, p) by F_azd^e|^y_p (x) id_bc^z
    let gamma = lift(sol, &beta, gamma_shape(boundary), Pair::Front, |ik, ok| {
        (ik[1] == ok[0]).then(|| [a, ik[1], d, e, ik[0], ok[1]])
    })?;
    // (z, p) -> (p, q) by id_ap^e (x) F_bcd^p|^z_q
    lift(sol, &gamma, target_shape(boundary), Pair::Back, |ik, ok| {
        (ik[1] == ok[0]).then(|| [b, c, d, ik[1], ik[0], ok[1]])
    })
}

/// Right side `R(alpha)` of the global relation.
pub fn rhs_global(sol: &FSolution, boundary: [Label; 5], alpha: &SumVector) -> Result<SumVector> {
    check_source(sol, boundary, alpha)?;
    let [a, b, c, d, e] = boundary;
    // (x, y) -> (x, q) by F_xcd^e|^y_q (x) id_ab^x
    let mid = lift(sol, alpha, right_mid_shape(boundary), Pair::Front, |ik, ok| {
        (ik[0] == ok[0]).then(|| [ik[0], c, d, e, ik[1], ok[1]])
    })?;
    let swapped = mid.permute_23()?;
    // (x, q) -> (p, q) by F_abq^e|^x_p (x) id_cd^q
    lift(sol, &swapped, target_shape(boundary), Pair::Front, |ik, ok| {
        (ik[1] == ok[1]).then(|| [a, b, ik[1], e, ik[0], ok[0]])
    })
}

/// Matrices of `L` and `R` over the full direct sums, built column by
/// column from the standard basis of the source.
pub fn global_matrices(sol: &FSolution, boundary: [Label; 5]) -> Result<(Array2<Scalar>, Array2<Scalar>)> {
    let rules = sol.rules();
    let src = source_shape(boundary);
    let cols = src.total_dim(rules);
    let rows = target_shape(boundary).total_dim(rules);
    let mut lm = Array2::from_elem((rows, cols), ZERO);
    let mut rm = Array2::from_elem((rows, cols), ZERO);
    let mut basis = vec![ZERO; cols];
    for k in 0..cols {
        basis[k] = Scalar::new(1.0, 0.0);
        let alpha = SumVector::from_flat(rules, src.clone(), &basis)?;
        basis[k] = ZERO;
        for (dst, side) in [(&mut lm, lhs_global(sol, boundary, &alpha)?), (&mut rm, rhs_global(sol, boundary, &alpha)?)] {
            for (row, v) in side.flatten().into_iter().enumerate() {
                dst[[row, k]] = v;
            }
        }
    }
    Ok((lm, rm))
}

/// Max-abs entry of `L - R` for one boundary tuple.
pub fn check_pentagon_global(sol: &FSolution, boundary: [Label; 5]) -> Result<f64> {
    let (l, r) = global_matrices(sol, boundary)?;
    Ok(if l.is_empty() { 0.0 } else { max_abs_diff(&l, &r) })
}

fn block_matrix(sol: &FSolution, labels: [Label; 6]) -> Option<Array2<Scalar>> {
    let [a, b, c, d, x, y] = labels;
    sol.block(a, b, c, d, x, y).map(FBlock::matrix)
}

/// Source and target dimensions `([V_yd^e, V_xc^y, V_ab^x], [V_ap^e, V_bq^p, V_cd^q])`.
pub fn component_dims(rules: &FusionRules, boundary: [Label; 5], inner: [Label; 4]) -> ([usize; 3], [usize; 3]) {
    let [a, b, c, d, e] = boundary;
    let [x, y, p, q] = inner;
    (
        [rules.dim(y, d, e), rules.dim(x, c, y), rules.dim(a, b, x)],
        [rules.dim(a, p, e), rules.dim(b, q, p), rules.dim(c, d, q)],
    )
}

/// `sum_z (id (x) F_abc^y|^x_z) ; (F_azd^e|^y_p (x) id) ; (id (x) F_bcd^p|^z_q)`
/// as a matrix from `V_yd^e (x) V_xc^y (x) V_ab^x` (columns) to
/// `V_ap^e (x) V_bq^p (x) V_cd^q` (rows), both row-major.
pub fn lhs_component(sol: &FSolution, t: &PentagonTuple) -> Result<Array2<Scalar>> {
    t.validate(sol.rules())?;
    let rules = sol.rules();
    let [a, b, c, d, e] = t.boundary;
    let [x, y, p, q] = t.inner_or_err()?;
    let (src, tgt) = component_dims(rules, t.boundary, [x, y, p, q]);
    let mut out = Array2::from_elem((tgt.iter().product(), src.iter().product()), ZERO);
    if out.is_empty() {
        return Ok(out);
    }
    for z in rules.labels() {
        let (Some(f1), Some(f2), Some(f3)) = (
            block_matrix(sol, [a, b, c, y, x, z]),
            block_matrix(sol, [a, z, d, e, y, p]),
            block_matrix(sol, [b, c, d, p, z, q]),
        ) else {
            continue;
        };
        let m1 = kron(&eye(src[0]), &f1);
        let m2 = kron(&f2, &eye(rules.dim(b, c, z)));
        let m3 = kron(&eye(tgt[0]), &f3);
        out += &m3.dot(&m2.dot(&m1));
    }
    Ok(out)
}

/// `(F_xcd^e|^y_q (x) id_ab^x) ; P23 ; (F_abq^e|^x_p (x) id_cd^q)`, laid out
/// as in [`lhs_component`].
pub fn rhs_component(sol: &FSolution, t: &PentagonTuple) -> Result<Array2<Scalar>> {
    t.validate(sol.rules())?;
    let rules = sol.rules();
    let [a, b, c, d, e] = t.boundary;
    let [x, y, p, q] = t.inner_or_err()?;
    let (src, tgt) = component_dims(rules, t.boundary, [x, y, p, q]);
    let zero = Array2::from_elem((tgt.iter().product(), src.iter().product()), ZERO);
    if zero.is_empty() {
        return Ok(zero);
    }
    let (Some(g1), Some(g2)) = (
        block_matrix(sol, [x, c, d, e, y, q]),
        block_matrix(sol, [a, b, q, e, x, p]),
    ) else {
        return Ok(zero);
    };
    let m1 = kron(&g1, &eye(src[2]));
    let perm = swap_23(rules.dim(x, q, e), rules.dim(c, d, q), src[2]);
    let m3 = kron(&g2, &eye(tgt[2]));
    Ok(m3.dot(&perm.dot(&m1)))
}

pub fn check_pentagon_component(sol: &FSolution, t: &PentagonTuple) -> Result<f64> {
    let l = lhs_component(sol, t)?;
    let r = rhs_component(sol, t)?;
    Ok(if l.is_empty() { 0.0 } else { max_abs_diff(&l, &r) })
}

/// All boundary tuples in lexicographic order.
pub fn all_boundaries(n: usize) -> Vec<[Label; 5]> {
    (0..n.pow(5))
        .map(|mut code| {
            let mut t = [Label(0); 5];
            for slot in (0..5).rev() {
                t[slot] = Label(code % n);
                code /= n;
            }
            t
        })
        .collect()
}

/// Inner tuples `(x, y, p, q)` whose source and target are both nonzero.
pub fn live_inner_tuples(rules: &FusionRules, boundary: [Label; 5]) -> Vec<[Label; 4]> {
    let mut out = Vec::new();
    for x in rules.labels() {
        for y in rules.labels() {
            for p in rules.labels() {
                for q in rules.labels() {
                    let (s, t) = component_dims(rules, boundary, [x, y, p, q]);
                    if !s.contains(&0) && !t.contains(&0) {
                        out.push([x, y, p, q]);
                    }
                }
            }
        }
    }
    out
}

/// Sweeps every nine-label tuple with a nonzero source and target through
/// `residual`; the rest are counted as vacuous.
pub(crate) fn sweep_components(
    rules: &FusionRules,
    tol: f64,
    residual: impl Fn([Label; 5], [Label; 4]) -> Result<f64> + Sync,
) -> Result<ResidualReport> {
    let n = rules.size();
    let per: Vec<Vec<(Vec<Label>, f64)>> = all_boundaries(n)
        .into_par_iter()
        .map(|bd| {
            live_inner_tuples(rules, bd)
                .into_iter()
                .map(|inner| {
                    let t = PentagonTuple::component(bd, inner);
                    residual(bd, inner).map(|r| (t.labels(), r))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let per_tuple: BTreeMap<_, _> = per.into_iter().flatten().collect();
    let total = (n as u64).pow(9);
    let vacuous = total - per_tuple.len() as u64;
    Ok(ResidualReport::new(per_tuple, tol, vacuous))
}

/// Checks every tuple in the chosen form.
///
/// The global form reports one residual per boundary `(a, b, c, d, e)`; the
/// component form one per `(a, b, c, d, e, x, y, p, q)`. Tuples whose source or
/// target direct sum is zero are vacuous: they pass and are only counted.
pub fn check_all(sol: &FSolution, tol: f64, form: Form) -> Result<ResidualReport> {
    let rules = sol.rules();
    match form {
        Form::Component => sweep_components(rules, tol, |bd, inner| {
            check_pentagon_component(sol, &PentagonTuple::component(bd, inner))
        }),
        Form::Global => {
            let n = rules.size();
            let results: Vec<Option<(Vec<Label>, f64)>> = all_boundaries(n)
                .into_par_iter()
                .map(|bd| {
                    let live = source_shape(bd).total_dim(rules) > 0
                        && target_shape(bd).total_dim(rules) > 0;
                    if !live {
                        return Ok(None);
                    }
                    check_pentagon_global(sol, bd).map(|r| Some((bd.to_vec(), r)))
                })
                .collect::<Result<_>>()?;
            let vacuous = results.iter().filter(|r| r.is_none()).count() as u64;
            let per_tuple = results.into_iter().flatten().collect();
            Ok(ResidualReport::new(per_tuple, tol, vacuous))
        }
    }
}

/// Residual of a `|I| = 1` solution with every dimension 1 and block `f`:
/// the relation reads `f^3 = f^2`.
pub fn single_scalar_residual(f: Scalar) -> f64 {
    (f * f * f - f * f).norm()
}

/// The `((x, y), (p, q))` block of a global matrix.
pub fn extract_component(
    rules: &FusionRules,
    boundary: [Label; 5],
    global: &Array2<Scalar>,
    inner: [Label; 4],
) -> Array2<Scalar> {
    let [x, y, p, q] = inner;
    let src_off = crate::block::offsets(rules, &source_shape(boundary));
    let tgt_off = crate::block::offsets(rules, &target_shape(boundary));
    let (s, t) = component_dims(rules, boundary, inner);
    let (h, w) = (t.iter().product::<usize>(), s.iter().product::<usize>());
    match (src_off.get(&vec![x, y]), tgt_off.get(&vec![p, q])) {
        (Some(&c0), Some(&r0)) => global
            .slice(ndarray::s![r0..r0 + h, c0..c0 + w])
            .to_owned(),
        _ => Array2::from_elem((h, w), ZERO),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ONE;

    fn one_scalar(f: Scalar) -> FSolution {
        let rules = FusionRules::trivial();
        let mut sol = FSolution::new(rules.clone());
        sol.insert_block(FBlock::scalar(&rules, [Label(0); 6], f).unwrap()).unwrap();
        sol
    }

    #[test]
    fn one_colour_residual_is_cubic_minus_square() {
        for f in [Scalar::new(2.0, 0.0), Scalar::new(0.3, -0.7), ONE, ZERO] {
            let sol = one_scalar(f);
            let want = (f * f * f - f * f).norm();
            assert_eq!(single_scalar_residual(f), want);
            for form in [Form::Global, Form::Component] {
                assert!((check_all(&sol, 0.0, form).unwrap().overall - want).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn boundaries_are_lexicographic() {
        let b = all_boundaries(2);
        assert_eq!(b.len(), 32);
        assert_eq!(b[1], [Label(0), Label(0), Label(0), Label(0), Label(1)]);
        assert!(b.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn checked_and_vacuous_cover_every_tuple() {
        let rules = FusionRules::fibonacci();
        let sol = FSolution::new(rules);
        let r = check_all(&sol, 1e-10, Form::Component).unwrap();
        assert_eq!(r.tuples_checked() as u64 + r.vacuous_count, 2u64.pow(9));
        let g = check_all(&sol, 1e-10, Form::Global).unwrap();
        assert_eq!(g.tuples_checked() as u64 + g.vacuous_count, 32);
    }

    #[test]
    fn component_form_needs_inner_labels() {
        let sol = one_scalar(ONE);
        let t = PentagonTuple::boundary([Label(0); 5]);
        assert!(matches!(check_pentagon_component(&sol, &t), Err(Error::Unsupported(_))));
        let bad = PentagonTuple::component([Label(0); 5], [Label(0), Label(0), Label(0), Label(3)]);
        assert!(bad.validate(sol.rules()).is_err());
    }
}
