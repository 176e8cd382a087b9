//! Flip maps `F_abc^d` and their components `F_abc^d|^x_y`.
//!
//! A component maps `V_xc^d (x) V_ab^x` to `V_ay^d (x) V_bc^y` and is stored by
//! its coefficients `R[i][j][r][s]`:
//!
//! ```text
//! F_abc^d|^x_y (e_i (x) f_j) = sum_{r,s} R[i][j][r][s] g_r (x) h_s
//! ```
//!
//! Every module uses its standard basis `0..N`. Blocks touching a
//! zero-dimensional module are never stored.

use std::collections::BTreeMap;

use ndarray::{Array2, Array4, ArrayView2};

use crate::error::{Error, Result};
use crate::rules::{FusionRules, Label};
use crate::scalar::{is_finite, Scalar, ONE, ZERO};
use crate::sumvec::{Factor, Sel, SumShape, SumVector};

/// Shape `(N[x][c][d], N[a][b][x], N[a][y][d], N[b][c][y])` of a component.
pub fn block_shape(rules: &FusionRules, labels: [Label; 6]) -> [usize; 4] {
    let [a, b, c, d, x, y] = labels;
    [
        rules.dim(x, c, d),
        rules.dim(a, b, x),
        rules.dim(a, y, d),
        rules.dim(b, c, y),
    ]
}

/// One component `F_abc^d|^x_y`.
#[derive(Clone, Debug, PartialEq)]
pub struct FBlock {
    labels: [Label; 6],
    coords: Array4<Scalar>,
}

impl FBlock {
    pub fn new(rules: &FusionRules, labels: [Label; 6], coords: Array4<Scalar>) -> Result<Self> {
        for l in labels {
            rules.check_label(l)?;
        }
        let shape = block_shape(rules, labels);
        if shape.contains(&0) {
            return Err(Error::Block {
                labels,
                reason: format!("touches a zero-dimensional module (shape {shape:?})"),
            });
        }
        if coords.shape() != shape {
            return Err(Error::Block {
                labels,
                reason: format!("coords shape {:?}, expected {shape:?}", coords.shape()),
            });
        }
        if !coords.iter().all(|z| is_finite(*z)) {
            return Err(Error::NonFinite(format!("block {labels:?}")));
        }
        Ok(Self { labels, coords })
    }

    /// Builds a block from row-major coordinates.
    pub fn from_flat(rules: &FusionRules, labels: [Label; 6], flat: Vec<Scalar>) -> Result<Self> {
        for l in labels {
            rules.check_label(l)?;
        }
        let shape = block_shape(rules, labels);
        let expected: usize = shape.iter().product();
        if flat.len() != expected {
            return Err(Error::Block {
                labels,
                reason: format!("{} coordinates, expected {expected}", flat.len()),
            });
        }
        let coords = Array4::from_shape_vec(shape, flat).map_err(|e| Error::Block {
            labels,
            reason: e.to_string(),
        })?;
        Self::new(rules, labels, coords)
    }

    /// The zero component, or `None` when some module is zero-dimensional.
    pub fn zeros(rules: &FusionRules, labels: [Label; 6]) -> Option<Self> {
        let shape = block_shape(rules, labels);
        if shape.contains(&0) {
            return None;
        }
        Some(Self {
            labels,
            coords: Array4::from_elem(shape, ZERO),
        })
    }

    /// A 1x1x1x1 block holding `q`.
    pub fn scalar(rules: &FusionRules, labels: [Label; 6], q: Scalar) -> Result<Self> {
        Self::from_flat(rules, labels, vec![q])
    }

    #[inline]
    pub fn labels(&self) -> [Label; 6] {
        self.labels
    }

    pub fn outer(&self) -> [Label; 4] {
        let [a, b, c, d, _, _] = self.labels;
        [a, b, c, d]
    }

    pub fn inner(&self) -> (Label, Label) {
        (self.labels[4], self.labels[5])
    }

    pub fn coords(&self) -> &Array4<Scalar> {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut Array4<Scalar> {
        &mut self.coords
    }

    pub fn shape(&self) -> [usize; 4] {
        let s = self.coords.shape();
        [s[0], s[1], s[2], s[3]]
    }

    pub fn source_dim(&self) -> usize {
        let s = self.shape();
        s[0] * s[1]
    }

    pub fn target_dim(&self) -> usize {
        let s = self.shape();
        s[2] * s[3]
    }

    /// The component as a matrix from `V_xc^d (x) V_ab^x` (columns, `(i, j)`
    /// row-major) to `V_ay^d (x) V_bc^y` (rows, `(r, s)` row-major).
    pub fn matrix(&self) -> Array2<Scalar> {
        let [n, m, k, l] = self.shape();
        let mut out = Array2::from_elem((k * l, n * m), ZERO);
        for ((i, j, r, s), &v) in self.coords.indexed_iter() {
            out[[r * l + s, i * m + j]] = v;
        }
        out
    }

    /// Inverse of [`FBlock::matrix`].
    pub fn from_matrix(
        rules: &FusionRules,
        labels: [Label; 6],
        mat: ArrayView2<'_, Scalar>,
    ) -> Result<Self> {
        let mut blk = Self::zeros(rules, labels).ok_or_else(|| Error::Block {
            labels,
            reason: "touches a zero-dimensional module".into(),
        })?;
        let [n, m, k, l] = blk.shape();
        if mat.shape() != [k * l, n * m] {
            return Err(Error::Shape {
                expected: vec![k * l, n * m],
                found: mat.shape().to_vec(),
            });
        }
        for ((i, j, r, s), v) in blk.coords.indexed_iter_mut() {
            *v = mat[[r * l + s, i * m + j]];
        }
        if !blk.coords.iter().all(|z| is_finite(*z)) {
            return Err(Error::NonFinite(format!("block {labels:?}")));
        }
        Ok(blk)
    }
}

/// Applies a component to `v` in `V_xc^d (x) V_ab^x`:
/// `out[r][s] = sum_{i,j} R[i][j][r][s] v[i][j]`.
pub fn block_apply(block: &FBlock, v: ArrayView2<'_, Scalar>) -> Result<Array2<Scalar>> {
    let [n, m, k, l] = block.shape();
    if v.shape() != [n, m] {
        return Err(Error::Shape {
            expected: vec![n, m],
            found: v.shape().to_vec(),
        });
    }
    let mut out = Array2::from_elem((k, l), ZERO);
    for ((i, j, r, s), &coef) in block.coords.indexed_iter() {
        out[[r, s]] += coef * v[[i, j]];
    }
    Ok(out)
}

/// The identity map on `V_ab^c` as a square matrix.
pub fn identity_component(rules: &FusionRules, a: Label, b: Label, c: Label) -> Result<Array2<Scalar>> {
    let n = rules.hom_dim(a, b, c)?;
    if n == 0 {
        return Err(Error::EmptyModule { a, b, c });
    }
    Ok(Array2::from_diag_elem(n, ONE))
}

/// The flip map `F_abc^d` as its nonzero components keyed by `(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FMap {
    labels: [Label; 4],
    blocks: BTreeMap<(Label, Label), FBlock>,
}

impl FMap {
    pub fn new(labels: [Label; 4]) -> Self {
        Self {
            labels,
            blocks: BTreeMap::new(),
        }
    }

    pub fn labels(&self) -> [Label; 4] {
        self.labels
    }

    pub fn insert(&mut self, block: FBlock) -> Result<Option<FBlock>> {
        if block.outer() != self.labels {
            return Err(Error::Block {
                labels: block.labels(),
                reason: format!("outer labels differ from map {:?}", self.labels),
            });
        }
        Ok(self.blocks.insert(block.inner(), block))
    }

    pub fn block(&self, x: Label, y: Label) -> Option<&FBlock> {
        self.blocks.get(&(x, y))
    }

    pub fn blocks(&self) -> impl Iterator<Item = &FBlock> {
        self.blocks.values()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `(+)_x V_xc^d (x) V_ab^x`, keyed by `x`.
    pub fn source_shape(&self) -> SumShape {
        let [a, b, c, d] = self.labels.map(Sel::Fixed);
        SumShape::new(
            1,
            vec![Factor::new(Sel::Key(0), c, d), Factor::new(a, b, Sel::Key(0))],
        )
    }

    /// `(+)_y V_ay^d (x) V_bc^y`, keyed by `y`.
    pub fn target_shape(&self) -> SumShape {
        let [a, b, c, d] = self.labels.map(Sel::Fixed);
        SumShape::new(
            1,
            vec![Factor::new(a, Sel::Key(0), d), Factor::new(b, c, Sel::Key(0))],
        )
    }

    /// Rebuilds a map from its assembled matrix (see [`assemble_matrix`]).
    /// Every admissible component is stored, including zero ones.
    pub fn from_matrix(rules: &FusionRules, labels: [Label; 4], mat: ArrayView2<'_, Scalar>) -> Result<Self> {
        let mut out = Self::new(labels);
        let src = out.source_shape();
        let tgt = out.target_shape();
        let (rows, cols) = (tgt.total_dim(rules), src.total_dim(rules));
        if mat.shape() != [rows, cols] {
            return Err(Error::Shape {
                expected: vec![rows, cols],
                found: mat.shape().to_vec(),
            });
        }
        let [a, b, c, d] = labels;
        let mut col0 = 0;
        for xk in src.keys(rules) {
            let x = xk[0];
            let width = src.dims(rules, &xk).iter().product::<usize>();
            let mut row0 = 0;
            for yk in tgt.keys(rules) {
                let y = yk[0];
                let height = tgt.dims(rules, &yk).iter().product::<usize>();
                let sub = mat.slice(ndarray::s![row0..row0 + height, col0..col0 + width]);
                out.insert(FBlock::from_matrix(rules, [a, b, c, d, x, y], sub)?)?;
                row0 += height;
            }
            col0 += width;
        }
        Ok(out)
    }
}

/// Applies `m` to a vector of its source direct sum.
pub fn fmap_apply(rules: &FusionRules, m: &FMap, alpha: &SumVector) -> Result<SumVector> {
    let src = m.source_shape();
    if alpha.shape() != &src {
        return Err(Error::Shape {
            expected: vec![src.total_dim(rules)],
            found: vec![alpha.len()],
        });
    }
    let mut out = SumVector::zeros(rules, m.target_shape());
    for blk in m.blocks() {
        let (x, y) = blk.inner();
        let (Some(ax), Some(dst)) = (alpha.get(&[x]), out.get_mut(&[y])) else {
            continue;
        };
        let ndim = ax.ndim();
        let ax = ax
            .view()
            .into_dimensionality::<ndarray::Ix2>()
            .map_err(|_| Error::Shape {
                expected: vec![2],
                found: vec![ndim],
            })?;
        let img = block_apply(blk, ax)?;
        for (d, v) in dst.iter_mut().zip(img.iter()) {
            *d += *v;
        }
    }
    Ok(out)
}

/// The matrix of `m` over the full direct sums.
///
/// Columns follow the source summands `x` in increasing label index, rows
/// the target summands `y`; inside a summand the basis is row-major, so
/// `assemble_matrix(m) * flatten(alpha) = flatten(fmap_apply(m, alpha))`.
pub fn assemble_matrix(rules: &FusionRules, m: &FMap) -> Array2<Scalar> {
    let src = m.source_shape();
    let tgt = m.target_shape();
    let col_off = offsets(rules, &src);
    let row_off = offsets(rules, &tgt);
    let mut out = Array2::from_elem((tgt.total_dim(rules), src.total_dim(rules)), ZERO);
    for blk in m.blocks() {
        let (x, y) = blk.inner();
        let (Some(&c0), Some(&r0)) = (col_off.get(&vec![x]), row_off.get(&vec![y])) else {
            continue;
        };
        let sub = blk.matrix();
        out.slice_mut(ndarray::s![r0..r0 + sub.nrows(), c0..c0 + sub.ncols()])
            .assign(&sub);
    }
    out
}

pub(crate) fn offsets(rules: &FusionRules, shape: &SumShape) -> BTreeMap<Vec<Label>, usize> {
    let mut acc = 0;
    shape
        .keys(rules)
        .into_iter()
        .map(|k| {
            let here = acc;
            acc += shape.dims(rules, &k).iter().product::<usize>();
            (k, here)
        })
        .collect()
}

/// A family of flip maps: the candidate pentagon solution.
#[derive(Clone, Debug, PartialEq)]
pub struct FSolution {
    rules: FusionRules,
    family: BTreeMap<[Label; 4], FMap>,
}

impl FSolution {
    pub fn new(rules: FusionRules) -> Self {
        Self {
            rules,
            family: BTreeMap::new(),
        }
    }

    pub fn rules(&self) -> &FusionRules {
        &self.rules
    }

    pub fn insert_block(&mut self, block: FBlock) -> Result<()> {
        let shape = block_shape(&self.rules, block.labels());
        if shape != block.shape() {
            return Err(Error::Block {
                labels: block.labels(),
                reason: format!("shape {:?} does not match rules {shape:?}", block.shape()),
            });
        }
        let outer = block.outer();
        self.family
            .entry(outer)
            .or_insert_with(|| FMap::new(outer))
            .insert(block)?;
        Ok(())
    }

    pub fn insert_map(&mut self, m: FMap) -> Result<()> {
        for blk in m.blocks() {
            if block_shape(&self.rules, blk.labels()) != blk.shape() {
                return Err(Error::Block {
                    labels: blk.labels(),
                    reason: "shape does not match rules".into(),
                });
            }
        }
        self.family.insert(m.labels(), m);
        Ok(())
    }

    pub fn map(&self, a: Label, b: Label, c: Label, d: Label) -> Option<&FMap> {
        self.family.get(&[a, b, c, d])
    }

    /// The map `F_abc^d`, empty when absent.
    pub fn map_or_zero(&self, a: Label, b: Label, c: Label, d: Label) -> FMap {
        self.map(a, b, c, d)
            .cloned()
            .unwrap_or_else(|| FMap::new([a, b, c, d]))
    }

    #[inline]
    pub fn block(&self, a: Label, b: Label, c: Label, d: Label, x: Label, y: Label) -> Option<&FBlock> {
        self.family.get(&[a, b, c, d])?.block(x, y)
    }

    pub fn maps(&self) -> impl Iterator<Item = &FMap> {
        self.family.values()
    }

    /// All stored components in lexicographic label order.
    pub fn blocks(&self) -> impl Iterator<Item = &FBlock> {
        self.family.values().flat_map(|m| m.blocks())
    }

    pub fn block_count(&self) -> usize {
        self.family.values().map(|m| m.blocks.len()).sum()
    }

    /// Largest coordinate difference, treating absent blocks as zero.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut visit = |lhs: &Self, rhs: &Self, both: bool| {
            for blk in lhs.blocks() {
                let [a, b, c, d, x, y] = blk.labels();
                match rhs.block(a, b, c, d, x, y) {
                    Some(o) if both => {
                        if o.shape() != blk.shape() {
                            worst = f64::INFINITY;
                            continue;
                        }
                        for (p, q) in blk.coords().iter().zip(o.coords().iter()) {
                            worst = worst.max((p - q).norm());
                        }
                    }
                    Some(_) => {}
                    None => {
                        for p in blk.coords().iter() {
                            worst = worst.max(p.norm());
                        }
                    }
                }
            }
        };
        visit(self, other, true);
        visit(other, self, false);
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn labels(v: [usize; 6]) -> [Label; 6] {
        v.map(Label)
    }

    #[test]
    fn scalar_block_apply() {
        let rules = FusionRules::trivial();
        let q = Scalar::new(0.5, 2.0);
        let blk = FBlock::scalar(&rules, labels([0; 6]), q).unwrap();
        let v = Scalar::new(-1.0, 3.0);
        let out = block_apply(&blk, array![[v]].view()).unwrap();
        assert_eq!(out[[0, 0]], q * v);
    }

    #[test]
    fn identity_coefficients_apply_as_identity() {
        let rules = FusionRules::from_fn(1, |_, _, _| 2);
        let mut blk = FBlock::zeros(&rules, labels([0; 6])).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                blk.coords_mut()[[i, j, i, j]] = ONE;
            }
        }
        let v = array![[ONE, Scalar::new(0.0, 1.0)], [Scalar::new(3.0, 0.0), ZERO]];
        assert_eq!(block_apply(&blk, v.view()).unwrap(), v);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let rules = FusionRules::trivial();
        let blk = FBlock::scalar(&rules, labels([0; 6]), ONE).unwrap();
        let v = Array2::from_elem((2, 1), ONE);
        assert!(matches!(block_apply(&blk, v.view()), Err(Error::Shape { .. })));
    }

    #[test]
    fn identity_component_dims() {
        let rules = FusionRules::from_fn(2, |a, b, c| [1, 3, 0, 2, 1, 1, 0, 1][a * 4 + b * 2 + c]);
        let id1 = identity_component(&rules, Label(0), Label(0), Label(0)).unwrap();
        assert_eq!(id1, array![[ONE]]);
        let id3 = identity_component(&rules, Label(0), Label(0), Label(1)).unwrap();
        assert_eq!(id3, Array2::from_diag_elem(3, ONE));
        assert_eq!(id3.dot(&id3), id3);
        assert!(matches!(
            identity_component(&rules, Label(0), Label(1), Label(0)),
            Err(Error::EmptyModule { .. })
        ));
    }

    #[test]
    fn zero_dimensional_blocks_are_rejected() {
        let rules = FusionRules::from_fn(2, |a, _, _| usize::from(a == 0));
        assert!(FBlock::zeros(&rules, labels([1, 0, 0, 0, 0, 0])).is_none());
        assert!(FBlock::from_flat(&rules, labels([1, 0, 0, 0, 0, 0]), vec![]).is_err());
    }

    #[test]
    fn off_by_one_coord_count_names_block() {
        let rules = FusionRules::trivial();
        let err = FBlock::from_flat(&rules, labels([0; 6]), vec![ONE, ONE]).unwrap_err();
        assert!(err.to_string().contains("Label(0)"), "{err}");
    }

    #[test]
    fn single_block_map() {
        let rules = FusionRules::trivial();
        let q = Scalar::new(2.0, -1.0);
        let mut m = FMap::new([Label(0); 4]);
        m.insert(FBlock::scalar(&rules, labels([0; 6]), q).unwrap()).unwrap();
        assert_eq!(assemble_matrix(&rules, &m), array![[q]]);
        let v = Scalar::new(0.5, 0.5);
        let alpha = SumVector::from_flat(&rules, m.source_shape(), &[v]).unwrap();
        assert_eq!(fmap_apply(&rules, &m, &alpha).unwrap().flatten(), vec![q * v]);
        let zero = SumVector::zeros(&rules, m.source_shape());
        assert_eq!(fmap_apply(&rules, &m, &zero).unwrap().flatten(), vec![ZERO]);
    }

    #[test]
    fn disjoint_blocks_leave_zeros_off_pattern() {
        // |I| = 2, every dim 1: F_0000 has four 1x1 components.
        let rules = FusionRules::from_fn(2, |_, _, _| 1);
        let mut m = FMap::new([Label(0); 4]);
        let p = Scalar::new(3.0, 0.0);
        let q = Scalar::new(5.0, 0.0);
        m.insert(FBlock::scalar(&rules, labels([0, 0, 0, 0, 0, 1]), p).unwrap()).unwrap();
        m.insert(FBlock::scalar(&rules, labels([0, 0, 0, 0, 1, 0]), q).unwrap()).unwrap();
        assert_eq!(assemble_matrix(&rules, &m), array![[ZERO, q], [p, ZERO]]);
    }
}
