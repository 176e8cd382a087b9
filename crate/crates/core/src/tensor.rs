//! Tensor and vector forms of 6j-symbols, the contraction operator, and the
//! tensor-form pentagon check.
//!
//! The tensor of `F_abc^d|^x_y` is the functional on
//! `V_xc^d (x) V_ab^x (x) (V_ay^d)* (x) (V_bc^y)*` whose coordinates are the
//! block coefficients `R[i][j][r][s]`; the vector form lives in
//! `(V_xc^d)* (x) (V_ab^x)* (x) V_ay^d (x) V_bc^y` with the same coordinates.
//!
//! # Free-slot layout of the pentagon check
//!
//! Both sides of the tensor-form relation for `(a, b, c, d, e, x, y, p, q)`
//! keep six free slots. They are permuted into the order
//!
//! ```text
//! (V_ap^e)*, (V_bq^p)*, (V_cd^q)*, V_yd^e, V_xc^y, V_ab^x
//! ```
//!
//! so that, reshaped to a `3 + 3` matrix, a side coincides entrywise with the
//! component-form matrix of [`crate::pentagon::lhs_component`] /
//! [`crate::pentagon::rhs_component`] (rows = target, columns = source).

use ndarray::{ArrayD, Axis, IxDyn};

use crate::block::{block_shape, FBlock, FSolution};
use crate::error::{Error, Result};
use crate::pentagon::{component_dims, sweep_components, PentagonTuple};
use crate::report::ResidualReport;
use crate::rules::{FusionRules, Label};
use crate::scalar::{Scalar, ONE, ZERO};

/// A module `V_ab^c`, identified by its three labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModuleTag {
    pub a: Label,
    pub b: Label,
    pub c: Label,
}

impl ModuleTag {
    pub fn new(a: Label, b: Label, c: Label) -> Self {
        Self { a, b, c }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variance {
    /// The slot takes arguments in the module itself.
    Primal,
    /// The slot takes arguments in the dual module.
    Dual,
}

impl Variance {
    pub fn flip(self) -> Self {
        match self {
            Variance::Primal => Variance::Dual,
            Variance::Dual => Variance::Primal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slot {
    pub module: ModuleTag,
    pub variance: Variance,
    pub dim: usize,
}

/// A dense tensor whose slots carry module tags and variances.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralTensor {
    slots: Vec<Slot>,
    coords: ArrayD<Scalar>,
}

impl GeneralTensor {
    pub fn new(slots: Vec<Slot>, coords: ArrayD<Scalar>) -> Result<Self> {
        let dims: Vec<usize> = slots.iter().map(|s| s.dim).collect();
        if coords.shape() != dims.as_slice() {
            return Err(Error::Shape {
                expected: dims,
                found: coords.shape().to_vec(),
            });
        }
        Ok(Self { slots, coords })
    }

    /// A rank-zero tensor.
    pub fn scalar(q: Scalar) -> Self {
        Self {
            slots: Vec::new(),
            coords: ArrayD::from_elem(IxDyn(&[]), q),
        }
    }

    pub fn zeros(slots: Vec<Slot>) -> Self {
        let dims: Vec<usize> = slots.iter().map(|s| s.dim).collect();
        Self {
            slots,
            coords: ArrayD::from_elem(IxDyn(&dims), ZERO),
        }
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn coords(&self) -> &ArrayD<Scalar> {
        &self.coords
    }

    pub fn into_coords(self) -> ArrayD<Scalar> {
        self.coords
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    /// Reorders slots so that new slot `k` is old slot `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.rank()];
        if order.len() != self.rank() || order.iter().any(|&k| k >= self.rank() || std::mem::replace(&mut seen[k], true)) {
            return Err(Error::Shape {
                expected: vec![self.rank()],
                found: order.to_vec(),
            });
        }
        let coords = self
            .coords
            .view()
            .permuted_axes(IxDyn(order))
            .as_standard_layout()
            .into_owned();
        let slots = order.iter().map(|&k| self.slots[k]).collect();
        Ok(Self { slots, coords })
    }

    pub fn scale(&mut self, q: Scalar) {
        self.coords.mapv_inplace(|v| v * q);
    }
}

/// Outer product; slots of `t1` come first.
pub fn tensor_product(t1: &GeneralTensor, t2: &GeneralTensor) -> GeneralTensor {
    let mut slots = t1.slots.clone();
    slots.extend_from_slice(&t2.slots);
    let dims: Vec<usize> = slots.iter().map(|s| s.dim).collect();
    let mut data = Vec::with_capacity(t1.coords.len() * t2.coords.len());
    for &u in t1.coords.iter() {
        for &v in t2.coords.iter() {
            data.push(u * v);
        }
    }
    let coords = ArrayD::from_shape_vec(IxDyn(&dims), data).expect("outer product shape");
    GeneralTensor { slots, coords }
}

/// Contracts a primal slot against a dual slot of the same module; the
/// remaining slots keep their order.
pub fn contract(t: &GeneralTensor, primal_slot: usize, dual_slot: usize) -> Result<GeneralTensor> {
    let err = |reason: &str| Error::ContractionPair {
        primal: primal_slot,
        dual: dual_slot,
        reason: reason.into(),
    };
    if primal_slot == dual_slot {
        return Err(err("same slot"));
    }
    let (Some(p), Some(d)) = (t.slots.get(primal_slot), t.slots.get(dual_slot)) else {
        return Err(err("slot out of range"));
    };
    if p.variance != Variance::Primal || d.variance != Variance::Dual {
        return Err(err("variances must be primal and dual"));
    }
    if p.module != d.module {
        return Err(err("slots belong to different modules"));
    }
    if p.dim != d.dim {
        return Err(err("dimension mismatch"));
    }
    let (lo, hi) = (primal_slot.min(dual_slot), primal_slot.max(dual_slot));
    let slots: Vec<Slot> = t
        .slots
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != lo && k != hi)
        .map(|(_, s)| *s)
        .collect();
    let dims: Vec<usize> = slots.iter().map(|s| s.dim).collect();
    let mut coords = ArrayD::from_elem(IxDyn(&dims), ZERO);
    for i in 0..p.dim {
        let diag = t.coords.index_axis(Axis(hi), i);
        let diag = diag.index_axis(Axis(lo), i);
        coords += &diag;
    }
    Ok(GeneralTensor { slots, coords })
}

/// Slots `[V_xc^d, V_ab^x, V_ay^d, V_bc^y]` with the given variances.
fn sixj_slots(rules: &FusionRules, labels: [Label; 6], vars: [Variance; 4]) -> Vec<Slot> {
    let [a, b, c, d, x, y] = labels;
    let dims = block_shape(rules, labels);
    let mods = [
        ModuleTag::new(x, c, d),
        ModuleTag::new(a, b, x),
        ModuleTag::new(a, y, d),
        ModuleTag::new(b, c, y),
    ];
    (0..4)
        .map(|k| Slot {
            module: mods[k],
            variance: vars[k],
            dim: dims[k],
        })
        .collect()
}

use Variance::{Dual, Primal};

const TENSOR_VARIANCE: [Variance; 4] = [Primal, Primal, Dual, Dual];
const VECTOR_VARIANCE: [Variance; 4] = [Dual, Dual, Primal, Primal];

/// The tensor `FF_abc^d|^x_y`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor6j {
    pub labels: [Label; 6],
    pub tensor: GeneralTensor,
}

/// The vector `F_abc^d|^x_y`.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector6j {
    pub labels: [Label; 6],
    pub tensor: GeneralTensor,
}

fn sixj(rules: &FusionRules, block: &FBlock, vars: [Variance; 4]) -> GeneralTensor {
    let slots = sixj_slots(rules, block.labels(), vars);
    let coords = block.coords().clone().into_dyn();
    GeneralTensor { slots, coords }
}

pub fn to_tensor(rules: &FusionRules, block: &FBlock) -> Tensor6j {
    Tensor6j {
        labels: block.labels(),
        tensor: sixj(rules, block, TENSOR_VARIANCE),
    }
}

pub fn to_vector(rules: &FusionRules, block: &FBlock) -> Vector6j {
    Vector6j {
        labels: block.labels(),
        tensor: sixj(rules, block, VECTOR_VARIANCE),
    }
}

fn back_to_block(rules: &FusionRules, labels: [Label; 6], t: &GeneralTensor) -> Result<FBlock> {
    let coords = t
        .coords
        .clone()
        .into_dimensionality::<ndarray::Ix4>()
        .map_err(|_| Error::Shape {
            expected: vec![4],
            found: vec![t.rank()],
        })?;
    FBlock::new(rules, labels, coords)
}

impl Tensor6j {
    pub fn to_block(&self, rules: &FusionRules) -> Result<FBlock> {
        back_to_block(rules, self.labels, &self.tensor)
    }
}

impl Vector6j {
    pub fn to_block(&self, rules: &FusionRules) -> Result<FBlock> {
        back_to_block(rules, self.labels, &self.tensor)
    }
}

/// A tensor whose slots remember which factor and slot they came from, so
/// contractions can be named positionally even when module tags repeat.
struct Tracked {
    t: GeneralTensor,
    origin: Vec<(u8, u8)>,
}

impl Tracked {
    fn new(id: u8, t: GeneralTensor) -> Self {
        let origin = (0..t.rank() as u8).map(|s| (id, s)).collect();
        Self { t, origin }
    }

    fn times(&self, other: &Tracked) -> Tracked {
        let mut origin = self.origin.clone();
        origin.extend_from_slice(&other.origin);
        Tracked {
            t: tensor_product(&self.t, &other.t),
            origin,
        }
    }

    fn pos(&self, o: (u8, u8)) -> usize {
        self.origin.iter().position(|&x| x == o).expect("tracked slot")
    }

    fn contract(&self, primal: (u8, u8), dual: (u8, u8)) -> Result<Tracked> {
        let (p, d) = (self.pos(primal), self.pos(dual));
        let t = contract(&self.t, p, d)?;
        let origin = self
            .origin
            .iter()
            .copied()
            .filter(|&o| o != primal && o != dual)
            .collect();
        Ok(Tracked { t, origin })
    }

    fn into_order(self, order: &[(u8, u8)]) -> Result<GeneralTensor> {
        let idx: Vec<usize> = order.iter().map(|&o| self.pos(o)).collect();
        self.t.permuted(&idx)
    }
}

/// Coordinates of one 6j-tensor (plain or normalized), `None` when zero.
pub(crate) trait SymbolSource: Sync {
    fn rules(&self) -> &FusionRules;
    fn coords(&self, labels: [Label; 6]) -> Option<ArrayD<Scalar>>;
}

impl SymbolSource for FSolution {
    fn rules(&self) -> &FusionRules {
        FSolution::rules(self)
    }

    fn coords(&self, labels: [Label; 6]) -> Option<ArrayD<Scalar>> {
        let [a, b, c, d, x, y] = labels;
        self.block(a, b, c, d, x, y).map(|blk| blk.coords().clone().into_dyn())
    }
}

fn tensor_of(src: &impl SymbolSource, labels: [Label; 6]) -> Option<GeneralTensor> {
    let coords = src.coords(labels)?;
    let slots = sixj_slots(src.rules(), labels, TENSOR_VARIANCE);
    Some(GeneralTensor { slots, coords })
}

fn free_slots(rules: &FusionRules, t: &PentagonTuple) -> Vec<Slot> {
    let [a, b, c, d, e] = t.boundary;
    let [x, y, p, q] = t.inner.expect("component tuple");
    let m = |a, b, c, v| Slot {
        module: ModuleTag::new(a, b, c),
        variance: v,
        dim: rules.dim(a, b, c),
    };
    vec![
        m(a, p, e, Dual),
        m(b, q, p, Dual),
        m(c, d, q, Dual),
        m(y, d, e, Primal),
        m(x, c, y, Primal),
        m(a, b, x, Primal),
    ]
}

/// Both sides of the (optionally weighted) tensor-form relation in the
/// canonical free-slot order. `z_weight` multiplies the `z`-th term of the
/// left side.
pub(crate) fn tensor_sides(
    src: &impl SymbolSource,
    t: &PentagonTuple,
    z_weight: impl Fn(Label) -> Option<Scalar>,
) -> Result<(GeneralTensor, GeneralTensor)> {
    let rules = src.rules();
    t.validate(rules)?;
    let [a, b, c, d, e] = t.boundary;
    let [x, y, p, q] = t
        .inner
        .ok_or_else(|| Error::Unsupported("tensor form needs (x, y, p, q)".into()))?;
    let free = free_slots(rules, t);
    let mut lhs = GeneralTensor::zeros(free.clone());
    for z in rules.labels() {
        // FF_bcd^p|^z_q (x) FF_azd^e|^y_p (x) FF_abc^y|^x_z, contracted along
        // V_zd^p, V_bc^z and V_az^y.
        let (Some(t3), Some(t2), Some(t1)) = (
            tensor_of(src, [b, c, d, p, z, q]),
            tensor_of(src, [a, z, d, e, y, p]),
            tensor_of(src, [a, b, c, y, x, z]),
        ) else {
            continue;
        };
        let Some(w) = z_weight(z) else {
            continue;
        };
        let (t3, t2, t1) = (Tracked::new(3, t3), Tracked::new(2, t2), Tracked::new(1, t1));
        let stage = t3.times(&t2).contract((3, 0), (2, 3))?;
        let stage = stage.times(&t1).contract((3, 1), (1, 3))?;
        let stage = stage.contract((2, 1), (1, 2))?;
        let mut term = stage.into_order(&[(2, 2), (3, 2), (3, 3), (2, 0), (1, 0), (1, 1)])?;
        if w != ONE {
            term.scale(w);
        }
        lhs.coords += &term.coords;
    }
    // FF_xcd^e|^y_q (x) FF_abq^e|^x_p contracted along V_xq^e.
    let rhs = match (
        tensor_of(src, [x, c, d, e, y, q]),
        tensor_of(src, [a, b, q, e, x, p]),
    ) {
        (Some(g1), Some(g2)) => {
            let (g1, g2) = (Tracked::new(1, g1), Tracked::new(2, g2));
            g1.times(&g2)
                .contract((2, 0), (1, 2))?
                .into_order(&[(2, 2), (2, 3), (1, 3), (1, 0), (1, 1), (2, 1)])?
        }
        _ => GeneralTensor::zeros(free),
    };
    Ok((lhs, rhs))
}

/// Both sides of the tensor-form relation, free slots in canonical order.
pub fn pentagon_tensor_sides(sol: &FSolution, t: &PentagonTuple) -> Result<(GeneralTensor, GeneralTensor)> {
    tensor_sides(sol, t, |_| Some(ONE))
}

/// Max-abs difference of the two sides for one nine-label tuple.
pub fn check_pentagon_tensor(sol: &FSolution, t: &PentagonTuple) -> Result<f64> {
    let (l, r) = pentagon_tensor_sides(sol, t)?;
    Ok(max_abs_tensor_diff(&l, &r))
}

pub(crate) fn max_abs_tensor_diff(l: &GeneralTensor, r: &GeneralTensor) -> f64 {
    l.coords
        .iter()
        .zip(r.coords.iter())
        .map(|(u, v)| (u - v).norm())
        .fold(0.0, f64::max)
}

/// Reshapes a canonical-order side into the component-form matrix layout.
pub fn side_as_matrix(rules: &FusionRules, t: &PentagonTuple, side: &GeneralTensor) -> ndarray::Array2<Scalar> {
    let (s, g) = component_dims(rules, t.boundary, t.inner.expect("component tuple"));
    side.coords
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((g.iter().product::<usize>(), s.iter().product::<usize>()))
        .expect("canonical layout")
}

/// Tensor-form sweep over every live nine-label tuple.
pub fn check_all_tensor(sol: &FSolution, tol: f64) -> Result<ResidualReport> {
    sweep_components(sol.rules(), tol, |bd, inner| {
        check_pentagon_tensor(sol, &PentagonTuple::component(bd, inner))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slot(i: usize, v: Variance, dim: usize) -> Slot {
        Slot {
            module: ModuleTag::new(Label(i), Label(0), Label(0)),
            variance: v,
            dim,
        }
    }

    #[test]
    fn trace_of_identity() {
        let n = 2;
        let coords = ArrayD::from_shape_fn(IxDyn(&[n, n]), |ix| if ix[0] == ix[1] { ONE } else { ZERO });
        let t = GeneralTensor::new(vec![slot(0, Primal, n), slot(0, Dual, n)], coords).unwrap();
        let s = contract(&t, 0, 1).unwrap();
        assert_eq!(s.rank(), 0);
        assert_eq!(s.coords()[IxDyn(&[])], ONE * 2.0);
    }

    #[test]
    fn contraction_pair_errors() {
        let t = GeneralTensor::zeros(vec![slot(0, Primal, 2), slot(1, Dual, 2), slot(0, Primal, 2), slot(0, Dual, 3)]);
        assert!(matches!(contract(&t, 0, 1), Err(Error::ContractionPair { .. })));
        assert!(matches!(contract(&t, 0, 2), Err(Error::ContractionPair { .. })));
        assert!(matches!(contract(&t, 0, 3), Err(Error::ContractionPair { .. })));
        assert!(matches!(contract(&t, 0, 9), Err(Error::ContractionPair { .. })));
    }

    #[test]
    fn product_of_scalars_and_unit() {
        let p = tensor_product(&GeneralTensor::scalar(ONE * 2.0), &GeneralTensor::scalar(ONE * 3.0));
        assert_eq!(p.coords()[IxDyn(&[])], ONE * 6.0);
        let v = GeneralTensor::new(
            vec![slot(0, Primal, 2)],
            ArrayD::from_shape_vec(IxDyn(&[2]), vec![ONE, ONE * 5.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(tensor_product(&v, &GeneralTensor::scalar(ONE)), v);
        let w = GeneralTensor::new(
            vec![slot(1, Dual, 3)],
            ArrayD::from_shape_vec(IxDyn(&[3]), vec![ONE, ONE * 2.0, ONE * 3.0]).unwrap(),
        )
        .unwrap();
        let vw = tensor_product(&v, &w);
        assert_eq!(vw.coords().shape(), &[2, 3]);
        assert_eq!(vw.coords()[IxDyn(&[1, 2])], ONE * 15.0);
    }

    #[test]
    fn block_round_trips_through_tensor_and_vector() {
        let rules = FusionRules::from_fn(1, |_, _, _| 2);
        let flat: Vec<Scalar> = (0..16).map(|k| Scalar::new(k as f64, -(k as f64))).collect();
        let blk = FBlock::from_flat(&rules, [Label(0); 6], flat).unwrap();
        let t = to_tensor(&rules, &blk);
        let v = to_vector(&rules, &blk);
        assert_eq!(t.to_block(&rules).unwrap(), blk);
        assert_eq!(v.to_block(&rules).unwrap(), blk);
        assert_eq!(t.tensor.slots()[0].variance, Primal);
        assert_eq!(v.tensor.slots()[0].variance, Dual);
        assert_eq!(v.tensor.slots()[3].variance, Primal);
        assert!(t.tensor.coords().iter().eq(blk.coords().iter()));
    }
}
