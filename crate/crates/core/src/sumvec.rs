//! Elements of direct sums `(+)_{keys} U_1 (x) ... (x) U_k` whose summands are
//! tensor products of the modules `V_ab^c`.

use std::collections::BTreeMap;

use ndarray::{ArrayD, IxDyn};

use crate::error::{Error, Result};
use crate::rules::{FusionRules, Label};
use crate::scalar::{Scalar, ZERO};

/// A label slot of a module selector: either fixed or the `k`-th summand key.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sel {
    Fixed(Label),
    Key(usize),
}

impl Sel {
    #[inline]
    fn eval(self, key: &[Label]) -> Label {
        match self {
            Sel::Fixed(l) => l,
            Sel::Key(k) => key[k],
        }
    }
}

/// Selects the module `V_{lower[0] lower[1]}^{upper}` for a given summand key.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Factor {
    pub lower: [Sel; 2],
    pub upper: Sel,
}

impl Factor {
    pub fn new(a: Sel, b: Sel, c: Sel) -> Self {
        Self {
            lower: [a, b],
            upper: c,
        }
    }

    pub fn module(&self, key: &[Label]) -> (Label, Label, Label) {
        (
            self.lower[0].eval(key),
            self.lower[1].eval(key),
            self.upper.eval(key),
        )
    }

    pub fn dim(&self, rules: &FusionRules, key: &[Label]) -> usize {
        let (a, b, c) = self.module(key);
        rules.dim(a, b, c)
    }
}

/// Shape descriptor of a direct sum: the number of free key labels and the
/// ordered tensor factors of each summand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumShape {
    pub arity: usize,
    pub factors: Vec<Factor>,
}

impl SumShape {
    pub fn new(arity: usize, factors: Vec<Factor>) -> Self {
        Self { arity, factors }
    }

    pub fn dims(&self, rules: &FusionRules, key: &[Label]) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim(rules, key)).collect()
    }

    /// Keys whose summand is nonzero, in lexicographic order.
    pub fn keys(&self, rules: &FusionRules) -> Vec<Vec<Label>> {
        let n = rules.size();
        let count = n.pow(self.arity as u32);
        let mut out = Vec::new();
        let mut key = vec![Label(0); self.arity];
        for mut code in 0..count {
            for slot in (0..self.arity).rev() {
                key[slot] = Label(code % n);
                code /= n;
            }
            if self.factors.iter().all(|f| f.dim(rules, &key) > 0) {
                out.push(key.clone());
            }
        }
        out
    }

    pub fn total_dim(&self, rules: &FusionRules) -> usize {
        self.keys(rules)
            .iter()
            .map(|k| self.dims(rules, k).iter().product::<usize>())
            .sum()
    }

    /// The descriptor with factors `1` and `2` exchanged.
    pub fn swapped_23(&self) -> Result<Self> {
        if self.factors.len() != 3 {
            return Err(Error::Shape {
                expected: vec![3],
                found: vec![self.factors.len()],
            });
        }
        let f = &self.factors;
        Ok(Self::new(self.arity, vec![f[0], f[2], f[1]]))
    }
}

/// A vector of a direct sum, stored as one dense array per nonzero summand.
///
/// Every admissible key is present; the flattened layout concatenates the
/// summands in key order, each in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct SumVector {
    shape: SumShape,
    entries: BTreeMap<Vec<Label>, ArrayD<Scalar>>,
}

impl SumVector {
    pub fn zeros(rules: &FusionRules, shape: SumShape) -> Self {
        let entries = shape
            .keys(rules)
            .into_iter()
            .map(|k| {
                let dims = shape.dims(rules, &k);
                (k, ArrayD::from_elem(IxDyn(&dims), ZERO))
            })
            .collect();
        Self { shape, entries }
    }

    pub fn from_flat(rules: &FusionRules, shape: SumShape, flat: &[Scalar]) -> Result<Self> {
        let mut v = Self::zeros(rules, shape);
        let total: usize = v.entries.values().map(|a| a.len()).sum();
        if total != flat.len() {
            return Err(Error::Shape {
                expected: vec![total],
                found: vec![flat.len()],
            });
        }
        let mut offset = 0;
        for arr in v.entries.values_mut() {
            let len = arr.len();
            for (dst, src) in arr.iter_mut().zip(&flat[offset..offset + len]) {
                *dst = *src;
            }
            offset += len;
        }
        Ok(v)
    }

    pub fn shape(&self) -> &SumShape {
        &self.shape
    }

    pub fn get(&self, key: &[Label]) -> Option<&ArrayD<Scalar>> {
        self.entries.get(key)
    }

    pub fn get_mut(&mut self, key: &[Label]) -> Option<&mut ArrayD<Scalar>> {
        self.entries.get_mut(key)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<Label>, &ArrayD<Scalar>)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(|a| a.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Summand offsets within the flattened layout.
    pub fn offsets(&self) -> BTreeMap<Vec<Label>, usize> {
        let mut acc = 0;
        self.entries
            .iter()
            .map(|(k, a)| {
                let here = acc;
                acc += a.len();
                (k.clone(), here)
            })
            .collect()
    }

    pub fn flatten(&self) -> Vec<Scalar> {
        self.entries
            .values()
            .flat_map(|a| a.iter().copied())
            .collect()
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: Scalar, other: &Self, b: Scalar) -> Result<Self> {
        if self.shape != other.shape || self.entries.len() != other.entries.len() {
            return Err(Error::Shape {
                expected: vec![self.len()],
                found: vec![other.len()],
            });
        }
        let mut out = self.clone();
        for (arr, o) in out.entries.values_mut().zip(other.entries.values()) {
            arr.zip_mut_with(o, |x, y| *x = a * *x + b * *y);
        }
        Ok(out)
    }

    /// Exchanges the second and third tensor factor of every summand; keys
    /// are kept.
    pub fn permute_23(&self) -> Result<Self> {
        let shape = self.shape.swapped_23()?;
        let entries = self
            .entries
            .iter()
            .map(|(k, a)| {
                let p = a.view().permuted_axes(IxDyn(&[0, 2, 1]));
                (k.clone(), p.as_standard_layout().into_owned())
            })
            .collect();
        Ok(Self { shape, entries })
    }
}

/// Free function form of [`SumVector::permute_23`].
pub fn permute_23(alpha: &SumVector) -> Result<SumVector> {
    alpha.permute_23()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ONE;

    fn three_factor_rules() -> FusionRules {
        FusionRules::from_fn(2, |a, b, c| 1 + (a + b + c) % 3)
    }

    fn shape() -> SumShape {
        use Sel::*;
        SumShape::new(
            2,
            vec![
                Factor::new(Key(1), Fixed(Label(1)), Fixed(Label(0))),
                Factor::new(Key(0), Fixed(Label(0)), Key(1)),
                Factor::new(Fixed(Label(0)), Fixed(Label(1)), Key(0)),
            ],
        )
    }

    #[test]
    fn index_swap_by_definition() {
        let rules = three_factor_rules();
        let mut v = SumVector::zeros(&rules, shape());
        let key = vec![Label(1), Label(0)];
        let dims = shape().dims(&rules, &key);
        assert!(dims[1] > 1 && dims[2] > 2, "{dims:?}");
        let z = Scalar::new(0.25, -3.0);
        v.get_mut(&key).unwrap()[[0, 1, 2]] = z;
        let p = v.permute_23().unwrap();
        assert_eq!(p.get(&key).unwrap()[[0, 2, 1]], z);
    }

    #[test]
    fn one_by_one_permute_is_identity() {
        let rules = FusionRules::trivial();
        use Sel::*;
        let f = Factor::new(Fixed(Label(0)), Fixed(Label(0)), Fixed(Label(0)));
        let s = SumShape::new(0, vec![f, f, f]);
        let v = SumVector::from_flat(&rules, s, &[Scalar::new(2.0, 1.0)]).unwrap();
        assert_eq!(v.permute_23().unwrap().flatten(), v.flatten());
    }

    #[test]
    fn flat_round_trip() {
        let rules = three_factor_rules();
        let n = shape().total_dim(&rules);
        let flat: Vec<_> = (0..n).map(|i| ONE * i as f64).collect();
        let v = SumVector::from_flat(&rules, shape(), &flat).unwrap();
        assert_eq!(v.flatten(), flat);
        assert!(SumVector::from_flat(&rules, shape(), &flat[1..]).is_err());
    }
}
