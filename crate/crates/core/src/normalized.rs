//! Normalized symbols `|a b x; c d y| = FF_abc^d|^x_y / w_y`, the weighted
//! Biedenharn-Elliott check and the symmetry test.

use std::collections::BTreeMap;

use ndarray::ArrayD;
use rayon::prelude::*;

use crate::block::{FBlock, FSolution};
use crate::error::{Error, Result};
use crate::pentagon::{sweep_components, PentagonTuple};
use crate::report::ResidualReport;
use crate::rules::{FusionRules, Label};
use crate::scalar::{is_finite, Scalar, ZERO};
use crate::tensor::{max_abs_tensor_diff, tensor_sides, SymbolSource};

/// Smallest admissible weight magnitude.
pub const MIN_WEIGHT: f64 = 1e-15;

/// Nonzero weights `w_x`, one per colour.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSystem {
    w: Vec<Scalar>,
}

impl WeightSystem {
    pub fn new(w: Vec<Scalar>) -> Result<Self> {
        for (i, v) in w.iter().enumerate() {
            if !is_finite(*v) {
                return Err(Error::NonFinite(format!("weight of label {i}")));
            }
            if !(v.norm() > MIN_WEIGHT) {
                return Err(Error::ZeroWeight(Label(i)));
            }
        }
        Ok(Self { w })
    }

    pub fn ones(n: usize) -> Self {
        Self {
            w: vec![Scalar::new(1.0, 0.0); n],
        }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    #[inline]
    pub fn get(&self, x: Label) -> Scalar {
        self.w[x.0]
    }

    pub fn values(&self) -> &[Scalar] {
        &self.w
    }

    fn check_total(&self, rules: &FusionRules) -> Result<()> {
        if self.w.len() < rules.size() {
            return Err(Error::MissingWeight(Label(self.w.len())));
        }
        if self.w.len() > rules.size() {
            return Err(Error::InvalidLabel {
                index: self.w.len() - 1,
                size: rules.size(),
            });
        }
        Ok(())
    }
}

/// One normalized symbol; coordinates in 6j-tensor slot order.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedSymbol {
    pub labels: [Label; 6],
    pub coords: ArrayD<Scalar>,
}

/// All normalized symbols of a solution with the weights used.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedFamily {
    rules: FusionRules,
    weights: WeightSystem,
    symbols: BTreeMap<[Label; 6], NormalizedSymbol>,
}

impl NormalizedFamily {
    pub fn rules(&self) -> &FusionRules {
        &self.rules
    }

    pub fn weights(&self) -> &WeightSystem {
        &self.weights
    }

    pub fn symbol(&self, labels: [Label; 6]) -> Option<&NormalizedSymbol> {
        self.symbols.get(&labels)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &NormalizedSymbol> {
        self.symbols.values()
    }

    /// Scalar value of a multiplicity-free symbol, zero when absent.
    fn scalar(&self, labels: [Label; 6]) -> Scalar {
        self.symbols
            .get(&labels)
            .and_then(|s| s.coords.iter().next().copied())
            .unwrap_or(ZERO)
    }
}

impl SymbolSource for NormalizedFamily {
    fn rules(&self) -> &FusionRules {
        &self.rules
    }

    fn coords(&self, labels: [Label; 6]) -> Option<ArrayD<Scalar>> {
        self.symbols.get(&labels).map(|s| s.coords.clone())
    }
}

/// Divides every tensor by `w_y` of its lower-right label.
pub fn normalize(sol: &FSolution, w: &WeightSystem) -> Result<NormalizedFamily> {
    w.check_total(sol.rules())?;
    let symbols = sol
        .blocks()
        .map(|blk| {
            let labels = blk.labels();
            let wy = w.get(labels[5]);
            let coords = blk.coords().mapv(|v| v / wy).into_dyn();
            (labels, NormalizedSymbol { labels, coords })
        })
        .collect();
    Ok(NormalizedFamily {
        rules: sol.rules().clone(),
        weights: w.clone(),
        symbols,
    })
}

/// Inverse of [`normalize`].
pub fn denormalize(family: &NormalizedFamily) -> Result<FSolution> {
    let rules = &family.rules;
    let mut sol = FSolution::new(rules.clone());
    for s in family.symbols.values() {
        let wy = family.weights.get(s.labels[5]);
        let coords = s
            .coords
            .mapv(|v| v * wy)
            .into_dimensionality()
            .map_err(|_| Error::Block {
                labels: s.labels,
                reason: "symbol is not a 4-index array".into(),
            })?;
        sol.insert_block(FBlock::new(rules, s.labels, coords)?)?;
    }
    Ok(sol)
}

/// Max-abs difference of `sum_z w_z * (triple contraction)` and the double
/// contraction of normalized symbols for one nine-label tuple.
///
/// Every term of either side picks up `1 / (w_p w_q)` relative to the plain
/// tensor form, so the residual is the tensor-form residual times
/// `|1 / (w_p w_q)|`.
pub fn check_biedenharn_elliott(family: &NormalizedFamily, t: &PentagonTuple) -> Result<f64> {
    let w = &family.weights;
    let (l, r) = tensor_sides(family, t, |z| Some(w.get(z)))?;
    Ok(max_abs_tensor_diff(&l, &r))
}

/// Weighted sweep over every live nine-label tuple.
pub fn check_all_be(family: &NormalizedFamily, tol: f64) -> Result<ResidualReport> {
    sweep_components(&family.rules, tol, |bd, inner| {
        check_biedenharn_elliott(family, &PentagonTuple::component(bd, inner))
    })
}

/// Outcome of the symmetry test for one label sextuple.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Symmetry {
    Symmetric(f64),
    Asymmetric(f64),
    /// Some module in the three symbols has dimension above one.
    NotApplicable,
}

/// The three sextuples compared by the symmetry test:
/// `|a b x; c d y|`, `|b a x; d c y|`, `|y d a; x b c|`.
pub fn symmetry_variants([a, b, c, d, x, y]: [Label; 6]) -> [[Label; 6]; 3] {
    [[a, b, c, d, x, y], [b, a, d, c, x, y], [y, d, x, b, a, c]]
}

/// Compares `|a b x; c d y| = |b a x; d c y| = |y d a; x b c|`.
///
/// A symbol whose block has a zero-dimensional module is zero.
pub fn check_symmetry(family: &NormalizedFamily, labels: [Label; 6], tol: f64) -> Result<Symmetry> {
    let rules = &family.rules;
    for l in labels {
        rules.check_label(l)?;
    }
    let variants = symmetry_variants(labels);
    let mf = variants
        .iter()
        .all(|v| crate::block::block_shape(rules, *v).iter().all(|&n| n <= 1));
    if !mf {
        return Ok(Symmetry::NotApplicable);
    }
    let s = variants.map(|v| family.scalar(v));
    let res = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| (s[i] - s[j]).norm())
        .fold(0.0, f64::max);
    Ok(if res <= tol {
        Symmetry::Symmetric(res)
    } else {
        Symmetry::Asymmetric(res)
    })
}

/// Symmetry test over all sextuples with at least one nonzero symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryReport {
    pub symmetric: usize,
    pub asymmetric: usize,
    pub not_applicable: usize,
    pub worst: Option<([Label; 6], f64)>,
}

pub fn check_symmetry_all(family: &NormalizedFamily, tol: f64) -> Result<SymmetryReport> {
    let n = family.rules.size();
    let all: Vec<[Label; 6]> = (0..n.pow(6))
        .map(|k| {
            let mut l = [Label(0); 6];
            let mut r = k;
            for slot in l.iter_mut().rev() {
                *slot = Label(r % n);
                r /= n;
            }
            l
        })
        .filter(|&l| symmetry_variants(l).iter().any(|v| family.symbols.contains_key(v)))
        .collect();
    let outcomes = all
        .par_iter()
        .map(|&l| check_symmetry(family, l, tol).map(|s| (l, s)))
        .collect::<Result<Vec<_>>>()?;
    let mut rep = SymmetryReport {
        symmetric: 0,
        asymmetric: 0,
        not_applicable: 0,
        worst: None,
    };
    for (l, s) in outcomes {
        let res = match s {
            Symmetry::Symmetric(r) => {
                rep.symmetric += 1;
                r
            }
            Symmetry::Asymmetric(r) => {
                rep.asymmetric += 1;
                r
            }
            Symmetry::NotApplicable => {
                rep.not_applicable += 1;
                continue;
            }
        };
        if rep.worst.is_none_or(|(_, w)| res > w) {
            rep.worst = Some((l, res));
        }
    }
    Ok(rep)
}
