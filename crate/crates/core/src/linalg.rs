//! Small dense helpers: Kronecker products, factor permutations, inverses.

use nalgebra::DMatrix;
use ndarray::Array2;

use crate::scalar::{Scalar, ONE, ZERO};

/// `a (x) b` with the first factor most significant.
pub fn kron(a: &Array2<Scalar>, b: &Array2<Scalar>) -> Array2<Scalar> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::from_elem((ar * br, ac * bc), ZERO);
    for ((i, j), &x) in a.indexed_iter() {
        if x == ZERO {
            continue;
        }
        for ((k, l), &y) in b.indexed_iter() {
            out[[i * br + k, j * bc + l]] = x * y;
        }
    }
    out
}

pub fn eye(n: usize) -> Array2<Scalar> {
    Array2::from_diag_elem(n, ONE)
}

/// Permutation matrix sending `e_u (x) e_v (x) e_w` in `U (x) V (x) W` to
/// `e_u (x) e_w (x) e_v` in `U (x) W (x) V`.
pub fn swap_23(du: usize, dv: usize, dw: usize) -> Array2<Scalar> {
    let n = du * dv * dw;
    let mut out = Array2::from_elem((n, n), ZERO);
    for u in 0..du {
        for v in 0..dv {
            for w in 0..dw {
                out[[(u * dw + w) * dv + v, (u * dv + v) * dw + w]] = ONE;
            }
        }
    }
    out
}

pub fn max_abs_diff(a: &Array2<Scalar>, b: &Array2<Scalar>) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn to_nalgebra(a: &Array2<Scalar>) -> DMatrix<Scalar> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub fn from_nalgebra(a: &DMatrix<Scalar>) -> Array2<Scalar> {
    Array2::from_shape_fn((a.nrows(), a.ncols()), |(i, j)| a[(i, j)])
}

/// Inverse via LU, `None` for singular or non-square input.
pub fn inverse(a: &Array2<Scalar>) -> Option<Array2<Scalar>> {
    if a.nrows() != a.ncols() {
        return None;
    }
    if a.nrows() == 0 {
        return Some(a.clone());
    }
    to_nalgebra(a).try_inverse().map(|m| from_nalgebra(&m))
}

/// 2-norm condition number; infinite for singular input.
/// Singular values, largest first.
pub fn singular_values(a: &Array2<Scalar>) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = to_nalgebra(a).singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

pub fn condition_number(a: &Array2<Scalar>) -> f64 {
    if a.is_empty() {
        return 1.0;
    }
    let sv = to_nalgebra(a).singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
