//! Complex scalars and small numeric helpers shared by every module.

use num_complex::Complex64;

pub type Scalar = Complex64;

pub const ZERO: Scalar = Complex64::new(0.0, 0.0);
pub const ONE: Scalar = Complex64::new(1.0, 0.0);

#[inline]
pub fn is_finite(z: Scalar) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Largest `|a_k - b_k|` over two equally long coordinate slices.
pub fn max_abs_diff<'a>(
    a: impl IntoIterator<Item = &'a Scalar>,
    b: impl IntoIterator<Item = &'a Scalar>,
) -> f64 {
    a.into_iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs<'a>(a: impl IntoIterator<Item = &'a Scalar>) -> f64 {
    a.into_iter().map(|x| x.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finiteness_checks_both_parts() {
        assert!(is_finite(ONE));
        assert!(!is_finite(Scalar::new(0.0, f64::NAN)));
        assert!(!is_finite(Scalar::new(f64::INFINITY, 0.0)));
    }

    #[test]
    fn max_helpers() {
        let a = [ONE, Scalar::new(0.0, 2.0)];
        let b = [ZERO, Scalar::new(0.0, 2.5)];
        assert_eq!(max_abs_diff(&a, &b), 1.0);
        assert_eq!(max_abs(&a), 2.0);
        assert_eq!(max_abs(&[]), 0.0);
    }
}
