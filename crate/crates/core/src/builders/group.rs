//! Finite groups given by multiplication tables, and scalar 3-cocycles on them.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::scalar::{Scalar, ONE};

/// Tolerance of the multiplicative 3-cocycle identity.
pub const COCYCLE_TOL: f64 = 1e-12;

/// A finite group on `{0, .., n-1}`; `mul[a * n + b] = a * b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupTable {
    n: usize,
    mul: Vec<usize>,
    identity: usize,
    inv: Vec<usize>,
}

impl GroupTable {
    /// Validates closure, associativity, identity and inverses.
    pub fn new(n: usize, mul: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGroup("empty table".into()));
        }
        if mul.len() != n * n {
            return Err(Error::InvalidGroup(format!("table has {} entries, expected {}", mul.len(), n * n)));
        }
        if let Some(&bad) = mul.iter().find(|&&v| v >= n) {
            return Err(Error::InvalidGroup(format!("entry {bad} outside 0..{n}")));
        }
        let m = |a: usize, b: usize| mul[a * n + b];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if m(m(a, b), c) != m(a, m(b, c)) {
                        return Err(Error::InvalidGroup(format!("({a}*{b})*{c} != {a}*({b}*{c})")));
                    }
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| m(e, a) == a && m(a, e) == a))
            .ok_or_else(|| Error::InvalidGroup("no identity".into()))?;
        let inv = (0..n)
            .map(|a| {
                (0..n)
                    .find(|&b| m(a, b) == identity && m(b, a) == identity)
                    .ok_or_else(|| Error::InvalidGroup(format!("{a} has no inverse")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, mul, identity, inv })
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        Self::new(n, (0..n * n).map(|k| (k / n.max(1) + k % n.max(1)) % n.max(1)).collect())
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.n + b]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }
}

/// Largest deviation of
/// `w(b,c,d) w(a,bc,d) w(a,b,c) = w(ab,c,d) w(a,b,cd)` over all quadruples,
/// with the quadruple where it occurs.
pub fn cocycle_deviation(g: &GroupTable, omega: impl Fn(usize, usize, usize) -> Scalar) -> (f64, [usize; 4]) {
    let n = g.order();
    let mut worst = (0.0, [0; 4]);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let lhs = omega(b, c, d) * omega(a, g.mul(b, c), d) * omega(a, b, c);
                    let rhs = omega(g.mul(a, b), c, d) * omega(a, b, g.mul(c, d));
                    let dev = (lhs - rhs).norm();
                    if !(dev <= worst.0) {
                        worst = (dev, [a, b, c, d]);
                    }
                }
            }
        }
    }
    worst
}

/// A nonvanishing scalar 3-cocycle `w: G^3 -> C*`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cocycle3 {
    group: GroupTable,
    values: Vec<Scalar>,
}

impl Cocycle3 {
    /// Accepts `values[(a * n + b) * n + c] = w(a, b, c)` after checking the
    /// cocycle identity to [`COCYCLE_TOL`].
    pub fn new(group: GroupTable, values: Vec<Scalar>) -> Result<Self> {
        let n = group.order();
        if values.len() != n * n * n {
            return Err(Error::Shape {
                expected: vec![n, n, n],
                found: vec![values.len()],
            });
        }
        if let Some(k) = values.iter().position(|v| !(v.norm() > 1e-15) || !crate::scalar::is_finite(*v)) {
            return Err(Error::InvalidCocycle {
                at: [k / (n * n), (k / n) % n, k % n, 0],
                deviation: f64::INFINITY,
            });
        }
        let (dev, at) = cocycle_deviation(&group, |a, b, c| values[(a * n + b) * n + c]);
        if !(dev <= COCYCLE_TOL) {
            return Err(Error::InvalidCocycle { at, deviation: dev });
        }
        Ok(Self { group, values })
    }

    pub fn trivial(group: GroupTable) -> Self {
        let n = group.order();
        Self {
            group,
            values: vec![ONE; n * n * n],
        }
    }

    pub fn group(&self) -> &GroupTable {
        &self.group
    }

    #[inline]
    pub fn value(&self, a: usize, b: usize, c: usize) -> Scalar {
        let n = self.group.order();
        self.values[(a * n + b) * n + c]
    }

    pub fn values(&self) -> &[Scalar] {
        &self.values
    }
}

/// `w(a, b, c) = exp(2 pi i k a floor((b + c) / n) / n)` on `Z/n`.
pub fn cocycle_cyclic(n: usize, k: usize) -> Result<Cocycle3> {
    let g = GroupTable::cyclic(n)?;
    let values = (0..n * n * n)
        .map(|idx| {
            let (a, b, c) = (idx / (n * n), (idx / n) % n, idx % n);
            let e = (k % n) * a * ((b + c) / n) % n;
            root_of_unity(e, n)
        })
        .collect();
    // A failure here is a construction bug, not an input error.
    Cocycle3::new(g, values)
}

/// `exp(2 pi i e / n)`, exact for the trivial exponent.
pub fn root_of_unity(e: usize, n: usize) -> Scalar {
    if e.is_multiple_of(n) {
        ONE
    } else {
        Scalar::from_polar(1.0, 2.0 * PI * (e % n) as f64 / n as f64)
    }
}
