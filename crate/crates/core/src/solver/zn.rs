//! Diagonal reduction of integer matrices over `Z/n`.

/// Extended Euclid on nonnegative integers: `(g, s, t)` with `s a + t b = g`.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, s, t) = ext_gcd(b, a % b);
        (g, t, s - (a / b) * t)
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// One recorded row operation.
#[derive(Clone, Copy, Debug)]
enum RowOp {
    Swap(usize, usize),
    /// `(row_i, row_j) <- (s row_i + t row_j, u row_i + v row_j)` with
    /// `s v - t u = 1`.
    Mix { i: usize, j: usize, s: u64, t: u64, u: u64, v: u64 },
}

/// Result of reducing `M` to `U M V = D` with `D` diagonal.
#[derive(Clone, Debug)]
pub struct Diagonal {
    pub n: u64,
    pub rows: usize,
    pub cols: usize,
    /// Diagonal entries `D[k][k]` in `0..n`, one per pivot position.
    pub diag: Vec<u64>,
    row_ops: Vec<RowOp>,
    /// `V` as column-major columns, when requested.
    pub right: Option<Vec<Vec<u64>>>,
}

/// Dense matrix with entries in `0..n`.
#[derive(Clone, Debug)]
pub struct ZnMatrix {
    n: u64,
    rows: usize,
    cols: usize,
    data: Vec<Vec<u64>>,
}

impl ZnMatrix {
    pub fn zeros(n: u64, rows: usize, cols: usize) -> Self {
        Self {
            n,
            rows,
            cols,
            data: vec![vec![0; cols]; rows],
        }
    }

    pub fn from_rows(n: u64, cols: usize, rows: Vec<Vec<u64>>) -> Self {
        let data: Vec<Vec<u64>> = rows.into_iter().map(|r| r.into_iter().map(|v| v % n).collect()).collect();
        Self {
            n,
            rows: data.len(),
            cols,
            data,
        }
    }

    pub fn add(&mut self, r: usize, c: usize, v: i64) {
        let n = self.n as i64;
        let cur = self.data[r][c] as i64;
        self.data[r][c] = (cur + v).rem_euclid(n) as u64;
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r][c]
    }

    /// `M x` over `Z/n`.
    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        let n = self.n as u128;
        self.data
            .iter()
            .map(|row| {
                (row.iter().zip(x).map(|(&a, &b)| a as u128 * b as u128).sum::<u128>() % n) as u64
            })
            .collect()
    }

    /// Reduces to diagonal form with unimodular row and column operations.
    pub fn diagonalize(mut self, track_right: bool) -> Diagonal {
        let n = self.n;
        let (rows, cols) = (self.rows, self.cols);
        let mut right: Option<Vec<Vec<u64>>> = track_right.then(|| {
            (0..cols)
                .map(|c| (0..cols).map(|r| u64::from(r == c) % n).collect())
                .collect()
        });
        let mut row_ops = Vec::new();
        let mut diag = Vec::new();
        // Columns are stored transposed for cheap column operations on V.
        let mut t = 0;
        while t < rows.min(cols) {
            // Pivot: the entry with the smallest gcd with n.
            let mut best: Option<(u64, usize, usize)> = None;
            'search: for r in t..rows {
                let row = &self.data[r];
                for (c, &v) in row.iter().enumerate().skip(t) {
                    if v != 0 {
                        let g = gcd(v, n);
                        if best.is_none_or(|(bg, _, _)| g < bg) {
                            best = Some((g, r, c));
                            if g == 1 {
                                break 'search;
                            }
                        }
                    }
                }
            }
            let Some((_, pr, pc)) = best else { break };
            if pr != t {
                self.data.swap(pr, t);
                row_ops.push(RowOp::Swap(pr, t));
            }
            if pc != t {
                for row in &mut self.data {
                    row.swap(pc, t);
                }
                if let Some(v) = right.as_mut() {
                    v.swap(pc, t);
                }
            }
            loop {
                let mut dirty = false;
                // Clear column t below the pivot.
                for r in t + 1..rows {
                    let b = self.data[r][t];
                    if b == 0 {
                        continue;
                    }
                    let a = self.data[t][t];
                    let op = mix_coeffs(a, b, n);
                    self.mix_rows(t, r, op);
                    row_ops.push(RowOp::Mix { i: t, j: r, s: op.0, t: op.1, u: op.2, v: op.3 });
                }
                // Clear row t right of the pivot.
                for c in t + 1..cols {
                    let b = self.data[t][c];
                    if b == 0 {
                        continue;
                    }
                    let a = self.data[t][t];
                    let op = mix_coeffs(a, b, n);
                    self.mix_cols(t, c, op);
                    if let Some(v) = right.as_mut() {
                        mix_vecs(v, t, c, op, n);
                    }
                    dirty = true;
                }
                if !dirty || (t + 1..rows).all(|r| self.data[r][t] == 0) {
                    break;
                }
            }
            diag.push(self.data[t][t]);
            t += 1;
        }
        Diagonal {
            n,
            rows,
            cols,
            diag,
            row_ops,
            right,
        }
    }

    fn mix_rows(&mut self, i: usize, j: usize, (s, t, u, v): (u64, u64, u64, u64)) {
        let n = self.n as u128;
        let (ri, rj) = pair_mut(&mut self.data, i, j);
        for (x, y) in ri.iter_mut().zip(rj.iter_mut()) {
            let (a, b) = (*x as u128, *y as u128);
            *x = ((s as u128 * a + t as u128 * b) % n) as u64;
            *y = ((u as u128 * a + v as u128 * b) % n) as u64;
        }
    }

    fn mix_cols(&mut self, i: usize, j: usize, (s, t, u, v): (u64, u64, u64, u64)) {
        let n = self.n as u128;
        for row in &mut self.data {
            let (a, b) = (row[i] as u128, row[j] as u128);
            row[i] = ((s as u128 * a + t as u128 * b) % n) as u64;
            row[j] = ((u as u128 * a + v as u128 * b) % n) as u64;
        }
    }
}

fn pair_mut<T>(v: &mut [T], i: usize, j: usize) -> (&mut T, &mut T) {
    assert_ne!(i, j);
    if i < j {
        let (lo, hi) = v.split_at_mut(j);
        (&mut lo[i], &mut hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(i);
        (&mut hi[0], &mut lo[j])
    }
}

fn mix_vecs(v: &mut [Vec<u64>], i: usize, j: usize, (s, t, u, w): (u64, u64, u64, u64), n: u64) {
    let n = n as u128;
    let (ci, cj) = pair_mut(v, i, j);
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let (a, b) = (*x as u128, *y as u128);
        *x = ((s as u128 * a + t as u128 * b) % n) as u64;
        *y = ((u as u128 * a + w as u128 * b) % n) as u64;
    }
}

/// Unimodular `(s, t, u, v)` sending `(a, b)` to `(g, 0)` with `g` generating
/// the ideal of `a` and `b`. When `a` already divides `b` in `Z/n` the pivot
/// row is left alone.
fn mix_coeffs(a: u64, b: u64, n: u64) -> (u64, u64, u64, u64) {
    let ga = gcd(a, n);
    if b.is_multiple_of(ga) {
        let (na, nn) = ((a / ga) as i64, (n / ga) as i64);
        let (_, inv, _) = ext_gcd(na, nn);
        let q = ((b / ga) as i128 * inv.rem_euclid(nn.max(1)) as i128).rem_euclid(nn as i128) as u64;
        return (1, 0, (n - q % n) % n, 1);
    }
    let (g, s, t) = ext_gcd(a as i64, b as i64);
    let m = |x: i64| x.rem_euclid(n as i64) as u64;
    // [s t; -b/g a/g] has determinant (s a + t b) / g = 1.
    (m(s), m(t), m(-(b as i64 / g)), m(a as i64 / g))
}

impl Diagonal {
    /// Applies the recorded row operations, i.e. computes `U y`.
    pub fn left_apply(&self, y: &[u64]) -> Vec<u64> {
        let n = self.n as u128;
        let mut y: Vec<u64> = y.iter().map(|v| v % self.n).collect();
        for op in &self.row_ops {
            match *op {
                RowOp::Swap(i, j) => y.swap(i, j),
                RowOp::Mix { i, j, s, t, u, v } => {
                    let (a, b) = (y[i] as u128, y[j] as u128);
                    y[i] = ((s as u128 * a + t as u128 * b) % n) as u64;
                    y[j] = ((u as u128 * a + v as u128 * b) % n) as u64;
                }
            }
        }
        y
    }

    /// Whether `M x = y` has a solution over `Z/n`.
    pub fn in_image(&self, y: &[u64]) -> bool {
        let z = self.left_apply(y);
        z.iter().enumerate().all(|(k, &zk)| match self.diag.get(k) {
            Some(&d) => zk % gcd(d, self.n) == 0,
            None => zk == 0,
        })
    }

    /// Generators of `ker M` (requires the right transform), with their orders.
    pub fn kernel(&self) -> Vec<(Vec<u64>, u64)> {
        let v = self.right.as_ref().expect("right transform tracked");
        let n = self.n;
        let mut out = Vec::new();
        for (k, col) in v.iter().enumerate() {
            // d y = 0 (mod n) iff y is a multiple of n / gcd(d, n).
            let d = self.diag.get(k).copied().unwrap_or(0);
            let step = n / gcd(d, n);
            if step == n {
                continue;
            }
            let gen: Vec<u64> = col.iter().map(|&x| (x as u128 * step as u128 % n as u128) as u64).collect();
            out.push((gen, n / step));
        }
        out
    }

    /// `|ker M|` and `|im M|` as prime-exponent maps over the primes of `n`.
    pub fn kernel_order(&self) -> Factored {
        let mut f = Factored::default();
        for k in 0..self.cols {
            let d = self.diag.get(k).copied().unwrap_or(0);
            f.mul(gcd(d, self.n));
        }
        f
    }

    pub fn image_order(&self) -> Factored {
        let mut f = Factored::default();
        for &d in &self.diag {
            f.mul(self.n / gcd(d, self.n));
        }
        f
    }
}

/// A positive integer kept as prime exponents (orders of large finite groups).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Factored(pub std::collections::BTreeMap<u64, i64>);

impl Factored {
    pub fn mul(&mut self, mut x: u64) {
        let mut p = 2;
        while x > 1 {
            while x.is_multiple_of(p) {
                *self.0.entry(p).or_insert(0) += 1;
                x /= p;
            }
            p += 1;
        }
    }

    pub fn div(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&p, &e) in &other.0 {
            *out.0.entry(p).or_insert(0) -= e;
        }
        out.0.retain(|_, e| *e != 0);
        out
    }

    /// The value, if it is a nonnegative power product that fits in `u64`.
    pub fn value(&self) -> Option<u64> {
        self.0.iter().try_fold(1u64, |acc, (&p, &e)| {
            if e < 0 {
                None
            } else {
                acc.checked_mul(p.checked_pow(e as u32)?)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_of_small_matrix() {
        // [[2, 4], [6, 8]] over Z/12
        let m = ZnMatrix::from_rows(12, 2, vec![vec![2, 4], vec![6, 8]]);
        let d = m.clone().diagonalize(true);
        let ker = d.kernel();
        for (g, _) in &ker {
            assert!(m.apply(g).iter().all(|&v| v == 0));
        }
        // |ker| * |im| = 12^2
        let mut total = d.kernel_order();
        for (p, e) in d.image_order().0 {
            *total.0.entry(p).or_insert(0) += e;
        }
        assert_eq!(total.value(), Some(144));
    }

    #[test]
    fn image_membership() {
        let m = ZnMatrix::from_rows(6, 1, vec![vec![2], vec![4]]);
        let d = m.diagonalize(false);
        assert!(d.in_image(&[2, 4]));
        assert!(d.in_image(&[4, 2]));
        assert!(!d.in_image(&[1, 2]));
        assert!(!d.in_image(&[2, 2]));
    }
}
