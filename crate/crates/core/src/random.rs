//! Random fusion rules and (generally non-solution) block families, used for
//! form-equivalence checks and solver starts.

use rand::Rng;

use crate::block::{block_shape, FBlock, FSolution};
use crate::rules::{FusionRules, Label};
use crate::scalar::Scalar;

/// Uniform in the square `[-1, 1] + i[-1, 1]`.
pub fn scalar(rng: &mut impl Rng) -> Scalar {
    Scalar::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
}

/// `1..=max_size` colours, every dimension uniform in `0..=max_dim`.
pub fn rules(rng: &mut impl Rng, max_size: usize, max_dim: usize) -> FusionRules {
    let n = rng.random_range(1..=max_size);
    FusionRules::from_fn(n, |_, _, _| rng.random_range(0..=max_dim))
}

/// Every admissible `(a, b, c, d, x, y)` in lexicographic order.
pub fn admissible_blocks(rules: &FusionRules) -> Vec<[Label; 6]> {
    let n = rules.size();
    let mut out = Vec::new();
    for code in 0..n.pow(6) {
        let mut l = [Label(0); 6];
        let mut c = code;
        for slot in (0..6).rev() {
            l[slot] = Label(c % n);
            c /= n;
        }
        if !block_shape(rules, l).contains(&0) {
            out.push(l);
        }
    }
    out
}

/// A family with every admissible block filled with [`scalar`] entries.
pub fn solution(rules: &FusionRules, rng: &mut impl Rng) -> FSolution {
    let mut sol = FSolution::new(rules.clone());
    for labels in admissible_blocks(rules) {
        let n: usize = block_shape(rules, labels).iter().product();
        let flat = (0..n).map(|_| scalar(rng)).collect();
        sol.insert_block(FBlock::from_flat(rules, labels, flat).expect("admissible"))
            .expect("consistent shape");
    }
    sol
}
