//! Concrete solutions: trivial, pointed (group + 3-cocycle), Fibonacci, and
//! the construction from skeletal associator data.

pub mod fibonacci;
pub mod group;
pub mod skeletal;

use crate::block::{FBlock, FSolution};
use crate::error::Result;
use crate::rules::{FusionRules, Label};
use crate::scalar::ONE;

pub use fibonacci::{fibonacci_solution, solve_fibonacci, FIBONACCI_TOL};
pub use group::{cocycle_cyclic, Cocycle3, GroupTable};
pub use skeletal::{associator_coherence, from_skeletal, SkeletalAssociator};

/// One colour, every dimension 1, every block `[1]`.
pub fn trivial_solution() -> FSolution {
    let rules = FusionRules::trivial();
    let mut sol = FSolution::new(rules.clone());
    sol.insert_block(FBlock::scalar(&rules, [Label(0); 6], ONE).expect("1x1 block"))
        .expect("trivial block");
    sol
}

/// `N[a][b][c] = 1` iff `c = b * a` (from `V_ab^c = Hom(c -> b (x) a)`).
pub fn pointed_rules(g: &GroupTable) -> FusionRules {
    FusionRules::from_fn(g.order(), |a, b, c| usize::from(c == g.mul(b, a)))
}

/// The pointed solution of a 3-cocycle.
///
/// With `x = ba`, `y = cb` and `d = cba`, the single nonzero component of
/// `F_abc^d` is `F_abc^d|^x_y = 1 / omega(c, b, a)`: the associator
/// `alpha_{c,b,a}` is the scalar `omega(c, b, a)` and `A`, `B` are identities
/// on one-dimensional Hom spaces.
pub fn pointed_solution(g: &GroupTable, omega: &Cocycle3) -> Result<FSolution> {
    if omega.group() != g {
        return Err(crate::error::Error::InvalidGroup("cocycle is defined on another group".into()));
    }
    // Re-validate in case the cocycle was built for an equal table elsewhere.
    let omega = Cocycle3::new(g.clone(), omega.values().to_vec())?;
    let rules = pointed_rules(g);
    let mut sol = FSolution::new(rules.clone());
    for a in 0..g.order() {
        for b in 0..g.order() {
            for c in 0..g.order() {
                let x = g.mul(b, a);
                let y = g.mul(c, b);
                let d = g.mul(c, x);
                let labels = [a, b, c, d, x, y].map(Label);
                sol.insert_block(FBlock::scalar(&rules, labels, ONE / omega.value(c, b, a))?)?;
            }
        }
    }
    Ok(sol)
}
