use std::collections::BTreeMap;

use crate::rules::Label;

/// Per-tuple residuals of a sweep and their maximum.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub per_tuple: BTreeMap<Vec<Label>, f64>,
    pub overall: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Tuples skipped because every relevant module is zero-dimensional.
    pub vacuous_count: u64,
}

impl ResidualReport {
    pub fn new(per_tuple: BTreeMap<Vec<Label>, f64>, tolerance: f64, vacuous_count: u64) -> Self {
        // NaN never compares below a tolerance, so it must not vanish in the max.
        let overall = per_tuple
            .values()
            .map(|&r| if r.is_nan() { f64::INFINITY } else { r })
            .fold(0.0, f64::max);
        Self {
            per_tuple,
            overall,
            tolerance,
            passed: overall <= tolerance,
            vacuous_count,
        }
    }

    pub fn tuples_checked(&self) -> usize {
        self.per_tuple.len()
    }

    /// The `k` largest residuals, ties broken by tuple order.
    pub fn worst(&self, k: usize) -> Vec<(Vec<Label>, f64)> {
        let mut all: Vec<_> = self.per_tuple.iter().map(|(t, &r)| (t.clone(), r)).collect();
        all.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        all.truncate(k);
        all
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_is_max_and_pass_flag_follows() {
        let mut m = BTreeMap::new();
        m.insert(vec![Label(0)], 1e-12);
        m.insert(vec![Label(1)], 3e-11);
        let r = ResidualReport::new(m.clone(), 1e-10, 4);
        assert_eq!(r.overall, 3e-11);
        assert!(r.passed);
        assert_eq!(r.worst(1)[0].0, vec![Label(1)]);
        assert!(!ResidualReport::new(m, 1e-11, 0).passed);
    }

    #[test]
    fn nan_fails() {
        let mut m = BTreeMap::new();
        m.insert(vec![Label(0)], f64::NAN);
        assert!(!ResidualReport::new(m, 1.0, 0).passed);
    }

    #[test]
    fn empty_sweep_passes() {
        let r = ResidualReport::new(BTreeMap::new(), 0.0, 7);
        assert_eq!(r.overall, 0.0);
        assert!(r.passed);
    }
}
