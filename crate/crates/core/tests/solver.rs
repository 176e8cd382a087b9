use penta::builders::{cocycle_cyclic, pointed_rules, pointed_solution, GroupTable};
use penta::pentagon::{check_all, Form};
use penta::solver::gauge::{apply_gauge, fingerprint, fingerprint_distance};
use penta::solver::lm::random_point;
use penta::solver::{enumerate_cocycles, jacobian_check, solve_multiplicity_free, SolveOptions};
use penta::{FSolution, FusionRules, Label, Scalar};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `F(1,1,1) F(1,0,0) / F(0,1,1)` on `Z/2`, where `F(a,b,c)` is the only
/// block of `F_abc^{a+b+c}`; basis rescalings cancel in this ratio.
fn z2_class_invariant(sol: &FSolution) -> Scalar {
    let f = |a: usize, b: usize, c: usize| {
        let l = |v: usize| Label(v % 2);
        sol.block(l(a), l(b), l(c), l(a + b + c), l(a + b), l(b + c))
            .map_or(Scalar::new(0.0, 0.0), |blk| blk.coords()[[0, 0, 0, 0]])
    };
    f(1, 1, 1) * f(1, 0, 0) / f(0, 1, 1)
}

#[test]
fn class_invariant_ignores_gauge() {
    let g = GroupTable::cyclic(2).unwrap();
    let sol = pointed_solution(&g, &cocycle_cyclic(2, 1).unwrap()).unwrap();
    let u = |a: Label, b: Label, c: Label| Scalar::new(1.0 + (a.0 + 2 * b.0 + 3 * c.0) as f64, 0.5);
    let moved = apply_gauge(&sol, u).unwrap();
    assert!((z2_class_invariant(&moved) - z2_class_invariant(&sol)).norm() <= 1e-12);
    assert!(fingerprint_distance(&fingerprint(&moved).unwrap(), &fingerprint(&sol).unwrap()) <= 1e-9);
}

#[test]
fn z2_search_finds_both_classes() {
    let g = GroupTable::cyclic(2).unwrap();
    let rules = pointed_rules(&g);
    let report = solve_multiplicity_free(&rules, &SolveOptions::default()).unwrap();
    let found: Vec<Scalar> = report
        .attempts
        .iter()
        .filter(|r| r.converged && !r.degenerate)
        .map(|r| z2_class_invariant(&r.solution))
        .collect();
    for k in 0..2 {
        let known = pointed_solution(&g, &cocycle_cyclic(2, k).unwrap()).unwrap();
        let want = z2_class_invariant(&known);
        assert!(found.iter().any(|z| (z - want).norm() <= 1e-6), "class k={k} ({want}) not found");
        let fp = fingerprint(&known).unwrap();
        assert!(report.results.iter().any(|r| fingerprint_distance(&r.fingerprint, &fp) <= 1e-6));
    }
}

#[test]
fn converged_results_pass_the_checker() {
    for rules in [FusionRules::trivial(), FusionRules::fibonacci(), pointed_rules(&GroupTable::cyclic(3).unwrap())] {
        let opts = SolveOptions {
            starts: 12,
            seed: 4,
            ..SolveOptions::default()
        };
        let report = solve_multiplicity_free(&rules, &opts).unwrap();
        assert!(!report.results.is_empty());
        for r in &report.results {
            assert!(check_all(&r.solution, opts.residual_target, Form::Component).unwrap().passed);
            assert!(check_all(&r.solution, opts.residual_target, Form::Global).unwrap().passed);
        }
    }
}

#[test]
fn trivial_rules_rank_the_unit_first() {
    let report = solve_multiplicity_free(&FusionRules::trivial(), &SolveOptions::default()).unwrap();
    let first = report.results[0].solution.blocks().next().unwrap().coords()[[0, 0, 0, 0]];
    assert!((first - Scalar::new(1.0, 0.0)).norm() <= 1e-9);
    assert!(!report.results[0].degenerate);
    for r in &report.results[1..] {
        assert!(r.degenerate);
    }
}

#[test]
fn analytic_jacobian_matches_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for rules in [pointed_rules(&GroupTable::cyclic(2).unwrap()), FusionRules::fibonacci()] {
        for _ in 0..10 {
            let x = random_point(&rules, &mut rng).unwrap();
            let d = jacobian_check(&rules, &x).unwrap();
            assert!(d <= 1e-7, "{d}");
        }
    }
}

#[test]
fn impossible_target_reports_best_attempt() {
    let opts = SolveOptions {
        starts: 3,
        residual_target: 1e-300,
        max_iterations: 20,
        ..SolveOptions::default()
    };
    let report = solve_multiplicity_free(&FusionRules::fibonacci(), &opts).unwrap();
    assert!(report.results.is_empty());
    assert!(report.best_attempt().unwrap().residual.is_finite());
}

#[test]
fn cohomology_of_cyclic_groups_has_order_n() {
    for n in 1..=8 {
        let set = enumerate_cocycles(n).unwrap();
        assert_eq!(set.class_count, n as u64);
        assert_eq!(set.representatives.len(), n);
    }
    assert!(enumerate_cocycles(13).is_err());
    assert!(enumerate_cocycles(0).is_err());
}
