use penta::builders::group::cocycle_deviation;
use penta::builders::skeletal::{associator_coherence, from_skeletal, SkeletalAssociator};
use penta::builders::{cocycle_cyclic, pointed_solution, trivial_solution, GroupTable};
use penta::pentagon::{check_all, Form};
use penta::{FusionRules, Scalar};

#[test]
fn trivial_solution_passes_exactly() {
    let sol = trivial_solution();
    assert_eq!(sol.rules().hom_dim(penta::Label(0), penta::Label(0), penta::Label(0)).unwrap(), 1);
    for form in [Form::Global, Form::Component] {
        assert_eq!(check_all(&sol, 0.0, form).unwrap().overall, 0.0);
    }
}

#[test]
fn pointed_solutions_pass() {
    for n in 2..=4 {
        for k in 0..n {
            let w = cocycle_cyclic(n, k).unwrap();
            let (dev, _) = cocycle_deviation(w.group(), |a, b, c| w.value(a, b, c));
            assert!(dev <= 1e-12);
            let sol = pointed_solution(w.group(), &w).unwrap();
            let r = check_all(&sol, 1e-12, Form::Component).unwrap();
            assert!(r.passed, "n={n} k={k}: {}", r.overall);
        }
    }
}

#[test]
fn trivial_cocycle_gives_all_ones() {
    let w = cocycle_cyclic(3, 0).unwrap();
    let sol = pointed_solution(w.group(), &w).unwrap();
    assert!(sol.blocks().all(|b| b.coords().iter().all(|&v| v == Scalar::new(1.0, 0.0))));
}

#[test]
fn skeletal_matches_pointed() {
    for (n, k) in [(2, 1), (3, 1), (3, 2)] {
        let w = cocycle_cyclic(n, k).unwrap();
        let assoc = SkeletalAssociator::pointed(&w).unwrap();
        assert!(associator_coherence(&assoc) <= 1e-12);
        let sk = from_skeletal(&assoc).unwrap();
        let pt = pointed_solution(w.group(), &w).unwrap();
        assert!(sk.max_abs_diff(&pt) <= 1e-14);
        assert!(check_all(&sk, 1e-10, Form::Component).unwrap().passed);
    }
}

#[test]
fn identity_associator_gives_trivial_solution() {
    let assoc = SkeletalAssociator::identity(FusionRules::trivial()).unwrap();
    assert_eq!(from_skeletal(&assoc).unwrap(), trivial_solution());
}

#[test]
fn incoherent_associator_is_detected() {
    let g = GroupTable::cyclic(2).unwrap();
    let rules = penta::builders::pointed_rules(&g);
    let mut assoc = SkeletalAssociator::identity(rules).unwrap();
    let key = [1, 1, 1, 1].map(penta::Label);
    assoc.insert(key, ndarray::Array2::from_elem((1, 1), Scalar::new(2.0, 0.0))).unwrap();
    assert!(associator_coherence(&assoc) > 0.5);
    let sol = from_skeletal(&assoc).unwrap();
    assert!(!check_all(&sol, 1e-10, Form::Component).unwrap().passed);
}

#[test]
fn fibonacci_cache_solves_the_relation() {
    use penta::builders::{fibonacci_solution, FIBONACCI_TOL};
    use penta::solver::gauge::mixing_matrices;
    let sol = fibonacci_solution().unwrap();
    assert!(check_all(&sol, FIBONACCI_TOL, Form::Component).unwrap().passed);
    assert!(check_all(&sol, FIBONACCI_TOL, Form::Global).unwrap().passed);
    let (_, m) = &mixing_matrices(&sol).unwrap()[0];
    let sq = m.dot(m);
    let eye = penta::linalg::eye(2);
    assert!(penta::linalg::max_abs_diff(&sq, &eye) <= 1e-8);
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut mags: Vec<f64> = m.iter().map(|z| z.norm()).collect();
    mags.sort_by(f64::total_cmp);
    let want = [1.0 / phi, 1.0 / phi, 1.0 / phi.sqrt(), 1.0 / phi.sqrt()];
    for (a, b) in mags.iter().zip(want) {
        assert!((a - b).abs() <= 1e-6);
    }
}

#[test]
fn pointed_solutions_up_to_order_six() {
    for n in 5..=6 {
        for k in 0..n {
            let w = cocycle_cyclic(n, k).unwrap();
            let sol = pointed_solution(w.group(), &w).unwrap();
            assert_eq!(sol.block_count(), n * n * n);
            assert!(check_all(&sol, 1e-12, Form::Component).unwrap().passed, "n={n} k={k}");
        }
    }
}
