//! The seven acceptance criteria, one PASS/FAIL line each.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use clap::Parser;
use ndarray::{ArrayD, IxDyn};
use penta::builders::group::{cocycle_deviation, GroupTable};
use penta::builders::skeletal::{from_skeletal, SkeletalAssociator};
use penta::builders::{cocycle_cyclic, fibonacci_solution, pointed_solution, trivial_solution};
use penta::cli::{self, document, Cli};
use penta::normalized::{check_all_be, normalize, WeightSystem};
use penta::pentagon::{check_all, Form};
use penta::solver::gauge::{balanced_gauge, fingerprint_distance, is_degenerate, mixing_matrices};
use penta::solver::lm::{random_point, System};
use penta::solver::{enumerate_cocycles, jacobian_check, solve_multiplicity_free, SolveOptions};
use penta::tensor::{check_all_tensor, contract, GeneralTensor, ModuleTag, Slot, Variance};
use penta::{random, FBlock, FSolution, FusionRules, Label, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
type BlockBits = Vec<([Label; 6], Vec<(u64, u64)>)>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn form_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_pair: f64 = 0.0;
    let mut worst_be: f64 = 0.0;
    for _ in 0..20 {
        let rules = random::rules(&mut rng, 3, 3);
        let sol = random::solution(&rules, &mut rng);
        let g = check_all(&sol, 0.0, Form::Global).map_err(|e| e.to_string())?;
        let c = check_all(&sol, 0.0, Form::Component).map_err(|e| e.to_string())?;
        let t = check_all_tensor(&sol, 0.0).map_err(|e| e.to_string())?;
        worst_pair = worst_pair
            .max((g.overall - c.overall).abs())
            .max((c.overall - t.overall).abs())
            .max((g.overall - t.overall).abs());
        let w: Vec<Scalar> = (0..rules.size()).map(|_| Scalar::new(rng.random_range(0.5..=2.0), 0.0)).collect();
        let ws = WeightSystem::new(w.clone()).map_err(|e| e.to_string())?;
        let be = check_all_be(&normalize(&sol, &ws).map_err(|e| e.to_string())?, 0.0).map_err(|e| e.to_string())?;
        ensure(be.per_tuple.len() == t.per_tuple.len(), || "BE and tensor sweeps cover different tuples".into())?;
        for (tuple, &r) in &t.per_tuple {
            let rb = be.per_tuple[tuple];
            let scale = (w[tuple[7].index()] * w[tuple[8].index()]).norm();
            worst_be = worst_be.max((rb * scale - r).abs());
        }
    }
    ensure(worst_pair <= 1e-12, || format!("forms disagree by {worst_pair:e}"))?;
    ensure(worst_be <= 1e-11, || format!("scaled BE residual off by {worst_be:e}"))?;
    Ok(format!("pairwise {worst_pair:e}, BE scaling {worst_be:e}"))
}

fn known_solutions() -> Outcome {
    let triv = check_all(&trivial_solution(), 0.0, Form::Component).map_err(|e| e.to_string())?;
    ensure(triv.overall == 0.0, || format!("trivial residual {:e}", triv.overall))?;
    let mut worst: f64 = 0.0;
    for n in 2..=6 {
        for k in 0..n {
            let w = cocycle_cyclic(n, k).map_err(|e| e.to_string())?;
            let sol = pointed_solution(w.group(), &w).map_err(|e| e.to_string())?;
            let r = check_all(&sol, 1e-12, Form::Component).map_err(|e| e.to_string())?;
            ensure(r.passed, || format!("Z/{n} k={k}: residual {:e}", r.overall))?;
            worst = worst.max(r.overall);
        }
    }
    let fib = fibonacci_solution().map_err(|e| e.to_string())?;
    let r = check_all(&fib, 1e-9, Form::Component).map_err(|e| e.to_string())?;
    ensure(r.passed, || format!("Fibonacci residual {:e}", r.overall))?;
    Ok(format!("pointed worst {worst:e}, Fibonacci {:e}", r.overall))
}

fn random_tensor(rng: &mut ChaCha8Rng, dims: &[usize], vars: &[Variance]) -> GeneralTensor {
    let slots: Vec<Slot> = dims
        .iter()
        .zip(vars)
        .enumerate()
        .map(|(k, (&dim, &variance))| Slot {
            module: ModuleTag::new(Label(k), Label(0), Label(0)),
            variance,
            dim,
        })
        .collect();
    let n: usize = dims.iter().product();
    let data = (0..n).map(|_| random::scalar(rng)).collect();
    GeneralTensor::new(slots, ArrayD::from_shape_vec(IxDyn(dims), data).unwrap()).unwrap()
}

fn paired(t: GeneralTensor, p: usize, d: usize) -> GeneralTensor {
    let mut slots = t.slots().to_vec();
    slots[d] = Slot {
        variance: Variance::Dual,
        ..slots[p]
    };
    slots[p].variance = Variance::Primal;
    GeneralTensor::new(slots, t.into_coords()).unwrap()
}

fn nested_loop(t: &GeneralTensor, p: usize, d: usize) -> Vec<Scalar> {
    let dims: Vec<usize> = t.slots().iter().map(|s| s.dim).collect();
    let free: Vec<usize> = (0..dims.len()).filter(|&k| k != p && k != d).collect();
    let total: usize = free.iter().map(|&k| dims[k]).product();
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        let mut full = vec![0; dims.len()];
        let mut c = code;
        for &k in free.iter().rev() {
            full[k] = c % dims[k];
            c /= dims[k];
        }
        let mut acc = Scalar::new(0.0, 0.0);
        for i in 0..dims[p] {
            full[p] = i;
            full[d] = i;
            acc += t.coords()[IxDyn(&full)];
        }
        out.push(acc);
    }
    out
}

fn contraction_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let rank = rng.random_range(2..=6);
        let dims: Vec<usize> = (0..rank).map(|_| rng.random_range(1..=4)).collect();
        let vars: Vec<Variance> = (0..rank)
            .map(|_| if rng.random_bool(0.5) { Variance::Primal } else { Variance::Dual })
            .collect();
        let p = rng.random_range(0..rank);
        let d = (p + rng.random_range(1..rank)) % rank;
        let mut dims = dims;
        dims[d] = dims[p];
        let t = paired(random_tensor(&mut rng, &dims, &vars), p, d);
        let got = contract(&t, p, d).map_err(|e| e.to_string())?;
        let want = nested_loop(&t, p, d);
        ensure(got.coords().len() == want.len(), || "contraction shape differs from oracle".into())?;
        for (g, w) in got.coords().iter().zip(&want) {
            worst = worst.max((g - w).norm());
        }
    }
    ensure(worst <= 1e-14, || format!("oracle deviation {worst:e}"))?;
    let mut order: f64 = 0.0;
    for _ in 0..100 {
        let mut dims: Vec<usize> = (0..4).map(|_| rng.random_range(1..=4)).collect();
        dims[2] = dims[0];
        dims[3] = dims[1];
        let t = random_tensor(&mut rng, &dims, &[Variance::Primal; 4]);
        let t = paired(paired(t, 0, 2), 1, 3);
        let a = contract(&contract(&t, 0, 2).unwrap(), 0, 1).unwrap();
        let b = contract(&contract(&t, 1, 3).unwrap(), 0, 1).unwrap();
        for (x, y) in a.coords().iter().zip(b.coords().iter()) {
            order = order.max((x - y).norm());
        }
    }
    ensure(order <= 1e-14, || format!("contraction order changes the result by {order:e}"))?;
    Ok(format!("oracle {worst:e}, order {order:e}"))
}

fn is_cocycle(e: &[u64]) -> bool {
    let n = 2;
    let at = |a: usize, b: usize, c: usize| e[(a * n + b) * n + c];
    (0..16).all(|code| {
        let (a, b, c, d) = (code >> 3 & 1, code >> 2 & 1, code >> 1 & 1, code & 1);
        (at(b, c, d) + at(a, (b + c) % n, d) + at(a, b, c)) % 2 == (at((a + b) % n, c, d) + at(a, b, (c + d) % n)) % 2
    })
}

fn coboundary(f: u64) -> Vec<u64> {
    let n = 2;
    let g = |a: usize, b: usize| (f >> (a * n + b)) & 1;
    (0..8)
        .map(|i| {
            let (a, b, c) = (i >> 2 & 1, i >> 1 & 1, i & 1);
            (g(b, c) + g(a, (b + c) % n) + 2 - g((a + b) % n, c) + 2 - g(a, b)) % 2
        })
        .collect()
}

fn cocycle_machinery() -> Outcome {
    let set = enumerate_cocycles(2).map_err(|e| e.to_string())?;
    let brute: BTreeSet<Vec<u64>> = (0u64..256)
        .map(|m| (0..8).map(|i| (m >> i) & 1).collect::<Vec<u64>>())
        .filter(|e| is_cocycle(e))
        .collect();
    let found: BTreeSet<Vec<u64>> = set.span().into_iter().collect();
    ensure(found == brute, || format!("{} cocycles enumerated, {} by brute force", found.len(), brute.len()))?;
    let boundaries: BTreeSet<Vec<u64>> = (0u64..16).map(coboundary).collect();
    let classes = (brute.len() / boundaries.len()) as u64;
    ensure(set.class_count == classes, || format!("{} classes, brute force {classes}", set.class_count))?;
    for e in &brute {
        ensure(set.is_coboundary(e) == boundaries.contains(e), || format!("coboundary test wrong on {e:?}"))?;
    }
    let mut worst: f64 = 0.0;
    for n in 1..=6 {
        let set = enumerate_cocycles(n).map_err(|e| e.to_string())?;
        for w in &set.representatives {
            worst = worst.max(cocycle_deviation(w.group(), |a, b, c| w.value(a, b, c)).0);
        }
    }
    ensure(worst <= 1e-12, || format!("representative deviates by {worst:e}"))?;
    Ok(format!("{} cocycles, {classes} classes, representatives {worst:e}", brute.len()))
}

fn entry_magnitudes(sol: &FSolution) -> Result<Vec<f64>, String> {
    let gauged = balanced_gauge(sol).map_err(|e| e.to_string())?;
    let mut out: Vec<f64> = mixing_matrices(&gauged)
        .map_err(|e| e.to_string())?
        .iter()
        .flat_map(|(_, m)| m.iter().map(|z| z.norm()).collect::<Vec<_>>())
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

fn solver() -> Outcome {
    let rules = FusionRules::fibonacci();
    let opts = SolveOptions {
        starts: 50,
        seed: 0,
        residual_target: 1e-10,
        ..SolveOptions::default()
    };
    let report = solve_multiplicity_free(&rules, &opts).map_err(|e| e.to_string())?;
    let good: Vec<_> = report.attempts.iter().filter(|r| r.converged && r.residual <= 1e-10).collect();
    ensure(!good.is_empty(), || "no start converged".into())?;
    let mut failures = Vec::new();

    let sys = System::new(&rules).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut jac: f64 = 0.0;
    for _ in 0..20 {
        let x = random_point(&rules, &mut rng).map_err(|e| e.to_string())?;
        jac = jac.max(jacobian_check(&rules, &x).map_err(|e| e.to_string())?);
        let direct = check_all(&sys.to_solution(&x).unwrap(), 0.0, Form::Component).unwrap().overall;
        let modulus = sys.residuals(&x).iter().map(|z| z.norm()).fold(0.0, f64::max);
        ensure((direct - modulus).abs() <= 1e-12 * direct.max(1.0), || "system residuals disagree with the checker".into())?;
    }
    if jac > 1e-7 {
        failures.push(format!("Jacobian deviation {jac:e}"));
    }

    let nondeg: Vec<_> = good.iter().filter(|r| !is_degenerate(&r.solution)).collect();
    ensure(!nondeg.is_empty(), || "no converged non-degenerate start".into())?;
    let mut spread: f64 = 0.0;
    for r in &nondeg {
        spread = spread.max(fingerprint_distance(&nondeg[0].fingerprint, &r.fingerprint));
    }
    if spread > 1e-6 {
        failures.push(format!("fingerprints of converged non-degenerate starts differ by {spread:.3}"));
    }

    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut expected = vec![1.0 / phi, 1.0 / phi, 1.0 / phi.sqrt(), 1.0 / phi.sqrt()];
    expected.sort_by(f64::total_cmp);
    let mut classes: BTreeMap<String, usize> = BTreeMap::new();
    let mut off = 0;
    for r in &nondeg {
        let m = entry_magnitudes(&r.solution)?;
        *classes.entry(format!("{:.4?}", m)).or_default() += 1;
        let ok = m.len() == 4 && m.iter().zip(&expected).all(|(a, b)| (a - b).abs() <= 1e-6);
        if !ok {
            off += 1;
        }
    }
    if off > 0 {
        failures.push(format!(
            "{off} of {} non-degenerate starts have 2x2 magnitudes away from {{1/phi, 1/sqrt(phi)}}; classes {classes:?}",
            nondeg.len()
        ));
    }
    if failures.is_empty() {
        Ok(format!("{} converged, Jacobian {jac:e}", good.len()))
    } else {
        Err(failures.join("; "))
    }
}

fn skeletal_cross_check() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    for n in [2, 3] {
        for k in 0..n {
            let w = cocycle_cyclic(n, k).map_err(|e| e.to_string())?;
            let sk = from_skeletal(&SkeletalAssociator::pointed(&w).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let pt = pointed_solution(w.group(), &w).map_err(|e| e.to_string())?;
            ensure(sk.block_count() == pt.block_count(), || format!("Z/{n} k={k}: block sets differ"))?;
            worst = worst.max(sk.max_abs_diff(&pt));
            let r = check_all(&sk, 1e-10, Form::Component).map_err(|e| e.to_string())?;
            ensure(r.passed, || format!("Z/{n} k={k}: residual {:e}", r.overall))?;
            worst_res = worst_res.max(r.overall);
        }
    }
    ensure(worst <= 1e-14, || format!("entrywise deviation {worst:e}"))?;
    Ok(format!("entrywise {worst:e}, residual {worst_res:e}"))
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let cli = Cli::try_parse_from(std::iter::once("penta").chain(args.iter().copied())).expect("valid arguments");
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(cli, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

fn bits(sol: &FSolution) -> BlockBits {
    sol.blocks()
        .map(|b| (b.labels(), b.coords().iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect()))
        .collect()
}

fn json_schema(v: &serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::Object(m) => Value::Object(m.iter().map(|(k, x)| (k.clone(), json_schema(x))).collect()),
        Value::Array(a) => Value::Array(a.iter().take(1).map(json_schema).collect()),
        Value::Number(_) => Value::String("number".into()),
        Value::String(_) => Value::String("string".into()),
        Value::Bool(_) => Value::String("bool".into()),
        Value::Null => Value::Null,
    }
}

fn io_and_cli() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut generated = vec![("trivial".to_string(), trivial_solution())];
    for n in 2..=6 {
        for k in 0..n {
            let w = cocycle_cyclic(n, k).map_err(|e| e.to_string())?;
            let g = GroupTable::cyclic(n).map_err(|e| e.to_string())?;
            generated.push((format!("z{n}k{k}"), pointed_solution(&g, &w).map_err(|e| e.to_string())?));
        }
    }
    generated.push(("fibonacci".into(), fibonacci_solution().map_err(|e| e.to_string())?));
    for (name, sol) in &generated {
        let path = dir.path().join(format!("{name}.json"));
        document::save(sol, None, &path).map_err(|e| e.to_string())?;
        let back = document::load(&path).map_err(|e| e.to_string())?.solution;
        ensure(bits(&back) == bits(sol) && back.rules() == sol.rules(), || format!("{name}: round trip not bit-exact"))?;
        let again = dir.path().join(format!("{name}.again.json"));
        document::save(&back, None, &again).map_err(|e| e.to_string())?;
        ensure(std::fs::read(&path).unwrap() == std::fs::read(&again).unwrap(), || format!("{name}: resave changed bytes"))?;
    }

    let fib = dir.path().join("fibonacci.json");
    let fib = fib.to_str().unwrap();
    let mut schemas = Vec::new();
    for _ in 0..2 {
        let (code, text) = run_cli(&["check", fib, "--report", "json"]);
        ensure(code == 0, || format!("check on Fibonacci exited {code}"))?;
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        schemas.push(json_schema(&v));
    }
    ensure(schemas[0] == schemas[1], || "json schema changed between runs".into())?;

    let mut sol = fibonacci_solution().map_err(|e| e.to_string())?;
    let tau = Label(1);
    let mut blk: FBlock = sol.block(tau, tau, tau, tau, tau, tau).cloned().ok_or("missing block")?;
    blk.coords_mut()[[0, 0, 0, 0]] += Scalar::new(0.01, 0.0);
    sol.insert_block(blk).map_err(|e| e.to_string())?;
    let bad = dir.path().join("perturbed.json");
    document::save(&sol, None, &bad).map_err(|e| e.to_string())?;
    let bad = bad.to_str().unwrap();
    let (code, text) = run_cli(&["check", bad]);
    ensure(code == 1, || format!("perturbed check exited {code}"))?;
    let worst_line = text
        .lines()
        .skip_while(|l| !l.starts_with("worst tuples:"))
        .nth(1)
        .ok_or("no worst tuple named")?
        .trim()
        .to_string();
    let (code_json, json) = run_cli(&["check", bad, "--report", "json"]);
    let v: serde_json::Value = serde_json::from_str(&json).map_err(|e| e.to_string())?;
    let names: Vec<String> = v["worst"][0]["tuple"]
        .as_array()
        .ok_or("json lacks worst tuple")?
        .iter()
        .map(|s| s.as_str().unwrap_or_default().to_string())
        .collect();
    ensure(code_json == 1 && names.len() == 9, || "json report of perturbed file is incomplete".into())?;
    ensure(worst_line.starts_with(&format!("({})", names.join(", "))), || format!("text and json disagree on the worst tuple: {worst_line}"))?;
    Ok(format!("{} documents round-trip, worst tuple {worst_line}", generated.len()))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("form equivalence", form_equivalence),
        ("known solutions", known_solutions),
        ("contraction oracle", contraction_oracle),
        ("cocycle machinery", cocycle_machinery),
        ("solver", solver),
        ("skeletal construction", skeletal_cross_check),
        ("I/O and CLI", io_and_cli),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({secs:.1} s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({secs:.1} s): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
