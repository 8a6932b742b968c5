//! One line per acceptance criterion; exits nonzero if any fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vieq_cli::{builtin, builtin_with_dim, run, Certificate, RunOptions, RunReport, BUILTIN_NAMES};
use vieq_core::approximation::{caratheodory_reduce, correspondence_distance};
use vieq_core::equilibrium::{check_walras, interval, solve_brouwer, solve_gnd_general, solve_kakutani, CobbDouglasEconomy};
use vieq_core::retraction::RetractionMap;
use vieq_core::vi_solver::{hs_residual, solve_hs, SolverConfig};
use vieq_core::{ConvexCompactSet, CorrespondenceOracle, Error, MapOracle, PolyhedralCone, Vector};
use vieq_oracles::{grid_hs_oracle, membership_oracle, GridSpec};

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn v(c: &[f64]) -> Vector {
    Vector::from_slice(c).unwrap()
}

fn run_builtin(name: &str, dim: Option<usize>) -> RunReport {
    run(&builtin_with_dim(name, dim).unwrap(), &RunOptions::default()).unwrap()
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    loop {
        let g: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if let Some(u) = v(&g).normalized() {
            return u;
        }
    }
}

/// Generators with a positive first coordinate, so the cone is pointed.
fn random_pointed_cone(rng: &mut ChaCha8Rng, n: usize) -> PolyhedralCone {
    loop {
        let m = rng.random_range(1..=n + 2);
        let gens: Vec<Vector> = (0..m)
            .map(|_| {
                let mut g = random_unit(rng, n).into_inner();
                g[0] = g[0].abs() + 0.05;
                v(&g)
            })
            .collect();
        if let Ok(c) = PolyhedralCone::from_generators(n, gens) {
            return c;
        }
    }
}

fn random_cone(rng: &mut ChaCha8Rng, n: usize) -> PolyhedralCone {
    loop {
        let m = rng.random_range(1..=n + 2);
        let gens: Vec<Vector> = (0..m).map(|_| random_unit(rng, n)).collect();
        if let Ok(c) = PolyhedralCone::from_generators(n, gens) {
            return c;
        }
    }
}

fn conic_point(rng: &mut ChaCha8Rng, cone: &PolyhedralCone) -> Vector {
    let w: Vec<f64> = cone.generators().iter().map(|_| rng.random::<f64>()).collect();
    Vector::combination(cone.dim(), cone.generators(), &w)
}

fn criterion_1() -> Outcome {
    let mut worst = String::new();
    let mut ok = true;
    let cases: [(&str, Option<usize>); 5] = [
        ("neg-identity-simplex", Some(2)),
        ("neg-identity-simplex", Some(3)),
        ("neg-identity-simplex", Some(4)),
        ("neg-identity-ball", None),
        ("rotation-ball", None),
    ];
    for (name, dim) in cases {
        let spec = builtin_with_dim(name, dim).unwrap();
        let problem = spec.build().unwrap();
        let start = Instant::now();
        let report = run(&spec, &RunOptions::default()).unwrap();
        let elapsed = start.elapsed();
        let Certificate::Vi { point, .. } = &report.certificate else {
            return (false, format!("{name}: no VI certificate"));
        };
        let f = problem.map.as_ref().unwrap();
        let residual = hs_residual(&problem.set, f, point).unwrap();
        let grid = grid_hs_oracle(&problem.set, f, GridSpec::default()).unwrap();
        let dist = grid.point.dist(point);
        let pass = report.passed && residual <= 1e-6 && dist <= grid.spacing && elapsed < Duration::from_secs(1);
        ok &= pass;
        worst.push_str(&format!(
            "{name}{}: res {residual:.1e} grid-dist {dist:.1e} {:.0}ms; ",
            dim.map_or(String::new(), |d| format!("[{d}]")),
            elapsed.as_secs_f64() * 1e3
        ));
    }
    (ok, worst)
}

fn equilibrium(report: &RunReport) -> Option<(&Vector, &Vector)> {
    match &report.certificate {
        Certificate::Equilibrium(c) => Some((&c.price, &c.witness)),
        _ => None,
    }
}

fn criterion_2() -> Outcome {
    let two = run_builtin("two-good-exchange", None);
    let Some((p, z)) = equilibrium(&two) else {
        return (false, "two-good-exchange: no certificate".into());
    };
    let d_two = p.dist(&v(&[0.5, 0.5]));
    let z_two = z.max_coord();

    // bisection on the first excess demand along the price segment
    let e = CobbDouglasEconomy::new(
        vec![v(&[0.3, 0.7]), v(&[0.6, 0.4])],
        vec![v(&[1.0, 2.0]), v(&[2.0, 1.0])],
    )
    .unwrap();
    let (mut lo, mut hi) = (1e-3f64, 1.0 - 1e-3);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if e.excess_demand(&[mid, 1.0 - mid])[0] > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let cd = run_builtin("cobb-douglas-2x2", None);
    let Some((q, _)) = equilibrium(&cd) else {
        return (false, "cobb-douglas-2x2: no certificate".into());
    };
    let d_cd = q.dist(&v(&[lo, 1.0 - lo]));
    let ok = two.passed && cd.passed && d_two <= 1e-4 && z_two <= 1e-6 && d_cd <= 1e-4;
    (ok, format!("two-good |p-(.5,.5)| {d_two:.1e}, max z {z_two:.1e}; cobb-douglas |p-p*| {d_cd:.1e} (p*_0 = {lo:.9})"))
}

fn criterion_3() -> Outcome {
    let plane = PolyhedralCone::from_generators(
        2,
        vec![v(&[1.0, 0.0]), v(&[-1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.0, -1.0])],
    )
    .unwrap();
    let zeta = CorrespondenceOracle::from_map(MapOracle::neg_identity(2));
    match solve_gnd_general(&plane, &zeta, &SolverConfig::default()) {
        Ok(c) => {
            let ok = c.passed() && c.price.norm() <= 1e-6 && c.witness.norm() <= 1e-6;
            (ok, format!("|p| {:.1e}, |z| {:.1e}, warnings {}", c.price.norm(), c.witness.norm(), c.warnings.len()))
        }
        Err(e) => (false, e.to_string()),
    }
}

fn criterion_4() -> Outcome {
    let mut ok = true;
    let mut detail = String::new();
    for name in ["orthant-neg-identity", "ray-cone-demo"] {
        let spec = builtin(name).unwrap();
        let report = run(&spec, &RunOptions::default()).unwrap();
        let Some((p, z)) = equilibrium(&report) else {
            return (false, format!("{name}: no certificate"));
        };
        let gens = &spec.cone.as_ref().unwrap().generators;
        let polar = gens
            .iter()
            .map(|g| {
                let n = g.iter().map(|c| c * c).sum::<f64>().sqrt();
                g.iter().zip(z.iter()).map(|(a, b)| a * b).sum::<f64>() / n
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let unit = (p.norm() - 1.0).abs();
        ok &= report.passed && polar <= 1e-6 && unit <= 1e-6;
        detail.push_str(&format!("{name}: max <g,z> {polar:.1e}, ||p|-1| {unit:.1e}; "));
    }
    (ok, detail)
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut norm, mut slack, mut fixed) = (0.0f64, 0.0f64, 0.0f64);
    let mut count = 0;
    for i in 0..20 {
        let n = 2 + i % 4;
        let cone = random_pointed_cone(&mut rng, n);
        let r = match RetractionMap::new(cone.clone()) {
            Ok(r) => r,
            Err(e) => return (false, format!("cone {i}: {e}")),
        };
        for j in 0..50 {
            let y = conic_point(&mut rng, &cone);
            let Some(u) = y.normalized() else { continue };
            let x = if j % 5 == 0 { u.clone() } else { u.scaled(rng.random::<f64>()) };
            let out = r.retract(&x).unwrap();
            norm = norm.max((out.norm() - 1.0).abs());
            slack = slack.max(cone.violation(&out));
            if j % 5 == 0 {
                fixed = fixed.max(out.dist(&x));
            }
            count += 1;
        }
    }
    // subspaces built from ± pairs must be refused, pointed cones accepted
    let mut exact = true;
    for i in 0..20 {
        let n = 2 + i % 4;
        let k = rng.random_range(1..=n);
        let gens: Vec<Vector> = (0..k)
            .flat_map(|_| {
                let g = random_unit(&mut rng, n);
                [g.clone(), -&g]
            })
            .collect();
        let sub = PolyhedralCone::from_generators(n, gens).unwrap();
        let pointed = random_pointed_cone(&mut rng, n);
        exact &= sub.is_subspace() && matches!(RetractionMap::new(sub), Err(Error::SubspaceCone));
        exact &= !pointed.is_subspace() && RetractionMap::new(pointed).is_ok();
    }
    let elapsed = start.elapsed();
    let ok = count >= 1000 && norm <= 1e-9 && slack <= 1e-9 && fixed <= 1e-9 && exact && elapsed < Duration::from_secs(5);
    (
        ok,
        format!(
            "{count} points: ||r|-1| {norm:.1e}, slack {slack:.1e}, fixed {fixed:.1e}, subspace detection {exact}, {:.0}ms",
            elapsed.as_secs_f64() * 1e3
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut sum_err, mut rec_err) = (0.0f64, 0.0f64);
    let mut ok = true;
    for _ in 0..500 {
        let n = rng.random_range(1..=6);
        let m = rng.random_range(1..=50);
        let pts: Vec<Vector> = (0..m)
            .map(|_| v(&(0..n).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>()))
            .collect();
        let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.01..1.0)).collect();
        let s: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|x| x / s).collect();
        let target = Vector::combination(n, &pts, &w);
        let d = match caratheodory_reduce(&pts, &w) {
            Ok(d) => d,
            Err(e) => return (false, e.to_string()),
        };
        sum_err = sum_err.max((d.weights.iter().sum::<f64>() - 1.0).abs());
        rec_err = rec_err.max(d.target().dist(&target));
        ok &= d.len() <= n + 1 && d.weights.iter().all(|x| *x > 0.0);
        ok &= membership_oracle(&d.points, Some(&d.weights), &target).unwrap_or(false);
    }
    ok &= sum_err <= 1e-12 && rec_err <= 1e-8;
    (ok, format!("500 instances: |sum w - 1| {sum_err:.1e}, reconstruction {rec_err:.1e}"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut ident, mut orth, mut idem, mut obtuse) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let n = rng.random_range(2..=5);
        let cone = random_cone(&mut rng, n);
        let x = v(&(0..n).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>());
        let p = cone.project(&x).unwrap().point;
        let q = cone.polar().project(&x).unwrap().point;
        ident = ident.max((&p + &q).dist(&x));
        orth = orth.max(p.dot(&q).abs());
        idem = idem.max(cone.project(&p).unwrap().point.dist(&p));
        let r = &x - &p;
        for _ in 0..4 {
            let y = conic_point(&mut rng, &cone);
            obtuse = obtuse.max(r.dot(&(&y - &p)));
        }
    }
    let ok = ident <= 1e-8 && orth <= 1e-8 && idem <= 1e-8 && obtuse <= 1e-8;
    (ok, format!("identity {ident:.1e}, orthogonality {orth:.1e}, idempotence {idem:.1e}, obtuse {obtuse:.1e}"))
}

fn brouwer_examples() -> Vec<(&'static str, ConvexCompactSet, MapOracle, Vector)> {
    let ball = ConvexCompactSet::ball(2).unwrap();
    let k = ball.clone();
    let affine = MapOracle::new(2, "proj-affine", move |x| {
        let y = v(&[0.1 - 0.5 * x[1], 0.5 * x[0]]);
        k.project(&y).unwrap().point.into_inner()
    });
    // (I - A) x = b with A = 0.5 rot90, b = (0.1, 0): x = (0.08, 0.04)
    vec![
        (
            "interval 1-x",
            ConvexCompactSet::simplex(2).unwrap(),
            interval::interval_map("1-x", |x| 1.0 - x),
            v(&[0.5, 0.5]),
        ),
        (
            "simplex contraction",
            ConvexCompactSet::simplex(2).unwrap(),
            MapOracle::new(2, "contraction", |p| vec![0.5 * p[0] + 0.25, 0.5 * p[1] + 0.25]),
            v(&[0.5, 0.5]),
        ),
        ("ball affine", ball, affine, v(&[0.08, 0.04])),
    ]
}

fn criterion_8() -> Outcome {
    let cfg = SolverConfig::default();
    let mut ok = true;
    let mut detail = String::new();
    for (name, c, f, expected) in brouwer_examples() {
        let Ok(r) = solve_brouwer(&c, &f, &cfg) else {
            return (false, format!("{name}: solver failed"));
        };
        let g = f.displacement();
        let res = hs_residual(&c, &g, &r.point).unwrap();
        // converse direction: an HS solution of f - id is a fixed point of f
        let hs = solve_hs(&c, &g, &cfg).unwrap();
        let back = f.eval(&hs.point).unwrap().dist(&hs.point);
        let err = r.point.dist(&expected);
        ok &= r.gap <= 1e-6 && res <= 1e-6 && back <= 1e-6 && err <= 1e-6;
        detail.push_str(&format!("{name}: gap {:.1e} res {res:.1e} converse {back:.1e}; ", r.gap));
    }
    (ok, detail)
}

fn criterion_9() -> Outcome {
    let spec = builtin("step-correspondence").unwrap();
    let problem = spec.build().unwrap();
    let report = run(&spec, &RunOptions::default()).unwrap();
    let Certificate::FixedPoint(r) = &report.certificate else {
        return (false, "step-correspondence: no certificate".into());
    };
    let zeta = problem.correspondence().unwrap();
    let gap = correspondence_distance(&zeta, &r.point, &r.point).unwrap();
    let off = (r.point[0] - 0.5).abs();
    let mut ok = report.passed && off <= 1e-2 && gap <= 1e-3;
    let cfg = SolverConfig::default();
    let mut eq = 0.0f64;
    for (_, c, f, _) in brouwer_examples() {
        let a = solve_brouwer(&c, &f, &cfg);
        let b = solve_kakutani(&c, &CorrespondenceOracle::from_map(f), &cfg);
        match (a, b) {
            (Ok(a), Ok(b)) => eq = eq.max(a.point.dist(&b.point)),
            _ => eq = f64::INFINITY,
        }
    }
    ok &= eq <= 1e-5;
    (ok, format!("|x-0.5| {off:.1e}, gap {gap:.1e}, single-branch difference {eq:.1e}"))
}

fn criterion_10() -> Outcome {
    let simplex = ConvexCompactSet::simplex(2).unwrap();
    let id = CorrespondenceOracle::from_map(MapOracle::new(2, "identity", |p| p.to_vec()));
    let bad = check_walras(&simplex, &id, 256, 0).unwrap();
    let flagged = !bad.holds(1e-9) && bad.price.dot(&bad.value) > 1e-9;
    let spec = builtin("two-good-exchange").unwrap();
    let zeta = spec.build().unwrap().correspondence().unwrap();
    let good = check_walras(&simplex, &zeta, 256, 0).unwrap();
    let ok = flagged && good.max <= 1e-9;
    (ok, format!("identity flagged {flagged} (max {:.2}), two-good max {:.1e}", bad.max, good.max))
}

fn criterion_11() -> Outcome {
    let mut ok = true;
    let mut diffs = Vec::new();
    for name in BUILTIN_NAMES {
        let spec = builtin(name).unwrap();
        let opts = RunOptions {
            seed: Some(42),
            ..RunOptions::default()
        };
        let a = run(&spec, &opts).unwrap().deterministic_json();
        let b = run(&spec, &opts).unwrap().deterministic_json();
        if a != b {
            ok = false;
            diffs.push(name);
        }
    }
    (ok, if diffs.is_empty() { "9 builtins byte-identical".into() } else { format!("differs: {}", diffs.join(", ")) })
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("HS solving and grid agreement", criterion_1),
        ("simplex equilibrium prices", criterion_2),
        ("subspace cone price", criterion_3),
        ("proper cone price", criterion_4),
        ("retraction suite", criterion_5),
        ("Caratheodory suite", criterion_6),
        ("Moreau and projection suite", criterion_7),
        ("Brouwer fixed points", criterion_8),
        ("Kakutani fixed points", criterion_9),
        ("value condition diagnostics", criterion_10),
        ("reproducibility", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = match std::panic::catch_unwind(check) {
            Ok(o) => o,
            Err(_) => (false, "panicked".into()),
        };
        failed += usize::from(!ok);
        println!("criterion {:>2} {} {name}: {detail}", i + 1, if ok { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 11 acceptance criteria passed");
}
