use proptest::prelude::*;
use vieq_core::approximation::{caratheodory_reduce, polytope_nearest, Covering, PartitionOfUnity};
use vieq_core::retraction::RetractionMap;
use vieq_core::vi_solver::residual_of;
use vieq_core::{ConvexCompactSet, PolyhedralCone, Vector};

fn vec_in(dim: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vector> {
    prop::collection::vec(lo..hi, dim).prop_map(|c| Vector::new(c).unwrap())
}

fn cone_2_to_4() -> impl Strategy<Value = PolyhedralCone> {
    (2usize..=4)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(vec_in(n, -1.0, 1.0), 1..=5)))
        .prop_filter_map("degenerate generators", |(n, gens)| {
            if gens.iter().any(|g| g.norm() < 0.1) {
                return None;
            }
            PolyhedralCone::from_generators(n, gens).ok()
        })
}

fn sets() -> impl Strategy<Value = ConvexCompactSet> {
    prop_oneof![
        (2usize..=5).prop_map(|n| ConvexCompactSet::simplex(n).unwrap()),
        (1usize..=4).prop_map(|n| ConvexCompactSet::ball(n).unwrap()),
        (2usize..=3).prop_map(|n| ConvexCompactSet::ball_cap_cone(PolyhedralCone::orthant(n).unwrap())),
    ]
}

fn set_and_point() -> impl Strategy<Value = (ConvexCompactSet, Vector)> {
    sets().prop_flat_map(|k| {
        let n = k.dim();
        (Just(k), vec_in(n, -3.0, 3.0))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn projection_is_idempotent_and_obtuse((k, v) in set_and_point(), seed in 0u64..1000) {
        let p = k.project(&v).unwrap().point;
        prop_assert!(k.violation(&p) <= 1e-9);
        let pp = k.project(&p).unwrap().point;
        prop_assert!(pp.dist(&p) <= 1e-9);
        let r = &v - &p;
        for y in k.sample(24, seed) {
            prop_assert!(r.dot(&(&y - &p)) <= 1e-8 * (1.0 + r.norm()));
        }
    }

    #[test]
    fn support_dominates_samples((k, c) in set_and_point(), seed in 0u64..1000) {
        let s = k.support_max(&c).unwrap();
        prop_assert!(k.violation(&s.argmax) <= 1e-9);
        prop_assert!((s.argmax.dot(&c) - s.value).abs() <= 1e-9 * (1.0 + c.norm()));
        for y in k.sample(24, seed) {
            prop_assert!(y.dot(&c) <= s.value + 1e-9);
        }
    }

    #[test]
    fn hs_residual_is_nonnegative_on_the_set((k, z) in set_and_point(), seed in 0u64..1000) {
        for x in k.sample(8, seed) {
            prop_assert!(residual_of(&k, &x, &z).unwrap() >= -1e-12);
        }
    }

    #[test]
    fn moreau_decomposition(cone in cone_2_to_4(), seed in 0u64..1000, scale in 0.1f64..5.0) {
        let n = cone.dim();
        let v = Vector::new((0..n).map(|i| ((seed as f64 + 1.3) * (i as f64 + 0.7)).sin() * scale).collect()).unwrap();
        let p = cone.project(&v).unwrap().point;
        let q = cone.polar().project(&v).unwrap().point;
        prop_assert!((&p + &q).dist(&v) <= 1e-8 * (1.0 + v.norm()));
        prop_assert!(p.dot(&q).abs() <= 1e-8 * (1.0 + v.norm_sq()));
        prop_assert!(cone.violation(&p) <= 1e-8);
        prop_assert!(cone.polar_violation(&q) <= 1e-8);
    }

    #[test]
    fn bipolar_agrees_on_membership(cone in cone_2_to_4(), v in vec_in(4, -2.0, 2.0)) {
        let n = cone.dim();
        let v = Vector::new(v.as_slice()[..n].to_vec()).unwrap();
        let bipolar = cone.polar().polar();
        let p = cone.project(&v).unwrap().point;
        let pb = bipolar.project(&v).unwrap().point;
        prop_assert!(p.dist(&pb) <= 1e-7 * (1.0 + v.norm()));
    }

    #[test]
    fn projection_routes_agree(cone in cone_2_to_4(), v in vec_in(4, -2.0, 2.0)) {
        let n = cone.dim();
        let v = Vector::new(v.as_slice()[..n].to_vec()).unwrap();
        let a = cone.project(&v).unwrap().point;
        let b = cone.project_dykstra(&v, 500_000, 1e-15).unwrap();
        prop_assert!(a.dist(&b) <= 1e-6 * (1.0 + v.norm()));
    }

    #[test]
    fn retraction_lands_on_sphere_slice(cone in cone_2_to_4(), seed in 0u64..1000) {
        prop_assume!(!cone.is_subspace());
        let r = RetractionMap::new(cone.clone()).unwrap();
        let k = ConvexCompactSet::ball_cap_cone(cone.clone());
        for x in k.sample(16, seed) {
            let y = r.retract(&x).unwrap();
            prop_assert!((y.norm() - 1.0).abs() <= 1e-9);
            prop_assert!(cone.violation(&y) <= 1e-9);
            if let Some(u) = x.normalized() {
                if cone.violation(&u) <= 1e-12 {
                    let fixed = r.retract(&u).unwrap();
                    prop_assert!(fixed.dist(&u) <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn partition_of_unity_is_normalized(n in 1usize..=3, radius in 0.3f64..1.0, seed in 0u64..100) {
        let k = ConvexCompactSet::ball(n).unwrap();
        let cover = Covering::build(&k, radius, seed).unwrap();
        let pu = PartitionOfUnity::new(cover.clone());
        for x in k.sample(16, seed + 1) {
            let w = pu.weights(&x).unwrap();
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            for (c, wi) in cover.centers().iter().zip(&w) {
                prop_assert!(*wi >= 0.0);
                if *wi > 0.0 {
                    prop_assert!(x.dist(c) < radius);
                }
            }
        }
    }

    #[test]
    fn caratheodory_keeps_target(
        n in 1usize..=4,
        pts in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 1..=15),
        raw in prop::collection::vec(0.01f64..1.0, 15),
    ) {
        let points: Vec<Vector> = pts.iter().map(|p| Vector::new(p[..n].to_vec()).unwrap()).collect();
        let s: f64 = raw[..points.len()].iter().sum();
        let weights: Vec<f64> = raw[..points.len()].iter().map(|w| w / s).collect();
        let target = Vector::combination(n, &points, &weights);
        let d = caratheodory_reduce(&points, &weights).unwrap();
        prop_assert!(d.len() <= n + 1);
        prop_assert!(d.weights.iter().all(|w| *w >= 0.0));
        prop_assert!((d.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        prop_assert!(d.target().dist(&target) <= 1e-9);
        for (p, &i) in d.points.iter().zip(&d.indices) {
            prop_assert_eq!(p, &points[i]);
        }
    }

    #[test]
    fn polytope_nearest_is_optimal(
        pts in prop::collection::vec(vec_in(3, -1.0, 1.0), 1..=8),
        z in vec_in(3, -2.0, 2.0),
    ) {
        let (y, w) = polytope_nearest(&pts, &z).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        prop_assert!(Vector::combination(3, &pts, &w).dist(&y) <= 1e-10);
        // optimality: no vertex lies strictly beyond the supporting plane at y
        let r = &z - &y;
        for p in &pts {
            prop_assert!(r.dot(&(p - &y)) <= 1e-9 * (1.0 + r.norm()));
        }
    }
}
