//! Randomized checks of the geometric, planning and serialization invariants.

use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;

use viewplan::bench::exact_min_cover;
use viewplan::io::{decode_coverage_cache, encode_coverage_cache, CoverageCache};
use viewplan::mesh::{
    grid, icosphere, score, union_boundary, union_coverage, Submesh, TriangleMesh,
};
use viewplan::planner::{nbv, run_alternating, run_fixed_lambda, CoverageState, Plan};
use viewplan::visibility::CoverageTable;

fn submesh(mesh: &TriangleMesh, tris: &BTreeSet<usize>) -> Submesh {
    Submesh::from_triangles(mesh, tris.iter().copied()).unwrap()
}

/// A grid mesh plus a list of nonempty per-view triangle sets.
fn instance() -> impl Strategy<Value = (usize, usize, Vec<Vec<u32>>)> {
    (2usize..7, 2usize..7).prop_flat_map(|(w, h)| {
        let n = (2 * w * h) as u32;
        let view = prop::collection::btree_set(0..n, 1..(n as usize).min(12));
        (
            Just(w),
            Just(h),
            prop::collection::vec(view.prop_map(|s| s.into_iter().collect()), 1..7),
        )
    })
}

fn table_on(mesh: TriangleMesh, lists: &[Vec<u32>]) -> CoverageTable {
    CoverageTable::from_triangle_lists(Arc::new(mesh), None, lists).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn union_boundary_matches_brute_force(
        a in prop::collection::btree_set(0usize..320, 0..120),
        b in prop::collection::btree_set(0usize..320, 0..120),
    ) {
        let mesh = icosphere(2);
        let (x1, x2) = (submesh(&mesh, &a), submesh(&mesh, &b));
        let fast = union_boundary(&mesh, &x1, &x2).unwrap();
        let mut bits = x1.triangles().clone();
        bits.union_with(x2.triangles());
        prop_assert_eq!(fast, mesh.brute_force_boundary(&bits).unwrap());
    }

    #[test]
    fn union_area_is_subadditive(
        a in prop::collection::btree_set(0usize..72, 0..40),
        b in prop::collection::btree_set(0usize..72, 0..40),
    ) {
        let mesh = grid(6, 6);
        let (x1, x2) = (submesh(&mesh, &a), submesh(&mesh, &b));
        let u = union_coverage(&mesh, &x1, &x2).unwrap();
        let sum = x1.area() + x2.area();
        let tol = 1e-12 * sum.max(1.0);
        prop_assert!(u.area() <= sum + tol);
        let disjoint = a.is_disjoint(&b);
        prop_assert_eq!((u.area() - sum).abs() <= tol, disjoint);
    }

    #[test]
    fn scaling_multiplies_scores(
        tris in prop::collection::btree_set(0usize..50, 1..30),
        lambda in 0.0f64..3.0,
        s in prop::sample::select(vec![0.1, 10.0]),
    ) {
        let mesh = grid(5, 5);
        let scaled = mesh.scaled(s).unwrap();
        let f = score(&submesh(&mesh, &tris), lambda).unwrap();
        let g = score(&submesh(&scaled, &tris), lambda).unwrap();
        let expected = f * s.powf(2.0 - lambda);
        prop_assert!((g - expected).abs() <= 1e-9 * expected.abs(), "{} vs {}", g, expected);
    }

    #[test]
    fn nbv_is_scale_invariant(
        (w, h, lists) in instance(),
        lambda in prop::sample::select(vec![0.0, 0.5, 1.0, 2.0]),
        s in prop::sample::select(vec![0.1, 10.0]),
        prefix in 0usize..4,
    ) {
        let base = table_on(grid(w, h), &lists);
        let scaled = table_on(grid(w, h).scaled(s).unwrap(), &lists);
        let plan = run_fixed_lambda(&base, lambda, 1.0, None).unwrap();
        let chosen = &plan.order[..prefix.min(plan.order.len())];
        let a = CoverageState::from_views(&base, chosen).unwrap();
        let b = CoverageState::from_views(&scaled, chosen).unwrap();
        prop_assert_eq!(nbv(&a, &base, lambda).unwrap(), nbv(&b, &scaled, lambda).unwrap());
        prop_assert_eq!(run_fixed_lambda(&scaled, lambda, 1.0, None).unwrap().order, plan.order);
    }

    #[test]
    fn lambda_penalty_is_monotone(
        tris in prop::collection::btree_set(0usize..50, 1..30),
        l1 in 0.0f64..3.0,
        dl in 0.01f64..1.0,
    ) {
        let small = grid(5, 5);
        let x = submesh(&small, &tris);
        let l2 = l1 + dl;
        if x.boundary_length() < 1.0 {
            prop_assert!(score(&x, l2).unwrap() > score(&x, l1).unwrap());
        }
        let big = small.scaled(10.0).unwrap();
        let y = submesh(&big, &tris);
        prop_assert!(y.boundary_length() > 1.0);
        prop_assert!(score(&y, l2).unwrap() < score(&y, l1).unwrap());
    }

    #[test]
    fn plans_grow_coverage_and_reach_achievable(
        (w, h, lists) in instance(),
        lambda in prop::sample::select(vec![0.0, 1.0, 2.5]),
    ) {
        let table = table_on(grid(w, h), &lists);
        for plan in [run_fixed_lambda(&table, lambda, 1.0, None).unwrap(), run_alternating(&table, 1.0).unwrap()] {
            prop_assert!(plan.complete);
            prop_assert!(plan.len() <= table.view_count());
            let mut state = CoverageState::empty(&table);
            let mut area = 0.0;
            for &v in &plan.order {
                state.select(&table, v).unwrap();
                prop_assert!(state.covered().area() > area);
                area = state.covered().area();
            }
            prop_assert_eq!(state.covered().triangles(), table.achievable().triangles());
        }
        prop_assert_eq!(
            run_fixed_lambda(&table, lambda, 1.0, None).unwrap(),
            run_fixed_lambda(&table, lambda, 1.0, None).unwrap()
        );
    }

    #[test]
    fn exact_cover_bounds((w, h, lists) in instance()) {
        let table = table_on(grid(w, h), &lists);
        let exact = exact_min_cover(&table, 1.0).unwrap();
        let cover = CoverageState::from_views(&table, &exact.plan.order).unwrap();
        prop_assert_eq!(cover.covered().triangles(), table.achievable().triangles());
        prop_assert!(run_fixed_lambda(&table, 0.0, 1.0, None).unwrap().len() >= exact.plan.len());
        if let Some(connected) = &exact.connected {
            prop_assert!(connected.len() >= exact.plan.len());
        }
    }

    #[test]
    fn coverage_cache_round_trip((w, h, lists) in instance()) {
        let cache = CoverageCache { table: table_on(grid(w, h), &lists), certification: None };
        let bytes = encode_coverage_cache(&cache).unwrap();
        let back = decode_coverage_cache(&bytes).unwrap();
        prop_assert_eq!(back.table.triangle_lists(), cache.table.triangle_lists());
        prop_assert_eq!(encode_coverage_cache(&back).unwrap(), bytes);
    }

    #[test]
    fn plan_json_round_trip(
        order in prop::collection::vec(0usize..1000, 0..20),
        lambdas in prop::collection::vec(0.0f64..10.0, 0..20),
        fraction in 0.0f64..=1.0,
        runtime in prop::option::of(0.0f64..1e4),
    ) {
        let plan = Plan {
            order,
            lambdas,
            final_coverage_fraction: fraction,
            method: "fixed-lambda-0.5".into(),
            complete: true,
            runtime_seconds: runtime,
            instance: Some("0123456789abcdef".into()),
        };
        let back: Plan = serde_json::from_str(&serde_json::to_string(&plan).unwrap()).unwrap();
        prop_assert_eq!(&back.order, &plan.order);
        prop_assert_eq!(back.lambdas.len(), plan.lambdas.len());
        for (a, b) in back.lambdas.iter().zip(&plan.lambdas) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        prop_assert!((back.final_coverage_fraction - fraction).abs() <= 1e-12);
        prop_assert_eq!(back.method, plan.method);
    }
}
