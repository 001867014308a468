use std::ffi::{CStr, CString};
use std::ptr;

use viewplan_ffi::*;

fn last_error() -> String {
    let p = vp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn trap() -> *mut VpTable {
    let mut t = ptr::null_mut();
    assert_eq!(
        unsafe { vp_table_generate(VpInstanceKind::GridTrap, 0, &mut t) },
        VpStatus::Ok
    );
    t
}

fn order(plan: *const VpPlan) -> Vec<usize> {
    let mut len = 0;
    let st = unsafe { vp_plan_order(plan, ptr::null_mut(), 0, &mut len) };
    assert!(len == 0 || st == VpStatus::BufferTooSmall);
    let mut buf = vec![0usize; len];
    assert_eq!(
        unsafe { vp_plan_order(plan, buf.as_mut_ptr(), buf.len(), &mut len) },
        VpStatus::Ok
    );
    buf
}

#[test]
fn baseline_exact_and_trained_plans() {
    let t = trap();
    unsafe {
        assert_eq!(vp_table_view_count(t), 3);
        let mut oracle = 0;
        assert_eq!(vp_table_oracle_count(t, &mut oracle), VpStatus::Ok);
        assert_eq!(oracle, 2);

        let mut greedy = ptr::null_mut();
        assert_eq!(
            vp_plan_baseline(t, VpMethod::Greedy, 0.0, 1.0, &mut greedy),
            VpStatus::Ok
        );
        assert_eq!(vp_plan_len(greedy), 3);
        assert_eq!(vp_plan_complete(greedy), 1);
        assert!((vp_plan_coverage_fraction(greedy) - 1.0).abs() < 1e-12);

        let mut exact = ptr::null_mut();
        assert_eq!(vp_plan_exact(t, 1.0, &mut exact), VpStatus::Ok);
        assert_eq!(order(exact).len(), 2);

        let mut cfg = std::mem::zeroed::<VpTrainConfig>();
        assert_eq!(
            vp_train_config_default(VpAlgorithm::Td, 1, &mut cfg),
            VpStatus::Ok
        );
        cfg.max_episodes = 2_000;
        cfg.hidden = 32;
        let lambdas = [0.0, 1.0];
        cfg.lambda_set = lambdas.as_ptr();
        cfg.lambda_count = lambdas.len();
        let mut model = ptr::null_mut();
        assert_eq!(vp_train(t, &cfg, &mut model), VpStatus::Ok);
        let mut planned = ptr::null_mut();
        assert_eq!(
            vp_plan_with_model(model, t, 1.0, 0, &mut planned),
            VpStatus::Ok
        );
        assert!(vp_plan_len(planned) <= vp_plan_len(greedy));

        vp_plan_free(planned);
        vp_model_free(model);
        vp_plan_free(exact);
        vp_plan_free(greedy);
        vp_table_free(t);
    }
}

#[test]
fn files_round_trip_and_digest_guard() {
    let dir = tempfile::tempdir().unwrap();
    let table_path = CString::new(dir.path().join("t.vpcc").to_str().unwrap()).unwrap();
    let model_path = CString::new(dir.path().join("m.vpnw").to_str().unwrap()).unwrap();
    let t = trap();
    unsafe {
        assert_eq!(vp_table_save(t, table_path.as_ptr()), VpStatus::Ok);
        let mut loaded = ptr::null_mut();
        assert_eq!(
            vp_table_load(table_path.as_ptr(), &mut loaded),
            VpStatus::Ok
        );
        assert_eq!(vp_table_view_count(loaded), 3);

        let mut cfg = std::mem::zeroed::<VpTrainConfig>();
        vp_train_config_default(VpAlgorithm::Sarsa, 7, &mut cfg);
        cfg.max_episodes = 50;
        cfg.hidden = 8;
        let mut model = ptr::null_mut();
        assert_eq!(vp_train(loaded, &cfg, &mut model), VpStatus::Ok);
        assert_eq!(vp_model_save(model, model_path.as_ptr()), VpStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(vp_model_load(model_path.as_ptr(), &mut back), VpStatus::Ok);

        let mut a = ptr::null_mut();
        let mut b = ptr::null_mut();
        assert_eq!(vp_plan_with_model(model, t, 1.0, 0, &mut a), VpStatus::Ok);
        assert_eq!(vp_plan_with_model(back, t, 1.0, 0, &mut b), VpStatus::Ok);
        assert_eq!(order(a), order(b));

        let mut other = ptr::null_mut();
        assert_eq!(
            vp_table_generate(VpInstanceKind::GridTrap, 9, &mut other),
            VpStatus::Ok
        );
        let mut p = ptr::null_mut();
        assert_eq!(
            vp_plan_with_model(back, other, 1.0, 0, &mut p),
            VpStatus::DigestMismatch
        );
        assert!(p.is_null());
        assert!(last_error().contains("digest"));

        for h in [a, b] {
            vp_plan_free(h);
        }
        vp_model_free(back);
        vp_model_free(model);
        vp_table_free(other);
        vp_table_free(loaded);
        vp_table_free(t);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut t = ptr::null_mut();
        let missing = CString::new("/nonexistent/dir/t.vpcc").unwrap();
        assert_eq!(vp_table_load(missing.as_ptr(), &mut t), VpStatus::Io);
        assert!(t.is_null());
        assert!(last_error().contains("nonexistent"));

        assert_eq!(vp_table_load(ptr::null(), &mut t), VpStatus::NullPointer);
        let mut p = ptr::null_mut();
        assert_eq!(
            vp_plan_baseline(ptr::null(), VpMethod::Greedy, 0.0, 1.0, &mut p),
            VpStatus::NullPointer
        );

        let t = trap();
        assert!(vp_last_error().is_null());
        assert_eq!(
            vp_plan_baseline(t, VpMethod::Greedy, 0.0, 2.0, &mut p),
            VpStatus::InvalidArgument
        );
        assert!(last_error().contains("rcc"));
        assert_eq!(
            vp_plan_baseline(t, VpMethod::FixedLambda, -1.0, 1.0, &mut p),
            VpStatus::InvalidArgument
        );

        let mut cfg = std::mem::zeroed::<VpTrainConfig>();
        vp_train_config_default(VpAlgorithm::WatkinsQ, 0, &mut cfg);
        cfg.alpha = -1.0;
        let mut m = ptr::null_mut();
        assert_eq!(vp_train(t, &cfg, &mut m), VpStatus::InvalidArgument);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plain.vpcc");
        let inst =
            viewplan::bench::gen_instance(&viewplan::bench::SyntheticSpec::random_patches(2))
                .unwrap();
        let cache = viewplan::io::CoverageCache {
            table: inst.table,
            certification: None,
        };
        viewplan::io::save_coverage_cache(&path, &cache).unwrap();
        let cpath = CString::new(path.to_str().unwrap()).unwrap();
        let mut rp = ptr::null_mut();
        assert_eq!(vp_table_load(cpath.as_ptr(), &mut rp), VpStatus::Ok);
        let mut n = 0;
        assert_eq!(vp_table_oracle_count(rp, &mut n), VpStatus::NotFound);

        assert_eq!(vp_table_view_count(ptr::null()), 0);
        assert_eq!(vp_plan_len(ptr::null()), 0);
        vp_table_free(ptr::null_mut());
        vp_plan_free(ptr::null_mut());
        vp_model_free(ptr::null_mut());
        vp_table_free(rp);
        vp_table_free(t);
    }
}
