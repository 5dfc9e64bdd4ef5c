use gou_ruin_ffi::*;
use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

fn reference() -> *mut GouModel {
    let p = GouBrownianDriftParams { gamma_xi: 1.0, gamma_eta: -0.1, var_xi: 2.0, cov_xi_eta: 0.0, var_eta: 0.01 };
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { gou_model_brownian_drift(&p, &mut m) }, GouStatus::Ok);
    assert!(!m.is_null());
    m
}

fn last_error() -> Option<String> {
    let p = gou_last_error_message();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

#[test]
fn profile_and_exponent_through_the_abi() {
    let m = reference();
    let mut prof = GouProfile::default();
    assert_eq!(unsafe { gou_cramer_profile(m, &mut prof) }, GouStatus::Ok);
    assert!((prof.w - 1.0).abs() < 1e-8 && (prof.mu_star - 1.0).abs() < 1e-8);
    assert!((prof.flat_from - 1.0).abs() < 1e-8);
    assert_eq!(prof.x0, 0.0);
    let (mut c, mut d1, mut d2) = (f64::NAN, f64::NAN, f64::NAN);
    assert_eq!(unsafe { gou_laplace_exponent(m, 0.5, &mut c) }, GouStatus::Ok);
    // c(α) = -α + α² for this model.
    assert!((c - (-0.5 + 0.25)).abs() < 1e-14);
    assert_eq!(unsafe { gou_laplace_derivatives(m, 0.5, &mut d1, &mut d2) }, GouStatus::Ok);
    assert!((d1 - 0.0).abs() < 1e-14 && (d2 - 2.0).abs() < 1e-14);
    let mut r = f64::NAN;
    assert_eq!(unsafe { gou_rate_function(m, 5.0, &mut r) }, GouStatus::Ok);
    assert_eq!(r, prof.w);
    assert_eq!(unsafe { gou_fenchel_legendre(m, 0.0, &mut r) }, GouStatus::Ok);
    // c*(0) = -min c = 1/4.
    assert!((r - 0.25).abs() < 1e-10);
    assert!(last_error().is_none());
    unsafe { gou_model_free(m) };
}

#[test]
fn status_codes_and_messages() {
    let mut m = ptr::null_mut();
    let vg = GouVarianceGammaParams { gamma_xi: 1.0, gamma_eta: 0.5, mu: 0.0, shape: 1.0, rate: 1.0 };
    assert_eq!(unsafe { gou_model_variance_gamma(&vg, &mut m) }, GouStatus::ConditionGate);
    assert!(m.is_null());
    assert!(last_error().unwrap().contains("gamma_eta"));

    let cp = GouCpGaussianParams {
        gamma_xi: 0.2,
        gamma_eta: -0.5,
        lambda: -1.0,
        mean_x: 0.3,
        mean_y: 0.1,
        var_x: 0.5,
        cov_xy: 0.1,
        var_y: 0.4,
    };
    assert_eq!(unsafe { gou_model_cp_gaussian(&cp, &mut m) }, GouStatus::InvalidModel);
    assert_eq!(unsafe { gou_model_cp_gaussian(ptr::null(), &mut m) }, GouStatus::NullPointer);

    let jd = GouJumpDiffusionParams {
        gamma_xi: 0.8,
        gamma_eta: -0.5,
        sigma2: 0.5,
        lambda: 1.0,
        jump_kind: GouJumpKind::Laplace,
        jump_mean: 0.0,
        jump_var: 0.0,
        rho: 3.0,
    };
    assert_eq!(unsafe { gou_model_jump_diffusion(&jd, &mut m) }, GouStatus::Ok);
    let mut c = 0.0;
    assert_eq!(unsafe { gou_laplace_exponent(m, 3.0, &mut c) }, GouStatus::InvalidArgument);
    assert_eq!(unsafe { gou_laplace_exponent(m, 1.0, ptr::null_mut()) }, GouStatus::NullPointer);
    let mut r = 0.0;
    assert_eq!(unsafe { gou_rate_function(m, -1.0, &mut r) }, GouStatus::InvalidArgument);
    assert_eq!(unsafe { gou_laplace_exponent(m, 1.0, &mut c) }, GouStatus::Ok);
    assert!(last_error().is_none());
    unsafe {
        gou_model_free(m);
        gou_model_free(ptr::null_mut());
    }
}

#[test]
fn model_from_config_text() {
    let text = CString::new(
        "[model]\nkind = \"brownian_drift\"\ngamma_xi = 1.0\ngamma_eta = -0.1\nvar_xi = 2.0\n\
         cov_xi_eta = 0.0\nvar_eta = 0.01\n\n[simulation]\nseed = 1\n",
    )
    .unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { gou_model_from_config(text.as_ptr(), &mut m) }, GouStatus::Ok);
    let mut conds = GouConditions { cond_a: GouVerdict::Failed, cond_b: GouVerdict::Failed, cond_c: GouVerdict::Failed };
    assert_eq!(unsafe { gou_check_conditions(m, &mut conds) }, GouStatus::Ok);
    assert_eq!(conds.cond_a, GouVerdict::Verified);
    assert_eq!(conds.cond_b, GouVerdict::Verified);
    assert_eq!(conds.cond_c, GouVerdict::Verified);
    unsafe { gou_model_free(m) };

    let bad = CString::new("[model]\nkind = \"brownian_drift\"\n").unwrap();
    assert_eq!(unsafe { gou_model_from_config(bad.as_ptr(), &mut m) }, GouStatus::Config);
    assert!(last_error().is_some());
}

#[test]
fn ruin_curve_matches_the_library() {
    let m = reference();
    let mut cfg = gou_ruin_config_default(2000, 8);
    cfg.h = 1.0 / 32.0;
    let zs = [0.5, 1.0, 2.0];
    let mut pts = [GouRuinPoint::default(); 3];
    assert_eq!(unsafe { gou_estimate_ruin_curve(m, &cfg, zs.as_ptr(), 3, pts.as_mut_ptr()) }, GouStatus::Ok);

    let model = gou_ruin::levy::validate(gou_ruin::levy::ModelSpec::BrownianDrift(
        gou_ruin::levy::BrownianDriftParams { gamma_xi: 1.0, gamma_eta: -0.1, var_xi: 2.0, cov_xi_eta: 0.0, var_eta: 0.01 },
    ))
    .unwrap();
    let rc = gou_ruin::ruin::RuinConfig { h: 1.0 / 32.0, ..gou_ruin::ruin::RuinConfig::new(2000, 8) };
    let lib = gou_ruin::ruin::estimate_ruin_curve(&model, &zs, &rc).unwrap();
    for (a, b) in pts.iter().zip(&lib.points) {
        assert_eq!((a.z, a.n_ruined, a.psi_hat, a.ci_lo, a.ci_hi), (b.z, b.n_ruined, b.psi_hat, b.ci_lo, b.ci_hi));
    }

    let unsorted = [2.0, 1.0];
    assert_eq!(
        unsafe { gou_estimate_ruin_curve(m, &cfg, unsorted.as_ptr(), 2, pts.as_mut_ptr()) },
        GouStatus::InvalidArgument
    );
    assert_eq!(unsafe { gou_estimate_ruin_curve(m, &cfg, zs.as_ptr(), 0, pts.as_mut_ptr()) }, GouStatus::InvalidArgument);
    unsafe { gou_model_free(m) };
}

/// Newest static archive built alongside this test binary in `deps/`.
fn static_lib() -> Option<PathBuf> {
    let deps = std::env::current_exe().ok()?.parent()?.to_path_buf();
    std::fs::read_dir(deps)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let n = p.file_name().unwrap().to_string_lossy();
            n.starts_with("libgou_ruin_ffi") && n.ends_with(".a")
        })
        .max_by_key(|p| p.metadata().and_then(|m| m.modified()).ok())
}

#[test]
fn c_program_links_against_generated_header() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = crate_dir.join("include/gou_ruin.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["gou_model_from_config", "gou_estimate_ruin_curve", "GOU_STATUS_PANIC", "typedef struct GouModel GouModel"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let Some(lib) = static_lib() else {
        eprintln!("skipping C link check: no static library next to the test binary");
        return;
    };
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping C link check: no C compiler");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let out = Command::new("cc")
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "cc failed: {}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok w=1.000000"));
}
