use std::ffi::{c_char, CString};
use std::ptr;

use sltransmute_ffi::*;

fn spec_for(builtin: Option<&CString>, potential: Option<&CString>, interval: Option<&CString>) -> SltProblemSpec {
    let p = |s: Option<&CString>| s.map_or(ptr::null(), |c| c.as_ptr());
    SltProblemSpec {
        builtin: p(builtin),
        potential: p(potential),
        interval: p(interval),
        bc_left: ptr::null(),
        bc_right: ptr::null(),
        m: 0,
        n: 0,
        segments: 0,
    }
}

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    let n = unsafe { slt_last_error(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf.iter().take(n.min(255)).map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

fn new_problem(spec: &SltProblemSpec) -> (SltStatus, *mut SltProblem) {
    let mut h = ptr::null_mut();
    let st = unsafe { slt_problem_new(spec, &mut h) };
    (st, h)
}

#[test]
fn free_dirichlet_eigenvalues() {
    let q = CString::new("0").unwrap();
    let iv = CString::new("0,pi").unwrap();
    let (st, h) = new_problem(&spec_for(None, Some(&q), Some(&iv)));
    assert_eq!(st, SltStatus::Ok, "{}", last_error());
    let (mut re, mut im) = ([0.0; 5], [0.0; 5]);
    let mut found = 0;
    let st = unsafe { slt_find_eigenvalues(h, 5, SltMode::Auto, re.as_mut_ptr(), im.as_mut_ptr(), &mut found) };
    assert_eq!(st, SltStatus::Ok, "{}", last_error());
    assert_eq!(found, 5);
    for (k, (r, i)) in re.iter().zip(im).enumerate() {
        let want = ((k + 1) * (k + 1)) as f64;
        assert!((r - want).abs() < 1e-8 * want && i.abs() < 1e-8, "{k}: {r} {i}");
    }
    let (mut e1, mut e2) = (0.0, 0.0);
    assert_eq!(unsafe { slt_problem_eps(h, &mut e1, &mut e2) }, SltStatus::Ok);
    assert!(e1 < 1e-10 && e2 < 1e-10);
    // Φ vanishes at ω = 2 (λ = 4)
    let (mut fr, mut fi) = (1.0, 1.0);
    assert_eq!(
        unsafe { slt_char_function(h, 2.0, 0.0, &mut fr, &mut fi) },
        SltStatus::Ok
    );
    assert!(fr.hypot(fi) < 1e-9);
    unsafe { slt_problem_free(h) };
}

#[test]
fn ivp_in_native_coordinates() {
    // y'' = -y on [1, 3] with y(1) = 0, y'(1) = 1 gives sin(x - 1)
    let q = CString::new("0").unwrap();
    let iv = CString::new("1,3").unwrap();
    let (st, h) = new_problem(&spec_for(None, Some(&q), Some(&iv)));
    assert_eq!(st, SltStatus::Ok);
    let xs = [1.0, 1.5, 2.2, 3.0];
    let (mut yr, mut yi) = ([0.0; 4], [0.0; 4]);
    let st = unsafe {
        slt_solve_ivp(
            h,
            1.0,
            0.0,
            0.0,
            0.0,
            1.0,
            0.0,
            xs.as_ptr(),
            4,
            yr.as_mut_ptr(),
            yi.as_mut_ptr(),
        )
    };
    assert_eq!(st, SltStatus::Ok, "{}", last_error());
    for k in 0..4 {
        assert!((yr[k] - (xs[k] - 1.0).sin()).abs() < 1e-10 && yi[k].abs() < 1e-10);
    }
    let out = [4.0];
    let st = unsafe {
        slt_solve_ivp(
            h,
            1.0,
            0.0,
            0.0,
            0.0,
            1.0,
            0.0,
            out.as_ptr(),
            1,
            yr.as_mut_ptr(),
            yi.as_mut_ptr(),
        )
    };
    assert_eq!(st, SltStatus::Config);
    unsafe { slt_problem_free(h) };
}

#[test]
fn well_builtin_returns_bound_states() {
    let b = CString::new("square_well").unwrap();
    let (st, h) = new_problem(&spec_for(Some(&b), None, None));
    assert_eq!(st, SltStatus::Ok, "{}", last_error());
    let (mut re, mut im) = ([0.0; 4], [0.0; 4]);
    let mut found = 0;
    let st = unsafe { slt_find_eigenvalues(h, 4, SltMode::Auto, re.as_mut_ptr(), im.as_mut_ptr(), &mut found) };
    // only three bound states exist
    assert_eq!(st, SltStatus::Convergence);
    assert_eq!(found, 3);
    assert!((re[0] + 3.6678132227322893f64.powi(2)).abs() < 1e-8, "{}", re[0]);
    assert!(last_error().contains("3 of 4"));
    unsafe { slt_problem_free(h) };
}

#[test]
fn errors_map_to_codes() {
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { slt_problem_new(ptr::null(), &mut h) },
        SltStatus::InvalidArgument
    );

    let bad = CString::new("sin(").unwrap();
    let iv = CString::new("0,1").unwrap();
    let (st, h) = new_problem(&spec_for(None, Some(&bad), Some(&iv)));
    assert_eq!(st, SltStatus::Config);
    assert!(h.is_null());
    assert!(!last_error().is_empty());

    let (st, _) = new_problem(&spec_for(Some(&CString::new("nope").unwrap()), None, None));
    assert_eq!(st, SltStatus::Config);
    assert!(last_error().contains("nope"));

    let mut spec = spec_for(None, Some(&CString::new("x").unwrap()), Some(&iv));
    spec.n = 1;
    let (st, _) = new_problem(&spec);
    assert_ne!(st, SltStatus::Ok);

    let mut found = 7;
    let mut v = [0.0];
    let st = unsafe {
        slt_find_eigenvalues(
            ptr::null(),
            1,
            SltMode::Real,
            v.as_mut_ptr(),
            v.as_mut_ptr(),
            &mut found,
        )
    };
    assert_eq!(st, SltStatus::InvalidArgument);
    unsafe { slt_problem_free(ptr::null_mut()) };
}

#[test]
fn error_buffer_truncates() {
    let (st, _) = new_problem(&spec_for(
        Some(&CString::new("a_rather_long_unknown_name").unwrap()),
        None,
        None,
    ));
    assert_eq!(st, SltStatus::Config);
    let mut buf = [1 as c_char; 5];
    let full = unsafe { slt_last_error(buf.as_mut_ptr(), 5) };
    assert!(full > 4);
    assert_eq!(buf[4], 0);
    assert_eq!(unsafe { slt_last_error(ptr::null_mut(), 0) }, full);
}
