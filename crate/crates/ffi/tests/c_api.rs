use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use slocc_lab_ffi::*;

fn last_error() -> String {
    let p = sl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn w_tensor_ranks_and_round_trip() {
    unsafe {
        let mut w = ptr::null_mut();
        assert_eq!(sl_tensor_w(4, &mut w), SlStatus::Ok);
        let (mut parties, mut support) = (0, 0);
        assert_eq!(sl_tensor_parties(w, &mut parties), SlStatus::Ok);
        assert_eq!(sl_tensor_support_size(w, &mut support), SlStatus::Ok);
        assert_eq!((parties, support), (4, 4));

        let cut = [0usize, 1];
        let mut rank = 0;
        assert_eq!(sl_tensor_flattening_rank(w, cut.as_ptr(), cut.len(), &mut rank), SlStatus::Ok);
        assert_eq!(rank, 2);

        let mut json = ptr::null_mut();
        assert_eq!(sl_tensor_to_json(w, &mut json), SlStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(sl_tensor_from_json(json, &mut back), SlStatus::Ok);
        let mut eq = false;
        assert_eq!(sl_tensor_equal(w, back, &mut eq), SlStatus::Ok);
        assert!(eq);

        sl_string_free(json);
        sl_tensor_free(back);
        sl_tensor_free(w);
    }
}

#[test]
fn ghz_and_dicke_ranks() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(sl_tensor_ghz(3, 3, &mut g), SlStatus::Ok);
        let mut rank = 0;
        assert_eq!(sl_tensor_flattening_rank(g, [1usize].as_ptr(), 1, &mut rank), SlStatus::Ok);
        assert_eq!(rank, 3);
        sl_tensor_free(g);

        let mut d = ptr::null_mut();
        assert_eq!(sl_tensor_dicke(2, 2, &mut d), SlStatus::Ok);
        assert_eq!(sl_tensor_flattening_rank(d, [0usize, 1].as_ptr(), 2, &mut rank), SlStatus::Ok);
        assert_eq!(rank, 3);
        sl_tensor_free(d);
    }
}

#[test]
fn errors_are_codes_not_panics() {
    unsafe {
        let mut t = ptr::null_mut();
        assert_eq!(sl_tensor_w(1, &mut t), SlStatus::InvalidArgument);
        assert!(!last_error().is_empty());
        assert_eq!(sl_tensor_w(3, ptr::null_mut()), SlStatus::NullPointer);

        let bad = CString::new("{\"parties\": 1}").unwrap();
        assert_eq!(sl_tensor_from_json(bad.as_ptr(), &mut t), SlStatus::Parse);
        assert_eq!(sl_tensor_from_json(ptr::null(), &mut t), SlStatus::NullPointer);

        let mut n = 0;
        assert_eq!(sl_tensor_parties(ptr::null(), &mut n), SlStatus::NullPointer);

        let mut w = ptr::null_mut();
        assert_eq!(sl_tensor_w(3, &mut w), SlStatus::Ok);
        assert_eq!(sl_tensor_flattening_rank(w, [7usize].as_ptr(), 1, &mut n), SlStatus::InvalidArgument);
        sl_tensor_free(w);

        sl_tensor_free(ptr::null_mut());
        sl_string_free(ptr::null_mut());
    }
}

#[test]
fn certificates_and_rates() {
    unsafe {
        for k in 2..=6 {
            let (mut d, mut e) = (0, 0);
            assert_eq!(sl_w_certificate_verify(k, &mut d, &mut e), SlStatus::Ok);
            assert_eq!((d, e), (1, k - 1));
        }
        let mut rate = 0.0;
        assert_eq!(sl_w_ghz_rate(3, &mut rate), SlStatus::Ok);
        assert!((rate - 1.0 / (3f64.log2() - 2.0 / 3.0)).abs() < 1e-12);

        let (mut level, mut achieved) = (0, 0.0);
        assert_eq!(sl_cw_run(3, 2, 7, &mut level, &mut achieved), SlStatus::Ok);
        assert!(achieved <= 3f64.log2() - 2.0 / 3.0);
        assert_eq!(sl_cw_run(2, 2, 7, &mut level, &mut achieved), SlStatus::InvalidArgument);
    }
}

#[test]
fn header_declares_the_api() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("slocc_lab.h");
    let text = std::fs::read_to_string(&header).expect("build script writes the header");
    for name in [
        "typedef struct SlTensor SlTensor",
        "sl_last_error",
        "sl_tensor_ghz",
        "sl_tensor_w",
        "sl_tensor_dicke",
        "sl_tensor_from_json",
        "sl_tensor_to_json",
        "sl_tensor_flattening_rank",
        "sl_tensor_free",
        "sl_string_free",
        "sl_w_certificate_verify",
        "sl_w_ghz_rate",
        "sl_cw_run",
        "SlStatus_VerificationFailed = 5",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("slocc_lab.h");
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"]).arg(&header).output() else {
        eprintln!("no C compiler found; skipping the syntax check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
