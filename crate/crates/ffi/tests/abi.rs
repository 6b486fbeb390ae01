use std::ffi::{c_char, CStr, CString};
use std::ptr;

use qclt_ffi::*;

unsafe fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let v = CStr::from_ptr(s).to_str().unwrap().to_string();
    qclt_string_free(s);
    v
}

unsafe fn last_error() -> String {
    take(qclt_last_error())
}

#[test]
fn limit_moments_through_the_abi() {
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(qclt_distribution_bernoulli(8, &mut d), QcltStatus::Ok);
        let want = [(QcltKind::Free, "14"), (QcltKind::Tensor, "105"), (QcltKind::Boolean, "1"), (QcltKind::Monotone, "35/8")];
        for (kind, exact) in want {
            let mut s = ptr::null_mut();
            let mut x = 0.0;
            assert_eq!(qclt_limit_moment(kind, d, ptr::null(), 8, &mut s, &mut x), QcltStatus::Ok);
            let got = take(s);
            assert_eq!(got, exact, "{kind:?}");
            let (p, q) = got.split_once('/').unwrap_or((&got, "1"));
            assert_eq!(x, p.parse::<f64>().unwrap() / q.parse::<f64>().unwrap());
        }
        let mut s = ptr::null_mut();
        let mut x = 0.0;
        assert_eq!(qclt_finite_n_moment(QcltKind::Tensor, d, ptr::null(), 4, 4, &mut s, &mut x), QcltStatus::Ok);
        assert_eq!(take(s), "5/2");
        qclt_distribution_free(d);
    }
}

#[test]
fn toml_distribution_and_labels() {
    unsafe {
        let text = CString::new("[adjoints]\nc = \"c*\"\n[moments]\n\"c c*\" = \"1\"\n\"c* c\" = \"0\"\n\"c c\" = \"0\"\n\"c* c*\" = \"0\"\n\"c\" = \"0\"\n\"c*\" = \"0\"\n").unwrap();
        let mut d = ptr::null_mut();
        assert_eq!(qclt_distribution_from_toml(text.as_ptr(), &mut d), QcltStatus::Ok, "{}", last_error());
        let labels = CString::new("c, c*").unwrap();
        let mut s = ptr::null_mut();
        let mut x = 0.0;
        assert_eq!(qclt_limit_moment(QcltKind::Free, d, labels.as_ptr(), 2, &mut s, &mut x), QcltStatus::Ok);
        assert_eq!(take(s), "1");
        let bad = CString::new("c, z").unwrap();
        assert_ne!(qclt_limit_moment(QcltKind::Free, d, bad.as_ptr(), 2, &mut s, &mut x), QcltStatus::Ok);
        assert!(!last_error().is_empty());
        qclt_distribution_free(d);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut d = ptr::null_mut();
        let junk = CString::new("moments = 3 = 4").unwrap();
        assert_eq!(qclt_distribution_from_toml(junk.as_ptr(), &mut d), QcltStatus::Parse);
        assert!(d.is_null());
        assert_eq!(qclt_distribution_from_toml(ptr::null(), &mut d), QcltStatus::NullPointer);
        assert!(last_error().contains("toml"));

        let short = CString::new("[moments]\n\"b\" = \"0\"\n\"b b\" = \"1\"\n").unwrap();
        assert_eq!(qclt_distribution_from_toml(short.as_ptr(), &mut d), QcltStatus::Ok);
        let mut s = ptr::null_mut();
        let mut x = 0.0;
        assert_eq!(qclt_finite_n_moment(QcltKind::Free, d, ptr::null(), 4, 2, &mut s, &mut x), QcltStatus::MissingMoment);
        assert_eq!(qclt_limit_moment(QcltKind::Free, ptr::null(), ptr::null(), 4, &mut s, &mut x), QcltStatus::NullPointer);
        qclt_distribution_free(d);
        qclt_distribution_free(ptr::null_mut());
        qclt_string_free(ptr::null_mut());
    }
}

#[test]
fn q_limit_and_qccr() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(qclt_q_limit_moment(6, &mut s), QcltStatus::Ok);
        assert_eq!(take(s), "5 + 6*q + 3*q^2 + q^3");

        let q = CString::new("1/2").unwrap();
        let mut m = ptr::null_mut();
        assert_eq!(qclt_qccr_build(q.as_ptr(), 32, &mut m), QcltStatus::Ok);
        let mut r = f64::NAN;
        assert_eq!(qclt_qccr_residual(m, &mut r), QcltStatus::Ok);
        assert!(r < 1e-12);
        let (mut idem, mut err, mut bound) = (f64::NAN, f64::NAN, f64::NAN);
        assert_eq!(qclt_qccr_reconstruct(m, 6, &mut idem, &mut err, &mut bound), QcltStatus::Ok);
        assert!(idem < 1e-9);
        assert!(err <= bound + 1e-9);
        qclt_qccr_free(m);

        let bad = CString::new("3/2").unwrap();
        assert_eq!(qclt_qccr_build(bad.as_ptr(), 8, &mut m), QcltStatus::InvalidArgument);
    }
}

#[test]
fn cli_entry_point() {
    unsafe {
        let args: Vec<CString> =
            ["qclt", "limit", "--kind", "free", "--n", "2,4", "--json"].iter().map(|a| CString::new(*a).unwrap()).collect();
        let ptrs: Vec<*const c_char> = args.iter().map(|a| a.as_ptr()).collect();
        let mut out = ptr::null_mut();
        let mut code = -1;
        assert_eq!(qclt_cli_run(ptrs.len() as i32, ptrs.as_ptr(), &mut out, &mut code), QcltStatus::Ok);
        assert_eq!(code, 0);
        assert!(take(out).contains("\"exact\": \"2\""));

        let args: Vec<CString> = ["qclt", "limit", "--kind", "bogus"].iter().map(|a| CString::new(*a).unwrap()).collect();
        let ptrs: Vec<*const c_char> = args.iter().map(|a| a.as_ptr()).collect();
        assert_eq!(qclt_cli_run(ptrs.len() as i32, ptrs.as_ptr(), &mut out, &mut code), QcltStatus::Ok);
        assert_eq!(code, 1);
        assert!(!take(out).is_empty());
    }
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/qclt.h")).unwrap();
    for f in [
        "qclt_last_error", "qclt_string_free", "qclt_distribution_bernoulli", "qclt_distribution_from_toml",
        "qclt_distribution_free", "qclt_limit_moment", "qclt_finite_n_moment", "qclt_q_limit_moment",
        "qclt_qccr_build", "qclt_qccr_free", "qclt_qccr_residual", "qclt_qccr_reconstruct", "qclt_cli_run",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f}");
    }
    assert!(header.contains("QCLT_STATUS_MISSING_MOMENT = 5"));
}
