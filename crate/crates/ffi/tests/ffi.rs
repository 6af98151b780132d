use std::ffi::{c_char, CStr};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use heattrace_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ht_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn trace_round_trip() {
    unsafe {
        let mut req = ptr::null_mut();
        assert_eq!(ht_trace_request_new(HtFamily::B as u32, 33, 8.0, 1e-12, &mut req), HtStatus::Ok);
        let mut out = HtCertified::default();
        assert_eq!(ht_trace_evaluate(req, &mut out), HtStatus::Ok);
        assert!((out.hi - 1.021_588_994_081_097_4).abs() < 1e-15);
        assert!(out.tail_bound <= 1e-12 && out.cutoff > 0);
        assert!(last_error().is_empty());
        ht_trace_request_free(req);
        ht_trace_request_free(ptr::null_mut());
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut req = ptr::null_mut();
        assert_eq!(ht_trace_request_new(HtFamily::B as u32, 32, 8.0, 1e-12, &mut req), HtStatus::Validation);
        assert!(req.is_null());
        assert!(last_error().contains("32"), "{}", last_error());
        assert_eq!(ht_trace_request_new(HtFamily::C as u32, 8, -1.0, 1e-12, &mut req), HtStatus::Domain);
        assert_eq!(ht_trace_request_new(9, 8, 1.0, 1e-12, &mut req), HtStatus::Validation);
        assert_eq!(ht_trace_request_new(HtFamily::C as u32, 8, 1.0, 1e-12, ptr::null_mut()), HtStatus::NullPointer);
        let mut out = HtCertified::default();
        assert_eq!(ht_trace_evaluate(ptr::null(), &mut out), HtStatus::NullPointer);
        assert_eq!(ht_expansion_coefficient(HtFamily::C as u32, 8.0, 2, 1e-60, &mut out), HtStatus::Resource);
        assert!(!last_error().is_empty());
    }
}

#[test]
fn limit_and_coefficients() {
    unsafe {
        let mut lim = HtCertified::default();
        assert_eq!(ht_limit_trace(HtFamily::C as u32, 8.0, &mut lim), HtStatus::Ok);
        let mut a0 = HtCertified::default();
        assert_eq!(ht_expansion_coefficient(HtFamily::C as u32, 8.0, 0, 1e-20, &mut a0), HtStatus::Ok);
        assert!(((lim.hi + lim.lo) - (a0.hi + a0.lo)).abs() < 1e-15);
        let mut odd = HtCertified::default();
        assert_eq!(ht_expansion_coefficient(HtFamily::A as u32, 8.0, 3, 1e-20, &mut odd), HtStatus::Ok);
        assert_eq!((odd.hi, odd.lo), (0.0, 0.0));
    }
}

#[test]
fn hurwitz_table_strings() {
    unsafe {
        let mut table = ptr::null_mut();
        assert_eq!(ht_hurwitz_table_new(30, 6, &mut table), HtStatus::Ok);
        let mut needed = 0usize;
        assert_eq!(ht_hurwitz_table_get(table, 3, 2, ptr::null_mut(), 0, &mut needed), HtStatus::BufferTooSmall);
        assert_eq!(needed, 3);
        let mut buf = [0 as c_char; 64];
        assert_eq!(ht_hurwitz_table_get(table, 3, 2, buf.as_mut_ptr(), buf.len(), &mut needed), HtStatus::Ok);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_str().unwrap(), "18");
        assert_eq!(ht_hurwitz_table_get(table, 30, 6, buf.as_mut_ptr(), buf.len(), ptr::null_mut()), HtStatus::Ok);
        let big = CStr::from_ptr(buf.as_ptr()).to_str().unwrap().to_string();
        assert_eq!(big, heattrace::hurwitz::hurwitz_number(30, 6).unwrap().to_string());
        assert_eq!(ht_hurwitz_table_get(table, 31, 2, buf.as_mut_ptr(), buf.len(), ptr::null_mut()), HtStatus::Validation);
        ht_hurwitz_table_free(table);
        assert_eq!(ht_hurwitz_table_new(0, 2, &mut table), HtStatus::Validation);
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(ht_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(manifest_dir().join("include/heattrace.h")).unwrap();
    for name in [
        "ht_trace_request_new",
        "ht_trace_evaluate",
        "ht_trace_request_free",
        "ht_limit_trace",
        "ht_expansion_coefficient",
        "ht_hurwitz_table_new",
        "ht_hurwitz_table_get",
        "ht_hurwitz_table_free",
        "ht_last_error",
        "ht_version",
        "HT_STATUS_RESOURCE",
        "HT_FAMILY_A_PRIME",
        "typedef struct HtTraceRequest HtTraceRequest;",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

/// Directory holding the library artifacts (`target/<profile>`).
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = artifact_dir().join("libheattrace_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let dir = std::env::temp_dir().join(format!("heattrace-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include <string.h>
#include "heattrace.h"

int main(void) {
    HtTraceRequest *req = NULL;
    if (ht_trace_request_new(HT_FAMILY_C, 16, 4.0, 1e-12, &req) != HT_STATUS_OK) return 1;
    HtCertified v;
    if (ht_trace_evaluate(req, &v) != HT_STATUS_OK) return 2;
    ht_trace_request_free(req);
    if (ht_trace_request_new(HT_FAMILY_B, 16, 4.0, 1e-12, &req) != HT_STATUS_VALIDATION) return 3;
    if (strlen(ht_last_error()) == 0) return 4;
    HtHurwitzTable *table = NULL;
    char buf[32];
    if (ht_hurwitz_table_new(4, 2, &table) != HT_STATUS_OK) return 5;
    if (ht_hurwitz_table_get(table, 3, 2, buf, sizeof buf, NULL) != HT_STATUS_OK) return 6;
    ht_hurwitz_table_free(table);
    printf("%.17g %s\n", v.hi, buf);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler is required for this test");
    assert!(status.success());
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let text = String::from_utf8(run.stdout).unwrap();
    let mut fields = text.split_whitespace();
    let value: f64 = fields.next().unwrap().parse().unwrap();
    assert!(value > 1.0 && value < 2.0);
    assert_eq!(fields.next(), Some("18"));
}
