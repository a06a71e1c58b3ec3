use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use cardproto_ffi::*;

fn take(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { cp_string_free(s) };
    out
}

fn last_error() -> String {
    let p = cp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn builtin(name: &str, params: Option<&str>) -> Result<*mut CpProtocol, CpStatus> {
    let name = CString::new(name).unwrap();
    let params = params.map(|p| CString::new(p).unwrap());
    let mut out = ptr::null_mut();
    let st = unsafe {
        cp_protocol_builtin(
            name.as_ptr(),
            params.as_ref().map_or(ptr::null(), |p| p.as_ptr()),
            &mut out,
        )
    };
    if st == CpStatus::Ok {
        Ok(out)
    } else {
        Err(st)
    }
}

#[test]
fn verify_equality_through_the_abi() {
    let p = builtin("equality_first", Some(r#"{"n": 3}"#)).unwrap();
    assert_eq!(unsafe { cp_protocol_card_count(p) }, 6);
    let mut json = ptr::null_mut();
    let st = unsafe { cp_protocol_verify_json(p, 0, ptr::null(), -1, &mut json) };
    assert_eq!(st, CpStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
    assert_eq!(v["correctness"]["pass"], true);
    assert_eq!(v["security"]["pass"], true);
    assert!(v.get("posteriors").is_none());

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { cp_protocol_resources(p, &mut json) }, CpStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
    assert_eq!(v["shuffles"], 3);
    unsafe { cp_protocol_free(p) };
}

#[test]
fn posteriors_and_budget() {
    let p = builtin("five_card_trick", None).unwrap();
    let prior = CString::new("point:1,1").unwrap();
    let mut json = ptr::null_mut();
    let st = unsafe { cp_protocol_verify_json(p, 0, prior.as_ptr(), -1, &mut json) };
    assert_eq!(st, CpStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
    assert_eq!(v["posteriors"]["pass"], true);

    let mut json = ptr::null_mut();
    let st = unsafe { cp_protocol_verify_json(p, 3, ptr::null(), -1, &mut json) };
    assert_eq!(st, CpStatus::BudgetExceeded);
    assert!(json.is_null());
    assert!(last_error().contains("budget"));
    unsafe { cp_protocol_free(p) };
}

#[test]
fn bad_inputs() {
    assert_eq!(
        builtin("nope", None).unwrap_err(),
        CpStatus::InvalidArgument
    );
    assert_eq!(
        builtin("equality_first", Some(r#"{"n": 3, "q": 1}"#)).unwrap_err(),
        CpStatus::InvalidArgument
    );
    assert!(last_error().contains("bad params"));

    let src = CString::new("protocol x\nreveal 1\n").unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { cp_protocol_from_script(src.as_ptr(), &mut out) };
    assert_eq!(st, CpStatus::ScriptRejected);
    assert!(out.is_null());
    assert!(last_error().starts_with("<script>:"));
}

#[test]
fn insecure_script_reports_check_failed() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/scripts/leaky_and.cardp");
    let src = CString::new(std::fs::read_to_string(path).unwrap()).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { cp_protocol_from_script(src.as_ptr(), &mut p) },
        CpStatus::Ok
    );
    let mut json = ptr::null_mut();
    let st = unsafe { cp_protocol_verify_json(p, 0, ptr::null(), -1, &mut json) };
    assert_eq!(st, CpStatus::CheckFailed);
    let v: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
    assert_eq!(v["security"]["pass"], false);
    unsafe { cp_protocol_free(p) };
}

/// Compiles a small C program against the generated header and static
/// library. Skipped when no C compiler or static library is available.
#[test]
fn c_program_links_against_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = manifest.join("include");
    assert!(header_dir.join("cardproto.h").exists());
    let target = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let lib_dir = target.parent().unwrap().join("debug");
    if !lib_dir.join("libcardproto_ffi.a").exists()
        || Command::new("cc").arg("--version").output().is_err()
    {
        eprintln!("skipping: static library or C compiler not available");
        return;
    }
    let src = target.join("abi_smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include <string.h>
#include "cardproto.h"
int main(void) {
    CpProtocol *p = NULL;
    if (cp_protocol_builtin("five_card_trick", NULL, &p) != CP_STATUS_OK) return 1;
    char *json = NULL;
    if (cp_protocol_resources(p, &json) != CP_STATUS_OK) return 2;
    if (strstr(json, "\"cards\":5") == NULL) return 3;
    cp_string_free(json);
    cp_protocol_free(p);
    if (cp_protocol_builtin("nope", NULL, &p) != CP_STATUS_INVALID_ARGUMENT) return 4;
    if (cp_last_error() == NULL) return 5;
    puts("ok");
    return 0;
}
"#,
    )
    .unwrap();
    let exe = target.join("abi_smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&header_dir)
        .arg(lib_dir.join("libcardproto_ffi.a"))
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "ok\n");
}
