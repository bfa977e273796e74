//! Exercises the C API from Rust, plus one real C program compiled against
//! the generated header and the staticlib.

use std::ffi::{CStr, CString};
use std::ptr;

use mtmorph_ffi::{
    mtm_analyze, mtm_generate, mtm_last_error, mtm_strings_free, mtm_strings_get,
    mtm_strings_len, mtm_toolkit_builtin, mtm_toolkit_free, mtm_toolkit_new, MtmEngine, MtmMode,
    MtmStatus, MtmStrings, MtmToolkit,
};

fn builtin(name: &str) -> *mut MtmToolkit {
    let name = CString::new(name).unwrap();
    let mut tk: *mut MtmToolkit = ptr::null_mut();
    let status = unsafe { mtm_toolkit_builtin(name.as_ptr(), &mut tk) };
    assert_eq!(status, MtmStatus::MTM_OK);
    assert!(!tk.is_null());
    tk
}

fn collect(s: *mut MtmStrings) -> Vec<String> {
    let mut out = Vec::new();
    unsafe {
        for i in 0..mtm_strings_len(s) {
            out.push(CStr::from_ptr(mtm_strings_get(s, i)).to_str().unwrap().to_string());
        }
        mtm_strings_free(s);
    }
    out
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(mtm_last_error()).to_str().unwrap().to_string() }
}

#[test]
fn generate_and_analyze_round_trip() {
    let tk = builtin("arabic");
    let spec = CString::new("pattern=form1 root=ktb vocalism=a").unwrap();
    let mut out: *mut MtmStrings = ptr::null_mut();
    let status = unsafe {
        mtm_generate(tk, spec.as_ptr(), MtmMode::MTM_MODE_FULL, MtmEngine::MTM_ENGINE_AFST, &mut out)
    };
    assert_eq!(status, MtmStatus::MTM_OK);
    assert_eq!(collect(out), ["katab"]);

    let text = CString::new("katab").unwrap();
    let mut out: *mut MtmStrings = ptr::null_mut();
    let status = unsafe {
        mtm_analyze(tk, text.as_ptr(), MtmMode::MTM_MODE_ALL, MtmEngine::MTM_ENGINE_AFST, &mut out)
    };
    assert_eq!(status, MtmStatus::MTM_OK);
    let analyses = collect(out);
    assert!(
        analyses.contains(&"pattern=form1 root=ktb vocalism=a".to_string()),
        "{analyses:?}"
    );
    unsafe { mtm_toolkit_free(tk) };
}

#[test]
fn elision_is_visible_through_the_c_api() {
    let tk = builtin("english");
    let text = CString::new("moved").unwrap();
    let mut out: *mut MtmStrings = ptr::null_mut();
    let status = unsafe {
        mtm_analyze(
            tk,
            text.as_ptr(),
            MtmMode::MTM_MODE_ALL,
            MtmEngine::MTM_ENGINE_INTERPRETER,
            &mut out,
        )
    };
    assert_eq!(status, MtmStatus::MTM_OK);
    let analyses = collect(out);
    assert!(analyses.contains(&"lex=move,ed".to_string()), "{analyses:?}");
    assert!(analyses.contains(&"lex=mov,ed".to_string()), "{analyses:?}");
    unsafe { mtm_toolkit_free(tk) };
}

#[test]
fn failures_report_status_and_message() {
    let name = CString::new("klingon").unwrap();
    let mut tk: *mut MtmToolkit = ptr::null_mut();
    let status = unsafe { mtm_toolkit_builtin(name.as_ptr(), &mut tk) };
    assert_eq!(status, MtmStatus::MTM_UNKNOWN_NAME);
    assert!(last_error().contains("klingon"), "{}", last_error());

    let grammar = CString::new("tapes: t1*\nrule r1: bogus\n").unwrap();
    let lexicon = CString::new("stem x : a\n").unwrap();
    let status = unsafe { mtm_toolkit_new(grammar.as_ptr(), lexicon.as_ptr(), &mut tk) };
    assert_eq!(status, MtmStatus::MTM_INVALID);

    let tk = builtin("arabic");
    let spec = CString::new("pattern=form1 root=zzz vocalism=a").unwrap();
    let mut out: *mut MtmStrings = ptr::null_mut();
    let status = unsafe {
        mtm_generate(tk, spec.as_ptr(), MtmMode::MTM_MODE_FULL, MtmEngine::MTM_ENGINE_AFST, &mut out)
    };
    assert_eq!(status, MtmStatus::MTM_UNKNOWN_NAME);
    assert!(last_error().contains("zzz"), "{}", last_error());

    let spec = CString::new("not-a-spec").unwrap();
    let status = unsafe {
        mtm_generate(tk, spec.as_ptr(), MtmMode::MTM_MODE_FULL, MtmEngine::MTM_ENGINE_AFST, &mut out)
    };
    assert_eq!(status, MtmStatus::MTM_INVALID);

    let status = unsafe {
        mtm_generate(tk, ptr::null(), MtmMode::MTM_MODE_FULL, MtmEngine::MTM_ENGINE_AFST, &mut out)
    };
    assert_eq!(status, MtmStatus::MTM_NULL_ARGUMENT);
    unsafe { mtm_toolkit_free(tk) };
}

#[test]
fn string_lists_tolerate_null_and_out_of_range() {
    unsafe {
        assert_eq!(mtm_strings_len(ptr::null()), 0);
        assert!(mtm_strings_get(ptr::null(), 0).is_null());
        mtm_strings_free(ptr::null_mut());
        mtm_toolkit_free(ptr::null_mut());
    }

    let tk = builtin("ngbaka");
    let spec = CString::new("stem=kpolo tone=L").unwrap();
    let mut out: *mut MtmStrings = ptr::null_mut();
    unsafe {
        let status = mtm_generate(
            tk,
            spec.as_ptr(),
            MtmMode::MTM_MODE_FULL,
            MtmEngine::MTM_ENGINE_AFST,
            &mut out,
        );
        assert_eq!(status, MtmStatus::MTM_OK);
        assert_eq!(mtm_strings_len(out), 1);
        assert_eq!(CStr::from_ptr(mtm_strings_get(out, 0)).to_str().unwrap(), "kpòlò");
        assert!(mtm_strings_get(out, 1).is_null());
        mtm_strings_free(out);
        mtm_toolkit_free(tk);
    }
}

/// Compiles and runs a small C program against the generated header and the
/// static library, proving the shipped artifacts fit together.
#[test]
fn c_program_links_and_runs() {
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let include = manifest.join("include");
    let staticlib = manifest.join("../../target/debug/libmtmorph_ffi.a");
    assert!(staticlib.exists(), "staticlib not built at {staticlib:?}");

    let dir = std::env::temp_dir().join(format!("mtmorph-ffi-c-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include <string.h>
#include "mtmorph.h"

int main(void) {
    MtmToolkit *tk = NULL;
    if (mtm_toolkit_builtin("english", &tk) != MTM_OK) return 1;
    MtmStrings *out = NULL;
    if (mtm_generate(tk, "lex=move,ed", MTM_MODE_FULL, MTM_ENGINE_AFST, &out) != MTM_OK) return 2;
    if (mtm_strings_len(out) != 1) return 3;
    if (strcmp(mtm_strings_get(out, 0), "moved") != 0) return 4;
    mtm_strings_free(out);
    mtm_toolkit_free(tk);
    printf("ok\n");
    return 0;
}
"#,
    )
    .unwrap();

    let bin = dir.join("smoke");
    let cc = std::process::Command::new("cc")
        .arg(&src)
        .arg(&staticlib)
        .arg("-I")
        .arg(&include)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&bin)
        .output()
        .expect("cc runs");
    assert!(cc.status.success(), "cc failed: {}", String::from_utf8_lossy(&cc.stderr));

    let run = std::process::Command::new(&bin).output().unwrap();
    std::fs::remove_dir_all(&dir).ok();
    assert!(run.status.success(), "smoke binary exited {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout), "ok\n");
}
