//! C bindings for the mtmorph toolkit. Handles are opaque, results are
//! returned through out-parameters, and every failure leaves a message in a
//! thread-local buffer readable via `mtm_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use mtmorph::{fixtures, EngineKind, Mode, Toolkit};

/// An immutable, loaded grammar-plus-lexicon pair.
pub struct MtmToolkit {
    inner: Toolkit,
}

/// An owned list of NUL-terminated strings.
pub struct MtmStrings {
    items: Vec<CString>,
}

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[allow(non_camel_case_types)]
pub enum MtmStatus {
    /// The call succeeded; out-parameters are filled in.
    MTM_OK = 0,
    /// A name (builtin, morpheme, tape) resolved to nothing.
    MTM_UNKNOWN_NAME = 1,
    /// Malformed grammar, lexicon, spec, or text.
    MTM_INVALID = 2,
    /// A required pointer argument was NULL.
    MTM_NULL_ARGUMENT = 3,
}

/// Which backend executes the search.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
#[allow(non_camel_case_types)]
pub enum MtmEngine {
    MTM_ENGINE_INTERPRETER = 0,
    MTM_ENGINE_AFST = 1,
}

/// Which derivations survive filtering.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
#[allow(non_camel_case_types)]
pub enum MtmMode {
    MTM_MODE_FULL = 0,
    MTM_MODE_ALL = 1,
    MTM_MODE_BARE = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

fn engine_of(e: MtmEngine) -> EngineKind {
    match e {
        MtmEngine::MTM_ENGINE_INTERPRETER => EngineKind::Interpreter,
        MtmEngine::MTM_ENGINE_AFST => EngineKind::Afst,
    }
}

fn mode_of(m: MtmMode) -> Mode {
    match m {
        MtmMode::MTM_MODE_FULL => Mode::Full,
        MtmMode::MTM_MODE_ALL => Mode::All,
        MtmMode::MTM_MODE_BARE => Mode::Bare,
    }
}

/// Reads a required C string argument, recording an error when absent.
unsafe fn required<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, MtmStatus> {
    if ptr.is_null() {
        set_error(&format!("{what} is NULL"));
        return Err(MtmStatus::MTM_NULL_ARGUMENT);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(s),
        Err(_) => {
            set_error(&format!("{what} is not valid UTF-8"));
            Err(MtmStatus::MTM_INVALID)
        }
    }
}

fn emit(out: *mut *mut MtmStrings, mut items: Vec<String>) -> MtmStatus {
    items.sort();
    items.dedup();
    let strings = MtmStrings {
        items: items.into_iter().map(|s| CString::new(s.replace('\0', " ")).unwrap()).collect(),
    };
    unsafe { *out = Box::into_raw(Box::new(strings)) };
    MtmStatus::MTM_OK
}

/// Parses `tape=id,id tape=id ...` into generation specs.
fn parse_spec(spec: &str) -> Result<Vec<(String, Vec<String>)>, String> {
    let mut out = Vec::new();
    for field in spec.split_whitespace() {
        let Some((tape, ids)) = field.split_once('=') else {
            return Err(format!("spec field `{field}` needs `tape=id[,id...]`"));
        };
        let ids: Vec<String> =
            ids.split(',').filter(|s| !s.is_empty()).map(str::to_string).collect();
        if tape.is_empty() || ids.is_empty() {
            return Err(format!("spec field `{field}` needs `tape=id[,id...]`"));
        }
        out.push((tape.to_string(), ids));
    }
    if out.is_empty() {
        return Err("spec is empty".to_string());
    }
    Ok(out)
}

/// Loads a toolkit from grammar and lexicon source text.
///
/// # Safety
/// `grammar_src`, `lexicon_src` must be NUL-terminated strings; `out` must be
/// a valid pointer. On success `*out` owns the toolkit until
/// `mtm_toolkit_free`.
#[no_mangle]
pub unsafe extern "C" fn mtm_toolkit_new(
    grammar_src: *const c_char,
    lexicon_src: *const c_char,
    out: *mut *mut MtmToolkit,
) -> MtmStatus {
    if out.is_null() {
        set_error("out is NULL");
        return MtmStatus::MTM_NULL_ARGUMENT;
    }
    let grammar = match required(grammar_src, "grammar_src") {
        Ok(s) => s,
        Err(st) => return st,
    };
    let lexicon = match required(lexicon_src, "lexicon_src") {
        Ok(s) => s,
        Err(st) => return st,
    };
    match Toolkit::load(grammar, lexicon) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(MtmToolkit { inner }));
            MtmStatus::MTM_OK
        }
        Err(e) => {
            set_error(&e.to_string());
            MtmStatus::MTM_INVALID
        }
    }
}

/// Loads one of the built-in grammars (`arabic`, `english`, `ngbaka`) with
/// its built-in lexicon.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mtm_toolkit_builtin(
    name: *const c_char,
    out: *mut *mut MtmToolkit,
) -> MtmStatus {
    if out.is_null() {
        set_error("out is NULL");
        return MtmStatus::MTM_NULL_ARGUMENT;
    }
    let name = match required(name, "name") {
        Ok(s) => s,
        Err(st) => return st,
    };
    let Some(b) = fixtures::builtin(name) else {
        set_error(&format!("no built-in grammar named `{name}`"));
        return MtmStatus::MTM_UNKNOWN_NAME;
    };
    match Toolkit::load(b.grammar, b.lexicon) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(MtmToolkit { inner }));
            MtmStatus::MTM_OK
        }
        Err(e) => {
            set_error(&e.to_string());
            MtmStatus::MTM_INVALID
        }
    }
}

/// Frees a toolkit. NULL is allowed.
///
/// # Safety
/// `tk` must be NULL or a pointer returned by a toolkit constructor, not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn mtm_toolkit_free(tk: *mut MtmToolkit) {
    if !tk.is_null() {
        drop(Box::from_raw(tk));
    }
}

/// Synthesizes the surface forms for a morpheme spec `tape=id,id tape=id`.
/// Distinct surfaces are returned sorted.
///
/// # Safety
/// `tk` must be a live toolkit, `spec` a NUL-terminated string, `out` a valid
/// pointer. On success `*out` owns the strings until `mtm_strings_free`.
#[no_mangle]
pub unsafe extern "C" fn mtm_generate(
    tk: *const MtmToolkit,
    spec: *const c_char,
    mode: MtmMode,
    engine: MtmEngine,
    out: *mut *mut MtmStrings,
) -> MtmStatus {
    if tk.is_null() || out.is_null() {
        set_error("tk or out is NULL");
        return MtmStatus::MTM_NULL_ARGUMENT;
    }
    let spec = match required(spec, "spec") {
        Ok(s) => s,
        Err(st) => return st,
    };
    let specs = match parse_spec(spec) {
        Ok(s) => s,
        Err(e) => {
            set_error(&e);
            return MtmStatus::MTM_INVALID;
        }
    };
    match (&*tk).inner.generate(engine_of(engine), mode_of(mode), &specs) {
        Ok(gens) => emit(out, gens.into_iter().map(|g| g.surface).collect()),
        Err(e @ mtmorph::Error::UnknownMorpheme(_)) => {
            set_error(&e.to_string());
            MtmStatus::MTM_UNKNOWN_NAME
        }
        Err(e) => {
            set_error(&e.to_string());
            MtmStatus::MTM_INVALID
        }
    }
}

/// Recognizes a surface form. Each result line is a morpheme spec in the
/// same `tape=id,id tape=id` format `mtm_generate` accepts.
///
/// # Safety
/// `tk` must be a live toolkit, `text` a NUL-terminated string, `out` a
/// valid pointer. On success `*out` owns the strings until
/// `mtm_strings_free`.
#[no_mangle]
pub unsafe extern "C" fn mtm_analyze(
    tk: *const MtmToolkit,
    text: *const c_char,
    mode: MtmMode,
    engine: MtmEngine,
    out: *mut *mut MtmStrings,
) -> MtmStatus {
    if tk.is_null() || out.is_null() {
        set_error("tk or out is NULL");
        return MtmStatus::MTM_NULL_ARGUMENT;
    }
    let text = match required(text, "text") {
        Ok(s) => s,
        Err(st) => return st,
    };
    let toolkit = &(*tk).inner;
    match toolkit.analyze(engine_of(engine), mode_of(mode), text) {
        Ok(analyses) => {
            let lines = analyses
                .iter()
                .map(|a| {
                    a.morphemes
                        .iter()
                        .enumerate()
                        .filter(|(_, ids)| !ids.is_empty())
                        .map(|(i, ids)| {
                            format!("{}={}", toolkit.grammar.tapes.names[i], ids.join(","))
                        })
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            emit(out, lines)
        }
        Err(e) => {
            set_error(&e.to_string());
            MtmStatus::MTM_INVALID
        }
    }
}

/// Number of strings in the list. NULL yields 0.
///
/// # Safety
/// `s` must be NULL or a live string list.
#[no_mangle]
pub unsafe extern "C" fn mtm_strings_len(s: *const MtmStrings) -> usize {
    if s.is_null() {
        return 0;
    }
    (&*s).items.len()
}

/// Borrows the i-th string; NULL when out of range. The pointer lives as
/// long as the list.
///
/// # Safety
/// `s` must be NULL or a live string list.
#[no_mangle]
pub unsafe extern "C" fn mtm_strings_get(s: *const MtmStrings, i: usize) -> *const c_char {
    if s.is_null() {
        return ptr::null();
    }
    match (&*s).items.get(i) {
        Some(c) => c.as_ptr(),
        None => ptr::null(),
    }
}

/// Frees a string list. NULL is allowed.
///
/// # Safety
/// `s` must be NULL or a pointer returned through an out-parameter, not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn mtm_strings_free(s: *mut MtmStrings) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Message describing this thread's most recent failure. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mtm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
