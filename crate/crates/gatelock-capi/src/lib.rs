//! C ABI over the gatelock toolkit: opaque handles, integer status codes,
//! and a thread-local last-error message. All returned strings are owned
//! by the caller and released with `gl_string_free`; handles have their own
//! `*_free` functions. Handles are not thread-safe to mutate concurrently,
//! but distinct handles may be used from distinct threads.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use gatelock::attack::{run_attack, AttackOptions, AttackReport, KeyValue};
use gatelock::countermeasure::{lock_cm, CmOptions, KeyBudget};
use gatelock::locker::{lock_rll, lock_sll, parse_key_file, LockedCircuit};
use gatelock::netlist::Netlist;
use gatelock::sim::{check_equivalence, EquivOutcome};

/// Opaque parsed netlist.
pub struct GlNetlist(Netlist);

/// Opaque locked circuit with its ground truth.
pub struct GlLocked(LockedCircuit);

/// Opaque attack report.
pub struct GlReport(AttackReport);

/// Status code returned by fallible entry points; details via
/// `gl_last_error`.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum GlStatus {
    GlOk = 0,
    GlErrArg = 1,
    GlErrParse = 2,
    GlErrLock = 3,
    GlErrVerify = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let owned = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

fn to_owned_c(text: String) -> *mut c_char {
    CString::new(text.replace('\0', " "))
        .map(CString::into_raw)
        .unwrap_or(ptr::null_mut())
}

/// # Safety
/// `text` must be a valid NUL-terminated string.
unsafe fn c_str<'a>(text: *const c_char) -> Option<&'a str> {
    if text.is_null() {
        return None;
    }
    CStr::from_ptr(text).to_str().ok()
}

/// Last error message for this thread; valid until the next failing call.
#[no_mangle]
pub extern "C" fn gl_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version string; caller frees with `gl_string_free`.
#[no_mangle]
pub extern "C" fn gl_version() -> *mut c_char {
    to_owned_c(env!("CARGO_PKG_VERSION").to_string())
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed before.
#[no_mangle]
pub unsafe extern "C" fn gl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse `.bench` text into a netlist handle.
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_netlist_parse(
    text: *const c_char,
    out: *mut *mut GlNetlist,
) -> GlStatus {
    let (Some(text), false) = (c_str(text), out.is_null()) else {
        set_error("null argument");
        return GlStatus::GlErrArg;
    };
    match gatelock::bench::parse_bench(text) {
        Ok(n) => {
            *out = Box::into_raw(Box::new(GlNetlist(n)));
            GlStatus::GlOk
        }
        Err(e) => {
            set_error(&e.to_string());
            GlStatus::GlErrParse
        }
    }
}

/// Serialize a netlist back to `.bench` text.
///
/// # Safety
/// `n` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gl_netlist_to_bench(n: *const GlNetlist) -> *mut c_char {
    let Some(n) = n.as_ref() else {
        set_error("null netlist");
        return ptr::null_mut();
    };
    to_owned_c(gatelock::bench::write_bench(&n.0))
}

/// # Safety
/// `n` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gl_netlist_num_gates(n: *const GlNetlist) -> usize {
    n.as_ref().map_or(0, |n| n.0.num_logic_gates())
}

/// # Safety
/// `n` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gl_netlist_num_inputs(n: *const GlNetlist) -> usize {
    n.as_ref().map_or(0, |n| n.0.primary_inputs().len())
}

/// # Safety
/// `n` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gl_netlist_num_outputs(n: *const GlNetlist) -> usize {
    n.as_ref().map_or(0, |n| n.0.primary_outputs().len())
}

/// # Safety
/// `n` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gl_netlist_num_key_inputs(n: *const GlNetlist) -> usize {
    n.as_ref().map_or(0, |n| n.0.key_inputs().len())
}

/// # Safety
/// `n` must come from this library and not have been freed before.
#[no_mangle]
pub unsafe extern "C" fn gl_netlist_free(n: *mut GlNetlist) {
    if !n.is_null() {
        drop(Box::from_raw(n));
    }
}

/// Random logic locking with `keys` key gates.
///
/// # Safety
/// `n` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_lock_rll(
    n: *const GlNetlist,
    keys: usize,
    seed: u64,
    out: *mut *mut GlLocked,
) -> GlStatus {
    let (Some(n), false) = (n.as_ref(), out.is_null()) else {
        set_error("null argument");
        return GlStatus::GlErrArg;
    };
    match lock_rll(&n.0, keys, seed) {
        Ok(l) => {
            *out = Box::into_raw(Box::new(GlLocked(l)));
            GlStatus::GlOk
        }
        Err(e) => {
            set_error(&e.to_string());
            GlStatus::GlErrLock
        }
    }
}

/// Strong logic locking: key gates in clusters converging within two
/// levels.
///
/// # Safety
/// `n` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_lock_sll(
    n: *const GlNetlist,
    keys: usize,
    cluster: usize,
    seed: u64,
    out: *mut *mut GlLocked,
) -> GlStatus {
    let (Some(n), false) = (n.as_ref(), out.is_null()) else {
        set_error("null argument");
        return GlStatus::GlErrArg;
    };
    if cluster == 0 {
        set_error("cluster must be positive");
        return GlStatus::GlErrArg;
    }
    match lock_sll(&n.0, keys, cluster, seed) {
        Ok(l) => {
            *out = Box::into_raw(Box::new(GlLocked(l)));
            GlStatus::GlOk
        }
        Err(e) => {
            set_error(&e.to_string());
            GlStatus::GlErrLock
        }
    }
}

/// Countermeasure locking: every repeated instance of each chosen unit
/// function is locked, leaving the structural search nothing to reference.
///
/// # Safety
/// `n` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_lock_cm(
    n: *const GlNetlist,
    budget_min: usize,
    budget_max: usize,
    seed: u64,
    out: *mut *mut GlLocked,
) -> GlStatus {
    let (Some(n), false) = (n.as_ref(), out.is_null()) else {
        set_error("null argument");
        return GlStatus::GlErrArg;
    };
    if budget_min == 0 || budget_min > budget_max {
        set_error("budget must satisfy 0 < min <= max");
        return GlStatus::GlErrArg;
    }
    match lock_cm(&n.0, &CmOptions::rll(KeyBudget::new(budget_min, budget_max), seed)) {
        Ok(l) => {
            *out = Box::into_raw(Box::new(GlLocked(l)));
            GlStatus::GlOk
        }
        Err(e) => {
            set_error(&e.to_string());
            GlStatus::GlErrLock
        }
    }
}

/// Borrow the locked netlist; valid while the locked handle lives.
///
/// # Safety
/// `l` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gl_locked_netlist(l: *const GlLocked) -> *mut GlNetlist {
    let Some(l) = l.as_ref() else {
        set_error("null locked circuit");
        return ptr::null_mut();
    };
    Box::into_raw(Box::new(GlNetlist(l.0.netlist.clone())))
}

/// Ground-truth key as `keyinput<i>=<bit>` lines.
///
/// # Safety
/// `l` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gl_locked_key_text(l: *const GlLocked) -> *mut c_char {
    let Some(l) = l.as_ref() else {
        set_error("null locked circuit");
        return ptr::null_mut();
    };
    to_owned_c(l.0.key_file_text())
}

/// Ground-truth JSON record of inserted key gates and families.
///
/// # Safety
/// `l` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gl_locked_record_json(l: *const GlLocked) -> *mut c_char {
    let Some(l) = l.as_ref() else {
        set_error("null locked circuit");
        return ptr::null_mut();
    };
    to_owned_c(l.0.record_json())
}

/// # Safety
/// `l` must come from this library and not have been freed before.
#[no_mangle]
pub unsafe extern "C" fn gl_locked_free(l: *mut GlLocked) {
    if !l.is_null() {
        drop(Box::from_raw(l));
    }
}

/// Run the structural key-recovery attack on a locked netlist. Ground
/// truth never enters: only the netlist handle is read.
///
/// # Safety
/// `n` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_attack(
    n: *const GlNetlist,
    max_layers: u32,
    seed: u64,
    out: *mut *mut GlReport,
) -> GlStatus {
    let (Some(n), false) = (n.as_ref(), out.is_null()) else {
        set_error("null argument");
        return GlStatus::GlErrArg;
    };
    let report = run_attack(
        &n.0,
        &AttackOptions {
            max_layers: max_layers.max(1),
            seed,
        },
    );
    *out = Box::into_raw(Box::new(GlReport(report)));
    GlStatus::GlOk
}

/// # Safety
/// `r` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gl_report_num_keys(r: *const GlReport) -> usize {
    r.as_ref().map_or(0, |r| r.0.predictions.len())
}

/// Predicted value at `index` as '0', '1' or 'X'; NUL on a bad index.
///
/// # Safety
/// `r` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gl_report_value(r: *const GlReport, index: usize) -> c_char {
    r.as_ref()
        .and_then(|r| r.0.predictions.get(index))
        .map_or(0, |p| p.value.symbol() as c_char)
}

/// Key-input name at `index`; caller frees.
///
/// # Safety
/// `r` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gl_report_key_name(r: *const GlReport, index: usize) -> *mut c_char {
    r.as_ref()
        .and_then(|r| r.0.predictions.get(index))
        .map_or(ptr::null_mut(), |p| to_owned_c(p.key_input.clone()))
}

/// Percentage of keys with a definite prediction.
///
/// # Safety
/// `r` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gl_report_sr(r: *const GlReport) -> f64 {
    r.as_ref().map_or(0.0, |r| r.0.sr)
}

/// `keyinput<i>=<0|1|X>` lines; caller frees.
///
/// # Safety
/// `r` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gl_report_predictions_text(r: *const GlReport) -> *mut c_char {
    r.as_ref()
        .map_or(ptr::null_mut(), |r| to_owned_c(r.0.predictions_text()))
}

/// Full report as JSON; caller frees.
///
/// # Safety
/// `r` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gl_report_json(r: *const GlReport) -> *mut c_char {
    r.as_ref().map_or(ptr::null_mut(), |r| to_owned_c(r.0.to_json()))
}

/// # Safety
/// `r` must come from this library and not have been freed before.
#[no_mangle]
pub unsafe extern "C" fn gl_report_free(r: *mut GlReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Simulation equivalence of `original` and `locked` under a key given as
/// `keyinput<i>=<bit>` lines: `*equivalent_out` is 1 when all tested
/// vectors match (exhaustive under 17 shared inputs, else `vectors` seeded
/// random vectors).
///
/// # Safety
/// Handles must be live; `key_text` must be NUL-terminated;
/// `equivalent_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_verify(
    original: *const GlNetlist,
    locked: *const GlNetlist,
    key_text: *const c_char,
    vectors: u64,
    seed: u64,
    equivalent_out: *mut i32,
) -> GlStatus {
    let (Some(original), Some(locked), Some(key_text), false) = (
        original.as_ref(),
        locked.as_ref(),
        c_str(key_text),
        equivalent_out.is_null(),
    ) else {
        set_error("null argument");
        return GlStatus::GlErrArg;
    };
    let key = match parse_key_file(key_text) {
        Ok(k) => k,
        Err(e) => {
            set_error(&e.to_string());
            return GlStatus::GlErrParse;
        }
    };
    match check_equivalence(&original.0, &locked.0, &key, vectors as usize, seed, 16) {
        Ok(EquivOutcome::Equivalent { .. }) => {
            *equivalent_out = 1;
            GlStatus::GlOk
        }
        Ok(EquivOutcome::Mismatch(cex)) => {
            *equivalent_out = 0;
            set_error(&format!("output `{}` diverges", cex.output));
            GlStatus::GlOk
        }
        Err(e) => {
            set_error(&e.to_string());
            GlStatus::GlErrVerify
        }
    }
}

/// Checked conversion used by bindings that only see the report as JSON.
#[allow(dead_code)]
fn value_round_trip(v: KeyValue) -> char {
    v.symbol()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    fn parse(text: &str) -> *mut GlNetlist {
        let c = CString::new(text).unwrap();
        let mut out = ptr::null_mut();
        let status = unsafe { gl_netlist_parse(c.as_ptr(), &mut out) };
        assert!(status == GlStatus::GlOk);
        out
    }

    fn grab_string(p: *mut c_char) -> String {
        assert!(!p.is_null());
        let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
        unsafe { gl_string_free(p) };
        s
    }

    const ADDER: &str = "INPUT(a0)\nINPUT(b0)\nINPUT(a1)\nINPUT(b1)\nINPUT(cin)\n\
        OUTPUT(s1)\nOUTPUT(co)\n\
        x0 = XOR(a0, b0)\nc0 = AND(a0, b0)\ns0 = XOR(x0, cin)\ng0 = AND(x0, cin)\n\
        k0 = OR(c0, g0)\nx1 = XOR(a1, b1)\nc1 = AND(a1, b1)\ns1 = XOR(x1, k0)\n\
        g1 = AND(x1, k0)\nco = OR(c1, g1)\n";

    #[test]
    fn whole_pipeline_through_the_c_surface() {
        let n = parse(ADDER);
        assert_eq!(unsafe { gl_netlist_num_gates(n) }, 10);
        assert_eq!(unsafe { gl_netlist_num_inputs(n) }, 5);
        assert_eq!(unsafe { gl_netlist_num_outputs(n) }, 2);

        let mut locked = ptr::null_mut();
        let status = unsafe { gl_lock_rll(n, 3, 7, &mut locked) };
        assert!(status == GlStatus::GlOk);
        let key_text = grab_string(unsafe { gl_locked_key_text(locked) });
        assert_eq!(key_text.lines().count(), 3);
        let record = grab_string(unsafe { gl_locked_record_json(locked) });
        assert!(record.contains("\"scheme\": \"RLL\""));

        let locked_netlist = unsafe { gl_locked_netlist(locked) };
        assert_eq!(unsafe { gl_netlist_num_key_inputs(locked_netlist) }, 3);

        // attack sees only the netlist
        let mut report = ptr::null_mut();
        let status = unsafe { gl_attack(locked_netlist, 4, 0, &mut report) };
        assert!(status == GlStatus::GlOk);
        assert_eq!(unsafe { gl_report_num_keys(report) }, 3);
        for i in 0..3 {
            let v = unsafe { gl_report_value(report, i) } as u8 as char;
            assert!(matches!(v, '0' | '1' | 'X'));
            let name = grab_string(unsafe { gl_report_key_name(report, i) });
            assert!(name.starts_with("keyinput"));
        }
        let json = grab_string(unsafe { gl_report_json(report) });
        assert!(json.contains("predictions"));

        // correct key verifies
        let key_c = CString::new(key_text.clone()).unwrap();
        let mut equivalent = -1;
        let status = unsafe { gl_verify(n, locked_netlist, key_c.as_ptr(), 5000, 1, &mut equivalent) };
        assert!(status == GlStatus::GlOk);
        assert_eq!(equivalent, 1);

        // flipped bit diverges
        let flipped = {
            let first = key_text.lines().next().unwrap();
            let (name, bit) = first.split_once('=').unwrap();
            key_text.replacen(
                first,
                &format!("{name}={}", if bit == "0" { "1" } else { "0" }),
                1,
            )
        };
        let bad = CString::new(flipped).unwrap();
        let mut equivalent = -1;
        let status = unsafe { gl_verify(n, locked_netlist, bad.as_ptr(), 5000, 1, &mut equivalent) };
        assert!(status == GlStatus::GlOk);
        assert_eq!(equivalent, 0);

        unsafe {
            gl_report_free(report);
            gl_netlist_free(locked_netlist);
            gl_locked_free(locked);
            gl_netlist_free(n);
        }
    }

    #[test]
    fn errors_set_messages_and_codes() {
        let bad = CString::new("INPUT(a)\ny = NAND(a)\n").unwrap();
        let mut out = ptr::null_mut();
        let status = unsafe { gl_netlist_parse(bad.as_ptr(), &mut out) };
        assert!(status == GlStatus::GlErrParse);
        let msg = unsafe { CStr::from_ptr(gl_last_error()) }.to_str().unwrap();
        assert!(msg.contains("NAND"), "{msg}");

        let n = parse("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\n");
        let mut locked = ptr::null_mut();
        let status = unsafe { gl_lock_rll(n, 999, 1, &mut locked) };
        assert!(status == GlStatus::GlErrLock);
        unsafe { gl_netlist_free(n) };
    }

    #[test]
    fn round_trip_via_text() {
        let n = parse(ADDER);
        let text = grab_string(unsafe { gl_netlist_to_bench(n) });
        let again = parse(&text);
        assert_eq!(unsafe { gl_netlist_num_gates(again) }, 10);
        unsafe {
            gl_netlist_free(n);
            gl_netlist_free(again);
        }
    }

    #[test]
    fn countermeasure_through_the_c_surface() {
        let text = gatelock::bench::write_bench(&gatelock::benchgen::ripple_carry_adder(4));
        let n = parse(&text);
        let mut locked = ptr::null_mut();
        let status = unsafe { gl_lock_cm(n, 8, 16, 3, &mut locked) };
        assert!(status == GlStatus::GlOk);
        let record = grab_string(unsafe { gl_locked_record_json(locked) });
        assert!(record.contains("\"families\""));
        let ln = unsafe { gl_locked_netlist(locked) };
        let mut report = ptr::null_mut();
        unsafe { gl_attack(ln, 4, 0, &mut report) };
        let preds = grab_string(unsafe { gl_report_predictions_text(report) });
        assert!(preds.lines().all(|l| l.ends_with("=X")), "{preds}");
        unsafe {
            gl_report_free(report);
            gl_netlist_free(ln);
            gl_locked_free(locked);
            gl_netlist_free(n);
        }
    }
}
