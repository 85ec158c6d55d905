use std::ffi::{CStr, CString};
use std::ptr;

use fraisse_ffi::*;

fn owned(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { fr_string_free(s) };
    out
}

fn last_error() -> String {
    let p = fr_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

fn gen_fn(n: usize) -> *mut FrStructure {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fr_gen_fn(n, &mut s) }, FrStatus::Ok);
    s
}

#[test]
fn json_roundtrip_through_handles() {
    let f3 = gen_fn(3);
    let mut len = 0usize;
    assert_eq!(unsafe { fr_structure_len(f3, &mut len) }, FrStatus::Ok);
    assert_eq!(len, 5);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { fr_structure_to_json(f3, &mut json) }, FrStatus::Ok);
    let text = owned(json);
    let c = CString::new(text.clone()).unwrap();
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { fr_structure_from_json(c.as_ptr(), &mut back) }, FrStatus::Ok);
    let mut iso = false;
    assert_eq!(unsafe { fr_is_isomorphic(f3, back, &mut iso) }, FrStatus::Ok);
    assert!(iso);
    let mut again = ptr::null_mut();
    assert_eq!(unsafe { fr_structure_to_json(back, &mut again) }, FrStatus::Ok);
    assert_eq!(owned(again), text);
    unsafe {
        fr_structure_free(f3);
        fr_structure_free(back);
    }
}

#[test]
fn antichain_through_ffi() {
    let f3 = gen_fn(3);
    let f4 = gen_fn(4);
    let mut found = true;
    let mut map = ptr::null_mut();
    assert_eq!(unsafe { fr_find_homomorphism(f3, f4, &mut found, &mut map) }, FrStatus::Ok);
    assert!(!found);
    assert!(map.is_null());
    assert_eq!(unsafe { fr_find_homomorphism(f4, f4, &mut found, &mut map) }, FrStatus::Ok);
    assert!(found);
    let map: serde_json::Value = serde_json::from_str(&owned(map)).unwrap();
    assert_eq!(map.as_object().unwrap().len(), 6);
    assert_eq!(unsafe { fr_find_homomorphism(f4, f4, &mut found, ptr::null_mut()) }, FrStatus::Ok);
    assert!(found);
    unsafe {
        fr_structure_free(f3);
        fr_structure_free(f4);
    }
}

#[test]
fn contradictory_marking_is_inconsistent() {
    let mut t2 = ptr::null_mut();
    let g = CString::new("2").unwrap();
    assert_eq!(unsafe { fr_gen_template(g.as_ptr(), &mut t2) }, FrStatus::Ok);
    // one element carrying both markers has no reply
    let doc = r#"{"domain":["x"],"relations":{"C0":[["x"]],"C1":[["x"]]},"signature":[{"arity":1,"name":"C0"},{"arity":1,"name":"C1"},{"arity":2,"name":"pi1"},{"arity":2,"name":"pi2"},{"arity":2,"name":"pi3"},{"arity":1,"name":"triple"},{"arity":1,"name":"value"}]}"#;
    let doc = CString::new(doc).unwrap();
    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { fr_structure_from_json(doc.as_ptr(), &mut bad) }, FrStatus::Ok);
    let mut ok = true;
    assert_eq!(unsafe { fr_is_consistent(bad, t2, 1, 1, 0, &mut ok) }, FrStatus::Ok);
    assert!(!ok);
    assert_eq!(unsafe { fr_is_consistent(bad, t2, 2, 1, 0, &mut ok) }, FrStatus::InvalidArgument);
    assert!(last_error().contains("invalid"));
    unsafe {
        fr_structure_free(bad);
        fr_structure_free(t2);
    }
}

#[test]
fn bounds_values() {
    let mut found = false;
    let mut m = 0u64;
    assert_eq!(unsafe { fr_minimal_m(2, 1, 1, 1_000_000, true, &mut found, &mut m) }, FrStatus::Ok);
    assert!(found);
    assert_eq!(m, 12);
    assert_eq!(unsafe { fr_minimal_m(2, 1, 1, 11, true, &mut found, &mut m) }, FrStatus::Ok);
    assert!(!found);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { fr_bounds_report(2, 1, 1, 11, true, &mut json) }, FrStatus::Ok);
    let report: serde_json::Value = serde_json::from_str(&owned(json)).unwrap();
    assert_eq!(report["threshold"], "130");
    assert_eq!(report["q"], "8");
    assert_eq!(report["verdict"], false);
    assert_eq!(unsafe { fr_bounds_report(1, 2, 0, 3, true, &mut json) }, FrStatus::InvalidArgument);
    assert!(last_error().contains("exceeds"));
}

#[test]
fn errors_and_null_handling() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fr_structure_from_json(ptr::null(), &mut s) }, FrStatus::NullPointer);
    let junk = CString::new("{").unwrap();
    assert_eq!(unsafe { fr_structure_from_json(junk.as_ptr(), &mut s) }, FrStatus::Parse);
    assert!(s.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { fr_gen_fn(0, &mut s) }, FrStatus::InvalidArgument);
    let f1 = gen_fn(1);
    assert!(fr_last_error_message().is_null());
    assert_eq!(unsafe { fr_structure_len(f1, ptr::null_mut()) }, FrStatus::NullPointer);
    let mut t = ptr::null_mut();
    let g = CString::new("2").unwrap();
    assert_eq!(unsafe { fr_gen_template(g.as_ptr(), &mut t) }, FrStatus::Ok);
    let mut iso = false;
    assert_eq!(unsafe { fr_is_isomorphic(f1, t, &mut iso) }, FrStatus::SignatureMismatch);
    let bad_group = CString::new("2xq").unwrap();
    let mut t3 = ptr::null_mut();
    assert_eq!(unsafe { fr_gen_template(bad_group.as_ptr(), &mut t3) }, FrStatus::Parse);
    unsafe {
        fr_structure_free(f1);
        fr_structure_free(t);
        fr_structure_free(ptr::null_mut());
        fr_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_function() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/fraisse.h")).unwrap();
    for name in [
        "fr_last_error_message",
        "fr_string_free",
        "fr_structure_from_json",
        "fr_structure_to_json",
        "fr_structure_free",
        "fr_structure_len",
        "fr_gen_fn",
        "fr_gen_template",
        "fr_find_homomorphism",
        "fr_is_isomorphic",
        "fr_is_consistent",
        "fr_bounds_report",
        "fr_minimal_m",
    ] {
        assert!(header.contains(&format!("{name}(")), "{name} missing");
    }
    assert!(header.contains("typedef struct FrStructure FrStructure;"));
}
