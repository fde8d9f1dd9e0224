use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use wsbmf_ffi::*;

fn last_error() -> String {
    let p = wsbmf_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn detects_two_bicliques_through_the_c_api() {
    unsafe {
        let mut edges = Vec::new();
        for d in 0..3 {
            for g in 0..3 {
                edges.extend([d, g]);
                edges.extend([d + 3, g + 3]);
            }
        }
        let mut graph = ptr::null_mut();
        assert_eq!(wsbmf_graph_new(6, 6, edges.as_ptr(), edges.len() / 2, &mut graph), WsbmfStatus::Ok);
        assert_eq!(wsbmf_graph_n_edges(graph), 18);

        let config = wsbmf_config_default(2);
        let mut result = ptr::null_mut();
        assert_eq!(wsbmf_detect(graph, &config, &mut result), WsbmfStatus::Ok);
        assert_eq!(wsbmf_result_n_nodes(result), 12);
        assert_eq!(wsbmf_result_communities(result), 2);
        assert_eq!(wsbmf_result_objective(result), 0.0);

        let mut binary = vec![0u8; 24];
        assert_eq!(wsbmf_result_binary(result, binary.as_mut_ptr(), binary.len()), WsbmfStatus::Ok);
        let label = |v: usize| binary[2 * v..2 * v + 2].iter().position(|&b| b == 1).unwrap();
        let truth = [0usize, 0, 0, 1, 1, 1];
        let found: Vec<usize> = (0..6).map(label).collect();
        let mut score = 0.0;
        assert_eq!(wsbmf_nmi(truth.as_ptr(), found.as_ptr(), 6, &mut score), WsbmfStatus::Ok);
        assert!((score - 1.0).abs() < 1e-12);

        let mut small = [0.0f64; 3];
        assert_eq!(
            wsbmf_result_continuous(result, small.as_mut_ptr(), small.len()),
            WsbmfStatus::BufferTooSmall
        );
        assert!(last_error().contains("24"));

        let mut json = ptr::null_mut();
        assert_eq!(wsbmf_result_to_json(result, &mut json), WsbmfStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        wsbmf_string_free(json);
        assert!(text.contains("\"schema\": \"wsbmf-cover/1\""));

        wsbmf_result_free(result);
        wsbmf_graph_free(graph);
    }
}

#[test]
fn priors_and_errors() {
    unsafe {
        let mut graph = ptr::null_mut();
        assert_eq!(wsbmf_graph_women(&mut graph), WsbmfStatus::Ok);
        assert_eq!((wsbmf_graph_n_delta(graph), wsbmf_graph_n_gamma(graph)), (18, 14));

        let config = wsbmf_config_default(2);
        let mut result = ptr::null_mut();
        // Δ node 0 paired with Γ node 18 crosses parts.
        let cross = [0usize, 18];
        let status = wsbmf_detect_with_priors(graph, &config, cross.as_ptr(), 1, ptr::null(), 0, &mut result);
        assert_eq!(status, WsbmfStatus::InputError);
        assert!(result.is_null());

        let must = [0usize, 17];
        let status = wsbmf_detect_with_priors(graph, &config, must.as_ptr(), 1, ptr::null(), 0, &mut result);
        assert_eq!(status, WsbmfStatus::Ok);
        assert!(wsbmf_last_error().is_null());
        wsbmf_result_free(result);

        let bad = wsbmf_config_default(0);
        assert_eq!(wsbmf_detect(graph, &bad, &mut result), WsbmfStatus::InvalidArgument);
        assert_eq!(wsbmf_detect(ptr::null(), &config, &mut result), WsbmfStatus::NullPointer);
        wsbmf_graph_free(graph);

        let text = CString::new("w1 e1\nw2 e1\n").unwrap();
        assert_eq!(wsbmf_graph_from_edgelist(text.as_ptr(), &mut graph), WsbmfStatus::Ok);
        assert_eq!(wsbmf_graph_n_delta(graph), 2);
        wsbmf_graph_free(graph);
        let empty = CString::new("").unwrap();
        assert_eq!(wsbmf_graph_from_edgelist(empty.as_ptr(), &mut graph), WsbmfStatus::InputError);
    }
}

#[test]
fn header_declares_the_api_and_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/wsbmf.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "wsbmf_graph_new",
        "wsbmf_detect_with_priors",
        "wsbmf_result_to_json",
        "wsbmf_last_error",
        "typedef struct WsbmfGraph WsbmfGraph",
        "WSBMF_STATUS_OK = 0",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    // Syntax check with a C compiler when one is installed.
    if let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-x", "c"]).arg(&header).output() {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
