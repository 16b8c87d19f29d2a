//! Runs the fuzz target bodies over the checked-in corpus seeds and a few
//! hostile inputs.

use std::path::PathBuf;

use hpsig::hpcomplex::verify_duality;
use hpsig::io::{parse_hpx, parse_profile, parse_smf, write_cwb, write_hpx, write_smf, HpxInstance};

fn corpus(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fuzz/corpus")).join(target);
    let mut out: Vec<(String, String)> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            (path.display().to_string(), std::fs::read_to_string(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

fn hpx_body(text: &str) -> bool {
    match parse_hpx(text) {
        Ok(HpxInstance::Closed(hp)) => {
            let again = parse_hpx(&write_hpx(&hp)).expect("written documents parse");
            assert!(matches!(again, HpxInstance::Closed(_)));
            if hp.grading().total() <= 24 {
                let _ = verify_duality(&hp, 1e-9);
            }
            true
        }
        Ok(HpxInstance::WithBoundary(cwb)) => {
            parse_hpx(&write_cwb(&cwb)).expect("written documents parse");
            true
        }
        Err(_) => false,
    }
}

fn smf_body(text: &str) -> bool {
    match parse_smf(text) {
        Ok(inst) => {
            let back = parse_smf(&write_smf(&inst.manifold, inst.action.as_ref())).expect("written documents parse");
            assert_eq!(back.manifold, inst.manifold);
            true
        }
        Err(_) => false,
    }
}

fn profile_body(text: &str) -> bool {
    match parse_profile(text) {
        Ok(p) => {
            assert_eq!(parse_profile(&p.to_string()).unwrap(), p);
            true
        }
        Err(_) => false,
    }
}

#[test]
fn hpx_seeds() {
    let seeds = corpus("parse_hpx");
    let accepted = seeds.iter().filter(|(_, t)| hpx_body(t)).count();
    assert_eq!(accepted, seeds.len() - 1, "only malformed.hpx should be rejected");
}

#[test]
fn smf_seeds() {
    for (name, text) in corpus("parse_smf") {
        assert!(smf_body(&text), "{name}");
    }
}

#[test]
fn profile_seeds() {
    let accepted: Vec<String> = corpus("parse_profile")
        .into_iter()
        .filter(|(_, t)| profile_body(t))
        .map(|(n, _)| n)
        .collect();
    assert_eq!(accepted.len(), 4);
    assert!(accepted.iter().all(|n| !n.ends_with("out_of_range")));
}

#[test]
fn hostile_inputs() {
    for text in [
        "",
        "{",
        "[]",
        "null",
        r#"{"n": 18446744073709551615, "dims": [], "b": [], "S": []}"#,
        r#"{"n": 0, "dims": [100000], "b": [], "S": [[]]}"#,
        r#"{"n": 0, "dims": [1], "b": [], "S": [[[1e400]]]}"#,
        r#"{"n": 0, "dims": [1], "b": [], "S": [[["x"]]]}"#,
        r#"{"n": 0, "dims": [1], "b": [], "S": [[[1, 2]]], "group": {"elements": 2, "mult": [[0, 1], [1, 1]], "action": [[[[1]]], [[[1]]]]}}"#,
        r#"{"n": 0, "dims": [1], "b": [], "S": [[[1]]], "group": {"cyclic": 0, "action": []}}"#,
        r#"{"n": 0, "dims": [1], "b": [], "S": [[[1]]], "group": {"cyclic": 100000000, "action": []}}"#,
    ] {
        assert!(!hpx_body(text), "{text}");
    }
    for text in [
        "",
        r#"{"dim": 0, "vertices": [0], "facets": [{"verts": [0, 0], "sign": 1}]}"#,
        r#"{"dim": 2, "vertices": [0, 1, 2], "facets": [{"verts": [0, 1, 7], "sign": 1}], "boundary": true}"#,
        r#"{"dim": 1, "vertices": [0, 1], "facets": [{"verts": [0, 1], "sign": 1}], "boundary": true, "action": {"group": {"cyclic": 2}, "vertex_maps": [[0, 1], [0, 0]]}}"#,
        r#"{"dim": 18446744073709551615, "vertices": [], "facets": []}"#,
    ] {
        assert!(!smf_body(text), "{text}");
    }
    for text in ["n=", "n=2,n=2", "max_dim=-1", "group=z0", "group=q3", "n=3", "n=2,max_dim=18446744073709551616"] {
        assert!(!profile_body(text), "{text}");
    }
}

mod mutation {
    use super::*;
    use proptest::prelude::*;

    fn mutate(seed: &str, edits: &[(usize, u8)]) -> String {
        let mut bytes = seed.as_bytes().to_vec();
        for &(at, b) in edits {
            if bytes.is_empty() {
                break;
            }
            let i = at % bytes.len();
            match b % 3 {
                0 => bytes[i] = b"0123456789-.,[]{}\":ezn "[b as usize % 23],
                1 => {
                    bytes.remove(i);
                }
                _ => bytes.insert(i, b"0123456789-.,[]{}\":ezn "[b as usize % 23]),
            }
        }
        String::from_utf8_lossy(&bytes).into_owned()
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

        #[test]
        fn mutated_hpx_never_panics(pick in any::<usize>(), edits in prop::collection::vec((any::<usize>(), any::<u8>()), 1..6)) {
            let seeds = corpus("parse_hpx");
            let (_, seed) = &seeds[pick % seeds.len()];
            hpx_body(&mutate(seed, &edits));
        }

        #[test]
        fn mutated_smf_never_panics(pick in any::<usize>(), edits in prop::collection::vec((any::<usize>(), any::<u8>()), 1..6)) {
            let seeds = corpus("parse_smf");
            let (_, seed) = &seeds[pick % seeds.len()];
            smf_body(&mutate(seed, &edits));
        }

        #[test]
        fn arbitrary_profiles_never_panic(text in "[a-z_=,0-9 ]{0,40}") {
            profile_body(&text);
        }
    }
}
