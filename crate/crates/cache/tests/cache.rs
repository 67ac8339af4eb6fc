use std::collections::BTreeMap;
use std::path::Path;

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use vspec_cache::*;
use vspec_core::expr::SolverVar;
use vspec_core::marabou::{PropertyStatus, Witness};
use vspec_core::network::hash_file;
use vspec_core::scalar::rat;

fn sample(dir: &Path, status: PropertyStatus) -> ProofCacheFile {
    let spec = dir.join("spec.vcl");
    let net = dir.join("f.vnet");
    std::fs::write(&spec, "p : Prop\np = True\n").unwrap();
    std::fs::write(&net, "vnet 1\ninput 1\naffine 1 1\n1\n0\n").unwrap();
    let mut file = ProofCacheFile {
        spec: Some(ArtifactRecord { digest: hash_file(&spec).unwrap(), path: spec }),
        ..ProofCacheFile::default()
    };
    file.networks.insert("f".into(), ArtifactRecord { digest: hash_file(&net).unwrap(), path: net });
    file.properties.insert(
        "safe".into(),
        PropertyRecord {
            status,
            networks: vec!["f".into()],
            query_count: 2,
            verifier: "test".into(),
            timestamp: "2026-01-01T00:00:00Z".into(),
        },
    );
    file
}

#[test]
fn read_after_write() {
    let dir = tempfile::tempdir().unwrap();
    let w: Witness = [(SolverVar::Input(0), rat(13, 4)), (SolverVar::Output(0), rat(0, 1))].into_iter().collect();
    let mut file = sample(dir.path(), PropertyStatus::Falsified { witness: Some(w) });
    file.itp_digest = Some(vspec_core::network::hash_bytes(b"module"));
    let path = dir.path().join("p.vclp");
    write_proof_file(&file, &path).unwrap();
    assert_eq!(read_proof_file(&path).unwrap(), file);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("witness.x0 = 13/4\n"));
    assert!(text.contains("status = Falsified\n"));
}

#[test]
fn untouched_files_return_stored_status() {
    let dir = tempfile::tempdir().unwrap();
    let file = sample(dir.path(), PropertyStatus::Verified { witness: None });
    let path = dir.path().join("p.vclp");
    write_proof_file(&file, &path).unwrap();
    assert_eq!(check_property(&path, "safe").unwrap(), PropertyStatus::Verified { witness: None });
}

#[test]
fn modified_network_is_stale() {
    let dir = tempfile::tempdir().unwrap();
    let file = sample(dir.path(), PropertyStatus::Verified { witness: None });
    let path = dir.path().join("p.vclp");
    write_proof_file(&file, &path).unwrap();
    std::fs::write(dir.path().join("f.vnet"), "vnet 1\ninput 1\naffine 1 1\n2\n0\n").unwrap();
    match check_property(&path, "safe") {
        Err(CacheError::StaleCache { artifact, .. }) => assert!(artifact.contains("`f`")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn modified_spec_is_stale() {
    let dir = tempfile::tempdir().unwrap();
    let file = sample(dir.path(), PropertyStatus::Verified { witness: None });
    std::fs::write(dir.path().join("spec.vcl"), "p : Prop\np = False\n").unwrap();
    assert!(matches!(file.check_property("safe"), Err(CacheError::StaleCache { .. })));
}

#[test]
fn missing_network_is_stale() {
    let dir = tempfile::tempdir().unwrap();
    let file = sample(dir.path(), PropertyStatus::Verified { witness: None });
    std::fs::remove_file(dir.path().join("f.vnet")).unwrap();
    assert!(matches!(file.check_property("safe"), Err(CacheError::StaleCache { actual: None, .. })));
}

#[test]
fn unknown_property() {
    let dir = tempfile::tempdir().unwrap();
    let file = sample(dir.path(), PropertyStatus::NotChecked);
    assert!(matches!(file.check_property("unsafe"), Err(CacheError::UnknownProperty(p)) if p == "unsafe"));
}

#[test]
fn empty_file_is_valid() {
    let file = ProofCacheFile::default();
    assert_eq!(parse_proof_file(&file.to_string()).unwrap(), file);
    assert!(file.check_all().unwrap().is_empty());
}

#[test]
fn malformed_files() {
    for text in ["", "vclp 2\n", "vclp 1\nkey = value\n", "vclp 1\n[spec]\npath = x\n", "vclp 1\n[bogus]\n"] {
        assert!(matches!(parse_proof_file(text), Err(CacheError::MalformedProofFile { .. })), "{text:?}");
    }
}

#[test]
fn serialisation_is_canonical() {
    let dir = tempfile::tempdir().unwrap();
    let file = sample(dir.path(), PropertyStatus::Verified { witness: None });
    let text = file.to_string();
    assert_eq!(parse_proof_file(&text).unwrap().to_string(), text);
    let keys: Vec<&str> = text
        .split("[property safe]\n")
        .nth(1)
        .unwrap()
        .lines()
        .take_while(|l| !l.is_empty())
        .map(|l| l.split(" = ").next().unwrap())
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn module_digest() {
    let dir = tempfile::tempdir().unwrap();
    let module = dir.path().join("M.agda");
    std::fs::write(&module, "module M where\n").unwrap();
    let file = ProofCacheFile { itp_digest: Some(hash_file(&module).unwrap()), ..ProofCacheFile::default() };
    file.check_module(&module).unwrap();
    std::fs::write(&module, "module M where\n-- edited\n").unwrap();
    assert!(matches!(file.check_module(&module), Err(CacheError::StaleCache { .. })));
}

fn arb_status() -> impl Strategy<Value = PropertyStatus> {
    let witness = prop::collection::btree_map(
        (any::<bool>(), 0usize..4).prop_map(|(o, i)| if o { SolverVar::Output(i) } else { SolverVar::Input(i) }),
        (-50i64..50, 1i64..20).prop_map(|(n, d)| rat(n, d)),
        0..4,
    )
    .prop_map(|w: BTreeMap<_, _>| (!w.is_empty()).then_some(w));
    prop_oneof![
        witness.clone().prop_map(|witness| PropertyStatus::Verified { witness }),
        witness.prop_map(|witness| PropertyStatus::Falsified { witness }),
        Just(PropertyStatus::NotChecked),
    ]
}

proptest! {
    #[test]
    fn write_then_parse_round_trips(statuses in prop::collection::vec(arb_status(), 0..4), counts in prop::collection::vec(0usize..9, 4)) {
        let mut file = ProofCacheFile::default();
        for (i, status) in statuses.into_iter().enumerate() {
            file.properties.insert(format!("p{i}"), PropertyRecord {
                status,
                networks: vec![],
                query_count: counts[i],
                verifier: "v".into(),
                timestamp: timestamp_now(),
            });
        }
        prop_assert_eq!(parse_proof_file(&file.to_string()).unwrap(), file);
    }
}

#[test]
fn tamper_evidence() {
    let dir = tempfile::tempdir().unwrap();
    let file = sample(dir.path(), PropertyStatus::Verified { witness: None });
    let net = dir.path().join("f.vnet");
    let original = std::fs::read(&net).unwrap();
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for _ in 0..100 {
        let (pos, delta) = (0..original.len(), 1u8..=255).new_tree(&mut runner).unwrap().current();
        let mut bytes = original.clone();
        bytes[pos] = bytes[pos].wrapping_add(delta);
        std::fs::write(&net, &bytes).unwrap();
        assert!(matches!(file.check_property("safe"), Err(CacheError::StaleCache { .. })));
    }
}
