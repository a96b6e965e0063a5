//! File-format, cache, and exit-code behaviour of the command line tool.

use orbifold_cli::cache::DiskCache;
use orbifold_cli::lattice_file::parse_lattice;
use orbifold_core::characters::CharacterCache;
use orbifold_core::lifting::{standard_lift, Lift};
use orbifold_core::qseries::QSeries;
use orbifold_core::standard;
use orbifold_core::twisted::{build_twisted_module, DefectRep};
use orbifold_core::znum::rat_int;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_orbifold")
}

fn fixture() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/e8.lat")
}

#[test]
fn fixture_matches_bundled_model() {
    let text = std::fs::read_to_string(fixture()).unwrap();
    let file = parse_lattice(&text).unwrap();
    let model = standard::e8_model();
    assert_eq!(file.lattice.gram, model.lattice.gram);
    for (name, map) in &model.maps {
        assert_eq!(file.maps[name].matrix, map.matrix, "map {name}");
    }
}

#[test]
fn rejects_asymmetric_gram() {
    let text = "rank 2\neven true\ngram\n2 1\n0 2\n";
    assert!(parse_lattice(text).is_err());
}

#[test]
fn rejects_non_automorphism_block() {
    let text = "rank 1\neven true\ngram\n2\naut bad\n2\n";
    let err = parse_lattice(text).unwrap_err();
    assert!(format!("{err}").contains("bad"));
}

#[test]
fn line_numbered_parse_errors() {
    let text = "rank 2\ngram\n2 x\n0 2\n";
    let err = parse_lattice(text).unwrap_err();
    assert!(format!("{err}").contains("line 3"), "{err}");
}

#[test]
fn exit_codes() {
    // validation failure: unknown automorphism
    let out = Command::new(bin())
        .arg("type")
        .arg(fixture())
        .arg("nosuch")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // anomaly refusal on the orbifold command
    let out = Command::new(bin())
        .arg("orbifold")
        .arg(fixture())
        .args(["--group", "cyclic:s", "--order", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    // success path
    let out = Command::new(bin())
        .args(["snf", "--matrix", "2 4; 6 8"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "2, 4");
}

#[test]
fn cache_roundtrip_series() {
    let dir = tempfile::tempdir().unwrap();
    let cache = DiskCache::new(dir.path()).unwrap();
    // empty series
    let empty = QSeries::zero(rat_int(1));
    cache.put("empty", &empty).unwrap();
    let back = cache.get("empty").unwrap().unwrap();
    assert_eq!(back.to_text(), empty.to_text());
    // an actual character to order 3
    let lat = standard::e8();
    let id = Lift::identity(8);
    let t = orbifold_core::characters::twining_character(&lat, &id, &id, &rat_int(3)).unwrap();
    let key = CharacterCache::key(&lat, &id, &id, &rat_int(3));
    cache.put(&key, &t).unwrap();
    let back = cache.get(&key).unwrap().unwrap();
    assert_eq!(back.to_text(), t.to_text(), "byte-exact roundtrip");
    // corruption is detected
    let path_entries: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().map(|x| x == "tw").unwrap_or(false))
        .collect();
    let victim = &path_entries[0];
    let mut text = std::fs::read_to_string(victim).unwrap();
    text.push_str("tamper\n");
    std::fs::write(victim, text).unwrap();
    let keys = ["empty", &key];
    let corrupted = keys.iter().filter(|k| cache.get(k).is_err()).count();
    assert_eq!(corrupted, 1, "exactly the tampered entry must fail its checksum");
}

#[test]
fn cache_roundtrip_defect_rep() {
    let dir = tempfile::tempdir().unwrap();
    let cache = DiskCache::new(dir.path()).unwrap();
    let lat = standard::e8();
    let neg = orbifold_core::lattice::LatticeMap::new(
        orbifold_core::intmat::IMat::identity(8).neg(),
    );
    let sl = standard_lift(&lat, &neg).unwrap();
    let w = build_twisted_module(&lat, &sl.lift).unwrap();
    assert_eq!(w.defect.dim, 16);
    let text = w.defect.to_text();
    cache.put_blob("defect-e8-neg", &text).unwrap();
    let back = cache.get_blob("defect-e8-neg").unwrap().unwrap();
    assert_eq!(back, text, "byte-exact defect roundtrip");
    let parsed = DefectRep::from_text(&back).unwrap();
    assert_eq!(parsed.dim, w.defect.dim);
    assert_eq!(parsed.to_text(), text);
}

#[test]
fn json_output_parses_as_schema() {
    let out = Command::new(bin())
        .arg("twining")
        .arg(fixture())
        .args(["e", "e", "--order", "1", "--format", "json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["command"], "twining");
    assert!(v["character"]["terms"].as_array().unwrap().len() >= 2);
    for term in v["character"]["terms"].as_array().unwrap() {
        assert!(term["exponent"].is_string());
        assert!(term["coefficient"].is_string());
    }
    // deterministic: identical invocation gives identical bytes
    let out2 = Command::new(bin())
        .arg("twining")
        .arg(fixture())
        .args(["e", "e", "--order", "1", "--format", "json"])
        .output()
        .unwrap();
    assert_eq!(out.stdout, out2.stdout);
}

#[test]
fn twining_cache_flag_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let run = || {
        Command::new(bin())
            .arg("twining")
            .arg(fixture())
            .args(["neg", "e", "--order", "1", "--cache"])
            .arg(dir.path())
            .output()
            .unwrap()
    };
    let first = run();
    assert!(first.status.success());
    let second = run();
    assert!(second.status.success());
    // cached result is identical
    let a = String::from_utf8_lossy(&first.stdout);
    let b = String::from_utf8_lossy(&second.stdout);
    assert_eq!(a.trim(), b.trim());
    assert!(std::fs::read_dir(dir.path()).unwrap().count() >= 1);
}
