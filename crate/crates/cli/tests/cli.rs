//! End-to-end tests of the qdesign binary: exit codes, file formats, and
//! the fast command surface.

use std::collections::BTreeSet;
use std::io::Write;
use std::process::{Command, Output};

use qdesign_core::design::{write_design, write_large_set, LargeSet, SubspaceDesign};
use qdesign_core::field::Field;
use qdesign_core::grassmann::GrassmannianIter;
use qdesign_core::subspace::Subspace;

fn qdesign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdesign"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn binom_prints_exact_value() {
    let out = qdesign(&["binom", "--v", "6", "--k", "3", "--q", "5"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "2558556");
    // a value beyond u64
    let out = qdesign(&["binom", "--v", "14", "--k", "7", "--q", "5"]);
    assert_eq!(stdout(&out).trim(), "23362736428829868448189697999416056");
}

#[test]
fn enumerate_is_deterministic() {
    let out = qdesign(&["enumerate", "--q", "2", "--v", "3", "--k", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines, vec!["4", "5", "6", "7", "2", "3", "1"]);
    let limited = qdesign(&["enumerate", "--q", "2", "--v", "3", "--k", "1", "--limit", "2"]);
    assert_eq!(stdout(&limited).lines().count(), 2);
}

#[test]
fn decompose_prints_identity_and_verifies() {
    let out = qdesign(&[
        "decompose", "--kind", "avoid", "--v", "6", "--k", "3", "--q", "2", "--s", "1",
        "--verify",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("4 cells"));
    assert!(text.contains("identity: 1395 = 1395"));
    assert!(text.contains("partition verified: 1395"));
    // out-of-range parameter is a usage error
    let bad = qdesign(&["decompose", "--kind", "avoid", "--v", "6", "--k", "3", "--q", "2", "--s", "3"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn admissible_answers() {
    let yes = qdesign(&["admissible", "--q", "3", "--n", "2", "--t", "2", "--k", "3", "--v", "6"]);
    assert!(stdout(&yes).contains("is admissible"));
    let no = qdesign(&["admissible", "--q", "2", "--n", "2", "--t", "2", "--k", "3", "--v", "6"]);
    assert!(stdout(&no).contains("not admissible"));
}

#[test]
fn tables_reproduce_published_values() {
    let out = qdesign(&["tables", "smallest-halvings"]);
    let text = stdout(&out);
    assert!(text.contains("16940"));
    assert!(text.contains("1913728386070579497083028"));
    assert!(text.contains("11681368214414934224094848999708028"));
    let out = qdesign(&["tables", "admissibility", "--v-max", "14"]);
    let text = stdout(&out);
    assert!(text.contains("v= 6: 3"));
    assert!(text.contains("v=14: 3 - - - 7"));
}

fn full_grassmannian(field: &Field, v: usize, k: usize) -> BTreeSet<Subspace> {
    GrassmannianIter::new(field, v, k).collect()
}

#[test]
fn verify_design_file_pass_fail_and_parse_error() {
    let f2 = Field::gf(2).unwrap();
    let blocks = full_grassmannian(&f2, 4, 2);
    let d = SubspaceDesign::new(&f2, 4, 2, 1, 7u32.into(), blocks).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.txt");
    write_design(&d, std::fs::File::create(&good).unwrap()).unwrap();
    let out = qdesign(&["verify", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let json = qdesign(&["verify", good.to_str().unwrap(), "--json"]);
    assert!(stdout(&json).contains("\"status\":\"pass\""));

    // drop one block: verification failure, exit 1
    let mut d_bad = d.clone();
    let removed = d_bad.blocks.iter().next().cloned().unwrap();
    d_bad.blocks.remove(&removed);
    let bad = dir.path().join("bad.txt");
    write_design(&d_bad, std::fs::File::create(&bad).unwrap()).unwrap();
    let out = qdesign(&["verify", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    // corrupt a line: parse error with a line number, exit 2
    let mangled = dir.path().join("mangled.txt");
    let mut text = std::fs::read_to_string(&good).unwrap();
    text.push_str("zzz 1\n");
    std::fs::File::create(&mangled)
        .unwrap()
        .write_all(text.as_bytes())
        .unwrap();
    let out = qdesign(&["verify", mangled.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn transform_merge_roundtrip() {
    let f2 = Field::gf(2).unwrap();
    let ls = LargeSet::t0_by_slicing(&f2, 4, 2, 5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("ls.txt");
    write_large_set(&ls, std::fs::File::create(&input).unwrap()).unwrap();
    let output = dir.path().join("merged.txt");
    let out = qdesign(&[
        "transform",
        "--input",
        input.to_str().unwrap(),
        "--op",
        "merge",
        "--d",
        "5",
        "--output",
        output.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let verify = qdesign(&["verify", output.to_str().unwrap()]);
    assert_eq!(verify.status.code(), Some(0));
}

#[test]
fn km_orbits_on_points() {
    let out = qdesign(&["km", "orbits", "--q", "3", "--d", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("group order 546"));
    // [6,1]_3 = 364 points split under an order-546 group
    assert!(text.contains("1-subspaces"));
}

#[test]
fn km_count_requires_long_flag() {
    let out = qdesign(&["km", "count", "--q", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--long"));
}

#[test]
fn km_budget_exhaustion_exit_code() {
    let out = qdesign(&["km", "count", "--q", "3", "--budget", "10"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("budget exhausted"));
}

#[test]
fn recurse_plan_on_structural_base() {
    // plan construction needs only the partition structure of the base,
    // so an arbitrary equal split of [6,3]_3 exercises the command
    let f3 = Field::gf(3).unwrap();
    let all: Vec<Subspace> = GrassmannianIter::new(&f3, 6, 3).collect();
    let half = all.len() / 2;
    let parts = vec![
        all[..half].iter().cloned().collect(),
        all[half..].iter().cloned().collect(),
    ];
    let ls = LargeSet::new(&f3, 6, 3, 2, parts).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("base.txt");
    write_large_set(&ls, std::fs::File::create(&base).unwrap()).unwrap();
    let out = qdesign(&[
        "recurse", "--q", "3", "--k", "3", "--v", "10",
        "--base", base.to_str().unwrap(), "--mode", "plan",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("disjoint union of 4 cells"));
    assert!(text.contains("certified t=2"));
    // invalid v for the series
    let bad = qdesign(&[
        "recurse", "--q", "3", "--k", "3", "--v", "9",
        "--base", base.to_str().unwrap(), "--mode", "plan",
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    let out = qdesign(&["binom", "--v", "6"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qdesign(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
}
