//! End-to-end tests of the command-line binary: flags, formats, exit codes.

use std::process::{Command, Output};

fn mtmorph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtmorph"))
        .args(args)
        .env_remove("MTMORPH_GRAMMAR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn generates_a_surface_with_its_rules() {
    let out = mtmorph(&[
        "generate",
        "--pattern",
        "form1",
        "--root",
        "ktb",
        "--vocalism",
        "ui",
        "--format",
        "tsv",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "kutib\tr8,r9,r8,r9,r8,r11\n");
}

#[test]
fn trace_prints_rule_steps() {
    let out = mtmorph(&[
        "generate", "--pattern", "q3", "--root", "dħrj", "--vocalism", "ui", "--affix", "a",
        "--trace",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("dħunrija"), "surface missing:\n{text}");
    assert!(text.contains("r9\t(v2,0,i)\ti"), "melody step missing:\n{text}");
    assert!(text.contains("r11\t(+,+,+)\t0"), "boundary step missing:\n{text}");
}

#[test]
fn analyze_emits_json_lines() {
    let out = mtmorph(&["analyze", "--grammar", "english", "moved", "--format", "json-lines"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let analyses: Vec<serde_json::Value> =
        stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(analyses.iter().all(|a| a["surface"] == "moved"));
    let stems: Vec<&serde_json::Value> = analyses.iter().map(|a| &a["morphemes"]["lex"]).collect();
    assert!(stems.contains(&&serde_json::json!(["move", "ed"])), "{analyses:?}");
    assert!(stems.contains(&&serde_json::json!(["mov", "ed"])), "{analyses:?}");
}

#[test]
fn verify_reports_table_coverage() {
    let out = mtmorph(&["verify", "--grammar", "arabic"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "checked 34 combinations, skipped 6 gaps\n");

    let out = mtmorph(&["verify", "--grammar", "ngbaka", "--engine", "interpreter"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("checked 4 combinations"));
}

#[test]
fn dump_matches_the_machine_golden() {
    let out = mtmorph(&["dump", "r15"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), include_str!("../fixtures/r15_machine.txt"));
}

#[test]
fn equiv_compares_backends() {
    let out = mtmorph(&["equiv", "--grammar", "english", "--samples", "30", "--seed", "9"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("agree"), "{}", stdout(&out));
}

#[test]
fn ascii_flag_transliterates() {
    let out = mtmorph(&["generate", "--grammar", "ngbaka", "-m", "stem=kpolo", "-m", "tone=L", "--ascii"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "kpo^Llo^L\n");
}

#[test]
fn grammar_env_var_is_honoured() {
    let out = Command::new(env!("CARGO_BIN_EXE_mtmorph"))
        .args(["compile"])
        .env("MTMORPH_GRAMMAR", "ngbaka")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("machines: 4"), "{}", stdout(&out));
}

#[test]
fn unknown_names_exit_one() {
    let out = mtmorph(&["generate", "-m", "root=zzz"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr(&out), "mtmorph: no morpheme `zzz` on tape `root`\n");

    let out = mtmorph(&["dump", "r99"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("r99"), "{}", stderr(&out));
}

#[test]
fn bad_inputs_exit_two() {
    let out = mtmorph(&["compile", "--grammar", "/nonexistent/g.mtl"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = std::env::temp_dir();
    let path = dir.join(format!("mtmorph-cli-test-{}.mtl", std::process::id()));
    std::fs::write(&path, "tapes: t1*\nrule r1: bogus\n").unwrap();
    let lex = dir.join(format!("mtmorph-cli-test-{}.lex", std::process::id()));
    std::fs::write(&lex, "stem x : a\n").unwrap();
    let out = mtmorph(&[
        "compile",
        "--grammar",
        path.to_str().unwrap(),
        "--lexicon",
        lex.to_str().unwrap(),
    ]);
    std::fs::remove_file(&path).ok();
    std::fs::remove_file(&lex).ok();
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn empty_results_exit_zero() {
    let out = mtmorph(&["analyze", "--grammar", "ngbaka", "kpolo"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "");
}
