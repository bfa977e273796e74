//! End-to-end acceptance checks over the built-in fixtures. Each test covers
//! one externally visible guarantee and prints a `PASS` line on success; a
//! failure shows up as the usual test failure for that guarantee.

use std::time::Instant;

use mtmorph::engine::parse_golden_rows;
use mtmorph::fixtures;
use mtmorph::{EngineKind, Mode, Symbol, Toolkit};

const BOTH: [EngineKind; 2] = [EngineKind::Interpreter, EngineKind::Afst];

fn pass(what: &str) {
    println!("acceptance PASS: {what}");
}

fn arabic() -> Toolkit {
    Toolkit::load(fixtures::ARABIC_GRAMMAR, fixtures::ARABIC_LEXICON).unwrap()
}

fn english() -> Toolkit {
    Toolkit::load(fixtures::ENGLISH_GRAMMAR, fixtures::ENGLISH_LEXICON).unwrap()
}

fn ngbaka() -> Toolkit {
    Toolkit::load(fixtures::NGBAKA_GRAMMAR, fixtures::NGBAKA_LEXICON).unwrap()
}

fn syms(spaced: &str) -> Vec<Symbol> {
    spaced.split_whitespace().map(Symbol::new).collect()
}

/// Strips comment lines from a golden trace file and normalises the tail.
fn golden_trace(raw: &str) -> String {
    raw.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

fn distinct_surfaces(gens: &[mtmorph::Generated]) -> Vec<String> {
    let mut out: Vec<String> = gens.iter().map(|g| g.surface.clone()).collect();
    out.sort();
    out.dedup();
    out
}

/// Every attested cell of the verbal-stem table generates exactly its surface
/// in fully vocalised mode, within a firm time budget.
#[test]
fn verbal_stem_table_generates_byte_exact() {
    let tk = arabic();
    let rows = parse_golden_rows(fixtures::ARABIC_FORMS).unwrap();
    let start = Instant::now();
    let mut checked = 0;
    for row in rows.iter().filter(|r| !r.is_gap()) {
        let gens = tk.generate(EngineKind::Afst, Mode::Full, &row.morphemes).unwrap();
        let got = distinct_surfaces(&gens);
        assert_eq!(
            got,
            vec![row.surface.clone()],
            "form {} {} generated {:?}, want exactly [{}]",
            row.form,
            row.voice,
            got,
            row.surface
        );
        checked += 1;
    }
    let elapsed = start.elapsed();
    assert_eq!(checked, 34, "expected 34 attested table cells");
    assert!(elapsed.as_secs_f64() < 5.0, "table generation took {elapsed:?}, budget is 5s");
    pass(&format!("34 verbal-stem surfaces byte-exact in {elapsed:?}"));
}

/// The two boundary-handling derivations of the quadriliteral passive (with
/// and without deletions) replay the golden rule-by-rule traces.
#[test]
fn quadriliteral_traces_match_goldens() {
    let tk = arabic();
    let tapes = vec![
        syms("c1 c2 v1 n c3 v2 c4 + a +"),
        syms("d ħ r j +"),
        syms("u i +"),
    ];
    for (name, raw, surface) in [
        ("dħunrija", include_str!("../fixtures/dhunrija.trace"), "dħunrija"),
        ("dħunrj", include_str!("../fixtures/dhunrj.trace"), "dħunrj"),
    ] {
        let want = golden_trace(raw);
        for engine in BOTH {
            let derivs = tk.synthesize_raw(engine, &tapes);
            let found = derivs.iter().any(|d| {
                tk.grammar.render_surface(&d.surface()) == surface
                    && d.trace(&tk.grammar).trim_end() == want
            });
            assert!(found, "{name}: no {engine:?} derivation replays the golden trace");
        }
        pass(&format!("{name} trace replayed by both engines"));
    }
}

/// The doubly spread causative-passive stem replays its golden trace,
/// exercising both vowel spreading and consonant gemination.
#[test]
fn spreading_trace_matches_golden() {
    let tk = arabic();
    let tapes = vec![syms("t v1 c1 v1 c2 c2 v2 c3"), syms("k t b"), syms("u i")];
    let want = golden_trace(include_str!("../fixtures/tukuttib.trace"));
    for engine in BOTH {
        let derivs = tk.synthesize_raw(engine, &tapes);
        let found = derivs.iter().any(|d| {
            tk.grammar.render_surface(&d.surface()) == "tukuttib"
                && d.trace(&tk.grammar).trim_end() == want
        });
        assert!(found, "no {engine:?} derivation of tukuttib replays the golden trace");
    }
    pass("tukuttib spreading trace replayed by both engines");
}

/// The compiled spreading machine has the expected shape, and unvocalised or
/// partly vocalised text recognises correctly: long vowels survive deletion.
#[test]
fn machine_dump_and_unvocalised_analysis() {
    let tk = arabic();
    let m = tk.machines.machine_for(&tk.grammar, "r15").expect("machine for r15");
    assert_eq!(
        m.dump(),
        include_str!("../fixtures/r15_machine.txt"),
        "r15 machine dump drifted from the golden"
    );

    let voc = tk.grammar.tapes.index_of("vocalism").unwrap();
    let has = |analyses: &[mtmorph::Analysis], pat: &str, root: &str, v: &str| {
        analyses.iter().any(|a| {
            a.morphemes[0] == [pat] && a.morphemes[1] == [root] && a.morphemes[2] == [v]
        })
    };

    let ktb = tk.analyze(EngineKind::Afst, Mode::All, "ktb").unwrap();
    assert!(ktb.len() >= 2, "ktb should be ambiguous, got {} analyses", ktb.len());
    assert!(has(&ktb, "form1", "ktb", "a"), "ktb lacks the active ground-form analysis");
    assert!(has(&ktb, "form1", "ktb", "ui"), "ktb lacks the passive ground-form analysis");

    let kutb = tk.analyze(EngineKind::Afst, Mode::All, "kutb").unwrap();
    assert!(!kutb.is_empty(), "kutb should analyse");
    assert!(
        kutb.iter().all(|a| a.morphemes[voc] == ["ui"]),
        "kutb admits a non-passive vocalism"
    );
    assert!(has(&kutb, "form1", "ktb", "ui"), "kutb lacks the passive ground-form analysis");

    let kaatb = tk.analyze(EngineKind::Afst, Mode::All, "kaatb").unwrap();
    assert!(has(&kaatb, "form3", "ktb", "a"), "kaatb lacks the form3 analysis");

    // Long vowels written with a consonant slot are never elided: maximal
    // deletion of form3 keeps the aa sequence.
    let bare = tk
        .generate(
            EngineKind::Afst,
            Mode::Bare,
            &[
                ("pattern".into(), vec!["form3".into()]),
                ("root".into(), vec!["ktb".into()]),
                ("vocalism".into(), vec!["a".into()]),
            ],
        )
        .unwrap();
    assert_eq!(distinct_surfaces(&bare), vec!["kaatb"], "form3 bare mode must keep aa");
    pass("r15 dump golden, ktb/kutb/kaatb analyses, aa preserved under deletion");
}

/// Adjacent gemination can be licensed by either the plain or the long-range
/// rule, but only the long-range rule reaches across an intervening slot.
#[test]
fn gemination_variants_cover_expected_forms() {
    let drop_rule = |id: &str| {
        fixtures::ARABIC_GRAMMAR
            .lines()
            .filter(|l| !l.trim_start().starts_with(&format!("rule {id}:")))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let form12 = [
        ("pattern".to_string(), vec!["form12".to_string()]),
        ("root".to_string(), vec!["ktb".to_string()]),
        ("vocalism".to_string(), vec!["a".to_string()]),
    ];
    let form2 = [
        ("pattern".to_string(), vec!["form2".to_string()]),
        ("root".to_string(), vec!["ktb".to_string()]),
        ("vocalism".to_string(), vec!["a".to_string()]),
    ];

    // Long-range rule alone still reproduces the whole table.
    let long_only = Toolkit::load(&drop_rule("r14"), fixtures::ARABIC_LEXICON).unwrap();
    let rows = parse_golden_rows(fixtures::ARABIC_FORMS).unwrap();
    let report = long_only.verify_golden(EngineKind::Afst, &rows);
    assert!(report.ok(), "long-range-only grammar fails the table: {:?}", report.failures);
    let gens = long_only.generate(EngineKind::Afst, Mode::Full, &form12).unwrap();
    let spread = gens
        .iter()
        .find(|g| g.surface == "ktawtab")
        .expect("long-range-only grammar should generate ktawtab");
    assert!(
        spread.derivation.rule_ids(&long_only.grammar).contains(&"r16"),
        "ktawtab should use the long-range gemination rule"
    );

    // Adjacent-only rule cannot reach across the w slot of form12, but still
    // handles plain doubling.
    let adjacent_only = Toolkit::load(&drop_rule("r16"), fixtures::ARABIC_LEXICON).unwrap();
    let gens = adjacent_only.generate(EngineKind::Afst, Mode::Full, &form12).unwrap();
    assert!(
        gens.is_empty(),
        "adjacent-only grammar should not generate form12, got {:?}",
        distinct_surfaces(&gens)
    );
    let gens = adjacent_only.generate(EngineKind::Afst, Mode::Full, &form2).unwrap();
    assert_eq!(distinct_surfaces(&gens), vec!["kattab"], "adjacent-only grammar breaks form2");
    pass("gemination rule variants behave as designed (reach vs no reach)");
}

/// Tone docking and spreading produce exactly one surface per melody, and
/// bare or misplaced tones are rejected in both directions.
#[test]
fn tone_docking_and_spreading_singletons() {
    let tk = ngbaka();
    let rows = parse_golden_rows(fixtures::NGBAKA_TONES).unwrap();
    let mut seen = Vec::new();
    for row in &rows {
        let gens = tk.generate(EngineKind::Afst, Mode::Full, &row.morphemes).unwrap();
        let got = distinct_surfaces(&gens);
        assert_eq!(got, vec![row.surface.clone()], "melody {} is not a singleton", row.form);
        seen.push(got[0].clone());
    }
    seen.sort();
    seen.dedup();
    assert_eq!(seen.len(), 4, "the four melodies must yield four distinct surfaces");
    assert!(seen.contains(&"kpòlò".to_string()), "low melody must render kpòlò");

    // A vowel may not stay toneless, and a tone may not dock after a spread
    // vowel: both directions reject the malformed surfaces.
    let tapes = vec![syms("k p o l o"), syms("L")];
    for text in ["kpòlo", "kpolò"] {
        let surface = tk.grammar.parse_surface(text).unwrap();
        for engine in BOTH {
            assert!(
                tk.check_raw(engine, &tapes, &surface).is_empty(),
                "{engine:?} accepted malformed {text}"
            );
        }
    }
    for engine in BOTH {
        assert!(
            tk.analyze(engine, Mode::All, "kpolo").unwrap().is_empty(),
            "{engine:?} analysed toneless kpolo"
        );
    }

    // With a two-tone melody over two vowels, docking wins over spreading and
    // the result is still a singleton.
    let tapes = vec![syms("p o o"), syms("L H")];
    for engine in BOTH {
        let derivs = tk.synthesize_raw(engine, &tapes);
        let mut got: Vec<String> =
            derivs.iter().map(|d| tk.grammar.render_surface(&d.surface())).collect();
        got.sort();
        got.dedup();
        assert_eq!(got, vec!["pòó"], "{engine:?} disagrees on the two-tone melody");
    }
    pass("four tone melodies are singletons; bare and misplaced tones rejected");
}

/// The rule interpreter and the compiled machines accept exactly the same
/// derivations over the fixture corpus and a large randomised sample.
#[test]
fn engines_agree_on_corpus_and_samples() {
    let mut surfaces = 0;
    let mut samples = 0;

    let tk = arabic();
    for row in parse_golden_rows(fixtures::ARABIC_FORMS).unwrap() {
        if row.is_gap() {
            continue;
        }
        tk.agree_on_surface(&row.surface).unwrap_or_else(|e| panic!("{}: {e}", row.surface));
        surfaces += 1;
    }
    for tapes in tk.sample_tapes(0xA11CE, 400) {
        tk.agree_on_tapes(&tapes).unwrap_or_else(|e| panic!("arabic sample: {e}"));
        samples += 1;
    }

    let tk = ngbaka();
    for row in parse_golden_rows(fixtures::NGBAKA_TONES).unwrap() {
        tk.agree_on_surface(&row.surface).unwrap_or_else(|e| panic!("{}: {e}", row.surface));
        surfaces += 1;
    }
    for tapes in tk.sample_tapes(0xB0BA, 400) {
        tk.agree_on_tapes(&tapes).unwrap_or_else(|e| panic!("ngbaka sample: {e}"));
        samples += 1;
    }

    let tk = english();
    for text in ["moved", "movs", "mov", "move"] {
        tk.agree_on_surface(text).unwrap_or_else(|e| panic!("{text}: {e}"));
        surfaces += 1;
    }
    for tapes in tk.sample_tapes(0xCAFE, 300) {
        tk.agree_on_tapes(&tapes).unwrap_or_else(|e| panic!("english sample: {e}"));
        samples += 1;
    }

    assert!(samples >= 1000, "need at least 1000 randomised samples, ran {samples}");
    pass(&format!("engines agree on {surfaces} corpus surfaces and {samples} samples"));
}

/// Everything the grammars generate analyses back to the morphemes it came
/// from, across every fixture morpheme combination.
#[test]
fn generated_surfaces_analyze_back_to_their_morphemes() {
    let mut combos = 0;
    let mut surfaces = 0;
    type Specs = Vec<Vec<(String, Vec<String>)>>;
    let row_specs = |tsv| -> Specs {
        parse_golden_rows(tsv).unwrap().into_iter().map(|r| r.morphemes).collect()
    };
    let english_specs: Specs = ["move", "mov"]
        .iter()
        .flat_map(|stem| {
            ["ed", "s"].iter().map(move |suf| {
                vec![("lex".to_string(), vec![stem.to_string(), suf.to_string()])]
            })
        })
        .collect();

    let cases = [
        (arabic(), row_specs(fixtures::ARABIC_FORMS)),
        (ngbaka(), row_specs(fixtures::NGBAKA_TONES)),
        (english(), english_specs),
    ];

    for (tk, spec_sets) in &cases {
        for specs in spec_sets {
            let mut expected: Vec<Vec<String>> = vec![Vec::new(); tk.grammar.arity()];
            for (tape, ids) in specs {
                let idx = tk.grammar.tapes.index_of(tape).unwrap();
                expected[idx].extend(ids.iter().cloned());
            }
            combos += 1;
            for gen in tk.generate(EngineKind::Afst, Mode::All, specs).unwrap() {
                let analyses = tk.analyze(EngineKind::Afst, Mode::All, &gen.surface).unwrap();
                assert!(
                    analyses.iter().any(|a| a.morphemes == expected),
                    "{} does not analyse back to {specs:?}",
                    gen.surface
                );
                surfaces += 1;
            }
        }
    }
    pass(&format!("{surfaces} generated surfaces from {combos} combinations round-trip"));
}

/// Vowel elision before a vowel-initial suffix works in both directions, the
/// clipped stem stays recognisable, and the raw derivation is unique.
#[test]
fn vowel_elision_round_trips_in_english() {
    let tk = english();
    let specs = [("lex".to_string(), vec!["move".to_string(), "ed".to_string()])];
    for engine in BOTH {
        let gens = tk.generate(engine, Mode::Full, &specs).unwrap();
        assert_eq!(distinct_surfaces(&gens), vec!["moved"], "{engine:?} mis-generates move+ed");

        let analyses = tk.analyze(engine, Mode::All, "moved").unwrap();
        let stems: Vec<&Vec<String>> = analyses.iter().map(|a| &a.morphemes[0]).collect();
        assert!(stems.iter().any(|m| *m == &["move", "ed"]), "{engine:?} misses move+ed");
        assert!(stems.iter().any(|m| *m == &["mov", "ed"]), "{engine:?} misses mov+ed");
    }

    let tapes = vec![syms("m o v e + e d")];
    let derivs = tk.check_raw(EngineKind::Interpreter, &tapes, &syms("m o v e d"));
    assert_eq!(derivs.len(), 1, "move+ed over moved must have exactly one derivation");
    assert_eq!(
        derivs[0].rule_ids(&tk.grammar),
        ["r4", "r4", "r4", "r6", "r5", "r4", "r4"],
        "unexpected rule sequence for move+ed"
    );
    pass("move+ed <-> moved in both engines; clipped stem recognised; derivation unique");
}
