//! High-level toolkit: a compiled grammar, its lexicon, and the machine
//! system together, driving generation, analysis, golden-table verification,
//! backend equivalence checks, and seeded corpus sampling.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::afst::{self, Machines};
use crate::error::{Error, Result};
use crate::grammar::{parse_grammar, validate_grammar, Grammar, Severity};
use crate::interpreter::{self, filter_mode, run_readers, Derivation};
use crate::lexicon::{load_lexicon, Lexicon};
use crate::model::Symbol;

pub use crate::interpreter::Mode;

/// Which backend executes a request. Both produce identical results; the
/// interpreter matches rule contexts directly, the machines run compiled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineKind {
    Interpreter,
    Afst,
}

/// A loaded grammar plus lexicon, with the machine system compiled eagerly.
pub struct Toolkit {
    pub grammar: Grammar,
    pub lexicon: Lexicon,
    pub machines: Machines,
}

/// One generated surface form.
#[derive(Clone, Debug)]
pub struct Generated {
    /// Display rendering (composed glyphs folded).
    pub surface: String,
    pub symbols: Vec<Symbol>,
    pub derivation: Derivation,
}

/// One recognition result: morpheme ids per tape, in consumption order.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub morphemes: Vec<Vec<String>>,
    pub derivation: Derivation,
}

impl Analysis {
    pub fn morpheme_count(&self) -> usize {
        self.morphemes.iter().map(Vec::len).sum()
    }
}

/// A row of a golden table: expected surface for a morpheme combination.
/// A surface of `—` marks a combination attested as impossible.
#[derive(Clone, Debug)]
pub struct GoldenRow {
    pub form: String,
    pub voice: String,
    pub surface: String,
    pub morphemes: Vec<(String, Vec<String>)>,
}

impl GoldenRow {
    pub fn is_gap(&self) -> bool {
        self.surface == "—"
    }
}

/// Outcome of verifying a golden table.
#[derive(Clone, Debug, Default)]
pub struct GoldenReport {
    pub checked: usize,
    pub skipped: usize,
    pub failures: Vec<String>,
}

impl GoldenReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Parses a golden TSV: `form TAB voice TAB surface TAB morphemes`, where
/// morphemes reads `tape=id,id tape=id ...`; `#` lines and blanks skipped.
pub fn parse_golden_rows(tsv: &str) -> Result<Vec<GoldenRow>> {
    let mut rows = Vec::new();
    for (lno, line) in tsv.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::Lexicon(format!(
                "golden row {}: expected 4 tab-separated fields, found {}",
                lno + 1,
                fields.len()
            )));
        }
        let mut morphemes = Vec::new();
        for part in fields[3].split_whitespace() {
            let Some((tape, ids)) = part.split_once('=') else {
                return Err(Error::Lexicon(format!(
                    "golden row {}: malformed morpheme spec `{part}`",
                    lno + 1
                )));
            };
            morphemes.push((
                tape.to_string(),
                ids.split(',').map(str::to_string).collect(),
            ));
        }
        rows.push(GoldenRow {
            form: fields[0].to_string(),
            voice: fields[1].to_string(),
            surface: fields[2].to_string(),
            morphemes,
        });
    }
    Ok(rows)
}

/// Ordering rank for morphemes sharing the primary lexical tape: prefixes
/// first, then stems and patterns, then suffixes.
fn category_rank(category: &str) -> u8 {
    match category {
        "prefix" => 0,
        "suffix" => 2,
        _ => 1,
    }
}

impl Toolkit {
    /// Parses and validates the grammar, loads the lexicon, and compiles the
    /// machine system. Validation errors abort; warnings are tolerated (use
    /// [`validate_grammar`] directly to inspect them).
    pub fn load(grammar_src: &str, lexicon_src: &str) -> Result<Toolkit> {
        let grammar = parse_grammar(grammar_src)?;
        let errors: Vec<String> = validate_grammar(&grammar)
            .into_iter()
            .filter(|d| d.severity == Severity::Error)
            .map(|d| d.message)
            .collect();
        if !errors.is_empty() {
            return Err(Error::Grammar(errors.join("; ")));
        }
        let lexicon = load_lexicon(lexicon_src, &grammar)?;
        let machines = afst::compile(&grammar)?;
        Ok(Toolkit { grammar, lexicon, machines })
    }

    /// Resolves morpheme specs (tape name, ids) into concrete tape contents.
    /// Ids on the primary lexical tape are ordered by category (prefix,
    /// stem/pattern, suffix), stably. Homographs multiply the assignments.
    fn tape_assignments(&self, specs: &[(String, Vec<String>)]) -> Result<Vec<Vec<Vec<Symbol>>>> {
        let arity = self.grammar.arity();
        let mut ids_per_tape: Vec<Vec<String>> = vec![Vec::new(); arity];
        for (tape, ids) in specs {
            let idx = self
                .grammar
                .tapes
                .index_of(tape)
                .ok_or_else(|| Error::UnknownMorpheme(format!("no tape named `{tape}`")))?;
            ids_per_tape[idx].extend(ids.iter().cloned());
        }

        // Each id resolves to one or more entries (homographs).
        let mut options_per_tape: Vec<Vec<Vec<usize>>> = Vec::with_capacity(arity);
        for (t, ids) in ids_per_tape.iter().enumerate() {
            let mut options: Vec<Vec<usize>> = Vec::with_capacity(ids.len());
            for id in ids {
                let found = self.lexicon.resolve(t, id);
                if found.is_empty() {
                    return Err(Error::UnknownMorpheme(format!(
                        "no morpheme `{id}` on tape `{}`",
                        self.grammar.tapes.names[t]
                    )));
                }
                options.push(found);
            }
            if t == self.grammar.tapes.plt {
                options.sort_by_key(|choices| {
                    category_rank(&self.lexicon.entry(choices[0]).category)
                });
            }
            options_per_tape.push(options);
        }

        // Cartesian product over homograph choices, one assignment each.
        let mut assignments: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
        for options in &options_per_tape {
            let mut per_tape: Vec<Vec<usize>> = vec![Vec::new()];
            for choices in options {
                let mut next = Vec::new();
                for seq in &per_tape {
                    for &c in choices {
                        let mut seq = seq.clone();
                        seq.push(c);
                        next.push(seq);
                    }
                }
                per_tape = next;
            }
            let mut next = Vec::new();
            for a in &assignments {
                for seq in &per_tape {
                    let mut a = a.clone();
                    a.push(seq.clone());
                    next.push(a);
                }
            }
            assignments = next;
        }

        Ok(assignments
            .into_iter()
            .map(|a| {
                a.into_iter()
                    .map(|seq| {
                        seq.into_iter()
                            .flat_map(|e| self.lexicon.entry(e).symbols.iter().cloned())
                            .collect()
                    })
                    .collect()
            })
            .collect())
    }

    /// Raw synthesis over explicit tape contents, on either backend.
    pub fn synthesize_raw(&self, engine: EngineKind, tapes: &[Vec<Symbol>]) -> Vec<Derivation> {
        match engine {
            EngineKind::Interpreter => interpreter::synthesize(&self.grammar, tapes),
            EngineKind::Afst => afst::synthesize(&self.grammar, &self.machines, tapes),
        }
    }

    /// Raw correspondence check over explicit tape contents and surface.
    pub fn check_raw(
        &self,
        engine: EngineKind,
        tapes: &[Vec<Symbol>],
        surface: &[Symbol],
    ) -> Vec<Derivation> {
        match engine {
            EngineKind::Interpreter => interpreter::check(&self.grammar, tapes, surface),
            EngineKind::Afst => afst::check(&self.grammar, &self.machines, tapes, surface),
        }
    }

    /// Generates surface forms for a morpheme combination.
    pub fn generate(
        &self,
        engine: EngineKind,
        mode: Mode,
        specs: &[(String, Vec<String>)],
    ) -> Result<Vec<Generated>> {
        let mut out: Vec<Generated> = Vec::new();
        for tapes in self.tape_assignments(specs)? {
            let derivs = self.synthesize_raw(engine, &tapes);
            for d in filter_mode(&self.grammar, mode, derivs) {
                let symbols = d.surface();
                out.push(Generated {
                    surface: self.grammar.render_surface(&symbols),
                    symbols,
                    derivation: d,
                });
            }
        }
        out.sort_by(|a, b| a.surface.cmp(&b.surface).then_with(|| a.derivation.cmp(&b.derivation)));
        out.dedup_by(|a, b| a.surface == b.surface && a.derivation == b.derivation);
        Ok(out)
    }

    /// Analyzes display text into morpheme combinations. Text containing a
    /// character outside the surface conventions yields no analyses.
    pub fn analyze(&self, engine: EngineKind, mode: Mode, text: &str) -> Result<Vec<Analysis>> {
        let Some(symbols) = self.grammar.parse_surface(text) else {
            return Ok(Vec::new());
        };
        let arity = self.grammar.arity();
        let readers: Vec<_> = (0..arity).map(|t| self.lexicon.cursor(t)).collect();
        let outputs = match engine {
            EngineKind::Interpreter => run_readers(&self.grammar, readers, Some(&symbols)),
            EngineKind::Afst => afst::run_machines(&self.machines, arity, readers, Some(&symbols)),
        };

        let survivors = filter_mode(
            &self.grammar,
            mode,
            outputs.iter().map(|o| o.derivation.clone()).collect(),
        );
        let mut out: Vec<Analysis> = Vec::new();
        for o in outputs {
            if !survivors.contains(&o.derivation) {
                continue;
            }
            let morphemes = o
                .entries()
                .into_iter()
                .map(|es| es.into_iter().map(|e| self.lexicon.entry(e).id.clone()).collect())
                .collect();
            out.push(Analysis { morphemes, derivation: o.derivation });
        }
        out.sort_by(|a, b| {
            a.morpheme_count()
                .cmp(&b.morpheme_count())
                .then_with(|| a.morphemes.cmp(&b.morphemes))
                .then_with(|| a.derivation.cmp(&b.derivation))
        });
        out.dedup_by(|a, b| a.morphemes == b.morphemes && a.derivation == b.derivation);
        Ok(out)
    }

    /// Morpheme specs of a golden row as per-tape id lists.
    fn expected_morphemes(&self, row: &GoldenRow) -> Result<Vec<Vec<String>>> {
        let mut per_tape: Vec<Vec<String>> = vec![Vec::new(); self.grammar.arity()];
        for (tape, ids) in &row.morphemes {
            let idx = self
                .grammar
                .tapes
                .index_of(tape)
                .ok_or_else(|| Error::UnknownMorpheme(format!("no tape named `{tape}`")))?;
            per_tape[idx].extend(ids.iter().cloned());
        }
        Ok(per_tape)
    }

    /// Verifies golden rows: generation must produce exactly the expected
    /// surface, and analyzing that surface must recover the morphemes.
    /// Gap rows (surface `—`) are counted as skipped.
    pub fn verify_golden(&self, engine: EngineKind, rows: &[GoldenRow]) -> GoldenReport {
        let mut report = GoldenReport::default();
        for row in rows {
            if row.is_gap() {
                report.skipped += 1;
                continue;
            }
            report.checked += 1;
            let label = format!("form {} {}", row.form, row.voice);
            match self.generate(engine, Mode::Full, &row.morphemes) {
                Err(e) => report.failures.push(format!("{label}: generation failed: {e}")),
                Ok(generated) => {
                    let mut surfaces: Vec<&str> =
                        generated.iter().map(|g| g.surface.as_str()).collect();
                    surfaces.dedup();
                    if surfaces != [row.surface.as_str()] {
                        report.failures.push(format!(
                            "{label}: expected exactly [{}], generated [{}]",
                            row.surface,
                            surfaces.join(", ")
                        ));
                        continue;
                    }
                }
            }
            let expected = match self.expected_morphemes(row) {
                Ok(e) => e,
                Err(e) => {
                    report.failures.push(format!("{label}: {e}"));
                    continue;
                }
            };
            match self.analyze(engine, Mode::Full, &row.surface) {
                Err(e) => report.failures.push(format!("{label}: analysis failed: {e}")),
                Ok(analyses) => {
                    if !analyses.iter().any(|a| a.morphemes == expected) {
                        report.failures.push(format!(
                            "{label}: analyzing `{}` does not recover {:?}",
                            row.surface, row.morphemes
                        ));
                    }
                }
            }
        }
        report
    }

    /// Compares the two backends on explicit tape contents: the unfiltered
    /// derivation sets must be identical.
    pub fn agree_on_tapes(&self, tapes: &[Vec<Symbol>]) -> std::result::Result<(), String> {
        let mut a = self.synthesize_raw(EngineKind::Interpreter, tapes);
        let mut b = self.synthesize_raw(EngineKind::Afst, tapes);
        a.sort();
        b.sort();
        let ka: Vec<String> = a.iter().map(|d| d.trace(&self.grammar)).collect();
        let kb: Vec<String> = b.iter().map(|d| d.trace(&self.grammar)).collect();
        if ka == kb {
            Ok(())
        } else {
            Err(format!(
                "backends disagree on {:?}:\ninterpreter:\n{}\nmachines:\n{}",
                tapes,
                ka.join("\n--\n"),
                kb.join("\n--\n")
            ))
        }
    }

    /// Compares the two backends on a surface string: analyses (morphemes
    /// and derivations) must be identical.
    pub fn agree_on_surface(&self, text: &str) -> std::result::Result<(), String> {
        let a = self.analyze(EngineKind::Interpreter, Mode::All, text).map_err(|e| e.to_string())?;
        let b = self.analyze(EngineKind::Afst, Mode::All, text).map_err(|e| e.to_string())?;
        let ka: Vec<(Vec<Vec<String>>, String)> =
            a.iter().map(|x| (x.morphemes.clone(), x.derivation.trace(&self.grammar))).collect();
        let kb: Vec<(Vec<Vec<String>>, String)> =
            b.iter().map(|x| (x.morphemes.clone(), x.derivation.trace(&self.grammar))).collect();
        if ka == kb {
            Ok(())
        } else {
            Err(format!("backends disagree analyzing `{text}`"))
        }
    }

    /// Deterministic sample tape assignments for equivalence testing: half
    /// fully random over the tape alphabets, half lexicon-flavored morpheme
    /// concatenations.
    pub fn sample_tapes(&self, seed: u64, count: usize) -> Vec<Vec<Vec<Symbol>>> {
        fn pick(rng: &mut ChaCha8Rng, n: usize) -> usize {
            (rng.next_u64() % n.max(1) as u64) as usize
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let arity = self.grammar.arity();
        let mut out = Vec::with_capacity(count);
        for i in 0..count {
            let mut tapes = Vec::with_capacity(arity);
            if i % 2 == 0 {
                for t in 0..arity {
                    let alpha = if self.grammar.tape_alphabets[t].is_empty() {
                        &self.grammar.surface_alphabet
                    } else {
                        &self.grammar.tape_alphabets[t]
                    };
                    let len = pick(&mut rng, 9);
                    let tape: Vec<Symbol> = (0..len)
                        .map(|_| alpha[pick(&mut rng, alpha.len())].clone())
                        .collect();
                    tapes.push(tape);
                }
            } else {
                for t in 0..arity {
                    let entries: Vec<usize> =
                        self.lexicon.entries_on(t).map(|(i, _)| i).collect();
                    if entries.is_empty() {
                        tapes.push(Vec::new());
                        continue;
                    }
                    let k = if t == self.grammar.tapes.plt { 1 + pick(&mut rng, 3) } else { 1 };
                    let mut tape = Vec::new();
                    for _ in 0..k {
                        let e = entries[pick(&mut rng, entries.len())];
                        tape.extend(self.lexicon.entry(e).symbols.iter().cloned());
                    }
                    tapes.push(tape);
                }
            }
            out.push(tapes);
        }
        out
    }
}
