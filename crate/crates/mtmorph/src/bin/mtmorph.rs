use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use mtmorph::engine::parse_golden_rows;
use mtmorph::fixtures;
use mtmorph::grammar::Severity;
use mtmorph::{validate_grammar, EngineKind, Error, Mode, Toolkit};

#[derive(Parser)]
#[command(name = "mtmorph", version, about = "Multi-tape two-level morphology toolkit")]
struct Cli {
    /// Built-in grammar name (arabic, english, ngbaka) or path to a grammar file.
    #[arg(long, global = true, env = "MTMORPH_GRAMMAR", default_value = "arabic")]
    grammar: String,

    /// Lexicon file; built-in grammars default to their built-in lexicon.
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,

    /// Execution backend.
    #[arg(long, global = true, value_enum, default_value_t = EngineArg::Afst)]
    engine: EngineArg,

    /// Vocalisation mode filter.
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Full)]
    mode: ModeArg,

    /// Output layout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Transliterate non-ASCII symbols in output (ħ -> H, ʔ -> ', ò -> o^L).
    #[arg(long, global = true)]
    ascii: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Interpreter,
    Afst,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    All,
    Bare,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Tsv,
    JsonLines,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse, validate, and compile the grammar; report its shape.
    Compile,
    /// Synthesize surface forms for a morpheme combination.
    Generate {
        /// Morpheme spec `tape=id` or `tape=id1,id2`; repeatable.
        #[arg(long = "morph", short = 'm', value_name = "TAPE=IDS")]
        morphs: Vec<String>,
        /// Shorthand for `--morph pattern=...`.
        #[arg(long)]
        pattern: Option<String>,
        /// Shorthand for `--morph root=...`.
        #[arg(long)]
        root: Option<String>,
        /// Shorthand for `--morph vocalism=...`.
        #[arg(long)]
        vocalism: Option<String>,
        /// Affix id placed on the primary lexical tape; repeatable.
        #[arg(long)]
        affix: Vec<String>,
        /// Print each derivation, one rule step per line.
        #[arg(long)]
        trace: bool,
    },
    /// Recognize a surface form against the lexicon.
    Analyze {
        surface: String,
        /// Print each derivation, one rule step per line.
        #[arg(long)]
        trace: bool,
    },
    /// Check the grammar's golden table (generation and recognition).
    Verify {
        /// Golden TSV file; built-in grammars default to their shipped table.
        #[arg(long)]
        golden: Option<PathBuf>,
    },
    /// Compare the interpreter and machine backends on golden surfaces and
    /// seeded random tape contents.
    Equiv {
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 42424242)]
        seed: u64,
    },
    /// Print the compiled machine realizing a rule.
    Dump { rule: String },
}

impl EngineArg {
    fn kind(self) -> EngineKind {
        match self {
            EngineArg::Interpreter => EngineKind::Interpreter,
            EngineArg::Afst => EngineKind::Afst,
        }
    }
}

impl ModeArg {
    fn mode(self) -> Mode {
        match self {
            ModeArg::Full => Mode::Full,
            ModeArg::All => Mode::All,
            ModeArg::Bare => Mode::Bare,
        }
    }
}

/// What a failed run should exit with: 1 for unknown names and failed
/// checks, 2 for unusable grammars or lexicons.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::UnknownMorpheme(_) | Error::UnknownRule(_) => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn check_failure(message: String) -> Failure {
    Failure { code: 1, message }
}

fn main() -> ExitCode {
    // Die silently on a closed pipe, like any other line-oriented tool.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("mtmorph: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let builtin = fixtures::builtin(&cli.grammar);
    let grammar_src = match builtin {
        Some(b) => b.grammar.to_string(),
        None => std::fs::read_to_string(&cli.grammar).map_err(|e| Failure {
            code: 2,
            message: format!("grammar `{}`: {e}", cli.grammar),
        })?,
    };
    let lexicon_src = match (&cli.lexicon, builtin) {
        (Some(path), _) => std::fs::read_to_string(path).map_err(|e| Failure {
            code: 2,
            message: format!("lexicon `{}`: {e}", path.display()),
        })?,
        (None, Some(b)) => b.lexicon.to_string(),
        (None, None) => {
            return Err(Failure {
                code: 2,
                message: "a grammar file needs an explicit --lexicon".into(),
            })
        }
    };
    let tk = Toolkit::load(&grammar_src, &lexicon_src)?;
    let engine = cli.engine.kind();
    let mode = cli.mode.mode();

    match &cli.cmd {
        Cmd::Compile => {
            let mut out = String::new();
            writeln!(out, "tapes: {}", tk.grammar.tapes.names.join(" ")).unwrap();
            writeln!(out, "rules: {}", tk.grammar.rules.len()).unwrap();
            writeln!(out, "feasible pairs: {}", tk.machines.feasible.len()).unwrap();
            writeln!(out, "machines: {}", tk.machines.list.len()).unwrap();
            for m in &tk.machines.list {
                writeln!(out, "  {}: {} states, {} storage symbols", m.name, m.states.len(), m.gamma.len())
                    .unwrap();
            }
            for d in validate_grammar(&tk.grammar) {
                if d.severity == Severity::Warning {
                    writeln!(out, "{d}").unwrap();
                }
            }
            print!("{}", self::ascii(cli, &out));
        }
        Cmd::Generate { morphs, pattern, root, vocalism, affix, trace } => {
            let specs = collect_specs(&tk, morphs, pattern, root, vocalism, affix)?;
            let results = tk.generate(engine, mode, &specs)?;
            emit_generated(cli, &tk, &results, *trace);
        }
        Cmd::Analyze { surface, trace } => {
            let results = tk.analyze(engine, mode, surface)?;
            emit_analyses(cli, &tk, surface, &results, *trace);
        }
        Cmd::Verify { golden } => {
            let table = match (golden, builtin.and_then(|b| b.golden)) {
                (Some(path), _) => std::fs::read_to_string(path).map_err(|e| Failure {
                    code: 2,
                    message: format!("golden `{}`: {e}", path.display()),
                })?,
                (None, Some(text)) => text.to_string(),
                (None, None) => {
                    return Err(Failure {
                        code: 2,
                        message: format!("grammar `{}` ships no golden table; pass --golden", cli.grammar),
                    })
                }
            };
            let rows = parse_golden_rows(&table)?;
            let report = tk.verify_golden(engine, &rows);
            println!("checked {} combinations, skipped {} gaps", report.checked, report.skipped);
            if !report.ok() {
                for f in &report.failures {
                    eprintln!("  {}", ascii(cli, f));
                }
                return Err(check_failure(format!("{} golden failures", report.failures.len())));
            }
        }
        Cmd::Equiv { samples, seed } => {
            let mut surfaces = 0usize;
            if let Some(table) = builtin.and_then(|b| b.golden) {
                for row in parse_golden_rows(table)? {
                    if row.is_gap() {
                        continue;
                    }
                    tk.agree_on_surface(&row.surface).map_err(check_failure)?;
                    surfaces += 1;
                }
            }
            for tapes in tk.sample_tapes(*seed, *samples) {
                tk.agree_on_tapes(&tapes).map_err(check_failure)?;
            }
            println!("backends agree on {surfaces} golden surfaces and {samples} sampled tape contents");
        }
        Cmd::Dump { rule } => {
            let machine = tk
                .machines
                .machine_for(&tk.grammar, rule)
                .ok_or_else(|| Error::UnknownRule(rule.clone()))?;
            print!("{}", ascii(cli, &machine.dump()));
        }
    }
    Ok(())
}

/// Merges explicit `tape=ids` specs with the shorthand flags.
fn collect_specs(
    tk: &Toolkit,
    morphs: &[String],
    pattern: &Option<String>,
    root: &Option<String>,
    vocalism: &Option<String>,
    affix: &[String],
) -> Result<Vec<(String, Vec<String>)>, Failure> {
    let mut specs: Vec<(String, Vec<String>)> = Vec::new();
    let mut push = |tape: &str, ids: &str| {
        let split = ids.split(',').filter(|s| !s.is_empty()).map(str::to_string);
        match specs.iter_mut().find(|(t, _)| t == tape) {
            Some((_, list)) => list.extend(split),
            None => specs.push((tape.to_string(), split.collect())),
        }
    };
    for m in morphs {
        let (tape, ids) = m.split_once('=').ok_or_else(|| Failure {
            code: 1,
            message: format!("morpheme spec `{m}` is not `tape=ids`"),
        })?;
        push(tape.trim(), ids.trim());
    }
    for (tape, value) in
        [("pattern", pattern), ("root", root), ("vocalism", vocalism)]
    {
        if let Some(ids) = value {
            push(tape, ids);
        }
    }
    let plt = tk.grammar.tapes.names[tk.grammar.tapes.plt].clone();
    for id in affix {
        push(&plt, id);
    }
    if specs.is_empty() {
        return Err(Failure { code: 1, message: "no morphemes given".into() });
    }
    Ok(specs)
}

fn emit_generated(cli: &Cli, tk: &Toolkit, results: &[mtmorph::Generated], trace: bool) {
    match cli.format {
        Format::Text => {
            let mut last: Option<&str> = None;
            for g in results {
                if !trace {
                    if last == Some(g.surface.as_str()) {
                        continue;
                    }
                    last = Some(g.surface.as_str());
                }
                println!("{}", ascii(cli, &g.surface));
                if trace {
                    for line in g.derivation.trace(&tk.grammar).lines() {
                        println!("  {}", ascii(cli, line));
                    }
                }
            }
        }
        Format::Tsv => {
            for g in results {
                let rules: Vec<&str> = g.derivation.rule_ids(&tk.grammar);
                println!("{}\t{}", ascii(cli, &g.surface), rules.join(","));
            }
        }
        Format::JsonLines => {
            for g in results {
                let rules: Vec<&str> = g.derivation.rule_ids(&tk.grammar);
                let mut value = json!({
                    "surface": ascii(cli, &g.surface),
                    "rules": rules,
                });
                if trace {
                    value["steps"] = json!(trace_steps(cli, tk, &g.derivation));
                }
                println!("{value}");
            }
        }
    }
}

fn emit_analyses(
    cli: &Cli,
    tk: &Toolkit,
    surface: &str,
    results: &[mtmorph::Analysis],
    trace: bool,
) {
    let names = &tk.grammar.tapes.names;
    match cli.format {
        Format::Text => {
            let mut seen: Vec<String> = Vec::new();
            for a in results {
                let spec = a
                    .morphemes
                    .iter()
                    .zip(names)
                    .filter(|(ids, _)| !ids.is_empty())
                    .map(|(ids, name)| format!("{name}={}", ids.join(",")))
                    .collect::<Vec<_>>()
                    .join(" ");
                if !trace {
                    if seen.contains(&spec) {
                        continue;
                    }
                    seen.push(spec.clone());
                }
                println!("{}\t{}", ascii(cli, surface), ascii(cli, &spec));
                if trace {
                    for line in a.derivation.trace(&tk.grammar).lines() {
                        println!("  {}", ascii(cli, line));
                    }
                }
            }
        }
        Format::Tsv => {
            for a in results {
                let cells: Vec<String> =
                    a.morphemes.iter().map(|ids| ids.join(",")).collect();
                println!("{}\t{}", ascii(cli, surface), ascii(cli, &cells.join("\t")));
            }
        }
        Format::JsonLines => {
            for a in results {
                let morphemes: serde_json::Map<String, serde_json::Value> = a
                    .morphemes
                    .iter()
                    .zip(names)
                    .map(|(ids, name)| (name.clone(), json!(ids)))
                    .collect();
                let rules: Vec<&str> = a.derivation.rule_ids(&tk.grammar);
                let mut value = json!({
                    "surface": ascii(cli, surface),
                    "morphemes": morphemes,
                    "rules": rules,
                });
                if trace {
                    value["steps"] = json!(trace_steps(cli, tk, &a.derivation));
                }
                println!("{value}");
            }
        }
    }
}

fn trace_steps(
    cli: &Cli,
    tk: &Toolkit,
    derivation: &mtmorph::interpreter::Derivation,
) -> Vec<serde_json::Value> {
    derivation
        .trace(&tk.grammar)
        .lines()
        .map(|line| {
            let mut parts = line.splitn(3, '\t');
            json!({
                "rule": parts.next().unwrap_or_default(),
                "tuple": ascii(cli, parts.next().unwrap_or_default()),
                "surface": ascii(cli, parts.next().unwrap_or_default()),
            })
        })
        .collect()
}

/// Optional transliteration of the symbols this toolkit ships that fall
/// outside ASCII.
fn ascii(cli: &Cli, text: &str) -> String {
    if !cli.ascii {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            'ħ' => out.push('H'),
            'ʔ' => out.push('\''),
            'ò' => out.push_str("o^L"),
            'ō' => out.push_str("o^M"),
            'ó' => out.push_str("o^H"),
            _ => out.push(ch),
        }
    }
    out
}
