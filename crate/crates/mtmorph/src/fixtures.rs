//! Built-in grammars, lexicons, and golden data, embedded so the library and
//! CLI work without any files on disk.

/// A named built-in grammar/lexicon pair, with its golden table if one ships.
#[derive(Clone, Copy, Debug)]
pub struct Builtin {
    pub name: &'static str,
    pub grammar: &'static str,
    pub lexicon: &'static str,
    pub golden: Option<&'static str>,
}

pub const ARABIC_GRAMMAR: &str = include_str!("../fixtures/arabic.mtl");
pub const ARABIC_LEXICON: &str = include_str!("../fixtures/arabic.lex");
pub const ARABIC_FORMS: &str = include_str!("../fixtures/arabic_forms.tsv");

pub const ENGLISH_GRAMMAR: &str = include_str!("../fixtures/english.mtl");
pub const ENGLISH_LEXICON: &str = include_str!("../fixtures/english.lex");

pub const NGBAKA_GRAMMAR: &str = include_str!("../fixtures/ngbaka.mtl");
pub const NGBAKA_LEXICON: &str = include_str!("../fixtures/ngbaka.lex");
pub const NGBAKA_TONES: &str = include_str!("../fixtures/ngbaka_tones.tsv");

pub const BUILTINS: [Builtin; 3] = [
    Builtin {
        name: "arabic",
        grammar: ARABIC_GRAMMAR,
        lexicon: ARABIC_LEXICON,
        golden: Some(ARABIC_FORMS),
    },
    Builtin {
        name: "english",
        grammar: ENGLISH_GRAMMAR,
        lexicon: ENGLISH_LEXICON,
        golden: None,
    },
    Builtin {
        name: "ngbaka",
        grammar: NGBAKA_GRAMMAR,
        lexicon: NGBAKA_LEXICON,
        golden: Some(NGBAKA_TONES),
    },
];

pub fn builtin(name: &str) -> Option<Builtin> {
    BUILTINS.into_iter().find(|b| b.name == name)
}
