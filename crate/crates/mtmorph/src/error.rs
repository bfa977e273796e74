use thiserror::Error;

/// Toolkit-wide error type.
///
/// The CLI maps variants to exit codes: unknown names (morphemes, rules)
/// exit 1, malformed grammars/lexicons and unsupported constructions exit 2.
#[derive(Debug, Error)]
pub enum Error {
    /// Tokenizer- or parser-level failure, with 1-based source position.
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    /// Structurally valid input that violates a grammar-level requirement.
    #[error("grammar: {0}")]
    Grammar(String),

    /// Malformed lexicon entry or one inconsistent with the grammar.
    #[error("lexicon: {0}")]
    Lexicon(String),

    /// A morpheme id that resolves to no entry on the requested tape, or a
    /// tape name the grammar does not declare.
    #[error("{0}")]
    UnknownMorpheme(String),

    /// A rule id that names no rule or machine.
    #[error("unknown rule `{0}`")]
    UnknownRule(String),

    /// A rule whose contexts would need more than the one storage cell a
    /// machine has.
    #[error("rule `{rule}` exceeds the one-symbol storage register: {detail}")]
    RegisterOverflow { rule: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Syntax { line, col, msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
