//! Morpheme lexicon: per-tape tries of symbol sequences.
//!
//! Lexicon files are line oriented, one entry per line:
//!
//! ```text
//! category id : sym sym ... | key = value tokens , key = value tokens
//! ```
//!
//! A category naming a tape puts the entry on that tape; any other category
//! (`pattern` categories like `prefix`/`suffix`/`stem`) goes to the primary
//! lexical tape. Attributes after `|` are free-form annotations.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::grammar::Grammar;
use crate::model::Symbol;

#[derive(Clone, Debug)]
pub struct MorphemeEntry {
    pub id: String,
    pub category: String,
    /// Tape index the entry lives on.
    pub tape: usize,
    pub symbols: Vec<Symbol>,
    pub attrs: Vec<(String, String)>,
}

impl MorphemeEntry {
    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attrs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Clone, Debug, Default)]
struct TrieNode {
    children: BTreeMap<Symbol, TrieNode>,
    /// Entries whose symbol sequence ends exactly here.
    terminals: Vec<usize>,
}

impl TrieNode {
    fn insert(&mut self, symbols: &[Symbol], entry: usize) {
        match symbols.split_first() {
            None => self.terminals.push(entry),
            Some((head, rest)) => {
                self.children.entry(head.clone()).or_default().insert(rest, entry);
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Lexicon {
    pub entries: Vec<MorphemeEntry>,
    tries: Vec<TrieNode>,
}

/// Parses a lexicon against its grammar: categories are mapped to tapes and
/// every symbol must belong to the target tape's alphabet.
pub fn load_lexicon(src: &str, grammar: &Grammar) -> Result<Lexicon> {
    let mut entries: Vec<MorphemeEntry> = Vec::new();
    for (lno, raw) in src.lines().enumerate() {
        let line = lno + 1;
        let text = match raw.split('#').next() {
            Some(t) => t.trim(),
            None => "",
        };
        if text.is_empty() {
            continue;
        }
        let (body, attr_text) = match text.split_once('|') {
            Some((b, a)) => (b.trim(), Some(a.trim())),
            None => (text, None),
        };
        let (head, syms_text) = body.split_once(':').ok_or_else(|| {
            Error::Lexicon(format!("line {line}: expected `category id : symbols`"))
        })?;
        let mut head_words = head.split_whitespace();
        let category = head_words
            .next()
            .ok_or_else(|| Error::Lexicon(format!("line {line}: missing category")))?
            .to_string();
        let id = head_words
            .next()
            .ok_or_else(|| Error::Lexicon(format!("line {line}: missing morpheme id")))?
            .to_string();
        if head_words.next().is_some() {
            return Err(Error::Lexicon(format!("line {line}: too many words before `:`")));
        }

        let tape = grammar.tapes.index_of(&category).unwrap_or(grammar.tapes.plt);
        let alphabet = &grammar.tape_alphabets[tape];
        let mut symbols = Vec::new();
        for tok in syms_text.split_whitespace() {
            let sym = Symbol::new(tok);
            if !alphabet.is_empty() && !alphabet.contains(&sym) {
                return Err(Error::Lexicon(format!(
                    "line {line}: symbol `{sym}` is not in the alphabet of tape `{}`",
                    grammar.tapes.names[tape]
                )));
            }
            symbols.push(sym);
        }
        if symbols.is_empty() {
            return Err(Error::Lexicon(format!("line {line}: entry `{id}` has no symbols")));
        }

        let mut attrs = Vec::new();
        if let Some(attr_text) = attr_text {
            for part in attr_text.split(',') {
                let part = part.trim();
                if part.is_empty() {
                    continue;
                }
                let (key, value) = part.split_once('=').ok_or_else(|| {
                    Error::Lexicon(format!("line {line}: attribute `{part}` needs `key = value`"))
                })?;
                attrs.push((
                    key.trim().to_string(),
                    value.split_whitespace().collect::<Vec<_>>().join(" "),
                ));
            }
        }

        if entries.iter().any(|e| e.id == id && e.tape == tape && e.symbols == symbols) {
            return Err(Error::Lexicon(format!(
                "line {line}: duplicate entry `{id}` on tape `{}`",
                grammar.tapes.names[tape]
            )));
        }
        entries.push(MorphemeEntry { id, category, tape, symbols, attrs });
    }

    let mut tries = vec![TrieNode::default(); grammar.arity()];
    for (i, e) in entries.iter().enumerate() {
        tries[e.tape].insert(&e.symbols, i);
    }
    Ok(Lexicon { entries, tries })
}

impl Lexicon {
    /// Entries with the given id on the given tape. Homographs (same spelling,
    /// different ids) are distinct entries; the same id may also name entries
    /// on different tapes.
    pub fn resolve(&self, tape: usize, id: &str) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.tape == tape && e.id == id)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn entry(&self, idx: usize) -> &MorphemeEntry {
        &self.entries[idx]
    }

    pub fn entries_on(&self, tape: usize) -> impl Iterator<Item = (usize, &MorphemeEntry)> {
        self.entries.iter().enumerate().filter(move |(_, e)| e.tape == tape)
    }

    /// A cursor at the root of a tape's trie.
    pub fn cursor(&self, tape: usize) -> Cursor<'_> {
        Cursor { lexicon: self, tape, node: &self.tries[tape], consumed: Vec::new() }
    }
}

/// A position inside one tape's trie, tracking the morphemes completed so
/// far. Advancing is nondeterministic: when an entry ends where another
/// continues, both readings are explored.
#[derive(Clone, Debug)]
pub struct Cursor<'a> {
    lexicon: &'a Lexicon,
    tape: usize,
    node: &'a TrieNode,
    consumed: Vec<usize>,
}

impl<'a> Cursor<'a> {
    /// Symbols on which this cursor can advance.
    pub fn options(&self) -> Vec<Symbol> {
        self.node.children.keys().cloned().collect()
    }

    /// All successor cursors after reading `sym`: the deeper trie position
    /// (when the path continues), plus one restart-at-root cursor for every
    /// entry that ends on this symbol.
    pub fn advance(&self, sym: &Symbol) -> Vec<Cursor<'a>> {
        let Some(child) = self.node.children.get(sym) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        if !child.children.is_empty() {
            out.push(Cursor {
                lexicon: self.lexicon,
                tape: self.tape,
                node: child,
                consumed: self.consumed.clone(),
            });
        }
        for &entry in &child.terminals {
            let mut consumed = self.consumed.clone();
            consumed.push(entry);
            out.push(Cursor {
                lexicon: self.lexicon,
                tape: self.tape,
                node: &self.lexicon.tries[self.tape],
                consumed,
            });
        }
        out
    }

    /// True at a morpheme boundary: nothing is half-read.
    pub fn at_boundary(&self) -> bool {
        std::ptr::eq(self.node, &self.lexicon.tries[self.tape])
    }

    /// Indices of the entries completed so far, in reading order.
    pub fn consumed(&self) -> &[usize] {
        &self.consumed
    }
}
