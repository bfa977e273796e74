//! Core data model: symbols, tuples, tuple/surface patterns, and variable
//! bindings.

use std::collections::BTreeMap;
use std::fmt;

/// The empty-transition marker. On a lexical tape a `0` cell means the tape
/// head does not move; as a surface form it means nothing is written.
pub const EPSILON: &str = "0";

/// The morpheme-boundary marker.
pub const BOUNDARY: &str = "+";

/// An atomic alphabet token. Multi-character tokens such as `c1` or `v2` are
/// single symbols; equality is exact string equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Box<str>);

impl Symbol {
    pub fn new(token: impl AsRef<str>) -> Self {
        let t = token.as_ref();
        debug_assert!(!t.is_empty(), "empty symbol token");
        Symbol(t.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_epsilon(&self) -> bool {
        &*self.0 == EPSILON
    }

    pub fn is_boundary(&self) -> bool {
        &*self.0 == BOUNDARY
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

pub fn epsilon() -> Symbol {
    Symbol::new(EPSILON)
}

pub fn boundary() -> Symbol {
    Symbol::new(BOUNDARY)
}

/// One cell per lexical tape. A `0` cell means no movement on that tape, so
/// an all-`0` tuple would consume nothing and is rejected at validation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolTuple(pub Vec<Symbol>);

impl SymbolTuple {
    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn is_all_epsilon(&self) -> bool {
        self.0.iter().all(Symbol::is_epsilon)
    }
}

impl fmt::Display for SymbolTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "({})", self.0[0]);
        }
        write!(f, "(")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for SymbolTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A lexical tuple together with the surface string it corresponds to.
/// The surface side may be empty (a deletion) or hold several symbols.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TuplePair {
    pub lex: SymbolTuple,
    pub surf: Vec<Symbol>,
}

impl TuplePair {
    pub fn new(lex: SymbolTuple, surf: Vec<Symbol>) -> Self {
        TuplePair { lex, surf }
    }

    /// Renders the surface side, `0` for an empty one.
    pub fn surf_display(&self) -> String {
        display_surface(&self.surf)
    }
}

/// Renders a surface symbol run: `0` when empty, space-joined otherwise.
pub fn display_surface(surf: &[Symbol]) -> String {
    if surf.is_empty() {
        EPSILON.to_string()
    } else {
        surf.iter().map(Symbol::as_str).collect::<Vec<_>>().join(" ")
    }
}

impl fmt::Display for TuplePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lex, self.surf_display())
    }
}

impl fmt::Debug for TuplePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Lexical tape names and the index of the primary lexical tape, the tape
/// that drives affixation and carries pattern-like morphemes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TapeConfig {
    pub names: Vec<String>,
    pub plt: usize,
}

impl TapeConfig {
    pub fn arity(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// One slot of a tuple or surface pattern.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    /// An exact token, including `0` and `+`.
    Literal(Symbol),
    /// A variable. Unifies with any non-`0` cell, subject to the rule's
    /// constraints; within one match every occurrence denotes the same value.
    Variable(String),
    /// Context wildcard; matches any cell including `0`.
    Any,
}

impl Term {
    pub fn as_variable(&self) -> Option<&str> {
        match self {
            Term::Variable(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Literal(s) => write!(f, "{s}"),
            Term::Variable(v) => write!(f, "{v}"),
            Term::Any => write!(f, "*"),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// An n-ary lexical pattern, one term per tape.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TuplePattern(pub Vec<Term>);

impl TuplePattern {
    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.0.iter().filter_map(Term::as_variable)
    }
}

impl fmt::Display for TuplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "({})", self.0[0]);
        }
        write!(f, "(")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, ")")
    }
}

/// A variable environment. Each variable binds at most one symbol; extending
/// a binding never changes an existing entry.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Bindings(BTreeMap<String, Symbol>);

impl Bindings {
    pub fn new() -> Self {
        Bindings::default()
    }

    pub fn get(&self, var: &str) -> Option<&Symbol> {
        self.0.get(var)
    }

    /// Binds `var` to `value`, or checks the existing binding. Returns false
    /// on a clash, leaving the environment unchanged.
    pub fn unify(&mut self, var: &str, value: &Symbol) -> bool {
        match self.0.get(var) {
            Some(prev) => prev == value,
            None => {
                self.0.insert(var.to_string(), value.clone());
                true
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Symbol)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }
}

impl fmt::Debug for Bindings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        write!(f, "{{")?;
        for (k, v) in &self.0 {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{k}={v}")?;
        }
        write!(f, "}}")
    }
}

/// Matches one term against one cell, extending `env` in place. Variables
/// never match `0`: an empty cell carries no symbol to bind.
pub fn match_term(term: &Term, cell: &Symbol, env: &mut Bindings) -> bool {
    match term {
        Term::Literal(s) => s == cell,
        Term::Variable(v) => !cell.is_epsilon() && env.unify(v, cell),
        Term::Any => true,
    }
}

/// Matches a tuple pattern against a concrete tuple under `env`. Returns the
/// extended environment on success and leaves the caller's `env` untouched.
pub fn match_tuple(pattern: &TuplePattern, tuple: &SymbolTuple, env: &Bindings) -> Option<Bindings> {
    if pattern.arity() != tuple.arity() {
        return None;
    }
    let mut out = env.clone();
    for (term, cell) in pattern.0.iter().zip(&tuple.0) {
        if !match_term(term, cell, &mut out) {
            return None;
        }
    }
    Some(out)
}

/// Matches a surface pattern (terms) against a run of surface symbols.
pub fn match_surface(pattern: &[Term], run: &[Symbol], env: &Bindings) -> Option<Bindings> {
    if pattern.len() != run.len() {
        return None;
    }
    let mut out = env.clone();
    for (term, sym) in pattern.iter().zip(run) {
        if !match_term(term, sym, &mut out) {
            return None;
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tup(cells: &[&str]) -> SymbolTuple {
        SymbolTuple(cells.iter().map(Symbol::new).collect())
    }

    fn pat(terms: &[Term]) -> TuplePattern {
        TuplePattern(terms.to_vec())
    }

    fn lit(s: &str) -> Term {
        Term::Literal(Symbol::new(s))
    }

    fn var(s: &str) -> Term {
        Term::Variable(s.to_string())
    }

    #[test]
    fn literal_cells_match_exactly() {
        let p = pat(&[lit("c1"), lit("d"), lit("0")]);
        assert!(match_tuple(&p, &tup(&["c1", "d", "0"]), &Bindings::new()).is_some());
        assert!(match_tuple(&p, &tup(&["c1", "d", "i"]), &Bindings::new()).is_none());
        assert!(match_tuple(&p, &tup(&["c2", "d", "0"]), &Bindings::new()).is_none());
    }

    #[test]
    fn variables_bind_and_stay_consistent() {
        let p = pat(&[var("C"), var("X"), lit("0")]);
        let env = match_tuple(&p, &tup(&["c1", "d", "0"]), &Bindings::new()).unwrap();
        assert_eq!(env.get("C").unwrap().as_str(), "c1");
        assert_eq!(env.get("X").unwrap().as_str(), "d");

        // A pre-bound variable must agree.
        let p2 = pat(&[var("C"), var("C"), lit("0")]);
        assert!(match_tuple(&p2, &tup(&["c1", "c1", "0"]), &Bindings::new()).is_some());
        assert!(match_tuple(&p2, &tup(&["c1", "c2", "0"]), &Bindings::new()).is_none());
    }

    #[test]
    fn variables_never_match_epsilon() {
        let p = pat(&[var("V"), lit("0"), var("X")]);
        assert!(match_tuple(&p, &tup(&["v1", "0", "a"]), &Bindings::new()).is_some());
        // X cannot bind the empty third cell.
        assert!(match_tuple(&p, &tup(&["v1", "0", "0"]), &Bindings::new()).is_none());
    }

    #[test]
    fn variables_do_match_boundary() {
        // Context variables range over anything present, including `+`.
        let p = pat(&[var("X1"), Term::Any, Term::Any]);
        let env = match_tuple(&p, &tup(&["+", "+", "+"]), &Bindings::new()).unwrap();
        assert_eq!(env.get("X1").unwrap().as_str(), "+");
    }

    #[test]
    fn any_matches_everything() {
        let p = pat(&[Term::Any, Term::Any, Term::Any]);
        assert!(match_tuple(&p, &tup(&["0", "0", "0"]), &Bindings::new()).is_some());
        assert!(match_tuple(&p, &tup(&["c1", "d", "+"]), &Bindings::new()).is_some());
    }

    #[test]
    fn match_does_not_mutate_caller_env() {
        let p = pat(&[var("C"), var("X"), lit("0")]);
        let env = Bindings::new();
        let _ = match_tuple(&p, &tup(&["c1", "d", "0"]), &env);
        assert!(env.get("C").is_none());
    }

    #[test]
    fn pair_display_matches_trace_notation() {
        let pair = TuplePair::new(tup(&["c1", "d", "0"]), vec![Symbol::new("d")]);
        assert_eq!(pair.to_string(), "(c1,d,0):d");
        let del = TuplePair::new(tup(&["+", "+", "+"]), vec![]);
        assert_eq!(del.to_string(), "(+,+,+):0");
        let multi = TuplePair::new(tup(&["o", "0"]), vec![Symbol::new("o"), Symbol::new("L")]);
        assert_eq!(multi.to_string(), "(o,0):o L");
    }
}
