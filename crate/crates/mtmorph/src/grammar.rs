//! Grammar parsing, validation, canonical printing, and the feasible-pair
//! computation shared by both execution backends.
//!
//! Grammar files are line oriented. `#` starts a comment. A file holds one
//! `tapes:` header, then declarations and rules:
//!
//! ```text
//! tapes: pattern* root vocalism
//! alphabet surface: a u i k t b
//! alphabet pattern: c1 c2 v1 v2 +
//! set cslot = { c1 c2 }
//! set vassoc = { (v1, a) (v2, i) }
//! compose ò = o L
//! rule r8: * - X - * => * - (C, X, 0) - * where C in cslot, X in radical
//! ```
//!
//! The starred tape is the primary lexical tape (PLT). In rule patterns a
//! token with an uppercase first letter is a variable; anything else is a
//! literal. A bare symbol (or 1-element tuple) where a full tuple is expected
//! is PLT shorthand: in the LEX position it expands with `0` on every other
//! tape, in contexts with wildcards. An empty tuple component, as in
//! `(P1, X1, )`, is a literal `0` cell.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{
    match_tuple, Bindings, Symbol, SymbolTuple, TapeConfig, Term, TuplePair, TuplePattern, EPSILON,
};

/// One item of a lexical context: a tuple pattern, or the ellipsis that lets
/// a left context act at a distance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ContextItem {
    Tuple(TuplePattern),
    Ellipsis,
}

/// Reference to a symbol (or symbol-tuple) set in a `where` clause.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetRef {
    Named(String),
    Inline(Vec<Vec<Symbol>>),
}

/// One `where` condition: membership (or negated membership) of a variable
/// list in a set. `(V, X) in vassoc` constrains the pair jointly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub vars: Vec<String>,
    pub negated: bool,
    pub set: SetRef,
}

/// A named set declaration. Elements are tuples of uniform arity; plain
/// symbol sets have arity 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetDef {
    pub name: String,
    pub elems: Vec<Vec<Symbol>>,
}

/// A composed surface glyph, e.g. `ò = o L`. Surface strings are written
/// with the composed character; the grammar operates on its parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Compose {
    pub whole: Symbol,
    pub parts: Vec<Symbol>,
}

/// A two-level rule `LSC - SURF - RSC op LLC - LEX - RLC [where ...]`.
/// Empty context vectors mean the context was `*` (unconstrained).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    /// True for `<=>`: the correspondence is also compelled wherever the
    /// lexical side (LLC, LEX, RLC) matches.
    pub coercive: bool,
    pub lsc: Vec<Term>,
    pub surf: Vec<Term>,
    pub rsc: Vec<Term>,
    pub llc: Vec<ContextItem>,
    pub lex: TuplePattern,
    pub rlc: Vec<ContextItem>,
    pub wheres: Vec<Constraint>,
}

impl Rule {
    /// A default-style rule constrains nothing but the correspondence itself.
    pub fn is_default_shape(&self) -> bool {
        self.lsc.is_empty()
            && self.rsc.is_empty()
            && self.llc.is_empty()
            && self.rlc.is_empty()
            && !self.coercive
    }

    /// Deletion rules erase lexical material: empty surface against a LEX
    /// tuple that consumes a real symbol. Coercive rules are exempt; their
    /// empty surface is compelled, not chosen.
    pub fn is_deletion(&self) -> bool {
        self.surf.is_empty()
            && !self.coercive
            && self.lex.0.iter().any(|t| match t {
                Term::Variable(_) => true,
                Term::Literal(s) => !s.is_epsilon() && !s.is_boundary(),
                Term::Any => false,
            })
    }

    /// Variables appearing in the LEX tuple or the surface form; these drive
    /// the feasible-pair enumeration and must carry a positive constraint.
    pub fn core_variables(&self) -> BTreeSet<&str> {
        self.lex
            .variables()
            .chain(self.surf.iter().filter_map(Term::as_variable))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grammar {
    pub tapes: TapeConfig,
    pub surface_alphabet: Vec<Symbol>,
    /// Parallel to `tapes.names`; empty when a tape has no declaration.
    pub tape_alphabets: Vec<Vec<Symbol>>,
    pub sets: Vec<SetDef>,
    pub composes: Vec<Compose>,
    pub rules: Vec<Rule>,
}

impl Grammar {
    pub fn arity(&self) -> usize {
        self.tapes.arity()
    }

    pub fn set_by_name(&self, name: &str) -> Option<&SetDef> {
        self.sets.iter().find(|s| s.name == name)
    }

    pub fn rule_by_id(&self, id: &str) -> Option<(usize, &Rule)> {
        self.rules.iter().enumerate().find(|(_, r)| r.id == id)
    }

    /// Resolves a set reference to its elements. Named references may also
    /// name the surface alphabet (`surface`) or any tape's alphabet.
    pub fn resolve_set(&self, set: &SetRef) -> Option<Vec<Vec<Symbol>>> {
        match set {
            SetRef::Inline(elems) => Some(elems.clone()),
            SetRef::Named(name) => {
                if let Some(def) = self.set_by_name(name) {
                    return Some(def.elems.clone());
                }
                if name == "surface" {
                    return Some(self.surface_alphabet.iter().map(|s| vec![s.clone()]).collect());
                }
                let idx = self.tapes.index_of(name)?;
                Some(self.tape_alphabets[idx].iter().map(|s| vec![s.clone()]).collect())
            }
        }
    }

    /// Per-variable enumeration domains from the rule's positive constraints,
    /// intersected across constraints. `0` and `+` never enter a domain: a
    /// variable standing for lexical material ranges over real symbols.
    pub fn positive_domains(&self, rule: &Rule) -> BTreeMap<String, BTreeSet<Symbol>> {
        let mut domains: BTreeMap<String, BTreeSet<Symbol>> = BTreeMap::new();
        for c in &rule.wheres {
            if c.negated {
                continue;
            }
            let Some(elems) = self.resolve_set(&c.set) else { continue };
            for (j, var) in c.vars.iter().enumerate() {
                let vals: BTreeSet<Symbol> = elems
                    .iter()
                    .filter(|e| e.len() == c.vars.len())
                    .map(|e| e[j].clone())
                    .filter(|s| !s.is_epsilon() && !s.is_boundary())
                    .collect();
                match domains.entry(var.clone()) {
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert(vals);
                    }
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        let merged = o.get().intersection(&vals).cloned().collect();
                        *o.get_mut() = merged;
                    }
                }
            }
        }
        domains
    }

    /// Evaluates one constraint under `env`: `None` while any variable is
    /// still unbound, otherwise whether the (possibly negated) membership
    /// holds.
    pub fn constraint_status(&self, c: &Constraint, env: &Bindings) -> Option<bool> {
        let mut probe = Vec::with_capacity(c.vars.len());
        for v in &c.vars {
            probe.push(env.get(v)?.clone());
        }
        let elems = match self.resolve_set(&c.set) {
            Some(e) => e,
            None => return Some(false),
        };
        let found = elems.iter().any(|e| e[..] == probe[..]);
        Some(found != c.negated)
    }

    /// True when no fully-bound constraint is violated. Constraints with
    /// unbound variables are deferred; they are re-checked once the whole
    /// rule has matched.
    pub fn constraints_ok(&self, rule: &Rule, env: &Bindings) -> bool {
        rule.wheres.iter().all(|c| self.constraint_status(c, env) != Some(false))
    }

    /// Final constraint check: every condition must be bound and hold.
    pub fn constraints_final(&self, rule: &Rule, env: &Bindings) -> bool {
        rule.wheres.iter().all(|c| self.constraint_status(c, env) == Some(true))
    }

    /// Whether `tuple` could match `pattern` under fresh bindings that honor
    /// the rule's constraints. This is the shape test used for ellipsis gaps:
    /// it ignores bindings accumulated elsewhere in the rule.
    pub fn shape_matches(&self, rule: &Rule, pattern: &TuplePattern, tuple: &SymbolTuple) -> bool {
        match_tuple(pattern, tuple, &Bindings::new())
            .is_some_and(|env| self.constraints_ok(rule, &env))
    }

    /// Renders a symbol run as display text, folding compose pairs (longest
    /// first) into their composed glyphs.
    pub fn render_surface(&self, syms: &[Symbol]) -> String {
        let mut out = String::new();
        let mut i = 0;
        'outer: while i < syms.len() {
            let mut candidates: Vec<&Compose> = self.composes.iter().collect();
            candidates.sort_by_key(|c| std::cmp::Reverse(c.parts.len()));
            for c in candidates {
                if syms[i..].starts_with(&c.parts) {
                    out.push_str(c.whole.as_str());
                    i += c.parts.len();
                    continue 'outer;
                }
            }
            out.push_str(syms[i].as_str());
            i += 1;
        }
        out
    }

    /// Parses display text back into surface symbols, expanding composed
    /// glyphs. Returns `None` on a character that is neither a composed
    /// glyph nor a declared surface symbol.
    pub fn parse_surface(&self, text: &str) -> Option<Vec<Symbol>> {
        let mut out = Vec::new();
        for ch in text.chars() {
            let tok = ch.to_string();
            if let Some(c) = self.composes.iter().find(|c| c.whole.as_str() == tok) {
                out.extend(c.parts.iter().cloned());
            } else if self.surface_alphabet.iter().any(|s| s.as_str() == tok) {
                out.push(Symbol::new(&tok));
            } else {
                return None;
            }
        }
        Some(out)
    }
}

/// Instantiates a tuple pattern under `env`. `None` if a variable is unbound
/// or a wildcard remains.
pub fn instantiate_tuple(p: &TuplePattern, env: &Bindings) -> Option<SymbolTuple> {
    let mut cells = Vec::with_capacity(p.arity());
    for t in &p.0 {
        match t {
            Term::Literal(s) => cells.push(s.clone()),
            Term::Variable(v) => cells.push(env.get(v)?.clone()),
            Term::Any => return None,
        }
    }
    Some(SymbolTuple(cells))
}

/// Instantiates a surface pattern under `env`.
pub fn instantiate_surface(terms: &[Term], env: &Bindings) -> Option<Vec<Symbol>> {
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        match t {
            Term::Literal(s) => out.push(s.clone()),
            Term::Variable(v) => out.push(env.get(v)?.clone()),
            Term::Any => return None,
        }
    }
    Some(out)
}

/// All LEX:SURF correspondences licensed by some rule, over the positive
/// constraint domains, deduplicated and sorted. The result is independent of
/// rule order and idempotent.
pub fn compute_feasible_pairs(g: &Grammar) -> Result<Vec<TuplePair>> {
    let mut pairs = BTreeSet::new();
    for rule in &g.rules {
        for pair in rule_pairs(g, rule)? {
            pairs.insert(pair);
        }
    }
    Ok(pairs.into_iter().collect())
}

/// The LEX:SURF instantiations of a single rule (its "own" pairs).
pub fn rule_pairs(g: &Grammar, rule: &Rule) -> Result<Vec<TuplePair>> {
    let domains = g.positive_domains(rule);
    let vars: Vec<&str> = rule.core_variables().into_iter().collect();
    let mut var_values: Vec<Vec<Symbol>> = Vec::with_capacity(vars.len());
    for v in &vars {
        let dom = domains.get(*v).filter(|d| !d.is_empty()).ok_or_else(|| {
            Error::Grammar(format!(
                "rule {}: unbounded variable `{v}` (no positive set constraint)",
                rule.id
            ))
        })?;
        var_values.push(dom.iter().cloned().collect());
    }

    let mut out = BTreeSet::new();
    let mut stack: Vec<(usize, Bindings)> = vec![(0, Bindings::new())];
    while let Some((i, env)) = stack.pop() {
        if i == vars.len() {
            if !g.constraints_ok(rule, &env) {
                continue;
            }
            let lex = instantiate_tuple(&rule.lex, &env).ok_or_else(|| {
                Error::Grammar(format!("rule {}: wildcard cell in LEX", rule.id))
            })?;
            if lex.is_all_epsilon() {
                return Err(Error::Grammar(format!(
                    "rule {}: LEX consumes nothing on any tape",
                    rule.id
                )));
            }
            let surf = instantiate_surface(&rule.surf, &env).ok_or_else(|| {
                Error::Grammar(format!("rule {}: wildcard in surface form", rule.id))
            })?;
            out.insert(TuplePair::new(lex, surf));
            continue;
        }
        for val in &var_values[i] {
            let mut next = env.clone();
            if next.unify(vars[i], val) && g.constraints_ok(rule, &next) {
                stack.push((i + 1, next));
            }
        }
    }
    Ok(out.into_iter().collect())
}

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
struct Tok {
    text: String,
    line: usize,
    col: usize,
}

fn is_delim(c: char) -> bool {
    matches!(c, '(' | ')' | ',' | '{' | '}' | ':')
}

fn tokenize_line(text: &str, line: usize) -> Vec<Tok> {
    let mut toks = Vec::new();
    let mut cur = String::new();
    let mut cur_col = 0;
    let flush = |toks: &mut Vec<Tok>, cur: &mut String, cur_col: usize| {
        if !cur.is_empty() {
            toks.push(Tok { text: std::mem::take(cur), line, col: cur_col });
        }
    };
    for (i, c) in text.chars().enumerate() {
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            flush(&mut toks, &mut cur, cur_col);
        } else if is_delim(c) {
            flush(&mut toks, &mut cur, cur_col);
            toks.push(Tok { text: c.to_string(), line, col });
        } else {
            if cur.is_empty() {
                cur_col = col;
            }
            cur.push(c);
        }
    }
    flush(&mut toks, &mut cur, cur_col);
    toks
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct LineParser<'a> {
    toks: &'a [Tok],
    i: usize,
    line: usize,
}

impl<'a> LineParser<'a> {
    fn new(toks: &'a [Tok], line: usize) -> Self {
        LineParser { toks, i: 0, line }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i)
    }

    fn next(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.i);
        if t.is_some() {
            self.i += 1;
        }
        t
    }

    fn err_here(&self, msg: impl Into<String>) -> Error {
        let (line, col) = match self.peek() {
            Some(t) => (t.line, t.col),
            None => (self.line, self.toks.last().map_or(1, |t| t.col + t.text.chars().count())),
        };
        Error::syntax(line, col, msg)
    }

    fn expect(&mut self, text: &str) -> Result<()> {
        match self.peek() {
            Some(t) if t.text == text => {
                self.i += 1;
                Ok(())
            }
            _ => Err(self.err_here(format!("expected `{text}`"))),
        }
    }

    fn at_end(&self) -> bool {
        self.i >= self.toks.len()
    }
}

fn is_variable_token(t: &str) -> bool {
    t.chars().next().is_some_and(char::is_uppercase)
}

fn term_of_token(t: &str) -> Term {
    if is_variable_token(t) {
        Term::Variable(t.to_string())
    } else {
        Term::Literal(Symbol::new(t))
    }
}

/// Where a tuple pattern occurs, for PLT shorthand expansion.
#[derive(Clone, Copy, PartialEq)]
enum TupleSite {
    Lex,
    Context,
}

/// Parses grammar source into a [`Grammar`]. Purely syntactic failures come
/// back as [`Error::Syntax`]; run [`validate_grammar`] for semantic checks.
pub fn parse_grammar(src: &str) -> Result<Grammar> {
    let mut tapes: Option<TapeConfig> = None;
    let mut surface_alphabet: Vec<Symbol> = Vec::new();
    let mut tape_alphabets: Vec<Vec<Symbol>> = Vec::new();
    let mut sets = Vec::new();
    let mut composes = Vec::new();
    let mut rules = Vec::new();

    for (lno, raw) in src.lines().enumerate() {
        let line = lno + 1;
        let toks = tokenize_line(raw, line);
        if toks.is_empty() {
            continue;
        }
        let mut p = LineParser::new(&toks, line);
        let head = p.next().unwrap().text.clone();
        match head.as_str() {
            "tapes" => {
                p.expect(":")?;
                if tapes.is_some() {
                    return Err(p.err_here("duplicate `tapes:` header"));
                }
                let mut names = Vec::new();
                let mut plt = None;
                while let Some(t) = p.next() {
                    let (name, starred) = match t.text.strip_suffix('*') {
                        Some(base) => (base.to_string(), true),
                        None => (t.text.clone(), false),
                    };
                    if name.is_empty() {
                        return Err(Error::syntax(t.line, t.col, "empty tape name"));
                    }
                    if starred {
                        if plt.is_some() {
                            return Err(Error::syntax(
                                t.line,
                                t.col,
                                "more than one tape is starred as primary",
                            ));
                        }
                        plt = Some(names.len());
                    }
                    names.push(name);
                }
                if names.is_empty() {
                    return Err(p.err_here("`tapes:` needs at least one tape"));
                }
                let plt = plt.ok_or_else(|| {
                    Error::syntax(line, 1, "exactly one tape must be starred as primary")
                })?;
                tape_alphabets = vec![Vec::new(); names.len()];
                tapes = Some(TapeConfig { names, plt });
            }
            "alphabet" => {
                let cfg = tapes
                    .as_ref()
                    .ok_or_else(|| Error::syntax(line, 1, "`alphabet` before `tapes:` header"))?;
                let name = p
                    .next()
                    .ok_or_else(|| Error::syntax(line, 1, "expected alphabet name"))?
                    .text
                    .clone();
                p.expect(":")?;
                let mut syms = Vec::new();
                while let Some(t) = p.next() {
                    syms.push(Symbol::new(&t.text));
                }
                if name == "surface" {
                    if !surface_alphabet.is_empty() {
                        return Err(Error::syntax(line, 1, "duplicate surface alphabet"));
                    }
                    surface_alphabet = syms;
                } else {
                    let idx = cfg.index_of(&name).ok_or_else(|| {
                        Error::syntax(line, 1, format!("alphabet for unknown tape `{name}`"))
                    })?;
                    if !tape_alphabets[idx].is_empty() {
                        return Err(Error::syntax(
                            line,
                            1,
                            format!("duplicate alphabet for tape `{name}`"),
                        ));
                    }
                    tape_alphabets[idx] = syms;
                }
            }
            "set" => {
                let name = p
                    .next()
                    .ok_or_else(|| Error::syntax(line, 1, "expected set name"))?
                    .text
                    .clone();
                p.expect("=")?;
                let elems = parse_brace_set(&mut p)?;
                if !p.at_end() {
                    return Err(p.err_here("trailing tokens after set declaration"));
                }
                sets.push(SetDef { name, elems });
            }
            "compose" => {
                let whole = p
                    .next()
                    .ok_or_else(|| Error::syntax(line, 1, "expected composed glyph"))?
                    .text
                    .clone();
                p.expect("=")?;
                let mut parts = Vec::new();
                while let Some(t) = p.next() {
                    parts.push(Symbol::new(&t.text));
                }
                if parts.is_empty() {
                    return Err(Error::syntax(line, 1, "compose needs at least one part"));
                }
                composes.push(Compose { whole: Symbol::new(&whole), parts });
            }
            "rule" => {
                let cfg = tapes
                    .as_ref()
                    .ok_or_else(|| Error::syntax(line, 1, "`rule` before `tapes:` header"))?;
                rules.push(parse_rule(&mut p, cfg)?);
            }
            other => {
                return Err(Error::syntax(
                    line,
                    toks[0].col,
                    format!("unknown directive `{other}`"),
                ));
            }
        }
    }

    let tapes = tapes.ok_or_else(|| Error::syntax(1, 1, "missing `tapes:` header"))?;
    Ok(Grammar { tapes, surface_alphabet, tape_alphabets, sets, composes, rules })
}

fn parse_brace_set(p: &mut LineParser) -> Result<Vec<Vec<Symbol>>> {
    p.expect("{")?;
    let mut elems: Vec<Vec<Symbol>> = Vec::new();
    loop {
        let Some(t) = p.peek() else {
            return Err(p.err_here("unterminated `{`"));
        };
        match t.text.as_str() {
            "}" => {
                p.next();
                break;
            }
            "," => {
                p.next();
            }
            "(" => {
                p.next();
                let mut tuple = Vec::new();
                loop {
                    let Some(t) = p.next() else {
                        return Err(p.err_here("unterminated `(` in set element"));
                    };
                    match t.text.as_str() {
                        ")" => break,
                        "," => continue,
                        sym => tuple.push(Symbol::new(sym)),
                    }
                }
                elems.push(tuple);
            }
            sym => {
                elems.push(vec![Symbol::new(sym)]);
                p.next();
            }
        }
    }
    Ok(elems)
}

/// Splits the token stream of a rule body on standalone `-` separators.
fn split_on_dash(toks: &[Tok]) -> Vec<&[Tok]> {
    let mut parts = Vec::new();
    let mut start = 0;
    for (i, t) in toks.iter().enumerate() {
        if t.text == "-" {
            parts.push(&toks[start..i]);
            start = i + 1;
        }
    }
    parts.push(&toks[start..]);
    parts
}

fn parse_rule(p: &mut LineParser, cfg: &TapeConfig) -> Result<Rule> {
    let line = p.line;
    let id = p
        .next()
        .ok_or_else(|| Error::syntax(line, 1, "expected rule id"))?
        .text
        .clone();
    p.expect(":")?;

    // Collect tokens up to the operator, then up to `where` (or the end).
    let rest = &p.toks[p.i..];
    let op_pos = rest.iter().position(|t| matches!(t.text.as_str(), "=>" | "<=>" | "<=" | "/<="));
    let Some(op_pos) = op_pos else {
        return Err(p.err_here("rule is missing the `=>` or `<=>` operator"));
    };
    let op_tok = &rest[op_pos];
    let coercive = match op_tok.text.as_str() {
        "=>" => false,
        "<=>" => true,
        "<=" | "/<=" => {
            return Err(Error::syntax(
                op_tok.line,
                op_tok.col,
                format!(
                    "`{}` (surface-requires-lexical) rules are not part of this formalism; \
                     only `=>` and `<=>` are supported",
                    op_tok.text
                ),
            ));
        }
        _ => unreachable!(),
    };
    let lhs = &rest[..op_pos];
    let after = &rest[op_pos + 1..];
    let where_pos = after.iter().position(|t| t.text == "where");
    let (rhs, where_toks) = match where_pos {
        Some(w) => (&after[..w], &after[w + 1..]),
        None => (after, &[][..]),
    };

    let lhs_parts = split_on_dash(lhs);
    if lhs_parts.len() != 3 {
        return Err(Error::syntax(
            op_tok.line,
            lhs.first().map_or(op_tok.col, |t| t.col),
            "surface side must be `LSC - SURF - RSC`",
        ));
    }
    let rhs_parts = split_on_dash(rhs);
    if rhs_parts.len() != 3 {
        return Err(Error::syntax(
            op_tok.line,
            rhs.first().map_or(op_tok.col, |t| t.col),
            "lexical side must be `LLC - LEX - RLC`",
        ));
    }

    let lsc = parse_surface_context(lhs_parts[0], p.line)?;
    let surf = parse_surface_form(lhs_parts[1], p.line)?;
    let rsc = parse_surface_context(lhs_parts[2], p.line)?;
    let llc = parse_lexical_context(rhs_parts[0], cfg)?;
    let lex = parse_lex(rhs_parts[1], cfg, p.line)?;
    let rlc = parse_lexical_context(rhs_parts[2], cfg)?;
    let wheres = parse_wheres(where_toks, p.line)?;

    p.i = p.toks.len();
    Ok(Rule { id, coercive, lsc, surf, rsc, llc, lex, rlc, wheres })
}

fn parse_surface_context(toks: &[Tok], line: usize) -> Result<Vec<Term>> {
    if toks.len() == 1 && toks[0].text == "*" {
        return Ok(Vec::new());
    }
    let mut terms = Vec::new();
    for t in toks {
        match t.text.as_str() {
            "*" => {
                return Err(Error::syntax(
                    t.line,
                    t.col,
                    "`*` must stand alone as a surface context",
                ))
            }
            "(" | ")" | "," => {
                return Err(Error::syntax(
                    t.line,
                    t.col,
                    "surface contexts take bare symbols, not tuples",
                ))
            }
            "..." => {
                return Err(Error::syntax(
                    t.line,
                    t.col,
                    "ellipsis is only supported in the left lexical context",
                ))
            }
            tok => terms.push(term_of_token(tok)),
        }
    }
    if terms.is_empty() {
        return Err(Error::syntax(line, 1, "empty surface context"));
    }
    Ok(terms)
}

fn parse_surface_form(toks: &[Tok], line: usize) -> Result<Vec<Term>> {
    if toks.len() == 1 && toks[0].text == EPSILON {
        return Ok(Vec::new());
    }
    let mut terms = Vec::new();
    for t in toks {
        match t.text.as_str() {
            "*" => {
                return Err(Error::syntax(t.line, t.col, "surface form cannot be `*`"));
            }
            "(" | ")" | "," => {
                return Err(Error::syntax(
                    t.line,
                    t.col,
                    "the surface form takes bare symbols, not tuples",
                ))
            }
            tok => terms.push(term_of_token(tok)),
        }
    }
    if terms.is_empty() {
        return Err(Error::syntax(line, 1, "empty surface form (write `0` for none)"));
    }
    Ok(terms)
}

/// Parses `LLC` or `RLC`: `*`, or a sequence of tuples, PLT-shorthand
/// symbols, and (on the left) ellipses.
fn parse_lexical_context(toks: &[Tok], cfg: &TapeConfig) -> Result<Vec<ContextItem>> {
    if toks.len() == 1 && toks[0].text == "*" {
        return Ok(Vec::new());
    }
    let mut items = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let t = &toks[i];
        match t.text.as_str() {
            "..." => {
                items.push(ContextItem::Ellipsis);
                i += 1;
            }
            "(" => {
                let (pat, next) = parse_tuple(toks, i, cfg, TupleSite::Context)?;
                items.push(ContextItem::Tuple(pat));
                i = next;
            }
            ")" | "," => {
                return Err(Error::syntax(t.line, t.col, "unexpected token in lexical context"));
            }
            "*" => {
                return Err(Error::syntax(
                    t.line,
                    t.col,
                    "`*` must stand alone as a lexical context",
                ));
            }
            tok => {
                items.push(ContextItem::Tuple(expand_shorthand(
                    term_of_token(tok),
                    cfg,
                    TupleSite::Context,
                )));
                i += 1;
            }
        }
    }
    Ok(items)
}

fn parse_lex(toks: &[Tok], cfg: &TapeConfig, line: usize) -> Result<TuplePattern> {
    if toks.is_empty() {
        return Err(Error::syntax(line, 1, "missing LEX tuple"));
    }
    let t = &toks[0];
    let (pat, next) = match t.text.as_str() {
        "(" => parse_tuple(toks, 0, cfg, TupleSite::Lex)?,
        "*" => {
            return Err(Error::syntax(t.line, t.col, "LEX cannot be `*`"));
        }
        "..." => {
            return Err(Error::syntax(t.line, t.col, "LEX cannot be an ellipsis"));
        }
        tok => (expand_shorthand(term_of_token(tok), cfg, TupleSite::Lex), 1),
    };
    if next != toks.len() {
        let t = &toks[next];
        return Err(Error::syntax(t.line, t.col, "LEX must be a single tuple"));
    }
    Ok(pat)
}

/// Parses a parenthesized tuple starting at `toks[start]`. Empty components,
/// as in `(P1, X1, )`, are literal `0` cells; a bare `*` component is a
/// wildcard. Returns the pattern and the index one past `)`.
fn parse_tuple(
    toks: &[Tok],
    start: usize,
    cfg: &TapeConfig,
    site: TupleSite,
) -> Result<(TuplePattern, usize)> {
    let open = &toks[start];
    debug_assert_eq!(open.text, "(");
    let mut terms: Vec<Term> = Vec::new();
    let mut pending: Option<Term> = None;
    let mut i = start + 1;
    loop {
        let Some(t) = toks.get(i) else {
            return Err(Error::syntax(open.line, open.col, "unterminated `(`"));
        };
        match t.text.as_str() {
            ")" => {
                // A component between the last delimiter and `)` defaults to 0.
                if terms.is_empty() && pending.is_none() {
                    return Err(Error::syntax(t.line, t.col, "empty tuple"));
                }
                terms.push(pending.take().unwrap_or(Term::Literal(Symbol::new(EPSILON))));
                i += 1;
                break;
            }
            "," => {
                terms.push(pending.take().unwrap_or(Term::Literal(Symbol::new(EPSILON))));
                i += 1;
            }
            "*" => {
                if pending.is_some() {
                    return Err(Error::syntax(t.line, t.col, "expected `,` or `)`"));
                }
                pending = Some(Term::Any);
                i += 1;
            }
            "(" => {
                return Err(Error::syntax(t.line, t.col, "tuples do not nest"));
            }
            tok => {
                if pending.is_some() {
                    return Err(Error::syntax(t.line, t.col, "expected `,` or `)`"));
                }
                pending = Some(term_of_token(tok));
                i += 1;
            }
        }
    }
    let n = cfg.arity();
    if terms.len() == 1 && n != 1 {
        return Ok((expand_shorthand(terms.pop().unwrap(), cfg, site), i));
    }
    if terms.len() != n {
        return Err(Error::syntax(
            open.line,
            open.col,
            format!("tuple of arity {}, expected {n}", terms.len()),
        ));
    }
    Ok((TuplePattern(terms), i))
}

/// Expands PLT shorthand: a bare symbol stands for a full tuple with the
/// symbol on the primary lexical tape. In LEX the other tapes are pinned to
/// `0` (nothing else moves); in contexts they are unconstrained.
fn expand_shorthand(term: Term, cfg: &TapeConfig, site: TupleSite) -> TuplePattern {
    let filler = match site {
        TupleSite::Lex => Term::Literal(Symbol::new(EPSILON)),
        TupleSite::Context => Term::Any,
    };
    let mut terms = vec![filler; cfg.arity()];
    terms[cfg.plt] = term;
    TuplePattern(terms)
}

fn parse_wheres(toks: &[Tok], line: usize) -> Result<Vec<Constraint>> {
    let mut out = Vec::new();
    let mut p = LineParser::new(toks, line);
    while !p.at_end() {
        // Variable list: `X` or `(V, X)`.
        let mut vars = Vec::new();
        match p.peek().map(|t| t.text.clone()).as_deref() {
            Some("(") => {
                p.next();
                loop {
                    let Some(t) = p.next() else {
                        return Err(p.err_here("unterminated variable list"));
                    };
                    match t.text.as_str() {
                        ")" => break,
                        "," => continue,
                        v => vars.push(v.to_string()),
                    }
                }
            }
            Some(_) => vars.push(p.next().unwrap().text.clone()),
            None => break,
        }
        if vars.is_empty() {
            return Err(p.err_here("empty variable list in `where`"));
        }

        let op = match p.next() {
            Some(t) => t.text.clone(),
            None => return Err(p.err_here("expected `in`, `is`, `=`, or `!=`")),
        };
        let negated = match op.as_str() {
            "in" | "is" | "=" => false,
            "!=" => true,
            other => {
                return Err(p.err_here(format!(
                    "expected `in`, `is`, `=`, or `!=`, found `{other}`"
                )))
            }
        };

        let set = match p.peek().map(|t| t.text.clone()).as_deref() {
            Some("{") => SetRef::Inline(parse_brace_set(&mut p)?),
            Some(_) => SetRef::Named(p.next().unwrap().text.clone()),
            None => return Err(p.err_here("expected a set after the membership operator")),
        };
        out.push(Constraint { vars, negated, set });

        match p.peek().map(|t| t.text.clone()).as_deref() {
            Some(",") => {
                p.next();
            }
            Some(other) => {
                return Err(p.err_here(format!("expected `,` between conditions, found `{other}`")))
            }
            None => break,
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    fn error(message: String) -> Self {
        Diagnostic { severity: Severity::Error, message }
    }

    fn warning(message: String) -> Self {
        Diagnostic { severity: Severity::Warning, message }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.severity {
            Severity::Error => write!(f, "error: {}", self.message),
            Severity::Warning => write!(f, "warning: {}", self.message),
        }
    }
}

/// Semantic checks over a parsed grammar. Errors make the grammar unusable;
/// warnings flag likely mistakes.
pub fn validate_grammar(g: &Grammar) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let n = g.arity();

    let mut seen_names = BTreeSet::new();
    for name in &g.tapes.names {
        if !seen_names.insert(name) {
            diags.push(Diagnostic::error(format!("duplicate tape name `{name}`")));
        }
    }
    if g.surface_alphabet.is_empty() {
        diags.push(Diagnostic::error("no surface alphabet declared".into()));
    }

    let mut seen_ids = BTreeSet::new();
    for rule in &g.rules {
        if !seen_ids.insert(&rule.id) {
            diags.push(Diagnostic::error(format!("duplicate rule id `{}`", rule.id)));
        }
    }

    for c in &g.composes {
        if c.whole.as_str().chars().count() != 1 {
            diags.push(Diagnostic::error(format!(
                "composed glyph `{}` must be a single character",
                c.whole
            )));
        }
        for part in &c.parts {
            if !g.surface_alphabet.contains(part) {
                diags.push(Diagnostic::error(format!(
                    "compose part `{part}` is not a surface symbol"
                )));
            }
        }
    }

    for set in &g.sets {
        let arity = set.elems.first().map_or(1, Vec::len);
        for e in &set.elems {
            if e.len() != arity {
                diags.push(Diagnostic::error(format!(
                    "set `{}` mixes element arities {} and {}",
                    set.name,
                    arity,
                    e.len()
                )));
                break;
            }
        }
        for e in &set.elems {
            for s in e {
                let declared = g.surface_alphabet.contains(s)
                    || g.tape_alphabets.iter().any(|a| a.contains(s));
                if !declared {
                    diags.push(Diagnostic::warning(format!(
                        "set `{}` element `{s}` appears in no alphabet",
                        set.name
                    )));
                }
            }
        }
    }

    for rule in &g.rules {
        validate_rule(g, rule, n, &mut diags);
    }

    if !g.rules.is_empty() && !g.rules.iter().any(Rule::is_default_shape) {
        diags.push(Diagnostic::warning(
            "grammar has no context-free default rule; most inputs will have no output".into(),
        ));
    }

    diags
}

fn validate_rule(g: &Grammar, rule: &Rule, n: usize, diags: &mut Vec<Diagnostic>) {
    let id = &rule.id;

    // LEX shape.
    if rule.lex.arity() != n {
        diags.push(Diagnostic::error(format!(
            "rule {id}: LEX tuple has arity {}, expected {n}",
            rule.lex.arity()
        )));
    }
    if rule.lex.0.iter().any(|t| matches!(t, Term::Any)) {
        diags.push(Diagnostic::error(format!("rule {id}: wildcard cell in LEX")));
    }
    if rule.lex.0.iter().all(|t| matches!(t, Term::Literal(s) if s.is_epsilon())) {
        diags.push(Diagnostic::error(format!(
            "rule {id}: LEX consumes nothing on any tape"
        )));
    }

    // Ellipsis placement.
    let left_ellipses = rule.llc.iter().filter(|i| **i == ContextItem::Ellipsis).count();
    if left_ellipses > 1 {
        diags.push(Diagnostic::error(format!(
            "rule {id}: at most one ellipsis is supported in the left context"
        )));
    }
    if rule.rlc.contains(&ContextItem::Ellipsis) {
        diags.push(Diagnostic::error(format!(
            "rule {id}: ellipsis is only supported in the left lexical context"
        )));
    }

    // Positive constraints for every enumerated variable.
    let domains = g.positive_domains(rule);
    for v in rule.core_variables() {
        match domains.get(v) {
            Some(d) if !d.is_empty() => {}
            _ => diags.push(Diagnostic::error(format!(
                "rule {id}: unbounded variable `{v}` (no positive set constraint)"
            ))),
        }
    }

    // Constraint references.
    let mut pattern_vars: BTreeSet<&str> = rule.lex.variables().collect();
    for items in [&rule.llc, &rule.rlc] {
        for item in items {
            if let ContextItem::Tuple(t) = item {
                pattern_vars.extend(t.variables());
            }
        }
    }
    for terms in [&rule.lsc, &rule.surf, &rule.rsc] {
        pattern_vars.extend(terms.iter().filter_map(Term::as_variable));
    }
    for c in &rule.wheres {
        if let (SetRef::Named(name), None) = (&c.set, g.resolve_set(&c.set)) {
            diags.push(Diagnostic::error(format!("rule {id}: unknown set `{name}`")));
            continue;
        }
        if let Some(elems) = g.resolve_set(&c.set) {
            if let Some(e) = elems.iter().find(|e| e.len() != c.vars.len()) {
                diags.push(Diagnostic::error(format!(
                    "rule {id}: {}-variable condition against set elements of arity {}",
                    c.vars.len(),
                    e.len()
                )));
            }
        }
        for v in &c.vars {
            if !pattern_vars.contains(v.as_str()) {
                diags.push(Diagnostic::warning(format!(
                    "rule {id}: constraint on `{v}`, which appears nowhere in the rule"
                )));
            }
        }
    }

    // Declared-symbol checks, cell by cell.
    let check_cell = |cell: &Term, tape: usize, diags: &mut Vec<Diagnostic>| {
        if let Term::Literal(s) = cell {
            if s.is_epsilon() {
                return;
            }
            let alpha = &g.tape_alphabets[tape];
            if !alpha.is_empty() && !alpha.contains(s) {
                diags.push(Diagnostic::error(format!(
                    "rule {id}: undeclared symbol `{s}` on tape `{}`",
                    g.tapes.names[tape]
                )));
            }
        }
    };
    if rule.lex.arity() == n {
        for (i, cell) in rule.lex.0.iter().enumerate() {
            check_cell(cell, i, diags);
        }
    }
    for items in [&rule.llc, &rule.rlc] {
        for item in items {
            if let ContextItem::Tuple(t) = item {
                if t.arity() == n {
                    for (i, cell) in t.0.iter().enumerate() {
                        check_cell(cell, i, diags);
                    }
                }
            }
        }
    }
    for (part, terms) in [("LSC", &rule.lsc), ("SURF", &rule.surf), ("RSC", &rule.rsc)] {
        for term in terms.iter() {
            if let Term::Literal(s) = term {
                if s.is_epsilon() {
                    diags.push(Diagnostic::error(format!(
                        "rule {id}: `0` cannot appear inside {part}"
                    )));
                } else if !g.surface_alphabet.is_empty() && !g.surface_alphabet.contains(s) {
                    diags.push(Diagnostic::error(format!(
                        "rule {id}: `{s}` in {part} is not a surface symbol"
                    )));
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Canonical printing
// ---------------------------------------------------------------------------

fn write_items(f: &mut fmt::Formatter<'_>, items: &[ContextItem]) -> fmt::Result {
    if items.is_empty() {
        return write!(f, "*");
    }
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            write!(f, " ")?;
        }
        match item {
            ContextItem::Tuple(t) => write!(f, "{t}")?,
            ContextItem::Ellipsis => write!(f, "...")?,
        }
    }
    Ok(())
}

fn write_terms(f: &mut fmt::Formatter<'_>, terms: &[Term], empty: &str) -> fmt::Result {
    if terms.is_empty() {
        return write!(f, "{empty}");
    }
    for (i, t) in terms.iter().enumerate() {
        if i > 0 {
            write!(f, " ")?;
        }
        write!(f, "{t}")?;
    }
    Ok(())
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {}: ", self.id)?;
        write_terms(f, &self.lsc, "*")?;
        write!(f, " - ")?;
        write_terms(f, &self.surf, EPSILON)?;
        write!(f, " - ")?;
        write_terms(f, &self.rsc, "*")?;
        write!(f, " {} ", if self.coercive { "<=>" } else { "=>" })?;
        write_items(f, &self.llc)?;
        write!(f, " - {} - ", self.lex)?;
        write_items(f, &self.rlc)?;
        if !self.wheres.is_empty() {
            write!(f, " where ")?;
            for (i, c) in self.wheres.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                if c.vars.len() == 1 {
                    write!(f, "{}", c.vars[0])?;
                } else {
                    write!(f, "({})", c.vars.join(","))?;
                }
                write!(f, " {} ", if c.negated { "!=" } else { "in" })?;
                match &c.set {
                    SetRef::Named(name) => write!(f, "{name}")?,
                    SetRef::Inline(elems) => {
                        write!(f, "{{ ")?;
                        for e in elems {
                            if e.len() == 1 {
                                write!(f, "{} ", e[0])?;
                            } else {
                                write!(
                                    f,
                                    "({}) ",
                                    e.iter().map(Symbol::as_str).collect::<Vec<_>>().join(",")
                                )?;
                            }
                        }
                        write!(f, "}}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tapes:")?;
        for (i, name) in self.tapes.names.iter().enumerate() {
            write!(f, " {name}{}", if i == self.tapes.plt { "*" } else { "" })?;
        }
        writeln!(f)?;
        if !self.surface_alphabet.is_empty() {
            write!(f, "alphabet surface:")?;
            for s in &self.surface_alphabet {
                write!(f, " {s}")?;
            }
            writeln!(f)?;
        }
        for (i, alpha) in self.tape_alphabets.iter().enumerate() {
            if alpha.is_empty() {
                continue;
            }
            write!(f, "alphabet {}:", self.tapes.names[i])?;
            for s in alpha {
                write!(f, " {s}")?;
            }
            writeln!(f)?;
        }
        for set in &self.sets {
            write!(f, "set {} = {{ ", set.name)?;
            for e in &set.elems {
                if e.len() == 1 {
                    write!(f, "{} ", e[0])?;
                } else {
                    write!(f, "({}) ", e.iter().map(Symbol::as_str).collect::<Vec<_>>().join(","))?;
                }
            }
            writeln!(f, "}}")?;
        }
        for c in &self.composes {
            write!(f, "compose {} =", c.whole)?;
            for part in &c.parts {
                write!(f, " {part}")?;
            }
            writeln!(f)?;
        }
        for rule in &self.rules {
            writeln!(f, "{rule}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "
tapes: pattern* root vocalism
alphabet surface: a u i k t b d
alphabet pattern: c1 c2 v1 v2 +
alphabet root: k t b d +
alphabet vocalism: a u i +
set cslot = { c1 c2 }
set vowel = { a u i }
set radical = { k t b d }
set vassoc = { (v1, a) (v1, u) (v2, i) }
rule r7: * - X - * => * - X - * where X in surface
rule r8: * - X - * => * - (C, X, 0) - * where C in cslot, X in radical
rule r9: * - X - * => * - (V, 0, X) - * where (V, X) in vassoc
";

    fn toy() -> Grammar {
        let g = parse_grammar(TOY).unwrap();
        let errs: Vec<_> =
            validate_grammar(&g).into_iter().filter(|d| d.severity == Severity::Error).collect();
        assert!(errs.is_empty(), "{errs:?}");
        g
    }

    #[test]
    fn parses_header_and_decls() {
        let g = toy();
        assert_eq!(g.tapes.names, ["pattern", "root", "vocalism"]);
        assert_eq!(g.tapes.plt, 0);
        assert_eq!(g.surface_alphabet.len(), 7);
        assert_eq!(g.set_by_name("vassoc").unwrap().elems.len(), 3);
        assert_eq!(g.rules.len(), 3);
    }

    #[test]
    fn plt_shorthand_expands_per_site() {
        let src = "
tapes: pattern* root vocalism
alphabet surface: a
alphabet pattern: v1 +
set vowel = { a }
rule r12: * - 0 - * => X1 - V - X2 where V in vowel, X1 != vowel, X2 != vowel
";
        let g = parse_grammar(src).unwrap();
        let r = &g.rules[0];
        // LEX: bare V pins the other tapes to 0.
        assert_eq!(
            r.lex,
            TuplePattern(vec![
                Term::Variable("V".into()),
                Term::Literal(Symbol::new("0")),
                Term::Literal(Symbol::new("0")),
            ])
        );
        // Contexts: bare X1 leaves the other tapes unconstrained.
        assert_eq!(
            r.llc,
            vec![ContextItem::Tuple(TuplePattern(vec![
                Term::Variable("X1".into()),
                Term::Any,
                Term::Any,
            ]))]
        );
        // SURF `0` is the empty form.
        assert!(r.surf.is_empty());
    }

    #[test]
    fn one_element_parenthesized_tuple_is_shorthand() {
        let src = "
tapes: pattern* root vocalism
alphabet surface: a
set vowel = { a }
rule r: * - 0 - * => (X1) - (V) - * where V in vowel, X1 != vowel
";
        let g = parse_grammar(src).unwrap();
        let r = &g.rules[0];
        assert_eq!(r.lex.0[1], Term::Literal(Symbol::new("0")));
        match &r.llc[0] {
            ContextItem::Tuple(t) => assert_eq!(t.0[1], Term::Any),
            other => panic!("unexpected item {other:?}"),
        }
    }

    #[test]
    fn trailing_empty_component_is_epsilon() {
        let src = "
tapes: pattern* root vocalism
alphabet surface: a
set cslot = { c1 }
set radical = { k }
rule r: * - 0 - * => (P1, X1, ) - (P1, 0, ) - * where P1 in cslot, X1 in radical
";
        let g = parse_grammar(src).unwrap();
        let r = &g.rules[0];
        match &r.llc[0] {
            ContextItem::Tuple(t) => {
                assert_eq!(t.0[2], Term::Literal(Symbol::new("0")));
            }
            other => panic!("unexpected item {other:?}"),
        }
        assert_eq!(r.lex.0[2], Term::Literal(Symbol::new("0")));
    }

    #[test]
    fn koskenniemi_left_arrows_are_rejected() {
        let src = "
tapes: lex*
alphabet surface: a
rule r: * - a - * <= * - a - *
";
        let err = parse_grammar(src).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("surface-requires-lexical"), "{msg}");
        assert!(msg.contains("`=>` and `<=>`"), "{msg}");
    }

    #[test]
    fn ellipsis_is_left_only() {
        let src = "
tapes: lex*
alphabet surface: a
alphabet lex: a
set s = { a }
rule r: * - X - * => * - X - ... (a) where X in s
";
        let g = parse_grammar(src).unwrap();
        let diags = validate_grammar(&g);
        assert!(diags
            .iter()
            .any(|d| d.severity == Severity::Error && d.message.contains("only supported in the left")));
    }

    #[test]
    fn unbounded_variables_are_errors() {
        let src = "
tapes: lex*
alphabet surface: a
rule r: * - X - * => * - X - *
";
        let g = parse_grammar(src).unwrap();
        let diags = validate_grammar(&g);
        assert!(diags
            .iter()
            .any(|d| d.severity == Severity::Error && d.message.contains("unbounded variable `X`")));
        assert!(compute_feasible_pairs(&g).is_err());
    }

    #[test]
    fn undeclared_symbols_are_errors() {
        let src = "
tapes: pattern* root
alphabet surface: a
alphabet pattern: v1
alphabet root: k
rule r: * - a - * => * - (v9, 0) - *
";
        let g = parse_grammar(src).unwrap();
        let diags = validate_grammar(&g);
        assert!(diags.iter().any(|d| d.message.contains("undeclared symbol `v9`")), "{diags:?}");
    }

    #[test]
    fn feasible_pairs_respect_joint_constraints() {
        let g = toy();
        let pairs = compute_feasible_pairs(&g).unwrap();
        // r9 contributes exactly the three associated vowel pairs, not the
        // 2x3 product of slots and vowels.
        let r9: Vec<String> = pairs
            .iter()
            .filter(|p| p.lex.0[0].as_str().starts_with('v'))
            .map(|p| p.to_string())
            .collect();
        assert_eq!(r9, ["(v1,0,a):a", "(v1,0,u):u", "(v2,0,i):i"]);
    }

    #[test]
    fn feasible_pairs_are_order_independent_and_idempotent() {
        let g = toy();
        let base = compute_feasible_pairs(&g).unwrap();
        let mut shuffled = g.clone();
        shuffled.rules.reverse();
        assert_eq!(base, compute_feasible_pairs(&shuffled).unwrap());
        assert_eq!(base, compute_feasible_pairs(&g).unwrap());
        let sorted_ok = base.windows(2).all(|w| w[0] < w[1]);
        assert!(sorted_ok, "pairs must be strictly sorted and deduplicated");
    }

    #[test]
    fn print_then_reparse_is_identity() {
        let g = toy();
        let printed = g.to_string();
        let again = parse_grammar(&printed).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn inline_sets_and_is_alias() {
        let src = "
tapes: lex*
alphabet surface: a b
alphabet lex: a b
rule r: * - X - * => * - X - * where X is { a b }
";
        let g = parse_grammar(src).unwrap();
        let pairs = compute_feasible_pairs(&g).unwrap();
        assert_eq!(pairs.len(), 2);
    }

    #[test]
    fn default_rule_warning() {
        let src = "
tapes: lex*
alphabet surface: a
alphabet lex: a
rule r: a - a - * => * - a - *
";
        let g = parse_grammar(src).unwrap();
        let diags = validate_grammar(&g);
        assert!(diags
            .iter()
            .any(|d| d.severity == Severity::Warning && d.message.contains("default rule")));
    }
}
