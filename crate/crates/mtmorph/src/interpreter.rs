//! Direct rule interpreter: an exhaustive backtracking search that partitions
//! the lexical tapes into tuples, licenses each tuple:surface step by the
//! grammar's rules, and enforces contexts, constraints, and coercion.
//!
//! The same search core drives synthesis (build the surface), checking
//! (match a given surface against given tapes), and recognition (match a
//! surface against lexicon tries). No memoization is attempted: ellipsis
//! contexts make a step's validity depend on arbitrarily distant history, so
//! positions alone do not determine the future.

use std::collections::BTreeMap;

use crate::grammar::{ContextItem, Grammar, Rule};
use crate::lexicon::Cursor;
use crate::model::{
    display_surface, match_surface, match_tuple, Bindings, Symbol, SymbolTuple, Term, TuplePair,
};

/// Read access to one lexical tape. Implementations are cheap to clone; the
/// search clones readers at every branch point.
pub trait TapeReader: Clone {
    /// Symbols readable at the current position.
    fn options(&self) -> Vec<Symbol>;
    /// All successor readers after reading `sym`; empty when `sym` is not
    /// readable. More than one successor means a genuine branch (a lexicon
    /// path that both ends a morpheme and continues into a longer one).
    fn advance(&self, sym: &Symbol) -> Vec<Self>;
    /// True when the tape may stop here: fully consumed for raw tapes, at a
    /// morpheme boundary for lexicon-backed tapes.
    fn exhausted(&self) -> bool;
    /// Completed lexicon entry indices, for lexicon-backed readers.
    fn entries(&self) -> Vec<usize> {
        Vec::new()
    }
}

/// A reader over a fixed symbol sequence.
#[derive(Clone, Debug)]
pub struct RawReader<'a> {
    tape: &'a [Symbol],
    pos: usize,
}

impl<'a> RawReader<'a> {
    pub fn new(tape: &'a [Symbol]) -> Self {
        RawReader { tape, pos: 0 }
    }
}

impl TapeReader for RawReader<'_> {
    fn options(&self) -> Vec<Symbol> {
        self.tape.get(self.pos).cloned().into_iter().collect()
    }

    fn advance(&self, sym: &Symbol) -> Vec<Self> {
        match self.tape.get(self.pos) {
            Some(s) if s == sym => vec![RawReader { tape: self.tape, pos: self.pos + 1 }],
            _ => Vec::new(),
        }
    }

    fn exhausted(&self) -> bool {
        self.pos == self.tape.len()
    }
}

impl TapeReader for Cursor<'_> {
    fn options(&self) -> Vec<Symbol> {
        Cursor::options(self)
    }

    fn advance(&self, sym: &Symbol) -> Vec<Self> {
        Cursor::advance(self, sym)
    }

    fn exhausted(&self) -> bool {
        self.at_boundary()
    }

    fn entries(&self) -> Vec<usize> {
        self.consumed().to_vec()
    }
}

/// What the search does with surface symbols: collect them, or match them
/// against a target string.
#[derive(Clone)]
pub(crate) enum SurfaceGoal<'a> {
    Build(Vec<Symbol>),
    Match { target: &'a [Symbol], pos: usize },
}

impl<'a> SurfaceGoal<'a> {
    pub(crate) fn build() -> Self {
        SurfaceGoal::Build(Vec::new())
    }

    pub(crate) fn matching(target: &'a [Symbol]) -> Self {
        SurfaceGoal::Match { target, pos: 0 }
    }

    /// Extends the surface by `run`, or fails when the target disagrees.
    pub(crate) fn emit(&self, run: &[Symbol]) -> Option<Self> {
        match self {
            SurfaceGoal::Build(out) => {
                let mut next = out.clone();
                next.extend_from_slice(run);
                Some(SurfaceGoal::Build(next))
            }
            SurfaceGoal::Match { target, pos } => {
                let end = pos + run.len();
                if end <= target.len() && &target[*pos..end] == run {
                    Some(SurfaceGoal::Match { target, pos: end })
                } else {
                    None
                }
            }
        }
    }

    /// The surface produced so far.
    pub(crate) fn emitted(&self) -> &[Symbol] {
        match self {
            SurfaceGoal::Build(out) => out,
            SurfaceGoal::Match { target, pos } => &target[..*pos],
        }
    }

    pub(crate) fn finished(&self) -> bool {
        match self {
            SurfaceGoal::Build(_) => true,
            SurfaceGoal::Match { target, pos } => *pos == target.len(),
        }
    }
}

/// Per-tape progress bookkeeping for lexicon-backed searches. An entry that
/// is read without contributing any surface symbol is a silent morpheme;
/// reading the *same* entry silently twice adds nothing an analysis could
/// distinguish, and allowing it would make the analysis set infinite, so such
/// repeats are pruned.
#[derive(Clone, Debug, Default)]
pub(crate) struct TapeProgress {
    emitted_in_current: bool,
    silent_done: Vec<usize>,
}

impl TapeProgress {
    /// Advances the bookkeeping for one step. `moved` is whether this tape
    /// consumed a symbol, `emits` whether the step wrote any surface, and
    /// `pre_entries`/`reader` identify entries completed by the step.
    /// `None` means the branch is pruned (a repeated silent morpheme).
    pub(crate) fn advance<R: TapeReader>(
        &self,
        moved: bool,
        emits: bool,
        pre_entries: usize,
        reader: &R,
    ) -> Option<TapeProgress> {
        if !moved {
            return Some(self.clone());
        }
        let mut next = self.clone();
        next.emitted_in_current |= emits;
        let entries = reader.entries();
        for &e in &entries[pre_entries..] {
            if !next.emitted_in_current {
                if next.silent_done.contains(&e) {
                    return None;
                }
                next.silent_done.push(e);
            }
            next.emitted_in_current = false;
        }
        Some(next)
    }
}

/// One licensed step of a derivation.
#[derive(Clone, Debug)]
pub struct Step {
    pub pair: TuplePair,
    /// Index into `Grammar::rules` of the licensing rule.
    pub rule: usize,
    /// Variable bindings of the licensing match (diagnostic; not identity).
    pub env: Bindings,
    /// Surface span `[start, end)` this step produced.
    pub surf_start: usize,
    pub surf_end: usize,
}

/// A complete partition of the input into licensed steps. Identity is the
/// sequence of (pair, rule) choices; bindings and spans are derived data.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub steps: Vec<Step>,
}

impl Derivation {
    fn key(&self) -> Vec<(&TuplePair, usize)> {
        self.steps.iter().map(|s| (&s.pair, s.rule)).collect()
    }

    pub fn surface(&self) -> Vec<Symbol> {
        self.steps.iter().flat_map(|s| s.pair.surf.iter().cloned()).collect()
    }

    pub fn lex_tuples(&self) -> Vec<&SymbolTuple> {
        self.steps.iter().map(|s| &s.pair.lex).collect()
    }

    pub fn rule_ids<'g>(&self, g: &'g Grammar) -> Vec<&'g str> {
        self.steps.iter().map(|s| g.rules[s.rule].id.as_str()).collect()
    }

    /// One line per step: `rule TAB tuple TAB surface` with `0` for an empty
    /// surface and spaces between multiple surface symbols.
    pub fn trace(&self, g: &Grammar) -> String {
        let mut out = String::new();
        for s in &self.steps {
            out.push_str(&g.rules[s.rule].id);
            out.push('\t');
            out.push_str(&s.pair.lex.to_string());
            out.push('\t');
            out.push_str(&display_surface(&s.pair.surf));
            out.push('\n');
        }
        out
    }

    /// True when any step was licensed by a deletion rule.
    pub fn uses_deletion(&self, g: &Grammar) -> bool {
        self.steps.iter().any(|s| g.rules[s.rule].is_deletion())
    }
}

impl PartialEq for Derivation {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Derivation {}

impl PartialOrd for Derivation {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Derivation {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let a: Vec<(usize, &TuplePair)> = self.steps.iter().map(|s| (s.rule, &s.pair)).collect();
        let b: Vec<(usize, &TuplePair)> = other.steps.iter().map(|s| (s.rule, &s.pair)).collect();
        a.cmp(&b)
    }
}

/// Output filtering for synthesis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Fully vocalised: no deletion rule fires.
    Full,
    /// Everything the grammar licenses.
    All,
    /// Maximal deletion: keep a derivation only if no sibling over the same
    /// tuple sequence deletes a strict superset of its steps.
    Bare,
}

pub fn filter_mode(g: &Grammar, mode: Mode, derivations: Vec<Derivation>) -> Vec<Derivation> {
    match mode {
        Mode::All => derivations,
        Mode::Full => derivations.into_iter().filter(|d| !d.uses_deletion(g)).collect(),
        Mode::Bare => {
            let deleted = |d: &Derivation| -> std::collections::BTreeSet<usize> {
                d.steps
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| s.pair.surf.is_empty())
                    .map(|(i, _)| i)
                    .collect()
            };
            let keys: Vec<Vec<&SymbolTuple>> = derivations.iter().map(|d| d.lex_tuples()).collect();
            let dels: Vec<_> = derivations.iter().map(deleted).collect();
            derivations
                .iter()
                .enumerate()
                .filter(|(i, _)| {
                    !dels.iter().enumerate().any(|(j, dj)| {
                        j != *i && keys[j] == keys[*i] && dj.is_superset(&dels[*i]) && dj != &dels[*i]
                    })
                })
                .map(|(_, d)| d.clone())
                .collect()
        }
    }
}

/// A finished search result: the derivation plus the final readers (from
/// which lexicon-backed searches extract the consumed morphemes).
pub struct SearchOutput<R> {
    pub derivation: Derivation,
    pub readers: Vec<R>,
}

impl<R: TapeReader> SearchOutput<R> {
    pub fn entries(&self) -> Vec<Vec<usize>> {
        self.readers.iter().map(TapeReader::entries).collect()
    }
}

/// Matches a left lexical context against the tuple history. Items right of
/// an ellipsis must sit adjacent to the current step; the block left of it
/// anchors at the *nearest* tuple that could match its last item: tuples in
/// the gap must not even shape-match it, so scanning leftward, the first
/// shape-matching tuple is the only permitted anchor.
pub fn match_llc(
    g: &Grammar,
    rule: &Rule,
    history: &[SymbolTuple],
    env: &Bindings,
) -> Option<Bindings> {
    let items = &rule.llc;
    let ellipsis_at = items.iter().position(|i| *i == ContextItem::Ellipsis);
    let (pre, post): (&[ContextItem], &[ContextItem]) = match ellipsis_at {
        None => (&[], items),
        Some(i) => (&items[..i], &items[i + 1..]),
    };

    // The post block sits immediately left of the step.
    let p = post.len();
    if history.len() < p {
        return None;
    }
    let mut cur = env.clone();
    for (item, tuple) in post.iter().zip(&history[history.len() - p..]) {
        let ContextItem::Tuple(pat) = item else { return None };
        cur = match_tuple(pat, tuple, &cur)?;
        if !g.constraints_ok(rule, &cur) {
            return None;
        }
    }
    if ellipsis_at.is_none() || pre.is_empty() {
        return Some(cur);
    }

    // The pre block anchors at the nearest shape-match of its last item.
    let ContextItem::Tuple(last_pat) = &pre[pre.len() - 1] else { return None };
    let gap_end = history.len() - p;
    let mut q = gap_end;
    while q > 0 {
        q -= 1;
        if !g.shape_matches(rule, last_pat, &history[q]) {
            continue;
        }
        // Anchor found: the pre block must end exactly here.
        if q + 1 < pre.len() {
            return None;
        }
        let start = q + 1 - pre.len();
        let mut out = cur;
        for (item, tuple) in pre.iter().zip(&history[start..=q]) {
            let ContextItem::Tuple(pat) = item else { return None };
            out = match_tuple(pat, tuple, &out)?;
            if !g.constraints_ok(rule, &out) {
                return None;
            }
        }
        return Some(out);
    }
    None
}

/// Matches a right lexical context against the tuples following the step.
pub fn match_rlc(
    g: &Grammar,
    rule: &Rule,
    future: &[SymbolTuple],
    env: &Bindings,
) -> Option<Bindings> {
    if future.len() < rule.rlc.len() {
        return None;
    }
    let mut cur = env.clone();
    for (item, tuple) in rule.rlc.iter().zip(future) {
        let ContextItem::Tuple(pat) = item else { return None };
        cur = match_tuple(pat, tuple, &cur)?;
        if !g.constraints_ok(rule, &cur) {
            return None;
        }
    }
    Some(cur)
}

/// Matches a surface context pattern as a suffix of `left` (for LSC).
fn match_lsc(pattern: &[Term], left: &[Symbol], env: &Bindings) -> Option<Bindings> {
    if left.len() < pattern.len() {
        return None;
    }
    match_surface(pattern, &left[left.len() - pattern.len()..], env)
}

/// Matches a surface context pattern as a prefix of `right` (for RSC).
fn match_rsc(pattern: &[Term], right: &[Symbol], env: &Bindings) -> Option<Bindings> {
    if right.len() < pattern.len() {
        return None;
    }
    match_surface(pattern, &right[..pattern.len()], env)
}

struct Ctx<'g> {
    g: &'g Grammar,
    /// Per-rule positive variable domains, precomputed.
    domains: Vec<BTreeMap<String, Vec<Symbol>>>,
    coercive: Vec<usize>,
}

impl<'g> Ctx<'g> {
    fn new(g: &'g Grammar) -> Self {
        let domains = g
            .rules
            .iter()
            .map(|r| {
                g.positive_domains(r)
                    .into_iter()
                    .map(|(k, v)| (k, v.into_iter().collect()))
                    .collect()
            })
            .collect();
        let coercive =
            g.rules.iter().enumerate().filter(|(_, r)| r.coercive).map(|(i, _)| i).collect();
        Ctx { g, domains, coercive }
    }
}

/// A step candidate before rule-choice expansion.
struct DraftStep {
    pair: TuplePair,
    cands: Vec<(usize, Bindings)>,
    surf_start: usize,
    surf_end: usize,
}

/// Runs the search over arbitrary readers. With `target` given, the surface
/// is matched against it; otherwise it is built. Zero-step results (nothing
/// consumed, nothing produced) are not reported.
pub fn run_readers<R: TapeReader>(
    g: &Grammar,
    readers: Vec<R>,
    target: Option<&[Symbol]>,
) -> Vec<SearchOutput<R>> {
    assert_eq!(readers.len(), g.arity(), "one reader per lexical tape");
    let ctx = Ctx::new(g);
    let surf = match target {
        Some(t) => SurfaceGoal::matching(t),
        None => SurfaceGoal::build(),
    };
    let progs = vec![TapeProgress::default(); readers.len()];
    let mut steps = Vec::new();
    let mut history = Vec::new();
    let mut out = Vec::new();
    dfs(&ctx, &readers, &progs, &surf, &mut steps, &mut history, &mut out);

    // Deterministic order and deduplication by (derivation, consumed entries).
    out.sort_by(|a, b| {
        a.derivation
            .cmp(&b.derivation)
            .then_with(|| a.entries().cmp(&b.entries()))
    });
    out.dedup_by(|a, b| a.derivation == b.derivation && a.entries() == b.entries());
    out
}

fn dfs<R: TapeReader>(
    ctx: &Ctx,
    readers: &[R],
    progs: &[TapeProgress],
    surf: &SurfaceGoal,
    steps: &mut Vec<DraftStep>,
    history: &mut Vec<SymbolTuple>,
    out: &mut Vec<SearchOutput<R>>,
) {
    if surf.finished() && readers.iter().all(TapeReader::exhausted) && !steps.is_empty() {
        finalize(ctx, steps, history, surf.emitted(), readers, out);
        // Fall through: lexicon-backed tapes may still extend with further
        // (silently realized) morphemes.
    }

    // Enumerate candidates across rules, grouped by the observable step.
    type Group<R> = (Vec<Vec<R>>, Vec<(usize, Bindings)>);
    let mut groups: BTreeMap<(SymbolTuple, Vec<Symbol>), Group<R>> = BTreeMap::new();
    for (rule_idx, rule) in ctx.g.rules.iter().enumerate() {
        for (tuple, env, alts) in lex_matches(ctx, rule_idx, readers) {
            let Some(env) = match_llc(ctx.g, rule, history, &env) else { continue };
            for (run, env) in surface_options(ctx, rule_idx, &env) {
                let Some(env) = match_lsc(&rule.lsc, surf.emitted(), &env) else { continue };
                if !ctx.g.constraints_ok(rule, &env) {
                    continue;
                }
                let key = (tuple.clone(), run);
                let entry = groups.entry(key).or_insert_with(|| (alts.clone(), Vec::new()));
                entry.1.push((rule_idx, env));
            }
        }
    }

    for ((tuple, run), (alts, cands)) in groups {
        let Some(next_surf) = surf.emit(&run) else { continue };
        let emits = !run.is_empty();
        let surf_start = surf.emitted().len();
        let surf_end = surf_start + run.len();
        steps.push(DraftStep { pair: TuplePair::new(tuple.clone(), run), cands, surf_start, surf_end });
        history.push(tuple.clone());

        // Cartesian product over per-tape reader alternatives.
        let mut combos: Vec<Vec<R>> = vec![Vec::new()];
        for tape_alts in &alts {
            let mut next = Vec::new();
            for combo in &combos {
                for alt in tape_alts {
                    let mut c = combo.clone();
                    c.push(alt.clone());
                    next.push(c);
                }
            }
            combos = next;
        }
        for combo in combos {
            let mut next_progs = Vec::with_capacity(progs.len());
            let mut pruned = false;
            for (i, prog) in progs.iter().enumerate() {
                let moved = !tuple.0[i].is_epsilon();
                let pre = readers[i].entries().len();
                match prog.advance(moved, emits, pre, &combo[i]) {
                    Some(p) => next_progs.push(p),
                    None => {
                        pruned = true;
                        break;
                    }
                }
            }
            if pruned {
                continue;
            }
            dfs(ctx, &combo, &next_progs, &next_surf, steps, history, out);
        }

        history.pop();
        steps.pop();
    }
}

/// Matches a rule's LEX tuple against the readers: all instantiations of the
/// pattern readable at the current position, with per-tape successor
/// alternatives. `0` cells leave their tape untouched.
fn lex_matches<R: TapeReader>(
    ctx: &Ctx,
    rule_idx: usize,
    readers: &[R],
) -> Vec<(SymbolTuple, Bindings, Vec<Vec<R>>)> {
    let rule = &ctx.g.rules[rule_idx];
    let mut results = Vec::new();
    let mut cells: Vec<Symbol> = Vec::with_capacity(readers.len());
    let mut alts: Vec<Vec<R>> = Vec::with_capacity(readers.len());
    descend(ctx, rule_idx, rule, readers, 0, &Bindings::new(), &mut cells, &mut alts, &mut results);
    return results;

    #[allow(clippy::too_many_arguments)]
    fn descend<R: TapeReader>(
        ctx: &Ctx,
        rule_idx: usize,
        rule: &Rule,
        readers: &[R],
        i: usize,
        env: &Bindings,
        cells: &mut Vec<Symbol>,
        alts: &mut Vec<Vec<R>>,
        results: &mut Vec<(SymbolTuple, Bindings, Vec<Vec<R>>)>,
    ) {
        if i == readers.len() {
            results.push((SymbolTuple(cells.clone()), env.clone(), alts.clone()));
            return;
        }
        let term = &rule.lex.0[i];
        match term {
            Term::Literal(s) if s.is_epsilon() => {
                cells.push(s.clone());
                alts.push(vec![readers[i].clone()]);
                descend(ctx, rule_idx, rule, readers, i + 1, env, cells, alts, results);
                alts.pop();
                cells.pop();
            }
            Term::Literal(s) => {
                let next = readers[i].advance(s);
                if !next.is_empty() {
                    cells.push(s.clone());
                    alts.push(next);
                    descend(ctx, rule_idx, rule, readers, i + 1, env, cells, alts, results);
                    alts.pop();
                    cells.pop();
                }
            }
            Term::Variable(v) => {
                let domain = ctx.domains[rule_idx].get(v);
                for sym in readers[i].options() {
                    if !domain.is_some_and(|d| d.contains(&sym)) {
                        continue;
                    }
                    let mut next_env = env.clone();
                    if !next_env.unify(v, &sym) || !ctx.g.constraints_ok(rule, &next_env) {
                        continue;
                    }
                    let next = readers[i].advance(&sym);
                    if next.is_empty() {
                        continue;
                    }
                    cells.push(sym.clone());
                    alts.push(next);
                    descend(ctx, rule_idx, rule, readers, i + 1, &next_env, cells, alts, results);
                    alts.pop();
                    cells.pop();
                }
            }
            // Wildcards are rejected by validation; nothing to read here.
            Term::Any => {}
        }
    }
}

/// Instantiates the rule's surface form under `env`, enumerating any
/// still-unbound variables over their domains.
fn surface_options(ctx: &Ctx, rule_idx: usize, env: &Bindings) -> Vec<(Vec<Symbol>, Bindings)> {
    let rule = &ctx.g.rules[rule_idx];
    let mut results = Vec::new();
    let mut run: Vec<Symbol> = Vec::with_capacity(rule.surf.len());
    descend(ctx, rule_idx, rule, 0, env, &mut run, &mut results);
    return results;

    fn descend(
        ctx: &Ctx,
        rule_idx: usize,
        rule: &Rule,
        i: usize,
        env: &Bindings,
        run: &mut Vec<Symbol>,
        results: &mut Vec<(Vec<Symbol>, Bindings)>,
    ) {
        if i == rule.surf.len() {
            results.push((run.clone(), env.clone()));
            return;
        }
        match &rule.surf[i] {
            Term::Literal(s) => {
                run.push(s.clone());
                descend(ctx, rule_idx, rule, i + 1, env, run, results);
                run.pop();
            }
            Term::Variable(v) => {
                if let Some(sym) = env.get(v) {
                    run.push(sym.clone());
                    descend(ctx, rule_idx, rule, i + 1, env, run, results);
                    run.pop();
                    return;
                }
                let Some(domain) = ctx.domains[rule_idx].get(v) else { return };
                for sym in domain {
                    let mut next_env = env.clone();
                    if !next_env.unify(v, sym) || !ctx.g.constraints_ok(rule, &next_env) {
                        continue;
                    }
                    run.push(sym.clone());
                    descend(ctx, rule_idx, rule, i + 1, &next_env, run, results);
                    run.pop();
                }
            }
            Term::Any => {}
        }
    }
}

/// Validates a complete partition: per-step right contexts and final
/// constraints, then coercion, then expansion into concrete derivations.
fn finalize<R: TapeReader>(
    ctx: &Ctx,
    steps: &[DraftStep],
    history: &[SymbolTuple],
    surface: &[Symbol],
    readers: &[R],
    out: &mut Vec<SearchOutput<R>>,
) {
    let g = ctx.g;
    let mut survivors: Vec<Vec<(usize, Bindings)>> = Vec::with_capacity(steps.len());
    for (i, step) in steps.iter().enumerate() {
        let mut keep = Vec::new();
        for (rule_idx, env) in &step.cands {
            let rule = &g.rules[*rule_idx];
            let Some(env) = match_rlc(g, rule, &history[i + 1..], env) else { continue };
            let Some(env) = match_rsc(&rule.rsc, &surface[step.surf_end..], &env) else { continue };
            if g.constraints_final(rule, &env) {
                keep.push((*rule_idx, env));
            }
        }
        if keep.is_empty() {
            return;
        }
        survivors.push(keep);
    }

    // Coercion: wherever a `<=>` rule's lexical side matches, some matching
    // instantiation must also realize its surface side here.
    for &rc in &ctx.coercive {
        let rule = &g.rules[rc];
        for (i, step) in steps.iter().enumerate() {
            let Some(env) = lexical_match_at(g, rule, history, i) else { continue };
            if !surface_complies(g, rule, &env, step, surface) {
                return;
            }
        }
    }

    // Expand per-step rule choices into concrete derivations.
    let mut expansions: Vec<Vec<Step>> = vec![Vec::new()];
    for (i, cands) in survivors.iter().enumerate() {
        let mut next = Vec::with_capacity(expansions.len() * cands.len());
        for prefix in &expansions {
            for (rule_idx, env) in cands {
                let mut steps_so_far = prefix.clone();
                steps_so_far.push(Step {
                    pair: steps[i].pair.clone(),
                    rule: *rule_idx,
                    env: env.clone(),
                    surf_start: steps[i].surf_start,
                    surf_end: steps[i].surf_end,
                });
                next.push(steps_so_far);
            }
        }
        expansions = next;
    }
    for steps in expansions {
        out.push(SearchOutput { derivation: Derivation { steps }, readers: readers.to_vec() });
    }
}

/// The unique binding (if any) under which `rule`'s lexical side (LLC, LEX,
/// RLC) matches position `i` of the tuple history.
fn lexical_match_at(
    g: &Grammar,
    rule: &Rule,
    history: &[SymbolTuple],
    i: usize,
) -> Option<Bindings> {
    let env = match_tuple(&rule.lex, &history[i], &Bindings::new())?;
    if !g.constraints_ok(rule, &env) {
        return None;
    }
    let env = match_llc(g, rule, &history[..i], &env)?;
    let env = match_rlc(g, rule, &history[i + 1..], &env)?;
    if g.constraints_ok(rule, &env) {
        Some(env)
    } else {
        None
    }
}

/// Whether the rule's surface side can be unified with what step `i`
/// actually wrote, in its actual surface context.
fn surface_complies(
    g: &Grammar,
    rule: &Rule,
    env: &Bindings,
    step: &DraftStep,
    surface: &[Symbol],
) -> bool {
    let run = &surface[step.surf_start..step.surf_end];
    let Some(env) = match_surface(&rule.surf, run, env) else { return false };
    let Some(env) = match_lsc(&rule.lsc, &surface[..step.surf_start], &env) else { return false };
    let Some(env) = match_rsc(&rule.rsc, &surface[step.surf_end..], &env) else { return false };
    g.constraints_final(rule, &env)
}

/// Builds all surface realizations of the given raw tapes.
pub fn synthesize(g: &Grammar, tapes: &[Vec<Symbol>]) -> Vec<Derivation> {
    let readers: Vec<RawReader> = tapes.iter().map(|t| RawReader::new(t)).collect();
    let mut derivs: Vec<Derivation> =
        run_readers(g, readers, None).into_iter().map(|o| o.derivation).collect();
    derivs.dedup();
    derivs
}

/// Checks a specific tapes/surface correspondence.
pub fn check(g: &Grammar, tapes: &[Vec<Symbol>], surface: &[Symbol]) -> Vec<Derivation> {
    let readers: Vec<RawReader> = tapes.iter().map(|t| RawReader::new(t)).collect();
    let mut derivs: Vec<Derivation> =
        run_readers(g, readers, Some(surface)).into_iter().map(|o| o.derivation).collect();
    derivs.dedup();
    derivs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_grammar;

    fn syms(s: &str) -> Vec<Symbol> {
        s.split_whitespace().map(Symbol::new).collect()
    }

    fn surfaces(derivs: &[Derivation]) -> Vec<String> {
        let mut out: Vec<String> = derivs
            .iter()
            .map(|d| d.surface().iter().map(Symbol::as_str).collect::<Vec<_>>().concat())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    const ENGLISHY: &str = "
tapes: lex*
alphabet surface: m o v e d s
alphabet lex: m o v e d s +
set letter = { m o v e d s }
rule r4: * - X - * => * - X - * where X in letter
rule r5: * - 0 - * => * - + - *
rule r6: * - 0 - * <=> v - e - +
";

    #[test]
    fn identity_and_boundary_synthesis() {
        let g = parse_grammar(ENGLISHY).unwrap();
        // `mode` has no v-e-+ span, so nothing triggers the e-deletion rule.
        let derivs = synthesize(&g, &[syms("m o d e +")]);
        assert_eq!(surfaces(&derivs), ["mode"]);
    }

    #[test]
    fn coercion_forces_deletion() {
        let g = parse_grammar(ENGLISHY).unwrap();
        // move+ed: the stem-final e sits between v and +, so r6 compels its
        // deletion; the realization with e surfacing is rejected outright.
        let derivs = synthesize(&g, &[syms("m o v e + e d +")]);
        assert_eq!(surfaces(&derivs), ["moved"]);
        // Both directions: the correspondence checks out, and a wrong one
        // does not.
        assert!(!check(&g, &[syms("m o v e + e d +")], &syms("m o v e d")).is_empty());
        assert!(check(&g, &[syms("m o v e + e d +")], &syms("m o v e e d")).is_empty());
    }

    #[test]
    fn full_mode_tolerates_coerced_deletion() {
        let g = parse_grammar(ENGLISHY).unwrap();
        // r6 deletes lexical material but is coercive, so it does not count
        // against Mode::Full: `moved` still comes out fully vocalised.
        let derivs = synthesize(&g, &[syms("m o v e + e d +")]);
        let full = filter_mode(&g, Mode::Full, derivs);
        assert_eq!(surfaces(&full), ["moved"]);
    }

    const SPREADY: &str = "
tapes: pattern* vocalism
alphabet surface: a u k t
alphabet pattern: v1 k t
alphabet vocalism: a u
set vowel = { a u }
set cons = { k t }
rule rv: * - X - * => * - (v1, X) - * where X in vowel
rule rs: * - X - * => (v1, X) ... - v1 - * where X in vowel
rule rlit: * - X - * => * - (X, 0) - * where X in cons
";

    #[test]
    fn ellipsis_spreads_over_consonants() {
        let g = parse_grammar(SPREADY).unwrap();
        // v1 k v1: the second v1 slot copies the melody a across the k.
        let derivs = synthesize(&g, &[syms("v1 k v1"), syms("a")]);
        assert_eq!(surfaces(&derivs), ["aka"]);
    }

    #[test]
    fn spread_tuples_do_not_block_the_anchor() {
        let g = parse_grammar(SPREADY).unwrap();
        // v1 k v1 t v1: both later v1 slots spread from the one melody
        // tuple. The middle (v1,0):a spread tuple must not shape-match the
        // anchor pattern (v1,X), X being unable to bind 0.
        let derivs = synthesize(&g, &[syms("v1 k v1 t v1"), syms("a")]);
        assert_eq!(surfaces(&derivs), ["akata"]);
    }

    #[test]
    fn nearest_anchor_wins() {
        let g = parse_grammar(SPREADY).unwrap();
        // With melody a u, a spreading v1 after the u tuple must copy u
        // (the nearest melody), never a across it.
        let derivs = synthesize(&g, &[syms("v1 k v1 t v1"), syms("a u")]);
        let got = surfaces(&derivs);
        assert!(got.contains(&"akutu".to_string()), "{got:?}");
        assert!(!got.contains(&"akuta".to_string()), "{got:?}");
    }

    #[test]
    fn bare_mode_keeps_maximal_deletions() {
        let src = "
tapes: lex*
alphabet surface: k a
alphabet lex: k a
set cons = { k }
set vowel = { a }
rule rk: * - X - * => * - X - * where X in cons
rule ra: * - X - * => * - X - * where X in vowel
rule rdel: * - 0 - * => (K1) - (V) - (K2) where V in vowel, K1 in cons, K2 in cons
";
        let g = parse_grammar(src).unwrap();
        let derivs = synthesize(&g, &[syms("k a k")]);
        assert_eq!(surfaces(&derivs), ["kak", "kk"]);
        let bare = filter_mode(&g, Mode::Bare, derivs);
        assert_eq!(surfaces(&bare), ["kk"]);
    }

    #[test]
    fn zero_step_inputs_produce_nothing() {
        let g = parse_grammar(ENGLISHY).unwrap();
        let derivs = synthesize(&g, &[Vec::new()]);
        assert!(derivs.is_empty());
    }
}
