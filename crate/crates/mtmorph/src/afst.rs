//! Compiled finite-state runtime.
//!
//! Each contextual rule compiles to an auxiliary machine over the grammar's
//! feasible LEX:SURF pairs; the context-free default rules merge into one
//! single-state machine. All machines run in lockstep: a pair sequence is
//! accepted when every machine ends in a final state *and* every step is
//! attributed (marked as licensed) by at least one machine.
//!
//! Machines carry a one-symbol storage register. A transition writes either
//! a captured symbol or keeps the register; a guard makes a transition apply
//! only when the register holds a specific symbol.
//!
//! Beyond its explicit transitions, a machine has per-state default
//! transitions. At a given (state, storage, pair), the default applies when
//! no explicit transition passes, unless the pair belongs exclusively to
//! this machine's own rules: a machine never lets its exclusive material
//! pass unlicensed, and a state without a default blocks everything else
//! (that is how context obligations are enforced).

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::grammar::{compute_feasible_pairs, rule_pairs, ContextItem, Grammar, Rule};
use crate::interpreter::{
    Derivation, SearchOutput, Step, SurfaceGoal, TapeProgress, TapeReader,
};
use crate::model::{
    match_surface, match_tuple, Bindings, Symbol, Term, TuplePair, TuplePattern, EPSILON,
};

/// A machine step outcome: successor state, new storage, and the rule this
/// transition attributes the pair to (if it is a marked, licensing arc).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Outcome {
    pub state: usize,
    pub storage: usize,
    pub marked: Option<usize>,
}

/// Input to [`Afst::step`]: a feasible-pair index, or the default transition.
#[derive(Clone, Copy, Debug)]
pub enum StepInput {
    Pair(usize),
    Def,
}

/// One compiled machine.
#[derive(Clone, Debug)]
pub struct Afst {
    pub name: String,
    /// Indices into `Grammar::rules` of the rules this machine realizes.
    pub rules: Vec<usize>,
    pub states: Vec<String>,
    pub start: usize,
    pub finals: Vec<bool>,
    /// Storage alphabet; index 0 is the empty register.
    pub gamma: Vec<Symbol>,
    /// Presentation-order transition schema for dumps.
    schema: Vec<String>,
    /// Explicit transitions keyed by (state, storage, pair index).
    table: BTreeMap<(usize, usize, usize), Vec<Outcome>>,
    /// Default-transition target per state; `None` blocks.
    def_target: Vec<Option<usize>>,
    /// Pairs owned by this machine's rules and no other rule.
    exclusive: Vec<bool>,
}

impl Afst {
    /// All outcomes of reading `input` at `state` with `storage`. An empty
    /// result means the machine blocks this continuation.
    pub fn step(&self, state: usize, input: StepInput, storage: usize) -> Vec<Outcome> {
        let def = |s: usize| {
            self.def_target[s]
                .map(|t| Outcome { state: t, storage, marked: None })
                .into_iter()
                .collect::<Vec<_>>()
        };
        match input {
            StepInput::Def => def(state),
            StepInput::Pair(p) => {
                if let Some(outs) = self.table.get(&(state, storage, p)) {
                    return outs.clone();
                }
                if self.exclusive.get(p).copied().unwrap_or(false) {
                    return Vec::new();
                }
                def(state)
            }
        }
    }

    /// Whether the machine alone accepts a pair-index sequence from its
    /// start configuration.
    pub fn accepts(&self, pairs: &[usize]) -> bool {
        let mut configs: BTreeSet<(usize, usize)> = BTreeSet::new();
        configs.insert((self.start, 0));
        for &p in pairs {
            let mut next = BTreeSet::new();
            for (s, g) in configs {
                for o in self.step(s, StepInput::Pair(p), g) {
                    next.insert((o.state, o.storage));
                }
            }
            if next.is_empty() {
                return false;
            }
            configs = next;
        }
        configs.iter().any(|(s, _)| self.finals[*s])
    }

    /// Renders the machine as its state list and transition schema.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("machine {}\n", self.name));
        out.push_str(&format!("states: {}\n", self.states.join(" ")));
        out.push_str(&format!("start: {}\n", self.states[self.start]));
        let finals: Vec<&str> = self
            .states
            .iter()
            .enumerate()
            .filter(|(i, _)| self.finals[*i])
            .map(|(_, n)| n.as_str())
            .collect();
        out.push_str(&format!("finals: {}\n", finals.join(" ")));
        for line in &self.schema {
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

/// The compiled system: the shared feasible-pair alphabet plus one machine
/// per contextual rule and one for the merged defaults.
#[derive(Clone, Debug)]
pub struct Machines {
    pub feasible: Vec<TuplePair>,
    pub list: Vec<Afst>,
    index: BTreeMap<TuplePair, usize>,
}

impl Machines {
    pub fn pair_index(&self, pair: &TuplePair) -> Option<usize> {
        self.index.get(pair).copied()
    }

    /// The machine realizing the given rule id (also accepts a machine name).
    pub fn machine_for(&self, g: &Grammar, id: &str) -> Option<&Afst> {
        if let Some(m) = self.list.iter().find(|m| m.name == id) {
            return Some(m);
        }
        let (idx, _) = g.rule_by_id(id)?;
        self.list.iter().find(|m| m.rules.contains(&idx))
    }
}

// ---------------------------------------------------------------------------
// Compilation
// ---------------------------------------------------------------------------

/// Write effect of an arc: keep the register or set it to a gamma index.
#[derive(Clone, Copy)]
enum WriteOp {
    Keep,
    Set(usize),
}

/// (from, pair, guard, to, write, marked)
type ArcSpec = (usize, usize, Option<usize>, usize, WriteOp, Option<usize>);

struct Builder<'g> {
    feasible: &'g [TuplePair],
    name: String,
    rules: Vec<usize>,
    states: Vec<String>,
    finals: Vec<bool>,
    def_target: Vec<Option<usize>>,
    start: usize,
    gamma: Vec<Symbol>,
    schema: Vec<String>,
    arcs: Vec<ArcSpec>,
}

impl<'g> Builder<'g> {
    fn new(feasible: &'g [TuplePair], name: impl Into<String>, rules: Vec<usize>) -> Self {
        Builder {
            feasible,
            name: name.into(),
            rules,
            states: Vec::new(),
            finals: Vec::new(),
            def_target: Vec::new(),
            start: 0,
            gamma: vec![Symbol::new(EPSILON)],
            schema: Vec::new(),
            arcs: Vec::new(),
        }
    }

    fn state(&mut self, name: impl Into<String>, is_final: bool) -> usize {
        self.states.push(name.into());
        self.finals.push(is_final);
        self.def_target.push(None);
        self.states.len() - 1
    }

    fn gamma_idx(&mut self, sym: &Symbol) -> usize {
        match self.gamma.iter().position(|s| s == sym) {
            Some(i) => i,
            None => {
                self.gamma.push(sym.clone());
                self.gamma.len() - 1
            }
        }
    }

    fn arc(
        &mut self,
        from: usize,
        pair: usize,
        guard: Option<usize>,
        to: usize,
        write: WriteOp,
        marked: Option<usize>,
    ) {
        self.arcs.push((from, pair, guard, to, write, marked));
    }

    fn line(&mut self, text: String) {
        self.schema.push(text);
    }

    fn def_line(&mut self, state: usize, to: usize) {
        self.def_target[state] = Some(to);
        let line =
            format!("δ({}, Def, 0) = ({}, 0)", self.states[state], self.states[to]);
        self.schema.push(line);
    }

    fn finish(self, exclusive: &BTreeSet<usize>) -> Afst {
        let mut table: BTreeMap<(usize, usize, usize), Vec<Outcome>> = BTreeMap::new();
        for (from, pair, guard, to, write, marked) in &self.arcs {
            for g in 0..self.gamma.len() {
                if guard.is_some_and(|need| need != g) {
                    continue;
                }
                let storage = match write {
                    WriteOp::Keep => g,
                    WriteOp::Set(i) => *i,
                };
                let outcome = Outcome { state: *to, storage, marked: *marked };
                let entry = table.entry((*from, g, *pair)).or_default();
                if !entry.contains(&outcome) {
                    entry.push(outcome);
                }
            }
        }
        let exclusive = (0..self.feasible.len()).map(|i| exclusive.contains(&i)).collect();
        Afst {
            name: self.name,
            rules: self.rules,
            states: self.states,
            start: self.start,
            finals: self.finals,
            gamma: self.gamma,
            schema: self.schema,
            table,
            def_target: self.def_target,
            exclusive,
        }
    }
}

/// The binding under which `pair`'s lexical side matches `pattern` (with the
/// rule's constraints partially checked). Machine context classes are
/// lexical: they disregard how the context tuple happened to surface.
fn lex_class(g: &Grammar, rule: &Rule, pattern: &TuplePattern, pair: &TuplePair) -> Option<Bindings> {
    let env = match_tuple(pattern, &pair.lex, &Bindings::new())?;
    if g.constraints_ok(rule, &env) {
        Some(env)
    } else {
        None
    }
}

/// The binding under which `pair` is one of `rule`'s own LEX:SURF
/// instantiations.
fn own_move(g: &Grammar, rule: &Rule, pair: &TuplePair) -> Option<Bindings> {
    let env = match_tuple(&rule.lex, &pair.lex, &Bindings::new())?;
    let env = match_surface(&rule.surf, &pair.surf, &env)?;
    if g.constraints_ok(rule, &env) {
        Some(env)
    } else {
        None
    }
}

fn render_surf(terms: &[Term]) -> String {
    if terms.is_empty() {
        EPSILON.to_string()
    } else {
        terms.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ")
    }
}

fn render_pair_pattern(rule: &Rule) -> String {
    format!("{}:{}", rule.lex, render_surf(&rule.surf))
}

/// The single tuple of a one-item context, if that is the context's shape.
fn single_tuple(items: &[ContextItem]) -> Option<&TuplePattern> {
    match items {
        [ContextItem::Tuple(t)] => Some(t),
        _ => None,
    }
}

fn context_variables(items: &[ContextItem]) -> BTreeSet<&str> {
    items
        .iter()
        .filter_map(|i| match i {
            ContextItem::Tuple(t) => Some(t.variables()),
            ContextItem::Ellipsis => None,
        })
        .flatten()
        .collect()
}

/// Compiles the whole grammar: feasible pairs, per-rule ownership, one merged
/// machine for default rules, one machine per contextual rule.
pub fn compile(g: &Grammar) -> Result<Machines> {
    let feasible = compute_feasible_pairs(g)?;
    let index: BTreeMap<TuplePair, usize> =
        feasible.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();

    // Ownership per rule, as indices into the feasible list.
    let mut own: Vec<BTreeSet<usize>> = Vec::with_capacity(g.rules.len());
    for rule in &g.rules {
        let pairs = rule_pairs(g, rule)?;
        own.push(pairs.iter().map(|p| index[p]).collect());
    }
    let exclusive_to = |rules: &[usize]| -> BTreeSet<usize> {
        let mut mine: BTreeSet<usize> = BTreeSet::new();
        for &r in rules {
            mine.extend(&own[r]);
        }
        let mut others: BTreeSet<usize> = BTreeSet::new();
        for (r, o) in own.iter().enumerate() {
            if !rules.contains(&r) {
                others.extend(o);
            }
        }
        mine.difference(&others).copied().collect()
    };

    let default_rules: Vec<usize> =
        g.rules.iter().enumerate().filter(|(_, r)| r.is_default_shape()).map(|(i, _)| i).collect();
    let contextual: Vec<usize> =
        (0..g.rules.len()).filter(|i| !default_rules.contains(i)).collect();

    let mut list = Vec::new();
    if g.rules.is_empty() {
        // Degenerate grammar: one machine accepting only the empty sequence.
        let mut b = Builder::new(&feasible, "defaults", Vec::new());
        b.state("s0", true);
        list.push(b.finish(&BTreeSet::new()));
    } else if !default_rules.is_empty() {
        list.push(build_defaults(g, &feasible, &default_rules, &exclusive_to(&default_rules)));
    }
    for idx in contextual {
        let excl = exclusive_to(&[idx]);
        list.push(build_contextual(g, &feasible, idx, &excl)?);
    }
    Ok(Machines { feasible, list, index })
}

/// Compiles just the machine realizing one rule, in the context of its
/// grammar (ownership and the pair alphabet still come from all rules).
pub fn compile_rule(g: &Grammar, id: &str) -> Result<Afst> {
    let machines = compile(g)?;
    machines
        .machine_for(g, id)
        .cloned()
        .ok_or_else(|| Error::UnknownRule(id.to_string()))
}

/// Merged single-state machine for the context-free default rules.
fn build_defaults(
    g: &Grammar,
    feasible: &[TuplePair],
    rule_idxs: &[usize],
    exclusive: &BTreeSet<usize>,
) -> Afst {
    let mut b = Builder::new(feasible, "defaults", rule_idxs.to_vec());
    let s0 = b.state("s0", true);
    b.def_line(s0, s0);
    for &ri in rule_idxs {
        let rule = &g.rules[ri];
        b.line(format!("δ(s0, {}, 0) = (s0, 0)", render_pair_pattern(rule)));
        for (p, pair) in feasible.iter().enumerate() {
            if own_move(g, rule, pair).is_some() {
                b.arc(s0, p, None, s0, WriteOp::Keep, Some(ri));
            }
        }
    }
    b.finish(exclusive)
}

/// Shape dispatch for contextual rules.
fn build_contextual(
    g: &Grammar,
    feasible: &[TuplePair],
    rule_idx: usize,
    exclusive: &BTreeSet<usize>,
) -> Result<Afst> {
    let rule = &g.rules[rule_idx];
    let unsupported = |what: &str| {
        Err(Error::Grammar(format!(
            "rule {}: AFST compilation does not support {what}",
            rule.id
        )))
    };

    let has_ellipsis = rule.llc.contains(&ContextItem::Ellipsis);
    let surf_ctx_free = rule.lsc.is_empty() && rule.rsc.is_empty();

    // Register planning: a left-context variable reused by the surface form
    // must be remembered in storage; one reused by LEX selects a state slot.
    let llc_vars = context_variables(&rule.llc);
    let surf_vars: BTreeSet<&str> = rule.surf.iter().filter_map(Term::as_variable).collect();
    let lex_vars: BTreeSet<&str> = rule.lex.variables().collect();
    let storage_vars: Vec<&str> = llc_vars.intersection(&surf_vars).copied().collect();
    let slot_vars: Vec<&str> =
        llc_vars.intersection(&lex_vars).filter(|v| !storage_vars.contains(v)).copied().collect();
    if storage_vars.len() > 1 {
        return Err(Error::RegisterOverflow {
            rule: rule.id.clone(),
            detail: format!(
                "surface form reuses {} left-context symbols; one register holds one",
                storage_vars.len()
            ),
        });
    }
    if slot_vars.len() > 1 {
        return Err(Error::RegisterOverflow {
            rule: rule.id.clone(),
            detail: format!(
                "LEX reuses {} left-context symbols; one register holds one",
                slot_vars.len()
            ),
        });
    }
    let storage_var = storage_vars.first().copied();
    let slot_var = slot_vars.first().copied();

    if rule.coercive {
        if surf_ctx_free {
            match (single_tuple(&rule.llc), single_tuple(&rule.rlc), has_ellipsis) {
                (Some(llc), Some(rlc), false) if storage_var.is_none() && slot_var.is_none() => {
                    return Ok(build_coercive_watch(g, feasible, rule_idx, llc, rlc, exclusive));
                }
                _ => return unsupported("this coercive context shape"),
            }
        }
        if rule.lsc.len() == 1 && rule.rsc.is_empty() && rule.rlc.is_empty() {
            if let (Some(llc), false) = (single_tuple(&rule.llc), has_ellipsis) {
                return build_surface_product(g, feasible, rule_idx, &rule.lsc[0], llc, exclusive);
            }
        }
        return unsupported("this coercive context shape");
    }

    if !surf_ctx_free {
        return unsupported("surface contexts on licensing rules");
    }

    match (&rule.llc[..], &rule.rlc[..]) {
        ([], [ContextItem::Tuple(rlc)]) => {
            Ok(build_rlc_obligation(g, feasible, rule_idx, rlc, exclusive))
        }
        ([ContextItem::Tuple(llc)], []) => {
            Ok(build_armed(g, feasible, rule_idx, llc, storage_var, slot_var, exclusive))
        }
        ([ContextItem::Tuple(llc)], [ContextItem::Tuple(rlc)]) => {
            if storage_var.is_some() || slot_var.is_some() {
                return unsupported("storage together with a right lexical context");
            }
            Ok(build_armed_obligation(g, feasible, rule_idx, llc, rlc, exclusive))
        }
        ([ContextItem::Tuple(llc), ContextItem::Ellipsis], []) => {
            Ok(build_spread(g, feasible, rule_idx, llc, storage_var, slot_var, exclusive))
        }
        ([ContextItem::Tuple(anchor), ContextItem::Ellipsis, ContextItem::Tuple(post)], [ContextItem::Tuple(rlc)]) => {
            if storage_var.is_some() || slot_var.is_some() {
                return unsupported("storage together with an anchored ellipsis chain");
            }
            Ok(build_anchor_chain(g, feasible, rule_idx, anchor, post, rlc, exclusive))
        }
        _ => unsupported("this context shape"),
    }
}

/// Values a variable may take, per its positive constraints.
fn domain_of(g: &Grammar, rule: &Rule, var: &str) -> Vec<Symbol> {
    g.positive_domains(rule).remove(var).map(|d| d.into_iter().collect()).unwrap_or_default()
}

/// `LLC = [tuple]`, no RLC: arm on the context pair, fire adjacent to it.
/// With a slot variable shared between LLC and LEX, the armed state is
/// per slot value; a storage variable carries the surface symbol to write.
fn build_armed(
    g: &Grammar,
    feasible: &[TuplePair],
    rule_idx: usize,
    llc: &TuplePattern,
    storage_var: Option<&str>,
    slot_var: Option<&str>,
    exclusive: &BTreeSet<usize>,
) -> Afst {
    let rule = &g.rules[rule_idx];
    let mut b = Builder::new(feasible, rule.id.clone(), vec![rule_idx]);
    let s0 = b.state("s0", true);

    let slot_values: Vec<Option<Symbol>> = match slot_var {
        None => vec![None],
        Some(v) => domain_of(g, rule, v).into_iter().map(Some).collect(),
    };
    let armed: BTreeMap<Option<Symbol>, usize> = slot_values
        .iter()
        .map(|sv| {
            let name = match sv {
                None => "s1".to_string(),
                Some(c) => format!("s1_{c}"),
            };
            (sv.clone(), b.state(name, true))
        })
        .collect();

    let arm_pat = format!("{llc}:{}", storage_var.unwrap_or("*"));
    let disp = match slot_var {
        None => "s1".to_string(),
        Some(v) => format!("s1_{v}"),
    };
    b.def_line(s0, s0);
    b.line(format!("δ(*, {arm_pat}, 0) = ({disp}, {})", storage_var.unwrap_or("0")));
    b.line(format!("δ({disp}, Def, 0) = (s0, 0)"));
    b.line(format!(
        "δ({disp}, {}, {}) = (s0, 0)",
        render_pair_pattern(rule),
        storage_var.unwrap_or("0")
    ));

    for (p, pair) in feasible.iter().enumerate() {
        // Arming: any pair whose lexical side matches the left context.
        if let Some(env) = lex_class(g, rule, llc, pair) {
            let slot_key = slot_var.map(|v| env.get(v).cloned()).map(|s| s.expect("slot bound"));
            let to = armed[&slot_key];
            let write = match storage_var {
                None => WriteOp::Keep,
                Some(v) => {
                    let sym = env.get(v).cloned().expect("storage bound by context");
                    WriteOp::Set(b.gamma_idx(&sym))
                }
            };
            for from in 0..b.states.len() {
                b.arc(from, p, None, to, write, None);
            }
        }
        // Own firing: adjacent to the armed context, guarded on storage.
        if let Some(env) = own_move(g, rule, pair) {
            let slot_key = slot_var.map(|v| env.get(v).cloned()).map(|s| s.expect("slot bound"));
            let Some(&from) = armed.get(&slot_key) else { continue };
            let guard = match storage_var {
                None => None,
                Some(v) => env.get(v).map(|sym| b.gamma_idx(sym)),
            };
            b.arc(from, p, guard, s0, WriteOp::Keep, Some(rule_idx));
        }
    }
    for &s in armed.values() {
        b.def_target[s] = Some(s0);
    }
    b.finish(exclusive)
}

/// `LLC = [tuple]`, `RLC = [tuple]`: arm on the left context, fire adjacent,
/// then oblige the next pair to satisfy the right context.
fn build_armed_obligation(
    g: &Grammar,
    feasible: &[TuplePair],
    rule_idx: usize,
    llc: &TuplePattern,
    rlc: &TuplePattern,
    exclusive: &BTreeSet<usize>,
) -> Afst {
    let rule = &g.rules[rule_idx];
    let mut b = Builder::new(feasible, rule.id.clone(), vec![rule_idx]);
    let s0 = b.state("s0", true);
    let s1 = b.state("s1", true);
    let s2 = b.state("s2", false);

    b.def_line(s0, s0);
    b.line(format!("δ(*, {llc}:*, 0) = (s1, 0)"));
    b.line("δ(s1, Def, 0) = (s0, 0)".to_string());
    b.line(format!("δ(s1, {}, 0) = (s2, 0)", render_pair_pattern(rule)));
    b.line(format!("δ(s2, {rlc}:*, 0) = (s1 or s0, 0)"));
    b.def_target[s1] = Some(s0);

    for (p, pair) in feasible.iter().enumerate() {
        let arms = lex_class(g, rule, llc, pair).is_some();
        let satisfies = lex_class(g, rule, rlc, pair).is_some();
        if arms {
            b.arc(s0, p, None, s1, WriteOp::Keep, None);
            b.arc(s1, p, None, s1, WriteOp::Keep, None);
        }
        if satisfies {
            // Leaving the obligation: re-arm when the pair is also a left
            // context, otherwise relax.
            b.arc(s2, p, None, if arms { s1 } else { s0 }, WriteOp::Keep, None);
        }
        if own_move(g, rule, pair).is_some() {
            b.arc(s1, p, None, s2, WriteOp::Keep, Some(rule_idx));
        }
    }
    b.finish(exclusive)
}

/// Coercive `LLC = [tuple]`, `RLC = [tuple]` (surface-context-free): beyond
/// licensing, watch realizations that keep the lexical material and block
/// them if the right context then appears.
fn build_coercive_watch(
    g: &Grammar,
    feasible: &[TuplePair],
    rule_idx: usize,
    llc: &TuplePattern,
    rlc: &TuplePattern,
    exclusive: &BTreeSet<usize>,
) -> Afst {
    let rule = &g.rules[rule_idx];
    let mut b = Builder::new(feasible, rule.id.clone(), vec![rule_idx]);
    let s0 = b.state("s0", true);
    let s1 = b.state("s1", true);
    // After the own pair fired, the right context is obliged.
    let s2 = b.state("s2", false);
    // After the lexical side surfaced otherwise, the right context is banned.
    let s3 = b.state("s3", true);

    b.def_line(s0, s0);
    b.line(format!("δ(*, {llc}:*, 0) = (s1, 0)"));
    b.line("δ(s1, Def, 0) = (s0, 0)".to_string());
    b.line(format!("δ(s1, {}, 0) = (s2, 0)", render_pair_pattern(rule)));
    b.line(format!("δ(s1, {}:*, 0) = (s3, 0)   # lexical side kept", rule.lex));
    b.line(format!("δ(s2, {rlc}:*, 0) = (s0 or s1, 0)"));
    b.line(format!("δ(s3, {rlc}:*, 0) = blocked"));
    b.def_target[s1] = Some(s0);

    for (p, pair) in feasible.iter().enumerate() {
        let arms = lex_class(g, rule, llc, pair).is_some();
        let satisfies = lex_class(g, rule, rlc, pair).is_some();
        let owns = own_move(g, rule, pair).is_some();
        let keeps = !owns && lex_class(g, rule, &rule.lex, pair).is_some();
        if arms {
            for from in [s0, s1, s3] {
                b.arc(from, p, None, s1, WriteOp::Keep, None);
            }
        }
        if owns {
            b.arc(s1, p, None, s2, WriteOp::Keep, Some(rule_idx));
        }
        if keeps {
            b.arc(s1, p, None, s3, WriteOp::Keep, None);
        }
        if satisfies {
            b.arc(s2, p, None, if arms { s1 } else { s0 }, WriteOp::Keep, None);
            // No arc out of s3 on the right context: the coercion bites.
        } else if !arms && !owns {
            // Anything harmless relaxes the watch.
            b.arc(s3, p, None, s0, WriteOp::Keep, None);
        }
    }
    b.finish(exclusive)
}

/// `LLC = [tuple, ...]` (ellipsis), no RLC: the spreading shape. Arm on the
/// context pair and stay armed across unrelated pairs; re-arm (overwriting
/// storage) on a fresh context pair, which is exactly the nearest-anchor
/// reading of the ellipsis.
fn build_spread(
    g: &Grammar,
    feasible: &[TuplePair],
    rule_idx: usize,
    llc: &TuplePattern,
    storage_var: Option<&str>,
    slot_var: Option<&str>,
    exclusive: &BTreeSet<usize>,
) -> Afst {
    let rule = &g.rules[rule_idx];
    let mut b = Builder::new(feasible, rule.id.clone(), vec![rule_idx]);
    let s0 = b.state("s0", true);

    let slot_values: Vec<Option<Symbol>> = match slot_var {
        None => vec![None],
        Some(v) => domain_of(g, rule, v).into_iter().map(Some).collect(),
    };
    let mut armed: BTreeMap<Option<Symbol>, (usize, usize)> = BTreeMap::new();
    for sv in &slot_values {
        let (n1, n2) = match sv {
            None => ("s1".to_string(), "s2".to_string()),
            Some(c) => (format!("s1_{c}"), format!("s2_{c}")),
        };
        let s1 = b.state(n1, true);
        let s2 = b.state(n2, true);
        armed.insert(sv.clone(), (s1, s2));
    }

    // Schema in presentation order; parametric names when slot-expanded.
    let svar = storage_var.unwrap_or("0");
    let (d1, d2) = match slot_var {
        None => ("s1".to_string(), "s2".to_string()),
        Some(v) => (format!("s1_{v}"), format!("s2_{v}")),
    };
    let arm_pat = format!("{llc}:{svar}");
    b.def_line(s0, s0);
    if slot_var.is_none() {
        b.line(format!("δ(s0, {arm_pat}, 0) = ({d1}, {svar})"));
        b.line(format!("δ({d1}, {arm_pat}, 0) = ({d1}, {svar})"));
        b.line(format!("δ({d2}, {arm_pat}, 0) = ({d1}, {svar})"));
    } else {
        b.line(format!("δ(*, {arm_pat}, 0) = ({d1}, {svar})"));
    }
    b.line(format!("δ({d1}, Def, 0) = ({d1}, 0)"));
    b.line(format!("δ({d1}, {}, {svar}) = ({d2}, 0)", render_pair_pattern(rule)));
    b.line(format!("δ({d2}, {}, {svar}) = ({d2}, 0)", render_pair_pattern(rule)));
    b.line(format!("δ({d2}, Def, 0) = ({d1}, 0)"));

    for (p, pair) in feasible.iter().enumerate() {
        if let Some(env) = lex_class(g, rule, llc, pair) {
            let slot_key = slot_var.map(|v| env.get(v).cloned()).map(|s| s.expect("slot bound"));
            let (s1, _) = armed[&slot_key];
            let write = match storage_var {
                None => WriteOp::Keep,
                Some(v) => {
                    let sym = env.get(v).cloned().expect("storage bound by context");
                    WriteOp::Set(b.gamma_idx(&sym))
                }
            };
            for from in 0..b.states.len() {
                b.arc(from, p, None, s1, write, None);
            }
        }
        if let Some(env) = own_move(g, rule, pair) {
            let slot_key = slot_var.map(|v| env.get(v).cloned()).map(|s| s.expect("slot bound"));
            let Some(&(s1, s2)) = armed.get(&slot_key) else { continue };
            let guard = match storage_var {
                None => None,
                Some(v) => env.get(v).map(|sym| b.gamma_idx(sym)),
            };
            b.arc(s1, p, guard, s2, WriteOp::Keep, Some(rule_idx));
            b.arc(s2, p, guard, s2, WriteOp::Keep, Some(rule_idx));
        }
    }
    // The ellipsis: unrelated pairs leave the armed context in force.
    for &(s1, s2) in armed.values() {
        b.def_target[s1] = Some(s1);
        b.def_target[s2] = Some(s1);
    }
    b.finish(exclusive)
}

/// `LLC = [anchor, ..., post]`, `RLC = [tuple]`: fire only when some anchor
/// lies behind (re-anchoring freely, the nearest-anchor reading) and the
/// immediately preceding pair is the post item; then oblige the right
/// context. Tracked with two boolean flags, no storage.
fn build_anchor_chain(
    g: &Grammar,
    feasible: &[TuplePair],
    rule_idx: usize,
    anchor: &TuplePattern,
    post: &TuplePattern,
    rlc: &TuplePattern,
    exclusive: &BTreeSet<usize>,
) -> Afst {
    let rule = &g.rules[rule_idx];
    let mut b = Builder::new(feasible, rule.id.clone(), vec![rule_idx]);
    // State a{m}{p}: m = an anchor lies behind, p = previous pair is post.
    let a00 = b.state("a00", true);
    let a01 = b.state("a01", true);
    let a10 = b.state("a10", true);
    let a11 = b.state("a11", true);
    let oblig = b.state("oblig", false);
    let states = [a00, a01, a10, a11];
    let idx = |m: bool, p: bool| states[(m as usize) * 2 + (p as usize)];

    b.def_line(a00, a00);
    b.line(format!("δ(a_mp, {anchor}:*, 0) = (a10, 0)"));
    b.line(format!("δ(a_mp, {post}:*, 0) = (a_m1, 0)"));
    b.line("δ(a_m1, other, 0) = (a_m0, 0)".to_string());
    b.line(format!("δ(a11, {}, 0) = (oblig, 0)", render_pair_pattern(rule)));
    b.line(format!("δ(oblig, {rlc}:*, 0) = (a_m1, 0)"));
    b.def_target[a01] = Some(a00);
    b.def_target[a10] = Some(a10);
    b.def_target[a11] = Some(a10);

    for (p, pair) in feasible.iter().enumerate() {
        let is_anchor = lex_class(g, rule, anchor, pair).is_some();
        let is_post = lex_class(g, rule, post, pair).is_some();
        let satisfies = lex_class(g, rule, rlc, pair).is_some();
        for m in [false, true] {
            for prev in [false, true] {
                let from = idx(m, prev);
                if is_anchor && is_post {
                    b.arc(from, p, None, idx(true, true), WriteOp::Keep, None);
                } else if is_anchor {
                    b.arc(from, p, None, idx(true, false), WriteOp::Keep, None);
                } else if is_post {
                    b.arc(from, p, None, idx(m, true), WriteOp::Keep, None);
                }
            }
        }
        if own_move(g, rule, pair).is_some() {
            b.arc(a11, p, None, oblig, WriteOp::Keep, Some(rule_idx));
        }
        if satisfies {
            // The anchor stays live behind; the satisfying pair is a post
            // item whenever it post-matches (for these chains it is).
            let to = if is_post { idx(true, true) } else { idx(true, false) };
            b.arc(oblig, p, None, to, WriteOp::Keep, None);
        }
    }
    b.finish(exclusive)
}

/// No LLC, `RLC = [tuple]`: fire freely but oblige the next pair.
fn build_rlc_obligation(
    g: &Grammar,
    feasible: &[TuplePair],
    rule_idx: usize,
    rlc: &TuplePattern,
    exclusive: &BTreeSet<usize>,
) -> Afst {
    let rule = &g.rules[rule_idx];
    let mut b = Builder::new(feasible, rule.id.clone(), vec![rule_idx]);
    let s0 = b.state("s0", true);
    let s1 = b.state("s1", false);
    b.def_line(s0, s0);
    b.line(format!("δ(s0, {}, 0) = (s1, 0)", render_pair_pattern(rule)));
    b.line(format!("δ(s1, {rlc}:*, 0) = (s0 or s1, 0)"));
    for (p, pair) in feasible.iter().enumerate() {
        let owns = own_move(g, rule, pair).is_some();
        let satisfies = lex_class(g, rule, rlc, pair).is_some();
        if owns {
            b.arc(s0, p, None, s1, WriteOp::Keep, Some(rule_idx));
        }
        if satisfies {
            // An own pair can also satisfy the previous obligation.
            b.arc(s1, p, None, if owns { s1 } else { s0 }, WriteOp::Keep, if owns { Some(rule_idx) } else { None });
        }
    }
    b.finish(exclusive)
}

/// Coercive rule with a one-symbol LSC and an adjacent LLC (no RLC): tracked
/// as a product of two flags, "last surface symbol lies in the LSC class"
/// and "previous pair lexically matches the LLC". The own pairs have an arc
/// only where both flags hold; being exclusive, they block everywhere else,
/// which is precisely the coercion.
fn build_surface_product(
    g: &Grammar,
    feasible: &[TuplePair],
    rule_idx: usize,
    lsc: &Term,
    llc: &TuplePattern,
    exclusive: &BTreeSet<usize>,
) -> Result<Afst> {
    let rule = &g.rules[rule_idx];
    let lsc_class: Vec<Symbol> = match lsc {
        Term::Literal(s) => vec![s.clone()],
        Term::Variable(v) => {
            let d = domain_of(g, rule, v);
            if d.is_empty() {
                return Err(Error::Grammar(format!(
                    "rule {}: unbounded variable `{v}` (no positive set constraint)",
                    rule.id
                )));
            }
            d
        }
        Term::Any => {
            return Err(Error::Grammar(format!(
                "rule {}: a wildcard surface context cannot be compiled",
                rule.id
            )))
        }
    };

    let mut b = Builder::new(feasible, rule.id.clone(), vec![rule_idx]);
    // State q{a}{b}: a = last surface symbol is in the LSC class, b = last
    // pair lexically matches the LLC.
    let q00 = b.state("q00", true);
    let q01 = b.state("q01", true);
    let q10 = b.state("q10", true);
    let q11 = b.state("q11", true);
    let states = [q00, q01, q10, q11];
    let idx = |a: bool, bb: bool| states[(a as usize) * 2 + (bb as usize)];

    b.line(format!("δ(q11, {}, 0) = (q00, 0)", render_pair_pattern(rule)));
    b.line("δ(q_ab, p, 0) = (q_a'b', 0) for every other feasible p:".to_string());
    b.line(format!("  a' = last surface symbol of p in {{{}}} (a if p writes nothing)",
        lsc_class.iter().map(Symbol::as_str).collect::<Vec<_>>().join(" ")));
    b.line(format!("  b' = p lexically matches {llc}"));

    for (p, pair) in feasible.iter().enumerate() {
        let owns = own_move(g, rule, pair).is_some();
        let next_b = lex_class(g, rule, llc, pair).is_some();
        let next_a = pair.surf.last().map(|s| lsc_class.contains(s));
        for a in [false, true] {
            for bb in [false, true] {
                let from = idx(a, bb);
                let to = idx(next_a.unwrap_or(a), next_b);
                if owns {
                    if a && bb {
                        b.arc(from, p, None, to, WriteOp::Keep, Some(rule_idx));
                    }
                    // Elsewhere the exclusive own pair blocks: coercion.
                } else {
                    b.arc(from, p, None, to, WriteOp::Keep, None);
                }
            }
        }
    }
    Ok(b.finish(exclusive))
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

/// Runs the machine system over the readers, mirroring the interpreter's
/// search: same tape model, same surface goal, same silent-repeat pruning,
/// so both backends produce identical derivation sets.
/// One machine's (state, storage register) position.
type Config = (usize, usize);

pub fn run_machines<R: TapeReader>(
    machines: &Machines,
    arity: usize,
    readers: Vec<R>,
    target: Option<&[Symbol]>,
) -> Vec<SearchOutput<R>> {
    assert_eq!(readers.len(), arity, "one reader per lexical tape");
    let surf = match target {
        Some(t) => SurfaceGoal::matching(t),
        None => SurfaceGoal::build(),
    };
    let configs: Vec<Config> = machines.list.iter().map(|m| (m.start, 0)).collect();
    let progs = vec![TapeProgress::default(); readers.len()];
    let mut steps: Vec<(TuplePair, BTreeSet<usize>, usize, usize)> = Vec::new();
    let mut out = Vec::new();
    mdfs(machines, &readers, &progs, &surf, &configs, &mut steps, &mut out);

    out.sort_by(|a, b| {
        a.derivation.cmp(&b.derivation).then_with(|| a.entries().cmp(&b.entries()))
    });
    out.dedup_by(|a, b| a.derivation == b.derivation && a.entries() == b.entries());
    out
}

fn mdfs<R: TapeReader>(
    machines: &Machines,
    readers: &[R],
    progs: &[TapeProgress],
    surf: &SurfaceGoal,
    configs: &[Config],
    steps: &mut Vec<(TuplePair, BTreeSet<usize>, usize, usize)>,
    out: &mut Vec<SearchOutput<R>>,
) {
    let all_final = configs
        .iter()
        .zip(&machines.list)
        .all(|((s, _), m)| m.finals[*s]);
    if surf.finished() && readers.iter().all(TapeReader::exhausted) && all_final && !steps.is_empty()
    {
        emit(steps, readers, out);
    }

    'pairs: for (p, pair) in machines.feasible.iter().enumerate() {
        // Readers must supply the lexical side.
        let mut alts: Vec<Vec<R>> = Vec::with_capacity(readers.len());
        for (i, cell) in pair.lex.0.iter().enumerate() {
            if cell.is_epsilon() {
                alts.push(vec![readers[i].clone()]);
            } else {
                let next = readers[i].advance(cell);
                if next.is_empty() {
                    continue 'pairs;
                }
                alts.push(next);
            }
        }
        let Some(next_surf) = surf.emit(&pair.surf) else { continue };

        // Every machine must move; steps are attributed by marked arcs.
        let mut config_sets: Vec<Vec<Outcome>> = Vec::with_capacity(machines.list.len());
        for (m, (state, storage)) in machines.list.iter().zip(configs) {
            let outs = m.step(*state, StepInput::Pair(p), *storage);
            if outs.is_empty() {
                continue 'pairs;
            }
            config_sets.push(outs);
        }

        let emits = !pair.surf.is_empty();
        let surf_start = surf.emitted().len();
        let surf_end = surf_start + pair.surf.len();

        // Product over machine outcome choices.
        let mut combos: Vec<(Vec<Config>, BTreeSet<usize>)> =
            vec![(Vec::new(), BTreeSet::new())];
        for outs in &config_sets {
            let mut next = Vec::new();
            for (cfg, marks) in &combos {
                for o in outs {
                    let mut cfg = cfg.clone();
                    cfg.push((o.state, o.storage));
                    let mut marks = marks.clone();
                    marks.extend(o.marked);
                    next.push((cfg, marks));
                }
            }
            combos = next;
        }

        // Product over reader alternatives.
        let mut reader_combos: Vec<Vec<R>> = vec![Vec::new()];
        for tape_alts in &alts {
            let mut next = Vec::new();
            for combo in &reader_combos {
                for alt in tape_alts {
                    let mut c = combo.clone();
                    c.push(alt.clone());
                    next.push(c);
                }
            }
            reader_combos = next;
        }

        for (cfg, marks) in combos {
            // An unattributed step can never become licensed later.
            if marks.is_empty() {
                continue;
            }
            for combo in &reader_combos {
                let mut next_progs = Vec::with_capacity(progs.len());
                let mut pruned = false;
                for (i, prog) in progs.iter().enumerate() {
                    let moved = !pair.lex.0[i].is_epsilon();
                    let pre = readers[i].entries().len();
                    match prog.advance(moved, emits, pre, &combo[i]) {
                        Some(pr) => next_progs.push(pr),
                        None => {
                            pruned = true;
                            break;
                        }
                    }
                }
                if pruned {
                    continue;
                }
                steps.push((pair.clone(), marks.clone(), surf_start, surf_end));
                mdfs(machines, combo, &next_progs, &next_surf, &cfg, steps, out);
                steps.pop();
            }
        }
    }
}

fn emit<R: TapeReader>(
    steps: &[(TuplePair, BTreeSet<usize>, usize, usize)],
    readers: &[R],
    out: &mut Vec<SearchOutput<R>>,
) {
    let mut expansions: Vec<Vec<Step>> = vec![Vec::new()];
    for (pair, marks, start, end) in steps {
        let mut next = Vec::with_capacity(expansions.len() * marks.len());
        for prefix in &expansions {
            for &rule in marks {
                let mut steps_so_far = prefix.clone();
                steps_so_far.push(Step {
                    pair: pair.clone(),
                    rule,
                    env: Bindings::new(),
                    surf_start: *start,
                    surf_end: *end,
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

/// Machine-backed synthesis over raw tapes.
pub fn synthesize(g: &Grammar, machines: &Machines, tapes: &[Vec<Symbol>]) -> Vec<Derivation> {
    let readers: Vec<crate::interpreter::RawReader> =
        tapes.iter().map(|t| crate::interpreter::RawReader::new(t)).collect();
    let mut derivs: Vec<Derivation> = run_machines(machines, g.arity(), readers, None)
        .into_iter()
        .map(|o| o.derivation)
        .collect();
    derivs.dedup();
    derivs
}

/// Machine-backed correspondence check.
pub fn check(
    g: &Grammar,
    machines: &Machines,
    tapes: &[Vec<Symbol>],
    surface: &[Symbol],
) -> Vec<Derivation> {
    let readers: Vec<crate::interpreter::RawReader> =
        tapes.iter().map(|t| crate::interpreter::RawReader::new(t)).collect();
    let mut derivs: Vec<Derivation> = run_machines(machines, g.arity(), readers, Some(surface))
        .into_iter()
        .map(|o| o.derivation)
        .collect();
    derivs.dedup();
    derivs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_grammar;
    use crate::interpreter;
    use crate::model::SymbolTuple;

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

    fn engines_agree(g: &Grammar, m: &Machines, tapes: &[Vec<Symbol>]) {
        let mut a = interpreter::synthesize(g, tapes);
        let mut b = synthesize(g, m, tapes);
        a.sort();
        b.sort();
        let ak: Vec<Vec<(usize, TuplePair)>> = a
            .iter()
            .map(|d| d.steps.iter().map(|s| (s.rule, s.pair.clone())).collect())
            .collect();
        let bk: Vec<Vec<(usize, TuplePair)>> = b
            .iter()
            .map(|d| d.steps.iter().map(|s| (s.rule, s.pair.clone())).collect())
            .collect();
        assert_eq!(ak, bk, "engines disagree on {tapes:?}");
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
    fn english_machine_count_and_storage() {
        let g = parse_grammar(ENGLISHY).unwrap();
        let m = compile(&g).unwrap();
        // One merged defaults machine (r4, r5) plus the coercive r6.
        assert_eq!(m.list.len(), 2);
        assert_eq!(m.list[0].name, "defaults");
        assert_eq!(m.list[1].name, "r6");
        // A single-tape grammar needs no storage at all.
        for machine in &m.list {
            assert_eq!(machine.gamma.len(), 1, "{} uses storage", machine.name);
        }
    }

    #[test]
    fn english_engines_agree() {
        let g = parse_grammar(ENGLISHY).unwrap();
        let m = compile(&g).unwrap();
        for tapes in [
            "m o v e +",
            "m o v e + e d +",
            "m o v e + s +",
            "m o d e +",
            "e +",
            "v e +",
            "v e e +",
            "m o v e",
        ] {
            engines_agree(&g, &m, &[syms(tapes)]);
        }
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
    fn spread_machine_matches_interpreter() {
        let g = parse_grammar(SPREADY).unwrap();
        let m = compile(&g).unwrap();
        assert_eq!(m.list.len(), 2, "defaults (rv, rlit) plus rs");
        for tapes in [
            ("v1 k v1", "a"),
            ("v1 k v1 t v1", "a"),
            ("v1 k v1 t v1", "a u"),
            ("v1 v1", "a"),
            ("k v1", "a"),
            ("v1", "a u"),
        ] {
            engines_agree(&g, &m, &[syms(tapes.0), syms(tapes.1)]);
        }
    }

    #[test]
    fn storage_guard_blocks_wrong_melody() {
        let g = parse_grammar(SPREADY).unwrap();
        let m = compile(&g).unwrap();
        let rs = m.machine_for(&g, "rs").unwrap();
        // Arm on (v1,a):a, then the own pair (v1,0):u must be tolerated but
        // unmarked (it is r-s material of the *other* melody: a shared pair
        // would fall through, an exclusive one block).
        let arm = m.pair_index(&TuplePair::new(SymbolTuple(syms("v1 a")), syms("a"))).unwrap();
        let spread_a = m.pair_index(&TuplePair::new(SymbolTuple(syms("v1 0")), syms("a"))).unwrap();
        let spread_u = m.pair_index(&TuplePair::new(SymbolTuple(syms("v1 0")), syms("u"))).unwrap();
        let s0 = rs.start;
        let armed = rs.step(s0, StepInput::Pair(arm), 0);
        assert_eq!(armed.len(), 1);
        let (s1, stor) = (armed[0].state, armed[0].storage);
        assert_eq!(rs.gamma[stor].as_str(), "a");
        // Matching melody fires and is marked.
        let fired = rs.step(s1, StepInput::Pair(spread_a), stor);
        assert_eq!(fired.len(), 1);
        assert_eq!(fired[0].marked, Some(1));
        // Mismatched melody: exclusive own pair, guard fails, blocked.
        assert!(rs.step(s1, StepInput::Pair(spread_u), stor).is_empty());
    }

    #[test]
    fn empty_grammar_accepts_only_epsilon() {
        let g = parse_grammar("
tapes: lex*
alphabet surface: a
").unwrap();
        let m = compile(&g).unwrap();
        assert_eq!(m.list.len(), 1);
        assert!(m.feasible.is_empty());
        assert!(m.list[0].accepts(&[]));
    }

    #[test]
    fn def_keeps_storage() {
        let g = parse_grammar(SPREADY).unwrap();
        let m = compile(&g).unwrap();
        let rs = m.machine_for(&g, "rs").unwrap();
        let arm = m.pair_index(&TuplePair::new(SymbolTuple(syms("v1 a")), syms("a"))).unwrap();
        let other = m.pair_index(&TuplePair::new(SymbolTuple(syms("k 0")), syms("k"))).unwrap();
        let s0 = rs.start;
        let armed = rs.step(s0, StepInput::Pair(arm), 0);
        let (s1, stor) = (armed[0].state, armed[0].storage);
        // A consonant pair is foreign to rs: the default transition applies
        // and the register survives (the ellipsis in action).
        let stepped = rs.step(s1, StepInput::Pair(other), stor);
        assert_eq!(stepped.len(), 1);
        assert_eq!(stepped[0].storage, stor);
        assert_eq!(stepped[0].marked, None);
        // Following that, the spread still fires on the kept register.
        let spread_a = m.pair_index(&TuplePair::new(SymbolTuple(syms("v1 0")), syms("a"))).unwrap();
        assert_eq!(rs.step(stepped[0].state, StepInput::Pair(spread_a), stepped[0].storage).len(), 1);
    }

    #[test]
    fn bare_mode_agrees_between_engines() {
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
        let m = compile(&g).unwrap();
        engines_agree(&g, &m, &[syms("k a k")]);
        let derivs = synthesize(&g, &m, &[syms("k a k")]);
        let bare = interpreter::filter_mode(&g, interpreter::Mode::Bare, derivs);
        assert_eq!(surfaces(&bare), ["kk"]);
    }
}
