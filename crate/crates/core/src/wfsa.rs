//! Weighted finite-state acceptors, symbol tables and the text lattice format.
//!
//! Lattice file, one record per line, whitespace separated:
//!
//! ```text
//! # comment
//! src dst token [weight]     arc, weight defaults to 0
//! state [weight]             final state, weight defaults to 0
//! ```
//!
//! The source state of the first record is the initial state. Symbol-table
//! files hold `token id` per line and must map `<eps>` to 0.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::semiring::{Semiring, Weight};

pub type Label = u32;
pub type StateId = usize;

/// Label 0 is reserved for epsilon.
pub const EPSILON: Label = 0;
pub const EPSILON_SYMBOL: &str = "<eps>";
/// Placeholder label for the unknown-word event of a scorer. Never present
/// in a symbol table.
pub const UNK_LABEL: Label = Label::MAX;
pub const UNK_SYMBOL: &str = "<unk>";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub label: Label,
    pub weight: Weight,
    pub next: StateId,
}

impl Arc {
    pub fn new(label: Label, weight: Weight, next: StateId) -> Arc {
        Arc {
            label,
            weight,
            next,
        }
    }
}

/// A weighted acceptor with dense state ids and a single initial state.
///
/// Non-final states carry the zero weight as their final weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Wfsa {
    start: StateId,
    arcs: Vec<Vec<Arc>>,
    finals: Vec<Weight>,
    semiring: Semiring,
}

impl Wfsa {
    /// A one-state automaton accepting nothing.
    pub fn new(semiring: Semiring) -> Wfsa {
        Wfsa {
            start: 0,
            arcs: vec![Vec::new()],
            finals: vec![Weight::ZERO],
            semiring,
        }
    }

    /// `n` unconnected, non-final states with `start` as the initial state.
    pub fn with_states(n: usize, start: StateId, semiring: Semiring) -> Wfsa {
        assert!(start < n, "start state {start} out of range for {n} states");
        Wfsa {
            start,
            arcs: vec![Vec::new(); n],
            finals: vec![Weight::ZERO; n],
            semiring,
        }
    }

    pub fn add_state(&mut self) -> StateId {
        self.arcs.push(Vec::new());
        self.finals.push(Weight::ZERO);
        self.arcs.len() - 1
    }

    pub fn add_arc(&mut self, src: StateId, arc: Arc) {
        assert!(
            arc.next < self.num_states(),
            "arc target {} out of range",
            arc.next
        );
        self.arcs[src].push(arc);
    }

    pub fn set_final(&mut self, state: StateId, weight: Weight) {
        self.finals[state] = weight;
    }

    pub fn set_start(&mut self, state: StateId) {
        assert!(state < self.num_states());
        self.start = state;
    }

    pub fn set_semiring(&mut self, semiring: Semiring) {
        self.semiring = semiring;
    }

    pub fn with_semiring(mut self, semiring: Semiring) -> Wfsa {
        self.semiring = semiring;
        self
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn semiring(&self) -> Semiring {
        self.semiring
    }

    pub fn num_states(&self) -> usize {
        self.arcs.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.iter().map(Vec::len).sum()
    }

    pub fn states(&self) -> std::ops::Range<StateId> {
        0..self.arcs.len()
    }

    pub fn arcs(&self, state: StateId) -> &[Arc] {
        &self.arcs[state]
    }

    pub(crate) fn arcs_mut(&mut self, state: StateId) -> &mut Vec<Arc> {
        &mut self.arcs[state]
    }

    pub fn final_weight(&self, state: StateId) -> Weight {
        self.finals[state]
    }

    pub fn is_final(&self, state: StateId) -> bool {
        !self.finals[state].is_zero()
    }

    pub fn num_finals(&self) -> usize {
        self.finals.iter().filter(|w| !w.is_zero()).count()
    }

    /// Sorts each state's arcs by (label, next).
    pub fn sort_arcs(&mut self) {
        for arcs in &mut self.arcs {
            arcs.sort_by(|a, b| a.label.cmp(&b.label).then(a.next.cmp(&b.next)));
        }
    }

    pub fn has_epsilons(&self) -> bool {
        self.arcs.iter().flatten().any(|a| a.label == EPSILON)
    }

    /// Returns the first state with two equally-labelled arcs, if any.
    pub fn find_nondeterminism(&self) -> Option<(StateId, Label)> {
        for (q, arcs) in self.arcs.iter().enumerate() {
            let mut labels: Vec<Label> = arcs.iter().map(|a| a.label).collect();
            labels.sort_unstable();
            if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
                return Some((q, w[0]));
            }
        }
        None
    }

    pub fn is_deterministic(&self) -> bool {
        !self.has_epsilons() && self.find_nondeterminism().is_none()
    }

    /// States in topological order (every arc goes forward), or
    /// [`Error::Cyclic`].
    pub fn topo_order(&self) -> Result<Vec<StateId>> {
        topo_sort(self.num_states(), |q| self.arcs[q].iter().map(|a| a.next)).ok_or(Error::Cyclic)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topo_order().is_ok()
    }

    pub fn accessible(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut stack = vec![self.start];
        seen[self.start] = true;
        while let Some(q) = stack.pop() {
            for a in &self.arcs[q] {
                if !seen[a.next] {
                    seen[a.next] = true;
                    stack.push(a.next);
                }
            }
        }
        seen
    }

    pub fn coaccessible(&self) -> Vec<bool> {
        let mut reverse: Vec<Vec<StateId>> = vec![Vec::new(); self.num_states()];
        for (q, arcs) in self.arcs.iter().enumerate() {
            for a in arcs {
                reverse[a.next].push(q);
            }
        }
        let mut seen = vec![false; self.num_states()];
        let mut stack: Vec<StateId> = self.states().filter(|&q| self.is_final(q)).collect();
        for &q in &stack {
            seen[q] = true;
        }
        while let Some(q) = stack.pop() {
            for &p in &reverse[q] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// True when no final state is reachable from the initial state.
    pub fn is_empty_language(&self) -> bool {
        let acc = self.accessible();
        !self.states().any(|q| acc[q] && self.is_final(q))
    }

    /// Removes states that are not both accessible and coaccessible and
    /// renumbers the rest, keeping their relative order. An empty language
    /// yields a single non-final state.
    pub fn connect(&self) -> Wfsa {
        let acc = self.accessible();
        let coacc = self.coaccessible();
        let keep: Vec<bool> = self.states().map(|q| acc[q] && coacc[q]).collect();
        if !keep[self.start] {
            return Wfsa::new(self.semiring);
        }
        let mut map = vec![usize::MAX; self.num_states()];
        let mut n = 0;
        for q in self.states() {
            if keep[q] {
                map[q] = n;
                n += 1;
            }
        }
        let mut out = Wfsa::with_states(n, map[self.start], self.semiring);
        for q in self.states().filter(|&q| keep[q]) {
            let nq = map[q];
            out.finals[nq] = self.finals[q];
            out.arcs[nq] = self.arcs[q]
                .iter()
                .filter(|a| keep[a.next])
                .map(|a| Arc::new(a.label, a.weight, map[a.next]))
                .collect();
        }
        out
    }

    /// Length in arcs of the longest path from the initial state, for an
    /// acyclic automaton.
    pub fn longest_path_len(&self) -> Result<usize> {
        let order = self.topo_order()?;
        let mut depth = vec![None::<usize>; self.num_states()];
        depth[self.start] = Some(0);
        let mut best = 0;
        for q in order {
            let Some(d) = depth[q] else { continue };
            best = best.max(d);
            for a in &self.arcs[q] {
                let e = depth[a.next].get_or_insert(0);
                *e = (*e).max(d + 1);
            }
        }
        Ok(best)
    }

    /// Structural report; never modifies the automaton.
    pub fn validate(&self) -> ValidationReport {
        let acc = self.accessible();
        let coacc = self.coaccessible();
        let num_states = self.num_states();
        let num_arcs = self.num_arcs();
        ValidationReport {
            num_states,
            num_arcs,
            num_finals: self.num_finals(),
            is_acyclic: self.is_acyclic(),
            accessible: acc.iter().filter(|&&b| b).count(),
            coaccessible: coacc.iter().filter(|&&b| b).count(),
            avg_arcs_per_state: if num_states == 0 {
                0.0
            } else {
                num_arcs as f64 / num_states as f64
            },
            has_epsilons: self.has_epsilons(),
            is_deterministic: self.is_deterministic(),
        }
    }
}

/// Kahn's algorithm over an implicit graph. `None` on a cycle.
pub(crate) fn topo_sort<F, I>(n: usize, successors: F) -> Option<Vec<StateId>>
where
    F: Fn(StateId) -> I,
    I: Iterator<Item = StateId>,
{
    let mut indegree = vec![0usize; n];
    for q in 0..n {
        for r in successors(q) {
            indegree[r] += 1;
        }
    }
    let mut ready: Vec<StateId> = (0..n).rev().filter(|&q| indegree[q] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(q) = ready.pop() {
        order.push(q);
        for r in successors(q) {
            indegree[r] -= 1;
            if indegree[r] == 0 {
                ready.push(r);
            }
        }
    }
    (order.len() == n).then_some(order)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub num_states: usize,
    pub num_arcs: usize,
    pub num_finals: usize,
    pub is_acyclic: bool,
    /// Number of states reachable from the initial state.
    pub accessible: usize,
    /// Number of states from which a final state is reachable.
    pub coaccessible: usize,
    pub avg_arcs_per_state: f64,
    pub has_epsilons: bool,
    pub is_deterministic: bool,
}

/// Bijection between token strings and labels. `<eps>` is always 0.
///
/// An open table assigns fresh labels to unseen tokens; a closed table
/// rejects them.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTable {
    by_name: HashMap<String, Label>,
    by_id: BTreeMap<Label, String>,
    closed: bool,
}

impl Default for SymbolTable {
    fn default() -> Self {
        SymbolTable::new()
    }
}

impl SymbolTable {
    pub fn new() -> SymbolTable {
        let mut t = SymbolTable {
            by_name: HashMap::new(),
            by_id: BTreeMap::new(),
            closed: false,
        };
        t.by_name.insert(EPSILON_SYMBOL.to_string(), EPSILON);
        t.by_id.insert(EPSILON, EPSILON_SYMBOL.to_string());
        t
    }

    /// Builds an open table assigning 1, 2, ... to `tokens` in order.
    pub fn from_tokens<'a, I: IntoIterator<Item = &'a str>>(tokens: I) -> SymbolTable {
        let mut t = SymbolTable::new();
        for tok in tokens {
            t.intern(tok);
        }
        t
    }

    /// Parses a `token id` file. The result is closed.
    pub fn parse(text: &str) -> Result<SymbolTable> {
        let mut t = SymbolTable {
            by_name: HashMap::new(),
            by_id: BTreeMap::new(),
            closed: true,
        };
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [name, id] = fields[..] else {
                return Err(Error::parse(lineno, "expected `token id`"));
            };
            let id: Label = id
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad symbol id {id:?}")))?;
            if t.by_name.contains_key(name) {
                return Err(Error::parse(lineno, format!("duplicate symbol {name:?}")));
            }
            if t.by_id.contains_key(&id) {
                return Err(Error::parse(lineno, format!("duplicate symbol id {id}")));
            }
            if (id == EPSILON) != (name == EPSILON_SYMBOL) {
                return Err(Error::parse(lineno, "id 0 is reserved for <eps>"));
            }
            t.by_name.insert(name.to_string(), id);
            t.by_id.insert(id, name.to_string());
        }
        if !t.by_name.contains_key(EPSILON_SYMBOL) {
            return Err(Error::parse(0, "symbol table lacks `<eps> 0`"));
        }
        Ok(t)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, name) in &self.by_id {
            let _ = writeln!(out, "{name} {id}");
        }
        out
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn close(&mut self) {
        self.closed = true;
    }

    pub fn open(&mut self) {
        self.closed = false;
    }

    pub fn get(&self, name: &str) -> Option<Label> {
        self.by_name.get(name).copied()
    }

    pub fn symbol(&self, id: Label) -> Option<&str> {
        self.by_id.get(&id).map(String::as_str)
    }

    /// Returns the label for `name`, adding it regardless of the closed flag.
    pub fn intern(&mut self, name: &str) -> Label {
        if let Some(id) = self.get(name) {
            return id;
        }
        let id = self.by_id.keys().next_back().map_or(1, |&m| m + 1);
        self.by_name.insert(name.to_string(), id);
        self.by_id.insert(id, name.to_string());
        id
    }

    /// Looks up `name`, adding it when the table is open.
    pub fn resolve(&mut self, name: &str) -> Option<Label> {
        match self.get(name) {
            Some(id) => Some(id),
            None if self.closed => None,
            None => Some(self.intern(name)),
        }
    }

    /// Number of entries including `<eps>`.
    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }

    /// Non-epsilon labels in ascending order.
    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.by_id.keys().copied().filter(|&l| l != EPSILON)
    }

    /// Renders labels as a space-separated string; unknown ids print as `#id`.
    pub fn render(&self, labels: &[Label]) -> String {
        labels
            .iter()
            .map(|&l| match self.symbol(l) {
                Some(s) => s.to_string(),
                None if l == UNK_LABEL => UNK_SYMBOL.to_string(),
                None => format!("#{l}"),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Maps whitespace-separated tokens to labels.
    pub fn encode(&mut self, sentence: &str) -> Option<Vec<Label>> {
        sentence
            .split_whitespace()
            .map(|t| self.resolve(t))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Accept automata without a reachable final state.
    pub allow_empty: bool,
    pub semiring: Semiring,
}

/// Parses the lattice text format into a tropical automaton.
pub fn parse_wfsa(text: &str, symtab: &mut SymbolTable) -> Result<Wfsa> {
    parse_wfsa_with(text, symtab, ParseOptions::default())
}

pub fn parse_wfsa_with(text: &str, symtab: &mut SymbolTable, opts: ParseOptions) -> Result<Wfsa> {
    enum Record {
        Arc(StateId, StateId, Label, Weight),
        Final(StateId, Weight),
    }

    let parse_state = |s: &str, lineno: usize| -> Result<StateId> {
        s.parse::<StateId>()
            .map_err(|_| Error::parse(lineno, format!("bad state id {s:?}")))
    };
    let parse_weight = |s: Option<&&str>, lineno: usize| -> Result<Weight> {
        match s {
            None => Ok(Weight::ONE),
            Some(s) => s
                .parse::<f64>()
                .ok()
                .and_then(Weight::new)
                .ok_or_else(|| Error::parse(lineno, format!("bad weight {s:?}"))),
        }
    };

    let mut records = Vec::new();
    let mut max_state = None::<StateId>;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let record = match fields.len() {
            1 | 2 => Record::Final(
                parse_state(fields[0], lineno)?,
                parse_weight(fields.get(1), lineno)?,
            ),
            3 | 4 => {
                let src = parse_state(fields[0], lineno)?;
                let dst = parse_state(fields[1], lineno)?;
                let label = symtab
                    .resolve(fields[2])
                    .ok_or_else(|| Error::UnknownSymbol {
                        line: lineno,
                        symbol: fields[2].to_string(),
                    })?;
                Record::Arc(src, dst, label, parse_weight(fields.get(3), lineno)?)
            }
            n => {
                return Err(Error::parse(
                    lineno,
                    format!("expected 1 to 4 fields, found {n}"),
                ))
            }
        };
        let hi = match record {
            Record::Arc(s, d, _, _) => s.max(d),
            Record::Final(s, _) => s,
        };
        max_state = Some(max_state.map_or(hi, |m| m.max(hi)));
        records.push(record);
    }

    let Some(max_state) = max_state else {
        return Err(Error::parse(0, "no records"));
    };
    let start = match records[0] {
        Record::Arc(s, ..) | Record::Final(s, _) => s,
    };
    let mut w = Wfsa::with_states(max_state + 1, start, opts.semiring);
    for r in records {
        match r {
            Record::Arc(s, d, l, wt) => w.add_arc(s, Arc::new(l, wt, d)),
            Record::Final(s, wt) => w.set_final(s, wt),
        }
    }
    if !opts.allow_empty && w.is_empty_language() {
        return Err(Error::NoFinalState);
    }
    Ok(w)
}

/// Writes the lattice text format. The initial state is renumbered to 0;
/// weights use the shortest decimal form that round-trips exactly.
pub fn serialize_wfsa(w: &Wfsa, symtab: &SymbolTable) -> String {
    let n = w.num_states();
    let mut order: Vec<StateId> = Vec::with_capacity(n);
    order.push(w.start());
    order.extend(w.states().filter(|&q| q != w.start()));
    let mut map = vec![0; n];
    for (new, &old) in order.iter().enumerate() {
        map[old] = new;
    }

    let mut out = String::new();
    let label_name = |l: Label| match symtab.symbol(l) {
        Some(s) => s.to_string(),
        None => format!("#{l}"),
    };
    let mut start_final_written = false;
    if w.arcs(w.start()).is_empty() {
        // The first record must name the initial state.
        let _ = writeln!(out, "0 {}", w.final_weight(w.start()));
        start_final_written = true;
    }
    for &q in &order {
        for a in w.arcs(q) {
            let _ = writeln!(
                out,
                "{} {} {} {}",
                map[q],
                map[a.next],
                label_name(a.label),
                a.weight
            );
        }
    }
    for (new, &q) in order.iter().enumerate() {
        if new == 0 && start_final_written {
            continue;
        }
        if w.is_final(q) {
            let _ = writeln!(out, "{} {}", new, w.final_weight(q));
        }
    }
    out
}
