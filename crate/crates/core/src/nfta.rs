//! Bottom-up nondeterministic finite tree automata.
//!
//! Two representations share one interface: explicit rule sets (grammar
//! compilation, hand-built checkers) and the lazily materialized summary
//! automaton obtained from a two-way alternating automaton. Emptiness with
//! minimal-witness extraction runs over lazy n-way products of either kind.

use crate::term::{RankedAlphabet, RegularTreeGrammar, RhsTerm, Term};
use crate::twata::{minimize_sets, Move, StateId, Twata};
use std::cell::RefCell;
use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::rc::Rc;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NftaError {
    #[error("term symbol `{0}` is not in the automaton alphabet")]
    ForeignSymbol(String),
    #[error("product factors have different alphabets")]
    AlphabetMismatch,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Rule {
    pub symbol: usize,
    pub children: Vec<u32>,
    pub parent: u32,
}

/// Explicitly tabulated automaton.
#[derive(Clone, Debug)]
pub struct ExplicitNfta {
    alphabet: RankedAlphabet,
    n_states: usize,
    state_names: Vec<String>,
    rules: Vec<Rule>,
    rules_by_symbol: Vec<Vec<usize>>,
    finals: BTreeSet<u32>,
}

impl ExplicitNfta {
    pub fn new(
        alphabet: RankedAlphabet,
        state_names: Vec<String>,
        rules: Vec<Rule>,
        finals: BTreeSet<u32>,
    ) -> ExplicitNfta {
        let n_states = state_names.len();
        let mut rules_by_symbol = vec![Vec::new(); alphabet.len()];
        for (i, r) in rules.iter().enumerate() {
            assert_eq!(
                alphabet.symbol(r.symbol).arity(),
                r.children.len(),
                "rule arity mismatch"
            );
            assert!((r.parent as usize) < n_states);
            assert!(r.children.iter().all(|&c| (c as usize) < n_states));
            rules_by_symbol[r.symbol].push(i);
        }
        assert!(finals.iter().all(|&q| (q as usize) < n_states));
        ExplicitNfta {
            alphabet,
            n_states,
            state_names,
            rules,
            rules_by_symbol,
            finals,
        }
    }

    fn step(&self, symbol: usize, children: &[u32]) -> Vec<u32> {
        self.rules_by_symbol[symbol]
            .iter()
            .filter_map(|&ri| {
                let r = &self.rules[ri];
                (r.children == children).then_some(r.parent)
            })
            .collect()
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }
}

type ExitSet = Vec<StateId>; // sorted
type Antichain = Vec<ExitSet>;
/// Canonical summary: per 2ATA state with any derivable pair, the antichain
/// of minimal exit sets, everything sorted.
type Summary = Vec<(StateId, Antichain)>;
type ModelSet = Rc<Vec<BTreeSet<(StateId, Move)>>>;

struct SummaryCells {
    summaries: Vec<Summary>,
    intern: HashMap<Summary, u32>,
    step_cache: HashMap<(usize, Vec<u32>), u32>,
    models: Vec<Option<ModelSet>>,
    transitions_explored: u64,
}

/// Deterministic bottom-up automaton over exit-set summaries of a two-way
/// alternating automaton; states materialize on demand.
pub struct SummaryNfta {
    twata: Twata,
    cells: RefCell<SummaryCells>,
}

fn insert_minimal(antichain: &mut Antichain, e: ExitSet) -> bool {
    if antichain.iter().any(|x| subset(x, &e)) {
        return false;
    }
    antichain.retain(|x| !subset(&e, x));
    antichain.push(e);
    true
}

fn subset(a: &[StateId], b: &[StateId]) -> bool {
    // both sorted
    let mut bi = 0;
    'outer: for x in a {
        while bi < b.len() {
            match b[bi].cmp(x) {
                std::cmp::Ordering::Less => bi += 1,
                std::cmp::Ordering::Equal => {
                    bi += 1;
                    continue 'outer;
                }
                std::cmp::Ordering::Greater => return false,
            }
        }
        return false;
    }
    true
}

fn sorted_union(a: &[StateId], b: &[StateId]) -> ExitSet {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl SummaryNfta {
    fn new(twata: Twata) -> SummaryNfta {
        let n = twata.n_states() * twata.alphabet().len();
        SummaryNfta {
            twata,
            cells: RefCell::new(SummaryCells {
                summaries: Vec::new(),
                intern: HashMap::new(),
                step_cache: HashMap::new(),
                models: vec![None; n],
                transitions_explored: 0,
            }),
        }
    }

    fn models(&self, cells: &mut SummaryCells, q: StateId, sym: usize) -> ModelSet {
        let idx = q * self.twata.alphabet().len() + sym;
        if cells.models[idx].is_none() {
            cells.models[idx] = Some(Rc::new(self.twata.delta(q, sym).minimal_models()));
        }
        cells.models[idx].clone().unwrap()
    }

    fn step(&self, sym: usize, children: &[u32]) -> u32 {
        if let Some(&id) = self
            .cells
            .borrow()
            .step_cache
            .get(&(sym, children.to_vec()))
        {
            return id;
        }
        let summary = self.compute_summary(sym, children);
        let mut cells = self.cells.borrow_mut();
        let id = match cells.intern.get(&summary) {
            Some(&id) => id,
            None => {
                let id = cells.summaries.len() as u32;
                cells.summaries.push(summary.clone());
                cells.intern.insert(summary, id);
                id
            }
        };
        cells.step_cache.insert((sym, children.to_vec()), id);
        cells.transitions_explored += 1;
        id
    }

    /// Least fixpoint of the local derivation rules for one tree node, given
    /// the summaries of its children.
    fn compute_summary(&self, sym: usize, children: &[u32]) -> Summary {
        let n = self.twata.n_states();
        let (child_summaries, models_per_state): (Vec<Summary>, Vec<ModelSet>) = {
            let mut cells = self.cells.borrow_mut();
            let kids = children
                .iter()
                .map(|&c| cells.summaries[c as usize].clone())
                .collect();
            let models = (0..n).map(|q| self.models(&mut cells, q, sym)).collect();
            (kids, models)
        };

        let mut derived: Vec<Antichain> = vec![Vec::new(); n];
        for &q in self.twata.finals() {
            insert_minimal(&mut derived[q], Vec::new());
        }

        loop {
            let mut changed = false;
            for q in 0..n {
                for model in models_per_state[q].iter() {
                    // Per atom, the antichain of possible exit-set
                    // contributions under the current `derived`.
                    let mut options: Vec<Antichain> = Vec::new();
                    let mut dead = false;
                    for &(p, mv) in model {
                        let contribs: Antichain = match mv {
                            Move::Up => vec![vec![p]],
                            Move::Stay => derived[p].clone(),
                            Move::Child(i) => {
                                let child = &child_summaries[i - 1];
                                let mut out: Antichain = Vec::new();
                                if let Some((_, pairs)) =
                                    child.iter().find(|(s, _)| *s == p)
                                {
                                    for exit_set in pairs {
                                        continuation_unions(
                                            exit_set, &derived, &mut out,
                                        );
                                    }
                                }
                                minimize_exit_sets(out)
                            }
                        };
                        if contribs.is_empty() {
                            dead = true;
                            break;
                        }
                        options.push(contribs);
                    }
                    if dead {
                        continue;
                    }
                    let mut candidates: Antichain = vec![Vec::new()];
                    for opt in &options {
                        let mut next: Antichain = Vec::new();
                        for base in &candidates {
                            for c in opt {
                                next.push(sorted_union(base, c));
                            }
                        }
                        candidates = minimize_exit_sets(next);
                    }
                    for e in candidates {
                        if insert_minimal(&mut derived[q], e) {
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }

        let mut summary: Summary = Vec::new();
        for (q, mut antichain) in derived.into_iter().enumerate() {
            if !antichain.is_empty() {
                antichain.sort();
                summary.push((q, antichain));
            }
        }
        summary
    }

    fn summary_contains_closed(&self, id: u32, q: StateId) -> bool {
        self.cells.borrow().summaries[id as usize]
            .iter()
            .any(|(s, antichain)| *s == q && antichain.iter().any(|e| e.is_empty()))
    }

    fn is_final(&self, id: u32) -> bool {
        self.summary_contains_closed(id, self.twata.initial())
    }
}

/// When a child trajectory exits upward in each state of `exit_set`, it must
/// continue at the current node; collect the unions of derived exit sets over
/// all ways to continue.
fn continuation_unions(exit_set: &[StateId], derived: &[Antichain], out: &mut Antichain) {
    fn go(rest: &[StateId], acc: &ExitSet, derived: &[Antichain], out: &mut Antichain) {
        match rest.split_first() {
            None => out.push(acc.clone()),
            Some((&p, tail)) => {
                for cont in &derived[p] {
                    let merged = sorted_union(acc, cont);
                    go(tail, &merged, derived, out);
                }
            }
        }
    }
    go(exit_set, &Vec::new(), derived, out);
}

fn minimize_exit_sets(sets: Antichain) -> Antichain {
    let as_btree: Vec<BTreeSet<StateId>> = sets
        .into_iter()
        .map(|s| s.into_iter().collect())
        .collect();
    minimize_sets(as_btree)
        .into_iter()
        .map(|s| s.into_iter().collect())
        .collect()
}

/// A bottom-up nondeterministic tree automaton, explicit or summary-backed.
pub enum Nfta {
    Explicit(ExplicitNfta),
    Summaries(SummaryNfta),
}

impl Nfta {
    pub fn from_twata(twata: Twata) -> Nfta {
        Nfta::Summaries(SummaryNfta::new(twata))
    }

    pub fn alphabet(&self) -> &RankedAlphabet {
        match self {
            Nfta::Explicit(a) => &a.alphabet,
            Nfta::Summaries(s) => s.twata.alphabet(),
        }
    }

    /// Candidate parent states for `symbol` applied to known child states.
    /// Deterministic order; empty means no transition.
    pub fn step(&self, symbol: usize, children: &[u32]) -> Vec<u32> {
        match self {
            Nfta::Explicit(a) => a.step(symbol, children),
            Nfta::Summaries(s) => vec![s.step(symbol, children)],
        }
    }

    pub fn is_final(&self, state: u32) -> bool {
        match self {
            Nfta::Explicit(a) => a.finals.contains(&state),
            Nfta::Summaries(s) => s.is_final(state),
        }
    }

    pub fn accepts(&self, t: &Term) -> Result<bool, NftaError> {
        let alphabet = self.alphabet();
        fn states(nfta: &Nfta, alphabet: &RankedAlphabet, t: &Term) -> Result<Vec<u32>, NftaError> {
            let sym = t.symbol();
            let sid = alphabet
                .symbol_id(sym.name())
                .filter(|&i| alphabet.symbol(i) == sym)
                .ok_or_else(|| NftaError::ForeignSymbol(sym.name().to_string()))?;
            let child_sets = t
                .children()
                .iter()
                .map(|c| states(nfta, alphabet, c))
                .collect::<Result<Vec<_>, _>>()?;
            let mut out = BTreeSet::new();
            let mut combo = vec![0u32; child_sets.len()];
            fn go(
                nfta: &Nfta,
                sid: usize,
                child_sets: &[Vec<u32>],
                slot: usize,
                combo: &mut Vec<u32>,
                out: &mut BTreeSet<u32>,
            ) {
                if slot == child_sets.len() {
                    out.extend(nfta.step(sid, combo));
                    return;
                }
                for &s in &child_sets[slot] {
                    combo[slot] = s;
                    go(nfta, sid, child_sets, slot + 1, combo, out);
                }
            }
            go(nfta, sid, &child_sets, 0, &mut combo, &mut out);
            Ok(out.into_iter().collect())
        }
        let roots = states(self, alphabet, t)?;
        Ok(roots.iter().any(|&q| self.is_final(q)))
    }

    /// Smallest accepted term by node count, ties broken by the structural
    /// term order; `None` when the language is empty.
    pub fn min_witness(&self) -> Option<(Term, u32)> {
        let limits = SearchLimits::default();
        match search_product(&[self], &limits).0 {
            SearchOutcome::Witness(t) => {
                let size = t.size();
                Some((t, size))
            }
            SearchOutcome::Empty => None,
            SearchOutcome::Exhausted(_) => unreachable!("unbounded search cannot exhaust"),
        }
    }

    /// Language intersection, materialized over reachable state pairs.
    pub fn product(&self, other: &Nfta) -> Result<Nfta, NftaError> {
        if self.alphabet() != other.alphabet() {
            return Err(NftaError::AlphabetMismatch);
        }
        let alphabet = self.alphabet().clone();
        let mut pair_ids: HashMap<(u32, u32), u32> = HashMap::new();
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        let mut rules: BTreeSet<Rule> = BTreeSet::new();

        let intern = |pair: (u32, u32), pairs: &mut Vec<(u32, u32)>,
                          pair_ids: &mut HashMap<(u32, u32), u32>| {
            *pair_ids.entry(pair).or_insert_with(|| {
                pairs.push(pair);
                (pairs.len() - 1) as u32
            })
        };

        loop {
            let known = pairs.len();
            for sid in 0..alphabet.len() {
                let arity = alphabet.symbol(sid).arity();
                let mut combo = vec![0u32; arity];
                let n = pairs.len();
                // all assignments of known pair ids to the child slots
                fn go(
                    sid: usize,
                    arity: usize,
                    slot: usize,
                    n: usize,
                    combo: &mut Vec<u32>,
                    a: &Nfta,
                    b: &Nfta,
                    pairs_snapshot: &[(u32, u32)],
                    new_pairs: &mut Vec<((u32, u32), Vec<u32>, usize)>,
                ) {
                    if slot == arity {
                        let left: Vec<u32> = combo
                            .iter()
                            .map(|&c| pairs_snapshot[c as usize].0)
                            .collect();
                        let right: Vec<u32> = combo
                            .iter()
                            .map(|&c| pairs_snapshot[c as usize].1)
                            .collect();
                        for pa in a.step(sid, &left) {
                            for pb in b.step(sid, &right) {
                                new_pairs.push(((pa, pb), combo.clone(), sid));
                            }
                        }
                        return;
                    }
                    for c in 0..n as u32 {
                        combo[slot] = c;
                        go(sid, arity, slot + 1, n, combo, a, b, pairs_snapshot, new_pairs);
                    }
                }
                let snapshot = pairs.clone();
                let mut found = Vec::new();
                go(
                    sid, arity, 0, n, &mut combo, self, other, &snapshot, &mut found,
                );
                for (pair, children, sym) in found {
                    let parent = intern(pair, &mut pairs, &mut pair_ids);
                    rules.insert(Rule {
                        symbol: sym,
                        children,
                        parent,
                    });
                }
            }
            if pairs.len() == known {
                break;
            }
        }

        let state_names: Vec<String> = pairs.iter().map(|(a, b)| format!("({a},{b})")).collect();
        let finals = pairs
            .iter()
            .enumerate()
            .filter(|&(_, &(a, b))| self.is_final(a) && other.is_final(b))
            .map(|(i, _)| i as u32)
            .collect();
        Ok(Nfta::Explicit(ExplicitNfta::new(
            alphabet,
            state_names,
            rules.into_iter().collect(),
            finals,
        )))
    }

    /// Discovers the full reachable state space (up to `cap` states); returns
    /// (states discovered, transitions explored).
    pub fn saturate(&self, cap: usize) -> (usize, u64) {
        let alphabet = self.alphabet().clone();
        let mut discovered: Vec<u32> = Vec::new();
        let mut seen: BTreeSet<u32> = BTreeSet::new();
        let mut transitions: u64 = 0;
        loop {
            let known = discovered.len();
            for sid in 0..alphabet.len() {
                let arity = alphabet.symbol(sid).arity();
                let snapshot = discovered.clone();
                let mut combo = vec![0u32; arity];
                fn go(
                    nfta: &Nfta,
                    sid: usize,
                    arity: usize,
                    slot: usize,
                    snapshot: &[u32],
                    combo: &mut Vec<u32>,
                    found: &mut Vec<u32>,
                    transitions: &mut u64,
                ) {
                    if slot == arity {
                        *transitions += 1;
                        found.extend(nfta.step(sid, combo));
                        return;
                    }
                    for &s in snapshot {
                        combo[slot] = s;
                        go(nfta, sid, arity, slot + 1, snapshot, combo, found, transitions);
                    }
                }
                let mut found = Vec::new();
                go(
                    self,
                    sid,
                    arity,
                    0,
                    &snapshot,
                    &mut combo,
                    &mut found,
                    &mut transitions,
                );
                for q in found {
                    if seen.insert(q) {
                        discovered.push(q);
                    }
                }
                if discovered.len() >= cap {
                    return (discovered.len(), transitions);
                }
            }
            if discovered.len() == known {
                break;
            }
        }
        (discovered.len(), transitions)
    }

    /// Debug text dump of explicit rules.
    pub fn dump_rules(&self) -> String {
        match self {
            Nfta::Explicit(a) => {
                let mut out = String::new();
                for r in &a.rules {
                    let kids: Vec<&str> = r
                        .children
                        .iter()
                        .map(|&c| a.state_names[c as usize].as_str())
                        .collect();
                    out.push_str(&format!(
                        "{}({}) -> {}{}\n",
                        a.alphabet.symbol(r.symbol).name(),
                        kids.join(","),
                        a.state_names[r.parent as usize],
                        if a.finals.contains(&r.parent) { " [final]" } else { "" },
                    ));
                }
                out
            }
            Nfta::Summaries(_) => "<summary automaton: states materialize on demand>".into(),
        }
    }
}

/// Compiles a regular tree grammar; accepts exactly the grammar's language.
/// States are the nonterminals plus one fresh state per internal position of
/// the production right-hand sides; the start nonterminal is final.
pub fn grammar_to_nfta(grammar: &RegularTreeGrammar) -> Nfta {
    let alphabet = grammar.alphabet().clone();
    let n_nts = grammar.nonterminals().len();
    let mut state_names: Vec<String> = grammar.nonterminals().to_vec();
    let mut rules: Vec<Rule> = Vec::new();
    let mut chains: Vec<(u32, u32)> = Vec::new();

    fn build(
        rhs: &RhsTerm,
        alphabet: &RankedAlphabet,
        state_names: &mut Vec<String>,
        rules: &mut Vec<Rule>,
        result: Option<u32>,
    ) -> u32 {
        match rhs {
            RhsTerm::Nt(i) => *i as u32,
            RhsTerm::Sym(sym, kids) => {
                let kid_states: Vec<u32> = kids
                    .iter()
                    .map(|k| build(k, alphabet, state_names, rules, None))
                    .collect();
                let parent = result.unwrap_or_else(|| {
                    let q = state_names.len() as u32;
                    state_names.push(format!("p{q}"));
                    q
                });
                rules.push(Rule {
                    symbol: alphabet.symbol_id(sym.name()).unwrap(),
                    children: kid_states,
                    parent,
                });
                parent
            }
        }
    }

    for (nt, rhs) in grammar.productions() {
        match rhs {
            RhsTerm::Nt(b) => chains.push((*nt as u32, *b as u32)),
            _ => {
                build(rhs, &alphabet, &mut state_names, &mut rules, Some(*nt as u32));
            }
        }
    }

    // chain production A -> B: every rule producing B also produces A
    let mut rule_set: BTreeSet<Rule> = rules.iter().cloned().collect();
    loop {
        let mut added = Vec::new();
        for &(a, b) in &chains {
            for r in &rule_set {
                if r.parent == b {
                    let copy = Rule {
                        parent: a,
                        ..r.clone()
                    };
                    if !rule_set.contains(&copy) {
                        added.push(copy);
                    }
                }
            }
        }
        if added.is_empty() {
            break;
        }
        rule_set.extend(added);
    }

    let _ = n_nts;
    Nfta::Explicit(ExplicitNfta::new(
        alphabet,
        state_names,
        rule_set.into_iter().collect(),
        [grammar.start() as u32].into_iter().collect(),
    ))
}

#[derive(Clone, Debug)]
pub struct SearchLimits {
    pub max_states: usize,
    pub deadline: Option<Instant>,
}

impl Default for SearchLimits {
    fn default() -> SearchLimits {
        SearchLimits {
            max_states: usize::MAX,
            deadline: None,
        }
    }
}

#[derive(Clone, Debug)]
pub enum SearchOutcome {
    Witness(Term),
    Empty,
    Exhausted(String),
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SearchStats {
    pub tuples_settled: usize,
    pub tuples_discovered: usize,
}

/// Minimal-witness search over the lazy product of `factors`: a
/// label-setting (Dijkstra-style) search over hyperedges with cost = term
/// size, ties broken by the structural term order. All factors must share one
/// alphabet. Deterministic for fixed inputs.
pub fn search_product(factors: &[&Nfta], limits: &SearchLimits) -> (SearchOutcome, SearchStats) {
    assert!(!factors.is_empty());
    let alphabet = factors[0].alphabet().clone();
    for f in factors {
        assert!(
            *f.alphabet() == alphabet,
            "product factors must share an alphabet"
        );
    }

    let mut tuples: Vec<Vec<u32>> = Vec::new();
    let mut tuple_ids: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut best: Vec<Option<(u32, Term)>> = Vec::new(); // settled label
    let mut settled_order: Vec<u32> = Vec::new();
    let mut stats = SearchStats::default();

    #[derive(PartialEq, Eq)]
    struct Item(u32, Term, u32); // size, witness, tuple id
    impl Ord for Item {
        fn cmp(&self, other: &Item) -> std::cmp::Ordering {
            self.0
                .cmp(&other.0)
                .then_with(|| self.1.cmp(&other.1))
                .then_with(|| self.2.cmp(&other.2))
        }
    }
    impl PartialOrd for Item {
        fn partial_cmp(&self, other: &Item) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }

    let mut heap: BinaryHeap<Reverse<Item>> = BinaryHeap::new();

    let mut intern = |tuple: Vec<u32>,
                      tuples: &mut Vec<Vec<u32>>,
                      best: &mut Vec<Option<(u32, Term)>>|
     -> u32 {
        match tuple_ids.get(&tuple) {
            Some(&id) => id,
            None => {
                let id = tuples.len() as u32;
                tuples.push(tuple.clone());
                tuple_ids.insert(tuple, id);
                best.push(None);
                id
            }
        }
    };

    // leaves
    for sid in 0..alphabet.len() {
        let sym = alphabet.symbol(sid);
        if sym.arity() != 0 {
            continue;
        }
        let per_factor: Vec<Vec<u32>> = factors.iter().map(|f| f.step(sid, &[])).collect();
        if per_factor.iter().any(|v| v.is_empty()) {
            continue;
        }
        let term = Term::leaf(sym.clone());
        cartesian(&per_factor, &mut |tuple| {
            let id = intern(tuple.to_vec(), &mut tuples, &mut best);
            heap.push(Reverse(Item(1, term.clone(), id)));
        });
    }

    while let Some(Reverse(Item(size, term, id))) = heap.pop() {
        if best[id as usize].is_some() {
            continue;
        }
        if let Some(deadline) = limits.deadline {
            if Instant::now() > deadline {
                return (
                    SearchOutcome::Exhausted("timeout during product exploration".into()),
                    stats,
                );
            }
        }
        best[id as usize] = Some((size, term.clone()));
        settled_order.push(id);
        stats.tuples_settled = settled_order.len();
        stats.tuples_discovered = tuples.len();

        let tuple = tuples[id as usize].clone();
        if tuple
            .iter()
            .zip(factors.iter())
            .all(|(&q, f)| f.is_final(q))
        {
            return (SearchOutcome::Witness(term), stats);
        }
        if settled_order.len() >= limits.max_states {
            return (
                SearchOutcome::Exhausted(format!(
                    "product exploration exceeded {} states",
                    limits.max_states
                )),
                stats,
            );
        }

        // relax every hyperedge whose last-settled child is `id`
        for sid in 0..alphabet.len() {
            let sym = alphabet.symbol(sid);
            let arity = sym.arity();
            if arity == 0 {
                continue;
            }
            // slot j holds the new tuple; slots before j range over older
            // settads, slots after j over all settled including the new one
            let older = &settled_order[..settled_order.len() - 1];
            let all = &settled_order[..];
            let mut slots: Vec<u32> = vec![0; arity];
            for j in 0..arity {
                fill_slots(
                    &mut slots,
                    0,
                    j,
                    id,
                    older,
                    all,
                    &mut |combo: &[u32]| {
                        let total: u32 = 1 + combo
                            .iter()
                            .map(|&c| best[c as usize].as_ref().unwrap().0)
                            .sum::<u32>();
                        let per_factor: Vec<Vec<u32>> = factors
                            .iter()
                            .enumerate()
                            .map(|(fi, f)| {
                                let children: Vec<u32> = combo
                                    .iter()
                                    .map(|&c| tuples[c as usize][fi])
                                    .collect();
                                f.step(sid, &children)
                            })
                            .collect();
                        if per_factor.iter().any(|v| v.is_empty()) {
                            return;
                        }
                        let child_terms: Vec<Term> = combo
                            .iter()
                            .map(|&c| best[c as usize].as_ref().unwrap().1.clone())
                            .collect();
                        let parent_term = Term::new(sym.clone(), child_terms);
                        cartesian(&per_factor, &mut |tuple| {
                            let pid = intern(tuple.to_vec(), &mut tuples, &mut best);
                            if best[pid as usize].is_none() {
                                heap.push(Reverse(Item(total, parent_term.clone(), pid)));
                            }
                        });
                    },
                );
            }
        }
    }

    (SearchOutcome::Empty, stats)
}

/// Enumerates child-slot assignments where slot `fixed_slot` carries the
/// newly settled tuple, earlier slots range over `older`, later over `all`.
fn fill_slots(
    slots: &mut Vec<u32>,
    at: usize,
    fixed_slot: usize,
    fixed: u32,
    older: &[u32],
    all: &[u32],
    f: &mut impl FnMut(&[u32]),
) {
    if at == slots.len() {
        f(slots);
        return;
    }
    if at == fixed_slot {
        slots[at] = fixed;
        fill_slots(slots, at + 1, fixed_slot, fixed, older, all, f);
    } else {
        let pool = if at < fixed_slot { older } else { all };
        for &c in pool {
            slots[at] = c;
            fill_slots(slots, at + 1, fixed_slot, fixed, older, all, f);
        }
    }
}

fn cartesian(sets: &[Vec<u32>], f: &mut impl FnMut(&[u32])) {
    let mut combo = vec![0u32; sets.len()];
    fn go(sets: &[Vec<u32>], slot: usize, combo: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
        if slot == sets.len() {
            f(combo);
            return;
        }
        for &s in &sets[slot] {
            combo[slot] = s;
            go(sets, slot + 1, combo, f);
        }
    }
    go(sets, 0, &mut combo, f);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{generate_all_terms, generate_upto, parse_grammar, parse_term};

    fn unary_alphabet() -> RankedAlphabet {
        RankedAlphabet::new(&[("f", 1), ("a", 0), ("b", 0)]).unwrap()
    }

    #[test]
    fn grammar_single_leaf_language() {
        let alph = unary_alphabet();
        let g = parse_grammar("F -> a", &alph).unwrap();
        let nfta = grammar_to_nfta(&g);
        let a = parse_term("a", &alph).unwrap();
        let fa = parse_term("f(a)", &alph).unwrap();
        assert!(nfta.accepts(&a).unwrap());
        assert!(!nfta.accepts(&fa).unwrap());
    }

    #[test]
    fn grammar_rejects_foreign_leaf() {
        let alph = unary_alphabet();
        let g = parse_grammar("F -> f(F)\nF -> a", &alph).unwrap();
        let nfta = grammar_to_nfta(&g);
        let fb = parse_term("f(b)", &alph).unwrap();
        assert!(!nfta.accepts(&fb).unwrap());
    }

    #[test]
    fn min_witness_smallest_leaf() {
        let alph = unary_alphabet();
        let g = parse_grammar("F -> f(F)\nF -> a", &alph).unwrap();
        let nfta = grammar_to_nfta(&g);
        let (t, size) = nfta.min_witness().unwrap();
        assert_eq!(t.to_string(), "a");
        assert_eq!(size, 1);
    }

    #[test]
    fn min_witness_empty_language() {
        let alph = unary_alphabet();
        // F -> f(F) has no base case: language empty
        let g = parse_grammar("F -> f(F)", &alph).unwrap();
        let nfta = grammar_to_nfta(&g);
        assert!(nfta.min_witness().is_none());
    }

    #[test]
    fn product_enumerated_intersection() {
        let alph = unary_alphabet();
        // {a, f(a)} and {f(a), f(f(a))} intersect in {f(a)}
        let g1 = parse_grammar("F -> f(G)\nF -> a\nG -> a", &alph).unwrap();
        let g2 = parse_grammar("F -> f(G)\nG -> f(H)\nG -> a\nH -> a", &alph).unwrap();
        let n1 = grammar_to_nfta(&g1);
        let n2 = grammar_to_nfta(&g2);
        let p = n1.product(&n2).unwrap();
        for (text, expect) in [("a", false), ("f(a)", true), ("f(f(a))", false)] {
            let t = parse_term(text, &alph).unwrap();
            assert_eq!(p.accepts(&t).unwrap(), expect, "term {text}");
        }
        let (w, size) = p.min_witness().unwrap();
        assert_eq!(w.to_string(), "f(a)");
        assert_eq!(size, 2);
    }

    #[test]
    fn product_with_universal_is_identity() {
        let alph = unary_alphabet();
        let g = parse_grammar("F -> f(F)\nF -> a", &alph).unwrap();
        let nfta = grammar_to_nfta(&g);
        // universal automaton over the alphabet
        let universal = parse_grammar("U -> f(U)\nU -> a\nU -> b", &alph).unwrap();
        let u = grammar_to_nfta(&universal);
        let p = nfta.product(&u).unwrap();
        for t in generate_all_terms(&alph, 5) {
            assert_eq!(p.accepts(&t).unwrap(), nfta.accepts(&t).unwrap());
        }
    }

    #[test]
    fn product_idempotent_on_language() {
        let alph = unary_alphabet();
        let g = parse_grammar("F -> f(F)\nF -> a", &alph).unwrap();
        let nfta = grammar_to_nfta(&g);
        let p = nfta.product(&nfta).unwrap();
        for t in generate_all_terms(&alph, 6) {
            assert_eq!(p.accepts(&t).unwrap(), nfta.accepts(&t).unwrap());
        }
    }

    #[test]
    fn alphabet_mismatch_is_reported() {
        let a1 = RankedAlphabet::new(&[("a", 0)]).unwrap();
        let a2 = RankedAlphabet::new(&[("b", 0)]).unwrap();
        let g1 = parse_grammar("F -> a", &a1).unwrap();
        let g2 = parse_grammar("F -> b", &a2).unwrap();
        assert!(matches!(
            grammar_to_nfta(&g1).product(&grammar_to_nfta(&g2)),
            Err(NftaError::AlphabetMismatch)
        ));
    }

    #[test]
    fn generate_agrees_with_grammar_nfta() {
        let alph = RankedAlphabet::new(&[("g", 2), ("f", 1), ("a", 0), ("b", 0)]).unwrap();
        let g = parse_grammar("F -> g(F,G)\nF -> f(G)\nF -> a\nG -> b", &alph).unwrap();
        let nfta = grammar_to_nfta(&g);
        let generated = generate_upto(&g, 6);
        for t in &generated {
            assert!(nfta.accepts(t).unwrap(), "generated term {t} not accepted");
        }
        // exhaustiveness: everything the automaton accepts at size <= 6 is generated
        for t in generate_all_terms(&alph, 6) {
            assert_eq!(
                nfta.accepts(&t).unwrap(),
                generated.contains(&t),
                "disagreement on {t}"
            );
        }
    }
}
