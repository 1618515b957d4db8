//! Two-way alternating tree automata with reachability acceptance.
//!
//! Transitions are positive Boolean formulas over (state, move) atoms. A term
//! is accepted when the existential player wins the reachability game on the
//! fixed tree: the least set of winning (node, state) positions closed under
//! choosing a satisfying assignment whose atoms all lead to winning positions.

use crate::term::{RankedAlphabet, Term};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// Direction of an atom: up to the parent, stay, or down into child `i`
/// (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    Up,
    Stay,
    Child(usize),
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Up => write!(f, "up"),
            Move::Stay => write!(f, "stay"),
            Move::Child(i) => write!(f, "child{i}"),
        }
    }
}

/// Negation-free Boolean formula over atoms of type `A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PosBool<A> {
    True,
    False,
    Atom(A),
    And(Box<PosBool<A>>, Box<PosBool<A>>),
    Or(Box<PosBool<A>>, Box<PosBool<A>>),
}

impl<A> PosBool<A> {
    pub fn and(l: PosBool<A>, r: PosBool<A>) -> PosBool<A> {
        PosBool::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: PosBool<A>, r: PosBool<A>) -> PosBool<A> {
        PosBool::Or(Box::new(l), Box::new(r))
    }

    /// Conjunction of an iterator; empty yields `True`.
    pub fn and_all(items: impl IntoIterator<Item = PosBool<A>>) -> PosBool<A> {
        let mut it = items.into_iter();
        match it.next() {
            None => PosBool::True,
            Some(first) => it.fold(first, PosBool::and),
        }
    }

    /// Disjunction of an iterator; empty yields `False`.
    pub fn or_all(items: impl IntoIterator<Item = PosBool<A>>) -> PosBool<A> {
        let mut it = items.into_iter();
        match it.next() {
            None => PosBool::False,
            Some(first) => it.fold(first, PosBool::or),
        }
    }

    pub fn map<B>(&self, f: &mut impl FnMut(&A) -> B) -> PosBool<B> {
        match self {
            PosBool::True => PosBool::True,
            PosBool::False => PosBool::False,
            PosBool::Atom(a) => PosBool::Atom(f(a)),
            PosBool::And(l, r) => PosBool::and(l.map(f), r.map(f)),
            PosBool::Or(l, r) => PosBool::or(l.map(f), r.map(f)),
        }
    }

    pub fn eval(&self, valuation: &mut impl FnMut(&A) -> bool) -> bool {
        match self {
            PosBool::True => true,
            PosBool::False => false,
            PosBool::Atom(a) => valuation(a),
            PosBool::And(l, r) => l.eval(valuation) && r.eval(valuation),
            PosBool::Or(l, r) => l.eval(valuation) || r.eval(valuation),
        }
    }

    pub fn atoms(&self) -> Vec<&A> {
        let mut out = Vec::new();
        fn walk<'a, A>(f: &'a PosBool<A>, out: &mut Vec<&'a A>) {
            match f {
                PosBool::True | PosBool::False => {}
                PosBool::Atom(a) => out.push(a),
                PosBool::And(l, r) | PosBool::Or(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }

    /// Associativity-normalized view: nested `And`/`Or` chains flattened into
    /// n-ary nodes, operand order preserved.
    pub fn flatten(&self) -> FlatPosBool<A>
    where
        A: Clone,
    {
        match self {
            PosBool::True => FlatPosBool::True,
            PosBool::False => FlatPosBool::False,
            PosBool::Atom(a) => FlatPosBool::Atom(a.clone()),
            PosBool::And(_, _) => {
                let mut parts = Vec::new();
                fn collect<A: Clone>(f: &PosBool<A>, parts: &mut Vec<FlatPosBool<A>>) {
                    if let PosBool::And(l, r) = f {
                        collect(l, parts);
                        collect(r, parts);
                    } else {
                        parts.push(f.flatten());
                    }
                }
                collect(self, &mut parts);
                FlatPosBool::And(parts)
            }
            PosBool::Or(_, _) => {
                let mut parts = Vec::new();
                fn collect<A: Clone>(f: &PosBool<A>, parts: &mut Vec<FlatPosBool<A>>) {
                    if let PosBool::Or(l, r) = f {
                        collect(l, parts);
                        collect(r, parts);
                    } else {
                        parts.push(f.flatten());
                    }
                }
                collect(self, &mut parts);
                FlatPosBool::Or(parts)
            }
        }
    }
}

impl<A: Ord + Clone> PosBool<A> {
    /// Minimal satisfying assignments (prime implicants), as an antichain of
    /// atom sets. Monotonicity of positive formulas makes these sufficient for
    /// the game and summary constructions.
    pub fn minimal_models(&self) -> Vec<BTreeSet<A>> {
        match self {
            PosBool::True => vec![BTreeSet::new()],
            PosBool::False => Vec::new(),
            PosBool::Atom(a) => {
                let mut s = BTreeSet::new();
                s.insert(a.clone());
                vec![s]
            }
            PosBool::Or(l, r) => {
                let mut models = l.minimal_models();
                models.extend(r.minimal_models());
                minimize_sets(models)
            }
            PosBool::And(l, r) => {
                let left = l.minimal_models();
                let right = r.minimal_models();
                let mut out = Vec::new();
                for a in &left {
                    for b in &right {
                        out.push(a.union(b).cloned().collect());
                    }
                }
                minimize_sets(out)
            }
        }
    }
}

/// Keeps only the subset-minimal sets. Idempotent.
pub fn minimize_sets<A: Ord + Clone>(mut sets: Vec<BTreeSet<A>>) -> Vec<BTreeSet<A>> {
    sets.sort_by_key(|s| s.len());
    let mut kept: Vec<BTreeSet<A>> = Vec::new();
    for s in sets {
        if !kept.iter().any(|k| k.is_subset(&s)) {
            kept.push(s);
        }
    }
    kept
}

/// Flattened (n-ary) positive formula, used for structural comparison and
/// printing up to associativity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlatPosBool<A> {
    True,
    False,
    Atom(A),
    And(Vec<FlatPosBool<A>>),
    Or(Vec<FlatPosBool<A>>),
}

impl<A: fmt::Display> fmt::Display for FlatPosBool<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list<A: fmt::Display>(
            f: &mut fmt::Formatter<'_>,
            head: &str,
            parts: &[FlatPosBool<A>],
        ) -> fmt::Result {
            write!(f, "{head}(")?;
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{p}")?;
            }
            write!(f, ")")
        }
        match self {
            FlatPosBool::True => write!(f, "true"),
            FlatPosBool::False => write!(f, "false"),
            FlatPosBool::Atom(a) => write!(f, "{a}"),
            FlatPosBool::And(parts) => list(f, "and", parts),
            FlatPosBool::Or(parts) => list(f, "or", parts),
        }
    }
}

/// De Morgan dual: swaps `True` with `False`, `And` with `Or`, and rewrites
/// each atom through `flip`. An involution whenever `flip` is.
pub fn dualize_pbf<A, B>(f: &PosBool<A>, flip: &mut impl FnMut(&A) -> B) -> PosBool<B> {
    match f {
        PosBool::True => PosBool::False,
        PosBool::False => PosBool::True,
        PosBool::Atom(a) => PosBool::Atom(flip(a)),
        PosBool::And(l, r) => PosBool::or(dualize_pbf(l, flip), dualize_pbf(r, flip)),
        PosBool::Or(l, r) => PosBool::and(dualize_pbf(l, flip), dualize_pbf(r, flip)),
    }
}

pub type StateId = usize;
pub type StateAtom = (StateId, Move);

#[derive(Debug, Error)]
pub enum TwataError {
    #[error("term symbol `{0}` is not in the automaton alphabet")]
    ForeignSymbol(String),
}

/// A two-way alternating tree automaton with reachability acceptance.
///
/// `delta` is total on states x symbols. States in `finals` are immediately
/// winning; acceptance produced by evaluator compilation is carried by `True`
/// constants instead of explicit absorbing states.
#[derive(Clone, Debug)]
pub struct Twata {
    alphabet: RankedAlphabet,
    state_names: Vec<String>,
    initial: StateId,
    delta: Vec<PosBool<StateAtom>>, // indexed state * n_symbols + symbol
    finals: BTreeSet<StateId>,
}

impl Twata {
    pub fn new(
        alphabet: RankedAlphabet,
        state_names: Vec<String>,
        initial: StateId,
        delta: Vec<PosBool<StateAtom>>,
        finals: BTreeSet<StateId>,
    ) -> Twata {
        let n_states = state_names.len();
        let n_syms = alphabet.len();
        assert!(initial < n_states);
        assert_eq!(delta.len(), n_states * n_syms, "delta must be total");
        for (idx, f) in delta.iter().enumerate() {
            let sym = alphabet.symbol(idx % n_syms);
            for (q, mv) in f.atoms() {
                assert!(*q < n_states, "atom references undeclared state {q}");
                if let Move::Child(i) = mv {
                    assert!(
                        *i >= 1 && *i <= sym.arity(),
                        "atom child index {i} out of range for {sym}"
                    );
                }
            }
        }
        for q in &finals {
            assert!(*q < n_states);
        }
        Twata {
            alphabet,
            state_names,
            initial,
            delta,
            finals,
        }
    }

    pub fn alphabet(&self) -> &RankedAlphabet {
        &self.alphabet
    }

    pub fn n_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.state_names[q]
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    /// Same automaton starting from a different state.
    pub fn with_initial(&self, initial: StateId) -> Twata {
        assert!(initial < self.n_states());
        Twata {
            initial,
            ..self.clone()
        }
    }

    pub fn finals(&self) -> &BTreeSet<StateId> {
        &self.finals
    }

    pub fn delta(&self, q: StateId, symbol_id: usize) -> &PosBool<StateAtom> {
        &self.delta[q * self.alphabet.len() + symbol_id]
    }

    /// Fixed-tree acceptance: solves the reachability game on `t` by least
    /// fixpoint over (node, state) positions.
    pub fn accepts(&self, t: &Term) -> Result<bool, TwataError> {
        let win = self.winning_positions(t)?;
        Ok(win[self.initial][0])
    }

    /// The full WIN table for `t`, indexed `[state][node]` with nodes in
    /// preorder. Exposed so callers can query several initial states without
    /// re-solving the game.
    pub fn winning_positions(&self, t: &Term) -> Result<Vec<Vec<bool>>, TwataError> {
        let nodes = t.flatten();
        let n_nodes = nodes.len();
        let n_states = self.n_states();

        let mut sym_ids = Vec::with_capacity(n_nodes);
        let mut child_ids: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
        for (idx, (node, parent)) in nodes.iter().enumerate() {
            let sid = self
                .alphabet
                .symbol_id(node.symbol().name())
                .filter(|&i| self.alphabet.symbol(i) == node.symbol())
                .ok_or_else(|| TwataError::ForeignSymbol(node.symbol().name().to_string()))?;
            sym_ids.push(sid);
            if let Some(p) = parent {
                child_ids[*p].push(idx);
            }
        }
        let parents: Vec<Option<usize>> = nodes.iter().map(|(_, p)| *p).collect();

        let mut win = vec![vec![false; n_nodes]; n_states];
        for &q in &self.finals {
            for v in 0..n_nodes {
                win[q][v] = true;
            }
        }
        loop {
            let mut changed = false;
            for v in 0..n_nodes {
                for q in 0..n_states {
                    if win[q][v] {
                        continue;
                    }
                    let holds = self.delta(q, sym_ids[v]).eval(&mut |&(p, mv)| {
                        let target = match mv {
                            Move::Up => parents[v],
                            Move::Stay => Some(v),
                            Move::Child(i) => child_ids[v].get(i - 1).copied(),
                        };
                        match target {
                            Some(u) => win[p][u],
                            None => false,
                        }
                    });
                    if holds {
                        win[q][v] = true;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        Ok(win)
    }

    /// Converts to a bottom-up automaton over antichain exit-set summaries;
    /// accepts exactly the terms this automaton accepts.
    pub fn to_nfta(&self) -> crate::nfta::Nfta {
        crate::nfta::Nfta::from_twata(self.clone())
    }

    /// Text dump: one line per (state, symbol) with the transition formula in
    /// prefix notation.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for q in 0..self.n_states() {
            for (sid, sym) in self.alphabet.symbols().iter().enumerate() {
                let pbf = self.delta(q, sid).map(&mut |&(p, mv)| {
                    format!("({},{})", self.state_names[p], mv)
                });
                out.push_str(&format!(
                    "{} {}: {}\n",
                    self.state_names[q],
                    sym.name(),
                    pbf.flatten()
                ));
            }
        }
        out
    }

    /// Size diagnostics: alternating states, reachable summaries, and
    /// transitions explored while saturating the conversion.
    pub fn count_reachable(&self) -> ReachStats {
        let nfta = self.to_nfta();
        let (summaries, transitions) = nfta.saturate(usize::MAX);
        ReachStats {
            twata_states: self.n_states(),
            nfta_summaries: summaries,
            transitions_explored: transitions,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReachStats {
    pub twata_states: usize,
    pub nfta_summaries: usize,
    pub transitions_explored: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{parse_term, RankedAlphabet};
    use proptest::prelude::*;

    fn tiny_alphabet() -> RankedAlphabet {
        RankedAlphabet::new(&[("f", 2), ("g", 1), ("a", 0)]).unwrap()
    }

    fn atom(q: StateId, mv: Move) -> PosBool<StateAtom> {
        PosBool::Atom((q, mv))
    }

    #[test]
    fn immediate_accept_when_initial_final() {
        let alph = tiny_alphabet();
        let n_syms = alph.len();
        let delta = vec![PosBool::False; n_syms];
        let aut = Twata::new(
            alph.clone(),
            vec!["q0".into()],
            0,
            delta,
            [0].into_iter().collect(),
        );
        for text in ["a", "g(a)", "f(a,g(a))"] {
            let t = parse_term(text, &alph).unwrap();
            assert!(aut.accepts(&t).unwrap());
        }
    }

    #[test]
    fn self_loop_without_final_rejects() {
        let alph = RankedAlphabet::new(&[("a", 0)]).unwrap();
        let delta = vec![atom(0, Move::Stay)];
        let aut = Twata::new(alph.clone(), vec!["q0".into()], 0, delta, BTreeSet::new());
        let t = parse_term("a", &alph).unwrap();
        assert!(!aut.accepts(&t).unwrap());
    }

    #[test]
    fn up_at_root_is_dead() {
        let alph = RankedAlphabet::new(&[("a", 0)]).unwrap();
        let delta = vec![atom(0, Move::Up)];
        let aut = Twata::new(alph.clone(), vec!["q0".into()], 0, delta, BTreeSet::new());
        let t = parse_term("a", &alph).unwrap();
        assert!(!aut.accepts(&t).unwrap());
    }

    #[test]
    fn foreign_symbol_is_reported() {
        let alph = RankedAlphabet::new(&[("a", 0)]).unwrap();
        let other = RankedAlphabet::new(&[("b", 0)]).unwrap();
        let aut = Twata::new(
            alph,
            vec!["q0".into()],
            0,
            vec![PosBool::True],
            BTreeSet::new(),
        );
        let t = parse_term("b", &other).unwrap();
        assert!(matches!(
            aut.accepts(&t),
            Err(TwataError::ForeignSymbol(name)) if name == "b"
        ));
    }

    #[test]
    fn dual_swaps_constants_and_connectives() {
        let f: PosBool<(usize, Move)> = PosBool::True;
        assert_eq!(dualize_pbf(&f, &mut |a| *a), PosBool::False);

        let f = PosBool::and(atom(0, Move::Child(1)), atom(1, Move::Child(2)));
        let dual = dualize_pbf(&f, &mut |&(q, mv)| (q + 10, mv));
        assert_eq!(
            dual,
            PosBool::or(
                PosBool::Atom((10, Move::Child(1))),
                PosBool::Atom((11, Move::Child(2)))
            )
        );
    }

    #[test]
    fn minimize_is_idempotent_on_example() {
        let sets: Vec<BTreeSet<u32>> = vec![
            [1, 2].into_iter().collect(),
            [1].into_iter().collect(),
            [2, 3].into_iter().collect(),
            [1, 2, 3].into_iter().collect(),
        ];
        let once = minimize_sets(sets);
        let twice = minimize_sets(once.clone());
        assert_eq!(once, twice);
        assert_eq!(once.len(), 2);
    }

    fn arb_pbf() -> impl Strategy<Value = PosBool<u8>> {
        let leaf = prop_oneof![
            Just(PosBool::True),
            Just(PosBool::False),
            (0u8..5).prop_map(PosBool::Atom),
        ];
        leaf.prop_recursive(4, 32, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(l, r)| PosBool::and(l, r)),
                (inner.clone(), inner).prop_map(|(l, r)| PosBool::or(l, r)),
            ]
        })
    }

    proptest! {
        #[test]
        fn dualize_is_an_involution(f in arb_pbf()) {
            let back = dualize_pbf(&dualize_pbf(&f, &mut |a| *a), &mut |a| *a);
            prop_assert_eq!(back, f);
        }

        #[test]
        fn satisfaction_is_monotone(f in arb_pbf(), base in proptest::collection::btree_set(0u8..5, 0..5), extra in 0u8..5) {
            let sat_base = f.eval(&mut |a| base.contains(a));
            if sat_base {
                let mut bigger = base.clone();
                bigger.insert(extra);
                prop_assert!(f.eval(&mut |a| bigger.contains(a)));
            }
        }

        #[test]
        fn minimal_models_characterize_satisfaction(f in arb_pbf(), assignment in proptest::collection::btree_set(0u8..5, 0..5)) {
            let sat = f.eval(&mut |a| assignment.contains(a));
            let models = f.minimal_models();
            let by_models = models.iter().any(|m| m.is_subset(&assignment));
            prop_assert_eq!(sat, by_models);
        }

        #[test]
        fn minimize_sets_is_idempotent(sets in proptest::collection::vec(proptest::collection::btree_set(0u8..6, 0..4), 0..8)) {
            let once = minimize_sets(sets);
            let twice = minimize_sets(once.clone());
            prop_assert_eq!(once, twice);
        }
    }
}
