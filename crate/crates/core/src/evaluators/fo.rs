//! First-order logic with k variables over finite relational structures.
//!
//! Aspects are the partial assignments from variables to universe elements;
//! quantifiers branch over every rebinding of their variable, and an atom
//! holds when all its variables are assigned and the tuple is in the
//! relation.

use super::{EvalError, StructureParseError};
use crate::aspects::{Aspect, AspectAtom, Evaluator, Label};
use crate::term::{RankedAlphabet, Symbol, Term};
use crate::twata::{Move, PosBool};
use serde::Deserialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use super::ratfo::default_variables;

#[derive(Clone, Debug)]
pub struct RelStructure {
    universe: Vec<String>,
    relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
}

impl RelStructure {
    pub fn new(
        universe: Vec<String>,
        signature: &BTreeMap<String, usize>,
        tuples: &BTreeMap<String, Vec<Vec<String>>>,
    ) -> Result<RelStructure, StructureParseError> {
        let index = |name: &str| -> Result<usize, StructureParseError> {
            universe
                .iter()
                .position(|e| e == name)
                .ok_or_else(|| super::bad(format!("unknown element `{name}`")))
        };
        let mut relations = BTreeMap::new();
        for (rel, &arity) in signature {
            let mut set = BTreeSet::new();
            if let Some(rows) = tuples.get(rel) {
                for row in rows {
                    if row.len() != arity {
                        return Err(super::bad(format!(
                            "relation `{rel}` expects arity {arity}, got {}",
                            row.len()
                        )));
                    }
                    set.insert(
                        row.iter()
                            .map(|e| index(e))
                            .collect::<Result<Vec<_>, _>>()?,
                    );
                }
            }
            relations.insert(rel.clone(), set);
        }
        for rel in tuples.keys() {
            if !signature.contains_key(rel) {
                return Err(super::bad(format!("relation `{rel}` not in signature")));
            }
        }
        Ok(RelStructure {
            universe,
            relations,
        })
    }

    pub fn universe_len(&self) -> usize {
        self.universe.len()
    }

    pub fn holds(&self, rel: &str, tuple: &[usize]) -> bool {
        self.relations
            .get(rel)
            .map(|set| set.contains(tuple))
            .unwrap_or(false)
    }
}

#[derive(Deserialize)]
struct RelJson {
    universe: Vec<String>,
    #[serde(default)]
    relations: BTreeMap<String, Vec<Vec<String>>>,
}

pub fn parse_rel_structure(
    v: &serde_json::Value,
    signature: &BTreeMap<String, usize>,
) -> Result<RelStructure, StructureParseError> {
    let raw: RelJson = serde_json::from_value(v.clone()).map_err(|e| super::bad(e.to_string()))?;
    RelStructure::new(raw.universe, signature, &raw.relations)
}

/// A partial assignment of universe elements to the k variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialAssign(pub Vec<Option<usize>>);

impl fmt::Display for PartialAssign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|slot| match slot {
                Some(e) => e.to_string(),
                None => "_".to_string(),
            })
            .collect();
        write!(f, "[{}]", parts.join(","))
    }
}

pub struct FoEvaluator {
    alphabet: RankedAlphabet,
    variables: Vec<String>,
    signature: BTreeMap<String, usize>,
    /// atom symbol name -> (relation, variable indices)
    atoms: BTreeMap<String, (String, Vec<usize>)>,
}

impl FoEvaluator {
    pub fn new(signature: BTreeMap<String, usize>, variables: Vec<String>) -> FoEvaluator {
        assert!(!variables.is_empty());
        let mut entries: Vec<(String, usize)> =
            vec![("and".into(), 2), ("or".into(), 2), ("not".into(), 1)];
        for v in &variables {
            entries.push((format!("forall_{v}"), 1));
            entries.push((format!("exists_{v}"), 1));
        }
        let mut atoms = BTreeMap::new();
        fn var_combos(arity: usize, k: usize) -> Vec<Vec<usize>> {
            if arity == 0 {
                return vec![Vec::new()];
            }
            let mut out = Vec::new();
            for shorter in var_combos(arity - 1, k) {
                for v in 0..k {
                    let mut c = shorter.clone();
                    c.push(v);
                    out.push(c);
                }
            }
            out
        }
        for (rel, &arity) in &signature {
            for combo in var_combos(arity, variables.len()) {
                let mut name = rel.clone();
                for &i in &combo {
                    name.push('_');
                    name.push_str(&variables[i]);
                }
                entries.push((name.clone(), 0));
                atoms.insert(name, (rel.clone(), combo));
            }
        }
        let refs: Vec<(&str, usize)> = entries.iter().map(|(n, a)| (n.as_str(), *a)).collect();
        let alphabet = RankedAlphabet::new(&refs).expect("fo alphabet");
        FoEvaluator {
            alphabet,
            variables,
            signature,
            atoms,
        }
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn signature(&self) -> &BTreeMap<String, usize> {
        &self.signature
    }

    fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }
}

impl Evaluator for FoEvaluator {
    type Structure = RelStructure;
    type Payload = PartialAssign;

    fn alphabet(&self) -> &RankedAlphabet {
        &self.alphabet
    }

    fn enumerate_aspects(&self, m: &RelStructure) -> Vec<PartialAssign> {
        let k = self.variables.len();
        let n = m.universe_len();
        let mut out = vec![PartialAssign(vec![None; k])];
        for slot in 0..k {
            let mut next = Vec::new();
            for p in &out {
                next.push(p.clone());
                for e in 0..n {
                    let mut q = p.clone();
                    q.0[slot] = Some(e);
                    next.push(q);
                }
            }
            out = next;
        }
        out.sort();
        out.dedup();
        out
    }

    fn initial(&self, _: &RelStructure, label: Label) -> Aspect<PartialAssign> {
        let p = PartialAssign(vec![None; self.variables.len()]);
        match label {
            Label::Positive => Aspect::plain(p),
            Label::Negative => Aspect::dual(p),
        }
    }

    fn transition(
        &self,
        m: &RelStructure,
        gamma: &PartialAssign,
        symbol: &Symbol,
    ) -> PosBool<AspectAtom<PartialAssign>> {
        let here = |mv| PosBool::Atom((Aspect::plain(gamma.clone()), mv));
        let name = symbol.name();
        match name {
            "and" => PosBool::and(here(Move::Child(1)), here(Move::Child(2))),
            "or" => PosBool::or(here(Move::Child(1)), here(Move::Child(2))),
            "not" => PosBool::Atom((Aspect::dual(gamma.clone()), Move::Child(1))),
            _ => {
                if let Some(v) = name.strip_prefix("forall_").and_then(|v| self.var_index(v)) {
                    PosBool::and_all((0..m.universe_len()).map(|e| {
                        let mut q = gamma.clone();
                        q.0[v] = Some(e);
                        PosBool::Atom((Aspect::plain(q), Move::Child(1)))
                    }))
                } else if let Some(v) =
                    name.strip_prefix("exists_").and_then(|v| self.var_index(v))
                {
                    PosBool::or_all((0..m.universe_len()).map(|e| {
                        let mut q = gamma.clone();
                        q.0[v] = Some(e);
                        PosBool::Atom((Aspect::plain(q), Move::Child(1)))
                    }))
                } else if let Some((rel, vars)) = self.atoms.get(name) {
                    let tuple: Option<Vec<usize>> =
                        vars.iter().map(|&v| gamma.0[v]).collect();
                    match tuple {
                        Some(tuple) if m.holds(rel, &tuple) => PosBool::True,
                        _ => PosBool::False,
                    }
                } else {
                    PosBool::False
                }
            }
        }
    }
}

impl FoEvaluator {
    /// Direct recursive semantics over the structure; the independent oracle.
    pub fn reference(&self, m: &RelStructure, term: &Term) -> Result<bool, EvalError> {
        self.eval(m, term, &PartialAssign(vec![None; self.variables.len()]))
    }

    fn eval(
        &self,
        m: &RelStructure,
        term: &Term,
        gamma: &PartialAssign,
    ) -> Result<bool, EvalError> {
        let kids = term.children();
        let name = term.symbol().name();
        Ok(match name {
            "and" => self.eval(m, &kids[0], gamma)? && self.eval(m, &kids[1], gamma)?,
            "or" => self.eval(m, &kids[0], gamma)? || self.eval(m, &kids[1], gamma)?,
            "not" => !self.eval(m, &kids[0], gamma)?,
            _ => {
                if let Some(v) = name.strip_prefix("forall_").and_then(|v| self.var_index(v)) {
                    let mut all = true;
                    for e in 0..m.universe_len() {
                        let mut q = gamma.clone();
                        q.0[v] = Some(e);
                        all &= self.eval(m, &kids[0], &q)?;
                    }
                    all
                } else if let Some(v) =
                    name.strip_prefix("exists_").and_then(|v| self.var_index(v))
                {
                    let mut any = false;
                    for e in 0..m.universe_len() {
                        let mut q = gamma.clone();
                        q.0[v] = Some(e);
                        any |= self.eval(m, &kids[0], &q)?;
                    }
                    any
                } else if let Some((rel, vars)) = self.atoms.get(name) {
                    let tuple: Option<Vec<usize>> = vars.iter().map(|&v| gamma.0[v]).collect();
                    matches!(tuple, Some(t) if m.holds(rel, &t))
                } else {
                    return Err(EvalError::ForeignSymbol(name.to_string()));
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aspects::{build_twata, check_well_formed};
    use crate::term::parse_term;

    fn edge_sig() -> BTreeMap<String, usize> {
        [("E".to_string(), 2usize)].into_iter().collect()
    }

    fn two_node_path() -> RelStructure {
        RelStructure::new(
            vec!["1".into(), "2".into()],
            &edge_sig(),
            &[("E".to_string(), vec![vec!["1".into(), "2".into()]])]
                .into_iter()
                .collect(),
        )
        .unwrap()
    }

    fn empty_graph() -> RelStructure {
        RelStructure::new(vec!["1".into(), "2".into()], &edge_sig(), &BTreeMap::new()).unwrap()
    }

    #[test]
    fn exists_edge_on_path() {
        let ev = FoEvaluator::new(edge_sig(), default_variables(2));
        let m = two_node_path();
        let phi = parse_term("exists_x(exists_y(E_x_y))", ev.alphabet()).unwrap();
        assert!(ev.reference(&m, &phi).unwrap());
        let pos = build_twata(&ev, &m, Label::Positive).unwrap();
        assert!(pos.accepts(&phi).unwrap());
        assert!(pos.to_nfta().accepts(&phi).unwrap());
    }

    #[test]
    fn empty_relation_rejects() {
        let ev = FoEvaluator::new(edge_sig(), default_variables(2));
        let m = empty_graph();
        let phi = parse_term("exists_x(exists_y(E_x_y))", ev.alphabet()).unwrap();
        assert!(!ev.reference(&m, &phi).unwrap());
        let neg = build_twata(&ev, &m, Label::Negative).unwrap();
        assert!(neg.accepts(&phi).unwrap());
    }

    #[test]
    fn unassigned_atom_is_false() {
        let ev = FoEvaluator::new(edge_sig(), default_variables(2));
        let m = two_node_path();
        let phi = parse_term("E_x_y", ev.alphabet()).unwrap();
        assert!(!ev.reference(&m, &phi).unwrap());
        let pos = build_twata(&ev, &m, Label::Positive).unwrap();
        assert!(!pos.accepts(&phi).unwrap());
    }

    #[test]
    fn assigned_atom_reads_relation() {
        let ev = FoEvaluator::new(edge_sig(), default_variables(2));
        let m = two_node_path();
        for (text, expect) in [
            ("exists_x(exists_y(and(E_x_y,not(E_y_x))))", true),
            ("forall_x(exists_y(E_x_y))", false),
            ("exists_x(E_x_x)", false),
        ] {
            let phi = parse_term(text, ev.alphabet()).unwrap();
            assert_eq!(ev.reference(&m, &phi).unwrap(), expect, "{text}");
            let pos = build_twata(&ev, &m, Label::Positive).unwrap();
            assert_eq!(pos.accepts(&phi).unwrap(), expect, "automaton {text}");
        }
    }

    #[test]
    fn well_formed_and_aspect_count() {
        let ev = FoEvaluator::new(edge_sig(), default_variables(2));
        let m = two_node_path();
        assert!(check_well_formed(&ev, &m).is_empty());
        let aut = build_twata(&ev, &m, Label::Positive).unwrap();
        // (|M| + 1)^k partial assignments, both polarities
        assert_eq!(aut.n_states(), 2 * 9);
    }
}
