//! First-order logic with k variables over the rationals with order,
//! evaluated on k-tuples of exact rationals.
//!
//! Only the order type of an assignment matters, so aspects are the total
//! preorders on the variable set: ordered partitions into equivalence blocks.
//! Quantifiers branch over every placement of the bound variable relative to
//! the others; atoms read the block order directly.

use super::{EvalError, StructureParseError};
use crate::aspects::{Aspect, AspectAtom, Evaluator, Label};
use crate::term::{RankedAlphabet, Symbol, Term};
use crate::twata::{Move, PosBool};
use num::rational::Ratio;
use num::{One, Zero};
use serde::Deserialize;
use std::fmt;
use std::str::FromStr;

pub type Rat = Ratio<i64>;

#[derive(Clone, Debug)]
pub struct RatTuple {
    values: Vec<Rat>,
}

impl RatTuple {
    pub fn new(values: Vec<Rat>) -> RatTuple {
        assert!(!values.is_empty());
        RatTuple { values }
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }
}

#[derive(Deserialize)]
struct TupleJson {
    values: Vec<String>,
}

pub fn parse_tuple(v: &serde_json::Value) -> Result<RatTuple, StructureParseError> {
    let raw: TupleJson =
        serde_json::from_value(v.clone()).map_err(|e| super::bad(e.to_string()))?;
    if raw.values.is_empty() {
        return Err(super::bad("tuple needs at least one value"));
    }
    let values = raw
        .values
        .iter()
        .map(|s| Rat::from_str(s).map_err(|e| super::bad(format!("value `{s}`: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RatTuple::new(values))
}

/// A total preorder on variable indices: ordered blocks, each block sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Preorder {
    blocks: Vec<Vec<usize>>,
}

impl Preorder {
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    fn block_of(&self, var: usize) -> usize {
        self.blocks
            .iter()
            .position(|b| b.contains(&var))
            .expect("variable in some block")
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        self.block_of(a) < self.block_of(b)
    }

    pub fn eq_vars(&self, a: usize, b: usize) -> bool {
        self.block_of(a) == self.block_of(b)
    }

    /// The preorder induced by concrete values: blocks in ascending value
    /// order, equal values share a block.
    pub fn induced(values: &[Rat]) -> Preorder {
        let mut sorted: Vec<Rat> = values.to_vec();
        sorted.sort();
        sorted.dedup();
        let blocks = sorted
            .iter()
            .map(|v| {
                (0..values.len())
                    .filter(|&i| values[i] == *v)
                    .collect::<Vec<_>>()
            })
            .collect();
        Preorder { blocks }
    }

    fn without(&self, var: usize) -> Preorder {
        let blocks = self
            .blocks
            .iter()
            .filter_map(|b| {
                let nb: Vec<usize> = b.iter().copied().filter(|&v| v != var).collect();
                (!nb.is_empty()).then_some(nb)
            })
            .collect();
        Preorder { blocks }
    }

    fn insert_into_block(&self, idx: usize, var: usize) -> Preorder {
        let mut blocks = self.blocks.clone();
        blocks[idx].push(var);
        blocks[idx].sort_unstable();
        Preorder { blocks }
    }

    fn insert_gap(&self, idx: usize, var: usize) -> Preorder {
        let mut blocks = self.blocks.clone();
        blocks.insert(idx, vec![var]);
        Preorder { blocks }
    }
}

impl fmt::Display for Preorder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                b.iter()
                    .map(|v| format!("v{v}"))
                    .collect::<Vec<_>>()
                    .join("=")
            })
            .collect();
        write!(f, "{}", parts.join("<"))
    }
}

/// Every total preorder that agrees with `p` on the variables other than
/// `var`: 2m + 1 placements when removing `var` leaves m blocks.
pub fn place(var: usize, p: &Preorder) -> Vec<Preorder> {
    let base = p.without(var);
    let m = base.blocks.len();
    let mut out = Vec::with_capacity(2 * m + 1);
    for gap in 0..=m {
        out.push(base.insert_gap(gap, var));
    }
    for idx in 0..m {
        out.push(base.insert_into_block(idx, var));
    }
    out.sort();
    out.dedup();
    out
}

/// All total preorders on k variables (ordered set partitions).
pub fn all_preorders(k: usize) -> Vec<Preorder> {
    let mut out = vec![Preorder { blocks: Vec::new() }];
    for var in 0..k {
        let mut next = Vec::new();
        for p in &out {
            let m = p.blocks.len();
            for gap in 0..=m {
                next.push(p.insert_gap(gap, var));
            }
            for idx in 0..m {
                next.push(p.insert_into_block(idx, var));
            }
        }
        out = next;
    }
    out.sort();
    out.dedup();
    out
}

/// Default variable names: x, y, z, w for small k, x1.. beyond.
pub fn default_variables(k: usize) -> Vec<String> {
    if k <= 4 {
        ["x", "y", "z", "w"][..k].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=k).map(|i| format!("x{i}")).collect()
    }
}

pub struct RatFoEvaluator {
    alphabet: RankedAlphabet,
    variables: Vec<String>,
}

pub fn ratfo_alphabet(variables: &[String]) -> RankedAlphabet {
    let mut entries: Vec<(String, usize)> =
        vec![("and".into(), 2), ("or".into(), 2), ("not".into(), 1)];
    for v in variables {
        entries.push((format!("forall_{v}"), 1));
        entries.push((format!("exists_{v}"), 1));
    }
    for a in variables {
        for b in variables {
            if a != b {
                entries.push((format!("lt_{a}_{b}"), 0));
                entries.push((format!("eq_{a}_{b}"), 0));
            }
        }
    }
    let refs: Vec<(&str, usize)> = entries.iter().map(|(n, a)| (n.as_str(), *a)).collect();
    RankedAlphabet::new(&refs).expect("ratfo alphabet")
}

impl RatFoEvaluator {
    pub fn new(variables: Vec<String>) -> RatFoEvaluator {
        assert!(!variables.is_empty());
        RatFoEvaluator {
            alphabet: ratfo_alphabet(&variables),
            variables,
        }
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    fn split_pair(&self, rest: &str) -> Option<(usize, usize)> {
        // names may contain underscores, so try every split point
        for (i, _) in rest.match_indices('_') {
            let (a, b) = (&rest[..i], &rest[i + 1..]);
            if let (Some(x), Some(y)) = (self.var_index(a), self.var_index(b)) {
                return Some((x, y));
            }
        }
        None
    }
}

impl Evaluator for RatFoEvaluator {
    type Structure = RatTuple;
    type Payload = Preorder;

    fn alphabet(&self) -> &RankedAlphabet {
        &self.alphabet
    }

    fn enumerate_aspects(&self, t: &RatTuple) -> Vec<Preorder> {
        assert_eq!(t.k(), self.variables.len(), "tuple arity mismatch");
        all_preorders(self.variables.len())
    }

    fn initial(&self, t: &RatTuple, label: Label) -> Aspect<Preorder> {
        let p = Preorder::induced(t.values());
        match label {
            Label::Positive => Aspect::plain(p),
            Label::Negative => Aspect::dual(p),
        }
    }

    fn transition(
        &self,
        _t: &RatTuple,
        p: &Preorder,
        symbol: &Symbol,
    ) -> PosBool<AspectAtom<Preorder>> {
        let here = |mv| PosBool::Atom((Aspect::plain(p.clone()), mv));
        let name = symbol.name();
        match name {
            "and" => PosBool::and(here(Move::Child(1)), here(Move::Child(2))),
            "or" => PosBool::or(here(Move::Child(1)), here(Move::Child(2))),
            "not" => PosBool::Atom((Aspect::dual(p.clone()), Move::Child(1))),
            _ => {
                if let Some(v) = name.strip_prefix("forall_").and_then(|v| self.var_index(v)) {
                    PosBool::and_all(
                        place(v, p)
                            .into_iter()
                            .map(|q| PosBool::Atom((Aspect::plain(q), Move::Child(1)))),
                    )
                } else if let Some(v) =
                    name.strip_prefix("exists_").and_then(|v| self.var_index(v))
                {
                    PosBool::or_all(
                        place(v, p)
                            .into_iter()
                            .map(|q| PosBool::Atom((Aspect::plain(q), Move::Child(1)))),
                    )
                } else if let Some((a, b)) =
                    name.strip_prefix("lt_").and_then(|r| self.split_pair(r))
                {
                    if p.lt(a, b) {
                        PosBool::True
                    } else {
                        PosBool::False
                    }
                } else if let Some((a, b)) =
                    name.strip_prefix("eq_").and_then(|r| self.split_pair(r))
                {
                    if p.eq_vars(a, b) {
                        PosBool::True
                    } else {
                        PosBool::False
                    }
                } else {
                    PosBool::False
                }
            }
        }
    }
}

impl RatFoEvaluator {
    /// Direct semantics over the rationals, quantifying over finitely many
    /// representative values (existing values, midpoints, and the two
    /// outsides); independent of the preorder machinery.
    pub fn reference(&self, t: &RatTuple, term: &Term) -> Result<bool, EvalError> {
        assert_eq!(t.k(), self.variables.len(), "tuple arity mismatch");
        self.eval_concrete(term, &t.values().to_vec())
    }

    fn eval_concrete(&self, term: &Term, assignment: &Vec<Rat>) -> Result<bool, EvalError> {
        let kids = term.children();
        let name = term.symbol().name();
        Ok(match name {
            "and" => {
                self.eval_concrete(&kids[0], assignment)?
                    && self.eval_concrete(&kids[1], assignment)?
            }
            "or" => {
                self.eval_concrete(&kids[0], assignment)?
                    || self.eval_concrete(&kids[1], assignment)?
            }
            "not" => !self.eval_concrete(&kids[0], assignment)?,
            _ => {
                if let Some(v) = name.strip_prefix("forall_").and_then(|v| self.var_index(v)) {
                    let mut all = true;
                    for candidate in candidates(assignment, v) {
                        let mut next = assignment.clone();
                        next[v] = candidate;
                        all &= self.eval_concrete(&kids[0], &next)?;
                    }
                    all
                } else if let Some(v) =
                    name.strip_prefix("exists_").and_then(|v| self.var_index(v))
                {
                    let mut any = false;
                    for candidate in candidates(assignment, v) {
                        let mut next = assignment.clone();
                        next[v] = candidate;
                        any |= self.eval_concrete(&kids[0], &next)?;
                    }
                    any
                } else if let Some((a, b)) =
                    name.strip_prefix("lt_").and_then(|r| self.split_pair(r))
                {
                    assignment[a] < assignment[b]
                } else if let Some((a, b)) =
                    name.strip_prefix("eq_").and_then(|r| self.split_pair(r))
                {
                    assignment[a] == assignment[b]
                } else {
                    return Err(EvalError::ForeignSymbol(name.to_string()));
                }
            }
        })
    }
}

/// Representative values for a quantifier over `var`: density of the order
/// means each order type relative to the other values has a witness among the
/// existing values, the midpoints between neighbors, and one value on each
/// side.
fn candidates(assignment: &[Rat], var: usize) -> Vec<Rat> {
    let mut others: Vec<Rat> = assignment
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != var)
        .map(|(_, v)| *v)
        .collect();
    others.sort();
    others.dedup();
    if others.is_empty() {
        return vec![Rat::zero()];
    }
    let mut out = Vec::new();
    out.push(others[0] - Rat::one());
    for i in 0..others.len() {
        out.push(others[i]);
        if i + 1 < others.len() {
            out.push((others[i] + others[i + 1]) / Rat::from_integer(2));
        }
    }
    out.push(*others.last().unwrap() + Rat::one());
    out
}
