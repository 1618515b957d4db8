//! Context-free grammars as syntax trees, evaluated for word membership.
//!
//! A grammar is encoded with its productions along the right spine:
//! `top_A(rhs1, lhs_B(rhs2, ... end))`, where the top symbol carries the
//! first production's left-hand side, each right-hand side is a right-nested
//! `cat` tree over `term_a` and `rhs_A` leaves, and `end` closes the spine.
//!
//! Aspects are spans in one of three modes: parsing a subword (span mode),
//! climbing to the root after reading an `rhs_A` leaf (reset mode), or
//! walking the spine looking for `A`-productions (find mode). Dual soundness
//! requires productive encodings (every production has at least one
//! terminal); the learning pipeline intersects with [`productive_checker`]
//! and the reference interpreter refuses non-productive encodings outright.

use super::{EvalError, StructureParseError};
use crate::aspects::{Aspect, AspectAtom, Evaluator, Label};
use crate::nfta::{ExplicitNfta, Nfta, Rule};
use crate::term::{RankedAlphabet, Symbol, Term};
use crate::twata::{Move, PosBool};
use std::fmt;

pub use super::regex::{parse_word, WordStructure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CfgMode {
    Span,
    Find(usize),
    Reset(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CfgPayload {
    pub l: usize,
    pub r: usize,
    pub mode: CfgMode,
}

impl fmt::Display for CfgPayload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode {
            CfgMode::Span => write!(f, "({},{})", self.l, self.r),
            CfgMode::Find(a) => write!(f, "(({},{}),find{})", self.l, self.r, a),
            CfgMode::Reset(a) => write!(f, "(({},{}),reset{})", self.l, self.r, a),
        }
    }
}

pub struct CfgEvaluator {
    alphabet: RankedAlphabet,
    nonterminals: Vec<String>,
    terminals: Vec<char>,
}

pub fn cfg_alphabet(nonterminals: &[String], terminals: &[char]) -> RankedAlphabet {
    let mut entries: Vec<(String, usize)> = vec![("cat".into(), 2), ("end".into(), 0)];
    for nt in nonterminals {
        entries.push((format!("top_{nt}"), 2));
        entries.push((format!("lhs_{nt}"), 2));
        entries.push((format!("rhs_{nt}"), 0));
    }
    for &t in terminals {
        entries.push((format!("term_{t}"), 0));
    }
    let refs: Vec<(&str, usize)> = entries.iter().map(|(n, a)| (n.as_str(), *a)).collect();
    RankedAlphabet::new(&refs).expect("cfg alphabet")
}

impl CfgEvaluator {
    /// The first nonterminal is the axiom.
    pub fn new(nonterminals: Vec<String>, terminals: Vec<char>) -> CfgEvaluator {
        assert!(!nonterminals.is_empty());
        CfgEvaluator {
            alphabet: cfg_alphabet(&nonterminals, &terminals),
            nonterminals,
            terminals,
        }
    }

    pub fn nonterminals(&self) -> &[String] {
        &self.nonterminals
    }

    pub fn terminals(&self) -> &[char] {
        &self.terminals
    }

    fn nt_of(&self, symbol: &Symbol, prefix: &str) -> Option<usize> {
        symbol
            .name()
            .strip_prefix(prefix)
            .and_then(|nt| self.nonterminals.iter().position(|n| n == nt))
    }
}

impl Evaluator for CfgEvaluator {
    type Structure = WordStructure;
    type Payload = CfgPayload;

    fn alphabet(&self) -> &RankedAlphabet {
        &self.alphabet
    }

    fn enumerate_aspects(&self, w: &WordStructure) -> Vec<CfgPayload> {
        let n = w.len() + 1;
        let mut out = Vec::new();
        for l in 1..=n {
            for r in l..=n {
                out.push(CfgPayload {
                    l,
                    r,
                    mode: CfgMode::Span,
                });
                for a in 0..self.nonterminals.len() {
                    out.push(CfgPayload {
                        l,
                        r,
                        mode: CfgMode::Find(a),
                    });
                    out.push(CfgPayload {
                        l,
                        r,
                        mode: CfgMode::Reset(a),
                    });
                }
            }
        }
        out
    }

    fn initial(&self, w: &WordStructure, label: Label) -> Aspect<CfgPayload> {
        let p = CfgPayload {
            l: 1,
            r: w.len() + 1,
            mode: CfgMode::Reset(0),
        };
        match label {
            Label::Positive => Aspect::plain(p),
            Label::Negative => Aspect::dual(p),
        }
    }

    fn transition(
        &self,
        w: &WordStructure,
        payload: &CfgPayload,
        symbol: &Symbol,
    ) -> PosBool<AspectAtom<CfgPayload>> {
        let (l, r) = (payload.l, payload.r);
        let at = |l, r, mode, mv| {
            PosBool::Atom((Aspect::plain(CfgPayload { l, r, mode }), mv))
        };
        match payload.mode {
            CfgMode::Span => {
                if symbol.name() == "cat" {
                    PosBool::or_all((l..=r).map(|k| {
                        PosBool::and(
                            at(l, k, CfgMode::Span, Move::Child(1)),
                            at(k, r, CfgMode::Span, Move::Child(2)),
                        )
                    }))
                } else if let Some(a) = self.nt_of(symbol, "rhs_") {
                    at(l, r, CfgMode::Reset(a), Move::Up)
                } else if let Some(t) = symbol.name().strip_prefix("term_") {
                    let c = t.chars().next().unwrap();
                    if r == l + 1 && w.at(l) == c {
                        PosBool::True
                    } else {
                        PosBool::False
                    }
                } else {
                    PosBool::False
                }
            }
            CfgMode::Reset(z) => {
                if let Some(a) = self.nt_of(symbol, "top_") {
                    let find_rest = at(l, r, CfgMode::Find(z), Move::Child(2));
                    if a == z {
                        PosBool::or(at(l, r, CfgMode::Span, Move::Child(1)), find_rest)
                    } else {
                        find_rest
                    }
                } else {
                    at(l, r, CfgMode::Reset(z), Move::Up)
                }
            }
            CfgMode::Find(z) => {
                if let Some(a) = self.nt_of(symbol, "lhs_") {
                    let find_rest = at(l, r, CfgMode::Find(z), Move::Child(2));
                    if a == z {
                        PosBool::or(at(l, r, CfgMode::Span, Move::Child(1)), find_rest)
                    } else {
                        find_rest
                    }
                } else {
                    // reading `end` means no more productions for z; anything
                    // else cannot occur on the spine
                    PosBool::False
                }
            }
        }
    }
}

/// One right-hand-side item of a decoded production.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CfgItem {
    Terminal(char),
    Nonterminal(usize),
}

/// A decoded grammar: productions in spine order, left-hand sides as indices
/// into the evaluator's nonterminal list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodedCfg {
    pub productions: Vec<(usize, Vec<CfgItem>)>,
}

impl CfgEvaluator {
    /// Reads a grammar back out of its syntax tree.
    pub fn decode(&self, term: &Term) -> Result<DecodedCfg, EvalError> {
        let top = self
            .nt_of(term.symbol(), "top_")
            .ok_or_else(|| EvalError::BadEncoding(format!("root is {}", term.symbol())))?;
        let mut productions = Vec::new();
        productions.push((top, self.decode_rhs(&term.children()[0])?));
        let mut spine = &term.children()[1];
        loop {
            if spine.symbol().name() == "end" {
                break;
            }
            let nt = self.nt_of(spine.symbol(), "lhs_").ok_or_else(|| {
                EvalError::BadEncoding(format!("{} on the spine", spine.symbol()))
            })?;
            productions.push((nt, self.decode_rhs(&spine.children()[0])?));
            spine = &spine.children()[1];
        }
        Ok(DecodedCfg { productions })
    }

    fn decode_rhs(&self, t: &Term) -> Result<Vec<CfgItem>, EvalError> {
        let mut items = Vec::new();
        self.decode_rhs_into(t, &mut items)?;
        Ok(items)
    }

    fn decode_rhs_into(&self, t: &Term, items: &mut Vec<CfgItem>) -> Result<(), EvalError> {
        if t.symbol().name() == "cat" {
            self.decode_rhs_into(&t.children()[0], items)?;
            self.decode_rhs_into(&t.children()[1], items)?;
        } else if let Some(a) = self.nt_of(t.symbol(), "rhs_") {
            items.push(CfgItem::Nonterminal(a));
        } else if let Some(c) = t.symbol().name().strip_prefix("term_") {
            items.push(CfgItem::Terminal(c.chars().next().unwrap()));
        } else {
            return Err(EvalError::BadEncoding(format!(
                "{} inside a right-hand side",
                t.symbol()
            )));
        }
        Ok(())
    }

    /// Encodes productions as a syntax tree; inverse of [`decode`] for
    /// nonempty production lists.
    pub fn encode(&self, cfg: &DecodedCfg) -> Term {
        assert!(!cfg.productions.is_empty());
        let sym = |name: String| self.alphabet.lookup(&name).expect("cfg symbol").clone();
        let rhs_tree = |items: &[CfgItem]| -> Term {
            let leaf = |item: &CfgItem| match item {
                CfgItem::Terminal(c) => Term::leaf(sym(format!("term_{c}"))),
                CfgItem::Nonterminal(a) => {
                    Term::leaf(sym(format!("rhs_{}", self.nonterminals[*a])))
                }
            };
            let mut t = leaf(items.last().expect("nonempty rhs"));
            for item in items.iter().rev().skip(1) {
                t = Term::new(sym("cat".into()), vec![leaf(item), t]);
            }
            t
        };
        let mut spine = Term::leaf(sym("end".into()));
        for (nt, items) in cfg.productions.iter().skip(1).rev() {
            spine = Term::new(
                sym(format!("lhs_{}", self.nonterminals[*nt])),
                vec![rhs_tree(items), spine],
            );
        }
        let (first_nt, first_items) = &cfg.productions[0];
        Term::new(
            sym(format!("top_{}", self.nonterminals[*first_nt])),
            vec![rhs_tree(first_items), spine],
        )
    }

    /// Word membership for the encoded grammar by a bottom-up least fixpoint
    /// over (nonterminal, span); refuses non-productive encodings. The
    /// independent oracle for the automata path.
    pub fn reference(&self, w: &WordStructure, term: &Term) -> Result<bool, EvalError> {
        let cfg = self.decode(term)?;
        for (nt, items) in &cfg.productions {
            if !items.iter().any(|i| matches!(i, CfgItem::Terminal(_))) {
                return Err(EvalError::NonProductive(self.nonterminals[*nt].clone()));
            }
        }
        let n = w.len() + 1;
        let n_nts = self.nonterminals.len();
        // derivable[nt][l][r]
        let mut derivable = vec![vec![vec![false; n + 1]; n + 1]; n_nts];
        loop {
            let mut changed = false;
            for (nt, items) in &cfg.productions {
                for l in 1..=n {
                    for r in l..=n {
                        if !derivable[*nt][l][r] && derives(items, l, r, w, &derivable) {
                            derivable[*nt][l][r] = true;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        Ok(derivable[0][1][w.len() + 1])
    }
}

fn derives(
    items: &[CfgItem],
    l: usize,
    r: usize,
    w: &WordStructure,
    derivable: &[Vec<Vec<bool>>],
) -> bool {
    match items.split_first() {
        None => l == r,
        Some((CfgItem::Terminal(c), rest)) => {
            l < r && w.at(l) == *c && derives(rest, l + 1, r, w, derivable)
        }
        Some((CfgItem::Nonterminal(b), rest)) => {
            (l..=r).any(|k| derivable[*b][l][k] && derives(rest, k, r, w, derivable))
        }
    }
}

/// Accepts exactly the well-shaped encodings in which every production's
/// right-hand side contains at least one terminal.
pub fn productive_checker(nonterminals: &[String], terminals: &[char]) -> Nfta {
    let alphabet = cfg_alphabet(nonterminals, terminals);
    let names = vec![
        "rhs_with_terminal".into(),
        "rhs_without_terminal".into(),
        "spine".into(),
        "accept".into(),
    ];
    let (has, none, spine, acc) = (0u32, 1u32, 2u32, 3u32);
    let mut rules = Vec::new();
    let id = |n: &str| alphabet.symbol_id(n).unwrap();
    for &t in terminals {
        rules.push(Rule {
            symbol: id(&format!("term_{t}")),
            children: vec![],
            parent: has,
        });
    }
    for nt in nonterminals {
        rules.push(Rule {
            symbol: id(&format!("rhs_{nt}")),
            children: vec![],
            parent: none,
        });
    }
    for (a, b, p) in [
        (has, has, has),
        (has, none, has),
        (none, has, has),
        (none, none, none),
    ] {
        rules.push(Rule {
            symbol: id("cat"),
            children: vec![a, b],
            parent: p,
        });
    }
    rules.push(Rule {
        symbol: id("end"),
        children: vec![],
        parent: spine,
    });
    for nt in nonterminals {
        rules.push(Rule {
            symbol: id(&format!("lhs_{nt}")),
            children: vec![has, spine],
            parent: spine,
        });
        rules.push(Rule {
            symbol: id(&format!("top_{nt}")),
            children: vec![has, spine],
            parent: acc,
        });
    }
    Nfta::Explicit(ExplicitNfta::new(
        alphabet,
        names,
        rules,
        [acc].into_iter().collect(),
    ))
}

/// Accepts the well-shaped encodings containing at least one terminal-free
/// production; its product with a meta-grammar exposes non-productive
/// grammars the meta-grammar admits.
pub fn non_productive_checker(nonterminals: &[String], terminals: &[char]) -> Nfta {
    let alphabet = cfg_alphabet(nonterminals, terminals);
    let names = vec![
        "rhs_with_terminal".into(),
        "rhs_without_terminal".into(),
        "spine_ok".into(),
        "spine_bad".into(),
        "accept".into(),
    ];
    let (has, none, ok, bad, acc) = (0u32, 1u32, 2u32, 3u32, 4u32);
    let mut rules = Vec::new();
    let id = |n: &str| alphabet.symbol_id(n).unwrap();
    for &t in terminals {
        rules.push(Rule {
            symbol: id(&format!("term_{t}")),
            children: vec![],
            parent: has,
        });
    }
    for nt in nonterminals {
        rules.push(Rule {
            symbol: id(&format!("rhs_{nt}")),
            children: vec![],
            parent: none,
        });
    }
    for (a, b, p) in [
        (has, has, has),
        (has, none, has),
        (none, has, has),
        (none, none, none),
    ] {
        rules.push(Rule {
            symbol: id("cat"),
            children: vec![a, b],
            parent: p,
        });
    }
    rules.push(Rule {
        symbol: id("end"),
        children: vec![],
        parent: ok,
    });
    for nt in nonterminals {
        for (rhs, rest, parent) in [
            (has, ok, ok),
            (none, ok, bad),
            (has, bad, bad),
            (none, bad, bad),
        ] {
            rules.push(Rule {
                symbol: id(&format!("lhs_{nt}")),
                children: vec![rhs, rest],
                parent,
            });
        }
        for (rhs, rest) in [(none, ok), (none, bad), (has, bad)] {
            rules.push(Rule {
                symbol: id(&format!("top_{nt}")),
                children: vec![rhs, rest],
                parent: acc,
            });
        }
    }
    Nfta::Explicit(ExplicitNfta::new(
        alphabet,
        names,
        rules,
        [acc].into_iter().collect(),
    ))
}
