//! Ranked alphabets, finite syntax trees, and regular tree grammars.
//!
//! Terms are hash-consed: structurally equal terms share one allocation, so
//! equality and hashing are pointer operations and per-node memo tables stay
//! cheap across the many shared subtrees the learning loop produces.

use once_cell::sync::Lazy;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};
use thiserror::Error;

/// An alphabet symbol: a nonempty name with a fixed arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    name: Arc<str>,
    arity: usize,
}

impl Symbol {
    pub fn new(name: &str, arity: usize) -> Symbol {
        assert!(!name.is_empty(), "symbol name must be nonempty");
        Symbol {
            name: Arc::from(name),
            arity,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

#[derive(Debug, Error)]
pub enum AlphabetError {
    #[error("duplicate symbol name `{0}`")]
    DuplicateSymbol(String),
    #[error("alphabet has no symbol of arity 0, so no finite terms exist")]
    NoNullarySymbol,
}

/// A finite set of symbols with unique names and at least one nullary symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedAlphabet {
    symbols: Vec<Symbol>,
    by_name: HashMap<Arc<str>, usize>,
}

impl RankedAlphabet {
    pub fn new(entries: &[(&str, usize)]) -> Result<RankedAlphabet, AlphabetError> {
        let mut symbols = Vec::with_capacity(entries.len());
        let mut by_name = HashMap::new();
        for &(name, arity) in entries {
            let sym = Symbol::new(name, arity);
            if by_name.insert(sym.name.clone(), symbols.len()).is_some() {
                return Err(AlphabetError::DuplicateSymbol(name.to_string()));
            }
            symbols.push(sym);
        }
        if !symbols.iter().any(|s| s.arity == 0) {
            return Err(AlphabetError::NoNullarySymbol);
        }
        Ok(RankedAlphabet { symbols, by_name })
    }

    pub fn lookup(&self, name: &str) -> Option<&Symbol> {
        self.by_name.get(name).map(|&i| &self.symbols[i])
    }

    pub fn symbol_id(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn symbol(&self, id: usize) -> &Symbol {
        &self.symbols[id]
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn max_arity(&self) -> usize {
        self.symbols.iter().map(|s| s.arity).max().unwrap_or(0)
    }

    pub fn contains(&self, sym: &Symbol) -> bool {
        self.lookup(sym.name()) == Some(sym)
    }
}

#[derive(Debug)]
struct TermNode {
    symbol: Symbol,
    children: Vec<Term>,
    size: u32,
}

/// An immutable syntax tree over some ranked alphabet.
///
/// `Eq`/`Hash` are pointer-based (valid because construction interns), while
/// `Ord` is the structural order used for witness tie-breaking: symbol name
/// first, then children left to right.
#[derive(Clone)]
pub struct Term(Arc<TermNode>);

type InternKey = (Symbol, Vec<Term>);

static INTERN: Lazy<Mutex<HashMap<InternKey, Term>>> = Lazy::new(|| Mutex::new(HashMap::new()));

impl Term {
    pub fn new(symbol: Symbol, children: Vec<Term>) -> Term {
        assert_eq!(
            symbol.arity(),
            children.len(),
            "arity mismatch constructing term with symbol {symbol}"
        );
        let mut table = INTERN.lock().unwrap();
        if let Some(t) = table.get(&(symbol.clone(), children.clone())) {
            return t.clone();
        }
        let size = 1 + children.iter().map(|c| c.size()).sum::<u32>();
        let term = Term(Arc::new(TermNode {
            symbol: symbol.clone(),
            children: children.clone(),
            size,
        }));
        table.insert((symbol, children), term.clone());
        term
    }

    pub fn leaf(symbol: Symbol) -> Term {
        Term::new(symbol, Vec::new())
    }

    pub fn symbol(&self) -> &Symbol {
        &self.0.symbol
    }

    pub fn children(&self) -> &[Term] {
        &self.0.children
    }

    /// Node count.
    pub fn size(&self) -> u32 {
        self.0.size
    }

    /// All nodes in preorder, each with its parent's preorder index.
    pub fn flatten(&self) -> Vec<(Term, Option<usize>)> {
        let mut out = Vec::with_capacity(self.size() as usize);
        fn walk(t: &Term, parent: Option<usize>, out: &mut Vec<(Term, Option<usize>)>) {
            let me = out.len();
            out.push((t.clone(), parent));
            for c in t.children() {
                walk(c, Some(me), out);
            }
        }
        walk(self, None, &mut out);
        out
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Term {}

impl std::hash::Hash for Term {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        (Arc::as_ptr(&self.0) as usize).hash(state);
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Term) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Term) -> std::cmp::Ordering {
        if self == other {
            return std::cmp::Ordering::Equal;
        }
        self.symbol()
            .name()
            .cmp(other.symbol().name())
            .then_with(|| self.symbol().arity().cmp(&other.symbol().arity()))
            .then_with(|| self.children().cmp(other.children()))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol().name())?;
        if !self.children().is_empty() {
            write!(f, "(")?;
            for (i, c) in self.children().iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TermParseError {
    #[error("unknown symbol `{name}` at byte {offset}")]
    UnknownSymbol { name: String, offset: usize },
    #[error("symbol `{name}` expects {expected} argument(s), found {found} at byte {offset}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
        offset: usize,
    },
    #[error("expected {expected} at byte {offset}")]
    Malformed { expected: &'static str, offset: usize },
    #[error("unexpected trailing input at byte {offset}")]
    TrailingInput { offset: usize },
}

struct TermParser<'a> {
    text: &'a [u8],
    pos: usize,
    alphabet: &'a RankedAlphabet,
}

impl<'a> TermParser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn ident(&mut self) -> Result<(String, usize), TermParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len()
            && (self.text[self.pos].is_ascii_alphanumeric() || self.text[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(TermParseError::Malformed {
                expected: "identifier",
                offset: start,
            });
        }
        Ok((
            String::from_utf8_lossy(&self.text[start..self.pos]).into_owned(),
            start,
        ))
    }

    fn eat(&mut self, ch: u8, expected: &'static str) -> Result<(), TermParseError> {
        self.skip_ws();
        if self.pos < self.text.len() && self.text[self.pos] == ch {
            self.pos += 1;
            Ok(())
        } else {
            Err(TermParseError::Malformed {
                expected,
                offset: self.pos,
            })
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn term(&mut self) -> Result<Term, TermParseError> {
        let (name, off) = self.ident()?;
        let sym = self
            .alphabet
            .lookup(&name)
            .ok_or(TermParseError::UnknownSymbol {
                name: name.clone(),
                offset: off,
            })?
            .clone();
        let mut children = Vec::new();
        if self.peek() == Some(b'(') {
            self.eat(b'(', "`(`")?;
            if self.peek() != Some(b')') {
                loop {
                    children.push(self.term()?);
                    if self.peek() == Some(b',') {
                        self.eat(b',', "`,`")?;
                    } else {
                        break;
                    }
                }
            }
            self.eat(b')', "`)`")?;
        }
        if children.len() != sym.arity() {
            return Err(TermParseError::ArityMismatch {
                name,
                expected: sym.arity(),
                found: children.len(),
                offset: off,
            });
        }
        Ok(Term::new(sym, children))
    }
}

/// Parses prefix notation `name(child,...,child)`; nullary symbols may omit
/// the parentheses. Round-trips with [`Term`]'s `Display`.
pub fn parse_term(text: &str, alphabet: &RankedAlphabet) -> Result<Term, TermParseError> {
    let mut p = TermParser {
        text: text.as_bytes(),
        pos: 0,
        alphabet,
    };
    let t = p.term()?;
    p.skip_ws();
    if p.pos != p.text.len() {
        return Err(TermParseError::TrailingInput { offset: p.pos });
    }
    Ok(t)
}

/// Right-hand side of a grammar production: a term over the alphabet with
/// nonterminals as extra nullary leaves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RhsTerm {
    Sym(Symbol, Vec<RhsTerm>),
    Nt(usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GrammarError {
    #[error("line {line}: expected `NT -> rhs`")]
    MalformedProduction { line: usize },
    #[error("line {line}: identifier `{name}` is neither an alphabet symbol nor a declared nonterminal")]
    UndeclaredIdentifier { name: String, line: usize },
    #[error("line {line}: symbol `{name}` expects {expected} argument(s), found {found}")]
    ArityViolation {
        name: String,
        expected: usize,
        found: usize,
        line: usize,
    },
    #[error("line {line}: nonterminal `{name}` shadows an alphabet symbol")]
    NonterminalShadowsSymbol { name: String, line: usize },
    #[error("line {line}: production right-hand side must start with an alphabet symbol")]
    BareNonterminalRhs { line: usize },
    #[error("grammar has no productions")]
    Empty,
    #[error("line {line}: {source}")]
    Syntax {
        line: usize,
        source: TermParseError,
    },
}

/// A regular tree grammar over a ranked alphabet.
#[derive(Clone, Debug)]
pub struct RegularTreeGrammar {
    alphabet: RankedAlphabet,
    nonterminals: Vec<String>,
    start: usize,
    productions: Vec<(usize, RhsTerm)>,
}

impl RegularTreeGrammar {
    pub fn new(
        alphabet: RankedAlphabet,
        nonterminals: Vec<String>,
        start: usize,
        productions: Vec<(usize, RhsTerm)>,
    ) -> RegularTreeGrammar {
        assert!(start < nonterminals.len());
        for (nt, rhs) in &productions {
            assert!(*nt < nonterminals.len());
            validate_rhs(rhs, &alphabet, nonterminals.len());
        }
        assert!(!productions.is_empty());
        RegularTreeGrammar {
            alphabet,
            nonterminals,
            start,
            productions,
        }
    }

    pub fn alphabet(&self) -> &RankedAlphabet {
        &self.alphabet
    }

    pub fn nonterminals(&self) -> &[String] {
        &self.nonterminals
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn productions(&self) -> &[(usize, RhsTerm)] {
        &self.productions
    }
}

fn validate_rhs(rhs: &RhsTerm, alphabet: &RankedAlphabet, n_nts: usize) {
    match rhs {
        RhsTerm::Nt(i) => assert!(*i < n_nts),
        RhsTerm::Sym(sym, kids) => {
            assert!(alphabet.contains(sym), "symbol {sym} not in alphabet");
            assert_eq!(sym.arity(), kids.len());
            for k in kids {
                validate_rhs(k, alphabet, n_nts);
            }
        }
    }
}

/// Parses the line-oriented grammar format: `#` comments, one production
/// `A -> rhs` per line, first left-hand side is the start nonterminal.
pub fn parse_grammar(
    text: &str,
    alphabet: &RankedAlphabet,
) -> Result<RegularTreeGrammar, GrammarError> {
    struct Line<'a> {
        no: usize,
        lhs: &'a str,
        rhs: &'a str,
    }
    let mut lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let no = idx + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let (lhs, rhs) = line
            .split_once("->")
            .ok_or(GrammarError::MalformedProduction { line: no })?;
        let lhs = lhs.trim();
        let rhs = rhs.trim();
        if lhs.is_empty()
            || rhs.is_empty()
            || !lhs
                .bytes()
                .all(|b| b.is_ascii_alphanumeric() || b == b'_')
        {
            return Err(GrammarError::MalformedProduction { line: no });
        }
        lines.push(Line { no, lhs, rhs });
    }
    if lines.is_empty() {
        return Err(GrammarError::Empty);
    }

    let mut nonterminals: Vec<String> = Vec::new();
    for l in &lines {
        if !nonterminals.iter().any(|n| n == l.lhs) {
            if alphabet.lookup(l.lhs).is_some() {
                return Err(GrammarError::NonterminalShadowsSymbol {
                    name: l.lhs.to_string(),
                    line: l.no,
                });
            }
            nonterminals.push(l.lhs.to_string());
        }
    }

    let nt_index =
        |name: &str| -> Option<usize> { nonterminals.iter().position(|n| n == name) };

    let mut productions = Vec::new();
    for l in &lines {
        let rhs = parse_rhs(l.rhs, l.no, alphabet, &nonterminals, &nt_index)?;
        if matches!(rhs, RhsTerm::Nt(_)) {
            return Err(GrammarError::BareNonterminalRhs { line: l.no });
        }
        productions.push((nt_index(l.lhs).unwrap(), rhs));
    }

    Ok(RegularTreeGrammar {
        alphabet: alphabet.clone(),
        nonterminals,
        start: 0,
        productions,
    })
}

fn parse_rhs(
    text: &str,
    line: usize,
    alphabet: &RankedAlphabet,
    nonterminals: &[String],
    nt_index: &dyn Fn(&str) -> Option<usize>,
) -> Result<RhsTerm, GrammarError> {
    // Reuse the term parser machinery by hand: a small recursive descent that
    // resolves identifiers to nonterminals first, then alphabet symbols.
    struct P<'a> {
        text: &'a [u8],
        pos: usize,
    }
    impl<'a> P<'a> {
        fn skip_ws(&mut self) {
            while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
        }
        fn peek(&mut self) -> Option<u8> {
            self.skip_ws();
            self.text.get(self.pos).copied()
        }
    }
    fn node(
        p: &mut P,
        line: usize,
        alphabet: &RankedAlphabet,
        nt_index: &dyn Fn(&str) -> Option<usize>,
    ) -> Result<RhsTerm, GrammarError> {
        p.skip_ws();
        let start = p.pos;
        while p.pos < p.text.len()
            && (p.text[p.pos].is_ascii_alphanumeric() || p.text[p.pos] == b'_')
        {
            p.pos += 1;
        }
        if p.pos == start {
            return Err(GrammarError::Syntax {
                line,
                source: TermParseError::Malformed {
                    expected: "identifier",
                    offset: start,
                },
            });
        }
        let name = String::from_utf8_lossy(&p.text[start..p.pos]).into_owned();
        let mut kids = Vec::new();
        let has_args = p.peek() == Some(b'(');
        if has_args {
            p.pos += 1;
            if p.peek() != Some(b')') {
                loop {
                    kids.push(node(p, line, alphabet, nt_index)?);
                    if p.peek() == Some(b',') {
                        p.pos += 1;
                    } else {
                        break;
                    }
                }
            }
            if p.peek() != Some(b')') {
                return Err(GrammarError::Syntax {
                    line,
                    source: TermParseError::Malformed {
                        expected: "`)`",
                        offset: p.pos,
                    },
                });
            }
            p.pos += 1;
        }
        if let Some(i) = nt_index(&name) {
            if !kids.is_empty() {
                return Err(GrammarError::ArityViolation {
                    name,
                    expected: 0,
                    found: kids.len(),
                    line,
                });
            }
            return Ok(RhsTerm::Nt(i));
        }
        let sym = alphabet
            .lookup(&name)
            .ok_or(GrammarError::UndeclaredIdentifier {
                name: name.clone(),
                line,
            })?;
        if sym.arity() != kids.len() {
            return Err(GrammarError::ArityViolation {
                name,
                expected: sym.arity(),
                found: kids.len(),
                line,
            });
        }
        Ok(RhsTerm::Sym(sym.clone(), kids))
    }
    let mut p = P {
        text: text.as_bytes(),
        pos: 0,
    };
    let rhs = node(&mut p, line, alphabet, nt_index)?;
    p.skip_ws();
    if p.pos != p.text.len() {
        return Err(GrammarError::Syntax {
            line,
            source: TermParseError::TrailingInput { offset: p.pos },
        });
    }
    let _ = nonterminals;
    Ok(rhs)
}

/// Exactly the grammar terms of size at most `max_size`, by bottom-up dynamic
/// programming over (nonterminal, size). Brute-force oracle for the automata
/// path.
pub fn generate_upto(grammar: &RegularTreeGrammar, max_size: u32) -> BTreeSet<Term> {
    assert!(max_size >= 1);
    let n_nts = grammar.nonterminals().len();
    // table[nt][s] = terms of size exactly s derivable from nt
    let mut table: Vec<Vec<BTreeSet<Term>>> =
        vec![vec![BTreeSet::new(); max_size as usize + 1]; n_nts];

    fn rhs_terms(
        rhs: &RhsTerm,
        size: u32,
        table: &[Vec<BTreeSet<Term>>],
    ) -> Vec<Term> {
        match rhs {
            RhsTerm::Nt(i) => table[*i][size as usize].iter().cloned().collect(),
            RhsTerm::Sym(sym, kids) => {
                if kids.is_empty() {
                    if size == 1 {
                        vec![Term::leaf(sym.clone())]
                    } else {
                        Vec::new()
                    }
                } else {
                    if size < 1 {
                        return Vec::new();
                    }
                    let mut out = Vec::new();
                    // distribute size-1 over the children
                    fn go(
                        kids: &[RhsTerm],
                        remaining: u32,
                        acc: &mut Vec<Term>,
                        out: &mut Vec<Vec<Term>>,
                        table: &[Vec<BTreeSet<Term>>],
                    ) {
                        if kids.is_empty() {
                            if remaining == 0 {
                                out.push(acc.clone());
                            }
                            return;
                        }
                        let min_rest = (kids.len() - 1) as u32;
                        for s in 1..=remaining.saturating_sub(min_rest) {
                            for t in rhs_terms(&kids[0], s, table) {
                                acc.push(t);
                                go(&kids[1..], remaining - s, acc, out, table);
                                acc.pop();
                            }
                        }
                    }
                    let mut combos = Vec::new();
                    go(kids, size - 1, &mut Vec::new(), &mut combos, table);
                    for combo in combos {
                        out.push(Term::new(sym.clone(), combo));
                    }
                    out
                }
            }
        }
    }

    for s in 1..=max_size {
        // chain productions can feed each other at the same size; iterate to a
        // fixpoint within the size level
        loop {
            let mut changed = false;
            for (nt, rhs) in grammar.productions() {
                for t in rhs_terms(rhs, s, &table) {
                    if table[*nt][s as usize].insert(t) {
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    let mut out = BTreeSet::new();
    for s in 1..=max_size as usize {
        out.extend(table[grammar.start()][s].iter().cloned());
    }
    out
}

/// All terms over the alphabet with size at most `max`, smallest first within
/// each size level. Brute-force companion to [`generate_upto`] for exhaustive
/// small-instance checks.
pub fn generate_all_terms(alphabet: &RankedAlphabet, max: u32) -> Vec<Term> {
    let mut by_size: Vec<Vec<Term>> = vec![Vec::new(); max as usize + 1];
    for s in 1..=max {
        let mut level = Vec::new();
        for sym in alphabet.symbols() {
            let arity = sym.arity() as u32;
            if arity == 0 {
                if s == 1 {
                    level.push(Term::leaf(sym.clone()));
                }
                continue;
            }
            if s < 1 + arity {
                continue;
            }
            fn go(
                sym: &Symbol,
                remaining_slots: u32,
                budget: u32,
                by_size: &[Vec<Term>],
                stack: &mut Vec<Term>,
                level: &mut Vec<Term>,
            ) {
                if remaining_slots == 0 {
                    if budget == 0 {
                        level.push(Term::new(sym.clone(), stack.clone()));
                    }
                    return;
                }
                let reserve = remaining_slots - 1;
                for s in 1..=budget.saturating_sub(reserve) {
                    for t in &by_size[s as usize] {
                        stack.push(t.clone());
                        go(sym, remaining_slots - 1, budget - s, by_size, stack, level);
                        stack.pop();
                    }
                }
            }
            go(sym, arity, s - 1, &by_size, &mut Vec::new(), &mut level);
        }
        by_size[s as usize] = level;
    }
    by_size.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn modal_alphabet() -> RankedAlphabet {
        RankedAlphabet::new(&[
            ("and", 2),
            ("or", 2),
            ("not", 1),
            ("box", 1),
            ("dia", 1),
            ("a", 0),
            ("v", 0),
        ])
        .unwrap()
    }

    #[test]
    fn parse_basic_modal_term() {
        let alph = modal_alphabet();
        let t = parse_term("box(dia(or(a,v)))", &alph).unwrap();
        assert_eq!(t.size(), 5);
        assert_eq!(t.to_string(), "box(dia(or(a,v)))");
    }

    #[test]
    fn parse_leaf() {
        let alph = modal_alphabet();
        let t = parse_term("a", &alph).unwrap();
        assert_eq!(t.size(), 1);
        assert_eq!(t.symbol().name(), "a");
    }

    #[test]
    fn parse_arity_mismatch() {
        let alph = modal_alphabet();
        match parse_term("and(a)", &alph) {
            Err(TermParseError::ArityMismatch {
                name,
                expected,
                found,
                ..
            }) => {
                assert_eq!(name, "and");
                assert_eq!(expected, 2);
                assert_eq!(found, 1);
            }
            other => panic!("expected arity mismatch, got {other:?}"),
        }
    }

    #[test]
    fn parse_unknown_symbol_reports_offset() {
        let alph = modal_alphabet();
        match parse_term("box(zap)", &alph) {
            Err(TermParseError::UnknownSymbol { name, offset }) => {
                assert_eq!(name, "zap");
                assert_eq!(offset, 4);
            }
            other => panic!("expected unknown symbol, got {other:?}"),
        }
    }

    #[test]
    fn hash_consing_shares_nodes() {
        let alph = modal_alphabet();
        let t1 = parse_term("or(a,v)", &alph).unwrap();
        let t2 = parse_term("or(a,v)", &alph).unwrap();
        assert_eq!(t1, t2);
        assert!(Arc::ptr_eq(&t1.0, &t2.0));
    }

    #[test]
    fn grammar_roundtrip_and_start() {
        let alph = modal_alphabet();
        let g = parse_grammar("F -> and(F,F)\nF -> a", &alph).unwrap();
        assert_eq!(g.nonterminals(), &["F".to_string()]);
        assert_eq!(g.start(), 0);
        assert_eq!(g.productions().len(), 2);
    }

    #[test]
    fn grammar_undeclared_nonterminal() {
        let alph = modal_alphabet();
        match parse_grammar("F -> and(G,G)", &alph) {
            Err(GrammarError::UndeclaredIdentifier { name, .. }) => assert_eq!(name, "G"),
            other => panic!("expected undeclared identifier, got {other:?}"),
        }
    }

    #[test]
    fn grammar_comments_and_blank_lines() {
        let alph = modal_alphabet();
        let g = parse_grammar("# modal grammar\n\nF -> box(F) # safety\nF -> a\n", &alph).unwrap();
        assert_eq!(g.productions().len(), 2);
    }

    #[test]
    fn grammar_empty_is_error() {
        let alph = modal_alphabet();
        assert!(matches!(
            parse_grammar("# nothing here\n", &alph),
            Err(GrammarError::Empty)
        ));
    }

    #[test]
    fn generate_single_leaf() {
        let alph = modal_alphabet();
        let g = parse_grammar("F -> a", &alph).unwrap();
        let ts = generate_upto(&g, 3);
        assert_eq!(ts.len(), 1);
        assert_eq!(ts.iter().next().unwrap().to_string(), "a");
    }

    #[test]
    fn generate_unary_chain() {
        let alph = RankedAlphabet::new(&[("f", 1), ("a", 0)]).unwrap();
        let g = parse_grammar("F -> f(F)\nF -> a", &alph).unwrap();
        let ts: Vec<String> = generate_upto(&g, 3).iter().map(|t| t.to_string()).collect();
        assert_eq!(ts, vec!["a", "f(a)", "f(f(a))"]);
    }

    #[test]
    fn generate_modal_grammar_size_two() {
        let alph = modal_alphabet();
        let g = parse_grammar(
            "F -> box(F)\nF -> a\nF -> v\nF -> or(F,F)\nF -> dia(F)",
            &alph,
        )
        .unwrap();
        let ts: BTreeSet<String> = generate_upto(&g, 2).iter().map(|t| t.to_string()).collect();
        let expected: BTreeSet<String> = ["a", "v", "box(a)", "box(v)", "dia(a)", "dia(v)"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(ts, expected);
    }

    #[test]
    fn fig1_formula_is_generated() {
        // the grammar generates box(dia(or(a,v))): S ->* the figure's formula
        let alph = modal_alphabet();
        let g = parse_grammar(
            "F -> box(F)\nF -> a\nF -> v\nF -> or(F,F)\nF -> dia(F)",
            &alph,
        )
        .unwrap();
        let target = parse_term("box(dia(or(a,v)))", &alph).unwrap();
        assert!(generate_upto(&g, 5).contains(&target));
    }

    #[test]
    fn term_ordering_is_by_name_then_children() {
        let alph = modal_alphabet();
        let t1 = parse_term("box(dia(or(a,v)))", &alph).unwrap();
        let t2 = parse_term("box(dia(or(v,a)))", &alph).unwrap();
        assert!(t1 < t2);
        let a = parse_term("a", &alph).unwrap();
        assert!(a < t1);
    }
}
