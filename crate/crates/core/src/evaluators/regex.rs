//! Extended regular expressions (concatenation, union, intersection, star,
//! complement) over finite words.
//!
//! Aspects are subword spans (l, r) with 1 <= l <= r <= |w|+1, where (i, i)
//! is the empty subword. A letter matches only a length-one span; the star
//! case peels a nonempty prefix, which keeps the dual well-founded.

use super::{EvalError, StructureParseError};
use crate::aspects::{Aspect, AspectAtom, Evaluator, Label};
use crate::term::{RankedAlphabet, Symbol, Term};
use crate::twata::{Move, PosBool};
use serde::Deserialize;
use std::collections::HashMap;
use std::fmt;

#[derive(Clone, Debug)]
pub struct WordStructure {
    letters: Vec<char>,
}

impl WordStructure {
    pub fn new(word: &str) -> WordStructure {
        WordStructure {
            letters: word.chars().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// 1-based letter access.
    pub fn at(&self, i: usize) -> char {
        self.letters[i - 1]
    }

    pub fn text(&self) -> String {
        self.letters.iter().collect()
    }
}

#[derive(Deserialize)]
struct WordJson {
    word: String,
}

pub fn parse_word(v: &serde_json::Value) -> Result<WordStructure, StructureParseError> {
    let raw: WordJson = serde_json::from_value(v.clone()).map_err(|e| super::bad(e.to_string()))?;
    Ok(WordStructure::new(&raw.word))
}

/// Subword from position `l` to `r - 1` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span(pub usize, pub usize);

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0, self.1)
    }
}

pub struct RegexEvaluator {
    alphabet: RankedAlphabet,
    letters: Vec<char>,
}

pub fn regex_alphabet(letters: &[char]) -> RankedAlphabet {
    let mut entries: Vec<(String, usize)> = vec![
        ("concat".into(), 2),
        ("union".into(), 2),
        ("inter".into(), 2),
        ("star".into(), 1),
        ("not".into(), 1),
    ];
    for &c in letters {
        entries.push((c.to_string(), 0));
    }
    let refs: Vec<(&str, usize)> = entries.iter().map(|(n, a)| (n.as_str(), *a)).collect();
    RankedAlphabet::new(&refs).expect("regex alphabet")
}

impl RegexEvaluator {
    pub fn new(letters: Vec<char>) -> RegexEvaluator {
        RegexEvaluator {
            alphabet: regex_alphabet(&letters),
            letters,
        }
    }

    pub fn letters(&self) -> &[char] {
        &self.letters
    }
}

impl Evaluator for RegexEvaluator {
    type Structure = WordStructure;
    type Payload = Span;

    fn alphabet(&self) -> &RankedAlphabet {
        &self.alphabet
    }

    fn enumerate_aspects(&self, w: &WordStructure) -> Vec<Span> {
        let n = w.len() + 1;
        let mut out = Vec::new();
        for l in 1..=n {
            for r in l..=n {
                out.push(Span(l, r));
            }
        }
        out
    }

    fn initial(&self, w: &WordStructure, label: Label) -> Aspect<Span> {
        let full = Span(1, w.len() + 1);
        match label {
            Label::Positive => Aspect::plain(full),
            Label::Negative => Aspect::dual(full),
        }
    }

    fn transition(
        &self,
        w: &WordStructure,
        &Span(l, r): &Span,
        symbol: &Symbol,
    ) -> PosBool<AspectAtom<Span>> {
        let plain = |l, r, mv| PosBool::Atom((Aspect::plain(Span(l, r)), mv));
        match symbol.name() {
            "star" => {
                if l == r {
                    PosBool::True
                } else {
                    PosBool::or_all((l + 1..=r).map(|k| {
                        PosBool::and(plain(l, k, Move::Child(1)), plain(k, r, Move::Stay))
                    }))
                }
            }
            "concat" => PosBool::or_all((l..=r).map(|k| {
                PosBool::and(plain(l, k, Move::Child(1)), plain(k, r, Move::Child(2)))
            })),
            "union" => PosBool::or(plain(l, r, Move::Child(1)), plain(l, r, Move::Child(2))),
            "inter" => PosBool::and(plain(l, r, Move::Child(1)), plain(l, r, Move::Child(2))),
            "not" => PosBool::Atom((Aspect::dual(Span(l, r)), Move::Child(1))),
            letter => {
                let c = letter.chars().next().unwrap();
                if r == l + 1 && w.at(l) == c {
                    PosBool::True
                } else {
                    PosBool::False
                }
            }
        }
    }
}

fn eval_span(
    w: &WordStructure,
    t: &Term,
    l: usize,
    r: usize,
    node_of: &HashMap<Term, usize>,
    memo: &mut HashMap<(usize, usize, usize), bool>,
) -> Result<bool, EvalError> {
    let key = (node_of[t], l, r);
    if let Some(&v) = memo.get(&key) {
        return Ok(v);
    }
    let kids = t.children();
    let value = match t.symbol().name() {
        "concat" => {
            let mut any = false;
            for k in l..=r {
                if eval_span(w, &kids[0], l, k, node_of, memo)?
                    && eval_span(w, &kids[1], k, r, node_of, memo)?
                {
                    any = true;
                    break;
                }
            }
            any
        }
        "union" => {
            eval_span(w, &kids[0], l, r, node_of, memo)?
                || eval_span(w, &kids[1], l, r, node_of, memo)?
        }
        "inter" => {
            eval_span(w, &kids[0], l, r, node_of, memo)?
                && eval_span(w, &kids[1], l, r, node_of, memo)?
        }
        "star" => {
            if l == r {
                true
            } else {
                let mut any = false;
                for k in l + 1..=r {
                    if eval_span(w, &kids[0], l, k, node_of, memo)?
                        && eval_span(w, t, k, r, node_of, memo)?
                    {
                        any = true;
                        break;
                    }
                }
                any
            }
        }
        "not" => !eval_span(w, &kids[0], l, r, node_of, memo)?,
        letter => {
            if t.symbol().arity() != 0 {
                return Err(EvalError::ForeignSymbol(letter.to_string()));
            }
            let c = letter.chars().next().unwrap();
            r == l + 1 && w.at(l) == c
        }
    };
    memo.insert(key, value);
    Ok(value)
}

fn node_index(term: &Term) -> HashMap<Term, usize> {
    term.flatten()
        .iter()
        .enumerate()
        .map(|(i, (t, _))| (t.clone(), i))
        .collect()
}

/// Recursive subword semantics with memoization on (node, span); the
/// independent oracle for the automata path.
pub fn reference(w: &WordStructure, term: &Term) -> Result<bool, EvalError> {
    let node_of = node_index(term);
    let mut memo = HashMap::new();
    eval_span(w, term, 1, w.len() + 1, &node_of, &mut memo)
}

/// Subword membership, for tests that pin individual spans.
pub fn reference_on_span(
    w: &WordStructure,
    term: &Term,
    l: usize,
    r: usize,
) -> Result<bool, EvalError> {
    let node_of = node_index(term);
    let mut memo = HashMap::new();
    eval_span(w, term, l, r, &node_of, &mut memo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aspects::{build_twata, check_well_formed, transition_pbf};
    use crate::term::parse_term;

    fn ab() -> RegexEvaluator {
        RegexEvaluator::new(vec!['a', 'b'])
    }

    #[test]
    fn base_and_concat_spans() {
        let ev = ab();
        let w = WordStructure::new("ab");
        let a = parse_term("a", ev.alphabet()).unwrap();
        let ab_expr = parse_term("concat(a,b)", ev.alphabet()).unwrap();
        assert!(reference_on_span(&w, &a, 1, 2).unwrap());
        assert!(!reference_on_span(&w, &a, 1, 3).unwrap());
        assert!(reference_on_span(&w, &ab_expr, 1, 3).unwrap());
    }

    #[test]
    fn star_matches_empty_span() {
        let ev = ab();
        let w = WordStructure::new("abb");
        let star = parse_term("star(concat(a,b))", ev.alphabet()).unwrap();
        assert!(reference_on_span(&w, &star, 2, 2).unwrap());
    }

    #[test]
    fn empty_word_in_star() {
        let ev = ab();
        let w = WordStructure::new("");
        let star_a = parse_term("star(a)", ev.alphabet()).unwrap();
        assert!(reference(&w, &star_a).unwrap());
    }

    #[test]
    fn a_concat_a_star_matches_aaa() {
        let ev = ab();
        let e = parse_term("concat(a,star(a))", ev.alphabet()).unwrap();
        assert!(reference(&WordStructure::new("aaa"), &e).unwrap());
        assert!(!reference(&WordStructure::new("aab"), &e).unwrap());
    }

    #[test]
    fn initial_aspect_is_full_span() {
        let ev = ab();
        let w = WordStructure::new("abb");
        assert_eq!(ev.initial(&w, Label::Positive), Aspect::plain(Span(1, 4)));
    }

    #[test]
    fn worked_example_letter_transitions() {
        let ev = ab();
        let w = WordStructure::new("abb");
        let a = ev.alphabet().lookup("a").unwrap().clone();
        let b = ev.alphabet().lookup("b").unwrap().clone();
        assert_eq!(
            transition_pbf(&ev, &w, &Aspect::plain(Span(1, 2)), &a).unwrap(),
            PosBool::True
        );
        assert_eq!(
            transition_pbf(&ev, &w, &Aspect::plain(Span(2, 3)), &b).unwrap(),
            PosBool::True
        );
        assert_eq!(
            transition_pbf(&ev, &w, &Aspect::plain(Span(3, 4)), &b).unwrap(),
            PosBool::True
        );
    }

    #[test]
    fn worked_example_concat_disjunction() {
        let ev = ab();
        let w = WordStructure::new("abb");
        let concat = ev.alphabet().lookup("concat").unwrap().clone();
        let got = transition_pbf(&ev, &w, &Aspect::plain(Span(1, 4)), &concat).unwrap();
        let pair = |k: usize| {
            PosBool::and(
                PosBool::Atom((Aspect::plain(Span(1, k)), Move::Child(1))),
                PosBool::Atom((Aspect::plain(Span(k, 4)), Move::Child(2))),
            )
        };
        let expected = PosBool::or_all((1..=4).map(pair));
        assert_eq!(got.flatten(), expected.flatten());
    }

    #[test]
    fn well_formed_and_state_count() {
        let ev = ab();
        let w = WordStructure::new("abb");
        assert!(check_well_formed(&ev, &w).is_empty());
        let aut = build_twata(&ev, &w, Label::Positive).unwrap();
        // pairs (l, r) with 1 <= l <= r <= 4, both polarities
        assert_eq!(aut.n_states(), 20);
    }

    #[test]
    fn summary_path_on_worked_example() {
        let ev = ab();
        let w = WordStructure::new("abb");
        let aut = build_twata(&ev, &w, Label::Positive).unwrap();
        let nfta = aut.to_nfta();
        let yes = parse_term("concat(a,concat(b,b))", ev.alphabet()).unwrap();
        let no = parse_term("a", ev.alphabet()).unwrap();
        assert!(aut.accepts(&yes).unwrap());
        assert!(nfta.accepts(&yes).unwrap());
        assert!(!aut.accepts(&no).unwrap());
        assert!(!nfta.accepts(&no).unwrap());
    }
}
