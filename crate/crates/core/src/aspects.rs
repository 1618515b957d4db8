//! The evaluator framework: semantic aspects with polarity, transition
//! builders over a fixed structure, generic dual derivation, well-formedness
//! checking, and compilation to a two-way alternating tree automaton.
//!
//! An evaluator defines transitions for plain aspect payloads only; dual
//! transitions are always derived by De Morgan dualization, so the dual table
//! holds by construction.

use crate::term::{RankedAlphabet, Symbol};
use crate::twata::{dualize_pbf, Move, PosBool, Twata};
use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hash;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Plain,
    Dual,
}

/// Example label: the automaton for a positive example accepts expressions
/// true in the structure, the negative one accepts expressions false in it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Label {
    Positive,
    Negative,
}

/// A language-specific payload wrapped with a polarity. `dual` is involutive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Aspect<P> {
    pub polarity: Polarity,
    pub payload: P,
}

impl<P> Aspect<P> {
    pub fn plain(payload: P) -> Aspect<P> {
        Aspect {
            polarity: Polarity::Plain,
            payload,
        }
    }

    pub fn dual(payload: P) -> Aspect<P> {
        Aspect {
            polarity: Polarity::Dual,
            payload,
        }
    }

    pub fn flipped(&self) -> Aspect<P>
    where
        P: Clone,
    {
        Aspect {
            polarity: match self.polarity {
                Polarity::Plain => Polarity::Dual,
                Polarity::Dual => Polarity::Plain,
            },
            payload: self.payload.clone(),
        }
    }
}

impl<P: fmt::Display> fmt::Display for Aspect<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.polarity {
            Polarity::Plain => write!(f, "{}", self.payload),
            Polarity::Dual => write!(f, "dual({})", self.payload),
        }
    }
}

pub type AspectAtom<P> = (Aspect<P>, Move);

/// A semantic evaluator for one symbolic language over a fixed structure
/// kind. Transitions are total on enumerated payloads x alphabet and may
/// reference dual aspects; every referenced payload must itself be
/// enumerated.
pub trait Evaluator {
    type Structure;
    type Payload: Clone + Ord + Hash + fmt::Debug + fmt::Display;

    fn alphabet(&self) -> &RankedAlphabet;

    /// The finite set of plain aspect payloads for `structure`.
    fn enumerate_aspects(&self, structure: &Self::Structure) -> Vec<Self::Payload>;

    /// Where evaluation starts for a positive or negative example.
    fn initial(&self, structure: &Self::Structure, label: Label) -> Aspect<Self::Payload>;

    /// Transition for a plain payload reading `symbol`. Boolean signature
    /// functions fold to constants here since the structure is fixed.
    fn transition(
        &self,
        structure: &Self::Structure,
        payload: &Self::Payload,
        symbol: &Symbol,
    ) -> PosBool<AspectAtom<Self::Payload>>;
}

#[derive(Debug, Error)]
pub enum AspectError {
    #[error("aspect payload {0} is not enumerated for this structure")]
    PayloadNotEnumerated(String),
    #[error("evaluator is ill-formed:\n{}", format_violations(.0))]
    IllFormed(Vec<Violation>),
}

fn format_violations(vs: &[Violation]) -> String {
    vs.iter()
        .map(|v| format!("  {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// A well-formedness violation, naming the offending (aspect, symbol, atom).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// An atom references an aspect payload outside the enumerated set.
    Closure {
        aspect: String,
        symbol: String,
        atom_aspect: String,
    },
    /// An atom's child move exceeds the symbol arity (or is index 0).
    Arity {
        aspect: String,
        symbol: String,
        atom_aspect: String,
        child: usize,
        arity: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Closure {
                aspect,
                symbol,
                atom_aspect,
            } => write!(
                f,
                "closure: delta({aspect}, {symbol}) references non-enumerated aspect {atom_aspect}"
            ),
            Violation::Arity {
                aspect,
                symbol,
                atom_aspect,
                child,
                arity,
            } => write!(
                f,
                "arity: delta({aspect}, {symbol}) sends {atom_aspect} to child {child} but {symbol} has arity {arity}"
            ),
        }
    }
}

/// Transition for an arbitrary-polarity aspect: plain aspects use the
/// evaluator's transition directly; dual aspects get the De Morgan dual with
/// every atom's polarity flipped.
pub fn transition_pbf<E: Evaluator>(
    evaluator: &E,
    structure: &E::Structure,
    aspect: &Aspect<E::Payload>,
    symbol: &Symbol,
) -> Result<PosBool<AspectAtom<E::Payload>>, AspectError> {
    let enumerated = evaluator.enumerate_aspects(structure);
    if !enumerated.contains(&aspect.payload) {
        return Err(AspectError::PayloadNotEnumerated(format!(
            "{}",
            aspect.payload
        )));
    }
    Ok(transition_pbf_unchecked(evaluator, structure, aspect, symbol))
}

fn transition_pbf_unchecked<E: Evaluator>(
    evaluator: &E,
    structure: &E::Structure,
    aspect: &Aspect<E::Payload>,
    symbol: &Symbol,
) -> PosBool<AspectAtom<E::Payload>> {
    let plain = evaluator.transition(structure, &aspect.payload, symbol);
    match aspect.polarity {
        Polarity::Plain => plain,
        Polarity::Dual => dualize_pbf(&plain, &mut |(a, mv)| (a.flipped(), *mv)),
    }
}

/// Checks totality closure and arity respect for every (aspect, symbol)
/// pair. Violations are data, not errors.
pub fn check_well_formed<E: Evaluator>(
    evaluator: &E,
    structure: &E::Structure,
) -> Vec<Violation> {
    let payloads = evaluator.enumerate_aspects(structure);
    let mut violations = Vec::new();
    for payload in &payloads {
        for symbol in evaluator.alphabet().symbols() {
            let pbf = evaluator.transition(structure, payload, symbol);
            for (aspect, mv) in pbf.atoms() {
                if !payloads.contains(&aspect.payload) {
                    violations.push(Violation::Closure {
                        aspect: payload.to_string(),
                        symbol: symbol.name().to_string(),
                        atom_aspect: aspect.to_string(),
                    });
                }
                if let Move::Child(i) = mv {
                    if *i == 0 || *i > symbol.arity() {
                        violations.push(Violation::Arity {
                            aspect: payload.to_string(),
                            symbol: symbol.name().to_string(),
                            atom_aspect: aspect.to_string(),
                            child: *i,
                            arity: symbol.arity(),
                        });
                    }
                }
            }
        }
    }
    violations
}

/// Compiles the evaluator over one structure into a two-way alternating tree
/// automaton. States are both polarities of every enumerated payload; there
/// are no explicit final states, acceptance is carried by `True` constants in
/// the transition formulas.
pub fn build_twata<E: Evaluator>(
    evaluator: &E,
    structure: &E::Structure,
    label: Label,
) -> Result<Twata, AspectError> {
    let violations = check_well_formed(evaluator, structure);
    if !violations.is_empty() {
        return Err(AspectError::IllFormed(violations));
    }

    let mut payloads = evaluator.enumerate_aspects(structure);
    payloads.sort();
    payloads.dedup();
    assert!(!payloads.is_empty(), "evaluator enumerated no aspects");

    // plain payloads first, then duals, in sorted payload order
    let mut index: BTreeMap<Aspect<E::Payload>, usize> = BTreeMap::new();
    let mut names = Vec::with_capacity(payloads.len() * 2);
    for (i, p) in payloads.iter().enumerate() {
        index.insert(Aspect::plain(p.clone()), i);
        names.push(Aspect::plain(p.clone()).to_string());
    }
    for (i, p) in payloads.iter().enumerate() {
        index.insert(Aspect::dual(p.clone()), payloads.len() + i);
        names.push(Aspect::dual(p.clone()).to_string());
    }

    let alphabet = evaluator.alphabet().clone();
    let n_syms = alphabet.len();
    let mut delta = Vec::with_capacity(names.len() * n_syms);
    for polarity in [Polarity::Plain, Polarity::Dual] {
        for payload in &payloads {
            let aspect = Aspect {
                polarity,
                payload: payload.clone(),
            };
            for symbol in alphabet.symbols() {
                let pbf = transition_pbf_unchecked(evaluator, structure, &aspect, symbol);
                delta.push(pbf.map(&mut |(a, mv)| (index[a], *mv)));
            }
        }
    }

    let initial_aspect = evaluator.initial(structure, label);
    let initial = *index
        .get(&initial_aspect)
        .ok_or_else(|| AspectError::PayloadNotEnumerated(initial_aspect.payload.to_string()))?;

    Ok(Twata::new(
        alphabet,
        names,
        initial,
        delta,
        Default::default(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    /// Toy evaluator: accepts terms whose leaves are all `a` (plain side).
    /// Structure is (), the single payload is state 0.
    struct AllA {
        alphabet: RankedAlphabet,
        broken_child: bool,
        broken_closure: bool,
    }

    #[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
    struct St(u8);

    impl fmt::Display for St {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write!(f, "q{}", self.0)
        }
    }

    impl Evaluator for AllA {
        type Structure = ();
        type Payload = St;

        fn alphabet(&self) -> &RankedAlphabet {
            &self.alphabet
        }

        fn enumerate_aspects(&self, _: &()) -> Vec<St> {
            vec![St(0)]
        }

        fn initial(&self, _: &(), label: Label) -> Aspect<St> {
            match label {
                Label::Positive => Aspect::plain(St(0)),
                Label::Negative => Aspect::dual(St(0)),
            }
        }

        fn transition(&self, _: &(), _: &St, symbol: &Symbol) -> PosBool<AspectAtom<St>> {
            match symbol.name() {
                "f" => {
                    if self.broken_child {
                        PosBool::Atom((Aspect::plain(St(0)), Move::Child(2)))
                    } else {
                        PosBool::Atom((Aspect::plain(St(0)), Move::Child(1)))
                    }
                }
                "g" => PosBool::and(
                    PosBool::Atom((Aspect::plain(St(0)), Move::Child(1))),
                    PosBool::Atom((Aspect::plain(St(0)), Move::Child(2))),
                ),
                "a" => PosBool::True,
                _ => {
                    if self.broken_closure {
                        PosBool::Atom((Aspect::plain(St(7)), Move::Stay))
                    } else {
                        PosBool::False
                    }
                }
            }
        }
    }

    fn toy(broken_child: bool) -> AllA {
        AllA {
            alphabet: RankedAlphabet::new(&[("g", 2), ("f", 1), ("a", 0), ("b", 0)]).unwrap(),
            broken_child,
            broken_closure: false,
        }
    }

    #[test]
    fn builds_and_accepts() {
        let ev = toy(false);
        let aut = build_twata(&ev, &(), Label::Positive).unwrap();
        assert_eq!(aut.n_states(), 2);
        for (text, expect) in [("a", true), ("f(a)", true), ("g(a,b)", false), ("b", false)] {
            let t = parse_term(text, ev.alphabet()).unwrap();
            assert_eq!(aut.accepts(&t).unwrap(), expect, "term {text}");
        }
    }

    #[test]
    fn dual_initial_complements() {
        let ev = toy(false);
        let pos = build_twata(&ev, &(), Label::Positive).unwrap();
        let neg = build_twata(&ev, &(), Label::Negative).unwrap();
        for text in ["a", "b", "f(a)", "f(b)", "g(a,a)", "g(a,b)"] {
            let t = parse_term(text, ev.alphabet()).unwrap();
            assert_ne!(
                pos.accepts(&t).unwrap(),
                neg.accepts(&t).unwrap(),
                "dual not complement on {text}"
            );
        }
    }

    #[test]
    fn arity_violation_detected() {
        let ev = toy(true);
        let violations = check_well_formed(&ev, &());
        assert_eq!(violations.len(), 1);
        assert!(matches!(
            &violations[0],
            Violation::Arity { symbol, child: 2, arity: 1, .. } if symbol == "f"
        ));
        assert!(matches!(
            build_twata(&ev, &(), Label::Positive),
            Err(AspectError::IllFormed(_))
        ));
    }

    #[test]
    fn closure_violation_detected() {
        let mut ev = toy(false);
        ev.broken_closure = true;
        let violations = check_well_formed(&ev, &());
        assert_eq!(violations.len(), 1);
        assert!(matches!(
            &violations[0],
            Violation::Closure { symbol, atom_aspect, .. } if symbol == "b" && atom_aspect == "q7"
        ));
    }

    #[test]
    fn clean_evaluator_has_no_violations() {
        let ev = toy(false);
        assert!(check_well_formed(&ev, &()).is_empty());
    }

    #[test]
    fn transition_pbf_dualizes() {
        let ev = toy(false);
        let g = ev.alphabet().lookup("g").unwrap().clone();
        let plain = transition_pbf(&ev, &(), &Aspect::plain(St(0)), &g).unwrap();
        let dual = transition_pbf(&ev, &(), &Aspect::dual(St(0)), &g).unwrap();
        assert_eq!(
            plain,
            PosBool::and(
                PosBool::Atom((Aspect::plain(St(0)), Move::Child(1))),
                PosBool::Atom((Aspect::plain(St(0)), Move::Child(2)))
            )
        );
        assert_eq!(
            dual,
            PosBool::or(
                PosBool::Atom((Aspect::dual(St(0)), Move::Child(1))),
                PosBool::Atom((Aspect::dual(St(0)), Move::Child(2)))
            )
        );
    }
}
