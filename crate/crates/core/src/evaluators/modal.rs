//! Modal logic over pointed Kripke structures.
//!
//! Aspects are the worlds. Box and diamond expand over the successor set into
//! finite conjunctions and disjunctions; negation flips to the dual aspect.

use super::kripke::KripkeStructure;
use super::EvalError;
use crate::aspects::{Aspect, AspectAtom, Evaluator, Label};
use crate::term::{RankedAlphabet, Symbol, Term};
use crate::twata::{Move, PosBool};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct World(pub usize);

impl fmt::Display for World {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}", self.0)
    }
}

pub struct ModalEvaluator {
    alphabet: RankedAlphabet,
    propositions: Vec<String>,
}

/// Operators plus one nullary symbol per proposition.
pub fn modal_alphabet(propositions: &[String]) -> RankedAlphabet {
    let mut entries: Vec<(&str, usize)> = vec![
        ("and", 2),
        ("or", 2),
        ("not", 1),
        ("box", 1),
        ("dia", 1),
    ];
    for p in propositions {
        entries.push((p, 0));
    }
    RankedAlphabet::new(&entries).expect("modal alphabet")
}

impl ModalEvaluator {
    pub fn new(propositions: Vec<String>) -> ModalEvaluator {
        ModalEvaluator {
            alphabet: modal_alphabet(&propositions),
            propositions,
        }
    }

    pub fn propositions(&self) -> &[String] {
        &self.propositions
    }
}

impl Evaluator for ModalEvaluator {
    type Structure = KripkeStructure;
    type Payload = World;

    fn alphabet(&self) -> &RankedAlphabet {
        &self.alphabet
    }

    fn enumerate_aspects(&self, g: &KripkeStructure) -> Vec<World> {
        (0..g.n_worlds()).map(World).collect()
    }

    fn initial(&self, g: &KripkeStructure, label: Label) -> Aspect<World> {
        match label {
            Label::Positive => Aspect::plain(World(g.start())),
            Label::Negative => Aspect::dual(World(g.start())),
        }
    }

    fn transition(
        &self,
        g: &KripkeStructure,
        &World(w): &World,
        symbol: &Symbol,
    ) -> PosBool<AspectAtom<World>> {
        let here = |mv| PosBool::Atom((Aspect::plain(World(w)), mv));
        match symbol.name() {
            "and" => PosBool::and(here(Move::Child(1)), here(Move::Child(2))),
            "or" => PosBool::or(here(Move::Child(1)), here(Move::Child(2))),
            "not" => PosBool::Atom((Aspect::dual(World(w)), Move::Child(1))),
            "box" => PosBool::and_all(
                g.successors(w)
                    .iter()
                    .map(|&y| PosBool::Atom((Aspect::plain(World(y)), Move::Child(1)))),
            ),
            "dia" => PosBool::or_all(
                g.successors(w)
                    .iter()
                    .map(|&y| PosBool::Atom((Aspect::plain(World(y)), Move::Child(1)))),
            ),
            prop => {
                if g.labels(w).contains(prop) {
                    PosBool::True
                } else {
                    PosBool::False
                }
            }
        }
    }
}

/// Direct recursive semantics, independent of the automata path.
pub fn reference(g: &KripkeStructure, term: &Term) -> Result<bool, EvalError> {
    fn eval(g: &KripkeStructure, t: &Term, w: usize) -> Result<bool, EvalError> {
        let kids = t.children();
        Ok(match t.symbol().name() {
            "and" => eval(g, &kids[0], w)? && eval(g, &kids[1], w)?,
            "or" => eval(g, &kids[0], w)? || eval(g, &kids[1], w)?,
            "not" => !eval(g, &kids[0], w)?,
            "box" => {
                let mut all = true;
                for &y in g.successors(w) {
                    all &= eval(g, t.children().first().unwrap(), y)?;
                }
                all
            }
            "dia" => {
                let mut any = false;
                for &y in g.successors(w) {
                    any |= eval(g, &kids[0], y)?;
                }
                any
            }
            prop => {
                if t.symbol().arity() != 0 {
                    return Err(EvalError::ForeignSymbol(prop.to_string()));
                }
                g.labels(w).contains(prop)
            }
        })
    }
    eval(g, term, g.start())
}

#[cfg(test)]
mod tests {
    use super::super::kripke::fixtures;
    use super::*;
    use crate::aspects::{build_twata, check_well_formed};
    use crate::term::parse_term;

    fn fig1_formula(ev: &ModalEvaluator) -> Term {
        parse_term("box(dia(or(a,v)))", ev.alphabet()).unwrap()
    }

    fn sigma() -> Vec<String> {
        vec!["a".into(), "c".into(), "v".into()]
    }

    #[test]
    fn reference_on_all_four_structures() {
        let ev = ModalEvaluator::new(sigma());
        let phi = fig1_formula(&ev);
        assert!(reference(&fixtures::positive_cycle(), &phi).unwrap());
        assert!(reference(&fixtures::positive_tree(), &phi).unwrap());
        assert!(!reference(&fixtures::negative_chain(), &phi).unwrap());
        assert!(!reference(&fixtures::negative_cycle(), &phi).unwrap());
    }

    #[test]
    fn box_is_vacuously_true_without_edges() {
        let ev = ModalEvaluator::new(vec!["a".into()]);
        let g = KripkeStructure::new(
            vec!["w".into()],
            "w",
            &[],
            &[("w".into(), vec!["a".into()])],
        )
        .unwrap();
        for formula in ["box(a)", "box(not(a))", "box(box(a))"] {
            let t = parse_term(formula, ev.alphabet()).unwrap();
            assert!(reference(&g, &t).unwrap(), "{formula}");
        }
        assert!(reference(&g, &parse_term("a", ev.alphabet()).unwrap()).unwrap());
    }

    #[test]
    fn single_world_proposition_lookup() {
        let ev = ModalEvaluator::new(vec!["a".into(), "v".into()]);
        let g = KripkeStructure::new(
            vec!["w".into()],
            "w",
            &[],
            &[("w".into(), vec!["a".into()])],
        )
        .unwrap();
        assert!(reference(&g, &parse_term("a", ev.alphabet()).unwrap()).unwrap());
        assert!(!reference(&g, &parse_term("v", ev.alphabet()).unwrap()).unwrap());
    }

    #[test]
    fn well_formed_on_fixtures() {
        let ev = ModalEvaluator::new(sigma());
        for g in [
            fixtures::positive_cycle(),
            fixtures::positive_tree(),
            fixtures::negative_chain(),
            fixtures::negative_cycle(),
        ] {
            assert!(check_well_formed(&ev, &g).is_empty());
        }
    }

    #[test]
    fn game_accepts_fig1_on_tree_structure() {
        let ev = ModalEvaluator::new(sigma());
        let g = fixtures::positive_tree();
        let aut = build_twata(&ev, &g, Label::Positive).unwrap();
        assert!(aut.accepts(&fig1_formula(&ev)).unwrap());
    }

    #[test]
    fn negative_automaton_accepts_on_negative_structures() {
        let ev = ModalEvaluator::new(sigma());
        let phi = fig1_formula(&ev);
        for g in [fixtures::negative_chain(), fixtures::negative_cycle()] {
            let aut = build_twata(&ev, &g, Label::Negative).unwrap();
            assert!(aut.accepts(&phi).unwrap());
        }
    }

    #[test]
    fn summary_path_accepts_fig1_on_cycle_structure() {
        let ev = ModalEvaluator::new(sigma());
        let g = fixtures::positive_cycle();
        let aut = build_twata(&ev, &g, Label::Positive).unwrap();
        let nfta = aut.to_nfta();
        assert!(nfta.accepts(&fig1_formula(&ev)).unwrap());
    }

    #[test]
    fn two_world_structure_has_four_states() {
        let ev = ModalEvaluator::new(vec!["a".into(), "v".into()]);
        let g = fixtures::negative_chain();
        let aut = build_twata(&ev, &g, Label::Positive).unwrap();
        assert_eq!(aut.count_reachable().twata_states, 4);
    }
}
