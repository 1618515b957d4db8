//! Computation tree logic over pointed Kripke structures.
//!
//! Aspects are worlds plus counter-carrying worlds (w, i) with 0 <= i <= |W|.
//! Reading EG or EU moves to the counter state (w, 0) at the same node; the
//! counter clause unfolds one fixpoint stage per step and terminates at |W|,
//! where EG (greatest fixpoint) resolves to true and EU (least fixpoint) to
//! false. Routing both operators through the counter keeps the derived dual
//! clauses sound: refuting EU needs the bounded stages just as verifying EG
//! does, and the stage bound |W| is exact for both Kleene iterations.

use super::kripke::KripkeStructure;
use super::EvalError;
use crate::aspects::{Aspect, AspectAtom, Evaluator, Label};
use crate::term::{RankedAlphabet, Symbol, Term};
use crate::twata::{Move, PosBool};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CtlPayload {
    pub world: usize,
    pub counter: Option<usize>,
}

impl fmt::Display for CtlPayload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.counter {
            None => write!(f, "w{}", self.world),
            Some(i) => write!(f, "(w{},{})", self.world, i),
        }
    }
}

fn plain(world: usize, counter: Option<usize>, mv: Move) -> PosBool<AspectAtom<CtlPayload>> {
    PosBool::Atom((Aspect::plain(CtlPayload { world, counter }), mv))
}

pub struct CtlEvaluator {
    alphabet: RankedAlphabet,
}

pub fn ctl_alphabet(propositions: &[String]) -> RankedAlphabet {
    let mut entries: Vec<(&str, usize)> =
        vec![("or", 2), ("not", 1), ("eg", 1), ("eu", 2), ("ex", 1)];
    for p in propositions {
        entries.push((p, 0));
    }
    RankedAlphabet::new(&entries).expect("ctl alphabet")
}

impl CtlEvaluator {
    pub fn new(propositions: Vec<String>) -> CtlEvaluator {
        CtlEvaluator {
            alphabet: ctl_alphabet(&propositions),
        }
    }
}

impl Evaluator for CtlEvaluator {
    type Structure = KripkeStructure;
    type Payload = CtlPayload;

    fn alphabet(&self) -> &RankedAlphabet {
        &self.alphabet
    }

    fn enumerate_aspects(&self, g: &KripkeStructure) -> Vec<CtlPayload> {
        let n = g.n_worlds();
        let mut out = Vec::new();
        for w in 0..n {
            out.push(CtlPayload {
                world: w,
                counter: None,
            });
            for i in 0..=n {
                out.push(CtlPayload {
                    world: w,
                    counter: Some(i),
                });
            }
        }
        out
    }

    fn initial(&self, g: &KripkeStructure, label: Label) -> Aspect<CtlPayload> {
        let p = CtlPayload {
            world: g.start(),
            counter: None,
        };
        match label {
            Label::Positive => Aspect::plain(p),
            Label::Negative => Aspect::dual(p),
        }
    }

    fn transition(
        &self,
        g: &KripkeStructure,
        payload: &CtlPayload,
        symbol: &Symbol,
    ) -> PosBool<AspectAtom<CtlPayload>> {
        let w = payload.world;
        let max = g.n_worlds();
        match payload.counter {
            None => match symbol.name() {
                "or" => PosBool::or(plain(w, None, Move::Child(1)), plain(w, None, Move::Child(2))),
                "not" => PosBool::Atom((
                    Aspect::dual(CtlPayload {
                        world: w,
                        counter: None,
                    }),
                    Move::Child(1),
                )),
                "ex" => PosBool::or_all(
                    g.successors(w)
                        .iter()
                        .map(|&y| plain(y, None, Move::Child(1))),
                ),
                "eg" | "eu" => plain(w, Some(0), Move::Stay),
                prop => {
                    if g.labels(w).contains(prop) {
                        PosBool::True
                    } else {
                        PosBool::False
                    }
                }
            },
            Some(i) => match symbol.name() {
                // stage i verifies membership in the (|W| - i)-fold iterate
                "eg" => {
                    if i == max {
                        PosBool::True
                    } else {
                        PosBool::and(
                            plain(w, None, Move::Child(1)),
                            PosBool::or_all(
                                g.successors(w)
                                    .iter()
                                    .map(|&y| plain(y, Some(i + 1), Move::Stay)),
                            ),
                        )
                    }
                }
                "eu" => {
                    if i == max {
                        PosBool::False
                    } else {
                        PosBool::or(
                            plain(w, None, Move::Child(2)),
                            PosBool::and(
                                plain(w, None, Move::Child(1)),
                                PosBool::or_all(
                                    g.successors(w)
                                        .iter()
                                        .map(|&y| plain(y, Some(i + 1), Move::Stay)),
                                ),
                            ),
                        )
                    }
                }
                _ => PosBool::False,
            },
        }
    }
}

/// Kleene-iteration model checker: labels each subformula with its world set,
/// greatest fixpoint for EG and least for EU.
pub fn reference(g: &KripkeStructure, term: &Term) -> Result<bool, EvalError> {
    Ok(eval_set(g, term)?.contains(&g.start()))
}

fn eval_set(g: &KripkeStructure, t: &Term) -> Result<BTreeSet<usize>, EvalError> {
    let all: BTreeSet<usize> = (0..g.n_worlds()).collect();
    let pre_exists = |s: &BTreeSet<usize>| -> BTreeSet<usize> {
        (0..g.n_worlds())
            .filter(|&w| g.successors(w).iter().any(|y| s.contains(y)))
            .collect()
    };
    let kids = t.children();
    Ok(match t.symbol().name() {
        "or" => eval_set(g, &kids[0])?
            .union(&eval_set(g, &kids[1])?)
            .copied()
            .collect(),
        "not" => {
            let s = eval_set(g, &kids[0])?;
            all.difference(&s).copied().collect()
        }
        "ex" => pre_exists(&eval_set(g, &kids[0])?),
        "eg" => {
            let phi = eval_set(g, &kids[0])?;
            let mut x = all;
            loop {
                let next: BTreeSet<usize> =
                    phi.intersection(&pre_exists(&x)).copied().collect();
                if next == x {
                    break x;
                }
                x = next;
            }
        }
        "eu" => {
            let phi = eval_set(g, &kids[0])?;
            let psi = eval_set(g, &kids[1])?;
            let mut x = BTreeSet::new();
            loop {
                let step: BTreeSet<usize> =
                    phi.intersection(&pre_exists(&x)).copied().collect();
                let next: BTreeSet<usize> = psi.union(&step).copied().collect();
                if next == x {
                    break x;
                }
                x = next;
            }
        }
        prop => {
            if t.symbol().arity() != 0 {
                return Err(EvalError::ForeignSymbol(prop.to_string()));
            }
            (0..g.n_worlds())
                .filter(|&w| g.labels(w).contains(prop))
                .collect()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::super::kripke::fixtures;
    use super::*;
    use crate::aspects::{build_twata, check_well_formed};
    use crate::term::parse_term;

    fn sigma() -> Vec<String> {
        vec!["a".into(), "v".into()]
    }

    fn chain() -> KripkeStructure {
        KripkeStructure::new(
            vec!["w0".into(), "w1".into()],
            "w0",
            &[("w0".into(), "w1".into())],
            &[("w1".into(), vec!["a".into()])],
        )
        .unwrap()
    }

    #[test]
    fn ex_on_two_world_chain() {
        let ev = CtlEvaluator::new(sigma());
        let g = chain();
        let t = parse_term("ex(a)", ev.alphabet()).unwrap();
        assert!(reference(&g, &t).unwrap());
        let aut = build_twata(&ev, &g, Label::Positive).unwrap();
        assert!(aut.accepts(&t).unwrap());
    }

    #[test]
    fn eg_on_self_loop() {
        let ev = CtlEvaluator::new(sigma());
        let g = fixtures::self_loop();
        let t = parse_term("eg(a)", ev.alphabet()).unwrap();
        assert!(reference(&g, &t).unwrap());
        let aut = build_twata(&ev, &g, Label::Positive).unwrap();
        assert!(aut.accepts(&t).unwrap());
        assert!(aut.to_nfta().accepts(&t).unwrap());
    }

    #[test]
    fn eg_fails_on_chain_sink() {
        // a only holds at the sink, which has no successors
        let ev = CtlEvaluator::new(sigma());
        let g = chain();
        let t = parse_term("eg(a)", ev.alphabet()).unwrap();
        assert!(!reference(&g, &t).unwrap());
        let aut = build_twata(&ev, &g, Label::Positive).unwrap();
        assert!(!aut.accepts(&t).unwrap());
        let neg = build_twata(&ev, &g, Label::Negative).unwrap();
        assert!(neg.accepts(&t).unwrap());
    }

    #[test]
    fn eu_reaches_goal() {
        // on the negative_chain fixture: a U v holds (a now, v next)
        let ev = CtlEvaluator::new(sigma());
        let g = fixtures::negative_chain();
        let t = parse_term("eu(a,v)", ev.alphabet()).unwrap();
        assert!(reference(&g, &t).unwrap());
        let aut = build_twata(&ev, &g, Label::Positive).unwrap();
        assert!(aut.accepts(&t).unwrap());
    }

    #[test]
    fn dual_eu_terminates_on_cycle() {
        // E(a U v) is false on the all-a two-cycle: refuting a least fixpoint
        // on a cycle needs the counter
        let ev = CtlEvaluator::new(sigma());
        let g = fixtures::two_cycle();
        let t = parse_term("eu(a,v)", ev.alphabet()).unwrap();
        assert!(!reference(&g, &t).unwrap());
        let pos = build_twata(&ev, &g, Label::Positive).unwrap();
        let neg = build_twata(&ev, &g, Label::Negative).unwrap();
        assert!(!pos.accepts(&t).unwrap());
        assert!(neg.accepts(&t).unwrap());
        assert!(neg.to_nfta().accepts(&t).unwrap());
    }

    #[test]
    fn well_formed_and_aspect_count() {
        let ev = CtlEvaluator::new(sigma());
        let g = fixtures::two_cycle();
        assert!(check_well_formed(&ev, &g).is_empty());
        let aut = build_twata(&ev, &g, Label::Positive).unwrap();
        // |W| * (1 + |W| + 1) payloads, both polarities
        let n = g.n_worlds();
        assert_eq!(aut.n_states(), 2 * n * (n + 2));
    }
}
