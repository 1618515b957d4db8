//! The learning pipeline: per-example automata, grammar restriction,
//! intersection, emptiness with minimal witness, and verification.
//!
//! Per example, the evaluator is compiled to a two-way alternating automaton
//! (positive label: accepts expressions true in the structure; negative:
//! false) and converted lazily to a summary automaton. The product of the
//! grammar automaton, any extra checker factors, and all example automata is
//! explored by the minimal-witness search; a returned witness is re-verified
//! against the reference interpreter for every example.

use crate::aspects::{build_twata, AspectError, Evaluator, Label};
use crate::nfta::{grammar_to_nfta, search_product, Nfta, SearchLimits, SearchOutcome};
use crate::term::{RegularTreeGrammar, Term};
use crate::twata::Twata;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Clone, Debug)]
pub struct LearnOptions {
    /// Cap on settled product tuples before giving up.
    pub max_states: usize,
    pub timeout: Option<Duration>,
}

impl Default for LearnOptions {
    fn default() -> LearnOptions {
        LearnOptions {
            max_states: 2_000_000,
            timeout: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Consistent { term: Term, size: u32 },
    Unrealizable,
    ResourceExhausted { reason: String },
}

#[derive(Clone, Debug, Default)]
pub struct LearnStats {
    pub examples: usize,
    pub twata_states: Vec<usize>,
    pub tuples_settled: usize,
    pub tuples_discovered: usize,
    pub wall: Duration,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub verdict: Verdict,
    pub stats: LearnStats,
}

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("grammar alphabet differs from the evaluator alphabet")]
    AlphabetMismatch,
    #[error("problem needs at least one example")]
    NoExamples,
    #[error(transparent)]
    IllFormed(#[from] AspectError),
    #[error("witness `{term}` failed verification against example {example}: {detail}")]
    Soundness {
        term: Term,
        example: usize,
        detail: String,
    },
}

/// Synthesizes a minimum-size grammar term consistent with every labeled
/// example, or proves none exists. `extra_factors` are additional automata
/// intersected with the product (the productivity checker for grammar
/// learning). `reference` is the per-language interpreter used to re-verify
/// any witness.
pub fn learn<E: Evaluator>(
    evaluator: &E,
    examples: &[(E::Structure, Label)],
    grammar: &RegularTreeGrammar,
    extra_factors: &[Nfta],
    reference: impl Fn(&E::Structure, &Term) -> Result<bool, String>,
    options: &LearnOptions,
) -> Result<Solution, LearnError> {
    let started = Instant::now();
    if examples.is_empty() {
        return Err(LearnError::NoExamples);
    }
    if grammar.alphabet() != evaluator.alphabet() {
        return Err(LearnError::AlphabetMismatch);
    }

    // smallest structures first: grammar pruning shrinks the reachable
    // summary tuples fastest; the verdict is order-independent
    let mut order: Vec<usize> = (0..examples.len()).collect();
    order.sort_by_key(|&i| evaluator.enumerate_aspects(&examples[i].0).len());

    let mut twatas: Vec<Twata> = Vec::with_capacity(examples.len());
    for &i in &order {
        let (structure, label) = &examples[i];
        twatas.push(build_twata(evaluator, structure, *label)?);
    }
    let twata_states: Vec<usize> = twatas.iter().map(|a| a.n_states()).collect();

    let grammar_nfta = grammar_to_nfta(grammar);
    let example_nftas: Vec<Nfta> = twatas.into_iter().map(Nfta::from_twata).collect();
    let mut factors: Vec<&Nfta> = vec![&grammar_nfta];
    factors.extend(extra_factors.iter());
    factors.extend(example_nftas.iter());

    let limits = SearchLimits {
        max_states: options.max_states,
        deadline: options.timeout.map(|t| started + t),
    };
    let (outcome, search_stats) = search_product(&factors, &limits);

    let verdict = match outcome {
        SearchOutcome::Witness(term) => {
            for (idx, (structure, label)) in examples.iter().enumerate() {
                let holds = reference(structure, &term).map_err(|detail| {
                    LearnError::Soundness {
                        term: term.clone(),
                        example: idx,
                        detail,
                    }
                })?;
                let expected = matches!(label, Label::Positive);
                if holds != expected {
                    return Err(LearnError::Soundness {
                        term,
                        example: idx,
                        detail: format!("reference says {holds}, label expects {expected}"),
                    });
                }
            }
            let size = term.size();
            Verdict::Consistent { term, size }
        }
        SearchOutcome::Empty => Verdict::Unrealizable,
        SearchOutcome::Exhausted(reason) => Verdict::ResourceExhausted { reason },
    };

    Ok(Solution {
        verdict,
        stats: LearnStats {
            examples: examples.len(),
            twata_states,
            tuples_settled: search_stats.tuples_settled,
            tuples_discovered: search_stats.tuples_discovered,
            wall: started.elapsed(),
        },
    })
}

/// True iff the term is in the grammar language and the reference
/// interpreter agrees with every example label.
pub fn verify<S>(
    examples: &[(S, Label)],
    grammar: &RegularTreeGrammar,
    reference: impl Fn(&S, &Term) -> Result<bool, String>,
    term: &Term,
) -> bool {
    let grammar_nfta = grammar_to_nfta(grammar);
    if !grammar_nfta.accepts(term).unwrap_or(false) {
        return false;
    }
    examples.iter().all(|(structure, label)| {
        matches!(
            (reference(structure, term), label),
            (Ok(true), Label::Positive) | (Ok(false), Label::Negative)
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluators::kripke::fixtures;
    use crate::evaluators::modal::{self, ModalEvaluator};
    use crate::evaluators::regex::{self, RegexEvaluator, WordStructure};
    use crate::term::parse_grammar;

    fn modal_fig1() -> (
        ModalEvaluator,
        Vec<(crate::evaluators::kripke::KripkeStructure, Label)>,
        RegularTreeGrammar,
    ) {
        let ev = ModalEvaluator::new(vec!["a".into(), "c".into(), "v".into()]);
        let grammar = parse_grammar(
            "F -> box(F)\nF -> a\nF -> v\nF -> or(F,F)\nF -> dia(F)",
            ev.alphabet(),
        )
        .unwrap();
        let examples = vec![
            (fixtures::positive_cycle(), Label::Positive),
            (fixtures::positive_tree(), Label::Positive),
            (fixtures::negative_chain(), Label::Negative),
            (fixtures::negative_cycle(), Label::Negative),
        ];
        (ev, examples, grammar)
    }

    fn modal_ref(
        g: &crate::evaluators::kripke::KripkeStructure,
        t: &Term,
    ) -> Result<bool, String> {
        modal::reference(g, t).map_err(|e| e.to_string())
    }

    #[test]
    fn learns_the_motivating_instance() {
        let (ev, examples, grammar) = modal_fig1();
        let solution = learn(
            &ev,
            &examples,
            &grammar,
            &[],
            modal_ref,
            &LearnOptions::default(),
        )
        .unwrap();
        match solution.verdict {
            Verdict::Consistent { term, size } => {
                assert_eq!(size, 5);
                assert!(verify(&examples, &grammar, modal_ref, &term));
            }
            other => panic!("expected consistent verdict, got {other:?}"),
        }
    }

    #[test]
    fn contradictory_regex_examples_are_unrealizable() {
        let ev = RegexEvaluator::new(vec!['a', 'b']);
        let grammar = parse_grammar(
            "E -> concat(E,E)\nE -> union(E,E)\nE -> inter(E,E)\nE -> star(E)\nE -> not(E)\nE -> a\nE -> b",
            ev.alphabet(),
        )
        .unwrap();
        let examples = vec![
            (WordStructure::new("ab"), Label::Positive),
            (WordStructure::new("ab"), Label::Negative),
        ];
        let solution = learn(
            &ev,
            &examples,
            &grammar,
            &[],
            |w, t| regex::reference(w, t).map_err(|e| e.to_string()),
            &LearnOptions::default(),
        )
        .unwrap();
        assert_eq!(solution.verdict, Verdict::Unrealizable);
    }

    #[test]
    fn bisimilar_structures_are_unrealizable() {
        let ev = ModalEvaluator::new(vec!["a".into()]);
        let grammar = parse_grammar(
            "F -> and(F,F)\nF -> or(F,F)\nF -> not(F)\nF -> box(F)\nF -> dia(F)\nF -> a",
            ev.alphabet(),
        )
        .unwrap();
        let examples = vec![
            (fixtures::self_loop(), Label::Positive),
            (fixtures::two_cycle(), Label::Negative),
        ];
        let solution = learn(
            &ev,
            &examples,
            &grammar,
            &[],
            modal_ref,
            &LearnOptions::default(),
        )
        .unwrap();
        assert_eq!(solution.verdict, Verdict::Unrealizable);
    }

    #[test]
    fn verdict_is_stable_under_reordering_and_duplicates() {
        let (ev, examples, grammar) = modal_fig1();
        let base = learn(
            &ev,
            &examples,
            &grammar,
            &[],
            modal_ref,
            &LearnOptions::default(),
        )
        .unwrap();
        let mut reordered = examples.clone();
        reordered.reverse();
        reordered.push(reordered[0].clone());
        let again = learn(
            &ev,
            &reordered,
            &grammar,
            &[],
            modal_ref,
            &LearnOptions::default(),
        )
        .unwrap();
        match (&base.verdict, &again.verdict) {
            (
                Verdict::Consistent { term: t1, size: s1 },
                Verdict::Consistent { term: t2, size: s2 },
            ) => {
                assert_eq!(s1, s2);
                assert_eq!(t1, t2);
            }
            other => panic!("verdicts changed under reordering: {other:?}"),
        }
    }

    #[test]
    fn resource_cap_reports_exhaustion() {
        let (ev, examples, grammar) = modal_fig1();
        let solution = learn(
            &ev,
            &examples,
            &grammar,
            &[],
            modal_ref,
            &LearnOptions {
                max_states: 3,
                timeout: None,
            },
        )
        .unwrap();
        assert!(matches!(
            solution.verdict,
            Verdict::ResourceExhausted { .. }
        ));
    }

    #[test]
    fn verify_rejects_terms_outside_the_grammar() {
        let (ev, examples, grammar) = modal_fig1();
        // not(a) is a modal term but the grammar has no `not`
        let t = crate::term::parse_term("not(a)", ev.alphabet()).unwrap();
        assert!(!verify(&examples, &grammar, modal_ref, &t));
    }
}
