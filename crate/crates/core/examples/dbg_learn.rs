use treelearn::aspects::Label;
use treelearn::evaluators::kripke::fixtures;
use treelearn::evaluators::modal::{self, ModalEvaluator};
use treelearn::learn::{learn, LearnOptions, Verdict};
use treelearn::term::parse_grammar;

fn main() {
    let ev = ModalEvaluator::new(vec!["a".into(), "c".into(), "v".into()]);
    let grammar = parse_grammar(
        "F -> box(F)\nF -> a\nF -> v\nF -> or(F,F)\nF -> dia(F)",
        treelearn::aspects::Evaluator::alphabet(&ev),
    )
    .unwrap();
    let examples = vec![
        (fixtures::positive_cycle(), Label::Positive),
        (fixtures::positive_tree(), Label::Positive),
        (fixtures::negative_chain(), Label::Negative),
        (fixtures::negative_cycle(), Label::Negative),
    ];
    let solution = learn(
        &ev,
        &examples,
        &grammar,
        &[],
        |g, t| modal::reference(g, t).map_err(|e| e.to_string()),
        &LearnOptions::default(),
    )
    .unwrap();
    match solution.verdict {
        Verdict::Consistent { term, size } => println!("consistent: {term} size {size}"),
        other => println!("{other:?}"),
    }
    println!("stats: {:?}", solution.stats);
}
