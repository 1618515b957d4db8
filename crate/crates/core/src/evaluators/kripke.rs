//! Pointed Kripke structures, shared by the modal and branching-time
//! evaluators.

use super::StructureParseError;
use serde::Deserialize;
use std::collections::BTreeSet;

#[derive(Clone, Debug)]
pub struct KripkeStructure {
    world_names: Vec<String>,
    start: usize,
    successors: Vec<Vec<usize>>,
    labels: Vec<BTreeSet<String>>,
}

impl KripkeStructure {
    pub fn new(
        world_names: Vec<String>,
        start: &str,
        edges: &[(String, String)],
        labels: &[(String, Vec<String>)],
    ) -> Result<KripkeStructure, StructureParseError> {
        let index = |name: &str| -> Result<usize, StructureParseError> {
            world_names
                .iter()
                .position(|w| w == name)
                .ok_or_else(|| super::bad(format!("unknown world `{name}`")))
        };
        if world_names.is_empty() {
            return Err(super::bad("Kripke structure needs at least one world"));
        }
        let start = index(start)?;
        let mut successors = vec![Vec::new(); world_names.len()];
        for (from, to) in edges {
            let f = index(from)?;
            let t = index(to)?;
            if !successors[f].contains(&t) {
                successors[f].push(t);
            }
        }
        for s in &mut successors {
            s.sort_unstable();
        }
        let mut label_sets = vec![BTreeSet::new(); world_names.len()];
        for (world, props) in labels {
            let w = index(world)?;
            label_sets[w].extend(props.iter().cloned());
        }
        Ok(KripkeStructure {
            world_names,
            start,
            successors,
            labels: label_sets,
        })
    }

    pub fn n_worlds(&self) -> usize {
        self.world_names.len()
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn successors(&self, w: usize) -> &[usize] {
        &self.successors[w]
    }

    pub fn labels(&self, w: usize) -> &BTreeSet<String> {
        &self.labels[w]
    }

    pub fn world_name(&self, w: usize) -> &str {
        &self.world_names[w]
    }

    /// Every proposition mentioned by some world label.
    pub fn propositions(&self) -> BTreeSet<String> {
        self.labels.iter().flatten().cloned().collect()
    }
}

#[derive(Deserialize)]
struct KripkeJson {
    worlds: Vec<String>,
    start: String,
    #[serde(default)]
    edges: Vec<(String, String)>,
    #[serde(default)]
    labels: std::collections::BTreeMap<String, Vec<String>>,
}

pub fn parse_kripke(v: &serde_json::Value) -> Result<KripkeStructure, StructureParseError> {
    let raw: KripkeJson =
        serde_json::from_value(v.clone()).map_err(|e| super::bad(e.to_string()))?;
    let labels: Vec<(String, Vec<String>)> = raw.labels.into_iter().collect();
    KripkeStructure::new(raw.worlds, &raw.start, &raw.edges, &labels)
}

/// Small structures used throughout the test suites.
pub mod fixtures {
    use super::*;

    fn mk(
        worlds: &[&str],
        start: &str,
        edges: &[(&str, &str)],
        labels: &[(&str, &[&str])],
    ) -> KripkeStructure {
        KripkeStructure::new(
            worlds.iter().map(|s| s.to_string()).collect(),
            start,
            &edges
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect::<Vec<_>>(),
            &labels
                .iter()
                .map(|(w, ps)| (w.to_string(), ps.iter().map(|p| p.to_string()).collect()))
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    /// Left positive structure: a 4-cycle with chords between the `a` and `v`
    /// worlds.
    pub fn positive_cycle() -> KripkeStructure {
        mk(
            &["w0", "w1", "w2", "w3"],
            "w0",
            &[
                ("w0", "w1"),
                ("w1", "w2"),
                ("w2", "w3"),
                ("w3", "w0"),
                ("w0", "w2"),
                ("w2", "w0"),
            ],
            &[("w0", &["a"]), ("w1", &["c"]), ("w2", &["v"]), ("w3", &["c"])],
        )
    }

    /// Right positive structure: a binary tree of depth two.
    pub fn positive_tree() -> KripkeStructure {
        mk(
            &["s", "l", "r", "ll", "lr", "rl", "rr"],
            "s",
            &[
                ("s", "l"),
                ("s", "r"),
                ("l", "ll"),
                ("l", "lr"),
                ("r", "rl"),
                ("r", "rr"),
            ],
            &[
                ("s", &["c"]),
                ("l", &["c"]),
                ("r", &["c"]),
                ("ll", &["a"]),
                ("lr", &["c"]),
                ("rl", &["c"]),
                ("rr", &["v"]),
            ],
        )
    }

    /// Left negative structure: a two-world chain ending in a sink.
    pub fn negative_chain() -> KripkeStructure {
        mk(
            &["n0", "n1"],
            "n0",
            &[("n0", "n1")],
            &[("n0", &["a"]), ("n1", &["v"])],
        )
    }

    /// Right negative structure: a three-world cycle.
    pub fn negative_cycle() -> KripkeStructure {
        mk(
            &["m0", "m1", "m2"],
            "m0",
            &[("m0", "m1"), ("m1", "m2"), ("m2", "m0")],
            &[("m0", &["v"]), ("m1", &["a"]), ("m2", &["c"])],
        )
    }

    /// One world with a self loop, labeled `a`.
    pub fn self_loop() -> KripkeStructure {
        mk(&["u"], "u", &[("u", "u")], &[("u", &["a"])])
    }

    /// Two worlds in a cycle, both labeled `a`; bisimilar to `self_loop`.
    pub fn two_cycle() -> KripkeStructure {
        mk(
            &["u0", "u1"],
            "u0",
            &[("u0", "u1"), ("u1", "u0")],
            &[("u0", &["a"]), ("u1", &["a"])],
        )
    }
}
