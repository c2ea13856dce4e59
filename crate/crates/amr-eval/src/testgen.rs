//! Seeded random graph generation for property tests.
//!
//! Kept in the library (rather than a test module) because the acceptance
//! suite and several crates' integration tests share it.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::graph::{AmrGraph, ConceptLabel, ConstantValue, GraphBuilder, VarId};

const CONCEPTS: &[&str] = &[
    "alpha", "beta", "gamma", "run-02", "go-02", "want-01", "see-01", "boy", "girl",
    "centrifuge", "room", "mechanic", "thing", "house", "date-entity", "name", "and",
];

const ROLES: &[&str] = &[
    "ARG0", "ARG1", "ARG2", "ARG3", "mod", "time", "destination", "op1", "op2", "poss",
];

const ATTR_ROLES: &[&str] = &["mode", "quant", "op1", "value", "polarity"];

const SYMBOLS: &[&str] = &["imperative", "-", "12", "2002", "expressive"];

#[derive(Debug, Clone)]
pub struct GraphGenConfig {
    pub max_vars: usize,
    pub extra_edge_prob: f64,
    pub attr_prob: f64,
}

impl Default for GraphGenConfig {
    fn default() -> Self {
        GraphGenConfig {
            max_vars: 8,
            extra_edge_prob: 0.3,
            attr_prob: 0.4,
        }
    }
}

/// Generates a random connected rooted graph: a spanning tree from the
/// root plus optional reentrant edges and attributes.
pub fn random_graph(rng: &mut ChaCha8Rng, config: &GraphGenConfig) -> AmrGraph {
    let n = rng.gen_range(1..=config.max_vars);
    let mut builder = GraphBuilder::new();
    let mut vars: Vec<VarId> = Vec::with_capacity(n);
    for i in 0..n {
        let concept = ConceptLabel::parse(CONCEPTS[rng.gen_range(0..CONCEPTS.len())]);
        let v = builder
            .add_instance(&format!("v{i}"), concept)
            .expect("unique names");
        vars.push(v);
    }
    builder.set_root(vars[0]);
    // Spanning tree: each non-root hangs off an earlier variable.
    for i in 1..n {
        let parent = vars[rng.gen_range(0..i)];
        let role = ROLES[rng.gen_range(0..ROLES.len())];
        builder.add_relation(parent, role, vars[i]).unwrap();
    }
    // Extra edges create reentrancies.
    for _ in 0..n {
        if rng.gen_bool(config.extra_edge_prob) && n >= 2 {
            let s = vars[rng.gen_range(0..n)];
            let t = vars[rng.gen_range(0..n)];
            if s != t {
                let role = ROLES[rng.gen_range(0..ROLES.len())];
                builder.add_relation(s, role, t).unwrap();
            }
        }
    }
    for &v in &vars {
        if rng.gen_bool(config.attr_prob) {
            let role = ATTR_ROLES[rng.gen_range(0..ATTR_ROLES.len())];
            let value = if rng.gen_bool(0.5) {
                ConstantValue::string(format!("S{}", rng.gen_range(0..30)))
            } else {
                ConstantValue::symbol_or_number(SYMBOLS[rng.gen_range(0..SYMBOLS.len())])
            };
            builder.add_attribute(v, role, value).unwrap();
        }
    }
    builder.finish().expect("construction is connected by design")
}

/// Renames every variable (`v3` -> `w3`), preserving structure exactly.
pub fn rename_vars(graph: &AmrGraph) -> AmrGraph {
    let mut builder = GraphBuilder::new();
    for v in graph.var_ids() {
        builder
            .add_instance(&format!("w{}", v.0), graph.concept(v).clone())
            .unwrap();
    }
    for r in graph.relations() {
        builder
            .add_relation(VarId(r.source.0), &r.role, VarId(r.target.0))
            .unwrap();
    }
    for a in graph.attributes() {
        builder
            .add_attribute(VarId(a.source.0), &a.role, a.value.clone())
            .unwrap();
    }
    builder.set_root(graph.root());
    builder.finish().unwrap()
}

/// Applies a random structure-preserving-connectivity mutation: relabel a
/// node, relabel a relation role, or retarget an edge. Returns `None`
/// when the mutation would disconnect the graph or no mutation applies.
pub fn mutate(rng: &mut ChaCha8Rng, graph: &AmrGraph) -> Option<AmrGraph> {
    for _attempt in 0..16 {
        let mut builder = GraphBuilder::new();
        let relabel_node = rng.gen_bool(0.4) || graph.relations().is_empty();
        let node_pick = rng.gen_range(0..graph.len());
        for v in graph.var_ids() {
            let mut concept = graph.concept(v).clone();
            if relabel_node && v.0 == node_pick {
                let mut other = concept.full().to_string();
                while other == concept.full() {
                    other = CONCEPTS[rng.gen_range(0..CONCEPTS.len())].to_string();
                }
                concept = ConceptLabel::parse(&other);
            }
            builder.add_instance(&format!("v{}", v.0), concept).unwrap();
        }
        let rel_pick = if graph.relations().is_empty() {
            usize::MAX
        } else {
            rng.gen_range(0..graph.relations().len())
        };
        for (i, r) in graph.relations().iter().enumerate() {
            let mut role = r.role.clone();
            let mut source = r.source;
            if !relabel_node && i == rel_pick {
                if rng.gen_bool(0.5) {
                    while role == r.role {
                        role = ROLES[rng.gen_range(0..ROLES.len())].to_string();
                    }
                } else {
                    // Move the edge source, the misattachment scenario.
                    source = VarId(rng.gen_range(0..graph.len()));
                    if source == r.target || source == r.source {
                        continue;
                    }
                }
            }
            builder.add_relation(source, &role, r.target).unwrap();
        }
        for a in graph.attributes() {
            builder.add_attribute(a.source, &a.role, a.value.clone()).unwrap();
        }
        builder.set_root(graph.root());
        if let Ok(g) = builder.finish() {
            return Some(g);
        }
    }
    None
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{is_exact_match, NormalizeConfig};

    #[test]
    fn generated_graphs_are_valid_and_deterministic() {
        let cfg = GraphGenConfig::default();
        let a: Vec<AmrGraph> = {
            let mut rng = seeded_rng(7);
            (0..20).map(|_| random_graph(&mut rng, &cfg)).collect()
        };
        let b: Vec<AmrGraph> = {
            let mut rng = seeded_rng(7);
            (0..20).map(|_| random_graph(&mut rng, &cfg)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn rename_preserves_exact_match() {
        let mut rng = seeded_rng(11);
        let cfg = GraphGenConfig::default();
        let norm = NormalizeConfig::default();
        for _ in 0..50 {
            let g = random_graph(&mut rng, &cfg);
            let renamed = rename_vars(&g);
            assert!(is_exact_match(&norm.normalize(&g), &norm.normalize(&renamed)));
        }
    }
}
