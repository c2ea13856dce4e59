//! Triple-overlap scoring between two AMR graphs via variable alignment.
//!
//! `smatch_score` follows the classic hill-climbing scheme: one
//! concept-similarity-seeded start plus random restarts. `smatch_oracle`
//! enumerates all injective mappings for small graphs and returns the true
//! optimum; the test suite uses it to keep the hill climber honest.

use std::collections::{HashMap, HashSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{AmrGraph, ConstKind, NormalizeConfig, VarId};

#[derive(Debug, Error)]
pub enum SmatchError {
    #[error("oracle size limit exceeded: {0} variables (max {MAX_ORACLE_VARS})")]
    TooLarge(usize),
    #[error("restarts must be >= 1")]
    NoRestarts,
}

pub const MAX_ORACLE_VARS: usize = 8;

/// Deduplicated triples of one graph, in a form keyed for fast matching.
/// The root contributes one extra marker triple so that self-score is
/// exact and differing roots on otherwise identical graphs score below 1.
#[derive(Debug, Clone)]
pub struct TripleSet {
    /// Concept per variable (instance triples).
    pub concepts: Vec<String>,
    /// (var, role, value-key) including the root marker.
    pub attributes: HashSet<(usize, String, String)>,
    /// (source, role, target).
    pub relations: HashSet<(usize, String, usize)>,
    pub root: usize,
}

impl TripleSet {
    pub fn from_graph(graph: &AmrGraph) -> Self {
        let concepts = graph
            .var_ids()
            .map(|v| graph.concept(v).full().to_string())
            .collect();
        let mut attributes: HashSet<(usize, String, String)> = graph
            .attributes()
            .iter()
            .map(|a| (a.source.0, a.role.clone(), value_key(&a.value.kind, &a.value.text)))
            .collect();
        attributes.insert((graph.root().0, "TOP".to_string(), "top".to_string()));
        let relations = graph
            .relations()
            .iter()
            .map(|r| (r.source.0, r.role.clone(), r.target.0))
            .collect();
        TripleSet {
            concepts,
            attributes,
            relations,
            root: graph.root().0,
        }
    }

    pub fn len(&self) -> usize {
        self.concepts.len() + self.attributes.len() + self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn var_count(&self) -> usize {
        self.concepts.len()
    }
}

fn value_key(kind: &ConstKind, text: &str) -> String {
    match kind {
        ConstKind::StringLiteral => format!("s:{text}"),
        ConstKind::Number => format!("n:{text}"),
        ConstKind::Symbol => format!("y:{text}"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmatchScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: usize,
    pub gold_total: usize,
    pub predicted_total: usize,
}

impl SmatchScore {
    fn from_counts(matched: usize, predicted_total: usize, gold_total: usize) -> Self {
        let precision = if predicted_total == 0 {
            0.0
        } else {
            matched as f64 / predicted_total as f64
        };
        let recall = if gold_total == 0 {
            0.0
        } else {
            matched as f64 / gold_total as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        SmatchScore {
            precision,
            recall,
            f1,
            matched,
            gold_total,
            predicted_total,
        }
    }

    /// Table presentation: round-half-up integer of 100 * f1.
    pub fn display_score(&self) -> u32 {
        crate::stats::round_half_up(self.f1 * 100.0)
    }
}

fn matched_count(pred: &TripleSet, gold: &TripleSet, mapping: &[Option<usize>]) -> usize {
    let mut matched = 0;
    for (v, concept) in pred.concepts.iter().enumerate() {
        if let Some(g) = mapping[v] {
            if &gold.concepts[g] == concept {
                matched += 1;
            }
        }
    }
    for (v, role, value) in &pred.attributes {
        if let Some(g) = mapping[*v] {
            if gold.attributes.contains(&(g, role.clone(), value.clone())) {
                matched += 1;
            }
        }
    }
    for (s, role, t) in &pred.relations {
        if let (Some(gs), Some(gt)) = (mapping[*s], mapping[*t]) {
            if gold.relations.contains(&(gs, role.clone(), gt)) {
                matched += 1;
            }
        }
    }
    matched
}

/// Greedy start: map each predicted variable to an unused gold variable
/// with the same concept where possible.
fn seeded_start(pred: &TripleSet, gold: &TripleSet) -> Vec<Option<usize>> {
    let mut by_concept: HashMap<&str, Vec<usize>> = HashMap::new();
    for (g, concept) in gold.concepts.iter().enumerate() {
        by_concept.entry(concept.as_str()).or_default().push(g);
    }
    let mut used = vec![false; gold.var_count()];
    let mut mapping = vec![None; pred.var_count()];
    // Anchor roots first when concepts agree.
    if gold.concepts.get(gold.root) == pred.concepts.get(pred.root) {
        mapping[pred.root] = Some(gold.root);
        used[gold.root] = true;
    }
    for (v, concept) in pred.concepts.iter().enumerate() {
        if mapping[v].is_some() {
            continue;
        }
        if let Some(cands) = by_concept.get(concept.as_str()) {
            if let Some(&g) = cands.iter().find(|&&g| !used[g]) {
                mapping[v] = Some(g);
                used[g] = true;
            }
        }
    }
    // Fill remaining slots arbitrarily; mapping never hurts the score.
    let mut free: Vec<usize> = (0..gold.var_count()).filter(|&g| !used[g]).collect();
    for m in mapping.iter_mut() {
        if m.is_none() {
            if let Some(g) = free.pop() {
                *m = Some(g);
            }
        }
    }
    mapping
}

fn random_start(pred: &TripleSet, gold: &TripleSet, rng: &mut ChaCha8Rng) -> Vec<Option<usize>> {
    let mut golds: Vec<usize> = (0..gold.var_count()).collect();
    golds.shuffle(rng);
    let mut mapping = vec![None; pred.var_count()];
    for (v, m) in mapping.iter_mut().enumerate() {
        if v < golds.len() {
            *m = Some(golds[v]);
        }
    }
    mapping
}

/// Greedy hill climbing from one start: repeatedly applies the best
/// reassignment or swap until no move improves the matched count.
fn climb(pred: &TripleSet, gold: &TripleSet, mapping: &mut Vec<Option<usize>>) -> usize {
    let mut best = matched_count(pred, gold, mapping);
    loop {
        let mut improved = false;
        let used: HashSet<usize> = mapping.iter().flatten().copied().collect();
        let free: Vec<usize> = (0..gold.var_count()).filter(|g| !used.contains(g)).collect();
        let mut best_move: Option<(usize, Option<usize>, usize)> = None; // (pred var, new gold, score)
        let mut best_swap: Option<(usize, usize, usize)> = None;
        for v in 0..mapping.len() {
            let original = mapping[v];
            for &g in &free {
                mapping[v] = Some(g);
                let score = matched_count(pred, gold, mapping);
                if score > best_move.as_ref().map(|m| m.2).unwrap_or(best) {
                    best_move = Some((v, Some(g), score));
                }
            }
            mapping[v] = original;
        }
        for a in 0..mapping.len() {
            for b in a + 1..mapping.len() {
                mapping.swap(a, b);
                let score = matched_count(pred, gold, mapping);
                if score > best_swap.as_ref().map(|m| m.2).unwrap_or(best) {
                    best_swap = Some((a, b, score));
                }
                mapping.swap(a, b);
            }
        }
        let move_score = best_move.as_ref().map(|m| m.2).unwrap_or(0);
        let swap_score = best_swap.as_ref().map(|m| m.2).unwrap_or(0);
        if move_score >= swap_score && move_score > best {
            let (v, g, score) = best_move.unwrap();
            mapping[v] = g;
            best = score;
            improved = true;
        } else if swap_score > best {
            let (a, b, score) = best_swap.unwrap();
            mapping.swap(a, b);
            best = score;
            improved = true;
        }
        if !improved {
            return best;
        }
    }
}

/// Smatch with hill climbing. `restarts` counts the seeded start plus
/// random restarts; the result is deterministic given `seed`.
pub fn smatch_score(
    predicted: &AmrGraph,
    gold: &AmrGraph,
    restarts: usize,
    seed: u64,
) -> Result<SmatchScore, SmatchError> {
    if restarts == 0 {
        return Err(SmatchError::NoRestarts);
    }
    let norm = NormalizeConfig::default();
    let pred = TripleSet::from_graph(&norm.normalize(predicted));
    let gold = TripleSet::from_graph(&norm.normalize(gold));
    Ok(smatch_on_triples(&pred, &gold, restarts, seed))
}

pub fn smatch_on_triples(
    pred: &TripleSet,
    gold: &TripleSet,
    restarts: usize,
    seed: u64,
) -> SmatchScore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0usize;
    for restart in 0..restarts.max(1) {
        let mut mapping = if restart == 0 {
            seeded_start(pred, gold)
        } else {
            random_start(pred, gold, &mut rng)
        };
        best = best.max(climb(pred, gold, &mut mapping));
    }
    SmatchScore::from_counts(best, pred.len(), gold.len())
}

/// Exhaustive optimum for graphs with at most [`MAX_ORACLE_VARS`]
/// variables: enumerates all injective mappings of the smaller variable
/// set into the larger. Mapping an extra variable can only add matches,
/// so maximal mappings contain an optimum.
pub fn smatch_oracle(predicted: &AmrGraph, gold: &AmrGraph) -> Result<SmatchScore, SmatchError> {
    let limit = predicted.len().max(gold.len());
    if limit > MAX_ORACLE_VARS {
        return Err(SmatchError::TooLarge(limit));
    }
    let norm = NormalizeConfig::default();
    let pred = TripleSet::from_graph(&norm.normalize(predicted));
    let gold = TripleSet::from_graph(&norm.normalize(gold));

    let mut mapping: Vec<Option<usize>> = vec![None; pred.var_count()];
    let mut used = vec![false; gold.var_count()];
    let mut best = 0usize;
    enumerate(&pred, &gold, 0, &mut mapping, &mut used, &mut best);
    Ok(SmatchScore::from_counts(best, pred.len(), gold.len()))
}

fn enumerate(
    pred: &TripleSet,
    gold: &TripleSet,
    v: usize,
    mapping: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
    best: &mut usize,
) {
    if v == mapping.len() {
        *best = (*best).max(matched_count(pred, gold, mapping));
        return;
    }
    let any_free = used.iter().any(|u| !u);
    if !any_free {
        // More predicted than gold variables; the rest stay unmapped.
        *best = (*best).max(matched_count(pred, gold, mapping));
        return;
    }
    for g in 0..used.len() {
        if used[g] {
            continue;
        }
        mapping[v] = Some(g);
        used[g] = true;
        enumerate(pred, gold, v + 1, mapping, used, best);
        mapping[v] = None;
        used[g] = false;
    }
}

/// Best mapping found by hill climbing, for diff visualization: returns
/// predicted-var -> gold-var pairs of the winning alignment.
pub fn best_mapping(
    predicted: &AmrGraph,
    gold: &AmrGraph,
    restarts: usize,
    seed: u64,
) -> Vec<(VarId, VarId)> {
    let norm = NormalizeConfig::default();
    let pred = TripleSet::from_graph(&norm.normalize(predicted));
    let goldt = TripleSet::from_graph(&norm.normalize(gold));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best_score = 0usize;
    let mut best_map = seeded_start(&pred, &goldt);
    best_score = best_score.max(climb(&pred, &goldt, &mut best_map));
    for _ in 1..restarts.max(1) {
        let mut mapping = random_start(&pred, &goldt, &mut rng);
        let score = climb(&pred, &goldt, &mut mapping);
        if score > best_score {
            best_score = score;
            best_map = mapping;
        }
    }
    best_map
        .iter()
        .enumerate()
        .filter_map(|(v, g)| g.map(|g| (VarId(v), VarId(g))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_penman;
    use crate::testgen;

    #[test]
    fn self_score_is_one() {
        let g = parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))").unwrap();
        let s = smatch_score(&g, &g, 5, 0).unwrap();
        assert_eq!(s.f1, 1.0);
        assert_eq!(s.precision, 1.0);
        assert_eq!(s.recall, 1.0);
    }

    #[test]
    fn disjoint_graphs_score_zero() {
        let g1 = parse_penman("(a / alpha :mod (b / beta))").unwrap();
        let g2 = parse_penman("(c / gamma :mod (d / delta))").unwrap();
        let s = smatch_score(&g1, &g2, 5, 0).unwrap();
        // Root markers align only when roots map; concepts all differ, so
        // the only possible match is the TOP marker itself.
        assert!(s.matched <= 1);
        assert!(s.f1 < 0.2);
    }

    #[test]
    fn restarts_zero_is_error() {
        let g = parse_penman("(a / alpha)").unwrap();
        assert!(matches!(smatch_score(&g, &g, 0, 0), Err(SmatchError::NoRestarts)));
    }

    #[test]
    fn oracle_rejects_large_graphs() {
        let mut rng = testgen::seeded_rng(3);
        let cfg = testgen::GraphGenConfig { max_vars: 12, ..Default::default() };
        let mut g = testgen::random_graph(&mut rng, &cfg);
        while g.len() <= MAX_ORACLE_VARS {
            g = testgen::random_graph(&mut rng, &cfg);
        }
        assert!(matches!(smatch_oracle(&g, &g), Err(SmatchError::TooLarge(_))));
    }

    #[test]
    fn oracle_self_score_and_rename() {
        let mut rng = testgen::seeded_rng(5);
        let cfg = testgen::GraphGenConfig::default();
        for _ in 0..30 {
            let g = testgen::random_graph(&mut rng, &cfg);
            let renamed = testgen::rename_vars(&g);
            let s = smatch_oracle(&renamed, &g).unwrap();
            assert_eq!(s.f1, 1.0, "rename must be a perfect match");
        }
    }

    #[test]
    fn hill_climb_never_exceeds_oracle() {
        let mut rng = testgen::seeded_rng(17);
        let cfg = testgen::GraphGenConfig { max_vars: 6, ..Default::default() };
        for i in 0..40 {
            let g1 = testgen::random_graph(&mut rng, &cfg);
            let g2 = testgen::random_graph(&mut rng, &cfg);
            let oracle = smatch_oracle(&g1, &g2).unwrap();
            let hill = smatch_score(&g1, &g2, 10, i).unwrap();
            assert!(
                hill.matched <= oracle.matched,
                "hill climb beat the oracle: {} > {}",
                hill.matched,
                oracle.matched
            );
        }
    }

    #[test]
    fn deletion_monotonicity_under_oracle() {
        // Removing one relation from a copy of gold drops matched by one.
        let gold = parse_penman(
            "(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b :ARG1 (h / house)))",
        )
        .unwrap();
        let pred = parse_penman(
            "(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))",
        )
        .unwrap();
        let full = smatch_oracle(&gold, &gold).unwrap();
        let s = smatch_oracle(&pred, &gold).unwrap();
        // pred dropped one instance (house) and one relation (ARG1).
        assert_eq!(s.matched, full.gold_total - 2);
    }
}
