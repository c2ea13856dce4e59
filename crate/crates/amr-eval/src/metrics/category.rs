//! Category-level evaluation: grouping check outcomes into per-metric
//! results with main / prerequisite / sanity-check roles.

use std::collections::BTreeMap;

use log::warn;

use super::{
    conjunct_outcomes, conjunct_precision_holds, evaluate_check, EvalGraph, MetricError,
    MetricKind, MetricSpec, Role,
};
use crate::categories;
use crate::graph::{extract_subgraph, AmrGraph, ConceptLabel, NormalizeConfig};

/// All checks annotated for one corpus entry in one category.
#[derive(Debug, Clone)]
pub struct CategoryInstance {
    pub entry_id: String,
    pub category_id: String,
    pub checks: Vec<MetricSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub entry_id: String,
    pub check_index: usize,
    pub pass: bool,
}

/// Per (category, role, metric) aggregation. The denominator is the
/// number of datapoints (the `#` column of the result tables).
#[derive(Debug, Clone)]
pub struct EvaluationResult {
    pub category_id: String,
    pub metric_name: String,
    pub role: Role,
    pub outcomes: Vec<Outcome>,
    pub numerator: usize,
    pub denominator: usize,
}

impl EvaluationResult {
    pub fn score(&self) -> f64 {
        if self.denominator == 0 {
            0.0
        } else {
            self.numerator as f64 / self.denominator as f64
        }
    }
}

/// Evaluates category instances against predictions keyed by entry id.
/// A missing prediction counts as failure on every check of the entry
/// (parsers must not gain by omission); a warning is logged.
pub fn evaluate_category(
    instances: &[CategoryInstance],
    predictions: &BTreeMap<String, AmrGraph>,
) -> Result<Vec<EvaluationResult>, MetricError> {
    let mut groups: BTreeMap<(String, Role, String), Vec<Outcome>> = BTreeMap::new();
    let mut eval_cache: BTreeMap<&str, EvalGraph> = BTreeMap::new();

    for instance in instances {
        if categories::lookup(&instance.category_id).is_none() {
            return Err(MetricError::UnknownCategory(instance.category_id.clone()));
        }
        let eval = match predictions.get(&instance.entry_id) {
            Some(graph) => Some(
                eval_cache
                    .entry(instance.entry_id.as_str())
                    .or_insert_with(|| EvalGraph::new(graph)),
            ),
            None => {
                warn!(
                    "no prediction for entry {} (category {}); counting as failure",
                    instance.entry_id, instance.category_id
                );
                None
            }
        };

        let mut instance_results: Vec<(Role, &'static str, Vec<bool>)> = Vec::new();
        for spec in &instance.checks {
            let passes: Vec<bool> = match (&spec.kind, &eval) {
                // Conjunct recall expands to one datapoint per gold
                // conjunct.
                (MetricKind::ConjunctRecall { conjuncts }, Some(g)) => {
                    conjunct_outcomes(conjuncts, g, spec.sense_sensitive)
                }
                (MetricKind::ConjunctRecall { conjuncts }, None) => {
                    vec![false; conjuncts.len()]
                }
                (MetricKind::ConjunctPrecision { conjuncts }, Some(g)) => {
                    vec![conjunct_precision_holds(conjuncts, g, spec.sense_sensitive)]
                }
                (MetricKind::ConjunctPrecision { .. }, None) => vec![false],
                (_, Some(g)) => vec![evaluate_check(spec, g)],
                (_, None) => vec![false],
            };
            instance_results.push((spec.role, spec.kind.display_name(), passes));
        }

        // Prerequisite dominance: a passing main check implies its paired
        // prerequisite passes. Pairing is positional within the entry; a
        // violation indicates a bad payload, so fail loudly.
        let mains: Vec<&(Role, &str, Vec<bool>)> = instance_results
            .iter()
            .filter(|(r, _, _)| *r == Role::Main)
            .collect();
        let prereqs: Vec<&(Role, &str, Vec<bool>)> = instance_results
            .iter()
            .filter(|(r, _, _)| *r == Role::Prerequisite)
            .collect();
        if !prereqs.is_empty() && mains.len() == prereqs.len() {
            for (k, (main, prereq)) in mains.iter().zip(prereqs.iter()).enumerate() {
                let main_pass = main.2.iter().all(|&b| b);
                let prereq_pass = prereq.2.iter().all(|&b| b);
                assert!(
                    !main_pass || prereq_pass,
                    "prerequisite dominance violated for entry {} (category {}, pair {}): \
                     main passes but prerequisite fails — check the annotation payloads",
                    instance.entry_id,
                    instance.category_id,
                    k
                );
            }
        }

        for (role, name, passes) in instance_results {
            let key = (instance.category_id.clone(), role, name.to_string());
            let bucket = groups.entry(key).or_default();
            let base = bucket
                .iter()
                .filter(|o| o.entry_id == instance.entry_id)
                .count();
            for (i, pass) in passes.into_iter().enumerate() {
                bucket.push(Outcome {
                    entry_id: instance.entry_id.clone(),
                    check_index: base + i,
                    pass,
                });
            }
        }
    }

    Ok(groups
        .into_iter()
        .map(|((category_id, role, metric_name), outcomes)| {
            let numerator = outcomes.iter().filter(|o| o.pass).count();
            let denominator = outcomes.len();
            EvaluationResult {
                category_id,
                metric_name,
                role,
                outcomes,
                numerator,
                denominator,
            }
        })
        .collect())
}

/// Gold conjuncts of a graph: the subtrees under the `op<i>` edges of its
/// and-instance, ordered by `i`. Errors when no and-instance exists.
pub fn extract_conjuncts(gold: &AmrGraph, entry_id: &str) -> Result<Vec<AmrGraph>, MetricError> {
    let norm = NormalizeConfig::default().normalize(gold);
    let and = ConceptLabel::parse("and");
    let mut best: Option<Vec<(usize, AmrGraph)>> = None;
    for v in norm.var_ids() {
        if !norm.concept(v).matches(&and, true) {
            continue;
        }
        let mut items: Vec<(usize, AmrGraph)> = norm
            .relations()
            .iter()
            .filter(|r| r.source == v)
            .filter_map(|r| {
                r.role
                    .strip_prefix("op")
                    .and_then(|i| i.parse::<usize>().ok())
                    .map(|i| (i, extract_subgraph(&norm, r.target)))
            })
            .collect();
        items.sort_by_key(|(i, _)| *i);
        if !items.is_empty() && best.as_ref().map(|b| b.len()).unwrap_or(0) < items.len() {
            best = Some(items);
        }
    }
    match best {
        Some(items) => Ok(items.into_iter().map(|(_, g)| g).collect()),
        None => Err(MetricError::NoAndInstance(entry_id.to_string())),
    }
}

/// Conjunct recall and precision over a list corpus.
///
/// Recall counts one datapoint per gold conjunct; precision counts one
/// datapoint per list entry, passing when every predicted conjunct of the
/// entry appears in gold.
pub fn conjunct_scores(
    gold_lists: &[(String, Vec<AmrGraph>)],
    predictions: &BTreeMap<String, AmrGraph>,
) -> Result<(EvaluationResult, EvaluationResult), MetricError> {
    let instances: Vec<CategoryInstance> = gold_lists
        .iter()
        .map(|(entry_id, conjuncts)| CategoryInstance {
            entry_id: entry_id.clone(),
            category_id: "long_lists".to_string(),
            checks: vec![
                MetricSpec::main(MetricKind::ConjunctRecall {
                    conjuncts: conjuncts.clone(),
                }),
                MetricSpec::main(MetricKind::ConjunctPrecision {
                    conjuncts: conjuncts.clone(),
                }),
            ],
        })
        .collect();
    let results = evaluate_category(&instances, predictions)?;
    let recall = results
        .iter()
        .find(|r| r.metric_name == "Conjunct recall")
        .cloned()
        .expect("recall result present");
    let precision = results
        .iter()
        .find(|r| r.metric_name == "Conjunct precision")
        .cloned()
        .expect("precision result present");
    Ok((recall, precision))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_penman;
    use crate::metrics::MetricKind;

    fn edge_spec(src: &str, role: &str, tgt: &str, r: Role) -> MetricSpec {
        MetricSpec {
            kind: MetricKind::EdgeRecall {
                source: ConceptLabel::parse(src),
                role: role.to_string(),
                target: ConceptLabel::parse(tgt),
                reifications: vec![],
            },
            role: r,
            sense_sensitive: false,
            min_occurrences: 1,
        }
    }

    #[test]
    fn paper_style_counts() {
        // 36 items; 14 main passes, 18 prerequisite passes.
        let mut instances = Vec::new();
        let mut predictions = BTreeMap::new();
        for i in 0..36 {
            let id = format!("e{i:02}");
            let graph = if i < 14 {
                // main + prereq pass
                parse_penman("(s / say-01 :ARG0 (m / man) :ARG1 (l / lift-01 :ARG0 m))").unwrap()
            } else if i < 18 {
                // prereq passes, main fails
                parse_penman("(s / say-01 :ARG0 (m / man) :ARG1 (l / lift-01))").unwrap()
            } else {
                parse_penman("(s / say-01)").unwrap()
            };
            predictions.insert(id.clone(), graph);
            instances.push(CategoryInstance {
                entry_id: id,
                category_id: "pragmatic_coreference".to_string(),
                checks: vec![
                    edge_spec("lift-01", "ARG0", "man", Role::Main),
                    edge_spec("lift-01", "ARG0", "man", Role::Prerequisite),
                ],
            });
        }
        let results = evaluate_category(&instances, &predictions).unwrap();
        assert_eq!(results.len(), 2);
        let main = results.iter().find(|r| r.role == Role::Main).unwrap();
        let prereq = results.iter().find(|r| r.role == Role::Prerequisite).unwrap();
        assert_eq!((main.numerator, main.denominator), (14, 36));
        assert_eq!((prereq.numerator, prereq.denominator), (18, 36));
    }

    #[test]
    fn empty_instances_give_empty_results() {
        let results = evaluate_category(&[], &BTreeMap::new()).unwrap();
        assert!(results.is_empty());
    }

    #[test]
    fn missing_prediction_fails_main_and_prereq() {
        let instances = vec![CategoryInstance {
            entry_id: "gone".into(),
            category_id: "passives".into(),
            checks: vec![
                edge_spec("make-01", "ARG1", "progress-01", Role::Main),
                edge_spec("make-01", "ARG1", "progress-01", Role::Prerequisite),
            ],
        }];
        let results = evaluate_category(&instances, &BTreeMap::new()).unwrap();
        for r in &results {
            assert_eq!(r.numerator, 0);
            assert_eq!(r.denominator, 1);
        }
    }

    #[test]
    fn unknown_category_is_error() {
        let instances = vec![CategoryInstance {
            entry_id: "x".into(),
            category_id: "not_a_category".into(),
            checks: vec![],
        }];
        assert!(matches!(
            evaluate_category(&instances, &BTreeMap::new()),
            Err(MetricError::UnknownCategory(_))
        ));
    }

    #[test]
    fn conjunct_scores_counting() {
        let gold = parse_penman(
            "(b / buy-01 :mode imperative :ARG0 (y / you) :ARG1 (a / and :op1 (k / book) :op2 (g / gasoline) :op3 (f / fish)))",
        )
        .unwrap();
        let conjuncts = extract_conjuncts(&gold, "l1").unwrap();
        assert_eq!(conjuncts.len(), 3);

        // Perfect prediction: 3/3 recall, precision passes.
        let mut predictions = BTreeMap::new();
        predictions.insert("l1".to_string(), gold.clone());
        let (recall, precision) =
            conjunct_scores(&[("l1".to_string(), conjuncts.clone())], &predictions).unwrap();
        assert_eq!((recall.numerator, recall.denominator), (3, 3));
        assert_eq!((precision.numerator, precision.denominator), (1, 1));

        // Only op1 correct out of 3.
        let partial = parse_penman(
            "(b / buy-01 :mode imperative :ARG0 (y / you) :ARG1 (a / and :op1 (k / book) :op2 (p / pen) :op3 (q / rock)))",
        )
        .unwrap();
        predictions.insert("l1".to_string(), partial);
        let (recall, precision) =
            conjunct_scores(&[("l1".to_string(), conjuncts)], &predictions).unwrap();
        assert_eq!((recall.numerator, recall.denominator), (1, 3));
        assert_eq!((precision.numerator, precision.denominator), (0, 1));
    }

    #[test]
    fn extract_conjuncts_requires_and() {
        let gold = parse_penman("(b / buy-01 :ARG1 (k / book))").unwrap();
        assert!(matches!(
            extract_conjuncts(&gold, "x"),
            Err(MetricError::NoAndInstance(_))
        ));
    }
}
