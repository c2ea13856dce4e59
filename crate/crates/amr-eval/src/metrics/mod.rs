//! Targeted category checks with prerequisite and sanity-check roles.

mod annotation;
mod category;

pub use annotation::{group_instances, parse_annotations, write_annotations, AnnotationRow};
pub(crate) use annotation::{collect_fragments, kind_token, spec_from_parts, spec_payload};
pub use category::{
    conjunct_scores, evaluate_category, extract_conjuncts, CategoryInstance, EvaluationResult,
    Outcome,
};

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{
    extract_subgraph, is_exact_match, AmrGraph, ConceptLabel, ConstKind, ConstantValue,
    GraphError, NormalizeConfig, VarId,
};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("unknown category id {0:?}")]
    UnknownCategory(String),
    #[error("malformed payload for kind {kind} (line {line}): {message}")]
    MalformedPayload {
        kind: String,
        line: usize,
        message: String,
    },
    #[error("annotation line {line}: {message}")]
    BadAnnotation { line: usize, message: String },
    #[error("unknown reification {0:?}")]
    UnknownReification(String),
    #[error("entry {0:?} has no and-instance in gold")]
    NoAndInstance(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Role of a check within its category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Role {
    Main,
    Prerequisite,
    SanityCheck,
}

impl Role {
    pub fn token(&self) -> &'static str {
        match self {
            Role::Main => "main",
            Role::Prerequisite => "prereq",
            Role::SanityCheck => "sanity",
        }
    }

    pub fn from_token(tok: &str) -> Option<Role> {
        match tok {
            "main" => Some(Role::Main),
            "prereq" => Some(Role::Prerequisite),
            "sanity" => Some(Role::SanityCheck),
            _ => None,
        }
    }
}

/// A subgraph paraphrase of a role edge: `(label :source_role S
/// :target_role T)` is accepted in place of the edge `S --role--> T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reification {
    pub label: ConceptLabel,
    pub source_role: String,
    pub target_role: String,
}

/// Reification tables are data, not code; this resolves the names used in
/// annotation payloads. The default table ships with the crate.
#[derive(Debug, Clone)]
pub struct ReificationTable {
    entries: Vec<(String, Reification)>, // (plain role, reification)
}

impl ReificationTable {
    pub fn parse(text: &str) -> Result<Self, MetricError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(MetricError::BadAnnotation {
                    line: i + 1,
                    message: format!("expected 4 tab-separated fields, got {}", fields.len()),
                });
            }
            entries.push((
                fields[0].to_string(),
                Reification {
                    label: ConceptLabel::parse(fields[1]),
                    source_role: fields[2].to_string(),
                    target_role: fields[3].to_string(),
                },
            ));
        }
        Ok(ReificationTable { entries })
    }

    pub fn by_label(&self, label: &str) -> Option<&Reification> {
        self.entries.iter().find(|(_, r)| r.label.full() == label).map(|(_, r)| r)
    }

    pub fn for_role(&self, role: &str) -> Vec<&Reification> {
        self.entries
            .iter()
            .filter(|(r, _)| r == role)
            .map(|(_, reif)| reif)
            .collect()
    }
}

impl Default for ReificationTable {
    fn default() -> Self {
        ReificationTable::parse(include_str!("../generation/data/reifications.tsv"))
            .expect("shipped reification table parses")
    }
}

/// What a check looks for in the predicted graph.
#[derive(Debug, Clone)]
pub enum MetricKind {
    NodeLabelRecall {
        label: ConceptLabel,
    },
    EdgeRecall {
        source: ConceptLabel,
        role: String,
        target: ConceptLabel,
        reifications: Vec<Reification>,
    },
    ExactMatch {
        gold: AmrGraph,
    },
    SubgraphRecall {
        fragment: AmrGraph,
    },
    NameSequenceRecall {
        sequence: Vec<String>,
    },
    DateAttributeRecall {
        attrs: BTreeSet<(String, String)>,
    },
    EntityValueRecall {
        value: ConstantValue,
    },
    WikiRecall {
        value: ConstantValue,
    },
    NeTypeRecall {
        type_label: ConceptLabel,
        name_sequence: Vec<String>,
    },
    ConjunctRecall {
        conjuncts: Vec<AmrGraph>,
    },
    ConjunctPrecision {
        conjuncts: Vec<AmrGraph>,
    },
    UnseenOpiRecall {
        index: usize,
        conjunct: AmrGraph,
    },
    ImperativeRecall {
        predicate: ConceptLabel,
        subject: ConceptLabel,
    },
}

impl MetricKind {
    pub fn display_name(&self) -> &'static str {
        match self {
            MetricKind::NodeLabelRecall { .. } => "Label recall",
            MetricKind::EdgeRecall { .. } => "Edge recall",
            MetricKind::ExactMatch { .. } => "Exact match",
            MetricKind::SubgraphRecall { .. } => "Recall",
            MetricKind::NameSequenceRecall { .. } => "Recall",
            MetricKind::DateAttributeRecall { .. } => "Recall",
            MetricKind::EntityValueRecall { .. } => "Recall",
            MetricKind::WikiRecall { .. } => "Recall",
            MetricKind::NeTypeRecall { .. } => "Recall",
            MetricKind::ConjunctRecall { .. } => "Conjunct recall",
            MetricKind::ConjunctPrecision { .. } => "Conjunct precision",
            MetricKind::UnseenOpiRecall { .. } => "Unseen :opi recall",
            MetricKind::ImperativeRecall { .. } => "Recall",
        }
    }
}

/// One checkable target with its role.
#[derive(Debug, Clone)]
pub struct MetricSpec {
    pub kind: MetricKind,
    pub role: Role,
    pub sense_sensitive: bool,
    pub min_occurrences: usize,
}

impl MetricSpec {
    pub fn main(kind: MetricKind) -> Self {
        MetricSpec {
            kind,
            role: Role::Main,
            sense_sensitive: true,
            min_occurrences: 1,
        }
    }
}

/// A predicted graph normalized once, ready for repeated checks.
#[derive(Debug)]
pub struct EvalGraph {
    graph: AmrGraph,
}

impl EvalGraph {
    pub fn new(predicted: &AmrGraph) -> Self {
        EvalGraph {
            graph: NormalizeConfig::default().normalize(predicted),
        }
    }

    pub fn graph(&self) -> &AmrGraph {
        &self.graph
    }

    fn vars_with_label(&self, label: &ConceptLabel, sense: bool) -> Vec<VarId> {
        self.graph
            .var_ids()
            .filter(|&v| self.graph.concept(v).matches(label, sense))
            .collect()
    }

    fn has_label(&self, label: &ConceptLabel, sense: bool) -> bool {
        self.graph
            .var_ids()
            .any(|v| self.graph.concept(v).matches(label, sense))
    }

    /// Ordered op-attribute values of a node (`op1`, `op2`, ... sorted by
    /// index).
    fn op_sequence(&self, v: VarId) -> Vec<String> {
        let mut ops: Vec<(usize, String)> = self
            .graph
            .attributes()
            .iter()
            .filter(|a| a.source == v)
            .filter_map(|a| {
                a.role
                    .strip_prefix("op")
                    .and_then(|i| i.parse::<usize>().ok())
                    .map(|i| (i, a.value.text.clone()))
            })
            .collect();
        ops.sort();
        ops.into_iter().map(|(_, s)| s).collect()
    }
}

/// Evaluates one check against a (pre-normalized) predicted graph.
pub fn evaluate_check(spec: &MetricSpec, predicted: &EvalGraph) -> bool {
    let sense = spec.sense_sensitive;
    match (&spec.kind, spec.role) {
        // A prerequisite edge check degrades to endpoints-present: the
        // graph material that must exist for the edge metric to be
        // meaningful.
        (MetricKind::EdgeRecall { source, target, .. }, Role::Prerequisite) => {
            predicted.has_label(source, sense) && predicted.has_label(target, sense)
        }
        // The prerequisite of an imperative check is the predicate alone.
        (MetricKind::ImperativeRecall { predicate, .. }, Role::Prerequisite) => {
            predicted.has_label(predicate, sense)
        }
        // The prerequisite of a named-entity-type check is the name
        // sequence alone.
        (MetricKind::NeTypeRecall { name_sequence, .. }, Role::Prerequisite) => {
            name_sequence_holds(predicted, name_sequence)
        }
        (kind, _) => evaluate_kind(kind, spec, predicted),
    }
}

fn evaluate_kind(kind: &MetricKind, spec: &MetricSpec, g: &EvalGraph) -> bool {
    let sense = spec.sense_sensitive;
    match kind {
        MetricKind::NodeLabelRecall { label } => {
            g.vars_with_label(label, sense).len() >= spec.min_occurrences.max(1)
        }
        MetricKind::EdgeRecall { source, role, target, reifications } => {
            edge_holds(g, source, role, target, reifications, sense)
        }
        MetricKind::ExactMatch { gold } => is_exact_match(g.graph(), gold),
        MetricKind::SubgraphRecall { fragment } => embeds(fragment, g, sense, None),
        MetricKind::NameSequenceRecall { sequence } => name_sequence_holds(g, sequence),
        MetricKind::DateAttributeRecall { attrs } => {
            let date = ConceptLabel::parse("date-entity");
            g.vars_with_label(&date, true).into_iter().any(|v| {
                let found: BTreeSet<(String, String)> = g
                    .graph()
                    .attributes()
                    .iter()
                    .filter(|a| a.source == v)
                    .map(|a| (a.role.clone(), a.value.text.clone()))
                    .collect();
                &found == attrs
            })
        }
        MetricKind::EntityValueRecall { value } => {
            g.graph().attributes().iter().any(|a| &a.value == value)
        }
        MetricKind::WikiRecall { value } => g
            .graph()
            .attributes()
            .iter()
            .any(|a| a.role == "wiki" && &a.value == value),
        MetricKind::NeTypeRecall { type_label, name_sequence } => {
            let name = ConceptLabel::parse("name");
            g.vars_with_label(type_label, sense).into_iter().any(|v| {
                g.graph()
                    .relations()
                    .iter()
                    .filter(|r| r.source == v && r.role == "name")
                    .any(|r| {
                        g.graph().concept(r.target).matches(&name, true)
                            && g.op_sequence(r.target) == *name_sequence
                    })
            })
        }
        MetricKind::ConjunctRecall { conjuncts } => {
            conjunct_outcomes(conjuncts, g, sense).iter().all(|&b| b)
        }
        MetricKind::ConjunctPrecision { conjuncts } => {
            conjunct_precision_holds(conjuncts, g, sense)
        }
        MetricKind::UnseenOpiRecall { index, conjunct } => {
            let and = ConceptLabel::parse("and");
            let role = format!("op{index}");
            g.vars_with_label(&and, true).into_iter().any(|v| {
                g.graph()
                    .relations()
                    .iter()
                    .filter(|r| r.source == v && r.role == role)
                    .any(|r| embeds(conjunct, g, sense, Some((conjunct.root(), r.target))))
            })
        }
        MetricKind::ImperativeRecall { predicate, subject } => {
            g.vars_with_label(predicate, sense).into_iter().any(|p| {
                let has_mode = g.graph().attributes().iter().any(|a| {
                    a.source == p
                        && a.role == "mode"
                        && a.value.kind == ConstKind::Symbol
                        && a.value.text == "imperative"
                });
                let has_subject = g.graph().relations().iter().any(|r| {
                    r.source == p
                        && r.role == "ARG0"
                        && g.graph().concept(r.target).matches(subject, sense)
                });
                has_mode && has_subject
            })
        }
    }
}

fn name_sequence_holds(g: &EvalGraph, sequence: &[String]) -> bool {
    let name = ConceptLabel::parse("name");
    g.vars_with_label(&name, true)
        .into_iter()
        .any(|v| g.op_sequence(v) == sequence)
}

fn edge_holds(
    g: &EvalGraph,
    source: &ConceptLabel,
    role: &str,
    target: &ConceptLabel,
    reifications: &[Reification],
    sense: bool,
) -> bool {
    let direct = g.graph().relations().iter().any(|r| {
        r.role == role
            && g.graph().concept(r.source).matches(source, sense)
            && g.graph().concept(r.target).matches(target, sense)
    });
    if direct {
        return true;
    }
    // An attribute can satisfy the edge when the target side is a constant
    // (dates, modes, bare symbols).
    let via_attr = g.graph().attributes().iter().any(|a| {
        a.role == role
            && g.graph().concept(a.source).matches(source, sense)
            && a.value.text == target.full()
    });
    if via_attr {
        return true;
    }
    reifications.iter().any(|reif| {
        g.vars_with_label(&reif.label, true).into_iter().any(|m| {
            let src_ok = g.graph().relations().iter().any(|r| {
                r.source == m
                    && r.role == reif.source_role
                    && g.graph().concept(r.target).matches(source, sense)
            });
            let tgt_ok = g.graph().relations().iter().any(|r| {
                r.source == m
                    && r.role == reif.target_role
                    && g.graph().concept(r.target).matches(target, sense)
            });
            src_ok && tgt_ok
        })
    })
}

/// Per-conjunct match flags: a gold conjunct is found when some `op<i>`
/// target of a predicted and-instance is isomorphic to it.
pub(crate) fn conjunct_outcomes(conjuncts: &[AmrGraph], g: &EvalGraph, sense: bool) -> Vec<bool> {
    let targets = predicted_op_targets(g);
    conjuncts
        .iter()
        .map(|frag| {
            targets
                .iter()
                .any(|&t| embeds(frag, g, sense, Some((frag.root(), t))))
        })
        .collect()
}

/// True when every predicted conjunct is isomorphic to some gold
/// conjunct; entries without predicted conjuncts fail.
pub(crate) fn conjunct_precision_holds(conjuncts: &[AmrGraph], g: &EvalGraph, sense: bool) -> bool {
    let targets = predicted_op_targets(g);
    if targets.is_empty() {
        return false;
    }
    targets.iter().all(|&t| {
        let predicted = extract_subgraph(g.graph(), t);
        conjuncts
            .iter()
            .any(|gold| is_exact_match(&predicted, gold))
    })
}

fn predicted_op_targets(g: &EvalGraph) -> Vec<VarId> {
    let and = ConceptLabel::parse("and");
    let mut targets = Vec::new();
    for v in g.vars_with_label(&and, true) {
        for r in g.graph().relations() {
            if r.source == v
                && r.role.strip_prefix("op").is_some_and(|i| i.parse::<usize>().is_ok())
            {
                targets.push(r.target);
            }
        }
    }
    targets
}

/// Backtracking subgraph embedding: labels, roles and attributes of the
/// fragment must all be present under an injective variable mapping.
/// `anchor` pins a fragment variable to a specific target variable.
pub fn embeds(
    fragment: &AmrGraph,
    target: &EvalGraph,
    sense: bool,
    anchor: Option<(VarId, VarId)>,
) -> bool {
    let mut mapping: Vec<Option<VarId>> = vec![None; fragment.len()];
    let mut used = vec![false; target.graph().len()];
    if let Some((fv, tv)) = anchor {
        if !fragment.concept(fv).matches(target.graph().concept(tv), sense) {
            return false;
        }
        mapping[fv.0] = Some(tv);
        used[tv.0] = true;
    }
    let order: Vec<VarId> = fragment.var_ids().collect();
    embed_search(fragment, target, &order, 0, &mut mapping, &mut used, sense)
}

fn embed_search(
    fragment: &AmrGraph,
    target: &EvalGraph,
    order: &[VarId],
    idx: usize,
    mapping: &mut Vec<Option<VarId>>,
    used: &mut Vec<bool>,
    sense: bool,
) -> bool {
    if idx == order.len() {
        return embed_verify(fragment, target, mapping);
    }
    let v = order[idx];
    if mapping[v.0].is_some() {
        return embed_search(fragment, target, order, idx + 1, mapping, used, sense);
    }
    for w in target.graph().var_ids() {
        if used[w.0] || !fragment.concept(v).matches(target.graph().concept(w), sense) {
            continue;
        }
        mapping[v.0] = Some(w);
        used[w.0] = true;
        if embed_check_partial(fragment, target, mapping)
            && embed_search(fragment, target, order, idx + 1, mapping, used, sense)
        {
            return true;
        }
        mapping[v.0] = None;
        used[w.0] = false;
    }
    false
}

fn embed_check_partial(fragment: &AmrGraph, target: &EvalGraph, mapping: &[Option<VarId>]) -> bool {
    fragment.relations().iter().all(|r| {
        match (mapping[r.source.0], mapping[r.target.0]) {
            (Some(s), Some(t)) => target
                .graph()
                .relations()
                .iter()
                .any(|tr| tr.source == s && tr.role == r.role && tr.target == t),
            _ => true,
        }
    })
}

fn embed_verify(fragment: &AmrGraph, target: &EvalGraph, mapping: &[Option<VarId>]) -> bool {
    let rel_ok = embed_check_partial(fragment, target, mapping);
    let attr_ok = fragment.attributes().iter().all(|a| {
        let s = match mapping[a.source.0] {
            Some(s) => s,
            None => return false,
        };
        target
            .graph()
            .attributes()
            .iter()
            .any(|ta| ta.source == s && ta.role == a.role && ta.value == a.value)
    });
    rel_ok && attr_ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_penman;

    fn eval(text: &str) -> EvalGraph {
        EvalGraph::new(&parse_penman(text).unwrap())
    }

    fn node_check(label: &str, sense: bool) -> MetricSpec {
        MetricSpec {
            kind: MetricKind::NodeLabelRecall {
                label: ConceptLabel::parse(label),
            },
            role: Role::Main,
            sense_sensitive: sense,
            min_occurrences: 1,
        }
    }

    #[test]
    fn misattached_edge_fails_while_node_recall_passes() {
        // The PP attached to the room instead of the run event.
        let pred = eval(
            "(a / and :op1 (r / run-02 :ARG0 (m / mechanic) :path (r2 / room :destination (c / centrifuge))) :op2 (t / turn-off-07 :ARG1 c))",
        );
        let edge = MetricSpec::main(MetricKind::EdgeRecall {
            source: ConceptLabel::parse("run-02"),
            role: "destination".into(),
            target: ConceptLabel::parse("centrifuge"),
            reifications: vec![],
        });
        assert!(!evaluate_check(&edge, &pred));
        assert!(evaluate_check(&node_check("centrifuge", true), &pred));
        // The prerequisite (both endpoints present) still passes.
        let prereq = MetricSpec {
            role: Role::Prerequisite,
            ..edge.clone()
        };
        assert!(evaluate_check(&prereq, &pred));
    }

    #[test]
    fn date_attribute_recall_exact_set() {
        let pred = eval("(d / date-entity :month 12 :day 22 :year 2002)");
        let mut attrs = BTreeSet::new();
        attrs.insert(("month".to_string(), "12".to_string()));
        attrs.insert(("day".to_string(), "22".to_string()));
        attrs.insert(("year".to_string(), "2002".to_string()));
        let check = MetricSpec::main(MetricKind::DateAttributeRecall { attrs: attrs.clone() });
        assert!(evaluate_check(&check, &pred));

        let partial = eval("(d / date-entity :month 12 :day 22)");
        assert!(!evaluate_check(&check, &partial));
    }

    #[test]
    fn name_sequence_recall() {
        let check = MetricSpec::main(MetricKind::NameSequenceRecall {
            sequence: vec!["Capitol".into(), "Hill".into()],
        });
        let full = eval(r#"(c / city :name (n / name :op1 "Capitol" :op2 "Hill"))"#);
        assert!(evaluate_check(&check, &full));
        let partial = eval(r#"(c / city :name (n / name :op1 "Capitol"))"#);
        assert!(!evaluate_check(&check, &partial));
    }

    #[test]
    fn sense_sensitivity_pairing() {
        let pred = eval("(f / fill-in-01 :ARG0 (r / reporter))");
        assert!(!evaluate_check(&node_check("fill-in-07", true), &pred));
        assert!(evaluate_check(&node_check("fill-in-07", false), &pred));
    }

    #[test]
    fn reification_satisfies_edge() {
        let pred = eval(
            "(k / know-01 :ARG0 (s / person) :ARG1 (j / journalist :ARG0-of (h / have-03 :ARG1 (t / telescope))))",
        );
        let table = ReificationTable::default();
        let reifs: Vec<Reification> = ["have-03", "own-01"]
            .iter()
            .map(|l| table.by_label(l).unwrap().clone())
            .collect();
        let edge = MetricSpec::main(MetricKind::EdgeRecall {
            source: ConceptLabel::parse("telescope"),
            role: "poss".into(),
            target: ConceptLabel::parse("journalist"),
            reifications: reifs,
        });
        assert!(evaluate_check(&edge, &pred));

        // Direct edge also satisfies it.
        let direct = eval("(k / know-01 :ARG1 (j / journalist :poss-of (t / telescope)))");
        assert!(evaluate_check(&edge, &direct));
    }

    #[test]
    fn imperative_check() {
        let pred = eval("(g / go-02 :mode imperative :ARG0 (y / you))");
        let check = MetricSpec::main(MetricKind::ImperativeRecall {
            predicate: ConceptLabel::parse("go-02"),
            subject: ConceptLabel::parse("you"),
        });
        assert!(evaluate_check(&check, &pred));
        let wrong_mode = eval("(g / go-02 :ARG0 (y / you))");
        assert!(!evaluate_check(&check, &wrong_mode));
        let prereq = MetricSpec {
            role: Role::Prerequisite,
            ..check
        };
        assert!(evaluate_check(&prereq, &wrong_mode));
    }

    #[test]
    fn min_occurrences_for_ellipsis() {
        let twice = eval("(a / and :op1 (d / drive-01) :op2 (d2 / drive-01))");
        let mut check = node_check("drive-01", true);
        check.min_occurrences = 2;
        assert!(evaluate_check(&check, &twice));
        let once = eval("(d / drive-01)");
        assert!(!evaluate_check(&check, &once));
        check.min_occurrences = 1;
        assert!(evaluate_check(&check, &once));
    }

    #[test]
    fn subgraph_recall_embedding() {
        let frag = parse_penman("(p / person :ARG0-of (t / teach-01))").unwrap();
        let frag = NormalizeConfig::default().normalize(&frag);
        let pred = eval("(s / see-01 :ARG1 (p / person :ARG0-of (t / teach-01 :ARG1 (m / math))))");
        let check = MetricSpec::main(MetricKind::SubgraphRecall { fragment: frag.clone() });
        assert!(evaluate_check(&check, &pred));
        let other = eval("(s / see-01 :ARG1 (p / person))");
        assert!(!evaluate_check(&check, &other));
    }

    #[test]
    fn wiki_and_entity_value() {
        let pred = eval(r#"(c / country :wiki "North_Korea" :name (n / name :op1 "North" :op2 "Korea"))"#);
        let wiki = MetricSpec::main(MetricKind::WikiRecall {
            value: ConstantValue::string("North_Korea"),
        });
        assert!(evaluate_check(&wiki, &pred));
        let value = MetricSpec::main(MetricKind::EntityValueRecall {
            value: ConstantValue::string("Korea"),
        });
        assert!(evaluate_check(&value, &pred));
        let missing = MetricSpec::main(MetricKind::WikiRecall {
            value: ConstantValue::string("South_Korea"),
        });
        assert!(!evaluate_check(&missing, &pred));
    }
}
