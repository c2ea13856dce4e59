//! Threshold-based candidate mining from a test corpus against the
//! training-set frequency index, plus the review-sheet format the manual
//! filtering step consumes.

use std::collections::BTreeSet;

use super::index::{band, op_sequence, Band, FrequencyIndex, ARG_ROLES};
use super::PipelineError;
use crate::graph::{ConceptLabel, CorpusEntry, NormalizeConfig, VarId};
use crate::metrics::{
    collect_fragments, kind_token, spec_from_parts, spec_payload, AnnotationRow, MetricKind,
    MetricSpec, ReificationTable, Role,
};

/// Review status of an extracted candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateStatus {
    Unreviewed,
    Accepted,
    Rejected,
}

impl CandidateStatus {
    fn token(&self) -> &'static str {
        match self {
            CandidateStatus::Unreviewed => "unreviewed",
            CandidateStatus::Accepted => "accepted",
            CandidateStatus::Rejected => "rejected",
        }
    }

    fn from_token(tok: &str) -> Option<Self> {
        match tok {
            "unreviewed" => Some(CandidateStatus::Unreviewed),
            "accepted" => Some(CandidateStatus::Accepted),
            "rejected" => Some(CandidateStatus::Rejected),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CandidateRecord {
    pub entry_id: String,
    pub category_id: String,
    pub spec: MetricSpec,
    pub status: CandidateStatus,
    pub note: String,
}

/// Extraction settings: the special-entity type list, sense labels that
/// are skipped as inconsistently annotated, and an optional PropBank
/// frame inventory (predicate -> has an ARG0) for splitting the no-ARG0
/// pool into passives and unaccusatives.
#[derive(Debug, Clone)]
pub struct ExtractConfig {
    pub entity_types: BTreeSet<String>,
    pub sense_exclusions: BTreeSet<String>,
    pub frames: Option<std::collections::BTreeMap<String, bool>>,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            entity_types: super::default_entity_types(),
            sense_exclusions: ["include-01", "include-91"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            frames: None,
        }
    }
}

pub const EXTRACTION_CATEGORIES: &[&str] = &[
    "rare_node_labels",
    "unseen_node_labels",
    "frequent_senses",
    "rare_senses",
    "unseen_senses",
    "rare_edge_labels",
    "unseen_edge_labels",
    "seen_names",
    "unseen_names",
    "seen_dates",
    "unseen_dates",
    "other_seen_entities",
    "other_unseen_entities",
    "ne_types_seen",
    "ne_types_unseen",
    "wiki_easy",
    "wiki_hard",
    "reentrancy_candidates",
    "no_arg0_predicates",
    "imperatives",
];

fn node_spec(label: &str, sense: bool, min: usize) -> MetricSpec {
    MetricSpec {
        kind: MetricKind::NodeLabelRecall {
            label: ConceptLabel::parse(label),
        },
        role: Role::Main,
        sense_sensitive: sense,
        min_occurrences: min,
    }
}

fn edge_spec(src: &str, role: &str, tgt: &str, sense: bool) -> MetricSpec {
    MetricSpec {
        kind: MetricKind::EdgeRecall {
            source: ConceptLabel::parse(src),
            role: role.to_string(),
            target: ConceptLabel::parse(tgt),
            reifications: Vec::new(),
        },
        role: Role::Main,
        sense_sensitive: sense,
        min_occurrences: 1,
    }
}

/// Extracts candidates for one category. Ordering is stable: entries in
/// corpus order, targets in graph declaration order.
pub fn extract_category(
    test: &[CorpusEntry],
    index: &FrequencyIndex,
    category: &str,
    config: &ExtractConfig,
) -> Result<Vec<CandidateRecord>, PipelineError> {
    if !EXTRACTION_CATEGORIES.contains(&category) {
        return Err(PipelineError::UnknownCategory(category.to_string()));
    }
    let norm = NormalizeConfig::default();
    let mut out = Vec::new();
    for entry in test {
        let graph = match &entry.graph {
            Some(g) => norm.normalize(g),
            None => continue,
        };
        let mut push = |spec: MetricSpec, category_id: &str, note: String| {
            out.push(CandidateRecord {
                entry_id: entry.id.clone(),
                category_id: category_id.to_string(),
                spec,
                status: CandidateStatus::Unreviewed,
                note,
            });
        };
        match category {
            "rare_node_labels" | "unseen_node_labels" => {
                let want = if category == "rare_node_labels" {
                    Band::Rare
                } else {
                    Band::Unseen
                };
                let mut seen_labels = BTreeSet::new();
                for v in graph.var_ids() {
                    let label = graph.concept(v).full();
                    if !seen_labels.insert(label.to_string()) {
                        continue;
                    }
                    if band(index.label_count(label)) == want {
                        push(
                            node_spec(label, true, 1),
                            category,
                            format!("training count {}", index.label_count(label)),
                        );
                    }
                }
            }
            "frequent_senses" => {
                let mut seen_labels = BTreeSet::new();
                for v in graph.var_ids() {
                    let concept = graph.concept(v);
                    let Some(sense) = concept.sense() else { continue };
                    if config.sense_exclusions.contains(concept.full()) {
                        continue;
                    }
                    if !seen_labels.insert(concept.full().to_string()) {
                        continue;
                    }
                    let own = index.label_count(concept.full());
                    let competing = index.competing_sense_count(concept.lemma(), sense);
                    if own >= 30 && competing >= 30 {
                        push(
                            node_spec(concept.full(), true, 1),
                            category,
                            format!("own {own}, competing senses {competing}"),
                        );
                    }
                }
            }
            "rare_senses" | "unseen_senses" => {
                let want = if category == "rare_senses" {
                    Band::Rare
                } else {
                    Band::Unseen
                };
                let mut seen_labels = BTreeSet::new();
                for v in graph.var_ids() {
                    let concept = graph.concept(v);
                    let Some(sense) = concept.sense() else { continue };
                    if sense == "01" || config.sense_exclusions.contains(concept.full()) {
                        continue;
                    }
                    if !seen_labels.insert(concept.full().to_string()) {
                        continue;
                    }
                    let own = index.label_count(concept.full());
                    let competing = index.competing_sense_count(concept.lemma(), sense);
                    if band(own) == want && competing >= 1 {
                        push(
                            node_spec(concept.full(), true, 1),
                            category,
                            format!("own {own}, competing senses {competing}"),
                        );
                    }
                }
            }
            "rare_edge_labels" | "unseen_edge_labels" => {
                let want = if category == "rare_edge_labels" {
                    Band::Rare
                } else {
                    Band::Unseen
                };
                let mut seen = BTreeSet::new();
                for r in graph.relations() {
                    if !ARG_ROLES.contains(&r.role.as_str()) {
                        continue;
                    }
                    let src = graph.concept(r.source);
                    if src.sense().is_none() {
                        continue;
                    }
                    let tgt = graph.concept(r.target);
                    let key = (src.full().to_string(), r.role.clone(), tgt.full().to_string());
                    if !seen.insert(key) {
                        continue;
                    }
                    let count = index.predicate_role_count(src.full(), &r.role);
                    if band(count) == want {
                        push(
                            edge_spec(src.full(), &r.role, tgt.full(), true),
                            category,
                            format!("predicate-role count {count}"),
                        );
                    }
                }
            }
            "seen_names" | "unseen_names" => {
                let want_seen = category == "seen_names";
                for v in graph.var_ids() {
                    if graph.concept(v).full() != "name" {
                        continue;
                    }
                    let seq = op_sequence(&graph, v);
                    if seq.is_empty() {
                        continue;
                    }
                    if index.name_sequences.contains(&seq) == want_seen {
                        push(
                            MetricSpec::main(MetricKind::NameSequenceRecall { sequence: seq }),
                            category,
                            String::new(),
                        );
                    }
                }
            }
            "seen_dates" | "unseen_dates" => {
                let want_seen = category == "seen_dates";
                for v in graph.var_ids() {
                    if graph.concept(v).full() != "date-entity" {
                        continue;
                    }
                    let sig: BTreeSet<(String, String)> = graph
                        .attributes()
                        .iter()
                        .filter(|a| a.source == v)
                        .map(|a| (a.role.clone(), a.value.text.clone()))
                        .collect();
                    if sig.is_empty() {
                        continue;
                    }
                    if index.date_signatures.contains(&sig) == want_seen {
                        push(
                            MetricSpec::main(MetricKind::DateAttributeRecall { attrs: sig }),
                            category,
                            String::new(),
                        );
                    }
                }
            }
            "other_seen_entities" | "other_unseen_entities" => {
                let want_seen = category == "other_seen_entities";
                for v in graph.var_ids() {
                    let ty = graph.concept(v).full();
                    if !config.entity_types.contains(ty) {
                        continue;
                    }
                    for a in graph.attributes().iter().filter(|a| a.source == v) {
                        if a.role == "wiki" {
                            continue;
                        }
                        let seen = index
                            .entity_values
                            .contains(&(ty.to_string(), a.value.to_string()));
                        if seen == want_seen {
                            push(
                                MetricSpec::main(MetricKind::EntityValueRecall {
                                    value: a.value.clone(),
                                }),
                                category,
                                format!("entity type {ty}"),
                            );
                        }
                    }
                }
            }
            "ne_types_seen" | "ne_types_unseen" => {
                let want_seen = category == "ne_types_seen";
                for r in graph.relations() {
                    if r.role != "name" || graph.concept(r.target).full() != "name" {
                        continue;
                    }
                    let seq = op_sequence(&graph, r.target);
                    if seq.is_empty() {
                        continue;
                    }
                    let ty = graph.concept(r.source).full().to_string();
                    let keep = if want_seen {
                        index.ne_type_pairs.contains(&(ty.clone(), seq.clone()))
                    } else {
                        !index.name_sequences.contains(&seq)
                    };
                    if keep {
                        push(
                            MetricSpec::main(MetricKind::NeTypeRecall {
                                type_label: ConceptLabel::parse(&ty),
                                name_sequence: seq,
                            }),
                            category,
                            String::new(),
                        );
                    }
                }
            }
            "wiki_easy" | "wiki_hard" => {
                let want_easy = category == "wiki_easy";
                for a in graph.attributes() {
                    if a.role != "wiki" || a.value.text == "-" {
                        continue;
                    }
                    let seen = index.wiki_values.contains(&a.value.text);
                    // "Easy" also covers links that are just the name
                    // joined with underscores.
                    let name_join = graph
                        .relations()
                        .iter()
                        .find(|r| {
                            r.source == a.source
                                && r.role == "name"
                                && graph.concept(r.target).full() == "name"
                        })
                        .map(|r| op_sequence(&graph, r.target).join("_"));
                    let joined = name_join.as_deref() == Some(a.value.text.as_str());
                    if (seen || joined) == want_easy {
                        push(
                            MetricSpec::main(MetricKind::WikiRecall { value: a.value.clone() }),
                            category,
                            if joined { "underscore join".into() } else { String::new() },
                        );
                    }
                }
            }
            "reentrancy_candidates" => {
                for v in graph.reentrant_vars() {
                    let mut parents: Vec<(VarId, String)> = graph
                        .relations()
                        .iter()
                        .filter(|r| r.target == v)
                        .map(|r| (r.source, r.role.clone()))
                        .collect();
                    // Declaration order approximates serialization order:
                    // the earliest-declared parent introduces the subgraph.
                    parents.sort_by_key(|(p, _)| p.0);
                    let node_label = graph.concept(v).full().to_string();
                    let far = parents.first().cloned().expect("reentrant has parents");
                    let near = parents.last().cloned().expect("reentrant has parents");
                    push(
                        edge_spec(graph.concept(far.0).full(), &far.1, &node_label, false),
                        category,
                        "far parent proposal (introduces the subgraph); verify by hand".into(),
                    );
                    push(
                        edge_spec(graph.concept(near.0).full(), &near.1, &node_label, false),
                        category,
                        "near parent proposal (near in the sentence); verify by hand".into(),
                    );
                }
            }
            "no_arg0_predicates" => {
                for v in graph.var_ids() {
                    let concept = graph.concept(v);
                    if concept.sense().is_none() {
                        continue;
                    }
                    let has_arg0 = graph
                        .relations()
                        .iter()
                        .any(|r| r.source == v && r.role == "ARG0");
                    if has_arg0 {
                        continue;
                    }
                    let Some(arg1) = graph
                        .relations()
                        .iter()
                        .find(|r| r.source == v && r.role == "ARG1")
                    else {
                        continue;
                    };
                    let tgt = graph.concept(arg1.target).full();
                    match config
                        .frames
                        .as_ref()
                        .and_then(|f| f.get(concept.full()).copied())
                    {
                        Some(true) => push(
                            edge_spec(concept.full(), "ARG1", tgt, true),
                            "passives",
                            "frame has an ARG0".into(),
                        ),
                        Some(false) => push(
                            edge_spec(concept.full(), "ARG1", tgt, true),
                            "unaccusatives",
                            "frame has no ARG0".into(),
                        ),
                        None => push(
                            edge_spec(concept.full(), "ARG1", tgt, true),
                            "no_arg0_pool",
                            "sort into passives/unaccusatives by hand".into(),
                        ),
                    }
                }
            }
            "imperatives" => {
                for a in graph.attributes() {
                    if a.role != "mode" || a.value.text != "imperative" {
                        continue;
                    }
                    let pred = graph.concept(a.source).full().to_string();
                    let subject = graph
                        .relations()
                        .iter()
                        .find(|r| r.source == a.source && r.role == "ARG0")
                        .map(|r| graph.concept(r.target).full().to_string());
                    let (subj, note) = match subject {
                        Some(s) if s == "you" || s == "we" => (s, String::new()),
                        Some(s) => (s, "non-standard subject; review".to_string()),
                        None => ("you".to_string(), "no overt subject in gold; verify".to_string()),
                    };
                    push(
                        MetricSpec::main(MetricKind::ImperativeRecall {
                            predicate: ConceptLabel::parse(&pred),
                            subject: ConceptLabel::parse(&subj),
                        }),
                        category,
                        note,
                    );
                }
            }
            _ => unreachable!("category membership checked above"),
        }
    }
    Ok(out)
}

/// Review sheet: the annotation columns plus status and note.
pub fn write_candidates(records: &[CandidateRecord]) -> Result<String, PipelineError> {
    let mut out = String::new();
    for record in records {
        let (payload, fragments) = spec_payload(&record.spec);
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            record.entry_id,
            record.category_id,
            record.spec.role.token(),
            kind_token(&record.spec.kind),
            payload,
            record.status.token(),
            record.note
        ));
        for frag in fragments {
            out.push('\t');
            out.push_str(&crate::graph::serialize_penman(frag)?);
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn parse_candidates(
    text: &str,
    reifications: &ReificationTable,
) -> Result<Vec<CandidateRecord>, PipelineError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut records = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let line = lines[i];
        i += 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 6 {
            return Err(PipelineError::BadSheet {
                line: i,
                message: format!("expected at least 6 fields, got {}", fields.len()),
            });
        }
        let role = Role::from_token(fields[2]).ok_or_else(|| PipelineError::BadSheet {
            line: i,
            message: format!("unknown role {:?}", fields[2]),
        })?;
        let status = CandidateStatus::from_token(fields[5]).ok_or_else(|| {
            PipelineError::BadSheet {
                line: i,
                message: format!("unknown status {:?}", fields[5]),
            }
        })?;
        let note = fields.get(6).copied().unwrap_or("").to_string();
        let row_line = i;
        let fragments = collect_fragments(&lines, &mut i, fields[3])?;
        let (kind, sense_sensitive, min_occurrences) =
            spec_from_parts(fields[3], fields[4], fragments, row_line, reifications)?;
        records.push(CandidateRecord {
            entry_id: fields[0].to_string(),
            category_id: fields[1].to_string(),
            spec: MetricSpec {
                kind,
                role,
                sense_sensitive,
                min_occurrences,
            },
            status,
            note,
        });
    }
    Ok(records)
}

/// Converts reviewed candidates into annotation rows, adding the
/// prerequisite row each category's metric is paired with. Only accepted
/// candidates are converted unless `include_all` is set.
pub fn candidates_to_annotations(
    records: &[CandidateRecord],
    include_all: bool,
) -> Vec<AnnotationRow> {
    let mut rows = Vec::new();
    for record in records {
        if !include_all && record.status != CandidateStatus::Accepted {
            continue;
        }
        rows.push(AnnotationRow {
            entry_id: record.entry_id.clone(),
            category_id: record.category_id.clone(),
            spec: record.spec.clone(),
        });
        if let Some(prereq) = prereq_for(record) {
            rows.push(AnnotationRow {
                entry_id: record.entry_id.clone(),
                category_id: record.category_id.clone(),
                spec: prereq,
            });
        }
    }
    rows
}

/// The companion prerequisite of a candidate's main check, where the
/// category defines one.
fn prereq_for(record: &CandidateRecord) -> Option<MetricSpec> {
    let spec = &record.spec;
    if spec.role != Role::Main {
        return None;
    }
    match (&spec.kind, record.category_id.as_str()) {
        // Sense categories pair with the senseless label.
        (MetricKind::NodeLabelRecall { .. }, "frequent_senses" | "rare_senses" | "unseen_senses") => {
            Some(MetricSpec {
                sense_sensitive: false,
                role: Role::Prerequisite,
                ..spec.clone()
            })
        }
        // Ellipsis pairs two occurrences with one.
        (MetricKind::NodeLabelRecall { .. }, "ellipsis") => Some(MetricSpec {
            min_occurrences: 1,
            role: Role::Prerequisite,
            ..spec.clone()
        }),
        // Edge metrics pair with endpoints-present.
        (MetricKind::EdgeRecall { .. }, _) => Some(MetricSpec {
            role: Role::Prerequisite,
            ..spec.clone()
        }),
        (MetricKind::ImperativeRecall { .. }, _) => Some(MetricSpec {
            role: Role::Prerequisite,
            ..spec.clone()
        }),
        (MetricKind::NeTypeRecall { .. }, _) => Some(MetricSpec {
            role: Role::Prerequisite,
            ..spec.clone()
        }),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::read_corpus;
    use crate::pipeline::build_index;

    fn toy() -> (Vec<CorpusEntry>, FrequencyIndex) {
        // Training: centrifuge x3 (rare), run-01 x40, run-02 x35, house x40.
        let mut text = String::new();
        for i in 0..3 {
            text.push_str(&format!("# ::id t{i}\n(c / centrifuge)\n\n"));
        }
        for i in 0..40 {
            text.push_str(&format!("# ::id r{i}\n(r / run-01 :ARG0 (h / house))\n\n"));
        }
        for i in 0..35 {
            text.push_str(&format!("# ::id s{i}\n(r / run-02)\n\n"));
        }
        text.push_str("# ::id names\n(c2 / city :wiki \"Los_Angeles\" :name (n / name :op1 \"Los\" :op2 \"Angeles\"))\n");
        let training = read_corpus(&text).unwrap();
        let index = build_index(&training, &crate::pipeline::default_entity_types()).unwrap();
        (training, index)
    }

    #[test]
    fn band_thresholds() {
        assert_eq!(band(0), Band::Unseen);
        assert_eq!(band(1), Band::Rare);
        assert_eq!(band(5), Band::Rare);
        assert_eq!(band(6), Band::Mid);
        assert_eq!(band(29), Band::Mid);
        assert_eq!(band(30), Band::Frequent);
    }

    #[test]
    fn rare_and_unseen_node_extraction() {
        let (_, index) = toy();
        let test = read_corpus(
            "# ::id x1\n# ::snt A gown near the centrifuge.\n(g / gown :location (c / centrifuge))\n",
        )
        .unwrap();
        let config = ExtractConfig::default();
        let rare = extract_category(&test, &index, "rare_node_labels", &config).unwrap();
        assert_eq!(rare.len(), 1);
        assert!(matches!(
            &rare[0].spec.kind,
            MetricKind::NodeLabelRecall { label } if label.full() == "centrifuge"
        ));
        let unseen = extract_category(&test, &index, "unseen_node_labels", &config).unwrap();
        assert_eq!(unseen.len(), 1);
        assert!(matches!(
            &unseen[0].spec.kind,
            MetricKind::NodeLabelRecall { label } if label.full() == "gown"
        ));
    }

    #[test]
    fn frequent_sense_extraction_needs_competition() {
        let (_, index) = toy();
        let test = read_corpus("# ::id x\n(r / run-02 :ARG0 (h / house))\n").unwrap();
        let config = ExtractConfig::default();
        let frequent = extract_category(&test, &index, "frequent_senses", &config).unwrap();
        assert_eq!(frequent.len(), 1, "run-02 has 35 own and 40 competing");
        // house is frequent but not sensed; run-01 not in this entry.
    }

    #[test]
    fn wiki_easy_by_underscore_join() {
        let (_, index) = toy();
        let test = read_corpus(
            "# ::id w1\n(c / country :wiki \"North_Korea\" :name (n / name :op1 \"North\" :op2 \"Korea\"))\n\n\
             # ::id w2\n(o / criminal-organization :wiki \"Triad_(organized_crime)\" :name (n2 / name :op1 \"Triad\"))\n",
        )
        .unwrap();
        let config = ExtractConfig::default();
        let easy = extract_category(&test, &index, "wiki_easy", &config).unwrap();
        assert_eq!(easy.len(), 1);
        assert_eq!(easy[0].entry_id, "w1");
        let hard = extract_category(&test, &index, "wiki_hard", &config).unwrap();
        assert_eq!(hard.len(), 1);
        assert_eq!(hard[0].entry_id, "w2");
    }

    #[test]
    fn reentrancy_candidates_have_near_and_far() {
        let (_, index) = toy();
        let test = read_corpus(
            "# ::id f1\n(a / and :op1 (r / run-02 :ARG0 (m / mechanic) :destination (c / centrifuge)) :op2 (t / turn-off-07 :ARG0 m :ARG1 c))\n",
        )
        .unwrap();
        let config = ExtractConfig::default();
        let cands = extract_category(&test, &index, "reentrancy_candidates", &config).unwrap();
        // Two reentrant nodes (mechanic, centrifuge), two rows each.
        assert_eq!(cands.len(), 4);
        assert!(cands.iter().all(|c| c.status == CandidateStatus::Unreviewed));
        assert!(cands.iter().any(|c| c.note.contains("far")));
    }

    #[test]
    fn sheet_round_trip_and_conversion() {
        let (_, index) = toy();
        let test = read_corpus(
            "# ::id x1\n(g / gown :location (c / centrifuge))\n\n# ::id i1\n(g2 / go-02 :mode imperative :ARG0 (y / you))\n",
        )
        .unwrap();
        let config = ExtractConfig::default();
        let mut records = extract_category(&test, &index, "rare_node_labels", &config).unwrap();
        records.extend(extract_category(&test, &index, "imperatives", &config).unwrap());
        let sheet = write_candidates(&records).unwrap();
        let table = ReificationTable::default();
        let parsed = parse_candidates(&sheet, &table).unwrap();
        assert_eq!(parsed.len(), records.len());
        assert_eq!(write_candidates(&parsed).unwrap(), sheet);

        // Unreviewed rows are dropped unless include_all is set.
        assert!(candidates_to_annotations(&parsed, false).is_empty());
        let rows = candidates_to_annotations(&parsed, true);
        // node row without prereq + imperative row with prereq.
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().any(|r| r.spec.role == Role::Prerequisite));
    }

    #[test]
    fn unknown_category_is_error() {
        let (_, index) = toy();
        assert!(matches!(
            extract_category(&[], &index, "nope", &ExtractConfig::default()),
            Err(PipelineError::UnknownCategory(_))
        ));
    }
}
