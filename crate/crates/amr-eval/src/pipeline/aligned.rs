//! Alignment-driven extraction for ellipsis and multinode word meanings.
//! Alignments are consumed as input files (one record per line:
//! entry_id, token start, token end, semicolon-joined variable names).

use std::collections::BTreeMap;

use log::warn;

use super::extract::{CandidateRecord, CandidateStatus};
use super::PipelineError;
use crate::graph::{CorpusEntry, GraphBuilder, NormalizeConfig, VarId};
use crate::metrics::{MetricKind, MetricSpec, Role};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentRecord {
    pub entry_id: String,
    pub token_start: usize,
    pub token_end: usize,
    pub variables: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignedMode {
    /// One word aligned to two or more nodes with the same label.
    Ellipsis,
    /// One word aligned to two or more nodes with different labels.
    Multinode,
}

pub fn parse_alignments(text: &str) -> Result<Vec<AlignmentRecord>, PipelineError> {
    let mut records = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(PipelineError::BadAlignment {
                line: no + 1,
                message: format!("expected 4 tab-separated fields, got {}", fields.len()),
            });
        }
        let parse_pos = |s: &str| {
            s.parse::<usize>().map_err(|_| PipelineError::BadAlignment {
                line: no + 1,
                message: format!("bad token position {s:?}"),
            })
        };
        records.push(AlignmentRecord {
            entry_id: fields[0].to_string(),
            token_start: parse_pos(fields[1])?,
            token_end: parse_pos(fields[2])?,
            variables: fields[3]
                .split(';')
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect(),
        });
    }
    Ok(records)
}

/// Extracts ellipsis or multinode candidates from alignment records.
/// Referencing an unknown entry or variable is an error.
pub fn extract_aligned(
    test: &[CorpusEntry],
    alignments: &[AlignmentRecord],
    mode: AlignedMode,
) -> Result<Vec<CandidateRecord>, PipelineError> {
    let norm = NormalizeConfig::default();
    let by_id: BTreeMap<&str, &CorpusEntry> =
        test.iter().map(|e| (e.id.as_str(), e)).collect();
    let mut out = Vec::new();
    for record in alignments {
        let entry = by_id
            .get(record.entry_id.as_str())
            .ok_or_else(|| PipelineError::UnknownEntry(record.entry_id.clone()))?;
        let graph = entry
            .graph
            .as_ref()
            .ok_or_else(|| PipelineError::MissingGraph(entry.id.clone()))?;
        let graph = norm.normalize(graph);
        let mut vars = Vec::new();
        for name in &record.variables {
            let v = graph
                .var_by_name(name)
                .ok_or_else(|| PipelineError::UnknownVariable {
                    entry: entry.id.clone(),
                    variable: name.clone(),
                })?;
            vars.push(v);
        }
        if vars.len() < 2 {
            continue;
        }
        let note = format!("tokens {}..{}", record.token_start, record.token_end);
        match mode {
            AlignedMode::Ellipsis => {
                let mut by_label: BTreeMap<&str, usize> = BTreeMap::new();
                for &v in &vars {
                    *by_label.entry(graph.concept(v).full()).or_insert(0) += 1;
                }
                for (label, count) in by_label {
                    if count >= 2 {
                        out.push(CandidateRecord {
                            entry_id: entry.id.clone(),
                            category_id: "ellipsis".to_string(),
                            spec: MetricSpec {
                                kind: MetricKind::NodeLabelRecall {
                                    label: crate::graph::ConceptLabel::parse(label),
                                },
                                role: Role::Main,
                                sense_sensitive: true,
                                min_occurrences: 2,
                            },
                            status: CandidateStatus::Unreviewed,
                            note: note.clone(),
                        });
                    }
                }
            }
            AlignedMode::Multinode => {
                let labels: std::collections::BTreeSet<&str> =
                    vars.iter().map(|&v| graph.concept(v).full()).collect();
                if labels.len() < 2 {
                    continue;
                }
                match induced_fragment(&graph, &vars) {
                    Some(fragment) => out.push(CandidateRecord {
                        entry_id: entry.id.clone(),
                        category_id: "multinode_word_meanings".to_string(),
                        spec: MetricSpec::main(MetricKind::SubgraphRecall { fragment }),
                        status: CandidateStatus::Unreviewed,
                        note: note.clone(),
                    }),
                    None => {
                        warn!(
                            "alignment at {} in {} induces a disconnected fragment; skipped",
                            note, entry.id
                        );
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The subgraph induced by the aligned variables: their mutual relations
/// and attributes, rooted at a variable with no incoming edge inside the
/// set. Returns `None` when the induced fragment is disconnected.
fn induced_fragment(graph: &crate::graph::AmrGraph, vars: &[VarId]) -> Option<crate::graph::AmrGraph> {
    let set: std::collections::BTreeSet<VarId> = vars.iter().copied().collect();
    let root = vars
        .iter()
        .copied()
        .find(|v| {
            !graph
                .relations()
                .iter()
                .any(|r| r.target == *v && set.contains(&r.source))
        })
        .unwrap_or(vars[0]);
    let mut builder = GraphBuilder::new();
    let mut map = BTreeMap::new();
    for &v in vars {
        let nv = builder
            .add_instance(graph.var_name(v), graph.concept(v).clone())
            .ok()?;
        map.insert(v, nv);
    }
    for r in graph.relations() {
        if set.contains(&r.source) && set.contains(&r.target) {
            builder.add_relation(map[&r.source], &r.role, map[&r.target]).ok()?;
        }
    }
    for a in graph.attributes() {
        if set.contains(&a.source) {
            builder.add_attribute(map[&a.source], &a.role, a.value.clone()).ok()?;
        }
    }
    builder.set_root(map[&root]);
    builder.finish().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::read_corpus;

    fn corpus() -> Vec<CorpusEntry> {
        read_corpus(
            "# ::id m1\n# ::snt The teacher left.\n(l / leave-01 :ARG0 (p / person :ARG0-of (t / teach-01)))\n\n\
             # ::id e1\n# ::snt Mary wrote a paper and Susan did too.\n(a / and :op1 (w / write-01) :op2 (w2 / write-01))\n",
        )
        .unwrap()
    }

    #[test]
    fn multinode_extraction_builds_the_fragment() {
        let records = parse_alignments("m1\t1\t1\tp;t\n").unwrap();
        let cands = extract_aligned(&corpus(), &records, AlignedMode::Multinode).unwrap();
        assert_eq!(cands.len(), 1);
        match &cands[0].spec.kind {
            MetricKind::SubgraphRecall { fragment } => {
                assert_eq!(fragment.len(), 2);
                let r = &fragment.relations()[0];
                assert_eq!(r.role, "ARG0");
                assert_eq!(fragment.concept(r.source).full(), "teach-01");
                assert_eq!(fragment.concept(r.target).full(), "person");
            }
            other => panic!("expected a subgraph check, got {other:?}"),
        }
    }

    #[test]
    fn ellipsis_extraction_uses_min_two() {
        let records = parse_alignments("e1\t1\t1\tw;w2\n").unwrap();
        let cands = extract_aligned(&corpus(), &records, AlignedMode::Ellipsis).unwrap();
        assert_eq!(cands.len(), 1);
        assert_eq!(cands[0].spec.min_occurrences, 2);
        assert!(matches!(
            &cands[0].spec.kind,
            MetricKind::NodeLabelRecall { label } if label.full() == "write-01"
        ));
    }

    #[test]
    fn unknown_variable_is_error() {
        let records = parse_alignments("m1\t1\t1\tp;zz\n").unwrap();
        assert!(matches!(
            extract_aligned(&corpus(), &records, AlignedMode::Multinode),
            Err(PipelineError::UnknownVariable { .. })
        ));
        let records = parse_alignments("nope\t1\t1\tp;t\n").unwrap();
        assert!(matches!(
            extract_aligned(&corpus(), &records, AlignedMode::Multinode),
            Err(PipelineError::UnknownEntry(_))
        ));
    }
}
