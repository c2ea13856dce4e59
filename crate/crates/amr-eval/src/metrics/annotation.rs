//! The tab-separated category annotation format.
//!
//! One row per check: `entry_id<TAB>category_id<TAB>role<TAB>kind<TAB>payload`.
//! Kinds carrying a graph fragment (`exact_match`, `subgraph`,
//! `conjunct_recall`, `conjunct_precision`, `unseen_opi`) leave the payload
//! cell empty (or hold their scalar part) and put each Penman fragment on
//! its own following line, indented with a tab.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use super::{CategoryInstance, MetricError, MetricKind, MetricSpec, ReificationTable, Role};
use crate::graph::{
    parse_penman, serialize_penman, AmrGraph, ConceptLabel, ConstantValue, NormalizeConfig,
};

#[derive(Debug, Clone)]
pub struct AnnotationRow {
    pub entry_id: String,
    pub category_id: String,
    pub spec: MetricSpec,
}

pub(crate) fn kind_token(kind: &MetricKind) -> &'static str {
    match kind {
        MetricKind::NodeLabelRecall { .. } => "node",
        MetricKind::EdgeRecall { .. } => "edge",
        MetricKind::ExactMatch { .. } => "exact_match",
        MetricKind::SubgraphRecall { .. } => "subgraph",
        MetricKind::NameSequenceRecall { .. } => "name_sequence",
        MetricKind::DateAttributeRecall { .. } => "date",
        MetricKind::EntityValueRecall { .. } => "entity_value",
        MetricKind::WikiRecall { .. } => "wiki",
        MetricKind::NeTypeRecall { .. } => "ne_type",
        MetricKind::ConjunctRecall { .. } => "conjunct_recall",
        MetricKind::ConjunctPrecision { .. } => "conjunct_precision",
        MetricKind::UnseenOpiRecall { .. } => "unseen_opi",
        MetricKind::ImperativeRecall { .. } => "imperative",
    }
}

fn parse_value(token: &str) -> ConstantValue {
    if token.len() >= 2 && token.starts_with('"') && token.ends_with('"') {
        ConstantValue::string(token[1..token.len() - 1].to_string())
    } else {
        ConstantValue::symbol_or_number(token)
    }
}

/// Serializes a spec into its payload cell plus trailing fragment lines.
pub(crate) fn spec_payload(spec: &MetricSpec) -> (String, Vec<&AmrGraph>) {
    let mut payload = String::new();
    let mut fragments: Vec<&AmrGraph> = Vec::new();
    match &spec.kind {
        MetricKind::NodeLabelRecall { label } => {
            payload.push_str(label.full());
            if !spec.sense_sensitive {
                payload.push_str("|nosense");
            }
            if spec.min_occurrences > 1 {
                payload.push_str(&format!("|min={}", spec.min_occurrences));
            }
        }
        MetricKind::EdgeRecall { source, role, target, reifications } => {
            payload.push_str(&format!("{}|{}|{}", source.full(), role, target.full()));
            if !reifications.is_empty() {
                let names: Vec<&str> = reifications.iter().map(|r| r.label.full()).collect();
                payload.push('|');
                payload.push_str(&names.join(";"));
            }
            if !spec.sense_sensitive {
                payload.push_str("|nosense");
            }
        }
        MetricKind::ExactMatch { gold } => fragments.push(gold),
        MetricKind::SubgraphRecall { fragment } => {
            if !spec.sense_sensitive {
                payload.push_str("nosense");
            }
            fragments.push(fragment);
        }
        MetricKind::NameSequenceRecall { sequence } => {
            payload.push_str(&sequence.join(";"));
        }
        MetricKind::DateAttributeRecall { attrs } => {
            let parts: Vec<String> = attrs.iter().map(|(r, v)| format!("{r}={v}")).collect();
            payload.push_str(&parts.join(";"));
        }
        MetricKind::EntityValueRecall { value } => payload.push_str(&value.to_string()),
        MetricKind::WikiRecall { value } => payload.push_str(&value.to_string()),
        MetricKind::NeTypeRecall { type_label, name_sequence } => {
            payload.push_str(&format!("{}|{}", type_label.full(), name_sequence.join(";")));
        }
        MetricKind::ConjunctRecall { conjuncts } | MetricKind::ConjunctPrecision { conjuncts } => {
            fragments.extend(conjuncts.iter());
        }
        MetricKind::UnseenOpiRecall { index, conjunct } => {
            payload.push_str(&format!("op={index}"));
            fragments.push(conjunct);
        }
        MetricKind::ImperativeRecall { predicate, subject } => {
            payload.push_str(&format!("{}|{}", predicate.full(), subject.full()));
        }
    }
    (payload, fragments)
}

/// Rebuilds a spec from its kind token, payload cell and fragment lines.
/// Returns the kind plus the sense flag and minimum-occurrence count the
/// payload encodes.
pub(crate) fn spec_from_parts(
    kind_tok: &str,
    payload: &str,
    mut fragments: Vec<AmrGraph>,
    line: usize,
    reifications: &ReificationTable,
) -> Result<(MetricKind, bool, usize), MetricError> {
    let malformed = |message: String| MetricError::MalformedPayload {
        kind: kind_tok.to_string(),
        line,
        message,
    };
    let mut sense_sensitive = true;
    let mut min_occurrences = 1usize;
    let kind = match kind_tok {
        "node" => {
            let mut parts = payload.split('|');
            let label = parts
                .next()
                .filter(|s| !s.is_empty())
                .ok_or_else(|| malformed("node payload needs a label".into()))?;
            for extra in parts {
                if extra == "nosense" {
                    sense_sensitive = false;
                } else if let Some(m) = extra.strip_prefix("min=") {
                    min_occurrences = m
                        .parse()
                        .map_err(|_| malformed(format!("bad min count {m:?}")))?;
                } else {
                    return Err(malformed(format!("unknown node flag {extra:?}")));
                }
            }
            MetricKind::NodeLabelRecall {
                label: ConceptLabel::parse(label),
            }
        }
        "edge" => {
            let parts: Vec<&str> = payload.split('|').collect();
            if parts.len() < 3 {
                return Err(malformed(
                    "edge payload is src|role|tgt[|reifs][|nosense]".into(),
                ));
            }
            let mut reifs = Vec::new();
            for extra in &parts[3..] {
                if *extra == "nosense" {
                    sense_sensitive = false;
                } else {
                    for name in extra.split(';').filter(|s| !s.is_empty()) {
                        let reif = reifications
                            .by_label(name)
                            .ok_or_else(|| MetricError::UnknownReification(name.to_string()))?;
                        reifs.push(reif.clone());
                    }
                }
            }
            MetricKind::EdgeRecall {
                source: ConceptLabel::parse(parts[0]),
                role: parts[1].to_string(),
                target: ConceptLabel::parse(parts[2]),
                reifications: reifs,
            }
        }
        "exact_match" => {
            if fragments.len() != 1 {
                return Err(malformed(format!(
                    "exact_match expects 1 fragment line, got {}",
                    fragments.len()
                )));
            }
            MetricKind::ExactMatch {
                gold: fragments.remove(0),
            }
        }
        "subgraph" => {
            if payload == "nosense" {
                sense_sensitive = false;
            } else if !payload.is_empty() {
                return Err(malformed(format!("unknown subgraph flag {payload:?}")));
            }
            if fragments.len() != 1 {
                return Err(malformed(format!(
                    "subgraph expects 1 fragment line, got {}",
                    fragments.len()
                )));
            }
            MetricKind::SubgraphRecall {
                fragment: fragments.remove(0),
            }
        }
        "name_sequence" => MetricKind::NameSequenceRecall {
            sequence: payload
                .split(';')
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect(),
        },
        "date" => {
            let mut attrs = BTreeSet::new();
            for pair in payload.split(';').filter(|s| !s.is_empty()) {
                let (role, value) = pair
                    .split_once('=')
                    .ok_or_else(|| malformed(format!("bad date pair {pair:?}")))?;
                attrs.insert((role.to_string(), value.to_string()));
            }
            if attrs.is_empty() {
                return Err(malformed("date payload needs role=value pairs".into()));
            }
            MetricKind::DateAttributeRecall { attrs }
        }
        "entity_value" => MetricKind::EntityValueRecall {
            value: parse_value(payload),
        },
        "wiki" => MetricKind::WikiRecall {
            value: parse_value(payload),
        },
        "ne_type" => {
            let (ty, seq) = payload
                .split_once('|')
                .ok_or_else(|| malformed("ne_type payload is type|tok1;tok2".into()))?;
            MetricKind::NeTypeRecall {
                type_label: ConceptLabel::parse(ty),
                name_sequence: seq
                    .split(';')
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect(),
            }
        }
        "conjunct_recall" => {
            if fragments.is_empty() {
                return Err(malformed("conjunct_recall expects fragment lines".into()));
            }
            MetricKind::ConjunctRecall {
                conjuncts: fragments,
            }
        }
        "conjunct_precision" => {
            if fragments.is_empty() {
                return Err(malformed("conjunct_precision expects fragment lines".into()));
            }
            MetricKind::ConjunctPrecision {
                conjuncts: fragments,
            }
        }
        "unseen_opi" => {
            let index: usize = payload
                .strip_prefix("op=")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| malformed("unseen_opi payload is op=<index>".into()))?;
            if index < 20 {
                return Err(malformed(format!(
                    "unseen opi index must be >= 20, got {index}"
                )));
            }
            if fragments.len() != 1 {
                return Err(malformed("unseen_opi expects 1 fragment line".into()));
            }
            MetricKind::UnseenOpiRecall {
                index,
                conjunct: fragments.remove(0),
            }
        }
        "imperative" => {
            let (pred, subj) = payload
                .split_once('|')
                .ok_or_else(|| malformed("imperative payload is pred|subject".into()))?;
            MetricKind::ImperativeRecall {
                predicate: ConceptLabel::parse(pred),
                subject: ConceptLabel::parse(subj),
            }
        }
        other => {
            return Err(MetricError::BadAnnotation {
                line,
                message: format!("unknown kind {other:?}"),
            });
        }
    };
    Ok((kind, sense_sensitive, min_occurrences))
}

/// Collects following tab-indented fragment lines, advancing the cursor.
pub(crate) fn collect_fragments(
    lines: &[&str],
    i: &mut usize,
    kind_tok: &str,
) -> Result<Vec<AmrGraph>, MetricError> {
    let norm = NormalizeConfig::default();
    let mut fragments = Vec::new();
    while *i < lines.len() && lines[*i].starts_with('\t') {
        let frag = parse_penman(lines[*i].trim()).map_err(|e| MetricError::MalformedPayload {
            kind: kind_tok.to_string(),
            line: *i + 1,
            message: e.to_string(),
        })?;
        fragments.push(norm.normalize(&frag));
        *i += 1;
    }
    Ok(fragments)
}

pub fn write_annotations(rows: &[AnnotationRow]) -> Result<String, MetricError> {
    let mut out = String::new();
    for row in rows {
        let (payload, fragments) = spec_payload(&row.spec);
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            row.entry_id,
            row.category_id,
            row.spec.role.token(),
            kind_token(&row.spec.kind),
            payload
        ));
        for frag in fragments {
            out.push('\t');
            out.push_str(&serialize_penman(frag)?);
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn parse_annotations(
    text: &str,
    reifications: &ReificationTable,
) -> Result<Vec<AnnotationRow>, MetricError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut rows = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let line = lines[i];
        i += 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('\t') {
            return Err(MetricError::BadAnnotation {
                line: i,
                message: "unexpected fragment line without a preceding row".into(),
            });
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 4 {
            return Err(MetricError::BadAnnotation {
                line: i,
                message: format!(
                    "expected at least 4 tab-separated fields, got {}",
                    fields.len()
                ),
            });
        }
        let (entry_id, category_id, role_tok, kind_tok) =
            (fields[0], fields[1], fields[2], fields[3]);
        let payload = fields.get(4).copied().unwrap_or("");
        let role = Role::from_token(role_tok).ok_or_else(|| MetricError::BadAnnotation {
            line: i,
            message: format!("unknown role {role_tok:?}"),
        })?;
        let row_line = i;
        let fragments = collect_fragments(&lines, &mut i, kind_tok)?;
        let (kind, sense_sensitive, min_occurrences) =
            spec_from_parts(kind_tok, payload, fragments, row_line, reifications)?;
        rows.push(AnnotationRow {
            entry_id: entry_id.to_string(),
            category_id: category_id.to_string(),
            spec: MetricSpec {
                kind,
                role,
                sense_sensitive,
                min_occurrences,
            },
        });
    }
    Ok(rows)
}

/// Groups rows into per-(entry, category) instances, preserving first-seen
/// order of both instances and checks.
pub fn group_instances(rows: Vec<AnnotationRow>) -> Vec<CategoryInstance> {
    let mut order: Vec<(String, String)> = Vec::new();
    let mut map: BTreeMap<(String, String), Vec<MetricSpec>> = BTreeMap::new();
    for row in rows {
        let key = (row.entry_id.clone(), row.category_id.clone());
        if !map.contains_key(&key) {
            order.push(key.clone());
        }
        map.entry(key).or_default().push(row.spec);
    }
    order
        .into_iter()
        .map(|key| {
            let checks = map.remove(&key).unwrap();
            CategoryInstance {
                entry_id: key.0,
                category_id: key.1,
                checks,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_all_kinds() {
        let table = ReificationTable::default();
        let text = "\
e1\trare_node_labels\tmain\tnode\tcentrifuge
e1\trare_senses\tprereq\tnode\tfill-in-07|nosense
e2\tellipsis\tmain\tnode\tdrive-01|min=2
e3\tpp_attachment\tmain\tedge\ttelescope|poss|journalist|have-03;own-01
e3\tpp_attachment\tprereq\tedge\ttelescope|poss|journalist|nosense
e4\tcp_recursion\tmain\texact_match\t
\t(s / say-01 :ARG0 (l / lawyer) :ARG1 (k / know-01 :ARG0 (y / you)))
e5\tmultinode_word_meanings\tmain\tsubgraph\t
\t(p / person :ARG0-of (t / teach-01))
e6\tseen_names\tmain\tname_sequence\tCapitol;Hill
e7\tseen_dates\tmain\tdate\tmonth=12;day=22;year=2002
e8\tother_seen_entities\tmain\tentity_value\t\"470-5715\"
e9\twiki_easy\tmain\twiki\t\"North_Korea\"
e10\tne_types_seen\tmain\tne_type\tcity|Los;Angeles
e11\tlong_lists\tmain\tconjunct_recall\t
\t(b / book)
\t(g / gasoline)
e11\tlong_lists\tmain\tunseen_opi\top=21
\t(c / coal)
e12\timperatives\tmain\timperative\tgo-02|you
";
        let rows = parse_annotations(text, &table).unwrap();
        assert_eq!(rows.len(), 13);
        let written = write_annotations(&rows).unwrap();
        let reparsed = parse_annotations(&written, &table).unwrap();
        assert_eq!(reparsed.len(), rows.len());
        let rewritten = write_annotations(&reparsed).unwrap();
        assert_eq!(written, rewritten, "write is a fixed point");

        let instances = group_instances(rows);
        assert_eq!(instances.len(), 12);
        assert_eq!(instances[3].checks.len(), 1);
    }

    #[test]
    fn rejects_bad_rows() {
        let table = ReificationTable::default();
        assert!(parse_annotations("e1\tcat\tmain\tnode\t\n", &table).is_err());
        assert!(parse_annotations("e1\tcat\tnope\tnode\tx\n", &table).is_err());
        assert!(parse_annotations("e1\tcat\tmain\tedge\tjust-a-label\n", &table).is_err());
        assert!(
            parse_annotations("e1\tcat\tmain\tunseen_opi\top=3\n\t(c / coal)\n", &table).is_err()
        );
        assert!(parse_annotations("\t(c / coal)\n", &table).is_err());
        assert!(
            parse_annotations("e1\tcat\tmain\tedge\ta|r|b|not-a-reification\n", &table).is_err()
        );
    }
}
