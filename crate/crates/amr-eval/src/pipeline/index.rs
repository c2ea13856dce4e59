//! Training-set frequency index: everything the extraction thresholds
//! consult, built in one corpus pass and reloadable bit-identically.

use std::collections::{BTreeMap, BTreeSet};

use super::PipelineError;
use crate::graph::{AmrGraph, ConceptLabel, CorpusEntry, NormalizeConfig};

pub const ARG_ROLES: [&str; 4] = ["ARG2", "ARG3", "ARG4", "ARG5"];

/// Frequency band relative to the training set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Unseen,
    /// 1-5 occurrences.
    Rare,
    /// 6-29 occurrences.
    Mid,
    /// 30 or more occurrences.
    Frequent,
}

pub fn band(count: u64) -> Band {
    match count {
        0 => Band::Unseen,
        1..=5 => Band::Rare,
        6..=29 => Band::Mid,
        _ => Band::Frequent,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyIndex {
    pub label_counts: BTreeMap<String, u64>,
    pub lemma_sense_counts: BTreeMap<String, BTreeMap<String, u64>>,
    pub predicate_role_counts: BTreeMap<(String, String), u64>,
    pub name_sequences: BTreeSet<Vec<String>>,
    pub date_signatures: BTreeSet<BTreeSet<(String, String)>>,
    pub entity_values: BTreeSet<(String, String)>,
    pub wiki_values: BTreeSet<String>,
    pub ne_type_pairs: BTreeSet<(String, Vec<String>)>,
}

impl FrequencyIndex {
    pub fn label_count(&self, label: &str) -> u64 {
        self.label_counts.get(label).copied().unwrap_or(0)
    }

    /// Total training count of the lemma's senses other than `sense`.
    pub fn competing_sense_count(&self, lemma: &str, sense: &str) -> u64 {
        self.lemma_sense_counts
            .get(lemma)
            .map(|senses| {
                senses
                    .iter()
                    .filter(|(s, _)| s.as_str() != sense)
                    .map(|(_, c)| c)
                    .sum()
            })
            .unwrap_or(0)
    }

    pub fn predicate_role_count(&self, predicate: &str, role: &str) -> u64 {
        self.predicate_role_counts
            .get(&(predicate.to_string(), role.to_string()))
            .copied()
            .unwrap_or(0)
    }
}

/// Ordered `op<i>` attribute values of a node.
pub(crate) fn op_sequence(graph: &AmrGraph, v: crate::graph::VarId) -> Vec<String> {
    let mut ops: Vec<(usize, String)> = graph
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

/// Builds the index from a training corpus. Labels are counted once per
/// occurrence, not per entry.
pub fn build_index(
    training: &[CorpusEntry],
    entity_types: &BTreeSet<String>,
) -> Result<FrequencyIndex, PipelineError> {
    if training.is_empty() {
        return Err(PipelineError::EmptyCorpus);
    }
    let norm = NormalizeConfig::default();
    let mut index = FrequencyIndex::default();
    let name_label = ConceptLabel::parse("name");
    for entry in training {
        let graph = entry
            .graph
            .as_ref()
            .ok_or_else(|| PipelineError::MissingGraph(entry.id.clone()))?;
        let graph = norm.normalize(graph);
        for v in graph.var_ids() {
            let concept = graph.concept(v);
            *index.label_counts.entry(concept.full().to_string()).or_insert(0) += 1;
            if let Some(sense) = concept.sense() {
                *index
                    .lemma_sense_counts
                    .entry(concept.lemma().to_string())
                    .or_default()
                    .entry(sense.to_string())
                    .or_insert(0) += 1;
            }
            if concept.full() == "name" {
                let seq = op_sequence(&graph, v);
                if !seq.is_empty() {
                    index.name_sequences.insert(seq);
                }
            }
            if concept.full() == "date-entity" {
                let sig: BTreeSet<(String, String)> = graph
                    .attributes()
                    .iter()
                    .filter(|a| a.source == v)
                    .map(|a| (a.role.clone(), a.value.text.clone()))
                    .collect();
                if !sig.is_empty() {
                    index.date_signatures.insert(sig);
                }
            }
            if entity_types.contains(concept.full()) {
                for a in graph.attributes().iter().filter(|a| a.source == v) {
                    if a.role != "wiki" {
                        index
                            .entity_values
                            .insert((concept.full().to_string(), a.value.to_string()));
                    }
                }
            }
        }
        for r in graph.relations() {
            let source = graph.concept(r.source);
            if ARG_ROLES.contains(&r.role.as_str()) && source.sense().is_some() {
                *index
                    .predicate_role_counts
                    .entry((source.full().to_string(), r.role.clone()))
                    .or_insert(0) += 1;
            }
            if r.role == "name" && graph.concept(r.target).matches(&name_label, true) {
                let seq = op_sequence(&graph, r.target);
                if !seq.is_empty() {
                    index
                        .ne_type_pairs
                        .insert((graph.concept(r.source).full().to_string(), seq));
                }
            }
        }
        for a in graph.attributes() {
            if a.role == "wiki" {
                index.wiki_values.insert(a.value.text.clone());
            }
        }
    }
    Ok(index)
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\")
        .replace('\t', "\\t")
        .replace('\n', "\\n")
        .replace(';', "\\;")
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('t') => out.push('\t'),
                Some('n') => out.push('\n'),
                Some(';') => out.push(';'),
                Some(other) => out.push(other),
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn join_seq(seq: &[String]) -> String {
    seq.iter().map(|s| escape(s)).collect::<Vec<_>>().join(";")
}

fn split_seq(s: &str) -> Vec<String> {
    // Split on unescaped semicolons.
    let mut parts = Vec::new();
    let mut cur = String::new();
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                cur.push(c);
                if let Some(n) = chars.next() {
                    cur.push(n);
                }
            }
            ';' => parts.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    if !cur.is_empty() || !parts.is_empty() {
        parts.push(cur);
    }
    parts.into_iter().map(|p| unescape(&p)).collect()
}

/// Serializes the index as sorted tab-separated sections; `load_index`
/// reproduces it bit-identically.
pub fn save_index(index: &FrequencyIndex) -> String {
    let mut out = String::new();
    out.push_str("[label_counts]\n");
    for (label, count) in &index.label_counts {
        out.push_str(&format!("{}\t{}\n", escape(label), count));
    }
    out.push_str("[lemma_sense_counts]\n");
    for (lemma, senses) in &index.lemma_sense_counts {
        for (sense, count) in senses {
            out.push_str(&format!("{}\t{}\t{}\n", escape(lemma), sense, count));
        }
    }
    out.push_str("[predicate_role_counts]\n");
    for ((pred, role), count) in &index.predicate_role_counts {
        out.push_str(&format!("{}\t{}\t{}\n", escape(pred), role, count));
    }
    out.push_str("[name_sequences]\n");
    for seq in &index.name_sequences {
        out.push_str(&format!("{}\n", join_seq(seq)));
    }
    out.push_str("[date_signatures]\n");
    for sig in &index.date_signatures {
        let parts: Vec<String> = sig
            .iter()
            .map(|(r, v)| format!("{}={}", escape(r), escape(v)))
            .collect();
        out.push_str(&format!("{}\n", parts.join(";")));
    }
    out.push_str("[entity_values]\n");
    for (ty, value) in &index.entity_values {
        out.push_str(&format!("{}\t{}\n", escape(ty), escape(value)));
    }
    out.push_str("[wiki_values]\n");
    for value in &index.wiki_values {
        out.push_str(&format!("{}\n", escape(value)));
    }
    out.push_str("[ne_type_pairs]\n");
    for (ty, seq) in &index.ne_type_pairs {
        out.push_str(&format!("{}\t{}\n", escape(ty), join_seq(seq)));
    }
    out
}

pub fn load_index(text: &str) -> Result<FrequencyIndex, PipelineError> {
    let mut index = FrequencyIndex::default();
    let mut section = String::new();
    for (no, line) in text.lines().enumerate() {
        let bad = |msg: &str| PipelineError::BadIndex {
            line: no + 1,
            message: msg.to_string(),
        };
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            section = line[1..line.len() - 1].to_string();
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        match section.as_str() {
            "label_counts" => {
                if fields.len() != 2 {
                    return Err(bad("label_counts rows are label<TAB>count"));
                }
                index.label_counts.insert(
                    unescape(fields[0]),
                    fields[1].parse().map_err(|_| bad("bad count"))?,
                );
            }
            "lemma_sense_counts" => {
                if fields.len() != 3 {
                    return Err(bad("lemma_sense_counts rows are lemma<TAB>sense<TAB>count"));
                }
                index
                    .lemma_sense_counts
                    .entry(unescape(fields[0]))
                    .or_default()
                    .insert(
                        fields[1].to_string(),
                        fields[2].parse().map_err(|_| bad("bad count"))?,
                    );
            }
            "predicate_role_counts" => {
                if fields.len() != 3 {
                    return Err(bad("predicate_role_counts rows are pred<TAB>role<TAB>count"));
                }
                index.predicate_role_counts.insert(
                    (unescape(fields[0]), fields[1].to_string()),
                    fields[2].parse().map_err(|_| bad("bad count"))?,
                );
            }
            "name_sequences" => {
                index.name_sequences.insert(split_seq(fields[0]));
            }
            "date_signatures" => {
                let mut sig = BTreeSet::new();
                for pair in fields[0].split(';') {
                    let (r, v) = pair.split_once('=').ok_or_else(|| bad("bad signature"))?;
                    sig.insert((unescape(r), unescape(v)));
                }
                index.date_signatures.insert(sig);
            }
            "entity_values" => {
                if fields.len() != 2 {
                    return Err(bad("entity_values rows are type<TAB>value"));
                }
                index
                    .entity_values
                    .insert((unescape(fields[0]), unescape(fields[1])));
            }
            "wiki_values" => {
                index.wiki_values.insert(unescape(fields[0]));
            }
            "ne_type_pairs" => {
                if fields.len() != 2 {
                    return Err(bad("ne_type_pairs rows are type<TAB>seq"));
                }
                index
                    .ne_type_pairs
                    .insert((unescape(fields[0]), split_seq(fields[1])));
            }
            _ => return Err(bad("row outside a known section")),
        }
    }
    Ok(index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::read_corpus;
    use crate::pipeline::default_entity_types;

    fn corpus(text: &str) -> Vec<CorpusEntry> {
        read_corpus(text).unwrap()
    }

    #[test]
    fn counts_per_occurrence() {
        let entries = corpus(
            "# ::id a\n(r / run-01 :ARG0 (c / centrifuge) :ARG2 (x / thing :mod (c2 / centrifuge)))\n\n# ::id b\n(c / centrifuge)\n",
        );
        let index = build_index(&entries, &default_entity_types()).unwrap();
        assert_eq!(index.label_count("centrifuge"), 3);
        assert_eq!(band(index.label_count("centrifuge")), Band::Rare);
        assert_eq!(index.predicate_role_count("run-01", "ARG2"), 1);
        assert_eq!(index.label_count("gown"), 0);
    }

    #[test]
    fn frequent_sense_eligibility() {
        // run-01 x40, run-02 x35: run-02 is frequent and its competitors
        // total at least 30.
        let mut text = String::new();
        for i in 0..40 {
            text.push_str(&format!("# ::id r1_{i}\n(r / run-01)\n\n"));
        }
        for i in 0..35 {
            text.push_str(&format!("# ::id r2_{i}\n(r / run-02)\n\n"));
        }
        let index = build_index(&corpus(&text), &default_entity_types()).unwrap();
        assert_eq!(index.label_count("run-02"), 35);
        assert_eq!(index.competing_sense_count("run", "02"), 40);
        assert_eq!(index.competing_sense_count("run", "01"), 35);
    }

    #[test]
    fn empty_corpus_is_error() {
        assert!(matches!(
            build_index(&[], &default_entity_types()),
            Err(PipelineError::EmptyCorpus)
        ));
    }

    #[test]
    fn snapshot_round_trip_is_bit_identical() {
        let entries = corpus(
            "# ::id a\n(c / country :wiki \"North_Korea\" :name (n / name :op1 \"North\" :op2 \"Korea\"))\n\n\
             # ::id b\n(d / date-entity :month 12 :day 22)\n\n\
             # ::id c\n(p / phone-number-entity :value \"470-5715\")\n",
        );
        let index = build_index(&entries, &default_entity_types()).unwrap();
        assert!(index.wiki_values.contains("North_Korea"));
        assert!(index
            .ne_type_pairs
            .contains(&("country".to_string(), vec!["North".into(), "Korea".into()])));
        let text = save_index(&index);
        let reloaded = load_index(&text).unwrap();
        assert_eq!(index, reloaded);
        assert_eq!(save_index(&reloaded), text);
    }
}
