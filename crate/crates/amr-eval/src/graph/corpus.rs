//! Blank-line-separated AMR corpus files with `# ::key value` metadata.

use std::collections::{BTreeMap, BTreeSet};

use super::{parse_penman, serialize_penman, AmrGraph, GraphError};

/// One corpus block: id, sentence, optional graph, and any further
/// metadata keys. Graph-less entries are partial-annotation records.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub id: String,
    pub sentence: String,
    pub graph: Option<AmrGraph>,
    pub metadata: BTreeMap<String, String>,
}

/// Reads a corpus: blocks separated by blank lines, metadata lines of the
/// form `# ::key value` (with `::id` and `::snt` recognized specially),
/// remaining lines concatenated and parsed as one Penman expression.
pub fn read_corpus(text: &str) -> Result<Vec<CorpusEntry>, GraphError> {
    let mut entries = Vec::new();
    let mut seen_ids = BTreeSet::new();
    for block in text.split("\n\n") {
        let block = block.trim();
        if block.is_empty() {
            continue;
        }
        let mut id = None;
        let mut sentence = String::new();
        let mut metadata = BTreeMap::new();
        let mut graph_text = String::new();
        for line in block.lines() {
            let line = line.trim_end();
            if let Some(meta) = line.strip_prefix("# ::") {
                let (key, value) = match meta.split_once(char::is_whitespace) {
                    Some((k, v)) => (k, v.trim()),
                    None => (meta, ""),
                };
                match key {
                    "id" => id = Some(value.to_string()),
                    "snt" => sentence = value.to_string(),
                    _ => {
                        metadata.insert(key.to_string(), value.to_string());
                    }
                }
            } else if line.starts_with('#') {
                // Plain comment lines are skipped.
            } else if !line.trim().is_empty() {
                graph_text.push_str(line);
                graph_text.push(' ');
            }
        }
        let has_meta = id.is_some() || !sentence.is_empty() || !metadata.is_empty();
        let graph_text = graph_text.trim();
        if !has_meta && graph_text.is_empty() {
            return Err(GraphError::EmptyBlock);
        }
        let id = id.ok_or(GraphError::MissingId)?;
        if !seen_ids.insert(id.clone()) {
            return Err(GraphError::DuplicateId(id));
        }
        let graph = if graph_text.is_empty() {
            None
        } else {
            Some(parse_penman(graph_text).map_err(|e| GraphError::InEntry {
                id: id.clone(),
                source: Box::new(e),
            })?)
        };
        entries.push(CorpusEntry {
            id,
            sentence,
            graph,
            metadata,
        });
    }
    Ok(entries)
}

/// A block read without failing the whole file: parser output in the
/// wild drops ids and produces malformed graphs.
#[derive(Debug, Clone)]
pub struct LenientEntry {
    pub id: Option<String>,
    pub sentence: String,
    pub graph: Option<AmrGraph>,
    pub parse_error: Option<String>,
    pub metadata: BTreeMap<String, String>,
}

/// Reads a corpus without erroring on individual blocks; malformed
/// graphs surface as `parse_error` on their entry.
pub fn read_corpus_lenient(text: &str) -> Vec<LenientEntry> {
    let mut entries = Vec::new();
    for block in text.split("\n\n") {
        let block = block.trim();
        if block.is_empty() {
            continue;
        }
        let mut id = None;
        let mut sentence = String::new();
        let mut metadata = BTreeMap::new();
        let mut graph_text = String::new();
        for line in block.lines() {
            let line = line.trim_end();
            if let Some(meta) = line.strip_prefix("# ::") {
                let (key, value) = match meta.split_once(char::is_whitespace) {
                    Some((k, v)) => (k, v.trim()),
                    None => (meta, ""),
                };
                match key {
                    "id" => id = Some(value.to_string()),
                    "snt" => sentence = value.to_string(),
                    _ => {
                        metadata.insert(key.to_string(), value.to_string());
                    }
                }
            } else if line.starts_with('#') {
                // comment
            } else if !line.trim().is_empty() {
                graph_text.push_str(line);
                graph_text.push(' ');
            }
        }
        let graph_text = graph_text.trim();
        let (graph, parse_error) = if graph_text.is_empty() {
            (None, None)
        } else {
            match parse_penman(graph_text) {
                Ok(g) => (Some(g), None),
                Err(e) => (None, Some(e.to_string())),
            }
        };
        if id.is_none() && sentence.is_empty() && graph.is_none() && parse_error.is_none() {
            continue;
        }
        entries.push(LenientEntry {
            id,
            sentence,
            graph,
            parse_error,
            metadata,
        });
    }
    entries
}

pub fn write_corpus(entries: &[CorpusEntry]) -> Result<String, GraphError> {
    let mut out = String::new();
    for (i, entry) in entries.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("# ::id {}\n", entry.id));
        if !entry.sentence.is_empty() {
            out.push_str(&format!("# ::snt {}\n", entry.sentence));
        }
        for (k, v) in &entry.metadata {
            out.push_str(&format!("# ::{k} {v}\n"));
        }
        if let Some(graph) = &entry.graph {
            out.push_str(&serialize_penman(graph)?);
            out.push('\n');
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_block() {
        let text = "# ::id x1\n# ::snt Go!\n(g / go-02 :mode imperative :ARG0 (y / you))\n";
        let entries = read_corpus(text).unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].id, "x1");
        assert_eq!(entries[0].sentence, "Go!");
        assert_eq!(entries[0].graph.as_ref().unwrap().len(), 2);
    }

    #[test]
    fn two_blocks_in_order() {
        let text = "# ::id a\n# ::snt A.\n(x / alpha)\n\n# ::id b\n# ::snt B.\n(y / beta)\n";
        let entries = read_corpus(text).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].id, "a");
        assert_eq!(entries[1].id, "b");
    }

    #[test]
    fn missing_id_is_error() {
        let text = "# ::snt Hello.\n(x / alpha)\n";
        assert!(matches!(read_corpus(text), Err(GraphError::MissingId)));
        assert!(matches!(read_corpus("(x / alpha)\n"), Err(GraphError::MissingId)));
    }

    #[test]
    fn duplicate_ids_are_error() {
        let text = "# ::id a\n(x / alpha)\n\n# ::id a\n(y / beta)\n";
        assert!(matches!(read_corpus(text), Err(GraphError::DuplicateId(_))));
    }

    #[test]
    fn unknown_metadata_preserved_and_graphless_allowed() {
        let text = "# ::id a\n# ::snt S.\n# ::depth 3\n";
        let entries = read_corpus(text).unwrap();
        assert_eq!(entries[0].metadata.get("depth").map(String::as_str), Some("3"));
        assert!(entries[0].graph.is_none());
    }

    #[test]
    fn multiline_graphs_and_round_trip() {
        let text = "# ::id a\n# ::snt S.\n(w / want-01\n    :ARG0 (b / boy)\n    :ARG1 (g / go-02 :ARG0 b))\n";
        let entries = read_corpus(text).unwrap();
        let written = write_corpus(&entries).unwrap();
        let reread = read_corpus(&written).unwrap();
        assert_eq!(reread.len(), 1);
        assert_eq!(reread[0].graph.as_ref().unwrap().len(), 3);
    }
}
