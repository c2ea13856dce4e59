//! The AMR graph data model and Penman notation support.

mod corpus;
mod exact;
mod normalize;
mod penman;

pub use corpus::{read_corpus, read_corpus_lenient, write_corpus, CorpusEntry, LenientEntry};
pub use exact::is_exact_match;
pub use normalize::NormalizeConfig;
pub use penman::{parse_penman, serialize_penman};

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("empty input")]
    EmptyInput,
    #[error("unbalanced parentheses at offset {0}")]
    Unbalanced(usize),
    #[error("unexpected token {0:?} at offset {1}")]
    UnexpectedToken(String, usize),
    #[error("duplicate instance declaration for variable {0:?}")]
    DuplicateInstance(String),
    #[error("invalid variable name {0:?}")]
    InvalidVariable(String),
    #[error("invalid role token {0:?}")]
    InvalidRole(String),
    #[error("graph is not connected from the root")]
    Disconnected,
    #[error("graph has no instances")]
    Empty,
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("duplicate corpus id {0:?}")]
    DuplicateId(String),
    #[error("corpus block without ::id metadata")]
    MissingId,
    #[error("corpus block with neither metadata nor graph")]
    EmptyBlock,
    #[error("penman parse error in entry {id}: {source}")]
    InEntry {
        id: String,
        #[source]
        source: Box<GraphError>,
    },
}

/// Index of a variable within one [`AmrGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// A concept label, e.g. `run-02`, split into lemma and optional
/// two-digit PropBank sense.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConceptLabel {
    full: String,
    /// Byte offset of the `-` before the sense digits, when present.
    sense_at: Option<usize>,
}

impl ConceptLabel {
    /// Parses a concept token. Only a trailing `-NN` (exactly two decimal
    /// digits) counts as a sense; `turn-off-07` has lemma `turn-off` and
    /// sense `07`, while `consist-of` has no sense.
    pub fn parse(token: &str) -> Self {
        let bytes = token.as_bytes();
        let sense_at = if bytes.len() >= 4 {
            let dash = bytes.len() - 3;
            if bytes[dash] == b'-'
                && bytes[dash + 1].is_ascii_digit()
                && bytes[dash + 2].is_ascii_digit()
                && dash > 0
            {
                Some(dash)
            } else {
                None
            }
        } else {
            None
        };
        ConceptLabel {
            full: token.to_string(),
            sense_at,
        }
    }

    pub fn full(&self) -> &str {
        &self.full
    }

    pub fn lemma(&self) -> &str {
        match self.sense_at {
            Some(i) => &self.full[..i],
            None => &self.full,
        }
    }

    pub fn sense(&self) -> Option<&str> {
        self.sense_at.map(|i| &self.full[i + 1..])
    }

    /// Compares against another label, on the full token or lemma only.
    pub fn matches(&self, other: &ConceptLabel, sense_sensitive: bool) -> bool {
        if sense_sensitive {
            self.full == other.full
        } else {
            self.lemma() == other.lemma()
        }
    }
}

impl fmt::Display for ConceptLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.full)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstKind {
    StringLiteral,
    Number,
    Symbol,
}

/// A constant attribute value. String literals are stored without their
/// surrounding quotes and regain them on serialization.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstantValue {
    pub kind: ConstKind,
    pub text: String,
}

impl ConstantValue {
    pub fn string(text: impl Into<String>) -> Self {
        ConstantValue {
            kind: ConstKind::StringLiteral,
            text: text.into(),
        }
    }

    pub fn symbol_or_number(token: impl Into<String>) -> Self {
        let text = token.into();
        let kind = if Self::looks_numeric(&text) {
            ConstKind::Number
        } else {
            ConstKind::Symbol
        };
        ConstantValue { kind, text }
    }

    fn looks_numeric(token: &str) -> bool {
        let t = token.strip_prefix('-').unwrap_or(token);
        !t.is_empty() && t.chars().all(|c| c.is_ascii_digit() || c == '.')
    }
}

impl fmt::Display for ConstantValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ConstKind::StringLiteral => write!(f, "\"{}\"", self.text.replace('"', "\\\"")),
            _ => f.write_str(&self.text),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub source: VarId,
    pub role: String,
    pub target: VarId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub source: VarId,
    pub role: String,
    pub value: ConstantValue,
}

/// A rooted, labeled AMR graph: concept instances over variables, relation
/// edges between variables, and constant attributes. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmrGraph {
    root: VarId,
    names: Vec<String>,
    concepts: Vec<ConceptLabel>,
    relations: Vec<Relation>,
    attributes: Vec<Attribute>,
}

impl AmrGraph {
    pub fn root(&self) -> VarId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.names.len()).map(VarId)
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.names[v.0]
    }

    pub fn concept(&self, v: VarId) -> &ConceptLabel {
        &self.concepts[v.0]
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.names.iter().position(|n| n == name).map(VarId)
    }

    /// Number of relations targeting `v`.
    pub fn incoming_count(&self, v: VarId) -> usize {
        self.relations.iter().filter(|r| r.target == v).count()
    }

    /// Variables with two or more incoming relations (reentrancies).
    /// Meaningful on normalized graphs.
    pub fn reentrant_vars(&self) -> Vec<VarId> {
        let mut counts = vec![0usize; self.names.len()];
        for r in &self.relations {
            counts[r.target.0] += 1;
        }
        counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c >= 2)
            .map(|(i, _)| VarId(i))
            .collect()
    }
}

/// The subgraph reachable from `root` following relation direction, with
/// the attributes of the included variables. Variable names carry over.
pub fn extract_subgraph(graph: &AmrGraph, root: VarId) -> AmrGraph {
    let mut include = vec![false; graph.len()];
    let mut stack = vec![root];
    include[root.0] = true;
    while let Some(v) = stack.pop() {
        for r in &graph.relations {
            if r.source == v && !include[r.target.0] {
                include[r.target.0] = true;
                stack.push(r.target);
            }
        }
    }
    let mut builder = GraphBuilder::new();
    let mut remap: BTreeMap<usize, VarId> = BTreeMap::new();
    for v in graph.var_ids() {
        if include[v.0] {
            let nv = builder
                .add_instance(graph.var_name(v), graph.concept(v).clone())
                .expect("names unique in source graph");
            remap.insert(v.0, nv);
        }
    }
    for r in &graph.relations {
        if include[r.source.0] && include[r.target.0] {
            builder
                .add_relation(remap[&r.source.0], &r.role, remap[&r.target.0])
                .expect("role already validated");
        }
    }
    for a in &graph.attributes {
        if include[a.source.0] {
            builder
                .add_attribute(remap[&a.source.0], &a.role, a.value.clone())
                .expect("role already validated");
        }
    }
    builder.set_root(remap[&root.0]);
    builder.finish().expect("reachable subgraph is connected")
}

/// Incremental construction of an [`AmrGraph`]; `finish` validates the
/// graph invariants (unique variables, valid roles, connectivity).
#[derive(Debug, Default)]
pub struct GraphBuilder {
    names: Vec<String>,
    concepts: Vec<ConceptLabel>,
    by_name: BTreeMap<String, VarId>,
    relations: Vec<Relation>,
    attributes: Vec<Attribute>,
    root: Option<VarId>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_instance(&mut self, name: &str, concept: ConceptLabel) -> Result<VarId, GraphError> {
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(GraphError::InvalidVariable(name.to_string()));
        }
        if self.by_name.contains_key(name) {
            return Err(GraphError::DuplicateInstance(name.to_string()));
        }
        let id = VarId(self.names.len());
        self.names.push(name.to_string());
        self.concepts.push(concept);
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    /// Adds an instance, deriving a fresh variable name from the concept's
    /// first character (`g`, `g2`, `g3`, ...).
    pub fn add_fresh(&mut self, concept: ConceptLabel) -> VarId {
        let initial = concept
            .full()
            .chars()
            .find(|c| c.is_ascii_alphabetic())
            .unwrap_or('x')
            .to_ascii_lowercase();
        let mut name = initial.to_string();
        let mut n = 1;
        while self.by_name.contains_key(&name) {
            n += 1;
            name = format!("{initial}{n}");
        }
        self.add_instance(&name, concept).expect("fresh name is unique")
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn add_relation(&mut self, source: VarId, role: &str, target: VarId) -> Result<(), GraphError> {
        check_role(role)?;
        self.relations.push(Relation {
            source,
            role: role.to_string(),
            target,
        });
        Ok(())
    }

    pub fn add_attribute(
        &mut self,
        source: VarId,
        role: &str,
        value: ConstantValue,
    ) -> Result<(), GraphError> {
        check_role(role)?;
        self.attributes.push(Attribute {
            source,
            role: role.to_string(),
            value,
        });
        Ok(())
    }

    pub fn set_root(&mut self, root: VarId) {
        self.root = Some(root);
    }

    pub fn finish(self) -> Result<AmrGraph, GraphError> {
        if self.names.is_empty() {
            return Err(GraphError::Empty);
        }
        let root = self.root.unwrap_or(VarId(0));
        let graph = AmrGraph {
            root,
            names: self.names,
            concepts: self.concepts,
            relations: self.relations,
            attributes: self.attributes,
        };
        // Connectivity from the root over undirected relation edges; edge
        // direction is a serialization artifact (inverse -of roles).
        let mut seen = vec![false; graph.names.len()];
        let mut stack = vec![graph.root];
        seen[graph.root.0] = true;
        while let Some(v) = stack.pop() {
            for r in &graph.relations {
                for (a, b) in [(r.source, r.target), (r.target, r.source)] {
                    if a == v && !seen[b.0] {
                        seen[b.0] = true;
                        stack.push(b);
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(GraphError::Disconnected);
        }
        Ok(graph)
    }
}

fn check_role(role: &str) -> Result<(), GraphError> {
    if role.is_empty() || role.chars().any(|c| c.is_whitespace()) {
        return Err(GraphError::InvalidRole(role.to_string()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concept_label_sense_split() {
        let c = ConceptLabel::parse("run-02");
        assert_eq!(c.lemma(), "run");
        assert_eq!(c.sense(), Some("02"));

        let c = ConceptLabel::parse("turn-off-07");
        assert_eq!(c.lemma(), "turn-off");
        assert_eq!(c.sense(), Some("07"));

        for plain in ["consist-of", "centrifuge", "date-entity", "a-1", "-02"] {
            let c = ConceptLabel::parse(plain);
            assert_eq!(c.sense(), None, "{plain} should have no sense");
            assert_eq!(c.lemma(), plain);
        }
    }

    #[test]
    fn sense_matching_modes() {
        let a = ConceptLabel::parse("fill-in-07");
        let b = ConceptLabel::parse("fill-in-01");
        assert!(!a.matches(&b, true));
        assert!(a.matches(&b, false));
    }

    #[test]
    fn constant_value_display() {
        assert_eq!(ConstantValue::string("Capitol").to_string(), "\"Capitol\"");
        assert_eq!(ConstantValue::symbol_or_number("imperative").to_string(), "imperative");
        assert_eq!(ConstantValue::symbol_or_number("12").kind, ConstKind::Number);
        assert_eq!(ConstantValue::symbol_or_number("-").kind, ConstKind::Symbol);
    }

    #[test]
    fn builder_rejects_duplicates_and_disconnected() {
        let mut b = GraphBuilder::new();
        b.add_instance("a", ConceptLabel::parse("alpha")).unwrap();
        assert!(matches!(
            b.add_instance("a", ConceptLabel::parse("beta")),
            Err(GraphError::DuplicateInstance(_))
        ));

        let mut b = GraphBuilder::new();
        let a = b.add_instance("a", ConceptLabel::parse("alpha")).unwrap();
        b.add_instance("b", ConceptLabel::parse("beta")).unwrap();
        b.set_root(a);
        assert!(matches!(b.finish(), Err(GraphError::Disconnected)));
    }
}
