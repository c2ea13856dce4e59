//! Penman notation reader and writer.

use super::{
    AmrGraph, ConceptLabel, ConstantValue, GraphBuilder, GraphError, Relation, VarId,
};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open,
    Close,
    Slash,
    Role(String),
    Str(String),
    Word(String),
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, GraphError> {
    let mut tokens = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            '(' => {
                tokens.push((Token::Open, i));
                i += 1;
            }
            ')' => {
                tokens.push((Token::Close, i));
                i += 1;
            }
            '/' => {
                tokens.push((Token::Slash, i));
                i += 1;
            }
            '"' => {
                let start = i;
                i += 1;
                let mut s = String::new();
                loop {
                    if i >= bytes.len() {
                        return Err(GraphError::Unbalanced(start));
                    }
                    match bytes[i] {
                        b'\\' if i + 1 < bytes.len() => {
                            s.push(bytes[i + 1] as char);
                            i += 2;
                        }
                        b'"' => {
                            i += 1;
                            break;
                        }
                        b => {
                            s.push(b as char);
                            i += 1;
                        }
                    }
                }
                tokens.push((Token::Str(s), start));
            }
            ':' => {
                let start = i;
                i += 1;
                while i < bytes.len() && !is_delim(bytes[i]) {
                    i += 1;
                }
                let role = &text[start + 1..i];
                if role.is_empty() {
                    return Err(GraphError::UnexpectedToken(":".into(), start));
                }
                tokens.push((Token::Role(role.to_string()), start));
            }
            c if c.is_whitespace() => {
                i += 1;
            }
            _ => {
                let start = i;
                while i < bytes.len() && !is_delim(bytes[i]) {
                    i += 1;
                }
                tokens.push((Token::Word(text[start..i].to_string()), start));
            }
        }
    }
    Ok(tokens)
}

fn is_delim(b: u8) -> bool {
    matches!(b, b'(' | b')' | b'/' | b'"') || (b as char).is_whitespace()
}

/// Raw parse tree prior to variable resolution.
#[derive(Debug)]
struct RawNode {
    var: String,
    concept: String,
    children: Vec<(String, RawChild)>,
}

#[derive(Debug)]
enum RawChild {
    Node(RawNode),
    /// A bare token: either a variable mention or a constant.
    Token(String),
    Str(String),
}

struct Parser<'a> {
    tokens: &'a [(Token, usize)],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|&(_, o)| o)
            .unwrap_or(usize::MAX)
    }

    fn next(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t);
        self.pos += 1;
        t
    }

    fn parse_node(&mut self) -> Result<RawNode, GraphError> {
        let off = self.offset();
        match self.next() {
            Some(Token::Open) => {}
            _ => return Err(GraphError::Unbalanced(off)),
        }
        let var = match self.next() {
            Some(Token::Word(w)) => w.clone(),
            _ => return Err(GraphError::UnexpectedToken("(".into(), off)),
        };
        let off = self.offset();
        match self.next() {
            Some(Token::Slash) => {}
            _ => return Err(GraphError::UnexpectedToken(var, off)),
        }
        let off = self.offset();
        let concept = match self.next() {
            Some(Token::Word(w)) => w.clone(),
            _ => return Err(GraphError::UnexpectedToken("/".into(), off)),
        };
        let mut children = Vec::new();
        loop {
            let off = self.offset();
            match self.peek() {
                Some(Token::Close) => {
                    self.next();
                    break;
                }
                Some(Token::Role(_)) => {
                    let role = match self.next() {
                        Some(Token::Role(r)) => r.clone(),
                        _ => unreachable!(),
                    };
                    let child_off = self.offset();
                    let child = match self.peek() {
                        Some(Token::Open) => RawChild::Node(self.parse_node()?),
                        Some(Token::Word(_)) => match self.next() {
                            Some(Token::Word(w)) => RawChild::Token(w.clone()),
                            _ => unreachable!(),
                        },
                        Some(Token::Str(_)) => match self.next() {
                            Some(Token::Str(s)) => RawChild::Str(s.clone()),
                            _ => unreachable!(),
                        },
                        _ => return Err(GraphError::Unbalanced(child_off)),
                    };
                    children.push((role, child));
                }
                Some(t) => {
                    return Err(GraphError::UnexpectedToken(format!("{t:?}"), off));
                }
                None => return Err(GraphError::Unbalanced(off)),
            }
        }
        Ok(RawNode { var, concept, children })
    }
}

/// Parses a single parenthesized Penman expression into a graph.
///
/// Repeated variable mentions become reentrancies. A role target counts as
/// a relation iff the bare token matches a variable declared anywhere in
/// the expression; otherwise it is a constant attribute.
pub fn parse_penman(text: &str) -> Result<AmrGraph, GraphError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(GraphError::EmptyInput);
    }
    let mut parser = Parser { tokens: &tokens, pos: 0 };
    let tree = parser.parse_node()?;
    if parser.pos != tokens.len() {
        return Err(GraphError::UnexpectedToken(
            "trailing input".into(),
            parser.offset(),
        ));
    }

    // First pass: declare instances in source order.
    let mut builder = GraphBuilder::new();
    declare(&tree, &mut builder)?;
    // Second pass: edges and attributes, resolving bare tokens against the
    // declared variable set (forward references included).
    let root = builder.var_by_name(&tree.var).expect("root was declared");
    builder.set_root(root);
    connect(&tree, &mut builder)?;
    builder.finish()
}

fn declare(node: &RawNode, builder: &mut GraphBuilder) -> Result<(), GraphError> {
    builder.add_instance(&node.var, ConceptLabel::parse(&node.concept))?;
    for (_, child) in &node.children {
        if let RawChild::Node(n) = child {
            declare(n, builder)?;
        }
    }
    Ok(())
}

fn connect(node: &RawNode, builder: &mut GraphBuilder) -> Result<(), GraphError> {
    let source = builder.var_by_name(&node.var).expect("declared");
    for (role, child) in &node.children {
        match child {
            RawChild::Node(n) => {
                let target = builder.var_by_name(&n.var).expect("declared");
                builder.add_relation(source, role, target)?;
                connect(n, builder)?;
            }
            RawChild::Token(tok) => match builder.var_by_name(tok) {
                Some(target) => builder.add_relation(source, role, target)?,
                None => builder.add_attribute(
                    source,
                    role,
                    ConstantValue::symbol_or_number(tok.clone()),
                )?,
            },
            RawChild::Str(s) => {
                builder.add_attribute(source, role, ConstantValue::string(s.clone()))?;
            }
        }
    }
    Ok(())
}

/// Role inversion used when the serializer must traverse a relation
/// against its direction. The exception list keeps lexical `-of` roles
/// (such as `consist-of`) from being treated as inversions.
pub(crate) fn invert_role(role: &str, exceptions: &[&str]) -> String {
    if let Some(stripped) = role.strip_suffix("-of") {
        if !stripped.is_empty() && !exceptions.contains(&role) {
            return stripped.to_string();
        }
    }
    format!("{role}-of")
}

/// Serializes a graph to Penman text. Output is deterministic given the
/// graph's stored instance/relation/attribute order, and re-parses to an
/// exact-match-equal graph after normalization.
pub fn serialize_penman(graph: &AmrGraph) -> Result<String, GraphError> {
    // finish() guarantees connectivity for graphs built through the
    // builder, but serialize may be handed any clone; re-check cheaply.
    let mut out = String::new();
    let mut visited = vec![false; graph.len()];
    let mut emitted = vec![false; graph.relations().len()];
    let exceptions: Vec<&str> = super::normalize::DEFAULT_OF_EXCEPTIONS.to_vec();
    emit_node(graph, graph.root(), &mut visited, &mut emitted, &exceptions, &mut out);
    if visited.iter().any(|v| !v) || emitted.iter().any(|e| !e) {
        return Err(GraphError::Disconnected);
    }
    Ok(out)
}

fn emit_node(
    graph: &AmrGraph,
    v: VarId,
    visited: &mut [bool],
    emitted: &mut [bool],
    exceptions: &[&str],
    out: &mut String,
) {
    visited[v.0] = true;
    out.push('(');
    out.push_str(graph.var_name(v));
    out.push_str(" / ");
    out.push_str(graph.concept(v).full());
    for attr in graph.attributes().iter().filter(|a| a.source == v) {
        out.push_str(" :");
        out.push_str(&attr.role);
        out.push(' ');
        out.push_str(&attr.value.to_string());
    }
    // Each relation is emitted exactly once, at the first endpoint reached
    // in the traversal; traversal against the edge direction inverts the
    // role with an -of suffix.
    for (i, rel) in graph.relations().iter().enumerate() {
        if emitted[i] {
            continue;
        }
        let (role, other) = if rel.source == v {
            (rel.role.clone(), rel.target)
        } else if rel.target == v {
            (invert_role(&rel.role, exceptions), rel.source)
        } else {
            continue;
        };
        emitted[i] = true;
        out.push_str(" :");
        out.push_str(&role);
        out.push(' ');
        if visited[other.0] {
            out.push_str(graph.var_name(other));
        } else {
            emit_node(graph, other, visited, emitted, exceptions, out);
        }
    }
    out.push(')');
}

#[allow(unused)]
fn relation_key(r: &Relation) -> (usize, &str, usize) {
    (r.source.0, r.role.as_str(), r.target.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{is_exact_match, ConstKind, NormalizeConfig};

    #[test]
    fn parses_imperative_example() {
        let g = parse_penman("(g / go-02 :mode imperative :ARG0 (y / you))").unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.concept(g.root()).full(), "go-02");
        assert_eq!(g.relations().len(), 1);
        assert_eq!(g.relations()[0].role, "ARG0");
        assert_eq!(g.attributes().len(), 1);
        assert_eq!(g.attributes()[0].role, "mode");
        assert_eq!(g.attributes()[0].value.kind, ConstKind::Symbol);
        assert_eq!(g.attributes()[0].value.text, "imperative");
    }

    #[test]
    fn parses_minimal_graph() {
        let g = parse_penman("(a / alpha)").unwrap();
        assert_eq!(g.len(), 1);
        assert!(g.relations().is_empty());
        assert_eq!(g.var_name(g.root()), "a");
    }

    #[test]
    fn parses_string_attributes_in_order() {
        let g = parse_penman(r#"(n / name :op1 "Capitol" :op2 "Hill")"#).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.attributes().len(), 2);
        assert_eq!(g.attributes()[0].role, "op1");
        assert_eq!(g.attributes()[0].value, ConstantValue::string("Capitol"));
        assert_eq!(g.attributes()[1].value, ConstantValue::string("Hill"));
    }

    #[test]
    fn reentrancy_not_new_instance() {
        let g = parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))").unwrap();
        assert_eq!(g.len(), 3);
        let b = g.var_by_name("b").unwrap();
        assert_eq!(g.incoming_count(b), 2);
    }

    #[test]
    fn forward_reference_is_relation() {
        let g = parse_penman("(a / and :op1 (x / foo :mod y) :op2 (y / bar))").unwrap();
        assert_eq!(g.relations().len(), 3);
        assert!(g.attributes().is_empty());
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_penman(""), Err(GraphError::EmptyInput)));
        assert!(matches!(parse_penman("   "), Err(GraphError::EmptyInput)));
        assert!(parse_penman("(a / alpha").is_err());
        assert!(parse_penman("(a / alpha))").is_err());
        assert!(matches!(
            parse_penman("(a / alpha :mod (a / beta))"),
            Err(GraphError::DuplicateInstance(_))
        ));
    }

    #[test]
    fn round_trip_simple() {
        let s = "(a / alpha)";
        assert_eq!(serialize_penman(&parse_penman(s).unwrap()).unwrap(), s);

        let s = "(g / go-02 :mode imperative :ARG0 (y / you))";
        let g = parse_penman(s).unwrap();
        let cfg = NormalizeConfig::default();
        let g2 = cfg.normalize(&parse_penman(&serialize_penman(&g).unwrap()).unwrap());
        assert!(is_exact_match(&cfg.normalize(&g), &g2));
    }

    #[test]
    fn reentrant_second_mention_is_bare() {
        let g = parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))").unwrap();
        let s = serialize_penman(&g).unwrap();
        assert_eq!(s.matches("/ boy").count(), 1);
        let cfg = NormalizeConfig::default();
        assert!(is_exact_match(
            &cfg.normalize(&g),
            &cfg.normalize(&parse_penman(&s).unwrap())
        ));
    }
}
