//! The synchronous rule format: feature-decorated context-free rules that
//! pair a string template with a graph-fragment template.
//!
//! Grammar files are line-oriented UTF-8:
//!
//! ```text
//! # comment
//! start CP
//! lex Subj "the lawyer" label=lawyer num=sg
//! lex CPV "said" label=say-01
//! rule CP[d=$D,d>0] w=2
//!   str: <1:Subj> <2:CPV> that <3:CP[d=$D-1]>
//!   graph: (<2> :ARG0 <1> :ARG1 <3>)
//! ```
//!
//! String templates hold terminals, numbered slots (`<1:Name[specs]>`,
//! optionally `!bind=key`), and bound re-mentions (`<@key>` for the bound
//! word, `<@key:acc>` for its accusative form, `<@key:pron3>` for a
//! sampled third-person pronoun). Graph templates are Penman-shaped with
//! slot splices; `:role*` attaches every root of a slot bundle, `:op#*`
//! attaches them under `op1..opN`, and a `^` prefix marks the node that
//! becomes the entry root.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{parse_penman, AmrGraph, ConstantValue};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("grammar line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("no applicable rule for {symbol}[{features}]")]
    NoApplicableRule { symbol: String, features: String },
    #[error("lexical class {0:?} exhausted under the no-repeat constraint")]
    LexExhausted(String),
    #[error("unbound reference <@{0}>")]
    UnboundKey(String),
    #[error("slot {0} produced no graph material")]
    EmptySlot(usize),
    #[error("derivation failed after {attempts} attempts: {last}")]
    Unsatisfiable { attempts: usize, last: String },
    #[error("unknown generation category {0:?}")]
    UnknownCategory(String),
    #[error("generated entry failed its structural check: {0}")]
    SchemaViolation(String),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
}

/// A feature value: a small integer (depths, class ranks) or an atom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum FeatVal {
    Int(i64),
    Atom(String),
}

impl FeatVal {
    pub fn parse(token: &str) -> FeatVal {
        match token.parse::<i64>() {
            Ok(i) => FeatVal::Int(i),
            Err(_) => FeatVal::Atom(token.to_string()),
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            FeatVal::Int(i) => Some(*i),
            FeatVal::Atom(_) => None,
        }
    }
}

impl std::fmt::Display for FeatVal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FeatVal::Int(i) => write!(f, "{i}"),
            FeatVal::Atom(a) => write!(f, "{a}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Gt,
    Ge,
    Lt,
    Le,
}

/// Right-hand side of a feature constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatExpr {
    Lit(FeatVal),
    /// `$V`, optionally with an integer offset (`$V-1`).
    Var(String, i64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatSpec {
    pub feature: String,
    pub cmp: Cmp,
    pub expr: FeatExpr,
}

#[derive(Debug, Clone)]
pub struct SlotDef {
    pub index: usize,
    pub symbol: String,
    pub specs: Vec<FeatSpec>,
    pub bind: Option<String>,
}

#[derive(Debug, Clone)]
pub enum StrItem {
    Terminal(String),
    Slot(usize),
    Bound { key: String, form: BoundForm },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundForm {
    Word,
    Accusative,
    Pron3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoleMode {
    Single,
    Spread,
    OpIndexed,
}

#[derive(Debug, Clone)]
pub struct TRole {
    pub role: String,
    pub mode: RoleMode,
}

#[derive(Debug, Clone)]
pub enum TChild {
    Node(TNode),
    Slot(usize),
    Bound(String),
    Const(ConstantValue),
}

#[derive(Debug, Clone)]
pub enum THead {
    Concept(String),
    Slot(usize),
}

#[derive(Debug, Clone)]
pub struct TNode {
    pub head: THead,
    pub children: Vec<(TRole, TChild)>,
    pub root_marker: bool,
}

#[derive(Debug, Clone)]
pub enum TElement {
    Node(TNode),
    Slot(usize),
}

#[derive(Debug, Clone)]
pub struct SyncRule {
    pub lhs: String,
    pub constraints: Vec<FeatSpec>,
    pub weight: f64,
    pub string_items: Vec<StrItem>,
    pub slots: Vec<SlotDef>,
    pub template: Vec<TElement>,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub struct LexEntry {
    pub class: String,
    pub word: String,
    pub acc: Option<String>,
    pub label: Option<String>,
    pub graph: Option<AmrGraph>,
    pub features: BTreeMap<String, FeatVal>,
    pub weight: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Grammar {
    pub start: String,
    pub rules: Vec<SyncRule>,
    pub lexicon: Vec<LexEntry>,
}

impl Grammar {
    pub fn is_lex_class(&self, symbol: &str) -> bool {
        self.lexicon.iter().any(|l| l.class == symbol)
    }

    pub fn lex_indices(&self, class: &str) -> Vec<usize> {
        self.lexicon
            .iter()
            .enumerate()
            .filter(|(_, l)| l.class == class)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn parse(text: &str) -> Result<Grammar, GenError> {
        let mut grammar = Grammar::default();
        let lines: Vec<&str> = text.lines().collect();
        let mut i = 0;
        while i < lines.len() {
            let raw = lines[i];
            let line_no = i + 1;
            i += 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("start ") {
                grammar.start = rest.trim().to_string();
            } else if let Some(rest) = line.strip_prefix("lex ") {
                grammar.lexicon.push(parse_lex(rest, line_no)?);
            } else if let Some(rest) = line.strip_prefix("rule ") {
                // A rule header is followed by "str:" and "graph:" lines.
                let (lhs, constraints, weight) = parse_rule_header(rest, line_no)?;
                let mut string_line = None;
                let mut graph_line = None;
                while i < lines.len() {
                    let body = lines[i].trim();
                    if let Some(s) = body.strip_prefix("str:") {
                        string_line = Some((s.trim().to_string(), i + 1));
                        i += 1;
                    } else if let Some(g) = body.strip_prefix("graph:") {
                        graph_line = Some((g.trim().to_string(), i + 1));
                        i += 1;
                    } else {
                        break;
                    }
                }
                let (string_src, str_no) = string_line.ok_or_else(|| GenError::Malformed {
                    line: line_no,
                    message: "rule without a str: line".into(),
                })?;
                let (string_items, slots) = parse_string_template(&string_src, str_no)?;
                let template = match graph_line {
                    Some((src, no)) => parse_graph_template(&src, no)?,
                    None => Vec::new(),
                };
                grammar.rules.push(SyncRule {
                    lhs,
                    constraints,
                    weight,
                    string_items,
                    slots,
                    template,
                    line: line_no,
                });
            } else {
                return Err(GenError::Malformed {
                    line: line_no,
                    message: format!("unrecognized line {line:?}"),
                });
            }
        }
        Ok(grammar)
    }
}

fn parse_lex(rest: &str, line: usize) -> Result<LexEntry, GenError> {
    let malformed = |message: String| GenError::Malformed { line, message };
    let rest = rest.trim();
    let (class, rest) = rest
        .split_once(char::is_whitespace)
        .ok_or_else(|| malformed("lex needs a class and a quoted word".into()))?;
    let rest = rest.trim();
    if !rest.starts_with('"') {
        return Err(malformed("lex word must be quoted".into()));
    }
    let end = rest[1..]
        .find('"')
        .ok_or_else(|| malformed("unterminated lex word".into()))?;
    let word = rest[1..1 + end].to_string();
    let mut entry = LexEntry {
        class: class.to_string(),
        word,
        acc: None,
        label: None,
        graph: None,
        features: BTreeMap::new(),
        weight: 1.0,
    };
    let mut tail = rest[2 + end..].trim();
    while !tail.is_empty() {
        let (key, after) = tail
            .split_once('=')
            .ok_or_else(|| malformed(format!("expected key=value, got {tail:?}")))?;
        let key = key.trim();
        let (value, next) = if after.starts_with('"') {
            let end = after[1..]
                .find('"')
                .ok_or_else(|| malformed("unterminated quoted value".into()))?;
            (after[1..1 + end].to_string(), after[2 + end..].trim_start())
        } else {
            match after.split_once(char::is_whitespace) {
                Some((v, n)) => (v.to_string(), n.trim_start()),
                None => (after.to_string(), ""),
            }
        };
        match key {
            "label" => entry.label = Some(value),
            "acc" => entry.acc = Some(value),
            "w" => {
                entry.weight = value
                    .parse()
                    .map_err(|_| malformed(format!("bad weight {value:?}")))?
            }
            "graph" => {
                entry.graph = Some(parse_penman(&value).map_err(|e| {
                    malformed(format!("bad lex graph: {e}"))
                })?)
            }
            _ => {
                entry.features.insert(key.to_string(), FeatVal::parse(&value));
            }
        }
        tail = next;
    }
    if entry.label.is_none() {
        if let Some(g) = &entry.graph {
            entry.label = Some(g.concept(g.root()).full().to_string());
        }
    }
    Ok(entry)
}

fn parse_rule_header(rest: &str, line: usize) -> Result<(String, Vec<FeatSpec>, f64), GenError> {
    let rest = rest.trim();
    let (head, tail) = match rest.split_once(char::is_whitespace) {
        Some((h, t)) => (h, t.trim()),
        None => (rest, ""),
    };
    let (lhs, constraints) = parse_symbol_with_specs(head, line)?;
    let mut weight = 1.0;
    if !tail.is_empty() {
        let w = tail
            .strip_prefix("w=")
            .ok_or_else(|| GenError::Malformed {
                line,
                message: format!("unexpected rule header tail {tail:?}"),
            })?;
        weight = w.parse().map_err(|_| GenError::Malformed {
            line,
            message: format!("bad weight {w:?}"),
        })?;
    }
    Ok((lhs, constraints, weight))
}

/// Parses `Name` or `Name[f=v,g>$X,...]`.
fn parse_symbol_with_specs(token: &str, line: usize) -> Result<(String, Vec<FeatSpec>), GenError> {
    match token.split_once('[') {
        None => Ok((token.to_string(), Vec::new())),
        Some((name, rest)) => {
            let inner = rest.strip_suffix(']').ok_or_else(|| GenError::Malformed {
                line,
                message: format!("missing ] in {token:?}"),
            })?;
            let mut specs = Vec::new();
            for part in inner.split(',').filter(|p| !p.trim().is_empty()) {
                specs.push(parse_featspec(part.trim(), line)?);
            }
            Ok((name.to_string(), specs))
        }
    }
}

fn parse_featspec(part: &str, line: usize) -> Result<FeatSpec, GenError> {
    let ops = [(">=", Cmp::Ge), ("<=", Cmp::Le), (">", Cmp::Gt), ("<", Cmp::Lt), ("=", Cmp::Eq)];
    for (tok, cmp) in ops {
        if let Some(pos) = part.find(tok) {
            let feature = part[..pos].trim().to_string();
            let value = part[pos + tok.len()..].trim();
            if feature.is_empty() || value.is_empty() {
                break;
            }
            let expr = parse_featexpr(value, line)?;
            return Ok(FeatSpec { feature, cmp, expr });
        }
    }
    Err(GenError::Malformed {
        line,
        message: format!("bad feature constraint {part:?}"),
    })
}

fn parse_featexpr(value: &str, line: usize) -> Result<FeatExpr, GenError> {
    if let Some(var) = value.strip_prefix('$') {
        // $V, $V-1, $V+2
        for (i, c) in var.char_indices() {
            if c == '-' || c == '+' {
                let name = &var[..i];
                let off: i64 = var[i..].parse().map_err(|_| GenError::Malformed {
                    line,
                    message: format!("bad offset in {value:?}"),
                })?;
                return Ok(FeatExpr::Var(name.to_string(), off));
            }
        }
        Ok(FeatExpr::Var(var.to_string(), 0))
    } else {
        Ok(FeatExpr::Lit(FeatVal::parse(value)))
    }
}

fn parse_string_template(
    src: &str,
    line: usize,
) -> Result<(Vec<StrItem>, Vec<SlotDef>), GenError> {
    let mut items = Vec::new();
    let mut slots: Vec<SlotDef> = Vec::new();
    for token in src.split_whitespace() {
        if let Some(inner) = token.strip_prefix('<').and_then(|t| t.strip_suffix('>')) {
            if let Some(boundref) = inner.strip_prefix('@') {
                let (key, form) = match boundref.split_once(':') {
                    None => (boundref, BoundForm::Word),
                    Some((k, "acc")) => (k, BoundForm::Accusative),
                    Some((k, "pron3")) => (k, BoundForm::Pron3),
                    Some((_, other)) => {
                        return Err(GenError::Malformed {
                            line,
                            message: format!("unknown bound form {other:?}"),
                        })
                    }
                };
                items.push(StrItem::Bound {
                    key: key.to_string(),
                    form,
                });
            } else {
                let (slot_part, bind) = match inner.split_once("!bind=") {
                    None => (inner, None),
                    Some((s, b)) => (s, Some(b.to_string())),
                };
                let (idx, sym) = slot_part.split_once(':').ok_or_else(|| GenError::Malformed {
                    line,
                    message: format!("slot {token:?} needs <index:Symbol>"),
                })?;
                let index: usize = idx.parse().map_err(|_| GenError::Malformed {
                    line,
                    message: format!("bad slot index in {token:?}"),
                })?;
                let (symbol, specs) = parse_symbol_with_specs(sym, line)?;
                items.push(StrItem::Slot(index));
                slots.push(SlotDef {
                    index,
                    symbol,
                    specs,
                    bind,
                });
            }
        } else {
            items.push(StrItem::Terminal(token.to_string()));
        }
    }
    slots.sort_by_key(|s| s.index);
    for (i, s) in slots.iter().enumerate() {
        if s.index != i + 1 {
            return Err(GenError::Malformed {
                line,
                message: format!("slot indices must be 1..n without gaps (found {})", s.index),
            });
        }
    }
    Ok((items, slots))
}

/// Tokenizer for graph templates.
fn template_tokens(src: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    let mut chars = src.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '(' | ')' => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
                tokens.push(c.to_string());
            }
            '^' => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
                tokens.push("^".to_string());
            }
            '"' => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
                let mut s = String::from("\"");
                for c in chars.by_ref() {
                    s.push(c);
                    if c == '"' {
                        break;
                    }
                }
                tokens.push(s);
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
            }
            _ => cur.push(c),
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    tokens
}

fn parse_graph_template(src: &str, line: usize) -> Result<Vec<TElement>, GenError> {
    let tokens = template_tokens(src);
    let mut pos = 0;
    let mut elements = Vec::new();
    while pos < tokens.len() {
        let (el, next) = parse_telement(&tokens, pos, line)?;
        elements.push(el);
        pos = next;
    }
    Ok(elements)
}

fn parse_telement(tokens: &[String], pos: usize, line: usize) -> Result<(TElement, usize), GenError> {
    let malformed = |message: String| GenError::Malformed { line, message };
    let mut pos = pos;
    let mut root_marker = false;
    if tokens.get(pos).map(String::as_str) == Some("^") {
        root_marker = true;
        pos += 1;
    }
    match tokens.get(pos).map(String::as_str) {
        Some("(") => {
            let (node, next) = parse_tnode(tokens, pos, line, root_marker)?;
            Ok((TElement::Node(node), next))
        }
        Some(tok) if tok.starts_with('<') => {
            if root_marker {
                return Err(malformed("^ applies to nodes, not slot splices".into()));
            }
            let idx = parse_slot_ref(tok, line)?;
            Ok((TElement::Slot(idx), pos + 1))
        }
        other => Err(malformed(format!("unexpected template token {other:?}"))),
    }
}

fn parse_slot_ref(tok: &str, line: usize) -> Result<usize, GenError> {
    tok.strip_prefix('<')
        .and_then(|t| t.strip_suffix('>'))
        .and_then(|t| t.parse::<usize>().ok())
        .ok_or_else(|| GenError::Malformed {
            line,
            message: format!("bad slot reference {tok:?}"),
        })
}

fn parse_tnode(
    tokens: &[String],
    pos: usize,
    line: usize,
    root_marker: bool,
) -> Result<(TNode, usize), GenError> {
    let malformed = |message: String| GenError::Malformed { line, message };
    debug_assert_eq!(tokens[pos], "(");
    let mut pos = pos + 1;
    let head_tok = tokens.get(pos).ok_or_else(|| malformed("unterminated node".into()))?;
    let head = if head_tok.starts_with('<') {
        THead::Slot(parse_slot_ref(head_tok, line)?)
    } else {
        THead::Concept(head_tok.clone())
    };
    pos += 1;
    let mut children = Vec::new();
    loop {
        match tokens.get(pos).map(String::as_str) {
            Some(")") => {
                pos += 1;
                break;
            }
            Some(role_tok) if role_tok.starts_with(':') => {
                pos += 1;
                let (role, mode) = if role_tok == ":op#*" {
                    ("op".to_string(), RoleMode::OpIndexed)
                } else if let Some(r) = role_tok.strip_suffix('*') {
                    (r[1..].to_string(), RoleMode::Spread)
                } else {
                    (role_tok[1..].to_string(), RoleMode::Single)
                };
                if role.is_empty() {
                    return Err(malformed(format!("empty role in {role_tok:?}")));
                }
                let child_tok = tokens
                    .get(pos)
                    .ok_or_else(|| malformed("role without child".into()))?;
                let child = match child_tok.as_str() {
                    "(" => {
                        let (node, next) = parse_tnode(tokens, pos, line, false)?;
                        pos = next;
                        TChild::Node(node)
                    }
                    tok if tok.starts_with("<@") => {
                        let key = tok
                            .strip_prefix("<@")
                            .and_then(|t| t.strip_suffix('>'))
                            .ok_or_else(|| malformed(format!("bad bound ref {tok:?}")))?;
                        pos += 1;
                        TChild::Bound(key.to_string())
                    }
                    tok if tok.starts_with('<') => {
                        let idx = parse_slot_ref(tok, line)?;
                        pos += 1;
                        TChild::Slot(idx)
                    }
                    tok if tok.starts_with('"') => {
                        let text = tok.trim_matches('"').to_string();
                        pos += 1;
                        TChild::Const(ConstantValue::string(text))
                    }
                    tok => {
                        let value = ConstantValue::symbol_or_number(tok);
                        pos += 1;
                        TChild::Const(value)
                    }
                };
                children.push((TRole { role, mode }, child));
            }
            other => return Err(malformed(format!("unexpected token {other:?} in node"))),
        }
    }
    Ok((
        TNode {
            head,
            children,
            root_marker,
        },
        pos,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_small_grammar() {
        let g = Grammar::parse(
            r#"
# toy
start CP
lex Subj "the lawyer" label=lawyer num=sg
lex Subj "you" label=you acc=you
lex CPV "said" label=say-01 w=2
rule CP[d=$D,d>0] w=2
  str: <1:Subj> <2:CPV> that <3:CP[d=$D-1]>
  graph: (<2> :ARG0 <1> :ARG1 <3>)
rule CP[d=0]
  str: <1:Subj> <2:CPV>
  graph: (<2> :ARG0 <1>)
"#,
        )
        .unwrap();
        assert_eq!(g.start, "CP");
        assert_eq!(g.rules.len(), 2);
        assert_eq!(g.lexicon.len(), 3);
        assert_eq!(g.rules[0].slots.len(), 3);
        assert_eq!(g.rules[0].weight, 2.0);
        assert!(matches!(g.rules[0].constraints[1].cmp, Cmp::Gt));
        let slot3 = &g.rules[0].slots[2];
        assert_eq!(slot3.symbol, "CP");
        assert_eq!(slot3.specs[0].expr, FeatExpr::Var("D".into(), -1));
    }

    #[test]
    fn parses_lex_graph_fragments() {
        let g = Grammar::parse(
            r#"start S
lex Item "98 rats" label=rat graph="(r / rat :quant 98)"
rule S[]
  str: <1:Item>
  graph: <1>
"#,
        )
        .unwrap();
        let item = &g.lexicon[0];
        assert_eq!(item.label.as_deref(), Some("rat"));
        assert_eq!(item.graph.as_ref().unwrap().attributes().len(), 1);
    }

    #[test]
    fn parses_bindings_and_bound_refs() {
        let g = Grammar::parse(
            r#"start S
lex GN "doctor" label=doctor
lex TV "hated" label=hate-01
rule S[]
  str: the <1:GN!bind=ante> <2:TV> <@ante:pron3> , the <@ante>
  graph: (<2> :ARG0 <1> :ARG1 <@ante>)
"#,
        )
        .unwrap();
        let rule = &g.rules[0];
        assert_eq!(rule.slots[0].bind.as_deref(), Some("ante"));
        assert!(rule
            .string_items
            .iter()
            .any(|i| matches!(i, StrItem::Bound { form: BoundForm::Pron3, .. })));
    }

    #[test]
    fn parses_spread_and_op_indexed_roles() {
        let g = Grammar::parse(
            r#"start S
lex Item "fish" label=fish
rule S[n=$N]
  str: please buy <1:Item>
  graph: (buy-01 :mode imperative :ARG0 (you) :ARG1 (and :op#* <1>)) ^(extra :mod* <1>)
"#,
        )
        .unwrap();
        let template = &g.rules[0].template;
        assert_eq!(template.len(), 2);
        match &template[0] {
            TElement::Node(n) => {
                assert!(!n.root_marker);
                assert_eq!(n.children.len(), 3);
                assert!(matches!(n.children[0].1, TChild::Const(_)));
            }
            _ => panic!("expected node"),
        }
        match &template[1] {
            TElement::Node(n) => {
                assert!(n.root_marker);
                assert!(matches!(n.children[0].0.mode, RoleMode::Spread));
            }
            _ => panic!("expected node"),
        }
    }

    #[test]
    fn rejects_gapped_slots() {
        let err = Grammar::parse(
            r#"start S
rule S[]
  str: <2:X>
  graph: <2>
"#,
        );
        assert!(err.is_err());
    }
}
