//! Constrained sampling from a synchronous grammar: weighted rule choice,
//! feature agreement, no-repeat lexical constraints and a derivation-scoped
//! binding environment that turns re-mentions into reentrancies.

use std::collections::{BTreeMap, BTreeSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::rule::{
    BoundForm, Cmp, FeatExpr, FeatSpec, FeatVal, GenError, Grammar, RoleMode, StrItem, SyncRule,
    TChild, TElement, THead, TNode,
};
use crate::graph::{AmrGraph, ConceptLabel, GraphBuilder, VarId};

pub type Env = BTreeMap<String, FeatVal>;

#[derive(Debug, Clone)]
struct Binding {
    root: VarId,
    word: String,
    acc: Option<String>,
}

/// Lexical choices forced for coverage enumeration (sanity splits): the
/// first matching expansion of each class uses the given lexicon entry.
#[derive(Debug, Clone, Default)]
pub struct Forced {
    assignments: Vec<(String, usize)>,
}

impl Forced {
    pub fn new(assignments: Vec<(String, usize)>) -> Self {
        Forced { assignments }
    }

    fn take(&mut self, class: &str) -> Option<usize> {
        let pos = self.assignments.iter().position(|(c, _)| c == class)?;
        Some(self.assignments.remove(pos).1)
    }
}

#[derive(Debug, Clone)]
pub struct BindingRecord {
    pub key: String,
    pub var_name: String,
    /// Graph re-mentions produced through the binding or repeated slot
    /// references in templates.
    pub mentions: usize,
}

#[derive(Debug)]
pub struct Derivation {
    pub sentence: String,
    pub graph: AmrGraph,
    pub bindings: Vec<BindingRecord>,
}

struct Ctx<'g> {
    grammar: &'g Grammar,
    builder: GraphBuilder,
    rng: ChaCha8Rng,
    no_repeat: BTreeSet<String>,
    used_labels: BTreeSet<String>,
    forced: Forced,
    root_override: Option<VarId>,
    binding_order: Vec<String>,
    binding_mentions: BTreeMap<String, usize>,
    binding_vars: BTreeMap<String, VarId>,
}

struct Derived {
    tokens: Vec<String>,
    roots: Vec<VarId>,
    lex_word: Option<(String, Option<String>)>,
}

/// Samples one entry from the grammar. Deterministic given the seed;
/// failed attempts (dead ends under the constraints) advance the seed and
/// retry up to `max_attempts` times.
pub fn derive(
    grammar: &Grammar,
    start: &str,
    features: &Env,
    seed: u64,
    no_repeat: &BTreeSet<String>,
    forced: Forced,
    max_attempts: usize,
) -> Result<Derivation, GenError> {
    let mut last_err = String::from("no attempts made");
    for attempt in 0..max_attempts.max(1) {
        let mut ctx = Ctx {
            grammar,
            builder: GraphBuilder::new(),
            rng: ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64)),
            no_repeat: no_repeat.clone(),
            used_labels: BTreeSet::new(),
            forced: forced.clone(),
            root_override: None,
            binding_order: Vec::new(),
            binding_mentions: BTreeMap::new(),
            binding_vars: BTreeMap::new(),
        };
        match try_derive(&mut ctx, start, features) {
            Ok(derivation) => return Ok(derivation),
            Err(e) => last_err = e.to_string(),
        }
    }
    Err(GenError::Unsatisfiable {
        attempts: max_attempts,
        last: last_err,
    })
}

fn try_derive(ctx: &mut Ctx, start: &str, features: &Env) -> Result<Derivation, GenError> {
    let env: BTreeMap<String, Binding> = BTreeMap::new();
    let derived = expand(ctx, start, features, &env)?;
    if derived.roots.is_empty() {
        return Err(GenError::EmptySlot(0));
    }
    let root = ctx.root_override.unwrap_or(derived.roots[0]);
    ctx.builder.set_root(root);
    let builder = std::mem::take(&mut ctx.builder);
    let graph = builder.finish()?;
    let sentence = finish_sentence(&derived.tokens);
    let bindings = ctx
        .binding_order
        .iter()
        .map(|key| BindingRecord {
            key: key.clone(),
            var_name: graph.var_name(ctx.binding_vars[key]).to_string(),
            mentions: ctx.binding_mentions.get(key).copied().unwrap_or(0),
        })
        .collect();
    Ok(Derivation {
        sentence,
        graph,
        bindings,
    })
}

/// Sentence post-processing: token join, comma attachment, a/an
/// agreement, capitalization, terminal period.
fn finish_sentence(tokens: &[String]) -> String {
    let mut words: Vec<String> = Vec::new();
    for tok in tokens {
        if tok == "," {
            if let Some(last) = words.last_mut() {
                last.push(',');
                continue;
            }
        }
        words.push(tok.clone());
    }
    for i in 0..words.len() {
        if words[i] == "a" || words[i] == "an" {
            if let Some(next) = words.get(i + 1) {
                let vowel = next
                    .chars()
                    .next()
                    .map(|c| "aeiouAEIOU".contains(c))
                    .unwrap_or(false);
                words[i] = if vowel { "an".into() } else { "a".into() };
            }
        }
    }
    let mut s = words.join(" ");
    if let Some(first) = s.chars().next() {
        if first.is_ascii_lowercase() {
            s = format!("{}{}", first.to_ascii_uppercase(), &s[1..]);
        }
    }
    if !s.ends_with(['.', '!', '?']) {
        s.push('.');
    }
    s
}

fn expand(
    ctx: &mut Ctx,
    symbol: &str,
    features: &Env,
    env: &BTreeMap<String, Binding>,
) -> Result<Derived, GenError> {
    if ctx.grammar.is_lex_class(symbol) {
        let idx = choose_lex(ctx, symbol, features, &[])?;
        return realize_lex(ctx, idx);
    }
    let rule = choose_rule(ctx, symbol, features)?;
    let mut var_env: Env = features.clone();
    for spec in &rule.constraints {
        bind_spec(spec, features.get(&spec.feature), &mut var_env);
    }

    let mut slot_results: Vec<Derived> = Vec::new();
    let mut local_env = env.clone();
    for slot in &rule.slots {
        // Evaluate the slot's feature specs under variables bound so far.
        let mut down = Env::new();
        let mut guards: Vec<(String, Cmp, FeatVal)> = Vec::new();
        let mut bind_vars: Vec<(String, String)> = Vec::new(); // (feature, var)
        for spec in &slot.specs {
            match (&spec.cmp, &spec.expr) {
                (Cmp::Eq, FeatExpr::Var(v, 0)) if !var_env.contains_key(v) => {
                    bind_vars.push((spec.feature.clone(), v.clone()));
                }
                (_, expr) => {
                    let value = eval_expr(expr, &var_env).ok_or_else(|| {
                        GenError::NoApplicableRule {
                            symbol: slot.symbol.clone(),
                            features: format!("unbound variable in {expr:?}"),
                        }
                    })?;
                    if spec.cmp == Cmp::Eq {
                        down.insert(spec.feature.clone(), value);
                    } else {
                        guards.push((spec.feature.clone(), spec.cmp, value));
                    }
                }
            }
        }

        let derived = if ctx.grammar.is_lex_class(&slot.symbol) {
            let entry_idx = choose_lex(ctx, &slot.symbol, &down, &guards)?;
            for (feature, var) in &bind_vars {
                if let Some(v) = ctx.grammar.lexicon[entry_idx].features.get(feature) {
                    var_env.insert(var.clone(), v.clone());
                }
            }
            realize_lex(ctx, entry_idx)?
        } else {
            if !bind_vars.is_empty() || !guards.is_empty() {
                return Err(GenError::NoApplicableRule {
                    symbol: slot.symbol.clone(),
                    features: "binding variables and guards require a lexical slot".into(),
                });
            }
            expand(ctx, &slot.symbol, &down, &local_env)?
        };

        if let Some(key) = &slot.bind {
            let root = *derived.roots.first().ok_or(GenError::EmptySlot(slot.index))?;
            let (word, acc) = match &derived.lex_word {
                Some((w, a)) => (w.clone(), a.clone()),
                None => (derived.tokens.join(" "), None),
            };
            local_env.insert(key.clone(), Binding { root, word, acc });
            if !ctx.binding_vars.contains_key(key) {
                ctx.binding_order.push(key.clone());
            }
            ctx.binding_vars.insert(key.clone(), root);
        }
        slot_results.push(derived);
    }

    // String assembly. String re-mentions resolve against the local
    // environment (entry bindings plus this rule's own), while graph
    // templates use the entry environment only: a rule that rebinds a key
    // still wires its own edges to the outer referent.
    let mut tokens = Vec::new();
    for item in &rule.string_items {
        match item {
            StrItem::Terminal(t) => tokens.push(t.clone()),
            StrItem::Slot(k) => tokens.extend(slot_results[*k - 1].tokens.iter().cloned()),
            StrItem::Bound { key, form } => {
                let binding = local_env
                    .get(key)
                    .ok_or_else(|| GenError::UnboundKey(key.clone()))?;
                let word = match form {
                    BoundForm::Word => binding.word.clone(),
                    BoundForm::Accusative => {
                        binding.acc.clone().unwrap_or_else(|| binding.word.clone())
                    }
                    BoundForm::Pron3 => {
                        if ctx.rng.gen_bool(0.5) {
                            "him".to_string()
                        } else {
                            "her".to_string()
                        }
                    }
                };
                tokens.push(word);
            }
        }
    }

    // Graph assembly. `used[k]` counts roots consumed from slot k; a
    // single-role attachment takes the first root (repeats re-mention it)
    // and any remaining roots bubble into this rule's bundle.
    let mut used: Vec<usize> = vec![0; slot_results.len()];
    let mut roots: Vec<VarId> = Vec::new();
    for element in &rule.template {
        match element {
            TElement::Slot(k) => {
                roots.extend(slot_results[*k - 1].roots.iter().copied());
                used[*k - 1] = slot_results[*k - 1].roots.len();
            }
            TElement::Node(node) => {
                let id = instantiate(ctx, node, &slot_results, &mut used, env)?;
                roots.push(id);
            }
        }
    }
    for (i, res) in slot_results.iter().enumerate() {
        if used[i] < res.roots.len() {
            roots.extend(res.roots[used[i]..].iter().copied());
        }
    }

    Ok(Derived {
        tokens,
        roots,
        lex_word: None,
    })
}

fn instantiate(
    ctx: &mut Ctx,
    node: &TNode,
    slots: &[Derived],
    used: &mut [usize],
    env: &BTreeMap<String, Binding>,
) -> Result<VarId, GenError> {
    let head = match &node.head {
        THead::Concept(c) => ctx.builder.add_fresh(ConceptLabel::parse(c)),
        THead::Slot(k) => {
            let first = *slots[*k - 1].roots.first().ok_or(GenError::EmptySlot(*k))?;
            used[*k - 1] = used[*k - 1].max(1);
            first
        }
    };
    if node.root_marker {
        ctx.root_override = Some(head);
    }
    let mut op_counter = 0usize;
    for (role, child) in &node.children {
        match child {
            TChild::Const(value) => {
                ctx.builder.add_attribute(head, &role.role, value.clone())?;
            }
            TChild::Bound(key) => {
                let binding = env.get(key).ok_or_else(|| GenError::UnboundKey(key.clone()))?;
                ctx.builder.add_relation(head, &role.role, binding.root)?;
                *ctx.binding_mentions.entry(key.clone()).or_insert(0) += 1;
            }
            TChild::Node(sub) => {
                let target = instantiate(ctx, sub, slots, used, env)?;
                ctx.builder.add_relation(head, &role.role, target)?;
            }
            TChild::Slot(k) => {
                let res = &slots[*k - 1];
                if res.roots.is_empty() {
                    return Err(GenError::EmptySlot(*k));
                }
                match role.mode {
                    RoleMode::Single => {
                        ctx.builder.add_relation(head, &role.role, res.roots[0])?;
                        used[*k - 1] = used[*k - 1].max(1);
                    }
                    RoleMode::Spread => {
                        for &r in &res.roots {
                            ctx.builder.add_relation(head, &role.role, r)?;
                        }
                        used[*k - 1] = res.roots.len();
                    }
                    RoleMode::OpIndexed => {
                        for &r in &res.roots {
                            op_counter += 1;
                            let role_name = format!("op{op_counter}");
                            ctx.builder.add_relation(head, &role_name, r)?;
                        }
                        used[*k - 1] = res.roots.len();
                    }
                }
            }
        }
    }
    Ok(head)
}

fn choose_rule<'g>(
    ctx: &mut Ctx<'g>,
    symbol: &str,
    features: &Env,
) -> Result<&'g SyncRule, GenError> {
    let candidates: Vec<&'g SyncRule> = ctx
        .grammar
        .rules
        .iter()
        .filter(|r| r.lhs == symbol && constraints_hold(&r.constraints, features))
        .collect();
    if candidates.is_empty() {
        if !ctx.grammar.rules.iter().any(|r| r.lhs == symbol) {
            return Err(GenError::UnknownSymbol(symbol.to_string()));
        }
        return Err(GenError::NoApplicableRule {
            symbol: symbol.to_string(),
            features: format!("{features:?}"),
        });
    }
    let weights: Vec<f64> = candidates.iter().map(|r| r.weight).collect();
    let pos = weighted_index(&mut ctx.rng, &weights);
    Ok(candidates[pos])
}

fn choose_lex(
    ctx: &mut Ctx,
    class: &str,
    required: &Env,
    guards: &[(String, Cmp, FeatVal)],
) -> Result<usize, GenError> {
    let forced = ctx.forced.take(class);
    let no_repeat = ctx.no_repeat.contains(class);
    let candidates: Vec<usize> = ctx
        .grammar
        .lex_indices(class)
        .into_iter()
        .filter(|&i| {
            let entry = &ctx.grammar.lexicon[i];
            let feats_ok = required
                .iter()
                .all(|(f, v)| entry.features.get(f) == Some(v))
                && guards.iter().all(|(f, cmp, v)| {
                    entry
                        .features
                        .get(f)
                        .map(|ev| compare(ev, *cmp, v))
                        .unwrap_or(false)
                });
            let repeat_ok = !no_repeat
                || entry
                    .label
                    .as_ref()
                    .map(|l| !ctx.used_labels.contains(l))
                    .unwrap_or(true);
            feats_ok && repeat_ok
        })
        .collect();
    if candidates.is_empty() {
        return Err(GenError::LexExhausted(class.to_string()));
    }
    let chosen = match forced {
        Some(idx) => {
            if !candidates.contains(&idx) {
                return Err(GenError::LexExhausted(format!(
                    "{class} (forced entry unavailable)"
                )));
            }
            idx
        }
        None => {
            let weights: Vec<f64> = candidates
                .iter()
                .map(|&i| ctx.grammar.lexicon[i].weight)
                .collect();
            candidates[weighted_index(&mut ctx.rng, &weights)]
        }
    };
    if no_repeat {
        if let Some(label) = &ctx.grammar.lexicon[chosen].label {
            ctx.used_labels.insert(label.clone());
        }
    }
    Ok(chosen)
}

fn realize_lex(ctx: &mut Ctx, entry_idx: usize) -> Result<Derived, GenError> {
    let entry = &ctx.grammar.lexicon[entry_idx];
    let tokens: Vec<String> = entry.word.split_whitespace().map(String::from).collect();
    let word = entry.word.clone();
    let acc = entry.acc.clone();
    let roots = match (entry.graph.clone(), entry.label.clone()) {
        (Some(fragment), _) => vec![splice_fragment(&mut ctx.builder, &fragment)?],
        (None, Some(label)) => vec![ctx.builder.add_fresh(ConceptLabel::parse(&label))],
        (None, None) => Vec::new(),
    };
    Ok(Derived {
        tokens,
        roots,
        lex_word: Some((word, acc)),
    })
}

/// Copies a lexical Penman fragment into the derivation's builder with
/// fresh variables; returns the new root.
fn splice_fragment(builder: &mut GraphBuilder, fragment: &AmrGraph) -> Result<VarId, GenError> {
    let mut map = Vec::with_capacity(fragment.len());
    for v in fragment.var_ids() {
        map.push(builder.add_fresh(fragment.concept(v).clone()));
    }
    for r in fragment.relations() {
        builder.add_relation(map[r.source.0], &r.role, map[r.target.0])?;
    }
    for a in fragment.attributes() {
        builder.add_attribute(map[a.source.0], &a.role, a.value.clone())?;
    }
    Ok(map[fragment.root().0])
}

fn constraints_hold(constraints: &[FeatSpec], features: &Env) -> bool {
    let mut bound: Env = Env::new();
    for spec in constraints {
        let actual = match features.get(&spec.feature) {
            Some(v) => v,
            None => return false,
        };
        match (&spec.cmp, &spec.expr) {
            (Cmp::Eq, FeatExpr::Var(v, 0)) => {
                if let Some(prev) = bound.get(v) {
                    if prev != actual {
                        return false;
                    }
                } else {
                    bound.insert(v.clone(), actual.clone());
                }
            }
            (cmp, expr) => {
                let expected = match eval_expr(expr, &bound).or_else(|| eval_expr(expr, features)) {
                    Some(v) => v,
                    None => return false,
                };
                if !compare(actual, *cmp, &expected) {
                    return false;
                }
            }
        }
    }
    true
}

fn bind_spec(spec: &FeatSpec, actual: Option<&FeatVal>, var_env: &mut Env) {
    if let (Cmp::Eq, FeatExpr::Var(v, 0)) = (&spec.cmp, &spec.expr) {
        if let Some(value) = actual {
            var_env.insert(v.clone(), value.clone());
        }
    }
}

fn eval_expr(expr: &FeatExpr, env: &Env) -> Option<FeatVal> {
    match expr {
        FeatExpr::Lit(v) => Some(v.clone()),
        FeatExpr::Var(name, offset) => {
            let value = env.get(name)?;
            if *offset == 0 {
                Some(value.clone())
            } else {
                value.as_int().map(|i| FeatVal::Int(i + offset))
            }
        }
    }
}

fn compare(actual: &FeatVal, cmp: Cmp, expected: &FeatVal) -> bool {
    match cmp {
        Cmp::Eq => actual == expected,
        _ => match (actual.as_int(), expected.as_int()) {
            (Some(a), Some(e)) => match cmp {
                Cmp::Gt => a > e,
                Cmp::Ge => a >= e,
                Cmp::Lt => a < e,
                Cmp::Le => a <= e,
                Cmp::Eq => unreachable!(),
            },
            _ => false,
        },
    }
}

fn weighted_index(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return 0;
    }
    let mut target = rng.gen_range(0.0..total);
    for (i, w) in weights.iter().enumerate() {
        target -= w;
        if target <= 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_grammar() -> Grammar {
        Grammar::parse(
            r#"start CP
lex Subj "the lawyer" label=lawyer
lex Subj "the doctor" label=doctor
lex Subj "you" label=you acc=you
lex CPV "said" label=say-01
lex CPV "knew" label=know-01
lex IV "left" label=leave-01
lex IV "slept" label=sleep-01
rule CP[d=$D,d>0]
  str: <1:Subj> <2:CPV> that <3:CP[d=$D-1]>
  graph: (<2> :ARG0 <1> :ARG1 <3>)
rule CP[d=0]
  str: <1:Subj> <2:IV>
  graph: (<2> :ARG0 <1>)
"#,
        )
        .unwrap()
    }

    fn feats(pairs: &[(&str, i64)]) -> Env {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), FeatVal::Int(*v)))
            .collect()
    }

    #[test]
    fn derives_a_depth_two_chain() {
        let g = toy_grammar();
        let no_repeat: BTreeSet<String> = ["Subj".to_string()].into();
        let d = derive(&g, "CP", &feats(&[("d", 2)]), 11, &no_repeat, Forced::default(), 20)
            .unwrap();
        assert_eq!(d.sentence.matches("that").count(), 2);
        assert!(d.sentence.ends_with('.'));
        // 2 CP verbs + 1 intransitive + 3 subjects.
        assert_eq!(d.graph.len(), 6);
        let arg1 = d.graph.relations().iter().filter(|r| r.role == "ARG1").count();
        assert_eq!(arg1, 2);
    }

    #[test]
    fn determinism_and_no_repeat() {
        let g = toy_grammar();
        let no_repeat: BTreeSet<String> = ["Subj".to_string()].into();
        let a = derive(&g, "CP", &feats(&[("d", 2)]), 5, &no_repeat, Forced::default(), 20).unwrap();
        let b = derive(&g, "CP", &feats(&[("d", 2)]), 5, &no_repeat, Forced::default(), 20).unwrap();
        assert_eq!(a.sentence, b.sentence);
        // Only three subjects exist, so depth 3 (4 subjects) must fail.
        let err = derive(&g, "CP", &feats(&[("d", 3)]), 5, &no_repeat, Forced::default(), 5);
        assert!(err.is_err());
    }

    #[test]
    fn forced_choice_controls_first_lex() {
        let g = toy_grammar();
        let no_repeat = BTreeSet::new();
        let idx = g
            .lexicon
            .iter()
            .position(|l| l.word == "the doctor")
            .unwrap();
        let d = derive(
            &g,
            "CP",
            &feats(&[("d", 0)]),
            3,
            &no_repeat,
            Forced::new(vec![("Subj".into(), idx)]),
            20,
        )
        .unwrap();
        assert!(d.sentence.starts_with("The doctor"));
    }

    #[test]
    fn bindings_create_reentrancies() {
        let g = Grammar::parse(
            r#"start S
lex N "boy" label=boy
lex CVS "wanted" label=want-01
lex V "jump" label=jump-01
rule S[]
  str: the <1:N!bind=subj> <2:Chain>
  graph: <2>
rule Chain[]
  str: <1:CVS> to <2:V>
  graph: (<1> :ARG0 <@subj> :ARG1 (<2> :ARG0 <@subj>))
"#,
        )
        .unwrap();
        let d = derive(&g, "S", &Env::new(), 1, &BTreeSet::new(), Forced::default(), 10).unwrap();
        assert_eq!(d.sentence, "The boy wanted to jump.");
        let boy = d.graph.var_by_name(&d.bindings[0].var_name).unwrap();
        assert_eq!(d.graph.incoming_count(boy), 2);
        assert_eq!(d.bindings[0].mentions, 2);
    }

    #[test]
    fn bubbled_roots_survive_single_attachment() {
        // The inner rule returns two roots; the outer attaches the first
        // and the second must bubble up into the final bundle.
        let g = Grammar::parse(
            r#"start S
lex N "girl" label=girl
lex TV "liked" label=like-01
lex MV "hated" label=hate-01
rule S[]
  str: <1:Inner>
  graph: (say-01 :ARG1 <1>)
rule Inner[]
  str: <1:TV> and <2:MV>
  graph: (<1> :ARG1 (thing)) ^(<2> :ARG1 (stuff))
"#,
        )
        .unwrap();
        let d = derive(&g, "S", &Env::new(), 1, &BTreeSet::new(), Forced::default(), 10).unwrap();
        // say-01, like-01, thing, hate-01, stuff
        assert_eq!(d.graph.len(), 5);
        // Root marker from the bubbled node wins.
        assert_eq!(d.graph.concept(d.graph.root()).full(), "hate-01");
    }

    #[test]
    fn op_indexed_attachment() {
        let g = Grammar::parse(
            r#"start S
lex Item "fish" label=fish
lex Item "coal" label=coal
lex Item "soap" label=soap
rule S[n=$N]
  str: please buy <1:Items[n=$N]>
  graph: (buy-01 :mode imperative :ARG0 (you) :ARG1 (and :op#* <1>))
rule Items[n=$N,n>2]
  str: <1:Item> , <2:Items[n=$N-1]>
  graph: <1> <2>
rule Items[n=2]
  str: <1:Item> and <2:Item>
  graph: <1> <2>
"#,
        )
        .unwrap();
        let no_repeat: BTreeSet<String> = ["Item".to_string()].into();
        let d = derive(&g, "S", &feats(&[("n", 3)]), 9, &no_repeat, Forced::default(), 20).unwrap();
        for i in 1..=3 {
            assert!(
                d.graph.relations().iter().any(|r| r.role == format!("op{i}")),
                "missing op{i}"
            );
        }
        assert!(d.sentence.starts_with("Please buy "));
        assert!(d.sentence.contains(" and "));
        assert!(d.sentence.contains(','));
    }
}
