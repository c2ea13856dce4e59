//! The PP-attachment corpus: every template row instantiated over its
//! verb/object/modifier inventories, each sentence paired with its gold
//! attachment edge and the accepted reification alternatives.

use std::collections::BTreeMap;

use super::categories::{GeneratedCorpus, GeneratedEntry};
use super::rule::GenError;
use crate::graph::{parse_penman, AmrGraph, ConceptLabel, CorpusEntry, GraphBuilder, VarId};
use crate::metrics::{AnnotationRow, MetricKind, MetricSpec, ReificationTable, Role};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Attach {
    /// Modifier hangs under the object's node.
    Np,
    /// Modifier hangs under the verb's node.
    Vp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Dir {
    /// Edge runs head -> modifier (`ambition :topic mathematics`).
    HeadToMod,
    /// Edge runs modifier -> head (`telescope :poss journalist`).
    ModToHead,
}

struct Verb {
    surface: &'static str,
    label: &'static str,
    obj_role: &'static str,
}

struct Modifier {
    surface: &'static str,
    frag: &'static str,
    attach: Attach,
    role: &'static str,
    dir: Dir,
    reified: bool,
}

struct Template {
    verbs: &'static [Verb],
    objects: &'static [(&'static str, &'static str)], // (surface, fragment)
    prep: &'static str,
    modifiers: &'static [Modifier],
    /// How many of this template's cross product the shipped corpus
    /// takes (evenly spread over the enumeration).
    quota: usize,
}

const fn verb(surface: &'static str, label: &'static str) -> Verb {
    Verb {
        surface,
        label,
        obj_role: "ARG1",
    }
}

const fn np(surface: &'static str, frag: &'static str, role: &'static str) -> Modifier {
    Modifier {
        surface,
        frag,
        attach: Attach::Np,
        role,
        dir: Dir::HeadToMod,
        reified: true,
    }
}

const fn vp(surface: &'static str, frag: &'static str, role: &'static str) -> Modifier {
    Modifier {
        surface,
        frag,
        attach: Attach::Vp,
        role,
        dir: Dir::HeadToMod,
        reified: true,
    }
}

const fn np_poss(surface: &'static str, frag: &'static str) -> Modifier {
    Modifier {
        surface,
        frag,
        attach: Attach::Np,
        role: "poss",
        dir: Dir::ModToHead,
        reified: true,
    }
}

const fn vp_core(surface: &'static str, frag: &'static str, role: &'static str) -> Modifier {
    Modifier {
        surface,
        frag,
        attach: Attach::Vp,
        role,
        dir: Dir::HeadToMod,
        reified: false,
    }
}

const TEMPLATES: &[Template] = &[
    // gave up / abandoned + ambitions ... in ...
    Template {
        verbs: &[verb("gave up", "give-up-07"), verb("abandoned", "abandon-01")],
        objects: &[
            ("her ambitions", "(a / ambition)"),
            ("her aspirations", "(a / aspiration)"),
            ("her career", "(c / career)"),
            ("her dreams", "(d / dream)"),
        ],
        prep: "in",
        modifiers: &[
            np("mathematics", "(m / mathematics)", "topic"),
            np("theatre", "(t / theatre)", "topic"),
            np("crime", "(c / crime)", "topic"),
            vp("anger", "(a / anger)", "manner"),
            vp("a fit of despair", "(f / fit :mod (d / despair))", "manner"),
            vp("a moment of clarity", "(m / moment :mod (c / clarity))", "time"),
            vp("the 60s", "(d / date-entity :decade 1960)", "time"),
            vp("july", "(d / date-entity :month 7)", "time"),
            vp("2012", "(d / date-entity :year 2012)", "time"),
            vp("spring", "(d / date-entity :season spring)", "time"),
        ],
        quota: 51,
    },
    // bought / acquired / purchased / picked up + vegetables ... for ...
    Template {
        verbs: &[
            verb("bought", "buy-01"),
            verb("acquired", "acquire-01"),
            verb("purchased", "purchase-01"),
            verb("picked up", "pick-up-04"),
        ],
        objects: &[
            ("onions", "(o / onion)"),
            ("mushrooms", "(m / mushroom)"),
            ("tomatoes", "(t / tomato)"),
            ("carrots", "(c / carrot)"),
        ],
        prep: "for",
        modifiers: &[
            np("the pasta sauce", "(s / sauce :mod (p / pasta))", "purpose"),
            np("the salad", "(s / salad)", "purpose"),
            np("the soup", "(s / soup)", "purpose"),
            vp_core("$5", "(m / monetary-quantity :quant 5 :unit (d / dollar))", "ARG3"),
            vp_core("$10", "(m / monetary-quantity :quant 10 :unit (d / dollar))", "ARG3"),
            vp_core(
                "a few dollars",
                "(m / monetary-quantity :quant (f / few) :unit (d / dollar))",
                "ARG3",
            ),
            vp_core("almost nothing", "(n / nothing :mod (a / almost))", "ARG3"),
            vp_core(
                "an unreasonable amount of money",
                "(a / amount :mod (u / unreasonable) :consist-of (m / money))",
                "ARG3",
            ),
        ],
        quota: 81,
    },
    // has kept + keepsakes ... from places
    Template {
        verbs: &[verb("has kept", "keep-01")],
        objects: &[
            ("this postcard", "(p / postcard)"),
            ("this letter", "(l / letter)"),
            ("this necklace", "(n / necklace)"),
            ("this souvenir", "(s / souvenir)"),
        ],
        prep: "from",
        modifiers: &[
            np("Minsk", r#"(c / city :name (n / name :op1 "Minsk"))"#, "source"),
            np("Munich", r#"(c / city :name (n / name :op1 "Munich"))"#, "source"),
            np("that adventure", "(a / adventure)", "source"),
            np("Haiti", r#"(c / country :name (n / name :op1 "Haiti"))"#, "source"),
        ],
        quota: 10,
    },
    // has kept + information ... from people
    Template {
        verbs: &[verb("has kept", "keep-01")],
        objects: &[
            ("this information", "(i / information)"),
            ("this knowledge", "(k / knowledge)"),
            ("this news", "(n / news)"),
            ("this wisdom", "(w / wisdom)"),
        ],
        prep: "from",
        modifiers: &[
            vp("the children", "(c / child)", "source"),
            vp("Mark", r#"(p / person :name (n / name :op1 "Mark"))"#, "source"),
            vp("the police", "(p / police)", "source"),
            vp("Jenny", r#"(p / person :name (n / name :op1 "Jenny"))"#, "source"),
        ],
        quota: 10,
    },
    // will read / skim / devour + books ... by ...
    Template {
        verbs: &[
            verb("will read", "read-01"),
            verb("will skim", "skim-01"),
            verb("will devour", "devour-01"),
        ],
        objects: &[
            ("this book", "(b / book)"),
            ("this essay", "(e / essay)"),
            ("this novel", "(n / novel)"),
        ],
        prep: "by",
        modifiers: &[
            np(
                "Barack Obama",
                r#"(p / person :name (n / name :op1 "Barack" :op2 "Obama"))"#,
                "author",
            ),
            np(
                "J. K. Rowling",
                r#"(p / person :name (n / name :op1 "J." :op2 "K." :op3 "Rowling"))"#,
                "author",
            ),
            np(
                "Charles Dickens",
                r#"(p / person :name (n / name :op1 "Charles" :op2 "Dickens"))"#,
                "author",
            ),
            np("this young author", "(a / author :mod (y / young))", "author"),
            vp("tomorrow", "(t / tomorrow)", "time"),
            vp("tonight", "(t / tonight)", "time"),
            vp("Monday", "(d / date-entity :weekday (m / monday))", "time"),
            vp("Tuesday", "(d / date-entity :weekday (t / tuesday))", "time"),
            vp("candlelight", "(c / candlelight)", "manner"),
            vp("firelight", "(f / firelight)", "manner"),
            vp("lamplight", "(l / lamplight)", "manner"),
        ],
        quota: 63,
    },
    // saw / looked at / peeked at / observed + people ... with appearance
    Template {
        verbs: &[
            verb("saw", "see-01"),
            verb("looked at", "look-01"),
            verb("peeked at", "peek-01"),
            verb("observed", "observe-01"),
        ],
        objects: &[
            ("the girl", "(g / girl)"),
            ("the stranger", "(s / stranger)"),
            ("the soldier", "(s / soldier)"),
            ("the journalist", "(j / journalist)"),
        ],
        prep: "with",
        modifiers: &[
            np_poss("the hat", "(h / hat)"),
            np_poss("the red T-shirt", "(t / t-shirt :mod (r / red))"),
            np_poss("the weird hair", "(h / hair :mod (w / weird))"),
            np_poss("the large eyebrows", "(e / eyebrow :mod (l / large))"),
        ],
        quota: 41,
    },
    // saw / looked at / peeked at / observed + sights ... with optics
    Template {
        verbs: &[
            verb("saw", "see-01"),
            verb("looked at", "look-01"),
            verb("peeked at", "peek-01"),
            verb("observed", "observe-01"),
        ],
        objects: &[
            ("the northern lights", "(l / light :mod (n / north))"),
            ("the moon", "(m / moon)"),
            ("the rainfall", "(r / rainfall)"),
            ("the army", "(a / army)"),
        ],
        prep: "with",
        modifiers: &[
            vp("the telescope", "(t / telescope)", "instrument"),
            vp("the binoculars", "(b / binoculars)", "instrument"),
            vp("the spyglass", "(s / spyglass)", "instrument"),
        ],
        quota: 31,
    },
    // knew / understood / hated / sang to / addressed + people ... with optics
    Template {
        verbs: &[
            verb("knew", "know-01"),
            verb("understood", "understand-01"),
            verb("hated", "hate-01"),
            Verb {
                surface: "sang to",
                label: "sing-01",
                obj_role: "ARG2",
            },
            verb("addressed", "address-01"),
        ],
        objects: &[
            ("the journalist", "(j / journalist)"),
            ("the girl", "(g / girl)"),
            ("the stranger", "(s / stranger)"),
            ("the soldier", "(s / soldier)"),
        ],
        prep: "with",
        modifiers: &[
            np_poss("the telescope", "(t / telescope)"),
            np_poss("the binoculars", "(b / binoculars)"),
            np_poss("the spyglass", "(s / spyglass)"),
        ],
        quota: 38,
    },
];

const SUBJECTS: &[(&str, &str)] = &[
    ("Sophie", r#"(p / person :name (n / name :op1 "Sophie"))"#),
    ("Kim", r#"(p / person :name (n / name :op1 "Kim"))"#),
    ("my sister", "(s / sister :poss (i / i))"),
    ("the baker", "(b / baker)"),
    ("the man", "(m / man)"),
    ("she", "(s / she)"),
    ("I", "(i / i)"),
];

fn splice(builder: &mut GraphBuilder, fragment: &AmrGraph) -> VarId {
    let mut map = Vec::with_capacity(fragment.len());
    for v in fragment.var_ids() {
        map.push(builder.add_fresh(fragment.concept(v).clone()));
    }
    for r in fragment.relations() {
        builder
            .add_relation(map[r.source.0], &r.role, map[r.target.0])
            .expect("fragment roles are valid");
    }
    for a in fragment.attributes() {
        builder
            .add_attribute(map[a.source.0], &a.role, a.value.clone())
            .expect("fragment roles are valid");
    }
    map[fragment.root().0]
}

/// Builds the shipped PP-attachment corpus: 325 entries, each carrying a
/// main edge check and its endpoints prerequisite. `seed` only shifts
/// which subject each sentence draws; the template coverage is fixed.
pub fn pp_attachment_corpus(seed: u64) -> Result<GeneratedCorpus, GenError> {
    let reifications = ReificationTable::default();
    let mut entries = Vec::new();
    let mut annotations = Vec::new();
    let mut counter = 0usize;

    for template in TEMPLATES {
        let size = template.verbs.len() * template.objects.len() * template.modifiers.len();
        debug_assert!(template.quota <= size);
        let picks: Vec<usize> = (0..template.quota).map(|k| k * size / template.quota).collect();
        let per_obj = template.modifiers.len();
        let per_verb = template.objects.len() * per_obj;
        for &pick in &picks {
            let v = &template.verbs[pick / per_verb];
            let o = &template.objects[(pick % per_verb) / per_obj];
            let m = &template.modifiers[pick % per_obj];
            let subject = &SUBJECTS[(counter + seed as usize) % SUBJECTS.len()];

            let mut builder = GraphBuilder::new();
            let verb_node = builder.add_fresh(ConceptLabel::parse(v.label));
            builder.set_root(verb_node);
            let subj_frag = parse_penman(subject.1)?;
            let subj_root = splice(&mut builder, &subj_frag);
            builder.add_relation(verb_node, "ARG0", subj_root)?;
            let obj_frag = parse_penman(o.1)?;
            let obj_root = splice(&mut builder, &obj_frag);
            builder.add_relation(verb_node, v.obj_role, obj_root)?;
            let mod_frag = parse_penman(m.frag)?;
            let mod_root = splice(&mut builder, &mod_frag);

            let head = match m.attach {
                Attach::Np => obj_root,
                Attach::Vp => verb_node,
            };
            let (src, tgt) = match m.dir {
                Dir::HeadToMod => (head, mod_root),
                Dir::ModToHead => (mod_root, head),
            };
            builder.add_relation(src, m.role, tgt)?;
            let graph = builder.finish()?;

            let sentence = {
                let raw = format!(
                    "{} {} {} {} {}.",
                    subject.0, v.surface, o.0, template.prep, m.surface
                );
                let mut chars = raw.chars();
                match chars.next() {
                    Some(c) if c.is_ascii_lowercase() => {
                        format!("{}{}", c.to_ascii_uppercase(), chars.as_str())
                    }
                    _ => raw,
                }
            };

            let id = format!("pp_attachment_{counter:03}");
            counter += 1;

            let src_label = graph.concept(src).full().to_string();
            let tgt_label = graph.concept(tgt).full().to_string();
            let reifs = if m.reified {
                reifications
                    .for_role(m.role)
                    .into_iter()
                    .cloned()
                    .collect()
            } else {
                Vec::new()
            };
            annotations.push(AnnotationRow {
                entry_id: id.clone(),
                category_id: "pp_attachment".into(),
                spec: MetricSpec {
                    kind: MetricKind::EdgeRecall {
                        source: ConceptLabel::parse(&src_label),
                        role: m.role.to_string(),
                        target: ConceptLabel::parse(&tgt_label),
                        reifications: reifs,
                    },
                    role: Role::Main,
                    sense_sensitive: false,
                    min_occurrences: 1,
                },
            });
            annotations.push(AnnotationRow {
                entry_id: id.clone(),
                category_id: "pp_attachment".into(),
                spec: MetricSpec {
                    kind: MetricKind::EdgeRecall {
                        source: ConceptLabel::parse(&src_label),
                        role: m.role.to_string(),
                        target: ConceptLabel::parse(&tgt_label),
                        reifications: Vec::new(),
                    },
                    role: Role::Prerequisite,
                    sense_sensitive: false,
                    min_occurrences: 1,
                },
            });

            let mut metadata = BTreeMap::new();
            metadata.insert("category".to_string(), "pp_attachment".to_string());
            metadata.insert(
                "attachment".to_string(),
                match m.attach {
                    Attach::Np => "np".to_string(),
                    Attach::Vp => "vp".to_string(),
                },
            );
            entries.push(GeneratedEntry {
                entry: CorpusEntry {
                    id,
                    sentence,
                    graph: Some(graph),
                    metadata,
                },
                depth: 0,
                sanity: false,
                bindings: Vec::new(),
            });
        }
    }
    Ok(GeneratedCorpus {
        entries,
        annotations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{evaluate_check, EvalGraph};

    #[test]
    fn shipped_corpus_has_325_entries() {
        let corpus = pp_attachment_corpus(0).unwrap();
        assert_eq!(corpus.entries.len(), 325);
        // One main and one prerequisite row per entry.
        assert_eq!(corpus.annotations.len(), 650);
        let mains = corpus
            .annotations
            .iter()
            .filter(|r| r.spec.role == Role::Main)
            .count();
        assert_eq!(mains, 325);
    }

    #[test]
    fn telescope_row_checks_the_poss_edge_with_reifications() {
        let corpus = pp_attachment_corpus(0).unwrap();
        let entry = corpus
            .entries
            .iter()
            .find(|e| e.entry.sentence.contains("knew the journalist with the telescope"))
            .expect("template row present");
        let row = corpus
            .annotations
            .iter()
            .find(|r| r.entry_id == entry.entry.id && r.spec.role == Role::Main)
            .unwrap();
        match &row.spec.kind {
            MetricKind::EdgeRecall { source, role, target, reifications } => {
                assert_eq!(source.full(), "telescope");
                assert_eq!(role, "poss");
                assert_eq!(target.full(), "journalist");
                let names: Vec<&str> = reifications.iter().map(|r| r.label.full()).collect();
                assert!(names.contains(&"have-03"));
                assert!(names.contains(&"own-01"));
            }
            other => panic!("expected an edge check, got {other:?}"),
        }
        // The reified paraphrase satisfies the shipped check.
        let reified = parse_penman(
            r#"(k / know-01 :ARG0 (p / person :name (n / name :op1 "Sophie")) :ARG1 (j / journalist :ARG0-of (h / have-03 :ARG1 (t / telescope))))"#,
        )
        .unwrap();
        assert!(evaluate_check(&row.spec, &EvalGraph::new(&reified)));
    }

    #[test]
    fn gold_graphs_pass_their_own_checks() {
        let corpus = pp_attachment_corpus(0).unwrap();
        for entry in corpus.entries.iter().take(40) {
            let eval = EvalGraph::new(entry.entry.graph.as_ref().unwrap());
            for row in corpus
                .annotations
                .iter()
                .filter(|r| r.entry_id == entry.entry.id)
            {
                assert!(
                    evaluate_check(&row.spec, &eval),
                    "{} fails {:?}",
                    entry.entry.sentence,
                    row.spec.role
                );
            }
        }
    }

    #[test]
    fn vp_rows_attach_under_the_verb() {
        let corpus = pp_attachment_corpus(0).unwrap();
        let entry = corpus
            .entries
            .iter()
            .find(|e| e.entry.sentence.contains("bought mushrooms for $5"))
            .expect("template row present");
        assert_eq!(entry.entry.metadata.get("attachment").map(String::as_str), Some("vp"));
        let row = corpus
            .annotations
            .iter()
            .find(|r| r.entry_id == entry.entry.id && r.spec.role == Role::Main)
            .unwrap();
        match &row.spec.kind {
            MetricKind::EdgeRecall { source, role, target, .. } => {
                assert_eq!(source.full(), "buy-01");
                assert_eq!(role, "ARG3");
                assert_eq!(target.full(), "monetary-quantity");
            }
            other => panic!("expected an edge check, got {other:?}"),
        }
    }
}
