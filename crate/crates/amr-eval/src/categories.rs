//! The 36 evaluation categories, grouped into 9 sets.

/// Static description of one category.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CategoryInfo {
    pub id: &'static str,
    pub set: u8,
    pub display: &'static str,
}

pub const CATEGORIES: &[CategoryInfo] = &[
    // 1. Pragmatic reentrancies
    c("pragmatic_coreference", 1, "Pragmatic coreference"),
    // 2. Unambiguous reentrancies
    c("syntactic_gap_reentrancies", 2, "Syntactic (gap) reentrancies"),
    c("unambiguous_coreference", 2, "Unambiguous coreference"),
    // 3. Structural generalization
    c("nested_control_coordination", 3, "Nested control and coordination"),
    c("multiple_adjectives", 3, "Multiple adjectives"),
    c("centre_embedding", 3, "Centre embedding"),
    c("long_lists", 3, "Long lists"),
    c("cp_recursion", 3, "CP recursion"),
    c("cp_recursion_coref", 3, "CP recursion + coreference"),
    c("cp_recursion_rc", 3, "CP recursion + relative clause (RC)"),
    c("cp_recursion_rc_coref", 3, "CP recursion + RC + coreference"),
    // 4. Rare and unseen words
    c("rare_node_labels", 4, "Rare node labels"),
    c("unseen_node_labels", 4, "Unseen node labels"),
    c("rare_senses", 4, "Rare predicate senses (excl. -01)"),
    c("unseen_senses", 4, "Unseen predicate senses (excl. -01)"),
    c("rare_edge_labels", 4, "Rare edge labels (ARG2+)"),
    c("unseen_edge_labels", 4, "Unseen edge labels (ARG2+)"),
    // 5. Special entities
    c("seen_names", 5, "Seen names"),
    c("unseen_names", 5, "Unseen names"),
    c("seen_dates", 5, "Seen dates"),
    c("unseen_dates", 5, "Unseen dates"),
    c("other_seen_entities", 5, "Other seen entities"),
    c("other_unseen_entities", 5, "Other unseen entities"),
    // 6. Entity classification and linking
    c("ne_types_seen", 6, "Types of seen named entities"),
    c("ne_types_unseen", 6, "Types of unseen named entities"),
    c("wiki_easy", 6, "Seen and/or easy wiki links"),
    c("wiki_hard", 6, "Hard unseen wiki links"),
    // 7. Lexical disambiguations
    c("frequent_senses", 7, "Frequent predicate senses (incl. -01)"),
    c("word_ambiguities", 7, "Word ambiguities"),
    // 8. Edge attachments
    c("pp_attachment", 8, "PP attachment"),
    c("unbounded_dependencies", 8, "Unbounded dependencies"),
    c("passives", 8, "Passives"),
    c("unaccusatives", 8, "Unaccusatives"),
    // 9. Non-trivial word-to-node relations
    c("ellipsis", 9, "Ellipsis"),
    c("multinode_word_meanings", 9, "Multinode word meanings"),
    c("imperatives", 9, "Imperatives"),
];

const fn c(id: &'static str, set: u8, display: &'static str) -> CategoryInfo {
    CategoryInfo { id, set, display }
}

pub fn lookup(id: &str) -> Option<&'static CategoryInfo> {
    CATEGORIES.iter().find(|c| c.id == id)
}

pub fn set_display(set: u8) -> &'static str {
    match set {
        1 => "Pragmatic reentrancies",
        2 => "Unambiguous reentrancies",
        3 => "Structural generalization",
        4 => "Rare and unseen words",
        5 => "Special entities",
        6 => "Entity classification and linking",
        7 => "Lexical disambiguation",
        8 => "Edge attachments",
        9 => "Non-trivial word-to-node relations",
        _ => "Unknown",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_has_36_unique_categories_in_9_sets() {
        assert_eq!(CATEGORIES.len(), 36);
        let mut ids: Vec<&str> = CATEGORIES.iter().map(|c| c.id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 36);
        for set in 1..=9u8 {
            assert!(
                CATEGORIES.iter().any(|c| c.set == set),
                "set {set} has no categories"
            );
        }
        assert!(lookup("cp_recursion").is_some());
        assert!(lookup("nope").is_none());
    }
}
