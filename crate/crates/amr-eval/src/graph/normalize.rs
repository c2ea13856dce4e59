//! Edge de-inversion so that "incoming edges" are well-defined.

use std::collections::BTreeSet;

use super::{AmrGraph, Relation};

/// Roles ending in `-of` that are lexical rather than inversions and must
/// not be reversed. The AMR guidelines never enumerate this set; it is a
/// configuration default.
pub(crate) const DEFAULT_OF_EXCEPTIONS: [&str; 3] =
    ["consist-of", "prep-on-behalf-of", "prep-out-of"];

/// Controls which `-of` roles are treated as lexical.
#[derive(Debug, Clone)]
pub struct NormalizeConfig {
    exceptions: BTreeSet<String>,
}

impl Default for NormalizeConfig {
    fn default() -> Self {
        NormalizeConfig {
            exceptions: DEFAULT_OF_EXCEPTIONS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl NormalizeConfig {
    pub fn with_exceptions<I, S>(exceptions: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        NormalizeConfig {
            exceptions: exceptions.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_exception(&self, role: &str) -> bool {
        self.exceptions.contains(role)
    }

    /// Replaces every relation whose role ends in `-of` (and is not in the
    /// exception list) by its reversed relation with the suffix stripped.
    /// Stripping repeats until stable, so `ARG0-of-of` reduces to `ARG0`
    /// and the operation is idempotent. Instances and attributes are
    /// untouched.
    pub fn normalize(&self, graph: &AmrGraph) -> AmrGraph {
        let mut out = graph.clone();
        for rel in &mut out.relations {
            loop {
                let stripped = match rel.role.strip_suffix("-of") {
                    Some(s) if !s.is_empty() && !self.is_exception(&rel.role) => s.to_string(),
                    _ => break,
                };
                *rel = Relation {
                    source: rel.target,
                    role: stripped,
                    target: rel.source,
                };
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_penman;

    #[test]
    fn reverses_inverted_roles() {
        let g = parse_penman("(p / person :ARG0-of (b / bake-01))").unwrap();
        let n = NormalizeConfig::default().normalize(&g);
        assert_eq!(n.relations().len(), 1);
        let r = &n.relations()[0];
        assert_eq!(r.role, "ARG0");
        assert_eq!(n.concept(r.source).full(), "bake-01");
        assert_eq!(n.concept(r.target).full(), "person");
    }

    #[test]
    fn identity_without_of_roles() {
        let g = parse_penman("(g / go-02 :ARG0 (y / you))").unwrap();
        let n = NormalizeConfig::default().normalize(&g);
        assert_eq!(&n, &g);
    }

    #[test]
    fn exception_list_is_respected() {
        let g = parse_penman("(x / thing :consist-of (y / metal))").unwrap();
        let n = NormalizeConfig::default().normalize(&g);
        assert_eq!(n.relations()[0].role, "consist-of");
        assert_eq!(n, g);

        // With an empty exception list the same role reverses.
        let none = NormalizeConfig::with_exceptions(Vec::<String>::new());
        let n = none.normalize(&g);
        assert_eq!(n.relations()[0].role, "consist");
    }

    #[test]
    fn idempotent_even_on_double_of() {
        let g = parse_penman("(x / thing :ARG0-of-of (y / other))").unwrap();
        let cfg = NormalizeConfig::default();
        let once = cfg.normalize(&g);
        assert_eq!(once.relations()[0].role, "ARG0");
        assert_eq!(cfg.normalize(&once), once);
    }

    #[test]
    fn preserves_reentrancy_counts() {
        let g = parse_penman(
            "(r / run-02 :ARG0 (m / mechanic) :destination (c / centrifuge :ARG1-of (t / turn-off-07 :ARG0 m)))",
        )
        .unwrap();
        let n = NormalizeConfig::default().normalize(&g);
        let c = n.var_by_name("c").unwrap();
        let m = n.var_by_name("m").unwrap();
        assert_eq!(n.incoming_count(c), 2);
        assert_eq!(n.incoming_count(m), 2);
    }
}
