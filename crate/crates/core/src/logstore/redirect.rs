use std::collections::HashMap;
use std::fs;
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};
use crate::logstore::title::CanonicalTitle;

/// Longest redirect chain that is still followed.
pub const MAX_REDIRECT_DEPTH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ChainEnd {
    /// Reached a title that is not itself a redirect.
    Target,
    /// The chain loops back on itself.
    Cycle,
    /// The chain is longer than [`MAX_REDIRECT_DEPTH`].
    TooDeep,
}

/// Redirect mapping with every chain resolved once at construction.
///
/// Cyclic or over-deep chains resolve to their own source, so
/// `resolve(resolve(t)) == resolve(t)` for all `t`.
#[derive(Debug, Clone, Default)]
pub struct RedirectTable {
    edges: HashMap<CanonicalTitle, CanonicalTitle>,
    resolved: HashMap<CanonicalTitle, CanonicalTitle>,
    broken: Vec<(CanonicalTitle, ChainEnd)>,
}

impl RedirectTable {
    pub fn new(edges: HashMap<CanonicalTitle, CanonicalTitle>) -> Self {
        let mut resolved = HashMap::with_capacity(edges.len());
        let mut broken = Vec::new();
        for source in edges.keys() {
            let (end, how) = walk(&edges, source);
            match how {
                ChainEnd::Target => {
                    resolved.insert(source.clone(), end.clone());
                }
                ChainEnd::Cycle | ChainEnd::TooDeep => {
                    broken.push((source.clone(), how));
                }
            }
        }
        broken.sort();
        for (t, how) in &broken {
            warn!("redirect chain from {t} not followed: {how:?}");
        }
        RedirectTable {
            edges,
            resolved,
            broken,
        }
    }

    pub fn from_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (CanonicalTitle, CanonicalTitle)>,
    {
        Self::new(pairs.into_iter().collect())
    }

    /// Reads a `source<TAB>target` file. Both columns are cleaned.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut edges: HashMap<CanonicalTitle, CanonicalTitle> = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split('\t');
            let (Some(src), Some(dst), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::malformed(path, lineno, "expected source<TAB>target"));
            };
            let src = CanonicalTitle::parse(src)
                .ok_or_else(|| Error::malformed(path, lineno, format!("illegal source {src:?}")))?;
            let dst = CanonicalTitle::parse(dst)
                .ok_or_else(|| Error::malformed(path, lineno, format!("illegal target {dst:?}")))?;
            if let Some(prev) = edges.get(&src) {
                if *prev != dst {
                    return Err(Error::malformed(
                        path,
                        lineno,
                        format!("{src} already redirects to {prev}"),
                    ));
                }
            }
            edges.insert(src, dst);
        }
        Ok(Self::new(edges))
    }

    /// Merges additional edges, keeping existing ones on conflict.
    pub fn extended<I>(&self, extra: I) -> Self
    where
        I: IntoIterator<Item = (CanonicalTitle, CanonicalTitle)>,
    {
        let mut edges = self.edges.clone();
        for (s, t) in extra {
            edges.entry(s).or_insert(t);
        }
        Self::new(edges)
    }

    pub fn resolve<'a>(&'a self, title: &'a CanonicalTitle) -> &'a CanonicalTitle {
        self.resolved.get(title).unwrap_or(title)
    }

    /// Resolution by borrowed string key, for the ingest hot path.
    pub fn resolve_str<'a>(&'a self, title: &'a str) -> Option<&'a CanonicalTitle> {
        self.resolved.get(title)
    }

    pub fn is_redirect(&self, title: &CanonicalTitle) -> bool {
        self.edges.contains_key(title)
    }

    /// Sources whose chains were cut (cycle or depth cap), sorted.
    pub fn broken_chains(&self) -> &[(CanonicalTitle, ChainEnd)] {
        &self.broken
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&CanonicalTitle, &CanonicalTitle)> {
        self.edges.iter()
    }
}

fn walk<'a>(
    edges: &'a HashMap<CanonicalTitle, CanonicalTitle>,
    source: &'a CanonicalTitle,
) -> (&'a CanonicalTitle, ChainEnd) {
    let mut path: Vec<&CanonicalTitle> = vec![source];
    let mut cur = source;
    for _ in 0..MAX_REDIRECT_DEPTH {
        match edges.get(cur) {
            None => return (cur, ChainEnd::Target),
            Some(next) => {
                if path.contains(&next) {
                    return (source, ChainEnd::Cycle);
                }
                path.push(next);
                cur = next;
            }
        }
    }
    if edges.contains_key(cur) {
        (source, ChainEnd::TooDeep)
    } else {
        (cur, ChainEnd::Target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> CanonicalTitle {
        CanonicalTitle::parse(s).unwrap()
    }

    fn table(pairs: &[(&str, &str)]) -> RedirectTable {
        RedirectTable::from_pairs(pairs.iter().map(|(a, b)| (t(a), t(b))))
    }

    #[test]
    fn single_and_chained() {
        let tb = table(&[("A", "B")]);
        assert_eq!(tb.resolve(&t("A")), &t("B"));
        let tb = table(&[("A", "B"), ("B", "C")]);
        assert_eq!(tb.resolve(&t("A")), &t("C"));
        assert_eq!(tb.resolve(&t("C")), &t("C"));
        assert_eq!(tb.resolve(&t("Z")), &t("Z"));
    }

    #[test]
    fn cycle_resolves_to_self() {
        let tb = table(&[("A", "B"), ("B", "A"), ("C", "A")]);
        assert_eq!(tb.resolve(&t("A")), &t("A"));
        assert_eq!(tb.resolve(&t("B")), &t("B"));
        assert_eq!(tb.resolve(&t("C")), &t("C"));
        assert_eq!(tb.broken_chains().len(), 3);
        assert!(tb
            .broken_chains()
            .iter()
            .all(|(_, e)| *e == ChainEnd::Cycle));

        let tb = table(&[("A", "A")]);
        assert_eq!(tb.resolve(&t("A")), &t("A"));
    }

    #[test]
    fn depth_cap() {
        let names: Vec<String> = (0..=20).map(|i| format!("N{i}")).collect();
        let pairs: Vec<(&str, &str)> = names
            .windows(2)
            .map(|w| (w[0].as_str(), w[1].as_str()))
            .collect();
        let tb = table(&pairs);
        // N4 -> N20 is exactly 16 hops.
        assert_eq!(tb.resolve(&t("N4")), &t("N20"));
        assert_eq!(tb.resolve(&t("N3")), &t("N3"));
        assert!(tb
            .broken_chains()
            .iter()
            .any(|(s, e)| s == &t("N0") && *e == ChainEnd::TooDeep));
    }

    #[test]
    fn parse_tsv() {
        let tb =
            RedirectTable::parse("a_redirect\tA\n\nfoo bar\tFoo\n", Path::new("r.tsv")).unwrap();
        assert_eq!(tb.resolve(&t("A_redirect")), &t("A"));
        assert_eq!(tb.resolve(&t("Foo_bar")), &t("Foo"));
        assert!(RedirectTable::parse("only_one_col\n", Path::new("r.tsv")).is_err());
        assert!(RedirectTable::parse("A\tB\nA\tC\n", Path::new("r.tsv")).is_err());
        assert!(RedirectTable::parse("A\t#x\n", Path::new("r.tsv")).is_err());
    }
}
