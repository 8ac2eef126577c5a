use std::collections::HashMap;
use std::path::Path;

use super::{doi_id, CitationPage, CitationProvider, PaperId, ProviderError};
use crate::corpus::{normalize_title, ReferenceRecord};
use crate::graph::{io::read_snapshot, CitationGraph};

/// Serves citer pages from an in-memory snapshot. The snapshot is taken to
/// be exhaustive, so the last page of every target is `complete`.
///
/// Cursors are decimal offsets into the id-sorted citer list.
#[derive(Debug, Clone)]
pub struct OfflineProvider {
    graph: CitationGraph,
    page_size: usize,
    by_title: HashMap<String, Vec<usize>>,
}

impl OfflineProvider {
    pub fn open(dir: &Path, page_size: usize) -> Result<Self, ProviderError> {
        let graph = read_snapshot(dir).map_err(|e| ProviderError::Io(e.to_string()))?;
        Self::from_graph(graph, page_size)
    }

    pub fn from_graph(graph: CitationGraph, page_size: usize) -> Result<Self, ProviderError> {
        if page_size == 0 {
            return Err(ProviderError::Config("page_size must be at least 1".into()));
        }
        if !graph.is_directed() {
            return Err(ProviderError::Config("snapshot graph must be directed".into()));
        }
        let mut by_title: HashMap<String, Vec<usize>> = HashMap::new();
        for i in 0..graph.node_count() {
            if let Some(title) = &graph.attrs(i).title {
                by_title.entry(normalize_title(title)).or_default().push(i);
            }
        }
        Ok(OfflineProvider {
            graph,
            page_size,
            by_title,
        })
    }

    pub fn graph(&self) -> &CitationGraph {
        &self.graph
    }

    fn paper(&self, i: usize) -> PaperId {
        let attrs = self.graph.attrs(i);
        PaperId {
            id: self.graph.id(i).to_string(),
            title: attrs.title.clone(),
            year: attrs.year,
        }
    }
}

impl CitationProvider for OfflineProvider {
    fn resolve(&self, record: &ReferenceRecord) -> Result<PaperId, ProviderError> {
        if let Some(doi) = &record.doi {
            if let Some(i) = self.graph.index_of(&doi_id(doi)) {
                return Ok(self.paper(i));
            }
        }
        let candidates = self
            .by_title
            .get(&normalize_title(&record.title))
            .map(Vec::as_slice)
            .unwrap_or_default();
        // Candidates are in id order, so the first match is deterministic.
        candidates
            .iter()
            .find(|&&i| record.year.is_none() || self.graph.attrs(i).year == record.year)
            .map(|&i| self.paper(i))
            .ok_or_else(|| ProviderError::NotFound(record.raw_key.clone()))
    }

    fn fetch_citers(&self, id: &PaperId, cursor: Option<&str>) -> Result<CitationPage, ProviderError> {
        let i = self
            .graph
            .index_of(&id.id)
            .ok_or_else(|| ProviderError::NotFound(id.id.clone()))?;
        let citers = self.graph.in_neighbors(i);
        let start = match cursor {
            None => 0,
            Some(c) => c
                .parse::<usize>()
                .ok()
                .filter(|&s| s < citers.len())
                .ok_or_else(|| ProviderError::Protocol(format!("invalid cursor `{c}`")))?,
        };
        let end = (start + self.page_size).min(citers.len());
        let next = (end < citers.len()).then(|| end.to_string());
        Ok(CitationPage {
            target: id.clone(),
            citers: citers[start..end].iter().map(|&c| self.paper(c as usize)).collect(),
            complete: next.is_none(),
            cursor: next,
        })
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::graph::{GraphBuilder, NodeAttrs};

    fn record(title: &str, year: Option<i32>, doi: Option<&str>) -> ReferenceRecord {
        ReferenceRecord {
            raw_key: "k".into(),
            title: title.into(),
            authors: vec![],
            year,
            chapter_tags: BTreeSet::from(["ch".to_string()]),
            doi: doi.map(str::to_string),
        }
    }

    fn provider(page_size: usize) -> OfflineProvider {
        let mut b = GraphBuilder::new();
        let titled = |t: &str, y| NodeAttrs {
            title: Some(t.into()),
            year: Some(y),
            ..Default::default()
        };
        b.add_node("doi:10.1/abc", titled("Scaling in cities", 2007));
        b.add_node("p1", titled("The new science of cities", 2013));
        b.add_node("lonely", titled("Nobody cites me", 2000));
        for c in ["c1", "c2", "c3"] {
            b.add_edge(c, "p1");
        }
        OfflineProvider::from_graph(b.build(), page_size).unwrap()
    }

    #[test]
    fn resolves_by_doi_then_title() {
        let p = provider(10);
        let by_doi = p.resolve(&record("whatever", None, Some("10.1/ABC"))).unwrap();
        assert_eq!(by_doi.id, "doi:10.1/abc");
        let by_title = p.resolve(&record("The New Science of Cities", Some(2013), None)).unwrap();
        assert_eq!(by_title.id, "p1");
        assert_eq!(by_title.year, Some(2013));
        assert!(p.resolve(&record("The new science of cities", Some(1999), None)).unwrap_err().is_not_found());
        assert!(p.resolve(&record("Absent", None, None)).unwrap_err().is_not_found());
    }

    #[test]
    fn zero_citers() {
        let page = provider(2).fetch_citers(&PaperId::new("lonely"), None).unwrap();
        assert!(page.citers.is_empty());
        assert!(page.complete);
        assert_eq!(page.cursor, None);
    }

    #[test]
    fn pagination() {
        let p = provider(2);
        let first = p.fetch_citers(&PaperId::new("p1"), None).unwrap();
        assert_eq!(first.citers.len(), 2);
        assert_eq!(first.cursor.as_deref(), Some("2"));
        assert!(!first.complete);
        let second = p.fetch_citers(&PaperId::new("p1"), first.cursor.as_deref()).unwrap();
        assert_eq!(second.citers.len(), 1);
        assert!(second.complete && second.cursor.is_none());
        assert_eq!(p.fetch_citers(&PaperId::new("p1"), None).unwrap(), first);
    }

    #[test]
    fn errors() {
        let p = provider(2);
        assert!(p.fetch_citers(&PaperId::new("ghost"), None).unwrap_err().is_not_found());
        assert!(matches!(
            p.fetch_citers(&PaperId::new("p1"), Some("x")),
            Err(ProviderError::Protocol(_))
        ));
    }
}
