//! Depth-limited backward crawl.
//!
//! Targets of one level are paginated round-robin: every round issues one
//! page request per unfinished target, split across worker threads, and the
//! answers are merged in target order. The merged graph therefore does not
//! depend on the number of workers or on response timing.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{completeness_fraction, CitationGraph, GraphBuilder, GraphError, NodeAttrs};
use crate::provider::{CitationPage, CitationProvider, PaperId, ProviderError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrawlOptions {
    /// 1: seeds and their citers. 2: also the citers of those citers.
    pub depth: u8,
    /// Cap on page requests; `None` is unlimited.
    pub budget: Option<u64>,
    pub workers: usize,
}

impl Default for CrawlOptions {
    fn default() -> Self {
        CrawlOptions {
            depth: 2,
            budget: None,
            workers: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrawlStats {
    pub seeds_resolved: usize,
    /// Node counts at depth 0, 1 and 2.
    pub nodes_by_depth: [usize; 3],
    pub requests_issued: u64,
    pub budget_exhausted: bool,
    pub completeness: f64,
}

struct Target {
    paper: PaperId,
    cursor: Option<String>,
}

struct Crawl<'a> {
    provider: &'a dyn CitationProvider,
    builder: GraphBuilder,
    requests: u64,
    budget: Option<u64>,
    workers: usize,
    exhausted: bool,
}

impl Crawl<'_> {
    fn remaining(&self) -> Option<u64> {
        self.budget.map(|b| b.saturating_sub(self.requests))
    }

    /// Paginates every target to the end, or until the budget runs out.
    /// Citers join the graph at depth `level + 1`.
    fn expand(&mut self, targets: Vec<PaperId>, level: u8) -> Result<(), GraphError> {
        let mut active: Vec<Target> = targets
            .into_iter()
            .map(|paper| Target { paper, cursor: None })
            .collect();
        while !active.is_empty() {
            let allowed = match self.remaining() {
                Some(r) => (r.min(active.len() as u64)) as usize,
                None => active.len(),
            };
            if allowed == 0 {
                self.exhausted = true;
                return Ok(());
            }
            let results = fetch_round(self.provider, &active[..allowed], self.workers);
            self.requests += allowed as u64;

            let mut still_active = Vec::with_capacity(active.len());
            let mut rest = active.split_off(allowed);
            for (target, result) in active.into_iter().zip(results) {
                match result {
                    Ok(page) => {
                        self.merge(&target.paper, &page, level);
                        if let Some(cursor) = page.cursor {
                            still_active.push(Target {
                                paper: target.paper,
                                cursor: Some(cursor),
                            });
                        } else if page.complete {
                            if let Some(node) = self.builder.node_mut(&target.paper.id) {
                                node.fully_resolved = true;
                            }
                        }
                    }
                    Err(ProviderError::NotFound(id)) => {
                        log::warn!("no citation record for `{id}`; leaving it unresolved");
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            still_active.append(&mut rest);
            active = still_active;
        }
        Ok(())
    }

    fn merge(&mut self, target: &PaperId, page: &CitationPage, level: u8) {
        for citer in &page.citers {
            if citer.id == target.id {
                continue;
            }
            self.builder.add_node(
                &citer.id,
                NodeAttrs {
                    depth: level + 1,
                    fully_resolved: false,
                    title: citer.title.clone(),
                    year: citer.year,
                },
            );
            self.builder.add_edge(&citer.id, &target.id);
        }
    }
}

fn fetch_round(
    provider: &dyn CitationProvider,
    batch: &[Target],
    workers: usize,
) -> Vec<Result<CitationPage, ProviderError>> {
    let fetch = |t: &Target| provider.fetch_citers(&t.paper, t.cursor.as_deref());
    let workers = workers.clamp(1, batch.len().max(1));
    if workers == 1 {
        return batch.iter().map(fetch).collect();
    }
    let chunk = batch.len().div_ceil(workers);
    std::thread::scope(|scope| {
        let handles: Vec<_> = batch
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(fetch).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("crawl worker panicked"))
            .collect()
    })
}

/// Grows the backward citation network of `seeds`.
///
/// Level 1 holds every citer of a seed. At depth 2, level-1 papers are
/// expanded in decreasing order of in-degree (then out-degree, then id)
/// until the request budget runs out. A node is `fully_resolved` when its
/// citer pagination finished on a page marked complete.
pub fn build_backward_network(
    seeds: &[PaperId],
    provider: &dyn CitationProvider,
    options: &CrawlOptions,
) -> Result<(CitationGraph, CrawlStats), GraphError> {
    if !(1..=2).contains(&options.depth) {
        return Err(GraphError::InvalidDepth(options.depth));
    }
    if options.budget == Some(0) {
        return Err(GraphError::InvalidBudget);
    }
    let mut unique: Vec<PaperId> = Vec::new();
    let mut seen: HashMap<&str, ()> = HashMap::new();
    let mut sorted: Vec<&PaperId> = seeds.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    for s in sorted {
        if !s.id.is_empty() && seen.insert(&s.id, ()).is_none() {
            unique.push(s.clone());
        }
    }
    if unique.is_empty() {
        return Err(GraphError::NoSeeds);
    }

    let mut crawl = Crawl {
        provider,
        builder: GraphBuilder::new(),
        requests: 0,
        budget: options.budget,
        workers: options.workers,
        exhausted: false,
    };
    for s in &unique {
        crawl.builder.add_node(
            &s.id,
            NodeAttrs {
                depth: 0,
                fully_resolved: false,
                title: s.title.clone(),
                year: s.year,
            },
        );
    }
    crawl.expand(unique.clone(), 0)?;

    if options.depth == 2 && !crawl.exhausted {
        let level_one = rank_level_one(&crawl.builder);
        crawl.expand(level_one, 1)?;
    }

    let Crawl {
        builder,
        requests,
        exhausted,
        ..
    } = crawl;
    let graph = builder.build();
    let mut nodes_by_depth = [0usize; 3];
    for i in 0..graph.node_count() {
        nodes_by_depth[graph.attrs(i).depth as usize] += 1;
    }
    let stats = CrawlStats {
        seeds_resolved: unique.len(),
        nodes_by_depth,
        requests_issued: requests,
        budget_exhausted: exhausted,
        completeness: completeness_fraction(&graph)?,
    };
    Ok((graph, stats))
}

fn rank_level_one(builder: &GraphBuilder) -> Vec<PaperId> {
    let snapshot = builder.snapshot();
    let mut level: Vec<(usize, usize, usize)> = (0..snapshot.node_count())
        .filter(|&i| snapshot.attrs(i).depth == 1)
        .map(|i| (snapshot.in_degree(i), snapshot.out_degree(i), i))
        .collect();
    level.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));
    level
        .into_iter()
        .map(|(_, _, i)| {
            let a = snapshot.attrs(i);
            PaperId {
                id: snapshot.id(i).to_string(),
                title: a.title.clone(),
                year: a.year,
            }
        })
        .collect()
}
