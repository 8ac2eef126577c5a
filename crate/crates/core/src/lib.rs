//! Backward citation-network reconstruction and analysis.
//!
//! The crate covers the whole analysis chain: a seed bibliography
//! ([`corpus`]) is resolved against a citation index ([`provider`]), grown
//! into a depth-limited backward citation network ([`graph`]), reduced to its
//! largest weak component and 2-core, partitioned with Louvain
//! ([`community`]), and summarized with bibliometric indicators
//! ([`metrics`]).

pub mod corpus;
pub mod graph;
pub mod provider;
pub mod community;
pub mod metrics;
