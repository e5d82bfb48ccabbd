//! Decentralization assessment for DAO governance snapshots.
//!
//! The pipeline is: load a [`model::GovernanceDataset`] through [`ingest`],
//! classify addresses with [`taxonomy`], compute quantifiers in [`metrics`],
//! and score the fifteen characteristics with [`scorecard`]. Assessments are
//! pure functions of their inputs; [`session`] records the assessor's inputs
//! in an append-only, content-addressed log so any assessment can be replayed.

pub mod ingest;
pub mod metrics;
pub mod model;
pub mod scorecard;
pub mod session;
pub mod taxonomy;

#[cfg(test)]
pub(crate) mod testutil;
