//! Shared infrastructure: partial-sum rate trees, truncated-CTMC solutions,
//! and statistical helpers.

pub mod ctmc;
pub mod ratetree;
pub mod stats;
