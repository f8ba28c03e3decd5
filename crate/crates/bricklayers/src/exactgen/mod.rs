//! Exact (truncated-sum) generator actions and expectations under product
//! measures, the two forms of the evolution identity, and a matrix-free
//! finite-chain evolution oracle.

pub mod battery;
pub mod cylinder;
pub mod engine;
pub mod evolution;

pub use battery::{
    identity_row, random_profile, run_identity_battery, standard_test_functions, summarize,
    write_rows_csv, BatterySummary, IdentityRow,
};
pub use cylinder::CylinderFunction;
pub use engine::{ExactEngine, Expectation, SignedProfileCombination, DEFAULT_SUPPORT_GUARD};
pub use evolution::{
    brute_force_evolution, restricted_product_law, ChainBoundary, TruncatedLaw, STATE_SPACE_LIMIT,
};
