//! Power allocation and partner selection for amplify-and-forward
//! cooperative relay networks.
//!
//! - [`geometry`]: scenario geometry, path loss, Rayleigh-fading draws
//! - [`outage`]: AF mutual information and the high-SNR outage approximation
//! - [`allocation`]: closed-form, iterative, KKT-reference, equal-power and
//!   brute-force allocators
//! - [`table`]: byte-quantized lookup table and its file format
//! - [`monte_carlo`]: seeded, thread-count-independent outage simulation
//! - [`partner`]: greedy partner ranking and partner-count sweeps
//! - [`scenario`] / [`cli`]: config files and CSV-emitting commands

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod allocation;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod monte_carlo;
pub mod outage;
pub mod partner;
pub mod rng;
pub mod scenario;
pub mod scheme;
pub mod table;

pub use allocation::{
    allocate_closed_form, allocate_epa, allocate_grid_oracle, allocate_iterative, allocate_reference_kkt,
    allocate_reference_optimum, lambda_prime, zeta_estimate, AllocationRequest, EpaVariant, IterativeOptions,
    PowerAllocation,
};
pub use error::{Error, Result};
pub use geometry::{LinkPair, NetworkGeometry, NormalizedLinks, Point};
pub use monte_carlo::{estimate_outage, power_gap_db, OutageEstimate};
pub use outage::{outage_approx, two_node_outage};
pub use partner::{greedy_select, optimal_partner_count, rank_score};
pub use scheme::Scheme;
pub use table::{allocate_from_table, LambdaTable, TableSpec};
