//! Closed-form spectrum, ground states and block Schmidt ranks of the
//! periodic XX chain in a transverse field,
//!
//! ```text
//! H = (J/4) Σ (σx_i σx_{i+1} + σy_i σy_{i+1}) - B Σ σz_i,
//! ```
//!
//! together with brute-force oracles to check them against.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod combinatorics;
pub mod dd;
pub mod entanglement;
pub mod error;
pub mod groundstate;
pub mod linalg;
pub mod oracle;
pub mod spectrum;

pub use combinatorics::{binomial, SiteSubset};
pub use entanglement::{
    build_block, build_block_with, numerical_rank, row_recurrence_check, schmidt_rank, slocc_verdict, Bipartition,
    BlockForm, BlockMatrix, BlockOptions, BlockRank, Precision, RankOptions, RankReport, SloccVerdict, VerdictKind,
};
pub use error::{Error, Result};
pub use groundstate::{amplitude, build_state, build_state_with, SectorState, StateOptions};
pub use spectrum::{
    critical_field, critical_fields, d_coefficient, ground_sector, phase_diagram, sector_energy, ChainParams,
    MomentumSet, PhaseDiagram, PhaseInterval, Sector,
};
