//! Envy-free contiguous division of a unit interval ("cake").
//!
//! Two problems are solved:
//!
//! * individuals: `n` players, `n` contiguous pieces, one each, nobody envies
//!   another piece ([`sperner::solve_individual`]);
//! * ad-hoc groups: `n` players split into groups of prescribed sizes
//!   `k_1..k_m`, group `j` gets the `j`-th piece from the left of an `m`-piece
//!   division, and no player prefers another group's piece
//!   ([`groups::solve_groups`]).
//!
//! Both are approximate: the solver returns a division whose envy (best piece
//! value minus own piece value) is at most a requested `eps`, computed in
//! exact rational arithmetic. Small instances can be cross-checked against
//! the brute-force grid searches in [`oracle`].

pub mod envy;
pub mod groups;
pub mod instances;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod sperner;

pub use envy::{EnvyReport, PlayerEnvy};
pub use groups::{
    assemble_groups, coarsen, lift_demand, solve_groups, solve_groups_demands, verify_group_envy, GroupAllocation,
    GroupError, GroupMeshCertificate, GroupSolution, GroupStructure, LiftedDemand,
};
pub use model::{
    demand_from_valuation, measure_value, partition_from_cuts, validate_hungry, Assignment, ContractViolation,
    CutVector, Demand, FnDemand, ModelError, Partition, PieceSet, Valuation,
};
pub use rational::{format_scalar, parse_scalar, Scalar};
pub use sperner::{
    solve_individual, solve_individual_demands, IndividualAllocation, IndividualSolution, SearchMode, SolveStatus,
    SolverConfig, SolverError,
};
