//! Constructive Sperner-lemma search for envy-free divisions among
//! individuals.
//!
//! Each lattice vertex is owned by one player (coordinate sum mod `n`), who
//! labels it with the smallest piece they demand there. Since owners cycle
//! along every Freudenthal step, every cell is rainbow; since players never
//! demand empty pieces, the labeling obeys the Sperner boundary condition and
//! an odd number of cells carry all `n` labels. Reading "owner gets label"
//! off such a cell gives each player a distinct piece they (nearly) prefer.

mod lattice;
mod scan;
mod solve;
mod walk;

use std::collections::HashMap;

use thiserror::Error;

use crate::model::{validate_hungry, ContractViolation, Demand};

pub use lattice::{
    cell_count, enumerate_cells, lattice_points, owner_of, CellIter, ElementaryCell, LatticeError, LatticeVertex,
};
pub use scan::{count_fully_labeled, find_fully_labeled_scan, fully_labeled_cells};
pub use solve::{
    check_envy_individual, envy_bound, find_fully_labeled, read_allocation, solve_individual, solve_individual_demands,
    IndividualAllocation, IndividualSolution, MeshCertificate, MeshLevel, SearchMode, SolveStatus, SolverConfig,
};
pub use walk::find_fully_labeled_walk;

pub(crate) use solve::run_schedule;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Contract(#[from] ContractViolation),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("expected {expected} demand functions, got {got}")]
    PlayerCount { expected: usize, got: usize },
    #[error("invalid solver input: {0}")]
    InvalidInput(String),
    #[error("no fully-labeled cell at mesh {mesh}; labels indicate a broken demand function: {labels}")]
    NoFullyLabeledCell { mesh: u32, labels: String },
    #[error("walk left the expected path at mesh {mesh}: {detail}")]
    WalkBroken { mesh: u32, detail: String },
    #[error("cell budget of {budget} exhausted after {used} cells without an allocation")]
    BudgetExhausted { used: u64, budget: u64 },
    #[error("could not start worker pool: {0}")]
    Workers(String),
}

/// A cell together with its vertex owners and labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledCell {
    pub cell: ElementaryCell,
    pub owners: Vec<usize>,
    pub labels: Vec<usize>,
}

impl LabeledCell {
    pub fn is_fully_labeled(&self) -> bool {
        is_permutation(&self.labels)
    }

    /// Owners and labels each enumerate every player/piece, and relabeling
    /// from scratch reproduces the stored labels.
    pub fn verify<D: Demand>(&self, demands: &[D]) -> Result<bool, SolverError> {
        if !is_permutation(&self.owners) || !is_permutation(&self.labels) {
            return Ok(false);
        }
        for ((v, &owner), &label) in self.cell.vertices().iter().zip(&self.owners).zip(&self.labels) {
            if owner_of(v, demands.len()) != owner || label_vertex(v, demands)? != label {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn is_permutation(xs: &[usize]) -> bool {
    let mut seen = vec![false; xs.len()];
    xs.iter().all(|&x| x < xs.len() && !std::mem::replace(&mut seen[x], true))
}

/// What a finder returns, with instrumentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub cell: LabeledCell,
    /// Full-dimensional cells examined.
    pub cells_visited: u64,
    /// Lower-dimensional boundary faces traversed (walk only).
    pub faces_visited: u64,
    /// Set when the walk had to fall back to the scan.
    pub diagnostic: Option<String>,
}

/// The label of `v`: the smallest piece its owner demands at `v`'s partition.
pub fn label_vertex<D: Demand>(v: &LatticeVertex, demands: &[D]) -> Result<usize, SolverError> {
    let n = v.players();
    if demands.len() != n {
        return Err(SolverError::PlayerCount { expected: n, got: demands.len() });
    }
    let owner = owner_of(v, n);
    let set = validate_hungry(&demands[owner], owner, &v.partition())?;
    Ok(*set.first().expect("validated nonempty"))
}

pub(crate) fn labeled<D: Demand>(
    cell: ElementaryCell,
    demands: &[D],
    cache: Option<&HashMap<LatticeVertex, usize>>,
) -> Result<LabeledCell, SolverError> {
    let n = demands.len();
    let verts = cell.vertices();
    let owners = verts.iter().map(|v| owner_of(v, n)).collect();
    let labels = verts
        .iter()
        .map(|v| match cache.and_then(|c| c.get(v)) {
            Some(&l) => Ok(l),
            None => label_vertex(v, demands),
        })
        .collect::<Result<_, _>>()?;
    Ok(LabeledCell { cell, owners, labels })
}

pub(crate) fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T, SolverError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SolverError::Workers(e.to_string()))?;
    Ok(pool.install(job))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FnDemand, Partition, PieceSet, Valuation};
    use crate::rational::{int, ratio};

    #[test]
    fn uniform_owner_breaks_tie_low() {
        let demands = vec![Valuation::uniform(); 3];
        // (1/3, 2/3) at K=3; coordinate sum 3 -> player 0
        let v = LatticeVertex::new(vec![1, 2], 3).unwrap();
        assert_eq!(label_vertex(&v, &demands).unwrap(), 0);
    }

    #[test]
    fn boundary_vertex_avoids_empty_piece() {
        let demands = vec![Valuation::uniform(); 3];
        let v = LatticeVertex::new(vec![0, 2], 4).unwrap();
        assert_eq!(v.partition().lengths()[0], int(0));
        assert_ne!(label_vertex(&v, &demands).unwrap(), 0);
    }

    #[test]
    fn morning_player_takes_left_half() {
        let morning = Valuation::concentrated(int(0), ratio(1, 10)).unwrap();
        let demands = vec![Valuation::uniform(), morning];
        // cut 1/2 at K=2, z=(1): owner 1 is the morning player
        let v = LatticeVertex::new(vec![1], 2).unwrap();
        assert_eq!(owner_of(&v, 2), 1);
        assert_eq!(label_vertex(&v, &demands).unwrap(), 0);
    }

    #[test]
    fn hungry_violation_names_player() {
        // coordinate sum 1: owned by the adversarial player 1, piece 0 empty
        let z = LatticeVertex::new(vec![0, 1], 2).unwrap();
        let three: Vec<Box<dyn Demand>> = vec![
            Box::new(FnDemand(demand_first_nonempty)),
            Box::new(FnDemand(|_: &Partition| PieceSet::from([0]))),
            Box::new(FnDemand(demand_first_nonempty)),
        ];
        match label_vertex(&z, &three) {
            Err(SolverError::Contract(ContractViolation::Hungry { player: 1, piece: 0, .. })) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    fn demand_first_nonempty(x: &Partition) -> PieceSet {
        PieceSet::from([(0..x.arity()).find(|&i| !x.is_empty_piece(i)).unwrap()])
    }
}
