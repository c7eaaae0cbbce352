//! Division among ad-hoc groups of prescribed sizes.
//!
//! The `n` players are split into `m` groups of sizes `k_1..k_m`; group `j`
//! gets the `j`-th piece from the left of an `m`-piece partition. The solver
//! reduces this to the individual problem on `n` pieces: block `G_j` of
//! consecutive `n`-pieces coarsens into group piece `j`, and each player's
//! `m`-piece demand `f` is lifted to an `n`-piece demand `g` that answers with
//! the longest sub-pieces of every block `f` likes. An individually
//! envy-free division for the lifted demands, read back through the blocks,
//! gives every player a group whose piece they prefer.

use std::ops::Range;

use num_traits::Zero;
use thiserror::Error;

use crate::envy::{envy_report, max_density, EnvyReport};
use crate::model::{Assignment, Demand, Partition, PieceSet, Valuation};
use crate::rational::Scalar;
use crate::sperner::{
    find_fully_labeled, read_allocation, run_schedule, IndividualAllocation, MeshLevel, SolveStatus, SolverConfig,
    SolverError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("at least one group is required")]
    NoGroups,
    #[error("group {0} has size zero")]
    EmptyGroup(usize),
    #[error("partition has {got} pieces but the groups cover {expected} players")]
    ArityMismatch { expected: usize, got: usize },
    #[error("membership covers {got} players, expected {expected}")]
    MembershipSize { expected: usize, got: usize },
    #[error("group {group} has {got} members, expected {expected}")]
    WrongGroupSize { group: usize, expected: usize, got: usize },
}

/// Group sizes with their prefix sums and index blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupStructure {
    sizes: Vec<usize>,
    // prefix[t] = k_0 + ... + k_{t-1}; prefix[0] = 0, prefix[m] = n
    prefix: Vec<usize>,
}

impl GroupStructure {
    pub fn new(sizes: Vec<usize>) -> Result<Self, GroupError> {
        if sizes.is_empty() {
            return Err(GroupError::NoGroups);
        }
        if let Some(j) = sizes.iter().position(|&k| k == 0) {
            return Err(GroupError::EmptyGroup(j));
        }
        let mut prefix = Vec::with_capacity(sizes.len() + 1);
        prefix.push(0);
        for &k in &sizes {
            prefix.push(prefix.last().unwrap() + k);
        }
        Ok(GroupStructure { sizes, prefix })
    }

    /// `n` singleton groups.
    pub fn singletons(n: usize) -> Self {
        Self::new(vec![1; n]).expect("n > 0")
    }

    pub fn players(&self) -> usize {
        *self.prefix.last().unwrap()
    }

    pub fn groups(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size(&self, group: usize) -> usize {
        self.sizes[group]
    }

    pub fn prefix_sums(&self) -> &[usize] {
        &self.prefix
    }

    /// Indices of the `n`-pieces that merge into group piece `group`.
    pub fn block(&self, group: usize) -> Range<usize> {
        self.prefix[group]..self.prefix[group + 1]
    }

    /// The group whose block contains `piece`.
    pub fn group_of_piece(&self, piece: usize) -> usize {
        assert!(piece < self.players());
        self.prefix.partition_point(|&p| p <= piece) - 1
    }

    pub fn is_singletons(&self) -> bool {
        self.sizes.iter().all(|&k| k == 1)
    }
}

/// Merges each block of `x` into one piece.
pub fn coarsen(x: &Partition, groups: &GroupStructure) -> Result<Partition, GroupError> {
    if x.arity() != groups.players() {
        return Err(GroupError::ArityMismatch { expected: groups.players(), got: x.arity() });
    }
    let lengths = (0..groups.groups()).map(|j| x.lengths()[groups.block(j)].iter().sum()).collect();
    Ok(Partition::new(lengths).expect("coarsening preserves total length"))
}

/// An `m`-piece demand lifted to `n`-piece partitions.
///
/// On `x` it coarsens to `y`, asks the inner demand for its preferred group
/// pieces `F`, and returns, for every `j` in `F`, all longest sub-pieces of
/// block `j` (ties kept).
#[derive(Debug, Clone)]
pub struct LiftedDemand<D> {
    inner: D,
    groups: GroupStructure,
}

pub fn lift_demand<D: Demand>(inner: D, groups: &GroupStructure) -> LiftedDemand<D> {
    LiftedDemand { inner, groups: groups.clone() }
}

impl<D> LiftedDemand<D> {
    pub fn inner(&self) -> &D {
        &self.inner
    }

    pub fn groups(&self) -> &GroupStructure {
        &self.groups
    }
}

impl<D: Demand> Demand for LiftedDemand<D> {
    fn demand(&self, x: &Partition) -> PieceSet {
        let y = coarsen(x, &self.groups).expect("lifted demand evaluated on a partition of the wrong arity");
        let mut out = PieceSet::new();
        for j in self.inner.demand(&y) {
            if j >= self.groups.groups() {
                // out-of-range group: surface it as an out-of-range piece
                out.insert(self.groups.players() + j);
                continue;
            }
            let block = self.groups.block(j);
            let longest = x.lengths()[block.clone()].iter().max().expect("blocks are nonempty");
            out.extend(block.filter(|&i| x.length(i) == longest));
        }
        out
    }
}

/// A partition into `m` pieces with group `j` holding piece `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupAllocation {
    pub partition: Partition,
    /// Group index of every player.
    pub membership: Vec<usize>,
}

impl GroupAllocation {
    pub fn new(partition: Partition, membership: Vec<usize>, groups: &GroupStructure) -> Result<Self, GroupError> {
        if partition.arity() != groups.groups() {
            return Err(GroupError::ArityMismatch { expected: groups.groups(), got: partition.arity() });
        }
        if membership.len() != groups.players() {
            return Err(GroupError::MembershipSize { expected: groups.players(), got: membership.len() });
        }
        for j in 0..groups.groups() {
            let got = membership.iter().filter(|&&g| g == j).count();
            if got != groups.size(j) {
                return Err(GroupError::WrongGroupSize { group: j, expected: groups.size(j), got });
            }
        }
        Ok(GroupAllocation { partition, membership })
    }

    pub fn members(&self, group: usize) -> Vec<usize> {
        (0..self.membership.len()).filter(|&p| self.membership[p] == group).collect()
    }
}

/// Coarsens `x_star` and puts each player into the group whose block holds
/// their assigned piece.
pub fn assemble_groups(
    x_star: &Partition,
    assignment: &Assignment,
    groups: &GroupStructure,
) -> Result<GroupAllocation, GroupError> {
    if assignment.len() != groups.players() {
        return Err(GroupError::MembershipSize { expected: groups.players(), got: assignment.len() });
    }
    let y = coarsen(x_star, groups)?;
    let membership = (0..assignment.len()).map(|p| groups.group_of_piece(assignment.piece_of(p))).collect();
    Ok(GroupAllocation { partition: y, membership })
}

/// Envy of every player towards the other groups' pieces.
pub fn verify_group_envy(valuations: &[Valuation], alloc: &GroupAllocation, eps: &Scalar) -> EnvyReport {
    envy_report(valuations, &alloc.partition, &alloc.membership, eps)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSolution {
    /// The `n`-piece division found for the lifted demands.
    pub individual: IndividualAllocation,
    pub allocation: GroupAllocation,
    pub report: EnvyReport,
    pub status: SolveStatus,
    pub levels: Vec<MeshLevel>,
}

/// Finds groups of the prescribed sizes and an `m`-piece division in which no
/// player's envy exceeds `eps`.
pub fn solve_groups(
    valuations: &[Valuation],
    groups: &GroupStructure,
    eps: &Scalar,
    cfg: &SolverConfig,
) -> Result<GroupSolution, SolverError> {
    if valuations.len() != groups.players() {
        return Err(SolverError::PlayerCount { expected: groups.players(), got: valuations.len() });
    }
    let lifted: Vec<_> = valuations.iter().map(|v| lift_demand(v, groups)).collect();
    let dmax = max_density(valuations);
    let run = run_schedule(&lifted, eps, &dmax, cfg, |alloc| {
        let groups_alloc = assemble_groups(&alloc.partition, &alloc.assignment, groups).expect("arity checked above");
        let report = verify_group_envy(valuations, &groups_alloc, eps);
        let max = report.max_envy.clone();
        ((groups_alloc, report), max)
    })?;
    let (allocation, report) = run.evaluation;
    Ok(GroupSolution { individual: run.allocation, allocation, report, status: run.status, levels: run.levels })
}

/// Group result for abstract demands: every player demanded their group's
/// piece at a cell vertex within cut-space distance `delta` of the output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupMeshCertificate {
    pub individual: IndividualAllocation,
    pub allocation: GroupAllocation,
    pub delta: Scalar,
    pub cells_visited: u64,
}

impl GroupMeshCertificate {
    /// Re-evaluates the certificate: labels reproduce, and each player's
    /// inner demand at their vertex's coarsened partition contains their group.
    pub fn verify<D: Demand>(&self, demands: &[D], groups: &GroupStructure) -> Result<bool, SolverError> {
        let lifted: Vec<_> = demands.iter().map(|d| lift_demand(d, groups)).collect();
        let cert = &self.individual.certificate;
        if !cert.verify(&lifted)? {
            return Ok(false);
        }
        for (v, &owner) in cert.cell.vertices().iter().zip(&cert.owners) {
            let y = coarsen(&v.partition(), groups).map_err(|e| SolverError::InvalidInput(e.to_string()))?;
            if !demands[owner].demand(&y).contains(&self.allocation.membership[owner]) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Solves the group problem at a single mesh for arbitrary demand functions
/// over `m`-piece partitions.
pub fn solve_groups_demands<D: Demand>(
    demands: &[D],
    groups: &GroupStructure,
    mesh: u32,
    cfg: &SolverConfig,
) -> Result<GroupMeshCertificate, SolverError> {
    let n = groups.players();
    if demands.len() != n {
        return Err(SolverError::PlayerCount { expected: n, got: demands.len() });
    }
    let lifted: Vec<_> = demands.iter().map(|d| lift_demand(d, groups)).collect();
    let (individual, cells_visited, delta) = if n == 1 {
        (IndividualAllocation::single(), 0, Scalar::zero())
    } else {
        let (outcome, _) = find_fully_labeled(&lifted, mesh, cfg, Some(cfg.budget_cells))?;
        let delta = Scalar::new((n as u64 - 1).into(), mesh.into());
        (read_allocation(&outcome.cell), outcome.cells_visited, delta)
    };
    let allocation = assemble_groups(&individual.partition, &individual.assignment, groups)
        .map_err(|e| SolverError::InvalidInput(e.to_string()))?;
    Ok(GroupMeshCertificate { individual, allocation, delta, cells_visited })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FnDemand;
    use crate::rational::{int, ratio};
    use crate::sperner::solve_individual;
    use num_traits::Signed;

    #[test]
    fn structure_bookkeeping() {
        let g = GroupStructure::new(vec![2, 3, 1]).unwrap();
        assert_eq!(g.players(), 6);
        assert_eq!(g.prefix_sums(), &[0, 2, 5, 6]);
        assert_eq!(g.block(1), 2..5);
        assert_eq!((0..6).map(|i| g.group_of_piece(i)).collect::<Vec<_>>(), vec![0, 0, 1, 1, 1, 2]);
        assert_eq!(GroupStructure::new(vec![]), Err(GroupError::NoGroups));
        assert_eq!(GroupStructure::new(vec![1, 0]), Err(GroupError::EmptyGroup(1)));
    }

    #[test]
    fn coarsen_examples() {
        let pairs = GroupStructure::new(vec![2, 2]).unwrap();
        assert_eq!(coarsen(&Partition::equal(4), &pairs).unwrap(), Partition::equal(2));
        let x = Partition::new(vec![ratio(1, 8), ratio(3, 8), ratio(1, 2)]).unwrap();
        assert_eq!(coarsen(&x, &GroupStructure::singletons(3)).unwrap(), x);
        let tens = GroupStructure::new(vec![10, 10, 10]).unwrap();
        assert_eq!(coarsen(&Partition::equal(30), &tens).unwrap(), Partition::equal(3));
        assert!(matches!(coarsen(&x, &pairs), Err(GroupError::ArityMismatch { .. })));
    }

    #[test]
    fn lifted_uniform_pairs() {
        let pairs = GroupStructure::new(vec![2, 2]).unwrap();
        let g = lift_demand(Valuation::uniform(), &pairs);
        let x = Partition::new(vec![ratio(1, 8), ratio(3, 8), ratio(1, 4), ratio(1, 4)]).unwrap();
        // definition evaluated by hand: y = (1/2, 1/2), f(y) = {1, 2}, M_1 = {2}, M_2 = {3, 4}
        assert_eq!(g.demand(&x), PieceSet::from([1, 2, 3]));
    }

    #[test]
    fn lifted_with_unit_sizes_is_identity() {
        let v = Valuation::concentrated(ratio(1, 5), ratio(3, 5)).unwrap();
        let g = lift_demand(&v, &GroupStructure::singletons(3));
        for x in [Partition::equal(3), Partition::new(vec![ratio(1, 2), int(0), ratio(1, 2)]).unwrap()] {
            assert_eq!(g.demand(&x), v.demand(&x));
        }
    }

    #[test]
    fn assemble_examples() {
        let singles = GroupStructure::singletons(2);
        let a = assemble_groups(&Partition::equal(2), &Assignment::identity(2), &singles).unwrap();
        assert_eq!(a.membership, vec![0, 1]);
        assert_eq!(a.partition, Partition::equal(2));

        let pairs = GroupStructure::new(vec![2, 2]).unwrap();
        // 1->3, 2->1, 3->4, 4->2 in 1-based terms
        let assignment = Assignment::new(vec![2, 0, 3, 1]).unwrap();
        let a = assemble_groups(&Partition::equal(4), &assignment, &pairs).unwrap();
        assert_eq!(a.members(0), vec![1, 3]);
        assert_eq!(a.members(1), vec![0, 2]);
    }

    #[test]
    fn group_allocation_sizes_validated() {
        let pairs = GroupStructure::new(vec![2, 2]).unwrap();
        assert!(GroupAllocation::new(Partition::equal(2), vec![0, 0, 1, 1], &pairs).is_ok());
        assert!(matches!(
            GroupAllocation::new(Partition::equal(2), vec![0, 0, 0, 1], &pairs),
            Err(GroupError::WrongGroupSize { .. })
        ));
    }

    fn morning() -> Valuation {
        Valuation::concentrated(int(0), ratio(1, 10)).unwrap()
    }

    fn evening() -> Valuation {
        Valuation::concentrated(ratio(9, 10), int(1)).unwrap()
    }

    #[test]
    fn uniform_groups_envy_free() {
        let pairs = GroupStructure::new(vec![2, 2]).unwrap();
        let alloc = GroupAllocation::new(Partition::equal(2), vec![0, 1, 0, 1], &pairs).unwrap();
        let report = verify_group_envy(&vec![Valuation::uniform(); 4], &alloc, &int(0));
        assert!(report.pass);
        assert_eq!(report.max_envy, int(0));
    }

    #[test]
    fn morning_pair_together_is_exactly_envy_free() {
        let pairs = GroupStructure::new(vec![2, 2]).unwrap();
        let vals = vec![morning(), morning(), evening(), evening()];
        let y = Partition::new(vec![ratio(1, 20), ratio(19, 20)]).unwrap();
        let alloc = GroupAllocation::new(y.clone(), vec![0, 0, 1, 1], &pairs).unwrap();
        assert!(verify_group_envy(&vals, &alloc, &int(0)).pass);
        // mixed groups: someone has envy 1 at this cut
        let mixed = GroupAllocation::new(y, vec![0, 1, 0, 1], &pairs).unwrap();
        let report = verify_group_envy(&vals, &mixed, &int(0));
        assert_eq!(report.max_envy, int(1));
        assert!(!report.enviers().is_empty());
    }

    #[test]
    fn solve_morning_evening_groups() {
        let pairs = GroupStructure::new(vec![2, 2]).unwrap();
        let vals = vec![morning(), evening(), morning(), evening()];
        let eps = ratio(1, 100);
        let sol = solve_groups(&vals, &pairs, &eps, &SolverConfig::default()).unwrap();
        assert!(sol.report.pass);
        assert_eq!(sol.allocation.membership[0], sol.allocation.membership[2]);
        assert_eq!(sol.allocation.membership[1], sol.allocation.membership[3]);
    }

    #[test]
    fn unit_sizes_reproduce_individual_solver() {
        let vals = vec![Valuation::uniform(), Valuation::concentrated(ratio(1, 4), ratio(3, 4)).unwrap(), morning()];
        let eps = ratio(1, 50);
        let cfg = SolverConfig::default();
        let grouped = solve_groups(&vals, &GroupStructure::singletons(3), &eps, &cfg).unwrap();
        let single = solve_individual(&vals, &eps, &cfg).unwrap();
        assert_eq!(grouped.individual, single.allocation);
        assert_eq!(grouped.report, single.report);
    }

    #[test]
    fn thirty_uniform_players_in_tens() {
        let tens = GroupStructure::new(vec![10, 10, 10]).unwrap();
        let eps = ratio(1, 100);
        let sol = solve_groups(&vec![Valuation::uniform(); 30], &tens, &eps, &SolverConfig::default()).unwrap();
        assert!(sol.report.pass);
        for l in sol.allocation.partition.lengths() {
            assert!((l - ratio(1, 3)).abs() <= eps);
        }
        for j in 0..3 {
            assert_eq!(sol.allocation.members(j).len(), 10);
        }
    }

    #[test]
    fn abstract_group_demands() {
        // prefers the later group piece unless it is empty
        let late =
            FnDemand(|y: &Partition| PieceSet::from([(0..y.arity()).rev().find(|&i| !y.is_empty_piece(i)).unwrap()]));
        let early = FnDemand(|y: &Partition| PieceSet::from([(0..y.arity()).find(|&i| !y.is_empty_piece(i)).unwrap()]));
        let demands: Vec<&dyn Demand> = vec![&late, &early, &late];
        let groups = GroupStructure::new(vec![1, 2]).unwrap();
        let cert = solve_groups_demands(&demands, &groups, 8, &SolverConfig::default()).unwrap();
        assert!(cert.verify(&demands, &groups).unwrap());
        assert_eq!(cert.allocation.members(1), vec![0, 2]);
    }
}
