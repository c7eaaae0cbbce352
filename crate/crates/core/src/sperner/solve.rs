use num_bigint::BigInt;
use num_traits::Zero;

use super::lattice::{cell_count, ElementaryCell};
use super::scan::find_fully_labeled_scan;
use super::walk::find_fully_labeled_walk;
use super::{LabeledCell, SearchOutcome, SolverError};
use crate::envy::{envy_report, max_density, EnvyReport};
use crate::model::{Assignment, Demand, Partition, Valuation};
use crate::rational::{ceil_to_u64, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SearchMode {
    /// Scan for small instances, walk otherwise.
    Auto,
    Scan,
    Walk,
}

impl SearchMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SearchMode::Auto => "auto",
            SearchMode::Scan => "scan",
            SearchMode::Walk => "walk",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub mode: SearchMode,
    /// First mesh of the doubling schedule; defaults to `n`.
    pub initial_mesh: Option<u32>,
    pub workers: usize,
    /// Total cells all mesh levels together may examine.
    pub budget_cells: u64,
    /// Largest triangulation the scan will enumerate.
    pub scan_cell_cap: u64,
    /// `Auto` scans only up to this many players.
    pub auto_scan_max_players: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mode: SearchMode::Auto,
            initial_mesh: None,
            workers: 1,
            budget_cells: 50_000_000,
            scan_cell_cap: 200_000,
            auto_scan_max_players: 4,
        }
    }
}

/// Pieces read off a fully-labeled cell: each vertex owner gets its label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndividualAllocation {
    /// Partition at the cell's barycenter.
    pub partition: Partition,
    pub assignment: Assignment,
    pub certificate: LabeledCell,
}

impl IndividualAllocation {
    pub fn mesh(&self) -> u32 {
        self.certificate.cell.mesh()
    }

    /// Whole cake to a lone player.
    pub fn single() -> Self {
        IndividualAllocation {
            partition: Partition::whole(),
            assignment: Assignment::identity(1),
            certificate: LabeledCell {
                cell: ElementaryCell::new_unchecked(vec![], vec![], 1),
                owners: vec![0],
                labels: vec![0],
            },
        }
    }
}

pub fn read_allocation(cell: &LabeledCell) -> IndividualAllocation {
    let n = cell.owners.len();
    let mut piece_of = vec![0; n];
    for (&owner, &label) in cell.owners.iter().zip(&cell.labels) {
        piece_of[owner] = label;
    }
    IndividualAllocation {
        partition: cell.cell.barycenter().to_partition(),
        assignment: Assignment::new(piece_of).expect("fully-labeled rainbow cell gives a bijection"),
        certificate: cell.clone(),
    }
}

pub fn check_envy_individual(valuations: &[Valuation], alloc: &IndividualAllocation, eps: &Scalar) -> EnvyReport {
    envy_report(valuations, &alloc.partition, alloc.assignment.as_slice(), eps)
}

/// `2 D (n - 1) / K`: worst-case envy of a cell readout at mesh `K` when no
/// density exceeds `D`.
pub fn envy_bound(max_density: &Scalar, n: usize, mesh: u32) -> Scalar {
    max_density * Scalar::new(BigInt::from(2 * (n as u64 - 1)), BigInt::from(mesh))
}

/// Mesh at which the envy bound drops to `eps`, never below `n`.
fn bound_mesh(dmax: &Scalar, n: usize, eps: &Scalar) -> u64 {
    let k = ceil_to_u64(&(dmax * Scalar::from_integer(BigInt::from(2 * (n as u64 - 1))) / eps)).unwrap_or(u64::MAX);
    k.max(n as u64)
}

/// Runs the configured finder at one mesh. Returns the outcome and the mode
/// actually used.
pub fn find_fully_labeled<D: Demand>(
    demands: &[D],
    mesh: u32,
    cfg: &SolverConfig,
    max_cells: Option<u64>,
) -> Result<(SearchOutcome, SearchMode), SolverError> {
    let n = demands.len();
    let mode = match cfg.mode {
        SearchMode::Auto if n <= cfg.auto_scan_max_players && cell_count(n, mesh) <= cfg.scan_cell_cap as u128 => {
            SearchMode::Scan
        }
        SearchMode::Auto => SearchMode::Walk,
        m => m,
    };
    let outcome = match mode {
        SearchMode::Scan => {
            let cells = cell_count(n, mesh);
            if let Some(limit) = max_cells {
                if cells > limit as u128 {
                    return Err(SolverError::BudgetExhausted { used: 0, budget: limit });
                }
            }
            find_fully_labeled_scan(demands, mesh, cfg.workers, cfg.scan_cell_cap)?
        }
        _ => find_fully_labeled_walk(demands, mesh, max_cells, cfg.workers, cfg.scan_cell_cap)?,
    };
    Ok((outcome, mode))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeshLevel {
    pub mesh: u32,
    pub mode: SearchMode,
    pub cells_visited: u64,
    pub faces_visited: u64,
    pub max_envy: Scalar,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    /// The cell budget ran out; the best allocation seen is returned.
    BudgetExceeded,
}

pub(crate) struct Scheduled<R> {
    pub allocation: IndividualAllocation,
    pub evaluation: R,
    pub status: SolveStatus,
    pub levels: Vec<MeshLevel>,
}

/// The doubling mesh schedule shared by individual and group solving.
///
/// Starts at `initial_mesh` (default `n`), doubles, and clamps the last step
/// to the mesh where the envy bound guarantees success. `evaluate` scores a
/// readout and returns its max envy.
pub(crate) fn run_schedule<D: Demand, R>(
    demands: &[D],
    eps: &Scalar,
    dmax: &Scalar,
    cfg: &SolverConfig,
    mut evaluate: impl FnMut(&IndividualAllocation) -> (R, Scalar),
) -> Result<Scheduled<R>, SolverError> {
    let n = demands.len();
    if n == 0 {
        return Err(SolverError::InvalidInput("no players".into()));
    }
    if eps <= &Scalar::zero() {
        return Err(SolverError::InvalidInput("epsilon must be positive".into()));
    }
    if n == 1 {
        let allocation = IndividualAllocation::single();
        let (evaluation, max_envy) = evaluate(&allocation);
        let level =
            MeshLevel { mesh: 1, mode: cfg.mode, cells_visited: 0, faces_visited: 0, max_envy, diagnostic: None };
        return Ok(Scheduled { allocation, evaluation, status: SolveStatus::Converged, levels: vec![level] });
    }

    let target = bound_mesh(dmax, n, eps);
    let mut mesh = cfg.initial_mesh.unwrap_or(n as u32).max(1) as u64;
    let mut used = 0u64;
    let mut levels = vec![];
    let mut best: Option<(IndividualAllocation, R, Scalar)> = None;

    loop {
        let remaining = cfg.budget_cells.saturating_sub(used);
        let mesh32 = u32::try_from(mesh).map_err(|_| SolverError::InvalidInput(format!("mesh {mesh} too large")))?;
        let (outcome, mode) = match find_fully_labeled(demands, mesh32, cfg, Some(remaining)) {
            Ok(found) => found,
            Err(SolverError::BudgetExhausted { .. }) => {
                return match best {
                    Some((allocation, evaluation, _)) => {
                        Ok(Scheduled { allocation, evaluation, status: SolveStatus::BudgetExceeded, levels })
                    }
                    None => Err(SolverError::BudgetExhausted { used, budget: cfg.budget_cells }),
                };
            }
            Err(e) => return Err(e),
        };
        used += outcome.cells_visited + outcome.faces_visited;

        let allocation = read_allocation(&outcome.cell);
        let (evaluation, max_envy) = evaluate(&allocation);
        levels.push(MeshLevel {
            mesh: mesh32,
            mode,
            cells_visited: outcome.cells_visited,
            faces_visited: outcome.faces_visited,
            max_envy: max_envy.clone(),
            diagnostic: outcome.diagnostic,
        });
        let converged = max_envy <= *eps;
        if best.as_ref().is_none_or(|(_, _, e)| max_envy < *e) {
            best = Some((allocation, evaluation, max_envy));
        }
        if converged {
            let (allocation, evaluation, _) = best.expect("just stored");
            return Ok(Scheduled { allocation, evaluation, status: SolveStatus::Converged, levels });
        }
        mesh = if mesh < target { (mesh * 2).min(target) } else { mesh * 2 };
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndividualSolution {
    pub allocation: IndividualAllocation,
    pub report: EnvyReport,
    pub status: SolveStatus,
    pub levels: Vec<MeshLevel>,
}

/// Finds an `eps`-envy-free division among players with the given valuations,
/// one contiguous piece each.
pub fn solve_individual(
    valuations: &[Valuation],
    eps: &Scalar,
    cfg: &SolverConfig,
) -> Result<IndividualSolution, SolverError> {
    let dmax = max_density(valuations);
    let run = run_schedule(valuations, eps, &dmax, cfg, |alloc| {
        let report = check_envy_individual(valuations, alloc, eps);
        let max = report.max_envy.clone();
        (report, max)
    })?;
    Ok(IndividualSolution {
        allocation: run.allocation,
        report: run.evaluation,
        status: run.status,
        levels: run.levels,
    })
}

/// Result for abstract demands, which carry no envy magnitude: every player
/// demanded their assigned piece at a cell vertex within cut-space (L1)
/// distance `delta = (n - 1) / K` of the reported partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeshCertificate {
    pub allocation: IndividualAllocation,
    pub delta: Scalar,
    pub cells_visited: u64,
    pub diagnostic: Option<String>,
}

impl MeshCertificate {
    pub fn verify<D: Demand>(&self, demands: &[D]) -> Result<bool, SolverError> {
        self.allocation.certificate.verify(demands)
    }
}

/// Solves at a single requested mesh for arbitrary demand functions.
pub fn solve_individual_demands<D: Demand>(
    demands: &[D],
    mesh: u32,
    cfg: &SolverConfig,
) -> Result<MeshCertificate, SolverError> {
    let n = demands.len();
    if n == 0 {
        return Err(SolverError::InvalidInput("no players".into()));
    }
    if n == 1 {
        return Ok(MeshCertificate {
            allocation: IndividualAllocation::single(),
            delta: Scalar::zero(),
            cells_visited: 0,
            diagnostic: None,
        });
    }
    let (outcome, _) = find_fully_labeled(demands, mesh, cfg, Some(cfg.budget_cells))?;
    Ok(MeshCertificate {
        allocation: read_allocation(&outcome.cell),
        delta: Scalar::new(BigInt::from(n as u64 - 1), BigInt::from(mesh)),
        cells_visited: outcome.cells_visited,
        diagnostic: outcome.diagnostic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FnDemand, PieceSet};
    use crate::rational::{int, ratio};
    use num_traits::Signed;

    #[test]
    fn single_player_gets_everything() {
        let sol = solve_individual(&[Valuation::uniform()], &ratio(1, 100), &SolverConfig::default()).unwrap();
        assert_eq!(sol.allocation.partition, Partition::whole());
        assert_eq!(sol.report.max_envy, int(0));
        assert_eq!(sol.status, SolveStatus::Converged);
    }

    #[test]
    fn three_uniform_players_near_thirds() {
        let eps = ratio(1, 100);
        let sol = solve_individual(&vec![Valuation::uniform(); 3], &eps, &SolverConfig::default()).unwrap();
        assert!(sol.report.pass);
        let cuts = sol.allocation.partition.to_cuts();
        for (c, target) in cuts.cuts().iter().zip([ratio(1, 3), ratio(2, 3)]) {
            assert!((c - &target).abs() <= eps, "cut {c}");
        }
    }

    #[test]
    fn evening_player_gets_right_piece() {
        let eps = ratio(1, 100);
        let vals = vec![Valuation::uniform(), Valuation::concentrated(ratio(9, 10), int(1)).unwrap()];
        let sol = solve_individual(&vals, &eps, &SolverConfig::default()).unwrap();
        assert_eq!(sol.allocation.assignment.piece_of(1), 1);
        let cuts = sol.allocation.partition.to_cuts();
        let cut = &cuts.cuts()[0];
        // exact envy-free cuts form [1/2, 19/20]
        assert!(*cut >= ratio(1, 2) - &eps && *cut <= ratio(19, 20) + &eps, "cut {cut}");
        assert!(sol.report.pass);
    }

    #[test]
    fn rejects_nonpositive_epsilon() {
        assert!(matches!(
            solve_individual(&vec![Valuation::uniform(); 2], &int(0), &SolverConfig::default()),
            Err(SolverError::InvalidInput(_))
        ));
    }

    #[test]
    fn budget_exceeded_returns_best_so_far() {
        let vals = vec![
            Valuation::concentrated(int(0), ratio(1, 1000)).unwrap(),
            Valuation::concentrated(ratio(1, 3), ratio(1, 2)).unwrap(),
            Valuation::uniform(),
        ];
        let cfg = SolverConfig { budget_cells: 30, ..SolverConfig::default() };
        let sol = solve_individual(&vals, &ratio(1, 1000), &cfg).unwrap();
        assert_eq!(sol.status, SolveStatus::BudgetExceeded);
        assert!(!sol.levels.is_empty());
        let cfg = SolverConfig { budget_cells: 2, ..SolverConfig::default() };
        assert!(matches!(solve_individual(&vals, &ratio(1, 1000), &cfg), Err(SolverError::BudgetExhausted { .. })));
    }

    #[test]
    fn abstract_demands_get_mesh_certificate() {
        let last =
            FnDemand(|x: &Partition| PieceSet::from([(0..x.arity()).rev().find(|&i| !x.is_empty_piece(i)).unwrap()]));
        let first = FnDemand(|x: &Partition| PieceSet::from([(0..x.arity()).find(|&i| !x.is_empty_piece(i)).unwrap()]));
        let demands: Vec<&dyn Demand> = vec![&last, &first, &last];
        let cert = solve_individual_demands(&demands, 6, &SolverConfig::default()).unwrap();
        assert_eq!(cert.delta, ratio(2, 6));
        assert!(cert.verify(&demands).unwrap());
    }
}
