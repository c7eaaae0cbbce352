//! Exhaustive scan over the triangulation.

use std::collections::HashMap;

use rayon::prelude::*;

use super::lattice::{enumerate_cells, lattice_points, ElementaryCell, LatticeVertex};
use super::{label_vertex, labeled, with_workers, LabeledCell, SearchOutcome, SolverError};
use crate::model::Demand;

fn label_table<D: Demand>(n: usize, mesh: u32, demands: &[D]) -> Result<HashMap<LatticeVertex, usize>, SolverError> {
    let points = lattice_points(n, mesh);
    // collect keeps input order, so the first error reported is deterministic
    let labels: Vec<usize> = points.par_iter().map(|v| label_vertex(v, demands)).collect::<Result<_, _>>()?;
    Ok(points.into_iter().zip(labels).collect())
}

fn check_inputs<D: Demand>(demands: &[D], mesh: u32) -> Result<usize, SolverError> {
    let n = demands.len();
    if n < 2 {
        return Err(SolverError::InvalidInput(format!("the scan needs at least 2 players, got {n}")));
    }
    if mesh == 0 {
        return Err(SolverError::InvalidInput("mesh must be positive".into()));
    }
    Ok(n)
}

fn labeled_cells<D: Demand>(
    demands: &[D],
    mesh: u32,
    workers: usize,
    cell_cap: u64,
) -> Result<(Vec<ElementaryCell>, HashMap<LatticeVertex, usize>), SolverError> {
    let n = check_inputs(demands, mesh)?;
    let cells: Vec<ElementaryCell> = enumerate_cells(n, mesh, cell_cap)?.collect();
    let table = with_workers(workers, || label_table(n, mesh, demands))??;
    Ok((cells, table))
}

fn full(n: usize, table: &HashMap<LatticeVertex, usize>, cell: &ElementaryCell) -> bool {
    let mut seen = vec![false; n];
    cell.vertices().iter().all(|v| {
        let l = table[v];
        l < seen.len() && !std::mem::replace(&mut seen[l], true)
    })
}

/// Returns the lexicographically first fully-labeled cell at mesh `K`.
///
/// Labels are computed in parallel over `workers` threads; the result does
/// not depend on the worker count. `cells_visited` is the 1-based position of
/// the returned cell in the enumeration order.
pub fn find_fully_labeled_scan<D: Demand>(
    demands: &[D],
    mesh: u32,
    workers: usize,
    cell_cap: u64,
) -> Result<SearchOutcome, SolverError> {
    let (cells, table) = labeled_cells(demands, mesh, workers, cell_cap)?;
    let n = demands.len();
    let found = with_workers(workers, || cells.par_iter().position_first(|c| full(n, &table, c)))?;
    match found {
        Some(pos) => Ok(SearchOutcome {
            cell: labeled(cells[pos].clone(), demands, Some(&table))?,
            cells_visited: pos as u64 + 1,
            faces_visited: 0,
            diagnostic: None,
        }),
        None => {
            let mut dump: Vec<_> = table.iter().map(|(v, l)| (v.coords().to_vec(), *l)).collect();
            dump.sort();
            let labels = dump.iter().map(|(z, l)| format!("{z:?}->{l}")).collect::<Vec<_>>().join(" ");
            Err(SolverError::NoFullyLabeledCell { mesh, labels })
        }
    }
}

/// Every fully-labeled cell at mesh `K`, in lexicographic order.
pub fn fully_labeled_cells<D: Demand>(
    demands: &[D],
    mesh: u32,
    workers: usize,
    cell_cap: u64,
) -> Result<Vec<LabeledCell>, SolverError> {
    let (cells, table) = labeled_cells(demands, mesh, workers, cell_cap)?;
    let n = demands.len();
    cells.into_iter().filter(|c| full(n, &table, c)).map(|c| labeled(c, demands, Some(&table))).collect()
}

pub fn count_fully_labeled<D: Demand>(
    demands: &[D],
    mesh: u32,
    workers: usize,
    cell_cap: u64,
) -> Result<usize, SolverError> {
    let (cells, table) = labeled_cells(demands, mesh, workers, cell_cap)?;
    let n = demands.len();
    with_workers(workers, || cells.par_iter().filter(|c| full(n, &table, c)).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Partition, PieceSet, Valuation};
    use crate::rational::{int, ratio};

    #[test]
    fn two_uniform_players_split_at_half() {
        let demands = vec![Valuation::uniform(); 2];
        let out = find_fully_labeled_scan(&demands, 2, 1, 1000).unwrap();
        let verts = out.cell.cell.vertices();
        let cuts: Vec<_> = verts.iter().map(|v| v.cuts().cuts()[0].clone()).collect();
        assert!(cuts[0] <= ratio(1, 2) && ratio(1, 2) <= cuts[1]);
    }

    #[test]
    fn three_uniform_players_near_thirds() {
        let demands = vec![Valuation::uniform(); 3];
        let out = find_fully_labeled_scan(&demands, 3, 1, 1000).unwrap();
        assert!(out.cell.is_fully_labeled());
        let near = out.cell.cell.vertices().iter().any(|v| v.coords() == [1, 2]);
        assert!(near, "cell {:?} not adjacent to (1/3, 2/3)", out.cell.cell);
    }

    #[test]
    fn evening_player_segment() {
        let evening = Valuation::concentrated(ratio(9, 10), int(1)).unwrap();
        let demands = vec![Valuation::uniform(), evening];
        let out = find_fully_labeled_scan(&demands, 10, 1, 1000).unwrap();
        let verts = out.cell.cell.vertices();
        let lo = verts[0].cuts().cuts()[0].clone();
        let hi = verts[1].cuts().cuts()[0].clone();
        assert!(lo >= ratio(1, 2) && hi <= ratio(9, 10), "[{lo}, {hi}]");
    }

    #[test]
    fn abstract_demand_finds_cell() {
        let stubborn = crate::model::FnDemand(|x: &Partition| {
            PieceSet::from([(0..x.arity()).rev().find(|&i| !x.is_empty_piece(i)).unwrap()])
        });
        let demands = vec![&stubborn, &stubborn];
        assert!(find_fully_labeled_scan(&demands, 4, 1, 100).is_ok());
    }

    #[test]
    fn worker_count_does_not_change_result() {
        let demands = vec![
            Valuation::uniform(),
            Valuation::concentrated(ratio(1, 5), ratio(7, 10)).unwrap(),
            Valuation::concentrated(int(0), ratio(1, 3)).unwrap(),
        ];
        let one = find_fully_labeled_scan(&demands, 12, 1, 10_000).unwrap();
        let four = find_fully_labeled_scan(&demands, 12, 4, 10_000).unwrap();
        assert_eq!(one, four);
        assert_eq!(count_fully_labeled(&demands, 12, 1, 10_000).unwrap() % 2, 1);
    }
}
