//! Door-in/door-out path following.
//!
//! The walk runs through the nested faces `F_0 ⊂ F_1 ⊂ ... ⊂ F_{n-1}` of the
//! cut simplex, where `F_k` is the face on which only the last `k + 1` pieces
//! can be nonempty. A door of a `k`-cell in `F_k` is a facet whose labels are
//! exactly the `k` pieces `n-1, n-2, ..., n-k`. Starting from the corner where
//! the last piece is the whole cake, every node of the door graph has degree
//! two except that corner and the fully-labeled top-dimensional cells, so the
//! path from the corner ends at one of them.
//!
//! Internally the walk uses mirrored coordinates `w_i = K - z_{n-2-i}` with
//! piece indices reversed, so that `F_k` is "coordinates `k..` are pinned at
//! `K`" and the door labels are `0..k`. The mirror maps Freudenthal cells to
//! Freudenthal cells.

use std::collections::{HashMap, HashSet};

use super::lattice::{in_region, ElementaryCell, LatticeVertex};
use super::scan::find_fully_labeled_scan;
use super::{label_vertex, labeled, SearchOutcome, SolverError};
use crate::model::Demand;

/// A Freudenthal simplex of dimension `perm.len()` in mirrored coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Face {
    base: Vec<u32>,
    perm: Vec<usize>,
}

impl Face {
    fn dim(&self) -> usize {
        self.perm.len()
    }

    fn vertex(&self, t: usize) -> Vec<u32> {
        let mut w = self.base.clone();
        for &axis in &self.perm[..t] {
            w[axis] += 1;
        }
        w
    }

    fn vertices(&self) -> Vec<Vec<u32>> {
        (0..=self.dim()).map(|t| self.vertex(t)).collect()
    }

    /// The neighbouring simplex across the facet opposite vertex `drop`,
    /// together with the index of its new vertex. `None` if it would leave
    /// the nonnegative orthant.
    fn pivot(&self, drop: usize) -> Option<(Face, usize)> {
        let k = self.dim();
        let mut base = self.base.clone();
        let mut perm = self.perm.clone();
        let entered = if drop == 0 {
            base[perm[0]] += 1;
            perm.rotate_left(1);
            k
        } else if drop == k {
            let axis = perm[k - 1];
            base[axis] = base[axis].checked_sub(1)?;
            perm.rotate_right(1);
            0
        } else {
            perm.swap(drop - 1, drop);
            drop
        };
        Some((Face { base, perm }, entered))
    }
}

struct Labeler<'a, D> {
    demands: &'a [D],
    mesh: u32,
    cache: HashMap<Vec<u32>, usize>,
}

impl<D: Demand> Labeler<'_, D> {
    fn label(&mut self, w: &[u32]) -> Result<usize, SolverError> {
        if let Some(&l) = self.cache.get(w) {
            return Ok(l);
        }
        let n = self.demands.len();
        let z: Vec<u32> = w.iter().rev().map(|&c| self.mesh - c).collect();
        let v = LatticeVertex::new(z, self.mesh)?;
        let l = n - 1 - label_vertex(&v, self.demands)?;
        self.cache.insert(w.to_vec(), l);
        Ok(l)
    }

    fn labels(&mut self, face: &Face) -> Result<Vec<usize>, SolverError> {
        face.vertices().iter().map(|w| self.label(w)).collect()
    }
}

/// Converts a top-dimensional mirrored face back to an [`ElementaryCell`].
fn unmirror(face: &Face, mesh: u32) -> ElementaryCell {
    let d = face.dim();
    let top = face.vertex(d);
    let base = top.iter().rev().map(|&c| mesh - c).collect();
    let perm = (0..d).map(|s| d - 1 - face.perm[d - 1 - s]).collect();
    ElementaryCell::new_unchecked(base, perm, mesh)
}

enum Step {
    Up,
    Enter(usize),
    Drop(usize),
}

/// Walk outcome before certificate assembly.
enum WalkEnd {
    Found(Face),
    Cycle,
}

/// Follows doors from the corner of the cut simplex to a fully-labeled cell.
///
/// `max_cells` bounds the number of cells (of any dimension) the walk may
/// enter. If a cell is ever revisited the walk gives up, falls back to the
/// exhaustive scan, and records a diagnostic on the outcome.
pub fn find_fully_labeled_walk<D: Demand>(
    demands: &[D],
    mesh: u32,
    max_cells: Option<u64>,
    workers: usize,
    cell_cap: u64,
) -> Result<SearchOutcome, SolverError> {
    let n = demands.len();
    if n < 2 || mesh == 0 {
        return Err(SolverError::InvalidInput(format!("walk needs n >= 2 and K >= 1 (n={n}, K={mesh})")));
    }
    let d = n - 1;
    let mut labeler = Labeler { demands, mesh, cache: HashMap::new() };
    let mut visited: HashSet<Face> = HashSet::new();
    let (mut cells_visited, mut faces_visited) = (0u64, 0u64);
    let broken = |detail: String| SolverError::WalkBroken { mesh, detail };

    let mut face = Face { base: vec![mesh; d], perm: vec![] };
    if labeler.label(&face.base)? != 0 {
        return Err(broken("corner vertex is not labeled with its only nonempty piece".into()));
    }
    let mut step = Step::Up;

    let end = loop {
        match step {
            Step::Up => {
                let k = face.dim();
                face.base[k] -= 1;
                face.perm.insert(0, k);
                step = Step::Enter(0);
            }
            Step::Enter(entered) => {
                let k = face.dim();
                if k == d {
                    cells_visited += 1;
                } else {
                    faces_visited += 1;
                }
                if let Some(limit) = max_cells {
                    if cells_visited + faces_visited > limit {
                        return Err(SolverError::BudgetExhausted {
                            used: cells_visited + faces_visited,
                            budget: limit,
                        });
                    }
                }
                if !visited.insert(face.clone()) {
                    break WalkEnd::Cycle;
                }
                let labels = labeler.labels(&face)?;
                let l = labels[entered];
                if l == k {
                    if k == d {
                        break WalkEnd::Found(face);
                    }
                    step = Step::Up;
                } else if l < k {
                    let twin = (0..=k).find(|&i| i != entered && labels[i] == l);
                    step = Step::Drop(twin.ok_or_else(|| broken(format!("entry facet of {face:?} is not a door")))?);
                } else {
                    return Err(broken(format!("label {l} outside face of dimension {k}")));
                }
            }
            Step::Drop(i) => {
                let k = face.dim();
                match face.pivot(i) {
                    Some((next, entered)) if next.vertices().iter().all(|w| in_region(w, mesh)) => {
                        face = next;
                        step = Step::Enter(entered);
                    }
                    _ if i == 0 && face.perm[0] == k - 1 && face.base[k - 1] + 1 == mesh => {
                        // the door lies in F_{k-1}: drop a dimension
                        if k == 1 {
                            break WalkEnd::Cycle;
                        }
                        face.base[k - 1] += 1;
                        face.perm.remove(0);
                        faces_visited += 1;
                        let labels = labeler.labels(&face)?;
                        let exit = labels.iter().position(|&l| l == k - 1);
                        step =
                            Step::Drop(exit.ok_or_else(|| broken(format!("descended into unlabeled face {face:?}")))?);
                    }
                    _ => {
                        return Err(broken(format!("door of {face:?} opposite vertex {i} lies on a foreign boundary")))
                    }
                }
            }
        }
    };

    match end {
        WalkEnd::Found(face) => {
            let cell = labeled(unmirror(&face, mesh), demands, None)?;
            debug_assert!(cell.is_fully_labeled());
            Ok(SearchOutcome { cell, cells_visited, faces_visited, diagnostic: None })
        }
        WalkEnd::Cycle => {
            let mut out = find_fully_labeled_scan(demands, mesh, workers, cell_cap)?;
            out.diagnostic = Some(format!(
                "walk revisited a cell after {} steps at mesh {mesh}; fell back to scan",
                cells_visited + faces_visited
            ));
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Valuation;
    use crate::rational::{int, ratio};
    use crate::sperner::cell_count;

    #[test]
    fn mirror_round_trip_preserves_vertices() {
        let mesh = 5;
        let face = Face { base: vec![1, 2, 2], perm: vec![2, 0, 1] };
        let cell = unmirror(&face, mesh);
        let mut from_face: Vec<Vec<u32>> =
            face.vertices().iter().map(|w| w.iter().rev().map(|&c| mesh - c).collect()).collect();
        from_face.reverse();
        assert_eq!(cell.vertex_coords(), from_face);
    }

    #[test]
    fn one_dimensional_walk_is_the_scan() {
        let instances = vec![
            vec![Valuation::uniform(), Valuation::uniform()],
            vec![Valuation::uniform(), Valuation::concentrated(ratio(9, 10), int(1)).unwrap()],
            vec![
                Valuation::concentrated(int(0), ratio(1, 10)).unwrap(),
                Valuation::concentrated(ratio(1, 3), ratio(1, 2)).unwrap(),
            ],
        ];
        for demands in instances {
            for mesh in 1..=12 {
                let walk = find_fully_labeled_walk(&demands, mesh, None, 1, 1000).unwrap();
                let scan = find_fully_labeled_scan(&demands, mesh, 1, 1000).unwrap();
                assert_eq!(walk.cell, scan.cell, "K={mesh}");
            }
        }
    }

    #[test]
    fn uniform_three_players_walk() {
        let demands = vec![Valuation::uniform(); 3];
        let out = find_fully_labeled_walk(&demands, 6, None, 1, 1000).unwrap();
        assert!(out.cell.is_fully_labeled());
        assert!(out.cell.verify(&demands).unwrap());
        assert!(out.diagnostic.is_none());
        assert!(out.cells_visited as u128 <= cell_count(3, 6));
    }

    #[test]
    fn budget_stops_walk() {
        let demands = vec![Valuation::uniform(); 4];
        assert!(matches!(
            find_fully_labeled_walk(&demands, 40, Some(3), 1, 10),
            Err(SolverError::BudgetExhausted { .. })
        ));
    }
}
