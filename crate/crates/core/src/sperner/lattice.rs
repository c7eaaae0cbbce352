//! The triangulated space of cut vectors.
//!
//! Cut vectors of an `n`-piece partition live in the order region
//! `0 <= c_1 <= ... <= c_{n-1} <= 1`. We discretize it with the lattice
//! `z / K` and triangulate with Freudenthal (Kuhn) cells: a base vertex plus a
//! permutation of coordinates to increment one at a time. Those cells never
//! straddle a hyperplane `z_i = z_j` or `z_i = const`, so the order region is
//! an exact union of them.

use num_bigint::BigInt;
use thiserror::Error;

use crate::model::{CutVector, Partition};
use crate::rational::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("mesh must be positive")]
    ZeroMesh,
    #[error("lattice point {0:?} is not a nondecreasing vector bounded by the mesh")]
    OutOfRegion(Vec<u32>),
    #[error("{perm:?} is not a permutation of the {dim} cut coordinates")]
    BadPermutation { perm: Vec<usize>, dim: usize },
    #[error("the cell leaves the order region")]
    CellOutOfRegion,
    #[error("cell enumeration needs at least 2 players")]
    TooFewPlayers,
    #[error("{cells} cells exceed the configured cap of {cap}")]
    TooManyCells { cells: u128, cap: u64 },
}

/// A point `z / K` of the cut lattice.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVertex {
    z: Vec<u32>,
    mesh: u32,
}

pub(crate) fn in_region(z: &[u32], mesh: u32) -> bool {
    z.windows(2).all(|w| w[0] <= w[1]) && z.last().is_none_or(|&top| top <= mesh)
}

impl LatticeVertex {
    pub fn new(z: Vec<u32>, mesh: u32) -> Result<Self, LatticeError> {
        if mesh == 0 {
            return Err(LatticeError::ZeroMesh);
        }
        if !in_region(&z, mesh) {
            return Err(LatticeError::OutOfRegion(z));
        }
        Ok(LatticeVertex { z, mesh })
    }

    pub fn coords(&self) -> &[u32] {
        &self.z
    }

    pub fn mesh(&self) -> u32 {
        self.mesh
    }

    pub fn players(&self) -> usize {
        self.z.len() + 1
    }

    pub fn cuts(&self) -> CutVector {
        let k = BigInt::from(self.mesh);
        CutVector::new(self.z.iter().map(|&c| Scalar::new(BigInt::from(c), k.clone())).collect())
            .expect("lattice points are valid cut vectors")
    }

    pub fn partition(&self) -> Partition {
        self.cuts().to_partition()
    }
}

/// Rainbow ownership: the coordinate sum modulo `n`.
pub fn owner_of(v: &LatticeVertex, n: usize) -> usize {
    let sum: u64 = v.z.iter().map(|&c| c as u64).sum();
    (sum % n as u64) as usize
}

/// A Freudenthal simplex: vertex `t` is `base + e_{perm[0]} + ... + e_{perm[t-1]}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementaryCell {
    base: Vec<u32>,
    perm: Vec<usize>,
    mesh: u32,
}

impl ElementaryCell {
    pub fn new(base: Vec<u32>, perm: Vec<usize>, mesh: u32) -> Result<Self, LatticeError> {
        if mesh == 0 {
            return Err(LatticeError::ZeroMesh);
        }
        let dim = base.len();
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        if sorted != (0..dim).collect::<Vec<_>>() {
            return Err(LatticeError::BadPermutation { perm, dim });
        }
        let cell = ElementaryCell { base, perm, mesh };
        if !cell.vertex_coords().iter().all(|z| in_region(z, mesh)) {
            return Err(LatticeError::CellOutOfRegion);
        }
        Ok(cell)
    }

    pub(crate) fn new_unchecked(base: Vec<u32>, perm: Vec<usize>, mesh: u32) -> Self {
        ElementaryCell { base, perm, mesh }
    }

    pub fn base(&self) -> &[u32] {
        &self.base
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn mesh(&self) -> u32 {
        self.mesh
    }

    pub fn players(&self) -> usize {
        self.base.len() + 1
    }

    pub fn vertex_coords(&self) -> Vec<Vec<u32>> {
        let mut out = Vec::with_capacity(self.perm.len() + 1);
        let mut z = self.base.clone();
        out.push(z.clone());
        for &axis in &self.perm {
            z[axis] += 1;
            out.push(z.clone());
        }
        out
    }

    pub fn vertices(&self) -> Vec<LatticeVertex> {
        self.vertex_coords().into_iter().map(|z| LatticeVertex { z, mesh: self.mesh }).collect()
    }

    /// Cut vector at the average of the cell's vertices.
    pub fn barycenter(&self) -> CutVector {
        let n = self.players() as u64;
        let denom = BigInt::from(self.mesh as u64 * n);
        let sums = self.vertex_coords().iter().fold(vec![0u64; self.base.len()], |mut acc, z| {
            acc.iter_mut().zip(z).for_each(|(a, &c)| *a += c as u64);
            acc
        });
        CutVector::new(sums.into_iter().map(|s| Scalar::new(BigInt::from(s), denom.clone())).collect())
            .expect("barycenter of a valid cell lies in the order region")
    }
}

/// Number of cells in the triangulation at mesh `K`: `K^(n-1)`.
pub fn cell_count(n: usize, mesh: u32) -> u128 {
    (mesh as u128).saturating_pow(n.saturating_sub(1) as u32)
}

/// All permutations of `0..d` in lexicographic order.
pub(crate) fn permutations(d: usize) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..d).collect();
    let mut out = vec![perm.clone()];
    loop {
        let Some(i) = (1..d).rev().find(|&i| perm[i - 1] < perm[i]) else {
            return out;
        };
        let j = (i..d).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
        perm.swap(i - 1, j);
        perm[i..].reverse();
        out.push(perm.clone());
    }
}

/// Advances `z` to the next nondecreasing vector with entries in `0..=max`
/// in lexicographic order. Returns false when exhausted.
pub(crate) fn next_sorted(z: &mut [u32], max: u32) -> bool {
    let Some(i) = (0..z.len()).rev().find(|&i| z[i] < max) else {
        return false;
    };
    let v = z[i] + 1;
    z[i..].iter_mut().for_each(|c| *c = v);
    true
}

/// Every lattice point of the order region, in lexicographic order.
pub fn lattice_points(n: usize, mesh: u32) -> Vec<LatticeVertex> {
    let mut z = vec![0u32; n - 1];
    let mut out = vec![LatticeVertex { z: z.clone(), mesh }];
    while next_sorted(&mut z, mesh) {
        out.push(LatticeVertex { z: z.clone(), mesh });
    }
    out
}

/// Lexicographic stream of the triangulation's cells (by base, then permutation).
pub struct CellIter {
    mesh: u32,
    perms: Vec<Vec<usize>>,
    base: Option<Vec<u32>>,
    next_perm: usize,
}

impl Iterator for CellIter {
    type Item = ElementaryCell;

    fn next(&mut self) -> Option<ElementaryCell> {
        loop {
            let base = self.base.as_mut()?;
            while self.next_perm < self.perms.len() {
                let perm = &self.perms[self.next_perm];
                self.next_perm += 1;
                if perm_fits(base, perm, self.mesh) {
                    return Some(ElementaryCell::new_unchecked(base.clone(), perm.clone(), self.mesh));
                }
            }
            self.next_perm = 0;
            if !next_sorted(base, self.mesh - 1) {
                self.base = None;
            }
        }
    }
}

fn perm_fits(base: &[u32], perm: &[usize], mesh: u32) -> bool {
    let mut z = base.to_vec();
    for &axis in perm {
        z[axis] += 1;
        if z[axis] > mesh || (axis > 0 && z[axis - 1] > z[axis]) || (axis + 1 < z.len() && z[axis] > z[axis + 1]) {
            return false;
        }
    }
    true
}

/// Enumerates every cell of the mesh-`K` triangulation for `n` players.
/// Refuses when the `K^(n-1)` cells exceed `cap`.
pub fn enumerate_cells(n: usize, mesh: u32, cap: u64) -> Result<CellIter, LatticeError> {
    if n < 2 {
        return Err(LatticeError::TooFewPlayers);
    }
    if mesh == 0 {
        return Err(LatticeError::ZeroMesh);
    }
    let cells = cell_count(n, mesh);
    if cells > cap as u128 {
        return Err(LatticeError::TooManyCells { cells, cap });
    }
    Ok(CellIter { mesh, perms: permutations(n - 1), base: Some(vec![0; n - 1]), next_perm: 0 })
}
