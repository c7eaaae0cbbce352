//! Brute-force ground truth on a cut grid.
//!
//! Cuts are restricted to multiples of `1/R` and every allocation is
//! enumerated, so results are exact minima over the grid, not over all
//! divisions. Nothing here shares code with the simplicial solver.

use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::envy::EnvyReport;
use crate::groups::{assemble_groups, verify_group_envy, GroupAllocation, GroupStructure};
use crate::instances::random_instance;
use crate::model::{CutVector, Partition, Valuation};
use crate::rational::Scalar;
use crate::sperner::{solve_individual, IndividualSolution, SolverConfig, SolverError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("grid resolution must be positive")]
    ZeroResolution,
    #[error("{players} players exceed the oracle cap of {cap}")]
    TooManyPlayers { players: usize, cap: usize },
    #[error("resolution {resolution} exceeds the oracle cap of {cap}")]
    ResolutionTooHigh { resolution: u32, cap: u32 },
    #[error("estimated {estimate} evaluations exceed the oracle cap of {cap}")]
    TooExpensive { estimate: u128, cap: u64 },
    #[error("invalid membership: {0}")]
    Membership(String),
    #[error("valuations cover {got} players, expected {expected}")]
    PlayerCount { expected: usize, got: usize },
    #[error("could not start worker pool: {0}")]
    Workers(String),
}

/// Cuts restricted to multiples of `1 / resolution`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    resolution: u32,
}

impl GridSpec {
    pub fn new(resolution: u32) -> Result<Self, OracleError> {
        if resolution == 0 {
            return Err(OracleError::ZeroResolution);
        }
        Ok(GridSpec { resolution })
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_players: usize,
    pub max_resolution: u32,
    pub max_evaluations: u64,
    pub workers: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_players: 4, max_resolution: 64, max_evaluations: 20_000_000, workers: 1 }
    }
}

/// One grid allocation: the cuts plus the piece held by each player (for
/// group modes, the group's piece).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleAllocation {
    pub cuts: CutVector,
    pub holder: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub min_max_envy: Scalar,
    /// Lexicographically first optimal allocation.
    pub best: OracleAllocation,
    /// Every grid cut vector attaining the minimum, in lexicographic order.
    pub argmin_cuts: Vec<CutVector>,
}

/// Nondecreasing integer vectors of length `len` with entries in `0..=r`.
fn grid_points(len: usize, r: u32) -> Vec<Vec<u32>> {
    fn rec(prefix: &mut Vec<u32>, len: usize, lo: u32, r: u32, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == len {
            out.push(prefix.clone());
            return;
        }
        for c in lo..=r {
            prefix.push(c);
            rec(prefix, len, c, r, out);
            prefix.pop();
        }
    }
    let mut out = vec![];
    rec(&mut Vec::with_capacity(len), len, 0, r, &mut out);
    out
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = vec![];
    rec(&mut vec![], &mut vec![false; n], &mut out);
    out
}

fn cut_vector(z: &[u32], r: u32) -> CutVector {
    CutVector::new(z.iter().map(|&c| Scalar::new(c.into(), r.into())).collect()).expect("grid point is sorted")
}

/// `envy[i][p]`: how much more player `i` values their best piece than piece `p`.
fn envy_matrix(valuations: &[Valuation], x: &Partition) -> Vec<Vec<Scalar>> {
    valuations
        .iter()
        .map(|v| {
            let values = v.piece_values(x);
            let best = values.iter().max().cloned().unwrap_or_else(Scalar::zero);
            values.iter().map(|val| &best - val).collect()
        })
        .collect()
}

fn check_caps(players: usize, grid: GridSpec, estimate: u128, limits: &OracleLimits) -> Result<(), OracleError> {
    if players > limits.max_players {
        return Err(OracleError::TooManyPlayers { players, cap: limits.max_players });
    }
    if grid.resolution > limits.max_resolution {
        return Err(OracleError::ResolutionTooHigh { resolution: grid.resolution, cap: limits.max_resolution });
    }
    if estimate > limits.max_evaluations as u128 {
        return Err(OracleError::TooExpensive { estimate, cap: limits.max_evaluations });
    }
    Ok(())
}

/// Evaluates `best_at` on every grid cut vector with `pieces` pieces and
/// merges deterministically.
fn search_grid(
    pieces: usize,
    grid: GridSpec,
    workers: usize,
    best_at: impl Fn(&Partition) -> (Scalar, Vec<usize>) + Sync,
) -> Result<OracleResult, OracleError> {
    let r = grid.resolution;
    let points = grid_points(pieces - 1, r);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| OracleError::Workers(e.to_string()))?;
    let scored: Vec<(Scalar, Vec<usize>)> =
        pool.install(|| points.par_iter().map(|z| best_at(&cut_vector(z, r).to_partition())).collect());
    let min = scored.iter().map(|(e, _)| e).min().expect("grid is nonempty").clone();
    let mut argmin = points.iter().zip(&scored).filter(|(_, (e, _))| *e == min);
    let (first_z, (_, holder)) = argmin.next().expect("minimum is attained");
    let best = OracleAllocation { cuts: cut_vector(first_z, r), holder: holder.clone() };
    let mut argmin_cuts = vec![best.cuts.clone()];
    argmin_cuts.extend(argmin.map(|(z, _)| cut_vector(z, r)));
    Ok(OracleResult { min_max_envy: min, best, argmin_cuts })
}

/// Exact minimum over grid cuts and all `n!` assignments of the largest
/// individual envy.
pub fn grid_min_envy_individual(
    valuations: &[Valuation],
    grid: GridSpec,
    limits: &OracleLimits,
) -> Result<OracleResult, OracleError> {
    let n = valuations.len();
    let estimate = binomial(grid.resolution as u128 + n as u128 - 1, n as u128 - 1) * factorial(n);
    check_caps(n, grid, estimate, limits)?;
    let perms = all_permutations(n);
    search_grid(n, grid, limits.workers, |x| {
        let envy = envy_matrix(valuations, x);
        let mut best: Option<(Scalar, &Vec<usize>)> = None;
        for perm in &perms {
            let worst = (0..n).map(|i| &envy[i][perm[i]]).max().unwrap().clone();
            if best.as_ref().is_none_or(|(b, _)| worst < *b) {
                best = Some((worst, perm));
            }
        }
        let (e, perm) = best.unwrap();
        (e, perm.clone())
    })
}

/// Capacitated bipartite matching (players to group slots) using only edges
/// with envy at most `threshold`. Returns each player's group if all fit.
fn capacitated_assignment(envy: &[Vec<Scalar>], sizes: &[usize], threshold: &Scalar) -> Option<Vec<usize>> {
    let n = envy.len();
    let slots: Vec<usize> = sizes.iter().enumerate().flat_map(|(j, &k)| std::iter::repeat_n(j, k)).collect();
    let mut slot_owner: Vec<Option<usize>> = vec![None; slots.len()];

    fn augment(
        p: usize,
        envy: &[Vec<Scalar>],
        slots: &[usize],
        threshold: &Scalar,
        seen: &mut [bool],
        slot_owner: &mut [Option<usize>],
    ) -> bool {
        for s in 0..slots.len() {
            if seen[s] || envy[p][slots[s]] > *threshold {
                continue;
            }
            seen[s] = true;
            let free = match slot_owner[s] {
                None => true,
                Some(q) => augment(q, envy, slots, threshold, seen, slot_owner),
            };
            if free {
                slot_owner[s] = Some(p);
                return true;
            }
        }
        false
    }

    for p in 0..n {
        let mut seen = vec![false; slots.len()];
        if !augment(p, envy, &slots, threshold, &mut seen, &mut slot_owner) {
            return None;
        }
    }
    let mut group = vec![0; n];
    for (s, owner) in slot_owner.iter().enumerate() {
        group[owner.expect("perfect matching")] = slots[s];
    }
    Some(group)
}

/// Exact minimum over grid `m`-cuts and all size-respecting memberships of
/// the largest envy, with group `j` holding piece `j`.
pub fn grid_min_envy_groups(
    valuations: &[Valuation],
    groups: &GroupStructure,
    grid: GridSpec,
    limits: &OracleLimits,
) -> Result<OracleResult, OracleError> {
    let n = valuations.len();
    if n != groups.players() {
        return Err(OracleError::PlayerCount { expected: groups.players(), got: n });
    }
    let m = groups.groups();
    let estimate = binomial(grid.resolution as u128 + m as u128 - 1, m as u128 - 1) * (n * n * m) as u128;
    check_caps(n, grid, estimate, limits)?;
    search_grid(m, grid, limits.workers, |y| {
        let envy = envy_matrix(valuations, y);
        let mut candidates: Vec<Scalar> = envy.iter().flatten().cloned().collect();
        candidates.sort();
        candidates.dedup();
        // feasibility is monotone in the threshold
        let (mut lo, mut hi) = (0, candidates.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if capacitated_assignment(&envy, groups.sizes(), &candidates[mid]).is_some() {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let membership = capacitated_assignment(&envy, groups.sizes(), &candidates[lo]).expect("largest is feasible");
        (candidates[lo].clone(), membership)
    })
}

/// Exact grid minimum of the largest envy when group membership is frozen;
/// only the cuts and which group sits on which piece may vary.
///
/// `membership[g]` lists the players of group `g`. The returned `holder`
/// gives each player's piece.
pub fn fixed_group_min_envy(
    valuations: &[Valuation],
    membership: &[Vec<usize>],
    grid: GridSpec,
    limits: &OracleLimits,
) -> Result<OracleResult, OracleError> {
    let n = valuations.len();
    let m = membership.len();
    if m == 0 {
        return Err(OracleError::Membership("no groups".into()));
    }
    let mut group_of = vec![None; n];
    for (g, members) in membership.iter().enumerate() {
        if members.is_empty() {
            return Err(OracleError::Membership(format!("group {g} is empty")));
        }
        for &p in members {
            match group_of.get_mut(p) {
                Some(slot @ None) => *slot = Some(g),
                Some(Some(_)) => return Err(OracleError::Membership(format!("player {p} listed twice"))),
                None => return Err(OracleError::Membership(format!("unknown player {p}"))),
            }
        }
    }
    let group_of: Vec<usize> = match group_of.into_iter().collect::<Option<_>>() {
        Some(g) => g,
        None => return Err(OracleError::Membership("some player is in no group".into())),
    };
    let estimate = binomial(grid.resolution as u128 + m as u128 - 1, m as u128 - 1) * factorial(m);
    check_caps(n, grid, estimate, limits)?;
    let orders = all_permutations(m);
    search_grid(m, grid, limits.workers, |y| {
        let envy = envy_matrix(valuations, y);
        let mut best: Option<(Scalar, &Vec<usize>)> = None;
        for order in &orders {
            let worst = (0..n).map(|i| &envy[i][order[group_of[i]]]).max().unwrap().clone();
            if best.as_ref().is_none_or(|(b, _)| worst < *b) {
                best = Some((worst, order));
            }
        }
        let (e, order) = best.unwrap();
        (e, (0..n).map(|i| order[group_of[i]]).collect())
    })
}

/// An instance where grouping an individually envy-free division by blocks
/// leaves some player envious of another group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaiveCounterexample {
    pub trial: usize,
    pub valuations: Vec<Valuation>,
    pub groups: GroupStructure,
    pub individual: IndividualSolution,
    /// Players whose individual pieces fall in block `j` form group `j`.
    pub naive: GroupAllocation,
    pub naive_report: EnvyReport,
}

/// Tolerance above which naive-grouping envy counts as a genuine failure:
/// each group piece is a sum of up to `max k_j` individually
/// `eps`-envy-free pieces, so smaller envy could be approximation slack.
pub fn naive_threshold(groups: &GroupStructure, eps: &Scalar) -> Scalar {
    eps * Scalar::from_integer((*groups.sizes().iter().max().unwrap() as u64).into())
}

/// Solves each sampled instance individually, groups players by the block
/// containing their piece, and returns the first instance whose group envy
/// exceeds [`naive_threshold`].
pub fn search_naive_reduction(
    trials: usize,
    groups: &GroupStructure,
    eps: &Scalar,
    cfg: &SolverConfig,
    mut sample: impl FnMut(usize) -> Vec<Valuation>,
) -> Result<Option<NaiveCounterexample>, SolverError> {
    let threshold = naive_threshold(groups, eps);
    for trial in 0..trials {
        let valuations = sample(trial);
        let individual = solve_individual(&valuations, eps, cfg)?;
        let naive = assemble_groups(&individual.allocation.partition, &individual.allocation.assignment, groups)
            .map_err(|e| SolverError::InvalidInput(e.to_string()))?;
        let naive_report = verify_group_envy(&valuations, &naive, eps);
        if naive_report.max_envy > threshold {
            return Ok(Some(NaiveCounterexample {
                trial,
                valuations,
                groups: groups.clone(),
                individual,
                naive,
                naive_report,
            }));
        }
    }
    Ok(None)
}

/// Random four-player instances with two groups of two, `eps = 1/100`.
pub fn naive_reduction_counterexample_search(
    seed: u64,
    trials: usize,
) -> Result<Option<NaiveCounterexample>, SolverError> {
    let groups = GroupStructure::new(vec![2, 2]).expect("valid sizes");
    let eps = crate::rational::ratio(1, 100);
    search_naive_reduction(trials, &groups, &eps, &SolverConfig::default(), |trial| {
        random_instance(seed.wrapping_add(trial as u64), 4)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{evening, morning};
    use crate::rational::{int, ratio};

    fn limits() -> OracleLimits {
        OracleLimits::default()
    }

    #[test]
    fn grid_enumeration_counts() {
        assert_eq!(grid_points(2, 3).len(), 10);
        assert_eq!(grid_points(0, 7), vec![Vec::<u32>::new()]);
        assert_eq!(all_permutations(3).len(), 6);
        assert_eq!(binomial(5, 2), 10);
    }

    #[test]
    fn two_uniform_players() {
        let vals = vec![Valuation::uniform(); 2];
        let res = grid_min_envy_individual(&vals, GridSpec::new(10).unwrap(), &limits()).unwrap();
        assert_eq!(res.min_max_envy, int(0));
        assert_eq!(res.argmin_cuts, vec![CutVector::new(vec![ratio(1, 2)]).unwrap()]);
    }

    #[test]
    fn evening_player_interval() {
        let vals = vec![Valuation::uniform(), evening()];
        let res = grid_min_envy_individual(&vals, GridSpec::new(20).unwrap(), &limits()).unwrap();
        assert_eq!(res.min_max_envy, int(0));
        // the uniform player needs the left piece to be at least half; the
        // evening player keeps at least half of [9/10, 1] up to cut 19/20
        let expected: Vec<_> = (10..=19).map(|c| CutVector::new(vec![ratio(c, 20)]).unwrap()).collect();
        assert_eq!(res.argmin_cuts, expected);
        assert_eq!(res.best.holder, vec![0, 1]);
    }

    #[test]
    fn three_uniform_players() {
        let vals = vec![Valuation::uniform(); 3];
        let res = grid_min_envy_individual(&vals, GridSpec::new(9).unwrap(), &limits()).unwrap();
        assert_eq!(res.min_max_envy, int(0));
        assert_eq!(res.argmin_cuts, vec![CutVector::new(vec![ratio(1, 3), ratio(2, 3)]).unwrap()]);
    }

    #[test]
    fn counterexample_fixed_versus_variable() {
        let vals = vec![morning(), evening(), morning(), evening()];
        let fixed = vec![vec![0, 1], vec![2, 3]];
        for r in [10, 20, 40] {
            let res = fixed_group_min_envy(&vals, &fixed, GridSpec::new(r).unwrap(), &limits()).unwrap();
            assert_eq!(res.min_max_envy, int(1), "R={r}");
        }
        let pairs = GroupStructure::new(vec![2, 2]).unwrap();
        let res = grid_min_envy_groups(&vals, &pairs, GridSpec::new(20).unwrap(), &limits()).unwrap();
        assert_eq!(res.min_max_envy, int(0));
        assert_eq!(res.best.holder[0], res.best.holder[2]);
        assert_eq!(res.best.holder[1], res.best.holder[3]);
        // exact zero envy holds for every cut in [1/20, 19/20]
        let expected: Vec<_> = (1..=19).map(|c| CutVector::new(vec![ratio(c, 20)]).unwrap()).collect();
        assert_eq!(res.argmin_cuts, expected);
    }

    #[test]
    fn uniform_fixed_groups_split_evenly() {
        let vals = vec![Valuation::uniform(); 4];
        let res =
            fixed_group_min_envy(&vals, &[vec![0, 3], vec![1, 2]], GridSpec::new(10).unwrap(), &limits()).unwrap();
        assert_eq!(res.min_max_envy, int(0));
        assert_eq!(res.argmin_cuts, vec![CutVector::new(vec![ratio(1, 2)]).unwrap()]);
    }

    #[test]
    fn unit_groups_agree_with_individual_oracle() {
        for seed in 0..5 {
            let vals = random_instance(seed, 3);
            let grid = GridSpec::new(12).unwrap();
            let a = grid_min_envy_individual(&vals, grid, &limits()).unwrap();
            let b = grid_min_envy_groups(&vals, &GroupStructure::singletons(3), grid, &limits()).unwrap();
            assert_eq!(a.min_max_envy, b.min_max_envy);
            assert_eq!(a.argmin_cuts, b.argmin_cuts);
        }
    }

    #[test]
    fn refining_the_grid_never_hurts() {
        for seed in 10..14 {
            let vals = random_instance(seed, 3);
            let pairs = GroupStructure::new(vec![1, 2]).unwrap();
            let mut prev: Option<Scalar> = None;
            for r in [4, 8, 16, 32] {
                let res = grid_min_envy_groups(&vals, &pairs, GridSpec::new(r).unwrap(), &limits()).unwrap();
                if let Some(p) = &prev {
                    assert!(res.min_max_envy <= *p);
                }
                prev = Some(res.min_max_envy);
            }
        }
    }

    #[test]
    fn caps_refuse_with_estimate() {
        let vals = vec![Valuation::uniform(); 5];
        assert!(matches!(
            grid_min_envy_individual(&vals, GridSpec::new(4).unwrap(), &limits()),
            Err(OracleError::TooManyPlayers { players: 5, cap: 4 })
        ));
        let tight = OracleLimits { max_evaluations: 100, ..limits() };
        match grid_min_envy_individual(&vals[..4], GridSpec::new(16).unwrap(), &tight) {
            Err(OracleError::TooExpensive { estimate, .. }) => assert_eq!(estimate, 969 * 24),
            other => panic!("{other:?}"),
        }
        assert_eq!(GridSpec::new(0), Err(OracleError::ZeroResolution));
        assert!(fixed_group_min_envy(&vals[..2], &[vec![0], vec![0]], GridSpec::new(4).unwrap(), &limits()).is_err());
    }

    #[test]
    fn uniform_players_never_break_naive_grouping() {
        let groups = GroupStructure::new(vec![2, 2]).unwrap();
        let found = search_naive_reduction(3, &groups, &ratio(1, 100), &SolverConfig::default(), |_| {
            vec![Valuation::uniform(); 4]
        })
        .unwrap();
        assert!(found.is_none());
    }
}
