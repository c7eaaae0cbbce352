//! The cake model: contiguous partitions of `[0, 1]`, piecewise-constant
//! valuations, and the demand-function abstraction.
//!
//! Piece, player and group indices are 0-based throughout the crate.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::rational::{format_scalar, is_nonnegative, Scalar};

/// Indices of the pieces a player prefers.
pub type PieceSet = BTreeSet<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("a partition needs at least one piece")]
    NoPieces,
    #[error("piece {index} has negative length {length}")]
    NegativeLength { index: usize, length: String },
    #[error("piece lengths sum to {0}, expected 1/1")]
    LengthsDoNotSumToOne(String),
    #[error("cut {index} = {value} lies outside [0, 1]")]
    CutOutOfRange { index: usize, value: String },
    #[error("cuts are not nondecreasing at position {0}")]
    CutsNotSorted(usize),
    #[error("malformed interval [{a}, {b}]")]
    MalformedInterval { a: String, b: String },
    #[error("breakpoints must start at 0, end at 1 and strictly increase")]
    BadBreakpoints,
    #[error("expected {expected} densities for the given breakpoints, got {got}")]
    DensityCount { expected: usize, got: usize },
    #[error("density {index} is negative ({value})")]
    NegativeDensity { index: usize, value: String },
    #[error("density is zero everywhere")]
    ZeroDensity,
    #[error("valuation integrates to {0}, expected 1/1")]
    NotNormalized(String),
    #[error("assignment is not a bijection on {0} players")]
    NotABijection(usize),
}

/// A division of the cake into consecutive pieces, given by their lengths.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    lengths: Vec<Scalar>,
}

impl Partition {
    pub fn new(lengths: Vec<Scalar>) -> Result<Self, ModelError> {
        if lengths.is_empty() {
            return Err(ModelError::NoPieces);
        }
        if let Some((index, l)) = lengths.iter().enumerate().find(|(_, l)| !is_nonnegative(l)) {
            return Err(ModelError::NegativeLength { index, length: format_scalar(l) });
        }
        let total: Scalar = lengths.iter().sum();
        if !total.is_one() {
            return Err(ModelError::LengthsDoNotSumToOne(format_scalar(&total)));
        }
        Ok(Partition { lengths })
    }

    /// `pieces` equal pieces.
    pub fn equal(pieces: usize) -> Self {
        assert!(pieces > 0);
        let len = Scalar::new(1.into(), (pieces as i64).into());
        Partition { lengths: vec![len; pieces] }
    }

    pub fn whole() -> Self {
        Partition { lengths: vec![Scalar::one()] }
    }

    pub fn arity(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[Scalar] {
        &self.lengths
    }

    pub fn length(&self, piece: usize) -> &Scalar {
        &self.lengths[piece]
    }

    pub fn is_empty_piece(&self, piece: usize) -> bool {
        self.lengths[piece].is_zero()
    }

    /// Left and right endpoints of every piece.
    pub fn intervals(&self) -> Vec<(Scalar, Scalar)> {
        let mut start = Scalar::zero();
        self.lengths
            .iter()
            .map(|l| {
                let end = &start + l;
                let iv = (start.clone(), end.clone());
                start = end;
                iv
            })
            .collect()
    }

    pub fn to_cuts(&self) -> CutVector {
        let mut acc = Scalar::zero();
        let cuts = self.lengths[..self.lengths.len() - 1]
            .iter()
            .map(|l| {
                acc += l;
                acc.clone()
            })
            .collect();
        CutVector { cuts }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.lengths.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", format_scalar(l))?;
        }
        write!(f, ")")
    }
}

/// Sorted cut positions; `p - 1` cuts describe a `p`-piece partition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CutVector {
    cuts: Vec<Scalar>,
}

impl CutVector {
    pub fn new(cuts: Vec<Scalar>) -> Result<Self, ModelError> {
        for (index, c) in cuts.iter().enumerate() {
            if !is_nonnegative(c) || *c > Scalar::one() {
                return Err(ModelError::CutOutOfRange { index, value: format_scalar(c) });
            }
        }
        if let Some(pos) = cuts.windows(2).position(|w| w[0] > w[1]) {
            return Err(ModelError::CutsNotSorted(pos + 1));
        }
        Ok(CutVector { cuts })
    }

    pub fn cuts(&self) -> &[Scalar] {
        &self.cuts
    }

    pub fn pieces(&self) -> usize {
        self.cuts.len() + 1
    }

    pub fn to_partition(&self) -> Partition {
        partition_from_cuts(self)
    }
}

/// Piece lengths from cut positions, with sentinel cuts at 0 and 1.
pub fn partition_from_cuts(cuts: &CutVector) -> Partition {
    let mut prev = Scalar::zero();
    let mut lengths = Vec::with_capacity(cuts.pieces());
    for c in cuts.cuts() {
        lengths.push(c - &prev);
        prev = c.clone();
    }
    lengths.push(Scalar::one() - prev);
    Partition { lengths }
}

/// A normalized piecewise-constant density on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Valuation {
    breakpoints: Vec<Scalar>,
    densities: Vec<Scalar>,
    // cumulative mass at each breakpoint
    cdf: Vec<Scalar>,
}

impl Valuation {
    /// Builds a valuation whose densities already integrate to exactly 1.
    pub fn new(breakpoints: Vec<Scalar>, densities: Vec<Scalar>) -> Result<Self, ModelError> {
        let v = Self::unchecked(breakpoints, densities)?;
        let total = v.cdf.last().cloned().unwrap_or_else(Scalar::zero);
        if !total.is_one() {
            return Err(ModelError::NotNormalized(format_scalar(&total)));
        }
        Ok(v)
    }

    /// Builds a valuation by rescaling raw nonnegative densities to total mass 1.
    pub fn normalized(breakpoints: Vec<Scalar>, raw: Vec<Scalar>) -> Result<Self, ModelError> {
        let v = Self::unchecked(breakpoints, raw)?;
        let total = v.cdf.last().cloned().unwrap_or_else(Scalar::zero);
        let densities = v.densities.iter().map(|d| d / &total).collect();
        Self::unchecked(v.breakpoints, densities)
    }

    fn unchecked(breakpoints: Vec<Scalar>, densities: Vec<Scalar>) -> Result<Self, ModelError> {
        let well_formed = breakpoints.len() >= 2
            && breakpoints[0].is_zero()
            && breakpoints.last().is_some_and(|b| b.is_one())
            && breakpoints.windows(2).all(|w| w[0] < w[1]);
        if !well_formed {
            return Err(ModelError::BadBreakpoints);
        }
        if densities.len() != breakpoints.len() - 1 {
            return Err(ModelError::DensityCount { expected: breakpoints.len() - 1, got: densities.len() });
        }
        if let Some((index, d)) = densities.iter().enumerate().find(|(_, d)| !is_nonnegative(d)) {
            return Err(ModelError::NegativeDensity { index, value: format_scalar(d) });
        }
        if densities.iter().all(Zero::is_zero) {
            return Err(ModelError::ZeroDensity);
        }
        let mut cdf = Vec::with_capacity(breakpoints.len());
        cdf.push(Scalar::zero());
        for (i, d) in densities.iter().enumerate() {
            let mass = d * (&breakpoints[i + 1] - &breakpoints[i]);
            let next = cdf[i].clone() + mass;
            cdf.push(next);
        }
        Ok(Valuation { breakpoints, densities, cdf })
    }

    pub fn uniform() -> Self {
        Self::new(vec![Scalar::zero(), Scalar::one()], vec![Scalar::one()]).unwrap()
    }

    /// All mass spread evenly over `[a, b]`.
    pub fn concentrated(a: Scalar, b: Scalar) -> Result<Self, ModelError> {
        if a >= b || !is_nonnegative(&a) || b > Scalar::one() {
            return Err(ModelError::MalformedInterval { a: format_scalar(&a), b: format_scalar(&b) });
        }
        let mut bps = vec![Scalar::zero()];
        let mut dens = vec![];
        if !a.is_zero() {
            bps.push(a.clone());
            dens.push(Scalar::zero());
        }
        bps.push(b.clone());
        dens.push(Scalar::one() / (&b - &a));
        if !b.is_one() {
            bps.push(Scalar::one());
            dens.push(Scalar::zero());
        }
        Self::new(bps, dens)
    }

    pub fn breakpoints(&self) -> &[Scalar] {
        &self.breakpoints
    }

    pub fn densities(&self) -> &[Scalar] {
        &self.densities
    }

    pub fn max_density(&self) -> Scalar {
        self.densities.iter().max().cloned().unwrap_or_else(Scalar::zero)
    }

    /// Mass of `[0, t]` for `t` in `[0, 1]`.
    fn cumulative(&self, t: &Scalar) -> Scalar {
        // index of the segment containing t (last segment for t = 1)
        let seg = match self.breakpoints.binary_search(t) {
            Ok(i) => return self.cdf[i].clone(),
            Err(i) => i - 1,
        };
        &self.cdf[seg] + &self.densities[seg] * (t - &self.breakpoints[seg])
    }

    /// Exact value of the interval `[a, b]`.
    pub fn value(&self, a: &Scalar, b: &Scalar) -> Result<Scalar, ModelError> {
        if a > b || !is_nonnegative(a) || *b > Scalar::one() {
            return Err(ModelError::MalformedInterval { a: format_scalar(a), b: format_scalar(b) });
        }
        Ok(self.cumulative(b) - self.cumulative(a))
    }

    /// Value of every piece of `x`.
    pub fn piece_values(&self, x: &Partition) -> Vec<Scalar> {
        let mut prev_cdf = Scalar::zero();
        let mut pos = Scalar::zero();
        x.lengths()
            .iter()
            .map(|l| {
                pos += l;
                let c = self.cumulative(&pos);
                let v = &c - &prev_cdf;
                prev_cdf = c;
                v
            })
            .collect()
    }
}

/// `∫_a^b` of the valuation's density.
pub fn measure_value(v: &Valuation, a: &Scalar, b: &Scalar) -> Result<Scalar, ModelError> {
    v.value(a, b)
}

/// Pieces of maximal value under `v`, compared exactly.
pub fn demand_from_valuation(v: &Valuation, x: &Partition) -> PieceSet {
    let values = v.piece_values(x);
    let best = values.iter().max().expect("partition has at least one piece");
    values.iter().enumerate().filter(|(_, val)| *val == best).map(|(i, _)| i).collect()
}

/// A player's preference: partition in, nonempty set of preferred pieces out.
///
/// Implementations promise the two behavioral contracts: never demand a
/// zero-length piece (checked at runtime by [`validate_hungry`]), and closed
/// preference sets, meaning a piece demanded along a convergent sequence of
/// partitions is demanded at the limit. The latter cannot be checked for
/// arbitrary functions; it is the caller's responsibility.
pub trait Demand: Send + Sync {
    fn demand(&self, x: &Partition) -> PieceSet;
}

impl Demand for Valuation {
    fn demand(&self, x: &Partition) -> PieceSet {
        demand_from_valuation(self, x)
    }
}

impl<D: Demand + ?Sized> Demand for &D {
    fn demand(&self, x: &Partition) -> PieceSet {
        (**self).demand(x)
    }
}

impl<D: Demand + ?Sized> Demand for Box<D> {
    fn demand(&self, x: &Partition) -> PieceSet {
        (**self).demand(x)
    }
}

impl<D: Demand + ?Sized> Demand for Arc<D> {
    fn demand(&self, x: &Partition) -> PieceSet {
        (**self).demand(x)
    }
}

/// Adapts a closure into a [`Demand`].
pub struct FnDemand<F>(pub F);

impl<F> Demand for FnDemand<F>
where
    F: Fn(&Partition) -> PieceSet + Send + Sync,
{
    fn demand(&self, x: &Partition) -> PieceSet {
        (self.0)(x)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractViolation {
    #[error("player {player} demanded nothing at partition {partition}")]
    EmptyDemand { player: usize, partition: String },
    #[error("player {player} demanded piece {piece} of a {arity}-piece partition")]
    PieceOutOfRange { player: usize, piece: usize, arity: usize },
    #[error("player {player} demanded zero-length piece {piece} at partition {partition}")]
    Hungry { player: usize, piece: usize, partition: String },
}

impl ContractViolation {
    pub fn player(&self) -> usize {
        match self {
            ContractViolation::EmptyDemand { player, .. }
            | ContractViolation::PieceOutOfRange { player, .. }
            | ContractViolation::Hungry { player, .. } => *player,
        }
    }
}

/// Evaluates `player`'s demand at `x` and checks it is nonempty, in range,
/// and free of zero-length pieces. Returns the demanded set on success.
pub fn validate_hungry<D: Demand + ?Sized>(
    demand: &D,
    player: usize,
    x: &Partition,
) -> Result<PieceSet, ContractViolation> {
    let set = demand.demand(x);
    if set.is_empty() {
        return Err(ContractViolation::EmptyDemand { player, partition: x.to_string() });
    }
    for &piece in &set {
        if piece >= x.arity() {
            return Err(ContractViolation::PieceOutOfRange { player, piece, arity: x.arity() });
        }
        if x.is_empty_piece(piece) {
            return Err(ContractViolation::Hungry { player, piece, partition: x.to_string() });
        }
    }
    Ok(set)
}

/// A bijection from players to pieces.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    piece_of: Vec<usize>,
}

impl Assignment {
    pub fn new(piece_of: Vec<usize>) -> Result<Self, ModelError> {
        let n = piece_of.len();
        let mut seen = vec![false; n];
        for &p in &piece_of {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(ModelError::NotABijection(n));
            }
        }
        Ok(Assignment { piece_of })
    }

    pub fn identity(n: usize) -> Self {
        Assignment { piece_of: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.piece_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.piece_of.is_empty()
    }

    pub fn piece_of(&self, player: usize) -> usize {
        self.piece_of[player]
    }

    pub fn player_of(&self, piece: usize) -> usize {
        self.piece_of.iter().position(|&p| p == piece).expect("bijection")
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.piece_of
    }
}
