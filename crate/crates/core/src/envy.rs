//! Envy magnitudes.
//!
//! A player's envy is the value of their favourite piece minus the value of
//! the piece they hold. This quantitative notion is an addition on top of the
//! purely ordinal preference model; zero envy is exact envy-freeness.

use num_traits::Zero;

use crate::model::{Partition, Valuation};
use crate::rational::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayerEnvy {
    pub player: usize,
    /// Piece (or group) the player holds.
    pub held: usize,
    pub own_value: Scalar,
    pub best_value: Scalar,
    pub envy: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvyReport {
    pub players: Vec<PlayerEnvy>,
    pub max_envy: Scalar,
    pub epsilon: Scalar,
    pub pass: bool,
}

impl EnvyReport {
    /// Players whose envy exceeds the tolerance.
    pub fn enviers(&self) -> Vec<usize> {
        self.players.iter().filter(|p| p.envy > self.epsilon).map(|p| p.player).collect()
    }
}

/// Envy of every player when player `i` holds piece `held[i]` of `x`.
pub fn envy_report(valuations: &[Valuation], x: &Partition, held: &[usize], epsilon: &Scalar) -> EnvyReport {
    assert_eq!(valuations.len(), held.len());
    let players: Vec<PlayerEnvy> = valuations
        .iter()
        .zip(held)
        .enumerate()
        .map(|(player, (v, &piece))| {
            let values = v.piece_values(x);
            let best_value = values.iter().max().cloned().unwrap_or_else(Scalar::zero);
            let own_value = values[piece].clone();
            PlayerEnvy { player, held: piece, envy: &best_value - &own_value, own_value, best_value }
        })
        .collect();
    let max_envy = players.iter().map(|p| p.envy.clone()).max().unwrap_or_else(Scalar::zero);
    EnvyReport { pass: max_envy <= *epsilon, players, max_envy, epsilon: epsilon.clone() }
}

/// Largest density over all players, the Lipschitz constant of piece values.
pub fn max_density(valuations: &[Valuation]) -> Scalar {
    valuations.iter().map(Valuation::max_density).max().unwrap_or_else(Scalar::zero)
}
