//! On-disk formats. Every rational is a string: `"p/q"`, an integer, or an
//! exact decimal literal on input; always `"p/q"` on output, with a
//! 12-significant-digit decimal mirror next to it.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use fairslice::rational::{decimal12, format_scalar, parse_scalar};
use fairslice::{GroupStructure, Scalar, SearchMode, Valuation};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct InstanceFile {
    pub players: Vec<PlayerSpec>,
    /// Group sizes; omitted means one group per player.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<usize>>,
    pub epsilon: String,
    /// Rescale each player's densities to total mass 1.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub normalize: bool,
    /// Frozen groups by player name; used by the fixed-mode oracle only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_membership: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerSpec {
    pub name: String,
    pub breakpoints: Vec<String>,
    pub densities: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A validated instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub names: Vec<String>,
    pub valuations: Vec<Valuation>,
    pub groups: GroupStructure,
    pub epsilon: Scalar,
    /// Player indices per frozen group.
    pub fixed_membership: Option<Vec<Vec<usize>>>,
    pub config: ConfigSpec,
}

impl Instance {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

pub fn scalar(field: &str, text: &str) -> Result<Scalar, CliError> {
    parse_scalar(text).map_err(|e| CliError::input(format!("{field}: {e}")))
}

pub fn parse_mode(text: &str) -> Result<SearchMode, CliError> {
    match text {
        "auto" => Ok(SearchMode::Auto),
        "scan" => Ok(SearchMode::Scan),
        "walk" => Ok(SearchMode::Walk),
        other => Err(CliError::input(format!("unknown mode {other:?} (expected auto, scan or walk)"))),
    }
}

impl InstanceFile {
    pub fn load(&self) -> Result<Instance, CliError> {
        if self.players.is_empty() {
            return Err(CliError::input("instance has no players"));
        }
        let mut seen = BTreeSet::new();
        let mut valuations = Vec::with_capacity(self.players.len());
        for p in &self.players {
            if !seen.insert(p.name.as_str()) {
                return Err(CliError::input(format!("duplicate player name {:?}", p.name)));
            }
            let field = |what: &str, i: usize| format!("player {:?} {what}[{i}]", p.name);
            let breakpoints = p
                .breakpoints
                .iter()
                .enumerate()
                .map(|(i, s)| scalar(&field("breakpoints", i), s))
                .collect::<Result<_, _>>()?;
            let densities = p
                .densities
                .iter()
                .enumerate()
                .map(|(i, s)| scalar(&field("densities", i), s))
                .collect::<Result<_, _>>()?;
            let v = if self.normalize {
                Valuation::normalized(breakpoints, densities)
            } else {
                Valuation::new(breakpoints, densities)
            };
            valuations.push(v.map_err(|e| CliError::input(format!("player {:?}: {e}", p.name)))?);
        }
        let n = valuations.len();
        let sizes = self.groups.clone().unwrap_or_else(|| vec![1; n]);
        let groups = GroupStructure::new(sizes).map_err(|e| CliError::input(format!("groups: {e}")))?;
        if groups.players() != n {
            return Err(CliError::input(format!("group sizes sum to {} but there are {n} players", groups.players())));
        }
        let epsilon = scalar("epsilon", &self.epsilon)?;
        if epsilon < Scalar::from_integer(0.into()) {
            return Err(CliError::input("epsilon must be nonnegative"));
        }
        let names: Vec<String> = self.players.iter().map(|p| p.name.clone()).collect();
        let fixed_membership = match &self.fixed_membership {
            None => None,
            Some(groups) => Some(
                groups
                    .iter()
                    .map(|g| {
                        g.iter()
                            .map(|name| {
                                names.iter().position(|n| n == name).ok_or_else(|| {
                                    CliError::input(format!("fixedMembership names unknown player {name:?}"))
                                })
                            })
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        };
        let config = self.config.clone().unwrap_or_default();
        if let Some(mode) = &config.mode {
            parse_mode(mode)?;
        }
        Ok(Instance { names, valuations, groups, epsilon, fixed_membership, config })
    }

    /// Serializes valuations back into an instance file.
    pub fn from_valuations(
        names: &[String],
        valuations: &[Valuation],
        groups: Option<Vec<usize>>,
        epsilon: &Scalar,
    ) -> Self {
        InstanceFile {
            players: names
                .iter()
                .zip(valuations)
                .map(|(name, v)| PlayerSpec {
                    name: name.clone(),
                    breakpoints: v.breakpoints().iter().map(format_scalar).collect(),
                    densities: v.densities().iter().map(format_scalar).collect(),
                })
                .collect(),
            groups,
            epsilon: format_scalar(epsilon),
            normalize: false,
            fixed_membership: None,
            config: None,
        }
    }
}

/// An exact value with its decimal mirror.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exact {
    pub exact: String,
    pub decimal: String,
}

impl Exact {
    pub fn of(value: &Scalar) -> Self {
        Exact { exact: format_scalar(value), decimal: decimal12(value) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResultFile {
    /// Everything that depends only on the instance and configuration.
    pub stable: StableResult,
    /// Run-specific data: excluded from determinism comparisons.
    pub runtime: RuntimeInfo,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StableResult {
    pub schema: u32,
    /// `"groups"` or `"individual"`.
    pub kind: String,
    /// `"converged"` or `"budgetExceeded"`.
    pub status: String,
    pub epsilon: String,
    pub pass: bool,
    pub allocation: AllocationOut,
    pub envy: EnvyOut,
    pub certificate: CertificateOut,
    pub provenance: Provenance,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AllocationOut {
    pub cuts: Vec<Exact>,
    /// Group `j` receives piece `j`, counted from the left.
    pub pieces: Vec<PieceOut>,
    pub membership: Vec<MemberOut>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PieceOut {
    pub group: usize,
    pub start: Exact,
    pub end: Exact,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MemberOut {
    pub player: String,
    pub group: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EnvyOut {
    pub max_envy: Exact,
    pub enviers: Vec<String>,
    pub players: Vec<PlayerEnvyOut>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PlayerEnvyOut {
    pub player: String,
    pub group: usize,
    pub own_value: Exact,
    pub best_value: Exact,
    pub envy: Exact,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CertificateOut {
    pub mesh: u32,
    pub base: Vec<u32>,
    pub permutation: Vec<usize>,
    /// Owner player name per cell vertex.
    pub owners: Vec<String>,
    /// Piece label per cell vertex, over the `n`-piece division.
    pub labels: Vec<usize>,
    /// Cuts of the `n`-piece division read off the cell.
    pub individual_cuts: Vec<String>,
    /// Individual piece held by each player.
    pub assignment: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Provenance {
    pub config: ConfigEcho,
    pub versions: BTreeMap<String, String>,
    pub levels: Vec<LevelOut>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConfigEcho {
    pub initial_mesh: Option<u32>,
    pub mode: String,
    pub budget_cells: u64,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LevelOut {
    pub mesh: u32,
    pub mode: String,
    pub cells_visited: u64,
    pub faces_visited: u64,
    pub max_envy: Exact,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RuntimeInfo {
    pub workers: usize,
    pub elapsed_ms: u64,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    text
}
