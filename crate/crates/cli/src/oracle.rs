use std::path::Path;

use fairslice::oracle::{
    fixed_group_min_envy, grid_min_envy_groups, grid_min_envy_individual, GridSpec, OracleLimits, OracleResult,
};
use fairslice::rational::{decimal12, format_scalar};
use fairslice::CutVector;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, EXIT_OK};
use crate::schema::{read_json, to_json, InstanceFile};
use crate::CommandOutput;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// One piece per player, all assignments.
    Individual,
    /// Ad-hoc groups of the instance's sizes.
    Variable,
    /// The instance's `fixedMembership`, frozen.
    Fixed,
}

impl OracleMode {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        match text {
            "individual" => Ok(OracleMode::Individual),
            "variable" => Ok(OracleMode::Variable),
            "fixed" => Ok(OracleMode::Fixed),
            other => {
                Err(CliError::input(format!("unknown oracle mode {other:?} (expected individual, variable or fixed)")))
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OracleMode::Individual => "individual",
            OracleMode::Variable => "variable",
            OracleMode::Fixed => "fixed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HolderOut {
    pub player: String,
    pub piece: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleReport {
    pub mode: String,
    pub resolution: u32,
    pub min_max_envy: String,
    pub min_max_envy_decimal: String,
    pub best_cuts: Vec<String>,
    pub best_holders: Vec<HolderOut>,
    /// Every grid cut vector attaining the minimum, lexicographically.
    pub argmin_cuts: Vec<Vec<String>>,
    pub note: String,
}

fn cut_strings(c: &CutVector) -> Vec<String> {
    c.cuts().iter().map(format_scalar).collect()
}

pub fn oracle_instance(
    file: &InstanceFile,
    mode: OracleMode,
    resolution: u32,
    workers: usize,
) -> Result<OracleReport, CliError> {
    let inst = file.load()?;
    let grid = GridSpec::new(resolution)?;
    let limits = OracleLimits { workers: workers.max(1), ..OracleLimits::default() };
    let result: OracleResult = match mode {
        OracleMode::Individual => grid_min_envy_individual(&inst.valuations, grid, &limits)?,
        OracleMode::Variable => grid_min_envy_groups(&inst.valuations, &inst.groups, grid, &limits)?,
        OracleMode::Fixed => {
            let membership = inst
                .fixed_membership
                .as_ref()
                .ok_or_else(|| CliError::input("fixed mode needs fixedMembership in the instance"))?;
            fixed_group_min_envy(&inst.valuations, membership, grid, &limits)?
        }
    };
    Ok(OracleReport {
        mode: mode.as_str().into(),
        resolution,
        min_max_envy: format_scalar(&result.min_max_envy),
        min_max_envy_decimal: decimal12(&result.min_max_envy),
        best_cuts: cut_strings(&result.best.cuts),
        best_holders: inst
            .names
            .iter()
            .zip(&result.best.holder)
            .map(|(n, &piece)| HolderOut { player: n.clone(), piece })
            .collect(),
        argmin_cuts: result.argmin_cuts.iter().map(cut_strings).collect(),
        note: format!("exact minimum over cuts on the 1/{resolution} grid only"),
    })
}

pub fn cmd_oracle(
    instance: &Path,
    mode: OracleMode,
    resolution: u32,
    workers: usize,
) -> Result<CommandOutput, CliError> {
    let file: InstanceFile = read_json(instance)?;
    let report = oracle_instance(&file, mode, resolution, workers)?;
    Ok(CommandOutput { body: to_json(&report), exit_code: EXIT_OK })
}
