use std::path::Path;

use fairslice::rational::format_scalar;
use fairslice::{verify_group_envy, CutVector, GroupAllocation};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, EXIT_OK, EXIT_REJECTED};
use crate::schema::{read_json, scalar, to_json, Exact, InstanceFile, PlayerEnvyOut, ResultFile};
use crate::solve::envy_out;
use crate::CommandOutput;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifyReport {
    pub pass: bool,
    pub epsilon: String,
    pub max_envy: Exact,
    /// Players whose envy exceeds epsilon.
    pub enviers: Vec<String>,
    /// Whether the envy report stored in the result matches the recomputation.
    pub embedded_report_matches: bool,
    pub players: Vec<PlayerEnvyOut>,
}

/// Recomputes every envy of `result` against `file` from scratch.
pub fn verify_result(
    file: &InstanceFile,
    result: &ResultFile,
    epsilon: Option<&str>,
) -> Result<(VerifyReport, i32), CliError> {
    let inst = file.load()?;
    let eps = match epsilon {
        Some(e) => scalar("--epsilon", e)?,
        None => inst.epsilon.clone(),
    };
    let stable = &result.stable;
    let cuts = stable
        .allocation
        .cuts
        .iter()
        .enumerate()
        .map(|(i, c)| scalar(&format!("result cuts[{i}]"), &c.exact))
        .collect::<Result<Vec<_>, _>>()?;
    let partition = CutVector::new(cuts).map_err(|e| CliError::input(format!("result cuts: {e}")))?.to_partition();

    let mut membership = vec![None; inst.names.len()];
    for m in &stable.allocation.membership {
        let p = inst
            .index_of(&m.player)
            .ok_or_else(|| CliError::input(format!("result names unknown player {:?}", m.player)))?;
        if membership[p].replace(m.group).is_some() {
            return Err(CliError::input(format!("result lists player {:?} twice", m.player)));
        }
    }
    let membership = membership
        .into_iter()
        .enumerate()
        .map(|(p, g)| g.ok_or_else(|| CliError::input(format!("result omits player {:?}", inst.names[p]))))
        .collect::<Result<Vec<_>, _>>()?;
    let alloc = GroupAllocation::new(partition, membership, &inst.groups)
        .map_err(|e| CliError::input(format!("result does not match the instance groups: {e}")))?;

    let report = verify_group_envy(&inst.valuations, &alloc, &eps);
    let recomputed = envy_out(&report, &inst.names);
    let embedded_report_matches =
        recomputed.players == stable.envy.players && recomputed.max_envy == stable.envy.max_envy;
    let pass = report.pass && embedded_report_matches;
    let out = VerifyReport {
        pass,
        epsilon: format_scalar(&eps),
        max_envy: recomputed.max_envy,
        enviers: recomputed.enviers,
        embedded_report_matches,
        players: recomputed.players,
    };
    Ok((out, if pass { EXIT_OK } else { EXIT_REJECTED }))
}

pub fn cmd_verify(instance: &Path, result: &Path, epsilon: Option<&str>) -> Result<CommandOutput, CliError> {
    let file: InstanceFile = read_json(instance)?;
    let result: ResultFile = read_json(result)?;
    let (report, exit_code) = verify_result(&file, &result, epsilon)?;
    Ok(CommandOutput { body: to_json(&report), exit_code })
}
