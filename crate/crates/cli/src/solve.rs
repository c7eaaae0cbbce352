use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use fairslice::rational::format_scalar;
use fairslice::sperner::MeshLevel;
use fairslice::{solve_groups, solve_individual, EnvyReport, IndividualAllocation, Scalar, SolveStatus, SolverConfig};

use crate::error::{CliError, EXIT_BUDGET, EXIT_OK};
use crate::schema::{
    parse_mode, read_json, scalar, to_json, AllocationOut, CertificateOut, ConfigEcho, EnvyOut, Exact, Instance,
    InstanceFile, LevelOut, MemberOut, PieceOut, PlayerEnvyOut, Provenance, ResultFile, RuntimeInfo, StableResult,
    SCHEMA_VERSION,
};
use crate::CommandOutput;

/// Command-line overrides; each wins over the instance's `config` block.
#[derive(Debug, Clone, Default)]
pub struct SolveFlags {
    pub epsilon: Option<String>,
    pub mesh: Option<u32>,
    pub mode: Option<String>,
    pub workers: Option<usize>,
    pub budget_cells: Option<u64>,
}

pub const NOTES: [&str; 2] = [
    "envy is the value of a player's best piece minus the value of their group's piece; it quantifies an otherwise ordinal preference model",
    "the certificate is a fully-labeled cell of the n-piece search over lifted demands; groups are read off by blocks",
];

pub fn solver_config(inst: &Instance, flags: &SolveFlags) -> Result<(SolverConfig, ConfigEcho), CliError> {
    let defaults = SolverConfig::default();
    let mode = match flags.mode.as_deref().or(inst.config.mode.as_deref()) {
        Some(m) => parse_mode(m)?,
        None => defaults.mode,
    };
    let initial_mesh = flags.mesh.or(inst.config.mesh);
    if initial_mesh == Some(0) {
        return Err(CliError::input("mesh must be positive"));
    }
    let workers = flags.workers.or(inst.config.workers).unwrap_or(1);
    if workers == 0 {
        return Err(CliError::input("workers must be positive"));
    }
    let budget_cells = flags.budget_cells.or(inst.config.budget).unwrap_or(defaults.budget_cells);
    let cfg = SolverConfig { mode, initial_mesh, workers, budget_cells, ..defaults };
    let echo = ConfigEcho { initial_mesh, mode: mode.as_str().into(), budget_cells, seed: inst.config.seed };
    Ok((cfg, echo))
}

/// Solves an instance in memory. Returns the result and the exit code.
pub fn solve_instance(file: &InstanceFile, flags: &SolveFlags) -> Result<(ResultFile, i32), CliError> {
    let started = Instant::now();
    let inst = file.load()?;
    let eps = match &flags.epsilon {
        Some(e) => scalar("--epsilon", e)?,
        None => inst.epsilon.clone(),
    };
    let (cfg, echo) = solver_config(&inst, flags)?;

    let individual_kind = inst.groups.is_singletons();
    let (individual, membership, partition, report, status, levels) = if individual_kind {
        let sol = solve_individual(&inst.valuations, &eps, &cfg)?;
        let membership = sol.allocation.assignment.as_slice().to_vec();
        let partition = sol.allocation.partition.clone();
        (sol.allocation, membership, partition, sol.report, sol.status, sol.levels)
    } else {
        let sol = solve_groups(&inst.valuations, &inst.groups, &eps, &cfg)?;
        (sol.individual, sol.allocation.membership, sol.allocation.partition, sol.report, sol.status, sol.levels)
    };

    let cuts = partition.to_cuts();
    let names = &inst.names;
    let bounds: Vec<Scalar> = std::iter::once(Scalar::from_integer(0.into()))
        .chain(cuts.cuts().iter().cloned())
        .chain(std::iter::once(Scalar::from_integer(1.into())))
        .collect();
    let pieces = (0..partition.arity())
        .map(|j| PieceOut {
            group: j,
            start: Exact::of(&bounds[j]),
            end: Exact::of(&bounds[j + 1]),
            members: (0..names.len()).filter(|&p| membership[p] == j).map(|p| names[p].clone()).collect(),
        })
        .collect();
    let allocation = AllocationOut {
        cuts: cuts.cuts().iter().map(Exact::of).collect(),
        pieces,
        membership: names.iter().zip(&membership).map(|(n, &g)| MemberOut { player: n.clone(), group: g }).collect(),
    };
    let stable = StableResult {
        schema: SCHEMA_VERSION,
        kind: if individual_kind { "individual" } else { "groups" }.into(),
        status: match status {
            SolveStatus::Converged => "converged",
            SolveStatus::BudgetExceeded => "budgetExceeded",
        }
        .into(),
        epsilon: format_scalar(&eps),
        pass: report.pass,
        allocation,
        envy: envy_out(&report, names),
        certificate: certificate_out(&individual, names),
        provenance: Provenance {
            config: echo,
            versions: BTreeMap::from([
                ("fairslice".to_string(), env!("CARGO_PKG_VERSION").to_string()),
                ("schema".to_string(), SCHEMA_VERSION.to_string()),
            ]),
            levels: levels.iter().map(level_out).collect(),
        },
        notes: NOTES.iter().map(|s| s.to_string()).collect(),
    };
    let runtime = RuntimeInfo {
        workers: cfg.workers,
        elapsed_ms: started.elapsed().as_millis() as u64,
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    };
    let exit = match status {
        SolveStatus::Converged => EXIT_OK,
        SolveStatus::BudgetExceeded => EXIT_BUDGET,
    };
    Ok((ResultFile { stable, runtime }, exit))
}

pub fn cmd_solve(instance: &Path, flags: &SolveFlags) -> Result<CommandOutput, CliError> {
    let file: InstanceFile = read_json(instance)?;
    let (result, exit_code) = solve_instance(&file, flags)?;
    Ok(CommandOutput { body: to_json(&result), exit_code })
}

pub fn envy_out(report: &EnvyReport, names: &[String]) -> EnvyOut {
    EnvyOut {
        max_envy: Exact::of(&report.max_envy),
        enviers: report.enviers().into_iter().map(|p| names[p].clone()).collect(),
        players: report
            .players
            .iter()
            .map(|p| PlayerEnvyOut {
                player: names[p.player].clone(),
                group: p.held,
                own_value: Exact::of(&p.own_value),
                best_value: Exact::of(&p.best_value),
                envy: Exact::of(&p.envy),
            })
            .collect(),
    }
}

fn certificate_out(alloc: &IndividualAllocation, names: &[String]) -> CertificateOut {
    let cert = &alloc.certificate;
    CertificateOut {
        mesh: cert.cell.mesh(),
        base: cert.cell.base().to_vec(),
        permutation: cert.cell.perm().to_vec(),
        owners: cert.owners.iter().map(|&o| names[o].clone()).collect(),
        labels: cert.labels.clone(),
        individual_cuts: alloc.partition.to_cuts().cuts().iter().map(format_scalar).collect(),
        assignment: names.iter().cloned().zip(alloc.assignment.as_slice().iter().copied()).collect(),
    }
}

fn level_out(level: &MeshLevel) -> LevelOut {
    LevelOut {
        mesh: level.mesh,
        mode: level.mode.as_str().into(),
        cells_visited: level.cells_visited,
        faces_visited: level.faces_visited,
        max_envy: Exact::of(&level.max_envy),
        diagnostic: level.diagnostic.clone(),
    }
}
