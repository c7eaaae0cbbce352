use std::path::PathBuf;
use std::time::Instant;

use fairslice::envy::max_density;
use fairslice::instances::random_instance;
use fairslice::rational::{decimal12, format_scalar};
use fairslice::sperner::{check_envy_individual, envy_bound, find_fully_labeled, read_allocation};
use fairslice::{
    assemble_groups, lift_demand, verify_group_envy, GroupStructure, Scalar, SearchMode, SolverConfig, Valuation,
};

use crate::error::{CliError, EXIT_OK};
use crate::schema::{parse_mode, read_json, InstanceFile};
use crate::CommandOutput;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BenchSource {
    Instance(PathBuf),
    /// `uniform:N`
    Uniform(usize),
    /// `random:N`, drawn from the seed
    Random(usize),
}

impl BenchSource {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let count = |n: &str| {
            n.parse::<usize>().map_err(|_| CliError::input(format!("bad player count in generator spec {text:?}")))
        };
        match text.split_once(':') {
            Some(("uniform", n)) => Ok(BenchSource::Uniform(count(n)?)),
            Some(("random", n)) => Ok(BenchSource::Random(count(n)?)),
            _ => Ok(BenchSource::Instance(PathBuf::from(text))),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct BenchFlags {
    pub meshes: Option<Vec<u32>>,
    pub mode: Option<String>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub budget_cells: Option<u64>,
    /// Group sizes for generated instances.
    pub groups: Option<Vec<usize>>,
    /// Fill the wall-clock column; otherwise it reads `-` and output is byte-stable.
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRow {
    pub mesh: u32,
    pub mode: SearchMode,
    pub cells_visited: u64,
    pub faces_visited: u64,
    pub elapsed_ms: Option<u128>,
    /// Envy of this mesh's cell readout alone.
    pub cell_envy: Scalar,
    /// Best envy over this and all coarser meshes so far.
    pub envy: Scalar,
    /// `2 D (n - 1) / K`; individual instances only.
    pub bound: Option<Scalar>,
}

/// Runs the finder once per mesh and scores each readout.
pub fn bench_rows(
    valuations: &[Valuation],
    groups: &GroupStructure,
    meshes: &[u32],
    cfg: &SolverConfig,
    timing: bool,
) -> Result<Vec<BenchRow>, CliError> {
    let n = valuations.len();
    if n < 2 {
        return Err(CliError::input("bench needs at least two players"));
    }
    if groups.players() != n {
        return Err(CliError::input(format!("group sizes sum to {} but there are {n} players", groups.players())));
    }
    let zero = Scalar::from_integer(0.into());
    let dmax = max_density(valuations);
    let lifted: Vec<_> = valuations.iter().map(|v| lift_demand(v, groups)).collect();
    let mut rows: Vec<BenchRow> = vec![];
    for &mesh in meshes {
        if mesh == 0 {
            return Err(CliError::input("mesh must be positive"));
        }
        let started = Instant::now();
        let (outcome, mode) = if groups.is_singletons() {
            find_fully_labeled(valuations, mesh, cfg, Some(cfg.budget_cells))?
        } else {
            find_fully_labeled(&lifted, mesh, cfg, Some(cfg.budget_cells))?
        };
        let alloc = read_allocation(&outcome.cell);
        let cell_envy = if groups.is_singletons() {
            check_envy_individual(valuations, &alloc, &zero).max_envy
        } else {
            let g = assemble_groups(&alloc.partition, &alloc.assignment, groups).expect("arity checked");
            verify_group_envy(valuations, &g, &zero).max_envy
        };
        let elapsed_ms = timing.then(|| started.elapsed().as_millis());
        let envy = match rows.last() {
            Some(prev) if prev.envy < cell_envy => prev.envy.clone(),
            _ => cell_envy.clone(),
        };
        rows.push(BenchRow {
            mesh,
            mode,
            cells_visited: outcome.cells_visited,
            faces_visited: outcome.faces_visited,
            elapsed_ms,
            cell_envy,
            envy,
            bound: groups.is_singletons().then(|| envy_bound(&dmax, n, mesh)),
        });
    }
    Ok(rows)
}

pub fn render_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("mesh,mode,cells_visited,faces_visited,time_ms,cell_envy,envy,envy_decimal,bound\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.mesh,
            r.mode.as_str(),
            r.cells_visited,
            r.faces_visited,
            r.elapsed_ms.map_or("-".into(), |t| t.to_string()),
            format_scalar(&r.cell_envy),
            format_scalar(&r.envy),
            decimal12(&r.envy),
            r.bound.as_ref().map_or("-".into(), format_scalar),
        ));
    }
    out
}

pub fn cmd_bench(source: &str, flags: &BenchFlags) -> Result<CommandOutput, CliError> {
    let seed = flags.seed.unwrap_or(0);
    let (valuations, sizes, config_mesh, config_mode) = match BenchSource::parse(source)? {
        BenchSource::Instance(path) => {
            let file: InstanceFile = read_json(&path)?;
            let inst = file.load()?;
            let sizes = flags.groups.clone().unwrap_or_else(|| inst.groups.sizes().to_vec());
            (inst.valuations, sizes, inst.config.mesh, inst.config.mode)
        }
        BenchSource::Uniform(n) => {
            (vec![Valuation::uniform(); n], flags.groups.clone().unwrap_or(vec![1; n]), None, None)
        }
        BenchSource::Random(n) => (random_instance(seed, n), flags.groups.clone().unwrap_or(vec![1; n]), None, None),
    };
    let n = valuations.len();
    let groups = GroupStructure::new(sizes).map_err(|e| CliError::input(format!("groups: {e}")))?;
    let meshes = match &flags.meshes {
        Some(m) => m.clone(),
        None => {
            let k0 = config_mesh.unwrap_or(n as u32).max(1);
            (0..4).map(|i| k0 << i).collect()
        }
    };
    let defaults = SolverConfig::default();
    let mode = match flags.mode.as_deref().or(config_mode.as_deref()) {
        Some(m) => parse_mode(m)?,
        None => defaults.mode,
    };
    let cfg = SolverConfig {
        mode,
        workers: flags.workers.unwrap_or(1).max(1),
        budget_cells: flags.budget_cells.unwrap_or(defaults.budget_cells),
        ..defaults
    };
    let rows = bench_rows(&valuations, &groups, &meshes, &cfg, flags.timing)?;
    Ok(CommandOutput { body: render_csv(&rows), exit_code: EXIT_OK })
}
