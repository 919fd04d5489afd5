use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::cli::config::{Experiment, ExperimentConfig, OutputFormat};
use crate::cli::experiments;
use crate::cli::table::Table;
use crate::error::Result;

/// Everything an experiment produced.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    /// Extra files (name, bytes) such as trajectories or per-scale counts.
    pub artifacts: Vec<(String, Vec<u8>)>,
    /// Human-readable lines printed after the run.
    pub report: Vec<String>,
    /// Some tasks were skipped because the time budget ran out.
    pub partial: bool,
}

/// Wall-clock budget checked before each task starts.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    start: Instant,
    limit: Option<Duration>,
}

impl Budget {
    pub fn new(max_seconds: Option<f64>) -> Self {
        Self {
            start: Instant::now(),
            limit: max_seconds.map(Duration::from_secs_f64),
        }
    }

    pub fn exhausted(&self) -> bool {
        self.limit.is_some_and(|l| self.start.elapsed() > l)
    }
}

/// Runs `task` over `inputs` on the current rayon pool, in input order.
/// Tasks that would start after the budget is exhausted yield `None`.
pub(crate) fn fan_out<I, T, F>(inputs: &[I], budget: &Budget, task: F) -> Result<(Vec<T>, bool)>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> Result<T> + Sync + Send,
{
    let results: Vec<Option<T>> = inputs
        .par_iter()
        .map(|input| {
            if budget.exhausted() {
                Ok(None)
            } else {
                task(input).map(Some)
            }
        })
        .collect::<Result<_>>()?;
    let partial = results.iter().any(Option::is_none);
    Ok((results.into_iter().flatten().collect(), partial))
}

pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let budget = Budget::new(config.max_seconds);
    let mut out = match &config.experiment {
        Experiment::Simulate(c) => experiments::simulate::run(config, c, &budget)?,
        Experiment::Dimension(c) => experiments::dimension::run(config, c, &budget)?,
        Experiment::Tailindex(c) => experiments::tailindex::run(config, c, &budget)?,
        Experiment::SynthGap(c) => experiments::synth_gap::run(config, c, &budget)?,
        Experiment::MlpGap(c) => experiments::mlp_gap::run(config, c, &budget)?,
        Experiment::Bound(c) => experiments::bound::run(c)?,
    };
    for t in &mut out.tables {
        t.sort();
    }
    Ok(out)
}

/// Writes tables, artifacts and the resolved-config sidecar into `dir`.
pub fn write_outputs(config: &ExperimentConfig, output: &RunOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let hash = config.hash();
    for table in &output.tables {
        match config.format {
            OutputFormat::Csv => {
                let f = std::fs::File::create(dir.join(format!("{}.csv", table.name)))?;
                table.write_csv(std::io::BufWriter::new(f), &hash)?;
            }
            OutputFormat::Json => {
                let f = std::fs::File::create(dir.join(format!("{}.json", table.name)))?;
                table.write_json(std::io::BufWriter::new(f), &hash)?;
            }
        }
    }
    for (name, bytes) in &output.artifacts {
        std::fs::write(dir.join(name), bytes)?;
    }
    let sidecar = serde_json::json!({
        "config_hash": hash,
        "partial": output.partial,
        "config": config,
    });
    std::fs::write(
        dir.join(format!("{}.config.json", config.experiment.name())),
        serde_json::to_string_pretty(&sidecar)? + "\n",
    )?;
    Ok(())
}
