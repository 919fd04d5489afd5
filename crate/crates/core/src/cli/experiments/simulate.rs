use crate::cli::config::{ExperimentConfig, ProcessKind, SimulateConfig};
use crate::cli::run::{fan_out, Budget, RunOutput};
use crate::cli::table::Table;
use crate::error::Result;
use crate::process_sim::{
    simulate_levy, simulate_sde, Coefficient, Drift, DrivingSpec, QuadraticBowl, SdeOptions, Trajectory,
};
use crate::rng::{derive_seed, stream};

fn driving_spec(c: &SimulateConfig) -> Result<DrivingSpec> {
    let drift = match &c.drift_center {
        Some(center) => Drift::gradient_of(QuadraticBowl { center: center.clone() }),
        None => Drift::Zero,
    };
    let scalar = |s: f64| {
        if s == 0.0 {
            Coefficient::Zero
        } else {
            Coefficient::Scalar(s)
        }
    };
    DrivingSpec::new(drift, scalar(c.gaussian_scale), scalar(c.stable_scale), c.law.clone())
}

pub fn simulate_one(c: &SimulateConfig, seed: u64) -> Result<Trajectory> {
    let mut rng = stream(seed);
    match c.process {
        ProcessKind::Levy => simulate_levy(&c.law, c.horizon, c.step, seed, &mut rng),
        ProcessKind::Sde => {
            let spec = driving_spec(c)?;
            let initial = c.initial.clone().unwrap_or_else(|| vec![0.0; c.law.dim()]);
            let opts = SdeOptions {
                divergence_cap: c.divergence_cap,
            };
            simulate_sde(&spec, &initial, c.horizon, c.step, seed, opts, &mut rng)
        }
    }
}

pub fn run(config: &ExperimentConfig, c: &SimulateConfig, budget: &Budget) -> Result<RunOutput> {
    let reps: Vec<usize> = (0..config.repetitions).collect();
    let (trajs, partial) = fan_out(&reps, budget, |&r| {
        let seed = derive_seed(config.seed, &format!("simulate/rep={r}"));
        Ok((r, simulate_one(c, seed)?))
    })?;

    let mut table = Table::new(
        "simulate",
        &["rep", "seed", "points", "truncated", "horizon", "final_norm", "max_abs"],
    );
    let mut out = RunOutput {
        partial,
        ..Default::default()
    };
    for (r, t) in &trajs {
        let final_norm = t.last().iter().map(|x| x * x).sum::<f64>().sqrt();
        let max_abs = t.points().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        table.push(vec![
            (*r).into(),
            t.meta().seed.to_string().into(),
            t.len().into(),
            t.is_truncated().into(),
            t.meta().horizon.into(),
            final_norm.into(),
            max_abs.into(),
        ]);
        if c.write_trajectories {
            let mut bin = Vec::new();
            t.write_binary(&mut bin)?;
            out.artifacts.push((format!("trajectory_rep{r}.bin"), bin));
            let mut csv = Vec::new();
            t.write_csv(&mut csv)?;
            out.artifacts.push((format!("trajectory_rep{r}.csv"), csv));
        }
    }
    out.tables.push(table);
    Ok(out)
}
