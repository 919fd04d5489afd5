use crate::cli::config::{DimensionConfig, ExperimentConfig};
use crate::cli::run::{fan_out, Budget, RunOutput};
use crate::cli::table::Table;
use crate::error::Result;
use crate::fractal_dim::{estimate_dimension, DimensionEstimate};
use crate::process_sim::simulate_levy;
use crate::rng::{derive_seed, stream};
use crate::stable_dist::MultivariateStableSpec;
use crate::stats::{mean, std_dev};

/// Box-counting estimate for one simulated elliptic Lévy path of `points` points.
pub fn estimate_levy(c: &DimensionConfig, alpha: f64, seed: u64) -> Result<DimensionEstimate> {
    let law = MultivariateStableSpec::elliptic(c.dim, alpha)?;
    let step = 1.0 / (c.points - 1) as f64;
    let traj = simulate_levy(&law, 1.0, step, seed, &mut stream(seed))?;
    estimate_dimension(&traj, c.scale_count, &c.window)
}

pub fn run(config: &ExperimentConfig, c: &DimensionConfig, budget: &Budget) -> Result<RunOutput> {
    let tasks: Vec<(usize, usize)> = (0..c.alphas.len())
        .flat_map(|a| (0..config.repetitions).map(move |r| (a, r)))
        .collect();
    let (results, partial) = fan_out(&tasks, budget, |&(a, r)| {
        let alpha = c.alphas[a];
        let seed = derive_seed(config.seed, &format!("dimension/alpha={alpha}/rep={r}"));
        Ok((alpha, r, estimate_levy(c, alpha, seed)?))
    })?;

    let mut detail = Table::new(
        "dimension",
        &[
            "alpha",
            "rep",
            "slope",
            "raw_slope",
            "r_squared",
            "fitted_scales",
            "degenerate",
        ],
    );
    let mut out = RunOutput {
        partial,
        ..Default::default()
    };
    for (alpha, r, e) in &results {
        detail.push(vec![
            (*alpha).into(),
            (*r).into(),
            e.slope.into(),
            e.raw_slope.into(),
            e.r_squared.into(),
            e.fitted.iter().filter(|&&f| f).count().into(),
            e.degenerate.into(),
        ]);
        if *r == 0 {
            let mut csv = Vec::new();
            e.write_csv(&mut csv)?;
            out.artifacts.push((format!("dimension_alpha{alpha}_scales.csv"), csv));
        }
    }

    let mut summary = Table::new("dimension_summary", &["alpha", "mean_slope", "std_slope", "reps"]);
    for &alpha in &c.alphas {
        let slopes: Vec<f64> = results.iter().filter(|x| x.0 == alpha).map(|x| x.2.slope).collect();
        if slopes.is_empty() {
            continue;
        }
        out.report.push(format!(
            "alpha = {alpha}: mean box-counting slope {:.4} over {} paths",
            mean(&slopes),
            slopes.len()
        ));
        summary.push(vec![
            alpha.into(),
            mean(&slopes).into(),
            std_dev(&slopes).into(),
            slopes.len().into(),
        ]);
    }
    out.tables.push(detail);
    out.tables.push(summary);
    Ok(out)
}
