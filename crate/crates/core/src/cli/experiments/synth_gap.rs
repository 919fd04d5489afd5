//! Generalization gap of data-independent stable trajectories on the
//! Gaussian-mixture logistic-regression task.
//!
//! For each repetition a population is drawn, then for each tail index a
//! trajectory `W_t = L^α_t` on `t ∈ [0, horizon]` is simulated, and for each
//! sample size `n` the gap `sup_t |R̂(W_t, S) − R(W_t)|` is measured on
//! `subsets` random training sets `S`. Populations and training sets are
//! shared across tail indices within a repetition.

use rand::seq::index;

use crate::cli::config::{ExperimentConfig, SynthGapConfig};
use crate::cli::run::{fan_out, Budget, RunOutput};
use crate::cli::table::Table;
use crate::error::Result;
use crate::learning::{Dataset, GaussianMixture, LogisticLoss, Objective};
use crate::process_sim::simulate_levy;
use crate::rng::{child_stream, derive_seed, stream};
use crate::stable_dist::MultivariateStableSpec;
use crate::stats::{mean, std_dev};

pub fn population(c: &SynthGapConfig, master: u64, rep: usize) -> Result<Dataset> {
    let path = format!("synth-gap/rep={rep}/population");
    let seed = derive_seed(master, &path);
    let mut rng = stream(seed);
    GaussianMixture::draw(c.dim, &mut rng)?.sample(c.population, seed, &mut rng)
}

/// Sorted training-set indices, `subsets` per entry of `ns`.
pub fn training_sets(c: &SynthGapConfig, master: u64, rep: usize) -> Vec<Vec<Vec<usize>>> {
    let mut rng = child_stream(master, &format!("synth-gap/rep={rep}/subsets"));
    c.ns.iter()
        .map(|&n| {
            (0..c.subsets)
                .map(|_| {
                    let mut idx = index::sample(&mut rng, c.population, n).into_vec();
                    idx.sort_unstable();
                    idx
                })
                .collect()
        })
        .collect()
}

/// Gap for every (n, subset) pair: `gaps[n_index][subset]`.
pub fn measure_gaps(
    c: &SynthGapConfig,
    master: u64,
    rep: usize,
    alpha: f64,
    pop: &Dataset,
    sets: &[Vec<Vec<usize>>],
) -> Result<Vec<Vec<f64>>> {
    let law = MultivariateStableSpec::elliptic(c.dim, alpha)?;
    let seed = derive_seed(master, &format!("synth-gap/rep={rep}/alpha={alpha}"));
    let traj = simulate_levy(&law, c.horizon, c.step, seed, &mut stream(seed))?;
    let loss = LogisticLoss { dim: c.dim };

    let mut gaps: Vec<Vec<f64>> = sets.iter().map(|s| vec![0.0; s.len()]).collect();
    let mut losses = vec![0.0; pop.len()];
    for w in traj.iter_points() {
        for (i, l) in losses.iter_mut().enumerate() {
            *l = loss.loss(w, pop.x(i), pop.y(i));
        }
        let risk = losses.iter().sum::<f64>() / losses.len() as f64;
        for (per_n, sets_n) in gaps.iter_mut().zip(sets) {
            for (g, idx) in per_n.iter_mut().zip(sets_n) {
                let emp = idx.iter().map(|&i| losses[i]).sum::<f64>() / idx.len() as f64;
                *g = g.max((emp - risk).abs());
            }
        }
    }
    Ok(gaps)
}

pub fn run(config: &ExperimentConfig, c: &SynthGapConfig, budget: &Budget) -> Result<RunOutput> {
    let reps: Vec<usize> = (0..config.repetitions).collect();
    let (per_rep, partial) = fan_out(&reps, budget, |&r| {
        let pop = population(c, config.seed, r)?;
        let sets = training_sets(c, config.seed, r);
        let mut cells = Vec::with_capacity(c.alphas.len());
        for &alpha in &c.alphas {
            if budget.exhausted() {
                break;
            }
            cells.push((alpha, measure_gaps(c, config.seed, r, alpha, &pop, &sets)?));
        }
        Ok((r, cells))
    })?;
    let partial = partial || per_rep.iter().any(|(_, cells)| cells.len() < c.alphas.len());

    let mut detail = Table::new("synth_gap_runs", &["alpha", "n", "rep", "mean_gap", "max_gap"]);
    for (r, cells) in &per_rep {
        for (alpha, gaps) in cells {
            for (k, &n) in c.ns.iter().enumerate() {
                let g = &gaps[k];
                detail.push(vec![
                    (*alpha).into(),
                    n.into(),
                    (*r).into(),
                    mean(g).into(),
                    g.iter().copied().fold(0.0, f64::max).into(),
                ]);
            }
        }
    }

    let mut summary = Table::new("synth_gap", &["alpha", "n", "mean_gap", "std_gap", "draws"]);
    let mut out = RunOutput {
        partial,
        ..Default::default()
    };
    for &alpha in &c.alphas {
        for (k, &n) in c.ns.iter().enumerate() {
            let all: Vec<f64> = per_rep
                .iter()
                .flat_map(|(_, cells)| cells.iter().filter(|x| x.0 == alpha))
                .flat_map(|(_, gaps)| gaps[k].iter().copied())
                .collect();
            if all.is_empty() {
                continue;
            }
            summary.push(vec![
                alpha.into(),
                n.into(),
                mean(&all).into(),
                std_dev(&all).into(),
                all.len().into(),
            ]);
        }
    }
    summary.sort();
    out.report.push(summary.to_string());
    out.tables.push(detail);
    out.tables.push(summary);
    Ok(out)
}
