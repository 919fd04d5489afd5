//! β_S versus train/test accuracy gap for small ReLU networks trained by SGD
//! on the Gaussian-mixture task over a (depth, η, B) grid.

use crate::cli::config::{ExperimentConfig, MlpGapConfig};
use crate::cli::run::{fan_out, Budget, RunOutput};
use crate::cli::table::Table;
use crate::error::{Error, Result};
use crate::learning::{accuracy, Dataset, GaussianMixture, Mlp, Objective};
use crate::process_sim::{run_sgd, SgdConfig};
use crate::rng::{child_stream, derive_seed, stream};
use crate::stats::{mean, spearman};
use crate::tail_index::estimate_beta;

/// Final training accuracy below this marks a run as not converged.
pub const CONVERGED_ACCURACY: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub depth: usize,
    pub eta: f64,
    pub batch: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cell: Cell,
    pub rep: usize,
    pub beta_s: f64,
    pub train_acc: f64,
    pub test_acc: f64,
    pub train_loss: f64,
    pub test_loss: f64,
    /// SGD produced a non-finite loss or gradient; metrics are NaN.
    pub diverged: bool,
}

impl CellResult {
    pub fn gap(&self) -> f64 {
        self.train_acc - self.test_acc
    }

    pub fn converged(&self) -> bool {
        !self.diverged && self.train_acc >= CONVERGED_ACCURACY
    }
}

pub fn grid(c: &MlpGapConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &depth in &c.depths {
        for &eta in &c.etas {
            for &batch in &c.batches {
                cells.push(Cell { depth, eta, batch });
            }
        }
    }
    cells
}

fn scaled(data: Dataset, factor: f64) -> Result<Dataset> {
    let d = data.feature_dim();
    let features = data
        .iter()
        .flat_map(|(x, _)| x.iter().map(move |v| v * factor))
        .collect();
    Dataset::new(features, data.labels().to_vec(), d, data.provenance().clone())
}

/// Training and test sets for one repetition, shared by every cell.
pub fn datasets(c: &MlpGapConfig, master: u64, rep: usize) -> Result<(Dataset, Dataset)> {
    let seed = derive_seed(master, &format!("mlp-gap/rep={rep}/data"));
    let mut rng = stream(seed);
    let mixture = GaussianMixture::draw(c.input_dim, &mut rng)?;
    let train = mixture.sample(c.train_size, seed, &mut rng)?;
    let test = mixture.sample(c.test_size, seed, &mut rng)?;
    Ok((scaled(train, c.feature_scale)?, scaled(test, c.feature_scale)?))
}

fn mean_loss(model: &Mlp, w: &[f64], data: &Dataset) -> f64 {
    data.iter().map(|(x, y)| model.loss(w, x, y)).sum::<f64>() / data.len() as f64
}

pub fn train_cell(
    c: &MlpGapConfig,
    master: u64,
    cell: Cell,
    rep: usize,
    train: &Dataset,
    test: &Dataset,
) -> Result<CellResult> {
    let mut widths = vec![c.input_dim];
    widths.extend(std::iter::repeat_n(c.hidden_width, cell.depth));
    widths.push(1);
    let model = Mlp::new(widths)?;
    // Same initial point for every (η, B) at a given depth and repetition.
    let init = model.init_params(&mut child_stream(
        master,
        &format!("mlp-gap/rep={rep}/depth={}/init", cell.depth),
    ));

    let path = format!(
        "mlp-gap/rep={rep}/depth={}/eta={}/batch={}",
        cell.depth, cell.eta, cell.batch
    );
    let seed = derive_seed(master, &path);
    let config = SgdConfig {
        eta: cell.eta,
        batch: cell.batch,
        epochs: c.epochs,
    };
    let traj = match run_sgd(&model, train, &init, config, seed, &mut stream(seed)) {
        Ok(t) => t,
        Err(Error::NonFinite { step, what }) => {
            log::warn!("{path} diverged at step {step}: {what}");
            return Ok(CellResult {
                cell,
                rep,
                beta_s: f64::NAN,
                train_acc: f64::NAN,
                test_acc: f64::NAN,
                train_loss: f64::NAN,
                test_loss: f64::NAN,
                diverged: true,
            });
        }
        Err(e) => return Err(e),
    };
    let last = traj.len() - 1;
    let window = last - config.steps_per_epoch(train.len())..traj.len();
    let report = estimate_beta(&traj, &model.group_map(), window, c.k1, c.centering)?;

    let w = traj.last();
    Ok(CellResult {
        cell,
        rep,
        beta_s: report.beta_s,
        train_acc: accuracy(&model, w, train),
        test_acc: accuracy(&model, w, test),
        train_loss: mean_loss(&model, w, train),
        test_loss: mean_loss(&model, w, test),
        diverged: false,
    })
}

/// Spearman correlation between β_S and the gap over every trained model, and
/// over per-cell means.
/// Diverged runs are left out.
pub fn correlations(results: &[CellResult]) -> (f64, f64) {
    let results: Vec<CellResult> = results.iter().filter(|r| !r.diverged).cloned().collect();
    let results = results.as_slice();
    let betas: Vec<f64> = results.iter().map(|r| r.beta_s).collect();
    let gaps: Vec<f64> = results.iter().map(CellResult::gap).collect();
    let per_run = spearman(&betas, &gaps);

    let mut cells: Vec<Cell> = Vec::new();
    for r in results {
        if !cells.contains(&r.cell) {
            cells.push(r.cell);
        }
    }
    let (mut cb, mut cg) = (Vec::new(), Vec::new());
    for cell in &cells {
        let rs: Vec<&CellResult> = results.iter().filter(|r| r.cell == *cell).collect();
        cb.push(mean(&rs.iter().map(|r| r.beta_s).collect::<Vec<_>>()));
        cg.push(mean(&rs.iter().map(|r| r.gap()).collect::<Vec<_>>()));
    }
    (per_run, spearman(&cb, &cg))
}

pub fn run(config: &ExperimentConfig, c: &MlpGapConfig, budget: &Budget) -> Result<RunOutput> {
    let cells = grid(c);
    let data: Vec<(Dataset, Dataset)> = (0..config.repetitions)
        .map(|r| datasets(c, config.seed, r))
        .collect::<Result<_>>()?;
    let tasks: Vec<(Cell, usize)> = (0..config.repetitions)
        .flat_map(|r| cells.iter().map(move |&cell| (cell, r)))
        .collect();
    let (results, partial) = fan_out(&tasks, budget, |&(cell, r)| {
        train_cell(c, config.seed, cell, r, &data[r].0, &data[r].1)
    })?;

    let mut rows = Table::new(
        "mlp_gap",
        &[
            "depth",
            "eta",
            "batch",
            "eta_over_b",
            "rep",
            "beta_s",
            "gap",
            "train_acc",
            "test_acc",
            "train_loss",
            "test_loss",
            "converged",
            "diverged",
        ],
    );
    for r in &results {
        rows.push(vec![
            r.cell.depth.into(),
            r.cell.eta.into(),
            r.cell.batch.into(),
            (r.cell.eta / r.cell.batch as f64).into(),
            r.rep.into(),
            r.beta_s.into(),
            r.gap().into(),
            r.train_acc.into(),
            r.test_acc.into(),
            r.train_loss.into(),
            r.test_loss.into(),
            r.converged().into(),
            r.diverged.into(),
        ]);
    }

    let mut out = RunOutput {
        partial,
        ..Default::default()
    };
    let mut summary = Table::new(
        "mlp_gap_summary",
        &["runs", "cells", "spearman_runs", "spearman_cells", "sign"],
    );
    if results.iter().filter(|r| !r.diverged).count() >= 2 {
        let (per_run, per_cell) = correlations(&results);
        let sign = if per_run > 0.0 {
            "positive"
        } else if per_run < 0.0 {
            "negative"
        } else {
            "zero"
        };
        summary.push(vec![
            results.len().into(),
            cells.len().into(),
            per_run.into(),
            per_cell.into(),
            sign.into(),
        ]);
        let unconverged = results.iter().filter(|r| !r.converged()).count();
        out.report.push(format!(
            "Spearman(beta_S, gap): {per_run:.4} over {} trained models ({sign}), {per_cell:.4} over cell means; {unconverged} not converged",
            results.len()
        ));
    }
    out.tables.push(rows);
    out.tables.push(summary);
    Ok(out)
}
