use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learning::dataset::Dataset;
use crate::learning::objective::Objective;
use crate::process_sim::Trajectory;

/// Empirical and population risk at the trajectory point attaining the
/// largest gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub empirical: f64,
    pub population: f64,
    pub gap: f64,
    pub argmax_time: usize,
}

/// Mean loss of `w` over `data`.
pub fn empirical_risk<O: Objective + ?Sized>(objective: &O, w: &[f64], data: &Dataset) -> f64 {
    let total: f64 = data.iter().map(|(x, y)| objective.loss(w, x, y)).sum();
    total / data.len() as f64
}

/// Mean loss over the finite surrogate population.
pub fn population_risk<O: Objective + ?Sized>(objective: &O, w: &[f64], population: &Dataset) -> f64 {
    empirical_risk(objective, w, population)
}

/// `sup_t |R̂(w_t, S) − R(w_t)|` over the recorded points of `traj`.
pub fn generalization_gap<O: Objective + ?Sized>(
    objective: &O,
    traj: &Trajectory,
    sample: &Dataset,
    population: &Dataset,
) -> Result<RiskReport> {
    if traj.dim() != objective.num_params() {
        return Err(Error::DimensionMismatch {
            expected: objective.num_params(),
            got: traj.dim(),
        });
    }
    let per_point: Vec<(f64, f64)> = (0..traj.len())
        .into_par_iter()
        .map(|k| {
            let w = traj.point(k);
            (
                empirical_risk(objective, w, sample),
                population_risk(objective, w, population),
            )
        })
        .collect();
    Ok(sup_gap(&per_point))
}

/// Picks the first index attaining the largest `|empirical − population|`.
pub(crate) fn sup_gap(per_point: &[(f64, f64)]) -> RiskReport {
    let mut best = RiskReport {
        empirical: per_point[0].0,
        population: per_point[0].1,
        gap: (per_point[0].0 - per_point[0].1).abs(),
        argmax_time: 0,
    };
    for (k, &(e, p)) in per_point.iter().enumerate().skip(1) {
        let gap = (e - p).abs();
        if gap > best.gap {
            best = RiskReport {
                empirical: e,
                population: p,
                gap,
                argmax_time: k,
            };
        }
    }
    best
}
