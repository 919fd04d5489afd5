//! Per-group tail-index estimation from iterate increments.
//!
//! For `K = k₁·k₂` centered samples `X₁…X_K` split into `k₂` consecutive
//! blocks with sums `Y₁…Y_{k₂}`,
//!
//! ```text
//! 1/α̂ = ( mean_i log|Y_i| − mean_j log|X_j| ) / log k₁
//! ```
//!
//! Block sums of i.i.d. strictly α-stable draws equal `k₁^{1/α}` times a draw
//! of the same law, so the difference of log-moments is `log(k₁)/α` in
//! expectation. Estimates above 2 are reported unclipped.

use std::fmt;
use std::ops::Range;
use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process_sim::Trajectory;

/// Assignment of every coordinate to exactly one named group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMap {
    names: Vec<String>,
    assignment: Vec<usize>,
}

impl GroupMap {
    pub fn new(names: Vec<String>, assignment: Vec<usize>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::Empty("group map has no groups"));
        }
        if let Some(&bad) = assignment.iter().find(|&&g| g >= names.len()) {
            return Err(Error::invalid("assignment", format!("group {bad} does not exist")));
        }
        for (g, name) in names.iter().enumerate() {
            if !assignment.contains(&g) {
                return Err(Error::invalid(
                    "assignment",
                    format!("group `{name}` has no coordinates"),
                ));
            }
        }
        Ok(Self { names, assignment })
    }

    /// All `dim` coordinates in one group.
    pub fn single(dim: usize) -> Self {
        Self {
            names: vec!["all".into()],
            assignment: vec![0; dim],
        }
    }

    /// Consecutive equal-sized groups `g0, g1, …` of `size` coordinates.
    pub fn contiguous(dim: usize, size: usize) -> Result<Self> {
        if size == 0 || !dim.is_multiple_of(size) {
            return Err(Error::invalid("size", format!("{size} does not divide {dim}")));
        }
        let names = (0..dim / size).map(|g| format!("g{g}")).collect();
        Self::new(names, (0..dim).map(|i| i / size).collect())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn num_groups(&self) -> usize {
        self.names.len()
    }

    fn members(&self, group: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == group)
            .collect()
    }
}

/// What is subtracted from the increments before estimation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Centering {
    /// Each coordinate's mean increment over the window.
    #[default]
    PerCoordinate,
    /// One mean over every increment of the group.
    Pooled,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSamples {
    pub name: String,
    /// Step-major: all coordinates of the first increment, then the second, …
    pub samples: Vec<f64>,
    /// Coordinates left out because every increment in the window is exactly zero.
    pub frozen: usize,
    /// No coordinate of the group moves over the window.
    pub degenerate: bool,
}

/// Successive differences `w_{k+1} − w_k` for `k` in the window, centered and
/// flattened per group. Coordinates that never move in the window (dead units,
/// masked parameters) carry no tail information and are left out.
pub fn preprocess_increments(
    traj: &Trajectory,
    groups: &GroupMap,
    window: Range<usize>,
    centering: Centering,
) -> Result<Vec<GroupSamples>> {
    if groups.assignment.len() != traj.dim() {
        return Err(Error::DimensionMismatch {
            expected: traj.dim(),
            got: groups.assignment.len(),
        });
    }
    if window.end > traj.len() || window.start >= window.end {
        return Err(Error::invalid(
            "window",
            format!("{window:?} outside 0..{}", traj.len()),
        ));
    }
    if window.len() < 2 {
        return Err(Error::invalid("window", "needs at least two iterates"));
    }
    let steps = window.len() - 1;
    Ok((0..groups.num_groups())
        .map(|g| {
            let members = groups.members(g);
            let moves = |i: usize| (window.start..window.end - 1).any(|k| traj.point(k + 1)[i] != traj.point(k)[i]);
            let coords: Vec<usize> = members.iter().copied().filter(|&i| moves(i)).collect();
            let mut samples = Vec::with_capacity(steps * coords.len());
            for k in window.start..window.end - 1 {
                let (a, b) = (traj.point(k), traj.point(k + 1));
                samples.extend(coords.iter().map(|&i| b[i] - a[i]));
            }
            if !coords.is_empty() {
                center(&mut samples, coords.len(), centering);
            }
            GroupSamples {
                name: groups.names[g].clone(),
                samples,
                frozen: members.len() - coords.len(),
                degenerate: coords.is_empty(),
            }
        })
        .collect())
}

fn center(samples: &mut [f64], width: usize, centering: Centering) {
    match centering {
        Centering::None => {}
        Centering::Pooled => {
            let m = samples.iter().sum::<f64>() / samples.len() as f64;
            samples.iter_mut().for_each(|x| *x -= m);
        }
        Centering::PerCoordinate => {
            let steps = samples.len() / width;
            for c in 0..width {
                let m = (0..steps).map(|k| samples[k * width + c]).sum::<f64>() / steps as f64;
                for k in 0..steps {
                    samples[k * width + c] -= m;
                }
            }
        }
    }
}

static ZERO_WARNED: AtomicBool = AtomicBool::new(false);

fn log_abs(x: f64) -> f64 {
    if x == 0.0 {
        if !ZERO_WARNED.swap(true, Ordering::Relaxed) {
            log::warn!("exact zero in tail-index input replaced by the smallest positive f64");
        }
        f64::from_bits(1).ln()
    } else {
        x.abs().ln()
    }
}

/// Tail index from `samples` using blocks of `k1`. Uses the longest prefix
/// that is a multiple of `k1`; at least two blocks are required.
pub fn estimate_alpha(samples: &[f64], k1: usize) -> Result<f64> {
    if k1 < 2 {
        return Err(Error::invalid("k1", "block size must be at least 2"));
    }
    let k2 = samples.len() / k1;
    if k2 < 2 {
        return Err(Error::invalid(
            "samples",
            format!("{} samples give fewer than two blocks of {k1}", samples.len()),
        ));
    }
    let used = &samples[..k1 * k2];
    let mean_log_x = used.iter().map(|&x| log_abs(x)).sum::<f64>() / used.len() as f64;
    let mean_log_y = used
        .chunks_exact(k1)
        .map(|block| log_abs(block.iter().sum()))
        .sum::<f64>()
        / k2 as f64;
    let inv = (mean_log_y - mean_log_x) / (k1 as f64).ln();
    if !(inv > 0.0 && inv.is_finite()) {
        return Err(Error::NonFinite {
            step: 0,
            what: format!("tail-index estimate has non-positive inverse {inv}"),
        });
    }
    Ok(1.0 / inv)
}

/// How the block size is chosen from the sample count `K`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum K1Policy {
    /// `round(√K)`.
    #[default]
    Sqrt,
    Fixed(usize),
}

impl K1Policy {
    pub fn block_size(self, k: usize) -> usize {
        match self {
            K1Policy::Sqrt => ((k as f64).sqrt().round() as usize).max(2),
            K1Policy::Fixed(k1) => k1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailIndexReport {
    pub group_names: Vec<String>,
    /// Raw estimates; values above 2 are an estimator artifact and kept.
    pub alpha_hats: Vec<f64>,
    pub beta_s: f64,
    pub sample_counts: Vec<usize>,
    pub degenerate: Vec<bool>,
}

impl TailIndexReport {
    /// `β_S` clipped into `(0, 2]` for use as a dimension.
    pub fn clipped_beta(&self) -> f64 {
        self.beta_s.min(2.0)
    }

    pub fn exceeds_two(&self) -> bool {
        self.alpha_hats.iter().any(|&a| a > 2.0)
    }
}

impl fmt::Display for TailIndexReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<16} {:>10} {:>10} flags", "group", "alpha_hat", "K")?;
        for i in 0..self.group_names.len() {
            let mut flags = Vec::new();
            if self.degenerate[i] {
                flags.push("degenerate");
            }
            if self.alpha_hats[i] > 2.0 {
                flags.push(">2");
            }
            writeln!(
                f,
                "{:<16} {:>10.4} {:>10} {}",
                self.group_names[i],
                self.alpha_hats[i],
                self.sample_counts[i],
                flags.join(",")
            )?;
        }
        write!(f, "beta_S = {:.4}", self.beta_s)
    }
}

pub fn estimate_beta(
    traj: &Trajectory,
    groups: &GroupMap,
    window: Range<usize>,
    k1_policy: K1Policy,
    centering: Centering,
) -> Result<TailIndexReport> {
    let prepared = preprocess_increments(traj, groups, window, centering)?;
    let estimates: Vec<(f64, usize)> = prepared
        .par_iter()
        .map(|g| {
            if g.degenerate {
                return Ok((f64::NAN, 0));
            }
            let k1 = k1_policy.block_size(g.samples.len());
            let a = estimate_alpha(&g.samples, k1)?;
            Ok((a, k1 * (g.samples.len() / k1)))
        })
        .collect::<Result<_>>()?;
    let alpha_hats: Vec<f64> = estimates.iter().map(|e| e.0).collect();
    if alpha_hats.iter().all(|a| a.is_nan()) {
        return Err(Error::Empty("every group is frozen over the window"));
    }
    Ok(TailIndexReport {
        group_names: prepared.iter().map(|g| g.name.clone()).collect(),
        beta_s: analytic_max(&alpha_hats),
        sample_counts: estimates.iter().map(|e| e.1).collect(),
        degenerate: prepared.iter().map(|g| g.degenerate).collect(),
        alpha_hats,
    })
}

/// Maximum over groups, ignoring frozen ones (NaN).
fn analytic_max(xs: &[f64]) -> f64 {
    xs.iter()
        .copied()
        .filter(|x| !x.is_nan())
        .fold(f64::NEG_INFINITY, f64::max)
}
