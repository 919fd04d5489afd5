//! Box-counting (Minkowski) dimension of point sets and trajectory images.
//!
//! Hausdorff dimension is not computable from a finite sample. Under
//! Ahlfors-type regularity of the image the Minkowski dimension coincides
//! with it, so the box-counting slope serves as the estimate.
//!
//! Meshes are half-open cubes anchored at the origin,
//! `[j₁δ, (j₁+1)δ) × … × [j_dδ, (j_d+1)δ)`. A coordinate is assigned to cell
//! `floor(x / δ)` evaluated in floating point, so a value with `x / δ == j`
//! exactly belongs to cell `j`. Scales are `δ_k = δ₀·2^{−k}` with `δ₀` the
//! largest coordinate extent of the set; division by a power of two is exact,
//! so successive meshes are nested.

use std::collections::HashSet;
use std::io::Write;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process_sim::Trajectory;

/// Number of δ-mesh cells containing at least one of the row-major `points`.
pub fn box_count(points: &[f64], dim: usize, delta: f64) -> Result<usize> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::invalid("delta", format!("must be positive, got {delta}")));
    }
    if dim == 0 || !points.len().is_multiple_of(dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: points.len(),
        });
    }
    if points.is_empty() {
        return Err(Error::Empty("no points to count"));
    }
    if points.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("points", "all coordinates must be finite"));
    }
    Ok(count_cells(points, dim, delta))
}

fn count_cells(points: &[f64], dim: usize, delta: f64) -> usize {
    let mut cells: HashSet<Box<[i64]>> = HashSet::with_capacity(points.len() / dim);
    for p in points.chunks_exact(dim) {
        let cell: Box<[i64]> = p.iter().map(|x| (x / delta).floor() as i64).collect();
        cells.insert(cell);
    }
    cells.len()
}

/// Which scales enter the least-squares fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "policy")]
pub enum FitWindow {
    /// Keep scales with `min_count ≤ count ≤ max_fraction · |points|`;
    /// at least `min_scales` must remain.
    Counts {
        min_count: usize,
        max_fraction: f64,
        min_scales: usize,
    },
    /// Keep scale indices `k` in the range.
    Scales { range: Range<usize> },
}

impl Default for FitWindow {
    fn default() -> Self {
        FitWindow::Counts {
            min_count: 100,
            max_fraction: 0.1,
            min_scales: 4,
        }
    }
}

impl FitWindow {
    fn select(&self, counts: &[usize], total: usize) -> Result<Vec<bool>> {
        match self {
            FitWindow::Counts {
                min_count,
                max_fraction,
                min_scales,
            } => {
                let cap = max_fraction * total as f64;
                let mask: Vec<bool> = counts.iter().map(|&c| c >= *min_count && c as f64 <= cap).collect();
                let usable = mask.iter().filter(|&&m| m).count();
                if usable < (*min_scales).max(2) {
                    return Err(Error::InsufficientScales {
                        usable,
                        required: (*min_scales).max(2),
                    });
                }
                Ok(mask)
            }
            FitWindow::Scales { range } => {
                let mask: Vec<bool> = (0..counts.len()).map(|k| range.contains(&k)).collect();
                let usable = mask.iter().filter(|&&m| m).count();
                if usable < 2 {
                    return Err(Error::InsufficientScales { usable, required: 2 });
                }
                Ok(mask)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    /// Fitted slope clipped into `[0, d]`.
    pub slope: f64,
    pub raw_slope: f64,
    pub r_squared: f64,
    pub scales: Vec<f64>,
    pub counts: Vec<usize>,
    /// Scales that entered the fit.
    pub fitted: Vec<bool>,
    /// All points coincide; the slope is 0 and no fit was made.
    pub degenerate: bool,
}

impl DimensionEstimate {
    /// CSV rows `delta,count,log_delta,log_count,fitted`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["delta", "count", "log_delta", "log_count", "fitted"])?;
        for ((d, c), f) in self.scales.iter().zip(&self.counts).zip(&self.fitted) {
            w.write_record([
                d.to_string(),
                c.to_string(),
                d.ln().to_string(),
                (*c as f64).ln().to_string(),
                f.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Box-counting dimension of the image of `traj`.
pub fn estimate_dimension(traj: &Trajectory, scale_count: usize, window: &FitWindow) -> Result<DimensionEstimate> {
    estimate_point_dimension(traj.points(), traj.dim(), scale_count, window)
}

pub fn estimate_point_dimension(
    points: &[f64],
    dim: usize,
    scale_count: usize,
    window: &FitWindow,
) -> Result<DimensionEstimate> {
    if scale_count < 2 {
        return Err(Error::invalid("scale_count", "need at least two scales"));
    }
    // Validates the input once.
    box_count(points, dim, 1.0)?;
    let n = points.len() / dim;
    let extent = (0..dim)
        .map(|i| {
            let (lo, hi) = points
                .iter()
                .skip(i)
                .step_by(dim)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                    (lo.min(x), hi.max(x))
                });
            hi - lo
        })
        .fold(0.0, f64::max);
    if extent == 0.0 {
        return Ok(DimensionEstimate {
            slope: 0.0,
            raw_slope: 0.0,
            r_squared: 0.0,
            scales: Vec::new(),
            counts: Vec::new(),
            fitted: Vec::new(),
            degenerate: true,
        });
    }

    let scales: Vec<f64> = (0..scale_count).map(|k| extent * (-(k as f64)).exp2()).collect();
    let counts: Vec<usize> = scales
        .par_iter()
        .map(|&delta| count_cells(points, dim, delta))
        .collect();
    let fitted = window.select(&counts, n)?;

    let (xs, ys): (Vec<f64>, Vec<f64>) = scales
        .iter()
        .zip(&counts)
        .zip(&fitted)
        .filter(|(_, &f)| f)
        .map(|((d, c), _)| ((1.0 / d).ln(), (*c as f64).ln()))
        .unzip();
    let (raw_slope, r_squared) = least_squares_slope(&xs, &ys);
    Ok(DimensionEstimate {
        slope: raw_slope.clamp(0.0, dim as f64),
        raw_slope,
        r_squared,
        scales,
        counts,
        fitted,
        degenerate: false,
    })
}

/// Ordinary least-squares slope and coefficient of determination.
fn least_squares_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    (slope, r2)
}

/// Upper Blumenthal–Getoor index of a frozen-coefficient stable model with
/// per-group tail indices: the largest of them.
pub fn analytic_bg_index(alphas: &[f64]) -> Result<f64> {
    if alphas.is_empty() {
        return Err(Error::Empty("no tail indices given"));
    }
    for &a in alphas {
        if !(a > 0.0 && a <= 2.0) {
            return Err(Error::invalid("alphas", format!("tail index {a} outside (0, 2]")));
        }
    }
    Ok(alphas.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}
