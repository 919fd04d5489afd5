//! Euler–Maruyama for SDEs driven by Brownian and α-stable noise:
//!
//! ```text
//! w_{k+1} = w_k − h·Σ₀(w_k)∇f(w_k) + √h·Σ₁(w_k)ξ_gauss + h^{1/α}·Σ₂(w_k)ξ_stable
//! ```
//!
//! with `h^{1/αᵢ}` applied per coordinate of `ξ_stable` when the driving law
//! has independent components. Tail indices are state-independent.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::process_sim::levy::grid;
use crate::process_sim::trajectory::{Trajectory, TrajectoryMeta};
use crate::stable_dist::{sample_multivariate_into, MultivariateStableSpec};

pub const DEFAULT_DIVERGENCE_CAP: f64 = 1e12;

/// A gradient field `∇f(w)`.
pub trait GradientField: Send + Sync {
    fn dim(&self) -> usize;

    fn gradient(&self, w: &[f64], out: &mut [f64]) -> Result<()>;
}

/// `f(w) = ½‖w − c‖²`.
#[derive(Debug, Clone)]
pub struct QuadraticBowl {
    pub center: Vec<f64>,
}

impl GradientField for QuadraticBowl {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn gradient(&self, w: &[f64], out: &mut [f64]) -> Result<()> {
        for ((o, x), c) in out.iter_mut().zip(w).zip(&self.center) {
            *o = x - c;
        }
        Ok(())
    }
}

/// State-dependent d×d matrix, written row-major into the output buffer.
pub type MatrixField = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// A d×d matrix-valued coefficient `Σ(w)`.
#[derive(Clone)]
pub enum Coefficient {
    Zero,
    Scalar(f64),
    Diagonal(Vec<f64>),
    /// Constant row-major matrix.
    Dense(Vec<f64>),
    StateDependent(MatrixField),
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Zero => write!(f, "Zero"),
            Coefficient::Scalar(s) => write!(f, "Scalar({s})"),
            Coefficient::Diagonal(d) => f.debug_tuple("Diagonal").field(d).finish(),
            Coefficient::Dense(m) => f.debug_tuple("Dense").field(m).finish(),
            Coefficient::StateDependent(_) => write!(f, "StateDependent(..)"),
        }
    }
}

impl Coefficient {
    pub fn identity() -> Self {
        Coefficient::Scalar(1.0)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Coefficient::Zero)
    }

    fn check(&self, dim: usize) -> Result<()> {
        let expect = |got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(Error::DimensionMismatch { expected: want, got })
            }
        };
        match self {
            Coefficient::Scalar(s) if !s.is_finite() => Err(Error::invalid("coefficient", "scalar must be finite")),
            Coefficient::Diagonal(v) => expect(v.len(), dim),
            Coefficient::Dense(m) => expect(m.len(), dim * dim),
            _ => Ok(()),
        }
    }

    /// `out = Σ(w) v`.
    fn apply(&self, w: &[f64], v: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) {
        let d = v.len();
        match self {
            Coefficient::Zero => out.fill(0.0),
            Coefficient::Scalar(s) => {
                for (o, x) in out.iter_mut().zip(v) {
                    *o = s * x;
                }
            }
            Coefficient::Diagonal(diag) => {
                for ((o, x), s) in out.iter_mut().zip(v).zip(diag) {
                    *o = s * x;
                }
            }
            Coefficient::Dense(m) => mat_vec(m, v, out),
            Coefficient::StateDependent(field) => {
                scratch.resize(d * d, 0.0);
                field(w, scratch);
                mat_vec(scratch, v, out);
            }
        }
    }
}

fn mat_vec(m: &[f64], v: &[f64], out: &mut [f64]) {
    let d = v.len();
    for (i, o) in out.iter_mut().enumerate() {
        *o = m[i * d..(i + 1) * d].iter().zip(v).map(|(a, b)| a * b).sum();
    }
}

/// Drift term `b(w)`.
#[derive(Clone)]
pub enum Drift {
    Zero,
    /// `b(w) = −Σ₀(w)∇f(w)`.
    NegGradient {
        field: Arc<dyn GradientField>,
        precondition: Coefficient,
    },
}

impl fmt::Debug for Drift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Drift::Zero => write!(f, "Zero"),
            Drift::NegGradient { precondition, .. } => f
                .debug_struct("NegGradient")
                .field("precondition", precondition)
                .finish_non_exhaustive(),
        }
    }
}

impl Drift {
    pub fn gradient_of(field: impl GradientField + 'static) -> Self {
        Drift::NegGradient {
            field: Arc::new(field),
            precondition: Coefficient::identity(),
        }
    }
}

/// Coefficients and driving law of the simulated SDE.
#[derive(Debug, Clone)]
pub struct DrivingSpec {
    drift: Drift,
    gaussian: Coefficient,
    stable: Coefficient,
    stable_law: MultivariateStableSpec,
}

impl DrivingSpec {
    pub fn new(
        drift: Drift,
        gaussian: Coefficient,
        stable: Coefficient,
        stable_law: MultivariateStableSpec,
    ) -> Result<Self> {
        let d = stable_law.dim();
        if let Drift::NegGradient { field, precondition } = &drift {
            if field.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: field.dim(),
                });
            }
            precondition.check(d)?;
        }
        gaussian.check(d)?;
        stable.check(d)?;
        Ok(Self {
            drift,
            gaussian,
            stable,
            stable_law,
        })
    }

    pub fn dim(&self) -> usize {
        self.stable_law.dim()
    }

    pub fn stable_law(&self) -> &MultivariateStableSpec {
        &self.stable_law
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SdeOptions {
    /// Simulation stops, flagged as truncated, once any |coordinate| exceeds this.
    pub divergence_cap: f64,
}

impl Default for SdeOptions {
    fn default() -> Self {
        Self {
            divergence_cap: DEFAULT_DIVERGENCE_CAP,
        }
    }
}

pub fn simulate_sde<R: Rng + ?Sized>(
    driving: &DrivingSpec,
    initial: &[f64],
    horizon: f64,
    step: f64,
    seed: u64,
    options: SdeOptions,
    rng: &mut R,
) -> Result<Trajectory> {
    let d = driving.dim();
    if initial.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: initial.len(),
        });
    }
    if initial.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            step: 0,
            what: "initial point".into(),
        });
    }
    let (n, h) = grid(horizon, step)?;
    let sqrt_h = h.sqrt();
    let stable_scales: Vec<f64> = driving.stable_law.alphas().iter().map(|a| h.powf(1.0 / a)).collect();

    let meta = TrajectoryMeta { eta: h, horizon, seed };
    let mut traj = Trajectory::start(initial, meta, n + 1);
    let mut w = initial.to_vec();
    let mut next = vec![0.0; d];
    let mut noise = vec![0.0; d];
    let mut mapped = vec![0.0; d];
    let mut grad = vec![0.0; d];
    let mut scratch = Vec::new();

    for k in 1..=n {
        next.copy_from_slice(&w);

        if let Drift::NegGradient { field, precondition } = &driving.drift {
            field.gradient(&w, &mut grad)?;
            if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
                return Err(Error::NonFinite {
                    step: k,
                    what: format!("gradient coordinate {i}"),
                });
            }
            precondition.apply(&w, &grad, &mut mapped, &mut scratch);
            for (x, g) in next.iter_mut().zip(&mapped) {
                *x -= h * g;
            }
        }

        if !driving.gaussian.is_zero() {
            for z in noise.iter_mut() {
                *z = StandardNormal.sample(rng);
            }
            driving.gaussian.apply(&w, &noise, &mut mapped, &mut scratch);
            for (x, g) in next.iter_mut().zip(&mapped) {
                *x += sqrt_h * g;
            }
        }

        if !driving.stable.is_zero() {
            sample_multivariate_into(&driving.stable_law, rng, &mut noise);
            for (z, s) in noise.iter_mut().zip(&stable_scales) {
                *z *= s;
            }
            driving.stable.apply(&w, &noise, &mut mapped, &mut scratch);
            for (x, g) in next.iter_mut().zip(&mapped) {
                *x += g;
            }
        }

        if next.iter().any(|x| x.is_nan() || x.abs() > options.divergence_cap) {
            log::warn!("SDE diverged at step {k}; returning truncated trajectory");
            traj.mark_truncated();
            return Ok(traj);
        }
        std::mem::swap(&mut w, &mut next);
        let t = if k == n { horizon } else { k as f64 * h };
        traj.push(t, &w);
    }
    Ok(traj)
}
