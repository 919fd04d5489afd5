//! Plug-in calculators for dimension-dependent generalization bounds.
//!
//! * `theorem1_bound`: `B·√( 2·d_H·log(nL²)/n + log(1/γ)/n )`
//! * `theorem2_bound`: `2B·√( (d_H+1)·log²(nL²)/n + log(7M/γ)/n )`
//! * `chaining_bound`: `c·L·B·diam·√( d_H·ρ(n)/n + log(1/γ)/n )`, with the
//!   unspecified absolute constant `c` set to 1.
//!
//! The bounds hold only for `n` beyond a threshold that is not known a
//! priori; a warning is logged for `n < 100`. For unbounded losses such as
//! the logistic loss, `B` is the largest observed loss, and the sub-Gaussian
//! constant takes its place in a rigorous statement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sample sizes below this trigger a "sufficiently large n" warning.
pub const SMALL_N_WARNING: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub loss_bound: f64,
    pub lipschitz: f64,
    pub n: usize,
    /// Failure probability, in `(0, 1]`.
    pub gamma: f64,
    pub d_h: f64,
    #[serde(default)]
    pub coupling_m: Option<f64>,
    #[serde(default)]
    pub diameter: Option<f64>,
    /// `ρ(n)` evaluated at `n`.
    #[serde(default)]
    pub rho_n: Option<f64>,
    #[serde(default)]
    pub ambient_dim: Option<usize>,
}

impl BoundInputs {
    pub fn new(loss_bound: f64, lipschitz: f64, n: usize, gamma: f64, d_h: f64) -> Self {
        Self {
            loss_bound,
            lipschitz,
            n,
            gamma,
            d_h,
            coupling_m: None,
            diameter: None,
            rho_n: None,
            ambient_dim: None,
        }
    }

    pub fn with_coupling(mut self, m: f64) -> Self {
        self.coupling_m = Some(m);
        self
    }

    pub fn with_chaining(mut self, diameter: f64, rho_n: f64) -> Self {
        self.diameter = Some(diameter);
        self.rho_n = Some(rho_n);
        self
    }

    pub fn validate(&self) -> Result<()> {
        positive("loss_bound", self.loss_bound)?;
        positive("lipschitz", self.lipschitz)?;
        if self.n < 2 {
            return Err(Error::invalid("n", format!("must be at least 2, got {}", self.n)));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::invalid(
                "gamma",
                format!("must lie in (0, 1], got {}", self.gamma),
            ));
        }
        if !(self.d_h.is_finite() && self.d_h >= 0.0) {
            return Err(Error::invalid("d_h", format!("must be non-negative, got {}", self.d_h)));
        }
        if let Some(d) = self.ambient_dim {
            if self.d_h > d as f64 {
                return Err(Error::invalid(
                    "d_h",
                    format!("{} exceeds ambient dimension {d}", self.d_h),
                ));
            }
        }
        if let Some(m) = self.coupling_m {
            if !(m.is_finite() && m >= 1.0) {
                return Err(Error::invalid("coupling_m", format!("must be at least 1, got {m}")));
            }
        }
        if let Some(d) = self.diameter {
            positive("diameter", d)?;
        }
        if let Some(r) = self.rho_n {
            positive("rho_n", r)?;
        }
        Ok(())
    }

    fn log_n_l2(&self) -> Result<f64> {
        let v = self.n as f64 * self.lipschitz * self.lipschitz;
        if v <= 1.0 {
            return Err(Error::invalid("n", format!("n·L² = {v} must exceed 1")));
        }
        Ok(v.ln())
    }

    fn warn_small_n(&self) {
        if self.n < SMALL_N_WARNING {
            log::warn!(
                "n = {} may be below the unknown threshold where the bound applies",
                self.n
            );
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive, got {v}")))
    }
}

pub fn theorem1_bound(inputs: &BoundInputs) -> Result<f64> {
    inputs.validate()?;
    let log_nl2 = inputs.log_n_l2()?;
    inputs.warn_small_n();
    let n = inputs.n as f64;
    let radicand = 2.0 * inputs.d_h * log_nl2 / n + (1.0 / inputs.gamma).ln() / n;
    Ok(inputs.loss_bound * radicand.sqrt())
}

pub fn theorem2_bound(inputs: &BoundInputs) -> Result<f64> {
    inputs.validate()?;
    let m = inputs
        .coupling_m
        .ok_or_else(|| Error::invalid("coupling_m", "required for this bound"))?;
    let log_nl2 = inputs.log_n_l2()?;
    inputs.warn_small_n();
    let n = inputs.n as f64;
    let radicand = (inputs.d_h + 1.0) * log_nl2 * log_nl2 / n + (7.0 * m / inputs.gamma).ln() / n;
    Ok(2.0 * inputs.loss_bound * radicand.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainingBound {
    /// Value with the absolute constant `c` taken as 1.
    pub value: f64,
    /// Always true: the true bound is `c · value` for an unknown `c`.
    pub up_to_constant: bool,
}

pub fn chaining_bound(inputs: &BoundInputs) -> Result<ChainingBound> {
    inputs.validate()?;
    let diameter = inputs
        .diameter
        .ok_or_else(|| Error::invalid("diameter", "required for the chaining bound"))?;
    let rho_n = inputs
        .rho_n
        .ok_or_else(|| Error::invalid("rho_n", "required for the chaining bound"))?;
    inputs.warn_small_n();
    let n = inputs.n as f64;
    let radicand = inputs.d_h * rho_n / n + (1.0 / inputs.gamma).ln() / n;
    Ok(ChainingBound {
        value: inputs.lipschitz * inputs.loss_bound * diameter * radicand.sqrt(),
        up_to_constant: true,
    })
}

/// Common choices of the increasing function `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rho {
    Log,
    LogLog,
}

impl Rho {
    pub fn eval(self, n: usize) -> f64 {
        match self {
            Rho::Log => (n as f64).ln(),
            Rho::LogLog => (n as f64).ln().ln(),
        }
    }
}
