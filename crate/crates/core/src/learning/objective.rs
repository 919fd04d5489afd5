use crate::error::Result;
use crate::learning::dataset::Dataset;
use crate::process_sim::GradientField;

/// A per-example loss `ℓ(w, z)` with an exact gradient in `w`.
pub trait Objective: Send + Sync {
    fn num_params(&self) -> usize;

    /// Loss at one example; when `grad` is given, adds `scale · ∇_w ℓ` into it.
    fn loss_and_grad(&self, w: &[f64], x: &[f64], y: f64, grad: Option<(&mut [f64], f64)>) -> f64;

    fn loss(&self, w: &[f64], x: &[f64], y: f64) -> f64 {
        self.loss_and_grad(w, x, y, None)
    }

    /// Mean loss over `indices`, writing the mean gradient into `grad`.
    fn batch_loss_and_grad(&self, w: &[f64], data: &Dataset, indices: &[usize], grad: &mut [f64]) -> f64 {
        grad.fill(0.0);
        let scale = 1.0 / indices.len() as f64;
        let mut total = 0.0;
        for &i in indices {
            total += self.loss_and_grad(w, data.x(i), data.y(i), Some((&mut *grad, scale)));
        }
        total * scale
    }
}

/// `log(1 + e^{-m})` evaluated without overflow.
pub fn softplus_neg(m: f64) -> f64 {
    if m >= 0.0 {
        (-m).exp().ln_1p()
    } else {
        -m + m.exp().ln_1p()
    }
}

/// Logistic function `1/(1 + e^{-z})` evaluated without overflow.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Linear logistic regression, `ℓ(w, (x, y)) = log(1 + exp(−y xᵀw))`.
#[derive(Debug, Clone, Copy)]
pub struct LogisticLoss {
    pub dim: usize,
}

impl LogisticLoss {
    pub fn margin(w: &[f64], x: &[f64], y: f64) -> f64 {
        y * w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }
}

impl Objective for LogisticLoss {
    fn num_params(&self) -> usize {
        self.dim
    }

    fn loss_and_grad(&self, w: &[f64], x: &[f64], y: f64, grad: Option<(&mut [f64], f64)>) -> f64 {
        let m = Self::margin(w, x, y);
        if let Some((g, scale)) = grad {
            // ∇ℓ = −y·x·σ(−m)
            let c = -y * sigmoid(-m) * scale;
            for (gi, xi) in g.iter_mut().zip(x) {
                *gi += c * xi;
            }
        }
        softplus_neg(m)
    }
}

/// `ℓ(w, (x, ·)) = ½‖w − x‖²`; the label is ignored.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticLoss {
    pub dim: usize,
}

impl Objective for QuadraticLoss {
    fn num_params(&self) -> usize {
        self.dim
    }

    fn loss_and_grad(&self, w: &[f64], x: &[f64], _y: f64, grad: Option<(&mut [f64], f64)>) -> f64 {
        if let Some((g, scale)) = grad {
            for ((gi, wi), xi) in g.iter_mut().zip(w).zip(x) {
                *gi += scale * (wi - xi);
            }
        }
        0.5 * w.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
    }
}

/// Full-batch empirical risk of an objective, usable as an SDE drift.
pub struct EmpiricalRiskField<O> {
    pub objective: O,
    pub data: Dataset,
}

impl<O: Objective> GradientField for EmpiricalRiskField<O> {
    fn dim(&self) -> usize {
        self.objective.num_params()
    }

    fn gradient(&self, w: &[f64], out: &mut [f64]) -> Result<()> {
        let all: Vec<usize> = (0..self.data.len()).collect();
        self.objective.batch_loss_and_grad(w, &self.data, &all, out);
        Ok(())
    }
}
