use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learning::{Dataset, Objective};
use crate::process_sim::trajectory::{Trajectory, TrajectoryMeta};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub eta: f64,
    pub batch: usize,
    pub epochs: usize,
}

impl SgdConfig {
    /// Iterations per epoch: `⌊n / batch⌋`, at least one.
    pub fn steps_per_epoch(&self, n: usize) -> usize {
        (n / self.batch).max(1)
    }
}

/// Draws minibatch indices uniformly without replacement.
///
/// Holds only the dataset size, so the draws cannot depend on data values.
#[derive(Debug, Clone, Copy)]
pub struct MinibatchSampler {
    n: usize,
    batch: usize,
}

impl MinibatchSampler {
    pub fn new(n: usize, batch: usize) -> Result<Self> {
        if batch == 0 || batch > n {
            return Err(Error::invalid("batch", format!("must lie in 1..={n}, got {batch}")));
        }
        Ok(Self { n, batch })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<usize>) {
        out.clear();
        if self.batch == self.n {
            out.extend(0..self.n);
        } else {
            out.extend(index::sample(rng, self.n, self.batch));
        }
    }
}

/// Runs `w_{k+1} = w_k − η·(1/B)Σ_{i∈batch_k} ∇ℓ(w_k, z_i)` and records every iterate.
pub fn run_sgd<O: Objective + ?Sized, R: Rng + ?Sized>(
    objective: &O,
    data: &Dataset,
    initial: &[f64],
    config: SgdConfig,
    seed: u64,
    rng: &mut R,
) -> Result<Trajectory> {
    run_sgd_observed(objective, data, initial, config, seed, rng, |_, _| {})
}

/// As [`run_sgd`], calling `observe(step, indices)` with each minibatch.
pub fn run_sgd_observed<O, R, F>(
    objective: &O,
    data: &Dataset,
    initial: &[f64],
    config: SgdConfig,
    seed: u64,
    rng: &mut R,
    mut observe: F,
) -> Result<Trajectory>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
    F: FnMut(usize, &[usize]),
{
    if !(config.eta.is_finite() && config.eta > 0.0) {
        return Err(Error::invalid("eta", format!("must be positive, got {}", config.eta)));
    }
    let p = objective.num_params();
    if initial.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: initial.len(),
        });
    }
    let sampler = MinibatchSampler::new(data.len(), config.batch)?;
    let steps = config.steps_per_epoch(data.len()) * config.epochs;
    let meta = TrajectoryMeta {
        eta: config.eta,
        horizon: steps as f64 * config.eta,
        seed,
    };
    let mut traj = Trajectory::start(initial, meta, steps + 1);
    let mut w = initial.to_vec();
    let mut grad = vec![0.0; p];
    let mut batch = Vec::with_capacity(config.batch);
    for k in 0..steps {
        sampler.draw(rng, &mut batch);
        observe(k, &batch);
        let loss = objective.batch_loss_and_grad(&w, data, &batch, &mut grad);
        if !loss.is_finite() {
            return Err(Error::NonFinite {
                step: k,
                what: format!("minibatch loss {loss}"),
            });
        }
        if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite {
                step: k,
                what: format!("gradient coordinate {i}"),
            });
        }
        for (wi, gi) in w.iter_mut().zip(&grad) {
            *wi -= config.eta * gi;
        }
        traj.push((k + 1) as f64 * config.eta, &w);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::{gen_mixture_dataset, LogisticLoss, Provenance, QuadraticLoss};
    use crate::rng::stream;

    fn points(n: usize, d: usize, seed: u64) -> Dataset {
        let mut rng = stream(seed);
        let feats: Vec<f64> = (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect();
        Dataset::new(
            feats,
            vec![1.0; n],
            d,
            Provenance {
                generator: "uniform".into(),
                seed,
            },
        )
        .unwrap()
    }

    #[test]
    fn full_batch_quadratic_converges_to_mean() {
        let data = points(50, 3, 1);
        let mean: Vec<f64> = (0..3)
            .map(|j| data.iter().map(|(x, _)| x[j]).sum::<f64>() / 50.0)
            .collect();
        let cfg = SgdConfig {
            eta: 0.1,
            batch: 50,
            epochs: 300,
        };
        let t = run_sgd(
            &QuadraticLoss { dim: 3 },
            &data,
            &[5.0, -5.0, 5.0],
            cfg,
            0,
            &mut stream(0),
        )
        .unwrap();
        for (a, b) in t.last().iter().zip(&mean) {
            assert!((a - b).abs() < 1e-10);
        }
        // Linear rate: error contracts by (1 − η) per step.
        let err = |k: usize| {
            t.point(k)
                .iter()
                .zip(&mean)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        assert!((err(11) / err(10) - 0.9).abs() < 1e-9);
    }

    #[test]
    fn zero_epochs_keeps_only_start() {
        let data = points(10, 2, 2);
        let cfg = SgdConfig {
            eta: 0.1,
            batch: 2,
            epochs: 0,
        };
        let t = run_sgd(&QuadraticLoss { dim: 2 }, &data, &[1.0, 2.0], cfg, 0, &mut stream(0)).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.point(0), &[1.0, 2.0]);
    }

    #[test]
    fn rejects_bad_config() {
        let data = points(10, 2, 2);
        let obj = QuadraticLoss { dim: 2 };
        let bad_batch = SgdConfig {
            eta: 0.1,
            batch: 11,
            epochs: 1,
        };
        assert!(run_sgd(&obj, &data, &[0.0; 2], bad_batch, 0, &mut stream(0)).is_err());
        let bad_eta = SgdConfig {
            eta: 0.0,
            batch: 1,
            epochs: 1,
        };
        assert!(run_sgd(&obj, &data, &[0.0; 2], bad_eta, 0, &mut stream(0)).is_err());
    }

    #[test]
    fn minibatch_gradient_is_unbiased() {
        let data = gen_mixture_dataset(3, 200, 0, &mut stream(8)).unwrap();
        let obj = LogisticLoss { dim: 3 };
        let w0 = [0.05, -0.02, 0.01];
        let all: Vec<usize> = (0..data.len()).collect();
        let mut full = vec![0.0; 3];
        obj.batch_loss_and_grad(&w0, &data, &all, &mut full);

        let sampler = MinibatchSampler::new(data.len(), 1).unwrap();
        let mut rng = stream(9);
        let reps = 10_000;
        let mut sum = [0.0; 3];
        let mut sq = [0.0; 3];
        let mut g = vec![0.0; 3];
        let mut idx = Vec::new();
        for _ in 0..reps {
            sampler.draw(&mut rng, &mut idx);
            obj.batch_loss_and_grad(&w0, &data, &idx, &mut g);
            for i in 0..3 {
                sum[i] += g[i];
                sq[i] += g[i] * g[i];
            }
        }
        for i in 0..3 {
            let m = sum[i] / reps as f64;
            let se = ((sq[i] / reps as f64 - m * m) / reps as f64).sqrt();
            assert!(
                (m - full[i]).abs() < 3.0 * se,
                "coord {i}: {m} vs {} (se {se})",
                full[i]
            );
        }
    }

    #[test]
    fn minibatch_indices_do_not_depend_on_data_values() {
        let a = points(64, 2, 1);
        let b = points(64, 2, 2);
        assert_ne!(a, b);
        let cfg = SgdConfig {
            eta: 0.01,
            batch: 8,
            epochs: 3,
        };
        let record = |data: &Dataset| {
            let mut seen = Vec::new();
            run_sgd_observed(
                &QuadraticLoss { dim: 2 },
                data,
                &[0.0; 2],
                cfg,
                0,
                &mut stream(77),
                |_, idx| seen.push(idx.to_vec()),
            )
            .unwrap();
            seen
        };
        let (ia, ib) = (record(&a), record(&b));
        assert_eq!(ia.len(), 24);
        assert_eq!(ia, ib);
        assert!(ia.iter().all(|batch| {
            let mut s = batch.clone();
            s.sort();
            s.dedup();
            s.len() == 8
        }));
    }
}
