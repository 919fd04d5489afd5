use std::io::{Read, Write};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a dataset was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub seed: u64,
}

/// Binary-labelled examples: `n` rows of `x ∈ ℝ^{d_x}` with `y ∈ {−1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<f64>,
    feature_dim: usize,
    provenance: Provenance,
}

impl Dataset {
    pub fn new(features: Vec<f64>, labels: Vec<f64>, feature_dim: usize, provenance: Provenance) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Empty("dataset has no examples"));
        }
        if feature_dim == 0 {
            return Err(Error::invalid("feature_dim", "must be at least 1"));
        }
        if features.len() != labels.len() * feature_dim {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * feature_dim,
                got: features.len(),
            });
        }
        if features.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("features", "all features must be finite"));
        }
        if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::invalid("labels", "labels must be -1 or +1"));
        }
        Ok(Self {
            features,
            labels,
            feature_dim,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.features[i * self.feature_dim..(i + 1) * self.feature_dim]
    }

    pub fn y(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.features
            .chunks_exact(self.feature_dim)
            .zip(self.labels.iter().copied())
    }

    /// Rows `indices` in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Empty("subset has no examples"));
        }
        let mut features = Vec::with_capacity(indices.len() * self.feature_dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::invalid("indices", format!("{i} out of range")));
            }
            features.extend_from_slice(self.x(i));
            labels.push(self.labels[i]);
        }
        Ok(Self {
            features,
            labels,
            feature_dim: self.feature_dim,
            provenance: self.provenance.clone(),
        })
    }

    /// CSV with header `x0,…,x{d-1},y`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (0..self.feature_dim).map(|i| format!("x{i}")).collect();
        header.push("y".into());
        w.write_record(&header)?;
        for (x, y) in self.iter() {
            let mut row: Vec<String> = x.iter().map(|v| v.to_string()).collect();
            row.push(y.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Columnar binary form: little-endian header `{d_x: u64, n: u64, seed: u64}`
    /// followed by `n` rows of `d_x + 1` f64 values (features, then label).
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&(self.feature_dim as u64).to_le_bytes())?;
        out.write_all(&(self.len() as u64).to_le_bytes())?;
        out.write_all(&self.provenance.seed.to_le_bytes())?;
        for (x, y) in self.iter() {
            for v in x {
                out.write_all(&v.to_le_bytes())?;
            }
            out.write_all(&y.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes)?;
        if bytes.len() < 24 {
            return Err(Error::Format("dataset header truncated".into()));
        }
        let word = |i: usize| u64::from_le_bytes(bytes[i * 8..(i + 1) * 8].try_into().unwrap());
        let (dx, n, seed) = (word(0) as usize, word(1) as usize, word(2));
        let row = dx + 1;
        if bytes.len() != 24 + n * row * 8 {
            return Err(Error::Format(format!(
                "expected {} payload bytes, found {}",
                n * row * 8,
                bytes.len() - 24
            )));
        }
        let values: Vec<f64> = bytes[24..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let mut features = Vec::with_capacity(n * dx);
        let mut labels = Vec::with_capacity(n);
        for r in values.chunks_exact(row) {
            features.extend_from_slice(&r[..dx]);
            labels.push(r[dx]);
        }
        Dataset::new(
            features,
            labels,
            dx,
            Provenance {
                generator: "binary".into(),
                seed,
            },
        )
    }
}

/// Two-component Gaussian mixture: `y ~ Bernoulli(½)` on `{−1, +1}`,
/// `x | y ~ N(m_y, 100·I)`, with class means drawn once from `N(0, 25·I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    pub mean_neg: Vec<f64>,
    pub mean_pos: Vec<f64>,
    pub noise_std: f64,
}

pub const MIXTURE_MEAN_STD: f64 = 5.0;
pub const MIXTURE_NOISE_STD: f64 = 10.0;

impl GaussianMixture {
    pub fn draw<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("d", "feature dimension must be at least 1"));
        }
        let mut mean = || -> Vec<f64> {
            (0..dim)
                .map(|_| MIXTURE_MEAN_STD * Distribution::<f64>::sample(&StandardNormal, rng))
                .collect()
        };
        let mean_neg = mean();
        let mean_pos = mean();
        Ok(Self {
            mean_neg,
            mean_pos,
            noise_std: MIXTURE_NOISE_STD,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean_pos.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, seed: u64, rng: &mut R) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::invalid("n", "sample size must be at least 1"));
        }
        let d = self.dim();
        let mut features = Vec::with_capacity(n * d);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let y = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let m = if y > 0.0 { &self.mean_pos } else { &self.mean_neg };
            for &mi in m {
                let z: f64 = StandardNormal.sample(rng);
                features.push(mi + self.noise_std * z);
            }
            labels.push(y);
        }
        Dataset::new(
            features,
            labels,
            d,
            Provenance {
                generator: format!("gaussian-mixture(d={d})"),
                seed,
            },
        )
    }
}

/// Draws fresh class means and `n` examples from the resulting mixture.
pub fn gen_mixture_dataset<R: Rng + ?Sized>(d: usize, n: usize, seed: u64, rng: &mut R) -> Result<Dataset> {
    GaussianMixture::draw(d, rng)?.sample(n, seed, rng)
}
