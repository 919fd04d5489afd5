//! Fully connected ReLU network with a single logistic output.
//!
//! Parameters live in one flat vector. Layer `l` (mapping `widths[l]` inputs
//! to `widths[l+1]` outputs) contributes its row-major weight matrix followed
//! by its bias vector.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::learning::objective::{sigmoid, softplus_neg, Objective};
use crate::tail_index::GroupMap;

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    widths: Vec<usize>,
    offsets: Vec<usize>,
    num_params: usize,
}

impl Mlp {
    pub fn new(widths: Vec<usize>) -> Result<Self> {
        if widths.len() < 3 {
            return Err(Error::invalid(
                "widths",
                "need input, at least one hidden layer, and output",
            ));
        }
        if widths.contains(&0) {
            return Err(Error::invalid("widths", "layer widths must be positive"));
        }
        if *widths.last().unwrap() != 1 {
            return Err(Error::invalid("widths", "output layer must have width 1"));
        }
        let mut offsets = Vec::with_capacity(widths.len());
        let mut total = 0;
        for pair in widths.windows(2) {
            offsets.push(total);
            total += pair[0] * pair[1] + pair[1];
        }
        Ok(Self {
            widths,
            offsets,
            num_params: total,
        })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn num_layers(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    /// One group per layer holding its weights and biases together.
    pub fn group_map(&self) -> GroupMap {
        let mut assignment = Vec::with_capacity(self.num_params);
        for (l, pair) in self.widths.windows(2).enumerate() {
            assignment.extend(std::iter::repeat_n(l, pair[0] * pair[1] + pair[1]));
        }
        let names = (1..=self.num_layers()).map(|l| format!("layer{l}")).collect();
        GroupMap::new(names, assignment).expect("layer groups are well formed")
    }

    /// He-normal weights, zero biases.
    pub fn init_params<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut w = vec![0.0; self.num_params];
        for (l, pair) in self.widths.windows(2).enumerate() {
            let std = (2.0 / pair[0] as f64).sqrt();
            let start = self.offsets[l];
            for v in &mut w[start..start + pair[0] * pair[1]] {
                let z: f64 = StandardNormal.sample(rng);
                *v = std * z;
            }
        }
        w
    }

    fn layer<'a>(&self, params: &'a [f64], l: usize) -> (&'a [f64], &'a [f64]) {
        let (fan_in, fan_out) = (self.widths[l], self.widths[l + 1]);
        let start = self.offsets[l];
        let (weights, rest) = params[start..].split_at(fan_in * fan_out);
        (weights, &rest[..fan_out])
    }

    /// Pre-activations of every layer; the last entry holds the logit.
    fn forward(&self, params: &[f64], x: &[f64]) -> Vec<Vec<f64>> {
        let mut pre = Vec::with_capacity(self.num_layers());
        let mut input: Vec<f64> = x.to_vec();
        for l in 0..self.num_layers() {
            let (weights, bias) = self.layer(params, l);
            let fan_in = self.widths[l];
            let z: Vec<f64> = bias
                .iter()
                .enumerate()
                .map(|(j, b)| b + dot(&weights[j * fan_in..(j + 1) * fan_in], &input))
                .collect();
            input = z.iter().map(|v| v.max(0.0)).collect();
            pre.push(z);
        }
        pre
    }

    pub fn logit(&self, params: &[f64], x: &[f64]) -> f64 {
        self.forward(params, x).last().unwrap()[0]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Objective for Mlp {
    fn num_params(&self) -> usize {
        self.num_params
    }

    fn loss_and_grad(&self, w: &[f64], x: &[f64], y: f64, grad: Option<(&mut [f64], f64)>) -> f64 {
        debug_assert_eq!(x.len(), self.input_dim());
        let pre = self.forward(w, x);
        let logit = pre.last().unwrap()[0];
        let loss = softplus_neg(y * logit);
        let Some((g, scale)) = grad else {
            return loss;
        };

        let mut delta = vec![-y * sigmoid(-y * logit) * scale];
        for l in (0..self.num_layers()).rev() {
            let fan_in = self.widths[l];
            let (weights, _) = self.layer(w, l);
            let start = self.offsets[l];
            let input: Vec<f64> = if l == 0 {
                x.to_vec()
            } else {
                pre[l - 1].iter().map(|v| v.max(0.0)).collect()
            };
            let (gw, gb) = g[start..].split_at_mut(fan_in * delta.len());
            for (j, dj) in delta.iter().enumerate() {
                for (gwi, ai) in gw[j * fan_in..(j + 1) * fan_in].iter_mut().zip(&input) {
                    *gwi += dj * ai;
                }
                gb[j] += dj;
            }
            if l > 0 {
                delta = (0..fan_in)
                    .map(|i| {
                        if pre[l - 1][i] > 0.0 {
                            delta
                                .iter()
                                .enumerate()
                                .map(|(j, dj)| dj * weights[j * fan_in + i])
                                .sum()
                        } else {
                            0.0
                        }
                    })
                    .collect();
            }
        }
        loss
    }
}

/// Anything that produces a real-valued score whose sign is the predicted label.
pub trait Classifier {
    fn score(&self, w: &[f64], x: &[f64]) -> f64;
}

impl Classifier for Mlp {
    fn score(&self, w: &[f64], x: &[f64]) -> f64 {
        self.logit(w, x)
    }
}

impl Classifier for crate::learning::objective::LogisticLoss {
    fn score(&self, w: &[f64], x: &[f64]) -> f64 {
        dot(w, x)
    }
}

/// Fraction of examples whose label matches the sign of the score
/// (a zero score counts as `+1`).
pub fn accuracy<C: Classifier + ?Sized>(model: &C, w: &[f64], data: &crate::learning::Dataset) -> f64 {
    let hits = data
        .iter()
        .filter(|(x, y)| {
            let pred = if model.score(w, x) >= 0.0 { 1.0 } else { -1.0 };
            pred == *y
        })
        .count();
    hits as f64 / data.len() as f64
}
