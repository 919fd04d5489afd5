//! Symmetric α-stable laws in one and several dimensions.
//!
//! A univariate SαS(σ) variable has characteristic function
//! `exp(-|σω|^α)`; for α = 2 this is `N(0, 2σ²)`. Two multivariate families
//! are provided:
//!
//! * elliptically contoured, chf `exp(-‖ω‖^α)`, sampled as `√A · G` with
//!   `G ~ N(0, 2I)` and `A` a positive (α/2)-stable subordinator;
//! * independent components, chf `exp(-Σ |ωᵢ|^{αᵢ})`.
//!
//! Densities have no closed form and are not provided. The chf is the testing
//! interface.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance from α = 1 below which the Cauchy branch is used.
const CAUCHY_BAND: f64 = 1e-8;

fn check_alpha(name: &'static str, alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("tail index must lie in (0, 2], got {alpha}"),
        ))
    }
}

/// Tail index and scale of a univariate SαS law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStableParams", into = "RawStableParams")]
pub struct StableParams {
    alpha: f64,
    sigma: f64,
}

#[derive(Serialize, Deserialize)]
struct RawStableParams {
    alpha: f64,
    sigma: f64,
}

impl From<StableParams> for RawStableParams {
    fn from(p: StableParams) -> Self {
        RawStableParams {
            alpha: p.alpha,
            sigma: p.sigma,
        }
    }
}

impl TryFrom<RawStableParams> for StableParams {
    type Error = Error;
    fn try_from(raw: RawStableParams) -> Result<Self> {
        StableParams::new(raw.alpha, raw.sigma)
    }
}

impl StableParams {
    pub fn new(alpha: f64, sigma: f64) -> Result<Self> {
        check_alpha("alpha", alpha)?;
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid("sigma", format!("scale must be positive, got {sigma}")));
        }
        Ok(Self { alpha, sigma })
    }

    /// Unit-scale law with tail index `alpha`.
    pub fn standard(alpha: f64) -> Result<Self> {
        Self::new(alpha, 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Which multivariate stable family drives a process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum StableKind {
    Elliptic { alpha: f64 },
    IndependentComponents { alphas: Vec<f64> },
}

/// A d-dimensional symmetric stable law with unit scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMultivariate", into = "RawMultivariate")]
pub struct MultivariateStableSpec {
    dim: usize,
    kind: StableKind,
}

#[derive(Serialize, Deserialize)]
struct RawMultivariate {
    dim: usize,
    #[serde(flatten)]
    kind: StableKind,
}

impl From<MultivariateStableSpec> for RawMultivariate {
    fn from(spec: MultivariateStableSpec) -> Self {
        RawMultivariate {
            dim: spec.dim,
            kind: spec.kind,
        }
    }
}

impl TryFrom<RawMultivariate> for MultivariateStableSpec {
    type Error = Error;
    fn try_from(raw: RawMultivariate) -> Result<Self> {
        MultivariateStableSpec::new(raw.dim, raw.kind)
    }
}

impl MultivariateStableSpec {
    pub fn new(dim: usize, kind: StableKind) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "dimension must be at least 1"));
        }
        match &kind {
            StableKind::Elliptic { alpha } => check_alpha("alpha", *alpha)?,
            StableKind::IndependentComponents { alphas } => {
                if alphas.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: alphas.len(),
                    });
                }
                for &a in alphas {
                    check_alpha("alphas", a)?;
                }
            }
        }
        Ok(Self { dim, kind })
    }

    pub fn elliptic(dim: usize, alpha: f64) -> Result<Self> {
        Self::new(dim, StableKind::Elliptic { alpha })
    }

    pub fn independent(alphas: Vec<f64>) -> Result<Self> {
        Self::new(alphas.len(), StableKind::IndependentComponents { alphas })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &StableKind {
        &self.kind
    }

    /// Tail index governing coordinate `i`.
    pub fn alpha_of(&self, i: usize) -> f64 {
        match &self.kind {
            StableKind::Elliptic { alpha } => *alpha,
            StableKind::IndependentComponents { alphas } => alphas[i],
        }
    }

    /// Per-coordinate tail indices.
    pub fn alphas(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.alpha_of(i)).collect()
    }
}

/// Draws one SαS(σ) variate by the Chambers–Mallows–Stuck transform.
pub fn sample_sas<R: Rng + ?Sized>(params: StableParams, rng: &mut R) -> f64 {
    let alpha = params.alpha;
    let u = PI * (rng.random::<f64>() - 0.5);
    if (alpha - 1.0).abs() < CAUCHY_BAND {
        return params.sigma * u.tan();
    }
    let w: f64 = Exp1.sample(rng);
    let head = (alpha * u).sin() / u.cos().powf(1.0 / alpha);
    let tail = (((1.0 - alpha) * u).cos() / w).powf((1.0 - alpha) / alpha);
    params.sigma * head * tail
}

/// Draws one totally skewed positive stable variate with index `alpha_half`.
///
/// Normalized by its Laplace transform `E[exp(-λA)] = exp(-λ^alpha_half)`,
/// which is the law `S(cos(π·alpha_half/2)^{1/alpha_half}, 1, 0)` in the
/// Samorodnitsky–Taqqu parameterization. Sampled with Kanter's representation.
pub fn sample_positive_stable<R: Rng + ?Sized>(alpha_half: f64, rng: &mut R) -> Result<f64> {
    if !(alpha_half > 0.0 && alpha_half < 1.0) {
        return Err(Error::invalid(
            "alpha_half",
            format!("subordinator index must lie in (0, 1), got {alpha_half}"),
        ));
    }
    Ok(positive_stable_unchecked(alpha_half, rng))
}

fn positive_stable_unchecked<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    loop {
        // U ∈ (0, π) open at both ends; W > 0.
        let u = PI * rng.random::<f64>();
        if u <= 0.0 {
            continue;
        }
        let w: f64 = Exp1.sample(rng);
        if w <= 0.0 {
            continue;
        }
        let draw = (a * u).sin() / u.sin().powf(1.0 / a) * (((1.0 - a) * u).sin() / w).powf((1.0 - a) / a);
        if draw > 0.0 && draw.is_finite() {
            return draw;
        }
    }
}

/// Fills `out` with one draw from `spec`.
pub fn sample_multivariate_into<R: Rng + ?Sized>(spec: &MultivariateStableSpec, rng: &mut R, out: &mut [f64]) {
    assert_eq!(out.len(), spec.dim, "output buffer has the wrong dimension");
    match &spec.kind {
        StableKind::Elliptic { alpha } => {
            let radial = if *alpha >= 2.0 {
                1.0
            } else {
                positive_stable_unchecked(alpha / 2.0, rng).sqrt()
            };
            for x in out.iter_mut() {
                let g: f64 = StandardNormal.sample(rng);
                *x = radial * std::f64::consts::SQRT_2 * g;
            }
        }
        StableKind::IndependentComponents { alphas } => {
            for (x, &a) in out.iter_mut().zip(alphas) {
                *x = sample_sas(StableParams { alpha: a, sigma: 1.0 }, rng);
            }
        }
    }
}

pub fn sample_multivariate<R: Rng + ?Sized>(spec: &MultivariateStableSpec, rng: &mut R) -> Vec<f64> {
    let mut out = vec![0.0; spec.dim];
    sample_multivariate_into(spec, rng, &mut out);
    out
}

/// Analytic characteristic function of a symmetric law (always real).
pub trait CharacteristicFunction {
    fn dim(&self) -> usize;

    fn chf(&self, omega: &[f64]) -> Result<f64>;
}

impl CharacteristicFunction for StableParams {
    fn dim(&self) -> usize {
        1
    }

    fn chf(&self, omega: &[f64]) -> Result<f64> {
        match omega {
            [w] => Ok((-(self.sigma * w).abs().powf(self.alpha)).exp()),
            _ => Err(Error::DimensionMismatch {
                expected: 1,
                got: omega.len(),
            }),
        }
    }
}

impl CharacteristicFunction for MultivariateStableSpec {
    fn dim(&self) -> usize {
        self.dim
    }

    fn chf(&self, omega: &[f64]) -> Result<f64> {
        if omega.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: omega.len(),
            });
        }
        let exponent = match &self.kind {
            StableKind::Elliptic { alpha } => {
                let norm = omega.iter().map(|w| w * w).sum::<f64>().sqrt();
                norm.powf(*alpha)
            }
            StableKind::IndependentComponents { alphas } => {
                omega.iter().zip(alphas).map(|(w, a)| w.abs().powf(*a)).sum()
            }
        };
        Ok((-exponent).exp())
    }
}

/// `(1/N) Σ cos⟨ω, xᵢ⟩` over row-major samples of dimension `omega.len()`.
pub fn empirical_chf(samples: &[f64], omega: &[f64]) -> f64 {
    let d = omega.len();
    assert!(d > 0 && samples.len().is_multiple_of(d));
    let n = samples.len() / d;
    let total: f64 = samples
        .chunks_exact(d)
        .map(|x| x.iter().zip(omega).map(|(a, b)| a * b).sum::<f64>().cos())
        .sum();
    total / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;

    fn draws(params: StableParams, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream(seed);
        (0..n).map(|_| sample_sas(params, &mut rng)).collect()
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(StableParams::new(0.0, 1.0).is_err());
        assert!(StableParams::new(2.1, 1.0).is_err());
        assert!(StableParams::new(1.5, 0.0).is_err());
        assert!(StableParams::new(f64::NAN, 1.0).is_err());
        assert!(MultivariateStableSpec::new(0, StableKind::Elliptic { alpha: 1.0 }).is_err());
        assert!(MultivariateStableSpec::new(3, StableKind::IndependentComponents { alphas: vec![1.0, 2.0] }).is_err());
        assert!(MultivariateStableSpec::independent(vec![1.0, 2.5]).is_err());
    }

    #[test]
    fn gaussian_case_has_variance_two_sigma_squared() {
        let x = draws(StableParams::new(2.0, 1.0).unwrap(), 100_000, 11);
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (x.len() - 1) as f64;
        assert!((1.9..=2.1).contains(&var), "variance {var}");
    }

    #[test]
    fn cauchy_median_is_zero() {
        let mut x = draws(StableParams::new(1.0, 1.0).unwrap(), 100_000, 12);
        x.sort_by(f64::total_cmp);
        let median = 0.5 * (x[49_999] + x[50_000]);
        assert!(median.abs() <= 0.05, "median {median}");
    }

    #[test]
    fn alpha_one_point_five_chf_at_one() {
        let x = draws(StableParams::new(1.5, 1.0).unwrap(), 100_000, 13);
        let est = empirical_chf(&x, &[1.0]);
        assert!((est - (-1.0f64).exp()).abs() < 0.03, "chf {est}");
    }

    #[test]
    fn positive_stable_rejects_out_of_range() {
        let mut rng = stream(0);
        for bad in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(sample_positive_stable(bad, &mut rng).is_err());
        }
    }

    /// Survival function of the positive ½-stable law, normalized to Laplace
    /// transform exp(-√λ): a Lévy law with c = ½ and density
    /// √(c/2π) x^{-3/2} exp(-c/(2x)). Evaluated by composite Simpson
    /// quadrature on the substitution x = 1/t², independent of any erf code.
    fn levy_half_survival_at_one() -> f64 {
        let c = 0.5;
        // P(X ≤ 1) = ∫_0^1 f(x) dx; with x = 1/t², dx = -2/t³ dt, t ∈ [1, ∞).
        // The integrand becomes 2·√(c/2π)·exp(-c t²/2), cut off at t = 40.
        let g = |t: f64| 2.0 * (c / (2.0 * PI)).sqrt() * (-c * t * t / 2.0).exp();
        let (a, b, n) = (1.0, 40.0, 20_000usize);
        let h = (b - a) / n as f64;
        let mut acc = g(a) + g(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * g(a + i as f64 * h);
        }
        1.0 - acc * h / 3.0
    }

    #[test]
    fn half_stable_tail_matches_quadrature() {
        let reference = levy_half_survival_at_one();
        assert!((reference - 0.5205).abs() < 1e-3, "oracle {reference}");
        let mut rng = stream(21);
        let n = 100_000;
        let above = (0..n)
            .filter(|_| sample_positive_stable(0.5, &mut rng).unwrap() > 1.0)
            .count();
        let p = above as f64 / n as f64;
        assert!((p - reference).abs() < 0.02, "empirical {p} vs {reference}");
    }

    #[test]
    fn smaller_index_has_heavier_upper_tail() {
        let q99 = |a: f64, seed: u64| {
            let mut rng = stream(seed);
            let mut x: Vec<f64> = (0..100_000)
                .map(|_| sample_positive_stable(a, &mut rng).unwrap())
                .collect();
            x.sort_by(f64::total_cmp);
            x[98_999]
        };
        assert!(q99(0.1, 3) > q99(0.9, 4));
    }

    #[test]
    fn elliptic_gaussian_coordinates_have_variance_two() {
        let spec = MultivariateStableSpec::elliptic(3, 2.0).unwrap();
        let mut rng = stream(5);
        let n = 100_000;
        let mut sums = [0.0; 3];
        let mut sq = [0.0; 3];
        for _ in 0..n {
            let x = sample_multivariate(&spec, &mut rng);
            for i in 0..3 {
                sums[i] += x[i];
                sq[i] += x[i] * x[i];
            }
        }
        for i in 0..3 {
            let mean = sums[i] / n as f64;
            let var = sq[i] / n as f64 - mean * mean;
            assert!((1.9..=2.1).contains(&var), "coordinate {i} variance {var}");
        }
    }

    #[test]
    fn independent_gaussian_coordinates_are_uncorrelated() {
        let spec = MultivariateStableSpec::independent(vec![2.0, 2.0]).unwrap();
        let mut rng = stream(6);
        let n = 100_000;
        let xs: Vec<Vec<f64>> = (0..n).map(|_| sample_multivariate(&spec, &mut rng)).collect();
        let a: Vec<f64> = xs.iter().map(|x| x[0]).collect();
        let b: Vec<f64> = xs.iter().map(|x| x[1]).collect();
        let rho = crate::stats::pearson(&a, &b);
        assert!(rho.abs() < 0.02, "correlation {rho}");
    }

    #[test]
    fn elliptic_one_point_five_chf() {
        let spec = MultivariateStableSpec::elliptic(2, 1.5).unwrap();
        let mut rng = stream(7);
        let flat: Vec<f64> = (0..100_000)
            .flat_map(|_| sample_multivariate(&spec, &mut rng))
            .collect();
        let est = empirical_chf(&flat, &[1.0, 0.0]);
        assert!((est - (-1.0f64).exp()).abs() < 0.03, "chf {est}");
    }

    #[test]
    fn analytic_chf_examples() {
        let e = |x: f64| (-x).exp();
        let uni = StableParams::new(2.0, 1.0).unwrap();
        assert!((uni.chf(&[1.0]).unwrap() - e(1.0)).abs() < 1e-15);
        let ell = MultivariateStableSpec::elliptic(2, 1.0).unwrap();
        assert!((ell.chf(&[3.0, 4.0]).unwrap() - e(5.0)).abs() < 1e-15);
        let ind = MultivariateStableSpec::independent(vec![1.0, 2.0]).unwrap();
        assert!((ind.chf(&[1.0, 1.0]).unwrap() - e(2.0)).abs() < 1e-15);
        assert!(ell.chf(&[1.0]).is_err());
        assert!(uni.chf(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn scaling_matches_in_law() {
        let base = draws(StableParams::new(1.3, 1.0).unwrap(), 100_000, 31);
        let scaled = draws(StableParams::new(1.3, 2.5).unwrap(), 100_000, 32);
        let stretched: Vec<f64> = base.iter().map(|x| 2.5 * x).collect();
        for w in [0.2, 0.5, 1.0] {
            let d = (empirical_chf(&stretched, &[w]) - empirical_chf(&scaled, &[w])).abs();
            assert!(d < 0.02, "ω={w}: {d}");
        }
    }

    proptest! {
        #[test]
        fn chf_is_symmetric_and_bounded(
            alpha in 0.05f64..=2.0,
            w in prop::collection::vec(-50.0f64..50.0, 3),
        ) {
            let ell = MultivariateStableSpec::elliptic(3, alpha).unwrap();
            let ind = MultivariateStableSpec::independent(vec![alpha, 2.0, 1.0]).unwrap();
            let neg: Vec<f64> = w.iter().map(|x| -x).collect();
            for spec in [&ell, &ind] {
                let v = spec.chf(&w).unwrap();
                prop_assert!((0.0..=1.0).contains(&v));
                prop_assert_eq!(v, spec.chf(&neg).unwrap());
                prop_assert_eq!(spec.chf(&[0.0; 3]).unwrap(), 1.0);
            }
        }

        #[test]
        fn positive_stable_draws_are_positive(a in 0.01f64..0.99, seed in any::<u64>()) {
            let mut rng = stream(seed);
            for _ in 0..64 {
                prop_assert!(sample_positive_stable(a, &mut rng).unwrap() > 0.0);
            }
        }
    }
}
