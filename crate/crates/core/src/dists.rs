//! Positive-valued distributions used for ON times, OFF times and burst
//! sizes: exponential, Pareto (mean-parameterized), truncated power-tail
//! (TPT) and deterministic.
//!
//! The TPT law with parameters `(theta, T, lambda, mu)` is the mixture of
//! `T` exponentials with reliability
//!
//! ```text
//! R(x) = (1 - theta) / (1 - theta^T) * sum_{j<T} theta^j * exp(-mu x / lambda^j)
//! ```
//!
//! and the Pareto law with shape `alpha` and mean `M` has
//! `R(x) = (1 + x / (M (alpha - 1)))^(-alpha)`.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::rng::open_unit;

/// Truncated power-tail parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tpt {
    pub theta: f64,
    pub truncation: u32,
    /// Geometric growth of the branch means. [`tpt_calibrate`] sets it to
    /// `theta^(-1/alpha)`; any value above 1 is accepted.
    pub lambda: f64,
    pub mu: f64,
}

impl Tpt {
    /// Probability of mixture branch `j`.
    pub fn branch_weight(&self, j: u32) -> f64 {
        (1.0 - self.theta) * self.theta.powi(j as i32) / (1.0 - self.theta.powi(self.truncation as i32))
    }

    /// Mean of mixture branch `j`.
    pub fn branch_mean(&self, j: u32) -> f64 {
        self.lambda.powi(j as i32) / self.mu
    }

    /// Tail index implied by `theta` and `lambda` (`theta * lambda^alpha = 1`).
    pub fn alpha(&self) -> f64 {
        -self.theta.ln() / self.lambda.ln()
    }
}

/// A sampleable positive distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistRepr", into = "DistRepr")]
pub enum DistributionSpec {
    Exponential { mean: f64 },
    Pareto { alpha: f64, mean: f64 },
    Tpt(Tpt),
    /// A constant. Zero is accepted so that a never-idle source can carry
    /// an OFF law.
    Deterministic { value: f64 },
}

fn positive(name: &'static str, v: f64) -> Result<(), ModelError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ModelError::domain(name, format!("must be finite and > 0, got {v}")))
    }
}

impl DistributionSpec {
    pub fn exponential(mean: f64) -> Result<Self, ModelError> {
        let d = DistributionSpec::Exponential { mean };
        d.validate()?;
        Ok(d)
    }

    pub fn pareto(alpha: f64, mean: f64) -> Result<Self, ModelError> {
        let d = DistributionSpec::Pareto { alpha, mean };
        d.validate()?;
        Ok(d)
    }

    pub fn deterministic(value: f64) -> Result<Self, ModelError> {
        let d = DistributionSpec::Deterministic { value };
        d.validate()?;
        Ok(d)
    }

    /// Checks the parameter domain of the variant.
    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            DistributionSpec::Exponential { mean } => positive("mean", mean),
            DistributionSpec::Pareto { alpha, mean } => {
                positive("mean", mean)?;
                if !(alpha.is_finite() && alpha > 1.0) {
                    return Err(ModelError::domain("alpha", format!("must be > 1, got {alpha}")));
                }
                Ok(())
            }
            DistributionSpec::Tpt(t) => {
                if !(t.theta > 0.0 && t.theta < 1.0) {
                    return Err(ModelError::domain("theta", format!("must lie in (0,1), got {}", t.theta)));
                }
                if t.truncation < 1 {
                    return Err(ModelError::domain("T", "must be at least 1"));
                }
                if !(t.lambda.is_finite() && t.lambda > 1.0) {
                    return Err(ModelError::domain("lambda", format!("must be > 1, got {}", t.lambda)));
                }
                positive("mu", t.mu)
            }
            DistributionSpec::Deterministic { value } => {
                if value.is_finite() && value >= 0.0 {
                    Ok(())
                } else {
                    Err(ModelError::domain("value", format!("must be finite and >= 0, got {value}")))
                }
            }
        }
    }

    /// `Pr(X > x)`.
    pub fn reliability(&self, x: f64) -> Result<f64, ModelError> {
        self.validate()?;
        if !(x >= 0.0) {
            return Err(ModelError::domain("x", format!("must be >= 0, got {x}")));
        }
        Ok(self.reliability_unchecked(x))
    }

    pub(crate) fn reliability_unchecked(&self, x: f64) -> f64 {
        match *self {
            DistributionSpec::Exponential { mean } => (-x / mean).exp(),
            DistributionSpec::Pareto { alpha, mean } => (1.0 + x / (mean * (alpha - 1.0))).powf(-alpha),
            DistributionSpec::Tpt(_) if x == 0.0 => 1.0,
            DistributionSpec::Tpt(t) => (0..t.truncation)
                .map(|j| t.branch_weight(j) * (-x / t.branch_mean(j)).exp())
                .sum::<f64>()
                .min(1.0),
            DistributionSpec::Deterministic { value } => {
                if x < value {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Analytic mean.
    pub fn mean(&self) -> Result<f64, ModelError> {
        self.validate()?;
        Ok(self.mean_unchecked())
    }

    pub(crate) fn mean_unchecked(&self) -> f64 {
        match *self {
            DistributionSpec::Exponential { mean } | DistributionSpec::Pareto { mean, .. } => mean,
            DistributionSpec::Deterministic { value } => value,
            DistributionSpec::Tpt(t) => tpt_mean(t.theta, t.truncation, t.lambda, t.mu),
        }
    }

    /// Draws one value by inverse transform (two-stage for TPT).
    ///
    /// The spec must be valid. A TPT law with `T = 1` consumes exactly one
    /// uniform and reproduces the exponential sampler bit for bit.
    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DistributionSpec::Exponential { mean } => -mean * open_unit(rng).ln(),
            DistributionSpec::Pareto { alpha, mean } => {
                let u = open_unit(rng);
                mean * (alpha - 1.0) * (u.powf(-1.0 / alpha) - 1.0)
            }
            DistributionSpec::Tpt(t) => {
                let branch = if t.truncation == 1 {
                    0
                } else {
                    let u = open_unit(rng);
                    let tail = 1.0 - t.theta.powi(t.truncation as i32);
                    let j = ((1.0 - u * tail).ln() / t.theta.ln()).floor();
                    (j.max(0.0) as u32).min(t.truncation - 1)
                };
                let scale = t.lambda.powi(branch as i32) / t.mu;
                -scale * open_unit(rng).ln()
            }
            DistributionSpec::Deterministic { value } => value,
        }
    }

    /// The law of `c * X`.
    pub fn scaled(&self, c: f64) -> Self {
        match *self {
            DistributionSpec::Exponential { mean } => DistributionSpec::Exponential { mean: mean * c },
            DistributionSpec::Pareto { alpha, mean } => DistributionSpec::Pareto { alpha, mean: mean * c },
            DistributionSpec::Tpt(t) => DistributionSpec::Tpt(Tpt { mu: t.mu / c, ..t }),
            DistributionSpec::Deterministic { value } => DistributionSpec::Deterministic { value: value * c },
        }
    }

    /// `E[max(1, round(X))]`, the mean of the integer count obtained by
    /// discretizing a draw of this law.
    ///
    /// Uses `E[L] = 1 + sum_{l>=2} R(l - 1/2)`; the sum is closed form for
    /// exponential mixtures and summed with an integral tail for Pareto.
    pub fn discretized_mean(&self) -> Result<f64, ModelError> {
        self.validate()?;
        // sum_{l>=2} exp(-(l - 1/2)/s)
        let exp_sum = |s: f64| (-1.5 / s).exp() / -(-1.0 / s).exp_m1();
        Ok(match *self {
            DistributionSpec::Deterministic { value } => value.round().max(1.0),
            DistributionSpec::Exponential { mean } => 1.0 + exp_sum(mean),
            DistributionSpec::Tpt(t) => {
                1.0 + (0..t.truncation)
                    .map(|j| t.branch_weight(j) * exp_sum(t.branch_mean(j)))
                    .sum::<f64>()
            }
            DistributionSpec::Pareto { alpha, mean } => {
                const CUTOFF: u32 = 200_000;
                let s = mean * (alpha - 1.0);
                let head: f64 = (2..=CUTOFF)
                    .map(|l| self.reliability_unchecked(f64::from(l) - 0.5))
                    .sum();
                let tail = s / (alpha - 1.0) * (1.0 + f64::from(CUTOFF) / s).powf(1.0 - alpha);
                1.0 + head + tail
            }
        })
    }
}

fn tpt_mean(theta: f64, truncation: u32, lambda: f64, mu: f64) -> f64 {
    let norm = (1.0 - theta) / ((1.0 - theta.powi(truncation as i32)) * mu);
    let r = theta * lambda;
    if (r - 1.0).abs() < 1e-12 {
        f64::from(truncation) * norm
    } else {
        norm * (1.0 - r.powi(truncation as i32)) / (1.0 - r)
    }
}

/// Builds a TPT law whose untruncated tail decays as `x^(-alpha)`
/// (`lambda = theta^(-1/alpha)`) and whose mean equals `target_mean`.
pub fn tpt_calibrate(theta: f64, alpha: f64, target_mean: f64, truncation: u32) -> Result<DistributionSpec, ModelError> {
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(ModelError::domain("alpha", format!("must be > 1, got {alpha}")));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(ModelError::domain("theta", format!("must lie in (0,1), got {theta}")));
    }
    tpt_with_lambda(theta, theta.powf(-1.0 / alpha), target_mean, truncation)
}

/// Builds a TPT law with an explicit `lambda`, scaling `mu` to hit
/// `target_mean`.
pub fn tpt_with_lambda(theta: f64, lambda: f64, target_mean: f64, truncation: u32) -> Result<DistributionSpec, ModelError> {
    positive("mean", target_mean)?;
    let unit = Tpt {
        theta,
        truncation,
        lambda,
        mu: 1.0,
    };
    DistributionSpec::Tpt(unit).validate()?;
    let mu = tpt_mean(theta, truncation, lambda, 1.0) / target_mean;
    let spec = DistributionSpec::Tpt(Tpt { mu, ..unit });
    spec.validate()?;
    Ok(spec)
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum DistRepr {
    Exp {
        mean: f64,
    },
    Pareto {
        alpha: f64,
        mean: f64,
    },
    Tpt {
        theta: f64,
        alpha: f64,
        #[serde(rename = "T")]
        truncation: u32,
        mean: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
    },
    Det {
        value: f64,
    },
}

impl TryFrom<DistRepr> for DistributionSpec {
    type Error = ModelError;

    fn try_from(r: DistRepr) -> Result<Self, Self::Error> {
        match r {
            DistRepr::Exp { mean } => DistributionSpec::exponential(mean),
            DistRepr::Pareto { alpha, mean } => DistributionSpec::pareto(alpha, mean),
            DistRepr::Tpt {
                theta,
                alpha,
                truncation,
                mean,
                lambda: None,
            } => tpt_calibrate(theta, alpha, mean, truncation),
            DistRepr::Tpt {
                theta,
                truncation,
                mean,
                lambda: Some(lambda),
                ..
            } => tpt_with_lambda(theta, lambda, mean, truncation),
            DistRepr::Det { value } => DistributionSpec::deterministic(value),
        }
    }
}

impl From<DistributionSpec> for DistRepr {
    fn from(d: DistributionSpec) -> Self {
        match d {
            DistributionSpec::Exponential { mean } => DistRepr::Exp { mean },
            DistributionSpec::Pareto { alpha, mean } => DistRepr::Pareto { alpha, mean },
            DistributionSpec::Tpt(t) => DistRepr::Tpt {
                theta: t.theta,
                alpha: t.alpha(),
                truncation: t.truncation,
                mean: d.mean_unchecked(),
                lambda: Some(t.lambda),
            },
            DistributionSpec::Deterministic { value } => DistRepr::Det { value },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, StreamId};
    use proptest::prelude::*;

    fn pareto_1_4() -> DistributionSpec {
        DistributionSpec::pareto(1.4, 50.0).unwrap()
    }

    /// Inverse of the Pareto reliability, written out independently.
    fn pareto_quantile_oracle(alpha: f64, m: f64, r: f64) -> f64 {
        m * (alpha - 1.0) * (r.powf(-1.0 / alpha) - 1.0)
    }

    /// Composite Simpson integration of R over [0, upper] with the tail
    /// beyond `upper` assumed negligible.
    fn integrate_reliability(d: &DistributionSpec, upper: f64, steps: usize) -> f64 {
        let h = upper / steps as f64;
        let mut acc = d.reliability(0.0).unwrap() + d.reliability(upper).unwrap();
        for k in 1..steps {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * d.reliability(k as f64 * h).unwrap();
        }
        acc * h / 3.0
    }

    #[test]
    fn pareto_reliability_at_zero_is_one() {
        assert_eq!(pareto_1_4().reliability(0.0).unwrap(), 1.0);
    }

    #[test]
    fn tpt_single_branch_is_exponential() {
        let d = DistributionSpec::Tpt(Tpt {
            theta: 0.5,
            truncation: 1,
            lambda: 3.0,
            mu: 2.0,
        });
        let r = d.reliability(0.5).unwrap();
        assert!((r - (-1.0f64).exp()).abs() < 1e-15);
        assert!((r - 0.36788).abs() < 1e-5);
        assert_eq!(d.mean().unwrap(), 0.5);
    }

    #[test]
    fn pareto_median_matches_oracle() {
        let x = pareto_quantile_oracle(1.4, 50.0, 0.5);
        assert!((x - 12.8134).abs() < 1e-3, "oracle median {x}");
        let r = pareto_1_4().reliability(x).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pareto_mean_is_m() {
        assert_eq!(pareto_1_4().mean().unwrap(), 50.0);
        // E[X] = integral of R; the x^-0.4 tail converges slowly so only
        // check the closed-form antiderivative: s/(alpha-1) with s = M(alpha-1).
        let s = 50.0 * 0.4;
        assert!((s / 0.4 - 50.0f64).abs() < 1e-12);
    }

    #[test]
    fn tpt_mean_matches_quadrature() {
        let d = DistributionSpec::Tpt(Tpt {
            theta: 0.5,
            truncation: 3,
            lambda: 0.5f64.powf(-1.0 / 1.4),
            mu: 1.0,
        });
        // Largest branch mean is lambda^2 ~ 2.69; 120 units leaves e^-44 of tail.
        let oracle = integrate_reliability(&d, 120.0, 200_000);
        let closed = d.mean().unwrap();
        assert!((oracle - closed).abs() < 1e-9, "{oracle} vs {closed}");
        assert!((closed - 1.424_735).abs() < 1e-5, "{closed}");
    }

    #[test]
    fn tpt_mean_handles_unit_ratio() {
        let d = DistributionSpec::Tpt(Tpt {
            theta: 0.5,
            truncation: 4,
            lambda: 2.0,
            mu: 1.0,
        });
        let oracle = integrate_reliability(&d, 400.0, 400_000);
        let closed = d.mean().unwrap();
        assert!((closed - 4.0 * 0.5 / (1.0 - 0.0625)).abs() < 1e-12);
        assert!((oracle - closed).abs() < 1e-8);
    }

    #[test]
    fn exponential_inverse_cdf() {
        // u = 0.5 -> -2 ln 0.5
        let x = -2.0 * 0.5f64.ln();
        assert!((x - 1.386_29).abs() < 1e-5);
        let d = DistributionSpec::exponential(2.0).unwrap();
        assert!((d.reliability(x).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn calibrate_single_branch() {
        let d = tpt_calibrate(0.5, 1.4, 1.0, 1).unwrap();
        let DistributionSpec::Tpt(t) = d else { panic!() };
        assert!((t.mu - 1.0).abs() < 1e-15);
        assert!((t.lambda - 1.640_67).abs() < 1e-5);
        assert!((t.theta * t.lambda.powf(1.4) - 1.0).abs() < 1e-12);
        let DistributionSpec::Tpt(t) = tpt_calibrate(0.5, 1.4, 0.5, 1).unwrap() else { panic!() };
        assert!((t.mu - 2.0).abs() < 1e-15);
    }

    #[test]
    fn calibrate_hits_target_mean() {
        for (mean, trunc) in [(1.0, 30), (50.0, 30), (0.25, 10), (1e4, 60)] {
            let d = tpt_calibrate(0.5, 1.4, mean, trunc).unwrap();
            let got = d.mean().unwrap();
            assert!(((got - mean) / mean).abs() < 1e-12, "{mean} {trunc}: {got}");
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(DistributionSpec::pareto(1.0, 5.0).is_err());
        assert!(DistributionSpec::exponential(0.0).is_err());
        assert!(DistributionSpec::exponential(f64::NAN).is_err());
        assert!(tpt_calibrate(1.0, 1.4, 1.0, 3).is_err());
        assert!(tpt_calibrate(0.5, 1.4, 1.0, 0).is_err());
        assert!(tpt_with_lambda(0.5, 1.0, 1.0, 3).is_err());
        assert!(pareto_1_4().reliability(-1.0).is_err());
        assert!(DistributionSpec::deterministic(0.0).is_ok());
    }

    #[test]
    fn tpt_one_branch_sampler_is_bitwise_exponential() {
        let mu = 3.7;
        let tpt = DistributionSpec::Tpt(Tpt {
            theta: 0.5,
            truncation: 1,
            lambda: 1.64,
            mu,
        });
        let exp = DistributionSpec::exponential(1.0 / mu).unwrap();
        let mut a = stream(11, 0, StreamId::Source(0));
        let mut b = stream(11, 0, StreamId::Source(0));
        for _ in 0..10_000 {
            assert_eq!(tpt.sample(&mut a).to_bits(), exp.sample(&mut b).to_bits());
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = tpt_calibrate(0.5, 1.4, 3.0, 20).unwrap();
        let run = |seed| {
            let mut s = stream(seed, 0, StreamId::Source(1));
            (0..1000).map(|_| d.sample(&mut s).to_bits()).collect::<Vec<_>>()
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5), run(6));
    }

    #[test]
    fn empirical_means() {
        let n = 1_000_000;
        let mut s = stream(2024, 0, StreamId::Source(0));
        for d in [
            DistributionSpec::exponential(2.0).unwrap(),
            tpt_calibrate(0.5, 1.4, 1.0, 10).unwrap(),
        ] {
            let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut s)).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (var / n as f64).sqrt();
            let target = d.mean().unwrap();
            assert!((mean - target).abs() < 3.0 * se, "{d:?}: {mean} vs {target} (se {se})");
        }
        let d = pareto_1_4();
        let mean = (0..n).map(|_| d.sample(&mut s)).sum::<f64>() / n as f64;
        assert!((mean / 50.0 - 1.0).abs() < 0.05, "pareto mean {mean}");
    }

    #[test]
    fn discretized_mean_matches_brute_force() {
        for d in [
            DistributionSpec::exponential(50.0).unwrap(),
            tpt_calibrate(0.5, 1.4, 20.0, 5).unwrap(),
            DistributionSpec::exponential(0.7).unwrap(),
        ] {
            // brute force: sum l * P(L = l) with P(L = 1) = 1 - R(1.5), P(L = l) = R(l - .5) - R(l + .5)
            let mut acc = 1.0 - d.reliability(1.5).unwrap();
            for l in 2..2_000_000u32 {
                let l = f64::from(l);
                acc += l * (d.reliability(l - 0.5).unwrap() - d.reliability(l + 0.5).unwrap());
            }
            let closed = d.discretized_mean().unwrap();
            assert!((acc - closed).abs() < 1e-6 * closed, "{d:?}: {acc} vs {closed}");
        }
        assert_eq!(DistributionSpec::deterministic(5.0).unwrap().discretized_mean().unwrap(), 5.0);
        assert_eq!(DistributionSpec::deterministic(0.2).unwrap().discretized_mean().unwrap(), 1.0);
        let p = pareto_1_4().discretized_mean().unwrap();
        assert!((p / 50.0 - 1.0).abs() < 0.01, "{p}");
    }

    #[test]
    fn json_forms() {
        let d: DistributionSpec = serde_json::from_str(r#"{"kind":"pareto","alpha":1.4,"mean":50}"#).unwrap();
        assert_eq!(d, pareto_1_4());
        let d: DistributionSpec = serde_json::from_str(r#"{"kind":"tpt","theta":0.5,"alpha":1.4,"T":30,"mean":1}"#).unwrap();
        assert!((d.mean().unwrap() - 1.0).abs() < 1e-12);
        let back: DistributionSpec = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert!((back.mean().unwrap() - 1.0).abs() < 1e-12);
        let d: DistributionSpec = serde_json::from_str(r#"{"kind":"exp","mean":2}"#).unwrap();
        assert_eq!(d, DistributionSpec::Exponential { mean: 2.0 });
        let d: DistributionSpec = serde_json::from_str(r#"{"kind":"det","value":3}"#).unwrap();
        assert_eq!(d, DistributionSpec::Deterministic { value: 3.0 });
        assert!(serde_json::from_str::<DistributionSpec>(r#"{"kind":"pareto","alpha":0.9,"mean":50}"#).is_err());
        assert!(serde_json::from_str::<DistributionSpec>(r#"{"kind":"exp","mean":2,"x":1}"#).is_err());
    }

    fn any_spec() -> impl Strategy<Value = DistributionSpec> {
        prop_oneof![
            (0.01f64..100.0).prop_map(|m| DistributionSpec::Exponential { mean: m }),
            (1.05f64..4.0, 0.01f64..100.0).prop_map(|(a, m)| DistributionSpec::Pareto { alpha: a, mean: m }),
            (0.05f64..0.95, 1.1f64..4.0, 0.01f64..100.0, 1u32..40)
                .prop_map(|(th, a, m, t)| tpt_calibrate(th, a, m, t).unwrap()),
            (0.0f64..100.0).prop_map(|v| DistributionSpec::Deterministic { value: v }),
        ]
    }

    proptest! {
        #[test]
        fn reliability_is_nonincreasing(d in any_spec(), x1 in 0.0f64..1e4, dx in 0.0f64..1e4) {
            let r0 = d.reliability(0.0).unwrap();
            let r1 = d.reliability(x1).unwrap();
            let r2 = d.reliability(x1 + dx).unwrap();
            if !matches!(d, DistributionSpec::Deterministic { value } if value == 0.0) {
                prop_assert_eq!(r0, 1.0);
            }
            prop_assert!(r2 <= r1 + 1e-15);
            prop_assert!((0.0..=1.0).contains(&r1));
        }

        #[test]
        fn samples_are_nonnegative_and_finite(d in any_spec(), seed in any::<u64>()) {
            let mut s = stream(seed, 0, StreamId::Source(0));
            for _ in 0..64 {
                let x = d.sample(&mut s);
                prop_assert!(x.is_finite() && x >= 0.0);
            }
        }
    }
}
