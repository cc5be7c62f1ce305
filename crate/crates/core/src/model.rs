//! Source and sink parameters together with the closed-form results of the
//! N-Burst model: burstiness, the smooth (`b = 0`) and bulk (`b = 1`)
//! limiting mean packet delays, and the blow-up point locations.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dists::{tpt_calibrate, DistributionSpec};
use crate::error::ModelError;
use crate::rng::open_unit;

/// Default TPT geometric factor and tail index used by the ON-time laws.
pub const DEFAULT_THETA: f64 = 0.5;
pub const DEFAULT_ALPHA: f64 = 1.4;

/// Family of the ON-time (equivalently, burst-size) law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OnKind {
    Exp,
    Pareto {
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    Tpt {
        #[serde(rename = "T")]
        truncation: u32,
        #[serde(default = "default_theta")]
        theta: f64,
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
}

/// Family of the OFF-time law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OffKind {
    Exp,
    Pareto {
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_theta() -> f64 {
    DEFAULT_THETA
}

impl OnKind {
    pub fn pareto() -> Self {
        OnKind::Pareto { alpha: DEFAULT_ALPHA }
    }

    pub fn tpt(truncation: u32) -> Self {
        OnKind::Tpt {
            truncation,
            theta: DEFAULT_THETA,
            alpha: DEFAULT_ALPHA,
        }
    }

    /// Short label used in CSV rows and file names.
    pub fn label(&self) -> &'static str {
        match self {
            OnKind::Exp => "exp",
            OnKind::Pareto { .. } => "pareto",
            OnKind::Tpt { .. } => "tpt",
        }
    }

    /// Truncation level, with exponential counted as `T = 1` and Pareto as 0.
    pub fn truncation(&self) -> u32 {
        match self {
            OnKind::Exp => 1,
            OnKind::Pareto { .. } => 0,
            OnKind::Tpt { truncation, .. } => *truncation,
        }
    }

    fn build(&self, mean: f64) -> Result<DistributionSpec, ModelError> {
        match *self {
            OnKind::Exp => DistributionSpec::exponential(mean),
            OnKind::Pareto { alpha } => DistributionSpec::pareto(alpha, mean),
            OnKind::Tpt { truncation, theta, alpha } => tpt_calibrate(theta, alpha, mean, truncation),
        }
    }
}

impl OffKind {
    pub fn pareto() -> Self {
        OffKind::Pareto { alpha: DEFAULT_ALPHA }
    }

    pub fn label(&self) -> &'static str {
        match self {
            OffKind::Exp => "exp",
            OffKind::Pareto { .. } => "pareto",
        }
    }

    fn build(&self, mean: f64) -> Result<DistributionSpec, ModelError> {
        if mean == 0.0 {
            return DistributionSpec::deterministic(0.0);
        }
        match *self {
            OffKind::Exp => DistributionSpec::exponential(mean),
            OffKind::Pareto { alpha } => DistributionSpec::pareto(alpha, mean),
        }
    }
}

/// How packets of a burst are spaced in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmissionMode {
    /// Exactly `1/lambda_p` apart.
    #[default]
    #[serde(alias = "constant")]
    ConstantPeakRate,
    /// Exponential gaps with rate `lambda_p`.
    #[serde(alias = "poisson")]
    PoissonAtPeakRate,
}

/// One ON/OFF source.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceParams {
    /// Mean packet rate (packets/s).
    pub k: f64,
    /// Peak rate during a burst (packets/s).
    pub lambda_p: f64,
    /// Mean packets per burst.
    pub n_p: f64,
    pub b: f64,
    /// Mean ON time (s).
    pub on_mean: f64,
    /// Mean OFF time (s).
    pub off_mean: f64,
    pub on_dist: DistributionSpec,
    pub off_dist: DistributionSpec,
    pub emission_mode: EmissionMode,
}

impl SourceParams {
    pub fn with_emission_mode(mut self, mode: EmissionMode) -> Self {
        self.emission_mode = mode;
        self
    }

    /// Burst-size law: ON time scaled by the peak rate. Exponential ON
    /// times map to the geometric law with mean `n_p`.
    pub fn burst_law(&self) -> Result<BulkSizeLaw, ModelError> {
        match self.on_dist {
            DistributionSpec::Exponential { .. } => BulkSizeLaw::geometric(self.n_p),
            other => BulkSizeLaw::discretized(other.scaled(self.lambda_p)),
        }
    }

    /// Checks the relations tying `k`, `lambda_p`, `n_p`, `b` and the means.
    pub fn check_invariants(&self) -> Result<(), ModelError> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
        let checks = [
            ("b", close(self.b, 1.0 - self.k / self.lambda_p)),
            ("on_mean", close(self.on_mean, self.n_p / self.lambda_p)),
            ("off_mean", close(self.off_mean, self.on_mean * self.b / (1.0 - self.b))),
            ("k", close(self.k, self.n_p / (self.on_mean + self.off_mean))),
            ("on_dist", close(self.on_dist.mean()?, self.on_mean)),
            ("off_dist", close(self.off_dist.mean()?, self.off_mean)),
        ];
        match checks.iter().find(|(_, ok)| !ok) {
            Some((name, _)) => Err(ModelError::domain(name, "inconsistent with the other source parameters")),
            None => Ok(()),
        }
    }
}

/// Per-source parameters for `n` sources sharing `lambda_total`.
pub fn derive_source_params(
    lambda_total: f64,
    n: u32,
    n_p: f64,
    b: f64,
    on_kind: OnKind,
    off_kind: OffKind,
) -> Result<SourceParams, ModelError> {
    if !(lambda_total.is_finite() && lambda_total > 0.0) {
        return Err(ModelError::domain("lambda_total", format!("must be > 0, got {lambda_total}")));
    }
    if n < 1 {
        return Err(ModelError::domain("N", "need at least one source"));
    }
    if !(n_p.is_finite() && n_p >= 1.0) {
        return Err(ModelError::domain("n_p", format!("must be >= 1, got {n_p}")));
    }
    if !(0.0..1.0).contains(&b) {
        return Err(ModelError::domain("b", format!("must lie in [0,1), got {b}")));
    }
    let k = lambda_total / f64::from(n);
    let lambda_p = k / (1.0 - b);
    if !lambda_p.is_finite() {
        return Err(ModelError::domain("b", "peak rate not representable"));
    }
    let on_mean = n_p / lambda_p;
    let off_mean = on_mean * b / (1.0 - b);
    Ok(SourceParams {
        k,
        lambda_p,
        n_p,
        b,
        on_mean,
        off_mean,
        on_dist: on_kind.build(on_mean)?,
        off_dist: off_kind.build(off_mean)?,
        emission_mode: EmissionMode::default(),
    })
}

/// Service-side parameters of a queueing node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkParams {
    pub v: f64,
    pub rho: f64,
    pub threshold: u64,
}

impl SinkParams {
    pub fn new(v: f64, rho: f64, threshold: u64) -> Result<Self, ModelError> {
        if !(v.is_finite() && v > 0.0) {
            return Err(ModelError::domain("v", format!("must be > 0, got {v}")));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(ModelError::Unstable { rho });
        }
        if threshold < 1 {
            return Err(ModelError::domain("B", "must be at least 1"));
        }
        Ok(SinkParams { v, rho, threshold })
    }

    pub fn arrival_rate(&self) -> f64 {
        self.rho * self.v
    }
}

/// Law of the number of packets in a burst.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BulkSizeLaw {
    /// Geometric on `{1, 2, ...}` with success probability `1/mean`.
    Geometric { mean: f64 },
    /// `max(1, round(X))` for a continuous (or constant) draw `X`.
    DiscretizedContinuous { dist: DistributionSpec },
}

impl BulkSizeLaw {
    pub fn geometric(mean: f64) -> Result<Self, ModelError> {
        if !(mean.is_finite() && mean >= 1.0) {
            return Err(ModelError::domain("n_p", format!("geometric mean must be >= 1, got {mean}")));
        }
        Ok(BulkSizeLaw::Geometric { mean })
    }

    /// Wraps a continuous law, requiring the discretized mean to stay within
    /// 1% of the continuous one.
    pub fn discretized(dist: DistributionSpec) -> Result<Self, ModelError> {
        let target = dist.mean()?;
        let got = dist.discretized_mean()?;
        if (got - target).abs() > 0.01 * target {
            return Err(ModelError::domain(
                "burst size",
                format!("discretized mean {got:.4} differs from {target:.4} by more than 1%"),
            ));
        }
        Ok(BulkSizeLaw::DiscretizedContinuous { dist })
    }

    /// Exact mean of the integer law.
    pub fn mean(&self) -> Result<f64, ModelError> {
        match self {
            BulkSizeLaw::Geometric { mean } => Ok(*mean),
            BulkSizeLaw::DiscretizedContinuous { dist } => dist.discretized_mean(),
        }
    }

    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            BulkSizeLaw::Geometric { mean } => {
                if *mean <= 1.0 {
                    return 1;
                }
                let q = 1.0 - 1.0 / mean;
                1 + (open_unit(rng).ln() / q.ln()).floor() as u64
            }
            BulkSizeLaw::DiscretizedContinuous { dist } => dist.sample(rng).round().max(1.0) as u64,
        }
    }
}

/// Burstiness `b = 1 - K / lambda_p`.
pub fn burstiness(k: f64, lambda_p: f64) -> Result<f64, ModelError> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(ModelError::domain("K", format!("must be > 0, got {k}")));
    }
    if !(lambda_p >= k) {
        return Err(ModelError::domain("lambda_p", format!("peak rate {lambda_p} below mean rate {k}")));
    }
    Ok(1.0 - k / lambda_p)
}

/// Burstiness values at which `i` sources at peak rate plus `N - i` at
/// mean rate exactly saturate the server, for `i = 1..=N` (descending).
pub fn blowup_points(n: u32, rho: f64) -> Result<Vec<f64>, ModelError> {
    if n < 1 {
        return Err(ModelError::domain("N", "need at least one source"));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(ModelError::domain("rho", format!("must lie in (0,1), got {rho}")));
    }
    let nf = f64::from(n);
    Ok((1..=n)
        .map(|i| {
            if i == n {
                1.0 - rho
            } else {
                nf * (1.0 - rho) / (nf - rho * f64::from(n - i))
            }
        })
        .collect())
}

/// M/M/1 mean sojourn time `(1/v)/(1 - rho)`.
pub fn mpd_smooth_limit(v: f64, rho: f64) -> Result<f64, ModelError> {
    if !(v.is_finite() && v > 0.0) {
        return Err(ModelError::domain("v", format!("must be > 0, got {v}")));
    }
    if rho >= 1.0 {
        return Err(ModelError::Unstable { rho });
    }
    if !(rho > 0.0) {
        return Err(ModelError::domain("rho", format!("must be > 0, got {rho}")));
    }
    Ok((1.0 / v) / (1.0 - rho))
}

/// Bulk factor `D = E[L(L+1)/2] / E[L]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BulkFactor {
    pub value: f64,
    /// Zero for closed-form laws.
    pub std_error: f64,
    /// Set when the burst-size law has infinite variance, so the Monte
    /// Carlo estimate does not settle.
    pub unstable: bool,
}

const BULK_FACTOR_DRAWS: usize = 1_000_000;
const BULK_FACTOR_SEED: u64 = 0x5eed_b0b5;

pub fn bulk_factor(law: &BulkSizeLaw) -> Result<BulkFactor, ModelError> {
    let exact = |value| BulkFactor {
        value,
        std_error: 0.0,
        unstable: false,
    };
    match *law {
        // E[L(L+1)/2] = m^2 for the geometric law with mean m.
        BulkSizeLaw::Geometric { mean } => Ok(exact(mean)),
        BulkSizeLaw::DiscretizedContinuous { dist } => {
            dist.validate()?;
            if let DistributionSpec::Deterministic { value } = dist {
                let l = value.round().max(1.0);
                return Ok(exact((l + 1.0) / 2.0));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(BULK_FACTOR_SEED);
            let n = BULK_FACTOR_DRAWS as f64;
            let (mut s1, mut s2, mut s11, mut s22, mut s12) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for _ in 0..BULK_FACTOR_DRAWS {
                let l = law.sample(&mut rng) as f64;
                let tri = l * (l + 1.0) / 2.0;
                s1 += tri;
                s2 += l;
                s11 += tri * tri;
                s22 += l * l;
                s12 += tri * l;
            }
            let (m1, m2) = (s1 / n, s2 / n);
            let value = m1 / m2;
            // Delta method for a ratio of means.
            let v11 = s11 / n - m1 * m1;
            let v22 = s22 / n - m2 * m2;
            let v12 = s12 / n - m1 * m2;
            let var = (v11 - 2.0 * value * v12 + value * value * v22) / (m2 * m2 * n);
            let unstable = matches!(dist, DistributionSpec::Pareto { alpha, .. } if alpha <= 2.0);
            if unstable {
                log::warn!("bulk factor for {dist:?} has infinite variance; estimate {value:.3} is unreliable");
            }
            Ok(BulkFactor {
                value,
                std_error: var.max(0.0).sqrt(),
                unstable,
            })
        }
    }
}

/// Bulk-arrival limit `D (1/v)/(1 - rho)`.
pub fn mpd_bulk_limit(v: f64, rho: f64, law: &BulkSizeLaw) -> Result<f64, ModelError> {
    let smooth = mpd_smooth_limit(v, rho)?;
    Ok(bulk_factor(law)?.value * smooth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, StreamId};
    use proptest::prelude::*;

    /// Brute-force D for the geometric law on {1, 2, ...} with mean m.
    fn geometric_d_oracle(m: f64) -> f64 {
        let p = 1.0 / m;
        let (mut num, mut den, mut tail) = (0.0, 0.0, 1.0);
        let mut l = 1.0f64;
        while tail > 1e-12 {
            let pl = p * (1.0 - p).powf(l - 1.0);
            num += l * (l + 1.0) / 2.0 * pl;
            den += l * pl;
            tail -= pl;
            l += 1.0;
        }
        num / den
    }

    #[test]
    fn derive_single_source() {
        let s = derive_source_params(50.0, 1, 50.0, 0.5, OnKind::Exp, OffKind::Exp).unwrap();
        assert_eq!(s.k, 50.0);
        assert_eq!(s.lambda_p, 100.0);
        assert!((s.on_mean - 0.5).abs() < 1e-15);
        assert!((s.off_mean - 0.5).abs() < 1e-15);
        assert!((s.n_p / (s.on_mean + s.off_mean) - 50.0).abs() < 1e-12);
        s.check_invariants().unwrap();
    }

    #[test]
    fn derive_five_sources() {
        let s = derive_source_params(50.0, 5, 50.0, 0.9, OnKind::pareto(), OffKind::Exp).unwrap();
        assert_eq!(s.k, 10.0);
        assert!((s.lambda_p - 100.0).abs() < 1e-9);
        s.check_invariants().unwrap();
    }

    #[test]
    fn derive_smooth_boundary() {
        let s = derive_source_params(50.0, 1, 50.0, 0.0, OnKind::Exp, OffKind::Exp).unwrap();
        assert_eq!(s.lambda_p, 50.0);
        assert_eq!(s.off_mean, 0.0);
        assert_eq!(s.off_dist, DistributionSpec::Deterministic { value: 0.0 });
        s.check_invariants().unwrap();
    }

    #[test]
    fn derive_rejects_bad_inputs() {
        assert!(derive_source_params(50.0, 1, 50.0, 1.0, OnKind::Exp, OffKind::Exp).is_err());
        assert!(derive_source_params(50.0, 0, 50.0, 0.5, OnKind::Exp, OffKind::Exp).is_err());
        assert!(derive_source_params(0.0, 1, 50.0, 0.5, OnKind::Exp, OffKind::Exp).is_err());
        assert!(derive_source_params(50.0, 1, 0.5, 0.5, OnKind::Exp, OffKind::Exp).is_err());
        assert!(derive_source_params(50.0, 1, 50.0, 1.0 - 1e-300, OnKind::Exp, OffKind::Exp).is_err());
    }

    #[test]
    fn burstiness_values() {
        assert_eq!(burstiness(10.0, 20.0).unwrap(), 0.5);
        assert_eq!(burstiness(50.0, 50.0).unwrap(), 0.0);
        assert!((burstiness(10.0, 200.0).unwrap() - 0.95).abs() < 1e-15);
        assert!(burstiness(20.0, 10.0).is_err());
    }

    #[test]
    fn blowup_tables() {
        assert_eq!(blowup_points(1, 0.5).unwrap(), vec![0.5]);
        let two = blowup_points(2, 0.5).unwrap();
        assert!((two[0] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(two[1], 0.5);
        let ten = blowup_points(10, 0.5).unwrap();
        assert!((ten[0] - 10.0 / 11.0).abs() < 1e-15);
        assert!((ten[0] - 0.909_091).abs() < 1e-6);
        assert!(blowup_points(0, 0.5).is_err());
        assert!(blowup_points(3, 1.0).is_err());
    }

    #[test]
    fn blowup_matches_saturation_condition() {
        // Independent route: solve v = i*lambda_p + (N-i)*k for b with k = rho*v/N.
        let (n, rho, v) = (7u32, 0.35, 100.0);
        let k = rho * v / f64::from(n);
        for (idx, b) in blowup_points(n, rho).unwrap().into_iter().enumerate() {
            let i = idx as f64 + 1.0;
            let lambda_p = (v - (f64::from(n) - i) * k) / i;
            assert!((b - (1.0 - k / lambda_p)).abs() < 1e-12);
        }
    }

    #[test]
    fn smooth_limits() {
        assert!((mpd_smooth_limit(100.0, 0.5).unwrap() - 0.02).abs() < 1e-15);
        assert!((mpd_smooth_limit(20.0, 0.5).unwrap() - 0.1).abs() < 1e-15);
        assert!((mpd_smooth_limit(100.0, 0.9).unwrap() - 0.1).abs() < 1e-12);
        assert!(matches!(mpd_smooth_limit(100.0, 1.0), Err(ModelError::Unstable { .. })));
    }

    #[test]
    fn geometric_bulk_factor_matches_brute_force() {
        for m in [1.0, 2.0, 20.0, 50.0] {
            let closed = bulk_factor(&BulkSizeLaw::geometric(m).unwrap()).unwrap();
            let oracle = geometric_d_oracle(m);
            assert!((closed.value - oracle).abs() < 1e-6 * m, "{m}: {} vs {oracle}", closed.value);
        }
        assert!((geometric_d_oracle(20.0) - 20.0).abs() < 1e-6);
    }

    #[test]
    fn deterministic_bulk_factor() {
        let one = BulkSizeLaw::discretized(DistributionSpec::deterministic(1.0).unwrap()).unwrap();
        assert_eq!(bulk_factor(&one).unwrap().value, 1.0);
        let five = BulkSizeLaw::discretized(DistributionSpec::deterministic(5.0).unwrap()).unwrap();
        assert_eq!(bulk_factor(&five).unwrap().value, 3.0);
    }

    #[test]
    fn monte_carlo_bulk_factor_for_exponential_sizes() {
        // Discretized exponential with mean 20 is close to geometric(20):
        // D for the oracle pmf computed by direct summation.
        let dist = DistributionSpec::exponential(20.0).unwrap();
        let law = BulkSizeLaw::discretized(dist).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for l in 1..20_000u32 {
            let l = f64::from(l);
            let lo = if l == 1.0 { 0.0 } else { l - 0.5 };
            let p = dist.reliability(lo).unwrap() - dist.reliability(l + 0.5).unwrap();
            num += l * (l + 1.0) / 2.0 * p;
            den += l * p;
        }
        let est = bulk_factor(&law).unwrap();
        assert!(!est.unstable);
        assert!((est.value - num / den).abs() < 4.0 * est.std_error, "{est:?} vs {}", num / den);
        let pareto = BulkSizeLaw::discretized(DistributionSpec::pareto(1.4, 50.0).unwrap()).unwrap();
        assert!(bulk_factor(&pareto).unwrap().unstable);
    }

    #[test]
    fn bulk_limits() {
        let g20 = BulkSizeLaw::geometric(20.0).unwrap();
        assert!((mpd_bulk_limit(20.0, 0.5, &g20).unwrap() - 2.0).abs() < 1e-12);
        let det1 = BulkSizeLaw::discretized(DistributionSpec::deterministic(1.0).unwrap()).unwrap();
        assert!((mpd_bulk_limit(100.0, 0.5, &det1).unwrap() - 0.02).abs() < 1e-15);
        let g50 = BulkSizeLaw::geometric(50.0).unwrap();
        assert!((mpd_bulk_limit(100.0, 0.5, &g50).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn burst_law_means() {
        let s = derive_source_params(50.0, 1, 50.0, 0.7, OnKind::tpt(30), OffKind::Exp).unwrap();
        let law = s.burst_law().unwrap();
        assert!((law.mean().unwrap() / 50.0 - 1.0).abs() < 0.01);
        let s = derive_source_params(50.0, 1, 50.0, 0.7, OnKind::Exp, OffKind::Exp).unwrap();
        assert_eq!(s.burst_law().unwrap(), BulkSizeLaw::Geometric { mean: 50.0 });
    }

    #[test]
    fn geometric_sampler_mean() {
        let law = BulkSizeLaw::geometric(20.0).unwrap();
        let mut s = stream(3, 0, StreamId::Source(0));
        let n = 400_000;
        let xs: Vec<f64> = (0..n).map(|_| law.sample(&mut s) as f64).collect();
        assert!(xs.iter().all(|&x| x >= 1.0));
        let mean = xs.iter().sum::<f64>() / n as f64;
        // sd of geometric(20) = sqrt(20 * 19)
        let se = (20.0f64 * 19.0).sqrt() / (n as f64).sqrt();
        assert!((mean - 20.0).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn on_kind_json() {
        let k: OnKind = serde_json::from_str(r#"{"kind":"tpt","T":30}"#).unwrap();
        assert_eq!(k, OnKind::tpt(30));
        let k: OnKind = serde_json::from_str(r#"{"kind":"pareto"}"#).unwrap();
        assert_eq!(k, OnKind::pareto());
        let m: EmissionMode = serde_json::from_str(r#""poisson""#).unwrap();
        assert_eq!(m, EmissionMode::PoissonAtPeakRate);
    }

    proptest! {
        #[test]
        fn blowup_structure(n in 1u32..40, rho in 0.01f64..0.99) {
            let pts = blowup_points(n, rho).unwrap();
            prop_assert_eq!(pts.len(), n as usize);
            prop_assert_eq!(*pts.last().unwrap(), 1.0 - rho);
            for w in pts.windows(2) {
                prop_assert!(w[0] > w[1]);
            }
            prop_assert!(pts.iter().all(|&b| b > 0.0 && b < 1.0));
        }

        #[test]
        fn derive_round_trips_burstiness(
            lambda in 1.0f64..500.0, n in 1u32..20, n_p in 1.0f64..200.0, b in 0.0f64..0.99
        ) {
            let s = derive_source_params(lambda, n, n_p, b, OnKind::Exp, OffKind::Exp).unwrap();
            prop_assert!((burstiness(s.k, s.lambda_p).unwrap() - b).abs() < 1e-12);
            prop_assert!(s.check_invariants().is_ok());
        }

        #[test]
        fn bulk_limit_dominates_smooth(v in 1.0f64..1000.0, rho in 0.01f64..0.99, m in 1.0f64..200.0) {
            let law = BulkSizeLaw::geometric(m).unwrap();
            prop_assert!(mpd_bulk_limit(v, rho, &law).unwrap() >= mpd_smooth_limit(v, rho).unwrap());
        }
    }
}
