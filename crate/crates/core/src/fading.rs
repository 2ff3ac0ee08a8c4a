//! Fading (signal power) laws.

use std::fmt;

use rand::Rng;
use rand_distr::{Beta as BetaDist, Distribution};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta as BetaLaw, ContinuousCDF};
use statrs::function::beta::ln_beta;

use crate::error::{domain, Error, Result};
use crate::numeric::{self, LogConcave, LogConcaveSampler};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingKind {
    Bounded,
    WeibullSuper,
    Exponential,
    WeibullSub,
    Pareto,
}

impl FadingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FadingKind::Bounded => "bounded",
            FadingKind::WeibullSuper => "weibull_super",
            FadingKind::Exponential => "exponential",
            FadingKind::WeibullSub => "weibull_sub",
            FadingKind::Pareto => "pareto",
        }
    }
}

impl fmt::Display for FadingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Law of the fading marks `Z_i`.
///
/// * `Bounded`: `B * Beta(a, b)`, essential supremum `B`.
/// * `WeibullSuper`, `WeibullSub`: survival `exp(-c z^γ)` with `γ > 1`
///   and `γ ∈ (0, 1)` respectively.
/// * `Exponential`: survival `exp(-c z)`.
/// * `Pareto`: survival `(1 + z)^(-c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FadingSpec {
    Bounded { sup: f64, shape_a: f64, shape_b: f64 },
    WeibullSuper { c: f64, gamma: f64 },
    Exponential { c: f64 },
    WeibullSub { c: f64, gamma: f64 },
    Pareto { c: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        domain(format!("{name} must be finite and positive, got {v}"))
    }
}

impl FadingSpec {
    /// Bounded fading with the default `Beta(2, 2)` shape.
    pub fn bounded(sup: f64) -> Result<Self> {
        Self::bounded_beta(sup, 2.0, 2.0)
    }

    pub fn bounded_beta(sup: f64, shape_a: f64, shape_b: f64) -> Result<Self> {
        positive("B", sup)?;
        positive("beta shape a", shape_a)?;
        positive("beta shape b", shape_b)?;
        Ok(FadingSpec::Bounded { sup, shape_a, shape_b })
    }

    pub fn weibull_super(c: f64, gamma: f64) -> Result<Self> {
        positive("c", c)?;
        if !(gamma.is_finite() && gamma > 1.0) {
            return domain(format!("superexponential Weibull needs gamma > 1, got {gamma}"));
        }
        Ok(FadingSpec::WeibullSuper { c, gamma })
    }

    pub fn exponential(c: f64) -> Result<Self> {
        positive("c", c)?;
        Ok(FadingSpec::Exponential { c })
    }

    pub fn weibull_sub(c: f64, gamma: f64) -> Result<Self> {
        positive("c", c)?;
        if !(gamma > 0.0 && gamma < 1.0) {
            return domain(format!("subexponential Weibull needs gamma in (0,1), got {gamma}"));
        }
        Ok(FadingSpec::WeibullSub { c, gamma })
    }

    pub fn pareto(c: f64) -> Result<Self> {
        positive("c", c)?;
        Ok(FadingSpec::Pareto { c })
    }

    /// Re-checks the parameter constraints (useful after deserialization).
    pub fn validate(&self) -> Result<Self> {
        match *self {
            FadingSpec::Bounded { sup, shape_a, shape_b } => Self::bounded_beta(sup, shape_a, shape_b),
            FadingSpec::WeibullSuper { c, gamma } => Self::weibull_super(c, gamma),
            FadingSpec::Exponential { c } => Self::exponential(c),
            FadingSpec::WeibullSub { c, gamma } => Self::weibull_sub(c, gamma),
            FadingSpec::Pareto { c } => Self::pareto(c),
        }
    }

    pub fn kind(&self) -> FadingKind {
        match self {
            FadingSpec::Bounded { .. } => FadingKind::Bounded,
            FadingSpec::WeibullSuper { .. } => FadingKind::WeibullSuper,
            FadingSpec::Exponential { .. } => FadingKind::Exponential,
            FadingSpec::WeibullSub { .. } => FadingKind::WeibullSub,
            FadingSpec::Pareto { .. } => FadingKind::Pareto,
        }
    }

    /// Exponent `γ` with `log F̄(σz)/log F̄(z) → σ^γ`, for the
    /// subexponential kinds.
    pub fn subexp_exponent(&self) -> Option<f64> {
        match *self {
            FadingSpec::WeibullSub { gamma, .. } => Some(gamma),
            FadingSpec::Pareto { .. } => Some(0.0),
            _ => None,
        }
    }

    pub fn is_subexponential(&self) -> bool {
        self.subexp_exponent().is_some()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            FadingSpec::Bounded { sup, shape_a, shape_b } => {
                let beta = BetaDist::new(shape_a, shape_b).expect("validated shapes");
                sup * beta.sample(rng)
            }
            FadingSpec::WeibullSuper { c, gamma } | FadingSpec::WeibullSub { c, gamma } => {
                let e = -(1.0 - rng.random::<f64>()).ln();
                (e / c).powf(1.0 / gamma)
            }
            FadingSpec::Exponential { c } => -(1.0 - rng.random::<f64>()).ln() / c,
            FadingSpec::Pareto { c } => (1.0 - rng.random::<f64>()).powf(-1.0 / c) - 1.0,
        }
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }

    /// `P(Z > z)`.
    pub fn survival(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 1.0;
        }
        match *self {
            FadingSpec::Bounded { sup, shape_a, shape_b } => {
                if z >= sup {
                    0.0
                } else {
                    BetaLaw::new(shape_a, shape_b).expect("validated").sf(z / sup)
                }
            }
            _ => self.ln_survival(z).exp(),
        }
    }

    /// `ln P(Z > z)`.
    pub fn ln_survival(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        match *self {
            FadingSpec::Bounded { .. } => self.survival(z).ln(),
            FadingSpec::WeibullSuper { c, gamma } | FadingSpec::WeibullSub { c, gamma } => -c * z.powf(gamma),
            FadingSpec::Exponential { c } => -c * z,
            FadingSpec::Pareto { c } => -c * z.ln_1p(),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            FadingSpec::Bounded { sup, shape_a, shape_b } => sup * shape_a / (shape_a + shape_b),
            FadingSpec::WeibullSuper { c, gamma } | FadingSpec::WeibullSub { c, gamma } => {
                c.powf(-1.0 / gamma) * statrs::function::gamma::gamma(1.0 + 1.0 / gamma)
            }
            FadingSpec::Exponential { c } => 1.0 / c,
            FadingSpec::Pareto { c } => {
                if c > 1.0 {
                    1.0 / (c - 1.0)
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Supremum of the values of `t` for which `E[e^{tZ}] < ∞`.
    pub fn mgf_abscissa(&self) -> f64 {
        match *self {
            FadingSpec::Bounded { .. } | FadingSpec::WeibullSuper { .. } => f64::INFINITY,
            FadingSpec::Exponential { c } => c,
            FadingSpec::WeibullSub { .. } | FadingSpec::Pareto { .. } => 0.0,
        }
    }

    fn divergence(&self, t: f64) -> Error {
        Error::MgfDivergence { argument: t, fading: format!("{self:?}") }
    }

    /// `ln E[e^{tZ}]` for `t ≥ 0`.
    pub fn log_mgf(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return domain(format!("MGF argument must be finite and nonnegative, got {t}"));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        match *self {
            FadingSpec::Exponential { c } => {
                if t >= c {
                    Err(self.divergence(t))
                } else {
                    Ok(-(-t / c).ln_1p())
                }
            }
            FadingSpec::WeibullSub { .. } | FadingSpec::Pareto { .. } => Err(self.divergence(t)),
            FadingSpec::Bounded { .. } | FadingSpec::WeibullSuper { .. } => {
                let d = TiltedDensity { spec: *self, tilt: t };
                Ok(numeric::log_concave_log_integral(&d) - d.log_norm())
            }
        }
    }

    /// Law of `Z` under the exponential tilt `e^{tZ} / E[e^{tZ}]`.
    pub fn tilted(&self, t: f64) -> Result<TiltedFading> {
        let log_mgf = self.log_mgf(t)?;
        let sampler = match *self {
            FadingSpec::Exponential { .. } => None,
            FadingSpec::Bounded { shape_a, shape_b, .. } if t > 0.0 && (shape_a < 1.0 || shape_b < 1.0) => {
                return Err(Error::Incompatible(
                    "tilted sampling of bounded fading needs Beta shapes >= 1".into(),
                ));
            }
            FadingSpec::Bounded { .. } | FadingSpec::WeibullSuper { .. } if t > 0.0 => {
                Some(LogConcaveSampler::new(&TiltedDensity { spec: *self, tilt: t }))
            }
            _ => None,
        };
        Ok(TiltedFading { spec: *self, tilt: t, log_mgf, sampler })
    }

    /// Mean of the tilted law, `d/dt ln E[e^{tZ}]`.
    pub fn tilted_mean(&self, t: f64) -> Result<f64> {
        self.log_mgf(t)?;
        if t == 0.0 {
            return Ok(self.mean());
        }
        match *self {
            FadingSpec::Exponential { c } => Ok(1.0 / (c - t)),
            _ => Ok(numeric::log_concave_mean(&TiltedDensity { spec: *self, tilt: t })),
        }
    }

    /// Tilt `t ≥ 0` whose tilted mean equals `target` (0 when the untilted
    /// mean already reaches it).
    pub fn tilt_for_mean(&self, target: f64) -> Result<f64> {
        if !(target.is_finite()) {
            return domain("tilt target must be finite");
        }
        if target <= self.mean() {
            return Ok(0.0);
        }
        match *self {
            FadingSpec::Exponential { c } => Ok(c - 1.0 / target),
            FadingSpec::Bounded { sup, .. } => {
                if target >= sup {
                    return domain(format!("tilted mean cannot reach {target} >= B = {sup}"));
                }
                let mut hi = 1.0 / sup;
                while self.tilted_mean(hi)? < target {
                    hi *= 2.0;
                }
                Ok(numeric::bisect(0.0, hi, |t| self.tilted_mean(t).unwrap() - target, 100))
            }
            FadingSpec::WeibullSuper { .. } => {
                let mut hi = 1.0;
                while self.tilted_mean(hi)? < target {
                    hi *= 2.0;
                }
                Ok(numeric::bisect(0.0, hi, |t| self.tilted_mean(t).unwrap() - target, 100))
            }
            FadingSpec::WeibullSub { .. } | FadingSpec::Pareto { .. } => Err(Error::Incompatible(
                "subexponential fading has no exponential moments to tilt".into(),
            )),
        }
    }
}

/// Unnormalized log-density of the tilted law (log-concave for the kinds
/// that use it).
#[derive(Debug, Clone, Copy)]
struct TiltedDensity {
    spec: FadingSpec,
    tilt: f64,
}

impl TiltedDensity {
    /// Log of the normalizing constant dropped from `log_density`.
    fn log_norm(&self) -> f64 {
        match self.spec {
            FadingSpec::Bounded { sup, shape_a, shape_b } => {
                ln_beta(shape_a, shape_b) + (shape_a + shape_b - 1.0) * sup.ln()
            }
            FadingSpec::WeibullSuper { c, gamma } => -(c * gamma).ln(),
            _ => 0.0,
        }
    }
}

impl LogConcave for TiltedDensity {
    fn support(&self) -> (f64, f64) {
        match self.spec {
            FadingSpec::Bounded { sup, .. } => (0.0, sup),
            _ => (0.0, f64::INFINITY),
        }
    }

    fn log_density(&self, z: f64) -> f64 {
        let t = self.tilt;
        match self.spec {
            FadingSpec::Bounded { sup, shape_a, shape_b } => {
                if z < 0.0 || z > sup {
                    return f64::NEG_INFINITY;
                }
                let la = if shape_a == 1.0 { 0.0 } else { (shape_a - 1.0) * z.ln() };
                let lb = if shape_b == 1.0 { 0.0 } else { (shape_b - 1.0) * (sup - z).ln() };
                la + lb + t * z
            }
            FadingSpec::WeibullSuper { c, gamma } => {
                if z <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                (gamma - 1.0) * z.ln() - c * z.powf(gamma) + t * z
            }
            _ => unreachable!("only log-concave kinds are tilted numerically"),
        }
    }

    fn d_log_density(&self, z: f64) -> f64 {
        let t = self.tilt;
        match self.spec {
            FadingSpec::Bounded { sup, shape_a, shape_b } => {
                let da = if shape_a == 1.0 {
                    0.0
                } else if z <= 0.0 {
                    f64::INFINITY
                } else {
                    (shape_a - 1.0) / z
                };
                let db = if shape_b == 1.0 {
                    0.0
                } else if z >= sup {
                    f64::NEG_INFINITY
                } else {
                    -(shape_b - 1.0) / (sup - z)
                };
                da + db + t
            }
            FadingSpec::WeibullSuper { c, gamma } => {
                if z <= 0.0 {
                    return f64::INFINITY;
                }
                (gamma - 1.0) / z - c * gamma * z.powf(gamma - 1.0) + t
            }
            _ => unreachable!(),
        }
    }
}

/// A fading law under exponential tilt, with its exact log-MGF for
/// likelihood ratios.
#[derive(Debug, Clone)]
pub struct TiltedFading {
    spec: FadingSpec,
    tilt: f64,
    log_mgf: f64,
    sampler: Option<LogConcaveSampler>,
}

impl TiltedFading {
    pub fn tilt(&self) -> f64 {
        self.tilt
    }

    pub fn log_mgf(&self) -> f64 {
        self.log_mgf
    }

    pub fn spec(&self) -> &FadingSpec {
        &self.spec
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.tilt == 0.0 {
            return self.spec.sample(rng);
        }
        match (&self.sampler, self.spec) {
            (_, FadingSpec::Exponential { c }) => -(1.0 - rng.random::<f64>()).ln() / (c - self.tilt),
            (Some(s), spec) => s.sample(&TiltedDensity { spec, tilt: self.tilt }, rng),
            (None, _) => unreachable!("tilted sampler exists for every tiltable kind"),
        }
    }

    /// Log likelihood ratio `ln(dP/dP_t)` of one mark.
    pub fn log_weight(&self, z: f64) -> f64 {
        self.log_mgf - self.tilt * z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Moments;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn constructor_domains() {
        assert!(FadingSpec::exponential(0.0).is_err());
        assert!(FadingSpec::weibull_super(1.0, 1.0).is_err());
        assert!(FadingSpec::weibull_sub(1.0, 1.0).is_err());
        assert!(FadingSpec::bounded(-1.0).is_err());
        assert!(FadingSpec::pareto(f64::NAN).is_err());
    }

    #[test]
    fn weibull_super_survival_at_two() {
        let f = FadingSpec::weibull_super(1.0, 2.0).unwrap();
        assert!((f.survival(2.0) - (-4.0f64).exp()).abs() < 1e-15);
        let mut r = rng(3);
        let n = 1_000_000;
        let hits = (0..n).filter(|_| f.sample(&mut r) > 2.0).count() as f64 / n as f64;
        let p = (-4.0f64).exp();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits - p).abs() < 3.0 * se, "{hits} vs {p}");
    }

    #[test]
    fn bounded_max_reaches_supremum() {
        let f = FadingSpec::bounded(2.5).unwrap();
        let mut r = rng(4);
        let max = (0..1_000_000).map(|_| f.sample(&mut r)).fold(0.0, f64::max);
        assert!(max > 0.99 * 2.5 && max <= 2.5);
        assert!(f.survival(0.999 * 2.5) > 0.0);
    }

    #[test]
    fn exponential_log_survival_slope() {
        // Empirical -ln P(Z > z) regressed on z recovers c.
        let c = 1.7;
        let f = FadingSpec::exponential(c).unwrap();
        let mut r = rng(5);
        let n = 1_000_000;
        let draws = f.sample_n(n, &mut r);
        let grid: Vec<f64> = (1..=8).map(|k| k as f64 * 0.5).collect();
        let y: Vec<f64> = grid
            .iter()
            .map(|&z| -((draws.iter().filter(|&&d| d > z).count() as f64) / n as f64).ln())
            .collect();
        let fit = crate::stats::linear_fit(&grid, &y).unwrap();
        assert!((fit.slope - c).abs() / c < 0.05, "{}", fit.slope);
    }

    #[test]
    fn pareto_survival_and_exponent() {
        let f = FadingSpec::pareto(2.0).unwrap();
        assert!((f.survival(100.0) - 101f64.powi(-2)).abs() < 1e-18);
        assert_eq!(f.subexp_exponent(), Some(0.0));
        assert!(f.log_mgf(0.1).is_err());
    }

    #[test]
    fn exponential_mgf_divergence() {
        let f = FadingSpec::exponential(1.0).unwrap();
        assert!(matches!(f.log_mgf(1.0), Err(Error::MgfDivergence { .. })));
        assert!((f.log_mgf(0.5).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn beta22_log_mgf_closed_form() {
        // E[e^{tZ}] for Z = B U, U ~ Beta(2,2): 6((e^s+1)/s^2 - 2(e^s-1)/s^3), s = tB.
        let f = FadingSpec::bounded(2.0).unwrap();
        for &t in &[0.1, 1.0, 5.0, 20.0] {
            let s: f64 = t * 2.0;
            let exact = 6.0 * ((s.exp() + 1.0) / (s * s) - 2.0 * s.exp_m1() / (s * s * s));
            let got = f.log_mgf(t).unwrap();
            assert!((got - exact.ln()).abs() < 1e-9, "t={t}: {got} vs {}", exact.ln());
        }
    }

    #[test]
    fn weibull2_log_mgf_closed_form() {
        // c=1, gamma=2: E[e^{tZ}] = 1 + t e^{t^2/4} sqrt(pi)/2 (1 + erf(t/2)).
        let f = FadingSpec::weibull_super(1.0, 2.0).unwrap();
        for &t in &[0.5f64, 2.0, 8.0] {
            let exact = 1.0
                + t * (t * t / 4.0).exp() * std::f64::consts::PI.sqrt() / 2.0
                    * (1.0 + statrs::function::erf::erf(t / 2.0));
            let got = f.log_mgf(t).unwrap();
            assert!((got - exact.ln()).abs() < 1e-9, "t={t}: {got} vs {}", exact.ln());
        }
    }

    #[test]
    fn tilted_samples_match_tilted_mean() {
        for spec in [
            FadingSpec::bounded(1.0).unwrap(),
            FadingSpec::weibull_super(1.0, 2.0).unwrap(),
            FadingSpec::exponential(1.0).unwrap(),
        ] {
            let t = 0.6;
            let tilted = spec.tilted(t).unwrap();
            let mut r = rng(6);
            let draws: Vec<f64> = (0..100_000).map(|_| tilted.sample(&mut r)).collect();
            let m = Moments::from_slice(&draws);
            let exact = spec.tilted_mean(t).unwrap();
            assert!((m.mean - exact).abs() < 4.0 * m.stderr(), "{spec:?}: {} vs {exact}", m.mean);
        }
    }

    #[test]
    fn tilt_for_mean_inverts() {
        for spec in [
            FadingSpec::bounded(1.0).unwrap(),
            FadingSpec::weibull_super(2.0, 3.0).unwrap(),
            FadingSpec::exponential(1.0).unwrap(),
        ] {
            let target = 0.9 * match spec {
                FadingSpec::Bounded { sup, .. } => sup,
                _ => 5.0,
            };
            let t = spec.tilt_for_mean(target).unwrap();
            assert!((spec.tilted_mean(t).unwrap() - target).abs() < 1e-8 * target);
        }
        assert_eq!(FadingSpec::exponential(1.0).unwrap().tilt_for_mean(0.5).unwrap(), 0.0);
    }
}
