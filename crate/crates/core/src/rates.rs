//! Closed-form large-deviation rates, speeds and tail asymptotes for the
//! scaled interference `ε I_Λ`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fading::{FadingKind, FadingSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    Bounded,
    WeibullSuper,
    Exponential,
    SubexpFamily,
}

impl RegimeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeKind::Bounded => "bounded",
            RegimeKind::WeibullSuper => "weibull_super",
            RegimeKind::Exponential => "exponential",
            RegimeKind::SubexpFamily => "subexp_family",
        }
    }

    fn of(kind: FadingKind) -> Self {
        match kind {
            FadingKind::Bounded => RegimeKind::Bounded,
            FadingKind::WeibullSuper => RegimeKind::WeibullSuper,
            FadingKind::Exponential => RegimeKind::Exponential,
            FadingKind::WeibullSub | FadingKind::Pareto => RegimeKind::SubexpFamily,
        }
    }
}

/// Fading law plus attenuation parameters `(R, α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdpRegime {
    pub fading: FadingSpec,
    pub atten_r: f64,
    pub atten_alpha: f64,
}

impl LdpRegime {
    /// Regime implied by `fading`.
    pub fn from_fading(fading: FadingSpec, atten_r: f64, atten_alpha: f64) -> Result<Self> {
        fading.validate()?;
        if !(atten_r.is_finite() && atten_r > 0.0) {
            return domain(format!("attenuation R must be positive, got {atten_r}"));
        }
        if !(atten_alpha.is_finite() && atten_alpha > 2.0) {
            return domain(format!("attenuation exponent alpha must exceed 2, got {atten_alpha}"));
        }
        Ok(Self { fading, atten_r, atten_alpha })
    }

    /// As [`LdpRegime::from_fading`], rejecting a fading law of another kind.
    pub fn new(kind: RegimeKind, fading: FadingSpec, atten_r: f64, atten_alpha: f64) -> Result<Self> {
        let r = Self::from_fading(fading, atten_r, atten_alpha)?;
        if r.kind() != kind {
            return domain(format!("{} fading does not belong to the {} regime", fading.kind(), kind.as_str()));
        }
        Ok(r)
    }

    pub fn kind(&self) -> RegimeKind {
        RegimeKind::of(self.fading.kind())
    }

    /// `R^α`.
    pub fn r_alpha(&self) -> f64 {
        self.atten_r.powf(self.atten_alpha)
    }

    /// Leading constant `C` with `lim log P(I_Λ ≥ x) / g(x) = C`, `g` the
    /// regime's growth function.
    pub fn target_slope(&self) -> f64 {
        let ra = self.r_alpha();
        match self.fading {
            FadingSpec::Bounded { sup, .. } => -0.5 * ra * ra / (sup * sup),
            FadingSpec::WeibullSuper { c, gamma } => -weibull_rate_constant(c, gamma, ra),
            FadingSpec::Exponential { c } => -c * ra,
            FadingSpec::WeibullSub { gamma, .. } => ra.powf(gamma),
            FadingSpec::Pareto { .. } => 1.0,
        }
    }

    /// Growth function `g(x)`: `x² log x`, `x^{2γ/(γ+1)} log^{(γ-1)/(γ+1)} x`,
    /// `x`, or `log F̄(x)`.
    pub fn growth(&self, x: f64) -> f64 {
        match self.fading {
            FadingSpec::Bounded { .. } => x * x * x.ln(),
            FadingSpec::WeibullSuper { gamma, .. } => {
                x.powf(2.0 * gamma / (gamma + 1.0)) * x.ln().powf((gamma - 1.0) / (gamma + 1.0))
            }
            FadingSpec::Exponential { .. } => x,
            FadingSpec::WeibullSub { .. } | FadingSpec::Pareto { .. } => self.fading.ln_survival(x),
        }
    }
}

/// `½ R^{2αγ/(γ+1)} (γ/(γ-1))^{(γ-1)/(γ+1)} (c(γ+1))^{2/(γ+1)}` with `ra = R^α`.
fn weibull_rate_constant(c: f64, gamma: f64, ra: f64) -> f64 {
    let g1 = gamma + 1.0;
    0.5 * ra.powf(2.0 * gamma / g1)
        * (gamma / (gamma - 1.0)).powf((gamma - 1.0) / g1)
        * (c * g1).powf(2.0 / g1)
}

fn check_x(x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        domain(format!("x must be finite and nonnegative, got {x}"))
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        domain(format!("eps must lie in (0,1), got {eps}"))
    }
}

/// Rate function `I(x)` of `{ε I_Λ}`.
pub fn rate(regime: &LdpRegime, x: f64) -> Result<f64> {
    check_x(x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let ra = regime.r_alpha();
    Ok(match regime.fading {
        FadingSpec::Bounded { sup, .. } => ra * ra * x * x / (2.0 * sup * sup),
        FadingSpec::WeibullSuper { c, gamma } => {
            weibull_rate_constant(c, gamma, ra) * x.powf(2.0 * gamma / (gamma + 1.0))
        }
        FadingSpec::Exponential { c } => c * ra * x,
        FadingSpec::WeibullSub { gamma, .. } => ra.powf(gamma) * x.powf(gamma),
        FadingSpec::Pareto { .. } => 1.0,
    })
}

/// Speed `v(ε)` of `{ε I_Λ}`.
pub fn speed(regime: &LdpRegime, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let l = (1.0 / eps).ln();
    Ok(match regime.fading {
        FadingSpec::Bounded { .. } => l / (eps * eps),
        FadingSpec::WeibullSuper { gamma, .. } => {
            eps.powf(-2.0 * gamma / (gamma + 1.0)) * l.powf((gamma - 1.0) / (gamma + 1.0))
        }
        FadingSpec::Exponential { .. } => 1.0 / eps,
        FadingSpec::WeibullSub { .. } | FadingSpec::Pareto { .. } => -regime.fading.ln_survival(1.0 / eps),
    })
}

/// Leading-order prediction of `log P(I_Λ ≥ x)`: `target_slope · g(x)`.
pub fn tail_asymptote(regime: &LdpRegime, x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return domain(format!("x must be finite and positive, got {x}"));
    }
    Ok(regime.target_slope() * regime.growth(x))
}

fn insensitive(regime: &LdpRegime) -> Error {
    Error::Incompatible(format!(
        "insensitive regime: identical constants for Poisson and Ginibre networks under {} fading \
         (with light-tailed node counts the interference tail does not depend on node placement)",
        regime.fading.kind()
    ))
}

/// Limit constant of `log P(I_Λ ≥ x)` for a Poisson network with the same
/// fading: normalized by `x log x` (bounded) or `x log^{(γ-1)/γ} x`
/// (Weibull).
pub fn poisson_comparison(regime: &LdpRegime) -> Result<f64> {
    let ra = regime.r_alpha();
    match regime.fading {
        FadingSpec::Bounded { sup, .. } => Ok(-ra / sup),
        FadingSpec::WeibullSuper { c, gamma } => {
            Ok(-gamma * (gamma - 1.0).powf(-(gamma - 1.0) / gamma) * c.powf(1.0 / gamma) * ra)
        }
        _ => Err(insensitive(regime)),
    }
}

/// Poisson-network speed, in the tabulated `(speed, rate)` form.
pub fn poisson_speed(regime: &LdpRegime, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let l = (1.0 / eps).ln();
    match regime.fading {
        FadingSpec::Bounded { .. } => Ok(l / eps),
        FadingSpec::WeibullSuper { gamma, .. } => Ok(l.powf(1.0 - 1.0 / gamma) / eps),
        _ => Err(insensitive(regime)),
    }
}

/// Poisson-network rate function, in the tabulated `(speed, rate)` form.
pub fn poisson_rate(regime: &LdpRegime, x: f64) -> Result<f64> {
    check_x(x)?;
    Ok(-poisson_comparison(regime)? * x)
}

/// Constants of the Weibull lower- and upper-bound constructions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProofConstants {
    /// Block constant maximizing the lower bound.
    pub kappa_opt: f64,
    /// Number of large marks in the dominating event.
    pub block_n: u64,
    /// `log E[e^{θZ}] ~ γ' θ^{γ/(γ-1)}`.
    pub gamma_prime: f64,
    pub gamma_tilde: f64,
    /// Tilt used in the Chernoff bound.
    pub theta_tilt: f64,
}

/// Constants for superexponential Weibull fading at level `x` and scale `eps`.
pub fn proof_constants(regime: &LdpRegime, x: f64, eps: f64) -> Result<ProofConstants> {
    let FadingSpec::WeibullSuper { c, gamma } = regime.fading else {
        return domain(format!("proof constants need weibull_super fading, got {}", regime.fading.kind()));
    };
    if !(x.is_finite() && x > 0.0) {
        return domain(format!("x must be finite and positive, got {x}"));
    }
    if !(eps > 0.0 && eps < 1.0_f64.min(x)) {
        return domain(format!("eps must lie in (0, min(1, x)), got {eps}"));
    }
    let ra = regime.r_alpha();
    let g1 = gamma + 1.0;
    let kappa_opt = (c * (gamma * gamma - 1.0) * (ra * x).powf(gamma) / gamma).powf(1.0 / g1);
    let denom = eps.powf(gamma / g1) * (1.0 / eps).ln().powf(1.0 / g1);
    let block_n = (kappa_opt / denom).floor() as u64;
    let gamma_prime = (gamma - 1.0) * gamma.powf(-gamma / (gamma - 1.0)) * c.powf(-1.0 / (gamma - 1.0));
    let gamma_tilde =
        0.5 * (ra * gamma / (gamma - 1.0)).powf((gamma - 1.0) / g1) * (c * g1).powf(2.0 / g1);
    let xe = x / eps;
    let theta_tilt = ra * gamma_tilde / eps * (xe * xe.ln()).powf((gamma - 1.0) / g1);
    Ok(ProofConstants { kappa_opt, block_n, gamma_prime, gamma_tilde, theta_tilt })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::E;

    fn regime(f: FadingSpec, r: f64, alpha: f64) -> LdpRegime {
        LdpRegime::from_fading(f, r, alpha).unwrap()
    }

    #[test]
    fn kind_mismatch_rejected() {
        let f = FadingSpec::exponential(1.0).unwrap();
        assert!(LdpRegime::new(RegimeKind::WeibullSuper, f, 1.0, 4.0).is_err());
        assert!(LdpRegime::new(RegimeKind::Exponential, f, 1.0, 4.0).is_ok());
        let p = FadingSpec::pareto(2.0).unwrap();
        assert_eq!(regime(p, 1.0, 3.0).kind(), RegimeKind::SubexpFamily);
        assert!(LdpRegime::from_fading(f, 1.0, 2.0).is_err());
    }

    #[test]
    fn weibull_rate_substitution() {
        let w = regime(FadingSpec::weibull_super(1.0, 2.0).unwrap(), 1.0, 3.0);
        let expected = 0.5 * 2f64.cbrt() * 9f64.cbrt();
        assert_relative_eq!(rate(&w, 1.0).unwrap(), expected, max_relative = 1e-12);
        assert_relative_eq!(rate(&w, 1.0).unwrap(), 1.31037, epsilon = 1e-5);
    }

    #[test]
    fn speed_and_rate_errors() {
        let b = regime(FadingSpec::bounded(2.0).unwrap(), 1.0, 3.0);
        assert!(speed(&b, 1.0).is_err());
        assert!(speed(&b, 0.0).is_err());
        assert!(rate(&b, -1.0).is_err());
        assert!(tail_asymptote(&b, 0.0).is_err());
        assert_eq!(speed(&b, (-1.0f64).exp()).unwrap(), E * E);
    }

    #[test]
    fn poisson_comparison_refuses_insensitive_kinds() {
        for f in [FadingSpec::exponential(1.0).unwrap(), FadingSpec::pareto(1.0).unwrap()] {
            let e = poisson_comparison(&regime(f, 1.0, 3.0)).unwrap_err();
            assert!(e.to_string().contains("insensitive"));
        }
    }

    #[test]
    fn weibull_constants_merge_as_gamma_decreases_to_one() {
        let gap = |gamma: f64| {
            let w = regime(FadingSpec::weibull_super(1.0, gamma).unwrap(), 1.0, 3.0);
            let ginibre = -w.target_slope();
            let poisson = -poisson_comparison(&w).unwrap();
            (ginibre - poisson).abs() / poisson
        };
        assert!(gap(1.001) < 0.02);
        assert!(gap(1.001) < gap(1.01));
        assert!(gap(1.01) < gap(1.1));
    }

    #[test]
    fn proof_constant_examples() {
        let w = regime(FadingSpec::weibull_super(1.0, 2.0).unwrap(), 1.0, 3.0);
        let p = proof_constants(&w, 1.0, 0.1).unwrap();
        assert_relative_eq!(p.kappa_opt, 1.5f64.cbrt(), max_relative = 1e-12);
        assert_relative_eq!(p.gamma_prime, 0.25, max_relative = 1e-12);
        // γ̃ at γ=2, R^α=1, c=1: ½ 2^{1/3} 3^{2/3}
        assert_relative_eq!(p.gamma_tilde, 0.5 * 2f64.cbrt() * 9f64.cbrt(), max_relative = 1e-12);
        let denom = 0.1f64.powf(2.0 / 3.0) * 10f64.ln().cbrt();
        assert_eq!(p.block_n, (1.5f64.cbrt() / denom).floor() as u64);
        assert!(proof_constants(&w, 1.0, 1.0).is_err());
        assert!(proof_constants(&w, 0.5, 0.6).is_err());
        let e = regime(FadingSpec::exponential(1.0).unwrap(), 1.0, 3.0);
        assert!(proof_constants(&e, 1.0, 0.1).is_err());
    }

    #[test]
    fn block_size_grows_as_eps_shrinks() {
        let w = regime(FadingSpec::weibull_super(1.0, 2.0).unwrap(), 1.0, 3.0);
        let ns: Vec<u64> = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
            .iter()
            .map(|&e| proof_constants(&w, 1.0, e).unwrap().block_n)
            .collect();
        assert!(ns.windows(2).all(|w| w[1] > w[0]), "{ns:?}");
    }

    #[test]
    fn level_asymptote_matches_scaled_rate() {
        // tail_asymptote(x) = -I(1) * speed(1/x)
        let regimes = [
            regime(FadingSpec::exponential(1.5).unwrap(), 1.2, 3.0),
            regime(FadingSpec::bounded(2.0).unwrap(), 0.8, 4.0),
            regime(FadingSpec::weibull_super(0.7, 2.5).unwrap(), 1.1, 2.5),
        ];
        for r in regimes {
            let x = 1e6;
            let lhs = tail_asymptote(&r, x).unwrap();
            let rhs = -rate(&r, 1.0).unwrap() * speed(&r, 1.0 / x).unwrap();
            assert!((lhs / rhs - 1.0).abs() < 0.02, "{r:?}: {lhs} vs {rhs}");
        }
        let e = regime(FadingSpec::exponential(1.5).unwrap(), 1.2, 3.0);
        assert_relative_eq!(
            tail_asymptote(&e, 10.0).unwrap(),
            -rate(&e, 1.0).unwrap() * speed(&e, 0.1).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn poisson_tabulated_form() {
        let b = regime(FadingSpec::bounded(2.0).unwrap(), 1.0, 3.0);
        assert_relative_eq!(poisson_rate(&b, 3.0).unwrap(), 1.5, max_relative = 1e-15);
        assert_relative_eq!(poisson_speed(&b, 0.1).unwrap(), 10.0 * 10f64.ln(), max_relative = 1e-15);
        let w = regime(FadingSpec::weibull_super(1.0, 2.0).unwrap(), 1.0, 3.0);
        assert_relative_eq!(poisson_rate(&w, 1.0).unwrap(), 2.0, max_relative = 1e-15);
        assert_relative_eq!(poisson_speed(&w, 0.1).unwrap(), 10.0 * 10f64.ln().sqrt(), max_relative = 1e-15);
    }

    fn all_regimes() -> Vec<LdpRegime> {
        vec![
            regime(FadingSpec::bounded(1.5).unwrap(), 1.0, 3.0),
            regime(FadingSpec::weibull_super(1.0, 3.0).unwrap(), 0.9, 4.0),
            regime(FadingSpec::exponential(2.0).unwrap(), 1.3, 3.5),
            regime(FadingSpec::weibull_sub(1.0, 0.5).unwrap(), 1.0, 4.0),
            regime(FadingSpec::pareto(2.0).unwrap(), 1.0, 4.0),
        ]
    }

    #[test]
    fn rates_nondecreasing_and_continuous_on_grid() {
        for r in all_regimes() {
            assert_eq!(rate(&r, 0.0).unwrap(), 0.0);
            let grid: Vec<f64> = (1..=400).map(|k| k as f64 * 0.025).collect();
            let vals: Vec<f64> = grid.iter().map(|&x| rate(&r, x).unwrap()).collect();
            assert!(vals.windows(2).all(|w| w[1] - w[0] >= -1e-12));
            for &x in &grid {
                let a = rate(&r, x).unwrap();
                let b = rate(&r, x + 1e-12).unwrap();
                assert!((a - b).abs() <= 1e-9 * a.max(1.0));
            }
        }
    }

    proptest! {
        #[test]
        fn speeds_decrease_in_eps(e1 in 1e-6..0.5f64, e2 in 1e-6..0.5f64) {
            prop_assume!((e1 - e2).abs() > 1e-9);
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            for r in all_regimes() {
                prop_assert!(speed(&r, lo).unwrap() > speed(&r, hi).unwrap());
            }
        }

        #[test]
        fn rates_nonnegative(x in 0.0..1e3f64) {
            for r in all_regimes() {
                prop_assert!(rate(&r, x).unwrap() >= 0.0);
            }
        }
    }
}
