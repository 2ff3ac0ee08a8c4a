//! Monte Carlo estimators of interference and count tails, and regression
//! diagnostics against the closed-form decay rates.

mod io;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fading::{FadingKind, FadingSpec};
use crate::geometry::{Disk, PlanarPoint};
use crate::interference::{ordered_sum, NetworkModel};
use crate::rates::{proof_constants, tail_asymptote, LdpRegime, RegimeKind};
use crate::sampling::{thinned_points, RngStream, DEFAULT_STALL_CAP};
use crate::spectral::{log_count_tail, palm_mean_count, DiskRestriction};
use crate::stats::{linear_fit, CompensatedSum};

pub use io::{read_estimates_csv, read_slope_report_csv, write_estimates_csv, write_slope_report_csv, EstimateRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Crude,
    Tilted,
    SingleJump,
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Crude => "crude",
            Estimator::Tilted => "tilted",
            Estimator::SingleJump => "single_jump",
        }
    }

    /// Rejects estimator/fading pairings that have no valid construction.
    pub fn check_compatible(self, fading: &FadingSpec) -> Result<()> {
        let ok = match self {
            Estimator::Crude => true,
            Estimator::Tilted => matches!(
                fading.kind(),
                FadingKind::Bounded | FadingKind::WeibullSuper | FadingKind::Exponential
            ),
            Estimator::SingleJump => fading.is_subexponential() || fading.kind() == FadingKind::Exponential,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Incompatible(format!(
                "the {} estimator cannot be used with {} fading",
                self.as_str(),
                fading.kind()
            )))
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crude" => Ok(Estimator::Crude),
            "tilted" => Ok(Estimator::Tilted),
            "single_jump" | "single-jump" => Ok(Estimator::SingleJump),
            other => Err(Error::Domain(format!("unknown estimator '{other}'"))),
        }
    }
}

/// A tail probability estimate with its uncertainty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub probability: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub n_reps: usize,
    pub estimator: Estimator,
    /// `ln probability`; `-inf` for zero-hit estimates.
    pub log_probability: f64,
    pub diagnostics: BTreeMap<String, f64>,
}

impl TailEstimate {
    /// Estimate from per-replication unbiased contributions, summed in
    /// replication order.
    pub fn from_samples(values: &[f64], estimator: Estimator) -> Self {
        let n = values.len();
        let mean = values.iter().copied().collect::<CompensatedSum>().value() / n as f64;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).collect::<CompensatedSum>().value() / (n - 1) as f64
        } else {
            0.0
        };
        let stderr = (var / n as f64).sqrt();
        let mut est = Self::exact(mean, estimator);
        est.stderr = stderr;
        est.n_reps = n;
        est.ci95 = ((mean - 1.96 * stderr).max(0.0), (mean + 1.96 * stderr).min(1.0).max(mean));
        let hits = values.iter().filter(|&&v| v > 0.0).count();
        est.diagnostics.insert("hits".into(), hits as f64);
        if hits == 0 {
            est.diagnostics.insert("zero_hits".into(), 1.0);
        }
        est
    }

    /// A deterministic value with zero uncertainty.
    pub fn exact(probability: f64, estimator: Estimator) -> Self {
        Self {
            probability,
            stderr: 0.0,
            ci95: (probability, probability),
            n_reps: 1,
            estimator,
            log_probability: if probability > 0.0 { probability.ln() } else { f64::NEG_INFINITY },
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn is_zero_hit(&self) -> bool {
        self.diagnostics.contains_key("zero_hits")
    }
}

/// Tuning knobs shared by the interference-tail estimators.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOptions {
    /// Mark tilt; `None` solves the mean-shift equation.
    pub tilt: Option<f64>,
    /// Single-jump split level in interference units; `None` uses `x/2`.
    pub split: Option<f64>,
}

/// Attenuation weights `L(y − X_i)` of the in-window points of one reduced
/// Palm β-Ginibre realization.
fn window_weights(model: &NetworkModel, rng: &mut RngStream) -> Result<Vec<f64>> {
    let pts = thinned_points(model.beta, model.sampling_radius(), true, DEFAULT_STALL_CAP, rng)?;
    Ok(pts.into_iter().filter(|p| model.window.contains(*p)).map(|p| model.attenuation_at(p)).collect())
}

fn replicate<F>(n_reps: usize, rng: &RngStream, f: F) -> Result<Vec<f64>>
where
    F: Fn(&mut RngStream) -> Result<f64> + Sync,
{
    (0..n_reps as u64).into_par_iter().map(|k| f(&mut rng.substream(k))).collect()
}

fn check_reps(n_reps: usize) -> Result<()> {
    if n_reps == 0 {
        return Err(Error::InsufficientData("n_reps must be positive".into()));
    }
    Ok(())
}

/// Mean-shift tilt: the tilted mean of `R^{-α} Σ Z_i` equals `x`, i.e.
/// `E_θ[Z] = x R^α / E[N(Λ)]`.
pub fn mean_shift_tilt(model: &NetworkModel, x: f64) -> Result<f64> {
    let mean_n = palm_mean_count(model.beta, &model.window)?;
    if !(mean_n > 0.0) {
        return Err(Error::InsufficientData("window has zero expected count".into()));
    }
    let target = x / (model.peak_attenuation() * mean_n);
    match model.fading {
        FadingSpec::Bounded { sup, .. } if target >= sup => {
            // Cap just below the supremum, where the tilted law is still proper.
            model.fading.tilt_for_mean(sup * (1.0 - 1e-3))
        }
        _ => model.fading.tilt_for_mean(target),
    }
}

/// Estimates `P(I_Λ ≥ x)` for the receiver of `model`.
pub fn estimate_interference_tail(
    model: &NetworkModel,
    x: f64,
    n_reps: usize,
    estimator: Estimator,
    rng: &RngStream,
) -> Result<TailEstimate> {
    estimate_interference_tail_with(model, x, n_reps, estimator, &EstimatorOptions::default(), rng)
}

pub fn estimate_interference_tail_with(
    model: &NetworkModel,
    x: f64,
    n_reps: usize,
    estimator: Estimator,
    options: &EstimatorOptions,
    rng: &RngStream,
) -> Result<TailEstimate> {
    model.validate()?;
    check_reps(n_reps)?;
    estimator.check_compatible(&model.fading)?;
    if !(x.is_finite() && x >= 0.0) {
        return domain(format!("x must be finite and nonnegative, got {x}"));
    }
    if x == 0.0 {
        let mut e = TailEstimate::exact(1.0, estimator);
        e.n_reps = n_reps;
        return Ok(e);
    }
    match estimator {
        Estimator::Crude => crude(model, x, n_reps, rng),
        Estimator::Tilted => {
            let tilt = match options.tilt {
                Some(t) => t,
                None => mean_shift_tilt(model, x)?,
            };
            tilted(model, x, n_reps, tilt, rng)
        }
        Estimator::SingleJump => {
            let split = options.split.unwrap_or(x / 2.0);
            if !(split >= 0.0) {
                return domain(format!("split level must be nonnegative, got {split}"));
            }
            let fading = model.fading;
            let values = replicate(n_reps, rng, |s| {
                let a = window_weights(model, s)?;
                let z = fading.sample_n(a.len(), s);
                Ok(single_jump_term(&a, &z, x, split, &fading))
            })?;
            let mut e = TailEstimate::from_samples(&values, Estimator::SingleJump);
            e.diagnostics.insert("split".into(), split);
            Ok(e)
        }
    }
}

fn crude(model: &NetworkModel, x: f64, n_reps: usize, rng: &RngStream) -> Result<TailEstimate> {
    let fading = model.fading;
    let values = replicate(n_reps, rng, |s| {
        let a = window_weights(model, s)?;
        let mut terms: Vec<f64> = a.iter().map(|w| w * fading.sample(s)).collect();
        Ok((ordered_sum(&mut terms) >= x) as u8 as f64)
    })?;
    Ok(TailEstimate::from_samples(&values, Estimator::Crude))
}

fn tilted(model: &NetworkModel, x: f64, n_reps: usize, tilt: f64, rng: &RngStream) -> Result<TailEstimate> {
    if tilt == 0.0 {
        let mut e = crude(model, x, n_reps, rng)?;
        e.estimator = Estimator::Tilted;
        e.diagnostics.insert("tilt".into(), 0.0);
        e.diagnostics.insert("ess".into(), e.diagnostics["hits"]);
        return Ok(e);
    }
    let law = model.fading.tilted(tilt)?;
    let values = replicate(n_reps, rng, |s| {
        let a = window_weights(model, s)?;
        let z: Vec<f64> = a.iter().map(|_| law.sample(s)).collect();
        let mut terms: Vec<f64> = a.iter().zip(&z).map(|(w, z)| w * z).collect();
        if ordered_sum(&mut terms) < x {
            return Ok(0.0);
        }
        let mut logs: Vec<f64> = z.iter().map(|&z| law.log_weight(z)).collect();
        Ok(ordered_sum(&mut logs).exp())
    })?;
    let mut e = TailEstimate::from_samples(&values, Estimator::Tilted);
    let s1: f64 = values.iter().sum();
    let s2: f64 = values.iter().map(|v| v * v).sum();
    e.diagnostics.insert("tilt".into(), tilt);
    e.diagnostics.insert("ess".into(), if s2 > 0.0 { s1 * s1 / s2 } else { 0.0 });
    Ok(e)
}

/// Conditional Monte Carlo contribution for `P(Σ a_i Z_i ≥ x)`:
///
/// `1{S ≥ x, max w ≤ s} + Σ_i F̄(max(M_{−i}, x − S_{−i}, s) / a_i)`,
///
/// with `w_i = a_i Z_i`, `S_{−i}`, `M_{−i}` the sum and maximum of the other
/// terms. Each summand is the conditional probability, given the other
/// marks, that term `i` is the unique maximum, exceeds `s` and completes
/// the sum; the estimator is unbiased for every split `s`.
fn single_jump_term(a: &[f64], z: &[f64], x: f64, split: f64, fading: &FadingSpec) -> f64 {
    let n = a.len();
    let mut w: Vec<f64> = a.iter().zip(z).map(|(a, z)| a * z).collect();
    let max = w.iter().copied().fold(0.0, f64::max);
    let total = ordered_sum(&mut w.clone());
    let mut acc = CompensatedSum::new();
    if total >= x && max <= split {
        acc.add(1.0);
    }
    for i in 0..n {
        let wi = w[i];
        w[i] = 0.0;
        let rest_max = w.iter().copied().fold(0.0, f64::max);
        let rest_sum = ordered_sum(&mut w.clone());
        w[i] = wi;
        let level = rest_max.max(x - rest_sum).max(split);
        acc.add(fading.survival(level / a[i]));
    }
    acc.value()
}

/// Exact `P(N ≥ m)` for the restriction, from its Poisson-binomial law.
/// Off-center disks are treated as centered (translation invariance).
pub fn estimate_count_tail(restriction: &DiskRestriction, m: u64) -> TailEstimate {
    let centered = DiskRestriction { center: PlanarPoint::ORIGIN, ..*restriction };
    let l = log_count_tail(&centered, m as usize);
    let mut e = TailEstimate::exact(l.exp(), Estimator::Crude);
    e.log_probability = l;
    e.diagnostics.insert("exact_spectral".into(), 1.0);
    e
}

/// Empirical decay of `log P(I_Λ ≥ x)` against the regime's growth
/// function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub x_grid: Vec<f64>,
    pub log_p: Vec<f64>,
    pub predicted: Vec<f64>,
    pub fitted_slope: f64,
    pub target_slope: f64,
    pub relative_error: f64,
    /// Grid points dropped for lack of hits.
    pub dropped: Vec<f64>,
}

fn check_grid(x_grid: &[f64]) -> Result<()> {
    if x_grid.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "slope regression needs at least 3 grid points, got {}",
            x_grid.len()
        )));
    }
    if x_grid.windows(2).any(|w| !(w[1] > w[0])) || !(x_grid[0] > 0.0) {
        return domain("x grid must be positive and strictly increasing");
    }
    Ok(())
}

/// Fits `log p̂(x) = a + b g(x)` over the grid and compares `b` with the
/// regime's limit constant.
pub fn speed_regression(
    model: &NetworkModel,
    regime: &LdpRegime,
    x_grid: &[f64],
    n_reps: usize,
    estimator: Estimator,
    rng: &RngStream,
) -> Result<SlopeReport> {
    let estimates: Vec<TailEstimate> = x_grid
        .iter()
        .enumerate()
        .map(|(k, &x)| estimate_interference_tail(model, x, n_reps, estimator, &rng.substream(k as u64)))
        .collect::<Result<_>>()?;
    slope_report(model, regime, x_grid, &estimates)
}

/// Builds a [`SlopeReport`] from precomputed estimates.
pub fn slope_report(
    model: &NetworkModel,
    regime: &LdpRegime,
    x_grid: &[f64],
    estimates: &[TailEstimate],
) -> Result<SlopeReport> {
    check_grid(x_grid)?;
    if regime.fading != model.fading {
        return Err(Error::Incompatible("regime and model use different fading laws".into()));
    }
    if estimates.len() != x_grid.len() {
        return Err(Error::Structural("one estimate per grid point is required".into()));
    }
    let mut xs = Vec::new();
    let mut log_p = Vec::new();
    let mut dropped = Vec::new();
    for (&x, e) in x_grid.iter().zip(estimates) {
        if e.probability > 0.0 {
            xs.push(x);
            log_p.push(e.probability.ln());
        } else {
            dropped.push(x);
        }
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "only {} grid points have hits; at least 3 are needed",
            xs.len()
        )));
    }
    let g: Vec<f64> = xs.iter().map(|&x| regime.growth(x)).collect();
    let fit = linear_fit(&g, &log_p)?;
    let predicted = xs.iter().map(|&x| tail_asymptote(regime, x)).collect::<Result<_>>()?;
    let target = regime.target_slope();
    Ok(SlopeReport {
        x_grid: xs,
        log_p,
        predicted,
        fitted_slope: fit.slope,
        target_slope: target,
        relative_error: (fit.slope - target).abs() / target.abs(),
        dropped,
    })
}

/// `P̂(Σ_{i ≤ N(Λ)} Z_i ≥ x) / (E[N(Λ)] F̄(x))` per grid point, with the
/// numerator from the single-jump estimator (unit weights).
pub fn subexp_sum_ratio(model: &NetworkModel, x_grid: &[f64], n_reps: usize, rng: &RngStream) -> Result<Vec<f64>> {
    subexp_sum_estimates(model, x_grid, n_reps, rng).map(|v| v.into_iter().map(|(r, _)| r).collect())
}

/// As [`subexp_sum_ratio`], also returning the numerator estimates.
pub fn subexp_sum_estimates(
    model: &NetworkModel,
    x_grid: &[f64],
    n_reps: usize,
    rng: &RngStream,
) -> Result<Vec<(f64, TailEstimate)>> {
    model.validate()?;
    check_reps(n_reps)?;
    if !model.fading.is_subexponential() {
        return Err(Error::Incompatible(format!(
            "sum-tail ratio needs subexponential fading, got {}",
            model.fading.kind()
        )));
    }
    if x_grid.is_empty() || x_grid.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return domain("x grid must be nonempty and positive");
    }
    let mean_n = palm_mean_count(model.beta, &model.window)?;
    if !(mean_n > 0.0) {
        return Err(Error::InsufficientData("expected count E[N] is zero".into()));
    }
    let fading = model.fading;
    x_grid
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let split = x / 2.0;
            let values = replicate(n_reps, &rng.substream(k as u64), |s| {
                let n = window_weights(model, s)?.len();
                let ones = vec![1.0; n];
                let z = fading.sample_n(n, s);
                Ok(single_jump_term(&ones, &z, x, split, &fading))
            })?;
            let mut e = TailEstimate::from_samples(&values, Estimator::SingleJump);
            e.diagnostics.insert("split".into(), split);
            e.diagnostics.insert("mean_count".into(), mean_n);
            Ok((e.probability / (mean_n * fading.survival(x)), e))
        })
        .collect()
}

/// Lower-bound constructions of `P(ε I_Λ > x)` next to a crude estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominatingProbe {
    /// Crude estimate of `P(ε I_Λ > x)`.
    pub p_joint: TailEstimate,
    /// `P̂(N(b(y,r)°) ≥ n) · P(each of n marks is large enough)`.
    pub p_block: TailEstimate,
    /// `P̂(N(b(y,r)°) ≥ 1) · P(Z > R^α x / ε)`.
    pub p_single: TailEstimate,
    pub block_n: u64,
    pub radius: f64,
}

impl DominatingProbe {
    /// `lower ≤ p_joint` within `k` combined standard errors.
    pub fn holds(&self, lower: &TailEstimate, k: f64) -> bool {
        lower.probability <= self.p_joint.probability + k * lower.stderr.hypot(self.p_joint.stderr)
    }
}

/// Relative margin `δ` for bounded fading blocks.
pub const BOUNDED_BLOCK_DELTA: f64 = 0.2;

/// Estimates `P(ε I_Λ > x)` together with the block and single-point lower
/// bounds built on `b(y, r)`, `r = min(depth(y)/2, 0.9 R)`.
///
/// The block size is `n_override` when given (must be ≥ 1); otherwise it
/// follows the fading: Weibull uses the proof's `n` (at least 1), bounded
/// uses `⌊R^α x/((1−δ)Bε)⌋ + 1`, heavier tails use 1.
pub fn dominating_event_probe(
    model: &NetworkModel,
    x: f64,
    eps: f64,
    n_reps: usize,
    n_override: Option<u64>,
    rng: &RngStream,
) -> Result<DominatingProbe> {
    model.validate()?;
    check_reps(n_reps)?;
    if !(x.is_finite() && x > 0.0 && eps.is_finite() && eps > 0.0) {
        return domain("x and eps must be finite and positive");
    }
    let depth = model.window.depth(model.receiver);
    let radius = (0.5 * depth).min(0.9 * model.atten_r);
    if !(radius > 1e-9 * model.window.radius) {
        return Err(Error::Precondition(format!(
            "receiver at depth {depth} leaves no room for the probe disk"
        )));
    }
    let ra = model.atten_r.powf(model.atten_alpha);
    let level = ra * x / eps;
    let (block_n, mark_prob) = match (n_override, model.fading) {
        (Some(0), _) => return Err(Error::Precondition("block size n must be at least 1".into())),
        (Some(n), FadingSpec::Bounded { sup, .. }) if n as f64 * (1.0 - BOUNDED_BLOCK_DELTA) * sup <= level => {
            return Err(Error::Precondition(format!("block size {n} too small to exceed the level")));
        }
        (Some(n), FadingSpec::Bounded { sup, .. }) => (n, model.fading.survival((1.0 - BOUNDED_BLOCK_DELTA) * sup)),
        (Some(n), _) => (n, model.fading.survival(level / n as f64)),
        (None, FadingSpec::Bounded { sup, .. }) => {
            let n = (level / ((1.0 - BOUNDED_BLOCK_DELTA) * sup)).floor() as u64 + 1;
            (n, model.fading.survival((1.0 - BOUNDED_BLOCK_DELTA) * sup))
        }
        (None, FadingSpec::WeibullSuper { .. }) => {
            let regime = LdpRegime::new(RegimeKind::WeibullSuper, model.fading, model.atten_r, model.atten_alpha)?;
            let n = if eps < 1.0_f64.min(x) { proof_constants(&regime, x, eps)?.block_n.max(1) } else { 1 };
            (n, model.fading.survival(level / n as f64))
        }
        (None, _) => (1, model.fading.survival(level)),
    };
    let probe = Disk::new(model.receiver, radius)?;
    let threshold = x / eps;
    let fading = model.fading;
    let rows: Vec<(f64, usize)> = (0..n_reps as u64)
        .into_par_iter()
        .map(|k| {
            let mut s = rng.substream(k);
            let pts: Vec<PlanarPoint> =
                thinned_points(model.beta, model.sampling_radius(), true, DEFAULT_STALL_CAP, &mut s)?
                    .into_iter()
                    .filter(|p| model.window.contains(*p))
                    .collect();
            let mut terms: Vec<f64> = pts.iter().map(|p| model.attenuation_at(*p) * fading.sample(&mut s)).collect();
            let hit = (ordered_sum(&mut terms) > threshold) as u8 as f64;
            Ok((hit, pts.iter().filter(|p| probe.contains_interior(**p)).count()))
        })
        .collect::<Result<_>>()?;
    let joint: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let block: Vec<f64> = rows.iter().map(|r| (r.1 as u64 >= block_n) as u8 as f64).collect();
    let single: Vec<f64> = rows.iter().map(|r| (r.1 >= 1) as u8 as f64).collect();
    let scale = |counts: &[f64], factor: f64| {
        let c = TailEstimate::from_samples(counts, Estimator::Crude);
        let mut e = TailEstimate::exact(c.probability * factor, Estimator::Crude);
        e.stderr = c.stderr * factor;
        e.n_reps = c.n_reps;
        e.ci95 = (c.ci95.0 * factor, c.ci95.1 * factor);
        e.diagnostics.insert("count_probability".into(), c.probability);
        e.diagnostics.insert("mark_probability".into(), factor);
        e
    };
    Ok(DominatingProbe {
        p_joint: TailEstimate::from_samples(&joint, Estimator::Crude),
        p_block: scale(&block, mark_prob.powi(block_n as i32)),
        p_single: scale(&single, fading.survival(level)),
        block_n,
        radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{minimize_chernoff, poisson_sf};
    use crate::stats::Moments;

    fn model(fading: FadingSpec) -> NetworkModel {
        NetworkModel::new(
            1.0,
            Disk::centered(2.0).unwrap(),
            PlanarPoint::new(0.5, 0.0),
            1.0,
            4.0,
            fading,
            0.1,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn zero_level_is_certain() {
        let m = model(FadingSpec::exponential(1.0).unwrap());
        for est in [Estimator::Crude, Estimator::Tilted, Estimator::SingleJump] {
            let e = estimate_interference_tail(&m, 0.0, 10, est, &RngStream::new(1, 0)).unwrap();
            assert_eq!(e.probability, 1.0);
        }
    }

    #[test]
    fn incompatible_pairings() {
        let m = model(FadingSpec::pareto(2.0).unwrap());
        let e = estimate_interference_tail(&m, 1.0, 10, Estimator::Tilted, &RngStream::new(1, 0));
        assert!(matches!(e, Err(Error::Incompatible(_))));
        let m = model(FadingSpec::bounded(1.0).unwrap());
        let e = estimate_interference_tail(&m, 1.0, 10, Estimator::SingleJump, &RngStream::new(1, 0));
        assert!(matches!(e, Err(Error::Incompatible(_))));
        assert!(estimate_interference_tail(&m, 1.0, 0, Estimator::Crude, &RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn tilt_zero_is_bit_identical_to_crude() {
        let m = model(FadingSpec::exponential(1.0).unwrap());
        let opts = EstimatorOptions { tilt: Some(0.0), split: None };
        let r = RngStream::new(9, 0);
        let a = estimate_interference_tail(&m, 1.5, 2000, Estimator::Crude, &r).unwrap();
        let b = estimate_interference_tail_with(&m, 1.5, 2000, Estimator::Tilted, &opts, &r).unwrap();
        assert_eq!(a.probability.to_bits(), b.probability.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }

    #[test]
    fn reproducible_for_fixed_seed() {
        let m = model(FadingSpec::weibull_super(1.0, 2.0).unwrap());
        let r = RngStream::new(3, 1);
        let a = estimate_interference_tail(&m, 2.0, 3000, Estimator::Tilted, &r).unwrap();
        let b = estimate_interference_tail(&m, 2.0, 3000, Estimator::Tilted, &r).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tilted_agrees_with_crude_exponential() {
        let m = model(FadingSpec::exponential(1.0).unwrap());
        let x = 4.0;
        let c = estimate_interference_tail(&m, x, 40_000, Estimator::Crude, &RngStream::new(5, 0)).unwrap();
        let t = estimate_interference_tail(&m, x, 40_000, Estimator::Tilted, &RngStream::new(6, 0)).unwrap();
        let se = c.stderr.hypot(t.stderr);
        assert!((c.probability - t.probability).abs() < 3.5 * se, "{c:?} {t:?}");
        assert!(t.stderr < c.stderr);
    }

    #[test]
    fn single_jump_agrees_with_crude() {
        for fading in [FadingSpec::pareto(2.0).unwrap(), FadingSpec::exponential(1.0).unwrap()] {
            let m = model(fading);
            let x = 3.0;
            let c = estimate_interference_tail(&m, x, 40_000, Estimator::Crude, &RngStream::new(7, 0)).unwrap();
            let s = estimate_interference_tail(&m, x, 40_000, Estimator::SingleJump, &RngStream::new(8, 0)).unwrap();
            let se = c.stderr.hypot(s.stderr);
            assert!((c.probability - s.probability).abs() < 3.5 * se, "{c:?} {s:?}");
        }
    }

    #[test]
    fn single_jump_term_limits() {
        let f = FadingSpec::pareto(2.0).unwrap();
        let a = [1.0, 0.5, 0.25];
        let z = [0.4, 3.0, 1.0];
        // infinite split: crude indicator
        assert_eq!(single_jump_term(&a, &z, 1.0, f64::INFINITY, &f), 1.0);
        assert_eq!(single_jump_term(&a, &z, 5.0, f64::INFINITY, &f), 0.0);
        // no terms
        assert_eq!(single_jump_term(&[], &[], 1.0, 0.5, &f), 0.0);
        // one term: exact survival
        assert!((single_jump_term(&[0.5], &[0.1], 2.0, 1.0, &f) - f.survival(4.0)).abs() < 1e-15);
    }

    #[test]
    fn count_tail_matches_sampling() {
        let restriction = DiskRestriction::ginibre(2.0).unwrap();
        let root = RngStream::new(12, 0);
        let counts: Vec<usize> = (0..6000u64)
            .into_par_iter()
            .map(|k| thinned_points(1.0, 2.0, false, DEFAULT_STALL_CAP, &mut root.substream(k)).unwrap().len())
            .collect();
        for m in [2u64, 4, 6] {
            let exact = estimate_count_tail(&restriction, m);
            let hits: Vec<f64> = counts.iter().map(|&c| (c as u64 >= m) as u8 as f64).collect();
            let mc = Moments::from_slice(&hits);
            assert!((mc.mean - exact.probability).abs() < 3.5 * mc.stderr(), "m={m}");
            assert_eq!(exact.stderr, 0.0);
            assert!(exact.diagnostics.contains_key("exact_spectral"));
        }
        assert_eq!(estimate_count_tail(&restriction, 0).probability, 1.0);
    }

    #[test]
    fn count_tail_beats_poisson_at_matched_mean() {
        let restriction = DiskRestriction::ginibre(1.0).unwrap();
        let g = estimate_count_tail(&restriction, 20).log_probability;
        let p = poisson_sf(1.0, 20).ln();
        assert!(g / p > 5.0, "{g} vs {p}");
    }

    #[test]
    fn short_grid_rejected() {
        let m = model(FadingSpec::exponential(1.0).unwrap());
        let regime = LdpRegime::from_fading(m.fading, 1.0, 4.0).unwrap();
        let r = speed_regression(&m, &regime, &[1.0, 2.0], 10, Estimator::Crude, &RngStream::new(0, 0));
        assert!(matches!(r, Err(Error::InsufficientData(_))));
    }

    #[test]
    fn estimates_monotone_in_x() {
        let m = model(FadingSpec::bounded(2.0).unwrap());
        let r = RngStream::new(4, 0);
        let grid = [0.5, 1.0, 1.5, 2.0, 3.0];
        let e: Vec<TailEstimate> =
            grid.iter().map(|&x| estimate_interference_tail(&m, x, 5000, Estimator::Crude, &r).unwrap()).collect();
        for w in e.windows(2) {
            assert!(w[1].probability <= w[0].probability + 3.0 * (w[0].stderr + w[1].stderr));
        }
    }

    #[test]
    fn estimate_below_chernoff_bound() {
        let m = model(FadingSpec::weibull_super(1.0, 2.0).unwrap());
        let thetas: Vec<f64> = (1..=200).map(|k| 0.05 * k as f64).collect();
        for x in [2.0, 3.0, 4.0] {
            let e = estimate_interference_tail(&m, x, 20_000, Estimator::Crude, &RngStream::new(2, 0)).unwrap();
            let (_, b) = minimize_chernoff(&m, x, 1.0, &thetas).unwrap();
            assert!(e.probability <= b + 3.0 * e.stderr, "x={x}: {} > {b}", e.probability);
        }
    }

    #[test]
    fn probe_preconditions_and_ordering() {
        let m = model(FadingSpec::exponential(1.0).unwrap());
        let r = RngStream::new(1, 0);
        assert!(matches!(dominating_event_probe(&m, 1.0, 0.5, 100, Some(0), &r), Err(Error::Precondition(_))));
        let p = dominating_event_probe(&m, 1.0, 0.5, 20_000, None, &r).unwrap();
        assert_eq!(p.block_n, 1);
        assert!(p.holds(&p.p_block, 3.0) && p.holds(&p.p_single, 3.0));
        assert!(p.radius > 0.0 && p.radius <= 0.9);
    }

    #[test]
    fn tail_estimate_invariants() {
        let e = TailEstimate::from_samples(&[0.0, 0.0, 0.0], Estimator::Crude);
        assert!(e.is_zero_hit());
        assert_eq!(e.log_probability, f64::NEG_INFINITY);
        let e = TailEstimate::from_samples(&[1.0, 0.0, 1.0, 0.0], Estimator::Crude);
        assert!(e.ci95.0 <= e.probability && e.probability <= e.ci95.1);
    }
}
