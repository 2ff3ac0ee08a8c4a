//! Fixed-seed validation suite. Each check compares an observed quantity
//! against its exact oracle or tolerance and times itself.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimation::{
    dominating_event_probe, estimate_count_tail, estimate_interference_tail, speed_regression,
    subexp_sum_estimates, Estimator,
};
use crate::fading::FadingSpec;
use crate::geometry::{Disk, PlanarPoint};
use crate::interference::NetworkModel;
use crate::rates::{poisson_comparison, proof_constants, rate, speed, tail_asymptote, LdpRegime};
use crate::sampling::{
    kostlan_validation, sample_beta_ginibre, sample_complex_gaussian, sample_ginibre_disk,
    sample_palm_beta_ginibre, RngStream,
};
use crate::spectral::{
    count_distribution, eigenvalues, minimize_chernoff, palm_mean_count, poisson_sf, trace_bound,
    DiskRestriction, DEFAULT_TOL,
};
use crate::stats::{chi_square_gof, chi_square_two_sample, Moments};

/// Replication budgets for the Monte Carlo checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub count_reps: usize,
    pub kostlan_reps: usize,
    pub variance_reps: usize,
    pub slope_reps: usize,
    pub sum_reps: usize,
    pub chernoff_reps: usize,
    pub probe_reps: usize,
}

impl Budget {
    /// Replication counts of the acceptance criteria.
    pub fn full() -> Self {
        Self {
            count_reps: 10_000,
            kostlan_reps: 5_000,
            variance_reps: 10_000,
            slope_reps: 100_000,
            sum_reps: 100_000,
            chernoff_reps: 100_000,
            probe_reps: 20_000,
        }
    }

    /// Reduced budget for smoke runs.
    pub fn quick() -> Self {
        Self {
            count_reps: 4_000,
            kostlan_reps: 2_000,
            variance_reps: 10_000,
            slope_reps: 30_000,
            sum_reps: 30_000,
            chernoff_reps: 20_000,
            probe_reps: 5_000,
        }
    }
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub observed: String,
    pub required: String,
    pub elapsed: Duration,
    pub time_limit: Duration,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {}: observed {}; required {}; {:.2}s (limit {}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.observed,
            self.required,
            self.elapsed.as_secs_f64(),
            self.time_limit.as_secs()
        )
    }
}

struct Outcome {
    passed: bool,
    observed: String,
    required: String,
}

fn timed(id: u32, name: &str, limit_s: u64, f: impl FnOnce() -> Result<Outcome>) -> CheckResult {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let time_limit = Duration::from_secs(limit_s);
    let (passed, observed, required) = match out {
        Ok(o) => (o.passed, o.observed, o.required),
        Err(e) => (false, format!("error: {e}"), "no error".into()),
    };
    CheckResult {
        id,
        name: name.into(),
        passed: passed && elapsed <= time_limit,
        observed,
        required,
        elapsed,
        time_limit,
    }
}

fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn counts_of(n: usize, seed: u64, f: impl Fn(&mut RngStream) -> Result<usize> + Sync) -> Result<Vec<usize>> {
    let root = RngStream::new(seed, 0);
    (0..n as u64).into_par_iter().map(|k| f(&mut root.substream(k))).collect()
}

/// Trace identity and eigenvalue monotonicity.
pub fn spectral_exactness() -> CheckResult {
    timed(1, "spectral exactness", 1, || {
        let mut worst: f64 = 0.0;
        let mut decreasing = true;
        for r in [0.5, 1.0, 2.0, 5.0] {
            let res = DiskRestriction::ginibre(r)?;
            worst = worst.max((trace_bound(&res) - r * r).abs());
            let s = eigenvalues(&res, DEFAULT_TOL)?;
            decreasing &= s.values.windows(2).all(|w| w[1] < w[0]);
        }
        Ok(Outcome {
            passed: worst < 1e-9 && decreasing,
            observed: format!("max |trace - r^2| = {worst:.3e}, strictly decreasing = {decreasing}"),
            required: "error < 1e-9 and strictly decreasing".into(),
        })
    })
}

/// Sampled counts against the exact Poisson-binomial law.
pub fn count_law(budget: &Budget, seed: u64) -> CheckResult {
    timed(2, "count-law oracle", 120, || {
        let mut ps = Vec::new();
        for (k, (beta, r)) in [(1.0, 1.0), (1.0, 2.0), (0.5, 1.0), (0.5, 2.0)].into_iter().enumerate() {
            let n = counts_of(budget.count_reps, seed + k as u64, |s| {
                Ok(if beta == 1.0 { sample_ginibre_disk(r, s)?.len() } else { sample_beta_ginibre(beta, r, s)?.len() })
            })?;
            let res = DiskRestriction::ginibre(r)?.with_beta(beta)?;
            let pmf = count_distribution(&res, 60)?;
            ps.push(chi_square_gof(&n, &pmf)?.p_value);
        }
        Ok(Outcome {
            passed: ps.iter().all(|&p| p > 0.01),
            observed: format!("chi-square p = {} for (beta, r) = (1,1), (1,2), (0.5,1), (0.5,2)", fmt_list(&ps)),
            required: "every p > 0.01".into(),
        })
    })
}

/// Palm sample plus a Gaussian point against the thinned scaled process.
pub fn palm_identity(budget: &Budget, seed: u64) -> CheckResult {
    timed(3, "palm identity", 180, || {
        let window = 1.5;
        let mut ps = Vec::new();
        for (k, beta) in [0.25, 1.0].into_iter().enumerate() {
            let base = seed + 10 * k as u64;
            let palm = counts_of(budget.count_reps, base, |s| {
                let n = sample_palm_beta_ginibre(beta, window, s)?.len();
                let g = sample_complex_gaussian(s).scale(beta.sqrt());
                let added = rand::Rng::random::<f64>(s) < beta && g.norm() <= window;
                Ok(n + added as usize)
            })?;
            let thinned = counts_of(budget.count_reps, base + 1, |s| Ok(sample_beta_ginibre(beta, window, s)?.len()))?;
            ps.push(chi_square_two_sample(&palm, &thinned)?.p_value);
        }
        Ok(Outcome {
            passed: ps.iter().all(|&p| p > 0.01),
            observed: format!("two-sample chi-square p = {} for beta = 0.25, 1", fmt_list(&ps)),
            required: "every p > 0.01".into(),
        })
    })
}

/// Smallest squared moduli against independent Gamma variables.
pub fn kostlan(budget: &Budget, seed: u64) -> CheckResult {
    timed(4, "kostlan radii", 120, || {
        let checks = kostlan_validation(6.0, budget.kostlan_reps, &[1, 2], &RngStream::new(seed, 0))?;
        let ps: Vec<f64> = checks.iter().map(|c| c.p_value).collect();
        Ok(Outcome {
            passed: ps.iter().all(|&p| p > 0.01),
            observed: format!("KS p = {} for orders 1, 2", fmt_list(&ps)),
            required: "every p > 0.01".into(),
        })
    })
}

/// Count variance at radius 5 against the exact value and the Poisson one.
pub fn count_variance(budget: &Budget, seed: u64) -> CheckResult {
    timed(5, "sub-poissonian counts", 60, || {
        let n = counts_of(budget.variance_reps, seed, |s| Ok(sample_ginibre_disk(5.0, s)?.len()))?;
        let m = Moments::from_counts(&n);
        let seq = eigenvalues(&DiskRestriction::ginibre(5.0)?, DEFAULT_TOL)?;
        let exact: f64 = seq.values.iter().map(|k| k * (1.0 - k)).sum();
        let rel = (m.variance - exact).abs() / exact;
        Ok(Outcome {
            passed: rel < 0.05 && m.variance < 0.6 * 25.0,
            observed: format!("variance {:.4} vs exact {exact:.4} (rel. err {rel:.4}); Poisson 25", m.variance),
            required: "rel. err < 0.05 and variance < 15".into(),
        })
    })
}

/// `−log P(N ≥ m) / (½ m² log m)` for `m` = 5, 10, 20, 40.
pub fn count_tail_ratios(restriction: &DiskRestriction) -> Vec<f64> {
    [5u64, 10, 20, 40]
        .iter()
        .map(|&m| {
            let mf = m as f64;
            -estimate_count_tail(restriction, m).log_probability / (0.5 * mf * mf * mf.ln())
        })
        .collect()
}

/// Count-tail trend of the reduced Palm process in the unit disk, with the
/// Poisson contrast at matched mean.
pub fn count_tail_trend() -> CheckResult {
    timed(6, "count-tail trend", 10, || {
        let palm = DiskRestriction::ginibre(1.0)?.with_palm(true);
        let ratios = count_tail_ratios(&palm);
        let monotone = ratios.windows(2).all(|w| w[1] > w[0]) || ratios.windows(2).all(|w| w[1] < w[0]);
        let positive = ratios.iter().all(|&r| r > 0.0 && r.is_finite());
        let mean = trace_bound(&palm);
        let contrast = estimate_count_tail(&palm, 20).log_probability / poisson_sf(mean, 20).ln();
        let plain = count_tail_ratios(&DiskRestriction::ginibre(1.0)?);
        Ok(Outcome {
            passed: monotone && positive && contrast >= 5.0,
            observed: format!(
                "palm ratios {} at m = 5, 10, 20, 40 (monotone = {monotone}); log-tail contrast at m = 20 \
                 against Poisson mean {mean:.4}: {contrast:.3}; full-disk ratios {}",
                fmt_list(&ratios),
                fmt_list(&plain)
            ),
            required: "positive, monotone, contrast >= 5".into(),
        })
    })
}

fn reference_model(fading: FadingSpec, beta: f64) -> Result<NetworkModel> {
    NetworkModel::new(beta, Disk::centered(2.0)?, PlanarPoint::new(0.5, 0.0), 1.0, 4.0, fading, 0.1, 1.0)
}

/// Grid of the exponential slope check.
pub const EXPONENTIAL_SLOPE_GRID: [f64; 6] = [4.0, 6.0, 8.0, 10.0, 12.0, 14.0];

/// Tilted-estimator slope of `log P(I ≥ x)` under exponential fading.
pub fn exponential_slope(budget: &Budget, seed: u64) -> CheckResult {
    timed(7, "exponential-fading slope", 600, || {
        let fading = FadingSpec::exponential(1.0)?;
        let model = reference_model(fading, 1.0)?;
        let regime = LdpRegime::from_fading(fading, 1.0, 4.0)?;
        let report = speed_regression(
            &model,
            &regime,
            &EXPONENTIAL_SLOPE_GRID,
            budget.slope_reps,
            Estimator::Tilted,
            &RngStream::new(seed, 0),
        )?;
        let p: Vec<f64> = report.log_p.iter().map(|l| l.exp()).collect();
        Ok(Outcome {
            passed: report.relative_error <= 0.2 && report.dropped.is_empty(),
            observed: format!(
                "fitted slope {:.4} (target {}), rel. err {:.4}; p-hat {}",
                report.fitted_slope,
                report.target_slope,
                report.relative_error,
                fmt_list(&p)
            ),
            required: "rel. err <= 0.20 over a grid spanning 1e-2..1e-6".into(),
        })
    })
}

/// Levels where `E[N] F̄(x)` equals 1e-2, 1e-3 and 1e-4.
pub fn pareto_sum_grid(model: &NetworkModel) -> Result<Vec<f64>> {
    let FadingSpec::Pareto { c } = model.fading else {
        return Err(crate::Error::Incompatible("pareto fading expected".into()));
    };
    let mean_n = palm_mean_count(model.beta, &model.window)?;
    Ok([1e-2, 1e-3, 1e-4].iter().map(|t: &f64| (t / mean_n).powf(-1.0 / c) - 1.0).collect())
}

/// Single-jump sum-tail ratio under Pareto fading.
pub fn subexp_sum(budget: &Budget, seed: u64) -> CheckResult {
    timed(8, "subexponential single jump", 300, || {
        let model = reference_model(FadingSpec::pareto(2.0)?, 1.0)?;
        let grid = pareto_sum_grid(&model)?;
        let rows = subexp_sum_estimates(&model, &grid, budget.sum_reps, &RngStream::new(seed, 0))?;
        let ratios: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let deepest = *ratios.last().unwrap();
        Ok(Outcome {
            passed: (0.8..=1.3).contains(&deepest),
            observed: format!("ratios {} at x = {}", fmt_list(&ratios), fmt_list(&grid)),
            required: "deepest ratio in [0.8, 1.3]".into(),
        })
    })
}

/// Levels of the Chernoff check, where the minimized bound is below one.
pub const CHERNOFF_GRID: [f64; 5] = [4.0, 4.5, 5.0, 5.5, 6.0];

/// Chernoff bound against crude estimates under Weibull fading.
pub fn chernoff_dominance(budget: &Budget, seed: u64) -> CheckResult {
    timed(9, "chernoff dominance", 300, || {
        let model = reference_model(FadingSpec::weibull_super(1.0, 2.0)?, 0.5)?;
        let thetas: Vec<f64> = (1..=400).map(|k| 0.05 * k as f64).collect();
        let mut lines = Vec::new();
        let mut ok = true;
        for (k, x) in CHERNOFF_GRID.into_iter().enumerate() {
            let e = estimate_interference_tail(&model, x, budget.chernoff_reps, Estimator::Crude, &RngStream::new(seed, k as u64))?;
            let (_, bound) = minimize_chernoff(&model, x, 1.0, &thetas)?;
            let upper = e.probability + 3.0 * e.stderr;
            ok &= bound >= upper;
            lines.push(format!("x={x}: bound {bound:.3e} vs p+3se {upper:.3e}"));
        }
        Ok(Outcome {
            passed: ok,
            observed: lines.join("; "),
            required: "bound >= p-hat + 3 se at every x".into(),
        })
    })
}

fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * b.abs()
}

/// Closed-form rates, speeds and asymptotes.
pub fn rate_table() -> CheckResult {
    timed(10, "rate-function table", 1, || {
        let e = std::f64::consts::E;
        let bounded = |b: f64, r: f64, a: f64| LdpRegime::from_fading(FadingSpec::bounded(b).unwrap(), r, a);
        let expo = LdpRegime::from_fading(FadingSpec::exponential(1.0)?, 1.0, 4.0)?;
        let weib = LdpRegime::from_fading(FadingSpec::weibull_super(1.0, 2.0)?, 1.0, 4.0)?;
        let par2 = LdpRegime::from_fading(FadingSpec::pareto(2.0)?, 1.0, 4.0)?;
        let par1 = LdpRegime::from_fading(FadingSpec::pareto(1.0)?, 1.5, 3.0)?;
        let b_r1a2 = bounded(2.0, 1.0, 2.0001)?;
        let b1 = bounded(1.0, 1.0, 3.0)?;
        let pc = proof_constants(&weib, 1.0, 0.1)?;
        let checks: Vec<(&str, f64, f64)> = vec![
            // R=1 makes I_1 independent of alpha.
            ("I1 bounded B=2 x=2", rate(&b_r1a2, 2.0)?, 0.5),
            ("I3 exponential x=3", rate(&expo, 3.0)?, 3.0),
            ("I2 weibull x=1", rate(&weib, 1.0)?, 0.5 * 2f64.cbrt() * 3f64.powf(2.0 / 3.0)),
            ("I4 x=0", rate(&par2, 0.0)?, 0.0),
            ("speed bounded eps=1/e", speed(&b1, 1.0 / e)?, e * e),
            ("speed exponential eps=0.01", speed(&expo, 0.01)?, 100.0),
            ("speed pareto(2) eps=0.01", speed(&par2, 0.01)?, 2.0 * 101f64.ln()),
            ("asymptote exponential x=10", tail_asymptote(&expo, 10.0)?, -10.0),
            ("asymptote bounded B=1 x=e", tail_asymptote(&b1, e)?, -0.5 * e * e),
            ("asymptote pareto(1) x=7", tail_asymptote(&par1, 7.0)?, -(8f64.ln())),
            ("poisson bounded B=1", poisson_comparison(&b1)?, -1.0),
            ("poisson weibull c=1 g=2", poisson_comparison(&weib)?, -2.0),
            ("kappa_opt", pc.kappa_opt, 1.5f64.cbrt()),
            ("gamma_prime", pc.gamma_prime, 0.25),
        ];
        let bad: Vec<String> = checks
            .iter()
            .filter(|(_, got, want)| !rel_eq(*got, *want, 1e-12))
            .map(|(n, got, want)| format!("{n}: {got} vs {want}"))
            .collect();
        let w = LdpRegime::from_fading(FadingSpec::weibull_super(1.0, 1.001)?, 1.0, 4.0)?;
        let gap = (w.target_slope() - poisson_comparison(&w)?).abs() / poisson_comparison(&w)?.abs();
        Ok(Outcome {
            passed: bad.is_empty() && gap < 0.02,
            observed: format!(
                "{} of {} closed forms match; weibull constants differ by {:.3}% at gamma = 1.001{}",
                checks.len() - bad.len(),
                checks.len(),
                100.0 * gap,
                if bad.is_empty() { String::new() } else { format!(" (mismatches: {})", bad.join("; ")) }
            ),
            required: "all within 1e-12 relative; gap < 2%".into(),
        })
    })
}

/// Lower-bound constructions against crude estimates.
pub fn lower_bound_ordering(budget: &Budget, seed: u64) -> CheckResult {
    timed(11, "lower-bound ordering", 600, || {
        let mut ok = true;
        let mut worst: f64 = f64::NEG_INFINITY;
        let mut runs = 0;
        let cases = [
            (FadingSpec::exponential(1.0)?, [0.5, 1.0, 2.0]),
            (FadingSpec::bounded(1.0)?, [0.25, 0.5, 1.0]),
        ];
        for (f, xs) in cases {
            let model = reference_model(f, 1.0)?;
            for x in xs {
                for eps in [0.5, 0.75, 1.0] {
                    let p = dominating_event_probe(&model, x, eps, budget.probe_reps, None, &RngStream::new(seed, runs))?;
                    runs += 1;
                    for lower in [&p.p_block, &p.p_single] {
                        ok &= p.holds(lower, 3.0);
                        let se = lower.stderr.hypot(p.p_joint.stderr);
                        if se > 0.0 {
                            worst = worst.max((lower.probability - p.p_joint.probability) / se);
                        }
                    }
                }
            }
        }
        Ok(Outcome {
            passed: ok,
            observed: format!("{runs} probes; largest (lower - joint)/se = {worst:.3}"),
            required: "every lower bound <= joint + 3 se".into(),
        })
    })
}

/// Runs checks 1–11 with the given budget.
pub fn run_suite(budget: &Budget, seed: u64, mut report: impl FnMut(&CheckResult)) -> Vec<CheckResult> {
    let checks: Vec<Box<dyn Fn() -> CheckResult>> = vec![
        Box::new(spectral_exactness),
        Box::new(move || count_law(budget, seed)),
        Box::new(move || palm_identity(budget, seed + 100)),
        Box::new(move || kostlan(budget, seed + 200)),
        Box::new(move || count_variance(budget, seed + 300)),
        Box::new(count_tail_trend),
        Box::new(move || exponential_slope(budget, seed + 400)),
        Box::new(move || subexp_sum(budget, seed + 500)),
        Box::new(move || chernoff_dominance(budget, seed + 600)),
        Box::new(rate_table),
        Box::new(move || lower_bound_ordering(budget, seed + 700)),
    ];
    checks
        .into_iter()
        .map(|c| {
            let r = c();
            report(&r);
            r
        })
        .collect()
}

/// Seed used by the suite.
pub const SUITE_SEED: u64 = 20_240_611;
