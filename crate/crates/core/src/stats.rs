//! Small statistical toolbox: compensated summation, sample moments,
//! goodness-of-fit tests and least squares.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::geometry::PlanarPoint;

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// Sample mean and unbiased variance (two-pass).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
}

impl Moments {
    pub fn from_slice(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { n, mean: f64::NAN, variance: f64::NAN };
        }
        let mean = compensated_sum(values.iter().copied()) / n as f64;
        let variance = if n > 1 {
            compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1) as f64
        } else {
            0.0
        };
        Self { n, mean, variance }
    }

    pub fn from_counts(counts: &[usize]) -> Self {
        let values: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        Self::from_slice(&values)
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            (self.variance / self.n as f64).sqrt()
        }
    }
}

/// Outcome of a hypothesis test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    pub dof: f64,
    pub p_value: f64,
}

fn chi2_sf(stat: f64, dof: usize) -> f64 {
    let dist = ChiSquared::new(dof as f64).expect("dof > 0");
    dist.sf(stat)
}

/// Merges adjacent bins until each has at least `min_expected`; a short
/// remainder at the right end is folded into the previous bin.
fn pool_bins(expected: &[f64], observed: &[Vec<f64>], min_expected: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let groups = observed.len();
    let mut e_out: Vec<f64> = Vec::new();
    let mut o_out: Vec<Vec<f64>> = vec![Vec::new(); groups];
    let mut e_acc = 0.0;
    let mut o_acc = vec![0.0; groups];
    for (k, &e) in expected.iter().enumerate() {
        e_acc += e;
        for g in 0..groups {
            o_acc[g] += observed[g][k];
        }
        if e_acc >= min_expected {
            e_out.push(e_acc);
            for g in 0..groups {
                o_out[g].push(o_acc[g]);
                o_acc[g] = 0.0;
            }
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc.iter().any(|&o| o > 0.0) {
        if let Some(last) = e_out.last_mut() {
            *last += e_acc;
            for g in 0..groups {
                *o_out[g].last_mut().unwrap() += o_acc[g];
            }
        } else {
            e_out.push(e_acc);
            for g in 0..groups {
                o_out[g].push(o_acc[g]);
            }
        }
    }
    (e_out, o_out)
}

/// Pearson goodness-of-fit of integer-valued samples against a pmf on
/// `0..pmf.len()`; any mass beyond the table (and any sample beyond it) is
/// collected in a final tail bin.
pub fn chi_square_gof(samples: &[usize], pmf: &[f64]) -> Result<TestOutcome> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::InsufficientData("no samples".into()));
    }
    let k = pmf.len();
    let mut observed = vec![0.0; k + 1];
    for &s in samples {
        observed[s.min(k)] += 1.0;
    }
    let mass: f64 = compensated_sum(pmf.iter().copied());
    let mut expected: Vec<f64> = pmf.iter().map(|p| p * n as f64).collect();
    expected.push((1.0 - mass).max(0.0) * n as f64);

    let (e, o) = pool_bins(&expected, &[observed], 5.0);
    if e.len() < 2 {
        return Err(Error::InsufficientData("fewer than two bins after pooling".into()));
    }
    let stat: f64 = e.iter().zip(&o[0]).map(|(e, o)| (o - e) * (o - e) / e).sum();
    let dof = e.len() - 1;
    Ok(TestOutcome { statistic: stat, dof: dof as f64, p_value: chi2_sf(stat, dof) })
}

/// Two-sample chi-square homogeneity test on integer-valued samples.
pub fn chi_square_two_sample(a: &[usize], b: &[usize]) -> Result<TestOutcome> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    let max = a.iter().chain(b).copied().max().unwrap_or(0);
    let mut oa = vec![0.0; max + 1];
    let mut ob = vec![0.0; max + 1];
    for &v in a {
        oa[v] += 1.0;
    }
    for &v in b {
        ob[v] += 1.0;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let frac_small = na.min(nb) / (na + nb);
    // Pool on combined counts so that the smaller sample expects >= 5 per bin.
    let combined: Vec<f64> = oa.iter().zip(&ob).map(|(x, y)| (x + y) * frac_small).collect();
    let (e, o) = pool_bins(&combined, &[oa, ob], 5.0);
    if e.len() < 2 {
        return Err(Error::InsufficientData("fewer than two bins after pooling".into()));
    }
    let mut stat = 0.0;
    for (a, b) in o[0].iter().zip(&o[1]) {
        let total = a + b;
        let ea = total * na / (na + nb);
        let eb = total * nb / (na + nb);
        if ea > 0.0 {
            stat += (a - ea).powi(2) / ea;
        }
        if eb > 0.0 {
            stat += (b - eb).powi(2) / eb;
        }
    }
    let dof = e.len() - 1;
    Ok(TestOutcome { statistic: stat, dof: dof as f64, p_value: chi2_sf(stat, dof) })
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov test (asymptotic p-value with the
/// usual small-sample correction of the scaling factor).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestOutcome> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let v = a[i].min(b[j]);
        while i < na && a[i] <= v {
            i += 1;
        }
        while j < nb && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na * nb) as f64 / (na + nb) as f64;
    let sq = ne.sqrt();
    let p = kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d);
    Ok(TestOutcome { statistic: d, dof: ne, p_value: p })
}

/// Ordinary least squares fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::Structural("regression inputs differ in length".into()));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData("regression needs at least two points".into()));
    }
    let mx = compensated_sum(x.iter().copied()) / n as f64;
    let my = compensated_sum(y.iter().copied()) / n as f64;
    let sxx = compensated_sum(x.iter().map(|v| (v - mx).powi(2)));
    let sxy = compensated_sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    if sxx <= 0.0 {
        return Err(Error::InsufficientData("regressor has zero spread".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 {
        let rss = compensated_sum(x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)));
        (rss / (n - 2) as f64 / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok(LinearFit { slope, intercept, slope_stderr })
}

/// Binned pair-correlation estimate for a stationary pattern family of
/// known intensity, observed in `b(O, window_radius)`.
///
/// Uses minus-sampling: only points at depth at least `max_distance`
/// serve as reference points, so every annulus around them lies in the
/// window. Returns `(bin_center, g_hat, pair_count)` per bin.
pub fn pair_correlation_estimate(
    patterns: &[Vec<PlanarPoint>],
    window_radius: f64,
    intensity: f64,
    bin_edges: &[f64],
) -> Result<Vec<(f64, f64, usize)>> {
    if bin_edges.len() < 2 || bin_edges.windows(2).any(|w| w[1] <= w[0]) || bin_edges[0] < 0.0 {
        return Err(Error::Domain("bin edges must be increasing and nonnegative".into()));
    }
    let dmax = *bin_edges.last().unwrap();
    if dmax >= window_radius {
        return Err(Error::Domain("largest distance must be below the window radius".into()));
    }
    let nb = bin_edges.len() - 1;
    let mut pairs = vec![0usize; nb];
    let mut references = 0usize;
    for pts in patterns {
        for (i, p) in pts.iter().enumerate() {
            if p.norm() > window_radius - dmax {
                continue;
            }
            references += 1;
            for (j, q) in pts.iter().enumerate() {
                if i == j {
                    continue;
                }
                let d = p.distance(*q);
                if d >= dmax {
                    continue;
                }
                let k = bin_edges.partition_point(|&e| e <= d);
                if k >= 1 && k <= nb {
                    pairs[k - 1] += 1;
                }
            }
        }
    }
    if references == 0 {
        return Err(Error::InsufficientData("no reference points in the inner window".into()));
    }
    Ok((0..nb)
        .map(|k| {
            let (lo, hi) = (bin_edges[k], bin_edges[k + 1]);
            let area = std::f64::consts::PI * (hi * hi - lo * lo);
            let expected = references as f64 * intensity * area;
            (0.5 * (lo + hi), pairs[k] as f64 / expected, pairs[k])
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut v = vec![1e16, 1.0, -1e16];
        v.extend(std::iter::repeat_n(1e-3, 1000));
        assert!((compensated_sum(v) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn moments_of_known_data() {
        let m = Moments::from_slice(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.variance - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn kolmogorov_sf_reference_values() {
        // Standard table: Q_KS(1.36) ~ 0.0494, Q_KS(1.63) ~ 0.0098.
        assert!((kolmogorov_sf(1.36) - 0.0494).abs() < 5e-4);
        assert!((kolmogorov_sf(1.63) - 0.0098).abs() < 3e-4);
    }

    #[test]
    fn ks_identical_samples_do_not_reject() {
        let a: Vec<f64> = (0..500).map(|i| i as f64 / 500.0).collect();
        let out = ks_two_sample(&a, &a).unwrap();
        assert_eq!(out.statistic, 0.0);
        assert_eq!(out.p_value, 1.0);
    }

    #[test]
    fn chi_square_exact_match_has_zero_statistic() {
        let pmf = [0.25, 0.5, 0.25];
        let mut samples = vec![0; 25];
        samples.extend(vec![1; 50]);
        samples.extend(vec![2; 25]);
        let out = chi_square_gof(&samples, &pmf).unwrap();
        assert!(out.statistic.abs() < 1e-12);
        assert!(out.p_value > 0.99);
    }

    #[test]
    fn chi_square_detects_gross_mismatch() {
        let pmf = [0.5, 0.5];
        let samples = vec![0usize; 200];
        assert!(chi_square_gof(&samples, &pmf).unwrap().p_value < 1e-10);
    }

    #[test]
    fn two_sample_chi_square_rejects_shifted() {
        let a: Vec<usize> = (0..1000).map(|i| i % 5).collect();
        let b: Vec<usize> = (0..1000).map(|i| i % 5 + 2).collect();
        assert!(chi_square_two_sample(&a, &b).unwrap().p_value < 1e-10);
        assert!(chi_square_two_sample(&a, &a).unwrap().p_value > 0.99);
    }

    #[test]
    fn linear_fit_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 2.0 * v).collect();
        let fit = linear_fit(&x, &y).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-14);
        assert!((fit.intercept - 3.0).abs() < 1e-14);
    }
}
