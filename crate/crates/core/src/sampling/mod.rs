//! Point-process and fading samplers with deterministic seeding.

mod dpp;
mod pattern;
mod rng;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fading::FadingSpec;
use crate::geometry::{Disk, PlanarPoint};
use crate::stats::{ks_two_sample, TestOutcome};

pub use dpp::DEFAULT_STALL_CAP;
pub use pattern::{PointPattern, ProcessKind};
pub use rng::RngStream;

fn check_radius(radius: f64) -> Result<()> {
    if radius.is_finite() && radius > 0.0 {
        Ok(())
    } else {
        domain(format!("radius must be finite and positive, got {radius}"))
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta <= 1.0 {
        Ok(())
    } else {
        domain(format!("beta must lie in (0,1], got {beta}"))
    }
}

/// Pulls `p` onto the closed disk `b(O, radius)` when rounding pushed it
/// just outside.
fn clamp_into(mut p: PlanarPoint, radius: f64) -> PlanarPoint {
    while p.norm() > radius {
        p = p.scale(1.0 - f64::EPSILON);
    }
    p
}

/// Ginibre points on `b(O, radius)` (`palm` drops the constant
/// eigenfunction), independently thinned with retention `beta` after
/// sampling on `b(O, radius/√β)` and scaled by `√β`.
pub(crate) fn thinned_points<R: Rng + ?Sized>(
    beta: f64,
    radius: f64,
    palm: bool,
    cap: u64,
    rng: &mut R,
) -> Result<Vec<PlanarPoint>> {
    let r2 = radius * radius / beta;
    let base = dpp::sample_disk_dpp(r2, palm as u64, cap, rng)?;
    if beta == 1.0 {
        return Ok(base);
    }
    let s = beta.sqrt();
    Ok(base
        .into_iter()
        .filter(|_| rng.random::<f64>() < beta)
        .map(|p| clamp_into(p.scale(s), radius))
        .collect())
}

/// One realization of the Ginibre process restricted to `b(O, radius)`.
pub fn sample_ginibre_disk(radius: f64, rng: &mut RngStream) -> Result<PointPattern> {
    sample_ginibre_disk_capped(radius, DEFAULT_STALL_CAP, rng)
}

/// As [`sample_ginibre_disk`] with an explicit per-point proposal budget.
pub fn sample_ginibre_disk_capped(radius: f64, cap: u64, rng: &mut RngStream) -> Result<PointPattern> {
    check_radius(radius)?;
    let points = thinned_points(1.0, radius, false, cap, rng)?;
    Ok(PointPattern::new(points, Disk::centered(radius)?, ProcessKind::Ginibre, 1.0, rng.master_seed()))
}

/// One realization of the β-Ginibre process in `b(O, window_radius)`.
pub fn sample_beta_ginibre(beta: f64, window_radius: f64, rng: &mut RngStream) -> Result<PointPattern> {
    check_beta(beta)?;
    check_radius(window_radius)?;
    let points = thinned_points(beta, window_radius, false, DEFAULT_STALL_CAP, rng)?;
    let window = Disk::centered(window_radius)?;
    Ok(PointPattern::new(points, window, ProcessKind::BetaGinibre, beta, rng.master_seed()))
}

/// One realization of the reduced Palm β-Ginibre process at the origin in
/// `b(O, window_radius)`.
pub fn sample_palm_beta_ginibre(beta: f64, window_radius: f64, rng: &mut RngStream) -> Result<PointPattern> {
    check_beta(beta)?;
    check_radius(window_radius)?;
    let points = thinned_points(beta, window_radius, true, DEFAULT_STALL_CAP, rng)?;
    let window = Disk::centered(window_radius)?;
    Ok(PointPattern::new(points, window, ProcessKind::PalmBetaGinibre, beta, rng.master_seed()))
}

pub(crate) fn poisson_points<R: Rng + ?Sized>(radius: f64, intensity: f64, rng: &mut R) -> Vec<PlanarPoint> {
    let mean = intensity * std::f64::consts::PI * radius * radius;
    let n = if mean > 0.0 { Poisson::new(mean).expect("positive mean").sample(rng) as usize } else { 0 };
    (0..n)
        .map(|_| {
            let rho = radius * rng.random::<f64>().sqrt();
            let angle = rng.random::<f64>() * std::f64::consts::TAU;
            clamp_into(PlanarPoint::from_polar(rho, angle), radius)
        })
        .collect()
}

/// Homogeneous Poisson process of the given intensity on `b(O, window_radius)`.
pub fn sample_poisson(window_radius: f64, intensity: f64, rng: &mut RngStream) -> Result<PointPattern> {
    check_radius(window_radius)?;
    if !(intensity.is_finite() && intensity > 0.0) {
        return domain(format!("intensity must be finite and positive, got {intensity}"));
    }
    let points = poisson_points(window_radius, intensity, rng);
    let window = Disk::centered(window_radius)?;
    Ok(PointPattern::new(points, window, ProcessKind::Poisson, 1.0, rng.master_seed()))
}

/// Homogeneous Poisson process on the rectangle `[0, width] × [0, height]`.
pub fn sample_poisson_rect(width: f64, height: f64, intensity: f64, rng: &mut RngStream) -> Result<Vec<PlanarPoint>> {
    check_radius(width)?;
    check_radius(height)?;
    if !(intensity.is_finite() && intensity > 0.0) {
        return domain(format!("intensity must be finite and positive, got {intensity}"));
    }
    let n = Poisson::new(intensity * width * height).expect("positive mean").sample(rng) as usize;
    Ok((0..n).map(|_| PlanarPoint::new(width * rng.random::<f64>(), height * rng.random::<f64>())).collect())
}

/// `n` i.i.d. fading marks.
pub fn sample_fading(spec: &FadingSpec, n: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
    spec.validate()?;
    Ok(spec.sample_n(n, rng))
}

/// Standard complex Gaussian point: density `π^{-1} e^{-|z|²}`.
pub fn sample_complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> PlanarPoint {
    let t = -(1.0 - rng.random::<f64>()).ln();
    PlanarPoint::from_polar(t.sqrt(), rng.random::<f64>() * std::f64::consts::TAU)
}

/// Result of [`kostlan_validation`] for one order statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KostlanCheck {
    pub order: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub sampled: usize,
    pub reference: usize,
}

/// Compares the `order`-th smallest squared modulus of sampled Ginibre
/// patterns on `b(O, radius)` with the same statistic of the set
/// `{Γ_i : Γ_i ≤ radius²}`, `Γ_i ~ Gamma(i, 1)` independent, by a
/// two-sample Kolmogorov–Smirnov test.
///
/// Requires `radius² ≥ i + 6√i` for every tested order `i`.
pub fn kostlan_validation(
    radius: f64,
    n_reps: usize,
    orders: &[usize],
    rng: &RngStream,
) -> Result<Vec<KostlanCheck>> {
    check_radius(radius)?;
    if n_reps == 0 {
        return Err(Error::InsufficientData("kostlan validation needs at least one replication".into()));
    }
    let r2 = radius * radius;
    for &i in orders {
        if i == 0 {
            return domain("orders are 1-based");
        }
        if r2 < i as f64 + 6.0 * (i as f64).sqrt() {
            return Err(Error::Precondition(format!(
                "radius {radius} too small for order {i}: need radius^2 >= {}",
                i as f64 + 6.0 * (i as f64).sqrt()
            )));
        }
    }
    let max_order = orders.iter().copied().max().unwrap_or(0);
    let dpp_root = rng.substream(0);
    let oracle_root = rng.substream(1);
    let sampled: Vec<Vec<f64>> = (0..n_reps as u64)
        .into_par_iter()
        .map(|k| {
            let mut s = dpp_root.substream(k);
            let pts = thinned_points(1.0, radius, false, DEFAULT_STALL_CAP, &mut s)?;
            Ok(smallest(pts.iter().map(|p| p.norm_sqr()).collect(), max_order))
        })
        .collect::<Result<_>>()?;
    let count = (r2 + 10.0 * radius + 10.0).ceil() as usize;
    let reference: Vec<Vec<f64>> = (0..n_reps as u64)
        .into_par_iter()
        .map(|k| {
            let mut s = oracle_root.substream(k);
            let gammas = (1..=count)
                .map(|i| Gamma::new(i as f64, 1.0).expect("positive shape").sample(&mut s))
                .filter(|&g| g <= r2)
                .collect();
            smallest(gammas, max_order)
        })
        .collect();
    orders
        .iter()
        .map(|&i| {
            let a: Vec<f64> = sampled.iter().filter_map(|v| v.get(i - 1).copied()).collect();
            let b: Vec<f64> = reference.iter().filter_map(|v| v.get(i - 1).copied()).collect();
            let TestOutcome { statistic, p_value, .. } = ks_two_sample(&a, &b)?;
            Ok(KostlanCheck { order: i, statistic, p_value, sampled: a.len(), reference: b.len() })
        })
        .collect()
}

fn smallest(mut v: Vec<f64>, k: usize) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.truncate(k);
    v
}
