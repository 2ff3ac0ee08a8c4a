//! Exact computations on the Ginibre kernel `K(x, y) = e^{x ȳ}` (reference
//! measure `π^{-1} e^{-|x|²} dx`) restricted to disks.
//!
//! On `b(O, r)` the eigenfunctions are the monomials `z^m`, `m ≥ 0`, with
//! eigenvalues `κ_m = P(Po(r²) ≥ m + 1)`. The reduced Palm kernel at the
//! origin, `e^{x ȳ} - 1`, drops `m = 0`. Independent β-thinning followed by
//! `√β`-scaling multiplies the spectrum of `b(O, r/√β)` by β.
//!
//! Count laws in the disk are Poisson-binomial in these eigenvalues.

pub mod poisson;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geometry::{Disk, PlanarPoint};
use crate::interference::NetworkModel;
use crate::stats::CompensatedSum;

pub use poisson::{ln_poisson_sf, poisson_cdf, poisson_sf};

/// Default eigenvalue truncation tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Hard cap on the number of eigenvalues kept for squared radius `r2`.
pub fn eigenvalue_cap(r2: f64) -> usize {
    10 * r2.ceil() as usize + 64
}

/// The Ginibre kernel restricted to a disk, optionally Palm-reduced at the
/// origin and β-thinned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskRestriction {
    pub center: PlanarPoint,
    pub radius: f64,
    pub palm_shift: bool,
    pub beta: f64,
}

impl DiskRestriction {
    pub fn new(center: PlanarPoint, radius: f64, palm_shift: bool, beta: f64) -> Result<Self> {
        Disk::new(center, radius)?;
        if !(beta > 0.0 && beta <= 1.0) {
            return domain(format!("beta must lie in (0,1], got {beta}"));
        }
        Ok(Self { center, radius, palm_shift, beta })
    }

    /// Full Ginibre process on `b(O, radius)`.
    pub fn ginibre(radius: f64) -> Result<Self> {
        Self::new(PlanarPoint::ORIGIN, radius, false, 1.0)
    }

    pub fn with_beta(self, beta: f64) -> Result<Self> {
        Self::new(self.center, self.radius, self.palm_shift, beta)
    }

    pub fn with_palm(self, palm_shift: bool) -> Self {
        Self { palm_shift, ..self }
    }

    /// Squared radius of the unthinned disk `b(O, radius/√β)`.
    pub fn base_radius_sq(&self) -> f64 {
        self.radius * self.radius / self.beta
    }

    fn shift(&self) -> u64 {
        self.palm_shift as u64
    }
}

/// Truncated, decreasing eigenvalue sequence of a [`DiskRestriction`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueSeq {
    pub values: Vec<f64>,
    pub truncation_tol: f64,
    /// Number of retained values (index of the first dropped one).
    pub truncation_index: usize,
}

impl EigenvalueSeq {
    pub fn sum(&self) -> f64 {
        self.values.iter().copied().collect::<CompensatedSum>().value()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `κ_m(b(O, radius)) = P(Po(radius²) ≥ m + 1)`.
pub fn disk_eigenvalue(m: u64, radius: f64) -> Result<f64> {
    if !(radius.is_finite() && radius > 0.0) {
        return domain(format!("radius must be finite and positive, got {radius}"));
    }
    Ok(poisson_sf(radius * radius, m + 1))
}

/// Eigenvalues `β P(Po(radius²/β) ≥ m + 1 + shift)`, `m = 0, 1, …`, until
/// they fall below `tol` (or the hard cap is reached).
pub fn eigenvalues(restriction: &DiskRestriction, tol: f64) -> Result<EigenvalueSeq> {
    if !(tol > 0.0 && tol < 1.0) {
        return domain(format!("truncation tolerance must lie in (0,1), got {tol}"));
    }
    let r2 = restriction.base_radius_sq();
    let cap = eigenvalue_cap(r2);
    let mut values = Vec::new();
    for m in 0..cap as u64 {
        let v = restriction.beta * poisson_sf(r2, m + 1 + restriction.shift());
        if v < tol {
            break;
        }
        values.push(v);
    }
    let truncation_index = values.len();
    Ok(EigenvalueSeq { values, truncation_tol: tol, truncation_index })
}

/// Log-eigenvalues, finite far below the f64 range of the values
/// themselves; used for deep count tails.
pub fn log_eigenvalues(restriction: &DiskRestriction, count: usize) -> Vec<f64> {
    let r2 = restriction.base_radius_sq();
    let lb = restriction.beta.ln();
    (0..count as u64).map(|m| lb + ln_poisson_sf(r2, m + 1 + restriction.shift())).collect()
}

/// `Σ κ_m`, the expected count (exact for β-Ginibre and its Palm version
/// on origin-centered disks).
pub fn trace_bound(restriction: &DiskRestriction) -> f64 {
    eigenvalues(restriction, DEFAULT_TOL).map(|s| s.sum()).unwrap_or(0.0)
}

/// `ln Π_m (1 + (e^θ − 1) κ_m)`.
pub fn log_laplace_bound(restriction: &DiskRestriction, theta: f64) -> Result<f64> {
    if !(theta >= 0.0) || !theta.is_finite() {
        return domain(format!("theta must be finite and nonnegative, got {theta}"));
    }
    let seq = eigenvalues(restriction, DEFAULT_TOL)?;
    Ok(log_generating_product(&seq.values, theta))
}

/// `Π_m (1 + (e^θ − 1) κ_m)`, evaluated in log space.
pub fn laplace_bound(restriction: &DiskRestriction, theta: f64) -> Result<f64> {
    log_laplace_bound(restriction, theta).map(f64::exp)
}

/// `Σ_m ln(1 + (e^{ln_factor} − 1) κ_m)`, stable for large `ln_factor`.
fn log_generating_product(values: &[f64], ln_factor: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for &k in values {
        let term = if ln_factor > 30.0 {
            ln_factor + (k + (1.0 - k) * (-ln_factor).exp()).ln()
        } else {
            (ln_factor.exp_m1() * k).ln_1p()
        };
        acc.add(term);
    }
    acc.value()
}

/// Poisson-binomial pmf `P(N = k)`, `k = 0..=max_n`.
pub fn poisson_binomial_pmf(probs: &[f64], max_n: usize) -> Vec<f64> {
    let width = max_n.min(probs.len()) + 1;
    let mut pmf = vec![0.0; width];
    pmf[0] = 1.0;
    for (j, &p) in probs.iter().enumerate() {
        let top = (j + 1).min(width - 1);
        for k in (1..=top).rev() {
            pmf[k] = pmf[k] * (1.0 - p) + pmf[k - 1] * p;
        }
        pmf[0] *= 1.0 - p;
    }
    pmf.resize(max_n + 1, 0.0);
    pmf
}

/// Exact count distribution `P(N = k)`, `k = 0..=max_n`, for the
/// restriction (truncated at the default tolerance).
pub fn count_distribution(restriction: &DiskRestriction, max_n: i64) -> Result<Vec<f64>> {
    if max_n < 0 {
        return domain(format!("max_n must be nonnegative, got {max_n}"));
    }
    let seq = eigenvalues(restriction, DEFAULT_TOL)?;
    Ok(poisson_binomial_pmf(&seq.values, max_n as usize))
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln P(N ≥ m)` for the Poisson-binomial count of the restriction, computed
/// entirely in log space so it stays finite where `P` underflows.
pub fn log_count_tail(restriction: &DiskRestriction, m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let count = eigenvalue_cap(restriction.base_radius_sq()).max(m + 64);
    let log_p = log_eigenvalues(restriction, count);
    // Track ln P(S_j = k) for k < m and ln P(S_j ≥ m) in an absorbing slot.
    let mut state = vec![f64::NEG_INFINITY; m + 1];
    state[0] = 0.0;
    for &lp in &log_p {
        if lp == f64::NEG_INFINITY {
            break;
        }
        let lq = (-lp.exp()).ln_1p();
        let absorbed = log_add(state[m], state[m - 1] + lp);
        for k in (1..m).rev() {
            state[k] = log_add(state[k] + lq, state[k - 1] + lp);
        }
        state[0] += lq;
        state[m] = absorbed;
    }
    state[m]
}

/// `g(x1, x2) = 1 − |K(x1,x2)|² / (K(x1,x1) K(x2,x2)) = 1 − e^{−|x1−x2|²}`.
pub fn pair_correlation(x1: PlanarPoint, x2: PlanarPoint) -> f64 {
    let d2 = (x1.x - x2.x).powi(2) + (x1.y - x2.y).powi(2);
    -(-d2).exp_m1()
}

/// `ρ^{(k)}(x_1..x_k) = det[K(x_i, x_j)]` with respect to the Gaussian
/// reference measure. The empty determinant is 1.
pub fn joint_intensity(points: &[PlanarPoint]) -> f64 {
    let k = points.len();
    if k == 0 {
        return 1.0;
    }
    let z: Vec<Complex64> = points.iter().map(|p| p.as_complex()).collect();
    let mut a: Vec<Complex64> = (0..k * k).map(|ij| (z[ij / k] * z[ij % k].conj()).exp()).collect();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| a[i * k + col].norm().total_cmp(&a[j * k + col].norm()))
            .unwrap();
        if a[pivot * k + col].norm() == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for c in 0..k {
                a.swap(pivot * k + c, col * k + c);
            }
            det = -det;
        }
        let p = a[col * k + col];
        det *= p;
        for r in col + 1..k {
            let f = a[r * k + col] / p;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in col..k {
                let v = a[col * k + c];
                a[r * k + c] -= f * v;
            }
        }
    }
    det.re.max(0.0)
}

/// Mean number of points of the reduced Palm β-Ginibre process at the
/// origin in `window`, from its intensity `π^{-1}(1 − e^{−|z|²/β})`.
pub fn palm_mean_count(beta: f64, window: &Disk) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return domain(format!("beta must lie in (0,1], got {beta}"));
    }
    let r = window.radius;
    let c = window.center.norm();
    if c == 0.0 {
        return Ok(r * r + beta * (-r * r / beta).exp_m1());
    }
    // ∫_{b(c,r)} e^{-|z|²/β} dz in polar coordinates about the center.
    let gauss = crate::numeric::integrate(
        |rho| {
            let ring = crate::numeric::integrate(
                |phi| (-(c * c + rho * rho + 2.0 * c * rho * phi.cos()) / beta).exp(),
                0.0,
                std::f64::consts::PI,
                1e-13,
                32,
            );
            2.0 * rho * ring
        },
        0.0,
        r,
        1e-12,
        64,
    );
    Ok(r * r - gauss / std::f64::consts::PI)
}

/// Chernoff bound
/// `P(ε I_Λ ≥ x) ≤ exp(−θx + Σ_m ln(1 + (E[e^{θεR^{−α}Z}] − 1) κ_m))`,
/// with `κ_m` the Palm β-Ginibre spectrum of the origin-centered disk
/// enclosing the window. Clamped to 1.
pub fn chernoff_tail_bound(model: &NetworkModel, x: f64, eps: f64, theta: f64) -> Result<f64> {
    log_chernoff_tail_bound(model, x, eps, theta).map(|l| l.min(0.0).exp())
}

/// Logarithm of the (unclamped) Chernoff bound.
pub fn log_chernoff_tail_bound(model: &NetworkModel, x: f64, eps: f64, theta: f64) -> Result<f64> {
    for (name, v) in [("x", x), ("eps", eps), ("theta", theta)] {
        if !(v.is_finite() && v > 0.0) {
            return domain(format!("{name} must be finite and positive, got {v}"));
        }
    }
    let arg = theta * eps * model.peak_attenuation();
    let log_mgf = model.fading.log_mgf(arg)?;
    let restriction =
        DiskRestriction::new(PlanarPoint::ORIGIN, model.sampling_radius(), true, model.beta)?;
    let seq = eigenvalues(&restriction, DEFAULT_TOL)?;
    Ok(-theta * x + log_generating_product(&seq.values, log_mgf))
}

/// Minimizes the Chernoff bound over `thetas`, skipping values where the
/// MGF diverges. Returns `(theta, bound)`.
pub fn minimize_chernoff(model: &NetworkModel, x: f64, eps: f64, thetas: &[f64]) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    let mut last_err = None;
    for &t in thetas {
        match log_chernoff_tail_bound(model, x, eps, t) {
            Ok(l) => {
                if best.is_none_or(|(_, b)| l < b) {
                    best = Some((t, l));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some((t, l)) => Ok((t, l.min(0.0).exp())),
        None => Err(last_err.unwrap_or_else(|| crate::Error::Domain("empty theta grid".into()))),
    }
}
