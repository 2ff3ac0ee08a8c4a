//! Scalar numerics: bisection, adaptive Simpson quadrature, and an exact
//! rejection sampler for log-concave densities on an interval.

use rand::Rng;

/// Bisection for a sign change of `f` on `[lo, hi]`. `f(lo)` and `f(hi)`
/// must have opposite signs (or one of them be zero).
pub fn bisect(mut lo: f64, mut hi: f64, mut f: impl FnMut(f64) -> f64, iters: usize) -> f64 {
    let flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    let lo_positive = flo > 0.0;
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`, seeded with a uniform
/// split into `panels` pieces so narrow peaks are not missed.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, abs_tol: f64, panels: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + h * k as f64;
        let hi = if k + 1 == panels { b } else { lo + h };
        let fa = f(lo);
        let fb = f(hi);
        let fm = f(0.5 * (lo + hi));
        let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson_rec(&mut f, lo, hi, fa, fm, fb, whole, abs_tol / panels as f64, 40);
    }
    total
}

/// A log-concave (unnormalized) log-density on `[lo, hi]`.
pub trait LogConcave {
    fn support(&self) -> (f64, f64);
    fn log_density(&self, z: f64) -> f64;
    fn d_log_density(&self, z: f64) -> f64;
}

/// Location of the maximum of a concave log-density.
pub fn log_concave_mode<D: LogConcave + ?Sized>(d: &D) -> f64 {
    let (lo, hi) = d.support();
    if d.d_log_density(lo) <= 0.0 {
        return lo;
    }
    if hi.is_finite() {
        if d.d_log_density(hi) >= 0.0 {
            return hi;
        }
        return bisect(lo, hi, |z| d.d_log_density(z), 200);
    }
    let mut upper = if lo > 0.0 { 2.0 * lo } else { 1.0 };
    while d.d_log_density(upper) > 0.0 {
        upper *= 2.0;
    }
    bisect(lo, upper, |z| d.d_log_density(z), 200)
}

/// Points left and right of the mode where the log-density has dropped by
/// `drop` (clipped to the support).
pub fn log_concave_drop_points<D: LogConcave + ?Sized>(d: &D, mode: f64, drop: f64) -> (f64, f64) {
    let (lo, hi) = d.support();
    let peak = d.log_density(mode);
    let level = peak - drop;
    let left = if mode <= lo || d.log_density(lo) >= level {
        lo
    } else {
        bisect(lo, mode, |z| d.log_density(z) - level, 200)
    };
    let right = if mode >= hi || (hi.is_finite() && d.log_density(hi) >= level) {
        hi
    } else {
        let mut upper = if hi.is_finite() { hi } else { mode + 1.0 };
        let mut step = (mode - lo).abs().max(1.0);
        while !hi.is_finite() && d.log_density(upper) >= level {
            upper += step;
            step *= 2.0;
        }
        bisect(mode, upper, |z| d.log_density(z) - level, 200)
    };
    (left, right)
}

/// `ln ∫ exp(log_density)` over the support, by quadrature on the region
/// within `60` log-units of the peak.
pub fn log_concave_log_integral<D: LogConcave + ?Sized>(d: &D) -> f64 {
    let mode = log_concave_mode(d);
    let peak = d.log_density(mode);
    let (a, b) = log_concave_drop_points(d, mode, 60.0);
    let mass = integrate(|z| (d.log_density(z) - peak).exp(), a, b, 1e-13 * (b - a).max(1e-300), 64);
    peak + mass.ln()
}

/// First moment `∫ z e^{h} / ∫ e^{h}` of the normalized density.
pub fn log_concave_mean<D: LogConcave + ?Sized>(d: &D) -> f64 {
    let mode = log_concave_mode(d);
    let peak = d.log_density(mode);
    let (a, b) = log_concave_drop_points(d, mode, 60.0);
    let tol = 1e-13 * (b - a).max(1e-300);
    let m0 = integrate(|z| (d.log_density(z) - peak).exp(), a, b, tol, 64);
    let m1 = integrate(|z| z * (d.log_density(z) - peak).exp(), a, b, tol * b.abs().max(1.0), 64);
    m1 / m0
}

/// Draw from `density ∝ exp(slope * (z - a))` on `[a, b]` (`b` may be infinite
/// when `slope < 0`).
pub(crate) fn truncated_exponential<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64, slope: f64) -> f64 {
    let u: f64 = rng.random();
    if slope == 0.0 {
        return a + u * (b - a);
    }
    if b.is_infinite() {
        // slope < 0
        return a - (1.0 - u).ln() / (-slope);
    }
    let span = b - a;
    // inverse CDF of exp(slope * s) on [0, span]
    let s = if slope > 0.0 {
        // s = span + ln(u + (1-u) e^{-slope span}) / slope
        span + (u + (1.0 - u) * (-slope * span).exp()).ln() / slope
    } else {
        (1.0 - u * (-(slope * span).exp_m1())).ln() / slope
    };
    a + s.clamp(0.0, span)
}

/// Exact rejection sampler for a log-concave density, using a piecewise
/// envelope: flat between the two points where the log-density is one unit
/// below its peak, tangent exponentials outside.
#[derive(Debug, Clone)]
pub struct LogConcaveSampler {
    lo: f64,
    hi: f64,
    left: f64,
    right: f64,
    peak: f64,
    left_slope: f64,
    right_slope: f64,
    weights: [f64; 3],
}

impl LogConcaveSampler {
    pub fn new<D: LogConcave + ?Sized>(d: &D) -> Self {
        let (lo, hi) = d.support();
        let mode = log_concave_mode(d);
        let peak = d.log_density(mode);
        let (left, right) = log_concave_drop_points(d, mode, 1.0);
        let left_slope = if left > lo { d.d_log_density(left) } else { 0.0 };
        let right_slope = if right < hi { d.d_log_density(right) } else { 0.0 };
        let hl = if left > lo { d.log_density(left) - peak } else { 0.0 };
        let hr = if right < hi { d.log_density(right) - peak } else { 0.0 };
        let w_left = if left > lo {
            hl.exp() * (-(-left_slope * (left - lo)).exp_m1()) / left_slope
        } else {
            0.0
        };
        let w_mid = right - left;
        let w_right = if right < hi {
            let span = hi - right;
            if span.is_infinite() {
                hr.exp() / (-right_slope)
            } else {
                hr.exp() * (-(right_slope * span).exp_m1()) / (-right_slope)
            }
        } else {
            0.0
        };
        Self {
            lo,
            hi,
            left,
            right,
            peak,
            left_slope,
            right_slope,
            weights: [w_left, w_mid, w_right],
        }
    }

    fn envelope(&self, z: f64, d_left: f64, d_right: f64) -> f64 {
        if z < self.left {
            d_left + self.left_slope * (z - self.left)
        } else if z > self.right {
            d_right + self.right_slope * (z - self.right)
        } else {
            self.peak
        }
    }

    pub fn sample<D: LogConcave + ?Sized, R: Rng + ?Sized>(&self, d: &D, rng: &mut R) -> f64 {
        let total: f64 = self.weights.iter().sum();
        let h_left = if self.left > self.lo { d.log_density(self.left) } else { self.peak };
        let h_right = if self.right < self.hi { d.log_density(self.right) } else { self.peak };
        loop {
            let pick: f64 = rng.random::<f64>() * total;
            let z = if pick < self.weights[0] {
                // density ∝ exp(left_slope * (z - left)) on [lo, left]
                truncated_exponential(rng, self.lo, self.left, self.left_slope)
            } else if pick < self.weights[0] + self.weights[1] {
                self.left + rng.random::<f64>() * (self.right - self.left)
            } else {
                truncated_exponential(rng, self.right, self.hi, self.right_slope)
            };
            let env = self.envelope(z, h_left, h_right);
            let u: f64 = rng.random();
            if u.ln() <= d.log_density(z) - env {
                return z;
            }
        }
    }
}
