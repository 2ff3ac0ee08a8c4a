//! Spectral (projection) sampling of Ginibre-type processes on a disk.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::geometry::PlanarPoint;
use crate::numeric::truncated_exponential;
use crate::spectral::{eigenvalue_cap, ln_poisson_sf, poisson_sf, DEFAULT_TOL};

/// Proposal budget for placing one point.
pub const DEFAULT_STALL_CAP: u64 = 1_000_000;

/// Draws `t ~ Gamma(shape = m + 1)` conditioned on `t ≤ r2`; `mass` is
/// `P(Gamma(m + 1) ≤ r2)`.
fn truncated_gamma<R: Rng + ?Sized>(m: u64, r2: f64, mass: f64, rng: &mut R) -> f64 {
    if mass >= 0.25 {
        let g = Gamma::new((m + 1) as f64, 1.0).expect("positive shape");
        loop {
            let t = g.sample(rng);
            if t <= r2 {
                return t;
            }
        }
    }
    // s = r2 - t has density ∝ (1 - s/r2)^m e^s on [0, r2]; the tangent at
    // s = 0 gives the envelope e^{-a s}.
    let m = m as f64;
    let a = m / r2 - 1.0;
    loop {
        let s = truncated_exponential(rng, 0.0, r2, -a);
        let log_acc = if s >= r2 { f64::NEG_INFINITY } else { m * (-s / r2).ln_1p() + m * s / r2 };
        if rng.random::<f64>().ln() < log_acc {
            return (r2 - s).max(0.0);
        }
    }
}

/// Projection sampler for the process with eigenfunctions
/// `z^j / sqrt(j! κ_j)` on `b(O, √r2)`, `κ_j = P(Po(r2) ≥ j + 1)`, given
/// the selected indices.
struct Projection {
    r2: f64,
    indices: Vec<u64>,
    masses: Vec<f64>,
    /// `-(ln j! + ln κ_j)/2`
    offsets: Vec<f64>,
    basis: Vec<Vec<Complex64>>,
}

impl Projection {
    fn new(r2: f64, indices: Vec<u64>) -> Self {
        let masses = indices.iter().map(|&j| poisson_sf(r2, j + 1)).collect();
        let offsets = indices
            .iter()
            .map(|&j| -0.5 * (ln_gamma((j + 1) as f64) + ln_poisson_sf(r2, j + 1)))
            .collect();
        Self { r2, indices, masses, offsets, basis: Vec::new() }
    }

    /// Feature vector at `(ρ², φ)`, rescaled so its largest entry has
    /// modulus 1.
    fn features(&self, t: f64, angle: f64) -> Vec<Complex64> {
        if t == 0.0 {
            return self.indices.iter().map(|&j| Complex64::new((j == 0) as u8 as f64, 0.0)).collect();
        }
        let half_ln_t = 0.5 * t.ln();
        let logs: Vec<f64> =
            self.indices.iter().zip(&self.offsets).map(|(&j, o)| j as f64 * half_ln_t + o).collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        self.indices
            .iter()
            .zip(&logs)
            .map(|(&j, l)| Complex64::from_polar((l - top).exp(), j as f64 * angle))
            .collect()
    }

    /// Removes the component of `v` in the span of the basis
    /// (modified Gram–Schmidt).
    fn project_out(&self, v: &mut [Complex64]) {
        for e in &self.basis {
            let c: Complex64 = e.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            for (x, a) in v.iter_mut().zip(e) {
                *x -= c * a;
            }
        }
    }

    fn sample<R: Rng + ?Sized>(mut self, cap: u64, rng: &mut R) -> Result<Vec<PlanarPoint>> {
        let target = self.indices.len();
        let mut points = Vec::with_capacity(target);
        while points.len() < target {
            let mut proposals = 0u64;
            loop {
                if proposals == cap {
                    return Err(Error::SamplerStall { placed: points.len(), target, proposals });
                }
                proposals += 1;
                let pick = rng.random_range(0..target);
                let t = truncated_gamma(self.indices[pick], self.r2, self.masses[pick], rng);
                let angle = rng.random::<f64>() * std::f64::consts::TAU;
                let v = self.features(t, angle);
                let full: f64 = v.iter().map(|c| c.norm_sqr()).sum();
                let mut w = v;
                self.project_out(&mut w);
                let resid: f64 = w.iter().map(|c| c.norm_sqr()).sum();
                if rng.random::<f64>() * full < resid {
                    self.project_out(&mut w);
                    let n = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                    if !(n > 0.0) {
                        continue;
                    }
                    w.iter_mut().for_each(|c| *c /= n);
                    self.basis.push(w);
                    points.push(PlanarPoint::from_polar(t.sqrt(), angle));
                    break;
                }
            }
        }
        Ok(points)
    }
}

/// One draw of the determinantal process on `b(O, √r2)` whose spectrum is
/// `κ_j = P(Po(r2) ≥ j + 1)` for `j ≥ first` (the Ginibre restriction for
/// `first = 0`, its reduced Palm version at the origin for `first = 1`).
pub(crate) fn sample_disk_dpp<R: Rng + ?Sized>(
    r2: f64,
    first: u64,
    cap: u64,
    rng: &mut R,
) -> Result<Vec<PlanarPoint>> {
    let mut selected = Vec::new();
    for j in first..first + eigenvalue_cap(r2) as u64 {
        let k = poisson_sf(r2, j + 1);
        if k < DEFAULT_TOL {
            break;
        }
        if rng.random::<f64>() < k {
            selected.push(j);
        }
    }
    if selected.is_empty() {
        return Ok(Vec::new());
    }
    Projection::new(r2, selected).sample(cap, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ks_two_sample, Moments};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn truncated_gamma_matches_conditional_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // Both branches: heavy mass (m=1, r2=4) and thin mass (m=12, r2=4).
        for (m, r2) in [(1u64, 4.0), (12, 4.0)] {
            let mass = poisson_sf(r2, m + 1);
            let a: Vec<f64> = (0..20_000).map(|_| truncated_gamma(m, r2, mass, &mut rng)).collect();
            assert!(a.iter().all(|&t| (0.0..=r2).contains(&t)));
            let g = Gamma::new((m + 1) as f64, 1.0).unwrap();
            let mut b = Vec::new();
            while b.len() < 20_000 {
                let t: f64 = g.sample(&mut rng);
                if t <= r2 {
                    b.push(t);
                }
            }
            let ks = ks_two_sample(&a, &b).unwrap();
            assert!(ks.p_value > 0.001, "m={m}: {ks:?}");
        }
    }

    #[test]
    fn projection_places_every_selected_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts = Projection::new(9.0, (0..12).collect()).sample(DEFAULT_STALL_CAP, &mut rng).unwrap();
        assert_eq!(pts.len(), 12);
        assert!(pts.iter().all(|p| p.norm() <= 3.0 + 1e-12));
    }

    #[test]
    fn stall_cap_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut placed = false;
        for _ in 0..50 {
            match Projection::new(9.0, (0..30).collect()).sample(1, &mut rng) {
                Err(Error::SamplerStall { proposals, target, .. }) => {
                    assert_eq!(proposals, 1);
                    assert_eq!(target, 30);
                    placed = true;
                    break;
                }
                _ => continue,
            }
        }
        assert!(placed);
    }

    #[test]
    fn single_eigenfunction_radial_law() {
        // With S = {j}, the one point has |x|^2 ~ Gamma(j+1) truncated.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t: Vec<f64> = (0..5000)
            .map(|_| Projection::new(50.0, vec![3]).sample(10, &mut rng).unwrap()[0].norm_sqr())
            .collect();
        let m = Moments::from_slice(&t);
        assert!((m.mean - 4.0).abs() < 4.0 * m.stderr());
    }
}
