//! Attenuation, interference, SINR and the success threshold.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fading::FadingSpec;
use crate::geometry::{Disk, PlanarPoint};
use crate::sampling::PointPattern;
use crate::stats::CompensatedSum;

/// Full network scenario: β-Ginibre transmitters (reduced Palm at the
/// origin, where the useful transmitter sits), a receiver at `receiver`,
/// interferers counted inside `window`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    pub beta: f64,
    pub window: Disk,
    pub receiver: PlanarPoint,
    pub atten_r: f64,
    pub atten_alpha: f64,
    pub fading: FadingSpec,
    pub noise_w: f64,
    pub threshold_tau: f64,
}

impl NetworkModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        beta: f64,
        window: Disk,
        receiver: PlanarPoint,
        atten_r: f64,
        atten_alpha: f64,
        fading: FadingSpec,
        noise_w: f64,
        threshold_tau: f64,
    ) -> Result<Self> {
        let m = Self { beta, window, receiver, atten_r, atten_alpha, fading, noise_w, threshold_tau };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return domain(format!("beta must lie in (0,1], got {}", self.beta));
        }
        check_attenuation(self.atten_r, self.atten_alpha)?;
        if !(self.noise_w.is_finite() && self.noise_w > 0.0) {
            return domain(format!("noise w must be positive, got {}", self.noise_w));
        }
        if !(self.threshold_tau.is_finite() && self.threshold_tau > 0.0) {
            return domain(format!("threshold tau must be positive, got {}", self.threshold_tau));
        }
        Disk::new(self.window.center, self.window.radius)?;
        if !self.window.contains_interior(PlanarPoint::ORIGIN) {
            return domain("the origin must lie in the interior of the window");
        }
        if !self.window.contains_interior(self.receiver) {
            return domain("the receiver must lie in the interior of the window");
        }
        self.fading.validate()?;
        Ok(())
    }

    /// `R^{-α}`, the largest attenuation value.
    pub fn peak_attenuation(&self) -> f64 {
        self.atten_r.powf(-self.atten_alpha)
    }

    pub fn attenuation_at(&self, p: PlanarPoint) -> f64 {
        attenuation_unchecked(self.receiver.distance(p), self.atten_r, self.atten_alpha)
    }

    /// Radius of the origin-centered disk that must be sampled to see every
    /// point of the window.
    pub fn sampling_radius(&self) -> f64 {
        self.window.enclosing_radius_about_origin()
    }
}

fn check_attenuation(r: f64, alpha: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return domain(format!("attenuation R must be positive, got {r}"));
    }
    if !(alpha.is_finite() && alpha > 2.0) {
        return domain(format!("attenuation exponent alpha must exceed 2, got {alpha}"));
    }
    Ok(())
}

fn attenuation_unchecked(distance: f64, r: f64, alpha: f64) -> f64 {
    r.max(distance).powf(-alpha)
}

/// `L(x) = max{R, |x|}^{-α}`.
pub fn attenuation(x: PlanarPoint, r: f64, alpha: f64) -> Result<f64> {
    check_attenuation(r, alpha)?;
    Ok(attenuation_unchecked(x.norm(), r, alpha))
}

/// A point pattern with one fading mark per point.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkedPattern {
    pub pattern: PointPattern,
    pub marks: Vec<f64>,
}

impl MarkedPattern {
    pub fn new(pattern: PointPattern, marks: Vec<f64>) -> Result<Self> {
        let m = Self { pattern, marks };
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<()> {
        if self.marks.len() != self.pattern.points.len() {
            return Err(Error::Structural(format!(
                "{} marks for {} points",
                self.marks.len(),
                self.pattern.points.len()
            )));
        }
        if let Some(bad) = self.marks.iter().find(|m| !(**m >= 0.0)) {
            return Err(Error::Structural(format!("negative or NaN mark {bad}")));
        }
        Ok(())
    }
}

/// Sum of `terms` in ascending magnitude with compensation; the result is
/// independent of the input order.
pub(crate) fn ordered_sum(terms: &mut [f64]) -> f64 {
    terms.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
    terms.iter().copied().collect::<CompensatedSum>().value()
}

/// Interference terms `Z_i L(y - X_i)` of the points inside the window.
pub fn interference_terms(points: &[PlanarPoint], marks: &[f64], model: &NetworkModel) -> Vec<f64> {
    points
        .iter()
        .zip(marks)
        .filter(|(p, _)| model.window.contains(**p))
        .map(|(p, z)| z * model.attenuation_at(*p))
        .collect()
}

/// `I_Λ = Σ Z_i L(y - X_i) 1_Λ(X_i)`.
pub fn interference(marked: &MarkedPattern, model: &NetworkModel) -> Result<f64> {
    marked.check()?;
    let mut terms = interference_terms(&marked.pattern.points, &marked.marks, model);
    Ok(ordered_sum(&mut terms))
}

/// `Z_0 L(y) / (w + I)`.
pub fn sinr(z0: f64, interference: f64, model: &NetworkModel) -> f64 {
    z0 * model.attenuation_at(PlanarPoint::ORIGIN) / (model.noise_w + interference)
}

/// Interference level below which the link at `Z_0 = z0` decodes:
/// `z0 L(y)/τ - w`. Negative when success is impossible.
pub fn success_threshold(z0: f64, model: &NetworkModel) -> f64 {
    z0 * model.attenuation_at(PlanarPoint::ORIGIN) / model.threshold_tau - model.noise_w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{PointPattern, ProcessKind};
    use proptest::prelude::*;

    fn model() -> NetworkModel {
        NetworkModel::new(
            1.0,
            Disk::centered(3.0).unwrap(),
            PlanarPoint::new(0.5, 0.0),
            1.0,
            4.0,
            FadingSpec::exponential(1.0).unwrap(),
            0.1,
            2.0,
        )
        .unwrap()
    }

    fn pattern(points: Vec<PlanarPoint>) -> PointPattern {
        PointPattern::new(points, Disk::centered(3.0).unwrap(), ProcessKind::PalmBetaGinibre, 1.0, 0)
    }

    #[test]
    fn attenuation_examples() {
        assert_eq!(attenuation(PlanarPoint::new(0.5, 0.0), 1.0, 4.0).unwrap(), 1.0);
        assert_eq!(attenuation(PlanarPoint::new(2.0, 0.0), 1.0, 4.0).unwrap(), 0.0625);
        let at_r = attenuation(PlanarPoint::new(1.5, 0.0), 1.5, 3.0).unwrap();
        assert_eq!(at_r, 1.5f64.powf(-3.0));
        let just_out = attenuation(PlanarPoint::new(1.5 + 1e-12, 0.0), 1.5, 3.0).unwrap();
        assert!((at_r - just_out).abs() < 1e-11);
        assert!(attenuation(PlanarPoint::ORIGIN, 1.0, 2.0).is_err());
        assert!(attenuation(PlanarPoint::ORIGIN, 0.0, 3.0).is_err());
    }

    #[test]
    fn model_rejects_bad_geometry() {
        let mut m = model();
        m.receiver = PlanarPoint::new(3.0, 0.0);
        assert!(m.validate().is_err());
        m = model();
        m.atten_alpha = 2.0;
        assert!(m.validate().is_err());
    }

    #[test]
    fn interference_examples() {
        let m = model();
        let empty = MarkedPattern::new(pattern(vec![]), vec![]).unwrap();
        assert_eq!(interference(&empty, &m).unwrap(), 0.0);

        let single = MarkedPattern::new(pattern(vec![PlanarPoint::new(1.5, 0.0)]), vec![1.0]).unwrap();
        assert_eq!(interference(&single, &m).unwrap(), 1.0);

        let outside = MarkedPattern {
            pattern: pattern(vec![PlanarPoint::new(3.5, 0.0)]),
            marks: vec![5.0],
        };
        assert_eq!(interference(&outside, &m).unwrap(), 0.0);

        assert!(MarkedPattern::new(pattern(vec![PlanarPoint::ORIGIN]), vec![]).is_err());
    }

    #[test]
    fn sinr_and_threshold_identities() {
        let m = model();
        let ly = m.attenuation_at(PlanarPoint::ORIGIN);
        assert_eq!(sinr(0.0, 1.0, &m), 0.0);
        let z0 = m.noise_w * m.threshold_tau / ly;
        assert!((sinr(z0, 0.0, &m) - m.threshold_tau).abs() < 1e-15);
        assert!(success_threshold(z0, &m).abs() < 1e-15);
        assert_eq!(success_threshold(0.0, &m), -m.noise_w);
        assert!(sinr(1.0, 0.5, &m) > sinr(1.0, 0.6, &m));
    }

    fn arb_points() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
        prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64, 0.0..50.0f64), 0..40)
    }

    proptest! {
        #[test]
        fn permutation_invariant_to_the_bit(pts in arb_points(), seed in any::<u64>()) {
            let m = model();
            let points: Vec<PlanarPoint> = pts.iter().map(|p| PlanarPoint::new(p.0, p.1)).collect();
            let marks: Vec<f64> = pts.iter().map(|p| p.2).collect();
            let a = interference(&MarkedPattern::new(pattern(points.clone()), marks.clone()).unwrap(), &m).unwrap();
            let mut idx: Vec<usize> = (0..points.len()).collect();
            // deterministic shuffle
            let mut s = seed;
            for i in (1..idx.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                idx.swap(i, (s >> 33) as usize % (i + 1));
            }
            let p2: Vec<_> = idx.iter().map(|&i| points[i]).collect();
            let m2: Vec<_> = idx.iter().map(|&i| marks[i]).collect();
            let b = interference(&MarkedPattern::new(pattern(p2), m2).unwrap(), &m).unwrap();
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }

        #[test]
        fn bounded_by_peak_attenuation(pts in arb_points()) {
            let m = model();
            let points: Vec<PlanarPoint> = pts.iter().map(|p| PlanarPoint::new(p.0, p.1)).collect();
            let marks: Vec<f64> = pts.iter().map(|p| p.2).collect();
            let i = interference(&MarkedPattern::new(pattern(points.clone()), marks.clone()).unwrap(), &m).unwrap();
            let in_region: f64 = points.iter().zip(&marks).filter(|(p, _)| m.window.contains(**p)).map(|(_, z)| z).sum();
            prop_assert!(i <= m.peak_attenuation() * in_region * (1.0 + 1e-12));
        }

        #[test]
        fn monotone_in_region(pts in arb_points(), r_small in 0.6..3.0f64) {
            let big = model();
            let mut small = big;
            small.window = Disk::centered(r_small).unwrap();
            let points: Vec<PlanarPoint> = pts.iter().map(|p| PlanarPoint::new(p.0, p.1)).collect();
            let marks: Vec<f64> = pts.iter().map(|p| p.2).collect();
            let mp = MarkedPattern::new(pattern(points), marks).unwrap();
            prop_assert!(interference(&mp, &small).unwrap() <= interference(&mp, &big).unwrap());
        }
    }
}
