use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// A point of the plane, identified with a complex number.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub const ORIGIN: PlanarPoint = PlanarPoint { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(r: f64, angle: f64) -> Self {
        Self::from(Complex64::from_polar(r, angle))
    }

    pub fn as_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sqr(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn distance(self, other: PlanarPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl From<Complex64> for PlanarPoint {
    fn from(z: Complex64) -> Self {
        Self::new(z.re, z.im)
    }
}

impl fmt::Display for PlanarPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Closed disk `b(center, radius)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: PlanarPoint,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: PlanarPoint, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return domain(format!("disk radius must be finite and positive, got {radius}"));
        }
        if !(center.x.is_finite() && center.y.is_finite()) {
            return domain("disk center must be finite");
        }
        Ok(Self { center, radius })
    }

    pub fn centered(radius: f64) -> Result<Self> {
        Self::new(PlanarPoint::ORIGIN, radius)
    }

    /// Closed-disk membership.
    pub fn contains(&self, p: PlanarPoint) -> bool {
        p.distance(self.center) <= self.radius
    }

    /// Open-disk membership.
    pub fn contains_interior(&self, p: PlanarPoint) -> bool {
        p.distance(self.center) < self.radius
    }

    /// Distance from an interior point to the boundary circle (negative outside).
    pub fn depth(&self, p: PlanarPoint) -> f64 {
        self.radius - p.distance(self.center)
    }

    /// Radius of the smallest origin-centered disk containing this one.
    pub fn enclosing_radius_about_origin(&self) -> f64 {
        self.center.norm() + self.radius
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }
}
