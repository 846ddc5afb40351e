//! Geometric primitives shared by the tracker and the oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A marker coordinate in camera space, in meters.
///
/// Right-handed: `x` to the right, `y` up, `z` out of the camera.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    /// Builds a point, rejecting non-finite components.
    pub fn try_new(x: f64, y: f64, z: f64) -> Result<Self> {
        let p = Point3 { x, y, z };
        if p.is_finite() {
            Ok(p)
        } else {
            Err(Error::input(format!("non-finite coordinate {p:?}")))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Point3::new(a[0], a[1], a[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        p.to_array()
    }
}

/// Euclidean distance between two observed markers.
pub fn distance(a: &Point3, b: &Point3) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dz = a.z - b.z;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// A last-known position that may never have been observed.
///
/// The unobserved case is a tag, never an infinite coordinate, so cost
/// matrices stay finite.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Position {
    Observed(Point3),
    #[default]
    Unobserved,
}

impl Position {
    pub fn point(&self) -> Option<Point3> {
        match self {
            Position::Observed(p) => Some(*p),
            Position::Unobserved => None,
        }
    }

    pub fn is_observed(&self) -> bool {
        matches!(self, Position::Observed(_))
    }

    /// Distance between two positions; either side being unobserved is a
    /// contract violation.
    pub fn distance(&self, other: &Position) -> Result<f64> {
        match (self, other) {
            (Position::Observed(a), Position::Observed(b)) => Ok(distance(a, b)),
            _ => Err(Error::contract("distance to a never-observed position")),
        }
    }
}

impl From<Point3> for Position {
    fn from(p: Point3) -> Self {
        Position::Observed(p)
    }
}

/// One sensor frame: anonymous markers, in no particular order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MarkerFrame {
    pub t: u64,
    #[serde(default)]
    pub markers: Vec<Point3>,
}

impl MarkerFrame {
    pub fn new(t: u64, markers: Vec<Point3>) -> Self {
        MarkerFrame { t, markers }
    }
}

/// Euclidean distance between feature vectors of equal length.
pub fn feature_distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn distance_examples() {
        let o = Point3::new(0.0, 0.0, 0.0);
        assert_eq!(distance(&o, &o), 0.0);
        assert_eq!(distance(&o, &Point3::new(1.0, 2.0, 2.0)), 3.0);
        assert_eq!(
            distance(&Point3::new(1.0, 1.0, 1.0), &Point3::new(4.0, 5.0, 1.0)),
            5.0
        );
    }

    #[test]
    fn unobserved_is_contract_violation() {
        let p = Position::Observed(Point3::default());
        let err = p.distance(&Position::Unobserved).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(Position::Unobserved.distance(&p).is_err());
    }

    #[test]
    fn try_new_rejects_infinity() {
        assert!(Point3::try_new(f64::INFINITY, 0.0, 0.0).is_err());
        assert!(Point3::try_new(0.0, f64::NAN, 0.0).is_err());
        assert!(Point3::try_new(0.0, 1.0, 2.0).is_ok());
    }

    fn point() -> impl Strategy<Value = Point3> {
        (-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y, z)| Point3::new(x, y, z))
    }

    proptest! {
        #[test]
        fn symmetric(a in point(), b in point()) {
            prop_assert_eq!(distance(&a, &b), distance(&b, &a));
        }

        #[test]
        fn triangle(a in point(), b in point(), c in point()) {
            let ac = distance(&a, &c);
            let bound = distance(&a, &b) + distance(&b, &c);
            prop_assert!(ac <= bound * (1.0 + 1e-9) + 1e-12);
        }

        #[test]
        fn zero_iff_equal(a in point(), b in point()) {
            prop_assert_eq!(distance(&a, &b) == 0.0, a == b);
        }
    }
}
