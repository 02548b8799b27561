//! Points of the Riemann sphere: finite complex values plus a marker for infinity.

use num_complex::Complex64;

/// A point of the Riemann sphere.
///
/// Infinity is an explicit value, never a large-magnitude surrogate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cx {
    Finite(Complex64),
    Inf,
}

impl Cx {
    pub fn new(re: f64, im: f64) -> Self {
        Cx::Finite(Complex64::new(re, im))
    }

    pub fn zero() -> Self {
        Cx::Finite(Complex64::new(0.0, 0.0))
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, Cx::Inf)
    }

    /// The finite value, if any.
    pub fn finite(&self) -> Option<Complex64> {
        match self {
            Cx::Finite(z) => Some(*z),
            Cx::Inf => None,
        }
    }

    /// Chordal-style distance: finite points compare by Euclidean distance,
    /// infinity compares by 1/|z|.
    pub fn dist(&self, other: &Cx) -> f64 {
        match (self, other) {
            (Cx::Finite(a), Cx::Finite(b)) => (a - b).norm(),
            (Cx::Inf, Cx::Inf) => 0.0,
            (Cx::Finite(z), Cx::Inf) | (Cx::Inf, Cx::Finite(z)) => 1.0 / z.norm().max(1e-300),
        }
    }
}

impl From<Complex64> for Cx {
    fn from(z: Complex64) -> Self {
        Cx::Finite(z)
    }
}

impl std::fmt::Display for Cx {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cx::Finite(z) => {
                if z.im >= 0.0 {
                    write!(f, "{}+{}i", z.re, z.im)
                } else {
                    write!(f, "{}{}i", z.re, z.im)
                }
            }
            Cx::Inf => write!(f, "inf"),
        }
    }
}
