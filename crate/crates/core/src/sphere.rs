//! Points of the Riemann sphere and the chordal metric.
//!
//! The chordal distance is normalized so that the sphere has diameter 2:
//! `chordal(p, q) = 2|p - q| / sqrt((1 + |p|^2)(1 + |q|^2))`, with density
//! `2|dz| / (1 + |z|^2)`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A point of the Riemann sphere: a finite complex number or `∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub const ZERO: SpherePoint = SpherePoint::Finite(Complex64::new(0.0, 0.0));

    /// Wrap a complex number; non-finite components become `∞`.
    pub fn from_complex(z: Complex64) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            SpherePoint::Finite(z)
        } else {
            SpherePoint::Infinity
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    /// `1/p` on the sphere, with `1/0 = ∞` and `1/∞ = 0`.
    pub fn recip(&self) -> SpherePoint {
        match *self {
            SpherePoint::Infinity => SpherePoint::ZERO,
            SpherePoint::Finite(z) if z == Complex64::new(0.0, 0.0) => SpherePoint::Infinity,
            SpherePoint::Finite(z) => SpherePoint::from_complex(z.inv()),
        }
    }

    /// Modulus, `+∞` at infinity.
    pub fn norm(&self) -> f64 {
        match *self {
            SpherePoint::Finite(z) => z.norm(),
            SpherePoint::Infinity => f64::INFINITY,
        }
    }
}

impl From<Complex64> for SpherePoint {
    fn from(z: Complex64) -> Self {
        SpherePoint::from_complex(z)
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpherePoint::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
            SpherePoint::Infinity => f.write_str("inf"),
        }
    }
}

/// Serialized as `{"re": .., "im": ..}` or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpherePointRepr {
    Finite { re: f64, im: f64 },
    Infinite(InfTag),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum InfTag {
    #[serde(rename = "inf")]
    Inf,
}

impl Serialize for SpherePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let repr = match *self {
            SpherePoint::Finite(z) => SpherePointRepr::Finite { re: z.re, im: z.im },
            SpherePoint::Infinity => SpherePointRepr::Infinite(InfTag::Inf),
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpherePoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match SpherePointRepr::deserialize(d)? {
            SpherePointRepr::Finite { re, im } => SpherePoint::Finite(Complex64::new(re, im)),
            SpherePointRepr::Infinite(_) => SpherePoint::Infinity,
        })
    }
}

/// Chordal distance on the Riemann sphere, in `[0, 2]`.
///
/// Points of modulus larger than one are handled in the chart `w = 1/z` so
/// the result stays accurate for huge (or infinite) values.
pub fn chordal(p: SpherePoint, q: SpherePoint) -> f64 {
    use SpherePoint::*;
    match (p, q) {
        (Infinity, Infinity) => 0.0,
        (Finite(a), Infinity) | (Infinity, Finite(a)) => chordal_to_infinity(a),
        (Finite(a), Finite(b)) => {
            let (na, nb) = (a.norm(), b.norm());
            let d = match (na <= 1.0, nb <= 1.0) {
                (true, true) => 2.0 * (a - b).norm() / ((1.0 + na * na) * (1.0 + nb * nb)).sqrt(),
                (false, false) => {
                    let (u, v) = (a.inv(), b.inv());
                    let (nu, nv) = (u.norm(), v.norm());
                    2.0 * (u - v).norm() / ((1.0 + nu * nu) * (1.0 + nv * nv)).sqrt()
                }
                (true, false) => mixed(a, b.inv()),
                (false, true) => mixed(b, a.inv()),
            };
            d.min(2.0)
        }
    }
}

/// `chordal(p, 1/u)` for `|p| <= 1`, `|u| < 1`.
fn mixed(p: Complex64, u: Complex64) -> f64 {
    let (np, nu) = (p.norm(), u.norm());
    2.0 * (p * u - 1.0).norm() / ((1.0 + np * np) * (1.0 + nu * nu)).sqrt()
}

fn chordal_to_infinity(a: Complex64) -> f64 {
    let n = a.norm();
    if n <= 1.0 {
        2.0 / (1.0 + n * n).sqrt()
    } else {
        let u = 1.0 / n;
        2.0 * u / (1.0 + u * u).sqrt()
    }
}

/// Stereographic image on the unit sphere in `R^3`; the chordal distance is
/// the Euclidean distance between these images.
pub fn to_unit_sphere(p: SpherePoint) -> [f64; 3] {
    match p {
        SpherePoint::Infinity => [0.0, 0.0, 1.0],
        SpherePoint::Finite(z) => {
            let n = z.norm();
            if n <= 1.0 {
                let d = 1.0 + n * n;
                [2.0 * z.re / d, 2.0 * z.im / d, (n * n - 1.0) / d]
            } else {
                let u = z.inv();
                let m = u.norm_sqr();
                let d = 1.0 + m;
                [2.0 * u.re / d, -2.0 * u.im / d, (1.0 - m) / d]
            }
        }
    }
}

/// Spherical density `2|f'| / (1 + |f|^2)` from a value and a derivative,
/// evaluated without overflow for large `|f|`.
pub fn spherical_density(value: Complex64, deriv: Complex64) -> f64 {
    let n = value.norm();
    let d = deriv.norm();
    if n <= 1.0 {
        2.0 * d / (1.0 + n * n)
    } else {
        2.0 * (d / n) / (n + 1.0 / n)
    }
}

/// A rotation of the sphere (chordal isometry) sending `a` to `0`.
///
/// For finite `a` this is `w ↦ (w - a) / (1 + conj(a) w)`; for `a = ∞` it is
/// `w ↦ 1/w`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereRotation {
    center: SpherePoint,
}

impl SphereRotation {
    pub fn sending_to_zero(a: SpherePoint) -> Self {
        SphereRotation { center: a }
    }

    pub fn apply(&self, w: SpherePoint) -> SpherePoint {
        match self.center {
            SpherePoint::Infinity => w.recip(),
            SpherePoint::Finite(a) => match w {
                SpherePoint::Infinity => {
                    if a == Complex64::new(0.0, 0.0) {
                        SpherePoint::Infinity
                    } else {
                        SpherePoint::from_complex(a.conj().inv())
                    }
                }
                SpherePoint::Finite(w) => {
                    let den = 1.0 + a.conj() * w;
                    if den == Complex64::new(0.0, 0.0) {
                        SpherePoint::Infinity
                    } else {
                        SpherePoint::from_complex((w - a) / den)
                    }
                }
            },
        }
    }
}
