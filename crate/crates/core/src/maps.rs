//! Maps from planar domains to the Riemann sphere.
//!
//! Every analysis in this crate runs against [`HoloMap`], so the same code
//! handles a parsed expression, a member of a parametric family, an affine
//! zoom of either, or a precomposition with a Möbius disk map.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fnexpr::HoloExpr;
use crate::metrics::Disk;
use crate::sphere::{chordal, spherical_density, SpherePoint};

/// A meromorphic map into the Riemann sphere with its spherical derivative.
pub trait HoloMap: Send + Sync {
    fn value(&self, z: Complex64) -> Result<SpherePoint>;

    /// `f#(z) = lim δ(f(z), f(w)) / |z - w|` for the chordal metric.
    fn sharp(&self, z: Complex64) -> Result<f64>;
}

impl<M: HoloMap + ?Sized> HoloMap for &M {
    fn value(&self, z: Complex64) -> Result<SpherePoint> {
        (**self).value(z)
    }
    fn sharp(&self, z: Complex64) -> Result<f64> {
        (**self).sharp(z)
    }
}

impl<M: HoloMap + ?Sized> HoloMap for Box<M> {
    fn value(&self, z: Complex64) -> Result<SpherePoint> {
        (**self).value(z)
    }
    fn sharp(&self, z: Complex64) -> Result<f64> {
        (**self).sharp(z)
    }
}

impl<M: HoloMap + ?Sized> HoloMap for std::sync::Arc<M> {
    fn value(&self, z: Complex64) -> Result<SpherePoint> {
        (**self).value(z)
    }
    fn sharp(&self, z: Complex64) -> Result<f64> {
        (**self).sharp(z)
    }
}

/// An expression with its family parameter fixed.
#[derive(Clone, Copy, Debug)]
pub struct Bound<'a> {
    pub expr: &'a HoloExpr,
    pub k: Option<i64>,
}

impl<'a> Bound<'a> {
    pub fn new(expr: &'a HoloExpr, k: Option<i64>) -> Self {
        Bound { expr, k }
    }
}

impl HoloMap for Bound<'_> {
    fn value(&self, z: Complex64) -> Result<SpherePoint> {
        self.expr.eval(z, self.k)
    }
    fn sharp(&self, z: Complex64) -> Result<f64> {
        self.expr.spherical_derivative(z, self.k)
    }
}

impl HoloMap for HoloExpr {
    fn value(&self, z: Complex64) -> Result<SpherePoint> {
        self.eval(z, None)
    }
    fn sharp(&self, z: Complex64) -> Result<f64> {
        self.spherical_derivative(z, None)
    }
}

/// `w ↦ inner(center + scale · w)`.
#[derive(Clone, Debug)]
pub struct Zoom<M> {
    pub inner: M,
    pub center: Complex64,
    pub scale: Complex64,
}

impl<M> Zoom<M> {
    pub fn new(inner: M, center: Complex64, scale: Complex64) -> Self {
        Zoom { inner, center, scale }
    }

    pub fn point(&self, w: Complex64) -> Complex64 {
        self.center + self.scale * w
    }
}

impl<M: HoloMap> HoloMap for Zoom<M> {
    fn value(&self, w: Complex64) -> Result<SpherePoint> {
        self.inner.value(self.point(w))
    }
    fn sharp(&self, w: Complex64) -> Result<f64> {
        Ok(self.scale.norm() * self.inner.sharp(self.point(w))?)
    }
}

/// Möbius transformation `w ↦ (a w + b) / (c w + d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mobius {
    pub fn identity() -> Self {
        let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Mobius { a: one, b: zero, c: zero, d: one }
    }

    /// `w ↦ shift + scale · w`.
    pub fn affine(shift: Complex64, scale: Complex64) -> Self {
        let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Mobius { a: scale, b: shift, c: zero, d: one }
    }

    /// The biholomorphism `src → dst` given by
    /// `w ↦ dst.center + dst.radius · e^{iθ} (u - α) / (1 - conj(α) u)` with
    /// `u = (w - src.center) / src.radius`, `|α| < 1`.
    pub fn disk_to_disk(src: &Disk, dst: &Disk, rotation: f64, alpha: Complex64) -> Result<Self> {
        if alpha.norm() >= 1.0 {
            return Err(Error::invalid(format!("automorphism parameter |α| = {} must be < 1", alpha.norm())));
        }
        let rot = Complex64::from_polar(dst.radius, rotation);
        let to_unit = Mobius::affine(-src.center / src.radius, Complex64::new(1.0 / src.radius, 0.0));
        let auto = Mobius {
            a: Complex64::new(1.0, 0.0),
            b: -alpha,
            c: -alpha.conj(),
            d: Complex64::new(1.0, 0.0),
        };
        let out = Mobius::affine(dst.center, rot);
        Ok(out.compose(&auto).compose(&to_unit))
    }

    /// `self ∘ other`.
    pub fn compose(&self, o: &Mobius) -> Mobius {
        Mobius {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn apply(&self, w: Complex64) -> SpherePoint {
        let den = self.c * w + self.d;
        let num = self.a * w + self.b;
        if den == Complex64::new(0.0, 0.0) {
            SpherePoint::Infinity
        } else {
            SpherePoint::from_complex(num / den)
        }
    }

    pub fn derivative(&self, w: Complex64) -> Complex64 {
        let den = self.c * w + self.d;
        (self.a * self.d - self.b * self.c) / (den * den)
    }

    /// Largest deviation found when checking that `self` maps `src` onto
    /// `dst`: boundary circle to boundary circle and center inside.
    pub fn disk_map_defect(&self, src: &Disk, dst: &Disk) -> f64 {
        let mut defect: f64 = 0.0;
        for j in 0..64 {
            let w = src.point(1.0, TAU * j as f64 / 64.0);
            match self.apply(w) {
                SpherePoint::Finite(p) => {
                    defect = defect.max(((p - dst.center).norm() - dst.radius).abs() / dst.radius)
                }
                SpherePoint::Infinity => return f64::INFINITY,
            }
        }
        match self.apply(src.center) {
            SpherePoint::Finite(p) if dst.contains(p) => defect,
            _ => f64::INFINITY,
        }
    }
}

/// `w ↦ inner(φ(w))` for a Möbius `φ` taking values in the domain of `inner`.
#[derive(Clone, Debug)]
pub struct Precomposed<M> {
    pub inner: M,
    pub mobius: Mobius,
}

impl<M: HoloMap> HoloMap for Precomposed<M> {
    fn value(&self, w: Complex64) -> Result<SpherePoint> {
        match self.mobius.apply(w) {
            SpherePoint::Finite(z) => self.inner.value(z),
            SpherePoint::Infinity => Err(Error::invalid("Möbius map sends the sample to ∞")),
        }
    }
    fn sharp(&self, w: Complex64) -> Result<f64> {
        match self.mobius.apply(w) {
            SpherePoint::Finite(z) => Ok(self.inner.sharp(z)? * self.mobius.derivative(w).norm()),
            SpherePoint::Infinity => Err(Error::invalid("Möbius map sends the sample to ∞")),
        }
    }
}

/// Post-composition with a rotation of the sphere, `w ↦ (f(w) - a) / (1 + conj(a) f(w))`.
///
/// Rotations are chordal isometries, so the spherical derivative is unchanged.
#[derive(Clone, Debug)]
pub struct Rotated<M> {
    pub inner: M,
    pub rotation: crate::sphere::SphereRotation,
}

impl<M: HoloMap> HoloMap for Rotated<M> {
    fn value(&self, z: Complex64) -> Result<SpherePoint> {
        Ok(self.rotation.apply(self.inner.value(z)?))
    }
    fn sharp(&self, z: Complex64) -> Result<f64> {
        self.inner.sharp(z)
    }
}

/// The q-periodic meromorphic function
/// `f(z) = θ(z/a)² / (θ(z/b) θ(z/c))` on `C \ {0}`, with
/// `θ(z) = Π_{n≥0} (1 - qⁿ z)(1 - qⁿ⁺¹/z)`, `b = a e^{iφ}`, `c = a e^{-iφ}`.
///
/// Since `θ(qz) = -θ(z)/z` and `a² = bc`, `f(qz) = f(z)`: the map has an
/// essential singularity at the origin while `|z| f#(z)` stays bounded, so it
/// is exceptional in Julia's sense and its rescalings `f(|w_k| v)` along
/// `|w_k| = qⁿ` are literally constant in `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QPeriodic {
    pub q: f64,
    pub a: Complex64,
    pub phi: f64,
}

impl QPeriodic {
    pub fn new(q: f64, a: Complex64, phi: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::invalid(format!("need 0 < q < 1, got {q}")));
        }
        if a.norm() == 0.0 {
            return Err(Error::invalid("zero parameter a"));
        }
        Ok(QPeriodic { q, a, phi })
    }

    /// Default instance: `q = 1/10`, zeros on `|z| = 0.3·10⁻ⁿ`, poles rotated by `±2π/3`.
    pub fn standard() -> Self {
        QPeriodic {
            q: 0.1,
            a: Complex64::new(0.3, 0.0),
            phi: TAU / 3.0,
        }
    }

    /// Reduce `z` into the fundamental annulus `q < |z| <= 1`; the value of
    /// `f` is unchanged.
    fn reduce(&self, z: Complex64) -> Complex64 {
        let n = (z.norm().ln() / self.q.ln()).floor();
        // |z| = q^t, t in [n, n+1): multiply by q^{-n}
        let mut w = z * self.q.powf(-n);
        while w.norm() > 1.0 {
            w *= self.q;
        }
        while w.norm() <= self.q {
            w /= self.q;
        }
        w
    }

    fn theta(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        let mut qn = 1.0;
        for _ in 0..200 {
            let t1 = Complex64::new(1.0, 0.0) - z * qn;
            let t2 = Complex64::new(1.0, 0.0) - (qn * self.q) / z;
            acc *= t1 * t2;
            qn *= self.q;
            if qn * z.norm() < 1e-18 && qn * self.q / z.norm() < 1e-18 {
                break;
            }
        }
        acc
    }

    fn theta_log_derivative(&self, z: Complex64) -> Complex64 {
        // d/dz log θ(z) = Σ [ -qⁿ/(1 - qⁿz) + (qⁿ⁺¹/z²)/(1 - qⁿ⁺¹/z) ]
        let mut acc = Complex64::new(0.0, 0.0);
        let mut qn = 1.0;
        for _ in 0..200 {
            let q1 = qn * self.q;
            acc += -qn / (Complex64::new(1.0, 0.0) - z * qn)
                + (q1 / (z * z)) / (Complex64::new(1.0, 0.0) - q1 / z);
            qn *= self.q;
            if qn * z.norm() < 1e-18 && qn * self.q / z.norm() < 1e-18 {
                break;
            }
        }
        acc
    }

    fn params(&self) -> (Complex64, Complex64, Complex64) {
        let b = self.a * Complex64::from_polar(1.0, self.phi);
        let c = self.a * Complex64::from_polar(1.0, -self.phi);
        (self.a, b, c)
    }
}

impl HoloMap for QPeriodic {
    fn value(&self, z: Complex64) -> Result<SpherePoint> {
        if z.norm() == 0.0 {
            return Err(Error::Essential { z: z.to_string() });
        }
        let w = self.reduce(z);
        let (a, b, c) = self.params();
        let num = self.theta(w / a).powi(2);
        let den = self.theta(w / b) * self.theta(w / c);
        if den == Complex64::new(0.0, 0.0) {
            return Ok(SpherePoint::Infinity);
        }
        Ok(SpherePoint::from_complex(num / den))
    }

    fn sharp(&self, z: Complex64) -> Result<f64> {
        if z.norm() == 0.0 {
            return Err(Error::Essential { z: z.to_string() });
        }
        let w = self.reduce(z);
        let scale = w / z; // f(z) = f(w), dw/dz = w/z
        let (a, b, c) = self.params();
        let value = self.value(w)?;
        // log-derivative of f at w
        let logd = 2.0 * self.theta_log_derivative(w / a) / a
            - self.theta_log_derivative(w / b) / b
            - self.theta_log_derivative(w / c) / c;
        match value {
            SpherePoint::Finite(v) => Ok(spherical_density(v, v * logd * scale)),
            // at a pole use 1/f, whose log-derivative is -logd
            SpherePoint::Infinity => {
                let h = 1e-7 * w.norm();
                let near = self.value(w + h)?;
                let far = self.value(w - h)?;
                Ok(chordal(near, far) / (2.0 * h) * scale.norm())
            }
        }
    }
}

impl fmt::Display for QPeriodic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "qperiodic(q={}, a={}, phi={})", self.q, self.a, self.phi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zoom_scales_the_density() {
        let e = HoloExpr::parse("z^2").unwrap();
        let z = Zoom::new(Bound::new(&e, None), cx(0.5, 0.0), cx(0.0, 0.25));
        let w = cx(0.2, -0.4);
        let p = z.point(w);
        assert_eq!(z.value(w).unwrap(), SpherePoint::Finite(p * p));
        let s = z.sharp(w).unwrap();
        assert!((s - 0.25 * e.spherical_derivative(p, None).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn disk_to_disk_maps_boundary_to_boundary() {
        let src = Disk::new(cx(1.0, 1.0), 0.5).unwrap();
        let dst = Disk::new(cx(-0.3, 0.2), 2.0).unwrap();
        let m = Mobius::disk_to_disk(&src, &dst, 0.7, cx(0.3, -0.4)).unwrap();
        assert!(m.disk_map_defect(&src, &dst) < 1e-12);
        let affine = Mobius::affine(cx(3.0, 0.0), cx(1.0, 0.0));
        assert!(affine.disk_map_defect(&src, &dst) > 0.1);
        assert!(Mobius::disk_to_disk(&src, &dst, 0.0, cx(1.0, 0.0)).is_err());
    }

    #[test]
    fn mobius_derivative_matches_difference() {
        let m = Mobius { a: cx(1.0, 2.0), b: cx(0.5, 0.0), c: cx(0.1, -0.3), d: cx(2.0, 0.0) };
        let w = cx(0.3, 0.2);
        let h = 1e-6;
        let fd = (m.apply(w + h).finite().unwrap() - m.apply(w - h).finite().unwrap()) / (2.0 * h);
        assert!((fd - m.derivative(w)).norm() < 1e-8);
    }

    #[test]
    fn q_periodicity() {
        let f = QPeriodic::standard();
        for z in [cx(0.37, 0.21), cx(-0.05, 0.6), cx(0.9, -0.1)] {
            let a = f.value(z).unwrap();
            let b = f.value(z * 0.1).unwrap();
            let c = f.value(z * 1e-4).unwrap();
            assert!(chordal(a, b) < 1e-12 && chordal(a, c) < 1e-12, "{a} {b} {c}");
            // |z| f#(z) is scale invariant
            let s1 = z.norm() * f.sharp(z).unwrap();
            let s2 = (z * 1e-3).norm() * f.sharp(z * 1e-3).unwrap();
            assert!((s1 - s2).abs() < 1e-8 * s1.max(1.0));
        }
    }

    #[test]
    fn q_periodic_sharp_matches_difference_quotient() {
        let f = QPeriodic::standard();
        for z in [cx(0.45, 0.12), cx(-0.2, -0.5), cx(0.03, 0.06)] {
            let h = 1e-7 * z.norm();
            let fd = chordal(f.value(z + h).unwrap(), f.value(z - h).unwrap()) / (2.0 * h);
            let s = f.sharp(z).unwrap();
            assert!((fd - s).abs() < 1e-5 * s.max(1.0), "{z}: {fd} vs {s}");
        }
    }

    #[test]
    fn q_periodic_has_zeros_and_poles_where_expected() {
        let f = QPeriodic::standard();
        assert!(f.value(cx(0.3, 0.0)).unwrap().norm() < 1e-12);
        let pole = cx(0.3, 0.0) * Complex64::from_polar(1.0, TAU / 3.0);
        assert!(f.value(pole).unwrap().norm() > 1e10);
    }
}
