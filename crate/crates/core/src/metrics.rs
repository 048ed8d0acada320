//! Closed-form distances on disks and on the punctured unit disk, and
//! chordal diameters of image circles.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::HoloMap;
use crate::sphere::{chordal, to_unit_sphere, SpherePoint};

/// Default number of angular samples per circle.
pub const DEFAULT_CIRCLE_SAMPLES: usize = 1024;
/// Upper bound on the alternating refinement sweeps per candidate pair.
pub const REFINEMENT_ROUNDS: usize = 200;
/// Number of sampled candidate pairs that are locally refined.
pub const REFINED_PAIRS: usize = 16;

/// The open disk `D(center, radius)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Complex64,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("disk radius must be positive, got {radius}")));
        }
        Ok(Disk { center, radius })
    }

    /// The disk `D(0, radius)`.
    pub fn centered(radius: f64) -> Result<Self> {
        Disk::new(Complex64::new(0.0, 0.0), radius)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() < self.radius
    }

    /// Point at polar coordinates `(rho * radius, theta)` relative to the center.
    pub fn point(&self, rho: f64, theta: f64) -> Complex64 {
        self.center + Complex64::from_polar(rho * self.radius, theta)
    }
}

impl fmt::Display for Disk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D({}, {})", self.center, self.radius)
    }
}

/// `arccosh(1 + x)` for `x >= 0`, accurate for small `x`.
pub(crate) fn acosh1p(x: f64) -> f64 {
    (x + (x * (x + 2.0)).sqrt()).ln_1p()
}

/// Distance of the Poincaré metric `R|dz| / (R^2 - |z - a|^2)` on `D(a, R)`.
pub fn poincare_distance(disk: &Disk, z: Complex64, w: Complex64) -> Result<f64> {
    for p in [z, w] {
        if !disk.contains(p) {
            return Err(Error::outside(p, disk));
        }
    }
    if z == w {
        return Ok(0.0);
    }
    let r = disk.radius;
    let (u, v) = (z - disk.center, w - disk.center);
    let num = r * (z - w).norm();
    let den = (r * r - u * v.conj()).norm();
    Ok((num / den).min(1.0).atanh())
}

/// Two-sided Euclidean comparison for the Poincaré distance on `D(a, R)`
/// restricted to the closed subdisk of radius `r`:
/// `|z - w| / R <= d(z, w) <= R |z - w| / (R^2 - r^2)`.
pub fn comparison_bounds(disk: &Disk, r: f64, z: Complex64, w: Complex64) -> Result<(f64, f64)> {
    let big = disk.radius;
    if !(r > 0.0 && r < big) {
        return Err(Error::invalid(format!("need 0 < r < R, got r = {r}, R = {big}")));
    }
    let slack = 1e-12 * big;
    for p in [z, w] {
        if (p - disk.center).norm() > r + slack {
            return Err(Error::outside(p, format!("closed D({}, {r})", disk.center)));
        }
    }
    let d = (z - w).norm();
    Ok((d / big, big * d / (big * big - r * r)))
}

fn check_punctured(z: Complex64) -> Result<()> {
    let n = z.norm();
    if n > 0.0 && n < 1.0 {
        Ok(())
    } else {
        Err(Error::outside(z, "D(0,1) \\ {0}"))
    }
}

/// Lift of the punctured disk to the upper half-plane, `τ = log(z) / (2πi)`.
fn lift(z: Complex64) -> Complex64 {
    Complex64::new(z.arg() / TAU, -z.norm().ln() / TAU)
}

/// Distance of the complete hyperbolic metric `|dz| / (-|z| log|z|)` on the
/// punctured unit disk.
///
/// Both points are lifted to the upper half-plane and the half-plane distance
/// is minimized over the deck translations `τ ↦ τ + n`.
pub fn punctured_distance(z: Complex64, w: Complex64) -> Result<f64> {
    check_punctured(z)?;
    check_punctured(w)?;
    if z == w {
        return Ok(0.0);
    }
    let (t1, t2) = (lift(z), lift(w));
    let span = 2 + (t1.re - t2.re).abs().ceil() as i64;
    let denom = 2.0 * t1.im * t2.im;
    let best = (-span..=span)
        .map(|n| {
            let d = t1 - t2 - Complex64::new(n as f64, 0.0);
            d.norm_sqr() / denom
        })
        .fold(f64::INFINITY, f64::min);
    Ok(acosh1p(best))
}

/// Length of `∂D(r)` in the hyperbolic metric of the punctured disk,
/// `2π / (-log r)`.
pub fn punctured_circle_length(r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::outside(r, "(0, 1)"));
    }
    Ok(TAU / (-r.ln()))
}

/// Chordal diameter of a sampled image circle together with the angles of
/// the two points realizing it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleDiameter {
    pub diameter: f64,
    pub theta1: f64,
    pub theta2: f64,
}

/// Evaluate `f` on `r e^{iθ}`; a `0/0` node exactly on the sample moves the
/// sample by half a step.
fn eval_on_circle<M: HoloMap + ?Sized>(f: &M, r: f64, theta: f64, half_step: f64) -> Result<SpherePoint> {
    match f.value(Complex64::from_polar(r, theta)) {
        Err(Error::Indeterminate { .. }) => f.value(Complex64::from_polar(r, theta + half_step)),
        other => other,
    }
}

fn sq_dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

/// Maximize a unimodal-ish function on `[lo, hi]` by golden-section search.
fn golden_max(mut lo: f64, mut hi: f64, iters: usize, mut g: impl FnMut(f64) -> f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..iters {
        if g1 < g2 {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + inv_phi * (hi - lo);
            g2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - inv_phi * (hi - lo);
            g1 = g(x1);
        }
    }
    if g1 >= g2 {
        (x1, g1)
    } else {
        (x2, g2)
    }
}

/// Chordal diameter of `f(∂D(r))`: the maximum over sampled pairs, refined by
/// golden-section search in each witness angle.
pub fn diam_circle_image<M: HoloMap + ?Sized>(f: &M, r: f64, n_samples: usize) -> Result<CircleDiameter> {
    if n_samples < 8 {
        return Err(Error::invalid(format!("need at least 8 samples per circle, got {n_samples}")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!("circle radius must be positive, got {r}")));
    }
    let step = TAU / n_samples as f64;
    let values: Vec<SpherePoint> = (0..n_samples)
        .into_par_iter()
        .map(|j| eval_on_circle(f, r, j as f64 * step, 0.5 * step))
        .collect::<Result<_>>()?;
    let pts: Vec<[f64; 3]> = values.iter().map(|&v| to_unit_sphere(v)).collect();

    // row maxima in parallel, reduced in index order
    let rows: Vec<(f64, usize)> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut best = (-1.0, i);
            for j in (i + 1)..n_samples {
                let d = sq_dist(&pts[i], &pts[j]);
                if d > best.0 {
                    best = (d, j);
                }
            }
            best
        })
        .collect();
    // Candidate pairs: the best partner of each row, strongest first.
    let mut order: Vec<usize> = (0..n_samples).collect();
    order.sort_by(|&a, &b| rows[b].0.total_cmp(&rows[a].0).then(a.cmp(&b)));

    let at = |theta: f64| f.value(Complex64::from_polar(r, theta)).ok();
    let refine = |i: usize, j: usize| -> (f64, f64, f64) {
        let (mut t1, mut t2) = (i as f64 * step, j as f64 * step);
        let mut best = chordal(values[i], values[j]);
        if best <= 0.0 {
            return (best, t1, t2);
        }
        // Alternate 1-D searches in each angle; the window shrinks only once
        // a sweep stops improving.
        let mut h = step;
        for _ in 0..REFINEMENT_ROUNDS {
            let before = best;
            if let Some(v2) = at(t2) {
                let (t, d) = golden_max(t1 - h, t1 + h, 40, |t| at(t).map_or(-1.0, |v| chordal(v, v2)));
                if d > best {
                    (t1, best) = (t, d);
                }
            }
            if let Some(v1) = at(t1) {
                let (t, d) = golden_max(t2 - h, t2 + h, 40, |t| at(t).map_or(-1.0, |v| chordal(v1, v)));
                if d > best {
                    (t2, best) = (t, d);
                }
            }
            if best - before <= 1e-15 {
                h *= 0.5;
                if h < step * 1e-6 {
                    break;
                }
            }
        }
        (best, t1, t2)
    };
    let (best, t1, t2) = order
        .par_iter()
        .take(REFINED_PAIRS)
        .map(|&i| refine(i, rows[i].1))
        .collect::<Vec<_>>()
        .into_iter()
        .fold((-1.0, 0.0, 0.0), |acc, c| if c.0 > acc.0 { c } else { acc });
    Ok(CircleDiameter {
        diameter: best.min(2.0),
        theta1: t1.rem_euclid(TAU),
        theta2: t2.rem_euclid(TAU),
    })
}

/// One row of a [`DiameterProfile`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub radius: f64,
    pub diameter: f64,
    pub theta1: f64,
    pub theta2: f64,
}

/// Chordal diameters of image circles along a decreasing radius schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiameterProfile {
    pub entries: Vec<ProfileEntry>,
    pub metric: String,
    pub samples_per_circle: usize,
}

impl DiameterProfile {
    pub fn diameters(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.diameter)
    }

    pub fn last_diameters(&self, n: usize) -> &[ProfileEntry] {
        let len = self.entries.len();
        &self.entries[len.saturating_sub(n)..]
    }

    /// CSV with header `radius,diameter,theta1,theta2`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("radius,diameter,theta1,theta2\n");
        for e in &self.entries {
            out.push_str(&format!("{:e},{:e},{:e},{:e}\n", e.radius, e.diameter, e.theta1, e.theta2));
        }
        out
    }
}

/// Validate a radius schedule: nonempty, strictly decreasing, inside `(0, 1)`.
pub fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::invalid("empty radius schedule"));
    }
    for &r in radii {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::invalid(format!("radius {r} outside (0, 1)")));
        }
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("radii must be strictly decreasing"));
    }
    Ok(())
}

/// Diameter profile of `f` over a strictly decreasing radius schedule.
pub fn diameter_profile<M: HoloMap + ?Sized>(f: &M, radii: &[f64], n_samples: usize) -> Result<DiameterProfile> {
    check_radii(radii)?;
    let entries = radii
        .iter()
        .map(|&r| {
            diam_circle_image(f, r, n_samples).map(|d| ProfileEntry {
                radius: r,
                diameter: d.diameter,
                theta1: d.theta1,
                theta2: d.theta2,
            })
        })
        .collect::<Result<_>>()?;
    Ok(DiameterProfile {
        entries,
        metric: "chordal".into(),
        samples_per_circle: n_samples,
    })
}

/// Geometric radius schedule `start, start/10, ...` down to `end`.
pub fn geometric_radii(start: f64, end: f64) -> Result<Vec<f64>> {
    if !(start > 0.0 && end > 0.0 && end <= start) {
        return Err(Error::invalid(format!("bad radius range {start}:{end}")));
    }
    let steps = (start / end).log10().round() as i32;
    Ok((0..=steps).map(|j| start / 10f64.powi(j)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fnexpr::HoloExpr;
    use std::f64::consts::PI;
    use crate::maps::Bound;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Trapezoid quadrature of the density `R / (R^2 - t^2)` along `[0, s]`.
    fn radial_quadrature(radius: f64, s: f64) -> f64 {
        let n = 200_000;
        let h = s / n as f64;
        let g = |t: f64| radius / (radius * radius - t * t);
        let mut acc = 0.5 * (g(0.0) + g(s));
        for j in 1..n {
            acc += g(j as f64 * h);
        }
        acc * h
    }

    #[test]
    fn poincare_examples() {
        let unit = Disk::centered(1.0).unwrap();
        assert_eq!(poincare_distance(&unit, cx(0.0, 0.0), cx(0.0, 0.0)).unwrap(), 0.0);
        let d = poincare_distance(&unit, cx(0.0, 0.0), cx(0.5, 0.0)).unwrap();
        assert!((d - 0.5f64.atanh()).abs() < 1e-15);
        assert!((d - 0.549306).abs() < 1e-6);
        // geodesic from the center is the radius
        assert!((radial_quadrature(1.0, 0.5) - d).abs() < 1e-9);
        let shifted = Disk::new(cx(0.3, -0.2), 1.0).unwrap();
        let shift = cx(0.3, -0.2);
        let d2 = poincare_distance(&shifted, shift, cx(0.5, 0.0) + shift).unwrap();
        assert!((d2 - d).abs() < 1e-15);
    }

    #[test]
    fn poincare_rejects_outside_points() {
        let unit = Disk::centered(1.0).unwrap();
        assert!(matches!(
            poincare_distance(&unit, cx(1.0, 0.0), cx(0.0, 0.0)),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn comparison_examples() {
        let unit = Disk::centered(1.0).unwrap();
        let (lo, hi) = comparison_bounds(&unit, 0.5, cx(0.0, 0.0), cx(0.5, 0.0)).unwrap();
        assert!((lo - 0.5).abs() < 1e-15 && (hi - 2.0 / 3.0).abs() < 1e-15);
        let d = poincare_distance(&unit, cx(0.0, 0.0), cx(0.5, 0.0)).unwrap();
        assert!(lo <= d && d <= hi);
        assert_eq!(comparison_bounds(&unit, 0.5, cx(0.1, 0.1), cx(0.1, 0.1)).unwrap(), (0.0, 0.0));
        let two = Disk::centered(2.0).unwrap();
        let (lo, hi) = comparison_bounds(&two, 1.0, cx(0.0, 0.0), cx(1.0, 0.0)).unwrap();
        assert!((lo - 0.5).abs() < 1e-15 && (hi - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            comparison_bounds(&unit, 0.5, cx(0.0, 0.0), cx(0.6, 0.0)),
            Err(Error::OutsideDomain { .. })
        ));
        assert!(comparison_bounds(&unit, 1.5, cx(0.0, 0.0), cx(0.1, 0.0)).is_err());
    }

    #[test]
    fn punctured_examples() {
        let a = (-TAU).exp();
        assert_eq!(punctured_distance(cx(a, 0.0), cx(a, 0.0)).unwrap(), 0.0);
        let d = punctured_distance(cx(a, 0.0), cx(-a, 0.0)).unwrap();
        assert!((d - 1.125f64.acosh()).abs() < 1e-12, "{d}");
        assert!((d - 0.4949329230945269).abs() < 1e-12);
        let (z, w) = (cx(0.1, 0.3), cx(-0.02, -0.5));
        assert_eq!(punctured_distance(z, w).unwrap(), punctured_distance(w, z).unwrap());
        assert!(punctured_distance(cx(0.0, 0.0), z).is_err());
        assert!(punctured_distance(cx(1.0, 0.0), z).is_err());
    }

    #[test]
    fn punctured_distance_matches_radial_quadrature() {
        // along a radius the geodesic is the segment: ∫ dt / (t (-log t))
        let (r1, r2) = (0.5f64, 0.05f64);
        let exact = ((-r2.ln()) / (-r1.ln())).ln();
        let d = punctured_distance(cx(r1, 0.0), cx(r2, 0.0)).unwrap();
        assert!((d - exact).abs() < 1e-12, "{d} vs {exact}");
    }

    #[test]
    fn circle_length_examples() {
        let a = (-TAU).exp();
        assert!((punctured_circle_length(a).unwrap() - 1.0).abs() < 1e-15);
        assert!((punctured_circle_length((-1f64).exp()).unwrap() - TAU).abs() < 1e-14);
        assert!(punctured_circle_length(1e-3).unwrap() < punctured_circle_length(1e-2).unwrap());
        assert!(punctured_circle_length(0.0).is_err());
        assert!(punctured_circle_length(1.0).is_err());
    }

    fn expr(s: &str) -> HoloExpr {
        HoloExpr::parse(s).unwrap()
    }

    #[test]
    fn diameter_examples() {
        let c = expr("2+i");
        assert_eq!(diam_circle_image(&Bound::new(&c, None), 0.3, 64).unwrap().diameter, 0.0);
        let id = expr("z");
        let d = diam_circle_image(&Bound::new(&id, None), 0.5, 1024).unwrap();
        assert!((d.diameter - 1.6).abs() < 1e-12, "{d:?}");
        assert!(((d.theta1 - d.theta2).abs() - PI).abs() < 1e-6);
        let e = expr("exp(1/z)");
        let d = diam_circle_image(&Bound::new(&e, None), 0.1, 1024).unwrap();
        assert!(d.diameter >= 1.99, "{d:?}");
        assert!(diam_circle_image(&Bound::new(&e, None), 0.1, 4).is_err());
    }

    #[test]
    fn sample_on_removable_zero_over_zero_is_shifted() {
        // sin(z)/z-like 0/0 at z = r: (z - 0.5)/(z - 0.5) evaluated at the sample θ = 0
        let f = expr("(z - 0.5)/(z - 0.5)");
        let d = diam_circle_image(&Bound::new(&f, None), 0.5, 16).unwrap();
        assert!(d.diameter < 1e-12);
    }

    #[test]
    fn profile_examples() {
        let radii = geometric_radii(1e-1, 1e-6).unwrap();
        assert_eq!(radii.len(), 6);
        let id = expr("z");
        let p = diameter_profile(&Bound::new(&id, None), &radii, 256).unwrap();
        let ds: Vec<f64> = p.diameters().collect();
        assert!(ds.windows(2).all(|w| w[1] < w[0]), "{ds:?}");
        assert!(*ds.last().unwrap() < 1e-5);
        let inv = expr("1/z");
        let p = diameter_profile(&Bound::new(&inv, None), &radii, 256).unwrap();
        assert!(p.diameters().last().unwrap() < 1e-5);
        let e = expr("exp(1/z)");
        let p = diameter_profile(&Bound::new(&e, None), &radii, 1024).unwrap();
        assert!(p.diameters().all(|d| d >= 1.99), "{:?}", p.entries);
        let csv = p.to_csv();
        assert!(csv.starts_with("radius,diameter,theta1,theta2\n"));
        assert_eq!(csv.lines().count(), 7);
    }

    #[test]
    fn radii_validation() {
        let id = expr("z");
        let f = Bound::new(&id, None);
        assert!(diameter_profile(&f, &[0.1, 0.2], 64).is_err());
        assert!(diameter_profile(&f, &[1.5, 0.2], 64).is_err());
        assert!(diameter_profile(&f, &[], 64).is_err());
    }
}
