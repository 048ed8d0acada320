//! Winding numbers of sampled closed curves and the annulus separation test.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::maps::HoloMap;
use crate::metrics::Disk;

pub const ANNULUS_SAMPLES: usize = 256;

/// Index of the closed polygon through `curve` (last point joined to the
/// first) about `p`.
pub fn winding_number(curve: &[Complex64], p: Complex64) -> Result<i64> {
    if curve.len() < 3 {
        return Err(Error::invalid("a closed curve needs at least three samples"));
    }
    let scale = curve.iter().map(|c| (c - p).norm()).fold(0.0, f64::max);
    let nearest = curve.iter().map(|c| (c - p).norm()).fold(f64::INFINITY, f64::min);
    if nearest <= 1e-12 * scale.max(1.0) || !nearest.is_finite() {
        return Err(Error::PointOnCurve { distance: nearest });
    }
    let mut total = 0.0;
    for (j, a) in curve.iter().enumerate() {
        let b = curve[(j + 1) % curve.len()];
        let step = ((b - p) / (a - p)).arg();
        if step.abs() > 0.9 * PI {
            return Err(Error::NonIntegral { value: total / TAU });
        }
        total += step;
    }
    let value = total / TAU;
    let rounded = value.round();
    if (value - rounded).abs() > 0.1 {
        return Err(Error::NonIntegral { value });
    }
    Ok(rounded as i64)
}

fn inside(curve: &[Complex64], disk: &Disk) -> bool {
    curve.iter().all(|&c| disk.contains(c))
}

fn in_closure(p: Complex64, disk: &Disk) -> bool {
    (p - disk.center).norm() <= disk.radius
}

/// The separated configuration on sampled data: `outer` inside `disk_a`,
/// `inner` inside `disk_b`, `value` outside both closures and both curves of
/// index zero about `value`.
pub fn annulus_separation_check_samples(
    outer: &[Complex64],
    inner: &[Complex64],
    value: Complex64,
    disk_a: &Disk,
    disk_b: &Disk,
) -> Result<bool> {
    if !inside(outer, disk_a) || !inside(inner, disk_b) {
        return Ok(false);
    }
    if in_closure(value, disk_a) || in_closure(value, disk_b) {
        return Ok(false);
    }
    Ok(winding_number(outer, value)? == 0 && winding_number(inner, value)? == 0)
}

fn finite_circle<M: HoloMap + ?Sized>(f: &M, r: f64) -> Result<Vec<Complex64>> {
    (0..ANNULUS_SAMPLES)
        .map(|j| {
            let z = Complex64::from_polar(r, TAU * j as f64 / ANNULUS_SAMPLES as f64);
            f.value(z)?
                .finite()
                .ok_or_else(|| Error::invalid(format!("f has a pole on |z| = {r}; choose another chart")))
        })
        .collect()
}

/// Sample `f` on `|z| = r_out`, `|z| = r_in` and at `y0`, then run
/// [`annulus_separation_check_samples`].
pub fn annulus_separation_check<M: HoloMap + ?Sized>(
    f: &M,
    r_in: f64,
    r_out: f64,
    disk_a: &Disk,
    disk_b: &Disk,
    y0: Complex64,
) -> Result<bool> {
    if !(r_in > 0.0 && r_in < y0.norm() && y0.norm() < r_out) {
        return Err(Error::invalid(format!("need 0 < r_in < |y0| < r_out, got {r_in}, {}, {r_out}", y0.norm())));
    }
    let outer = finite_circle(f, r_out)?;
    let inner = finite_circle(f, r_in)?;
    let value = f
        .value(y0)?
        .finite()
        .ok_or_else(|| Error::invalid("f(y0) is infinite; choose another chart"))?;
    annulus_separation_check_samples(&outer, &inner, value, disk_a, disk_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fnexpr::HoloExpr;
    use crate::maps::Bound;

    fn circle(center: Complex64, radius: f64, n: usize, turns: i64) -> Vec<Complex64> {
        (0..n)
            .map(|j| center + Complex64::from_polar(radius, TAU * (turns * j as i64) as f64 / n as f64))
            .collect()
    }

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn standard_indices() {
        let unit = circle(cx(0.0, 0.0), 1.0, 256, 1);
        assert_eq!(winding_number(&unit, cx(0.0, 0.0)).unwrap(), 1);
        assert_eq!(winding_number(&unit, cx(3.0, 0.0)).unwrap(), 0);
        let twice = circle(cx(0.0, 0.0), 1.0, 512, 2);
        assert_eq!(winding_number(&twice, cx(0.1, 0.0)).unwrap(), 2);
        let reversed: Vec<_> = unit.iter().rev().copied().collect();
        assert_eq!(winding_number(&reversed, cx(0.0, 0.0)).unwrap(), -1);
    }

    #[test]
    fn explicit_closing_sample_is_harmless() {
        let mut unit = circle(cx(0.0, 0.0), 1.0, 64, 1);
        unit.push(unit[0]);
        assert_eq!(winding_number(&unit, cx(0.0, 0.0)).unwrap(), 1);
    }

    #[test]
    fn failures() {
        let unit = circle(cx(0.0, 0.0), 1.0, 64, 1);
        assert!(matches!(winding_number(&unit, cx(1.0, 0.0)), Err(Error::PointOnCurve { .. })));
        let coarse = circle(cx(0.0, 0.0), 1.0, 4, 2);
        assert!(matches!(winding_number(&coarse, cx(0.0, 0.0)), Err(Error::NonIntegral { .. })));
    }

    #[test]
    fn identity_never_separates() {
        let f = HoloExpr::parse("z").unwrap();
        let g = Bound::new(&f, None);
        let a = Disk::new(cx(0.0, 0.0), 0.95).unwrap();
        let b = Disk::new(cx(0.0, 0.0), 0.15).unwrap();
        assert!(!annulus_separation_check(&g, 0.1, 0.9, &a, &b, cx(0.5, 0.0)).unwrap());
        let outer = circle(cx(0.0, 0.0), 0.9, 256, 1);
        assert_eq!(winding_number(&outer, cx(0.5, 0.0)).unwrap(), 1);
        let far_a = Disk::new(cx(5.0, 0.0), 1.0).unwrap();
        let far_b = Disk::new(cx(-5.0, 0.0), 1.0).unwrap();
        assert!(!annulus_separation_check(&g, 0.1, 0.9, &far_a, &far_b, cx(0.5, 0.0)).unwrap());
    }

    #[test]
    fn synthetic_impossible_configuration() {
        let a = Disk::new(cx(5.0, 0.0), 1.0).unwrap();
        let b = Disk::new(cx(-5.0, 0.0), 1.0).unwrap();
        let outer = circle(cx(5.0, 0.0), 0.5, 128, 1);
        let inner = circle(cx(-5.0, 0.0), 0.5, 128, 1);
        assert!(annulus_separation_check_samples(&outer, &inner, cx(0.0, 0.0), &a, &b).unwrap());
    }
}
