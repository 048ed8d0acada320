//! Deterministic maximization of a scalar objective over a disk: a Vogel
//! spiral screen followed by multi-start compass search.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::Disk;

pub const STARTS: usize = 16;
pub const ASCENT_ITERATIONS: usize = 60;

#[derive(Clone, Copy, Debug)]
pub struct Maximum {
    pub value: f64,
    pub at: Complex64,
    pub evaluations: usize,
    /// Whether the local search improved on the best screened point.
    pub refined: bool,
}

/// Screen points: the center followed by `n` Vogel spiral points, all
/// strictly inside `disk`.
pub fn spiral(disk: &Disk, n: usize) -> Vec<Complex64> {
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut pts = Vec::with_capacity(n + 1);
    pts.push(disk.center);
    for j in 0..n {
        let rho = ((j as f64 + 0.5) / n as f64).sqrt();
        pts.push(disk.point(rho, golden * j as f64));
    }
    pts
}

/// Maximize `objective` over `disk`. Points where the objective reports an
/// indeterminate form are skipped; any other error from the screen is
/// returned.
pub fn maximize<F>(disk: &Disk, screen: usize, objective: F) -> Result<Maximum>
where
    F: Fn(Complex64) -> Result<f64> + Sync,
{
    let pts = spiral(disk, screen);
    let vals: Vec<Option<f64>> = pts
        .par_iter()
        .map(|&z| match objective(z) {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            Ok(_) | Err(Error::Indeterminate { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..pts.len()).filter(|&i| vals[i].is_some()).collect();
    if order.is_empty() {
        return Err(Error::Degenerate(format!("objective undefined on every sample of {disk}")));
    }
    order.sort_by(|&i, &j| vals[j].unwrap().total_cmp(&vals[i].unwrap()).then(i.cmp(&j)));

    let spacing = disk.radius / (screen.max(1) as f64).sqrt();
    let mut starts: Vec<usize> = Vec::with_capacity(STARTS);
    for &i in &order {
        if starts.iter().all(|&s| (pts[s] - pts[i]).norm() > spacing) {
            starts.push(i);
            if starts.len() == STARTS {
                break;
            }
        }
    }
    let screened = vals[order[0]].unwrap();
    let climbs: Vec<(f64, Complex64, usize)> = starts
        .par_iter()
        .map(|&i| climb(disk, &objective, pts[i], vals[i].unwrap(), 1.5 * spacing))
        .collect();
    let mut best = Maximum {
        value: screened,
        at: pts[order[0]],
        evaluations: pts.len(),
        refined: false,
    };
    for (v, at, evals) in climbs {
        best.evaluations += evals;
        if v > best.value {
            best.value = v;
            best.at = at;
            best.refined = true;
        }
    }
    Ok(best)
}

/// Compass search in eight directions with step halving.
fn climb<F>(disk: &Disk, objective: &F, mut at: Complex64, mut value: f64, mut step: f64) -> (f64, Complex64, usize)
where
    F: Fn(Complex64) -> Result<f64> + Sync,
{
    let dirs: Vec<Complex64> = (0..8).map(|j| Complex64::from_polar(1.0, PI / 4.0 * j as f64)).collect();
    let mut evals = 0;
    for _ in 0..ASCENT_ITERATIONS {
        let mut improved = false;
        for d in &dirs {
            let cand = at + d * step;
            if !disk.contains(cand) {
                continue;
            }
            evals += 1;
            if let Ok(v) = objective(cand) {
                if v.is_finite() && v > value {
                    value = v;
                    at = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (value, at, evals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_an_off_center_peak() {
        let disk = Disk::new(Complex64::new(1.0, 1.0), 2.0).unwrap();
        let peak = Complex64::new(1.7, 0.2);
        let m = maximize(&disk, 200, |z| Ok(-(z - peak).norm_sqr())).unwrap();
        assert!((m.at - peak).norm() < 1e-6, "{:?}", m);
        assert!(m.refined);
    }

    #[test]
    fn spiral_stays_inside() {
        let disk = Disk::new(Complex64::new(-0.5, 0.0), 0.25).unwrap();
        assert!(spiral(&disk, 500).iter().all(|&z| disk.contains(z)));
    }

    #[test]
    fn deterministic() {
        let disk = Disk::centered(1.0).unwrap();
        let f = |z: Complex64| Ok((3.0 * z.re).sin() * (2.0 * z.im).cos());
        let a = maximize(&disk, 300, f).unwrap();
        let b = maximize(&disk, 300, f).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.at, b.at);
    }
}
