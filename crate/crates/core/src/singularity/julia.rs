//! Growth of `|z| f#(z)` and of `L(f, D(z, |z|/2))` as `|z| → 0`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lipschitz::{diverges, lipschitz_estimate, mix_seed};
use crate::maps::HoloMap;
use crate::metrics::{check_radii, Disk};

pub const ANGLE_SAMPLES: usize = 256;
pub const DEFAULT_THRESHOLD: f64 = 1e3;
pub const DEFAULT_TAIL: usize = 3;
/// Extra equispaced half-disk centers per radius in the Lipschitz trace.
pub const HALFDISK_CENTERS: usize = 8;
pub const HALFDISK_BUDGET: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum JuliaVerdict {
    ExceptionalSuspected,
    NonExceptional,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JuliaEntry {
    pub radius: f64,
    /// `sup_{|z| = r} |z| f#(z)`.
    pub sup: f64,
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JuliaProfile {
    pub entries: Vec<JuliaEntry>,
    pub verdict: JuliaVerdict,
    pub threshold: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthConfig {
    pub threshold: f64,
    pub tail: usize,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig { threshold: DEFAULT_THRESHOLD, tail: DEFAULT_TAIL }
    }
}

fn scaled_sharp<M: HoloMap + ?Sized>(f: &M, r: f64, theta: f64) -> Result<f64> {
    Ok(r * f.sharp(Complex64::from_polar(r, theta))?)
}

/// Golden-section search for a maximum of `g` on `[a, b]`.
pub(crate) fn golden_max<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv * (b - a);
    let mut d = a + inv * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while (b - a).abs() > tol {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv * (b - a);
            gd = g(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, g(x))
}

/// Sup over `|z| = r` of `|z| f#(z)`: an angular screen refined by golden
/// section around the best sample.
pub fn circle_sup<M: HoloMap + ?Sized>(f: &M, r: f64) -> Result<JuliaEntry> {
    let step = TAU / ANGLE_SAMPLES as f64;
    let vals = (0..ANGLE_SAMPLES)
        .into_par_iter()
        .map(|j| match scaled_sharp(f, r, step * j as f64) {
            Ok(v) => Ok(v),
            Err(Error::Indeterminate { .. }) => Ok(f64::NEG_INFINITY),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<f64>>>()?;
    let (j, &best) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("nonempty screen");
    let theta0 = step * j as f64;
    let (theta, refined) = golden_max(
        |t| scaled_sharp(f, r, t).unwrap_or(f64::NEG_INFINITY),
        theta0 - step,
        theta0 + step,
        1e-13,
    );
    Ok(if refined > best {
        JuliaEntry { radius: r, sup: refined, theta }
    } else {
        JuliaEntry { radius: r, sup: best.max(0.0), theta: theta0 }
    })
}

pub fn julia_indicator<M: HoloMap + ?Sized>(f: &M, radii: &[f64], cfg: &GrowthConfig) -> Result<JuliaProfile> {
    check_radii(radii)?;
    let entries = radii.par_iter().map(|&r| circle_sup(f, r)).collect::<Result<Vec<_>>>()?;
    let sups: Vec<f64> = entries.iter().map(|e| e.sup).collect();
    let verdict = if diverges(&sups, cfg.threshold, cfg.tail) {
        JuliaVerdict::NonExceptional
    } else {
        JuliaVerdict::ExceptionalSuspected
    };
    Ok(JuliaProfile { entries, verdict, threshold: cfg.threshold })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfdiskEntry {
    pub radius: f64,
    /// `sup L(f, D(y, |y|/2))` over the sampled `|y| = r`.
    pub sup: f64,
    /// The maximizing center `y`.
    pub at: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfdiskTrace {
    pub entries: Vec<HalfdiskEntry>,
}

impl HalfdiskTrace {
    pub fn sups(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.sup).collect()
    }
}

/// `L(f, D(y, |y|/2))` maximized over centers on `|y| = r`: the angle
/// maximizing the lower bound `(|y|/2) f#(y)` plus equispaced angles.
pub fn halfdisk_lipschitz_trace<M: HoloMap + ?Sized>(f: &M, radii: &[f64], budget: usize, seed: u64) -> Result<HalfdiskTrace> {
    check_radii(radii)?;
    let entries = radii
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let top = circle_sup(f, r)?;
            let mut thetas = vec![top.theta];
            thetas.extend((0..HALFDISK_CENTERS).map(|j| TAU * (j as f64 + 0.5) / HALFDISK_CENTERS as f64));
            let ests = thetas
                .par_iter()
                .enumerate()
                .map(|(j, &t)| {
                    let y = Complex64::from_polar(r, t);
                    let disk = Disk::new(y, r / 2.0)?;
                    let s = mix_seed(seed, (i * (HALFDISK_CENTERS + 1) + j) as i64);
                    lipschitz_estimate(f, &disk, budget, s).map(|e| (e.value, y))
                })
                .collect::<Result<Vec<_>>>()?;
            let (sup, at) = ests.into_iter().fold((f64::NEG_INFINITY, Complex64::new(0.0, 0.0)), |acc, e| {
                if e.0 > acc.0 { e } else { acc }
            });
            Ok(HalfdiskEntry { radius: r, sup, at })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HalfdiskTrace { entries })
}
