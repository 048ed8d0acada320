//! Search for a sequence `z_n → 0` along which `f(z_n)` converges while the
//! image circles `f(∂D(|z_n|))` keep a chordal diameter bounded below.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::winding::winding_number;
use crate::error::Result;
use crate::maps::HoloMap;
use crate::metrics::{check_radii, diam_circle_image, DEFAULT_CIRCLE_SAMPLES};
use crate::sphere::{chordal, to_unit_sphere, SpherePoint, SphereRotation};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LvConfig {
    pub diam_threshold: f64,
    /// Values per circle used for cluster detection.
    pub cluster_samples: usize,
    pub cluster_radius: f64,
    /// Chordal radius of the neighborhood `W'` of the cluster value.
    pub neighborhood_radius: f64,
    pub diameter_samples: usize,
    /// Diameters at most `collapse` on the last `collapse_count` radii mean
    /// the singularity is not essential.
    pub collapse: f64,
    pub collapse_count: usize,
    pub bisection_tolerance: f64,
    pub min_radius: f64,
}

impl Default for LvConfig {
    fn default() -> Self {
        LvConfig {
            diam_threshold: 0.1,
            cluster_samples: 64,
            cluster_radius: 0.05,
            neighborhood_radius: 0.1,
            diameter_samples: DEFAULT_CIRCLE_SAMPLES,
            collapse: 1e-3,
            collapse_count: 3,
            bisection_tolerance: 1e-3,
            min_radius: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WitnessPath {
    /// The circles through the centers already have large images.
    Direct,
    /// Escape radii `r_n' = max{r < |z_n| : f(∂D(r)) ⊄ W'}` were needed.
    Escape,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LVWitness {
    pub centers: Vec<Complex64>,
    pub cluster_value: SpherePoint,
    pub escape_radii: Vec<f64>,
    pub second_centers: Vec<Complex64>,
    pub diam_floor: f64,
    pub path: WitnessPath,
    /// Diameters of `f(∂D(|z_n'|))`.
    pub diameters: Vec<f64>,
    /// Index about 0 of the image circles in the chart sending the cluster
    /// value to 0; `None` where the image passes through 0 or ∞.
    pub windings: Vec<Option<i64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum LvOutcome {
    Witness(LVWitness),
    NotFound { final_diameters: Vec<f64>, reason: String },
}

impl LvOutcome {
    pub fn witness(&self) -> Option<&LVWitness> {
        match self {
            LvOutcome::Witness(w) => Some(w),
            LvOutcome::NotFound { .. } => None,
        }
    }
}

fn circle_values<M: HoloMap + ?Sized>(f: &M, r: f64, n: usize) -> Vec<(Complex64, Option<SpherePoint>)> {
    (0..n)
        .map(|j| {
            let z = Complex64::from_polar(r, TAU * (j as f64 + 0.5) / n as f64);
            (z, f.value(z).ok())
        })
        .collect()
}

/// Chordal ball center hit by the largest number of circles. Ties go to the
/// value nearest the equator `|v| = 1`, where the chart rotation is best
/// conditioned, then to the earliest sample.
fn persistent_cluster(circles: &[Vec<(Complex64, Option<SpherePoint>)>], radius: f64) -> Option<(SpherePoint, usize)> {
    let candidates: Vec<SpherePoint> = circles.iter().flatten().filter_map(|&(_, v)| v).collect();
    let hits: Vec<usize> = candidates
        .par_iter()
        .map(|&c| {
            circles
                .iter()
                .filter(|circle| circle.iter().any(|&(_, v)| v.is_some_and(|v| chordal(v, c) < radius)))
                .count()
        })
        .collect();
    let height = |v: SpherePoint| to_unit_sphere(v)[2].abs();
    let mut best: Option<(SpherePoint, usize)> = None;
    for (c, h) in candidates.into_iter().zip(hits) {
        if best.is_none_or(|(bc, bh)| h > bh || (h == bh && height(c) < height(bc))) {
            best = Some((c, h));
        }
    }
    best
}

fn chart_winding<M: HoloMap + ?Sized>(f: &M, r: f64, rot: &SphereRotation, n: usize) -> Option<i64> {
    let curve: Option<Vec<Complex64>> = (0..n)
        .map(|j| {
            let z = Complex64::from_polar(r, TAU * j as f64 / n as f64);
            f.value(z).ok().and_then(|v| rot.apply(v).finite())
        })
        .collect();
    winding_number(&curve?, Complex64::new(0.0, 0.0)).ok()
}

/// Lehto–Virtanen witness search along a strictly decreasing radii schedule.
pub fn lv_witness<M: HoloMap + ?Sized>(f: &M, radii: &[f64], cfg: &LvConfig) -> Result<LvOutcome> {
    check_radii(radii)?;
    let diameters = radii
        .par_iter()
        .map(|&r| diam_circle_image(f, r, cfg.diameter_samples).map(|d| d.diameter))
        .collect::<Result<Vec<f64>>>()?;
    let count = cfg.collapse_count.max(1).min(diameters.len());
    let final_diameters = diameters[diameters.len() - count..].to_vec();
    if final_diameters.iter().all(|&d| d <= cfg.collapse) {
        return Ok(LvOutcome::NotFound {
            final_diameters,
            reason: format!("image circles collapse below {}", cfg.collapse),
        });
    }

    let circles: Vec<_> = radii.iter().map(|&r| circle_values(f, r, cfg.cluster_samples)).collect();
    let Some((cluster, _)) = persistent_cluster(&circles, cfg.cluster_radius) else {
        return Ok(LvOutcome::NotFound { final_diameters, reason: "no finite sample values".into() });
    };
    // one center per circle that meets the cluster ball
    let mut centers = Vec::new();
    let mut center_diams = Vec::new();
    for (circle, &d) in circles.iter().zip(&diameters) {
        let nearest = circle
            .iter()
            .filter_map(|&(z, v)| v.map(|v| (z, chordal(v, cluster))))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((z, dist)) = nearest {
            if dist < cfg.cluster_radius {
                centers.push(z);
                center_diams.push(d);
            }
        }
    }
    if centers.len() < 2 {
        return Ok(LvOutcome::NotFound { final_diameters, reason: "no persistent cluster value".into() });
    }
    let rot = SphereRotation::sending_to_zero(cluster);
    let tail_start = centers.len() / 2;

    let direct_floor = center_diams[tail_start..].iter().copied().fold(f64::INFINITY, f64::min);
    if direct_floor >= cfg.diam_threshold {
        let windings = centers.iter().map(|z| chart_winding(f, z.norm(), &rot, 1024)).collect();
        return Ok(LvOutcome::Witness(LVWitness {
            second_centers: centers.clone(),
            centers,
            cluster_value: cluster,
            escape_radii: Vec::new(),
            diam_floor: direct_floor,
            path: WitnessPath::Direct,
            diameters: center_diams,
            windings,
        }));
    }

    // escape radii
    let escapes: Vec<Option<(f64, Complex64)>> =
        centers.par_iter().map(|z| escape_radius(f, z.norm(), cluster, cfg)).collect();
    let mut escape_radii = Vec::new();
    let mut second_centers = Vec::new();
    let mut kept = Vec::new();
    for (z, e) in centers.iter().zip(escapes) {
        if let Some((r, z2)) = e {
            kept.push(*z);
            escape_radii.push(r);
            second_centers.push(z2);
        }
    }
    if second_centers.len() < 2 {
        return Ok(LvOutcome::NotFound { final_diameters, reason: "image circles never leave W'".into() });
    }
    let diams = escape_radii
        .par_iter()
        .map(|&r| diam_circle_image(f, r, cfg.diameter_samples).map(|d| d.diameter))
        .collect::<Result<Vec<f64>>>()?;
    let floor = diams[diams.len() / 2..].iter().copied().fold(f64::INFINITY, f64::min);
    if floor < cfg.diam_threshold {
        return Ok(LvOutcome::NotFound {
            final_diameters,
            reason: format!("liminf of escape-circle diameters {floor:.3e} below {}", cfg.diam_threshold),
        });
    }
    let windings = escape_radii.iter().map(|&r| chart_winding(f, r, &rot, 1024)).collect();
    Ok(LvOutcome::Witness(LVWitness {
        centers: kept,
        cluster_value: cluster,
        escape_radii,
        second_centers,
        diam_floor: floor,
        path: WitnessPath::Escape,
        diameters: diams,
        windings,
    }))
}

/// Largest `r < start` (to the configured relative precision) whose image
/// circle leaves the chordal ball around `center`, and the point of that
/// circle whose image is closest to the boundary of the ball.
fn escape_radius<M: HoloMap + ?Sized>(f: &M, start: f64, center: SpherePoint, cfg: &LvConfig) -> Option<(f64, Complex64)> {
    let n = 4 * cfg.cluster_samples;
    let leaves = |r: f64| {
        circle_values(f, r, n)
            .into_iter()
            .any(|(_, v)| v.is_some_and(|v| chordal(v, center) >= cfg.neighborhood_radius))
    };
    let (mut lo, mut hi) = if leaves(start) {
        (start, start)
    } else {
        let mut r = start;
        loop {
            let next = r * 0.5;
            if next < cfg.min_radius {
                return None;
            }
            if leaves(next) {
                break (next, r);
            }
            r = next;
        }
    };
    while hi / lo - 1.0 > cfg.bisection_tolerance {
        let mid = (lo * hi).sqrt();
        if leaves(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z2 = circle_values(f, lo, n)
        .into_iter()
        .filter_map(|(z, v)| v.map(|v| (z, chordal(v, center))))
        .filter(|&(_, d)| d >= cfg.neighborhood_radius)
        .min_by(|a, b| a.1.total_cmp(&b.1))?
        .0;
    Some((lo, z2))
}
