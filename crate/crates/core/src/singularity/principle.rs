//! The rescaling dichotomy at an isolated singularity of `f` at the origin.
//!
//! (0) image circles and half-disk Lipschitz constants collapse: the
//! singularity is not essential. (i) `L(f, D(y, |y|/2))` is unbounded: zoom
//! to the half disks and rescale again, giving a limit on the plane.
//! (ii) it stays bounded: rescale radially, `g_k(v) = f(|w_k| v)`, giving a
//! limit on the punctured plane.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::julia::{halfdisk_lipschitz_trace, HalfdiskTrace, HALFDISK_BUDGET};
use super::witness::{lv_witness, LvConfig, LvOutcome};
use crate::error::{Error, Result};
use crate::lipschitz::diverges;
use crate::maps::{HoloMap, Zoom};
use crate::metrics::{check_radii, diam_circle_image, geometric_radii, DEFAULT_CIRCLE_SAMPLES};
use crate::sphere::SpherePoint;
use crate::zalcman::{
    annulus_grid, disk_grid, extract_sequence, grid_residual, spread, CaseTag, GridSample, Member, RescalingResult,
    ZalcmanConfig, GRID_SIDE,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusConfig {
    pub inner: f64,
    pub outer: f64,
    pub angles: usize,
    pub radii: usize,
    pub tolerance: f64,
}

impl Default for AnnulusConfig {
    fn default() -> Self {
        AnnulusConfig { inner: 0.25, outer: 4.0, angles: 64, radii: 16, tolerance: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrincipleConfig {
    pub radii: Vec<f64>,
    /// Diameters and half-disk constants at most this on the last
    /// `collapse_count` radii select case (0).
    pub collapse: f64,
    pub collapse_count: usize,
    pub trace_threshold: f64,
    pub trace_tail: usize,
    pub budget: usize,
    pub seed: u64,
    pub zalcman: ZalcmanConfig,
    pub lv: LvConfig,
    pub annulus: AnnulusConfig,
}

impl Default for PrincipleConfig {
    fn default() -> Self {
        PrincipleConfig {
            radii: geometric_radii(1e-1, 1e-6).expect("valid default radii"),
            collapse: 1e-3,
            collapse_count: 3,
            trace_threshold: 1e3,
            trace_tail: 3,
            budget: HALFDISK_BUDGET,
            seed: 0,
            zalcman: ZalcmanConfig::default(),
            lv: LvConfig::default(),
            annulus: AnnulusConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    NotEssential,
    Unbounded,
    Bounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Principle {
    pub branch: Branch,
    pub result: RescalingResult,
    pub diameters: Vec<f64>,
    pub halfdisk: HalfdiskTrace,
    /// For the bounded branch: `diam g_k(∂D)` and `diam f(∂D(|w_k|))`.
    pub unit_circle_diameters: Vec<(f64, f64)>,
}

fn empty_result(case_tag: CaseTag, note: String) -> RescalingResult {
    RescalingResult {
        case_tag,
        centers: Vec::new(),
        scales: Vec::new(),
        k_indices: Vec::new(),
        sup_values: Vec::new(),
        disk_radii: Vec::new(),
        normalization_ratios: Vec::new(),
        limit_samples: Vec::new(),
        residual: None,
        residual_trace: Vec::new(),
        spread: 0.0,
        stride: 1,
        note,
    }
}

pub fn rescaling_principle<M: HoloMap + ?Sized>(f: &M, cfg: &PrincipleConfig) -> Result<Principle> {
    check_radii(&cfg.radii)?;
    let diameters = cfg
        .radii
        .par_iter()
        .map(|&r| diam_circle_image(f, r, DEFAULT_CIRCLE_SAMPLES).map(|d| d.diameter))
        .collect::<Result<Vec<f64>>>()?;
    let halfdisk = halfdisk_lipschitz_trace(f, &cfg.radii, cfg.budget, cfg.seed)?;
    let sups = halfdisk.sups();
    let count = cfg.collapse_count.max(1).min(diameters.len());
    let tail = diameters.len() - count;
    let collapsed = diameters[tail..].iter().all(|&d| d <= cfg.collapse) && sups[tail..].iter().all(|&l| l <= cfg.collapse);
    if collapsed {
        return Ok(Principle {
            branch: Branch::NotEssential,
            result: empty_result(
                CaseTag::NoEssentialSingularity,
                format!("diameters and half-disk constants at most {} on the last {count} radii", cfg.collapse),
            ),
            diameters,
            halfdisk,
            unit_circle_diameters: Vec::new(),
        });
    }

    if diverges(&sups, cfg.trace_threshold, cfg.trace_tail) {
        // case (i): F_k(w) = f(y_k + (|y_k|/2) w)
        let members: Vec<Member<Zoom<&M>>> = halfdisk
            .entries
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let scale = e.at.norm() / 2.0;
                Member { k: k as i64, map: Zoom::new(f, e.at, Complex64::new(scale, 0.0)), center: e.at, scale }
            })
            .collect();
        let result = extract_sequence(&members, &cfg.zalcman)?;
        return Ok(Principle { branch: Branch::Unbounded, result, diameters, halfdisk, unit_circle_diameters: Vec::new() });
    }

    // case (ii)
    let witness = match lv_witness(f, &cfg.radii, &cfg.lv)? {
        LvOutcome::Witness(w) => w,
        LvOutcome::NotFound { reason, .. } => {
            return Ok(Principle {
                branch: Branch::Bounded,
                result: empty_result(CaseTag::Inconclusive, format!("bounded half-disk trace but no witness: {reason}")),
                diameters,
                halfdisk,
                unit_circle_diameters: Vec::new(),
            })
        }
    };
    let (result, unit_circle_diameters) = punctured_rescaling(f, &witness.second_centers, witness.diam_floor, cfg)?;
    Ok(Principle { branch: Branch::Bounded, result, diameters, halfdisk, unit_circle_diameters })
}

/// Radial rescalings `g_k(v) = f(|w_k| v)` compared on an annulus grid.
pub fn punctured_rescaling<M: HoloMap + ?Sized>(
    f: &M,
    ws: &[Complex64],
    diam_floor: f64,
    cfg: &PrincipleConfig,
) -> Result<(RescalingResult, Vec<(f64, f64)>)> {
    if ws.len() < 2 {
        return Err(Error::invalid("radial rescaling needs at least two points"));
    }
    let a = &cfg.annulus;
    let grid = annulus_grid(a.inner, a.outer, a.angles, a.radii);
    let samples = ws
        .par_iter()
        .map(|w| grid.iter().map(|&v| f.value(w.norm() * v)).collect::<Result<Vec<SpherePoint>>>())
        .collect::<Result<Vec<_>>>()?;
    let diams = ws
        .par_iter()
        .map(|w| {
            let g = Zoom::new(f, Complex64::new(0.0, 0.0), Complex64::new(w.norm(), 0.0));
            Ok((
                diam_circle_image(&g, 1.0, DEFAULT_CIRCLE_SAMPLES)?.diameter,
                diam_circle_image(f, w.norm(), DEFAULT_CIRCLE_SAMPLES)?.diameter,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let n = ws.len();
    let (stride, residual) = (1..n)
        .map(|s| (s, grid_residual(&samples[n - 1 - s], &samples[n - 1])))
        .fold((1, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });
    let mut picked: Vec<usize> = (0..n).rev().step_by(stride).collect();
    picked.reverse();
    let residual_trace = picked.windows(2).map(|w| grid_residual(&samples[w[0]], &samples[w[1]])).collect();
    let last = &samples[n - 1];
    let spread_value = spread(last);
    let certified = diam_floor >= cfg.lv.diam_threshold && diams[n - 1].0 >= cfg.lv.diam_threshold;
    let (case_tag, note) = if residual > a.tolerance {
        (CaseTag::Inconclusive, format!("annulus residual {residual:.3e} above {:.1e}", a.tolerance))
    } else if !certified {
        (CaseTag::Inconclusive, "unit circle diameter below the witness threshold".to_string())
    } else {
        (CaseTag::PuncturedLimit, format!("annulus residual {residual:.3e}, stride {stride}"))
    };
    let result = RescalingResult {
        case_tag,
        centers: picked.iter().map(|_| Complex64::new(0.0, 0.0)).collect(),
        scales: picked.iter().map(|&i| ws[i].norm()).collect(),
        k_indices: picked.iter().map(|&i| i as i64).collect(),
        sup_values: Vec::new(),
        disk_radii: Vec::new(),
        normalization_ratios: Vec::new(),
        limit_samples: grid.iter().zip(last).map(|(&v, &value)| GridSample { v, value }).collect(),
        residual: Some(residual),
        residual_trace,
        spread: spread_value,
        stride,
        note,
    };
    Ok((result, picked.iter().map(|&i| diams[i]).collect()))
}

/// Spread of `g_k(v) = f(z_k + ρ_k v)` over the default disk grid of
/// radius `test_radius`, one value per schedule entry.
pub fn converse_spread<M: HoloMap + ?Sized>(f: &M, schedule: &[(Complex64, f64)], test_radius: f64) -> Result<Vec<f64>> {
    let grid = disk_grid(test_radius, GRID_SIDE);
    schedule
        .par_iter()
        .map(|&(z, rho)| {
            let vals = grid.iter().map(|&v| f.value(z + rho * v)).collect::<Result<Vec<_>>>()?;
            Ok(spread(&vals))
        })
        .collect()
}

/// Central-difference log-derivative `(g(v+h) - g(v-h)) / (2h g(v))` along
/// the real direction of a square grid with spacing `h`; returns the mean
/// and the largest relative deviation from it.
pub fn log_derivative_variation(samples: &[GridSample], h: f64) -> Option<(Complex64, f64)> {
    let key = |v: Complex64| ((v.re / h).round() as i64, (v.im / h).round() as i64);
    let index: HashMap<(i64, i64), SpherePoint> = samples.iter().map(|s| (key(s.v), s.value)).collect();
    let mut ds = Vec::new();
    for s in samples {
        let (i, j) = key(s.v);
        let (Some(a), Some(b)) = (index.get(&(i + 1, j)), index.get(&(i - 1, j))) else { continue };
        if let (Some(g), Some(ga), Some(gb)) = (s.value.finite(), a.finite(), b.finite()) {
            if g.norm() > 0.0 {
                ds.push((ga - gb) / (2.0 * h * g));
            }
        }
    }
    if ds.is_empty() {
        return None;
    }
    let mean = ds.iter().sum::<Complex64>() / ds.len() as f64;
    let dev = ds.iter().map(|d| (d - mean).norm()).fold(0.0, f64::max) / mean.norm().max(f64::MIN_POSITIVE);
    Some((mean, dev))
}
