//! Zalcman rescaling: extremal pair selection, the rescaled maps
//! `g_k(v) = f_k(z_k + ρ_k v)`, convergence detection on a fixed grid and the
//! double rescaling wrapper that zooms in on a point first.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnexpr::HoloExpr;
use crate::maps::{Bound, HoloMap, Zoom};
use crate::metrics::Disk;
use crate::optimize;
use crate::sphere::{chordal, to_unit_sphere, SpherePoint};

pub const GRID_SIDE: usize = 33;
pub const DEFAULT_TEST_RADIUS: f64 = 2.0;
pub const DEFAULT_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_SPREAD_FLOOR: f64 = 0.1;
pub const DEFAULT_BUDGET: usize = 2000;
/// Inner radius of the Zalcman disk, both for families on the unit disk
/// and for zoomed families.
pub const DEFAULT_INNER_RADIUS: f64 = 0.5;
/// The partner point sits at Euclidean distance `PAIR_STEP / f#(z)`.
pub const PAIR_STEP: f64 = 1e-3;
pub const MIN_SEPARATION: f64 = 1e-10;
/// Required ratio between the last and first `M_k` of a subsequence.
pub const GROWTH_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    PlaneLimit,
    PuncturedLimit,
    NoEssentialSingularity,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSample {
    pub v: Complex64,
    pub value: SpherePoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescalingResult {
    pub case_tag: CaseTag,
    pub centers: Vec<Complex64>,
    pub scales: Vec<f64>,
    pub k_indices: Vec<i64>,
    /// `M_k` for each index (empty for the punctured branch).
    pub sup_values: Vec<f64>,
    /// `R_k = (r - |z_k|) / ρ_k` in the coordinates of the rescaled family.
    pub disk_radii: Vec<f64>,
    pub normalization_ratios: Vec<f64>,
    /// Samples of the last rescaled map, the candidate limit.
    pub limit_samples: Vec<GridSample>,
    /// Sup over the grid of `chordal(g_k, g_k')` for the final pair.
    pub residual: Option<f64>,
    pub residual_trace: Vec<f64>,
    /// Largest chordal distance between two limit samples.
    pub spread: f64,
    pub stride: usize,
    pub note: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZalcmanConfig {
    pub inner_radius: f64,
    pub test_radius: f64,
    pub tolerance: f64,
    pub spread_floor: f64,
    pub budget: usize,
}

impl Default for ZalcmanConfig {
    fn default() -> Self {
        ZalcmanConfig {
            inner_radius: DEFAULT_INNER_RADIUS,
            test_radius: DEFAULT_TEST_RADIUS,
            tolerance: DEFAULT_TOLERANCE,
            spread_floor: DEFAULT_SPREAD_FLOOR,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// `((r² - |z|²) / r²) f#(z)`, the infinitesimal form of the pair weight.
pub fn weight<M: HoloMap + ?Sized>(f: &M, r: f64, z: Complex64) -> Result<f64> {
    let s = z.norm();
    Ok((r - s) * (r + s) / (r * r) * f.sharp(z)?)
}

/// `((r² - |z|²) / r²) chordal(f(z), f(w)) / |z - w|`.
pub fn pair_weight<M: HoloMap + ?Sized>(f: &M, r: f64, z: Complex64, w: Complex64) -> Result<f64> {
    let s = z.norm();
    Ok((r - s) * (r + s) / (r * r) * chordal(f.value(z)?, f.value(w)?) / (z - w).norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedSup {
    /// Estimate of `M = sup pair_weight` over `D(r)`.
    pub m: f64,
    pub z: Complex64,
    pub w: Complex64,
    /// Weight of the returned pair, at least `m / 2`.
    pub pair_weight: f64,
}

/// Estimate `M` and a distinct pair `(z, w)` with weight at least `M / 2`.
pub fn weighted_sup_mk<M: HoloMap + ?Sized>(f: &M, r: f64, budget: usize) -> Result<WeightedSup> {
    let disk = Disk::centered(r)?;
    let max = optimize::maximize(&disk, budget, |z| weight(f, r, z))?;
    if !(max.value > 1e-12) {
        return Err(Error::Degenerate(format!("all sampled weights vanish on {disk}")));
    }
    pair_at(f, r, max.at, max.value)
}

/// Partner selection at a fixed `z` for a given sup estimate `m`.
fn pair_at<M: HoloMap + ?Sized>(f: &M, r: f64, z: Complex64, m: f64) -> Result<WeightedSup> {
    let room = r - z.norm();
    let dir = if z.norm() > 0.0 { -z / z.norm() } else { Complex64::new(1.0, 0.0) };
    let sharp = f.sharp(z)?;
    let mut h = (PAIR_STEP / sharp).min(0.5 * room);
    while h >= MIN_SEPARATION {
        let w = z + dir * h;
        let pw = pair_weight(f, r, z, w)?;
        if pw >= 0.5 * m {
            return Ok(WeightedSup { m: m.max(pw), z, w, pair_weight: pw });
        }
        h *= 0.5;
    }
    Err(Error::Degenerate(format!("no pair at {z} reaches half the weighted sup {m}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rescaled {
    pub rho: f64,
    pub disk_radius: f64,
    /// `v = (w - z) / ρ`, so that `g(v) = f(w)`.
    pub v: Complex64,
    /// `chordal(g(0), g(v)) / |v|`, equal to one by construction.
    pub ratio: f64,
}

/// `ρ = |z - w| / chordal(f(z), f(w))`, `R = (r - |z|) / ρ`.
pub fn build_rescaled<M: HoloMap + ?Sized>(f: &M, r: f64, z: Complex64, w: Complex64) -> Result<Rescaled> {
    let sep = chordal(f.value(z)?, f.value(w)?);
    if !(sep > 0.0) || z == w {
        return Err(Error::Degenerate(format!("pair {z}, {w} has zero chordal separation")));
    }
    let rho = (z - w).norm() / sep;
    let v = (w - z) / rho;
    let ratio = chordal(f.value(z)?, f.value(z + rho * v)?) / v.norm();
    Ok(Rescaled { rho, disk_radius: (r - z.norm()) / rho, v, ratio })
}

/// Square `side × side` grid on `[-radius, radius]²` restricted to the closed disk.
pub fn disk_grid(radius: f64, side: usize) -> Vec<Complex64> {
    let step = 2.0 * radius / (side - 1) as f64;
    let mut pts = Vec::new();
    for i in 0..side {
        for j in 0..side {
            let v = Complex64::new(-radius + step * j as f64, -radius + step * i as f64);
            if v.norm() <= radius * (1.0 + 1e-12) {
                pts.push(v);
            }
        }
    }
    pts
}

/// Polar grid on `inner <= |v| <= outer` with geometric radial spacing.
pub fn annulus_grid(inner: f64, outer: f64, angles: usize, radii: usize) -> Vec<Complex64> {
    let mut pts = Vec::with_capacity(angles * radii);
    for i in 0..radii {
        let t = if radii == 1 { 0.0 } else { i as f64 / (radii - 1) as f64 };
        let rho = inner * (outer / inner).powf(t);
        for j in 0..angles {
            pts.push(Complex64::from_polar(rho, std::f64::consts::TAU * j as f64 / angles as f64));
        }
    }
    pts
}

/// Largest pairwise chordal distance.
pub fn spread(values: &[SpherePoint]) -> f64 {
    let pts: Vec<[f64; 3]> = values.iter().map(|&p| to_unit_sphere(p)).collect();
    pts.par_iter()
        .enumerate()
        .map(|(i, a)| {
            pts[i + 1..]
                .iter()
                .map(|b| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
        .min(2.0)
}

/// Sup of the chordal distance between two sample vectors.
pub fn grid_residual(a: &[SpherePoint], b: &[SpherePoint]) -> f64 {
    a.iter().zip(b).map(|(&p, &q)| chordal(p, q)).fold(0.0, f64::max)
}

/// One member of a rescaling sequence: a map on a neighborhood of
/// `closure(D(r))` that equals `f(center + scale · w)` for the original `f`.
pub struct Member<M> {
    pub k: i64,
    pub map: M,
    pub center: Complex64,
    pub scale: f64,
}

#[derive(Clone, Debug)]
struct Level {
    k: i64,
    sup: WeightedSup,
    rescaled: Rescaled,
    samples: Vec<SpherePoint>,
}

/// Solve `f(u) = target` near `z` by damped Newton in the chart where the
/// target is finite; steps are limited to `unit` and the total displacement
/// to `4 unit`.
fn newton_anchor<M: HoloMap + ?Sized>(f: &M, z: Complex64, target: SpherePoint, unit: f64) -> Option<Complex64> {
    let flip = target.norm() > 1.0;
    let chart = |p: SpherePoint| if flip { p.recip().finite() } else { p.finite() };
    let goal = chart(target)?;
    let mut u = z;
    for _ in 0..60 {
        let fu = f.value(u).ok()?;
        if chordal(fu, target) < 1e-13 {
            return Some(u);
        }
        let h = 1e-6 * unit;
        let ahead = chart(f.value(u + h).ok()?)?;
        let behind = chart(f.value(u - h).ok()?)?;
        let deriv = (ahead - behind) / (2.0 * h);
        if deriv.norm() == 0.0 {
            return None;
        }
        let mut step = (chart(fu)? - goal) / deriv;
        if step.norm() > unit {
            step *= unit / step.norm();
        }
        u -= step;
        if (u - z).norm() > 4.0 * unit {
            return None;
        }
    }
    let fu = f.value(u).ok()?;
    (chordal(fu, target) < 1e-10).then_some(u)
}

fn build_level<M: HoloMap>(
    member: &Member<M>,
    cfg: &ZalcmanConfig,
    grid: &[Complex64],
    anchor: Option<SpherePoint>,
) -> Result<Level> {
    let r = cfg.inner_radius;
    let f = &member.map;
    let mut sup = weighted_sup_mk(f, r, cfg.budget)?;
    if let Some(target) = anchor {
        let unit = 1.0 / f.sharp(sup.z)?;
        if let Some(u) = newton_anchor(f, sup.z, target, unit) {
            if u.norm() < r && weight(f, r, u)? >= 0.6 * sup.m {
                if let Ok(moved) = pair_at(f, r, u, sup.m) {
                    sup = moved;
                }
            }
        }
    }
    let rescaled = build_rescaled(f, r, sup.z, sup.w)?;
    let samples = grid
        .par_iter()
        .map(|&v| f.value(sup.z + rescaled.rho * v))
        .collect::<Result<Vec<_>>>()?;
    Ok(Level { k: member.k, sup, rescaled, samples })
}

/// Zalcman extraction along a sequence of maps. The first member fixes the
/// anchor value `g(0)`; later centers are moved onto the same value when
/// that keeps the weight above `M / 2`.
pub fn extract_sequence<M: HoloMap>(members: &[Member<M>], cfg: &ZalcmanConfig) -> Result<RescalingResult> {
    if members.is_empty() {
        return Err(Error::invalid("empty schedule"));
    }
    if !(cfg.inner_radius > 0.0) || !(cfg.test_radius > 0.0) {
        return Err(Error::invalid("radii must be positive"));
    }
    let grid = disk_grid(cfg.test_radius, GRID_SIDE);
    let first = build_level(&members[0], cfg, &grid, None)?;
    let anchor = members[0].map.value(first.sup.z)?;
    let mut levels = vec![first];
    levels.extend(
        members[1..]
            .par_iter()
            .map(|m| build_level(m, cfg, &grid, Some(anchor)))
            .collect::<Result<Vec<_>>>()?,
    );

    let n = levels.len();
    let (stride, residual) = if n < 2 {
        (1, None)
    } else {
        let mut best = (1, f64::INFINITY);
        for s in 1..n {
            let res = grid_residual(&levels[n - 1 - s].samples, &levels[n - 1].samples);
            if res < best.1 {
                best = (s, res);
            }
        }
        (best.0, Some(best.1))
    };
    let mut picked: Vec<usize> = (0..n).rev().step_by(stride).collect();
    picked.reverse();

    let residual_trace: Vec<f64> = picked
        .windows(2)
        .map(|w| grid_residual(&levels[w[0]].samples, &levels[w[1]].samples))
        .collect();
    let last = &levels[n - 1];
    let spread_value = spread(&last.samples);
    let sups: Vec<f64> = picked.iter().map(|&i| levels[i].sup.m).collect();
    let grows = sups.len() >= 2 && {
        let tail = &sups[sups.len() - sups.len().min(3)..];
        sups[sups.len() - 1] >= GROWTH_FACTOR * sups[0] && tail.windows(2).all(|w| w[1] > w[0])
    };

    let (case_tag, note) = match residual {
        None => (CaseTag::Inconclusive, "a single level gives no convergence test".to_string()),
        Some(res) if res > cfg.tolerance => (
            CaseTag::Inconclusive,
            format!("residual {res:.3e} above tolerance {:.1e}", cfg.tolerance),
        ),
        Some(_) if !grows => (CaseTag::Inconclusive, "weighted sups M_k do not grow".to_string()),
        Some(_) if spread_value < cfg.spread_floor => (
            CaseTag::Inconclusive,
            format!("limit spread {spread_value:.3e} below {}", cfg.spread_floor),
        ),
        Some(res) => (CaseTag::PlaneLimit, format!("residual {res:.3e}, stride {stride}")),
    };

    Ok(RescalingResult {
        case_tag,
        centers: picked.iter().map(|&i| members[i].center + members[i].scale * levels[i].sup.z).collect(),
        scales: picked.iter().map(|&i| members[i].scale * levels[i].rescaled.rho).collect(),
        k_indices: picked.iter().map(|&i| levels[i].k).collect(),
        sup_values: sups,
        disk_radii: picked.iter().map(|&i| levels[i].rescaled.disk_radius).collect(),
        normalization_ratios: picked.iter().map(|&i| levels[i].rescaled.ratio).collect(),
        limit_samples: grid
            .iter()
            .zip(&last.samples)
            .map(|(&v, &value)| GridSample { v, value })
            .collect(),
        residual,
        residual_trace,
        spread: spread_value,
        stride,
        note,
    })
}

fn family_k(family: &HoloExpr, k: i64) -> Option<i64> {
    family.uses_k().then_some(k)
}

/// Zalcman extraction for `f_k` on `D(inner_radius)` along `ks`.
pub fn extract_rescaling(family: &HoloExpr, ks: &[i64], cfg: &ZalcmanConfig) -> Result<RescalingResult> {
    let members: Vec<Member<Bound>> = ks
        .iter()
        .map(|&k| Member {
            k,
            map: Bound::new(family, family_k(family, k)),
            center: Complex64::new(0.0, 0.0),
            scale: 1.0,
        })
        .collect();
    extract_sequence(&members, cfg)
}

/// `k = 2^j`, `j = 1..=max_exp`.
pub fn power_schedule(max_exp: u32) -> Vec<i64> {
    (1..=max_exp).map(|j| 1i64 << j).collect()
}

/// Double rescaling at `a`: the j-th member is `w ↦ f_{k_j}(a + r_j w)`.
///
/// Radii and indices are paired position by position; a schedule of length
/// one is broadcast against the other.
pub fn double_rescale(
    family: &HoloExpr,
    a: Complex64,
    radii: &[f64],
    ks: &[i64],
    cfg: &ZalcmanConfig,
) -> Result<RescalingResult> {
    if radii.is_empty() || ks.is_empty() {
        return Err(Error::invalid("empty schedule"));
    }
    if radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::invalid("zoom radii must be positive"));
    }
    let n = if radii.len() == 1 || ks.len() == 1 { radii.len().max(ks.len()) } else { radii.len().min(ks.len()) };
    let members: Vec<Member<Zoom<Bound>>> = (0..n)
        .map(|j| {
            let r = radii[j.min(radii.len() - 1)];
            let k = ks[j.min(ks.len() - 1)];
            Member {
                k,
                map: Zoom::new(Bound::new(family, family_k(family, k)), a, Complex64::new(r, 0.0)),
                center: a,
                scale: r,
            }
        })
        .collect();
    extract_sequence(&members, cfg)
}
