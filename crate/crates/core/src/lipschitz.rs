//! The Lipschitz-on-disks functional
//! `L(f, D) = sup chordal(f(w), f(w')) / d_D(w, w')` with `d_D` the Poincaré
//! distance of `D`, and the Marty-type normality test built on it.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnexpr::HoloExpr;
use crate::maps::{Bound, HoloMap, Mobius, Precomposed};
use crate::metrics::{poincare_distance, Disk};
use crate::optimize;
use crate::sphere::chordal;

pub const MIN_BUDGET: usize = 100;
pub const DEFAULT_BUDGET: usize = 400;
pub const DEFAULT_THRESHOLD: f64 = 1e3;
pub const DEFAULT_TAIL: usize = 5;
/// Largest boundary defect accepted by [`invariance_check`].
pub const BIHOLOMORPHIC_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipEstimate {
    pub value: f64,
    pub witness: [Complex64; 2],
    pub samples_used: usize,
    pub refined: bool,
    pub seed: u64,
}

impl LipEstimate {
    /// The ratio realized by the stored witness pair; a certified lower
    /// bound for the supremum.
    pub fn witness_ratio<M: HoloMap + ?Sized>(&self, f: &M, disk: &Disk) -> Result<f64> {
        pair_ratio(f, disk, self.witness[0], self.witness[1])
    }
}

/// `chordal(f(w), f(w')) / d_D(w, w')`.
pub fn pair_ratio<M: HoloMap + ?Sized>(f: &M, disk: &Disk, w: Complex64, w2: Complex64) -> Result<f64> {
    let d = poincare_distance(disk, w, w2)?;
    if d == 0.0 {
        return Err(Error::invalid("witness pair is not distinct"));
    }
    Ok(chordal(f.value(w)?, f.value(w2)?) / d)
}

/// Infinitesimal ratio `f#(z) (R² - |z - a|²) / R` at `z ∈ D(a, R)`.
pub fn density_ratio<M: HoloMap + ?Sized>(f: &M, disk: &Disk, z: Complex64) -> Result<f64> {
    let r = disk.radius;
    let s = (z - disk.center).norm();
    Ok(f.sharp(z)? * (r - s) * (r + s) / r)
}

/// Lower estimate of `L(f, D)`.
///
/// Two channels are combined: the infinitesimal density ratio maximized by a
/// spiral screen of `budget` points plus multi-start ascent, and `budget`
/// random pairs drawn from a ChaCha stream seeded with `seed`.
pub fn lipschitz_estimate<M: HoloMap + ?Sized>(f: &M, disk: &Disk, budget: usize, seed: u64) -> Result<LipEstimate> {
    if budget < MIN_BUDGET {
        return Err(Error::invalid(format!("budget must be at least {MIN_BUDGET}, got {budget}")));
    }
    let max = optimize::maximize(disk, budget, |z| density_ratio(f, disk, z))?;

    // witness for the density channel: a short chord inside the disk
    let z = max.at;
    let inward = if z == disk.center {
        Complex64::new(1.0, 0.0)
    } else {
        (disk.center - z) / (disk.center - z).norm()
    };
    let partner = z + inward * (disk.radius * 1e-6);
    let mut best = LipEstimate {
        value: max.value,
        witness: [z, partner],
        samples_used: max.evaluations,
        refined: max.refined,
        seed,
    };
    if let Ok(r) = pair_ratio(f, disk, z, partner) {
        best.value = best.value.max(r);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(Complex64, Complex64)> = (0..budget)
        .map(|j| {
            let w = uniform_in(disk, &mut rng);
            let w2 = if j % 2 == 0 {
                uniform_in(disk, &mut rng)
            } else {
                let near = Disk { center: w, radius: 0.01 * disk.radius };
                let p = uniform_in(&near, &mut rng);
                if disk.contains(p) { p } else { w + (disk.center - w) * 0.01 }
            };
            (w, w2)
        })
        .collect();
    let ratios: Vec<Option<f64>> = pairs
        .par_iter()
        .map(|&(w, w2)| match pair_ratio(f, disk, w, w2) {
            Ok(r) => Ok(Some(r)),
            Err(Error::Indeterminate { .. }) | Err(Error::InvalidArgument(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    best.samples_used += 2 * budget;
    for (&(w, w2), r) in pairs.iter().zip(ratios) {
        if let Some(r) = r {
            if r > best.value {
                best.value = r;
                best.witness = [w, w2];
            }
        }
    }
    Ok(best)
}

pub(crate) fn uniform_in<R: Rng>(disk: &Disk, rng: &mut R) -> Complex64 {
    let rho: f64 = rng.gen::<f64>().sqrt();
    let theta: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
    disk.point(rho * (1.0 - 1e-12), theta)
}

/// Relative discrepancy `|L(f∘φ, D2) - L(f, D1)| / max(L(f, D1), ε)` for a
/// biholomorphism `φ: D2 → D1`.
pub fn invariance_check<M: HoloMap + ?Sized>(
    f: &M,
    d1: &Disk,
    d2: &Disk,
    phi: &Mobius,
    budget: usize,
    seed: u64,
) -> Result<f64> {
    let defect = phi.disk_map_defect(d2, d1);
    if !(defect <= BIHOLOMORPHIC_TOLERANCE) {
        return Err(Error::NotBiholomorphic { defect });
    }
    let direct = lipschitz_estimate(f, d1, budget, seed)?;
    let pulled = lipschitz_estimate(&Precomposed { inner: f, mobius: *phi }, d2, budget, seed)?;
    Ok((pulled.value - direct.value).abs() / direct.value.max(f64::EPSILON))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictLabel {
    Normal,
    NonNormalSuspected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub label: VerdictLabel,
    pub threshold: f64,
    pub trace: Vec<(i64, f64)>,
    /// Least-squares slope of `log L_k` against `log k` over the tail.
    pub divergence_rate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartyConfig {
    pub threshold: f64,
    pub tail: usize,
    pub budget: usize,
    pub seed: u64,
}

impl Default for MartyConfig {
    fn default() -> Self {
        MartyConfig {
            threshold: DEFAULT_THRESHOLD,
            tail: DEFAULT_TAIL,
            budget: DEFAULT_BUDGET,
            seed: 0,
        }
    }
}

/// `k = 1, 2, 4, ...` up to `k_max`.
pub fn doubling_schedule(k_max: i64) -> Vec<i64> {
    std::iter::successors(Some(1i64), |k| k.checked_mul(2)).take_while(|&k| k <= k_max).collect()
}

pub(crate) fn mix_seed(seed: u64, k: i64) -> u64 {
    seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Whether the last `tail` values are strictly increasing and the last one
/// reaches `threshold`.
pub fn diverges(values: &[f64], threshold: f64, tail: usize) -> bool {
    let Some(&last) = values.last() else { return false };
    let tail = tail.max(2).min(values.len());
    last >= threshold && values[values.len() - tail..].windows(2).all(|w| w[1] > w[0])
}

/// Normality test for the family `f_k` on `D(a, r)` over the given `ks`.
pub fn marty_test(family: &HoloExpr, a: Complex64, r: f64, ks: &[i64], cfg: &MartyConfig) -> Result<Verdict> {
    if ks.is_empty() {
        return Err(Error::invalid("empty k schedule"));
    }
    let disk = Disk::new(a, r)?;
    let trace = ks
        .par_iter()
        .map(|&k| {
            let f = Bound::new(family, Some(k));
            lipschitz_estimate(&f, &disk, cfg.budget, mix_seed(cfg.seed, k)).map(|e| (k, e.value))
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = trace.iter().map(|&(_, l)| l).collect();
    let label = if diverges(&values, cfg.threshold, cfg.tail) {
        VerdictLabel::NonNormalSuspected
    } else {
        VerdictLabel::Normal
    };
    let tail = &trace[trace.len() - cfg.tail.max(2).min(trace.len())..];
    Ok(Verdict {
        label,
        threshold: cfg.threshold,
        divergence_rate: log_slope(tail),
        trace,
    })
}

fn log_slope(points: &[(i64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(k, l)| k > 0 && l > 0.0)
        .map(|&(k, l)| ((k as f64).ln(), l.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return 0.0;
    }
    pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx
}
