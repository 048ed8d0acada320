//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use punctlab::lipschitz::{doubling_schedule, invariance_check, lipschitz_estimate, marty_test, MartyConfig, VerdictLabel};
use punctlab::maps::{Bound, HoloMap, Mobius};
use punctlab::metrics::{comparison_bounds, poincare_distance, punctured_circle_length, punctured_distance, Disk};
use punctlab::singularity::{
    annulus_separation_check, converse_spread, julia_indicator, log_derivative_variation, lv_witness,
    rescaling_principle, winding_number, GrowthConfig, LvConfig, LvOutcome, PrincipleConfig,
};
use punctlab::zalcman::{extract_rescaling, power_schedule, CaseTag, ZalcmanConfig, GRID_SIDE};
use punctlab::HoloExpr;

type Check = Result<String, String>;
type Schedule = Box<dyn Fn(i32) -> (Complex64, f64)>;
type Criterion = (&'static str, fn() -> Check);

fn expr(s: &str) -> HoloExpr {
    HoloExpr::parse(s).expect("valid expression")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn e<T: std::fmt::Display>(err: T) -> String {
    err.to_string()
}

fn sandwich() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = f64::INFINITY;
    for _ in 0..10_000 {
        let big = rng.gen_range(1e-3..=2.0);
        let r = big * rng.gen_range(1e-3..1.0);
        let a = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let disk = Disk::new(a, big).map_err(e)?;
        let pick = |rng: &mut ChaCha8Rng| a + Complex64::from_polar(r * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU));
        let (z, w) = (pick(&mut rng), pick(&mut rng));
        let (lo, hi) = comparison_bounds(&disk, r, z, w).map_err(e)?;
        let d = poincare_distance(&disk, z, w).map_err(e)?;
        worst = worst.min(d - lo).min(hi - d);
    }
    ensure(worst >= -1e-12, || format!("slack {worst:e}"))?;
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("min slack {worst:.3e} in {:.2?}", start.elapsed()))
}

fn punctured_formulas() -> Check {
    let mut worst: f64 = 0.0;
    for j in 1..=8 {
        let r = 10f64.powi(-j);
        let len = punctured_circle_length(r).map_err(e)?;
        worst = worst.max((len - TAU / -r.ln()).abs());
    }
    ensure(worst <= 1e-12, || format!("circle length error {worst:e}"))?;
    let t = (-TAU).exp();
    let d = punctured_distance(Complex64::new(t, 0.0), Complex64::new(-t, 0.0)).map_err(e)?;
    let err = (d - 1.125f64.acosh()).abs();
    ensure(err <= 1e-9, || format!("distance {d} off by {err:e}"))?;
    Ok(format!("length error {worst:.1e}, distance {d:.12}"))
}

fn random_disk(rng: &mut ChaCha8Rng, avoid_origin: bool) -> Disk {
    loop {
        let c = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let r = rng.gen_range(0.1..1.5);
        if !avoid_origin || c.norm() > 1.25 * r {
            return Disk::new(c, r).expect("positive radius");
        }
    }
}

fn mobius_invariance() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for text in ["z", "z^2", "exp(1/z)"] {
        let f = expr(text);
        let m = Bound::new(&f, None);
        for i in 0..20 {
            let d1 = random_disk(&mut rng, text == "exp(1/z)");
            let d2 = random_disk(&mut rng, false);
            let alpha = Complex64::from_polar(rng.gen_range(0.0..0.9), rng.gen_range(0.0..TAU));
            let phi = Mobius::disk_to_disk(&d2, &d1, rng.gen_range(0.0..TAU), alpha).map_err(e)?;
            let disc = invariance_check(&m, &d1, &d2, &phi, 400, i).map_err(e)?;
            ensure(disc <= 0.05, || format!("{text}: discrepancy {disc:.4} on {d1:?} <- {d2:?}"))?;
            worst = worst.max(disc);
        }
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("max discrepancy {worst:.2e} over 60 maps in {:.2?}", start.elapsed()))
}

fn marty_dichotomy() -> Check {
    let cfg = MartyConfig::default();
    let zero = Complex64::new(0.0, 0.0);
    let ks = doubling_schedule(4096);
    let normal = marty_test(&expr("z+1/k"), zero, 0.5, &ks, &cfg).map_err(e)?;
    ensure(normal.label == VerdictLabel::Normal, || format!("z+1/k labelled {:?}", normal.label))?;
    let ks: Vec<i64> = (1..=12).map(|j| 1 << j).collect();
    let linear = marty_test(&expr("k*z"), zero, 0.5, &ks, &cfg).map_err(e)?;
    ensure(linear.label == VerdictLabel::NonNormalSuspected, || format!("k*z labelled {:?}", linear.label))?;
    let increasing = linear.trace.windows(2).all(|w| w[1].1 > w[0].1);
    ensure(increasing, || format!("trace not increasing: {:?}", linear.trace))?;
    Ok(format!("L_4096 = {:.1}, rate {:.3}", linear.trace.last().unwrap().1, linear.divergence_rate))
}

fn zalcman_linear() -> Check {
    let cfg = ZalcmanConfig { inner_radius: 0.5, ..ZalcmanConfig::default() };
    let r = cfg.inner_radius;
    let res = extract_rescaling(&expr("k*z"), &power_schedule(20), &cfg).map_err(e)?;
    ensure(res.case_tag == CaseTag::PlaneLimit, || format!("case {:?}: {}", res.case_tag, res.note))?;
    ensure(!res.k_indices.is_empty(), || "no extracted indices".into())?;
    for ratio in &res.normalization_ratios {
        ensure((ratio - 1.0).abs() <= 1e-9, || format!("normalization ratio {ratio}"))?;
    }
    for i in 0..res.k_indices.len() {
        let (rho, m, big) = (res.scales[i], res.sup_values[i], res.disk_radii[i]);
        ensure(rho * m <= 2.0 + 1e-9, || format!("rho*M = {}", rho * m))?;
        ensure(big >= m / 2.0 * (r / 2.0) - 1e-9, || format!("R = {big} < {}", m / 2.0 * (r / 2.0)))?;
    }
    ensure(res.spread >= 0.5, || format!("spread {}", res.spread))?;
    let residual = res.residual.unwrap_or(f64::INFINITY);
    ensure(residual <= 1e-3, || format!("residual {residual:e}"))?;
    Ok(format!("{} indices, spread {:.3}, residual {residual:.1e}", res.k_indices.len(), res.spread))
}

fn lv_search() -> Check {
    let radii: Vec<f64> = (1..=6).map(|j| 10f64.powi(-j)).collect();
    let cfg = LvConfig::default();
    let f = expr("exp(1/z)");
    let floor = match lv_witness(&Bound::new(&f, None), &radii, &cfg).map_err(e)? {
        LvOutcome::Witness(w) => w.diam_floor,
        other => return Err(format!("exp(1/z): {other:?}")),
    };
    ensure(floor >= 1.9, || format!("diam floor {floor}"))?;
    for text in ["z", "1/z", "z^3"] {
        let g = expr(text);
        match lv_witness(&Bound::new(&g, None), &radii, &cfg).map_err(e)? {
            LvOutcome::NotFound { final_diameters, .. } => {
                ensure(final_diameters.iter().all(|&d| d <= 1e-3), || format!("{text}: {final_diameters:?}"))?
            }
            LvOutcome::Witness(_) => return Err(format!("{text}: unexpected witness")),
        }
    }
    Ok(format!("exp(1/z) floor {floor:.6}; z, 1/z, z^3 not found"))
}

fn plane_limit() -> Check {
    let start = Instant::now();
    let f = expr("exp(1/z)");
    let cfg = PrincipleConfig::default();
    let p = rescaling_principle(&Bound::new(&f, None), &cfg).map_err(e)?;
    let res = &p.result;
    ensure(res.case_tag == CaseTag::PlaneLimit, || format!("case {:?}: {}", res.case_tag, res.note))?;
    ensure((cfg.zalcman.test_radius - 2.0).abs() < 1e-15, || "test disk is not D(2)".into())?;
    let residual = res.residual.unwrap_or(f64::INFINITY);
    ensure(residual <= 1e-3, || format!("residual {residual:e}"))?;
    let h = 2.0 * cfg.zalcman.test_radius / (GRID_SIDE - 1) as f64;
    let (mean, dev) = log_derivative_variation(&res.limit_samples, h).ok_or("no interior grid samples")?;
    ensure(dev <= 0.05, || format!("log-derivative deviation {dev:.4}"))?;
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(format!("residual {residual:.1e}, g'/g = {mean:.4}, deviation {:.2}% in {:.2?}", dev * 100.0, start.elapsed()))
}

fn halfdisk_inequality() -> Check {
    let f = expr("exp(1/z)");
    let m = Bound::new(&f, None);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = f64::INFINITY;
    for i in 0..1000 {
        // log-uniform modulus so that every scale down to 1e-4 is visited
        let r = (2.0 / 3.0) * 10f64.powf(-rng.gen_range(0.0..4.0));
        let z = Complex64::from_polar(r, rng.gen_range(0.0..TAU));
        let lower = r / 2.0 * m.sharp(z).map_err(e)?;
        let l = lipschitz_estimate(&m, &Disk::new(z, r / 2.0).map_err(e)?, 100, i).map_err(e)?.value;
        ensure(l >= lower - 1e-6, || format!("at {z}: L = {l} < {lower}"))?;
        worst = worst.min(l - lower);
    }
    let radii: Vec<f64> = (1..=4).map(|j| 10f64.powi(-j)).collect();
    let profile = julia_indicator(&m, &radii, &GrowthConfig::default()).map_err(e)?;
    for entry in &profile.entries {
        let t = entry.radius;
        let at_it = t * m.sharp(Complex64::new(0.0, t)).map_err(e)?;
        for (what, v) in [("trace", entry.sup), ("value at it", at_it)] {
            ensure((v * t - 1.0).abs() <= 1e-6, || format!("{what} at t = {t}: {v} vs {}", 1.0 / t))?;
        }
    }
    Ok(format!("min L - (|z|/2) f# = {worst:.3e}; trace = 1/t at 4 radii"))
}

fn winding_and_separation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for c in 0..20 {
        let n = c % 5 - 2;
        let p = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let radius = rng.gen_range(0.5..2.0);
        let wobble = Complex64::from_polar(rng.gen_range(0.0..0.2), rng.gen_range(0.0..TAU));
        let curve = |samples: usize| -> Vec<Complex64> {
            (0..samples)
                .map(|j| {
                    let t = TAU * j as f64 / samples as f64;
                    let main = if n == 0 {
                        Complex64::from_polar(radius, t) + 3.0 * radius
                    } else {
                        Complex64::from_polar(radius, n as f64 * t)
                    };
                    p + main + radius * wobble * Complex64::from_polar(1.0, 2.0 * t)
                })
                .collect()
        };
        for samples in [256, 512, 1024] {
            let w = winding_number(&curve(samples), p).map_err(e)?;
            ensure(w == n, || format!("curve {c}: index {w}, expected {n} at {samples} samples"))?;
        }
    }
    let maps = ["z", "z^2", "1/z", "(z-0.5)/(z+2)"].map(expr);
    for i in 0..100u64 {
        let f = Bound::new(&maps[(i % 4) as usize], None);
        let r_in = rng.gen_range(0.05..0.4);
        let r_out = r_in + rng.gen_range(0.1..0.5);
        let y0 = Complex64::from_polar(rng.gen_range(r_in * 1.01..r_out * 0.99), rng.gen_range(0.0..TAU));
        let disk = |rng: &mut ChaCha8Rng| {
            Disk::new(Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)), rng.gen_range(0.05..3.0))
        };
        let (da, db) = (disk(&mut rng).map_err(e)?, disk(&mut rng).map_err(e)?);
        let separated = annulus_separation_check(&f, r_in, r_out, &da, &db, y0).map_err(e)?;
        ensure(!separated, || format!("configuration {i} separated"))?;
    }
    Ok("20 curves exact and stable; 100 configurations never separate".into())
}

fn extension_converse() -> Check {
    let schedules: [Schedule; 3] = [
        Box::new(|j| (Complex64::new(10f64.powi(-j), 0.0), 10f64.powi(-2 * j))),
        Box::new(|j| (Complex64::from_polar(2f64.powi(-3 * j), j as f64), 2f64.powi(-4 * j))),
        Box::new(|j| (Complex64::new(0.0, 10f64.powi(-j - 1)), 10f64.powi(-j - 1) / PI)),
    ];
    let mut last: f64 = 0.0;
    for text in ["z", "1/z"] {
        let f = expr(text);
        let m = Bound::new(&f, None);
        for (s, schedule) in schedules.iter().enumerate() {
            let steps: Vec<(Complex64, f64)> = (1..=6).map(schedule).collect();
            let spreads = converse_spread(&m, &steps, 2.0).map_err(e)?;
            let fin = *spreads.last().unwrap();
            ensure(fin <= 1e-3, || format!("{text}, schedule {s}: spreads {spreads:?}"))?;
            last = last.max(fin);
        }
        let p = rescaling_principle(&m, &PrincipleConfig::default()).map_err(e)?;
        ensure(p.result.case_tag == CaseTag::NoEssentialSingularity, || {
            format!("{text}: {:?} ({})", p.result.case_tag, p.result.note)
        })?;
    }
    Ok(format!("largest final spread {last:.1e}; both declared removable or poles"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("Poincaré comparison sandwich", sandwich),
        ("punctured-disk length and distance", punctured_formulas),
        ("Möbius invariance of the Lipschitz constant", mobius_invariance),
        ("Marty-type dichotomy", marty_dichotomy),
        ("Zalcman extraction on k*z", zalcman_linear),
        ("circle-diameter witness", lv_search),
        ("plane limit for exp(1/z)", plane_limit),
        ("half-disk inequality and Julia trace", halfdisk_inequality),
        ("winding numbers and annulus separation", winding_and_separation),
        ("extension converse", extension_converse),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
