use rand::seq::IndexedRandom;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::newton;
use super::{AnnulusSample, ArcParam, GermBody, ScaleSchedule, Semialgebraic, SetGerm};
use crate::error::{invalid, Error, Result};
use crate::rng::{self, domain};
use crate::sphere::SphericalCloud;
use crate::vecops;

/// Budgets for the zero-set sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Attempts allowed per requested point before giving up on an annulus.
    pub attempts_per_point: usize,
    /// Scan resolution along each chord before bisection.
    pub scan_points: usize,
    pub newton_max_iter: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { attempts_per_point: 400, scan_points: 256, newton_max_iter: 100 }
    }
}

/// Samples up to `per_scale` points of `germ` in every annulus of `schedule`.
pub fn sample_germ(germ: &SetGerm, schedule: &ScaleSchedule, per_scale: usize, seed: u64) -> Result<SetGerm> {
    sample_germ_with(germ, schedule, per_scale, seed, &SamplerConfig::default())
}

pub fn sample_germ_with(germ: &SetGerm, schedule: &ScaleSchedule, per_scale: usize, seed: u64, cfg: &SamplerConfig) -> Result<SetGerm> {
    schedule.validate()?;
    if per_scale == 0 {
        return Err(invalid("per_scale must be positive"));
    }
    if let GermBody::Cloud(_) = germ.body() {
        let template: Vec<AnnulusSample> = (0..schedule.count).map(|k| AnnulusSample::empty(schedule, k)).collect();
        return rebucket(germ.ambient_dim(), germ.cloud_points().cloned(), template, Some(per_scale));
    }
    let annuli: Vec<Result<AnnulusSample>> = (0..schedule.count)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng::substream(seed, &[domain::SAMPLE, k as u64]);
            let points = sample_annulus(germ, schedule.inner(k), schedule.radius(k), per_scale, &mut rng, cfg)
                .map_err(|e| match e {
                    Error::NoPointsFound(_) => Error::NoPointsFound(k),
                    other => other,
                })?;
            Ok(AnnulusSample { scale_index: k, inner_radius: schedule.inner(k), outer_radius: schedule.radius(k), points })
        })
        .collect();
    let annuli = annuli.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SetGerm::cloud(germ.ambient_dim(), annuli)?.with_label(germ.label().to_string()))
}

/// Distributes `points` over the annuli of `template` by norm, keeping at most
/// `cap` points per annulus in input order. Points outside every annulus are dropped.
pub fn rebucket(ambient_dim: usize, points: impl Iterator<Item = Vec<f64>>, mut template: Vec<AnnulusSample>, cap: Option<usize>) -> Result<SetGerm> {
    for a in template.iter_mut() {
        a.points.clear();
    }
    for p in points {
        let r = vecops::norm(&p);
        if let Some(a) = template.iter_mut().find(|a| a.contains_radius(r)) {
            if cap.is_none_or(|c| a.points.len() < c) {
                a.points.push(p);
            }
        }
    }
    SetGerm::cloud(ambient_dim, template)
}

/// Up to `n` points of `germ` with `inner < |p| <= outer`.
pub(crate) fn sample_annulus(germ: &SetGerm, inner: f64, outer: f64, n: usize, rng: &mut ChaCha8Rng, cfg: &SamplerConfig) -> Result<Vec<Vec<f64>>> {
    let dim = germ.ambient_dim();
    match germ.body() {
        GermBody::Cone(base) => Ok(sample_cone(base, inner, outer, n, rng)),
        GermBody::Arc(a) => sample_arc(germ, a, inner, outer, n, rng),
        GermBody::Semialgebraic(s) => sample_semialgebraic(s, dim, inner, outer, n, rng, cfg),
        GermBody::Cloud(_) => Err(Error::Unsupported("annulus sampling of a cloud; use rebucket".into())),
    }
}

fn sample_cone(base: &SphericalCloud, inner: f64, outer: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let u = base.vectors().choose(rng).expect("cone base is nonempty");
            let r = rng::log_uniform(rng, inner, outer);
            vecops::scale(u, r)
        })
        .filter(|p| {
            let r = vecops::norm(p);
            r > inner && r <= outer
        })
        .collect()
}

fn sample_arc(germ: &SetGerm, a: &ArcParam, inner: f64, outer: f64, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let grid = germ.arc_grid(a);
    // grid intervals whose norm range meets the annulus
    let spans: Vec<usize> = (0..grid.ts.len().saturating_sub(1))
        .filter(|&i| {
            let (lo, hi) = (grid.norms[i].min(grid.norms[i + 1]), grid.norms[i].max(grid.norms[i + 1]));
            hi > inner && lo <= outer
        })
        .collect();
    if spans.is_empty() {
        return Err(Error::NoPointsFound(0));
    }
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n && attempts < 20 * n {
        attempts += 1;
        let rho = rng::log_uniform(rng, inner, outer);
        let crossing: Vec<usize> = spans
            .iter()
            .copied()
            .filter(|&i| (grid.norms[i] - rho) * (grid.norms[i + 1] - rho) <= 0.0)
            .collect();
        let Some(&i) = crossing.choose(rng) else { continue };
        let (mut lo, mut hi) = (grid.ts[i], grid.ts[i + 1]);
        let g = |t: f64| vecops::norm(&a.eval(t)) - rho;
        let glo = g(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (g(mid) <= 0.0) == (glo <= 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        let p = a.eval(0.5 * (lo + hi));
        let r = vecops::norm(&p);
        if r > inner && r <= outer && p.iter().all(|v| v.is_finite()) {
            out.push(p);
        }
    }
    if out.is_empty() {
        return Err(Error::NoPointsFound(0));
    }
    Ok(out)
}

fn accept(s: &Semialgebraic, p: &[f64], inner: f64, outer: f64) -> bool {
    let r = vecops::norm(p);
    r > inner && r <= outer && s.contains(p)
}

fn sample_semialgebraic(s: &Semialgebraic, dim: usize, inner: f64, outer: f64, n: usize, rng: &mut ChaCha8Rng, cfg: &SamplerConfig) -> Result<Vec<Vec<f64>>> {
    let budget = n.saturating_mul(cfg.attempts_per_point).max(1);
    let mut out = Vec::with_capacity(n);
    let mut attempt = 0;
    while out.len() < n && attempt < budget {
        attempt += 1;
        if s.equations.is_empty() {
            let p = rng::in_annulus(rng, dim, inner, outer);
            if s.inequalities_hold(&p) {
                out.push(p);
            }
            continue;
        }
        if attempt % 2 == 1 {
            for p in chord_roots(s, dim, inner, outer, rng, cfg) {
                if out.len() < n && accept(s, &p, inner, outer) {
                    out.push(p);
                }
            }
        } else {
            let p0 = rng::in_annulus(rng, dim, inner, outer);
            if let Some(p) = newton::project(&s.equations, &p0, cfg.newton_max_iter) {
                if accept(s, &p, inner, outer) {
                    out.push(p);
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::NoPointsFound(0));
    }
    Ok(out)
}

/// Roots of the first equation along a random chord through the annulus,
/// polished onto the remaining equations by Newton.
fn chord_roots(s: &Semialgebraic, dim: usize, inner: f64, outer: f64, rng: &mut ChaCha8Rng, cfg: &SamplerConfig) -> Vec<Vec<f64>> {
    let p0 = rng::in_annulus(rng, dim, inner, outer);
    let u = rng::unit_vector(rng, dim);
    let f = &s.equations[0];
    let at = |t: f64| vecops::axpy(&p0, t, &u);
    let m = cfg.scan_points.max(2);
    let ts: Vec<f64> = (0..m).map(|i| -outer + 2.0 * outer * i as f64 / (m - 1) as f64).collect();
    let vals: Vec<f64> = ts.iter().map(|&t| f.eval(&at(t))).collect();
    let mut roots = Vec::new();
    for i in 0..m - 1 {
        if vals[i] == 0.0 {
            roots.push(at(ts[i]));
            continue;
        }
        if vals[i].signum() == vals[i + 1].signum() || vals[i + 1] == 0.0 {
            continue;
        }
        let (mut lo, mut hi, flo) = (ts[i], ts[i + 1], vals[i]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = f.eval(&at(mid));
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-13 * vecops::norm(&at(mid)) {
                break;
            }
        }
        let mut p = at(0.5 * (lo + hi));
        if s.equations.len() > 1 {
            match newton::project(&s.equations, &p, cfg.newton_max_iter) {
                Some(q) => p = q,
                None => continue,
            }
        }
        roots.push(p);
    }
    roots
}
