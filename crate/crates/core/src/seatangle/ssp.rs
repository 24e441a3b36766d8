use rand::seq::IndexedRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::directions::{directions_of_cloud, DEFAULT_STABILITY_TOL, DEFAULT_WINDOW};
use crate::error::{invalid, Result};
use crate::germs::{closest_point, sample_germ, GermBody, ScaleSchedule, SetGerm};
use crate::rng::{self, domain};
use crate::vecops;

/// Default bound below which the final probe ratio counts as "much smaller".
pub const DEFAULT_SSP_THRESHOLD: f64 = 0.02;
/// Tail length for the eventual-decrease requirement.
const TREND_SPAN: usize = 4;

/// How probe points are generated from the germ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProbeKind {
    /// `a = factor * b` for sampled germ points `b`.
    Scaled { factor: f64 },
    /// `a = ρ u'` with `ρ` log-uniform in the annulus and `u'` a stable direction
    /// rotated by the angle `jitter * sqrt(ρ / eps0)` in a random plane.
    Directional { jitter: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeGenerator {
    pub kind: ProbeKind,
    pub per_scale: usize,
}

impl ProbeGenerator {
    pub fn scaled(factor: f64, per_scale: usize) -> Self {
        ProbeGenerator { kind: ProbeKind::Scaled { factor }, per_scale }
    }

    pub fn directional(jitter: f64, per_scale: usize) -> Self {
        ProbeGenerator { kind: ProbeKind::Directional { jitter }, per_scale }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SspScale {
    pub scale_index: usize,
    pub scale: f64,
    pub probes: usize,
    /// Max over probes `a` of min over germ points `b` of `|a - b| / max(|a|, |b|)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SSPReport {
    pub probe_ratios: Vec<SspScale>,
    pub threshold: f64,
    pub final_ratio: f64,
    pub eventually_decreasing: bool,
    pub verdict: bool,
}

/// Normalized gap from `a` to the germ: exact candidate search for clouds
/// (eight nearest stored points), closest point otherwise.
fn probe_ratio(a_germ: &SetGerm, a: &[f64]) -> Result<f64> {
    let an = vecops::norm(a);
    if let GermBody::Cloud(_) = a_germ.body() {
        let tree = a_germ.point_tree().expect("cloud has a tree");
        let best = tree
            .k_nearest(a, 8)
            .into_iter()
            .map(|(i, d)| d / an.max(vecops::norm(tree.point(i))))
            .fold(f64::INFINITY, f64::min);
        return Ok(best);
    }
    let (b, d) = closest_point(a_germ, a, 1e-9 * an)?;
    Ok(d / an.max(vecops::norm(&b)))
}

fn rotate_towards_random(u: &[f64], angle: f64, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<f64> {
    let w = rng::unit_vector(rng, u.len());
    let perp = vecops::axpy(&w, -vecops::dot(&w, u), u);
    match vecops::normalize(&perp) {
        Some(p) => vecops::normalize(&vecops::axpy(&vecops::scale(u, angle.cos()), angle.sin(), &p)).unwrap_or_else(|| u.to_vec()),
        None => u.to_vec(),
    }
}

/// Finite-scale check of the sequence selection property: probe points near
/// the germ's directions must have germ points at relatively vanishing distance.
pub fn check_ssp(a: &SetGerm, probe: &ProbeGenerator, schedule: &ScaleSchedule, threshold: f64, seed: u64) -> Result<SSPReport> {
    if !(threshold > 0.0) || probe.per_scale == 0 {
        return Err(invalid("SSP check needs a positive threshold and probe count"));
    }
    let samples = sample_germ(a, schedule, probe.per_scale, rng::derive_seed(seed, &[domain::PROBE, 0]))?;
    let mut probes: Vec<Vec<Vec<f64>>> = vec![Vec::new(); schedule.count];
    match probe.kind {
        ProbeKind::Scaled { factor } => {
            if !(factor > 0.0) {
                return Err(invalid("scale factor must be positive"));
            }
            for p in samples.cloud_points() {
                let q = vecops::scale(p, factor);
                if let Some(k) = schedule.scale_of(vecops::norm(&q)) {
                    probes[k].push(q);
                }
            }
        }
        ProbeKind::Directional { jitter } => {
            let dirs = directions_of_cloud(&samples, DEFAULT_STABILITY_TOL, DEFAULT_WINDOW)?.stable;
            if dirs.is_empty() {
                return Err(invalid("no stable directions to probe along"));
            }
            for (k, slot) in probes.iter_mut().enumerate() {
                let mut rng = rng::substream(seed, &[domain::PROBE, 1, k as u64]);
                for _ in 0..probe.per_scale {
                    let rho = rng::log_uniform(&mut rng, schedule.inner(k), schedule.radius(k));
                    let u = dirs.vectors().choose(&mut rng).expect("nonempty");
                    let v = rotate_towards_random(u, jitter * (rho / schedule.eps0).sqrt(), &mut rng);
                    slot.push(vecops::scale(&v, rho));
                }
            }
        }
    }
    let mut rows = Vec::new();
    for (k, ps) in probes.iter().enumerate() {
        if ps.is_empty() {
            continue;
        }
        let ratios = ps.par_iter().map(|q| probe_ratio(a, q)).collect::<Result<Vec<_>>>()?;
        let ratio = ratios.into_iter().fold(0.0, f64::max);
        rows.push(SspScale { scale_index: k, scale: schedule.radius(k), probes: ps.len(), ratio });
    }
    let final_ratio = rows.last().map_or(f64::INFINITY, |r| r.ratio);
    let eventually_decreasing = if rows.len() >= TREND_SPAN {
        let n = rows.len();
        rows[n - 1].ratio <= rows[n - TREND_SPAN].ratio + 0.05 * threshold
    } else {
        false
    };
    Ok(SSPReport { verdict: eventually_decreasing && final_ratio < threshold, probe_ratios: rows, threshold, final_ratio, eventually_decreasing })
}
