use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{member_default, STParams};
use crate::error::{invalid, Error, Result};
use crate::germs::SetGerm;
use crate::rng::{self, domain};

/// Samples per Monte Carlo block; each block has its own RNG substream.
pub const MC_BLOCK: usize = 10_000;

/// Volume of the unit ball in `n` dimensions.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * std::f64::consts::PI / n as f64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub eps: f64,
    pub volume: f64,
    /// 95% normal-approximation half width.
    pub half_width_ci: f64,
    pub hits: u64,
    pub samples: u64,
}

/// `Vol(ST_d(A; C) ∩ B_eps(0))` by uniform sampling of the ball.
pub fn mc_volume(a: &SetGerm, params: &STParams, eps: f64, n: usize, seed: u64) -> Result<VolumeEstimate> {
    if n < 10_000 {
        return Err(invalid(format!("Monte Carlo volume needs n >= 10^4, got {n}")));
    }
    if !(eps > 0.0) {
        return Err(invalid("eps must be positive"));
    }
    let dim = a.ambient_dim();
    let blocks = n.div_ceil(MC_BLOCK);
    let hits: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::substream(seed, &[domain::MONTE_CARLO, b as u64]);
            let m = MC_BLOCK.min(n - b * MC_BLOCK);
            let mut h = 0u64;
            for _ in 0..m {
                let x = rng::in_ball(&mut rng, dim, eps);
                if member_default(a, params, &x)?.1 {
                    h += 1;
                }
            }
            Ok(h)
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum();
    let ball = unit_ball_volume(dim) * eps.powi(dim as i32);
    let p = hits as f64 / n as f64;
    Ok(VolumeEstimate { eps, volume: p * ball, half_width_ci: 1.96 * (p * (1.0 - p) / n as f64).sqrt() * ball, hits, samples: n as u64 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeEntry {
    pub eps: f64,
    /// A volume, or a volume ratio for ratio curves.
    pub volume: f64,
    pub half_width_ci: f64,
    pub hits: u64,
    /// Denominator hit count for ratio curves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub denominator_hits: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeCurve {
    pub entries: Vec<VolumeEntry>,
    pub params: STParams,
    /// Numerator width for ratio curves equals `params.c`; this is the denominator width.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub denominator_c: Option<f64>,
    pub sample_count: u64,
}

impl VolumeCurve {
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.volume).collect()
    }

    /// Indices `i` with `volume[i+1] >= volume[i]`.
    pub fn increases(&self) -> Vec<usize> {
        self.entries.windows(2).enumerate().filter(|(_, w)| w[1].volume >= w[0].volume).map(|(i, _)| i).collect()
    }

    /// Whether the increase at `i` is within the combined confidence intervals.
    pub fn increase_within_ci(&self, i: usize) -> bool {
        let (a, b) = (&self.entries[i], &self.entries[i + 1]);
        b.volume - a.volume <= a.half_width_ci + b.half_width_ci
    }
}

fn validate_eps_schedule(eps: &[f64]) -> Result<()> {
    if eps.len() < 5 {
        return Err(invalid(format!("eps schedule needs at least 5 entries, got {}", eps.len())));
    }
    if eps.iter().any(|&e| !(e > 0.0)) || eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("eps schedule must be positive and strictly decreasing"));
    }
    Ok(())
}

/// Volumes of `ST_d(A; C) ∩ B_eps` along a decreasing eps schedule.
pub fn volume_curve(a: &SetGerm, params: &STParams, eps_schedule: &[f64], n: usize, seed: u64) -> Result<VolumeCurve> {
    validate_eps_schedule(eps_schedule)?;
    let entries = eps_schedule
        .iter()
        .enumerate()
        .map(|(i, &eps)| {
            let v = mc_volume(a, params, eps, n, rng::derive_seed(seed, &[domain::MONTE_CARLO, i as u64]))?;
            Ok(VolumeEntry { eps, volume: v.volume, half_width_ci: v.half_width_ci, hits: v.hits, denominator_hits: None })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VolumeCurve { entries, params: *params, denominator_c: None, sample_count: n as u64 })
}

/// `Vol(ST_d(α; C1) ∩ B_eps) / Vol(ST_d(β; C2) ∩ B_eps)` with independent
/// samples for numerator and denominator and a delta-method confidence interval.
#[allow(clippy::too_many_arguments)]
pub fn volume_ratio_curve(alpha: &SetGerm, beta: &SetGerm, d: f64, c1: f64, c2: f64, eps_schedule: &[f64], n: usize, seed: u64) -> Result<VolumeCurve> {
    validate_eps_schedule(eps_schedule)?;
    let (pa, pb) = (STParams::new(d, c1)?, STParams::new(d, c2)?);
    let mut entries = Vec::with_capacity(eps_schedule.len());
    for (i, &eps) in eps_schedule.iter().enumerate() {
        let va = mc_volume(alpha, &pa, eps, n, rng::derive_seed(seed, &[domain::MONTE_CARLO, i as u64, 0]))?;
        let vb = mc_volume(beta, &pb, eps, n, rng::derive_seed(seed, &[domain::MONTE_CARLO, i as u64, 1]))?;
        if vb.hits < 100 {
            return Err(Error::DivisionUnstable { eps, hits: vb.hits });
        }
        let ratio = va.volume / vb.volume;
        let rel_b = vb.half_width_ci / vb.volume;
        let ci = if va.hits == 0 {
            va.half_width_ci / vb.volume
        } else {
            ratio * ((va.half_width_ci / va.volume).powi(2) + rel_b * rel_b).sqrt()
        };
        entries.push(VolumeEntry { eps, volume: ratio, half_width_ci: ci, hits: va.hits, denominator_hits: Some(vb.hits) });
    }
    Ok(VolumeCurve { entries, params: pa, denominator_c: Some(c2), sample_count: n as u64 })
}
