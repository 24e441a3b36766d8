use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::GermMap;
use crate::error::{invalid, Result};
use crate::germs::ScaleSchedule;
use crate::rng::{self, domain};
use crate::vecops;

/// A map is reported as degenerating when the per-scale minimum ratio falls by more than this factor.
pub const DEGENERATION_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleRatio {
    /// Outer radius of the annulus.
    pub scale: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// Empirical lower/upper Lipschitz ratios `|h(x1) - h(x2)| / |x1 - x2|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    pub k_lower: f64,
    pub k_upper: f64,
    pub pair_count: usize,
    pub min_ratio_trend: Vec<ScaleRatio>,
}

impl LipschitzEstimate {
    /// Ratio of the first to the last per-scale minimum.
    pub fn drop_factor(&self) -> f64 {
        match (self.min_ratio_trend.first(), self.min_ratio_trend.last()) {
            (Some(a), Some(b)) if b.min_ratio > 0.0 => a.min_ratio / b.min_ratio,
            (Some(_), Some(_)) => f64::INFINITY,
            _ => 1.0,
        }
    }

    /// True when the minimum ratio degenerates toward 0 across the schedule.
    pub fn degenerates(&self) -> bool {
        self.drop_factor() > DEGENERATION_FACTOR
    }
}

/// Central-difference Jacobian of `map` at `x`.
fn jacobian(map: &GermMap, x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let h = 1e-6 * vecops::norm(x);
    let mut j = DMatrix::zeros(n, n);
    for c in 0..n {
        let mut a = x.to_vec();
        let mut b = x.to_vec();
        a[c] += h;
        b[c] -= h;
        let (fa, fb) = (map.eval(&a), map.eval(&b));
        for r in 0..n {
            j[(r, c)] = (fa[r] - fb[r]) / (2.0 * h);
        }
    }
    j
}

/// Right singular vector of the Jacobian for its smallest (`want_min`) or largest singular value.
fn singular_direction(map: &GermMap, x: &[f64], want_min: bool) -> Option<Vec<f64>> {
    let svd = jacobian(map, x).svd(false, true);
    let v_t = svd.v_t?;
    let sv = &svd.singular_values;
    let idx = (0..sv.len()).reduce(|a, b| {
        let better = if want_min { sv[b] < sv[a] } else { sv[b] > sv[a] };
        if better { b } else { a }
    })?;
    let v: Vec<f64> = v_t.row(idx).iter().copied().collect();
    vecops::normalize(&v)
}

fn pair_ratio(map: &GermMap, schedule: &ScaleSchedule, k: usize, i: usize, seed: u64) -> f64 {
    let mut rng = rng::substream(seed, &[domain::PAIRS, k as u64, i as u64]);
    let n = map.ambient_dim();
    let (inner, outer) = (schedule.inner(k), schedule.radius(k));
    let x1 = vecops::scale(&rng::unit_vector(&mut rng, n), rng::log_uniform(&mut rng, inner, outer));
    let x2 = match i % 3 {
        0 => vecops::scale(&rng::unit_vector(&mut rng, n), rng::log_uniform(&mut rng, inner, outer)),
        regime => {
            let sep = if regime == 1 { 0.1 } else { 0.001 } * vecops::norm(&x1);
            let v = match (i / 3) % 3 {
                1 => singular_direction(map, &x1, true),
                2 => singular_direction(map, &x1, false),
                _ => None,
            }
            .unwrap_or_else(|| rng::unit_vector(&mut rng, n));
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            vecops::axpy(&x1, sign * sep, &v)
        }
    };
    let dx = vecops::dist(&x1, &x2);
    if dx == 0.0 {
        return f64::NAN;
    }
    vecops::dist(&map.eval(&x1), &map.eval(&x2)) / dx
}

/// Samples `pairs` point pairs per annulus, mixing separations `~|x1|`,
/// `0.1|x1|` and `0.001|x1|`; local pairs are displaced along random directions
/// or along the extreme singular directions of a finite-difference Jacobian.
pub fn estimate_bilipschitz(map: &GermMap, schedule: &ScaleSchedule, pairs: usize, seed: u64) -> Result<LipschitzEstimate> {
    if pairs < 100 {
        return Err(invalid(format!("at least 100 pairs per scale are required, got {pairs}")));
    }
    schedule.validate()?;
    map.validate()?;
    let mut trend = Vec::with_capacity(schedule.count);
    for k in 0..schedule.count {
        let ratios: Vec<f64> = (0..pairs).into_par_iter().map(|i| pair_ratio(map, schedule, k, i, seed)).collect();
        let finite = ratios.iter().copied().filter(|r| r.is_finite());
        let (mn, mx) = finite.fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r), b.max(r)));
        trend.push(ScaleRatio { scale: schedule.radius(k), min_ratio: mn, max_ratio: mx });
    }
    Ok(LipschitzEstimate {
        k_lower: trend.iter().map(|t| t.min_ratio).fold(f64::INFINITY, f64::min),
        k_upper: trend.iter().map(|t| t.max_ratio).fold(0.0, f64::max),
        pair_count: pairs * schedule.count,
        min_ratio_trend: trend,
    })
}
