//! Sea-tangle neighbourhoods `ST_d(A; C) = { x : dist(x, A) <= C |x|^d }`:
//! membership, containment and equivalence checks, the sandwich bounds under
//! bi-Lipschitz maps, Monte Carlo volumes and the sequence selection check.

mod ssp;
mod volume;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use ssp::{check_ssp, ProbeGenerator, ProbeKind, SSPReport, SspScale, DEFAULT_SSP_THRESHOLD};
pub use volume::{mc_volume, unit_ball_volume, volume_curve, volume_ratio_curve, VolumeCurve, VolumeEntry, VolumeEstimate, MC_BLOCK};

use crate::error::{invalid, Error, Result};
use crate::germs::{distance_within, rebucket, sample_germ, AnnulusSample, ScaleSchedule, SetGerm};
use crate::maps::{estimate_bilipschitz, pushforward, GermMap, LipschitzEstimate};
use crate::rng::{self, domain};
use crate::vecops;

/// Fraction of tested points that must lie inside at every scale.
pub const CONTAINMENT_FRACTION: f64 = 0.99;
/// Distance tolerance used by membership tests, relative to `C |x|^d`.
pub const MEMBER_REL_TOL: f64 = 1e-6;

pub const DEFAULT_D_GRID: [f64; 5] = [1.05, 1.1, 1.25, 1.5, 2.0];
pub const DEFAULT_C_GRID: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

/// Degree `d` and width `C` of a sea-tangle neighbourhood.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct STParams {
    pub d: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

impl STParams {
    pub fn new(d: f64, c: f64) -> Result<Self> {
        if !(d > 0.0 && c > 0.0 && d.is_finite() && c.is_finite()) {
            return Err(invalid(format!("sea-tangle needs d > 0 and C > 0, got d = {d}, C = {c}")));
        }
        Ok(STParams { d, c })
    }

    /// `C |x|^d` for `|x| = r`.
    pub fn width_at(&self, r: f64) -> f64 {
        self.c * r.powf(self.d)
    }

    /// True when `C r^(d-1) >= 1`, i.e. the neighbourhood holds every point of norm `r`
    /// (the origin lies in the closure, so `dist(x, A) <= |x|`).
    pub fn covers_everything_at(&self, r: f64) -> bool {
        self.c * r.powf(self.d - 1.0) >= 1.0
    }
}

/// `dist(x, A) <= C |x|^d + tol`.
pub fn st_member(a: &SetGerm, params: &STParams, x: &[f64], tol: f64) -> Result<bool> {
    let r = vecops::norm(x);
    if r == 0.0 {
        return Err(invalid("sea-tangle membership is defined for x != 0"));
    }
    Ok(distance_within(a, x, params.width_at(r) + tol, tol.max(f64::MIN_POSITIVE))?.1)
}

/// Membership with the default relative tolerance; also returns the distance estimate.
fn member_default(a: &SetGerm, params: &STParams, x: &[f64]) -> Result<(f64, bool)> {
    let r = vecops::norm(x);
    let w = params.width_at(r);
    let tol = (MEMBER_REL_TOL * w).max(f64::MIN_POSITIVE);
    distance_within(a, x, w + tol, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleFraction {
    pub scale_index: usize,
    /// Outer radius of the annulus.
    pub scale: f64,
    pub tested: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub params: STParams,
    /// Scales without tested points are omitted.
    pub per_scale_fraction: Vec<ScaleFraction>,
    /// Largest `(dist(x, B) - C|x|^d) / |x|^d` observed (upper-bound distances).
    pub max_violation: f64,
    pub verdict: bool,
}

impl ContainmentReport {
    pub fn min_fraction(&self) -> f64 {
        self.per_scale_fraction.iter().map(|s| s.fraction).fold(1.0, f64::min)
    }

    fn from_rows(params: STParams, rows: Vec<(ScaleFraction, f64)>) -> Self {
        let max_violation = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
        let per_scale_fraction: Vec<ScaleFraction> = rows.into_iter().map(|r| r.0).collect();
        let verdict = !per_scale_fraction.is_empty() && per_scale_fraction.iter().all(|s| s.fraction >= CONTAINMENT_FRACTION);
        ContainmentReport { params, per_scale_fraction, max_violation, verdict }
    }
}

/// Tests every point of the Cloud germ `points` against `ST_d(B; C)`.
pub fn containment_of_cloud(points: &SetGerm, b: &SetGerm, params: &STParams) -> Result<ContainmentReport> {
    let rows = points
        .annuli()
        .iter()
        .filter(|a| !a.points.is_empty())
        .map(|a| {
            let res: Vec<(f64, bool)> = a
                .points
                .par_iter()
                .map(|x| {
                    let (d, inside) = member_default(b, params, x)?;
                    let r = vecops::norm(x);
                    Ok(((d - params.width_at(r)) / r.powf(params.d), inside))
                })
                .collect::<Result<Vec<_>>>()?;
            let inside = res.iter().filter(|r| r.1).count();
            let worst = res.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
            Ok((
                ScaleFraction { scale_index: a.scale_index, scale: a.outer_radius, tested: res.len(), fraction: inside as f64 / res.len() as f64 },
                worst,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ContainmentReport::from_rows(*params, rows))
}

/// Is `A ⊂ ST_d(B; C)` on the annuli of `schedule`?
pub fn check_containment(a: &SetGerm, b: &SetGerm, params: &STParams, schedule: &ScaleSchedule, per_scale: usize, seed: u64) -> Result<ContainmentReport> {
    let cloud = sample_germ(a, schedule, per_scale, seed)?;
    containment_of_cloud(&cloud, b, params)
}

/// Outcome of one containment direction of a grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearch {
    /// First grid pair that passed, if any.
    pub witness: Option<STParams>,
    /// The passing report, or the report with the best worst-scale fraction.
    pub report: Option<ContainmentReport>,
    /// Grid pairs skipped because the neighbourhood holds every point at every tested scale.
    pub skipped_vacuous: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    /// `B ⊂ ST_{d1}(A; C1)`.
    pub b_in_a: GridSearch,
    /// `A ⊂ ST_{d2}(B; C2)`.
    pub a_in_b: GridSearch,
}

impl EquivalenceReport {
    /// `((d1, C1), (d2, C2))` when both directions passed.
    pub fn witness(&self) -> Option<(STParams, STParams)> {
        Some((self.b_in_a.witness?, self.a_in_b.witness?))
    }
}

fn grid_search(points: &SetGerm, target: &SetGerm, d_grid: &[f64], c_grid: &[f64], schedule: &ScaleSchedule) -> Result<GridSearch> {
    let r_min = schedule.inner(schedule.count - 1);
    let mut best: Option<ContainmentReport> = None;
    let mut skipped = 0;
    for &d in d_grid {
        for &c in c_grid {
            let params = STParams::new(d, c)?;
            if params.covers_everything_at(r_min) {
                skipped += 1;
                continue;
            }
            let rep = containment_of_cloud(points, target, &params)?;
            if rep.verdict {
                return Ok(GridSearch { witness: Some(params), report: Some(rep), skipped_vacuous: skipped });
            }
            if best.as_ref().is_none_or(|b| rep.min_fraction() > b.min_fraction()) {
                best = Some(rep);
            }
        }
    }
    Ok(GridSearch { witness: None, report: best, skipped_vacuous: skipped })
}

/// Searches the grids for `B ⊂ ST_{d1}(A; C1)` and `A ⊂ ST_{d2}(B; C2)`; grid
/// order is `d` outer, `C` inner, each direction searched independently.
pub fn check_st_equivalence(
    a: &SetGerm,
    b: &SetGerm,
    d_grid: &[f64],
    c_grid: &[f64],
    schedule: &ScaleSchedule,
    per_scale: usize,
    seed: u64,
) -> Result<EquivalenceReport> {
    if d_grid.is_empty() || c_grid.is_empty() {
        return Err(invalid("grids must be nonempty"));
    }
    if d_grid.iter().any(|&d| !(d > 1.0)) {
        return Err(invalid("equivalence grids need d > 1"));
    }
    let sa = sample_germ(a, schedule, per_scale, rng::derive_seed(seed, &[domain::DERIVED, 0]))?;
    let sb = sample_germ(b, schedule, per_scale, rng::derive_seed(seed, &[domain::DERIVED, 1]))?;
    Ok(EquivalenceReport { b_in_a: grid_search(&sb, a, d_grid, c_grid, schedule)?, a_in_b: grid_search(&sa, b, d_grid, c_grid, schedule)? })
}

/// Samples points of `ST_d(G; C)` on the annuli of `schedule`: each sampled
/// point `g` of `G` proposes up to 8 points `g + δ`, `|δ| <= 2 C |g|^d`,
/// and the first one passing the membership test is kept.
pub fn sample_st_neighborhood(g: &SetGerm, params: &STParams, schedule: &ScaleSchedule, per_scale: usize, seed: u64) -> Result<SetGerm> {
    let base = sample_germ(g, schedule, per_scale, seed)?;
    let dim = g.ambient_dim();
    let accepted: Vec<Vec<Vec<f64>>> = base
        .annuli()
        .par_iter()
        .map(|a| {
            let mut rng = rng::substream(seed, &[domain::NEIGHBORHOOD, a.scale_index as u64]);
            let mut out = Vec::with_capacity(a.points.len());
            for p in &a.points {
                let r = vecops::norm(p);
                let reach = (2.0 * params.width_at(r)).min(0.5 * r);
                for _ in 0..8 {
                    let x = vecops::add(p, &rng::in_ball(&mut rng, dim, reach));
                    if vecops::norm(&x) > 0.0 && member_default(g, params, &x)?.1 {
                        out.push(x);
                        break;
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let template: Vec<AnnulusSample> = (0..schedule.count).map(|k| AnnulusSample::empty(schedule, k)).collect();
    Ok(rebucket(dim, accepted.into_iter().flatten(), template, None)?.with_label(format!("ST({})", g.label())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub lipschitz: LipschitzEstimate,
    /// Width `K K1 / K2^d` of the inner neighbourhood.
    pub inner_width: f64,
    /// Width `K K2 / K1^d` of the outer neighbourhood.
    pub outer_width: f64,
    /// Points of `ST_d(h(A); K K1/K2^d)` tested for membership in `h(ST_d(A; K))`.
    pub inner: ContainmentReport,
    /// Images of points of `ST_d(A; K)` tested against `ST_d(h(A); K K2/K1^d)`.
    pub outer: ContainmentReport,
}

/// Per-scale sample count of the dense image cloud representing `h(A)`.
pub const SANDWICH_IMAGE_PER_SCALE: usize = 20_000;

/// Checks `ST_d(hA; K K1/K2^d) ⊂ h(ST_d(A; K)) ⊂ ST_d(hA; K K2/K1^d)` with `K1, K2`
/// estimated on the schedule. `h(A)` is represented by a dense pushforward cloud
/// sampled one annulus beyond each end of the schedule.
pub fn check_sandwich(map: &GermMap, a: &SetGerm, k: f64, d: f64, schedule: &ScaleSchedule, per_scale: usize, seed: u64) -> Result<SandwichReport> {
    if !(d > 1.0) {
        return Err(invalid("the sandwich check needs d > 1"));
    }
    let lip = estimate_bilipschitz(map, schedule, 300, rng::derive_seed(seed, &[domain::DERIVED, 10]))?;
    if lip.degenerates() {
        return Err(Error::NotBiLipschitz { drop_factor: lip.drop_factor() });
    }
    let (k1, k2) = (lip.k_lower, lip.k_upper);
    let inner_params = STParams::new(d, k * k1 / k2.powf(d))?;
    let outer_params = STParams::new(d, k * k2 / k1.powf(d))?;
    let base_params = STParams::new(d, k)?;

    let wide = ScaleSchedule::new(schedule.eps0 / schedule.ratio, schedule.ratio, schedule.count + 2)?;
    let dense = sample_germ(a, &wide, SANDWICH_IMAGE_PER_SCALE, rng::derive_seed(seed, &[domain::DERIVED, 11]))?;
    let image = pushforward(map, &dense)?;

    // inner: sample ST_d(hA; inner width), pull back, test against ST_d(A; K)
    let st_image = sample_st_neighborhood(&image, &inner_params, schedule, per_scale, rng::derive_seed(seed, &[domain::DERIVED, 12]))?;
    let pulled_rows: Vec<(ScaleFraction, f64)> = st_image
        .annuli()
        .iter()
        .filter(|an| !an.points.is_empty())
        .map(|an| {
            let res: Vec<(f64, bool)> = an
                .points
                .par_iter()
                .map(|y| {
                    let x = map.eval_inverse(y);
                    let (dist, inside) = member_default(a, &base_params, &x)?;
                    let r = vecops::norm(&x);
                    Ok(((dist - base_params.width_at(r)) / r.powf(d), inside))
                })
                .collect::<Result<Vec<_>>>()?;
            let inside = res.iter().filter(|r| r.1).count();
            Ok((
                ScaleFraction { scale_index: an.scale_index, scale: an.outer_radius, tested: res.len(), fraction: inside as f64 / res.len() as f64 },
                res.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let inner = ContainmentReport::from_rows(inner_params, pulled_rows);

    // outer: sample ST_d(A; K), push forward, test against ST_d(hA; outer width)
    let st_a = sample_st_neighborhood(a, &base_params, schedule, per_scale, rng::derive_seed(seed, &[domain::DERIVED, 13]))?;
    let pushed = pushforward(map, &st_a)?;
    let outer = containment_of_cloud(&pushed, &image, &outer_params)?;

    Ok(SandwichReport { lipschitz: lip, inner_width: inner_params.c, outer_width: outer_params.c, inner, outer })
}
