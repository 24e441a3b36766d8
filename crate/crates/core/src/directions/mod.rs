//! Direction sets, their dimensions and intersections, and tangent cones.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::germs::{sample_germ, ScaleSchedule, SetGerm};
use crate::rng::{self, domain};
use crate::sphere::SphericalCloud;
use crate::vecops;

pub const DEFAULT_STABILITY_TOL: f64 = 0.05;
pub const DEFAULT_ANGULAR_TOL: f64 = 0.05;
pub const DEFAULT_WINDOW: usize = 10;
pub const DEFAULT_CAPS: [f64; 7] = [0.4, 0.28, 0.2, 0.14, 0.1, 0.07, 0.05];

/// Radial projections per annulus and the pooled stable set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionEstimate {
    /// Deduplicated directions of the innermost `window` annuli.
    pub stable: SphericalCloud,
    pub per_scale: Vec<SphericalCloud>,
    pub stability_tol: f64,
    pub window: usize,
    /// Set when fewer than two annuli carried any points.
    pub insufficient_scales: bool,
}

/// Number of innermost annuli pooled into the stable set for `count` annuli.
pub fn effective_window(window: usize, count: usize) -> usize {
    window.min(count.saturating_sub(2)).max(1).min(count.max(1))
}

/// Estimates D(A) from `per_scale` samples in every annulus of `schedule`.
pub fn estimate_direction_set(germ: &SetGerm, schedule: &ScaleSchedule, per_scale: usize, stability_tol: f64, seed: u64) -> Result<DirectionEstimate> {
    estimate_direction_set_with(germ, schedule, per_scale, stability_tol, DEFAULT_WINDOW, seed)
}

pub fn estimate_direction_set_with(
    germ: &SetGerm,
    schedule: &ScaleSchedule,
    per_scale: usize,
    stability_tol: f64,
    window: usize,
    seed: u64,
) -> Result<DirectionEstimate> {
    if schedule.count < 4 {
        return Err(Error::InsufficientScales(schedule.count));
    }
    let cloud = sample_germ(germ, schedule, per_scale, seed)?;
    directions_of_cloud(&cloud, stability_tol, window)
}

/// Direction estimate of an already sampled (or pushed-forward) Cloud germ.
pub fn directions_of_cloud(cloud: &SetGerm, stability_tol: f64, window: usize) -> Result<DirectionEstimate> {
    if !(stability_tol > 0.0) {
        return Err(invalid("stability_tol must be positive"));
    }
    let annuli = cloud.annuli();
    if annuli.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let dim = cloud.ambient_dim();
    let per_scale = annuli
        .iter()
        .map(|a| SphericalCloud::from_directions(dim, &a.points, format!("scale {}", a.scale_index)))
        .collect::<Result<Vec<_>>>()?;
    let populated = per_scale.iter().filter(|c| !c.is_empty()).count();
    let w = effective_window(window, per_scale.len());
    let pooled: Vec<Vec<f64>> = per_scale[per_scale.len() - w..].iter().flat_map(|c| c.vectors().iter().cloned()).collect();
    let stable = SphericalCloud::new(dim, pooled, format!("stable directions of {}", cloud.label()))?.dedup(stability_tol / 2.0);
    Ok(DirectionEstimate { stable, per_scale, stability_tol, window: w, insufficient_scales: populated < 2 })
}

/// Cone over the estimated stable directions.
pub fn tangent_cone(germ: &SetGerm, schedule: &ScaleSchedule, per_scale: usize, stability_tol: f64, seed: u64) -> Result<SetGerm> {
    let est = estimate_direction_set(germ, schedule, per_scale, stability_tol, seed)?;
    cone_of(&est, germ.label())
}

pub fn cone_of(est: &DirectionEstimate, label: &str) -> Result<SetGerm> {
    if est.stable.is_empty() {
        return Err(Error::EmptyDirectionSet);
    }
    Ok(SetGerm::cone_over(est.stable.clone())?.with_label(format!("LD({label})")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub dim: i32,
    pub slope: f64,
    /// (smallest cap radius, largest cap radius) used in the fit.
    pub fit_range: (f64, f64),
    /// RMS residual of the log-log fit.
    pub residual: f64,
    /// `|slope - dim| <= 0.25`.
    pub confident: bool,
    /// All cover counts were equal (single cluster, slope forced to 0).
    pub degenerate: bool,
    /// (cap radius, cover count) pairs.
    pub counts: Vec<(f64, usize)>,
}

pub fn validate_caps(caps: &[f64]) -> Result<()> {
    if caps.len() < 4 {
        return Err(invalid(format!("cap schedule needs at least 4 radii, got {}", caps.len())));
    }
    if caps.iter().any(|&c| !(c > 0.0)) || caps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("cap radii must be positive and strictly decreasing"));
    }
    if caps[0] / caps[caps.len() - 1] < 4.0 {
        return Err(invalid("cap schedule must span a factor of at least 4"));
    }
    Ok(())
}

/// Covering radii (as angles) after 1, 2, ... centres of farthest-point
/// insertion, stopping once the radius is at most `stop`.
fn farthest_point_radii(vectors: &[Vec<f64>], stop: f64) -> Vec<f64> {
    let mut nearest = vec![f64::INFINITY; vectors.len()];
    let mut radii = Vec::new();
    let mut centre = 0;
    loop {
        let c = &vectors[centre];
        nearest.par_iter_mut().zip(vectors.par_iter()).for_each(|(d, v)| {
            let a = vecops::angle_between(c, v);
            if a < *d {
                *d = a;
            }
        });
        let (far, r) = nearest
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, &d)| if d > best.1 { (i, d) } else { best });
        radii.push(r.max(0.0));
        if r <= stop || radii.len() >= vectors.len() {
            return radii;
        }
        centre = far;
    }
}

/// Box-counting style dimension of a spherical cloud via greedy cap covers.
pub fn estimate_dimension(cloud: &SphericalCloud, caps: &[f64]) -> Result<DimensionReport> {
    validate_caps(caps)?;
    let fit_range = (caps[caps.len() - 1], caps[0]);
    if cloud.is_empty() {
        return Ok(DimensionReport { dim: -1, slope: 0.0, fit_range, residual: 0.0, confident: true, degenerate: false, counts: vec![] });
    }
    let radii = farthest_point_radii(cloud.vectors(), fit_range.0);
    let counts: Vec<(f64, usize)> = caps.iter().map(|&d| (d, radii.iter().position(|&r| r <= d).map_or(radii.len(), |k| k + 1))).collect();
    if counts.iter().all(|c| c.1 == counts[0].1) {
        return Ok(DimensionReport { dim: 0, slope: 0.0, fit_range, residual: 0.0, confident: true, degenerate: true, counts });
    }
    let xs: Vec<f64> = counts.iter().map(|c| (1.0 / c.0).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|c| (c.1 as f64).ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    let dim = slope.round().max(0.0) as i32;
    Ok(DimensionReport { dim, slope, fit_range, residual, confident: (slope - dim as f64).abs() <= 0.25, degenerate: false, counts })
}

/// Proximity join: normalized midpoints of all pairs within `angular_tol`,
/// deduplicated at `angular_tol / 2`.
pub fn intersect_direction_sets(d1: &SphericalCloud, d2: &SphericalCloud, angular_tol: f64) -> Result<SphericalCloud> {
    if d1.ambient_dim() != d2.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: d1.ambient_dim(), got: d2.ambient_dim() });
    }
    let dim = d1.ambient_dim();
    if d1.is_empty() || d2.is_empty() {
        return Ok(SphericalCloud::empty(dim, "intersection"));
    }
    let tree = d2.tree();
    let r = vecops::chord(angular_tol);
    let mids: Vec<Vec<Vec<f64>>> = d1
        .vectors()
        .par_iter()
        .map(|u| {
            tree.within(u, r)
                .into_iter()
                .filter(|&j| vecops::angle_between(u, &d2.vectors()[j]) <= angular_tol)
                .filter_map(|j| vecops::normalize(&vecops::add(u, &d2.vectors()[j])))
                .collect()
        })
        .collect();
    let all: Vec<Vec<f64>> = mids.into_iter().flatten().collect();
    Ok(SphericalCloud::new(dim, all, "intersection")?.dedup(angular_tol / 2.0))
}

/// Symmetric Hausdorff distance in the angular metric.
pub fn hausdorff_sphere(d1: &SphericalCloud, d2: &SphericalCloud) -> Result<f64> {
    if d1.is_empty() || d2.is_empty() {
        return Err(Error::EmptyInput("Hausdorff distance needs two nonempty clouds".into()));
    }
    if d1.ambient_dim() != d2.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: d1.ambient_dim(), got: d2.ambient_dim() });
    }
    Ok(directed_hausdorff(d1, d2).max(directed_hausdorff(d2, d1)))
}

/// `max over u in from of the angle to the nearest vector of to`.
pub fn directed_hausdorff(from: &SphericalCloud, to: &SphericalCloud) -> f64 {
    let tree = to.tree();
    from.vectors()
        .par_iter()
        .map(|u| {
            let (j, _) = tree.nearest(u).expect("nonempty");
            vecops::angle_between(u, &to.vectors()[j])
        })
        .reduce(|| 0.0, f64::max)
}

/// Parameters shared by the directional-dimension pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DirectionalParams {
    pub schedule: ScaleSchedule,
    pub per_scale: usize,
    pub stability_tol: f64,
    pub angular_tol: f64,
    pub caps: Vec<f64>,
    pub window: usize,
    pub seed: u64,
}

impl Default for DirectionalParams {
    fn default() -> Self {
        DirectionalParams {
            schedule: ScaleSchedule::default(),
            per_scale: 2000,
            stability_tol: DEFAULT_STABILITY_TOL,
            angular_tol: DEFAULT_ANGULAR_TOL,
            caps: DEFAULT_CAPS.to_vec(),
            window: DEFAULT_WINDOW,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionalReport {
    pub a: DirectionEstimate,
    pub b: DirectionEstimate,
    pub intersection: SphericalCloud,
    pub dimension: DimensionReport,
}

impl DirectionalReport {
    pub fn dim(&self) -> i32 {
        self.dimension.dim
    }
}

/// Estimates the direction set of a germ; Cloud germs are used as given.
pub fn directions_for(germ: &SetGerm, params: &DirectionalParams, seed: u64) -> Result<DirectionEstimate> {
    if germ.kind() == "cloud" {
        directions_of_cloud(germ, params.stability_tol, params.window)
    } else {
        estimate_direction_set_with(germ, &params.schedule, params.per_scale, params.stability_tol, params.window, seed)
    }
}

/// Full pipeline: direction sets of both germs, their intersection, and its dimension.
pub fn directional_report(a: &SetGerm, b: &SetGerm, params: &DirectionalParams) -> Result<DirectionalReport> {
    validate_caps(&params.caps)?;
    let ea = directions_for(a, params, rng::derive_seed(params.seed, &[domain::DERIVED, 0]))?;
    let eb = directions_for(b, params, rng::derive_seed(params.seed, &[domain::DERIVED, 1]))?;
    let intersection = intersect_direction_sets(&ea.stable, &eb.stable, params.angular_tol)?;
    let dimension = estimate_dimension(&intersection, &params.caps)?;
    Ok(DirectionalReport { a: ea, b: eb, intersection, dimension })
}

/// dim(D(A) ∩ D(B)) with the convention dim ∅ = -1.
pub fn directional_dimension(a: &SetGerm, b: &SetGerm, params: &DirectionalParams) -> Result<i32> {
    directional_report(a, b, params).map(|r| r.dim())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(n: usize) -> SphericalCloud {
        let v = (0..n).map(|i| {
            let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            vec![a.cos(), a.sin(), 0.0]
        });
        SphericalCloud::new(3, v.collect(), "circle").unwrap()
    }

    #[test]
    fn dimension_of_simple_clouds() {
        let caps = DEFAULT_CAPS;
        assert_eq!(estimate_dimension(&SphericalCloud::empty(3, ""), &caps).unwrap().dim, -1);
        let one = SphericalCloud::new(3, vec![vec![0.0, 0.0, 1.0]], "").unwrap();
        let r = estimate_dimension(&one, &caps).unwrap();
        assert_eq!((r.dim, r.degenerate), (0, true));
        let c = estimate_dimension(&circle(5000), &caps).unwrap();
        assert_eq!(c.dim, 1, "{c:?}");
        assert!(c.confident);
    }

    #[test]
    fn hausdorff_singletons() {
        let a = SphericalCloud::new(2, vec![vec![1.0, 0.0]], "").unwrap();
        let b = SphericalCloud::new(2, vec![vec![0.3f64.cos(), 0.3f64.sin()]], "").unwrap();
        assert!((hausdorff_sphere(&a, &b).unwrap() - 0.3).abs() < 1e-14);
        let s = SphericalCloud::new(2, vec![vec![-1.0, 0.0]], "").unwrap();
        assert!((hausdorff_sphere(&a, &s).unwrap() - std::f64::consts::PI).abs() < 1e-14);
        assert!(hausdorff_sphere(&a, &SphericalCloud::empty(2, "")).is_err());
    }

    #[test]
    fn caps_validation() {
        assert!(validate_caps(&[0.4, 0.2, 0.1]).is_err());
        assert!(validate_caps(&[0.4, 0.3, 0.2, 0.15]).is_err());
        assert!(validate_caps(&[0.4, 0.2, 0.2, 0.1]).is_err());
        assert!(validate_caps(&DEFAULT_CAPS).is_ok());
    }
}
