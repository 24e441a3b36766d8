//! Invertible germ maps of `(R^n, 0)`, pushforward of clouds, and empirical
//! bi-Lipschitz constants.

mod lipschitz;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use lipschitz::{estimate_bilipschitz, LipschitzEstimate, ScaleRatio, DEGENERATION_FACTOR};

use crate::error::{invalid, Error, Result};
use crate::germs::{rebucket, AnnulusSample, GermBody, SetGerm};
use crate::vecops;

/// An invertible linear map with its precomputed inverse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct LinearMap {
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl LinearMap {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(invalid("linear map needs a square, nonempty matrix"));
        }
        let matrix = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        let inverse = matrix.clone().try_inverse().ok_or_else(|| invalid("linear map matrix is singular"))?;
        if !inverse.iter().all(|v| v.is_finite()) {
            return Err(invalid("linear map matrix is numerically singular"));
        }
        Ok(LinearMap { matrix, inverse })
    }

    pub fn identity(n: usize) -> Self {
        LinearMap { matrix: DMatrix::identity(n, n), inverse: DMatrix::identity(n, n) }
    }

    pub fn scaling(n: usize, s: f64) -> Result<Self> {
        Self::new((0..n).map(|i| (0..n).map(|j| if i == j { s } else { 0.0 }).collect()).collect())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum()).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for LinearMap {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        LinearMap::new(rows)
    }
}

impl From<LinearMap> for Vec<Vec<f64>> {
    fn from(m: LinearMap) -> Self {
        (0..m.matrix.nrows()).map(|i| (0..m.matrix.ncols()).map(|j| m.matrix[(i, j)]).collect()).collect()
    }
}

fn default_slope() -> f64 {
    3f64.sqrt()
}

fn default_node_ratio() -> f64 {
    (3f64.sqrt() - 1.0) / (3f64.sqrt() + 1.0)
}

/// The zigzag profile: zero outside `(0,1)`, a tent of slope `±slope` on each
/// `[a_n, a_{n-1}]` with `a_n = node_ratio^n`, peaking at the midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZigzagParams {
    #[serde(default = "default_slope")]
    pub slope: f64,
    #[serde(default = "default_node_ratio")]
    pub node_ratio: f64,
}

impl Default for ZigzagParams {
    fn default() -> Self {
        ZigzagParams { slope: default_slope(), node_ratio: default_node_ratio() }
    }
}

impl ZigzagParams {
    /// Node `a_n = node_ratio^n`.
    pub fn node(&self, n: i32) -> f64 {
        self.node_ratio.powi(n)
    }

    /// Peak location on `[a_n, a_{n-1}]`.
    pub fn peak(&self, n: i32) -> f64 {
        0.5 * (self.node(n) + self.node(n - 1))
    }
}

/// Value of the zigzag profile at `x`.
pub fn zigzag_value(params: &ZigzagParams, x: f64) -> f64 {
    if !(x > 0.0 && x < 1.0) {
        return 0.0;
    }
    let q = params.node_ratio;
    let mut n = ((x.ln() / q.ln()).floor() as i32 + 1).max(1);
    // settle rounding at the nodes so that a_n <= x < a_{n-1}
    while params.node(n) > x {
        n += 1;
    }
    while n > 1 && params.node(n - 1) <= x {
        n -= 1;
    }
    let (lo, hi) = (params.node(n), params.node(n - 1));
    if x <= params.peak(n) {
        params.slope * (x - lo)
    } else {
        params.slope * (hi - x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "lowercase")]
pub enum GermMap {
    /// Polar `(r, θ) -> (r, θ - log r)` in the plane.
    Spiral,
    /// Shear `(x, y) -> (x, y + f(x))` with the zigzag profile `f`.
    Zigzag(ZigzagParams),
    /// `z -> z^k` on coordinate `axis` (0-based), `k` odd.
    Power { ambient_dim: usize, axis: usize, exponent: u32 },
    Linear { matrix: LinearMap },
    /// Applies the maps in order (first entry first).
    Composite { maps: Vec<GermMap> },
}

impl GermMap {
    pub fn linear(rows: Vec<Vec<f64>>) -> Result<Self> {
        Ok(GermMap::Linear { matrix: LinearMap::new(rows)? })
    }

    pub fn identity(n: usize) -> Self {
        GermMap::Linear { matrix: LinearMap::identity(n) }
    }

    pub fn zigzag() -> Self {
        GermMap::Zigzag(ZigzagParams::default())
    }

    pub fn power(ambient_dim: usize, axis: usize, exponent: u32) -> Result<Self> {
        let m = GermMap::Power { ambient_dim, axis, exponent };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GermMap::Spiral => Ok(()),
            GermMap::Zigzag(p) => {
                if !(p.slope > 0.0 && p.node_ratio > 0.0 && p.node_ratio < 1.0) {
                    return Err(invalid("zigzag needs slope > 0 and node_ratio in (0,1)"));
                }
                Ok(())
            }
            GermMap::Power { ambient_dim, axis, exponent } => {
                if axis >= ambient_dim {
                    return Err(invalid(format!("power axis {axis} out of range for dimension {ambient_dim}")));
                }
                if exponent % 2 == 0 {
                    return Err(invalid("power exponent must be odd and positive"));
                }
                Ok(())
            }
            GermMap::Linear { .. } => Ok(()),
            GermMap::Composite { maps } => {
                let dims: Vec<usize> = maps.iter().map(|m| m.ambient_dim()).collect();
                if dims.is_empty() || dims.windows(2).any(|w| w[0] != w[1]) {
                    return Err(invalid("composite needs at least one map, all of one dimension"));
                }
                maps.iter().try_for_each(|m| m.validate())
            }
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            GermMap::Spiral | GermMap::Zigzag(_) => 2,
            GermMap::Power { ambient_dim, .. } => *ambient_dim,
            GermMap::Linear { matrix } => matrix.dim(),
            GermMap::Composite { maps } => maps.first().map_or(0, |m| m.ambient_dim()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            GermMap::Spiral => "spiral".into(),
            GermMap::Zigzag(_) => "zigzag".into(),
            GermMap::Power { axis, exponent, .. } => format!("power(axis={axis},k={exponent})"),
            GermMap::Linear { .. } => "linear".into(),
            GermMap::Composite { maps } => format!("composite[{}]", maps.iter().map(|m| m.name()).collect::<Vec<_>>().join(",")),
        }
    }

    /// Forward evaluation; the origin maps to the origin.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.ambient_dim());
        match self {
            GermMap::Spiral => rotate_by_log(x, -1.0),
            GermMap::Zigzag(p) => vec![x[0], x[1] + zigzag_value(p, x[0])],
            GermMap::Power { axis, exponent, .. } => {
                let mut y = x.to_vec();
                y[*axis] = x[*axis].powi(*exponent as i32);
                y
            }
            GermMap::Linear { matrix } => LinearMap::apply(&matrix.matrix, x),
            GermMap::Composite { maps } => maps.iter().fold(x.to_vec(), |acc, m| m.eval(&acc)),
        }
    }

    pub fn eval_inverse(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.ambient_dim());
        match self {
            GermMap::Spiral => rotate_by_log(y, 1.0),
            GermMap::Zigzag(p) => vec![y[0], y[1] - zigzag_value(p, y[0])],
            GermMap::Power { axis, exponent, .. } => {
                let mut x = y.to_vec();
                let v = y[*axis];
                x[*axis] = if *exponent == 3 { v.cbrt() } else { v.signum() * v.abs().powf(1.0 / *exponent as f64) };
                x
            }
            GermMap::Linear { matrix } => LinearMap::apply(&matrix.inverse, y),
            GermMap::Composite { maps } => maps.iter().rev().fold(y.to_vec(), |acc, m| m.eval_inverse(&acc)),
        }
    }
}

/// Rotation of the plane by angle `sign * log|x|`.
fn rotate_by_log(x: &[f64], sign: f64) -> Vec<f64> {
    let r = vecops::norm(x);
    if r == 0.0 {
        return vec![0.0, 0.0];
    }
    let (s, c) = (sign * r.ln()).sin_cos();
    vec![c * x[0] - s * x[1], s * x[0] + c * x[1]]
}

/// Image of a Cloud germ, re-bucketed against the cloud's own annulus radii.
pub fn pushforward(map: &GermMap, cloud: &SetGerm) -> Result<SetGerm> {
    let GermBody::Cloud(annuli) = cloud.body() else {
        return Err(Error::Unsupported("pushforward expects a Cloud germ; sample it first".into()));
    };
    if cloud.cloud_points().next().is_none() {
        return Err(Error::EmptyCloud);
    }
    if map.ambient_dim() != cloud.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: cloud.ambient_dim(), got: map.ambient_dim() });
    }
    let template: Vec<AnnulusSample> = annuli.iter().map(|a| AnnulusSample { points: Vec::new(), ..a.clone() }).collect();
    let images = cloud.cloud_points().map(|p| map.eval(p));
    Ok(rebucket(cloud.ambient_dim(), images, template, None)?.with_label(format!("{}({})", map.name(), cloud.label())))
}

/// Image of a Cone germ under a map that sends rays to rays: linear maps, and
/// the zigzag shear on cones inside `{x <= 0}` where it is the identity.
pub fn image_of_cone(map: &GermMap, cone: &SetGerm) -> Result<SetGerm> {
    let GermBody::Cone(base) = cone.body() else {
        return Err(Error::Unsupported("image_of_cone expects a Cone germ".into()));
    };
    let dim = base.ambient_dim();
    let vectors: Vec<Vec<f64>> = match map {
        GermMap::Linear { matrix } => base.vectors().iter().map(|u| LinearMap::apply(&matrix.matrix, u)).collect(),
        GermMap::Zigzag(_) if base.vectors().iter().all(|u| u[0] <= 0.0) => base.vectors().to_vec(),
        GermMap::Composite { maps } => {
            let mut g = cone.clone();
            for m in maps {
                g = image_of_cone(m, &g)?;
            }
            return Ok(g);
        }
        other => return Err(Error::Unsupported(format!("{} does not map this cone to a cone", other.name()))),
    };
    let cloud = crate::sphere::SphericalCloud::from_directions(dim, &vectors, base.provenance().to_string())?;
    Ok(SetGerm::cone_over(cloud)?.with_label(format!("{}({})", map.name(), cone.label())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zigzag_nodes_and_peaks() {
        let p = ZigzagParams::default();
        for n in 0..30 {
            assert!(zigzag_value(&p, p.node(n)).abs() < 1e-12 * p.node(n).max(1e-300) + 1e-300);
        }
        // default peak coincides with a_{n-1} * s / (1 + s)
        let s = 3f64.sqrt();
        for n in 1..10 {
            assert!((p.peak(n) - p.node(n - 1) * s / (1.0 + s)).abs() < 1e-15);
            // the peak value equals the peak abscissa: slope-1 chord from the origin
            assert!((zigzag_value(&p, p.peak(n)) - p.peak(n)).abs() < 1e-12 * p.peak(n));
        }
        assert_eq!(zigzag_value(&p, -0.5), 0.0);
        assert_eq!(zigzag_value(&p, 1.5), 0.0);
    }

    #[test]
    fn spiral_fixes_unit_circle_point() {
        let y = GermMap::Spiral.eval(&[1.0, 0.0]);
        assert!((y[0] - 1.0).abs() < 1e-15 && y[1].abs() < 1e-15);
    }

    #[test]
    fn serde_tags() {
        let m: GermMap = serde_json::from_str(r#"{"tag":"zigzag"}"#).unwrap();
        assert_eq!(m, GermMap::zigzag());
        let l: GermMap = serde_json::from_str(r#"{"tag":"linear","matrix":[[2,0],[0,2]]}"#).unwrap();
        assert_eq!(l.eval(&[1.0, 1.0]), vec![2.0, 2.0]);
        let c: GermMap = serde_json::from_str(r#"{"tag":"composite","maps":[{"tag":"spiral"},{"tag":"linear","matrix":[[1,1],[0,1]]}]}"#).unwrap();
        assert_eq!(c.ambient_dim(), 2);
        assert!(serde_json::from_str::<GermMap>(r#"{"tag":"linear","matrix":[[1,1],[1,1]]}"#).is_err());
        let back: GermMap = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
