//! Set-germs at the origin: representations, sampling and distances.

mod distance;
mod newton;
pub mod expr;
pub mod io;
pub mod poly;
mod sample;
pub mod schedule;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

pub use distance::{closest_point, distance_to_germ};
pub(crate) use distance::distance_within;
pub use expr::Expr;
pub use poly::{Monomial, Polynomial};
pub use sample::{rebucket, sample_germ, sample_germ_with, SamplerConfig};
pub use schedule::{AnnulusSample, ScaleSchedule};

use crate::error::{invalid, Error, Result};
use crate::kdtree::KdTree;
use crate::sphere::SphericalCloud;
use crate::vecops;

/// Sign required of a strict inequality `p(x) > 0` or `p(x) < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = ">")]
    Positive,
    #[serde(rename = "<")]
    Negative,
}

impl Sign {
    pub fn holds(self, v: f64) -> bool {
        match self {
            Sign::Positive => v > 0.0,
            Sign::Negative => v < 0.0,
        }
    }
}

/// `{ x : f_i(x) = 0 for all i, g_j(x) (>|<) 0 for all j }`.
#[derive(Debug, Clone, PartialEq)]
pub struct Semialgebraic {
    pub equations: Vec<Polynomial>,
    pub inequalities: Vec<(Polynomial, Sign)>,
}

/// Residual bound accepted for sampled points: `|f(p)| <= RESIDUAL_REL * (1 + |p|)`.
pub const RESIDUAL_REL: f64 = 1e-9;
/// Scale-aware residual bound: `|f(p)| <= ON_SET_REL * sum |c| |p|^deg` per equation.
/// The absolute bound above says nothing near the origin, where every term is tiny.
pub const ON_SET_REL: f64 = 1e-10;

impl Semialgebraic {
    pub fn inequalities_hold(&self, x: &[f64]) -> bool {
        self.inequalities.iter().all(|(p, s)| s.holds(p.eval(x)))
    }

    pub fn residual(&self, x: &[f64]) -> f64 {
        self.equations.iter().map(|p| p.eval(x).abs()).fold(0.0, f64::max)
    }

    pub fn residual_ok(&self, x: &[f64]) -> bool {
        self.residual(x) <= RESIDUAL_REL * (1.0 + vecops::norm(x))
    }

    /// Every equation vanishes relative to the size of its terms at `|x|`.
    pub fn on_set(&self, x: &[f64]) -> bool {
        let r = vecops::norm(x);
        self.equations.iter().all(|p| p.eval(x).abs() <= ON_SET_REL * p.magnitude_at(r))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.residual_ok(x) && self.on_set(x) && self.inequalities_hold(x)
    }
}

/// A parametrized curve `t -> (x_1(t), ..., x_n(t))` on `(0, t_max]` tending to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcParam {
    pub coords: Vec<Expr>,
    pub t_max: f64,
}

impl ArcParam {
    pub fn eval(&self, t: f64) -> Vec<f64> {
        self.coords.iter().map(|e| e.eval(t)).collect()
    }

    /// Smallest parameter probed by sampling and distance routines.
    pub fn t_min(&self) -> f64 {
        self.t_max * 1e-15
    }
}

#[derive(Debug, Clone)]
pub enum GermBody {
    Semialgebraic(Semialgebraic),
    Arc(ArcParam),
    Cone(SphericalCloud),
    Cloud(Vec<AnnulusSample>),
}

#[derive(Default)]
pub(crate) struct GermCache {
    pub(crate) tree: OnceLock<KdTree>,
    pub(crate) arc_grid: OnceLock<distance::ArcGrid>,
    pub(crate) octaves: Mutex<HashMap<i32, Arc<distance::Octave>>>,
}

/// A set-germ at the origin of `R^n`. Immutable; clones share lazily built caches.
#[derive(Clone)]
pub struct SetGerm {
    ambient_dim: usize,
    body: GermBody,
    label: String,
    pub(crate) cache: Arc<GermCache>,
}

impl fmt::Debug for SetGerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SetGerm").field("ambient_dim", &self.ambient_dim).field("label", &self.label).field("body", &self.body).finish()
    }
}

impl SetGerm {
    fn wrap(ambient_dim: usize, body: GermBody) -> Self {
        SetGerm { ambient_dim, body, label: String::new(), cache: Arc::new(GermCache::default()) }
    }

    /// Zero set of `equations` intersected with the strict `inequalities`.
    pub fn semialgebraic(ambient_dim: usize, equations: Vec<Polynomial>, inequalities: Vec<(Polynomial, Sign)>) -> Result<Self> {
        for p in equations.iter().chain(inequalities.iter().map(|(p, _)| p)) {
            if p.ambient_dim() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, got: p.ambient_dim() });
            }
        }
        for p in &equations {
            if p.eval(&vec![0.0; ambient_dim]).abs() > RESIDUAL_REL {
                return Err(invalid(format!("equation {p} does not vanish at the origin")));
            }
        }
        Ok(Self::wrap(ambient_dim, GermBody::Semialgebraic(Semialgebraic { equations, inequalities })))
    }

    /// The germ of the whole space.
    pub fn full_space(ambient_dim: usize) -> Self {
        Self::wrap(ambient_dim, GermBody::Semialgebraic(Semialgebraic { equations: vec![], inequalities: vec![] }))
    }

    /// Parametrized arc; checks that the curve approaches the origin at the smallest probe parameter.
    pub fn arc(coords: Vec<Expr>, t_max: f64) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("arc needs at least one coordinate"));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(invalid("t_max must be positive"));
        }
        let a = ArcParam { coords, t_max };
        let r_far = vecops::norm(&a.eval(t_max));
        let r_near = vecops::norm(&a.eval(a.t_min()));
        if !r_near.is_finite() || !r_far.is_finite() || r_near > 1e-4 * r_far.max(1e-300) {
            return Err(invalid(format!("arc does not tend to the origin: |p(t_min)| = {r_near:e}, |p(t_max)| = {r_far:e}")));
        }
        Ok(Self::wrap(a.coords.len(), GermBody::Arc(a)))
    }

    /// Cone `{ t a : a in base, t >= 0 }`.
    pub fn cone_over(base: SphericalCloud) -> Result<Self> {
        if base.is_empty() {
            return Err(Error::EmptyBase);
        }
        Ok(Self::wrap(base.ambient_dim(), GermBody::Cone(base)))
    }

    /// Multi-scale point cloud; every point must be nonzero and lie in its annulus.
    pub fn cloud(ambient_dim: usize, annuli: Vec<AnnulusSample>) -> Result<Self> {
        for a in &annuli {
            if !(a.inner_radius > 0.0 && a.inner_radius < a.outer_radius) {
                return Err(invalid(format!("annulus {} has bad radii", a.scale_index)));
            }
            for p in &a.points {
                if p.len() != ambient_dim {
                    return Err(Error::DimensionMismatch { expected: ambient_dim, got: p.len() });
                }
                if !a.contains_radius(vecops::norm(p)) {
                    return Err(invalid(format!("point {p:?} lies outside annulus {}", a.scale_index)));
                }
            }
        }
        Ok(Self::wrap(ambient_dim, GermBody::Cloud(annuli)))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn body(&self) -> &GermBody {
        &self.body
    }

    pub fn kind(&self) -> &'static str {
        match self.body {
            GermBody::Semialgebraic(_) => "semialgebraic",
            GermBody::Arc(_) => "arc",
            GermBody::Cone(_) => "cone",
            GermBody::Cloud(_) => "cloud",
        }
    }

    /// Annuli of a Cloud germ (empty slice for other bodies).
    pub fn annuli(&self) -> &[AnnulusSample] {
        match &self.body {
            GermBody::Cloud(a) => a,
            _ => &[],
        }
    }

    /// All stored points of a Cloud germ, annulus by annulus.
    pub fn cloud_points(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.annuli().iter().flat_map(|a| a.points.iter())
    }

    /// Sub-cloud keeping the points for which `keep(scale_index, point_index)` holds.
    pub fn cloud_subset(&self, mut keep: impl FnMut(usize, usize) -> bool) -> Result<SetGerm> {
        let GermBody::Cloud(annuli) = &self.body else {
            return Err(Error::Unsupported("subset of a non-cloud germ".into()));
        };
        let annuli = annuli
            .iter()
            .map(|a| AnnulusSample {
                points: a.points.iter().enumerate().filter(|(i, _)| keep(a.scale_index, *i)).map(|(_, p)| p.clone()).collect(),
                ..a.clone()
            })
            .collect();
        Ok(SetGerm::cloud(self.ambient_dim, annuli)?.with_label(self.label.clone()))
    }

    /// Whether `x` belongs to the germ's representative (exactly, up to residual bounds).
    pub fn contains(&self, x: &[f64]) -> bool {
        match &self.body {
            GermBody::Semialgebraic(s) => s.contains(x),
            _ => distance_to_germ(self, x, 1e-12 * vecops::norm(x).max(1e-300)).map(|d| d <= 1e-9 * (1.0 + vecops::norm(x))).unwrap_or(false),
        }
    }

    pub(crate) fn point_tree(&self) -> Option<&KdTree> {
        match &self.body {
            GermBody::Cone(base) => Some(self.cache.tree.get_or_init(|| base.tree())),
            GermBody::Cloud(_) => {
                Some(self.cache.tree.get_or_init(|| {
                    let pts: Vec<&Vec<f64>> = self.cloud_points().collect();
                    KdTree::build(self.ambient_dim, &pts)
                }))
            }
            _ => None,
        }
    }
}
