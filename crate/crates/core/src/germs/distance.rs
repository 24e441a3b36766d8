use std::sync::Arc;

use rand::Rng;

use super::newton;
use super::sample::{sample_annulus, SamplerConfig};
use super::{ArcParam, GermBody, Semialgebraic, SetGerm};
use crate::error::{invalid, Error, Result};
use crate::kdtree::KdTree;
use crate::rng::{self, domain};
use crate::vecops;

/// Fixed seed for the reference samples used to start distance descents;
/// distances therefore depend only on (germ, x, tol).
const REFERENCE_SEED: u64 = 0x5EED_0F0C_7A5E;
const REFERENCE_PER_OCTAVE: usize = 256;
const RESTARTS: usize = 16;
const DESCENT_ITERS: usize = 80;

/// Upper-bound estimate of `dist(x, germ)`, accurate to about `tol` on the supported bodies.
pub fn distance_to_germ(germ: &SetGerm, x: &[f64], tol: f64) -> Result<f64> {
    closest_point(germ, x, tol).map(|(_, d)| d)
}

/// A point of the germ's closure near `x` together with its distance.
pub fn closest_point(germ: &SetGerm, x: &[f64], tol: f64) -> Result<(Vec<f64>, f64)> {
    search(germ, x, tol, None)
}

/// Distance estimate that may stop early once it is known to be `<= radius`.
/// Returns the estimate and whether it is within `radius`.
pub(crate) fn distance_within(germ: &SetGerm, x: &[f64], radius: f64, tol: f64) -> Result<(f64, bool)> {
    let (_, d) = search(germ, x, tol, Some(radius))?;
    Ok((d, d <= radius))
}

fn search(germ: &SetGerm, x: &[f64], tol: f64, stop_below: Option<f64>) -> Result<(Vec<f64>, f64)> {
    if x.len() != germ.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: germ.ambient_dim(), got: x.len() });
    }
    if !(tol > 0.0) {
        return Err(invalid("distance tolerance must be positive"));
    }
    let xn = vecops::norm(x);
    if xn == 0.0 {
        return Ok((x.to_vec(), 0.0));
    }
    match germ.body() {
        GermBody::Cone(base) => {
            let tree = germ.point_tree().expect("cone has a tree");
            let u = vecops::scale(x, 1.0 / xn);
            let (i, c) = tree.nearest(&u).ok_or(Error::EmptyBase)?;
            let theta = vecops::chord_to_angle(c);
            if theta >= std::f64::consts::FRAC_PI_2 {
                Ok((vec![0.0; x.len()], xn))
            } else {
                Ok((vecops::scale(&base.vectors()[i], xn * theta.cos()), xn * theta.sin()))
            }
        }
        GermBody::Cloud(_) => {
            let tree = germ.point_tree().expect("cloud has a tree");
            let (i, d) = tree.nearest(x).ok_or_else(|| Error::Unsupported("distance to an empty cloud".into()))?;
            Ok((tree.point(i).to_vec(), d))
        }
        GermBody::Arc(a) => Ok(arc_closest(germ, a, x, tol)),
        GermBody::Semialgebraic(s) => semialgebraic_closest(germ, s, x, tol, stop_below),
    }
}

/// Dense parameter grid of an arc with a kd-tree over its points.
pub(crate) struct ArcGrid {
    pub(crate) ts: Vec<f64>,
    pub(crate) norms: Vec<f64>,
    tree: KdTree,
}

impl SetGerm {
    pub(crate) fn arc_grid(&self, a: &ArcParam) -> &ArcGrid {
        self.cache.arc_grid.get_or_init(|| {
            let geo = 4000;
            let lin = 1000;
            let (lo, hi) = (a.t_min().ln(), a.t_max.ln());
            let mut ts: Vec<f64> = (0..geo).map(|i| (lo + (hi - lo) * i as f64 / (geo - 1) as f64).exp()).collect();
            ts.extend((1..=lin).map(|i| a.t_max * i as f64 / lin as f64));
            ts.sort_by(f64::total_cmp);
            ts.dedup();
            let mut keep_t = Vec::with_capacity(ts.len());
            let mut pts = Vec::with_capacity(ts.len());
            for t in ts {
                let p = a.eval(t);
                if p.iter().all(|v| v.is_finite()) {
                    keep_t.push(t);
                    pts.push(p);
                }
            }
            let norms = pts.iter().map(|p| vecops::norm(p)).collect();
            let tree = KdTree::build(a.coords.len(), &pts);
            ArcGrid { ts: keep_t, norms, tree }
        })
    }
}

fn arc_closest(germ: &SetGerm, a: &ArcParam, x: &[f64], tol: f64) -> (Vec<f64>, f64) {
    let grid = germ.arc_grid(a);
    let mut best = (vec![0.0; x.len()], vecops::norm(x));
    let g = |t: f64| vecops::dist(x, &a.eval(t));
    for (i, _) in grid.tree.k_nearest(x, 4) {
        let lo = grid.ts[i.saturating_sub(1)];
        let hi = grid.ts[(i + 1).min(grid.ts.len() - 1)];
        let t = golden_section(&g, lo, hi, tol);
        let d = g(t);
        if d < best.1 {
            best = (a.eval(t), d);
        }
    }
    best
}

/// Minimizer of a unimodal `g` on `[a, b]`.
fn golden_section(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..200 {
        if (b - a) <= 1e-15 * b.abs() || ((gc - gd).abs() < 0.25 * tol && (b - a) <= 1e-9 * b.abs()) {
            break;
        }
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
    }
    let m = 0.5 * (a + b);
    [(a, g(a)), (m, g(m)), (b, g(b)), (c, gc), (d, gd)].into_iter().min_by(|p, q| p.1.total_cmp(&q.1)).unwrap().0
}

/// Reference samples of a semialgebraic germ in the shell `2^-(j+1) < |x| <= 2^-j`.
pub(crate) struct Octave {
    points: Vec<Vec<f64>>,
    tree: KdTree,
}

fn octave_index(r: f64) -> i32 {
    (-r.log2()).floor() as i32
}

impl SetGerm {
    fn octave(&self, j: i32) -> Arc<Octave> {
        if let Some(o) = self.cache.octaves.lock().expect("octave cache poisoned").get(&j) {
            return o.clone();
        }
        let outer = 2f64.powi(-j);
        let inner = outer / 2.0;
        let mut rng = rng::substream(REFERENCE_SEED, &[domain::REFERENCE, j as i64 as u64]);
        let points = sample_annulus(self, inner, outer, REFERENCE_PER_OCTAVE, &mut rng, &SamplerConfig::default()).unwrap_or_default();
        let tree = KdTree::build(self.ambient_dim(), &points);
        let built = Arc::new(Octave { points, tree });
        self.cache.octaves.lock().expect("octave cache poisoned").entry(j).or_insert(built).clone()
    }
}

fn affine_projection(s: &Semialgebraic, x: &[f64]) -> Option<Vec<f64>> {
    if !s.inequalities.is_empty() || !s.equations.iter().all(|p| p.is_affine()) {
        return None;
    }
    let (vals, jac) = newton::values_and_jacobian(&s.equations, x);
    newton::least_norm_solve(&jac, &vals).map(|c| vecops::sub(x, &c))
}

fn feasible_projection(s: &Semialgebraic, p: &[f64]) -> Option<Vec<f64>> {
    let q = newton::project(&s.equations, p, 50)?;
    (s.inequalities_hold(&q) && vecops::norm(&q) > 0.0).then_some(q)
}

fn semialgebraic_closest(germ: &SetGerm, s: &Semialgebraic, x: &[f64], tol: f64, stop_below: Option<f64>) -> Result<(Vec<f64>, f64)> {
    let xn = vecops::norm(x);
    if s.equations.is_empty() && s.inequalities.is_empty() {
        return Ok((x.to_vec(), 0.0));
    }
    if s.contains(x) {
        return Ok((x.to_vec(), 0.0));
    }
    if let Some(y) = affine_projection(s, x) {
        let d = vecops::dist(x, &y);
        return Ok((y, d));
    }
    // origin is always in the closure
    let mut best = (vec![0.0; x.len()], xn);
    let done = |d: f64| stop_below.is_some_and(|r| d <= r);

    let mut seeds: Vec<(f64, Vec<f64>)> = Vec::new();
    let (j_lo, j_hi) = (octave_index(2.0 * xn), octave_index(xn / 8.0));
    for j in j_lo..=j_hi {
        let oct = germ.octave(j);
        for (i, d) in oct.tree.k_nearest(x, 4) {
            seeds.push((d, oct.points[i].clone()));
        }
    }
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
    seeds.truncate(RESTARTS / 2);

    let keys: Vec<u64> = std::iter::once(domain::RESTART).chain(x.iter().map(|v| v.to_bits())).collect();
    let mut rng = rng::substream(REFERENCE_SEED, &keys);
    let mut random_starts = 0;
    let mut seed_iter = seeds.into_iter().map(|(_, p)| p);
    let mut tries = 0;
    while tries < 4 * RESTARTS {
        tries += 1;
        let start = match seed_iter.next() {
            Some(p) => p,
            None => {
                if random_starts >= RESTARTS / 2 {
                    break;
                }
                random_starts += 1;
                let spread = 0.5 * best.1.max(1e-300) + tol * rng.random::<f64>();
                let off = rng::in_ball(&mut rng, x.len(), spread);
                match feasible_projection(s, &vecops::add(x, &off)) {
                    Some(p) => p,
                    None => continue,
                }
            }
        };
        let (y, d) = descend(s, x, start, tol, stop_below);
        if d < best.1 {
            best = (y, d);
        }
        if done(best.1) {
            break;
        }
    }
    Ok(best)
}

/// Tangential descent of `|x - y|` over the feasible zero set, with step halving.
fn descend(s: &Semialgebraic, x: &[f64], start: Vec<f64>, tol: f64, stop_below: Option<f64>) -> (Vec<f64>, f64) {
    let mut y = start;
    let mut d = vecops::dist(x, &y);
    let mut step = 1.0;
    let xn = vecops::norm(x);
    for _ in 0..DESCENT_ITERS {
        // creeping into the origin: nothing better than the origin itself
        if vecops::norm(&y) < 0.05 * xn {
            break;
        }
        if stop_below.is_some_and(|r| d <= r) {
            break;
        }
        // Newton on the optimality system converges quadratically near a foot point
        if let Some(c) = newton::closest_point_step(&s.equations, x, &y).and_then(|c| feasible_projection(s, &c)) {
            let dc = vecops::dist(x, &c);
            let moved = vecops::dist(&c, &y);
            if dc < d {
                y = c;
                d = dc;
                if moved < 0.25 * tol {
                    break;
                }
                continue;
            }
            if moved < 0.25 * tol {
                break;
            }
        }
        let r = vecops::sub(x, &y);
        let (_, jac) = newton::values_and_jacobian(&s.equations, &y);
        let t = newton::tangential(&jac, &r);
        let tn = vecops::norm(&t);
        if step * tn < 0.25 * tol {
            break;
        }
        // compare the full step with a half step: on curved zero sets the full
        // tangential step tends to overshoot by a factor ~2 and oscillate
        let mut best: Option<(Vec<f64>, f64, f64)> = None;
        for h in [step, 0.5 * step] {
            if let Some(c) = feasible_projection(s, &vecops::axpy(&y, h, &t)) {
                let dc = vecops::dist(x, &c);
                if dc < d && best.as_ref().is_none_or(|b| dc < b.1) {
                    best = Some((c, dc, h));
                }
            }
        }
        match best {
            Some((c, dc, h)) => {
                y = c;
                d = dc;
                step = (2.0 * h).min(1.0);
            }
            None => step *= 0.25,
        }
    }
    (y, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::germs::{Expr, Polynomial};
    use crate::sphere::SphericalCloud;

    #[test]
    fn cone_distances() {
        let ray = SetGerm::cone_over(SphericalCloud::new(3, vec![vec![0.0, 0.0, 1.0]], "").unwrap()).unwrap();
        assert_eq!(distance_to_germ(&ray, &[0.0, 0.0, 2.0], 1e-9).unwrap(), 0.0);
        assert!((distance_to_germ(&ray, &[1.0, 0.0, 0.0], 1e-9).unwrap() - 1.0).abs() < 1e-15);
        assert!((distance_to_germ(&ray, &[0.0, 0.0, -3.0], 1e-9).unwrap() - 3.0).abs() < 1e-15);
        let axis = SetGerm::cone_over(SphericalCloud::new(2, vec![vec![0.0, 1.0], vec![0.0, -1.0]], "").unwrap()).unwrap();
        assert!((distance_to_germ(&axis, &[3.0, 0.0], 1e-9).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn plane_uses_exact_projection() {
        let plane = SetGerm::semialgebraic(3, vec![Polynomial::from_terms(3, &[(2.0, &[0, 0, 1])]).unwrap()], vec![]).unwrap();
        let d = distance_to_germ(&plane, &[0.3, 0.1, -0.02], 1e-12).unwrap();
        assert!((d - 0.02).abs() < 1e-15);
    }

    #[test]
    fn circle_cone_distance() {
        // W = {x^2 + y^2 = z^2}; distance from (r, 0, 0) is r / sqrt(2)
        let w = SetGerm::semialgebraic(
            3,
            vec![Polynomial::from_terms(3, &[(1.0, &[2, 0, 0]), (1.0, &[0, 2, 0]), (-1.0, &[0, 0, 2])]).unwrap()],
            vec![],
        )
        .unwrap();
        for r in [1e-2, 1e-4] {
            let d = distance_to_germ(&w, &[r, 0.0, 0.0], 1e-9 * r).unwrap();
            assert!((d - r / 2f64.sqrt()).abs() < 1e-6 * r, "{d} at {r}");
        }
    }

    #[test]
    fn tiny_points_are_not_on_the_set() {
        // at |x| = 1e-5 every residual is below any absolute bound
        let cusp = SetGerm::semialgebraic(
            3,
            vec![Polynomial::from_terms(3, &[(1.0, &[0, 0, 3]), (-1.0, &[2, 0, 0]), (-1.0, &[0, 2, 0])]).unwrap()],
            vec![],
        )
        .unwrap();
        let d = distance_to_germ(&cusp, &[1e-5, 0.0, 0.0], 1e-12).unwrap();
        assert!(d > 0.5e-5, "{d}");
    }

    #[test]
    fn arc_distance_against_grid() {
        let arc = SetGerm::arc(vec![Expr::T, "(pow t 2)".parse().unwrap()], 2.0).unwrap();
        let d = distance_to_germ(&arc, &[0.5, -0.1], 1e-10).unwrap();
        let brute = (1..=200_000).map(|i| {
            let t = 2.0 * i as f64 / 200_000.0;
            ((0.5 - t).powi(2) + (-0.1 - t * t).powi(2)).sqrt()
        }).fold(f64::INFINITY, f64::min);
        assert!(d <= brute + 1e-9 && d >= brute - 1e-5, "{d} vs {brute}");
    }
}
