//! Named test germs and maps used by the experiments, as serializable specs.

use germlab::germs::io::{GermSpec, InequalitySpec};
use germlab::germs::{Monomial, Sign};
use germlab::GermMap;
use serde::{Deserialize, Serialize};

fn mono(coeff: f64, exps: &[u32]) -> Monomial {
    Monomial { coeff, exps: exps.to_vec() }
}

fn poly(terms: &[(f64, &[u32])]) -> Vec<Monomial> {
    terms.iter().map(|(c, e)| mono(*c, e)).collect()
}

fn coordinate_sign(dim: usize, axis: usize, sign: Sign) -> InequalitySpec {
    let mut e = vec![0; dim];
    e[axis] = 1;
    InequalitySpec { poly: vec![mono(1.0, &e)], sign }
}

fn labelled(label: &str) -> Option<String> {
    Some(label.to_string())
}

/// Ray in the plane at `angle` radians from the positive x-axis.
pub fn ray2(angle: f64, label: &str) -> GermSpec {
    GermSpec::Cone { ambient_dim: 2, base: vec![vec![angle.cos(), angle.sin()]], label: labelled(label) }
}

pub fn cone3(base: Vec<Vec<f64>>, label: &str) -> GermSpec {
    GermSpec::Cone { ambient_dim: 3, base, label: labelled(label) }
}

pub fn z_ray() -> GermSpec {
    cone3(vec![vec![0.0, 0.0, 1.0]], "z-ray")
}

pub fn z_axis() -> GermSpec {
    cone3(vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, -1.0]], "z-axis")
}

pub fn xy_plane() -> GermSpec {
    GermSpec::Semialgebraic { ambient_dim: 3, equations: vec![poly(&[(1.0, &[0, 0, 1])])], inequalities: vec![], label: labelled("xy-plane") }
}

/// `{z = 0, x > 0}` or `{z = 0, x < 0}`.
pub fn half_plane(sign: Sign) -> GermSpec {
    let label = if sign == Sign::Positive { "half-plane x>0" } else { "half-plane x<0" };
    GermSpec::Semialgebraic {
        ambient_dim: 3,
        equations: vec![poly(&[(1.0, &[0, 0, 1])])],
        inequalities: vec![coordinate_sign(3, 0, sign)],
        label: labelled(label),
    }
}

/// `t -> (t, t^2)`.
pub fn parabola() -> GermSpec {
    GermSpec::Arc { coords: vec!["t".into(), "(pow t 2)".into()], t_max: 1.0, label: labelled("parabola") }
}

/// `t -> (t^2, t^3)`.
pub fn cusp_arc() -> GermSpec {
    GermSpec::Arc { coords: vec!["(pow t 2)".into(), "(pow t 3)".into()], t_max: 1.0, label: labelled("cusp arc") }
}

/// Image of the flat curve `Y = exp(-1/X^2)` under the blow-down `(X, Y) -> (XY, Y)`:
/// tangent to the y-axis but outside every sea-tangle neighbourhood of it.
pub fn flat_arc() -> GermSpec {
    GermSpec::Arc {
        coords: vec!["(* t (exp (- (/ 1 (pow t 2)))))".into(), "(exp (- (/ 1 (pow t 2))))".into()],
        t_max: 0.7,
        label: labelled("flat arc"),
    }
}

/// `V = {x^2 + y^2 = z^6}`.
pub fn v_cusp() -> GermSpec {
    GermSpec::Semialgebraic {
        ambient_dim: 3,
        equations: vec![poly(&[(1.0, &[2, 0, 0]), (1.0, &[0, 2, 0]), (-1.0, &[0, 0, 6])])],
        inequalities: vec![],
        label: labelled("V"),
    }
}

/// `W = {x^2 + y^2 = z^2}`.
pub fn w_cone() -> GermSpec {
    GermSpec::Semialgebraic {
        ambient_dim: 3,
        equations: vec![poly(&[(1.0, &[2, 0, 0]), (1.0, &[0, 2, 0]), (-1.0, &[0, 0, 2])])],
        inequalities: vec![],
        label: labelled("W"),
    }
}

/// `W ∩ {x > 0}`.
pub fn w_half() -> GermSpec {
    GermSpec::Semialgebraic {
        ambient_dim: 3,
        equations: vec![poly(&[(1.0, &[2, 0, 0]), (1.0, &[0, 2, 0]), (-1.0, &[0, 0, 2])])],
        inequalities: vec![coordinate_sign(3, 0, Sign::Positive)],
        label: labelled("W x>0"),
    }
}

/// `{x^2 + y^2 = z^2 + z^3}`: meets `W` only at the origin but shares its directions.
pub fn w_perturbed() -> GermSpec {
    GermSpec::Semialgebraic {
        ambient_dim: 3,
        equations: vec![poly(&[(1.0, &[2, 0, 0]), (1.0, &[0, 2, 0]), (-1.0, &[0, 0, 2]), (-1.0, &[0, 0, 3])])],
        inequalities: vec![],
        label: labelled("W'"),
    }
}

/// `{z^3 = x^2 + y^2}`.
pub fn cusp_surface() -> GermSpec {
    GermSpec::Semialgebraic {
        ambient_dim: 3,
        equations: vec![poly(&[(1.0, &[0, 0, 3]), (-1.0, &[2, 0, 0]), (-1.0, &[0, 2, 0])])],
        inequalities: vec![],
        label: labelled("cusp surface"),
    }
}

/// Octant signs of the pieces `S_1..S_4` of `f_0 = 0`.
pub const OKA_S_OCTANTS: [[i8; 3]; 4] = [[1, 1, -1], [1, -1, 1], [-1, 1, 1], [-1, -1, -1]];
/// Sign regions of the pieces `P_1..P_4` of `f_t = 0`, `t != 0` (0 = unconstrained).
pub const OKA_P_REGIONS: [[i8; 3]; 4] = [[1, 1, -1], [1, -1, 1], [-1, 0, 1], [-1, 0, -1]];

/// `f_t = x^8 + y^16 + z^16 + t x^5 z^2 + x^3 y z^3 = 0` inside a sign region.
pub fn oka(t: f64, signs: [i8; 3], label: &str) -> GermSpec {
    let mut terms: Vec<(f64, &[u32])> = vec![(1.0, &[8, 0, 0]), (1.0, &[0, 16, 0]), (1.0, &[0, 0, 16]), (1.0, &[3, 1, 3])];
    if t != 0.0 {
        terms.push((t, &[5, 0, 2]));
    }
    let inequalities = signs
        .iter()
        .enumerate()
        .filter(|(_, &s)| s != 0)
        .map(|(i, &s)| coordinate_sign(3, i, if s > 0 { Sign::Positive } else { Sign::Negative }))
        .collect();
    GermSpec::Semialgebraic { ambient_dim: 3, equations: vec![poly(&terms)], inequalities, label: labelled(label) }
}

/// A test germ together with its dimension as a set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteGerm {
    pub spec: GermSpec,
    pub dim: i32,
}

/// Subanalytic germs shared by the property suites.
pub fn suite() -> Vec<SuiteGerm> {
    vec![
        SuiteGerm { spec: ray2(0.0, "x-ray"), dim: 1 },
        SuiteGerm { spec: parabola(), dim: 1 },
        SuiteGerm { spec: cusp_arc(), dim: 1 },
        SuiteGerm { spec: v_cusp(), dim: 2 },
        SuiteGerm { spec: w_cone(), dim: 2 },
        SuiteGerm { spec: cusp_surface(), dim: 2 },
        SuiteGerm { spec: half_plane(Sign::Positive), dim: 2 },
    ]
}

pub fn scaling2(s: f64) -> GermMap {
    GermMap::linear(vec![vec![s, 0.0], vec![0.0, s]]).expect("invertible")
}

pub fn shear2() -> GermMap {
    GermMap::linear(vec![vec![1.0, 0.5], vec![0.0, 1.0]]).expect("invertible")
}

pub fn linear3() -> GermMap {
    GermMap::linear(vec![vec![1.0, 0.3, 0.0], vec![0.0, 2.0, 0.2], vec![0.1, 0.0, 0.5]]).expect("invertible")
}
