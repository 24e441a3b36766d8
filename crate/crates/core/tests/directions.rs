use germlab::directions::{
    directional_dimension, estimate_dimension, estimate_direction_set, hausdorff_sphere, intersect_direction_sets, tangent_cone, DirectionalParams, DEFAULT_CAPS,
    DEFAULT_STABILITY_TOL,
};
use germlab::germs::{sample_germ, Expr, Polynomial, Sign};
use germlab::maps::pushforward;
use germlab::rng::{substream, unit_vector};
use germlab::vecops::{angle_between, normalize};
use germlab::{GermMap, ScaleSchedule, SetGerm, SphericalCloud};
use proptest::prelude::*;

const TOL: f64 = DEFAULT_STABILITY_TOL;

fn cone(dim: usize, base: Vec<Vec<f64>>) -> SetGerm {
    SetGerm::cone_over(SphericalCloud::new(dim, base, "test").unwrap()).unwrap()
}

fn ray2(angle: f64) -> SetGerm {
    cone(2, vec![vec![angle.cos(), angle.sin()]])
}

fn coordinate_sign(i: usize, s: i8) -> (Polynomial, Sign) {
    let mut e = [0u32; 3];
    e[i] = 1;
    (Polynomial::from_terms(3, &[(1.0, &e)]).unwrap(), if s > 0 { Sign::Positive } else { Sign::Negative })
}

/// `x^8 + y^16 + z^16 + x^3 y z^3 = 0` inside the octant with the given signs.
fn oka_piece(signs: [i8; 3]) -> SetGerm {
    let f = Polynomial::from_terms(3, &[(1.0, &[8, 0, 0]), (1.0, &[0, 16, 0]), (1.0, &[0, 0, 16]), (1.0, &[3, 1, 3])]).unwrap();
    SetGerm::semialgebraic(3, vec![f], (0..3).map(|i| coordinate_sign(i, signs[i])).collect()).unwrap()
}

/// `x^2 + y^2 = z^6`.
fn v_cusp() -> SetGerm {
    let f = Polynomial::from_terms(3, &[(1.0, &[2, 0, 0]), (1.0, &[0, 2, 0]), (-1.0, &[0, 0, 6])]).unwrap();
    SetGerm::semialgebraic(3, vec![f], vec![]).unwrap()
}

fn great_circle(n: usize) -> SphericalCloud {
    let v = (0..n).map(|i| {
        let a = std::f64::consts::TAU * i as f64 / n as f64;
        vec![a.cos(), a.sin(), 0.0]
    });
    SphericalCloud::new(3, v.collect(), "circle").unwrap()
}

fn nearest(cloud: &SphericalCloud, u: &[f64]) -> f64 {
    cloud.vectors().iter().map(|v| angle_between(u, v)).fold(f64::INFINITY, f64::min)
}

#[test]
fn ray_has_a_single_direction() {
    let est = estimate_direction_set(&ray2(0.0), &ScaleSchedule::default(), 500, TOL, 1).unwrap();
    assert!(!est.stable.is_empty());
    for v in est.stable.vectors() {
        assert!(angle_between(v, &[1.0, 0.0]) < 1e-12, "{v:?}");
    }
}

#[test]
fn spiral_image_of_a_ray_fills_the_circle() {
    let sched = ScaleSchedule::default();
    let cloud = pushforward(&GermMap::Spiral, &sample_germ(&ray2(0.0), &sched, 2000, 2).unwrap()).unwrap();
    let est = germlab::directions::directions_for(&cloud, &DirectionalParams::default(), 0).unwrap();
    for i in 0..3600 {
        let a = std::f64::consts::TAU * i as f64 / 3600.0;
        let gap = nearest(&est.stable, &[a.cos(), a.sin()]);
        assert!(gap <= TOL, "no direction within {TOL} of angle {a}: {gap}");
    }
}

#[test]
fn v_cusp_directions_are_the_poles() {
    let sched = ScaleSchedule::default();
    let est = estimate_direction_set(&v_cusp(), &sched, 1000, TOL, 3).unwrap();
    // on z = ±s the circle of radius s^3 sits at angle atan(s^2) from ±e_z
    let s = sched.radius(sched.count - 10);
    let oracle = [vec![s * s, 0.0, 1.0], vec![s * s, 0.0, -1.0]].map(|v| normalize(&v).unwrap());
    let poles = SphericalCloud::new(3, vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, -1.0]], "poles").unwrap();
    for v in est.stable.vectors() {
        assert!(nearest(&poles, v) <= TOL, "{v:?}");
    }
    for u in &oracle {
        assert!(nearest(&est.stable, u) <= TOL, "{u:?} not covered");
    }
}

#[test]
fn parabola_tangent_cone_is_the_positive_x_axis() {
    let arc = SetGerm::arc(vec!["t".parse::<Expr>().unwrap(), "(pow t 2)".parse().unwrap()], 1.0).unwrap();
    let sched = ScaleSchedule::default();
    let cone = tangent_cone(&arc, &sched, 500, TOL, 4).unwrap();
    // (t, t^2)/|(t, t^2)| is at angle atan(t) from e_1; the pooled window ends at t ~ 0.025
    let t = sched.radius(sched.count - 10);
    for p in sample_germ(&cone, &sched, 50, 5).unwrap().cloud_points() {
        assert!(angle_between(&normalize(p).unwrap(), &[1.0, 0.0]) <= t.atan() + 1e-12, "{p:?}");
    }
}

#[test]
fn dimension_of_synthetic_clouds() {
    let caps = DEFAULT_CAPS;
    assert_eq!(estimate_dimension(&SphericalCloud::empty(3, ""), &caps).unwrap().dim, -1);
    assert_eq!(estimate_dimension(&SphericalCloud::new(3, vec![vec![0.0, 0.0, 1.0]], "").unwrap(), &caps).unwrap().dim, 0);
    let finite = SphericalCloud::new(3, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, -1.0]], "").unwrap();
    assert_eq!(estimate_dimension(&finite, &caps).unwrap().dim, 0);
    assert_eq!(estimate_dimension(&great_circle(2000), &caps).unwrap().dim, 1);

    let mut rng = substream(6, &[]);
    let sphere = SphericalCloud::new(3, (0..10_000).map(|_| unit_vector(&mut rng, 3)).collect(), "S2").unwrap();
    let rep = estimate_dimension(&sphere, &caps).unwrap();
    assert_eq!(rep.dim, 2);
    assert!((1.75..=2.25).contains(&rep.slope), "{}", rep.slope);
}

#[test]
fn intersection_examples() {
    let north = SphericalCloud::new(3, vec![vec![0.0, 0.0, 1.0]], "").unwrap();
    let south = SphericalCloud::new(3, vec![vec![0.0, 0.0, -1.0]], "").unwrap();
    assert!(intersect_direction_sets(&north, &south, 3.0).unwrap().is_empty());

    let circle = great_circle(500);
    let both = intersect_direction_sets(&circle, &circle, 0.05).unwrap();
    for v in circle.vectors() {
        assert!(nearest(&both, v) <= 0.05, "{v:?}");
    }
}

#[test]
fn perpendicular_rays_have_empty_intersection() {
    let dp = DirectionalParams { per_scale: 200, ..Default::default() };
    assert_eq!(directional_dimension(&ray2(0.0), &ray2(std::f64::consts::FRAC_PI_2), &dp).unwrap(), -1);
    assert_eq!(directional_dimension(&ray2(0.3), &ray2(0.3), &dp).unwrap(), 0);
}

#[test]
fn hausdorff_examples() {
    let circle = great_circle(100);
    assert_eq!(hausdorff_sphere(&circle, &circle).unwrap(), 0.0);
    let north = SphericalCloud::new(3, vec![vec![0.0, 0.0, 1.0]], "").unwrap();
    let south = SphericalCloud::new(3, vec![vec![0.0, 0.0, -1.0]], "").unwrap();
    assert!((hausdorff_sphere(&north, &south).unwrap() - std::f64::consts::PI).abs() < 1e-12);
    let e1 = SphericalCloud::new(2, vec![vec![1.0, 0.0]], "").unwrap();
    let turned = SphericalCloud::new(2, vec![vec![0.3f64.cos(), 0.3f64.sin()]], "").unwrap();
    assert!((hausdorff_sphere(&e1, &turned).unwrap() - 0.3).abs() < 1e-12);
    assert!(hausdorff_sphere(&e1, &SphericalCloud::empty(2, "")).is_err());
}

#[test]
fn per_scale_clouds_approach_the_stable_set() {
    let arc = SetGerm::arc(vec!["t".parse::<Expr>().unwrap(), "(pow t 2)".parse().unwrap()], 1.0).unwrap();
    for g in [arc, v_cusp(), ray2(1.0)] {
        let est = estimate_direction_set(&g, &ScaleSchedule::default(), 500, TOL, 7).unwrap();
        let h: Vec<f64> = est.per_scale.iter().map(|c| hausdorff_sphere(&est.stable, c).unwrap()).collect();
        for k in 0..h.len() {
            for j in k + 1..h.len() {
                assert!(h[j] <= h[k] + 2.0 * TOL, "{h:?}");
            }
        }
    }
}

#[test]
fn cones_recover_their_base() {
    let base = vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.6, 0.8], vec![0.0, 0.0, -1.0], vec![-0.6, 0.0, 0.8]];
    let four = SphericalCloud::new(3, base, "four").unwrap();
    for b in [four, great_circle(720)] {
        let est = estimate_direction_set(&SetGerm::cone_over(b.clone()).unwrap(), &ScaleSchedule::default(), 2000, TOL, 8).unwrap();
        let h = hausdorff_sphere(&est.stable, &b).unwrap();
        assert!(h <= TOL, "{} : {h}", b.provenance());
    }
}

#[test]
fn oka_pieces_meet_on_a_deep_schedule() {
    // S_1 and S_2 approach e_1 from opposite sides at angle ~ 1.3 r^(1/4);
    // the pooled window must reach r ~ 1e-7 before the clouds come within 0.05
    let dp = DirectionalParams { schedule: ScaleSchedule::new(0.1, 0.5, 28).unwrap(), ..Default::default() };
    assert_eq!(directional_dimension(&oka_piece([1, 1, -1]), &oka_piece([1, -1, 1]), &dp).unwrap(), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn stable_vectors_are_unit_and_near_every_scale(angle in 0.0f64..std::f64::consts::TAU, seed in any::<u64>()) {
        let est = estimate_direction_set(&ray2(angle), &ScaleSchedule::default(), 50, TOL, seed).unwrap();
        for v in est.stable.vectors() {
            prop_assert!((v[0].hypot(v[1]) - 1.0).abs() <= 1e-12);
            for c in &est.per_scale {
                prop_assert!(nearest(c, v) <= TOL);
            }
        }
    }

    #[test]
    fn dimension_is_minus_one_only_for_empty(n in 0usize..50, seed in any::<u64>()) {
        let mut rng = substream(seed, &[]);
        let cloud = SphericalCloud::new(3, (0..n).map(|_| unit_vector(&mut rng, 3)).collect(), "").unwrap();
        let dim = estimate_dimension(&cloud, &DEFAULT_CAPS).unwrap().dim;
        prop_assert_eq!(dim == -1, n == 0);
    }
}
