use germlab::germs::{distance_to_germ, sample_germ, Expr, GermBody, Polynomial, Sign, RESIDUAL_REL};
use germlab::rng::{in_ball, substream};
use germlab::vecops::{dist, norm};
use germlab::{ScaleSchedule, SetGerm, SphericalCloud};
use proptest::prelude::*;

fn cone(dim: usize, base: Vec<Vec<f64>>) -> SetGerm {
    SetGerm::cone_over(SphericalCloud::new(dim, base, "test").unwrap()).unwrap()
}

fn parabola(t_max: f64) -> SetGerm {
    SetGerm::arc(vec!["t".parse::<Expr>().unwrap(), "(pow t 2)".parse().unwrap()], t_max).unwrap()
}

fn coordinate(i: usize) -> Polynomial {
    let mut e = [0u32; 3];
    e[i] = 1;
    Polynomial::from_terms(3, &[(1.0, &e)]).unwrap()
}

/// `x^8 + y^16 + z^16 + x^3 y z^3 = 0` on the octant `x > 0, y > 0, z < 0`.
fn oka_octant() -> SetGerm {
    let f = Polynomial::from_terms(3, &[(1.0, &[8, 0, 0]), (1.0, &[0, 16, 0]), (1.0, &[0, 0, 16]), (1.0, &[3, 1, 3])]).unwrap();
    SetGerm::semialgebraic(3, vec![f], vec![(coordinate(0), Sign::Positive), (coordinate(1), Sign::Positive), (coordinate(2), Sign::Negative)]).unwrap()
}

/// `x^2 + y^2 = z^2`.
fn double_cone() -> SetGerm {
    let f = Polynomial::from_terms(3, &[(1.0, &[2, 0, 0]), (1.0, &[0, 2, 0]), (-1.0, &[0, 0, 2])]).unwrap();
    SetGerm::semialgebraic(3, vec![f], vec![]).unwrap()
}

#[test]
fn sampling_is_independent_of_worker_count() {
    let sched = ScaleSchedule::default();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| sample_germ(&double_cone(), &sched, 200, 17).unwrap())
    };
    let one = run(1);
    assert_eq!(one.annuli(), run(4).annuli());
    assert_ne!(one.annuli(), sample_germ(&double_cone(), &sched, 200, 18).unwrap().annuli());
}

#[test]
fn annuli_respect_their_radii() {
    let sched = ScaleSchedule::default();
    for g in [double_cone(), parabola(1.0), cone(2, vec![vec![0.6, 0.8]])] {
        let cloud = sample_germ(&g, &sched, 100, 1).unwrap();
        assert_eq!(cloud.annuli().len(), sched.count);
        for an in cloud.annuli() {
            assert!(!an.points.is_empty());
            assert!(an.points.len() <= 100);
            for p in &an.points {
                assert!(an.contains_radius(norm(p)), "{p:?} outside ({}, {}]", an.inner_radius, an.outer_radius);
            }
        }
    }
}

#[test]
fn ray_samples_lie_on_the_ray() {
    let cloud = sample_germ(&cone(3, vec![vec![0.0, 0.0, 1.0]]), &ScaleSchedule::default(), 50, 2).unwrap();
    for p in cloud.cloud_points() {
        assert!(p[0] == 0.0 && p[1] == 0.0 && p[2] > 0.0, "{p:?}");
    }
}

#[test]
fn parabola_samples_satisfy_the_equation() {
    let sched = ScaleSchedule::new(0.1, 0.5, 4).unwrap();
    let cloud = sample_germ(&parabola(1.0), &sched, 500, 3).unwrap();
    for p in cloud.cloud_points() {
        assert!((p[1] - p[0] * p[0]).abs() <= f64::EPSILON * p[0] * p[0], "{p:?}");
    }
}

#[test]
fn oka_octant_is_nonempty_at_every_scale() {
    let germ = oka_octant();
    let GermBody::Semialgebraic(s) = germ.body() else { unreachable!() };
    let cloud = sample_germ(&germ, &ScaleSchedule::default(), 200, 5).unwrap();
    for an in cloud.annuli() {
        assert!(!an.points.is_empty(), "annulus {} empty", an.scale_index);
        for p in &an.points {
            assert!(s.residual(p) <= RESIDUAL_REL * (1.0 + norm(p)), "{p:?}");
            assert!(s.inequalities_hold(p), "{p:?}");
        }
    }
}

#[test]
fn sampled_points_are_at_distance_zero() {
    let sched = ScaleSchedule::default();
    let tol = 1e-9;
    for g in [double_cone(), parabola(1.0), cone(3, vec![vec![0.0, 0.6, 0.8]])] {
        for p in sample_germ(&g, &sched, 50, 6).unwrap().cloud_points() {
            let d = distance_to_germ(&g, p, tol * norm(p)).unwrap();
            assert!(d <= RESIDUAL_REL * (1.0 + norm(p)) + tol * norm(p), "{p:?}: {d}");
        }
    }
}

#[test]
fn cone_distance_examples() {
    let z = cone(3, vec![vec![0.0, 0.0, 1.0]]);
    assert_eq!(distance_to_germ(&z, &[0.0, 0.0, 2.0], 1e-12).unwrap(), 0.0);
    assert!((distance_to_germ(&z, &[1.0, 0.0, 0.0], 1e-12).unwrap() - 1.0).abs() < 1e-15);
    let ray = cone(2, vec![vec![1.0, 0.0]]);
    assert_eq!(distance_to_germ(&ray, &[2.0, 0.0], 1e-12).unwrap(), 0.0);
    let axis = cone(2, vec![vec![0.0, 1.0], vec![0.0, -1.0]]);
    assert!((distance_to_germ(&axis, &[3.0, 0.0], 1e-12).unwrap() - 3.0).abs() < 1e-15);
}

#[test]
fn many_rays_cover_the_circle() {
    let n = 360;
    let base = (0..n).map(|i| {
        let a = std::f64::consts::TAU * i as f64 / n as f64;
        vec![a.cos(), a.sin()]
    });
    let g = cone(2, base.collect());
    let bound = (std::f64::consts::PI / n as f64).sin();
    for k in 0..10_000 {
        let a = std::f64::consts::TAU * k as f64 / 10_000.0 + 1e-4;
        let d = distance_to_germ(&g, &[a.cos(), a.sin()], 1e-12).unwrap();
        assert!(d <= bound + 1e-12, "angle {a}: {d} > {bound}");
    }
}

#[test]
fn arc_distance_matches_a_dense_grid() {
    let g = parabola(2.0);
    let x = [1.0, 0.0];
    let n = 1_000_000;
    let oracle = (1..=n).map(|i| 2.0 * i as f64 / n as f64).map(|t| dist(&x, &[t, t * t])).fold(f64::INFINITY, f64::min);
    let d = distance_to_germ(&g, &x, 1e-9).unwrap();
    assert!((d - oracle).abs() < 1e-6, "{d} vs {oracle}");
}

#[test]
fn empty_cone_base_is_rejected() {
    assert!(SetGerm::cone_over(SphericalCloud::empty(2, "")).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_is_one_lipschitz(seed in any::<u64>(), radius in 1e-4f64..0.1) {
        let tol = 1e-9 * radius;
        let germs = [double_cone(), cone(3, vec![vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]])];
        let mut rng = substream(seed, &[]);
        for g in &germs {
            let x = in_ball(&mut rng, 3, radius);
            let y = in_ball(&mut rng, 3, radius);
            let (dx, dy) = (distance_to_germ(g, &x, tol).unwrap(), distance_to_germ(g, &y, tol).unwrap());
            prop_assert!((dx - dy).abs() <= dist(&x, &y) + 2.0 * tol + 1e-12 * radius, "{dx} {dy} {}", dist(&x, &y));
        }
    }

    #[test]
    fn arc_distance_is_one_lipschitz(seed in any::<u64>(), radius in 1e-3f64..0.5) {
        let tol = 1e-9;
        let g = parabola(1.0);
        let mut rng = substream(seed, &[1]);
        let x = in_ball(&mut rng, 2, radius);
        let y = in_ball(&mut rng, 2, radius);
        let (dx, dy) = (distance_to_germ(&g, &x, tol).unwrap(), distance_to_germ(&g, &y, tol).unwrap());
        prop_assert!((dx - dy).abs() <= dist(&x, &y) + 2.0 * tol);
    }
}
