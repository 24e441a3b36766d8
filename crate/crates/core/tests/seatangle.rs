use germlab::germs::{rebucket, sample_germ, AnnulusSample, Expr, Polynomial};
use germlab::rng::{in_ball, substream};
use germlab::seatangle::{
    check_containment, check_sandwich, check_ssp, check_st_equivalence, mc_volume, st_member, volume_ratio_curve, ProbeGenerator, STParams, DEFAULT_C_GRID,
    DEFAULT_D_GRID, DEFAULT_SSP_THRESHOLD,
};
use germlab::vecops::norm;
use germlab::{Error, GermMap, ScaleSchedule, SetGerm, SphericalCloud};
use proptest::prelude::*;

fn cone(dim: usize, base: Vec<Vec<f64>>) -> SetGerm {
    SetGerm::cone_over(SphericalCloud::new(dim, base, "test").unwrap()).unwrap()
}

fn x_ray() -> SetGerm {
    cone(2, vec![vec![1.0, 0.0]])
}

fn y_ray() -> SetGerm {
    cone(2, vec![vec![0.0, 1.0]])
}

fn z_ray() -> SetGerm {
    cone(3, vec![vec![0.0, 0.0, 1.0]])
}

fn parabola() -> SetGerm {
    SetGerm::arc(vec!["t".parse::<Expr>().unwrap(), "(pow t 2)".parse().unwrap()], 1.0).unwrap()
}

fn xy_plane() -> SetGerm {
    SetGerm::semialgebraic(3, vec![Polynomial::from_terms(3, &[(1.0, &[0, 0, 1])]).unwrap()], vec![]).unwrap()
}

fn st(d: f64, c: f64) -> STParams {
    STParams::new(d, c).unwrap()
}

/// Points `r_m e_1` for the radii produced by `radius`, bucketed on `schedule`.
fn sequence(radius: impl Fn(usize) -> f64, schedule: &ScaleSchedule) -> SetGerm {
    let r_min = schedule.inner(schedule.count - 1) * 0.5;
    let pts: Vec<Vec<f64>> = (0..).map(radius).take_while(|&r| r > r_min).map(|r| vec![r, 0.0]).collect();
    let template = (0..schedule.count).map(|k| AnnulusSample::empty(schedule, k)).collect();
    rebucket(2, pts.into_iter(), template, None).unwrap()
}

#[test]
fn membership_examples() {
    assert!(st_member(&z_ray(), &st(2.0, 1.0), &[0.005, 0.0, 0.1], 1e-12).unwrap());
    assert!(!st_member(&z_ray(), &st(2.0, 1.0), &[0.05, 0.0, 0.1], 1e-12).unwrap());
    let arc = parabola();
    for p in sample_germ(&arc, &ScaleSchedule::default(), 20, 1).unwrap().cloud_points() {
        assert!(st_member(&arc, &st(3.0, 0.1), p, 1e-9 * norm(p)).unwrap(), "{p:?}");
    }
    assert!(STParams::new(0.0, 1.0).is_err() && STParams::new(1.5, -1.0).is_err());
}

#[test]
fn containment_examples() {
    let sched = ScaleSchedule::default();
    let rep = check_containment(&parabola(), &x_ray(), &st(1.5, 1.0), &sched, 300, 2).unwrap();
    assert!(rep.verdict, "{rep:?}");
    // dist((t, t^2), x-axis) = t^2 <= |(t, t^2)|^1.5 needs t <= (1 + t^2)^(3/4), true on (0, 1]
    for s in &rep.per_scale_fraction {
        assert_eq!(s.fraction, 1.0);
    }
    for g in [parabola(), x_ray()] {
        assert!(check_containment(&g, &g, &st(1.5, 1.0), &sched, 100, 3).unwrap().verdict);
    }
    let apart = check_containment(&x_ray(), &y_ray(), &st(1.5, 1.0), &sched, 300, 4).unwrap();
    assert!(!apart.verdict);
    assert!(apart.per_scale_fraction.last().unwrap().fraction < 0.01, "{apart:?}");
}

#[test]
fn equivalence_examples() {
    let sched = ScaleSchedule::default();
    let same = check_st_equivalence(&parabola(), &parabola(), &DEFAULT_D_GRID, &DEFAULT_C_GRID, &sched, 200, 5).unwrap();
    let smallest = st(DEFAULT_D_GRID[0], DEFAULT_C_GRID[0]);
    assert_eq!(same.witness(), Some((smallest, smallest)));

    let cone = germlab::directions::tangent_cone(&parabola(), &sched, 500, 0.05, 6).unwrap();
    assert!(check_st_equivalence(&parabola(), &cone, &DEFAULT_D_GRID, &DEFAULT_C_GRID, &sched, 200, 7).unwrap().witness().is_some());

    let apart = check_st_equivalence(&x_ray(), &y_ray(), &DEFAULT_D_GRID, &DEFAULT_C_GRID, &sched, 200, 8).unwrap();
    assert!(apart.witness().is_none());
    assert!(check_st_equivalence(&x_ray(), &y_ray(), &[1.0], &DEFAULT_C_GRID, &sched, 10, 8).is_err());
}

#[test]
fn sandwich_examples() {
    let sched = ScaleSchedule::default();
    let id = check_sandwich(&GermMap::identity(2), &x_ray(), 1.0, 1.5, &sched, 200, 9).unwrap();
    assert!(id.inner.verdict && id.outer.verdict, "{id:?}");
    assert!(id.outer.max_violation <= 0.0, "{}", id.outer.max_violation);
    let twice = GermMap::linear(vec![vec![2.0, 0.0], vec![0.0, 2.0]]).unwrap();
    for map in [twice, GermMap::Spiral] {
        let rep = check_sandwich(&map, &x_ray(), 1.0, 1.5, &sched, 200, 10).unwrap();
        assert!(rep.inner.verdict && rep.outer.verdict, "{}: {rep:?}", map.name());
    }
    let power = GermMap::power(3, 2, 3).unwrap();
    assert!(matches!(check_sandwich(&power, &z_ray(), 1.0, 1.5, &sched, 50, 11), Err(Error::NotBiLipschitz { .. })));
}

#[test]
fn volume_of_the_full_space_is_the_ball() {
    let v = mc_volume(&SetGerm::full_space(3), &st(2.0, 0.5), 0.1, 10_000, 12).unwrap();
    assert_eq!(v.hits, v.samples);
    let ball = 4.0 / 3.0 * std::f64::consts::PI * 1e-3;
    assert!((v.volume - ball).abs() < 1e-15, "{}", v.volume);
    assert_eq!(v.half_width_ci, 0.0);
    assert!(mc_volume(&SetGerm::full_space(3), &st(2.0, 0.5), 0.1, 9_999, 12).is_err());
}

#[test]
fn volume_of_a_tube_around_the_z_axis() {
    let axis = cone(3, vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, -1.0]]);
    let (c, eps) = (0.5, 0.1);
    let v = mc_volume(&axis, &st(2.0, c), eps, 4_000_000, 13).unwrap();
    // two rays, each a tube of radius C t^2 up to height eps
    let exact = 2.0 * std::f64::consts::PI * c * c * eps.powi(5) / 5.0;
    assert!((v.volume - exact).abs() <= 0.1 * exact, "{} vs {exact}", v.volume);
}

#[test]
fn volume_of_a_slab_around_the_plane() {
    let (c, eps) = (0.5, 0.1);
    let v = mc_volume(&xy_plane(), &st(2.0, c), eps, 200_000, 14).unwrap();
    // shell of radius r and thickness 2 C r^2 integrated over r < eps
    let exact = std::f64::consts::PI * c * eps.powi(4);
    assert!((v.volume - exact).abs() <= 0.1 * exact, "{} vs {exact}", v.volume);
}

#[test]
fn ratio_of_a_germ_to_itself_is_one() {
    let eps: Vec<f64> = (0..5).map(|k| 0.1 * 0.5f64.powi(k)).collect();
    let curve = volume_ratio_curve(&xy_plane(), &xy_plane(), 1.5, 0.5, 0.5, &eps, 50_000, 15).unwrap();
    for e in &curve.entries {
        assert!((e.volume - 1.0).abs() <= e.half_width_ci, "{e:?}");
    }
    let thin = volume_ratio_curve(&z_ray(), &z_ray(), 2.0, 0.5, 0.5, &eps, 10_000, 16);
    assert!(matches!(thin, Err(Error::DivisionUnstable { .. })), "{thin:?}");
    assert!(volume_ratio_curve(&xy_plane(), &xy_plane(), 1.5, 0.5, 0.5, &eps[..4], 10_000, 17).is_err());
}

#[test]
fn ssp_examples() {
    let sched = ScaleSchedule::default();
    let eps: f64 = 0.2;
    let geometric = sequence(|m| 0.1 * (1.0 - 2.0 * eps).powi(m as i32), &sched);
    let rep = check_ssp(&geometric, &ProbeGenerator::scaled(1.0 - eps, 100), &sched, DEFAULT_SSP_THRESHOLD, 18).unwrap();
    assert!(!rep.verdict);
    for s in &rep.probe_ratios {
        assert!((s.ratio - eps).abs() <= 0.01, "{s:?}");
    }

    let harmonic = sequence(|m| 0.1 / (m as f64 + 1.0), &sched);
    assert!(check_ssp(&harmonic, &ProbeGenerator::scaled(1.0 - eps, 100), &sched, DEFAULT_SSP_THRESHOLD, 19).unwrap().verdict);

    let rep = check_ssp(&z_ray(), &ProbeGenerator::scaled(0.999, 100), &sched, DEFAULT_SSP_THRESHOLD, 20).unwrap();
    assert!(rep.verdict && rep.final_ratio < 1e-2, "{rep:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn membership_grows_with_width(seed in any::<u64>(), d in 1.0f64..3.0, c in 0.1f64..2.0) {
        let mut rng = substream(seed, &[]);
        let x = in_ball(&mut rng, 3, 0.1);
        let tol = 1e-9 * norm(&x);
        if st_member(&z_ray(), &st(d, c), &x, tol).unwrap() {
            prop_assert!(st_member(&z_ray(), &st(d, 2.0 * c), &x, tol).unwrap());
            prop_assert!(st_member(&z_ray(), &st(d * 0.9, c), &x, tol).unwrap());
        }
    }

    #[test]
    fn containment_fractions_are_probabilities(seed in any::<u64>(), d in 1.05f64..2.5, c in 0.1f64..4.0) {
        let sched = ScaleSchedule::new(0.1, 0.5, 5).unwrap();
        let rep = check_containment(&parabola(), &y_ray(), &st(d, c), &sched, 20, seed).unwrap();
        for s in &rep.per_scale_fraction {
            prop_assert!((0.0..=1.0).contains(&s.fraction));
        }
        prop_assert_eq!(rep.verdict, rep.per_scale_fraction.iter().all(|s| s.fraction >= 0.99));
    }
}
