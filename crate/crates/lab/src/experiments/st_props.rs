use std::collections::BTreeMap;

use germlab::directions::{cone_of, directed_hausdorff, directions_for, estimate_dimension, hausdorff_sphere, DirectionalParams};
use germlab::germs::io::GermSpec;
use germlab::germs::{distance_to_germ, sample_germ, Sign};
use germlab::maps::pushforward;
use germlab::rng::derive_seed;
use germlab::seatangle::{
    check_containment, check_st_equivalence, sample_st_neighborhood, volume_ratio_curve, STParams, CONTAINMENT_FRACTION, DEFAULT_C_GRID, DEFAULT_D_GRID,
};
use germlab::vecops::norm;
use germlab::{GermMap, ScaleSchedule, SetGerm};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{pair_dimension, resolve, slug};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::Source;
use crate::zoo::{self, SuiteGerm};
use crate::{fmt_f64, Run};

/// Germ pair and a map whose images of both germs are again subanalytic.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappedCase {
    pub a: GermSpec,
    pub b: GermSpec,
    pub map: GermMap,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StPropsParams {
    pub germs: Vec<SuiteGerm>,
    /// Schedule, sample budget and tolerances for direction estimates.
    pub directional: DirectionalParams,
    /// Schedule for containment checks. Deep schedules make small-d, large-C
    /// grid points non-vacuous while their widths still exceed every gap.
    pub containment_schedule: ScaleSchedule,
    /// Sample budget per annulus for containment checks.
    pub containment_per_scale: usize,
    /// Deep schedule for comparing D(ST_d(G;C)) with D(G): at radius r the
    /// neighbourhood widens directions by up to C r^(d-1).
    pub neighbourhood_schedule: ScaleSchedule,
    pub neighbourhood_per_scale: usize,
    pub neighbourhood_d: Vec<f64>,
    pub neighbourhood_c: Vec<f64>,
    /// Containment of each germ in a sea-tangle of its tangent cone.
    pub cone_containment: STParams,
    pub d_grid: Vec<f64>,
    pub c_grid: Vec<f64>,
    /// Pairs with A ⊂ ST_d(B;C) checked for D(h(A)) ⊂ D(h(B)).
    pub implication_cases: Vec<MappedCase>,
    pub implication_params: STParams,
    /// Pairs on which containment for some grid (d, C) must match D(h(A)) ⊂ D(h(B)).
    pub equivalence_cases: Vec<MappedCase>,
    /// Labels of germs whose volumes are compared with those of their tangent cones.
    pub volume_germs: Vec<String>,
    pub volume_eps: Vec<f64>,
    pub volume_n: usize,
    pub volume_band: f64,
    /// Pairs whose closures meet only at the origin, in R^3.
    pub disjoint_pairs: Vec<(GermSpec, GermSpec)>,
}

impl Default for StPropsParams {
    fn default() -> Self {
        let case = |a, b, map| MappedCase { a, b, map };
        let x_ray = || zoo::ray2(0.0, "x-ray");
        StPropsParams {
            germs: zoo::suite(),
            // cusps approach their tangent directions at angle ~ r^(1/2); the pooled
            // window must sit well below r = 1e-3 for 0.1-rad comparisons
            directional: DirectionalParams { schedule: ScaleSchedule { eps0: 1e-3, ratio: 0.5, count: 16 }, per_scale: 1000, ..Default::default() },
            containment_schedule: ScaleSchedule::default(),
            containment_per_scale: 300,
            neighbourhood_schedule: ScaleSchedule { eps0: 1e-6, ratio: 0.5, count: 12 },
            neighbourhood_per_scale: 300,
            neighbourhood_d: vec![1.2, 1.5, 2.0],
            neighbourhood_c: vec![0.5, 1.0],
            cone_containment: STParams { d: 1.1, c: 1.0 },
            d_grid: DEFAULT_D_GRID.to_vec(),
            c_grid: DEFAULT_C_GRID.to_vec(),
            implication_cases: vec![
                case(zoo::parabola(), x_ray(), GermMap::Spiral),
                case(zoo::parabola(), x_ray(), GermMap::zigzag()),
                case(zoo::cusp_arc(), x_ray(), zoo::shear2()),
                case(zoo::v_cusp(), zoo::z_axis(), zoo::linear3()),
                case(zoo::cusp_surface(), zoo::z_ray(), zoo::linear3()),
                case(zoo::w_half(), zoo::w_cone(), zoo::linear3()),
            ],
            implication_params: STParams { d: 1.5, c: 1.0 },
            equivalence_cases: vec![
                case(zoo::parabola(), x_ray(), zoo::shear2()),
                case(x_ray(), zoo::parabola(), GermMap::identity(2)),
                case(x_ray(), zoo::ray2(1.0, "ray 1.0"), zoo::shear2()),
                case(zoo::cusp_arc(), zoo::parabola(), GermMap::identity(2)),
                case(zoo::v_cusp(), zoo::z_axis(), zoo::linear3()),
                case(zoo::w_cone(), zoo::z_axis(), GermMap::identity(3)),
                case(zoo::z_ray(), zoo::cusp_surface(), GermMap::identity(3)),
                case(zoo::cusp_surface(), zoo::w_cone(), zoo::linear3()),
                case(zoo::half_plane(Sign::Positive), zoo::xy_plane(), zoo::linear3()),
                case(zoo::xy_plane(), zoo::half_plane(Sign::Positive), GermMap::identity(3)),
            ],
            volume_germs: vec!["parabola".into(), "cusp arc".into()],
            volume_eps: (0..5).map(|k| 0.1 * 0.5f64.powi(k)).collect(),
            volume_n: 20_000,
            volume_band: 4.0,
            disjoint_pairs: vec![(zoo::v_cusp(), zoo::w_cone()), (zoo::z_ray(), zoo::cusp_surface()), (zoo::w_cone(), zoo::w_perturbed())],
        }
    }
}

/// Whether some non-vacuous grid pair `(d, C)` has `A ⊂ ST_d(B;C)` at every scale.
/// Distances are computed once per sample and reused across the grid.
fn grid_containment(a: &SetGerm, b: &SetGerm, d_grid: &[f64], c_grid: &[f64], schedule: &ScaleSchedule, per_scale: usize, seed: u64) -> Result<Option<STParams>> {
    let cloud = sample_germ(a, schedule, per_scale, seed)?;
    let annuli: Vec<Vec<(f64, f64)>> = cloud
        .annuli()
        .iter()
        .filter(|an| !an.points.is_empty())
        .map(|an| an.points.iter().map(|x| Ok((norm(x), distance_to_germ(b, x, 1e-7 * norm(x).powi(2))?))).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let r_min = schedule.inner(schedule.count - 1);
    for &d in d_grid {
        for &c in c_grid {
            let params = STParams::new(d, c)?;
            if params.covers_everything_at(r_min) {
                continue;
            }
            let ok = !annuli.is_empty()
                && annuli.iter().all(|pts| {
                    let inside = pts.iter().filter(|&&(r, dist)| dist <= params.width_at(r) * (1.0 + 1e-6)).count();
                    inside as f64 >= CONTAINMENT_FRACTION * pts.len() as f64
                });
            if ok {
                return Ok(Some(params));
            }
        }
    }
    Ok(None)
}

fn mapped_directions(case: &MappedCase, dp: &DirectionalParams, seed: u64) -> Result<(f64, bool)> {
    let (a, b) = (case.a.build()?, case.b.build()?);
    let ha = pushforward(&case.map, &sample_germ(&a, &dp.schedule, dp.per_scale, derive_seed(seed, &[0]))?)?;
    let hb = pushforward(&case.map, &sample_germ(&b, &dp.schedule, dp.per_scale, derive_seed(seed, &[1]))?)?;
    let (da, db) = (directions_for(&ha, dp, 0)?, directions_for(&hb, dp, 0)?);
    let gap = directed_hausdorff(&da.stable, &db.stable);
    Ok((gap, gap <= 2.0 * dp.stability_tol))
}

fn case_name(case: &MappedCase) -> Result<String> {
    Ok(format!("{} -> {} under {}", case.a.build()?.label(), case.b.build()?.label(), case.map.name()))
}

pub fn run(run: &mut Run, config: &ExperimentConfig) -> Result<Value> {
    let (mut p, _) = resolve::<StPropsParams>(config)?;
    p.directional.seed = config.seed;
    let dp = &p.directional;
    let seed = config.seed;
    let stol = dp.stability_tol;
    let germs: Vec<(SetGerm, i32)> = p.germs.iter().map(|g| Ok((g.spec.build()?, g.dim))).collect::<Result<_>>()?;

    // D(ST_d(G;C)) = D(G)
    let deep = DirectionalParams { schedule: p.neighbourhood_schedule, per_scale: p.neighbourhood_per_scale, ..dp.clone() };
    let mut rows = Vec::new();
    for (gi, (g, _)) in germs.iter().enumerate() {
        let base = directions_for(g, &deep, derive_seed(seed, &[1, gi as u64]))?;
        for &d in &p.neighbourhood_d {
            for &c in &p.neighbourhood_c {
                let params = STParams::new(d, c)?;
                let st = sample_st_neighborhood(g, &params, &deep.schedule, deep.per_scale, derive_seed(seed, &[2, gi as u64]))?;
                let dst = directions_for(&st, &deep, 0)?;
                let h = hausdorff_sphere(&dst.stable, &base.stable)?;
                rows.push(vec![g.label().to_string(), fmt_f64(d), fmt_f64(c), fmt_f64(h), st.cloud_points().count().to_string()]);
                run.check(
                    format!("st-directions/{}/d={d}/C={c}", g.label()),
                    "Hausdorff angle between directions of ST_d(G;C) and of G",
                    h,
                    format!("<= {}", 2.0 * stol),
                    Source::Literature,
                    "D(ST_d(A;C)) = D(A) for d > 1",
                    h <= 2.0 * stol,
                );
            }
        }
    }
    run.csv("st_directions.csv", &["germ", "d", "C", "hausdorff", "st_points"], rows)?;

    // tangent cones: containment, ST-equivalence, dimension bound
    let mut witnesses = BTreeMap::new();
    let mut rows = Vec::new();
    for (gi, (g, dim)) in germs.iter().enumerate() {
        let label = g.label().to_string();
        let est = directions_for(g, dp, derive_seed(seed, &[3, gi as u64]))?;
        let cone = cone_of(&est, g.label())?;
        let cont = check_containment(g, &cone, &p.cone_containment, &p.containment_schedule, p.containment_per_scale, derive_seed(seed, &[4, gi as u64]))?;
        run.check(
            format!("in-cone-neighbourhood/{label}"),
            format!("min fraction of samples in ST_{}(LD(G);{})", p.cone_containment.d, p.cone_containment.c),
            cont.min_fraction(),
            format!(">= {CONTAINMENT_FRACTION}"),
            Source::Literature,
            "A ⊂ ST_d(LD(A);C), d ↓ 1",
            cont.verdict,
        );
        let eq = check_st_equivalence(g, &cone, &p.d_grid, &p.c_grid, &p.containment_schedule, p.containment_per_scale, derive_seed(seed, &[5, gi as u64]))?;
        let w = eq.witness();
        run.check(
            format!("cone-equivalence/{label}"),
            "ST-equivalence witness between G and LD(G) on the grids",
            w.map(|(x, y)| [x, y]),
            "witness",
            Source::Literature,
            "A ~ST LD(A)",
            w.is_some(),
        );
        if let Some((x, y)) = w {
            witnesses.insert(label.clone(), (x.d.min(y.d), cone.clone()));
        }
        let ddim = estimate_dimension(&est.stable, &dp.caps)?.dim;
        rows.push(vec![label.clone(), dim.to_string(), ddim.to_string(), fmt_f64(cont.min_fraction()), w.is_some().to_string()]);
        run.check(
            format!("cone-dimension/{label}"),
            "dim D(G) + 1 against the dimension of G",
            ddim + 1,
            format!("<= {dim}"),
            Source::Literature,
            "dim LD(A) <= dim A",
            ddim < *dim,
        );
    }
    run.csv("tangent_cones.csv", &["germ", "dim", "direction_dim", "cone_containment_fraction", "equivalence_witness"], rows)?;

    // A ⊂ ST_d(B;C) implies D(h(A)) ⊂ D(h(B))
    let mut rows = Vec::new();
    for (ci, case) in p.implication_cases.iter().enumerate() {
        let name = case_name(case)?;
        let (a, b) = (case.a.build()?, case.b.build()?);
        let contained = check_containment(&a, &b, &p.implication_params, &p.containment_schedule, p.containment_per_scale, derive_seed(seed, &[7, ci as u64]))?.verdict;
        let (gap, subset) = mapped_directions(case, dp, derive_seed(seed, &[8, ci as u64]))?;
        rows.push(vec![name.clone(), contained.to_string(), fmt_f64(gap)]);
        run.check(
            format!("containment-implies-directions/{name}"),
            "containment verdict and largest angle from D(h(A)) to D(h(B))",
            (contained, gap),
            format!("containment false, or angle <= {}", 2.0 * stol),
            Source::Literature,
            "A ⊂ ST_d(B;C), d > 1 ⇒ D(h(A)) ⊂ D(h(B))",
            !contained || subset,
        );
    }
    run.csv("implication.csv", &["case", "contained", "direction_gap"], rows)?;

    // D(h(A)) ⊂ D(h(B)) iff A ⊂ ST_d(B;C) for some d > 1, C > 0
    let mut rows = Vec::new();
    for (ci, case) in p.equivalence_cases.iter().enumerate() {
        let name = case_name(case)?;
        let (a, b) = (case.a.build()?, case.b.build()?);
        let wit = grid_containment(&a, &b, &p.d_grid, &p.c_grid, &p.containment_schedule, p.containment_per_scale, derive_seed(seed, &[9, ci as u64]))?;
        let (gap, subset) = mapped_directions(case, dp, derive_seed(seed, &[10, ci as u64]))?;
        rows.push(vec![name.clone(), wit.is_some().to_string(), subset.to_string(), fmt_f64(gap)]);
        run.check(
            format!("containment-iff-directions/{name}"),
            "(grid containment witness, direction subset verdict)",
            (wit, subset),
            "both or neither",
            Source::Literature,
            "D(h(A)) ⊂ D(h(B)) ⇔ ∃ d > 1, C > 0: A ⊂ ST_d(B;C)",
            wit.is_some() == subset,
        );
    }
    run.csv("equivalence.csv", &["case", "containment", "direction_subset", "direction_gap"], rows)?;

    // volumes of ST-equivalent germs are comparable
    let mut rows = Vec::new();
    for (vi, label) in p.volume_germs.iter().enumerate() {
        let Some((g, _)) = germs.iter().find(|(g, _)| g.label() == label) else {
            return Err(crate::LabError::Config(format!("volume germ `{label}` is not in the germ list")));
        };
        let Some((d, cone)) = witnesses.get(label) else {
            run.measure(format!("volume-band/{label}"), "no equivalence witness");
            continue;
        };
        let curve = volume_ratio_curve(g, cone, *d, 1.0, 1.0, &p.volume_eps, p.volume_n, derive_seed(seed, &[11, vi as u64]))?;
        for e in &curve.entries {
            rows.push(vec![label.clone(), fmt_f64(*d), fmt_f64(e.eps), fmt_f64(e.volume), fmt_f64(e.half_width_ci)]);
        }
        let (lo, hi) = curve.values().iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let k = p.volume_band;
        run.check(
            format!("volume-band/{label}"),
            format!("range of Vol(ST_d(G;1))/Vol(ST_d(LD(G);1)) at d = {d}"),
            [lo, hi],
            format!("within [{}, {k}]", 1.0 / k),
            Source::Literature,
            "A ~ST B ⇒ Vol(ST_d(A;C) ∩ B_ε) / Vol(ST_d(B;C) ∩ B_ε) bounded",
            lo >= 1.0 / k && hi <= k,
        );
    }
    run.csv("volume_band.csv", &["germ", "d", "eps", "ratio", "half_width_ci"], rows)?;

    // closures meeting only at 0 in R^n share at most an (n-2)-dimensional set of directions
    let mut rows = Vec::new();
    for (pi, (sa, sb)) in p.disjoint_pairs.iter().enumerate() {
        let (a, b) = (sa.build()?, sb.build()?);
        let n = a.ambient_dim() as i32;
        let ea = directions_for(&a, dp, derive_seed(seed, &[12, pi as u64, 0]))?;
        let eb = directions_for(&b, dp, derive_seed(seed, &[12, pi as u64, 1]))?;
        let (cap, dim) = pair_dimension(&ea, &eb, dp)?;
        let name = format!("{} / {}", a.label(), b.label());
        rows.push(vec![name.clone(), dim.dim.to_string(), cap.len().to_string()]);
        run.check(
            format!("disjoint-closures/{}", slug(&name)),
            "dim(D(A) ∩ D(B)) for closures meeting only at 0",
            dim.dim,
            format!("<= {}", n - 2),
            Source::Literature,
            "dim(D(A_1) ∩ D(A_2)) <= n - 2",
            dim.dim <= n - 2,
        );
    }
    run.csv("disjoint_pairs.csv", &["pair", "dim", "intersection_size"], rows)?;
    Ok(serde_json::to_value(&p)?)
}
