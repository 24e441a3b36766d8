use germlab::directions::tangent_cone;
use germlab::germs::io::GermSpec;
use germlab::germs::{rebucket, AnnulusSample};
use germlab::maps::image_of_cone;
use germlab::rng::derive_seed;
use germlab::seatangle::{check_ssp, ProbeGenerator, SSPReport, DEFAULT_SSP_THRESHOLD};
use germlab::{GermMap, ScaleSchedule, SetGerm};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{resolve, slug};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::plot::{Plot, Series};
use crate::report::Source;
use crate::{fmt_f64, zoo, Run};

/// A germ whose tangent cone is mapped by `map` before the check.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappedCone {
    pub germ: GermSpec,
    pub map: GermMap,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SspParams {
    pub schedule: ScaleSchedule,
    pub threshold: f64,
    pub probes_per_scale: usize,
    /// `b_{m+1} = (1 - 2 eps) b_m` probed by `a_m = (1 - eps) b_m`.
    pub geometric_eps: f64,
    /// Allowed deviation of every geometric ratio from `eps`.
    pub geometric_tol: f64,
    /// Scale factor of probes on cones and on the harmonic sequence.
    pub cone_probe_factor: f64,
    pub cones: Vec<GermSpec>,
    /// Jitter of directional probes around the stable directions.
    pub jitter: f64,
    pub stability_tol: f64,
    pub mapped_cones: Vec<MappedCone>,
    /// Germs reported without expectations.
    pub unasserted: Vec<GermSpec>,
}

impl Default for SspParams {
    fn default() -> Self {
        let mc = |germ, map| MappedCone { germ, map };
        SspParams {
            schedule: ScaleSchedule::default(),
            threshold: DEFAULT_SSP_THRESHOLD,
            probes_per_scale: 500,
            geometric_eps: 0.2,
            geometric_tol: 0.01,
            cone_probe_factor: 0.999,
            cones: vec![
                zoo::ray2(0.0, "x-ray"),
                zoo::z_ray(),
                zoo::z_axis(),
                zoo::cone3(vec![vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0], vec![-1.0, 0.0, 1.0], vec![0.0, -1.0, 1.0]], "four rays"),
            ],
            jitter: 0.1,
            stability_tol: 0.05,
            mapped_cones: vec![
                mc(zoo::parabola(), zoo::shear2()),
                mc(zoo::cusp_arc(), zoo::scaling2(2.0)),
                mc(zoo::ray2(std::f64::consts::PI, "left ray"), GermMap::zigzag()),
                mc(zoo::v_cusp(), zoo::linear3()),
                mc(zoo::w_cone(), zoo::linear3()),
                mc(zoo::half_plane(germlab::germs::Sign::Positive), zoo::linear3()),
            ],
            unasserted: vec![zoo::flat_arc()],
        }
    }
}

/// Points `first * q^m` along `direction`, `m = 0, 1, ...` down to `min_radius`.
fn sequence<F: Fn(usize) -> f64>(direction: &[f64], radius: F, min_radius: f64, schedule: &ScaleSchedule) -> Result<SetGerm> {
    let pts = (0..).map(&radius).take_while(|&r| r > min_radius).map(|r| direction.iter().map(|c| c * r).collect::<Vec<f64>>());
    let template = (0..schedule.count).map(|k| AnnulusSample::empty(schedule, k)).collect();
    Ok(rebucket(direction.len(), pts.collect::<Vec<_>>().into_iter(), template, None)?)
}

fn emit(run: &mut Run, name: &str, rep: &SSPReport, series: &mut Vec<Series>) -> Result<()> {
    run.csv(
        &format!("ssp_{}.csv", slug(name)),
        &["scale_index", "scale", "probes", "ratio"],
        rep.probe_ratios.iter().map(|s| vec![s.scale_index.to_string(), fmt_f64(s.scale), s.probes.to_string(), fmt_f64(s.ratio)]),
    )?;
    series.push(Series::new(name, rep.probe_ratios.iter().map(|s| (s.scale, s.ratio.max(1e-12))).collect()));
    run.measure(format!("{name}/final_ratio"), rep.final_ratio);
    Ok(())
}

pub fn run(run: &mut Run, config: &ExperimentConfig) -> Result<Value> {
    let (p, echo) = resolve::<SspParams>(config)?;
    let s = &p.schedule;
    let seed = config.seed;
    let r_min = s.inner(s.count - 1) * 0.5;
    let mut series = Vec::new();

    let eps = p.geometric_eps;
    let geo = sequence(&[1.0, 0.0], |m| s.eps0 * (1.0 - 2.0 * eps).powi(m as i32), r_min, s)?.with_label("geometric");
    let rep = check_ssp(&geo, &ProbeGenerator::scaled(1.0 - eps, p.probes_per_scale), s, p.threshold, derive_seed(seed, &[0]))?;
    emit(run, "geometric", &rep, &mut series)?;
    let worst = rep.probe_ratios.iter().map(|r| (r.ratio - eps).abs()).fold(0.0, f64::max);
    run.check("geometric/ratio", "largest deviation of a per-scale ratio from eps", worst, format!("<= {}", p.geometric_tol), Source::Literature, "b_{m+1} = (1 - 2ε) b_m, a_m = (1 - ε) b_m", worst <= p.geometric_tol && !rep.probe_ratios.is_empty());
    run.check("geometric/verdict", "SSP verdict", rep.verdict, false, Source::Literature, "geometric sequence fails the selection property", !rep.verdict);

    let harmonic = sequence(&[1.0, 0.0], |m| s.eps0 / (m as f64 + 1.0), r_min, s)?.with_label("harmonic");
    let rep = check_ssp(&harmonic, &ProbeGenerator::scaled(1.0 - eps, p.probes_per_scale), s, p.threshold, derive_seed(seed, &[1]))?;
    emit(run, "harmonic", &rep, &mut series)?;
    run.check("harmonic/verdict", "SSP verdict", rep.verdict, true, Source::Literature, "{1/m} satisfies the selection property", rep.verdict);

    for (i, spec) in p.cones.iter().enumerate() {
        let cone = spec.build()?;
        let rep = check_ssp(&cone, &ProbeGenerator::scaled(p.cone_probe_factor, p.probes_per_scale), s, p.threshold, derive_seed(seed, &[2, i as u64]))?;
        let name = format!("cone {}", cone.label());
        emit(run, &name, &rep, &mut series)?;
        run.check(format!("cone/{}", cone.label()), "SSP verdict", rep.verdict, true, Source::Trivial, "cones contain their own scalings", rep.verdict);
    }

    for (i, mc) in p.mapped_cones.iter().enumerate() {
        let g = mc.germ.build()?;
        let cone = tangent_cone(&g, s, 1000, p.stability_tol, derive_seed(seed, &[3, i as u64]))?;
        let image = image_of_cone(&mc.map, &cone)?;
        let rep = check_ssp(&image, &ProbeGenerator::directional(p.jitter, p.probes_per_scale), s, p.threshold, derive_seed(seed, &[4, i as u64]))?;
        let name = format!("{}(LD({}))", mc.map.name(), g.label());
        emit(run, &name, &rep, &mut series)?;
        run.check(format!("mapped-cone/{name}"), "SSP verdict", rep.verdict, true, Source::Literature, "h(LD(A)) satisfies the selection property", rep.verdict);
    }

    for (i, spec) in p.unasserted.iter().enumerate() {
        let g = spec.build()?;
        let rep = check_ssp(&g, &ProbeGenerator::directional(p.jitter, p.probes_per_scale), s, p.threshold, derive_seed(seed, &[5, i as u64]))?;
        emit(run, g.label(), &rep, &mut series)?;
        run.measure(format!("{}/verdict", g.label()), rep.verdict);
    }

    run.plot("ssp_ratios.svg", &Plot::Series { title: "SSP ratio per scale", x_label: "scale", y_label: "ratio", log_x: true, log_y: true, series: &series })?;
    Ok(echo)
}
