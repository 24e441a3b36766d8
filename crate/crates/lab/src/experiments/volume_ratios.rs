use germlab::germs::io::GermSpec;
use germlab::rng::derive_seed;
use germlab::seatangle::{volume_ratio_curve, VolumeCurve};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::resolve;
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::plot::Plot;
use crate::report::Source;
use crate::{fmt_f64, zoo, Run};

/// One ratio curve `Vol(ST_d(alpha; c1) ∩ B_eps) / Vol(ST_d(beta; c2) ∩ B_eps)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatioCase {
    pub alpha: GermSpec,
    pub beta: GermSpec,
    pub d: f64,
    pub c1: f64,
    pub c2: f64,
    pub eps: Vec<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VolumeRatioParams {
    /// Line against plane: the ratio tends to 0.
    pub line_plane: RatioCase,
    /// Ray against the cusp surface it is tangent to: the ratio tends to 1.
    pub ray_cusp: RatioCase,
    /// A germ against itself.
    pub same: RatioCase,
    /// Largest final ratio accepted for the line/plane curve.
    pub line_plane_final_max: f64,
    /// Band the last two ray/cusp ratios must lie in, CI included.
    pub ray_cusp_band: (f64, f64),
}

fn geometric(first: f64, ratio: f64, count: i32) -> Vec<f64> {
    (0..count).map(|k| first * ratio.powi(k)).collect()
}

impl Default for VolumeRatioParams {
    fn default() -> Self {
        VolumeRatioParams {
            line_plane: RatioCase { alpha: zoo::z_axis(), beta: zoo::xy_plane(), d: 1.5, c1: 0.5, c2: 0.5, eps: geometric(0.1, 0.7, 7), n: 1_000_000 },
            ray_cusp: RatioCase { alpha: zoo::z_ray(), beta: zoo::cusp_surface(), d: 1.05, c1: 1.0, c2: 1.0, eps: geometric(1e-2, 0.3, 5), n: 20_000 },
            same: RatioCase { alpha: zoo::xy_plane(), beta: zoo::xy_plane(), d: 1.5, c1: 0.5, c2: 0.5, eps: geometric(0.1, 0.5, 5), n: 100_000 },
            line_plane_final_max: 0.2,
            ray_cusp_band: (0.85, 1.15),
        }
    }
}

/// Small-width closed form of the line/plane ratio: tube `2πC1²ε^(2d+1)/(2d+1)`
/// over slab `4πC2 ε^(d+2)/(d+2)`.
pub fn line_plane_ratio(d: f64, c1: f64, c2: f64, eps: f64) -> f64 {
    c1 * c1 / (2.0 * c2) * (d + 2.0) / (2.0 * d + 1.0) * eps.powf(d - 1.0)
}

fn curve(case: &RatioCase, seed: u64, key: u64) -> Result<VolumeCurve> {
    let (a, b) = (case.alpha.build()?, case.beta.build()?);
    Ok(volume_ratio_curve(&a, &b, case.d, case.c1, case.c2, &case.eps, case.n, derive_seed(seed, &[key]))?)
}

fn emit(run: &mut Run, name: &str, c: &VolumeCurve) -> Result<()> {
    run.csv(
        &format!("{name}.csv"),
        &["eps", "ratio", "half_width_ci", "hits", "denominator_hits"],
        c.entries.iter().map(|e| {
            vec![fmt_f64(e.eps), fmt_f64(e.volume), fmt_f64(e.half_width_ci), e.hits.to_string(), e.denominator_hits.map_or(String::new(), |h| h.to_string())]
        }),
    )?;
    run.plot(&format!("{name}.svg"), &Plot::Curve { curve: c, title: name, y_label: "volume ratio" })?;
    run.measure(format!("{name}/ratios"), c.values());
    Ok(())
}

pub fn run(run: &mut Run, config: &ExperimentConfig) -> Result<Value> {
    let (p, echo) = resolve::<VolumeRatioParams>(config)?;

    let lp = curve(&p.line_plane, config.seed, 0)?;
    emit(run, "line_plane", &lp)?;
    let increases = lp.increases();
    let all_within = increases.iter().all(|&i| lp.increase_within_ci(i));
    run.measure("line_plane/strictly_decreasing", increases.is_empty());
    run.check(
        "line-plane-monotone",
        "number of eps steps where the ratio does not decrease (each must lie within the CI)",
        increases.len(),
        "<= 1, within CI",
        Source::Literature,
        "dim α < dim β ⇒ Vol ratio → 0",
        increases.len() <= 1 && all_within,
    );
    let last = lp.entries.last().map_or(f64::NAN, |e| e.volume);
    run.check("line-plane-final", "ratio at the smallest eps", last, format!("< {}", p.line_plane_final_max), Source::Literature, "dim α < dim β ⇒ Vol ratio → 0", last < p.line_plane_final_max);
    let c = &p.line_plane;
    let worst = lp
        .entries
        .iter()
        .map(|e| {
            let exact = line_plane_ratio(c.d, c.c1, c.c2, e.eps);
            ((e.volume - exact).abs() - 3.0 * e.half_width_ci).max(0.0) / exact
        })
        .fold(0.0, f64::max);
    run.check(
        "line-plane-closed-form",
        "relative excess over 3 CI half-widths against the tube/slab closed form",
        worst,
        "<= 0.05",
        Source::Derived,
        "C1²(d+2) ε^(d-1) / (2 C2 (2d+1))",
        worst <= 0.05,
    );

    let rc = curve(&p.ray_cusp, config.seed, 1)?;
    emit(run, "ray_cusp", &rc)?;
    let (lo, hi) = p.ray_cusp_band;
    let tail: Vec<(f64, f64)> = rc.entries.iter().rev().take(2).map(|e| (e.volume - e.half_width_ci, e.volume + e.half_width_ci)).collect();
    let inside = tail.len() == 2 && tail.iter().all(|&(a, b)| a >= lo && b <= hi);
    run.check(
        "ray-cusp-limit",
        "CI intervals of the last two ratios",
        &tail,
        format!("within [{lo}, {hi}]"),
        Source::Literature,
        "ratio → 1, d ↓ 1",
        inside,
    );

    let same = curve(&p.same, config.seed, 2)?;
    emit(run, "same_germ", &same)?;
    let off = same.entries.iter().filter(|e| (e.volume - 1.0).abs() > e.half_width_ci).count();
    run.check("same-germ", "entries whose CI excludes 1", off, 0, Source::Trivial, "identical numerator and denominator", off == 0);
    Ok(echo)
}
