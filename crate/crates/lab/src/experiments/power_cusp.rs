use germlab::directions::{directions_for, DirectionalParams};
use germlab::germs::io::GermSpec;
use germlab::maps::{estimate_bilipschitz, DEGENERATION_FACTOR};
use germlab::rng::derive_seed;
use germlab::GermMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{dimension_row, pair_dimension, resolve, DIMENSION_HEADER};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::plot::{Plot, Series};
use crate::report::Source;
use crate::{fmt_f64, zoo, Run};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerCuspParams {
    /// `{x^2 + y^2 = z^6}`.
    pub v: GermSpec,
    /// `{x^2 + y^2 = z^2}`, the image of `v` under `map`.
    pub w: GermSpec,
    pub map: GermMap,
    pub directional: DirectionalParams,
    pub lipschitz_pairs: usize,
}

impl Default for PowerCuspParams {
    fn default() -> Self {
        PowerCuspParams {
            v: zoo::v_cusp(),
            w: zoo::w_cone(),
            map: GermMap::power(3, 2, 3).expect("valid power map"),
            directional: DirectionalParams::default(),
            lipschitz_pairs: 300,
        }
    }
}

pub fn run(run: &mut Run, config: &ExperimentConfig) -> Result<Value> {
    let (mut p, _) = resolve::<PowerCuspParams>(config)?;
    p.directional.seed = config.seed;
    let dp = &p.directional;
    let mut rows = Vec::new();
    let mut dims = Vec::new();
    for (i, spec) in [&p.v, &p.w].into_iter().enumerate() {
        let germ = spec.build()?;
        let est = directions_for(&germ, dp, derive_seed(config.seed, &[i as u64]))?;
        let (cap, dim) = pair_dimension(&est, &est, dp)?;
        rows.push(dimension_row(germ.label(), &dim, cap.len()));
        let file = if i == 0 { "directions_v" } else { "directions_w" };
        run.cloud_csv(&format!("{file}.csv"), &est.stable)?;
        let title = format!("D({})", germ.label());
        run.plot(&format!("{file}.svg"), &Plot::Directions { cloud: &est.stable, title: &title })?;
        run.measure(format!("{}/slope", germ.label()), dim.slope);
        dims.push(dim.dim);
    }
    run.csv("dimensions.csv", &DIMENSION_HEADER, rows)?;
    run.check("dim-V", "dim D(x^2+y^2=z^6)", dims[0], 0, Source::Literature, "D(V) = {±e_z}", dims[0] == 0);
    run.check("dim-W", "dim D(x^2+y^2=z^2)", dims[1], 1, Source::Literature, "D(W) is a pair of circles", dims[1] == 1);

    let lip = estimate_bilipschitz(&p.map, &dp.schedule, p.lipschitz_pairs, derive_seed(config.seed, &[3]))?;
    run.csv(
        "lipschitz_trend.csv",
        &["scale", "min_ratio", "max_ratio"],
        lip.min_ratio_trend.iter().map(|s| vec![fmt_f64(s.scale), fmt_f64(s.min_ratio), fmt_f64(s.max_ratio)]),
    )?;
    let trend = [Series::new("min ratio", lip.min_ratio_trend.iter().map(|s| (s.scale, s.min_ratio)).collect())];
    run.plot(
        "lipschitz_trend.svg",
        &Plot::Series { title: "minimum Lipschitz ratio per scale", x_label: "scale", y_label: "min ratio", log_x: true, log_y: true, series: &trend },
    )?;
    run.measure("lipschitz", &lip);
    run.check(
        "not-bi-lipschitz",
        "ratio of first to last per-scale minimum Lipschitz ratio",
        lip.drop_factor(),
        format!("> {DEGENERATION_FACTOR}"),
        Source::Derived,
        "d(z^3)/dz = 3z^2 vanishes at 0",
        lip.degenerates(),
    );
    Ok(serde_json::to_value(&p)?)
}
