use germlab::directions::DirectionalParams;
use germlab::germs::io::GermSpec;
use germlab::germs::Sign;
use germlab::GermMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{dimension_row, mapped_pair, resolve, slug, DIMENSION_HEADER};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::Source;
use crate::{zoo, Run};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairCase {
    pub a: GermSpec,
    pub b: GermSpec,
    pub maps: Vec<GermMap>,
    /// Overrides the shared angular tolerance for this case.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angular_tol: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MainTheoremParams {
    pub directional: DirectionalParams,
    /// Maps with subanalytic images of both germs: dimensions must agree.
    pub invariant: Vec<PairCase>,
    /// Maps with non-subanalytic images: dimensions must differ.
    pub witnesses: Vec<PairCase>,
}

impl Default for MainTheoremParams {
    fn default() -> Self {
        let case = |a, b, maps| PairCase { a, b, maps, angular_tol: None };
        let x_ray = || zoo::ray2(0.0, "x-ray");
        let left_parabola = GermSpec::Arc { coords: vec!["(- t)".into(), "(pow t 2)".into()], t_max: 1.0, label: Some("left parabola".into()) };
        let plane_maps = || vec![zoo::shear2(), zoo::scaling2(2.0)];
        MainTheoremParams {
            directional: DirectionalParams { per_scale: 1000, ..Default::default() },
            invariant: vec![
                case(x_ray(), zoo::parabola(), plane_maps()),
                case(x_ray(), zoo::ray2(1.0, "ray 1.0"), plane_maps()),
                case(zoo::parabola(), zoo::cusp_arc(), plane_maps()),
                case(zoo::ray2(std::f64::consts::PI, "left ray"), left_parabola, vec![GermMap::zigzag()]),
                case(zoo::v_cusp(), zoo::w_cone(), vec![zoo::linear3()]),
                case(zoo::w_cone(), zoo::w_perturbed(), vec![zoo::linear3()]),
                case(zoo::z_ray(), zoo::cusp_surface(), vec![zoo::linear3()]),
                case(zoo::half_plane(Sign::Positive), zoo::xy_plane(), vec![zoo::linear3()]),
            ],
            witnesses: vec![
                case(x_ray(), zoo::ray2(1.0, "ray 1.0"), vec![GermMap::Spiral]),
                PairCase { a: x_ray(), b: zoo::ray2(0.05, "ray 0.05"), maps: vec![GermMap::zigzag()], angular_tol: Some(0.025) },
            ],
        }
    }
}

pub fn run(run: &mut Run, config: &ExperimentConfig) -> Result<Value> {
    let (mut p, _) = resolve::<MainTheoremParams>(config)?;
    p.directional.seed = config.seed;
    let mut rows = Vec::new();
    for (cases, equal) in [(&p.invariant, true), (&p.witnesses, false)] {
        for (ci, case) in cases.iter().enumerate() {
            let (a, b) = (case.a.build()?, case.b.build()?);
            let dp = DirectionalParams { angular_tol: case.angular_tol.unwrap_or(p.directional.angular_tol), ..p.directional.clone() };
            for (mi, map) in case.maps.iter().enumerate() {
                let pair = mapped_pair(map, &a, &b, &dp)?;
                let name = format!("{} / {} under {}", a.label(), b.label(), map.name());
                rows.push(dimension_row(&format!("{name} (pre)"), &pair.pre.dimension, pair.pre.intersection.len()));
                rows.push(dimension_row(&format!("{name} (post)"), &pair.post.dimension, pair.post.intersection.len()));
                let dims = (pair.pre.dim(), pair.post.dim());
                if equal {
                    run.check(
                        format!("invariant/{ci}.{mi}/{}", slug(&name)),
                        "(dim before, dim after) for a map with subanalytic images",
                        dims,
                        "equal",
                        Source::Literature,
                        "dim(D(h(A)) ∩ D(h(B))) = dim(D(A) ∩ D(B))",
                        dims.0 == dims.1,
                    );
                } else {
                    run.check(
                        format!("witness/{ci}.{mi}/{}", slug(&name)),
                        "(dim before, dim after) for a map with non-subanalytic images",
                        dims,
                        "different",
                        Source::Literature,
                        "h(A), h(B) not subanalytic ⇒ dims may differ",
                        dims.0 != dims.1,
                    );
                }
            }
        }
    }
    run.csv("dimensions.csv", &DIMENSION_HEADER, rows)?;
    Ok(serde_json::to_value(&p)?)
}
