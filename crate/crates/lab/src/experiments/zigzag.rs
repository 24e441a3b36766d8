use germlab::directions::DirectionalParams;
use germlab::germs::io::GermSpec;
use germlab::maps::{estimate_bilipschitz, DEGENERATION_FACTOR};
use germlab::rng::derive_seed;
use germlab::GermMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{mapped_pair, resolve};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::Source;
use crate::{zoo, Run};

/// Angle between the two rays.
pub const RAY_ANGLE: f64 = 0.05;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZigzagParams {
    pub a: GermSpec,
    pub b: GermSpec,
    pub map: GermMap,
    pub directional: DirectionalParams,
    pub lipschitz_pairs: usize,
}

impl Default for ZigzagParams {
    fn default() -> Self {
        ZigzagParams {
            a: zoo::ray2(0.0, "A"),
            b: zoo::ray2(RAY_ANGLE, "B"),
            map: GermMap::zigzag(),
            // below half the ray angle, so the rays stay apart before the map
            directional: DirectionalParams { angular_tol: 0.025, ..Default::default() },
            lipschitz_pairs: 300,
        }
    }
}

pub fn run(run: &mut Run, config: &ExperimentConfig) -> Result<Value> {
    let (mut p, _) = resolve::<ZigzagParams>(config)?;
    p.directional.seed = config.seed;
    let (a, b) = (p.a.build()?, p.b.build()?);
    let pair = mapped_pair(&p.map, &a, &b, &p.directional)?;
    pair.emit(run)?;
    run.check("pre-dim", "dim(D(A) ∩ D(B)) for two rays at a small angle", pair.pre.dim(), -1, Source::Literature, "dim(D(A) ∩ D(B)) = -1", pair.pre.dim() == -1);
    run.check("post-dim", "dim(D(h(A)) ∩ D(h(B)))", pair.post.dim(), 1, Source::Literature, "dim(D(h(A)) ∩ D(h(B))) = 1", pair.post.dim() == 1);
    let lip = estimate_bilipschitz(&p.map, &p.directional.schedule, p.lipschitz_pairs, derive_seed(config.seed, &[3]))?;
    run.measure("lipschitz", &lip);
    run.check(
        "bi-lipschitz",
        "ratio of first to last per-scale minimum Lipschitz ratio",
        lip.drop_factor(),
        format!("<= {DEGENERATION_FACTOR}"),
        Source::Derived,
        "the shear (x, y + f(x)) with |f'| bounded is bi-Lipschitz",
        !lip.degenerates(),
    );
    Ok(serde_json::to_value(&p)?)
}
