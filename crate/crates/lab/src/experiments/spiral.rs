use germlab::directions::{directed_hausdorff, DirectionalParams};
use germlab::germs::io::GermSpec;
use germlab::maps::{estimate_bilipschitz, DEGENERATION_FACTOR};
use germlab::rng::derive_seed;
use germlab::GermMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{circle_gap, mapped_pair, resolve};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::Source;
use crate::{zoo, Run};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpiralParams {
    pub a: GermSpec,
    pub b: GermSpec,
    pub map: GermMap,
    pub directional: DirectionalParams,
    /// Every cap of this angular radius must hold an image direction.
    pub density_cap: f64,
    /// Number of equally spaced cap centres on the circle.
    pub density_grid: usize,
    pub lipschitz_pairs: usize,
}

impl Default for SpiralParams {
    fn default() -> Self {
        SpiralParams {
            a: zoo::ray2(0.0, "A"),
            b: zoo::ray2(1.0, "B"),
            map: GermMap::Spiral,
            directional: DirectionalParams::default(),
            density_cap: 0.05,
            density_grid: 3600,
            lipschitz_pairs: 300,
        }
    }
}

pub fn run(run: &mut Run, config: &ExperimentConfig) -> Result<Value> {
    let (mut p, _) = resolve::<SpiralParams>(config)?;
    p.directional.seed = config.seed;
    let dp = &p.directional;
    let (a, b) = (p.a.build()?, p.b.build()?);
    let pair = mapped_pair(&p.map, &a, &b, dp)?;
    pair.emit(run)?;

    run.check("pre-dim", "dim(D(A) ∩ D(B)) for two distinct rays", pair.pre.dim(), -1, Source::Trivial, "distinct rays have disjoint direction sets", pair.pre.dim() == -1);
    run.check("post-dim", "dim(D(h(A)) ∩ D(h(B)))", pair.post.dim(), 1, Source::Literature, "D(h(A)) = D(h(B)) = S^1", pair.post.dim() == 1);
    for (id, cloud) in [("density-h(A)", &pair.post.a.stable), ("density-h(B)", &pair.post.b.stable), ("density-intersection", &pair.post.intersection)] {
        let gap = circle_gap(cloud, p.density_grid);
        run.check(
            id,
            format!("largest angle from a {}-point circle grid to the cloud", p.density_grid),
            gap,
            format!("<= {}", p.density_cap),
            Source::Literature,
            "D(h(A)) = D(h(B)) = S^1",
            gap <= p.density_cap,
        );
    }

    let lip = estimate_bilipschitz(&p.map, &dp.schedule, p.lipschitz_pairs, derive_seed(config.seed, &[3]))?;
    run.measure("lipschitz", &lip);
    run.check(
        "bi-lipschitz",
        "ratio of first to last per-scale minimum Lipschitz ratio",
        lip.drop_factor(),
        format!("<= {DEGENERATION_FACTOR}"),
        Source::Derived,
        "the log-spiral has bounded derivative and inverse derivative",
        !lip.degenerates(),
    );

    // h(A) and h(B) share every direction while A and B share none
    let into_b_after = directed_hausdorff(&pair.post.a.stable, &pair.post.b.stable);
    let into_b_before = directed_hausdorff(&pair.pre.a.stable, &pair.pre.b.stable);
    run.check(
        "image-inclusion",
        "largest angle from D(h(A)) to D(h(B))",
        into_b_after,
        format!("<= {}", dp.angular_tol),
        Source::Literature,
        "D(h(A)) ⊂ D(h(B))",
        into_b_after <= dp.angular_tol,
    );
    run.check(
        "preimage-non-inclusion",
        "largest angle from D(A) to D(B)",
        into_b_before,
        format!("> {}", dp.angular_tol),
        Source::Trivial,
        "D(A) ⊄ D(B) for distinct rays",
        into_b_before > dp.angular_tol,
    );
    Ok(serde_json::to_value(&p)?)
}
