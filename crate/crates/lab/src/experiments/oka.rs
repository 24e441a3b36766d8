use germlab::directions::{directions_for, DirectionalParams};
use germlab::rng::derive_seed;
use germlab::ScaleSchedule;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{dimension_row, pair_dimension, resolve, slug, DIMENSION_HEADER};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::plot::Plot;
use crate::report::Source;
use crate::{zoo, Run};

/// Piece labels, their sign regions and the index pairs to compare.
type Pieces = (Vec<String>, Vec<[i8; 3]>, Vec<(usize, usize)>);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OkaParams {
    /// Parameter values of the family; `t = 0` and `t = 1` carry expectations.
    pub t_values: Vec<f64>,
    pub directional: DirectionalParams,
}

impl Default for OkaParams {
    fn default() -> Self {
        OkaParams {
            t_values: vec![0.0, 1.0],
            directional: DirectionalParams { schedule: ScaleSchedule { eps0: 0.1, ratio: 0.5, count: 12 }, per_scale: 2000, ..Default::default() },
        }
    }
}

pub fn run(run: &mut Run, config: &ExperimentConfig) -> Result<Value> {
    let (mut p, _) = resolve::<OkaParams>(config)?;
    p.directional.seed = config.seed;
    let dp = &p.directional;
    let mut rows = Vec::new();
    for (ti, &t) in p.t_values.iter().enumerate() {
        // t = 0 splits into the four octant pieces S_i; t != 0 is tested on P_3, P_4
        let (labels, regions, pairs): Pieces = if t == 0.0 {
            let all = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j))).collect();
            ((1..=4).map(|i| format!("S{i}")).collect(), zoo::OKA_S_OCTANTS.to_vec(), all)
        } else {
            (vec!["P3".into(), "P4".into()], zoo::OKA_P_REGIONS[2..].to_vec(), vec![(0, 1)])
        };
        let estimates = labels
            .iter()
            .zip(&regions)
            .enumerate()
            .map(|(gi, (label, signs))| {
                let germ = zoo::oka(t, *signs, label).build()?;
                let est = directions_for(&germ, dp, derive_seed(config.seed, &[ti as u64, gi as u64]))?;
                run.measure(format!("t={t}/{label}/stable_size"), est.stable.len());
                run.cloud_csv(&format!("directions_t{ti}_{}.csv", slug(label)), &est.stable)?;
                Ok(est)
            })
            .collect::<Result<Vec<_>>>()?;
        for (i, j) in pairs {
            let name = format!("{}{}", labels[i], labels[j]);
            let (cap, dim) = pair_dimension(&estimates[i], &estimates[j], dp)?;
            run.measure(format!("t={t}/{name}/slope"), dim.slope);
            rows.push({
                let mut r = vec![crate::fmt_f64(t)];
                r.extend(dimension_row(&name, &dim, cap.len()));
                r
            });
            let title = format!("D({}) ∩ D({}), t = {t}", labels[i], labels[j]);
            run.plot(&format!("intersection_t{ti}_{}.svg", slug(&name)), &Plot::Directions { cloud: &cap, title: &title })?;
            let expected = if t == 0.0 {
                Some((0, "dim(D(S_i) ∩ D(S_j)) = 0 for i != j"))
            } else if t == 1.0 {
                Some((1, "dim(D(P_3) ∩ D(P_4)) = 1"))
            } else {
                None
            };
            match expected {
                Some((e, anchor)) => run.check(
                    format!("t={t}/{name}"),
                    format!("dim(D({}) ∩ D({})) for t = {t}", labels[i], labels[j]),
                    dim.dim,
                    e,
                    Source::Literature,
                    anchor,
                    dim.dim == e,
                ),
                None => run.measure(format!("t={t}/{name}/dim"), dim.dim),
            }
        }
    }
    let mut header = vec!["t"];
    header.extend(DIMENSION_HEADER);
    run.csv("pairs.csv", &header, rows)?;
    Ok(serde_json::to_value(&p)?)
}
