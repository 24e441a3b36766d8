//! Experiment registry and helpers shared by the experiments.

mod main_theorem;
mod oka;
mod power_cusp;
mod spiral;
mod ssp_suite;
mod st_props;
mod volume_ratios;
mod zigzag;

use germlab::directions::{
    directional_report, estimate_dimension, intersect_direction_sets, DimensionReport, DirectionEstimate, DirectionalParams, DirectionalReport,
};
use germlab::germs::sample_germ;
use germlab::maps::pushforward;
use germlab::rng::derive_seed;
use germlab::{GermMap, SetGerm, SphericalCloud};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::Run;

type Body = fn(&mut Run, &ExperimentConfig) -> Result<Value>;

/// Experiment names with one-line descriptions.
pub const EXPERIMENTS: [(&str, &str); 8] = [
    ("oka", "directional dimensions of the octant pieces of f_t = x^8+y^16+z^16+t x^5z^2+x^3yz^3"),
    ("spiral", "two rays before and after the log-spiral homeomorphism"),
    ("zigzag", "two close rays before and after the zigzag shear"),
    ("power-cusp", "direction sets of x^2+y^2=z^6 and its image x^2+y^2=z^2 under z -> z^3"),
    ("volume-ratios", "Monte Carlo sea-tangle volume ratio curves"),
    ("st-props", "sea-tangle property suite over the test germs"),
    ("ssp-suite", "sequence selection property on sequences, cones and mapped cones"),
    ("main-theorem-suite", "directional dimension before and after maps with subanalytic images"),
];

pub(crate) fn lookup(name: &str) -> Option<Body> {
    Some(match name {
        "oka" => oka::run,
        "spiral" => spiral::run,
        "zigzag" => zigzag::run,
        "power-cusp" => power_cusp::run,
        "volume-ratios" => volume_ratios::run,
        "st-props" => st_props::run,
        "ssp-suite" => ssp_suite::run,
        "main-theorem-suite" => main_theorem::run,
        _ => return None,
    })
}

/// Typed parameters plus their fully resolved JSON echo.
fn resolve<P: DeserializeOwned + Default + Serialize>(config: &ExperimentConfig) -> Result<(P, Value)> {
    let p: P = config.params()?;
    let echo = serde_json::to_value(&p)?;
    Ok((p, echo))
}

/// Intersection of two estimated direction sets and its dimension.
fn pair_dimension(a: &DirectionEstimate, b: &DirectionEstimate, params: &DirectionalParams) -> Result<(SphericalCloud, DimensionReport)> {
    let cap = intersect_direction_sets(&a.stable, &b.stable, params.angular_tol)?;
    let dim = estimate_dimension(&cap, &params.caps)?;
    Ok((cap, dim))
}

fn dimension_row(label: &str, dim: &DimensionReport, size: usize) -> Vec<String> {
    vec![label.to_string(), dim.dim.to_string(), crate::fmt_f64(dim.slope), size.to_string()]
}

const DIMENSION_HEADER: [&str; 4] = ["pair", "dim", "slope", "intersection_size"];

/// Directional reports of a germ pair before and after a map (images as pushed-forward samples).
struct MappedPair {
    pre: DirectionalReport,
    post: DirectionalReport,
}

fn mapped_pair(map: &GermMap, a: &SetGerm, b: &SetGerm, params: &DirectionalParams) -> Result<MappedPair> {
    let pre = directional_report(a, b, params)?;
    let (s, per) = (&params.schedule, params.per_scale);
    let ha = pushforward(map, &sample_germ(a, s, per, derive_seed(params.seed, &[7, 0]))?)?;
    let hb = pushforward(map, &sample_germ(b, s, per, derive_seed(params.seed, &[7, 1]))?)?;
    let post = directional_report(&ha, &hb, params)?;
    Ok(MappedPair { pre, post })
}

impl MappedPair {
    /// Writes the stage table and direction clouds of both stages.
    fn emit(&self, run: &mut Run) -> Result<()> {
        let rows = [("pre", &self.pre), ("post", &self.post)].map(|(stage, r)| dimension_row(stage, &r.dimension, r.intersection.len()));
        run.csv("dimensions.csv", &DIMENSION_HEADER, rows)?;
        for (stage, r) in [("pre", &self.pre), ("post", &self.post)] {
            run.cloud_csv(&format!("{stage}_directions_a.csv"), &r.a.stable)?;
            run.cloud_csv(&format!("{stage}_directions_b.csv"), &r.b.stable)?;
            run.cloud_csv(&format!("{stage}_intersection.csv"), &r.intersection)?;
            let title = format!("{stage}: D(A) ∩ D(B)");
            run.plot(&format!("{stage}_intersection.svg"), &crate::plot::Plot::Directions { cloud: &r.intersection, title: &title })?;
        }
        run.measure("pre/slope", self.pre.dimension.slope);
        run.measure("post/slope", self.post.dimension.slope);
        Ok(())
    }
}

/// Tag for filenames: lowercase alphanumerics and dashes.
fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_matches('-').to_string()
}

/// Largest angle from a grid of `n` equally spaced plane directions to the nearest cloud point.
fn circle_gap(cloud: &SphericalCloud, n: usize) -> f64 {
    if cloud.is_empty() {
        return std::f64::consts::PI;
    }
    let tree = cloud.tree();
    (0..n)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / n as f64;
            cloud.nearest_angle(&tree, &[a.cos(), a.sin()]).unwrap_or(std::f64::consts::PI)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs_are_filename_safe() {
        assert_eq!(slug("half-plane x>0"), "half-plane-x-0");
        assert_eq!(slug("W x>0"), "w-x-0");
    }

    #[test]
    fn every_listed_experiment_resolves() {
        for (name, _) in EXPERIMENTS {
            assert!(lookup(name).is_some(), "{name}");
        }
        assert!(lookup("nope").is_none());
    }
}
