//! JSON germ descriptions and CSV cloud serialization.
//!
//! ```json
//! {"kind": "semialgebraic", "ambient_dim": 3,
//!  "equations": [[{"coeff": 1, "exps": [2,0,0]}, {"coeff": -1, "exps": [0,0,2]}]],
//!  "inequalities": [{"poly": [{"coeff": 1, "exps": [1,0,0]}], "sign": ">"}]}
//! {"kind": "arc", "coords": ["t", "(pow t 2)"], "t_max": 1.0}
//! {"kind": "cone", "ambient_dim": 2, "base": [[1, 0]]}
//! {"kind": "cloud", "ambient_dim": 2, "annuli": [{"scale_index": 0, "inner_radius": 0.05, "outer_radius": 0.1, "points": [[0.07, 0]]}]}
//! ```

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{AnnulusSample, GermBody, Monomial, Polynomial, ScaleSchedule, SetGerm, Sign};
use crate::error::{invalid, Error, Result};
use crate::sphere::SphericalCloud;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalitySpec {
    pub poly: Vec<Monomial>,
    pub sign: Sign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GermSpec {
    Semialgebraic {
        ambient_dim: usize,
        #[serde(default)]
        equations: Vec<Vec<Monomial>>,
        #[serde(default)]
        inequalities: Vec<InequalitySpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    Arc {
        coords: Vec<String>,
        t_max: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    Cone {
        ambient_dim: usize,
        base: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    Cloud {
        ambient_dim: usize,
        annuli: Vec<AnnulusSample>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
}

impl GermSpec {
    pub fn build(&self) -> Result<SetGerm> {
        let (germ, label) = match self {
            GermSpec::Semialgebraic { ambient_dim, equations, inequalities, label } => {
                let eqs = equations.iter().map(|t| Polynomial::new(*ambient_dim, t.clone())).collect::<Result<Vec<_>>>()?;
                let ineqs = inequalities
                    .iter()
                    .map(|i| Ok((Polynomial::new(*ambient_dim, i.poly.clone())?, i.sign)))
                    .collect::<Result<Vec<_>>>()?;
                (SetGerm::semialgebraic(*ambient_dim, eqs, ineqs)?, label)
            }
            GermSpec::Arc { coords, t_max, label } => {
                let exprs = coords.iter().map(|c| c.parse()).collect::<Result<Vec<_>>>()?;
                (SetGerm::arc(exprs, *t_max)?, label)
            }
            GermSpec::Cone { ambient_dim, base, label } => {
                (SetGerm::cone_over(SphericalCloud::from_directions(*ambient_dim, base, "json")?)?, label)
            }
            GermSpec::Cloud { ambient_dim, annuli, label } => (SetGerm::cloud(*ambient_dim, annuli.clone())?, label),
        };
        Ok(match label {
            Some(l) => germ.with_label(l.clone()),
            None => germ,
        })
    }

    /// Describes an existing germ (arc coordinates are written back in prefix form).
    pub fn from_germ(germ: &SetGerm) -> GermSpec {
        let label = (!germ.label().is_empty()).then(|| germ.label().to_string());
        let dim = germ.ambient_dim();
        match germ.body() {
            GermBody::Semialgebraic(s) => GermSpec::Semialgebraic {
                ambient_dim: dim,
                equations: s.equations.iter().map(|p| p.terms().to_vec()).collect(),
                inequalities: s.inequalities.iter().map(|(p, sign)| InequalitySpec { poly: p.terms().to_vec(), sign: *sign }).collect(),
                label,
            },
            GermBody::Arc(a) => GermSpec::Arc { coords: a.coords.iter().map(|e| e.to_string()).collect(), t_max: a.t_max, label },
            GermBody::Cone(base) => GermSpec::Cone { ambient_dim: dim, base: base.vectors().to_vec(), label },
            GermBody::Cloud(annuli) => GermSpec::Cloud { ambient_dim: dim, annuli: annuli.clone(), label },
        }
    }
}

pub fn germ_from_json(text: &str) -> Result<SetGerm> {
    serde_json::from_str::<GermSpec>(text)?.build()
}

pub fn germ_to_json(germ: &SetGerm) -> Result<String> {
    Ok(serde_json::to_string_pretty(&GermSpec::from_germ(germ))?)
}

/// Rows `scale_index, x1, ..., xn` for every stored point of a Cloud germ.
pub fn write_cloud_csv<W: Write>(germ: &SetGerm, w: W) -> Result<()> {
    let GermBody::Cloud(annuli) = germ.body() else {
        return Err(Error::Unsupported("CSV export of a non-cloud germ".into()));
    };
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["scale_index".to_string()];
    header.extend((1..=germ.ambient_dim()).map(|i| format!("x{i}")));
    wtr.write_record(&header)?;
    for a in annuli {
        for p in &a.points {
            let mut row = vec![a.scale_index.to_string()];
            row.extend(p.iter().map(|v| format!("{v:.17e}")));
            wtr.write_record(&row)?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a cloud written by [`write_cloud_csv`]; annulus radii come from `schedule`.
pub fn read_cloud_csv<R: Read>(r: R, schedule: &ScaleSchedule) -> Result<SetGerm> {
    let mut rdr = csv::Reader::from_reader(r);
    let dim = rdr.headers()?.len().checked_sub(1).filter(|&d| d > 0).ok_or_else(|| invalid("cloud CSV needs scale_index and coordinates"))?;
    let mut annuli: Vec<AnnulusSample> = (0..schedule.count).map(|k| AnnulusSample::empty(schedule, k)).collect();
    for rec in rdr.records() {
        let rec = rec?;
        let k: usize = rec[0].trim().parse().map_err(|e| Error::Parse(format!("scale_index: {e}")))?;
        let p = rec
            .iter()
            .skip(1)
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        annuli.get_mut(k).ok_or_else(|| invalid(format!("scale_index {k} outside the schedule")))?.points.push(p);
    }
    SetGerm::cloud(dim, annuli)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip() {
        let text = r#"{"kind":"semialgebraic","ambient_dim":3,
            "equations":[[{"coeff":1,"exps":[2,0,0]},{"coeff":1,"exps":[0,2,0]},{"coeff":-1,"exps":[0,0,6]}]],
            "inequalities":[{"poly":[{"coeff":1,"exps":[0,0,1]}],"sign":">"}],"label":"V+"}"#;
        let g = germ_from_json(text).unwrap();
        assert_eq!(g.label(), "V+");
        let back = germ_from_json(&germ_to_json(&g).unwrap()).unwrap();
        assert_eq!(GermSpec::from_germ(&back), GermSpec::from_germ(&g));
        let arc = germ_from_json(r#"{"kind":"arc","coords":["t","(pow t 2)"],"t_max":1}"#).unwrap();
        assert_eq!(arc.kind(), "arc");
        assert!(germ_from_json(r#"{"kind":"cone","ambient_dim":2,"base":[]}"#).is_err());
    }
}
