//! Finite sets of unit vectors.

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

use crate::error::{invalid, Error, Result};
use crate::kdtree::KdTree;
use crate::vecops;

/// A finite set of unit vectors in `ambient_dim` dimensions; may be empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalCloud {
    ambient_dim: usize,
    vectors: Vec<Vec<f64>>,
    #[serde(default)]
    provenance: String,
}

/// Tolerance on `| |v| - 1 |` for stored vectors.
pub const UNIT_TOL: f64 = 1e-12;

impl SphericalCloud {
    /// Validates that every vector has the right length and unit norm.
    pub fn new(ambient_dim: usize, vectors: Vec<Vec<f64>>, provenance: impl Into<String>) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(invalid("ambient dimension must be positive"));
        }
        for v in &vectors {
            if v.len() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, got: v.len() });
            }
            let n = vecops::norm(v);
            if !((n - 1.0).abs() <= UNIT_TOL) {
                return Err(invalid(format!("vector {v:?} has norm {n}, expected 1")));
            }
        }
        Ok(SphericalCloud { ambient_dim, vectors, provenance: provenance.into() })
    }

    /// Normalizes nonzero inputs; zero vectors are dropped.
    pub fn from_directions<P: AsRef<[f64]>>(ambient_dim: usize, points: &[P], provenance: impl Into<String>) -> Result<Self> {
        let mut vectors = Vec::with_capacity(points.len());
        for p in points {
            let p = p.as_ref();
            if p.len() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, got: p.len() });
            }
            if let Some(u) = vecops::normalize(p) {
                vectors.push(u);
            }
        }
        Self::new(ambient_dim, vectors, provenance)
    }

    pub fn empty(ambient_dim: usize, provenance: impl Into<String>) -> Self {
        SphericalCloud { ambient_dim, vectors: Vec::new(), provenance: provenance.into() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn tree(&self) -> KdTree {
        KdTree::build(self.ambient_dim, &self.vectors)
    }

    /// Greedy thinning in input order: a vector is kept unless an earlier kept
    /// vector lies within angle `tol`. Kept vectors are pairwise farther than
    /// `tol` apart and every input vector is within `tol` of a kept one.
    pub fn dedup(&self, tol: f64) -> SphericalCloud {
        let tree = self.tree();
        let r = vecops::chord(tol);
        let mut removed = vec![false; self.len()];
        let mut kept = Vec::new();
        for i in 0..self.len() {
            if removed[i] {
                continue;
            }
            kept.push(self.vectors[i].clone());
            for j in tree.within(&self.vectors[i], r) {
                removed[j] = true;
            }
        }
        SphericalCloud { ambient_dim: self.ambient_dim, vectors: kept, provenance: self.provenance.clone() }
    }

    /// Angle from `u` to the nearest stored vector (`None` if empty).
    pub fn nearest_angle(&self, tree: &KdTree, u: &[f64]) -> Option<f64> {
        tree.nearest(u).map(|(_, c)| vecops::chord_to_angle(c))
    }

    /// One row per vector: `x1,...,xn`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let header: Vec<String> = (1..=self.ambient_dim).map(|i| format!("x{i}")).collect();
        wtr.write_record(&header)?;
        for v in &self.vectors {
            wtr.write_record(v.iter().map(|x| format!("{x:.17e}")))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, provenance: impl Into<String>) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let dim = rdr.headers()?.len();
        let mut vectors = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let v = rec
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            vectors.push(v);
        }
        Self::from_directions(dim, &vectors, provenance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_unit() {
        assert!(SphericalCloud::new(2, vec![vec![1.0, 1.0]], "").is_err());
        assert!(SphericalCloud::new(2, vec![vec![0.6, 0.8]], "").is_ok());
    }

    #[test]
    fn dedup_spacing() {
        let pts: Vec<Vec<f64>> = (0..1000).map(|i| {
            let a = i as f64 * 0.001;
            vec![a.cos(), a.sin()]
        }).collect();
        let c = SphericalCloud::new(2, pts, "arc").unwrap();
        let d = c.dedup(0.05);
        assert!(d.len() >= 19 && d.len() <= 21, "{}", d.len());
        let tree = d.tree();
        for v in c.vectors() {
            assert!(d.nearest_angle(&tree, v).unwrap() <= 0.05 + 1e-12);
        }
    }

    #[test]
    fn csv_roundtrip() {
        let c = SphericalCloud::new(3, vec![vec![0.0, 0.6, 0.8], vec![1.0, 0.0, 0.0]], "t").unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let back = SphericalCloud::read_csv(&buf[..], "t").unwrap();
        assert_eq!(back, c);
    }
}
