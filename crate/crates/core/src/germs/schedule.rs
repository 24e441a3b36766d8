use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Geometric radii `eps0 * ratio^k`, `k = 0..count`, probing a germ at shrinking scales.
/// Annulus `k` is `eps0*ratio^(k+1) < |x| <= eps0*ratio^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleSchedule {
    pub eps0: f64,
    pub ratio: f64,
    pub count: usize,
}

impl Default for ScaleSchedule {
    fn default() -> Self {
        ScaleSchedule { eps0: 0.1, ratio: 0.5, count: 12 }
    }
}

impl ScaleSchedule {
    pub fn new(eps0: f64, ratio: f64, count: usize) -> Result<Self> {
        let s = ScaleSchedule { eps0, ratio, count };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps0 > 0.0 && self.eps0.is_finite()) {
            return Err(invalid(format!("eps0 must be positive, got {}", self.eps0)));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(invalid(format!("ratio must lie in (0,1), got {}", self.ratio)));
        }
        if self.count == 0 {
            return Err(invalid("schedule count must be positive"));
        }
        if self.inner(self.count - 1) <= 0.0 {
            return Err(invalid("schedule underflows to zero"));
        }
        Ok(())
    }

    /// Outer radius of annulus `k`.
    pub fn radius(&self, k: usize) -> f64 {
        self.eps0 * self.ratio.powi(k as i32)
    }

    /// Inner radius of annulus `k`.
    pub fn inner(&self, k: usize) -> f64 {
        self.radius(k + 1)
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.radius(k)).collect()
    }

    /// Index of the annulus containing radius `r`, if any.
    pub fn scale_of(&self, r: f64) -> Option<usize> {
        if !(r > 0.0) || r > self.eps0 {
            return None;
        }
        let guess = ((r / self.eps0).ln() / self.ratio.ln()).floor();
        if !guess.is_finite() || guess < 0.0 {
            return if r > self.inner(0) { Some(0) } else { None };
        }
        let g = guess as usize;
        (g.saturating_sub(1)..=g + 1).find(|&k| k < self.count && r > self.inner(k) && r <= self.radius(k))
    }
}

/// Points of a germ found in one annulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSample {
    pub scale_index: usize,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub points: Vec<Vec<f64>>,
}

impl AnnulusSample {
    pub fn empty(schedule: &ScaleSchedule, k: usize) -> Self {
        AnnulusSample { scale_index: k, inner_radius: schedule.inner(k), outer_radius: schedule.radius(k), points: Vec::new() }
    }

    pub fn contains_radius(&self, r: f64) -> bool {
        r > self.inner_radius && r <= self.outer_radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_lookup_matches_bounds() {
        let s = ScaleSchedule::default();
        for k in 0..s.count {
            let mid = (s.inner(k) * s.radius(k)).sqrt();
            assert_eq!(s.scale_of(mid), Some(k));
            assert_eq!(s.scale_of(s.radius(k)), Some(k));
        }
        assert_eq!(s.scale_of(0.2), None);
        assert_eq!(s.scale_of(s.inner(s.count - 1)), None);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ScaleSchedule::new(0.1, 1.0, 3).is_err());
        assert!(ScaleSchedule::new(-1.0, 0.5, 3).is_err());
        assert!(ScaleSchedule::new(0.1, 0.5, 0).is_err());
    }
}
