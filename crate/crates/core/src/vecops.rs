//! Small helpers on `&[f64]` vectors.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    // hypot-style scaling keeps tiny vectors (|x| ~ 1e-200) from underflowing
    let m = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    let s: f64 = a.iter().map(|v| (v / m) * (v / m)).sum();
    m * s.sqrt()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    let m = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    let s: f64 = a.iter().zip(b).map(|(x, y)| ((x - y) / m).powi(2)).sum();
    m * s.sqrt()
}

#[inline]
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// Unit vector in the direction of `a`, or `None` for the zero vector.
pub fn normalize(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n == 0.0 || !n.is_finite() {
        return None;
    }
    let mut u: Vec<f64> = a.iter().map(|x| x / n).collect();
    // one correction pass so that | |u| - 1 | sits at rounding level
    let n2 = norm(&u);
    u.iter_mut().for_each(|x| *x /= n2);
    Some(u)
}

/// Angle between two unit vectors, accurate for both tiny and near-π angles.
pub fn angle_between(u: &[f64], v: &[f64]) -> f64 {
    let d: f64 = dist(u, v);
    let s: f64 = {
        let m = u.iter().zip(v).fold(0.0f64, |m, (x, y)| m.max((x + y).abs()));
        if m == 0.0 {
            0.0
        } else {
            m * u.iter().zip(v).map(|(x, y)| ((x + y) / m).powi(2)).sum::<f64>().sqrt()
        }
    };
    2.0 * d.atan2(s)
}

/// Chord length between unit vectors separated by `angle`.
#[inline]
pub fn chord(angle: f64) -> f64 {
    2.0 * (angle.min(std::f64::consts::PI) / 2.0).sin()
}

/// Angle subtended by a chord of length `c` between unit vectors.
#[inline]
pub fn chord_to_angle(c: f64) -> f64 {
    2.0 * (c / 2.0).clamp(0.0, 1.0).asin()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_small_and_large() {
        let a = [1.0, 0.0];
        let b = [1e-9f64.cos(), 1e-9f64.sin()];
        assert!((angle_between(&a, &b) - 1e-9).abs() < 1e-20);
        let c = [-1.0, 0.0];
        assert!((angle_between(&a, &c) - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn norm_survives_tiny_vectors() {
        let v = [3e-200, 4e-200];
        assert!((norm(&v) / 5e-200 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chord_roundtrip() {
        for a in [0.01, 0.5, 2.0, 3.0] {
            assert!((chord_to_angle(chord(a)) - a).abs() < 1e-12);
        }
    }
}
