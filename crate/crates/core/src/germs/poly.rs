use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

use crate::error::{invalid, Error, Result};

/// One term `coeff * x1^e1 * ... * xn^en`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    pub exps: Vec<u32>,
}

/// Real polynomial in `ambient_dim` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    ambient_dim: usize,
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(ambient_dim: usize, terms: Vec<Monomial>) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(invalid("polynomial needs at least one variable"));
        }
        let mut seen = BTreeSet::new();
        for t in &terms {
            if t.exps.len() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, got: t.exps.len() });
            }
            if !t.coeff.is_finite() {
                return Err(invalid("non-finite coefficient"));
            }
            if !seen.insert(t.exps.clone()) {
                return Err(invalid(format!("repeated exponent tuple {:?}", t.exps)));
            }
        }
        Ok(Polynomial { ambient_dim, terms })
    }

    /// Convenience constructor from `(coeff, exps)` pairs.
    pub fn from_terms(ambient_dim: usize, terms: &[(f64, &[u32])]) -> Result<Self> {
        Self::new(ambient_dim, terms.iter().map(|(c, e)| Monomial { coeff: *c, exps: e.to_vec() }).collect())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.exps.iter().sum::<u32>()).max().unwrap_or(0)
    }

    /// True when every term has total degree at most one.
    pub fn is_affine(&self) -> bool {
        self.degree() <= 1
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff * t.exps.iter().zip(x).map(|(&e, &v)| v.powi(e as i32)).product::<f64>())
            .sum()
    }

    /// Value and gradient at `x`.
    pub fn eval_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut val = 0.0;
        let mut pows = vec![0.0; self.ambient_dim];
        for t in &self.terms {
            for (i, (&e, &v)) in t.exps.iter().zip(x).enumerate() {
                pows[i] = v.powi(e as i32);
            }
            val += t.coeff * pows.iter().product::<f64>();
            for i in 0..self.ambient_dim {
                let e = t.exps[i];
                if e == 0 {
                    continue;
                }
                let mut p = t.coeff * e as f64 * x[i].powi(e as i32 - 1);
                for (j, pj) in pows.iter().enumerate() {
                    if j != i {
                        p *= pj;
                    }
                }
                grad[i] += p;
            }
        }
        val
    }

    /// Row-major Hessian at `x` (length `n * n`).
    pub fn eval_hessian(&self, x: &[f64]) -> Vec<f64> {
        let n = self.ambient_dim;
        let mut h = vec![0.0; n * n];
        let mut e = vec![0u32; n];
        for t in &self.terms {
            for i in 0..n {
                for j in i..n {
                    e.copy_from_slice(&t.exps);
                    let mut c = t.coeff;
                    for k in [i, j] {
                        if e[k] == 0 {
                            c = 0.0;
                            break;
                        }
                        c *= e[k] as f64;
                        e[k] -= 1;
                    }
                    if c == 0.0 {
                        continue;
                    }
                    let v = c * e.iter().zip(x).map(|(&ek, &xk)| xk.powi(ek as i32)).product::<f64>();
                    h[i * n + j] += v;
                    if i != j {
                        h[j * n + i] += v;
                    }
                }
            }
        }
        h
    }

    /// Sum of |coeff| * |x|^deg over terms: a scale for relative residuals.
    pub fn magnitude_at(&self, r: f64) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs() * r.powi(t.exps.iter().sum::<u32>() as i32)).sum()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", t.coeff)?;
            for (i, &e) in t.exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_matches_finite_differences() {
        let p = Polynomial::from_terms(3, &[(1.0, &[8, 0, 0]), (1.0, &[0, 16, 0]), (-2.5, &[3, 1, 3]), (0.5, &[0, 0, 1])]).unwrap();
        let x = [0.7, -0.4, 0.9];
        let mut g = [0.0; 3];
        let v = p.eval_grad(&x, &mut g);
        assert!((v - p.eval(&x)).abs() < 1e-15);
        for i in 0..3 {
            let h = 1e-6;
            let mut a = x;
            let mut b = x;
            a[i] += h;
            b[i] -= h;
            let fd = (p.eval(&a) - p.eval(&b)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-8, "{i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let p = Polynomial::from_terms(3, &[(1.0, &[4, 0, 0]), (-2.5, &[3, 1, 3]), (0.5, &[0, 2, 1]), (1.0, &[0, 0, 1])]).unwrap();
        let x = [0.7, -0.4, 0.9];
        let hess = p.eval_hessian(&x);
        let h = 1e-6;
        for i in 0..3 {
            let (mut a, mut b) = (x, x);
            a[i] += h;
            b[i] -= h;
            let (mut ga, mut gb) = ([0.0; 3], [0.0; 3]);
            p.eval_grad(&a, &mut ga);
            p.eval_grad(&b, &mut gb);
            for j in 0..3 {
                let fd = (ga[j] - gb[j]) / (2.0 * h);
                assert!((fd - hess[i * 3 + j]).abs() < 1e-7, "{i},{j}: {fd} vs {}", hess[i * 3 + j]);
            }
        }
    }

    #[test]
    fn rejects_duplicate_exponents() {
        assert!(Polynomial::from_terms(2, &[(1.0, &[1, 0]), (2.0, &[1, 0])]).is_err());
        assert!(Polynomial::from_terms(2, &[(1.0, &[1, 0, 0])]).is_err());
    }
}
