//! Least-norm Newton steps onto the zero set of a polynomial system.

use nalgebra::{DMatrix, DVector};

use super::poly::Polynomial;
use crate::vecops;

/// Values and gradients of every equation at `p`.
pub(crate) fn values_and_jacobian(eqs: &[Polynomial], p: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = p.len();
    let mut vals = Vec::with_capacity(eqs.len());
    let mut jac = Vec::with_capacity(eqs.len());
    for e in eqs {
        let mut g = vec![0.0; n];
        vals.push(e.eval_grad(p, &mut g));
        jac.push(g);
    }
    (vals, jac)
}

/// `J^T (J J^T)^{-1} v`: the minimum-norm `s` with `J s = v`.
pub(crate) fn least_norm_solve(jac: &[Vec<f64>], v: &[f64]) -> Option<Vec<f64>> {
    let m = jac.len();
    if m == 0 {
        return None;
    }
    let n = jac[0].len();
    if m == 1 {
        let g2 = vecops::dot(&jac[0], &jac[0]);
        if !(g2 > 0.0) || !g2.is_finite() {
            return None;
        }
        let c = v[0] / g2;
        return Some(jac[0].iter().map(|g| g * c).collect());
    }
    let j = DMatrix::from_fn(m, n, |r, c| jac[r][c]);
    let jjt = &j * j.transpose();
    let rhs = DVector::from_column_slice(v);
    let y = jjt.lu().solve(&rhs)?;
    let s = j.transpose() * y;
    if s.iter().all(|x| x.is_finite()) {
        Some(s.iter().copied().collect())
    } else {
        None
    }
}

/// Component of `r` orthogonal to every row of `jac` (tangent to the level set).
pub(crate) fn tangential(jac: &[Vec<f64>], r: &[f64]) -> Vec<f64> {
    if jac.is_empty() {
        return r.to_vec();
    }
    let jr: Vec<f64> = jac.iter().map(|g| vecops::dot(g, r)).collect();
    match least_norm_solve(jac, &jr) {
        Some(s) => vecops::sub(r, &s),
        None => r.to_vec(),
    }
}

/// Newton iteration from `p` onto `{ f = 0 }`; `None` unless the step size
/// drops below `1e-12 |p|` within `max_iter` iterations while `|q|` stays
/// within `[0.01, 4] |p|` and the iteration reaches its quadratic regime.
pub(crate) fn project(eqs: &[Polynomial], p: &[f64], max_iter: usize) -> Option<Vec<f64>> {
    if eqs.is_empty() {
        return Some(p.to_vec());
    }
    let start_norm = vecops::norm(p);
    let mut q = p.to_vec();
    for it in 0..max_iter {
        let (vals, jac) = values_and_jacobian(eqs, &q);
        let s = least_norm_solve(&jac, &vals)?;
        let sn = vecops::norm(&s);
        q = vecops::sub(&q, &s);
        let qn = vecops::norm(&q);
        // collapsing toward the origin means linear convergence to the singular
        // point, which callers already treat as a candidate
        if !qn.is_finite() || qn > 4.0 * start_norm + 1e-300 || qn < 1e-2 * start_norm {
            return None;
        }
        if sn <= 1e-12 * qn {
            return Some(q);
        }
        // converging runs are deep in the quadratic regime by now
        if it >= 16 && sn > 1e-6 * qn {
            return None;
        }
    }
    None
}

/// One Newton step on the optimality system of `min |x - y|` subject to
/// `f(y) = 0`: `y - x + J^T λ = 0`, `f(y) = 0`, with `λ` initialised by
/// least squares. Returns the new `y`.
pub(crate) fn closest_point_step(eqs: &[Polynomial], x: &[f64], y: &[f64]) -> Option<Vec<f64>> {
    let n = y.len();
    let m = eqs.len();
    if m == 0 {
        return Some(x.to_vec());
    }
    let (vals, jac) = values_and_jacobian(eqs, y);
    let r = vecops::sub(x, y);
    let jr: Vec<f64> = jac.iter().map(|g| vecops::dot(g, &r)).collect();
    let j = DMatrix::from_fn(m, n, |a, b| jac[a][b]);
    let lambda = (&j * j.transpose()).lu().solve(&DVector::from_column_slice(&jr))?;

    let mut k = DMatrix::<f64>::zeros(n + m, n + m);
    for i in 0..n {
        k[(i, i)] = 1.0;
    }
    for (e, l) in eqs.iter().zip(lambda.iter()) {
        let h = e.eval_hessian(y);
        for a in 0..n {
            for b in 0..n {
                k[(a, b)] += l * h[a * n + b];
            }
        }
    }
    for a in 0..m {
        for b in 0..n {
            k[(n + a, b)] = jac[a][b];
            k[(b, n + a)] = jac[a][b];
        }
    }
    let mut rhs = DVector::<f64>::zeros(n + m);
    for i in 0..n {
        let jtl: f64 = (0..m).map(|a| jac[a][i] * lambda[a]).sum();
        rhs[i] = -(y[i] - x[i] + jtl);
    }
    for a in 0..m {
        rhs[n + a] = -vals[a];
    }
    let s = k.lu().solve(&rhs)?;
    let out: Vec<f64> = (0..n).map(|i| y[i] + s[i]).collect();
    out.iter().all(|v| v.is_finite()).then_some(out)
}
