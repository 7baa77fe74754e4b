//! Gaussian quadrature machinery.
//!
//! Three kinds of rules are built here:
//!
//! * Gauss-Legendre rules on `[-1, 1]`, by Newton iteration on the Legendre
//!   polynomial (used for mollifier integrals and composite panel rules),
//! * Gauss rules for the classical probability weights (standard Gaussian,
//!   normalized Laguerre `x^a e^{-x} / Gamma(a+1)`), from the three-term
//!   recurrence of the orthonormal polynomials,
//! * composite panel rules assembled from Gauss-Legendre pieces.
//!
//! Nodes for the recurrence-based rules come from the Jacobi matrix followed
//! by two Newton polish steps. Weights use the Christoffel identity
//! `w_j = 1 / sum_k p_k(x_j)^2`: eigenvector first components underflow to
//! noise at the extreme nodes of a 128-point Hermite or Laguerre rule, while
//! the Christoffel sum keeps full relative accuracy there.

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuadratureError {
    #[error("quadrature rule needs at least one node")]
    EmptyRule,
    #[error("Newton polish for quadrature nodes did not converge at node {0}")]
    NewtonStalled(usize),
    #[error("quadrature rule produced a non-finite node or weight (order too large for f64)")]
    NonFinite,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let step = p / d;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_with_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped onto `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (z, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        z.iter().map(|&zi| mid + half * zi).collect(),
        w.iter().map(|&wi| half * wi).collect(),
    )
}

/// Composite Gauss-Legendre rule over consecutive panels given by `edges`.
pub fn composite_gauss_legendre(edges: &[f64], nodes_per_panel: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    for pair in edges.windows(2) {
        let (x, w) = gauss_legendre_on(nodes_per_panel, pair[0], pair[1]);
        xs.extend(x);
        ws.extend(w);
    }
    (xs, ws)
}

/// Three-term recurrence of the polynomials orthonormal with respect to a
/// probability measure: `b[k+1] p_{k+1} = (x - a[k]) p_k - b[k] p_{k-1}`,
/// with `p_0 = 1` and `b[0]` unused.
#[derive(Debug, Clone)]
pub struct Recurrence {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Recurrence {
    /// Probabilists' Hermite: weight `e^{-x^2/2} / sqrt(2 pi)` on the line.
    pub fn hermite_prob(max_degree: usize) -> Self {
        let a = vec![0.0; max_degree + 1];
        let b = (0..=max_degree).map(|k| (k as f64).sqrt()).collect();
        Recurrence { a, b }
    }

    /// Generalized Laguerre: weight `x^alpha e^{-x} / Gamma(alpha+1)` on the
    /// half line, `alpha > -1`.
    pub fn laguerre(alpha: f64, max_degree: usize) -> Self {
        let a = (0..=max_degree)
            .map(|k| 2.0 * k as f64 + alpha + 1.0)
            .collect();
        let b = (0..=max_degree)
            .map(|k| (k as f64 * (k as f64 + alpha)).sqrt())
            .collect();
        Recurrence { a, b }
    }

    /// Values `p_0(x) .. p_m(x)` of the orthonormal polynomials.
    pub fn eval(&self, x: f64, m: usize) -> Vec<f64> {
        let mut p = Vec::with_capacity(m + 1);
        p.push(1.0);
        if m == 0 {
            return p;
        }
        p.push((x - self.a[0]) / self.b[1]);
        for k in 1..m {
            let next = ((x - self.a[k]) * p[k] - self.b[k] * p[k - 1]) / self.b[k + 1];
            p.push(next);
        }
        p
    }

    /// Values and first derivatives of `p_0 .. p_m` at `x`.
    pub fn eval_with_derivative(&self, x: f64, m: usize) -> (Vec<f64>, Vec<f64>) {
        let mut p = Vec::with_capacity(m + 1);
        let mut d = Vec::with_capacity(m + 1);
        p.push(1.0);
        d.push(0.0);
        if m == 0 {
            return (p, d);
        }
        p.push((x - self.a[0]) / self.b[1]);
        d.push(1.0 / self.b[1]);
        for k in 1..m {
            let next = ((x - self.a[k]) * p[k] - self.b[k] * p[k - 1]) / self.b[k + 1];
            let dnext = ((x - self.a[k]) * d[k] + p[k] - self.b[k] * d[k - 1]) / self.b[k + 1];
            p.push(next);
            d.push(dnext);
        }
        (p, d)
    }

    /// `m`-point Gauss rule for the underlying probability measure.
    pub fn gauss_rule(&self, m: usize) -> Result<(Vec<f64>, Vec<f64>), QuadratureError> {
        if m == 0 {
            return Err(QuadratureError::EmptyRule);
        }
        assert!(
            self.a.len() > m,
            "recurrence holds {} coefficients, rule order {m} needs {}",
            self.a.len(),
            m + 1
        );
        // Jacobi matrix eigenvalues as initial node guesses.
        let mut jac = DMatrix::zeros(m, m);
        for k in 0..m {
            jac[(k, k)] = self.a[k];
            if k + 1 < m {
                jac[(k, k + 1)] = self.b[k + 1];
                jac[(k + 1, k)] = self.b[k + 1];
            }
        }
        let mut nodes = jac.symmetric_eigenvalues().as_slice().to_vec();
        nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());

        // Newton polish on p_m, then Christoffel weights.
        let scale = nodes.iter().fold(1.0_f64, |s, x| s.max(x.abs()));
        for (j, x) in nodes.iter_mut().enumerate() {
            let mut ok = false;
            for _ in 0..50 {
                let (p, d) = self.eval_with_derivative(*x, m);
                let step = p[m] / d[m];
                *x -= step;
                if step.abs() <= 1e-14 * scale {
                    ok = true;
                    break;
                }
            }
            if !ok {
                return Err(QuadratureError::NewtonStalled(j));
            }
        }
        let mut weights = Vec::with_capacity(m);
        for &x in &nodes {
            let p = self.eval(x, m - 1);
            let christoffel: f64 = p.iter().map(|v| v * v).sum();
            weights.push(1.0 / christoffel);
        }
        if nodes.iter().chain(weights.iter()).any(|v| !v.is_finite()) {
            return Err(QuadratureError::NonFinite);
        }
        Ok((nodes, weights))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn legendre_exact_for_polynomials() {
        let (x, w) = gauss_legendre(6);
        // degree 11 is integrated exactly: int_{-1}^1 x^10 dx = 2/11
        let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(10)).sum();
        assert_abs_diff_eq!(q, 2.0 / 11.0, epsilon = 1e-14);
        let total: f64 = w.iter().sum();
        assert_abs_diff_eq!(total, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn hermite_rule_matches_gaussian_moments() {
        let rec = Recurrence::hermite_prob(130);
        let (x, w) = rec.gauss_rule(128).unwrap();
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi * xi).sum();
        let m4: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(4)).sum();
        assert_abs_diff_eq!(m0, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(m2, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m4, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn laguerre_rule_matches_gamma_moments() {
        // E[x] = alpha + 1, E[x^2] = (alpha+1)(alpha+2) under the normalized weight
        for alpha in [0.0, 1.0, -0.5] {
            let rec = Recurrence::laguerre(alpha, 130);
            let (x, w) = rec.gauss_rule(128).unwrap();
            let m0: f64 = w.iter().sum();
            let m1: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi).sum();
            let m2: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi * xi).sum();
            assert_abs_diff_eq!(m0, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(m1, alpha + 1.0, epsilon = 1e-11);
            assert_abs_diff_eq!(m2, (alpha + 1.0) * (alpha + 2.0), epsilon = 1e-10);
        }
    }

    #[test]
    fn orthonormality_of_evaluated_basis_under_own_rule() {
        let rec = Recurrence::hermite_prob(66);
        let (x, w) = rec.gauss_rule(64).unwrap();
        let n = 16;
        let table: Vec<Vec<f64>> = x.iter().map(|&xi| rec.eval(xi, n)).collect();
        for i in 0..=n {
            for j in 0..=n {
                let g: f64 = table
                    .iter()
                    .zip(&w)
                    .map(|(row, wi)| wi * row[i] * row[j])
                    .sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(g, expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn composite_rule_covers_panels() {
        let edges = [0.0, 0.5, 1.0, 2.0];
        let (x, w) = composite_gauss_legendre(&edges, 8);
        let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.exp()).sum();
        assert_abs_diff_eq!(q, 2.0_f64.exp() - 1.0, epsilon = 1e-12);
    }
}
