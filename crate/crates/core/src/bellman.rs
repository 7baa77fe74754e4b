//! The piecewise Bellman function `B(u, v)` on the quarter plane, its bump
//! mollification `B_eps`, and the derivative / Hessian lower bounds that
//! drive the bilinear embedding.
//!
//! For an exponent pair `p >= 2`, `q = p/(p-1)` and `delta = q(q-1)/8`,
//!
//! ```text
//! B(u, v) = u^p + v^q + delta * { (2/p) u^p + (2/q - 1) v^q   if u^p >= v^q
//!                               { u^2 v^(2-q)                 if u^p <= v^q
//! ```
//!
//! The two branches agree on `{u^p = v^q}` and `B` is C^1 there; second
//! derivatives jump across the interface, so the Hessian form refuses exact
//! ties instead of averaging.

use crate::quadrature::gauss_legendre;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BellmanError {
    #[error("exponent p must satisfy p >= 2 (got {0}); exchange the roles of the two arguments for p < 2")]
    ExponentBelowTwo(f64),
    #[error("exponent p must be finite (got {0})")]
    NonFiniteExponent(f64),
    #[error("point ({u}, {v}) is outside the open quarter plane u > 0, v > 0")]
    NonPositivePoint { u: f64, v: f64 },
    #[error(
        "second derivatives are branch-wise and jump on the interface u^p = v^q (u = {u}, v = {v})"
    )]
    OnInterface { u: f64, v: f64 },
    #[error("mollifier width must lie in (0, 1] (got {0})")]
    BadMollifierWidth(f64),
}

/// Exponent triple `(p, q, delta)` with `q` conjugate to `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellmanParams {
    pub p: f64,
    pub q: f64,
    pub delta: f64,
}

impl BellmanParams {
    pub fn new(p: f64) -> Result<Self, BellmanError> {
        if !p.is_finite() {
            return Err(BellmanError::NonFiniteExponent(p));
        }
        if p < 2.0 {
            return Err(BellmanError::ExponentBelowTwo(p));
        }
        let q = p / (p - 1.0);
        let delta = q * (q - 1.0) / 8.0;
        Ok(BellmanParams { p, q, delta })
    }
}

/// `make_params` under its operation name.
pub fn make_params(p: f64) -> Result<BellmanParams, BellmanError> {
    BellmanParams::new(p)
}

fn in_upper_branch(params: &BellmanParams, u: f64, v: f64) -> bool {
    // ties go to the first branch
    u.powf(params.p) >= v.powf(params.q)
}

/// Bellman function value; `u, v >= 0`.
pub fn eval_b(params: &BellmanParams, u: f64, v: f64) -> f64 {
    assert!(u >= 0.0 && v >= 0.0, "eval_b needs u, v >= 0");
    let BellmanParams { p, q, delta } = *params;
    let up = u.powf(p);
    let vq = v.powf(q);
    let extra = if up >= vq {
        (2.0 / p) * up + (2.0 / q - 1.0) * vq
    } else {
        u * u * v.powf(2.0 - q)
    };
    up + vq + delta * extra
}

fn grad_branches(params: &BellmanParams, u: f64, v: f64) -> (f64, f64) {
    let BellmanParams { p, q, delta } = *params;
    if in_upper_branch(params, u, v) {
        let du = (p + 2.0 * delta) * u.powf(p - 1.0);
        let dv = (q + delta * (2.0 - q)) * v.powf(q - 1.0);
        (du, dv)
    } else {
        let du = p * u.powf(p - 1.0) + 2.0 * delta * u * v.powf(2.0 - q);
        // the (2 - q) factor vanishes identically at p = 2; skip the power
        // so that v -> 0 cannot produce 0 * inf
        let dv = if 2.0 - q == 0.0 {
            q * v.powf(q - 1.0)
        } else {
            q * v.powf(q - 1.0) + delta * (2.0 - q) * u * u * v.powf(1.0 - q)
        };
        (du, dv)
    }
}

/// Gradient `(dB/du, dB/dv)`; requires `u, v > 0`. On the interface the two
/// branch formulas agree (B is C^1) and the first branch is used.
pub fn grad_b(params: &BellmanParams, u: f64, v: f64) -> Result<(f64, f64), BellmanError> {
    if u <= 0.0 || v <= 0.0 {
        return Err(BellmanError::NonPositivePoint { u, v });
    }
    Ok(grad_branches(params, u, v))
}

fn hess_form_branches(params: &BellmanParams, u: f64, v: f64, alpha: f64, beta: f64) -> f64 {
    let BellmanParams { p, q, delta } = *params;
    let (huu, huv, hvv) = if in_upper_branch(params, u, v) {
        (
            (p + 2.0 * delta) * (p - 1.0) * u.powf(p - 2.0),
            0.0,
            (q + delta * (2.0 - q)) * (q - 1.0) * v.powf(q - 2.0),
        )
    } else {
        let huu = p * (p - 1.0) * u.powf(p - 2.0) + 2.0 * delta * v.powf(2.0 - q);
        let (huv, hvv_extra) = if 2.0 - q == 0.0 {
            (0.0, 0.0)
        } else {
            (
                2.0 * delta * (2.0 - q) * u * v.powf(1.0 - q),
                delta * (2.0 - q) * (1.0 - q) * u * u * v.powf(-q),
            )
        };
        (huu, huv, q * (q - 1.0) * v.powf(q - 2.0) + hvv_extra)
    };
    huu * alpha * alpha + 2.0 * huv * alpha * beta + hvv * beta * beta
}

/// Hessian quadratic form `B_uu a^2 + 2 B_uv a b + B_vv b^2` at `(u, v)`.
pub fn hess_quadratic_form(
    params: &BellmanParams,
    u: f64,
    v: f64,
    alpha: f64,
    beta: f64,
) -> Result<f64, BellmanError> {
    if u <= 0.0 || v <= 0.0 {
        return Err(BellmanError::NonPositivePoint { u, v });
    }
    if u.powf(params.p) == v.powf(params.q) {
        return Err(BellmanError::OnInterface { u, v });
    }
    Ok(hess_form_branches(params, u, v, alpha, beta))
}

/// Quadrature representation of a smooth bump supported on
/// `(epsilon, 2 epsilon)` with unit integral.
#[derive(Debug, Clone)]
pub struct Mollifier {
    epsilon: f64,
    nodes: Vec<(f64, f64)>,
}

impl Mollifier {
    /// Scaled bump `exp(-1/(1-z^2))` mapped affinely onto the support,
    /// sampled on a 32-point Gauss-Legendre rule and normalized so that the
    /// weights sum to one exactly.
    pub fn bump(epsilon: f64) -> Result<Self, BellmanError> {
        Self::bump_with_nodes(epsilon, 32)
    }

    pub fn bump_with_nodes(epsilon: f64, n: usize) -> Result<Self, BellmanError> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(BellmanError::BadMollifierWidth(epsilon));
        }
        let (z, w) = gauss_legendre(n);
        let raw: Vec<(f64, f64)> = z
            .iter()
            .zip(&w)
            .map(|(&zi, &wi)| {
                let y = epsilon * (3.0 + zi) / 2.0;
                let density = (-1.0 / (1.0 - zi * zi)).exp();
                (y, wi * density)
            })
            .collect();
        let total: f64 = raw.iter().map(|(_, w)| w).sum();
        let nodes = raw.into_iter().map(|(y, w)| (y, w / total)).collect();
        Ok(Mollifier { epsilon, nodes })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    /// Bracket moment `[u]^r = int (u + u')^r rho(u') du'`.
    pub fn bracket_moment(&self, u: f64, r: f64) -> f64 {
        assert!(u >= 0.0, "bracket moment needs u >= 0");
        self.nodes.iter().map(|&(y, w)| w * (u + y).powf(r)).sum()
    }
}

/// Mollified Bellman value `B_eps(u, v)` by tensor quadrature.
pub fn eval_b_eps(params: &BellmanParams, m: &Mollifier, u: f64, v: f64) -> f64 {
    assert!(u >= 0.0 && v >= 0.0, "eval_b_eps needs u, v >= 0");
    let mut acc = 0.0;
    for &(yu, wu) in m.nodes() {
        for &(yv, wv) in m.nodes() {
            acc += wu * wv * eval_b(params, u + yu, v + yv);
        }
    }
    acc
}

/// Gradient of `B_eps`, smooth on the closed quarter plane including the axes.
pub fn grad_b_eps(params: &BellmanParams, m: &Mollifier, u: f64, v: f64) -> (f64, f64) {
    assert!(u >= 0.0 && v >= 0.0, "grad_b_eps needs u, v >= 0");
    let mut du = 0.0;
    let mut dv = 0.0;
    for &(yu, wu) in m.nodes() {
        for &(yv, wv) in m.nodes() {
            let (gu, gv) = grad_branches(params, u + yu, v + yv);
            du += wu * wv * gu;
            dv += wu * wv * gv;
        }
    }
    (du, dv)
}

/// Hessian quadratic form of `B_eps` in direction `(alpha, beta)`.
pub fn hess_form_eps(
    params: &BellmanParams,
    m: &Mollifier,
    u: f64,
    v: f64,
    alpha: f64,
    beta: f64,
) -> f64 {
    assert!(u >= 0.0 && v >= 0.0, "hess_form_eps needs u, v >= 0");
    let mut acc = 0.0;
    for &(yu, wu) in m.nodes() {
        for &(yv, wv) in m.nodes() {
            acc += wu * wv * hess_form_branches(params, u + yu, v + yv, alpha, beta);
        }
    }
    acc
}

/// Checks `[v]^(2-q) a^2 + [v]^(q-2) b^2 >= 2 |a||b|` up to a `-1e-12` slack.
pub fn product_lower_bound(
    params: &BellmanParams,
    m: &Mollifier,
    v: f64,
    alpha: f64,
    beta: f64,
) -> bool {
    let lhs = m.bracket_moment(v, 2.0 - params.q) * alpha * alpha
        + m.bracket_moment(v, params.q - 2.0) * beta * beta;
    lhs - 2.0 * alpha.abs() * beta.abs() >= -1e-12
}
