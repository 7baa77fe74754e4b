//! Concrete generator families realized as truncated spectral systems:
//!
//! * Laguerre `L_a = -(x d^2/dx^2 + (a+1-x) d/dx)` under the gamma-type
//!   probability measure `x^a e^{-x} / Gamma(a+1)`, eigenvalues `0, 1, 2, ...`
//!   with normalized Laguerre polynomials as eigenfunctions and metric
//!   derivative `sqrt(x) d/dx`,
//! * the Ornstein-Uhlenbeck generator on the standard Gaussian line, with
//!   probabilists' Hermite polynomials,
//! * Bessel `B_a = -(d^2/dx^2 + (2a/x) d/dx)` with weight `x^{2a}` on a
//!   truncated interval, discretized by a conservative finite-volume scheme
//!   with Neumann walls and diagonalized exactly in the discrete weighted
//!   inner product,
//! * tensor products of collocated factors, with additive eigenvalues and
//!   componentwise derivative fields.

use crate::quadrature::{QuadratureError, Recurrence};
use crate::spectral::{MetricKind, QuadratureGrid, SpectralError, SpectralSystem, SystemParts};
use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("Laguerre type parameter must exceed -1 for a locally finite measure (got {0})")]
    LaguerreAlphaOutOfRange(f64),
    #[error("Bessel type parameter must be non-negative (got {0})")]
    BesselAlphaOutOfRange(f64),
    #[error("domain radius must be positive (got {0})")]
    BadRadius(f64),
    #[error("need at least {min} {what} (got {got})")]
    TooSmall {
        what: &'static str,
        min: usize,
        got: usize,
    },
    #[error("quadrature construction failed: {0}")]
    Quadrature(#[from] QuadratureError),
    #[error("system validation failed: {0}")]
    Spectral(#[from] SpectralError),
    #[error(
        "normalization defect: quadrature norm of Laguerre polynomial {k} disagrees with the \
         gamma-ratio value by {defect:.3e} (relative)"
    )]
    NormalizationDefect { k: usize, defect: f64 },
    #[error("tensor product needs at least two factor systems")]
    TooFewFactors,
    #[error("tensor factors must sample derivatives on the function grid (no staggered factors)")]
    StaggeredFactor,
    #[error("tensor grid would hold {0} points, above the supported limit")]
    GridOverflow(usize),
}

/// Laguerre type and truncation order.
#[derive(Debug, Clone, Copy)]
pub struct LaguerreParams {
    pub alpha: f64,
    pub n_modes: usize,
}

impl LaguerreParams {
    pub fn new(alpha: f64, n_modes: usize) -> Result<Self, BuildError> {
        if !(alpha > -1.0) {
            return Err(BuildError::LaguerreAlphaOutOfRange(alpha));
        }
        if n_modes < 2 {
            return Err(BuildError::TooSmall {
                what: "Laguerre modes",
                min: 2,
                got: n_modes,
            });
        }
        Ok(LaguerreParams { alpha, n_modes })
    }

    /// The curvature hypothesis behind the audited bounds needs `alpha >= -1/2`.
    pub fn in_rcd_range(&self) -> bool {
        self.alpha >= -0.5
    }
}

/// Bessel type, truncated domain `[0, R]`, grid resolution and spectral
/// truncation.
#[derive(Debug, Clone, Copy)]
pub struct BesselParams {
    pub alpha: f64,
    pub radius: f64,
    pub grid_size: usize,
    pub n_modes: usize,
}

impl BesselParams {
    pub fn new(
        alpha: f64,
        radius: f64,
        grid_size: usize,
        n_modes: usize,
    ) -> Result<Self, BuildError> {
        if !(alpha >= 0.0) {
            return Err(BuildError::BesselAlphaOutOfRange(alpha));
        }
        if !(radius > 0.0) {
            return Err(BuildError::BadRadius(radius));
        }
        if grid_size < 3 {
            return Err(BuildError::TooSmall {
                what: "Bessel grid points",
                min: 3,
                got: grid_size,
            });
        }
        if n_modes < 2 || n_modes > grid_size {
            return Err(BuildError::TooSmall {
                what: "Bessel modes (bounded by the grid size)",
                min: 2,
                got: n_modes,
            });
        }
        Ok(BesselParams {
            alpha,
            radius,
            grid_size,
            n_modes,
        })
    }
}

/// Multi-index of a tensor-product mode; the eigenvalue of a Laguerre product
/// mode is its length `|k| = k_1 + ... + k_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn length(&self) -> usize {
        self.0.iter().sum()
    }
}

/// Laguerre polynomial `L_k^alpha(x)` by the three-term recurrence
/// `(k+1) L_{k+1} = (2k+1+alpha-x) L_k - (k+alpha) L_{k-1}`.
pub fn laguerre_poly(k: usize, alpha: f64, x: f64) -> f64 {
    debug_assert!(alpha > -1.0);
    if k == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + alpha - x;
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + alpha - x) * cur - (jf + alpha) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `d/dx L_k^alpha = -L_{k-1}^{alpha+1}`.
pub fn laguerre_poly_derivative(k: usize, alpha: f64, x: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        -laguerre_poly(k - 1, alpha + 1.0, x)
    }
}

/// Squared L^2 norm of `L_k^alpha` under the normalized measure:
/// `Gamma(k+alpha+1) / (k! Gamma(alpha+1))`.
fn laguerre_norm_sq_gamma(k: usize, alpha: f64) -> f64 {
    (ln_gamma(k as f64 + alpha + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma(alpha + 1.0)).exp()
}

/// Metric distance of the Laguerre half-line product space,
/// `2 sqrt(sum_j (sqrt(x_j) - sqrt(y_j))^2)`.
pub fn laguerre_distance(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let s: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            debug_assert!(*a >= 0.0 && *b >= 0.0);
            let d = a.sqrt() - b.sqrt();
            d * d
        })
        .sum();
    2.0 * s.sqrt()
}

/// Builds the truncated Laguerre system on a Gauss grid for its own weight.
///
/// Normalization constants are computed by quadrature and cross-checked
/// against the gamma-ratio formula; a disagreement signals a defective grid
/// and fails the construction.
pub fn build_laguerre(params: &LaguerreParams) -> Result<SpectralSystem, BuildError> {
    let n = params.n_modes;
    let alpha = params.alpha;
    let m = 4 * n;
    let rec = Recurrence::laguerre(alpha, m + 2);
    let (points, weights) = rec.gauss_rule(m)?;

    // quadrature norms, cross-checked against the closed form
    let mut norms = Vec::with_capacity(n);
    for k in 0..n {
        let quad: f64 = points
            .iter()
            .zip(&weights)
            .map(|(&x, &w)| {
                let v = laguerre_poly(k, alpha, x);
                w * v * v
            })
            .sum();
        let exact = laguerre_norm_sq_gamma(k, alpha);
        let defect = (quad - exact).abs() / exact;
        if defect > 1e-10 {
            return Err(BuildError::NormalizationDefect { k, defect });
        }
        norms.push(quad.sqrt());
    }

    let eigenvalues: Vec<f64> = (0..n).map(|k| k as f64).collect();
    let mut eigenfunctions = Vec::with_capacity(n);
    let mut gradients = Vec::with_capacity(n);
    let mut seconds = Vec::with_capacity(n);
    for k in 0..n {
        let h = norms[k];
        let phi: Vec<f64> = points
            .iter()
            .map(|&x| laguerre_poly(k, alpha, x) / h)
            .collect();
        // delta = sqrt(x) d/dx; using d/dx L_k = -L_{k-1}^{alpha+1}
        let dphi: Vec<f64> = points
            .iter()
            .map(|&x| x.sqrt() * laguerre_poly_derivative(k, alpha, x) / h)
            .collect();
        // delta applied twice: sqrt(x) d/dx (sqrt(x) P) = x P' + P/2
        // with P = dL_k/dx = -L_{k-1}^{alpha+1}
        let ddphi: Vec<f64> = points
            .iter()
            .map(|&x| {
                if k == 0 {
                    0.0
                } else {
                    let p = -laguerre_poly(k - 1, alpha + 1.0, x);
                    let dp = if k == 1 {
                        0.0
                    } else {
                        laguerre_poly(k - 2, alpha + 2.0, x)
                    };
                    (x * dp + 0.5 * p) / h
                }
            })
            .collect();
        eigenfunctions.push(phi);
        gradients.push(vec![dphi]);
        seconds.push(ddphi);
    }

    let grid = QuadratureGrid::new_1d(points, weights)?;
    let parts = SystemParts {
        name: format!("laguerre(alpha={alpha})"),
        metric: MetricKind::SqrtCoordinate,
        grad_grid: grid.clone(),
        grid,
        staggered: false,
        eigenvalues,
        eigenfunctions,
        gradients,
        second_derivatives: Some(seconds),
        mode_indices: None,
    };
    Ok(SpectralSystem::assemble(parts, 1e-8, 1e-6)?)
}

/// Ornstein-Uhlenbeck system on the standard 1d Gaussian: probabilists'
/// Hermite polynomials, eigenvalue `k` for degree `k`, derivative `d/dx`.
pub fn build_hermite(n_modes: usize) -> Result<SpectralSystem, BuildError> {
    if n_modes < 2 {
        return Err(BuildError::TooSmall {
            what: "Hermite modes",
            min: 2,
            got: n_modes,
        });
    }
    let n = n_modes;
    let m = 4 * n;
    let rec = Recurrence::hermite_prob(m + 2);
    let (points, weights) = rec.gauss_rule(m)?;

    // orthonormal values h_0..h_{n-1} at every node
    let table: Vec<Vec<f64>> = points.iter().map(|&x| rec.eval(x, n - 1)).collect();
    let eigenvalues: Vec<f64> = (0..n).map(|k| k as f64).collect();
    let mut eigenfunctions = Vec::with_capacity(n);
    let mut gradients = Vec::with_capacity(n);
    let mut seconds = Vec::with_capacity(n);
    for k in 0..n {
        let phi: Vec<f64> = table.iter().map(|row| row[k]).collect();
        // h_k' = sqrt(k) h_{k-1}
        let dphi: Vec<f64> = if k == 0 {
            vec![0.0; m]
        } else {
            let c = (k as f64).sqrt();
            table.iter().map(|row| c * row[k - 1]).collect()
        };
        let ddphi: Vec<f64> = if k < 2 {
            vec![0.0; m]
        } else {
            let c = (k as f64 * (k as f64 - 1.0)).sqrt();
            table.iter().map(|row| c * row[k - 2]).collect()
        };
        eigenfunctions.push(phi);
        gradients.push(vec![dphi]);
        seconds.push(ddphi);
    }

    let grid = QuadratureGrid::new_1d(points, weights)?;
    let parts = SystemParts {
        name: "hermite".to_string(),
        metric: MetricKind::Euclidean,
        grad_grid: grid.clone(),
        grid,
        staggered: false,
        eigenvalues,
        eigenfunctions,
        gradients,
        second_derivatives: Some(seconds),
        mode_indices: None,
    };
    Ok(SpectralSystem::assemble(parts, 1e-8, 1e-6)?)
}

/// Finite-volume matrix of the Bessel operator on cell centers
/// `x_i = (i + 1/2) h`, `h = R/n`, with zero-flux (Neumann) walls at both
/// ends. Row `i` holds `(B f)_i = -(1/x_i^{2a} h) [flux_{i+1} - flux_i]` with
/// `flux_k = z_k^{2a} (f_k - f_{k-1})/h` at the interior interface `z_k = k h`.
pub fn bessel_matrix(params: &BesselParams) -> DMatrix<f64> {
    let n = params.grid_size;
    let h = params.radius / n as f64;
    let two_alpha = 2.0 * params.alpha;
    let cell_weight = |i: usize| ((i as f64 + 0.5) * h).powf(two_alpha);
    let iface_weight = |k: usize| (k as f64 * h).powf(two_alpha);
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let wi = cell_weight(i);
        let left = if i > 0 { iface_weight(i) } else { 0.0 };
        let right = if i + 1 < n { iface_weight(i + 1) } else { 0.0 };
        a[(i, i)] = (left + right) / (wi * h * h);
        if i > 0 {
            a[(i, i - 1)] = -left / (wi * h * h);
        }
        if i + 1 < n {
            a[(i, i + 1)] = -right / (wi * h * h);
        }
    }
    a
}

/// Builds the Bessel system: diagonalizes the finite-volume matrix in the
/// discrete weighted inner product and keeps the lowest `n_modes` pairs.
/// Gradient samples are the exact discrete differences on the interface
/// grid, so integration by parts holds at matrix level.
pub fn build_bessel(params: &BesselParams) -> Result<SpectralSystem, BuildError> {
    let n = params.grid_size;
    let h = params.radius / n as f64;
    let two_alpha = 2.0 * params.alpha;
    let cells: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
    let cell_weights: Vec<f64> = cells.iter().map(|x| x.powf(two_alpha) * h).collect();
    let ifaces: Vec<f64> = (1..n).map(|k| k as f64 * h).collect();
    let iface_weights: Vec<f64> = ifaces.iter().map(|z| z.powf(two_alpha) * h).collect();

    // symmetrize with the weight similarity W^(1/2) A W^(-1/2)
    let a = bessel_matrix(params);
    let sqrt_w: Vec<f64> = cell_weights.iter().map(|w| (w / h).sqrt()).collect();
    let mut sym = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i.saturating_sub(1)..(i + 2).min(n) {
            sym[(i, j)] = sqrt_w[i] * a[(i, j)] / sqrt_w[j];
        }
    }
    // enforce exact symmetry against rounding in the similarity transform
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (sym[(i, j)] + sym[(j, i)]);
            sym[(i, j)] = s;
            sym[(j, i)] = s;
        }
    }
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());

    let kept = params.n_modes;
    let mut eigenvalues = Vec::with_capacity(kept);
    let mut eigenfunctions = Vec::with_capacity(kept);
    let mut gradients = Vec::with_capacity(kept);
    let mut seconds = Vec::with_capacity(kept);
    for &col in order.iter().take(kept) {
        // clamp the kernel eigenvalue's rounding noise
        let lam = eig.eigenvalues[col].max(0.0);
        let v = eig.eigenvectors.column(col);
        let mut phi: Vec<f64> = (0..n).map(|i| v[i] / (sqrt_w[i] * h.sqrt())).collect();
        // canonical sign: largest-magnitude entry positive
        let lead = phi
            .iter()
            .cloned()
            .max_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
            .unwrap();
        if lead < 0.0 {
            for p in &mut phi {
                *p = -*p;
            }
        }
        let dphi: Vec<f64> = (1..n).map(|k| (phi[k] - phi[k - 1]) / h).collect();
        // second application maps interface values back to cells, with the
        // field extended by zero at the Neumann walls
        let ddphi: Vec<f64> = (0..n)
            .map(|i| {
                let left = if i == 0 { 0.0 } else { dphi[i - 1] };
                let right = if i == n - 1 { 0.0 } else { dphi[i] };
                (right - left) / h
            })
            .collect();
        eigenvalues.push(lam);
        eigenfunctions.push(phi);
        gradients.push(vec![dphi]);
        seconds.push(ddphi);
    }

    let grid = QuadratureGrid::new_1d(cells, cell_weights)?;
    let grad_grid = QuadratureGrid::new_1d(ifaces, iface_weights)?;
    let parts = SystemParts {
        name: format!("bessel(alpha={})", params.alpha),
        metric: MetricKind::Euclidean,
        grid,
        grad_grid,
        staggered: true,
        eigenvalues,
        eigenfunctions,
        gradients,
        second_derivatives: Some(seconds),
        mode_indices: None,
    };
    Ok(SpectralSystem::assemble(parts, 1e-8, 1e-6)?)
}

const TENSOR_GRID_LIMIT: usize = 1 << 22;

/// Tensor product of collocated factor systems. Modes are all multi-indices
/// `k` with `|k| <= max_total_degree`; the eigenvalue of mode `k` is the sum
/// of the factor eigenvalues and the derivative field carries one component
/// per axis.
pub fn tensor_product(
    factors: &[&SpectralSystem],
    max_total_degree: usize,
) -> Result<SpectralSystem, BuildError> {
    if factors.len() < 2 {
        return Err(BuildError::TooFewFactors);
    }
    for f in factors {
        if f.grad_grid().len() != f.grid().len() {
            return Err(BuildError::StaggeredFactor);
        }
    }
    let sizes: Vec<usize> = factors.iter().map(|f| f.grid().len()).collect();
    let total: usize = sizes.iter().product();
    if total > TENSOR_GRID_LIMIT {
        return Err(BuildError::GridOverflow(total));
    }
    let dims: Vec<usize> = factors.iter().map(|f| f.dim()).collect();
    let dim: usize = dims.iter().sum();

    // product grid, row-major over factor grids
    let mut coords = Vec::with_capacity(total * dim);
    let mut weights = Vec::with_capacity(total);
    let mut point_ids = vec![0usize; factors.len()];
    for flat in 0..total {
        let mut rest = flat;
        for (f, size) in sizes.iter().enumerate().rev() {
            point_ids[f] = rest % size;
            rest /= size;
        }
        let mut w = 1.0;
        for (f, sys) in factors.iter().enumerate() {
            coords.extend_from_slice(sys.grid().point(point_ids[f]));
            w *= sys.grid().weights()[point_ids[f]];
        }
        weights.push(w);
    }

    // multi-indices with |k| <= max_total_degree, sorted by eigenvalue
    let mut indices: Vec<Vec<usize>> = Vec::new();
    let mut stack = vec![0usize; factors.len()];
    enumerate_indices(factors, max_total_degree, 0, &mut stack, &mut indices);
    let lam_of = |idx: &[usize]| -> f64 {
        idx.iter()
            .enumerate()
            .map(|(f, &k)| factors[f].eigenvalues()[k])
            .sum()
    };
    indices.sort_by(|a, b| {
        lam_of(a)
            .partial_cmp(&lam_of(b))
            .unwrap()
            .then_with(|| a.cmp(b))
    });

    let mut eigenvalues = Vec::with_capacity(indices.len());
    let mut eigenfunctions = Vec::with_capacity(indices.len());
    let mut gradients = Vec::with_capacity(indices.len());
    for idx in &indices {
        eigenvalues.push(lam_of(idx));
        let mut phi = vec![1.0; total];
        let mut grad = vec![vec![0.0; total]; dim];
        for flat in 0..total {
            let mut rest = flat;
            for (f, size) in sizes.iter().enumerate().rev() {
                point_ids[f] = rest % size;
                rest /= size;
            }
            let mut value = 1.0;
            for (f, sys) in factors.iter().enumerate() {
                value *= sys.mode_samples(idx[f])[point_ids[f]];
            }
            phi[flat] = value;
            let mut axis = 0;
            for (f, sys) in factors.iter().enumerate() {
                for local_axis in 0..dims[f] {
                    let mut g = sys.mode_gradient(idx[f])[local_axis][point_ids[f]];
                    for (other, other_sys) in factors.iter().enumerate() {
                        if other != f {
                            g *= other_sys.mode_samples(idx[other])[point_ids[other]];
                        }
                    }
                    grad[axis][flat] = g;
                    axis += 1;
                }
            }
        }
        eigenfunctions.push(phi);
        gradients.push(grad);
    }

    let metric = if factors
        .iter()
        .all(|f| f.metric() == MetricKind::SqrtCoordinate)
    {
        MetricKind::SqrtCoordinate
    } else {
        MetricKind::Euclidean
    };
    let names: Vec<&str> = factors.iter().map(|f| f.name()).collect();
    let grid = QuadratureGrid::new_nd(coords, weights, dim)?;
    let parts = SystemParts {
        name: format!("tensor({})", names.join(" x ")),
        metric,
        grad_grid: grid.clone(),
        grid,
        staggered: false,
        eigenvalues,
        eigenfunctions,
        gradients,
        second_derivatives: None,
        mode_indices: Some(indices),
    };
    Ok(SpectralSystem::assemble(parts, 1e-7, 1e-6)?)
}

fn enumerate_indices(
    factors: &[&SpectralSystem],
    budget: usize,
    depth: usize,
    stack: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if depth == factors.len() {
        out.push(stack.clone());
        return;
    }
    let max_here = (factors[depth].n_modes() - 1).min(budget);
    for k in 0..=max_here {
        stack[depth] = k;
        enumerate_indices(factors, budget - k, depth + 1, stack, out);
    }
}
