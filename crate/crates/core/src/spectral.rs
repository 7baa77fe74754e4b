//! Truncated spectral systems: a finite eigen-decomposition of a non-negative
//! self-adjoint generator, sampled on a quadrature grid for its reference
//! measure, together with projection, synthesis, functional calculus, L^p
//! norms and metric derivative fields.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Eigenvalues at or below this threshold are treated as kernel modes.
pub const KERNEL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("grid points must be strictly increasing (violated at index {0})")]
    NonIncreasingPoints(usize),
    #[error("grid weights must be positive (index {0})")]
    NonPositiveWeight(usize),
    #[error("expected {expected} samples on the grid, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("orthonormality defect {defect:.3e} exceeds tolerance {tol:.1e} at modes ({i}, {j})")]
    OrthonormalityDefect {
        defect: f64,
        tol: f64,
        i: usize,
        j: usize,
    },
    #[error("derivative compatibility defect {defect:.3e} exceeds tolerance {tol:.1e} at modes ({i}, {j})")]
    CompatibilityDefect {
        defect: f64,
        tol: f64,
        i: usize,
        j: usize,
    },
    #[error("spectral multiplier is not finite at eigenvalue {lambda} (mode {index} has nonzero coefficient)")]
    NonFiniteMultiplier { index: usize, lambda: f64 },
    #[error("eigenvalues must be non-negative and sorted (index {0})")]
    BadEigenvalues(usize),
}

/// Distance used between grid points (the space's metric, not the chart).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricKind {
    /// `|x - y|` componentwise Euclidean.
    Euclidean,
    /// `2 sqrt(sum_j (sqrt(x_j) - sqrt(y_j))^2)`, the Laguerre metric.
    SqrtCoordinate,
}

/// Quadrature grid: points in the space's domain and positive weights
/// representing the reference measure.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    coords: Vec<f64>,
    weights: Vec<f64>,
    dim: usize,
}

impl QuadratureGrid {
    pub fn new_1d(points: Vec<f64>, weights: Vec<f64>) -> Result<Self, SpectralError> {
        assert_eq!(points.len(), weights.len());
        for i in 1..points.len() {
            if points[i] <= points[i - 1] {
                return Err(SpectralError::NonIncreasingPoints(i));
            }
        }
        if let Some(i) = weights.iter().position(|&w| !(w > 0.0)) {
            return Err(SpectralError::NonPositiveWeight(i));
        }
        Ok(QuadratureGrid {
            coords: points,
            weights,
            dim: 1,
        })
    }

    pub(crate) fn new_nd(
        coords: Vec<f64>,
        weights: Vec<f64>,
        dim: usize,
    ) -> Result<Self, SpectralError> {
        assert_eq!(coords.len(), weights.len() * dim);
        if let Some(i) = weights.iter().position(|&w| !(w > 0.0)) {
            return Err(SpectralError::NonPositiveWeight(i));
        }
        Ok(QuadratureGrid {
            coords,
            weights,
            dim,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, j: usize) -> &[f64] {
        &self.coords[j * self.dim..(j + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Total mass of the represented measure.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Coefficients of a function in the eigenbasis. Forms reuse the same
/// container, with entries indexed by the orthonormalized exact-form basis
/// `d phi_k / sqrt(lambda_k)` and required to vanish on kernel modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCoeffs {
    pub values: Vec<f64>,
}

impl SpectralCoeffs {
    pub fn new(values: Vec<f64>) -> Self {
        SpectralCoeffs { values }
    }

    pub fn zeros(n: usize) -> Self {
        SpectralCoeffs {
            values: vec![0.0; n],
        }
    }

    pub fn unit(n: usize, k: usize) -> Self {
        let mut values = vec![0.0; n];
        values[k] = 1.0;
        SpectralCoeffs { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn l2(&self) -> f64 {
        self.values.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// A derivative field: one component per axis, sampled on the system's
/// gradient grid. Pointwise magnitude sums componentwise.
#[derive(Debug, Clone)]
pub struct GradField {
    pub components: Vec<Vec<f64>>,
}

impl GradField {
    pub fn magnitude(&self) -> Vec<f64> {
        let n = self.components[0].len();
        let mut out = vec![0.0; n];
        for comp in &self.components {
            for (o, c) in out.iter_mut().zip(comp) {
                *o += c * c;
            }
        }
        for o in &mut out {
            *o = o.sqrt();
        }
        out
    }
}

/// Truncated eigen-decomposition of a generator together with sampled
/// eigenfunctions and their metric derivatives. Immutable after construction.
#[derive(Debug, Clone)]
pub struct SpectralSystem {
    name: String,
    metric: MetricKind,
    grid: QuadratureGrid,
    grad_grid: QuadratureGrid,
    /// true when gradient samples live on a staggered grid (finite-difference
    /// systems); analytic systems sample derivatives on the function grid
    staggered: bool,
    eigenvalues: Vec<f64>,
    /// `[mode][grid point]`
    eigenfunctions: Vec<Vec<f64>>,
    /// `[mode][axis][gradient grid point]`
    gradients: Vec<Vec<Vec<f64>>>,
    /// `[mode][grid point]`: metric derivative applied twice, 1d systems only
    second_derivatives: Option<Vec<Vec<f64>>>,
    /// multi-indices of tensor-product modes
    mode_indices: Option<Vec<Vec<usize>>>,
}

pub(crate) struct SystemParts {
    pub name: String,
    pub metric: MetricKind,
    pub grid: QuadratureGrid,
    pub grad_grid: QuadratureGrid,
    pub staggered: bool,
    pub eigenvalues: Vec<f64>,
    pub eigenfunctions: Vec<Vec<f64>>,
    pub gradients: Vec<Vec<Vec<f64>>>,
    pub second_derivatives: Option<Vec<Vec<f64>>>,
    pub mode_indices: Option<Vec<Vec<usize>>>,
}

impl SpectralSystem {
    /// Assembles and validates a system: eigenvalues sorted and non-negative,
    /// eigenfunctions orthonormal under the grid quadrature, and derivative
    /// fields compatible with the eigenvalues through integration by parts.
    pub(crate) fn assemble(
        parts: SystemParts,
        ortho_tol: f64,
        compat_tol: f64,
    ) -> Result<Self, SpectralError> {
        let sys = SpectralSystem {
            name: parts.name,
            metric: parts.metric,
            grid: parts.grid,
            grad_grid: parts.grad_grid,
            staggered: parts.staggered,
            eigenvalues: parts.eigenvalues,
            eigenfunctions: parts.eigenfunctions,
            gradients: parts.gradients,
            second_derivatives: parts.second_derivatives,
            mode_indices: parts.mode_indices,
        };
        for (k, lam) in sys.eigenvalues.iter().enumerate() {
            if !lam.is_finite() || *lam < -KERNEL_TOL {
                return Err(SpectralError::BadEigenvalues(k));
            }
            if k > 0 && sys.eigenvalues[k] < sys.eigenvalues[k - 1] - KERNEL_TOL {
                return Err(SpectralError::BadEigenvalues(k));
            }
        }
        sys.check_orthonormality(ortho_tol)?;
        sys.check_compatibility(compat_tol)?;
        Ok(sys)
    }

    fn check_orthonormality(&self, tol: f64) -> Result<(), SpectralError> {
        let w = self.grid.weights();
        for i in 0..self.n_modes() {
            for j in i..self.n_modes() {
                let g: f64 = self.eigenfunctions[i]
                    .iter()
                    .zip(&self.eigenfunctions[j])
                    .zip(w)
                    .map(|((a, b), wj)| a * b * wj)
                    .sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                let defect = (g - expect).abs();
                if defect > tol {
                    return Err(SpectralError::OrthonormalityDefect { defect, tol, i, j });
                }
            }
        }
        Ok(())
    }

    fn check_compatibility(&self, tol: f64) -> Result<(), SpectralError> {
        let mu = self.grad_grid.weights();
        for i in 0..self.n_modes() {
            for j in i..self.n_modes() {
                let mut g = 0.0;
                for axis in 0..self.dim() {
                    g += self.gradients[i][axis]
                        .iter()
                        .zip(&self.gradients[j][axis])
                        .zip(mu)
                        .map(|((a, b), wj)| a * b * wj)
                        .sum::<f64>();
                }
                let expect = if i == j { self.eigenvalues[i] } else { 0.0 };
                let defect = (g - expect).abs();
                if defect > tol * self.eigenvalues[j].max(1.0) {
                    return Err(SpectralError::CompatibilityDefect { defect, tol, i, j });
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn metric(&self) -> MetricKind {
        self.metric
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn grad_grid(&self) -> &QuadratureGrid {
        &self.grad_grid
    }

    pub fn mode_samples(&self, k: usize) -> &[f64] {
        &self.eigenfunctions[k]
    }

    pub fn mode_gradient(&self, k: usize) -> &[Vec<f64>] {
        &self.gradients[k]
    }

    /// Metric derivative applied twice to mode `k`, when available.
    pub fn mode_second_derivative(&self, k: usize) -> Option<&[f64]> {
        self.second_derivatives.as_ref().map(|t| t[k].as_slice())
    }

    pub fn has_second_derivatives(&self) -> bool {
        self.second_derivatives.is_some()
    }

    pub fn mode_index(&self, k: usize) -> Option<&[usize]> {
        self.mode_indices.as_ref().map(|t| t[k].as_slice())
    }

    /// Position of a tensor mode with the given multi-index.
    pub fn find_mode(&self, index: &[usize]) -> Option<usize> {
        self.mode_indices
            .as_ref()?
            .iter()
            .position(|k| k.as_slice() == index)
    }

    /// Indices of modes in the generator's kernel.
    pub fn kernel_modes(&self) -> Vec<usize> {
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l <= KERNEL_TOL)
            .map(|(k, _)| k)
            .collect()
    }

    /// `c_k = <f, phi_k>` by grid quadrature.
    pub fn project(&self, samples: &[f64]) -> Result<SpectralCoeffs, SpectralError> {
        if samples.len() != self.grid.len() {
            return Err(SpectralError::LengthMismatch {
                expected: self.grid.len(),
                got: samples.len(),
            });
        }
        let w = self.grid.weights();
        let values = self
            .eigenfunctions
            .iter()
            .map(|phi| {
                phi.iter()
                    .zip(samples)
                    .zip(w)
                    .map(|((p, s), wj)| p * s * wj)
                    .sum()
            })
            .collect();
        Ok(SpectralCoeffs::new(values))
    }

    /// Grid samples of `sum_k c_k phi_k`.
    pub fn synthesize(&self, c: &SpectralCoeffs) -> Vec<f64> {
        self.synthesize_weighted(&c.values)
    }

    pub(crate) fn synthesize_weighted(&self, factors: &[f64]) -> Vec<f64> {
        assert_eq!(factors.len(), self.n_modes());
        let mut out = vec![0.0; self.grid.len()];
        for (f, phi) in factors.iter().zip(&self.eigenfunctions) {
            if *f == 0.0 {
                continue;
            }
            for (o, p) in out.iter_mut().zip(phi) {
                *o += f * p;
            }
        }
        out
    }

    /// Applies the Borel function `phi` of the generator spectrally.
    pub fn functional_calculus(
        &self,
        phi: impl Fn(f64) -> f64,
        c: &SpectralCoeffs,
    ) -> Result<SpectralCoeffs, SpectralError> {
        assert_eq!(c.len(), self.n_modes());
        let mut values = Vec::with_capacity(c.len());
        for (k, (&ck, &lam)) in c.values.iter().zip(&self.eigenvalues).enumerate() {
            let m = phi(lam);
            if !m.is_finite() && ck != 0.0 {
                return Err(SpectralError::NonFiniteMultiplier {
                    index: k,
                    lambda: lam,
                });
            }
            values.push(if ck == 0.0 { 0.0 } else { m * ck });
        }
        Ok(SpectralCoeffs::new(values))
    }

    /// Weighted L^p norm of grid samples; `p = inf` takes the grid maximum.
    pub fn lp_norm(&self, samples: &[f64], p: f64) -> f64 {
        assert_eq!(samples.len(), self.grid.len());
        weighted_lp(samples, self.grid.weights(), p)
    }

    /// Weighted L^p norm of the pointwise magnitude of a derivative field.
    pub fn grad_lp_norm(&self, field: &GradField, p: f64) -> f64 {
        let mag = field.magnitude();
        assert_eq!(mag.len(), self.grad_grid.len());
        weighted_lp(&mag, self.grad_grid.weights(), p)
    }

    /// Metric derivative field of a synthesized function.
    pub fn derivative_field(&self, c: &SpectralCoeffs) -> GradField {
        self.gradient_weighted(&c.values)
    }

    pub(crate) fn gradient_weighted(&self, factors: &[f64]) -> GradField {
        assert_eq!(factors.len(), self.n_modes());
        let mut components = vec![vec![0.0; self.grad_grid.len()]; self.dim()];
        for (f, grad) in factors.iter().zip(&self.gradients) {
            if *f == 0.0 {
                continue;
            }
            for (comp, g) in components.iter_mut().zip(grad) {
                for (o, gv) in comp.iter_mut().zip(g) {
                    *o += f * gv;
                }
            }
        }
        GradField { components }
    }

    pub(crate) fn second_weighted(&self, factors: &[f64]) -> Option<Vec<f64>> {
        let table = self.second_derivatives.as_ref()?;
        let mut out = vec![0.0; self.grid.len()];
        for (f, row) in factors.iter().zip(table) {
            if *f == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(row) {
                *o += f * v;
            }
        }
        Some(out)
    }

    /// Inner product of two derivative fields against the reference measure.
    pub fn grad_inner(&self, a: &GradField, b: &GradField) -> f64 {
        let mu = self.grad_grid.weights();
        let mut acc = 0.0;
        for (ca, cb) in a.components.iter().zip(&b.components) {
            acc += ca
                .iter()
                .zip(cb)
                .zip(mu)
                .map(|((x, y), w)| x * y * w)
                .sum::<f64>();
        }
        acc
    }

    /// Transfers a single gradient component onto the function grid. Identity
    /// for collocated systems; staggered fields are averaged onto cells with
    /// the field extended by zero at the domain walls.
    pub fn grad_to_grid(&self, component: &[f64]) -> Vec<f64> {
        if !self.staggered {
            assert_eq!(component.len(), self.grid.len());
            return component.to_vec();
        }
        assert_eq!(component.len(), self.grid.len() - 1);
        let n = self.grid.len();
        let mut out = vec![0.0; n];
        for (i, o) in out.iter_mut().enumerate() {
            let left = if i == 0 { 0.0 } else { component[i - 1] };
            let right = if i == n - 1 { 0.0 } else { component[i] };
            *o = 0.5 * (left + right);
        }
        out
    }

    /// Metric distance between two grid points.
    pub fn grid_distance(&self, i: usize, j: usize) -> f64 {
        let x = self.grid.point(i);
        let y = self.grid.point(j);
        match self.metric {
            MetricKind::Euclidean => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            MetricKind::SqrtCoordinate => crate::operators::laguerre_distance(x, y),
        }
    }
}

fn weighted_lp(samples: &[f64], weights: &[f64], p: f64) -> f64 {
    if p == f64::INFINITY {
        return samples.iter().fold(0.0_f64, |m, s| m.max(s.abs()));
    }
    assert!(p >= 1.0, "L^p norms need p >= 1");
    let sum: f64 = samples
        .iter()
        .zip(weights)
        .map(|(s, w)| w * s.abs().powf(p))
        .sum();
    sum.powf(1.0 / p)
}
