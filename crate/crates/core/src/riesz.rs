//! Riesz transform `R^a = d (a + L)^{-1/2}` and the audit suite: the main
//! L^p bound with its explicit constant, the integral representation of the
//! pairing `<R^a f, omega>`, the bilinear embedding, the Lusin approximation
//! inequality, semigroup consistency checks, and the Bellman inequality
//! sweeps.
//!
//! Audits never throw on a failed bound; failures land in the report. Errors
//! are reserved for malformed inputs (kernel excitation at `a = 0`, forms
//! with kernel components, unsupported system shapes).

use crate::bellman::{
    eval_b, eval_b_eps, grad_b, grad_b_eps, hess_form_eps, hess_quadratic_form, BellmanParams,
    Mollifier,
};
use crate::report::{named, AuditReport, NamedValue};
use crate::semigroups::{poisson_spectral, poisson_subordinated, PoissonParams, SubordinationRule};
use crate::spectral::{GradField, SpectralCoeffs, SpectralSystem, KERNEL_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AuditError {
    #[error(
        "the unshifted Riesz transform needs kernel-orthogonal input (kernel mode {0} is excited)"
    )]
    KernelExcited(usize),
    #[error("form coefficients must vanish on kernel modes (mode {0} is nonzero)")]
    FormOnKernel(usize),
    #[error("audit needs twice-differentiated mode samples, which system `{0}` does not carry")]
    NoSecondDerivatives(String),
    #[error("maximal-function exponent must lie in (1, min(2, p)) (got alpha = {alpha}, p = {p})")]
    BadMaximalExponent { alpha: f64, p: f64 },
    #[error("exponent p must lie in (1, inf) (got {0})")]
    BadExponent(f64),
}

/// The explicit constant of the main bound, `16 max(p, p/(p-1))`.
pub fn riesz_constant(p: f64) -> f64 {
    assert!(
        p > 1.0 && p.is_finite(),
        "the L^p bound needs p in (1, inf)"
    );
    16.0 * p.max(p / (p - 1.0))
}

/// Multiplication by `sqrt(lambda + a)` in the eigenbasis.
pub fn sqrt_shifted(sys: &SpectralSystem, a: f64, c: &SpectralCoeffs) -> SpectralCoeffs {
    assert!(a >= 0.0);
    let values = c
        .values
        .iter()
        .zip(sys.eigenvalues())
        .map(|(ck, lam)| ck * (lam + a).sqrt())
        .collect();
    SpectralCoeffs::new(values)
}

/// Riesz transform `R^a f = d (a + L)^{-1/2} f` as a gradient field.
pub fn riesz_apply(
    sys: &SpectralSystem,
    a: f64,
    c: &SpectralCoeffs,
) -> Result<GradField, AuditError> {
    assert!(a >= 0.0);
    let mut factors = Vec::with_capacity(c.len());
    for (k, (&ck, &lam)) in c.values.iter().zip(sys.eigenvalues()).enumerate() {
        if lam <= KERNEL_TOL && a == 0.0 {
            if ck != 0.0 {
                return Err(AuditError::KernelExcited(k));
            }
            factors.push(0.0);
        } else {
            factors.push(ck / (lam + a).sqrt());
        }
    }
    Ok(sys.gradient_weighted(&factors))
}

/// Seeded bundle of L^2-normalized test functions with polynomially decaying
/// spectral coefficients. Kernel modes are zeroed when `a = 0`.
#[derive(Debug, Clone)]
pub struct TestFunctionSet {
    pub seed: u64,
    pub count: usize,
    pub decay: f64,
    functions: Vec<SpectralCoeffs>,
}

impl TestFunctionSet {
    pub fn generate(sys: &SpectralSystem, seed: u64, count: usize, decay: f64, a: f64) -> Self {
        assert!(decay > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = sys.n_modes();
        let mut functions = Vec::with_capacity(count);
        while functions.len() < count {
            let mut values: Vec<f64> = (0..n)
                .map(|k| {
                    let g: f64 = rng.sample(StandardNormal);
                    g / (1.0 + k as f64).powf(decay)
                })
                .collect();
            if a == 0.0 {
                for (k, lam) in sys.eigenvalues().iter().enumerate() {
                    if *lam <= KERNEL_TOL {
                        values[k] = 0.0;
                    }
                }
            }
            let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            for v in &mut values {
                *v /= norm;
            }
            functions.push(SpectralCoeffs::new(values));
        }
        TestFunctionSet {
            seed,
            count,
            decay,
            functions,
        }
    }

    pub fn functions(&self) -> &[SpectralCoeffs] {
        &self.functions
    }

    /// Form-valued variant: coefficients in the orthonormal exact-form basis,
    /// always zero on kernel modes.
    pub fn generate_forms(sys: &SpectralSystem, seed: u64, count: usize, decay: f64) -> Self {
        let mut set = Self::generate(sys, seed, count, decay, 0.0);
        for f in &mut set.functions {
            for (k, lam) in sys.eigenvalues().iter().enumerate() {
                if *lam <= KERNEL_TOL {
                    f.values[k] = 0.0;
                }
            }
            let norm = f.l2();
            if norm > 0.0 {
                for v in &mut f.values {
                    *v /= norm;
                }
            }
        }
        set
    }
}

fn check_form(sys: &SpectralSystem, omega: &SpectralCoeffs) -> Result<(), AuditError> {
    for (k, (&w, &lam)) in omega.values.iter().zip(sys.eigenvalues()).enumerate() {
        if lam <= KERNEL_TOL && w != 0.0 {
            return Err(AuditError::FormOnKernel(k));
        }
    }
    Ok(())
}

fn base_parameters(sys: &SpectralSystem) -> Vec<NamedValue> {
    vec![
        named("n_modes", sys.n_modes() as f64),
        named("grid_size", sys.grid().len() as f64),
    ]
}

// ---------------------------------------------------------------------------
// main bound
// ---------------------------------------------------------------------------

/// Audits the two-sided L^p bound: the forward ratio
/// `|| d f ||_p / || sqrt(a + L) f ||_p <= c_p` and the reverse inequality
/// `|| sqrt(a + L) f ||_p <= sqrt(a) ||f||_p + c_p || d f ||_p`, with
/// `c_p = 16 max(p, p/(p-1))`.
pub fn main_bound_audit(
    sys: &SpectralSystem,
    p: f64,
    a: f64,
    tests: &TestFunctionSet,
) -> AuditReport {
    let start = std::time::Instant::now();
    let cp = riesz_constant(p);
    let mut worst_ratio = 0.0_f64;
    let mut worst_reverse = f64::INFINITY;
    for f in tests.functions() {
        let grad_norm = sys.grad_lp_norm(&sys.derivative_field(f), p);
        let shifted = sqrt_shifted(sys, a, f);
        let shifted_norm = sys.lp_norm(&sys.synthesize(&shifted), p);
        if shifted_norm == 0.0 {
            continue;
        }
        worst_ratio = worst_ratio.max(grad_norm / shifted_norm);
        let f_norm = sys.lp_norm(&sys.synthesize(f), p);
        let reverse = (a.sqrt() * f_norm + cp * grad_norm - shifted_norm) / shifted_norm;
        worst_reverse = worst_reverse.min(reverse);
    }
    let margin = (cp - worst_ratio).min(worst_reverse);
    let mut parameters = base_parameters(sys);
    parameters.push(named("seed", tests.seed as f64));
    parameters.push(named("p", p));
    parameters.push(named("a", a));
    parameters.push(named("test_count", tests.count as f64));
    parameters.push(named("decay", tests.decay));
    let observed = vec![
        named("worst_forward_ratio", worst_ratio),
        named("forward_margin", cp - worst_ratio),
        named("worst_reverse_rel_margin", worst_reverse),
    ];
    let mut report = AuditReport::new(
        "riesz-main",
        sys.name(),
        parameters,
        observed,
        named("c_p", cp),
        margin,
        1e-6,
    );
    report.runtime_ms = start.elapsed().as_millis() as u64;
    report
}

// ---------------------------------------------------------------------------
// integral representation
// ---------------------------------------------------------------------------

/// Geometric-panel quadrature for integrals `int_0^T g(t) t dt` of smooth
/// integrands decaying like `e^{-2 t sqrt(lambda_min + a)}`.
#[derive(Debug, Clone, Copy)]
pub struct TimeRule {
    pub nodes_per_panel: usize,
    pub halvings: usize,
    pub tail_rel_tol: f64,
}

impl Default for TimeRule {
    fn default() -> Self {
        TimeRule {
            nodes_per_panel: 16,
            halvings: 30,
            tail_rel_tol: 1e-9,
        }
    }
}

impl TimeRule {
    /// Nodes and weights on `[0, T]`, panels halving toward zero.
    pub fn nodes(&self, horizon: f64) -> (Vec<f64>, Vec<f64>) {
        let mut edges = Vec::with_capacity(self.halvings + 2);
        edges.push(0.0);
        for j in (0..=self.halvings).rev() {
            edges.push(horizon * 2.0_f64.powi(-(j as i32)));
        }
        edges.dedup_by(|a, b| (*a - *b).abs() < f64::EPSILON * horizon);
        crate::quadrature::composite_gauss_legendre(&edges, self.nodes_per_panel)
    }
}

/// Magnitude audit of the identity between `int <R^a f, omega> dm` and the
/// space-time pairing `4 int int <d P_t f, d/dt P_t omega> dm t dt`.
///
/// The space integral is taken at grid level and the time integral over
/// geometric panels up to a horizon `T` whose spectral tail is certified with
/// an exact per-mode bound. The two sides agree in magnitude; the observed
/// sign relation is recorded, not asserted.
pub fn integral_rep_audit(
    sys: &SpectralSystem,
    a: f64,
    f: &SpectralCoeffs,
    omega: &SpectralCoeffs,
    rule: &TimeRule,
) -> Result<AuditReport, AuditError> {
    let start = std::time::Instant::now();
    check_form(sys, omega)?;
    if a == 0.0 {
        for (k, (&ck, &lam)) in f.values.iter().zip(sys.eigenvalues()).enumerate() {
            if lam <= KERNEL_TOL && ck != 0.0 {
                return Err(AuditError::KernelExcited(k));
            }
        }
    }
    let lams = sys.eigenvalues();
    let n = sys.n_modes();

    // spectral left side: sum_k f_k w_k sqrt(lambda_k / (lambda_k + a))
    let mut lhs = 0.0;
    let mut scale = 0.0;
    for k in 0..n {
        if lams[k] <= KERNEL_TOL {
            continue;
        }
        let m = (lams[k] / (lams[k] + a)).sqrt();
        lhs += f.values[k] * omega.values[k] * m;
        scale += (f.values[k] * omega.values[k] * m).abs();
    }

    // per-mode exact tail of 4 int_T^inf e^{-2 sigma t} t dt
    let tail_at = |horizon: f64| -> f64 {
        let mut tail = 0.0;
        for k in 0..n {
            if lams[k] <= KERNEL_TOL {
                continue;
            }
            let sigma = (lams[k] + a).sqrt();
            let amp = (f.values[k] * omega.values[k]).abs() * (lams[k] * (lams[k] + a)).sqrt();
            tail += 4.0
                * amp
                * (-2.0 * sigma * horizon).exp()
                * (horizon / (2.0 * sigma) + 1.0 / (4.0 * sigma * sigma));
        }
        tail
    };
    let tol_scale = scale.max(1e-12);
    let mut horizon = 1.0;
    let mut certified = true;
    while tail_at(horizon) > rule.tail_rel_tol * tol_scale {
        horizon *= 2.0;
        if horizon > 1e6 {
            certified = false;
            break;
        }
    }

    // panelwise time quadrature of the grid-level pairing
    let (tn, tw) = rule.nodes(horizon);
    let mut rhs = 0.0;
    for (&t, &w) in tn.iter().zip(&tw) {
        let mut f_factors = vec![0.0; n];
        let mut w_factors = vec![0.0; n];
        for k in 0..n {
            let sigma = (lams[k] + a).sqrt();
            let decay = (-t * sigma).exp();
            f_factors[k] = f.values[k] * decay;
            w_factors[k] = if lams[k] <= KERNEL_TOL {
                0.0
            } else {
                -omega.values[k] * sigma * decay / lams[k].sqrt()
            };
        }
        let df = sys.gradient_weighted(&f_factors);
        let dw = sys.gradient_weighted(&w_factors);
        rhs += 4.0 * w * t * sys.grad_inner(&df, &dw);
    }

    let tail = tail_at(horizon);
    let floor = 1e-12 * tol_scale.max(1.0);
    let gap = if lhs.abs() <= floor && rhs.abs() <= floor {
        0.0
    } else {
        (lhs.abs() - rhs.abs()).abs() / lhs.abs().max(rhs.abs())
    };
    let sign = (lhs * rhs).signum();

    let mut parameters = base_parameters(sys);
    parameters.push(named("a", a));
    parameters.push(named("horizon", horizon));
    let observed = vec![
        named("lhs", lhs),
        named("rhs", rhs),
        named("relative_gap", gap),
        named("sign_product", sign),
        named("tail_bound", tail),
    ];
    let mut report = AuditReport::new(
        "integral-rep",
        sys.name(),
        parameters,
        observed,
        named("relative_gap_tolerance", 1e-4),
        1e-4 - gap,
        0.0,
    );
    if !certified {
        report.passed = false;
        report = report.with_flag(format!(
            "spectral tail not certified below {:.1e} of scale at horizon {horizon}",
            rule.tail_rel_tol
        ));
    }
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

// ---------------------------------------------------------------------------
// bilinear embedding
// ---------------------------------------------------------------------------

/// Audits the bilinear embedding: the space-time integral
/// `int_0^inf int |grad-bar P_t f| |grad-bar P_t omega| dm t dt`, with
/// `|grad-bar u|^2 = |du/dt|^2 + |d u|^2`, is at most
/// `4 max(p, q) ||f||_p ||omega||_q`. The numeric part runs to a horizon
/// whose tail is certified by a Cauchy-Schwarz bound and added to the left
/// side.
pub fn bilinear_audit(
    sys: &SpectralSystem,
    p: f64,
    a: f64,
    f: &SpectralCoeffs,
    omega: &SpectralCoeffs,
    rule: &TimeRule,
) -> Result<AuditReport, AuditError> {
    let start = std::time::Instant::now();
    if p <= 1.0 || !p.is_finite() {
        return Err(AuditError::BadExponent(p));
    }
    check_form(sys, omega)?;
    if !sys.has_second_derivatives() {
        return Err(AuditError::NoSecondDerivatives(sys.name().to_string()));
    }
    let q = p / (p - 1.0);
    let lams = sys.eigenvalues();
    let n = sys.n_modes();

    let f_norm = sys.lp_norm(&sys.synthesize(f), p);
    let omega_factors: Vec<f64> = (0..n)
        .map(|k| {
            if lams[k] <= KERNEL_TOL {
                0.0
            } else {
                omega.values[k] / lams[k].sqrt()
            }
        })
        .collect();
    let omega_norm = sys.grad_lp_norm(&sys.gradient_weighted(&omega_factors), q);
    let bound_const = 4.0 * p.max(q);
    let bound = bound_const * f_norm * omega_norm;

    // decay rates of the two space-time gradients; kernel modes only
    // contribute through the shift
    let sigma_min = |c: &SpectralCoeffs| -> Option<f64> {
        let mut s: Option<f64> = None;
        for k in 0..n {
            if c.values[k] == 0.0 {
                continue;
            }
            if lams[k] <= KERNEL_TOL && a == 0.0 {
                continue;
            }
            let sigma = (lams[k] + a).sqrt();
            s = Some(s.map_or(sigma, |v: f64| v.min(sigma)));
        }
        s
    };

    // Cauchy-Schwarz tail amplitudes
    let cf: f64 = (0..n)
        .map(|k| f.values[k] * f.values[k] * (2.0 * lams[k] + a))
        .sum::<f64>()
        .sqrt();
    let second_l2: Vec<f64> = (0..n)
        .map(|k| {
            if lams[k] <= KERNEL_TOL {
                return 0.0;
            }
            let row = sys.mode_second_derivative(k).unwrap();
            let l2 = row
                .iter()
                .zip(sys.grid().weights())
                .map(|(v, w)| v * v * w)
                .sum::<f64>()
                .sqrt();
            l2 / lams[k].sqrt()
        })
        .collect();
    let cw_dt: f64 = (0..n)
        .map(|k| omega.values[k] * omega.values[k] * (lams[k] + a))
        .sum::<f64>();
    let cw_grad: f64 = (0..n)
        .map(|k| omega.values[k].abs() * second_l2[k])
        .sum::<f64>();
    let cw = (cw_dt + cw_grad * cw_grad).sqrt();

    // averaging staggered gradient components onto cells can inflate the
    // discrete L^2 norm by the ratio of adjacent cell weights to the
    // interface weight; collocated grids have ratio 1
    let interp_factor: f64 = if sys.grad_grid().len() == sys.grid().len() {
        1.0
    } else {
        let cells = sys.grid().weights();
        let ifaces = sys.grad_grid().weights();
        (0..ifaces.len())
            .map(|k| (cells[k] + cells[k + 1]) / (2.0 * ifaces[k]))
            .fold(1.0_f64, f64::max)
    };

    let (lhs_numeric, tail, horizon, certified) = match (sigma_min(f), sigma_min(omega)) {
        (Some(sf), Some(sw)) => {
            let pair_rate = sf + sw;
            let tail_at = |horizon: f64| -> f64 {
                1.001
                    * interp_factor
                    * cf
                    * cw
                    * (-pair_rate * horizon).exp()
                    * (horizon / pair_rate + 1.0 / (pair_rate * pair_rate))
            };
            let tol = rule.tail_rel_tol * bound.max(1e-12);
            let mut horizon = 1.0;
            let mut certified = true;
            while tail_at(horizon) > tol {
                horizon *= 2.0;
                if horizon > 1e6 {
                    certified = false;
                    break;
                }
            }
            let (tn, tw) = rule.nodes(horizon);
            let mut acc = 0.0;
            for (&t, &w) in tn.iter().zip(&tw) {
                acc += w * t * spacetime_gradient_pairing(sys, a, f, omega, t);
            }
            (acc, tail_at(horizon), horizon, certified)
        }
        // one of the inputs evolves trivially: the pairing vanishes
        _ => (0.0, 0.0, 0.0, true),
    };

    let lhs = lhs_numeric + tail;
    let margin = bound - lhs;
    let mut parameters = base_parameters(sys);
    parameters.push(named("p", p));
    parameters.push(named("a", a));
    parameters.push(named("horizon", horizon));
    let observed = vec![
        named("lhs_certified", lhs),
        named("lhs_numeric", lhs_numeric),
        named("tail_bound", tail),
        named("f_norm_p", f_norm),
        named("omega_norm_q", omega_norm),
    ];
    let mut report = AuditReport::new(
        "bilinear",
        sys.name(),
        parameters,
        observed,
        named("bilinear_bound", bound),
        margin,
        1e-9 * bound.max(1.0),
    );
    if !certified {
        report.passed = false;
        report = report.with_flag("spectral tail not certified".to_string());
    }
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// `int |grad-bar P_t f| |grad-bar P_t omega| dm` at a fixed time, assembled
/// on the function grid. Staggered gradient components are averaged onto
/// cells; the form's spatial derivative uses the twice-differentiated mode
/// samples.
fn spacetime_gradient_pairing(
    sys: &SpectralSystem,
    a: f64,
    f: &SpectralCoeffs,
    omega: &SpectralCoeffs,
    t: f64,
) -> f64 {
    let lams = sys.eigenvalues();
    let n = sys.n_modes();
    let m = sys.grid().len();

    let mut f_evolved = vec![0.0; n];
    let mut f_dt = vec![0.0; n];
    let mut w_evolved = vec![0.0; n];
    let mut w_dt = vec![0.0; n];
    for k in 0..n {
        let sigma = (lams[k] + a).sqrt();
        let decay = (-t * sigma).exp();
        f_evolved[k] = f.values[k] * decay;
        f_dt[k] = -sigma * f_evolved[k];
        if lams[k] > KERNEL_TOL {
            w_evolved[k] = omega.values[k] * decay / lams[k].sqrt();
            w_dt[k] = -sigma * w_evolved[k];
        }
    }

    let mut f_sq = vec![0.0; m];
    let dt_f = sys.synthesize_weighted(&f_dt);
    for (o, v) in f_sq.iter_mut().zip(&dt_f) {
        *o += v * v;
    }
    for comp in sys.gradient_weighted(&f_evolved).components {
        let on_grid = sys.grad_to_grid(&comp);
        for (o, v) in f_sq.iter_mut().zip(&on_grid) {
            *o += v * v;
        }
    }

    let mut w_sq = vec![0.0; m];
    for comp in sys.gradient_weighted(&w_dt).components {
        let on_grid = sys.grad_to_grid(&comp);
        for (o, v) in w_sq.iter_mut().zip(&on_grid) {
            *o += v * v;
        }
    }
    let grad_w = sys.second_weighted(&w_evolved).expect("checked by caller");
    for (o, v) in w_sq.iter_mut().zip(&grad_w) {
        *o += v * v;
    }

    f_sq.iter()
        .zip(&w_sq)
        .zip(sys.grid().weights())
        .map(|((a2, b2), w)| w * (a2 * b2).sqrt())
        .sum()
}

// ---------------------------------------------------------------------------
// Lusin approximation
// ---------------------------------------------------------------------------

/// Audits the Lusin-type pointwise inequality
/// `|f(x) - f(y)| <= d(x, y) (g(x) + g(y))` with
/// `g = sup_s (h_s |df|^alpha)^(1/alpha) + sup_s h_s |sqrt(L) f|`, the
/// supremum approximated by a maximum over `s_grid`. The constant of the
/// underlying theorem is existential, so the audit reports the empirical
/// ratio and checks only structural facts: no pair may have a zero
/// denominator with distinct function values, and the L^p norm of `g` is
/// reported against `c_emp (||f||_p + ||df||_p)`.
pub fn lusin_audit(
    sys: &SpectralSystem,
    f: &SpectralCoeffs,
    p: f64,
    alpha: f64,
    s_grid: &[f64],
    pairs: &[(usize, usize)],
) -> Result<AuditReport, AuditError> {
    let start = std::time::Instant::now();
    if p <= 1.0 || !p.is_finite() {
        return Err(AuditError::BadExponent(p));
    }
    if !(alpha > 1.0 && alpha < p.min(2.0)) {
        return Err(AuditError::BadMaximalExponent { alpha, p });
    }
    let f_vals = sys.synthesize(f);
    let grad = sys.derivative_field(f);
    let dmag_grad_grid = grad.magnitude();
    let dmag: Vec<f64> = if sys.grad_grid().len() == sys.grid().len() {
        dmag_grad_grid.clone()
    } else {
        sys.grad_to_grid(&dmag_grad_grid)
    };
    let sqrt_l = sys.synthesize(&sqrt_shifted(sys, 0.0, f));

    let heat_max = |base: &[f64], power: Option<f64>| -> Vec<f64> {
        let samples: Vec<f64> = match power {
            Some(r) => base.iter().map(|v| v.abs().powf(r)).collect(),
            None => base.iter().map(|v| v.abs()).collect(),
        };
        let coeffs = sys.project(&samples).expect("grid-sized samples");
        // the supremum over s > 0 contains the s -> 0 limit, which is the
        // (non-negative) base function itself
        let mut out: Vec<f64> = base.iter().map(|v| v.abs()).collect();
        for &s in s_grid {
            let evolved: Vec<f64> = coeffs
                .values
                .iter()
                .zip(sys.eigenvalues())
                .map(|(c, lam)| c * (-s * lam).exp())
                .collect();
            let vals = sys.synthesize_weighted(&evolved);
            for (o, v) in out.iter_mut().zip(&vals) {
                // heat evolution of a projected non-negative sample can dip
                // slightly negative; clamp before the fractional power
                let v = v.max(0.0);
                let v = match power {
                    Some(r) => v.powf(1.0 / r),
                    None => v,
                };
                *o = o.max(v);
            }
        }
        out
    };

    let g1 = heat_max(&dmag, Some(alpha));
    let g2 = heat_max(&sqrt_l, None);
    let g: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| a + b).collect();

    let f_scale = sys.lp_norm(&f_vals, f64::INFINITY).max(1e-300);
    let mut violations = 0_usize;
    let mut worst_ratio = 0.0_f64;
    for &(i, j) in pairs {
        let num = (f_vals[i] - f_vals[j]).abs();
        let den = sys.grid_distance(i, j) * (g[i] + g[j]);
        if den <= 1e-14 * f_scale {
            if num > 1e-10 * f_scale {
                violations += 1;
            }
            continue;
        }
        worst_ratio = worst_ratio.max(num / den);
    }

    let g_norm = sys.lp_norm(&g, p);
    let f_norm = sys.lp_norm(&f_vals, p);
    let df_norm = sys.grad_lp_norm(&grad, p);
    let c_norm = g_norm / (f_norm + df_norm).max(1e-300);
    let c_emp = worst_ratio.max(c_norm);

    let finite = c_emp.is_finite();
    let margin = if violations == 0 && finite {
        0.0
    } else {
        -(violations.max(1) as f64)
    };
    let mut parameters = base_parameters(sys);
    parameters.push(named("p", p));
    parameters.push(named("alpha", alpha));
    parameters.push(named("s_grid_len", s_grid.len() as f64));
    parameters.push(named("pair_count", pairs.len() as f64));
    let observed = vec![
        named("empirical_constant", c_emp),
        named("worst_pair_ratio", worst_ratio),
        named("norm_ratio", c_norm),
        named("violations", violations as f64),
        named("g_norm_p", g_norm),
    ];
    let mut report = AuditReport::new(
        "lusin",
        sys.name(),
        parameters,
        observed,
        named("zero_denominator_violations", 0.0),
        margin,
        0.0,
    );
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

// ---------------------------------------------------------------------------
// semigroup consistency
// ---------------------------------------------------------------------------

/// Bundled semigroup checks at a fixed shift `a`: agreement of the spectral
/// and subordinated Poisson routes, the contraction bound with factor
/// `rho_a(t)`, commutation of the differential with the semigroup at grid
/// level, strong continuity along shrinking times, and (for `a > 0`) the
/// closed form of the time integral of `rho_a`.
pub fn semigroup_audit(
    sys: &SpectralSystem,
    rule: &SubordinationRule,
    a: f64,
    p_values: &[f64],
    t_values: &[f64],
    tests: &TestFunctionSet,
) -> AuditReport {
    let start = std::time::Instant::now();
    let n = sys.n_modes();

    // multiplier gap on a fully excited coefficient vector
    let ones = SpectralCoeffs::new(vec![1.0; n]);
    let mut sub_gap = 0.0_f64;
    for &t in t_values {
        let pp = PoissonParams::new(a, t).expect("valid parameters");
        let spectral = poisson_spectral(sys, &pp, &ones);
        let subordinated = poisson_subordinated(sys, rule, &pp, &ones);
        for (s, b) in spectral.values.iter().zip(&subordinated.values) {
            sub_gap = sub_gap.max((s - b).abs());
        }
    }

    // contraction with factor rho_a(t)
    let mut contraction_margin = f64::INFINITY;
    for f in tests.functions() {
        let f_vals = sys.synthesize(f);
        for &t in t_values {
            let pp = PoissonParams::new(a, t).expect("valid parameters");
            let evolved = sys.synthesize(&poisson_spectral(sys, &pp, f));
            let rho = rule.rho(a, t);
            for &p in p_values {
                let margin = rho * sys.lp_norm(&f_vals, p) - sys.lp_norm(&evolved, p);
                contraction_margin = contraction_margin.min(margin);
            }
        }
    }

    // d P_t f against the form semigroup applied to d f
    let mut commutation_gap = 0.0_f64;
    for f in tests.functions().iter().take(5) {
        for &t in t_values {
            let factors: Vec<f64> = f
                .values
                .iter()
                .zip(sys.eigenvalues())
                .map(|(c, lam)| c * (-t * (lam + a).sqrt()).exp())
                .collect();
            let direct = sys.gradient_weighted(&factors);
            // route through exact-form coefficients c_k sqrt(lambda_k)
            let form_factors: Vec<f64> = f
                .values
                .iter()
                .zip(sys.eigenvalues())
                .map(|(c, lam)| {
                    if *lam <= KERNEL_TOL {
                        0.0
                    } else {
                        let evolved = c * lam.sqrt() * (-t * (lam + a).sqrt()).exp();
                        evolved / lam.sqrt()
                    }
                })
                .collect();
            let through_form = sys.gradient_weighted(&form_factors);
            let mut num = 0.0;
            let mut den = 0.0;
            for (da, db) in direct.components.iter().zip(&through_form.components) {
                for ((x, y), w) in da.iter().zip(db).zip(sys.grad_grid().weights()) {
                    num += w * (x - y) * (x - y);
                    den += w * x * x;
                }
            }
            if den > 0.0 {
                commutation_gap = commutation_gap.max((num / den).sqrt());
            }
        }
    }

    // strong continuity along shrinking times
    let mut continuity_defect = 0.0_f64;
    if let Some(f) = tests.functions().first() {
        let mut last = f64::INFINITY;
        for &t in &[1.0, 0.1, 0.01] {
            let pp = PoissonParams::new(a, t).expect("valid parameters");
            let evolved = poisson_spectral(sys, &pp, f);
            let dist = evolved
                .values
                .iter()
                .zip(&f.values)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            if dist > last {
                continuity_defect = continuity_defect.max(dist - last);
            }
            last = dist;
        }
    }

    let rho_integral_err = if a > 0.0 {
        (rule.rho_time_integral(a) - 1.0 / a.sqrt()).abs()
    } else {
        0.0
    };

    let margins = [
        1e-6 - sub_gap,
        contraction_margin + 1e-8,
        1e-6 - commutation_gap,
        -continuity_defect,
        1e-8 - rho_integral_err,
    ];
    let margin = margins.iter().cloned().fold(f64::INFINITY, f64::min);

    let mut parameters = base_parameters(sys);
    parameters.push(named("seed", tests.seed as f64));
    parameters.push(named("a", a));
    let observed = vec![
        named("max_subordination_gap", sub_gap),
        named("worst_contraction_margin", contraction_margin),
        named("max_commutation_gap", commutation_gap),
        named("continuity_defect", continuity_defect),
        named("rho_integral_err", rho_integral_err),
    ];
    let mut report = AuditReport::new(
        "semigroup",
        sys.name(),
        parameters,
        observed,
        named("combined_margin_floor", 0.0),
        margin,
        0.0,
    );
    report.runtime_ms = start.elapsed().as_millis() as u64;
    report
}

// ---------------------------------------------------------------------------
// Bellman inequality sweeps
// ---------------------------------------------------------------------------

/// Randomized verification of the Bellman derivative and Hessian lower
/// bounds, the upper bounds, the Young inequality, and their mollified
/// analogues (which must also hold on the axes). Sample ranges are bounded
/// so that rounding noise stays below the slack tolerance.
pub fn bellman_sweep_audit(
    p: f64,
    seed: u64,
    samples: usize,
    mollified_samples: usize,
    epsilons: &[f64],
) -> AuditReport {
    let start = std::time::Instant::now();
    let params = BellmanParams::new(p).expect("p >= 2");
    let BellmanParams { q, delta, .. } = params;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let track = |slack: f64, current: &mut f64| {
        *current = current.min(slack);
    };

    let mut w_first = f64::INFINITY;
    let mut w_hess = f64::INFINITY;
    let mut w_upper = f64::INFINITY;
    let mut w_grad_upper = f64::INFINITY;
    let mut w_young = f64::INFINITY;
    let mut drawn = 0;
    while drawn < samples {
        let u: f64 = rng.gen_range(1e-3..4.0);
        let v: f64 = rng.gen_range(1e-3..4.0);
        let up = u.powf(p);
        let vq = v.powf(q);
        if (up - vq).abs() <= 1e-9 * up.abs().max(vq.abs()).max(1.0) {
            continue; // interface neighborhood: derivative branches jump
        }
        drawn += 1;
        let alpha: f64 = rng.gen_range(-2.0..2.0);
        let beta: f64 = rng.gen_range(-2.0..2.0);
        let (du, dv) = grad_b(&params, u, v).expect("interior point");
        track(du / u - 2.0 * delta * v.powf(2.0 - q), &mut w_first);
        track(dv / v - 2.0 * delta * v.powf(q - 2.0), &mut w_first);
        track(
            p * (1.0 + delta) * u.powf(p - 1.0) + 2.0 * delta * v - du,
            &mut w_grad_upper,
        );
        track(
            (q + delta * (2.0 - q)) * v.powf(q - 1.0) - dv,
            &mut w_grad_upper,
        );
        let form = hess_quadratic_form(&params, u, v, alpha, beta).expect("off interface");
        track(
            form - delta * (v.powf(2.0 - q) * alpha * alpha + v.powf(q - 2.0) * beta * beta),
            &mut w_hess,
        );
        track(
            (1.0 + 2.0 / p) * up + (2.0 / q) * vq - eval_b(&params, u, v),
            &mut w_upper,
        );
        track(
            (2.0 / p) * up + (2.0 / q - 1.0) * vq - u * u * v.powf(2.0 - q),
            &mut w_young,
        );
    }

    let mut w_first_eps = f64::INFINITY;
    let mut w_hess_eps = f64::INFINITY;
    let mut w_upper_eps = f64::INFINITY;
    let mut w_grad_upper_eps = f64::INFINITY;
    let mut w_product = f64::INFINITY;
    for &eps in epsilons {
        let moll = Mollifier::bump(eps).expect("valid width");
        for i in 0..mollified_samples {
            // force axis points so the smoothed bounds are exercised at
            // u = 0 and v = 0 as well
            let u: f64 = if i % 16 == 5 {
                0.0
            } else {
                rng.gen_range(0.0..4.0)
            };
            let v: f64 = if i % 8 == 3 {
                0.0
            } else {
                rng.gen_range(0.0..4.0)
            };
            let alpha: f64 = rng.gen_range(-2.0..2.0);
            let beta: f64 = rng.gen_range(-2.0..2.0);
            let (du, dv) = grad_b_eps(&params, &moll, u, v);
            track(
                du - delta * u * moll.bracket_moment(v, 2.0 - q),
                &mut w_first_eps,
            );
            track(
                dv - delta * v * moll.bracket_moment(v, q - 2.0),
                &mut w_first_eps,
            );
            track(
                p * (1.0 + delta) * moll.bracket_moment(u, p - 1.0)
                    + 2.0 * delta * moll.bracket_moment(v, 1.0)
                    - du,
                &mut w_grad_upper_eps,
            );
            track(
                (q + delta * (2.0 - q)) * moll.bracket_moment(v, q - 1.0) - dv,
                &mut w_grad_upper_eps,
            );
            let form = hess_form_eps(&params, &moll, u, v, alpha, beta);
            track(
                form - delta
                    * (moll.bracket_moment(v, 2.0 - q) * alpha * alpha
                        + moll.bracket_moment(v, q - 2.0) * beta * beta),
                &mut w_hess_eps,
            );
            track(
                (1.0 + 2.0 / p) * moll.bracket_moment(u, p) + (2.0 / q) * moll.bracket_moment(v, q)
                    - eval_b_eps(&params, &moll, u, v),
                &mut w_upper_eps,
            );
            track(
                moll.bracket_moment(v, 2.0 - q) * alpha * alpha
                    + moll.bracket_moment(v, q - 2.0) * beta * beta
                    - 2.0 * alpha.abs() * beta.abs(),
                &mut w_product,
            );
        }
    }

    for w in [
        w_first,
        w_hess,
        w_upper,
        w_grad_upper,
        w_young,
        w_first_eps,
        w_hess_eps,
        w_upper_eps,
        w_grad_upper_eps,
        w_product,
    ] {
        worst = worst.min(w);
    }

    let parameters = vec![
        named("p", p),
        named("seed", seed as f64),
        named("samples", samples as f64),
        named("mollified_samples", mollified_samples as f64),
    ];
    let observed = vec![
        named("worst_slack", worst),
        named("worst_first_derivative_slack", w_first),
        named("worst_hessian_slack", w_hess),
        named("worst_upper_bound_slack", w_upper),
        named("worst_gradient_upper_bound_slack", w_grad_upper),
        named("worst_young_slack", w_young),
        named("worst_mollified_first_derivative_slack", w_first_eps),
        named("worst_mollified_hessian_slack", w_hess_eps),
        named("worst_mollified_upper_bound_slack", w_upper_eps),
        named(
            "worst_mollified_gradient_upper_bound_slack",
            w_grad_upper_eps,
        ),
        named("worst_product_bound_slack", w_product),
    ];
    let mut report = AuditReport::new(
        "bellman",
        "-",
        parameters,
        observed,
        named("zero_slack", 0.0),
        worst,
        1e-12,
    );
    report.runtime_ms = start.elapsed().as_millis() as u64;
    report
}
