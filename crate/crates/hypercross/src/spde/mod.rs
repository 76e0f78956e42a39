//! A parametric diffusion problem on `[−1, 1]` with affine coefficient
//! `σ(x, y) = σ̄ + Σ_j ψ_j(x)·y_j`, `y ∈ [−1, 1]^d`, solved by finite differences
//! and expanded in tensor Legendre polynomials of `y`.
//!
//! The x-norms use Lebesgue measure on `[−1, 1]`; `y` carries the uniform
//! probability measure.

mod quadrature;
mod tridiag;

pub use quadrature::{gauss_legendre, orthonormal_legendre};
pub use tridiag::solve_tridiagonal;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::analytic_constant;
use crate::error::{Error, Result};
use crate::weights::{CrossSpec, SmoothnessSequence, ValidatedSpec, MEMBERSHIP_TOL};

/// Largest supported number of parametric dimensions.
pub const MAX_DIM: usize = 4;

/// Closed-form model families.
///
/// `σ̄ ≡ sigma_bar`, `ψ_j(x) = c·e^{−decay·j}·cos(jπx)`, `f ≡ rhs`, rates `r_j = rate_slope·j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpdeConfig {
    pub d: usize,
    pub n: usize,
    pub sigma_bar: f64,
    pub c: f64,
    pub decay: f64,
    pub rhs: f64,
    pub rate_slope: f64,
    /// Algebraic prefactor parameters of the analytic spec used for `M_value`.
    pub p: f64,
    pub q: f64,
}

impl Default for SpdeConfig {
    fn default() -> Self {
        Self { d: 3, n: 513, sigma_bar: 1.0, c: 0.5, decay: 1.5, rhs: 1.0, rate_slope: 1.0, p: 0.0, q: 0.0 }
    }
}

/// Sampled model on a uniform grid of `n` points including both boundary points.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionModel {
    pub config: SpdeConfig,
    pub x: Vec<f64>,
    pub sigma_bar: Vec<f64>,
    pub psi: Vec<Vec<f64>>,
    /// `‖ψ_j‖_∞`.
    pub psi_sup: Vec<f64>,
    pub rates: Vec<f64>,
    pub rhs: Vec<f64>,
    /// `min σ̄ − Σ_j ‖ψ_j‖_∞`.
    pub sigma_min_cert: f64,
}

impl DiffusionModel {
    pub fn h(&self) -> f64 {
        2.0 / (self.x.len() - 1) as f64
    }

    pub fn d(&self) -> usize {
        self.psi.len()
    }
}

fn grid(n: usize) -> Vec<f64> {
    let h = 2.0 / (n - 1) as f64;
    (0..n).map(|i| -1.0 + h * i as f64).collect()
}

pub fn build_model(config: &SpdeConfig) -> Result<DiffusionModel> {
    let cfg = config;
    if cfg.d == 0 || cfg.d > MAX_DIM {
        return Err(Error::InvalidArgument(format!("d = {} must be between 1 and {MAX_DIM}", cfg.d)));
    }
    if cfg.n < 5 || cfg.n % 2 == 0 {
        return Err(Error::InvalidArgument(format!("grid size n = {} must be odd and at least 5", cfg.n)));
    }
    let finite = [cfg.sigma_bar, cfg.c, cfg.decay, cfg.rhs, cfg.rate_slope, cfg.p, cfg.q];
    if finite.iter().any(|v| !v.is_finite()) || cfg.rate_slope <= 0.0 {
        return Err(Error::InvalidArgument("model parameters must be finite with rate_slope > 0".into()));
    }
    let x = grid(cfg.n);
    let amplitude = |j: usize| cfg.c * (-cfg.decay * j as f64).exp();
    let psi: Vec<Vec<f64>> = (1..=cfg.d)
        .map(|j| x.iter().map(|&xi| amplitude(j) * (j as f64 * std::f64::consts::PI * xi).cos()).collect())
        .collect();
    let psi_sup: Vec<f64> = (1..=cfg.d).map(|j| amplitude(j).abs()).collect();
    let sigma_min_cert = cfg.sigma_bar - psi_sup.iter().sum::<f64>();
    if !(sigma_min_cert > 0.0) {
        return Err(Error::EllipticityViolated(sigma_min_cert));
    }
    Ok(DiffusionModel {
        config: cfg.clone(),
        sigma_bar: vec![cfg.sigma_bar; cfg.n],
        rhs: vec![cfg.rhs; cfg.n],
        rates: (1..=cfg.d).map(|j| cfg.rate_slope * j as f64).collect(),
        x,
        psi,
        psi_sup,
        sigma_min_cert,
    })
}

/// The analytic spec matching the model rates (`m = 1`, `a = 1`).
pub fn model_spec(model: &DiffusionModel) -> Result<ValidatedSpec> {
    let cfg = &model.config;
    CrossSpec::analytic(1, 1.0, 0.0, cfg.p, cfg.q, SmoothnessSequence::affine(0.0, cfg.rate_slope)).validate()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conditions {
    /// `Σ_j ‖ψ_j‖_∞·e^{r_j} / (√3·σ_min)`.
    pub condition_value: f64,
    pub passes: bool,
    /// Tail constant of the matching analytic spec, if finite.
    #[serde(rename = "M_value")]
    pub m_value: Option<f64>,
}

pub fn check_conditions(model: &DiffusionModel) -> Result<Conditions> {
    let sum: f64 = model.psi_sup.iter().zip(&model.rates).map(|(s, r)| s * r.exp()).sum();
    let condition_value = sum / (3f64.sqrt() * model.sigma_min_cert);
    let m_value = match analytic_constant(&model_spec(model)?) {
        Ok(v) => Some(v),
        Err(e) if e.kind() == crate::error::ErrorKind::Hypothesis => None,
        Err(e) => return Err(e),
    };
    Ok(Conditions { condition_value, passes: condition_value < 1.0, m_value })
}

/// Conservative second-order solve of `−(σ u')' = f`, `u(±1) = 0`, on a grid of `n` points.
fn solve_on_grid(sigma: &[f64], f: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = sigma.len();
    let inner = n - 2;
    let mid: Vec<f64> = sigma.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let mut lower = vec![0.0; inner];
    let mut diag = vec![0.0; inner];
    let mut upper = vec![0.0; inner];
    let mut rhs = vec![0.0; inner];
    for k in 0..inner {
        let (left, right) = (mid[k], mid[k + 1]);
        lower[k] = -left;
        diag[k] = left + right;
        upper[k] = -right;
        rhs[k] = h * h * f[k + 1];
    }
    let u = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
    let mut out = Vec::with_capacity(n);
    out.push(0.0);
    out.extend(u);
    out.push(0.0);
    Ok(out)
}

fn sigma_at(model: &DiffusionModel, y: &[f64]) -> Vec<f64> {
    let mut sigma = model.sigma_bar.clone();
    for (psi, &yj) in model.psi.iter().zip(y) {
        for (s, p) in sigma.iter_mut().zip(psi) {
            *s += p * yj;
        }
    }
    sigma
}

/// Solution `u(·, y)` at one parameter value.
pub fn solve_sample(model: &DiffusionModel, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != model.d() || y.iter().any(|v| !(v.abs() <= 1.0)) {
        return Err(Error::InvalidArgument(format!("y must have {} entries in [-1, 1]", model.d())));
    }
    solve_on_grid(&sigma_at(model, y), &model.rhs, model.h())
}

/// `‖u_N − u_{2N}‖_∞ / ‖u_{2N} − u_{4N}‖_∞` on nested grids, compared at the coarse nodes.
pub fn richardson_ratio(config: &SpdeConfig, y: &[f64]) -> Result<f64> {
    let sizes = [config.n, 2 * (config.n - 1) + 1, 4 * (config.n - 1) + 1];
    let sols = sizes
        .iter()
        .map(|&n| {
            let model = build_model(&SpdeConfig { n, ..config.clone() })?;
            solve_sample(&model, y)
        })
        .collect::<Result<Vec<_>>>()?;
    let diff = |fine: &[f64], stride: usize, coarse: &[f64], cstride: usize| {
        (0..config.n)
            .map(|i| (coarse[i * cstride] - fine[i * stride]).abs())
            .fold(0.0, f64::max)
    };
    Ok(diff(&sols[1], 2, &sols[0], 1) / diff(&sols[2], 4, &sols[1], 2))
}

/// `√(Σ h·((u_{i+1} − u_i)/h)²)`.
pub fn h1_seminorm(u: &[f64], h: f64) -> f64 {
    u.windows(2).map(|w| (w[1] - w[0]).powi(2) / h).sum::<f64>().sqrt()
}

/// Trapezoidal `L²` norm (the end values vanish).
pub fn l2_norm(u: &[f64], h: f64) -> f64 {
    (h * u.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// Multi-indices `s ∈ Z^d_+` with `|s|₁ ≤ max_degree`, in lexicographic order.
pub fn total_degree_set(d: usize, max_degree: usize) -> Vec<Vec<usize>> {
    fn go(d: usize, budget: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == d {
            out.push(prefix.clone());
            return;
        }
        for v in 0..=budget {
            prefix.push(v);
            go(d, budget - v, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(d, max_degree, &mut Vec::new(), &mut out);
    out
}

/// Legendre chaos coefficients `û_s` on the x-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosCoefficients {
    pub indices: Vec<Vec<usize>>,
    pub values: Vec<Vec<f64>>,
    /// Quadrature estimate of `∫ ‖u(·, y)‖²_{L²} dμ(y)`.
    pub mean_square_l2: f64,
    pub n_q: usize,
}

/// Nodes handled by one parallel task; fixed so that sums do not depend on the thread count.
const NODE_CHUNK: usize = 64;
/// Chunks reduced per parallel round, bounding memory for large rules.
const CHUNKS_PER_ROUND: usize = 32;

/// Tensor Gauss–Legendre projection onto `φ_s`, `|s|₁ ≤ max_degree`, with `n_q` nodes per dimension.
pub fn legendre_coefficients(model: &DiffusionModel, max_degree: usize, n_q: usize) -> Result<ChaosCoefficients> {
    if n_q < max_degree + 4 {
        return Err(Error::InvalidArgument(format!("n_q = {n_q} must be at least max_degree + 4 = {}", max_degree + 4)));
    }
    let d = model.d();
    let n = model.x.len();
    let h = model.h();
    let indices = total_degree_set(d, max_degree);
    let (nodes, weights) = gauss_legendre(n_q);
    let phi: Vec<Vec<f64>> = nodes.iter().map(|&y| orthonormal_legendre(max_degree, y)).collect();
    let total_nodes = n_q.pow(d as u32);
    let node_digits = |mut id: usize| {
        let mut digits = vec![0usize; d];
        for slot in digits.iter_mut().rev() {
            *slot = id % n_q;
            id /= n_q;
        }
        digits
    };
    let chunk_sum = |chunk: usize| -> Result<(Vec<Vec<f64>>, f64)> {
        let mut acc = vec![vec![0.0; n]; indices.len()];
        let mut msq = 0.0;
        let end = ((chunk + 1) * NODE_CHUNK).min(total_nodes);
        for id in chunk * NODE_CHUNK..end {
            let digits = node_digits(id);
            let y: Vec<f64> = digits.iter().map(|&i| nodes[i]).collect();
            let w: f64 = digits.iter().map(|&i| weights[i]).product();
            let u = solve_sample(model, &y)?;
            msq += w * l2_norm(&u, h).powi(2);
            for (s, a) in indices.iter().zip(acc.iter_mut()) {
                let coef = w * s.iter().zip(&digits).map(|(&deg, &i)| phi[i][deg]).product::<f64>();
                for (ai, ui) in a.iter_mut().zip(&u) {
                    *ai += coef * ui;
                }
            }
        }
        Ok((acc, msq))
    };
    let chunks = total_nodes.div_ceil(NODE_CHUNK);
    let mut values = vec![vec![0.0; n]; indices.len()];
    let mut mean_square_l2 = 0.0;
    for round in (0..chunks).step_by(CHUNKS_PER_ROUND) {
        let parts = (round..(round + CHUNKS_PER_ROUND).min(chunks))
            .into_par_iter()
            .map(chunk_sum)
            .collect::<Result<Vec<_>>>()?;
        for (acc, msq) in parts {
            mean_square_l2 += msq;
            for (v, a) in values.iter_mut().zip(acc) {
                for (vi, ai) in v.iter_mut().zip(a) {
                    *vi += ai;
                }
            }
        }
    }
    Ok(ChaosCoefficients { indices, values, mean_square_l2, n_q })
}

/// `‖f‖_{H^{−1}} = ‖w'‖_{L²}` with `−w'' = f`, `w(±1) = 0`.
pub fn rhs_dual_norm(model: &DiffusionModel) -> Result<f64> {
    let w = solve_on_grid(&vec![1.0; model.x.len()], &model.rhs, model.h())?;
    Ok(h1_seminorm(&w, model.h()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientRow {
    pub s: Vec<usize>,
    pub h1_norm: f64,
    pub bound: f64,
    /// `bound / h1_norm`; `None` when the coefficient vanishes.
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientReport {
    pub f_dual_norm: f64,
    #[serde(rename = "B_coef")]
    pub b_coef: f64,
    pub b: Vec<f64>,
    pub rows: Vec<CoefficientRow>,
}

impl CoefficientReport {
    pub fn min_margin(&self) -> f64 {
        self.rows.iter().filter_map(|r| r.margin).fold(f64::INFINITY, f64::min)
    }
}

fn factorial(n: usize) -> f64 {
    (2..=n).map(|i| i as f64).product()
}

/// `B_coef·(|s|!/s!)·∏ b_j^{s_j}`.
fn coefficient_bound(b_coef: f64, b: &[f64], s: &[usize]) -> f64 {
    let total: usize = s.iter().sum();
    let multinomial = factorial(total) / s.iter().map(|&v| factorial(v)).product::<f64>();
    b_coef * multinomial * s.iter().zip(b).map(|(&v, bj)| bj.powi(v as i32)).product::<f64>()
}

/// Compares every `‖û_s‖_{H¹₀}` with the a priori coefficient bound.
pub fn verify_coefficient_bound(model: &DiffusionModel, coeffs: &ChaosCoefficients) -> Result<CoefficientReport> {
    let f_dual_norm = rhs_dual_norm(model)?;
    let b_coef = f_dual_norm / model.sigma_min_cert;
    let b: Vec<f64> = model.psi_sup.iter().map(|s| s / (3f64.sqrt() * model.sigma_min_cert)).collect();
    let h = model.h();
    let rows: Vec<CoefficientRow> = coeffs
        .indices
        .iter()
        .zip(&coeffs.values)
        .map(|(s, u)| {
            let h1_norm = h1_seminorm(u, h);
            let bound = coefficient_bound(b_coef, &b, s);
            CoefficientRow { s: s.clone(), h1_norm, bound, margin: (h1_norm > 0.0).then(|| bound / h1_norm) }
        })
        .collect();
    if let Some(bad) = rows.iter().find(|r| r.margin.is_some_and(|m| m < 1.0 - 1e-6)) {
        return Err(Error::BoundViolated {
            s: bad.s.iter().map(|&v| v as u32).collect(),
            margin: bad.margin.unwrap_or(0.0),
        });
    }
    Ok(CoefficientReport { f_dual_norm, b_coef, b, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationRow {
    #[serde(rename = "T")]
    pub t: f64,
    pub n_indices: usize,
    pub tail_norm: f64,
    pub bound_sum: f64,
}

/// Error of keeping only the `s` with `ρ(s) ≤ T`, among the computed coefficients.
pub fn truncation_error_study(
    report: &CoefficientReport,
    spec: &ValidatedSpec,
    t_grid: &[f64],
) -> Result<Vec<TruncationRow>> {
    let weights = report
        .rows
        .iter()
        .map(|r| spec.s_log_weight(&crate::weights::SparseIndex::from_dense(&r.s.iter().map(|&v| v as u64).collect::<Vec<_>>())))
        .collect::<Result<Vec<_>>>()?;
    Ok(t_grid
        .iter()
        .map(|&t| {
            let limit = t.ln() + MEMBERSHIP_TOL;
            let mut n_indices = 0;
            let mut tail2 = 0.0;
            let mut bound_sum = 0.0;
            for (row, &w) in report.rows.iter().zip(&weights) {
                if w <= limit {
                    n_indices += 1;
                } else {
                    tail2 += row.h1_norm * row.h1_norm;
                    bound_sum += row.bound;
                }
            }
            TruncationRow { t, n_indices, tail_norm: tail2.sqrt(), bound_sum }
        })
        .collect())
}

/// Everything the demo reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpdeReport {
    pub config: SpdeConfig,
    pub max_degree: usize,
    pub n_q: usize,
    pub sigma_min_cert: f64,
    pub conditions: Conditions,
    pub u_at_zero: f64,
    pub richardson_ratio: f64,
    pub bessel_sum: f64,
    pub mean_square_l2: f64,
    /// Largest change of any `‖û_s‖_{H¹₀}` when `n_q` is doubled.
    pub quadrature_change: f64,
    pub coefficients: CoefficientReport,
    pub truncation: Vec<TruncationRow>,
}

/// Runs the full demo: model, conditions, chaos coefficients, bound check and truncation table.
pub fn run_demo(config: &SpdeConfig, max_degree: usize, n_q: Option<usize>) -> Result<SpdeReport> {
    let model = build_model(config)?;
    let n_q = n_q.unwrap_or(max_degree + 4);
    let conditions = check_conditions(&model)?;
    let zero = vec![0.0; model.d()];
    let u0 = solve_sample(&model, &zero)?;
    let mut y_edge = zero.clone();
    y_edge[0] = 1.0;
    let richardson = richardson_ratio(config, &y_edge)?;
    let coeffs = legendre_coefficients(&model, max_degree, n_q)?;
    let doubled = legendre_coefficients(&model, max_degree, 2 * n_q)?;
    let h = model.h();
    let quadrature_change = coeffs
        .values
        .iter()
        .zip(&doubled.values)
        .map(|(a, b)| (h1_seminorm(a, h) - h1_seminorm(b, h)).abs())
        .fold(0.0, f64::max);
    let bessel_sum = coeffs.values.iter().map(|u| l2_norm(u, h).powi(2)).sum();
    let coefficients = verify_coefficient_bound(&model, &coeffs)?;
    let spec = model_spec(&model)?;
    let max_log_weight = coefficients
        .rows
        .iter()
        .map(|r| r.s.iter().zip(&model.rates).map(|(&v, r)| v as f64 * r).sum::<f64>())
        .fold(0.0, f64::max);
    let t_grid: Vec<f64> = (0..=((max_log_weight + 1.0).ceil() as usize)).map(|i| (i as f64).exp()).collect();
    let truncation = truncation_error_study(&coefficients, &spec, &t_grid)?;
    Ok(SpdeReport {
        config: config.clone(),
        max_degree,
        n_q,
        sigma_min_cert: model.sigma_min_cert,
        conditions,
        u_at_zero: u0[model.x.len() / 2],
        richardson_ratio: richardson,
        bessel_sum,
        mean_square_l2: coeffs.mean_square_l2,
        quadrature_change,
        coefficients,
        truncation,
    })
}
