//! Coefficient-space approximation: norms, the truncation projection `S_T`,
//! Jackson and Bernstein inequalities, worst-case elements and ε-dimensions.
//!
//! A function is represented by its coefficients with respect to an orthonormal
//! tensor basis, so every norm is a weighted ℓ² sum (Parseval). The smooth norm
//! uses `α·log max(1+k) + s-part`, the rough norm uses `β·log max(1+k)`; their
//! ratio is the cross weight with `a = α − β`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{extension_constant, regime, Regime};
use crate::crosses::{count_cross, cross_records};
use crate::error::{Error, Result};
use crate::weights::{MultiIndex, ValidatedSpec, Variant, MEMBERSHIP_TOL};

/// Relative slack in the Jackson and Bernstein checks.
pub const INEQUALITY_TOL: f64 = 1e-12;

/// Sparse coefficients `f_{k,s}`, kept in lexicographic index order without zeros.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoefficientField {
    entries: BTreeMap<MultiIndex, f64>,
}

impl CoefficientField {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets a coefficient; zero removes the entry.
    pub fn insert(&mut self, idx: MultiIndex, value: f64) {
        if value == 0.0 {
            self.entries.remove(&idx);
        } else {
            self.entries.insert(idx, value);
        }
    }

    pub fn get(&self, idx: &MultiIndex) -> f64 {
        self.entries.get(idx).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.entries.iter().map(|(k, &v)| (k, v))
    }

    /// `self + scale·other`.
    pub fn add_scaled(&self, other: &Self, scale: f64) -> Self {
        let mut out = self.clone();
        for (idx, v) in other.iter() {
            let sum = out.get(idx) + scale * v;
            out.insert(idx.clone(), sum);
        }
        out
    }

    fn retain(&self, mut keep: impl FnMut(&MultiIndex) -> Result<bool>) -> Result<Self> {
        let mut out = Self::new();
        for (idx, v) in self.iter() {
            if keep(idx)? {
                out.entries.insert(idx.clone(), v);
            }
        }
        Ok(out)
    }
}

impl FromIterator<(MultiIndex, f64)> for CoefficientField {
    fn from_iter<I: IntoIterator<Item = (MultiIndex, f64)>>(iter: I) -> Self {
        let mut out = Self::new();
        for (idx, v) in iter {
            out.insert(idx, v);
        }
        out
    }
}

/// Smooth and rough norms of a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormPair {
    pub h_norm: f64,
    pub g_norm: f64,
}

/// Logs of the smooth weight `λ` and the rough weight `ν` at one index.
fn log_weights(spec: &ValidatedSpec, idx: &MultiIndex) -> Result<(f64, f64)> {
    // Validates the index shape as a side effect.
    spec.log_weight(idx)?;
    let ln_r = (idx.k_radius() as f64).ln();
    let s_part = spec.s_log_weight(&idx.s)?;
    if spec.m == 0 {
        Ok((s_part, 0.0))
    } else {
        Ok((spec.alpha * ln_r + s_part, spec.beta * ln_r))
    }
}

/// Parseval norms, summed in lexicographic index order.
pub fn norms(field: &CoefficientField, spec: &ValidatedSpec) -> Result<NormPair> {
    let mut h2 = 0.0;
    let mut g2 = 0.0;
    for (idx, c) in field.iter() {
        let (lh, lg) = log_weights(spec, idx)?;
        let lc = c.abs().ln();
        h2 += (2.0 * (lh + lc)).exp();
        g2 += (2.0 * (lg + lc)).exp();
    }
    Ok(NormPair { h_norm: h2.sqrt(), g_norm: g2.sqrt() })
}

/// `S_T f`: keeps the entries inside the cross at threshold `t` (`t ≥ 0`).
pub fn project(field: &CoefficientField, spec: &ValidatedSpec, t: f64) -> Result<CoefficientField> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("threshold {t} is negative")));
    }
    let limit = t.ln() + MEMBERSHIP_TOL;
    field.retain(|idx| Ok(spec.log_weight(idx)? <= limit))
}

/// Projection error in the rough norm and the Jackson bound `‖f‖_smooth / T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacksonGap {
    pub error: f64,
    pub bound: f64,
}

impl JacksonGap {
    pub fn holds(&self) -> bool {
        self.error <= self.bound * (1.0 + INEQUALITY_TOL)
    }
}

pub fn jackson_gap(field: &CoefficientField, spec: &ValidatedSpec, t: f64) -> Result<JacksonGap> {
    if !(t >= 1.0) {
        return Err(Error::ThresholdBelowOne(t));
    }
    let limit = t.ln() + MEMBERSHIP_TOL;
    let rest = field.retain(|idx| Ok(spec.log_weight(idx)? > limit))?;
    let error = norms(&rest, spec)?.g_norm;
    let bound = norms(field, spec)?.h_norm / t;
    Ok(JacksonGap { error, bound })
}

/// `‖f‖_smooth / ‖f‖_rough` for a nonzero field supported in the cross at `t`.
pub fn bernstein_ratio(field: &CoefficientField, spec: &ValidatedSpec, t: f64) -> Result<f64> {
    if field.is_empty() {
        return Err(Error::InvalidArgument("field is empty".into()));
    }
    let limit = t.ln() + MEMBERSHIP_TOL;
    for (idx, _) in field.iter() {
        if spec.log_weight(idx)? > limit {
            return Err(Error::SupportOutsideCross);
        }
    }
    let n = norms(field, spec)?;
    Ok(n.h_norm / n.g_norm)
}

/// A unit-smooth-norm single coefficient whose projection error is largest.
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCase {
    pub field: CoefficientField,
    pub index: MultiIndex,
    /// Log of the weight ratio at `index`; the smallest value above `log T`.
    pub log_ratio: f64,
    /// `ν/λ` at `index`, equal to the projection error of `field`.
    pub gap: f64,
}

/// Finds the index of smallest weight ratio strictly above `t`.
///
/// Ratios within `1e−12` (in log) are ties, broken by the ordering of [`MultiIndex`].
pub fn worst_case_element(spec: &ValidatedSpec, t: f64) -> Result<WorstCase> {
    if !(t >= 1.0) {
        return Err(Error::ThresholdBelowOne(t));
    }
    let limit = t.ln() + MEMBERSHIP_TOL;
    let fits = |k: u64, sw: f64| spec.k_term(k) + sw <= limit;
    // Every index outside the search cross has a larger ratio than (K_T, 0, ..., 0).
    let mut search_t = if spec.m > 0 {
        let mut k = 1u64;
        while fits(k + 1, 0.0) {
            k += 1;
        }
        ((k + 1) as f64).powf(spec.a()) * (1.0 + 1e-9)
    } else {
        2.0 * t
    };
    loop {
        let mut best: Option<(f64, MultiIndex)> = None;
        for rec in cross_records(spec, search_t, None)? {
            let sw = spec.s_log_weight(&rec.s)?;
            let k_in = if spec.m == 0 {
                if sw <= limit {
                    continue;
                }
                1
            } else {
                let mut k = 1u64;
                while fits(k, sw) {
                    k += 1;
                }
                k
            };
            let lr = spec.k_term(k_in) + sw;
            let mut kvec = vec![0u64; spec.m as usize];
            if let Some(last) = kvec.last_mut() {
                *last = k_in - 1;
            }
            let idx = MultiIndex::new(kvec, rec.s.clone());
            let better = match &best {
                None => true,
                Some((blr, bidx)) => lr < blr - 1e-12 || ((lr - blr).abs() <= 1e-12 && idx < *bidx),
            };
            if better {
                best = Some((lr, idx));
            }
        }
        if let Some((log_ratio, index)) = best {
            let (lh, _) = log_weights(spec, &index)?;
            let mut field = CoefficientField::new();
            field.insert(index.clone(), (-lh).exp());
            return Ok(WorstCase { field, index, log_ratio, gap: (-log_ratio).exp() });
        }
        search_t *= 2.0;
    }
}

/// `n = |G(1/ε)|` and the bracket `[n − 1, n]` containing the ε-dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EpsDimension {
    pub n: u128,
    pub bracket: [u128; 2],
}

pub fn eps_dimension(spec: &ValidatedSpec, eps: f64, dim_cap: Option<u32>) -> Result<EpsDimension> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps} must lie in (0, 1]")));
    }
    let n = count_cross(spec, 1.0 / eps, dim_cap)?.total;
    Ok(EpsDimension { n, bracket: [n - 1, n] })
}

/// `n` log-spaced values from `first` to `last` inclusive.
pub fn log_grid(first: f64, last: f64, n: usize) -> Result<Vec<f64>> {
    if !(first > 0.0 && last > 0.0) || n < 2 {
        return Err(Error::InvalidArgument("grid needs positive ends and at least 2 points".into()));
    }
    let (a, b) = (first.ln(), last.ln());
    Ok((0..n)
        .map(|i| match i {
            0 => first,
            _ if i == n - 1 => last,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect())
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub eps: f64,
    pub n: u128,
    /// Slope fitted over this row and all previous ones.
    pub slope_running: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateStudy {
    pub rows: Vec<RateRow>,
    pub fitted_slope: f64,
    /// `m/(α − β)`.
    pub theoretical_exponent: f64,
}

/// Fits the growth rate of `n_ε` over a decreasing grid of at least five `ε`.
pub fn rate_study(spec: &ValidatedSpec, eps_grid: &[f64]) -> Result<RateStudy> {
    if eps_grid.len() < 5 {
        return Err(Error::InvalidArgument("rate study needs at least 5 eps values".into()));
    }
    if eps_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("eps grid must be strictly decreasing".into()));
    }
    let counts = eps_grid
        .iter()
        .map(|&e| eps_dimension(spec, e, None).map(|d| d.n))
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = eps_grid.iter().map(|e| -e.ln()).collect();
    let y: Vec<f64> = counts.iter().map(|&n| (n as f64).ln()).collect();
    let rows = eps_grid
        .iter()
        .zip(&counts)
        .enumerate()
        .map(|(i, (&eps, &n))| RateRow { eps, n, slope_running: (i > 0).then(|| ls_slope(&x[..=i], &y[..=i])) })
        .collect();
    Ok(RateStudy { rows, fitted_slope: ls_slope(&x, &y), theoretical_exponent: f64::from(spec.m) / spec.a() })
}

/// Projection error at `n = n_ε` and the bound `C^{a/m}·n^{−a/m}·‖f‖_smooth`.
///
/// Needs an upper bound of the form `C·T^{m/a}`: the analytic variant or the Korobov regime `r > a/m`.
pub fn approximation_error_bound(spec: &ValidatedSpec, eps: f64, field: &CoefficientField) -> Result<JacksonGap> {
    if spec.m == 0 || !spec.hypotheses().upper_bound {
        return Err(Error::HypothesisViolated("no certified constant for this spec".into()));
    }
    if let Variant::Korobov { r, .. } = spec.variant {
        if regime(spec.a(), r, spec.m) != Regime::Above {
            return Err(Error::HypothesisViolated("the Korobov bound has a log factor unless r > a/m".into()));
        }
    }
    let c = extension_constant(spec)?;
    let n = eps_dimension(spec, eps, None)?.n as f64;
    let e = spec.a() / f64::from(spec.m);
    let error = jackson_gap(field, spec, 1.0 / eps)?.error;
    let bound = c.powf(e) * n.powf(-e) * norms(field, spec)?.h_norm;
    Ok(JacksonGap { error, bound })
}

/// Unsigned indices of the cross at `t`, the pool random fields draw from.
pub fn index_pool(spec: &ValidatedSpec, t: f64) -> Result<Vec<MultiIndex>> {
    let mut out = Vec::new();
    for rec in cross_records(spec, t, None)? {
        out.extend(rec.indices(spec.m));
    }
    Ok(out)
}

/// A field with between 1 and `max_entries` coefficients, uniform in `[−1, 1]`, on pool indices.
pub fn random_field<R: Rng>(pool: &[MultiIndex], max_entries: usize, rng: &mut R) -> CoefficientField {
    let n = rng.random_range(1..=max_entries.max(1));
    let mut field = CoefficientField::new();
    for _ in 0..n {
        let idx = pool[rng.random_range(0..pool.len())].clone();
        field.insert(idx, rng.random_range(-1.0..=1.0));
    }
    field
}

/// Outcome of a seeded Jackson or Bernstein battery.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatteryReport {
    pub cases: usize,
    pub violations: usize,
    /// Largest observed `error/bound` (Jackson) or `ratio/T` (Bernstein).
    pub worst: f64,
}

/// Threshold range for random fields.
pub const POOL_T: f64 = 32.0;

fn battery<F>(fields: usize, seed: u64, case: F) -> Result<BatteryReport>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Vec<(bool, f64)>> + Sync,
{
    let results = (0..fields)
        .into_par_iter()
        .map(|i| case(&mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64))))
        .collect::<Result<Vec<_>>>()?;
    let flat: Vec<(bool, f64)> = results.into_iter().flatten().collect();
    Ok(BatteryReport {
        cases: flat.len(),
        violations: flat.iter().filter(|(ok, _)| !ok).count(),
        worst: flat.iter().map(|&(_, w)| w).fold(0.0, f64::max),
    })
}

/// Checks the Jackson inequality on `fields` random fields at every threshold in `ts`.
pub fn jackson_battery(spec: &ValidatedSpec, fields: usize, ts: &[f64], seed: u64) -> Result<BatteryReport> {
    let pool = index_pool(spec, POOL_T)?;
    battery(fields, seed, |rng| {
        let field = random_field(&pool, 12, rng);
        ts.iter()
            .map(|&t| jackson_gap(&field, spec, t).map(|g| (g.holds(), g.error / g.bound)))
            .collect()
    })
}

/// Checks the Bernstein inequality on `fields` random fields inside each cross in `ts`.
pub fn bernstein_battery(spec: &ValidatedSpec, fields: usize, ts: &[f64], seed: u64) -> Result<BatteryReport> {
    let pools = ts.iter().map(|&t| index_pool(spec, t)).collect::<Result<Vec<_>>>()?;
    battery(fields, seed, |rng| {
        ts.iter()
            .zip(&pools)
            .map(|(&t, pool)| {
                let field = random_field(pool, 12, rng);
                bernstein_ratio(&field, spec, t).map(|r| (r <= t * (1.0 + INEQUALITY_TOL), r / t))
            })
            .collect()
    })
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::fixtures::*;
    use proptest::prelude::*;

    fn field_strategy() -> impl Strategy<Value = (u64, usize)> {
        (any::<u64>(), 1usize..15)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn projection_is_idempotent_contractive_and_linear((seed, n) in field_strategy(), t in 1.0f64..40.0, which in 0usize..3) {
            let spec = [spec_k1(), spec_a1(), spec_a2()][which].clone();
            let pool = index_pool(&spec, POOL_T).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_field(&pool, n, &mut rng);
            let g = random_field(&pool, n, &mut rng);
            let pf = project(&f, &spec, t).unwrap();
            prop_assert_eq!(project(&pf, &spec, t).unwrap(), pf.clone());
            let (nf, npf) = (norms(&f, &spec).unwrap(), norms(&pf, &spec).unwrap());
            prop_assert!(npf.h_norm <= nf.h_norm && npf.g_norm <= nf.g_norm);
            let lhs = project(&f.add_scaled(&g, 2.5), &spec, t).unwrap();
            let rhs = pf.add_scaled(&project(&g, &spec, t).unwrap(), 2.5);
            for (idx, v) in lhs.iter() {
                prop_assert!((v - rhs.get(idx)).abs() <= 1e-12);
            }
            for (idx, v) in rhs.iter() {
                prop_assert!((v - lhs.get(idx)).abs() <= 1e-12);
            }
        }

        #[test]
        fn parseval_is_additive((seed, n) in field_strategy(), which in 0usize..3) {
            let spec = [spec_k1(), spec_a1(), spec_a2()][which].clone();
            let pool = index_pool(&spec, POOL_T).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_field(&pool, n, &mut rng);
            let inside = project(&f, &spec, 6.0).unwrap();
            let outside = f.add_scaled(&inside, -1.0);
            let (a, b, c) = (norms(&f, &spec).unwrap(), norms(&inside, &spec).unwrap(), norms(&outside, &spec).unwrap());
            let tol = 1e-12 * a.h_norm * a.h_norm;
            prop_assert!((a.h_norm.powi(2) - b.h_norm.powi(2) - c.h_norm.powi(2)).abs() <= tol);
            let tol = 1e-12 * a.g_norm * a.g_norm;
            prop_assert!((a.g_norm.powi(2) - b.g_norm.powi(2) - c.g_norm.powi(2)).abs() <= tol);
        }

        #[test]
        fn brackets_are_monotone(e1 in 0.005f64..1.0, f in 0.05f64..1.0, which in 0usize..3) {
            let spec = [spec_k1(), spec_a1(), spec_a2()][which].clone();
            let e2 = e1 * f;
            prop_assert!(eps_dimension(&spec, e2, None).unwrap().n >= eps_dimension(&spec, e1, None).unwrap().n);
        }

        #[test]
        fn worst_case_dominates_single_coefficients(t in 1.0f64..30.0, which in 0usize..3) {
            let spec = [spec_k1(), spec_a1(), spec_a2()][which].clone();
            let w = worst_case_element(&spec, t).unwrap();
            prop_assert!(w.log_ratio > t.ln() + MEMBERSHIP_TOL);
            // Every unit-norm single coefficient outside the cross has error at most the gap.
            for idx in index_pool(&spec, 4.0 * t + 10.0).unwrap() {
                let lw = spec.log_weight(&idx).unwrap();
                if lw > t.ln() + MEMBERSHIP_TOL {
                    prop_assert!(lw >= w.log_ratio - 1e-12);
                }
            }
        }
    }
}
