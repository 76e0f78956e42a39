//! Closed-form constants and cardinality bounds, and lower ≤ exact ≤ upper reports.

use serde::Serialize;

use crate::crosses::count_cross;
use crate::error::{Error, Result};
use crate::series::{Series, DEFAULT_CHUNK};
use crate::weights::{CrossSpec, SmoothnessSequence, ValidatedSpec, Variant, MEMBERSHIP_TOL};

/// Relative tolerance for deciding `r = a/m`.
const REGIME_TOL: f64 = 1e-12;

/// Position of `r` relative to `a/m`, which selects the form of `B` and `A(T)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    #[serde(rename = "r>a/m")]
    Above,
    #[serde(rename = "r=a/m")]
    Critical,
    #[serde(rename = "r<a/m")]
    Below,
}

pub fn regime(a: f64, r: f64, m: u32) -> Regime {
    let ratio = a / f64::from(m);
    if (r - ratio).abs() <= REGIME_TOL * r.max(ratio) {
        Regime::Critical
    } else if r > ratio {
        Regime::Above
    } else {
        Regime::Below
    }
}

fn factorial(n: u32) -> f64 {
    (2..=n).map(f64::from).product()
}

/// The constant `B(a, r, m, t)` in its three-case form.
pub fn b_constant(a: f64, r: f64, m: u32, t: u32) -> f64 {
    let mf = f64::from(m);
    let tf = f64::from(t);
    match regime(a, r, m) {
        Regime::Above => {
            let x = r * mf / a - 1.0;
            1.5f64.powf(mf) * (1.0 + 1.5f64.powf(-x) / x).powf(tf)
        }
        Regime::Critical => mf * 2f64.powf(tf + 1.0) / factorial(t),
        Regime::Below => {
            let y = a / r - mf;
            mf * 2f64.powf(tf + 1.0) / factorial(t) * 2f64.powf(y) / y
        }
    }
}

/// Natural log of the growth factor `A(a, r, m, t, T)`.
pub fn log_a_factor(a: f64, r: f64, m: u32, t: u32, big_t: f64) -> f64 {
    let mf = f64::from(m);
    let ln_t = big_t.ln();
    let log_bracket = || f64::from(t) * (ln_t / r + f64::from(t + 1) * std::f64::consts::LN_2).ln();
    match regime(a, r, m) {
        Regime::Above => mf / a * ln_t,
        Regime::Critical => {
            mf / a * ln_t + (2.0 * big_t.powf(1.0 / a) + 1.0).ln().ln() + log_bracket()
        }
        Regime::Below => ln_t / r + log_bracket(),
    }
}

/// Constants of the Korobov cardinality theorem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KorobovConstants {
    pub lambda_exp: f64,
    #[serde(rename = "M_t")]
    pub m_t: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub regime: Regime,
}

fn korobov_params(spec: &ValidatedSpec) -> Result<(u32, f64)> {
    match spec.variant {
        Variant::Korobov { t, r } => Ok((t, r)),
        Variant::Analytic { .. } => Err(Error::InvalidArgument("expected a Korobov spec".into())),
    }
}

/// `M(t) = Σ_{j ≥ t+2} (λ r_j − 1)^{−1} (3/2)^{−(λ r_j − 1)}`, summed with the given chunk size.
pub(crate) fn korobov_tail_sum(seq: &SmoothnessSequence, t: u32, lambda: f64, chunk: u32) -> Result<f64> {
    if let Some(r_next) = seq.rate(t + 2) {
        if lambda * r_next <= 1.0 {
            return Err(Error::HypothesisViolated(format!(
                "lambda * r_(t+2) = {} <= 1",
                lambda * r_next
            )));
        }
    }
    let ln15 = 1.5f64.ln();
    Series {
        seq,
        start: t + 2,
        term: |r: f64| {
            let x = lambda * r - 1.0;
            (-ln15 * x).exp() / x
        },
        envelope: |r_min: f64| {
            let x = lambda * r_min - 1.0;
            (x > 0.0).then(|| (1.5 / x, lambda * ln15))
        },
    }
    .sum(chunk)
    .map_err(|e| match e {
        Error::Diverges(msg) => Error::HypothesisViolated(format!("M(t) diverges: {msg}")),
        other => other,
    })
}

pub fn korobov_constants(spec: &ValidatedSpec) -> Result<KorobovConstants> {
    let (t, r) = korobov_params(spec)?;
    let a = spec.a();
    let lambda_exp = (f64::from(spec.m) / a).max(1.0 / r);
    let m_t = korobov_tail_sum(&spec.seq, t, lambda_exp, DEFAULT_CHUNK)?;
    let b = b_constant(a, r, spec.m, t);
    Ok(KorobovConstants { lambda_exp, m_t, b, c: m_t.exp() * b, regime: regime(a, r, spec.m) })
}

/// `C·A(T)` for an unsigned Korobov cross.
pub fn korobov_upper(spec: &ValidatedSpec, big_t: f64) -> Result<f64> {
    let (t, r) = korobov_params(spec)?;
    check_threshold(big_t)?;
    let consts = korobov_constants(spec)?;
    Ok((consts.c.ln() + log_a_factor(spec.a(), r, spec.m, t, big_t)).exp())
}

fn check_threshold(big_t: f64) -> Result<()> {
    if big_t >= 1.0 && big_t.is_finite() {
        Ok(())
    } else {
        Err(Error::ThresholdBelowOne(big_t))
    }
}

/// `M_{0,q}(m)` or `M_{p,q}(m)` of the analytic theorem, summed with the given chunk size.
pub(crate) fn analytic_tail_sum(spec: &CrossSpec, chunk: u32) -> Result<f64> {
    let Variant::Analytic { p, q } = spec.variant else {
        return Err(Error::InvalidArgument("expected an analytic spec".into()));
    };
    if spec.m == 0 {
        return Err(Error::HypothesisViolated("the analytic constant needs m >= 1".into()));
    }
    let mf = f64::from(spec.m);
    let a = spec.a();
    let seq = &spec.seq;
    if p == 0.0 {
        let kappa = mf / a;
        return Series {
            seq,
            start: 1,
            term: |r: f64| 1.0 / (kappa * r).exp_m1(),
            envelope: |r_min: f64| Some((1.0 / -(-kappa * r_min).exp_m1(), kappa)),
        }
        .sum(chunk);
    }
    let need = (q + (q * a / mf).sqrt()) / p;
    let mut j = 1;
    while let Some(r) = seq.rate(j) {
        if r <= p * q || r < need {
            return Err(Error::HypothesisViolated(format!(
                "r_{j} = {r} must exceed p*q = {} and be at least (q + sqrt(q a / m))/p = {need}",
                p * q
            )));
        }
        if j > seq.prefix_len() {
            // Tail rates are nondecreasing, so the first one decides.
            break;
        }
        j += 1;
    }
    let scale = mf / a;
    let kappa = mf / (2.0 * a);
    let sum = Series {
        seq,
        start: 1,
        term: |r: f64| (-kappa * r).exp() / (scale * (r - p * q)),
        envelope: |r_min: f64| Some((1.0 / (scale * (r_min - p * q)), kappa)),
    }
    .sum(chunk)?;
    Ok((1.0 + p / 2.0).powf(q * scale) * sum)
}

/// `M_{0,q}(m)` when `p = 0`, else `M_{p,q}(m)`.
pub fn analytic_constant(spec: &ValidatedSpec) -> Result<f64> {
    analytic_tail_sum(spec, DEFAULT_CHUNK)
}

/// The constant of the cardinality theorem for any sign convention.
///
/// Korobov: `e^M·B`; analytic: `(3/2)^{2m}·e^M`. A signed `x` multiplies by `2^m`,
/// a signed `y` replaces `M` by `2M`.
pub fn extension_constant(spec: &ValidatedSpec) -> Result<f64> {
    let (m_val, base) = match spec.variant {
        Variant::Korobov { .. } => {
            let c = korobov_constants(spec)?;
            (c.m_t, c.b)
        }
        Variant::Analytic { .. } => (analytic_constant(spec)?, 1.5f64.powi(2 * spec.m as i32)),
    };
    let m_eff = if spec.y_signed { 2.0 * m_val } else { m_val };
    let x_factor = if spec.x_signed { 2f64.powi(spec.m as i32) } else { 1.0 };
    Ok(x_factor * m_eff.exp() * base)
}

/// `⌊T^{1/a}⌋^m`, the size of the k-block at `s = 0`.
pub fn lower_bound(spec: &ValidatedSpec, big_t: f64) -> Result<u128> {
    check_threshold(big_t)?;
    let limit = big_t.ln() + MEMBERSHIP_TOL;
    let a = spec.a();
    let mut k = big_t.powf(1.0 / a).floor().max(1.0) as u64;
    while k > 1 && a * (k as f64).ln() > limit {
        k -= 1;
    }
    while a * ((k + 1) as f64).ln() <= limit {
        k += 1;
    }
    u128::from(k).checked_pow(spec.m).ok_or(Error::Overflow)
}

/// Lower and upper bounds for the number of `s ∈ Z^d_+` with `Σ r_j s_j ≤ log T`.
pub fn simplex_bounds(rates: &[f64], d: usize, big_t: f64) -> Result<(f64, f64)> {
    if d == 0 || rates.len() < d {
        return Err(Error::InvalidArgument(format!("need at least d = {d} >= 1 rates")));
    }
    let rates = &rates[..d];
    let ln_t = big_t.ln();
    if let Some((j, r)) = rates.iter().enumerate().find(|(_, &r)| ln_t < r) {
        return Err(Error::PreconditionViolated(format!("T = {big_t} is below exp(r_{}) = {}", j + 1, r.exp())));
    }
    let inv: f64 = rates.iter().map(|r| 1.0 / r).product();
    let df = factorial(d as u32);
    let sum_r: f64 = rates.iter().sum();
    Ok((inv * ln_t.powi(d as i32) / df, inv * (ln_t + sum_r).powi(d as i32) / df))
}

/// `c_{ω,τ} = τ + ω^{−1/τ}·log(e/ω)`.
pub fn superexp_constant(omega: f64, tau: f64) -> Result<f64> {
    if !(omega > 0.0 && tau > 0.0) {
        return Err(Error::InvalidArgument(format!("omega = {omega} and tau = {tau} must be positive")));
    }
    let c = tau + omega.powf(-1.0 / tau) * (1.0 - omega.ln());
    if c > 0.0 {
        Ok(c)
    } else {
        Err(Error::NonPositiveC(c))
    }
}

/// `exp(c_{ω,τ}·(log T)^{1/τ})`, a bound on `|E(T)|` for `m = 0`, `p = 0` and `r_j ≥ ω·j^τ`.
///
/// The bound is stated for `T > e^{r_1}`; smaller `T` are evaluated as well.
pub fn superexp_bound(omega: f64, tau: f64, big_t: f64) -> Result<f64> {
    let c = superexp_constant(omega, tau)?;
    check_threshold(big_t)?;
    Ok((c * big_t.ln().powf(1.0 / tau)).exp())
}

/// The two finite-dimensional sets with their own cardinality lemmas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiniteSet {
    /// `Γ(T) = {l ∈ N^m : l_1 ⋯ l_m ≤ T}`.
    Gamma,
    /// `H(T)`: the Korobov cross restricted to `m + t + 1` coordinates, all `s`-rates equal to `r`.
    H,
}

/// Lemma bound on `|Γ(T)|` (which ignores `t`, `a`, `r`) or on `|H(T)|`.
pub fn gamma_h_upper(kind: FiniteSet, m: u32, t: u32, a: f64, r: f64, big_t: f64) -> Result<f64> {
    check_threshold(big_t)?;
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    match kind {
        FiniteSet::Gamma => {
            let mf = f64::from(m);
            let log_poly = if m == 1 { 0.0 } else { (mf - 1.0) * (big_t.ln() + mf * std::f64::consts::LN_2).ln() };
            Ok(2f64.powf(mf) / factorial(m - 1) * big_t * log_poly.exp())
        }
        FiniteSet::H => Ok((b_constant(a, r, m, t).ln() + log_a_factor(a, r, m, t, big_t)).exp()),
    }
}

/// A cross whose cardinality at `T` equals `|Γ(T)|` in dimension `m`.
pub fn gamma_reference_spec(m: u32) -> Result<ValidatedSpec> {
    match m {
        0 => Err(Error::InvalidArgument("m must be at least 1".into())),
        1 => CrossSpec::analytic(1, 1.0, 0.0, 0.0, 0.0, SmoothnessSequence::finite(Vec::new())).validate(),
        _ => CrossSpec::korobov(1, 1.0, 0.0, m - 2, 1.0, SmoothnessSequence::finite(vec![1.0; m as usize - 1])).validate(),
    }
}

/// A cross whose cardinality at `T` equals `|H(T)|`.
pub fn h_reference_spec(m: u32, t: u32, a: f64, r: f64) -> Result<ValidatedSpec> {
    CrossSpec::korobov(m, a, 0.0, t, r, SmoothnessSequence::finite(vec![r; t as usize + 1])).validate()
}

/// Constants that entered an upper bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum BoundConstants {
    Korobov(KorobovConstants),
    Analytic {
        #[serde(rename = "M")]
        m: f64,
    },
}

/// Lower bound, exact count and upper bound at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    #[serde(rename = "T")]
    pub t: f64,
    pub lower: u128,
    pub exact: Option<u128>,
    pub upper: Option<f64>,
    pub hypotheses_ok: bool,
    /// The theorem constant multiplying the growth factor.
    pub constant_used: Option<f64>,
    pub constants: Option<BoundConstants>,
}

impl BoundReport {
    /// `lower ≤ exact ≤ upper` with slack `1e−9` on the real upper bound.
    pub fn sandwich_holds(&self) -> bool {
        let Some(exact) = self.exact else { return false };
        let upper_ok = match self.upper {
            Some(u) => (exact as f64) <= u + 1e-9,
            None => true,
        };
        self.lower <= exact && upper_ok
    }
}

/// Upper bound `C^S·A(T)` (Korobov) or `C^S·T^{m/a}` (analytic) with its constants.
fn certified_upper(spec: &ValidatedSpec, big_t: f64) -> Result<(f64, f64, BoundConstants)> {
    let c = extension_constant(spec)?;
    match spec.variant {
        Variant::Korobov { t, r } => {
            let consts = korobov_constants(spec)?;
            let upper = (c.ln() + log_a_factor(spec.a(), r, spec.m, t, big_t)).exp();
            Ok((upper, c, BoundConstants::Korobov(consts)))
        }
        Variant::Analytic { .. } => {
            let m_val = analytic_constant(spec)?;
            let upper = (c.ln() + f64::from(spec.m) / spec.a() * big_t.ln()).exp();
            Ok((upper, c, BoundConstants::Analytic { m: m_val }))
        }
    }
}

/// Assembles lower bound, exact count and (when the hypotheses hold) the upper bound.
pub fn sandwich_report(spec: &ValidatedSpec, big_t: f64) -> Result<BoundReport> {
    check_threshold(big_t)?;
    let lower = if spec.m == 0 { 1 } else { lower_bound(spec, big_t)? };
    let exact = Some(count_cross(spec, big_t, None)?.total);
    let certified = if spec.hypotheses().upper_bound {
        match certified_upper(spec, big_t) {
            Ok(v) => Some(v),
            Err(e) if e.kind() == crate::error::ErrorKind::Hypothesis => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    Ok(match certified {
        Some((upper, c, constants)) => BoundReport {
            t: big_t,
            lower,
            exact,
            upper: Some(upper),
            hypotheses_ok: true,
            constant_used: Some(c),
            constants: Some(constants),
        },
        None => BoundReport {
            t: big_t,
            lower,
            exact,
            upper: None,
            hypotheses_ok: false,
            constant_used: None,
            constants: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crosses::count_cross;
    use crate::fixtures::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn k1_constants() {
        let c = korobov_constants(&spec_k1()).unwrap();
        assert_eq!(c.lambda_exp, 1.0);
        assert!(close(c.m_t, 3f64.ln(), 1e-10));
        assert_eq!(c.regime, Regime::Critical);
        assert_eq!(c.b, 2.0);
        assert!(close(c.c, 6.0, 1e-9));
    }

    #[test]
    fn k2_constants() {
        let c = korobov_constants(&spec_k2()).unwrap();
        // M(0) = Σ_{j≥2} (2/3)^{2j−1}/(2j−1) = artanh(2/3) − 2/3 = ½ log 5 − ⅔.
        assert!(close(c.m_t, 0.5 * 5f64.ln() - 2.0 / 3.0, 1e-10));
        assert_eq!(c.b, 1.5);
        assert!(close(c.c, 1.72205, 1e-5));
        assert!(close(korobov_upper(&spec_k2(), 16.0).unwrap(), 1.72205 * 16.0, 1e-3));
    }

    #[test]
    fn m_t_is_chunk_independent() {
        for spec in [spec_k1(), spec_k2()] {
            let Variant::Korobov { t, r } = spec.variant else { unreachable!() };
            let lambda = (1.0 / spec.a()).max(1.0 / r);
            let sums: Vec<f64> = [1, 7, 16, 200]
                .iter()
                .map(|&c| korobov_tail_sum(&spec.seq, t, lambda, c).unwrap())
                .collect();
            assert!(sums.iter().all(|s| close(*s, sums[0], 1e-10)));
        }
        let sums: Vec<f64> = [1, 5, 16, 64].iter().map(|&c| analytic_tail_sum(&spec_a2(), c).unwrap()).collect();
        assert!(sums.iter().all(|s| close(*s, sums[0], 1e-10)));
    }

    #[test]
    fn critical_rate_one_everywhere_violates() {
        let spec = CrossSpec::korobov(1, 2.0, 1.0, 0, 1.0, SmoothnessSequence::affine(1.0, 0.0))
            .validate()
            .unwrap();
        assert!(!spec.hypotheses().upper_bound);
        assert!(matches!(korobov_constants(&spec), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn korobov_upper_examples() {
        assert!(close(korobov_upper(&spec_k1(), 4.0).unwrap(), 6.0 * 4.0 * 9f64.ln(), 1e-9));
        assert!(close(korobov_upper(&spec_k1(), 4.0).unwrap(), 52.733, 1e-3));
        assert!(close(korobov_upper(&spec_k1(), 1.0).unwrap(), 6.5917, 1e-4));
    }

    #[test]
    fn analytic_constants() {
        // Oracle: direct partial sums far beyond the certified tolerance.
        let m0q: f64 = (1..60).map(|j| 1.0 / (f64::from(j).exp() - 1.0)).sum();
        assert!(close(analytic_constant(&spec_a1()).unwrap(), m0q, 1e-11));
        assert!(close(m0q, 0.8202595115, 1e-9));
        let mpq: f64 = 2f64.sqrt() * (1..80).map(|j| (-0.75 * f64::from(j)).exp() / (1.5 * f64::from(j) - 1.0)).sum::<f64>();
        assert!(close(analytic_constant(&spec_a2()).unwrap(), mpq, 1e-11));
        assert!(close(mpq, 1.5589116787, 1e-9));
        let constant = CrossSpec::analytic(1, 2.0, 1.0, 0.0, 0.0, SmoothnessSequence::affine(1.0, 0.0))
            .validate()
            .unwrap();
        assert!(matches!(analytic_constant(&constant), Err(Error::Diverges(_))));
        let weak = CrossSpec::analytic(1, 2.0, 1.0, 2.0, 0.5, SmoothnessSequence::affine(0.0, 0.55))
            .validate()
            .unwrap();
        assert!(matches!(analytic_constant(&weak), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn extension_constant_table() {
        let k1 = spec_k1().spec().clone();
        let x = k1.clone().with_signs(true, false).validate().unwrap();
        assert!(close(extension_constant(&x).unwrap(), 12.0, 1e-9));
        let y = k1.with_signs(false, true).validate().unwrap();
        assert!(close(extension_constant(&y).unwrap(), 18.0, 1e-9));
        let both = spec_a1().spec().clone().with_signs(true, true).validate().unwrap();
        let want = 2.0 * 2.25 * (2.0 * 0.8202595115f64).exp();
        assert!(close(extension_constant(&both).unwrap(), want, 1e-8));
        assert!(close(want, 23.2103, 1e-4));
    }

    #[test]
    fn lower_bounds() {
        let spec = CrossSpec::korobov(2, 1.0, 0.0, 0, 1.0, SmoothnessSequence::affine(0.0, 1.0))
            .validate()
            .unwrap();
        assert_eq!(lower_bound(&spec, 3.0).unwrap(), 9);
        assert_eq!(lower_bound(&spec_k1(), 4.0).unwrap(), 4);
        assert_eq!(lower_bound(&spec_a2(), 1.0).unwrap(), 1);
        // Exact roots are not lost to rounding: 9^{1/2} = 3.
        assert_eq!(lower_bound(&spec_k1(), 9.0).unwrap(), 9);
    }

    #[test]
    fn simplex_bound_examples() {
        let e2 = 2f64.exp();
        let (lo, hi) = simplex_bounds(&[1.0, 1.0], 2, e2).unwrap();
        assert!(close(lo, 2.0, 1e-12) && close(hi, 8.0, 1e-12));
        let (lo, hi) = simplex_bounds(&[1.0, 2.0], 2, e2).unwrap();
        assert!(close(lo, 1.0, 1e-12) && close(hi, 6.25, 1e-12));
        let (lo, hi) = simplex_bounds(&[1.0], 1, 1f64.exp()).unwrap();
        assert!(close(lo, 1.0, 1e-12) && close(hi, 2.0, 1e-12));
        assert!(matches!(simplex_bounds(&[3.0], 1, 2.0), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn superexp_examples() {
        let e = 1f64.exp();
        assert!(close(superexp_constant(e, 1.0).unwrap(), 1.0, 1e-15));
        assert!(close(superexp_bound(e, 1.0, 50.0).unwrap(), 50.0, 1e-10));
        assert_eq!(superexp_constant(1.0, 2.0).unwrap(), 3.0);
        assert!(close(superexp_constant(0.5, 1.0).unwrap(), 1.0 + 2.0 * (2.0 * e).ln(), 1e-14));
        assert!(close(superexp_constant(0.5, 1.0).unwrap(), 4.386294361, 1e-9));
        assert!(matches!(superexp_constant(-1.0, 0.5), Err(Error::InvalidArgument(_))));
        // e^{−u/τ}(u − 1) peaks at τ·e^{−1−1/τ} < τ, so c stays positive.
        for omega in [0.01, 0.5, 1.0, 7.389, 50.0, 1e6] {
            for tau in [0.05, 0.5, 1.0, 3.0, 20.0] {
                assert!(superexp_constant(omega, tau).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn gamma_and_h_examples() {
        // exponent m − 1 = 1: 4·4·(log 4 + 2 log 2).
        let g = gamma_h_upper(FiniteSet::Gamma, 2, 0, 1.0, 1.0, 4.0).unwrap();
        assert!(close(g, 16.0 * 16f64.ln(), 1e-12));
        assert!(close(g, 44.3614, 1e-4));
        assert_eq!(count_cross(&gamma_reference_spec(2).unwrap(), 4.0, None).unwrap().total, 8);
        let h = gamma_h_upper(FiniteSet::H, 1, 0, 1.0, 1.0, 4.0).unwrap();
        assert!(close(h, 8.0 * 9f64.ln(), 1e-12));
        assert_eq!(count_cross(&h_reference_spec(1, 0, 1.0, 1.0).unwrap(), 4.0, None).unwrap().total, 8);
        assert!(close(gamma_h_upper(FiniteSet::Gamma, 1, 0, 1.0, 1.0, 10.0).unwrap(), 20.0, 1e-12));
        assert_eq!(count_cross(&gamma_reference_spec(1).unwrap(), 10.0, None).unwrap().total, 10);
    }

    #[test]
    fn sandwich_examples() {
        let r = sandwich_report(&spec_k1(), 4.0).unwrap();
        assert_eq!((r.lower, r.exact), (4, Some(9)));
        assert!(close(r.upper.unwrap(), 52.733, 1e-3) && r.hypotheses_ok);
        let r = sandwich_report(&spec_a1(), 8.0).unwrap();
        assert_eq!((r.lower, r.exact), (8, Some(12)));
        assert!(close(r.upper.unwrap(), 40.8796, 1e-3));
        let r = sandwich_report(&spec_a1(), 1.0).unwrap();
        assert_eq!((r.lower, r.exact), (1, Some(1)));
        assert!(close(r.upper.unwrap(), 5.10995, 1e-4));
    }

    #[test]
    fn failed_hypotheses_still_report_counts() {
        let spec = CrossSpec::korobov(1, 2.0, 1.0, 0, 1.0, SmoothnessSequence::affine(1.0, 0.0))
            .validate()
            .unwrap();
        let r = sandwich_report(&spec, 1.9).unwrap();
        assert!(!r.hypotheses_ok && r.upper.is_none());
        assert_eq!(r.exact, Some(1));
    }

    #[test]
    fn displayed_b_exponent_fails_asymptotically() {
        // With B raised to the power t as displayed, C·T undercounts r_j = 2j for large T.
        let spec = spec_k2();
        let exact = count_cross(&spec, 1e5, None).unwrap().total as f64;
        let upper = korobov_upper(&spec, 1e5).unwrap();
        assert!(exact > upper);
        assert_eq!(count_cross(&spec, 1000.0, None).unwrap().total, 1734);
        for t in [1.0, 5.0, 20.0, 50.0, 100.0] {
            assert!(sandwich_report(&spec, t).unwrap().sandwich_holds());
        }
    }

    #[test]
    fn h_lemma_undercounts_when_r_exceeds_a_over_m() {
        // |H(T)| = Σ_n ⌊T/n²⌋ ≈ ζ(2)·T, while B·A = 1.5·T.
        let spec = h_reference_spec(1, 0, 1.0, 2.0).unwrap();
        let exact = count_cross(&spec, 100.0, None).unwrap().total;
        let oracle: u64 = (1..=10u64).map(|n| 100 / (n * n)).sum();
        assert_eq!(exact, u128::from(oracle));
        assert_eq!(exact, 153);
        assert!(close(gamma_h_upper(FiniteSet::H, 1, 0, 1.0, 2.0, 100.0).unwrap(), 150.0, 1e-9));
    }

    #[test]
    fn signed_y_extension_undercounts_k2() {
        // Unsigned s-blocks at T = 40: K = 40, 10, 4, 2, 1, 1 along s_1 and 2 at s_2 = 1.
        let spec = crate::fixtures::signed(&spec_k2(), false, true);
        let report = sandwich_report(&spec, 40.0).unwrap();
        assert_eq!(report.exact, Some(40 + 2 * (10 + 4 + 2 + 1 + 1 + 2)));
        assert!(report.hypotheses_ok);
        assert!(close(report.upper.unwrap(), 79.0791, 1e-4));
        assert!(!report.sandwich_holds());
    }
}
