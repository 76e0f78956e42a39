//! Smoothness sequences, cross specifications and log-space weight evaluation.
//!
//! Two weight families are supported. For `k ∈ Z^m` and a finitely supported
//! `s ∈ Z^∞`, with `a = alpha - beta`,
//!
//! * Korobov: `log λ(k,s) = a·log max_j(1+|k_j|) + Σ_j r_j·log(1+|s_j|)`
//! * Analytic: `log ρ(k,s) = a·log max_j(1+|k_j|) + Σ_j (r_j·|s_j| − q·log(1+p·|s_j|))`
//!
//! All logarithms are natural. Membership in a cross at threshold `T` is
//! `log_weight ≤ log T + MEMBERSHIP_TOL`.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack on `log T` in every membership test.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Largest coordinate value handled exactly (integers up to 2^53 are exact in f64).
pub(crate) const MAX_EXACT: u64 = 1 << 53;

/// Number of tail coordinates scanned before a dip search or dimension search gives up.
const SCAN_LIMIT: u32 = 10_000_000;

/// Generator for rates beyond the explicit prefix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    /// The sequence ends after the prefix.
    None,
    /// `r_j = c0 + c1·j` for `j > L`.
    Affine { c0: f64, c1: f64 },
    /// `r_j = omega·j^tau` for `j > L`.
    Power { omega: f64, tau: f64 },
}

impl Tail {
    fn eval(&self, j: u32) -> Option<f64> {
        let x = f64::from(j);
        match *self {
            Tail::None => None,
            Tail::Affine { c0, c1 } => Some(c0 + c1 * x),
            Tail::Power { omega, tau } => Some(omega * x.powf(tau)),
        }
    }
}

/// Rates `r_1, r_2, ...`: an explicit prefix followed by a closed-form tail.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessSequence {
    pub prefix: Vec<f64>,
    pub tail: Tail,
}

impl SmoothnessSequence {
    pub fn new(prefix: Vec<f64>, tail: Tail) -> Self {
        Self { prefix, tail }
    }

    /// `r_j = c0 + c1·j` for every `j ≥ 1`.
    pub fn affine(c0: f64, c1: f64) -> Self {
        Self::new(Vec::new(), Tail::Affine { c0, c1 })
    }

    /// `r_j = omega·j^tau` for every `j ≥ 1`.
    pub fn power(omega: f64, tau: f64) -> Self {
        Self::new(Vec::new(), Tail::Power { omega, tau })
    }

    /// A finite sequence with exactly the given rates.
    pub fn finite(prefix: Vec<f64>) -> Self {
        Self::new(prefix, Tail::None)
    }

    /// Rate of coordinate `j` (1-based), or `None` past the end of a finite sequence.
    pub fn rate(&self, j: u32) -> Option<f64> {
        if j == 0 {
            return None;
        }
        match self.prefix.get(j as usize - 1) {
            Some(&r) => Some(r),
            None => self.tail.eval(j),
        }
    }

    pub fn prefix_len(&self) -> u32 {
        self.prefix.len() as u32
    }

    /// Number of coordinates for finite sequences.
    pub fn len(&self) -> Option<u32> {
        match self.tail {
            Tail::None => Some(self.prefix_len()),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// True when the tail repeats one value forever.
    pub fn tail_is_constant(&self) -> bool {
        matches!(self.tail, Tail::Affine { c1, .. } if c1 == 0.0)
    }

    fn validate(&self, ordered: bool) -> Result<()> {
        for (i, &r) in self.prefix.iter().enumerate() {
            let j = i as u32 + 1;
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::NonPositiveRate { j, value: r });
            }
            if ordered && i > 0 && r < self.prefix[i - 1] {
                return Err(Error::NonMonotoneSequence { j });
            }
        }
        let first = self.prefix_len() + 1;
        match self.tail {
            Tail::None => {}
            Tail::Affine { c0, c1 } => {
                if !(c0.is_finite() && c1.is_finite() && c1 >= 0.0) {
                    return Err(Error::InvalidSpec(format!(
                        "affine tail needs finite c0 and c1 >= 0 (c0 = {c0}, c1 = {c1})"
                    )));
                }
            }
            Tail::Power { omega, tau } => {
                if !(omega.is_finite() && tau.is_finite() && omega > 0.0 && tau > 0.0) {
                    return Err(Error::InvalidSpec(format!(
                        "power tail needs omega > 0 and tau > 0 (omega = {omega}, tau = {tau})"
                    )));
                }
            }
        }
        if let Some(r) = self.tail.eval(first) {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::NonPositiveRate { j: first, value: r });
            }
            if ordered {
                if let Some(&last) = self.prefix.last() {
                    if r < last {
                        return Err(Error::NonMonotoneSequence { j: first });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Which weight family a cross uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    /// Polynomial weight; the first `t+1` rates must all equal `r`.
    Korobov { t: u32, r: f64 },
    /// Exponential weight with algebraic prefactor `(1+p·s)^(-q)`.
    Analytic { p: f64, q: f64 },
}

/// Full parameterization of a hyperbolic cross.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecDocument", into = "SpecDocument")]
pub struct CrossSpec {
    pub variant: Variant,
    pub m: u32,
    pub alpha: f64,
    pub beta: f64,
    pub x_signed: bool,
    pub y_signed: bool,
    pub seq: SmoothnessSequence,
}

impl CrossSpec {
    pub fn korobov(m: u32, alpha: f64, beta: f64, t: u32, r: f64, seq: SmoothnessSequence) -> Self {
        Self {
            variant: Variant::Korobov { t, r },
            m,
            alpha,
            beta,
            x_signed: false,
            y_signed: false,
            seq,
        }
    }

    pub fn analytic(m: u32, alpha: f64, beta: f64, p: f64, q: f64, seq: SmoothnessSequence) -> Self {
        Self {
            variant: Variant::Analytic { p, q },
            m,
            alpha,
            beta,
            x_signed: false,
            y_signed: false,
            seq,
        }
    }

    pub fn with_signs(mut self, x_signed: bool, y_signed: bool) -> Self {
        self.x_signed = x_signed;
        self.y_signed = y_signed;
        self
    }

    /// The exponent `a = alpha − beta`.
    pub fn a(&self) -> f64 {
        self.alpha - self.beta
    }

    pub fn is_korobov(&self) -> bool {
        matches!(self.variant, Variant::Korobov { .. })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serialization cannot fail")
    }

    /// Checks every invariant and returns the validated spec.
    pub fn validate(self) -> Result<ValidatedSpec> {
        validate_spec(self)
    }

    /// Log of the weight factor contributed by a single coordinate with rate `rate` at value `v`.
    pub(crate) fn coord_term(&self, rate: f64, v: f64) -> f64 {
        match self.variant {
            Variant::Korobov { .. } => rate * v.ln_1p(),
            Variant::Analytic { p, q } => rate * v - q * (p * v).ln_1p(),
        }
    }

    /// Log of the k-block factor when `max_j(1+|k_j|) = big_k`.
    pub(crate) fn k_term(&self, big_k: u64) -> f64 {
        if self.m == 0 {
            0.0
        } else {
            self.a() * (big_k as f64).ln()
        }
    }
}

/// Advisory flags for the hypotheses of the cardinality theorems.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypotheses {
    /// The upper-bound theorem for this variant applies.
    pub upper_bound: bool,
    /// Human-readable reason when `upper_bound` is false.
    pub reason: Option<String>,
}

/// A spec that passed [`validate_spec`]. Dereferences to the underlying [`CrossSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedSpec {
    spec: CrossSpec,
    hypotheses: Hypotheses,
}

impl Deref for ValidatedSpec {
    type Target = CrossSpec;
    fn deref(&self) -> &CrossSpec {
        &self.spec
    }
}

impl ValidatedSpec {
    pub fn spec(&self) -> &CrossSpec {
        &self.spec
    }

    pub fn hypotheses(&self) -> &Hypotheses {
        &self.hypotheses
    }

    /// Rate of coordinate `j`; Korobov block coordinates return `r` by construction.
    pub fn rate(&self, j: u32) -> Option<f64> {
        self.spec.seq.rate(j)
    }
}

/// Validates a spec against all type invariants and evaluates the hypothesis flags.
pub fn validate_spec(spec: CrossSpec) -> Result<ValidatedSpec> {
    let (alpha, beta) = (spec.alpha, spec.beta);
    if !(alpha.is_finite() && beta.is_finite() && beta >= 0.0 && alpha > beta) {
        return Err(Error::BadExponents { alpha, beta });
    }
    match spec.variant {
        Variant::Korobov { t, r } => {
            if spec.m == 0 {
                return Err(Error::UnsupportedZeroM);
            }
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidSpec(format!("Korobov r must be positive, got {r}")));
            }
            spec.seq.validate(true)?;
            for j in 1..=t + 1 {
                match spec.seq.rate(j) {
                    Some(rj) if rj == r => {}
                    Some(rj) => return Err(Error::BadPrefixBlock { j, r, found: rj }),
                    None => return Err(Error::BadPrefixBlock { j, r, found: f64::NAN }),
                }
            }
        }
        Variant::Analytic { p, q } => {
            if !(p.is_finite() && q.is_finite() && p >= 0.0 && q >= 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "analytic p and q must be finite and nonnegative (p = {p}, q = {q})"
                )));
            }
            if p > 0.0 && q <= 0.0 {
                return Err(Error::InvalidSpec("p > 0 requires q > 0".into()));
            }
            if spec.m == 0 && p != 0.0 {
                return Err(Error::UnsupportedZeroM);
            }
            spec.seq.validate(false)?;
        }
    }
    let hypotheses = hypotheses(&spec);
    Ok(ValidatedSpec { spec, hypotheses })
}

fn hypotheses(spec: &CrossSpec) -> Hypotheses {
    let fail = |reason: String| Hypotheses { upper_bound: false, reason: Some(reason) };
    let a = spec.a();
    let m = f64::from(spec.m);
    let constant_tail = spec.seq.tail_is_constant();
    match spec.variant {
        Variant::Korobov { t, r } => {
            let lambda = (m / a).max(1.0 / r);
            if let Some(r_next) = spec.seq.rate(t + 2) {
                if lambda * r_next <= 1.0 {
                    return fail(format!("lambda * r_(t+2) = {} <= 1", lambda * r_next));
                }
                if constant_tail {
                    return fail("M(t) diverges for a constant tail".into());
                }
            }
            Hypotheses { upper_bound: true, reason: None }
        }
        Variant::Analytic { p, q } => {
            if spec.m == 0 {
                return fail("the analytic upper bound needs m >= 1".into());
            }
            if constant_tail {
                return fail("the analytic tail sum diverges for a constant tail".into());
            }
            if p > 0.0 {
                let need = (q + (q * a / m).sqrt()) / p;
                // Tails are nondecreasing, so the first tail rate is the smallest one.
                let mut js: Vec<u32> = (1..=spec.seq.prefix_len()).collect();
                if spec.seq.len().is_none() {
                    js.push(spec.seq.prefix_len() + 1);
                }
                for j in js {
                    let rj = spec.seq.rate(j).unwrap_or(f64::INFINITY);
                    if rj <= p * q {
                        return fail(format!("r_{j} = {rj} <= p*q = {}", p * q));
                    }
                    if rj < need {
                        return fail(format!("r_{j} = {rj} < (q + sqrt(q a / m)) / p = {need}"));
                    }
                }
            }
            Hypotheses { upper_bound: true, reason: None }
        }
    }
}

/// Finitely supported map from coordinates `j ≥ 1` to positive values, sorted by coordinate.
///
/// The derived ordering is lexicographic over `(coordinate, value)` pairs,
/// which is the traversal order of the enumerator.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SparseIndex(Vec<(u32, u64)>);

impl SparseIndex {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Builds an index from `(coordinate, value)` pairs; zero values are dropped.
    pub fn new(mut pairs: Vec<(u32, u64)>) -> Result<Self> {
        pairs.retain(|&(_, v)| v != 0);
        pairs.sort_unstable();
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidArgument(format!("coordinate {} repeated", w[0].0)));
            }
        }
        if pairs.first().is_some_and(|&(j, _)| j == 0) {
            return Err(Error::InvalidArgument("coordinates are 1-based".into()));
        }
        Ok(Self(pairs))
    }

    /// Builds an index from dense values `s_1, s_2, ...`.
    pub fn from_dense(values: &[u64]) -> Self {
        Self(
            values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0)
                .map(|(i, &v)| (i as u32 + 1, v))
                .collect(),
        )
    }

    pub(crate) fn from_sorted(pairs: Vec<(u32, u64)>) -> Self {
        Self(pairs)
    }

    pub fn entries(&self) -> &[(u32, u64)] {
        &self.0
    }

    pub fn get(&self, j: u32) -> u64 {
        self.0
            .binary_search_by_key(&j, |&(c, _)| c)
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn nnz(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|s|₁`.
    pub fn total(&self) -> u64 {
        self.0.iter().map(|&(_, v)| v).sum()
    }

    /// Largest coordinate in the support, 0 when empty.
    pub fn max_coord(&self) -> u32 {
        self.0.last().map_or(0, |&(j, _)| j)
    }
}

/// One point `(k, s)` of a cross, stored by absolute values.
///
/// Ordered by `k` lexicographically, then by `s`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    pub k: Vec<u64>,
    pub s: SparseIndex,
}

impl MultiIndex {
    pub fn new(k: Vec<u64>, s: SparseIndex) -> Self {
        Self { k, s }
    }

    pub fn zero(m: u32) -> Self {
        Self { k: vec![0; m as usize], s: SparseIndex::empty() }
    }

    /// `max_j(1 + k_j)`, which is 1 for `m = 0`.
    pub fn k_radius(&self) -> u64 {
        self.k.iter().map(|&x| x + 1).max().unwrap_or(1)
    }
}

impl ValidatedSpec {
    /// Natural log of the s-part of the weight, summed in ascending coordinate order.
    pub fn s_log_weight(&self, s: &SparseIndex) -> Result<f64> {
        s.entries().iter().try_fold(0.0, |acc, &(j, v)| {
            let rate = self.rate(j).ok_or_else(|| {
                Error::InvalidArgument(format!("coordinate {j} is past the end of the sequence"))
            })?;
            Ok(acc + self.coord_term(rate, v as f64))
        })
    }

    /// Natural log of `λ(k,s)` or `ρ(k,s)` computed with `a = alpha − beta`.
    pub fn log_weight(&self, idx: &MultiIndex) -> Result<f64> {
        if idx.k.len() != self.m as usize {
            return Err(Error::InvalidArgument(format!(
                "k has length {}, expected m = {}",
                idx.k.len(),
                self.m
            )));
        }
        let s_part = self.s_log_weight(&idx.s)?;
        Ok(self.k_term(idx.k_radius()) + s_part)
    }

    /// Whether `idx` lies in the cross at threshold `t`.
    pub fn contains(&self, idx: &MultiIndex, t: f64) -> Result<bool> {
        Ok(self.log_weight(idx)? <= t.ln() + MEMBERSHIP_TOL)
    }

    /// Values `v ≥ 1` at coordinate `rate` whose factor has log ≤ `budget`, as an inclusive range.
    ///
    /// The per-coordinate log-factor is convex in `v`, so the sublevel set is an interval.
    pub(crate) fn value_range(&self, rate: f64, budget: f64) -> Result<Option<(u64, u64)>> {
        let g = |v: u64| self.coord_term(rate, v as f64);
        let vmin = self.argmin_value(rate);
        if g(vmin) > budget {
            return Ok(None);
        }
        // Smallest admissible value on the nonincreasing branch [1, vmin].
        let (mut lo, mut hi) = (1u64, vmin);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if g(mid) <= budget {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let first = lo;
        // Largest admissible value on the nondecreasing branch [vmin, ∞).
        let mut good = vmin;
        let mut step = 1u64;
        let bad = loop {
            let probe = good.saturating_add(step);
            if probe > MAX_EXACT {
                if g(MAX_EXACT) <= budget {
                    return Err(Error::Overflow);
                }
                break MAX_EXACT;
            }
            if g(probe) > budget {
                break probe;
            }
            good = probe;
            step = step.saturating_mul(2);
        };
        let (mut lo, mut hi) = (good, bad);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if g(mid) <= budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Some((first, lo)))
    }

    /// Value `v ≥ 1` minimizing the log-factor of a coordinate with the given rate.
    fn argmin_value(&self, rate: f64) -> u64 {
        match self.variant {
            Variant::Analytic { p, q } if p > 0.0 => {
                // The continuous minimizer of r·v − q·log(1+p·v) is q/r − 1/p.
                let vc = q / rate - 1.0 / p;
                if vc <= 1.0 {
                    return 1;
                }
                let lo = (vc.floor() as u64).clamp(1, MAX_EXACT);
                let hi = (lo + 1).min(MAX_EXACT);
                if self.coord_term(rate, hi as f64) < self.coord_term(rate, lo as f64) {
                    hi
                } else {
                    lo
                }
            }
            _ => 1,
        }
    }

    /// Minimum over `v ≥ 1` of the log-factor at the given rate.
    pub(crate) fn min_term(&self, rate: f64) -> f64 {
        self.coord_term(rate, self.argmin_value(rate) as f64)
    }

    /// Largest `S` such that the factor of coordinate `j` at `s_j = S` has log ≤ `log_budget`.
    ///
    /// Every larger value exceeds the budget. Returns 0 for coordinates past the end
    /// of a finite sequence or when no positive value fits.
    pub fn coordinate_cap(&self, j: u32, log_budget: f64) -> Result<u64> {
        let Some(rate) = self.rate(j) else { return Ok(0) };
        if log_budget < 0.0 {
            return Ok(0);
        }
        Ok(self.value_range(rate, log_budget)?.map_or(0, |(_, hi)| hi))
    }

    /// Coordinates whose factor dips below 1, with their most negative log-factor.
    ///
    /// Only the analytic variant with `p > 0` has such coordinates.
    pub(crate) fn dips(&self) -> Result<Vec<(u32, f64)>> {
        let Variant::Analytic { p, .. } = self.variant else { return Ok(Vec::new()) };
        if p == 0.0 {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        let mut j = 1u32;
        while let Some(rate) = self.rate(j) {
            let g = self.min_term(rate);
            if g < 0.0 {
                out.push((j, g));
            } else if j > self.seq.prefix_len() {
                break;
            }
            if j > self.seq.prefix_len() && self.seq.tail_is_constant() {
                return Err(Error::InfiniteCross(
                    "a constant tail has factors below 1 at every coordinate".into(),
                ));
            }
            if j >= SCAN_LIMIT {
                return Err(Error::InfiniteCross("dip region does not end".into()));
            }
            j += 1;
        }
        Ok(out)
    }

    /// Largest coordinate that can carry a nonzero entry when the s-part has log ≤ `budget`.
    ///
    /// `neg_total` is the sum of all dips. A coordinate `j` qualifies when its own minimum
    /// plus the dips of all other coordinates fits the budget.
    pub(crate) fn reachable_dimension(&self, budget: f64, dips: &[(u32, f64)]) -> Result<u32> {
        let neg_total: f64 = dips.iter().map(|&(_, g)| g).sum();
        let own_dip = |j: u32| {
            dips.iter().find(|&&(c, _)| c == j).map_or(0.0, |&(_, g)| g)
        };
        let last_dip = dips.last().map_or(0, |&(j, _)| j);
        let fits = |j: u32, rate: f64| self.min_term(rate) + (neg_total - own_dip(j)) <= budget;
        let mut best = 0;
        let mut j = 1u32;
        while let Some(rate) = self.rate(j) {
            let past_prefix = j > self.seq.prefix_len();
            if fits(j, rate) {
                best = j;
                if past_prefix && self.seq.tail_is_constant() {
                    return Err(Error::InfiniteCross(format!(
                        "constant tail rate {rate} fits the budget at every coordinate"
                    )));
                }
            } else if past_prefix && j > last_dip {
                break;
            }
            if j >= SCAN_LIMIT {
                return Err(Error::InfiniteCross("active dimension search does not end".into()));
            }
            j += 1;
        }
        Ok(best)
    }

    /// Largest `j` that carries a nonzero `s_j` somewhere in the cross at threshold `t`.
    ///
    /// Without factors below 1 this is the largest `j` whose unit index `e_j` is in the cross.
    pub fn active_dimension(&self, t: f64) -> Result<u32> {
        if !(t >= 1.0) {
            return Err(Error::ThresholdBelowOne(t));
        }
        let dips = self.dips()?;
        self.reachable_dimension(t.ln() + MEMBERSHIP_TOL, &dips)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TailDocument {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeqDocument {
    prefix: Vec<f64>,
    tail: TailDocument,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDocument {
    variant: String,
    m: u32,
    alpha: f64,
    beta: f64,
    x_signed: bool,
    y_signed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    seq: SeqDocument,
}

fn required<T>(value: Option<T>, what: &str) -> std::result::Result<T, String> {
    value.ok_or_else(|| format!("missing field `{what}`"))
}

fn forbidden<T>(value: &Option<T>, what: &str, context: &str) -> std::result::Result<(), String> {
    match value {
        Some(_) => Err(format!("field `{what}` is not allowed for {context}")),
        None => Ok(()),
    }
}

impl TryFrom<SpecDocument> for CrossSpec {
    type Error = String;

    fn try_from(doc: SpecDocument) -> std::result::Result<Self, String> {
        let tail = &doc.seq.tail;
        let tail = match tail.kind.as_str() {
            "none" => {
                for (v, name) in [(&tail.c0, "c0"), (&tail.c1, "c1"), (&tail.omega, "omega"), (&tail.tau, "tau")] {
                    forbidden(v, name, "tail kind `none`")?;
                }
                Tail::None
            }
            "affine" => {
                forbidden(&tail.omega, "omega", "an affine tail")?;
                forbidden(&tail.tau, "tau", "an affine tail")?;
                Tail::Affine { c0: required(tail.c0, "c0")?, c1: required(tail.c1, "c1")? }
            }
            "power" => {
                forbidden(&tail.c0, "c0", "a power tail")?;
                forbidden(&tail.c1, "c1", "a power tail")?;
                Tail::Power { omega: required(tail.omega, "omega")?, tau: required(tail.tau, "tau")? }
            }
            other => return Err(format!("unknown tail kind `{other}`")),
        };
        let variant = match doc.variant.as_str() {
            "korobov" => {
                forbidden(&doc.p, "p", "the korobov variant")?;
                forbidden(&doc.q, "q", "the korobov variant")?;
                Variant::Korobov { t: required(doc.t, "t")?, r: required(doc.r, "r")? }
            }
            "analytic" => {
                forbidden(&doc.t, "t", "the analytic variant")?;
                forbidden(&doc.r, "r", "the analytic variant")?;
                Variant::Analytic { p: required(doc.p, "p")?, q: required(doc.q, "q")? }
            }
            other => return Err(format!("unknown variant `{other}`")),
        };
        Ok(CrossSpec {
            variant,
            m: doc.m,
            alpha: doc.alpha,
            beta: doc.beta,
            x_signed: doc.x_signed,
            y_signed: doc.y_signed,
            seq: SmoothnessSequence::new(doc.seq.prefix, tail),
        })
    }
}

impl From<CrossSpec> for SpecDocument {
    fn from(spec: CrossSpec) -> Self {
        let (variant, t, r, p, q) = match spec.variant {
            Variant::Korobov { t, r } => ("korobov", Some(t), Some(r), None, None),
            Variant::Analytic { p, q } => ("analytic", None, None, Some(p), Some(q)),
        };
        let tail = match spec.seq.tail {
            Tail::None => TailDocument { kind: "none".into(), c0: None, c1: None, omega: None, tau: None },
            Tail::Affine { c0, c1 } => TailDocument {
                kind: "affine".into(),
                c0: Some(c0),
                c1: Some(c1),
                omega: None,
                tau: None,
            },
            Tail::Power { omega, tau } => TailDocument {
                kind: "power".into(),
                c0: None,
                c1: None,
                omega: Some(omega),
                tau: Some(tau),
            },
        };
        SpecDocument {
            variant: variant.into(),
            m: spec.m,
            alpha: spec.alpha,
            beta: spec.beta,
            x_signed: spec.x_signed,
            y_signed: spec.y_signed,
            t,
            r,
            p,
            q,
            seq: SeqDocument { prefix: spec.seq.prefix, tail },
        }
    }
}
