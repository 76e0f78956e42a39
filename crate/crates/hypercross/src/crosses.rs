//! Exact enumeration and counting of hyperbolic crosses.
//!
//! The cross is traversed as a tree of s-blocks: a node is a sparse `s`, its
//! children append one entry at a larger coordinate. Each member s-block is
//! reported as a [`CompressedRecord`] carrying the closed-form size of its
//! k-block, so cost scales with the number of s-blocks only.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::weights::{MultiIndex, SparseIndex, ValidatedSpec, MAX_EXACT, MEMBERSHIP_TOL};

/// Extra slack used when pruning subtrees. Pruning only needs to keep a superset.
const PRUNE_SLACK: f64 = 1e-9;

/// Largest number of points the brute-force scanner accepts.
pub const BRUTE_FORCE_LIMIT: f64 = 1e8;

fn overflow_limit() -> u128 {
    1u128 << 127
}

/// An s-block together with the size of its admissible k-block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompressedRecord {
    pub s: SparseIndex,
    /// Admissible `k` satisfy `1 + |k_j| ≤ K` for every `j`.
    #[serde(rename = "K")]
    pub k_radius: u64,
    /// `2^nnz(s)` when `y` is signed, else 1.
    pub s_sign_multiplicity: u128,
}

impl CompressedRecord {
    /// Number of `k` in the block: `K^m`, or `(2K−1)^m` when `x` is signed.
    pub fn k_count(&self, m: u32, x_signed: bool) -> Result<u128> {
        let base = if x_signed { 2 * u128::from(self.k_radius) - 1 } else { u128::from(self.k_radius) };
        base.checked_pow(m).ok_or(Error::Overflow)
    }

    /// Number of signed indices this record stands for.
    pub fn expanded_count(&self, m: u32, x_signed: bool) -> Result<u128> {
        self.k_count(m, x_signed)?
            .checked_mul(self.s_sign_multiplicity)
            .ok_or(Error::Overflow)
    }

    /// The unsigned indices of this record, `k` in lexicographic order.
    pub fn indices(&self, m: u32) -> impl Iterator<Item = MultiIndex> + '_ {
        let radius = self.k_radius;
        let mut next = Some(vec![0u64; m as usize]);
        std::iter::from_fn(move || {
            let current = next.take()?;
            let mut succ = current.clone();
            // Odometer with the last coordinate varying fastest.
            let mut pos = succ.len();
            while pos > 0 {
                pos -= 1;
                if succ[pos] + 1 < radius {
                    succ[pos] += 1;
                    next = Some(succ);
                    break;
                }
                succ[pos] = 0;
            }
            Some(MultiIndex::new(current, self.s.clone()))
        })
    }
}

/// Cardinality of a cross.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCount {
    pub total: u128,
    pub records: u64,
    pub active_dim: u32,
    #[serde(rename = "T")]
    pub t: f64,
}

/// Everything the traversal needs, computed once per `(spec, T)`.
#[derive(Debug, Clone)]
struct Plan<'a> {
    spec: &'a ValidatedSpec,
    limit: f64,
    dim: u32,
    /// `rates[j]` for `j = 1..=dim`; index 0 unused.
    rates: Vec<f64>,
    /// Sum of the dips of all coordinates above `j`.
    neg_after: Vec<f64>,
    /// From this coordinate on, an empty value range at `j` implies empty ranges above.
    monotone_from: u32,
}

impl<'a> Plan<'a> {
    fn new(spec: &'a ValidatedSpec, t: f64, dim_cap: Option<u32>) -> Result<Self> {
        if !(t >= 1.0) || !t.is_finite() {
            return Err(Error::ThresholdBelowOne(t));
        }
        let limit = t.ln() + MEMBERSHIP_TOL;
        let dips = spec.dips()?;
        let mut dim = spec.reachable_dimension(limit + PRUNE_SLACK, &dips)?;
        if let Some(cap) = dim_cap {
            dim = dim.min(cap);
        }
        let rates: Vec<f64> = std::iter::once(0.0)
            .chain((1..=dim).map(|j| spec.rate(j).expect("coordinate within dimension")))
            .collect();
        let mut neg_after = vec![0.0; dim as usize + 1];
        for j in (0..dim as usize).rev() {
            let dip_above = dips
                .iter()
                .find(|&&(c, _)| c as usize == j + 1)
                .map_or(0.0, |&(_, g)| g);
            neg_after[j] = neg_after[j + 1] + dip_above;
        }
        let last_dip = dips.last().map_or(0, |&(j, _)| j);
        let monotone_from = spec.seq.prefix_len().max(last_dip) + 1;
        Ok(Self { spec, limit, dim, rates, neg_after, monotone_from })
    }

    fn range(&self, j: u32, sw: f64) -> Result<Option<(u64, u64)>> {
        let budget = self.limit + PRUNE_SLACK - sw - self.neg_after[j as usize];
        self.spec.value_range(self.rates[j as usize], budget)
    }

    fn term(&self, j: u32, v: u64) -> f64 {
        self.spec.coord_term(self.rates[j as usize], v as f64)
    }

    /// Largest `K ≥ 1` with `k_term(K) + sw ≤ limit`; the caller guarantees `sw ≤ limit`.
    fn k_radius(&self, sw: f64) -> Result<u64> {
        let spec = self.spec;
        if spec.m == 0 {
            return Ok(1);
        }
        let guess = ((self.limit - sw) / spec.a()).exp();
        if !(guess < MAX_EXACT as f64) {
            return Err(Error::Overflow);
        }
        let fits = |k: u64| spec.k_term(k) + sw <= self.limit;
        let mut k = (guess.floor() as u64).max(1);
        while k > 1 && !fits(k) {
            k -= 1;
        }
        while fits(k + 1) {
            k += 1;
        }
        Ok(k)
    }

    fn record(&self, path: &[(u32, u64)], sw: f64) -> Result<CompressedRecord> {
        let s_sign_multiplicity = if self.spec.y_signed { 1u128 << path.len() } else { 1 };
        Ok(CompressedRecord {
            s: SparseIndex::from_sorted(path.to_vec()),
            k_radius: self.k_radius(sw)?,
            s_sign_multiplicity,
        })
    }

    /// Top-level children of the empty block, in traversal order.
    fn roots(&self) -> Result<Vec<(u32, u64)>> {
        let mut out = Vec::new();
        for j in 1..=self.dim {
            match self.range(j, 0.0)? {
                Some((lo, hi)) => out.extend((lo..=hi).map(|v| (j, v))),
                None if j >= self.monotone_from => break,
                None => {}
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
struct Frame {
    sw: f64,
    j: u32,
    v: u64,
    hi: u64,
}

/// Lazy depth-first stream of the compressed records of a cross.
///
/// Records come out in lexicographic order of `s` (by coordinate, then value).
#[derive(Debug, Clone)]
pub struct CrossWalker<'a> {
    plan: Plan<'a>,
    path: Vec<(u32, u64)>,
    stack: Vec<Frame>,
    pending: Option<CompressedRecord>,
    failed: bool,
}

impl<'a> CrossWalker<'a> {
    fn start(plan: Plan<'a>, path: Vec<(u32, u64)>, sw: f64) -> Result<Self> {
        let pending = if sw <= plan.limit { Some(plan.record(&path, sw)?) } else { None };
        let j = path.last().map_or(0, |&(j, _)| j);
        Ok(Self {
            plan,
            path,
            stack: vec![Frame { sw, j, v: 1, hi: 0 }],
            pending,
            failed: false,
        })
    }

    /// Unfolds every record into its unsigned indices.
    pub fn expand(self) -> impl Iterator<Item = Result<MultiIndex>> + 'a {
        let m = self.plan.spec.m;
        self.flat_map(move |rec| -> Box<dyn Iterator<Item = Result<MultiIndex>>> {
            match rec {
                Ok(rec) => Box::new(rec.indices(m).map(Ok).collect::<Vec<_>>().into_iter()),
                Err(e) => Box::new(std::iter::once(Err(e))),
            }
        })
    }

    fn step(&mut self) -> Result<Option<CompressedRecord>> {
        loop {
            if let Some(rec) = self.pending.take() {
                return Ok(Some(rec));
            }
            let plan = &self.plan;
            let Some(frame) = self.stack.last_mut() else { return Ok(None) };
            if frame.v <= frame.hi {
                let (j, v) = (frame.j, frame.v);
                frame.v += 1;
                let sw = frame.sw + plan.term(j, v);
                self.path.push((j, v));
                if sw <= plan.limit {
                    self.pending = Some(plan.record(&self.path, sw)?);
                }
                self.stack.push(Frame { sw, j, v: 1, hi: 0 });
                continue;
            }
            if frame.j < plan.dim {
                frame.j += 1;
                match plan.range(frame.j, frame.sw)? {
                    Some((lo, hi)) => {
                        frame.v = lo;
                        frame.hi = hi;
                    }
                    None if frame.j >= plan.monotone_from => frame.j = plan.dim,
                    None => {}
                }
                continue;
            }
            self.stack.pop();
            if !self.stack.is_empty() {
                self.path.pop();
            }
        }
    }
}

impl Iterator for CrossWalker<'_> {
    type Item = Result<CompressedRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        match self.step() {
            Ok(rec) => rec.map(Ok),
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

/// Streams the compressed records of the cross at threshold `t`.
///
/// `dim_cap` restricts the support of `s` to coordinates `1..=dim_cap`.
pub fn enumerate_cross(spec: &ValidatedSpec, t: f64, dim_cap: Option<u32>) -> Result<CrossWalker<'_>> {
    let plan = Plan::new(spec, t, dim_cap)?;
    CrossWalker::start(plan, Vec::new(), 0.0)
}

/// Runs `work` on the root block and on every top-level subtree in parallel, in traversal order.
fn per_subtree<T, F>(plan: &Plan<'_>, work: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(CrossWalker<'_>) -> Result<T> + Sync,
{
    let roots = plan.roots()?;
    let root = {
        let mut walker = CrossWalker::start(plan.clone(), Vec::new(), 0.0)?;
        // Only the empty block itself; its children are handled as separate tasks.
        walker.stack.clear();
        work(walker)?
    };
    let rest: Vec<Result<T>> = roots
        .par_iter()
        .map(|&(j, v)| {
            let walker = CrossWalker::start(plan.clone(), vec![(j, v)], plan.term(j, v))?;
            work(walker)
        })
        .collect();
    std::iter::once(Ok(root)).chain(rest).collect()
}

/// All compressed records, computed in parallel and returned in traversal order.
pub fn cross_records(spec: &ValidatedSpec, t: f64, dim_cap: Option<u32>) -> Result<Vec<CompressedRecord>> {
    let plan = Plan::new(spec, t, dim_cap)?;
    let parts = per_subtree(&plan, |walker| walker.collect::<Result<Vec<_>>>())?;
    Ok(parts.into_iter().flatten().collect())
}

/// Exact cardinality of the cross (with all sign multiplicities) at threshold `t`.
pub fn count_cross(spec: &ValidatedSpec, t: f64, dim_cap: Option<u32>) -> Result<CrossCount> {
    let plan = Plan::new(spec, t, dim_cap)?;
    let (m, x_signed) = (spec.m, spec.x_signed);
    let parts = per_subtree(&plan, |walker| {
        let mut total = 0u128;
        let mut records = 0u64;
        for rec in walker {
            total = total
                .checked_add(rec?.expanded_count(m, x_signed)?)
                .filter(|&x| x <= overflow_limit())
                .ok_or(Error::Overflow)?;
            records += 1;
        }
        Ok((total, records))
    })?;
    let mut total = 0u128;
    let mut records = 0u64;
    for (part, n) in parts {
        total = total
            .checked_add(part)
            .filter(|&x| x <= overflow_limit())
            .ok_or(Error::Overflow)?;
        records += n;
    }
    let mut active_dim = spec.active_dimension(t)?;
    if let Some(cap) = dim_cap {
        active_dim = active_dim.min(cap);
    }
    Ok(CrossCount { total, records, active_dim, t })
}

/// Search box for [`brute_force_count`]: `|k_j| ≤ k_max` and `|s_j| ≤ s_caps[j−1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteBox {
    pub k_max: u64,
    pub s_caps: Vec<u64>,
}

impl BruteBox {
    /// A box one step larger than needed in every direction.
    pub fn default_for(spec: &ValidatedSpec, t: f64) -> Result<Self> {
        let d = spec.active_dimension(t)?;
        let neg_total: f64 = spec.dips()?.iter().map(|&(_, g)| g).sum();
        let budget = t.ln() + MEMBERSHIP_TOL - neg_total;
        // Factors below 1 in s leave room for larger k.
        let k_max = (budget / spec.a()).exp().ceil() as u64;
        let mut s_caps = Vec::new();
        for j in 1..=d + 1 {
            if spec.rate(j).is_none() {
                break;
            }
            s_caps.push(spec.coordinate_cap(j, budget)? + 1);
        }
        Ok(Self { k_max, s_caps })
    }

    /// Number of points the box holds for this spec.
    pub fn points(&self, spec: &ValidatedSpec) -> f64 {
        let width = |cap: u64, signed: bool| if signed { 2.0 * cap as f64 + 1.0 } else { cap as f64 + 1.0 };
        let k = width(self.k_max, spec.x_signed).powi(spec.m as i32);
        self.s_caps.iter().fold(k, |acc, &c| acc * width(c, spec.y_signed))
    }
}

/// Advances a signed odometer; returns false after the last point.
fn odometer(values: &mut [i64], caps: &[u64], signed: bool) -> bool {
    for (v, &cap) in values.iter_mut().zip(caps).rev() {
        if *v < cap as i64 {
            *v += 1;
            return true;
        }
        *v = if signed { -(cap as i64) } else { 0 };
    }
    false
}

/// Counts the cross by scanning every point of a box. An oracle for [`count_cross`].
///
/// Signed points are scanned explicitly. `records` counts the unsigned s-blocks met,
/// and `active_dim` is the largest coordinate seen with a nonzero entry.
pub fn brute_force_count(spec: &ValidatedSpec, t: f64, bbox: Option<&BruteBox>) -> Result<CrossCount> {
    if !(t >= 1.0) || !t.is_finite() {
        return Err(Error::ThresholdBelowOne(t));
    }
    let owned;
    let bbox = match bbox {
        Some(b) => b,
        None => {
            owned = BruteBox::default_for(spec, t)?;
            &owned
        }
    };
    let points = bbox.points(spec);
    if points > BRUTE_FORCE_LIMIT {
        return Err(Error::BoxTooLarge { points });
    }
    let limit = t.ln() + MEMBERSHIP_TOL;
    let rates: Vec<f64> = (1..=bbox.s_caps.len() as u32)
        .map(|j| spec.rate(j).ok_or_else(|| Error::InvalidArgument(format!("box covers missing coordinate {j}"))))
        .collect::<Result<_>>()?;
    let k_terms: Vec<f64> = (0..=bbox.k_max + 1).map(|k| if k == 0 { 0.0 } else { spec.k_term(k) }).collect();
    let m = spec.m as usize;
    let k_caps = vec![bbox.k_max; m];
    let start = |caps: &[u64], signed: bool| -> Vec<i64> {
        caps.iter().map(|&c| if signed { -(c as i64) } else { 0 }).collect()
    };

    let mut total = 0u128;
    let mut records = 0u64;
    let mut active_dim = 0u32;
    let mut s = start(&bbox.s_caps, spec.y_signed);
    loop {
        let mut sw = 0.0;
        for (i, &v) in s.iter().enumerate() {
            if v != 0 {
                sw += spec.coord_term(rates[i], v.unsigned_abs() as f64);
            }
        }
        if sw <= limit {
            let mut members = 0u128;
            let mut k = start(&k_caps, spec.x_signed);
            loop {
                let radius = k.iter().map(|&x| x.unsigned_abs() + 1).max().unwrap_or(1);
                if k_terms[radius as usize] + sw <= limit {
                    members += 1;
                }
                if !odometer(&mut k, &k_caps, spec.x_signed) {
                    break;
                }
            }
            total = total.checked_add(members).ok_or(Error::Overflow)?;
            if members > 0 {
                if s.iter().all(|&v| v >= 0) {
                    records += 1;
                }
                if let Some(j) = s.iter().rposition(|&v| v != 0) {
                    active_dim = active_dim.max(j as u32 + 1);
                }
            }
        }
        if !odometer(&mut s, &bbox.s_caps, spec.y_signed) {
            break;
        }
    }
    Ok(CrossCount { total, records, active_dim, t })
}

/// Exact number of `s ∈ Z^d_+` with `Σ r_j s_j ≤ log_budget`.
pub fn simplex_count(rates: &[f64], log_budget: f64) -> Result<u128> {
    if rates.is_empty() {
        return Err(Error::InvalidArgument("rates must be nonempty".into()));
    }
    if let Some((i, &r)) = rates.iter().enumerate().find(|(_, r)| !(r.is_finite() && **r > 0.0)) {
        return Err(Error::NonPositiveRate { j: i as u32 + 1, value: r });
    }
    if !(log_budget >= 0.0) {
        return Err(Error::InvalidArgument(format!("log budget {log_budget} is negative")));
    }
    fn go(rates: &[f64], acc: f64, limit: f64) -> Result<u128> {
        let (&r, rest) = rates.split_first().expect("nonempty");
        let mut total = 0u128;
        let mut v = 0u64;
        loop {
            let next = if v == 0 { acc } else { acc + r * v as f64 };
            if next > limit {
                break;
            }
            let below = if rest.is_empty() { 1 } else { go(rest, next, limit)? };
            total = total.checked_add(below).ok_or(Error::Overflow)?;
            v += 1;
        }
        Ok(total)
    }
    go(rates, 0.0, log_budget + MEMBERSHIP_TOL)
}
