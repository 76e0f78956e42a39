//! Infinite sums over a smoothness sequence with a certified remainder.

use crate::error::{Error, Result};
use crate::weights::{SmoothnessSequence, Tail};

/// Summation stops once the certified remainder is below this value.
pub(crate) const TAIL_TOL: f64 = 1e-12;

const MAX_TERMS: u32 = 50_000_000;

pub(crate) const DEFAULT_CHUNK: u32 = 16;

/// Upper bound on `Σ_{i ≥ j} exp(−kappa·r_i)` where every `r_i` comes from the tail generator.
fn exp_tail_bound(tail: Tail, j: u32, kappa: f64) -> Result<f64> {
    let x = f64::from(j);
    match tail {
        Tail::None => Ok(0.0),
        Tail::Affine { c0, c1 } => {
            if c1 <= 0.0 {
                return Err(Error::Diverges("constant tail".into()));
            }
            Ok((-kappa * (c0 + c1 * x)).exp() / -(-kappa * c1).exp_m1())
        }
        Tail::Power { omega, tau } => {
            let first = (-kappa * omega * x.powf(tau)).exp();
            if tau >= 1.0 {
                // Increments of a convex generator never shrink.
                let delta = omega * ((x + 1.0).powf(tau) - x.powf(tau));
                Ok(first / -(-kappa * delta).exp_m1())
            } else {
                // Compare with ∫_j^∞ exp(−κω x^τ) dx = (κω)^{−1/τ}/τ · Γ(1/τ, y), y = κω j^τ,
                // and use Γ(s, y) ≤ y^{s−1} e^{−y} / (1 − (s−1)/y) for y > s − 1.
                let y = kappa * omega * x.powf(tau);
                let s = 1.0 / tau;
                if y <= 2.0 * (s - 1.0) {
                    return Ok(f64::INFINITY);
                }
                let log_integral = -s * (kappa * omega).ln() - tau.ln() + (s - 1.0) * y.ln() - y
                    - (1.0 - (s - 1.0) / y).ln();
                Ok(first + log_integral.exp())
            }
        }
    }
}

/// A series `Σ_{j ≥ start} term(r_j)` together with an exponential envelope.
///
/// `envelope(r_min)` returns `(K, kappa)` with `term(r) ≤ K·exp(−kappa·r)` for all `r ≥ r_min`,
/// or `None` if no such envelope is available yet at that rate.
pub(crate) struct Series<'a, F, E> {
    pub seq: &'a SmoothnessSequence,
    pub start: u32,
    pub term: F,
    pub envelope: E,
}

impl<F, E> Series<'_, F, E>
where
    F: Fn(f64) -> f64,
    E: Fn(f64) -> Option<(f64, f64)>,
{
    /// Sums in increasing `j`, checking the remainder after every `chunk` terms.
    pub fn sum(&self, chunk: u32) -> Result<f64> {
        let chunk = chunk.max(1);
        if self.seq.tail_is_constant() {
            return Err(Error::Diverges("terms from a constant tail repeat forever".into()));
        }
        let mut total = 0.0;
        let mut j = self.start.max(1);
        loop {
            for _ in 0..chunk {
                let Some(r) = self.seq.rate(j) else { return Ok(total) };
                let term = (self.term)(r);
                if !term.is_finite() {
                    return Err(Error::Diverges(format!("term at j = {j} is not finite")));
                }
                total += term;
                j += 1;
            }
            if j <= self.seq.prefix_len() {
                continue;
            }
            let r_next = self.seq.rate(j).expect("tail continues");
            if let Some((k, kappa)) = (self.envelope)(r_next) {
                let remainder = k * exp_tail_bound(self.seq.tail, j, kappa)?;
                if remainder < TAIL_TOL {
                    return Ok(total);
                }
            }
            if j > MAX_TERMS {
                return Err(Error::Diverges("remainder could not be certified".into()));
            }
        }
    }
}
