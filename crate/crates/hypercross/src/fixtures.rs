//! Named reference specifications used throughout the tests and examples.

use crate::weights::{CrossSpec, SmoothnessSequence, Tail, ValidatedSpec};

/// Korobov, `t = 0`, `r = 1`, `m = 1`, `alpha = 2`, `beta = 1`, `r_j = j`.
pub fn spec_k1() -> ValidatedSpec {
    CrossSpec::korobov(1, 2.0, 1.0, 0, 1.0, SmoothnessSequence::affine(0.0, 1.0))
        .validate()
        .expect("valid")
}

/// Korobov, `t = 0`, `r = 2`, `m = 1`, `alpha = 2`, `beta = 1`, `r_j = 2j` (the `r > a/m` regime).
pub fn spec_k2() -> ValidatedSpec {
    CrossSpec::korobov(1, 2.0, 1.0, 0, 2.0, SmoothnessSequence::affine(0.0, 2.0))
        .validate()
        .expect("valid")
}

/// Analytic, `p = q = 0`, `m = 1`, `alpha = 2`, `beta = 1`, `r_j = j`.
pub fn spec_a1() -> ValidatedSpec {
    CrossSpec::analytic(1, 2.0, 1.0, 0.0, 0.0, SmoothnessSequence::affine(0.0, 1.0))
        .validate()
        .expect("valid")
}

/// Analytic, `p = 2`, `q = 0.5`, `m = 1`, `alpha = 2`, `beta = 1`, `r_j = 1.5j`.
pub fn spec_a2() -> ValidatedSpec {
    CrossSpec::analytic(1, 2.0, 1.0, 2.0, 0.5, SmoothnessSequence::affine(0.0, 1.5))
        .validate()
        .expect("valid")
}

/// Unsigned specs spanning both variants, `m ∈ {0, 1, 2, 3}`, all Korobov regimes,
/// affine, power and finite sequences, and coordinates whose factor dips below 1.
pub fn oracle_family() -> Vec<(&'static str, ValidatedSpec)> {
    let affine_after = |prefix: Vec<f64>, c1: f64| SmoothnessSequence::new(prefix, Tail::Affine { c0: 0.0, c1 });
    let specs = [
        ("K1", spec_k1().spec().clone()),
        ("K2", spec_k2().spec().clone()),
        ("K-m2-t1", CrossSpec::korobov(2, 3.0, 1.0, 1, 1.0, affine_after(vec![1.0, 1.0], 1.0))),
        ("K-m2-below", CrossSpec::korobov(2, 2.5, 0.5, 0, 0.8, SmoothnessSequence::affine(0.0, 0.8))),
        ("K-m3-power", CrossSpec::korobov(3, 4.0, 1.0, 0, 1.5, SmoothnessSequence::power(1.5, 1.2))),
        ("A1", spec_a1().spec().clone()),
        ("A2", spec_a2().spec().clone()),
        ("A-m2", CrossSpec::analytic(2, 3.0, 1.0, 0.0, 0.0, SmoothnessSequence::affine(0.5, 0.75))),
        ("A-m3-pq", CrossSpec::analytic(3, 4.0, 1.0, 1.0, 1.0, SmoothnessSequence::power(2.0, 1.0))),
        ("A-m2-dips", CrossSpec::analytic(2, 3.0, 1.0, 1.0, 1.0, SmoothnessSequence::finite(vec![0.4, 0.9, 3.0]))),
        ("A-m0", CrossSpec::analytic(0, 2.0, 1.0, 0.0, 0.0, SmoothnessSequence::affine(0.0, 1.0))),
        ("A-m0-power", CrossSpec::analytic(0, 2.0, 1.0, 0.0, 0.0, SmoothnessSequence::power(1.0, 1.5))),
    ];
    specs
        .into_iter()
        .map(|(name, spec)| (name, spec.validate().expect("valid")))
        .collect()
}

/// The same spec with the given sign conventions.
pub fn signed(spec: &ValidatedSpec, x_signed: bool, y_signed: bool) -> ValidatedSpec {
    spec.spec().clone().with_signs(x_signed, y_signed).validate().expect("valid")
}
