//! Real dilogarithm on [0, 1].

use std::f64::consts::PI;

const PI2_6: f64 = PI * PI / 6.0;

/// `B_{2k} / (2k+1)!` for k = 1..=10.
const BERNOULLI_TERMS: [f64; 10] = [
    1.0 / 36.0,
    -1.0 / 3600.0,
    1.0 / 211_680.0,
    -1.0 / 10_886_400.0,
    1.0 / 526_901_760.0,
    -4.064_761_645_144_225_6e-11,
    8.921_691_020_456_452e-13,
    -1.993_929_586_072_107_4e-14,
    4.518_980_029_619_918e-16,
    -1.035_651_761_218_124_7e-17,
];

/// `Li₂(x)` for `x ∈ [0, 1/2]` via the Bernoulli series in `u = −ln(1−x)`.
#[inline]
pub(crate) fn li2_small(x: f64) -> f64 {
    li2_from_u(-(-x).ln_1p())
}

/// `Li₂(x)` given `u = −ln(1 − x)`.
#[inline]
fn li2_from_u(u: f64) -> f64 {
    let u2 = u * u;
    let mut acc = 0.0;
    for &c in BERNOULLI_TERMS.iter().rev() {
        acc = acc * u2 + c;
    }
    u - 0.25 * u2 + u * u2 * acc
}

/// `Li₂(x) = Σ x^k / k²` for `x ∈ [0, 1]`.
pub fn li2(x: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&x));
    if x <= 0.5 {
        li2_small(x)
    } else if x >= 1.0 {
        PI2_6
    } else {
        PI2_6 - x.ln() * (-x).ln_1p() - li2_small(1.0 - x)
    }
}

/// `Σ_{ℓ≥1} (2ℓ+1) P_ℓ(t) / (ℓ(ℓ+1))²` written in `w = (1−t)/2 ∈ [0, 1]`:
/// `Li₂(1−w) − π²/6 + 1`.
#[inline]
pub(crate) fn iterated_green(w: f64) -> f64 {
    if w <= 0.0 {
        1.0
    } else if w < 0.5 {
        // reflection keeps the w ln w singularity explicit
        let u = -(-w).ln_1p();
        1.0 + u * w.ln() - li2_from_u(u)
    } else {
        li2_small(1.0 - w) - PI2_6 + 1.0
    }
}
