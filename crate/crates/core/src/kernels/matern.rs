//! Modified Bessel functions `K_ν` for integer and half-integer order and the
//! unit-diagonal Matérn (Sobolev spline) kernel `r^ν K_ν(r) / (2^{ν−1} Γ(ν))`.

use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this the integer-order power series is used, above it Steed's
/// continued fraction.
const SERIES_SWITCH: f64 = 2.0;
const SERIES_MAX_TERMS: usize = 60;
const CF_MAX_TERMS: usize = 5_000;

/// Under this radius `r^ν K_ν(r)` equals its limit to double precision.
const TINY_R: f64 = 1e-100;

/// `K_0(x)` and `K_1(x)`, `x > 0`.
fn k0_k1(x: f64) -> (f64, f64) {
    if x <= SERIES_SWITCH {
        // A&S 9.6.13 / 9.6.11 with ψ(k+1) = −γ + H_k
        let y = 0.25 * x * x;
        let ln_half = (0.5 * x).ln();
        let (mut i0, mut i1) = (0.0, 0.0);
        let (mut s0, mut s1) = (0.0, 0.0);
        // term_k = y^k / (k!)², harmonic H_k
        let mut term = 1.0;
        let mut harmonic = 0.0;
        for k in 0..SERIES_MAX_TERMS {
            let kf = k as f64;
            if k > 0 {
                term *= y / (kf * kf);
                harmonic += 1.0 / kf;
            }
            let psi1 = -EULER_GAMMA + harmonic;
            let psi2 = psi1 + 1.0 / (kf + 1.0);
            let t1 = term / (kf + 1.0);
            i0 += term;
            i1 += t1;
            s0 += psi1 * term;
            s1 += (psi1 + psi2) * t1;
            if term < 1e-18 * i0 {
                break;
            }
        }
        let i1 = 0.5 * x * i1;
        let k0 = -ln_half * i0 + s0;
        let k1 = 1.0 / x + ln_half * i1 - 0.25 * x * s1;
        (k0, k1)
    } else {
        steed_cf2(0.0, x)
    }
}

/// Steed's continued fraction for `(K_μ(x), K_{μ+1}(x))`, `x ≥ 2`, `|μ| ≤ 1/2`.
fn steed_cf2(mu: f64, x: f64) -> (f64, f64) {
    let xi = 1.0 / x;
    let mu2 = mu * mu;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu2;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..CF_MAX_TERMS {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let kmu = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let kmu1 = kmu * (mu + x + 0.5 - h) * xi;
    (kmu, kmu1)
}

/// `K_ν(x)` for `ν = two_nu / 2`, `x > 0`.
pub fn bessel_k(two_nu: u32, x: f64) -> f64 {
    assert!(x > 0.0, "bessel_k needs x > 0");
    let half = two_nu % 2 == 1;
    let steps = (two_nu / 2) as usize;
    let (mut km, mut kp, mut order) = if half {
        let k = (PI / (2.0 * x)).sqrt() * (-x).exp();
        (k, k * (1.0 + 1.0 / x), 0.5)
    } else {
        let (k0, k1) = k0_k1(x);
        (k0, k1, 0.0)
    };
    // upward recurrence K_{ν+1} = K_{ν−1} + (2ν/x) K_ν
    for _ in 0..steps {
        let next = km + 2.0 * (order + 1.0) / x * kp;
        km = kp;
        kp = next;
        order += 1.0;
    }
    km
}

/// `Γ(ν)` for `ν = two_nu / 2 > 0`.
pub(crate) fn gamma_half_integer(two_nu: u32) -> f64 {
    assert!(two_nu > 0);
    if two_nu % 2 == 0 {
        (1..two_nu / 2).map(|k| k as f64).product()
    } else {
        // Γ(1/2) = √π, Γ(x+1) = x Γ(x)
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while 2.0 * x < two_nu as f64 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// `r^ν K_ν(r) / (2^{ν−1} Γ(ν))`: equal to 1 at `r = 0`, positive and strictly
/// decreasing.
pub(crate) fn matern_unit(two_nu: u32, r: f64) -> f64 {
    if r < TINY_R {
        return 1.0;
    }
    let nu = two_nu as f64 / 2.0;
    let limit = 2f64.powf(nu - 1.0) * gamma_half_integer(two_nu);
    r.powf(nu) * bessel_k(two_nu, r) / limit
}
