//! Polyharmonic (surface) splines `r^{2m−d} ln r` (d even) and `r^{2m−d}` (d odd).

/// Unsigned basis function.
pub fn surface_spline_raw(m: u32, d: u32, r: f64) -> f64 {
    let beta = (2 * m - d) as i32;
    if d % 2 == 0 {
        if r <= 0.0 {
            0.0
        } else {
            r.powi(beta) * r.ln()
        }
    } else {
        r.powi(beta)
    }
}

/// Sign making the kernel conditionally positive definite of order m:
/// `(−1)^{β/2+1}` for `r^β ln r`, `(−1)^{⌈β/2⌉}` for odd `r^β`.
pub fn surface_spline_sign(m: u32, d: u32) -> f64 {
    let beta = 2 * m - d;
    let exponent = if d % 2 == 0 { beta / 2 + 1 } else { beta.div_ceil(2) };
    if exponent % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Dimension of the polynomials of total degree ≤ `deg` in `d` variables.
pub fn poly_space_dim(d: u32, deg: u32) -> usize {
    // C(d + deg, d)
    let (d, deg) = (d as u64, deg as u64);
    let mut num = 1u64;
    for k in 1..=d {
        num = num * (deg + k) / k;
    }
    num as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn examples() {
        assert_eq!(surface_spline_raw(2, 2, 1.0), 0.0);
        assert!((surface_spline_raw(2, 2, E) - E * E).abs() < 1e-14);
        assert_eq!(surface_spline_raw(2, 3, 2.0), 2.0);
        assert_eq!(surface_spline_raw(2, 2, 0.0), 0.0);
    }

    #[test]
    fn signs() {
        assert_eq!(surface_spline_sign(2, 2), 1.0);
        assert_eq!(surface_spline_sign(2, 3), -1.0);
        assert_eq!(surface_spline_sign(1, 1), -1.0);
        assert_eq!(surface_spline_sign(2, 1), 1.0);
        assert_eq!(surface_spline_sign(3, 2), -1.0);
    }

    #[test]
    fn poly_dims() {
        assert_eq!(poly_space_dim(2, 1), 3);
        assert_eq!(poly_space_dim(3, 1), 4);
        assert_eq!(poly_space_dim(2, 2), 6);
        assert_eq!(poly_space_dim(1, 0), 1);
    }
}
