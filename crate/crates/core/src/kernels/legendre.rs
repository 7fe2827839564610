use crate::error::{KilabError, Result};

/// `P_0(t), …, P_L(t)` by the Bonnet recurrence
/// `(ℓ+1) P_{ℓ+1} = (2ℓ+1) t P_ℓ − ℓ P_{ℓ−1}`.
pub fn legendre_all(t: f64, l_max: i64) -> Result<Vec<f64>> {
    if l_max < 0 {
        return Err(KilabError::Argument(format!("degree must be >= 0, got {l_max}")));
    }
    if !(-1.0..=1.0).contains(&t) {
        return Err(KilabError::Argument(format!("legendre argument {t} outside [-1, 1]")));
    }
    let n = l_max as usize;
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    if n >= 1 {
        p.push(t);
    }
    for l in 1..n {
        let lf = l as f64;
        let next = ((2.0 * lf + 1.0) * t * p[l] - lf * p[l - 1]) / (lf + 1.0);
        p.push(next);
    }
    Ok(p)
}

/// Clenshaw evaluation of `Σ_{ℓ=0}^{L} w_ℓ P_ℓ(t)`.
pub(crate) fn clenshaw(weights: &[f64], t: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for k in (0..weights.len()).rev() {
        let kf = k as f64;
        let alpha = (2.0 * kf + 1.0) / (kf + 1.0) * t;
        let beta = -(kf + 1.0) / (kf + 2.0);
        let b0 = weights[k] + alpha * b1 + beta * b2;
        b2 = b1;
        b1 = b0;
    }
    b1
}

/// Recurrence coefficients `(2k+1)/(k+1)` and `−(k+1)/(k+2)` for `k = 0..n`.
pub(crate) fn clenshaw_tables(n: usize) -> (Vec<f64>, Vec<f64>) {
    (0..n)
        .map(|k| {
            let kf = k as f64;
            ((2.0 * kf + 1.0) / (kf + 1.0), -(kf + 1.0) / (kf + 2.0))
        })
        .unzip()
}
