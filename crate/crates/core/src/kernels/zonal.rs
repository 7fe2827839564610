//! Zonal Sobolev kernels on S² as Legendre series
//! `κ(t) = Σ_ℓ (2ℓ+1)/(4π) · c_ℓ · P_ℓ(t)`, `c_ℓ = 1/μ(ℓ)`, `λ_ℓ = ℓ(ℓ+1)`.
//!
//! For m = 2 the coefficients decay like `λ_ℓ⁻²`, so the plain series needs
//! tens of thousands of terms for 1e-10 accuracy. The evaluator instead
//! splits `c_ℓ = a/λ_ℓ² + r_ℓ`: the `a/λ²` part is summed in closed form
//! (see [`super::dilog::iterated_green`]) and only the rapidly decaying
//! residual `r_ℓ` is summed term by term.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::dilog::iterated_green;
use super::legendre::{clenshaw, clenshaw_tables};
use crate::error::{KilabError, Result};

const FOUR_PI: f64 = 4.0 * PI;

/// Degree beyond which tail bounds are closed off analytically.
const TAIL_CAP: usize = 1 << 16;

/// Hard ceiling for automatic truncation.
pub const MAX_TRUNCATION: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MultiplierRule {
    /// `μ(ℓ) = (1 + λ_ℓ)^m`, the `(1−Δ)^m` norm.
    SobolevPower,
    /// `μ(ℓ) = λ_ℓ² + 1`, the norm `‖∇²u‖² + ‖∇u‖² + ‖u‖²`.
    BiharmonicPlusIdentity,
}

impl MultiplierRule {
    pub fn multiplier(self, m: u32, l: usize) -> f64 {
        let lambda = (l * (l + 1)) as f64;
        match self {
            MultiplierRule::SobolevPower => (1.0 + lambda).powi(m as i32),
            MultiplierRule::BiharmonicPlusIdentity => lambda * lambda + 1.0,
        }
    }

    /// `lim λ² c_ℓ`, the weight of the closed-form part.
    fn closed_form_weight(self, m: u32) -> f64 {
        match (self, m) {
            (MultiplierRule::BiharmonicPlusIdentity, _) => 1.0,
            (MultiplierRule::SobolevPower, 2) => 1.0,
            _ => 0.0,
        }
    }

    /// `c_ℓ − a/λ_ℓ²`, written to avoid cancellation where possible.
    fn residual(self, m: u32, l: usize) -> f64 {
        let lambda = (l * (l + 1)) as f64;
        match (self, m) {
            (MultiplierRule::BiharmonicPlusIdentity, _) => {
                let l2 = lambda * lambda;
                -1.0 / (l2 * (l2 + 1.0))
            }
            (MultiplierRule::SobolevPower, 2) => {
                let s = 1.0 + lambda;
                -(2.0 * lambda + 1.0) / (lambda * lambda * s * s)
            }
            _ => 1.0 / self.multiplier(m, l),
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            MultiplierRule::SobolevPower => "power",
            MultiplierRule::BiharmonicPlusIdentity => "biharm",
        }
    }
}

/// How many residual terms to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Truncation {
    /// Smallest L whose tail bound is below `epsilon_tail`.
    Auto,
    Fixed(usize),
}

#[derive(Clone, Debug)]
pub struct ZonalSeries {
    coeffs: Vec<f64>,
    closed_form_weight: f64,
    /// `(2ℓ+1)/(4π) · r_ℓ` for ℓ = 0..=L (ℓ = 0 carries `c_0`).
    residual_weights: Vec<f64>,
    /// `(2ℓ+1)/(4π) · c_ℓ`, used by the plain truncated sum.
    plain_weights: Vec<f64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    tail_bound: f64,
}

impl ZonalSeries {
    /// Plain series with the given `c_ℓ` and no closed-form part.
    pub fn from_coefficients(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(KilabError::Spec("empty coefficient list".into()));
        }
        if let Some((l, c)) = coeffs.iter().enumerate().find(|(_, c)| !(**c > 0.0)) {
            return Err(KilabError::Spec(format!("c_{l} = {c} is not positive")));
        }
        let weights: Vec<f64> = coeffs
            .iter()
            .enumerate()
            .map(|(l, c)| (2 * l + 1) as f64 / FOUR_PI * c)
            .collect();
        let (alpha, beta) = clenshaw_tables(weights.len());
        Ok(ZonalSeries {
            coeffs,
            closed_form_weight: 0.0,
            residual_weights: weights.clone(),
            plain_weights: weights,
            alpha,
            beta,
            tail_bound: 0.0,
        })
    }

    pub(crate) fn for_rule(rule: MultiplierRule, m: u32, truncation: Truncation, epsilon_tail: f64) -> Result<Self> {
        if rule == MultiplierRule::BiharmonicPlusIdentity && m != 2 {
            return Err(KilabError::Spec(format!(
                "rule biharm is the order-2 norm; got m={m}"
            )));
        }
        let a = rule.closed_form_weight(m);
        let term = |l: usize| (2 * l + 1) as f64 / FOUR_PI * rule.residual(m, l).abs();
        // suffix sums of the residual magnitudes, closed beyond TAIL_CAP by a
        // t_ℓ ≤ t_cap (cap/ℓ)³ comparison (residuals decay at least that fast)
        let closing = term(TAIL_CAP) * TAIL_CAP as f64 / 2.0;
        let tail_after = |l_max: usize| -> f64 {
            (l_max + 1..=TAIL_CAP).rev().map(term).sum::<f64>() + closing
        };
        let l_max = match truncation {
            Truncation::Fixed(l) => l,
            Truncation::Auto => {
                let mut suffix = closing;
                let mut found = None;
                for l in (0..TAIL_CAP).rev() {
                    // suffix = tail after l
                    suffix += term(l + 1);
                    if suffix >= epsilon_tail {
                        found = Some(l + 1);
                        break;
                    }
                }
                let l = found.unwrap_or(0);
                if l > MAX_TRUNCATION {
                    return Err(KilabError::Spec(format!(
                        "automatic truncation needs L={l} > {MAX_TRUNCATION} for epsilon_tail={epsilon_tail:e}"
                    )));
                }
                l
            }
        };
        let coeffs: Vec<f64> = (0..=l_max).map(|l| 1.0 / rule.multiplier(m, l)).collect();
        if let Some((l, c)) = coeffs.iter().enumerate().find(|(_, c)| !(**c > 0.0 && c.is_finite())) {
            return Err(KilabError::Spec(format!("μ({l}) gives non-positive coefficient {c}")));
        }
        let residual_weights = (0..=l_max)
            .map(|l| {
                if l == 0 {
                    coeffs[0] / FOUR_PI
                } else {
                    (2 * l + 1) as f64 / FOUR_PI * rule.residual(m, l)
                }
            })
            .collect();
        let plain_weights = coeffs
            .iter()
            .enumerate()
            .map(|(l, c)| (2 * l + 1) as f64 / FOUR_PI * c)
            .collect();
        let (alpha, beta) = clenshaw_tables(l_max + 1);
        Ok(ZonalSeries {
            coeffs,
            closed_form_weight: a,
            residual_weights,
            plain_weights,
            alpha,
            beta,
            tail_bound: tail_after(l_max),
        })
    }

    /// `c_0, …, c_L`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn lambda(l: usize) -> f64 {
        (l * (l + 1)) as f64
    }

    /// Weight `a` of the exactly summed `a/λ²` component.
    pub fn closed_form_weight(&self) -> f64 {
        self.closed_form_weight
    }

    /// Uniform bound on the neglected residual terms.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Kernel value at `t = 1 − 2w`.
    #[inline]
    pub fn eval_w(&self, w: f64) -> f64 {
        let t = 1.0 - 2.0 * w;
        let mut s = self.residual_sum(t);
        if self.closed_form_weight != 0.0 {
            s += self.closed_form_weight / FOUR_PI * iterated_green(w);
        }
        s
    }

    /// In-place batch form of [`eval_w`](Self::eval_w): each `w` is replaced
    /// by the kernel value. Bitwise identical to the scalar path.
    pub fn eval_w_in_place(&self, ws: &mut [f64]) {
        const LANES: usize = 8;
        let mut chunks = ws.chunks_exact_mut(LANES);
        for chunk in &mut chunks {
            let mut t = [0.0; LANES];
            for (ti, w) in t.iter_mut().zip(chunk.iter()) {
                *ti = 1.0 - 2.0 * w;
            }
            let mut b1 = [0.0; LANES];
            let mut b2 = [0.0; LANES];
            for k in (0..self.residual_weights.len()).rev() {
                let (r, a, b) = (self.residual_weights[k], self.alpha[k], self.beta[k]);
                for i in 0..LANES {
                    let b0 = r + a * t[i] * b1[i] + b * b2[i];
                    b2[i] = b1[i];
                    b1[i] = b0;
                }
            }
            for (w, s) in chunk.iter_mut().zip(b1) {
                *w = if self.closed_form_weight != 0.0 {
                    s + self.closed_form_weight / FOUR_PI * iterated_green(*w)
                } else {
                    s
                };
            }
        }
        for w in chunks.into_remainder() {
            *w = self.eval_w(*w);
        }
    }

    /// Kernel value at `t ∈ [−1, 1]`.
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(-1.0, 1.0);
        self.eval_w(0.5 * (1.0 - t))
    }

    /// `Σ_{ℓ=0}^{L} (2ℓ+1)/(4π) c_ℓ P_ℓ(t)` with no closed-form part.
    pub fn eval_truncated(&self, t: f64) -> f64 {
        clenshaw(&self.plain_weights, t.clamp(-1.0, 1.0))
    }

    #[inline]
    fn residual_sum(&self, t: f64) -> f64 {
        let (mut b1, mut b2) = (0.0, 0.0);
        for k in (0..self.residual_weights.len()).rev() {
            let b0 = self.residual_weights[k] + self.alpha[k] * t * b1 + self.beta[k] * b2;
            b2 = b1;
            b1 = b0;
        }
        b1
    }
}

/// `c_ℓ = 1/μ(ℓ)` for the given rule.
pub fn zonal_coefficients(spec: &super::KernelSpec) -> Result<ZonalSeries> {
    if spec.family != super::KernelFamily::ZonalSobolevS2 {
        return Err(KilabError::Spec("zonal_coefficients needs the s2-sobolev family".into()));
    }
    ZonalSeries::for_rule(spec.rule, spec.m, spec.truncation, spec.epsilon_tail)
}

/// Free-function form of [`ZonalSeries::eval`].
pub fn zonal_eval(series: &ZonalSeries, t: f64) -> f64 {
    series.eval(t)
}
