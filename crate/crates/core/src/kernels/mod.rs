//! Kernel families: zonal Sobolev kernels on S², Matérn (Sobolev) splines
//! and polyharmonic surface splines on ℝᵈ.
//!
//! A [`KernelSpec`] is the user-facing description (parsed from strings such
//! as `s2-sobolev:m=2,rule=biharm,L=auto`); a [`Kernel`] is the evaluator
//! built from it.

mod dilog;
pub mod legendre;
pub mod matern;
pub mod surface;
pub mod zonal;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{KilabError, Result};
use crate::geometry::{dist2, ManifoldDescriptor, ManifoldKind, Point};

pub use dilog::li2;
pub use legendre::legendre_all;
pub use matern::bessel_k;
pub use surface::{poly_space_dim, surface_spline_raw, surface_spline_sign};
pub use zonal::{zonal_coefficients, zonal_eval, MultiplierRule, Truncation, ZonalSeries};

pub const DEFAULT_EPSILON_TAIL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelFamily {
    ZonalSobolevS2,
    Matern,
    SurfaceSpline,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    /// Smoothness order.
    pub m: u32,
    /// Intrinsic dimension.
    pub d: u32,
    /// Multiplier rule (zonal family only).
    pub rule: MultiplierRule,
    /// Residual truncation (zonal family only).
    pub truncation: Truncation,
    /// Positive scale; the kernel diagonal for Matérn.
    pub normalization: f64,
    pub epsilon_tail: f64,
}

impl KernelSpec {
    pub fn zonal(m: u32, rule: MultiplierRule) -> Result<Self> {
        KernelSpec {
            family: KernelFamily::ZonalSobolevS2,
            m,
            d: 2,
            rule,
            truncation: Truncation::Auto,
            normalization: 1.0,
            epsilon_tail: DEFAULT_EPSILON_TAIL,
        }
        .validated()
    }

    pub fn matern(m: u32, d: u32) -> Result<Self> {
        KernelSpec {
            family: KernelFamily::Matern,
            ..Self::zonal(2, MultiplierRule::SobolevPower)?
        }
        .with_dims(m, d)
    }

    pub fn surface_spline(m: u32, d: u32) -> Result<Self> {
        KernelSpec {
            family: KernelFamily::SurfaceSpline,
            ..Self::zonal(2, MultiplierRule::SobolevPower)?
        }
        .with_dims(m, d)
    }

    fn with_dims(mut self, m: u32, d: u32) -> Result<Self> {
        self.m = m;
        self.d = d;
        self.validated()
    }

    /// Checks `2m > d` and the family-specific constraints.
    pub fn validated(self) -> Result<Self> {
        if self.m == 0 || self.d == 0 {
            return Err(KilabError::Spec("m and d must be positive".into()));
        }
        if 2 * self.m <= self.d {
            return Err(KilabError::Spec(format!(
                "need m > d/2 for continuity, got m={} d={}",
                self.m, self.d
            )));
        }
        if !(self.normalization > 0.0 && self.normalization.is_finite()) {
            return Err(KilabError::Spec("normalization must be positive".into()));
        }
        if !(self.epsilon_tail > 0.0) {
            return Err(KilabError::Spec("epsilon_tail must be positive".into()));
        }
        if self.family == KernelFamily::ZonalSobolevS2 {
            if self.d != 2 {
                return Err(KilabError::Spec("s2-sobolev kernels live on S², d must be 2".into()));
            }
            if self.rule == MultiplierRule::BiharmonicPlusIdentity && self.m != 2 {
                return Err(KilabError::Spec("rule biharm is only defined for m=2".into()));
            }
        }
        Ok(self)
    }

    /// `m − d/2` for the Matérn family.
    pub fn matern_nu(&self) -> f64 {
        self.m as f64 - self.d as f64 / 2.0
    }

    /// Polynomial degree `m − 1` of the surface-spline tail.
    pub fn poly_degree(&self) -> Option<u32> {
        (self.family == KernelFamily::SurfaceSpline).then(|| self.m - 1)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.family != KernelFamily::SurfaceSpline
    }

    pub fn compatible_with(&self, man: &ManifoldDescriptor) -> Result<()> {
        let ok = match self.family {
            KernelFamily::ZonalSobolevS2 => man.kind() == ManifoldKind::UnitSphere2,
            KernelFamily::Matern | KernelFamily::SurfaceSpline => {
                man.kind() == ManifoldKind::FlatBox && man.dimension() == self.d as usize
            }
        };
        if ok {
            Ok(())
        } else {
            Err(KilabError::Config(format!(
                "kernel {self} is not defined on {:?} of dimension {}",
                man.kind(),
                man.dimension()
            )))
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            KernelFamily::ZonalSobolevS2 => {
                write!(f, "s2-sobolev:m={},rule={},L=", self.m, self.rule.short_name())?;
                match self.truncation {
                    Truncation::Auto => write!(f, "auto")?,
                    Truncation::Fixed(l) => write!(f, "{l}")?,
                }
                if self.epsilon_tail != DEFAULT_EPSILON_TAIL {
                    write!(f, ",eps={:e}", self.epsilon_tail)?;
                }
            }
            KernelFamily::Matern => write!(f, "matern:m={},d={}", self.m, self.d)?,
            KernelFamily::SurfaceSpline => write!(f, "tps:m={},d={}", self.m, self.d)?,
        }
        if self.normalization != 1.0 {
            write!(f, ",scale={}", self.normalization)?;
        }
        Ok(())
    }
}

impl FromStr for KernelSpec {
    type Err = KilabError;

    /// `s2-sobolev:m=2,rule=power|biharm,L=auto`, `matern:m=2,d=2`, `tps:m=2,d=2`.
    /// Optional keys: `scale=<positive>`, `eps=<tail tolerance>` (zonal).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, params) = s.split_once(':').unwrap_or((s, ""));
        let family = match name {
            "s2-sobolev" => KernelFamily::ZonalSobolevS2,
            "matern" => KernelFamily::Matern,
            "tps" | "surface-spline" => KernelFamily::SurfaceSpline,
            other => return Err(KilabError::Spec(format!("unknown kernel family '{other}'"))),
        };
        let mut spec = KernelSpec {
            family,
            m: 2,
            d: 2,
            rule: MultiplierRule::BiharmonicPlusIdentity,
            truncation: Truncation::Auto,
            normalization: 1.0,
            epsilon_tail: DEFAULT_EPSILON_TAIL,
        };
        let bad = |k: &str, v: &str| KilabError::Spec(format!("bad value '{v}' for kernel key '{k}'"));
        for kv in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| KilabError::Spec(format!("expected key=value, got '{kv}'")))?;
            let (k, v) = (k.trim(), v.trim());
            match (k, family) {
                ("m", _) => spec.m = v.parse().map_err(|_| bad(k, v))?,
                ("d", _) => spec.d = v.parse().map_err(|_| bad(k, v))?,
                ("scale", _) => spec.normalization = v.parse().map_err(|_| bad(k, v))?,
                ("rule", KernelFamily::ZonalSobolevS2) => {
                    spec.rule = match v {
                        "a" | "power" | "sobolev-power" => MultiplierRule::SobolevPower,
                        "b" | "biharm" | "biharmonic-plus-identity" => MultiplierRule::BiharmonicPlusIdentity,
                        _ => return Err(bad(k, v)),
                    }
                }
                ("L", KernelFamily::ZonalSobolevS2) => {
                    spec.truncation = if v == "auto" {
                        Truncation::Auto
                    } else {
                        Truncation::Fixed(v.parse().map_err(|_| bad(k, v))?)
                    }
                }
                ("eps", KernelFamily::ZonalSobolevS2) => spec.epsilon_tail = v.parse().map_err(|_| bad(k, v))?,
                _ => return Err(KilabError::Spec(format!("unknown key '{k}' for {name}"))),
            }
        }
        spec.validated()
    }
}

#[derive(Clone, Debug)]
enum Evaluator {
    Zonal(ZonalSeries),
    Matern { two_nu: u32 },
    Surface { sign: f64 },
}

/// A kernel ready for evaluation.
#[derive(Clone, Debug)]
pub struct Kernel {
    spec: KernelSpec,
    eval: Evaluator,
}

impl Kernel {
    pub fn new(spec: KernelSpec) -> Result<Self> {
        let spec = spec.validated()?;
        let eval = match spec.family {
            KernelFamily::ZonalSobolevS2 => Evaluator::Zonal(zonal_coefficients(&spec)?),
            KernelFamily::Matern => Evaluator::Matern {
                two_nu: 2 * spec.m - spec.d,
            },
            KernelFamily::SurfaceSpline => Evaluator::Surface {
                sign: surface_spline_sign(spec.m, spec.d),
            },
        };
        Ok(Kernel { spec, eval })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn zonal_series(&self) -> Option<&ZonalSeries> {
        match &self.eval {
            Evaluator::Zonal(z) => Some(z),
            _ => None,
        }
    }

    /// `out[j] = κ(x, y_j)` for nodes stored row-wise in `flat`
    /// (`out.len()` rows of `x.len()` coordinates). Matches
    /// [`eval_coords`](Self::eval_coords) bitwise.
    pub fn eval_row(&self, x: &[f64], flat: &[f64], out: &mut [f64]) {
        let dim = x.len();
        debug_assert_eq!(flat.len(), dim * out.len());
        for (o, y) in out.iter_mut().zip(flat.chunks_exact(dim)) {
            *o = dist2(x, y);
        }
        let scale = self.spec.normalization;
        match &self.eval {
            Evaluator::Zonal(z) => {
                for o in out.iter_mut() {
                    *o = (0.25 * *o).min(1.0);
                }
                z.eval_w_in_place(out);
                for o in out.iter_mut() {
                    *o *= scale;
                }
            }
            Evaluator::Matern { two_nu } => {
                for o in out.iter_mut() {
                    *o = scale * matern::matern_unit(*two_nu, o.sqrt());
                }
            }
            Evaluator::Surface { sign } => {
                for o in out.iter_mut() {
                    *o = sign * scale * surface_spline_raw(self.spec.m, self.spec.d, o.sqrt());
                }
            }
        }
    }

    /// Kernel value for raw coordinates; no validation.
    #[inline]
    pub fn eval_coords(&self, x: &[f64], y: &[f64]) -> f64 {
        let r2 = dist2(x, y);
        match &self.eval {
            // for unit vectors (1 − x·y)/2 = |x − y|²/4
            Evaluator::Zonal(z) => self.spec.normalization * z.eval_w((0.25 * r2).min(1.0)),
            Evaluator::Matern { two_nu } => self.spec.normalization * matern::matern_unit(*two_nu, r2.sqrt()),
            Evaluator::Surface { sign } => {
                sign * self.spec.normalization * surface_spline_raw(self.spec.m, self.spec.d, r2.sqrt())
            }
        }
    }

    #[inline]
    pub fn eval_points(&self, x: &Point, y: &Point) -> f64 {
        self.eval_coords(x.coords(), y.coords())
    }

    /// `κ(x, x)`.
    pub fn diagonal(&self) -> f64 {
        match &self.eval {
            Evaluator::Zonal(z) => self.spec.normalization * z.eval_w(0.0),
            Evaluator::Matern { .. } => self.spec.normalization,
            Evaluator::Surface { .. } => 0.0,
        }
    }
}

/// Checked kernel evaluation.
pub fn kernel_eval(kernel: &Kernel, x: &Point, y: &Point, man: &ManifoldDescriptor) -> Result<f64> {
    kernel.spec().compatible_with(man)?;
    let dim = man.ambient_dimension();
    for p in [x, y] {
        if p.dim() != dim {
            return Err(KilabError::Dimension {
                expected: dim,
                got: p.dim(),
            });
        }
    }
    Ok(kernel.eval_points(x, y))
}

/// `normalization · r^ν K_ν(r) / (2^{ν−1}Γ(ν))`, so the value at 0 is the normalization.
pub fn matern_eval(spec: &KernelSpec, r: f64) -> Result<f64> {
    if spec.family != KernelFamily::Matern {
        return Err(KilabError::Spec("matern_eval needs the matern family".into()));
    }
    if 2 * spec.m <= spec.d {
        return Err(KilabError::Spec("matern needs nu = m - d/2 > 0".into()));
    }
    if !(r >= 0.0) {
        return Err(KilabError::Argument(format!("radius {r} must be >= 0")));
    }
    Ok(spec.normalization * matern::matern_unit(2 * spec.m - spec.d, r))
}

/// Unsigned surface spline `r^{2m−d} ln r` (d even) or `r^{2m−d}` (d odd).
pub fn surface_spline_eval(spec: &KernelSpec, r: f64) -> Result<f64> {
    if spec.family != KernelFamily::SurfaceSpline {
        return Err(KilabError::Spec("surface_spline_eval needs the tps family".into()));
    }
    Ok(spec.normalization * surface_spline_raw(spec.m, spec.d, r))
}
