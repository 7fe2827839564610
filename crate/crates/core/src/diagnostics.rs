//! Lebesgue functions, Lagrange decay profiles and convergence studies.

use std::sync::Arc;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};
use serde::Serialize;

use crate::error::{KilabError, Result};
use crate::exec::{clear_upper_simd, Exec};
use crate::geometry::{self, ManifoldDescriptor, ManifoldKind, MeshStats, Point};
use crate::interpolation::{self, AssembleOptions, CollocationSystem, LagrangeFunction};
use crate::kernels::{Kernel, KernelSpec};
use crate::pointsets::{self, PointSet};

/// Grid points per evaluation block in [`lebesgue_report`].
pub const LEBESGUE_BLOCK: usize = 256;

/// Default grid density relative to the node count.
pub const DEFAULT_GRID_FACTOR: usize = 40;

/// Sphere decay profiles stop this far short of the antipode (in radians).
pub const ANTIPODE_MARGIN: f64 = 0.1;

/// Bins within this factor of the far-field floor end the default fit range.
pub const FLOOR_FACTOR: f64 = 10.0;

/// The floor cut applies only once the profile has dropped this far below
/// its value at the start of the fit range.
pub const FLOOR_MIN_DEPTH: f64 = 1e-3;

#[derive(Clone, Debug, Serialize)]
pub struct LebesgueReport {
    pub grid_size: usize,
    /// `Λ(x_g) = Σ_ξ |χ_ξ(x_g)|` in grid order.
    pub lambda_samples: Vec<f64>,
    #[serde(rename = "L_est")]
    pub l_est: f64,
    /// Grid index where `L_est` is attained (first occurrence).
    pub argmax: usize,
    pub n_nodes: usize,
    pub mesh: MeshStats,
    pub kernel: String,
}

pub fn lebesgue_report(sys: &CollocationSystem, grid: &[Point]) -> Result<LebesgueReport> {
    lebesgue_report_with(sys, grid, Exec::default())
}

/// Evaluates every Lagrange function on the grid with one explicit inverse of
/// the collocation matrix and a blocked (grid × n) by (n × n) product.
pub fn lebesgue_report_with(sys: &CollocationSystem, grid: &[Point], exec: Exec) -> Result<LebesgueReport> {
    if grid.is_empty() {
        return Err(KilabError::Argument("empty evaluation grid".into()));
    }
    let man = sys.manifold();
    check_grid(man, grid)?;
    let coeffs = sys.lagrange_coefficients()?;
    let n = sys.n();
    let blocks = grid.len().div_ceil(LEBESGUE_BLOCK);
    let per_block: Vec<Vec<f64>> = exec.map(blocks, |b| {
        let pts = &grid[b * LEBESGUE_BLOCK..((b + 1) * LEBESGUE_BLOCK).min(grid.len())];
        let e = sys.eval_columns(pts, Exec::Sequential);
        // chiᵀ (n × B) = coeffsᵀ · e
        let mut chi = Mat::<f64>::zeros(n, pts.len());
        matmul(chi.as_mut(), Accum::Replace, coeffs.transpose(), e.as_ref(), 1.0, Par::Seq);
        clear_upper_simd();
        (0..pts.len())
            .map(|g| chi.col_as_slice(g).iter().map(|v| v.abs()).sum())
            .collect()
    });
    let lambda_samples = per_block.concat();
    let (argmax, l_est) = lambda_samples
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    let mesh = geometry::mesh_stats_with(sys.points(), grid, exec)?;
    Ok(LebesgueReport {
        grid_size: grid.len(),
        lambda_samples,
        l_est,
        argmax,
        n_nodes: n,
        mesh,
        kernel: sys.kernel().spec().to_string(),
    })
}

fn check_grid(man: &ManifoldDescriptor, grid: &[Point]) -> Result<()> {
    match grid.iter().find(|p| !man.contains(p)) {
        Some(p) => Err(KilabError::Argument(format!(
            "grid point {:?} is not on the manifold",
            p.coords()
        ))),
        None => Ok(()),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    /// `(bin midpoint s, max |χ| in bin)` for nonempty bins, sorted by s.
    pub bins: Vec<(f64, f64)>,
    pub nu_fit: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub fit_range: (f64, f64),
    pub bins_in_fit: usize,
    pub s_max: f64,
}

impl DecayFit {
    /// Fitted envelope `exp(intercept − ν s)`.
    pub fn envelope(&self, s: f64) -> f64 {
        (self.intercept - self.nu_fit * s).exp()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct DecayOptions {
    /// Overrides the default fit range `[1, 0.8 s_max]`.
    pub fit_range: Option<(f64, f64)>,
    pub exec: Exec,
}

pub fn decay_profile(chi: &LagrangeFunction, grid: &[Point], mesh: &MeshStats, n_bins: usize) -> Result<DecayFit> {
    decay_profile_with(chi, grid, mesh, n_bins, DecayOptions::default())
}

pub fn decay_profile_with(
    chi: &LagrangeFunction,
    grid: &[Point],
    mesh: &MeshStats,
    n_bins: usize,
    opts: DecayOptions,
) -> Result<DecayFit> {
    let h = mesh.mesh_norm_h;
    if !(h > 0.0) {
        return Err(KilabError::Argument(format!("mesh norm must be positive, got {h}")));
    }
    let man = chi.base.points().manifold();
    check_grid(man, grid)?;
    let center = chi.center().coords();
    let dist: Vec<f64> = grid
        .iter()
        .map(|x| geometry::distance_unchecked(x.coords(), center, man.kind()))
        .collect();
    let s_max = match man.kind() {
        ManifoldKind::UnitSphere2 => (std::f64::consts::PI - ANTIPODE_MARGIN) / h,
        ManifoldKind::FlatBox => dist.iter().fold(0.0, |a: f64, &d| a.max(d)) / h,
    };
    let values = chi.eval_many(grid, opts.exec);
    let samples: Vec<(f64, f64)> = dist.iter().zip(&values).map(|(d, v)| (d / h, v.abs())).collect();
    fit_decay(&samples, s_max, n_bins, opts.fit_range)
}

/// Bins `(s, |χ|)` samples on `[0, s_max]`, keeps per-bin maxima and fits
/// `ln max = intercept − ν s` by least squares over the fit range.
///
/// The default range is `[1, 0.8 s_max]`, shortened to end before the first
/// bin that sits within [`FLOOR_FACTOR`] of the far-field floor (median of
/// the bin maxima beyond `s_max/2`). The cut is skipped when the profile
/// never decays by [`FLOOR_MIN_DEPTH`], e.g. for constant data.
pub fn fit_decay(samples: &[(f64, f64)], s_max: f64, n_bins: usize, fit_range: Option<(f64, f64)>) -> Result<DecayFit> {
    if n_bins < 4 {
        return Err(KilabError::Argument(format!("need at least 4 bins, got {n_bins}")));
    }
    if !(s_max > 0.0 && s_max.is_finite()) {
        return Err(KilabError::Argument(format!("s_max must be positive, got {s_max}")));
    }
    let width = s_max / n_bins as f64;
    let mut maxima: Vec<Option<f64>> = vec![None; n_bins];
    for &(s, v) in samples {
        if !(0.0..=s_max).contains(&s) {
            continue;
        }
        let b = ((s / width) as usize).min(n_bins - 1);
        maxima[b] = Some(maxima[b].map_or(v, |m: f64| m.max(v)));
    }
    let bins: Vec<(f64, f64)> = maxima
        .iter()
        .enumerate()
        .filter_map(|(b, m)| m.map(|m| ((b as f64 + 0.5) * width, m)))
        .collect();
    let (lo, hi) = match fit_range {
        Some(r) => r,
        None => (1.0, floor_limited_end(&bins, 1.0, 0.8 * s_max, s_max)),
    };
    let pts: Vec<(f64, f64)> = bins
        .iter()
        .filter(|(s, m)| *s >= lo && *s <= hi && *m > 0.0)
        .map(|&(s, m)| (s, m.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(KilabError::InsufficientData(format!(
            "{} nonempty bins in fit range [{lo}, {hi}], need 2",
            pts.len()
        )));
    }
    let line = least_squares(&pts)?;
    Ok(DecayFit {
        bins,
        nu_fit: -line.slope,
        intercept: line.intercept,
        r_squared: line.r_squared,
        fit_range: (lo, hi),
        bins_in_fit: pts.len(),
        s_max,
    })
}

fn floor_limited_end(bins: &[(f64, f64)], lo: f64, hi: f64, s_max: f64) -> f64 {
    let mut far: Vec<f64> = bins
        .iter()
        .filter(|(s, m)| *s >= 0.5 * s_max && *m > 0.0)
        .map(|b| b.1)
        .collect();
    if far.is_empty() {
        return hi;
    }
    far.sort_by(f64::total_cmp);
    let floor = far[far.len() / 2];
    let head = bins.iter().find(|(s, _)| *s >= lo).map_or(0.0, |b| b.1);
    if !(floor < FLOOR_MIN_DEPTH * head) {
        return hi;
    }
    bins.iter()
        .find(|(s, m)| *s >= lo && *m <= FLOOR_FACTOR * floor)
        .map_or(hi, |b| hi.min(b.0 - 1e-9 * s_max))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
    /// `1 − SS_res/SS_tot`; 1 for data with no spread in y.
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn least_squares(pts: &[(f64, f64)]) -> Result<Line> {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return Err(KilabError::InsufficientData("line fit needs two points".into()));
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(KilabError::InsufficientData("line fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(Line {
        slope,
        intercept,
        r_squared,
    })
}

/// Named convergence targets.
#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    /// `exp(x·z₀)`.
    ExpDot(Vec<f64>),
    /// `f ≡ c`.
    Constant(f64),
    /// `κ(·, ξ₁)` for the first node of each level.
    KernelTranslate,
}

impl Target {
    /// Parses `exp-dot`, `one`, `const:<c>` or `span`; `exp-dot` uses the
    /// north pole (sphere) or the first axis (box) unless `z0` is given.
    pub fn parse(name: &str, man: &ManifoldDescriptor, z0: Option<Vec<f64>>) -> Result<Target> {
        let dim = man.ambient_dimension();
        match name {
            "exp-dot" => {
                let z = z0.unwrap_or_else(|| {
                    let mut z = vec![0.0; dim];
                    z[if man.kind() == ManifoldKind::UnitSphere2 { 2 } else { 0 }] = 1.0;
                    z
                });
                if z.len() != dim {
                    return Err(KilabError::Dimension {
                        expected: dim,
                        got: z.len(),
                    });
                }
                Ok(Target::ExpDot(z))
            }
            "one" => Ok(Target::Constant(1.0)),
            "span" => Ok(Target::KernelTranslate),
            other => match other.strip_prefix("const:") {
                Some(c) => c
                    .parse()
                    .map(Target::Constant)
                    .map_err(|_| KilabError::Config(format!("bad constant in target '{other}'"))),
                None => Err(KilabError::Config(format!(
                    "unknown target '{other}' (expected exp-dot, one, const:<c> or span)"
                ))),
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            Target::ExpDot(z) => format!("exp-dot:z0={z:?}"),
            Target::Constant(c) => format!("const:{c}"),
            Target::KernelTranslate => "span".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub sup_err: f64,
    /// `NaN` on the first row.
    pub rate_local: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `ln err` against `ln h`; `NaN` when fewer than
    /// two rows have positive error.
    pub rate: f64,
    pub kernel: String,
    pub target: String,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ConvergenceOptions {
    pub jitter: Option<f64>,
    pub exec: Exec,
}

/// Node family used at each level: Fibonacci on the sphere, Halton in a box.
pub fn level_nodes(man: &ManifoldDescriptor, n: usize) -> Result<PointSet> {
    match man.kind() {
        ManifoldKind::UnitSphere2 => pointsets::fibonacci_sphere(n),
        ManifoldKind::FlatBox => pointsets::halton_box(n, man),
    }
}

pub fn convergence_study(
    spec: &KernelSpec,
    target: &Target,
    sizes: &[usize],
    man: &ManifoldDescriptor,
    grid: &[Point],
) -> Result<ConvergenceStudy> {
    convergence_study_with(spec, target, sizes, man, grid, ConvergenceOptions::default())
}

pub fn convergence_study_with(
    spec: &KernelSpec,
    target: &Target,
    sizes: &[usize],
    man: &ManifoldDescriptor,
    grid: &[Point],
    opts: ConvergenceOptions,
) -> Result<ConvergenceStudy> {
    if sizes.is_empty() {
        return Err(KilabError::Argument("no sizes given".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(KilabError::Argument(format!("sizes must be strictly increasing, got {sizes:?}")));
    }
    if grid.is_empty() {
        return Err(KilabError::Argument("empty evaluation grid".into()));
    }
    check_grid(man, grid)?;
    let kernel = Arc::new(Kernel::new(spec.clone())?);
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let xi = Arc::new(level_nodes(man, n)?);
        let exact = exact_values(target, &kernel, &xi, grid);
        let sys = interpolation::assemble_with(
            Arc::clone(&kernel),
            Arc::clone(&xi),
            AssembleOptions {
                jitter: opts.jitter,
                exec: opts.exec,
            },
        )?;
        let data = exact_values(target, &kernel, &xi, xi.nodes());
        let s = interpolation::interpolate(&sys, &data)?;
        let approx = s.eval_many(grid, opts.exec);
        let sup_err = approx
            .iter()
            .zip(&exact)
            .fold(0.0, |m: f64, (a, e)| m.max((a - e).abs()));
        let h = geometry::mesh_stats_with(&xi, grid, opts.exec)?.mesh_norm_h;
        log::info!("convergence level n={n}: h={h:.6e} sup_err={sup_err:.6e}");
        rows.push(ConvergenceRow {
            n,
            h,
            sup_err,
            rate_local: f64::NAN,
        });
    }
    rows.sort_by(|a, b| b.h.total_cmp(&a.h));
    for i in 1..rows.len() {
        let (prev, cur) = (rows[i - 1], rows[i]);
        rows[i].rate_local = (cur.sup_err / prev.sup_err).ln() / (cur.h / prev.h).ln();
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.sup_err > 0.0)
        .map(|r| (r.h.ln(), r.sup_err.ln()))
        .collect();
    let rate = least_squares(&pts).map_or(f64::NAN, |l| l.slope);
    Ok(ConvergenceStudy {
        rows,
        rate,
        kernel: spec.to_string(),
        target: target.name(),
    })
}

fn exact_values(target: &Target, kernel: &Kernel, xi: &PointSet, points: &[Point]) -> Vec<f64> {
    match target {
        Target::ExpDot(z) => points.iter().map(|p| geometry::dot(p.coords(), z).exp()).collect(),
        Target::Constant(c) => vec![*c; points.len()],
        Target::KernelTranslate => {
            let c = xi.nodes()[0].coords();
            points.iter().map(|p| kernel.eval_coords(p.coords(), c)).collect()
        }
    }
}
